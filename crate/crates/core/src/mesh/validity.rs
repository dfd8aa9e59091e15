use super::{SurfaceMesh, TetMesh};
use crate::geom::{triangles_intersect, Aabb, TriangleBvh};

/// Meshes with a worse element than this are discarded.
pub const MIN_TET_QUALITY: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ValidityReport {
    pub inside_domain: bool,
    pub self_intersecting: bool,
    /// Smallest inradius/circumradius ratio; non-positive if any element
    /// is inverted.
    pub min_tet_quality: f64,
}

impl ValidityReport {
    pub fn is_valid(&self) -> bool {
        self.inside_domain && !self.self_intersecting && self.min_tet_quality >= MIN_TET_QUALITY
    }
}

fn share_vertex(a: &[u32; 3], b: &[u32; 3]) -> bool {
    a.iter().any(|v| b.contains(v))
}

/// All pairs `(i, j)`, `i < j`, of triangles that share no vertex and
/// intersect. Uses a BVH over triangle boxes as prefilter.
pub fn self_intersecting_pairs(surface: &SurfaceMesh, first_only: bool) -> Vec<(usize, usize)> {
    let tris: Vec<_> = (0..surface.triangles.len()).map(|t| surface.triangle(t)).collect();
    let bvh = TriangleBvh::new(tris.clone());
    let mut out = Vec::new();
    for (i, ti) in tris.iter().enumerate() {
        let bi = Aabb::from_points(ti.iter());
        let mut hits = Vec::new();
        bvh.for_each_overlapping(&bi, |j| {
            if j > i && !share_vertex(&surface.triangles[i], &surface.triangles[j]) {
                hits.push(j);
            }
        });
        hits.sort_unstable();
        for j in hits {
            let tj = &tris[j];
            if triangles_intersect([&ti[0], &ti[1], &ti[2]], [&tj[0], &tj[1], &tj[2]]) {
                out.push((i, j));
                if first_only {
                    return out;
                }
            }
        }
    }
    out
}

/// Checks the domain bounds, surface self-intersection and element quality.
///
/// The boundary is rebuilt from the tets; a non-manifold boundary counts
/// as self-intersecting.
pub fn check_validity(mesh: &TetMesh, domain_side: f64) -> ValidityReport {
    let inside_domain = mesh
        .vertices
        .iter()
        .all(|v| v.iter().all(|&c| (0.0..=domain_side).contains(&c)));
    let self_intersecting = match super::extract_surface(mesh) {
        Ok(s) => !self_intersecting_pairs(&s, true).is_empty(),
        Err(_) => true,
    };
    ValidityReport {
        inside_domain,
        self_intersecting,
        min_tet_quality: mesh.min_tet_quality(),
    }
}
