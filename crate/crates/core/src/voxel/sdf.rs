//! Signed distance to a closed triangle surface.
//!
//! Magnitude is the exact point-triangle distance (BVH search). The sign
//! comes from crossing parity along grid rows parallel to x: a point is
//! inside when an odd number of surface crossings lie before it on its
//! row. Crossings use exact 2D orientation tests in the (y, z) plane with
//! a top-left rule on shared edges, so a row through an edge or vertex is
//! counted once per sheet of surface.

use super::GridGeometry;
use crate::geom::{orient2d, TriangleBvh};
use crate::mesh::SurfaceMesh;
use crate::Vec3;
use rayon::prelude::*;

fn top_left(p: [f64; 2], q: [f64; 2]) -> bool {
    // Counter-clockwise traversal in (u, v): left edges go down, top
    // edges are horizontal and go towards -u.
    q[1] < p[1] || (q[1] == p[1] && q[0] < p[0])
}

/// x coordinate where the line `(y, z) = (yz[0], yz[1])` crosses the
/// triangle, if it does.
fn crossing(tri: [&Vec3; 3], yz: [f64; 2]) -> Option<f64> {
    let mut v = [tri[0], tri[1], tri[2]];
    let mut p = v.map(|a| [a.y, a.z]);
    let area = orient2d(p[0], p[1], p[2]);
    if area == 0.0 {
        return None;
    }
    if area < 0.0 {
        v.swap(1, 2);
        p.swap(1, 2);
    }
    let mut w = [0.0; 3];
    for e in 0..3 {
        let (a, b) = (p[(e + 1) % 3], p[(e + 2) % 3]);
        let o = orient2d(a, b, yz);
        if o < 0.0 || (o == 0.0 && !top_left(a, b)) {
            return None;
        }
        w[e] = o;
    }
    let s = w[0] + w[1] + w[2];
    Some((w[0] * v[0].x + w[1] * v[1].x + w[2] * v[2].x) / s)
}

/// Sorted x coordinates of all surface crossings along grid row `(j, k)`.
pub fn row_crossings(surface: &SurfaceMesh, geometry: &GridGeometry, j: usize, k: usize) -> Vec<f64> {
    let yz = [geometry.point(0, j, k).y, geometry.point(0, j, k).z];
    let mut xs: Vec<f64> = (0..surface.triangles.len())
        .filter_map(|t| {
            let [a, b, c] = surface.triangles[t].map(|i| &surface.vertices[i as usize]);
            crossing([a, b, c], yz)
        })
        .collect();
    xs.sort_by(f64::total_cmp);
    xs
}

/// Signed distance at every grid point, negative inside. Points exactly
/// on the surface get `+0.0`.
pub fn signed_distance_grid(surface: &SurfaceMesh, geometry: &GridGeometry) -> Vec<f64> {
    let n = geometry.n;
    let tris: Vec<[Vec3; 3]> = (0..surface.triangles.len()).map(|t| surface.triangle(t)).collect();
    let bvh = TriangleBvh::new(tris.clone());

    // Bucket triangles by the rows their (y, z) boxes touch.
    let mut rows: Vec<Vec<u32>> = vec![Vec::new(); n * n];
    for (t, tri) in tris.iter().enumerate() {
        let lo = tri[0].inf(&tri[1]).inf(&tri[2]);
        let hi = tri[0].sup(&tri[1]).sup(&tri[2]);
        if let (Some((j0, j1)), Some((k0, k1))) = (geometry.index_range(lo.y, hi.y), geometry.index_range(lo.z, hi.z)) {
            for k in k0..=k1 {
                for j in j0..=j1 {
                    rows[k * n + j].push(t as u32);
                }
            }
        }
    }

    let mut out = vec![0.0; geometry.len()];
    out.par_chunks_mut(n).enumerate().for_each(|(row, line)| {
        let (j, k) = (row % n, row / n);
        let p0 = geometry.point(0, j, k);
        let mut xs: Vec<f64> = rows[row]
            .iter()
            .filter_map(|&t| {
                let tri = &tris[t as usize];
                crossing([&tri[0], &tri[1], &tri[2]], [p0.y, p0.z])
            })
            .collect();
        xs.sort_by(f64::total_cmp);
        for (i, v) in line.iter_mut().enumerate() {
            let p = geometry.point(i, j, k);
            let d = bvh.nearest(&p).0.sqrt();
            let before = xs.partition_point(|&x| x < p.x);
            *v = if d == 0.0 {
                0.0
            } else if before % 2 == 1 {
                -d
            } else {
                d
            };
        }
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::point_triangle_dist2;
    use crate::mesh::{extract_surface, TetMesh};

    #[test]
    fn single_triangle_crossing() {
        let (a, b, c) = (Vec3::new(1.0, 0.0, 0.0), Vec3::new(1.0, 1.0, 0.0), Vec3::new(1.0, 0.0, 1.0));
        assert_eq!(crossing([&a, &b, &c], [0.2, 0.2]), Some(1.0));
        assert_eq!(crossing([&a, &c, &b], [0.2, 0.2]), Some(1.0));
        assert_eq!(crossing([&a, &b, &c], [0.8, 0.8]), None);
    }

    #[test]
    fn shared_edge_counted_once() {
        // Unit square split along its diagonal; query on the diagonal.
        let v = [
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(0.0, 1.0, 1.0),
            Vec3::new(0.0, 0.0, 1.0),
        ];
        for q in [[0.5, 0.5], [0.25, 0.25], [0.0, 0.5], [1.0, 0.5], [0.5, 0.0]] {
            let hits = [crossing([&v[0], &v[1], &v[2]], q), crossing([&v[0], &v[2], &v[3]], q)];
            let count = hits.iter().flatten().count();
            let interior = q[0] > 0.0 && q[0] < 1.0 && q[1] > 0.0 && q[1] < 1.0;
            if interior {
                assert_eq!(count, 1, "{q:?}");
            } else {
                assert!(count <= 1, "{q:?}");
            }
        }
    }

    #[test]
    fn block_sdf_matches_box_oracle() {
        // Box [0.1, 0.2]^3 with grid lines running through its faces.
        let mesh = TetMesh::block([2, 3, 2], Vec3::repeat(0.1), Vec3::repeat(0.1));
        let surface = extract_surface(&mesh).unwrap();
        let g = GridGeometry::new(7, 0.3);
        let s = signed_distance_grid(&surface, &g);
        for idx in 0..g.len() {
            let p = g.point_at(idx);
            let q = (p - Vec3::repeat(0.15)).abs() - Vec3::repeat(0.05);
            let outside = q.sup(&Vec3::zeros()).norm();
            let inside = q.max().min(0.0);
            let oracle = outside + inside;
            assert!((s[idx] - oracle).abs() < 1e-12, "{p:?}: {} vs {oracle}", s[idx]);
        }
    }

    #[test]
    fn corner_matches_brute_force() {
        let mesh = TetMesh::ellipsoid(6, Vec3::new(0.05, 0.04, 0.06), Vec3::repeat(0.15));
        let surface = extract_surface(&mesh).unwrap();
        let g = GridGeometry::new(5, 0.3);
        let s = signed_distance_grid(&surface, &g);
        let p = g.point(0, 0, 0);
        let brute = (0..surface.triangles.len())
            .map(|t| {
                let [a, b, c] = surface.triangle(t);
                point_triangle_dist2(&p, &a, &b, &c)
            })
            .fold(f64::INFINITY, f64::min)
            .sqrt();
        assert!(s[0] > 0.0);
        assert_eq!(s[0], brute);
    }
}
