use super::{GridGeometry, VoxelizeConfig};
use crate::Vec3;

/// Calls `f(idx, dist2)` for each grid point within `radius` of `center`.
fn for_each_point_near(geometry: &GridGeometry, center: &Vec3, radius: f64, mut f: impl FnMut(usize, f64)) {
    let r2 = radius * radius;
    let ranges = [0, 1, 2].map(|a| geometry.index_range(center[a] - radius, center[a] + radius));
    let (Some((i0, i1)), Some((j0, j1)), Some((k0, k1))) = (ranges[0], ranges[1], ranges[2]) else {
        return;
    };
    for k in k0..=k1 {
        for j in j0..=j1 {
            for i in i0..=i1 {
                let d2 = (geometry.point(i, j, k) - center).norm_squared();
                if d2 <= r2 {
                    f(geometry.index(i, j, k), d2);
                }
            }
        }
    }
}

/// Normalized Gaussian interpolation of a per-vertex vector field.
///
/// `region` restricts the contributing vertices (all when `None`). Grid
/// points with no vertex inside the kernel support receive zero.
pub fn splat_vertex_field(
    positions: &[Vec3],
    field: &[Vec3],
    region: Option<&[u32]>,
    geometry: &GridGeometry,
    cfg: &VoxelizeConfig,
) -> Vec<Vec3> {
    assert_eq!(positions.len(), field.len());
    let sigma = cfg.sigma(geometry);
    let inv = 1.0 / (2.0 * sigma * sigma);
    let mut weight = vec![0.0; geometry.len()];
    let mut acc = vec![Vec3::zeros(); geometry.len()];
    let mut splat_one = |v: usize| {
        for_each_point_near(geometry, &positions[v], cfg.kernel_cutoff * sigma, |idx, d2| {
            let w = (-d2 * inv).exp();
            weight[idx] += w;
            acc[idx] += field[v] * w;
        });
    };
    match region {
        Some(r) => r.iter().for_each(|&v| splat_one(v as usize)),
        None => (0..positions.len()).for_each(splat_one),
    }
    acc.iter()
        .zip(&weight)
        .map(|(a, &w)| if w > 0.0 { a / w } else { Vec3::zeros() })
        .collect()
}

/// Grid points within one spacing of a region vertex and with
/// `|s| <= spacing`: the near-surface shell under that region.
pub fn shell_mask(points: impl IntoIterator<Item = Vec3>, sdf: &[f64], geometry: &GridGeometry) -> Vec<bool> {
    let h = geometry.spacing();
    let mut mask = vec![false; geometry.len()];
    for p in points {
        for_each_point_near(geometry, &p, h, |idx, _| {
            if sdf[idx].abs() <= h {
                mask[idx] = true;
            }
        });
    }
    mask
}

/// Binary zero-displacement marker (before channel scaling). `region`
/// holds surface vertex indices.
pub fn rasterize_zero_region(
    surface: &crate::mesh::SurfaceMesh,
    region: &[u32],
    sdf: &[f64],
    geometry: &GridGeometry,
) -> Vec<f64> {
    shell_mask(region.iter().map(|&v| surface.vertices[v as usize]), sdf, geometry)
        .into_iter()
        .map(|b| if b { 1.0 } else { 0.0 })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn coincident_vertex_is_exact() {
        let g = GridGeometry::new(9, 0.8);
        let pos = vec![g.point(3, 4, 5)];
        let val = vec![Vec3::new(0.3, -0.2, 0.7)];
        let out = splat_vertex_field(&pos, &val, None, &g, &VoxelizeConfig::default());
        assert_eq!(out[g.index(3, 4, 5)], val[0]);
        assert_eq!(out[g.index(8, 8, 8)], Vec3::zeros());
    }

    #[test]
    fn symmetric_pair_cancels() {
        let g = GridGeometry::new(9, 0.8);
        let c = g.point(4, 4, 4);
        let off = Vec3::new(0.05, 0.02, -0.03);
        let d = Vec3::new(0.1, 0.2, 0.3);
        let out = splat_vertex_field(&[c + off, c - off], &[d, -d], None, &g, &VoxelizeConfig::default());
        assert!(out[g.index(4, 4, 4)].norm() < 1e-17);
    }

    #[test]
    fn matches_dense_kernel_sum() {
        let g = GridGeometry::new(12, 0.3);
        let cfg = VoxelizeConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pos: Vec<Vec3> = (0..20)
            .map(|_| Vec3::from_fn(|_, _| rng.random_range(0.08..0.22)))
            .collect();
        let val: Vec<Vec3> = (0..20).map(|_| Vec3::from_fn(|_, _| rng.random_range(-1.0..1.0))).collect();
        let out = splat_vertex_field(&pos, &val, None, &g, &cfg);
        let sigma = cfg.sigma(&g);
        let cutoff = cfg.kernel_cutoff * sigma;
        for idx in 0..g.len() {
            let p = g.point_at(idx);
            let (mut w, mut a) = (0.0, Vec3::zeros());
            for (x, v) in pos.iter().zip(&val) {
                let d2 = (p - x).norm_squared();
                if d2 <= cutoff * cutoff {
                    let wi = (-d2 / (2.0 * sigma * sigma)).exp();
                    w += wi;
                    a += v * wi;
                }
            }
            let oracle = if w > 0.0 { a / w } else { Vec3::zeros() };
            assert!((out[idx] - oracle).norm() <= 1e-12, "{idx}");
        }
    }

    #[test]
    fn empty_region_rasterizes_to_zero() {
        let g = GridGeometry::new(6, 0.3);
        let mesh = crate::mesh::TetMesh::ellipsoid(4, Vec3::repeat(0.08), Vec3::repeat(0.15));
        let surface = crate::mesh::extract_surface(&mesh).unwrap();
        let sdf = super::super::signed_distance_grid(&surface, &g);
        assert!(rasterize_zero_region(&surface, &[], &sdf, &g).iter().all(|&z| z == 0.0));
    }
}
