use super::{rasterize_zero_region, shell_mask, signed_distance_grid, splat_vertex_field, Grid3, GridGeometry, VoxelizeConfig};
use crate::dataset::{Sample, SampleMeta};
use crate::fem::{region_area, select_surface_region, BCSpec, VertexField};
use crate::mesh::{SurfaceMesh, TetMesh};

/// Builds the network input `(s, z, u_vis)` and target `u_tar` grids for
/// one simulation.
///
/// `u_tar` is splatted from all mesh vertices. `u_vis` copies the gridded
/// `u_tar` on the near-surface shell under `visible_region` (surface
/// vertex indices) and is zero elsewhere; that shell is also stored as
/// the sample's visibility mask.
#[allow(clippy::too_many_arguments)]
pub fn assemble_sample(
    mesh: &TetMesh,
    surface: &SurfaceMesh,
    u_tar: &VertexField,
    bc: &BCSpec,
    visible_region: &[u32],
    geometry: &GridGeometry,
    cfg: &VoxelizeConfig,
    seed: u64,
) -> Sample {
    let sdf = signed_distance_grid(surface, geometry);
    let zero_region = select_surface_region(surface, bc.zero_region.seed_vertex, bc.zero_region.radius);
    let z = rasterize_zero_region(surface, &zero_region, &sdf, geometry);
    let target = splat_vertex_field(&mesh.vertices, &u_tar.0, None, geometry, cfg);
    let visible = shell_mask(visible_region.iter().map(|&v| surface.vertices[v as usize]), &sdf, geometry);

    let m = geometry.len();
    let mut input = Grid3::zeros(*geometry, 5);
    let scale = cfg.channel_scale;
    for idx in 0..m {
        input.data[idx] = (sdf[idx] * scale) as f32;
        input.data[m + idx] = (z[idx] * scale) as f32;
        if visible[idx] {
            for c in 0..3 {
                input.data[(2 + c) * m + idx] = target[idx][c] as f32;
            }
        }
    }
    let vis: Vec<f64> = visible.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
    Sample {
        input,
        target: Grid3::from_vectors(*geometry, &target),
        visible: Grid3::from_scalar(*geometry, &vis),
        meta: SampleMeta {
            seed,
            flip: 0,
            visible_fraction: region_area(surface, visible_region) / surface.area(),
            max_target: u_tar.max_norm(),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::SurfaceRegion;
    use crate::mesh::extract_surface;
    use crate::Vec3;

    fn setup() -> (TetMesh, SurfaceMesh, BCSpec) {
        let mesh = TetMesh::rounded_ellipsoid(6, Vec3::new(0.07, 0.05, 0.06), Vec3::repeat(0.15), 0.6);
        let surface = extract_surface(&mesh).unwrap();
        let bc = BCSpec {
            zero_region: SurfaceRegion { seed_vertex: 0, radius: 0.04 },
            force_region: SurfaceRegion { seed_vertex: 5, radius: 0.02 },
            force: Vec3::zeros(),
        };
        (mesh, surface, bc)
    }

    #[test]
    fn full_visibility_copies_target_on_shell() {
        let (mesh, surface, bc) = setup();
        let g = GridGeometry::new(16, 0.3);
        let u = VertexField(mesh.vertices.iter().map(|x| Vec3::new(x.y, -x.z, 0.5 * x.x) * 0.1).collect());
        let all: Vec<u32> = (0..surface.vertices.len() as u32).collect();
        let s = assemble_sample(&mesh, &surface, &u, &bc, &all, &g, &VoxelizeConfig::default(), 1);
        let m = g.len();
        let mut shell = 0;
        for idx in 0..m {
            if s.visible.data[idx] > 0.0 {
                shell += 1;
                let d = s.input.vector_at(2, idx) - s.target.vector_at(0, idx);
                assert!(d.norm() <= 1e-10);
            } else {
                assert_eq!(s.input.vector_at(2, idx), Vec3::zeros());
            }
        }
        assert!(shell > 0);
        assert!((s.meta.visible_fraction - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_displacement_leaves_geometry_channels() {
        let (mesh, surface, bc) = setup();
        let g = GridGeometry::new(12, 0.3);
        let cfg = VoxelizeConfig::default();
        let region: Vec<u32> = (0..20).collect();
        let zero = assemble_sample(&mesh, &surface, &VertexField::zeros(mesh.vertices.len()), &bc, &region, &g, &cfg, 0);
        let u = VertexField(vec![Vec3::new(0.01, 0.0, 0.0); mesh.vertices.len()]);
        let moved = assemble_sample(&mesh, &surface, &u, &bc, &region, &g, &cfg, 0);
        let m = g.len();
        assert!(zero.input.data[2 * m..].iter().all(|&v| v == 0.0));
        assert!(zero.target.data.iter().all(|&v| v == 0.0));
        assert_eq!(zero.input.data[..2 * m], moved.input.data[..2 * m]);
    }

    #[test]
    fn full_size_shapes() {
        let (mesh, surface, bc) = setup();
        let g = GridGeometry::new(64, 0.3);
        let s = assemble_sample(&mesh, &surface, &VertexField::zeros(mesh.vertices.len()), &bc, &[0], &g, &VoxelizeConfig::default(), 0);
        assert_eq!(s.input.data.len(), 64 * 64 * 64 * 5);
        assert_eq!(s.target.data.len(), 64 * 64 * 64 * 3);
    }
}
