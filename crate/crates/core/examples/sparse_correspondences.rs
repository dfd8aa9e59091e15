//! Turns a handful of annotated surface correspondences into a dense
//! visible-surface displacement and the matching network input channel.
//!
//! ```bash
//! cargo run --release --example sparse_correspondences
//! ```

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use softdeform::eval::{sparse_to_dense_surface, SparseCorrespondences};
use softdeform::fem::region_area;
use softdeform::mesh::{extract_surface, generate_random_organ, MeshGenConfig};
use softdeform::voxel::{shell_mask, signed_distance_grid, splat_vertex_field, GridGeometry, VoxelizeConfig};
use softdeform::Vec3;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let organ = generate_random_organ(1, &MeshGenConfig::default());
    let surface = extract_surface(&organ.mesh)?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    // 13 annotations on the upper half, all moved by a similar offset.
    let upper: Vec<usize> = (0..surface.vertices.len()).filter(|&v| surface.normals[v].z > 0.3).collect();
    let pairs = (0..13)
        .map(|_| {
            let p = surface.vertices[upper[rng.random_range(0..upper.len())]];
            let d = Vec3::new(0.004, 0.0, -0.008) + Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), 0.0) * 0.001;
            (p, p + d)
        })
        .collect();
    let corrs = SparseCorrespondences::new(pairs).ok_or("bad correspondences")?;
    let (field, covered) = sparse_to_dense_surface(&corrs, &surface.vertices, 0.03);
    println!(
        "{} of {} surface vertices covered ({:.1}% of the area)",
        covered.len(),
        surface.vertices.len(),
        100.0 * region_area(&surface, &covered) / surface.area()
    );

    let g = GridGeometry::new(32, 0.3);
    let sdf = signed_distance_grid(&surface, &g);
    let pos: Vec<Vec3> = covered.iter().map(|&v| surface.vertices[v as usize]).collect();
    let vals: Vec<Vec3> = covered.iter().map(|&v| field[v as usize]).collect();
    let splat = splat_vertex_field(&pos, &vals, None, &g, &VoxelizeConfig::default());
    let shell = shell_mask(pos.iter().copied(), &sdf, &g);
    let n = shell.iter().filter(|&&b| b).count();
    let mean = (0..g.len()).filter(|&i| shell[i]).map(|i| splat[i].norm()).sum::<f64>() / n.max(1) as f64;
    println!("visible input channel: {n} grid points, mean |u_vis| {:.2} mm", mean * 1e3);
    Ok(())
}
