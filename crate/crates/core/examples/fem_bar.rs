//! Static FEM: a soft bar under a small tensile load compared with the
//! bar formula, then a random organ fixed on one patch and pushed on
//! another.
//!
//! ```bash
//! cargo run --release --example fem_bar
//! ```

use softdeform::fem::{
    area_weighted_loads, select_surface_region, solve_problem, solve_static, BCSpec, MaterialParams, SolverSettings,
    StaticProblem, SurfaceRegion,
};
use softdeform::mesh::{extract_surface, generate_random_organ, MeshGenConfig, TetMesh};
use softdeform::Vec3;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (l, w, force) = (0.1, 0.02, 0.01);
    let mesh = TetMesh::block([20, 4, 4], Vec3::new(l, w, w), Vec3::zeros());
    let surface = extract_surface(&mesh)?;
    let far: Vec<u32> = (0..surface.vertices.len() as u32)
        .filter(|&v| (surface.vertices[v as usize].x - l).abs() < 1e-12)
        .collect();
    let material = MaterialParams::new(1700.0, 1e-3)?;
    let problem = StaticProblem {
        mesh: &mesh,
        material,
        fixed: (0..mesh.vertices.len() as u32)
            .filter(|&v| mesh.vertices[v as usize].x.abs() < 1e-12)
            .map(|v| (v, Vec3::zeros()))
            .collect(),
        nodal_forces: area_weighted_loads(&surface, &far, Vec3::new(force, 0.0, 0.0), mesh.vertices.len()),
    };
    let (u, stats) = solve_problem(&problem, &SolverSettings::default())?;
    let tip = far.iter().map(|&v| u.0[surface.source_ids[v as usize] as usize].x).sum::<f64>() / far.len() as f64;
    let expected = force * l / (1700.0 * w * w);
    println!(
        "bar: tip {:.4} mm, F L / (E A) = {:.4} mm ({} Newton iterations)",
        tip * 1e3,
        expected * 1e3,
        stats.newton_iterations
    );

    let organ = generate_random_organ(3, &MeshGenConfig::default());
    let surface = extract_surface(&organ.mesh)?;
    let bc = BCSpec {
        zero_region: SurfaceRegion { seed_vertex: 0, radius: 0.04 },
        force_region: SurfaceRegion {
            seed_vertex: (surface.vertices.len() / 2) as u32,
            radius: 0.02,
        },
        force: Vec3::new(0.0, 0.0, 0.2),
    };
    let fixed = select_surface_region(&surface, 0, 0.04).len();
    match solve_static(&organ.mesh, &MaterialParams::default(), &bc, &SolverSettings::default()) {
        Ok((u, stats)) => println!(
            "organ: {fixed} fixed surface vertices, max |u| {:.2} mm after {} load steps",
            u.max_norm() * 1e3,
            stats.load_steps
        ),
        Err(e) => println!("organ: no equilibrium found ({e})"),
    }
    Ok(())
}
