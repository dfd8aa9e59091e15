//! FEM oracles: affine patch test, uniaxial bar and energy gradient.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use softdeform::fem::{area_weighted_loads, elastic_energy, internal_forces, solve_problem, MaterialParams, SolverSettings, StaticProblem, VertexField};
use softdeform::mesh::{extract_surface, TetMesh};
use softdeform::Vec3;

pub fn tight() -> SolverSettings {
    SolverSettings {
        rel_tol: 1e-12,
        ..Default::default()
    }
}

/// Relative L2 error of the interior displacement when the boundary of a
/// block is driven by a small random affine field.
pub fn patch_test_error(seed: u64) -> f64 {
    let mesh = TetMesh::block([4, 4, 4], Vec3::repeat(0.1), Vec3::new(0.1, 0.1, 0.1));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = nalgebra::Matrix3::<f64>::from_fn(|_, _| rng.random_range(-1.0..1.0));
    let a = a * (1e-4 / a.norm());
    let surface: std::collections::HashSet<u32> = mesh.surface_vertex_ids.iter().copied().collect();
    let problem = StaticProblem {
        mesh: &mesh,
        material: MaterialParams::default(),
        fixed: mesh.surface_vertex_ids.iter().map(|&v| (v, a * mesh.vertices[v as usize])).collect(),
        nodal_forces: vec![Vec3::zeros(); mesh.vertices.len()],
    };
    let (u, _) = solve_problem(&problem, &tight()).unwrap();
    let (mut err, mut reference) = (0.0, 0.0);
    for (i, x) in mesh.vertices.iter().enumerate() {
        if surface.contains(&(i as u32)) {
            continue;
        }
        err += (u.0[i] - a * x).norm_squared();
        reference += (a * x).norm_squared();
    }
    (err / reference).sqrt()
}

/// Mean tip displacement of a clamped 10 x 2 x 2 cm bar under an axial
/// end load, and the bar formula FL/(EA).
pub fn bar_tip_displacement() -> (f64, f64) {
    let (l, w) = (0.1, 0.02);
    let mesh = TetMesh::block([20, 4, 4], Vec3::new(l, w, w), Vec3::zeros());
    let surface = extract_surface(&mesh).unwrap();
    let far: Vec<u32> = (0..surface.vertices.len() as u32)
        .filter(|&v| (surface.vertices[v as usize].x - l).abs() < 1e-12)
        .collect();
    let force = 0.01;
    let material = MaterialParams::new(1700.0, 1e-3).unwrap();
    let problem = StaticProblem {
        mesh: &mesh,
        material,
        fixed: (0..mesh.vertices.len() as u32)
            .filter(|&v| mesh.vertices[v as usize].x.abs() < 1e-12)
            .map(|v| (v, Vec3::zeros()))
            .collect(),
        nodal_forces: area_weighted_loads(&surface, &far, Vec3::new(force, 0.0, 0.0), mesh.vertices.len()),
    };
    let (u, _) = solve_problem(&problem, &SolverSettings::default()).unwrap();
    let tip: f64 = far.iter().map(|&v| u.0[surface.source_ids[v as usize] as usize].x).sum::<f64>() / far.len() as f64;
    (tip, force * l / (1700.0 * w * w))
}

fn jittered_block(rng: &mut ChaCha8Rng) -> TetMesh {
    let mut m = TetMesh::block([2, 2, 1], Vec3::new(0.06, 0.05, 0.03), Vec3::repeat(0.1));
    for v in &mut m.vertices {
        *v += Vec3::from_fn(|_, _| rng.random_range(-0.003..0.003));
    }
    m
}

/// Relative error between the internal forces and central differences of
/// the elastic energy on `meshes` randomly jittered and displaced blocks.
pub fn energy_gradient_errors(meshes: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let material = MaterialParams::default();
    (0..meshes)
        .map(|_| {
            let mesh = jittered_block(&mut rng);
            assert!(mesh.tet_volumes().iter().all(|&v| v > 0.0));
            let u = VertexField(
                (0..mesh.vertices.len())
                    .map(|_| Vec3::from_fn(|_, _| rng.random_range(-0.004..0.004)))
                    .collect(),
            );
            let f = internal_forces(&mesh, &u, &material).unwrap();
            let h = 1e-7;
            let (mut err, mut norm) = (0.0, 0.0);
            for v in 0..mesh.vertices.len() {
                for k in 0..3 {
                    let mut up = u.clone();
                    up.0[v][k] += h;
                    let mut um = u.clone();
                    um.0[v][k] -= h;
                    let fd = (elastic_energy(&mesh, &up, &material).unwrap() - elastic_energy(&mesh, &um, &material).unwrap()) / (2.0 * h);
                    err += (fd + f.0[v][k]).powi(2);
                    norm += f.0[v][k].powi(2);
                }
            }
            (err / norm).sqrt()
        })
        .collect()
}
