//! Signed-distance oracles: an inscribed sphere polyhedron and ray parity.

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use softdeform::mesh::{extract_surface, generate_random_organ, MeshGenConfig, SurfaceMesh, TetMesh};
use softdeform::voxel::{signed_distance_grid, GridGeometry};
use softdeform::Vec3;

/// Largest deviation of the grid SDF of a triangulated sphere from the
/// analytic sphere distance, and the largest facet sagitta. Every surface
/// point lies within one sagitta of the sphere, so the deviation is
/// bounded by it.
pub fn sphere_sdf_deviation(n: usize) -> (f64, f64) {
    let (r, c) = (0.1, Vec3::repeat(0.15));
    let surface = extract_surface(&TetMesh::ellipsoid(12, Vec3::repeat(r), c)).unwrap();
    let sagitta = (0..surface.triangles.len())
        .map(|t| {
            let [a, b, d] = surface.triangle(t);
            let normal = (b - a).cross(&(d - a)).normalize();
            r - normal.dot(&(a - c)).abs()
        })
        .fold(0.0, f64::max);
    let g = GridGeometry::new(n, 0.3);
    let sdf = signed_distance_grid(&surface, &g);
    let worst = sdf
        .iter()
        .enumerate()
        .map(|(i, s)| (s - ((g.point_at(i) - c).norm() - r)).abs())
        .fold(0.0, f64::max);
    (worst, sagitta)
}

/// Moller-Trumbore ray/triangle hit with `t > 0`.
fn ray_hits(o: &Vec3, d: &Vec3, [a, b, c]: [Vec3; 3]) -> bool {
    let (e1, e2) = (b - a, c - a);
    let p = d.cross(&e2);
    let det = e1.dot(&p);
    if det.abs() < 1e-300 {
        return false;
    }
    let inv = 1.0 / det;
    let s = o - a;
    let u = s.dot(&p) * inv;
    if !(0.0..=1.0).contains(&u) {
        return false;
    }
    let q = s.cross(&e1);
    let v = d.dot(&q) * inv;
    if v < 0.0 || u + v > 1.0 {
        return false;
    }
    e2.dot(&q) * inv > 0.0
}

fn inside_by_parity(surface: &SurfaceMesh, p: &Vec3) -> bool {
    let d = Vec3::new(0.5773, 0.6129, 0.5395).normalize();
    (0..surface.triangles.len()).filter(|&t| ray_hits(p, &d, surface.triangle(t))).count() % 2 == 1
}

/// Compares the SDF sign with the crossing parity of an oblique ray on
/// `points` random grid points of each of the first `organs` valid random
/// organs. Points within 1e-6 m of the surface are skipped. Returns
/// (organs, points checked, mismatches).
pub fn parity_mismatches(organs: usize, points: usize, n: usize) -> (usize, usize, usize) {
    let cfg = MeshGenConfig::default();
    let g = GridGeometry::new(n, cfg.domain_side);
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let all: Vec<usize> = (0..g.len()).collect();
    let (mut done, mut checked, mut bad) = (0, 0, 0);
    let mut seed = 1000;
    while done < organs {
        let organ = generate_random_organ(seed, &cfg);
        seed += 1;
        if !organ.is_valid() {
            continue;
        }
        let surface = extract_surface(&organ.mesh).unwrap();
        let sdf = signed_distance_grid(&surface, &g);
        for &i in all.sample(&mut rng, points) {
            if sdf[i].abs() < 1e-6 {
                continue;
            }
            checked += 1;
            if inside_by_parity(&surface, &g.point_at(i)) != (sdf[i] < 0.0) {
                bad += 1;
            }
        }
        done += 1;
    }
    (done, checked, bad)
}
