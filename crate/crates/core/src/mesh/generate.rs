use super::{check_validity, extract_surface, TetMesh, ValidityReport};
use crate::geom::{tet_volume, Aabb};
use crate::Vec3;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Parameters of the template-warp organ generator. Lengths in meters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MeshGenConfig {
    /// Lattice cells across each axis of the ellipsoid template.
    pub template_resolution: usize,
    /// Blend between box (0) and ellipsoid (1) for the template shape.
    pub roundness: f64,
    /// Range of template semi-axes.
    pub semi_axis_min: f64,
    pub semi_axis_max: f64,
    /// Inclusive range of warp passes.
    pub passes_min: usize,
    pub passes_max: usize,
    /// Gaussian bumps per pass.
    pub bumps_per_pass: usize,
    /// Upper bound on bump amplitude.
    pub max_amplitude: f64,
    /// Amplitude is also capped at this multiple of the bump bandwidth,
    /// which bounds the bump's contribution to the warp gradient.
    pub max_bump_slope: f64,
    pub bandwidth_min: f64,
    pub bandwidth_max: f64,
    /// Side of the simulation cube.
    pub domain_side: f64,
    /// Maximum offset of the warped organ's bounding-box center from the
    /// cube center.
    pub center_jitter: f64,
}

impl Default for MeshGenConfig {
    fn default() -> Self {
        Self {
            template_resolution: 10,
            roundness: 0.6,
            semi_axis_min: 0.05,
            semi_axis_max: 0.09,
            passes_min: 3,
            passes_max: 8,
            bumps_per_pass: 2,
            max_amplitude: 0.06,
            max_bump_slope: 0.5,
            bandwidth_min: 0.04,
            bandwidth_max: 0.12,
            domain_side: 0.3,
            center_jitter: 0.02,
        }
    }
}

#[derive(Clone, Debug)]
pub struct GeneratedOrgan {
    pub mesh: TetMesh,
    pub validity: ValidityReport,
    /// Warp passes actually applied (a pass that inverts an element stops
    /// the warp).
    pub passes_applied: usize,
}

impl GeneratedOrgan {
    pub fn is_valid(&self) -> bool {
        self.validity.is_valid()
    }
}

fn random_unit(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = Vec3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v / n;
        }
    }
}

struct Bump {
    center: Vec3,
    amplitude: Vec3,
    bandwidth: f64,
}

/// Random organ-like mesh: an ellipsoid template deformed by several
/// passes of smooth Gaussian bumps centered on the current surface.
pub fn generate_random_organ(seed: u64, cfg: &MeshGenConfig) -> GeneratedOrgan {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let axes = Vec3::from_fn(|_, _| rng.random_range(cfg.semi_axis_min..=cfg.semi_axis_max));
    let half = cfg.domain_side / 2.0;
    let center = Vec3::from_fn(|_, _| half + rng.random_range(-cfg.center_jitter..=cfg.center_jitter));
    let mut mesh = TetMesh::rounded_ellipsoid(cfg.template_resolution, axes, Vec3::repeat(half), cfg.roundness);
    let surface = extract_surface(&mesh).expect("template boundary is manifold");

    let passes = rng.random_range(cfg.passes_min..=cfg.passes_max.max(cfg.passes_min));
    let mut applied = 0;
    let mut inverted = false;
    for _ in 0..passes {
        let mut bumps = Vec::with_capacity(cfg.bumps_per_pass);
        for _ in 0..cfg.bumps_per_pass {
            let sv = rng.random_range(0..surface.source_ids.len());
            let gid = surface.source_ids[sv] as usize;
            let c = mesh.vertices[gid];
            let outward = (c - mesh.vertices.iter().sum::<Vec3>() / mesh.vertices.len() as f64).normalize();
            let dir = (outward + random_unit(&mut rng) * 0.6).normalize();
            // Mostly extrusions, sometimes dents.
            let sign = if rng.random_range(0.0..1.0) < 0.75 { 1.0 } else { -1.0 };
            let bandwidth = rng.random_range(cfg.bandwidth_min..=cfg.bandwidth_max);
            let amp = rng.random_range(0.0..=1.0) * cfg.max_amplitude.min(cfg.max_bump_slope * bandwidth);
            bumps.push(Bump {
                center: c,
                amplitude: dir * (sign * amp),
                bandwidth,
            });
        }
        let warped: Vec<Vec3> = mesh
            .vertices
            .iter()
            .map(|p| {
                let mut d = Vec3::zeros();
                for b in &bumps {
                    let r2 = (p - b.center).norm_squared();
                    d += b.amplitude * (-r2 / (2.0 * b.bandwidth * b.bandwidth)).exp();
                }
                p + d
            })
            .collect();
        let ok = mesh.tets.iter().all(|&[a, b, c, d]| {
            tet_volume(
                &warped[a as usize],
                &warped[b as usize],
                &warped[c as usize],
                &warped[d as usize],
            ) > 0.0
        });
        mesh.vertices = warped;
        applied += 1;
        if !ok {
            inverted = true;
            break;
        }
    }
    let bounds = Aabb::from_points(&mesh.vertices);
    let mesh = mesh.translated(center - bounds.center());
    let mut validity = check_validity(&mesh, cfg.domain_side);
    if inverted {
        validity.min_tet_quality = validity.min_tet_quality.min(0.0);
    }
    GeneratedOrgan {
        mesh,
        validity,
        passes_applied: applied,
    }
}
