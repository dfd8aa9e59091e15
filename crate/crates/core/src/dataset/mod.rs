//! End-to-end sample generation: random organ, boundary conditions,
//! FEM solve, voxelization, acceptance, flips and persistence.

mod manifest;
mod sample;

pub use manifest::{DatasetManifest, ManifestEntry, Split, MANIFEST_HEADER};
pub use sample::{
    augment_flips, load_sample, read_sample, save_sample, write_sample, Sample, SampleMeta, INPUT_CHANNELS, SAMPLE_MAGIC,
    TARGET_CHANNELS, UVIS_CHANNEL,
};

use crate::config::digest_of;
use crate::fem::{self, BCSpec, FemError, MaterialParams, SolverSettings, SurfaceRegion, VertexField};
use crate::io::FormatError;
use crate::mesh::{extract_surface, generate_random_organ, MeshGenConfig, SurfaceMesh, ValidityReport, MIN_TET_QUALITY};
use crate::voxel::{assemble_sample, GridGeometry, VoxelizeConfig};
use crate::Vec3;
use rand::seq::SliceRandom;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::Range;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error("invalid dataset config: {0}")]
    Config(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DatasetConfig {
    pub grid_n: usize,
    pub side_length: f64,
    pub mesh: MeshGenConfig,
    pub material: MaterialParams,
    pub solver: SolverSettings,
    pub voxel: VoxelizeConfig,
    /// Geodesic radius ranges, meters.
    pub zero_radius: [f64; 2],
    pub force_radius: [f64; 2],
    pub visible_radius: [f64; 2],
    /// Upper bound of the sampled force magnitude, Newtons.
    pub max_force: f64,
    /// Samples whose largest vertex displacement exceeds this are discarded.
    pub max_displacement: f64,
    /// Fraction of base meshes held out for validation.
    pub validation_fraction: f64,
    pub split_seed: u64,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        Self {
            grid_n: 32,
            side_length: 0.3,
            mesh: MeshGenConfig::default(),
            material: MaterialParams::default(),
            solver: SolverSettings::default(),
            voxel: VoxelizeConfig::default(),
            zero_radius: [0.025, 0.055],
            force_radius: [0.015, 0.025],
            visible_radius: [0.02, 0.12],
            max_force: 1.0,
            max_displacement: 0.10,
            validation_fraction: 0.1,
            split_seed: 0,
        }
    }
}

impl DatasetConfig {
    pub fn validate(&self) -> Result<(), DatasetError> {
        let bad = |m: &str| Err(DatasetError::Config(m.into()));
        if self.grid_n < 16 || self.grid_n % 8 != 0 {
            return bad("grid_n must be a multiple of 8 and at least 16");
        }
        if !(self.side_length > 0.0) {
            return bad("side_length must be positive");
        }
        if (self.mesh.domain_side - self.side_length).abs() > 1e-12 {
            return bad("mesh.domain_side must equal side_length");
        }
        for r in [self.zero_radius, self.force_radius, self.visible_radius] {
            if !(r[0] >= 0.0 && r[0] <= r[1]) {
                return bad("radius ranges must satisfy 0 <= min <= max");
            }
        }
        if !(0.0..1.0).contains(&self.validation_fraction) {
            return bad("validation_fraction must lie in [0, 1)");
        }
        self.material.validate().map_err(|e| DatasetError::Config(e.to_string()))
    }

    pub fn geometry(&self) -> GridGeometry {
        GridGeometry::new(self.grid_n, self.side_length)
    }

    pub fn digest(&self) -> String {
        digest_of(self)
    }
}

/// Independent random stream per (seed, purpose).
fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

const BC_STREAM: u64 = 1;

fn random_unit(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = Vec3::from_fn(|_, _| rng.random_range(-1.0..1.0));
        let n2 = v.norm_squared();
        if n2 > 1e-6 && n2 <= 1.0 {
            return v / n2.sqrt();
        }
    }
}

/// Draws the fixed patch, loaded patch, force and visible patch.
/// Returns the boundary conditions and the visible region (surface
/// vertex indices).
pub fn sample_boundary_conditions(seed: u64, surface: &SurfaceMesh, cfg: &DatasetConfig) -> (BCSpec, Vec<u32>) {
    let mut rng = substream(seed, BC_STREAM);
    let nv = surface.vertices.len() as u32;
    let uniform = |r: [f64; 2], rng: &mut ChaCha8Rng| if r[0] == r[1] { r[0] } else { rng.random_range(r[0]..r[1]) };
    let zero_region = SurfaceRegion {
        seed_vertex: rng.random_range(0..nv),
        radius: uniform(cfg.zero_radius, &mut rng),
    };
    let force_region = SurfaceRegion {
        seed_vertex: rng.random_range(0..nv),
        radius: uniform(cfg.force_radius, &mut rng),
    };
    let force = random_unit(&mut rng) * (cfg.max_force * rng.random_range(0.0..1.0));
    let visible_seed = rng.random_range(0..nv);
    let visible_radius = uniform(cfg.visible_radius, &mut rng);
    let visible = fem::select_surface_region(surface, visible_seed, visible_radius);
    (
        BCSpec {
            zero_region,
            force_region,
            force,
        },
        visible,
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RejectReason {
    OutsideCube,
    SelfIntersecting,
    LowQuality,
    NonConvergence,
    TooLarge,
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RejectReason::OutsideCube => "outside-cube",
            RejectReason::SelfIntersecting => "self-intersecting",
            RejectReason::LowQuality => "low-quality",
            RejectReason::NonConvergence => "non-convergence",
            RejectReason::TooLarge => "too-large",
        })
    }
}

/// Mesh-only part of the acceptance rules.
pub fn check_mesh(validity: &ValidityReport) -> Result<(), RejectReason> {
    if !validity.inside_domain {
        Err(RejectReason::OutsideCube)
    } else if validity.self_intersecting {
        Err(RejectReason::SelfIntersecting)
    } else if !(validity.min_tet_quality >= MIN_TET_QUALITY) {
        Err(RejectReason::LowQuality)
    } else {
        Ok(())
    }
}

/// Decides whether a simulated sample is kept.
pub fn accept_sample(
    validity: &ValidityReport,
    solve: Result<&VertexField, &FemError>,
    max_displacement: f64,
) -> Result<(), RejectReason> {
    check_mesh(validity)?;
    let u = solve.map_err(|_| RejectReason::NonConvergence)?;
    if !u.is_finite() {
        return Err(RejectReason::NonConvergence);
    }
    if u.max_norm() > max_displacement {
        return Err(RejectReason::TooLarge);
    }
    Ok(())
}

/// Result of simulating one base seed.
pub enum BaseOutcome {
    Accepted(Sample),
    Rejected(RejectReason),
}

/// Full pipeline for one base seed, without persistence.
pub fn simulate_base(seed: u64, cfg: &DatasetConfig) -> BaseOutcome {
    let organ = generate_random_organ(seed, &cfg.mesh);
    if let Err(r) = check_mesh(&organ.validity) {
        return BaseOutcome::Rejected(r);
    }
    let surface = match extract_surface(&organ.mesh) {
        Ok(s) => s,
        Err(_) => return BaseOutcome::Rejected(RejectReason::SelfIntersecting),
    };
    let (bc, visible) = sample_boundary_conditions(seed, &surface, cfg);
    let solve = fem::solve_static(&organ.mesh, &cfg.material, &bc, &cfg.solver).map(|(u, _)| u);
    if let Err(r) = accept_sample(&organ.validity, solve.as_ref(), cfg.max_displacement) {
        log::debug!("seed {seed}: rejected ({r})");
        return BaseOutcome::Rejected(r);
    }
    let u = solve.expect("accepted solve");
    BaseOutcome::Accepted(assemble_sample(
        &organ.mesh,
        &surface,
        &u,
        &bc,
        &visible,
        &cfg.geometry(),
        &cfg.voxel,
        seed,
    ))
}

#[derive(Clone, Debug)]
pub struct GenerationReport {
    pub manifest_path: PathBuf,
    pub manifest: DatasetManifest,
    pub accepted: Vec<u64>,
    pub rejected: Vec<(u64, RejectReason)>,
}

pub const MANIFEST_FILE: &str = "manifest.txt";
pub const REJECTIONS_FILE: &str = "rejections.txt";

/// Simulates every seed in `seeds` (in parallel), writes the eight flips
/// of each accepted sample under `out_dir/samples`, and writes the
/// manifest and rejection log. Base meshes are split between training and
/// validation as a whole.
pub fn generate_dataset(cfg: &DatasetConfig, seeds: Range<u64>, out_dir: &Path) -> Result<GenerationReport, DatasetError> {
    cfg.validate()?;
    let sample_dir = out_dir.join("samples");
    std::fs::create_dir_all(&sample_dir)?;
    let digest = digest_of(&(cfg, seeds.start, seeds.end));

    let outcomes: Vec<(u64, Result<Option<RejectReason>, std::io::Error>)> = seeds
        .clone()
        .into_par_iter()
        .map(|seed| {
            let res = match simulate_base(seed, cfg) {
                BaseOutcome::Rejected(r) => Ok(Some(r)),
                BaseOutcome::Accepted(s) => augment_flips(&s)
                    .iter()
                    .try_for_each(|f| save_sample(&sample_dir.join(sample_file_name(seed, f.meta.flip)), f))
                    .map(|_| None),
            };
            (seed, res)
        })
        .collect();

    let mut accepted = Vec::new();
    let mut rejected = Vec::new();
    for (seed, res) in outcomes {
        match res? {
            None => accepted.push(seed),
            Some(r) => rejected.push((seed, r)),
        }
    }

    let validation = choose_validation(&accepted, cfg.validation_fraction, cfg.split_seed);
    let entries = accepted
        .iter()
        .flat_map(|&seed| {
            let split = if validation.contains(&seed) { Split::Validation } else { Split::Train };
            (0..8u8).map(move |f| ManifestEntry {
                split,
                base_seed: seed,
                path: format!("samples/{}", sample_file_name(seed, f)),
            })
        })
        .collect();
    let manifest = DatasetManifest { digest: digest.clone(), entries };
    let manifest_path = out_dir.join(MANIFEST_FILE);
    manifest.save(&manifest_path)?;

    let mut log = format!("digest {digest}\n");
    for (seed, r) in &rejected {
        log.push_str(&format!("{seed} {r}\n"));
    }
    std::fs::write(out_dir.join(REJECTIONS_FILE), log)?;
    log::info!("generated {} base samples, rejected {}", accepted.len(), rejected.len());

    Ok(GenerationReport {
        manifest_path,
        manifest,
        accepted,
        rejected,
    })
}

pub fn sample_file_name(seed: u64, flip: u8) -> String {
    format!("{seed:08}_{flip}.smp")
}

/// Base seeds held out for validation: a seeded shuffle, rounded
/// fraction, at least one when there are two or more bases.
fn choose_validation(accepted: &[u64], fraction: f64, split_seed: u64) -> Vec<u64> {
    let mut order = accepted.to_vec();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(split_seed));
    let mut k = (fraction * accepted.len() as f64).round() as usize;
    if fraction > 0.0 && accepted.len() >= 2 {
        k = k.max(1);
    }
    order.truncate(k);
    order
}
