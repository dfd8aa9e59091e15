//! Static hyperelastic finite elements producing ground-truth
//! displacement fields.

pub mod element;
mod region;
mod solver;
pub mod sparse;

pub use region::{region_area, select_surface_region};
pub use solver::{area_weighted_loads, solve_problem, solve_static, SolveStats, SolverSettings, StaticProblem};

use crate::mesh::TetMesh;
use crate::Vec3;
use element::{energy_density, Lame, RestElement};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FemError {
    #[error("Newton solver did not converge: {0}")]
    NonConvergence(String),
    #[error("singular system: {0}")]
    SingularSystem(String),
    #[error("element {tet} is inverted (det F <= 0)")]
    InvertedElement { tet: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// Homogeneous isotropic material.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialParams {
    /// Pa
    pub youngs_modulus: f64,
    pub poisson_ratio: f64,
}

impl Default for MaterialParams {
    /// Soft liver tissue: 1.7 kPa, 0.35.
    fn default() -> Self {
        Self {
            youngs_modulus: 1700.0,
            poisson_ratio: 0.35,
        }
    }
}

impl MaterialParams {
    pub fn new(youngs_modulus: f64, poisson_ratio: f64) -> Result<Self, FemError> {
        let m = Self {
            youngs_modulus,
            poisson_ratio,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<(), FemError> {
        if !(self.youngs_modulus > 0.0) {
            return Err(FemError::InvalidInput("Young's modulus must be positive".into()));
        }
        if !(self.poisson_ratio > 0.0 && self.poisson_ratio < 0.5) {
            return Err(FemError::InvalidInput("Poisson ratio must lie in (0, 0.5)".into()));
        }
        Ok(())
    }

    pub fn lame(&self) -> Lame {
        let (e, nu) = (self.youngs_modulus, self.poisson_ratio);
        Lame {
            lambda: e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu)),
            mu: e / (2.0 * (1.0 + nu)),
        }
    }
}

/// A patch of the surface: seed vertex (surface numbering) and geodesic
/// radius in meters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceRegion {
    pub seed_vertex: u32,
    pub radius: f64,
}

/// Boundary conditions of one simulation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BCSpec {
    /// Fixed (zero displacement) patch.
    pub zero_region: SurfaceRegion,
    /// Patch receiving the load.
    pub force_region: SurfaceRegion,
    /// Total force over the patch, Newtons.
    pub force: Vec3,
}

/// One displacement vector per mesh vertex, meters.
#[derive(Clone, Debug, PartialEq)]
pub struct VertexField(pub Vec<Vec3>);

impl VertexField {
    pub fn zeros(n: usize) -> Self {
        Self(vec![Vec3::zeros(); n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max_norm(&self) -> f64 {
        self.0.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.iter().all(|c| c.is_finite()))
    }
}

pub(crate) fn rest_elements(mesh: &TetMesh) -> Result<Vec<RestElement>, FemError> {
    (0..mesh.tets.len())
        .map(|t| RestElement::new(mesh, t).ok_or(FemError::InvertedElement { tet: t }))
        .collect()
}

pub(crate) fn energy_of(elements: &[RestElement], u: &[Vec3], lame: Lame) -> Result<f64, FemError> {
    let mut total = 0.0;
    for (t, el) in elements.iter().enumerate() {
        let f = el.deformation_gradient(u);
        if f.determinant() <= 0.0 {
            return Err(FemError::InvertedElement { tet: t });
        }
        total += energy_density(&f, lame) * el.volume;
    }
    Ok(total)
}

/// Total strain energy in Joules: energy density times rest volume,
/// summed over elements.
pub fn elastic_energy(mesh: &TetMesh, u: &VertexField, material: &MaterialParams) -> Result<f64, FemError> {
    if u.len() != mesh.vertices.len() || !u.is_finite() {
        return Err(FemError::InvalidInput("displacement must be finite, one per vertex".into()));
    }
    energy_of(&rest_elements(mesh)?, &u.0, material.lame())
}

/// Internal elastic forces `-dE/du` per vertex.
pub fn internal_forces(mesh: &TetMesh, u: &VertexField, material: &MaterialParams) -> Result<VertexField, FemError> {
    let lame = material.lame();
    let mut f = vec![Vec3::zeros(); mesh.vertices.len()];
    for el in rest_elements(mesh)? {
        let g = element::element_gradient(&el, &el.deformation_gradient(&u.0), lame);
        for a in 0..4 {
            f[el.nodes[a] as usize] -= g[a];
        }
    }
    Ok(VertexField(f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Rotation3;

    #[test]
    fn lame_spot_values() {
        let l = MaterialParams::default().lame();
        // 1700*0.35/(1.35*0.3) and 1700/2.7
        assert!((l.lambda - 1469.1358024691358).abs() < 1e-9);
        assert!((l.mu - 629.6296296296297).abs() < 1e-9);
    }

    #[test]
    fn material_bounds() {
        assert!(MaterialParams::new(0.0, 0.3).is_err());
        assert!(MaterialParams::new(1.0, 0.5).is_err());
        assert!(MaterialParams::new(1.0, 0.0).is_err());
        assert!(MaterialParams::new(1.0, 0.49).is_ok());
    }

    #[test]
    fn zero_and_rigid_motions_have_no_energy() {
        let mesh = TetMesh::block([2, 2, 2], Vec3::repeat(0.1), Vec3::zeros());
        let mat = MaterialParams::default();
        assert_eq!(elastic_energy(&mesh, &VertexField::zeros(mesh.vertices.len()), &mat).unwrap(), 0.0);
        let rot = Rotation3::from_euler_angles(0.4, -0.7, 1.1);
        let u = VertexField(mesh.vertices.iter().map(|x| rot * x - x + Vec3::new(0.3, 0.1, -0.2)).collect());
        let e = elastic_energy(&mesh, &u, &mat).unwrap();
        assert!(e.abs() < 1e-20, "{e}");
    }

    #[test]
    fn uniaxial_stretch_closed_form() {
        // Unit cube stretched 1% along x: E11 = (1.01^2 - 1)/2, energy
        // density (mu + lambda/2) E11^2, volume 1.
        let mesh = TetMesh::block([2, 2, 2], Vec3::repeat(1.0), Vec3::zeros());
        let mat = MaterialParams::default();
        let u = VertexField(mesh.vertices.iter().map(|x| Vec3::new(0.01 * x.x, 0.0, 0.0)).collect());
        let l = mat.lame();
        let e11 = (1.01f64 * 1.01 - 1.0) / 2.0;
        let expected = (l.mu + 0.5 * l.lambda) * e11 * e11;
        let got = elastic_energy(&mesh, &u, &mat).unwrap();
        assert!((got - expected).abs() < 1e-12 * expected, "{got} vs {expected}");
    }

    #[test]
    fn inverted_element_is_reported() {
        let mesh = TetMesh::block([1, 1, 1], Vec3::repeat(1.0), Vec3::zeros());
        let u = VertexField(mesh.vertices.iter().map(|x| Vec3::new(-2.0 * x.x, 0.0, 0.0)).collect());
        assert!(matches!(
            elastic_energy(&mesh, &u, &MaterialParams::default()),
            Err(FemError::InvertedElement { .. })
        ));
    }

    #[test]
    fn translation_invariance() {
        let mesh = TetMesh::block([2, 1, 1], Vec3::new(0.2, 0.1, 0.1), Vec3::zeros());
        let mat = MaterialParams::default();
        let u = VertexField(mesh.vertices.iter().map(|x| Vec3::new(0.05 * x.y, 0.02 * x.x * x.x, 0.0)).collect());
        let e0 = elastic_energy(&mesh, &u, &mat).unwrap();
        let shifted = mesh.translated(Vec3::new(1.0, -2.0, 0.5));
        let u2 = VertexField(u.0.iter().map(|v| v + Vec3::new(0.01, 0.02, 0.03)).collect());
        let e1 = elastic_energy(&shifted, &u2, &mat).unwrap();
        assert!((e0 - e1).abs() <= 1e-12 * e0);
    }
}
