//! Linear tetrahedron with Saint Venant–Kirchhoff strain energy.
//!
//! With shape-function gradients `g_a` the deformation gradient is
//! `F = I + sum_a u_a g_a^T`; Green strain `E = (F^T F - I) / 2`;
//! energy density `psi = mu E:E + lambda/2 tr(E)^2`; first Piola stress
//! `P = F S` with `S = 2 mu E + lambda tr(E) I`.

use crate::mesh::TetMesh;
use crate::Vec3;
use nalgebra::{Matrix3, SMatrix, SymmetricEigen};

pub type Mat3 = Matrix3<f64>;
pub type ElementMatrix = SMatrix<f64, 12, 12>;

/// Rest-state quantities of one element.
#[derive(Clone, Debug)]
pub struct RestElement {
    pub nodes: [u32; 4],
    pub volume: f64,
    /// Gradients of the four linear shape functions.
    pub grads: [Vec3; 4],
}

impl RestElement {
    /// `None` for degenerate or inverted rest elements.
    pub fn new(mesh: &TetMesh, t: usize) -> Option<Self> {
        let [x0, x1, x2, x3] = mesh.tet_positions(t);
        let dm = Mat3::from_columns(&[x1 - x0, x2 - x0, x3 - x0]);
        let volume = dm.determinant() / 6.0;
        if volume <= 0.0 {
            return None;
        }
        let inv = dm.try_inverse()?;
        let g1 = inv.row(0).transpose();
        let g2 = inv.row(1).transpose();
        let g3 = inv.row(2).transpose();
        Some(Self {
            nodes: mesh.tets[t],
            volume,
            grads: [-(g1 + g2 + g3), g1, g2, g3],
        })
    }

    pub fn deformation_gradient(&self, u: &[Vec3]) -> Mat3 {
        let mut f = Mat3::identity();
        for a in 0..4 {
            f += u[self.nodes[a] as usize] * self.grads[a].transpose();
        }
        f
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Lame {
    pub lambda: f64,
    pub mu: f64,
}

pub fn green_strain(f: &Mat3) -> Mat3 {
    (f.transpose() * f - Mat3::identity()) * 0.5
}

pub fn energy_density(f: &Mat3, lame: Lame) -> f64 {
    let e = green_strain(f);
    let tr = e.trace();
    lame.mu * e.component_mul(&e).sum() + 0.5 * lame.lambda * tr * tr
}

fn second_piola(e: &Mat3, lame: Lame) -> Mat3 {
    e * (2.0 * lame.mu) + Mat3::identity() * (lame.lambda * e.trace())
}

pub fn first_piola(f: &Mat3, lame: Lame) -> Mat3 {
    f * second_piola(&green_strain(f), lame)
}

/// Directional derivative of `P` at `F` along `dF`.
fn first_piola_differential(f: &Mat3, s: &Mat3, df: &Mat3, lame: Lame) -> Mat3 {
    let de = (df.transpose() * f + f.transpose() * df) * 0.5;
    let ds = de * (2.0 * lame.mu) + Mat3::identity() * (lame.lambda * de.trace());
    df * s + f * ds
}

/// Energy gradient per node (the negative internal force).
pub fn element_gradient(el: &RestElement, f: &Mat3, lame: Lame) -> [Vec3; 4] {
    let p = first_piola(f, lame) * el.volume;
    [p * el.grads[0], p * el.grads[1], p * el.grads[2], p * el.grads[3]]
}

/// Exact element tangent stiffness, DOF order `3 * node + axis`.
pub fn element_hessian(el: &RestElement, f: &Mat3, lame: Lame) -> ElementMatrix {
    let s = second_piola(&green_strain(f), lame);
    let mut k = ElementMatrix::zeros();
    for b in 0..4 {
        for j in 0..3 {
            let mut dir = Vec3::zeros();
            dir[j] = 1.0;
            let df = dir * el.grads[b].transpose();
            let dp = first_piola_differential(f, &s, &df, lame) * el.volume;
            for a in 0..4 {
                let col = dp * el.grads[a];
                for i in 0..3 {
                    k[(3 * a + i, 3 * b + j)] = col[i];
                }
            }
        }
    }
    // Symmetric in exact arithmetic; remove roundoff asymmetry.
    (k + k.transpose()) * 0.5
}

/// Closest positive semi-definite matrix (negative eigenvalues clamped).
pub fn project_psd(k: &ElementMatrix) -> ElementMatrix {
    let eig = SymmetricEigen::new(*k);
    if eig.eigenvalues.iter().all(|&l| l >= 0.0) {
        return *k;
    }
    let mut vals = eig.eigenvalues;
    for l in vals.iter_mut() {
        *l = l.max(0.0);
    }
    let q = eig.eigenvectors;
    q * SMatrix::<f64, 12, 12>::from_diagonal(&vals) * q.transpose()
}
