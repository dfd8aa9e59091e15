//! 3x3-block sparse symmetric matrices and preconditioned conjugate
//! gradients with Dirichlet DOFs projected out.

use super::element::{ElementMatrix, Mat3};
use crate::Vec3;

#[derive(Clone, Debug)]
pub struct BlockCsr {
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    blocks: Vec<Mat3>,
}

impl BlockCsr {
    /// Sparsity pattern of the node-adjacency graph of `tets`.
    pub fn from_tets(n_nodes: usize, tets: &[[u32; 4]]) -> Self {
        let mut adj: Vec<Vec<u32>> = (0..n_nodes as u32).map(|i| vec![i]).collect();
        for t in tets {
            for &a in t {
                for &b in t {
                    adj[a as usize].push(b);
                }
            }
        }
        let mut row_ptr = Vec::with_capacity(n_nodes + 1);
        let mut cols = Vec::new();
        row_ptr.push(0);
        for mut l in adj {
            l.sort_unstable();
            l.dedup();
            cols.extend_from_slice(&l);
            row_ptr.push(cols.len());
        }
        let nnz = cols.len();
        Self {
            row_ptr,
            cols,
            blocks: vec![Mat3::zeros(); nnz],
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn clear(&mut self) {
        self.blocks.iter_mut().for_each(|b| *b = Mat3::zeros());
    }

    fn slot(&self, row: u32, col: u32) -> usize {
        let (lo, hi) = (self.row_ptr[row as usize], self.row_ptr[row as usize + 1]);
        lo + self.cols[lo..hi]
            .binary_search(&col)
            .expect("entry outside sparsity pattern")
    }

    pub fn add_element(&mut self, nodes: &[u32; 4], k: &ElementMatrix) {
        for a in 0..4 {
            for b in 0..4 {
                let s = self.slot(nodes[a], nodes[b]);
                let blk = &mut self.blocks[s];
                for i in 0..3 {
                    for j in 0..3 {
                        blk[(i, j)] += k[(3 * a + i, 3 * b + j)];
                    }
                }
            }
        }
    }

    pub fn mul(&self, x: &[Vec3], y: &mut [Vec3]) {
        for (r, yr) in y.iter_mut().enumerate() {
            let mut acc = Vec3::zeros();
            for s in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.blocks[s] * x[self.cols[s] as usize];
            }
            *yr = acc;
        }
    }

    pub fn diagonal(&self) -> Vec<Vec3> {
        (0..self.n_nodes())
            .map(|r| {
                let b = &self.blocks[self.slot(r as u32, r as u32)];
                Vec3::new(b[(0, 0)], b[(1, 1)], b[(2, 2)])
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CgOutcome {
    Converged { iterations: usize },
    /// Search direction with non-positive curvature found.
    NegativeCurvature,
    MaxIterations,
}

pub(crate) fn dot(a: &[Vec3], b: &[Vec3]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dot(y)).sum()
}

pub(crate) fn norm(a: &[Vec3]) -> f64 {
    dot(a, a).sqrt()
}

/// Zeroes the components flagged in `fixed`.
pub(crate) fn project(v: &mut [Vec3], fixed: &[bool]) {
    for (x, &f) in v.iter_mut().zip(fixed) {
        if f {
            *x = Vec3::zeros();
        }
    }
}

/// Solves `A x = b` on the free nodes with Jacobi-preconditioned CG.
/// Fixed nodes keep `x = 0`; `b` must already be zero there.
pub fn pcg(a: &BlockCsr, b: &[Vec3], fixed: &[bool], rel_tol: f64, max_iter: usize, x: &mut Vec<Vec3>) -> CgOutcome {
    let n = b.len();
    x.clear();
    x.resize(n, Vec3::zeros());
    let inv_diag: Vec<Vec3> = a
        .diagonal()
        .iter()
        .map(|d| d.map(|v| if v > 0.0 { 1.0 / v } else { 1.0 }))
        .collect();
    let b_norm = norm(b);
    if b_norm == 0.0 {
        return CgOutcome::Converged { iterations: 0 };
    }
    let mut r = b.to_vec();
    project(&mut r, fixed);
    let mut z: Vec<Vec3> = r.iter().zip(&inv_diag).map(|(r, d)| r.component_mul(d)).collect();
    let mut p = z.clone();
    let mut ap = vec![Vec3::zeros(); n];
    let mut rz = dot(&r, &z);
    for it in 0..max_iter {
        a.mul(&p, &mut ap);
        project(&mut ap, fixed);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return CgOutcome::NegativeCurvature;
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += p[i] * alpha;
            r[i] -= ap[i] * alpha;
        }
        if norm(&r) <= rel_tol * b_norm {
            return CgOutcome::Converged { iterations: it + 1 };
        }
        for i in 0..n {
            z[i] = r[i].component_mul(&inv_diag[i]);
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + p[i] * beta;
        }
    }
    CgOutcome::MaxIterations
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn cg_solves_spd_system() {
        // Random SPD element matrices on a small block mesh.
        let mesh = crate::mesh::TetMesh::block([2, 2, 2], Vec3::repeat(1.0), Vec3::zeros());
        let mut a = BlockCsr::from_tets(mesh.vertices.len(), &mesh.tets);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for t in &mesh.tets {
            let m = ElementMatrix::from_fn(|_, _| rng.random_range(-1.0..1.0));
            a.add_element(t, &(m * m.transpose() + ElementMatrix::identity() * 0.1));
        }
        let n = mesh.vertices.len();
        let mut fixed = vec![false; n];
        fixed[0] = true;
        let mut b: Vec<Vec3> = (0..n).map(|_| Vec3::from_fn(|_, _| rng.random_range(-1.0..1.0))).collect();
        project(&mut b, &fixed);
        let mut x = Vec::new();
        let out = pcg(&a, &b, &fixed, 1e-12, 1000, &mut x);
        assert!(matches!(out, CgOutcome::Converged { .. }));
        let mut ax = vec![Vec3::zeros(); n];
        a.mul(&x, &mut ax);
        project(&mut ax, &fixed);
        let err: f64 = ax.iter().zip(&b).map(|(p, q)| (p - q).norm_squared()).sum::<f64>().sqrt();
        assert!(err < 1e-10 * norm(&b));
        assert_eq!(x[0], Vec3::zeros());
    }
}
