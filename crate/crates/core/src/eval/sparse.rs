use crate::Vec3;
use serde::{Deserialize, Serialize};

/// Annotated surface points and where they moved to, in meters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparseCorrespondences {
    pub pairs: Vec<(Vec3, Vec3)>,
}

impl SparseCorrespondences {
    pub fn new(pairs: Vec<(Vec3, Vec3)>) -> Option<Self> {
        let finite = pairs.iter().all(|(a, b)| a.iter().chain(b.iter()).all(|v| v.is_finite()));
        (!pairs.is_empty() && finite).then_some(Self { pairs })
    }
}

/// Interpolates the sparse displacements to surface vertices within
/// `falloff` of an annotation. Weights are `exp(-d^2 / (2 sigma^2)) / d^2`
/// with `sigma = falloff / 2`, normalized, so a vertex on an annotation
/// takes exactly that displacement. Returns the per-vertex field (zero
/// where uncovered) and the covered vertex indices.
pub fn sparse_to_dense_surface(corrs: &SparseCorrespondences, vertices: &[Vec3], falloff: f64) -> (Vec<Vec3>, Vec<u32>) {
    let sigma = 0.5 * falloff;
    let mut field = vec![Vec3::zeros(); vertices.len()];
    let mut covered = Vec::new();
    for (vi, x) in vertices.iter().enumerate() {
        let mut exact = None;
        let mut acc = Vec3::zeros();
        let mut wsum = 0.0;
        for (src, dst) in &corrs.pairs {
            let d2 = (x - src).norm_squared();
            if d2 <= 1e-24 {
                exact = Some(dst - src);
                break;
            }
            if d2 <= falloff * falloff {
                let w = (-d2 / (2.0 * sigma * sigma)).exp() / d2;
                acc += (dst - src) * w;
                wsum += w;
            }
        }
        let value = exact.or((wsum > 0.0).then(|| acc / wsum));
        if let Some(u) = value {
            field[vi] = u;
            covered.push(vi as u32);
        }
    }
    (field, covered)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_vec(r: &mut ChaCha8Rng, s: f64) -> Vec3 {
        Vec3::new(r.random_range(-s..s), r.random_range(-s..s), r.random_range(-s..s))
    }

    #[test]
    fn coincident_vertex_takes_pair_displacement() {
        let c = SparseCorrespondences::new(vec![
            (Vec3::zeros(), Vec3::new(0.01, 0.0, 0.0)),
            (Vec3::new(0.01, 0.0, 0.0), Vec3::new(0.01, 0.02, 0.0)),
        ])
        .unwrap();
        let (f, cov) = sparse_to_dense_surface(&c, &[Vec3::new(0.01, 0.0, 0.0), Vec3::new(1.0, 0.0, 0.0)], 0.03);
        assert_eq!(f[0], Vec3::new(0.0, 0.02, 0.0));
        assert_eq!(cov, vec![0]);
    }

    #[test]
    fn single_pair_gives_constant_field() {
        let u = Vec3::new(0.003, -0.002, 0.001);
        let c = SparseCorrespondences::new(vec![(Vec3::zeros(), u)]).unwrap();
        let mut r = ChaCha8Rng::seed_from_u64(1);
        let v: Vec<Vec3> = (0..40).map(|_| random_vec(&mut r, 0.015)).collect();
        let (f, cov) = sparse_to_dense_surface(&c, &v, 0.03);
        assert_eq!(cov.len(), 40);
        assert!(f.iter().all(|x| (x - u).norm() < 1e-15));
    }

    #[test]
    fn matches_dense_weighted_sum() {
        let mut r = ChaCha8Rng::seed_from_u64(2);
        let pairs: Vec<(Vec3, Vec3)> = (0..13)
            .map(|_| {
                let a = random_vec(&mut r, 0.05);
                (a, a + random_vec(&mut r, 0.01))
            })
            .collect();
        let c = SparseCorrespondences::new(pairs.clone()).unwrap();
        let v: Vec<Vec3> = (0..200).map(|_| random_vec(&mut r, 0.06)).collect();
        let (f, _) = sparse_to_dense_surface(&c, &v, 0.03);
        for (x, fx) in v.iter().zip(&f) {
            let (mut num, mut den) = (Vec3::zeros(), 0.0);
            for (a, b) in &pairs {
                let d = (x - a).norm();
                if d <= 0.03 {
                    let w = (-(d * d) / (2.0 * 0.015 * 0.015)).exp() / (d * d);
                    num += (b - a) * w;
                    den += w;
                }
            }
            let want = if den > 0.0 { num / den } else { Vec3::zeros() };
            assert!((want - fx).norm() < 1e-14);
        }
    }

    #[test]
    fn rejects_empty_or_non_finite() {
        assert!(SparseCorrespondences::new(vec![]).is_none());
        assert!(SparseCorrespondences::new(vec![(Vec3::new(f64::NAN, 0.0, 0.0), Vec3::zeros())]).is_none());
    }
}
