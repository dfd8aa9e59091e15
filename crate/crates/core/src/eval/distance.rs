//! Exact Euclidean distance transform with nearest-site indices
//! (separable lower envelope of parabolas, one pass per axis).

use crate::voxel::GridGeometry;

/// Squared distance to and index of the nearest site along one line.
/// `f` holds squared distances from earlier passes (`INFINITY` = none).
fn transform_1d(f: &[f64], site: &[usize], out_f: &mut [f64], out_site: &mut [usize]) {
    let n = f.len();
    let mut v: Vec<usize> = Vec::with_capacity(n);
    let mut z: Vec<f64> = Vec::with_capacity(n + 1);
    for q in 0..n {
        if !f[q].is_finite() {
            continue;
        }
        let fq = f[q] + (q * q) as f64;
        loop {
            match v.last() {
                None => {
                    v.push(q);
                    z.clear();
                    z.push(f64::NEG_INFINITY);
                    break;
                }
                Some(&r) => {
                    let s = (fq - (f[r] + (r * r) as f64)) / (2.0 * (q as f64 - r as f64));
                    if s <= *z.last().expect("paired with v") {
                        v.pop();
                        z.pop();
                    } else {
                        v.push(q);
                        z.push(s);
                        break;
                    }
                }
            }
        }
    }
    if v.is_empty() {
        out_f.fill(f64::INFINITY);
        out_site.fill(usize::MAX);
        return;
    }
    let mut k = 0;
    for p in 0..n {
        while k + 1 < v.len() && z[k + 1] < p as f64 {
            k += 1;
        }
        let q = v[k];
        let d = p as f64 - q as f64;
        out_f[p] = d * d + f[q];
        out_site[p] = site[q];
    }
}

/// For every grid point, the distance in meters to the nearest `sites`
/// point and that point's flat index. `None` when there are no sites.
pub fn nearest_sites(sites: &[bool], geometry: &GridGeometry) -> Option<(Vec<f64>, Vec<usize>)> {
    let n = geometry.n;
    assert_eq!(sites.len(), geometry.len());
    if !sites.iter().any(|&s| s) {
        return None;
    }
    let mut f: Vec<f64> = sites.iter().map(|&s| if s { 0.0 } else { f64::INFINITY }).collect();
    let mut site: Vec<usize> = (0..sites.len()).collect();
    let mut lf = vec![0.0; n];
    let mut ls = vec![0; n];
    let mut of = vec![0.0; n];
    let mut os = vec![0; n];
    for stride in [1, n, n * n] {
        for line in 0..n * n {
            // First index of the line with the other two axes fixed.
            let base = match stride {
                1 => line * n,
                s if s == n => (line / n) * n * n + line % n,
                _ => line,
            };
            for t in 0..n {
                lf[t] = f[base + t * stride];
                ls[t] = site[base + t * stride];
            }
            transform_1d(&lf, &ls, &mut of, &mut os);
            for t in 0..n {
                f[base + t * stride] = of[t];
                site[base + t * stride] = os[t];
            }
        }
    }
    let h = geometry.spacing();
    Some((f.iter().map(|d| d.sqrt() * h).collect(), site))
}
