use super::SampleReport;
use serde::{Deserialize, Serialize};

fn bin_of(value: f64, width: f64, bins: usize) -> usize {
    // The small offset keeps values like 0.3 / 0.1 on their own bin edge.
    (((value / width) + 1e-9).floor().max(0.0) as usize).min(bins - 1)
}

/// Depth range `center +- half_width` in meters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DepthSlab {
    pub center: f64,
    pub half_width: f64,
}

impl DepthSlab {
    /// Slabs at 2, 4 and 6 cm, 1 cm wide.
    pub fn defaults() -> Vec<DepthSlab> {
        [0.02, 0.04, 0.06]
            .into_iter()
            .map(|center| DepthSlab { center, half_width: 0.005 })
            .collect()
    }

    pub fn contains(&self, depth: f64) -> bool {
        (depth - self.center).abs() <= self.half_width
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MagnitudeRow {
    pub lo: f64,
    pub hi: f64,
    pub count: u64,
    pub mean_error: f64,
}

/// Points of one depth slab binned by target magnitude: mean error per
/// bin and a count histogram indexed `[target bin][estimate bin]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DepthTable {
    pub slab: DepthSlab,
    pub bin_width: f64,
    pub rows: Vec<MagnitudeRow>,
    pub histogram: Vec<Vec<u64>>,
}

pub fn bin_by_depth_and_magnitude(reports: &[SampleReport], slabs: &[DepthSlab], bin_width: f64) -> Vec<DepthTable> {
    let top = reports
        .iter()
        .flat_map(|r| r.target_norms.iter().chain(&r.estimate_norms))
        .copied()
        .fold(0.0, f64::max);
    let bins = bin_of(top, bin_width, usize::MAX) + 1;
    slabs
        .iter()
        .map(|&slab| {
            let mut sums = vec![0.0; bins];
            let mut counts = vec![0u64; bins];
            let mut histogram = vec![vec![0u64; bins]; bins];
            for r in reports {
                for p in 0..r.errors.len() {
                    if !slab.contains(r.depths[p]) {
                        continue;
                    }
                    let t = bin_of(r.target_norms[p], bin_width, bins);
                    let e = bin_of(r.estimate_norms[p], bin_width, bins);
                    sums[t] += r.errors[p];
                    counts[t] += 1;
                    histogram[t][e] += 1;
                }
            }
            let rows = (0..bins)
                .map(|b| MagnitudeRow {
                    lo: b as f64 * bin_width,
                    hi: (b + 1) as f64 * bin_width,
                    count: counts[b],
                    mean_error: if counts[b] > 0 { sums[b] / counts[b] as f64 } else { 0.0 },
                })
                .collect();
            DepthTable {
                slab,
                bin_width,
                rows,
                histogram,
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FractionRow {
    pub lo: f64,
    pub hi: f64,
    pub samples: u64,
    pub points: u64,
    pub mean_error: f64,
}

/// Mean point error of the samples whose visible fraction falls in each
/// bin of `[0, 1]`.
pub fn bin_by_visible_fraction(reports: &[SampleReport], bin_width: f64) -> Vec<FractionRow> {
    let bins = (1.0 / bin_width).round().max(1.0) as usize;
    let mut rows: Vec<FractionRow> = (0..bins)
        .map(|b| FractionRow {
            lo: b as f64 * bin_width,
            hi: ((b + 1) as f64 * bin_width).min(1.0),
            samples: 0,
            points: 0,
            mean_error: 0.0,
        })
        .collect();
    for r in reports {
        let row = &mut rows[bin_of(r.visible_fraction, bin_width, bins)];
        row.samples += 1;
        row.points += r.errors.len() as u64;
        row.mean_error += r.errors.iter().sum::<f64>();
    }
    for row in &mut rows {
        if row.points > 0 {
            row.mean_error /= row.points as f64;
        }
    }
    rows
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DepthRow {
    pub lo: f64,
    pub hi: f64,
    pub count: u64,
    pub mean_error: f64,
}

/// Mean point error per depth bin.
pub fn bin_by_depth(reports: &[SampleReport], bin_width: f64) -> Vec<DepthRow> {
    let top = reports.iter().flat_map(|r| r.depths.iter()).copied().fold(0.0, f64::max);
    let bins = bin_of(top, bin_width, usize::MAX) + 1;
    let mut sums = vec![0.0; bins];
    let mut counts = vec![0u64; bins];
    for r in reports {
        for (d, e) in r.depths.iter().zip(&r.errors) {
            let b = bin_of(*d, bin_width, bins);
            sums[b] += e;
            counts[b] += 1;
        }
    }
    (0..bins)
        .map(|b| DepthRow {
            lo: b as f64 * bin_width,
            hi: (b + 1) as f64 * bin_width,
            count: counts[b],
            mean_error: if counts[b] > 0 { sums[b] / counts[b] as f64 } else { 0.0 },
        })
        .collect()
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut r = vec![0.0; v.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && v[order[j + 1]] == v[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &o in &order[i..=j] {
            r[o] = avg;
        }
        i = j + 1;
    }
    r
}

/// Spearman rank correlation with average ranks for ties; NaN when
/// either side is constant or has fewer than two entries.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    if x.len() < 2 {
        return f64::NAN;
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for i in 0..x.len() {
        let (a, b) = (rx[i] - mx, ry[i] - my);
        sxy += a * b;
        sxx += a * a;
        syy += b * b;
    }
    if sxx == 0.0 || syy == 0.0 {
        return f64::NAN;
    }
    sxy / (sxx * syy).sqrt()
}
