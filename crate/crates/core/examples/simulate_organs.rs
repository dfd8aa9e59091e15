//! Runs the generation pipeline (organ, boundary conditions, FEM solve,
//! voxelization) for a range of seeds and prints acceptance statistics.
//!
//! ```bash
//! cargo run --release --example simulate_organs -- 0 100
//! ```

use softdeform::dataset::{simulate_base, BaseOutcome, DatasetConfig};
use std::collections::BTreeMap;
use std::time::Instant;

fn main() {
    let args: Vec<u64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let (start, end) = (args.first().copied().unwrap_or(0), args.get(1).copied().unwrap_or(20));
    let cfg = DatasetConfig::default();
    let mut reasons = BTreeMap::new();
    let mut magnitudes = Vec::new();
    let t0 = Instant::now();
    for seed in start..end {
        let t = Instant::now();
        match simulate_base(seed, &cfg) {
            BaseOutcome::Accepted(s) => {
                println!(
                    "seed {seed:4}: accepted  max|u| {:.4} m  visible {:5.1}%  {:.2} s",
                    s.meta.max_target,
                    100.0 * s.meta.visible_fraction,
                    t.elapsed().as_secs_f64()
                );
                magnitudes.push(s.meta.max_target);
            }
            BaseOutcome::Rejected(r) => {
                println!("seed {seed:4}: rejected  {r}  {:.2} s", t.elapsed().as_secs_f64());
                *reasons.entry(r.to_string()).or_insert(0) += 1;
            }
        }
    }
    let total = end - start;
    println!(
        "accepted {}/{total} in {:.1} s; rejections {reasons:?}",
        magnitudes.len(),
        t0.elapsed().as_secs_f64()
    );
    if !magnitudes.is_empty() {
        magnitudes.sort_by(f64::total_cmp);
        println!(
            "max|u| median {:.4} m, 90th percentile {:.4} m",
            magnitudes[magnitudes.len() / 2],
            magnitudes[magnitudes.len() * 9 / 10]
        );
    }
}
