//! Evaluates a checkpoint and the zero / nearest-visible baselines on the
//! validation split and writes the CSV and JSON reports.
//!
//! ```bash
//! cargo run --release --example evaluate -- target/data/manifest.txt target/train/best.dgnet target/eval
//! ```

use softdeform::dataset::Split;
use softdeform::eval::{evaluate_manifest, network_estimate, write_reports};
use softdeform::net::load_checkpoint;
use std::path::PathBuf;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let manifest = PathBuf::from(args.next().unwrap_or_else(|| "target/data/manifest.txt".into()));
    let ck = PathBuf::from(args.next().unwrap_or_else(|| "target/train/best.dgnet".into()));
    let out = PathBuf::from(args.next().unwrap_or_else(|| "target/eval".into()));
    let params = load_checkpoint(&ck)?.params;
    let run = evaluate_manifest(&manifest, Some(Split::Validation), |s| network_estimate(&params, s))?;
    let summary = write_reports(&out, &run, "example")?;
    println!("{} samples, {} organ points", summary.samples, summary.points);
    for e in &summary.estimators {
        println!(
            "{:8} mean {:.2} mm  max {:.2} mm  rho(depth) {:+.2}  rho(visible) {:+.2}",
            e.name,
            e.mean_error * 1e3,
            e.max_error * 1e3,
            e.spearman_depth,
            e.spearman_fraction
        );
    }
    println!("reports in {}", out.display());
    Ok(())
}
