//! Generates an augmented dataset (8 flips per accepted simulation) with a
//! train/validation manifest.
//!
//! ```bash
//! cargo run --release --example generate_dataset -- target/data 0 40
//! ```

use softdeform::dataset::{generate_dataset, DatasetConfig, Split};
use std::path::PathBuf;
use std::time::Instant;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let mut args = std::env::args().skip(1);
    let out = PathBuf::from(args.next().unwrap_or_else(|| "target/example-data".into()));
    let start: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(0);
    let end: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(10);
    let t = Instant::now();
    let report = generate_dataset(&DatasetConfig::default(), start..end, &out)?;
    println!(
        "{} accepted, {} rejected in {:.0} s",
        report.accepted.len(),
        report.rejected.len(),
        t.elapsed().as_secs_f64()
    );
    println!(
        "{} training and {} validation samples listed in {}",
        report.manifest.split(Split::Train).count(),
        report.manifest.split(Split::Validation).count(),
        report.manifest_path.display()
    );
    Ok(())
}
