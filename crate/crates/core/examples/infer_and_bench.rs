//! Loads a checkpoint and a sample, estimates the displacement, compares
//! it with the ground truth, and measures timing and the mirror
//! equivariance gap.
//!
//! ```bash
//! cargo run --release --example infer_and_bench -- target/train/best.dgnet target/data/samples/00000001_0.smp
//! ```

use softdeform::dataset::load_sample;
use softdeform::eval::{evaluate_estimate, flip_equivariance_gap, zero_input_drift};
use softdeform::net::{bench, infer, load_checkpoint};
use std::path::PathBuf;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let ck = PathBuf::from(args.next().ok_or("usage: infer_and_bench <checkpoint> <sample>")?);
    let sample = load_sample(&PathBuf::from(args.next().ok_or("usage: infer_and_bench <checkpoint> <sample>")?))?;
    let params = load_checkpoint(&ck)?.params;
    let (u, elapsed) = infer(&params, &sample.input)?;
    let report = evaluate_estimate(&sample, &u)?;
    println!(
        "inference {:.1} ms; mean error {:.2} mm, max {:.2} mm over {} organ points",
        elapsed.as_secs_f64() * 1e3,
        report.mean_error() * 1e3,
        report.max_error() * 1e3,
        report.errors.len()
    );
    let (mean, p95) = bench(&params, &sample.input, 10)?;
    println!("bench: mean {mean:.1} ms, p95 {p95:.1} ms ({:.1} frames/s)", 1e3 / mean);
    println!(
        "mirror equivariance gap {:.3} mm; drift with zeroed visible input {:.3} mm",
        flip_equivariance_gap(&params, &sample)? * 1e3,
        zero_input_drift(&params, &sample)? * 1e3
    );
    Ok(())
}
