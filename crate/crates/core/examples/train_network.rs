//! Trains the desk-scale network on a generated manifest, writing the
//! CSV log and the best checkpoint.
//!
//! ```bash
//! cargo run --release --example generate_dataset -- target/data 0 40
//! cargo run --release --example train_network -- target/data/manifest.txt target/train 5
//! ```

use softdeform::net::{train, NetworkConfig, TrainingConfig};
use std::path::PathBuf;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let mut args = std::env::args().skip(1);
    let manifest = PathBuf::from(args.next().unwrap_or_else(|| "target/data/manifest.txt".into()));
    let out = PathBuf::from(args.next().unwrap_or_else(|| "target/train".into()));
    let epochs: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(5);
    let net = NetworkConfig::desk(32);
    let cfg = TrainingConfig {
        max_epochs: epochs,
        ..Default::default()
    };
    println!("{} parameters", net.parameter_count());
    let outcome = train(&manifest, &net, &cfg, Some(&out))?;
    for r in &outcome.log {
        println!(
            "epoch {:3}  train {:.4e}  val {:.4e}  {:7.1} s",
            r.epoch, r.train_loss, r.val_loss, r.wall_time
        );
    }
    println!("best epoch {}, outputs in {}", outcome.best_epoch, out.display());
    Ok(())
}
