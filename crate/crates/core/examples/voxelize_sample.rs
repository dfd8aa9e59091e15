//! Runs the full pipeline for one seed and writes the network input and
//! target grids as a VTK file for inspection.
//!
//! ```bash
//! cargo run --release --example voxelize_sample -- 5 target/sample.vtk
//! ```

use softdeform::dataset::{simulate_base, BaseOutcome, DatasetConfig};
use softdeform::voxel::{write_vtk, Grid3};
use std::fs::File;
use std::io::BufWriter;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let first: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(0);
    let out = args.next().unwrap_or_else(|| "target/sample.vtk".into());
    let cfg = DatasetConfig::default();
    for seed in first.. {
        let sample = match simulate_base(seed, &cfg) {
            BaseOutcome::Accepted(s) => s,
            BaseOutcome::Rejected(r) => {
                println!("seed {seed} rejected: {r}");
                continue;
            }
        };
        let g = sample.geometry();
        let organ = sample.organ_mask().iter().filter(|&&b| b).count();
        let visible = sample.visible_mask().iter().filter(|&&b| b).count();
        println!(
            "seed {seed}: {}^3 grid, {organ} organ points, {visible} visible points, visible area {:.1}%, max |u| {:.1} mm",
            g.n,
            100.0 * sample.meta.visible_fraction,
            1e3 * sample.meta.max_target
        );
        let mut all = Grid3::zeros(g, 9);
        let m = g.len();
        all.data[..5 * m].copy_from_slice(&sample.input.data);
        all.data[5 * m..8 * m].copy_from_slice(&sample.target.data);
        all.data[8 * m..].copy_from_slice(&sample.visible.data);
        let fields = [
            ("sdf", 0, false),
            ("zero_region", 1, false),
            ("u_vis", 2, true),
            ("u_tar", 5, true),
            ("visible", 8, false),
        ];
        write_vtk(&mut BufWriter::new(File::create(&out)?), &all, &fields)?;
        println!("written to {out}");
        break;
    }
    Ok(())
}
