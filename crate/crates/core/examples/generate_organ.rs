//! Generates random organ-like tetrahedral meshes and reports their
//! quality; writes the surface of the first one as OBJ.
//!
//! ```bash
//! cargo run --release --example generate_organ -- 0 5 target/organ.obj
//! ```

use softdeform::mesh::io::write_obj;
use softdeform::mesh::{extract_surface, generate_random_organ, MeshGenConfig};
use std::fs::File;
use std::io::BufWriter;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let start: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(0);
    let count: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(5);
    let obj = args.next().unwrap_or_else(|| "target/organ.obj".into());
    let cfg = MeshGenConfig::default();
    for seed in start..start + count {
        let organ = generate_random_organ(seed, &cfg);
        let surface = extract_surface(&organ.mesh)?;
        println!(
            "seed {seed}: {} vertices, {} tets, volume {:.2e} m^3, area {:.2e} m^2, min quality {:.3}, valid {}",
            organ.mesh.vertices.len(),
            organ.mesh.tets.len(),
            organ.mesh.volume(),
            surface.area(),
            organ.validity.min_tet_quality,
            organ.is_valid()
        );
        if seed == start {
            write_obj(&mut BufWriter::new(File::create(&obj)?), &surface)?;
            println!("surface written to {obj}");
        }
    }
    Ok(())
}
