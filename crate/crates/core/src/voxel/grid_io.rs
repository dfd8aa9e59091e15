//! Standalone grid files and ASCII volume export.
//!
//! ```text
//! b"DGGRID1"
//! u64 n
//! f64 side_length
//! u64 channels
//! channels * n^3 * f32   channel-planar, x fastest
//! ```

use super::{Grid3, GridGeometry};
use crate::io::{check_count, expect_magic, read_f32s, read_f64, read_u64, write_f32s, write_f64, write_magic, write_u64, FormatError};
use std::io::{Read, Write};

pub const GRID_MAGIC: &[u8; 7] = b"DGGRID1";

const MAX_N: u64 = 1024;
const MAX_CHANNELS: u64 = 64;

pub(crate) fn write_grid_body(w: &mut impl Write, grid: &Grid3) -> std::io::Result<()> {
    write_u64(w, grid.geometry.n as u64)?;
    write_f64(w, grid.geometry.side_length)?;
    write_u64(w, grid.channels as u64)?;
    write_f32s(w, &grid.data)
}

pub(crate) fn read_grid_body(r: &mut impl Read) -> Result<Grid3, FormatError> {
    let n = check_count(read_u64(r)?, MAX_N, "grid point")?;
    let side = read_f64(r)?;
    let channels = check_count(read_u64(r)?, MAX_CHANNELS, "channel")?;
    if n < 2 || !(side > 0.0) || !side.is_finite() {
        return Err(FormatError::Malformed(format!("bad grid geometry n={n} side={side}")));
    }
    let geometry = GridGeometry::new(n, side);
    let data = read_f32s(r, geometry.len() * channels)?;
    Ok(Grid3 { geometry, channels, data })
}

pub fn write_grid(w: &mut impl Write, grid: &Grid3) -> std::io::Result<()> {
    write_magic(w, GRID_MAGIC)?;
    write_grid_body(w, grid)
}

pub fn read_grid(r: &mut impl Read) -> Result<Grid3, FormatError> {
    expect_magic(r, GRID_MAGIC)?;
    read_grid_body(r)
}

/// Legacy VTK ASCII structured-points file. Each entry of `fields` names
/// either one channel (scalars) or the first of three (vectors).
pub fn write_vtk(w: &mut impl Write, grid: &Grid3, fields: &[(&str, usize, bool)]) -> std::io::Result<()> {
    let g = &grid.geometry;
    let h = g.spacing();
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "softdeform grid")?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET STRUCTURED_POINTS")?;
    writeln!(w, "DIMENSIONS {} {} {}", g.n, g.n, g.n)?;
    writeln!(w, "ORIGIN 0 0 0")?;
    writeln!(w, "SPACING {h} {h} {h}")?;
    writeln!(w, "POINT_DATA {}", g.len())?;
    for &(name, first, vector) in fields {
        if vector {
            writeln!(w, "VECTORS {name} float")?;
            for idx in 0..g.len() {
                let v = grid.vector_at(first, idx);
                writeln!(w, "{} {} {}", v.x as f32, v.y as f32, v.z as f32)?;
            }
        } else {
            writeln!(w, "SCALARS {name} float 1")?;
            writeln!(w, "LOOKUP_TABLE default")?;
            for v in grid.channel(first) {
                writeln!(w, "{v}")?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_grid() -> Grid3 {
        let mut g = Grid3::zeros(GridGeometry::new(3, 0.3), 4);
        for (i, v) in g.data.iter_mut().enumerate() {
            *v = (i as f32).sin() * 1e-3;
        }
        g
    }

    #[test]
    fn roundtrip_is_bitwise() {
        let g = sample_grid();
        let mut buf = Vec::new();
        write_grid(&mut buf, &g).unwrap();
        let back = read_grid(&mut buf.as_slice()).unwrap();
        assert_eq!(back, g);
        let mut again = Vec::new();
        write_grid(&mut again, &back).unwrap();
        assert_eq!(buf, again);
    }

    #[test]
    fn corrupted_magic_is_rejected() {
        let mut buf = Vec::new();
        write_grid(&mut buf, &sample_grid()).unwrap();
        buf[2] ^= 0xff;
        assert!(matches!(read_grid(&mut buf.as_slice()), Err(FormatError::BadMagic { .. })));
    }

    #[test]
    fn vtk_has_all_points() {
        let g = sample_grid();
        let mut buf = Vec::new();
        write_vtk(&mut buf, &g, &[("s", 0, false), ("u", 1, true)]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("DIMENSIONS 3 3 3"));
        assert_eq!(text.lines().count(), 8 + 2 + 27 + 1 + 27);
    }
}
