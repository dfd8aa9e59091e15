//! Training samples and their binary container.
//!
//! ```text
//! b"DGSMP1"
//! u64 n
//! f64 side_length
//! u32 input_channels   (5: s*scale, z*scale, u_vis x/y/z)
//! u32 target_channels  (3: u_tar x/y/z)
//! u32 aux_channels     (1: visible-shell mask)
//! u64 seed
//! u32 flip             (bit 0: x, bit 1: y, bit 2: z)
//! f64 visible_fraction
//! f64 max_target       (meters, over mesh vertices)
//! f32 blocks: input, target, aux; each channel-planar, x fastest
//! ```

use crate::io::{check_count, expect_magic, read_f32s, read_f64, read_u32, read_u64, write_f32s, write_f64, write_magic, write_u32, write_u64, FormatError};
use crate::voxel::{Grid3, GridGeometry};
use std::io::{Read, Write};
use std::path::Path;

pub const SAMPLE_MAGIC: &[u8; 6] = b"DGSMP1";
pub const INPUT_CHANNELS: usize = 5;
pub const TARGET_CHANNELS: usize = 3;
/// Index of the first `u_vis` channel in the input grid.
pub const UVIS_CHANNEL: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampleMeta {
    /// Seed of the base simulation.
    pub seed: u64,
    /// Axis-flip combination applied to the base sample.
    pub flip: u8,
    /// Visible patch area over total surface area.
    pub visible_fraction: f64,
    /// Largest vertex displacement of the simulation.
    pub max_target: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub input: Grid3,
    pub target: Grid3,
    /// 1 where `u_vis` carries the visible displacement, else 0.
    pub visible: Grid3,
    pub meta: SampleMeta,
}

impl Sample {
    pub fn geometry(&self) -> GridGeometry {
        self.input.geometry
    }

    /// Signed distance channel (scaled), negative inside.
    pub fn sdf(&self) -> &[f32] {
        self.input.channel(0)
    }

    /// `true` at points inside or on the organ (`s <= 0`).
    pub fn organ_mask(&self) -> Vec<bool> {
        self.sdf().iter().map(|&s| s <= 0.0).collect()
    }

    pub fn visible_mask(&self) -> Vec<bool> {
        self.visible.data.iter().map(|&v| v > 0.0).collect()
    }

    /// Mirror along the axes set in `flip`, negating the matching vector
    /// components of `u_vis` and `u_tar`.
    pub fn flipped(&self, flip: u8) -> Sample {
        let axes = [flip & 1 != 0, flip & 2 != 0, flip & 4 != 0];
        let mut input = self.input.mirrored(axes);
        let mut target = self.target.mirrored(axes);
        for (a, &f) in axes.iter().enumerate() {
            if f {
                input.channel_mut(UVIS_CHANNEL + a).iter_mut().for_each(|v| *v = -*v);
                target.channel_mut(a).iter_mut().for_each(|v| *v = -*v);
            }
        }
        Sample {
            input,
            target,
            visible: self.visible.mirrored(axes),
            meta: SampleMeta {
                flip: self.meta.flip ^ flip,
                ..self.meta
            },
        }
    }
}

/// All eight axis-flip combinations; entry 0 is the original.
pub fn augment_flips(sample: &Sample) -> Vec<Sample> {
    (0..8u8).map(|f| if f == 0 { sample.clone() } else { sample.flipped(f) }).collect()
}

const MAX_N: u64 = 1024;

pub fn write_sample(w: &mut impl Write, s: &Sample) -> std::io::Result<()> {
    let g = s.geometry();
    write_magic(w, SAMPLE_MAGIC)?;
    write_u64(w, g.n as u64)?;
    write_f64(w, g.side_length)?;
    write_u32(w, s.input.channels as u32)?;
    write_u32(w, s.target.channels as u32)?;
    write_u32(w, s.visible.channels as u32)?;
    write_u64(w, s.meta.seed)?;
    write_u32(w, s.meta.flip as u32)?;
    write_f64(w, s.meta.visible_fraction)?;
    write_f64(w, s.meta.max_target)?;
    write_f32s(w, &s.input.data)?;
    write_f32s(w, &s.target.data)?;
    write_f32s(w, &s.visible.data)
}

pub fn read_sample(r: &mut impl Read) -> Result<Sample, FormatError> {
    expect_magic(r, SAMPLE_MAGIC)?;
    let n = check_count(read_u64(r)?, MAX_N, "grid point")?;
    let side = read_f64(r)?;
    if n < 2 || !(side > 0.0 && side.is_finite()) {
        return Err(FormatError::Malformed(format!("bad grid geometry n={n} side={side}")));
    }
    let (ci, ct, ca) = (read_u32(r)? as usize, read_u32(r)? as usize, read_u32(r)? as usize);
    if (ci, ct, ca) != (INPUT_CHANNELS, TARGET_CHANNELS, 1) {
        return Err(FormatError::Malformed(format!("unexpected channel counts {ci}/{ct}/{ca}")));
    }
    let seed = read_u64(r)?;
    let flip = read_u32(r)?;
    if flip > 7 {
        return Err(FormatError::Malformed(format!("flip code {flip}")));
    }
    let visible_fraction = read_f64(r)?;
    let max_target = read_f64(r)?;
    let geometry = GridGeometry::new(n, side);
    let m = geometry.len();
    let mut grid = |c: usize| -> Result<Grid3, FormatError> {
        Ok(Grid3 {
            geometry,
            channels: c,
            data: read_f32s(r, m * c)?,
        })
    };
    Ok(Sample {
        input: grid(ci)?,
        target: grid(ct)?,
        visible: grid(ca)?,
        meta: SampleMeta {
            seed,
            flip: flip as u8,
            visible_fraction,
            max_target,
        },
    })
}

pub fn save_sample(path: &Path, s: &Sample) -> std::io::Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_sample(&mut w, s)?;
    w.flush()
}

pub fn load_sample(path: &Path) -> Result<Sample, FormatError> {
    let mut r = std::io::BufReader::new(std::fs::File::open(path)?);
    read_sample(&mut r)
}
