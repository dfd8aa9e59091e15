//! `DGNET1` checkpoint container (little-endian):
//!
//! ```text
//! "DGNET1"
//! u32 len, config JSON
//! u32 layers
//! per layer: u32 len, name; u32 cin; u32 cout; f32 weights; f32 biases
//! u32 has_state; if 1: u64 step, f32 m[P], f32 v[P]
//! ```

use super::adam::AdamState;
use super::model::{NetworkConfig, NetworkParams};
use crate::io::{
    check_count, expect_magic, read_f32s, read_str, read_u32, read_u64, write_f32s, write_magic, write_str, write_u32, write_u64,
    FormatError,
};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

pub const CHECKPOINT_MAGIC: &[u8; 6] = b"DGNET1";
const MAX_PARAMS: u64 = 1 << 30;

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub params: NetworkParams<f32>,
    pub state: Option<AdamState>,
}

pub fn write_checkpoint(w: &mut impl Write, ck: &Checkpoint) -> std::io::Result<()> {
    let p = &ck.params;
    write_magic(w, CHECKPOINT_MAGIC)?;
    write_str(w, &serde_json::to_string(&p.config).expect("config serializes"))?;
    write_u32(w, p.layers().len() as u32)?;
    for (i, l) in p.layers().iter().enumerate() {
        write_str(w, &l.name)?;
        write_u32(w, l.cin as u32)?;
        write_u32(w, l.cout as u32)?;
        let (wt, b) = p.layer(i);
        write_f32s(w, wt)?;
        write_f32s(w, b)?;
    }
    match &ck.state {
        None => write_u32(w, 0),
        Some(s) => {
            write_u32(w, 1)?;
            write_u64(w, s.step)?;
            write_f32s(w, &s.m)?;
            write_f32s(w, &s.v)
        }
    }
}

pub fn read_checkpoint(r: &mut impl Read) -> Result<Checkpoint, FormatError> {
    expect_magic(r, CHECKPOINT_MAGIC)?;
    let cfg: NetworkConfig =
        serde_json::from_str(&read_str(r, 1 << 16)?).map_err(|e| FormatError::Malformed(format!("network config: {e}")))?;
    let mut params = NetworkParams::<f32>::zeros(cfg).map_err(|e| FormatError::Malformed(e.to_string()))?;
    let expected = params.layers().to_vec();
    let count = read_u32(r)? as usize;
    if count != expected.len() {
        return Err(FormatError::Malformed(format!("{count} layers, config implies {}", expected.len())));
    }
    let mut values = Vec::with_capacity(params.values.len());
    for l in &expected {
        let name = read_str(r, 256)?;
        let (cin, cout) = (read_u32(r)? as usize, read_u32(r)? as usize);
        if name != l.name || cin != l.cin || cout != l.cout {
            return Err(FormatError::Malformed(format!("layer {name} ({cin}->{cout}) does not match {}", l.name)));
        }
        values.extend(read_f32s(r, l.weight_len())?);
        values.extend(read_f32s(r, l.cout)?);
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(FormatError::Malformed("non-finite parameter".into()));
    }
    params.values = values;
    let state = match read_u32(r)? {
        0 => None,
        1 => {
            let step = read_u64(r)?;
            let p = check_count(params.values.len() as u64, MAX_PARAMS, "parameter")?;
            Some(AdamState {
                step,
                m: read_f32s(r, p)?,
                v: read_f32s(r, p)?,
            })
        }
        f => return Err(FormatError::Malformed(format!("bad training-state flag {f}"))),
    };
    Ok(Checkpoint { params, state })
}

pub fn save_checkpoint(path: &Path, ck: &Checkpoint) -> std::io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_checkpoint(&mut w, ck)?;
    w.flush()
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint, FormatError> {
    read_checkpoint(&mut BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_is_bitwise() {
        let cfg = NetworkConfig {
            grid_n: 8,
            stage_channels: vec![2, 3],
        };
        let params = NetworkParams::init(cfg, 4).unwrap();
        let mut state = AdamState::new(params.values.len());
        state.step = 7;
        state.m[3] = 0.25;
        for ck in [Checkpoint { params: params.clone(), state: None }, Checkpoint { params, state: Some(state) }] {
            let mut buf = Vec::new();
            write_checkpoint(&mut buf, &ck).unwrap();
            let back = read_checkpoint(&mut buf.as_slice()).unwrap();
            assert_eq!(back, ck);
            let mut again = Vec::new();
            write_checkpoint(&mut again, &back).unwrap();
            assert_eq!(again, buf);
        }
    }

    #[test]
    fn corrupted_magic_is_rejected() {
        let params = NetworkParams::init(NetworkConfig { grid_n: 8, stage_channels: vec![1, 1] }, 0).unwrap();
        let mut buf = Vec::new();
        write_checkpoint(&mut buf, &Checkpoint { params, state: None }).unwrap();
        buf[2] ^= 0xff;
        assert!(matches!(read_checkpoint(&mut buf.as_slice()), Err(FormatError::BadMagic { .. })));
        assert!(read_checkpoint(&mut &buf[..3]).is_err());
    }
}
