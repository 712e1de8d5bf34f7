//! Number formatting, checkpoint files and hashing.
//!
//! # Checkpoint format, version 1
//!
//! Little-endian binary:
//!
//! | bytes | content |
//! |-------|---------|
//! | 8     | magic `AXSWCKP1` |
//! | 4     | `u32` format version (1) |
//! | 8 + 8 | `u64` `n_rho`, `n_z` |
//! | 4 × 8 | `f64` `rho_max`, `z_min`, `z_max`, `time` |
//! | 4 × 8·n_rho·n_z | `f64` arrays `u_rho`, `u_phi`, `u_z`, `pressure`, `ρ`-fastest |
//!
//! `u_rho` lives on radial faces, `u_z` on axial faces, the other two at
//! cell centres (see [`crate::grid::Stagger`]).

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fields::VelocityState;
use crate::grid::{CylGrid, ScalarSample, Stagger};

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"AXSWCKP1";
pub const CHECKPOINT_VERSION: u32 = 1;

/// 17 significant digits in scientific notation; round-trips every `f64`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

pub fn encode_checkpoint(v: &VelocityState) -> Vec<u8> {
    let g = v.grid();
    let mut out = Vec::with_capacity(64 + 32 * g.len());
    out.extend_from_slice(CHECKPOINT_MAGIC);
    out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    out.extend_from_slice(&(g.n_rho as u64).to_le_bytes());
    out.extend_from_slice(&(g.n_z as u64).to_le_bytes());
    for x in [g.rho_max, g.z_min, g.z_max, v.time] {
        out.extend_from_slice(&x.to_le_bytes());
    }
    for s in [&v.u_rho, &v.u_phi, &v.u_z, &v.pressure] {
        for x in &s.values {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    out
}

pub fn decode_checkpoint(bytes: &[u8]) -> Result<VelocityState> {
    let mut r = bytes;
    let mut magic = [0u8; 8];
    read_exact(&mut r, &mut magic)?;
    if &magic != CHECKPOINT_MAGIC {
        return Err(Error::Format("not a checkpoint file (bad magic)".into()));
    }
    let version = u32::from_le_bytes(take(&mut r)?);
    if version != CHECKPOINT_VERSION {
        return Err(Error::Format(format!(
            "unsupported checkpoint version {version}, expected {CHECKPOINT_VERSION}"
        )));
    }
    let n_rho = u64::from_le_bytes(take(&mut r)?) as usize;
    let n_z = u64::from_le_bytes(take(&mut r)?) as usize;
    let mut f = || -> Result<f64> { Ok(f64::from_le_bytes(take(&mut r)?)) };
    let (rho_max, z_min, z_max, time) = (f()?, f()?, f()?, f()?);
    let grid = CylGrid::new(n_rho, n_z, rho_max, z_min, z_max)
        .map_err(|e| Error::Format(format!("checkpoint grid: {e}")))?;
    let expected = 4 * 8 * grid.len();
    if r.len() != expected {
        return Err(Error::Format(format!(
            "checkpoint payload has {} bytes, expected {expected}",
            r.len()
        )));
    }
    let mut arrays = r
        .chunks_exact(8 * grid.len())
        .map(|chunk| {
            chunk
                .chunks_exact(8)
                .map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes")))
                .collect::<Vec<f64>>()
        });
    let mut next = |loc| ScalarSample {
        grid,
        location: loc,
        values: arrays.next().expect("four arrays"),
    };
    Ok(VelocityState {
        u_rho: next(Stagger::RhoFace),
        u_phi: next(Stagger::Center),
        u_z: next(Stagger::ZFace),
        pressure: next(Stagger::Center),
        time,
    })
}

fn read_exact(r: &mut &[u8], buf: &mut [u8]) -> Result<()> {
    r.read_exact(buf)
        .map_err(|_| Error::Format("checkpoint truncated".into()))
}

fn take<const N: usize>(r: &mut &[u8]) -> Result<[u8; N]> {
    let mut b = [0u8; N];
    read_exact(r, &mut b)?;
    Ok(b)
}

pub fn write_checkpoint(path: &Path, v: &VelocityState) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(&encode_checkpoint(v))?;
    Ok(())
}

pub fn read_checkpoint(path: &Path) -> Result<VelocityState> {
    let bytes = fs::read(path)?;
    decode_checkpoint(&bytes)
}

/// Lowercase hex SHA-256.
pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(0.0), "0.0000000000000000e0");
        let x = std::f64::consts::PI;
        assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        assert_eq!(fmt_f64(f64::NAN), "NaN");
    }

    #[test]
    fn checkpoint_roundtrip() {
        let g = CylGrid::new(3, 4, 2.0, -0.5, 0.5).unwrap();
        let v = VelocityState::from_fns(g, 0.25, |r, z| r + z, |r, _| r * r, |_, z| z, |r, _| -r);
        let back = decode_checkpoint(&encode_checkpoint(&v)).unwrap();
        assert_eq!(back, v);
    }

    #[test]
    fn checkpoint_rejects_damage() {
        let g = CylGrid::new(2, 2, 1.0, 0.0, 1.0).unwrap();
        let bytes = encode_checkpoint(&VelocityState::zeros(g, 0.0));
        assert!(matches!(decode_checkpoint(&bytes[..bytes.len() - 1]), Err(Error::Format(_))));
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(decode_checkpoint(&bad), Err(Error::Format(_))));
        let mut v2 = bytes;
        v2[8] = 2;
        assert!(matches!(decode_checkpoint(&v2), Err(Error::Format(_))));
    }
}
