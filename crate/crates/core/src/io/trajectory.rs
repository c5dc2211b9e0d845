//! Binary trajectory files.
//!
//! Layout: magic `BKEV`, `u32` version, `u8` dtype (0 = f32, 1 = f64), `u8`
//! dim, `u32` channels, `u32` n, `u32` n_frames, then little-endian
//! row-major frame data at the stored resolution. Frame times, domain length
//! and seed live in the run manifest.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::grid::{Field, PeriodicGrid, Trajectory};

pub const MAGIC: [u8; 4] = *b"BKEV";
pub const FORMAT_VERSION: u32 = 1;
pub const HEADER_LEN: usize = 22;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Dtype {
    F32,
    #[default]
    F64,
}

impl Dtype {
    fn code(self) -> u8 {
        match self {
            Dtype::F32 => 0,
            Dtype::F64 => 1,
        }
    }

    fn width(self) -> usize {
        match self {
            Dtype::F32 => 4,
            Dtype::F64 => 8,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrajectoryHeader {
    pub dtype: Dtype,
    pub dim: u8,
    pub channels: u32,
    pub n: u32,
    pub n_frames: u32,
}

impl TrajectoryHeader {
    /// Values per frame.
    pub fn frame_len(&self) -> usize {
        self.channels as usize * (self.n as usize).pow(self.dim as u32)
    }

    pub fn data_len(&self) -> usize {
        self.frame_len() * self.n_frames as usize * self.dtype.width()
    }
}

/// What the file does not store but a [`Trajectory`] needs.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryMeta {
    pub pde_id: String,
    pub seed: u64,
    pub length: f64,
    pub times: Vec<f64>,
}

fn narrow(v: f64) -> std::result::Result<f32, String> {
    let x = v as f32;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format!("value {v} does not fit in 32-bit float"))
    }
}

pub fn encode_trajectory(traj: &Trajectory, dtype: Dtype) -> Result<Vec<u8>> {
    let grid = traj.grid();
    let header = TrajectoryHeader {
        dtype,
        dim: grid.dim() as u8,
        channels: traj.channels() as u32,
        n: grid.n() as u32,
        n_frames: traj.len() as u32,
    };
    let mut out = Vec::with_capacity(HEADER_LEN + header.data_len());
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.push(dtype.code());
    out.push(header.dim);
    for v in [header.channels, header.n, header.n_frames] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for frame in traj.frames() {
        for &v in frame.values() {
            match dtype {
                Dtype::F64 => out.extend_from_slice(&v.to_le_bytes()),
                Dtype::F32 => out.extend_from_slice(&narrow(v).map_err(Error::arg)?.to_le_bytes()),
            }
        }
    }
    Ok(out)
}

fn u32_at(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap())
}

pub fn decode_header(bytes: &[u8]) -> std::result::Result<TrajectoryHeader, String> {
    if bytes.len() < HEADER_LEN {
        return Err(format!("{} bytes is shorter than the header", bytes.len()));
    }
    if bytes[..4] != MAGIC {
        return Err("bad magic".into());
    }
    let version = u32_at(bytes, 4);
    if version != FORMAT_VERSION {
        return Err(format!("unsupported version {version}"));
    }
    let dtype = match bytes[8] {
        0 => Dtype::F32,
        1 => Dtype::F64,
        other => return Err(format!("unknown dtype code {other}")),
    };
    let header = TrajectoryHeader {
        dtype,
        dim: bytes[9],
        channels: u32_at(bytes, 10),
        n: u32_at(bytes, 14),
        n_frames: u32_at(bytes, 18),
    };
    if !(1..=3).contains(&header.dim) || header.channels == 0 || header.n == 0 || header.n_frames == 0 {
        return Err(format!("degenerate header {header:?}"));
    }
    let expected = HEADER_LEN + header.data_len();
    if bytes.len() != expected {
        return Err(format!("expected {expected} bytes, found {}", bytes.len()));
    }
    Ok(header)
}

/// Header and frame values as `f64`.
pub fn decode_frames(bytes: &[u8]) -> std::result::Result<(TrajectoryHeader, Vec<Vec<f64>>), String> {
    let header = decode_header(bytes)?;
    let w = header.dtype.width();
    let data = &bytes[HEADER_LEN..];
    let frames = data
        .chunks_exact(header.frame_len() * w)
        .map(|frame| {
            frame
                .chunks_exact(w)
                .map(|b| match header.dtype {
                    Dtype::F64 => f64::from_le_bytes(b.try_into().unwrap()),
                    Dtype::F32 => f32::from_le_bytes(b.try_into().unwrap()) as f64,
                })
                .collect()
        })
        .collect();
    Ok((header, frames))
}

pub fn decode_trajectory(bytes: &[u8], meta: &TrajectoryMeta) -> std::result::Result<Trajectory, String> {
    let (header, frames) = decode_frames(bytes)?;
    let grid = PeriodicGrid::new(header.dim as usize, header.n as usize, meta.length).map_err(|e| e.to_string())?;
    let fields = frames
        .into_iter()
        .map(|v| Field::new(grid, header.channels as usize, v))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.to_string())?;
    Trajectory::new(meta.pde_id.clone(), meta.seed, fields, meta.times.clone()).map_err(|e| e.to_string())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn sha256_file(path: &Path) -> Result<String> {
    Ok(sha256_hex(&fs::read(path)?))
}

/// Write `traj` and return the SHA-256 of the file contents.
pub fn write_trajectory(path: &Path, traj: &Trajectory, dtype: Dtype) -> Result<String> {
    let bytes = encode_trajectory(traj, dtype)?;
    fs::write(path, &bytes)?;
    Ok(sha256_hex(&bytes))
}

pub fn read_trajectory(path: &Path, meta: &TrajectoryMeta) -> Result<Trajectory> {
    let bytes = fs::read(path)?;
    decode_trajectory(&bytes, meta).map_err(|message| Error::Format {
        path: path.to_path_buf(),
        message,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> (Trajectory, TrajectoryMeta) {
        let grid = PeriodicGrid::new(2, 4, 3.0).unwrap();
        let frames = (0..3)
            .map(|k| Field::from_fn(grid, 2, |c, x| (k as f64 + 0.1) * x[0].sin() - c as f64 * x[1] / 7.0).unwrap())
            .collect();
        let meta = TrajectoryMeta {
            pde_id: "GS".into(),
            seed: 9,
            length: 3.0,
            times: vec![0.5, 1.0, 1.5],
        };
        (Trajectory::new("GS", 9, frames, meta.times.clone()).unwrap(), meta)
    }

    #[test]
    fn header_layout() {
        let (traj, _) = sample();
        let bytes = encode_trajectory(&traj, Dtype::F64).unwrap();
        assert_eq!(&bytes[..4], b"BKEV");
        assert_eq!(u32_at(&bytes, 4), 1);
        assert_eq!((bytes[8], bytes[9]), (1, 2));
        assert_eq!((u32_at(&bytes, 10), u32_at(&bytes, 14), u32_at(&bytes, 18)), (2, 4, 3));
        assert_eq!(bytes.len(), 22 + 3 * 2 * 16 * 8);
        let first = f64::from_le_bytes(bytes[22..30].try_into().unwrap());
        assert_eq!(first, traj.frames()[0].values()[0]);
    }

    #[test]
    fn f64_round_trip_is_exact() {
        let (traj, meta) = sample();
        let bytes = encode_trajectory(&traj, Dtype::F64).unwrap();
        assert_eq!(decode_trajectory(&bytes, &meta).unwrap(), traj);
    }

    #[test]
    fn f32_round_trip_is_stable() {
        let (traj, meta) = sample();
        let bytes = encode_trajectory(&traj, Dtype::F32).unwrap();
        let back = decode_trajectory(&bytes, &meta).unwrap();
        assert_eq!(encode_trajectory(&back, Dtype::F32).unwrap(), bytes);
        for (a, b) in back.frames()[1].values().iter().zip(traj.frames()[1].values()) {
            assert_eq!(*a, *b as f32 as f64);
        }
    }

    #[test]
    fn corrupt_files_rejected() {
        let (traj, meta) = sample();
        let bytes = encode_trajectory(&traj, Dtype::F64).unwrap();
        assert!(decode_trajectory(&bytes[..bytes.len() - 1], &meta).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(decode_header(&bad).unwrap_err().contains("magic"));
        let mut bad = bytes;
        bad[8] = 7;
        assert!(decode_header(&bad).is_err());
    }
}
