//! Shared binary tensor container.
//!
//! Layout (all integers little-endian):
//!   bytes 0..8   magic (identifies the payload kind)
//!   bytes 8..12  format version, u32
//!   bytes 12..16 dimension count, u32
//!   then per dimension: extent, u32
//!   then the payload: IEEE-754 single-precision values, row-major.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

pub const MAGIC_PRESSURE: &[u8; 8] = b"SPPRESS\0";
pub const MAGIC_POSE: &[u8; 8] = b"SPPOSE\0\0";
pub const MAGIC_CHAIR: &[u8; 8] = b"SPCHAIR\0";
pub const FORMAT_VERSION: u32 = 1;

pub fn write_tensor(path: &Path, magic: &[u8; 8], dims: &[u32], data: &[f32]) -> Result<()> {
    let expect: usize = dims.iter().map(|&d| d as usize).product();
    assert_eq!(data.len(), expect, "tensor payload does not match dims");
    let io_err = |e| Error::io(path.display().to_string(), e);
    let mut f = fs::File::create(path).map_err(io_err)?;
    f.write_all(magic).map_err(io_err)?;
    f.write_all(&FORMAT_VERSION.to_le_bytes()).map_err(io_err)?;
    f.write_all(&(dims.len() as u32).to_le_bytes()).map_err(io_err)?;
    for &d in dims {
        f.write_all(&d.to_le_bytes()).map_err(io_err)?;
    }
    let mut bytes = Vec::with_capacity(data.len() * 4);
    for &v in data {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    f.write_all(&bytes).map_err(io_err)?;
    Ok(())
}

pub fn read_tensor(path: &Path, magic: &[u8; 8], ndims: usize) -> Result<(Vec<u32>, Vec<f32>)> {
    let display = path.display().to_string();
    let io_err = |e| Error::io(display.clone(), e);
    let mut f = fs::File::open(path).map_err(&io_err)?;
    let mut head = [0u8; 8];
    f.read_exact(&mut head).map_err(&io_err)?;
    if &head != magic {
        return Err(Error::Parse {
            path: display,
            field: "magic",
            reason: format!("expected {:?}, found {:?}", magic, head),
        });
    }
    let mut u32buf = [0u8; 4];
    f.read_exact(&mut u32buf).map_err(&io_err)?;
    let version = u32::from_le_bytes(u32buf);
    if version != FORMAT_VERSION {
        return Err(Error::Parse {
            path: display,
            field: "version",
            reason: format!("unsupported version {version}"),
        });
    }
    f.read_exact(&mut u32buf).map_err(&io_err)?;
    let got_ndims = u32::from_le_bytes(u32buf) as usize;
    if got_ndims != ndims {
        return Err(Error::Parse {
            path: display,
            field: "dimension count",
            reason: format!("expected {ndims}, found {got_ndims}"),
        });
    }
    let mut dims = Vec::with_capacity(ndims);
    for _ in 0..ndims {
        f.read_exact(&mut u32buf).map_err(&io_err)?;
        dims.push(u32::from_le_bytes(u32buf));
    }
    let count: usize = dims.iter().map(|&d| d as usize).product();
    let mut bytes = Vec::new();
    f.read_to_end(&mut bytes).map_err(&io_err)?;
    if bytes.len() != count * 4 {
        return Err(Error::Parse {
            path: display,
            field: "payload",
            reason: format!("expected {} bytes, found {}", count * 4, bytes.len()),
        });
    }
    let data = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    Ok((dims, data))
}
