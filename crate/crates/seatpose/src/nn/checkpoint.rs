//! Versioned checkpoint container: named f64 matrices plus a TOML header.
//!
//! Layout (all integers little-endian u32 unless noted):
//!   magic   8 bytes  "SPCKPT\0\0"
//!   version u32      currently 1
//!   kind    u32 len + utf-8 bytes   model family, e.g. "motion_quantizer"
//!   meta    u32 len + utf-8 bytes   TOML table of scalar hyperparameters
//!   count   u32                     number of arrays
//!   arrays  count times: name (u32 len + utf-8), rows u32, cols u32,
//!           rows*cols f64 little-endian, row-major
//!
//! Values are stored at full f64 width so save/load round trips are exact and
//! reruns from a checkpoint stay bit-identical.

use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::Array2;

use crate::{Error, Result};

const MAGIC: &[u8; 8] = b"SPCKPT\0\0";
const VERSION: u32 = 1;

/// One saved model: its family name, scalar header, and parameter matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub kind: String,
    pub meta: toml::Table,
    pub arrays: Vec<(String, Array2<f64>)>,
}

impl Checkpoint {
    pub fn new(kind: &str, meta: toml::Table) -> Self {
        Checkpoint { kind: kind.to_string(), meta, arrays: Vec::new() }
    }

    pub fn push(&mut self, name: &str, value: Array2<f64>) {
        self.arrays.push((name.to_string(), value));
    }

    pub fn array(&self, name: &str) -> Result<&Array2<f64>> {
        self.arrays
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v)
            .ok_or_else(|| Error::Parse {
                path: format!("checkpoint kind `{}`", self.kind),
                field: "arrays",
                reason: format!("missing array `{name}`"),
            })
    }

    /// Required scalar from the meta table.
    pub fn meta_f64(&self, key: &str) -> Result<f64> {
        match self.meta.get(key) {
            Some(toml::Value::Float(v)) => Ok(*v),
            Some(toml::Value::Integer(v)) => Ok(*v as f64),
            _ => Err(self.meta_err(key)),
        }
    }

    pub fn meta_usize(&self, key: &str) -> Result<usize> {
        match self.meta.get(key) {
            Some(toml::Value::Integer(v)) if *v >= 0 => Ok(*v as usize),
            _ => Err(self.meta_err(key)),
        }
    }

    pub fn meta_str(&self, key: &str) -> Result<&str> {
        match self.meta.get(key) {
            Some(toml::Value::String(v)) => Ok(v),
            _ => Err(self.meta_err(key)),
        }
    }

    fn meta_err(&self, key: &str) -> Error {
        Error::Parse {
            path: format!("checkpoint kind `{}`", self.kind),
            field: "meta",
            reason: format!("missing or mistyped key `{key}`"),
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let display = path.display().to_string();
        let io = |e| Error::io(display.clone(), e);
        let f = std::fs::File::create(path).map_err(io)?;
        let mut w = BufWriter::new(f);
        let put = |w: &mut BufWriter<std::fs::File>, b: &[u8]| w.write_all(b).map_err(io);
        put(&mut w, MAGIC)?;
        put(&mut w, &VERSION.to_le_bytes())?;
        write_str(&mut w, &self.kind, &display)?;
        write_str(&mut w, &toml::to_string(&self.meta).expect("meta serializes"), &display)?;
        put(&mut w, &(self.arrays.len() as u32).to_le_bytes())?;
        for (name, a) in &self.arrays {
            write_str(&mut w, name, &display)?;
            put(&mut w, &(a.nrows() as u32).to_le_bytes())?;
            put(&mut w, &(a.ncols() as u32).to_le_bytes())?;
            for v in a.iter() {
                put(&mut w, &v.to_le_bytes())?;
            }
        }
        w.flush().map_err(io)
    }

    pub fn read(path: &Path) -> Result<Checkpoint> {
        let display = path.display().to_string();
        let f = std::fs::File::open(path).map_err(|e| Error::io(display.clone(), e))?;
        let mut r = BufReader::new(f);
        let parse = |field, reason: String| Error::Parse { path: display.clone(), field, reason };

        let mut magic = [0u8; 8];
        read_exact(&mut r, &mut magic, &display)?;
        if &magic != MAGIC {
            return Err(parse("magic", format!("got {magic:02x?}")));
        }
        let version = read_u32(&mut r, &display)?;
        if version != VERSION {
            return Err(parse("version", format!("got {version}, support {VERSION}")));
        }
        let kind = read_str(&mut r, &display)?;
        let meta_text = read_str(&mut r, &display)?;
        let meta: toml::Table =
            toml::from_str(&meta_text).map_err(|e| parse("meta", e.to_string()))?;
        let count = read_u32(&mut r, &display)? as usize;
        let mut arrays = Vec::with_capacity(count);
        for _ in 0..count {
            let name = read_str(&mut r, &display)?;
            let rows = read_u32(&mut r, &display)? as usize;
            let cols = read_u32(&mut r, &display)? as usize;
            let mut data = vec![0f64; rows * cols];
            for v in data.iter_mut() {
                let mut b = [0u8; 8];
                read_exact(&mut r, &mut b, &display)?;
                *v = f64::from_le_bytes(b);
            }
            let a = Array2::from_shape_vec((rows, cols), data)
                .map_err(|e| parse("arrays", e.to_string()))?;
            arrays.push((name, a));
        }
        Ok(Checkpoint { kind, meta, arrays })
    }
}

fn write_str(w: &mut impl Write, s: &str, path: &str) -> Result<()> {
    let io = |e| Error::io(path.to_string(), e);
    w.write_all(&(s.len() as u32).to_le_bytes()).map_err(io)?;
    w.write_all(s.as_bytes()).map_err(io)
}

fn read_exact(r: &mut impl Read, buf: &mut [u8], path: &str) -> Result<()> {
    r.read_exact(buf).map_err(|e| Error::io(path.to_string(), e))
}

fn read_u32(r: &mut impl Read, path: &str) -> Result<u32> {
    let mut b = [0u8; 4];
    read_exact(r, &mut b, path)?;
    Ok(u32::from_le_bytes(b))
}

fn read_str(r: &mut impl Read, path: &str) -> Result<String> {
    let len = read_u32(r, path)? as usize;
    if len > 1 << 20 {
        return Err(Error::Parse {
            path: path.to_string(),
            field: "string length",
            reason: format!("{len} exceeds 1 MiB cap"),
        });
    }
    let mut buf = vec![0u8; len];
    read_exact(r, &mut buf, path)?;
    String::from_utf8(buf).map_err(|e| Error::Parse {
        path: path.to_string(),
        field: "string",
        reason: e.to_string(),
    })
}
