//! Binary weight files.
//!
//! Layout (all integers little-endian): `MADN`, u16 version, u32 tensor
//! count, then per tensor a u16 name length, the UTF-8 name, a u8 rank and
//! u32 dimensions. Raw f32 data for every tensor follows the table in order.

use std::fs;
use std::path::Path;

use thiserror::Error;

use super::network::{DrqnNetwork, NetworkShape, TENSOR_NAMES};
use super::tensor::Tensor;

pub const MAGIC: &[u8; 4] = b"MADN";
pub const VERSION: u16 = 1;

#[derive(Debug, Error)]
pub enum WeightFileError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("corrupt weight file at byte {offset}: {message}")]
    Corrupt { offset: usize, message: String },
}

fn corrupt(offset: usize, message: impl Into<String>) -> WeightFileError {
    WeightFileError::Corrupt {
        offset,
        message: message.into(),
    }
}

pub fn to_bytes(net: &DrqnNetwork<f32>) -> Vec<u8> {
    let tensors = net.tensors();
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(tensors.len() as u32).to_le_bytes());
    for (name, t) in TENSOR_NAMES.iter().zip(&tensors) {
        out.extend_from_slice(&(name.len() as u16).to_le_bytes());
        out.extend_from_slice(name.as_bytes());
        out.push(t.shape().len() as u8);
        for &d in t.shape() {
            out.extend_from_slice(&(d as u32).to_le_bytes());
        }
    }
    for t in &tensors {
        for x in t.data() {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8], WeightFileError> {
        if self.bytes.len() - self.pos < n {
            return Err(corrupt(self.pos, format!("truncated while reading {what}")));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self, what: &str) -> Result<u8, WeightFileError> {
        Ok(self.take(1, what)?[0])
    }

    fn u16(&mut self, what: &str) -> Result<u16, WeightFileError> {
        Ok(u16::from_le_bytes(self.take(2, what)?.try_into().unwrap()))
    }

    fn u32(&mut self, what: &str) -> Result<u32, WeightFileError> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }
}

pub fn from_bytes(bytes: &[u8]) -> Result<DrqnNetwork<f32>, WeightFileError> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4, "magic")? != MAGIC {
        return Err(corrupt(0, "bad magic"));
    }
    let version_at = r.pos;
    let version = r.u16("version")?;
    if version != VERSION {
        return Err(corrupt(version_at, format!("unsupported version {version}")));
    }
    let count_at = r.pos;
    let count = r.u32("tensor count")? as usize;
    if count != TENSOR_NAMES.len() {
        return Err(corrupt(count_at, format!("expected {} tensors, found {count}", TENSOR_NAMES.len())));
    }
    let mut shapes = Vec::with_capacity(count);
    for expected in TENSOR_NAMES {
        let at = r.pos;
        let len = r.u16("name length")? as usize;
        let name = r.take(len, "name")?;
        if name != expected.as_bytes() {
            return Err(corrupt(at, format!("expected tensor {expected}, found {}", String::from_utf8_lossy(name))));
        }
        let rank = r.u8("rank")? as usize;
        let mut shape = Vec::with_capacity(rank);
        for _ in 0..rank {
            shape.push(r.u32("dimension")? as usize);
        }
        shapes.push(shape);
    }
    let dim = |i: usize, k: usize| shapes[i].get(k).copied().unwrap_or(0);
    // f3.weight is [hidden, scalars], lstm.w_hh is [4H, H], f7.weight is [actions, hidden].
    let shape = NetworkShape {
        scalar_dim: dim(10, 1),
        hidden: dim(10, 0),
        lstm_hidden: dim(17, 1),
        actions: dim(21, 0),
    };
    if shape.scalar_dim == 0 || shape.hidden == 0 || shape.lstm_hidden == 0 || shape.actions == 0 {
        return Err(corrupt(count_at, "degenerate layer dimensions"));
    }
    let mut net = DrqnNetwork::<f32>::zeros(shape);
    for ((name, slot), found) in TENSOR_NAMES.iter().zip(net.tensors_mut()).zip(&shapes) {
        if slot.shape() != found.as_slice() {
            return Err(corrupt(r.pos, format!("tensor {name} has shape {found:?}, architecture needs {:?}", slot.shape())));
        }
        let n = slot.len();
        let raw = r.take(4 * n, name)?;
        let data = raw.chunks_exact(4).map(|b| f32::from_le_bytes(b.try_into().unwrap())).collect();
        *slot = Tensor::from_vec(found, data).expect("length checked");
    }
    if r.pos != bytes.len() {
        return Err(corrupt(r.pos, "trailing bytes"));
    }
    Ok(net)
}

pub fn save_weights(net: &DrqnNetwork<f32>, path: &Path) -> Result<(), WeightFileError> {
    fs::write(path, to_bytes(net)).map_err(|source| WeightFileError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_weights(path: &Path) -> Result<DrqnNetwork<f32>, WeightFileError> {
    let bytes = fs::read(path).map_err(|source| WeightFileError::Io {
        path: path.display().to_string(),
        source,
    })?;
    from_bytes(&bytes)
}
