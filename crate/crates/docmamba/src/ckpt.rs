//! Self-describing checkpoint container.
//!
//! Layout: the magic line `docmamba-ckpt-v1\n`, a little-endian u64 header
//! length, a JSON header (version, dtype, model config, tensor directory),
//! then the raw little-endian tensor payload in directory order. Writing the
//! same parameters twice produces byte-identical files.

use std::io::{Read, Write};
use std::path::Path;

use crate::model::{ModelConfig, ModelParams};
use crate::real::Real;
use crate::{Error, Result};

pub const CKPT_VERSION: &str = "docmamba-ckpt-v1";

#[derive(Debug, serde::Serialize, serde::Deserialize)]
struct TensorEntry {
    name: String,
    shape: Vec<usize>,
    /// Element offset into the payload.
    offset: usize,
    len: usize,
}

#[derive(Debug, serde::Serialize, serde::Deserialize)]
struct Header {
    version: String,
    dtype: String,
    model: ModelConfig,
    tensors: Vec<TensorEntry>,
}

pub fn save_checkpoint<T: Real>(
    path: &Path,
    cfg: &ModelConfig,
    params: &ModelParams<T>,
) -> Result<()> {
    let mut entries = Vec::new();
    let mut offset = 0usize;
    let tensors = params.tensors();
    for (name, t) in &tensors {
        entries.push(TensorEntry {
            name: name.clone(),
            shape: t.shape.clone(),
            offset,
            len: t.len(),
        });
        offset += t.len();
    }
    let header = Header {
        version: CKPT_VERSION.to_string(),
        dtype: T::DTYPE.name().to_string(),
        model: cfg.clone(),
        tensors: entries,
    };
    let header_json = serde_json::to_vec(&header).expect("header serializes");

    let mut payload = Vec::with_capacity(offset * T::DTYPE.size_bytes());
    for (_, t) in &tensors {
        for v in t.iter() {
            v.write_le(&mut payload);
        }
    }

    let mut f = std::fs::File::create(path)?;
    f.write_all(CKPT_VERSION.as_bytes())?;
    f.write_all(b"\n")?;
    f.write_all(&(header_json.len() as u64).to_le_bytes())?;
    f.write_all(&header_json)?;
    f.write_all(&payload)?;
    Ok(())
}

pub fn load_checkpoint<T: Real>(path: &Path) -> Result<(ModelConfig, ModelParams<T>)> {
    let mut f = std::fs::File::open(path)?;
    let mut magic = vec![0u8; CKPT_VERSION.len() + 1];
    f.read_exact(&mut magic)?;
    if magic != [CKPT_VERSION.as_bytes(), b"\n"].concat() {
        return Err(Error::parse(format!(
            "{} is not a {CKPT_VERSION} checkpoint",
            path.display()
        )));
    }
    let mut len_bytes = [0u8; 8];
    f.read_exact(&mut len_bytes)?;
    let header_len = u64::from_le_bytes(len_bytes) as usize;
    let mut header_json = vec![0u8; header_len];
    f.read_exact(&mut header_json)?;
    let header: Header = serde_json::from_slice(&header_json)
        .map_err(|e| Error::parse(format!("checkpoint header: {e}")))?;
    if header.version != CKPT_VERSION {
        return Err(Error::parse(format!(
            "unsupported checkpoint version {}",
            header.version
        )));
    }
    if header.dtype != T::DTYPE.name() {
        return Err(Error::contract(format!(
            "checkpoint holds {} tensors, requested {}",
            header.dtype,
            T::DTYPE.name()
        )));
    }
    let mut payload = Vec::new();
    f.read_to_end(&mut payload)?;

    let mut params = ModelParams::<T>::zeros(&header.model);
    let sz = T::DTYPE.size_bytes();
    let mut filled = 0usize;
    for (name, t) in params.tensors_mut() {
        let entry = header
            .tensors
            .iter()
            .find(|e| e.name == name)
            .ok_or_else(|| Error::parse(format!("checkpoint missing tensor {name}")))?;
        if entry.shape != t.shape {
            return Err(Error::parse(format!(
                "tensor {name} shape {:?} does not match config {:?}",
                entry.shape, t.shape
            )));
        }
        let start = entry.offset * sz;
        let end = start + entry.len * sz;
        if end > payload.len() {
            return Err(Error::parse(format!("checkpoint payload truncated at {name}")));
        }
        for (i, v) in t.data.iter_mut().enumerate() {
            *v = T::read_le(&payload[start + i * sz..]);
        }
        filled += 1;
    }
    if filled != header.tensors.len() {
        return Err(Error::parse("checkpoint holds extra tensors"));
    }
    Ok((header.model, params))
}
