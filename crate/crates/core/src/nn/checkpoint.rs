//! Checkpoint file: one JSON header line, then every parameter (running
//! statistics included) as little-endian f32 in declaration order.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::network::{LayerSpec, Network};
use crate::error::{Error, Result};

pub const FORMAT: &str = "echogeo-checkpoint-1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamInfo {
    pub name: String,
    pub shape: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointHeader {
    pub format: String,
    pub arch: String,
    pub input_shape: Vec<usize>,
    pub layers: Vec<LayerSpec>,
    pub params: Vec<ParamInfo>,
    pub seed: u64,
    /// Free-form training configuration.
    pub config: serde_json::Value,
}

pub fn save(path: &Path, net: &Network, arch: &str, config: serde_json::Value) -> Result<()> {
    let header = CheckpointHeader {
        format: FORMAT.into(),
        arch: arch.into(),
        input_shape: net.input_shape.clone(),
        layers: net.specs.clone(),
        params: net.params().iter().map(|p| ParamInfo { name: p.name.into(), shape: p.shape.clone() }).collect(),
        seed: net.seed,
        config,
    };
    let mut bytes = serde_json::to_vec(&header)?;
    bytes.push(b'\n');
    for p in net.params() {
        for &v in &p.value {
            bytes.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&bytes).map_err(|e| Error::io(path, e))
}

pub fn load(path: &Path) -> Result<(Network, CheckpointHeader)> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let nl = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::data(format!("{}: missing checkpoint header", path.display())))?;
    let header: CheckpointHeader = serde_json::from_slice(&bytes[..nl])
        .map_err(|e| Error::data(format!("{}: bad checkpoint header: {e}", path.display())))?;
    if header.format != FORMAT {
        return Err(Error::data(format!("{}: unknown format {:?}", path.display(), header.format)));
    }
    let mut net = Network::build(&header.input_shape, &header.layers, header.seed)?;
    let blob = &bytes[nl + 1..];
    let expected: usize = net.param_count() * 4;
    if blob.len() != expected {
        return Err(Error::data(format!(
            "{}: parameter blob has {} bytes, architecture needs {expected}",
            path.display(),
            blob.len()
        )));
    }
    let mut values = blob.chunks_exact(4).map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64);
    for (p, info) in net.params_mut().into_iter().zip(&header.params) {
        if p.shape != info.shape {
            return Err(Error::data(format!("{}: parameter {} shape mismatch", path.display(), info.name)));
        }
        for v in p.value.iter_mut() {
            *v = values.next().expect("blob length checked");
        }
    }
    Ok((net, header))
}
