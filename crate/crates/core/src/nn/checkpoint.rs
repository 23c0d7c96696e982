//! On-disk model format: `checkpoint.json` (architecture descriptor + tensor
//! table) next to `checkpoint.bin` (concatenated little-endian f32 values,
//! row-major, in table order).

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::layers::LayerSpec;
use super::{Network, Tensor};
use crate::error::{Error, Result};

pub const CHECKPOINT_FORMAT: &str = "armsight-checkpoint-v1";
pub const CHECKPOINT_JSON: &str = "checkpoint.json";
pub const CHECKPOINT_BIN: &str = "checkpoint.bin";

/// Per-axis affine normalization of regression targets:
/// `normalized = (value − mean) / scale`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetNormalization {
    pub mean: [f64; 3],
    pub scale: [f64; 3],
}

impl TargetNormalization {
    pub fn identity() -> Self {
        Self { mean: [0.0; 3], scale: [1.0; 3] }
    }

    pub fn normalize(&self, p: [f64; 3]) -> [f64; 3] {
        [
            (p[0] - self.mean[0]) / self.scale[0],
            (p[1] - self.mean[1]) / self.scale[1],
            (p[2] - self.mean[2]) / self.scale[2],
        ]
    }

    pub fn denormalize(&self, p: [f64; 3]) -> [f64; 3] {
        [
            p[0] * self.scale[0] + self.mean[0],
            p[1] * self.scale[1] + self.mean[1],
            p[2] * self.scale[2] + self.mean[2],
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensorRecord {
    pub name: String,
    pub shape: Vec<usize>,
    /// Byte offset into `checkpoint.bin`.
    pub offset: u64,
    /// Always "f32le".
    pub dtype: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArchDescriptor {
    pub input_shape: Vec<usize>,
    pub layers: Vec<LayerSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckpointMeta {
    pub format: String,
    /// Which network this is ("masknet" / "jointnet").
    pub network: String,
    pub architecture: ArchDescriptor,
    /// Training hyperparameter echo, free-form.
    pub hyperparameters: serde_json::Value,
    /// Present for coordinate-regression checkpoints.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalization: Option<TargetNormalization>,
    pub tensors: Vec<TensorRecord>,
}

/// Write `checkpoint.json` + `checkpoint.bin` under `dir`.
pub fn save_checkpoint(
    dir: &Path,
    network_kind: &str,
    net: &Network<f32>,
    hyperparameters: serde_json::Value,
    normalization: Option<TargetNormalization>,
) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut tensors = Vec::new();
    let mut bin: Vec<u8> = Vec::new();
    for (li, layer) in net.layers().iter().enumerate() {
        for (suffix, tensor) in [("weight", &layer.weight), ("bias", &layer.bias)] {
            let Some(t) = tensor else { continue };
            tensors.push(TensorRecord {
                name: format!("layer{li}.{suffix}"),
                shape: t.shape().to_vec(),
                offset: bin.len() as u64,
                dtype: "f32le".to_string(),
            });
            for &v in t.data() {
                bin.extend_from_slice(&v.to_le_bytes());
            }
        }
    }
    let meta = CheckpointMeta {
        format: CHECKPOINT_FORMAT.to_string(),
        network: network_kind.to_string(),
        architecture: ArchDescriptor {
            input_shape: net.input_shape().to_vec(),
            layers: net.specs(),
        },
        hyperparameters,
        normalization,
        tensors,
    };
    fs::write(dir.join(CHECKPOINT_BIN), &bin)?;
    fs::write(dir.join(CHECKPOINT_JSON), serde_json::to_string_pretty(&meta)? + "\n")?;
    Ok(())
}

/// Load and validate a checkpoint directory; reconstructs the network with
/// bit-exact parameters.
pub fn load_checkpoint(dir: &Path) -> Result<(CheckpointMeta, Network<f32>)> {
    let meta: CheckpointMeta =
        serde_json::from_str(&fs::read_to_string(dir.join(CHECKPOINT_JSON))?)?;
    if meta.format != CHECKPOINT_FORMAT {
        return Err(Error::Checkpoint(format!("unknown format '{}'", meta.format)));
    }
    let bin = fs::read(dir.join(CHECKPOINT_BIN))?;

    let mut net =
        Network::<f32>::from_specs(&meta.architecture.input_shape, &meta.architecture.layers, 0)?;
    {
        let mut params = net.params_mut();
        if params.len() != meta.tensors.len() {
            return Err(Error::Checkpoint(format!(
                "tensor table has {} entries, architecture has {} parameter tensors",
                meta.tensors.len(),
                params.len()
            )));
        }
        for (record, param) in meta.tensors.iter().zip(params.iter_mut()) {
            if record.dtype != "f32le" {
                return Err(Error::Checkpoint(format!(
                    "tensor '{}' has unsupported dtype '{}'",
                    record.name, record.dtype
                )));
            }
            if record.shape != param.shape() {
                return Err(Error::Checkpoint(format!(
                    "tensor '{}' shape {:?} does not match architecture {:?}",
                    record.name,
                    record.shape,
                    param.shape()
                )));
            }
            let start = record.offset as usize;
            let len = param.numel() * 4;
            let Some(bytes) = bin.get(start..start + len) else {
                return Err(Error::Checkpoint(format!(
                    "tensor '{}' extends past checkpoint.bin ({} bytes)",
                    record.name,
                    bin.len()
                )));
            };
            **param = Tensor::new(
                record.shape.clone(),
                bytes
                    .chunks_exact(4)
                    .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
                    .collect(),
            );
        }
    }
    Ok((meta, net))
}
