//! Checkpoints: a JSON manifest (layer specs, dims, seeds, normalization,
//! training metadata) plus a binary blob of all parameters as little-endian
//! f64 in manifest order. Round-trips are bit-exact.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dataset::NormalizationStats;
use crate::error::{Error, Result};
use crate::harness::train::{CheckpointMeta, TrainedModel};
use crate::nn::{ConvLayer, Layer, Model};

const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ManifestLayer {
    kdims: [usize; 4],
    transposed: bool,
    relu_after: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Manifest {
    version: u32,
    layers: Vec<ManifestLayer>,
    parameter_count: usize,
    normalization: NormalizationStats,
    meta: CheckpointMeta,
}

pub fn manifest_path(base: &Path) -> PathBuf {
    base.with_extension("json")
}

pub fn blob_path(base: &Path) -> PathBuf {
    base.with_extension("bin")
}

/// Write `<base>.json` and `<base>.bin`.
pub fn save_checkpoint(model: &TrainedModel, base: &Path) -> Result<()> {
    let mut layers = Vec::new();
    let stack = &model.model.layers;
    let mut idx = 0;
    while idx < stack.len() {
        let Layer::Conv(conv) = &stack[idx] else {
            return Err(Error::Config("model must start each block with a conv".into()));
        };
        let relu_after = matches!(stack.get(idx + 1), Some(Layer::Relu));
        layers.push(ManifestLayer {
            kdims: conv.kdims,
            transposed: conv.transposed,
            relu_after,
        });
        idx += if relu_after { 2 } else { 1 };
    }
    let manifest = Manifest {
        version: CHECKPOINT_VERSION,
        layers,
        parameter_count: model.model.parameter_count(),
        normalization: model.norm,
        meta: model.meta.clone(),
    };
    let mpath = manifest_path(base);
    let json = serde_json::to_string_pretty(&manifest)
        .map_err(|e| Error::format(&mpath, e.to_string()))?;
    std::fs::write(&mpath, json).map_err(|e| Error::io(&mpath, e))?;

    let mut blob = Vec::with_capacity(manifest.parameter_count * 8);
    for conv in model.model.conv_layers() {
        for v in conv.kernel.iter().chain(conv.bias.iter()) {
            blob.extend_from_slice(&v.to_le_bytes());
        }
    }
    let bpath = blob_path(base);
    std::fs::write(&bpath, blob).map_err(|e| Error::io(&bpath, e))
}

/// Read a checkpoint written by [`save_checkpoint`].
pub fn load_checkpoint(base: &Path) -> Result<TrainedModel> {
    let mpath = manifest_path(base);
    let text = std::fs::read_to_string(&mpath).map_err(|e| Error::io(&mpath, e))?;
    let manifest: Manifest =
        serde_json::from_str(&text).map_err(|e| Error::format(&mpath, e.to_string()))?;
    if manifest.version != CHECKPOINT_VERSION {
        return Err(Error::format(
            &mpath,
            format!("unsupported checkpoint version {}", manifest.version),
        ));
    }
    let bpath = blob_path(base);
    let blob = std::fs::read(&bpath).map_err(|e| Error::io(&bpath, e))?;
    if blob.len() != manifest.parameter_count * 8 {
        return Err(Error::format(
            &bpath,
            format!(
                "blob holds {} bytes, manifest expects {}",
                blob.len(),
                manifest.parameter_count * 8
            ),
        ));
    }

    let mut layers = Vec::new();
    let mut offset = 0;
    let mut take = |count: usize| -> Vec<f64> {
        let vals = blob[offset..offset + count * 8]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        offset += count * 8;
        vals
    };
    for spec in &manifest.layers {
        let [a, b, kh, kw] = spec.kdims;
        let mut conv = if spec.transposed {
            ConvLayer::deconv(a, b, kh, kw)?
        } else {
            ConvLayer::conv(a, b, kh, kw)?
        };
        conv.kernel = take(a * b * kh * kw);
        conv.bias = take(conv.out_channels());
        layers.push(Layer::Conv(conv));
        if spec.relu_after {
            layers.push(Layer::Relu);
        }
    }
    Ok(TrainedModel {
        model: Model::new(layers),
        norm: manifest.normalization,
        meta: manifest.meta,
    })
}
