//! The two super-resolution architectures assembled from network layers.
//!
//! SRCNN: 9x9x64 conv + ReLU, 1x1x32 conv + ReLU, 5x5x1 conv.
//! FSRCNN-x: 5x5x56 conv + ReLU, 1x1x12 conv + ReLU, x mapping layers of
//! 3x3x12 conv + ReLU, 1x1x56 conv + ReLU, 9x9x1 transposed conv.
//! Final layers carry no activation; channel values are signed.

use serde::{Deserialize, Serialize};

use crate::dataset::{NormalizationStats, Plane};
use crate::error::{Error, Result};
use crate::nn::{ConvLayer, Layer, Model, Tensor4};
use crate::seeds;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SrKind {
    Srcnn,
    Fsrcnn,
}

/// Network selection: SRCNN, or FSRCNN with a configurable number of
/// non-linear mapping layers (the -x suffix).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ArchitectureSpec {
    pub kind: SrKind,
    /// Mapping layer count for FSRCNN; ignored for SRCNN.
    #[serde(default = "default_mapping_layers")]
    pub mapping_layers: usize,
}

fn default_mapping_layers() -> usize {
    4
}

impl ArchitectureSpec {
    pub fn srcnn() -> Self {
        ArchitectureSpec {
            kind: SrKind::Srcnn,
            mapping_layers: 0,
        }
    }

    pub fn fsrcnn(mapping_layers: usize) -> Self {
        ArchitectureSpec {
            kind: SrKind::Fsrcnn,
            mapping_layers,
        }
    }

    /// Short name used in reports and checkpoints, e.g. "srce" or "fsrce-4".
    pub fn name(&self) -> String {
        match self.kind {
            SrKind::Srcnn => "srce".to_string(),
            SrKind::Fsrcnn => format!("fsrce-{}", self.mapping_layers),
        }
    }

    /// Ordered layer rows: (kernel side, out channels, relu, transposed).
    pub fn layer_table(&self) -> Vec<(usize, usize, bool, bool)> {
        match self.kind {
            SrKind::Srcnn => vec![(9, 64, true, false), (1, 32, true, false), (5, 1, false, false)],
            SrKind::Fsrcnn => {
                let mut rows = vec![(5, 56, true, false), (1, 12, true, false)];
                rows.extend(std::iter::repeat((3, 12, true, false)).take(self.mapping_layers));
                rows.push((1, 56, true, false));
                rows.push((9, 1, false, true));
                rows
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind == SrKind::Fsrcnn && self.mapping_layers < 1 {
            return Err(Error::Config(format!(
                "FSRCNN needs at least one mapping layer, got {}",
                self.mapping_layers
            )));
        }
        Ok(())
    }

    /// Largest kernel side; inputs must be at least this big.
    pub fn min_input_side(&self) -> usize {
        self.layer_table().iter().map(|r| r.0).max().unwrap_or(1)
    }
}

/// Build an He-initialized model for single-plane (1-channel) inputs.
pub fn build_model(spec: &ArchitectureSpec, seed: u64) -> Result<Model> {
    build_model_with_channels(spec, seed, 1)
}

/// Build a model whose first layer consumes and last layer produces
/// `io_channels` channels (2 for the paired-plane ablation mode).
pub fn build_model_with_channels(
    spec: &ArchitectureSpec,
    seed: u64,
    io_channels: usize,
) -> Result<Model> {
    spec.validate()?;
    let table = spec.layer_table();
    let mut layers = Vec::new();
    let mut in_channels = io_channels;
    let last = table.len() - 1;
    for (idx, &(k, mut out_channels, relu, transposed)) in table.iter().enumerate() {
        if idx == last {
            out_channels = io_channels;
        }
        let mut conv = if transposed {
            ConvLayer::deconv(in_channels, out_channels, k, k)?
        } else {
            ConvLayer::conv(out_channels, in_channels, k, k)?
        };
        conv.he_init(seeds::stream(seed, seeds::salt::INIT, idx as u64));
        layers.push(Layer::Conv(conv));
        if relu {
            layers.push(Layer::Relu);
        }
        in_channels = out_channels;
    }
    Ok(Model::new(layers))
}

/// Run one plane through a trained model: normalize, forward with batch 1,
/// denormalize.
pub fn infer(model: &Model, plane: &Plane, norm: &NormalizationStats) -> Result<Plane> {
    if plane.data.iter().any(|v| !v.is_finite()) {
        return Err(Error::Input("non-finite plane entry".into()));
    }
    let normalized: Vec<f64> = plane.data.iter().map(|&v| norm.apply(v)).collect();
    let x = Tensor4::from_vec([1, 1, plane.rows, plane.cols], normalized)?;
    let y = model.forward(&x)?;
    Ok(Plane {
        rows: plane.rows,
        cols: plane.cols,
        data: y.as_slice().iter().map(|&v| norm.invert(v)).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::Layer;

    #[test]
    fn srcnn_structure_and_parameter_count() {
        // Oracle: independent hand summation of the layer table.
        let model = build_model(&ArchitectureSpec::srcnn(), 1).unwrap();
        let convs: Vec<&ConvLayer> = model.conv_layers().collect();
        assert_eq!(convs.len(), 3);
        assert_eq!(convs[0].kernel_size(), (9, 9));
        assert_eq!(convs[0].out_channels(), 64);
        assert_eq!(convs[1].kernel_size(), (1, 1));
        assert_eq!(convs[1].out_channels(), 32);
        assert_eq!(convs[2].kernel_size(), (5, 5));
        assert_eq!(convs[2].out_channels(), 1);
        assert!(convs.iter().all(|c| !c.transposed));
        // ReLU after the first two convs only.
        let kinds: Vec<bool> = model
            .layers
            .iter()
            .map(|l| matches!(l, Layer::Relu))
            .collect();
        assert_eq!(kinds, vec![false, true, false, true, false]);

        let by_hand = (9 * 9 * 1 * 64 + 64) + (1 * 1 * 64 * 32 + 32) + (5 * 5 * 32 * 1 + 1);
        assert_eq!(by_hand, 8129);
        assert_eq!(model.parameter_count(), by_hand);
    }

    #[test]
    fn fsrcnn4_structure_and_parameter_count() {
        // Oracle: independent hand summation of the layer table.
        let model = build_model(&ArchitectureSpec::fsrcnn(4), 1).unwrap();
        let convs: Vec<&ConvLayer> = model.conv_layers().collect();
        assert_eq!(convs.len(), 8);
        assert_eq!(convs[0].kernel_size(), (5, 5));
        assert_eq!(convs[0].out_channels(), 56);
        assert_eq!(convs[1].out_channels(), 12);
        for c in &convs[2..6] {
            assert_eq!(c.kernel_size(), (3, 3));
            assert_eq!(c.out_channels(), 12);
        }
        assert_eq!(convs[6].out_channels(), 56);
        assert!(convs[7].transposed);
        assert_eq!(convs[7].kernel_size(), (9, 9));
        assert_eq!(convs[7].out_channels(), 1);
        // No activation after the deconvolution.
        assert!(matches!(model.layers.last(), Some(Layer::Conv(_))));

        let by_hand = (5 * 5 * 1 * 56 + 56)
            + (1 * 1 * 56 * 12 + 12)
            + 4 * (3 * 3 * 12 * 12 + 12)
            + (1 * 1 * 12 * 56 + 56)
            + (9 * 9 * 56 * 1 + 1);
        assert_eq!(by_hand, 12_637);
        assert_eq!(model.parameter_count(), by_hand);
    }

    #[test]
    fn fsrcnn_depth_parameter_difference() {
        // Difference of layer-table sums: two mapping layers.
        let m4 = build_model(&ArchitectureSpec::fsrcnn(4), 1).unwrap();
        let m2 = build_model(&ArchitectureSpec::fsrcnn(2), 1).unwrap();
        let per_mapping_layer = 3 * 3 * 12 * 12 + 12;
        assert_eq!(
            m4.parameter_count() - m2.parameter_count(),
            2 * per_mapping_layer
        );
        assert_eq!(2 * per_mapping_layer, 2616);
    }

    #[test]
    fn invalid_mapping_layer_count_rejected() {
        assert!(build_model(&ArchitectureSpec::fsrcnn(0), 1).is_err());
    }

    #[test]
    fn build_is_deterministic_per_seed() {
        let a = build_model(&ArchitectureSpec::fsrcnn(2), 9).unwrap();
        let b = build_model(&ArchitectureSpec::fsrcnn(2), 9).unwrap();
        assert_eq!(a, b);
        let c = build_model(&ArchitectureSpec::fsrcnn(2), 10).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn models_preserve_shape() {
        for spec in [
            ArchitectureSpec::srcnn(),
            ArchitectureSpec::fsrcnn(2),
            ArchitectureSpec::fsrcnn(4),
            ArchitectureSpec::fsrcnn(6),
        ] {
            let model = build_model(&spec, 3).unwrap();
            let x = Tensor4::zeros([1, 1, 64, 20]);
            assert_eq!(model.forward(&x).unwrap().dims(), [1, 1, 64, 20], "{:?}", spec);
            let x = Tensor4::zeros([2, 1, 9, 9]);
            assert_eq!(model.forward(&x).unwrap().dims(), [2, 1, 9, 9], "{:?}", spec);
        }
    }

    #[test]
    fn two_channel_mode_builds() {
        let model = build_model_with_channels(&ArchitectureSpec::fsrcnn(2), 3, 2).unwrap();
        let x = Tensor4::zeros([1, 2, 16, 12]);
        assert_eq!(model.forward(&x).unwrap().dims(), [1, 2, 16, 12]);
    }

    #[test]
    fn zeroed_final_layer_infers_constant_mean() {
        let mut model = build_model(&ArchitectureSpec::fsrcnn(2), 5).unwrap();
        if let Some(Layer::Conv(c)) = model.layers.last_mut() {
            c.kernel.iter_mut().for_each(|w| *w = 0.0);
            c.bias.iter_mut().for_each(|b| *b = 0.0);
        }
        let norm = NormalizationStats { mean: 0.4, std: 2.0 };
        let plane = Plane {
            rows: 12,
            cols: 10,
            data: (0..120).map(|i| i as f64 * 0.01).collect(),
        };
        let out = infer(&model, &plane, &norm).unwrap();
        assert_eq!(out.rows, 12);
        assert_eq!(out.cols, 10);
        for v in out.data {
            assert!((v - 0.4).abs() < 1e-12, "expected the mean plane, got {v}");
        }
    }

    #[test]
    fn infer_rejects_non_finite_input() {
        let model = build_model(&ArchitectureSpec::fsrcnn(2), 5).unwrap();
        let norm = NormalizationStats { mean: 0.0, std: 1.0 };
        let plane = Plane {
            rows: 9,
            cols: 9,
            data: {
                let mut d = vec![0.0; 81];
                d[40] = f64::NAN;
                d
            },
        };
        assert!(infer(&model, &plane, &norm).is_err());
    }
}
