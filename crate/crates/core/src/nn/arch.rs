//! The two model layouts: a combinatorial CNN over (λ, μ, ν) tensors and a
//! character CNN over one-hot words.

use super::network::{InputSpec, ModelParams, Network};
use super::{LayerSpec, Shape};
use crate::encoding::EncodingConfig;
use crate::error::{Error, Result};
use crate::word::Alphabet;

/// Filter counts shrink from layer to layer: a 1×1 compression of the ν
/// channels, then two 3×3 stages, each followed by 2×2 max-pooling.
pub fn build_combinatorial_cnn(cfg: &EncodingConfig, alphabet: Alphabet, seed: u64) -> Result<ModelParams> {
    let layers = vec![
        LayerSpec::conv(32, 1, 1),
        LayerSpec::Relu,
        LayerSpec::conv(16, 3, 3),
        LayerSpec::Relu,
        LayerSpec::pool(2, 2),
        LayerSpec::conv(8, 3, 3),
        LayerSpec::Relu,
        LayerSpec::pool(2, 2),
        LayerSpec::Flatten,
        LayerSpec::Dense { units: 64 },
        LayerSpec::Relu,
        LayerSpec::Dense { units: 1 },
        LayerSpec::Sigmoid,
    ];
    let mut network = Network::new(cfg.shape()?, layers)?;
    network.init_he(seed);
    Ok(ModelParams {
        network,
        input: InputSpec::Combinatorial(*cfg),
        alphabet,
        seed,
    })
}

/// Two 1-D conv + pool stages over a `(1, n, |alphabet|)` one-hot input.
pub fn build_char_cnn(n: usize, alphabet: Alphabet, seed: u64) -> Result<ModelParams> {
    if n < 4 {
        return Err(Error::InvalidConfig(format!(
            "character CNN needs words of length >= 4, got {n}"
        )));
    }
    let input = Shape::new(1, n, alphabet.len());
    let mut layers = Vec::new();
    let mut width = n;
    for filters in [32, 16] {
        let k = width.min(3);
        width = width - k + 1;
        let p = width.min(2);
        width /= p;
        layers.extend([LayerSpec::conv(filters, 1, k), LayerSpec::Relu, LayerSpec::pool(1, p)]);
    }
    layers.extend([
        LayerSpec::Flatten,
        LayerSpec::Dense { units: 32 },
        LayerSpec::Relu,
        LayerSpec::Dense { units: 1 },
        LayerSpec::Sigmoid,
    ]);
    let mut network = Network::new(input, layers)?;
    network.init_he(seed);
    Ok(ModelParams {
        network,
        input: InputSpec::OneHot { word_length: n },
        alphabet,
        seed,
    })
}
