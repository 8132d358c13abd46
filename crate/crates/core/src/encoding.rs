//! Dense network inputs.
//!
//! A word's combinatorics becomes a `(pad_to, pad_to, channels)` tensor with
//! λ and μ as the spatial plane and ν as the channel axis. Every word of
//! length n shares the same shape because indices are padded to the largest
//! possible table size n(n+1)/2 + 1.

use crate::combinatorics::combinatorics_map;
use crate::error::{Error, Result};
use crate::nn::Shape;
use crate::word::{max_table_size, Alphabet, Word};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Normalization {
    None,
    /// log(1 + c) / log(1 + n²)
    LogSaturating,
}

impl Normalization {
    pub fn name(self) -> &'static str {
        match self {
            Normalization::None => "none",
            Normalization::LogSaturating => "log",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Normalization::None),
            "log" => Ok(Normalization::LogSaturating),
            other => Err(Error::InvalidConfig(format!("unknown normalization {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EncodingConfig {
    pub word_length: usize,
    pub pad_to: usize,
    /// Keep only ν channels whose subword length is at most this.
    pub nu_cap_len: Option<usize>,
    pub normalization: Normalization,
}

impl EncodingConfig {
    /// Defaults for words of length `n`: full padding, log normalization, and
    /// a ν-length cap of 3 once n exceeds 12.
    pub fn for_length(n: usize) -> Self {
        EncodingConfig {
            word_length: n,
            pad_to: max_table_size(n),
            nu_cap_len: (n > 12).then_some(3),
            normalization: Normalization::LogSaturating,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.word_length == 0 {
            return Err(Error::InvalidConfig("word length must be at least 1".into()));
        }
        if self.nu_cap_len == Some(0) {
            return Err(Error::InvalidConfig("nu_cap_len must be at least 1".into()));
        }
        let d_max = max_table_size(self.word_length);
        if self.pad_to < d_max {
            return Err(Error::InvalidConfig(format!(
                "pad_to {} is below the table size bound {d_max} for length {}",
                self.pad_to, self.word_length
            )));
        }
        Ok(())
    }

    pub fn shape(&self) -> Result<Shape> {
        Ok(Shape::new(self.pad_to, self.pad_to, channel_count(self)?))
    }
}

/// Channels in the encoded tensor: every canonical index whose subword can
/// be at most `nu_cap_len` long (ε included), or `pad_to` when uncapped.
pub fn channel_count(cfg: &EncodingConfig) -> Result<usize> {
    cfg.validate()?;
    let n = cfg.word_length;
    Ok(match cfg.nu_cap_len {
        None => cfg.pad_to,
        Some(cap) => 1 + (1..=cap.min(n)).map(|k| n - k + 1).sum::<usize>(),
    })
}

/// A dense `(pad_to, pad_to, channels)` tensor, row-major with channels
/// innermost.
#[derive(Debug, Clone, PartialEq)]
pub struct InputTensor {
    pub shape: Shape,
    pub values: Vec<f32>,
}

impl InputTensor {
    pub fn get(&self, lambda: usize, mu: usize, nu: usize) -> f32 {
        let s = self.shape;
        self.values[(lambda * s.w + mu) * s.c + nu]
    }
}

pub fn encode_dense(word: &Word, cfg: &EncodingConfig) -> Result<InputTensor> {
    let shape = cfg.shape()?;
    let mut values = vec![0.0f32; shape.len()];
    encode_into(word, cfg, shape, &mut values)?;
    Ok(InputTensor { shape, values })
}

fn encode_into(word: &Word, cfg: &EncodingConfig, shape: Shape, out: &mut [f32]) -> Result<()> {
    let n = cfg.word_length;
    if word.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: word.len(),
        });
    }
    let map = combinatorics_map(word);
    let kept = match cfg.nu_cap_len {
        Some(cap) => map.table().count_up_to_len(cap),
        None => map.table().len(),
    };
    let scale = ((1 + n * n) as f64).ln();
    out.fill(0.0);
    for t in map.triples() {
        let nu = t.nu as usize;
        if nu >= kept {
            continue;
        }
        let value = match cfg.normalization {
            Normalization::None => t.count as f64,
            Normalization::LogSaturating => (1.0 + t.count as f64).ln() / scale,
        };
        out[(t.lambda as usize * shape.w + t.mu as usize) * shape.c + nu] = value as f32;
    }
    Ok(())
}

/// Turns a word into a flat network input.
pub trait Encoder: Sync {
    fn input_shape(&self) -> Shape;
    fn word_length(&self) -> usize;
    /// Writes the encoding of `word` into `out`, which has `input_shape().len()` slots.
    fn encode(&self, word: &Word, out: &mut [f32]) -> Result<()>;
}

#[derive(Debug, Clone)]
pub struct CombinatorialEncoder {
    cfg: EncodingConfig,
    shape: Shape,
}

impl CombinatorialEncoder {
    pub fn new(cfg: EncodingConfig) -> Result<Self> {
        Ok(CombinatorialEncoder {
            shape: cfg.shape()?,
            cfg,
        })
    }

    pub fn config(&self) -> &EncodingConfig {
        &self.cfg
    }
}

impl Encoder for CombinatorialEncoder {
    fn input_shape(&self) -> Shape {
        self.shape
    }

    fn word_length(&self) -> usize {
        self.cfg.word_length
    }

    fn encode(&self, word: &Word, out: &mut [f32]) -> Result<()> {
        encode_into(word, &self.cfg, self.shape, out)
    }
}

/// Raw characters as a `(1, n, |alphabet|)` one-hot grid.
#[derive(Debug, Clone)]
pub struct OneHotEncoder {
    alphabet: Alphabet,
    word_length: usize,
}

impl OneHotEncoder {
    pub fn new(alphabet: Alphabet, word_length: usize) -> Self {
        OneHotEncoder {
            alphabet,
            word_length,
        }
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }
}

impl Encoder for OneHotEncoder {
    fn input_shape(&self) -> Shape {
        Shape::new(1, self.word_length, self.alphabet.len())
    }

    fn word_length(&self) -> usize {
        self.word_length
    }

    fn encode(&self, word: &Word, out: &mut [f32]) -> Result<()> {
        if word.len() != self.word_length {
            return Err(Error::LengthMismatch {
                expected: self.word_length,
                actual: word.len(),
            });
        }
        let a = self.alphabet.len();
        out.fill(0.0);
        for (position, &symbol) in word.letters().iter().enumerate() {
            let k = self
                .alphabet
                .position(symbol)
                .ok_or(Error::SymbolOutsideAlphabet { symbol, position })?;
            out[position * a + k] = 1.0;
        }
        Ok(())
    }
}
