//! Combinatorial invariants of words and a convolutional classifier built
//! on them.
//!
//! For a word α, every pair of subwords (λ, μ) is compared letter by letter;
//! the diagonal runs of matches spell further subwords ν, and counting them
//! gives M(α)_ν(λ, μ). Indexed by a letter-blind canonical ordering of
//! subwords, M is identical for two words exactly when one is a letter
//! relabeling of the other, which makes it an input that a network cannot
//! tell apart from its relabelings.
//!
//! - [`word`]: words, subword tables, bijections
//! - [`combinatorics`]: match matrices, components, the sparse map M(α)
//! - [`equivalence`]: bijection search vs. map comparison
//! - [`encoding`]: dense `(λ, μ, ν)` input tensors
//! - [`datasets`]: palindrome and password data
//! - [`nn`]: layers, backpropagation, training, checkpoints
//! - [`reference`]: brute-force oracles

pub mod combinatorics;
pub mod datasets;
pub mod encoding;
pub mod equivalence;
pub mod error;
pub mod nn;
pub mod reference;
pub mod word;

pub use combinatorics::{combinatorics_entry, combinatorics_map, CombinatoricsMap, Triple};
pub use encoding::{encode_dense, Encoder, EncodingConfig, InputTensor, Normalization};
pub use equivalence::{check_theorem, equivalent_by_tensor, find_bijection, EquivalenceReport};
pub use error::{Error, Result};
pub use datasets::{LabeledDataset, SplitCounts, Task};
pub use nn::{ModelParams, Shape, TrainConfig};
pub use word::{
    apply_bijection, distinct_subwords, is_palindrome, max_table_size, parse_word, Alphabet,
    Bijection, SubwordTable, Word,
};
