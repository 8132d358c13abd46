//! Fixtures shared by the benchmarks.

use combcnn_core::datasets::{gen_palindrome_dataset, gen_password_dataset, SplitCounts};
use combcnn_core::Word;

/// Deterministic palindrome-task words of length `n`, both classes.
pub fn palindrome_words(n: usize, count: usize) -> Vec<Word> {
    let counts = SplitCounts { train: count.div_ceil(2), val: 1, test: 1 };
    let [train, _, _] = gen_palindrome_dataset(n, counts, 0).expect("fixture data");
    train.items.into_iter().map(|(w, _)| w).take(count).collect()
}

/// Deterministic password-task words of length `n`, both classes.
pub fn password_words(n: usize, count: usize) -> Vec<Word> {
    let counts = SplitCounts { train: count.div_ceil(2), val: 1, test: 1 };
    let [train, _, _] = gen_password_dataset(n, counts, 0).expect("fixture data");
    train.items.into_iter().map(|(w, _)| w).take(count).collect()
}
