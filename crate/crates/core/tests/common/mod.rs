#![allow(dead_code)]

use combcnn_core::{combinatorics_map, reference, Alphabet, Bijection, Word};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn w(s: &str) -> Word {
    Word::new(s.chars().collect()).unwrap()
}

/// Every word over `letters` with length in `1..=max_len`, shortest first.
pub fn all_words(letters: &[char], max_len: usize) -> Vec<Word> {
    let mut out = Vec::new();
    let mut layer: Vec<Vec<char>> = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::with_capacity(layer.len() * letters.len());
        for prefix in &layer {
            for &c in letters {
                let mut v = prefix.clone();
                v.push(c);
                next.push(v);
            }
        }
        out.extend(next.iter().map(|v| Word::new(v.clone()).unwrap()));
        layer = next;
    }
    out
}

pub fn random_word(rng: &mut impl Rng, letters: &[char], min_len: usize, max_len: usize) -> Word {
    let len = rng.gen_range(min_len..=max_len);
    Word::new((0..len).map(|_| *letters.choose(rng).unwrap()).collect()).unwrap()
}

/// A random injective relabeling of `letters` into the 94 printable characters.
pub fn random_bijection(rng: &mut impl Rng, letters: &[char]) -> Bijection {
    let pool = Alphabet::printable_ascii();
    let images: Vec<char> = pool.letters().choose_multiple(rng, letters.len()).copied().collect();
    Bijection::new(letters.iter().copied().zip(images)).unwrap()
}

/// Table size and sorted (λ, μ, ν, count) tuples.
pub type FlatMap = (usize, Vec<(u32, u32, u32, u32)>);

/// The fast map in the oracle's layout.
pub fn fast_map(word: &Word) -> FlatMap {
    let m = combinatorics_map(word);
    let triples = m.triples().iter().map(|t| (t.lambda, t.mu, t.nu, t.count)).collect();
    (m.table().len(), triples)
}

pub fn agrees_with_oracle(word: &Word) -> bool {
    fast_map(word) == reference::combinatorics(word)
}

/// Σ_{ν≠ε} |ν|·M_ν(λ,μ) + M_ε(λ,μ) = s·t and M_ν(λ,μ) = M_ν(μ,λ) for every
/// pair of non-empty operands; returns the number of violations.
pub fn conservation_and_symmetry_violations(word: &Word) -> usize {
    let m = combinatorics_map(word);
    let table = m.table();
    let d = table.len();
    let mut weighted = vec![0u64; d * d];
    let mut bad = 0;
    for t in m.triples() {
        let len = table.subword_len(t.nu as usize) as u64;
        let weight = if len == 0 { 1 } else { len };
        weighted[t.lambda as usize * d + t.mu as usize] += weight * t.count as u64;
        if m.get(t.mu as usize, t.lambda as usize, t.nu as usize) != t.count {
            bad += 1;
        }
    }
    for l in 1..d {
        for u in 1..d {
            let st = (table.subword_len(l) * table.subword_len(u)) as u64;
            if weighted[l * d + u] != st {
                bad += 1;
            }
        }
    }
    bad
}
