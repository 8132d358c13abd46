//! Letter-bijection equivalence of words, decided two ways: by unifying
//! letters position by position, and by comparing combinatorics maps.

use std::collections::HashMap;

use crate::combinatorics::combinatorics_map;
use crate::word::{Bijection, Word};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquivalenceReport {
    pub tensor_equal: bool,
    pub bijection: Option<Bijection>,
    /// `tensor_equal` agrees with whether a bijection exists.
    pub agree: bool,
}

/// The unique φ with φ(a) = b letterwise, if one exists.
pub fn find_bijection(a: &Word, b: &Word) -> Option<Bijection> {
    if a.len() != b.len() {
        return None;
    }
    let mut forward: HashMap<char, char> = HashMap::new();
    let mut backward: HashMap<char, char> = HashMap::new();
    for (&x, &y) in a.letters().iter().zip(b.letters()) {
        if *forward.entry(x).or_insert(y) != y || *backward.entry(y).or_insert(x) != x {
            return None;
        }
    }
    Bijection::new(forward).ok()
}

pub fn equivalent_by_tensor(a: &Word, b: &Word) -> bool {
    combinatorics_map(a).same_as(&combinatorics_map(b))
}

pub fn check_theorem(a: &Word, b: &Word) -> EquivalenceReport {
    let tensor_equal = equivalent_by_tensor(a, b);
    let bijection = find_bijection(a, b);
    EquivalenceReport {
        agree: tensor_equal == bijection.is_some(),
        tensor_equal,
        bijection,
    }
}
