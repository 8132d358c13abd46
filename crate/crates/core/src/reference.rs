//! Slow reference implementations used as independent oracles.
//!
//! Nothing here shares code with the fast paths in [`crate::combinatorics`]
//! and [`crate::equivalence`]: subwords are enumerated and ordered by
//! content search, every match matrix is materialized as an explicit graph
//! and flood-filled, and bijections are found by trying every injective map.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};

use crate::word::{Bijection, Word};

/// W(α) by content: ε first, then distinct substrings sorted by
/// (length, first position found by search).
pub fn subwords(word: &Word) -> Vec<Vec<char>> {
    let l = word.letters();
    let n = l.len();
    let mut set: HashSet<Vec<char>> = HashSet::new();
    for i in 0..n {
        for j in i + 1..=n {
            set.insert(l[i..j].to_vec());
        }
    }
    let first = |s: &Vec<char>| (0..=n - s.len()).find(|&p| l[p..p + s.len()] == s[..]).unwrap();
    let mut v: Vec<Vec<char>> = set.into_iter().collect();
    v.sort_by_key(|s| (s.len(), first(s)));
    v.insert(0, Vec::new());
    v
}

/// Components of the match graph of (λ, μ) by breadth-first search over an
/// explicit undirected edge list, each reported as the letters read from
/// its lowest-index vertex along the path.
fn produced_by_components(lambda: &[char], mu: &[char]) -> Vec<Vec<char>> {
    let (s, t) = (lambda.len(), mu.len());
    let cell = |i: usize, j: usize| (lambda[i] == mu[j]).then_some(lambda[i]);
    let id = |i: usize, j: usize| i * t + j;
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); s * t];
    for i in 0..s {
        for j in 0..t {
            let (k, l) = (i + 1, j + 1);
            if k < s && l < t && cell(i, j).is_some() && cell(k, l).is_some() {
                adj[id(i, j)].push(id(k, l));
                adj[id(k, l)].push(id(i, j));
            }
        }
    }
    let mut seen = vec![false; s * t];
    let mut out = Vec::new();
    for start in 0..s * t {
        if seen[start] {
            continue;
        }
        let mut comp = vec![start];
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(v) = queue.pop_front() {
            for &u in &adj[v] {
                if !seen[u] {
                    seen[u] = true;
                    comp.push(u);
                    queue.push_back(u);
                }
            }
        }
        let lowest = *comp.iter().min().unwrap();
        let (mut i, mut j) = (lowest / t, lowest % t);
        let mut spelled = Vec::new();
        // follow the path out of the lowest vertex
        while let Some(c) = cell(i, j) {
            spelled.push(c);
            if i + 1 >= s || j + 1 >= t || !comp.contains(&id(i + 1, j + 1)) {
                break;
            }
            i += 1;
            j += 1;
        }
        out.push(spelled);
    }
    out
}

/// Full sparse M(α) as sorted (λ, μ, ν, count) tuples, plus the table size.
pub fn combinatorics(word: &Word) -> (usize, Vec<(u32, u32, u32, u32)>) {
    let subs = subwords(word);
    let index: HashMap<&[char], u32> = subs
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_slice(), i as u32))
        .collect();
    let mut out = Vec::new();
    for (li, lambda) in subs.iter().enumerate() {
        for (mi, mu) in subs.iter().enumerate() {
            let mut counts: BTreeMap<u32, u32> = BTreeMap::new();
            match (lambda.len(), mu.len()) {
                (0, 0) => {
                    counts.insert(0, 1);
                }
                (s, 0) => {
                    counts.insert(0, s as u32);
                }
                (0, t) => {
                    counts.insert(0, t as u32);
                }
                _ => {
                    for nu in produced_by_components(lambda, mu) {
                        *counts.entry(index[nu.as_slice()]).or_default() += 1;
                    }
                }
            }
            for (nu, c) in counts {
                out.push((li as u32, mi as u32, nu, c));
            }
        }
    }
    (subs.len(), out)
}

/// Searches every injective map Ω(a) → Ω(b) for one carrying a onto b.
pub fn find_bijection_exhaustive(a: &Word, b: &Word) -> Option<Bijection> {
    if a.len() != b.len() {
        return None;
    }
    let from = a.distinct_letters();
    let to = b.distinct_letters();
    if from.len() != to.len() {
        return None;
    }
    let mut perm: Vec<usize> = (0..to.len()).collect();
    loop {
        let map: HashMap<char, char> = from.iter().copied().zip(perm.iter().map(|&p| to[p])).collect();
        if a.letters().iter().map(|c| map[c]).eq(b.letters().iter().copied()) {
            return Bijection::new(map).ok();
        }
        if !next_permutation(&mut perm) {
            return None;
        }
    }
}

fn next_permutation(v: &mut [usize]) -> bool {
    let n = v.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        Word::new(s.chars().collect()).unwrap()
    }

    #[test]
    fn reference_entry_for_aba() {
        let (d, m) = combinatorics(&w("aba"));
        assert_eq!(d, 6);
        let aba: Vec<_> = m.iter().filter(|t| t.0 == 5 && t.1 == 5).collect();
        assert_eq!(aba, [&(5, 5, 0, 4), &(5, 5, 1, 2), &(5, 5, 5, 1)]);
    }

    #[test]
    fn exhaustive_bijection() {
        assert!(find_bijection_exhaustive(&w("abc"), &w("cab")).is_some());
        assert!(find_bijection_exhaustive(&w("aab"), &w("abb")).is_none());
        assert!(find_bijection_exhaustive(&w("ab"), &w("cc")).is_none());
    }
}
