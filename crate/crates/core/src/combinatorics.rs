//! The combinatorics M(α)_ν(λ, μ) of a word.
//!
//! For two subwords λ = Y₁…Y_s and μ = Z₁…Z_t the match matrix holds Y_i at
//! (i, j) when Y_i = Z_j and ε otherwise. Edges join (i, j) to (i+1, j+1)
//! when both cells are non-ε, so every connected component is either a
//! single ε cell or a maximal diagonal run of matches. Reading a run from its
//! top-left cell spells a subword ν of α; M counts, per ν, how many
//! components of the (λ, μ) matrix spell it.

use crate::error::{Error, Result};
use crate::word::{distinct_subwords, SubwordTable, Word, EPSILON};

/// Whether isolated ε cells are counted as components producing ε.
///
/// With this set, cells of a match matrix are partitioned by components and
/// Σ_{ν≠ε} |ν|·M_ν(λ,μ) + M_ε(λ,μ) = s·t, in line with the ε-operand rules
/// M_ε(λ, ε) = s and M_ε(ε, μ) = t.
pub const EPSILON_CELLS_PRODUCE_EPSILON: bool = true;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchMatrix {
    rows: usize,
    cols: usize,
    cells: Vec<Option<char>>,
}

impl MatchMatrix {
    /// s = |λ|
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// t = |μ|
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Cell (i, j), 0-based; `None` is ε.
    pub fn get(&self, i: usize, j: usize) -> Option<char> {
        self.cells[i * self.cols + j]
    }
}

pub fn match_matrix(lambda: &[char], mu: &[char]) -> Result<MatchMatrix> {
    if lambda.is_empty() || mu.is_empty() {
        return Err(Error::EmptyWord);
    }
    let cells = lambda
        .iter()
        .flat_map(|&y| mu.iter().map(move |&z| (y == z).then_some(y)))
        .collect();
    Ok(MatchMatrix {
        rows: lambda.len(),
        cols: mu.len(),
        cells,
    })
}

/// A connected component of the match-matrix graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    /// Cells from the minimal one along the diagonal, 0-based.
    pub cells: Vec<(usize, usize)>,
    pub epsilon: bool,
}

impl Component {
    pub fn start(&self) -> (usize, usize) {
        self.cells[0]
    }
}

/// Partition of all cells into ε singletons and maximal diagonal chains,
/// ordered by starting cell.
pub fn diagonal_components(m: &MatchMatrix) -> Vec<Component> {
    let (s, t) = (m.rows, m.cols);
    let mut out = Vec::new();
    for diag in 0..s + t - 1 {
        // diagonal through (i0, j0) with i0 = 0 or j0 = 0
        let (mut i, mut j) = if diag < s { (s - 1 - diag, 0) } else { (0, diag - s + 1) };
        let mut run: Vec<(usize, usize)> = Vec::new();
        while i < s && j < t {
            if m.get(i, j).is_some() {
                run.push((i, j));
            } else {
                if !run.is_empty() {
                    out.push(Component {
                        cells: std::mem::take(&mut run),
                        epsilon: false,
                    });
                }
                out.push(Component {
                    cells: vec![(i, j)],
                    epsilon: true,
                });
            }
            i += 1;
            j += 1;
        }
        if !run.is_empty() {
            out.push(Component {
                cells: run,
                epsilon: false,
            });
        }
    }
    out.sort_by_key(Component::start);
    out
}

/// The subword spelled by a component; empty for ε.
pub fn produced_subword(c: &Component, m: &MatchMatrix) -> Vec<char> {
    if c.epsilon {
        return Vec::new();
    }
    c.cells.iter().filter_map(|&(i, j)| m.get(i, j)).collect()
}

/// Accumulates the ν-counts of one operand pair into `counts`, recording
/// each ν index the first time it is touched.
fn pair_counts(
    table: &SubwordTable,
    lambda: usize,
    mu: usize,
    counts: &mut [u32],
    touched: &mut Vec<u32>,
) {
    let mut bump = |nu: usize, by: u32| {
        if counts[nu] == 0 {
            touched.push(nu as u32);
        }
        counts[nu] += by;
    };
    let s = table.subword_len(lambda);
    let t = table.subword_len(mu);
    match (s, t) {
        (0, 0) => bump(EPSILON, 1),
        (s, 0) => bump(EPSILON, s as u32),
        (0, t) => bump(EPSILON, t as u32),
        (s, t) => {
            let letters = table.source().letters();
            let ls = table.entry(lambda).expect("valid index").start;
            let ms = table.entry(mu).expect("valid index").start;
            let mut eps = 0u32;
            for diag in 0..s + t - 1 {
                let (mut i, mut j) = if diag < s { (s - 1 - diag, 0) } else { (0, diag - s + 1) };
                let mut run = 0usize;
                while i < s && j < t {
                    if letters[ls + i] == letters[ms + j] {
                        run += 1;
                    } else {
                        if run > 0 {
                            bump(table.index_at(ls + i - run, run), 1);
                            run = 0;
                        }
                        eps += 1;
                    }
                    i += 1;
                    j += 1;
                }
                if run > 0 {
                    bump(table.index_at(ls + i - run, run), 1);
                }
            }
            if EPSILON_CELLS_PRODUCE_EPSILON && eps > 0 {
                bump(EPSILON, eps);
            }
        }
    }
}

/// M(α)_ν(λ, μ) for one operand pair, as (ν, count) sorted by ν with zero
/// counts omitted.
pub fn combinatorics_entry(
    table: &SubwordTable,
    lambda: usize,
    mu: usize,
) -> Result<Vec<(usize, u32)>> {
    let d = table.len();
    for index in [lambda, mu] {
        if index >= d {
            return Err(Error::IndexOutOfRange { index, size: d });
        }
    }
    let mut counts = vec![0u32; d];
    let mut touched = Vec::new();
    pair_counts(table, lambda, mu, &mut counts, &mut touched);
    touched.sort_unstable();
    Ok(touched
        .into_iter()
        .map(|nu| (nu as usize, counts[nu as usize]))
        .collect())
}

/// One non-zero value of M(α): (λ, μ, ν) canonical indices and the count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    pub lambda: u32,
    pub mu: u32,
    pub nu: u32,
    pub count: u32,
}

/// Sparse M(α) over canonical indices, sorted lexicographically by
/// (λ, μ, ν). Absent triples are zero.
#[derive(Debug, Clone)]
pub struct CombinatoricsMap {
    table: SubwordTable,
    triples: Vec<Triple>,
}

impl CombinatoricsMap {
    pub fn table(&self) -> &SubwordTable {
        &self.table
    }

    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    pub fn get(&self, lambda: usize, mu: usize, nu: usize) -> u32 {
        let key = (lambda as u32, mu as u32, nu as u32);
        self.triples
            .binary_search_by(|t| (t.lambda, t.mu, t.nu).cmp(&key))
            .map(|i| self.triples[i].count)
            .unwrap_or(0)
    }

    /// Index-level equality: same table size and identical triples.
    pub fn same_as(&self, other: &CombinatoricsMap) -> bool {
        self.table.len() == other.table.len() && self.triples == other.triples
    }
}

pub fn combinatorics_map(word: &Word) -> CombinatoricsMap {
    let table = distinct_subwords(word);
    let d = table.len();
    let mut counts = vec![0u32; d];
    let mut touched = Vec::with_capacity(d);
    let mut triples = Vec::new();
    for lambda in 0..d {
        for mu in 0..d {
            pair_counts(&table, lambda, mu, &mut counts, &mut touched);
            touched.sort_unstable();
            for &nu in &touched {
                triples.push(Triple {
                    lambda: lambda as u32,
                    mu: mu as u32,
                    nu,
                    count: counts[nu as usize],
                });
                counts[nu as usize] = 0;
            }
            touched.clear();
        }
    }
    CombinatoricsMap { table, triples }
}
