//! Words over explicit alphabets, their distinct subwords, and letter bijections.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use crate::error::{Error, Result};

/// An ordered set of distinct symbols.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Alphabet {
    letters: Vec<char>,
}

impl Alphabet {
    pub fn new(letters: impl IntoIterator<Item = char>) -> Result<Self> {
        let letters: Vec<char> = letters.into_iter().collect();
        if letters.is_empty() {
            return Err(Error::InvalidAlphabet("no symbols".into()));
        }
        let mut seen = HashSet::with_capacity(letters.len());
        for &c in &letters {
            if !seen.insert(c) {
                return Err(Error::InvalidAlphabet(format!("duplicate symbol {c:?}")));
            }
        }
        Ok(Alphabet { letters })
    }

    /// The 26 lowercase ASCII letters.
    pub fn lowercase() -> Self {
        Alphabet {
            letters: ('a'..='z').collect(),
        }
    }

    /// The 94 printable, non-space ASCII characters `!` through `~`.
    pub fn printable_ascii() -> Self {
        Alphabet {
            letters: ('!'..='~').collect(),
        }
    }

    /// Distinct symbols of `text` in first-occurrence order.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut seen = HashSet::new();
        Alphabet::new(text.chars().filter(|c| seen.insert(*c)))
    }

    pub fn letters(&self) -> &[char] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn contains(&self, c: char) -> bool {
        self.letters.contains(&c)
    }

    pub fn position(&self, c: char) -> Option<usize> {
        self.letters.iter().position(|&l| l == c)
    }
}

/// A non-empty finite sequence of letters.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    letters: Vec<char>,
}

impl Word {
    pub fn new(letters: Vec<char>) -> Result<Self> {
        if letters.is_empty() {
            return Err(Error::EmptyWord);
        }
        Ok(Word { letters })
    }

    pub fn letters(&self) -> &[char] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Ω(α): distinct letters in first-occurrence order.
    pub fn distinct_letters(&self) -> Vec<char> {
        let mut seen = HashSet::new();
        self.letters
            .iter()
            .copied()
            .filter(|c| seen.insert(*c))
            .collect()
    }

    pub fn reversed(&self) -> Word {
        Word {
            letters: self.letters.iter().rev().copied().collect(),
        }
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.letters {
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

pub fn parse_word(text: &str, alphabet: &Alphabet) -> Result<Word> {
    let letters: Vec<char> = text.chars().collect();
    if letters.is_empty() {
        return Err(Error::EmptyWord);
    }
    for (position, &symbol) in letters.iter().enumerate() {
        if !alphabet.contains(symbol) {
            return Err(Error::SymbolOutsideAlphabet { symbol, position });
        }
    }
    Ok(Word { letters })
}

/// One occurrence-anchored entry of a [`SubwordTable`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Subword {
    /// First-occurrence start position in the source word.
    pub start: usize,
    pub len: usize,
}

/// W(α): ε plus every distinct subword of a word, canonically ordered.
///
/// Index 0 is ε. Indices 1.. are sorted by (length, first-occurrence start),
/// a key that only depends on where subwords occur and never on which
/// letters they contain, so any letter bijection preserves the indexing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubwordTable {
    source: Word,
    // entries[0] is a placeholder for ε
    entries: Vec<Subword>,
    // canonical index of the subword occurring at (start, len), row-major
    // over start in 0..n and len in 0..=n
    occurrence: Vec<u32>,
}

pub const EPSILON: usize = 0;

impl SubwordTable {
    pub fn source(&self) -> &Word {
        &self.source
    }

    /// D = |W(α)|, ε included.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Subword lengths by canonical index (0 for ε).
    pub fn subword_len(&self, index: usize) -> usize {
        self.entries[index].len
    }

    pub fn entry(&self, index: usize) -> Result<Subword> {
        self.entries.get(index).copied().ok_or(Error::IndexOutOfRange {
            index,
            size: self.entries.len(),
        })
    }

    /// Letters of the subword at `index`; empty for ε.
    pub fn content(&self, index: usize) -> &[char] {
        let e = self.entries[index];
        &self.source.letters[e.start..e.start + e.len]
    }

    /// Canonical index of the subword occurring at `start` with length `len`.
    #[inline]
    pub fn index_at(&self, start: usize, len: usize) -> usize {
        if len == 0 {
            return EPSILON;
        }
        let n = self.source.len();
        self.occurrence[start * (n + 1) + len] as usize
    }

    /// Canonical index of an arbitrary letter sequence, if it is a subword.
    pub fn index_of(&self, content: &[char]) -> Option<usize> {
        if content.is_empty() {
            return Some(EPSILON);
        }
        let n = self.source.len();
        let k = content.len();
        if k > n {
            return None;
        }
        (0..=n - k)
            .find(|&p| &self.source.letters[p..p + k] == content)
            .map(|p| self.index_at(p, k))
    }

    /// The (length, first-occurrence start) sort keys of the non-ε entries.
    pub fn keys(&self) -> Vec<(usize, usize)> {
        self.entries[1..].iter().map(|e| (e.len, e.start)).collect()
    }

    /// Number of leading canonical indices whose subword length is at most `cap`.
    pub fn count_up_to_len(&self, cap: usize) -> usize {
        self.entries.partition_point(|e| e.len <= cap)
    }
}

pub fn distinct_subwords(word: &Word) -> SubwordTable {
    let letters = word.letters();
    let n = letters.len();
    let mut entries = vec![Subword { start: 0, len: 0 }];
    let mut occurrence = vec![0u32; n * (n + 1)];
    let mut index: HashMap<&[char], u32> = HashMap::with_capacity(n * (n + 1) / 2);
    // (len, start) ascending, so the first insertion of each subword is its canonical slot
    for len in 1..=n {
        for start in 0..=n - len {
            let next = entries.len() as u32;
            let idx = *index.entry(&letters[start..start + len]).or_insert_with(|| {
                entries.push(Subword { start, len });
                next
            });
            occurrence[start * (n + 1) + len] = idx;
        }
    }
    SubwordTable {
        source: word.clone(),
        entries,
        occurrence,
    }
}

/// Upper bound on the table size of a length-`n` word: n(n+1)/2 + 1.
pub fn max_table_size(n: usize) -> usize {
    n * (n + 1) / 2 + 1
}

/// A one-to-one letter map φ.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Bijection {
    mapping: BTreeMap<char, char>,
}

impl Bijection {
    pub fn new(pairs: impl IntoIterator<Item = (char, char)>) -> Result<Self> {
        let mut mapping = BTreeMap::new();
        let mut images = HashSet::new();
        for (from, to) in pairs {
            if let Some(prev) = mapping.insert(from, to) {
                if prev != to {
                    return Err(Error::InvalidAlphabet(format!(
                        "letter {from:?} mapped to both {prev:?} and {to:?}"
                    )));
                }
                continue;
            }
            if !images.insert(to) {
                return Err(Error::NotInjective(to));
            }
        }
        Ok(Bijection { mapping })
    }

    pub fn identity(alphabet: &Alphabet) -> Self {
        Bijection {
            mapping: alphabet.letters().iter().map(|&c| (c, c)).collect(),
        }
    }

    pub fn get(&self, c: char) -> Option<char> {
        self.mapping.get(&c).copied()
    }

    pub fn inverse(&self) -> Bijection {
        Bijection {
            mapping: self.mapping.iter().map(|(&a, &b)| (b, a)).collect(),
        }
    }

    pub fn pairs(&self) -> impl Iterator<Item = (char, char)> + '_ {
        self.mapping.iter().map(|(&a, &b)| (a, b))
    }

    pub fn len(&self) -> usize {
        self.mapping.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mapping.is_empty()
    }
}

impl fmt::Display for Bijection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (a, b)) in self.pairs().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{a}->{b}")?;
        }
        Ok(())
    }
}

pub fn apply_bijection(word: &Word, phi: &Bijection) -> Result<Word> {
    let letters = word
        .letters()
        .iter()
        .map(|&c| phi.get(c).ok_or(Error::UnmappedLetter(c)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Word { letters })
}

pub fn is_palindrome(word: &Word) -> bool {
    let l = word.letters();
    l.iter().eq(l.iter().rev())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        Word::new(s.chars().collect()).unwrap()
    }

    fn contents(t: &SubwordTable) -> Vec<String> {
        (0..t.len())
            .map(|i| t.content(i).iter().collect())
            .collect()
    }

    #[test]
    fn parse_word_validates() {
        let ab = Alphabet::new(['a', 'b']).unwrap();
        assert_eq!(parse_word("aba", &ab).unwrap().letters(), &['a', 'b', 'a']);
        assert!(matches!(parse_word("", &ab), Err(Error::EmptyWord)));
        match parse_word("abz", &ab) {
            Err(Error::SymbolOutsideAlphabet { symbol, position }) => {
                assert_eq!((symbol, position), ('z', 2));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn alphabet_rejects_duplicates_and_empty() {
        assert!(Alphabet::new(['a', 'a']).is_err());
        assert!(Alphabet::new([]).is_err());
        assert_eq!(Alphabet::printable_ascii().len(), 94);
    }

    #[test]
    fn subwords_of_small_words() {
        let t = distinct_subwords(&w("ab"));
        assert_eq!(contents(&t), ["", "a", "b", "ab"]);
        assert_eq!(t.entry(1).unwrap().start, 0);
        assert_eq!(t.entry(2).unwrap().start, 1);

        let t = distinct_subwords(&w("aaa"));
        assert_eq!(contents(&t), ["", "a", "aa", "aaa"]);

        let t = distinct_subwords(&w("aba"));
        assert_eq!(contents(&t), ["", "a", "b", "ab", "ba", "aba"]);
        assert_eq!(t.index_at(2, 1), 1);
        assert_eq!(t.index_of(&['b', 'a']), Some(4));
        assert_eq!(t.index_of(&['b', 'b']), None);
        assert!(t.entry(6).is_err());
    }

    #[test]
    fn table_size_formula() {
        assert_eq!(max_table_size(10), 56);
        assert_eq!(max_table_size(15), 121);
        assert_eq!(max_table_size(20), 211);
        assert_eq!(distinct_subwords(&w("abcd")).len(), max_table_size(4));
    }

    #[test]
    fn bijection_application() {
        let phi = Bijection::new([('a', 'c'), ('b', 'd')]).unwrap();
        assert_eq!(apply_bijection(&w("aba"), &phi).unwrap(), w("cdc"));
        let id = Bijection::new([('a', 'a')]).unwrap();
        assert_eq!(apply_bijection(&w("aa"), &id).unwrap(), w("aa"));
        let partial = Bijection::new([('a', 'b')]).unwrap();
        assert!(matches!(
            apply_bijection(&w("ab"), &partial),
            Err(Error::UnmappedLetter('b'))
        ));
        assert!(matches!(
            Bijection::new([('a', 'c'), ('b', 'c')]),
            Err(Error::NotInjective('c'))
        ));
    }

    #[test]
    fn palindromes() {
        assert!(is_palindrome(&w("abccba")));
        assert!(!is_palindrome(&w("ab")));
        assert!(is_palindrome(&w("a")));
    }

    #[test]
    fn cap_counts_prefix() {
        let t = distinct_subwords(&w("aba"));
        assert_eq!(t.count_up_to_len(0), 1);
        assert_eq!(t.count_up_to_len(1), 3);
        assert_eq!(t.count_up_to_len(2), 5);
        assert_eq!(t.count_up_to_len(9), 6);
    }
}
