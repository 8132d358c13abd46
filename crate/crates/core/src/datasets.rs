//! Palindrome and password datasets: generation, labeling, permutation, and
//! the `<label>\t<word>` file format.

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::word::{apply_bijection, is_palindrome, Alphabet, Bijection, Word};

/// Scores above this are strong passwords.
pub const STRONG_THRESHOLD: f64 = 0.7;

/// Entropy, in bits, that maps to a score of 1/2.
const ENTROPY_HALF_LIFE_BITS: f64 = 30.0;

// rejection sampling gives up after this many draws per requested item
const MAX_ATTEMPTS_PER_ITEM: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Task {
    Palindrome,
    Password,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Palindrome => "palindrome",
            Task::Password => "password",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "palindrome" | "palindromes" => Ok(Task::Palindrome),
            "password" | "passwords" => Ok(Task::Password),
            other => Err(Error::InvalidConfig(format!("unknown task {other:?}"))),
        }
    }

    pub fn alphabet(self) -> Alphabet {
        match self {
            Task::Palindrome => Alphabet::lowercase(),
            Task::Password => Alphabet::printable_ascii(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Val, Split::Test];

    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledDataset {
    pub items: Vec<(Word, u8)>,
    pub task: Option<Task>,
    pub split: Option<Split>,
    pub seed: Option<u64>,
    pub word_length: usize,
}

impl LabeledDataset {
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn positives(&self) -> usize {
        self.items.iter().filter(|(_, l)| *l == 1).count()
    }
}

/// Per-class item counts for each split.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitCounts {
    pub train: usize,
    pub val: usize,
    pub test: usize,
}

impl SplitCounts {
    pub fn get(&self, split: Split) -> usize {
        match split {
            Split::Train => self.train,
            Split::Val => self.val,
            Split::Test => self.test,
        }
    }

    fn total(&self) -> usize {
        self.train + self.val + self.test
    }
}

fn check_counts(counts: &SplitCounts) -> Result<()> {
    if counts.train == 0 || counts.val == 0 || counts.test == 0 {
        return Err(Error::InvalidConfig("every split needs at least one item per class".into()));
    }
    Ok(())
}

/// Draws distinct words for both classes of every split, then shuffles each
/// split. `draw` returns a candidate for the class or `None` to retry.
fn generate<F>(
    task: Task,
    n: usize,
    counts: SplitCounts,
    seed: u64,
    mut draw: F,
) -> Result<[LabeledDataset; 3]>
where
    F: FnMut(&mut ChaCha8Rng, u8) -> Option<Word>,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut used: HashSet<Word> = HashSet::new();
    let mut out = Vec::with_capacity(3);
    for split in Split::ALL {
        let per_class = counts.get(split);
        let mut items = Vec::with_capacity(2 * per_class);
        for label in [1u8, 0u8] {
            let mut made = 0;
            let mut attempts = 0usize;
            while made < per_class {
                attempts += 1;
                if attempts > MAX_ATTEMPTS_PER_ITEM * per_class {
                    return Err(Error::Impossible(format!(
                        "could not draw {per_class} distinct {} items of class {label} for {split}",
                        task.name()
                    )));
                }
                if let Some(word) = draw(&mut rng, label) {
                    if used.insert(word.clone()) {
                        items.push((word, label));
                        made += 1;
                    }
                }
            }
        }
        items.shuffle(&mut rng);
        out.push(LabeledDataset {
            items,
            task: Some(task),
            split: Some(split),
            seed: Some(seed),
            word_length: n,
        });
    }
    Ok(out.try_into().expect("three splits"))
}

fn random_word(rng: &mut ChaCha8Rng, pool: &[char], len: usize) -> Word {
    Word::new((0..len).map(|_| pool[rng.gen_range(0..pool.len())]).collect()).expect("len >= 1")
}

/// Mirrors a random ⌈n/2⌉-letter prefix into a length-n palindrome.
fn palindromise(prefix: &[char], n: usize) -> Vec<char> {
    let mut letters = prefix.to_vec();
    letters.extend(prefix[..n / 2].iter().rev());
    letters
}

pub fn gen_palindrome_dataset(n: usize, counts: SplitCounts, seed: u64) -> Result<[LabeledDataset; 3]> {
    if n < 2 {
        return Err(Error::InvalidConfig("palindrome words need length >= 2".into()));
    }
    check_counts(&counts)?;
    let alphabet = Task::Palindrome.alphabet();
    let a = alphabet.len() as f64;
    let palindromes = a.powi(n.div_ceil(2) as i32);
    let others = a.powi(n as i32) - palindromes;
    let needed = counts.total() as f64;
    if needed > palindromes || needed > others {
        return Err(Error::Impossible(format!(
            "{} words per class requested but only {palindromes} palindromes and {others} \
             non-palindromes of length {n} exist",
            counts.total()
        )));
    }
    let letters = alphabet.letters().to_vec();
    generate(Task::Palindrome, n, counts, seed, |rng, label| {
        if label == 1 {
            let prefix = random_word(rng, &letters, n.div_ceil(2));
            Some(Word::new(palindromise(prefix.letters(), n)).expect("non-empty"))
        } else {
            let word = random_word(rng, &letters, n);
            (!is_palindrome(&word)).then_some(word)
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrengthScore {
    pub value: f64,
    pub entropy_bits: f64,
    pub distinct_chars: usize,
}

impl StrengthScore {
    pub fn is_strong(&self) -> bool {
        self.value > STRONG_THRESHOLD
    }
}

/// Password strength from length and distinct-character count:
/// bits = L·log2(distinct), score = 1 − 2^(−bits/30).
pub fn strength_score(password: &Word) -> StrengthScore {
    strength_from_counts(password.len(), password.distinct_letters().len())
}

fn strength_from_counts(len: usize, distinct_chars: usize) -> StrengthScore {
    let entropy_bits = if distinct_chars <= 1 {
        0.0
    } else {
        len as f64 * (distinct_chars as f64).log2()
    };
    StrengthScore {
        value: 1.0 - (-entropy_bits / ENTROPY_HALF_LIFE_BITS).exp2(),
        entropy_bits,
        distinct_chars,
    }
}

/// Smallest distinct-character count that makes a length-`n` password strong.
fn min_strong_distinct(n: usize, pool: usize) -> Option<usize> {
    (1..=n.min(pool)).find(|&d| strength_from_counts(n, d).is_strong())
}

/// How passwords of one length are drawn. Strong items are uniform over the
/// printable characters, kept when their distinct count reaches
/// `strong_min_distinct`; weak items are uniform over a random pool whose
/// size is uniform in `weak_pool_sizes`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PasswordScheme {
    pub strong_min_distinct: usize,
    pub weak_pool_sizes: (usize, usize),
}

pub fn password_scheme(n: usize) -> Result<PasswordScheme> {
    if n < 2 {
        return Err(Error::InvalidConfig("passwords need length >= 2".into()));
    }
    let pool = Task::Password.alphabet().len();
    let strong_min = min_strong_distinct(n, pool).ok_or_else(|| {
        Error::Impossible(format!("no password of length {n} can score above {STRONG_THRESHOLD}"))
    })?;
    // weak pools are too small to ever be strong
    let max = (strong_min - 1).max(1);
    Ok(PasswordScheme {
        strong_min_distinct: strong_min,
        weak_pool_sizes: (max.min(2), max),
    })
}

pub fn gen_password_dataset(n: usize, counts: SplitCounts, seed: u64) -> Result<[LabeledDataset; 3]> {
    let scheme = password_scheme(n)?;
    check_counts(&counts)?;
    let letters = Task::Password.alphabet().letters().to_vec();
    let strong_min = scheme.strong_min_distinct;
    let (weak_pool_min, weak_pool_max) = scheme.weak_pool_sizes;
    generate(Task::Password, n, counts, seed, |rng, label| {
        if label == 1 {
            let word = random_word(rng, &letters, n);
            let score = strength_score(&word);
            (score.distinct_chars >= strong_min && score.is_strong()).then_some(word)
        } else {
            let k = rng.gen_range(weak_pool_min..=weak_pool_max);
            let pool: Vec<char> = letters.choose_multiple(rng, k).copied().collect();
            let word = random_word(rng, &pool, n);
            (!strength_score(&word).is_strong()).then_some(word)
        }
    })
}

/// A random permutation of `alphabet` drawn from `seed`.
pub fn random_permutation(alphabet: &Alphabet, seed: u64) -> Bijection {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut images = alphabet.letters().to_vec();
    images.shuffle(&mut rng);
    Bijection::new(alphabet.letters().iter().copied().zip(images)).expect("permutation is injective")
}

/// Applies one alphabet permutation to every word; labels are kept.
pub fn permute_dataset(ds: &LabeledDataset, alphabet: &Alphabet, seed: u64) -> Result<LabeledDataset> {
    let phi = random_permutation(alphabet, seed);
    permute_with(ds, &phi)
}

pub fn permute_with(ds: &LabeledDataset, phi: &Bijection) -> Result<LabeledDataset> {
    let items = ds
        .items
        .iter()
        .map(|(w, l)| Ok((apply_bijection(w, phi)?, *l)))
        .collect::<Result<Vec<_>>>()?;
    Ok(LabeledDataset { items, ..ds.clone() })
}

pub fn format_dataset(ds: &LabeledDataset) -> String {
    let mut s = String::with_capacity(ds.len() * (ds.word_length + 3));
    for (word, label) in &ds.items {
        s.push_str(&format!("{label}\t{word}\n"));
    }
    s
}

pub fn write_dataset(ds: &LabeledDataset, path: &Path) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(format_dataset(ds).as_bytes())
        .map_err(|e| Error::io(path, e))
}

pub fn parse_dataset(text: &str, path: &Path) -> Result<LabeledDataset> {
    let err = |line: usize, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let mut items = Vec::new();
    let mut word_length = None;
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let (label, word) = line
            .split_once('\t')
            .ok_or_else(|| err(lineno, "expected <label>\\t<word>".into()))?;
        let label = match label {
            "0" => 0,
            "1" => 1,
            other => return Err(err(lineno, format!("invalid label {other:?}"))),
        };
        let word = Word::new(word.chars().collect()).map_err(|_| err(lineno, "empty word".into()))?;
        match word_length {
            None => word_length = Some(word.len()),
            Some(n) if n != word.len() => {
                return Err(err(
                    lineno,
                    format!("word length {} differs from {n}", word.len()),
                ))
            }
            _ => {}
        }
        items.push((word, label));
    }
    let word_length = word_length.ok_or(Error::EmptyDataset)?;
    let split = match path.file_stem().and_then(|s| s.to_str()) {
        Some("train") => Some(Split::Train),
        Some("val") => Some(Split::Val),
        Some("test") => Some(Split::Test),
        _ => None,
    };
    Ok(LabeledDataset {
        items,
        task: None,
        split,
        seed: None,
        word_length,
    })
}

pub fn read_dataset(path: &Path) -> Result<LabeledDataset> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_dataset(&text, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        Word::new(s.chars().collect()).unwrap()
    }

    #[test]
    fn strength_examples() {
        let s = strength_score(&w("abcdefghijklaaa"));
        assert_eq!(s.distinct_chars, 12);
        assert!((s.entropy_bits - 53.774_437_5).abs() < 1e-6);
        assert!((s.value - 0.711_2).abs() < 1e-3);
        assert!(s.is_strong());

        let s = strength_score(&w("abcdefghijkaaaa"));
        assert_eq!(s.distinct_chars, 11);
        assert!((s.entropy_bits - 51.891_474).abs() < 1e-5);
        assert!((s.value - 0.698_4).abs() < 1e-3);
        assert!(!s.is_strong());

        let s = strength_score(&w("aaaaaaaaaaaaaaa"));
        assert_eq!((s.entropy_bits, s.value), (0.0, 0.0));
        assert!(!s.is_strong());
    }

    #[test]
    fn strength_is_monotone_in_distinct_count() {
        let values: Vec<f64> = (1..=15).map(|d| strength_from_counts(15, d).value).collect();
        assert!(values.windows(2).all(|p| p[0] <= p[1]));
        assert_eq!(min_strong_distinct(15, 94), Some(12));
        let scheme = password_scheme(15).unwrap();
        assert_eq!(scheme.strong_min_distinct, 12);
        assert_eq!(scheme.weak_pool_sizes, (2, 11));
    }

    #[test]
    fn palindromise_even_and_odd() {
        assert_eq!(palindromise(&['a', 'b'], 4), ['a', 'b', 'b', 'a']);
        assert_eq!(palindromise(&['a', 'b', 'c'], 5), ['a', 'b', 'c', 'b', 'a']);
    }

    #[test]
    fn small_palindrome_sets() {
        let counts = SplitCounts { train: 20, val: 5, test: 5 };
        let [train, val, test] = gen_palindrome_dataset(7, counts, 3).unwrap();
        assert_eq!(train.len(), 40);
        assert_eq!(train.positives(), 20);
        assert_eq!((val.len(), test.len()), (10, 10));
        for ds in [&train, &val, &test] {
            for (word, label) in &ds.items {
                assert_eq!(*label == 1, is_palindrome(word));
                assert_eq!(word.len(), 7);
            }
        }
        let all: HashSet<_> = [&train, &val, &test]
            .iter()
            .flat_map(|d| d.items.iter().map(|(w, _)| w.clone()))
            .collect();
        assert_eq!(all.len(), 60);
    }

    #[test]
    fn impossible_palindrome_request() {
        let counts = SplitCounts { train: 100, val: 1, test: 1 };
        assert!(matches!(
            gen_palindrome_dataset(2, counts, 0),
            Err(Error::Impossible(_))
        ));
    }

    #[test]
    fn password_labels_follow_score() {
        let counts = SplitCounts { train: 30, val: 10, test: 10 };
        let splits = gen_password_dataset(15, counts, 11).unwrap();
        for ds in &splits {
            assert_eq!(ds.positives() * 2, ds.len());
            for (word, label) in &ds.items {
                assert_eq!(word.len(), 15);
                assert_eq!(*label == 1, strength_score(word).is_strong());
            }
        }
        assert!(gen_password_dataset(2, counts, 0).is_err());
    }

    #[test]
    fn generation_is_deterministic() {
        let counts = SplitCounts { train: 10, val: 3, test: 3 };
        let a = gen_password_dataset(15, counts, 5).unwrap();
        let b = gen_password_dataset(15, counts, 5).unwrap();
        assert_eq!(format_dataset(&a[0]), format_dataset(&b[0]));
        let c = gen_password_dataset(15, counts, 6).unwrap();
        assert_ne!(format_dataset(&a[0]), format_dataset(&c[0]));
    }

    #[test]
    fn permutation_keeps_labels() {
        let counts = SplitCounts { train: 10, val: 3, test: 3 };
        let [train, ..] = gen_palindrome_dataset(8, counts, 1).unwrap();
        let permuted = permute_dataset(&train, &Alphabet::lowercase(), 9).unwrap();
        for ((a, la), (b, lb)) in train.items.iter().zip(&permuted.items) {
            assert_eq!(la, lb);
            assert_eq!(is_palindrome(a), is_palindrome(b));
        }
        let id = Bijection::identity(&Alphabet::lowercase());
        assert_eq!(permute_with(&train, &id).unwrap(), train);
    }

    #[test]
    fn file_format_errors() {
        let p = Path::new("val.tsv");
        assert!(matches!(
            parse_dataset("2\tabc\n", p),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(parse_dataset("", p), Err(Error::EmptyDataset)));
        assert!(matches!(
            parse_dataset("1\taba\n0\tab\n", p),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_dataset("1 aba\n", p),
            Err(Error::Parse { line: 1, .. })
        ));
        let ds = parse_dataset("1\taba\n0\tabb\n", p).unwrap();
        assert_eq!(ds.split, Some(Split::Val));
        assert_eq!(format_dataset(&ds), "1\taba\n0\tabb\n");
    }
}
