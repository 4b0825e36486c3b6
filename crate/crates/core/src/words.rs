//! Words of the free semigroup on `N` generators and admissible index sets.
//!
//! A [`Word`] stores 1-based generator indices, so `g1g2` is `[1, 2]` and the
//! empty word is `[]`. Words order by length first and lexicographically
//! within a length, which gives every word set a canonical iteration order.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hard ceiling on the number of words an enumeration may produce.
pub const DEFAULT_WORD_CAP: usize = 1 << 16;

#[derive(Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Word(Vec<usize>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    /// The single-letter word `g_k` (1-based).
    pub fn letter(k: usize) -> Self {
        assert!(k >= 1, "generator indices are 1-based");
        Word(vec![k])
    }

    pub fn from_letters(letters: &[usize]) -> Self {
        assert!(letters.iter().all(|&k| k >= 1), "generator indices are 1-based");
        Word(letters.to_vec())
    }

    pub fn letters(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max_letter(&self) -> usize {
        self.0.iter().copied().max().unwrap_or(0)
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut letters = Vec::with_capacity(self.len() + other.len());
        letters.extend_from_slice(&self.0);
        letters.extend_from_slice(&other.0);
        Word(letters)
    }

    /// `g_k · self`
    pub fn prepend(&self, k: usize) -> Word {
        let mut letters = Vec::with_capacity(self.len() + 1);
        letters.push(k);
        letters.extend_from_slice(&self.0);
        Word(letters)
    }

    /// `self · g_k`
    pub fn append(&self, k: usize) -> Word {
        let mut letters = self.0.clone();
        letters.push(k);
        Word(letters)
    }

    pub fn first(&self) -> Option<usize> {
        self.0.first().copied()
    }

    pub fn last(&self) -> Option<usize> {
        self.0.last().copied()
    }

    /// The word with its first letter removed; `None` for the empty word.
    pub fn drop_first(&self) -> Option<Word> {
        (!self.is_empty()).then(|| Word(self.0[1..].to_vec()))
    }

    /// The word with its last letter removed; `None` for the empty word.
    pub fn drop_last(&self) -> Option<Word> {
        (!self.is_empty()).then(|| Word(self.0[..self.len() - 1].to_vec()))
    }

    pub fn is_suffix_of(&self, other: &Word) -> bool {
        other.0.ends_with(&self.0)
    }

    /// All words of length exactly `len` over `n_vars` letters, in canonical order.
    pub fn all_of_length(n_vars: usize, len: usize) -> impl Iterator<Item = Word> {
        let total = if n_vars == 0 && len > 0 { 0 } else { n_vars.pow(len as u32) };
        (0..total).map(move |mut code| {
            let mut letters = vec![0; len];
            for slot in letters.iter_mut().rev() {
                *slot = code % n_vars + 1;
                code /= n_vars;
            }
            Word(letters)
        })
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len().cmp(&other.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    /// Dot-separated letters: `"1.2"` is `g1g2`, `""` is the empty word.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, k) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            write!(f, "{k}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            f.write_str("∅")
        } else {
            for k in &self.0 {
                write!(f, "g{k}")?;
            }
            Ok(())
        }
    }
}

impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(Word::empty());
        }
        s.split('.')
            .map(|part| match part.trim().parse::<usize>() {
                Ok(k) if k >= 1 => Ok(k),
                _ => Err(Error::Parse(format!("invalid word key {s:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Word)
    }
}

impl TryFrom<String> for Word {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Word> for String {
    fn from(w: Word) -> String {
        w.to_string()
    }
}

/// Free-semigroup product.
pub fn concat(w1: &Word, w2: &Word) -> Word {
    w1.concat(w2)
}

/// Checks admissibility: every letter is at most `n_vars`, and each non-empty
/// word keeps its first-letter and last-letter deletions inside the set.
///
/// This is equivalent to closure of the complement under left and right
/// multiplication by generators. The error names the first offending word.
pub fn check_admissible(n_vars: usize, words: &BTreeSet<Word>) -> Result<()> {
    if n_vars == 0 {
        return Err(Error::Inadmissible("n_vars must be at least 1".into()));
    }
    for w in words {
        if w.max_letter() > n_vars {
            return Err(Error::Inadmissible(format!(
                "word {w:?} uses a letter above n_vars = {n_vars}"
            )));
        }
        if let (Some(head_cut), Some(tail_cut)) = (w.drop_first(), w.drop_last()) {
            if !words.contains(&head_cut) {
                return Err(Error::Inadmissible(format!(
                    "word {w:?}: deleting its first letter gives {head_cut:?}, which is missing"
                )));
            }
            if !words.contains(&tail_cut) {
                return Err(Error::Inadmissible(format!(
                    "word {w:?}: deleting its last letter gives {tail_cut:?}, which is missing"
                )));
            }
        }
    }
    Ok(())
}

pub fn validate_admissible(n_vars: usize, words: &BTreeSet<Word>) -> bool {
    check_admissible(n_vars, words).is_ok()
}

/// A finite admissible word set `Λ` over `n_vars` generators.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(try_from = "AdmissibleSetRepr", into = "AdmissibleSetRepr")]
pub struct AdmissibleSet {
    n_vars: usize,
    words: BTreeSet<Word>,
}

#[derive(Serialize, Deserialize)]
struct AdmissibleSetRepr {
    n_vars: usize,
    words: Vec<Word>,
}

impl TryFrom<AdmissibleSetRepr> for AdmissibleSet {
    type Error = Error;

    fn try_from(repr: AdmissibleSetRepr) -> Result<Self> {
        AdmissibleSet::new(repr.n_vars, repr.words)
    }
}

impl From<AdmissibleSet> for AdmissibleSetRepr {
    fn from(set: AdmissibleSet) -> Self {
        AdmissibleSetRepr { n_vars: set.n_vars, words: set.words.into_iter().collect() }
    }
}

impl AdmissibleSet {
    pub fn new(n_vars: usize, words: impl IntoIterator<Item = Word>) -> Result<Self> {
        let words: BTreeSet<Word> = words.into_iter().collect();
        check_admissible(n_vars, &words)?;
        Ok(AdmissibleSet { n_vars, words })
    }

    /// Parses dot-separated word keys, e.g. `["", "1", "2", "1.2"]`.
    pub fn from_keys<S: AsRef<str>>(n_vars: usize, keys: &[S]) -> Result<Self> {
        let words = keys.iter().map(|k| k.as_ref().parse()).collect::<Result<Vec<Word>>>()?;
        AdmissibleSet::new(n_vars, words)
    }

    /// `Λ_m`: all words of length at most `m`.
    pub fn lambda_m(n_vars: usize, m: usize) -> Result<Self> {
        Self::lambda_m_capped(n_vars, m, DEFAULT_WORD_CAP)
    }

    pub fn lambda_m_capped(n_vars: usize, m: usize, cap: usize) -> Result<Self> {
        if n_vars == 0 {
            return Err(Error::Inadmissible("n_vars must be at least 1".into()));
        }
        let count = lambda_m_cardinality(n_vars, m);
        if count.is_none_or(|c| c > cap) {
            return Err(Error::Resource(format!(
                "Λ_{m} over {n_vars} letters exceeds the cap of {cap} words"
            )));
        }
        let words = (0..=m).flat_map(|len| Word::all_of_length(n_vars, len)).collect();
        Ok(AdmissibleSet { n_vars, words })
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn contains(&self, w: &Word) -> bool {
        self.words.contains(w)
    }

    /// Words in canonical order.
    pub fn iter(&self) -> impl DoubleEndedIterator<Item = &Word> + ExactSizeIterator {
        self.words.iter()
    }

    pub fn words(&self) -> &BTreeSet<Word> {
        &self.words
    }

    /// Longest word length; 0 for `{∅}` and for the empty set.
    pub fn max_len(&self) -> usize {
        self.words.iter().next_back().map_or(0, Word::len)
    }

    pub fn is_subset(&self, other: &AdmissibleSet) -> bool {
        self.n_vars == other.n_vars && self.words.is_subset(&other.words)
    }

    /// True when this set is exactly `Λ_m` for `m = max_len()`.
    pub fn is_full_lambda_m(&self) -> bool {
        !self.is_empty()
            && lambda_m_cardinality(self.n_vars, self.max_len()) == Some(self.len())
    }

    pub fn union(&self, other: &AdmissibleSet) -> Result<AdmissibleSet> {
        if self.n_vars != other.n_vars {
            return Err(Error::DimensionMismatch(format!(
                "cannot merge word sets over {} and {} letters",
                self.n_vars, other.n_vars
            )));
        }
        AdmissibleSet::new(self.n_vars, self.words.union(&other.words).cloned())
    }

    /// Words `g_k·w` with `w ∈ Λ` that fall outside `Λ`.
    ///
    /// Every word outside `Λ` factors as `prefix · b` with `b` in this set
    /// (take the longest suffix lying in `Λ`), so `T^b = 0` for all `b` is a
    /// finite certificate of `Λ`-joint nilpotency. For the empty set the
    /// boundary is `{∅}`.
    pub fn boundary(&self) -> BTreeSet<Word> {
        if self.is_empty() {
            return BTreeSet::from([Word::empty()]);
        }
        let mut out = BTreeSet::new();
        for w in &self.words {
            for k in 1..=self.n_vars {
                let ext = w.prepend(k);
                if !self.words.contains(&ext) {
                    out.insert(ext);
                }
            }
        }
        out
    }
}

fn lambda_m_cardinality(n_vars: usize, m: usize) -> Option<usize> {
    let mut total: usize = 0;
    let mut level: usize = 1;
    for _ in 0..=m {
        total = total.checked_add(level)?;
        level = level.checked_mul(n_vars)?;
    }
    Some(total)
}

pub fn lambda_m(n_vars: usize, m: usize) -> Result<AdmissibleSet> {
    AdmissibleSet::lambda_m(n_vars, m)
}

pub fn boundary(lambda: &AdmissibleSet) -> BTreeSet<Word> {
    lambda.boundary()
}
