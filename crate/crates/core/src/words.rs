//! Words over the projection alphabet `1..=N` and their trace classes.
//!
//! A word `a_1 a_2 ... a_n` stands for the operator product `P_{a_1} ... P_{a_n}`;
//! the empty word stands for the identity. Two words land in the same
//! [`CanonicalClass`] exactly when idempotence (`P^2 = P`) and cyclicity of a
//! trace force their traces to agree. With [`Symmetry::CyclicReversal`] the
//! reversal of a word is identified too, which is valid for real-valued moments.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A finite word over `1..=N`. The empty word is the identity.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Word(Vec<u32>);

impl Word {
    pub fn new(letters: Vec<u32>) -> Self {
        Word(letters)
    }

    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn letter(x: u32) -> Self {
        Word(vec![x])
    }

    /// Builds a word and checks every letter against the alphabet `1..=n`.
    pub fn checked(letters: Vec<u32>, n: usize) -> Result<Self> {
        let w = Word(letters);
        w.check_alphabet(n)?;
        Ok(w)
    }

    /// Parses a word written as a string of decimal digits, e.g. `"1221"`.
    /// Only usable for alphabets of size at most 9.
    pub fn parse(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| {
                c.to_digit(10)
                    .filter(|&d| d >= 1)
                    .ok_or_else(|| Error::Input(format!("bad letter {c:?} in word {s:?}")))
            })
            .collect::<Result<Vec<_>>>()
            .map(Word)
    }

    pub fn check_alphabet(&self, n: usize) -> Result<()> {
        match self.0.iter().find(|&&a| a == 0 || a as usize > n) {
            Some(&letter) => Err(Error::LetterOutOfRange { letter, n }),
            None => Ok(()),
        }
    }

    pub fn letters(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = Vec::with_capacity(self.len() + other.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        Word(v)
    }

    /// Left rotation by `j` positions.
    pub fn rotate(&self, j: usize) -> Word {
        let mut v = self.0.clone();
        if !v.is_empty() {
            let len = v.len();
            v.rotate_left(j % len);
        }
        Word(v)
    }

    /// True when no two adjacent letters coincide.
    pub fn is_power_free(&self) -> bool {
        self.0.windows(2).all(|w| w[0] != w[1])
    }

    /// Shortlex order: shorter words first, then lexicographic.
    pub fn shortlex_cmp(&self, other: &Word) -> std::cmp::Ordering {
        self.len().cmp(&other.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("∅");
        }
        if self.0.iter().all(|&a| a < 10) {
            for a in &self.0 {
                write!(f, "{a}")?;
            }
            Ok(())
        } else {
            let parts: Vec<String> = self.0.iter().map(|a| a.to_string()).collect();
            f.write_str(&parts.join("."))
        }
    }
}

/// Letter reversal; the word of `(P_{a_1} ... P_{a_n})^†`.
pub fn dagger(w: &Word) -> Word {
    Word(w.0.iter().rev().copied().collect())
}

/// Collapses every maximal run `a^r` to a single `a`.
pub fn collapse_powers(w: &Word) -> Word {
    let mut v: Vec<u32> = Vec::with_capacity(w.len());
    for &a in &w.0 {
        if v.last() != Some(&a) {
            v.push(a);
        }
    }
    Word(v)
}

/// The reduction map: collapse powers, then drop the final letter when it
/// equals the first one. Single letters are kept, so `reduce("11") = "1"`.
pub fn reduce(w: &Word) -> Word {
    let mut v = collapse_powers(w).0;
    if v.len() >= 2 && v.first() == v.last() {
        v.pop();
    }
    Word(v)
}

/// Which symmetries identify reduced words.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Symmetry {
    /// Cyclic rotations only; valid for complex traces.
    Cyclic,
    /// Cyclic rotations and reversal; valid for real-valued moments.
    CyclicReversal,
}

/// Orbit representative of a reduced word: its lexicographically least rotation
/// (also over rotations of the reversal under [`Symmetry::CyclicReversal`]).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalClass {
    word: Word,
    symmetry: Symmetry,
}

impl CanonicalClass {
    pub fn word(&self) -> &Word {
        &self.word
    }

    pub fn symmetry(&self) -> Symmetry {
        self.symmetry
    }

    /// Class of the adjoint word. Equal to `self` under reversal symmetry.
    pub fn adjoint(&self) -> CanonicalClass {
        canonical_class(&dagger(&self.word), self.symmetry)
    }

    /// A class fixed by the adjoint must carry a real moment.
    pub fn is_self_adjoint(&self) -> bool {
        self.adjoint() == *self
    }
}

impl fmt::Display for CanonicalClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.word.fmt(f)
    }
}

fn least_rotation(letters: &[u32]) -> Vec<u32> {
    let n = letters.len();
    let mut best: Vec<u32> = letters.to_vec();
    let mut buf = Vec::with_capacity(n);
    for j in 1..n {
        buf.clear();
        buf.extend_from_slice(&letters[j..]);
        buf.extend_from_slice(&letters[..j]);
        if buf < best {
            best.clone_from(&buf);
        }
    }
    best
}

pub fn canonical_class(w: &Word, symmetry: Symmetry) -> CanonicalClass {
    let r = reduce(w);
    let mut best = least_rotation(&r.0);
    if symmetry == Symmetry::CyclicReversal {
        let rev: Vec<u32> = r.0.iter().rev().copied().collect();
        let alt = least_rotation(&rev);
        if alt < best {
            best = alt;
        }
    }
    CanonicalClass { word: Word(best), symmetry }
}

/// Class of the moment `<a|b>`, i.e. of the word `dagger(a)·b`.
pub fn pair_class(a: &Word, b: &Word, symmetry: Symmetry) -> CanonicalClass {
    canonical_class(&dagger(a).concat(b), symmetry)
}

/// `(a, b) ~ (c, d)`: the moments `<a|b>` and `<c|d>` are forced equal.
pub fn pairs_equivalent(a: &Word, b: &Word, c: &Word, d: &Word, symmetry: Symmetry) -> bool {
    pair_class(a, b, symmetry) == pair_class(c, d, symmetry)
}

/// All words of length at most `k` over `1..=n` in shortlex order. With
/// `reduced`, only words without adjacent repeated letters.
pub fn enumerate_words(n: usize, k: usize, reduced: bool) -> Vec<Word> {
    let mut out = vec![Word::empty()];
    let mut layer = vec![Word::empty()];
    for _ in 0..k {
        let mut next = Vec::new();
        for w in &layer {
            for a in 1..=n as u32 {
                if reduced && w.0.last() == Some(&a) {
                    continue;
                }
                let mut v = w.0.clone();
                v.push(a);
                next.push(Word(v));
            }
        }
        if next.is_empty() {
            break;
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// Every distinct class `dagger(a)·b` for reduced words `a, b` of length at
/// most `k`, in shortlex order of the representatives.
pub fn enumerate_classes(n: usize, k: usize, symmetry: Symmetry) -> Vec<CanonicalClass> {
    let words = enumerate_words(n, k, true);
    let mut seen = BTreeSet::new();
    for a in &words {
        for b in &words {
            seen.insert(pair_class(a, b, symmetry).word);
        }
    }
    let mut classes: Vec<Word> = seen.into_iter().collect();
    classes.sort_by(|x, y| x.shortlex_cmp(y));
    classes.into_iter().map(|word| CanonicalClass { word, symmetry }).collect()
}
