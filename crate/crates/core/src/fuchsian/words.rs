//! Reduced words in a free group on generators `1..=r`.
//!
//! Letter `i` stands for generator `i` and `-i` for its inverse. Letters are
//! ordered `1 < -1 < 2 < -2 < ...`; words are ordered by length, then
//! lexicographically (length-lex).

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Letter = i32;

/// Position of a letter in the alphabet order `1, -1, 2, -2, ...`.
pub fn letter_rank(l: Letter) -> usize {
    2 * (l.unsigned_abs() as usize - 1) + usize::from(l < 0)
}

pub fn letter_from_rank(rank: usize) -> Letter {
    let g = (rank / 2 + 1) as Letter;
    if rank.is_multiple_of(2) {
        g
    } else {
        -g
    }
}

/// A freely reduced word.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Letter>", into = "Vec<Letter>")]
pub struct FreeWord {
    letters: Vec<Letter>,
}

impl FreeWord {
    pub fn identity() -> Self {
        FreeWord::default()
    }

    /// Freely reduces the given letters. Letter `0` is rejected.
    pub fn from_letters(letters: &[Letter]) -> Result<Self> {
        if letters.contains(&0) {
            return Err(Error::invalid("letter 0 is not a generator"));
        }
        let mut out: Vec<Letter> = Vec::with_capacity(letters.len());
        for &l in letters {
            if out.last() == Some(&-l) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Ok(FreeWord { letters: out })
    }

    pub fn letter(l: Letter) -> Self {
        assert!(l != 0, "letter 0 is not a generator");
        FreeWord { letters: vec![l] }
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn inverse(&self) -> Self {
        FreeWord {
            letters: self.letters.iter().rev().map(|l| -l).collect(),
        }
    }

    /// Reduced product `self * other`.
    pub fn concat(&self, other: &FreeWord) -> Self {
        let mut out = self.letters.clone();
        for &l in &other.letters {
            if out.last() == Some(&-l) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        FreeWord { letters: out }
    }

    pub fn pow(&self, k: usize) -> Self {
        (0..k).fold(FreeWord::identity(), |acc, _| acc.concat(self))
    }

    pub fn is_reduced(&self) -> bool {
        is_reduced(&self.letters)
    }

    /// Nonempty and the last letter does not cancel the first.
    pub fn is_cyclically_reduced(&self) -> bool {
        is_cyclically_reduced(&self.letters)
    }

    /// Largest generator index used.
    pub fn max_generator(&self) -> usize {
        self.letters
            .iter()
            .map(|l| l.unsigned_abs() as usize)
            .max()
            .unwrap_or(0)
    }
}

pub(crate) fn is_reduced(letters: &[Letter]) -> bool {
    letters.iter().all(|l| *l != 0) && letters.windows(2).all(|w| w[0] != -w[1])
}

pub(crate) fn is_cyclically_reduced(letters: &[Letter]) -> bool {
    match (letters.first(), letters.last()) {
        (Some(f), Some(l)) => *f != -*l,
        _ => false,
    }
}

impl TryFrom<Vec<Letter>> for FreeWord {
    type Error = Error;
    fn try_from(letters: Vec<Letter>) -> Result<Self> {
        if !is_reduced(&letters) {
            return Err(Error::invalid(format!("word {letters:?} is not reduced")));
        }
        Ok(FreeWord { letters })
    }
}

impl From<FreeWord> for Vec<Letter> {
    fn from(w: FreeWord) -> Self {
        w.letters
    }
}

impl Ord for FreeWord {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len().cmp(&other.len()).then_with(|| {
            self.letters
                .iter()
                .map(|l| letter_rank(*l))
                .cmp(other.letters.iter().map(|l| letter_rank(*l)))
        })
    }
}

impl PartialOrd for FreeWord {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for FreeWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "e");
        }
        if self.max_generator() <= 26 {
            for l in &self.letters {
                let base = if *l > 0 { b'a' } else { b'A' };
                write!(f, "{}", (base + (l.unsigned_abs() as u8 - 1)) as char)?;
            }
            Ok(())
        } else {
            let parts: Vec<String> = self.letters.iter().map(|l| l.to_string()).collect();
            write!(f, "{}", parts.join(" "))
        }
    }
}

// Length-lex odometer over reduced words of one length, in alphabet ranks.
struct Odometer {
    alphabet: usize,
    idx: Vec<usize>,
}

impl Odometer {
    fn first(alphabet: usize, len: usize) -> Self {
        let mut o = Odometer {
            alphabet,
            idx: vec![0; len],
        };
        o.fill_from(0);
        o
    }

    fn fill_from(&mut self, pos: usize) {
        for i in pos..self.idx.len() {
            self.idx[i] = if i > 0 && self.idx[i - 1] == 1 { 1 } else { 0 };
            if i > 0 && self.idx[i] == (self.idx[i - 1] ^ 1) {
                self.idx[i] += 1;
            }
        }
    }

    /// Advances to the next reduced word; returns the first changed position.
    fn advance(&mut self) -> Option<usize> {
        let mut p = self.idx.len();
        loop {
            if p == 0 {
                return None;
            }
            p -= 1;
            let mut v = self.idx[p] + 1;
            if p > 0 && v == (self.idx[p - 1] ^ 1) {
                v += 1;
            }
            if v < self.alphabet {
                self.idx[p] = v;
                self.fill_from(p + 1);
                return Some(p);
            }
        }
    }
}

/// Iterator over all reduced words of length `<= max_len` in length-lex order.
pub struct WordIter {
    alphabet: usize,
    max_len: usize,
    state: Option<Odometer>,
    started: bool,
}

impl WordIter {
    pub fn new(rank: usize, max_len: usize) -> Self {
        WordIter {
            alphabet: 2 * rank,
            max_len,
            state: None,
            started: false,
        }
    }
}

impl Iterator for WordIter {
    type Item = FreeWord;

    fn next(&mut self) -> Option<FreeWord> {
        if !self.started {
            self.started = true;
            return Some(FreeWord::identity());
        }
        match &mut self.state {
            None => {
                if self.max_len == 0 || self.alphabet == 0 {
                    return None;
                }
                self.state = Some(Odometer::first(self.alphabet, 1));
            }
            Some(o) => {
                if o.advance().is_none() {
                    let len = o.idx.len() + 1;
                    if len > self.max_len {
                        self.state = None;
                        self.max_len = 0;
                        return None;
                    }
                    *o = Odometer::first(self.alphabet, len);
                }
            }
        }
        let o = self.state.as_ref().expect("state set above");
        Some(FreeWord {
            letters: o.idx.iter().map(|r| letter_from_rank(*r)).collect(),
        })
    }
}

/// Visits every reduced word of length `<= max_len` in length-lex order
/// together with a prefix-accumulated value (e.g. the product of generator
/// matrices), recomputing only the changed suffix between consecutive words.
pub fn scan_words<T: Clone>(
    rank: usize,
    max_len: usize,
    root: T,
    mut extend: impl FnMut(&T, Letter) -> T,
    mut visit: impl FnMut(&[Letter], &T),
) {
    visit(&[], &root);
    let alphabet = 2 * rank;
    if alphabet == 0 {
        return;
    }
    for len in 1..=max_len {
        let mut odo = Odometer::first(alphabet, len);
        let mut letters: Vec<Letter> = odo.idx.iter().map(|r| letter_from_rank(*r)).collect();
        let mut prefix: Vec<T> = Vec::with_capacity(len + 1);
        prefix.push(root.clone());
        for &l in &letters {
            let next = extend(prefix.last().expect("root"), l);
            prefix.push(next);
        }
        loop {
            visit(&letters, &prefix[len]);
            let Some(p) = odo.advance() else { break };
            prefix.truncate(p + 1);
            for i in p..len {
                letters[i] = letter_from_rank(odo.idx[i]);
                let next = extend(&prefix[i], letters[i]);
                prefix.push(next);
            }
        }
    }
}

/// Number of reduced words of length `<= max_len` in rank `r`.
pub fn word_count(rank: usize, max_len: usize) -> usize {
    let mut total = 1;
    let mut layer = 2 * rank;
    for _ in 1..=max_len {
        total += layer;
        layer *= (2 * rank).saturating_sub(1);
    }
    total
}
