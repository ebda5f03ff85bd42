//! Reduced words in the free product of `g+1` copies of `Z/2`.
//!
//! A word `l1 l2 ... lk` stands for the composition `s_{l1} s_{l2} ... s_{lk}`
//! (rightmost applied first). Reduced words never repeat a letter in
//! adjacent positions.

use crate::error::{Error, Result};
use crate::projline::Mobius;
use num_rational::Rational64;
use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct ReducedWord(Vec<u8>);

impl ReducedWord {
    pub fn identity() -> Self {
        ReducedWord(Vec::new())
    }

    pub fn letter(i: u8) -> Self {
        ReducedWord(vec![i])
    }

    /// Multiply out a sequence of letters, cancelling adjacent repeats.
    pub fn from_letters<I: IntoIterator<Item = u8>>(letters: I) -> Self {
        let mut out: Vec<u8> = Vec::new();
        for l in letters {
            if out.last() == Some(&l) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        ReducedWord(out)
    }

    /// Parse a digit string such as `"0121"` (`"e"` or `""` is the identity).
    pub fn parse(text: &str) -> Result<Self> {
        if text == "e" {
            return Ok(Self::identity());
        }
        let letters: Option<Vec<u8>> = text.chars().map(|c| c.to_digit(10).map(|d| d as u8)).collect();
        let letters = letters.ok_or_else(|| Error::Parse(format!("bad word {text:?}")))?;
        if letters.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Parse(format!("word {text:?} is not reduced")));
        }
        Ok(ReducedWord(letters))
    }

    pub fn letters(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Membership in the index-two subgroup of even words.
    pub fn is_even(&self) -> bool {
        self.0.len() % 2 == 0
    }

    pub fn mul(&self, other: &ReducedWord) -> ReducedWord {
        ReducedWord::from_letters(self.0.iter().chain(other.0.iter()).copied())
    }

    pub fn inverse(&self) -> ReducedWord {
        ReducedWord(self.0.iter().rev().copied().collect())
    }
}

impl Ord for ReducedWord {
    /// Length first, then lexicographic.
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for ReducedWord {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for ReducedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("e");
        }
        for &l in &self.0 {
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// Number of reduced words of length `len` on `gens` involutions.
pub fn count_words(gens: usize, len: usize) -> u64 {
    if len == 0 {
        1
    } else {
        gens as u64 * (gens as u64 - 1).pow(len as u32 - 1)
    }
}

/// All reduced words of length at most `max_len`, length-then-lex order.
pub fn enumerate_words(gens: usize, max_len: usize) -> Vec<ReducedWord> {
    let mut out = vec![ReducedWord::identity()];
    let mut frontier = vec![ReducedWord::identity()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &frontier {
            for l in 0..gens as u8 {
                if w.0.last() != Some(&l) {
                    let mut v = w.0.clone();
                    v.push(l);
                    next.push(ReducedWord(v));
                }
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// Even reduced words of length at most `max_len`.
pub fn enumerate_even_words(gens: usize, max_len: usize) -> Vec<ReducedWord> {
    enumerate_words(gens, max_len).into_iter().filter(|w| w.is_even()).collect()
}

/// The Mobius map of a word, product taken left to right.
pub fn word_to_mobius(word: &ReducedWord, gens: &[Mobius]) -> Result<Mobius> {
    let field = gens.first().ok_or_else(|| Error::Domain("no generators".into()))?.field();
    let mut m = Mobius::identity(field);
    for &l in word.letters() {
        let g = gens.get(l as usize).ok_or_else(|| Error::Domain(format!("letter {l} out of range")))?;
        m = m.compose(g).rescaled();
    }
    Ok(m)
}

/// Depth-first walk over all reduced words of length at most `max_len`
/// beginning with `first` (or all words when `None`), handing each word
/// and its matrix to `visit`.
pub fn walk_words<F>(gens: &[Mobius], max_len: usize, first: Option<u8>, visit: &mut F)
where
    F: FnMut(&[u8], &Mobius),
{
    let field = gens[0].field();
    let mut letters: Vec<u8> = Vec::with_capacity(max_len);
    let id = Mobius::identity(field);
    match first {
        None => {
            visit(&letters, &id);
            for l in 0..gens.len() as u8 {
                descend(gens, max_len, l, &id, &mut letters, visit);
            }
        }
        Some(l) => descend(gens, max_len, l, &id, &mut letters, visit),
    }
}

fn descend<F>(gens: &[Mobius], max_len: usize, l: u8, parent: &Mobius, letters: &mut Vec<u8>, visit: &mut F)
where
    F: FnMut(&[u8], &Mobius),
{
    if letters.len() >= max_len {
        return;
    }
    let m = parent.compose(&gens[l as usize]).rescaled();
    letters.push(l);
    visit(letters, &m);
    for next in 0..gens.len() as u8 {
        if next != l {
            descend(gens, max_len, next, &m, letters, visit);
        }
    }
    letters.pop();
}

/// Pairs of distinct reduced words `(u, v)` (length at most `max_len`)
/// with `u^-1 v` the identity to precision `prec`. Agreement at finite precision
/// only suggests a relation; callers treat these as candidates.
pub fn find_relations(gens: &[Mobius], max_len: usize, prec: Rational64) -> Result<Vec<(ReducedWord, ReducedWord)>> {
    let field = gens.first().ok_or_else(|| Error::Domain("no generators".into()))?.field();
    let abs = field
        .to_pi_units(prec)
        .unwrap_or_else(|| (prec * Rational64::from_integer(field.ramification())).ceil().to_integer());
    let mut buckets: HashMap<Vec<(i64, [u128; 4])>, Vec<(ReducedWord, Mobius)>> = HashMap::new();
    let mut failure = None;
    walk_words(gens, max_len, None, &mut |w, m| match m.key_mod(abs) {
        Ok(k) => buckets.entry(k).or_default().push((ReducedWord(w.to_vec()), *m)),
        Err(e) => failure = Some(e),
    });
    if let Some(e) = failure {
        return Err(e);
    }
    let mut out = Vec::new();
    for (_, mut group) in buckets {
        if group.len() < 2 {
            continue;
        }
        group.sort_by(|a, b| a.0.cmp(&b.0));
        for i in 0..group.len() {
            for j in i + 1..group.len() {
                let quotient = group[i].0.inverse().mul(&group[j].0);
                if word_to_mobius(&quotient, gens)?.is_identity_at(prec)? {
                    out.push((group[i].0.clone(), group[j].0.clone()));
                }
            }
        }
    }
    out.sort();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::{Field, FieldSpec};
    use crate::projline::ProjPoint;
    use proptest::prelude::*;

    #[test]
    fn counts_match_formula() {
        for gens in 2..5 {
            let words = enumerate_words(gens, 5);
            for len in 0..=5 {
                let n = words.iter().filter(|w| w.len() == len).count() as u64;
                assert_eq!(n, count_words(gens, len));
            }
            let mut sorted = words.clone();
            sorted.sort();
            assert_eq!(sorted, words);
        }
        assert_eq!(count_words(3, 3), 12);
    }

    #[test]
    fn display_and_parse() {
        let w = ReducedWord::parse("0121").unwrap();
        assert_eq!(w.to_string(), "0121");
        assert!(ReducedWord::parse("0112").is_err());
        assert_eq!(ReducedWord::from_letters([0, 1, 1, 2]).to_string(), "02");
        assert_eq!(w.mul(&w.inverse()), ReducedWord::identity());
    }

    #[test]
    fn bad_tuple_relation() {
        // fixed pairs (0, b0), (1, -1), (1/b0, oo) with b0 = 5
        let f = Field::new(FieldSpec::new(5, 12)).unwrap();
        let pt = |n: i128, d: i128| ProjPoint::Finite(f.from_ratio(n, d).unwrap());
        let gens = vec![
            Mobius::involution_from_pair(&pt(0, 1), &pt(5, 1)).unwrap(),
            Mobius::involution_from_pair(&pt(1, 1), &pt(-1, 1)).unwrap(),
            Mobius::involution_from_pair(&pt(1, 5), &ProjPoint::Infinity).unwrap(),
        ];
        let rels = find_relations(&gens, 3, Rational64::from_integer(8)).unwrap();
        let target = (ReducedWord::parse("0").unwrap(), ReducedWord::parse("121").unwrap());
        assert!(rels.contains(&target), "{rels:?}");
    }

    proptest! {
        #[test]
        fn group_laws(a in proptest::collection::vec(0u8..4, 0..8), b in proptest::collection::vec(0u8..4, 0..8),
                      c in proptest::collection::vec(0u8..4, 0..8)) {
            let (a, b, c) = (ReducedWord::from_letters(a), ReducedWord::from_letters(b), ReducedWord::from_letters(c));
            prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
            prop_assert_eq!(a.mul(&a.inverse()), ReducedWord::identity());
            prop_assert!(a.letters().windows(2).all(|w| w[0] != w[1]));
            prop_assert_eq!(a.mul(&b).is_even(), a.is_even() == b.is_even());
        }
    }
}
