//! Free-group word algebra over named alphabets.
//!
//! Words are stored freely reduced, one signed letter per entry. Cyclic
//! words additionally carry a canonical rotation (the lexicographically
//! least one under the alphabet order), so conjugacy of cyclically
//! reduced words is plain equality.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WordError {
    #[error("duplicate generator name `{0}`")]
    DuplicateGenerator(String),
    #[error("empty generator name")]
    EmptyGeneratorName,
    #[error("generator index {0} out of range for alphabet of size {1}")]
    InvalidIndex(usize, usize),
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("no image given for generator `{0}`")]
    MissingImage(String),
    #[error("images lie in different alphabets")]
    MixedImageAlphabets(),
    #[error("cannot parse word token `{0}`")]
    BadToken(String),
    #[error("alphabet mismatch")]
    AlphabetMismatch,
}

/// An ordered list of distinct generator names. Cheap to clone.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Alphabet(Arc<Vec<String>>);

impl Alphabet {
    pub fn new<I, S>(names: I) -> Result<Alphabet, WordError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        for (i, n) in names.iter().enumerate() {
            if n.is_empty() {
                return Err(WordError::EmptyGeneratorName);
            }
            if names[..i].contains(n) {
                return Err(WordError::DuplicateGenerator(n.clone()));
            }
        }
        Ok(Alphabet(Arc::new(names)))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn name(&self, index: usize) -> &str {
        &self.0[index]
    }

    pub fn names(&self) -> &[String] {
        &self.0
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.0.iter().position(|n| n == name)
    }
}

impl fmt::Debug for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Alphabet{:?}", self.0)
    }
}

/// A signed letter: generator index plus inversion flag.
///
/// The derived order (index first, positive before inverse) is the order
/// used for canonical rotations and breadth-first numbering everywhere.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Letter {
    pub gen: u32,
    pub inv: bool,
}

impl Letter {
    pub fn new(gen: usize, inv: bool) -> Letter {
        Letter {
            gen: gen as u32,
            inv,
        }
    }

    pub fn positive(gen: usize) -> Letter {
        Letter::new(gen, false)
    }

    pub fn inverse(self) -> Letter {
        Letter {
            gen: self.gen,
            inv: !self.inv,
        }
    }

    pub fn sign(self) -> i64 {
        if self.inv {
            -1
        } else {
            1
        }
    }
}

/// A freely reduced word over an alphabet.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Word {
    alphabet: Alphabet,
    letters: Vec<Letter>,
}

fn push_reduced(letters: &mut Vec<Letter>, l: Letter) {
    match letters.last() {
        Some(&last) if last == l.inverse() => {
            letters.pop();
        }
        _ => letters.push(l),
    }
}

impl Word {
    pub fn identity(alphabet: Alphabet) -> Word {
        Word {
            alphabet,
            letters: Vec::new(),
        }
    }

    /// Freely reduce a raw letter sequence.
    pub fn reduce(alphabet: Alphabet, raw: &[Letter]) -> Result<Word, WordError> {
        let n = alphabet.len();
        let mut letters = Vec::with_capacity(raw.len());
        for &l in raw {
            if l.gen as usize >= n {
                return Err(WordError::InvalidIndex(l.gen as usize, n));
            }
            push_reduced(&mut letters, l);
        }
        Ok(Word { alphabet, letters })
    }

    /// Letters must already be valid and freely reduced.
    pub(crate) fn from_reduced(alphabet: Alphabet, letters: Vec<Letter>) -> Word {
        debug_assert!(letters
            .windows(2)
            .all(|w| w[0] != w[1].inverse()));
        Word { alphabet, letters }
    }

    /// Single-generator word by name.
    pub fn generator(alphabet: &Alphabet, name: &str) -> Result<Word, WordError> {
        let i = alphabet
            .index_of(name)
            .ok_or_else(|| WordError::UnknownGenerator(name.to_owned()))?;
        Ok(Word::from_reduced(
            alphabet.clone(),
            vec![Letter::positive(i)],
        ))
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
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

    pub fn concat(&self, other: &Word) -> Word {
        assert_eq!(self.alphabet, other.alphabet, "alphabet mismatch");
        let mut letters = self.letters.clone();
        for &l in &other.letters {
            push_reduced(&mut letters, l);
        }
        Word {
            alphabet: self.alphabet.clone(),
            letters,
        }
    }

    pub fn inverse(&self) -> Word {
        let letters = self
            .letters
            .iter()
            .rev()
            .map(|l| l.inverse())
            .collect();
        Word {
            alphabet: self.alphabet.clone(),
            letters,
        }
    }

    pub fn pow(&self, k: i64) -> Word {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut out = Word::identity(self.alphabet.clone());
        for _ in 0..k.unsigned_abs() {
            out = out.concat(&base);
        }
        out
    }

    pub fn conjugate_by(&self, g: &Word) -> Word {
        g.concat(self).concat(&g.inverse())
    }

    /// Sum of the signs of the occurrences of `g`.
    pub fn exponent_sum(&self, g: &str) -> Result<i64, WordError> {
        let i = self
            .alphabet
            .index_of(g)
            .ok_or_else(|| WordError::UnknownGenerator(g.to_owned()))?;
        Ok(self
            .letters
            .iter()
            .filter(|l| l.gen as usize == i)
            .map(|l| l.sign())
            .sum())
    }

    /// Homomorphic image under a generator -> word map. All images must
    /// share one target alphabet, and every generator occurring in the
    /// word needs an image.
    pub fn substitute(&self, images: &HashMap<String, Word>) -> Result<Word, WordError> {
        let target = match images.values().next() {
            Some(w) => w.alphabet().clone(),
            None => {
                return if self.is_empty() {
                    Ok(Word::identity(Alphabet::new(Vec::<String>::new()).unwrap()))
                } else {
                    Err(WordError::MissingImage(
                        self.alphabet.name(self.letters[0].gen as usize).to_owned(),
                    ))
                };
            }
        };
        if images.values().any(|w| w.alphabet() != &target) {
            return Err(WordError::MixedImageAlphabets());
        }
        let mut out = Word::identity(target);
        for &l in &self.letters {
            let name = self.alphabet.name(l.gen as usize);
            let img = images
                .get(name)
                .ok_or_else(|| WordError::MissingImage(name.to_owned()))?;
            out = out.concat(&if l.inv { img.inverse() } else { img.clone() });
        }
        Ok(out)
    }

    /// Split off the maximal conjugating prefix: returns (cyclic word,
    /// conjugator c) with self = c · r · c^{-1} after free reduction.
    pub fn cyclic_reduce(&self) -> (CyclicWord, Word) {
        let mut lo = 0usize;
        let mut hi = self.letters.len();
        while hi - lo >= 2 && self.letters[lo] == self.letters[hi - 1].inverse() {
            lo += 1;
            hi -= 1;
        }
        let core: Vec<Letter> = self.letters[lo..hi].to_vec();
        let prefix: Vec<Letter> = self.letters[..lo].to_vec();
        let shift = least_rotation(&core);
        let mut rotated = Vec::with_capacity(core.len());
        rotated.extend_from_slice(&core[shift..]);
        rotated.extend_from_slice(&core[..shift]);
        let mut conj = Word::from_reduced(self.alphabet.clone(), prefix);
        let head = Word::reduce(self.alphabet.clone(), &core[..shift]).unwrap();
        conj = conj.concat(&head);
        (
            CyclicWord {
                word: Word::from_reduced(self.alphabet.clone(), rotated),
            },
            conj,
        )
    }

    /// Parse the `name` / `name^k` token syntax.
    pub fn parse(alphabet: &Alphabet, text: &str) -> Result<Word, WordError> {
        let mut raw = Vec::new();
        for tok in text.split_whitespace() {
            if tok == "1" {
                continue;
            }
            let (name, exp) = match tok.split_once('^') {
                Some((n, e)) => {
                    let k: i64 = e.parse().map_err(|_| WordError::BadToken(tok.to_owned()))?;
                    if k == 0 {
                        return Err(WordError::BadToken(tok.to_owned()));
                    }
                    (n, k)
                }
                None => (tok, 1),
            };
            let idx = alphabet
                .index_of(name)
                .ok_or_else(|| WordError::UnknownGenerator(name.to_owned()))?;
            let l = Letter::new(idx, exp < 0);
            for _ in 0..exp.unsigned_abs() {
                raw.push(l);
            }
        }
        Word::reduce(alphabet.clone(), &raw)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "1");
        }
        let mut first = true;
        let mut i = 0;
        while i < self.letters.len() {
            let l = self.letters[i];
            let mut j = i + 1;
            while j < self.letters.len() && self.letters[j] == l {
                j += 1;
            }
            let count = (j - i) as i64 * l.sign();
            if !first {
                write!(f, " ")?;
            }
            first = false;
            let name = self.alphabet.name(l.gen as usize);
            if count == 1 {
                write!(f, "{name}")?;
            } else {
                write!(f, "{name}^{count}")?;
            }
            i = j;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({self})")
    }
}

/// Booth's least-rotation algorithm over the derived letter order.
fn least_rotation(letters: &[Letter]) -> usize {
    let n = letters.len();
    if n <= 1 {
        return 0;
    }
    let at = |i: usize| letters[i % n];
    let mut f = vec![usize::MAX; 2 * n];
    let mut k = 0usize;
    for j in 1..2 * n {
        let sj = at(j);
        let mut i = f[j - k - 1];
        while i != usize::MAX && sj != at(k + i + 1) {
            if sj < at(k + i + 1) {
                k = j - i - 1;
            }
            i = f[i];
        }
        if i == usize::MAX && sj != at(k) {
            if sj < at(k) {
                k = j;
            }
            f[j - k] = usize::MAX;
        } else {
            f[j - k] = if i == usize::MAX { 0 } else { i + 1 };
        }
    }
    k
}

/// A cyclically reduced word stored in its canonical rotation.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CyclicWord {
    word: Word,
}

impl CyclicWord {
    /// Cyclically reduce and canonically rotate, discarding the conjugator.
    pub fn from_word(w: &Word) -> CyclicWord {
        w.cyclic_reduce().0
    }

    pub fn as_word(&self) -> &Word {
        &self.word
    }

    pub fn alphabet(&self) -> &Alphabet {
        self.word.alphabet()
    }

    pub fn letters(&self) -> &[Letter] {
        self.word.letters()
    }

    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }

    /// Rotation by `k` as a plain (cyclically reduced) word.
    pub fn rotation(&self, k: usize) -> Word {
        let n = self.len();
        if n == 0 {
            return self.word.clone();
        }
        let k = k % n;
        let mut letters = Vec::with_capacity(n);
        letters.extend_from_slice(&self.word.letters()[k..]);
        letters.extend_from_slice(&self.word.letters()[..k]);
        Word::from_reduced(self.word.alphabet().clone(), letters)
    }

    pub fn inverse(&self) -> CyclicWord {
        CyclicWord::from_word(&self.word.inverse())
    }

    /// True iff `other` reads the same cyclic word (possibly rotated).
    pub fn is_rotation_of(&self, other: &CyclicWord) -> bool {
        self == other
    }
}

impl fmt::Display for CyclicWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.word.fmt(f)
    }
}

impl fmt::Debug for CyclicWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CyclicWord({})", self.word)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ab() -> Alphabet {
        Alphabet::new(["a", "b"]).unwrap()
    }

    fn w(s: &str) -> Word {
        Word::parse(&ab(), s).unwrap()
    }

    #[test]
    fn reduce_cancels() {
        assert_eq!(w("a a^-1 b"), w("b"));
        assert_eq!(w(""), Word::identity(ab()));
        assert_eq!(w("a b b^-1 a^-1"), Word::identity(ab()));
    }

    #[test]
    fn reduce_rejects_bad_index() {
        let err = Word::reduce(ab(), &[Letter::positive(5)]).unwrap_err();
        assert_eq!(err, WordError::InvalidIndex(5, 2));
    }

    #[test]
    fn cyclic_reduce_strips_conjugator() {
        let (c, g) = w("a b a^-1").cyclic_reduce();
        assert_eq!(c.as_word(), &w("b"));
        assert_eq!(g, w("a"));
    }

    #[test]
    fn cyclic_reduce_already_reduced() {
        let (c, g) = w("b a").cyclic_reduce();
        // canonical rotation starts with the least letter
        assert_eq!(c.as_word(), &w("a b"));
        assert!(g.concat(c.as_word()).concat(&g.inverse()) == w("b a"));
    }

    #[test]
    fn cyclic_reduce_round_trip() {
        let input = w("a b a b^-1 a^-1 a^-1");
        let (c, g) = input.cyclic_reduce();
        assert_eq!(g.concat(c.as_word()).concat(&g.inverse()), input);
        assert_eq!(c.len(), 4);
    }

    #[test]
    fn exponent_sums() {
        assert_eq!(w("a^3").exponent_sum("a").unwrap(), 3);
        assert_eq!(w("a b a^-1").exponent_sum("a").unwrap(), 0);
        assert!(w("a").exponent_sum("z").is_err());
    }

    #[test]
    fn paper_relator_exponent_sums_vanish() {
        let r = w("a^2 b a^-1 b^2 a^-2 b a^3 b^-2 a^-1 b a^-2 b^-2 a b a^-1 b^-1 a b^-1");
        assert_eq!(r.len(), 26);
        assert_eq!(r.exponent_sum("a").unwrap(), 0);
        assert_eq!(r.exponent_sum("b").unwrap(), 0);
    }

    #[test]
    fn substitute_basic() {
        let x = Alphabet::new(["x"]).unwrap();
        let images: HashMap<String, Word> = [
            ("a".to_owned(), Word::parse(&x, "x").unwrap()),
            ("b".to_owned(), Word::parse(&x, "x^-1").unwrap()),
        ]
        .into();
        assert!(w("a b").substitute(&images).unwrap().is_empty());
        let id: HashMap<String, Word> = [
            ("a".to_owned(), w("a")),
            ("b".to_owned(), w("b")),
        ]
        .into();
        assert_eq!(w("a").substitute(&id).unwrap(), w("a"));
    }

    #[test]
    fn substitute_missing_image() {
        let images: HashMap<String, Word> = [("a".to_owned(), w("a"))].into();
        assert_eq!(
            w("b").substitute(&images).unwrap_err(),
            WordError::MissingImage("b".to_owned())
        );
    }

    #[test]
    fn display_round_trip() {
        for s in ["a^2 b a^-1", "1", "b^-3", "a b a b"] {
            let v = w(s);
            assert_eq!(Word::parse(&ab(), &v.to_string()).unwrap(), v);
        }
    }

    #[test]
    fn canonical_rotation_is_least() {
        let c = CyclicWord::from_word(&w("b a b^-1 a"));
        // rotations: b a b^-1 a / a b^-1 a b / b^-1 a b a / a b a b^-1
        // least under (index, sign): "a b a b^-1" vs "a b^-1 a b":
        // position 1 compares b (positive) with b^-1, positive sorts first.
        assert_eq!(c.as_word(), &w("a b a b^-1"));
    }
}
