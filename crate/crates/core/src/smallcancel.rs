//! Metric small-cancellation certification: symmetrized relator sets,
//! piece enumeration, and the C'(λ) condition.
//!
//! A piece is a common prefix of two distinct marked elements of the
//! full symmetrized set (all rotations of each relator and of its
//! inverse, each rotation position counting as its own mark). A prefix
//! equal to both full words is not a piece. Piece lengths are computed
//! from a generalized suffix array over the doubled relator strings,
//! which keeps the single-relator case subquadratic.

use std::fmt;

use crate::words::{Alphabet, CyclicWord, Word, WordError};

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SmallCancelError {
    #[error("relator is trivial after cyclic reduction")]
    TrivialRelator,
    #[error("relator set is empty")]
    EmptySet,
    #[error("relator over a different alphabet")]
    AlphabetMismatch,
    #[error("lambda must be positive")]
    NonPositiveLambda,
    #[error(transparent)]
    Word(#[from] WordError),
}

/// A nonnegative rational with exact comparisons.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Rational {
    num: u64,
    den: u64,
}

impl Rational {
    pub fn new(num: u64, den: u64) -> Rational {
        assert!(den != 0, "zero denominator");
        if num == 0 {
            return Rational { num: 0, den: 1 };
        }
        let g = gcd(num, den);
        Rational {
            num: num / g,
            den: den / g,
        }
    }

    pub fn num(&self) -> u64 {
        self.num
    }

    pub fn den(&self) -> u64 {
        self.den
    }

    /// Parse `P/Q` or a bare integer.
    pub fn parse(text: &str) -> Option<Rational> {
        match text.split_once('/') {
            Some((p, q)) => {
                let num = p.trim().parse().ok()?;
                let den: u64 = q.trim().parse().ok()?;
                if den == 0 {
                    return None;
                }
                Some(Rational::new(num, den))
            }
            None => Some(Rational::new(text.trim().parse().ok()?, 1)),
        }
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Rational) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Rational) -> std::cmp::Ordering {
        (self.num as u128 * other.den as u128).cmp(&(other.num as u128 * self.den as u128))
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// Relator set closed under rotation and inversion, stored as one
/// canonical representative per rotation-and-inversion class.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SymmetrizedSet {
    alphabet: Alphabet,
    relators: Vec<CyclicWord>,
}

impl SymmetrizedSet {
    pub fn new(alphabet: Alphabet, relators: &[Word]) -> Result<SymmetrizedSet, SmallCancelError> {
        if relators.is_empty() {
            return Err(SmallCancelError::EmptySet);
        }
        let mut reps: Vec<CyclicWord> = Vec::new();
        for r in relators {
            if r.alphabet() != &alphabet {
                return Err(SmallCancelError::AlphabetMismatch);
            }
            let c = CyclicWord::from_word(r);
            if c.is_empty() {
                return Err(SmallCancelError::TrivialRelator);
            }
            let inv = c.inverse();
            // class representative: the smaller of the canonical rotation
            // of the word and of its inverse
            let rep = if inv.letters() < c.letters() { inv } else { c };
            if !reps.contains(&rep) {
                reps.push(rep);
            }
        }
        reps.sort_by(|a, b| a.letters().cmp(b.letters()).then(a.len().cmp(&b.len())));
        Ok(SymmetrizedSet {
            alphabet,
            relators: reps,
        })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    /// Canonical stored representatives.
    pub fn relators(&self) -> &[CyclicWord] {
        &self.relators
    }

    /// All distinct words of the full symmetrized set, expanded.
    pub fn expand(&self) -> Vec<Word> {
        let mut out: Vec<Word> = Vec::new();
        for r in &self.relators {
            for base in [r.clone(), r.inverse()] {
                for k in 0..base.len() {
                    let w = base.rotation(k);
                    if !out.contains(&w) {
                        out.push(w);
                    }
                }
            }
        }
        out
    }

    /// Longest piece per stored relator, plus summary statistics.
    pub fn pieces(&self) -> PieceReport {
        let scan = PieceScan::new(self);
        let mut per_relator = Vec::with_capacity(self.relators.len());
        for (i, r) in self.relators.iter().enumerate() {
            let (len, piece) = scan.max_piece(i);
            debug_assert_eq!(piece.len(), len);
            per_relator.push(RelatorPieces {
                relator: r.clone(),
                max_piece: piece,
            });
        }
        let max_piece_length = per_relator.iter().map(|r| r.max_piece.len()).max().unwrap();
        let shortest_relator_length = self.relators.iter().map(|r| r.len()).min().unwrap();
        let lambda_bound = per_relator
            .iter()
            .map(|r| Rational::new(r.max_piece.len() as u64, r.relator.len() as u64))
            .max()
            .unwrap();
        PieceReport {
            max_piece_length,
            shortest_relator_length,
            lambda_bound,
            per_relator,
        }
    }

    /// C'(λ): every piece p inside a relator r has |p| < λ·|r|.
    pub fn cprime(&self, lambda: Rational) -> Result<CprimeVerdict, SmallCancelError> {
        if lambda.num == 0 {
            return Err(SmallCancelError::NonPositiveLambda);
        }
        let report = self.pieces();
        for entry in &report.per_relator {
            let lhs = entry.max_piece.len() as u128 * lambda.den as u128;
            let rhs = lambda.num as u128 * entry.relator.len() as u128;
            if lhs >= rhs {
                return Ok(CprimeVerdict::Fails {
                    piece: entry.max_piece.clone(),
                    relator: entry.relator.clone(),
                });
            }
        }
        Ok(CprimeVerdict::Holds)
    }
}

/// Longest-piece data for one stored relator.
#[derive(Clone, Debug)]
pub struct RelatorPieces {
    pub relator: CyclicWord,
    /// longest piece occurring in this relator (empty word if none)
    pub max_piece: Word,
}

#[derive(Clone, Debug)]
pub struct PieceReport {
    pub max_piece_length: usize,
    pub shortest_relator_length: usize,
    /// max over relators of |max piece| / |relator|; the presentation is
    /// C'(λ) exactly for λ strictly above this bound
    pub lambda_bound: Rational,
    pub per_relator: Vec<RelatorPieces>,
}

impl PieceReport {
    /// Sorted `key = value` lines, machine readable.
    pub fn to_lines(&self) -> Vec<String> {
        let mut lines = vec![
            format!("lambda_bound = {}", self.lambda_bound),
            format!("max_piece_length = {}", self.max_piece_length),
            format!("shortest_relator_length = {}", self.shortest_relator_length),
        ];
        for (i, r) in self.per_relator.iter().enumerate() {
            lines.push(format!(
                "relator_{i}_max_piece_length = {}",
                r.max_piece.len()
            ));
            lines.push(format!("relator_{i}_length = {}", r.relator.len()));
        }
        lines.sort();
        lines
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CprimeVerdict {
    Holds,
    Fails { piece: Word, relator: CyclicWord },
}

/// Suffix-array machinery over the concatenated doubled relators.
///
/// Every rotation of every relator and relator inverse is a "mark": the
/// text position where that rotation starts inside the doubled string.
/// The longest piece readable at a mark m is the longest common prefix
/// of m's suffix with the suffix of any other mark m', capped by how
/// much of each rotation may be consumed. For a fixed capacity C(m')
/// per mark, `max over m' of min(LCP(m, m'), C(m'))` satisfies, in
/// suffix-array order, the recurrence
/// `G_k = min(lcp(k-1, k), max(G_{k-1}, C_{k-1}))`,
/// so one sweep in each direction suffices.
struct PieceScan<'a> {
    set: &'a SymmetrizedSet,
    text: Vec<u32>,
    /// (relator index, relator length) at mark positions, else None
    mark: Vec<Option<(usize, usize)>>,
    /// best min(LCP, |other|) per text position
    best_full: Vec<usize>,
    /// best min(LCP, |other| - 1) per text position
    best_prop: Vec<usize>,
}

impl<'a> PieceScan<'a> {
    fn new(set: &'a SymmetrizedSet) -> PieceScan<'a> {
        let nstr = set.relators.len() as u32 * 2;
        let letter_base = nstr + 1;
        let mut text: Vec<u32> = Vec::new();
        let mut mark: Vec<Option<(usize, usize)>> = Vec::new();
        let mut sep = 0u32;
        for (ri, r) in set.relators.iter().enumerate() {
            for base in [r.clone(), r.inverse()] {
                let n = base.len();
                for copy in 0..2 {
                    for l in base.letters() {
                        text.push(letter_base + l.gen * 2 + l.inv as u32);
                        mark.push((copy == 0).then_some((ri, n)));
                    }
                }
                text.push(sep);
                mark.push(None);
                sep += 1;
            }
        }
        let sa = suffix_array(&text);
        let lcp = kasai(&text, &sa);
        let n = text.len();
        let mut best_full = vec![0usize; n];
        let mut best_prop = vec![0usize; n];
        for backward in [false, true] {
            let mut run_full = 0usize;
            let mut run_prop = 0usize;
            // capacities of the suffix seen in the previous step
            let mut cap_full = 0usize;
            let mut cap_prop = 0usize;
            for step in 0..n {
                let k = if backward { n - 1 - step } else { step };
                let adj = if step == 0 {
                    0
                } else if backward {
                    lcp[k] as usize
                } else {
                    lcp[k - 1] as usize
                };
                run_full = adj.min(run_full.max(cap_full));
                run_prop = adj.min(run_prop.max(cap_prop));
                let pos = sa[k] as usize;
                best_full[pos] = best_full[pos].max(run_full);
                best_prop[pos] = best_prop[pos].max(run_prop);
                (cap_full, cap_prop) = match mark[pos] {
                    Some((_, len)) => (len, len - 1),
                    None => (0, 0),
                };
            }
        }
        PieceScan {
            set,
            text,
            mark,
            best_full,
            best_prop,
        }
    }

    /// (length, word) of the longest piece occurring in stored relator
    /// `target`, over all marks of the relator and its inverse.
    fn max_piece(&self, target: usize) -> (usize, Word) {
        let mut best = (0usize, 0usize); // (length, text position)
        for pos in 0..self.text.len() {
            let (ri, len) = match self.mark[pos] {
                Some(m) => m,
                None => continue,
            };
            if ri != target {
                continue;
            }
            // proper in this relator, any capacity on the other side
            let p1 = self.best_full[pos].min(len - 1);
            // the whole relator as a piece needs a strictly longer mate
            let p2 = if self.best_prop[pos] >= len { len } else { 0 };
            let cand = p1.max(p2);
            if cand > best.0 {
                best = (cand, pos);
            }
        }
        let (len, pos) = best;
        let letter_base = self.set.relators.len() as u32 * 2 + 1;
        let letters: Vec<crate::words::Letter> = self.text[pos..pos + len]
            .iter()
            .map(|&c| {
                let v = c - letter_base;
                crate::words::Letter::new((v / 2) as usize, v % 2 == 1)
            })
            .collect();
        (len, Word::from_reduced(self.set.alphabet.clone(), letters))
    }
}

/// O(n log n) suffix array by prefix doubling over u32 symbols.
fn suffix_array(text: &[u32]) -> Vec<u32> {
    let n = text.len();
    if n == 0 {
        return Vec::new();
    }
    let mut sa: Vec<u32> = (0..n as u32).collect();
    let mut rank: Vec<u32> = {
        let mut sorted: Vec<u32> = text.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        text.iter()
            .map(|v| sorted.binary_search(v).unwrap() as u32)
            .collect()
    };
    let mut tmp = vec![0u32; n];
    let mut k = 1usize;
    while k < n {
        let key = |i: u32| -> (u32, u32) {
            let second = if (i as usize) + k < n {
                rank[i as usize + k] + 1
            } else {
                0
            };
            (rank[i as usize], second)
        };
        sa.sort_unstable_by_key(|&i| key(i));
        tmp[sa[0] as usize] = 0;
        for j in 1..n {
            tmp[sa[j] as usize] = tmp[sa[j - 1] as usize]
                + (key(sa[j]) != key(sa[j - 1])) as u32;
        }
        rank.copy_from_slice(&tmp);
        if rank[sa[n - 1] as usize] as usize == n - 1 {
            break;
        }
        k *= 2;
    }
    sa
}

/// Kasai LCP array: lcp[i] = lcp(sa[i], sa[i+1]).
fn kasai(text: &[u32], sa: &[u32]) -> Vec<u32> {
    let n = text.len();
    if n == 0 {
        return Vec::new();
    }
    let mut rank = vec![0u32; n];
    for (i, &s) in sa.iter().enumerate() {
        rank[s as usize] = i as u32;
    }
    let mut lcp = vec![0u32; n.saturating_sub(1)];
    let mut h = 0usize;
    for i in 0..n {
        let r = rank[i] as usize;
        if r + 1 < n {
            let j = sa[r + 1] as usize;
            while i + h < n && j + h < n && text[i + h] == text[j + h] {
                h += 1;
            }
            lcp[r] = h as u32;
            h = h.saturating_sub(1);
        } else {
            h = 0;
        }
    }
    lcp
}
