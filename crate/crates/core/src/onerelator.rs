//! One-relator presentations and the Magnus–Moldavanskii rewriting
//! step: Magnus subgroup tests, HNN rewriting over a zero-exponent-sum
//! pivot, exponent-sum stabilization, free elimination, and a hierarchy
//! driver.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::words::{Alphabet, CyclicWord, Letter, Word, WordError};

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OneRelatorError {
    #[error("relator is trivial after cyclic reduction")]
    TrivialRelator,
    #[error("generator `{0}` is not in the alphabet")]
    UnknownGenerator(String),
    #[error("pivot `{pivot}` has exponent sum {sum}, expected 0")]
    PivotExponentSum { pivot: String, sum: i64 },
    #[error("relator is a power of the pivot; the rewriting is degenerate")]
    DegenerateRelator,
    #[error("need at least two generators")]
    TooFewGenerators,
    #[error("generator `{0}` has zero exponent sum, expected nonzero")]
    ZeroExponentSum(String),
    #[error("stabilization generators must be distinct")]
    SameGenerator,
    #[error(transparent)]
    Word(#[from] WordError),
}

/// ⟨X | w⟩ with w nonempty, cyclically reduced, canonically rotated.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct OneRelatorPresentation {
    alphabet: Alphabet,
    relator: CyclicWord,
}

impl OneRelatorPresentation {
    pub fn new(alphabet: Alphabet, relator: &Word) -> Result<OneRelatorPresentation, OneRelatorError> {
        if relator.alphabet() != &alphabet {
            return Err(OneRelatorError::Word(WordError::AlphabetMismatch));
        }
        let relator = CyclicWord::from_word(relator);
        if relator.is_empty() {
            return Err(OneRelatorError::TrivialRelator);
        }
        Ok(OneRelatorPresentation { alphabet, relator })
    }

    pub fn parse(generators: &[&str], relator: &str) -> Result<OneRelatorPresentation, OneRelatorError> {
        let alphabet = Alphabet::new(generators.iter().copied())?;
        let w = Word::parse(&alphabet, relator)?;
        OneRelatorPresentation::new(alphabet, &w)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn relator(&self) -> &CyclicWord {
        &self.relator
    }

    /// True iff the relator does not lie in the free factor ⟨Y⟩, i.e.
    /// ⟨Y⟩ is a Magnus subgroup for this presentation. A cyclically
    /// reduced word lies in ⟨Y⟩ exactly when it only uses letters of Y.
    pub fn is_magnus_subgroup(&self, y: &[&str]) -> Result<bool, OneRelatorError> {
        let mut in_y = vec![false; self.alphabet.len()];
        for name in y {
            let i = self
                .alphabet
                .index_of(name)
                .ok_or_else(|| OneRelatorError::UnknownGenerator((*name).to_owned()))?;
            in_y[i] = true;
        }
        Ok(self
            .relator
            .letters()
            .iter()
            .any(|l| !in_y[l.gen as usize]))
    }

    /// The generator eliminated by a Tietze move, if one occurs exactly
    /// once in the relator, together with the resulting free rank.
    pub fn free_elimination(&self) -> Option<(String, usize)> {
        let mut counts = vec![0usize; self.alphabet.len()];
        for l in self.relator.letters() {
            counts[l.gen as usize] += 1;
        }
        let g = counts.iter().position(|&c| c == 1)?;
        Some((self.alphabet.name(g).to_owned(), self.alphabet.len() - 1))
    }

    /// Some(generator, |exponent|) when the relator is a power of a
    /// single generator (free product of cyclic groups base case).
    pub fn power_relator(&self) -> Option<(String, usize)> {
        let first = self.relator.letters()[0];
        if self
            .relator
            .letters()
            .iter()
            .all(|l| l.gen == first.gen)
        {
            Some((
                self.alphabet.name(first.gen as usize).to_owned(),
                self.relator.len(),
            ))
        } else {
            None
        }
    }
}

impl fmt::Display for OneRelatorPresentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "< {} | {} >", self.alphabet.names().join(" "), self.relator)
    }
}

/// One application of the Moldavanskii rewriting: the HNN splitting of
/// ⟨X | w⟩ over the pivot, with vertex group a one-relator group over
/// indexed generators g_j = pivot^j g pivot^{-j}.
#[derive(Clone, Debug)]
pub struct MagnusStep {
    pub input: OneRelatorPresentation,
    pub pivot: String,
    pub vertex: OneRelatorPresentation,
    pub left_magnus: Vec<String>,
    pub right_magnus: Vec<String>,
    pub stable_letter: String,
    /// new generator name -> (old generator, pivot-height index)
    pub index_map: BTreeMap<String, (String, i64)>,
}

pub fn magnus_step(
    p: &OneRelatorPresentation,
    pivot: &str,
) -> Result<MagnusStep, OneRelatorError> {
    let alphabet = p.alphabet.clone();
    if alphabet.len() < 2 {
        return Err(OneRelatorError::TooFewGenerators);
    }
    let pi = alphabet
        .index_of(pivot)
        .ok_or_else(|| OneRelatorError::UnknownGenerator(pivot.to_owned()))?;
    let sum = p.relator.as_word().exponent_sum(pivot)?;
    if sum != 0 {
        return Err(OneRelatorError::PivotExponentSum {
            pivot: pivot.to_owned(),
            sum,
        });
    }

    // occurrences of non-pivot letters annotated with pivot height
    let mut occ: Vec<(usize, i64, bool)> = Vec::new();
    let mut h = 0i64;
    for l in p.relator.letters() {
        if l.gen as usize == pi {
            h += l.sign();
        } else {
            occ.push((l.gen as usize, h, l.inv));
        }
    }
    if occ.is_empty() {
        return Err(OneRelatorError::DegenerateRelator);
    }

    // index range per non-pivot generator; single-height (or absent)
    // families are widened upward so both Magnus subgroups are proper
    let mut range: Vec<(i64, i64)> = vec![(0, 1); alphabet.len()];
    let mut seen = vec![false; alphabet.len()];
    for &(g, h, _) in &occ {
        if !seen[g] {
            range[g] = (h, h);
            seen[g] = true;
        } else {
            range[g].0 = range[g].0.min(h);
            range[g].1 = range[g].1.max(h);
        }
    }
    for g in 0..alphabet.len() {
        if g != pi && range[g].0 == range[g].1 {
            range[g].1 += 1;
        }
    }

    let mut names: Vec<String> = Vec::new();
    let mut index_map: BTreeMap<String, (String, i64)> = BTreeMap::new();
    let mut left_magnus: Vec<String> = Vec::new();
    let mut right_magnus: Vec<String> = Vec::new();
    // vertex letter index of g_j
    let mut slot: HashMap<(usize, i64), usize> = HashMap::new();
    for g in 0..alphabet.len() {
        if g == pi {
            continue;
        }
        for j in range[g].0..=range[g].1 {
            let name = format!("{}_{}", alphabet.name(g), j);
            slot.insert((g, j), names.len());
            index_map.insert(name.clone(), (alphabet.name(g).to_owned(), j));
            if j != range[g].1 {
                left_magnus.push(name.clone());
            }
            if j != range[g].0 {
                right_magnus.push(name.clone());
            }
            names.push(name);
        }
    }
    let vertex_alphabet = Alphabet::new(names)?;
    let letters: Vec<Letter> = occ
        .iter()
        .map(|&(g, h, inv)| Letter::new(slot[&(g, h)], inv))
        .collect();
    let vertex_relator = Word::reduce(vertex_alphabet.clone(), &letters)?;
    let vertex = OneRelatorPresentation::new(vertex_alphabet, &vertex_relator)?;
    Ok(MagnusStep {
        input: p.clone(),
        pivot: pivot.to_owned(),
        vertex,
        left_magnus,
        right_magnus,
        stable_letter: pivot.to_owned(),
        index_map,
    })
}

impl MagnusStep {
    /// The defining images g_j ↦ pivot^j · g · pivot^{-j} back in the
    /// input alphabet.
    pub fn embedding_images(&self) -> HashMap<String, Word> {
        let alphabet = self.input.alphabet.clone();
        let pivot = Word::generator(&alphabet, &self.pivot).unwrap();
        self.index_map
            .iter()
            .map(|(name, (g, j))| {
                let base = Word::generator(&alphabet, g).unwrap();
                (name.clone(), base.conjugate_by(&pivot.pow(*j)))
            })
            .collect()
    }
}

/// Replacement of g1 ↦ x^β, g2 ↦ g2·x^{-α} giving a relator with zero
/// x-exponent sum, used when no generator has zero exponent sum.
#[derive(Clone, Debug)]
pub struct Stabilization {
    pub input: OneRelatorPresentation,
    pub output: OneRelatorPresentation,
    pub new_generator: String,
    /// old generator -> image in the output alphabet
    pub embedding: HashMap<String, Word>,
}

pub fn exponent_stabilize(
    p: &OneRelatorPresentation,
    g1: &str,
    g2: &str,
) -> Result<Stabilization, OneRelatorError> {
    if g1 == g2 {
        return Err(OneRelatorError::SameGenerator);
    }
    let alpha = p.relator.as_word().exponent_sum(g1)?;
    let beta = p.relator.as_word().exponent_sum(g2)?;
    if alpha == 0 {
        return Err(OneRelatorError::ZeroExponentSum(g1.to_owned()));
    }
    if beta == 0 {
        return Err(OneRelatorError::ZeroExponentSum(g2.to_owned()));
    }
    let x = fresh_name(&p.alphabet, "x");
    let names: Vec<String> = std::iter::once(x.clone())
        .chain(
            p.alphabet
                .names()
                .iter()
                .filter(|n| n.as_str() != g1)
                .cloned(),
        )
        .collect();
    let target = Alphabet::new(names)?;
    let xw = Word::generator(&target, &x)?;
    let mut embedding: HashMap<String, Word> = HashMap::new();
    for n in p.alphabet.names() {
        let img = if n == g1 {
            xw.pow(beta)
        } else if n == g2 {
            Word::generator(&target, n)?.concat(&xw.pow(-alpha))
        } else {
            Word::generator(&target, n)?
        };
        embedding.insert(n.clone(), img);
    }
    let image = p.relator.as_word().substitute(&embedding)?;
    let output = OneRelatorPresentation::new(target, &image)?;
    debug_assert_eq!(output.relator.as_word().exponent_sum(&x).unwrap(), 0);
    Ok(Stabilization {
        input: p.clone(),
        output,
        new_generator: x,
        embedding,
    })
}

fn fresh_name(alphabet: &Alphabet, stem: &str) -> String {
    if alphabet.index_of(stem).is_none() {
        return stem.to_owned();
    }
    (0..)
        .map(|i| format!("{stem}{i}"))
        .find(|n| alphabet.index_of(n).is_none())
        .unwrap()
}

/// One hierarchy layer: an optional stabilization followed by the
/// Magnus step applied to its output.
#[derive(Clone, Debug)]
pub struct HierarchyStep {
    pub stabilization: Option<Stabilization>,
    pub step: MagnusStep,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TerminalCertificate {
    /// a generator occurs once; Tietze elimination shows the group free
    Free { eliminated: String, rank: usize },
    /// relator is a power of one generator: free product of cyclics
    CyclicBase { generator: String, exponent: usize },
}

#[derive(Clone, Debug)]
pub struct Hierarchy {
    pub steps: Vec<HierarchyStep>,
    pub terminal: OneRelatorPresentation,
    pub certificate: TerminalCertificate,
}

#[derive(Clone, Debug)]
pub enum HierarchyResult {
    Complete(Hierarchy),
    /// depth cap reached before a terminal certificate
    DepthCapped {
        steps: Vec<HierarchyStep>,
        remaining: OneRelatorPresentation,
    },
}

pub const DEFAULT_MAX_DEPTH: usize = 16;

/// Drive magnus_step until free elimination or a cyclic base, choosing
/// as pivot the alphabetically first zero-exponent-sum generator and
/// stabilizing (on the two alphabetically first nonzero-sum generators)
/// when no such pivot exists.
pub fn build_hierarchy(
    p: &OneRelatorPresentation,
    max_depth: usize,
) -> Result<HierarchyResult, OneRelatorError> {
    let mut steps: Vec<HierarchyStep> = Vec::new();
    let mut current = p.clone();
    loop {
        if let Some((eliminated, rank)) = current.free_elimination() {
            return Ok(HierarchyResult::Complete(Hierarchy {
                steps,
                terminal: current,
                certificate: TerminalCertificate::Free { eliminated, rank },
            }));
        }
        if let Some((generator, exponent)) = current.power_relator() {
            return Ok(HierarchyResult::Complete(Hierarchy {
                steps,
                terminal: current,
                certificate: TerminalCertificate::CyclicBase {
                    generator,
                    exponent,
                },
            }));
        }
        if steps.len() >= max_depth {
            return Ok(HierarchyResult::DepthCapped {
                steps,
                remaining: current,
            });
        }
        let mut sorted: Vec<&String> = current.alphabet.names().iter().collect();
        sorted.sort();
        let sums: HashMap<&String, i64> = sorted
            .iter()
            .map(|n| (*n, current.relator.as_word().exponent_sum(n).unwrap()))
            .collect();
        let pivot = sorted.iter().find(|n| sums[**n] == 0);
        let (stabilization, base, pivot) = match pivot {
            Some(n) => (None, current.clone(), (*n).clone()),
            None => {
                let mut nonzero = sorted.iter().filter(|n| sums[**n] != 0);
                let g1 = (*nonzero.next().ok_or(OneRelatorError::DegenerateRelator)?).clone();
                let g2 = (*nonzero.next().ok_or(OneRelatorError::TooFewGenerators)?).clone();
                let s = exponent_stabilize(&current, &g1, &g2)?;
                let base = s.output.clone();
                let pivot = s.new_generator.clone();
                (Some(s), base, pivot)
            }
        };
        let step = magnus_step(&base, &pivot)?;
        current = step.vertex.clone();
        steps.push(HierarchyStep {
            stabilization,
            step,
        });
    }
}

/// Equivalence of presentations up to bijective generator relabeling,
/// inversion of individual generators, and rotation/inversion of the
/// relator.
pub fn presentations_match(a: &OneRelatorPresentation, b: &OneRelatorPresentation) -> bool {
    let n = a.alphabet.len();
    if n != b.alphabet.len() || a.relator.len() != b.relator.len() {
        return false;
    }
    // occurrence counts are invariant under everything we allow
    let counts = |p: &OneRelatorPresentation| -> Vec<usize> {
        let mut c = vec![0usize; p.alphabet.len()];
        for l in p.relator.letters() {
            c[l.gen as usize] += 1;
        }
        c
    };
    let ca = counts(a);
    let cb = counts(b);
    let target = canonical_class(&b.relator);
    let mut perm: Vec<usize> = vec![usize::MAX; n];
    let mut used = vec![false; n];
    search(a, &ca, &cb, &target, &mut perm, &mut used, 0)
}

fn canonical_class(r: &CyclicWord) -> CyclicWord {
    let inv = r.inverse();
    if inv.letters() < r.letters() {
        inv
    } else {
        r.clone()
    }
}

fn search(
    a: &OneRelatorPresentation,
    ca: &[usize],
    cb: &[usize],
    target: &CyclicWord,
    perm: &mut Vec<usize>,
    used: &mut Vec<bool>,
    depth: usize,
) -> bool {
    let n = perm.len();
    if depth == n {
        // try every per-generator inversion pattern
        for signs in 0..(1u32 << n) {
            let letters: Vec<Letter> = a
                .relator
                .letters()
                .iter()
                .map(|l| {
                    let g = perm[l.gen as usize];
                    let flip = signs >> l.gen & 1 == 1;
                    Letter::new(g, l.inv ^ flip)
                })
                .collect();
            let w = Word::reduce(target.alphabet().clone(), &letters).unwrap();
            if w.len() == target.len() && &canonical_class(&CyclicWord::from_word(&w)) == target {
                return true;
            }
        }
        return false;
    }
    for cand in 0..n {
        if used[cand] || ca[depth] != cb[cand] {
            continue;
        }
        perm[depth] = cand;
        used[cand] = true;
        if search(a, ca, cb, target, perm, used, depth + 1) {
            return true;
        }
        used[cand] = false;
        perm[depth] = usize::MAX;
    }
    false
}
