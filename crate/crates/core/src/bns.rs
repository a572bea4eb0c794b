//! Discrete characters of one-relator groups and Brown's walk
//! criterion for membership in the BNS invariant Σ¹, hence for finite
//! generation of character kernels.
//!
//! Two families of characters are decided: those that are nonzero on
//! every generator (unique cyclic minimum of the prefix walk), and
//! those with a single nonzero weight (where the group is an HNN
//! extension over that generator and membership reduces to whether the
//! ascending side is the whole Moldavanskii vertex group; the
//! occurrence heights of the zero-weight letters decide the cases that
//! Tietze elimination or abelianization settles). Everything else is
//! reported inconclusive rather than guessed.

use crate::onerelator::OneRelatorPresentation;
use crate::stallings::is_proper_power;
use crate::words::{Alphabet, CyclicWord};

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BnsError {
    #[error("character has all-zero weights")]
    ZeroCharacter,
    #[error("alphabet mismatch between character and presentation")]
    AlphabetMismatch,
    #[error("weight list has length {0}, alphabet has {1} generators")]
    WeightCount(usize, usize),
    #[error("character does not vanish on the relator (weighted sum {0})")]
    RelatorNotKilled(i64),
}

/// An integer character χ: G → Z given by one weight per generator.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Character {
    alphabet: Alphabet,
    weights: Vec<i64>,
}

impl Character {
    pub fn new(alphabet: Alphabet, weights: Vec<i64>) -> Result<Character, BnsError> {
        if weights.len() != alphabet.len() {
            return Err(BnsError::WeightCount(weights.len(), alphabet.len()));
        }
        if weights.iter().all(|&w| w == 0) {
            return Err(BnsError::ZeroCharacter);
        }
        Ok(Character { alphabet, weights })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn weights(&self) -> &[i64] {
        &self.weights
    }

    pub fn weight_of(&self, name: &str) -> Option<i64> {
        self.alphabet.index_of(name).map(|i| self.weights[i])
    }

    pub fn negate(&self) -> Character {
        Character {
            alphabet: self.alphabet.clone(),
            weights: self.weights.iter().map(|w| -w).collect(),
        }
    }

    /// Divide all weights by the gcd of their absolute values.
    pub fn normalize(&self) -> Character {
        let g = self
            .weights
            .iter()
            .map(|w| w.unsigned_abs())
            .fold(0u64, gcd);
        Character {
            alphabet: self.alphabet.clone(),
            weights: self.weights.iter().map(|w| w / g as i64).collect(),
        }
    }

    pub fn is_normalized(&self) -> bool {
        self.weights
            .iter()
            .map(|w| w.unsigned_abs())
            .fold(0u64, gcd)
            == 1
    }

    /// χ applied to a letter sequence.
    fn apply(&self, letters: &[crate::words::Letter]) -> i64 {
        letters
            .iter()
            .map(|l| self.weights[l.gen as usize] * l.sign())
            .sum()
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// ok iff χ vanishes on the relator, so χ descends to the quotient.
pub fn validate(chi: &Character, p: &OneRelatorPresentation) -> Result<(), BnsError> {
    if chi.alphabet() != p.alphabet() {
        return Err(BnsError::AlphabetMismatch);
    }
    let total = chi.apply(p.relator().letters());
    if total != 0 {
        return Err(BnsError::RelatorNotKilled(total));
    }
    Ok(())
}

/// The closed prefix-sum walk of χ along the relator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BrownWalk {
    pub relator: CyclicWord,
    /// h_0 = 0, h_L = 0, one entry per prefix
    pub heights: Vec<i64>,
    pub min_value: i64,
    pub max_value: i64,
    /// cyclic positions 0..L-1 attaining the minimum
    pub min_positions: Vec<usize>,
    pub max_positions: Vec<usize>,
}

pub fn brown_walk(chi: &Character, p: &OneRelatorPresentation) -> Result<BrownWalk, BnsError> {
    validate(chi, p)?;
    let letters = p.relator().letters();
    let mut heights = Vec::with_capacity(letters.len() + 1);
    let mut h = 0i64;
    heights.push(0);
    for l in letters {
        h += chi.weights[l.gen as usize] * l.sign();
        heights.push(h);
    }
    debug_assert_eq!(*heights.last().unwrap(), 0);
    let cyclic = &heights[..letters.len()];
    let min_value = *cyclic.iter().min().unwrap();
    let max_value = *cyclic.iter().max().unwrap();
    let collect = |v: i64| -> Vec<usize> {
        cyclic
            .iter()
            .enumerate()
            .filter(|(_, &h)| h == v)
            .map(|(i, _)| i)
            .collect()
    };
    Ok(BrownWalk {
        relator: p.relator().clone(),
        min_positions: collect(min_value),
        max_positions: collect(max_value),
        heights,
        min_value,
        max_value,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SigmaVerdict {
    InSigma,
    NotInSigma,
    Inconclusive(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum KernelVerdict {
    FinitelyGenerated,
    NotFinitelyGenerated,
    Inconclusive(String),
}

/// Decide whether [χ] lies in Σ¹ of the one-relator group.
pub fn sigma_membership(
    chi: &Character,
    p: &OneRelatorPresentation,
) -> Result<SigmaVerdict, BnsError> {
    validate(chi, p)?;
    let n = p.alphabet().len();
    let letters = p.relator().letters();

    // a generator absent from the relator splits off a free factor, and
    // Σ¹ of a nontrivial free product is empty
    if n >= 2 {
        let mut occurs = vec![false; n];
        for l in letters {
            occurs[l.gen as usize] = true;
        }
        if occurs.iter().any(|o| !o) {
            return Ok(SigmaVerdict::NotInSigma);
        }
    }

    if is_proper_power(p.relator()) {
        return Ok(SigmaVerdict::Inconclusive(
            "relator is a proper power".to_owned(),
        ));
    }

    let zero_gens: Vec<usize> = (0..n).filter(|&g| chi.weights[g] == 0).collect();
    if zero_gens.is_empty() {
        // generic case: [χ] ∈ Σ¹ iff the cyclic walk attains its
        // minimum exactly once
        let walk = brown_walk(chi, p)?;
        return Ok(if walk.min_positions.len() == 1 {
            SigmaVerdict::InSigma
        } else {
            SigmaVerdict::NotInSigma
        });
    }

    let nonzero: Vec<usize> = (0..n).filter(|&g| chi.weights[g] != 0).collect();
    if nonzero.len() != 1 {
        return Ok(SigmaVerdict::Inconclusive(
            "mixed character: several nonzero weights alongside a zero weight".to_owned(),
        ));
    }
    if zero_gens.len() >= 2 {
        // the ascending side omits one generator per indexed family;
        // the abelianization of the vertex group modulo that side is a
        // quotient of Z^2 by one relation, never trivial
        return Ok(SigmaVerdict::NotInSigma);
    }

    // single zero-weight generator z over pivot a = the nonzero one:
    // G is an HNN extension with stable letter a over the Moldavanskii
    // vertex group on z_j = a^j z a^{-j}; [χ] ∈ Σ¹ iff the side of
    // increasing χ equals the vertex group, which omits the indexed
    // generator at the extreme pivot height
    let pivot = nonzero[0];
    let z = zero_gens[0];
    let mut h = 0i64;
    let mut occ: Vec<(i64, i64)> = Vec::new(); // (pivot height, sign)
    for l in letters {
        if l.gen as usize == pivot {
            h += l.sign();
        } else {
            occ.push((h, l.sign()));
        }
    }
    let heights: Vec<i64> = occ.iter().map(|&(h, _)| h).collect();
    let single_height = heights.iter().all(|&x| x == heights[0]);
    // χ ascending through positive pivot powers omits the minimum
    // height; through negative powers, the maximum
    let extreme = if chi.weights[pivot] > 0 {
        *heights.iter().min().unwrap()
    } else {
        *heights.iter().max().unwrap()
    };
    let at_extreme: Vec<i64> = occ
        .iter()
        .filter(|&&(h, _)| h == extreme)
        .map(|&(_, s)| s)
        .collect();
    let signed_sum: i64 = at_extreme.iter().sum();
    if single_height {
        // vertex relator is a power of the omitted generator alone
        return Ok(if signed_sum.abs() == 1 {
            SigmaVerdict::InSigma
        } else {
            SigmaVerdict::NotInSigma
        });
    }
    Ok(if at_extreme.len() == 1 {
        // omitted generator occurs once: Tietze elimination makes the
        // ascending side everything
        SigmaVerdict::InSigma
    } else if signed_sum.abs() != 1 {
        // abelianization obstruction
        SigmaVerdict::NotInSigma
    } else {
        SigmaVerdict::Inconclusive(format!(
            "extreme-height generator {} occurs {} times with unit exponent sum",
            p.alphabet().name(z),
            at_extreme.len()
        ))
    })
}

/// ker χ is finitely generated iff both [χ] and [−χ] lie in Σ¹.
pub fn kernel_fg(chi: &Character, p: &OneRelatorPresentation) -> Result<KernelVerdict, BnsError> {
    let plus = sigma_membership(chi, p)?;
    let minus = sigma_membership(&chi.negate(), p)?;
    Ok(match (&plus, &minus) {
        (SigmaVerdict::InSigma, SigmaVerdict::InSigma) => KernelVerdict::FinitelyGenerated,
        (SigmaVerdict::NotInSigma, _) | (_, SigmaVerdict::NotInSigma) => {
            KernelVerdict::NotFinitelyGenerated
        }
        _ => {
            let reason = match (plus, minus) {
                (SigmaVerdict::Inconclusive(r), _) | (_, SigmaVerdict::Inconclusive(r)) => r,
                _ => unreachable!(),
            };
            KernelVerdict::Inconclusive(reason)
        }
    })
}

/// Σ¹ verdict for a free group F(X) (the relator-free degenerate input).
pub fn free_sigma_membership(alphabet: &Alphabet, chi: &Character) -> Result<SigmaVerdict, BnsError> {
    if chi.alphabet() != alphabet {
        return Err(BnsError::AlphabetMismatch);
    }
    Ok(if alphabet.len() == 1 {
        SigmaVerdict::InSigma
    } else {
        SigmaVerdict::NotInSigma
    })
}

/// Kernel verdict for a free group: only Z has finitely generated
/// character kernels.
pub fn free_kernel_fg(alphabet: &Alphabet, chi: &Character) -> Result<KernelVerdict, BnsError> {
    Ok(match free_sigma_membership(alphabet, chi)? {
        SigmaVerdict::InSigma => KernelVerdict::FinitelyGenerated,
        _ => KernelVerdict::NotFinitelyGenerated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn paper_g() -> OneRelatorPresentation {
        OneRelatorPresentation::parse(
            &["a", "b"],
            "a^2 b a^-1 b^2 a^-2 b a^3 b^-2 a^-1 b a^-2 b^-2 a b a^-1 b^-1 a b^-1",
        )
        .unwrap()
    }

    fn bs12() -> OneRelatorPresentation {
        OneRelatorPresentation::parse(&["t", "b"], "t b t^-1 b^-2").unwrap()
    }

    fn chi(p: &OneRelatorPresentation, w: &[i64]) -> Character {
        Character::new(p.alphabet().clone(), w.to_vec()).unwrap()
    }

    #[test]
    fn validate_examples() {
        assert!(validate(&chi(&paper_g(), &[1, 0]), &paper_g()).is_ok());
        assert!(validate(&chi(&paper_g(), &[1, -1]), &paper_g()).is_ok());
        assert_eq!(
            validate(&chi(&bs12(), &[1, 1]), &bs12()),
            Err(BnsError::RelatorNotKilled(-1))
        );
    }

    #[test]
    fn walk_heights() {
        let p = bs12();
        let w = brown_walk(&chi(&p, &[1, 0]), &p).unwrap();
        assert_eq!(w.heights, vec![0, 1, 1, 0, 0, 0]);
        assert_eq!(w.min_value, 0);
        assert_eq!(w.max_value, 1);
        let q = OneRelatorPresentation::parse(&["a", "b"], "a^3 b a^-3 b^-1").unwrap();
        let wq = brown_walk(&chi(&q, &[1, 0]), &q).unwrap();
        assert_eq!(wq.heights, vec![0, 1, 2, 3, 3, 2, 1, 0, 0]);
    }

    #[test]
    fn walk_reflects_under_negation() {
        let p = paper_g();
        let c = chi(&p, &[1, -1]);
        let plus = brown_walk(&c, &p).unwrap();
        let minus = brown_walk(&c.negate(), &p).unwrap();
        assert_eq!(
            minus.heights,
            plus.heights.iter().map(|h| -h).collect::<Vec<_>>()
        );
        assert_eq!(minus.min_value, -plus.max_value);
        assert_eq!(minus.min_positions, plus.max_positions);
    }

    #[test]
    fn bs12_is_one_sided() {
        let p = bs12();
        let c = chi(&p, &[1, 0]);
        let plus = sigma_membership(&c, &p).unwrap();
        let minus = sigma_membership(&c.negate(), &p).unwrap();
        assert_eq!(plus, SigmaVerdict::NotInSigma);
        assert_eq!(minus, SigmaVerdict::InSigma);
        assert_eq!(
            kernel_fg(&c, &p).unwrap(),
            KernelVerdict::NotFinitelyGenerated
        );
    }

    #[test]
    fn paper_character_with_fg_kernel() {
        let p = paper_g();
        let c = chi(&p, &[1, -1]);
        assert_eq!(sigma_membership(&c, &p).unwrap(), SigmaVerdict::InSigma);
        assert_eq!(
            sigma_membership(&c.negate(), &p).unwrap(),
            SigmaVerdict::InSigma
        );
        assert_eq!(kernel_fg(&c, &p).unwrap(), KernelVerdict::FinitelyGenerated);
    }

    #[test]
    fn paper_character_without_fg_kernel() {
        let p = paper_g();
        let c = chi(&p, &[1, 0]);
        assert_eq!(sigma_membership(&c, &p).unwrap(), SigmaVerdict::NotInSigma);
        assert_eq!(
            kernel_fg(&c, &p).unwrap(),
            KernelVerdict::NotFinitelyGenerated
        );
    }

    #[test]
    fn torus_group_is_all_sigma() {
        let p = OneRelatorPresentation::parse(&["a", "b"], "a b a^-1 b^-1").unwrap();
        for w in [[1, -1], [1, 1], [1, 0], [0, 1], [2, 3]] {
            let c = chi(&p, &w);
            assert_eq!(
                kernel_fg(&c, &p).unwrap(),
                KernelVerdict::FinitelyGenerated,
                "weights {w:?}"
            );
        }
    }

    #[test]
    fn absent_generator_gives_free_factor() {
        let p = OneRelatorPresentation::parse(&["a", "b"], "a^2").unwrap();
        let c = chi(&p, &[0, 1]);
        assert_eq!(sigma_membership(&c, &p).unwrap(), SigmaVerdict::NotInSigma);
    }

    #[test]
    fn scaling_and_negation_invariance() {
        let p = paper_g();
        for w in [[1i64, -1], [1, 0]] {
            let c = chi(&p, &w);
            let scaled = chi(&p, &[w[0] * 3, w[1] * 3]);
            assert_eq!(kernel_fg(&c, &p).unwrap(), kernel_fg(&scaled, &p).unwrap());
            assert_eq!(
                kernel_fg(&c, &p).unwrap(),
                kernel_fg(&c.negate(), &p).unwrap()
            );
        }
    }

    #[test]
    fn free_group_sanity() {
        let f2 = Alphabet::new(["a", "b"]).unwrap();
        let c = Character::new(f2.clone(), vec![1, 0]).unwrap();
        assert_eq!(
            free_kernel_fg(&f2, &c).unwrap(),
            KernelVerdict::NotFinitelyGenerated
        );
        let z = Alphabet::new(["a"]).unwrap();
        let cz = Character::new(z.clone(), vec![2]).unwrap();
        assert_eq!(
            free_kernel_fg(&z, &cz).unwrap(),
            KernelVerdict::FinitelyGenerated
        );
    }

    #[test]
    fn normalization() {
        let p = paper_g();
        let c = chi(&p, &[2, -4]);
        assert!(!c.is_normalized());
        assert_eq!(c.normalize().weights(), &[1, -2]);
        assert!(c.normalize().is_normalized());
        assert!(Character::new(p.alphabet().clone(), vec![0, 0]).is_err());
    }
}
