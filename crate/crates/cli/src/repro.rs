//! The three reproduction pipelines behind `cgt repro`, plus the
//! recurrence-driven word family they share.

use num_bigint::BigUint;

use cgt_core::bassserre::{
    acyl_sample, lemma215_bound, parse_gog, AcylVerdict, GraphOfFreeGroups, TreePath,
};
use cgt_core::bns::{kernel_fg, Character, KernelVerdict};
use cgt_core::onerelator::{magnus_step, presentations_match, OneRelatorPresentation};
use cgt_core::smallcancel::{CprimeVerdict, Rational, SymmetrizedSet};
use cgt_core::stallings::{
    cyclic_malnormal_fastpath, HeightVerdict, Malnormality, SubgroupGraph,
};
use cgt_core::{Alphabet, CyclicWord, Word};

use crate::report::ReproReport;

/// The 26-letter one-relator example: a²ba⁻¹b²a⁻²ba³b⁻²a⁻¹ba⁻²b⁻²aba⁻¹b⁻¹ab⁻¹.
pub const EX37_RELATOR: &str =
    "a^2 b a^-1 b^2 a^-2 b a^3 b^-2 a^-1 b a^-2 b^-2 a b a^-1 b^-1 a b^-1";

/// Default cap on materialized word letters.
pub const DEFAULT_LETTER_CAP: usize = 2_000_000;

/// The recurrence family n₁ = 1, n_{i+1} = 456 + 8n_i², with the words
/// x_i = a b^{n_i} a b^{n_i+1} ⋯ a b^{n_{i+1}−1}. Lengths are exact
/// big integers; a word is materialized only while the running total of
/// letters stays within the cap.
#[derive(Clone, Debug)]
pub struct PaperSequence {
    pub i_max: usize,
    pub n_values: Vec<BigUint>,
    /// exact lengths of x_1 .. x_{i_max-1}
    pub lengths: Vec<BigUint>,
    /// materialized prefix of the x_i (None once the cap is exceeded)
    pub words: Vec<Option<Word>>,
}

pub fn gen_sequence(i_max: usize, letter_cap: usize) -> PaperSequence {
    assert!(i_max >= 1);
    let mut n_values = vec![BigUint::from(1u32)];
    while n_values.len() < i_max {
        let n = n_values.last().unwrap();
        n_values.push(BigUint::from(456u32) + BigUint::from(8u32) * n * n);
    }
    let alphabet = Alphabet::new(["a", "b"]).unwrap();
    let mut lengths = Vec::new();
    let mut words = Vec::new();
    let mut budget = BigUint::from(letter_cap);
    let two = BigUint::from(2u32);
    for i in 0..i_max.saturating_sub(1) {
        let (lo, hi) = (&n_values[i], &n_values[i + 1]);
        let blocks = hi - lo;
        // blocks + sum of the exponents lo .. hi-1
        let len = &blocks + &blocks * (lo + hi - BigUint::from(1u32)) / &two;
        let word = if len <= budget {
            budget -= &len;
            let lo: u64 = lo.try_into().expect("materialized range fits u64");
            let hi: u64 = hi.clone().try_into().expect("materialized range fits u64");
            let text: Vec<String> = (lo..hi).map(|j| format!("a b^{j}")).collect();
            Some(Word::parse(&alphabet, &text.join(" ")).unwrap())
        } else {
            None
        };
        lengths.push(len);
        words.push(word);
    }
    PaperSequence {
        i_max,
        n_values,
        lengths,
        words,
    }
}

/// A small stand-in for the astronomically long second stage of the
/// recurrence family: the shortest pair of words of the same shape
/// a b^p a b^{p+1} ⋯ (consecutive exponent blocks, the second word
/// continuing where the first stops) that passes C'(1/6) and generates
/// a malnormal subgroup.
#[derive(Clone, Debug)]
pub struct SurrogatePair {
    pub w1: Word,
    pub w2: Word,
    pub start: u64,
    pub blocks: (u64, u64),
    pub candidates_tried: usize,
}

fn template_word(alphabet: &Alphabet, lo: u64, hi: u64) -> Word {
    let text: Vec<String> = (lo..hi).map(|j| format!("a b^{j}")).collect();
    Word::parse(alphabet, &text.join(" ")).unwrap()
}

pub fn surrogate_pair(cap: usize) -> Result<SurrogatePair, String> {
    let alphabet = Alphabet::new(["a", "b"]).unwrap();
    let sixth = Rational::new(1, 6);
    // all (start, blocks1, blocks2) in a fixed window, shortest first
    let mut candidates: Vec<(u64, u64, u64, u64)> = Vec::new();
    for p in 1..=6u64 {
        for k1 in 2..=24u64 {
            for k2 in 2..=24u64 {
                let total: u64 = (k1 + k2) + (p..p + k1 + k2).sum::<u64>();
                candidates.push((total, p, k1, k2));
            }
        }
    }
    candidates.sort();
    let mut tried = 0usize;
    for &(_, p, k1, k2) in &candidates {
        tried += 1;
        let w1 = template_word(&alphabet, p, p + k1);
        let w2 = template_word(&alphabet, p + k1, p + k1 + k2);
        let set = SymmetrizedSet::new(alphabet.clone(), &[w1.clone(), w2.clone()])
            .map_err(|e| e.to_string())?;
        if set.cprime(sixth).map_err(|e| e.to_string())? != CprimeVerdict::Holds {
            continue;
        }
        let h = SubgroupGraph::build(alphabet.clone(), &[w1.clone(), w2.clone()])
            .map_err(|e| e.to_string())?;
        if h.is_malnormal(cap) != Malnormality::Malnormal {
            continue;
        }
        return Ok(SurrogatePair {
            w1,
            w2,
            start: p,
            blocks: (k1, k2),
            candidates_tried: tried,
        });
    }
    Err(format!(
        "no template pair passed C'(1/6) + malnormality after {tried} candidates"
    ))
}

fn fmt_kernel(v: &KernelVerdict) -> String {
    match v {
        KernelVerdict::FinitelyGenerated => "finitely_generated".to_owned(),
        KernelVerdict::NotFinitelyGenerated => "not_finitely_generated".to_owned(),
        KernelVerdict::Inconclusive(why) => format!("inconclusive ({why})"),
    }
}

fn fmt_cprime(v: &CprimeVerdict) -> String {
    match v {
        CprimeVerdict::Holds => "holds".to_owned(),
        CprimeVerdict::Fails { piece, relator } => {
            format!("fails (piece {piece} in relator {relator})")
        }
    }
}

/// Large word family at scale: C'(1/6) and the cyclic malnormality fast
/// path for x_1, then the surrogate pair with its exact-height check.
pub fn repro_ex_2_9(cap: usize) -> ReproReport {
    let mut rep = ReproReport::new("ex-2-9");
    let seq = gen_sequence(2, DEFAULT_LETTER_CAP);
    rep.check("1a_length_x1", 107879u32, &seq.lengths[0]);
    let x1 = seq.words[0].clone().expect("x_1 fits the letter cap");
    let alphabet = x1.alphabet().clone();
    match SymmetrizedSet::new(alphabet.clone(), std::slice::from_ref(&x1))
        .and_then(|s| s.cprime(Rational::new(1, 6)))
    {
        Ok(v) => rep.check("1b_cprime_x1", "holds", fmt_cprime(&v)),
        Err(e) => rep.inconclusive("1b_cprime_x1", "holds", &e.to_string()),
    }
    rep.check(
        "2_fastpath_x1",
        true,
        cyclic_malnormal_fastpath(&CyclicWord::from_word(&x1)),
    );
    match surrogate_pair(cap) {
        Ok(pair) => {
            rep.info(
                "3a_surrogate_pair",
                format!("{} ; {}", pair.w1, pair.w2),
            );
            rep.info("3b_surrogate_search", format!("{} candidates", pair.candidates_tried));
            // the pair was selected by exactly these two predicates;
            // re-report them so the record is self-contained
            rep.check("3c_surrogate_cprime", "holds", "holds");
            rep.check("3d_surrogate_malnormal", "malnormal", "malnormal");
            let h = SubgroupGraph::build(alphabet, &[pair.w1.clone(), pair.w2.clone()])
                .expect("surrogate words are over the ambient alphabet");
            let verdict = |c: HeightVerdict| match c {
                HeightVerdict::Holds => "holds".to_owned(),
                HeightVerdict::Fails { .. } => "fails".to_owned(),
                HeightVerdict::Inconclusive => "inconclusive".to_owned(),
            };
            rep.check("4a_height_leq_2", "holds", verdict(h.height_leq(2, cap).verdict));
            rep.check("4b_height_leq_1", "fails", verdict(h.height_leq(1, cap).verdict));
        }
        Err(log) => rep.inconclusive("3a_surrogate_pair", "found", &log),
    }
    rep
}

/// One-relator example: small cancellation, two Moldavanskii steps, and
/// the two Brown verdicts.
pub fn repro_ex_3_7() -> ReproReport {
    let mut rep = ReproReport::new("ex-3-7");
    let p = OneRelatorPresentation::parse(&["a", "b"], EX37_RELATOR)
        .expect("fixed presentation parses");

    match SymmetrizedSet::new(p.alphabet().clone(), &[p.relator().as_word().clone()])
        .and_then(|s| s.cprime(Rational::new(1, 6)))
    {
        Ok(v) => rep.check("1_cprime", "holds", fmt_cprime(&v)),
        Err(e) => rep.inconclusive("1_cprime", "holds", &e.to_string()),
    }

    let g1_expected = OneRelatorPresentation::parse(
        &["c", "d", "e", "f"],
        "f e^2 c f^-2 e c^-2 d c^-1 d^-1",
    )
    .unwrap();
    let g2_expected = OneRelatorPresentation::parse(
        &["g", "h", "i", "k", "l", "m"],
        "i h^2 g i^-2 h g^-2 k",
    )
    .unwrap();
    match magnus_step(&p, "a") {
        Ok(step1) => {
            rep.check(
                "2_g1_matches",
                true,
                presentations_match(&step1.vertex, &g1_expected),
            );
            // the next pivot is the unique zero-exponent-sum generator
            let pivot = step1
                .vertex
                .alphabet()
                .names()
                .iter()
                .find(|g| {
                    step1
                        .vertex
                        .relator()
                        .as_word()
                        .exponent_sum(g)
                        .is_ok_and(|s| s == 0)
                })
                .cloned();
            match pivot.and_then(|g| magnus_step(&step1.vertex, &g).ok()) {
                Some(step2) => {
                    rep.check(
                        "3a_g2_matches",
                        true,
                        presentations_match(&step2.vertex, &g2_expected),
                    );
                    match step2.vertex.free_elimination() {
                        Some((_, rank)) => rep.check("3b_free_rank", 5, rank),
                        None => rep.inconclusive("3b_free_rank", 5, "no free elimination"),
                    }
                }
                None => rep.inconclusive("3a_g2_matches", true, "second pivot not found"),
            }
        }
        Err(e) => rep.inconclusive("2_g1_matches", true, &e.to_string()),
    }

    for (name, weights, expected) in [
        ("4_kernel_a1_b0", vec![1, 0], "not_finitely_generated"),
        ("5_kernel_a1_bm1", vec![1, -1], "finitely_generated"),
    ] {
        match Character::new(p.alphabet().clone(), weights).and_then(|chi| kernel_fg(&chi, &p)) {
            Ok(v) => rep.check(name, expected, fmt_kernel(&v)),
            Err(e) => rep.inconclusive(name, expected, &e.to_string()),
        }
    }
    rep
}

/// The central-edge amalgam that fails acylindricity in every length.
pub fn klein_fixture() -> GraphOfFreeGroups {
    parse_gog(
        "[vertex A] gens: a\n\
         [vertex B] gens: b\n\
         [edge e] from: A to: B / d0: a^2 / d1: b^2\n",
    )
    .unwrap()
}

/// The finite-stage amalgam F(a,b) *_H (H * ⟨c⟩) over the surrogate
/// malnormal pair.
pub fn amalgam_fixture(pair: &SurrogatePair) -> GraphOfFreeGroups {
    let mut gog = parse_gog(
        "[vertex V] gens: a b\n\
         [vertex W] gens: x y c\n",
    )
    .unwrap();
    let w_alpha = gog.vertices[1].alphabet.clone();
    gog.add_edge(
        "e",
        0,
        1,
        vec![pair.w1.clone(), pair.w2.clone()],
        vec![
            Word::parse(&w_alpha, "x").unwrap(),
            Word::parse(&w_alpha, "y").unwrap(),
        ],
    )
    .unwrap();
    gog
}

pub fn render_path(gog: &GraphOfFreeGroups, path: &TreePath) -> String {
    let mut parts = vec![format!("base {}", gog.vertices[path.base].name)];
    for s in &path.steps {
        let dir = if s.forward { "fwd" } else { "back" };
        let g = if s.element.is_empty() {
            "1".to_owned()
        } else {
            s.element.to_string()
        };
        parts.push(format!("[{g}] {} {dir}", gog.edges[s.edge].name));
    }
    parts.join(" ; ")
}

/// Acylindricity fixtures: no violation on the malnormal-edge amalgam
/// at k = 3, an explicit violation on the central-edge fixture, and the
/// height-bound spot value.
pub fn repro_prop_4_1(seed: u64, cap: usize) -> ReproReport {
    let mut rep = ReproReport::new("prop-4-1");
    let pair = match surrogate_pair(cap) {
        Ok(p) => p,
        Err(log) => {
            rep.inconclusive("1_validate", "ok", &log);
            return rep;
        }
    };
    rep.info("0_edge_subgroup", format!("{} ; {}", pair.w1, pair.w2));
    let gog = amalgam_fixture(&pair);
    match gog.validate() {
        Ok(()) => rep.check("1_validate", "ok", "ok"),
        Err(e) => {
            rep.check("1_validate", "ok", e.to_string());
            return rep;
        }
    }
    match acyl_sample(&gog, 3, 1, 1000, seed, 3) {
        Ok(r) => {
            rep.check(
                "2_amalgam_k3",
                "no_violation_found",
                r.verdict.to_string(),
            );
            rep.info("2_amalgam_samples", r.samples);
        }
        Err(e) => rep.inconclusive("2_amalgam_k3", "no_violation_found", &e.to_string()),
    }
    let neg = klein_fixture();
    match acyl_sample(&neg, 6, 1, 50, seed, 2) {
        Ok(r) => {
            rep.check("3_central_k6", "violated", r.verdict.to_string());
            if r.verdict == AcylVerdict::Violated {
                let (path, rank) = &r.violations[0];
                rep.info(
                    "3_central_witness",
                    format!("{} (stabilizer rank {rank})", render_path(&neg, path)),
                );
            }
        }
        Err(e) => rep.inconclusive("3_central_k6", "violated", &e.to_string()),
    }
    rep.check("4_lemma215_n4_k3", 64u32, lemma215_bound(4, 3));
    rep
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sequence_matches_recurrence() {
        let seq = gen_sequence(3, DEFAULT_LETTER_CAP);
        assert_eq!(seq.n_values[1], BigUint::from(464u32));
        assert_eq!(seq.n_values[2], BigUint::from(1_722_824u32));
        assert_eq!(seq.lengths[0], BigUint::from(107_879u32));
        assert!(seq.words[0].is_some());
        // x_2 has ~10^12 letters and must be reported symbolically
        assert!(seq.words[1].is_none());
        assert!(seq.lengths[1] > BigUint::from(10u64.pow(12)));
    }

    #[test]
    fn materialized_word_matches_length() {
        let seq = gen_sequence(2, DEFAULT_LETTER_CAP);
        let x1 = seq.words[0].as_ref().unwrap();
        assert_eq!(BigUint::from(x1.len()), seq.lengths[0]);
        assert_eq!(x1.exponent_sum("a").unwrap(), 463);
    }

    #[test]
    fn ex37_relator_has_26_letters_and_zero_sums() {
        let alpha = Alphabet::new(["a", "b"]).unwrap();
        let r = Word::parse(&alpha, EX37_RELATOR).unwrap();
        assert_eq!(r.len(), 26);
        assert_eq!(r.exponent_sum("a").unwrap(), 0);
        assert_eq!(r.exponent_sum("b").unwrap(), 0);
    }
}
