//! Acceptance gate: one test (and thus one pass/fail line) per
//! criterion. Runtime budgets are asserted where the criterion sets
//! one.

use std::time::Instant;

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cgt_core::bassserre::{lemma215_bound, lemma_nv, thm31_constant};
use cgt_core::bns::{kernel_fg, Character, KernelVerdict};
use cgt_core::onerelator::{magnus_step, OneRelatorPresentation};
use cgt_core::smallcancel::{CprimeVerdict, Rational, SymmetrizedSet};
use cgt_core::stallings::SubgroupGraph;
use cgt_core::{Alphabet, Letter, Word};

use cgt_cli::report::Verdict;
use cgt_cli::repro;

fn ab() -> Alphabet {
    Alphabet::new(["a", "b"]).unwrap()
}

fn assert_all_pass(rep: &cgt_cli::report::ReproReport) {
    for c in &rep.checks {
        assert_eq!(
            c.verdict,
            Verdict::Pass,
            "{}.{}: expected {}, observed {}",
            rep.case,
            c.name,
            c.expected,
            c.observed
        );
    }
}

#[test]
fn criterion_1_small_cancellation_certificate() {
    let start = Instant::now();
    let alphabet = ab();
    let relator = Word::parse(&alphabet, repro::EX37_RELATOR).unwrap();
    assert_eq!(relator.len(), 26);
    let set = SymmetrizedSet::new(alphabet, &[relator]).unwrap();
    let report = set.pieces();
    assert!(report.max_piece_length <= 4, "pieces too long: {}", report.max_piece_length);
    assert_eq!(set.cprime(Rational::new(1, 6)).unwrap(), CprimeVerdict::Holds);
    assert!(start.elapsed().as_secs() < 1, "criterion 1 over budget");
}

#[test]
fn criterion_2_hierarchy_matches_derived_presentations() {
    let start = Instant::now();
    let rep = repro::repro_ex_3_7();
    for name in ["2_g1_matches", "3a_g2_matches", "3b_free_rank"] {
        let c = rep.checks.iter().find(|c| c.name == name).unwrap();
        assert_eq!(c.verdict, Verdict::Pass, "{name}: {} vs {}", c.expected, c.observed);
    }
    assert!(start.elapsed().as_secs() < 1, "criterion 2 over budget");
}

#[test]
fn criterion_3_kernel_finite_generation_verdicts() {
    let start = Instant::now();
    let p = OneRelatorPresentation::parse(&["a", "b"], repro::EX37_RELATOR).unwrap();
    let verdict = |wa, wb| {
        kernel_fg(&Character::new(p.alphabet().clone(), vec![wa, wb]).unwrap(), &p).unwrap()
    };
    assert_eq!(verdict(1, 0), KernelVerdict::NotFinitelyGenerated);
    assert_eq!(verdict(1, -1), KernelVerdict::FinitelyGenerated);
    // ascending HNN extension with non-surjective image
    let bs12 = OneRelatorPresentation::parse(&["t", "b"], "t b t^-1 b^-2").unwrap();
    let chi = Character::new(bs12.alphabet().clone(), vec![1, 0]).unwrap();
    assert_eq!(
        kernel_fg(&chi, &bs12).unwrap(),
        KernelVerdict::NotFinitelyGenerated
    );
    assert!(start.elapsed().as_secs() < 1, "criterion 3 over budget");
}

#[test]
fn criterion_4_paper_scale_word_family() {
    let start = Instant::now();
    let rep = repro::repro_ex_2_9(cgt_core::stallings::DEFAULT_CAP);
    assert_all_pass(&rep);
    assert!(start.elapsed().as_secs() < 30, "criterion 4 over budget");
}

#[test]
fn criterion_5_acylindricity_fixtures() {
    let start = Instant::now();
    let rep = repro::repro_prop_4_1(0, cgt_core::stallings::DEFAULT_CAP);
    assert_all_pass(&rep);
    let witness = rep
        .checks
        .iter()
        .find(|c| c.name == "3_central_witness")
        .expect("explicit witness path recorded");
    assert!(witness.observed.contains("stabilizer rank"));
    assert!(start.elapsed().as_secs() < 120, "criterion 5 over budget");
}

#[test]
fn criterion_6_constant_calculators() {
    // independent reference: schoolbook repeated multiplication
    fn pow(base: u64, exp: u64) -> BigUint {
        let mut out = BigUint::from(1u32);
        for _ in 0..exp {
            out *= BigUint::from(base);
        }
        out
    }
    let lemma215_table: [(u64, u64); 10] = [
        (2, 3),
        (2, 2),
        (1, 1),
        (1, 7),
        (3, 2),
        (3, 5),
        (4, 3),
        (5, 4),
        (10, 10),
        (7, 13),
    ];
    for (n, k) in lemma215_table {
        assert_eq!(lemma215_bound(n, k), pow(n, k), "n^k mismatch at ({n}, {k})");
    }
    assert_eq!(lemma215_bound(2, 3), BigUint::from(8u32));
    let thm31_table: [(u64, u64); 10] = [
        (2, 2),
        (1, 1),
        (1, 5),
        (2, 1),
        (3, 2),
        (3, 3),
        (4, 2),
        (5, 3),
        (6, 6),
        (9, 4),
    ];
    for (k_vert, k) in thm31_table {
        assert_eq!(
            thm31_constant(k_vert, k),
            pow(2 * k_vert, k) * BigUint::from(k_vert),
            "(2k)^k*k mismatch at ({k_vert}, {k})"
        );
    }
    assert_eq!(thm31_constant(2, 2), BigUint::from(32u32));
    assert_eq!(lemma_nv(&[3, 1, 2]), 6);
}

fn random_reduced_word(rng: &mut ChaCha8Rng, alphabet: &Alphabet, max_len: usize) -> Word {
    let len = rng.gen_range(0..=max_len);
    let mut text = Vec::with_capacity(len);
    let mut prev: Option<Letter> = None;
    for _ in 0..len {
        loop {
            let l = Letter::new(rng.gen_range(0..alphabet.len()), rng.gen_bool(0.5));
            if prev != Some(l.inverse()) {
                let name = alphabet.name(l.gen as usize);
                text.push(if l.inv {
                    format!("{name}^-1")
                } else {
                    name.to_owned()
                });
                prev = Some(l);
                break;
            }
        }
    }
    Word::parse(alphabet, &text.join(" ")).unwrap()
}

/// Condensed re-run of the oracle-equivalence suites (the exhaustive
/// versions live with the core crate's integration tests).
#[test]
fn criterion_7_oracle_equivalence() {
    let start = Instant::now();
    let alphabet = ab();
    let mut rng = ChaCha8Rng::seed_from_u64(99);

    // folding confluence, 100 generator lists x 10 orders
    for _ in 0..100 {
        let gens: Vec<Word> = (0..rng.gen_range(1..=4))
            .map(|_| random_reduced_word(&mut rng, &alphabet, 8))
            .collect();
        let reference = SubgroupGraph::build(alphabet.clone(), &gens)
            .unwrap()
            .canonical_string();
        for _ in 0..10 {
            let mut order = ChaCha8Rng::seed_from_u64(rng.gen());
            let shuffled =
                SubgroupGraph::build_with_order(alphabet.clone(), &gens, |n| {
                    order.gen_range(0..n.max(1))
                })
                .unwrap();
            assert_eq!(shuffled.canonical_string(), reference);
        }
    }

    // membership agrees with short generator products
    for _ in 0..10 {
        let gens: Vec<Word> = (0..rng.gen_range(1..=3))
            .map(|_| random_reduced_word(&mut rng, &alphabet, 6))
            .collect();
        let graph = SubgroupGraph::build(alphabet.clone(), &gens).unwrap();
        let mut factors = gens.clone();
        factors.extend(gens.iter().map(Word::inverse));
        let mut frontier = vec![Word::identity(alphabet.clone())];
        for _ in 0..3 {
            let mut next = Vec::new();
            for p in &frontier {
                for f in &factors {
                    let q = p.concat(f);
                    assert!(graph.contains(&q), "missing member {q}");
                    next.push(q);
                }
            }
            frontier = next;
        }
    }

    // Moldavanskii rewriting round-trips on 1000 random relators
    let alphabets = [ab(), Alphabet::new(["a", "b", "c"]).unwrap()];
    let mut done = 0usize;
    while done < 1000 {
        let alphabet = &alphabets[rng.gen_range(0..alphabets.len())];
        let w = random_reduced_word(&mut rng, alphabet, 40);
        let (cyc, _) = w.cyclic_reduce();
        if cyc.is_empty() {
            continue;
        }
        let Ok(p) = OneRelatorPresentation::new(alphabet.clone(), cyc.as_word()) else {
            continue;
        };
        let pivot = alphabet.names().iter().find(|g| {
            p.relator().as_word().exponent_sum(g).unwrap() == 0 && p.power_relator().is_none()
        });
        let Some(pivot) = pivot else { continue };
        let step = magnus_step(&p, pivot).unwrap();
        let back = step
            .vertex
            .relator()
            .as_word()
            .substitute(&step.embedding_images())
            .unwrap();
        let (back_cyc, _) = back.cyclic_reduce();
        assert!(
            back_cyc.is_rotation_of(p.relator())
                || back_cyc.is_rotation_of(&p.relator().inverse())
        );
        done += 1;
    }

    // piece scan vs direct definition on random sets of total length <= 60
    for _ in 0..60 {
        let mut words = Vec::new();
        let mut budget = 60usize;
        for _ in 0..rng.gen_range(1..=3) {
            let w = random_reduced_word(&mut rng, &alphabet, budget.min(20));
            budget = budget.saturating_sub(w.len());
            words.push(w);
        }
        let Ok(set) = SymmetrizedSet::new(alphabet.clone(), &words) else {
            continue;
        };
        let fast: Vec<usize> = set
            .pieces()
            .per_relator
            .iter()
            .map(|r| r.max_piece.len())
            .collect();
        // reference: longest common prefix over all pairs of marks
        let mut marks: Vec<(usize, Vec<Letter>)> = Vec::new();
        for (ci, r) in set.relators().iter().enumerate() {
            for base in [r.clone(), r.inverse()] {
                for k in 0..base.len() {
                    marks.push((ci, base.rotation(k).letters().to_vec()));
                }
            }
        }
        let mut slow = vec![0usize; set.relators().len()];
        for i in 0..marks.len() {
            for j in (i + 1)..marks.len() {
                let (ci, wi) = &marks[i];
                let (cj, wj) = &marks[j];
                let mut l = 0usize;
                while l < wi.len() && l < wj.len() && wi[l] == wj[l] {
                    l += 1;
                }
                if l == wi.len() && l == wj.len() {
                    l -= 1;
                }
                slow[*ci] = slow[*ci].max(l);
                slow[*cj] = slow[*cj].max(l);
            }
        }
        assert_eq!(fast, slow, "piece disagreement on {words:?}");
    }

    assert!(start.elapsed().as_secs() < 300, "criterion 7 over budget");
}
