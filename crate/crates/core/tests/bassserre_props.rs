//! Structural invariants of the Bass–Serre machinery on the standard
//! fixtures: Britton reduction of relation consequences, stabilizer
//! soundness and monotonicity, scheduling-independent sampling, and
//! calculator monotonicity.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cgt_core::bassserre::{
    acyl_sample, britton_reduce, lemma215_bound, parse_gog, path_stabilizer, thm31_constant,
    AcylVerdict, BoundInputs, GraphOfFreeGroups, PathStep, Syllable, TreePath,
};
use cgt_core::stallings::{HeightVerdict, Malnormality, SubgroupGraph, DEFAULT_CAP};
use cgt_core::{Alphabet, Letter, Word};

fn klein() -> GraphOfFreeGroups {
    parse_gog(
        "[vertex A] gens: a\n\
         [vertex B] gens: b\n\
         [edge e] from: A to: B / d0: a^2 / d1: b^2\n",
    )
    .unwrap()
}

/// F(a,b) amalgamated with F(x,c) along the malnormal cyclic subgroup
/// generated by a b (identified with x); c generates a free complement
/// so both sides are proper.
fn malnormal_edge_amalgam() -> GraphOfFreeGroups {
    parse_gog(
        "[vertex V] gens: a b\n\
         [vertex W] gens: x c\n\
         [edge e] from: V to: W / d0: a b / d1: x\n",
    )
    .unwrap()
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

/// Substitute a word over the edge alphabet through one side's images.
fn push_through(gog: &GraphOfFreeGroups, edge: usize, side: u8, x: &Word) -> Word {
    let e = &gog.edges[edge];
    let (images, vertex) = if side == 0 {
        (&e.d0, e.from)
    } else {
        (&e.d1, e.to)
    };
    let mut out = Word::identity(gog.vertices[vertex].alphabet.clone());
    for l in x.letters() {
        let img = &images[l.gen as usize];
        out = out.concat(&if l.inv { img.inverse() } else { img.clone() });
    }
    out
}

#[test]
fn britton_reduces_random_relation_consequences() {
    // consequences of the edge relation e^{-1} d0(x) e = d1(x): wrap a
    // random edge-group element and check the pinch resolves to the
    // transported element on the far side
    let gog = klein();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for trial in 0..200 {
        let x = random_reduced_word(&mut rng, &gog.edges[0].edge_alphabet, 10);
        // pinch direction alternates between the two orientations
        let forward_first = trial % 2 == 0;
        let (inner_side, outer_side) = if forward_first { (1, 0) } else { (0, 1) };
        let word = vec![
            Syllable::Edge {
                edge: 0,
                forward: forward_first,
            },
            Syllable::Vertex(push_through(&gog, 0, inner_side, &x)),
            Syllable::Edge {
                edge: 0,
                forward: !forward_first,
            },
        ];
        let reduced = britton_reduce(&gog, &word).unwrap();
        let expected = push_through(&gog, 0, outer_side, &x);
        if expected.is_empty() {
            assert!(
                reduced.is_empty()
                    || reduced == vec![Syllable::Vertex(expected.clone())],
                "trivial consequence did not vanish"
            );
        } else {
            assert_eq!(reduced, vec![Syllable::Vertex(expected)]);
        }
    }
}

#[test]
fn britton_leaves_pinch_free_words_alone() {
    let gog = klein();
    let b = &gog.vertices[1].alphabet;
    let word = vec![
        Syllable::Edge {
            edge: 0,
            forward: true,
        },
        Syllable::Vertex(Word::parse(b, "b^3").unwrap()),
        Syllable::Edge {
            edge: 0,
            forward: false,
        },
    ];
    // b^3 is not in <b^2>: no pinch available
    assert_eq!(britton_reduce(&gog, &word).unwrap().len(), 3);
}

/// Random reduced path of the given length in a graph of groups.
fn random_path(
    gog: &GraphOfFreeGroups,
    rng: &mut ChaCha8Rng,
    len: usize,
    radius: usize,
) -> Option<TreePath> {
    'attempt: for _ in 0..400 {
        let base = rng.gen_range(0..gog.vertices.len());
        let mut steps = Vec::new();
        let mut at = base;
        for _ in 0..len {
            let ends: Vec<(usize, bool)> = gog
                .edges
                .iter()
                .enumerate()
                .flat_map(|(i, e)| {
                    let mut v = Vec::new();
                    if e.from == at {
                        v.push((i, true));
                    }
                    if e.to == at {
                        v.push((i, false));
                    }
                    v
                })
                .collect();
            if ends.is_empty() {
                continue 'attempt;
            }
            let (edge, forward) = ends[rng.gen_range(0..ends.len())];
            let element = random_reduced_word(rng, &gog.vertices[at].alphabet, radius);
            steps.push(PathStep {
                element,
                edge,
                forward,
            });
            at = if forward {
                gog.edges[edge].to
            } else {
                gog.edges[edge].from
            };
        }
        let path = TreePath { base, steps };
        if path.validate(gog).is_ok() {
            return Some(path);
        }
    }
    None
}

#[test]
fn stabilizer_of_a_path_lies_in_the_stabilizer_of_every_prefix() {
    for gog in [klein(), malnormal_edge_amalgam()] {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let mut checked = 0usize;
        while checked < 25 {
            let len = rng.gen_range(2..=4);
            let Some(path) = random_path(&gog, &mut rng, len, 2) else {
                continue;
            };
            let full = path_stabilizer(&gog, &path).unwrap();
            for cut in 1..path.steps.len() {
                let prefix = TreePath {
                    base: path.base,
                    steps: path.steps[..cut].to_vec(),
                };
                let part = path_stabilizer(&gog, &prefix).unwrap();
                assert!(part.rank() >= full.rank(), "rank grew under extension");
                for w in &full.basis().words {
                    assert!(
                        part.contains(w),
                        "full-path stabilizer element escapes a prefix"
                    );
                }
            }
            checked += 1;
        }
    }
}

#[test]
fn stabilizer_lies_in_the_translated_first_edge_group() {
    // fixing the path fixes its first edge: conjugating the first
    // step's element away must land every basis word in the edge image
    let gog = klein();
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..25 {
        let len = rng.gen_range(1..=4);
        let Some(path) = random_path(&gog, &mut rng, len, 2) else {
            continue;
        };
        let stab = path_stabilizer(&gog, &path).unwrap();
        let first = &path.steps[0];
        let e = &gog.edges[first.edge];
        let (images, vertex) = if first.forward {
            (&e.d0, e.from)
        } else {
            (&e.d1, e.to)
        };
        let image = SubgroupGraph::build(gog.vertices[vertex].alphabet.clone(), images).unwrap();
        for w in &stab.basis().words {
            let back = first.element.inverse().concat(w).concat(&first.element);
            assert!(image.contains(&back), "{w} does not fix the first edge");
        }
    }
}

#[test]
fn sampling_reports_do_not_depend_on_worker_count() {
    let gog = klein();
    let reference = acyl_sample(&gog, 3, 1, 60, 9, 2).unwrap();
    let single = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| acyl_sample(&gog, 3, 1, 60, 9, 2).unwrap());
    assert_eq!(reference.violations, single.violations);
    assert_eq!(reference.rejections, single.rejections);
    assert_eq!(reference.inconclusive, single.inconclusive);
}

#[test]
fn malnormal_short_edges_give_acylindrical_samples() {
    // when every edge image is malnormal of height at most two, length
    // three is already acylindrical
    let gog = malnormal_edge_amalgam();
    gog.validate().unwrap();
    for e in &gog.edges {
        for (vertex, images) in [(e.from, &e.d0), (e.to, &e.d1)] {
            let image =
                SubgroupGraph::build(gog.vertices[vertex].alphabet.clone(), images).unwrap();
            assert_eq!(image.is_malnormal(DEFAULT_CAP), Malnormality::Malnormal);
            assert!(matches!(
                image.height_leq(2, DEFAULT_CAP).verdict,
                HeightVerdict::Holds
            ));
        }
    }
    let report = acyl_sample(&gog, 3, 1, 300, 4, 3).unwrap();
    assert_eq!(report.verdict, AcylVerdict::NoViolationFound);
    assert_eq!(report.inconclusive, 0);
}

#[test]
fn calculators_are_strictly_monotone() {
    for n in 2..8u64 {
        for k in 1..8u64 {
            assert!(lemma215_bound(n, k) < lemma215_bound(n + 1, k));
            assert!(lemma215_bound(n, k) < lemma215_bound(n, k + 1));
            assert!(thm31_constant(n, k) < thm31_constant(n + 1, k));
            assert!(thm31_constant(n, k) < thm31_constant(n, k + 1));
        }
    }
    // k_vert = 1 is the base of the second family and still grows in k
    for k in 1..8u64 {
        assert!(thm31_constant(1, k) < thm31_constant(1, k + 1));
    }
}

#[test]
fn bound_inputs_tie_the_constants_together() {
    let inputs = BoundInputs::new(vec![2, 2], 3, 2);
    assert_eq!(inputs.n_v(), 4);
    assert_eq!(inputs.height_bound(), lemma215_bound(4, 3));
    assert_eq!(inputs.k_prime(), thm31_constant(2, 3));
}
