//! Finite graphs of finite-rank free groups: certified edge
//! monomorphisms, Britton reduction, pointwise stabilizers of edge
//! paths in the Bass–Serre tree, seeded acylindricity sampling, and the
//! explicit constant calculators.
//!
//! The tree is never materialized: a [`TreePath`] carries the vertex
//! elements connecting consecutive edges, reducedness is certified by
//! membership tests in edge images, and path stabilizers are computed
//! by transporting intersections backward along the path.

use std::fmt;

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::stallings::{StallingsError, SubgroupGraph};
use crate::words::{Alphabet, Letter, Word, WordError};

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BassSerreError {
    #[error("edge `{edge}` side d{side}: image tuple of size {expected} generates rank {actual}")]
    RankDeficient {
        edge: String,
        side: u8,
        expected: usize,
        actual: usize,
    },
    #[error("underlying graph is not connected")]
    NotConnected,
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("unknown edge `{0}`")]
    UnknownEdge(String),
    #[error("edge `{edge}`: d0 has {d0} images but d1 has {d1}")]
    SideMismatch { edge: String, d0: usize, d1: usize },
    #[error("step {0}: edge does not touch the current vertex")]
    Disconnected(usize),
    #[error("step {0}: vertex element is over the wrong alphabet")]
    WrongAlphabet(usize),
    #[error("step {0}: path backtracks (connecting element lies in the edge image)")]
    NotReduced(usize),
    #[error("path must have length >= 1")]
    EmptyPath,
    #[error("graph has no edges to sample paths from")]
    NoEdges,
    #[error("could not express an edge image tuple as a basis (Nielsen search stuck)")]
    BasisInversion,
    #[error("malformed sequence: {0}")]
    Malformed(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Stallings(#[from] StallingsError),
    #[error(transparent)]
    Word(#[from] WordError),
}

#[derive(Clone, Debug)]
pub struct VertexGroup {
    pub name: String,
    pub alphabet: Alphabet,
}

#[derive(Clone, Debug)]
pub struct EdgeGroup {
    pub name: String,
    pub from: usize,
    pub to: usize,
    /// free basis y0..y{r-1} of the abstract edge group
    pub edge_alphabet: Alphabet,
    /// images of the y_i in the `from` vertex group
    pub d0: Vec<Word>,
    /// images of the y_i in the `to` vertex group
    pub d1: Vec<Word>,
}

#[derive(Clone, Debug)]
pub struct GraphOfFreeGroups {
    pub vertices: Vec<VertexGroup>,
    pub edges: Vec<EdgeGroup>,
}

impl GraphOfFreeGroups {
    pub fn vertex_index(&self, name: &str) -> Result<usize, BassSerreError> {
        self.vertices
            .iter()
            .position(|v| v.name == name)
            .ok_or_else(|| BassSerreError::UnknownVertex(name.to_owned()))
    }

    pub fn edge_index(&self, name: &str) -> Result<usize, BassSerreError> {
        self.edges
            .iter()
            .position(|e| e.name == name)
            .ok_or_else(|| BassSerreError::UnknownEdge(name.to_owned()))
    }

    /// Build an edge from image words, inventing the abstract edge basis.
    pub fn add_edge(
        &mut self,
        name: &str,
        from: usize,
        to: usize,
        d0: Vec<Word>,
        d1: Vec<Word>,
    ) -> Result<(), BassSerreError> {
        if d0.len() != d1.len() {
            return Err(BassSerreError::SideMismatch {
                edge: name.to_owned(),
                d0: d0.len(),
                d1: d1.len(),
            });
        }
        let names: Vec<String> = (0..d0.len()).map(|i| format!("y{i}")).collect();
        self.edges.push(EdgeGroup {
            name: name.to_owned(),
            from,
            to,
            edge_alphabet: Alphabet::new(names)?,
            d0,
            d1,
        });
        Ok(())
    }

    /// Connectivity plus injectivity of both boundary monomorphisms of
    /// every edge (a size-r tuple generating rank r is a basis).
    pub fn validate(&self) -> Result<(), BassSerreError> {
        for e in &self.edges {
            if e.d0.len() != e.d1.len() {
                return Err(BassSerreError::SideMismatch {
                    edge: e.name.clone(),
                    d0: e.d0.len(),
                    d1: e.d1.len(),
                });
            }
            for (side, images, vertex) in [(0u8, &e.d0, e.from), (1u8, &e.d1, e.to)] {
                let g = SubgroupGraph::build(self.vertices[vertex].alphabet.clone(), images)?;
                if g.rank() != images.len() {
                    return Err(BassSerreError::RankDeficient {
                        edge: e.name.clone(),
                        side,
                        expected: images.len(),
                        actual: g.rank(),
                    });
                }
            }
        }
        // connectivity of the underlying graph
        let n = self.vertices.len();
        if n == 0 {
            return Err(BassSerreError::NotConnected);
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for e in &self.edges {
                for (a, b) in [(e.from, e.to), (e.to, e.from)] {
                    if a == v && !seen[b] {
                        seen[b] = true;
                        stack.push(b);
                    }
                }
            }
        }
        if seen.iter().all(|&s| s) {
            Ok(())
        } else {
            Err(BassSerreError::NotConnected)
        }
    }

    /// Canonical file form (see [`parse_gog`]).
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for v in &self.vertices {
            out.push_str(&format!(
                "[vertex {}] gens: {}\n",
                v.name,
                v.alphabet.names().join(" ")
            ));
        }
        let join = |ws: &[Word]| {
            ws.iter()
                .map(|w| w.to_string())
                .collect::<Vec<_>>()
                .join("; ")
        };
        for e in &self.edges {
            out.push_str(&format!(
                "[edge {}] from: {} to: {} / d0: {} / d1: {}\n",
                e.name,
                self.vertices[e.from].name,
                self.vertices[e.to].name,
                join(&e.d0),
                join(&e.d1)
            ));
        }
        out
    }
}

/// Parse the graph-of-groups file format:
/// `[vertex NAME] gens: a b` and
/// `[edge NAME] from: V1 to: V2 / d0: w1; w2 / d1: u1; u2`.
pub fn parse_gog(text: &str) -> Result<GraphOfFreeGroups, BassSerreError> {
    let mut gog = GraphOfFreeGroups {
        vertices: Vec::new(),
        edges: Vec::new(),
    };
    for (ln, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let fail = |msg: &str| BassSerreError::Parse {
            line: ln + 1,
            msg: msg.to_owned(),
        };
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (head, rest) = line
            .strip_prefix('[')
            .and_then(|l| l.split_once(']'))
            .ok_or_else(|| fail("expected `[vertex NAME]` or `[edge NAME]`"))?;
        let mut head_tokens = head.split_whitespace();
        let kind = head_tokens.next().ok_or_else(|| fail("empty header"))?;
        let name = head_tokens
            .next()
            .ok_or_else(|| fail("missing name in header"))?;
        match kind {
            "vertex" => {
                let gens = rest
                    .trim()
                    .strip_prefix("gens:")
                    .ok_or_else(|| fail("expected `gens:`"))?;
                let alphabet = Alphabet::new(gens.split_whitespace())?;
                gog.vertices.push(VertexGroup {
                    name: name.to_owned(),
                    alphabet,
                });
            }
            "edge" => {
                let mut parts = rest.split('/').map(str::trim);
                let ends = parts.next().ok_or_else(|| fail("missing `from:`/`to:`"))?;
                let (from_part, to_part) = ends
                    .strip_prefix("from:")
                    .and_then(|s| s.split_once("to:"))
                    .ok_or_else(|| fail("expected `from: V1 to: V2`"))?;
                let from = gog.vertex_index(from_part.trim())?;
                let to = gog.vertex_index(to_part.trim())?;
                let mut side = |label: &str, vertex: usize| -> Result<Vec<Word>, BassSerreError> {
                    let part = parts
                        .next()
                        .and_then(|p| p.strip_prefix(label))
                        .ok_or_else(|| fail(&format!("expected `{label}`")))?;
                    part.split(';')
                        .filter(|w| !w.trim().is_empty())
                        .map(|w| {
                            Word::parse(&gog.vertices[vertex].alphabet, w).map_err(Into::into)
                        })
                        .collect()
                };
                let d0 = side("d0:", from)?;
                let d1 = side("d1:", to)?;
                gog.add_edge(name, from, to, d0, d1)?;
            }
            other => return Err(fail(&format!("unknown section `{other}`"))),
        }
    }
    Ok(gog)
}

/// Express elements of one edge image in the abstract edge basis.
///
/// The folded graph gives witnesses over its own spanning-tree basis;
/// since the image tuple is itself a basis of the same subgroup, a
/// length-reducing Nielsen search inverts the change of basis.
struct SideResolver {
    edge_alphabet: Alphabet,
    graph: SubgroupGraph,
    /// folded-basis letter -> word over the edge alphabet
    inverse: Vec<Word>,
}

impl SideResolver {
    fn new(
        edge_alphabet: &Alphabet,
        vertex_alphabet: &Alphabet,
        images: &[Word],
    ) -> Result<SideResolver, BassSerreError> {
        let graph = SubgroupGraph::build(vertex_alphabet.clone(), images)?;
        let mut expressed = Vec::with_capacity(images.len());
        for w in images {
            expressed.push(
                graph
                    .membership(w)?
                    .expect("generator of a subgroup lies in it"),
            );
        }
        let inverse =
            invert_basis(edge_alphabet, &expressed).ok_or(BassSerreError::BasisInversion)?;
        Ok(SideResolver {
            edge_alphabet: edge_alphabet.clone(),
            graph,
            inverse,
        })
    }

    /// `g` as a word over the edge alphabet, or None if not in the image.
    fn express(&self, g: &Word) -> Result<Option<Word>, BassSerreError> {
        let witness = match self.graph.membership(g)? {
            Some(w) => w,
            None => return Ok(None),
        };
        let mut out = Word::identity(self.edge_alphabet.clone());
        for l in witness.letters() {
            let img = &self.inverse[l.gen as usize];
            out = out.concat(&if l.inv { img.inverse() } else { img.clone() });
        }
        Ok(Some(out))
    }

    fn contains(&self, g: &Word) -> bool {
        self.graph.contains(g)
    }
}

/// For images (words over an alphabet B) forming a basis of F(B),
/// return for each letter of B its expression over `target`.
fn invert_basis(target: &Alphabet, images: &[Word]) -> Option<Vec<Word>> {
    let b = match images.first() {
        Some(w) => w.alphabet().clone(),
        // trivial edge group
        None => return if target.len() == 0 { Some(Vec::new()) } else { None },
    };
    if images.len() != b.len() || target.len() != b.len() {
        return None;
    }
    let mut t: Vec<Word> = images.to_vec();
    let mut a: Vec<Word> = target
        .names()
        .iter()
        .map(|n| Word::generator(target, n).unwrap())
        .collect();
    loop {
        let mut improved = false;
        for i in 0..t.len() {
            for j in 0..t.len() {
                if i == j {
                    continue;
                }
                // t_i <- t_i t_j^e or t_j^e t_i, mirrored on the a side
                let options = [
                    (t[i].concat(&t[j]), a[i].concat(&a[j])),
                    (t[i].concat(&t[j].inverse()), a[i].concat(&a[j].inverse())),
                    (t[j].concat(&t[i]), a[j].concat(&a[i])),
                    (t[j].inverse().concat(&t[i]), a[j].inverse().concat(&a[i])),
                ];
                for (nt, na) in options {
                    if nt.len() < t[i].len() && !nt.is_empty() {
                        t[i] = nt;
                        a[i] = na;
                        improved = true;
                        break;
                    }
                }
            }
        }
        if !improved {
            break;
        }
    }
    let mut out: Vec<Option<Word>> = vec![None; b.len()];
    for (ti, ai) in t.iter().zip(&a) {
        if ti.len() != 1 {
            return None;
        }
        let l = ti.letters()[0];
        let slot = &mut out[l.gen as usize];
        if slot.is_some() {
            return None;
        }
        *slot = Some(if l.inv { ai.inverse() } else { ai.clone() });
    }
    out.into_iter().collect()
}

/// Per-edge resolvers for both sides, built once per computation.
struct Machine<'a> {
    gog: &'a GraphOfFreeGroups,
    sides: Vec<(SideResolver, SideResolver)>,
}

impl<'a> Machine<'a> {
    fn new(gog: &'a GraphOfFreeGroups) -> Result<Machine<'a>, BassSerreError> {
        let mut sides = Vec::with_capacity(gog.edges.len());
        for e in &gog.edges {
            let r0 = SideResolver::new(
                &e.edge_alphabet,
                &gog.vertices[e.from].alphabet,
                &e.d0,
            )?;
            let r1 = SideResolver::new(&e.edge_alphabet, &gog.vertices[e.to].alphabet, &e.d1)?;
            sides.push((r0, r1));
        }
        Ok(Machine { gog, sides })
    }

    /// substitute the edge-alphabet word through the chosen boundary map
    fn push_through(&self, edge: usize, to_side: u8, x: &Word) -> Word {
        let e = &self.gog.edges[edge];
        let (images, vertex) = if to_side == 0 {
            (&e.d0, e.from)
        } else {
            (&e.d1, e.to)
        };
        let mut out = Word::identity(self.gog.vertices[vertex].alphabet.clone());
        for l in x.letters() {
            let img = &images[l.gen as usize];
            out = out.concat(&if l.inv { img.inverse() } else { img.clone() });
        }
        out
    }
}

/// One syllable of a fundamental-group word.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Syllable {
    /// element of the vertex group the word is currently at
    Vertex(Word),
    /// edge traversal; `forward` runs from `from` to `to`
    Edge { edge: usize, forward: bool },
}

/// Britton reduction: repeatedly replace pinches e·d_far(x)·e^{-1} by
/// the transported element d_near(x), merging adjacent vertex words.
/// The output has no pinches, so it is trivial iff it is a single
/// empty vertex syllable (or empty).
pub fn britton_reduce(
    gog: &GraphOfFreeGroups,
    word: &[Syllable],
) -> Result<Vec<Syllable>, BassSerreError> {
    let machine = Machine::new(gog)?;
    // normalize: merge consecutive vertex syllables, check adjacency
    let mut items: Vec<Syllable> = Vec::new();
    let mut at: Option<usize> = None;
    for (i, s) in word.iter().enumerate() {
        match s {
            Syllable::Vertex(w) => {
                let v = match at {
                    Some(v) => v,
                    None => gog
                        .vertices
                        .iter()
                        .position(|vg| &vg.alphabet == w.alphabet())
                        .ok_or(BassSerreError::WrongAlphabet(i))?,
                };
                if w.alphabet() != &gog.vertices[v].alphabet {
                    return Err(BassSerreError::WrongAlphabet(i));
                }
                at = Some(v);
                match items.last_mut() {
                    Some(Syllable::Vertex(prev)) => *prev = prev.concat(w),
                    _ => items.push(Syllable::Vertex(w.clone())),
                }
            }
            Syllable::Edge { edge, forward } => {
                let e = gog
                    .edges
                    .get(*edge)
                    .ok_or_else(|| BassSerreError::Malformed(format!("edge index {edge}")))?;
                let (src, dst) = if *forward {
                    (e.from, e.to)
                } else {
                    (e.to, e.from)
                };
                if let Some(v) = at {
                    if v != src {
                        return Err(BassSerreError::Disconnected(i));
                    }
                }
                at = Some(dst);
                items.push(s.clone());
            }
        }
    }

    // pinch loop
    'outer: loop {
        for i in 0..items.len() {
            let (edge, fwd) = match items[i] {
                Syllable::Edge { edge, forward } => (edge, forward),
                _ => continue,
            };
            // find the matching return traversal: either immediately, or
            // across one vertex syllable
            let (mid, j) = match items.get(i + 1) {
                Some(Syllable::Edge {
                    edge: e2,
                    forward: f2,
                }) if *e2 == edge && *f2 == !fwd => (None, i + 1),
                Some(Syllable::Vertex(w)) => match items.get(i + 2) {
                    Some(Syllable::Edge {
                        edge: e2,
                        forward: f2,
                    }) if *e2 == edge && *f2 == !fwd => (Some(w.clone()), i + 2),
                    _ => continue,
                },
                _ => continue,
            };
            // the far side is where the first traversal arrives
            let far: u8 = if fwd { 1 } else { 0 };
            let resolver = if far == 0 {
                &machine.sides[edge].0
            } else {
                &machine.sides[edge].1
            };
            let far_vertex = if far == 0 {
                gog.edges[edge].from
            } else {
                gog.edges[edge].to
            };
            let g = mid.unwrap_or_else(|| {
                Word::identity(gog.vertices[far_vertex].alphabet.clone())
            });
            if let Some(x) = resolver.express(&g)? {
                let near: u8 = 1 - far;
                let transported = machine.push_through(edge, near, &x);
                items.splice(i..=j, [Syllable::Vertex(transported)]);
                // re-merge adjacent vertex syllables
                let mut merged: Vec<Syllable> = Vec::with_capacity(items.len());
                for s in items.drain(..) {
                    match (merged.last_mut(), &s) {
                        (Some(Syllable::Vertex(prev)), Syllable::Vertex(w)) => {
                            *prev = prev.concat(w);
                        }
                        _ => merged.push(s),
                    }
                }
                items = merged;
                continue 'outer;
            }
        }
        break;
    }
    Ok(items)
}

/// A reduced edge path in the Bass–Serre tree, given by the connecting
/// vertex elements: starting at the base vertex, step i applies its
/// element in the current vertex group and then traverses its edge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreePath {
    pub base: usize,
    pub steps: Vec<PathStep>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathStep {
    pub element: Word,
    pub edge: usize,
    pub forward: bool,
}

impl TreePath {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// The vertex sequence V_0..V_k, checking adjacency.
    fn vertices(&self, gog: &GraphOfFreeGroups) -> Result<Vec<usize>, BassSerreError> {
        let mut vs = vec![self.base];
        for (i, s) in self.steps.iter().enumerate() {
            let e = gog
                .edges
                .get(s.edge)
                .ok_or_else(|| BassSerreError::Malformed(format!("edge index {}", s.edge)))?;
            let (src, dst) = if s.forward {
                (e.from, e.to)
            } else {
                (e.to, e.from)
            };
            if *vs.last().unwrap() != src {
                return Err(BassSerreError::Disconnected(i));
            }
            if s.element.alphabet() != &gog.vertices[src].alphabet {
                return Err(BassSerreError::WrongAlphabet(i));
            }
            vs.push(dst);
        }
        Ok(vs)
    }

    /// Certify the path visits pairwise distinct tree edges in a row:
    /// whenever a step returns over the previous edge, its connecting
    /// element must avoid the edge image at the shared vertex.
    pub fn validate(&self, gog: &GraphOfFreeGroups) -> Result<(), BassSerreError> {
        if self.steps.is_empty() {
            return Err(BassSerreError::EmptyPath);
        }
        self.vertices(gog)?;
        let machine = Machine::new(gog)?;
        for i in 1..self.steps.len() {
            let prev = &self.steps[i - 1];
            let cur = &self.steps[i];
            if cur.edge == prev.edge && cur.forward != prev.forward {
                // far side of the previous traversal
                let resolver = if prev.forward {
                    &machine.sides[prev.edge].1
                } else {
                    &machine.sides[prev.edge].0
                };
                if resolver.contains(&cur.element) {
                    return Err(BassSerreError::NotReduced(i));
                }
            }
        }
        Ok(())
    }
}

/// Pointwise stabilizer of the path, as a subgroup of the vertex group
/// the path starts at: intersections of edge images are transported
/// backward through the boundary monomorphisms and conjugated by the
/// connecting elements.
pub fn path_stabilizer(
    gog: &GraphOfFreeGroups,
    path: &TreePath,
) -> Result<SubgroupGraph, BassSerreError> {
    path.validate(gog)?;
    let machine = Machine::new(gog)?;
    let mut running: Option<SubgroupGraph> = None;
    for (i, step) in path.steps.iter().enumerate().rev() {
        let e = &gog.edges[step.edge];
        let (near_side, near_vertex) = if step.forward {
            (0u8, e.from)
        } else {
            (1u8, e.to)
        };
        let near_alphabet = gog.vertices[near_vertex].alphabet.clone();
        let near_images = if near_side == 0 { &e.d0 } else { &e.d1 };
        let far_resolver = if near_side == 0 {
            &machine.sides[step.edge].1
        } else {
            &machine.sides[step.edge].0
        };
        let sub = match running {
            None => SubgroupGraph::build(near_alphabet.clone(), near_images)?,
            Some(s) => {
                // s lives in the far vertex group; cut to the far image
                // and pull each basis element back through the edge
                let cut = s.intersect(&far_resolver.graph)?;
                let basis = cut.basis();
                let mut gens = Vec::with_capacity(basis.words.len());
                for w in &basis.words {
                    let x = far_resolver
                        .express(w)?
                        .expect("intersection lies in the far image");
                    gens.push(machine.push_through(step.edge, near_side, &x));
                }
                SubgroupGraph::build(near_alphabet.clone(), &gens)?
            }
        };
        let conjugated: Vec<Word> = sub
            .basis()
            .words
            .iter()
            .map(|w| w.conjugate_by(&step.element))
            .collect();
        running = Some(SubgroupGraph::build(near_alphabet, &conjugated)?);
        let _ = i;
    }
    Ok(running.expect("nonempty path"))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AcylVerdict {
    /// sampled evidence only, not a proof of acylindricity
    NoViolationFound,
    Violated,
}

#[derive(Clone, Debug)]
pub struct AcylReport {
    pub k: usize,
    pub c: usize,
    pub samples: usize,
    pub seed: u64,
    pub ball_radius: usize,
    /// offending paths with their stabilizer ranks
    pub violations: Vec<(TreePath, usize)>,
    /// resampling events from failed reducedness certificates
    pub rejections: u64,
    /// samples abandoned (generation retries or resource caps exhausted)
    pub inconclusive: u64,
    pub verdict: AcylVerdict,
}

/// Sample `samples` reduced length-k paths with seeded randomness and
/// report any with nontrivial (rank >= 1) pointwise stabilizer. For
/// free vertex groups a stabilizer obeying "at most C elements" must be
/// trivial, so any C >= 1 yields the same verdict.
pub fn acyl_sample(
    gog: &GraphOfFreeGroups,
    k: usize,
    c: usize,
    samples: usize,
    seed: u64,
    ball_radius: usize,
) -> Result<AcylReport, BassSerreError> {
    assert!(k >= 1 && c >= 1, "need k >= 1 and C >= 1");
    if gog.edges.is_empty() {
        return Err(BassSerreError::NoEdges);
    }
    Machine::new(gog)?; // surface resolver errors before sampling

    let results: Vec<(Option<(TreePath, usize)>, u64, u64)> = (0..samples)
        .into_par_iter()
        .map(|index| sample_one(gog, k, seed, index as u64, ball_radius))
        .collect();
    let mut violations = Vec::new();
    let mut rejections = 0u64;
    let mut inconclusive = 0u64;
    for (v, rej, inc) in results {
        if let Some(hit) = v {
            violations.push(hit);
        }
        rejections += rej;
        inconclusive += inc;
    }
    let verdict = if violations.is_empty() {
        AcylVerdict::NoViolationFound
    } else {
        AcylVerdict::Violated
    };
    Ok(AcylReport {
        k,
        c,
        samples,
        seed,
        ball_radius,
        violations,
        rejections,
        inconclusive,
        verdict,
    })
}

fn sample_one(
    gog: &GraphOfFreeGroups,
    k: usize,
    seed: u64,
    index: u64,
    ball_radius: usize,
) -> (Option<(TreePath, usize)>, u64, u64) {
    let mut rng =
        ChaCha8Rng::seed_from_u64(seed ^ (index.wrapping_add(1)).wrapping_mul(0x9E3779B97F4A7C15));
    let mut rejections = 0u64;
    const RETRIES: usize = 200;
    'attempt: for _ in 0..RETRIES {
        let base = rng.gen_range(0..gog.vertices.len());
        let mut path = TreePath {
            base,
            steps: Vec::new(),
        };
        let mut at = base;
        for _ in 0..k {
            // incident edge ends at the current vertex
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
                rejections += 1;
                continue 'attempt;
            }
            let (edge, forward) = ends[rng.gen_range(0..ends.len())];
            let element = random_ball_element(
                &mut rng,
                &gog.vertices[at].alphabet,
                ball_radius,
            );
            path.steps.push(PathStep {
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
        match path.validate(gog) {
            Ok(()) => {
                return match path_stabilizer(gog, &path) {
                    Ok(stab) => {
                        let rank = stab.rank();
                        if rank >= 1 {
                            (Some((path, rank)), rejections, 0)
                        } else {
                            (None, rejections, 0)
                        }
                    }
                    Err(_) => (None, rejections, 1),
                };
            }
            Err(BassSerreError::NotReduced(_)) => {
                rejections += 1;
                continue 'attempt;
            }
            Err(_) => return (None, rejections, 1),
        }
    }
    (None, rejections, 1)
}

/// Uniformly random freely reduced word of length <= radius.
fn random_ball_element(rng: &mut ChaCha8Rng, alphabet: &Alphabet, radius: usize) -> Word {
    let len = rng.gen_range(0..=radius);
    let mut letters: Vec<Letter> = Vec::with_capacity(len);
    for _ in 0..len {
        loop {
            let l = Letter::new(rng.gen_range(0..alphabet.len()), rng.gen_bool(0.5));
            if letters.last() != Some(&l.inverse()) {
                letters.push(l);
                break;
            }
        }
    }
    Word::from_reduced(alphabet.clone(), letters)
}

/// Inputs for the explicit constants: heights of the edge images
/// incident to a vertex, the acylindricity length k, and the vertex
/// constant k_vert.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundInputs {
    pub heights: Vec<u64>,
    pub k: u64,
    pub k_vert: u64,
}

impl BoundInputs {
    pub fn new(heights: Vec<u64>, k: u64, k_vert: u64) -> BoundInputs {
        assert!(
            !heights.is_empty() && heights.iter().all(|&h| h > 0) && k >= 1 && k_vert >= 1,
            "all bound inputs are positive"
        );
        BoundInputs {
            heights,
            k,
            k_vert,
        }
    }

    pub fn n_v(&self) -> u64 {
        lemma_nv(&self.heights)
    }

    /// Height bound for edge stabilizers, n_v^k.
    pub fn height_bound(&self) -> BigUint {
        lemma215_bound(self.n_v(), self.k)
    }

    /// The path-length constant k' = (2 k_vert)^k k_vert.
    pub fn k_prime(&self) -> BigUint {
        thm31_constant(self.k_vert, self.k)
    }
}

/// n_v: the number of edges adjacent to a lifted vertex that a
/// stabilizer element can fix, summed from the heights of the incident
/// edge images.
pub fn lemma_nv(heights: &[u64]) -> u64 {
    assert!(!heights.is_empty(), "need at least one incident edge end");
    assert!(heights.iter().all(|&h| h > 0), "heights are positive");
    heights.iter().sum()
}

/// Height bound n^k for edge stabilizers of the induced action.
pub fn lemma215_bound(n: u64, k: u64) -> BigUint {
    assert!(n >= 1 && k >= 1);
    BigUint::from(n).pow(k as u32)
}

/// k' = (2·k_vert)^k · k_vert.
pub fn thm31_constant(k_vert: u64, k: u64) -> BigUint {
    assert!(k_vert >= 1 && k >= 1);
    BigUint::from(2 * k_vert).pow(k as u32) * BigUint::from(k_vert)
}

impl fmt::Display for AcylVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AcylVerdict::NoViolationFound => write!(f, "no_violation_found"),
            AcylVerdict::Violated => write!(f, "violated"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn klein_bottle() -> GraphOfFreeGroups {
        parse_gog(
            "[vertex A] gens: a\n\
             [vertex B] gens: b\n\
             [edge e] from: A to: B / d0: a^2 / d1: b^2\n",
        )
        .unwrap()
    }

    fn free_splitting() -> GraphOfFreeGroups {
        // F(a,b) * <c> along a trivial edge group
        parse_gog(
            "[vertex L] gens: a b\n\
             [vertex R] gens: c\n\
             [edge e] from: L to: R / d0:  / d1: \n",
        )
        .unwrap()
    }

    #[test]
    fn parse_round_trip() {
        let g = klein_bottle();
        let text = g.serialize();
        let again = parse_gog(&text).unwrap();
        assert_eq!(text, again.serialize());
        assert_eq!(g.vertices.len(), 2);
        assert_eq!(g.edges[0].d0[0].to_string(), "a^2");
    }

    #[test]
    fn validate_accepts_and_rejects() {
        assert!(klein_bottle().validate().is_ok());
        let bad = parse_gog(
            "[vertex A] gens: a b\n\
             [vertex B] gens: c\n\
             [edge e] from: A to: B / d0: a; a / d1: c; c\n",
        )
        .unwrap();
        match bad.validate().unwrap_err() {
            BassSerreError::RankDeficient {
                expected, actual, ..
            } => {
                assert_eq!((expected, actual), (2, 1));
            }
            other => panic!("unexpected error {other}"),
        }
        let disconnected = parse_gog(
            "[vertex A] gens: a\n\
             [vertex B] gens: b\n",
        )
        .unwrap();
        assert_eq!(
            disconnected.validate().unwrap_err(),
            BassSerreError::NotConnected
        );
    }

    #[test]
    fn invert_basis_simple() {
        let b = Alphabet::new(["p", "q"]).unwrap();
        let y = Alphabet::new(["y0", "y1"]).unwrap();
        // images p q, q form a basis; inverse sends p -> y0 y1^-1, q -> y1
        let images = vec![Word::parse(&b, "p q").unwrap(), Word::parse(&b, "q").unwrap()];
        let inv = invert_basis(&y, &images).unwrap();
        assert_eq!(inv[0].to_string(), "y0 y1^-1");
        assert_eq!(inv[1].to_string(), "y1");
    }

    #[test]
    fn britton_single_pinch() {
        let g = klein_bottle();
        let a = &g.vertices[0].alphabet;
        let b = &g.vertices[1].alphabet;
        // e · b^2 · e^{-1}  =>  a^2
        let word = vec![
            Syllable::Edge {
                edge: 0,
                forward: true,
            },
            Syllable::Vertex(Word::parse(b, "b^2").unwrap()),
            Syllable::Edge {
                edge: 0,
                forward: false,
            },
        ];
        let reduced = britton_reduce(&g, &word).unwrap();
        assert_eq!(
            reduced,
            vec![Syllable::Vertex(Word::parse(a, "a^2").unwrap())]
        );
        // no pinch: e · b · e^{-1} stays put
        let stuck = vec![
            Syllable::Edge {
                edge: 0,
                forward: true,
            },
            Syllable::Vertex(Word::parse(b, "b").unwrap()),
            Syllable::Edge {
                edge: 0,
                forward: false,
            },
        ];
        assert_eq!(britton_reduce(&g, &stuck).unwrap().len(), 3);
    }

    #[test]
    fn free_splitting_paths_have_trivial_stabilizer() {
        let g = free_splitting();
        assert!(g.validate().is_ok());
        let a = &g.vertices[0].alphabet;
        let c = &g.vertices[1].alphabet;
        let path = TreePath {
            base: 0,
            steps: vec![
                PathStep {
                    element: Word::parse(a, "a b").unwrap(),
                    edge: 0,
                    forward: true,
                },
                PathStep {
                    element: Word::parse(c, "c").unwrap(),
                    edge: 0,
                    forward: false,
                },
            ],
        };
        let stab = path_stabilizer(&g, &path).unwrap();
        assert!(stab.is_trivial());
    }

    #[test]
    fn klein_bottle_central_stabilizer() {
        let g = klein_bottle();
        let a = &g.vertices[0].alphabet;
        let b = &g.vertices[1].alphabet;
        // length-2 path through the <a> vertex, connecting element a
        let path = TreePath {
            base: 1,
            steps: vec![
                PathStep {
                    element: Word::identity(b.clone()),
                    edge: 0,
                    forward: false,
                },
                PathStep {
                    element: Word::parse(a, "a").unwrap(),
                    edge: 0,
                    forward: true,
                },
            ],
        };
        let stab = path_stabilizer(&g, &path).unwrap();
        assert_eq!(stab.rank(), 1);
        assert!(stab.contains(&Word::parse(b, "b^2").unwrap()));
    }

    #[test]
    fn klein_bottle_sampling_finds_violation() {
        let g = klein_bottle();
        let report = acyl_sample(&g, 4, 1, 200, 7, 2).unwrap();
        assert_eq!(report.verdict, AcylVerdict::Violated);
        let (path, rank) = &report.violations[0];
        assert_eq!(*rank, 1);
        assert_eq!(path.len(), 4);
    }

    #[test]
    fn free_splitting_sampling_is_clean() {
        let g = free_splitting();
        let report = acyl_sample(&g, 3, 1, 100, 3, 3).unwrap();
        assert_eq!(report.verdict, AcylVerdict::NoViolationFound);
    }

    #[test]
    fn sampling_is_deterministic() {
        let g = klein_bottle();
        let r1 = acyl_sample(&g, 3, 1, 50, 42, 2).unwrap();
        let r2 = acyl_sample(&g, 3, 1, 50, 42, 2).unwrap();
        assert_eq!(r1.violations, r2.violations);
        assert_eq!(r1.rejections, r2.rejections);
    }

    #[test]
    fn backtracking_is_rejected() {
        let g = klein_bottle();
        let b = &g.vertices[1].alphabet;
        let a = &g.vertices[0].alphabet;
        let path = TreePath {
            base: 1,
            steps: vec![
                PathStep {
                    element: Word::identity(b.clone()),
                    edge: 0,
                    forward: false,
                },
                PathStep {
                    // a^2 lies in the edge image: this backtracks
                    element: Word::parse(a, "a^2").unwrap(),
                    edge: 0,
                    forward: true,
                },
            ],
        };
        assert_eq!(
            path.validate(&g).unwrap_err(),
            BassSerreError::NotReduced(1)
        );
    }

    #[test]
    fn calculators() {
        assert_eq!(lemma_nv(&[2, 2]), 4);
        assert_eq!(lemma_nv(&[1]), 1);
        assert_eq!(lemma215_bound(2, 3), BigUint::from(8u32));
        assert_eq!(lemma215_bound(1, 9), BigUint::from(1u32));
        assert_eq!(lemma215_bound(3, 2), BigUint::from(9u32));
        assert_eq!(thm31_constant(2, 2), BigUint::from(32u32));
        assert_eq!(thm31_constant(1, 1), BigUint::from(2u32));
        assert_eq!(thm31_constant(3, 2), BigUint::from(108u32));
    }
}
