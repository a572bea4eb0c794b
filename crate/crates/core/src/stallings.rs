//! Folded core subgroup graphs for finitely generated subgroups of free
//! groups: membership with witnesses, rank, finite index, intersections
//! via fiber products, malnormality and bounded-height certification.

use std::collections::HashMap;

use crate::words::{Alphabet, CyclicWord, Letter, Word, WordError};

use thiserror::Error;

/// Default edge-count cap for fiber-product explorations.
pub const DEFAULT_CAP: usize = 10_000_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StallingsError {
    #[error("word over a different alphabet")]
    AlphabetMismatch,
    #[error("resource cap of {0} exceeded")]
    CapExceeded(usize),
    #[error(transparent)]
    Word(#[from] WordError),
}

/// Folded core Stallings graph with base vertex 0.
///
/// Vertices are canonically numbered in breadth-first order from the
/// base, following signed letters in alphabet order, so equal subgroups
/// serialize identically.
#[derive(Clone, PartialEq, Eq)]
pub struct SubgroupGraph {
    alphabet: Alphabet,
    /// next[v][g] = target of the g-edge leaving v, if any
    next: Vec<Vec<Option<u32>>>,
    /// prev[v][g] = source of the g-edge entering v, if any
    prev: Vec<Vec<Option<u32>>>,
    generator_words: Vec<Word>,
}

/// Union-find with per-vertex labelled multi-adjacency, used during folding.
struct Folder {
    parent: Vec<u32>,
    adj: Vec<HashMap<(u32, bool), Vec<u32>>>,
}

impl Folder {
    fn new() -> Folder {
        Folder {
            parent: Vec::new(),
            adj: Vec::new(),
        }
    }

    fn fresh(&mut self) -> u32 {
        let id = self.parent.len() as u32;
        self.parent.push(id);
        self.adj.push(HashMap::new());
        id
    }

    fn find(&mut self, v: u32) -> u32 {
        let mut r = v;
        while self.parent[r as usize] != r {
            r = self.parent[r as usize];
        }
        let mut c = v;
        while self.parent[c as usize] != r {
            let p = self.parent[c as usize];
            self.parent[c as usize] = r;
            c = p;
        }
        r
    }

    fn add_edge(&mut self, u: u32, g: u32, v: u32) {
        self.adj[u as usize].entry((g, true)).or_default().push(v);
        self.adj[v as usize].entry((g, false)).or_default().push(u);
    }

    /// Merge v into u (by map size), returning the surviving representative.
    fn union(&mut self, u: u32, v: u32) -> u32 {
        let (u, v) = (self.find(u), self.find(v));
        if u == v {
            return u;
        }
        let (keep, drop) = if self.adj[u as usize].len() >= self.adj[v as usize].len() {
            (u, v)
        } else {
            (v, u)
        };
        self.parent[drop as usize] = keep;
        let moved = std::mem::take(&mut self.adj[drop as usize]);
        for (key, mut vec) in moved {
            self.adj[keep as usize].entry(key).or_default().append(&mut vec);
        }
        keep
    }

    /// Fold to a deterministic graph. `pick` selects which worklist entry
    /// to process next; the result is independent of that order.
    fn fold(&mut self, mut worklist: Vec<u32>, mut pick: impl FnMut(usize) -> usize) {
        while !worklist.is_empty() {
            let i = pick(worklist.len());
            let v = worklist.swap_remove(i);
            let v = self.find(v);
            let keys: Vec<(u32, bool)> = self.adj[v as usize].keys().copied().collect();
            let mut merged: Vec<u32> = Vec::new();
            for key in keys {
                let vec = match self.adj[v as usize].get_mut(&key) {
                    Some(vec) => vec,
                    None => continue,
                };
                let raw = std::mem::take(vec);
                let mut canon: Vec<u32> = Vec::with_capacity(raw.len());
                for n in raw {
                    let n = self.find(n);
                    if !canon.contains(&n) {
                        canon.push(n);
                    }
                }
                if canon.len() > 1 {
                    let mut m = canon[0];
                    for &n in &canon[1..] {
                        m = self.union(m, n);
                    }
                    canon = vec![m];
                    merged.push(m);
                }
                // v may have been merged away inside union; re-resolve
                let v_now = self.find(v);
                self.adj[v_now as usize]
                    .entry(key)
                    .or_default()
                    .extend(canon);
                if v_now != v {
                    worklist.push(v_now);
                    break;
                }
            }
            // every representative touched by a union may now have new
            // duplicate edges of its own
            if !merged.is_empty() {
                worklist.push(self.find(v));
                for m in merged {
                    let m = self.find(m);
                    if !worklist.contains(&m) {
                        worklist.push(m);
                    }
                }
            }
        }
    }
}

impl SubgroupGraph {
    /// Stallings graph of the subgroup generated by the given words.
    pub fn build(alphabet: Alphabet, generators: &[Word]) -> Result<SubgroupGraph, StallingsError> {
        Self::build_with_order(alphabet, generators, |_| 0)
    }

    /// Same as [`build`](Self::build) but folding in a caller-chosen
    /// worklist order; the output is identical for every order.
    pub fn build_with_order(
        alphabet: Alphabet,
        generators: &[Word],
        pick: impl FnMut(usize) -> usize,
    ) -> Result<SubgroupGraph, StallingsError> {
        for w in generators {
            if w.alphabet() != &alphabet {
                return Err(StallingsError::AlphabetMismatch);
            }
        }
        let mut folder = Folder::new();
        let base = folder.fresh();
        for w in generators {
            let mut at = base;
            let n = w.len();
            for (i, &l) in w.letters().iter().enumerate() {
                let to = if i + 1 == n { base } else { folder.fresh() };
                if l.inv {
                    folder.add_edge(to, l.gen, at);
                } else {
                    folder.add_edge(at, l.gen, to);
                }
                at = to;
            }
        }
        let worklist: Vec<u32> = (0..folder.parent.len() as u32).collect();
        folder.fold(worklist, pick);

        // extract deterministic adjacency over representatives
        let total = folder.parent.len();
        let gens = alphabet.len();
        let mut index: HashMap<u32, u32> = HashMap::new();
        let mut reps: Vec<u32> = Vec::new();
        for v in 0..total as u32 {
            let r = folder.find(v);
            index.entry(r).or_insert_with(|| {
                reps.push(r);
                (reps.len() - 1) as u32
            });
        }
        let nv = reps.len();
        let mut next = vec![vec![None; gens]; nv];
        let mut prev = vec![vec![None; gens]; nv];
        for (i, &r) in reps.iter().enumerate() {
            let entries: Vec<(u32, Vec<u32>)> = folder.adj[r as usize]
                .iter()
                .filter(|((_, out), _)| *out)
                .map(|(&(g, _), vec)| (g, vec.clone()))
                .collect();
            for (g, vec) in entries {
                for n in vec {
                    let j = index[&folder.find(n)] as usize;
                    let old = next[i][g as usize].replace(j as u32);
                    debug_assert!(old.is_none() || old == Some(j as u32), "unfolded out-edge");
                    let old = prev[j][g as usize].replace(i as u32);
                    debug_assert!(old.is_none() || old == Some(i as u32), "unfolded in-edge");
                }
            }
        }
        let base = index[&folder.find(base)];
        let mut graph = SubgroupGraph {
            alphabet,
            next,
            prev,
            generator_words: generators.to_vec(),
        };
        graph.trim_core(base as usize);
        graph.canonicalize(0);
        Ok(graph)
    }

    /// Assemble from explicit folded adjacency (used by fiber products).
    /// `base` is an index into the given arrays; trims and renumbers.
    fn from_parts(
        alphabet: Alphabet,
        next: Vec<Vec<Option<u32>>>,
        prev: Vec<Vec<Option<u32>>>,
        base: usize,
        generator_words: Vec<Word>,
    ) -> SubgroupGraph {
        let mut graph = SubgroupGraph {
            alphabet,
            next,
            prev,
            generator_words,
        };
        graph.trim_core(base);
        graph.canonicalize(0);
        graph
    }

    /// Remove non-base vertices of degree < 2, repeatedly. The base ends
    /// up at index 0.
    fn trim_core(&mut self, base: usize) {
        let gens = self.alphabet.len();
        let nv = self.next.len();
        let degree = |g: &SubgroupGraph, v: usize| -> usize {
            let mut d = 0;
            for gi in 0..gens {
                if g.next[v][gi].is_some() {
                    d += 1;
                }
                if g.prev[v][gi].is_some() {
                    d += 1;
                }
            }
            d
        };
        let mut alive = vec![true; nv];
        let mut queue: Vec<usize> = (0..nv)
            .filter(|&v| v != base && degree(self, v) < 2)
            .collect();
        while let Some(v) = queue.pop() {
            if !alive[v] || v == base || degree(self, v) >= 2 {
                continue;
            }
            alive[v] = false;
            for g in 0..gens {
                if let Some(t) = self.next[v][g] {
                    self.next[v][g] = None;
                    self.prev[t as usize][g] = None;
                    if t as usize != base && degree(self, t as usize) < 2 {
                        queue.push(t as usize);
                    }
                }
                if let Some(s) = self.prev[v][g] {
                    self.prev[v][g] = None;
                    self.next[s as usize][g] = None;
                    if s as usize != base && degree(self, s as usize) < 2 {
                        queue.push(s as usize);
                    }
                }
            }
        }
        // compact, keeping base first
        let mut remap = vec![u32::MAX; nv];
        let mut order: Vec<usize> = vec![base];
        order.extend((0..nv).filter(|&v| alive[v] && v != base));
        for (new, &old) in order.iter().enumerate() {
            remap[old] = new as u32;
        }
        let map = |slot: Option<u32>| slot.map(|t| remap[t as usize]);
        let mut next = vec![vec![None; gens]; order.len()];
        let mut prev = vec![vec![None; gens]; order.len()];
        for (new, &old) in order.iter().enumerate() {
            for g in 0..gens {
                next[new][g] = map(self.next[old][g]);
                prev[new][g] = map(self.prev[old][g]);
            }
        }
        self.next = next;
        self.prev = prev;
    }

    /// Renumber vertices in breadth-first order from `base`, neighbours
    /// visited in signed-letter order.
    fn canonicalize(&mut self, base: usize) {
        let gens = self.alphabet.len();
        let nv = self.next.len();
        let mut remap = vec![u32::MAX; nv];
        let mut order = Vec::with_capacity(nv);
        remap[base] = 0;
        order.push(base);
        let mut head = 0;
        while head < order.len() {
            let v = order[head];
            head += 1;
            for g in 0..gens {
                for t in [self.next[v][g], self.prev[v][g]].into_iter().flatten() {
                    if remap[t as usize] == u32::MAX {
                        remap[t as usize] = order.len() as u32;
                        order.push(t as usize);
                    }
                }
            }
        }
        debug_assert_eq!(order.len(), nv, "graph not base-connected");
        let map = |slot: Option<u32>| slot.map(|t| remap[t as usize]);
        let mut next = vec![vec![None; gens]; nv];
        let mut prev = vec![vec![None; gens]; nv];
        for old in 0..nv {
            let new = remap[old] as usize;
            for g in 0..gens {
                next[new][g] = map(self.next[old][g]);
                prev[new][g] = map(self.prev[old][g]);
            }
        }
        self.next = next;
        self.prev = prev;
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn vertex_count(&self) -> usize {
        self.next.len()
    }

    pub fn edge_count(&self) -> usize {
        self.next
            .iter()
            .map(|row| row.iter().filter(|s| s.is_some()).count())
            .sum()
    }

    pub fn generator_words(&self) -> &[Word] {
        &self.generator_words
    }

    /// Sorted `src label dst` triples.
    pub fn edges(&self) -> Vec<(u32, u32, u32)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for (v, row) in self.next.iter().enumerate() {
            for (g, slot) in row.iter().enumerate() {
                if let Some(t) = slot {
                    out.push((v as u32, g as u32, *t));
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Canonical serialization: vertex count, then sorted edge triples.
    pub fn canonical_string(&self) -> String {
        let mut s = format!("{}\n", self.vertex_count());
        for (src, g, dst) in self.edges() {
            s.push_str(&format!(
                "{} {} {}\n",
                src,
                self.alphabet.name(g as usize),
                dst
            ));
        }
        s
    }

    fn step(&self, v: u32, l: Letter) -> Option<u32> {
        if l.inv {
            self.prev[v as usize][l.gen as usize]
        } else {
            self.next[v as usize][l.gen as usize]
        }
    }

    /// Follow a reduced word from `from`; None if it leaves the graph.
    pub fn trace(&self, from: u32, w: &Word) -> Option<u32> {
        let mut at = from;
        for &l in w.letters() {
            at = self.step(at, l)?;
        }
        Some(at)
    }

    /// Rank of the subgroup (first Betti number of the core graph).
    pub fn rank(&self) -> usize {
        self.edge_count() + 1 - self.vertex_count()
    }

    pub fn is_trivial(&self) -> bool {
        self.rank() == 0
    }

    /// Index in the ambient free group, when finite: the graph must be
    /// complete (every vertex has an in- and out-edge for every label).
    pub fn is_finite_index(&self) -> Option<usize> {
        let complete = self.next.iter().zip(&self.prev).all(|(n, p)| {
            n.iter().all(|s| s.is_some()) && p.iter().all(|s| s.is_some())
        });
        if complete {
            Some(self.vertex_count())
        } else {
            None
        }
    }

    /// BFS spanning-tree words from the base to every vertex.
    pub fn path_words(&self) -> Vec<Word> {
        let gens = self.alphabet.len();
        let nv = self.vertex_count();
        let mut paths: Vec<Option<Word>> = vec![None; nv];
        paths[0] = Some(Word::identity(self.alphabet.clone()));
        let mut queue = std::collections::VecDeque::from([0u32]);
        while let Some(v) = queue.pop_front() {
            for g in 0..gens {
                for (slot, inv) in [(self.next[v as usize][g], false), (self.prev[v as usize][g], true)] {
                    if let Some(t) = slot {
                        if paths[t as usize].is_none() {
                            let mut w = paths[v as usize].clone().unwrap();
                            w = w.concat(&Word::from_reduced(
                                self.alphabet.clone(),
                                vec![Letter::new(g, inv)],
                            ));
                            paths[t as usize] = Some(w);
                            queue.push_back(t);
                        }
                    }
                }
            }
        }
        paths.into_iter().map(|p| p.unwrap()).collect()
    }

    /// Spanning-tree free basis: one word per non-tree edge, in canonical
    /// edge order, together with the synthetic alphabet `s0, s1, ...`.
    pub fn basis(&self) -> Basis {
        let paths = self.path_words();
        // tree edges: those used in the BFS above
        let mut tree: std::collections::HashSet<(u32, u32)> = std::collections::HashSet::new();
        for (v, p) in paths.iter().enumerate() {
            if let Some(&last) = p.letters().last() {
                if last.inv {
                    // arrived along an incoming edge, traversed backwards
                    tree.insert((v as u32, last.gen));
                } else {
                    tree.insert((self.prev[v][last.gen as usize].unwrap(), last.gen));
                }
            }
        }
        let mut words = Vec::new();
        let mut edge_index: HashMap<(u32, u32), Option<usize>> = HashMap::new();
        for (src, g, dst) in self.edges() {
            if tree.contains(&(src, g)) {
                edge_index.insert((src, g), None);
            } else {
                let letter = Word::from_reduced(self.alphabet.clone(), vec![Letter::new(g as usize, false)]);
                let w = paths[src as usize]
                    .concat(&letter)
                    .concat(&paths[dst as usize].inverse());
                edge_index.insert((src, g), Some(words.len()));
                words.push(w);
            }
        }
        let names: Vec<String> = (0..words.len()).map(|i| format!("s{i}")).collect();
        Basis {
            alphabet: Alphabet::new(names).unwrap(),
            words,
            edge_index,
        }
    }

    /// Membership with witness: returns the expression of `w` over the
    /// spanning-tree basis iff `w` reads a base loop.
    pub fn membership(&self, w: &Word) -> Result<Option<Word>, StallingsError> {
        if w.alphabet() != &self.alphabet {
            return Err(StallingsError::AlphabetMismatch);
        }
        let basis = self.basis();
        let mut at = 0u32;
        let mut letters: Vec<Letter> = Vec::new();
        for &l in w.letters() {
            let (edge, to) = if l.inv {
                match self.prev[at as usize][l.gen as usize] {
                    Some(s) => ((s, l.gen), s),
                    None => return Ok(None),
                }
            } else {
                match self.next[at as usize][l.gen as usize] {
                    Some(t) => ((at, l.gen), t),
                    None => return Ok(None),
                }
            };
            if let Some(i) = basis.edge_index[&edge] {
                let bl = Letter::new(i, l.inv);
                match letters.last() {
                    Some(&last) if last == bl.inverse() => {
                        letters.pop();
                    }
                    _ => letters.push(bl),
                }
            }
            at = to;
        }
        if at == 0 {
            Ok(Some(Word::from_reduced(basis.alphabet.clone(), letters)))
        } else {
            Ok(None)
        }
    }

    /// True iff `w` labels a base loop.
    pub fn contains(&self, w: &Word) -> bool {
        self.trace(0, w) == Some(0)
    }
}

/// Minimal union-find over dense ids.
struct Dsu {
    parent: Vec<u32>,
}

impl Dsu {
    fn new() -> Dsu {
        Dsu { parent: Vec::new() }
    }

    fn make(&mut self) -> u32 {
        let id = self.parent.len() as u32;
        self.parent.push(id);
        id
    }

    fn find(&mut self, v: u32) -> u32 {
        let mut r = v;
        while self.parent[r as usize] != r {
            r = self.parent[r as usize];
        }
        let mut c = v;
        while self.parent[c as usize] != r {
            let p = self.parent[c as usize];
            self.parent[c as usize] = r;
            c = p;
        }
        r
    }

    fn union(&mut self, a: u32, b: u32) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            self.parent[a.max(b) as usize] = a.min(b);
        }
    }
}

/// A connected component of an n-fold self fiber product, recorded as
/// the list of vertex tuples it contains plus its product edges.
struct ProductComponent {
    /// sorted vertex tuples, flattened (chunks of n)
    tuples: Vec<Vec<u32>>,
    /// product edges as (label, source-tuple index within `tuples`)
    edges: Vec<(u32, usize)>,
}

impl ProductComponent {
    fn rank(&self) -> usize {
        (self.edges.len() + 1).saturating_sub(self.tuples.len())
    }
}

impl SubgroupGraph {
    /// Per-label edge lists (src, dst).
    fn edges_by_label(&self) -> Vec<Vec<(u32, u32)>> {
        let mut by = vec![Vec::new(); self.alphabet.len()];
        for (src, g, dst) in self.edges() {
            by[g as usize].push((src, dst));
        }
        by
    }

    /// Folded core of H ∩ K: the based component of the labelled product.
    pub fn intersect(&self, other: &SubgroupGraph) -> Result<SubgroupGraph, StallingsError> {
        if self.alphabet != other.alphabet {
            return Err(StallingsError::AlphabetMismatch);
        }
        let gens = self.alphabet.len();
        let mut ids: HashMap<(u32, u32), u32> = HashMap::new();
        let mut order: Vec<(u32, u32)> = Vec::new();
        ids.insert((0, 0), 0);
        order.push((0, 0));
        let mut next: Vec<Vec<Option<u32>>> = vec![vec![None; gens]];
        let mut prev: Vec<Vec<Option<u32>>> = vec![vec![None; gens]];
        let mut head = 0usize;
        while head < order.len() {
            let (u, v) = order[head];
            for g in 0..gens {
                for inv in [false, true] {
                    let l = Letter::new(g, inv);
                    let (a, b) = match (self.step(u, l), other.step(v, l)) {
                        (Some(a), Some(b)) => (a, b),
                        _ => continue,
                    };
                    let id = *ids.entry((a, b)).or_insert_with(|| {
                        order.push((a, b));
                        next.push(vec![None; gens]);
                        prev.push(vec![None; gens]);
                        (order.len() - 1) as u32
                    });
                    if inv {
                        next[id as usize][g] = Some(head as u32);
                        prev[head][g] = Some(id);
                    } else {
                        next[head][g] = Some(id);
                        prev[id as usize][g] = Some(head as u32);
                    }
                }
            }
            head += 1;
        }
        let mut out = SubgroupGraph::from_parts(self.alphabet.clone(), next, prev, 0, Vec::new());
        out.generator_words = out.basis().words;
        Ok(out)
    }

    /// Components of the n-fold self fiber product, excluding the
    /// diagonal component (the one containing the all-base tuple).
    fn self_product_components(
        &self,
        n: usize,
        cap: usize,
    ) -> Result<Vec<ProductComponent>, StallingsError> {
        assert!(n >= 2);
        let by_label = self.edges_by_label();
        let mut total: usize = 0;
        for list in &by_label {
            total = total.saturating_add(list.len().saturating_pow(n as u32));
        }
        if total > cap {
            return Err(StallingsError::CapExceeded(cap));
        }
        let mut ids: HashMap<Vec<u32>, u32> = HashMap::new();
        let mut tuples: Vec<Vec<u32>> = Vec::new();
        let mut dsu = Dsu::new();
        let mut intern = |t: Vec<u32>, dsu: &mut Dsu, tuples: &mut Vec<Vec<u32>>| -> u32 {
            *ids.entry(t.clone()).or_insert_with(|| {
                tuples.push(t);
                dsu.make()
            })
        };
        let mut edges: Vec<(u32, u32)> = Vec::new(); // (label, src tuple id)
        for (g, list) in by_label.iter().enumerate() {
            if list.is_empty() {
                continue;
            }
            // cartesian product over n copies of this label's edge list
            let mut idx = vec![0usize; n];
            loop {
                let src: Vec<u32> = idx.iter().map(|&i| list[i].0).collect();
                let dst: Vec<u32> = idx.iter().map(|&i| list[i].1).collect();
                let s = intern(src, &mut dsu, &mut tuples);
                let d = intern(dst, &mut dsu, &mut tuples);
                dsu.union(s, d);
                edges.push((g as u32, s));
                let mut pos = 0;
                loop {
                    idx[pos] += 1;
                    if idx[pos] < list.len() {
                        break;
                    }
                    idx[pos] = 0;
                    pos += 1;
                    if pos == n {
                        break;
                    }
                }
                if pos == n {
                    break;
                }
            }
        }
        let diag_root = ids
            .get(vec![0u32; n].as_slice())
            .copied()
            .map(|id| dsu.find(id));
        let mut groups: HashMap<u32, ProductComponent> = HashMap::new();
        for id in 0..tuples.len() as u32 {
            let root = dsu.find(id);
            if Some(root) == diag_root {
                continue;
            }
            groups
                .entry(root)
                .or_insert_with(|| ProductComponent {
                    tuples: Vec::new(),
                    edges: Vec::new(),
                })
                .tuples
                .push(tuples[id as usize].clone());
        }
        // reattach edges by component, indexing sources into the sorted tuple list
        for comp in groups.values_mut() {
            comp.tuples.sort_unstable();
        }
        for (g, src_id) in edges {
            let root = dsu.find(src_id);
            if Some(root) == diag_root {
                continue;
            }
            let comp = groups.get_mut(&root).unwrap();
            let pos = comp
                .tuples
                .binary_search(&tuples[src_id as usize])
                .unwrap();
            comp.edges.push((g, pos));
        }
        let mut out: Vec<ProductComponent> = groups.into_values().collect();
        out.sort_by(|a, b| a.tuples[0].cmp(&b.tuples[0]));
        Ok(out)
    }

    /// Based subgroup graph of the loops at `base_tuple` within a product
    /// component, conjugated back to the true base along the first
    /// coordinate's path word.
    fn component_core(&self, comp: &ProductComponent, paths: &[Word]) -> (Word, SubgroupGraph) {
        let gens = self.alphabet.len();
        let base_tuple = &comp.tuples[0];
        let index: HashMap<&Vec<u32>, usize> =
            comp.tuples.iter().enumerate().map(|(i, t)| (t, i)).collect();
        let nv = comp.tuples.len();
        let mut next = vec![vec![None; gens]; nv];
        let mut prev = vec![vec![None; gens]; nv];
        for &(g, src) in &comp.edges {
            let t = &comp.tuples[src];
            let dst: Vec<u32> = t
                .iter()
                .map(|&v| self.next[v as usize][g as usize].unwrap())
                .collect();
            let d = index[&dst];
            next[src][g as usize] = Some(d as u32);
            prev[d][g as usize] = Some(src as u32);
        }
        let local =
            SubgroupGraph::from_parts(self.alphabet.clone(), next, prev, 0, Vec::new());
        let conj = &paths[base_tuple[0] as usize];
        let gens_conj: Vec<Word> = local
            .basis()
            .words
            .iter()
            .map(|w| w.conjugate_by(conj))
            .collect();
        let core = SubgroupGraph::build(self.alphabet.clone(), &gens_conj).unwrap();
        // double-coset representative g with core = H ∩ gHg^{-1}
        let rep = paths[base_tuple[0] as usize].concat(&paths[base_tuple[1] as usize].inverse());
        (rep, core)
    }

    /// One entry per non-diagonal self-fiber-product component: a
    /// double-coset representative g ∉ H and the core of H ∩ gHg⁻¹.
    pub fn conjugate_intersections(
        &self,
        cap: usize,
    ) -> Result<Vec<(Word, SubgroupGraph)>, StallingsError> {
        let comps = self.self_product_components(2, cap)?;
        let paths = self.path_words();
        Ok(comps
            .iter()
            .map(|c| self.component_core(c, &paths))
            .collect())
    }

    /// Malnormality via the self fiber product: malnormal iff every
    /// non-diagonal component is a tree (rank-0 intersection).
    pub fn is_malnormal(&self, cap: usize) -> Malnormality {
        let comps = match self.self_product_components(2, cap) {
            Ok(c) => c,
            Err(_) => return Malnormality::Inconclusive,
        };
        let paths = self.path_words();
        for comp in &comps {
            if comp.rank() >= 1 {
                let t = &comp.tuples[0];
                let witness = paths[t[0] as usize].concat(&paths[t[1] as usize].inverse());
                return Malnormality::NotMalnormal { witness };
            }
        }
        Malnormality::Malnormal
    }

    /// Does every intersection of at least `n` essentially distinct
    /// conjugates of H vanish? Essentially distinct means pairwise
    /// distinct cosets gH, checked by membership.
    pub fn height_leq(&self, n: usize, cap: usize) -> HeightCertificate {
        assert!(n >= 1);
        if self.is_trivial() {
            return HeightCertificate {
                n,
                verdict: HeightVerdict::Holds,
            };
        }
        if n == 1 {
            // H itself is an infinite intersection of one conjugate
            return HeightCertificate {
                n,
                verdict: HeightVerdict::Fails {
                    witnesses: vec![Word::identity(self.alphabet.clone())],
                },
            };
        }
        let comps = match self.self_product_components(n, cap) {
            Ok(c) => c,
            Err(_) => {
                return HeightCertificate {
                    n,
                    verdict: HeightVerdict::Inconclusive,
                }
            }
        };
        let paths = self.path_words();
        for comp in &comps {
            if comp.rank() < 1 {
                continue;
            }
            let t = &comp.tuples[0];
            // admissible iff the tuple's cosets are pairwise distinct
            let mut distinct = true;
            'pairs: for i in 0..n {
                for j in (i + 1)..n {
                    let c = paths[t[i] as usize].concat(&paths[t[j] as usize].inverse());
                    if self.contains(&c) {
                        distinct = false;
                        break 'pairs;
                    }
                }
            }
            if distinct {
                let witnesses = (0..n)
                    .map(|i| paths[t[0] as usize].concat(&paths[t[i] as usize].inverse()))
                    .collect();
                return HeightCertificate {
                    n,
                    verdict: HeightVerdict::Fails { witnesses },
                };
            }
        }
        HeightCertificate {
            n,
            verdict: HeightVerdict::Holds,
        }
    }
}

/// Rank-1 specialization: ⟨w⟩ is malnormal iff w is neither a proper
/// power nor a rotation of its own inverse.
pub fn cyclic_malnormal_fastpath(w: &CyclicWord) -> bool {
    assert!(!w.is_empty());
    !is_proper_power(w) && w.inverse() != *w
}

pub fn is_proper_power(w: &CyclicWord) -> bool {
    let letters = w.letters();
    let n = letters.len();
    // smallest period via the KMP failure function
    let mut fail = vec![0usize; n];
    for i in 1..n {
        let mut k = fail[i - 1];
        while k > 0 && letters[i] != letters[k] {
            k = fail[k - 1];
        }
        if letters[i] == letters[k] {
            k += 1;
        }
        fail[i] = k;
    }
    let p = n - fail[n - 1];
    p < n && n % p == 0
}

/// Spanning-tree free basis of a subgroup graph.
pub struct Basis {
    /// synthetic names `s0, s1, ...`, one per basis element
    pub alphabet: Alphabet,
    /// basis words over the ambient alphabet
    pub words: Vec<Word>,
    /// (src, label) -> basis index, None for tree edges
    pub edge_index: HashMap<(u32, u32), Option<usize>>,
}

impl Basis {
    /// Substitute basis words into an expression over the basis alphabet.
    pub fn expand(&self, witness: &Word) -> Word {
        let images: HashMap<String, Word> = self
            .alphabet
            .names()
            .iter()
            .cloned()
            .zip(self.words.iter().cloned())
            .collect();
        if self.words.is_empty() {
            // trivial subgroup: only the empty witness occurs
            debug_assert!(witness.is_empty());
            return Word::identity(
                self.words
                    .first()
                    .map(|w| w.alphabet().clone())
                    .unwrap_or_else(|| Alphabet::new(Vec::<String>::new()).unwrap()),
            );
        }
        witness.substitute(&images).unwrap()
    }
}

impl std::fmt::Debug for SubgroupGraph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "SubgroupGraph(V={}, E={}, rank={})",
            self.vertex_count(),
            self.edge_count(),
            self.rank()
        )
    }
}

/// Verdict of a malnormality check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Malnormality {
    Malnormal,
    /// `witness` is a conjugator g with H ∩ gHg⁻¹ nontrivial, g ∉ H.
    NotMalnormal { witness: Word },
    /// The fiber product exceeded the resource cap.
    Inconclusive,
}

/// Result of a height-at-most-n check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeightCertificate {
    pub n: usize,
    pub verdict: HeightVerdict,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HeightVerdict {
    Holds,
    /// Coset representatives of n pairwise essentially distinct
    /// conjugates with nontrivial intersection.
    Fails { witnesses: Vec<Word> },
    Inconclusive,
}
