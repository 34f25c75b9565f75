//! Best-effort recognition of GSP multigraphs.
//!
//! Two strategies run in order. The first is an interval search that looks
//! for a tree whose leaf order reproduces the input's edge labels exactly;
//! it is complete for that class and succeeds on anything produced by
//! `realize`. The second is a reduction that ignores labels: it merges
//! parallel super-edges, contracts degree-2 vertices and folds pendant
//! blocks into dangling nodes until a single terminal-to-terminal
//! super-edge is left. It is not complete.
//!
//! Every result is checked against the input before it is returned.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::error::{Error, Result};
use crate::graph::{Multigraph, VertexId};
use crate::tree::{DecompTree, Op, TreeBuilder};

/// Edge-count ceiling for the label-preserving search.
pub const INTERVAL_SEARCH_LIMIT: usize = 256;

/// A tree realizing `g` up to vertex renaming and an edge-label bijection.
///
/// When a label-preserving tree exists and `g` has at most
/// [`INTERVAL_SEARCH_LIMIT`] edges, that tree is returned, so realizing it
/// reproduces `g.canonical()` exactly.
pub fn recognize(g: &Multigraph) -> Result<DecompTree> {
    if g.edge_count() <= INTERVAL_SEARCH_LIMIT {
        if let Some(tree) = interval_search(g) {
            let identity: Vec<u32> = (1..=g.edge_count() as u32).collect();
            check_realizes(&tree, &identity, g)?;
            return Ok(tree);
        }
    }
    let (tree, labels) = reduce(g)?;
    check_realizes(&tree, &labels, g)?;
    Ok(tree)
}

/// Checks that `tree` realizes `g` when leaf `i` (left to right) stands for
/// input edge `labels[i]`.
pub fn check_realizes(tree: &DecompTree, labels: &[u32], g: &Multigraph) -> Result<()> {
    let fail = |why: &str| Err(Error::Recognition(format!("candidate tree rejected: {why}")));
    let r = tree.realize();
    let h = &r.graph;
    if h.edge_count() != g.edge_count() || labels.len() != g.edge_count() {
        return fail("edge count differs");
    }
    if h.vertex_count() != g.vertex_count() {
        return fail("vertex count differs");
    }
    let mut seen = vec![false; g.edge_count()];
    for &l in labels {
        if l == 0 || l as usize > seen.len() || std::mem::replace(&mut seen[l as usize - 1], true) {
            return fail("leaf labels are not a bijection");
        }
    }
    // Vertex map from the realization into g, grown outwards from the
    // terminals along corresponding edges.
    let input_edges: Vec<(VertexId, VertexId)> = g.edges().map(|(_, u, v)| (u, v)).collect();
    let mut map = vec![usize::MAX; h.vertex_count()];
    map[h.source()] = g.source();
    map[h.sink()] = g.sink();
    let incidence = h.incidence();
    let mut queue = VecDeque::from([h.source(), h.sink()]);
    while let Some(a) = queue.pop_front() {
        for &label in &incidence[a] {
            let b = h.opposite(label, a);
            let (x, y) = input_edges[labels[label.index()] as usize - 1];
            let image = if map[a] == x {
                y
            } else if map[a] == y {
                x
            } else {
                return fail("edge endpoints do not correspond");
            };
            if map[b] == usize::MAX {
                map[b] = image;
                queue.push_back(b);
            } else if map[b] != image {
                return fail("edge endpoints do not correspond");
            }
        }
    }
    let distinct: BTreeSet<usize> = map.iter().copied().collect();
    if distinct.len() != map.len() || distinct.contains(&usize::MAX) {
        return fail("vertex map is not a bijection");
    }
    Ok(())
}

/// Small fixed-width vertex set.
#[derive(Clone, PartialEq, Eq)]
struct VertexSet(Vec<u64>);

impl VertexSet {
    fn new(n: usize) -> Self {
        VertexSet(vec![0; n.div_ceil(64)])
    }

    fn insert(&mut self, v: usize) {
        self.0[v / 64] |= 1 << (v % 64);
    }

    fn union(&self, other: &VertexSet) -> VertexSet {
        VertexSet(self.0.iter().zip(&other.0).map(|(a, b)| a | b).collect())
    }

    /// Whether the intersection is exactly `want` (given as distinct ids).
    fn meets_exactly(&self, other: &VertexSet, want: &[usize]) -> bool {
        let mut expected = VertexSet::new(self.0.len() * 64);
        for &v in want {
            expected.insert(v);
        }
        self.0
            .iter()
            .zip(&other.0)
            .zip(&expected.0)
            .all(|((a, b), e)| a & b == *e)
    }
}

#[derive(Clone, Copy)]
struct Choice {
    split: usize,
    op: Op,
    /// Operand sinks to recurse into.
    left_sink: VertexId,
    right_sink: VertexId,
}

/// Label-preserving search over leaf intervals.
///
/// A subtree covers a contiguous label range `i..=j`; its source is the tail
/// of edge `i`, so only the sink is searched for. Operand vertex sets must
/// meet exactly in the identified terminals, which makes the realization
/// injective.
fn interval_search(g: &Multigraph) -> Option<DecompTree> {
    let m = g.edge_count();
    let n = g.vertex_count();
    let edges: Vec<(VertexId, VertexId)> = g.edges().map(|(_, u, v)| (u, v)).collect();
    if edges[0].0 != g.source() {
        return None;
    }
    let at = |i: usize, j: usize| i * m + j;
    let mut verts: Vec<Option<VertexSet>> = vec![None; m * m];
    let mut sinks: Vec<BTreeMap<VertexId, Option<Choice>>> = vec![BTreeMap::new(); m * m];
    for (i, &(u, v)) in edges.iter().enumerate() {
        let mut set = VertexSet::new(n);
        set.insert(u);
        set.insert(v);
        verts[at(i, i)] = Some(set);
        sinks[at(i, i)].insert(v, None);
    }
    for len in 2..=m {
        for i in 0..=m - len {
            let j = i + len - 1;
            let set = verts[at(i, j - 1)].as_ref().unwrap().union(verts[at(j, j)].as_ref().unwrap());
            let source = edges[i].0;
            let mut found: BTreeMap<VertexId, Option<Choice>> = BTreeMap::new();
            for split in i..j {
                let (left, right) = (&sinks[at(i, split)], &sinks[at(split + 1, j)]);
                if left.is_empty() || right.is_empty() {
                    continue;
                }
                let (lv, rv) = (
                    verts[at(i, split)].as_ref().unwrap(),
                    verts[at(split + 1, j)].as_ref().unwrap(),
                );
                let right_source = edges[split + 1].0;
                for &w in left.keys() {
                    if right_source == w {
                        if lv.meets_exactly(rv, &[w]) {
                            for &t in right.keys() {
                                let choice = Choice { split, op: Op::Series, left_sink: w, right_sink: t };
                                found.entry(t).or_insert(Some(choice));
                            }
                        }
                    } else if right_source == source {
                        if right.contains_key(&w) && lv.meets_exactly(rv, &[source, w]) {
                            let choice = Choice { split, op: Op::Parallel, left_sink: w, right_sink: w };
                            found.entry(w).or_insert(Some(choice));
                        }
                        if lv.meets_exactly(rv, &[source]) {
                            let &t = right.keys().next().unwrap();
                            let choice = Choice { split, op: Op::Dangling, left_sink: w, right_sink: t };
                            found.entry(w).or_insert(Some(choice));
                        }
                    }
                }
            }
            verts[at(i, j)] = Some(set);
            sinks[at(i, j)] = found;
        }
    }
    sinks[at(0, m - 1)].get(&g.sink())?;

    // Rebuild in post-order without recursion.
    let mut builder = TreeBuilder::new();
    let mut stack = vec![(0, m - 1, g.sink(), false)];
    let mut done = Vec::new();
    while let Some((i, j, t, expanded)) = stack.pop() {
        match sinks[at(i, j)][&t] {
            None => done.push(builder.leaf()),
            Some(c) if !expanded => {
                stack.push((i, j, t, true));
                stack.push((c.split + 1, j, c.right_sink, false));
                stack.push((i, c.split, c.left_sink, false));
            }
            Some(c) => {
                let r = done.pop().unwrap();
                let l = done.pop().unwrap();
                done.push(builder.join(c.op, l, r));
            }
        }
    }
    builder.finish(done.pop().unwrap()).ok()
}

/// Operator, operands, and the input label of a leaf.
type ArenaPart = (Op, Option<(usize, usize)>, u32);

/// Expression arena for the reduction: leaves carry input labels.
#[derive(Default)]
struct Arena {
    parts: Vec<ArenaPart>,
}

impl Arena {
    fn leaf(&mut self, label: u32) -> usize {
        self.parts.push((Op::Leaf, None, label));
        self.parts.len() - 1
    }

    fn join(&mut self, op: Op, l: usize, r: usize) -> usize {
        self.parts.push((op, Some((l, r)), 0));
        self.parts.len() - 1
    }

    fn join2(&mut self, op: Op, l: Option<usize>, r: Option<usize>) -> Option<usize> {
        Some(self.join(op, l?, r?))
    }

    /// `D(...D(base, h1)..., hk)`.
    fn hang(&mut self, base: usize, hangs: &[usize]) -> usize {
        hangs.iter().fold(base, |acc, &h| self.join(Op::Dangling, acc, h))
    }

    /// Converts the part rooted at `root` into a tree and its leaf labels.
    fn finish(&self, root: usize) -> Result<(DecompTree, Vec<u32>)> {
        let mut builder = TreeBuilder::new();
        let mut labels = Vec::new();
        let mut stack = vec![(root, false)];
        let mut done = Vec::new();
        while let Some((part, expanded)) = stack.pop() {
            let (op, children, label) = self.parts[part];
            match children {
                None => {
                    labels.push(label);
                    done.push(builder.leaf());
                }
                Some((l, r)) if !expanded => {
                    stack.push((part, true));
                    stack.push((r, false));
                    stack.push((l, false));
                }
                Some(_) => {
                    let r = done.pop().unwrap();
                    let l = done.pop().unwrap();
                    done.push(builder.join(op, l, r));
                }
            }
        }
        Ok((builder.finish(done.pop().unwrap())?, labels))
    }
}

/// A super-edge between `a` and `b` with a tree for each orientation, if any.
#[derive(Clone, Copy)]
struct SuperEdge {
    a: VertexId,
    b: VertexId,
    forward: Option<usize>,
    backward: Option<usize>,
}

impl SuperEdge {
    fn other(&self, v: VertexId) -> VertexId {
        if self.a == v {
            self.b
        } else {
            self.a
        }
    }

    /// Tree whose source is `from`.
    fn from(&self, from: VertexId) -> Option<usize> {
        if self.a == from {
            self.forward
        } else {
            self.backward
        }
    }
}

struct Reducer {
    arena: Arena,
    edges: Vec<Option<SuperEdge>>,
    incident: Vec<BTreeSet<usize>>,
    hangs: Vec<Vec<usize>>,
    s: VertexId,
    t: VertexId,
}

impl Reducer {
    fn add(&mut self, e: SuperEdge) -> usize {
        let id = self.edges.len();
        self.incident[e.a].insert(id);
        self.incident[e.b].insert(id);
        self.edges.push(Some(e));
        id
    }

    fn remove(&mut self, id: usize) -> SuperEdge {
        let e = self.edges[id].take().expect("live super-edge");
        self.incident[e.a].remove(&id);
        self.incident[e.b].remove(&id);
        e
    }

    /// Merges parallel super-edges at `v`; returns touched neighbours.
    fn merge_parallel(&mut self, v: VertexId) -> Vec<VertexId> {
        let mut by_end: BTreeMap<VertexId, usize> = BTreeMap::new();
        let mut touched = Vec::new();
        for id in self.incident[v].clone() {
            let w = self.edges[id].unwrap().other(v);
            match by_end.get(&w).copied() {
                None => {
                    by_end.insert(w, id);
                }
                Some(prev) => {
                    let x = self.remove(prev);
                    let y = self.remove(id);
                    let forward = self.arena.join2(Op::Parallel, x.from(v), y.from(v));
                    let backward = self.arena.join2(Op::Parallel, x.from(w), y.from(w));
                    let merged = self.add(SuperEdge { a: v, b: w, forward, backward });
                    by_end.insert(w, merged);
                    touched.push(w);
                }
            }
        }
        touched
    }

    /// Tree rooted at `from` covering super-edge `e` and everything hanging
    /// at its far end `v`.
    fn with_far_hangs(&mut self, e: &SuperEdge, from: VertexId, v: VertexId) -> Option<usize> {
        let base = e.from(from)?;
        let hangs = std::mem::take(&mut self.hangs[v]);
        let result = match hangs.split_first() {
            None => Some(base),
            Some((&first, rest)) => {
                let tail = self.arena.hang(first, rest);
                Some(self.arena.join(Op::Series, base, tail))
            }
        };
        self.hangs[v] = hangs;
        result
    }

    /// Eliminates non-terminal `v` if it is pendant or has degree two.
    fn eliminate(&mut self, v: VertexId) -> Vec<VertexId> {
        if v == self.s || v == self.t {
            return Vec::new();
        }
        let ids: Vec<usize> = self.incident[v].iter().copied().collect();
        match ids[..] {
            [id] => {
                let e = self.edges[id].unwrap();
                let u = e.other(v);
                let Some(tree) = self.with_far_hangs(&e, u, v) else {
                    return Vec::new();
                };
                self.remove(id);
                self.hangs[v].clear();
                self.hangs[u].push(tree);
                vec![u]
            }
            [i1, i2] => {
                let (e1, e2) = (self.edges[i1].unwrap(), self.edges[i2].unwrap());
                let (a, b) = (e1.other(v), e2.other(v));
                let hangs = std::mem::take(&mut self.hangs[v]);
                let mut through = |first: &SuperEdge, start: VertexId, second: &SuperEdge| {
                    let into = first.from(start)?;
                    let out = second.from(v)?;
                    let out = self.arena.hang(out, &hangs);
                    Some(self.arena.join(Op::Series, into, out))
                };
                let forward = through(&e1, a, &e2);
                let backward = through(&e2, b, &e1);
                self.remove(i1);
                self.remove(i2);
                self.add(SuperEdge { a, b, forward, backward });
                vec![a, b]
            }
            _ => Vec::new(),
        }
    }
}

/// Label-free reduction; returns the tree and its leaf-to-input-label map.
fn reduce(g: &Multigraph) -> Result<(DecompTree, Vec<u32>)> {
    let n = g.vertex_count();
    let mut r = Reducer {
        arena: Arena::default(),
        edges: Vec::new(),
        incident: vec![BTreeSet::new(); n],
        hangs: vec![Vec::new(); n],
        s: g.source(),
        t: g.sink(),
    };
    for (label, u, v) in g.edges() {
        let leaf = r.arena.leaf(label.get());
        r.add(SuperEdge { a: u, b: v, forward: Some(leaf), backward: Some(leaf) });
    }
    let mut queue: VecDeque<VertexId> = (0..n).collect();
    let mut queued = vec![true; n];
    while let Some(v) = queue.pop_front() {
        queued[v] = false;
        let mut touched = r.merge_parallel(v);
        touched.extend(r.eliminate(v));
        for w in touched {
            if !queued[w] {
                queued[w] = true;
                queue.push_back(w);
            }
        }
    }

    let fail = |why: String| Err(Error::Recognition(why));
    let live: Vec<usize> = (0..r.edges.len()).filter(|&i| r.edges[i].is_some()).collect();
    if live.len() != 1 {
        let stuck = (0..n).find(|&v| v != r.s && v != r.t && !r.incident[v].is_empty());
        return fail(match stuck {
            Some(v) => format!("no reduction applies at vertex {v} (degree {} after reduction)", r.incident[v].len()),
            None => format!("{} super-edges remain between the terminals", live.len()),
        });
    }
    if !r.hangs[r.t].is_empty() {
        return fail("a block hangs at the sink, which no tree can express".into());
    }
    let e = r.edges[live[0]].unwrap();
    let Some(core) = e.from(r.s) else {
        return fail("the remaining super-edge has no tree oriented from the source".into());
    };
    let hangs = std::mem::take(&mut r.hangs[r.s]);
    let root = r.arena.hang(core, &hangs);
    r.arena.finish(root)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(text: &str) -> Multigraph {
        Multigraph::parse(text).unwrap()
    }

    #[test]
    fn digon_is_parallel() {
        let g = graph("terminals 0 1\nedge 1 0 1\nedge 2 0 1\n");
        assert_eq!(recognize(&g).unwrap().to_string(), "P(B,B)");
    }

    #[test]
    fn triangle_in_any_labeling() {
        for text in [
            "terminals 0 1\nedge 1 0 1\nedge 2 0 2\nedge 3 2 1\n",
            "terminals 0 1\nedge 1 2 0\nedge 2 1 0\nedge 3 1 2\n",
            "terminals 5 9\nedge 3 5 9\nedge 1 7 9\nedge 2 5 7\n",
        ] {
            let g = graph(text);
            let tree = recognize(&g).unwrap();
            assert_eq!(tree.edge_count(), 3);
            assert_eq!(tree.realize().graph.vertex_count(), 3);
        }
    }

    #[test]
    fn realized_trees_round_trip() {
        for s in [
            "P(B,B)",
            "P(B,S(B,B))",
            "S(P(B,B),P(B,B))",
            "D(P(B,B),P(B,B))",
            "S(D(P(B,B),S(P(B,B),P(B,B))),P(B,S(B,B)))",
            "P(D(B,P(B,B)),S(B,D(B,P(B,B))))",
        ] {
            let t = DecompTree::parse(s).unwrap();
            let g = t.realize().graph;
            let back = recognize(&g).unwrap();
            assert_eq!(back.realize().graph, g, "{s} -> {back}");
        }
    }

    #[test]
    fn reduction_handles_relabelled_graphs() {
        // the round-trip corpus with labels reversed, so the interval search fails
        for s in ["S(P(B,B),P(B,B))", "D(P(B,B),S(P(B,B),P(B,B)))", "P(D(B,P(B,B)),S(B,B))"] {
            let g = DecompTree::parse(s).unwrap().realize().graph;
            let m = g.edge_count() as u32;
            let relabelled = Multigraph::from_labeled_edges(
                g.source() as u64,
                g.sink() as u64,
                g.edges().map(|(l, u, v)| (m + 1 - l.get(), u as u64, v as u64)),
            )
            .unwrap();
            let (tree, labels) = reduce(&relabelled).unwrap();
            check_realizes(&tree, &labels, &relabelled).unwrap();
            recognize(&relabelled).unwrap();
        }
    }

    #[test]
    fn k4_is_rejected() {
        let g = graph(
            "terminals 0 1\nedge 1 0 1\nedge 2 0 2\nedge 3 0 3\nedge 4 1 2\nedge 5 1 3\nedge 6 2 3\n",
        );
        assert!(matches!(recognize(&g), Err(Error::Recognition(_))));
    }

    #[test]
    fn sink_pendant_is_rejected() {
        // a digon hanging at the sink: not expressible with these operations
        let g = graph("terminals 0 1\nedge 1 0 1\nedge 2 0 1\nedge 3 1 2\nedge 4 1 2\n");
        assert!(matches!(recognize(&g), Err(Error::Recognition(_))));
    }

    #[test]
    fn check_rejects_wrong_trees() {
        let g = graph("terminals 0 1\nedge 1 0 1\nedge 2 0 2\nedge 3 2 1\n");
        let wrong = DecompTree::parse("P(B,P(B,B))").unwrap();
        assert!(check_realizes(&wrong, &[1, 2, 3], &g).is_err());
        let right = DecompTree::parse("P(B,S(B,B))").unwrap();
        check_realizes(&right, &[1, 2, 3], &g).unwrap();
        assert!(check_realizes(&right, &[1, 1, 3], &g).is_err());
    }
}
