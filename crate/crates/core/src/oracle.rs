//! Brute-force ground truth for small graphs.
//!
//! Nothing in here depends on decomposition trees or the counting recurrences:
//! tours are found by exhaustive walk extension and decompositions by
//! enumerating every pairing of edge ends at each non-terminal vertex.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigUint;
use num_traits::One;

use crate::error::{Error, Result};
use crate::graph::{EdgeLabel, Multigraph, VertexId};
use crate::trail::{Decomposition, Direction, EulerTour, Step, Trail};

pub const DEFAULT_BOUND: usize = 12;
/// No enumeration runs above this many edges, whatever bound is requested.
pub const HARD_CAP: usize = 14;

fn check_bound(g: &Multigraph, bound: usize) -> Result<()> {
    let bound = bound.min(HARD_CAP);
    if g.edge_count() > bound {
        return Err(Error::BoundExceeded {
            edges: g.edge_count(),
            bound,
        });
    }
    Ok(())
}

/// Distinct Euler tours up to rotation and reversal.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TourCensus {
    tours: BTreeSet<EulerTour>,
}

impl TourCensus {
    pub fn count(&self) -> usize {
        self.tours.len()
    }

    pub fn tours(&self) -> impl Iterator<Item = &EulerTour> {
        self.tours.iter()
    }

    pub fn contains(&self, tour: &EulerTour) -> bool {
        self.tours.contains(tour)
    }
}

/// Decompositions bucketed by their number of terminal-to-terminal paths.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DecompCensus {
    by_k: BTreeMap<usize, BTreeSet<Vec<Trail>>>,
}

impl DecompCensus {
    /// Number of decompositions with exactly `k` paths.
    pub fn gamma(&self, k: usize) -> usize {
        self.by_k.get(&k).map_or(0, |s| s.len())
    }

    pub fn signatures(&self, k: usize) -> impl Iterator<Item = &Vec<Trail>> {
        self.by_k.get(&k).into_iter().flatten()
    }

    /// `(k, signature)` for every decomposition.
    pub fn iter(&self) -> impl Iterator<Item = (usize, &Vec<Trail>)> {
        self.by_k
            .iter()
            .flat_map(|(&k, set)| set.iter().map(move |sig| (k, sig)))
    }

    pub fn total(&self) -> usize {
        self.by_k.values().map(|s| s.len()).sum()
    }

    /// Values of `k` with at least one decomposition.
    pub fn ks(&self) -> impl Iterator<Item = usize> + '_ {
        self.by_k.iter().filter(|(_, s)| !s.is_empty()).map(|(&k, _)| k)
    }
}

/// Every Euler tour, by extending walks from edge 1 in its stored orientation.
///
/// The anchor only prunes the search; class identity comes from the canonical
/// form, so a graph that is not Eulerian simply yields an empty census.
pub fn enumerate_tours(g: &Multigraph, bound: usize) -> Result<TourCensus> {
    check_bound(g, bound)?;
    let mut census = TourCensus::default();
    if !g.is_eulerian() {
        return Ok(census);
    }
    let inc = g.incidence();
    let m = g.edge_count();
    let first = Step::new(EdgeLabel::from_index(0), Direction::Forward);
    let mut used = vec![false; m];
    used[0] = true;
    let mut walk = vec![first];
    extend_walk(g, &inc, first.tail(g), first.head(g), &mut used, &mut walk, &mut census);
    Ok(census)
}

fn extend_walk(
    g: &Multigraph,
    inc: &[Vec<EdgeLabel>],
    home: VertexId,
    at: VertexId,
    used: &mut [bool],
    walk: &mut Vec<Step>,
    census: &mut TourCensus,
) {
    if walk.len() == used.len() {
        if at == home {
            census.tours.insert(EulerTour::new(walk.clone()));
        }
        return;
    }
    for &e in &inc[at] {
        if used[e.index()] {
            continue;
        }
        let step = Step::leaving(g, e, at);
        used[e.index()] = true;
        walk.push(step);
        extend_walk(g, inc, home, step.head(g), used, walk, census);
        walk.pop();
        used[e.index()] = false;
    }
}

/// Every (s,t)-decomposition of a legal graph.
///
/// A decomposition is fixed by how each trail pairs up edge ends at the
/// non-terminal vertices, so this walks all perfect pairings at every such
/// vertex, traces the trails from the terminals, and discards pairings that
/// leave a closed circuit avoiding both terminals.
pub fn enumerate_decompositions(g: &Multigraph, bound: usize) -> Result<DecompCensus> {
    check_bound(g, bound)?;
    let (s, t) = (g.source(), g.sink());
    let inc = g.incidence();
    let inner: Vec<VertexId> = (0..g.vertex_count()).filter(|&v| v != s && v != t).collect();
    let mut census = DecompCensus::default();
    if inner.iter().any(|&v| inc[v].len() % 2 == 1) {
        return Ok(census);
    }
    // mate[e][end]: the edge paired with e at its end `end` (0 = u, 1 = v)
    let mut mate = vec![[None::<EdgeLabel>; 2]; g.edge_count()];
    pair_vertices(g, &inc, &inner, 0, &mut mate, &mut census);
    Ok(census)
}

fn end_index(g: &Multigraph, e: EdgeLabel, v: VertexId) -> usize {
    usize::from(g.edge(e).0 != v)
}

fn pair_vertices(
    g: &Multigraph,
    inc: &[Vec<EdgeLabel>],
    inner: &[VertexId],
    next: usize,
    mate: &mut Vec<[Option<EdgeLabel>; 2]>,
    census: &mut DecompCensus,
) {
    if next == inner.len() {
        if let Some(d) = trace_trails(g, inc, mate) {
            census.by_k.entry(d.k()).or_default().insert(d.signature());
        }
        return;
    }
    let v = inner[next];
    pair_ends(&inc[v], &mut |mate_at_v: &[(EdgeLabel, EdgeLabel)]| {
        for &(a, b) in mate_at_v {
            mate[a.index()][end_index(g, a, v)] = Some(b);
            mate[b.index()][end_index(g, b, v)] = Some(a);
        }
        pair_vertices(g, inc, inner, next + 1, mate, census);
    });
}

/// Edge ends matched up at one vertex.
type Pairing = [(EdgeLabel, EdgeLabel)];

/// Calls `visit` once per perfect pairing of `free`.
fn pair_ends(
    free: &[EdgeLabel],
    visit: &mut dyn FnMut(&Pairing),
) {
    fn go(
        free: &[EdgeLabel],
        taken: &mut Vec<bool>,
        pairs: &mut Vec<(EdgeLabel, EdgeLabel)>,
        visit: &mut dyn FnMut(&Pairing),
    ) {
        let Some(first) = taken.iter().position(|&x| !x) else {
            visit(pairs);
            return;
        };
        taken[first] = true;
        for other in first + 1..free.len() {
            if taken[other] {
                continue;
            }
            taken[other] = true;
            pairs.push((free[first], free[other]));
            go(free, taken, pairs, visit);
            pairs.pop();
            taken[other] = false;
        }
        taken[first] = false;
    }
    let mut taken = vec![false; free.len()];
    go(free, &mut taken, &mut Vec::new(), visit);
}

fn trace_trails(
    g: &Multigraph,
    inc: &[Vec<EdgeLabel>],
    mate: &[[Option<EdgeLabel>; 2]],
) -> Option<Decomposition> {
    let (s, t) = (g.source(), g.sink());
    let mut used = vec![false; g.edge_count()];
    let mut trails = Vec::new();
    for terminal in [s, t] {
        for &e in &inc[terminal] {
            if used[e.index()] {
                continue;
            }
            let mut steps = Vec::new();
            let mut edge = e;
            let mut at = terminal;
            loop {
                used[edge.index()] = true;
                let step = Step::leaving(g, edge, at);
                steps.push(step);
                at = step.head(g);
                if at == s || at == t {
                    break;
                }
                edge = mate[edge.index()][end_index(g, edge, at)].expect("inner ends are paired");
            }
            trails.push(Trail::new(steps));
        }
    }
    if used.iter().any(|&u| !u) {
        return None;
    }
    Some(Decomposition::from_trails(g, s, t, trails).expect("traced trails are terminal trails"))
}

/// True iff `tour` is a closed walk in `g` using every edge exactly once.
pub fn validate_tour(g: &Multigraph, tour: &EulerTour) -> bool {
    let steps = tour.steps();
    if steps.len() != g.edge_count() {
        return false;
    }
    let mut seen = vec![false; g.edge_count()];
    for step in steps {
        let i = step.label.get() as usize;
        if i == 0 || i > seen.len() || std::mem::replace(&mut seen[i - 1], true) {
            return false;
        }
    }
    let n = steps.len();
    (0..n).all(|i| steps[i].head(g) == steps[(i + 1) % n].tail(g))
}

/// The unique decomposition consistent with a tour: cut the closed walk at
/// every visit to a terminal.
pub fn induced_decomposition(g: &Multigraph, tour: &EulerTour) -> Result<Decomposition> {
    let (s, t) = (g.source(), g.sink());
    let steps = tour.steps();
    let n = steps.len();
    let start = (0..n)
        .find(|&i| {
            let v = steps[i].tail(g);
            v == s || v == t
        })
        .ok_or_else(|| Error::Contract("tour avoids both terminals".into()))?;
    let mut trails = Vec::new();
    let mut current = Vec::new();
    for i in 0..n {
        let step = steps[(start + i) % n];
        current.push(step);
        let head = step.head(g);
        if head == s || head == t {
            trails.push(Trail::new(std::mem::take(&mut current)));
        }
    }
    Decomposition::from_trails(g, s, t, trails)
}

/// Tours per decomposition signature, from a tour census.
pub fn tours_per_decomposition(
    g: &Multigraph,
    census: &TourCensus,
) -> Result<BTreeMap<Vec<Trail>, usize>> {
    let mut counts = BTreeMap::new();
    for tour in census.tours() {
        *counts
            .entry(induced_decomposition(g, tour)?.signature())
            .or_insert(0) += 1;
    }
    Ok(counts)
}

fn factorial(n: u64) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, i| acc * i)
}

fn binomial(n: i64, r: i64) -> BigUint {
    if r < 0 || n < 0 || r > n {
        return BigUint::ZERO;
    }
    factorial(n as u64) / (factorial(r as u64) * factorial((n - r) as u64))
}

/// Tours consistent with one decomposition having `k` paths, as a count of
/// tuples (path order, loop orders, loop slot assignments, loop directions):
/// `(k-1)! ks! kt! C(ds/2-1, k/2-1) C(dt/2-1, k/2-1) 2^((ds+dt)/2-k)`.
pub fn consistent_tour_count(k: u32, ds: u32, dt: u32) -> BigUint {
    if k == 0 || k % 2 == 1 || ds % 2 == 1 || dt % 2 == 1 || k > ds || k > dt {
        return BigUint::ZERO;
    }
    let (k, ds, dt) = (k as i64, ds as i64, dt as i64);
    let source_loops = (ds - k) / 2;
    let sink_loops = (dt - k) / 2;
    factorial(k as u64 - 1)
        * factorial(source_loops as u64)
        * factorial(sink_loops as u64)
        * binomial(ds / 2 - 1, k / 2 - 1)
        * binomial(dt / 2 - 1, k / 2 - 1)
        * (BigUint::one() << ((ds + dt) / 2 - k) as usize)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(n: usize, edges: &[(usize, usize)]) -> Multigraph {
        Multigraph::new(n, 0, 1, edges.to_vec()).unwrap()
    }

    fn digon() -> Multigraph {
        graph(2, &[(0, 1), (0, 1)])
    }

    fn double_digon() -> Multigraph {
        graph(3, &[(0, 2), (0, 2), (2, 1), (2, 1)])
    }

    #[test]
    fn tour_counts() {
        assert_eq!(enumerate_tours(&digon(), 12).unwrap().count(), 1);
        assert_eq!(enumerate_tours(&graph(3, &[(0, 1), (0, 2), (2, 1)]), 12).unwrap().count(), 1);
        assert_eq!(enumerate_tours(&double_digon(), 12).unwrap().count(), 2);
        assert_eq!(enumerate_tours(&graph(2, &[(0, 1); 4]), 12).unwrap().count(), 6);
        // not Eulerian
        assert_eq!(enumerate_tours(&graph(2, &[(0, 1)]), 12).unwrap().count(), 0);
    }

    #[test]
    fn bound_is_enforced() {
        let big = graph(2, &[(0, 1); 16]);
        assert_eq!(
            enumerate_tours(&big, 12),
            Err(Error::BoundExceeded { edges: 16, bound: 12 })
        );
        assert_eq!(
            enumerate_decompositions(&big, 100),
            Err(Error::BoundExceeded { edges: 16, bound: HARD_CAP })
        );
    }

    #[test]
    fn decomposition_counts() {
        let d = enumerate_decompositions(&digon(), 12).unwrap();
        assert_eq!((d.gamma(0), d.gamma(2)), (0, 1));

        let dd = enumerate_decompositions(&double_digon(), 12).unwrap();
        assert_eq!((dd.gamma(0), dd.gamma(2)), (1, 2));

        let leaf = enumerate_decompositions(&graph(2, &[(0, 1)]), 12).unwrap();
        assert_eq!(leaf.gamma(1), 1);
        assert_eq!(leaf.total(), 1);

        let four = enumerate_decompositions(&graph(2, &[(0, 1); 4]), 12).unwrap();
        assert_eq!((four.gamma(0), four.gamma(2), four.gamma(4)), (0, 0, 1));
    }

    #[test]
    fn validation() {
        let g = digon();
        let s = |l, d| Step::new(EdgeLabel::new(l).unwrap(), d);
        assert!(validate_tour(&g, &EulerTour::new(vec![s(1, Direction::Forward), s(2, Direction::Backward)])));
        assert!(!validate_tour(&g, &EulerTour::new(vec![s(1, Direction::Forward), s(1, Direction::Backward)])));
        assert!(!validate_tour(&g, &EulerTour::new(vec![s(1, Direction::Forward), s(2, Direction::Forward)])));
        assert!(!validate_tour(&g, &EulerTour::new(vec![s(1, Direction::Forward)])));
    }

    #[test]
    fn tours_split_evenly_over_decompositions() {
        let g = double_digon();
        let census = enumerate_tours(&g, 12).unwrap();
        let per = tours_per_decomposition(&g, &census).unwrap();
        assert_eq!(per.len(), 2);
        assert!(per.values().all(|&n| n == 1));
        assert_eq!(consistent_tour_count(2, 2, 2), BigUint::one());
        assert_eq!(consistent_tour_count(4, 4, 4), BigUint::from(6u32));
        assert_eq!(consistent_tour_count(0, 4, 4), BigUint::ZERO);
    }
}
