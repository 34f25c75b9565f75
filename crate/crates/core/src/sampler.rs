//! Exactly uniform Euler-tour sampling.
//!
//! A draw picks the root path count `k`, then walks the tree top-down
//! choosing operand path counts with probability proportional to the
//! recurrence terms, then builds decompositions bottom-up by combining the
//! operands' decompositions with uniformly random tuples (orders, slot
//! compositions, loop directions), and finally threads the root
//! decomposition into a tour with one more uniform tuple.
//!
//! Each target object is hit by the same number of tuples, so the result is
//! uniform. All weights are big integers and every draw is an exact integer
//! draw; there is no floating point anywhere on this path.

use num_bigint::{BigUint, RandBigInt};
use num_traits::Zero;
use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::gamma::{
    build_tables, dangling_coefficient, middle_loop_degree, series_coefficient, Factorials,
    GammaTable, GammaTables,
};
use crate::graph::{Multigraph, VertexId};
use crate::trail::{Decomposition, Direction, EulerTour, Step, Trail};
use crate::tree::{leaf_label, DecompTree, Op, Realization};

/// Generator for sample number `index` of a batch seeded with `seed`.
///
/// Every sample gets its own ChaCha stream, so a batch is reproducible
/// sample by sample and can be split across threads.
pub fn sample_stream(seed: u64, index: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Index drawn with probability `weights[i] / sum(weights)`.
pub fn weighted_index<R: Rng + ?Sized>(weights: &[BigUint], rng: &mut R) -> Result<usize> {
    let total: BigUint = weights.iter().sum();
    if total.is_zero() {
        return Err(Error::Contract("all weights are zero".into()));
    }
    let mut r = rng.gen_biguint_below(&total);
    for (i, w) in weights.iter().enumerate() {
        if r < *w {
            return Ok(i);
        }
        r -= w;
    }
    unreachable!("draw below the total lands in some bucket")
}

/// Uniform permutation of `0..n`.
pub fn random_permutation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}

/// Uniform weak composition of `total` into `parts` ordered parts, by
/// choosing `parts - 1` bar positions among `total + parts - 1`.
pub fn random_composition<R: Rng + ?Sized>(total: usize, parts: usize, rng: &mut R) -> Vec<usize> {
    if parts == 0 {
        assert_eq!(total, 0, "cannot split a positive total into zero parts");
        return Vec::new();
    }
    let cells = total + parts - 1;
    let mut bars = index::sample(rng, cells, parts - 1).into_vec();
    bars.sort_unstable();
    let mut out = Vec::with_capacity(parts);
    let mut prev = 0;
    for &b in &bars {
        out.push(b - prev);
        prev = b + 1;
    }
    out.push(cells - prev);
    out
}

fn random_flips<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<bool> {
    (0..n).map(|_| rng.gen()).collect()
}

/// Draws the root path count `k >= 2` with probability proportional to
/// `(k-1)!/((k/2-1)!)^2 * 2^-k * gamma(k)`; the `2^-k` is cleared by a common
/// factor `2^kmax`.
pub fn sample_root_k<R: Rng + ?Sized>(table: &GammaTable, f: &Factorials, rng: &mut R) -> Result<u32> {
    let kmax = table.kappa().iter().last().unwrap_or(0);
    let mut ks = Vec::new();
    let mut weights = Vec::new();
    for (k, g) in table.support().filter(|&(k, _)| k >= 2 && k % 2 == 0) {
        let half = f.factorial(k / 2 - 1)?;
        let w = f.factorial(k - 1)? * f.pow2(kmax - k)? * g / (half * half);
        ks.push(k);
        weights.push(w);
    }
    if weights.iter().all(Zero::is_zero) {
        return Err(Error::NotEulerian("no Euler tour exists".into()));
    }
    Ok(ks[weighted_index(&weights, rng)?])
}

/// Operand path counts for a node with path count `k`.
///
/// Series: `(k1, k2)` both at least `k`, weighted by the series term.
/// Parallel: `(k1, k - k1)` weighted by `gamma1(k1) * gamma2(k - k1)`.
/// Dangling: `k1 = k`, `k2` weighted by the dangling term.
pub fn sample_split<R: Rng + ?Sized>(
    op: Op,
    left: &GammaTable,
    right: &GammaTable,
    k: u32,
    f: &Factorials,
    rng: &mut R,
) -> Result<(u32, u32)> {
    let mut options = Vec::new();
    let mut weights = Vec::new();
    match op {
        Op::Parallel => {
            for (k1, g1) in left.support().filter(|&(k1, _)| k1 <= k) {
                let g2 = right.get(k - k1);
                if !g2.is_zero() {
                    options.push((k1, k - k1));
                    weights.push(g1 * g2);
                }
            }
        }
        Op::Series => {
            let junction = left.sink_degree() + right.source_degree();
            for (k1, g1) in left.support().filter(|&(k1, _)| k1 >= k) {
                for (k2, g2) in right.support().filter(|&(k2, _)| k2 >= k) {
                    let c = series_coefficient(f, k, k1, k2, junction)?;
                    if !c.is_zero() {
                        options.push((k1, k2));
                        weights.push(g1 * g2 * c);
                    }
                }
            }
        }
        Op::Dangling => {
            if !left.get(k).is_zero() {
                for (k2, g2) in right.support() {
                    let c = dangling_coefficient(f, k2, right.sink_degree())?;
                    if !c.is_zero() {
                        options.push((k, k2));
                        weights.push(g2 * c);
                    }
                }
            }
        }
        Op::Leaf => return Err(Error::Contract("leaves have no split".into())),
    }
    if options.is_empty() {
        return Err(Error::Contract(format!("no decomposition with k = {k} to split")));
    }
    Ok(options[weighted_index(&weights, rng)?])
}

/// Random choices that turn a pair of operand decompositions into one
/// decomposition of the composed graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CombineTuple {
    Series {
        /// Order of the left operand's paths; the first `k` join through,
        /// the rest pair up consecutively into source loops.
        left_order: Vec<usize>,
        /// Order of the right operand's paths, same roles at the sink side.
        right_order: Vec<usize>,
        /// Middle loops placed at each pass through the join vertex.
        slot_counts: Vec<usize>,
        /// Placement order of the middle loops.
        loop_order: Vec<usize>,
        /// Reverse a middle loop (indexed by placement position).
        flips: Vec<bool>,
    },
    Dangling {
        /// Order of the dangling operand's paths; consecutive pairs close into loops.
        right_order: Vec<usize>,
        slot_counts: Vec<usize>,
        loop_order: Vec<usize>,
        flips: Vec<bool>,
    },
}

impl CombineTuple {
    /// Uniform series tuple for operands with `k1`, `k2` paths and `middle`
    /// middle loops.
    pub fn random_series<R: Rng + ?Sized>(k1: usize, k2: usize, middle: usize, rng: &mut R) -> Self {
        CombineTuple::Series {
            left_order: random_permutation(k1, rng),
            right_order: random_permutation(k2, rng),
            slot_counts: random_composition(middle, (k1 + k2) / 2, rng),
            loop_order: random_permutation(middle, rng),
            flips: random_flips(middle, rng),
        }
    }

    pub fn random_dangling<R: Rng + ?Sized>(k2: usize, sink_loops: usize, rng: &mut R) -> Self {
        CombineTuple::Dangling {
            right_order: random_permutation(k2, rng),
            slot_counts: random_composition(sink_loops, k2 / 2, rng),
            loop_order: random_permutation(sink_loops, rng),
            flips: random_flips(sink_loops, rng),
        }
    }
}

/// Random choices that thread a root decomposition into one Euler tour.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TourTuple {
    /// Order of the paths after the first one.
    pub path_order: Vec<usize>,
    pub source_loop_order: Vec<usize>,
    pub sink_loop_order: Vec<usize>,
    /// Source loops placed after each even-numbered path.
    pub source_slots: Vec<usize>,
    /// Sink loops placed after each odd-numbered path.
    pub sink_slots: Vec<usize>,
    /// Loop reversals: source loops first (placement order), then sink loops.
    pub flips: Vec<bool>,
}

impl TourTuple {
    pub fn random<R: Rng + ?Sized>(k: usize, source_loops: usize, sink_loops: usize, rng: &mut R) -> Self {
        TourTuple {
            path_order: random_permutation(k - 1, rng),
            source_loop_order: random_permutation(source_loops, rng),
            sink_loop_order: random_permutation(sink_loops, rng),
            source_slots: random_composition(source_loops, k / 2, rng),
            sink_slots: random_composition(sink_loops, k / 2, rng),
            flips: random_flips(source_loops + sink_loops, rng),
        }
    }
}

fn shape_error(what: &str) -> Error {
    Error::Contract(format!("{what} tuple does not match the decompositions"))
}

fn is_permutation(p: &[usize], n: usize) -> bool {
    let mut seen = vec![false; n];
    p.len() == n && p.iter().all(|&i| i < n && !std::mem::replace(&mut seen[i], true))
}

/// Loops in placement order with their chosen directions, split into slots.
fn place_loops(
    loops: &[Trail],
    order: &[usize],
    flips: &[bool],
    slots: &[usize],
) -> Vec<Vec<Step>> {
    let mut placed = order.iter().zip(flips).map(|(&i, &flip)| {
        if flip {
            loops[i].reversed()
        } else {
            loops[i].clone()
        }
    });
    slots
        .iter()
        .map(|&n| placed.by_ref().take(n).flat_map(Trail::into_steps).collect())
        .collect()
}

fn joined(a: Trail, middle: Vec<Step>, b: Trail) -> Trail {
    let mut steps = a.into_steps();
    steps.extend(middle);
    steps.extend(b.into_steps());
    Trail::new(steps).normalized()
}

/// Union of the operands' trails: parallel composition shares both terminals.
pub fn combine_parallel(left: Decomposition, right: Decomposition) -> Decomposition {
    let mut out = left;
    out.paths.extend(right.paths);
    out.source_loops.extend(right.source_loops);
    out.sink_loops.extend(right.sink_loops);
    out
}

/// Series join at vertex `junction`, producing `k` paths from `source` to `sink`.
///
/// The first `k` entries of each order are joined pairwise through the
/// junction; the remaining left paths pair up into source loops and the
/// remaining right paths into sink loops. The left operand's sink loops and
/// the right operand's source loops all sit at the junction and are spliced
/// into the passes through it.
pub fn combine_series(
    g: &Multigraph,
    (source, junction, sink): (VertexId, VertexId, VertexId),
    left: Decomposition,
    right: Decomposition,
    k: usize,
    tuple: &CombineTuple,
) -> Result<Decomposition> {
    let CombineTuple::Series {
        left_order,
        right_order,
        slot_counts,
        loop_order,
        flips,
    } = tuple
    else {
        return Err(shape_error("series"));
    };
    let (k1, k2) = (left.k(), right.k());
    let middle: Vec<Trail> = left.sink_loops.into_iter().chain(right.source_loops).collect();
    let shape_ok = k <= k1
        && k <= k2
        && (k1 - k) % 2 == 0
        && (k2 - k) % 2 == 0
        && is_permutation(left_order, k1)
        && is_permutation(right_order, k2)
        && is_permutation(loop_order, middle.len())
        && flips.len() == middle.len()
        && slot_counts.len() == (k1 + k2) / 2
        && slot_counts.iter().sum::<usize>() == middle.len();
    if !shape_ok {
        return Err(shape_error("series"));
    }
    let mut slots = place_loops(&middle, loop_order, flips, slot_counts).into_iter();
    let lp = |i: usize, from| left.paths[left_order[i]].starting_at(g, from);
    let rp = |i: usize, from| right.paths[right_order[i]].starting_at(g, from);

    let mut out = Decomposition {
        paths: Vec::with_capacity(k),
        source_loops: left.source_loops.clone(),
        sink_loops: right.sink_loops.clone(),
    };
    for i in 0..k {
        out.paths.push(joined(lp(i, source), slots.next().unwrap(), rp(i, junction)));
    }
    for i in (k..k1).step_by(2) {
        out.source_loops
            .push(joined(lp(i, source), slots.next().unwrap(), lp(i + 1, junction)));
    }
    for i in (k..k2).step_by(2) {
        out.sink_loops
            .push(joined(rp(i, sink), slots.next().unwrap(), rp(i + 1, junction)));
    }
    Ok(out)
}

/// Dangling join: the operand hanging at `source` (with far terminal
/// `far_sink`) turns its paths into source loops, pairing consecutive
/// entries of the order, and splices its sink loops into those new loops.
pub fn combine_dangling(
    g: &Multigraph,
    (source, far_sink): (VertexId, VertexId),
    left: Decomposition,
    right: Decomposition,
    tuple: &CombineTuple,
) -> Result<Decomposition> {
    let CombineTuple::Dangling {
        right_order,
        slot_counts,
        loop_order,
        flips,
    } = tuple
    else {
        return Err(shape_error("dangling"));
    };
    let k2 = right.k();
    let shape_ok = k2 % 2 == 0
        && is_permutation(right_order, k2)
        && is_permutation(loop_order, right.sink_loops.len())
        && flips.len() == right.sink_loops.len()
        && slot_counts.len() == k2 / 2
        && slot_counts.iter().sum::<usize>() == right.sink_loops.len();
    if !shape_ok {
        return Err(shape_error("dangling"));
    }
    let mut slots = place_loops(&right.sink_loops, loop_order, flips, slot_counts).into_iter();
    let mut out = left;
    out.source_loops.extend(right.source_loops);
    for pair in right_order.chunks(2) {
        let a = right.paths[pair[0]].starting_at(g, source);
        let b = right.paths[pair[1]].starting_at(g, far_sink);
        out.source_loops.push(joined(a, slots.next().unwrap(), b));
    }
    Ok(out)
}

/// Threads a root decomposition into an Euler tour.
///
/// The path whose source-side edge has the lowest label goes first, from
/// source to sink; the others follow in `path_order`, alternating direction.
/// Source loops go after even-numbered paths and sink loops after
/// odd-numbered ones, as counted by the slot vectors.
pub fn decomposition_to_tour(
    g: &Multigraph,
    (source, sink): (VertexId, VertexId),
    decomposition: &Decomposition,
    tuple: &TourTuple,
) -> Result<EulerTour> {
    let k = decomposition.k();
    let (ks, kt) = (decomposition.source_loops.len(), decomposition.sink_loops.len());
    if k < 2 || k % 2 == 1 {
        return Err(Error::Contract(format!("cannot thread a tour through {k} paths")));
    }
    let shape_ok = is_permutation(&tuple.path_order, k - 1)
        && is_permutation(&tuple.source_loop_order, ks)
        && is_permutation(&tuple.sink_loop_order, kt)
        && tuple.source_slots.len() == k / 2
        && tuple.sink_slots.len() == k / 2
        && tuple.source_slots.iter().sum::<usize>() == ks
        && tuple.sink_slots.iter().sum::<usize>() == kt
        && tuple.flips.len() == ks + kt;
    if !shape_ok {
        return Err(shape_error("tour"));
    }
    let oriented: Vec<Trail> = decomposition
        .paths
        .iter()
        .map(|p| p.starting_at(g, source))
        .collect();
    let first = (0..k)
        .min_by_key(|&i| oriented[i].steps()[0].label)
        .expect("k >= 2");
    let others: Vec<usize> = (0..k).filter(|&i| i != first).collect();
    let order = std::iter::once(first).chain(tuple.path_order.iter().map(|&j| others[j]));

    let mut source_slots = place_loops(
        &decomposition.source_loops,
        &tuple.source_loop_order,
        &tuple.flips[..ks],
        &tuple.source_slots,
    )
    .into_iter();
    let mut sink_slots = place_loops(
        &decomposition.sink_loops,
        &tuple.sink_loop_order,
        &tuple.flips[ks..],
        &tuple.sink_slots,
    )
    .into_iter();

    let mut steps = Vec::with_capacity(g.edge_count());
    for (position, path) in order.enumerate() {
        if position % 2 == 0 {
            steps.extend_from_slice(oriented[path].steps());
            steps.extend(sink_slots.next().unwrap());
        } else {
            steps.extend(oriented[path].reversed().into_steps());
            steps.extend(source_slots.next().unwrap());
        }
    }
    debug_assert!(oriented.iter().all(|p| p.end(g) == sink));
    debug_assert_eq!(steps.last().map(|s| s.head(g)), Some(source));
    Ok(EulerTour::new(steps))
}

/// Draws uniform decompositions and tours for one tree.
#[derive(Debug)]
pub struct Sampler<'t> {
    tree: &'t DecompTree,
    tables: GammaTables,
    realization: Realization,
    validate: bool,
}

impl<'t> Sampler<'t> {
    /// Builds the tables; the tree must be legal and Eulerian.
    pub fn new(tree: &'t DecompTree) -> Result<Self> {
        let tables = build_tables(tree)?;
        if !tree.root_node().has_even_terminals() {
            return Err(Error::NotEulerian("no Euler tour exists".into()));
        }
        Ok(Sampler {
            tree,
            tables,
            realization: tree.realize(),
            validate: false,
        })
    }

    /// Re-check every intermediate decomposition (edge partition, trail
    /// kinds, trail count) while sampling.
    pub fn with_validation(mut self, on: bool) -> Self {
        self.validate = on;
        self
    }

    pub fn graph(&self) -> &Multigraph {
        &self.realization.graph
    }

    pub fn tables(&self) -> &GammaTables {
        &self.tables
    }

    /// One uniformly random Euler tour.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<EulerTour> {
        let k = sample_root_k(self.tables.root(), self.tables.factorials(), rng)?;
        let decomposition = self.sample_decomposition(k, rng)?;
        let tuple = TourTuple::random(
            k as usize,
            decomposition.source_loops.len(),
            decomposition.sink_loops.len(),
            rng,
        );
        let root = self.tree.root();
        decomposition_to_tour(self.graph(), self.realization.terminals[root], &decomposition, &tuple)
    }

    /// A uniformly random root decomposition with exactly `k` paths.
    pub fn sample_decomposition<R: Rng + ?Sized>(&self, k: u32, rng: &mut R) -> Result<Decomposition> {
        let nodes = self.tree.nodes();
        let f = self.tables.factorials();
        if self.tables.root().get(k).is_zero() {
            return Err(Error::Contract(format!("no decomposition has k = {k}")));
        }
        let mut ks = vec![0u32; nodes.len()];
        ks[self.tree.root()] = k;
        for id in (0..nodes.len()).rev() {
            if let Some((l, r)) = nodes[id].children() {
                let (k1, k2) = sample_split(
                    nodes[id].op(),
                    self.tables.node(l),
                    self.tables.node(r),
                    ks[id],
                    f,
                    rng,
                )?;
                ks[l] = k1;
                ks[r] = k2;
            }
        }

        let g = self.graph();
        let terminals = &self.realization.terminals;
        let mut built: Vec<Option<Decomposition>> = vec![None; nodes.len()];
        for (id, node) in nodes.iter().enumerate() {
            let decomposition = match node.children() {
                None => {
                    let label = leaf_label(self.tree, id).expect("leaf");
                    Decomposition {
                        paths: vec![Trail::new(vec![Step::new(label, Direction::Forward)])],
                        ..Decomposition::default()
                    }
                }
                Some((l, r)) => {
                    let left = built[l].take().expect("left operand built");
                    let right = built[r].take().expect("right operand built");
                    match node.op() {
                        Op::Parallel => combine_parallel(left, right),
                        Op::Series => {
                            let (ln, rn) = (&nodes[l], &nodes[r]);
                            let middle = middle_loop_degree(
                                ln.sink_degree(),
                                rn.source_degree(),
                                ks[l],
                                ks[r],
                            )? / 2;
                            let tuple = CombineTuple::random_series(
                                ks[l] as usize,
                                ks[r] as usize,
                                middle as usize,
                                rng,
                            );
                            let (s, j) = terminals[l];
                            let t = terminals[r].1;
                            combine_series(g, (s, j, t), left, right, ks[id] as usize, &tuple)?
                        }
                        Op::Dangling => {
                            let tuple =
                                CombineTuple::random_dangling(right.k(), right.sink_loops.len(), rng);
                            combine_dangling(g, terminals[r], left, right, &tuple)?
                        }
                        Op::Leaf => unreachable!(),
                    }
                }
            };
            if decomposition.k() != ks[id] as usize {
                return Err(Error::Contract(format!(
                    "node {id}: built {} paths, wanted {}",
                    decomposition.k(),
                    ks[id]
                )));
            }
            if self.validate {
                let (s, t) = terminals[id];
                decomposition.validate(
                    g,
                    s,
                    t,
                    node.labels(),
                    (node.source_degree(), node.sink_degree()),
                )?;
            }
            built[id] = Some(decomposition);
        }
        Ok(built.pop().flatten().expect("root built"))
    }
}

/// One tour drawn with sample stream 0 of `seed`.
pub fn sample_tour(tree: &DecompTree, seed: u64) -> Result<EulerTour> {
    Sampler::new(tree)?.sample(&mut sample_stream(seed, 0))
}

/// `n` tours; tour `i` uses sample stream `i` of `seed`.
pub fn sample_tours(tree: &DecompTree, seed: u64, n: usize) -> Result<Vec<EulerTour>> {
    let sampler = Sampler::new(tree)?;
    (0..n as u64)
        .map(|i| sampler.sample(&mut sample_stream(seed, i)))
        .collect()
}
