//! Tree generators for tests and benchmarks.

use rand::Rng;

use crate::error::{Error, Result};
use crate::tree::{DecompTree, Op, TreeBuilder};

/// Every tree string with exactly `leaves` leaves: all binary shapes times
/// all operator assignments.
pub fn all_tree_strings(leaves: usize) -> Vec<String> {
    let mut by_size: Vec<Vec<String>> = vec![Vec::new(), vec!["B".to_string()]];
    for n in 2..=leaves {
        let mut here = Vec::new();
        for left in 1..n {
            for l in &by_size[left] {
                for r in &by_size[n - left] {
                    for op in ['S', 'P', 'D'] {
                        here.push(format!("{op}({l},{r})"));
                    }
                }
            }
        }
        by_size.push(here);
    }
    by_size.swap_remove(leaves)
}

/// All legal trees with Eulerian roots and at most `max_leaves` leaves.
pub fn legal_eulerian_trees(max_leaves: usize) -> Vec<DecompTree> {
    (1..=max_leaves)
        .flat_map(all_tree_strings)
        .map(|s| DecompTree::parse(&s).expect("generated strings parse"))
        .filter(|t| t.check_legal().is_legal() && t.is_eulerian())
        .collect()
}

#[derive(Clone, Copy)]
struct Part {
    id: usize,
    source: u32,
    sink: u32,
}

impl Part {
    fn even(&self) -> bool {
        self.source % 2 == 0 && self.sink % 2 == 0
    }
}

/// Legal compositions of `a` and `b` (in either order) within the degree cap.
///
/// Terminal degrees are held to half the cap so that two parts of the same
/// parity class can always be joined in series.
fn feasible(a: Part, b: Part, cap: u32) -> Vec<(Op, bool)> {
    let half = cap / 2;
    let mut out = Vec::new();
    for (x, y, swapped) in [(a, b, false), (b, a, true)] {
        let series = x.sink % 2 == y.source % 2 && x.sink + y.source <= cap;
        if series {
            out.push((Op::Series, swapped));
        }
        if y.even() && x.source + y.source <= half {
            out.push((Op::Dangling, swapped));
        }
    }
    if a.source + b.source <= half && a.sink + b.sink <= half {
        out.push((Op::Parallel, false));
    }
    out
}

/// A random legal tree with an Eulerian root, `edges` leaves and every
/// vertex degree at most `max_degree` (at least 4).
///
/// Subtrees are merged pairwise from a pool of leaves, choosing a random
/// pair and a random legal operation each time, which keeps the depth
/// logarithmic in expectation. The last two merges are steered towards an
/// Eulerian root; draws that still miss are retried.
pub fn random_tree<R: Rng + ?Sized>(edges: usize, max_degree: u32, rng: &mut R) -> Result<DecompTree> {
    if edges < 2 || max_degree < 4 {
        return Err(Error::Contract("need at least 2 edges and degree cap at least 4".into()));
    }
    for _ in 0..1000 {
        if let Some(tree) = attempt(edges, max_degree, rng)? {
            if tree.is_eulerian() {
                return Ok(tree);
            }
        }
    }
    Err(Error::Contract(format!(
        "no Eulerian tree with {edges} edges and degree cap {max_degree} found"
    )))
}

fn merged(op: Op, x: Part, y: Part, id: usize) -> Part {
    let (source, sink) = match op {
        Op::Series => (x.source, y.sink),
        Op::Parallel => (x.source + y.source, x.sink + y.sink),
        Op::Dangling => (x.source + y.source, x.sink),
        Op::Leaf => unreachable!(),
    };
    Part { id, source, sink }
}

/// Candidate merges `(i, j, op)` where `pool[i]` is the left operand.
fn candidates(pool: &[Part], i: usize, j: usize, cap: u32) -> Vec<(usize, usize, Op)> {
    feasible(pool[i], pool[j], cap)
        .into_iter()
        .map(|(op, swapped)| if swapped { (j, i, op) } else { (i, j, op) })
        .collect()
}

/// Merges that finish with an Eulerian root; the degree cap applies in full.
fn finishing(pool: &[Part], cap: u32) -> Vec<(usize, usize, Op)> {
    let mut out = Vec::new();
    for (i, j) in [(0, 1), (1, 0)] {
        let (x, y) = (pool[i], pool[j]);
        let mut ops = Vec::new();
        if x.sink % 2 == y.source % 2 && x.sink + y.source <= cap {
            ops.push(Op::Series);
        }
        if y.even() && x.source + y.source <= cap {
            ops.push(Op::Dangling);
        }
        if i == 0 && x.source + y.source <= cap && x.sink + y.sink <= cap {
            ops.push(Op::Parallel);
        }
        out.extend(ops.into_iter().filter(|&op| merged(op, x, y, 0).even()).map(|op| (i, j, op)));
    }
    out
}

fn attempt<R: Rng + ?Sized>(edges: usize, cap: u32, rng: &mut R) -> Result<Option<DecompTree>> {
    let mut builder = TreeBuilder::new();
    let mut pool: Vec<Part> = (0..edges)
        .map(|_| Part { id: builder.leaf(), source: 1, sink: 1 })
        .collect();
    let mut misses = 0;
    while pool.len() > 1 {
        let options = match pool.len() {
            2 => finishing(&pool, cap),
            // leave two parts of the same parity class, which can always finish
            3 => (0..3)
                .flat_map(|i| (0..3).filter(move |&j| j > i).map(move |j| (i, j)))
                .flat_map(|(i, j)| candidates(&pool, i, j, cap))
                .filter(|&(x, y, op)| {
                    let rest = pool[3 - x - y];
                    merged(op, pool[x], pool[y], 0).even() == rest.even()
                })
                .collect(),
            n => {
                let i = rng.gen_range(0..n);
                let mut j = rng.gen_range(0..n - 1);
                if j >= i {
                    j += 1;
                }
                candidates(&pool, i, j, cap)
            }
        };
        if options.is_empty() {
            misses += 1;
            if pool.len() <= 3 || misses > 100 * pool.len() {
                return Ok(None);
            }
            continue;
        }
        misses = 0;
        let (x, y, op) = options[rng.gen_range(0..options.len())];
        let part = merged(op, pool[x], pool[y], builder.join(op, pool[x].id, pool[y].id));
        let (hi, lo) = if x > y { (x, y) } else { (y, x) };
        pool.swap_remove(hi);
        pool[lo] = part;
    }
    let tree = builder.finish(pool[0].id)?;
    debug_assert!(tree.check_legal().is_legal());
    Ok(Some(tree))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::sample_stream;

    #[test]
    fn shape_counts() {
        // Catalan(n - 1) shapes times 3^(n - 1) operator assignments
        let counts: Vec<usize> = (1..=5).map(|n| all_tree_strings(n).len()).collect();
        assert_eq!(counts, vec![1, 3, 18, 135, 1134]);
    }

    #[test]
    fn small_legal_eulerian_trees() {
        let trees = legal_eulerian_trees(3);
        let names: Vec<String> = trees.iter().map(|t| t.to_string()).collect();
        assert!(names.contains(&"P(B,B)".to_string()));
        assert!(names.contains(&"P(B,S(B,B))".to_string()));
        assert!(!names.contains(&"D(B,B)".to_string()));
    }

    #[test]
    fn random_trees_respect_the_cap() {
        let mut rng = sample_stream(2024, 0);
        for (m, cap) in [(2, 8), (3, 8), (10, 8), (200, 8), (3000, 8), (221, 6), (300, 4)] {
            let t = random_tree(m, cap, &mut rng).unwrap();
            assert_eq!(t.edge_count(), m);
            assert!(t.check_legal().is_legal());
            assert!(t.is_eulerian());
            assert!(t.max_degree() <= cap, "{}", t.max_degree());
            assert!(t.realize().graph.max_degree() <= cap);
        }
    }

    #[test]
    fn random_trees_are_seeded() {
        let a = random_tree(50, 6, &mut sample_stream(1, 0)).unwrap();
        let b = random_tree(50, 6, &mut sample_stream(1, 0)).unwrap();
        assert_eq!(a, b);
    }
}
