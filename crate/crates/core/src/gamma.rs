//! Bottom-up decomposition counts and the Euler-tour count.
//!
//! For every tree node `u` and every feasible path count `k`, `gamma(u, k)`
//! is the number of (s,t)-decompositions of the node's subgraph with exactly
//! `k` terminal-to-terminal paths. Leaves, parallel, series and dangling
//! nodes each have their own recurrence; the tour count is a weighted sum
//! over the root's table.
//!
//! Every series and dangling term is a count of decompositions, hence a
//! non-negative integer, but the closed forms are ratios with 2-powers that
//! can have negative exponents. Each term is therefore evaluated as an exact
//! quotient and rejected if the division leaves a remainder.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::tree::{DecompTree, NodeId, Op};

/// Feasible path counts: `0 <= k <= min(ds, dt)` with `k` of the parity of `ds`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KappaSet {
    parity: u32,
    max: u32,
}

impl KappaSet {
    pub fn new(source_degree: u32, sink_degree: u32) -> Self {
        KappaSet {
            parity: source_degree % 2,
            max: source_degree.min(sink_degree),
        }
    }

    pub fn contains(&self, k: u32) -> bool {
        k % 2 == self.parity && k <= self.max
    }

    pub fn len(&self) -> usize {
        if self.max < self.parity {
            0
        } else {
            ((self.max - self.parity) / 2 + 1) as usize
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Members in ascending order.
    pub fn iter(self) -> impl Iterator<Item = u32> + Clone {
        (0..self.len() as u32).map(move |i| self.parity + 2 * i)
    }

    fn slot(&self, k: u32) -> Option<usize> {
        self.contains(k).then(|| ((k - self.parity) / 2) as usize)
    }
}

/// `gamma(u, k)` for every `k` in the node's kappa set, stored densely in
/// ascending `k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GammaTable {
    source_degree: u32,
    sink_degree: u32,
    kappa: KappaSet,
    values: Vec<BigUint>,
}

impl GammaTable {
    fn zeros(source_degree: u32, sink_degree: u32) -> Self {
        let kappa = KappaSet::new(source_degree, sink_degree);
        GammaTable {
            source_degree,
            sink_degree,
            kappa,
            values: vec![BigUint::ZERO; kappa.len()],
        }
    }

    /// Table from explicit `(k, gamma)` pairs; `k` outside kappa is rejected.
    pub fn from_values(
        source_degree: u32,
        sink_degree: u32,
        values: impl IntoIterator<Item = (u32, BigUint)>,
    ) -> Result<Self> {
        let mut table = GammaTable::zeros(source_degree, sink_degree);
        for (k, v) in values {
            let slot = table
                .kappa
                .slot(k)
                .ok_or_else(|| Error::Contract(format!("k = {k} is not feasible")))?;
            table.values[slot] = v;
        }
        Ok(table)
    }

    pub fn source_degree(&self) -> u32 {
        self.source_degree
    }

    pub fn sink_degree(&self) -> u32 {
        self.sink_degree
    }

    pub fn kappa(&self) -> KappaSet {
        self.kappa
    }

    /// `gamma(k)`, zero outside the kappa set.
    pub fn get(&self, k: u32) -> &BigUint {
        match self.kappa.slot(k) {
            Some(i) => &self.values[i],
            None => &BigUint::ZERO,
        }
    }

    /// `(k, gamma(k))` over the kappa set, ascending.
    pub fn iter(&self) -> impl Iterator<Item = (u32, &BigUint)> {
        self.kappa.iter().zip(&self.values)
    }

    /// Nonzero entries only.
    pub fn support(&self) -> impl Iterator<Item = (u32, &BigUint)> {
        self.iter().filter(|(_, v)| !v.is_zero())
    }

    pub fn bits(&self) -> u64 {
        self.values.iter().map(|v| v.bits()).sum()
    }

    pub(crate) fn values_mut(&mut self) -> &mut [BigUint] {
        &mut self.values
    }
}

/// Factorials and powers of two up to a fixed bound.
#[derive(Clone, Debug)]
pub struct Factorials {
    factorial: Vec<BigUint>,
    pow2: Vec<BigUint>,
}

impl Factorials {
    pub fn new(max: u32) -> Self {
        let mut factorial = vec![BigUint::one()];
        let mut pow2 = vec![BigUint::one()];
        for j in 1..=max as usize {
            factorial.push(&factorial[j - 1] * j);
            pow2.push(&pow2[j - 1] << 1u32);
        }
        Factorials { factorial, pow2 }
    }

    pub fn max(&self) -> u32 {
        self.factorial.len() as u32 - 1
    }

    pub fn factorial(&self, n: u32) -> Result<&BigUint> {
        self.factorial
            .get(n as usize)
            .ok_or_else(|| Error::Arithmetic(format!("{n}! exceeds the precomputed range")))
    }

    pub fn pow2(&self, n: u32) -> Result<&BigUint> {
        self.pow2
            .get(n as usize)
            .ok_or_else(|| Error::Arithmetic(format!("2^{n} exceeds the precomputed range")))
    }
}

/// Exact `numerator / denominator`, failing on a remainder.
fn exact_quotient(numerator: BigUint, denominator: &BigUint, what: impl FnOnce() -> String) -> Result<BigUint> {
    let (q, r) = numerator.div_rem(denominator);
    if r.is_zero() {
        Ok(q)
    } else {
        Err(Error::Arithmetic(format!("{} is not an integer", what())))
    }
}

/// Multiplies `2^exponent` into the numerator or the denominator.
fn apply_pow2(
    numerator: &mut BigUint,
    denominator: &mut BigUint,
    exponent: i64,
    f: &Factorials,
) -> Result<()> {
    if exponent >= 0 {
        *numerator *= f.pow2(exponent as u32)?;
    } else {
        *denominator *= f.pow2((-exponent) as u32)?;
    }
    Ok(())
}

/// Degree left at a series join once `k1` and `k2` path ends are spent:
/// `d1(t) + d2(s') - k1 - k2`. It counts the ends of middle loops.
pub fn middle_loop_degree(left_sink: u32, right_source: u32, k1: u32, k2: u32) -> Result<u32> {
    (left_sink + right_source)
        .checked_sub(k1 + k2)
        .ok_or_else(|| {
            Error::Contract(format!(
                "middle loop degree negative: {left_sink} + {right_source} - {k1} - {k2}"
            ))
        })
}

/// Number of decompositions with `k` paths built from one fixed pair of
/// operand decompositions with `k1` and `k2` paths, at a series join of
/// degree `junction = d1(t) + d2(s')`:
///
/// `k1! k2! / (k! ((k1-k)/2)! ((k2-k)/2)!) * (junction/2 - 1)! / ((k1+k2)/2 - 1)!
///  * 2^(junction/2 - (k1 + k2 - k))`
///
/// Zero when `k1 = k2 = 0` (no join occurrence to hang the middle loops on).
pub fn series_coefficient(f: &Factorials, k: u32, k1: u32, k2: u32, junction: u32) -> Result<BigUint> {
    if k1 < k || k2 < k || (k1 - k) % 2 == 1 || (k2 - k) % 2 == 1 {
        return Err(Error::Contract(format!(
            "series split ({k1}, {k2}) infeasible for k = {k}"
        )));
    }
    middle_loop_degree(junction, 0, k1, k2)?;
    if k1 + k2 == 0 {
        return Ok(BigUint::ZERO);
    }
    let mut numerator = f.factorial(k1)? * f.factorial(k2)? * f.factorial(junction / 2 - 1)?;
    let mut denominator = f.factorial(k)?
        * f.factorial((k1 - k) / 2)?
        * f.factorial((k2 - k) / 2)?
        * f.factorial((k1 + k2) / 2 - 1)?;
    let exponent = (junction / 2) as i64 - (k1 + k2) as i64 + k as i64;
    apply_pow2(&mut numerator, &mut denominator, exponent, f)?;
    exact_quotient(numerator, &denominator, || {
        format!("series term (k={k}, k1={k1}, k2={k2}, junction={junction})")
    })
}

/// Number of decompositions built from one fixed pair of decompositions when
/// an Eulerian operand with `k2` paths and sink degree `right_sink` dangles
/// from the source:
///
/// `k2! / ((k2/2)! (k2/2 - 1)!) * (right_sink/2 - 1)! * 2^(right_sink/2 - k2)`
///
/// Zero when `k2 = 0`: the operand's sink loops would have nowhere to attach.
pub fn dangling_coefficient(f: &Factorials, k2: u32, right_sink: u32) -> Result<BigUint> {
    if k2 % 2 == 1 || right_sink % 2 == 1 || k2 > right_sink {
        return Err(Error::Contract(format!(
            "dangling operand with k2 = {k2}, sink degree {right_sink} is not Eulerian-feasible"
        )));
    }
    if k2 == 0 {
        return Ok(BigUint::ZERO);
    }
    let mut numerator = f.factorial(k2)? * f.factorial(right_sink / 2 - 1)?;
    let mut denominator = f.factorial(k2 / 2)? * f.factorial(k2 / 2 - 1)?;
    let exponent = (right_sink / 2) as i64 - k2 as i64;
    apply_pow2(&mut numerator, &mut denominator, exponent, f)?;
    exact_quotient(numerator, &denominator, || {
        format!("dangling term (k2={k2}, sink degree={right_sink})")
    })
}

/// The single-edge table: `gamma(1) = 1`.
pub fn gamma_leaf() -> GammaTable {
    let mut table = GammaTable::zeros(1, 1);
    table.values[0] = BigUint::one();
    table
}

pub fn gamma_parallel(left: &GammaTable, right: &GammaTable, k: u32) -> BigUint {
    let mut sum = BigUint::ZERO;
    for (k1, g1) in left.support() {
        if k1 > k {
            break;
        }
        let g2 = right.get(k - k1);
        if !g2.is_zero() {
            sum += g1 * g2;
        }
    }
    sum
}

pub fn gamma_series(left: &GammaTable, right: &GammaTable, k: u32, f: &Factorials) -> Result<BigUint> {
    let junction = left.sink_degree + right.source_degree;
    let mut sum = BigUint::ZERO;
    for (k1, g1) in left.support().filter(|&(k1, _)| k1 >= k) {
        for (k2, g2) in right.support().filter(|&(k2, _)| k2 >= k) {
            let c = series_coefficient(f, k, k1, k2, junction)?;
            if !c.is_zero() {
                sum += g1 * g2 * c;
            }
        }
    }
    Ok(sum)
}

/// Sum over the dangling operand's table; independent of `k`.
pub fn dangling_factor(right: &GammaTable, f: &Factorials) -> Result<BigUint> {
    let mut sum = BigUint::ZERO;
    for (k2, g2) in right.support() {
        sum += g2 * dangling_coefficient(f, k2, right.sink_degree)?;
    }
    Ok(sum)
}

pub fn gamma_dangling(left: &GammaTable, right: &GammaTable, k: u32, f: &Factorials) -> Result<BigUint> {
    let g1 = left.get(k);
    if g1.is_zero() {
        return Ok(BigUint::ZERO);
    }
    Ok(g1 * dangling_factor(right, f)?)
}

/// Euler tours per decomposition with `k` paths, summed into the count:
/// `(k-1)! / ((k/2-1)!)^2 * 2^((ds+dt)/2 - k) * (ds/2-1)! * (dt/2-1)!`,
/// and zero for `k = 0`.
pub fn tour_weight(k: u32, ds: u32, dt: u32, f: &Factorials) -> Result<BigUint> {
    if k % 2 == 1 || ds % 2 == 1 || dt % 2 == 1 || ds < 2 || dt < 2 || k > ds.min(dt) {
        return Err(Error::NotEulerian(format!(
            "tour weight needs even k <= min(ds, dt) and even terminal degrees, got k={k}, ds={ds}, dt={dt}"
        )));
    }
    if k == 0 {
        return Ok(BigUint::ZERO);
    }
    let half = f.factorial(k / 2 - 1)?;
    let numerator = f.factorial(k - 1)?
        * f.pow2((ds + dt) / 2 - k)?
        * f.factorial(ds / 2 - 1)?
        * f.factorial(dt / 2 - 1)?;
    exact_quotient(numerator, &(half * half), || format!("tour weight (k={k})"))
}

/// Tables for every node of a tree, plus the factorials they were built with.
#[derive(Clone, Debug)]
pub struct GammaTables {
    tables: Vec<GammaTable>,
    factorials: Factorials,
}

impl GammaTables {
    pub fn node(&self, id: NodeId) -> &GammaTable {
        &self.tables[id]
    }

    pub fn root(&self) -> &GammaTable {
        self.tables.last().expect("non-empty tree")
    }

    pub fn factorials(&self) -> &Factorials {
        &self.factorials
    }

    /// Total bits over all stored values.
    pub fn footprint_bits(&self) -> u64 {
        self.tables.iter().map(GammaTable::bits).sum()
    }

    /// Test hook: overwrite one stored value.
    #[doc(hidden)]
    pub fn corrupt(&mut self, node: NodeId, k: u32, value: BigUint) -> Result<()> {
        let table = &mut self.tables[node];
        let slot = table
            .kappa
            .slot(k)
            .ok_or_else(|| Error::Contract(format!("k = {k} not feasible")))?;
        table.values_mut()[slot] = value;
        Ok(())
    }

    /// Eulerian tour count from the root table.
    pub fn count_tours(&self) -> Result<BigUint> {
        let root = self.root();
        let (ds, dt) = (root.source_degree, root.sink_degree);
        if ds % 2 == 1 || dt % 2 == 1 {
            return Err(Error::NotEulerian(format!(
                "graph admits no Euler tour count (terminal degrees {ds}, {dt})"
            )));
        }
        let mut total = BigUint::ZERO;
        for (k, g) in root.support() {
            total += tour_weight(k, ds, dt, &self.factorials)? * g;
        }
        Ok(total)
    }
}

/// Computes every node's table bottom-up. The tree must be legal.
pub fn build_tables(tree: &DecompTree) -> Result<GammaTables> {
    let report = tree.check_legal();
    if let Some((node, why)) = report.first_failure() {
        return Err(Error::Illegal(format!("node {node}: {why}")));
    }
    let factorials = Factorials::new(tree.max_degree().max(2));
    let mut series_cache: HashMap<(u32, u32, u32, u32), BigUint> = HashMap::new();
    let mut tables: Vec<GammaTable> = Vec::with_capacity(tree.nodes().len());
    for node in tree.nodes() {
        let table = match node.children() {
            None => gamma_leaf(),
            Some((l, r)) => {
                let (left, right) = (&tables[l], &tables[r]);
                let mut table = GammaTable::zeros(node.source_degree(), node.sink_degree());
                let kappa = table.kappa;
                match node.op() {
                    Op::Parallel => {
                        for (slot, k) in kappa.iter().enumerate() {
                            table.values[slot] = gamma_parallel(left, right, k);
                        }
                    }
                    Op::Series => {
                        series_into(&mut table, left, right, &factorials, &mut series_cache)?;
                    }
                    Op::Dangling => {
                        let factor = dangling_factor(right, &factorials)?;
                        if !factor.is_zero() {
                            for (slot, k) in kappa.iter().enumerate() {
                                let g1 = left.get(k);
                                if !g1.is_zero() {
                                    table.values[slot] = g1 * &factor;
                                }
                            }
                        }
                    }
                    Op::Leaf => unreachable!("leaf with children"),
                }
                table
            }
        };
        tables.push(table);
    }
    Ok(GammaTables { tables, factorials })
}

/// Series recurrence for all `k` at once, sharing the operand products.
fn series_into(
    table: &mut GammaTable,
    left: &GammaTable,
    right: &GammaTable,
    f: &Factorials,
    cache: &mut HashMap<(u32, u32, u32, u32), BigUint>,
) -> Result<()> {
    let junction = left.sink_degree + right.source_degree;
    let kappa = table.kappa;
    for (k1, g1) in left.support() {
        for (k2, g2) in right.support() {
            let mut product: Option<BigUint> = None;
            for (slot, k) in kappa.iter().enumerate() {
                if k > k1 || k > k2 {
                    break;
                }
                let key = (k, k1, k2, junction);
                let c = match cache.get(&key) {
                    Some(c) => c,
                    None => {
                        let c = series_coefficient(f, k, k1, k2, junction)?;
                        cache.entry(key).or_insert(c)
                    }
                };
                if c.is_zero() {
                    continue;
                }
                let p = product.get_or_insert_with(|| g1 * g2);
                table.values[slot] += &*p * c;
            }
        }
    }
    Ok(())
}

/// Exact number of Euler tours of the graph a legal, Eulerian tree realizes.
pub fn count_tours(tree: &DecompTree) -> Result<BigUint> {
    let root = tree.root_node();
    if !root.has_even_terminals() {
        return Err(Error::NotEulerian(format!(
            "graph admits no Euler tour count (terminal degrees {}, {})",
            root.source_degree(),
            root.sink_degree()
        )));
    }
    build_tables(tree)?.count_tours()
}
