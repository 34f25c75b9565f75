//! End-to-end cross-check of the counting engine against the oracle.

use std::fmt;

use num_bigint::BigUint;

use crate::error::Result;
use crate::gamma::{build_tables, GammaTables};
use crate::oracle;
use crate::tree::DecompTree;

/// One engine-versus-oracle comparison.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    pub engine: BigUint,
    pub oracle: BigUint,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.engine == self.oracle
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        write!(f, "{verdict} {} engine={} oracle={}", self.name, self.engine, self.oracle)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for check in &self.checks {
            writeln!(f, "{check}")?;
        }
        Ok(())
    }
}

/// Compares the tour count and every root `gamma(k)` with brute force.
/// Refuses graphs with more than `bound` edges.
pub fn verify(tree: &DecompTree, bound: usize) -> Result<VerifyReport> {
    verify_tables(tree, &build_tables(tree)?, bound)
}

/// As [`verify`], with tables supplied by the caller.
pub fn verify_tables(tree: &DecompTree, tables: &GammaTables, bound: usize) -> Result<VerifyReport> {
    let graph = tree.realize().graph;
    let tours = oracle::enumerate_tours(&graph, bound)?;
    let decompositions = oracle::enumerate_decompositions(&graph, bound)?;
    let mut checks = vec![Check {
        name: "count".into(),
        engine: tables.count_tours()?,
        oracle: BigUint::from(tours.count()),
    }];
    let root = tables.root();
    let mut ks: Vec<u32> = root.kappa().iter().collect();
    ks.extend(decompositions.ks().map(|k| k as u32));
    ks.sort_unstable();
    ks.dedup();
    for k in ks {
        checks.push(Check {
            name: format!("gamma({k})"),
            engine: root.get(k).clone(),
            oracle: BigUint::from(decompositions.gamma(k as usize)),
        });
    }
    Ok(VerifyReport { checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn double_digon_passes() {
        let t = DecompTree::parse("S(P(B,B),P(B,B))").unwrap();
        let report = verify(&t, oracle::DEFAULT_BOUND).unwrap();
        assert!(report.passed());
        assert_eq!(
            report.to_string(),
            "PASS count engine=2 oracle=2\nPASS gamma(0) engine=1 oracle=1\nPASS gamma(2) engine=2 oracle=2\n"
        );
    }

    #[test]
    fn corrupted_table_fails() {
        let t = DecompTree::parse("S(P(B,B),P(B,B))").unwrap();
        let mut tables = build_tables(&t).unwrap();
        tables.corrupt(t.root(), 2, BigUint::from(3u32)).unwrap();
        let report = verify_tables(&t, &tables, 12).unwrap();
        assert!(!report.passed());
        assert!(report.to_string().contains("FAIL count engine=3 oracle=2"));
    }

    #[test]
    fn bound_is_enforced() {
        let t = DecompTree::parse("P(P(B,B),P(B,B))").unwrap();
        assert!(verify(&t, 3).is_err());
        assert!(verify(&t, 4).unwrap().passed());
    }
}
