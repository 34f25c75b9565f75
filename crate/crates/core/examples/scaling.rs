//! Counting time and table footprint on random trees of growing size.
//!
//! Each size is measured on five seeded trees; the time for one tree is the
//! minimum of three runs, and the reported figures are means over the trees.
//!
//! `cargo run --release --example scaling -- [max-degree] [m...]`

use std::time::Instant;

use gsp_euler::gen::random_tree;
use gsp_euler::{build_tables, sample_stream};

const TREES: u64 = 5;
const RUNS: usize = 3;

fn main() {
    let mut args = std::env::args().skip(1);
    let cap: u32 = args.next().map_or(32, |a| a.parse().expect("degree cap"));
    let mut sizes: Vec<usize> = args.map(|a| a.parse().expect("edge count")).collect();
    if sizes.is_empty() {
        sizes = vec![10_000, 20_000, 40_000, 100_000];
    }
    println!("{:>8} {:>10} {:>14} {:>12}", "m", "seconds", "table bits", "count bits");
    for m in sizes {
        let (mut secs, mut bits, mut count_bits) = (0.0, 0u64, 0u64);
        for seed in 0..TREES {
            let tree = random_tree(m, cap, &mut sample_stream(seed, m as u64)).expect("tree");
            let mut best = f64::INFINITY;
            let mut footprint = 0;
            for _ in 0..RUNS {
                let start = Instant::now();
                let tables = build_tables(&tree).expect("tables");
                let count = tables.count_tours().expect("count");
                best = best.min(start.elapsed().as_secs_f64());
                footprint = tables.footprint_bits();
                count_bits = count_bits.max(count.bits());
            }
            secs += best;
            bits += footprint;
        }
        let n = TREES as f64;
        println!("{m:>8} {:>10.5} {:>14} {:>12}", secs / n, bits / TREES, count_bits);
    }
}
