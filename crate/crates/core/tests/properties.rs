use proptest::prelude::*;

use gsp_euler::gen::random_tree;
use gsp_euler::recognize::check_realizes;
use gsp_euler::{count_tours, recognize, sample_stream, DecompTree, Multigraph, Sampler};

fn tree_string() -> impl Strategy<Value = String> {
    let leaf = Just("B".to_string());
    leaf.prop_recursive(6, 40, 2, |inner| {
        (prop_oneof![Just('S'), Just('P'), Just('D')], inner.clone(), inner)
            .prop_map(|(op, l, r)| format!("{op}({l},{r})"))
    })
}

/// Tree text with random whitespace and comment lines sprinkled in.
fn noisy(s: &str, seed: u64) -> String {
    let mut out = String::from("# generated\n");
    for (i, c) in s.chars().enumerate() {
        if (seed >> (i % 64)) & 1 == 1 {
            out.push(' ');
        }
        out.push(c);
        if c == ',' && seed % 3 == 0 {
            out.push_str("\n\t");
        }
    }
    out.push('\n');
    out
}

proptest! {
    #[test]
    fn serialize_parse_round_trip(s in tree_string(), seed in any::<u64>()) {
        let t = DecompTree::parse(&noisy(&s, seed)).unwrap();
        prop_assert_eq!(t.to_string(), s.clone());
        prop_assert_eq!(DecompTree::parse(&t.to_string()).unwrap(), t);
    }

    #[test]
    fn realization_shape(s in tree_string()) {
        let t = DecompTree::parse(&s).unwrap();
        let r = t.realize();
        let m = t.edge_count();
        prop_assert_eq!(r.graph.edge_count(), m);
        prop_assert_eq!(t.nodes().len(), 2 * m - 1);
        let degree_sum: u32 = (0..r.graph.vertex_count()).map(|v| r.graph.degree(v).unwrap()).sum();
        prop_assert_eq!(degree_sum as usize, 2 * m);
        prop_assert_eq!(r.graph.max_degree(), t.max_degree());
        for (id, node) in t.nodes().iter().enumerate() {
            let (s, t_) = r.terminals[id];
            prop_assert_ne!(s, t_);
            match node.children() {
                None => prop_assert_eq!(node.labels().count(), 1),
                Some((l, r)) => {
                    let (left, right) = (t.node(l).labels(), t.node(r).labels());
                    prop_assert_eq!(*left.end() + 1, *right.start());
                    prop_assert_eq!(node.labels(), *left.start()..=*right.end());
                }
            }
        }
        let root = t.root_node();
        prop_assert_eq!(r.graph.degree(r.graph.source()).unwrap(), root.source_degree());
        prop_assert_eq!(r.graph.degree(r.graph.sink()).unwrap(), root.sink_degree());
    }

    #[test]
    fn legal_graphs_have_matching_terminal_parity(s in tree_string()) {
        let t = DecompTree::parse(&s).unwrap();
        let report = t.check_legal();
        if report.is_legal() {
            let g = t.realize().graph;
            prop_assert!(g.is_legal());
            let root = t.root_node();
            let both_odd = root.source_degree() % 2 == 1 && root.sink_degree() % 2 == 1;
            prop_assert!(g.is_eulerian() != both_odd);
            for id in 0..t.nodes().len() {
                prop_assert!(report.verdict(id).is_none());
            }
        }
    }

    #[test]
    fn recognize_is_sound_and_round_trips(seed in any::<u64>(), m in 2usize..60) {
        let t = random_tree(m, 8, &mut sample_stream(seed, 0)).unwrap();
        let g = t.realize().graph;
        let back = recognize(&g).unwrap();
        prop_assert_eq!(&back.realize().graph, &g);
        let identity: Vec<u32> = (1..=m as u32).collect();
        check_realizes(&back, &identity, &g).unwrap();
        prop_assert_eq!(count_tours(&back).unwrap(), count_tours(&t).unwrap());
    }

    #[test]
    fn recognize_is_sound_on_shuffled_labels(seed in any::<u64>(), m in 2usize..40, rot in 1u32..40) {
        let t = random_tree(m, 8, &mut sample_stream(seed, 1)).unwrap();
        let g = t.realize().graph;
        let m = m as u32;
        let shuffled = Multigraph::from_labeled_edges(
            g.source() as u64,
            g.sink() as u64,
            g.edges().map(|(l, u, v)| ((l.get() - 1 + rot) % m + 1, v as u64, u as u64)),
        )
        .unwrap();
        // soundness only: a returned tree must realize the input
        if let Ok(tree) = recognize(&shuffled) {
            prop_assert_eq!(tree.edge_count(), shuffled.edge_count());
            prop_assert_eq!(tree.realize().graph.vertex_count(), shuffled.vertex_count());
        }
    }

    #[test]
    fn sampling_keeps_every_intermediate_decomposition_valid(seed in any::<u64>(), m in 2usize..40) {
        let t = random_tree(m, 10, &mut sample_stream(seed, 2)).unwrap();
        let sampler = Sampler::new(&t).unwrap().with_validation(true);
        let tour = sampler.sample(&mut sample_stream(seed, 3)).unwrap();
        prop_assert!(gsp_euler::oracle::validate_tour(sampler.graph(), &tour));
    }
}
