use pretrain_feasibility::features::{
    closeness, degree_assortativity, density, extract_features, local_clustering, transitivity,
};
use pretrain_feasibility::graphon::sample_graph;
use pretrain_feasibility::verify::brute_force_features;
use pretrain_feasibility::{Graph, Graphon};
use proptest::prelude::*;

fn star(leaves: usize) -> Graph {
    Graph::from_edges(leaves + 1, (1..=leaves).map(|v| (0, v))).unwrap()
}

#[test]
fn complete_graph_values() {
    let k4 = Graph::from_edges(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap();
    let f = extract_features(&k4);
    assert_eq!(f.0, [3.0, 1.0, 1.0, 1.0, 0.0, 1.0]);
}

#[test]
fn star_values() {
    // hub closeness 1, leaf closeness 4 / (1 + 2 * 3) = 4/7
    let g = star(4);
    assert_eq!(closeness(&g, 0), 1.0);
    assert!((closeness(&g, 1) - 4.0 / 7.0).abs() < 1e-15);
    assert_eq!(transitivity(&g), 0.0);
    assert_eq!(degree_assortativity(&g), -1.0);
    assert!((density(&g) - 0.4).abs() < 1e-15);
}

#[test]
fn disconnected_closeness_is_scaled() {
    // path 0-1-2 plus isolated 3: node 1 reaches 2 of 3 others at distance 1
    let g = Graph::from_edges(4, [(0, 1), (1, 2)]).unwrap();
    assert!((closeness(&g, 1) - 1.0 * (2.0 / 3.0)).abs() < 1e-15);
    assert_eq!(closeness(&g, 3), 0.0);
}

#[test]
fn triangle_with_tail() {
    let g = Graph::from_edges(4, [(0, 1), (1, 2), (0, 2), (2, 3)]).unwrap();
    assert_eq!(local_clustering(&g), vec![1.0, 1.0, 1.0 / 3.0, 0.0]);
    // 3 closed of 5 connected triples
    assert!((transitivity(&g) - 0.6).abs() < 1e-15);
}

fn arb_graph() -> impl Strategy<Value = Graph> {
    (3usize..20, any::<u64>(), 0.05f64..0.9).prop_map(|(n, seed, p)| {
        sample_graph(&Graphon::constant(1, p).unwrap(), n, seed)
    })
}

proptest! {
    #[test]
    fn matches_brute_force(g in arb_graph()) {
        let fast = extract_features(&g);
        let slow = brute_force_features(&g);
        for (a, b) in fast.0.iter().zip(slow) {
            prop_assert!((a - b).abs() < 1e-9, "{:?} vs {:?}", fast, slow);
        }
    }

    #[test]
    fn invariant_under_relabeling(g in arb_graph(), shift in 0usize..20) {
        let n = g.node_count();
        let perm: Vec<usize> = (0..n).map(|v| (v * 7 + shift) % n).collect();
        prop_assume!({ let mut p = perm.clone(); p.sort(); p.dedup(); p.len() == n });
        let a = extract_features(&g);
        let b = extract_features(&g.permuted(&perm).unwrap());
        for (x, y) in a.0.iter().zip(b.0) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn ranges(g in arb_graph()) {
        let f = extract_features(&g);
        for v in &f.0[1..4] {
            prop_assert!((0.0..=1.0).contains(v));
        }
        prop_assert!((-1.0..=1.0).contains(&f.0[4]));
        prop_assert!((0.0..=1.0).contains(&f.0[5]));
    }
}
