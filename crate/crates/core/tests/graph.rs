use std::collections::BTreeSet;

use pretrain_feasibility::graph::{
    ego_network, load_edge_list, parse_edge_list, sample_centers, sample_ego_networks, write_edge_list, EgoNetConfig,
    SampleSize,
};
use pretrain_feasibility::Graph;
use proptest::prelude::*;

fn arb_graph(max_n: usize) -> impl Strategy<Value = Graph> {
    (2..max_n).prop_flat_map(|n| {
        proptest::collection::vec((0..n, 0..n), 0..3 * n).prop_map(move |pairs| {
            Graph::from_edges_counting(n, pairs.into_iter().filter(|(u, v)| u != v)).unwrap().0
        })
    })
}

/// Nodes within `hops` of `c`, by repeated neighbourhood expansion.
fn ball(g: &Graph, c: usize, hops: usize) -> BTreeSet<usize> {
    let mut seen = BTreeSet::from([c]);
    for _ in 0..hops {
        let frontier: Vec<usize> = seen.iter().flat_map(|&v| g.neighbors(v).to_vec()).collect();
        seen.extend(frontier);
    }
    seen
}

proptest! {
    #[test]
    fn ego_net_is_the_induced_ball(g in arb_graph(25), hops in 1usize..4, c in 0usize..25) {
        let c = c % g.node_count();
        let ego = ego_network(&g, c, hops).unwrap();
        let nodes = ball(&g, c, hops);
        prop_assert_eq!(ego.node_count(), nodes.len());
        let inside = g.edges().filter(|(u, v)| nodes.contains(u) && nodes.contains(v)).count();
        prop_assert_eq!(ego.edge_count(), inside);
        // the center is node 0 and every other node is within `hops` of it
        let again = ball(&ego, 0, hops);
        prop_assert_eq!(again.len(), ego.node_count());
    }

    #[test]
    fn edge_list_round_trip(g in arb_graph(30)) {
        let text = g.to_edge_list();
        let back = parse_edge_list(text.as_bytes(), "mem".as_ref()).unwrap();
        prop_assert_eq!(back.graph, g);
        prop_assert_eq!(back.dropped, 0);
    }

    #[test]
    fn centers_are_distinct(g in arb_graph(40), k in 1usize..50, seed in any::<u64>()) {
        let cfg = EgoNetConfig { hops: 2, sample_size: SampleSize::Count(k), seed };
        let centers = sample_centers(&g, &cfg);
        let unique: BTreeSet<_> = centers.iter().collect();
        prop_assert_eq!(centers.len(), k.min(g.node_count()));
        prop_assert_eq!(unique.len(), centers.len());
    }
}

#[test]
fn file_round_trip_keeps_isolated_nodes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.edgelist");
    let g = Graph::from_edges(6, [(0, 1), (1, 2)]).unwrap();
    write_edge_list(&g, &path).unwrap();
    assert_eq!(load_edge_list(&path).unwrap().graph, g);
}

#[test]
fn headerless_ids_are_compacted() {
    let f = parse_edge_list("10 20\n20 30\n30 10\n10 10\n20 10\n".as_bytes(), "mem".as_ref()).unwrap();
    assert_eq!(f.graph.node_count(), 3);
    assert_eq!(f.graph.edge_count(), 3);
    assert_eq!(f.dropped, 2);
}

#[test]
fn malformed_line_is_rejected() {
    assert!(parse_edge_list("0 1\n1 x\n".as_bytes(), "mem".as_ref()).is_err());
}

#[test]
fn downstream_config_covers_every_node() {
    let g = Graph::from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap();
    let nets = sample_ego_networks(&g, &EgoNetConfig::downstream(1)).unwrap();
    let sizes: Vec<usize> = nets.iter().map(Graph::node_count).collect();
    assert_eq!(sizes, [3, 4, 5, 4, 3]);
}

#[test]
fn zero_hops_is_an_error() {
    let g = Graph::from_edges(2, [(0, 1)]).unwrap();
    assert!(ego_network(&g, 0, 0).is_err());
    assert!(ego_network(&g, 5, 1).is_err());
}
