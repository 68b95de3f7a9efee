use pretrain_feasibility::graphon::{estimate_graphon, mix, sample_graph, EstimationConfig, Resolution};
use pretrain_feasibility::{Graph, Graphon};
use proptest::prelude::*;

fn fixed(r: usize) -> EstimationConfig {
    EstimationConfig {
        resolution: Resolution::Fixed(r),
        seed: 0,
    }
}

fn arb_graphon(r: usize) -> impl Strategy<Value = Graphon> {
    proptest::collection::vec(0.0f64..=1.0, r * r).prop_map(move |v| {
        let rows: Vec<Vec<f64>> = (0..r)
            .map(|i| (0..r).map(|j| v[i.min(j) * r + i.max(j)]).collect())
            .collect();
        Graphon::from_rows(&rows).unwrap()
    })
}

proptest! {
    #[test]
    fn mixture_is_a_symmetric_graphon(a in arb_graphon(4), b in arb_graphon(4), t in 0.0f64..=1.0) {
        let m = mix(&[a.clone(), b.clone()], &[t, 1.0 - t]).unwrap();
        let g = m.grid();
        for i in 0..4 {
            for j in 0..4 {
                prop_assert!((0.0..=1.0).contains(&g[[i, j]]));
                prop_assert_eq!(g[[i, j]], g[[j, i]]);
                let want = t * a.grid()[[i, j]] + (1.0 - t) * b.grid()[[i, j]];
                prop_assert!((g[[i, j]] - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn resampling_keeps_the_mean(f in arb_graphon(3), r in 1usize..9) {
        let g = f.resample(r).unwrap();
        prop_assert!((g.mean() - f.mean()).abs() < 1e-12);
    }

    #[test]
    fn refining_then_coarsening_is_identity(f in arb_graphon(3), k in 1usize..4) {
        let back = f.resample(3 * k).unwrap().resample(3).unwrap();
        for (x, y) in back.grid().iter().zip(f.grid().iter()) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn json_round_trip(f in arb_graphon(5)) {
        let back = Graphon::from_json(&f.to_json().unwrap()).unwrap();
        prop_assert_eq!(back.grid(), f.grid());
    }

    #[test]
    fn estimate_ignores_node_labels(seed in any::<u64>(), shift in 1usize..40) {
        let truth = Graphon::from_rows(&[vec![0.7, 0.2], vec![0.2, 0.4]]).unwrap();
        let g = sample_graph(&truth, 41, seed);
        let perm: Vec<usize> = (0..41).map(|v| (v + shift) % 41).collect();
        let h = g.permuted(&perm).unwrap();
        let a = estimate_graphon(&[&g], &fixed(8)).unwrap();
        let b = estimate_graphon(&[&h], &fixed(8)).unwrap();
        for (x, y) in a.grid().iter().zip(b.grid().iter()) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }
}

#[test]
fn off_simplex_weights_are_rejected() {
    let a = Graphon::constant(2, 0.3).unwrap();
    assert!(mix(&[a.clone(), a.clone()], &[0.7, 0.7]).is_err());
    assert!(mix(&[a.clone(), a.clone()], &[1.2, -0.2]).is_err());
    assert!(mix(&[a.clone(), Graphon::constant(3, 0.3).unwrap()], &[0.5, 0.5]).is_err());
}

#[test]
fn asymmetric_grid_is_rejected() {
    assert!(Graphon::from_rows(&[vec![0.1, 0.2], vec![0.3, 0.1]]).is_err());
    assert!(Graphon::from_rows(&[vec![1.5]]).is_err());
}

#[test]
fn complete_graph_estimates_to_one() {
    let k4 = Graph::from_edges(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap();
    for r in [1, 4, 10] {
        let f = estimate_graphon(&[&k4], &fixed(r)).unwrap();
        assert!(f.grid().iter().all(|&v| v == 1.0), "r = {r}: {:?}", f.grid());
    }
}

#[test]
fn edge_marginal_matches_graphon_mean() {
    // P(pair joined) = integral of W, here (0.9 + 2 * 0.1 + 0.5) / 4 = 0.4
    let f = Graphon::from_rows(&[vec![0.9, 0.1], vec![0.1, 0.5]]).unwrap();
    let trials = 10_000;
    let hits = (0..trials)
        .filter(|&s| sample_graph(&f, 3, s as u64).has_edge(0, 1))
        .count();
    let p = 0.4;
    let se = (p * (1.0 - p) / trials as f64).sqrt();
    let rate = hits as f64 / trials as f64;
    assert!((rate - p).abs() <= 3.0 * se, "rate {rate}, se {se}");
}

#[test]
fn sampling_is_seeded() {
    let f = Graphon::constant(1, 0.3).unwrap();
    assert_eq!(sample_graph(&f, 30, 9), sample_graph(&f, 30, 9));
    assert_ne!(sample_graph(&f, 30, 9), sample_graph(&f, 30, 10));
}
