//! Feasibility of two pre-training domains (constant 0.2 and 0.8 graphons)
//! for a downstream task inside and outside their hull.

use std::collections::BTreeMap;

use pretrain_feasibility::feasibility::{feasibility, OptimizerConfig};
use pretrain_feasibility::graphon::{sample_graph, EstimationConfig, Resolution};
use pretrain_feasibility::gw::GwConfig;
use pretrain_feasibility::{derive_seed, Graph, Graphon};

fn samples(p: f64, seed: u64) -> Vec<Graph> {
    let w = Graphon::constant(1, p).unwrap();
    (0..30).map(|i| sample_graph(&w, 100, derive_seed(seed, i))).collect()
}

fn main() -> pretrain_feasibility::Result<()> {
    let mut splits = BTreeMap::new();
    splits.insert("sparse".to_string(), samples(0.2, 1));
    splits.insert("dense".to_string(), samples(0.8, 2));
    let est = EstimationConfig {
        resolution: Resolution::Fixed(16),
        seed: 0,
    };
    for (p, seed) in [(0.5, 3), (0.9, 4)] {
        let report = feasibility(&splits, &samples(p, seed), &OptimizerConfig::default(), &est, &GwConfig::default())?;
        println!("downstream const {p}: zeta {:.4} via {} basis", report.zeta, report.winning_basis.as_str());
        for b in &report.bases {
            println!("  {:<12} distance {:.5} alpha {:?}", b.kind.as_str(), b.optimized_distance, b.alpha_star);
        }
    }
    Ok(())
}
