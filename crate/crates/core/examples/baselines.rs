//! The comparison measures and a Pearson check against made-up
//! downstream results.

use pretrain_feasibility::baselines::{baseline_score, pearson, BaselineConfig, BaselineMethod};
use pretrain_feasibility::graphon::sample_graph;
use pretrain_feasibility::{Graph, Graphon};

fn samples(p: f64, seed: u64) -> Vec<Graph> {
    let w = Graphon::constant(1, p).unwrap();
    (0..15).map(|i| sample_graph(&w, 25, seed * 100 + i)).collect()
}

fn main() -> pretrain_feasibility::Result<()> {
    let down = samples(0.3, 0);
    let sources = [0.3, 0.4, 0.6, 0.8];
    let cfg = BaselineConfig::default();
    for method in BaselineMethod::ALL {
        let scores: Vec<f64> = sources
            .iter()
            .enumerate()
            .map(|(i, &p)| baseline_score(&samples(p, i as u64 + 1), &down, method, &cfg).map(|m| m.value))
            .collect::<Result<_, _>>()?;
        println!("{:<24} {:?}", method.as_str(), scores.iter().map(|s| format!("{s:.4}")).collect::<Vec<_>>());
    }
    // hypothetical accuracies after pre-training on each source
    let accuracy = [0.81, 0.78, 0.74, 0.70];
    let stats: Vec<f64> = sources
        .iter()
        .enumerate()
        .map(|(i, &p)| baseline_score(&samples(p, i as u64 + 1), &down, BaselineMethod::GraphStatsMmd, &cfg).map(|m| m.value))
        .collect::<Result<_, _>>()?;
    println!("pearson(graph_stats_mmd, accuracy) = {:.3}", pearson(&stats, &accuracy)?);
    Ok(())
}
