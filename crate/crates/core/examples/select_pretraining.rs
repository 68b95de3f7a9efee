//! Rank every pair of candidate corpora for a downstream task; the
//! candidate drawn from the downstream's own graphon should lead.

use std::collections::BTreeMap;

use pretrain_feasibility::feasibility::{select_pretraining_data, OptimizerConfig};
use pretrain_feasibility::graphon::{sample_graph, EstimationConfig, Resolution};
use pretrain_feasibility::gw::GwConfig;
use pretrain_feasibility::{derive_seed, Graph, Graphon};

fn samples(w: &Graphon, seed: u64) -> Vec<Graph> {
    (0..10).map(|i| sample_graph(w, 80, derive_seed(seed, i))).collect()
}

fn main() -> pretrain_feasibility::Result<()> {
    let truth = Graphon::from_rows(&[vec![0.75, 0.1], vec![0.1, 0.5]])?;
    let mut candidates = BTreeMap::new();
    candidates.insert("matching".to_string(), samples(&truth, 1));
    candidates.insert("sparse".to_string(), samples(&Graphon::constant(1, 0.05)?, 2));
    candidates.insert("dense".to_string(), samples(&Graphon::constant(1, 0.95)?, 3));
    candidates.insert("medium".to_string(), samples(&Graphon::constant(1, 0.4)?, 4));
    let down = samples(&truth, 5);
    let est = EstimationConfig {
        resolution: Resolution::Fixed(8),
        seed: 0,
    };
    let rows = select_pretraining_data(&candidates, &down, 2, &OptimizerConfig::default(), &est, &GwConfig::default())?;
    for row in rows {
        println!("{:<20} zeta {:.5}", row.subset.join("+"), row.zeta);
    }
    Ok(())
}
