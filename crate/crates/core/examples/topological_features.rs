//! The six-entry topology vector used to cluster graphs into the
//! topological basis.

use pretrain_feasibility::features::{extract_features, FEATURE_NAMES};
use pretrain_feasibility::graphon::sample_graph;
use pretrain_feasibility::{Graph, Graphon};

fn main() -> pretrain_feasibility::Result<()> {
    let star = Graph::from_edges(8, (1..8).map(|v| (0, v)))?;
    let ring = Graph::from_edges(8, (0..8).map(|v| (v, (v + 1) % 8)))?;
    let dense = sample_graph(&Graphon::constant(1, 0.6)?, 30, 3);
    for (name, g) in [("star", &star), ("ring", &ring), ("dense", &dense)] {
        println!("{name}");
        for (label, v) in FEATURE_NAMES.iter().zip(extract_features(g).0) {
            println!("  {label:<16} {v:.4}");
        }
    }
    Ok(())
}
