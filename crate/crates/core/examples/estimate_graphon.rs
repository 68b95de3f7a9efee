//! Recover a planted graphon from samples; the GW error shrinks as more
//! graphs are pooled.

use pretrain_feasibility::graphon::{estimate_graphon, sample_graph, EstimationConfig, Resolution};
use pretrain_feasibility::gw::{gw_distance, GwConfig};
use pretrain_feasibility::{derive_seed, Graphon};

fn main() -> pretrain_feasibility::Result<()> {
    let truth = Graphon::from_rows(&[vec![0.8, 0.1], vec![0.1, 0.6]])?;
    let cfg = EstimationConfig {
        resolution: Resolution::Fixed(16),
        seed: 0,
    };
    for count in [5, 20, 50] {
        let graphs: Vec<_> = (0..count).map(|i| sample_graph(&truth, 200, derive_seed(1, i))).collect();
        let refs: Vec<_> = graphs.iter().collect();
        let est = estimate_graphon(&refs, &cfg)?;
        let d = gw_distance(&est, &truth, &GwConfig::default())?.value;
        println!("{count:>3} graphs -> GW to truth {d:.4}");
    }
    Ok(())
}
