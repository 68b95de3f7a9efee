//! Turn one large graph into 2-hop ego-networks, the form node-level
//! datasets take before graphon estimation.

use pretrain_feasibility::graph::{sample_ego_networks, EgoNetConfig, SampleSize};
use pretrain_feasibility::graphon::sample_graph;
use pretrain_feasibility::Graphon;

fn main() -> pretrain_feasibility::Result<()> {
    let w = Graphon::from_rows(&[vec![0.05, 0.005], vec![0.005, 0.02]])?;
    let g = sample_graph(&w, 500, 11);
    let cfg = EgoNetConfig {
        hops: 2,
        sample_size: SampleSize::Count(50),
        seed: 11,
    };
    let nets = sample_ego_networks(&g, &cfg)?;
    let sizes: Vec<usize> = nets.iter().map(|n| n.node_count()).collect();
    let mean = sizes.iter().sum::<usize>() as f64 / sizes.len() as f64;
    println!("{} ego-nets from a {}-node graph", nets.len(), g.node_count());
    println!("sizes: min {} mean {mean:.1} max {}", sizes.iter().min().unwrap(), sizes.iter().max().unwrap());
    Ok(())
}
