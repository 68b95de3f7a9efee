//! Draw W-random graphs from a two-block graphon and compare their edge
//! density with the graphon's integral.

use pretrain_feasibility::features::density;
use pretrain_feasibility::graphon::sample_graph;
use pretrain_feasibility::{derive_seed, Graphon};

fn main() -> pretrain_feasibility::Result<()> {
    let w = Graphon::from_rows(&[vec![0.8, 0.1], vec![0.1, 0.6]])?;
    let graphs: Vec<_> = (0..20).map(|i| sample_graph(&w, 150, derive_seed(7, i))).collect();
    let mean = graphs.iter().map(density).sum::<f64>() / graphs.len() as f64;
    println!("graphon mean      {:.4}", w.mean());
    println!("sampled density   {mean:.4} over {} graphs", graphs.len());
    println!("first graph       {} nodes, {} edges", graphs[0].node_count(), graphs[0].edge_count());
    Ok(())
}
