//! Homomorphism densities, the cut distance, and the counting lemma
//! `|t(F, U) - t(F, W)| <= e(F) * d_cut(U, W)` on a pair of graphons.

use pretrain_feasibility::motif::{cut_distance, hom_density_graphon, Motif};
use pretrain_feasibility::Graphon;

fn main() -> pretrain_feasibility::Result<()> {
    let u = Graphon::from_rows(&[vec![0.8, 0.1], vec![0.1, 0.6]])?;
    let w = Graphon::from_rows(&[vec![0.7, 0.15], vec![0.15, 0.6]])?;
    let d = cut_distance(&u, &w)?;
    println!("cut distance {d:.4}");
    for name in ["edge", "path3", "triangle", "square", "star3"] {
        let m = Motif::by_name(name).expect("built-in motif");
        let gap = (hom_density_graphon(&m, &u)? - hom_density_graphon(&m, &w)?).abs();
        let bound = m.edges().len() as f64 * d;
        println!("{name:<9} gap {gap:.4} <= bound {bound:.4}");
    }
    Ok(())
}
