//! Homomorphism densities and the cut norm.
//!
//! `t(F, G)` counts every adjacency-preserving map `V(F) -> V(G)` (injective
//! or not) and divides by `n^|F|`; `t(F, W)` is the analogous integral over a
//! step graphon, evaluated exactly by summing over block assignments. The
//! exact cut norm of a step kernel is attained on unions of blocks, so it is
//! computed by enumerating row subsets and sign-selecting columns.
//!
//! The `verify_*` functions package the two motif-preservation bounds as
//! checkable predicates: the counting bound for basis mixtures and the
//! concentration bound for W-random graphs.

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::derive_seed;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::graphon::{mix, sample_graph, Graphon};

pub const MAX_MOTIF_NODES: usize = 5;

/// Resolution cap for [`hom_density_graphon`] unless overridden.
pub const DEFAULT_GRAPHON_CAP: usize = 32;

pub const MAX_CUT_NORM_RESOLUTION: usize = 20;

const MAX_COUNTING_RESOLUTION: usize = 12;

/// Graphs above this size use sorted-list intersections instead of bitsets.
const BITSET_NODE_LIMIT: usize = 8192;

/// Small connected simple pattern graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Motif {
    name: String,
    node_count: usize,
    edges: Vec<(usize, usize)>,
}

impl Motif {
    pub fn new(name: impl Into<String>, node_count: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if node_count == 0 || node_count > MAX_MOTIF_NODES {
            return Err(Error::InvalidInput(format!(
                "motifs need 1..={MAX_MOTIF_NODES} nodes, got {node_count}"
            )));
        }
        let g = Graph::from_edges(node_count, edges.iter().copied())?;
        if g.edge_count() != edges.len() {
            return Err(Error::InvalidInput("motif edges must be simple".into()));
        }
        let mut seen = vec![false; node_count];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &w in g.neighbors(v) {
                if !std::mem::replace(&mut seen[w], true) {
                    stack.push(w);
                }
            }
        }
        if seen.contains(&false) {
            return Err(Error::InvalidInput("motif must be connected".into()));
        }
        Ok(Motif {
            name: name.into(),
            node_count,
            edges: g.edges().collect(),
        })
    }

    pub fn edge() -> Self {
        Self::new("edge", 2, &[(0, 1)]).unwrap()
    }

    /// Path on three nodes (two edges).
    pub fn path3() -> Self {
        Self::new("path3", 3, &[(0, 1), (1, 2)]).unwrap()
    }

    pub fn triangle() -> Self {
        Self::new("triangle", 3, &[(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    /// 4-cycle.
    pub fn square() -> Self {
        Self::new("square", 4, &[(0, 1), (1, 2), (2, 3), (0, 3)]).unwrap()
    }

    pub fn path4() -> Self {
        Self::new("path4", 4, &[(0, 1), (1, 2), (2, 3)]).unwrap()
    }

    pub fn star3() -> Self {
        Self::new("star3", 4, &[(0, 1), (0, 2), (0, 3)]).unwrap()
    }

    pub fn by_name(name: &str) -> Option<Self> {
        Some(match name {
            "edge" => Self::edge(),
            "path3" => Self::path3(),
            "triangle" => Self::triangle(),
            "square" => Self::square(),
            "path4" => Self::path4(),
            "star3" => Self::star3(),
            _ => return None,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// `|F|`, the number of nodes.
    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// BFS vertex order and, per position, the earlier positions it is adjacent to.
    fn plan(&self) -> Vec<Vec<usize>> {
        let g = Graph::from_edges(self.node_count, self.edges.iter().copied()).unwrap();
        let mut order = vec![0];
        let mut placed = vec![false; self.node_count];
        placed[0] = true;
        let mut head = 0;
        while head < order.len() {
            let v = order[head];
            head += 1;
            for &w in g.neighbors(v) {
                if !std::mem::replace(&mut placed[w], true) {
                    order.push(w);
                }
            }
        }
        let pos: Vec<usize> = {
            let mut p = vec![0; self.node_count];
            for (i, &v) in order.iter().enumerate() {
                p[v] = i;
            }
            p
        };
        (0..self.node_count)
            .map(|i| {
                let v = order[i];
                let mut back: Vec<usize> = g
                    .neighbors(v)
                    .iter()
                    .map(|&w| pos[w])
                    .filter(|&j| j < i)
                    .collect();
                back.sort_unstable();
                back
            })
            .collect()
    }
}

/// Number of homomorphisms from `motif` into `g`.
pub fn hom_count(motif: &Motif, g: &Graph) -> u128 {
    let n = g.node_count();
    if n == 0 {
        return 0;
    }
    let back = motif.plan();
    if n <= BITSET_NODE_LIMIT {
        BitsetCounter::new(g, &back).count()
    } else {
        let mut assign = vec![0; back.len()];
        count_sorted(g, &back, 0, &mut assign)
    }
}

/// `hom(F, G) / n^|F|`.
pub fn hom_density_graph(motif: &Motif, g: &Graph) -> f64 {
    let n = g.node_count();
    if n == 0 {
        return 0.0;
    }
    hom_count(motif, g) as f64 / (n as f64).powi(motif.node_count as i32)
}

struct BitsetCounter<'a> {
    back: &'a [Vec<usize>],
    words: usize,
    rows: Vec<u64>,
    scratch: Vec<Vec<u64>>,
    assign: Vec<usize>,
    n: usize,
}

impl<'a> BitsetCounter<'a> {
    fn new(g: &Graph, back: &'a [Vec<usize>]) -> Self {
        let n = g.node_count();
        let words = n.div_ceil(64);
        let mut rows = vec![0u64; n * words];
        for (u, v) in g.edges() {
            rows[u * words + v / 64] |= 1 << (v % 64);
            rows[v * words + u / 64] |= 1 << (u % 64);
        }
        BitsetCounter {
            back,
            words,
            rows,
            scratch: vec![vec![0; words]; back.len()],
            assign: vec![0; back.len()],
            n,
        }
    }

    fn row(&self, v: usize) -> &[u64] {
        &self.rows[v * self.words..(v + 1) * self.words]
    }

    fn count(&mut self) -> u128 {
        let k = self.back.len();
        if k == 1 {
            return self.n as u128;
        }
        let mut total = 0;
        for v in 0..self.n {
            self.assign[0] = v;
            total += self.extend(1);
        }
        total
    }

    fn extend(&mut self, i: usize) -> u128 {
        let mut cand = std::mem::take(&mut self.scratch[i]);
        let first = self.assign[self.back[i][0]];
        cand.copy_from_slice(self.row(first));
        for &j in &self.back[i][1..] {
            let other = self.assign[j];
            for (c, r) in cand.iter_mut().zip(&self.rows[other * self.words..]) {
                *c &= r;
            }
        }
        let total = if i + 1 == self.back.len() {
            cand.iter().map(|w| w.count_ones() as u128).sum()
        } else {
            let mut total = 0;
            for (wi, &word) in cand.iter().enumerate() {
                let mut bits = word;
                while bits != 0 {
                    let b = bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    self.assign[i] = wi * 64 + b;
                    total += self.extend(i + 1);
                }
            }
            total
        };
        self.scratch[i] = cand;
        total
    }
}

fn count_sorted(g: &Graph, back: &[Vec<usize>], i: usize, assign: &mut Vec<usize>) -> u128 {
    if i == back.len() {
        return 1;
    }
    if i == 0 {
        let mut total = 0;
        for v in 0..g.node_count() {
            assign[0] = v;
            total += count_sorted(g, back, 1, assign);
        }
        return total;
    }
    let anchor = assign[back[i][0]];
    let mut total = 0;
    for &v in g.neighbors(anchor) {
        if back[i][1..].iter().all(|&j| g.has_edge(assign[j], v)) {
            assign[i] = v;
            total += count_sorted(g, back, i + 1, assign);
        }
    }
    total
}

/// `t(F, W)` with the default resolution cap.
pub fn hom_density_graphon(motif: &Motif, w: &Graphon) -> Result<f64> {
    hom_density_graphon_capped(motif, w, DEFAULT_GRAPHON_CAP)
}

/// Mean over all block assignments `a: V(F) -> [r]` of the product of
/// `grid[a(u)][a(v)]` over the motif's edges.
pub fn hom_density_graphon_capped(motif: &Motif, w: &Graphon, cap: usize) -> Result<f64> {
    let r = w.resolution();
    if r > cap {
        return Err(Error::ResolutionCap {
            operation: "graphon homomorphism density",
            resolution: r,
            cap,
        });
    }
    let back = motif.plan();
    let mut assign = vec![0; back.len()];
    let sum = graphon_sum(w.grid(), &back, 0, 1.0, &mut assign);
    Ok(sum / (r as f64).powi(back.len() as i32))
}

fn graphon_sum(
    grid: &Array2<f64>,
    back: &[Vec<usize>],
    i: usize,
    partial: f64,
    assign: &mut Vec<usize>,
) -> f64 {
    if i == back.len() {
        return partial;
    }
    let mut total = 0.0;
    for a in 0..grid.nrows() {
        let mut p = partial;
        for &j in &back[i] {
            p *= grid[[assign[j], a]];
        }
        if p != 0.0 {
            assign[i] = a;
            total += graphon_sum(grid, back, i + 1, p, assign);
        }
    }
    total
}

/// Exact cut norm of a step kernel with uniform block measure:
/// `max_{S,T} |sum_{i in S, j in T} d[i][j]| / r^2`.
pub fn cut_norm(d: &Array2<f64>) -> Result<f64> {
    let (r, c) = d.dim();
    if r != c {
        return Err(Error::ShapeMismatch(format!("cut norm of a {r}x{c} matrix")));
    }
    if r > MAX_CUT_NORM_RESOLUTION {
        return Err(Error::ResolutionCap {
            operation: "exact cut norm",
            resolution: r,
            cap: MAX_CUT_NORM_RESOLUTION,
        });
    }
    if r == 0 {
        return Ok(0.0);
    }
    // Gray-code walk over row subsets S, keeping column sums c_j(S).
    let mut col = vec![0.0; r];
    let mut best = 0.0f64;
    let mut members = vec![false; r];
    for step in 1u64..(1u64 << r) {
        let flip = step.trailing_zeros() as usize;
        let sign = if members[flip] { -1.0 } else { 1.0 };
        members[flip] = !members[flip];
        for (cj, &dij) in col.iter_mut().zip(d.row(flip)) {
            *cj += sign * dij;
        }
        let (mut pos, mut neg) = (0.0, 0.0);
        for &cj in &col {
            if cj > 0.0 {
                pos += cj;
            } else {
                neg -= cj;
            }
        }
        best = best.max(pos).max(neg);
    }
    Ok(best / (r * r) as f64)
}

pub fn cut_distance(a: &Graphon, b: &Graphon) -> Result<f64> {
    if a.resolution() != b.resolution() {
        return Err(Error::ResolutionMismatch(a.resolution(), b.resolution()));
    }
    cut_norm(&(a.grid() - b.grid()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountingBoundCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Checks `|t(F, mix) - t(F, B_a)| <= sum_{b != a} |F| alpha_b ||B_b - B_a||_cut`.
pub fn verify_counting_bound(
    basis: &[Graphon],
    weights: &[f64],
    motif: &Motif,
    anchor: usize,
) -> Result<CountingBoundCheck> {
    if anchor >= basis.len() {
        return Err(Error::InvalidInput(format!(
            "anchor {anchor} out of range for basis of {}",
            basis.len()
        )));
    }
    if let Some(b) = basis.iter().find(|b| b.resolution() > MAX_COUNTING_RESOLUTION) {
        return Err(Error::ResolutionCap {
            operation: "counting-bound check",
            resolution: b.resolution(),
            cap: MAX_COUNTING_RESOLUTION,
        });
    }
    let mixed = mix(basis, weights)?;
    let lhs = (hom_density_graphon(motif, &mixed)? - hom_density_graphon(motif, &basis[anchor])?).abs();
    let mut rhs = 0.0;
    for (b, (elem, &w)) in basis.iter().zip(weights).enumerate() {
        if b != anchor && w > 0.0 {
            rhs += motif.node_count() as f64 * w * cut_distance(elem, &basis[anchor])?;
        }
    }
    Ok(CountingBoundCheck {
        lhs,
        rhs,
        holds: lhs <= rhs + 1e-12,
    })
}

/// `t(F, G_i)` for `trials` independent W-random graphs on `n` nodes.
pub fn sample_densities(f: &Graphon, motif: &Motif, n: usize, trials: usize, seed: u64) -> Vec<f64> {
    (0..trials)
        .into_par_iter()
        .map(|t| hom_density_graph(motif, &sample_graph(f, n, derive_seed(seed, t as u64))))
        .collect()
}

/// `2 exp(-eps^2 n / (8 v(F)^2))`.
pub fn concentration_bound(motif: &Motif, n: usize, eps: f64) -> f64 {
    let v = motif.node_count() as f64;
    2.0 * (-eps * eps * n as f64 / (8.0 * v * v)).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationCheck {
    pub empirical_rate: f64,
    pub bound: f64,
    pub holds: bool,
    /// The bound is at least 1 and says nothing.
    pub vacuous: bool,
    pub mean_abs_deviation: f64,
    pub std_dev: f64,
}

/// Empirical rate of `|t(F, G) - t(F, f)| > eps` against the concentration bound.
pub fn verify_concentration(
    f: &Graphon,
    motif: &Motif,
    n: usize,
    trials: usize,
    eps: f64,
    seed: u64,
) -> Result<ConcentrationCheck> {
    if n < 2 || !(eps > 0.0 && eps < 1.0) || trials == 0 {
        return Err(Error::InvalidInput(format!(
            "concentration check needs n >= 2, 0 < eps < 1 and trials >= 1 (n={n}, eps={eps}, trials={trials})"
        )));
    }
    let target = hom_density_graphon_capped(motif, f, usize::MAX)?;
    let samples = sample_densities(f, motif, n, trials, seed);
    Ok(summarize_concentration(&samples, target, motif, n, eps))
}

pub fn summarize_concentration(
    samples: &[f64],
    target: f64,
    motif: &Motif,
    n: usize,
    eps: f64,
) -> ConcentrationCheck {
    let m = samples.len() as f64;
    let exceed = samples.iter().filter(|t| (*t - target).abs() > eps).count() as f64;
    let empirical_rate = exceed / m;
    let bound = concentration_bound(motif, n, eps);
    let vacuous = bound >= 1.0;
    let mean = samples.iter().sum::<f64>() / m;
    let var = if samples.len() > 1 {
        samples.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (m - 1.0)
    } else {
        0.0
    };
    ConcentrationCheck {
        empirical_rate,
        bound,
        holds: vacuous || empirical_rate <= bound,
        vacuous,
        mean_abs_deviation: samples.iter().map(|t| (t - target).abs()).sum::<f64>() / m,
        std_dev: var.sqrt(),
    }
}
