//! Step-function graphons.
//!
//! A [`Graphon`] is a symmetric `r x r` grid with entries in `[0, 1]`; block
//! `i` covers `[i/r, (i+1)/r)` (with `1.0` mapped into the last block). This
//! module estimates graphons from graphs with the largest-gap method, moves
//! them between resolutions, mixes them, and samples W-random graphs.

use std::path::Path;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Largest asymmetry tolerated when validating external grids.
const SYMMETRY_TOL: f64 = 1e-9;

/// Graphs per sequential accumulation chunk during estimation.
const ESTIMATE_CHUNK: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub struct Graphon {
    grid: Array2<f64>,
}

impl Graphon {
    /// Validates and wraps a grid. Entries within `1e-9` of their transpose
    /// are averaged to make the grid exactly symmetric.
    pub fn new(grid: Array2<f64>) -> Result<Self> {
        let (r, c) = grid.dim();
        if r == 0 || r != c {
            return Err(Error::InvalidGraphon(format!(
                "grid must be square and non-empty, got {r}x{c}"
            )));
        }
        for ((i, j), &v) in grid.indexed_iter() {
            if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidGraphon(format!(
                    "entry ({i},{j}) = {v} is outside [0, 1]"
                )));
            }
            if (v - grid[[j, i]]).abs() > SYMMETRY_TOL {
                return Err(Error::InvalidGraphon(format!(
                    "grid is not symmetric at ({i},{j}): {v} vs {}",
                    grid[[j, i]]
                )));
            }
        }
        Ok(Graphon {
            grid: symmetrize(&grid),
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        if rows.iter().any(|row| row.len() != r) {
            return Err(Error::InvalidGraphon("rows have unequal lengths".into()));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        let grid = Array2::from_shape_vec((r, r), flat)
            .map_err(|e| Error::InvalidGraphon(e.to_string()))?;
        Graphon::new(grid)
    }

    pub fn constant(resolution: usize, value: f64) -> Result<Self> {
        Graphon::new(Array2::from_elem((resolution, resolution), value))
    }

    /// The empirical graphon of `g`: resolution `n`, grid equal to the adjacency matrix.
    pub fn from_adjacency(g: &Graph) -> Result<Self> {
        let n = g.node_count();
        let mut grid = Array2::zeros((n, n));
        for (u, v) in g.edges() {
            grid[[u, v]] = 1.0;
            grid[[v, u]] = 1.0;
        }
        Graphon::new(grid)
    }

    /// Wraps a grid the caller guarantees symmetric; values are clamped into `[0, 1]`.
    pub(crate) fn from_trusted(mut grid: Array2<f64>) -> Self {
        grid.mapv_inplace(|v| v.clamp(0.0, 1.0));
        Graphon { grid }
    }

    pub fn resolution(&self) -> usize {
        self.grid.nrows()
    }

    pub fn grid(&self) -> &Array2<f64> {
        &self.grid
    }

    pub fn block_of(&self, x: f64) -> usize {
        let r = self.resolution();
        ((x * r as f64) as usize).min(r - 1)
    }

    /// Value at `(x, y)` in the unit square.
    pub fn value(&self, x: f64, y: f64) -> f64 {
        self.grid[[self.block_of(x), self.block_of(y)]]
    }

    pub fn mean(&self) -> f64 {
        self.grid.mean().unwrap_or(0.0)
    }

    /// Area-weighted average of the step function onto an `r_new` grid.
    pub fn resample(&self, r_new: usize) -> Result<Graphon> {
        if r_new == 0 {
            return Err(Error::InvalidInput("resolution must be >= 1".into()));
        }
        let r = self.resolution();
        if r == r_new {
            return Ok(self.clone());
        }
        let bounds: Vec<usize> = (0..=r).collect();
        let w = overlap_weights(&bounds, r_new);
        Ok(Graphon::from_trusted(symmetrize(&w.dot(&self.grid).dot(&w.t()))))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&GraphonFile::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Graphon> {
        let file: GraphonFile = serde_json::from_str(text)?;
        Graphon::try_from(file)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?)
            .map_err(|e| Error::io(format!("writing {}", path.display()), e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Graphon> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        Graphon::from_json(&text)
    }
}

/// On-disk form: `{"resolution": r, "grid": [row-major r*r values]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphonFile {
    pub resolution: usize,
    pub grid: Vec<f64>,
}

impl From<&Graphon> for GraphonFile {
    fn from(g: &Graphon) -> Self {
        GraphonFile {
            resolution: g.resolution(),
            grid: g.grid.iter().copied().collect(),
        }
    }
}

impl TryFrom<GraphonFile> for Graphon {
    type Error = Error;

    fn try_from(file: GraphonFile) -> Result<Graphon> {
        let r = file.resolution;
        if r == 0 {
            return Err(Error::InvalidGraphon("resolution must be >= 1".into()));
        }
        if file.grid.len() != r * r {
            return Err(Error::InvalidGraphon(format!(
                "grid has {} values, resolution {r} needs {}",
                file.grid.len(),
                r * r
            )));
        }
        let grid = Array2::from_shape_vec((r, r), file.grid)
            .map_err(|e| Error::InvalidGraphon(e.to_string()))?;
        Graphon::new(grid)
    }
}

impl Serialize for Graphon {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GraphonFile::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Graphon {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let file = GraphonFile::deserialize(d)?;
        Graphon::try_from(file).map_err(serde::de::Error::custom)
    }
}

fn symmetrize(a: &Array2<f64>) -> Array2<f64> {
    (a + &a.t()) * 0.5
}

/// Row `i` holds the fraction of target cell `[i/r_new, (i+1)/r_new)` covered
/// by each source block `[bounds[a]/T, bounds[a+1]/T)`, `T = bounds.last()`.
///
/// Works in units of `1/(T * r_new)` so the overlaps are exact integers.
fn overlap_weights(bounds: &[usize], r_new: usize) -> Array2<f64> {
    let total = *bounds.last().expect("at least one bound");
    let blocks = bounds.len() - 1;
    let mut w = Array2::zeros((r_new, blocks));
    let mut a = 0;
    for i in 0..r_new {
        let (lo, hi) = (i * total, (i + 1) * total);
        while a < blocks && bounds[a + 1] * r_new <= lo {
            a += 1;
        }
        let mut b = a;
        while b < blocks && bounds[b] * r_new < hi {
            let start = (bounds[b] * r_new).max(lo);
            let end = (bounds[b + 1] * r_new).min(hi);
            if end > start {
                w[[i, b]] = (end - start) as f64 / total as f64;
            }
            b += 1;
        }
    }
    w
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Resolution {
    /// Rounded mean node count of the input graphs.
    Auto,
    #[serde(untagged)]
    Fixed(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EstimationConfig {
    pub resolution: Resolution,
    pub seed: u64,
}

impl Default for EstimationConfig {
    fn default() -> Self {
        EstimationConfig {
            resolution: Resolution::Auto,
            seed: 0,
        }
    }
}

/// `round(mean node count)`, at least 1.
pub fn auto_resolution<'a>(graphs: impl IntoIterator<Item = &'a Graph>) -> usize {
    let (mut count, mut nodes) = (0usize, 0usize);
    for g in graphs {
        count += 1;
        nodes += g.node_count();
    }
    if count == 0 {
        return 1;
    }
    ((nodes as f64 / count as f64).round() as usize).max(1)
}

impl EstimationConfig {
    pub fn resolve(&self, graphs: &[&Graph]) -> usize {
        match self.resolution {
            Resolution::Fixed(r) => r.max(1),
            Resolution::Auto => auto_resolution(graphs.iter().copied()),
        }
    }
}

/// Degree-sorted node order and block boundaries from the largest-gap rule.
///
/// Nodes are sorted by degree (descending, ties by id) and the sequence is cut
/// at the `k - 1` largest gaps between consecutive degrees (ties: leftmost).
/// Only positive gaps are cut, so nodes of equal degree always share a block
/// and fewer than `k` blocks come out when the degree sequence has few gaps.
/// Returns `(order, bounds)` where block `a` is `order[bounds[a]..bounds[a+1]]`.
pub fn largest_gap_partition(g: &Graph, k: usize) -> (Vec<usize>, Vec<usize>) {
    let n = g.node_count();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| g.degree(b).cmp(&g.degree(a)).then(a.cmp(&b)));
    let k = k.clamp(1, n.max(1));
    let mut gaps: Vec<(usize, usize)> = (0..n.saturating_sub(1))
        .map(|i| (g.degree(order[i]) - g.degree(order[i + 1]), i))
        .filter(|&(gap, _)| gap > 0)
        .collect();
    gaps.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut cuts: Vec<usize> = gaps.iter().take(k - 1).map(|&(_, i)| i + 1).collect();
    cuts.sort_unstable();
    let mut bounds = Vec::with_capacity(k + 1);
    bounds.push(0);
    bounds.extend(cuts);
    bounds.push(n);
    (order, bounds)
}

/// Empirical edge densities between (and within) the blocks of a partition.
pub fn block_densities(g: &Graph, order: &[usize], bounds: &[usize]) -> Array2<f64> {
    let k = bounds.len() - 1;
    let mut block = vec![0usize; g.node_count()];
    for a in 0..k {
        for &v in &order[bounds[a]..bounds[a + 1]] {
            block[v] = a;
        }
    }
    let mut counts = Array2::<f64>::zeros((k, k));
    for (u, v) in g.edges() {
        let (a, b) = (block[u], block[v]);
        counts[[a, b]] += 1.0;
        if a != b {
            counts[[b, a]] += 1.0;
        }
    }
    let size = |a: usize| (bounds[a + 1] - bounds[a]) as f64;
    Array2::from_shape_fn((k, k), |(a, b)| {
        if a == b {
            let s = size(a);
            if s < 2.0 {
                0.0
            } else {
                2.0 * counts[[a, a]] / (s * (s - 1.0))
            }
        } else {
            counts[[a, b]] / (size(a) * size(b))
        }
    })
}

/// Largest-gap step function of one graph, resampled onto an `r x r` grid.
pub fn graph_step_grid(g: &Graph, r: usize) -> Array2<f64> {
    let k = g.node_count().min(r);
    let (order, bounds) = largest_gap_partition(g, k);
    let blocks = block_densities(g, &order, &bounds);
    let w = overlap_weights(&bounds, r);
    w.dot(&blocks).dot(&w.t())
}

/// A node's position key: degree over `n - 1`, compared exactly.
#[derive(Clone, Copy)]
struct NodeKey {
    graph: usize,
    node: usize,
    degree: usize,
    denom: usize,
}

impl NodeKey {
    /// Descending normalized degree.
    fn cmp_degree(&self, other: &NodeKey) -> std::cmp::Ordering {
        (other.degree as u128 * self.denom as u128).cmp(&(self.degree as u128 * other.denom as u128))
    }
}

/// Grid cells overlapped by `[lo, hi)` (in grid units), as `(cell, fraction)`.
fn cell_fractions(lo: f64, hi: f64, r: usize) -> Vec<(usize, f64)> {
    let len = hi - lo;
    let first = (lo.floor() as usize).min(r - 1);
    let mut out = Vec::new();
    let mut c = first;
    while c < r && (c as f64) < hi {
        let overlap = hi.min((c + 1) as f64) - lo.max(c as f64);
        if overlap > 0.0 {
            out.push((c, overlap / len));
        }
        c += 1;
    }
    if out.is_empty() {
        out.push((first, 1.0));
    }
    out
}

/// Edge and pair mass of one graph on the `r x r` grid.
fn graph_mass(g: &Graph, members: &[Vec<(usize, f64)>], r: usize) -> (Array2<f64>, Array2<f64>) {
    let n = g.node_count();
    let weight = 1.0 / (n as f64 * n as f64);
    let mut edges = Array2::<f64>::zeros((r, r));
    for (u, v) in g.edges() {
        for &(a, x) in &members[u] {
            for &(b, y) in &members[v] {
                edges[[a, b]] += x * y;
                edges[[b, a]] += x * y;
            }
        }
    }
    let mut totals = vec![0.0; r];
    let mut own = Array2::<f64>::zeros((r, r));
    for m in members {
        for &(a, x) in m {
            totals[a] += x;
            for &(b, y) in m {
                own[[a, b]] += x * y;
            }
        }
    }
    let pairs = Array2::from_shape_fn((r, r), |(a, b)| totals[a] * totals[b] - own[[a, b]]);
    (edges * weight, pairs * weight)
}

/// Estimates one graphon from a collection of graphs.
///
/// All nodes of all graphs are ranked together by normalized degree
/// `deg / (n - 1)` (descending); nodes with equal normalized degree form one
/// block, i.e. the pooled sequence is cut at every positive gap. Each node
/// carries mass `1 / (n_g * G)` so every graph counts equally, and blocks
/// occupy consecutive intervals of `[0, 1]` proportional to their mass. A
/// cell's value is the edge mass over the node-pair mass (pairs taken within
/// the same graph) that falls into it.
pub fn estimate_graphon(graphs: &[&Graph], cfg: &EstimationConfig) -> Result<Graphon> {
    if graphs.is_empty() {
        return Err(Error::InvalidInput(
            "graphon estimation needs at least one graph".into(),
        ));
    }
    if graphs.iter().any(|g| g.node_count() == 0) {
        return Err(Error::InvalidInput(
            "graphon estimation needs graphs with at least one node".into(),
        ));
    }
    let r = cfg.resolve(graphs);
    let graph_count = graphs.len() as f64;

    let mut keys: Vec<NodeKey> = graphs
        .iter()
        .enumerate()
        .flat_map(|(gi, g)| {
            let denom = g.node_count().saturating_sub(1).max(1);
            (0..g.node_count()).map(move |v| NodeKey {
                graph: gi,
                node: v,
                degree: g.degree(v),
                denom,
            })
        })
        .collect();
    keys.sort_by(|a, b| {
        a.cmp_degree(b)
            .then(a.graph.cmp(&b.graph))
            .then(a.node.cmp(&b.node))
    });

    let mut members: Vec<Vec<Vec<(usize, f64)>>> =
        graphs.iter().map(|g| vec![Vec::new(); g.node_count()]).collect();
    let mut blocks: Vec<(usize, usize, f64)> = Vec::new();
    let mut start = 0;
    while start < keys.len() {
        let mut end = start + 1;
        while end < keys.len() && keys[start].cmp_degree(&keys[end]).is_eq() {
            end += 1;
        }
        let mass: f64 = keys[start..end]
            .iter()
            .map(|k| 1.0 / (graphs[k.graph].node_count() as f64 * graph_count))
            .sum();
        blocks.push((start, end, mass));
        start = end;
    }
    let total: f64 = blocks.iter().map(|b| b.2).sum();
    let mut offset = 0.0;
    for &(start, end, mass) in &blocks {
        let lo = offset / total * r as f64;
        offset += mass;
        let hi = offset / total * r as f64;
        let cells = cell_fractions(lo, hi, r);
        for k in &keys[start..end] {
            members[k.graph][k.node] = cells.clone();
        }
    }

    let partial: Vec<(Array2<f64>, Array2<f64>)> = graphs
        .par_chunks(ESTIMATE_CHUNK)
        .zip(members.par_chunks(ESTIMATE_CHUNK))
        .map(|(chunk, member_chunk)| {
            let mut edges = Array2::zeros((r, r));
            let mut pairs = Array2::zeros((r, r));
            for (g, m) in chunk.iter().zip(member_chunk) {
                let (e, p) = graph_mass(g, m, r);
                edges += &e;
                pairs += &p;
            }
            (edges, pairs)
        })
        .collect();
    let mut edges = Array2::<f64>::zeros((r, r));
    let mut pairs = Array2::<f64>::zeros((r, r));
    for (e, p) in &partial {
        edges += e;
        pairs += p;
    }
    let floor = 1e-12;
    let grid = Array2::from_shape_fn((r, r), |(a, b)| {
        if pairs[[a, b]] > floor {
            edges[[a, b]] / pairs[[a, b]]
        } else {
            0.0
        }
    });
    Ok(Graphon::from_trusted(symmetrize(&grid)))
}

/// Draws a W-random graph: latent positions uniform on `[0, 1)`, then each
/// pair `i < j` is joined with probability `f(v_i, v_j)`.
pub fn sample_graph(f: &Graphon, n: usize, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let blocks: Vec<usize> = (0..n).map(|_| f.block_of(rng.gen::<f64>())).collect();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen::<f64>() < f.grid[[blocks[i], blocks[j]]] {
                edges.push((i, j));
            }
        }
    }
    Graph::from_edges(n, edges).expect("sampled endpoints are in range")
}

/// Checks that `weights` is a probability vector of the given length.
pub fn check_simplex(weights: &[f64], len: usize) -> Result<()> {
    if weights.len() != len {
        return Err(Error::NotOnSimplex(format!(
            "{} weights for {len} basis elements",
            weights.len()
        )));
    }
    if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
        return Err(Error::NotOnSimplex(format!("negative or non-finite weight {w}")));
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::NotOnSimplex(format!("weights sum to {sum}")));
    }
    Ok(())
}

/// Convex combination `sum_i weights[i] * basis[i]`.
pub fn mix(basis: &[Graphon], weights: &[f64]) -> Result<Graphon> {
    let first = basis
        .first()
        .ok_or_else(|| Error::InvalidInput("cannot mix an empty basis".into()))?;
    let r = first.resolution();
    if let Some(b) = basis.iter().find(|b| b.resolution() != r) {
        return Err(Error::ResolutionMismatch(r, b.resolution()));
    }
    check_simplex(weights, basis.len())?;
    let mut grid = Array2::zeros((r, r));
    for (b, &w) in basis.iter().zip(weights) {
        grid.scaled_add(w, &b.grid);
    }
    Ok(Graphon::from_trusted(grid))
}
