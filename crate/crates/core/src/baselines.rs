//! Transferability baselines and the correlation harness.
//!
//! Four baselines compare sets of per-graph vectors with a kernel two-sample
//! statistic (MMD); the fifth compares normalized-Laplacian spectra directly.
//! All scores follow "higher = more transferable".

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{degree_assortativity, density, local_clustering, transitivity};
use crate::graph::Graph;

pub const DEFAULT_BINS: usize = 20;
pub const DEFAULT_SPECTRUM_LEN: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineMethod {
    GraphStatsMmd,
    EgiLaplacian,
    ClusteringCoefDist,
    LaplacianSpectrumDist,
    BetweennessDist,
}

impl BaselineMethod {
    pub const ALL: [BaselineMethod; 5] = [
        BaselineMethod::GraphStatsMmd,
        BaselineMethod::EgiLaplacian,
        BaselineMethod::ClusteringCoefDist,
        BaselineMethod::LaplacianSpectrumDist,
        BaselineMethod::BetweennessDist,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BaselineMethod::GraphStatsMmd => "graph_stats_mmd",
            BaselineMethod::EgiLaplacian => "egi_laplacian",
            BaselineMethod::ClusteringCoefDist => "clustering_coef_dist",
            BaselineMethod::LaplacianSpectrumDist => "laplacian_spectrum_dist",
            BaselineMethod::BetweennessDist => "betweenness_dist",
        }
    }
}

impl fmt::Display for BaselineMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BaselineMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BaselineMethod::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown baseline method '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaselineMeasure {
    pub method: BaselineMethod,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaselineConfig {
    /// Histogram bins for the clustering and betweenness distributions.
    pub bins: usize,
    /// Length of the padded/truncated spectrum vector.
    pub spectrum_len: usize,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        BaselineConfig {
            bins: DEFAULT_BINS,
            spectrum_len: DEFAULT_SPECTRUM_LEN,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistributionKind {
    Clustering,
    Spectrum,
    Betweenness,
}

/// `[avg degree, degree variance, density, assortativity, transitivity, avg clustering]`.
///
/// Degree variance is the population variance.
pub fn graph_stats_vector(g: &Graph) -> Vec<f64> {
    let n = g.node_count();
    if n == 0 {
        return vec![0.0; 6];
    }
    let degrees: Vec<f64> = (0..n).map(|v| g.degree(v) as f64).collect();
    let mean = degrees.iter().sum::<f64>() / n as f64;
    let var = degrees.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / n as f64;
    let clustering = local_clustering(g).iter().sum::<f64>() / n as f64;
    vec![
        mean,
        var,
        density(g),
        degree_assortativity(g),
        transitivity(g),
        clustering,
    ]
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn median(mut values: Vec<f64>) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    Some(if values.len() % 2 == 1 {
        values[mid]
    } else {
        0.5 * (values[mid - 1] + values[mid])
    })
}

/// Mean kernel value over pairs within one sample, excluding the diagonal
/// (falls back to the single self-pair when the sample has one point).
fn within_mean(xs: &[Vec<f64>], kernel: &impl Fn(&[f64], &[f64]) -> f64) -> f64 {
    let m = xs.len();
    if m == 1 {
        return kernel(&xs[0], &xs[0]);
    }
    let sum: f64 = (0..m)
        .map(|i| (i + 1..m).map(|j| kernel(&xs[i], &xs[j])).sum::<f64>())
        .sum();
    2.0 * sum / (m * (m - 1)) as f64
}

/// Unbiased squared MMD with an RBF kernel, clamped at 0.
///
/// The bandwidth is the median pairwise distance of the pooled sample
/// (1 when that median is 0).
pub fn mmd(xs: &[Vec<f64>], ys: &[Vec<f64>]) -> Result<f64> {
    if xs.is_empty() || ys.is_empty() {
        return Err(Error::InvalidInput("MMD needs two non-empty samples".into()));
    }
    let dim = xs[0].len();
    if xs.iter().chain(ys).any(|v| v.len() != dim) {
        return Err(Error::ShapeMismatch(
            "MMD samples must share one dimension".into(),
        ));
    }
    let pooled: Vec<&Vec<f64>> = xs.iter().chain(ys).collect();
    let dists: Vec<f64> = (0..pooled.len())
        .flat_map(|i| {
            let pooled = &pooled;
            (i + 1..pooled.len()).map(move |j| sq_dist(pooled[i], pooled[j]).sqrt())
        })
        .collect();
    let sigma = match median(dists) {
        Some(m) if m > 0.0 => m,
        _ => 1.0,
    };
    let gamma = 1.0 / (2.0 * sigma * sigma);
    let kernel = |a: &[f64], b: &[f64]| (-gamma * sq_dist(a, b)).exp();
    let cross: f64 = xs
        .iter()
        .map(|x| ys.iter().map(|y| kernel(x, y)).sum::<f64>())
        .sum::<f64>()
        / (xs.len() * ys.len()) as f64;
    let value = within_mean(xs, &kernel) + within_mean(ys, &kernel) - 2.0 * cross;
    Ok(value.max(0.0))
}

/// Values within `EDGE_SNAP` of a bin edge count in the bin above it, so that
/// rational values such as 11/55 bin the same way whatever order they were
/// summed in.
const EDGE_SNAP: f64 = 1e-9;

fn histogram(values: &[f64], bins: usize) -> Vec<f64> {
    let bins = bins.max(1);
    let mut h = vec![0.0; bins];
    for &x in values {
        let b = ((x.clamp(0.0, 1.0) * bins as f64 + EDGE_SNAP) as usize).min(bins - 1);
        h[b] += 1.0;
    }
    let total: f64 = h.iter().sum();
    if total > 0.0 {
        h.iter_mut().for_each(|v| *v /= total);
    }
    h
}

/// Eigenvalues of `I - D^{-1/2} A D^{-1/2}`, ascending; isolated nodes get a
/// zero diagonal entry.
pub fn normalized_laplacian_spectrum(g: &Graph) -> Vec<f64> {
    let n = g.node_count();
    if n == 0 {
        return Vec::new();
    }
    let inv_sqrt: Vec<f64> = (0..n)
        .map(|v| match g.degree(v) {
            0 => 0.0,
            d => 1.0 / (d as f64).sqrt(),
        })
        .collect();
    let mut l = DMatrix::<f64>::zeros(n, n);
    for v in 0..n {
        if g.degree(v) > 0 {
            l[(v, v)] = 1.0;
        }
    }
    for (u, v) in g.edges() {
        let x = -inv_sqrt[u] * inv_sqrt[v];
        l[(u, v)] = x;
        l[(v, u)] = x;
    }
    let mut eig = SymmetricEigen::new(l).eigenvalues.as_slice().to_vec();
    eig.sort_by(f64::total_cmp);
    eig
}

/// Betweenness centrality (Brandes), each unordered pair counted once and
/// normalized by `(n-1)(n-2)/2`.
pub fn betweenness(g: &Graph) -> Vec<f64> {
    let n = g.node_count();
    let mut bc = vec![0.0; n];
    let mut stack = Vec::with_capacity(n);
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut sigma = vec![0.0f64; n];
    let mut dist = vec![usize::MAX; n];
    let mut delta = vec![0.0; n];
    let mut queue = VecDeque::new();
    for s in 0..n {
        stack.clear();
        for v in 0..n {
            preds[v].clear();
            sigma[v] = 0.0;
            dist[v] = usize::MAX;
            delta[v] = 0.0;
        }
        sigma[s] = 1.0;
        dist[s] = 0;
        queue.push_back(s);
        while let Some(v) = queue.pop_front() {
            stack.push(v);
            for &w in g.neighbors(v) {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
                if dist[w] == dist[v] + 1 {
                    sigma[w] += sigma[v];
                    preds[w].push(v);
                }
            }
        }
        while let Some(w) = stack.pop() {
            for &v in &preds[w] {
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
            }
            if w != s {
                bc[w] += delta[w];
            }
        }
    }
    if n <= 2 {
        return vec![0.0; n];
    }
    // every pair was visited from both endpoints
    let scale = 1.0 / ((n - 1) * (n - 2)) as f64;
    bc.iter().map(|b| b * scale).collect()
}

/// Fixed-length distribution vector of one graph.
///
/// Histograms have `bins` entries over `[0, 1]` and sum to 1; the spectrum is
/// the sorted normalized-Laplacian spectrum zero-padded or truncated to `bins`.
pub fn distribution_vector(g: &Graph, kind: DistributionKind, bins: usize) -> Vec<f64> {
    match kind {
        DistributionKind::Clustering => histogram(&local_clustering(g), bins),
        DistributionKind::Betweenness => histogram(&betweenness(g), bins),
        DistributionKind::Spectrum => {
            let mut s = normalized_laplacian_spectrum(g);
            s.resize(bins, 0.0);
            s
        }
    }
}

fn padded_distance(a: &[f64], b: &[f64]) -> f64 {
    let len = a.len().max(b.len());
    (0..len)
        .map(|i| {
            let d = a.get(i).copied().unwrap_or(0.0) - b.get(i).copied().unwrap_or(0.0);
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

fn vectors(graphs: &[Graph], f: impl Fn(&Graph) -> Vec<f64> + Sync + Send) -> Vec<Vec<f64>> {
    graphs.par_iter().map(f).collect()
}

/// Transferability score of `pretrain` for `downstream` under one baseline.
pub fn baseline_score(
    pretrain: &[Graph],
    downstream: &[Graph],
    method: BaselineMethod,
    cfg: &BaselineConfig,
) -> Result<BaselineMeasure> {
    if pretrain.is_empty() || downstream.is_empty() {
        return Err(Error::InvalidInput(
            "baselines need pre-training and downstream graphs".into(),
        ));
    }
    let dist_mmd = |kind: DistributionKind, len: usize| -> Result<f64> {
        let xs = vectors(pretrain, |g| distribution_vector(g, kind, len));
        let ys = vectors(downstream, |g| distribution_vector(g, kind, len));
        mmd(&xs, &ys)
    };
    let value = match method {
        BaselineMethod::GraphStatsMmd => {
            let xs = vectors(pretrain, graph_stats_vector);
            let ys = vectors(downstream, graph_stats_vector);
            -mmd(&xs, &ys)?
        }
        BaselineMethod::ClusteringCoefDist => -dist_mmd(DistributionKind::Clustering, cfg.bins)?,
        BaselineMethod::BetweennessDist => -dist_mmd(DistributionKind::Betweenness, cfg.bins)?,
        BaselineMethod::LaplacianSpectrumDist => {
            -dist_mmd(DistributionKind::Spectrum, cfg.spectrum_len)?
        }
        BaselineMethod::EgiLaplacian => {
            let xs = vectors(pretrain, normalized_laplacian_spectrum);
            let ys = vectors(downstream, normalized_laplacian_spectrum);
            let total: f64 = xs
                .par_iter()
                .map(|x| ys.iter().map(|y| padded_distance(x, y)).sum::<f64>())
                .collect::<Vec<f64>>()
                .iter()
                .sum();
            -total / (xs.len() * ys.len()) as f64
        }
    };
    Ok(BaselineMeasure { method, value })
}

/// Sample Pearson correlation.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::UndefinedCorrelation(format!(
            "length mismatch ({} vs {})",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 2 {
        return Err(Error::UndefinedCorrelation("need at least two pairs".into()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation("zero variance".into()));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn complete(n: usize) -> Graph {
        let edges = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j)));
        Graph::from_edges(n, edges).unwrap()
    }

    #[test]
    fn stats_of_triangle() {
        assert_eq!(graph_stats_vector(&complete(3)), vec![2.0, 0.0, 1.0, 0.0, 1.0, 1.0]);
        assert_eq!(graph_stats_vector(&Graph::empty(3)), vec![0.0; 6]);
    }

    #[test]
    fn distributions() {
        let h = distribution_vector(&complete(3), DistributionKind::Clustering, 20);
        assert_eq!(h[19], 1.0);
        let s = distribution_vector(&complete(2), DistributionKind::Spectrum, 4);
        assert!(s[0].abs() < 1e-12 && (s[1] - 2.0).abs() < 1e-12 && s[2] == 0.0);
        let b = distribution_vector(&Graph::empty(4), DistributionKind::Betweenness, 20);
        assert_eq!(b[0], 1.0);
    }

    #[test]
    fn star_betweenness() {
        let star = Graph::from_edges(5, (1..5).map(|i| (0, i))).unwrap();
        let b = betweenness(&star);
        assert!((b[0] - 1.0).abs() < 1e-12);
        assert!(b[1..].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn mmd_identity_and_errors() {
        let xs = vec![vec![0.0, 1.0], vec![2.0, 0.5], vec![1.0, 1.0]];
        assert!(mmd(&xs, &xs).unwrap() <= 1e-9);
        assert_eq!(mmd(&xs[..1], &xs[..1]).unwrap(), 0.0);
        assert!(mmd(&xs, &[vec![1.0]]).is_err());
    }

    #[test]
    fn pearson_fixtures() {
        assert!((pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap() - 1.0).abs() < 1e-12);
        assert!((pearson(&[1.0, 2.0, 3.0], &[6.0, 4.0, 2.0]).unwrap() + 1.0).abs() < 1e-12);
        assert!(pearson(&[1.0, 1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn method_names_round_trip() {
        for m in BaselineMethod::ALL {
            assert_eq!(m.as_str().parse::<BaselineMethod>().unwrap(), m);
            assert_eq!(serde_json::to_string(&m).unwrap(), format!("\"{m}\""));
        }
    }
}
