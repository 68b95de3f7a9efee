//! Feasibility of pre-training on a corpus for a downstream dataset.
//!
//! Pre-training graphs are summarized by three graphon bases:
//!
//! - **integrated**: one graphon from every graph pooled together;
//! - **domain**: one graphon per source domain;
//! - **topological**: one graphon per k-means cluster of the graphs'
//!   topological feature vectors.
//!
//! For each basis the mixture weights are parameterized by a softmax over
//! logits and optimized with Adam against the entropic GW distance to the
//! downstream graphon. The gradient of the distance with respect to the mixed
//! graphon is taken at the current optimal plan (envelope gradient) and
//! chained through the mixture and the softmax. The feasibility score is the
//! negated smallest optimized distance over the three bases.

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::extract_features;
use crate::graph::Graph;
use crate::graphon::{estimate_graphon, mix, EstimationConfig, Graphon, Resolution};
use crate::gw::{gw_distance, gw_distance_from, gw_gradient_wrt_first, GwConfig, TransportPlan};
use crate::kmeans::kmeans;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisKind {
    Integrated,
    Domain,
    Topological,
}

impl BasisKind {
    pub const ALL: [BasisKind; 3] = [BasisKind::Integrated, BasisKind::Domain, BasisKind::Topological];

    pub fn as_str(&self) -> &'static str {
        match self {
            BasisKind::Integrated => "integrated",
            BasisKind::Domain => "domain",
            BasisKind::Topological => "topological",
        }
    }
}

impl std::str::FromStr for BasisKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "integrated" => Ok(BasisKind::Integrated),
            "domain" => Ok(BasisKind::Domain),
            "topological" => Ok(BasisKind::Topological),
            other => Err(Error::InvalidInput(format!(
                "unknown basis {other:?} (expected integrated, domain or topological)"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct GraphonBasis {
    pub kind: BasisKind,
    pub elements: Vec<Graphon>,
    pub split_labels: Vec<String>,
}

impl GraphonBasis {
    pub fn new(kind: BasisKind, elements: Vec<Graphon>, split_labels: Vec<String>) -> Result<Self> {
        let first = elements
            .first()
            .ok_or_else(|| Error::InvalidInput("a basis needs at least one graphon".into()))?;
        if let Some(e) = elements.iter().find(|e| e.resolution() != first.resolution()) {
            return Err(Error::ResolutionMismatch(first.resolution(), e.resolution()));
        }
        if kind == BasisKind::Integrated && elements.len() != 1 {
            return Err(Error::InvalidInput("the integrated basis has exactly one graphon".into()));
        }
        if split_labels.len() != elements.len() {
            return Err(Error::InvalidInput("one split label per basis element".into()));
        }
        Ok(GraphonBasis {
            kind,
            elements,
            split_labels,
        })
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn resolution(&self) -> usize {
        self.elements[0].resolution()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub learning_rate: f64,
    pub max_steps: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_eps: f64,
    /// Stop once the distance changes by less than this between steps.
    pub tol: f64,
    pub kmeans_k: usize,
    pub kmeans_max_iter: usize,
    pub standardize_features: bool,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            learning_rate: 0.05,
            max_steps: 300,
            beta1: 0.9,
            beta2: 0.999,
            adam_eps: 1e-8,
            tol: 1e-5,
            kmeans_k: 5,
            kmeans_max_iter: 300,
            standardize_features: true,
            seed: 0,
        }
    }
}

/// Softmax-parameterized mixture weights with Adam moments.
#[derive(Debug, Clone)]
pub struct MixtureState {
    logits: Vec<f64>,
    first_moment: Vec<f64>,
    second_moment: Vec<f64>,
    step: usize,
}

impl MixtureState {
    /// Uniform weights over `k` elements.
    pub fn uniform(k: usize) -> Self {
        MixtureState {
            logits: vec![0.0; k],
            first_moment: vec![0.0; k],
            second_moment: vec![0.0; k],
            step: 0,
        }
    }

    pub fn logits(&self) -> &[f64] {
        &self.logits
    }

    pub fn step_count(&self) -> usize {
        self.step
    }

    pub fn weights(&self) -> Vec<f64> {
        softmax(&self.logits)
    }

    /// One Adam step given the gradient with respect to the weights.
    pub fn apply_weight_gradient(&mut self, grad_weights: &[f64], cfg: &OptimizerConfig) {
        let w = self.weights();
        let mean: f64 = w.iter().zip(grad_weights).map(|(a, g)| a * g).sum();
        self.step += 1;
        let t = self.step as i32;
        for j in 0..self.logits.len() {
            let g = w[j] * (grad_weights[j] - mean);
            self.first_moment[j] = cfg.beta1 * self.first_moment[j] + (1.0 - cfg.beta1) * g;
            self.second_moment[j] = cfg.beta2 * self.second_moment[j] + (1.0 - cfg.beta2) * g * g;
            let m_hat = self.first_moment[j] / (1.0 - cfg.beta1.powi(t));
            let v_hat = self.second_moment[j] / (1.0 - cfg.beta2.powi(t));
            self.logits[j] -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.adam_eps);
        }
    }
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

fn pooled<'a>(splits: &'a BTreeMap<String, Vec<Graph>>) -> Vec<&'a Graph> {
    splits.values().flatten().collect()
}

fn standardize(points: &mut [Vec<f64>]) {
    let Some(dim) = points.first().map(Vec::len) else {
        return;
    };
    let m = points.len() as f64;
    for d in 0..dim {
        let mean = points.iter().map(|p| p[d]).sum::<f64>() / m;
        let var = points.iter().map(|p| (p[d] - mean).powi(2)).sum::<f64>() / m;
        let sd = var.sqrt();
        for p in points.iter_mut() {
            p[d] = if sd > 1e-12 { (p[d] - mean) / sd } else { 0.0 };
        }
    }
}

/// Cluster labels for the topological basis.
pub fn topological_clusters(graphs: &[&Graph], cfg: &OptimizerConfig) -> Vec<usize> {
    let mut points: Vec<Vec<f64>> = graphs
        .par_iter()
        .map(|g| extract_features(g).0.to_vec())
        .collect();
    if cfg.standardize_features {
        standardize(&mut points);
    }
    kmeans(&points, cfg.kmeans_k.max(1), cfg.kmeans_max_iter, cfg.seed)
}

/// Builds the integrated, domain and topological bases (in that order).
///
/// Every element is estimated at the resolution `est` resolves for the pooled graphs.
pub fn build_bases(
    splits: &BTreeMap<String, Vec<Graph>>,
    cfg: &OptimizerConfig,
    est: &EstimationConfig,
) -> Result<Vec<GraphonBasis>> {
    BasisKind::ALL
        .iter()
        .map(|&kind| build_basis(splits, kind, cfg, est))
        .collect()
}

pub fn build_basis(
    splits: &BTreeMap<String, Vec<Graph>>,
    kind: BasisKind,
    cfg: &OptimizerConfig,
    est: &EstimationConfig,
) -> Result<GraphonBasis> {
    let all = pooled(splits);
    if all.is_empty() {
        return Err(Error::InvalidInput("no pre-training graphs".into()));
    }
    let est = EstimationConfig {
        resolution: Resolution::Fixed(est.resolve(&all)),
        ..*est
    };
    let (groups, labels): (Vec<Vec<&Graph>>, Vec<String>) = match kind {
        BasisKind::Integrated => (vec![all], vec!["all".to_string()]),
        BasisKind::Domain => splits
            .iter()
            .filter(|(_, gs)| !gs.is_empty())
            .map(|(name, gs)| (gs.iter().collect(), name.clone()))
            .unzip(),
        BasisKind::Topological => {
            let labels = topological_clusters(&all, cfg);
            let k = labels.iter().max().map_or(0, |m| m + 1);
            let mut groups = vec![Vec::new(); k];
            for (g, &l) in all.iter().zip(&labels) {
                groups[l].push(*g);
            }
            groups
                .into_iter()
                .enumerate()
                .filter(|(_, gs)| !gs.is_empty())
                .map(|(c, gs)| (gs, format!("cluster-{c}")))
                .unzip()
        }
    };
    let elements = groups
        .iter()
        .map(|gs| estimate_graphon(gs, &est))
        .collect::<Result<Vec<_>>>()?;
    GraphonBasis::new(kind, elements, labels)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MixtureFit {
    pub alpha_star: Vec<f64>,
    pub distance: f64,
    /// Best distance seen after each step (non-increasing).
    pub trace: Vec<f64>,
    pub converged: bool,
    pub steps: usize,
}

fn weight_gradient(elements: &[Graphon], mixed: &Graphon, target: &Graphon, plan: &TransportPlan) -> Result<Vec<f64>> {
    let grad = gw_gradient_wrt_first(mixed, target, plan)?;
    Ok(elements
        .iter()
        .map(|b| (&grad * b.grid()).sum())
        .collect())
}

/// Minimizes `GW(mix(basis, alpha), target)` over the simplex.
///
/// Identical elements span no extra mixtures, so they are merged before the
/// descent and share their weight equally afterwards; a basis with repeats
/// thus scores exactly like the basis without them.
pub fn optimize_mixture(
    basis: &GraphonBasis,
    target: &Graphon,
    cfg: &OptimizerConfig,
    gw: &GwConfig,
) -> Result<MixtureFit> {
    let mut distinct: Vec<Graphon> = Vec::new();
    let slot: Vec<usize> = basis
        .elements
        .iter()
        .map(|e| match distinct.iter().position(|d| d == e) {
            Some(i) => i,
            None => {
                distinct.push(e.clone());
                distinct.len() - 1
            }
        })
        .collect();
    let mut fit = optimize_distinct(&distinct, target, cfg, gw)?;
    let mut copies = vec![0usize; distinct.len()];
    for &i in &slot {
        copies[i] += 1;
    }
    fit.alpha_star = slot.iter().map(|&i| fit.alpha_star[i] / copies[i] as f64).collect();
    Ok(fit)
}

fn optimize_distinct(
    elements: &[Graphon],
    target: &Graphon,
    cfg: &OptimizerConfig,
    gw: &GwConfig,
) -> Result<MixtureFit> {
    if elements.len() == 1 {
        let res = gw_distance(&elements[0], target, gw)?;
        return Ok(MixtureFit {
            alpha_star: vec![1.0],
            distance: res.value,
            trace: vec![res.value],
            converged: true,
            steps: 0,
        });
    }
    let mut state = MixtureState::uniform(elements.len());
    let mut best = (f64::INFINITY, state.weights());
    let mut trace = Vec::with_capacity(cfg.max_steps);
    let mut plan: Option<TransportPlan> = None;
    let mut previous = f64::NAN;
    let mut converged = false;
    for _ in 0..cfg.max_steps {
        let weights = state.weights();
        let mixed = mix(elements, &weights)?;
        let res = gw_distance_from(&mixed, target, gw, plan.as_ref())?;
        if res.value < best.0 {
            best = (res.value, weights.clone());
        }
        trace.push(best.0);
        if (res.value - previous).abs() < cfg.tol {
            converged = true;
            break;
        }
        previous = res.value;
        let grad = weight_gradient(elements, &mixed, target, &res.plan)?;
        state.apply_weight_gradient(&grad, cfg);
        plan = Some(res.plan);
    }
    Ok(MixtureFit {
        alpha_star: best.1,
        distance: best.0,
        steps: trace.len(),
        trace,
        converged,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BasisReport {
    pub kind: BasisKind,
    pub split_labels: Vec<String>,
    pub optimized_distance: f64,
    pub alpha_star: Vec<f64>,
    pub converged: bool,
    pub steps: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Provenance {
    pub pretrain_resolution: usize,
    pub downstream_resolution: usize,
    pub pretrain_graphs: BTreeMap<String, usize>,
    pub downstream_graphs: usize,
    pub optimizer: OptimizerConfig,
    pub estimation: EstimationConfig,
    pub gw: GwConfig,
}

/// Wall-clock times in milliseconds; the only non-deterministic part of a report.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Timings {
    pub total_ms: f64,
    pub bases_ms: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub schema_version: u32,
    pub zeta: f64,
    pub winning_basis: BasisKind,
    pub bases: Vec<BasisReport>,
    pub provenance: Provenance,
    pub timings: Timings,
}

/// Feasibility of pre-training on `pretrain_splits` (domain -> graphs) for `downstream`.
///
/// The downstream graphon is estimated from all downstream graphs at its own
/// resolution; bases use the pooled pre-training resolution.
pub fn feasibility(
    pretrain_splits: &BTreeMap<String, Vec<Graph>>,
    downstream: &[Graph],
    cfg: &OptimizerConfig,
    est: &EstimationConfig,
    gw: &GwConfig,
) -> Result<FeasibilityReport> {
    let start = Instant::now();
    if downstream.is_empty() {
        return Err(Error::InvalidInput("no downstream graphs".into()));
    }
    gw.validate()?;
    let down_refs: Vec<&Graph> = downstream.iter().collect();
    let target = estimate_graphon(&down_refs, est)?;
    let bases = build_bases(pretrain_splits, cfg, est)?;

    let fits: Vec<(Result<MixtureFit>, f64)> = bases
        .par_iter()
        .map(|b| {
            let t = Instant::now();
            let fit = optimize_mixture(b, &target, cfg, gw);
            (fit, t.elapsed().as_secs_f64() * 1e3)
        })
        .collect();

    let mut reports = Vec::new();
    let mut timings = Timings::default();
    for (basis, (fit, ms)) in bases.iter().zip(fits) {
        let fit = fit?;
        timings.bases_ms.insert(basis.kind.as_str().to_string(), ms);
        reports.push(BasisReport {
            kind: basis.kind,
            split_labels: basis.split_labels.clone(),
            optimized_distance: fit.distance,
            alpha_star: fit.alpha_star,
            converged: fit.converged,
            steps: fit.steps,
        });
    }
    let winner = reports
        .iter()
        .min_by(|a, b| a.optimized_distance.total_cmp(&b.optimized_distance))
        .expect("three bases");
    let zeta = -winner.optimized_distance;
    let winning_basis = winner.kind;
    timings.total_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(FeasibilityReport {
        schema_version: REPORT_SCHEMA_VERSION,
        zeta,
        winning_basis,
        provenance: Provenance {
            pretrain_resolution: bases[0].resolution(),
            downstream_resolution: target.resolution(),
            pretrain_graphs: pretrain_splits.iter().map(|(k, v)| (k.clone(), v.len())).collect(),
            downstream_graphs: downstream.len(),
            optimizer: *cfg,
            estimation: *est,
            gw: *gw,
        },
        bases: reports,
        timings,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SelectionRow {
    pub subset: Vec<String>,
    pub zeta: f64,
    pub winning_basis: BasisKind,
}

/// All `budget`-element subsets of `0..n` in lexicographic order.
pub fn combinations(n: usize, budget: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if budget > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..budget).collect();
    loop {
        out.push(idx.clone());
        let Some(i) = (0..budget).rev().find(|&i| idx[i] != i + n - budget) else {
            return out;
        };
        idx[i] += 1;
        for j in i + 1..budget {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Scores every `budget`-sized subset of candidate datasets (each candidate is
/// one domain) and ranks them by feasibility, best first; ties by name.
pub fn select_pretraining_data(
    candidates: &BTreeMap<String, Vec<Graph>>,
    downstream: &[Graph],
    budget: usize,
    cfg: &OptimizerConfig,
    est: &EstimationConfig,
    gw: &GwConfig,
) -> Result<Vec<SelectionRow>> {
    if budget == 0 {
        return Err(Error::InvalidInput("selection budget must be >= 1".into()));
    }
    if budget > candidates.len() {
        return Err(Error::InvalidInput(format!(
            "budget {budget} exceeds {} candidates",
            candidates.len()
        )));
    }
    let names: Vec<&String> = candidates.keys().collect();
    let subsets = combinations(names.len(), budget);
    let rows: Vec<Result<SelectionRow>> = subsets
        .par_iter()
        .map(|subset| {
            let splits: BTreeMap<String, Vec<Graph>> = subset
                .iter()
                .map(|&i| (names[i].clone(), candidates[names[i]].clone()))
                .collect();
            let report = feasibility(&splits, downstream, cfg, est, gw)?;
            Ok(SelectionRow {
                subset: splits.into_keys().collect(),
                zeta: report.zeta,
                winning_basis: report.winning_basis,
            })
        })
        .collect();
    let mut rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| b.zeta.total_cmp(&a.zeta).then_with(|| a.subset.cmp(&b.subset)));
    Ok(rows)
}
