//! Built-in property suites with independent oracles.
//!
//! Each check recomputes its quantity a second, deliberately naive way
//! (exhaustive enumeration, finite differences, all-pairs shortest paths) or
//! tests a probabilistic statement at pinned seeds and budgets.

use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::derive_seed;
use crate::error::{Error, Result};
use crate::features::extract_features;
use crate::graph::Graph;
use crate::graphon::{estimate_graphon, mix, sample_graph, EstimationConfig, Graphon, Resolution};
use crate::gw::{gw_distance, gw_gradient_wrt_first, plan_objective, GwConfig};
use crate::motif::{
    cut_distance, cut_norm, hom_density_graphon, sample_densities, summarize_concentration,
    verify_counting_bound, Motif,
};

pub const VERIFY_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Theorems,
    Gw,
    Features,
    All,
}

impl Suite {
    pub fn as_str(self) -> &'static str {
        match self {
            Suite::Theorems => "theorems",
            Suite::Gw => "gw",
            Suite::Features => "features",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Suite::Theorems, Suite::Gw, Suite::Features, Suite::All]
            .into_iter()
            .find(|x| x.as_str() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown suite '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: serde_json::Value,
}

impl CheckResult {
    fn new(name: &str, passed: bool, detail: serde_json::Value) -> Self {
        CheckResult {
            name: name.to_string(),
            passed,
            detail,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub schema_version: u32,
    pub kind: String,
    pub suite: Suite,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

pub fn run_suite(suite: Suite, seed: u64) -> Result<VerifyReport> {
    let mut checks = Vec::new();
    if matches!(suite, Suite::Theorems | Suite::All) {
        checks.push(check_cut_norm_exact(derive_seed(seed, 1), 40)?);
        checks.push(check_cut_norm_is_norm(derive_seed(seed, 2), 50)?);
        checks.push(check_hull(derive_seed(seed, 3), 100)?);
        checks.push(check_counting_lemma(derive_seed(seed, 4), 200)?);
        checks.push(check_counting_bound(derive_seed(seed, 5), 200)?);
        checks.push(check_concentration(derive_seed(seed, 6))?);
        checks.push(check_estimation_consistency(derive_seed(seed, 7), 30)?);
    }
    if matches!(suite, Suite::Gw | Suite::All) {
        checks.push(check_gw_identity(derive_seed(seed, 11), 10)?);
        checks.push(check_gw_constant_pair()?);
        checks.push(check_gw_gradient(derive_seed(seed, 12), 50)?);
        checks.push(check_gw_marginals(derive_seed(seed, 13), 20)?);
    }
    if matches!(suite, Suite::Features | Suite::All) {
        checks.push(check_features_oracle(derive_seed(seed, 21), 20));
        checks.push(check_features_permutation(derive_seed(seed, 22), 20));
    }
    Ok(VerifyReport {
        schema_version: VERIFY_SCHEMA_VERSION,
        kind: "verify".into(),
        suite,
        seed,
        passed: checks.iter().all(|c| c.passed),
        checks,
    })
}

fn random_grid(r: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let mut g = Array2::zeros((r, r));
    for i in 0..r {
        for j in i..r {
            let v: f64 = rng.gen();
            g[[i, j]] = v;
            g[[j, i]] = v;
        }
    }
    g
}

fn random_graphon(r: usize, rng: &mut ChaCha8Rng) -> Graphon {
    Graphon::new(random_grid(r, rng)).expect("random grid is a valid graphon")
}

fn random_simplex(k: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|x| x / total).collect()
}

fn random_graph(n: usize, p: f64, rng: &mut ChaCha8Rng) -> Graph {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen::<f64>() < p {
                edges.push((i, j));
            }
        }
    }
    Graph::from_edges(n, edges).expect("endpoints in range")
}

/// `max_{S,T} |sum d| / r^2` by enumerating every pair of subsets.
pub fn brute_force_cut_norm(d: &Array2<f64>) -> f64 {
    let r = d.nrows();
    let mut best = 0.0f64;
    for s in 0u32..(1 << r) {
        for t in 0u32..(1 << r) {
            let mut sum = 0.0;
            for i in (0..r).filter(|i| s >> i & 1 == 1) {
                for j in (0..r).filter(|j| t >> j & 1 == 1) {
                    sum += d[[i, j]];
                }
            }
            best = best.max(sum.abs());
        }
    }
    best / (r * r) as f64
}

pub fn check_cut_norm_exact(seed: u64, trials: usize) -> Result<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mismatches = 0;
    let mut worst = 0.0f64;
    for t in 0..trials {
        let r = 1 + t % 8;
        let d = random_grid(r, &mut rng) - random_grid(r, &mut rng);
        let err = (cut_norm(&d)? - brute_force_cut_norm(&d)).abs();
        worst = worst.max(err);
        if err > 1e-12 {
            mismatches += 1;
        }
    }
    Ok(CheckResult::new(
        "cut_norm_exact",
        mismatches == 0,
        json!({"trials": trials, "mismatches": mismatches, "max_abs_error": worst}),
    ))
}

pub fn check_cut_norm_is_norm(seed: u64, trials: usize) -> Result<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0;
    for _ in 0..trials {
        let r = rng.gen_range(2..=10);
        let a = random_grid(r, &mut rng) - random_grid(r, &mut rng);
        let b = random_grid(r, &mut rng) - random_grid(r, &mut rng);
        let scale: f64 = rng.gen_range(0.0..3.0);
        let (na, nb) = (cut_norm(&a)?, cut_norm(&b)?);
        let homogeneous = (cut_norm(&(&a * scale))? - scale * na).abs() <= 1e-12;
        let triangle = cut_norm(&(&a + &b))? <= na + nb + 1e-12;
        if !(homogeneous && triangle) {
            failures += 1;
        }
    }
    Ok(CheckResult::new(
        "cut_norm_is_norm",
        failures == 0,
        json!({"trials": trials, "failures": failures}),
    ))
}

/// Mixtures stay valid graphons inside the entrywise hull of their basis.
pub fn check_hull(seed: u64, trials: usize) -> Result<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0;
    for _ in 0..trials {
        let r = rng.gen_range(1..=12);
        let k = rng.gen_range(1..=5);
        let basis: Vec<Graphon> = (0..k).map(|_| random_graphon(r, &mut rng)).collect();
        let w = random_simplex(k, &mut rng);
        let m = mix(&basis, &w)?;
        let grid = m.grid();
        let inside = (0..r).all(|i| {
            (0..r).all(|j| {
                let lo = basis.iter().map(|b| b.grid()[[i, j]]).fold(f64::INFINITY, f64::min);
                let hi = basis.iter().map(|b| b.grid()[[i, j]]).fold(f64::NEG_INFINITY, f64::max);
                let v = grid[[i, j]];
                v >= lo - 1e-12 && v <= hi + 1e-12 && v == grid[[j, i]] && (0.0..=1.0).contains(&v)
            })
        });
        if !inside || Graphon::new(grid.clone()).is_err() {
            failures += 1;
        }
    }
    Ok(CheckResult::new(
        "mixture_in_hull",
        failures == 0,
        json!({"trials": trials, "failures": failures}),
    ))
}

const LEMMA_MOTIFS: [&str; 6] = ["edge", "path3", "triangle", "square", "path4", "star3"];
const BOUND_MOTIFS: [&str; 4] = ["edge", "path3", "triangle", "square"];

/// `|t(F, A) - t(F, B)| <= |F| ||A - B||_cut` with `|F|` the node count.
pub fn check_counting_lemma(seed: u64, trials: usize) -> Result<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0;
    let mut tightest = f64::INFINITY;
    for _ in 0..trials {
        let r = rng.gen_range(1..=10);
        let (a, b) = (random_graphon(r, &mut rng), random_graphon(r, &mut rng));
        let motif = Motif::by_name(LEMMA_MOTIFS.choose(&mut rng).expect("non-empty")).expect("built-in motif");
        let lhs = (hom_density_graphon(&motif, &a)? - hom_density_graphon(&motif, &b)?).abs();
        let rhs = motif.node_count() as f64 * cut_distance(&a, &b)?;
        tightest = tightest.min(rhs - lhs);
        if lhs > rhs + 1e-12 {
            failures += 1;
        }
    }
    Ok(CheckResult::new(
        "counting_lemma",
        failures == 0,
        json!({"trials": trials, "failures": failures, "min_slack": tightest}),
    ))
}

/// Motif densities of a mixture stay within the cut-norm bound of each element.
pub fn check_counting_bound(seed: u64, trials: usize) -> Result<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut holds = 0;
    for _ in 0..trials {
        let k = rng.gen_range(1..=3);
        let basis: Vec<Graphon> = (0..k).map(|_| random_graphon(8, &mut rng)).collect();
        let w = random_simplex(k, &mut rng);
        let motif = Motif::by_name(BOUND_MOTIFS.choose(&mut rng).expect("non-empty")).expect("built-in motif");
        let anchor = rng.gen_range(0..k);
        if verify_counting_bound(&basis, &w, &motif, anchor)?.holds {
            holds += 1;
        }
    }
    Ok(CheckResult::new(
        "counting_bound",
        holds == trials,
        json!({"trials": trials, "holds": holds}),
    ))
}

/// Triangle densities of W-random graphs concentrate at the graphon value.
pub fn check_concentration(seed: u64) -> Result<CheckResult> {
    let f = Graphon::constant(1, 0.5)?;
    let motif = Motif::triangle();
    let target = hom_density_graphon(&motif, &f)?;
    let large = sample_densities(&f, &motif, 400, 100, derive_seed(seed, 400));
    let small = sample_densities(&f, &motif, 100, 100, derive_seed(seed, 100));
    let mut rates = Vec::new();
    let mut bounds_hold = true;
    for step in 1..20 {
        let eps = step as f64 * 0.05;
        let c = summarize_concentration(&large, target, &motif, 400, eps);
        bounds_hold &= c.holds;
        rates.push(json!({"eps": eps, "rate": c.empirical_rate, "bound": c.bound, "vacuous": c.vacuous}));
    }
    let c400 = summarize_concentration(&large, target, &motif, 400, 0.05);
    let c100 = summarize_concentration(&small, target, &motif, 100, 0.05);
    let passed = c400.mean_abs_deviation <= 0.01 && bounds_hold && c400.std_dev < c100.std_dev;
    Ok(CheckResult::new(
        "concentration",
        passed,
        json!({
            "target": target,
            "mean_abs_deviation": c400.mean_abs_deviation,
            "std_n400": c400.std_dev,
            "std_n100": c100.std_dev,
            "rates": rates,
        }),
    ))
}

/// Mean GW distance between the estimate from `count` samples and the truth,
/// over `replicates` independent draws.
pub fn estimation_error(truth: &Graphon, count: usize, n: usize, r: usize, replicates: usize, seed: u64) -> Result<Vec<f64>> {
    let est = EstimationConfig {
        resolution: Resolution::Fixed(r),
        seed,
    };
    (0..replicates)
        .map(|rep| {
            let rep_seed = derive_seed(derive_seed(seed, count as u64), rep as u64);
            let graphs: Vec<Graph> = (0..count)
                .map(|i| sample_graph(truth, n, derive_seed(rep_seed, i as u64)))
                .collect();
            let refs: Vec<&Graph> = graphs.iter().collect();
            Ok(gw_distance(&estimate_graphon(&refs, &est)?, truth, &GwConfig::default())?.value)
        })
        .collect()
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Estimates of a planted 2-block graphon approach it as samples grow.
pub fn check_estimation_consistency(seed: u64, replicates: usize) -> Result<CheckResult> {
    let truth = Graphon::from_rows(&[vec![0.8, 0.1], vec![0.1, 0.6]])?;
    let few = estimation_error(&truth, 5, 200, 16, replicates, seed)?;
    let many = estimation_error(&truth, 50, 200, 16, replicates, seed)?;
    let worst = many.iter().copied().fold(0.0, f64::max);
    let within = many.iter().filter(|&&d| d <= 0.02).count() as f64 / many.len() as f64;
    let (m5, m50) = (mean(&few), mean(&many));
    Ok(CheckResult::new(
        "estimation_consistency",
        m50 <= 0.02 && m50 < m5,
        json!({
            "replicates": replicates,
            "mean_5": m5,
            "mean_50": m50,
            "max_50": worst,
            "share_50_within_0.02": within,
        }),
    ))
}

pub fn check_gw_identity(seed: u64, trials: usize) -> Result<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let b = random_graphon(rng.gen_range(2..=16), &mut rng);
        worst = worst.max(gw_distance(&b, &b, &GwConfig::default())?.value);
    }
    Ok(CheckResult::new(
        "gw_identity",
        worst <= 1e-3,
        json!({"trials": trials, "max_distance": worst}),
    ))
}

pub fn check_gw_constant_pair() -> Result<CheckResult> {
    let a = Graphon::constant(3, 0.2)?;
    let b = Graphon::constant(5, 0.8)?;
    let value = gw_distance(&a, &b, &GwConfig::default())?.value;
    Ok(CheckResult::new(
        "gw_constant_pair",
        (value - 0.36).abs() <= 1e-6,
        json!({"value": value, "expected": 0.36}),
    ))
}

/// Envelope gradient against central differences of the fixed-plan objective.
pub fn check_gw_gradient(seed: u64, trials: usize) -> Result<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let (r1, r2) = (rng.gen_range(2..=8), rng.gen_range(2..=8));
        let (a, b) = (random_graphon(r1, &mut rng), random_graphon(r2, &mut rng));
        let plan = gw_distance(&a, &b, &GwConfig::default())?.plan;
        let grad = gw_gradient_wrt_first(&a, &b, &plan)?;
        let dir = random_grid(r1, &mut rng) - 0.5;
        let h = 1e-4;
        let f = |s: f64| plan_objective(&(a.grid() + &(&dir * s)), b.grid(), plan.matrix());
        let fd = (f(h) - f(-h)) / (2.0 * h);
        let analytic = (&grad * &dir).sum();
        let rel = (fd - analytic).abs() / fd.abs().max(analytic.abs()).max(1e-12);
        worst = worst.max(rel);
    }
    Ok(CheckResult::new(
        "gw_gradient",
        worst <= 1e-5,
        json!({"trials": trials, "max_relative_error": worst}),
    ))
}

pub fn check_gw_marginals(seed: u64, trials: usize) -> Result<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let a = random_graphon(rng.gen_range(1..=16), &mut rng);
        let b = random_graphon(rng.gen_range(1..=16), &mut rng);
        worst = worst.max(gw_distance(&a, &b, &GwConfig::default())?.plan.marginal_error());
    }
    Ok(CheckResult::new(
        "gw_marginals",
        worst <= 1e-6,
        json!({"trials": trials, "max_marginal_error": worst}),
    ))
}

/// Features recomputed from the adjacency matrix and all-pairs shortest paths.
pub fn brute_force_features(g: &Graph) -> [f64; 6] {
    let n = g.node_count();
    if n == 0 {
        return [0.0; 6];
    }
    let mut adj = vec![vec![0u64; n]; n];
    for (u, v) in g.edges() {
        adj[u][v] = 1;
        adj[v][u] = 1;
    }
    let deg: Vec<f64> = adj.iter().map(|row| row.iter().sum::<u64>() as f64).collect();
    let mut tri = vec![0.0; n];
    for i in 0..n {
        let mut closed = 0;
        for j in 0..n {
            for k in 0..n {
                closed += adj[i][j] * adj[j][k] * adj[k][i];
            }
        }
        tri[i] = closed as f64 / 2.0;
    }
    let clustering: Vec<f64> = (0..n)
        .map(|i| if deg[i] < 2.0 { 0.0 } else { 2.0 * tri[i] / (deg[i] * (deg[i] - 1.0)) })
        .collect();

    const INF: usize = usize::MAX / 4;
    let mut dist = vec![vec![INF; n]; n];
    for i in 0..n {
        dist[i][i] = 0;
        for j in 0..n {
            if adj[i][j] == 1 {
                dist[i][j] = 1;
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if dist[i][k] + dist[k][j] < dist[i][j] {
                    dist[i][j] = dist[i][k] + dist[k][j];
                }
            }
        }
    }
    let closeness: Vec<f64> = (0..n)
        .map(|i| {
            let reach: Vec<usize> = (0..n).filter(|&j| j != i && dist[i][j] < INF).map(|j| dist[i][j]).collect();
            let total: usize = reach.iter().sum();
            if n <= 1 || total == 0 {
                0.0
            } else {
                let k = reach.len() as f64;
                (k / total as f64) * (k / (n - 1) as f64)
            }
        })
        .collect();

    let m: f64 = deg.iter().sum::<f64>() / 2.0;
    let density = if n > 1 { 2.0 * m / (n * (n - 1)) as f64 } else { 0.0 };
    // Newman's edge formula
    let assortativity = if m == 0.0 {
        0.0
    } else {
        let (mut jk, mut half_sum, mut half_sq) = (0.0, 0.0, 0.0);
        for (u, v) in g.edges() {
            jk += deg[u] * deg[v];
            half_sum += 0.5 * (deg[u] + deg[v]);
            half_sq += 0.5 * (deg[u] * deg[u] + deg[v] * deg[v]);
        }
        let mean_half = half_sum / m;
        let num = jk / m - mean_half * mean_half;
        let den = half_sq / m - mean_half * mean_half;
        if den.abs() <= 1e-12 * (half_sq / m).max(1.0) {
            0.0
        } else {
            (num / den).clamp(-1.0, 1.0)
        }
    };
    let triples: f64 = deg.iter().map(|d| d * (d - 1.0).max(0.0) / 2.0).sum();
    let transitivity = if triples == 0.0 { 0.0 } else { tri.iter().sum::<f64>() / triples };
    let mean = |xs: &[f64]| xs.iter().sum::<f64>() / n as f64;
    [mean(&deg), mean(&clustering), mean(&closeness), density, assortativity, transitivity]
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn check_features_oracle(seed: u64, trials: usize) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let n = rng.gen_range(1..=30);
        let p = rng.gen_range(0.02..0.6);
        let g = random_graph(n, p, &mut rng);
        worst = worst.max(max_diff(extract_features(&g).as_slice(), &brute_force_features(&g)));
    }
    CheckResult::new(
        "features_oracle",
        worst <= 1e-9,
        json!({"trials": trials, "max_abs_error": worst}),
    )
}

pub fn check_features_permutation(seed: u64, trials: usize) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let n = rng.gen_range(2..=40);
        let g = random_graph(n, rng.gen_range(0.05..0.5), &mut rng);
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        let h = g.permuted(&perm).expect("valid permutation");
        worst = worst.max(max_diff(extract_features(&g).as_slice(), extract_features(&h).as_slice()));
    }
    CheckResult::new(
        "features_permutation",
        worst <= 1e-9,
        json!({"trials": trials, "max_abs_error": worst}),
    )
}
