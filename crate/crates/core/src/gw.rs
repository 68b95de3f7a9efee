//! Entropic Gromov-Wasserstein distance between step graphons.
//!
//! Both graphons carry uniform block measures. The solver alternates between
//! linearizing the square-loss GW objective at the current plan,
//!
//! ```text
//! L(T)[i][j] = sum_k W1[i][k]^2 p_k + sum_l W2[j][l]^2 q_l - 2 (W1 T W2)[i][j]
//! ```
//!
//! and solving the entropic OT problem for `L(T)` with log-domain Sinkhorn.
//! Each Sinkhorn output is rounded onto the transport polytope so the plan
//! satisfies its marginals to floating-point precision. The reported value is
//! the GW objective at the best plan seen, without the entropy term.
//!
//! The regularization is relative: Sinkhorn runs with
//! `epsilon * GW(independent coupling)` so one default works for graphons of
//! any contrast. The first plan is the monotone coupling between the two
//! degree profiles (row means), which breaks the symmetry that makes the
//! independent coupling a stationary point.

use ndarray::{Array1, Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphon::Graphon;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GwConfig {
    pub epsilon: f64,
    pub outer_iters: usize,
    pub sinkhorn_iters: usize,
    pub tol: f64,
}

impl Default for GwConfig {
    fn default() -> Self {
        GwConfig {
            epsilon: 0.05,
            outer_iters: 200,
            sinkhorn_iters: 100,
            tol: 1e-6,
        }
    }
}

impl GwConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.tol > 0.0) || self.outer_iters == 0 || self.sinkhorn_iters == 0 {
            return Err(Error::InvalidInput(format!("GW settings must be positive: {self:?}")));
        }
        Ok(())
    }
}

/// Coupling between two uniform block measures.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    matrix: Array2<f64>,
}

impl TransportPlan {
    /// Outer product of the uniform marginals.
    pub fn independent(r1: usize, r2: usize) -> Self {
        TransportPlan {
            matrix: Array2::from_elem((r1, r2), 1.0 / (r1 * r2) as f64),
        }
    }

    /// Checks non-negativity and that row sums are `1/r1`, column sums `1/r2`
    /// within `tol`.
    pub fn new(matrix: Array2<f64>, tol: f64) -> Result<Self> {
        let plan = TransportPlan { matrix };
        let err = plan.marginal_error();
        if plan.matrix.iter().any(|&v| !(v >= 0.0)) {
            return Err(Error::InvalidInput("transport plan has negative entries".into()));
        }
        if err > tol {
            return Err(Error::InvalidInput(format!(
                "transport plan marginals off by {err:e}"
            )));
        }
        Ok(plan)
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.matrix
    }

    pub fn shape(&self) -> (usize, usize) {
        self.matrix.dim()
    }

    /// Largest absolute deviation of any row or column sum from uniform.
    pub fn marginal_error(&self) -> f64 {
        let (r1, r2) = self.matrix.dim();
        let rows = self.matrix.sum_axis(Axis(1));
        let cols = self.matrix.sum_axis(Axis(0));
        let re = rows.iter().map(|a| (a - 1.0 / r1 as f64).abs()).fold(0.0, f64::max);
        let ce = cols.iter().map(|b| (b - 1.0 / r2 as f64).abs()).fold(0.0, f64::max);
        re.max(ce)
    }
}

#[derive(Debug, Clone)]
pub struct GwResult {
    pub value: f64,
    pub plan: TransportPlan,
    pub converged: bool,
    pub iterations: usize,
    /// Objective after each outer iteration.
    pub trace: Vec<f64>,
}

/// Square-loss GW objective at a fixed plan, using the plan's actual marginals.
pub fn plan_objective(w1: &Array2<f64>, w2: &Array2<f64>, plan: &Array2<f64>) -> f64 {
    let a = plan.sum_axis(Axis(1));
    let b = plan.sum_axis(Axis(0));
    let sq1 = w1.mapv(|v| v * v);
    let sq2 = w2.mapv(|v| v * v);
    let t1 = a.dot(&sq1.dot(&a));
    let t2 = b.dot(&sq2.dot(&b));
    let cross = (&w1.dot(plan).dot(&w2.t()) * plan).sum();
    t1 + t2 - 2.0 * cross
}

struct Problem<'a> {
    w1: &'a Array2<f64>,
    w2: &'a Array2<f64>,
    p: Array1<f64>,
    q: Array1<f64>,
    /// `sum_k W1[i][k]^2 p_k + sum_l W2[j][l]^2 q_l`
    const_cost: Array2<f64>,
}

impl<'a> Problem<'a> {
    fn new(w1: &'a Array2<f64>, w2: &'a Array2<f64>) -> Self {
        let (r1, r2) = (w1.nrows(), w2.nrows());
        let p = Array1::from_elem(r1, 1.0 / r1 as f64);
        let q = Array1::from_elem(r2, 1.0 / r2 as f64);
        let c1 = w1.mapv(|v| v * v).dot(&p);
        let c2 = w2.mapv(|v| v * v).dot(&q);
        let const_cost = Array2::from_shape_fn((r1, r2), |(i, j)| c1[i] + c2[j]);
        Problem {
            w1,
            w2,
            p,
            q,
            const_cost,
        }
    }

    fn linearized_cost(&self, plan: &Array2<f64>) -> Array2<f64> {
        &self.const_cost - &(self.w1.dot(plan).dot(&self.w2.t()) * 2.0)
    }
}

/// Monotone coupling between the degree profiles: blocks sorted by row mean
/// (descending, ties by index) are matched by the north-west corner rule.
fn degree_sorted_plan(w1: &Array2<f64>, w2: &Array2<f64>) -> Array2<f64> {
    let sorted = |w: &Array2<f64>| {
        let d = w.mean_axis(Axis(1)).expect("non-empty grid");
        let mut idx: Vec<usize> = (0..w.nrows()).collect();
        idx.sort_by(|&a, &b| d[b].total_cmp(&d[a]).then(a.cmp(&b)));
        idx
    };
    let (o1, o2) = (sorted(w1), sorted(w2));
    let (r1, r2) = (o1.len(), o2.len());
    // masses in units of 1/(r1 r2): each row holds r2 units, each column r1
    let mut plan = Array2::zeros((r1, r2));
    let (mut i, mut j) = (0, 0);
    let (mut row_left, mut col_left) = (r2, r1);
    while i < r1 && j < r2 {
        let m = row_left.min(col_left);
        plan[[o1[i], o2[j]]] += m as f64 / (r1 * r2) as f64;
        row_left -= m;
        col_left -= m;
        if row_left == 0 {
            i += 1;
            row_left = r2;
        }
        if col_left == 0 {
            j += 1;
            col_left = r1;
        }
    }
    plan
}

fn logsumexp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + values.map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Log-domain Sinkhorn with warm-started potentials; returns the scaled plan.
fn sinkhorn_log(
    cost: &Array2<f64>,
    p: &Array1<f64>,
    q: &Array1<f64>,
    reg: f64,
    iters: usize,
    f: &mut Array1<f64>,
    g: &mut Array1<f64>,
) -> Array2<f64> {
    let (r1, r2) = cost.dim();
    let (log_p, log_q) = (p.mapv(f64::ln), q.mapv(f64::ln));
    for it in 0..iters {
        for i in 0..r1 {
            let row = cost.row(i);
            f[i] = reg * log_p[i] - reg * logsumexp((0..r2).map(|j| (g[j] - row[j]) / reg));
        }
        for j in 0..r2 {
            let col = cost.column(j);
            g[j] = reg * log_q[j] - reg * logsumexp((0..r1).map(|i| (f[i] - col[i]) / reg));
        }
        if it % 10 == 9 {
            // columns are exact after the g-update; check rows
            let err: f64 = (0..r1)
                .map(|i| {
                    let s: f64 = (0..r2).map(|j| ((f[i] + g[j] - cost[[i, j]]) / reg).exp()).sum();
                    (s - p[i]).abs()
                })
                .sum();
            if err < 1e-12 {
                break;
            }
        }
    }
    Array2::from_shape_fn((r1, r2), |(i, j)| ((f[i] + g[j] - cost[[i, j]]) / reg).exp())
}

/// Projects a positive matrix onto the transport polytope of `(p, q)`.
fn round_to_marginals(mut t: Array2<f64>, p: &Array1<f64>, q: &Array1<f64>) -> Array2<f64> {
    let rows = t.sum_axis(Axis(1));
    for (i, mut row) in t.rows_mut().into_iter().enumerate() {
        if rows[i] > 0.0 {
            row *= (p[i] / rows[i]).min(1.0);
        }
    }
    let cols = t.sum_axis(Axis(0));
    for (j, mut col) in t.columns_mut().into_iter().enumerate() {
        if cols[j] > 0.0 {
            col *= (q[j] / cols[j]).min(1.0);
        }
    }
    let err_r = p - &t.sum_axis(Axis(1));
    let err_c = q - &t.sum_axis(Axis(0));
    let mass: f64 = err_r.sum();
    if mass > 0.0 {
        for i in 0..t.nrows() {
            for j in 0..t.ncols() {
                t[[i, j]] += err_r[i] * err_c[j] / mass;
            }
        }
    }
    t
}

/// Entropic GW between `b1` and `b2`, started from the degree-sorted coupling.
pub fn gw_distance(b1: &Graphon, b2: &Graphon, cfg: &GwConfig) -> Result<GwResult> {
    gw_distance_from(b1, b2, cfg, None)
}

/// Entropic GW started from `init` when given (e.g. the previous solve of a
/// slowly changing problem).
pub fn gw_distance_from(
    b1: &Graphon,
    b2: &Graphon,
    cfg: &GwConfig,
    init: Option<&TransportPlan>,
) -> Result<GwResult> {
    cfg.validate()?;
    let (w1, w2) = (b1.grid(), b2.grid());
    let (r1, r2) = (w1.nrows(), w2.nrows());
    let problem = Problem::new(w1, w2);

    let mut plan = match init {
        Some(t) if t.shape() == (r1, r2) => t.matrix.clone(),
        Some(t) => {
            return Err(Error::ShapeMismatch(format!(
                "initial plan is {:?}, problem is {r1}x{r2}",
                t.shape()
            )))
        }
        None => degree_sorted_plan(w1, w2),
    };

    let independent = TransportPlan::independent(r1, r2);
    let scale = plan_objective(w1, w2, &independent.matrix);
    let mut best_value = plan_objective(w1, w2, &plan);
    let mut best_plan = plan.clone();
    if scale <= f64::EPSILON {
        // every coupling costs the same
        let value = plan_objective(w1, w2, &independent.matrix);
        return Ok(GwResult {
            value: value.max(0.0),
            plan: independent,
            converged: true,
            iterations: 0,
            trace: vec![value],
        });
    }
    let reg = cfg.epsilon * scale;

    let mut f = Array1::zeros(r1);
    let mut g = Array1::zeros(r2);
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    for _ in 0..cfg.outer_iters {
        iterations += 1;
        let cost = problem.linearized_cost(&plan);
        let raw = sinkhorn_log(&cost, &problem.p, &problem.q, reg, cfg.sinkhorn_iters, &mut f, &mut g);
        let next = round_to_marginals(raw, &problem.p, &problem.q);
        let change: f64 = (&next - &plan).mapv(f64::abs).sum();
        plan = next;
        let value = plan_objective(w1, w2, &plan);
        trace.push(value);
        if value < best_value {
            best_value = value;
            best_plan = plan.clone();
        }
        if change < cfg.tol {
            converged = true;
            break;
        }
    }
    Ok(GwResult {
        value: best_value.max(0.0),
        plan: TransportPlan { matrix: best_plan },
        converged,
        iterations,
        trace,
    })
}

/// Gradient of the fixed-plan GW objective with respect to the first grid:
/// `2 W1[i][k] p_i p_k - 2 (T W2 T^T)[i][k]` with uniform `p`.
pub fn gw_gradient_wrt_first(b1: &Graphon, b2: &Graphon, plan: &TransportPlan) -> Result<Array2<f64>> {
    let (r1, r2) = (b1.resolution(), b2.resolution());
    if plan.shape() != (r1, r2) {
        return Err(Error::ShapeMismatch(format!(
            "plan is {:?}, graphons are {r1} and {r2}",
            plan.shape()
        )));
    }
    let t = &plan.matrix;
    let pp = 1.0 / (r1 * r1) as f64;
    let coupled = t.dot(b2.grid()).dot(&t.t());
    Ok(b1.grid() * (2.0 * pp) - coupled * 2.0)
}
