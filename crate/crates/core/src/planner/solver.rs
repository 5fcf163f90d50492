//! Small dense NLP interface and a built-in augmented-Lagrangian solver with
//! BFGS inner minimization.
//!
//! Problems have the form `min f(x)` subject to `h(x) = 0` and `g(x) ≤ 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Values and dense row-major Jacobians of an NLP at one point.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NlpEvaluation {
    pub cost: f64,
    pub cost_grad: Vec<f64>,
    pub eq: Vec<f64>,
    /// `n_eq × dim`, row-major.
    pub eq_jac: Vec<f64>,
    pub ineq: Vec<f64>,
    /// `n_ineq × dim`, row-major.
    pub ineq_jac: Vec<f64>,
}

impl NlpEvaluation {
    pub fn with_sizes(dim: usize, n_eq: usize, n_ineq: usize) -> Self {
        Self {
            cost: 0.0,
            cost_grad: vec![0.0; dim],
            eq: vec![0.0; n_eq],
            eq_jac: vec![0.0; n_eq * dim],
            ineq: vec![0.0; n_ineq],
            ineq_jac: vec![0.0; n_ineq * dim],
        }
    }

    /// Largest equality residual or positive inequality value.
    pub fn max_violation(&self) -> f64 {
        let eq = self.eq.iter().fold(0.0f64, |m, h| m.max(h.abs()));
        self.ineq.iter().fold(eq, |m, &g| m.max(g))
    }
}

pub trait NlpProblem {
    fn dim(&self) -> usize;
    fn n_eq(&self) -> usize;
    fn n_ineq(&self) -> usize;
    /// Fills `out`, which has been sized by [`NlpEvaluation::with_sizes`].
    fn evaluate(&self, x: &[f64], out: &mut NlpEvaluation) -> Result<()>;
}

/// Pluggable NLP engine.
pub trait NlpSolver {
    fn solve(&self, problem: &dyn NlpProblem, x0: &[f64]) -> Result<SolverReport>;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Bound on constraint violation and Lagrangian stationarity.
    pub tol: f64,
    pub max_outer: usize,
    pub max_inner: usize,
    pub initial_penalty: f64,
    pub penalty_growth: f64,
    pub max_penalty: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_outer: 60,
            max_inner: 2000,
            initial_penalty: 1.0,
            penalty_growth: 10.0,
            max_penalty: 1e12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverReport {
    pub x: Vec<f64>,
    pub outer_iterations: usize,
    pub inner_iterations: usize,
    pub evaluations: usize,
    pub max_violation: f64,
    pub stationarity: f64,
    pub penalty: f64,
    pub eq_multipliers: Vec<f64>,
    pub ineq_multipliers: Vec<f64>,
}

/// The built-in augmented-Lagrangian method.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AugmentedLagrangian {
    pub config: SolverConfig,
}

impl NlpSolver for AugmentedLagrangian {
    fn solve(&self, problem: &dyn NlpProblem, x0: &[f64]) -> Result<SolverReport> {
        solve_nlp(problem, x0, &self.config)
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

struct Lagrangian<'a> {
    problem: &'a dyn NlpProblem,
    lambda: Vec<f64>,
    nu: Vec<f64>,
    rho: f64,
    eval: NlpEvaluation,
    evaluations: usize,
}

impl Lagrangian<'_> {
    /// Augmented Lagrangian value and gradient at `x`.
    fn value_grad(&mut self, x: &[f64], grad: &mut [f64]) -> Result<f64> {
        self.problem.evaluate(x, &mut self.eval)?;
        self.evaluations += 1;
        let n = x.len();
        let e = &self.eval;
        let mut value = e.cost;
        grad.copy_from_slice(&e.cost_grad);
        for (i, &h) in e.eq.iter().enumerate() {
            let w = self.lambda[i] + self.rho * h;
            value += self.lambda[i] * h + 0.5 * self.rho * h * h;
            for (g, j) in grad.iter_mut().zip(&e.eq_jac[i * n..(i + 1) * n]) {
                *g += w * j;
            }
        }
        for (i, &c) in e.ineq.iter().enumerate() {
            let shifted = (self.nu[i] + self.rho * c).max(0.0);
            value += (shifted * shifted - self.nu[i] * self.nu[i]) / (2.0 * self.rho);
            if shifted > 0.0 {
                for (g, j) in grad.iter_mut().zip(&e.ineq_jac[i * n..(i + 1) * n]) {
                    *g += shifted * j;
                }
            }
        }
        if !value.is_finite() {
            return Ok(f64::INFINITY);
        }
        Ok(value)
    }

    /// BFGS on the augmented Lagrangian; returns the inner iteration count.
    fn minimize(&mut self, x: &mut [f64], tol: f64, max_iter: usize) -> Result<usize> {
        let n = x.len();
        let mut grad = vec![0.0; n];
        let mut value = self.value_grad(x, &mut grad)?;
        let mut h_inv = identity(n);
        let mut first = true;
        let mut trial = vec![0.0; n];
        let mut trial_grad = vec![0.0; n];
        let mut dir = vec![0.0; n];
        for iter in 0..max_iter {
            if inf_norm(&grad) <= tol {
                return Ok(iter);
            }
            mat_vec(&h_inv, &grad, &mut dir);
            dir.iter_mut().for_each(|d| *d = -*d);
            let mut slope = dot(&dir, &grad);
            if slope >= 0.0 {
                h_inv = identity(n);
                dir.iter_mut().zip(&grad).for_each(|(d, g)| *d = -g);
                slope = dot(&dir, &grad);
            }
            let mut step = 1.0;
            let mut accepted = false;
            let mut trial_value = value;
            for _ in 0..60 {
                for i in 0..n {
                    trial[i] = x[i] + step * dir[i];
                }
                trial_value = self.value_grad(&trial, &mut trial_grad)?;
                if trial_value <= value + 1e-4 * step * slope {
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if !accepted {
                return Ok(iter);
            }
            let s: Vec<f64> = (0..n).map(|i| trial[i] - x[i]).collect();
            let y: Vec<f64> = (0..n).map(|i| trial_grad[i] - grad[i]).collect();
            let sy = dot(&s, &y);
            let moved = s
                .iter()
                .zip(x.iter())
                .any(|(d, xi)| d.abs() > 1e-15 * xi.abs().max(1e-300));
            x.copy_from_slice(&trial);
            grad.copy_from_slice(&trial_grad);
            let decrease = value - trial_value;
            value = trial_value;
            if !moved || (decrease <= 0.0 && inf_norm(&grad) > tol && step < 1e-12) {
                return Ok(iter + 1);
            }
            if sy > 1e-12 * dot(&y, &y).sqrt() * dot(&s, &s).sqrt() {
                if first {
                    let scale = sy / dot(&y, &y);
                    h_inv = identity(n);
                    h_inv.iter_mut().for_each(|v| *v *= scale);
                    first = false;
                }
                bfgs_update(&mut h_inv, &s, &y, sy);
            }
        }
        Ok(max_iter)
    }
}

fn identity(n: usize) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        m[i * n + i] = 1.0;
    }
    m
}

fn mat_vec(m: &[f64], v: &[f64], out: &mut [f64]) {
    let n = v.len();
    for i in 0..n {
        out[i] = dot(&m[i * n..(i + 1) * n], v);
    }
}

/// `H ← (I − ρ s yᵀ) H (I − ρ y sᵀ) + ρ s sᵀ` with `ρ = 1 / sᵀy`.
fn bfgs_update(h: &mut [f64], s: &[f64], y: &[f64], sy: f64) {
    let n = s.len();
    let rho = 1.0 / sy;
    let mut hy = vec![0.0; n];
    mat_vec(h, y, &mut hy);
    let yhy = dot(y, &hy);
    for i in 0..n {
        for j in 0..n {
            h[i * n + j] +=
                -rho * (hy[i] * s[j] + s[i] * hy[j]) + (rho * rho * yhy + rho) * s[i] * s[j];
        }
    }
}

/// Solves the NLP by the augmented-Lagrangian method.
///
/// Returns as soon as the iterate has violation and stationarity at most
/// `config.tol`; a start that already satisfies both is returned unchanged.
pub fn solve_nlp(
    problem: &dyn NlpProblem,
    x0: &[f64],
    config: &SolverConfig,
) -> Result<SolverReport> {
    let n = problem.dim();
    if x0.len() != n {
        return Err(Error::InvalidParameter {
            name: "initial_guess",
            value: x0.len() as f64,
            reason: "length must equal the problem dimension",
        });
    }
    let (n_eq, n_ineq) = (problem.n_eq(), problem.n_ineq());
    let mut lag = Lagrangian {
        problem,
        lambda: vec![0.0; n_eq],
        nu: vec![0.0; n_ineq],
        rho: config.initial_penalty,
        eval: NlpEvaluation::with_sizes(n, n_eq, n_ineq),
        evaluations: 0,
    };

    let mut x = x0.to_vec();
    problem.evaluate(&x, &mut lag.eval)?;
    lag.evaluations += 1;
    let mut violation = lag.eval.max_violation();
    let mut stationarity = inf_norm(&lag.eval.cost_grad);
    let report =
        |x: Vec<f64>, lag: &Lagrangian, outer, inner, violation, stationarity| SolverReport {
            x,
            outer_iterations: outer,
            inner_iterations: inner,
            evaluations: lag.evaluations,
            max_violation: violation,
            stationarity,
            penalty: lag.rho,
            eq_multipliers: lag.lambda.clone(),
            ineq_multipliers: lag.nu.clone(),
        };
    if violation <= config.tol && stationarity <= config.tol {
        return Ok(report(x, &lag, 0, 0, violation, stationarity));
    }

    let mut inner_tol = 1e-2f64.max(config.tol);
    let mut inner_total = 0;
    let mut best = (violation, x.clone());
    let mut stalled = 0;
    let mut grad = vec![0.0; n];
    for outer in 1..=config.max_outer {
        inner_total += lag.minimize(&mut x, inner_tol, config.max_inner)?;
        problem.evaluate(&x, &mut lag.eval)?;
        lag.evaluations += 1;
        let prev_violation = violation;
        violation = lag.eval.max_violation();

        for (l, &h) in lag.lambda.iter_mut().zip(&lag.eval.eq) {
            *l += lag.rho * h;
        }
        for (v, &g) in lag.nu.iter_mut().zip(&lag.eval.ineq) {
            *v = (*v + lag.rho * g).max(0.0);
        }
        // Lagrangian gradient with the updated multipliers.
        grad.copy_from_slice(&lag.eval.cost_grad);
        for (i, l) in lag.lambda.iter().enumerate() {
            for (g, j) in grad.iter_mut().zip(&lag.eval.eq_jac[i * n..(i + 1) * n]) {
                *g += l * j;
            }
        }
        for (i, v) in lag.nu.iter().enumerate() {
            if *v > 0.0 {
                for (g, j) in grad.iter_mut().zip(&lag.eval.ineq_jac[i * n..(i + 1) * n]) {
                    *g += v * j;
                }
            }
        }
        stationarity = inf_norm(&grad);

        if violation < best.0 {
            best = (violation, x.clone());
        }
        if violation <= config.tol && stationarity <= config.tol {
            return Ok(report(x, &lag, outer, inner_total, violation, stationarity));
        }
        if violation > 0.25 * prev_violation {
            if lag.rho >= config.max_penalty {
                stalled += 1;
                if stalled >= 5 && violation > config.tol {
                    return Err(Error::NlpInfeasible {
                        violation: best.0,
                        best: best.1,
                    });
                }
            }
            lag.rho = (lag.rho * config.penalty_growth).min(config.max_penalty);
        } else {
            stalled = 0;
        }
        inner_tol = (inner_tol * 0.1).max(0.1 * config.tol);
    }
    Err(Error::NlpNotConverged {
        iterations: config.max_outer,
        violation,
        stationarity,
        best: best.1,
    })
}
