//! Floquet-series solution of Mathieu's equation `x'' + (c0 − 2 c1 cos 2τ) x = 0`.
//!
//! Solutions are written as `e^{±μτ} Σ_{n=−N}^{N} C_{2n} e^{±2inτ}` where μ is the
//! characteristic exponent. μ comes from the closed form
//!
//! ```text
//! cosh(πμ) = 1 − 2 Δ(0) sin²(π√c0 / 2)
//! ```
//!
//! with `Δ(0)` the infinite tridiagonal Hill determinant whose row `n` carries
//! `β_n(0)` on both off-diagonals, and `β_n(μ) = c1 / ((2n − iμ)² − c0)`. The
//! coefficients follow from the three-term recurrence
//! `β_n C_{2(n−1)} + C_{2n} + β_n C_{2(n+1)} = 0`, solved downward as a
//! continued fraction with `C_0 = 1`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{to_mathieu, MathieuParams, ModelParams, PendulumState, VerticalSinusoid};

/// Denominators below this magnitude are treated as resonant.
pub const DEGENERATE_TOL: f64 = 1e-14;

/// Relative Wronskian below which the two basis functions are considered
/// linearly dependent at the fitting instant.
pub const SINGULAR_BASIS_TOL: f64 = 1e-12;

/// Imaginary parts below this are treated as round-off when a real exponent
/// is required.
const REAL_EXPONENT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SeriesConfig {
    /// Number of harmonics `N` kept on each side of `C_0`.
    pub n_terms: usize,
    /// Depth `D` of the continued fraction (innermost index).
    pub depth: usize,
    /// Half-width of the explicit Hill determinant before the closed-form
    /// tail correction is applied.
    pub hill_half_width: usize,
}

impl Default for SeriesConfig {
    fn default() -> Self {
        Self::with_terms(10)
    }
}

impl SeriesConfig {
    pub fn with_terms(n_terms: usize) -> Self {
        Self {
            n_terms,
            depth: n_terms + 20,
            hill_half_width: 1024,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_terms == 0 {
            return Err(Error::InvalidParameter {
                name: "n_terms",
                value: 0.0,
                reason: "must be at least 1",
            });
        }
        if self.depth < self.n_terms {
            return Err(Error::InvalidParameter {
                name: "depth",
                value: self.depth as f64,
                reason: "must be at least n_terms",
            });
        }
        if self.hill_half_width == 0 {
            return Err(Error::InvalidParameter {
                name: "hill_half_width",
                value: 0.0,
                reason: "must be at least 1",
            });
        }
        Ok(())
    }
}

/// Characteristic exponent in the τ domain. The equation's exponent pair is
/// `{−μ, +μ}`; the stored value is the representative with `Re μ ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicExponent {
    pub re: f64,
    pub im: f64,
}

impl CharacteristicExponent {
    /// Reduces `mu` modulo `2i` (the exponent is only defined up to that
    /// shift over a period of π) and picks the member of `{μ, −μ}` with
    /// `Re ≥ 0`, and `Im ≥ 0` when the real part vanishes.
    pub fn canonical(mu: Complex64) -> Self {
        let mut im = mu.im - 2.0 * (mu.im / 2.0).round();
        let mut re = mu.re;
        if re < 0.0 || (re == 0.0 && im < 0.0) {
            re = -re;
            im = -im;
        }
        if (im + 1.0).abs() < 1e-12 {
            im = 1.0;
        }
        Self { re, im }
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    /// The pair `(μ1, μ2) = (−μ, μ)` with `Re μ1 ≤ Re μ2`.
    pub fn pair(&self) -> (Complex64, Complex64) {
        (-self.value(), self.value())
    }

    /// Growth rate in physical time, `Re(μ) ω / 2` (1/s).
    pub fn growth_rate(&self, omega: f64) -> f64 {
        0.5 * self.re * omega
    }

    /// Real exponent, or an error if the exponent carries an imaginary part.
    pub fn real(&self) -> Result<f64> {
        if self.im.abs() <= REAL_EXPONENT_TOL * self.re.abs().max(1.0) {
            Ok(self.re)
        } else {
            Err(Error::NonRealExponent {
                re: self.re,
                im: self.im,
            })
        }
    }
}

/// `β_n(μ) = c1 / ((2n − iμ)² − c0)`.
pub fn beta(n: i64, mu: Complex64, params: &MathieuParams) -> Result<Complex64> {
    let k = Complex64::new(2.0 * n as f64, 0.0) - Complex64::i() * mu;
    let denom = k * k - params.c0;
    if denom.norm() < DEGENERATE_TOL {
        return Err(Error::DegenerateParameters {
            what: "β_n denominator",
            magnitude: denom.norm(),
        });
    }
    Ok(params.c1 / denom)
}

fn beta_at_zero(n: i64, params: &MathieuParams) -> Result<f64> {
    let denom = 4.0 * (n * n) as f64 - params.c0;
    if denom.abs() < DEGENERATE_TOL {
        return Err(Error::DegenerateParameters {
            what: "β_n(0) denominator",
            magnitude: denom.abs(),
        });
    }
    Ok(params.c1 / denom)
}

/// Determinant of the `(2M+1) × (2M+1)` truncation of `Δ(0)`, rows `n = −M..=M`.
pub fn hill_determinant_at_zero(params: &MathieuParams, half_width: usize) -> Result<f64> {
    if half_width == 0 {
        return Err(Error::InvalidParameter {
            name: "half_width",
            value: 0.0,
            reason: "must be at least 1",
        });
    }
    let m = half_width as i64;
    // D_k = D_{k−1} − β_k β_{k−1} D_{k−2} over rows k = −M..=M.
    let mut prev2 = 1.0;
    let mut prev = 1.0;
    let mut beta_prev = beta_at_zero(-m, params)?;
    for n in (-m + 1)..=m {
        let b = beta_at_zero(n, params)?;
        let next = prev - b * beta_prev * prev2;
        prev2 = prev;
        prev = next;
        beta_prev = b;
    }
    Ok(prev)
}

/// `Δ(0)` of the infinite matrix: the truncated determinant at `half_width`
/// times a closed-form factor for the rows beyond it.
///
/// Each row added beyond `M` scales the determinant by `1 − β_n β_{n−1}` up to
/// `O(n⁻⁸)`. Summing the two tails asymptotically gives
/// `ln(Δ/Δ_M) = −c1²/(24M³) − c1²(3c0 − 2)/(240M⁵) + O(M⁻⁶)`. Plain truncation
/// converges only as `M⁻³`.
pub fn hill_determinant_limit(params: &MathieuParams, half_width: usize) -> Result<f64> {
    let truncated = hill_determinant_at_zero(params, half_width)?;
    let m = half_width as f64;
    let c1_sq = params.c1 * params.c1;
    let m3 = m * m * m;
    let log_tail = -c1_sq / (24.0 * m3) - c1_sq * (3.0 * params.c0 - 2.0) / (240.0 * m3 * m * m);
    Ok(truncated * log_tail.exp())
}

/// Characteristic exponent from the Hill-determinant closed form.
pub fn characteristic_exponent(
    params: &MathieuParams,
    config: &SeriesConfig,
) -> Result<CharacteristicExponent> {
    config.validate()?;
    let delta = hill_determinant_limit(params, config.hill_half_width)?;

    // For c0 < 0 the argument is 1 + 2Δ sinh²(π√|c0|/2); once sinh² is past
    // ~1e260 the complex path overflows, so take logarithms directly.
    if params.c0 < 0.0 && delta > 0.0 {
        let x = 0.5 * PI * (-params.c0).sqrt();
        if x > 30.0 {
            // ln(2·arg) with arg = 1 + (Δ/2) e^{2x} (1 − e^{−2x})²; the neglected
            // acosh correction is O(arg⁻²).
            let shrink = (-2.0 * x).exp();
            let ln_arg = (0.5 * delta).ln()
                + 2.0 * x
                + 2.0 * (-shrink).ln_1p()
                + (2.0 * shrink / (delta * (1.0 - shrink).powi(2))).ln_1p();
            let mu = (std::f64::consts::LN_2 + ln_arg) / PI;
            return Ok(CharacteristicExponent::canonical(Complex64::new(mu, 0.0)));
        }
    }

    let root_c0 = Complex64::new(params.c0, 0.0).sqrt();
    let s = (0.5 * PI * root_c0).sin();
    let arg = Complex64::new(1.0, 0.0) - 2.0 * delta * s * s;
    let mu = arg.acosh() / PI;
    Ok(CharacteristicExponent::canonical(mu))
}

/// Series coefficients `C_{2n}`, `n = −N..=N`, with `C_0 = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientTable {
    n_terms: usize,
    coeffs: Vec<Complex64>,
}

impl CoefficientTable {
    pub fn n_terms(&self) -> usize {
        self.n_terms
    }

    /// `C_{2n}` for `|n| ≤ N`.
    pub fn coeff(&self, n: i64) -> Complex64 {
        self.coeffs[(n + self.n_terms as i64) as usize]
    }

    /// `(r_{2n}, θ_{2n})` with `C_{2n} = r e^{iθ}`.
    pub fn polar(&self, n: i64) -> (f64, f64) {
        self.coeff(n).to_polar()
    }

    /// All coefficients from `n = −N` to `n = N`.
    pub fn as_slice(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Largest coefficient-wise distance to another table of equal size.
    pub fn max_difference(&self, other: &CoefficientTable) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Downward continued fraction `F_k = 1 − β_k β_{k+1} / F_{k+1}`, `F_depth = 1`,
/// returned for `k = 1..=n_terms` (index 0 unused).
fn continued_fraction_tails(
    betas: impl Fn(usize) -> Result<Complex64>,
    n_terms: usize,
    depth: usize,
) -> Result<Vec<Complex64>> {
    let mut tails = vec![Complex64::new(0.0, 0.0); n_terms + 1];
    let mut f = Complex64::new(1.0, 0.0);
    let mut b_next = betas(depth)?;
    if depth <= n_terms {
        tails[depth] = f;
    }
    for k in (1..depth).rev() {
        let b = betas(k)?;
        if f.norm() < DEGENERATE_TOL {
            return Err(Error::DegenerateParameters {
                what: "continued-fraction denominator",
                magnitude: f.norm(),
            });
        }
        f = Complex64::new(1.0, 0.0) - b * b_next / f;
        if k <= n_terms {
            tails[k] = f;
        }
        b_next = b;
    }
    if f.norm() < DEGENERATE_TOL {
        return Err(Error::DegenerateParameters {
            what: "continued-fraction denominator",
            magnitude: f.norm(),
        });
    }
    Ok(tails)
}

/// Coefficients `C_{2n}` for `n = 1..=N` from the continued fraction truncated
/// at `depth`; the negative half is filled by conjugate symmetry.
pub fn coefficient_table(
    mu: &CharacteristicExponent,
    params: &MathieuParams,
    n_terms: usize,
    depth: usize,
) -> Result<CoefficientTable> {
    SeriesConfig {
        n_terms,
        depth,
        hill_half_width: 1,
    }
    .validate()?;
    let mu = mu.value();
    let tails = continued_fraction_tails(|k| beta(k as i64, mu, params), n_terms, depth)?;

    let mut positive = Vec::with_capacity(n_terms + 1);
    positive.push(Complex64::new(1.0, 0.0));
    for n in 1..=n_terms {
        let ratio = -beta(n as i64, mu, params)? / tails[n];
        let next = ratio * positive[n - 1];
        positive.push(next);
    }

    let mut coeffs = Vec::with_capacity(2 * n_terms + 1);
    coeffs.extend(positive[1..].iter().rev().map(|c| c.conj()));
    coeffs.extend_from_slice(&positive);
    Ok(CoefficientTable { n_terms, coeffs })
}

/// `C_{−2n}` for `n = 1..=N` from the recurrence run toward negative indices
/// with `β_{−n}` evaluated directly (no conjugation). Used to cross-check the
/// symmetry `C_{−2n} = conj(C_{2n})`.
pub fn negative_index_coefficients(
    mu: &CharacteristicExponent,
    params: &MathieuParams,
    n_terms: usize,
    depth: usize,
) -> Result<Vec<Complex64>> {
    let mu = mu.value();
    let tails = continued_fraction_tails(|k| beta(-(k as i64), mu, params), n_terms, depth)?;
    let mut out = Vec::with_capacity(n_terms);
    let mut prev = Complex64::new(1.0, 0.0);
    for n in 1..=n_terms {
        prev *= -beta(-(n as i64), mu, params)? / tails[n];
        out.push(prev);
    }
    Ok(out)
}

/// Real-valued coefficients `α1`, `α2` of the two basis functions.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SolutionCoefficients {
    pub alpha1: f64,
    pub alpha2: f64,
}

/// Value and first two τ-derivatives of the periodic factors
/// `P(τ) = Σ C_{2n} e^{2inτ}` and `Q(τ) = P(−τ)`.
#[derive(Debug, Clone, Copy)]
struct PeriodicFactors {
    p: [f64; 3],
    q: [f64; 3],
}

/// The IC-independent part of the analytic solution: exponent and
/// coefficient table for one set of Mathieu parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct MathieuBasis {
    params: MathieuParams,
    exponent: CharacteristicExponent,
    mu: f64,
    table: CoefficientTable,
    /// `C_{2n}`, `2in C_{2n}`, `−4n² C_{2n}` for `n = 1..=N`.
    derivative_coeffs: Vec<[Complex64; 3]>,
}

impl MathieuBasis {
    pub fn new(params: MathieuParams, config: &SeriesConfig) -> Result<Self> {
        config.validate()?;
        let exponent = characteristic_exponent(&params, config)?;
        let table = coefficient_table(&exponent, &params, config.n_terms, config.depth)?;
        Self::from_parts(params, exponent, table)
    }

    pub fn for_model(
        model: &ModelParams,
        motion: &VerticalSinusoid,
        config: &SeriesConfig,
    ) -> Result<Self> {
        model.validate()?;
        motion.validate()?;
        Self::new(to_mathieu(model, motion), config)
    }

    /// Assembles a basis from an exponent and table computed elsewhere.
    pub fn from_parts(
        params: MathieuParams,
        exponent: CharacteristicExponent,
        table: CoefficientTable,
    ) -> Result<Self> {
        let mu = exponent.real()?;
        let derivative_coeffs = (1..=table.n_terms() as i64)
            .map(|n| {
                let c = table.coeff(n);
                let k = 2.0 * n as f64;
                [c, Complex64::new(0.0, k) * c, -(k * k) * c]
            })
            .collect();
        Ok(Self {
            params,
            exponent,
            mu,
            table,
            derivative_coeffs,
        })
    }

    pub fn params(&self) -> &MathieuParams {
        &self.params
    }

    pub fn exponent(&self) -> CharacteristicExponent {
        self.exponent
    }

    pub fn table(&self) -> &CoefficientTable {
        &self.table
    }

    fn periodic_factors(&self, tau: f64) -> PeriodicFactors {
        let (s, c) = (2.0 * tau).sin_cos();
        let w = Complex64::new(c, s);
        let w_bar = w.conj();
        let mut wn = w;
        let mut wn_bar = w_bar;
        let mut p = [Complex64::new(0.0, 0.0); 3];
        let mut q = [Complex64::new(0.0, 0.0); 3];
        for coeffs in &self.derivative_coeffs {
            for i in 0..3 {
                p[i] += coeffs[i] * wn;
                q[i] += coeffs[i] * wn_bar;
            }
            wn *= w;
            wn_bar *= w_bar;
        }
        let c0 = self.table.coeff(0).re;
        // Q(τ) = P(−τ): odd derivatives flip sign.
        PeriodicFactors {
            p: [c0 + 2.0 * p[0].re, 2.0 * p[1].re, 2.0 * p[2].re],
            q: [c0 + 2.0 * q[0].re, -2.0 * q[1].re, 2.0 * q[2].re],
        }
    }

    /// Values of the two basis functions at time `t`.
    pub fn values_at(&self, t_ref: f64, t: f64) -> [f64; 2] {
        let tau = self.params.tau(t);
        let (s, c) = (2.0 * tau).sin_cos();
        let w = Complex64::new(c, s);
        let mut wn = w;
        let mut sum = Complex64::new(0.0, 0.0);
        let mut sum_bar = Complex64::new(0.0, 0.0);
        for coeffs in &self.derivative_coeffs {
            let cn = coeffs[0];
            // C w̄ⁿ = conj(conj(C) wⁿ)
            sum += cn * wn;
            sum_bar += cn.conj() * wn;
            wn *= w;
        }
        let c0 = self.table.coeff(0).re;
        let shift = self.mu * self.params.tau_rate() * (t - t_ref);
        [
            shift.exp() * (c0 + 2.0 * sum.re),
            (-shift).exp() * (c0 + 2.0 * sum_bar.re),
        ]
    }

    /// Values and first two t-derivatives of the two basis functions
    /// `e^{+μ(τ−τ_ref)} P(τ)` and `e^{−μ(τ−τ_ref)} Q(τ)` at time `t`.
    pub fn basis_at(&self, t_ref: f64, t: f64) -> [[f64; 3]; 2] {
        let tau = self.params.tau(t);
        let rate = self.params.tau_rate();
        let shift = self.mu * rate * (t - t_ref);
        let grow = shift.exp();
        let decay = (-shift).exp();
        let f = self.periodic_factors(tau);
        let mu = self.mu;
        let [p, dp, ddp] = f.p;
        let [q, dq, ddq] = f.q;
        [
            [
                grow * p,
                grow * rate * (mu * p + dp),
                grow * rate * rate * (mu * mu * p + 2.0 * mu * dp + ddp),
            ],
            [
                decay * q,
                decay * rate * (-mu * q + dq),
                decay * rate * rate * (mu * mu * q - 2.0 * mu * dq + ddq),
            ],
        ]
    }

    /// Solves for `α1, α2` so that the solution anchored at `t_ref` passes
    /// through `state` there.
    pub fn fit(&self, t_ref: f64, state: PendulumState) -> Result<SolutionCoefficients> {
        let [b1, b2] = self.basis_at(t_ref, t_ref);
        solve_2x2([[b1[0], b2[0]], [b1[1], b2[1]]], [state.x, state.v], t_ref)
    }

    /// Fits initial conditions at `t_ref` and returns the full solution.
    pub fn solve(self: &Arc<Self>, t_ref: f64, state: PendulumState) -> Result<AnalyticSolution> {
        let coeffs = self.fit(t_ref, state)?;
        Ok(AnalyticSolution {
            basis: Arc::clone(self),
            t_ref,
            coeffs,
        })
    }

    /// Basis values (position and velocity) on a fixed set of times, for
    /// evaluating many initial conditions on the same grid.
    pub fn tabulate(&self, t_ref: f64, times: &[f64]) -> TabulatedBasis {
        let mut phi1 = Vec::with_capacity(times.len());
        let mut phi2 = Vec::with_capacity(times.len());
        for &t in times {
            let [b1, b2] = self.values_at(t_ref, t);
            phi1.push(b1);
            phi2.push(b2);
        }
        let [b1, b2] = self.basis_at(t_ref, t_ref);
        TabulatedBasis {
            t_ref,
            anchor: [[b1[0], b2[0]], [b1[1], b2[1]]],
            times: times.to_vec(),
            phi1,
            phi2,
        }
    }
}

fn solve_2x2(m: [[f64; 2]; 2], rhs: [f64; 2], t: f64) -> Result<SolutionCoefficients> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let scale = m[0][0].hypot(m[0][1]) * m[1][0].hypot(m[1][1]);
    if !(det.abs() >= SINGULAR_BASIS_TOL * scale) || scale == 0.0 {
        return Err(Error::SingularBasis {
            t,
            relative: if scale > 0.0 { det.abs() / scale } else { 0.0 },
        });
    }
    Ok(SolutionCoefficients {
        alpha1: (rhs[0] * m[1][1] - m[0][1] * rhs[1]) / det,
        alpha2: (m[0][0] * rhs[1] - m[1][0] * rhs[0]) / det,
    })
}

/// Fits `α1, α2` to `(x0, v0)` at `t_ref` for the given basis.
pub fn fit_initial_conditions(
    basis: &MathieuBasis,
    t_ref: f64,
    x0: f64,
    v0: f64,
) -> Result<SolutionCoefficients> {
    basis.fit(t_ref, PendulumState::new(x0, v0))
}

/// Basis functions sampled on a fixed grid.
#[derive(Debug, Clone)]
pub struct TabulatedBasis {
    t_ref: f64,
    anchor: [[f64; 2]; 2],
    times: Vec<f64>,
    phi1: Vec<f64>,
    phi2: Vec<f64>,
}

impl TabulatedBasis {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn fit(&self, state: PendulumState) -> Result<SolutionCoefficients> {
        solve_2x2(self.anchor, [state.x, state.v], self.t_ref)
    }

    /// Writes the positions of the solution through `state` into `out`.
    pub fn positions_into(&self, state: PendulumState, out: &mut [f64]) -> Result<()> {
        let a = self.fit(state)?;
        for ((o, p1), p2) in out.iter_mut().zip(&self.phi1).zip(&self.phi2) {
            *o = a.alpha1 * p1 + a.alpha2 * p2;
        }
        Ok(())
    }
}

/// A fitted solution `x(t) = α1 φ1(t) + α2 φ2(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticSolution {
    basis: Arc<MathieuBasis>,
    t_ref: f64,
    coeffs: SolutionCoefficients,
}

impl AnalyticSolution {
    pub fn new(basis: Arc<MathieuBasis>, t_ref: f64, coeffs: SolutionCoefficients) -> Self {
        Self {
            basis,
            t_ref,
            coeffs,
        }
    }

    pub fn basis(&self) -> &MathieuBasis {
        &self.basis
    }

    pub fn mathieu(&self) -> &MathieuParams {
        &self.basis.params
    }

    pub fn exponent(&self) -> CharacteristicExponent {
        self.basis.exponent
    }

    pub fn coefficients(&self) -> SolutionCoefficients {
        self.coeffs
    }

    /// Time at which the exponential factors equal one.
    pub fn t_ref(&self) -> f64 {
        self.t_ref
    }

    fn combine(&self, t: f64, order: usize) -> f64 {
        let [b1, b2] = self.basis.basis_at(self.t_ref, t);
        self.coeffs.alpha1 * b1[order] + self.coeffs.alpha2 * b2[order]
    }

    /// Position and velocity at time `t`.
    pub fn evaluate(&self, t: f64) -> PendulumState {
        let [b1, b2] = self.basis.basis_at(self.t_ref, t);
        let a = self.coeffs;
        PendulumState::new(
            a.alpha1 * b1[0] + a.alpha2 * b2[0],
            a.alpha1 * b1[1] + a.alpha2 * b2[1],
        )
    }

    pub fn position(&self, t: f64) -> f64 {
        let [p1, p2] = self.basis.values_at(self.t_ref, t);
        self.coeffs.alpha1 * p1 + self.coeffs.alpha2 * p2
    }

    /// Second t-derivative, by term-wise differentiation of the series.
    pub fn second_derivative(&self, t: f64) -> f64 {
        self.combine(t, 2)
    }
}

/// Free-function form of [`AnalyticSolution::evaluate`].
pub fn evaluate(solution: &AnalyticSolution, t: f64) -> PendulumState {
    solution.evaluate(t)
}

/// Free-function form of [`AnalyticSolution::second_derivative`].
pub fn evaluate_second_derivative(solution: &AnalyticSolution, t: f64) -> f64 {
    solution.second_derivative(t)
}
