//! Per-direction robust estimation of θᵀΣθ.
//!
//! The influence function ψ truncates squared projections so that heavy tails
//! and outliers contribute at most ±log 2 each. For a centering parameter λ,
//! the scale α̂ solves Σ_i ψ(α² ⟨θ, X_i⟩² − λ) = 0 and the point estimate of
//! the directional energy is Ê_λ = λ / α̂².
//!
//! The confidence interval around Ê_λ uses the multiplicative surrogate
//! Ê·(1 ∓ 2η(max{Ê, σ})), mirroring the deviation structure of the bound
//! proposition; the exact per-λ interval constants live in a companion
//! derivation and are out of scope here, so the surrogate is flagged as such
//! in reports.

use crate::error::{parameter, Error, Result};
use crate::matrix::Sample;
use crate::net::DeltaNet;
use crate::spectral::{eta, BoundParams};

pub const LN_2: f64 = std::f64::consts::LN_2;

/// The influence function: log 2 for t ≥ 1, −log(1 − t + t²/2) on [0, 1],
/// odd continuation for t ≤ 0.
#[inline]
pub fn psi(t: f64) -> f64 {
    let a = t.abs();
    let v = if a >= 1.0 {
        LN_2
    } else {
        -(1.0 - a + 0.5 * a * a).ln()
    };
    if t < 0.0 {
        -v
    } else {
        v
    }
}

fn check_unit(theta: &[f64]) -> Result<()> {
    let norm: f64 = theta.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > crate::net::UNIT_NORM_TOL {
        return parameter(format!("theta must be a unit vector, norm is {norm}"));
    }
    Ok(())
}

/// (1/n) Σ ψ(⟨θ, X_i⟩² − λ). Always lies in [−log 2, log 2].
pub fn empirical_truncated_moment(theta: &[f64], sample: &Sample, lambda: f64) -> Result<f64> {
    if sample.is_empty() {
        return parameter("sample must be non-empty");
    }
    check_unit(theta)?;
    let s = sample.projections_squared(theta);
    Ok(s.iter().map(|&x| psi(x - lambda)).sum::<f64>() / s.len() as f64)
}

/// Σ_i ψ(β s_i − λ) for β = α². Non-decreasing in β since ψ is non-decreasing
/// and s_i ≥ 0.
#[inline]
fn root_sum(s: &[f64], beta: f64, lambda: f64) -> f64 {
    s.iter().map(|&x| psi(beta * x - lambda)).sum()
}

/// Solve Σ ψ(β s_i − λ) = 0 for β over the precomputed squared projections.
/// Bracketed root-finding: the initial bracket is [λ/max s, λ/q25(positive s)]
/// expanded geometrically until the sign condition holds, then Illinois false
/// position with a bisection safeguard. Returns β with |Σψ| ≤ n·tol.
pub(crate) fn solve_beta(s: &[f64], lambda: f64, tol: f64) -> Result<f64> {
    let n = s.len();
    if n == 0 {
        return parameter("sample must be non-empty");
    }
    if !(lambda > 0.0) {
        return parameter(format!("lambda must be positive, got {lambda}"));
    }
    if !(tol > 0.0) {
        return parameter("tol must be positive");
    }
    let max_s = s.iter().fold(0.0f64, |a, &x| a.max(x));
    if max_s <= 0.0 {
        return Err(Error::NoSignal(
            "all projections are zero; the root equation has no solution".into(),
        ));
    }
    let target = n as f64 * tol;

    let mut positives: Vec<f64> = s.iter().copied().filter(|&x| x > 0.0).collect();
    positives.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let q25 = positives[(positives.len() - 1) / 4];

    let mut lo = lambda / max_s;
    let mut glo = root_sum(s, lo, lambda);
    if glo.abs() <= target {
        return Ok(lo);
    }
    // β = λ/max s makes every argument ≤ 0; expand downward defensively
    // in case of rounding.
    let mut guard = 0;
    while glo > 0.0 {
        lo *= 0.5;
        glo = root_sum(s, lo, lambda);
        guard += 1;
        if guard > 200 {
            return Err(Error::Numerical("failed to bracket the root from below".into()));
        }
    }

    let mut hi = (lambda / q25).max(lo * 2.0);
    let mut ghi = root_sum(s, hi, lambda);
    guard = 0;
    while ghi < 0.0 {
        hi *= 2.0;
        ghi = root_sum(s, hi, lambda);
        guard += 1;
        if guard > 200 {
            // Saturated negatives outweigh the positive mass at every scale:
            // no root exists.
            return Err(Error::NoSignal(
                "root equation has no solution at this lambda".into(),
            ));
        }
    }
    if ghi.abs() <= target {
        return Ok(hi);
    }

    // Illinois false position: superlinear on smooth stretches, and the
    // maintained bracket caps the worst case at bisection behavior.
    let mut flo = glo;
    let mut fhi = ghi;
    let mut side = 0i32;
    for _ in 0..500 {
        let denom = fhi - flo;
        let mut mid = if denom.abs() > 0.0 {
            hi - fhi * (hi - lo) / denom
        } else {
            0.5 * (lo + hi)
        };
        if !(mid > lo && mid < hi) {
            mid = 0.5 * (lo + hi);
        }
        let gm = root_sum(s, mid, lambda);
        if gm.abs() <= target || (hi - lo) <= f64::EPSILON * hi.abs() {
            return Ok(mid);
        }
        if gm < 0.0 {
            lo = mid;
            flo = gm;
            if side == -1 {
                fhi *= 0.5;
            }
            side = -1;
        } else {
            hi = mid;
            fhi = gm;
            if side == 1 {
                flo *= 0.5;
            }
            side = 1;
        }
    }
    Err(Error::Numerical(format!(
        "root refinement stalled: bracket [{lo}, {hi}]"
    )))
}

/// Solve the root equation for α̂ = sqrt(β̂) at direction θ.
pub fn solve_alpha(theta: &[f64], sample: &Sample, lambda: f64, tol: f64) -> Result<f64> {
    check_unit(theta)?;
    let s = sample.projections_squared(theta);
    Ok(solve_beta(&s, lambda, tol)?.sqrt())
}

pub const SOLVE_TOL_DEFAULT: f64 = 1e-10;

fn practical_lambda_from_stats(m: f64, v: f64, n: usize, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return parameter(format!("eps must lie in (0, 1), got {eps}"));
    }
    let log_term = (1.0 / eps).ln();
    let x = 2.0 * log_term / n as f64;
    if x >= 1.0 {
        return parameter(format!(
            "n = {n} is too small for eps = {eps}: need n > 2 log(1/eps)"
        ));
    }
    if v <= 0.0 {
        return Err(Error::DegenerateDirection(
            "projection variance is zero; the practical lambda is undefined".into(),
        ));
    }
    Ok(m * ((1.0 / v) * x * (1.0 - x)).sqrt())
}

/// The practical centering heuristic
/// λ = m sqrt((1/v)(2/n) log(1/ε) (1 − (2/n) log(1/ε)))
/// with m the empirical mean and v the unbiased variance of ⟨θ, X_i⟩².
pub fn practical_lambda(theta: &[f64], sample: &Sample, eps: f64) -> Result<f64> {
    check_unit(theta)?;
    let s = sample.projections_squared(theta);
    let n = s.len();
    if n < 2 {
        return parameter("need at least two observations");
    }
    let m = s.iter().sum::<f64>() / n as f64;
    let v = s.iter().map(|&x| (x - m) * (x - m)).sum::<f64>() / (n as f64 - 1.0);
    practical_lambda_from_stats(m, v, n, eps)
}

/// The oracle centering
/// λ* = sqrt( 2/(n(κ−1)) · (0.73 E[||X||⁴]^{1/2} / (κ^{1/2} max{θᵀΣθ, σ}) + 4.35 + log(1/ε)) )
/// for unit θ, with the fourth-moment plug-in supplied in `params`. Meant for
/// synthetic experiments where the moments are known.
pub fn oracle_lambda(theta: &[f64], params: &BoundParams, energy: f64) -> Result<f64> {
    check_unit(theta)?;
    if !(params.kappa > 1.0) {
        return parameter("oracle lambda requires kappa > 1");
    }
    if !(energy >= 0.0) {
        return parameter("energy must be non-negative");
    }
    let e4 = params.fourth_moment.ok_or_else(|| {
        Error::Parameter("oracle lambda needs the E[||X||^4] plug-in in BoundParams".into())
    })?;
    let n = params.n as f64;
    let inner = 0.73 * e4.sqrt() / (params.kappa.sqrt() * energy.max(params.sigma))
        + 4.35
        + (1.0 / params.eps).ln();
    Ok((2.0 / (n * (params.kappa - 1.0)) * inner).sqrt())
}

/// The centering parameter λ plus the finite candidate grid Λ.
#[derive(Debug, Clone)]
pub struct InfluenceParams {
    /// The reference λ (typically the practical heuristic).
    pub lambda: f64,
    /// Ascending candidate grid.
    pub grid: Vec<f64>,
}

impl InfluenceParams {
    pub fn single(lambda: f64) -> Result<Self> {
        Self::new(lambda, vec![lambda])
    }

    /// Log-spaced grid of `count` points spanning [λ/span, λ·span]; odd
    /// `count` keeps λ itself at the center.
    pub fn log_grid(lambda: f64, count: usize, span: f64) -> Result<Self> {
        if !(lambda > 0.0) || !(span > 1.0) || count < 1 {
            return parameter("log grid needs lambda > 0, span > 1, count >= 1");
        }
        if count == 1 {
            return Self::single(lambda);
        }
        let lo = lambda / span;
        let ratio = (span * span).powf(1.0 / (count as f64 - 1.0));
        let grid: Vec<f64> = (0..count).map(|k| lo * ratio.powi(k as i32)).collect();
        Self::new(lambda, grid)
    }

    pub fn new(lambda: f64, grid: Vec<f64>) -> Result<Self> {
        if grid.is_empty() {
            return parameter("lambda grid must be non-empty");
        }
        if !(lambda > 0.0) {
            return parameter("lambda must be positive");
        }
        for w in grid.windows(2) {
            if !(w[1] > w[0]) {
                return parameter("lambda grid must be strictly ascending");
            }
        }
        if grid[0] <= 0.0 {
            return parameter("lambda grid entries must be positive");
        }
        Ok(InfluenceParams { lambda, grid })
    }

    /// Index of the grid point closest to the reference λ (log scale).
    fn reference_index(&self) -> usize {
        let target = self.lambda.ln();
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (k, &g) in self.grid.iter().enumerate() {
            let d = (g.ln() - target).abs();
            if d < best_d {
                best_d = d;
                best = k;
            }
        }
        best
    }
}

/// Per-direction result: the adaptive interval [b_minus, b_plus], the λ
/// values achieving the two ends, and the point estimate at the reference λ.
#[derive(Debug, Clone)]
pub struct DirectionBound {
    pub theta: Vec<f64>,
    pub b_minus: f64,
    pub b_plus: f64,
    pub lambda_minus: f64,
    pub lambda_plus: f64,
    pub point_estimate: f64,
    /// Every grid λ hit the η = +∞ guard: the interval is [0, +∞).
    pub vacuous: bool,
    /// All projections vanished; the directional energy is exactly zero.
    pub zero_signal: bool,
}

impl DirectionBound {
    pub fn validate(&self) -> Result<()> {
        check_unit(&self.theta)?;
        if !(self.b_minus >= 0.0) {
            return parameter("b_minus must be non-negative");
        }
        if !(self.b_minus <= self.point_estimate && self.point_estimate <= self.b_plus) {
            return parameter(format!(
                "interval [{}, {}] must contain the point estimate {}",
                self.b_minus, self.b_plus, self.point_estimate
            ));
        }
        Ok(())
    }
}

/// Robust confidence interval for θᵀΣθ: for each λ in the grid solve the root
/// equation, form Ê_λ = λ/α̂² and the surrogate interval
/// Ê_λ·(1 ∓ 2η(max{Ê_λ, σ})), then take the best lower and upper ends.
pub fn direction_bounds(
    theta: &[f64],
    sample: &Sample,
    params: &BoundParams,
    grid: &InfluenceParams,
) -> Result<DirectionBound> {
    check_unit(theta)?;
    if sample.is_empty() {
        return parameter("sample must be non-empty");
    }
    let s = sample.projections_squared(theta);
    let max_s = s.iter().fold(0.0f64, |a, &x| a.max(x));
    if max_s <= 0.0 {
        // No energy in this direction at all: the second moment is exactly 0.
        return Ok(DirectionBound {
            theta: theta.to_vec(),
            b_minus: 0.0,
            b_plus: 0.0,
            lambda_minus: grid.lambda,
            lambda_plus: grid.lambda,
            point_estimate: 0.0,
            vacuous: false,
            zero_signal: true,
        });
    }

    let mut best_lower = f64::NEG_INFINITY;
    let mut best_upper = f64::INFINITY;
    let mut lambda_minus = f64::NAN;
    let mut lambda_plus = f64::NAN;
    let mut estimates = Vec::with_capacity(grid.grid.len());
    let mut any_finite = false;

    for &lam in &grid.grid {
        let beta = solve_beta(&s, lam, SOLVE_TOL_DEFAULT)?;
        let e_hat = lam / beta;
        estimates.push(e_hat);
        let h = eta(e_hat.max(params.sigma), params);
        if h.is_finite() {
            any_finite = true;
            let lower = e_hat * (1.0 - 2.0 * h);
            let upper = e_hat * (1.0 + 2.0 * h);
            if lower > best_lower {
                best_lower = lower;
                lambda_minus = lam;
            }
            if upper < best_upper {
                best_upper = upper;
                lambda_plus = lam;
            }
        }
    }

    let ref_idx = grid.reference_index();
    let point_estimate = estimates[ref_idx];
    let ref_lambda = grid.grid[ref_idx];

    if !any_finite {
        return Ok(DirectionBound {
            theta: theta.to_vec(),
            b_minus: 0.0,
            b_plus: f64::INFINITY,
            lambda_minus: ref_lambda,
            lambda_plus: ref_lambda,
            point_estimate,
            vacuous: true,
            zero_signal: false,
        });
    }

    // The guard condition caps η at 1/2 wherever it is finite, so each per-λ
    // lower end is already non-negative; the clamps below only reconcile the
    // adaptive max/min across λ with the reference point estimate.
    let b_minus = best_lower.max(0.0).min(point_estimate);
    let b_plus = best_upper.max(point_estimate);
    let out = DirectionBound {
        theta: theta.to_vec(),
        b_minus,
        b_plus,
        lambda_minus,
        lambda_plus,
        point_estimate,
        vacuous: false,
        zero_signal: false,
    };
    out.validate()?;
    Ok(out)
}

/// Directional kurtosis bound κ.
#[derive(Debug, Clone, Copy)]
pub struct KurtosisEstimate {
    pub kappa: f64,
}

/// Plug-in for κ: the worst ratio of empirical fourth to squared second
/// moment of ⟨θ, X⟩ over the net, floored at 3/2. Directions with zero
/// second moment are skipped.
pub fn estimate_kappa(sample: &Sample, net: &DeltaNet) -> Result<KurtosisEstimate> {
    if sample.is_empty() {
        return parameter("sample must be non-empty");
    }
    if net.is_empty() {
        return parameter("net must be non-empty");
    }
    let n = sample.len() as f64;
    let mut best: Option<f64> = None;
    for theta in net.points() {
        let s = sample.projections_squared(theta);
        let m2 = s.iter().sum::<f64>() / n;
        if m2 <= 0.0 {
            continue;
        }
        let m4 = s.iter().map(|&x| x * x).sum::<f64>() / n;
        let ratio = m4 / (m2 * m2);
        best = Some(best.map_or(ratio, |b: f64| b.max(ratio)));
    }
    match best {
        Some(kappa) => Ok(KurtosisEstimate {
            kappa: kappa.max(1.5),
        }),
        None => Err(Error::NoSignal(
            "every net direction has zero second moment".into(),
        )),
    }
}
