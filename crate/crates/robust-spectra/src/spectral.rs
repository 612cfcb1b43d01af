//! Eigen-decomposition and the deviation-bound machinery.
//!
//! This module carries the spectral side of the estimator: a dependency-free
//! Jacobi eigensolver, the deviation functions γ/η/B with their guard
//! conditions, spectral functions f(Σ) driven by piecewise-linear cut-offs,
//! top-r projectors, the shrunk estimator, and evaluators for the projector
//! and cut-off error bounds.
//!
//! γ, η and B return `f64::INFINITY` in the vacuous regime (sample too small
//! for the guard condition); downstream evaluators propagate infinity rather
//! than erroring, since vacuous bounds are an expected outcome at small n.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{parameter, Error, Result};
use crate::matrix::SymMatrix;

pub const ORTHONORMALITY_TOL: f64 = 1e-10;
pub const RECONSTRUCTION_TOL: f64 = 1e-8;

const JACOBI_MAX_SWEEPS: usize = 100;
pub const EIGH_DEFAULT_TOL: f64 = 1e-12;

/// Descending eigenvalues with aligned orthonormal eigenvectors.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    /// `eigenvectors[k]` is the unit eigenvector for `eigenvalues[k]`.
    pub eigenvectors: Vec<Vec<f64>>,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn to_matrix(&self) -> SymMatrix {
        SymMatrix::from_spectral(&self.eigenvalues, &self.eigenvectors)
    }

    /// Recompose with transformed eigenvalues and the same eigenvectors.
    pub fn recompose_with(&self, f: impl Fn(f64) -> f64) -> SymMatrix {
        let coeffs: Vec<f64> = self.eigenvalues.iter().map(|&x| f(x)).collect();
        SymMatrix::from_spectral(&coeffs, &self.eigenvectors)
    }

    /// CSV: first row the eigenvalues, then the eigenvector matrix (column k
    /// is the k-th eigenvector).
    pub fn to_csv(&self) -> String {
        let d = self.dim();
        let mut out = String::new();
        let _ = writeln!(out, "# spectrum d={d}");
        let vals: Vec<String> = self.eigenvalues.iter().map(|x| format!("{x}")).collect();
        let _ = writeln!(out, "{}", vals.join(","));
        for i in 0..d {
            let row: Vec<String> = (0..d)
                .map(|k| format!("{}", self.eigenvectors[k][i]))
                .collect();
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let rows: Vec<Vec<f64>> = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(crate::matrix::parse_csv_row)
            .collect::<Result<Vec<_>>>()?;
        if rows.is_empty() {
            return parameter("empty spectrum CSV");
        }
        let eigenvalues = rows[0].clone();
        let d = eigenvalues.len();
        if rows.len() != d + 1 || rows[1..].iter().any(|r| r.len() != d) {
            return parameter("spectrum CSV needs one eigenvalue row plus a d x d block");
        }
        let eigenvectors: Vec<Vec<f64>> = (0..d)
            .map(|k| (0..d).map(|i| rows[1 + i][k]).collect())
            .collect();
        Ok(Spectrum {
            eigenvalues,
            eigenvectors,
        })
    }

    pub fn orthonormality_error(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in i..d {
                let dot: f64 = self.eigenvectors[i]
                    .iter()
                    .zip(&self.eigenvectors[j])
                    .map(|(a, b)| a * b)
                    .sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }
}

/// Full eigendecomposition of a symmetric matrix by cyclic Jacobi rotations,
/// run until the off-diagonal Frobenius mass drops below `tol * ||m||_HS`.
pub fn eigh(m: &SymMatrix, tol: f64) -> Result<Spectrum> {
    if !(tol > 0.0) {
        return parameter("eigh tolerance must be positive");
    }
    let d = m.dim();
    if d == 0 {
        return parameter("cannot decompose an empty matrix");
    }
    let scale = m.frobenius_norm();
    let mut a: Vec<f64> = m.entries().to_vec();
    let mut v = vec![0.0; d * d];
    for i in 0..d {
        v[i * d + i] = 1.0;
    }

    if scale > 0.0 {
        let thresh = tol * scale;
        let mut converged = false;
        for _sweep in 0..JACOBI_MAX_SWEEPS {
            let mut off = 0.0;
            for i in 0..d {
                for j in (i + 1)..d {
                    off += 2.0 * a[i * d + j] * a[i * d + j];
                }
            }
            if off.sqrt() <= thresh {
                converged = true;
                break;
            }
            for p in 0..d - 1 {
                for q in (p + 1)..d {
                    let apq = a[p * d + q];
                    if apq == 0.0 {
                        continue;
                    }
                    let app = a[p * d + p];
                    let aqq = a[q * d + q];
                    let theta = (aqq - app) / (2.0 * apq);
                    let t = if theta >= 0.0 {
                        1.0 / (theta + (1.0 + theta * theta).sqrt())
                    } else {
                        -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;

                    for k in 0..d {
                        let akp = a[k * d + p];
                        let akq = a[k * d + q];
                        a[k * d + p] = c * akp - s * akq;
                        a[k * d + q] = s * akp + c * akq;
                    }
                    for k in 0..d {
                        let apk = a[p * d + k];
                        let aqk = a[q * d + k];
                        a[p * d + k] = c * apk - s * aqk;
                        a[q * d + k] = s * apk + c * aqk;
                    }
                    for k in 0..d {
                        let vkp = v[k * d + p];
                        let vkq = v[k * d + q];
                        v[k * d + p] = c * vkp - s * vkq;
                        v[k * d + q] = s * vkp + c * vkq;
                    }
                }
            }
        }
        if !converged {
            // One final check after the last sweep.
            let mut off = 0.0;
            for i in 0..d {
                for j in (i + 1)..d {
                    off += 2.0 * a[i * d + j] * a[i * d + j];
                }
            }
            if off.sqrt() > thresh {
                return Err(Error::Numerical(format!(
                    "jacobi failed to converge after {JACOBI_MAX_SWEEPS} sweeps (off = {})",
                    off.sqrt()
                )));
            }
        }
    }

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| {
        a[j * d + j]
            .partial_cmp(&a[i * d + i])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let eigenvalues: Vec<f64> = order.iter().map(|&k| a[k * d + k]).collect();
    let eigenvectors: Vec<Vec<f64>> = order
        .iter()
        .map(|&k| (0..d).map(|i| v[i * d + k]).collect())
        .collect();
    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
    })
}

pub fn eigh_default(m: &SymMatrix) -> Result<Spectrum> {
    eigh(m, EIGH_DEFAULT_TOL)
}

/// Parameters feeding the deviation bounds γ, η and B.
///
/// `trace` and `hs_norm` are plug-ins for Tr(Σ) and ||Σ||_HS: taken from the
/// known Σ in synthetic mode, from the estimate in data-driven mode.
/// `s4` is the saturation level in min{t, s4}; it defaults to +∞ (no
/// saturation), with an override for experimentation. `fourth_moment` is the
/// optional plug-in for E||X||⁴ needed only by the oracle λ.
#[derive(Debug, Clone)]
pub struct BoundParams {
    pub n: usize,
    pub eps: f64,
    pub kappa: f64,
    pub trace: f64,
    pub hs_norm: f64,
    pub sigma: f64,
    pub delta: f64,
    pub s4: f64,
    pub fourth_moment: Option<f64>,
}

impl BoundParams {
    pub fn new(
        n: usize,
        eps: f64,
        kappa: f64,
        trace: f64,
        hs_norm: f64,
        sigma: f64,
        delta: f64,
    ) -> Result<Self> {
        let p = BoundParams {
            n,
            eps,
            kappa,
            trace,
            hs_norm,
            sigma,
            delta,
            s4: f64::INFINITY,
            fourth_moment: None,
        };
        p.validate()?;
        Ok(p)
    }

    /// Largest σ allowed by the deviation proposition, when the denominator
    /// n/128 - 4.35 - log(1/ε) is positive.
    pub fn sigma_cap(n: usize, kappa: f64, trace: f64, eps: f64) -> Option<f64> {
        let denom = n as f64 / 128.0 - 4.35 - (1.0 / eps).ln();
        if denom > 0.0 {
            Some(100.0 * kappa * trace / denom)
        } else {
            None
        }
    }

    /// Default σ policy: half the cap when the cap exists, otherwise the
    /// trace plug-in (the bounds are vacuous in that regime anyway).
    pub fn with_default_sigma(
        n: usize,
        eps: f64,
        kappa: f64,
        trace: f64,
        hs_norm: f64,
        delta: f64,
    ) -> Result<Self> {
        let sigma = match Self::sigma_cap(n, kappa, trace, eps) {
            Some(cap) => 0.5 * cap,
            None => trace.max(f64::MIN_POSITIVE),
        };
        Self::new(n, eps, kappa, trace, hs_norm, sigma, delta)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return parameter("n must be positive");
        }
        if !(self.eps > 0.0 && self.eps < 0.5) {
            return parameter(format!("eps must lie in (0, 1/2), got {}", self.eps));
        }
        if !(self.kappa >= 1.5) {
            return parameter(format!("kappa must be at least 3/2, got {}", self.kappa));
        }
        if !(self.trace > 0.0) || !self.trace.is_finite() {
            return parameter("trace plug-in must be positive and finite");
        }
        if !(self.hs_norm >= 0.0) || !self.hs_norm.is_finite() {
            return parameter("hs_norm plug-in must be non-negative and finite");
        }
        if !(self.sigma > 0.0) {
            return parameter("sigma must be positive");
        }
        if let Some(cap) = Self::sigma_cap(self.n, self.kappa, self.trace, self.eps) {
            if self.sigma > cap * (1.0 + 1e-12) {
                return parameter(format!(
                    "sigma {} exceeds the allowed cap {cap}",
                    self.sigma
                ));
            }
        }
        if !(self.delta >= 0.0 && self.delta <= 2.0) {
            return parameter("delta must lie in [0, 2]");
        }
        if !(self.s4 > 0.0) {
            return parameter("s4 must be positive");
        }
        Ok(())
    }
}

/// γ(t) = sqrt((2.032(κ−1)/n)(0.73 Tr/t + 4.35 + log(1/ε))) + sqrt(98.5 κ Tr / (n t)).
pub fn gamma(t: f64, p: &BoundParams) -> Result<f64> {
    if !(t > 0.0) {
        return parameter(format!("gamma requires t > 0, got {t}"));
    }
    let n = p.n as f64;
    let log_term = (1.0 / p.eps).ln();
    let first = (2.032 * (p.kappa - 1.0) / n) * (0.73 * p.trace / t + 4.35 + log_term);
    let second = 98.5 * p.kappa * p.trace / (n * t);
    Ok(first.sqrt() + second.sqrt())
}

/// η(t) = γ(max{t,σ}) / (1 − 4 γ(max{t,σ})) when [6 + 1/(κ−1)] γ(max{t,σ}) ≤ 1,
/// +∞ otherwise.
pub fn eta(t: f64, p: &BoundParams) -> f64 {
    let floored = t.max(p.sigma);
    let g = gamma(floored, p).expect("floored argument is positive");
    if (6.0 + 1.0 / (p.kappa - 1.0)) * g <= 1.0 {
        g / (1.0 - 4.0 * g)
    } else {
        f64::INFINITY
    }
}

/// B(t) = 2 max{t, σ} η(min{t, s₄}) + 5 δ ||Σ||_HS + σ.
pub fn bound_b(t: f64, p: &BoundParams) -> f64 {
    let e = eta(t.min(p.s4), p);
    2.0 * t.max(p.sigma) * e + 5.0 * p.delta * p.hs_norm + p.sigma
}

/// Per-index outcome of the eigenvalue deviation check. `bound` is the
/// tighter of B(λ_i) and B(λ̂_i); `pass` additionally requires the two
/// max-form displays to hold.
#[derive(Debug, Clone, Serialize)]
pub struct DeviationEntry {
    pub index: usize,
    pub deviation: f64,
    pub bound: f64,
    pub pass: bool,
    #[serde(skip)]
    pub vacuous: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct DeviationReport {
    pub entries: Vec<DeviationEntry>,
    pub all_pass: bool,
    pub any_vacuous: bool,
}

/// Check |λ_i − λ̂_i| against B(λ_i) and B(λ̂_i), and the σ-floored
/// deviation |max{λ_i,σ} − max{λ̂_i,σ}| against the two proposition displays.
pub fn eigenvalue_deviation_check(
    true_spec: &Spectrum,
    est_spec: &Spectrum,
    p: &BoundParams,
) -> Result<DeviationReport> {
    if true_spec.dim() != est_spec.dim() {
        return parameter("spectra have different dimensions");
    }
    let mut entries = Vec::with_capacity(true_spec.dim());
    let five_delta = 5.0 * p.delta * p.hs_norm;
    for i in 0..true_spec.dim() {
        let li = true_spec.eigenvalues[i];
        let lhat = est_spec.eigenvalues[i];
        let dev = (li - lhat).abs();
        let b_true = bound_b(li, p);
        let b_est = bound_b(lhat, p);
        let bound = b_true.min(b_est);

        let mdev = (li.max(p.sigma) - lhat.max(p.sigma)).abs();
        let mb_true = 2.0 * li.max(p.sigma) * eta(li, p) + five_delta;
        let mb_est = 2.0 * lhat.max(p.sigma) * eta(lhat.min(p.s4), p) + five_delta;

        let pass = dev <= b_true && dev <= b_est && mdev <= mb_true && mdev <= mb_est;
        let vacuous = !bound.is_finite() || !mb_true.is_finite() || !mb_est.is_finite();
        entries.push(DeviationEntry {
            index: i,
            deviation: dev,
            bound,
            pass,
            vacuous,
        });
    }
    let all_pass = entries.iter().all(|e| e.pass);
    let any_vacuous = entries.iter().any(|e| e.vacuous);
    Ok(DeviationReport {
        entries,
        all_pass,
        any_vacuous,
    })
}

/// A piecewise-linear scalar function given by knots, constant outside the
/// knot range. `inv_lipschitz` stores L: slopes are bounded by 1/L.
#[derive(Debug, Clone)]
pub struct CutoffSpec {
    knots: Vec<(f64, f64)>,
    inv_lipschitz: f64,
}

impl CutoffSpec {
    pub fn new(knots: Vec<(f64, f64)>, inv_lipschitz: f64) -> Result<Self> {
        if knots.is_empty() {
            return parameter("cutoff needs at least one knot");
        }
        if !(inv_lipschitz > 0.0) {
            return parameter("inv_lipschitz must be positive");
        }
        for w in knots.windows(2) {
            let (x0, y0) = w[0];
            let (x1, y1) = w[1];
            if !(x1 > x0) {
                return parameter("cutoff knots must have strictly ascending x");
            }
            let slope = ((y1 - y0) / (x1 - x0)).abs();
            if slope > 1.0 / inv_lipschitz + 1e-12 {
                return parameter(format!(
                    "knot segment slope {slope} exceeds the Lipschitz budget {}",
                    1.0 / inv_lipschitz
                ));
            }
        }
        Ok(CutoffSpec {
            knots,
            inv_lipschitz,
        })
    }

    pub fn constant(value: f64) -> Self {
        CutoffSpec {
            knots: vec![(0.0, value)],
            inv_lipschitz: f64::INFINITY,
        }
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    /// L, where the function is (1/L)-Lipschitz.
    pub fn inv_lipschitz(&self) -> f64 {
        self.inv_lipschitz
    }

    /// The Lipschitz constant 1/L itself.
    pub fn lipschitz(&self) -> f64 {
        1.0 / self.inv_lipschitz
    }

    pub fn eval(&self, x: f64) -> f64 {
        let k = &self.knots;
        if x <= k[0].0 {
            return k[0].1;
        }
        if x >= k[k.len() - 1].0 {
            return k[k.len() - 1].1;
        }
        for w in k.windows(2) {
            let (x0, y0) = w[0];
            let (x1, y1) = w[1];
            if x <= x1 {
                return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
            }
        }
        unreachable!("knot search is exhaustive")
    }
}

/// f(Σ): decompose, apply the cut-off to the eigenvalues, recompose.
pub fn apply_spectral_function(m: &SymMatrix, f: &CutoffSpec) -> Result<SymMatrix> {
    let spec = eigh_default(m)?;
    Ok(spec.recompose_with(|x| f.eval(x)))
}

/// Orthogonal projector onto the top-r eigenvectors. The boolean reports a
/// tie at the cut (λ_r = λ_{r+1} within 1e-12).
pub fn projector_top_r(m: &SymMatrix, r: usize) -> Result<(SymMatrix, bool)> {
    let d = m.dim();
    if r < 1 || r > d {
        return parameter(format!("r must lie in 1..={d}, got {r}"));
    }
    let spec = eigh_default(m)?;
    let tie = r < d && (spec.eigenvalues[r - 1] - spec.eigenvalues[r]).abs() <= 1e-12;
    let proj = SymMatrix::from_spectral(&vec![1.0; r], &spec.eigenvectors[..r]);
    Ok((proj, tie))
}

/// The ramp that realizes the top-r step exactly when the spectrum avoids
/// (λ_{r+1}, λ_r): 0 at λ_{r+1}, 1 at λ_r, with L equal to the gap.
pub fn step_compatible_cutoff(lambda_r: f64, lambda_r1: f64) -> Result<CutoffSpec> {
    let gap = lambda_r - lambda_r1;
    if !(gap > 0.0) {
        return parameter(format!("eigengap must be positive, got {gap}"));
    }
    CutoffSpec::new(vec![(lambda_r1, 0.0), (lambda_r, 1.0)], gap)
}

/// Operator norm of a−b (largest |eigenvalue|).
pub fn operator_distance(a: &SymMatrix, b: &SymMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return parameter("dimension mismatch");
    }
    let diff = a.sub(b);
    if diff.frobenius_norm() == 0.0 {
        return Ok(0.0);
    }
    let spec = eigh_default(&diff)?;
    Ok(spec
        .eigenvalues
        .iter()
        .fold(0.0f64, |acc, x| acc.max(x.abs())))
}

pub fn frobenius_distance(a: &SymMatrix, b: &SymMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return parameter("dimension mismatch");
    }
    Ok(a.sub(b).frobenius_norm())
}

/// The eigen-overlap route to the squared Frobenius distance:
/// Σ_{i,k} (μ_i − μ'_k)² ⟨p_i, q_k⟩². Used to cross-check
/// `frobenius_distance` against the Hilbert-Schmidt identity.
pub fn frobenius_distance_via_overlap(a: &Spectrum, b: &Spectrum) -> f64 {
    let mut acc = 0.0;
    for (i, &mu) in a.eigenvalues.iter().enumerate() {
        for (k, &mu2) in b.eigenvalues.iter().enumerate() {
            let ov: f64 = a.eigenvectors[i]
                .iter()
                .zip(&b.eigenvectors[k])
                .map(|(x, y)| x * y)
                .sum();
            acc += (mu - mu2) * (mu - mu2) * ov * ov;
        }
    }
    acc.sqrt()
}

/// Σ̃: same eigenvectors as the input, eigenvalues [λ̂_i − B(λ̂_i)]₊.
/// The flag reports that every eigenvalue shrank to zero.
pub fn shrunk_estimator(est: &SymMatrix, p: &BoundParams) -> Result<(SymMatrix, bool)> {
    shrunk_with(est, |t| bound_b(t, p))
}

pub fn shrunk_with(
    est: &SymMatrix,
    bound: impl Fn(f64) -> f64,
) -> Result<(SymMatrix, bool)> {
    let spec = eigh_default(est)?;
    let shrunk: Vec<f64> = spec
        .eigenvalues
        .iter()
        .map(|&l| {
            let b = bound(l);
            if b.is_finite() {
                (l - b).max(0.0)
            } else {
                0.0
            }
        })
        .collect();
    let all_zero = shrunk.iter().all(|&x| x == 0.0);
    Ok((SymMatrix::from_spectral(&shrunk, &spec.eigenvectors), all_zero))
}

/// ||Π_r − Π̂_r||_∞ ≤ √(2r) · B(λ₁) / (λ_r − λ_{r+1}).
pub fn projector_bound(r: usize, gap: f64, b_lambda1: f64) -> Result<f64> {
    if r < 1 {
        return parameter("r must be at least 1");
    }
    if !(gap > 0.0) {
        return parameter(format!("eigengap must be positive, got {gap}"));
    }
    Ok((2.0 * r as f64).sqrt() * b_lambda1 / gap)
}

/// Cut-off error bound: the τ-scan minimum, its argmin, and the worst-case
/// closed form with its τ.
#[derive(Debug, Clone, Serialize)]
pub struct CutoffBound {
    pub bound: f64,
    pub tau_star: usize,
    pub worst_case_bound: f64,
    pub worst_case_tau: usize,
}

fn tail_sums_of_squares(evals: &[f64]) -> Vec<f64> {
    // tails[t] = Σ_{i >= t} λ_i² (0-based), so the tail beyond τ is tails[τ].
    let d = evals.len();
    let mut tails = vec![0.0; d + 1];
    for i in (0..d).rev() {
        tails[i] = tails[i + 1] + evals[i] * evals[i];
    }
    tails
}

pub(crate) fn cutoff_operator_core(
    evals: &[f64],
    b: f64,
    l_inv: f64,
    trace: f64,
) -> CutoffBound {
    let wc_tau = (trace / (std::f64::consts::SQRT_2 * b)).ceil().max(1.0) as usize;
    let wc = 2.0 * l_inv * (std::f64::consts::SQRT_2 * trace * b + b * b).sqrt();
    if !b.is_finite() {
        return CutoffBound {
            bound: f64::INFINITY,
            tau_star: 1,
            worst_case_bound: f64::INFINITY,
            worst_case_tau: 1,
        };
    }
    let tails = tail_sums_of_squares(evals);
    let mut best = f64::INFINITY;
    let mut best_tau = 1;
    for tau in 1..=evals.len() {
        let val = l_inv * (b + (4.0 * tau as f64 * b * b + 2.0 * tails[tau]).sqrt());
        if val < best {
            best = val;
            best_tau = tau;
        }
    }
    CutoffBound {
        bound: best,
        tau_star: best_tau,
        worst_case_bound: wc,
        worst_case_tau: wc_tau,
    }
}

pub(crate) fn cutoff_frobenius_core(
    evals: &[f64],
    b: f64,
    l_inv: f64,
    trace: f64,
) -> CutoffBound {
    let wc_tau = ((2.0f64 / 13.0).sqrt() * trace / b).ceil().max(1.0) as usize;
    let wc = l_inv * (11.0 * trace * b + 13.0 * b * b).sqrt();
    if !b.is_finite() {
        return CutoffBound {
            bound: f64::INFINITY,
            tau_star: 1,
            worst_case_bound: f64::INFINITY,
            worst_case_tau: 1,
        };
    }
    let tails = tail_sums_of_squares(evals);
    let mut best = f64::INFINITY;
    let mut best_tau = 1;
    for tau in 1..=evals.len() {
        let val = l_inv * (13.0 * tau as f64 * b * b + 2.0 * tails[tau]).sqrt();
        if val < best {
            best = val;
            best_tau = tau;
        }
    }
    CutoffBound {
        bound: best,
        tau_star: best_tau,
        worst_case_bound: wc,
        worst_case_tau: wc_tau,
    }
}

/// min_{τ≥1} L⁻¹ (B(λ₁) + sqrt(4τ B(λ₁)² + 2 Σ_{i>τ} λ_i²)), scanning τ over
/// the realized spectrum, plus the worst-case corollary values. `l_inv` is
/// the Lipschitz constant 1/L of the cut-off.
pub fn cutoff_operator_bound(
    spectrum: &Spectrum,
    p: &BoundParams,
    l_inv: f64,
) -> Result<CutoffBound> {
    if spectrum.dim() == 0 {
        return parameter("empty spectrum");
    }
    let b = bound_b(spectrum.eigenvalues[0], p);
    Ok(cutoff_operator_core(&spectrum.eigenvalues, b, l_inv, p.trace))
}

/// min_{τ≥1} L⁻¹ sqrt(13 τ B(λ₁)² + 2 Σ_{i>τ} λ_i²) plus the corollary values.
pub fn cutoff_frobenius_bound(
    spectrum: &Spectrum,
    p: &BoundParams,
    l_inv: f64,
) -> Result<CutoffBound> {
    if spectrum.dim() == 0 {
        return parameter("empty spectrum");
    }
    let b = bound_b(spectrum.eigenvalues[0], p);
    Ok(cutoff_frobenius_core(&spectrum.eigenvalues, b, l_inv, p.trace))
}

/// One row of the overlap-sum lemma check for index k:
/// Σ_i (λ_i − λ_k)² ⟨q_k, p_i⟩² against 2 B(λ₁)², and
/// Σ_i (λ_i − λ̂_k)² ⟨q_k, p_i⟩² against B(λ₁)².
#[derive(Debug, Clone, Serialize)]
pub struct OverlapEntry {
    pub index: usize,
    pub sum_true_shift: f64,
    pub sum_est_shift: f64,
    pub bound_true_shift: f64,
    pub bound_est_shift: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct OverlapReport {
    pub entries: Vec<OverlapEntry>,
    pub all_pass: bool,
}

pub fn overlap_sum_check(
    true_spec: &Spectrum,
    est_spec: &Spectrum,
    b1: f64,
) -> Result<OverlapReport> {
    let d = true_spec.dim();
    if est_spec.dim() != d {
        return parameter("spectra have different dimensions");
    }
    let mut entries = Vec::with_capacity(d);
    for k in 0..d {
        let qk = &est_spec.eigenvectors[k];
        let mut sum_true = 0.0;
        let mut sum_est = 0.0;
        for i in 0..d {
            let ov: f64 = qk
                .iter()
                .zip(&true_spec.eigenvectors[i])
                .map(|(a, b)| a * b)
                .sum();
            let ov2 = ov * ov;
            let li = true_spec.eigenvalues[i];
            sum_true += (li - true_spec.eigenvalues[k]).powi(2) * ov2;
            sum_est += (li - est_spec.eigenvalues[k]).powi(2) * ov2;
        }
        let bound_true = 2.0 * b1 * b1;
        let bound_est = b1 * b1;
        entries.push(OverlapEntry {
            index: k,
            sum_true_shift: sum_true,
            sum_est_shift: sum_est,
            bound_true_shift: bound_true,
            bound_est_shift: bound_est,
            pass: sum_true <= bound_true && sum_est <= bound_est,
        });
    }
    let all_pass = entries.iter().all(|e| e.pass);
    Ok(OverlapReport { entries, all_pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_sym(rng: &mut ChaCha8Rng, d: usize, scale: f64) -> SymMatrix {
        let mut m = SymMatrix::zeros(d);
        for i in 0..d {
            for j in i..d {
                m.set_sym(i, j, scale * (rng.random::<f64>() * 2.0 - 1.0));
            }
        }
        m
    }

    fn params_1e6() -> BoundParams {
        // n = 10⁶, κ = 3, Tr = 5, ε = 0.1; σ small enough not to floor t = 2.
        let mut p = BoundParams::new(1_000_000, 0.1, 3.0, 5.0, 5.0, 0.01, 0.0).unwrap();
        p.hs_norm = 0.0;
        p
    }

    #[test]
    fn eigh_diagonal() {
        let m = SymMatrix::diag(&[1.0, 2.0, 3.0]);
        let s = eigh_default(&m).unwrap();
        assert_eq!(s.eigenvalues, vec![3.0, 2.0, 1.0]);
        for (k, expect_axis) in [(0usize, 2usize), (1, 1), (2, 0)] {
            let v = &s.eigenvectors[k];
            assert!((v[expect_axis].abs() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn eigh_off_diagonal_pair() {
        let m = SymMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let s = eigh_default(&m).unwrap();
        assert!((s.eigenvalues[0] - 1.0).abs() < 1e-12);
        assert!((s.eigenvalues[1] + 1.0).abs() < 1e-12);
        let v = &s.eigenvectors[0];
        assert!((v[0].abs() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-10);
        assert!((v[0] - v[1]).abs() < 1e-10, "top eigenvector is (1,1)/√2");
    }

    #[test]
    fn eigh_reconstruction_and_orthonormality() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let m = random_sym(&mut rng, 6, 3.0);
            let s = eigh_default(&m).unwrap();
            assert!(s.orthonormality_error() <= ORTHONORMALITY_TOL);
            let resid = s.to_matrix().sub(&m).frobenius_norm();
            assert!(resid <= RECONSTRUCTION_TOL * (1.0 + m.frobenius_norm()));
            for w in s.eigenvalues.windows(2) {
                assert!(w[0] >= w[1]);
            }
        }
    }

    #[test]
    fn gamma_matches_hand_value() {
        let p = params_1e6();
        let g = gamma(2.0, &p).unwrap();
        assert!((g - 0.03304961562005577).abs() < 1e-12);
        assert!((g - 0.03305).abs() < 1e-5);
    }

    #[test]
    fn gamma_limits_and_scaling() {
        let p = params_1e6();
        // 1/t terms vanish as t → ∞ (at the slow sqrt(1/t) rate).
        let limit =
            (2.032 * (p.kappa - 1.0) / p.n as f64 * (4.35 + (1.0 / p.eps).ln())).sqrt();
        assert!((gamma(1e12, &p).unwrap() - limit).abs() < 1e-6);
        assert!(gamma(1e12, &p).unwrap() >= limit);

        // Doubling n scales γ by 1/√2.
        let mut p2 = p.clone();
        p2.n *= 2;
        let ratio = gamma(2.0, &p2).unwrap() / gamma(2.0, &p).unwrap();
        assert!((ratio - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);

        assert!(gamma(0.0, &p).is_err());
        assert!(gamma(-1.0, &p).is_err());
    }

    #[test]
    fn eta_guard_and_flooring() {
        let p = params_1e6();
        let g = gamma(2.0, &p).unwrap();
        let e = eta(2.0, &p);
        assert!((e - g / (1.0 - 4.0 * g)).abs() < 1e-15);
        assert!((e - 0.03808430175695854).abs() < 1e-9);

        // Below σ the argument floors.
        assert_eq!(eta(0.0, &p), eta(p.sigma, &p));
        assert_eq!(eta(0.5 * p.sigma, &p), eta(p.sigma, &p));

        // Small n trips the guard: η = +∞ exactly when [6 + (κ−1)⁻¹]γ > 1.
        let mut small = p.clone();
        small.n = 100;
        let gs = gamma(2.0f64.max(small.sigma), &small).unwrap();
        assert!((6.0 + 0.5) * gs > 1.0);
        assert!(eta(2.0, &small).is_infinite());
    }

    #[test]
    fn bound_b_hand_value_and_propagation() {
        let p = params_1e6();
        let b = bound_b(2.0, &p);
        assert!((b - 0.1623372070278342).abs() < 1e-9);
        assert!((b - 0.162).abs() < 5e-4);

        let mut small = p.clone();
        small.n = 100;
        assert!(bound_b(2.0, &small).is_infinite());
    }

    #[test]
    fn bound_b_lipschitz_and_monotone_grid() {
        // σ at the full cap puts us in the γ(σ) ≤ 1/8 regime where the
        // B(t+a) ≤ B(t) + a/2 property is guaranteed.
        let cap = BoundParams::sigma_cap(1_000_000, 3.0, 5.0, 0.1).unwrap();
        let p = BoundParams::new(1_000_000, 0.1, 3.0, 5.0, 5.0, cap, 0.05).unwrap();
        assert!(gamma(p.sigma, &p).unwrap() <= 0.125);
        let mut prev = f64::NEG_INFINITY;
        for i in 0..100 {
            let t = 0.01 + 7.0 * i as f64 / 99.0;
            let bt = bound_b(t, &p);
            assert!(bt >= prev, "B must be non-decreasing");
            prev = bt;
            for j in 0..100 {
                let a = 5.0 * j as f64 / 99.0;
                assert!(bound_b(t + a, &p) <= bt + a / 2.0 + 1e-12);
            }
        }
    }

    #[test]
    fn eta_quarter_bound_under_small_gamma() {
        let cap = BoundParams::sigma_cap(1_000_000, 3.0, 5.0, 0.1).unwrap();
        let p = BoundParams::new(1_000_000, 0.1, 3.0, 5.0, 5.0, cap, 0.0).unwrap();
        assert!(gamma(p.sigma, &p).unwrap() <= 0.125);
        let mut prev = f64::INFINITY;
        for i in 0..200 {
            let t = 0.01 + i as f64 * 0.1;
            let e = eta(t, &p);
            assert!(e <= 0.25 + 1e-12);
            assert!(e <= prev + 1e-15, "eta must be non-increasing");
            prev = e;
        }
    }

    #[test]
    fn deviation_check_trivial_cases() {
        let p = params_1e6();
        let m = SymMatrix::diag(&[2.0, 1.0]);
        let s = eigh_default(&m).unwrap();
        let rep = eigenvalue_deviation_check(&s, &s, &p).unwrap();
        assert!(rep.all_pass);
        assert!(!rep.any_vacuous);

        let mut small = p.clone();
        small.n = 100;
        let rep = eigenvalue_deviation_check(&s, &s, &small).unwrap();
        assert!(rep.all_pass, "infinite bounds pass vacuously");
        assert!(rep.any_vacuous);

        let s3 = eigh_default(&SymMatrix::diag(&[1.0, 1.0, 1.0])).unwrap();
        assert!(eigenvalue_deviation_check(&s, &s3, &p).is_err());
    }

    #[test]
    fn spectral_function_examples() {
        let m = SymMatrix::from_rows(&[vec![1.5, 0.3], vec![0.3, -0.2]]).unwrap();
        let ident = CutoffSpec::new(vec![(-10.0, -10.0), (10.0, 10.0)], 1.0).unwrap();
        let out = apply_spectral_function(&m, &ident).unwrap();
        assert!(out.sub(&m).frobenius_norm() < 1e-8);

        let m = SymMatrix::diag(&[3.0, 1.0]);
        let ramp = CutoffSpec::new(vec![(1.0, 0.0), (2.0, 1.0)], 1.0).unwrap();
        let out = apply_spectral_function(&m, &ramp).unwrap();
        assert!(out.sub(&SymMatrix::diag(&[1.0, 0.0])).frobenius_norm() < 1e-10);

        let c = CutoffSpec::constant(2.5);
        let out = apply_spectral_function(&m, &c).unwrap();
        assert!(out.sub(&SymMatrix::identity(2).scale(2.5)).frobenius_norm() < 1e-10);
    }

    #[test]
    fn cutoff_rejects_steep_knots() {
        assert!(CutoffSpec::new(vec![(0.0, 0.0), (1.0, 2.0)], 1.0).is_err());
        assert!(CutoffSpec::new(vec![(0.0, 0.0), (0.0, 1.0)], 1.0).is_err());
    }

    #[test]
    fn projector_examples() {
        let m = SymMatrix::diag(&[3.0, 2.0, 1.0]);
        let (p2, tie) = projector_top_r(&m, 2).unwrap();
        assert!(!tie);
        assert!(p2.sub(&SymMatrix::diag(&[1.0, 1.0, 0.0])).frobenius_norm() < 1e-10);

        let (pd, _) = projector_top_r(&m, 3).unwrap();
        assert!(pd.sub(&SymMatrix::identity(3)).frobenius_norm() < 1e-10);

        let flip = SymMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let (p1, _) = projector_top_r(&flip, 1).unwrap();
        let half = SymMatrix::from_rows(&[vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        assert!(p1.sub(&half).frobenius_norm() < 1e-10);

        let (_, tie) = projector_top_r(&SymMatrix::diag(&[2.0, 2.0, 1.0]), 1).unwrap();
        assert!(tie);
        assert!(projector_top_r(&m, 0).is_err());
        assert!(projector_top_r(&m, 4).is_err());
    }

    #[test]
    fn step_cutoff_matches_projector() {
        let f = step_compatible_cutoff(2.0, 1.0).unwrap();
        assert_eq!(f.inv_lipschitz(), 1.0);
        assert_eq!(f.eval(1.0), 0.0);
        assert_eq!(f.eval(2.0), 1.0);
        assert_eq!(f.eval(1.5), 0.5);

        let g = step_compatible_cutoff(1.1, 1.0).unwrap();
        assert!((g.lipschitz() - 10.0).abs() < 1e-9);
        assert!(step_compatible_cutoff(1.0, 1.0).is_err());

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let m = random_sym(&mut rng, 5, 2.0);
            let s = eigh_default(&m).unwrap();
            let r = 2;
            let gap = s.eigenvalues[r - 1] - s.eigenvalues[r];
            if gap < 1e-6 {
                continue;
            }
            let f = step_compatible_cutoff(s.eigenvalues[r - 1], s.eigenvalues[r]).unwrap();
            let via_f = apply_spectral_function(&m, &f).unwrap();
            let (proj, _) = projector_top_r(&m, r).unwrap();
            assert!(via_f.sub(&proj).frobenius_norm() < 1e-10);
        }
    }

    #[test]
    fn distances_and_overlap_identity() {
        let a = SymMatrix::diag(&[2.0, 0.0]);
        let z = SymMatrix::zeros(2);
        assert_eq!(operator_distance(&a, &a).unwrap(), 0.0);
        assert!((operator_distance(&a, &z).unwrap() - 2.0).abs() < 1e-12);
        assert!((frobenius_distance(&a, &z).unwrap() - 2.0).abs() < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let m = random_sym(&mut rng, 5, 2.0);
            let m2 = random_sym(&mut rng, 5, 2.0);
            let direct = frobenius_distance(&m, &m2).unwrap();
            let via = frobenius_distance_via_overlap(
                &eigh_default(&m).unwrap(),
                &eigh_default(&m2).unwrap(),
            );
            assert!((direct - via).abs() < 1e-8, "{direct} vs {via}");
        }
    }

    #[test]
    fn shrunk_estimator_hand_values() {
        let m = SymMatrix::diag(&[2.0, 0.5]);
        let (out, all_zero) = shrunk_with(&m, |t| if t > 1.0 { 0.3 } else { 0.2 }).unwrap();
        assert!(!all_zero);
        let s = eigh_default(&out).unwrap();
        assert!((s.eigenvalues[0] - 1.7).abs() < 1e-12);
        assert!((s.eigenvalues[1] - 0.3).abs() < 1e-12);

        let (out, all_zero) = shrunk_with(&m, |_| 5.0).unwrap();
        assert!(all_zero);
        assert_eq!(out.frobenius_norm(), 0.0);

        let (out, _) = shrunk_with(&m, |_| 0.0).unwrap();
        assert!(out.sub(&m).frobenius_norm() < 1e-12);

        // Infinite bound shrinks everything to zero.
        let (out, all_zero) = shrunk_with(&m, |_| f64::INFINITY).unwrap();
        assert!(all_zero);
        assert_eq!(out.frobenius_norm(), 0.0);
    }

    #[test]
    fn projector_bound_values() {
        assert!((projector_bound(2, 1.0, 0.1).unwrap() - 0.2).abs() < 1e-15);
        assert_eq!(projector_bound(3, 2.0, 0.0).unwrap(), 0.0);
        assert!(projector_bound(1, 0.0, 0.1).is_err());
        let mut prev = 0.0;
        for r in 1..10 {
            let b = projector_bound(r, 1.0, 0.3).unwrap();
            assert!(b > prev);
            prev = b;
        }
    }

    #[test]
    fn cutoff_bound_scan_and_corollaries() {
        // Spectrum (1, 0, 0), B = 0.1, 1/L = 1: τ = 1 gives 0.1 + 0.2 = 0.3
        // and larger τ only adds 4τB².
        let out = cutoff_operator_core(&[1.0, 0.0, 0.0], 0.1, 1.0, 1.0);
        assert_eq!(out.tau_star, 1);
        assert!((out.bound - 0.3).abs() < 1e-12);
        assert!(out.bound <= out.worst_case_bound);

        let out = cutoff_operator_core(&[2.0, 1.0, 1.0, 0.5, 0.5], 0.5, 1.0, 5.0);
        assert_eq!(out.worst_case_tau, 8);
        assert!(out.bound <= out.worst_case_bound);

        let out = cutoff_frobenius_core(&[2.0, 1.0, 1.0, 0.5, 0.5], 0.5, 1.0, 5.0);
        assert_eq!(out.worst_case_tau, 4);
        assert!((out.worst_case_bound - 30.75f64.sqrt()).abs() < 1e-12);
        assert!(out.bound <= out.worst_case_bound);

        // B = 0: the Frobenius scan bottoms out at τ = d with value 0.
        let out = cutoff_frobenius_core(&[2.0, 1.0], 0.0, 1.0, 3.0);
        assert_eq!(out.bound, 0.0);
        assert_eq!(out.tau_star, 2);
    }

    #[test]
    fn overlap_check_trivial_and_perturbed() {
        let m = SymMatrix::diag(&[3.0, 1.0, 0.0]);
        let s = eigh_default(&m).unwrap();
        let rep = overlap_sum_check(&s, &s, 0.5).unwrap();
        assert!(rep.all_pass);
        for e in &rep.entries {
            assert!(e.sum_true_shift.abs() < 1e-20);
            assert!(e.sum_est_shift.abs() < 1e-20);
        }

        // est = true + εI shifts only the estimated eigenvalues: the second
        // sum scales as ε².
        let eps1 = 1e-3;
        let eps2 = 2e-3;
        let s1 = eigh_default(&m.add(&SymMatrix::identity(3).scale(eps1))).unwrap();
        let s2 = eigh_default(&m.add(&SymMatrix::identity(3).scale(eps2))).unwrap();
        let r1 = overlap_sum_check(&s, &s1, 1.0).unwrap();
        let r2 = overlap_sum_check(&s, &s2, 1.0).unwrap();
        let v1: f64 = r1.entries.iter().map(|e| e.sum_est_shift).sum();
        let v2: f64 = r2.entries.iter().map(|e| e.sum_est_shift).sum();
        assert!((v2 / v1 - 4.0).abs() < 1e-6, "ε² scaling, got ratio {}", v2 / v1);
    }

    #[test]
    fn lipschitz_contraction_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..30 {
            let d = 2 + (rng.random::<u32>() % 5) as usize;
            let m = random_sym(&mut rng, d, 2.0);
            let m2 = random_sym(&mut rng, d, 2.0);
            let l = 0.5 + rng.random::<f64>() * 2.0;
            // Random 1/L-Lipschitz piecewise-linear function.
            let mut x = -4.0;
            let mut y = rng.random::<f64>();
            let mut knots = vec![(x, y)];
            for _ in 0..5 {
                let dx = 0.5 + rng.random::<f64>() * 2.0;
                x += dx;
                y += (rng.random::<f64>() * 2.0 - 1.0) * dx / l;
                knots.push((x, y));
            }
            let f = CutoffSpec::new(knots, l).unwrap();
            let fa = apply_spectral_function(&m, &f).unwrap();
            let fb = apply_spectral_function(&m2, &f).unwrap();
            let lhs = fa.sub(&fb).frobenius_norm();
            let rhs = m.sub(&m2).frobenius_norm() / l;
            assert!(lhs <= rhs + 1e-8, "{lhs} > {rhs}");
        }
    }

    #[test]
    fn spectrum_csv_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(45);
        let m = random_sym(&mut rng, 4, 2.0);
        let s = eigh_default(&m).unwrap();
        let back = Spectrum::from_csv(&s.to_csv()).unwrap();
        assert_eq!(s.eigenvalues, back.eigenvalues);
        assert_eq!(s.eigenvectors, back.eigenvectors);
    }

    #[test]
    fn bound_params_validation() {
        assert!(BoundParams::new(1000, 0.1, 1.2, 5.0, 5.0, 0.1, 0.0).is_err());
        assert!(BoundParams::new(1000, 0.6, 3.0, 5.0, 5.0, 0.1, 0.0).is_err());
        assert!(BoundParams::new(0, 0.1, 3.0, 5.0, 5.0, 0.1, 0.0).is_err());
        // σ above the cap is rejected.
        let cap = BoundParams::sigma_cap(1_000_000, 3.0, 5.0, 0.1).unwrap();
        assert!(BoundParams::new(1_000_000, 0.1, 3.0, 5.0, 5.0, cap * 1.01, 0.0).is_err());
        // No cap at tiny n: any positive σ is admissible.
        assert!(BoundParams::sigma_cap(100, 3.0, 5.0, 0.1).is_none());
        assert!(BoundParams::new(100, 0.1, 3.0, 5.0, 5.0, 42.0, 0.0).is_ok());
    }
}
