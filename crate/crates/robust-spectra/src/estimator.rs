//! The global robust covariance estimator.
//!
//! Per-direction confidence intervals over a δ-net become quadratic-form
//! constraints B₋(θ) ≤ θᵀQθ ≤ B₊(θ); the estimator is the symmetric matrix of
//! minimal Frobenius norm satisfying all of them, computed by Dykstra's
//! alternating projections onto the half-spaces (each projection is a
//! closed-form rank-one update since ||θθᵀ||_HS = 1 for unit θ). The
//! accumulated correction scalars are exactly the dual weights of the
//! representation Q = Σ_θ [ξ₊(θ) − ξ₋(θ)] θθᵀ.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{parameter, Error, Result};
use crate::matrix::{Sample, SymMatrix};
use crate::net::{build_delta_net, DeltaNet};
use crate::robust_direction::{
    direction_bounds, estimate_kappa, oracle_lambda, practical_lambda, DirectionBound,
    InfluenceParams,
};
use crate::spectral::{eigh_default, BoundParams};

/// (1/n) Σ X_i X_iᵀ, or the mean-centered version with 1/(n−1) normalization.
pub fn empirical_covariance(sample: &Sample, center: bool) -> Result<SymMatrix> {
    let n = sample.len();
    let d = sample.dim();
    if center && n < 2 {
        return parameter("centering needs at least two observations");
    }
    let mut m = SymMatrix::zeros(d);
    if center {
        let means = sample.column_means();
        let mut centered = vec![0.0; d];
        for row in sample.rows() {
            for ((c, x), mu) in centered.iter_mut().zip(row).zip(&means) {
                *c = x - mu;
            }
            m.add_scaled_outer(1.0, &centered);
        }
        Ok(m.scale(1.0 / (n as f64 - 1.0)))
    } else {
        for row in sample.rows() {
            m.add_scaled_outer(1.0, row);
        }
        Ok(m.scale(1.0 / n as f64))
    }
}

/// Paired differences (X_i − X_{i+n/2})/√2 for the non-centered workaround:
/// the scaling makes the output's second moment equal the covariance of X
/// regardless of the unknown mean.
#[derive(Debug, Clone)]
pub struct PairDifferences {
    pub sample: Sample,
    /// An odd trailing row was dropped before pairing.
    pub dropped_last: bool,
}

pub fn pair_differences(sample: &Sample) -> Result<PairDifferences> {
    let n = sample.len();
    if n < 2 {
        return parameter("pair differences need at least two observations");
    }
    let dropped_last = n % 2 == 1;
    let half = n / 2;
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    let mut rows = Vec::with_capacity(half);
    for i in 0..half {
        let a = sample.row(i);
        let b = sample.row(i + half);
        rows.push(
            a.iter()
                .zip(b)
                .map(|(x, y)| (x - y) * inv_sqrt2)
                .collect::<Vec<f64>>(),
        );
    }
    Ok(PairDifferences {
        sample: Sample::from_rows(&rows)?,
        dropped_last,
    })
}

/// One bound per net direction.
#[derive(Debug, Clone)]
pub struct ConstraintSet {
    pub net: DeltaNet,
    pub bounds: Vec<DirectionBound>,
}

impl ConstraintSet {
    pub fn new(net: DeltaNet, bounds: Vec<DirectionBound>) -> Result<Self> {
        if net.len() != bounds.len() {
            return parameter(format!(
                "expected one bound per net direction: {} vs {}",
                net.len(),
                bounds.len()
            ));
        }
        for b in &bounds {
            if !(b.b_minus <= b.b_plus) {
                return parameter("constraint has b_minus > b_plus");
            }
        }
        Ok(ConstraintSet { net, bounds })
    }
}

#[derive(Debug, Clone)]
pub struct DualWeights {
    pub xi_plus: Vec<f64>,
    pub xi_minus: Vec<f64>,
}

impl DualWeights {
    /// Σ_θ (ξ₊ − ξ₋) θθᵀ, for checking the dual representation.
    pub fn recompose(&self, net: &DeltaNet) -> SymMatrix {
        let mut m = SymMatrix::zeros(net.dim());
        for ((theta, xp), xm) in net.points().iter().zip(&self.xi_plus).zip(&self.xi_minus) {
            m.add_scaled_outer(xp - xm, theta);
        }
        m
    }
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub matrix: SymMatrix,
    pub duals: DualWeights,
    pub converged: bool,
    pub iterations: usize,
    pub max_violation: f64,
}

pub const DYKSTRA_TOL_DEFAULT: f64 = 1e-8;
pub const DYKSTRA_MAX_ITER_DEFAULT: usize = 50_000;

/// Minimal-Frobenius-norm symmetric Q with B₋(θ) ≤ θᵀQθ ≤ B₊(θ) over the net.
///
/// Converged means max constraint violation ≤ tol and sweep movement ≤ tol.
/// Infeasible constraint sets (possible with surrogate bounds) run to a
/// least-violation fixed point and report `converged = false`.
pub fn solve_min_frobenius(
    constraints: &ConstraintSet,
    tol: f64,
    max_iter: usize,
) -> Result<SolveOutcome> {
    if !(tol > 0.0) {
        return parameter("tol must be positive");
    }
    if max_iter == 0 {
        return parameter("max_iter must be positive");
    }
    let d = constraints.net.dim();
    let k = constraints.net.len();
    let mut q = SymMatrix::zeros(d);
    let mut xi_plus = vec![0.0f64; k];
    let mut xi_minus = vec![0.0f64; k];

    let mut iterations = 0;
    let mut converged = false;
    let mut max_violation = f64::INFINITY;
    let mut prev = q.clone();

    while iterations < max_iter {
        iterations += 1;
        for (j, theta) in constraints.net.points().iter().enumerate() {
            let lo = constraints.bounds[j].b_minus;
            let hi = constraints.bounds[j].b_plus;

            // Lower half-space ⟨Q, θθᵀ⟩ ≥ lo. The stored correction is
            // −ξ₊·θθᵀ, so adding it back subtracts ξ₊ from the form.
            let v = q.quadratic_form(theta) - xi_plus[j];
            let t_new = (lo - v).max(0.0);
            let delta = t_new - xi_plus[j];
            if delta != 0.0 {
                q.add_scaled_outer(delta, theta);
            }
            xi_plus[j] = t_new;

            // Upper half-space ⟨Q, θθᵀ⟩ ≤ hi (skipped while unbounded).
            if hi.is_finite() {
                let w = q.quadratic_form(theta) + xi_minus[j];
                let s_new = (w - hi).max(0.0);
                let delta = xi_minus[j] - s_new;
                if delta != 0.0 {
                    q.add_scaled_outer(delta, theta);
                }
                xi_minus[j] = s_new;
            }
        }

        let movement = q.sub(&prev).frobenius_norm();
        max_violation = constraint_violation(&q, constraints);
        if movement <= tol && max_violation <= tol {
            converged = true;
            break;
        }
        prev = q.clone();
    }

    Ok(SolveOutcome {
        matrix: q,
        duals: DualWeights { xi_plus, xi_minus },
        converged,
        iterations,
        max_violation,
    })
}

fn constraint_violation(q: &SymMatrix, constraints: &ConstraintSet) -> f64 {
    let mut worst = 0.0f64;
    for (theta, b) in constraints.net.points().iter().zip(&constraints.bounds) {
        let v = q.quadratic_form(theta);
        worst = worst.max(b.b_minus - v);
        if b.b_plus.is_finite() {
            worst = worst.max(v - b.b_plus);
        }
    }
    worst
}

/// Eigenvalue clamp onto the PSD cone (the Frobenius projection).
pub fn positive_part(m: &SymMatrix) -> Result<SymMatrix> {
    let spec = eigh_default(m)?;
    Ok(spec.recompose_with(|l| l.max(0.0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CenteringMode {
    Centered,
    Paired,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LambdaMode {
    Practical,
    Oracle,
    Grid,
}

/// Knobs for the full pipeline. `kappa`, `trace_plugin`/`hs_plugin` and
/// `oracle_sigma`/`fourth_moment` switch stages from data-driven plug-ins to
/// known synthetic quantities.
#[derive(Debug, Clone)]
pub struct RobustOptions {
    pub delta: f64,
    pub eps: f64,
    pub seed: u64,
    pub mode: CenteringMode,
    pub lambda_mode: LambdaMode,
    pub kappa: Option<f64>,
    pub trace_plugin: Option<f64>,
    pub hs_plugin: Option<f64>,
    pub oracle_sigma: Option<SymMatrix>,
    pub fourth_moment: Option<f64>,
    pub solver_tol: f64,
    pub solver_max_iter: usize,
}

impl RobustOptions {
    pub fn new(delta: f64, eps: f64, seed: u64) -> Self {
        RobustOptions {
            delta,
            eps,
            seed,
            mode: CenteringMode::Paired,
            lambda_mode: LambdaMode::Grid,
            kappa: None,
            trace_plugin: None,
            hs_plugin: None,
            oracle_sigma: None,
            fourth_moment: None,
            solver_tol: DYKSTRA_TOL_DEFAULT,
            solver_max_iter: DYKSTRA_MAX_ITER_DEFAULT,
        }
    }
}

/// Diagnostics of a pipeline run; serialized with exactly these keys.
#[derive(Debug, Clone, Serialize)]
pub struct Diagnostics {
    pub net_size: usize,
    pub kappa: f64,
    pub vacuous_count: usize,
    pub converged: bool,
    pub iterations: usize,
    pub max_violation: f64,
}

/// Full pipeline with default options (paired differences, λ grid around the
/// practical heuristic, data-driven plug-ins).
pub fn robust_covariance(
    sample: &Sample,
    delta: f64,
    eps: f64,
    seed: u64,
) -> Result<(SymMatrix, Diagnostics)> {
    robust_covariance_with(sample, &RobustOptions::new(delta, eps, seed))
}

/// pair/center → δ-net → κ → per-direction bounds → min-Frobenius solve →
/// positive part.
pub fn robust_covariance_with(
    sample: &Sample,
    opts: &RobustOptions,
) -> Result<(SymMatrix, Diagnostics)> {
    let d = sample.dim();
    let working = match opts.mode {
        CenteringMode::Paired => pair_differences(sample)?.sample,
        CenteringMode::Centered => center_rows(sample)?,
    };
    let n = working.len();

    let net = build_delta_net(d, opts.delta, opts.seed)?;
    let kappa = match opts.kappa {
        Some(k) => k.max(1.5),
        None => estimate_kappa(&working, &net)?.kappa,
    };

    let trace = match opts.trace_plugin {
        Some(t) => t,
        None => robust_trace_plugin(&working, opts.eps)?,
    };
    let hs = opts.hs_plugin.unwrap_or(trace); // ||Σ||_HS ≤ Tr(Σ) on the PSD cone
    let mut params = BoundParams::with_default_sigma(n, opts.eps, kappa, trace, hs, opts.delta)?;
    params.fourth_moment = opts.fourth_moment;

    let bounds: Vec<DirectionBound> = net
        .points()
        .par_iter()
        .map(|theta| direction_for(theta, &working, &params, opts))
        .collect::<Result<Vec<_>>>()?;

    let vacuous_count = bounds.iter().filter(|b| b.vacuous).count();

    // A vacuous interval [0, +∞) carries no information for the program, so
    // pin such directions to their point estimate instead. Mixed or fully
    // vacuous sets may be inconsistent; Dykstra then reports converged=false
    // at a least-violation compromise.
    let pinned: Vec<DirectionBound> = bounds
        .into_iter()
        .map(|mut b| {
            if b.vacuous {
                b.b_minus = b.point_estimate;
                b.b_plus = b.point_estimate;
            }
            b
        })
        .collect();

    let constraints = ConstraintSet::new(net, pinned)?;
    let outcome = solve_min_frobenius(&constraints, opts.solver_tol, opts.solver_max_iter)?;
    let psd = positive_part(&outcome.matrix)?;

    let diagnostics = Diagnostics {
        net_size: constraints.net.len(),
        kappa,
        vacuous_count,
        converged: outcome.converged,
        iterations: outcome.iterations,
        max_violation: outcome.max_violation,
    };
    Ok((psd, diagnostics))
}

fn direction_for(
    theta: &[f64],
    working: &Sample,
    params: &BoundParams,
    opts: &RobustOptions,
) -> Result<DirectionBound> {
    let reference = match practical_lambda(theta, working, opts.eps) {
        Ok(l) => l,
        Err(Error::DegenerateDirection(_)) => {
            // Constant projections: any λ gives the exact point estimate, so
            // fall back to the heuristic with the variance factor dropped.
            let s = working.projections_squared(theta);
            let m = s.iter().sum::<f64>() / s.len() as f64;
            if m <= 0.0 {
                // Zero energy; direction_bounds short-circuits on this.
                1.0
            } else {
                let x = 2.0 * (1.0 / opts.eps).ln() / s.len() as f64;
                m * (x * (1.0 - x).max(0.0)).sqrt().max(f64::MIN_POSITIVE)
            }
        }
        Err(e) => return Err(e),
    };
    let grid = match opts.lambda_mode {
        LambdaMode::Practical => InfluenceParams::single(reference)?,
        LambdaMode::Grid => InfluenceParams::log_grid(reference, 15, 10.0)?,
        LambdaMode::Oracle => {
            let sigma_true = opts.oracle_sigma.as_ref().ok_or_else(|| {
                Error::Parameter("oracle lambda mode needs the true covariance".into())
            })?;
            let energy = sigma_true.quadratic_form(theta);
            InfluenceParams::single(oracle_lambda(theta, params, energy)?)?
        }
    };
    direction_bounds(theta, working, params, &grid)
}

fn center_rows(sample: &Sample) -> Result<Sample> {
    if sample.len() < 2 {
        return parameter("centering needs at least two observations");
    }
    let means = sample.column_means();
    let rows: Vec<Vec<f64>> = sample
        .rows()
        .map(|row| row.iter().zip(&means).map(|(x, mu)| x - mu).collect())
        .collect();
    Sample::from_rows(&rows)
}

/// Data-driven trace plug-in: sum of per-axis robust energy estimates at the
/// practical λ. Stays finite under contamination, unlike the naive mean of
/// ||X||².
fn robust_trace_plugin(sample: &Sample, eps: f64) -> Result<f64> {
    let d = sample.dim();
    let mut total = 0.0;
    for axis in 0..d {
        let mut e = vec![0.0; d];
        e[axis] = 1.0;
        let s = sample.projections_squared(&e);
        let n = s.len();
        let m = s.iter().sum::<f64>() / n as f64;
        if m <= 0.0 {
            continue;
        }
        let v = s.iter().map(|&x| (x - m) * (x - m)).sum::<f64>() / (n as f64 - 1.0);
        let lam = if v > 0.0 {
            practical_lambda(&e, sample, eps)?
        } else {
            total += m; // constant projections are already exact
            continue;
        };
        let beta = crate::robust_direction::solve_beta(&s, lam, 1e-10)?;
        total += lam / beta;
    }
    if total <= 0.0 {
        return Err(Error::NoSignal("sample carries no energy on any axis".into()));
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::DeltaNet;
    use proptest::prelude::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn bound(theta: Vec<f64>, lo: f64, hi: f64) -> DirectionBound {
        let pe = if hi.is_finite() { 0.5 * (lo + hi) } else { lo };
        DirectionBound {
            theta,
            b_minus: lo,
            b_plus: hi,
            lambda_minus: 1.0,
            lambda_plus: 1.0,
            point_estimate: pe,
            vacuous: false,
            zero_signal: false,
        }
    }

    #[test]
    fn empirical_covariance_hand_cases() {
        let s = Sample::from_rows(&[vec![1.0, 0.0], vec![-1.0, 0.0]]).unwrap();
        let m = empirical_covariance(&s, false).unwrap();
        assert!(m.sub(&SymMatrix::diag(&[1.0, 0.0])).frobenius_norm() < 1e-15);

        // Centered covariance is PSD.
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let rows: Vec<Vec<f64>> = (0..50)
            .map(|_| vec![rng.random::<f64>() + 3.0, rng.random::<f64>() - 1.0])
            .collect();
        let s = Sample::from_rows(&rows).unwrap();
        let m = empirical_covariance(&s, true).unwrap();
        let spec = eigh_default(&m).unwrap();
        assert!(spec.eigenvalues.iter().all(|&l| l >= -1e-12));

        let one = Sample::from_rows(&[vec![1.0]]).unwrap();
        assert!(empirical_covariance(&one, true).is_err());
    }

    #[test]
    fn empirical_covariance_monte_carlo_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let rows: Vec<Vec<f64>> = (0..100_000)
            .map(|_| {
                (0..3)
                    .map(|_| StandardNormal.sample(&mut rng))
                    .collect::<Vec<f64>>()
            })
            .collect();
        let s = Sample::from_rows(&rows).unwrap();
        let m = empirical_covariance(&s, false).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((m.get(i, j) - target).abs() < 0.05);
            }
        }
    }

    #[test]
    fn pair_differences_hand_cases() {
        let s = Sample::from_rows(&[vec![1.0, 2.0], vec![1.0, 2.0]]).unwrap();
        let p = pair_differences(&s).unwrap();
        assert!(!p.dropped_last);
        assert_eq!(p.sample.len(), 1);
        assert_eq!(p.sample.row(0), &[0.0, 0.0]);

        let s = Sample::from_rows(&[vec![1.0, 0.0], vec![0.0, 0.0]]).unwrap();
        let p = pair_differences(&s).unwrap();
        assert!((p.sample.row(0)[0] - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);

        let s = Sample::from_rows(&[vec![1.0], vec![2.0], vec![3.0]]).unwrap();
        let p = pair_differences(&s).unwrap();
        assert!(p.dropped_last);
        assert_eq!(p.sample.len(), 1);
    }

    proptest! {
        #[test]
        fn pair_differences_shift_invariant(shift in -50i32..50, seed in 0u64..1000) {
            // Dyadic entries plus an integer shift keep x + shift exact, so
            // the invariance holds bitwise.
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut dyadic = || (rng.random_range(0..2048) as f64) / 1024.0;
            let rows: Vec<Vec<f64>> = (0..8).map(|_| vec![dyadic(), dyadic()]).collect();
            let shifted: Vec<Vec<f64>> = rows
                .iter()
                .map(|r| r.iter().map(|x| x + shift as f64).collect())
                .collect();
            let a = pair_differences(&Sample::from_rows(&rows).unwrap()).unwrap();
            let b = pair_differences(&Sample::from_rows(&shifted).unwrap()).unwrap();
            for i in 0..a.sample.len() {
                for j in 0..2 {
                    prop_assert_eq!(a.sample.row(i)[j], b.sample.row(i)[j]);
                }
            }
        }
    }

    #[test]
    fn pair_differences_second_moment_ignores_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let mu = [5.0, -2.0];
        let rows: Vec<Vec<f64>> = (0..100_000)
            .map(|_| {
                let z0: f64 = StandardNormal.sample(&mut rng);
                let z1: f64 = StandardNormal.sample(&mut rng);
                vec![mu[0] + 2.0f64.sqrt() * z0, mu[1] + z1]
            })
            .collect();
        let s = Sample::from_rows(&rows).unwrap();
        let p = pair_differences(&s).unwrap();
        let m = empirical_covariance(&p.sample, false).unwrap();
        let target = SymMatrix::diag(&[2.0, 1.0]);
        for i in 0..2 {
            for j in 0..2 {
                assert!((m.get(i, j) - target.get(i, j)).abs() < 0.05);
            }
        }
    }

    #[test]
    fn positive_part_cases() {
        let m = SymMatrix::diag(&[3.0, -1.0]);
        let p = positive_part(&m).unwrap();
        assert!(p.sub(&SymMatrix::diag(&[3.0, 0.0])).frobenius_norm() < 1e-12);

        let psd = SymMatrix::from_rows(&[vec![2.0, 0.5], vec![0.5, 1.0]]).unwrap();
        assert!(positive_part(&psd).unwrap().sub(&psd).frobenius_norm() < 1e-10);

        let flip = SymMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let p = positive_part(&flip).unwrap();
        let half = SymMatrix::from_rows(&[vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        assert!(p.sub(&half).frobenius_norm() < 1e-12);

        // Idempotent, and a genuine Frobenius projection onto the PSD cone.
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..20 {
            let mut m = SymMatrix::zeros(3);
            for i in 0..3 {
                for j in i..3 {
                    m.set_sym(i, j, rng.random::<f64>() * 4.0 - 2.0);
                }
            }
            let p = positive_part(&m).unwrap();
            let pp = positive_part(&p).unwrap();
            assert!(pp.sub(&p).frobenius_norm() < 1e-10);

            let mut g = SymMatrix::zeros(3);
            for _ in 0..3 {
                let v: Vec<f64> = (0..3).map(|_| StandardNormal.sample(&mut rng)).collect();
                g.add_scaled_outer(rng.random::<f64>(), &v);
            }
            assert!(
                m.sub(&p).frobenius_norm() <= m.sub(&g).frobenius_norm() + 1e-10,
                "positive part must be the closest PSD matrix"
            );
        }
    }

    #[test]
    fn dykstra_recovers_sigma_from_three_tight_directions() {
        let sqrt_half = std::f64::consts::FRAC_1_SQRT_2;
        let sigma = SymMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let dirs = vec![
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![sqrt_half, sqrt_half],
        ];
        let bounds: Vec<DirectionBound> = dirs
            .iter()
            .map(|t| {
                let v = sigma.quadratic_form(t);
                bound(t.clone(), v, v)
            })
            .collect();
        let net = DeltaNet::from_points(2, 1.0, dirs).unwrap();
        let out =
            solve_min_frobenius(&ConstraintSet::new(net, bounds).unwrap(), 1e-12, 200_000)
                .unwrap();
        assert!(out.converged);
        assert!(
            out.matrix.sub(&sigma).frobenius_norm() < 1e-8,
            "residual {}",
            out.matrix.sub(&sigma).frobenius_norm()
        );
    }

    #[test]
    fn dykstra_unconstrained_is_zero() {
        let dirs = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let bounds: Vec<DirectionBound> = dirs
            .iter()
            .map(|t| bound(t.clone(), 0.0, f64::INFINITY))
            .collect();
        let net = DeltaNet::from_points(2, 1.0, dirs).unwrap();
        let out =
            solve_min_frobenius(&ConstraintSet::new(net, bounds).unwrap(), 1e-10, 1000).unwrap();
        assert!(out.converged);
        assert_eq!(out.matrix.frobenius_norm(), 0.0);
        assert_eq!(out.iterations, 1);
    }

    #[test]
    fn dykstra_dual_representation_and_net_slack() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        // Random PSD Σ in d = 3, exact bounds on a δ = 0.3 net.
        let mut sigma = SymMatrix::zeros(3);
        for _ in 0..3 {
            let v: Vec<f64> = (0..3).map(|_| StandardNormal.sample(&mut rng)).collect();
            sigma.add_scaled_outer(0.5 + rng.random::<f64>(), &v);
        }
        let net = build_delta_net(3, 0.3, 3).unwrap();
        let bounds: Vec<DirectionBound> = net
            .points()
            .iter()
            .map(|t| {
                let v = sigma.quadratic_form(t);
                bound(t.clone(), v, v)
            })
            .collect();
        let constraints = ConstraintSet::new(net, bounds).unwrap();
        let tol = 1e-8;
        let out = solve_min_frobenius(&constraints, tol, 50_000).unwrap();
        assert!(out.converged);

        let rep = out.duals.recompose(&constraints.net);
        assert!(
            rep.sub(&out.matrix).frobenius_norm() <= 10.0 * tol,
            "dual representation residual {}",
            rep.sub(&out.matrix).frobenius_norm()
        );
        assert!(out.duals.xi_plus.iter().all(|&x| x >= 0.0));
        assert!(out.duals.xi_minus.iter().all(|&x| x >= 0.0));

        let slack = out.matrix.sub(&sigma).frobenius_norm();
        assert!(
            slack <= 5.0 * 0.3 * sigma.frobenius_norm(),
            "net discretization slack {slack}"
        );
    }

    #[test]
    fn robust_covariance_rank_one_alignment() {
        // X_i = ±v with the signs arranged so pairing yields the constant
        // rows √2·v: every direction then has constant squared projection,
        // the per-direction estimates are exact, and the top eigenvector of
        // the output aligns with v.
        let v = [0.6, 0.8];
        let rows: Vec<Vec<f64>> = (0..200)
            .map(|i| {
                let s = if i < 100 { 1.0 } else { -1.0 };
                vec![s * v[0], s * v[1]]
            })
            .collect();
        let sample = Sample::from_rows(&rows).unwrap();
        let mut opts = RobustOptions::new(0.3, 0.1, 7);
        opts.mode = CenteringMode::Paired;
        let (m, diag) = robust_covariance_with(&sample, &opts).unwrap();
        assert!(diag.net_size > 0);
        let spec = eigh_default(&m).unwrap();
        let top = &spec.eigenvectors[0];
        let cos = (top[0] * v[0] + top[1] * v[1]).abs();
        assert!(cos >= 0.99, "top eigenvector misaligned: |cos| = {cos}");
    }

    #[test]
    fn robust_covariance_gaussian_sanity() {
        // n large enough that the deviation guard holds: the bounds are
        // finite, the solver converges, and the estimate lands near Σ up to
        // the surrogate shrinkage (the min-norm solution rides the lower
        // bounds Ê(1 − 2η)).
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        let rows: Vec<Vec<f64>> = (0..200_000)
            .map(|_| {
                let z0: f64 = StandardNormal.sample(&mut rng);
                let z1: f64 = StandardNormal.sample(&mut rng);
                vec![2.0f64.sqrt() * z0, z1]
            })
            .collect();
        let sample = Sample::from_rows(&rows).unwrap();
        let mut opts = RobustOptions::new(0.25, 0.1, 3);
        opts.lambda_mode = LambdaMode::Practical;
        opts.kappa = Some(3.0);
        opts.trace_plugin = Some(3.0);
        opts.hs_plugin = Some(5.0f64.sqrt());
        let (m, diag) = robust_covariance_with(&sample, &opts).unwrap();
        assert_eq!(diag.vacuous_count, 0);
        assert!(diag.converged);
        let spec = eigh_default(&m).unwrap();
        let top = &spec.eigenvectors[0];
        assert!(top[0].abs() > 0.95, "top eigenvector should be near e1");
        assert!(
            spec.eigenvalues[0] > 1.0 && spec.eigenvalues[0] < 2.4,
            "top eigenvalue {} wildly off",
            spec.eigenvalues[0]
        );
    }
}
