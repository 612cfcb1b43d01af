//! δ-nets of the unit sphere.
//!
//! A `DeltaNet` is the finite constraint grid of the covariance program:
//! every unit vector must lie within δ of some net point. Construction is
//! greedy farthest-point insertion over a dense random pool, followed by
//! antipodal symmetrization (θ and −θ impose the same quadratic-form
//! constraint). Covering is validated probabilistically, never certified.

use std::fmt::Write as _;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{parameter, Result};
use crate::matrix::parse_csv_row;

pub const UNIT_NORM_TOL: f64 = 1e-12;

/// Hard cap on the random pool; keeps construction tractable when the
/// covering-number estimate explodes in higher dimension.
const POOL_CAP: usize = 500_000;

#[derive(Debug, Clone)]
pub struct DeltaNet {
    dim: usize,
    delta: f64,
    points: Vec<Vec<f64>>,
}

impl DeltaNet {
    /// Wrap externally supplied points, validating the type invariants
    /// (unit norms, no exact duplicates). Covering is not checked here.
    pub fn from_points(dim: usize, delta: f64, points: Vec<Vec<f64>>) -> Result<Self> {
        check_params(dim, delta)?;
        for p in &points {
            if p.len() != dim {
                return parameter("net point has wrong dimension");
            }
            let norm: f64 = p.iter().map(|x| x * x).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > UNIT_NORM_TOL {
                return parameter(format!("net point has norm {norm}, expected 1"));
            }
        }
        for i in 0..points.len() {
            for j in (i + 1)..points.len() {
                if points[i] == points[j] {
                    return parameter(format!("duplicate net points at {i} and {j}"));
                }
            }
        }
        Ok(DeltaNet { dim, delta, points })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    /// CSV with header `# delta_net d=<d> delta=<δ>`, one point per row.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# delta_net d={} delta={}", self.dim, self.delta);
        for p in &self.points {
            let cells: Vec<String> = p.iter().map(|x| format!("{x}")).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut dim = None;
        let mut delta = None;
        let mut points = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                for tok in rest.split_whitespace() {
                    if let Some(v) = tok.strip_prefix("d=") {
                        dim = v.parse().ok();
                    } else if let Some(v) = tok.strip_prefix("delta=") {
                        delta = v.parse().ok();
                    }
                }
                continue;
            }
            points.push(parse_csv_row(line)?);
        }
        let dim = dim.ok_or_else(|| {
            crate::error::Error::Parameter("missing `# delta_net d=...` header".into())
        })?;
        let delta = delta.ok_or_else(|| {
            crate::error::Error::Parameter("missing delta=... in header".into())
        })?;
        Self::from_points(dim, delta, points)
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_csv(&text)
    }
}

fn check_params(dim: usize, delta: f64) -> Result<()> {
    if dim < 1 {
        return parameter("net dimension must be at least 1");
    }
    if !(delta > 0.0 && delta <= 2.0) {
        return parameter(format!("delta must lie in (0, 2], got {delta}"));
    }
    Ok(())
}

fn unit_vector(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    loop {
        let mut v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
        let n: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-12 {
            for x in &mut v {
                *x /= n;
            }
            return v;
        }
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Build a δ-net of the unit sphere in ℝ^d by greedy farthest-point selection
/// from a seeded random pool, stopping when the whole pool is δ-covered, then
/// antipodally symmetrizing. Deterministic for fixed (d, delta, seed).
pub fn build_delta_net(d: usize, delta: f64, seed: u64) -> Result<DeltaNet> {
    check_params(d, delta)?;
    if d == 1 {
        return DeltaNet::from_points(1, delta, vec![vec![1.0], vec![-1.0]]);
    }

    // Pool sized from the standard covering-number estimate (1 + 2/δ)^d,
    // clamped so pathological inputs stay tractable.
    let expected = (1.0 + 2.0 / delta).powi(d as i32);
    let pool_size = ((200.0 * expected) as usize).clamp(10_000, POOL_CAP);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pool: Vec<Vec<f64>> = (0..pool_size).map(|_| unit_vector(&mut rng, d)).collect();

    let mut selected: Vec<usize> = vec![0];
    let mut min_dist: Vec<f64> = pool.iter().map(|p| dist(p, &pool[0])).collect();
    loop {
        let (far_idx, far_dist) = min_dist
            .iter()
            .enumerate()
            .fold((0, 0.0f64), |acc, (i, &x)| if x > acc.1 { (i, x) } else { acc });
        if far_dist <= delta {
            break;
        }
        selected.push(far_idx);
        let new_pt = &pool[far_idx];
        for (md, p) in min_dist.iter_mut().zip(&pool) {
            let dn = dist(p, new_pt);
            if dn < *md {
                *md = dn;
            }
        }
    }

    let mut points: Vec<Vec<f64>> = selected.iter().map(|&i| pool[i].clone()).collect();
    let chosen = points.clone();
    for p in &chosen {
        let neg: Vec<f64> = p.iter().map(|x| -x).collect();
        if !points.iter().any(|q| q == &neg) {
            points.push(neg);
        }
    }

    DeltaNet::from_points(d, delta, points)
}

/// Empirical covering check: sample `probes` uniform unit vectors and return
/// the worst min-distance to the net together with `ok = (worst <= delta)`.
pub fn check_covering(net: &DeltaNet, probes: usize, seed: u64) -> Result<(f64, bool)> {
    if probes < 1 {
        return parameter("probes must be at least 1");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..probes {
        let probe = unit_vector(&mut rng, net.dim);
        let mind = net
            .points
            .iter()
            .map(|p| dist(p, &probe))
            .fold(f64::INFINITY, f64::min);
        if mind > worst {
            worst = mind;
        }
    }
    Ok((worst, worst <= net.delta))
}
