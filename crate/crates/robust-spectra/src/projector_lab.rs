//! Constructive verification of the orthogonal-projector results.
//!
//! For a pair of orthogonal projectors P, Q the eigenstructure of P + Q
//! describes their relative geometry completely: eigenvalue 0 is
//! ker(P) ∩ ker(Q), eigenvalue 2 is Im(P) ∩ Im(Q), eigenvalue 1 splits into
//! Im(P) ∩ ker(Q) and ker(P) ∩ Im(Q), and the remaining eigenvalues come in
//! pairs (λ, 2−λ) coupled by the partner map x ↦ (P−Q)x / ||(P−Q)x||. The
//! analysis here builds that basis explicitly and verifies every claimed
//! identity, erring loudly when classification is inconsistent.

use serde::Serialize;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{parameter, Error, Result};
use crate::matrix::{dot, normalize, SymMatrix};
use crate::spectral::eigh_default;

pub const PROJECTOR_TOL: f64 = 1e-10;

/// Eigenvalue clustering tolerance for membership in {0, 1, 2}: random pairs
/// avoid the boundaries, deliberate constructions hit them exactly.
pub const CLUSTER_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct ProjectorPair {
    pub p: SymMatrix,
    pub q: SymMatrix,
}

impl ProjectorPair {
    pub fn new(p: SymMatrix, q: SymMatrix) -> Result<Self> {
        if p.dim() != q.dim() {
            return parameter("projectors must share a dimension");
        }
        for (name, m) in [("p", &p), ("q", &q)] {
            let spec = eigh_default(m)?;
            let idem = spec.recompose_with(|l| l * l).sub(m).frobenius_norm();
            if idem > PROJECTOR_TOL * (1.0 + m.frobenius_norm()) {
                return parameter(format!("{name} is not idempotent: residual {idem}"));
            }
        }
        Ok(ProjectorPair { p, q })
    }

    pub fn dim(&self) -> usize {
        self.p.dim()
    }

    pub fn rank_p(&self) -> usize {
        self.p.trace().round() as usize
    }

    pub fn rank_q(&self) -> usize {
        self.q.trace().round() as usize
    }
}

/// Orthonormalize the input and return Σ u_i u_iᵀ.
pub fn make_projector(vectors: &[Vec<f64>]) -> Result<SymMatrix> {
    if vectors.is_empty() {
        return parameter("need at least one vector");
    }
    let d = vectors[0].len();
    let basis = orthonormalize(vectors, d, 1e-10)?;
    if basis.len() != vectors.len() {
        return parameter("input vectors are linearly dependent");
    }
    let mut m = SymMatrix::zeros(d);
    for u in &basis {
        m.add_scaled_outer(1.0, u);
    }
    Ok(m)
}

/// Modified Gram-Schmidt, dropping vectors whose residual falls below `drop_tol`.
fn orthonormalize(vectors: &[Vec<f64>], d: usize, drop_tol: f64) -> Result<Vec<Vec<f64>>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for v in vectors {
        if v.len() != d {
            return parameter("vectors must share a dimension");
        }
        let mut w = v.clone();
        for b in &basis {
            let c = dot(&w, b);
            for (wi, bi) in w.iter_mut().zip(b) {
                *wi -= c * bi;
            }
        }
        // Second pass for numerical orthogonality.
        for b in &basis {
            let c = dot(&w, b);
            for (wi, bi) in w.iter_mut().zip(b) {
                *wi -= c * bi;
            }
        }
        let n = normalize(&mut w);
        if n > drop_tol {
            basis.push(w);
        }
    }
    Ok(basis)
}

/// The basis of Lemma-2 shape: `basis[i]` is an eigenvector of P + Q with
/// eigenvalue `eigenvalues[i]`, ordered as
///   [paired λ ∈ (1,2)] × m, [partners 2−λ] × m,
///   [Im(P) ∩ ker(Q)], [ker(P) ∩ Im(Q)],
///   [Im(P) ∩ Im(Q)  (λ=2)], [ker(P) ∩ ker(Q)  (λ=0)],
/// with boundary indices 2m ≤ p_idx ≤ q_idx ≤ s_idx ≤ d.
#[derive(Debug, Clone)]
pub struct PairAnalysis {
    pub basis: Vec<Vec<f64>>,
    pub eigenvalues: Vec<f64>,
    pub m: usize,
    pub p_idx: usize,
    pub q_idx: usize,
    pub s_idx: usize,
}

fn analysis_err<T>(index: usize, reason: impl Into<String>) -> Result<T> {
    Err(Error::Analysis {
        index,
        reason: reason.into(),
    })
}

/// Eigendecompose P + Q and classify per the projector-geometry lemma,
/// constructing the partner vectors (P−Q)x/||(P−Q)x|| for the paired block
/// and splitting the eigenvalue-1 space by applying P and Q.
pub fn analyze_pair(pair: &ProjectorPair, tol: f64) -> Result<PairAnalysis> {
    let d = pair.dim();
    let sum = pair.p.add(&pair.q);
    let spec = eigh_default(&sum)?;
    let verify_tol = tol.max(1e-8);

    let mut base: Vec<(f64, Vec<f64>)> = Vec::new();
    let mut ones: Vec<Vec<f64>> = Vec::new();
    let mut twos: Vec<Vec<f64>> = Vec::new();
    let mut zeros: Vec<Vec<f64>> = Vec::new();

    for (idx, (&l, v)) in spec
        .eigenvalues
        .iter()
        .zip(&spec.eigenvectors)
        .enumerate()
    {
        if l < -tol || l > 2.0 + tol {
            return analysis_err(idx, format!("eigenvalue {l} outside [0, 2]"));
        }
        if (l - 2.0).abs() <= tol {
            let pv = pair.p.matvec(v);
            let qv = pair.q.matvec(v);
            if sub_norm(&pv, v) > verify_tol || sub_norm(&qv, v) > verify_tol {
                return analysis_err(idx, "eigenvalue 2 but Px = Qx = x fails");
            }
            twos.push(v.clone());
        } else if l.abs() <= tol {
            let pv = pair.p.matvec(v);
            let qv = pair.q.matvec(v);
            if vnorm(&pv) > verify_tol || vnorm(&qv) > verify_tol {
                return analysis_err(idx, "eigenvalue 0 but Px = Qx = 0 fails");
            }
            zeros.push(v.clone());
        } else if (l - 1.0).abs() <= tol {
            ones.push(v.clone());
        } else if l > 1.0 {
            base.push((l, v.clone()));
        }
        // Eigenvalues in (0, 1) are regenerated below as partners of the
        // (1, 2) block; the counts are cross-checked afterwards.
    }

    let m = base.len();
    let partner_count = d - m - ones.len() - twos.len() - zeros.len();
    if partner_count != m {
        return analysis_err(
            0,
            format!(
                "pairing mismatch: {m} eigenvalues in (1,2) but {partner_count} in (0,1)"
            ),
        );
    }
    base.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));

    // Partner construction x_{m+i} = (P−Q)x_i / ||(P−Q)x_i|| with eigenvalue 2−λ_i.
    let diff = pair.p.sub(&pair.q);
    let mut partners: Vec<(f64, Vec<f64>)> = Vec::with_capacity(m);
    for (i, (l, x)) in base.iter().enumerate() {
        let mut w = diff.matvec(x);
        let n = normalize(&mut w);
        if n <= verify_tol {
            return analysis_err(i, "(P-Q)x vanished on a paired eigenvector");
        }
        let target = 2.0 - l;
        let resid = residual_as_eigenvector(&sum, &w, target);
        if resid > verify_tol {
            return analysis_err(
                i,
                format!("partner is not a (2-λ)-eigenvector: residual {resid}"),
            );
        }
        // ||Px|| = ||Qx|| and ||Px||² = (λ/2)||x||² in the paired block.
        let px = pair.p.matvec(x);
        let qx = pair.q.matvec(x);
        if (vnorm(&px) - vnorm(&qx)).abs() > verify_tol {
            return analysis_err(i, "||Px|| != ||Qx|| on a paired eigenvector");
        }
        if (dot(&px, &px) - l / 2.0).abs() > verify_tol {
            return analysis_err(i, "||Px||^2 != λ/2 on a paired eigenvector");
        }
        partners.push((target, w));
    }

    // Split the eigenvalue-1 space: P maps it onto the Im(P) ∩ ker(Q) part,
    // Q onto the ker(P) ∩ Im(Q) part.
    let p_images: Vec<Vec<f64>> = ones.iter().map(|v| pair.p.matvec(v)).collect();
    let q_images: Vec<Vec<f64>> = ones.iter().map(|v| pair.q.matvec(v)).collect();
    let p_block = orthonormalize(&p_images, d, 1e-6)?;
    let q_block = orthonormalize(&q_images, d, 1e-6)?;
    if p_block.len() + q_block.len() != ones.len() {
        return analysis_err(
            2 * m,
            format!(
                "eigenvalue-1 split sizes {} + {} do not add to multiplicity {}",
                p_block.len(),
                q_block.len(),
                ones.len()
            ),
        );
    }
    for (i, u) in p_block.iter().enumerate() {
        if sub_norm(&pair.p.matvec(u), u) > verify_tol || vnorm(&pair.q.matvec(u)) > verify_tol {
            return analysis_err(2 * m + i, "vector not in Im(P) ∩ ker(Q)");
        }
    }
    for (i, u) in q_block.iter().enumerate() {
        if sub_norm(&pair.q.matvec(u), u) > verify_tol || vnorm(&pair.p.matvec(u)) > verify_tol {
            return analysis_err(2 * m + p_block.len() + i, "vector not in ker(P) ∩ Im(Q)");
        }
    }

    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(d);
    let mut eigenvalues: Vec<f64> = Vec::with_capacity(d);
    for (l, x) in &base {
        basis.push(x.clone());
        eigenvalues.push(*l);
    }
    for (l, x) in &partners {
        basis.push(x.clone());
        eigenvalues.push(*l);
    }
    let p_idx = 2 * m + p_block.len();
    let q_idx = p_idx + q_block.len();
    for u in p_block {
        basis.push(u);
        eigenvalues.push(1.0);
    }
    for u in q_block {
        basis.push(u);
        eigenvalues.push(1.0);
    }
    let s_idx = q_idx + twos.len();
    for u in twos {
        basis.push(u);
        eigenvalues.push(2.0);
    }
    for u in zeros {
        basis.push(u);
        eigenvalues.push(0.0);
    }

    // Whole-basis orthonormality check; the constructed partner vectors must
    // mesh with the eigh output.
    for i in 0..d {
        for j in i..d {
            let target = if i == j { 1.0 } else { 0.0 };
            if (dot(&basis[i], &basis[j]) - target).abs() > verify_tol {
                return analysis_err(j, "assembled basis lost orthonormality");
            }
        }
    }

    Ok(PairAnalysis {
        basis,
        eigenvalues,
        m,
        p_idx,
        q_idx,
        s_idx,
    })
}

fn vnorm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

fn sub_norm(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn residual_as_eigenvector(m: &SymMatrix, v: &[f64], l: f64) -> f64 {
    let mv = m.matvec(v);
    mv.iter()
        .zip(v)
        .map(|(a, b)| (a - l * b) * (a - l * b))
        .sum::<f64>()
        .sqrt()
}

/// The induced orthogonal bases
///   Im(P): (Px_1, …, Px_m, x_{2m+1}, …, x_p, x_{q+1}, …, x_s)
///   Im(Q): (Qx_1, …, Qx_m, x_{p+1}, …, x_q, x_{q+1}, …, x_s)
/// with the Px_i, Qx_i left unnormalized (||Px_i||² = λ_i/2). Both are
/// verified to reconstruct their projector.
pub fn induced_bases(
    analysis: &PairAnalysis,
    pair: &ProjectorPair,
) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let mut im_p: Vec<Vec<f64>> = Vec::new();
    let mut im_q: Vec<Vec<f64>> = Vec::new();
    for i in 0..analysis.m {
        im_p.push(pair.p.matvec(&analysis.basis[i]));
        im_q.push(pair.q.matvec(&analysis.basis[i]));
    }
    for i in 2 * analysis.m..analysis.p_idx {
        im_p.push(analysis.basis[i].clone());
    }
    for i in analysis.p_idx..analysis.q_idx {
        im_q.push(analysis.basis[i].clone());
    }
    for i in analysis.q_idx..analysis.s_idx {
        im_p.push(analysis.basis[i].clone());
        im_q.push(analysis.basis[i].clone());
    }

    for (name, family, target) in [("Im(P)", &im_p, &pair.p), ("Im(Q)", &im_q, &pair.q)] {
        for (i, u) in family.iter().enumerate() {
            if vnorm(u) <= 1e-10 {
                return analysis_err(i, format!("{name} basis has a zero vector"));
            }
            for (j, w) in family.iter().enumerate().skip(i + 1) {
                if dot(u, w).abs() > 1e-8 {
                    return analysis_err(j, format!("{name} basis is not orthogonal"));
                }
            }
        }
        let mut recon = SymMatrix::zeros(pair.dim());
        for u in family.iter() {
            recon.add_scaled_outer(1.0 / dot(u, u), u);
        }
        let resid = recon.sub(target).frobenius_norm();
        if resid > 1e-8 {
            return analysis_err(0, format!("{name} basis fails to reconstruct: {resid}"));
        }
    }
    Ok((im_p, im_q))
}

/// Equal ranks hold exactly when the two eigenvalue-1 blocks match:
/// p − 2m = q − p.
pub fn rank_criterion(analysis: &PairAnalysis) -> bool {
    analysis.p_idx - 2 * analysis.m == analysis.q_idx - analysis.p_idx
}

/// Outcome of the norm-restriction check. When ranks are equal the operator
/// norm of P − Q is attained on Im(Q): `global` and `on_im_q` agree.
#[derive(Debug, Clone, Serialize)]
pub struct NormRestriction {
    pub applicable: bool,
    pub global: f64,
    pub on_im_q: f64,
    /// Empirical maximum of ||(P−Q)θ|| over random unit θ ∈ Im(Q).
    pub probe_max: f64,
}

pub fn norm_restriction_check(
    pair: &ProjectorPair,
    probes: usize,
    seed: u64,
) -> Result<NormRestriction> {
    let diff = pair.p.sub(&pair.q);
    let diff_sq = matmul_sym(&diff, &diff);
    let spec = eigh_default(&diff_sq)?;
    let global = spec.eigenvalues.first().copied().unwrap_or(0.0).max(0.0).sqrt();

    if pair.rank_p() != pair.rank_q() {
        return Ok(NormRestriction {
            applicable: false,
            global,
            on_im_q: f64::NAN,
            probe_max: f64::NAN,
        });
    }

    // Basis of Im(Q): eigenvectors of Q with eigenvalue 1.
    let q_spec = eigh_default(&pair.q)?;
    let q_basis: Vec<&Vec<f64>> = q_spec
        .eigenvectors
        .iter()
        .zip(&q_spec.eigenvalues)
        .filter(|(_, &l)| l > 0.5)
        .map(|(v, _)| v)
        .collect();
    let r = q_basis.len();
    if r == 0 {
        // Rank-0 pair: P = Q = 0 under the equal-rank assumption.
        return Ok(NormRestriction {
            applicable: true,
            global,
            on_im_q: 0.0,
            probe_max: 0.0,
        });
    }

    // Restriction of (P−Q)² to Im(Q): top eigenvalue of Bᵀ (P−Q)² B.
    let mut restricted = SymMatrix::zeros(r);
    let images: Vec<Vec<f64>> = q_basis.iter().map(|b| diff_sq.matvec(b)).collect();
    for i in 0..r {
        for j in i..r {
            restricted.set_sym(i, j, dot(q_basis[i], &images[j]));
        }
    }
    let r_spec = eigh_default(&restricted)?;
    let on_im_q = r_spec.eigenvalues.first().copied().unwrap_or(0.0).max(0.0).sqrt();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut probe_max = 0.0f64;
    for _ in 0..probes {
        let coeffs: Vec<f64> = (0..r).map(|_| StandardNormal.sample(&mut rng)).collect();
        let mut theta = vec![0.0; pair.dim()];
        for (c, b) in coeffs.iter().zip(&q_basis) {
            for (t, bi) in theta.iter_mut().zip(b.iter()) {
                *t += c * bi;
            }
        }
        if normalize(&mut theta) > 0.0 {
            probe_max = probe_max.max(vnorm(&diff.matvec(&theta)));
        }
    }

    Ok(NormRestriction {
        applicable: true,
        global,
        on_im_q,
        probe_max,
    })
}

/// Symmetric product A·A for symmetric A (the result is symmetric).
fn matmul_sym(a: &SymMatrix, b: &SymMatrix) -> SymMatrix {
    let d = a.dim();
    let mut out = SymMatrix::zeros(d);
    for i in 0..d {
        for j in i..d {
            let mut acc = 0.0;
            for k in 0..d {
                acc += a.get(i, k) * b.get(k, j);
            }
            out.set_sym(i, j, acc);
        }
    }
    out
}

/// Random rank-r orthogonal projector (orthonormalized Gaussian columns).
pub fn random_projector(rng: &mut ChaCha8Rng, d: usize, rank: usize) -> Result<SymMatrix> {
    loop {
        let vectors: Vec<Vec<f64>> = (0..rank)
            .map(|_| (0..d).map(|_| StandardNormal.sample(rng)).collect())
            .collect();
        if let Ok(m) = make_projector(&vectors) {
            return Ok(m);
        }
    }
}

/// Aggregated results of the randomized Appendix-style property suite, as
/// emitted by the `projector-lab` subcommand.
#[derive(Debug, Clone, Serialize)]
pub struct SuiteDimReport {
    pub dim: usize,
    pub pairs: usize,
    pub case_identity_failures: usize,
    pub pairing_failures: usize,
    pub rank_criterion_mismatches: usize,
    pub equal_rank_pairs: usize,
    pub max_norm_restriction_gap: f64,
    pub max_basis_reconstruction_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub per_dim: Vec<SuiteDimReport>,
    pub all_ok: bool,
}

/// Run the full property suite on `pairs` random projector pairs per
/// dimension; equal ranks are forced on half of them so the norm-restriction
/// lemma is exercised.
pub fn run_suite(dims: &[usize], pairs: usize, seed: u64) -> Result<SuiteReport> {
    let mut per_dim = Vec::new();
    for &d in dims {
        if d < 2 {
            return parameter("suite dimensions must be at least 2");
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (d as u64) << 32);
        let mut rep = SuiteDimReport {
            dim: d,
            pairs,
            case_identity_failures: 0,
            pairing_failures: 0,
            rank_criterion_mismatches: 0,
            equal_rank_pairs: 0,
            max_norm_restriction_gap: 0.0,
            max_basis_reconstruction_error: 0.0,
        };
        for k in 0..pairs {
            let rank_p = 1 + (sample_index(&mut rng, d - 1));
            let rank_q = if k % 2 == 0 {
                rank_p
            } else {
                1 + sample_index(&mut rng, d - 1)
            };
            let p = random_projector(&mut rng, d, rank_p)?;
            let q = random_projector(&mut rng, d, rank_q)?;
            let pair = ProjectorPair::new(p, q)?;

            let analysis = match analyze_pair(&pair, CLUSTER_TOL) {
                Ok(a) => a,
                Err(_) => {
                    rep.case_identity_failures += 1;
                    continue;
                }
            };
            if !check_case_identities(&pair, &analysis, 1e-9) {
                rep.case_identity_failures += 1;
            }
            if !check_pairing(&analysis, 1e-9) {
                rep.pairing_failures += 1;
            }
            let criterion = rank_criterion(&analysis);
            if criterion != (pair.rank_p() == pair.rank_q()) {
                rep.rank_criterion_mismatches += 1;
            }
            match induced_bases(&analysis, &pair) {
                Ok(_) => {}
                Err(_) => rep.max_basis_reconstruction_error = f64::INFINITY,
            }
            if pair.rank_p() == pair.rank_q() {
                rep.equal_rank_pairs += 1;
                let nr = norm_restriction_check(&pair, 32, seed ^ k as u64)?;
                let gap = (nr.global - nr.on_im_q).abs();
                rep.max_norm_restriction_gap = rep.max_norm_restriction_gap.max(gap);
            }
        }
        per_dim.push(rep);
    }
    let all_ok = per_dim.iter().all(|r| {
        r.case_identity_failures == 0
            && r.pairing_failures == 0
            && r.rank_criterion_mismatches == 0
            && r.max_norm_restriction_gap <= 1e-8
            && r.max_basis_reconstruction_error <= 1e-8
    });
    Ok(SuiteReport {
        seed,
        per_dim,
        all_ok,
    })
}

fn sample_index(rng: &mut ChaCha8Rng, n: usize) -> usize {
    use rand::Rng;
    rng.random_range(0..n)
}

/// The case taxonomy: eigenvalue-0 vectors are killed by both projectors,
/// eigenvalue-2 vectors are fixed by both, eigenvalue-1 vectors satisfy
/// PQx = QPx = 0, and paired-λ vectors satisfy (P−Q)²x = λ(2−λ)x with
/// ||Px|| = ||Qx||.
pub fn check_case_identities(pair: &ProjectorPair, analysis: &PairAnalysis, tol: f64) -> bool {
    let diff = pair.p.sub(&pair.q);
    for (x, &l) in analysis.basis.iter().zip(&analysis.eigenvalues) {
        let px = pair.p.matvec(x);
        let qx = pair.q.matvec(x);
        if (l - 2.0).abs() <= CLUSTER_TOL {
            if sub_norm(&px, x) > tol || sub_norm(&qx, x) > tol {
                return false;
            }
        } else if l.abs() <= CLUSTER_TOL {
            if vnorm(&px) > tol || vnorm(&qx) > tol {
                return false;
            }
        } else if (l - 1.0).abs() <= CLUSTER_TOL {
            if vnorm(&pair.p.matvec(&qx)) > tol || vnorm(&pair.q.matvec(&px)) > tol {
                return false;
            }
        } else {
            let dx = diff.matvec(&diff.matvec(x));
            let target = l * (2.0 - l);
            let resid: f64 = dx
                .iter()
                .zip(x)
                .map(|(a, b)| (a - target * b) * (a - target * b))
                .sum::<f64>()
                .sqrt();
            if resid > tol {
                return false;
            }
            if (vnorm(&px) - vnorm(&qx)).abs() > tol {
                return false;
            }
        }
    }
    true
}

/// The eigenvalues of P + Q inside (0,1) ∪ (1,2) are symmetric under λ ↦ 2−λ.
pub fn check_pairing(analysis: &PairAnalysis, tol: f64) -> bool {
    for i in 0..analysis.m {
        let l = analysis.eigenvalues[i];
        let partner = analysis.eigenvalues[analysis.m + i];
        if (partner - (2.0 - l)).abs() > tol {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn angle_projector(phi: f64) -> SymMatrix {
        make_projector(&[vec![phi.cos(), phi.sin()]]).unwrap()
    }

    #[test]
    fn make_projector_examples() {
        let p = make_projector(&[vec![1.0, 0.0]]).unwrap();
        assert!(p.sub(&SymMatrix::diag(&[1.0, 0.0])).frobenius_norm() < 1e-12);

        let p = make_projector(&[vec![1.0, 1.0]]).unwrap();
        let half = SymMatrix::from_rows(&[vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        assert!(p.sub(&half).frobenius_norm() < 1e-12);

        let p = make_projector(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!(p.sub(&SymMatrix::identity(2)).frobenius_norm() < 1e-12);

        assert!(make_projector(&[vec![1.0, 0.0], vec![2.0, 0.0]]).is_err());
    }

    #[test]
    fn analyze_identical_projectors() {
        let p = SymMatrix::diag(&[1.0, 0.0]);
        let pair = ProjectorPair::new(p.clone(), p).unwrap();
        let a = analyze_pair(&pair, CLUSTER_TOL).unwrap();
        assert_eq!(a.m, 0);
        assert_eq!(a.p_idx, 0);
        assert_eq!(a.q_idx, 0);
        assert_eq!(a.s_idx, 1);
        assert_eq!(a.eigenvalues, vec![2.0, 0.0]);
        assert!((a.basis[0][0].abs() - 1.0).abs() < 1e-10, "λ=2 block spans e1");
    }

    #[test]
    fn analyze_angle_pair() {
        // P projects onto e1, Q onto (cos φ, sin φ) with φ = π/3: the
        // eigenvalues of P + Q are 1 ± cos φ = {1.5, 0.5}, one paired cluster.
        let phi = std::f64::consts::PI / 3.0;
        let pair = ProjectorPair::new(SymMatrix::diag(&[1.0, 0.0]), angle_projector(phi)).unwrap();
        let a = analyze_pair(&pair, CLUSTER_TOL).unwrap();
        assert_eq!(a.m, 1);
        assert!((a.eigenvalues[0] - 1.5).abs() < 1e-10);
        assert!((a.eigenvalues[1] - 0.5).abs() < 1e-10);
        assert_eq!(a.p_idx, 2);
        assert_eq!(a.q_idx, 2);
        assert_eq!(a.s_idx, 2);

        // Induced Im(P) basis: the single vector Px1 with ||Px1||² = λ1/2.
        let (im_p, im_q) = induced_bases(&a, &pair).unwrap();
        assert_eq!(im_p.len(), 1);
        assert_eq!(im_q.len(), 1);
        let norm_sq = dot(&im_p[0], &im_p[0]);
        assert!((norm_sq - 0.75).abs() < 1e-10, "||Px1||² = {norm_sq}");
    }

    #[test]
    fn analyze_orthogonal_axes() {
        let pair =
            ProjectorPair::new(SymMatrix::diag(&[1.0, 0.0]), SymMatrix::diag(&[0.0, 1.0]))
                .unwrap();
        let a = analyze_pair(&pair, CLUSTER_TOL).unwrap();
        assert_eq!(a.m, 0);
        assert_eq!(a.eigenvalues, vec![1.0, 1.0]);
        assert_eq!(a.p_idx - 2 * a.m, 1, "one vector in Im(P) ∩ ker(Q)");
        assert_eq!(a.q_idx - a.p_idx, 1, "one vector in ker(P) ∩ Im(Q)");
        assert!(rank_criterion(&a));
    }

    #[test]
    fn induced_bases_trivial_cases() {
        let p = make_projector(&[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]).unwrap();
        let pair = ProjectorPair::new(p.clone(), p.clone()).unwrap();
        let a = analyze_pair(&pair, CLUSTER_TOL).unwrap();
        let (im_p, im_q) = induced_bases(&a, &pair).unwrap();
        assert_eq!(im_p.len(), 2);
        assert_eq!(im_q.len(), 2);

        // Rank-0 P gives an empty Im(P) basis.
        let zero = SymMatrix::zeros(3);
        let pair = ProjectorPair::new(zero.clone(), zero).unwrap();
        let a = analyze_pair(&pair, CLUSTER_TOL).unwrap();
        let (im_p, _) = induced_bases(&a, &pair).unwrap();
        assert!(im_p.is_empty());
    }

    #[test]
    fn rank_criterion_examples() {
        let p = make_projector(&[vec![1.0, 0.0, 0.0]]).unwrap();
        let q = make_projector(&[vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]).unwrap();
        let pair = ProjectorPair::new(p, q).unwrap();
        let a = analyze_pair(&pair, CLUSTER_TOL).unwrap();
        assert!(!rank_criterion(&a));
        assert_ne!(pair.rank_p(), pair.rank_q());
    }

    #[test]
    fn norm_restriction_angle_pair() {
        let phi = std::f64::consts::PI / 3.0;
        let pair = ProjectorPair::new(SymMatrix::diag(&[1.0, 0.0]), angle_projector(phi)).unwrap();
        let nr = norm_restriction_check(&pair, 100, 0).unwrap();
        assert!(nr.applicable);
        let expected = phi.sin(); // √3/2
        assert!((nr.global - expected).abs() < 1e-10, "global {}", nr.global);
        assert!((nr.on_im_q - expected).abs() < 1e-10);
        assert!(nr.probe_max <= nr.on_im_q + 1e-10);

        let p = SymMatrix::diag(&[1.0, 0.0]);
        let pair = ProjectorPair::new(p.clone(), p).unwrap();
        let nr = norm_restriction_check(&pair, 10, 0).unwrap();
        assert_eq!(nr.global, 0.0);
        assert_eq!(nr.on_im_q, 0.0);

        // Unequal ranks: not applicable.
        let p = make_projector(&[vec![1.0, 0.0, 0.0]]).unwrap();
        let q = SymMatrix::identity(3);
        let nr = norm_restriction_check(&ProjectorPair::new(p, q).unwrap(), 10, 0).unwrap();
        assert!(!nr.applicable);
    }

    #[test]
    fn randomized_suite_smoke() {
        let report = run_suite(&[2, 3, 4], 50, 123).unwrap();
        assert!(report.all_ok, "{report:?}");
    }
}
