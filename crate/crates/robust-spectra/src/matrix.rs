//! Dense symmetric matrices and data samples.
//!
//! `SymMatrix` is the common currency of the crate: covariance matrices,
//! estimators, projectors and spectral functions are all symmetric d×d
//! matrices under the Frobenius (Hilbert-Schmidt) inner product. Storage is
//! row-major and kept exactly symmetric by construction.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{parameter, Error, Result};

pub const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(dim: usize) -> Self {
        SymMatrix {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = 1.0;
        }
        m
    }

    /// Build from row-major entries, validating symmetry and finiteness.
    /// Entries are symmetrized ((a_ij + a_ji)/2) so storage is exact.
    pub fn from_flat(dim: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != dim * dim {
            return parameter(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                entries.len()
            ));
        }
        let scale = entries.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        if !scale.is_finite() {
            return parameter("matrix entries must be finite");
        }
        let tol = SYMMETRY_TOL * (1.0 + scale);
        let mut data = entries;
        for i in 0..dim {
            for j in (i + 1)..dim {
                let a = data[i * dim + j];
                let b = data[j * dim + i];
                if (a - b).abs() > tol {
                    return parameter(format!(
                        "matrix is not symmetric at ({i},{j}): {a} vs {b}"
                    ));
                }
                let avg = 0.5 * (a + b);
                data[i * dim + j] = avg;
                data[j * dim + i] = avg;
            }
        }
        Ok(SymMatrix { dim, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        let mut flat = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return parameter("matrix rows must be square");
            }
            flat.extend_from_slice(row);
        }
        Self::from_flat(dim, flat)
    }

    /// Diagonal matrix.
    pub fn diag(values: &[f64]) -> Self {
        let dim = values.len();
        let mut m = Self::zeros(dim);
        for (i, v) in values.iter().enumerate() {
            m.data[i * dim + i] = *v;
        }
        m
    }

    /// Σ_k c_k u_k u_kᵀ for spectral recomposition.
    pub fn from_spectral(coeffs: &[f64], vectors: &[Vec<f64>]) -> Self {
        let dim = vectors.first().map_or(0, Vec::len);
        let mut m = Self::zeros(dim);
        for (c, u) in coeffs.iter().zip(vectors) {
            m.add_scaled_outer(*c, u);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set_sym(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] = v;
        self.data[j * self.dim + i] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn entries(&self) -> &[f64] {
        &self.data
    }

    /// θᵀ M θ, the quadratic form. Equals ⟨M, θθᵀ⟩ in the HS inner product
    /// for unit θ.
    pub fn quadratic_form(&self, theta: &[f64]) -> f64 {
        debug_assert_eq!(theta.len(), self.dim);
        let d = self.dim;
        let mut acc = 0.0;
        for i in 0..d {
            let row = &self.data[i * d..(i + 1) * d];
            let mut ri = 0.0;
            for j in 0..d {
                ri += row[j] * theta[j];
            }
            acc += theta[i] * ri;
        }
        acc
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        let d = self.dim;
        let mut out = vec![0.0; d];
        for i in 0..d {
            let row = &self.data[i * d..(i + 1) * d];
            out[i] = row.iter().zip(v).map(|(a, b)| a * b).sum();
        }
        out
    }

    /// M += c·θθᵀ (rank-one update).
    pub fn add_scaled_outer(&mut self, c: f64, theta: &[f64]) {
        let d = self.dim;
        for i in 0..d {
            let ti = c * theta[i];
            let row = &mut self.data[i * d..(i + 1) * d];
            for j in 0..d {
                row[j] += ti * theta[j];
            }
        }
    }

    pub fn add(&self, other: &SymMatrix) -> SymMatrix {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &SymMatrix) -> SymMatrix {
        self.zip(other, |a, b| a - b)
    }

    pub fn scale(&self, c: f64) -> SymMatrix {
        SymMatrix {
            dim: self.dim,
            data: self.data.iter().map(|x| c * x).collect(),
        }
    }

    fn zip(&self, other: &SymMatrix, f: impl Fn(f64, f64) -> f64) -> SymMatrix {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        SymMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| f(*a, *b))
                .collect(),
        }
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    pub fn hs_inner(&self, other: &SymMatrix) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |a, x| a.max(x.abs()))
    }

    /// CSV with the header line `# symmatrix d=<d>`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# symmatrix d={}", self.dim);
        for i in 0..self.dim {
            let row: Vec<String> = self.row(i).iter().map(|x| format!("{x}")).collect();
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rows: Vec<Vec<f64>> = Vec::new();
        let mut declared_dim: Option<usize> = None;
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                for tok in rest.split_whitespace() {
                    if let Some(v) = tok.strip_prefix("d=") {
                        declared_dim = v.parse().ok();
                    }
                }
                continue;
            }
            let row = parse_csv_row(line)?;
            rows.push(row);
        }
        let m = Self::from_rows(&rows)?;
        if let Some(d) = declared_dim {
            if d != m.dim() {
                return parameter(format!(
                    "header declares d={d} but found {} rows",
                    m.dim()
                ));
            }
        }
        Ok(m)
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_csv(&text)
    }
}

pub(crate) fn parse_csv_row(line: &str) -> Result<Vec<f64>> {
    line.split(',')
        .map(|tok| {
            let tok = tok.trim();
            tok.parse::<f64>()
                .map_err(|_| Error::Parameter(format!("not a number: {tok:?}")))
        })
        .collect()
}

/// An n×d matrix of observations, one row per data point.
#[derive(Debug, Clone)]
pub struct Sample {
    n: usize,
    d: usize,
    data: Vec<f64>,
}

impl Sample {
    pub fn from_flat(n: usize, d: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * d {
            return parameter(format!(
                "expected {} values for an {n}x{d} sample, got {}",
                n * d,
                data.len()
            ));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return parameter("sample entries must be finite");
        }
        Ok(Sample { n, d, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return parameter("sample must be non-empty");
        }
        let d = rows[0].len();
        let mut flat = Vec::with_capacity(n * d);
        for row in rows {
            if row.len() != d {
                return parameter("sample rows must all have the same length");
            }
            flat.extend_from_slice(row);
        }
        Self::from_flat(n, d, flat)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.d)
    }

    /// Squared projections ⟨θ, X_i⟩², the per-direction statistics everything
    /// downstream consumes.
    pub fn projections_squared(&self, theta: &[f64]) -> Vec<f64> {
        debug_assert_eq!(theta.len(), self.d);
        self.rows()
            .map(|row| {
                let dot: f64 = row.iter().zip(theta).map(|(a, b)| a * b).sum();
                dot * dot
            })
            .collect()
    }

    pub fn column_means(&self) -> Vec<f64> {
        let mut means = vec![0.0; self.d];
        for row in self.rows() {
            for (m, x) in means.iter_mut().zip(row) {
                *m += x;
            }
        }
        for m in &mut means {
            *m /= self.n as f64;
        }
        means
    }

    /// Headerless CSV, one row per observation.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in self.rows() {
            let cells: Vec<String> = row.iter().map(|x| format!("{x}")).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            rows.push(parse_csv_row(line)?);
        }
        Self::from_rows(&rows)
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_csv(&text)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

pub(crate) fn normalize(v: &mut [f64]) -> f64 {
    let n = norm(v);
    if n > 0.0 {
        for x in v.iter_mut() {
            *x /= n;
        }
    }
    n
}
