//! Sparse signals, Gaussian measurement matrices and noisy measurements.

use rand::Rng;
use rand_distr::{Distribution, Open01, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Nonzero amplitudes `w_1..w_k` of a sparse signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SignalValues(Vec<f64>);

impl SignalValues {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if w.is_empty() {
            return Err(Error::config("signal values: k must be at least 1"));
        }
        if let Some(pos) = w.iter().position(|v| *v == 0.0 || !v.is_finite()) {
            return Err(Error::config(format!(
                "signal values: entry {} is {}, every amplitude must be finite and nonzero",
                pos + 1,
                w[pos]
            )));
        }
        Ok(Self(w))
    }

    pub fn k(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn w_min(&self) -> f64 {
        self.0.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min)
    }

    pub fn w_max(&self) -> f64 {
        self.0.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

impl TryFrom<Vec<f64>> for SignalValues {
    type Error = Error;

    fn try_from(w: Vec<f64>) -> Result<Self> {
        Self::new(w)
    }
}

impl From<SignalValues> for Vec<f64> {
    fn from(w: SignalValues) -> Self {
        w.0
    }
}

/// Support positions `S_1..S_k`, distinct and 0-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SupportIndices {
    m: usize,
    indices: Vec<usize>,
}

impl SupportIndices {
    pub fn new(indices: Vec<usize>, m: usize) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::config("support must contain at least one index"));
        }
        if let Some(&bad) = indices.iter().find(|&&i| i >= m) {
            return Err(Error::config(format!(
                "support index {} outside [1, {m}]",
                bad + 1
            )));
        }
        let mut sorted = indices.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|p| p[0] == p[1]) {
            return Err(Error::config("support indices must be distinct"));
        }
        Ok(Self { m, indices })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k(&self) -> usize {
        self.indices.len()
    }

    /// Indices in draw order (pairs with `SignalValues` position by position).
    pub fn as_slice(&self) -> &[usize] {
        &self.indices
    }

    pub fn sorted(&self) -> Vec<usize> {
        let mut s = self.indices.clone();
        s.sort_unstable();
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparseSignal {
    entries: Vec<f64>,
}

impl SparseSignal {
    pub fn m(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Positions of the nonzero entries, ascending.
    pub fn support(&self) -> Vec<usize> {
        self.entries
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Dense `n x m` matrix, column-major so that columns `A_j` are contiguous.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementMatrix {
    n: usize,
    m: usize,
    sigma_a2: f64,
    data: Vec<f64>,
}

impl MeasurementMatrix {
    pub fn from_columns(n: usize, m: usize, sigma_a2: f64, data: Vec<f64>) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::config("matrix dimensions must be positive"));
        }
        if data.len() != n * m {
            return Err(Error::config(format!(
                "matrix data has {} entries, expected {n}x{m}",
                data.len()
            )));
        }
        if !(sigma_a2 > 0.0) {
            return Err(Error::config("sigma_a^2 must be positive"));
        }
        Ok(Self {
            n,
            m,
            sigma_a2,
            data,
        })
    }

    /// Builds from row-major data (the on-disk instance layout).
    pub fn from_row_major(n: usize, m: usize, sigma_a2: f64, rows: &[f64]) -> Result<Self> {
        if rows.len() != n * m {
            return Err(Error::config(format!(
                "matrix data has {} entries, expected {n}x{m}",
                rows.len()
            )));
        }
        let mut data = vec![0.0; n * m];
        for i in 0..n {
            for j in 0..m {
                data[j * n + i] = rows[i * m + j];
            }
        }
        Self::from_columns(n, m, sigma_a2, data)
    }

    pub fn to_row_major(&self) -> Vec<f64> {
        let mut rows = vec![0.0; self.n * self.m];
        for j in 0..self.m {
            for i in 0..self.n {
                rows[i * self.m + j] = self.data[j * self.n + i];
            }
        }
        rows
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn sigma_a2(&self) -> f64 {
        self.sigma_a2
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.data[j * self.n..(j + 1) * self.n]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.n + i]
    }

    /// Matrix with columns permuted: new column `j` is old column `perm[j]`.
    pub fn permute_columns(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.m);
        let mut data = Vec::with_capacity(self.data.len());
        for &src in perm {
            data.extend_from_slice(self.column(src));
        }
        Self { data, ..*self }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.m);
        let mut y = vec![0.0; self.n];
        for (j, &xj) in x.iter().enumerate() {
            if xj != 0.0 {
                axpy(xj, self.column(j), &mut y);
            }
        }
        y
    }

    /// `A^T v`.
    pub fn tr_mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.m).map(|j| dot(self.column(j), v)).collect()
    }

    pub fn column_norms_sq(&self) -> Vec<f64> {
        (0..self.m).map(|j| dot(self.column(j), self.column(j))).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    #[default]
    Gaussian,
    Uniform,
    Laplace,
    Rademacher,
}

impl std::str::FromStr for NoiseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" => Ok(Self::Gaussian),
            "uniform" => Ok(Self::Uniform),
            "laplace" => Ok(Self::Laplace),
            "rademacher" => Ok(Self::Rademacher),
            other => Err(Error::config(format!("unknown noise kind '{other}'"))),
        }
    }
}

/// Zero-mean i.i.d. noise, every kind scaled to per-sample variance `sigma_z2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub kind: NoiseKind,
    pub sigma_z2: f64,
}

impl NoiseModel {
    pub fn new(kind: NoiseKind, sigma_z2: f64) -> Result<Self> {
        if !(sigma_z2 >= 0.0) || !sigma_z2.is_finite() {
            return Err(Error::config("sigma_z^2 must be finite and nonnegative"));
        }
        Ok(Self { kind, sigma_z2 })
    }

    pub fn gaussian(sigma_z2: f64) -> Result<Self> {
        Self::new(NoiseKind::Gaussian, sigma_z2)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let sd = self.sigma_z2.sqrt();
        match self.kind {
            NoiseKind::Gaussian => {
                let z: f64 = StandardNormal.sample(rng);
                sd * z
            }
            NoiseKind::Uniform => {
                let half = (3.0 * self.sigma_z2).sqrt();
                rng.random_range(-half..=half)
            }
            NoiseKind::Laplace => {
                // inverse CDF with scale b = sigma / sqrt(2), variance 2 b^2
                let b = sd / std::f64::consts::SQRT_2;
                let u01: f64 = Open01.sample(rng);
                let u = u01 - 0.5;
                -b * u.signum() * (1.0 - 2.0 * u.abs()).ln()
            }
            NoiseKind::Rademacher => {
                if rng.random::<bool>() {
                    sd
                } else {
                    -sd
                }
            }
        }
    }
}

pub fn draw_support<R: Rng + ?Sized>(m: usize, k: usize, rng: &mut R) -> Result<SupportIndices> {
    if k == 0 || k > m {
        return Err(Error::config(format!(
            "support size k={k} must satisfy 1 <= k <= m={m}"
        )));
    }
    let indices = rand::seq::index::sample(rng, m, k).into_vec();
    SupportIndices::new(indices, m)
}

/// Places `w_j` at position `S_j`; all other entries are exactly zero.
pub fn assemble_signal(w: &SignalValues, support: &SupportIndices, m: usize) -> Result<SparseSignal> {
    if w.k() != support.k() {
        return Err(Error::config(format!(
            "{} signal values for a support of size {}",
            w.k(),
            support.k()
        )));
    }
    if support.m() != m {
        return Err(Error::config(format!(
            "support drawn for dimension {}, signal dimension is {m}",
            support.m()
        )));
    }
    let mut entries = vec![0.0; m];
    for (&s, &v) in support.as_slice().iter().zip(w.as_slice()) {
        entries[s] = v;
    }
    Ok(SparseSignal { entries })
}

/// I.i.d. `N(0, sigma_a2)` entries, filled column by column.
pub fn draw_matrix<R: Rng + ?Sized>(
    n: usize,
    m: usize,
    sigma_a2: f64,
    rng: &mut R,
) -> Result<MeasurementMatrix> {
    if !(sigma_a2 > 0.0) || !sigma_a2.is_finite() {
        return Err(Error::config("sigma_a^2 must be positive"));
    }
    if n == 0 || m == 0 {
        return Err(Error::config(format!("matrix dimensions {n}x{m} must be positive")));
    }
    let sd = sigma_a2.sqrt();
    let data = (0..n * m)
        .map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            sd * z
        })
        .collect();
    MeasurementMatrix::from_columns(n, m, sigma_a2, data)
}

/// `(1/(n m)) ||A||_F^2 / sigma_a^2`.
pub fn power_ratio(a: &MeasurementMatrix) -> f64 {
    let fro: f64 = a.data.iter().map(|v| v * v).sum();
    fro / (a.n * a.m) as f64 / a.sigma_a2
}

/// `y = A x + z`. `x` is a dense length-`m` vector.
pub fn measure<R: Rng + ?Sized>(
    a: &MeasurementMatrix,
    x: &[f64],
    noise: &NoiseModel,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if x.len() != a.m() {
        return Err(Error::config(format!(
            "signal has dimension {}, matrix has {} columns",
            x.len(),
            a.m()
        )));
    }
    let mut y = a.mul_vec(x);
    if noise.sigma_z2 > 0.0 {
        for yi in &mut y {
            *yi += noise.sample(rng);
        }
    }
    Ok(y)
}

/// One measurement vector per signal, all through the same matrix. The
/// signals must share a support.
pub fn measure_mmv<R: Rng + ?Sized>(
    a: &MeasurementMatrix,
    signals: &[SparseSignal],
    noise: &NoiseModel,
    rng: &mut R,
) -> Result<Vec<Vec<f64>>> {
    let first = signals
        .first()
        .ok_or_else(|| Error::config("MMV needs at least one signal"))?;
    let support = first.support();
    if signals.iter().any(|s| s.support() != support) {
        return Err(Error::config("MMV signals must share one support"));
    }
    signals
        .iter()
        .map(|s| measure(a, s.entries(), noise, rng))
        .collect()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}
