//! Local sine-basis machinery: bin grid, basis functions, empirical norms,
//! spectral statistics `S_jk`, variance-optimal weights and bin-wise
//! squared-volatility estimates.
//!
//! On bin `k` with `m` returns (indices `a+1..=a+m`) the basis function of
//! frequency `j` evaluated at the `l`-th return of the bin is
//!
//! ```text
//! Φ_jk(l) = (sqrt(2m/n) · n · sin(jπ/(2m)))⁻¹ · sin(jπ l/m)
//! ```
//!
//! which is the equispaced-bin definition with the bin width replaced by the
//! actual `m / n`. Its empirical norm is `(4n² sin²(jπ/(2m)))⁻¹` for
//! `1 <= j < m`, and the basis is discretely orthogonal on the bin.
//! For `j = m` the sine vanishes on every grid point, so frequencies are
//! limited to `j < m`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::obs::ReturnSeries;
use crate::scalar::Scalar;

/// Partition of the return indices `1..=n` into `h_inv` bins.
///
/// Bin `k` holds the returns `floor(k n / h_inv) + 1 ..= floor((k+1) n / h_inv)`,
/// so bins are equal when `h_inv` divides `n` and differ by one return otherwise.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinGrid {
    n: usize,
    h_inv: usize,
    edges: Vec<usize>,
}

impl BinGrid {
    pub fn new(n: usize, h_inv: usize) -> Result<Self> {
        if h_inv == 0 {
            return Err(Error::InvalidGrid("need at least one bin".into()));
        }
        if h_inv > n {
            return Err(Error::InvalidGrid(format!("{h_inv} bins for {n} returns")));
        }
        let edges = (0..=h_inv).map(|k| k * n / h_inv).collect();
        Ok(Self { n, h_inv, edges })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h_inv(&self) -> usize {
        self.h_inv
    }

    /// Nominal bin width `h = 1 / h_inv`.
    pub fn h<T: Scalar>(&self) -> T {
        T::one() / T::of_usize(self.h_inv)
    }

    /// Average number of returns per bin, `n h`.
    pub fn obs_per_bin(&self) -> f64 {
        self.n as f64 / self.h_inv as f64
    }

    pub fn is_uniform(&self) -> bool {
        self.n % self.h_inv == 0
    }

    /// Index of the last return before bin `k` (the bin covers `start+1..=end`).
    pub fn bin_start(&self, k: usize) -> usize {
        self.edges[k]
    }

    pub fn bin_end(&self, k: usize) -> usize {
        self.edges[k + 1]
    }

    pub fn bin_len(&self, k: usize) -> usize {
        self.edges[k + 1] - self.edges[k]
    }

    pub fn min_bin_len(&self) -> usize {
        (0..self.h_inv).map(|k| self.bin_len(k)).min().unwrap_or(0)
    }

    /// Bin holding return `i` (1-based).
    pub fn bin_of_return(&self, i: usize) -> usize {
        debug_assert!(i >= 1 && i <= self.n);
        (i * self.h_inv).div_ceil(self.n) - 1
    }

    /// Grid time at which bin `k` starts.
    pub fn bin_time(&self, k: usize) -> f64 {
        self.edges[k] as f64 / self.n as f64
    }

    /// Bin containing time `t` in `[0, 1]`; the right end maps to the last bin.
    pub fn bin_of_time(&self, t: f64) -> usize {
        let k = self.edges.partition_point(|&e| (e as f64) <= t * self.n as f64);
        k.saturating_sub(1).min(self.h_inv - 1)
    }
}

/// Spectral cut-offs for the final (`j_max`) and pilot (`j_max_pilot`) stages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpectralConfig {
    pub j_max: usize,
    pub j_max_pilot: usize,
}

impl SpectralConfig {
    pub fn new(j_max: usize, j_max_pilot: usize) -> Self {
        Self { j_max, j_max_pilot }
    }

    pub fn validate(&self, grid: &BinGrid) -> Result<()> {
        if self.j_max_pilot == 0 || self.j_max_pilot > self.j_max {
            return Err(Error::InvalidConfig(format!(
                "pilot cut-off {} must lie in 1..={}",
                self.j_max_pilot, self.j_max
            )));
        }
        check_cutoff(self.j_max, grid)
    }
}

fn check_cutoff(j_max: usize, grid: &BinGrid) -> Result<()> {
    let m = grid.min_bin_len();
    if j_max == 0 || j_max >= m {
        return Err(Error::FrequencyOutOfRange { j: j_max, max: m as f64 - 1.0 });
    }
    Ok(())
}

fn check_frequency(j: usize, n: usize, h_inv: usize) -> Result<()> {
    if j == 0 || j * h_inv > n {
        return Err(Error::FrequencyOutOfRange { j, max: n as f64 / h_inv as f64 });
    }
    Ok(())
}

fn check_bin(k: usize, h_inv: usize) -> Result<()> {
    if k >= h_inv {
        return Err(Error::BinOutOfRange { k, bins: h_inv });
    }
    Ok(())
}

/// Position of `t` inside bin `k` as a fraction of the bin, if `t` lies in it.
fn position_in_bin(k: usize, h_inv: usize, t: f64) -> Option<f64> {
    let u = t * h_inv as f64 - k as f64;
    (0.0..=1.0).contains(&u).then_some(u)
}

/// Sine basis function `Φ_jk(t)` on an equispaced grid of `h_inv` bins.
pub fn phi<T: Scalar>(j: usize, k: usize, h_inv: usize, n: usize, t: T) -> Result<T> {
    check_frequency(j, n, h_inv)?;
    check_bin(k, h_inv)?;
    let Some(u) = position_in_bin(k, h_inv, t.f64()) else {
        return Ok(T::zero());
    };
    let h = 1.0 / h_inv as f64;
    let nf = n as f64;
    let scale = (2.0 * h).sqrt() * nf * (j as f64 * PI / (2.0 * nf * h)).sin();
    Ok(T::of((j as f64 * PI * u).sin() / scale))
}

/// Cosine companion `φ_jk(t) = sqrt(2/h) cos(jπ (t - kh)/h)` on bin `k`.
pub fn phi_cos<T: Scalar>(j: usize, k: usize, h_inv: usize, t: T) -> Result<T> {
    if j == 0 {
        return Err(Error::FrequencyOutOfRange { j, max: f64::INFINITY });
    }
    check_bin(k, h_inv)?;
    let Some(u) = position_in_bin(k, h_inv, t.f64()) else {
        return Ok(T::zero());
    };
    Ok(T::of((2.0 * h_inv as f64).sqrt() * (j as f64 * PI * u).cos()))
}

/// Closed-form empirical norm `‖Φ_jk‖_n² = (4 n² sin²(jπ/(2nh)))⁻¹`.
pub fn empirical_norm_sq<T: Scalar>(j: usize, n: usize, h_inv: usize) -> Result<T> {
    check_frequency(j, n, h_inv)?;
    let nh = n as f64 / h_inv as f64;
    Ok(T::of(local_norm_sq(j, n, nh)))
}

fn local_norm_sq(j: usize, n: usize, m: f64) -> f64 {
    let s = (j as f64 * PI / (2.0 * m)).sin();
    1.0 / (4.0 * (n as f64).powi(2) * s * s)
}

/// `‖Φ_j‖_n⁻² / n`, the multiplier of the noise level in `E[S_jk²]`.
fn local_noise_factor(j: usize, n: usize, m: f64) -> f64 {
    let s = (j as f64 * PI / (2.0 * m)).sin();
    4.0 * n as f64 * s * s
}

/// Basis values of one bin length `m` on its local grid `l = 1..=m`.
#[derive(Debug, Clone)]
pub struct BinBasis<T> {
    n: usize,
    m: usize,
    j_max: usize,
    values: Vec<T>,
    inv_norm: Vec<T>,
    noise_factor: Vec<T>,
}

impl<T: Scalar> BinBasis<T> {
    pub fn new(n: usize, m: usize, j_max: usize) -> Result<Self> {
        if j_max == 0 || j_max >= m {
            return Err(Error::FrequencyOutOfRange { j: j_max, max: m as f64 - 1.0 });
        }
        let nf = n as f64;
        let mf = m as f64;
        let mut values = Vec::with_capacity(j_max * m);
        let mut inv_norm = Vec::with_capacity(j_max);
        let mut noise_factor = Vec::with_capacity(j_max);
        for j in 1..=j_max {
            let half = (j as f64 * PI / (2.0 * mf)).sin();
            let scale = 1.0 / ((2.0 * mf / nf).sqrt() * nf * half);
            values.extend((1..=m).map(|l| T::of(scale * (j as f64 * PI * l as f64 / mf).sin())));
            inv_norm.push(T::of(2.0 * nf * half));
            noise_factor.push(T::of(local_noise_factor(j, n, mf)));
        }
        Ok(Self { n, m, j_max, values, inv_norm, noise_factor })
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    pub fn j_max(&self) -> usize {
        self.j_max
    }

    /// `Φ_j` at local position `l` (1-based).
    pub fn value(&self, j: usize, l: usize) -> T {
        self.values[(j - 1) * self.m + (l - 1)]
    }

    pub fn row(&self, j: usize) -> &[T] {
        &self.values[(j - 1) * self.m..j * self.m]
    }

    pub fn norm_sq(&self, j: usize) -> T {
        T::of(local_norm_sq(j, self.n, self.m as f64))
    }

    pub fn noise_factors(&self) -> &[T] {
        &self.noise_factor
    }

    /// `S_j = ‖Φ_j‖⁻¹ Σ_l dy_l Φ_j(l)` for the returns of one bin.
    fn statistic(&self, j: usize, dy: &[T]) -> T {
        let dot = self.row(j).iter().zip(dy).fold(T::zero(), |acc, (&p, &d)| acc + p * d);
        self.inv_norm[j - 1] * dot
    }
}

/// Spectral statistics `S_jk` for `j = 1..=J`, `k = 0..h_inv`, stored bin-major,
/// together with the per-bin noise factors `‖Φ_jk‖_n⁻² / n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralMatrix<T> {
    j_max: usize,
    bins: usize,
    s: Vec<T>,
    noise_factor: Vec<T>,
}

impl<T: Scalar> SpectralMatrix<T> {
    pub fn j_max(&self) -> usize {
        self.j_max
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn get(&self, j: usize, k: usize) -> T {
        self.s[k * self.j_max + j - 1]
    }

    /// `S_1k..S_Jk`.
    pub fn column(&self, k: usize) -> &[T] {
        &self.s[k * self.j_max..(k + 1) * self.j_max]
    }

    /// `‖Φ_jk‖_n⁻² / n` for `j = 1..=J` on bin `k`.
    pub fn noise_factors(&self, k: usize) -> &[T] {
        &self.noise_factor[k * self.j_max..(k + 1) * self.j_max]
    }
}

/// Computes `S_jk = ‖Φ_jk‖_n⁻¹ Σ_i Δ_i Y Φ_jk(i/n)` for all bins.
///
/// Basis values are tabulated once per distinct bin length and shifted to
/// each bin.
pub fn spectral_statistics<T: Scalar>(
    ret: &ReturnSeries<T>,
    grid: &BinGrid,
    j_max: usize,
) -> Result<SpectralMatrix<T>> {
    if ret.n() != grid.n() {
        return Err(Error::InvalidGrid(format!("grid for {} returns, got {}", grid.n(), ret.n())));
    }
    check_cutoff(j_max, grid)?;
    let mut tables: BTreeMap<usize, BinBasis<T>> = BTreeMap::new();
    for k in 0..grid.h_inv() {
        let m = grid.bin_len(k);
        if !tables.contains_key(&m) {
            tables.insert(m, BinBasis::new(grid.n(), m, j_max)?);
        }
    }
    let dy = ret.values();
    let mut s = Vec::with_capacity(j_max * grid.h_inv());
    let mut noise_factor = Vec::with_capacity(j_max * grid.h_inv());
    for k in 0..grid.h_inv() {
        let basis = &tables[&grid.bin_len(k)];
        let bin_dy = &dy[grid.bin_start(k)..grid.bin_end(k)];
        s.extend((1..=j_max).map(|j| basis.statistic(j, bin_dy)));
        noise_factor.extend_from_slice(basis.noise_factors());
    }
    Ok(SpectralMatrix { j_max, bins: grid.h_inv(), s, noise_factor })
}

/// Normalized weights `w_j = I_j / Σ_m I_m` and the total `I = Σ_j I_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightVector<T> {
    pub w: Vec<T>,
    pub fisher: T,
}

/// `I_j = ½ (c + f_j η)⁻²` with `f_j = ‖Φ_j‖_n⁻² / n`.
fn information_terms<T: Scalar>(c: T, eta: T, factors: &[T]) -> Result<Vec<T>> {
    if !(c > T::zero()) {
        return Err(Error::NonPositiveVolatility(c.f64()));
    }
    if eta < T::zero() {
        return Err(Error::NegativeNoise(eta.f64()));
    }
    let half = T::of(0.5);
    Ok(factors
        .iter()
        .map(|&f| {
            let v = c + f * eta;
            half / (v * v)
        })
        .collect())
}

/// Variance-minimizing weights for squared volatility `c` and noise level `eta`
/// given the noise factors of a bin.
pub fn weights_for_factors<T: Scalar>(c: T, eta: T, factors: &[T]) -> Result<WeightVector<T>> {
    let info = information_terms(c, eta, factors)?;
    let fisher: T = info.iter().copied().sum();
    let w = info.into_iter().map(|i| i / fisher).collect();
    Ok(WeightVector { w, fisher })
}

/// Oracle weights on an equispaced grid with `n` returns and `h_inv` bins.
pub fn oracle_weights<T: Scalar>(c: T, eta: T, n: usize, h_inv: usize, j_max: usize) -> Result<WeightVector<T>> {
    check_frequency(j_max, n, h_inv)?;
    weights_for_factors(c, eta, &uniform_noise_factors(n, h_inv, j_max))
}

/// `‖Φ_j‖_n⁻² / n` for `j = 1..=j_max` on an equispaced grid.
pub fn uniform_noise_factors<T: Scalar>(n: usize, h_inv: usize, j_max: usize) -> Vec<T> {
    let nh = n as f64 / h_inv as f64;
    (1..=j_max).map(|j| T::of(local_noise_factor(j, n, nh))).collect()
}

/// Bin Fisher information `Σ_j ½ (c + f_j η)⁻²`.
pub fn fisher_information<T: Scalar>(c: T, eta: T, factors: &[T]) -> Result<T> {
    Ok(information_terms(c, eta, factors)?.into_iter().sum())
}

/// `ζ_k = Σ_j w_j (S_jk² − f_j η)`.
pub fn bin_estimate<T: Scalar>(s_col: &[T], w: &[T], eta: T, factors: &[T]) -> T {
    debug_assert_eq!(s_col.len(), w.len());
    s_col
        .iter()
        .zip(w)
        .zip(factors)
        .fold(T::zero(), |acc, ((&s, &w), &f)| acc + w * (s * s - f * eta))
}

/// Equal-weight version of [`bin_estimate`] over the first `j_max` frequencies.
pub fn equal_weight_estimate<T: Scalar>(s_col: &[T], eta: T, factors: &[T], j_max: usize) -> T {
    let sum = s_col[..j_max]
        .iter()
        .zip(&factors[..j_max])
        .fold(T::zero(), |acc, (&s, &f)| acc + (s * s - f * eta));
    sum / T::of_usize(j_max)
}
