//! Two-stage spot squared-volatility estimation.
//!
//! Stage one computes an equal-weight pilot statistic per bin from the first
//! `J_pi` frequencies, truncates jump bins with the global threshold and
//! averages `r_pilot` bins to the left and right of every bin. Stage two
//! evaluates the variance-optimal weights at the pilot, forms `ζ_k` over all
//! `J` frequencies, flags jump bins and averages `r` bins on each side.
//!
//! The estimate "at bin `k`" refers to the boundary `s = k h`: the right
//! window covers bins `k+1..=k+r`, the left window `k-r..=k-1`. Bin `k`
//! itself belongs to neither, so a jump in bin `k` is bracketed by the two.
//! Windows are clipped at the ends of the day and the divisor is the number
//! of bins left in the window; truncated bins add zero but stay in the divisor.

use serde::{Deserialize, Serialize};

use crate::distributions::normal_quantile;
use crate::error::{Error, Result};
use crate::noise::estimate_eta_iid;
use crate::obs::NoisyPath;
use crate::scalar::Scalar;
use crate::spectral::{
    bin_estimate, equal_weight_estimate, fisher_information, spectral_statistics, uniform_noise_factors,
    weights_for_factors, BinGrid, SpectralConfig, SpectralMatrix,
};

/// Threshold `u_k` applied to `h |ζ_k|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "rule")]
pub enum ThresholdRule {
    /// `u = 2 h log(1/h)`.
    Global,
    /// `u = c h^τ`.
    Power { c: f64, tau: f64 },
    /// `u_k = 2 log(1/h) h ĉ_k` with the pilot `ĉ_k`.
    Adaptive,
}

impl ThresholdRule {
    fn value<T: Scalar>(&self, h: T, pilot: T) -> T {
        let two_log = T::of(2.0) * (T::one() / h).ln();
        match *self {
            ThresholdRule::Global => two_log * h,
            ThresholdRule::Power { c, tau } => T::of(c) * h.powf(T::of(tau)),
            ThresholdRule::Adaptive => two_log * h * pilot,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpotConfig {
    /// Final window length in bins.
    pub r_inv: usize,
    /// Pilot window length in bins.
    pub r_inv_pilot: usize,
    /// Rule for the second stage; the pilot stage always uses [`ThresholdRule::Global`].
    pub threshold: ThresholdRule,
    /// Minimal jump size `a`; bins are flagged only above `a²` as well.
    pub a_min_jump: f64,
    /// Pilots are floored at this fraction of their median.
    pub pilot_floor: f64,
    /// Use this noise level instead of estimating it.
    pub eta_override: Option<f64>,
    /// Coverage of the reported confidence intervals.
    pub ci_level: f64,
}

impl SpotConfig {
    pub fn new(r_inv: usize, r_inv_pilot: usize) -> Self {
        Self {
            r_inv,
            r_inv_pilot,
            threshold: ThresholdRule::Adaptive,
            a_min_jump: 0.0,
            pilot_floor: 0.1,
            eta_override: None,
            ci_level: 0.95,
        }
    }

    pub fn validate(&self, grid: &BinGrid) -> Result<()> {
        let half = grid.h_inv() / 2;
        for (name, r) in [("window", self.r_inv), ("pilot window", self.r_inv_pilot)] {
            if r == 0 || r > half {
                return Err(Error::InvalidConfig(format!("{name} {r} must lie in 1..={half}")));
            }
        }
        if let ThresholdRule::Power { c, tau } = self.threshold {
            if !(c > 0.0) || !(tau > 0.0 && tau < 1.0) {
                return Err(Error::InvalidConfig(format!("power threshold needs c > 0, 0 < tau < 1 (c={c}, tau={tau})")));
            }
        }
        if !(self.a_min_jump >= 0.0) {
            return Err(Error::InvalidConfig(format!("min jump {} is negative", self.a_min_jump)));
        }
        if !(self.pilot_floor > 0.0) {
            return Err(Error::InvalidConfig(format!("pilot floor {} must be positive", self.pilot_floor)));
        }
        if let Some(eta) = self.eta_override {
            if !(eta >= 0.0) {
                return Err(Error::NegativeNoise(eta));
            }
        }
        if !(0.0..1.0).contains(&self.ci_level) {
            return Err(Error::ProbabilityOutOfRange(self.ci_level));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

/// Per-bin quantities of both stages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinStat<T> {
    /// Equal-weight pilot statistic of the bin itself.
    pub pilot_stat: T,
    pub pilot_truncated: bool,
    pub pilot_left: Option<T>,
    pub pilot_right: Option<T>,
    /// Floored average of the two pilot sides; drives the weights of `ζ_k`.
    pub pilot: T,
    pub zeta: T,
    /// `u_k` of the second stage.
    pub threshold: T,
    pub truncated: bool,
    /// Fisher information at `pilot`.
    pub fisher: T,
}

/// One side of the spot estimate at a bin boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SideEstimate<T> {
    pub c: T,
    /// `Î` of the bin adjacent to the boundary on this side.
    pub fisher: T,
    /// Bins in the (possibly clipped) window.
    pub window: usize,
    pub n_truncated: usize,
}

impl<T: Scalar> SideEstimate<T> {
    /// Asymptotic variance `1 / (window · Î)`.
    pub fn variance(&self) -> T {
        T::one() / (T::of_usize(self.window) * self.fisher)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpotEstimate<T> {
    pub bin: usize,
    /// Boundary time `s` on the grid.
    pub time: T,
    pub right: Option<SideEstimate<T>>,
    pub left: Option<SideEstimate<T>>,
    /// Mean of the two sides, or the single available side at the borders.
    pub combined: Option<T>,
}

impl<T: Scalar> SpotEstimate<T> {
    pub fn side(&self, side: Side) -> Option<&SideEstimate<T>> {
        match side {
            Side::Left => self.left.as_ref(),
            Side::Right => self.right.as_ref(),
        }
    }

    /// Interval for the combined estimator.
    pub fn combined_interval(&self, level: f64) -> Result<Option<(T, T)>> {
        let var = match (&self.left, &self.right) {
            (Some(l), Some(r)) => (l.variance() + r.variance()) / T::of(4.0),
            (Some(s), None) | (None, Some(s)) => s.variance(),
            (None, None) => return Ok(None),
        };
        let c = self.combined.expect("combined exists whenever a side does");
        let half = T::of(z_half(level)?) * var.sqrt();
        Ok(Some((c - half, c + half)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpotVolPath<T> {
    pub grid: BinGrid,
    pub spectral: SpectralConfig,
    pub config: SpotConfig,
    pub eta_hat: T,
    pub bins: Vec<BinStat<T>>,
    pub estimates: Vec<SpotEstimate<T>>,
}

impl<T: Scalar> SpotVolPath<T> {
    pub fn h(&self) -> T {
        self.grid.h()
    }

    pub fn zetas(&self) -> Vec<T> {
        self.bins.iter().map(|b| b.zeta).collect()
    }

    /// Integrated squared volatility `Σ h ζ_k` over bins not flagged as jumps.
    pub fn integrated_variance(&self) -> T {
        let h = self.h();
        self.bins.iter().filter(|b| !b.truncated).map(|b| h * b.zeta).sum()
    }

    pub fn combined(&self) -> Vec<Option<T>> {
        self.estimates.iter().map(|e| e.combined).collect()
    }
}

fn z_half(level: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&level) {
        return Err(Error::ProbabilityOutOfRange(level));
    }
    normal_quantile((1.0 + level) / 2.0)
}

/// `ĉ ± z_{(1+level)/2} sqrt(1 / (window · Î))`.
pub fn confidence_interval<T: Scalar>(est: &SideEstimate<T>, level: f64) -> Result<(T, T)> {
    let half = T::of(z_half(level)?) * est.variance().sqrt();
    Ok((est.c - half, est.c + half))
}

/// `Σ_j ½ (c + f_j η)⁻²` on an equispaced grid of `h_inv` bins.
pub fn fisher_at_bin<T: Scalar>(pilot_c: T, eta_hat: T, n: usize, h_inv: usize, j_max: usize) -> Result<T> {
    fisher_information(pilot_c, eta_hat, &uniform_noise_factors::<T>(n, h_inv, j_max))
}

/// Bins of the window on `side` of bin `k`, clipped to the day.
fn window(k: usize, r: usize, bins: usize, side: Side) -> std::ops::Range<usize> {
    match side {
        Side::Right => (k + 1).min(bins)..(k + 1 + r).min(bins),
        Side::Left => k.saturating_sub(r)..k,
    }
}

/// Window mean of `values` with truncated bins set to zero.
/// `None` if the window is empty or every bin in it is truncated.
fn window_mean<T: Scalar>(values: &[T], truncated: &[bool], range: std::ops::Range<usize>) -> Option<(T, usize, usize)> {
    let m = range.len();
    let kept: Vec<T> = range.clone().filter(|&b| !truncated[b]).map(|b| values[b]).collect();
    if kept.is_empty() {
        return None;
    }
    let sum: T = kept.iter().copied().sum();
    Some((sum / T::of_usize(m), m, m - kept.len()))
}

fn median<T: Scalar>(mut v: Vec<T>) -> Option<T> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite pilots"));
    let m = v.len();
    Some(if m % 2 == 1 { v[m / 2] } else { (v[m / 2 - 1] + v[m / 2]) / T::of(2.0) })
}

struct PilotStage<T> {
    stat: Vec<T>,
    truncated: Vec<bool>,
    left: Vec<Option<T>>,
    right: Vec<Option<T>>,
    center: Vec<T>,
    floor: T,
}

fn pilot_stage<T: Scalar>(
    s: &SpectralMatrix<T>,
    eta: T,
    grid: &BinGrid,
    spectral: &SpectralConfig,
    cfg: &SpotConfig,
) -> PilotStage<T> {
    let bins = grid.h_inv();
    let h: T = grid.h();
    let u = ThresholdRule::Global.value(h, T::zero());
    let stat: Vec<T> = (0..bins)
        .map(|k| equal_weight_estimate(s.column(k), eta, s.noise_factors(k), spectral.j_max_pilot))
        .collect();
    let truncated: Vec<bool> = stat.iter().map(|&p| h * p.abs() > u).collect();
    let side = |k, side| window_mean(&stat, &truncated, window(k, cfg.r_inv_pilot, bins, side)).map(|(c, _, _)| c);
    let left: Vec<Option<T>> = (0..bins).map(|k| side(k, Side::Left)).collect();
    let right: Vec<Option<T>> = (0..bins).map(|k| side(k, Side::Right)).collect();
    let raw: Vec<Option<T>> = left
        .iter()
        .zip(&right)
        .map(|(l, r)| match (l, r) {
            (Some(l), Some(r)) => Some((*l + *r) / T::of(2.0)),
            (Some(v), None) | (None, Some(v)) => Some(*v),
            (None, None) => None,
        })
        .collect();
    let med = median(raw.iter().flatten().copied().collect()).unwrap_or(T::zero());
    let floor = if med > T::zero() { T::of(cfg.pilot_floor) * med } else { T::epsilon() };
    let center = raw.iter().map(|p| p.unwrap_or(floor).max(floor)).collect();
    PilotStage { stat, truncated, left, right, center, floor }
}

/// Runs both stages on precomputed spectral statistics.
pub fn estimate_from_stats<T: Scalar>(
    s: &SpectralMatrix<T>,
    eta_hat: T,
    grid: &BinGrid,
    spectral: &SpectralConfig,
    cfg: &SpotConfig,
) -> Result<SpotVolPath<T>> {
    spectral.validate(grid)?;
    cfg.validate(grid)?;
    if s.j_max() < spectral.j_max || s.bins() != grid.h_inv() {
        return Err(Error::InvalidGrid("spectral statistics do not match the configuration".into()));
    }
    if eta_hat < T::zero() {
        return Err(Error::NegativeNoise(eta_hat.f64()));
    }
    let bins = grid.h_inv();
    let h: T = grid.h();
    let j = spectral.j_max;
    let pilot = pilot_stage(s, eta_hat, grid, spectral, cfg);

    let mut stats = Vec::with_capacity(bins);
    for k in 0..bins {
        let factors = &s.noise_factors(k)[..j];
        let c = pilot.center[k];
        let wv = weights_for_factors(c, eta_hat, factors)?;
        let zeta = bin_estimate(&s.column(k)[..j], &wv.w, eta_hat, factors);
        let threshold = cfg.threshold.value(h, c);
        stats.push(BinStat {
            pilot_stat: pilot.stat[k],
            pilot_truncated: pilot.truncated[k],
            pilot_left: pilot.left[k],
            pilot_right: pilot.right[k],
            pilot: c,
            zeta,
            threshold,
            truncated: h * zeta.abs() > threshold,
            fisher: wv.fisher,
        });
    }

    let zetas: Vec<T> = stats.iter().map(|b| b.zeta).collect();
    let flags: Vec<bool> = stats.iter().map(|b| b.truncated).collect();
    let side_estimate = |k: usize, side: Side| -> Result<Option<SideEstimate<T>>> {
        let range = window(k, cfg.r_inv, bins, side);
        let Some((c, window, n_truncated)) = window_mean(&zetas, &flags, range.clone()) else {
            if !range.is_empty() {
                log::debug!("every bin {side:?} of bin {k} is truncated");
            }
            return Ok(None);
        };
        let (adjacent, pilot_c) = match side {
            Side::Right => (k + 1, pilot.right[k]),
            Side::Left => (k - 1, pilot.left[k]),
        };
        let pilot_c = pilot_c.unwrap_or(pilot.floor).max(pilot.floor);
        let fisher = fisher_information(pilot_c, eta_hat, &s.noise_factors(adjacent)[..j])?;
        Ok(Some(SideEstimate { c, fisher, window, n_truncated }))
    };

    let mut estimates = Vec::with_capacity(bins);
    for k in 0..bins {
        let right = side_estimate(k, Side::Right)?;
        let left = side_estimate(k, Side::Left)?;
        let combined = match (&left, &right) {
            (Some(l), Some(r)) => Some((l.c + r.c) / T::of(2.0)),
            (Some(v), None) | (None, Some(v)) => Some(v.c),
            (None, None) => None,
        };
        estimates.push(SpotEstimate { bin: k, time: T::of(grid.bin_time(k)), right, left, combined });
    }

    Ok(SpotVolPath {
        grid: grid.clone(),
        spectral: *spectral,
        config: cfg.clone(),
        eta_hat,
        bins: stats,
        estimates,
    })
}

/// Noise estimation, spectral statistics and both stages for a whole day.
pub fn spot_path<T: Scalar>(
    path: &NoisyPath<T>,
    grid: &BinGrid,
    spectral: &SpectralConfig,
    cfg: &SpotConfig,
) -> Result<SpotVolPath<T>> {
    if path.n() != grid.n() {
        return Err(Error::InvalidGrid(format!("grid for {} returns, path has {}", grid.n(), path.n())));
    }
    spectral.validate(grid)?;
    cfg.validate(grid)?;
    let ret = path.returns();
    let eta_hat = match cfg.eta_override {
        Some(eta) => T::of(eta),
        None => estimate_eta_iid(&ret)?.eta_hat,
    };
    let s = spectral_statistics(&ret, grid, spectral.j_max)?;
    estimate_from_stats(&s, eta_hat, grid, spectral, cfg)
}

/// Pilot average on one side of bin `k`; `None` if the window is empty or fully truncated.
pub fn pilot_spot<T: Scalar>(
    s: &SpectralMatrix<T>,
    eta_hat: T,
    grid: &BinGrid,
    spectral: &SpectralConfig,
    cfg: &SpotConfig,
    k: usize,
    side: Side,
) -> Result<Option<T>> {
    if k >= grid.h_inv() {
        return Err(Error::BinOutOfRange { k, bins: grid.h_inv() });
    }
    spectral.validate(grid)?;
    cfg.validate(grid)?;
    let pilot = pilot_stage(s, eta_hat, grid, spectral, cfg);
    Ok(match side {
        Side::Left => pilot.left[k],
        Side::Right => pilot.right[k],
    })
}

/// Second-stage estimate on one side of bin `k`.
pub fn adaptive_spot<T: Scalar>(
    s: &SpectralMatrix<T>,
    eta_hat: T,
    grid: &BinGrid,
    spectral: &SpectralConfig,
    cfg: &SpotConfig,
    k: usize,
    side: Side,
) -> Result<Option<SideEstimate<T>>> {
    if k >= grid.h_inv() {
        return Err(Error::BinOutOfRange { k, bins: grid.h_inv() });
    }
    let path = estimate_from_stats(s, eta_hat, grid, spectral, cfg)?;
    Ok(path.estimates[k].side(side).copied())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::obs::ReturnSeries;
    use crate::spectral::oracle_weights;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn matrix(dy: Vec<f64>, grid: &BinGrid, j: usize) -> SpectralMatrix<f64> {
        spectral_statistics(&ReturnSeries::from_returns(dy).unwrap(), grid, j).unwrap()
    }

    fn pseudo_returns(n: usize, scale: f64) -> Vec<f64> {
        (0..n).map(|i| scale * (((i * 2_654_435_761usize) % 1009) as f64 / 1009.0 - 0.5)).collect()
    }

    #[test]
    fn window_indexing() {
        assert_eq!(window(5, 3, 20, Side::Right), 6..9);
        assert_eq!(window(5, 3, 20, Side::Left), 2..5);
        assert_eq!(window(1, 3, 20, Side::Left), 0..1);
        assert_eq!(window(0, 3, 20, Side::Left), 0..0);
        assert_eq!(window(18, 3, 20, Side::Right), 19..20);
        assert_eq!(window(19, 3, 20, Side::Right), 20..20);
    }

    #[test]
    fn truncated_bin_keeps_divisor() {
        let v = [1.0, 100.0, 2.0, 3.0];
        let t = [false, true, false, false];
        assert_eq!(window_mean(&v, &t, 0..3), Some((1.0, 3, 1)));
        assert_eq!(window_mean(&v, &[true; 4], 0..4), None);
        assert_eq!(window_mean::<f64>(&v, &t, 2..2), None);
    }

    #[test]
    fn zero_data_zero_pilot() {
        let grid = BinGrid::new(400, 20).unwrap();
        let s = matrix(vec![0.0; 400], &grid, 8);
        let spectral = SpectralConfig::new(8, 4);
        let cfg = SpotConfig::new(3, 3);
        for k in [0, 7, 19] {
            for side in [Side::Left, Side::Right] {
                let p = pilot_spot(&s, 0.0, &grid, &spectral, &cfg, k, side).unwrap();
                assert!(p.is_none_or(|p| p == 0.0));
            }
        }
        assert_eq!(pilot_spot(&s, 0.0, &grid, &spectral, &cfg, 7, Side::Right).unwrap(), Some(0.0));
    }

    #[test]
    fn noiseless_adaptive_equals_equal_weight() {
        let n = 2_000;
        let grid = BinGrid::new(n, 20).unwrap();
        let dy = pseudo_returns(n, 0.05);
        let j = 10;
        let s = matrix(dy, &grid, j);
        let spectral = SpectralConfig::new(j, j);
        let mut cfg = SpotConfig::new(3, 3);
        cfg.threshold = ThresholdRule::Power { c: 1e6, tau: 0.5 };
        let path = estimate_from_stats(&s, 0.0, &grid, &spectral, &cfg).unwrap();
        for (k, b) in path.bins.iter().enumerate() {
            let direct = equal_weight_estimate(s.column(k), 0.0, s.noise_factors(k), j);
            assert_relative_eq!(b.zeta, direct, max_relative = 1e-12);
            assert_relative_eq!(b.pilot_stat, direct, max_relative = 1e-12);
        }
    }

    #[test]
    fn single_frequency_hand_computation() {
        // One frequency: the weight is 1 and ζ = S² - f η.
        let n = 1_000;
        let grid = BinGrid::new(n, 10).unwrap();
        let s = matrix(pseudo_returns(n, 0.1), &grid, 1);
        let eta = 1e-5;
        let spectral = SpectralConfig::new(1, 1);
        let path = estimate_from_stats(&s, eta, &grid, &spectral, &SpotConfig::new(2, 2)).unwrap();
        for k in 0..10 {
            let f = s.noise_factors(k)[0];
            assert_relative_eq!(path.bins[k].zeta, s.get(1, k).powi(2) - f * eta, max_relative = 1e-12);
        }
    }

    #[test]
    fn fisher_at_bin_values() {
        assert_relative_eq!(fisher_at_bin(2.0f64, 0.0, 1000, 10, 6).unwrap(), 6.0 / 8.0, max_relative = 1e-15);
        let base = fisher_at_bin(1.0f64, 1e-4, 30_000, 60, 40).unwrap();
        assert!(fisher_at_bin(1.2f64, 1e-4, 30_000, 60, 40).unwrap() < base);
        assert!(fisher_at_bin(1.0f64, 2e-4, 30_000, 60, 40).unwrap() < base);
        assert!(fisher_at_bin(0.0f64, 1e-4, 30_000, 60, 40).is_err());
        let wv = oracle_weights(1.0f64, 1e-4, 30_000, 60, 40).unwrap();
        assert_relative_eq!(wv.fisher, base, max_relative = 1e-14);
    }

    #[test]
    fn fisher_large_sample_limit() {
        // I_k ~ sqrt(n) h / (8 c^{3/2} η^{1/2}) once the effective number of
        // frequencies sqrt(c n / η) h / π is large and J well beyond it.
        let (n, h_inv, c, eta) = (1_000_000usize, 100, 1.0, 2.5e-3);
        let h = 1.0 / h_inv as f64;
        let j = 200;
        let scale = (c * n as f64 / eta).sqrt() * h / std::f64::consts::PI;
        assert!(scale > 50.0 && j as f64 > 3.0 * scale);
        let fisher = fisher_at_bin(c, eta, n, h_inv, j).unwrap();
        let limit = (n as f64).sqrt() * h / (8.0 * c.powf(1.5) * eta.sqrt());
        assert!((fisher / limit - 1.0).abs() < 0.1, "{fisher} vs {limit}");
    }

    #[test]
    fn interval_shapes() {
        let est = SideEstimate { c: 1.0f64, fisher: 50.0, window: 3, n_truncated: 0 };
        let (lo, hi) = confidence_interval(&est, 0.0).unwrap();
        assert!((lo - 1.0).abs() < 1e-12 && (hi - 1.0).abs() < 1e-12);
        let (lo, hi) = confidence_interval(&est, 0.95).unwrap();
        let doubled = SideEstimate { fisher: 100.0, ..est };
        let (lo2, hi2) = confidence_interval(&doubled, 0.95).unwrap();
        assert_relative_eq!((hi - lo) / (hi2 - lo2), 2f64.sqrt(), max_relative = 1e-12);
        assert_relative_eq!(hi - 1.0, 1.959_963_984_540_054 / 150f64.sqrt(), max_relative = 1e-9);
        assert!(confidence_interval(&est, 1.0).is_err());
    }

    #[test]
    fn constant_returns_give_flat_path() {
        let n = 3_000;
        let grid = BinGrid::new(n, 30).unwrap();
        let path = NoisyPath::new((0..=n).map(|i| i as f64 * 1e-4).collect()).unwrap();
        let mut cfg = SpotConfig::new(3, 3);
        cfg.eta_override = Some(0.0);
        let out = spot_path(&path, &grid, &SpectralConfig::new(10, 5), &cfg).unwrap();
        let first = out.bins[0].zeta;
        for b in &out.bins {
            assert_relative_eq!(b.zeta, first, max_relative = 1e-9);
        }
        for e in &out.estimates {
            assert_relative_eq!(e.combined.unwrap(), first, max_relative = 1e-9);
        }
    }

    #[test]
    fn time_reversal_of_constant_drift() {
        let n = 3_000;
        let h_inv = 30;
        let grid = BinGrid::new(n, h_inv).unwrap();
        let y: Vec<f64> = (0..=n).map(|i| 0.3 + i as f64 * 2e-4).collect();
        let y_rev: Vec<f64> = y.iter().rev().copied().collect();
        let mut cfg = SpotConfig::new(4, 3);
        cfg.eta_override = Some(1e-9);
        let spectral = SpectralConfig::new(12, 6);
        let fwd = spot_path(&NoisyPath::new(y).unwrap(), &grid, &spectral, &cfg).unwrap();
        let bwd = spot_path(&NoisyPath::new(y_rev).unwrap(), &grid, &spectral, &cfg).unwrap();
        for k in 0..h_inv {
            let l = fwd.estimates[k].left;
            let r = bwd.estimates[h_inv - 1 - k].right;
            match (l, r) {
                (Some(l), Some(r)) => {
                    assert_relative_eq!(l.c, r.c, max_relative = 1e-9);
                    assert_eq!(l.window, r.window);
                }
                (None, None) => {}
                other => panic!("bin {k}: {other:?}"),
            }
        }
    }

    #[test]
    fn degenerate_pilot_is_floored() {
        let n = 2_000;
        let grid = BinGrid::new(n, 20).unwrap();
        let s = matrix(pseudo_returns(n, 0.01), &grid, 8);
        // A huge noise level drives every bias-corrected pilot negative.
        let path = estimate_from_stats(&s, 1.0, &grid, &SpectralConfig::new(8, 4), &SpotConfig::new(3, 3)).unwrap();
        assert!(path.bins.iter().all(|b| b.pilot > 0.0 && b.fisher > 0.0));
    }

    #[test]
    fn config_validation() {
        let grid = BinGrid::new(1_000, 10).unwrap();
        assert!(SpotConfig::new(6, 3).validate(&grid).is_err());
        assert!(SpotConfig::new(5, 0).validate(&grid).is_err());
        assert!(SpotConfig::new(5, 5).validate(&grid).is_ok());
        let mut cfg = SpotConfig::new(2, 2);
        cfg.threshold = ThresholdRule::Power { c: 1.0, tau: 1.5 };
        assert!(cfg.validate(&grid).is_err());
    }

    proptest! {
        #[test]
        fn invariant_to_level_shift(shift in -5.0f64..5.0, seed in 0usize..1000) {
            let n = 1_200;
            let grid = BinGrid::new(n, 12).unwrap();
            let dy: Vec<f64> = (0..n).map(|i| ((((i + seed) * 2_654_435_761usize) % 997) as f64 / 997.0 - 0.5) * 0.02).collect();
            let mut y = vec![0.0];
            for d in &dy {
                y.push(y.last().unwrap() + d);
            }
            let shifted: Vec<f64> = y.iter().map(|v| v + shift).collect();
            let spectral = SpectralConfig::new(8, 4);
            let cfg = SpotConfig::new(2, 2);
            let a = spot_path(&NoisyPath::new(y).unwrap(), &grid, &spectral, &cfg).unwrap();
            let b = spot_path(&NoisyPath::new(shifted).unwrap(), &grid, &spectral, &cfg).unwrap();
            for (x, z) in a.bins.iter().zip(&b.bins) {
                prop_assert!((x.zeta - z.zeta).abs() <= 1e-9 * x.zeta.abs().max(1e-6));
            }
        }

        #[test]
        fn windows_are_disjoint_and_exclude_bin(k in 0usize..50, r in 1usize..10) {
            let l = window(k, r, 50, Side::Left);
            let rr = window(k, r, 50, Side::Right);
            prop_assert!(!l.contains(&k) && !rr.contains(&k));
            prop_assert!(l.end <= rr.start);
            prop_assert!(l.len() <= r && rr.len() <= r);
        }
    }
}
