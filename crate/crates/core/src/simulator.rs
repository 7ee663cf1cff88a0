//! Synthetic noisy price paths.
//!
//! Model 1: `X = B + compound Poisson`, constant unit volatility.
//! Model 2: `dX = φ_t sqrt(c_t) dB + jumps` with seasonality
//! `φ_t = 1 - 0.6 sqrt(t) + 0.1 t²` and
//! `dc = 6 (1 - c) dt + sqrt(c) dB̃ + dJ`, `d[B, B̃] = ρ dt`.
//! The volatility jumps `J` consist of `γ y` at every price-jump time
//! (with `y` drawn independently of the price jump) plus an independent
//! compound Poisson stream. All jump sizes follow `N(H, H/100)`, the second
//! parameter being the variance.
//!
//! Everything is simulated on the observation grid `i/n` by a full-truncation
//! Euler scheme, with one random stream per driver (see [`crate::rng`]).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::obs::NoisyPath;
use crate::rng::{exponential, standard_normal, stream_rng, uniform_open, Stream};
use crate::spectral::{BinGrid, SpectralConfig};
use crate::spotvol::SpotConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ScenarioId {
    I,
    II,
    III,
    IV,
    V,
    VI,
    VII,
    VIII,
    IX,
}

impl ScenarioId {
    pub const ALL: [ScenarioId; 9] = [
        ScenarioId::I,
        ScenarioId::II,
        ScenarioId::III,
        ScenarioId::IV,
        ScenarioId::V,
        ScenarioId::VI,
        ScenarioId::VII,
        ScenarioId::VIII,
        ScenarioId::IX,
    ];

    pub fn number(self) -> usize {
        Self::ALL.iter().position(|&s| s == self).unwrap() + 1
    }
}

impl fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl FromStr for ScenarioId {
    type Err = Error;

    /// Roman (`"VIII"`, case-insensitive) or arabic (`"8"`) numerals.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if let Ok(k) = t.parse::<usize>() {
            if (1..=9).contains(&k) {
                return Ok(Self::ALL[k - 1]);
            }
        }
        Self::ALL
            .iter()
            .copied()
            .find(|id| id.to_string().eq_ignore_ascii_case(t))
            .ok_or_else(|| Error::UnknownScenario(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    ConstVol,
    StochVol,
}

/// Variance of the observation noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseVariance {
    /// `η²` for model 1, `η² (∫ φ⁴ c² dt)^{1/4}` for model 2, integral by the trapezoid rule.
    Verbatim,
    /// `η²` in both models.
    Plain,
}

/// Estimator settings attached to a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tuning {
    pub h_inv: usize,
    pub j_max: usize,
    pub j_max_pilot: usize,
    pub r_inv: usize,
    pub r_inv_pilot: usize,
}

impl Tuning {
    pub fn spectral(&self) -> SpectralConfig {
        SpectralConfig::new(self.j_max, self.j_max_pilot)
    }

    pub fn spot(&self) -> SpotConfig {
        SpotConfig::new(self.r_inv, self.r_inv_pilot)
    }

    pub fn grid(&self, n: usize) -> Result<BinGrid> {
        BinGrid::new(n, self.h_inv)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub id: Option<ScenarioId>,
    pub n: usize,
    /// Price-jump intensity.
    pub lambda: f64,
    /// Mean jump size `H`.
    pub jump_mean: f64,
    /// Noise scale; the noise variance is `η²` (model 1).
    pub eta: f64,
    pub gamma: f64,
    pub model: Model,
    pub rho: f64,
    /// Drop each co-jump with probability 1/2.
    pub half_jump_thinning: bool,
    /// Intensity of the volatility jumps that do not coincide with price jumps.
    pub vol_jump_intensity: f64,
    pub noise_variance: NoiseVariance,
    pub seed: u64,
    pub tuning: Tuning,
}

impl ScenarioConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn jump_variance(&self) -> f64 {
        self.jump_mean / 100.0
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.n < 2 {
            return bad(format!("n = {} < 2", self.n));
        }
        if !(self.lambda >= 0.0) || !(self.vol_jump_intensity >= 0.0) {
            return bad("jump intensities must be nonnegative".into());
        }
        if !(self.eta >= 0.0) {
            return Err(Error::NegativeNoise(self.eta));
        }
        if !(self.rho.abs() <= 1.0) {
            return bad(format!("|rho| = {} > 1", self.rho.abs()));
        }
        if !(self.jump_mean >= 0.0) {
            return bad(format!("jump mean {} must be nonnegative", self.jump_mean));
        }
        Ok(())
    }
}

/// One row of the parameter table. Scenario I uses model 1, the others model 2;
/// VIII and IX carry co-jumps (`γ = 1`), IX thins them by one half.
pub fn table1_scenario(id: ScenarioId) -> ScenarioConfig {
    use ScenarioId::*;
    let (n, lambda, h, eta, h_inv, j, j_pi, r, r_pi) = match id {
        I => (300_000, 1.0, 0.25, 0.001, 300, 50, 25, 100, 10),
        II | VIII => (30_000, 2.0, 0.25, 0.005, 60, 40, 25, 3, 5),
        III => (30_000, 2.0, 0.25, 0.05, 60, 40, 25, 3, 5),
        IV => (30_000, 2.0, 0.05, 0.005, 60, 40, 25, 3, 5),
        V | IX => (5_000, 2.0, 0.25, 0.005, 10, 30, 20, 3, 3),
        VI => (5_000, 2.0, 0.25, 0.05, 10, 30, 20, 3, 3),
        VII => (5_000, 2.0, 0.05, 0.005, 10, 30, 20, 3, 3),
    };
    ScenarioConfig {
        id: Some(id),
        n,
        lambda,
        jump_mean: h,
        eta,
        gamma: if matches!(id, VIII | IX) { 1.0 } else { 0.0 },
        model: if id == I { Model::ConstVol } else { Model::StochVol },
        rho: 0.2,
        half_jump_thinning: id == IX,
        vol_jump_intensity: 1.0,
        noise_variance: NoiseVariance::Verbatim,
        seed: 0,
        tuning: Tuning { h_inv, j_max: j, j_max_pilot: j_pi, r_inv: r, r_inv_pilot: r_pi },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VolJumpKind {
    /// Co-located with a price jump.
    CoJump,
    Independent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriceJump {
    pub time: f64,
    pub size: f64,
    /// Return index `i` (1-based) whose increment carries the jump.
    pub index: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolJump {
    pub time: f64,
    pub size: f64,
    pub index: usize,
    pub kind: VolJumpKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulatedPath {
    pub y: NoisyPath<f64>,
    /// Efficient log-price `X_{i/n}`.
    pub x: Vec<f64>,
    /// `X` without its jumps.
    pub x_continuous: Vec<f64>,
    /// Spot squared volatility `φ²c` on the grid.
    pub c_path: Vec<f64>,
    pub price_jumps: Vec<PriceJump>,
    pub vol_jumps: Vec<VolJump>,
    pub epsilon: Vec<f64>,
    /// Variance of each `ε_i`.
    pub noise_variance: f64,
}

impl SimulatedPath {
    pub fn n(&self) -> usize {
        self.x.len() - 1
    }

    /// Average true spot squared volatility over the grid points of bin `k`.
    pub fn bin_mean_c(&self, grid: &BinGrid, k: usize) -> f64 {
        let pts = &self.c_path[grid.bin_start(k)..=grid.bin_end(k)];
        pts.iter().sum::<f64>() / pts.len() as f64
    }

    /// Average of [`Self::bin_mean_c`] over a range of bins.
    pub fn window_mean_c(&self, grid: &BinGrid, bins: std::ops::Range<usize>) -> Option<f64> {
        let m = bins.len();
        (m > 0).then(|| bins.map(|k| self.bin_mean_c(grid, k)).sum::<f64>() / m as f64)
    }
}

/// Seasonality factor `φ_t`.
pub fn seasonality(t: f64) -> f64 {
    1.0 - 0.6 * libm::sqrt(t) + 0.1 * t * t
}

/// One full-truncation Euler step of `dc = 6 (1 - c) dt + sqrt(c) dB̃`.
pub fn cir_step(c: f64, dt: f64, db: f64) -> f64 {
    c + 6.0 * (1.0 - c) * dt + libm::sqrt(c.max(0.0)) * db
}

/// Arrival times of a Poisson process with the given intensity on `(0, 1)`.
fn poisson_times(seed: u64, stream: Stream, intensity: f64) -> Vec<f64> {
    let mut out = Vec::new();
    if intensity <= 0.0 {
        return out;
    }
    let mut rng = stream_rng(seed, stream);
    let mut t = 0.0;
    loop {
        t += exponential(&mut rng) / intensity;
        if t >= 1.0 {
            return out;
        }
        out.push(t);
    }
}

fn return_index(t: f64, n: usize) -> usize {
    ((t * n as f64).ceil() as usize).clamp(1, n)
}

fn trapezoid(v: &[f64], dt: f64) -> f64 {
    let inner: f64 = v[1..v.len() - 1].iter().sum();
    dt * (inner + 0.5 * (v[0] + v[v.len() - 1]))
}

pub fn simulate(cfg: &ScenarioConfig) -> Result<SimulatedPath> {
    cfg.validate()?;
    let n = cfg.n;
    let dt = 1.0 / n as f64;
    let sqrt_dt = dt.sqrt();
    let seed = cfg.seed;
    let jump_sd = cfg.jump_variance().sqrt();

    let mut size_rng = stream_rng(seed, Stream::PriceJumpSizes);
    let price_jumps: Vec<PriceJump> = poisson_times(seed, Stream::PriceJumpTimes, cfg.lambda)
        .into_iter()
        .map(|time| PriceJump {
            time,
            size: cfg.jump_mean + jump_sd * standard_normal(&mut size_rng),
            index: return_index(time, n),
        })
        .collect();

    let mut vol_jumps = Vec::new();
    if cfg.model == Model::StochVol {
        let mut y_rng = stream_rng(seed, Stream::CoJumpSizes);
        let mut thin_rng = stream_rng(seed, Stream::Thinning);
        for pj in &price_jumps {
            let y = cfg.jump_mean + jump_sd * standard_normal(&mut y_rng);
            let kept = !cfg.half_jump_thinning || uniform_open(&mut thin_rng) >= 0.5;
            if cfg.gamma != 0.0 && kept {
                vol_jumps.push(VolJump { time: pj.time, size: cfg.gamma * y, index: pj.index, kind: VolJumpKind::CoJump });
            }
        }
        let mut z_rng = stream_rng(seed, Stream::VolJumpSizes);
        for time in poisson_times(seed, Stream::VolJumpTimes, cfg.vol_jump_intensity) {
            let size = cfg.jump_mean + jump_sd * standard_normal(&mut z_rng);
            vol_jumps.push(VolJump { time, size, index: return_index(time, n), kind: VolJumpKind::Independent });
        }
        vol_jumps.sort_by(|a, b| a.time.total_cmp(&b.time));
    }

    let mut price_jump_at = vec![0.0; n + 1];
    for pj in &price_jumps {
        price_jump_at[pj.index] += pj.size;
    }
    let mut vol_jump_at = vec![0.0; n + 1];
    for vj in &vol_jumps {
        vol_jump_at[vj.index] += vj.size;
    }

    let mut b_rng = stream_rng(seed, Stream::PriceBrownian);
    let mut w_rng = stream_rng(seed, Stream::VolBrownian);
    let mut x = Vec::with_capacity(n + 1);
    let mut x_continuous = Vec::with_capacity(n + 1);
    let mut c_path = Vec::with_capacity(n + 1);
    x.push(0.0);
    x_continuous.push(0.0);
    match cfg.model {
        Model::ConstVol => {
            c_path.resize(n + 1, 1.0);
            for i in 1..=n {
                let db = sqrt_dt * standard_normal(&mut b_rng);
                x.push(x[i - 1] + db + price_jump_at[i]);
                x_continuous.push(x_continuous[i - 1] + db);
            }
        }
        Model::StochVol => {
            let rho_perp = (1.0 - cfg.rho * cfg.rho).sqrt();
            let mut c = 1.0;
            c_path.push(seasonality(0.0).powi(2) * c);
            for i in 1..=n {
                let t_prev = (i - 1) as f64 * dt;
                let db = sqrt_dt * standard_normal(&mut b_rng);
                let dw = sqrt_dt * standard_normal(&mut w_rng);
                let diffusion = seasonality(t_prev) * libm::sqrt(c.max(0.0)) * db;
                x.push(x[i - 1] + diffusion + price_jump_at[i]);
                x_continuous.push(x_continuous[i - 1] + diffusion);
                c = cir_step(c, dt, cfg.rho * db + rho_perp * dw) + vol_jump_at[i];
                c_path.push(seasonality(i as f64 * dt).powi(2) * c);
            }
        }
    }

    let noise_variance = match (cfg.model, cfg.noise_variance) {
        (Model::StochVol, NoiseVariance::Verbatim) => {
            let sq: Vec<f64> = c_path.iter().map(|c| c * c).collect();
            cfg.eta * cfg.eta * trapezoid(&sq, dt).powf(0.25)
        }
        _ => cfg.eta * cfg.eta,
    };
    let noise_sd = noise_variance.sqrt();
    let mut e_rng = stream_rng(seed, Stream::Noise);
    let epsilon: Vec<f64> = (0..=n).map(|_| noise_sd * standard_normal(&mut e_rng)).collect();
    let y = NoisyPath::new(x.iter().zip(&epsilon).map(|(a, b)| a + b).collect())?;

    Ok(SimulatedPath { y, x, x_continuous, c_path, price_jumps, vol_jumps, epsilon, noise_variance })
}
