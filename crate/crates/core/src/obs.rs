//! Tick data and the tick-time observation grid.
//!
//! The i-th trade of a session is placed at grid time `i / n` regardless of
//! its wall-clock timestamp, so the log-prices `Y_0..Y_n` form an equispaced
//! noisy path on `[0, 1]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Spacing used to break ties between equal timestamps, in seconds.
pub const TIE_JITTER: f64 = 1e-9;

/// Raw trades: strictly increasing timestamps (seconds) and positive price levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TickSeries {
    timestamps: Vec<f64>,
    prices: Vec<f64>,
}

impl TickSeries {
    /// Validates strictly increasing timestamps, positive prices and length >= 2.
    pub fn new(timestamps: Vec<f64>, prices: Vec<f64>) -> Result<Self> {
        if timestamps.len() != prices.len() {
            return Err(Error::InvalidConfig(format!(
                "{} timestamps but {} prices",
                timestamps.len(),
                prices.len()
            )));
        }
        if prices.len() < 2 {
            return Err(Error::TooFewObservations { need: 2, got: prices.len() });
        }
        for (index, (&t, &p)) in timestamps.iter().zip(&prices).enumerate() {
            if !t.is_finite() || !p.is_finite() {
                return Err(Error::NonFinite { index });
            }
            if p <= 0.0 {
                return Err(Error::NonPositivePrice { index, price: p });
            }
            if index > 0 && t <= timestamps[index - 1] {
                return Err(Error::DecreasingTimestamp { index, prev: timestamps[index - 1], next: t });
            }
        }
        Ok(Self { timestamps, prices })
    }

    /// Like [`TickSeries::new`] but breaks runs of equal timestamps in file
    /// order by spacing them [`TIE_JITTER`] apart. Timestamps that go
    /// backwards are still rejected.
    pub fn from_raw(mut timestamps: Vec<f64>, prices: Vec<f64>) -> Result<Self> {
        let mut raw_prev = f64::NEG_INFINITY;
        for i in 0..timestamps.len() {
            let raw = timestamps[i];
            if raw < raw_prev {
                return Err(Error::DecreasingTimestamp { index: i, prev: raw_prev, next: raw });
            }
            raw_prev = raw;
            if i > 0 && timestamps[i] <= timestamps[i - 1] {
                timestamps[i] = timestamps[i - 1] + TIE_JITTER;
            }
        }
        Self::new(timestamps, prices)
    }

    pub fn len(&self) -> usize {
        self.prices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prices.is_empty()
    }

    pub fn timestamps(&self) -> &[f64] {
        &self.timestamps
    }

    pub fn prices(&self) -> &[f64] {
        &self.prices
    }
}

/// Log-price observations `Y_0..Y_n` on the grid `i / n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoisyPath<T> {
    y: Vec<T>,
}

impl<T: Scalar> NoisyPath<T> {
    pub fn new(y: Vec<T>) -> Result<Self> {
        if y.len() < 2 {
            return Err(Error::TooFewObservations { need: 2, got: y.len() });
        }
        if let Some(index) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { y })
    }

    /// Tick-time mapping: `y_i = ln(price_i)`, `n = len - 1`.
    pub fn from_ticks(ticks: &TickSeries) -> Result<Self> {
        let y = ticks.prices().iter().map(|&p| T::of(p.ln())).collect();
        Self::new(y)
    }

    /// Number of returns.
    pub fn n(&self) -> usize {
        self.y.len() - 1
    }

    pub fn values(&self) -> &[T] {
        &self.y
    }

    /// Grid time of observation `i`.
    pub fn time(&self, i: usize) -> T {
        T::of_usize(i) / T::of_usize(self.n())
    }

    pub fn returns(&self) -> ReturnSeries<T> {
        ReturnSeries { dy: self.y.windows(2).map(|w| w[1] - w[0]).collect() }
    }
}

/// Returns `Δ_i Y = Y_i - Y_{i-1}` for `i = 1..n` (stored at index `i - 1`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnSeries<T> {
    dy: Vec<T>,
}

impl<T: Scalar> ReturnSeries<T> {
    pub fn from_returns(dy: Vec<T>) -> Result<Self> {
        if dy.is_empty() {
            return Err(Error::TooFewObservations { need: 1, got: 0 });
        }
        if let Some(index) = dy.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { dy })
    }

    pub fn n(&self) -> usize {
        self.dy.len()
    }

    pub fn values(&self) -> &[T] {
        &self.dy
    }

    /// Return `Δ_i Y` with 1-based index `i`.
    pub fn get(&self, i: usize) -> T {
        self.dy[i - 1]
    }
}
