//! Noise level estimation.
//!
//! `η̂ = (2n)⁻¹ Σ (Δ_i Y)²` is consistent for the variance of i.i.d. noise.
//! It also picks up the quadratic variation of the signal divided by `2n`;
//! that `O(1/n)` term is left in, no correction is applied.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::obs::ReturnSeries;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NoiseMethod {
    #[default]
    Iid,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseEstimate<T> {
    pub eta_hat: T,
    pub method: NoiseMethod,
}

pub fn estimate_eta_iid<T: Scalar>(ret: &ReturnSeries<T>) -> Result<NoiseEstimate<T>> {
    let n = ret.n();
    if n < 2 {
        return Err(Error::TooFewObservations { need: 2, got: n });
    }
    let ss: T = ret.values().iter().map(|&d| d * d).sum();
    Ok(NoiseEstimate { eta_hat: ss / T::of_usize(2 * n), method: NoiseMethod::Iid })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand_chacha::ChaCha20Rng;
    use rand_core::SeedableRng;

    fn series(v: Vec<f64>) -> ReturnSeries<f64> {
        ReturnSeries::from_returns(v).unwrap()
    }

    #[test]
    fn trivial_values() {
        assert_eq!(estimate_eta_iid(&series(vec![0.0; 5])).unwrap().eta_hat, 0.0);
        assert_eq!(estimate_eta_iid(&series(vec![2.0, -2.0])).unwrap().eta_hat, 2.0);
        assert!(estimate_eta_iid(&series(vec![1.0])).is_err());
    }

    #[test]
    fn pure_noise_path() {
        let n = 30_000;
        let eta = 0.005;
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        let eps: Vec<f64> = (0..=n).map(|_| eta * crate::rng::standard_normal(&mut rng)).collect();
        let dy = eps.windows(2).map(|w| w[1] - w[0]).collect();
        let est = estimate_eta_iid(&series(dy)).unwrap();
        let eta2 = eta * eta;
        assert!((est.eta_hat - eta2).abs() <= 3.0 * (2.0 / n as f64).sqrt() * eta2);
        assert_eq!(est.method, NoiseMethod::Iid);
    }

    proptest! {
        #[test]
        fn nonnegative_and_scale_equivariant(
            dy in proptest::collection::vec(-1.0f64..1.0, 2..200),
            s in 0.01f64..100.0,
        ) {
            let base = estimate_eta_iid(&series(dy.clone())).unwrap().eta_hat;
            let scaled = estimate_eta_iid(&series(dy.iter().map(|d| d * s).collect())).unwrap().eta_hat;
            prop_assert!(base >= 0.0);
            prop_assert!((scaled - s * s * base).abs() <= 1e-12 * (1.0 + s * s * base));
        }
    }
}
