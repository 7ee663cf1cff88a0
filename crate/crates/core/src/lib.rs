//! Spectral spot volatility estimation for noisy high-frequency prices, jump
//! detection by truncation, and tests for common price and volatility jumps.
//!
//! The numerical core ([`obs`], [`spectral`], [`noise`], [`spotvol`],
//! [`jumps`]) is generic over a floating point [`Scalar`]; the aliases at the
//! crate root fix it to `f64`, which is what the simulator, the tests and the
//! Monte Carlo harness operate on.
//!
//! A typical pipeline:
//!
//! ```
//! use cojump::prelude::*;
//!
//! let scenario = table1_scenario(ScenarioId::II).with_seed(7);
//! let sim = simulate(&scenario).unwrap();
//! let tuning = scenario.tuning;
//! let grid = BinGrid::new(sim.y.n(), tuning.h_inv).unwrap();
//! let spot = spot_path(&sim.y, &grid, &tuning.spectral(), &tuning.spot()).unwrap();
//! let jumps = group(&detect(&spot, &DetectConfig::new(tuning.r_inv)), 2 * tuning.r_inv);
//! let report = run_test(&spot, &jumps, &TestConfig::default()).unwrap();
//! assert!(report.p_value >= 0.0 && report.p_value <= 1.0);
//! ```

pub mod distributions;
pub mod error;
pub mod io;
pub mod jumps;
pub mod montecarlo;
pub mod noise;
pub mod obs;
pub mod rng;
pub mod scalar;
pub mod simulator;
pub mod spectral;
pub mod spotvol;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// `f64` instantiations of the generic core types.
pub type NoisyPath = obs::NoisyPath<f64>;
pub type ReturnSeries = obs::ReturnSeries<f64>;
pub type SpectralMatrix = spectral::SpectralMatrix<f64>;
pub type WeightVector = spectral::WeightVector<f64>;
pub type NoiseEstimate = noise::NoiseEstimate<f64>;
pub type SpotVolPath = spotvol::SpotVolPath<f64>;
pub type SpotEstimate = spotvol::SpotEstimate<f64>;
pub type SideEstimate = spotvol::SideEstimate<f64>;
pub type BinStat = spotvol::BinStat<f64>;
pub type JumpEvent = jumps::JumpEvent<f64>;

pub mod prelude {
    pub use crate::cojump_test::{
        chi2_test, g_stat, multiple_test, naive_test, run_test, t0_statistic, CoJumpReport,
        Normalization, TestConfig, TestVariant,
    };
    pub use crate::jumps::{detect, group, DetectConfig};
    pub use crate::montecarlo::{run_scenario, size_power_table, McConfig, McReport, RecordFilter};
    pub use crate::obs::TickSeries;
    pub use crate::simulator::{simulate, table1_scenario, ScenarioConfig, ScenarioId, SimulatedPath};
    pub use crate::spectral::{BinGrid, SpectralConfig};
    pub use crate::spotvol::{spot_path, SpotConfig, ThresholdRule};
    pub use crate::{JumpEvent, NoisyPath, SpotVolPath};
}
