//! Flag/config-file merging. Every flag has a key of the same (kebab-case)
//! name in the TOML file; flags given on the command line win.

use std::path::Path;

use anyhow::{bail, Context};
use clap::ValueEnum;
use cojump::cojump_test::{Normalization, TestConfig, TestVariant};
use cojump::jumps::DetectConfig;
use cojump::montecarlo::RecordFilter;
use cojump::simulator::{ScenarioId, Tuning};
use cojump::spectral::SpectralConfig;
use cojump::spotvol::{SpotConfig, ThresholdRule};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThresholdArg {
    Global,
    Adaptive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VariantArg {
    Chi2,
    Naive,
    Multiple,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormalizationArg {
    Fisher,
    Rate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FilterArg {
    All,
    RealizedOne,
    RealizedAndDetectedOne,
}

/// Contents of a `--config` file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct FileConfig {
    pub bins: Option<usize>,
    pub freqs: Option<usize>,
    pub pilot_freqs: Option<usize>,
    pub window: Option<usize>,
    pub pilot_window: Option<usize>,
    pub threshold: Option<ThresholdArg>,
    pub min_jump: Option<f64>,
    pub exclude_edges: Option<bool>,
    pub time_range: Option<(f64, f64)>,
    pub level: Option<f64>,
    pub variant: Option<VariantArg>,
    pub normalization: Option<NormalizationArg>,
    pub scenario: Option<String>,
    pub runs: Option<usize>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub filter: Option<FilterArg>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn scenario(&self) -> anyhow::Result<Option<ScenarioId>> {
        Ok(self.scenario.as_deref().map(str::parse).transpose()?)
    }
}

/// Estimation and detection flags shared by all subcommands.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct TuningArgs {
    /// Number of bins h⁻¹
    #[arg(short = 'b', long)]
    pub bins: Option<usize>,
    /// Spectral cut-off J
    #[arg(short = 'J', long)]
    pub freqs: Option<usize>,
    /// Pilot cut-off J_pi
    #[arg(long)]
    pub pilot_freqs: Option<usize>,
    /// Smoothing window r⁻¹ in bins
    #[arg(short = 'r', long)]
    pub window: Option<usize>,
    /// Pilot window in bins [default: same as --window]
    #[arg(long)]
    pub pilot_window: Option<usize>,
    /// Jump threshold rule [default: adaptive]
    #[arg(long, value_enum)]
    pub threshold: Option<ThresholdArg>,
    /// Only jumps with |ΔX| above this size
    #[arg(long)]
    pub min_jump: Option<f64>,
    /// Ignore jumps in the first and last window
    #[arg(long)]
    pub exclude_edges: bool,
    /// Test on a sub-interval of the day, as fractions: T0,T1
    #[arg(long, value_parser = parse_range)]
    pub time_range: Option<(f64, f64)>,
}

#[derive(Debug, Clone, Default, clap::Args)]
pub struct TestArgs {
    /// Nominal level [default: 0.05]
    #[arg(long)]
    pub level: Option<f64>,
    /// Test variant [default: chi2]
    #[arg(long, value_enum)]
    pub variant: Option<VariantArg>,
    /// How g is scaled into a χ² variable [default: fisher]
    #[arg(long, value_enum)]
    pub normalization: Option<NormalizationArg>,
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected T0,T1")?;
    let a: f64 = a.trim().parse().map_err(|e| format!("{e}"))?;
    let b: f64 = b.trim().parse().map_err(|e| format!("{e}"))?;
    Ok((a, b))
}

/// Fully resolved estimation, detection and test settings; embedded in every report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Resolved {
    pub h_inv: usize,
    pub spectral: SpectralConfig,
    pub spot: SpotConfig,
    pub detect: DetectConfig,
    pub group_gap: usize,
    pub test: TestConfig,
}

/// Defaults for real data: 39 bins, J = 30, J_pi = 15, windows of 6 bins.
pub const DATA_TUNING: Tuning = Tuning { h_inv: 39, j_max: 30, j_max_pilot: 15, r_inv: 6, r_inv_pilot: 6 };

pub fn resolve(flags: &TuningArgs, test: &TestArgs, file: &FileConfig, defaults: Tuning) -> anyhow::Result<Resolved> {
    let h_inv = flags.bins.or(file.bins).unwrap_or(defaults.h_inv);
    let j_max = flags.freqs.or(file.freqs).unwrap_or(defaults.j_max);
    let j_max_pilot = flags.pilot_freqs.or(file.pilot_freqs).unwrap_or(defaults.j_max_pilot.min(j_max));
    let r_inv = flags.window.or(file.window).unwrap_or(defaults.r_inv);
    let r_inv_pilot = flags
        .pilot_window
        .or(file.pilot_window)
        .unwrap_or(if flags.window.or(file.window).is_some() { r_inv } else { defaults.r_inv_pilot });
    let min_jump = flags.min_jump.or(file.min_jump).unwrap_or(0.0);
    let time_range = flags.time_range.or(file.time_range);
    if let Some((t0, t1)) = time_range {
        if !(0.0 <= t0 && t0 < t1 && t1 <= 1.0) {
            bail!("time range {t0},{t1} must satisfy 0 <= T0 < T1 <= 1");
        }
    }

    let mut spot = SpotConfig::new(r_inv, r_inv_pilot);
    spot.threshold = match flags.threshold.or(file.threshold).unwrap_or(ThresholdArg::Adaptive) {
        ThresholdArg::Global => ThresholdRule::Global,
        ThresholdArg::Adaptive => ThresholdRule::Adaptive,
    };
    spot.a_min_jump = min_jump;

    let mut detect = DetectConfig::new(r_inv);
    detect.a_min_jump = min_jump;
    detect.exclude_edges = flags.exclude_edges || file.exclude_edges.unwrap_or(false);
    detect.time_range = time_range;

    let test = TestConfig {
        level: test.level.or(file.level).unwrap_or(0.05),
        variant: match test.variant.or(file.variant).unwrap_or(VariantArg::Chi2) {
            VariantArg::Chi2 => TestVariant::Chi2,
            VariantArg::Naive => TestVariant::Naive,
            VariantArg::Multiple => TestVariant::Multiple,
        },
        normalization: match test.normalization.or(file.normalization).unwrap_or(NormalizationArg::Fisher) {
            NormalizationArg::Fisher => Normalization::Fisher,
            NormalizationArg::Rate => Normalization::Rate,
        },
    };
    test.validate()?;

    Ok(Resolved {
        h_inv,
        spectral: SpectralConfig::new(j_max, j_max_pilot),
        spot,
        detect,
        group_gap: 2 * r_inv,
        test,
    })
}

impl Resolved {
    pub fn tuning(&self) -> Tuning {
        Tuning {
            h_inv: self.h_inv,
            j_max: self.spectral.j_max,
            j_max_pilot: self.spectral.j_max_pilot,
            r_inv: self.spot.r_inv,
            r_inv_pilot: self.spot.r_inv_pilot,
        }
    }
}

pub fn record_filter(flag: Option<FilterArg>, file: &FileConfig) -> RecordFilter {
    match flag.or(file.filter) {
        None => RecordFilter::default(),
        Some(FilterArg::All) => RecordFilter::All,
        Some(FilterArg::RealizedOne) => RecordFilter::RealizedOne,
        Some(FilterArg::RealizedAndDetectedOne) => RecordFilter::RealizedAndDetectedOne,
    }
}
