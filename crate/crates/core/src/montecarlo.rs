//! Monte Carlo replication of the simulation study.
//!
//! Run `r` simulates with seed `base_seed ⊕ splitmix64(r)`, so any subset of
//! runs can be reproduced on its own. Runs execute on a rayon pool and are
//! collected in run order; the report does not depend on the thread count.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cojump_test::{naive_test, run_test, TestConfig, TestVariant};
use crate::distributions::{chi2_cdf, chi2_upper_quantile, empirical_quantile, ks_distance, normal_cdf};
use crate::error::{Error, Result};
use crate::io::SCHEMA_VERSION;
use crate::jumps::{detect, group, DetectConfig};
use crate::rng::run_seed;
use crate::simulator::{simulate, ScenarioConfig, ScenarioId, VolJumpKind};
use crate::spectral::BinGrid;
use crate::spotvol::{spot_path, SpotConfig};

/// Which runs enter the aggregates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RecordFilter {
    All,
    /// Exactly one realized price jump.
    RealizedOne,
    /// Exactly one realized and exactly one detected price jump.
    #[default]
    RealizedAndDetectedOne,
}

impl RecordFilter {
    pub fn keeps(&self, r: &RunRecord) -> bool {
        match self {
            RecordFilter::All => true,
            RecordFilter::RealizedOne => r.realized_jumps == 1,
            RecordFilter::RealizedAndDetectedOne => r.realized_jumps == 1 && r.detected_jumps == 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub scenario: ScenarioConfig,
    pub runs: usize,
    pub base_seed: u64,
    /// Worker threads; 0 lets rayon decide. Not serialized: reports must not
    /// depend on how they were computed.
    #[serde(skip)]
    pub threads: usize,
    pub test: TestConfig,
    pub filter: RecordFilter,
    pub spot: SpotConfig,
    pub detect: DetectConfig,
    /// Events closer than this many bins are grouped.
    pub group_gap: usize,
}

impl McConfig {
    /// Estimator settings taken from the scenario's tuning.
    pub fn new(scenario: ScenarioConfig, runs: usize, base_seed: u64) -> Self {
        let t = scenario.tuning;
        Self {
            spot: t.spot(),
            detect: DetectConfig::new(t.r_inv),
            group_gap: 2 * t.r_inv,
            scenario,
            runs,
            base_seed,
            threads: 1,
            test: TestConfig::default(),
            filter: RecordFilter::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run: usize,
    pub seed: u64,
    /// `N₁`, realized price jumps.
    pub realized_jumps: usize,
    pub realized_cojumps: usize,
    /// `N̂₁`, events after grouping.
    pub detected_jumps: usize,
    /// Events that entered the test.
    pub tested_jumps: usize,
    pub dof: usize,
    pub statistic: f64,
    pub p_value: f64,
    pub reject_05: bool,
    pub reject_10: bool,
    pub naive_statistic: f64,
    pub naive_p_value: f64,
    /// Realized jumps whose bin lies in a detected event.
    pub true_detections: usize,
    /// Detected events without a realized jump.
    pub false_detections: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantileRow {
    pub prob: f64,
    pub empirical: f64,
    pub reference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub filter: RecordFilter,
    pub n_selected: usize,
    pub rejection_rate_05: f64,
    pub rejection_rate_10: f64,
    /// KS distance of the selected statistic to its reference law
    /// (χ² with each record's degrees of freedom, or N(0, 1) for the naive test).
    pub ks_statistic: f64,
    /// KS distance of the naive statistic to N(0, 1).
    pub ks_naive: f64,
    /// Empirical against reference quantiles; filled when every selected record has one degree of freedom.
    pub quantiles: Vec<QuantileRow>,
    /// Detected share of realized price jumps over all runs.
    pub detection_rate: f64,
    pub false_detections_per_path: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub schema_version: u32,
    pub scenario: Option<ScenarioId>,
    pub config: McConfig,
    pub n_runs: usize,
    pub records: Vec<RunRecord>,
    pub aggregate: Aggregate,
    /// Wall-clock seconds; left out of the serialized report so that files are reproducible.
    #[serde(skip)]
    pub runtime: f64,
}

impl McReport {
    pub fn selected(&self) -> impl Iterator<Item = &RunRecord> {
        let f = self.aggregate.filter;
        self.records.iter().filter(move |r| f.keeps(r))
    }
}

pub fn run_one(cfg: &McConfig, run: usize) -> Result<RunRecord> {
    let seed = run_seed(cfg.base_seed, run as u64);
    let scenario = cfg.scenario.clone().with_seed(seed);
    let sim = simulate(&scenario)?;
    let grid = BinGrid::new(sim.n(), scenario.tuning.h_inv)?;
    let spot = spot_path(&sim.y, &grid, &scenario.tuning.spectral(), &cfg.spot)?;
    let events = group(&detect(&spot, &cfg.detect), cfg.group_gap);
    let report = run_test(&spot, &events, &cfg.test)?;
    let naive = if cfg.test.variant == TestVariant::Naive { report.clone() } else { naive_test(&spot, &events, &cfg.test)? };

    let jump_bins: Vec<usize> = sim.price_jumps.iter().map(|p| grid.bin_of_return(p.index)).collect();
    let true_detections = jump_bins.iter().filter(|b| events.iter().any(|e| e.bins().contains(b))).count();
    let false_detections = events.iter().filter(|e| !jump_bins.iter().any(|b| e.bins().contains(b))).count();

    Ok(RunRecord {
        run,
        seed,
        realized_jumps: sim.price_jumps.len(),
        realized_cojumps: sim.vol_jumps.iter().filter(|v| v.kind == VolJumpKind::CoJump).count(),
        detected_jumps: events.len(),
        tested_jumps: report.n_jumps,
        dof: report.dof,
        statistic: report.statistic,
        p_value: report.p_value,
        reject_05: report.n_jumps > 0 && report.p_value < 0.05,
        reject_10: report.n_jumps > 0 && report.p_value < 0.10,
        naive_statistic: naive.statistic,
        naive_p_value: naive.p_value,
        true_detections,
        false_detections,
    })
}

fn rate(selected: &[&RunRecord], f: impl Fn(&RunRecord) -> bool) -> f64 {
    if selected.is_empty() {
        return f64::NAN;
    }
    selected.iter().filter(|r| f(r)).count() as f64 / selected.len() as f64
}

pub fn aggregate(records: &[RunRecord], filter: RecordFilter, variant: TestVariant) -> Result<Aggregate> {
    let selected: Vec<&RunRecord> = records.iter().filter(|r| filter.keeps(r) && r.tested_jumps > 0).collect();
    let ks_statistic = match variant {
        TestVariant::Naive => ks_distance(&selected.iter().map(|r| r.statistic).collect::<Vec<_>>(), normal_cdf),
        // Probability integral transform handles mixed degrees of freedom.
        _ => {
            let u: Vec<f64> = selected.iter().map(|r| chi2_cdf(r.statistic, r.dof)).collect::<Result<_>>()?;
            ks_distance(&u, |x| x.clamp(0.0, 1.0))
        }
    };
    let ks_naive = ks_distance(&selected.iter().map(|r| r.naive_statistic).collect::<Vec<_>>(), normal_cdf);
    let stats: Vec<f64> = selected.iter().map(|r| r.statistic).collect();
    let quantiles = if !selected.is_empty() && variant != TestVariant::Naive && selected.iter().all(|r| r.dof == 1) {
        [0.90, 0.95, 0.99]
            .iter()
            .map(|&prob| {
                Ok(QuantileRow { prob, empirical: empirical_quantile(&stats, prob), reference: chi2_upper_quantile(1.0 - prob, 1)? })
            })
            .collect::<Result<_>>()?
    } else {
        Vec::new()
    };
    let realized: usize = records.iter().map(|r| r.realized_jumps).sum();
    let found: usize = records.iter().map(|r| r.true_detections).sum();
    let false_total: usize = records.iter().map(|r| r.false_detections).sum();
    Ok(Aggregate {
        filter,
        n_selected: selected.len(),
        rejection_rate_05: rate(&selected, |r| r.reject_05),
        rejection_rate_10: rate(&selected, |r| r.reject_10),
        ks_statistic,
        ks_naive,
        quantiles,
        detection_rate: if realized > 0 { found as f64 / realized as f64 } else { f64::NAN },
        false_detections_per_path: if records.is_empty() { f64::NAN } else { false_total as f64 / records.len() as f64 },
    })
}

pub fn run_scenario(cfg: &McConfig) -> Result<McReport> {
    if cfg.runs == 0 {
        return Err(Error::InvalidConfig("need at least one run".into()));
    }
    cfg.test.validate()?;
    let start = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    let records: Vec<RunRecord> = pool.install(|| (0..cfg.runs).into_par_iter().map(|r| run_one(cfg, r)).collect::<Result<_>>())?;
    let aggregate = aggregate(&records, cfg.filter, cfg.test.variant)?;
    Ok(McReport {
        schema_version: SCHEMA_VERSION,
        scenario: cfg.scenario.id,
        config: cfg.clone(),
        n_runs: records.len(),
        records,
        aggregate,
        runtime: start.elapsed().as_secs_f64(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizePowerRow {
    pub scenario: Option<ScenarioId>,
    pub level: f64,
    pub rejection_rate: f64,
    pub n_selected: usize,
}

/// Empirical rejection frequency `#{p < level} / #selected` on a grid of nominal levels.
pub fn size_power_table(reports: &[McReport], levels: &[f64]) -> Vec<SizePowerRow> {
    let mut rows = Vec::with_capacity(reports.len() * levels.len());
    for rep in reports {
        let p: Vec<f64> = rep.selected().filter(|r| r.tested_jumps > 0).map(|r| r.p_value).collect();
        for &level in levels {
            let hits = p.iter().filter(|&&v| v < level).count();
            rows.push(SizePowerRow {
                scenario: rep.scenario,
                level,
                rejection_rate: if p.is_empty() { f64::NAN } else { hits as f64 / p.len() as f64 },
                n_selected: p.len(),
            });
        }
    }
    rows
}

/// Default level grid for size/power plots: 0.01, 0.02, ..., 0.20.
pub fn default_levels() -> Vec<f64> {
    (1..=20).map(|i| i as f64 / 100.0).collect()
}

/// `(bin center, count)` over `bins` equal-width bins spanning the sample.
pub fn histogram(sample: &[f64], bins: usize) -> Vec<(f64, f64)> {
    let xs: Vec<f64> = sample.iter().copied().filter(|x| x.is_finite()).collect();
    if xs.is_empty() || bins == 0 {
        return Vec::new();
    }
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = if hi > lo { (hi - lo) / bins as f64 } else { 1.0 };
    let mut counts = vec![0usize; bins];
    for x in xs {
        let k = (((x - lo) / width) as usize).min(bins - 1);
        counts[k] += 1;
    }
    counts.iter().enumerate().map(|(k, &c)| (lo + (k as f64 + 0.5) * width, c as f64)).collect()
}

/// Silverman's rule of thumb `0.9 min(sd, IQR/1.34) n^{-1/5}`.
pub fn silverman_bandwidth(sample: &[f64]) -> f64 {
    let n = sample.len() as f64;
    let mean = sample.iter().sum::<f64>() / n;
    let sd = (sample.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let iqr = empirical_quantile(sample, 0.75) - empirical_quantile(sample, 0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    0.9 * spread * n.powf(-0.2)
}

/// Gaussian kernel density at `points` points spanning the sample.
pub fn kde(sample: &[f64], points: usize) -> Vec<(f64, f64)> {
    let xs: Vec<f64> = sample.iter().copied().filter(|x| x.is_finite()).collect();
    if xs.len() < 2 || points < 2 {
        return Vec::new();
    }
    let bw = silverman_bandwidth(&xs);
    if !(bw > 0.0) {
        return Vec::new();
    }
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min) - 3.0 * bw;
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 3.0 * bw;
    let norm = 1.0 / (xs.len() as f64 * bw * (2.0 * std::f64::consts::PI).sqrt());
    (0..points)
        .map(|i| {
            let x = lo + (hi - lo) * i as f64 / (points - 1) as f64;
            let d: f64 = xs.iter().map(|&v| (-0.5 * ((x - v) / bw).powi(2)).exp()).sum();
            (x, d * norm)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::table1_scenario;

    fn record(p: f64) -> RunRecord {
        RunRecord {
            run: 0,
            seed: 0,
            realized_jumps: 1,
            realized_cojumps: 0,
            detected_jumps: 1,
            tested_jumps: 1,
            dof: 1,
            statistic: crate::distributions::chi2_upper_quantile(p, 1).unwrap_or(0.0),
            p_value: p,
            reject_05: p < 0.05,
            reject_10: p < 0.10,
            naive_statistic: 0.0,
            naive_p_value: 1.0,
            true_detections: 1,
            false_detections: 0,
        }
    }

    fn report_from(records: Vec<RunRecord>) -> McReport {
        let cfg = McConfig::new(table1_scenario(ScenarioId::V), records.len(), 0);
        McReport {
            schema_version: SCHEMA_VERSION,
            scenario: Some(ScenarioId::V),
            aggregate: aggregate(&records, cfg.filter, cfg.test.variant).unwrap(),
            n_runs: records.len(),
            config: cfg,
            records,
            runtime: 0.0,
        }
    }

    #[test]
    fn all_p_one_never_rejects() {
        let rep = report_from((0..50).map(|_| record(1.0)).collect());
        let table = size_power_table(&[rep], &default_levels());
        assert!(table.iter().all(|r| r.rejection_rate == 0.0));
    }

    #[test]
    fn uniform_p_values_are_calibrated() {
        let n = 1000;
        let rep = report_from((0..n).map(|i| record((i as f64 + 0.5) / n as f64)).collect());
        for row in size_power_table(&[rep], &default_levels()) {
            assert!((row.rejection_rate - row.level).abs() <= 3.0 * (row.level / n as f64).sqrt());
        }
    }

    #[test]
    fn rates_monotone_in_level() {
        let rep = report_from((0..200).map(|i| record(((i * 37) % 200) as f64 / 200.0 + 0.001)).collect());
        let t = size_power_table(&[rep], &default_levels());
        assert!(t.windows(2).all(|w| w[0].rejection_rate <= w[1].rejection_rate));
    }

    #[test]
    fn filters() {
        let mut two = record(0.5);
        two.realized_jumps = 2;
        let mut missed = record(0.5);
        missed.detected_jumps = 0;
        assert!(RecordFilter::All.keeps(&two));
        assert!(!RecordFilter::RealizedOne.keeps(&two));
        assert!(RecordFilter::RealizedOne.keeps(&missed));
        assert!(!RecordFilter::RealizedAndDetectedOne.keeps(&missed));
    }

    #[test]
    fn single_run_reproducible() {
        let cfg = McConfig::new(table1_scenario(ScenarioId::V), 1, 77);
        let a = run_scenario(&cfg).unwrap();
        let b = run_scenario(&cfg).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        assert_eq!(a.records.len(), 1);
        assert_eq!(run_one(&cfg, 0).unwrap(), a.records[0]);
    }

    #[test]
    fn histogram_and_kde() {
        let xs: Vec<f64> = (0..100).map(|i| i as f64 / 10.0).collect();
        let h = histogram(&xs, 10);
        assert_eq!(h.len(), 10);
        assert_eq!(h.iter().map(|p| p.1).sum::<f64>(), 100.0);
        let d = kde(&xs, 200);
        let step = d[1].0 - d[0].0;
        let mass: f64 = d.iter().map(|p| p.1 * step).sum();
        assert!((mass - 1.0).abs() < 0.02);
    }

    #[test]
    fn silverman_reference() {
        // sd = 1.5811, IQR/1.34 = 1.4925 for 1..5; 0.9 * 1.4925 * 5^-0.2.
        let bw = silverman_bandwidth(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        assert!((bw - 0.9 * (2.0 / 1.34) * 5f64.powf(-0.2)).abs() < 1e-12);
    }
}
