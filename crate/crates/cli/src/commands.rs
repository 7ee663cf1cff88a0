use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::Context;
use cojump::cojump_test::{run_test, CoJumpReport};
use cojump::io::{read_ticks, spot_rows, ticks_from_path, write_csv_rows, write_json, write_ticks, write_xy, Truth, SCHEMA_VERSION};
use cojump::jumps::{detect, group};
use cojump::montecarlo::{default_levels, histogram, kde, run_scenario, size_power_table, McConfig, McReport};
use cojump::simulator::{simulate, table1_scenario, ScenarioId};
use cojump::spectral::BinGrid;
use cojump::spotvol::spot_path;
use cojump::{Error, JumpEvent, NoisyPath, SpotVolPath};
use serde::Serialize;

use crate::config::Resolved;

fn out_dir(out: &Path) -> anyhow::Result<()> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))
}

/// Reads ticks and runs both estimation stages.
pub fn estimate_path(input: &Path, cfg: &Resolved) -> anyhow::Result<SpotVolPath> {
    let y = NoisyPath::from_ticks(&read_ticks(input)?)?;
    let grid = BinGrid::new(y.n(), cfg.h_inv)?;
    let need = 2 * cfg.spectral.j_max;
    if grid.min_bin_len() < need {
        return Err(Error::TooFewObservations { need: need * cfg.h_inv, got: y.n() }.into());
    }
    Ok(spot_path(&y, &grid, &cfg.spectral, &cfg.spot)?)
}

#[derive(Serialize)]
struct EstimateSummary<'a> {
    schema_version: u32,
    input: &'a Path,
    config: &'a Resolved,
    n: usize,
    obs_per_bin: f64,
    eta_hat: f64,
    /// `Σ h ζ_k` over the bins that were not truncated.
    iv_hat: f64,
    truncated_bins: usize,
}

pub fn estimate(input: &Path, cfg: &Resolved, out: &Path) -> anyhow::Result<()> {
    let spot = estimate_path(input, cfg)?;
    out_dir(out)?;
    write_csv_rows(&out.join("spot.csv"), &spot_rows(&spot)?)?;
    let summary = EstimateSummary {
        schema_version: SCHEMA_VERSION,
        input,
        config: cfg,
        n: spot.grid.n(),
        obs_per_bin: spot.grid.obs_per_bin(),
        eta_hat: spot.eta_hat,
        iv_hat: spot.integrated_variance(),
        truncated_bins: spot.bins.iter().filter(|b| b.truncated).count(),
    };
    write_json(&out.join("summary.json"), &summary)?;
    println!("n = {}, eta_hat = {:.4e}, IV = {:.4e}", summary.n, summary.eta_hat, summary.iv_hat);
    Ok(())
}

#[derive(Serialize)]
struct TestOutput<'a> {
    schema_version: u32,
    input: &'a Path,
    config: &'a Resolved,
    n: usize,
    eta_hat: f64,
    events: &'a [JumpEvent],
    report: &'a CoJumpReport,
}

fn summary_text(report: &CoJumpReport, events: &[JumpEvent]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "variant        {:?} ({:?} normalization)", report.variant, report.normalization_kind);
    let _ = writeln!(s, "jumps          {} detected, {} tested, {} skipped", events.len(), report.n_jumps, report.n_skipped);
    if let Some(note) = &report.note {
        let _ = writeln!(s, "note           {note}");
    }
    let _ = writeln!(s, "statistic      {:.4} (dof {})", report.statistic, report.dof);
    let _ = writeln!(s, "critical value {:.4} at level {}", report.critical_value, report.level);
    let _ = writeln!(s, "p-value        {:.4}", report.p_value);
    let _ = writeln!(s, "decision       {}", if report.reject { "reject: co-jump" } else { "no co-jump" });
    if !report.per_jump.is_empty() {
        let _ = writeln!(s, "\n  time      c_left    c_right   statistic  p-value");
        for j in &report.per_jump {
            let _ = writeln!(
                s,
                "  {:<8.4}  {:<8.4}  {:<8.4}  {:<9.4}  {:.4}",
                j.event.time, j.c_left, j.c_right, j.statistic, j.p_value
            );
        }
    }
    s
}

pub fn test(input: &Path, cfg: &Resolved, out: &Path) -> anyhow::Result<()> {
    let spot = estimate_path(input, cfg)?;
    let events = group(&detect(&spot, &cfg.detect), cfg.group_gap);
    let report = run_test(&spot, &events, &cfg.test)?;
    out_dir(out)?;
    let output = TestOutput {
        schema_version: SCHEMA_VERSION,
        input,
        config: cfg,
        n: spot.grid.n(),
        eta_hat: spot.eta_hat,
        events: &events,
        report: &report,
    };
    write_json(&out.join("report.json"), &output)?;
    let text = summary_text(&report, &events);
    fs::write(out.join("summary.txt"), &text)?;
    print!("{text}");
    Ok(())
}

pub fn simulate_day(id: ScenarioId, seed: u64, n: Option<usize>, out: &Path) -> anyhow::Result<()> {
    let mut cfg = table1_scenario(id).with_seed(seed);
    if let Some(n) = n {
        cfg.n = n;
    }
    let sim = simulate(&cfg)?;
    out_dir(out)?;
    write_ticks(&out.join("ticks.csv"), &ticks_from_path(&sim)?)?;
    write_json(&out.join("truth.json"), &Truth::new(&cfg, &sim))?;
    println!("scenario {id}, seed {seed}: {} returns, {} price jumps", sim.n(), sim.price_jumps.len());
    Ok(())
}

pub fn monte_carlo(cfg: &McConfig, out: &Path) -> anyhow::Result<()> {
    let report: McReport = run_scenario(cfg)?;
    out_dir(out)?;
    write_json(&out.join("mc_report.json"), &report)?;
    write_csv_rows(&out.join("records.csv"), &report.records)?;
    write_csv_rows(&out.join("size_power.csv"), &size_power_table(std::slice::from_ref(&report), &default_levels()))?;
    let stats: Vec<f64> = report.selected().filter(|r| r.tested_jumps > 0).map(|r| r.statistic).collect();
    write_xy(&out.join("histogram.csv"), ("bin_center", "count"), &histogram(&stats, 40))?;
    write_xy(&out.join("density.csv"), ("x", "density"), &kde(&stats, 200))?;

    let a = &report.aggregate;
    println!(
        "{} runs, {} selected: rejection {:.3} at 5%, {:.3} at 10%, KS {:.4}; detection rate {:.3}",
        report.n_runs, a.n_selected, a.rejection_rate_05, a.rejection_rate_10, a.ks_statistic, a.detection_rate
    );
    log::info!("monte carlo took {:.1}s", report.runtime);
    Ok(())
}
