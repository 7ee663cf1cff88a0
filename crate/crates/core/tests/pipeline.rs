use cojump::io::{read_ticks, ticks_from_path, write_ticks};
use cojump::jumps::restrict_to;
use cojump::montecarlo::{default_levels, run_one, size_power_table};
use cojump::prelude::*;
use cojump::simulator::Model;

fn pipeline(sim: &SimulatedPath, scenario: &ScenarioConfig) -> (SpotVolPath, Vec<JumpEvent>, CoJumpReport) {
    let t = scenario.tuning;
    let grid = BinGrid::new(sim.n(), t.h_inv).unwrap();
    let spot = spot_path(&sim.y, &grid, &t.spectral(), &t.spot()).unwrap();
    let jumps = group(&detect(&spot, &DetectConfig::new(t.r_inv)), 2 * t.r_inv);
    let report = run_test(&spot, &jumps, &TestConfig::default()).unwrap();
    (spot, jumps, report)
}

#[test]
fn csv_round_trip_reproduces_estimates() {
    let scenario = table1_scenario(ScenarioId::II).with_seed(11);
    let sim = simulate(&scenario).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ticks.csv");
    write_ticks(&path, &ticks_from_path(&sim).unwrap()).unwrap();
    let y = NoisyPath::from_ticks(&read_ticks(&path).unwrap()).unwrap();

    let t = scenario.tuning;
    let grid = BinGrid::new(y.n(), t.h_inv).unwrap();
    let from_file = spot_path(&y, &grid, &t.spectral(), &t.spot()).unwrap();
    let (in_process, _, _) = pipeline(&sim, &scenario);
    assert_eq!(from_file.bins.len(), t.h_inv);
    for (a, b) in from_file.bins.iter().zip(&in_process.bins) {
        assert!((a.zeta - b.zeta).abs() <= 1e-9 * b.zeta.abs().max(1.0));
        assert_eq!(a.truncated, b.truncated);
    }
}

#[test]
fn quiet_day_reports_no_jumps() {
    let mut scenario = table1_scenario(ScenarioId::II).with_seed(3);
    scenario.lambda = 0.0;
    scenario.vol_jump_intensity = 0.0;
    let sim = simulate(&scenario).unwrap();
    let (spot, jumps, report) = pipeline(&sim, &scenario);
    assert!(jumps.is_empty());
    assert_eq!(report.n_jumps, 0);
    assert_eq!(report.p_value, 1.0);
    assert!(!report.reject);
    let iv = spot.integrated_variance();
    let truth = sim.c_path.iter().sum::<f64>() / sim.c_path.len() as f64;
    assert!((iv / truth - 1.0).abs() < 0.2, "{iv} vs {truth}");
}

#[test]
fn large_cojumps_are_rejected() {
    // Price and volatility both jump by 1.5: easy to detect, and the variance steps up well beyond the noise.
    let mut rejected = 0;
    let mut tested = 0;
    for seed in 0..20 {
        let mut scenario = table1_scenario(ScenarioId::VIII).with_seed(seed);
        scenario.jump_mean = 1.5;
        scenario.lambda = 1.0;
        scenario.vol_jump_intensity = 0.0;
        let sim = simulate(&scenario).unwrap();
        let (_, _, report) = pipeline(&sim, &scenario);
        if report.n_jumps > 0 {
            tested += 1;
            rejected += usize::from(report.reject);
        }
    }
    assert!(tested >= 10, "{tested}");
    assert!(rejected * 4 >= tested * 3, "{rejected} of {tested}");
}

#[test]
fn constant_volatility_model_detects_big_jumps() {
    let mut scenario = table1_scenario(ScenarioId::II).with_seed(8);
    scenario.model = Model::ConstVol;
    scenario.jump_mean = 1.0;
    scenario.lambda = 3.0;
    let sim = simulate(&scenario).unwrap();
    let (spot, jumps, report) = pipeline(&sim, &scenario);
    let grid = &spot.grid;
    for pj in &sim.price_jumps {
        let k = grid.bin_of_return(pj.index);
        assert!(jumps.iter().any(|e| e.bins().contains(&k)), "jump in bin {k} missed");
    }
    assert_eq!(report.n_jumps + report.n_skipped, jumps.len());
}

#[test]
fn sub_interval_restricts_events() {
    let scenario = table1_scenario(ScenarioId::II).with_seed(21);
    let sim = simulate(&scenario).unwrap();
    let (spot, jumps, _) = pipeline(&sim, &scenario);
    let morning = restrict_to(jumps.clone(), 0.0, 0.5);
    assert!(morning.iter().all(|e| e.time <= 0.5));
    assert!(morning.len() <= jumps.len());
    let report = run_test(&spot, &morning, &TestConfig::default()).unwrap();
    assert!(report.n_jumps <= morning.len());
}

#[test]
fn partial_reruns_match_full_runs() {
    let mut cfg = McConfig::new(table1_scenario(ScenarioId::V), 12, 77);
    cfg.threads = 2;
    let report = run_scenario(&cfg).unwrap();
    assert_eq!(report.records.len(), 12);
    for r in [0, 5, 11] {
        assert_eq!(run_one(&cfg, r).unwrap(), report.records[r]);
    }
}

#[test]
fn size_power_rows_are_monotone() {
    let cfg = McConfig::new(table1_scenario(ScenarioId::II), 60, 5);
    let report = run_scenario(&cfg).unwrap();
    let rows = size_power_table(&[report], &default_levels());
    assert_eq!(rows.len(), default_levels().len());
    for w in rows.windows(2) {
        assert!(w[0].level < w[1].level);
        assert!(w[0].rejection_rate <= w[1].rejection_rate);
    }
    assert!(rows.iter().all(|r| (0.0..=1.0).contains(&r.rejection_rate)));
}
