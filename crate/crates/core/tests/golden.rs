//! Fixed-seed regression values. Any change to the sampling path, the update
//! rule or the seed derivation shows up here first.

use cga_lab::baseline::one_plus_one_ea;
use cga_lab::harness::{aggregate, auto_mu, run_experiment, Algorithm, ExperimentConfig, ProblemSpec};
use cga_lab::report::{plot_svg_string, records_to_string, scaling_plot, sha256_hex, summary_csv_string};
use cga_lab::restart::run_parallel_cga;
use cga_lab::{run_cga, FitnessFunction, TelemetryOptions};

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len().is_multiple_of(2) {
        (v[m - 1] + v[m]) / 2.0
    } else {
        v[m]
    }
}

#[test]
fn cga_jump3_n64() {
    let mu = auto_mu(64, 8.0).unwrap();
    assert_eq!(mu, 320);
    let fit = FitnessFunction::jump(64, 3).unwrap();
    let traces: Vec<_> =
        (0..100).map(|s| run_cga(fit, mu, Some(1_000_000), TelemetryOptions::default(), s).unwrap()).collect();
    assert!(traces.iter().all(|t| t.succeeded()));
    assert_eq!(median(traces.iter().map(|t| t.iterations as f64).collect()), 2301.0);
}

#[test]
fn tiny_onemax_always_solved() {
    let fit = FitnessFunction::onemax(4).unwrap();
    for s in 0..100 {
        assert!(run_cga(fit, 4, Some(100_000), TelemetryOptions::default(), s).unwrap().succeeded());
    }
}

#[test]
fn ea_onemax_n64_in_coupon_collector_window() {
    let fit = FitnessFunction::onemax(64).unwrap();
    let evals: Vec<f64> = (0..200).map(|s| one_plus_one_ea(fit, 10_000_000, s).unwrap().evaluations as f64).collect();
    let m = median(evals);
    let scale = std::f64::consts::E * 64.0 * 64f64.ln();
    assert!((0.5 * scale..=2.0 * scale).contains(&m), "median {m} vs e n ln n = {scale}");
}

#[test]
fn ea_jump3_n20_needs_many_evaluations() {
    let fit = FitnessFunction::jump(20, 3).unwrap();
    let runs: Vec<_> = (0..200).map(|s| one_plus_one_ea(fit, 10_000_000, s).unwrap()).collect();
    assert!(runs.iter().all(|t| t.succeeded()));
    let m = median(runs.iter().map(|t| t.evaluations as f64).collect());
    assert!(m >= 2000.0, "{m}");
}

#[test]
fn parallel_jump3_n64_seed3() {
    let out = run_parallel_cga(FitnessFunction::jump(64, 3).unwrap(), 4, 40, 3).unwrap();
    assert_eq!(
        (out.total_budget, out.rounds, out.winning_process, out.winning_mu, out.winning_effective_mu),
        (3259, 9, 5, 16, 64)
    );
}

#[test]
fn pilot_sweep_artifacts() {
    let cfg = ExperimentConfig::new(vec![ProblemSpec::onemax(), ProblemSpec::jump(3)], vec![16, 32, 64], 10, 0);
    let recs = run_experiment(&cfg).unwrap();
    let stats = aggregate(&recs);
    let plot = scaling_plot(&stats);
    assert!(plot.series.iter().all(|s| s.points.len() == 3));
    assert_eq!(
        sha256_hex(plot_svg_string(&plot).as_bytes()),
        "e2e44a3e8caa3618abf99c034f2cb131f5cdff521759036e2a0f398dea3f2c35"
    );
    assert_eq!(
        sha256_hex(summary_csv_string(&stats).unwrap().as_bytes()),
        "a9e61b0b5d66fc2473e0b5aed000850b8a573b05c596b73a6f3d9113a288faa9"
    );
    assert_eq!(
        sha256_hex(records_to_string(&recs).unwrap().as_bytes()),
        "7767d2fc6f7873ec7b54f25289dc3961893e064a367a0b92cec9f005aa282e3b"
    );
}

#[test]
fn logarithmic_jump_size_is_reported() {
    // k = floor(ln(128) / 3) = 1
    let cfg = ExperimentConfig::from_toml_str(
        "n_grid = [128]\nseeds = { count = 10 }\n[[problems]]\nkind = \"onemax\"\n\
         [[problems]]\nkind = \"jump\"\nk_log_factor = 0.3333333333333333\n",
    )
    .unwrap();
    let recs = run_experiment(&cfg).unwrap();
    assert!(recs.iter().all(|r| r.algorithm == Algorithm::Cga && r.error.is_none()));
    let ratios = cga_lab::harness::compare_jump_vs_onemax(&recs, 100, 0).unwrap();
    assert_eq!(ratios.len(), 1);
    assert_eq!(ratios[0].k, 1);
    assert!(ratios[0].ratio.is_finite());
}
