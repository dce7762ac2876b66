//! Length of the first OneMax phase: from the uniform model until
//! `D_t <= K`.

use crate::cga::{default_iteration_cap, CgaState};
use crate::error::Result;
use crate::fitness::{is_well_behaved, FitnessFunction};
use crate::lab::{require, stats, Claim, LemmaId, LemmaReport, Verdict};
use crate::rng::derive_seed;

/// Phase length of one run and whether a frequency dropped below 1/3 first.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PhaseRun {
    pub iterations: u64,
    pub collapsed: bool,
    pub capped: bool,
}

/// Runs the cGA on OneMax from `f_0 = 1/2` until `D_t <= k_const`, some
/// frequency drops below 1/3, or `cap` iterations pass.
pub fn onemax_phase_run(n: usize, mu: u64, k_const: f64, cap: u64, seed: u64) -> Result<PhaseRun> {
    let fit = FitnessFunction::onemax(n)?;
    let mut state = CgaState::new(n, mu, seed)?;
    let target = k_const * mu as f64;
    let mut scaled = state.frequencies().scaled_distance();
    let grid = state.frequencies().grid().clone();
    while (scaled as f64) > target {
        if state.t() >= cap {
            return Ok(PhaseRun { iterations: state.t(), collapsed: false, capped: true });
        }
        let ev = state.step(&fit);
        scaled -= ev.post_clamp_index_change();
        let f = state.frequencies();
        if state.last_changed().iter().any(|&i| grid.is_below_one_third(f.index(i))) {
            return Ok(PhaseRun { iterations: state.t(), collapsed: true, capped: false });
        }
    }
    Ok(PhaseRun { iterations: state.t(), collapsed: false, capped: false })
}

/// Distribution of `T / (mu sqrt(n))` over `runs` runs, where `T` is the
/// first-phase length. The verdict requires no collapse and a tail that
/// shrinks: `Pr[T >= 2 median] < Pr[T >= median]`.
pub fn verify_onemax_phase(n: usize, mu: u64, k_const: f64, runs: u64, seed: u64) -> Result<LemmaReport> {
    require(is_well_behaved(n, mu), || format!("mu={mu} is not well-behaved for n={n}"))?;
    require(mu as f64 >= (n as f64).log2(), || format!("mu={mu} below log2 n"))?;
    require(k_const > 0.0, || "K must be positive".into())?;
    require(runs > 0, || "at least one run".into())?;
    let cap = default_iteration_cap(n, mu);
    let results = (0..runs)
        .map(|r| onemax_phase_run(n, mu, k_const, cap, derive_seed(&[seed, 5, r])))
        .collect::<Result<Vec<_>>>()?;

    let scale = mu as f64 * (n as f64).sqrt();
    let mut normalized: Vec<f64> = results.iter().map(|r| r.iterations as f64 / scale).collect();
    normalized.sort_by(f64::total_cmp);
    let collapses = results.iter().filter(|r| r.collapsed).count() as u64;
    let capped = results.iter().filter(|r| r.capped).count() as u64;
    let med = stats::quantile_sorted(&normalized, 0.5).unwrap();
    let tail = |x: f64| normalized.iter().filter(|&&v| v >= x).count() as f64 / runs as f64;
    let (t1, t2) = (tail(med), tail(2.0 * med));

    let mut acc = stats::MeanAccumulator::default();
    normalized.iter().for_each(|&v| acc.push(v));
    let mut r = LemmaReport::new(LemmaId::OnemaxPhase, "median T/(mu sqrt n)", Claim::Informational, runs, seed)
        .config("n", n as f64)
        .config("mu", mu as f64)
        .config("K", k_const);
    r.estimate = med;
    r.std_error = acc.std_error();
    r.interval =
        (stats::quantile_sorted(&normalized, 0.25).unwrap(), stats::quantile_sorted(&normalized, 0.75).unwrap());
    r.notes.push("interval is the interquartile range".into());
    r.extra.insert("mean".into(), acc.mean());
    r.extra.insert("max".into(), *normalized.last().unwrap());
    r.extra.insert("collapse_fraction".into(), collapses as f64 / runs as f64);
    r.extra.insert("capped".into(), capped as f64);
    r.extra.insert("tail_at_median".into(), t1);
    r.extra.insert("tail_at_twice_median".into(), t2);
    r.verdict = if collapses > 0 || capped > 0 {
        Verdict::Inconclusive
    } else if t2 < t1 {
        Verdict::ConsistentWithBound
    } else {
        Verdict::Violation
    };
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_phase_is_fast_and_stable() {
        let n = 64;
        let mu = crate::fitness::make_well_behaved(n, 300).unwrap();
        let r = verify_onemax_phase(n, mu, 20.0, 30, 1).unwrap();
        assert_eq!(r.extra["collapse_fraction"], 0.0);
        assert_eq!(r.verdict, Verdict::ConsistentWithBound);
        assert!(r.estimate > 0.0 && r.estimate < 10.0);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(verify_onemax_phase(64, 3, 20.0, 10, 0).is_err());
        assert!(verify_onemax_phase(64, 62, 20.0, 10, 0).is_err());
    }

    #[test]
    fn already_below_threshold() {
        // K above the initial distance n/2 ends the phase at t = 0
        let r = onemax_phase_run(10, 10, 6.0, 100, 0).unwrap();
        assert_eq!(r.iterations, 0);
    }
}
