//! Default configuration sweeps for every check, and a runner over them.

use crate::error::Result;
use crate::fitness::{make_well_behaved, FitnessFunction, FrequencyGrid, FrequencyVector};
use crate::lab::{
    estimate_anti_concentration, profile_vector, simulate_reflected_walk, verify_boundary_distribution, verify_drift,
    verify_frequency_drift, verify_gap_correction, verify_onemax_phase, verify_optimum_probability,
    verify_sampling_tails, BoundarySide, LemmaId, LemmaReport, WalkParameters,
};
use crate::rng::derive_seed;

/// A named frequency profile `i -> f_i` for a given `n`.
type ProfileFn = fn(usize, usize) -> f64;
type Profile = (&'static str, ProfileFn);

fn ramp(i: usize, n: usize) -> f64 {
    0.35 + 0.64 * i as f64 / (n - 1) as f64
}

const TAIL_PROFILES: [Profile; 5] = [
    ("const-0.9", |_, _| 0.9),
    ("const-0.6", |_, _| 0.6),
    ("top", |_, _| 1.0),
    ("ramp", ramp),
    ("two-level", |i, _| if i % 2 == 0 { 0.5 } else { 0.95 }),
];

const THIRD_PROFILES: [Profile; 5] = [
    ("const-0.7", |_, _| 0.7),
    ("top", |_, _| 1.0),
    ("near-third", |_, _| 0.34),
    ("ramp", ramp),
    ("third-and-top", |i, _| if i % 2 == 0 { 0.34 } else { 1.0 }),
];

/// `mu = 10 n` is well-behaved for every `n >= 3` and gives a fine grid.
fn fine_vector(n: usize, profile: fn(usize, usize) -> f64) -> Result<FrequencyVector> {
    profile_vector(n, 10 * n as u64, |i| profile(i, n))
}

/// 75 `(f, delta)` pairs: three dimensions, five profiles, five deltas.
pub fn sampling_tail_sweep() -> Result<Vec<(String, FrequencyVector, f64)>> {
    let mut out = Vec::new();
    for n in [20, 100, 300] {
        for (name, p) in TAIL_PROFILES {
            let f = fine_vector(n, p)?;
            for delta in [0.0, 0.25, 0.5, 0.75, 1.0] {
                out.push((format!("{name}/n={n}"), f.clone(), delta));
            }
        }
    }
    Ok(out)
}

/// Profiles with every `f_i >= 1/3`, up to `n = 512`.
pub fn anti_concentration_sweep_profiles() -> Result<Vec<(String, FrequencyVector)>> {
    let mut out = Vec::new();
    for n in [16, 64, 100, 256, 512] {
        for (name, p) in THIRD_PROFILES {
            out.push((format!("{name}/n={n}"), fine_vector(n, p)?));
        }
    }
    // D = 25 exactly: threshold 1
    out.push(("const-0.75/n=100".into(), fine_vector(100, |_, _| 0.75)?));
    Ok(out)
}

/// Ten single-iteration configurations with positions at a boundary.
pub fn boundary_sweep() -> Result<Vec<(String, FrequencyVector, BoundarySide, FitnessFunction)>> {
    let mut out = Vec::new();
    let cases: [(usize, usize, BoundarySide, usize); 10] = [
        (10, 3, BoundarySide::Lower, 0),
        (10, 3, BoundarySide::Upper, 0),
        (10, 5, BoundarySide::Upper, 3),
        (20, 6, BoundarySide::Lower, 0),
        (20, 10, BoundarySide::Upper, 4),
        (50, 10, BoundarySide::Lower, 0),
        (50, 25, BoundarySide::Upper, 5),
        (100, 30, BoundarySide::Lower, 3),
        (100, 50, BoundarySide::Upper, 0),
        (100, 80, BoundarySide::Upper, 10),
    ];
    for (n, ell, side, k) in cases {
        let grid = FrequencyGrid::new(n, n as u64)?;
        let edge = match side {
            BoundarySide::Lower => 0,
            BoundarySide::Upper => grid.n_mu(),
        };
        let half = grid.half_index();
        let idx = (0..n).map(|i| if i < ell { edge } else { half }).collect();
        let f = FrequencyVector::from_indices(grid, idx)?;
        let fit = if k == 0 { FitnessFunction::onemax(n)? } else { FitnessFunction::jump(n, k)? };
        out.push((format!("n={n} ell={ell} {side:?} {}", fit.label()), f, side, fit));
    }
    Ok(out)
}

/// 24 walk parameter sets on the grid of `n = 50`.
pub fn walk_grid() -> Vec<WalkParameters> {
    let mut out = Vec::new();
    for mu in [50, 100, 200] {
        for horizon in [1_000, 10_000] {
            for epsilon in [0.1, 0.2, 0.3, 0.4] {
                out.push(WalkParameters { n: 50, mu, horizon, epsilon });
            }
        }
    }
    out
}

/// Points with `D >= 30`, `k <= 3` and every `f_i >= 1/3`.
pub fn drift_sweep() -> Result<Vec<(String, FrequencyVector, usize)>> {
    let profiles: [(&str, usize, ProfileFn); 5] = [
        ("const-0.7", 100, |_, _| 0.7),
        ("const-0.8", 200, |_, _| 0.8),
        ("const-0.5", 256, |_, _| 0.5),
        ("ramp", 512, ramp),
        ("two-level", 100, |i, _| if i % 2 == 0 { 0.4 } else { 1.0 }),
    ];
    let mut out = Vec::new();
    for (name, n, p) in profiles {
        let f = fine_vector(n, p)?;
        for k in 1..=3 {
            out.push((format!("{name}/n={n}"), f.clone(), k));
        }
    }
    Ok(out)
}

/// `(f, i)` pairs; the small ones are enumerated exactly.
pub fn frequency_drift_sweep() -> Result<Vec<(String, FrequencyVector, usize)>> {
    let uniform4 = FrequencyVector::constant(FrequencyGrid::new(4, 8)?, 2)?;
    let mixed5 = FrequencyVector::from_indices(FrequencyGrid::new(5, 10)?, vec![1, 3, 4, 5, 2])?;
    let mixed6 = profile_vector(6, 12, |i| [0.5, 0.4, 0.7, 0.6, 0.5, 0.8][i])?;
    let wide = profile_vector(50, 500, |i| 0.3 + 0.6 * i as f64 / 49.0)?;
    Ok(vec![
        ("uniform/n=4".into(), uniform4, 0),
        ("mixed/n=5".into(), mixed5.clone(), 0),
        ("mixed/n=5".into(), mixed5, 2),
        ("mixed/n=6".into(), mixed6.clone(), 1),
        ("mixed/n=6".into(), mixed6, 3),
        ("ramp/n=50".into(), wide.clone(), 10),
        ("ramp/n=50".into(), wide, 40),
    ])
}

/// `(f, i, k)` triples with `D >= 2k + 1` and every `f_j >= 1/3`.
pub fn gap_correction_sweep() -> Result<Vec<(String, FrequencyVector, usize, usize)>> {
    let f07 = profile_vector(100, make_well_behaved(100, 1000)?, |_| 0.7)?;
    let f06 = profile_vector(200, 2000, |_| 0.6)?;
    Ok(vec![
        ("const-0.7/n=100".into(), f07.clone(), 0, 1),
        ("const-0.7/n=100".into(), f07, 0, 3),
        ("const-0.6/n=200".into(), f06, 7, 3),
    ])
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SuiteOptions {
    /// Monte Carlo trials per configuration.
    pub trials: u64,
    pub seed: u64,
    /// Runs for the OneMax phase check.
    pub phase_runs: u64,
    /// `K` for the OneMax phase check.
    pub phase_k: f64,
    /// Trials per walk configuration (walks cost up to `T` steps each).
    pub walk_trials: u64,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self { trials: 20_000, seed: 0, phase_runs: 200, phase_k: 20.0, walk_trials: 5_000 }
    }
}

fn tagged(mut r: LemmaReport, name: &str) -> LemmaReport {
    r.notes.insert(0, format!("profile {name}"));
    r
}

/// Runs the default sweep of each selected check, in the order given.
pub fn run_suite(lemmas: &[LemmaId], opt: &SuiteOptions) -> Result<Vec<LemmaReport>> {
    let mut out = Vec::new();
    for &lemma in lemmas {
        let seed = |i: usize| derive_seed(&[opt.seed, lemma.number() as u64, i as u64]);
        match lemma {
            LemmaId::SamplingTails => {
                for (i, (name, f, delta)) in sampling_tail_sweep()?.into_iter().enumerate() {
                    for r in verify_sampling_tails(&f, delta, opt.trials, seed(i))? {
                        out.push(tagged(r, &name));
                    }
                }
            }
            LemmaId::BoundaryDistribution => {
                for (i, (name, f, side, fit)) in boundary_sweep()?.into_iter().enumerate() {
                    out.push(tagged(verify_boundary_distribution(&f, side, fit, opt.trials, seed(i))?, &name));
                }
            }
            LemmaId::ReflectedWalk => {
                for (i, p) in walk_grid().into_iter().enumerate() {
                    out.push(simulate_reflected_walk(p, opt.walk_trials, seed(i))?);
                }
            }
            LemmaId::AntiConcentration => {
                for (i, (name, f)) in anti_concentration_sweep_profiles()?.into_iter().enumerate() {
                    out.push(tagged(estimate_anti_concentration(&f, opt.trials, seed(i))?, &name));
                }
            }
            LemmaId::OnemaxPhase => {
                let n = 64;
                let mu = make_well_behaved(n, 368)?;
                out.push(verify_onemax_phase(n, mu, opt.phase_k, opt.phase_runs, seed(0))?);
            }
            LemmaId::DistanceDrift => {
                for (i, (name, f, k)) in drift_sweep()?.into_iter().enumerate() {
                    out.push(tagged(verify_drift(&f, k, opt.trials, seed(i), None)?, &name));
                }
            }
            LemmaId::OptimumProbability => {
                for (i, c) in [0.1, 1.0 / 3.0, 0.5, 0.9].into_iter().enumerate() {
                    out.push(verify_optimum_probability(50, c, opt.trials, seed(i))?);
                }
            }
            LemmaId::FrequencyDrift => {
                for (i, (name, f, pos)) in frequency_drift_sweep()?.into_iter().enumerate() {
                    out.push(tagged(verify_frequency_drift(&f, pos, opt.trials, seed(i))?, &name));
                }
            }
            LemmaId::GapCorrection => {
                for (i, (name, f, pos, k)) in gap_correction_sweep()?.into_iter().enumerate() {
                    out.push(tagged(verify_gap_correction(&f, pos, k, opt.trials, seed(i))?, &name));
                }
            }
        }
    }
    Ok(out)
}
