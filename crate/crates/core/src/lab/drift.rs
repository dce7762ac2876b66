//! One-step drift of `D_t` and of single frequencies.

use crate::cga::CgaState;
use crate::error::Result;
use crate::fitness::{FitnessFunction, FrequencyVector};
use crate::lab::sampling::c_hat_for;
use crate::lab::{all_at_least_third, describe, require, run_blocks, stats, Claim, LemmaId, LemmaReport};
use crate::rng::derive_seed;

/// Largest `n` for which the single-frequency drift is enumerated exactly
/// (over all `4^n` sample pairs).
pub const ENUMERATION_LIMIT: usize = 6;

/// Mean of `per_step(events, state)` over `trials` single iterations from
/// `f` under `fit`.
fn one_step_mean<G>(
    f: &FrequencyVector,
    fit: FitnessFunction,
    trials: u64,
    seed: u64,
    tag: u64,
    per_step: G,
) -> stats::MeanAccumulator
where
    G: Fn(&crate::cga::StepEvents, &CgaState) -> f64 + Sync,
{
    let blocks = run_blocks(trials, seed, tag, |rng, count| {
        let mut state = CgaState::from_parts(f.clone(), rng.clone());
        let mut acc = stats::MeanAccumulator::default();
        for _ in 0..count {
            state.reset_frequencies(f).expect("same grid");
            let ev = state.step(&fit);
            acc.push(per_step(&ev, &state));
        }
        acc
    });
    let mut total = stats::MeanAccumulator::default();
    blocks.iter().for_each(|b| total.merge(b));
    total
}

/// `(1/5) C sqrt(D) - 6 D exp(-D/8) - 2`.
pub fn distance_drift_bound(c_hat: f64, d: f64) -> f64 {
    0.2 * c_hat * d.sqrt() - 6.0 * d * (-d / 8.0).exp() - 2.0
}

/// `E[mu (D_t - D_{t+1})]` on `Jump_{n,k}` from `f`, against the drift bound
/// instantiated with `c_hat` (estimated from `f` when `None`). Requires
/// `1 <= k <= n/2 - 1`, `D >= 2k` and every `f_i >= 1/3`.
pub fn verify_drift(f: &FrequencyVector, k: usize, trials: u64, seed: u64, c_hat: Option<f64>) -> Result<LemmaReport> {
    let n = f.n();
    require(k >= 1 && 2 * k + 2 <= n, || format!("k={k} outside [1, n/2 - 1] for n={n}"))?;
    require(f.scaled_distance() >= 2 * k as i64 * f.mu() as i64, || format!("D < 2k = {}", 2 * k))?;
    require(all_at_least_third(f), || "every frequency must be at least 1/3".into())?;
    require(trials > 0, || "at least one trial".into())?;
    let fit = FitnessFunction::jump(n, k)?;
    let c_hat = match c_hat {
        Some(c) => c,
        None => c_hat_for(f, trials.min(20_000), derive_seed(&[seed, 6]))?,
    };
    let acc = one_step_mean(f, fit, trials, seed, 6, |ev, _| ev.post_clamp_index_change() as f64);
    let d = f.distance_f64();
    let mut r = LemmaReport::new(LemmaId::DistanceDrift, "E[mu (D_t - D_t+1)]", Claim::AtLeast, trials, seed)
        .config("n", n as f64)
        .config("mu", f.mu() as f64)
        .config("k", k as f64)
        .config("D", d);
    r.profile = Some(describe(f));
    r.set_mean(&acc);
    r.bound = Some(distance_drift_bound(c_hat, d));
    r.extra.insert("c_hat".into(), c_hat);
    r.extra.insert("drift_ci_positive".into(), (r.interval.0 > 0.0) as u8 as f64);
    r.notes.push("bound instantiated with the measured anti-concentration constant".into());
    r.judge();
    Ok(r)
}

fn frequency_preconditions(f: &FrequencyVector, i: usize) -> Result<()> {
    require(i < f.n(), || format!("position {i} out of range"))?;
    let idx = f.index(i);
    require(idx >= 1 && idx < f.grid().n_mu(), || {
        format!("f_{i} must be strictly inside the boundaries, excluding the outermost grid steps")
    })
}

/// `(2/11) f_i (1 - f_i) / mu * (sum_{j != i} f_j (1 - f_j))^{-1/2}`.
pub fn frequency_drift_bound(f: &[f64], i: usize, mu: u64) -> f64 {
    let rest: f64 = f.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &p)| p * (1.0 - p)).sum();
    2.0 / 11.0 * f[i] * (1.0 - f[i]) / mu as f64 / rest.sqrt()
}

/// Exact `E[f_{i,t+1} - f_{i,t}]` on OneMax by enumerating every pair of
/// samples. Assumes `f_i` is at least one grid step away from both
/// boundaries, so no clamping happens at `i`.
pub fn frequency_drift_enumerated(f: &FrequencyVector, i: usize) -> Result<f64> {
    let n = f.n();
    require(n <= ENUMERATION_LIMIT, || format!("enumeration limited to n <= {ENUMERATION_LIMIT}"))?;
    frequency_preconditions(f, i)?;
    let p = f.to_f64_vec();
    let prob = |x: u32| -> f64 { (0..n).map(|j| if x >> j & 1 == 1 { p[j] } else { 1.0 - p[j] }).product() };
    let probs: Vec<f64> = (0..1u32 << n).map(prob).collect();
    let mut terms = Vec::new();
    for a in 0..1u32 << n {
        for b in 0..1u32 << n {
            let (ai, bi) = (a >> i & 1, b >> i & 1);
            if ai == bi {
                continue;
            }
            let winner = if a.count_ones() >= b.count_ones() { a } else { b };
            let dir = if winner >> i & 1 == 1 { 1.0 } else { -1.0 };
            terms.push(dir * probs[a as usize] * probs[b as usize]);
        }
    }
    Ok(crate::oracles::compensated_sum(terms) / f.mu() as f64)
}

/// `E[f_{i,t+1} - f_{i,t}]` on OneMax against the single-frequency drift
/// bound; exact by enumeration for `n <= 6`.
pub fn verify_frequency_drift(f: &FrequencyVector, i: usize, trials: u64, seed: u64) -> Result<LemmaReport> {
    frequency_preconditions(f, i)?;
    require(trials > 0, || "at least one trial".into())?;
    let n = f.n();
    let fit = FitnessFunction::onemax(n)?;
    let mu = f.mu() as f64;
    let before = f.index(i) as f64;
    let acc = one_step_mean(f, fit, trials, seed, 8, |_, s| (s.frequencies().index(i) as f64 - before) / mu);
    let mut r = LemmaReport::new(LemmaId::FrequencyDrift, "E[f_i,t+1 - f_i,t]", Claim::AtLeast, trials, seed)
        .config("n", n as f64)
        .config("mu", mu)
        .config("i", i as f64)
        .config("f_i", f.frequency_f64(i));
    r.profile = Some(describe(f));
    r.set_mean(&acc);
    if n <= ENUMERATION_LIMIT {
        r.exact = Some(frequency_drift_enumerated(f, i)?);
    }
    r.bound = Some(frequency_drift_bound(&f.to_f64_vec(), i, f.mu()));
    r.judge();
    Ok(r)
}

/// `(2/11) f (1 - f) D^{-1/2} - 2 f (1 - f) exp(-(D - 1)/8)`, and the
/// subtracted correction term on its own.
pub fn gap_correction_bound(fi: f64, d: f64) -> (f64, f64) {
    let v = fi * (1.0 - fi);
    let correction = 2.0 * v * (-(d - 1.0) / 8.0).exp();
    (2.0 / 11.0 * v / d.sqrt() - correction, correction)
}

/// `Pr[f_{i,t+1} > f_{i,t}] - Pr[f_{i,t+1} < f_{i,t}]` on `Jump_{n,k}`
/// against the gap-corrected bound. Requires `D >= 2k + 1`, every
/// `f_j >= 1/3` and `f_i` away from the boundaries.
pub fn verify_gap_correction(f: &FrequencyVector, i: usize, k: usize, trials: u64, seed: u64) -> Result<LemmaReport> {
    let n = f.n();
    frequency_preconditions(f, i)?;
    require(all_at_least_third(f), || "every frequency must be at least 1/3".into())?;
    require(f.scaled_distance() >= (2 * k as i64 + 1) * f.mu() as i64, || format!("D < 2k + 1 = {}", 2 * k + 1))?;
    require(trials > 0, || "at least one trial".into())?;
    let fit = FitnessFunction::jump(n, k)?;
    let before = f.index(i) as f64;
    let acc = one_step_mean(f, fit, trials, seed, 9, |_, s| s.frequencies().index(i) as f64 - before);
    let d = f.distance_f64();
    let fi = f.frequency_f64(i);
    let (bound, correction) = gap_correction_bound(fi, d);
    let mut r = LemmaReport::new(LemmaId::GapCorrection, "Pr[f_i up] - Pr[f_i down]", Claim::AtLeast, trials, seed)
        .config("n", n as f64)
        .config("mu", f.mu() as f64)
        .config("k", k as f64)
        .config("i", i as f64)
        .config("f_i", fi)
        .config("D", d);
    r.profile = Some(describe(f));
    r.set_mean(&acc);
    r.bound = Some(bound);
    r.extra.insert("correction".into(), correction);
    r.judge();
    Ok(r)
}
