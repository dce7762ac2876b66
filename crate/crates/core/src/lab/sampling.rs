//! Properties of a single sample and of the difference of two samples.

use crate::error::Result;
use crate::fitness::FrequencyVector;
use crate::lab::{all_at_least_third, describe, require, run_blocks, Claim, LemmaId, LemmaReport};
use crate::oracles::{abs_diff_distribution, zeros_distribution, DEFAULT_EXACT_LIMIT};

/// Number of zeros `d` of a sample at or beyond `(1 + delta) D` (upper) and at
/// or below `(1 - delta) D` (lower). Comparisons allow 1e-9 of slack so that
/// boundary cases like `delta = 0` count as hits.
fn tail_hits(d: usize, distance: f64, delta: f64) -> (bool, bool) {
    let d = d as f64;
    (d >= (1.0 + delta) * distance - 1e-9, d <= (1.0 - delta) * distance + 1e-9)
}

/// Chernoff tails of `d(x)` for `x ~ Sample(f)`, with `D+ = D- = D`.
/// Returns the upper-tail report, then the lower-tail report.
pub fn verify_sampling_tails(f: &FrequencyVector, delta: f64, trials: u64, seed: u64) -> Result<[LemmaReport; 2]> {
    require((0.0..=1.0).contains(&delta), || format!("delta={delta} outside [0, 1]"))?;
    require(trials > 0, || "at least one trial".into())?;
    let n = f.n();
    let distance = f.distance_f64();
    let blocks = run_blocks(trials, seed, 1, |rng, count| {
        let mut buf = vec![false; n];
        let (mut up, mut down) = (0u64, 0u64);
        for _ in 0..count {
            let d = n - f.sample_into(rng, &mut buf);
            let (u, l) = tail_hits(d, distance, delta);
            up += u as u64;
            down += l as u64;
        }
        (up, down)
    });
    let up: u64 = blocks.iter().map(|b| b.0).sum();
    let down: u64 = blocks.iter().map(|b| b.1).sum();

    let exact = if n <= DEFAULT_EXACT_LIMIT {
        let law = zeros_distribution(&f.to_f64_vec())?;
        let (mut eu, mut el) = (Vec::new(), Vec::new());
        for d in 0..=n {
            let (u, l) = tail_hits(d, distance, delta);
            let p = law.prob(d as i64);
            if u {
                eu.push(p);
            }
            if l {
                el.push(p);
            }
        }
        Some((crate::oracles::compensated_sum(eu), crate::oracles::compensated_sum(el)))
    } else {
        None
    };

    let make = |quantity: &str, hits: u64, bound: f64, exact: Option<f64>| {
        let mut r = LemmaReport::new(LemmaId::SamplingTails, quantity, Claim::AtMost, trials, seed)
            .config("n", n as f64)
            .config("mu", f.mu() as f64)
            .config("delta", delta)
            .config("D", distance);
        r.profile = Some(describe(f));
        r.set_proportion(hits, trials);
        r.exact = exact;
        r.bound = Some(bound);
        r.judge();
        r
    };
    let upper = make("Pr[d(x) >= (1+delta) D]", up, (-delta * delta * distance / 3.0).exp(), exact.map(|e| e.0));
    let lower = make("Pr[d(x) <= (1-delta) D]", down, (-delta * delta * distance / 2.0).exp(), exact.map(|e| e.1));
    Ok([upper, lower])
}

/// Smallest `m >= 0` with `25 m^2 >= d`, i.e. `ceil(sqrt(d) / 5)`.
pub fn anti_concentration_threshold(d: i64) -> i64 {
    let mut m = 0;
    while 25 * m * m < d {
        m += 1;
    }
    m
}

/// Estimates `Pr[| |x1|_1 - |x2|_1 | >= ceil(sqrt(D)/5)]` with the integer
/// part of `D` as the declared distance. Requires every `f_i >= 1/3`. The
/// claim checked is that the probability is positive; the estimate is a
/// candidate for the constant `C`.
pub fn estimate_anti_concentration(f: &FrequencyVector, trials: u64, seed: u64) -> Result<LemmaReport> {
    require(all_at_least_third(f), || "every frequency must be at least 1/3".into())?;
    require(trials > 0, || "at least one trial".into())?;
    let n = f.n();
    let declared = f.scaled_distance() / f.mu() as i64;
    let m = anti_concentration_threshold(declared);
    let blocks = run_blocks(trials, seed, 4, |rng, count| {
        let mut a = vec![false; n];
        let mut b = vec![false; n];
        let mut hits = 0u64;
        for _ in 0..count {
            let o1 = f.sample_into(rng, &mut a);
            let o2 = f.sample_into(rng, &mut b);
            hits += (o1.abs_diff(o2) as i64 >= m) as u64;
        }
        hits
    });
    let hits: u64 = blocks.iter().sum();
    let mut r =
        LemmaReport::new(LemmaId::AntiConcentration, "Pr[|Delta| >= ceil(sqrt(D)/5)]", Claim::AtLeast, trials, seed)
            .config("n", n as f64)
            .config("mu", f.mu() as f64)
            .config("D", f.distance_f64())
            .config("D_declared", declared as f64)
            .config("threshold", m as f64);
    r.profile = Some(describe(f));
    r.set_proportion(hits, trials);
    if n <= DEFAULT_EXACT_LIMIT {
        r.exact = Some(abs_diff_distribution(&f.to_f64_vec(), DEFAULT_EXACT_LIMIT)?.prob_ge(m));
    }
    r.bound = Some(0.0);
    r.judge();
    // the claim is strict positivity
    if r.exact.unwrap_or(r.estimate) <= 0.0 {
        r.verdict = if r.exact.is_some() { crate::lab::Verdict::Violation } else { crate::lab::Verdict::Inconclusive };
    }
    Ok(r)
}

#[derive(Clone, Debug, PartialEq)]
pub struct AntiConcentrationSweep {
    pub reports: Vec<LemmaReport>,
    /// Minimum over configurations of the exact value (or the estimate when
    /// no exact value is available).
    pub c_hat_min: f64,
}

pub fn anti_concentration_sweep(
    profiles: &[FrequencyVector],
    trials: u64,
    seed: u64,
) -> Result<AntiConcentrationSweep> {
    let reports = profiles
        .iter()
        .enumerate()
        .map(|(i, f)| estimate_anti_concentration(f, trials, crate::rng::derive_seed(&[seed, i as u64])))
        .collect::<Result<Vec<_>>>()?;
    let c_hat_min = reports.iter().map(|r| r.exact.unwrap_or(r.estimate)).fold(f64::INFINITY, f64::min);
    Ok(AntiConcentrationSweep { reports, c_hat_min })
}

/// The value of `C` to plug into drift bounds for `f`: the exact probability
/// when the oracle applies, otherwise the Monte Carlo estimate.
pub fn c_hat_for(f: &FrequencyVector, trials: u64, seed: u64) -> Result<f64> {
    let r = estimate_anti_concentration(f, trials, seed)?;
    Ok(r.exact.unwrap_or(r.estimate))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fitness::FrequencyGrid;
    use crate::lab::{profile_vector, Verdict};

    #[test]
    fn threshold_values() {
        assert_eq!(anti_concentration_threshold(0), 0);
        assert_eq!(anti_concentration_threshold(1), 1);
        assert_eq!(anti_concentration_threshold(25), 1);
        assert_eq!(anti_concentration_threshold(26), 2);
        assert_eq!(anti_concentration_threshold(100), 2);
        assert_eq!(anti_concentration_threshold(101), 3);
    }

    #[test]
    fn tails_match_exact_values() {
        let f = profile_vector(60, 60 * 29, |i| if i % 3 == 0 { 0.5 } else { 0.85 }).unwrap();
        let [up, down] = verify_sampling_tails(&f, 0.3, 40_000, 11).unwrap();
        for r in [&up, &down] {
            assert!(r.z_against_exact_proportion().unwrap().abs() < 4.5, "{}", r.summary_line());
            assert_eq!(r.verdict, Verdict::ConsistentWithBound);
            assert!(r.exact.unwrap() <= r.bound.unwrap());
        }
    }

    #[test]
    fn delta_zero_gives_trivial_bound() {
        let g = FrequencyGrid::new(10, 10).unwrap();
        let f = FrequencyVector::constant(g, 7).unwrap();
        let [up, down] = verify_sampling_tails(&f, 0.0, 1000, 1).unwrap();
        assert_eq!(up.bound, Some(1.0));
        assert_eq!(down.bound, Some(1.0));
        // D = 2 exactly: both tails contain d = 2
        assert!(up.exact.unwrap() + down.exact.unwrap() > 1.0);
    }

    #[test]
    fn spec_like_binomial_tail() {
        // f_i = 0.9 on n = 100 gives D = 10; upper bound exp(-10/3)
        let g = FrequencyGrid::new(100, 100).unwrap();
        let idx = g.index_of(num_rational::Ratio::new(9, 10)).unwrap();
        let f = FrequencyVector::constant(g, idx).unwrap();
        let [up, _] = verify_sampling_tails(&f, 1.0, 20_000, 2).unwrap();
        assert!((up.bound.unwrap() - (-10.0f64 / 3.0).exp()).abs() < 1e-15);
        assert!((up.bound.unwrap() - 0.03567).abs() < 1e-5);
        let tail = crate::oracles::binomial_pmf(100, 0.1).unwrap().prob_ge(20);
        assert!((up.exact.unwrap() - tail).abs() < 1e-12);
        assert!(tail < up.bound.unwrap());
        assert!(verify_sampling_tails(&f, 1.5, 10, 0).is_err());
    }

    #[test]
    fn distance_one_closed_form() {
        // every f_i = 1 - 1/n: zeros ~ Bin(n, 1/n), threshold 1
        let n = 50;
        let g = FrequencyGrid::new(n, 50).unwrap();
        let f = FrequencyVector::constant(g.clone(), g.n_mu()).unwrap();
        let r = estimate_anti_concentration(&f, 20_000, 1).unwrap();
        assert_eq!(r.configuration["threshold"], 1.0);
        let b = crate::oracles::binomial_pmf(n as u64, 1.0 / n as f64).unwrap();
        let tie: f64 = b.probabilities.iter().map(|p| p * p).sum();
        assert!((r.exact.unwrap() - (1.0 - tie)).abs() < 1e-12);
        assert!(r.z_against_exact_proportion().unwrap().abs() < 4.5);
    }

    #[test]
    fn anti_concentration_requires_third() {
        let f = profile_vector(30, 30 * 14, |i| if i == 0 { 0.2 } else { 0.9 }).unwrap();
        assert!(estimate_anti_concentration(&f, 100, 0).is_err());
    }

    #[test]
    fn anti_concentration_agrees_with_oracle() {
        let f = profile_vector(40, 40 * 19, |i| 0.4 + 0.5 * i as f64 / 40.0).unwrap();
        let r = estimate_anti_concentration(&f, 30_000, 3).unwrap();
        assert!(r.exact.unwrap() > 0.2);
        assert!(r.z_against_exact_proportion().unwrap().abs() < 4.5);
        assert_eq!(r.verdict, Verdict::ConsistentWithBound);
    }
}
