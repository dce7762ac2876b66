//! Probability of sampling the optimum, and of sampling into the gap.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::lab::{require, run_blocks, Claim, LemmaId, LemmaReport, Verdict};
use crate::oracles::{gap_probability, zeros_distribution};

/// Checks `prod f_i >= c^{(n - |f|_1)/(1 - c)}` on `samples` vectors drawn
/// uniformly from `[c, 1]^n`, comparing in the log domain with an absolute
/// slack of 1e-12. The estimate is the fraction of violating vectors.
pub fn verify_optimum_probability(n: usize, c: f64, samples: u64, seed: u64) -> Result<LemmaReport> {
    require(c > 0.0 && c < 1.0, || format!("c={c} outside (0, 1)"))?;
    require(n >= 1 && samples > 0, || "need n >= 1 and at least one sample".into())?;
    let ln_c = c.ln();
    let blocks = run_blocks(samples, seed, 7, |rng, count| {
        let mut violations = 0u64;
        let mut min_slack = f64::INFINITY;
        let mut f = vec![0.0; n];
        for _ in 0..count {
            for v in f.iter_mut() {
                *v = rng.random_range(c..=1.0);
            }
            let log_prod: f64 = f.iter().map(|v| v.ln()).sum();
            let distance: f64 = f.iter().map(|v| 1.0 - v).sum();
            let log_bound = ln_c * distance / (1.0 - c);
            let slack = log_prod - log_bound;
            min_slack = min_slack.min(slack);
            if slack < -1e-12 {
                violations += 1;
            }
        }
        (violations, min_slack)
    });
    let violations: u64 = blocks.iter().map(|b| b.0).sum();
    let min_slack = blocks.iter().map(|b| b.1).fold(f64::INFINITY, f64::min);

    // equality case f = (c, ..., c): both sides are c^n
    let equal = vec![c; n];
    let eq_prod: f64 = equal.iter().product();
    let eq_bound = crate::oracles::optimum_probability_bound(&equal, c)?;
    let eq_rel = ((eq_prod - eq_bound) / eq_bound).abs();

    let mut r = LemmaReport::new(
        LemmaId::OptimumProbability,
        "fraction of f in [c,1]^n with prod f_i < c^((n-|f|_1)/(1-c))",
        Claim::AtMost,
        samples,
        seed,
    )
    .config("n", n as f64)
    .config("c", c);
    r.set_proportion(violations, samples);
    r.bound = Some(0.0);
    r.extra.insert("min_log_slack".into(), min_slack);
    r.extra.insert("equality_relative_error".into(), eq_rel);
    r.verdict = if violations > 0 || eq_rel > 1e-12 { Verdict::Violation } else { Verdict::ConsistentWithBound };
    Ok(r)
}

/// Exact sampling probabilities near the end of the OneMax-like phase, for
/// the constant model with `D = k + c`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapExploration {
    pub n: usize,
    pub k: usize,
    pub c: f64,
    pub frequency: f64,
    pub distance: f64,
    pub gap_probability: f64,
    /// `Pr[d(x) < k]`, which includes the optimum.
    pub prob_zeros_below_k: f64,
    pub optimum_probability: f64,
}

/// Evaluates the constant model `f_i = 1 - (k + c)/n`; no verdict.
pub fn explore_gap_probability(n: usize, k: usize, c: f64) -> Result<GapExploration> {
    require(k >= 1 && k < n, || format!("k={k} outside [1, n)"))?;
    let d = k as f64 + c;
    require(d > 0.0 && d < n as f64, || format!("D={d} outside (0, n)"))?;
    let fi = 1.0 - d / n as f64;
    let f = vec![fi; n];
    let law = zeros_distribution(&f)?;
    Ok(GapExploration {
        n,
        k,
        c,
        frequency: fi,
        distance: d,
        gap_probability: gap_probability(&f, k)?,
        prob_zeros_below_k: law.prob_le(k as i64 - 1),
        optimum_probability: law.prob(0),
    })
}
