//! Positions pinned at a frequency boundary during one iteration.

use serde::{Deserialize, Serialize};

use crate::cga::CgaState;
use crate::error::Result;
use crate::fitness::{FitnessFunction, FrequencyVector};
use crate::lab::{describe, require, run_blocks, stats, Claim, LemmaId, LemmaReport, Verdict};
use crate::oracles::binomial_pmf;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundarySide {
    /// Positions at `1/n`.
    Lower,
    /// Positions at `1 - 1/n`.
    Upper,
}

/// One iteration from `f` under `fit`, repeated `trials` times. With `L` the
/// positions at the chosen boundary and `M` those where the two samples
/// differ, checks that `|M| ~ Bin(|L|, 2 (1/n) (1 - 1/n))` (chi-square) and
/// that clamping moves `|f|_1` by at most `|M| / mu` in the direction of the
/// boundary (every trial).
pub fn verify_boundary_distribution(
    f: &FrequencyVector,
    side: BoundarySide,
    fit: FitnessFunction,
    trials: u64,
    seed: u64,
) -> Result<LemmaReport> {
    require(fit.n() == f.n(), || "objective and model dimensions differ".into())?;
    require(trials > 0, || "at least one trial".into())?;
    let n = f.n();
    let edge = match side {
        BoundarySide::Lower => 0,
        BoundarySide::Upper => f.grid().n_mu(),
    };
    let positions: Vec<usize> = (0..n).filter(|&i| f.index(i) == edge).collect();
    let ell = positions.len();

    let blocks = run_blocks(trials, seed, 2, |rng, count| {
        let mut state = CgaState::from_parts(f.clone(), rng.clone());
        let mut counts = vec![0u64; ell + 1];
        let mut dominated = 0u64;
        for _ in 0..count {
            state.reset_frequencies(f).expect("same grid");
            let ev = state.step(&fit);
            let (x1, x2) = state.last_samples();
            let m = positions.iter().filter(|&&i| x1[i] != x2[i]).count();
            counts[m] += 1;
            let correction = ev.post_clamp_index_change() - ev.pre_clamp_index_change;
            let toward_edge = match side {
                BoundarySide::Lower => correction,
                BoundarySide::Upper => -correction,
            };
            if toward_edge > m as i64 {
                dominated += 1;
            }
        }
        (counts, dominated)
    });
    let mut counts = vec![0u64; ell + 1];
    let mut violations = 0;
    for (c, v) in &blocks {
        counts.iter_mut().zip(c).for_each(|(a, b)| *a += b);
        violations += v;
    }

    let nf = n as f64;
    let p = 2.0 * (1.0 / nf) * (1.0 - 1.0 / nf);
    let law = binomial_pmf(ell as u64, p)?;
    let chi = stats::chi_square_gof(&counts, &law.probabilities);

    // mean and standard error of |M| from the histogram
    let total: u64 = counts.iter().sum();
    let mean = counts.iter().enumerate().map(|(m, &c)| m as f64 * c as f64).sum::<f64>() / total as f64;
    let second = counts.iter().enumerate().map(|(m, &c)| (m * m) as f64 * c as f64).sum::<f64>() / total as f64;
    let var = (second - mean * mean).max(0.0) * total as f64 / (total.max(2) - 1) as f64;
    let se = (var / total as f64).sqrt();

    let mut r =
        LemmaReport::new(LemmaId::BoundaryDistribution, "|M| ~ Bin(|L|, 2(1/n)(1-1/n))", Claim::Matches, trials, seed)
            .config("n", nf)
            .config("mu", f.mu() as f64)
            .config("ell", ell as f64)
            .config("side_upper", matches!(side, BoundarySide::Upper) as u8 as f64);
    if let FitnessFunction::Jump { k, .. } = fit {
        r.configuration.insert("k".into(), k as f64);
    }
    r.profile = Some(describe(f));
    r.estimate = mean;
    r.std_error = se;
    r.interval = (mean - stats::Z99 * se, mean + stats::Z99 * se);
    r.exact = Some(ell as f64 * p);
    r.extra.insert("chi_square".into(), chi.statistic);
    r.extra.insert("dof".into(), chi.dof as f64);
    r.extra.insert("p_value".into(), chi.p_value);
    r.extra.insert("domination_violations".into(), violations as f64);
    r.extra.insert("pair_probability".into(), p);
    r.verdict = if violations > 0 {
        Verdict::Violation
    } else if chi.p_value < 0.01 {
        Verdict::Inconclusive
    } else {
        Verdict::ConsistentWithBound
    };
    Ok(r)
}
