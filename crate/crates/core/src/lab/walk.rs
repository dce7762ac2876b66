//! The pessimistic frequency walk: a fair ±1/mu walk started at 1/2 and
//! reflected at the frequency boundaries.

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fitness::FrequencyGrid;
use crate::lab::{require, run_blocks, Claim, LemmaId, LemmaReport};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WalkParameters {
    pub n: usize,
    pub mu: u64,
    /// Number of steps `T`.
    pub horizon: u64,
    pub epsilon: f64,
}

/// Index steps below the start that make `Z_t < 1/2 - epsilon`: the smallest
/// integer strictly greater than `epsilon * mu`, treating products within
/// 1e-9 of an integer as that integer.
pub fn steps_to_hit(epsilon: f64, mu: u64) -> u64 {
    let x = epsilon * mu as f64;
    let r = x.round();
    let base = if (x - r).abs() < 1e-9 { r } else { x.floor() };
    base as u64 + 1
}

/// `Pr[exists t <= T: Z_t < 1/2 - epsilon]` for the reflected walk on the
/// grid of `(n, mu)`, against the bound `2 exp(-2 mu^2 epsilon^2 / T)`. The
/// report also carries the bound for steps of range `2/mu`,
/// `2 exp(-mu^2 epsilon^2 / (2T))`, under `extra["range_corrected_bound"]`.
pub fn simulate_reflected_walk(p: WalkParameters, trials: u64, seed: u64) -> Result<LemmaReport> {
    require(p.epsilon > 0.0 && p.epsilon.is_finite(), || format!("epsilon={} must be positive", p.epsilon))?;
    require(trials > 0, || "at least one trial".into())?;
    let grid = FrequencyGrid::new(p.n, p.mu)?;
    let top = grid.n_mu() as i64;
    let start = grid.half_index() as i64;
    let need = steps_to_hit(p.epsilon, p.mu) as i64;
    let target = start - need;

    let hits: u64 = run_blocks(trials, seed, 3, |rng, count| {
        let mut hits = 0u64;
        if target < 0 {
            return 0;
        }
        for _ in 0..count {
            let mut z = start;
            let mut left = p.horizon;
            let mut hit = false;
            while left > 0 && !hit {
                let mut word = rng.next_u64();
                for _ in 0..left.min(64) {
                    z = if z == 0 {
                        1
                    } else if z == top {
                        top - 1
                    } else if word & 1 == 1 {
                        z + 1
                    } else {
                        z - 1
                    };
                    word >>= 1;
                    left -= 1;
                    if z <= target {
                        hit = true;
                        break;
                    }
                }
            }
            hits += hit as u64;
        }
        hits
    })
    .iter()
    .sum();

    let (mu, t, e) = (p.mu as f64, p.horizon as f64, p.epsilon);
    let (bound, corrected) = if p.horizon == 0 {
        (0.0, 0.0)
    } else {
        (2.0 * (-2.0 * mu * mu * e * e / t).exp(), 2.0 * (-mu * mu * e * e / (2.0 * t)).exp())
    };
    let mut r =
        LemmaReport::new(LemmaId::ReflectedWalk, "Pr[exists t <= T: Z_t < 1/2 - eps]", Claim::AtMost, trials, seed)
            .config("n", p.n as f64)
            .config("mu", mu)
            .config("T", t)
            .config("epsilon", e);
    r.set_proportion(hits, trials);
    r.bound = Some(bound);
    r.extra.insert("range_corrected_bound".into(), corrected);
    r.extra.insert("index_steps_to_hit".into(), need as f64);
    r.judge();
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lab::Verdict;

    #[test]
    fn hitting_threshold_rounding() {
        assert_eq!(steps_to_hit(0.3, 100), 31);
        assert_eq!(steps_to_hit(0.1, 50), 6);
        assert_eq!(steps_to_hit(0.25, 10), 3);
    }

    #[test]
    fn zero_horizon_never_hits() {
        let p = WalkParameters { n: 50, mu: 50, horizon: 0, epsilon: 0.1 };
        let r = simulate_reflected_walk(p, 100, 0).unwrap();
        assert_eq!(r.estimate, 0.0);
        assert_eq!(r.verdict, Verdict::ConsistentWithBound);
    }

    #[test]
    fn deviation_beyond_lower_boundary_is_impossible() {
        let p = WalkParameters { n: 50, mu: 50, horizon: 10_000, epsilon: 0.5 - 1.0 / 50.0 };
        assert_eq!(simulate_reflected_walk(p, 200, 0).unwrap().estimate, 0.0);
    }

    #[test]
    fn short_walk_cannot_reach() {
        // 5 steps cannot move 6 index steps
        let p = WalkParameters { n: 50, mu: 50, horizon: 5, epsilon: 0.1 };
        assert_eq!(simulate_reflected_walk(p, 1000, 0).unwrap().estimate, 0.0);
    }

    #[test]
    fn matches_reflection_principle_far_from_boundary() {
        // mu large so the walk never meets a boundary within T steps:
        // Pr[min_{t<=T} S_t <= -m] = Pr[S_T <= -m] + Pr[S_T < -m] for the
        // simple walk, computed from the binomial law.
        let (mu, horizon, eps) = (2000u64, 400u64, 0.01);
        let m = steps_to_hit(eps, mu) as i64;
        let law = crate::oracles::binomial_pmf(horizon, 0.5).unwrap();
        // S_T = 2j - T with j up-steps
        let mut exact = 0.0;
        for j in 0..=horizon as i64 {
            let s = 2 * j - horizon as i64;
            let pj = law.prob(j);
            if s <= -m {
                exact += pj;
            }
            if s < -m {
                exact += pj;
            }
        }
        let p = WalkParameters { n: 100, mu, horizon, epsilon: eps };
        let r = simulate_reflected_walk(p, 40_000, 2).unwrap();
        let se = (exact * (1.0 - exact) / 40_000.0).sqrt();
        assert!((r.estimate - exact).abs() < 4.5 * se, "{} vs {exact}", r.estimate);
    }
}
