//! Empirical and exact checks of the probabilistic bounds behind the runtime
//! analysis. Every check returns a [`LemmaReport`] with an estimate, a 99%
//! interval, the claimed bound and a verdict.
//!
//! Trials are split into fixed blocks of [`BLOCK_TRIALS`]; block `b` draws
//! from `derive_seed(seed, tag, b)`, so results do not depend on the number
//! of worker threads.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fitness::{FrequencyGrid, FrequencyVector};
use crate::rng::{derive_seed, rng_from_seed, LabRng};

pub mod boundary;
pub mod drift;
pub mod optimum;
pub mod phase;
pub mod sampling;
pub mod stats;
pub mod suite;
pub mod walk;

pub use boundary::{verify_boundary_distribution, BoundarySide};
pub use drift::{verify_drift, verify_frequency_drift, verify_gap_correction};
pub use optimum::{explore_gap_probability, verify_optimum_probability, GapExploration};
pub use phase::verify_onemax_phase;
pub use sampling::{
    anti_concentration_sweep, estimate_anti_concentration, verify_sampling_tails, AntiConcentrationSweep,
};
pub use stats::Z99;
pub use suite::{run_suite, SuiteOptions};
pub use walk::{simulate_reflected_walk, WalkParameters};

pub const CONFIDENCE: f64 = 0.99;
pub const BLOCK_TRIALS: u64 = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LemmaId {
    /// Chernoff tails of the number of zeros in a sample.
    SamplingTails,
    /// Law of the number of differing bits among boundary positions.
    BoundaryDistribution,
    /// Reflected random walk of a single frequency.
    ReflectedWalk,
    /// Anti-concentration of the OneMax difference of two samples.
    AntiConcentration,
    /// Time to leave the initial OneMax phase.
    OnemaxPhase,
    /// Drift of `D_t` on Jump.
    DistanceDrift,
    /// Lower bound on the probability of sampling the optimum.
    OptimumProbability,
    /// Drift of a single frequency on OneMax.
    FrequencyDrift,
    /// Drift of a single frequency on Jump, gap-corrected.
    GapCorrection,
}

impl LemmaId {
    pub const ALL: [LemmaId; 9] = [
        LemmaId::SamplingTails,
        LemmaId::BoundaryDistribution,
        LemmaId::ReflectedWalk,
        LemmaId::AntiConcentration,
        LemmaId::OnemaxPhase,
        LemmaId::DistanceDrift,
        LemmaId::OptimumProbability,
        LemmaId::FrequencyDrift,
        LemmaId::GapCorrection,
    ];

    /// Numeric selector used on the command line (`9` is the gap-corrected
    /// frequency drift).
    pub fn number(self) -> u8 {
        LemmaId::ALL.iter().position(|&l| l == self).unwrap() as u8 + 1
    }

    pub fn from_number(n: u8) -> Option<Self> {
        LemmaId::ALL.get((n as usize).checked_sub(1)?).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            LemmaId::SamplingTails => "sampling-tails",
            LemmaId::BoundaryDistribution => "boundary-distribution",
            LemmaId::ReflectedWalk => "reflected-walk",
            LemmaId::AntiConcentration => "anti-concentration",
            LemmaId::OnemaxPhase => "onemax-phase",
            LemmaId::DistanceDrift => "distance-drift",
            LemmaId::OptimumProbability => "optimum-probability",
            LemmaId::FrequencyDrift => "frequency-drift",
            LemmaId::GapCorrection => "gap-correction",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        if let Ok(n) = s.parse::<u8>() {
            return Self::from_number(n);
        }
        LemmaId::ALL.iter().copied().find(|l| l.name() == s || (s == "gap" && *l == LemmaId::GapCorrection))
    }
}

impl fmt::Display for LemmaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Direction of the claim being checked.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Claim {
    /// The estimated quantity is at most the bound.
    AtMost,
    /// The estimated quantity is at least the bound.
    AtLeast,
    /// Distributional identity; the verdict comes from a goodness-of-fit test.
    Matches,
    /// No bound; the report only records measurements.
    Informational,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    ConsistentWithBound,
    Violation,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::ConsistentWithBound => "consistent",
            Verdict::Violation => "VIOLATION",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub lemma: LemmaId,
    /// Short description of the event or quantity estimated.
    pub quantity: String,
    pub configuration: BTreeMap<String, f64>,
    /// Description of the frequency vector used, when there is one.
    pub profile: Option<String>,
    pub estimate: f64,
    pub std_error: f64,
    pub interval: (f64, f64),
    pub confidence: f64,
    /// Exact value from an oracle, when one was computed.
    pub exact: Option<f64>,
    pub bound: Option<f64>,
    pub claim: Claim,
    pub verdict: Verdict,
    pub trials: u64,
    pub seed: u64,
    pub notes: Vec<String>,
    pub extra: BTreeMap<String, f64>,
}

impl LemmaReport {
    pub(crate) fn new(lemma: LemmaId, quantity: &str, claim: Claim, trials: u64, seed: u64) -> Self {
        Self {
            lemma,
            quantity: quantity.to_string(),
            configuration: BTreeMap::new(),
            profile: None,
            estimate: f64::NAN,
            std_error: 0.0,
            interval: (f64::NAN, f64::NAN),
            confidence: CONFIDENCE,
            exact: None,
            bound: None,
            claim,
            verdict: Verdict::Inconclusive,
            trials,
            seed,
            notes: Vec::new(),
            extra: BTreeMap::new(),
        }
    }

    pub(crate) fn config(mut self, key: &str, value: f64) -> Self {
        self.configuration.insert(key.to_string(), value);
        self
    }

    pub(crate) fn set_proportion(&mut self, successes: u64, trials: u64) {
        let p = successes as f64 / trials.max(1) as f64;
        self.estimate = p;
        self.std_error = (p * (1.0 - p) / trials.max(1) as f64).sqrt();
        self.interval = stats::wilson_interval(successes, trials, Z99);
        self.extra.insert("successes".into(), successes as f64);
    }

    pub(crate) fn set_mean(&mut self, acc: &stats::MeanAccumulator) {
        self.estimate = acc.mean();
        self.std_error = acc.std_error();
        self.interval = acc.interval(Z99);
    }

    /// Verdict for an [`Claim::AtMost`] / [`Claim::AtLeast`] claim. An exact
    /// value, when present, decides alone.
    pub(crate) fn judge(&mut self) {
        let Some(bound) = self.bound else {
            return;
        };
        let tol = 1e-12 * bound.abs().max(1e-300);
        self.verdict = match (self.claim, self.exact) {
            (Claim::AtMost, Some(x)) if x > bound + tol => Verdict::Violation,
            (Claim::AtLeast, Some(x)) if x < bound - tol => Verdict::Violation,
            (Claim::AtMost | Claim::AtLeast, Some(_)) => Verdict::ConsistentWithBound,
            (Claim::AtMost, None) if self.interval.0 > bound => Verdict::Violation,
            (Claim::AtMost, None) if self.estimate > bound => Verdict::Inconclusive,
            (Claim::AtLeast, None) if self.interval.1 < bound => Verdict::Violation,
            (Claim::AtLeast, None) if self.estimate < bound => Verdict::Inconclusive,
            (Claim::AtMost | Claim::AtLeast, None) => Verdict::ConsistentWithBound,
            _ => self.verdict,
        };
    }

    /// `(estimate - exact) / se`, where `se` is the binomial standard error
    /// under the exact proportion. `None` without an exact value.
    pub fn z_against_exact_proportion(&self) -> Option<f64> {
        let x = self.exact?;
        let se = (x * (1.0 - x) / self.trials.max(1) as f64).sqrt();
        let d = self.estimate - x;
        Some(if se == 0.0 {
            if d == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            d / se
        })
    }

    /// `(estimate - exact) / std_error` for mean estimates.
    pub fn z_against_exact_mean(&self) -> Option<f64> {
        let x = self.exact?;
        let d = self.estimate - x;
        Some(if self.std_error == 0.0 {
            if d.abs() < 1e-12 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            d / self.std_error
        })
    }

    /// One-line human summary.
    pub fn summary_line(&self) -> String {
        let mut s = format!(
            "{:<22} {:<12} est={:.6} ci=[{:.6}, {:.6}]",
            self.lemma.name(),
            self.verdict.to_string(),
            self.estimate,
            self.interval.0,
            self.interval.1
        );
        if let Some(x) = self.exact {
            s += &format!(" exact={x:.6}");
        }
        if let Some(b) = self.bound {
            let rel = match self.claim {
                Claim::AtMost => "<=",
                Claim::AtLeast => ">=",
                _ => "~",
            };
            s += &format!(" claim {rel} {b:.6}");
        }
        let cfg: Vec<String> = self.configuration.iter().map(|(k, v)| format!("{k}={v}")).collect();
        s + &format!(" [{}]", cfg.join(" "))
    }
}

/// Runs `trials` trials in blocks; `block(rng, count)` handles one block.
/// Results come back in block order regardless of scheduling.
pub(crate) fn run_blocks<A, F>(trials: u64, seed: u64, tag: u64, block: F) -> Vec<A>
where
    A: Send,
    F: Fn(&mut LabRng, u64) -> A + Sync,
{
    let blocks = trials.div_ceil(BLOCK_TRIALS);
    (0..blocks)
        .into_par_iter()
        .map(|b| {
            let count = BLOCK_TRIALS.min(trials - b * BLOCK_TRIALS);
            let mut rng = rng_from_seed(derive_seed(&[seed, tag, b]));
            block(&mut rng, count)
        })
        .collect()
}

/// Frequency vector on the grid of `(n, mu)` whose entries are the grid
/// points nearest to `profile(i)`.
pub fn profile_vector(n: usize, mu: u64, profile: impl Fn(usize) -> f64) -> Result<FrequencyVector> {
    let grid = FrequencyGrid::new(n, mu)?;
    let idx = (0..n).map(|i| grid.nearest_index(profile(i))).collect();
    FrequencyVector::from_indices(grid, idx)
}

pub(crate) fn require(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Precondition(msg()))
    }
}

pub(crate) fn describe(f: &FrequencyVector) -> String {
    let v = f.to_f64_vec();
    let min = v.iter().copied().fold(f64::INFINITY, f64::min);
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    format!("n={} mu={} D={:.4} min={:.4} max={:.4}", f.n(), f.mu(), f.distance_f64(), min, max)
}

/// `true` when every frequency is at least 1/3.
pub(crate) fn all_at_least_third(f: &FrequencyVector) -> bool {
    f.indices().iter().all(|&i| !f.grid().is_below_one_third(i))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lemma_selectors_round_trip() {
        for l in LemmaId::ALL {
            assert_eq!(LemmaId::from_number(l.number()), Some(l));
            assert_eq!(LemmaId::parse(l.name()), Some(l));
        }
        assert_eq!(LemmaId::parse("gap"), Some(LemmaId::GapCorrection));
        assert_eq!(LemmaId::parse("0"), None);
        assert_eq!(LemmaId::parse("10"), None);
    }

    #[test]
    fn blocks_are_thread_count_independent() {
        use rand::RngCore;
        let f = |rng: &mut LabRng, c: u64| (0..c).map(|_| rng.next_u64() % 7).sum::<u64>();
        let a = run_blocks(10_000, 5, 1, f);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| run_blocks(10_000, 5, 1, f));
        assert_eq!(a, b);
        assert_eq!(a.len(), 3);
    }

    #[test]
    fn verdict_rules() {
        let mut r = LemmaReport::new(LemmaId::SamplingTails, "x", Claim::AtMost, 100, 0);
        r.bound = Some(0.1);
        r.estimate = 0.12;
        r.interval = (0.11, 0.13);
        r.judge();
        assert_eq!(r.verdict, Verdict::Violation);
        r.interval = (0.09, 0.13);
        r.judge();
        assert_eq!(r.verdict, Verdict::Inconclusive);
        r.estimate = 0.05;
        r.judge();
        assert_eq!(r.verdict, Verdict::ConsistentWithBound);
        r.exact = Some(0.2);
        r.judge();
        assert_eq!(r.verdict, Verdict::Violation);
    }
}
