//! Parallel runs with exponentially growing population size.
//!
//! Round `i` grants every running process `1..i-1` a budget of `2^(i-1)` and
//! starts process `i` with parameter `mu_i = 2^(i-1)` and a budget of
//! `2^i - 1`. The strategy stops as soon as any process solves the problem.
//! Processes are simulated sequentially in round order, so the outcome is a
//! deterministic function of the seed.

use serde::{Deserialize, Serialize};

use crate::cga::{CgaRun, TelemetryOptions};
use crate::error::{Error, Result};
use crate::fitness::{make_well_behaved, FitnessFunction};
use crate::rng::{derive_seed, rng_from_seed, LabRng};

/// Result of granting a solver some budget.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Advance {
    /// Units consumed; equals the grant unless the solver succeeded early.
    pub used: u64,
    pub solved: bool,
}

/// A stochastic solver that can be suspended and resumed. One budget unit is
/// one solver iteration.
pub trait BudgetedSolver {
    fn advance(&mut self, budget: u64) -> Advance;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProcessStatus {
    Running,
    Succeeded,
    Exhausted,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BudgetedProcess {
    pub process_id: u32,
    /// `2^(id-1)`, before any solver-side adjustment.
    pub mu: u64,
    pub budget_spent: u64,
    pub status: ProcessStatus,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleRound {
    pub round_index: u32,
    /// `(process_id, allotment)` in process order.
    pub allotments: Vec<(u32, u64)>,
    pub round_total: u64,
    /// Total allotted in rounds `1..=round_index`.
    pub cumulative_total: u64,
}

fn pow2(e: u32) -> u64 {
    1u64.checked_shl(e).filter(|_| e < 63).expect("round index too large for 64-bit budgets")
}

/// The allotment table of round `i >= 1`.
pub fn schedule_round(i: u32) -> ScheduleRound {
    assert!(i >= 1, "rounds are numbered from 1");
    let mut allotments: Vec<(u32, u64)> = (1..i).map(|p| (p, pow2(i - 1))).collect();
    allotments.push((i, pow2(i) - 1));
    let round_total = allotments.iter().map(|a| a.1).sum();
    ScheduleRound { round_index: i, allotments, round_total, cumulative_total: cumulative_budget(i) }
}

/// `sum_{r=1}^{i} (2^r - 1 + (r-1) 2^(r-1))`.
pub fn cumulative_budget(i: u32) -> u64 {
    (1..=i).map(|r| pow2(r) - 1 + (r as u64 - 1) * pow2(r - 1)).sum()
}

/// `ceil(6 mu~ T (log2(mu~ T) + 3))`.
pub fn t_paral_bound(mu_tilde: u64, t: u64) -> Result<u64> {
    if mu_tilde == 0 || t == 0 {
        return Err(Error::InvalidArgument("mu~ and T must be at least 1".into()));
    }
    let prod = mu_tilde as f64 * t as f64;
    Ok((6.0 * prod * (prod.log2() + 3.0)).ceil() as u64)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParallelOutcome {
    pub total_budget: u64,
    pub rounds: u32,
    pub winning_process: u32,
    pub winning_mu: u64,
    pub processes: Vec<BudgetedProcess>,
}

/// Runs the strategy with solvers built by `factory(process_id, mu_i)`.
///
/// Fails with [`Error::Exhausted`] when `max_rounds` complete without success.
pub fn run_parallel<S, F>(mut factory: F, max_rounds: u32) -> Result<ParallelOutcome>
where
    S: BudgetedSolver,
    F: FnMut(u32, u64) -> S,
{
    if max_rounds == 0 {
        return Err(Error::InvalidArgument("max_rounds must be at least 1".into()));
    }
    let mut solvers: Vec<S> = Vec::new();
    let mut procs: Vec<BudgetedProcess> = Vec::new();
    let mut total = 0u64;
    for round in 1..=max_rounds {
        let mu = pow2(round - 1);
        solvers.push(factory(round, mu));
        procs.push(BudgetedProcess { process_id: round, mu, budget_spent: 0, status: ProcessStatus::Running });
        for (pid, allot) in schedule_round(round).allotments {
            let slot = pid as usize - 1;
            let adv = solvers[slot].advance(allot);
            debug_assert!(adv.used <= allot);
            procs[slot].budget_spent += adv.used;
            total += adv.used;
            if adv.solved {
                procs[slot].status = ProcessStatus::Succeeded;
                return Ok(ParallelOutcome {
                    total_budget: total,
                    rounds: round,
                    winning_process: pid,
                    winning_mu: procs[slot].mu,
                    processes: procs,
                });
            }
        }
    }
    Err(Error::Exhausted { rounds: max_rounds, total_budget: total })
}

/// Binds a scheduler process to a cGA run. `mu_i` is raised to `mu_min` and
/// then to the next well-behaved value for `n`.
#[derive(Clone, Debug)]
pub struct CgaAdapter {
    pub requested_mu: u64,
    pub effective_mu: u64,
    run: CgaRun,
}

impl CgaAdapter {
    pub fn new(fit: FitnessFunction, mu_i: u64, mu_min: u64, seed: u64) -> Result<Self> {
        let effective_mu = adapted_mu(fit.n(), mu_i, mu_min)?;
        let run = CgaRun::new(fit, effective_mu, TelemetryOptions::default(), seed)?;
        Ok(Self { requested_mu: mu_i, effective_mu, run })
    }

    pub fn adjusted(&self) -> bool {
        self.requested_mu != self.effective_mu
    }

    pub fn iterations(&self) -> u64 {
        self.run.iterations()
    }
}

impl BudgetedSolver for CgaAdapter {
    fn advance(&mut self, budget: u64) -> Advance {
        self.run.advance(budget)
    }
}

/// Effective cGA population size for scheduler parameter `mu_i`.
pub fn adapted_mu(n: usize, mu_i: u64, mu_min: u64) -> Result<u64> {
    make_well_behaved(n, mu_i.max(mu_min).max(1))
}

pub const DEFAULT_MU_MIN: u64 = 4;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CgaParallelOutcome {
    pub total_budget: u64,
    pub rounds: u32,
    pub winning_process: u32,
    pub winning_mu: u64,
    pub winning_effective_mu: u64,
    /// `(process_id, requested mu, effective mu)` for every adjusted process.
    pub adjustments: Vec<(u32, u64, u64)>,
    pub processes: Vec<BudgetedProcess>,
}

/// The strategy applied to the cGA, with per-process seeds
/// `derive_seed(seed, process_id)`.
pub fn run_parallel_cga(fit: FitnessFunction, mu_min: u64, max_rounds: u32, seed: u64) -> Result<CgaParallelOutcome> {
    let n = fit.n();
    // validate up front so the factory can't fail
    adapted_mu(n, 1, mu_min)?;
    let mut adjustments = Vec::new();
    let out = run_parallel(
        |pid, mu| {
            let a = CgaAdapter::new(fit, mu, mu_min, derive_seed(&[seed, pid as u64])).expect("validated dimension");
            if a.adjusted() {
                adjustments.push((pid, a.requested_mu, a.effective_mu));
            }
            a
        },
        max_rounds,
    )?;
    Ok(CgaParallelOutcome {
        total_budget: out.total_budget,
        rounds: out.rounds,
        winning_process: out.winning_process,
        winning_mu: out.winning_mu,
        winning_effective_mu: adapted_mu(n, out.winning_mu, mu_min)?,
        adjustments,
        processes: out.processes,
    })
}

/// Test double: with `mu >= mu_tilde` it succeeds with probability 3/4 at the
/// end of every block of `mu * T` units; below `mu_tilde` it never succeeds.
#[derive(Clone, Debug)]
pub struct MockSolver {
    block: u64,
    capable: bool,
    into_block: u64,
    rng: LabRng,
}

impl MockSolver {
    pub fn new(mu: u64, mu_tilde: u64, t: u64, seed: u64) -> Self {
        Self { block: mu * t, capable: mu >= mu_tilde, into_block: 0, rng: rng_from_seed(seed) }
    }
}

impl BudgetedSolver for MockSolver {
    fn advance(&mut self, budget: u64) -> Advance {
        use rand::Rng;
        let mut used = 0;
        while used < budget {
            let step = (self.block - self.into_block).min(budget - used);
            used += step;
            self.into_block += step;
            if self.into_block == self.block {
                self.into_block = 0;
                if self.capable && self.rng.random_bool(0.75) {
                    return Advance { used, solved: true };
                }
            }
        }
        Advance { used, solved: false }
    }
}
