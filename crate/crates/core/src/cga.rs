//! The compact genetic algorithm with frequency boundaries.
//!
//! One iteration samples two offspring from the current model, lets the
//! fitter one (ties go to the first sample) pull every differing frequency one
//! grid step toward its bit, and clamps the result into `[1/n, 1 - 1/n]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fitness::{BitString, FitnessFunction, FrequencyGrid, FrequencyVector};
use crate::restart::{Advance, BudgetedSolver};
use crate::rng::{rng_from_seed, LabRng};

/// What happened in one iteration.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepEvents {
    pub winner_onemax: usize,
    pub loser_onemax: usize,
    /// Either sample lies in the gap of the objective.
    pub gap_sampled: bool,
    /// Number of samples (0, 1 or 2) in the gap.
    pub gap_samples: u8,
    pub optimum_sampled: bool,
    /// Positions where clamping raised the preliminary frequency.
    pub lower_boundary_corrections: u32,
    /// Positions where clamping lowered the preliminary frequency.
    pub upper_boundary_corrections: u32,
    /// `| |x1|_1 - |x2|_1 |`
    pub abs_diff: usize,
    /// `mu * (|f'_{t+1}|_1 - |f_t|_1)`: index change before clamping.
    pub pre_clamp_index_change: i64,
}

impl StepEvents {
    /// `mu * (|f_{t+1}|_1 - |f_t|_1)`.
    pub fn post_clamp_index_change(&self) -> i64 {
        self.pre_clamp_index_change + self.lower_boundary_corrections as i64 - self.upper_boundary_corrections as i64
    }
}

/// Iteration counter, current model and the run's random source.
#[derive(Clone, Debug)]
pub struct CgaState {
    t: u64,
    freqs: FrequencyVector,
    rng: LabRng,
    x1: Vec<bool>,
    x2: Vec<bool>,
    changed: Vec<usize>,
}

impl CgaState {
    /// Fresh state with every frequency at 1/2.
    pub fn new(n: usize, mu: u64, seed: u64) -> Result<Self> {
        let grid = FrequencyGrid::new(n, mu)?;
        Ok(Self::from_frequencies(FrequencyVector::uniform(grid), seed))
    }

    /// State starting from an arbitrary model, with `t = 0`.
    pub fn from_frequencies(freqs: FrequencyVector, seed: u64) -> Self {
        Self::from_parts(freqs, rng_from_seed(seed))
    }

    pub fn from_parts(freqs: FrequencyVector, rng: LabRng) -> Self {
        let n = freqs.n();
        Self { t: 0, freqs, rng, x1: vec![false; n], x2: vec![false; n], changed: Vec::new() }
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn frequencies(&self) -> &FrequencyVector {
        &self.freqs
    }

    pub fn rng_mut(&mut self) -> &mut LabRng {
        &mut self.rng
    }

    /// Restores the model to `f` (same grid) without touching `t` or the
    /// random source; used to draw many single iterations from one state.
    pub fn reset_frequencies(&mut self, f: &FrequencyVector) -> Result<()> {
        if !std::sync::Arc::ptr_eq(f.grid(), self.freqs.grid()) && f.grid() != self.freqs.grid() {
            return Err(Error::InvalidArgument("frequency vector is on a different grid".into()));
        }
        self.freqs.indices_mut().copy_from_slice(f.indices());
        Ok(())
    }

    /// The two samples of the most recent [`step`](Self::step).
    pub fn last_samples(&self) -> (&[bool], &[bool]) {
        (&self.x1, &self.x2)
    }

    /// Positions whose frequency changed in the most recent iteration.
    pub fn last_changed(&self) -> &[usize] {
        &self.changed
    }

    /// One full iteration: sample `x1, x2 ~ Sample(f_t)` and update.
    pub fn step(&mut self, fit: &FitnessFunction) -> StepEvents {
        let ones1 = self.freqs.sample_into(&mut self.rng, &mut self.x1);
        let ones2 = self.freqs.sample_into(&mut self.rng, &mut self.x2);
        let x1 = std::mem::take(&mut self.x1);
        let x2 = std::mem::take(&mut self.x2);
        let events = self.update(&x1, ones1, &x2, ones2, fit);
        self.x1 = x1;
        self.x2 = x2;
        events
    }

    /// Update with externally realized samples; `x1` is the first sample and
    /// wins ties.
    pub fn apply_pair(&mut self, x1: &BitString, x2: &BitString, fit: &FitnessFunction) -> Result<StepEvents> {
        let n = self.freqs.n();
        for x in [x1, x2] {
            if x.len() != n {
                return Err(Error::LengthMismatch { expected: n, got: x.len() });
            }
        }
        self.x1.copy_from_slice(x1.bits());
        self.x2.copy_from_slice(x2.bits());
        Ok(self.update(x1.bits(), x1.ones(), x2.bits(), x2.ones(), fit))
    }

    fn update(&mut self, x1: &[bool], ones1: usize, x2: &[bool], ones2: usize, fit: &FitnessFunction) -> StepEvents {
        let n = x1.len();
        let first_wins = fit.evaluate_ones(ones1) >= fit.evaluate_ones(ones2);
        let (winner, loser, w_ones, l_ones) = if first_wins { (x1, x2, ones1, ones2) } else { (x2, x1, ones2, ones1) };

        let n_mu = self.freqs.grid().n_mu();
        let mut ev = StepEvents {
            winner_onemax: w_ones,
            loser_onemax: l_ones,
            abs_diff: ones1.abs_diff(ones2),
            optimum_sampled: ones1 == n || ones2 == n,
            ..StepEvents::default()
        };
        ev.gap_samples = fit.ones_in_gap(ones1) as u8 + fit.ones_in_gap(ones2) as u8;
        ev.gap_sampled = ev.gap_samples > 0;

        self.changed.clear();
        let indices = self.freqs.indices_mut();
        for i in 0..n {
            if winner[i] == loser[i] {
                continue;
            }
            let idx = indices[i];
            if winner[i] {
                ev.pre_clamp_index_change += 1;
                if idx == n_mu {
                    ev.upper_boundary_corrections += 1;
                } else {
                    indices[i] = idx + 1;
                    self.changed.push(i);
                }
            } else {
                ev.pre_clamp_index_change -= 1;
                if idx == 0 {
                    ev.lower_boundary_corrections += 1;
                } else {
                    indices[i] = idx - 1;
                    self.changed.push(i);
                }
            }
        }
        self.t += 1;
        ev
    }
}

/// How a run ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Outcome {
    OptimumFound,
    IterationCapReached,
    /// Stopped because the frequency at `position` fell below 1/3.
    FrequencyCollapse {
        position: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
pub struct TelemetryOptions {
    /// Record sampled `(t, D_t)` and `(t, min_i f_it)` series.
    pub record_trajectories: bool,
    /// Sampling stride of the series; default `max(1, floor(mu/100))`.
    pub stride: Option<u64>,
    /// Threshold `D'` for the first-crossing marker.
    pub d_prime: Option<f64>,
    /// Threshold `D''` for the first-crossing marker.
    pub d_double_prime: Option<f64>,
    /// Stop the run as soon as some frequency drops below 1/3.
    pub stop_on_collapse: bool,
}

/// Per-run telemetry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub outcome: Outcome,
    pub iterations: u64,
    pub evaluations: u64,
    pub d_trajectory: Option<Vec<(u64, f64)>>,
    pub min_frequency_trajectory: Option<Vec<(u64, f64)>>,
    pub first_t_d_le_dprime: Option<u64>,
    pub first_t_d_le_ddoubleprime: Option<u64>,
    pub gap_sample_count: u64,
    pub first_t_any_freq_below_one_third: Option<u64>,
}

impl RunTrace {
    pub fn succeeded(&self) -> bool {
        self.outcome == Outcome::OptimumFound
    }
}

/// Default iteration cap `ceil(50 mu sqrt(n))`.
pub fn default_iteration_cap(n: usize, mu: u64) -> u64 {
    (50.0 * mu as f64 * (n as f64).sqrt()).ceil() as u64
}

/// A cGA run that can be suspended and resumed at iteration granularity.
#[derive(Clone, Debug)]
pub struct CgaRun {
    state: CgaState,
    fit: FitnessFunction,
    telemetry: TelemetryOptions,
    stride: u64,
    scaled_dprime: Option<f64>,
    scaled_ddoubleprime: Option<f64>,
    d_trajectory: Vec<(u64, f64)>,
    min_trajectory: Vec<(u64, f64)>,
    first_dprime: Option<u64>,
    first_ddoubleprime: Option<u64>,
    first_below_third: Option<u64>,
    gap_samples: u64,
    finished: Option<Outcome>,
}

impl CgaRun {
    pub fn new(fit: FitnessFunction, mu: u64, telemetry: TelemetryOptions, seed: u64) -> Result<Self> {
        let state = CgaState::new(fit.n(), mu, seed)?;
        Ok(Self::from_state(state, fit, telemetry))
    }

    pub fn from_state(state: CgaState, fit: FitnessFunction, telemetry: TelemetryOptions) -> Self {
        let mu = state.frequencies().mu();
        let stride = telemetry.stride.unwrap_or((mu / 100).max(1)).max(1);
        let mut run = Self {
            scaled_dprime: telemetry.d_prime.map(|d| d * mu as f64),
            scaled_ddoubleprime: telemetry.d_double_prime.map(|d| d * mu as f64),
            state,
            fit,
            telemetry,
            stride,
            d_trajectory: Vec::new(),
            min_trajectory: Vec::new(),
            first_dprime: None,
            first_ddoubleprime: None,
            first_below_third: None,
            gap_samples: 0,
            finished: None,
        };
        run.observe_initial();
        run
    }

    pub fn state(&self) -> &CgaState {
        &self.state
    }

    pub fn iterations(&self) -> u64 {
        self.state.t
    }

    pub fn outcome(&self) -> Option<Outcome> {
        self.finished
    }

    fn observe_initial(&mut self) {
        let scaled = self.state.freqs.scaled_distance();
        self.observe_distance(scaled);
        let grid = self.state.freqs.grid().clone();
        if let Some(pos) = self.state.freqs.indices().iter().position(|&i| grid.is_below_one_third(i)) {
            self.first_below_third = Some(0);
            if self.telemetry.stop_on_collapse {
                self.finished = Some(Outcome::FrequencyCollapse { position: pos });
            }
        }
        if self.telemetry.record_trajectories {
            self.record_point();
        }
    }

    fn observe_distance(&mut self, scaled: i64) {
        let t = self.state.t;
        if self.first_dprime.is_none() && self.scaled_dprime.is_some_and(|d| scaled as f64 <= d) {
            self.first_dprime = Some(t);
        }
        if self.first_ddoubleprime.is_none() && self.scaled_ddoubleprime.is_some_and(|d| scaled as f64 <= d) {
            self.first_ddoubleprime = Some(t);
        }
    }

    fn record_point(&mut self) {
        let t = self.state.t;
        self.d_trajectory.push((t, self.state.freqs.distance_f64()));
        self.min_trajectory.push((t, self.state.freqs.min_frequency_f64()));
    }

    /// Runs at most `budget` further iterations.
    pub fn advance(&mut self, budget: u64) -> Advance {
        if self.finished.is_some() {
            return Advance { used: 0, solved: self.finished == Some(Outcome::OptimumFound) };
        }
        let mut scaled = self.state.freqs.scaled_distance();
        for used in 1..=budget {
            let ev = self.state.step(&self.fit);
            scaled -= ev.post_clamp_index_change();
            self.gap_samples += ev.gap_samples as u64;
            self.observe_distance(scaled);

            if self.first_below_third.is_none() {
                let grid = self.state.freqs.grid();
                if let Some(&pos) =
                    self.state.changed.iter().find(|&&i| grid.is_below_one_third(self.state.freqs.index(i)))
                {
                    self.first_below_third = Some(self.state.t);
                    if self.telemetry.stop_on_collapse && !ev.optimum_sampled {
                        self.finished = Some(Outcome::FrequencyCollapse { position: pos });
                    }
                }
            }
            if self.telemetry.record_trajectories && self.state.t.is_multiple_of(self.stride) {
                self.record_point();
            }
            if ev.optimum_sampled {
                self.finished = Some(Outcome::OptimumFound);
                return Advance { used, solved: true };
            }
            if self.finished.is_some() {
                return Advance { used, solved: false };
            }
        }
        Advance { used: budget, solved: false }
    }

    /// Finalizes the trace; an unfinished run counts as cap-limited.
    pub fn into_trace(mut self) -> RunTrace {
        let outcome = self.finished.unwrap_or(Outcome::IterationCapReached);
        let record = self.telemetry.record_trajectories;
        if record && self.d_trajectory.last().map(|p| p.0) != Some(self.state.t) {
            self.record_point();
        }
        let t = self.state.t;
        RunTrace {
            outcome,
            iterations: t,
            evaluations: 2 * t,
            d_trajectory: record.then_some(self.d_trajectory),
            min_frequency_trajectory: record.then_some(self.min_trajectory),
            first_t_d_le_dprime: self.first_dprime,
            first_t_d_le_ddoubleprime: self.first_ddoubleprime,
            gap_sample_count: self.gap_samples,
            first_t_any_freq_below_one_third: self.first_below_third,
        }
    }
}

impl BudgetedSolver for CgaRun {
    fn advance(&mut self, budget: u64) -> Advance {
        CgaRun::advance(self, budget)
    }
}

/// Runs the cGA until an offspring is the all-ones string or `iteration_cap`
/// iterations have elapsed (default `50 mu sqrt(n)`).
pub fn run_cga(
    fit: FitnessFunction,
    mu: u64,
    iteration_cap: Option<u64>,
    telemetry: TelemetryOptions,
    seed: u64,
) -> Result<RunTrace> {
    let cap = iteration_cap.unwrap_or_else(|| default_iteration_cap(fit.n(), mu));
    if cap == 0 {
        return Err(Error::InvalidArgument("iteration cap must be at least 1".into()));
    }
    let mut run = CgaRun::new(fit, mu, telemetry, seed)?;
    run.advance(cap);
    Ok(run.into_trace())
}
