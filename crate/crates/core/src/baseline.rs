//! (1+1) EA with standard-bit mutation (rate 1/n), the mutation-only baseline.

use rand::RngCore;

use crate::cga::{Outcome, RunTrace};
use crate::error::{Error, Result};
use crate::fitness::{BitString, FitnessFunction};
use crate::rng::{rng_from_seed, LabRng};

#[derive(Clone, Debug)]
pub struct EaState {
    pub current: BitString,
    pub current_fitness: i64,
    pub evaluations: u64,
}

/// Starts from a uniformly random string.
pub fn one_plus_one_ea(fit: FitnessFunction, evaluation_cap: u64, seed: u64) -> Result<RunTrace> {
    let mut rng = rng_from_seed(seed);
    let n = fit.n();
    let bits: Vec<bool> = (0..n).map(|_| rng.next_u64() >> 63 == 1).collect();
    let initial = BitString::new(bits)?;
    one_plus_one_ea_from(fit, initial, evaluation_cap, &mut rng)
}

/// The initial evaluation counts; every offspring costs one evaluation.
/// The run stops when the all-ones string has been evaluated or the cap is hit.
pub fn one_plus_one_ea_from(
    fit: FitnessFunction,
    initial: BitString,
    evaluation_cap: u64,
    rng: &mut LabRng,
) -> Result<RunTrace> {
    run_observed(fit, initial, evaluation_cap, rng, |_| {})
}

fn run_observed(
    fit: FitnessFunction,
    initial: BitString,
    evaluation_cap: u64,
    rng: &mut LabRng,
    mut observe: impl FnMut(&EaState),
) -> Result<RunTrace> {
    if evaluation_cap == 0 {
        return Err(Error::InvalidArgument("evaluation cap must be at least 1".into()));
    }
    let n = fit.n();
    let mut state = EaState { current_fitness: fit.evaluate(&initial)?, current: initial, evaluations: 1 };
    let mut found = state.current.is_all_ones();
    // P(flip) = 1/n as a 64-bit threshold
    let flip_threshold = ((1u128 << 64) / n as u128) as u64;
    let mut child = state.current.bits().to_vec();
    while !found && state.evaluations < evaluation_cap {
        child.copy_from_slice(state.current.bits());
        for b in child.iter_mut() {
            if rng.next_u64() < flip_threshold {
                *b = !*b;
            }
        }
        let offspring = BitString::new(child.clone())?;
        let value = fit.evaluate_ones(offspring.ones());
        state.evaluations += 1;
        found = offspring.is_all_ones();
        if value >= state.current_fitness {
            state.current = offspring;
            state.current_fitness = value;
        }
        observe(&state);
    }
    Ok(RunTrace {
        outcome: if found { Outcome::OptimumFound } else { Outcome::IterationCapReached },
        iterations: state.evaluations - 1,
        evaluations: state.evaluations,
        d_trajectory: None,
        min_frequency_trajectory: None,
        first_t_d_le_dprime: None,
        first_t_d_le_ddoubleprime: None,
        gap_sample_count: 0,
        first_t_any_freq_below_one_third: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn starting_at_optimum_costs_one_evaluation() {
        let fit = FitnessFunction::jump(20, 3).unwrap();
        let mut rng = rng_from_seed(0);
        let t = one_plus_one_ea_from(fit, BitString::all_ones(20).unwrap(), 100, &mut rng).unwrap();
        assert!(t.succeeded());
        assert_eq!(t.evaluations, 1);
        assert_eq!(t.iterations, 0);
    }

    #[test]
    fn cap_is_respected() {
        let fit = FitnessFunction::jump(30, 5).unwrap();
        let t = one_plus_one_ea(fit, 500, 1).unwrap();
        assert_eq!(t.outcome, Outcome::IterationCapReached);
        assert_eq!(t.evaluations, 500);
        assert!(one_plus_one_ea(fit, 0, 1).is_err());
    }

    #[test]
    fn deterministic_under_seed() {
        let fit = FitnessFunction::onemax(40).unwrap();
        assert_eq!(one_plus_one_ea(fit, 100_000, 9).unwrap(), one_plus_one_ea(fit, 100_000, 9).unwrap());
    }

    #[test]
    fn onemax_median_near_e_n_ln_n() {
        let n = 64;
        let fit = FitnessFunction::onemax(n).unwrap();
        let mut evals: Vec<u64> = (0..200)
            .map(|s| {
                let t = one_plus_one_ea(fit, 1_000_000, s).unwrap();
                assert!(t.succeeded());
                t.evaluations
            })
            .collect();
        evals.sort_unstable();
        let median = (evals[99] + evals[100]) as f64 / 2.0;
        let reference = std::f64::consts::E * n as f64 * (n as f64).ln();
        assert!(median >= 0.5 * reference && median <= 2.0 * reference, "median {median}");
    }

    #[test]
    fn incumbent_fitness_never_decreases() {
        let fit = FitnessFunction::jump(12, 3).unwrap();
        let mut last = i64::MIN;
        let mut steps = 0;
        run_observed(fit, BitString::zeros(12).unwrap(), 20_000, &mut rng_from_seed(4), |s| {
            assert!(s.current_fitness >= last);
            assert_eq!(s.current_fitness, fit.evaluate(&s.current).unwrap());
            last = s.current_fitness;
            steps += 1;
        })
        .unwrap();
        assert!(steps > 0);
    }
}
