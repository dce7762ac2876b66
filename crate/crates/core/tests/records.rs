use cga_lab::cga::Outcome;
use cga_lab::harness::{run_experiment, Algorithm, ExperimentConfig, MuRule, ProblemSpec, RunRecord};
use cga_lab::report::{emit_records, load_records, parse_records, records_to_string};
use cga_lab::{FitnessFunction, RunTrace};
use proptest::prelude::*;

#[test]
fn three_hundred_records_round_trip_through_a_file() {
    let mut cfg = ExperimentConfig::new(vec![ProblemSpec::onemax(), ProblemSpec::jump(2)], vec![8, 10, 12], 50, 77);
    cfg.mu = MuRule { factor: 2.0, fixed: None };
    cfg.telemetry.record_trajectories = true;
    let recs = run_experiment(&cfg).unwrap();
    assert_eq!(recs.len(), 300);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("records.jsonl");
    emit_records(&recs, &path).unwrap();
    let back = load_records(&path).unwrap();
    assert_eq!(back, recs);
    let again = dir.path().join("again.jsonl");
    emit_records(&back, &again).unwrap();
    assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&again).unwrap());
}

#[test]
fn empty_file_loads_as_no_records() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.jsonl");
    emit_records(&[], &path).unwrap();
    assert_eq!(std::fs::metadata(&path).unwrap().len(), 0);
    assert!(load_records(&path).unwrap().is_empty());
}

fn outcome() -> impl Strategy<Value = Outcome> {
    prop_oneof![
        Just(Outcome::OptimumFound),
        Just(Outcome::IterationCapReached),
        (0usize..1000).prop_map(|position| Outcome::FrequencyCollapse { position }),
    ]
}

prop_compose! {
    fn record()(
        n in 3usize..2000,
        jump in any::<bool>(),
        outcome in outcome(),
        iterations in any::<u64>(),
        seed in any::<u64>(),
        traj in proptest::option::of(proptest::collection::vec((any::<u64>(), any::<f64>().prop_filter("finite", |x| x.is_finite())), 0..20)),
        crossing in proptest::option::of(any::<u64>()),
    ) -> RunRecord {
        let problem = if jump { FitnessFunction::Jump { n, k: 2 } } else { FitnessFunction::OneMax { n } };
        RunRecord {
            algorithm: Algorithm::Cga,
            problem,
            n,
            k: problem.k(),
            mu: Some(n as u64),
            mu_requested: Some(n as u64 - 1),
            seed_index: seed % 100,
            seed,
            cap: iterations,
            trace: Some(RunTrace {
                outcome,
                iterations,
                evaluations: iterations.wrapping_mul(2),
                d_trajectory: traj.clone(),
                min_frequency_trajectory: traj,
                first_t_d_le_dprime: crossing,
                first_t_d_le_ddoubleprime: crossing,
                gap_sample_count: seed >> 3,
                first_t_any_freq_below_one_third: None,
            }),
            error: None,
        }
    }
}

proptest! {
    #[test]
    fn any_record_round_trips(recs in proptest::collection::vec(record(), 0..8)) {
        let text = records_to_string(&recs).unwrap();
        prop_assert_eq!(parse_records(&text).unwrap(), recs);
    }
}
