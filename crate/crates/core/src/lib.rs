//! Simulation lab for the compact genetic algorithm with frequency
//! boundaries on OneMax and Jump.

pub mod baseline;
pub mod cga;
pub mod error;
pub mod fitness;
pub mod harness;
pub mod lab;
pub mod oracles;
pub mod report;
pub mod restart;
pub mod rng;

pub use cga::{run_cga, CgaRun, CgaState, Outcome, RunTrace, StepEvents, TelemetryOptions};
pub use error::{Error, Result};
pub use fitness::{is_well_behaved, make_well_behaved, BitString, FitnessFunction, FrequencyGrid, FrequencyVector};
