//! Projected stochastic gradient descent for strongly convex stochastic
//! optimization, with every common way of turning the iterate sequence into
//! a single answer: the last iterate, the full average, suffix averages and
//! epoch-based suffixes, plus the epoch-doubling baseline.
//!
//! The crate bundles:
//! - a zoo of benchmark problems (smooth quadratic, two adversarial
//!   non-smooth constructions, hinge-loss SVM over svmlight data), each with
//!   a stochastic gradient oracle whose expectation is a subgradient;
//! - closed-form rate bounds used as oracles by the conformance checks;
//! - a deterministic, seedable experiment harness that aggregates replicate
//!   runs, fits convergence exponents, checks the bounds, and emits
//!   reproducible CSVs.

pub mod averaging;
pub mod bounds;
pub mod domain;
pub mod epoch;
pub mod harness;
pub mod problems;
pub mod rng;
pub mod schedule;
pub mod solver;
pub mod svmlight;
pub mod vector;

pub use averaging::AveragingScheme;
pub use domain::Domain;
pub use epoch::{run_epoch_gd, EpochGdConfig};
pub use harness::{run_experiment, ExperimentSpec, HarnessError, Report};
pub use problems::Problem;
pub use rng::{derive_replicate_stream, RngStream};
pub use schedule::StepSchedule;
pub use solver::{run_sgd, InitPolicy, RunConfig, RunResult};
pub use svmlight::Dataset;
pub use vector::Vector;
