//! Class generators, the generalization experiment, and the verification suite.

pub mod experiment;
pub mod generators;
pub mod suite;

pub use experiment::{generalization_experiment, required_sample_size, ExperimentConfig, ExperimentReport};
pub use generators::{generate, GeneratorSpec};
pub use suite::{run_suite, SuiteConfig, SuiteReport};
