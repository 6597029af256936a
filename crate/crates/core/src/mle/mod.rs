//! Discrete receive grid, maximum-likelihood estimators and the Monte-Carlo
//! harness that compares them with the bounds.

pub mod estimator;
pub mod grid;
pub mod model;
pub mod monte_carlo;

pub use estimator::{estimate, MleConfig, Observation, OptimizerSettings, SearchBox, TrialResult};
pub use grid::{build_grid, noiseless_voltages, synthesize, ReceiverGrid, VoltageField};
pub use model::{log_likelihood, model_signal, EstimatorKind, SourceConstants};
pub use monte_carlo::{crb_z_component, monte_carlo, MleScenario, RmseSummary, ZObservation};
