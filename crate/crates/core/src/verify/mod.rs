//! Experiment harness: parameter gate, Schauder ratios, moment decay,
//! regularity-lemma checks and mollified convergence, with JSON/CSV reports.

pub mod config;
pub mod convergence;
pub mod cru;
pub mod gate;
pub mod regularity;
pub mod report;
pub mod schauder;

pub use config::{schema_sections, ExperimentConfig, SCHEMA};
pub use gate::{check_parameter_gate, GateDecision, GateViolation};
pub use report::{Check, Criterion, ExperimentReport};
pub use regularity::run_regularity_suite;
pub use schauder::{run_schauder_experiment, schauder_csv, SchauderRow};
pub use cru::{cru_decay_csv, run_cru_experiment, s_nodes, DecayRow};
pub use convergence::{run_mollified_convergence, window_distance};
