//! Mixed membership stochastic blockmodels for streaming dyad observations.
//!
//! The collapsed model state lives in [`model`]. [`gibbs`] holds batch and
//! incremental collapsed Gibbs samplers, [`smc`] the particle filter, and
//! [`drift`] the change test and history deletion used by the
//! time-dependent variants. [`stream`] loads, generates and splits data;
//! [`eval`] and [`experiment`] score runs against held-out dyads.

pub mod config;
pub mod drift;
pub mod error;
pub mod eval;
pub mod experiment;
pub mod gibbs;
pub mod model;
pub mod rng;
pub mod smc;
pub mod stream;

pub use config::{Algorithm, RunConfig};
pub use error::{Error, Result};
pub use eval::{EvalReport, IntervalScore};
pub use experiment::{run_experiment, run_grid, score_run, GridSpec};
pub use model::{Assignment, Dyad, DyadRecord, Hyperparams, ModelState, NodeId, Origin};
