//! Bootstrap particle filtering.

mod filter;
mod kde;
mod models;

pub use filter::{
    bootstrap_step, effective_sample_size, initialize, run_filter, FilterRun, ParticleSet, Resampling,
    StateSpaceModel,
};
pub use kde::{kde_1d, kde_2d, trapezoid_1d, trapezoid_2d};
pub use models::{simulate_tracker, HmmBridge, TrackerModel, TrackerSimulation};
