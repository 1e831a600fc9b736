//! Markov random fields in Gibbs form and the Ising segmentation model.

mod function_fit;
mod gibbs;
mod ising;

pub use function_fit::{fit_function_exponential, FunctionPotential};
pub use gibbs::{CliqueTerm, ExactMarginals, GibbsModel, ENUMERATION_LIMIT};
pub use ising::{
    normalize_field, segment_image, AnnealResult, AnnealSchedule, IsingGrid, SpinField, SweepOrder,
    DEFAULT_SWEEPS_PER_TEMP,
};
