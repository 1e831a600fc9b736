//! Mean-field and belief-propagation approximations for pairwise MRFs.

mod max_product;
mod mean_field;
mod model;
mod sum_product;

pub use max_product::{max_product, MaxProductResult};
pub use mean_field::{mean_field, mean_field_free_energy, MeanFieldResult};
pub use model::PairwiseModel;
pub use sum_product::{bethe_free_energy, loopy_bp, BpOptions, BpResult, BpStatus, EdgeMarginalSet};
