//! Image rasters, natural-image statistics, synthesis models, and diffusion.

mod diffuse;
mod grid;
pub mod io;
mod spectrum;
mod stats;
mod synth;

pub use diffuse::{diffuse, diffusion_energy, max_stable_dt, DiffusionResult};
pub use grid::ImageGrid;
pub use spectrum::{power_spectrum_slope, SpectralFit, HIGH_RESIDUAL};
pub use stats::{block_renormalize, central_bin_ratio, filter_bank, kurtosis, Filter};
pub use synth::{
    render_leaves, render_primitives, sample_leaves, sample_primitives, synth_dead_leaves, synth_random_wavelets,
    DeadLeavesImage, DeadLeavesSpec, Leaf, Primitive, WaveletProcessSpec, MAX_UNCOVERED,
};
