//! Discrete hidden Markov models, the Kalman filter, and exponential models.

mod em;
mod exponential;
mod inference;
mod kalman;
mod model;
mod sample;

pub use em::{baum_welch, fit_supervised, BaumWelchFit};
pub use exponential::{fit_exponential, ExponentialModel};
pub use inference::{
    backward_smooth, backward_table, forward_filter, forward_table, log_likelihood, smooth_table, viterbi,
    viterbi_table, PosteriorSequence,
};
pub use kalman::{kalman_filter, GaussianBelief, LinearGaussianModel};
pub use model::{Emission, HmmModel, ObsRef, Observations};
pub use sample::hmm_sample;
