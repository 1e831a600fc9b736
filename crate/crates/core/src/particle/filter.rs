use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::{substream, PtRng};
use crate::scalar::{normalize, Real};

/// A state-space model driven by seeded samplers.
///
/// Samplers receive a dedicated generator per particle, so propagation can
/// run on any number of threads without changing the result.
pub trait StateSpaceModel<T: Real>: Sync {
    type State: Clone + Send + Sync;
    type Obs: ?Sized + Sync;

    fn sample_prior(&self, rng: &mut PtRng) -> Self::State;
    fn sample_transition(&self, x: &Self::State, rng: &mut PtRng) -> Self::State;
    /// `p(ŝ | x) ≥ 0`.
    fn likelihood(&self, x: &Self::State, obs: &Self::Obs) -> T;
}

/// Weighted sample `Σ w_i δ_{x_i}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleSet<S, T> {
    pub particles: Vec<S>,
    pub weights: Vec<T>,
}

impl<S, T: Real> ParticleSet<S, T> {
    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    /// `Σ w_i f(x_i)`.
    pub fn expectation(&self, f: impl Fn(&S) -> T) -> T {
        self.particles.iter().zip(&self.weights).map(|(x, &w)| w * f(x)).sum()
    }
}

/// `1 / Σ w_i²`, in `[1, N]` for normalized weights.
pub fn effective_sample_size<S, T: Real>(set: &ParticleSet<S, T>) -> T {
    let s: T = set.weights.iter().map(|&w| w * w).sum();
    T::one() / s
}

/// Resampling scheme used in the first phase of each step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Resampling {
    /// One uniform offset, `N` evenly spaced pointers.
    #[default]
    Systematic,
    /// `N` independent draws with replacement.
    Multinomial,
}

const RESAMPLE_STREAM: u64 = u64::MAX;

fn resample_indices<T: Real>(weights: &[T], n: usize, scheme: Resampling, rng: &mut PtRng) -> Vec<usize> {
    let mut cdf = Vec::with_capacity(weights.len());
    let mut acc = 0.0;
    for w in weights {
        acc += w.as_f64();
        cdf.push(acc);
    }
    let total = acc;
    let pick = |u: f64| -> usize {
        // first index with cdf > u, skipping zero-weight entries
        let i = cdf.partition_point(|&c| c <= u);
        i.min(cdf.len() - 1)
    };
    match scheme {
        Resampling::Systematic => {
            let u0: f64 = rng.random();
            (0..n).map(|i| pick((i as f64 + u0) / n as f64 * total)).collect()
        }
        Resampling::Multinomial => (0..n).map(|_| pick(rng.random::<f64>() * total)).collect(),
    }
}

fn reweight<M, T>(model: &M, particles: &[M::State], obs: &M::Obs, step: usize) -> Result<Vec<T>>
where
    T: Real,
    M: StateSpaceModel<T>,
{
    let mut weights: Vec<T> = particles.par_iter().map(|x| model.likelihood(x, obs)).collect();
    if weights.iter().any(|w| !(*w >= T::zero()) || !w.is_finite()) {
        return Err(Error::model(format!("likelihood negative or non-finite at step {step}")));
    }
    if !(normalize(&mut weights) > T::zero()) {
        return Err(Error::ParticleCollapse { step });
    }
    Ok(weights)
}

/// Step 0: draw from the prior and weight by the first observation.
pub fn initialize<M, T>(model: &M, num_particles: usize, obs: &M::Obs, seed: u64) -> Result<ParticleSet<M::State, T>>
where
    T: Real,
    M: StateSpaceModel<T>,
{
    if num_particles == 0 {
        return Err(Error::input("particle count must be at least 1"));
    }
    let particles: Vec<M::State> = (0..num_particles)
        .into_par_iter()
        .map(|i| model.sample_prior(&mut substream(seed, 0, i as u64)))
        .collect();
    let weights = reweight(model, &particles, obs, 0)?;
    Ok(ParticleSet { particles, weights })
}

/// One bootstrap step: resample with replacement by weight, propagate each
/// particle through the transition prior, reweight by the observation
/// likelihood, renormalize. `step` (≥ 1) selects the random streams and is
/// reported on collapse.
pub fn bootstrap_step<M, T>(
    model: &M,
    set: &ParticleSet<M::State, T>,
    obs: &M::Obs,
    seed: u64,
    step: usize,
    scheme: Resampling,
) -> Result<ParticleSet<M::State, T>>
where
    T: Real,
    M: StateSpaceModel<T>,
{
    let n = set.len();
    if n == 0 {
        return Err(Error::input("particle count must be at least 1"));
    }
    let epoch = step as u64;
    let idx = resample_indices(&set.weights, n, scheme, &mut substream(seed, epoch, RESAMPLE_STREAM));
    let particles: Vec<M::State> = idx
        .par_iter()
        .enumerate()
        .map(|(i, &j)| model.sample_transition(&set.particles[j], &mut substream(seed, epoch, i as u64)))
        .collect();
    let weights = reweight(model, &particles, obs, step)?;
    Ok(ParticleSet { particles, weights })
}

/// Full filter output.
#[derive(Debug, Clone)]
pub struct FilterRun<S, T> {
    pub sets: Vec<ParticleSet<S, T>>,
    /// `expectations[k]` holds the weighted means of the selected coordinate
    /// functions at step `k`.
    pub expectations: Vec<Vec<T>>,
    pub ess: Vec<T>,
}

/// Chains [`initialize`] and [`bootstrap_step`] over an observation sequence.
pub fn run_filter<M, T, O, F>(
    model: &M,
    observations: &[O],
    num_particles: usize,
    seed: u64,
    scheme: Resampling,
    coordinates: F,
) -> Result<FilterRun<M::State, T>>
where
    T: Real,
    M: StateSpaceModel<T, Obs = O>,
    O: Sync,
    F: Fn(&M::State) -> Vec<T>,
{
    let mut sets = Vec::with_capacity(observations.len());
    let mut expectations = Vec::with_capacity(observations.len());
    let mut ess = Vec::with_capacity(observations.len());
    for (k, obs) in observations.iter().enumerate() {
        let set = if k == 0 {
            initialize(model, num_particles, obs, seed)?
        } else {
            bootstrap_step(model, &sets[k - 1], obs, seed, k, scheme)?
        };
        let mut means: Vec<T> = Vec::new();
        for (x, &w) in set.particles.iter().zip(&set.weights) {
            let c = coordinates(x);
            if means.is_empty() {
                means = vec![T::zero(); c.len()];
            }
            for (m, v) in means.iter_mut().zip(c) {
                *m += w * v;
            }
        }
        expectations.push(means);
        ess.push(effective_sample_size(&set));
        sets.push(set);
    }
    Ok(FilterRun { sets, expectations, ess })
}
