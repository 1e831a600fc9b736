use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hmm::{HmmModel, ObsRef};
use crate::particle::filter::StateSpaceModel;
use crate::rng::{categorical, seeded, PtRng};
use crate::scalar::Real;

/// Runs a discrete HMM through the particle filter; particles are state
/// indices.
#[derive(Debug, Clone, Copy)]
pub struct HmmBridge<'a, T> {
    pub model: &'a HmmModel<T>,
}

impl<T: Real> StateSpaceModel<T> for HmmBridge<'_, T> {
    type State = usize;
    type Obs = ObsRef<T>;

    fn sample_prior(&self, rng: &mut PtRng) -> usize {
        categorical(rng, self.model.init())
    }

    fn sample_transition(&self, x: &usize, rng: &mut PtRng) -> usize {
        categorical(rng, &self.model.trans()[*x])
    }

    fn likelihood(&self, x: &usize, obs: &ObsRef<T>) -> T {
        self.model.emission_prob(*x, *obs)
    }
}

/// 2D constant-velocity target observed through Gaussian noise, with each
/// measurement replaced by uniform clutter over a square arena with
/// probability `clutter`.
///
/// State is `[x, y, vx, vy]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + Deserialize<'de>"))]
pub struct TrackerModel<T> {
    pub dt: T,
    /// Std. dev. of the per-step velocity perturbation.
    pub process_std: T,
    /// Std. dev. of the measurement noise around the true position.
    pub obs_std: T,
    /// Clutter probability β ∈ [0, 1).
    pub clutter: T,
    /// Side length of the arena `[0, L]²`.
    pub arena: T,
    pub init_mean: [T; 4],
    pub init_std: [T; 4],
}

impl<T: Real> TrackerModel<T> {
    pub fn validate(&self) -> Result<()> {
        let pos = |v: T| v > T::zero() && v.is_finite();
        if !pos(self.dt) || !pos(self.obs_std) || !pos(self.arena) || !(self.process_std >= T::zero()) {
            return Err(Error::model("tracker scales must be positive"));
        }
        if !(self.clutter >= T::zero() && self.clutter < T::one()) {
            return Err(Error::model("clutter probability must lie in [0, 1)"));
        }
        if self.init_std.iter().any(|s| !(*s >= T::zero())) {
            return Err(Error::model("initial spreads must be non-negative"));
        }
        Ok(())
    }

    fn normal(rng: &mut PtRng) -> T {
        let z: f64 = StandardNormal.sample(rng);
        T::lit(z)
    }

    fn propagate(&self, x: &[T; 4], rng: &mut PtRng) -> [T; 4] {
        let vx = x[2] + self.process_std * Self::normal(rng);
        let vy = x[3] + self.process_std * Self::normal(rng);
        [x[0] + self.dt * vx, x[1] + self.dt * vy, vx, vy]
    }
}

impl<T: Real> StateSpaceModel<T> for TrackerModel<T> {
    type State = [T; 4];
    type Obs = [T; 2];

    fn sample_prior(&self, rng: &mut PtRng) -> [T; 4] {
        std::array::from_fn(|i| self.init_mean[i] + self.init_std[i] * Self::normal(rng))
    }

    fn sample_transition(&self, x: &[T; 4], rng: &mut PtRng) -> [T; 4] {
        self.propagate(x, rng)
    }

    fn likelihood(&self, x: &[T; 4], z: &[T; 2]) -> T {
        let var = self.obs_std * self.obs_std;
        let d2 = (z[0] - x[0]).powi(2) + (z[1] - x[1]).powi(2);
        let gauss = (-d2 / (T::lit(2.0) * var)).exp() / (T::lit(2.0 * std::f64::consts::PI) * var);
        (T::one() - self.clutter) * gauss + self.clutter / (self.arena * self.arena)
    }
}

/// Ground truth and measurements generated by the tracker model itself.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackerSimulation<T> {
    pub truth: Vec<[T; 4]>,
    pub observations: Vec<[T; 2]>,
    /// Which measurements are clutter.
    pub is_clutter: Vec<bool>,
}

pub fn simulate_tracker<T: Real>(model: &TrackerModel<T>, steps: usize, seed: u64) -> TrackerSimulation<T> {
    let mut rng = seeded(seed);
    let mut truth = Vec::with_capacity(steps);
    let mut observations = Vec::with_capacity(steps);
    let mut is_clutter = Vec::with_capacity(steps);
    let mut x = model.sample_prior(&mut rng);
    for k in 0..steps {
        if k > 0 {
            x = model.propagate(&x, &mut rng);
        }
        let clutter = rng.random::<f64>() < model.clutter.as_f64();
        let z = if clutter {
            [T::lit(rng.random::<f64>()) * model.arena, T::lit(rng.random::<f64>()) * model.arena]
        } else {
            let nx = TrackerModel::<T>::normal(&mut rng);
            let ny = TrackerModel::<T>::normal(&mut rng);
            [x[0] + model.obs_std * nx, x[1] + model.obs_std * ny]
        };
        truth.push(x);
        observations.push(z);
        is_clutter.push(clutter);
    }
    TrackerSimulation { truth, observations, is_clutter }
}
