//! Exponential models on a finite space, fitted by expectation matching.

use crate::error::{Error, Result};
use crate::scalar::{log_sum_exp, Real};

/// `p_θ(x) = exp(Σ_k θ_k E_k(x)) / Z(θ)` on the states `0..size`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentialModel<T> {
    /// `features[k][x] = E_k(x)`.
    features: Vec<Vec<T>>,
    theta: Vec<T>,
}

impl<T: Real> ExponentialModel<T> {
    pub fn new(features: Vec<Vec<T>>, theta: Vec<T>) -> Result<Self> {
        let size = features.first().map_or(0, Vec::len);
        if size == 0 || features.iter().any(|f| f.len() != size) {
            return Err(Error::model("features must be non-empty tables over one state space"));
        }
        if theta.len() != features.len() {
            return Err(Error::model("one parameter per feature"));
        }
        if features.iter().flatten().chain(&theta).any(|v| !v.is_finite()) {
            return Err(Error::model("features and parameters must be finite"));
        }
        Ok(Self { features, theta })
    }

    pub fn theta(&self) -> &[T] {
        &self.theta
    }

    pub fn size(&self) -> usize {
        self.features[0].len()
    }

    fn energies(&self) -> Vec<T> {
        (0..self.size())
            .map(|x| self.features.iter().zip(&self.theta).map(|(f, &t)| t * f[x]).sum())
            .collect()
    }

    pub fn log_partition(&self) -> T {
        log_sum_exp(&self.energies())
    }

    pub fn probabilities(&self) -> Vec<T> {
        let e = self.energies();
        let lz = log_sum_exp(&e);
        e.into_iter().map(|v| (v - lz).exp()).collect()
    }

    /// `Exp_θ(E_k)` for every feature.
    pub fn expectations(&self) -> Vec<T> {
        let p = self.probabilities();
        self.features.iter().map(|f| f.iter().zip(&p).map(|(&e, &q)| e * q).sum()).collect()
    }

    /// Average log-likelihood of data whose feature means are `targets`.
    pub fn objective(&self, targets: &[T]) -> T {
        self.theta.iter().zip(targets).map(|(&t, &e)| t * e).sum::<T>() - self.log_partition()
    }

    /// `Ê_k − Exp_θ(E_k)`.
    pub fn gradient(&self, targets: &[T]) -> Vec<T> {
        targets.iter().zip(self.expectations()).map(|(&t, e)| t - e).collect()
    }
}

const MAX_ITERS: usize = 100_000;

/// Fits θ so that the model expectations match `targets` within `tol`
/// (max-norm of the gradient), by gradient ascent with initial step 0.5 and
/// backtracking halving.
pub fn fit_exponential<T: Real>(features: Vec<Vec<T>>, targets: &[T], tol: T) -> Result<ExponentialModel<T>> {
    if targets.len() != features.len() {
        return Err(Error::input("one target expectation per feature"));
    }
    let k = features.len();
    let mut model = ExponentialModel::new(features, vec![T::zero(); k])?;
    let mut value = model.objective(targets);
    let mut residual = T::infinity();
    for _ in 0..MAX_ITERS {
        let grad = model.gradient(targets);
        residual = grad.iter().fold(T::zero(), |m, g| m.max(g.abs()));
        if residual <= tol {
            return Ok(model);
        }
        let mut step = T::lit(0.5);
        let slack = T::epsilon() * T::lit(4.0) * (T::one() + value.abs());
        loop {
            let theta: Vec<T> = model.theta.iter().zip(&grad).map(|(&t, &g)| t + step * g).collect();
            let trial = ExponentialModel { features: model.features.clone(), theta };
            let v = trial.objective(targets);
            // halve until the step does not decrease the objective (up to rounding)
            if v >= value - slack || step < T::lit(1e-12) {
                model = trial;
                value = v;
                break;
            }
            step *= T::lit(0.5);
        }
    }
    Err(Error::NotConverged { iterations: MAX_ITERS, residual: residual.as_f64() })
}
