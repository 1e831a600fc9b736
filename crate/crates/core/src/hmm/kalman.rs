//! The linear-Gaussian special case of the filtering recursion.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::scalar::Real;

/// `x_{k+1} = A x_k + w`, `w ~ N(0, Q)`; `y_k = C x_k + v`, `v ~ N(0, R)`;
/// `x_1 ~ N(mean0, cov0)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + Deserialize<'de>"))]
pub struct LinearGaussianModel<T> {
    pub a: Mat<T>,
    pub q: Mat<T>,
    pub c: Mat<T>,
    pub r: Mat<T>,
    pub mean0: Vec<T>,
    pub cov0: Mat<T>,
}

impl<T: Real> LinearGaussianModel<T> {
    pub fn new(a: Mat<T>, q: Mat<T>, c: Mat<T>, r: Mat<T>, mean0: Vec<T>, cov0: Mat<T>) -> Result<Self> {
        let d = mean0.len();
        let m = c.rows();
        let square = |x: &Mat<T>, n: usize| x.rows() == n && x.cols() == n;
        if !square(&a, d) || !square(&q, d) || !square(&cov0, d) || c.cols() != d || !square(&r, m) {
            return Err(Error::model("inconsistent state/observation dimensions"));
        }
        let tol = T::lit(1e-12);
        if q.max_asymmetry() > tol || r.max_asymmetry() > tol || cov0.max_asymmetry() > tol {
            return Err(Error::model("covariances must be symmetric"));
        }
        // PSD check for Q and P0: factor with a vanishing ridge
        for (name, cov) in [("Q", &q), ("initial covariance", &cov0)] {
            let scale = (0..d).map(|i| cov[(i, i)].abs()).fold(T::one(), T::max);
            let ridge = Mat::identity(d).scale(scale * T::lit(1e-10));
            if cov.add(&ridge).cholesky().is_err() {
                return Err(Error::model(format!("{name} is not positive semi-definite")));
            }
        }
        if r.cholesky().is_err() {
            return Err(Error::model("R must be positive definite"));
        }
        Ok(Self { a, q, c, r, mean0, cov0 })
    }

    pub fn state_dim(&self) -> usize {
        self.mean0.len()
    }

    pub fn obs_dim(&self) -> usize {
        self.c.rows()
    }
}

/// Filtered posterior `N(mean, cov)` of `x_k` given `y_{≤k}`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianBelief<T> {
    pub mean: Vec<T>,
    pub cov: Mat<T>,
}

/// Predict/update recursion with the Joseph-form covariance update; each
/// covariance is symmetrized before it is stored.
pub fn kalman_filter<T: Real>(model: &LinearGaussianModel<T>, obs: &[Vec<T>]) -> Result<Vec<GaussianBelief<T>>> {
    let d = model.state_dim();
    let eye = Mat::identity(d);
    let ct = model.c.transpose();
    let at = model.a.transpose();
    let mut mean = model.mean0.clone();
    let mut cov = model.cov0.clone();
    let mut out = Vec::with_capacity(obs.len());
    for (k, y) in obs.iter().enumerate() {
        if y.len() != model.obs_dim() {
            return Err(Error::input(format!(
                "observation {k} has dimension {} (expected {})",
                y.len(),
                model.obs_dim()
            )));
        }
        if k > 0 {
            mean = model.a.mul_vec(&mean);
            cov = model.a.matmul(&cov).matmul(&at).add(&model.q).symmetrized();
        }
        let pct = cov.matmul(&ct);
        let s = model.c.matmul(&pct).add(&model.r).symmetrized();
        let chol = s.cholesky().map_err(|_| Error::SingularInnovation { step: k })?;
        // K = P Cᵀ S⁻¹ = (S⁻¹ C P)ᵀ
        let gain = chol.solve(&pct.transpose()).transpose();
        let predicted = model.c.mul_vec(&mean);
        let innovation: Vec<T> = y.iter().zip(&predicted).map(|(&a, &b)| a - b).collect();
        let correction = gain.mul_vec(&innovation);
        mean = mean.iter().zip(&correction).map(|(&m, &c)| m + c).collect();
        let ikc = eye.sub(&gain.matmul(&model.c));
        cov = ikc
            .matmul(&cov)
            .matmul(&ikc.transpose())
            .add(&gain.matmul(&model.r).matmul(&gain.transpose()))
            .symmetrized();
        out.push(GaussianBelief { mean: mean.clone(), cov: cov.clone() });
    }
    Ok(out)
}
