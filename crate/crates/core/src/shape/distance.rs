use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::scalar::Real;
use crate::shape::{kinetic_energy, momenta_for_velocities, shoot_endpoint, KernelSpec, LandmarkState};

#[derive(Debug, Clone, PartialEq)]
pub struct ShootingOptions {
    pub max_iters: usize,
    /// Endpoint residual `‖P(1) − target‖` counted as matched.
    pub tol: f64,
    /// Integration step for each shot.
    pub dt: f64,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        Self { max_iters: 50, tol: 1e-11, dt: 1e-3 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicMatch<T> {
    /// Path length `2·sqrt(H(u₀))` of the unit-time geodesic.
    pub distance: T,
    pub energy: T,
    pub momentum: Vec<T>,
    pub residual: T,
    pub iterations: usize,
    pub matched: bool,
}

fn endpoint_residual<T: Real>(dim: usize, start: &[T], u: &[T], target: &[T], kernel: &KernelSpec, dt: T) -> Result<Vec<T>> {
    let s = LandmarkState { dim, points: start.to_vec(), momenta: u.to_vec() };
    let end = shoot_endpoint(&s, kernel, T::one(), dt)?;
    Ok(end.points.iter().zip(target).map(|(&a, &b)| a - b).collect())
}

fn norm<T: Real>(v: &[T]) -> T {
    v.iter().map(|&x| x * x).sum::<T>().sqrt()
}

/// Geodesic distance between two landmark configurations by shooting: finds
/// initial momenta `u₀` whose unit-time geodesic from `start` ends at
/// `target`. Newton iterations on the endpoint map with a central-difference
/// Jacobian and backtracking on the residual, started from the linearized
/// solution `u₀ = K⁻¹ΔP/2`. An unmatched result carries the best iterate.
pub fn geodesic_distance<T: Real>(
    dim: usize,
    start: &[T],
    target: &[T],
    kernel: &KernelSpec,
    opts: &ShootingOptions,
) -> Result<GeodesicMatch<T>> {
    if start.len() != target.len() {
        return Err(Error::input("start and target need the same number of landmarks"));
    }
    LandmarkState::at_rest(dim, start.to_vec())?;
    LandmarkState::at_rest(dim, target.to_vec())?;
    let dt = T::lit(opts.dt);
    let m = start.len();
    let delta: Vec<T> = target.iter().zip(start).map(|(&b, &a)| b - a).collect();
    let mut u = momenta_for_velocities(dim, start, &delta, kernel)?;
    let mut f = endpoint_residual(dim, start, &u, target, kernel, dt)?;
    let mut res = norm(&f);
    let tol = T::lit(opts.tol);
    let mut iterations = 0;
    while res > tol && iterations < opts.max_iters {
        iterations += 1;
        let scale = norm(&u).max(T::one());
        let h = T::lit(1e-6) * scale;
        let mut jac = Mat::zeros(m, m);
        for c in 0..m {
            let mut up = u.clone();
            up[c] += h;
            let fp = endpoint_residual(dim, start, &up, target, kernel, dt)?;
            up[c] -= h + h;
            let fm = endpoint_residual(dim, start, &up, target, kernel, dt)?;
            for r in 0..m {
                jac[(r, c)] = (fp[r] - fm[r]) / (h + h);
            }
        }
        let neg: Vec<T> = f.iter().map(|&x| -x).collect();
        let step = jac.solve_vec(&neg)?;
        let mut alpha = T::one();
        let mut improved = false;
        for _ in 0..30 {
            let trial: Vec<T> = u.iter().zip(&step).map(|(&a, &d)| a + alpha * d).collect();
            if let Ok(ft) = endpoint_residual(dim, start, &trial, target, kernel, dt) {
                let rt = norm(&ft);
                if rt < res {
                    u = trial;
                    f = ft;
                    res = rt;
                    improved = true;
                    break;
                }
            }
            alpha *= T::lit(0.5);
        }
        if !improved {
            break;
        }
    }
    let state = LandmarkState { dim, points: start.to_vec(), momenta: u.clone() };
    let energy = kinetic_energy(&state, kernel)?;
    Ok(GeodesicMatch {
        distance: T::lit(2.0) * energy.max(T::zero()).sqrt(),
        energy,
        momentum: u,
        residual: res,
        iterations,
        matched: res <= tol,
    })
}
