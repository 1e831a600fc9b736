use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::scalar::Real;
use crate::shape::KernelSpec;

/// Points closer than this count as a collision.
pub const MIN_SEPARATION: f64 = 1e-9;

/// `N` points in `R^dim` with one momentum vector each, stored flat
/// (point `i` occupies `dim·i .. dim·(i+1)`).
#[derive(Debug, Clone, PartialEq)]
pub struct LandmarkState<T> {
    pub dim: usize,
    pub points: Vec<T>,
    pub momenta: Vec<T>,
}

impl<T: Real> LandmarkState<T> {
    pub fn new(dim: usize, points: Vec<T>, momenta: Vec<T>) -> Result<Self> {
        if dim == 0 || points.is_empty() || !points.len().is_multiple_of(dim) {
            return Err(Error::input("points must be a non-empty list of dim-vectors"));
        }
        if momenta.len() != points.len() {
            return Err(Error::input("need one momentum per point"));
        }
        if points.iter().chain(&momenta).any(|v| !v.is_finite()) {
            return Err(Error::input("coordinates must be finite"));
        }
        let s = Self { dim, points, momenta };
        let d = s.min_separation();
        if d < T::lit(MIN_SEPARATION) {
            return Err(Error::input(format!("landmarks coincide (separation {d})")));
        }
        Ok(s)
    }

    /// State with zero momenta.
    pub fn at_rest(dim: usize, points: Vec<T>) -> Result<Self> {
        let n = points.len();
        Self::new(dim, points, vec![T::zero(); n])
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> &[T] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn momentum(&self, i: usize) -> &[T] {
        &self.momenta[i * self.dim..(i + 1) * self.dim]
    }

    pub fn min_separation(&self) -> T {
        min_separation(&self.points, self.dim)
    }

    /// `Σ_i u_i`.
    pub fn total_momentum(&self) -> Vec<T> {
        let mut s = vec![T::zero(); self.dim];
        for i in 0..self.len() {
            for (a, &u) in s.iter_mut().zip(self.momentum(i)) {
                *a += u;
            }
        }
        s
    }
}

pub(crate) fn min_separation<T: Real>(points: &[T], dim: usize) -> T {
    let n = points.len() / dim;
    let mut best = T::infinity();
    for i in 0..n {
        for j in i + 1..n {
            best = best.min(distance(&points[i * dim..(i + 1) * dim], &points[j * dim..(j + 1) * dim]));
        }
    }
    best
}

fn distance<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| (x - y) * (x - y)).sum::<T>().sqrt()
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

/// Gram matrix `K_ij = K(‖P_i − P_j‖)`; its inverse is the metric `G`.
pub fn cometric<T: Real>(dim: usize, points: &[T], kernel: &KernelSpec) -> Result<Mat<T>> {
    if dim == 0 || !points.len().is_multiple_of(dim) || points.is_empty() {
        return Err(Error::input("points must be a non-empty list of dim-vectors"));
    }
    let n = points.len() / dim;
    let d = min_separation(points, dim);
    if d < T::lit(MIN_SEPARATION) {
        return Err(Error::SingularMatrix(format!("coincident landmarks (separation {d})")));
    }
    Ok(Mat::from_fn(n, n, |i, j| kernel.value(distance(&points[i * dim..(i + 1) * dim], &points[j * dim..(j + 1) * dim]))))
}

/// `H = Σ_ij K_ij (u_i·u_j)`.
pub fn kinetic_energy<T: Real>(state: &LandmarkState<T>, kernel: &KernelSpec) -> Result<T> {
    let k = cometric(state.dim, &state.points, kernel)?;
    Ok(energy_with(&k, state))
}

fn energy_with<T: Real>(k: &Mat<T>, state: &LandmarkState<T>) -> T {
    let n = state.len();
    let mut h = T::zero();
    for i in 0..n {
        for j in 0..n {
            h += k[(i, j)] * dot(state.momentum(i), state.momentum(j));
        }
    }
    h
}

/// Landmark velocities `v_i = 2 Σ_j K_ij u_j`.
pub fn velocities<T: Real>(state: &LandmarkState<T>, kernel: &KernelSpec) -> Result<Vec<T>> {
    let k = cometric(state.dim, &state.points, kernel)?;
    let (n, dim) = (state.len(), state.dim);
    let mut v = vec![T::zero(); n * dim];
    for i in 0..n {
        for j in 0..n {
            for a in 0..dim {
                v[i * dim + a] += T::lit(2.0) * k[(i, j)] * state.momenta[j * dim + a];
            }
        }
    }
    Ok(v)
}

/// Momenta producing velocities `v`: `u = K⁻¹ v / 2`.
pub fn momenta_for_velocities<T: Real>(dim: usize, points: &[T], v: &[T], kernel: &KernelSpec) -> Result<Vec<T>> {
    let k = cometric(dim, points, kernel)?;
    let chol = k.cholesky()?;
    let n = points.len() / dim;
    let mut u = vec![T::zero(); n * dim];
    for a in 0..dim {
        let col: Vec<T> = (0..n).map(|i| v[i * dim + a]).collect();
        for (i, x) in chol.solve_vec(&col).into_iter().enumerate() {
            u[i * dim + a] = x * T::lit(0.5);
        }
    }
    Ok(u)
}

/// Quotient-metric quadratic form `Σ_ij G_ij (v_i·v_j)` with `G = K⁻¹`.
pub fn metric_form<T: Real>(dim: usize, points: &[T], v: &[T], kernel: &KernelSpec) -> Result<T> {
    let u = momenta_for_velocities(dim, points, v, kernel)?;
    // v·G v = v·(2u)
    Ok(T::lit(2.0) * dot(v, &u))
}

/// Right-hand side of the landmark geodesic equations (Hamilton's equations
/// for `H`): `dP_i/dt = 2 Σ_j K_ij u_j`,
/// `du_i/dt = −2 Σ_j ∇_{P_i} K(‖P_i − P_j‖) (u_i·u_j)`.
/// `y` holds all points then all momenta.
pub(crate) fn vector_field<T: Real>(dim: usize, kernel: &KernelSpec, y: &[T], dy: &mut [T]) {
    let m = y.len() / 2;
    let n = m / dim;
    let (p, u) = y.split_at(m);
    let (dp, du) = dy.split_at_mut(m);
    dp.iter_mut().chain(du.iter_mut()).for_each(|v| *v = T::zero());
    let two = T::lit(2.0);
    for i in 0..n {
        let pi = &p[i * dim..(i + 1) * dim];
        let ui = &u[i * dim..(i + 1) * dim];
        for a in 0..dim {
            dp[i * dim + a] += two * ui[a];
        }
        for j in i + 1..n {
            let pj = &p[j * dim..(j + 1) * dim];
            let uj = &u[j * dim..(j + 1) * dim];
            let r = distance(pi, pj);
            let kij = kernel.value(r);
            let f = two * kernel.radial_factor(r) * dot(ui, uj);
            for a in 0..dim {
                dp[i * dim + a] += two * kij * uj[a];
                dp[j * dim + a] += two * kij * ui[a];
                // equal and opposite, so Σ du = 0 exactly up to rounding
                let force = f * (pi[a] - pj[a]);
                du[i * dim + a] -= force;
                du[j * dim + a] += force;
            }
        }
    }
}

/// Sampled geodesic: `states[k]` is the state at `times[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub times: Vec<T>,
    pub states: Vec<LandmarkState<T>>,
}

impl<T: Real> Trajectory<T> {
    pub fn last(&self) -> &LandmarkState<T> {
        self.states.last().expect("trajectory holds the initial state")
    }
}

fn rk4_steps<T: Real>(
    state: &LandmarkState<T>,
    kernel: &KernelSpec,
    t_end: T,
    dt: T,
    mut visit: impl FnMut(T, &[T]),
) -> Result<Vec<T>> {
    if !(dt > T::zero()) || !(t_end >= T::zero()) || !t_end.is_finite() {
        return Err(Error::input("need dt > 0 and a finite t_end ≥ 0"));
    }
    kernel.validate()?;
    let dim = state.dim;
    let steps = (t_end / dt - T::lit(1e-9)).ceil().to_usize().unwrap_or(0).max(if t_end > T::zero() { 1 } else { 0 });
    let h = if steps > 0 { t_end / T::from_usize_lossy(steps) } else { T::zero() };
    let mut y: Vec<T> = state.points.iter().chain(&state.momenta).copied().collect();
    let len = y.len();
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) = (vec![T::zero(); len], vec![T::zero(); len], vec![T::zero(); len], vec![T::zero(); len], vec![T::zero(); len]);
    let half = T::lit(0.5);
    let sixth = h / T::lit(6.0);
    visit(T::zero(), &y);
    for s in 0..steps {
        vector_field(dim, kernel, &y, &mut k1);
        for i in 0..len {
            tmp[i] = y[i] + half * h * k1[i];
        }
        vector_field(dim, kernel, &tmp, &mut k2);
        for i in 0..len {
            tmp[i] = y[i] + half * h * k2[i];
        }
        vector_field(dim, kernel, &tmp, &mut k3);
        for i in 0..len {
            tmp[i] = y[i] + h * k3[i];
        }
        vector_field(dim, kernel, &tmp, &mut k4);
        for i in 0..len {
            y[i] += sixth * (k1[i] + T::lit(2.0) * (k2[i] + k3[i]) + k4[i]);
        }
        let t = h * T::from_usize_lossy(s + 1);
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Collision { time: t.as_f64(), distance: 0.0 });
        }
        let d = min_separation(&y[..len / 2], dim);
        if d < T::lit(MIN_SEPARATION) {
            return Err(Error::Collision { time: t.as_f64(), distance: d.as_f64() });
        }
        visit(t, &y);
    }
    Ok(y)
}

fn split_state<T: Real>(dim: usize, y: &[T]) -> LandmarkState<T> {
    let m = y.len() / 2;
    LandmarkState { dim, points: y[..m].to_vec(), momenta: y[m..].to_vec() }
}

/// Integrates the geodesic equations with classical fourth-order Runge-Kutta
/// at a fixed step no larger than `dt`, ending exactly at `t_end`. Aborts with
/// [`Error::Collision`] when two landmarks come within [`MIN_SEPARATION`].
pub fn geodesic_shoot<T: Real>(state: &LandmarkState<T>, kernel: &KernelSpec, t_end: T, dt: T) -> Result<Trajectory<T>> {
    let mut times = Vec::new();
    let mut states = Vec::new();
    rk4_steps(state, kernel, t_end, dt, |t, y| {
        times.push(t);
        states.push(split_state(state.dim, y));
    })?;
    Ok(Trajectory { times, states })
}

/// Final state of [`geodesic_shoot`] without storing the path.
pub fn shoot_endpoint<T: Real>(state: &LandmarkState<T>, kernel: &KernelSpec, t_end: T, dt: T) -> Result<LandmarkState<T>> {
    let y = rk4_steps(state, kernel, t_end, dt, |_, _| {})?;
    Ok(split_state(state.dim, &y))
}
