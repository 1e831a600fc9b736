//! Gaussian-kernel smoothing of weighted particle clouds.

use crate::error::{Error, Result};
use crate::scalar::Real;

fn check<T: Real>(bandwidth: T, grid_len: usize, n: usize, w: usize) -> Result<()> {
    if grid_len == 0 {
        return Err(Error::input("empty evaluation grid"));
    }
    if !(bandwidth > T::zero()) {
        return Err(Error::input("bandwidth must be positive"));
    }
    if n != w {
        return Err(Error::input("one weight per particle"));
    }
    Ok(())
}

/// `Σ w_i N(g; x_i, h²)` at every grid point `g`.
pub fn kde_1d<T: Real>(points: &[T], weights: &[T], bandwidth: T, grid: &[T]) -> Result<Vec<T>> {
    check(bandwidth, grid.len(), points.len(), weights.len())?;
    let norm = T::one() / (bandwidth * T::lit((2.0 * std::f64::consts::PI).sqrt()));
    let two_h2 = T::lit(2.0) * bandwidth * bandwidth;
    Ok(grid
        .iter()
        .map(|&g| {
            points
                .iter()
                .zip(weights)
                .map(|(&x, &w)| w * (-(g - x) * (g - x) / two_h2).exp())
                .sum::<T>()
                * norm
        })
        .collect())
}

/// Isotropic 2D version; `out[j][i]` is the density at `(xs[i], ys[j])`.
pub fn kde_2d<T: Real>(points: &[[T; 2]], weights: &[T], bandwidth: T, xs: &[T], ys: &[T]) -> Result<Vec<Vec<T>>> {
    check(bandwidth, xs.len() * ys.len(), points.len(), weights.len())?;
    let two_h2 = T::lit(2.0) * bandwidth * bandwidth;
    let norm = T::one() / (T::lit(std::f64::consts::PI) * two_h2);
    Ok(ys
        .iter()
        .map(|&y| {
            xs.iter()
                .map(|&x| {
                    points
                        .iter()
                        .zip(weights)
                        .map(|(p, &w)| w * (-((x - p[0]).powi(2) + (y - p[1]).powi(2)) / two_h2).exp())
                        .sum::<T>()
                        * norm
                })
                .collect()
        })
        .collect())
}

/// Trapezoid rule on a (possibly non-uniform) 1D grid.
pub fn trapezoid_1d<T: Real>(grid: &[T], values: &[T]) -> T {
    grid.windows(2)
        .zip(values.windows(2))
        .map(|(g, v)| (g[1] - g[0]) * (v[0] + v[1]) * T::lit(0.5))
        .sum()
}

pub fn trapezoid_2d<T: Real>(xs: &[T], ys: &[T], values: &[Vec<T>]) -> T {
    let rows: Vec<T> = values.iter().map(|row| trapezoid_1d(xs, row)).collect();
    trapezoid_1d(ys, &rows)
}
