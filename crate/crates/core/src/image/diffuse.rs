use crate::error::{Error, Result};
use crate::image::ImageGrid;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionResult<T> {
    pub image: ImageGrid<T>,
    /// Discrete energy before the first step and after each step.
    pub energy: Vec<T>,
}

/// Largest stable explicit step: `0.2·h²·ε / (1 + 0.2·h²·ε·λ)`. With `λ = 0`
/// this is `0.2·h²·ε`; the denominator keeps the step a descent step when the
/// fidelity term is stiff.
pub fn max_stable_dt<T: Real>(pitch: T, epsilon: T, lambda: T) -> T {
    let base = T::lit(0.2) * pitch * pitch * epsilon;
    base / (T::one() + base * lambda)
}

// forward differences with Neumann boundaries (zero past the last sample)
fn gradients<T: Real>(j: &[T], w: usize, h: usize, pitch: T) -> (Vec<T>, Vec<T>) {
    let mut gx = vec![T::zero(); w * h];
    let mut gy = vec![T::zero(); w * h];
    for r in 0..h {
        for c in 0..w {
            let i = r * w + c;
            if c + 1 < w {
                gx[i] = (j[i + 1] - j[i]) / pitch;
            }
            if r + 1 < h {
                gy[i] = (j[i + w] - j[i]) / pitch;
            }
        }
    }
    (gx, gy)
}

/// `Σ sqrt(‖∇J‖² + ε²) + (λ/2) Σ (I − J)²`.
pub fn diffusion_energy<T: Real>(image: &ImageGrid<T>, j: &ImageGrid<T>, lambda: T, epsilon: T) -> T {
    let pitch = image.pitch.unwrap_or(T::one());
    let (gx, gy) = gradients(j.as_slice(), j.width(), j.height(), pitch);
    let eps2 = epsilon * epsilon;
    let tv: T = gx.iter().zip(&gy).map(|(&a, &b)| (a * a + b * b + eps2).sqrt()).sum();
    let fid: T = image.as_slice().iter().zip(j.as_slice()).map(|(&a, &b)| (a - b) * (a - b)).sum();
    tv + lambda * T::lit(0.5) * fid
}

/// Regularized total-variation flow `∂J/∂t = div(∇J/‖∇J‖_ε) + λ(I − J)` with
/// `‖∇J‖_ε = sqrt(‖∇J‖² + ε²)`, started at `J = I`. Each explicit step is a
/// gradient step on [`diffusion_energy`] (forward-difference gradient, its
/// adjoint as divergence, Neumann boundaries), so with `dt` under
/// [`max_stable_dt`] the energy never increases. Grid spacing is the image
/// pitch, 1 when unset.
pub fn diffuse<T: Real>(image: &ImageGrid<T>, lambda: T, num_steps: usize, dt: T, epsilon: T) -> Result<DiffusionResult<T>> {
    if !(epsilon > T::zero()) {
        return Err(Error::input("epsilon must be positive"));
    }
    if !(lambda >= T::zero()) {
        return Err(Error::input("lambda must be non-negative"));
    }
    let pitch = image.pitch.unwrap_or(T::one());
    let bound = max_stable_dt(pitch, epsilon, lambda);
    if !(dt > T::zero()) || dt > bound {
        return Err(Error::UnstableStep { dt: dt.as_f64(), bound: bound.as_f64() });
    }
    let (w, h) = (image.width(), image.height());
    let src = image.as_slice();
    let mut j = src.to_vec();
    let eps2 = epsilon * epsilon;
    let mut current = image.clone();
    let mut energy = vec![diffusion_energy(image, &current, lambda, epsilon)];
    let mut px = vec![T::zero(); w * h];
    let mut py = vec![T::zero(); w * h];
    for _ in 0..num_steps {
        let (gx, gy) = gradients(&j, w, h, pitch);
        for i in 0..w * h {
            let n = (gx[i] * gx[i] + gy[i] * gy[i] + eps2).sqrt();
            px[i] = gx[i] / n;
            py[i] = gy[i] / n;
        }
        for r in 0..h {
            for c in 0..w {
                let i = r * w + c;
                // negative adjoint of the forward difference
                let mut div = px[i] - if c > 0 { px[i - 1] } else { T::zero() };
                div += py[i] - if r > 0 { py[i - w] } else { T::zero() };
                if c + 1 == w {
                    div -= px[i];
                }
                if r + 1 == h {
                    div -= py[i];
                }
                let ji = j[i];
                j[i] = ji + dt * (div / pitch + lambda * (src[i] - ji));
            }
        }
        current = ImageGrid::new(w, h, j.clone())?;
        current.pitch = image.pitch;
        energy.push(diffusion_energy(image, &current, lambda, epsilon));
    }
    Ok(DiffusionResult { image: current, energy })
}
