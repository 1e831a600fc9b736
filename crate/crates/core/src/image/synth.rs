use rand::Rng;
use rand_distr::{Distribution, Pareto, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::ImageGrid;
use crate::rng::{seeded, PtRng};
use crate::scalar::Real;

/// Primitive support radius, in units of its scale.
const SUPPORT: f64 = 4.0;

/// Uncovered-pixel fraction the dead-leaves coverage precondition allows.
pub const MAX_UNCOVERED: f64 = 1e-3;

/// Draws from the density `∝ r^{−exponent}` on `[lo, hi]` by inversion.
fn power_law(rng: &mut PtRng, lo: f64, hi: f64, exponent: f64) -> f64 {
    let u: f64 = rng.random();
    let a = 1.0 - exponent;
    if a.abs() < 1e-12 {
        lo * (hi / lo).powf(u)
    } else {
        (lo.powf(a) + u * (hi.powf(a) - lo.powf(a))).powf(1.0 / a)
    }
}

/// `E[r^k]` under the density `∝ r^{−exponent}` on `[lo, hi]`.
fn power_law_moment(lo: f64, hi: f64, exponent: f64, k: f64) -> f64 {
    let integral = |p: f64| {
        if (p + 1.0).abs() < 1e-12 {
            (hi / lo).ln()
        } else {
            (hi.powf(p + 1.0) - lo.powf(p + 1.0)) / (p + 1.0)
        }
    };
    integral(k - exponent) / integral(-exponent)
}

/// Random wavelet expansion: primitives at Poisson-distributed centres with
/// scales drawn from `s^{−scale_exponent}` on `[scale_min, scale_max]`
/// (exponent 3 is the scale-invariant choice in the plane), uniform
/// orientation, and two-sided Pareto amplitudes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WaveletProcessSpec {
    /// Expected number of primitives per unit pixel area.
    pub intensity: f64,
    pub scale_min: f64,
    pub scale_max: f64,
    pub scale_exponent: f64,
    /// Minor-to-major axis ratio of the Gaussian window.
    pub aspect: f64,
    /// Pareto tail index of `|amplitude|`; smaller is heavier.
    pub pareto_alpha: f64,
}

impl Default for WaveletProcessSpec {
    fn default() -> Self {
        Self { intensity: 0.2, scale_min: 1.0, scale_max: 32.0, scale_exponent: 3.0, aspect: 0.5, pareto_alpha: 3.0 }
    }
}

impl WaveletProcessSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.intensity >= 0.0) || !self.intensity.is_finite() {
            return Err(Error::model("intensity must be non-negative"));
        }
        if !(self.scale_min > 0.0 && self.scale_min < self.scale_max && self.scale_max.is_finite()) {
            return Err(Error::model("need 0 < scale_min < scale_max"));
        }
        if !(self.aspect > 0.0 && self.aspect <= 1.0) {
            return Err(Error::model("aspect must lie in (0, 1]"));
        }
        if !(self.pareto_alpha > 0.0) {
            return Err(Error::model("Pareto index must be positive"));
        }
        Ok(())
    }
}

/// One oriented Gaussian bump `A·exp(−u²/2s² − v²/2(as)²)` in rotated
/// coordinates `(u, v)` about `(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Primitive {
    pub x: f64,
    pub y: f64,
    pub scale: f64,
    pub angle: f64,
    pub aspect: f64,
    pub amplitude: f64,
}

impl Primitive {
    pub fn value(&self, px: f64, py: f64) -> f64 {
        let (dx, dy) = (px - self.x, py - self.y);
        let (s, c) = self.angle.sin_cos();
        let u = (c * dx + s * dy) / self.scale;
        let v = (-s * dx + c * dy) / (self.scale * self.aspect);
        self.amplitude * (-0.5 * (u * u + v * v)).exp()
    }
}

/// Sums primitives over a raster, evaluating each at pixel centres within
/// its support. No mean subtraction.
pub fn render_primitives<T: Real>(width: usize, height: usize, prims: &[Primitive]) -> ImageGrid<T> {
    let mut acc = vec![0.0f64; width * height];
    for p in prims {
        let reach = SUPPORT * p.scale;
        let c0 = (p.x - reach - 0.5).floor().max(0.0) as usize;
        let r0 = (p.y - reach - 0.5).floor().max(0.0) as usize;
        let c1 = ((p.x + reach - 0.5).ceil().max(-1.0) + 1.0).min(width as f64) as usize;
        let r1 = ((p.y + reach - 0.5).ceil().max(-1.0) + 1.0).min(height as f64) as usize;
        for r in r0..r1 {
            for c in c0..c1 {
                acc[r * width + c] += p.value(c as f64 + 0.5, r as f64 + 0.5);
            }
        }
    }
    ImageGrid::from_fn(width, height, |r, c| T::lit(acc[r * width + c]))
}

/// Primitives of one realization over the image padded by the largest
/// support radius.
pub fn sample_primitives(spec: &WaveletProcessSpec, width: usize, height: usize, seed: u64) -> Result<Vec<Primitive>> {
    spec.validate()?;
    let mut rng = seeded(seed);
    let pad = SUPPORT * spec.scale_max;
    let (pw, ph) = (width as f64 + 2.0 * pad, height as f64 + 2.0 * pad);
    let mean = spec.intensity * pw * ph;
    let count = if mean > 0.0 { Poisson::new(mean).map_err(|e| Error::model(e.to_string()))?.sample(&mut rng) as usize } else { 0 };
    let pareto = Pareto::new(1.0, spec.pareto_alpha).map_err(|e| Error::model(e.to_string()))?;
    Ok((0..count)
        .map(|_| {
            let x = rng.random::<f64>() * pw - pad;
            let y = rng.random::<f64>() * ph - pad;
            let scale = power_law(&mut rng, spec.scale_min, spec.scale_max, spec.scale_exponent);
            let angle = rng.random::<f64>() * std::f64::consts::PI;
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            Primitive { x, y, scale, angle, aspect: spec.aspect, amplitude: sign * pareto.sample(&mut rng) }
        })
        .collect())
}

/// One realization of the random wavelet expansion, mean subtracted.
pub fn synth_random_wavelets<T: Real>(spec: &WaveletProcessSpec, width: usize, height: usize, seed: u64) -> Result<ImageGrid<T>> {
    let prims = sample_primitives(spec, width, height, seed)?;
    let img: ImageGrid<f64> = render_primitives(width, height, &prims);
    let mean = img.mean();
    Ok(ImageGrid::from_fn(width, height, |r, c| T::lit(img[(r, c)] - mean)))
}

/// Dead-leaves model: disks with radii `∝ r^{−radius_exponent}` on
/// `[r_min, r_max]`, centres Poisson with `density` per unit pixel area,
/// independent uniform depths, gray levels uniform on `[gray_lo, gray_hi]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DeadLeavesSpec {
    pub r_min: f64,
    pub r_max: f64,
    pub radius_exponent: f64,
    /// Expected disk centres per unit pixel area; `None` picks the smallest
    /// density meeting the coverage precondition.
    pub density: Option<f64>,
    pub gray_lo: f64,
    pub gray_hi: f64,
    pub background: f64,
    /// Each pixel is the mean of `supersample²` point samples on a regular
    /// subgrid, approximating the area average of the continuum field.
    pub supersample: usize,
}

impl Default for DeadLeavesSpec {
    fn default() -> Self {
        Self { r_min: 0.25, r_max: 256.0, radius_exponent: 3.0, density: None, gray_lo: 0.0, gray_hi: 1.0, background: 0.5, supersample: 4 }
    }
}

impl DeadLeavesSpec {
    /// Density at which the expected uncovered fraction `exp(−density·E[πr²])`
    /// equals [`MAX_UNCOVERED`].
    pub fn required_density(&self) -> f64 {
        -MAX_UNCOVERED.ln() / (std::f64::consts::PI * power_law_moment(self.r_min, self.r_max, self.radius_exponent, 2.0))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r_min > 0.0 && self.r_min < self.r_max && self.r_max.is_finite()) {
            return Err(Error::model("need 0 < r_min < r_max"));
        }
        if self.supersample == 0 {
            return Err(Error::model("supersample factor must be at least 1"));
        }
        if !(self.gray_lo <= self.gray_hi) {
            return Err(Error::model("gray range is empty"));
        }
        Ok(())
    }
}

/// A disk; smaller depth is nearer the viewer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Leaf {
    pub x: f64,
    pub y: f64,
    pub radius: f64,
    pub depth: f64,
    pub gray: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeadLeavesImage<T> {
    pub image: ImageGrid<T>,
    pub leaves: usize,
    /// Sample points no disk covers; they take the background level.
    pub uncovered: usize,
}

/// Occlusion rendering: each pixel centre takes the gray level of the
/// front-most disk containing it.
pub fn render_leaves<T: Real>(width: usize, height: usize, leaves: &[Leaf], background: f64) -> DeadLeavesImage<T> {
    let mut order: Vec<usize> = (0..leaves.len()).collect();
    order.sort_by(|&a, &b| leaves[a].depth.total_cmp(&leaves[b].depth).then(a.cmp(&b)));
    let mut value = vec![f64::NAN; width * height];
    let mut open = width * height;
    for &i in &order {
        if open == 0 {
            break;
        }
        let l = &leaves[i];
        let r0 = (l.y - l.radius - 0.5).floor().max(0.0) as usize;
        let r1 = ((l.y + l.radius - 0.5).ceil() + 1.0).clamp(0.0, height as f64) as usize;
        let c0 = (l.x - l.radius - 0.5).floor().max(0.0) as usize;
        let c1 = ((l.x + l.radius - 0.5).ceil() + 1.0).clamp(0.0, width as f64) as usize;
        let r2 = l.radius * l.radius;
        for r in r0..r1 {
            let dy = r as f64 + 0.5 - l.y;
            for c in c0..c1 {
                let dx = c as f64 + 0.5 - l.x;
                let v = &mut value[r * width + c];
                if v.is_nan() && dx * dx + dy * dy <= r2 {
                    *v = l.gray;
                    open -= 1;
                }
            }
        }
    }
    let image = ImageGrid::from_fn(width, height, |r, c| {
        let v = value[r * width + c];
        T::lit(if v.is_nan() { background } else { v })
    });
    DeadLeavesImage { image, leaves: leaves.len(), uncovered: open }
}

/// Disks of one realization over the image padded by `r_max`.
pub fn sample_leaves(spec: &DeadLeavesSpec, width: usize, height: usize, seed: u64) -> Result<Vec<Leaf>> {
    spec.validate()?;
    let required = spec.required_density();
    let density = spec.density.unwrap_or(required);
    let pad = spec.r_max;
    let area = (width as f64 + 2.0 * pad) * (height as f64 + 2.0 * pad);
    if !(density >= required * (1.0 - 1e-12)) {
        return Err(Error::InsufficientCoverage { expected: density * area, required: required * area });
    }
    let mut rng = seeded(seed);
    let count = Poisson::new(density * area).map_err(|e| Error::model(e.to_string()))?.sample(&mut rng) as usize;
    Ok((0..count)
        .map(|_| Leaf {
            x: rng.random::<f64>() * (width as f64 + 2.0 * pad) - pad,
            y: rng.random::<f64>() * (height as f64 + 2.0 * pad) - pad,
            radius: power_law(&mut rng, spec.r_min, spec.r_max, spec.radius_exponent),
            depth: rng.random(),
            gray: spec.gray_lo + (spec.gray_hi - spec.gray_lo) * rng.random::<f64>(),
        })
        .collect())
}

/// One realization of the dead-leaves model.
pub fn synth_dead_leaves<T: Real>(spec: &DeadLeavesSpec, width: usize, height: usize, seed: u64) -> Result<DeadLeavesImage<T>> {
    let leaves = sample_leaves(spec, width, height, seed)?;
    let s = spec.supersample;
    if s == 1 {
        return Ok(render_leaves(width, height, &leaves, spec.background));
    }
    let k = s as f64;
    let scaled: Vec<Leaf> =
        leaves.iter().map(|l| Leaf { x: l.x * k, y: l.y * k, radius: l.radius * k, ..*l }).collect();
    let fine: DeadLeavesImage<f64> = render_leaves(width * s, height * s, &scaled, spec.background);
    let norm = 1.0 / (k * k);
    let image = ImageGrid::from_fn(width, height, |r, c| {
        let mut acc = 0.0;
        for i in 0..s {
            for j in 0..s {
                acc += fine.image[(r * s + i, c * s + j)];
            }
        }
        T::lit(acc * norm)
    });
    Ok(DeadLeavesImage { image, leaves: fine.leaves, uncovered: fine.uncovered })
}
