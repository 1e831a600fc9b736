use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::image::ImageGrid;
use crate::rng::substream;
use crate::scalar::Real;
use crate::shape::{cometric, shoot_endpoint, KernelSpec, LandmarkState};

/// Closed simple polygon in the plane, counterclockwise.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeCurve<T> {
    points: Vec<[T; 2]>,
}

impl<T: Real> ShapeCurve<T> {
    pub fn new(points: Vec<[T; 2]>) -> Result<Self> {
        if points.len() < 3 {
            return Err(Error::input("a closed curve needs at least 3 vertices"));
        }
        if points.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::input("curve vertices must be finite"));
        }
        let c = Self { points };
        if !c.is_simple() {
            return Err(Error::input("curve intersects itself"));
        }
        if !(c.signed_area() > T::zero()) {
            return Err(Error::input("curve must be counterclockwise"));
        }
        Ok(c)
    }

    /// Regular `n`-gon inscribed in a circle, counterclockwise from angle 0.
    pub fn circle(n: usize, radius: T, center: [T; 2]) -> Result<Self> {
        let pts = (0..n)
            .map(|k| {
                let a = T::lit(2.0 * std::f64::consts::PI * k as f64 / n as f64);
                [center[0] + radius * a.cos(), center[1] + radius * a.sin()]
            })
            .collect();
        Self::new(pts)
    }

    pub fn points(&self) -> &[[T; 2]] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Shoelace area, positive for counterclockwise order.
    pub fn signed_area(&self) -> T {
        let n = self.points.len();
        let mut s = T::zero();
        for i in 0..n {
            let (p, q) = (self.points[i], self.points[(i + 1) % n]);
            s += p[0] * q[1] - q[0] * p[1];
        }
        s * T::lit(0.5)
    }

    /// No two non-adjacent edges meet.
    pub fn is_simple(&self) -> bool {
        let n = self.points.len();
        for i in 0..n {
            for j in i + 1..n {
                if j == i + 1 || (i == 0 && j == n - 1) {
                    continue;
                }
                let (a, b) = (self.points[i], self.points[(i + 1) % n]);
                let (c, d) = (self.points[j], self.points[(j + 1) % n]);
                if segments_meet(a, b, c, d) {
                    return false;
                }
            }
        }
        true
    }

    pub fn translated(&self, by: [T; 2]) -> Self {
        Self { points: self.points.iter().map(|p| [p[0] + by[0], p[1] + by[1]]).collect() }
    }

    fn flat(&self) -> Vec<T> {
        self.points.iter().flat_map(|p| [p[0], p[1]]).collect()
    }
}

fn orient<T: Real>(a: [T; 2], b: [T; 2], c: [T; 2]) -> T {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn segments_meet<T: Real>(a: [T; 2], b: [T; 2], c: [T; 2], d: [T; 2]) -> bool {
    let (o1, o2) = (orient(a, b, c), orient(a, b, d));
    let (o3, o4) = (orient(c, d, a), orient(c, d, b));
    let z = T::zero();
    if ((o1 > z && o2 < z) || (o1 < z && o2 > z)) && ((o3 > z && o4 < z) || (o3 < z && o4 > z)) {
        return true;
    }
    let on = |p: [T; 2], q: [T; 2], r: [T; 2], o: T| {
        o == z && r[0] >= p[0].min(q[0]) && r[0] <= p[0].max(q[0]) && r[1] >= p[1].min(q[1]) && r[1] <= p[1].max(q[1])
    };
    on(a, b, c, o1) || on(a, b, d, o2) || on(c, d, a, o3) || on(c, d, b, o4)
}

/// Law of the random initial momentum of each step. Both draw iid Gaussian
/// momenta; they differ in scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StepLaw {
    /// `u_i ~ N(0, c²·I)` with `c = step / (2·sqrt(mean_i Σ_j K_ij²))`, so the
    /// root-mean-square landmark velocity is `step` whatever the kernel
    /// width and landmark density.
    #[default]
    Normalized,
    /// `u_i ~ N(0, step²·I)`.
    Identity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WalkOptions {
    pub num_steps: usize,
    pub step_size: f64,
    pub law: StepLaw,
    /// Translation added after every step.
    pub drift: [f64; 2],
    /// Integration step of each unit-time geodesic.
    pub dt: f64,
}

impl Default for WalkOptions {
    fn default() -> Self {
        Self { num_steps: 10, step_size: 0.15, law: StepLaw::Normalized, drift: [1.0, 0.0], dt: 1e-2 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum WalkStop {
    SelfIntersection { step: usize },
    Collision { step: usize, time: f64, distance: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RandomWalk<T> {
    /// The initial curve followed by one curve per completed step.
    pub curves: Vec<ShapeCurve<T>>,
    pub stopped: Option<WalkStop>,
}

/// Random walk on closed curves: each step draws a Gaussian initial momentum
/// by `opts.law` (stream `step` of `seed`), follows the geodesic for unit time, then adds `drift`. Stops early, keeping
/// the curves so far, if a step would produce a self-intersecting curve or
/// landmarks collide.
pub fn shape_random_walk<T: Real>(initial: &ShapeCurve<T>, kernel: &KernelSpec, opts: &WalkOptions, seed: u64) -> Result<RandomWalk<T>> {
    kernel.validate()?;
    if !(opts.step_size >= 0.0) || !(opts.dt > 0.0) {
        return Err(Error::input("step size must be ≥ 0 and dt > 0"));
    }
    let mut curves = vec![initial.clone()];
    let drift = [T::lit(opts.drift[0]), T::lit(opts.drift[1])];
    for step in 0..opts.num_steps {
        let cur = curves.last().expect("initial curve");
        let mut rng = substream(seed, step as u64, 0);
        let points = cur.flat();
        let n = cur.len();
        let z: Vec<T> = (0..2 * n)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                T::lit(opts.step_size * z)
            })
            .collect();
        let momenta = match opts.law {
            StepLaw::Identity => z,
            StepLaw::Normalized => {
                let k = cometric(2, &points, kernel)?;
                let mean_sq = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| k[(i, j)] * k[(i, j)]).sum::<T>()
                    / T::from_usize_lossy(n);
                let c = T::lit(0.5) / mean_sq.sqrt();
                z.into_iter().map(|x| x * c).collect()
            }
        };
        let state = LandmarkState::new(2, points, momenta)?;
        let end = match shoot_endpoint(&state, kernel, T::one(), T::lit(opts.dt)) {
            Ok(s) => s,
            Err(Error::Collision { time, distance }) => {
                return Ok(RandomWalk { curves, stopped: Some(WalkStop::Collision { step, time, distance }) });
            }
            Err(e) => return Err(e),
        };
        let next = ShapeCurve { points: end.points.chunks(2).map(|p| [p[0] + drift[0], p[1] + drift[1]]).collect() };
        if !next.is_simple() {
            return Ok(RandomWalk { curves, stopped: Some(WalkStop::SelfIntersection { step }) });
        }
        curves.push(next);
    }
    Ok(RandomWalk { curves, stopped: None })
}

/// Raster window onto the plane; `y` grows upward.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Canvas {
    pub width: usize,
    pub height: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Canvas {
    /// Canvas of the given width framing every curve with a relative margin,
    /// square pixels.
    pub fn fit<T: Real>(curves: &[ShapeCurve<T>], width: usize, margin: f64) -> Self {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in curves.iter().flat_map(|c| c.points()) {
            for a in 0..2 {
                lo[a] = lo[a].min(p[a].as_f64());
                hi[a] = hi[a].max(p[a].as_f64());
            }
        }
        if !lo[0].is_finite() {
            (lo, hi) = ([-1.0; 2], [1.0; 2]);
        }
        let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-9);
        let pad = margin * span;
        let w = hi[0] - lo[0] + 2.0 * pad;
        let h = hi[1] - lo[1] + 2.0 * pad;
        let height = ((width as f64) * h / w).round().max(1.0) as usize;
        Self { width, height, x_min: lo[0] - pad, x_max: hi[0] + pad, y_min: lo[1] - pad, y_max: hi[1] + pad }
    }
}

/// Draws every curve as a closed polyline of value 1 on a zero background.
/// Edges are sampled at quarter-pixel spacing; pixels are set, never
/// accumulated, so the result does not depend on drawing order.
pub fn render_curves<T: Real>(curves: &[ShapeCurve<T>], canvas: &Canvas) -> ImageGrid<T> {
    let mut img = ImageGrid::filled(canvas.width, canvas.height, T::zero());
    let sx = canvas.width as f64 / (canvas.x_max - canvas.x_min);
    let sy = canvas.height as f64 / (canvas.y_max - canvas.y_min);
    let to_px = |p: [T; 2]| ((p[0].as_f64() - canvas.x_min) * sx, (canvas.y_max - p[1].as_f64()) * sy);
    for c in curves {
        let n = c.len();
        for i in 0..n {
            let (x0, y0) = to_px(c.points()[i]);
            let (x1, y1) = to_px(c.points()[(i + 1) % n]);
            let len = ((x1 - x0).powi(2) + (y1 - y0).powi(2)).sqrt();
            let samples = (len * 4.0).ceil().max(1.0) as usize;
            for s in 0..=samples {
                let t = s as f64 / samples as f64;
                let (x, y) = (x0 + t * (x1 - x0), y0 + t * (y1 - y0));
                if x >= 0.0 && y >= 0.0 && (x as usize) < canvas.width && (y as usize) < canvas.height {
                    img[(y as usize, x as usize)] = T::one();
                }
            }
        }
    }
    img
}
