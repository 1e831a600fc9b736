//! Two-layer Ising model: a ±1 spin grid coupled to its 4-neighbours and to
//! an observed real image.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image::ImageGrid;
use crate::mrf::gibbs::{CliqueTerm, GibbsModel};
use crate::rng::{seeded, substream, PtRng};
use crate::scalar::Real;

/// A configuration of ±1 spins, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpinField {
    rows: usize,
    cols: usize,
    spins: Vec<i8>,
}

impl SpinField {
    pub fn filled(rows: usize, cols: usize, spin: i8) -> Self {
        assert!(spin == 1 || spin == -1, "spins are ±1");
        Self { rows, cols, spins: vec![spin; rows * cols] }
    }

    pub fn from_spins(rows: usize, cols: usize, spins: Vec<i8>) -> Result<Self> {
        if spins.len() != rows * cols || spins.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::input("spin field must hold rows*cols values in {-1, +1}"));
        }
        Ok(Self { rows, cols, spins })
    }

    pub fn random(rows: usize, cols: usize, rng: &mut PtRng) -> Self {
        let spins = (0..rows * cols).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect();
        Self { rows, cols, spins }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn spins(&self) -> &[i8] {
        &self.spins
    }

    pub fn get(&self, r: usize, c: usize) -> i8 {
        self.spins[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, s: i8) {
        self.spins[r * self.cols + c] = s;
    }

    pub fn flipped(&self) -> Self {
        Self { rows: self.rows, cols: self.cols, spins: self.spins.iter().map(|s| -s).collect() }
    }

    /// Fraction of sites where two fields agree.
    pub fn agreement(&self, other: &SpinField) -> f64 {
        let same = self.spins.iter().zip(&other.spins).filter(|(a, b)| a == b).count();
        same as f64 / self.spins.len() as f64
    }

    pub fn to_image<T: Real>(&self) -> ImageGrid<T> {
        ImageGrid::from_fn(self.cols, self.rows, |r, c| if self.get(r, c) > 0 { T::one() } else { -T::one() })
    }

    /// Labels `0 ↔ −1`, `1 ↔ +1`, in row-major vertex order.
    pub fn to_labels(&self) -> Vec<usize> {
        self.spins.iter().map(|&s| usize::from(s > 0)).collect()
    }

    pub fn from_labels(rows: usize, cols: usize, labels: &[usize]) -> Self {
        Self { rows, cols, spins: labels.iter().map(|&l| if l == 1 { 1 } else { -1 }).collect() }
    }
}

/// Order in which a sweep visits the sites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SweepOrder {
    #[default]
    Raster,
    /// `rows·cols` uniformly random site picks.
    RandomScan,
}

/// Decreasing temperature ladder.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnealSchedule<T> {
    temps: Vec<T>,
}

impl<T: Real> AnnealSchedule<T> {
    pub fn new(temps: Vec<T>) -> Result<Self> {
        if temps.is_empty() {
            return Err(Error::input("empty annealing schedule"));
        }
        if temps.iter().any(|&t| !(t > T::zero()) || !t.is_finite()) {
            return Err(Error::input("temperatures must be positive"));
        }
        if temps.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::input("schedule must be strictly decreasing"));
        }
        Ok(Self { temps })
    }

    /// `t0·rate^k` for every `k` with `t0·rate^k ≥ t_min`.
    pub fn geometric(t0: T, rate: T, t_min: T) -> Result<Self> {
        if !(rate > T::zero() && rate < T::one()) || !(t_min > T::zero()) || !(t0 >= t_min) {
            return Err(Error::input("geometric schedule needs 0 < rate < 1 and t0 ≥ t_min > 0"));
        }
        let mut temps = Vec::new();
        let mut k = 0;
        loop {
            let t = t0 * rate.powi(k);
            if t < t_min {
                break;
            }
            temps.push(t);
            k += 1;
        }
        Self::new(temps)
    }

    pub fn temperatures(&self) -> &[T] {
        &self.temps
    }

    pub fn len(&self) -> usize {
        self.temps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.temps.is_empty()
    }
}

impl<T: Real> Default for AnnealSchedule<T> {
    /// `T_k = 4·0.95^k` down to 0.05.
    fn default() -> Self {
        Self::geometric(T::lit(4.0), T::lit(0.95), T::lit(0.05)).expect("valid default schedule")
    }
}

/// Default sweeps per temperature level.
pub const DEFAULT_SWEEPS_PER_TEMP: usize = 10;

#[derive(Debug, Clone)]
pub struct AnnealResult {
    pub state: SpinField,
    /// State after each temperature level, one per schedule entry.
    pub snapshots: Vec<SpinField>,
}

/// Ising model `E(x) = −J Σ_{v∼w} x_v x_w − h Σ_v x_v y_v` at temperature `T`.
/// Off-grid neighbours are absent (no wrap-around).
#[derive(Debug, Clone, PartialEq)]
pub struct IsingGrid<T> {
    field: ImageGrid<T>,
    coupling: T,
    field_strength: T,
    temperature: T,
}

impl<T: Real> IsingGrid<T> {
    pub fn new(field: ImageGrid<T>, coupling: T, field_strength: T, temperature: T) -> Result<Self> {
        if !(coupling >= T::zero()) || !(field_strength >= T::zero()) {
            return Err(Error::model("coupling and field strength must be non-negative"));
        }
        if !(temperature > T::zero()) {
            return Err(Error::model("temperature must be positive"));
        }
        Ok(Self { field, coupling, field_strength, temperature })
    }

    /// `J = h = 1`.
    pub fn with_defaults(field: ImageGrid<T>, temperature: T) -> Result<Self> {
        Self::new(field, T::one(), T::one(), temperature)
    }

    pub fn rows(&self) -> usize {
        self.field.height()
    }

    pub fn cols(&self) -> usize {
        self.field.width()
    }

    pub fn field(&self) -> &ImageGrid<T> {
        &self.field
    }

    pub fn temperature(&self) -> T {
        self.temperature
    }

    pub fn at_temperature(&self, temperature: T) -> Result<Self> {
        Self::new(self.field.clone(), self.coupling, self.field_strength, temperature)
    }

    fn check(&self, s: &SpinField) {
        assert_eq!((s.rows, s.cols), (self.rows(), self.cols()), "spin field shape mismatch");
    }

    pub fn energy(&self, s: &SpinField) -> T {
        self.check(s);
        let (rows, cols) = (self.rows(), self.cols());
        let mut bonds = 0i64;
        let mut ext = T::zero();
        for r in 0..rows {
            for c in 0..cols {
                let x = s.get(r, c) as i64;
                if c + 1 < cols {
                    bonds += x * s.get(r, c + 1) as i64;
                }
                if r + 1 < rows {
                    bonds += x * s.get(r + 1, c) as i64;
                }
                ext += T::lit(x as f64) * self.field[(r, c)];
            }
        }
        -self.coupling * T::lit(bonds as f64) - self.field_strength * ext
    }

    /// `J Σ_{w∼v} x_w + h y_v`.
    pub fn local_field(&self, s: &SpinField, r: usize, c: usize) -> T {
        let mut n = 0i32;
        if r > 0 {
            n += s.get(r - 1, c) as i32;
        }
        if r + 1 < self.rows() {
            n += s.get(r + 1, c) as i32;
        }
        if c > 0 {
            n += s.get(r, c - 1) as i32;
        }
        if c + 1 < self.cols() {
            n += s.get(r, c + 1) as i32;
        }
        self.coupling * T::lit(n as f64) + self.field_strength * self.field[(r, c)]
    }

    /// Heat-bath probability `Pr(x_v = +1 | rest) = 1 / (1 + exp(−2 m_v / T))`.
    pub fn prob_plus(&self, s: &SpinField, r: usize, c: usize) -> T {
        let m = self.local_field(s, r, c);
        T::one() / (T::one() + (-T::lit(2.0) * m / self.temperature).exp())
    }

    fn update_site(&self, s: &mut SpinField, r: usize, c: usize, rng: &mut PtRng) {
        let p = self.prob_plus(s, r, c).as_f64();
        let u: f64 = rng.random();
        s.set(r, c, if u < p { 1 } else { -1 });
    }

    /// One heat-bath sweep.
    pub fn gibbs_sweep(&self, s: &mut SpinField, rng: &mut PtRng, order: SweepOrder) {
        self.check(s);
        let (rows, cols) = (self.rows(), self.cols());
        match order {
            SweepOrder::Raster => {
                for r in 0..rows {
                    for c in 0..cols {
                        self.update_site(s, r, c, rng);
                    }
                }
            }
            SweepOrder::RandomScan => {
                for _ in 0..rows * cols {
                    let v = rng.random_range(0..rows * cols);
                    self.update_site(s, v / cols, v % cols, rng);
                }
            }
        }
    }

    /// Generic Gibbs form: vertex `r·cols + c`, label 0 ↔ −1, 1 ↔ +1.
    pub fn to_gibbs(&self) -> Result<GibbsModel<T>> {
        let (rows, cols) = (self.rows(), self.cols());
        let n = rows * cols;
        let mut edges = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                let v = r * cols + c;
                if c + 1 < cols {
                    edges.push((v, v + 1));
                }
                if r + 1 < rows {
                    edges.push((v, v + cols));
                }
            }
        }
        let j = self.coupling;
        let mut terms: Vec<CliqueTerm<T>> = edges
            .iter()
            .map(|&e| CliqueTerm::Pair { vertices: e, energy: vec![vec![-j, j], vec![j, -j]] })
            .collect();
        for v in 0..n {
            let hy = self.field_strength * self.field.as_slice()[v];
            terms.push(CliqueTerm::Unary { vertex: v, energy: vec![hy, -hy] });
        }
        GibbsModel::new(vec![2; n], &edges, terms, self.temperature)
    }

    /// Runs `sweeps_per_temp` sweeps at each temperature of `schedule`,
    /// starting from `start`.
    pub fn anneal_from(
        &self,
        start: SpinField,
        schedule: &AnnealSchedule<T>,
        sweeps_per_temp: usize,
        rng: &mut PtRng,
        order: SweepOrder,
    ) -> Result<AnnealResult> {
        let mut s = start;
        let mut snapshots = Vec::with_capacity(schedule.len());
        for &t in schedule.temperatures() {
            let level = self.at_temperature(t)?;
            for _ in 0..sweeps_per_temp {
                level.gibbs_sweep(&mut s, rng, order);
            }
            snapshots.push(s.clone());
        }
        Ok(AnnealResult { state: s, snapshots })
    }

    /// Simulated annealing from a seeded random start. The model's own
    /// temperature is ignored; the schedule sets it.
    pub fn anneal(&self, schedule: &AnnealSchedule<T>, sweeps_per_temp: usize, seed: u64) -> Result<AnnealResult> {
        let mut rng = seeded(seed);
        let start = SpinField::random(self.rows(), self.cols(), &mut rng);
        self.anneal_from(start, schedule, sweeps_per_temp, &mut rng, SweepOrder::Raster)
    }

    /// Flips single spins while some flip lowers the energy. Returns the
    /// number of flips.
    pub fn greedy_descent(&self, s: &mut SpinField) -> usize {
        let mut flips = 0;
        loop {
            let mut changed = false;
            for r in 0..self.rows() {
                for c in 0..self.cols() {
                    let delta = T::lit(2.0 * s.get(r, c) as f64) * self.local_field(s, r, c);
                    if delta < T::zero() {
                        s.set(r, c, -s.get(r, c));
                        flips += 1;
                        changed = true;
                    }
                }
            }
            if !changed {
                return flips;
            }
        }
    }

    /// Best of `restarts` annealing runs (default schedule), each polished by
    /// greedy descent. Ties go to the earliest restart.
    pub fn mode_search(&self, restarts: usize, seed: u64) -> Result<(SpinField, T)> {
        let schedule = AnnealSchedule::default();
        let runs: Vec<(SpinField, T)> = (0..restarts.max(1))
            .into_par_iter()
            .map(|i| {
                let mut rng = substream(seed, i as u64, 0);
                let start = SpinField::random(self.rows(), self.cols(), &mut rng);
                let res = self.anneal_from(start, &schedule, DEFAULT_SWEEPS_PER_TEMP, &mut rng, SweepOrder::Raster)?;
                let mut s = res.state;
                self.greedy_descent(&mut s);
                let e = self.energy(&s);
                Ok((s, e))
            })
            .collect::<Result<_>>()?;
        let mut best = 0;
        for (i, run) in runs.iter().enumerate() {
            if run.1 < runs[best].1 {
                best = i;
            }
        }
        Ok(runs.into_iter().nth(best).expect("at least one restart"))
    }
}

/// Maps an image affinely to `[−1, 1]` around its median: dark pixels become
/// negative field values and light pixels positive ones.
pub fn normalize_field<T: Real>(image: &ImageGrid<T>) -> Result<ImageGrid<T>> {
    let mut sorted = image.as_slice().to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
    let n = sorted.len();
    let median = if n % 2 == 1 { sorted[n / 2] } else { (sorted[n / 2 - 1] + sorted[n / 2]) * T::lit(0.5) };
    let spread = (sorted[n - 1] - median).max(median - sorted[0]);
    if !(spread > T::zero()) {
        return Err(Error::DegenerateContrast);
    }
    Ok(image.map(|v| (v - median) / spread))
}

/// Two-region segmentation: anneal the Ising model (J = h = 1) whose external
/// field is the normalized image; returns the final spin field as a mask.
pub fn segment_image<T: Real>(image: &ImageGrid<T>, schedule: &AnnealSchedule<T>, seed: u64) -> Result<SpinField> {
    let field = normalize_field(image)?;
    let model = IsingGrid::with_defaults(field, *schedule.temperatures().last().expect("non-empty"))?;
    Ok(model.anneal(schedule, DEFAULT_SWEEPS_PER_TEMP, seed)?.state)
}
