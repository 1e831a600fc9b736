//! Exponential models whose parameter is a whole function of a statistic:
//! `Pr(x) ∝ Pr_base(x) · exp(φ(f(x)))` with piecewise-constant `φ`.

use crate::error::{Error, Result};
use crate::mrf::gibbs::GibbsModel;
use crate::scalar::{log_sum_exp, Real};

pub const MIN_SAMPLES: usize = 1000;
pub const MAX_SITES: usize = 12;
pub const MAX_LABELS: usize = 4;

/// Fitted binned potential.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionPotential<T> {
    /// `num_bins + 1` equally spaced edges over the statistic's range.
    pub edges: Vec<T>,
    /// `phi[b]` for every bin; merged bins share a value. Centered to mean 0.
    pub phi: Vec<T>,
    /// `group[b]`: index of the merged group that bin `b` belongs to.
    pub group: Vec<usize>,
    pub target_histogram: Vec<T>,
    /// Histogram of the fitted model, by exact enumeration, per group.
    pub model_histogram: Vec<T>,
    pub iterations: usize,
}

impl<T: Real> FunctionPotential<T> {
    pub fn bin_of(&self, value: T) -> usize {
        bin_index(&self.edges, value)
    }

    /// Largest per-group gap between model and target histograms.
    pub fn max_histogram_error(&self) -> T {
        self.model_histogram
            .iter()
            .zip(&self.target_histogram)
            .fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs()))
    }
}

fn bin_index<T: Real>(edges: &[T], value: T) -> usize {
    let bins = edges.len() - 1;
    let lo = edges[0];
    let width = edges[bins] - lo;
    if !(width > T::zero()) {
        return 0;
    }
    let k = ((value - lo) / width * T::from_usize_lossy(bins)).floor();
    k.max(T::zero()).to_usize().unwrap_or(0).min(bins - 1)
}

/// Fits `φ` by iterative scaling so that the model histogram of `statistic`
/// matches the empirical histogram of `samples`.
///
/// Bins with no samples or no base-model mass are merged into a neighbouring
/// bin. The base model is enumerated exactly, so it must stay at toy scale
/// (≤ 12 sites, ≤ 4 labels each).
pub fn fit_function_exponential<T, F>(
    base: &GibbsModel<T>,
    statistic: F,
    samples: &[T],
    num_bins: usize,
    tol: T,
) -> Result<FunctionPotential<T>>
where
    T: Real,
    F: Fn(&[usize]) -> T,
{
    if samples.len() < MIN_SAMPLES {
        return Err(Error::input(format!("need at least {MIN_SAMPLES} samples, got {}", samples.len())));
    }
    if num_bins == 0 {
        return Err(Error::input("need at least one bin"));
    }
    if base.num_vertices() > MAX_SITES || base.domains().iter().any(|&d| d > MAX_LABELS) {
        return Err(Error::input("function-parameter fitting is limited to ≤ 12 sites with ≤ 4 labels"));
    }

    let (p0, _) = base.joint_table()?;
    let mut stats = Vec::with_capacity(p0.len());
    base.for_each_configuration(|x| stats.push(statistic(x)))?;
    let (lo, hi) = stats.iter().fold((T::infinity(), T::neg_infinity()), |(a, b), &v| (a.min(v), b.max(v)));
    let span = hi - lo;
    let slack = T::lit(1e-9) * (T::one() + span.abs());
    if samples.iter().any(|&s| !(s >= lo - slack && s <= hi + slack)) {
        return Err(Error::input("samples fall outside the statistic's range on the model space"));
    }
    let edges: Vec<T> = (0..=num_bins)
        .map(|i| lo + span * T::from_usize_lossy(i) / T::from_usize_lossy(num_bins))
        .collect();

    let mut target_bins = vec![T::zero(); num_bins];
    for &s in samples {
        target_bins[bin_index(&edges, s)] += T::one();
    }
    let total = T::from_usize_lossy(samples.len());
    target_bins.iter_mut().for_each(|t| *t /= total);
    let config_bin: Vec<usize> = stats.iter().map(|&v| bin_index(&edges, v)).collect();
    let mut base_bins = vec![T::zero(); num_bins];
    for (&b, &p) in config_bin.iter().zip(&p0) {
        base_bins[b] += p;
    }

    // an empty bin joins the group of the next non-empty bin (the last group
    // absorbs trailing empties)
    let mut group = vec![0usize; num_bins];
    let mut closed = 0usize;
    let (mut t_acc, mut m_acc) = (T::zero(), T::zero());
    for b in 0..num_bins {
        group[b] = closed;
        t_acc += target_bins[b];
        m_acc += base_bins[b];
        if t_acc > T::zero() && m_acc > T::zero() {
            closed += 1;
            t_acc = T::zero();
            m_acc = T::zero();
        }
    }
    if closed == 0 {
        return Err(Error::input("no bin carries both sample and model mass"));
    }
    for g in group.iter_mut() {
        if *g == closed {
            *g = closed - 1;
        }
    }
    let groups = closed;
    let mut target = vec![T::zero(); groups];
    for b in 0..num_bins {
        target[group[b]] += target_bins[b];
    }

    let log_p0: Vec<T> = p0.iter().map(|p| p.ln()).collect();
    let model_hist = |phi: &[T]| -> Vec<T> {
        let logits: Vec<T> = log_p0.iter().zip(&config_bin).map(|(&l, &b)| l + phi[group[b]]).collect();
        let lz = log_sum_exp(&logits);
        let mut h = vec![T::zero(); groups];
        for (l, &b) in logits.iter().zip(&config_bin) {
            h[group[b]] += (*l - lz).exp();
        }
        h
    };

    let mut phi = vec![T::zero(); groups];
    let mut hist = model_hist(&phi);
    let mut iterations = 0;
    let inner_tol = tol.min(T::lit(1e-10));
    while iterations < 1000 {
        let err = hist.iter().zip(&target).fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs()));
        if err <= inner_tol {
            break;
        }
        for g in 0..groups {
            phi[g] += (target[g] / hist[g]).ln();
        }
        hist = model_hist(&phi);
        iterations += 1;
    }
    let mean = phi.iter().copied().sum::<T>() / T::from_usize_lossy(groups);
    phi.iter_mut().for_each(|p| *p -= mean);
    let result = FunctionPotential {
        edges,
        phi: group.iter().map(|&g| phi[g]).collect(),
        group,
        target_histogram: target,
        model_histogram: hist,
        iterations,
    };
    if result.max_histogram_error() > tol {
        return Err(Error::NotConverged { iterations, residual: result.max_histogram_error().as_f64() });
    }
    Ok(result)
}
