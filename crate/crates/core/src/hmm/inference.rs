//! Filtering, smoothing, and Viterbi decoding.
//!
//! The forward and backward passes run in the linear domain with a
//! normalizer per step; the log-likelihood is the sum of the log normalizers.
//! Viterbi runs in the log domain.

use std::io::Write;

use crate::error::{Error, Result};
use crate::hmm::model::{HmmModel, Observations};
use crate::scalar::{argmax, normalize, Real};

/// Per-step state distributions, optionally with the sequence log-likelihood.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorSequence<T> {
    pub probs: Vec<Vec<T>>,
    pub log_likelihood: Option<T>,
}

impl<T: Real> PosteriorSequence<T> {
    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Writes `step,state,prob` rows (steps counted from 0).
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "step,state,prob")?;
        for (k, row) in self.probs.iter().enumerate() {
            for (a, p) in row.iter().enumerate() {
                writeln!(out, "{k},{a},{p}")?;
            }
        }
        Ok(())
    }
}

/// Scaled forward pass: filtered distributions and the per-step normalizers
/// `c_k = Pr(ŝ_k | ŝ_{<k})`.
pub fn forward_table<T: Real>(init: &[T], trans: &[Vec<T>], lik: &[Vec<T>]) -> Result<(Vec<Vec<T>>, Vec<T>)> {
    let n = init.len();
    let mut filtered = Vec::with_capacity(lik.len());
    let mut scales = Vec::with_capacity(lik.len());
    let mut pred = init.to_vec();
    for (k, l) in lik.iter().enumerate() {
        let mut alpha: Vec<T> = pred.iter().zip(l).map(|(&p, &e)| p * e).collect();
        let c = normalize(&mut alpha);
        if !(c > T::zero()) {
            return Err(Error::ImpossibleObservation { step: k });
        }
        scales.push(c);
        pred = vec![T::zero(); n];
        for (b, &gb) in alpha.iter().enumerate() {
            if gb == T::zero() {
                continue;
            }
            for (a, p) in pred.iter_mut().enumerate() {
                *p += gb * trans[b][a];
            }
        }
        filtered.push(alpha);
    }
    Ok((filtered, scales))
}

/// Scaled backward messages `β̂_k`, normalized with the forward constants so
/// that `α̂_k ⊙ β̂_k` is the smoothed marginal.
pub fn backward_table<T: Real>(trans: &[Vec<T>], lik: &[Vec<T>], scales: &[T]) -> Vec<Vec<T>> {
    let t_len = lik.len();
    let n = trans.len();
    let mut beta = vec![vec![T::one(); n]; t_len];
    for k in (0..t_len.saturating_sub(1)).rev() {
        let next: Vec<T> = (0..n).map(|a| lik[k + 1][a] * beta[k + 1][a]).collect();
        for b in 0..n {
            let s: T = trans[b].iter().zip(&next).map(|(&t, &x)| t * x).sum();
            beta[k][b] = s / scales[k + 1];
        }
    }
    beta
}

/// Smoothed marginals from an emission-likelihood table.
pub fn smooth_table<T: Real>(init: &[T], trans: &[Vec<T>], lik: &[Vec<T>]) -> Result<PosteriorSequence<T>> {
    let (filtered, scales) = forward_table(init, trans, lik)?;
    let beta = backward_table(trans, lik, &scales);
    let probs = filtered
        .iter()
        .zip(&beta)
        .map(|(a, b)| {
            let mut g: Vec<T> = a.iter().zip(b).map(|(&x, &y)| x * y).collect();
            normalize(&mut g);
            g
        })
        .collect();
    Ok(PosteriorSequence { probs, log_likelihood: Some(scales.iter().map(|c| c.ln()).sum()) })
}

/// Filtering distributions `Pr(x_k | ŝ_{≤k})` and `log Pr(ŝ_{≤T})`.
pub fn forward_filter<T: Real>(model: &HmmModel<T>, obs: &Observations<T>) -> Result<PosteriorSequence<T>> {
    let lik = model.likelihoods(obs)?;
    let (probs, scales) = forward_table(model.init(), model.trans(), &lik)?;
    Ok(PosteriorSequence { probs, log_likelihood: Some(scales.iter().map(|c| c.ln()).sum()) })
}

/// Smoothing distributions `Pr(x_k | ŝ_{≤T})` by a forward and a scaled
/// backward pass.
pub fn backward_smooth<T: Real>(model: &HmmModel<T>, obs: &Observations<T>) -> Result<PosteriorSequence<T>> {
    let lik = model.likelihoods(obs)?;
    smooth_table(model.init(), model.trans(), &lik)
}

/// `log Pr(ŝ_{≤T})`.
pub fn log_likelihood<T: Real>(model: &HmmModel<T>, obs: &Observations<T>) -> Result<T> {
    Ok(forward_filter(model, obs)?.log_likelihood.expect("forward pass sets the likelihood"))
}

/// Most probable hidden path and its log joint probability.
///
/// Ties are broken toward the smallest state index, both in the
/// back-pointers and in the final argmax.
pub fn viterbi<T: Real>(model: &HmmModel<T>, obs: &Observations<T>) -> Result<(Vec<usize>, T)> {
    let lik = model.likelihoods(obs)?;
    viterbi_table(model.init(), model.trans(), &lik)
}

pub fn viterbi_table<T: Real>(init: &[T], trans: &[Vec<T>], lik: &[Vec<T>]) -> Result<(Vec<usize>, T)> {
    let n = init.len();
    let log_trans: Vec<Vec<T>> = trans.iter().map(|r| r.iter().map(|p| p.ln()).collect()).collect();
    let mut delta: Vec<T> = init.iter().zip(&lik[0]).map(|(&p, &e)| p.ln() + e.ln()).collect();
    if delta.iter().all(|d| *d == T::neg_infinity()) {
        return Err(Error::ImpossibleObservation { step: 0 });
    }
    let mut back: Vec<Vec<usize>> = Vec::with_capacity(lik.len());
    for (k, l) in lik.iter().enumerate().skip(1) {
        let mut next = vec![T::neg_infinity(); n];
        let mut ptr = vec![0usize; n];
        for a in 0..n {
            let mut best = T::neg_infinity();
            let mut arg = 0;
            for b in 0..n {
                let v = delta[b] + log_trans[b][a];
                if v > best {
                    best = v;
                    arg = b;
                }
            }
            next[a] = best + l[a].ln();
            ptr[a] = arg;
        }
        if next.iter().all(|d| *d == T::neg_infinity()) {
            return Err(Error::ImpossibleObservation { step: k });
        }
        back.push(ptr);
        delta = next;
    }
    let last = argmax(&delta);
    let score = delta[last];
    let mut path = vec![last; lik.len()];
    for k in (1..lik.len()).rev() {
        path[k - 1] = back[k - 1][path[k]];
    }
    Ok((path, score))
}
