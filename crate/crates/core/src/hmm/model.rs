use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{is_distribution, Real};

/// Per-state observation model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Emission<T> {
    /// `probs[a][s] = p(s | a)` over a finite symbol alphabet.
    Discrete { probs: Vec<Vec<T>> },
    /// Scalar Gaussian per state.
    Gaussian { means: Vec<T>, variances: Vec<T> },
}

/// An observation sequence matching one of the two emission kinds.
#[derive(Debug, Clone, PartialEq)]
pub enum Observations<T> {
    Symbols(Vec<usize>),
    Reals(Vec<T>),
}

impl<T> Observations<T> {
    pub fn len(&self) -> usize {
        match self {
            Observations::Symbols(s) => s.len(),
            Observations::Reals(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl<T> From<Vec<usize>> for Observations<T> {
    fn from(v: Vec<usize>) -> Self {
        Observations::Symbols(v)
    }
}

impl<T> From<&[usize]> for Observations<T> {
    fn from(v: &[usize]) -> Self {
        Observations::Symbols(v.to_vec())
    }
}

/// Discrete-state hidden Markov model.
///
/// `trans[b][a]` is the probability of moving to `a` from `b`;
/// `init` is the distribution of the first hidden state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawHmm<T>")]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + Deserialize<'de>"))]
pub struct HmmModel<T> {
    #[serde(rename = "states")]
    num_states: usize,
    init: Vec<T>,
    trans: Vec<Vec<T>>,
    emit: Emission<T>,
}

#[derive(Deserialize)]
struct RawHmm<T> {
    states: usize,
    init: Vec<T>,
    trans: Vec<Vec<T>>,
    emit: Emission<T>,
}

impl<T: Real> TryFrom<RawHmm<T>> for HmmModel<T> {
    type Error = Error;
    fn try_from(raw: RawHmm<T>) -> Result<Self> {
        let m = HmmModel::new(raw.init, raw.trans, raw.emit)?;
        if m.num_states != raw.states {
            return Err(Error::model(format!(
                "declared {} states but distributions have {}",
                raw.states, m.num_states
            )));
        }
        Ok(m)
    }
}

impl<T: Real> HmmModel<T> {
    pub fn new(init: Vec<T>, trans: Vec<Vec<T>>, emit: Emission<T>) -> Result<Self> {
        let n = init.len();
        if n == 0 {
            return Err(Error::model("HMM needs at least one state"));
        }
        if !is_distribution(&init) {
            return Err(Error::model("initial distribution is not normalized"));
        }
        if trans.len() != n || trans.iter().any(|row| row.len() != n) {
            return Err(Error::model(format!("transition matrix must be {n}x{n}")));
        }
        if let Some(b) = trans.iter().position(|row| !is_distribution(row)) {
            return Err(Error::model(format!("transition row {b} is not a distribution")));
        }
        match &emit {
            Emission::Discrete { probs } => {
                if probs.len() != n {
                    return Err(Error::model("emission table needs one row per state"));
                }
                let m = probs[0].len();
                if probs.iter().any(|row| row.len() != m) {
                    return Err(Error::model("emission rows must share one alphabet"));
                }
                if let Some(a) = probs.iter().position(|row| !is_distribution(row)) {
                    return Err(Error::model(format!("emission row {a} is not a distribution")));
                }
            }
            Emission::Gaussian { means, variances } => {
                if means.len() != n || variances.len() != n {
                    return Err(Error::model("gaussian emission needs one mean and variance per state"));
                }
                if means.iter().any(|m| !m.is_finite()) {
                    return Err(Error::model("gaussian means must be finite"));
                }
                if variances.iter().any(|&v| !(v > T::zero()) || !v.is_finite()) {
                    return Err(Error::model("gaussian variances must be positive"));
                }
            }
        }
        Ok(Self { num_states: n, init, trans, emit })
    }

    pub fn from_json(s: &str) -> Result<Self>
    where
        T: for<'de> Deserialize<'de>,
    {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> Result<String>
    where
        T: Serialize,
    {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn init(&self) -> &[T] {
        &self.init
    }

    pub fn trans(&self) -> &[Vec<T>] {
        &self.trans
    }

    pub fn emission(&self) -> &Emission<T> {
        &self.emit
    }

    /// Alphabet size for discrete emissions.
    pub fn num_symbols(&self) -> Option<usize> {
        match &self.emit {
            Emission::Discrete { probs } => Some(probs[0].len()),
            Emission::Gaussian { .. } => None,
        }
    }

    /// `p₂(s | a)` for a single observation.
    pub fn emission_prob(&self, state: usize, obs: ObsRef<T>) -> T {
        match (&self.emit, obs) {
            (Emission::Discrete { probs }, ObsRef::Symbol(s)) => probs[state][s],
            (Emission::Gaussian { means, variances }, ObsRef::Real(y)) => {
                gaussian_pdf(y, means[state], variances[state])
            }
            _ => T::zero(),
        }
    }

    /// Emission likelihood table `lik[k][a] = p₂(ŝ_k | a)`.
    pub fn likelihoods(&self, obs: &Observations<T>) -> Result<Vec<Vec<T>>> {
        if obs.is_empty() {
            return Err(Error::input("observation sequence is empty"));
        }
        match (&self.emit, obs) {
            (Emission::Discrete { probs }, Observations::Symbols(seq)) => {
                let m = probs[0].len();
                seq.iter()
                    .enumerate()
                    .map(|(k, &s)| {
                        if s >= m {
                            Err(Error::input(format!("symbol {s} at step {k} outside alphabet of size {m}")))
                        } else {
                            Ok((0..self.num_states).map(|a| probs[a][s]).collect())
                        }
                    })
                    .collect()
            }
            (Emission::Gaussian { means, variances }, Observations::Reals(seq)) => seq
                .iter()
                .enumerate()
                .map(|(k, &y)| {
                    if !y.is_finite() {
                        Err(Error::input(format!("non-finite observation at step {k}")))
                    } else {
                        Ok((0..self.num_states).map(|a| gaussian_pdf(y, means[a], variances[a])).collect())
                    }
                })
                .collect(),
            _ => Err(Error::input("observation kind does not match the emission model")),
        }
    }

    /// Joint probability `Pr(x, ŝ)` of a hidden path with the observations.
    pub fn joint_prob(&self, path: &[usize], obs: &Observations<T>) -> Result<T> {
        let lik = self.likelihoods(obs)?;
        if path.len() != lik.len() {
            return Err(Error::input("path and observation lengths differ"));
        }
        let mut p = self.init[path[0]] * lik[0][path[0]];
        for k in 1..path.len() {
            p = p * self.trans[path[k - 1]][path[k]] * lik[k][path[k]];
        }
        Ok(p)
    }
}

/// Borrowed single observation.
#[derive(Debug, Clone, Copy)]
pub enum ObsRef<T> {
    Symbol(usize),
    Real(T),
}

pub(crate) fn gaussian_pdf<T: Real>(y: T, mean: T, var: T) -> T {
    let d = y - mean;
    (-(d * d) / (T::lit(2.0) * var)).exp() / (T::lit(2.0 * std::f64::consts::PI) * var).sqrt()
}
