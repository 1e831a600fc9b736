//! Maximum-likelihood estimation: Baum-Welch (EM) and the supervised
//! counting estimator.

use crate::error::{Error, Result};
use crate::hmm::inference::{backward_table, forward_table};
use crate::hmm::model::{Emission, HmmModel, Observations};
use crate::scalar::{normalize, Real};

/// Outcome of a Baum-Welch run.
#[derive(Debug, Clone)]
pub struct BaumWelchFit<T> {
    pub model: HmmModel<T>,
    /// `trace[i]` is the total log-likelihood of the i-th iterate; the last
    /// entry belongs to `model`.
    pub trace: Vec<T>,
    pub converged: bool,
    /// States whose rows were reset to uniform because they received zero
    /// expected occupancy at some iteration.
    pub reset_states: Vec<usize>,
}

impl<T> BaumWelchFit<T> {
    /// Warning flag: at least one state lost all expected occupancy.
    pub fn had_empty_states(&self) -> bool {
        !self.reset_states.is_empty()
    }
}

struct Stats<T> {
    log_lik: T,
    init: Vec<T>,
    trans: Vec<Vec<T>>,
    // occupancy of each state over all steps
    occupancy: Vec<T>,
    // discrete: symbol counts per state; gaussian: (Σγy, Σγy²)
    sym: Vec<Vec<T>>,
    moments: Vec<(T, T)>,
}

fn expected_counts<T: Real>(model: &HmmModel<T>, sequences: &[Observations<T>]) -> Result<Stats<T>> {
    let n = model.num_states();
    let m = model.num_symbols().unwrap_or(0);
    let mut st = Stats {
        log_lik: T::zero(),
        init: vec![T::zero(); n],
        trans: vec![vec![T::zero(); n]; n],
        occupancy: vec![T::zero(); n],
        sym: vec![vec![T::zero(); m]; n],
        moments: vec![(T::zero(), T::zero()); n],
    };
    for obs in sequences {
        let lik = model.likelihoods(obs)?;
        let (alpha, scales) = forward_table(model.init(), model.trans(), &lik)?;
        let beta = backward_table(model.trans(), &lik, &scales);
        st.log_lik += scales.iter().map(|c| c.ln()).sum::<T>();
        for k in 0..lik.len() {
            let mut gamma: Vec<T> = alpha[k].iter().zip(&beta[k]).map(|(&a, &b)| a * b).collect();
            normalize(&mut gamma);
            for a in 0..n {
                if k == 0 {
                    st.init[a] += gamma[a];
                }
                st.occupancy[a] += gamma[a];
                match obs {
                    Observations::Symbols(s) => st.sym[a][s[k]] += gamma[a],
                    Observations::Reals(y) => {
                        st.moments[a].0 += gamma[a] * y[k];
                        st.moments[a].1 += gamma[a] * y[k] * y[k];
                    }
                }
            }
            if k + 1 < lik.len() {
                // ξ_k(b, a) = α̂_k(b) p(a|b) p₂(ŝ_{k+1}|a) β̂_{k+1}(a) / c_{k+1}
                for b in 0..n {
                    if alpha[k][b] == T::zero() {
                        continue;
                    }
                    for a in 0..n {
                        st.trans[b][a] += alpha[k][b] * model.trans()[b][a] * lik[k + 1][a] * beta[k + 1][a]
                            / scales[k + 1];
                    }
                }
            }
        }
    }
    Ok(st)
}

/// Baum-Welch re-estimation until the log-likelihood gain drops below `tol`
/// or `max_iters` M-steps have run.
pub fn baum_welch<T: Real>(
    model: &HmmModel<T>,
    sequences: &[Observations<T>],
    max_iters: usize,
    tol: T,
) -> Result<BaumWelchFit<T>> {
    if sequences.is_empty() {
        return Err(Error::input("Baum-Welch needs at least one observation sequence"));
    }
    let n = model.num_states();
    let uniform = T::one() / T::from_usize_lossy(n);
    let var_floor = T::lit(1e-9);
    let mut current = model.clone();
    let mut trace = Vec::new();
    let mut reset_states: Vec<usize> = Vec::new();
    let mut converged = false;
    let mut iters = 0;
    loop {
        let st = expected_counts(&current, sequences)?;
        if let Some(&prev) = trace.last() {
            if st.log_lik - prev < tol {
                trace.push(st.log_lik);
                converged = true;
                break;
            }
        }
        trace.push(st.log_lik);
        if iters == max_iters {
            break;
        }
        iters += 1;

        let mut init = st.init.clone();
        normalize(&mut init);
        let mut trans = st.trans.clone();
        for (b, row) in trans.iter_mut().enumerate() {
            if !(normalize(row) > T::zero()) {
                row.iter_mut().for_each(|p| *p = uniform);
                if !reset_states.contains(&b) {
                    reset_states.push(b);
                }
            }
        }
        let emit = match current.emission() {
            Emission::Discrete { probs } => {
                let m = probs[0].len();
                let mut probs = st.sym.clone();
                for (a, row) in probs.iter_mut().enumerate() {
                    if !(normalize(row) > T::zero()) {
                        row.iter_mut().for_each(|p| *p = T::one() / T::from_usize_lossy(m));
                        if !reset_states.contains(&a) {
                            reset_states.push(a);
                        }
                    }
                }
                Emission::Discrete { probs }
            }
            Emission::Gaussian { means, variances } => {
                let mut means = means.clone();
                let mut variances = variances.clone();
                for a in 0..n {
                    let w = st.occupancy[a];
                    if w > T::zero() {
                        let mu = st.moments[a].0 / w;
                        let var = st.moments[a].1 / w - mu * mu;
                        means[a] = mu;
                        variances[a] = var.max(var_floor);
                    } else if !reset_states.contains(&a) {
                        reset_states.push(a);
                    }
                }
                Emission::Gaussian { means, variances }
            }
        };
        current = HmmModel::new(init, trans, emit)?;
    }
    reset_states.sort_unstable();
    Ok(BaumWelchFit { model: current, trace, converged, reset_states })
}

/// Maximum-likelihood model when the hidden states are observed: normalized
/// bigram and emission counts. Rows without data become uniform.
pub fn fit_supervised<T: Real>(
    hidden: &[usize],
    symbols: &[usize],
    num_states: usize,
    num_symbols: usize,
) -> Result<HmmModel<T>> {
    if hidden.is_empty() || hidden.len() != symbols.len() {
        return Err(Error::input("hidden and observed sequences must be non-empty and equally long"));
    }
    if hidden.iter().any(|&x| x >= num_states) || symbols.iter().any(|&s| s >= num_symbols) {
        return Err(Error::input("label out of range"));
    }
    let mut init = vec![T::zero(); num_states];
    init[hidden[0]] = T::one();
    let mut trans = vec![vec![T::zero(); num_states]; num_states];
    for w in hidden.windows(2) {
        trans[w[0]][w[1]] += T::one();
    }
    let mut probs = vec![vec![T::zero(); num_symbols]; num_states];
    for (&x, &s) in hidden.iter().zip(symbols) {
        probs[x][s] += T::one();
    }
    for row in trans.iter_mut() {
        if !(normalize(row) > T::zero()) {
            row.iter_mut().for_each(|p| *p = T::one() / T::from_usize_lossy(num_states));
        }
    }
    for row in probs.iter_mut() {
        if !(normalize(row) > T::zero()) {
            row.iter_mut().for_each(|p| *p = T::one() / T::from_usize_lossy(num_symbols));
        }
    }
    HmmModel::new(init, trans, Emission::Discrete { probs })
}
