use crate::bp::model::PairwiseModel;
use crate::error::{Error, Result};
use crate::scalar::{entropy, log_sum_exp, Real};

#[derive(Debug, Clone, PartialEq)]
pub struct MeanFieldResult<T> {
    /// Independent per-vertex distributions.
    pub marginals: Vec<Vec<T>>,
    /// Variational free energy of `marginals`; equals `KL(q ‖ p) − log Z`.
    pub free_energy: T,
    /// Free energy after initialization and after each sweep.
    pub trace: Vec<T>,
    pub iterations: usize,
    pub converged: bool,
}

/// `−Σ_v ⟨log φ_v⟩ − Σ_e ⟨log ψ_e⟩ − Σ_v H(q_v)` for a fully factorized `q`.
pub fn mean_field_free_energy<T: Real>(model: &PairwiseModel<T>, q: &[Vec<T>]) -> T {
    let mut f = T::zero();
    for (v, qv) in q.iter().enumerate() {
        f -= qv.iter().zip(model.unary(v)).map(|(&p, &phi)| p * phi.ln()).sum::<T>();
        f -= entropy(qv);
    }
    for (e, &(v, w)) in model.edges().iter().enumerate() {
        for (a, &pa) in q[v].iter().enumerate() {
            for (b, &pb) in q[w].iter().enumerate() {
                f -= pa * pb * model.pairwise(e)[a][b].ln();
            }
        }
    }
    f
}

/// Coordinate ascent on the mean-field approximation, one vertex at a time
/// in index order, starting from `q_v ∝ φ_v`. Each update minimizes the free
/// energy in `q_v`, so the trace never increases. Stops when a full sweep
/// moves no probability by `tol` or more; otherwise returns the last iterate
/// with `converged = false`.
pub fn mean_field<T: Real>(model: &PairwiseModel<T>, max_iters: usize, tol: T) -> Result<MeanFieldResult<T>> {
    if !(tol > T::zero()) {
        return Err(Error::input("tolerance must be positive"));
    }
    let n = model.num_vertices();
    let mut q: Vec<Vec<T>> = (0..n)
        .map(|v| {
            let z: T = model.unary(v).iter().copied().sum();
            model.unary(v).iter().map(|&p| p / z).collect()
        })
        .collect();
    let mut trace = vec![mean_field_free_energy(model, &q)];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < max_iters {
        iterations += 1;
        let mut change = T::zero();
        for v in 0..n {
            let logits: Vec<T> = (0..model.labels(v))
                .map(|a| {
                    let mut l = model.unary(v)[a].ln();
                    for &(e, first) in model.incident(v) {
                        let (x, y) = model.edges()[e];
                        let w = if first { y } else { x };
                        for (b, &qb) in q[w].iter().enumerate() {
                            l += qb * model.psi_from(e, first, a, b).ln();
                        }
                    }
                    l
                })
                .collect();
            let lz = log_sum_exp(&logits);
            for (old, l) in q[v].iter_mut().zip(logits) {
                let new = (l - lz).exp();
                change = change.max((new - *old).abs());
                *old = new;
            }
        }
        trace.push(mean_field_free_energy(model, &q));
        if change < tol {
            converged = true;
            break;
        }
    }
    Ok(MeanFieldResult { free_energy: *trace.last().expect("non-empty"), marginals: q, trace, iterations, converged })
}
