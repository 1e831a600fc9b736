use crate::bp::model::PairwiseModel;
use crate::bp::sum_product::{BpOptions, BpStatus, Messages, Semiring};
use crate::error::Result;
use crate::scalar::{argmax, Real};

#[derive(Debug, Clone, PartialEq)]
pub struct MaxProductResult<T> {
    pub config: Vec<usize>,
    pub energy: T,
    /// True on forests, where the configuration is an exact MAP.
    pub exact: bool,
    pub status: BpStatus,
    pub iterations: usize,
}

/// Max-product decoding. On a forest, messages are passed leaf-to-root once
/// and the MAP is read back root-to-leaf, ties going to the lowest label. On
/// a loopy graph, damped synchronous max-product runs under `opts` and each
/// vertex takes the argmax of its max-belief; no optimality is claimed.
pub fn max_product<T: Real>(model: &PairwiseModel<T>, opts: &BpOptions<T>) -> Result<MaxProductResult<T>> {
    if model.is_forest() {
        let config = forest_map(model);
        let energy = model.energy(&config);
        return Ok(MaxProductResult { config, energy, exact: true, status: BpStatus::Converged, iterations: 1 });
    }
    let mut msgs = Messages::uniform(model);
    let (status, iterations, _) = msgs.run(model, opts, Semiring::MaxProduct)?;
    let config: Vec<usize> = (0..model.num_vertices()).map(|v| argmax(&msgs.cavity(model, v, None))).collect();
    let energy = model.energy(&config);
    Ok(MaxProductResult { config, energy, exact: false, status, iterations })
}

fn other_end<T: Real>(model: &PairwiseModel<T>, e: usize, first: bool) -> usize {
    let (v, w) = model.edges()[e];
    if first {
        w
    } else {
        v
    }
}

fn forest_map<T: Real>(model: &PairwiseModel<T>) -> Vec<usize> {
    let n = model.num_vertices();
    // BFS order per component; parent edge recorded as (edge, child_is_first)
    let mut order = Vec::with_capacity(n);
    let mut parent: Vec<Option<(usize, usize, bool)>> = vec![None; n];
    let mut seen = vec![false; n];
    for root in 0..n {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let start = order.len();
        order.push(root);
        let mut i = start;
        while i < order.len() {
            let v = order[i];
            for &(e, first) in model.incident(v) {
                let w = other_end(model, e, first);
                if !seen[w] {
                    seen[w] = true;
                    parent[w] = Some((v, e, !first));
                    order.push(w);
                }
            }
            i += 1;
        }
    }
    // local[v][x]: best log-weight of v's subtree given x_v
    let mut local: Vec<Vec<T>> = (0..n).map(|v| model.unary(v).iter().map(|p| p.ln()).collect()).collect();
    for &c in order.iter().rev() {
        if let Some((p, e, c_first)) = parent[c] {
            let up: Vec<T> = (0..model.labels(p))
                .map(|xp| {
                    (0..model.labels(c))
                        .map(|xc| local[c][xc] + model.psi_from(e, c_first, xc, xp).ln())
                        .fold(T::neg_infinity(), T::max)
                })
                .collect();
            for (l, u) in local[p].iter_mut().zip(up) {
                *l += u;
            }
        }
    }
    let mut config = vec![0usize; n];
    for &v in &order {
        config[v] = match parent[v] {
            None => argmax(&local[v]),
            Some((p, e, v_first)) => {
                let scores: Vec<T> = (0..model.labels(v))
                    .map(|x| local[v][x] + model.psi_from(e, v_first, x, config[p]).ln())
                    .collect();
                argmax(&scores)
            }
        };
    }
    config
}
