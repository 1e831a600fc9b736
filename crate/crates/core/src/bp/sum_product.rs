use rayon::prelude::*;

use crate::bp::model::PairwiseModel;
use crate::error::{Error, Result};
use crate::scalar::{entropy, normalize, Real};

/// Message-passing controls. Damping `d` keeps the fraction `d` of the old
/// message: `m ← d·m_old + (1 − d)·m_update`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BpOptions<T> {
    pub max_iters: usize,
    pub tol: T,
    pub damping: T,
}

impl<T: Real> Default for BpOptions<T> {
    fn default() -> Self {
        Self { max_iters: 1000, tol: T::lit(1e-9), damping: T::lit(0.5) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BpStatus {
    Converged,
    /// `max_iters` ran out; the beliefs are from the last iterate.
    Oscillating,
}

/// Vertex and edge beliefs. `edge[e][a][b]` pairs `edges[e] = (v, w)` as
/// `(x_v = a, x_w = b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeMarginalSet<T> {
    pub vertex: Vec<Vec<T>>,
    pub edge: Vec<Vec<Vec<T>>>,
}

impl<T: Real> EdgeMarginalSet<T> {
    /// Largest gap between an edge table's row/column sums and the vertex
    /// tables of its endpoints.
    pub fn max_incompatibility(&self, edges: &[(usize, usize)]) -> T {
        let mut worst = T::zero();
        for (&(v, w), table) in edges.iter().zip(&self.edge) {
            for (a, row) in table.iter().enumerate() {
                let s: T = row.iter().copied().sum();
                worst = worst.max((s - self.vertex[v][a]).abs());
            }
            for b in 0..self.vertex[w].len() {
                let s: T = table.iter().map(|row| row[b]).sum();
                worst = worst.max((s - self.vertex[w][b]).abs());
            }
        }
        worst
    }

    /// Largest deviation of any table's total from one.
    pub fn max_normalization_error(&self) -> T {
        let v = self.vertex.iter().map(|p| (p.iter().copied().sum::<T>() - T::one()).abs());
        let e = self.edge.iter().map(|t| (t.iter().flatten().copied().sum::<T>() - T::one()).abs());
        v.chain(e).fold(T::zero(), T::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BpResult<T> {
    pub beliefs: EdgeMarginalSet<T>,
    pub status: BpStatus,
    pub iterations: usize,
    /// Max absolute message change in the last iteration.
    pub residual: T,
}

#[derive(Clone, Copy, PartialEq)]
pub(crate) enum Semiring {
    SumProduct,
    MaxProduct,
}

/// Messages on directed edges: index `2e` is `v → w`, `2e + 1` is `w → v`
/// for `edges[e] = (v, w)`; each is a normalized table over the receiver.
pub(crate) struct Messages<T> {
    pub(crate) m: Vec<Vec<T>>,
}

impl<T: Real> Messages<T> {
    pub(crate) fn uniform(model: &PairwiseModel<T>) -> Self {
        let mut m = Vec::with_capacity(2 * model.edges().len());
        for &(v, w) in model.edges() {
            m.push(vec![T::one() / T::from_usize_lossy(model.labels(w)); model.labels(w)]);
            m.push(vec![T::one() / T::from_usize_lossy(model.labels(v)); model.labels(v)]);
        }
        Self { m }
    }

    /// Message into `v` along edge `e`, where `first` says whether `v` is the
    /// edge's first endpoint.
    pub(crate) fn toward_vertex(&self, e: usize, first: bool) -> &[T] {
        &self.m[if first { 2 * e + 1 } else { 2 * e }]
    }

    /// `φ_s(x_s) Π m_{u→s}(x_s)` over all neighbours `u` except along `skip`.
    pub(crate) fn cavity(&self, model: &PairwiseModel<T>, s: usize, skip: Option<usize>) -> Vec<T> {
        let mut p = model.unary(s).to_vec();
        for &(f, first) in model.incident(s) {
            if Some(f) != skip {
                for (x, m) in p.iter_mut().zip(self.toward_vertex(f, first)) {
                    *x *= *m;
                }
            }
        }
        normalize(&mut p);
        p
    }

    fn update(&self, model: &PairwiseModel<T>, dir: usize, semiring: Semiring) -> Vec<T> {
        let e = dir / 2;
        let (v, w) = model.edges()[e];
        let (s, t, s_first) = if dir.is_multiple_of(2) { (v, w, true) } else { (w, v, false) };
        let cav = self.cavity(model, s, Some(e));
        let mut out: Vec<T> = (0..model.labels(t))
            .map(|xt| {
                let terms = cav.iter().enumerate().map(|(xs, &c)| c * model.psi_from(e, s_first, xs, xt));
                match semiring {
                    Semiring::SumProduct => terms.sum(),
                    Semiring::MaxProduct => terms.fold(T::zero(), T::max),
                }
            })
            .collect();
        normalize(&mut out);
        out
    }

    /// One synchronous damped sweep; returns the max absolute change.
    pub(crate) fn iterate(&mut self, model: &PairwiseModel<T>, damping: T, semiring: Semiring) -> T {
        let fresh: Vec<Vec<T>> = (0..self.m.len()).into_par_iter().map(|d| self.update(model, d, semiring)).collect();
        let mut change = T::zero();
        for (old, new) in self.m.iter_mut().zip(fresh) {
            for (o, n) in old.iter_mut().zip(new) {
                let next = damping * *o + (T::one() - damping) * n;
                change = change.max((next - *o).abs());
                *o = next;
            }
        }
        change
    }

    pub(crate) fn run(
        &mut self,
        model: &PairwiseModel<T>,
        opts: &BpOptions<T>,
        semiring: Semiring,
    ) -> Result<(BpStatus, usize, T)> {
        if !(opts.damping >= T::zero() && opts.damping < T::one()) {
            return Err(Error::input("damping must lie in [0, 1)"));
        }
        if self.m.is_empty() {
            return Ok((BpStatus::Converged, 0, T::zero()));
        }
        let mut residual = T::infinity();
        for it in 1..=opts.max_iters {
            residual = self.iterate(model, opts.damping, semiring);
            if residual < opts.tol {
                return Ok((BpStatus::Converged, it, residual));
            }
        }
        Ok((BpStatus::Oscillating, opts.max_iters, residual))
    }

    pub(crate) fn beliefs(&self, model: &PairwiseModel<T>) -> EdgeMarginalSet<T> {
        let vertex = (0..model.num_vertices()).map(|v| self.cavity(model, v, None)).collect();
        let edge = model
            .edges()
            .iter()
            .enumerate()
            .map(|(e, &(v, w))| {
                let cv = self.cavity(model, v, Some(e));
                let cw = self.cavity(model, w, Some(e));
                let mut t: Vec<Vec<T>> = cv
                    .iter()
                    .enumerate()
                    .map(|(a, &pa)| cw.iter().enumerate().map(|(b, &pb)| pa * pb * model.pairwise(e)[a][b]).collect())
                    .collect();
                let z: T = t.iter().flatten().copied().sum();
                t.iter_mut().flatten().for_each(|x| *x /= z);
                t
            })
            .collect();
        EdgeMarginalSet { vertex, edge }
    }
}

/// Sum-product belief propagation with synchronous (flooding) updates.
/// Exact on forests; on loopy graphs a converged result is a Bethe fixed point.
pub fn loopy_bp<T: Real>(model: &PairwiseModel<T>, opts: &BpOptions<T>) -> Result<BpResult<T>> {
    let mut msgs = Messages::uniform(model);
    let (status, iterations, residual) = msgs.run(model, opts, Semiring::SumProduct)?;
    Ok(BpResult { beliefs: msgs.beliefs(model), status, iterations, residual })
}

/// Bethe free energy `U − (Σ_e H(p_e) − Σ_v (deg v − 1) H(p_v))` with
/// `U = −Σ_e ⟨log ψ_e⟩ − Σ_v ⟨log φ_v⟩`. Beliefs must be compatible within 1e-8.
pub fn bethe_free_energy<T: Real>(model: &PairwiseModel<T>, beliefs: &EdgeMarginalSet<T>) -> Result<T> {
    let n = model.num_vertices();
    if beliefs.vertex.len() != n || beliefs.edge.len() != model.edges().len() {
        return Err(Error::input("beliefs do not match the model"));
    }
    for (v, b) in beliefs.vertex.iter().enumerate() {
        if b.len() != model.labels(v) {
            return Err(Error::input(format!("belief table of vertex {v} has the wrong size")));
        }
    }
    for (e, &(v, w)) in model.edges().iter().enumerate() {
        let t = &beliefs.edge[e];
        if t.len() != model.labels(v) || t.iter().any(|r| r.len() != model.labels(w)) {
            return Err(Error::input(format!("belief table of edge {e} has the wrong shape")));
        }
    }
    let gap = beliefs.max_incompatibility(model.edges()).max(beliefs.max_normalization_error());
    if gap > T::lit(1e-8) {
        return Err(Error::input(format!("beliefs are not compatible (gap {:e})", gap.as_f64())));
    }
    let mut f = T::zero();
    for (v, b) in beliefs.vertex.iter().enumerate() {
        let u: T = b.iter().zip(model.unary(v)).map(|(&p, &phi)| p * phi.ln()).sum();
        f -= u;
        f += T::from_usize_lossy(model.degree(v)) * entropy(b) - entropy(b);
    }
    for (e, t) in beliefs.edge.iter().enumerate() {
        let u: T = t.iter().flatten().zip(model.pairwise(e).iter().flatten()).map(|(&p, &psi)| p * psi.ln()).sum();
        let flat: Vec<T> = t.iter().flatten().copied().collect();
        f -= u + entropy(&flat);
    }
    Ok(f)
}
