use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mrf::{CliqueTerm, GibbsModel};
use crate::scalar::Real;

/// Pairwise Markov random field `p(x) ∝ Π_v φ_v(x_v) Π_{(v,w)} ψ_vw(x_v, x_w)`
/// with strictly positive potentials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPairwise<T>", into = "RawPairwise<T>")]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + Deserialize<'de>"))]
pub struct PairwiseModel<T> {
    unary: Vec<Vec<T>>,
    edges: Vec<(usize, usize)>,
    pairwise: Vec<Vec<Vec<T>>>,
    // (edge index, vertex is the edge's first endpoint)
    incident: Vec<Vec<(usize, bool)>>,
}

#[derive(Serialize, Deserialize)]
struct RawPairwise<T> {
    labels: Vec<usize>,
    unary: Vec<Vec<T>>,
    edges: Vec<(usize, usize)>,
    pairwise: Vec<Vec<Vec<T>>>,
}

impl<T: Real> TryFrom<RawPairwise<T>> for PairwiseModel<T> {
    type Error = Error;
    fn try_from(raw: RawPairwise<T>) -> Result<Self> {
        if raw.labels.len() != raw.unary.len() || raw.labels.iter().zip(&raw.unary).any(|(&k, u)| k != u.len()) {
            return Err(Error::model("label counts disagree with unary tables"));
        }
        PairwiseModel::new(raw.unary, raw.edges, raw.pairwise)
    }
}

impl<T: Real> From<PairwiseModel<T>> for RawPairwise<T> {
    fn from(m: PairwiseModel<T>) -> Self {
        RawPairwise { labels: m.unary.iter().map(Vec::len).collect(), unary: m.unary, edges: m.edges, pairwise: m.pairwise }
    }
}

fn positive<T: Real>(x: T) -> bool {
    x > T::zero() && x.is_finite()
}

impl<T: Real> PairwiseModel<T> {
    /// `pairwise[e][a][b] = ψ_e(x_v = a, x_w = b)` for `edges[e] = (v, w)`.
    pub fn new(unary: Vec<Vec<T>>, edges: Vec<(usize, usize)>, pairwise: Vec<Vec<Vec<T>>>) -> Result<Self> {
        let n = unary.len();
        if let Some(v) = unary.iter().position(|u| u.is_empty() || !u.iter().all(|&x| positive(x))) {
            return Err(Error::model(format!("unary potential of vertex {v} must be non-empty and strictly positive")));
        }
        if pairwise.len() != edges.len() {
            return Err(Error::model("need one pairwise table per edge"));
        }
        let mut incident = vec![Vec::new(); n];
        for (e, (&(v, w), table)) in edges.iter().zip(&pairwise).enumerate() {
            if v >= n || w >= n || v == w {
                return Err(Error::model(format!("bad edge ({v}, {w})")));
            }
            if incident[v].iter().any(|&(f, _)| {
                let (a, b) = edges[f];
                (a == w) || (b == w)
            }) {
                return Err(Error::model(format!("duplicate edge ({v}, {w})")));
            }
            if table.len() != unary[v].len() || table.iter().any(|row| row.len() != unary[w].len()) {
                return Err(Error::model(format!("pairwise table of edge {e} has the wrong shape")));
            }
            if !table.iter().flatten().all(|&x| positive(x)) {
                return Err(Error::model(format!("pairwise potential of edge {e} must be strictly positive")));
            }
            incident[v].push((e, true));
            incident[w].push((e, false));
        }
        Ok(Self { unary, edges, pairwise, incident })
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

    pub fn num_vertices(&self) -> usize {
        self.unary.len()
    }

    pub fn labels(&self, v: usize) -> usize {
        self.unary[v].len()
    }

    pub fn unary(&self, v: usize) -> &[T] {
        &self.unary[v]
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn pairwise(&self, e: usize) -> &[Vec<T>] {
        &self.pairwise[e]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.incident[v].len()
    }

    pub(crate) fn incident(&self, v: usize) -> &[(usize, bool)] {
        &self.incident[v]
    }

    /// `ψ_e` read with `v`'s label first, where `v` is one endpoint of `e`.
    pub(crate) fn psi_from(&self, e: usize, v_first: bool, xv: usize, xw: usize) -> T {
        if v_first {
            self.pairwise[e][xv][xw]
        } else {
            self.pairwise[e][xw][xv]
        }
    }

    /// `Σ log φ + Σ log ψ` at a full configuration.
    pub fn log_weight(&self, x: &[usize]) -> T {
        let u: T = self.unary.iter().zip(x).map(|(phi, &a)| phi[a].ln()).sum();
        let p: T = self.edges.iter().zip(&self.pairwise).map(|(&(v, w), t)| t[x[v]][x[w]].ln()).sum();
        u + p
    }

    /// Energy `−log weight`, the quantity minimized by MAP estimation.
    pub fn energy(&self, x: &[usize]) -> T {
        -self.log_weight(x)
    }

    /// True when the graph has no cycles.
    pub fn is_forest(&self) -> bool {
        let mut parent: Vec<usize> = (0..self.num_vertices()).collect();
        fn find(p: &mut [usize], mut i: usize) -> usize {
            while p[i] != i {
                p[i] = p[p[i]];
                i = p[i];
            }
            i
        }
        for &(v, w) in &self.edges {
            let (a, b) = (find(&mut parent, v), find(&mut parent, w));
            if a == b {
                return false;
            }
            parent[a] = b;
        }
        true
    }

    /// The same distribution as a Gibbs model at `T = 1` with `E = −log(potential)`,
    /// giving access to exact enumeration.
    pub fn to_gibbs(&self) -> Result<GibbsModel<T>> {
        let mut terms: Vec<CliqueTerm<T>> = self
            .unary
            .iter()
            .enumerate()
            .map(|(v, phi)| CliqueTerm::Unary { vertex: v, energy: phi.iter().map(|p| -p.ln()).collect() })
            .collect();
        for (&e, t) in self.edges.iter().zip(&self.pairwise) {
            terms.push(CliqueTerm::Pair {
                vertices: e,
                energy: t.iter().map(|row| row.iter().map(|p| -p.ln()).collect()).collect(),
            });
        }
        GibbsModel::new(self.unary.iter().map(Vec::len).collect(), &self.edges, terms, T::one())
    }
}
