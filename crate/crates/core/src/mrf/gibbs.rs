//! Generic Gibbs models on a finite graph.

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::PtRng;
use crate::scalar::{log_sum_exp, Real};

/// Energy term on a clique of size one or two.
#[derive(Debug, Clone, PartialEq)]
pub enum CliqueTerm<T> {
    /// `energy[x_v]`.
    Unary { vertex: usize, energy: Vec<T> },
    /// `energy[x_v][x_w]`.
    Pair { vertices: (usize, usize), energy: Vec<Vec<T>> },
}

/// `Pr_T(x) = exp(−Σ_C E_C(x_C) / T) / Z_T` over labels `0..domains[v]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GibbsModel<T> {
    domains: Vec<usize>,
    neighbors: Vec<Vec<usize>>,
    terms: Vec<CliqueTerm<T>>,
    // indices into `terms` touching each vertex
    incident: Vec<Vec<usize>>,
    temperature: T,
}

/// Limit on the number of configurations summed by exact routines.
pub const ENUMERATION_LIMIT: u128 = 1 << 20;

impl<T: Real> GibbsModel<T> {
    pub fn new(domains: Vec<usize>, edges: &[(usize, usize)], terms: Vec<CliqueTerm<T>>, temperature: T) -> Result<Self> {
        let n = domains.len();
        if domains.contains(&0) {
            return Err(Error::model("every vertex needs at least one label"));
        }
        if !(temperature > T::zero()) || !temperature.is_finite() {
            return Err(Error::model("temperature must be positive"));
        }
        let mut neighbors = vec![Vec::new(); n];
        for &(a, b) in edges {
            if a >= n || b >= n || a == b {
                return Err(Error::model(format!("bad edge ({a}, {b})")));
            }
            if !neighbors[a].contains(&b) {
                neighbors[a].push(b);
                neighbors[b].push(a);
            }
        }
        let mut incident = vec![Vec::new(); n];
        for (i, term) in terms.iter().enumerate() {
            match term {
                CliqueTerm::Unary { vertex, energy } => {
                    if *vertex >= n || energy.len() != domains[*vertex] {
                        return Err(Error::model(format!("unary term {i} does not match its vertex")));
                    }
                    incident[*vertex].push(i);
                }
                CliqueTerm::Pair { vertices: (a, b), energy } => {
                    if *a >= n || *b >= n || !neighbors[*a].contains(b) {
                        return Err(Error::model(format!("pair term {i} is not on an edge of the graph")));
                    }
                    if energy.len() != domains[*a] || energy.iter().any(|r| r.len() != domains[*b]) {
                        return Err(Error::model(format!("pair term {i} has the wrong table shape")));
                    }
                    incident[*a].push(i);
                    incident[*b].push(i);
                }
            }
        }
        if terms.iter().any(|t| match t {
            CliqueTerm::Unary { energy, .. } => energy.iter().any(|e| !e.is_finite()),
            CliqueTerm::Pair { energy, .. } => energy.iter().flatten().any(|e| !e.is_finite()),
        }) {
            return Err(Error::model("energies must be finite"));
        }
        Ok(Self { domains, neighbors, terms, incident, temperature })
    }

    pub fn num_vertices(&self) -> usize {
        self.domains.len()
    }

    pub fn domains(&self) -> &[usize] {
        &self.domains
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    pub fn terms(&self) -> &[CliqueTerm<T>] {
        &self.terms
    }

    pub fn temperature(&self) -> T {
        self.temperature
    }

    pub fn with_temperature(&self, temperature: T) -> Result<Self> {
        if !(temperature > T::zero()) {
            return Err(Error::model("temperature must be positive"));
        }
        let mut m = self.clone();
        m.temperature = temperature;
        Ok(m)
    }

    fn term_energy(term: &CliqueTerm<T>, x: &[usize]) -> T {
        match term {
            CliqueTerm::Unary { vertex, energy } => energy[x[*vertex]],
            CliqueTerm::Pair { vertices: (a, b), energy } => energy[x[*a]][x[*b]],
        }
    }

    /// `Σ_C E_C(x_C)` (not divided by the temperature).
    pub fn energy(&self, x: &[usize]) -> T {
        self.terms.iter().map(|t| Self::term_energy(t, x)).sum()
    }

    pub fn num_configurations(&self) -> u128 {
        self.domains.iter().fold(1u128, |acc, &d| acc.saturating_mul(d as u128))
    }

    fn check_enumerable(&self) -> Result<()> {
        let c = self.num_configurations();
        if c > ENUMERATION_LIMIT {
            return Err(Error::StateSpaceTooLarge { configurations: c, limit: ENUMERATION_LIMIT });
        }
        Ok(())
    }

    /// Visits every configuration in mixed-radix order (vertex 0 fastest).
    pub fn for_each_configuration(&self, mut f: impl FnMut(&[usize])) -> Result<()> {
        self.check_enumerable()?;
        let n = self.domains.len();
        let mut x = vec![0usize; n];
        loop {
            f(&x);
            let mut i = 0;
            loop {
                if i == n {
                    return Ok(());
                }
                x[i] += 1;
                if x[i] < self.domains[i] {
                    break;
                }
                x[i] = 0;
                i += 1;
            }
        }
    }

    /// Normalized probabilities of all configurations, in the order of
    /// [`for_each_configuration`](Self::for_each_configuration).
    pub fn joint_table(&self) -> Result<(Vec<T>, T)> {
        let mut logits = Vec::new();
        self.for_each_configuration(|x| logits.push(-self.energy(x) / self.temperature))?;
        let log_z = log_sum_exp(&logits);
        Ok((logits.into_iter().map(|l| (l - log_z).exp()).collect(), log_z))
    }

    /// Exact per-vertex marginals and `log Z_T` by exhaustive summation.
    pub fn exact_marginals(&self) -> Result<ExactMarginals<T>> {
        let (probs, log_z) = self.joint_table()?;
        let mut marginals: Vec<Vec<T>> = self.domains.iter().map(|&d| vec![T::zero(); d]).collect();
        let mut i = 0;
        self.for_each_configuration(|x| {
            for (v, &label) in x.iter().enumerate() {
                marginals[v][label] += probs[i];
            }
            i += 1;
        })?;
        Ok(ExactMarginals { marginals, log_z })
    }

    /// Heat-bath conditional `Pr_T(x_v = · | x_rest)`.
    pub fn conditional(&self, x: &[usize], v: usize) -> Vec<T> {
        let mut y = x.to_vec();
        let logits: Vec<T> = (0..self.domains[v])
            .map(|label| {
                y[v] = label;
                -self.incident[v].iter().map(|&t| Self::term_energy(&self.terms[t], &y)).sum::<T>() / self.temperature
            })
            .collect();
        let lz = log_sum_exp(&logits);
        logits.into_iter().map(|l| (l - lz).exp()).collect()
    }

    /// One raster-order heat-bath sweep over all vertices.
    pub fn gibbs_sweep(&self, x: &mut [usize], rng: &mut PtRng) {
        for v in 0..self.domains.len() {
            let p = self.conditional(x, v);
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let mut pick = p.len() - 1;
            for (label, q) in p.iter().enumerate() {
                acc += q.as_f64();
                if u < acc {
                    pick = label;
                    break;
                }
            }
            x[v] = pick;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactMarginals<T> {
    pub marginals: Vec<Vec<T>>,
    pub log_z: T,
}
