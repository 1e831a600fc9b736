use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// One nonterminal or preterminal label. A label's arity is fixed; arity-0
/// labels are leaves and carry an emission distribution over terminals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Deserialize<'de>"))]
pub struct LabelSpec<T> {
    pub name: String,
    pub arity: usize,
    /// `children[k][b]`: probability that child slot `k` gets label `b`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<Vec<T>>,
    /// `emission[s]` for arity-0 labels.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub emission: Vec<T>,
}

/// Random labelled branching tree: root label from `root`, each child slot's
/// label drawn independently given its parent, each leaf emitting one terminal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPcfg<T>")]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + Deserialize<'de>"))]
pub struct Pcfg<T> {
    labels: Vec<LabelSpec<T>>,
    terminals: Vec<String>,
    root: Vec<T>,
}

#[derive(Deserialize)]
struct RawPcfg<T> {
    labels: Vec<LabelSpec<T>>,
    terminals: Vec<String>,
    root: Vec<T>,
}

impl<T: Real> TryFrom<RawPcfg<T>> for Pcfg<T> {
    type Error = Error;
    fn try_from(raw: RawPcfg<T>) -> Result<Self> {
        Pcfg::new(raw.labels, raw.terminals, raw.root)
    }
}

/// Outcome of [`Pcfg::validate`]; problems are listed rather than raised.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<String>,
    /// Spectral radius of the mean-offspring matrix.
    pub spectral_radius: f64,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl<T: Real> Pcfg<T> {
    /// Checks shapes only; probabilistic sanity is left to [`Pcfg::validate`].
    pub fn new(labels: Vec<LabelSpec<T>>, terminals: Vec<String>, root: Vec<T>) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::model("grammar needs at least one label"));
        }
        if root.len() != n {
            return Err(Error::model("root distribution needs one entry per label"));
        }
        let mut seen = std::collections::HashSet::new();
        for t in &terminals {
            if t.is_empty() || !seen.insert(t.as_str()) {
                return Err(Error::model(format!("terminal {t:?} is empty or repeated")));
            }
        }
        for l in &labels {
            if l.children.len() != l.arity || l.children.iter().any(|c| c.len() != n) {
                return Err(Error::model(format!("label {} needs {} child tables over {n} labels", l.name, l.arity)));
            }
            if l.arity == 0 && l.emission.len() != terminals.len() {
                return Err(Error::model(format!("leaf label {} needs an emission table over the terminals", l.name)));
            }
            if l.arity > 0 && !l.emission.is_empty() {
                return Err(Error::model(format!("label {} has children and cannot emit", l.name)));
            }
        }
        Ok(Self { labels, terminals, root })
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

    pub fn labels(&self) -> &[LabelSpec<T>] {
        &self.labels
    }

    pub fn label(&self, a: usize) -> &LabelSpec<T> {
        &self.labels[a]
    }

    pub fn num_labels(&self) -> usize {
        self.labels.len()
    }

    pub fn terminals(&self) -> &[String] {
        &self.terminals
    }

    pub fn root(&self) -> &[T] {
        &self.root
    }

    pub fn max_arity(&self) -> usize {
        self.labels.iter().map(|l| l.arity).max().unwrap_or(0)
    }

    /// Splits a yield into terminal indices: on whitespace when present,
    /// otherwise one character per terminal.
    pub fn parse_yield(&self, text: &str) -> Result<Vec<usize>> {
        let tokens: Vec<String> = if text.chars().any(char::is_whitespace) {
            text.split_whitespace().map(str::to_string).collect()
        } else {
            text.chars().map(String::from).collect()
        };
        if tokens.is_empty() {
            return Err(Error::input("yield is empty"));
        }
        tokens
            .iter()
            .map(|t| {
                self.terminals
                    .iter()
                    .position(|s| s == t)
                    .ok_or_else(|| Error::input(format!("unknown terminal {t:?}")))
            })
            .collect()
    }

    pub fn render_yield(&self, symbols: &[usize]) -> String {
        let sep = if self.terminals.iter().all(|t| t.chars().count() == 1) { "" } else { " " };
        symbols.iter().map(|&s| self.terminals[s].as_str()).collect::<Vec<_>>().join(sep)
    }

    /// `M[a][b]`: expected number of children labelled `b` under a parent `a`.
    pub fn mean_offspring(&self) -> Vec<Vec<T>> {
        self.labels
            .iter()
            .map(|l| {
                let mut row = vec![T::zero(); self.labels.len()];
                for slot in &l.children {
                    for (m, &p) in row.iter_mut().zip(slot) {
                        *m += p;
                    }
                }
                row
            })
            .collect()
    }

    /// Normalization of every table and subcriticality of branching.
    pub fn validate(&self) -> ValidationReport {
        let tol = 1e-12;
        let mut violations = Vec::new();
        let check = |what: String, p: &[T], v: &mut Vec<String>| {
            if p.iter().any(|&x| !(x >= T::zero()) || !x.is_finite()) {
                v.push(format!("{what} has a negative or non-finite entry"));
            }
            let s: f64 = p.iter().map(|x| x.as_f64()).sum();
            if (s - 1.0).abs() > tol {
                v.push(format!("{what} sums to {s}"));
            }
        };
        check("root distribution".into(), &self.root, &mut violations);
        for l in &self.labels {
            for (k, slot) in l.children.iter().enumerate() {
                check(format!("child slot {k} of {}", l.name), slot, &mut violations);
            }
            if l.arity == 0 {
                check(format!("emission of {}", l.name), &l.emission, &mut violations);
            }
        }
        let m: Vec<Vec<f64>> = self.mean_offspring().iter().map(|r| r.iter().map(|x| x.as_f64()).collect()).collect();
        let spectral_radius = spectral_radius(&m);
        if !(spectral_radius < 1.0) {
            violations.push(format!("branching is not subcritical: spectral radius {spectral_radius}"));
        }
        ValidationReport { violations, spectral_radius }
    }
}

/// Spectral radius of a non-negative matrix by Gelfand's formula,
/// `ρ = lim ‖M^k‖^{1/k}`, evaluated at `k = 2⁶⁰` by repeated squaring with
/// the scale carried in log form.
pub fn spectral_radius(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    let norm = |a: &[Vec<f64>]| a.iter().map(|r| r.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max);
    let s = norm(m);
    if s == 0.0 {
        return 0.0;
    }
    let mut a: Vec<Vec<f64>> = m.iter().map(|r| r.iter().map(|x| x / s).collect()).collect();
    let mut log_scale = s.ln();
    let mut k = 1.0f64;
    for _ in 0..60 {
        let sq: Vec<Vec<f64>> =
            (0..n).map(|i| (0..n).map(|j| (0..n).map(|l| a[i][l] * a[l][j]).sum()).collect()).collect();
        let s = norm(&sq);
        if s == 0.0 {
            return 0.0;
        }
        log_scale = 2.0 * log_scale + s.ln();
        k *= 2.0;
        a = sq.into_iter().map(|r| r.into_iter().map(|x| x / s).collect()).collect();
    }
    (log_scale / k).exp()
}
