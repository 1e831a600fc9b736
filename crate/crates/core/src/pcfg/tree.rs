use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pcfg::grammar::Pcfg;
use crate::rng::{categorical, seeded, PtRng};
use crate::scalar::Real;

/// Cap on vertices in one sampled tree.
pub const MAX_TREE_VERTICES: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TreeNode {
    pub label: usize,
    /// Node indices of the children, in slot order.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<usize>,
    /// Emitted terminal, for leaves.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symbol: Option<usize>,
}

/// Rooted ordered tree stored as an arena; node 0 is the root. Leaves read
/// left to right give the yield.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ParseTree {
    pub nodes: Vec<TreeNode>,
}

impl ParseTree {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Leaf node indices in left-to-right order.
    pub fn leaves(&self) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![0usize];
        while let Some(i) = stack.pop() {
            let n = &self.nodes[i];
            if n.children.is_empty() {
                out.push(i);
            }
            stack.extend(n.children.iter().rev());
        }
        out
    }

    pub fn yield_symbols(&self) -> Vec<usize> {
        self.leaves().into_iter().filter_map(|i| self.nodes[i].symbol).collect()
    }

    /// Parent index of every node (`None` for the root).
    pub fn parents(&self) -> Vec<Option<usize>> {
        let mut p = vec![None; self.nodes.len()];
        for (i, n) in self.nodes.iter().enumerate() {
            for &c in &n.children {
                p[c] = Some(i);
            }
        }
        p
    }

    /// Bracketed form, e.g. `(S (A x) (A x))`.
    pub fn render<T: Real>(&self, g: &Pcfg<T>) -> String {
        fn go<T: Real>(t: &ParseTree, g: &Pcfg<T>, i: usize, out: &mut String) {
            let n = &t.nodes[i];
            out.push('(');
            out.push_str(&g.label(n.label).name);
            if let Some(s) = n.symbol {
                out.push(' ');
                out.push_str(&g.terminals()[s]);
            }
            for &c in &n.children {
                out.push(' ');
                go(t, g, c, out);
            }
            out.push(')');
        }
        let mut s = String::new();
        if !self.nodes.is_empty() {
            go(self, g, 0, &mut s);
        }
        s
    }
}

/// Ancestral sampling: root from `ρ`, each child slot independently given
/// its parent, one emission per leaf.
pub fn sample_tree<T: Real>(g: &Pcfg<T>, seed: u64) -> Result<ParseTree> {
    sample_tree_with(g, &mut seeded(seed))
}

/// As [`sample_tree`], drawing from a caller-supplied stream.
pub fn sample_tree_with<T: Real>(g: &Pcfg<T>, rng: &mut PtRng) -> Result<ParseTree> {
    let report = g.validate();
    if !report.is_valid() {
        return Err(Error::model(report.violations.join("; ")));
    }
    sample_unchecked(g, rng)
}

pub(crate) fn sample_unchecked<T: Real>(g: &Pcfg<T>, rng: &mut PtRng) -> Result<ParseTree> {
    let weights = |p: &[T]| p.iter().map(|x| x.as_f64()).collect::<Vec<f64>>();
    let root = categorical(rng, &weights(g.root()));
    let mut nodes = vec![TreeNode { label: root, children: vec![], symbol: None }];
    let mut stack = vec![0usize];
    while let Some(i) = stack.pop() {
        let spec = g.label(nodes[i].label);
        if spec.arity == 0 {
            nodes[i].symbol = Some(categorical(rng, &weights(&spec.emission)));
            continue;
        }
        let first = nodes.len();
        for slot in &spec.children {
            if nodes.len() >= MAX_TREE_VERTICES {
                return Err(Error::RunawayTree { limit: MAX_TREE_VERTICES });
            }
            let label = categorical(rng, &weights(slot));
            nodes.push(TreeNode { label, children: vec![], symbol: None });
        }
        nodes[i].children = (first..nodes.len()).collect();
        // leftmost child on top so nodes are drawn in pre-order
        stack.extend((first..nodes.len()).rev());
    }
    Ok(ParseTree { nodes })
}

/// Where a tree first failed to be a possible outcome of the grammar.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ZeroLocation {
    pub node: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeLogProb<T> {
    /// `log ρ(root) + Σ log p₁ + Σ log p₂`, or `−∞`.
    pub log_prob: T,
    pub zero_at: Option<ZeroLocation>,
}

pub fn tree_log_prob<T: Real>(g: &Pcfg<T>, tree: &ParseTree) -> TreeLogProb<T> {
    let zero = |node: usize, reason: String| TreeLogProb { log_prob: T::neg_infinity(), zero_at: Some(ZeroLocation { node, reason }) };
    if tree.nodes.is_empty() {
        return zero(0, "empty tree".into());
    }
    let nl = g.num_labels();
    let mut total = T::zero();
    let root = tree.nodes[0].label;
    if root >= nl || g.root()[root] <= T::zero() {
        return zero(0, "root label has zero probability".into());
    }
    total += g.root()[root].ln();
    let mut visited = vec![false; tree.nodes.len()];
    let mut stack = vec![0usize];
    while let Some(i) = stack.pop() {
        if std::mem::replace(&mut visited[i], true) {
            return zero(i, "node reached twice".into());
        }
        let n = &tree.nodes[i];
        let spec = g.label(n.label);
        if n.children.len() != spec.arity {
            return zero(i, format!("label {} has arity {} but node has {} children", spec.name, spec.arity, n.children.len()));
        }
        if spec.arity == 0 {
            let p = match n.symbol {
                Some(s) if s < spec.emission.len() => spec.emission[s],
                _ => return zero(i, "leaf without a valid terminal".into()),
            };
            if p <= T::zero() {
                return zero(i, format!("{} cannot emit {}", spec.name, g.terminals()[n.symbol.unwrap_or(0)]));
            }
            total += p.ln();
            continue;
        }
        if n.symbol.is_some() {
            return zero(i, "internal node carries a terminal".into());
        }
        for (slot, &c) in n.children.iter().enumerate() {
            let Some(child) = tree.nodes.get(c) else {
                return zero(i, format!("child index {c} out of range"));
            };
            if child.label >= nl {
                return zero(c, "unknown label".into());
            }
            let p = spec.children[slot][child.label];
            if p <= T::zero() {
                return zero(c, format!("{} cannot take {} in slot {slot}", spec.name, g.label(child.label).name));
            }
            total += p.ln();
            stack.push(c);
        }
    }
    if let Some(i) = visited.iter().position(|v| !v) {
        return zero(i, "node not reachable from the root".into());
    }
    TreeLogProb { log_prob: total, zero_at: None }
}
