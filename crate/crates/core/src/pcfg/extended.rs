use std::collections::BTreeMap;

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::pcfg::grammar::Pcfg;
use crate::pcfg::tree::sample_tree_with;
use crate::rng::seeded;
use crate::scalar::Real;

/// Smallest expected count accepted in any contingency entry.
pub const MIN_EXPECTED: f64 = 5.0;

/// Independence test for one extended state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellTest {
    /// `(label, child slot)` from the leaf up to the root; the root's slot is 0.
    pub state: Vec<(usize, usize)>,
    pub count: usize,
    pub chi2: f64,
    pub df: usize,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtendedStateReport {
    pub samples: usize,
    /// Samples with too few leaves to have leaf `k`.
    pub short_trees: usize,
    pub tests: Vec<CellTest>,
    /// Cells with too little data for the χ² approximation.
    pub skipped: usize,
    /// Cells where past or future takes a single value, so there is nothing to test.
    pub degenerate: usize,
    /// True when no cell could be tested at all.
    pub vacuous: bool,
}

impl ExtendedStateReport {
    pub fn rejections(&self, level: f64) -> usize {
        self.tests.iter().filter(|t| t.p_value < level).count()
    }
}

/// Samples `num_samples` trees and, in each tree with more than `leaf`
/// leaves, records the extended state of leaf `k = leaf` (the labels and
/// child slots on its path to the root) with the neighbouring observations
/// `s_{k−1}` (past) and `s_{k+1}` (future); a boundary marker stands in past
/// either end. For each extended state, past and future get a χ² test of
/// independence.
///
/// The leaf index is fixed rather than drawn per tree: whether leaf `k`
/// exists depends only on the subtrees left of its path, so conditioning on
/// it leaves the two sides independent.
pub fn extended_state_check<T: Real>(
    g: &Pcfg<T>,
    num_samples: usize,
    leaf: usize,
    seed: u64,
) -> Result<ExtendedStateReport> {
    if g.num_labels() > 3 {
        return Err(Error::input("extended-state check is meant for toy grammars (at most 3 labels)"));
    }
    let boundary = g.terminals().len();
    let mut rng = seeded(seed);
    let mut short_trees = 0;
    let mut cells: BTreeMap<Vec<(usize, usize)>, BTreeMap<(usize, usize), usize>> = BTreeMap::new();
    for _ in 0..num_samples {
        let tree = sample_tree_with(g, &mut rng)?;
        let leaves = tree.leaves();
        let k = leaf;
        if leaves.len() <= k {
            short_trees += 1;
            continue;
        }
        let parents = tree.parents();
        let mut state = Vec::new();
        let mut v = leaves[k];
        loop {
            let slot = parents[v].map_or(0, |p| tree.nodes[p].children.iter().position(|&c| c == v).unwrap_or(0));
            state.push((tree.nodes[v].label, slot));
            match parents[v] {
                Some(p) => v = p,
                None => break,
            }
        }
        let sym = |i: usize| tree.nodes[i].symbol.unwrap_or(boundary);
        let past = if k > 0 { sym(leaves[k - 1]) } else { boundary };
        let future = if k + 1 < leaves.len() { sym(leaves[k + 1]) } else { boundary };
        *cells.entry(state).or_default().entry((past, future)).or_default() += 1;
    }

    let (mut tests, mut skipped, mut degenerate) = (Vec::new(), 0, 0);
    for (state, table) in cells {
        let count: usize = table.values().sum();
        let mut rows: BTreeMap<usize, usize> = BTreeMap::new();
        let mut cols: BTreeMap<usize, usize> = BTreeMap::new();
        for (&(a, b), &c) in &table {
            *rows.entry(a).or_default() += c;
            *cols.entry(b).or_default() += c;
        }
        if rows.len() < 2 || cols.len() < 2 {
            degenerate += 1;
            continue;
        }
        let n = count as f64;
        let min_expected = rows.values().map(|&r| r as f64).fold(f64::INFINITY, f64::min)
            * cols.values().map(|&c| c as f64).fold(f64::INFINITY, f64::min)
            / n;
        if min_expected < MIN_EXPECTED {
            skipped += 1;
            continue;
        }
        let mut chi2 = 0.0;
        for (&a, &ra) in &rows {
            for (&b, &cb) in &cols {
                let e = ra as f64 * cb as f64 / n;
                let o = table.get(&(a, b)).copied().unwrap_or(0) as f64;
                chi2 += (o - e) * (o - e) / e;
            }
        }
        let df = (rows.len() - 1) * (cols.len() - 1);
        let p_value = ChiSquared::new(df as f64).expect("positive degrees of freedom").sf(chi2);
        tests.push(CellTest { state, count, chi2, df, p_value });
    }
    let vacuous = tests.is_empty();
    Ok(ExtendedStateReport { samples: num_samples, short_trees, tests, skipped, degenerate, vacuous })
}
