use crate::error::{Error, Result};
use crate::pcfg::grammar::Pcfg;
use crate::pcfg::tree::{ParseTree, TreeNode};
use crate::scalar::Real;

/// Default unary-chain cap for span parsing.
pub const DEFAULT_UNARY_CAP: usize = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct InsideResult<T> {
    /// Total probability of all parse trees of the yield whose unary chains
    /// respect the cap.
    pub prob: T,
    pub unary_cap: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ViterbiParse<T> {
    pub tree: ParseTree,
    pub log_prob: T,
    /// Number of positive-probability parses (saturating).
    pub parse_count: u128,
    pub unary_cap: usize,
}

impl<T> ViterbiParse<T> {
    /// The best parse carries all of the inside mass exactly when it is the
    /// only parse.
    pub fn is_unique(&self) -> bool {
        self.parse_count == 1
    }
}

#[derive(Clone, Copy)]
enum Back {
    None,
    Leaf,
    Binary { split: usize, left: usize, right: usize },
    Unary { child: usize },
}

/// CKY-style chart over spans. A unary chain over one span may hold at most
/// `cap + 1` consecutive arity-1 vertices: level `j` of the chart allows
/// chains of length `≤ j`, and the full value is level `cap + 1`.
struct Chart<V> {
    n: usize,
    labels: usize,
    levels: usize,
    // [level][start][len][label]
    cells: Vec<V>,
}

impl<V: Copy> Chart<V> {
    fn new(n: usize, labels: usize, levels: usize, fill: V) -> Self {
        Self { n, labels, levels, cells: vec![fill; levels * n * (n + 1) * labels] }
    }

    fn idx(&self, level: usize, start: usize, len: usize, label: usize) -> usize {
        ((level * self.n + start) * (self.n + 1) + len) * self.labels + label
    }

    fn get(&self, level: usize, start: usize, len: usize, label: usize) -> V {
        self.cells[self.idx(level, start, len, label)]
    }

    fn set(&mut self, level: usize, start: usize, len: usize, label: usize, v: V) {
        let i = self.idx(level, start, len, label);
        self.cells[i] = v;
    }

    fn full(&self, start: usize, len: usize, label: usize) -> V {
        self.get(self.levels - 1, start, len, label)
    }
}

/// The shared recursion, instantiated for sum (inside), max (Viterbi) and
/// parse counting.
trait Semiring: Copy {
    fn zero() -> Self;
    fn plus(self, other: Self) -> Self;
    fn times(self, other: Self) -> Self;
    /// Weight of a grammar probability.
    fn weight<T: Real>(p: T) -> Self;
}

#[derive(Clone, Copy)]
struct Count(u128);

impl Semiring for Count {
    fn zero() -> Self {
        Count(0)
    }
    fn plus(self, o: Self) -> Self {
        Count(self.0.saturating_add(o.0))
    }
    fn times(self, o: Self) -> Self {
        Count(self.0.saturating_mul(o.0))
    }
    fn weight<T: Real>(p: T) -> Self {
        Count((p > T::zero()) as u128)
    }
}

#[derive(Clone, Copy)]
struct Sum(f64);

impl Semiring for Sum {
    fn zero() -> Self {
        Sum(0.0)
    }
    fn plus(self, o: Self) -> Self {
        Sum(self.0 + o.0)
    }
    fn times(self, o: Self) -> Self {
        Sum(self.0 * o.0)
    }
    fn weight<T: Real>(p: T) -> Self {
        Sum(p.as_f64())
    }
}

fn check<T: Real>(g: &Pcfg<T>, symbols: &[usize]) -> Result<()> {
    if g.max_arity() > 2 {
        return Err(Error::input("span parsing needs every label to have arity at most 2"));
    }
    if symbols.is_empty() {
        return Err(Error::input("yield is empty"));
    }
    if symbols.iter().any(|&s| s >= g.terminals().len()) {
        return Err(Error::input("yield uses an unknown terminal"));
    }
    Ok(())
}

fn fill_chart<T: Real, S: Semiring>(g: &Pcfg<T>, symbols: &[usize], cap: usize) -> Chart<S> {
    let n = symbols.len();
    let nl = g.num_labels();
    let levels = cap + 2;
    let mut chart = Chart::new(n, nl, levels, S::zero());
    for len in 1..=n {
        for start in 0..=n - len {
            // level 0: leaves and binary labels
            for x in 0..nl {
                let spec = g.label(x);
                let v = match spec.arity {
                    0 if len == 1 => S::weight(spec.emission[symbols[start]]),
                    2 if len >= 2 => {
                        let mut acc = S::zero();
                        for k in 1..len {
                            let slot = |s: usize, b: usize, l: usize| {
                                (0..nl).fold(S::zero(), |a, y| a.plus(S::weight(spec.children[s][y]).times(chart.full(b, l, y))))
                            };
                            acc = acc.plus(slot(0, start, k).times(slot(1, start + k, len - k)));
                        }
                        acc
                    }
                    _ => S::zero(),
                };
                for level in 0..levels {
                    if spec.arity != 1 {
                        chart.set(level, start, len, x, v);
                    }
                }
            }
            for level in 1..levels {
                for x in 0..nl {
                    let spec = g.label(x);
                    if spec.arity == 1 {
                        let v = (0..nl).fold(S::zero(), |a, y| {
                            a.plus(S::weight(spec.children[0][y]).times(chart.get(level - 1, start, len, y)))
                        });
                        chart.set(level, start, len, x, v);
                    }
                }
            }
        }
    }
    chart
}

fn at_root<T: Real, S: Semiring>(g: &Pcfg<T>, chart: &Chart<S>, n: usize) -> S {
    (0..g.num_labels()).fold(S::zero(), |a, x| a.plus(S::weight(g.root()[x]).times(chart.full(0, n, x))))
}

/// Total probability of the yield, summed over parse trees (unary chains of
/// at most `unary_cap + 1` vertices). Unreachable yields give 0.
pub fn inside<T: Real>(g: &Pcfg<T>, symbols: &[usize], unary_cap: usize) -> Result<InsideResult<T>> {
    check(g, symbols)?;
    let chart = fill_chart::<T, Sum>(g, symbols, unary_cap);
    Ok(InsideResult { prob: T::lit(at_root(g, &chart, symbols.len()).0), unary_cap })
}

/// Number of positive-probability parse trees (saturating at `u128::MAX`).
pub fn count_parses<T: Real>(g: &Pcfg<T>, symbols: &[usize], unary_cap: usize) -> Result<u128> {
    check(g, symbols)?;
    let chart = fill_chart::<T, Count>(g, symbols, unary_cap);
    Ok(at_root(g, &chart, symbols.len()).0)
}

/// Most probable parse tree. Ties go to the earliest split point and then
/// the lowest label indices.
pub fn viterbi_parse<T: Real>(g: &Pcfg<T>, symbols: &[usize], unary_cap: usize) -> Result<ViterbiParse<T>> {
    check(g, symbols)?;
    let n = symbols.len();
    let nl = g.num_labels();
    let levels = unary_cap + 2;
    let ln = |p: T| if p > T::zero() { p.ln() } else { T::neg_infinity() };
    let mut best: Chart<T> = Chart::new(n, nl, levels, T::neg_infinity());
    let mut back: Chart<Back> = Chart::new(n, nl, levels, Back::None);
    for len in 1..=n {
        for start in 0..=n - len {
            for x in 0..nl {
                let spec = g.label(x);
                let (v, b) = match spec.arity {
                    0 if len == 1 => (ln(spec.emission[symbols[start]]), Back::Leaf),
                    2 if len >= 2 => {
                        let mut top = (T::neg_infinity(), Back::None);
                        for k in 1..len {
                            for y in 0..nl {
                                let l = ln(spec.children[0][y]) + best.full(start, k, y);
                                if l == T::neg_infinity() {
                                    continue;
                                }
                                for z in 0..nl {
                                    let v = l + ln(spec.children[1][z]) + best.full(start + k, len - k, z);
                                    if v > top.0 {
                                        top = (v, Back::Binary { split: k, left: y, right: z });
                                    }
                                }
                            }
                        }
                        top
                    }
                    _ => (T::neg_infinity(), Back::None),
                };
                if spec.arity != 1 {
                    for level in 0..levels {
                        best.set(level, start, len, x, v);
                        back.set(level, start, len, x, b);
                    }
                }
            }
            for level in 1..levels {
                for x in 0..nl {
                    let spec = g.label(x);
                    if spec.arity != 1 {
                        continue;
                    }
                    let mut top = (T::neg_infinity(), Back::None);
                    for y in 0..nl {
                        let v = ln(spec.children[0][y]) + best.get(level - 1, start, len, y);
                        if v > top.0 {
                            top = (v, Back::Unary { child: y });
                        }
                    }
                    best.set(level, start, len, x, top.0);
                    back.set(level, start, len, x, top.1);
                }
            }
        }
    }
    let mut root = (T::neg_infinity(), 0usize);
    for x in 0..nl {
        let v = ln(g.root()[x]) + best.full(0, n, x);
        if v > root.0 {
            root = (v, x);
        }
    }
    if root.0 == T::neg_infinity() {
        return Err(Error::NoParse);
    }

    let mut nodes = vec![TreeNode { label: root.1, children: vec![], symbol: None }];
    // (node, level, start, len)
    let mut stack = vec![(0usize, levels - 1, 0usize, n)];
    while let Some((i, level, start, len)) = stack.pop() {
        let label = nodes[i].label;
        match back.get(level, start, len, label) {
            Back::Leaf => nodes[i].symbol = Some(symbols[start]),
            Back::Binary { split, left, right } => {
                let c = nodes.len();
                nodes.push(TreeNode { label: left, children: vec![], symbol: None });
                nodes.push(TreeNode { label: right, children: vec![], symbol: None });
                nodes[i].children = vec![c, c + 1];
                stack.push((c, levels - 1, start, split));
                stack.push((c + 1, levels - 1, start + split, len - split));
            }
            Back::Unary { child } => {
                let c = nodes.len();
                nodes.push(TreeNode { label: child, children: vec![], symbol: None });
                nodes[i].children = vec![c];
                stack.push((c, level - 1, start, len));
            }
            Back::None => unreachable!("backpointer missing on a finite-probability cell"),
        }
    }
    Ok(ViterbiParse {
        tree: ParseTree { nodes },
        log_prob: root.0,
        parse_count: count_parses(g, symbols, unary_cap)?,
        unary_cap,
    })
}
