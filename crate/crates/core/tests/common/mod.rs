//! Brute-force oracles shared by the integration and acceptance suites.
//! Everything here enumerates; nothing calls the engines under test.
#![allow(dead_code)]

use pt_core::hmm::{Emission, HmmModel, Observations};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_distribution(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 0.05).collect();
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= s);
    v
}

pub fn random_hmm(rng: &mut impl Rng, n: usize, m: usize) -> HmmModel<f64> {
    HmmModel::new(
        random_distribution(rng, n),
        (0..n).map(|_| random_distribution(rng, n)).collect(),
        Emission::Discrete { probs: (0..n).map(|_| random_distribution(rng, m)).collect() },
    )
    .unwrap()
}

/// Calls `f` on every sequence in `{0..base}^len`.
pub fn for_each_sequence(base: usize, len: usize, mut f: impl FnMut(&[usize])) {
    let mut seq = vec![0usize; len];
    loop {
        f(&seq);
        let mut i = 0;
        loop {
            if i == len {
                return;
            }
            seq[i] += 1;
            if seq[i] < base {
                break;
            }
            seq[i] = 0;
            i += 1;
        }
    }
}

pub fn joint(model: &HmmModel<f64>, path: &[usize], obs: &[usize]) -> f64 {
    let Emission::Discrete { probs } = model.emission() else { unreachable!() };
    let mut p = model.init()[path[0]] * probs[path[0]][obs[0]];
    for k in 1..path.len() {
        p *= model.trans()[path[k - 1]][path[k]] * probs[path[k]][obs[k]];
    }
    p
}

pub struct HmmEnumeration {
    pub evidence: f64,
    /// filtered[k][a] = Pr(x_k = a | s_{≤k})
    pub filtered: Vec<Vec<f64>>,
    pub smoothed: Vec<Vec<f64>>,
    pub best: f64,
}

/// Exhaustive sums over all N^T hidden paths.
pub fn enumerate_hmm(model: &HmmModel<f64>, obs: &[usize]) -> HmmEnumeration {
    let n = model.num_states();
    let t = obs.len();
    let mut smoothed = vec![vec![0.0; n]; t];
    let mut evidence = 0.0;
    let mut best = 0.0f64;
    for_each_sequence(n, t, |path| {
        let p = joint(model, path, obs);
        evidence += p;
        best = best.max(p);
        for k in 0..t {
            smoothed[k][path[k]] += p;
        }
    });
    smoothed.iter_mut().flatten().for_each(|x| *x /= evidence);
    // filtering at k uses only the prefix
    let filtered = (0..t)
        .map(|k| {
            let mut f = vec![0.0; n];
            let prefix = &obs[..=k];
            for_each_sequence(n, k + 1, |path| f[path[k]] += joint(model, path, prefix));
            let s: f64 = f.iter().sum();
            f.iter_mut().for_each(|x| *x /= s);
            f
        })
        .collect();
    HmmEnumeration { evidence, filtered, smoothed, best }
}

pub fn symbols(obs: &[usize]) -> Observations<f64> {
    Observations::Symbols(obs.to_vec())
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// Ising energy `−J Σ x x′ − h Σ x y` computed straight from the definition.
pub fn ising_energy(rows: usize, cols: usize, field: &[f64], j: f64, h: f64, spins: &[i8]) -> f64 {
    let mut e = 0.0;
    for r in 0..rows {
        for c in 0..cols {
            let x = spins[r * cols + c] as f64;
            if c + 1 < cols {
                e -= j * x * spins[r * cols + c + 1] as f64;
            }
            if r + 1 < rows {
                e -= j * x * spins[(r + 1) * cols + c] as f64;
            }
            e -= h * x * field[r * cols + c];
        }
    }
    e
}

/// Spin configuration number `k` (bit `v` set ↔ site `v` is +1).
pub fn spins_of(k: usize, n: usize) -> Vec<i8> {
    (0..n).map(|v| if k >> v & 1 == 1 { 1 } else { -1 }).collect()
}

pub struct IsingEnumeration {
    /// Gibbs probability of configuration `k` (see `spins_of`).
    pub probs: Vec<f64>,
    pub prob_plus: Vec<f64>,
    pub min_energy: f64,
}

pub fn enumerate_ising(rows: usize, cols: usize, field: &[f64], j: f64, h: f64, t: f64) -> IsingEnumeration {
    let n = rows * cols;
    let energies: Vec<f64> = (0..1usize << n).map(|k| ising_energy(rows, cols, field, j, h, &spins_of(k, n))).collect();
    let min_energy = energies.iter().cloned().fold(f64::INFINITY, f64::min);
    let w: Vec<f64> = energies.iter().map(|e| (-(e - min_energy) / t).exp()).collect();
    let z: f64 = w.iter().sum();
    let probs: Vec<f64> = w.iter().map(|x| x / z).collect();
    let mut prob_plus = vec![0.0; n];
    for (k, p) in probs.iter().enumerate() {
        for (v, pp) in prob_plus.iter_mut().enumerate() {
            if k >> v & 1 == 1 {
                *pp += p;
            }
        }
    }
    IsingEnumeration { probs, prob_plus, min_energy }
}

/// Heat-bath kernel for updating site `v`, as an explicit `2ⁿ × 2ⁿ` matrix
/// (row = from, column = to), with conditionals computed from energies.
pub fn site_kernel(rows: usize, cols: usize, field: &[f64], j: f64, h: f64, t: f64, v: usize) -> Vec<Vec<f64>> {
    let n = rows * cols;
    let size = 1usize << n;
    let mut k = vec![vec![0.0; size]; size];
    for from in 0..size {
        let up = from | 1 << v;
        let down = from & !(1 << v);
        let eu = ising_energy(rows, cols, field, j, h, &spins_of(up, n));
        let ed = ising_energy(rows, cols, field, j, h, &spins_of(down, n));
        let p_up = 1.0 / (1.0 + (-(ed - eu) / t).exp());
        k[from][up] += p_up;
        k[from][down] += 1.0 - p_up;
    }
    k
}

pub fn mat_mul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let (n, m, p) = (a.len(), b.len(), b[0].len());
    (0..n).map(|i| (0..p).map(|c| (0..m).map(|k| a[i][k] * b[k][c]).sum()).collect()).collect()
}

/// Conditional mutual information `I(X_a; X_b | X_S)` of a joint table over
/// configurations indexed by `config(k)`.
pub fn conditional_mutual_information(
    probs: &[f64],
    config: impl Fn(usize) -> Vec<usize>,
    a: usize,
    b: usize,
    sep: &[usize],
) -> f64 {
    use std::collections::HashMap;
    let mut p_sab: HashMap<(Vec<usize>, usize, usize), f64> = HashMap::new();
    let mut p_sa: HashMap<(Vec<usize>, usize), f64> = HashMap::new();
    let mut p_sb: HashMap<(Vec<usize>, usize), f64> = HashMap::new();
    let mut p_s: HashMap<Vec<usize>, f64> = HashMap::new();
    for (k, &p) in probs.iter().enumerate() {
        let x = config(k);
        let s: Vec<usize> = sep.iter().map(|&v| x[v]).collect();
        *p_sab.entry((s.clone(), x[a], x[b])).or_default() += p;
        *p_sa.entry((s.clone(), x[a])).or_default() += p;
        *p_sb.entry((s.clone(), x[b])).or_default() += p;
        *p_s.entry(s).or_default() += p;
    }
    p_sab
        .iter()
        .filter(|(_, &p)| p > 0.0)
        .map(|((s, xa, xb), &p)| p * (p * p_s[s] / (p_sa[&(s.clone(), *xa)] * p_sb[&(s.clone(), *xb)])).ln())
        .sum()
}

/// 64×64-style two-region test pattern: light (1) where the boundary curve
/// `c < cols/2 + amplitude·sin(…)` says so, dark (0) elsewhere, plus Gaussian
/// noise of standard deviation `noise` (relative to the unit contrast).
/// Returns `(noisy, clean_mask)` with the mask in ±1.
pub fn two_region_image(rows: usize, cols: usize, noise: f64, seed: u64) -> (Vec<f64>, Vec<i8>) {
    use rand_distr::{Distribution, Normal};
    let mut r = rng(seed);
    let normal = Normal::new(0.0, noise.max(1e-300)).unwrap();
    let mut img = Vec::with_capacity(rows * cols);
    let mut mask = Vec::with_capacity(rows * cols);
    for row in 0..rows {
        let edge = cols as f64 / 2.0 + cols as f64 / 8.0 * (row as f64 * std::f64::consts::TAU / rows as f64).sin();
        for c in 0..cols {
            let light = (c as f64 + 0.5) < edge;
            mask.push(if light { 1 } else { -1 });
            let n = if noise > 0.0 { normal.sample(&mut r) } else { 0.0 };
            img.push(if light { 1.0 } else { 0.0 } + n);
        }
    }
    (img, mask)
}

/// Raw pairwise potentials, enumerated without the engine.
pub struct PairwiseTables {
    pub unary: Vec<Vec<f64>>,
    pub edges: Vec<(usize, usize)>,
    pub pairwise: Vec<Vec<Vec<f64>>>,
}

pub struct PairwiseEnumeration {
    pub vertex: Vec<Vec<f64>>,
    pub edge: Vec<Vec<Vec<f64>>>,
    pub log_z: f64,
    /// Largest unnormalized weight (the MAP weight) and its log.
    pub max_log_weight: f64,
    /// Normalized probability of every configuration, in mixed-radix order
    /// with vertex 0 fastest.
    pub probs: Vec<f64>,
}

impl PairwiseTables {
    pub fn weight(&self, x: &[usize]) -> f64 {
        let mut w = 1.0;
        for (v, phi) in self.unary.iter().enumerate() {
            w *= phi[x[v]];
        }
        for (&(v, u), t) in self.edges.iter().zip(&self.pairwise) {
            w *= t[x[v]][x[u]];
        }
        w
    }

    pub fn for_each_config(&self, mut f: impl FnMut(&[usize])) {
        let n = self.unary.len();
        let mut x = vec![0usize; n];
        loop {
            f(&x);
            let mut i = 0;
            loop {
                if i == n {
                    return;
                }
                x[i] += 1;
                if x[i] < self.unary[i].len() {
                    break;
                }
                x[i] = 0;
                i += 1;
            }
        }
    }

    pub fn enumerate(&self) -> PairwiseEnumeration {
        let mut weights = Vec::new();
        self.for_each_config(|x| weights.push(self.weight(x)));
        let z: f64 = weights.iter().sum();
        let mut vertex: Vec<Vec<f64>> = self.unary.iter().map(|u| vec![0.0; u.len()]).collect();
        let mut edge: Vec<Vec<Vec<f64>>> =
            self.edges.iter().map(|&(v, w)| vec![vec![0.0; self.unary[w].len()]; self.unary[v].len()]).collect();
        let mut k = 0;
        self.for_each_config(|x| {
            let p = weights[k] / z;
            k += 1;
            for (v, &a) in x.iter().enumerate() {
                vertex[v][a] += p;
            }
            for (e, &(v, w)) in self.edges.iter().enumerate() {
                edge[e][x[v]][x[w]] += p;
            }
        });
        let max_w = weights.iter().cloned().fold(0.0, f64::max);
        PairwiseEnumeration { vertex, edge, log_z: z.ln(), max_log_weight: max_w.ln(), probs: weights.iter().map(|w| w / z).collect() }
    }
}

/// Random tree: vertex `i > 0` attaches to a uniformly chosen earlier vertex.
pub fn random_tree_tables(rng: &mut impl Rng, n: usize, max_labels: usize) -> PairwiseTables {
    let labels: Vec<usize> = (0..n).map(|_| rng.random_range(1..=max_labels)).collect();
    let edges: Vec<(usize, usize)> = (1..n).map(|i| (rng.random_range(0..i), i)).collect();
    random_potentials(rng, &labels, edges)
}

pub fn random_potentials(rng: &mut impl Rng, labels: &[usize], edges: Vec<(usize, usize)>) -> PairwiseTables {
    let unary = labels.iter().map(|&k| (0..k).map(|_| (2.0 * rng.random::<f64>() - 1.0).exp()).collect()).collect();
    let pairwise = edges
        .iter()
        .map(|&(v, w)| {
            (0..labels[v]).map(|_| (0..labels[w]).map(|_| (2.0 * rng.random::<f64>() - 1.0).exp()).collect()).collect()
        })
        .collect();
    PairwiseTables { unary, edges, pairwise }
}

/// `Σ_x p(x) log(p(x)/q(x))` with `0 log 0 = 0`.
pub fn kl(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).filter(|(&a, _)| a > 0.0).map(|(&a, &b)| a * (a / b).ln()).sum()
}

/// Every positive-probability tree of a grammar with exactly `leaves` leaves,
/// generated top-down, each with its probability (root factor excluded) and
/// yield. A chain of consecutive arity-1 vertices may have at most `chain`
/// members, matching the span parser's cap of `chain − 1`.
pub fn enumerate_trees(
    g: &pt_core::pcfg::Pcfg<f64>,
    label: usize,
    leaves: usize,
    chain: usize,
    max_chain: usize,
) -> Vec<(f64, Vec<usize>)> {
    let spec = &g.labels()[label];
    let mut out = Vec::new();
    match spec.arity {
        0 => {
            if leaves == 1 {
                for (s, &p) in spec.emission.iter().enumerate() {
                    if p > 0.0 {
                        out.push((p, vec![s]));
                    }
                }
            }
        }
        1 => {
            if chain > 0 {
                for (y, &p) in spec.children[0].iter().enumerate() {
                    if p > 0.0 {
                        for (q, yld) in enumerate_trees(g, y, leaves, chain - 1, max_chain) {
                            out.push((p * q, yld));
                        }
                    }
                }
            }
        }
        2 => {
            for k in 1..leaves {
                for (y, &py) in spec.children[0].iter().enumerate() {
                    if py == 0.0 {
                        continue;
                    }
                    let left = enumerate_trees(g, y, k, max_chain, max_chain);
                    if left.is_empty() {
                        continue;
                    }
                    for (z, &pz) in spec.children[1].iter().enumerate() {
                        if pz == 0.0 {
                            continue;
                        }
                        let right = enumerate_trees(g, z, leaves - k, max_chain, max_chain);
                        for (ql, yl) in &left {
                            for (qr, yr) in &right {
                                let mut yld = yl.clone();
                                yld.extend(yr);
                                out.push((py * pz * ql * qr, yld));
                            }
                        }
                    }
                }
            }
        }
        _ => panic!("oracle handles arity ≤ 2"),
    }
    out
}

pub struct YieldSummary {
    pub total: f64,
    pub best: f64,
    pub count: usize,
}

/// Per-yield tree sum, best tree probability and tree count, for all yields
/// of length `1..=max_len`, by explicit enumeration.
pub fn enumerate_yields(
    g: &pt_core::pcfg::Pcfg<f64>,
    max_len: usize,
    unary_cap: usize,
) -> std::collections::HashMap<Vec<usize>, YieldSummary> {
    let mut map: std::collections::HashMap<Vec<usize>, YieldSummary> = std::collections::HashMap::new();
    for len in 1..=max_len {
        for (root, &rho) in g.root().iter().enumerate() {
            if rho == 0.0 {
                continue;
            }
            for (p, yld) in enumerate_trees(g, root, len, unary_cap + 1, unary_cap + 1) {
                let e = map.entry(yld).or_insert(YieldSummary { total: 0.0, best: 0.0, count: 0 });
                e.total += rho * p;
                e.best = e.best.max(rho * p);
                e.count += 1;
            }
        }
    }
    map
}

/// Random arity-≤2 grammar with some zero entries; not necessarily subcritical.
pub fn random_grammar(r: &mut impl Rng, labels: usize, terminals: usize) -> pt_core::pcfg::Pcfg<f64> {
    use pt_core::pcfg::{LabelSpec, Pcfg};
    let sparse = |r: &mut dyn rand::RngCore, n: usize| {
        let mut v: Vec<f64> = (0..n).map(|_| if r.random::<f64>() < 0.3 { 0.0 } else { r.random::<f64>() + 0.05 }).collect();
        if v.iter().all(|&x| x == 0.0) {
            v[r.random_range(0..n)] = 1.0;
        }
        let s: f64 = v.iter().sum();
        v.iter_mut().for_each(|x| *x /= s);
        v
    };
    let mut specs = Vec::new();
    for a in 0..labels {
        let arity = if a == 0 { 0 } else { r.random_range(0..3) };
        specs.push(LabelSpec {
            name: format!("L{a}"),
            arity,
            children: (0..arity).map(|_| sparse(r, labels)).collect(),
            emission: if arity == 0 { sparse(r, terminals) } else { vec![] },
        });
    }
    let root = sparse(r, labels);
    Pcfg::new(specs, (0..terminals).map(|t| ((b'a' + t as u8) as char).to_string()).collect(), root).unwrap()
}

/// Fourth central moment over squared variance, accumulated in `f64`.
pub fn raw_kurtosis(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let m2 = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n;
    let m4 = x.iter().map(|v| (v - m).powi(4)).sum::<f64>() / n;
    m4 / (m2 * m2)
}

pub fn gaussian_samples(seed: u64, n: usize) -> Vec<f64> {
    use rand_distr::{Distribution, StandardNormal};
    let mut r = rng(seed);
    (0..n).map(|_| StandardNormal.sample(&mut r)).collect()
}

/// Standard Laplace draws as a signed unit exponential.
pub fn laplace_samples(seed: u64, n: usize) -> Vec<f64> {
    use rand_distr::{Distribution, Exp1};
    let mut r = rng(seed);
    (0..n)
        .map(|_| {
            let e: f64 = Exp1.sample(&mut r);
            if r.random::<bool>() { e } else { -e }
        })
        .collect()
}

pub fn white_noise(seed: u64, size: usize) -> pt_core::image::ImageGrid<f64> {
    let v = gaussian_samples(seed, size * size);
    pt_core::image::ImageGrid::new(size, size, v).unwrap()
}

/// Vertical step edge between columns `size/2 − 1` and `size/2`, levels 0 and
/// 1, plus Gaussian noise.
pub fn noisy_step_edge(size: usize, noise: f64, seed: u64) -> pt_core::image::ImageGrid<f64> {
    let v = gaussian_samples(seed, size * size);
    pt_core::image::ImageGrid::from_fn(size, size, |r, c| (if c < size / 2 { 0.0 } else { 1.0 }) + noise * v[r * size + c])
}

/// Pixel variance over the two flat halves, skipping `margin` columns on each
/// side of the edge.
pub fn flat_region_variance(img: &pt_core::image::ImageGrid<f64>, margin: usize) -> f64 {
    let w = img.width();
    let mut total = 0.0;
    for cols in [0..w / 2 - margin, w / 2 + margin..w] {
        let vals: Vec<f64> = (0..img.height()).flat_map(|r| cols.clone().map(move |c| (r, c))).map(|p| img[p]).collect();
        let m = vals.iter().sum::<f64>() / vals.len() as f64;
        total += vals.iter().map(|v| (v - m).powi(2)).sum::<f64>() / vals.len() as f64;
    }
    total / 2.0
}

/// Column of the largest horizontal jump in each row.
pub fn edge_columns(img: &pt_core::image::ImageGrid<f64>) -> Vec<usize> {
    (0..img.height())
        .map(|r| {
            (0..img.width() - 1)
                .max_by(|&a, &b| {
                    let ga = (img[(r, a + 1)] - img[(r, a)]).abs();
                    let gb = (img[(r, b + 1)] - img[(r, b)]).abs();
                    ga.total_cmp(&gb)
                })
                .unwrap()
        })
        .collect()
}

/// Gaussian kernel `exp(−r²/2σ²)` and `K'(r)/r`, written out independently.
pub fn gauss_kernel(sigma: f64, r2: f64) -> (f64, f64) {
    let k = (-r2 / (2.0 * sigma * sigma)).exp();
    (k, -k / (sigma * sigma))
}

/// Explicit midpoint integration of the planar landmark equations
/// `dP_i = 2 Σ_j K_ij u_j`, `du_i = −2 Σ_j (K'/r)(P_i − P_j)(u_i·u_j)` with a
/// Gaussian kernel. `points`/`momenta` are `[x, y]` per landmark.
pub fn midpoint_landmarks(sigma: f64, points: &[[f64; 2]], momenta: &[[f64; 2]], t_end: f64, steps: usize) -> (Vec<[f64; 2]>, Vec<[f64; 2]>) {
    let n = points.len();
    let field = |p: &[[f64; 2]], u: &[[f64; 2]]| {
        let mut dp = vec![[0.0; 2]; n];
        let mut du = vec![[0.0; 2]; n];
        for i in 0..n {
            for j in 0..n {
                let d = [p[i][0] - p[j][0], p[i][1] - p[j][1]];
                let (k, f) = gauss_kernel(sigma, d[0] * d[0] + d[1] * d[1]);
                let uu = u[i][0] * u[j][0] + u[i][1] * u[j][1];
                for a in 0..2 {
                    dp[i][a] += 2.0 * k * u[j][a];
                    du[i][a] -= 2.0 * f * d[a] * uu;
                }
            }
        }
        (dp, du)
    };
    let h = t_end / steps as f64;
    let (mut p, mut u) = (points.to_vec(), momenta.to_vec());
    for _ in 0..steps {
        let (dp, du) = field(&p, &u);
        let pm: Vec<[f64; 2]> = (0..n).map(|i| [p[i][0] + 0.5 * h * dp[i][0], p[i][1] + 0.5 * h * dp[i][1]]).collect();
        let um: Vec<[f64; 2]> = (0..n).map(|i| [u[i][0] + 0.5 * h * du[i][0], u[i][1] + 0.5 * h * du[i][1]]).collect();
        let (dp, du) = field(&pm, &um);
        for i in 0..n {
            for a in 0..2 {
                p[i][a] += h * dp[i][a];
                u[i][a] += h * du[i][a];
            }
        }
    }
    (p, u)
}

/// `Σ_ij G_ij v_i·v_j` with `G = K⁻¹` (Gaussian kernel), via nalgebra.
pub fn quotient_form(sigma: f64, points: &[[f64; 2]], v: &[[f64; 2]]) -> f64 {
    let n = points.len();
    let k = nalgebra::DMatrix::from_fn(n, n, |i, j| {
        let d = [points[i][0] - points[j][0], points[i][1] - points[j][1]];
        gauss_kernel(sigma, d[0] * d[0] + d[1] * d[1]).0
    });
    let g = k.try_inverse().expect("Gram matrix invertible");
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += g[(i, j)] * (v[i][0] * v[j][0] + v[i][1] * v[j][1]);
        }
    }
    s
}

/// `N` landmarks on a jittered circle with random momenta.
pub fn random_landmarks(seed: u64, n: usize, radius: f64, momentum: f64) -> (Vec<[f64; 2]>, Vec<[f64; 2]>) {
    let mut r = rng(seed);
    let pts = (0..n)
        .map(|k| {
            let a = 2.0 * std::f64::consts::PI * (k as f64 + 0.3 * r.random::<f64>()) / n as f64;
            let rr = radius * (1.0 + 0.1 * (r.random::<f64>() - 0.5));
            [rr * a.cos(), rr * a.sin()]
        })
        .collect();
    let mom = (0..n).map(|_| [momentum * (r.random::<f64>() - 0.5), momentum * (r.random::<f64>() - 0.5)]).collect();
    (pts, mom)
}

pub fn flatten2(v: &[[f64; 2]]) -> Vec<f64> {
    v.iter().flat_map(|p| [p[0], p[1]]).collect()
}
