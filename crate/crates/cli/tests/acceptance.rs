//! Acceptance suite: one pass/fail line per criterion, each against an
//! independent oracle or the built binary.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use common::*;
use pt_core::bp::{bethe_free_energy, loopy_bp, max_product, BpOptions, BpStatus, PairwiseModel};
use pt_core::hmm::{backward_smooth, baum_welch, forward_filter, hmm_sample, viterbi, ObsRef, Observations};
use pt_core::image::{diffuse, kurtosis, max_stable_dt, power_spectrum_slope, synth_dead_leaves, DeadLeavesSpec, ImageGrid};
use pt_core::mrf::{segment_image, AnnealSchedule, IsingGrid, SpinField, SweepOrder};
use pt_core::particle::{run_filter, HmmBridge, Resampling};
use pt_core::pcfg::{inside, viterbi_parse, DEFAULT_UNARY_CAP};
use pt_core::rng::seeded;
use pt_core::shape::{geodesic_distance, geodesic_shoot, kinetic_energy, shoot_endpoint, KernelSpec, LandmarkState, ShootingOptions};
use pt_core::Error;
use rand::Rng;

type Check = Result<String, String>;
type Criterion = (&'static str, u64, fn() -> Check);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn hmm_oracle_suite() -> Check {
    let mut r = rng(1001);
    let mut worst: f64 = 0.0;
    for trial in 0..200 {
        let n = r.random_range(1..=4);
        let m = r.random_range(1..=3);
        let t = r.random_range(1..=6);
        let model = random_hmm(&mut r, n, m);
        let obs: Vec<usize> = (0..t).map(|_| r.random_range(0..m)).collect();
        let oracle = enumerate_hmm(&model, &obs);
        let f = forward_filter(&model, &symbols(&obs)).map_err(|e| e.to_string())?;
        let s = backward_smooth(&model, &symbols(&obs)).map_err(|e| e.to_string())?;
        for k in 0..t {
            for a in 0..n {
                let (fe, se) = ((f.probs[k][a] - oracle.filtered[k][a]).abs(), (s.probs[k][a] - oracle.smoothed[k][a]).abs());
                worst = worst.max(fe).max(se);
                ensure!(fe <= 1e-12 * oracle.filtered[k][a].max(1.0), "trial {trial}: filtered error {fe:e}");
                ensure!(se <= 1e-12 * oracle.smoothed[k][a].max(1.0), "trial {trial}: smoothed error {se:e}");
            }
        }
        ensure!(rel_close(f.log_likelihood.unwrap().exp(), oracle.evidence, 1e-12), "trial {trial}: likelihood");
        let (path, lp) = viterbi(&model, &symbols(&obs)).map_err(|e| e.to_string())?;
        ensure!(rel_close(lp.exp(), oracle.best, 1e-12), "trial {trial}: Viterbi probability");
        ensure!(rel_close(joint(&model, &path, &obs), oracle.best, 1e-12), "trial {trial}: Viterbi path");
    }
    Ok(format!("200 models, worst posterior error {worst:.1e}"))
}

fn em_monotonicity() -> Check {
    let mut r = rng(2002);
    let mut worst_drop: f64 = 0.0;
    for seed in 0..50 {
        let n = r.random_range(2..=4);
        let m = r.random_range(2..=4);
        let truth = random_hmm(&mut r, n, m);
        let (_, obs) = hmm_sample(&truth, 150, seed);
        let start = random_hmm(&mut r, n, m);
        let fit = baum_welch(&start, &[obs], 60, 1e-12).map_err(|e| e.to_string())?;
        for w in fit.trace.windows(2) {
            worst_drop = worst_drop.max(w[0] - w[1]);
            ensure!(w[1] >= w[0] - 1e-10, "run {seed}: log-likelihood fell {} -> {}", w[0], w[1]);
        }
    }
    Ok(format!("50 runs, largest decrease {worst_drop:.1e}"))
}

fn particle_consistency() -> Check {
    let counts = [100usize, 1_000, 10_000, 100_000];
    let mut mean_tv = [0.0; 4];
    for seed in 0..20u64 {
        let mut r = rng(3000 + seed);
        let model = random_hmm(&mut r, 3, 3);
        let (_, obs) = hmm_sample(&model, 10, seed);
        let exact = forward_filter(&model, &obs).map_err(|e| e.to_string())?.probs;
        let Observations::Symbols(sym) = &obs else { unreachable!() };
        let refs: Vec<ObsRef<f64>> = sym.iter().map(|&s| ObsRef::Symbol(s)).collect();
        let bridge = HmmBridge { model: &model };
        for (slot, &n) in counts.iter().enumerate() {
            let run = run_filter(&bridge, &refs, n, seed, Resampling::Systematic, |_| vec![]).map_err(|e| e.to_string())?;
            let mut tv = 0.0;
            for (set, ex) in run.sets.iter().zip(&exact) {
                let mut est = [0.0; 3];
                for (&x, &w) in set.particles.iter().zip(&set.weights) {
                    est[x] += w;
                }
                tv += 0.5 * est.iter().zip(ex).map(|(a, b)| (a - b).abs()).sum::<f64>();
            }
            mean_tv[slot] += tv / exact.len() as f64 / 20.0;
        }
    }
    ensure!(mean_tv[3] <= 0.02, "TV at 1e5 particles is {}", mean_tv[3]);
    ensure!(mean_tv.windows(2).all(|w| w[1] < w[0]), "TV not decreasing in N: {mean_tv:?}");
    Ok(format!("mean TV {:.4} / {:.4} / {:.4} / {:.4}", mean_tv[0], mean_tv[1], mean_tv[2], mean_tv[3]))
}

fn ising_grid(rows: usize, cols: usize, field: &[f64], t: f64) -> IsingGrid<f64> {
    IsingGrid::with_defaults(ImageGrid::new(cols, rows, field.to_vec()).unwrap(), t).unwrap()
}

fn ising_correctness() -> Check {
    // 3×3 Gibbs marginals
    let mut r = rng(4004);
    let field: Vec<f64> = (0..9).map(|_| 2.0 * r.random::<f64>() - 1.0).collect();
    let m = ising_grid(3, 3, &field, 1.0);
    let oracle = enumerate_ising(3, 3, &field, 1.0, 1.0, 1.0);
    let mut g = seeded(44);
    let mut s = SpinField::random(3, 3, &mut g);
    for _ in 0..1000 {
        m.gibbs_sweep(&mut s, &mut g, SweepOrder::Raster);
    }
    let sweeps = 1_000_000;
    let mut plus = [0usize; 9];
    for _ in 0..sweeps {
        m.gibbs_sweep(&mut s, &mut g, SweepOrder::Raster);
        for (v, &x) in s.spins().iter().enumerate() {
            plus[v] += (x == 1) as usize;
        }
    }
    let marg_err = (0..9).map(|v| (plus[v] as f64 / sweeps as f64 - oracle.prob_plus[v]).abs()).fold(0.0, f64::max);
    ensure!(marg_err < 0.01, "3x3 marginal error {marg_err}");

    // 1×2 sweep kernel fixes the Gibbs distribution
    let field2 = [0.7, -0.4];
    let t = 0.9;
    let k = mat_mul(&site_kernel(1, 2, &field2, 1.0, 1.0, t, 0), &site_kernel(1, 2, &field2, 1.0, 1.0, t, 1));
    let m2 = ising_grid(1, 2, &field2, t);
    for from in 0..4 {
        let s = SpinField::from_spins(1, 2, spins_of(from, 2)).unwrap();
        let want = site_kernel(1, 2, &field2, 1.0, 1.0, t, 0)[from][from | 1];
        ensure!((m2.prob_plus(&s, 0, 0) - want).abs() < 1e-14, "engine update disagrees with the explicit kernel");
    }
    let pi = enumerate_ising(1, 2, &field2, 1.0, 1.0, t).probs;
    let stat_err = (0..4).map(|to| ((0..4).map(|f| pi[f] * k[f][to]).sum::<f64>() - pi[to]).abs()).fold(0.0, f64::max);
    ensure!(stat_err < 1e-12, "stationarity error {stat_err:e}");

    // 4×4 mode search
    for seed in 0..20u64 {
        let mut r = rng(4100 + seed);
        let field: Vec<f64> = (0..16).map(|_| 4.0 * r.random::<f64>() - 2.0).collect();
        let m = ising_grid(4, 4, &field, 1.0);
        let (_, e) = m.mode_search(4, seed).map_err(|e| e.to_string())?;
        let want = enumerate_ising(4, 4, &field, 1.0, 1.0, 1.0).min_energy;
        ensure!((e - want).abs() < 1e-9, "instance {seed}: mode energy {e} vs {want}");
    }
    Ok(format!("marginal error {marg_err:.4}, stationarity {stat_err:.1e}, 20/20 modes"))
}

fn segmentation_probe() -> Check {
    let schedule = AnnealSchedule::default();
    let mut worst: f64 = 1.0;
    for seed in 0..10 {
        let (img, mask) = two_region_image(64, 64, 0.3, 500 + seed);
        let seg = segment_image(&ImageGrid::new(64, 64, img).unwrap(), &schedule, seed).map_err(|e| e.to_string())?;
        let agree = seg.agreement(&SpinField::from_spins(64, 64, mask).unwrap());
        worst = worst.min(agree);
        ensure!(agree >= 0.95, "seed {seed}: agreement {agree}");
    }
    Ok(format!("10/10 seeds, worst agreement {worst:.4}"))
}

fn bp_tree_exactness() -> Check {
    let mut r = rng(6006);
    let tight = BpOptions { max_iters: 5000, tol: 1e-14, damping: 0.5 };
    let (mut worst_b, mut worst_f): (f64, f64) = (0.0, 0.0);
    for trial in 0..200 {
        let n = r.random_range(1..=10);
        let t = random_tree_tables(&mut r, n, 3);
        let m = PairwiseModel::new(t.unary.clone(), t.edges.clone(), t.pairwise.clone()).map_err(|e| e.to_string())?;
        let ex = t.enumerate();
        let res = loopy_bp(&m, &tight).map_err(|e| e.to_string())?;
        ensure!(res.status == BpStatus::Converged, "trial {trial}: not converged");
        for v in 0..n {
            let d = max_diff(&res.beliefs.vertex[v], &ex.vertex[v]);
            worst_b = worst_b.max(d);
            ensure!(d < 1e-10, "trial {trial}: vertex {v} belief error {d:e}");
        }
        for e in 0..t.edges.len() {
            for (ra, rb) in res.beliefs.edge[e].iter().zip(&ex.edge[e]) {
                let d = max_diff(ra, rb);
                worst_b = worst_b.max(d);
                ensure!(d < 1e-10, "trial {trial}: edge {e} belief error {d:e}");
            }
        }
        let f = bethe_free_energy(&m, &res.beliefs).map_err(|e| e.to_string())?;
        worst_f = worst_f.max((f + ex.log_z).abs());
        ensure!((f + ex.log_z).abs() < 1e-8, "trial {trial}: Bethe {f} vs -log Z {}", -ex.log_z);
        let map = max_product(&m, &BpOptions::default()).map_err(|e| e.to_string())?;
        ensure!((t.weight(&map.config).ln() - ex.max_log_weight).abs() < 1e-10, "trial {trial}: max-product is not the MAP");
    }
    Ok(format!("200 trees, belief error {worst_b:.1e}, Bethe error {worst_f:.1e}"))
}

fn pcfg_inside_oracle() -> Check {
    let mut r = rng(7007);
    let mut yields = 0usize;
    for g_idx in 0..50 {
        let labels = r.random_range(2..=4);
        let terminals = r.random_range(1..=2);
        let g = random_grammar(&mut r, labels, terminals);
        let oracle = enumerate_yields(&g, 4, DEFAULT_UNARY_CAP);
        for len in 1..=4 {
            let mut failure = None;
            for_each_sequence(terminals, len, |y| {
                if failure.is_some() {
                    return;
                }
                yields += 1;
                let total = inside(&g, y, DEFAULT_UNARY_CAP).unwrap().prob;
                let summary = oracle.get(y);
                let want = summary.map_or(0.0, |s| s.total);
                if !rel_close(total, want, 1e-12) {
                    failure = Some(format!("grammar {g_idx} yield {y:?}: inside {total} vs {want}"));
                    return;
                }
                match (summary, viterbi_parse(&g, y, DEFAULT_UNARY_CAP)) {
                    (None, Err(Error::NoParse)) => {}
                    (Some(s), Ok(v)) => {
                        let best = v.log_prob.exp();
                        if !rel_close(best, s.best, 1e-12) || best > total * (1.0 + 1e-12) {
                            failure = Some(format!("grammar {g_idx} yield {y:?}: Viterbi {best} vs best {} / inside {total}", s.best));
                        } else if v.is_unique() != rel_close(best, total, 1e-12) {
                            failure = Some(format!("grammar {g_idx} yield {y:?}: equality detection wrong"));
                        }
                    }
                    _ => failure = Some(format!("grammar {g_idx} yield {y:?}: parse existence disagrees")),
                }
            });
            if let Some(f) = failure {
                return Err(f);
            }
        }
    }
    Ok(format!("50 grammars, {yields} yields"))
}

fn dead_leaves(seed: u64) -> ImageGrid<f64> {
    synth_dead_leaves(&DeadLeavesSpec::default(), 256, 256, seed).unwrap().image
}

fn kurtosis_calibration() -> Check {
    let kg = kurtosis(&gaussian_samples(8, 1_000_000)).map_err(|e| e.to_string())?;
    let kl = kurtosis(&laplace_samples(9, 1_000_000)).map_err(|e| e.to_string())?;
    ensure!((kg - 3.0).abs() < 0.1, "Gaussian kurtosis {kg}");
    ensure!((kl - 6.0).abs() < 0.2, "Laplace kurtosis {kl}");
    let mut lowest = f64::INFINITY;
    for seed in 0..20 {
        let k = kurtosis(&dead_leaves(800 + seed).horizontal_differences(1)).map_err(|e| e.to_string())?;
        lowest = lowest.min(k);
        ensure!(k > 3.0, "dead-leaves seed {seed}: derivative kurtosis {k}");
    }
    Ok(format!("Gaussian {kg:.3}, Laplace {kl:.3}, dead leaves min {lowest:.2} over 20/20"))
}

fn spectral_slope() -> Check {
    let mut white = 0.0;
    for seed in 0..5 {
        white += power_spectrum_slope(&white_noise(900 + seed, 256)).map_err(|e| e.to_string())?.lambda / 5.0;
    }
    ensure!(white.abs() <= 0.15, "white-noise slope {white}");
    let mut lambda = 0.0;
    for seed in 0..20 {
        lambda += power_spectrum_slope(&dead_leaves(950 + seed)).map_err(|e| e.to_string())?.lambda / 20.0;
    }
    ensure!((1.5..=2.5).contains(&lambda), "dead-leaves mean slope {lambda}");
    Ok(format!("white noise {white:.3}, dead leaves {lambda:.3}"))
}

fn diffusion() -> Check {
    let flat = ImageGrid::filled(32, 32, 0.42);
    let out = diffuse(&flat, 0.3, 100, 0.01, 0.1).map_err(|e| e.to_string())?;
    ensure!(out.image == flat, "constant image moved");
    let img = noisy_step_edge(32, 0.3, 10);
    let dt: f64 = max_stable_dt(1.0, 0.2, 0.5);
    let out = diffuse(&img, 0.5, 1000, dt, 0.2).map_err(|e| e.to_string())?;
    ensure!(out.energy.len() == 1001, "energy trace length {}", out.energy.len());
    let worst_rise = out.energy.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    ensure!(worst_rise <= 1e-9, "energy rose by {worst_rise:e}");
    let guard = matches!(diffuse(&flat, 0.0, 1, 1.05 * max_stable_dt(1.0, 0.1, 0.0), 0.1), Err(Error::UnstableStep { .. }));
    ensure!(guard, "over-large dt accepted");
    Ok(format!("fixed point exact, 1000 monotone steps, guard rejects dt > {:.4}", max_stable_dt(1.0f64, 0.1, 0.0)))
}

fn landmarks(p: &[[f64; 2]], u: &[[f64; 2]]) -> LandmarkState<f64> {
    LandmarkState::new(2, flatten2(p), flatten2(u)).unwrap()
}

fn shape_geodesics() -> Check {
    let k = KernelSpec::Gaussian { sigma: 0.5 };
    let (mut h_drift, mut m_drift): (f64, f64) = (0.0, 0.0);
    for (seed, n) in [(11, 10), (12, 50)] {
        let (p, u) = random_landmarks(seed, n, 2.0, 0.4);
        let s0 = landmarks(&p, &u);
        let tr = geodesic_shoot(&s0, &k, 1.0, 1e-3).map_err(|e| e.to_string())?;
        let h0 = kinetic_energy(&s0, &k).unwrap();
        for s in &tr.states {
            h_drift = h_drift.max((kinetic_energy(s, &k).unwrap() - h0).abs() / h0);
            m_drift = m_drift.max(max_diff(&s.total_momentum(), &s0.total_momentum()));
        }
    }
    ensure!(h_drift <= 1e-6, "Hamiltonian drift {h_drift:e}");
    ensure!(m_drift <= 1e-9, "momentum drift {m_drift:e}");

    let single = geodesic_shoot(&landmarks(&[[0.2, -0.4]], &[[0.7, 0.3]]), &k, 1.0, 1e-3).map_err(|e| e.to_string())?;
    let line_err = single
        .times
        .iter()
        .zip(&single.states)
        .map(|(t, s)| max_diff(&s.points, &[0.2 + 1.4 * t, -0.4 + 0.6 * t]))
        .fold(0.0, f64::max);
    ensure!(line_err < 1e-10, "single landmark off its line by {line_err:e}");

    let k6 = KernelSpec::Gaussian { sigma: 0.6 };
    let (p, u) = random_landmarks(13, 12, 1.5, 0.5);
    let s0 = landmarks(&p, &u);
    let mut end = shoot_endpoint(&s0, &k6, 1.0, 1e-3).map_err(|e| e.to_string())?;
    end.momenta.iter_mut().for_each(|m| *m = -*m);
    let back = shoot_endpoint(&end, &k6, 1.0, 1e-3).map_err(|e| e.to_string())?;
    let rev_err = max_diff(&back.points, &s0.points);
    ensure!(rev_err < 1e-6, "time reversal misses start by {rev_err:e}");

    let sigma = 0.7;
    let k7 = KernelSpec::Gaussian { sigma };
    let eps = 1e-3;
    let mut worst_rel: f64 = 0.0;
    for seed in 0..3 {
        let (p, v) = random_landmarks(60 + seed, 4, 1.0, 2.0);
        let target: Vec<[f64; 2]> = p.iter().zip(&v).map(|(a, d)| [a[0] + eps * d[0], a[1] + eps * d[1]]).collect();
        let m = geodesic_distance(2, &flatten2(&p), &flatten2(&target), &k7, &ShootingOptions::default()).map_err(|e| e.to_string())?;
        ensure!(m.matched, "shooting did not match, residual {:e}", m.residual);
        let mid: Vec<[f64; 2]> = p.iter().zip(&target).map(|(a, b)| [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0]).collect();
        let form = eps * eps * quotient_form(sigma, &mid, &v);
        let rel = (m.distance * m.distance - form).abs() / form;
        worst_rel = worst_rel.max(rel);
        ensure!(rel < 1e-6, "seed {seed}: squared distance off the quadratic form by {rel:e}");
    }
    Ok(format!("H drift {h_drift:.1e}, momentum drift {m_drift:.1e}, reversal {rev_err:.1e}, form {worst_rel:.1e}"))
}

/// Stochastic invocations, each with output paths relative to the run
/// directory; `{fx}` is the fixture directory, `{in}` a shared input image.
const RUNS: &[&str] = &[
    "demo anneal-strip --seed 5 --out anneal-strip",
    "demo shape-walk --seed 5 --out shape-walk",
    "demo deadleaves-gallery --seed 5 --out deadleaves-gallery",
    "demo tracker --seed 5 --out tracker",
    "hmm sample --model {fx}/hmm.json --length 200 --seed 5 --out hmm/obs.csv --states hmm/states.csv",
    "track --model {fx}/tracker.json --steps 40 --particles 3000 --seed 5 --out track/track.csv --kde track/kde.csv",
    "ising anneal --field {in} --seed 5 --out ising/mask.pgm --snapshots ising/level_%02d.pgm",
    "pcfg sample --grammar {fx}/grammar.json --count 20 --seed 5 --out pcfg/trees.tsv",
    "synth wavelets --size 128 --seed 5 --out synth/wavelets.ptf",
    "synth deadleaves --size 128 --seed 5 --out synth/leaves.pgm",
    "shape walk --steps 6 --seed 5 --out shape/walk.csv --render shape/walk.pgm",
];

fn run_all(bin: &Path, dir: &Path, fixtures: &Path, input: &Path) -> Result<(), String> {
    for line in RUNS {
        let line = line.replace("{fx}", &fixtures.display().to_string()).replace("{in}", &input.display().to_string());
        let status = Command::new(bin)
            .args(line.split_whitespace())
            .current_dir(dir)
            .output()
            .map_err(|e| e.to_string())?;
        ensure!(status.status.success(), "`pt {line}` failed: {}", String::from_utf8_lossy(&status.stderr));
    }
    Ok(())
}

fn files_under(root: &Path) -> Vec<std::path::PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push(p.strip_prefix(root).unwrap().to_path_buf());
            }
        }
    }
    out.sort();
    out
}

fn determinism() -> Check {
    let bin = Path::new(env!("CARGO_BIN_EXE_pt"));
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let input = tmp.path().join("field.pgm");
    let made = Command::new(bin)
        .args(["synth", "deadleaves", "--size", "64", "--seed", "1", "--out"])
        .arg(&input)
        .status()
        .map_err(|e| e.to_string())?;
    ensure!(made.success(), "could not synthesize the shared input");
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for d in [&a, &b] {
        std::fs::create_dir_all(d).map_err(|e| e.to_string())?;
        run_all(bin, d, &fixtures, &input)?;
    }
    let (fa, fb) = (files_under(&a), files_under(&b));
    ensure!(fa == fb, "artifact sets differ");
    for f in &fa {
        let (x, y) = (std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap());
        ensure!(x == y, "{} differs between reruns", f.display());
        ensure!(x.starts_with(b"# pt ") || x.starts_with(b"P5\n# pt ") || x.starts_with(b"{\n  \"header\"") || f.extension().is_some_and(|e| e == "ptf"),
            "{} lacks the run header", f.display());
    }
    Ok(format!("{} artifacts from {} commands identical across reruns", fa.len(), RUNS.len()))
}

#[test]
fn acceptance_criteria() {
    let criteria: [Criterion; 12] = [
        ("HMM oracle suite", 10, hmm_oracle_suite),
        ("EM monotonicity", 30, em_monotonicity),
        ("particle-filter consistency", 60, particle_consistency),
        ("Ising correctness", 120, ising_correctness),
        ("segmentation probe", 60, segmentation_probe),
        ("BP tree exactness", 30, bp_tree_exactness),
        ("PCFG inside oracle", 60, pcfg_inside_oracle),
        ("kurtosis calibration", 60, kurtosis_calibration),
        ("spectral-slope probe", 120, spectral_slope),
        ("diffusion", 30, diffusion),
        ("shape geodesics", 60, shape_geodesics),
        ("determinism", 120, determinism),
    ];
    let mut failed = Vec::new();
    for (i, (name, budget, check)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let took = start.elapsed();
        let outcome = match outcome {
            Ok(d) if took > Duration::from_secs(budget) => Err(format!("{d}; over the {budget} s budget")),
            o => o,
        };
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d.as_str()),
            Err(d) => ("FAIL", d.as_str()),
        };
        // written past the test harness's capture so the summary always shows
        let line = format!("criterion {:>2} {tag} {name} ({:.1} s): {detail}\n", i + 1, took.as_secs_f64());
        let _ = std::io::stdout().lock().write_all(line.as_bytes());
        if outcome.is_err() {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
