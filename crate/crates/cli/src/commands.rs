use std::fmt::Write as _;
use std::path::Path;

use pt_core::bp::{bethe_free_energy, loopy_bp, max_product, mean_field, BpOptions, BpStatus, PairwiseModel};
use pt_core::hmm::{
    backward_smooth, baum_welch, forward_filter, hmm_sample, kalman_filter, log_likelihood, viterbi, Emission, HmmModel,
    LinearGaussianModel, Observations,
};
use pt_core::image::{
    block_renormalize, diffuse, filter_bank, kurtosis, max_stable_dt, power_spectrum_slope, synth_dead_leaves,
    synth_random_wavelets, DeadLeavesSpec, ImageGrid, WaveletProcessSpec,
};
use pt_core::mrf::{normalize_field, AnnealSchedule, IsingGrid};
use pt_core::particle::{kde_1d, run_filter, simulate_tracker, Resampling, TrackerModel};
use pt_core::pcfg::{inside, sample_tree_with, viterbi_parse, Pcfg};
use pt_core::rng::{seeded, splitmix64};
use pt_core::shape::{render_curves, shape_random_walk, Canvas, KernelSpec, ShapeCurve, StepLaw, WalkOptions, WalkStop};

use crate::cli::*;
use crate::output::{parse_field, read_csv, read_image, CliError, CliResult, Run};

pub fn dispatch(command: Command, run: &Run) -> CliResult<()> {
    match command {
        Command::Hmm(a) => hmm(a.op, run),
        Command::Kalman(a) => kalman(&a, run),
        Command::Track(a) => track(&a, run),
        Command::Ising(IsingArgs { op: IsingOp::Anneal(a) }) => anneal(&a, run),
        Command::Bp(a) => bp(&a, run),
        Command::Pcfg(a) => pcfg(a.op, run),
        Command::Stats(a) => stats(a.op, run),
        Command::Synth(a) => synth(a.op, run),
        Command::Diffuse(a) => diffuse_cmd(&a, run),
        Command::Shape(ShapeArgs { op: ShapeOp::Walk(a) }) => shape_walk(&a, run),
        Command::Demo(a) => crate::demo::demo(a.name, a.common.out.as_deref(), run),
    }
}

/// The common flags of whichever subcommand was parsed.
pub fn common(command: &Command) -> &Common {
    match command {
        Command::Hmm(a) => match &a.op {
            HmmOp::Filter(io) | HmmOp::Smooth(io) | HmmOp::Viterbi(io) | HmmOp::Loglik(io) => &io.common,
            HmmOp::Fit { io, .. } => &io.common,
            HmmOp::Sample { common, .. } => common,
        },
        Command::Kalman(a) => &a.common,
        Command::Track(a) => &a.common,
        Command::Ising(IsingArgs { op: IsingOp::Anneal(a) }) => &a.common,
        Command::Bp(a) => &a.common,
        Command::Pcfg(a) => match &a.op {
            PcfgOp::Sample { common, .. } => common,
            PcfgOp::Inside(p) | PcfgOp::Parse(p) => &p.common,
        },
        Command::Stats(a) => match &a.op {
            StatsOp::Kurtosis { common, .. } | StatsOp::Spectrum { common, .. } | StatsOp::Renorm { common, .. } => common,
        },
        Command::Synth(a) => match &a.op {
            SynthOp::Wavelets { common, .. } | SynthOp::Deadleaves { common, .. } => common,
        },
        Command::Diffuse(a) => &a.common,
        Command::Shape(ShapeArgs { op: ShapeOp::Walk(a) }) => &a.common,
        Command::Demo(a) => &a.common,
    }
}

/// Commands that consume randomness and so need a seed.
pub fn is_stochastic(command: &Command) -> bool {
    match command {
        Command::Hmm(a) => matches!(a.op, HmmOp::Sample { .. }),
        Command::Track(_) | Command::Ising(_) | Command::Synth(_) | Command::Shape(_) | Command::Demo(_) => true,
        Command::Pcfg(a) => matches!(a.op, PcfgOp::Sample { .. }),
        _ => false,
    }
}

fn required<'a>(out: &'a Option<std::path::PathBuf>, what: &str) -> CliResult<&'a Path> {
    out.as_deref().ok_or_else(|| CliError::Usage(format!("{what} writes an image; --out is required")))
}

fn load_hmm(path: &Path) -> CliResult<HmmModel<f64>> {
    crate::output::load(path, HmmModel::from_json)
}

fn load_obs(path: &Path, model: &HmmModel<f64>) -> CliResult<Observations<f64>> {
    let rows = read_csv(path)?;
    Ok(match model.emission() {
        Emission::Discrete { .. } => {
            Observations::Symbols(rows.iter().enumerate().map(|(i, r)| parse_field(r, 0, i + 1)).collect::<CliResult<_>>()?)
        }
        Emission::Gaussian { .. } => {
            Observations::Reals(rows.iter().enumerate().map(|(i, r)| parse_field(r, 0, i + 1)).collect::<CliResult<_>>()?)
        }
    })
}

fn obs_csv(obs: &Observations<f64>) -> String {
    let mut s = String::from("obs\n");
    match obs {
        Observations::Symbols(v) => v.iter().for_each(|x| {
            let _ = writeln!(s, "{x}");
        }),
        Observations::Reals(v) => v.iter().for_each(|x| {
            let _ = writeln!(s, "{x}");
        }),
    }
    s
}

fn path_csv(path: &[usize]) -> String {
    let mut s = String::from("step,state\n");
    for (k, a) in path.iter().enumerate() {
        let _ = writeln!(s, "{k},{a}");
    }
    s
}

/// Pretty JSON with the run header as the first field.
fn json_with_header(run: &Run, value: serde_json::Value) -> CliResult<String> {
    let mut obj = serde_json::Map::new();
    obj.insert("header".into(), run.header().into());
    match value {
        serde_json::Value::Object(m) => obj.extend(m),
        other => {
            obj.insert("value".into(), other);
        }
    }
    Ok(serde_json::to_string_pretty(&serde_json::Value::Object(obj))? + "\n")
}

fn hmm(op: HmmOp, run: &Run) -> CliResult<()> {
    match op {
        HmmOp::Filter(io) => posterior(&io, run, false),
        HmmOp::Smooth(io) => posterior(&io, run, true),
        HmmOp::Viterbi(io) => {
            let model = load_hmm(&io.model)?;
            let obs = load_obs(&io.obs, &model)?;
            let (path, lp) = viterbi(&model, &obs)?;
            run.write_text(io.common.out.as_deref(), &[("log_prob", lp.to_string())], &path_csv(&path))
        }
        HmmOp::Loglik(io) => {
            let model = load_hmm(&io.model)?;
            let obs = load_obs(&io.obs, &model)?;
            let ll = log_likelihood(&model, &obs)?;
            run.write_text(io.common.out.as_deref(), &[], &format!("loglik\n{ll}\n"))
        }
        HmmOp::Fit { io, max_iters, tol, trace } => {
            let model = load_hmm(&io.model)?;
            let obs = load_obs(&io.obs, &model)?;
            let fit = baum_welch(&model, std::slice::from_ref(&obs), max_iters, tol)?;
            if fit.had_empty_states() {
                eprintln!("warning: states {:?} lost all expected occupancy and were reset", fit.reset_states);
            }
            let value: serde_json::Value = serde_json::from_str(&fit.model.to_json()?)?;
            crate::output::emit(io.common.out.as_deref(), json_with_header(run, value)?.as_bytes())?;
            if let Some(path) = trace {
                let mut s = String::from("iteration,loglik\n");
                for (i, v) in fit.trace.iter().enumerate() {
                    let _ = writeln!(s, "{i},{v}");
                }
                run.write_text(Some(&path), &[("converged", fit.converged.to_string())], &s)?;
            }
            Ok(())
        }
        HmmOp::Sample { model, length, states, common } => {
            let model = load_hmm(&model)?;
            let (path, obs) = hmm_sample(&model, length, run.seed());
            run.write_text(common.out.as_deref(), &[], &obs_csv(&obs))?;
            if let Some(p) = states {
                run.write_text(Some(&p), &[], &path_csv(&path))?;
            }
            Ok(())
        }
    }
}

fn posterior(io: &HmmIo, run: &Run, smooth: bool) -> CliResult<()> {
    let model = load_hmm(&io.model)?;
    let obs = load_obs(&io.obs, &model)?;
    let post = if smooth { backward_smooth(&model, &obs)? } else { forward_filter(&model, &obs)? };
    let mut buf = Vec::new();
    post.write_csv(&mut buf)?;
    let notes: Vec<(&str, String)> = post.log_likelihood.iter().map(|ll| ("loglik", ll.to_string())).collect();
    run.write_text(io.common.out.as_deref(), &notes, &String::from_utf8_lossy(&buf))
}

fn kalman(a: &KalmanArgs, run: &Run) -> CliResult<()> {
    let raw: LinearGaussianModel<f64> = crate::output::load(&a.model, |s| serde_json::from_str(s))?;
    let model = LinearGaussianModel::new(raw.a, raw.q, raw.c, raw.r, raw.mean0, raw.cov0)?;
    let rows = read_csv(&a.obs)?;
    let obs: Vec<Vec<f64>> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| (0..r.len()).map(|j| parse_field(r, j, i + 1)).collect())
        .collect::<CliResult<_>>()?;
    let beliefs = kalman_filter(&model, &obs)?;
    let n = model.state_dim();
    let mut s = String::from("step");
    (0..n).for_each(|i| {
        let _ = write!(s, ",mean_{i}");
    });
    (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).for_each(|(i, j)| {
        let _ = write!(s, ",cov_{i}_{j}");
    });
    s.push('\n');
    for (k, b) in beliefs.iter().enumerate() {
        let _ = write!(s, "{k}");
        for m in &b.mean {
            let _ = write!(s, ",{m}");
        }
        for c in b.cov.as_slice() {
            let _ = write!(s, ",{c}");
        }
        s.push('\n');
    }
    run.write_text(a.common.out.as_deref(), &[], &s)
}

/// Seed of the filter's own streams, kept apart from the simulator's.
fn filter_seed(seed: u64) -> u64 {
    splitmix64(seed ^ 0x5eed_f11e)
}

pub struct TrackOutput {
    pub truth: Option<Vec<[f64; 4]>>,
    pub observations: Vec<[f64; 2]>,
    pub csv: String,
    pub kde: String,
}

pub fn run_tracker(model: &TrackerModel<f64>, obs: Option<Vec<[f64; 2]>>, steps: usize, particles: usize, seed: u64) -> CliResult<TrackOutput> {
    model.validate()?;
    let (truth, observations) = match obs {
        Some(o) => (None, o),
        None => {
            let sim = simulate_tracker(model, steps, seed);
            (Some(sim.truth), sim.observations)
        }
    };
    let fr = run_filter(model, &observations, particles, filter_seed(seed), Resampling::Systematic, |x: &[f64; 4]| x.to_vec())?;
    let mut csv = String::from("step,obs_x,obs_y,mean_x,mean_y,mean_vx,mean_vy,ess");
    if truth.is_some() {
        csv.push_str(",true_x,true_y");
    }
    csv.push('\n');
    for (k, (m, ess)) in fr.expectations.iter().zip(&fr.ess).enumerate() {
        let z = observations[k];
        let _ = write!(csv, "{k},{},{},{},{},{},{},{ess}", z[0], z[1], m[0], m[1], m[2], m[3]);
        if let Some(t) = &truth {
            let _ = write!(csv, ",{},{}", t[k][0], t[k][1]);
        }
        csv.push('\n');
    }
    let grid: Vec<f64> = (0..=100).map(|i| model.arena * i as f64 / 100.0).collect();
    let mut kde = String::from("step,x,density\n");
    for (k, set) in fr.sets.iter().enumerate() {
        let xs: Vec<f64> = set.particles.iter().map(|p| p[0]).collect();
        let dens = kde_1d(&xs, &set.weights, model.obs_std, &grid)?;
        for (x, d) in grid.iter().zip(dens) {
            let _ = writeln!(kde, "{k},{x},{d}");
        }
    }
    Ok(TrackOutput { truth, observations, csv, kde })
}

fn track(a: &TrackArgs, run: &Run) -> CliResult<()> {
    let model: TrackerModel<f64> = crate::output::load(&a.model, |s| serde_json::from_str(s))?;
    let obs = match &a.obs {
        Some(p) => Some(
            read_csv(p)?
                .iter()
                .enumerate()
                .map(|(i, r)| Ok([parse_field(r, 0, i + 1)?, parse_field(r, 1, i + 1)?]))
                .collect::<CliResult<Vec<_>>>()?,
        ),
        None => None,
    };
    let out = run_tracker(&model, obs, a.steps, a.particles, run.seed())?;
    run.write_text(a.common.out.as_deref(), &[], &out.csv)?;
    if let Some(p) = &a.kde {
        run.write_text(Some(p), &[], &out.kde)?;
    }
    Ok(())
}

/// `%02d` or `%d` in a snapshot pattern becomes the level index.
pub fn snapshot_path(pattern: &str, level: usize) -> String {
    if pattern.contains("%02d") {
        pattern.replace("%02d", &format!("{level:02}"))
    } else if pattern.contains("%d") {
        pattern.replace("%d", &level.to_string())
    } else {
        format!("{pattern}{level:02}")
    }
}

fn anneal(a: &AnnealArgs, run: &Run) -> CliResult<()> {
    let out = required(&a.common.out, "ising anneal")?;
    let field = normalize_field(&read_image(&a.field)?)?;
    let grid = IsingGrid::new(field, a.coupling, a.field_strength, a.t0)?;
    let schedule = AnnealSchedule::geometric(a.t0, a.rate, a.t_min)?;
    let result = grid.anneal(&schedule, a.sweeps, run.seed())?;
    if let Some(pattern) = &a.snapshots {
        for (level, snap) in result.snapshots.iter().enumerate() {
            run.write_image(Path::new(&snapshot_path(pattern, level)), &snap.to_image(), Some((-1.0, 1.0)))?;
        }
    }
    run.write_image(out, &result.state.to_image(), Some((-1.0, 1.0)))
}

fn status_name(s: BpStatus) -> &'static str {
    match s {
        BpStatus::Converged => "converged",
        BpStatus::Oscillating => "oscillating",
    }
}

fn bp(a: &BpArgs, run: &Run) -> CliResult<()> {
    let model = crate::output::load(&a.model, PairwiseModel::<f64>::from_json)?;
    let opts = BpOptions { max_iters: a.max_iters, tol: a.tol, damping: a.damping };
    let value = match a.mode {
        BpMode::SumProduct => {
            let r = loopy_bp(&model, &opts)?;
            if r.status == BpStatus::Oscillating {
                eprintln!("warning: belief propagation did not converge in {} iterations", r.iterations);
            }
            let f = bethe_free_energy(&model, &r.beliefs)?;
            serde_json::json!({
                "mode": "sum-product",
                "status": status_name(r.status),
                "iterations": r.iterations,
                "residual": r.residual,
                "bethe_free_energy": f,
                "vertex": r.beliefs.vertex,
                "edge": r.beliefs.edge,
            })
        }
        BpMode::MaxProduct => {
            let r = max_product(&model, &opts)?;
            serde_json::json!({
                "mode": "max-product",
                "status": status_name(r.status),
                "iterations": r.iterations,
                "config": r.config,
                "energy": r.energy,
                "exact": r.exact,
            })
        }
        BpMode::MeanField => {
            let r = mean_field(&model, a.max_iters, a.tol)?;
            serde_json::json!({
                "mode": "mean-field",
                "converged": r.converged,
                "iterations": r.iterations,
                "free_energy": r.free_energy,
                "vertex": r.marginals,
                "trace": r.trace,
            })
        }
    };
    crate::output::emit(a.common.out.as_deref(), json_with_header(run, value)?.as_bytes())
}

fn pcfg(op: PcfgOp, run: &Run) -> CliResult<()> {
    match op {
        PcfgOp::Sample { grammar, count, common } => {
            let g = crate::output::load(&grammar, Pcfg::<f64>::from_json)?;
            let mut rng = seeded(run.seed());
            let mut s = String::from("yield\ttree\n");
            for _ in 0..count {
                let tree = sample_tree_with(&g, &mut rng)?;
                let _ = writeln!(s, "{}\t{}", g.render_yield(&tree.yield_symbols()), tree.render(&g));
            }
            run.write_text(common.out.as_deref(), &[], &s)
        }
        PcfgOp::Inside(p) => {
            let g = crate::output::load(&p.grammar, Pcfg::<f64>::from_json)?;
            let syms = g.parse_yield(&p.text)?;
            let r = inside(&g, &syms, p.unary_cap)?;
            run.write_text(p.common.out.as_deref(), &[("unary_cap", r.unary_cap.to_string())], &format!("prob\n{}\n", r.prob))
        }
        PcfgOp::Parse(p) => {
            let g = crate::output::load(&p.grammar, Pcfg::<f64>::from_json)?;
            let syms = g.parse_yield(&p.text)?;
            let r = viterbi_parse(&g, &syms, p.unary_cap)?;
            let notes = [("log_prob", r.log_prob.to_string()), ("parse_count", r.parse_count.to_string())];
            run.write_text(p.common.out.as_deref(), &notes, &format!("{}\n", r.tree.render(&g)))
        }
    }
}

fn stats(op: StatsOp, run: &Run) -> CliResult<()> {
    match op {
        StatsOp::Kurtosis { input, statistic, common } => {
            let img = read_image(&input)?;
            let mut s = String::from("statistic,kurtosis\n");
            match statistic {
                Statistic::Pixels => {
                    let _ = writeln!(s, "pixels,{}", kurtosis(img.as_slice())?);
                }
                Statistic::Diff => {
                    let _ = writeln!(s, "diff,{}", kurtosis(&img.horizontal_differences(1))?);
                }
                Statistic::Bank => {
                    for f in filter_bank() {
                        let _ = writeln!(s, "{},{}", f.name, kurtosis(&f.apply(&img))?);
                    }
                }
            }
            run.write_text(common.out.as_deref(), &[], &s)
        }
        StatsOp::Spectrum { input, common } => {
            let fit = power_spectrum_slope(&read_image(&input)?)?;
            if fit.high_residual {
                eprintln!("warning: power-law fit residual {} is high", fit.residual);
            }
            let mut s = String::from("frequency,power\n");
            for (f, p) in fit.frequencies.iter().zip(&fit.power) {
                let _ = writeln!(s, "{f},{p}");
            }
            let notes = [
                ("lambda", fit.lambda.to_string()),
                ("residual", fit.residual.to_string()),
                ("fit_range", format!("{},{}", fit.fit_range.0, fit.fit_range.1)),
                ("high_residual", fit.high_residual.to_string()),
            ];
            run.write_text(common.out.as_deref(), &notes, &s)
        }
        StatsOp::Renorm { input, common } => {
            let out = required(&common.out, "stats renorm")?;
            let img = block_renormalize(&read_image(&input)?)?;
            run.write_image(out, &img, None)
        }
    }
}

fn synth(op: SynthOp, run: &Run) -> CliResult<()> {
    match op {
        SynthOp::Wavelets { size, intensity, scale_min, scale_max, aspect, alpha, common } => {
            let out = required(&common.out, "synth wavelets")?;
            let d = WaveletProcessSpec::default();
            let spec = WaveletProcessSpec {
                intensity: intensity.unwrap_or(d.intensity),
                scale_min: scale_min.unwrap_or(d.scale_min),
                scale_max: scale_max.unwrap_or(d.scale_max),
                aspect: aspect.unwrap_or(d.aspect),
                pareto_alpha: alpha.unwrap_or(d.pareto_alpha),
                ..d
            };
            let img: ImageGrid<f64> = synth_random_wavelets(&spec, size, size, run.seed())?;
            run.write_image(out, &img, None)
        }
        SynthOp::Deadleaves { size, r_min, r_max, exponent, density, supersample, common } => {
            let out = required(&common.out, "synth deadleaves")?;
            let d = DeadLeavesSpec::default();
            let spec = DeadLeavesSpec {
                r_min: r_min.unwrap_or(d.r_min),
                r_max: r_max.unwrap_or(d.r_max),
                radius_exponent: exponent.unwrap_or(d.radius_exponent),
                density: density.or(d.density),
                supersample: supersample.unwrap_or(d.supersample),
                ..d
            };
            let img = synth_dead_leaves::<f64>(&spec, size, size, run.seed())?;
            run.write_image(out, &img.image, Some((spec.gray_lo.min(spec.background), spec.gray_hi.max(spec.background))))
        }
    }
}

fn diffuse_cmd(a: &DiffuseArgs, run: &Run) -> CliResult<()> {
    let out = required(&a.common.out, "diffuse")?;
    let img = read_image(&a.input)?;
    let dt = a.dt.unwrap_or_else(|| max_stable_dt(1.0, a.epsilon, a.lambda));
    let r = diffuse(&img, a.lambda, a.steps, dt, a.epsilon)?;
    run.write_image(out, &r.image, None)?;
    if let Some(p) = &a.energy {
        let mut s = String::from("step,energy\n");
        for (k, e) in r.energy.iter().enumerate() {
            let _ = writeln!(s, "{k},{e}");
        }
        run.write_text(Some(p), &[("dt", dt.to_string())], &s)?;
    }
    Ok(())
}

pub struct WalkOutput {
    pub csv: String,
    pub image: ImageGrid<f64>,
    pub stopped: Option<WalkStop>,
}

pub fn walk(n: usize, kernel: &KernelSpec, opts: &WalkOptions, width: usize, seed: u64) -> CliResult<WalkOutput> {
    let initial = ShapeCurve::circle(n, 1.0, [0.0, 0.0])?;
    let w = shape_random_walk(&initial, kernel, opts, seed)?;
    let mut csv = String::from("step,vertex,x,y\n");
    for (k, c) in w.curves.iter().enumerate() {
        for (i, p) in c.points().iter().enumerate() {
            let _ = writeln!(csv, "{k},{i},{},{}", p[0], p[1]);
        }
    }
    let image = render_curves(&w.curves, &Canvas::fit(&w.curves, width, 0.05));
    Ok(WalkOutput { csv, image, stopped: w.stopped })
}

pub fn stop_note(stopped: &Option<WalkStop>) -> String {
    match stopped {
        None => "none".into(),
        Some(WalkStop::SelfIntersection { step }) => format!("self-intersection at step {step}"),
        Some(WalkStop::Collision { step, time, distance }) => format!("collision at step {step} t={time} d={distance}"),
    }
}

fn shape_walk(a: &WalkArgs, run: &Run) -> CliResult<()> {
    let kernel: KernelSpec = a.kernel.parse()?;
    let drift: Vec<f64> = a
        .drift
        .split(',')
        .map(|v| v.trim().parse().map_err(|_| CliError::Usage(format!("bad --drift '{}', expected dx,dy", a.drift))))
        .collect::<CliResult<_>>()?;
    let [dx, dy] = drift[..] else {
        return Err(CliError::Usage(format!("bad --drift '{}', expected dx,dy", a.drift)));
    };
    let law = match a.law {
        Law::Normalized => StepLaw::Normalized,
        Law::Identity => StepLaw::Identity,
    };
    let opts = WalkOptions { num_steps: a.steps, step_size: a.step_size, law, drift: [dx, dy], ..WalkOptions::default() };
    let out = walk(a.n, &kernel, &opts, a.width, run.seed())?;
    if out.stopped.is_some() {
        eprintln!("warning: walk stopped early: {}", stop_note(&out.stopped));
    }
    run.write_text(a.common.out.as_deref(), &[("stopped", stop_note(&out.stopped))], &out.csv)?;
    if let Some(p) = &a.render {
        run.write_image(p, &out.image, Some((0.0, 1.0)))?;
    }
    Ok(())
}
