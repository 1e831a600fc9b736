use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use pt_core::image::{block_renormalize, central_bin_ratio, kurtosis, power_spectrum_slope, synth_dead_leaves, synth_random_wavelets};
use pt_core::image::{DeadLeavesSpec, ImageGrid, WaveletProcessSpec};
use pt_core::mrf::{normalize_field, AnnealSchedule, IsingGrid, SpinField};
use pt_core::particle::TrackerModel;
use pt_core::rng::{seeded, splitmix64};
use pt_core::shape::{KernelSpec, WalkOptions};
use rand_distr::{Distribution, Normal};

use crate::cli::DemoName;
use crate::commands::{run_tracker, stop_note, walk};
use crate::output::{CliResult, Run};

pub fn demo(name: DemoName, out: Option<&Path>, run: &Run) -> CliResult<()> {
    let dir: PathBuf = out.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from(format!("demo-{}", slug(name))));
    std::fs::create_dir_all(&dir)?;
    let seed = run.seed();
    match name {
        DemoName::AnnealStrip => anneal_strip(&dir, seed, run),
        DemoName::ShapeWalk => shape_walk(&dir, seed, run),
        DemoName::DeadleavesGallery => gallery(&dir, seed, run),
        DemoName::Tracker => tracker(&dir, seed, run),
    }
}

fn slug(name: DemoName) -> &'static str {
    match name {
        DemoName::AnnealStrip => "anneal-strip",
        DemoName::ShapeWalk => "shape-walk",
        DemoName::DeadleavesGallery => "deadleaves-gallery",
        DemoName::Tracker => "tracker",
    }
}

/// A slotted disk and a square on a 64×64 grid, ±1, observed through
/// Gaussian noise. Foreground is close to half the grid, which suits the
/// median-centred field normalization.
fn ring_scene(seed: u64) -> (SpinField, ImageGrid<f64>) {
    let n = 64;
    let spins: Vec<i8> = (0..n * n)
        .map(|i| {
            let (r, c) = ((i / n) as f64, (i % n) as f64);
            let disk = (r - 34.0).powi(2) + (c - 34.0).powi(2) < 25.0 * 25.0;
            let slot = (30.0..38.0).contains(&r) && c > 22.0;
            let square = (2.0..14.0).contains(&r) && (2.0..14.0).contains(&c);
            if (disk && !slot) || square { 1 } else { -1 }
        })
        .collect();
    let truth = SpinField::from_spins(n, n, spins).expect("square grid");
    let noise = Normal::new(0.0, 0.8).expect("positive spread");
    let mut rng = seeded(seed);
    let clean = truth.to_image::<f64>();
    let data: Vec<f64> = clean.as_slice().iter().map(|&v| v + noise.sample(&mut rng)).collect();
    (truth, ImageGrid::new(n, n, data).expect("matching size"))
}

fn anneal_strip(dir: &Path, seed: u64, run: &Run) -> CliResult<()> {
    let (truth, observed) = ring_scene(seed);
    run.write_image(&dir.join("truth.pgm"), &truth.to_image(), Some((-1.0, 1.0)))?;
    run.write_image(&dir.join("input.pgm"), &observed, None)?;
    let grid = IsingGrid::new(normalize_field(&observed)?, 1.0, 1.0, 4.0)?;
    let schedule = AnnealSchedule::geometric(4.0, 0.8, 0.1)?;
    let result = grid.anneal(&schedule, 10, splitmix64(seed))?;
    let mut s = String::from("level,temperature,agreement\n");
    for (level, (snap, t)) in result.snapshots.iter().zip(schedule.temperatures()).enumerate() {
        run.write_image(&dir.join(format!("level_{level:02}.pgm")), &snap.to_image(), Some((-1.0, 1.0)))?;
        let _ = writeln!(s, "{level},{t},{}", snap.agreement(&truth));
    }
    run.write_image(&dir.join("mask.pgm"), &result.state.to_image(), Some((-1.0, 1.0)))?;
    run.write_text(Some(&dir.join("schedule.csv")), &[], &s)
}

fn shape_walk(dir: &Path, seed: u64, run: &Run) -> CliResult<()> {
    let kernel = KernelSpec::gaussian(0.4)?;
    let out = walk(40, &kernel, &WalkOptions::default(), 512, seed)?;
    run.write_text(Some(&dir.join("walk.csv")), &[("stopped", stop_note(&out.stopped))], &out.csv)?;
    run.write_image(&dir.join("walk.pgm"), &out.image, Some((0.0, 1.0)))
}

fn gallery(dir: &Path, seed: u64, run: &Run) -> CliResult<()> {
    let size = 128;
    let mut images: Vec<(String, ImageGrid<f64>)> = Vec::new();
    let leaves = DeadLeavesSpec::default();
    for i in 0..3u64 {
        let img = synth_dead_leaves::<f64>(&leaves, size, size, splitmix64(seed.wrapping_add(i)))?;
        images.push((format!("deadleaves_{i}"), img.image));
    }
    let renorm = block_renormalize(&block_renormalize(&images[0].1)?)?;
    images.push(("deadleaves_0_renorm2".into(), renorm));
    let wav = synth_random_wavelets::<f64>(&WaveletProcessSpec::default(), size, size, splitmix64(seed.wrapping_add(100)))?;
    images.push(("wavelets".into(), wav));
    let mut s = String::from("image,kurtosis_diff,central_bin_ratio,lambda,fit_residual\n");
    for (name, img) in &images {
        let range = if name.starts_with("deadleaves") { Some((0.0, 1.0)) } else { None };
        run.write_image(&dir.join(format!("{name}.pgm")), img, range)?;
        let d = img.horizontal_differences(1);
        let fit = power_spectrum_slope(img)?;
        let _ = writeln!(s, "{name},{},{},{},{}", kurtosis(&d)?, central_bin_ratio(&d, 0.1)?, fit.lambda, fit.residual);
    }
    run.write_text(Some(&dir.join("stats.csv")), &[], &s)
}

fn tracker(dir: &Path, seed: u64, run: &Run) -> CliResult<()> {
    let model = TrackerModel {
        dt: 1.0,
        process_std: 0.3,
        obs_std: 1.5,
        clutter: 0.3,
        arena: 100.0,
        init_mean: [20.0, 30.0, 1.0, 0.6],
        init_std: [2.0, 2.0, 0.3, 0.3],
    };
    let out = run_tracker(&model, None, 60, 2000, seed)?;
    let mut obj = serde_json::Map::new();
    obj.insert("header".into(), run.header().into());
    if let serde_json::Value::Object(m) = serde_json::to_value(&model)? {
        obj.extend(m);
    }
    let model_json = serde_json::to_string_pretty(&serde_json::Value::Object(obj))? + "\n";
    crate::output::emit(Some(&dir.join("model.json")), model_json.as_bytes())?;
    let mut truth = String::from("step,x,y,vx,vy\n");
    for (k, t) in out.truth.iter().flatten().enumerate() {
        let _ = writeln!(truth, "{k},{},{},{},{}", t[0], t[1], t[2], t[3]);
    }
    let mut obs = String::from("x,y\n");
    for z in &out.observations {
        let _ = writeln!(obs, "{},{}", z[0], z[1]);
    }
    run.write_text(Some(&dir.join("truth.csv")), &[], &truth)?;
    run.write_text(Some(&dir.join("obs.csv")), &[], &obs)?;
    run.write_text(Some(&dir.join("track.csv")), &[], &out.csv)?;
    run.write_text(Some(&dir.join("kde.csv")), &[], &out.kde)
}
