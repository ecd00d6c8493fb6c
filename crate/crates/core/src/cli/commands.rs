use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use super::manifest::{to_table, RunManifest, RUN_MANIFEST};
use super::{run, CliError, EvalArgs, GenDataArgs, ModelArgs, ReplayArgs, SweepArgs, SynthArgs, TrainArgs};
use crate::benchmark::{prepare, BenchmarkSpec, Splits};
use crate::checkpoint::load_checkpoint;
use crate::datakit::{load_dataset, save_dataset, DatasetManifest, MultiModalDataset, SynthSpec};
use crate::evaluator::{
    mean_average_precision, noise_detection_score, pr_curve, weight_density, write_density_csv,
    write_map_curve_csv, write_pr_csv, NoiseDetection,
};
use crate::exec::Exec;
use crate::losses::LossConfig;
use crate::pacer::{write_weight_dump, PaceSchedule, SampleWeights, WEIGHT_DUMP_HEADER};
use crate::seed;
use crate::trainer::{
    retrieval_map, retrieval_tasks, train as run_training, TrainConfig, TrainReport, Variant,
};

const DATASET_MANIFEST: &str = "dataset.toml";
const DENSITY_BINS: usize = 20;

fn absolute(path: &Path) -> Result<PathBuf, CliError> {
    std::path::absolute(path).map_err(|e| CliError::io(path, e))
}

fn create_dir(path: &Path) -> Result<(), CliError> {
    fs::create_dir_all(path).map_err(|e| CliError::io(path, e))
}

/// Creates `path` and fills it through a buffered writer.
fn write_file(
    path: &Path,
    fill: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut out = BufWriter::new(file);
    fill(&mut out)
        .and_then(|_| out.flush())
        .map_err(|e| CliError::io(path, e))
}

fn write_toml<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = toml::to_string(value).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn finish_manifest(
    command: &str,
    args: Vec<String>,
    seed: u64,
    config: toml::Table,
    out: &Path,
    mut artifacts: Vec<PathBuf>,
    started: Instant,
) -> Result<(), CliError> {
    let path = out.join(RUN_MANIFEST);
    artifacts.sort();
    let manifest = RunManifest {
        command: command.to_string(),
        args: std::iter::once(command.to_string()).chain(args).collect(),
        seed,
        version: env!("CARGO_PKG_VERSION").to_string(),
        duration_secs: started.elapsed().as_secs_f64(),
        artifacts,
        config,
    };
    manifest.save(&path)
}

impl SynthArgs {
    fn spec(&self, seed: u64) -> SynthSpec {
        SynthSpec {
            n: self.n,
            k: self.k,
            m: self.m,
            dims: self.dims.clone(),
            class_separation: self.class_separation,
            intra_noise_std: self.intra_noise_std,
            latent_dim: self.latent_dim,
            seed,
        }
    }

    fn benchmark(&self, noise_rate: f64, seed: u64) -> BenchmarkSpec {
        BenchmarkSpec {
            synth: self.spec(seed),
            noise_rate,
            train_frac: self.train_frac,
            val_frac: self.val_frac,
        }
    }

    fn canonical(&self) -> Vec<String> {
        let dims: Vec<String> = self.dims.iter().map(ToString::to_string).collect();
        vec![
            "--n".into(),
            self.n.to_string(),
            "--k".into(),
            self.k.to_string(),
            "--m".into(),
            self.m.to_string(),
            "--dims".into(),
            dims.join(","),
            "--class-separation".into(),
            self.class_separation.to_string(),
            "--intra-noise-std".into(),
            self.intra_noise_std.to_string(),
            "--latent-dim".into(),
            self.latent_dim.to_string(),
            "--train-frac".into(),
            self.train_frac.to_string(),
            "--val-frac".into(),
            self.val_frac.to_string(),
        ]
    }
}

impl ModelArgs {
    fn config(&self, bits: usize, variant: Variant, seed: u64) -> Result<TrainConfig, CliError> {
        let mut cfg = TrainConfig {
            code_length: bits,
            hidden_dim: self.hidden,
            batch_size: self.batch_size,
            warmup_epochs: self.warmup,
            max_epochs: self.epochs,
            learning_rate: self.lr,
            optimizer: self.optimizer.into(),
            loss: LossConfig {
                tau: self.tau,
                r: self.r,
                alpha: self.alpha,
                r_contrastive: None,
                tau_contrastive: Some(self.tau_contrastive),
            },
            seed,
            variant,
            eval_every: self.eval_every,
            clean_val: self.clean_val,
            ..TrainConfig::default()
        };
        match (self.gamma, &self.gamma_ramp) {
            (Some(g), _) if variant == Variant::GammaOverride => cfg.gamma_override = g,
            (Some(g), _) => cfg.pace = Some(PaceSchedule::fixed(g)),
            (None, Some(ramp)) => {
                let epochs = ramp[2];
                if !(epochs >= 1.0 && epochs.fract() == 0.0) {
                    return Err(CliError::usage(format!(
                        "--gamma-ramp epochs must be a positive integer, got {epochs}"
                    )));
                }
                cfg.pace = Some(PaceSchedule::ramp(ramp[0], ramp[1], epochs as usize));
            }
            (None, None) => {}
        }
        Ok(cfg)
    }

    fn canonical(&self) -> Vec<String> {
        let mut out: Vec<String> = vec![
            "--hidden".into(),
            self.hidden.to_string(),
            "--batch-size".into(),
            self.batch_size.to_string(),
            "--warmup".into(),
            self.warmup.to_string(),
            "--epochs".into(),
            self.epochs.to_string(),
            "--lr".into(),
            self.lr.to_string(),
            "--optimizer".into(),
            match self.optimizer {
                super::OptimizerArg::Sgd => "sgd".into(),
                super::OptimizerArg::AdaptiveMoments => "adaptive-moments".into(),
            },
            "--tau".into(),
            self.tau.to_string(),
            "--tau-contrastive".into(),
            self.tau_contrastive.to_string(),
            "--r".into(),
            self.r.to_string(),
            "--alpha".into(),
            self.alpha.to_string(),
            "--eval-every".into(),
            self.eval_every.to_string(),
            "--seed".into(),
            self.seed.to_string(),
        ];
        if let Some(g) = self.gamma {
            out.extend(["--gamma".into(), g.to_string()]);
        }
        if let Some(r) = &self.gamma_ramp {
            let parts: Vec<String> = r.iter().map(ToString::to_string).collect();
            out.extend(["--gamma-ramp".into(), parts.join(",")]);
        }
        if self.clean_val {
            out.push("--clean-val".into());
        }
        out
    }
}

fn check_noise_rate(rate: f64) -> Result<(), CliError> {
    if !(0.0..=1.0).contains(&rate) {
        return Err(CliError::usage(format!(
            "noise rate must lie in [0, 1], got {rate}"
        )));
    }
    Ok(())
}

pub fn gen_data(a: &GenDataArgs, _exec: Exec) -> Result<(), CliError> {
    let started = Instant::now();
    check_noise_rate(a.noise_rate)?;
    let spec = a.synth.benchmark(a.noise_rate, a.seed);
    spec.synth.validate()?;
    let splits = prepare(&spec)?;
    let out = absolute(&a.out)?;
    create_dir(&out)?;

    let train = save_dataset(&splits.train, &out, "train")?;
    let val = save_dataset(&splits.val, &out, "val")?;
    let test = save_dataset(&splits.test, &out, "test")?;
    let mut artifacts: Vec<PathBuf> = [&train, &val, &test]
        .iter()
        .flat_map(|f| {
            f.modalities
                .iter()
                .chain([&f.labels, &f.true_labels, &f.mask])
                .map(|p| out.join(p))
                .collect::<Vec<_>>()
        })
        .collect();
    let manifest = DatasetManifest {
        class_count: spec.synth.k,
        seed: a.seed,
        noise_rate: a.noise_rate,
        train_frac: spec.train_frac,
        val_frac: spec.val_frac,
        synth: Some(spec.synth.clone()),
        train,
        val,
        test,
    };
    let manifest_path = out.join(DATASET_MANIFEST);
    manifest.save(&manifest_path)?;
    artifacts.push(manifest_path);

    let noisy = splits.train.noise_mask.iter().filter(|&&b| b).count();
    println!(
        "train {} ({} noisy labels), val {}, test {} -> {}",
        splits.train.len(),
        noisy,
        splits.val.len(),
        splits.test.len(),
        out.display()
    );

    let mut args = a.synth.canonical();
    args.extend([
        "--noise-rate".into(),
        a.noise_rate.to_string(),
        "--seed".into(),
        a.seed.to_string(),
        "--out".into(),
        out.display().to_string(),
    ]);
    finish_manifest(
        "gen-data",
        args,
        a.seed,
        to_table(&spec),
        &out,
        artifacts,
        started,
    )
}

/// Resolves `--data` (a directory or a manifest file) to the manifest and
/// the directory its relative paths are based on.
fn open_dataset(data: &Path) -> Result<(DatasetManifest, PathBuf, PathBuf), CliError> {
    let data = absolute(data)?;
    let path = if data.is_dir() {
        data.join(DATASET_MANIFEST)
    } else {
        data
    };
    let manifest = DatasetManifest::load(&path)?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok((manifest, base, path))
}

fn load_split(
    manifest: &DatasetManifest,
    base: &Path,
    pick: impl Fn(&DatasetManifest) -> &crate::datakit::DatasetFiles,
) -> Result<MultiModalDataset, CliError> {
    Ok(load_dataset(pick(manifest), base, manifest.seed)?)
}

fn map_rows(report: &TrainReport) -> Vec<(usize, f64, f64)> {
    report
        .epochs
        .iter()
        .filter_map(|e| Some((e.epoch, e.val_map_i2t?, e.val_map_t2i?)))
        .collect()
}

fn write_weight_file(path: &Path, report: &TrainReport, mask: &[bool]) -> Result<(), CliError> {
    write_file(path, |out| {
        writeln!(out, "{WEIGHT_DUMP_HEADER}")?;
        for s in &report.weight_snapshots {
            write_weight_dump(out, s.epoch, &s.losses, &s.weights, mask)?;
        }
        Ok(())
    })
}

fn write_density(path: &Path, weights: &SampleWeights) -> Result<(), CliError> {
    let hist = weight_density(&weights.w, DENSITY_BINS)?;
    write_file(path, |out| write_density_csv(out, &hist))
}

pub fn train(a: &TrainArgs, exec: Exec) -> Result<(), CliError> {
    let started = Instant::now();
    let (manifest, base, manifest_path) = open_dataset(&a.data)?;
    let train_split = load_split(&manifest, &base, |m| &m.train)?;
    let val_split = load_split(&manifest, &base, |m| &m.val)?;
    let config = a.model.config(a.bits, a.variant, a.model.seed)?;
    let out = absolute(&a.out)?;
    create_dir(&out)?;

    let checkpoint = out.join("model.ckpt");
    let outcome = run_training(&train_split, &val_split, &config, Some(checkpoint.clone()), exec)?;
    let report = &outcome.report;

    let mut artifacts = vec![checkpoint];
    let report_path = out.join("report.csv");
    write_file(&report_path, |w| report.write_csv(w))?;
    artifacts.push(report_path);
    let curve_path = out.join("map_curve.csv");
    write_file(&curve_path, |w| write_map_curve_csv(w, &map_rows(report)))?;
    artifacts.push(curve_path);
    if let (Some(first), Some(last)) = (report.weight_snapshots.first(), report.weight_snapshots.last()) {
        let weights_path = out.join("weights.csv");
        write_weight_file(&weights_path, report, &train_split.noise_mask)?;
        artifacts.push(weights_path);
        for (name, snap) in [("density_first.csv", first), ("density_final.csv", last)] {
            let path = out.join(name);
            write_density(&path, &snap.weights)?;
            artifacts.push(path);
        }
    }

    let best = &report.epochs[report.best_epoch];
    println!(
        "best epoch {}: validation MAP I2T {:.4} T2I {:.4}",
        report.best_epoch,
        best.val_map_i2t.unwrap_or(0.0),
        best.val_map_t2i.unwrap_or(0.0)
    );
    if let Some(last) = report.weight_snapshots.last() {
        println!(
            "final zero-weight instances: {} of {}",
            last.weights.zero_count(),
            last.weights.len()
        );
    }

    let mut args = vec![
        "--data".into(),
        manifest_path.display().to_string(),
        "--out".into(),
        out.display().to_string(),
        "--bits".into(),
        a.bits.to_string(),
        "--variant".into(),
        a.variant.name().into(),
    ];
    args.extend(a.model.canonical());
    finish_manifest(
        "train",
        args,
        config.seed,
        to_table(&report.config),
        &out,
        artifacts,
        started,
    )
}

/// Final-epoch weights from a weight dump, ordered by instance index.
fn read_final_weights(path: &Path) -> Result<(usize, SampleWeights), CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let bad = |line: usize| CliError {
        code: super::EXIT_IO,
        message: format!("{}: malformed weight dump at line {line}", path.display()),
    };
    let mut rows: Vec<(usize, usize, f64)> = Vec::new();
    for (n, line) in text.lines().enumerate().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(bad(n + 1));
        }
        let epoch = fields[0].parse().map_err(|_| bad(n + 1))?;
        let index = fields[1].parse().map_err(|_| bad(n + 1))?;
        let weight = fields[3].parse().map_err(|_| bad(n + 1))?;
        rows.push((epoch, index, weight));
    }
    let last = rows.iter().map(|r| r.0).max().ok_or_else(|| bad(1))?;
    let mut final_rows: Vec<(usize, f64)> = rows.iter().filter(|r| r.0 == last).map(|r| (r.1, r.2)).collect();
    final_rows.sort_by_key(|r| r.0);
    if final_rows.iter().enumerate().any(|(i, r)| r.0 != i) {
        return Err(bad(1));
    }
    Ok((
        last,
        SampleWeights {
            w: final_rows.into_iter().map(|r| r.1).collect(),
            gamma: f64::NAN,
        },
    ))
}

#[derive(Serialize)]
struct EvalSummary {
    map_i2t: f64,
    map_t2i: f64,
    noise_detection: Option<DetectionSummary>,
}

#[derive(Serialize)]
struct DetectionSummary {
    epoch: usize,
    #[serde(flatten)]
    scores: NoiseDetection,
}

pub fn eval(a: &EvalArgs, exec: Exec) -> Result<(), CliError> {
    let started = Instant::now();
    let checkpoint = absolute(&a.checkpoint)?;
    let (params, centers) = load_checkpoint(&checkpoint)?;
    let (manifest, base, manifest_path) = open_dataset(&a.data)?;
    let test = load_split(&manifest, &base, |m| &m.test)?;
    if params.dims() != test.dims() || centers.class_count() != test.class_count {
        return Err(CliError::compat(format!(
            "checkpoint expects modality dims {:?} and {} classes ({} bits); dataset has modality dims {:?} and {} classes",
            params.dims(),
            centers.class_count(),
            params.code_length,
            test.dims(),
            test.class_count
        )));
    }
    let out = absolute(&a.out)?;
    create_dir(&out)?;
    let mut artifacts = Vec::new();

    let tasks = retrieval_tasks(&params, &test, &test.true_labels)?;
    let maps: Vec<f64> = tasks.iter().map(|t| mean_average_precision(t, exec)).collect();
    for task in &tasks {
        let curve = pr_curve(task, a.pr_points, exec)?;
        let path = out.join(format!("pr_{}.csv", task.direction.to_string().to_lowercase()));
        write_file(&path, |w| write_pr_csv(w, &curve))?;
        artifacts.push(path);
    }
    println!("I2T MAP: {:.4}", maps[0]);
    println!("T2I MAP: {:.4}", maps[1]);

    let weights_path = match &a.weights {
        Some(p) => Some(absolute(p)?),
        None => checkpoint
            .parent()
            .map(|d| d.join("weights.csv"))
            .filter(|p| p.exists()),
    };
    let detection = match &weights_path {
        Some(path) => {
            let train_mask = load_split(&manifest, &base, |m| &m.train)?.noise_mask;
            let (epoch, weights) = read_final_weights(path)?;
            if weights.len() != train_mask.len() {
                return Err(CliError::compat(format!(
                    "weight dump covers {} instances, training split has {}",
                    weights.len(),
                    train_mask.len()
                )));
            }
            let scores = noise_detection_score(&weights, &train_mask)?;
            println!(
                "noise detection (epoch {epoch}): precision {:.4} recall {:.4} F1 {:.4} AUC {:.4}",
                scores.precision, scores.recall, scores.f1, scores.auc
            );
            Some(DetectionSummary { epoch, scores })
        }
        None => None,
    };
    let summary_path = out.join("eval.toml");
    write_toml(
        &summary_path,
        &EvalSummary {
            map_i2t: maps[0],
            map_t2i: maps[1],
            noise_detection: detection,
        },
    )?;
    artifacts.push(summary_path);

    let mut args = vec![
        "--data".into(),
        manifest_path.display().to_string(),
        "--checkpoint".into(),
        checkpoint.display().to_string(),
        "--pr-points".into(),
        a.pr_points.to_string(),
        "--out".into(),
        out.display().to_string(),
    ];
    if let Some(p) = &weights_path {
        args.extend(["--weights".into(), p.display().to_string()]);
    }
    let mut config = toml::Table::new();
    config.insert("pr_points".into(), toml::Value::Integer(a.pr_points as i64));
    config.insert("dataset_seed".into(), toml::Value::Integer(manifest.seed as i64));
    finish_manifest("eval", args, manifest.seed, config, &out, artifacts, started)
}

/// Seed of the data shared by every cell at one noise rate.
pub fn sweep_data_seed(base: u64, noise_rate: f64) -> u64 {
    seed::derive(base, &[noise_rate.to_bits()])
}

/// Training seed of one sweep cell.
pub fn sweep_cell_seed(base: u64, noise_rate: f64, bits: usize, variant: Variant) -> u64 {
    seed::derive(
        seed::derive_str(base, variant.name()),
        &[noise_rate.to_bits(), bits as u64],
    )
}

fn cell_label(noise: f64, bits: usize) -> String {
    format!("noise{noise}_bits{bits}")
}

#[derive(Serialize)]
struct CellResult {
    noise_rate: f64,
    bits: usize,
    variant: String,
    seed: u64,
    map_i2t: f64,
    map_t2i: f64,
    best_epoch: usize,
}

fn run_cell(
    splits: &Splits,
    config: &TrainConfig,
    dir: &Path,
    exec: Exec,
) -> Result<(f64, f64, TrainReport), CliError> {
    let outcome = run_training(&splits.train, &splits.val, config, None, exec)?;
    let (i2t, t2i) = retrieval_map(&outcome.best_params, &splits.test, &splits.test.true_labels, exec)?;
    create_dir(dir)?;
    write_file(&dir.join("report.csv"), |w| outcome.report.write_csv(w))?;
    Ok((i2t, t2i, outcome.report))
}

pub fn sweep(a: &SweepArgs, exec: Exec) -> Result<(), CliError> {
    let started = Instant::now();
    if a.noise_rates.is_empty() || a.bits.is_empty() || a.variants.is_empty() {
        return Err(CliError::usage("sweep grid is empty"));
    }
    for &rate in &a.noise_rates {
        check_noise_rate(rate)?;
    }
    a.synth.spec(a.model.seed).validate()?;
    let out = absolute(&a.out)?;
    create_dir(&out)?;

    let splits: Vec<Splits> = a
        .noise_rates
        .iter()
        .map(|&rate| prepare(&a.synth.benchmark(rate, sweep_data_seed(a.model.seed, rate))))
        .collect::<crate::Result<_>>()?;

    let mut cells = Vec::new();
    for (ni, &noise) in a.noise_rates.iter().enumerate() {
        for &bits in &a.bits {
            for &variant in &a.variants {
                cells.push((ni, noise, bits, variant));
            }
        }
    }
    // cells fan out; each cell's own loops then run sequentially
    let results: Vec<Result<(f64, f64), CliError>> = exec.map(cells.len(), |c| {
        let (ni, noise, bits, variant) = cells[c];
        let seed = sweep_cell_seed(a.model.seed, noise, bits, variant);
        let dir = out
            .join("cells")
            .join(format!("{}_{}", variant.name(), cell_label(noise, bits)));
        let outcome = a
            .model
            .config(bits, variant, seed)
            .and_then(|cfg| run_cell(&splits[ni], &cfg, &dir, Exec::Sequential));
        match outcome {
            Ok((i2t, t2i, report)) => {
                log::info!("cell {variant} noise {noise} bits {bits}: MAP {i2t:.4} / {t2i:.4}");
                write_toml(
                    &dir.join("result.toml"),
                    &CellResult {
                        noise_rate: noise,
                        bits,
                        variant: variant.name().into(),
                        seed,
                        map_i2t: i2t,
                        map_t2i: t2i,
                        best_epoch: report.best_epoch,
                    },
                )?;
                Ok((i2t, t2i))
            }
            Err(e) => {
                log::error!("cell {variant} noise {noise} bits {bits} failed: {e}");
                let _ = create_dir(&dir).and_then(|_| {
                    fs::write(dir.join("error.txt"), format!("{e}\n")).map_err(|err| CliError::io(&dir, err))
                });
                Err(e)
            }
        }
    });

    let aggregate = out.join("aggregate.csv");
    write_file(&aggregate, |w| {
        write!(w, "variant")?;
        for &noise in &a.noise_rates {
            for &bits in &a.bits {
                let label = cell_label(noise, bits);
                write!(w, ",{label}_i2t,{label}_t2i")?;
            }
        }
        writeln!(w)?;
        for &variant in &a.variants {
            write!(w, "{}", variant.name())?;
            for (c, cell) in cells.iter().enumerate() {
                if cell.3 != variant {
                    continue;
                }
                match &results[c] {
                    Ok((i2t, t2i)) => write!(w, ",{i2t:.6},{t2i:.6}")?,
                    Err(_) => write!(w, ",error,error")?,
                }
            }
            writeln!(w)?;
        }
        Ok(())
    })?;

    for &variant in &a.variants {
        let row: Vec<String> = cells
            .iter()
            .zip(&results)
            .filter(|(cell, _)| cell.3 == variant)
            .map(|(cell, r)| match r {
                Ok((i2t, t2i)) => format!("{}: {i2t:.4}/{t2i:.4}", cell_label(cell.1, cell.2)),
                Err(_) => format!("{}: error", cell_label(cell.1, cell.2)),
            })
            .collect();
        println!("{:<16} {}", variant.name(), row.join("  "));
    }

    let mut args = a.synth.canonical();
    let join = |v: Vec<String>| v.join(",");
    args.extend([
        "--noise-rates".into(),
        join(a.noise_rates.iter().map(ToString::to_string).collect()),
        "--bits".into(),
        join(a.bits.iter().map(ToString::to_string).collect()),
        "--variants".into(),
        join(a.variants.iter().map(|v| v.name().to_string()).collect()),
        "--out".into(),
        out.display().to_string(),
    ]);
    args.extend(a.model.canonical());
    let mut config = toml::Table::new();
    config.insert(
        "synth".into(),
        toml::Value::Table(to_table(&a.synth.spec(a.model.seed))),
    );
    config.insert(
        "model".into(),
        toml::Value::Table(to_table(&a.model.config(
            a.bits[0],
            a.variants[0],
            a.model.seed,
        )?)),
    );
    finish_manifest(
        "sweep",
        args,
        a.model.seed,
        config,
        &out,
        vec![aggregate],
        started,
    )?;

    match results.into_iter().find_map(Result::err) {
        Some(first) => Err(CliError {
            code: first.code,
            message: format!("some sweep cells failed; first failure: {}", first.message),
        }),
        None => Ok(()),
    }
}

pub fn replay(a: &ReplayArgs, sequential: bool) -> Result<(), CliError> {
    let manifest = RunManifest::load(&absolute(&a.manifest)?)?;
    let mut args = manifest.args.clone();
    if args.first().map(String::as_str) == Some("replay") {
        return Err(CliError::usage("a replay manifest cannot be replayed"));
    }
    if let Some(out) = &a.out {
        let out = absolute(out)?.display().to_string();
        match args.iter().position(|s| s == "--out") {
            Some(i) if i + 1 < args.len() => args[i + 1] = out,
            _ => return Err(CliError::usage("manifest records no output directory")),
        }
    }
    let mut argv = vec!["sphash".to_string()];
    if sequential {
        argv.push("--sequential".into());
    }
    argv.extend(args);
    run(argv)
}
