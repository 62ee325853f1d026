//! Command-line front end. Each subcommand reads its declared inputs and
//! writes its artifacts into the output directory; every artifact embeds the
//! config hash and seed that produced it (as a `# config_hash=... seed=...`
//! comment in CSVs, as fields in JSON documents).
//!
//! The binary in `src/main.rs` is a thin wrapper: everything here is plain
//! library code, so tests and examples can drive the exact same entry point.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use crate::config::AppConfig;
use crate::ema::{simulate_gate, GatePolicy};
use crate::error::{Error, Result};
use crate::eval::{evaluate_full, fit_learner, EvalReport};
use crate::features::{extract_matrix, FeatureMatrix};
use crate::ingest::{parse_corpus, resolve_events, ExcludedEvent};
use crate::model::{load_model, save_model, AdaBoostModel};
use crate::preprocess::preprocess_window;
use crate::sampling::domains;
use crate::signal::{AnnotatedEvent, SessionRecording, WindowSample};
use crate::synth::{generate_corpus, write_corpus};
use crate::windowing::extract_all;

#[derive(Debug, Parser)]
#[command(name = "affectkit", version, about = "Wearable biosignal affect-recognition pipeline")]
pub struct Cli {
    /// TOML config file; omitted keys fall back to defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Override the config seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Override the worker count (0 = all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Directory artifacts are written into.
    #[arg(long, global = true, default_value = "out")]
    pub out_dir: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a seeded synthetic corpus into `<out-dir>/corpus`.
    Synth,
    /// Parse a corpus, apply exclusion rules, write events/exclusions.
    Ingest {
        #[arg(long)]
        data_dir: PathBuf,
    },
    /// Extract pre-event windows and write a window summary.
    Windows {
        #[arg(long)]
        data_dir: PathBuf,
    },
    /// Extract the preprocessed feature matrix CSV.
    Features {
        #[arg(long)]
        data_dir: PathBuf,
    },
    /// Train a model on a feature CSV (imputation, selection, SMOTE, boosting).
    Train {
        #[arg(long)]
        features: PathBuf,
    },
    /// Run the split + cross-validation + held-out protocol on a feature CSV.
    Evaluate {
        #[arg(long)]
        features: PathBuf,
    },
    /// Append model predictions to a feature CSV.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        features: PathBuf,
    },
    /// Simulate the prompt gate on a detections file (one timestamp per line).
    SimulateEma {
        #[arg(long)]
        detections: PathBuf,
    },
    /// Full chain: synth (or ingest --data-dir), windows, features, train, evaluate.
    Pipeline {
        #[arg(long)]
        data_dir: Option<PathBuf>,
    },
}

/// Everything a run needs: effective config plus artifact provenance.
struct RunContext {
    cfg: AppConfig,
    hash: String,
    out_dir: PathBuf,
}

impl RunContext {
    fn comment(&self) -> String {
        format!("config_hash={} seed={}", self.hash, self.cfg.seed)
    }

    fn write(&self, name: &str, contents: &str) -> Result<PathBuf> {
        let path = self.out_dir.join(name);
        std::fs::write(&path, contents).map_err(|e| Error::Io { path: path.clone(), source: e })?;
        Ok(path)
    }

    /// CSV artifact with the provenance comment line prepended.
    fn write_csv(&self, name: &str, body: &str) -> Result<PathBuf> {
        self.write(name, &format!("# {}\n{body}", self.comment()))
    }
}

pub fn run(cli: Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(path) => AppConfig::load(path)?,
        None => AppConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(jobs) = cli.jobs {
        cfg.jobs = jobs;
    }

    let ctx = RunContext { hash: cfg.config_hash(), cfg, out_dir: cli.out_dir.clone() };
    std::fs::create_dir_all(&ctx.out_dir)
        .map_err(|e| Error::Io { path: ctx.out_dir.clone(), source: e })?;

    if ctx.cfg.jobs > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(ctx.cfg.jobs)
            .build()
            .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))?;
        pool.install(|| dispatch(&cli.command, &ctx))
    } else {
        dispatch(&cli.command, &ctx)
    }
}

fn dispatch(command: &Command, ctx: &RunContext) -> Result<()> {
    match command {
        Command::Synth => cmd_synth(ctx).map(|_| ()),
        Command::Ingest { data_dir } => cmd_ingest(ctx, data_dir).map(|_| ()),
        Command::Windows { data_dir } => cmd_windows(ctx, data_dir),
        Command::Features { data_dir } => cmd_features(ctx, data_dir).map(|_| ()),
        Command::Train { features } => cmd_train(ctx, features),
        Command::Evaluate { features } => {
            let matrix = FeatureMatrix::read_csv(features)?;
            cmd_evaluate(ctx, &matrix).map(|_| ())
        }
        Command::Predict { model, features } => cmd_predict(ctx, model, features),
        Command::SimulateEma { detections } => cmd_simulate_ema(ctx, detections),
        Command::Pipeline { data_dir } => cmd_pipeline(ctx, data_dir.as_deref()),
    }
}

fn log_effective_config(ctx: &RunContext) -> Result<()> {
    let body = format!("# {}\n{}", ctx.comment(), ctx.cfg.to_toml());
    ctx.write("effective_config.toml", &body)?;
    println!("config_hash={} seed={} out_dir={}", ctx.hash, ctx.cfg.seed, ctx.out_dir.display());
    Ok(())
}

fn cmd_synth(ctx: &RunContext) -> Result<PathBuf> {
    log_effective_config(ctx)?;
    let corpus_dir = ctx.out_dir.join("corpus");
    let corpus = generate_corpus(&ctx.cfg.synth, ctx.cfg.seed)?;
    write_corpus(&corpus, &corpus_dir)?;
    let manifest = serde_json::json!({
        "config_hash": ctx.hash,
        "seed": ctx.cfg.seed,
        "sessions": corpus.sessions.len(),
        "annotations": corpus.annotations.len(),
    });
    let manifest_path = corpus_dir.join("manifest.json");
    std::fs::write(&manifest_path, serde_json::to_string_pretty(&manifest).unwrap())
        .map_err(|e| Error::Io { path: manifest_path, source: e })?;
    println!(
        "synth: {} sessions, {} annotation rows -> {}",
        corpus.sessions.len(),
        corpus.annotations.len(),
        corpus_dir.display()
    );
    Ok(corpus_dir)
}

fn load_events(data_dir: &Path) -> Result<(Vec<SessionRecording>, Vec<AnnotatedEvent>, Vec<ExcludedEvent>)> {
    let (sessions, rows) = parse_corpus(data_dir)?;
    let (kept, excluded) = resolve_events(&rows);
    Ok((sessions, kept, excluded))
}

fn events_csv(kept: &[AnnotatedEvent]) -> String {
    let mut out = String::from("event_id,label,tag_time,delay_seconds,event_time\n");
    for e in kept {
        let _ = writeln!(out, "{},{},{},{},{}", e.event_id, e.label.as_str(), e.tag_time, e.delay, e.event_time());
    }
    out
}

fn excluded_csv(excluded: &[ExcludedEvent]) -> String {
    let mut out = String::from("event_id,reason\n");
    for e in excluded {
        let _ = writeln!(out, "{},{}", e.event_id, e.reason.as_str());
    }
    out
}

fn cmd_ingest(
    ctx: &RunContext,
    data_dir: &Path,
) -> Result<(Vec<SessionRecording>, Vec<AnnotatedEvent>, Vec<ExcludedEvent>)> {
    log_effective_config(ctx)?;
    let (sessions, kept, excluded) = load_events(data_dir)?;
    ctx.write_csv("events.csv", &events_csv(&kept))?;
    ctx.write_csv("excluded.csv", &excluded_csv(&excluded))?;
    println!(
        "ingest: {} sessions, {} events kept, {} excluded",
        sessions.len(),
        kept.len(),
        excluded.len()
    );
    Ok((sessions, kept, excluded))
}

/// Windowing plus per-window preprocessing, in parallel, order preserved.
fn build_windows(
    ctx: &RunContext,
    sessions: &[SessionRecording],
    kept: &[AnnotatedEvent],
) -> Result<(Vec<WindowSample>, Vec<ExcludedEvent>)> {
    let (windows, dropped) = extract_all(sessions, kept, ctx.cfg.window_seconds)?;
    let processed: Result<Vec<WindowSample>> = windows
        .par_iter()
        .map(|w| preprocess_window(w, &ctx.cfg.preprocess))
        .collect();
    Ok((processed?, dropped))
}

fn cmd_windows(ctx: &RunContext, data_dir: &Path) -> Result<()> {
    let (sessions, kept, excluded) = cmd_ingest(ctx, data_dir)?;
    let (windows, dropped) = build_windows(ctx, &sessions, &kept)?;
    let mut body = String::from("event_id,label,samples_bvp,samples_eda,samples_skt,samples_acc\n");
    for w in &windows {
        let count = |kind| w.channel(kind).map(|c| c.samples.len()).unwrap_or(0);
        let _ = writeln!(
            body,
            "{},{},{},{},{},{}",
            w.event_id,
            w.label,
            count(crate::signal::ChannelKind::Bvp),
            count(crate::signal::ChannelKind::Eda),
            count(crate::signal::ChannelKind::Skt),
            count(crate::signal::ChannelKind::AccX),
        );
    }
    ctx.write_csv("windows.csv", &body)?;
    let all_excluded: Vec<ExcludedEvent> = excluded.into_iter().chain(dropped).collect();
    ctx.write_csv("excluded.csv", &excluded_csv(&all_excluded))?;
    println!("windows: {} extracted, {} total excluded", windows.len(), all_excluded.len());
    Ok(())
}

fn cmd_features(ctx: &RunContext, data_dir: &Path) -> Result<FeatureMatrix> {
    let (sessions, kept, excluded) = cmd_ingest(ctx, data_dir)?;
    let (windows, dropped) = build_windows(ctx, &sessions, &kept)?;
    let matrix = extract_matrix(&windows, &ctx.cfg.features);
    let path = ctx.out_dir.join("features.csv");
    matrix.write_csv(&path, Some(&ctx.comment()))?;
    let all_excluded: Vec<ExcludedEvent> = excluded.into_iter().chain(dropped).collect();
    ctx.write_csv("excluded.csv", &excluded_csv(&all_excluded))?;
    println!(
        "features: {} rows x {} features -> {}",
        matrix.n_rows(),
        matrix.n_features(),
        path.display()
    );
    Ok(matrix)
}

fn cmd_train(ctx: &RunContext, features: &Path) -> Result<()> {
    log_effective_config(ctx)?;
    let matrix = FeatureMatrix::read_csv(features)?;
    let model = fit_learner(
        &matrix,
        &ctx.cfg.learner_settings(),
        ctx.cfg.seed,
        domains::SMOTE_FINAL,
        &ctx.hash,
    )?;
    let path = ctx.out_dir.join("model.json");
    save_model(&model, &path)?;
    println!(
        "train: {} rows, {} kept features, {} boosting stages -> {}",
        matrix.n_rows(),
        model.feature_names.len(),
        model.alphas.len(),
        path.display()
    );
    Ok(())
}

fn cmd_evaluate(ctx: &RunContext, matrix: &FeatureMatrix) -> Result<(EvalReport, AdaBoostModel)> {
    let (mut report, model) = evaluate_full(
        matrix,
        ctx.cfg.sampling.test_fraction,
        ctx.cfg.sampling.k_folds,
        &ctx.cfg.learner_settings(),
        ctx.cfg.seed,
        &ctx.hash,
    )?;
    report.config = serde_json::to_value(&ctx.cfg).ok();
    report.write_json(&ctx.out_dir.join("report.json"))?;
    ctx.write("metrics.csv", &report.fold_metrics_csv())?;
    save_model(&model, &ctx.out_dir.join("model.json"))?;

    let fmt = |v: Option<f64>| v.map(|x| format!("{x:.4}")).unwrap_or_else(|| "n/a".into());
    println!("evaluate: pooled CV F1 = {}", fmt(report.pooled.f1));
    if let Some(h) = &report.heldout {
        println!("evaluate: held-out F1 = {}", fmt(h.f1));
    }
    Ok((report, model))
}

fn cmd_predict(ctx: &RunContext, model_path: &Path, features: &Path) -> Result<()> {
    log_effective_config(ctx)?;
    let model = load_model(model_path)?;
    let matrix = FeatureMatrix::read_csv(features)?;
    let projection = model.projection(&matrix.feature_names)?;

    let mut body = String::from("event_id,label,");
    body.push_str(&matrix.feature_names.join(","));
    body.push_str(",predicted_label,score\n");
    for row in &matrix.rows {
        let (label, score) = model.predict_projected(row, &projection);
        let _ = write!(body, "{},{}", row.event_id, row.label);
        for v in &row.values {
            let _ = write!(body, ",{v}");
        }
        let _ = writeln!(body, ",{label},{score}");
    }
    let path = ctx.write_csv("predictions.csv", &body)?;
    println!("predict: {} rows -> {}", matrix.n_rows(), path.display());
    Ok(())
}

fn cmd_simulate_ema(ctx: &RunContext, detections: &Path) -> Result<()> {
    log_effective_config(ctx)?;
    let text = std::fs::read_to_string(detections)
        .map_err(|e| Error::Io { path: detections.to_path_buf(), source: e })?;
    let mut times = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let t: f64 = line.parse().map_err(|_| Error::NonFiniteValue {
            path: detections.to_path_buf(),
            line: i + 1,
        })?;
        times.push(t);
    }

    let policy = GatePolicy {
        min_idle: ctx.cfg.ema.min_idle_s,
        ask_probability: ctx.cfg.ema.ask_probability,
        seed: ctx.cfg.seed,
    };
    let (decisions, summary) = simulate_gate(&policy, &times)?;

    let mut body = String::from("t,decision\n");
    for (t, d) in times.iter().zip(&decisions) {
        let _ = writeln!(body, "{t},{}", d.as_str());
    }
    let path = ctx.write_csv("decisions.csv", &body)?;
    println!(
        "simulate-ema: {} detections, {} prompts, {} idle-suppressed, {} random-suppressed -> {}",
        times.len(),
        summary.prompts,
        summary.suppressed_idle,
        summary.suppressed_random,
        path.display()
    );
    Ok(())
}

fn cmd_pipeline(ctx: &RunContext, data_dir: Option<&Path>) -> Result<()> {
    let corpus_dir = match data_dir {
        Some(dir) => dir.to_path_buf(),
        None => cmd_synth(ctx)?,
    };
    let (sessions, kept, excluded) = load_events(&corpus_dir)?;
    ctx.write_csv("events.csv", &events_csv(&kept))?;
    let (windows, dropped) = build_windows(ctx, &sessions, &kept)?;
    let all_excluded: Vec<ExcludedEvent> = excluded.into_iter().chain(dropped).collect();
    ctx.write_csv("excluded.csv", &excluded_csv(&all_excluded))?;

    let matrix = extract_matrix(&windows, &ctx.cfg.features);
    matrix.write_csv(&ctx.out_dir.join("features.csv"), Some(&ctx.comment()))?;
    println!(
        "pipeline: {} windows -> {} rows x {} features",
        windows.len(),
        matrix.n_rows(),
        matrix.n_features()
    );

    cmd_evaluate(ctx, &matrix).map(|_| ())
}
