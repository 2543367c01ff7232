//! Subcommand implementations. Each returns the text it would print so that
//! callers (the binary, tests) decide where it goes.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use abstainer::attached::{calibration_scores, make_chow_rejector, make_fraction_rejector, make_pre_rejector, AttachedPipeline};
use abstainer::dataset::{inject_outliers, label_ambiguous, load_csv, save_csv, split, Dataset};
use abstainer::decision::Decision;
use abstainer::evaluation::{
    compare_architectures, sweep_alpha, sweep_delta, sweep_tau, write_sweep_csv, AlphaMethod, Architecture,
    RiskCoveragePoint,
};
use abstainer::explanation::{abstention_reason, explain_merged, indirect_explanation};
use abstainer::fixtures;
use abstainer::kv::fmt_f64;
use abstainer::merged::{fit_labeled, fit_unlabeled_direct, fit_unlabeled_plugin, AbstainModel, AlphaConfig};
use abstainer::predictor::fit_surrogate;
use abstainer::system::TrainedSystem;

use crate::config::RunConfig;
use crate::error::{usage, CliError, Result};
use crate::svg;

const REGION_RESOLUTION: usize = 60;

#[derive(Debug, Parser)]
#[command(name = "abstainer", version, about = "Selective classification with attached and merged abstention")]
pub struct Cli {
    /// key=value configuration file
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Directory for default output paths
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Override any configuration key, e.g. --set tau=0.9 (repeatable)
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a named synthetic fixture as CSV, optionally with a scatter plot
    Gen(GenArgs),
    /// Fit an abstaining system and save it as a model file
    Train(TrainArgs),
    /// Decide every row of a CSV with a saved model
    Decide(DecideArgs),
    /// Risk-coverage sweep over tau, alpha or delta
    Sweep(SweepArgs),
    /// Explain the decision on one row
    Explain(ExplainArgs),
    /// Compare architectures on one train/test split
    Compare(CompareArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// One of fig1, separable, overlap, outliers, bands, xor, smudge
    #[arg(long)]
    pub fixture: String,
    /// Append this many outliers (drawn as stars)
    #[arg(long)]
    pub outliers: Option<usize>,
    /// Minimum standardized distance of appended outliers
    #[arg(long, default_value_t = fixtures::OUTLIER_DISTANCE)]
    pub min_distance: f64,
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Also write a scatter plot next to the CSV
    #[arg(long)]
    pub svg: bool,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub architecture: Option<String>,
    #[arg(long)]
    pub alpha: Option<String>,
    #[arg(long)]
    pub tau: Option<String>,
    #[arg(long)]
    pub delta: Option<String>,
    #[arg(long)]
    pub k: Option<String>,
    #[arg(long)]
    pub q: Option<String>,
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Also write a decision-region plot (two-feature data only)
    #[arg(long)]
    pub svg: bool,
}

#[derive(Debug, Args)]
pub struct DecideArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// tau, alpha or delta
    #[arg(long)]
    pub param: String,
    /// plugin or direct (alpha sweeps only)
    #[arg(long, default_value = "plugin")]
    pub method: String,
    /// Comma-separated ascending values; defaults depend on the parameter
    #[arg(long)]
    pub values: Option<String>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub svg: bool,
}

#[derive(Debug, Args)]
pub struct ExplainArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    /// Zero-based row index
    #[arg(long)]
    pub index: usize,
    /// Only report why the row was abstained on
    #[arg(long)]
    pub reason: bool,
    #[arg(long)]
    pub top_k: Option<String>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Comma-separated architectures; defaults to pre-attached, post-attached,
    /// labeled and plugin
    #[arg(long)]
    pub archs: Option<String>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// Parses `args` (program name first) and runs the command.
pub fn run_from<I, T>(args: I) -> Result<String>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| usage(clap_message(&e)))?;
    execute(cli)
}

/// First line of a clap error without its `error: ` prefix.
pub fn clap_message(e: &clap::Error) -> String {
    let text = e.to_string();
    let first = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("invalid arguments");
    first.trim_start_matches("error: ").trim().to_string()
}

fn resolve_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    for pair in &cli.set {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| usage(format!("--set expects KEY=VALUE, got '{pair}'")))?;
        cfg.set(k.trim(), v)?;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(dir) = &cli.out_dir {
        cfg.out_dir = dir.clone();
    }
    Ok(cfg)
}

fn apply(cfg: &mut RunConfig, overrides: &[(&str, &Option<String>)]) -> Result<()> {
    for (key, value) in overrides {
        if let Some(v) = value {
            cfg.set(key, v)?;
        }
    }
    Ok(())
}

pub fn execute(cli: Cli) -> Result<String> {
    let mut cfg = resolve_config(&cli)?;
    match &cli.command {
        Command::Gen(a) => cmd_gen(&cfg, a),
        Command::Train(a) => {
            apply(
                &mut cfg,
                &[
                    ("architecture", &a.architecture),
                    ("alpha", &a.alpha),
                    ("tau", &a.tau),
                    ("delta", &a.delta),
                    ("k", &a.k),
                    ("q", &a.q),
                ],
            )?;
            cmd_train(&cfg, a)
        }
        Command::Decide(a) => cmd_decide(&cfg, a),
        Command::Sweep(a) => cmd_sweep(&cfg, a),
        Command::Explain(a) => {
            apply(&mut cfg, &[("top_k", &a.top_k)])?;
            cmd_explain(&cfg, a)
        }
        Command::Compare(a) => cmd_compare(&cfg, a),
    }
}

fn output_path(cfg: &RunConfig, explicit: &Option<PathBuf>, default_name: &str) -> Result<PathBuf> {
    let path = explicit.clone().unwrap_or_else(|| cfg.out_dir.join(default_name));
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| abstainer::Error::Io {
            path: parent.to_path_buf(),
            source: e,
        })?;
    }
    Ok(path)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| {
        CliError::Core(abstainer::Error::Io {
            path: path.to_path_buf(),
            source: e,
        })
    })
}

fn load(cfg: &RunConfig, path: &Path) -> Result<Dataset> {
    Ok(load_csv(path, &cfg.label_column)?)
}

pub fn cmd_gen(cfg: &RunConfig, args: &GenArgs) -> Result<String> {
    let mut data = fixtures::by_name(&args.fixture, cfg.seed)?;
    let mut stars = if args.fixture == "outliers" {
        fixtures::OUTLIER_COUNT
    } else {
        0
    };
    if let Some(count) = args.outliers {
        data = inject_outliers(&data, count, args.min_distance, cfg.seed.wrapping_add(1))?;
        stars += count;
    }
    let csv_path = output_path(cfg, &args.output, &format!("{}.csv", args.fixture))?;
    save_csv(&data, &csv_path)?;
    let mut report = format!("wrote {} rows to {}\n", data.n(), csv_path.display());
    if args.svg {
        let rows: Vec<usize> = (data.n() - stars..data.n()).collect();
        let svg_path = csv_path.with_extension("svg");
        write_text(&svg_path, &svg::scatter_svg(&data, &rows, &args.fixture))?;
        let _ = writeln!(report, "wrote scatter plot to {}", svg_path.display());
    }
    Ok(report)
}

/// Fits the configured architecture on `data`. Labeled abstention uses the
/// data's own abstention labels when present and derives them from local
/// label disagreement otherwise.
pub fn train_system(cfg: &RunConfig, data: &Dataset) -> Result<TrainedSystem> {
    let arch = cfg.architecture;
    if arch != Architecture::Labeled && data.label_space().includes_abstention() {
        return Err(usage(format!(
            "architecture '{}' trains on data without abstention labels",
            arch.as_str()
        )));
    }
    let surrogate = cfg.surrogate();
    let attached = |pre, post| -> Result<TrainedSystem> {
        let model = fit_surrogate(data, &surrogate)?;
        Ok(TrainedSystem::Attached(AttachedPipeline::new(model, pre, post)?))
    };
    Ok(match arch {
        Architecture::Plain => attached(None, None)?,
        Architecture::PreAttached => attached(Some(make_pre_rejector(data, cfg.k, cfg.delta)?), None)?,
        Architecture::PostAttached => attached(None, Some(make_chow_rejector(cfg.tau)?))?,
        Architecture::FractionAttached => {
            let model = fit_surrogate(data, &surrogate)?;
            let post = make_fraction_rejector(cfg.q, &calibration_scores(&model, data)?)?;
            TrainedSystem::Attached(AttachedPipeline::new(model, None, Some(post))?)
        }
        Architecture::Labeled => {
            let ystar = if data.label_space().includes_abstention() {
                data.clone()
            } else {
                label_ambiguous(data, cfg.ambiguity_k, cfg.min_agreement)?
            };
            TrainedSystem::Merged(fit_labeled(&ystar, &surrogate)?)
        }
        Architecture::PlugIn => TrainedSystem::Merged(fit_unlabeled_plugin(data, &AlphaConfig::Uniform(cfg.alpha), &surrogate)?),
        Architecture::Direct => {
            TrainedSystem::Merged(fit_unlabeled_direct(data, &AlphaConfig::Uniform(cfg.alpha), &cfg.grid())?.into_model())
        }
    })
}

pub fn cmd_train(cfg: &RunConfig, args: &TrainArgs) -> Result<String> {
    let data = load(cfg, &args.data)?;
    let system = train_system(cfg, &data)?;
    let model_path = output_path(cfg, &args.model, "model.kv")?;
    system.save(&model_path)?;
    let mut report = format!(
        "trained {} on {} rows; model written to {}\n",
        cfg.architecture.as_str(),
        data.n(),
        model_path.display()
    );
    if args.svg {
        let title = format!("{} decision regions", cfg.architecture.as_str());
        let svg_path = model_path.with_extension("svg");
        write_text(&svg_path, &svg::region_svg(&system, &data, REGION_RESOLUTION, &title)?)?;
        let _ = writeln!(report, "wrote region plot to {}", svg_path.display());
    }
    Ok(report)
}

fn check_features(system: &TrainedSystem, data: &Dataset) -> Result<()> {
    if system.feature_names() != data.feature_names() {
        return Err(usage(format!(
            "data columns [{}] do not match model features [{}]",
            data.feature_names().join(","),
            system.feature_names().join(",")
        )));
    }
    Ok(())
}

/// Largest probability of the system's probabilistic predictor on `x`, or
/// the recorded value when the decision carries one. Band models have none.
pub fn max_probability(system: &TrainedSystem, decision: &Decision, x: &[f64]) -> Result<Option<f64>> {
    if let Some(p) = decision.max_prob() {
        return Ok(Some(p));
    }
    let model = match system {
        TrainedSystem::Attached(p) => p.model(),
        TrainedSystem::Merged(AbstainModel::PlugIn { base, .. } | AbstainModel::Labeled { base }) => base,
        TrainedSystem::Merged(AbstainModel::Band(_)) => return Ok(None),
    };
    Ok(Some(model.predict_proba(x)?.max()))
}

pub const DECISIONS_HEADER: &str = "index,decision,reason,max_p,detail";

pub fn cmd_decide(cfg: &RunConfig, args: &DecideArgs) -> Result<String> {
    let system = TrainedSystem::load(&args.model)?;
    let data = load(cfg, &args.data)?;
    check_features(&system, &data)?;
    let space = system.label_space();
    let mut out = String::from(DECISIONS_HEADER);
    out.push('\n');
    let mut abstained = 0;
    for i in 0..data.n() {
        let x = data.row_vec(i);
        let decision = system.decide(&x)?;
        let max_p = max_probability(&system, &decision, &x)?;
        let (label, reason) = match &decision {
            Decision::Predicted(l) => (space.name(*l)?.to_string(), String::new()),
            Decision::Abstained { reason, .. } => {
                abstained += 1;
                ("abstain".to_string(), reason.as_str().to_string())
            }
        };
        let detail: Vec<String> = decision.details().iter().map(|d| d.to_string()).collect();
        let _ = writeln!(
            out,
            "{i},{label},{reason},{},{}",
            max_p.map(fmt_f64).unwrap_or_default(),
            detail.join(";")
        );
    }
    let path = output_path(cfg, &args.output, "decisions.csv")?;
    write_text(&path, &out)?;
    Ok(format!(
        "decided {} rows ({} abstained); written to {}\n",
        data.n(),
        abstained,
        path.display()
    ))
}

fn parse_values(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| usage(format!("cannot parse sweep value '{v}'")))
        })
        .collect()
}

fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    (0..steps)
        .map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64)
        .collect()
}

/// Default sweep values: 20 thresholds for tau, 10 alphas up to the bound,
/// 10 distances for delta.
pub fn default_values(param: &str, m: usize) -> Result<Vec<f64>> {
    Ok(match param {
        "tau" => linspace(0.5, 0.995, 20),
        "alpha" => {
            let bound = (m as f64 - 1.0) / m as f64;
            linspace(0.02, bound, 10)
        }
        "delta" => linspace(0.5, 5.0, 10),
        other => return Err(usage(format!("unknown sweep parameter '{other}' (tau, alpha, delta)"))),
    })
}

pub fn sweep_points(cfg: &RunConfig, data: &Dataset, param: &str, method: AlphaMethod, values: &[f64]) -> Result<Vec<RiskCoveragePoint>> {
    let (train, test) = split(data, cfg.train_fraction, cfg.seed)?;
    let surrogate = cfg.surrogate();
    Ok(match param {
        "tau" => sweep_tau(&fit_surrogate(&train, &surrogate)?, &test, values)?,
        "alpha" => sweep_alpha(&train, &test, values, method, &surrogate, &cfg.grid())?,
        "delta" => sweep_delta(&fit_surrogate(&train, &surrogate)?, &train, cfg.k, &test, values)?,
        other => return Err(usage(format!("unknown sweep parameter '{other}' (tau, alpha, delta)"))),
    })
}

pub fn cmd_sweep(cfg: &RunConfig, args: &SweepArgs) -> Result<String> {
    let data = load(cfg, &args.data)?;
    let method: AlphaMethod = args.method.parse()?;
    let values = match &args.values {
        Some(v) => parse_values(v)?,
        None => default_values(&args.param, data.label_space().defined_count())?,
    };
    let points = sweep_points(cfg, &data, &args.param, method, &values)?;
    let path = output_path(cfg, &args.output, &format!("sweep_{}.csv", args.param))?;
    write_sweep_csv(&points, &path)?;
    let mut report = format!("swept {} over {} values; written to {}\n", args.param, points.len(), path.display());
    if args.svg {
        let svg_path = path.with_extension("svg");
        write_text(&svg_path, &svg::curve_svg(&points, &args.param))?;
        let _ = writeln!(report, "wrote risk-coverage curve to {}", svg_path.display());
    }
    Ok(report)
}

pub fn cmd_explain(cfg: &RunConfig, args: &ExplainArgs) -> Result<String> {
    let system = TrainedSystem::load(&args.model)?;
    let data = load(cfg, &args.data)?;
    check_features(&system, &data)?;
    if args.index >= data.n() {
        return Err(usage(format!("row {} out of range for {} rows", args.index, data.n())));
    }
    let x = data.row_vec(args.index);
    let decision = system.decide(&x)?;
    if args.reason {
        return Ok(abstention_reason(&decision)?.render());
    }
    let labels = system.label_space().labels();
    let features = system.feature_names();
    let (record, csv) = match &system {
        TrainedSystem::Merged(model) => {
            let record = explain_merged(model, &x, None)?;
            let csv = record.attribution.as_ref().map(|a| a.to_csv()).unwrap_or_default();
            (record, csv)
        }
        TrainedSystem::Attached(p) => {
            let top_k = cfg.top_k.min(p.model().dim());
            let mut record = indirect_explanation(p.model(), p.post(), &x, top_k)?;
            if record.decision != decision {
                record.decision = decision;
                record.certainty_gap = None;
            }
            let mut csv = String::from("class,probability,feature,score\n");
            for ev in &record.evidence {
                for (j, score) in &ev.top_features {
                    let _ = writeln!(
                        csv,
                        "{},{},{},{}",
                        labels[ev.class],
                        fmt_f64(ev.probability),
                        features[*j],
                        fmt_f64(*score)
                    );
                }
            }
            (record, csv)
        }
    };
    let path = output_path(cfg, &args.output, &format!("explain_{}.csv", args.index))?;
    write_text(&path, &csv)?;
    let mut report = format!("row {}\n", args.index);
    report.push_str(&record.render(labels, features));
    Ok(report)
}

fn parse_archs(text: &str) -> Result<Vec<Architecture>> {
    let archs = text
        .split(',')
        .map(|a| a.trim().parse::<Architecture>().map_err(CliError::from))
        .collect::<Result<Vec<_>>>()?;
    if archs.is_empty() {
        return Err(usage("empty architecture list"));
    }
    Ok(archs)
}

pub fn cmd_compare(cfg: &RunConfig, args: &CompareArgs) -> Result<String> {
    let data = load(cfg, &args.data)?;
    let archs = match &args.archs {
        Some(a) => parse_archs(a)?,
        None => Architecture::FOUR.to_vec(),
    };
    let (train, test) = split(&data, cfg.train_fraction, cfg.seed)?;
    let table = compare_architectures(&train, &test, &cfg.compare(archs))?;
    let path = output_path(cfg, &args.output, "compare.csv")?;
    write_text(&path, &table.to_csv())?;
    Ok(table.render_text())
}
