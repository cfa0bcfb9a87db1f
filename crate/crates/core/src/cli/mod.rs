//! The `informer-options` command-line workflow.
//!
//! Every command reads the same [`RunConfig`] and writes into `--out`:
//!
//! | command    | reads                         | writes                                         |
//! |------------|-------------------------------|------------------------------------------------|
//! | `generate` | scenario settings             | `chain.csv`                                    |
//! | `prepare`  | `chain.csv`                   | `prepared.json`                                |
//! | `train`    | `prepared.json`               | `<model>.checkpoint.json`, `<model>.history.tsv` |
//! | `evaluate` | `prepared.json`, checkpoint   | `<model>.report.json`, `<model>.predictions.csv` |
//! | `backtest` | `prepared.json`, checkpoint   | `<model>.backtest.json`, `<model>.trades.csv`  |
//! | `compare`  | `prepared.json` (or generates) | `compare.json`, `compare.predictions.csv`, checkpoints |
//!
//! All randomness derives from `--seed` through named sub-seeds.

mod config;

pub use config::RunConfig;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use crate::baselines::lstm_forecast_model;
use crate::data::{parse_chain, prepare, DatasetSplit, PrepareSummary, PreparedDataset};
use crate::error::{Error, Result};
use crate::evaluation::{
    backtest, emit_predictions_csv, emit_report, Backtest, BlackScholesForecaster, Forecaster, HestonForecaster,
    LearnedForecaster, MetricsReport, PersistenceForecaster, ReportFile,
};
use crate::market::write_chain_csv;
use crate::model::{Checkpoint, Informer, LearnedModel};
use crate::rng::{derive_seed, SubSeeds};
use crate::training::{evaluate_loss, train, TrainHistory};

#[derive(Debug, Parser)]
#[command(name = "informer-options", version, about = "Option price forecasting with an Informer-style model")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Flat `key = value` configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Root seed for every stochastic component.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Extra `key=value` overrides, applied after the file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a synthetic option chain.
    Generate {
        #[command(flatten)]
        common: Common,
        /// Number of trading days to simulate.
        #[arg(long)]
        days: Option<usize>,
    },
    /// Filter, window, split and normalise the chain.
    Prepare {
        #[command(flatten)]
        common: Common,
    },
    /// Train a learned model and write its checkpoint.
    Train {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = LearnedKind::Informer)]
        model: LearnedKind,
        #[arg(long)]
        epochs: Option<usize>,
    },
    /// Accuracy metrics and forecasts on the test split.
    Evaluate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = ModelKind::Informer)]
        model: ModelKind,
    },
    /// Directional trading backtest on the test split.
    Backtest {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = ModelKind::Informer)]
        model: ModelKind,
    },
    /// Train both learned models and compare all five forecasters.
    Compare {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        epochs: Option<usize>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LearnedKind {
    Informer,
    Lstm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    Informer,
    Lstm,
    #[value(alias = "bs")]
    BlackScholes,
    Heston,
    Persistence,
}

impl LearnedKind {
    pub fn file_stem(self) -> &'static str {
        match self {
            Self::Informer => "informer",
            Self::Lstm => "lstm",
        }
    }
}

impl ModelKind {
    pub fn file_stem(self) -> &'static str {
        match self {
            Self::Informer => "informer",
            Self::Lstm => "lstm",
            Self::BlackScholes => "black-scholes",
            Self::Heston => "heston",
            Self::Persistence => "persistence",
        }
    }

    fn learned(self) -> Option<LearnedKind> {
        match self {
            Self::Informer => Some(LearnedKind::Informer),
            Self::Lstm => Some(LearnedKind::Lstm),
            _ => None,
        }
    }
}

impl Common {
    /// Defaults, then the file, then `--set`, then the dedicated flags.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::from_file(p)?,
            None => RunConfig::default(),
        };
        for kv in &self.set {
            let (k, v) =
                kv.split_once('=').ok_or_else(|| Error::invalid(format!("--set expects KEY=VALUE, got `{kv}`")))?;
            cfg.set(k.trim(), v.trim())?;
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(out) = &self.out {
            cfg.out = out.clone();
        }
        Ok(cfg)
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Summary of a generated chain.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerateSummary {
    pub path: PathBuf,
    pub rows: usize,
    pub first_date: Option<chrono::NaiveDate>,
    pub last_date: Option<chrono::NaiveDate>,
    pub quote_dates: usize,
}

pub fn cmd_generate(cfg: &RunConfig) -> Result<GenerateSummary> {
    cfg.validate()?;
    ensure_dir(&cfg.out)?;
    let records = cfg.scenario.generate(SubSeeds::from_root(cfg.seed).data)?;
    let path = cfg.chain_path();
    write_chain_csv(&records, &path)?;
    let mut dates: Vec<_> = records.iter().map(|r| r.quote_date).collect();
    dates.dedup();
    Ok(GenerateSummary {
        path,
        rows: records.len(),
        first_date: dates.first().copied(),
        last_date: dates.last().copied(),
        quote_dates: dates.len(),
    })
}

pub fn cmd_prepare(cfg: &RunConfig) -> Result<PrepareSummary> {
    cfg.validate()?;
    ensure_dir(&cfg.out)?;
    let chain = parse_chain(cfg.chain_path())?;
    let (prepared, _, summary) = prepare(&chain.records, &cfg.prepare_config())?;
    prepared.save(cfg.prepared_path())?;
    Ok(summary)
}

fn load_split(cfg: &RunConfig) -> Result<(PreparedDataset, DatasetSplit)> {
    let path = cfg.prepared_path();
    let prepared = PreparedDataset::load(&path)?;
    if prepared.config.window != cfg.prepare_config().window {
        return Err(Error::invalid(format!(
            "{} was prepared with window {:?}, but the model expects {:?}; rerun `prepare`",
            path.display(),
            prepared.config.window,
            cfg.prepare_config().window
        )));
    }
    let split = prepared.materialize()?;
    Ok((prepared, split))
}

pub fn checkpoint_path(cfg: &RunConfig, kind: LearnedKind) -> PathBuf {
    cfg.out.join(format!("{}.checkpoint.json", kind.file_stem()))
}

/// A freshly initialised learned model for `kind`.
pub fn new_model(cfg: &RunConfig, kind: LearnedKind) -> Result<LearnedModel> {
    let init = SubSeeds::from_root(cfg.seed).init;
    Ok(match kind {
        LearnedKind::Informer => LearnedModel::Informer(Informer::new(cfg.model, derive_seed(init, "informer"))?),
        LearnedKind::Lstm => LearnedModel::Lstm(lstm_forecast_model(cfg.lstm_config(), derive_seed(init, "lstm"))),
    })
}

/// Train `kind` on a split, writing its checkpoint and history log.
pub fn train_and_save(
    cfg: &RunConfig,
    kind: LearnedKind,
    prepared: &PreparedDataset,
    split: &DatasetSplit,
) -> Result<(LearnedModel, TrainHistory)> {
    let mut model = new_model(cfg, kind)?;
    let history = train(&mut model, split, &cfg.train_config())?;
    Checkpoint::new(&model, prepared.normalizer.clone(), Some(history.best_val_loss))
        .save(checkpoint_path(cfg, kind))?;
    write_text(&cfg.out.join(format!("{}.history.tsv", kind.file_stem())), &history.to_log())?;
    Ok((model, history))
}

pub fn cmd_train(cfg: &RunConfig, kind: LearnedKind) -> Result<TrainHistory> {
    cfg.validate()?;
    ensure_dir(&cfg.out)?;
    let (prepared, split) = load_split(cfg)?;
    Ok(train_and_save(cfg, kind, &prepared, &split)?.1)
}

fn load_learned(
    cfg: &RunConfig,
    kind: LearnedKind,
    prepared: &PreparedDataset,
    split: &DatasetSplit,
) -> Result<LearnedModel> {
    let path = checkpoint_path(cfg, kind);
    if !path.exists() {
        return Err(Error::Checkpoint(format!(
            "{} not found; run `train --model {}` first",
            path.display(),
            kind.file_stem()
        )));
    }
    let ck = Checkpoint::load(&path)?;
    if ck.normalizer != prepared.normalizer {
        return Err(Error::Checkpoint(format!("{} was trained on a different prepared dataset", path.display())));
    }
    let model = ck.model()?;
    if let Some(recorded) = ck.best_val_loss {
        let weights = cfg.train_config().weights(cfg.model.t_y)?;
        let again = evaluate_loss(&model, &split.validation, &weights)?;
        if (again - recorded).abs() > 1e-10 {
            log::warn!("{}: validation loss {again} differs from the recorded {recorded}", path.display());
        }
    }
    Ok(model)
}

fn run_forecaster(
    cfg: &RunConfig,
    kind: ModelKind,
    prepared: &PreparedDataset,
    split: &DatasetSplit,
) -> Result<Backtest> {
    let rate = cfg.rate();
    match kind.learned() {
        Some(l) => {
            let model = load_learned(cfg, l, prepared, split)?;
            backtest(&LearnedForecaster { model: &model, normalizer: &prepared.normalizer }, &split.test)
        }
        None => {
            let f: Box<dyn Forecaster> = match kind {
                ModelKind::BlackScholes => Box::new(BlackScholesForecaster { rate }),
                ModelKind::Heston => Box::new(HestonForecaster { rate, dynamics: cfg.heston_forecast }),
                _ => Box::new(PersistenceForecaster),
            };
            backtest(f.as_ref(), &split.test)
        }
    }
}

pub fn cmd_evaluate(cfg: &RunConfig, kind: ModelKind) -> Result<Backtest> {
    cfg.validate()?;
    ensure_dir(&cfg.out)?;
    let (prepared, split) = load_split(cfg)?;
    let bt = run_forecaster(cfg, kind, &prepared, &split)?;
    let stem = kind.file_stem();
    emit_report(std::slice::from_ref(&bt.report), cfg.out.join(format!("{stem}.report.json")))?;
    emit_predictions_csv(std::slice::from_ref(&bt), cfg.out.join(format!("{stem}.predictions.csv")))?;
    Ok(bt)
}

/// Trades as CSV: one row per test sequence.
pub fn trades_csv(bt: &Backtest) -> String {
    let mut out = String::from("contract_id,window_end,anchor,predicted_final,actual_final,position,log_return\n");
    for t in &bt.trades {
        let pos = match t.position {
            crate::evaluation::Position::Long => "long",
            crate::evaluation::Position::Short => "short",
            crate::evaluation::Position::Flat => "flat",
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{pos},{}",
            t.contract_id, t.window_end, t.anchor, t.predicted_final, t.actual_final, t.log_return
        );
    }
    out
}

pub fn cmd_backtest(cfg: &RunConfig, kind: ModelKind) -> Result<Backtest> {
    cfg.validate()?;
    ensure_dir(&cfg.out)?;
    let (prepared, split) = load_split(cfg)?;
    let bt = run_forecaster(cfg, kind, &prepared, &split)?;
    let stem = kind.file_stem();
    emit_report(std::slice::from_ref(&bt.report), cfg.out.join(format!("{stem}.backtest.json")))?;
    write_text(&cfg.out.join(format!("{stem}.trades.csv")), &trades_csv(&bt))?;
    Ok(bt)
}

/// Roster order of the comparison tables.
pub const COMPARE_ROSTER: [ModelKind; 5] =
    [ModelKind::Informer, ModelKind::Lstm, ModelKind::BlackScholes, ModelKind::Heston, ModelKind::Persistence];

/// Reports of a comparison run with the rendered tables.
#[derive(Debug, Clone, PartialEq)]
pub struct CompareOutcome {
    pub reports: Vec<MetricsReport>,
    pub tables: String,
}

/// Trains Informer and LSTM, runs the pricing and persistence baselines and
/// writes `compare.json`. The chain and prepared split are created first
/// when `prepared.json` does not exist yet.
pub fn cmd_compare(cfg: &RunConfig) -> Result<CompareOutcome> {
    cfg.validate()?;
    ensure_dir(&cfg.out)?;
    if !cfg.prepared_path().exists() {
        if !cfg.chain_path().exists() {
            info!("no chain at {}; generating", cfg.chain_path().display());
            cmd_generate(cfg)?;
        }
        cmd_prepare(cfg)?;
    }
    let (prepared, split) = load_split(cfg)?;
    let mut runs = Vec::with_capacity(COMPARE_ROSTER.len());
    for kind in COMPARE_ROSTER {
        if let Some(l) = kind.learned() {
            info!("training {}", l.file_stem());
            train_and_save(cfg, l, &prepared, &split)?;
        }
        runs.push(run_forecaster(cfg, kind, &prepared, &split)?);
    }
    let reports: Vec<MetricsReport> = runs.iter().map(|r| r.report.clone()).collect();
    write_text(&cfg.out.join("compare.json"), &ReportFile::new(reports.clone()).to_json()?)?;
    emit_predictions_csv(&runs, cfg.out.join("compare.predictions.csv"))?;
    Ok(CompareOutcome { tables: format_tables(&reports), reports })
}

/// The three comparison tables: overall accuracy, final-day accuracy and
/// net value.
pub fn format_tables(reports: &[MetricsReport]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "Overall prediction metrics");
    let _ = writeln!(s, "{:<14} {:>10} {:>10}", "Model", "MAE", "RMSE");
    for r in reports {
        let _ = writeln!(s, "{:<14} {:>10.4} {:>10.4}", r.model, r.mae, r.rmse);
    }
    let _ = writeln!(s, "\nDirection and final-day metrics");
    let _ = writeln!(s, "{:<14} {:>10} {:>14}", "Model", "DA (%)", "Final-Day MAE");
    for r in reports {
        let _ = writeln!(s, "{:<14} {:>10.2} {:>14.4}", r.model, r.direction_accuracy_pct, r.final_day_mae);
    }
    let _ = writeln!(s, "\nBacktest");
    let _ = writeln!(s, "{:<14} {:>10} {:>10}", "Model", "Net Value", "Sequences");
    for r in reports {
        let _ = writeln!(s, "{:<14} {:>10.4} {:>10}", r.model, r.net_value, r.n_sequences);
    }
    s
}

fn print_report(r: &MetricsReport) {
    println!(
        "{}: MAE {:.4}  RMSE {:.4}  DA {:.2}%  final-day MAE {:.4}  NV {:.4}  ({} sequences)",
        r.model, r.mae, r.rmse, r.direction_accuracy_pct, r.final_day_mae, r.net_value, r.n_sequences
    );
}

/// Execute a parsed command line, printing progress to stdout.
pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate { common, days } => {
            let mut cfg = common.resolve()?;
            if let Some(d) = days {
                cfg.scenario.n_days = d;
            }
            let g = cmd_generate(&cfg)?;
            match (g.first_date, g.last_date) {
                (Some(a), Some(b)) => println!(
                    "wrote {} rows to {} ({} quote dates, {a} to {b})",
                    g.rows,
                    g.path.display(),
                    g.quote_dates
                ),
                _ => println!("wrote an empty chain to {}", g.path.display()),
            }
        }
        Command::Prepare { common } => {
            let cfg = common.resolve()?;
            let s = cmd_prepare(&cfg)?;
            println!("kept {} of {} records from {} contracts", s.kept_records, s.input_records, s.contracts);
            for (reason, n) in &s.rejected {
                println!("  rejected {reason}: {n}");
            }
            println!(
                "{} windows: train {}, validation {}, test {} ({} purged at split boundaries)",
                s.windows, s.train, s.validation, s.test, s.purged
            );
            println!("wrote {}", cfg.prepared_path().display());
        }
        Command::Train { common, model, epochs } => {
            let mut cfg = common.resolve()?;
            if let Some(e) = epochs {
                cfg.train.max_epochs = e;
            }
            let h = cmd_train(&cfg, model)?;
            println!(
                "{} epochs, best epoch {} with validation loss {:.6e} ({:?})",
                h.epochs(),
                h.best_epoch + 1,
                h.best_val_loss,
                h.stop_reason
            );
            println!("wrote {}", checkpoint_path(&cfg, model).display());
        }
        Command::Evaluate { common, model } => {
            let cfg = common.resolve()?;
            print_report(&cmd_evaluate(&cfg, model)?.report);
        }
        Command::Backtest { common, model } => {
            let cfg = common.resolve()?;
            let bt = cmd_backtest(&cfg, model)?;
            let count = |p| bt.trades.iter().filter(|t| t.position == p).count();
            use crate::evaluation::Position::*;
            println!("long {}  short {}  flat {}", count(Long), count(Short), count(Flat));
            print_report(&bt.report);
        }
        Command::Compare { common, epochs } => {
            let mut cfg = common.resolve()?;
            if let Some(e) = epochs {
                cfg.train.max_epochs = e;
            }
            let c = cmd_compare(&cfg)?;
            print!("{}", c.tables);
            println!("wrote {}", cfg.out.join("compare.json").display());
        }
    }
    Ok(())
}
