//! One function per subcommand. Human-readable progress goes to `out`; files
//! go under the configured output directory.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::TimeDelta;
use serde::Serialize;

use rulecast_core::data::{add_date_covariates, fmt_timestamp, ingest_csv, write_csv};
use rulecast_core::ensemble::{write_forecast_csv, EnsembleModel, OnlineEnsemble, RetrainEvent};
use rulecast_core::evaluation::{run_backtest, BacktestPlan, Contenders, ScoreReport};
use rulecast_core::featurizer::default_catalog;
use rulecast_core::rulefit::{explain, render_explanation, ExplainOrder, ProbabilityVector, RuleSummary};
use rulecast_core::synthetic::{generate, BenchmarkSpec, Segment};
use rulecast_core::{DriftEvent, TimeSeries};

use crate::config::RunConfig;
use crate::error::CliError;

pub const MODEL_DIR: &str = "model";
pub const RUN_CONFIG_FILE: &str = "run_config.json";

/// Runs `f` on a pool of `workers` threads, or rayon's default pool.
pub fn with_workers<T: Send>(
    workers: Option<usize>,
    f: impl FnOnce() -> Result<T, CliError> + Send,
) -> Result<T, CliError> {
    match workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| CliError::Config(format!("workers: {e}")))?
            .install(f),
        None => f(),
    }
}

pub fn load_series(cfg: &RunConfig) -> Result<TimeSeries, CliError> {
    let series = ingest_csv(&cfg.data.path, &cfg.data.schema())?;
    if cfg.data.date_parts.is_empty() {
        Ok(series)
    } else {
        Ok(add_date_covariates(&series, &cfg.data.date_parts)?)
    }
}

fn interval(series: &TimeSeries) -> TimeDelta {
    series.step().unwrap_or(TimeDelta::days(1))
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn create_file(path: &Path) -> Result<fs::File, CliError> {
    fs::File::create(path).map_err(|e| CliError::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn say(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    out.write_all(text.as_bytes()).map_err(|e| CliError::io(Path::new("<stdout>"), e))
}

#[derive(Clone, Debug, Serialize)]
pub struct TrainSummary {
    pub model_dir: PathBuf,
    pub training_rows: usize,
    pub label_histogram: Vec<(String, usize)>,
    pub pool: Vec<String>,
    pub discarded: Vec<String>,
    pub rule_count: usize,
    pub top_rules: Vec<RuleSummary>,
}

/// Trains on the whole series and writes `<output_dir>/model/`, the
/// training table and a summary.
pub fn cmd_train(cfg: &RunConfig, out: &mut dyn Write) -> Result<TrainSummary, CliError> {
    cfg.validate()?;
    let series = load_series(cfg)?;
    let trained = with_workers(cfg.workers, || Ok(EnsembleModel::train(&series, &cfg.ensemble_config())?))?;
    let model = trained.model;

    create_dir(&cfg.output_dir)?;
    let model_dir = cfg.output_dir.join(MODEL_DIR);
    model.save(&model_dir)?;
    write_json(&model_dir.join(RUN_CONFIG_FILE), cfg)?;
    trained
        .table
        .write_csv(create_file(&cfg.output_dir.join("training_table.csv"))?)?;

    let summary = TrainSummary {
        model_dir,
        training_rows: model.training_rows,
        label_histogram: trained.table.label_histogram(),
        pool: model.pool_ids(),
        discarded: model.discarded.clone(),
        rule_count: model.rules.rules.len(),
        top_rules: explain(&model.rules, 5, ExplainOrder::Coefficient),
    };
    write_json(&cfg.output_dir.join("train_summary.json"), &summary)?;

    let mut text = format!("trained on {} windows\nlabel histogram:\n", summary.training_rows);
    for (id, count) in &summary.label_histogram {
        text.push_str(&format!("  {id:<20} {count}\n"));
    }
    text.push_str(&format!(
        "discarded: {}\n",
        if summary.discarded.is_empty() { "none".to_string() } else { summary.discarded.join(", ") }
    ));
    text.push_str(&format!("rules: {}", summary.rule_count));
    if model.rules.intercept_only {
        text.push_str(" (intercept-only model: weights are the training label rates)");
    }
    text.push_str("\ntop 5 rules:\n");
    text.push_str(&render_explanation(&summary.top_rules));
    text.push_str(&format!("model written to {}\n", summary.model_dir.display()));
    say(out, &text)?;
    Ok(summary)
}

/// Reads the run configuration saved next to a model.
pub fn model_run_config(model_dir: &Path) -> Result<RunConfig, CliError> {
    let path = model_dir.join(RUN_CONFIG_FILE);
    let text = fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn load_model(model_dir: &Path) -> Result<EnsembleModel, CliError> {
    let model = EnsembleModel::load(model_dir)?;
    let catalog = default_catalog();
    if model.catalog_version != catalog.version {
        return Err(CliError::Core(
            rulecast_core::error::EnsembleError::Incompatible(format!(
                "model uses feature catalog {:?} but this build provides {:?}; retrain with `rulecast train` to upgrade",
                model.catalog_version, catalog.version
            ))
            .into(),
        ));
    }
    Ok(model)
}

/// Forecasts `horizon` steps past the end of the data file. Writes CSV to
/// `dest`, or to `out` when no destination is given.
pub fn cmd_predict(
    model_dir: &Path,
    data: Option<&Path>,
    horizon: usize,
    dest: Option<&Path>,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    if horizon == 0 {
        return Err(CliError::Config("horizon must be >= 1".into()));
    }
    let mut cfg = model_run_config(model_dir)?;
    if let Some(p) = data {
        cfg.data.path = p.to_path_buf();
    }
    let model = load_model(model_dir)?;
    let series = load_series(&cfg)?;
    let forecast = model.predict_next(&series, horizon)?;
    let timestamps: Vec<_> = (1..=horizon)
        .map(|h| series.timestamp_after(h).expect("series has a step"))
        .collect();
    match dest {
        Some(path) => write_forecast_csv(&timestamps, &forecast, create_file(path)?)?,
        None => write_forecast_csv(&timestamps, &forecast, out)?,
    }
    Ok(())
}

pub fn cmd_explain(model_dir: &Path, top_k: usize, order: ExplainOrder, json: bool, out: &mut dyn Write) -> Result<(), CliError> {
    let model = load_model(model_dir)?;
    let summaries = explain(&model.rules, top_k, order);
    if json {
        say(out, &(serde_json::to_string_pretty(&summaries)? + "\n"))
    } else if summaries.is_empty() {
        say(out, "no rules retained; weights are the training label rates\n")
    } else {
        say(out, &render_explanation(&summaries))
    }
}

/// Weight per pool id, zero for ids the vector does not carry.
fn weights_for(ids: &[String], p: &ProbabilityVector) -> Vec<f64> {
    ids.iter().map(|id| p.get(id).unwrap_or(0.0)).collect()
}

/// Blocked backtest of the ensemble against every pool member.
pub fn cmd_backtest(cfg: &RunConfig, out: &mut dyn Write) -> Result<ScoreReport, CliError> {
    cfg.validate()?;
    let series = load_series(cfg)?;
    let plan = BacktestPlan::new(series.len(), cfg.backtest.train_fraction, cfg.backtest.step)
        .map_err(rulecast_core::Error::from)?;
    let contenders = Contenders {
        ensemble: Some((cfg.ensemble_config(), cfg.online_config(interval(&series)))),
        singles: cfg.pool(),
    };
    let report = with_workers(cfg.workers, || Ok(run_backtest(&series, &plan, &contenders)?))?;

    create_dir(&cfg.output_dir)?;
    write_json(&cfg.output_dir.join("backtest_report.json"), &report)?;
    report.write_csv(&series, create_file(&cfg.output_dir.join("backtest_scores.csv"))?)?;

    let ids: Vec<String> = cfg.pool().iter().map(|p| p.id.clone()).collect();
    let mut w = csv::Writer::from_writer(create_file(&cfg.output_dir.join("ensemble_weights.csv"))?);
    let mut header = vec!["fold".to_string(), "forecast_start".to_string()];
    header.extend(ids.iter().map(|id| format!("weight_{id}")));
    w.write_record(&header)?;
    for fw in &report.ensemble_weights {
        let mut rec = vec![fw.fold.to_string(), fmt_timestamp(&fw.forecast_start)];
        rec.extend(weights_for(&ids, &fw.weights).iter().map(f64::to_string));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| CliError::io(&cfg.output_dir, e))?;

    let mut text = format!(
        "{} points, first fold trains on {}, {} folds of {}\n{:<20} {:>10} {:>8}\n",
        report.points,
        report.initial_train,
        report.folds.len(),
        report.step,
        "model",
        "mean MAPE",
        "invalid"
    );
    for m in &report.models {
        let score = m.mean_mape.map_or("n/a".to_string(), |v| format!("{v:.3}"));
        text.push_str(&format!("{:<20} {:>10} {:>8}\n", m.model, score, m.invalid_folds.len()));
    }
    let ok = report.retrains.iter().filter(|r| r.succeeded()).count();
    text.push_str(&format!(
        "drift events: {}, retrains: {} ({} succeeded)\n",
        report.drift_events.len(),
        report.retrains.len(),
        ok
    ));
    say(out, &text)?;
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum StreamEvent {
    Drift(DriftEvent),
    Retrain(RetrainEvent),
}

#[derive(Clone, Debug, Serialize)]
pub struct StreamSummary {
    pub initial_train: usize,
    pub points_streamed: usize,
    pub drift_events: usize,
    pub retrains: Vec<RetrainEvent>,
}

/// Trains on the first `backtest.train_fraction` of the data, then replays
/// the rest one point at a time. Each row of `rolling_forecast.csv` holds the
/// one-step forecast made before the point arrived and the weights behind it.
pub fn cmd_simulate_stream(cfg: &RunConfig, out: &mut dyn Write) -> Result<StreamSummary, CliError> {
    cfg.validate()?;
    let series = load_series(cfg)?;
    let initial = (cfg.backtest.train_fraction * series.len() as f64).floor() as usize;
    if initial >= series.len() {
        return Err(CliError::Config("nothing left to stream after the training region".into()));
    }
    let history = series.slice(0..initial)?;
    let model = with_workers(cfg.workers, || Ok(EnsembleModel::train(&history, &cfg.ensemble_config())?))?.model;
    let mut online = OnlineEnsemble::new(model, history, &cfg.online_config(interval(&series)))?;

    create_dir(&cfg.output_dir)?;
    let ids: Vec<String> = cfg.pool().iter().map(|p| p.id.clone()).collect();
    let mut rolling = csv::Writer::from_writer(create_file(&cfg.output_dir.join("rolling_forecast.csv"))?);
    let mut header: Vec<String> = ["timestamp", "actual", "forecast", "drift", "retrain"]
        .into_iter()
        .map(String::from)
        .collect();
    header.extend(ids.iter().map(|id| format!("weight_{id}")));
    rolling.write_record(&header)?;
    let events_path = cfg.output_dir.join("stream_events.jsonl");
    let mut events = std::io::BufWriter::new(create_file(&events_path)?);

    let mut forecast = online.forecast(1)?;
    let mut drift_count = 0;
    for i in initial..series.len() {
        let point = series.slice(i..i + 1)?;
        let step = with_workers(cfg.workers, || Ok(online.step(&point, 1)?))?;
        let retrain = match &step.retrain {
            None => "",
            Some(r) if r.succeeded() => "succeeded",
            Some(_) => "failed",
        };
        let mut rec = vec![
            fmt_timestamp(&series.timestamps()[i]),
            series.target()[i].to_string(),
            forecast.values[0].to_string(),
            u8::from(!step.drift_events.is_empty()).to_string(),
            retrain.to_string(),
        ];
        rec.extend(weights_for(&ids, &forecast.probabilities).iter().map(f64::to_string));
        rolling.write_record(&rec)?;

        drift_count += step.drift_events.len();
        let lines = step
            .drift_events
            .iter()
            .cloned()
            .map(StreamEvent::Drift)
            .chain(step.retrain.clone().map(StreamEvent::Retrain));
        for e in lines {
            serde_json::to_writer(&mut events, &e)?;
            events.write_all(b"\n").map_err(|e| CliError::io(&events_path, e))?;
        }
        forecast = step.forecast;
    }
    rolling.flush().map_err(|e| CliError::io(&cfg.output_dir, e))?;
    events.flush().map_err(|e| CliError::io(&events_path, e))?;

    let summary = StreamSummary {
        initial_train: initial,
        points_streamed: series.len() - initial,
        drift_events: drift_count,
        retrains: online.retrains().to_vec(),
    };
    write_json(&cfg.output_dir.join("stream_summary.json"), &summary)?;
    let mut text = format!(
        "streamed {} points after training on {}: {} drift events, {} retrains\n",
        summary.points_streamed,
        initial,
        summary.drift_events,
        summary.retrains.len()
    );
    for r in &summary.retrains {
        let status = if r.succeeded() { "ok" } else { "failed, previous model kept" };
        text.push_str(&format!("  retrain at {} ({status})\n", fmt_timestamp(&r.timestamp)));
    }
    say(out, &text)?;
    Ok(summary)
}

/// Writes the regime-switching benchmark as CSV (`date,value,regime_hint`)
/// and, optionally, its segment boundaries as JSON.
pub fn cmd_generate(spec: &BenchmarkSpec, dest: &Path, segments: Option<&Path>) -> Result<Vec<Segment>, CliError> {
    let bench = generate(spec)?;
    if let Some(dir) = dest.parent().filter(|d| !d.as_os_str().is_empty()) {
        create_dir(dir)?;
    }
    write_csv(&bench.series, create_file(dest)?, "date", "value")?;
    if let Some(path) = segments {
        write_json(path, &bench.segments)?;
    }
    Ok(bench.segments)
}
