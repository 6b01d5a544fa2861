use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rulecast_cli::{
    cmd_backtest, cmd_explain, cmd_generate, cmd_predict, cmd_simulate_stream, cmd_train, CliError, Overrides,
    RunConfig, CONFIG_HELP,
};
use rulecast_core::rulefit::ExplainOrder;
use rulecast_core::synthetic::BenchmarkSpec;

/// Interpretable rule-weighted ensemble forecasting.
#[derive(Parser)]
#[command(name = "rulecast", version, after_long_help = CONFIG_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Run configuration (JSON). See `rulecast help train` for keys and defaults.
    #[arg(short, long)]
    config: PathBuf,
    /// Replaces data.path.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Replaces output_dir.
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Replaces seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Replaces workers.
    #[arg(long)]
    workers: Option<usize>,
}

impl RunArgs {
    fn load(&self) -> Result<RunConfig, CliError> {
        let mut cfg = RunConfig::from_file(&self.config)?;
        cfg.apply(&Overrides {
            data: self.data.clone(),
            output_dir: self.output_dir.clone(),
            seed: self.seed,
            workers: self.workers,
        });
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Build the training table, fit the rule model and save it under <output_dir>/model.
    #[command(after_long_help = CONFIG_HELP)]
    Train(RunArgs),
    /// Forecast past the end of a data file with a saved model.
    Predict {
        /// Model directory written by `train`.
        #[arg(long)]
        model: PathBuf,
        /// Data file; defaults to the one the model was trained on.
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long, default_value_t = 7)]
        horizon: usize,
        /// Output CSV; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Blocked backtest of the ensemble against each single predictor.
    #[command(after_long_help = CONFIG_HELP)]
    Backtest(RunArgs),
    /// Print the most influential rules of a saved model.
    Explain {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 10)]
        top_k: usize,
        /// `support` or `coefficient`.
        #[arg(long, default_value = "coefficient")]
        order: ExplainOrder,
        /// Emit JSON instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Replay the data after the training region point by point, with drift-triggered retraining.
    #[command(after_long_help = CONFIG_HELP)]
    SimulateStream(RunArgs),
    /// Write the seeded regime-switching benchmark as CSV.
    Generate {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Points per regime segment.
        #[arg(long, default_value_t = 100)]
        segment_len: usize,
        /// Passes through the three regimes.
        #[arg(long, default_value_t = 3)]
        cycles: usize,
        /// Also write segment boundaries as JSON.
        #[arg(long)]
        segments: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::Train(args) => cmd_train(&args.load()?, &mut out).map(|_| ()),
        Command::Predict { model, data, horizon, out: dest } => {
            cmd_predict(&model, data.as_deref(), horizon, dest.as_deref(), &mut out)
        }
        Command::Backtest(args) => cmd_backtest(&args.load()?, &mut out).map(|_| ()),
        Command::Explain { model, top_k, order, json } => cmd_explain(&model, top_k, order, json, &mut out),
        Command::SimulateStream(args) => cmd_simulate_stream(&args.load()?, &mut out).map(|_| ()),
        Command::Generate { out: dest, seed, segment_len, cycles, segments } => {
            let spec = BenchmarkSpec { seed, segment_len, cycles, ..BenchmarkSpec::default() };
            let segs = cmd_generate(&spec, &dest, segments.as_deref())?;
            writeln!(out, "wrote {} segments to {}", segs.len(), dest.display())
                .map_err(|e| CliError::io(&dest, e))
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
