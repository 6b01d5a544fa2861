//! Library side of the `rulecast` binary, exposed so integration tests can
//! drive commands without spawning a process.

pub mod commands;
pub mod config;
pub mod error;

pub use commands::{
    cmd_backtest, cmd_explain, cmd_generate, cmd_predict, cmd_simulate_stream, cmd_train, StreamEvent, StreamSummary,
    TrainSummary, MODEL_DIR, RUN_CONFIG_FILE,
};
pub use config::{Overrides, RunConfig, CONFIG_HELP};
pub use error::CliError;
