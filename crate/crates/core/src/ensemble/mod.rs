//! Ensemble lifecycle: training table, rule model, weighted combination and
//! drift-triggered retraining.

mod combine;
mod model;
mod online;
mod table;

pub use combine::{combine, restrict_top_k, CombinedForecast};
pub use model::{EnsembleConfig, EnsembleModel, LabelCount, TrainOutput, MODEL_FORMAT};
pub use online::{OnlineConfig, OnlineEnsemble, RetrainEvent, RetrainOutcome, StepResult};
pub use table::{
    apply_discard_rule, build_training_table, label_best_model, modal_category, score_pool,
    CovariateColumn, CovariateEncoder, DiscardOutcome, Metric, TableOptions, TrainingRow,
    TrainingTable,
};

use std::io::Write;

/// Forecast CSV: `timestamp,forecast,weight_<id>...`, one row per step.
pub fn write_forecast_csv<W: Write>(
    timestamps: &[chrono::NaiveDateTime],
    forecast: &CombinedForecast,
    writer: W,
) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["timestamp".to_string(), "forecast".to_string()];
    header.extend(forecast.probabilities.ids.iter().map(|id| format!("weight_{id}")));
    w.write_record(&header)?;
    for (t, v) in timestamps.iter().zip(&forecast.values) {
        let mut rec = vec![crate::data::fmt_timestamp(t), v.to_string()];
        rec.extend(forecast.probabilities.values.iter().map(|p| p.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
