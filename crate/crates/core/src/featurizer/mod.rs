//! Window statistics and the feature-reduction cascade.

mod catalog;
mod reduce;

pub use catalog::{
    default_catalog, extract_features, FeatureCatalog, FeatureDef, StatFn, CATALOG_VERSION,
};
pub use reduce::{
    reduce_features, CorrelatedDrop, ReductionConfig, ReductionReport, SelectedFeature,
    SimilarityDrop, SimilarityReason,
};

pub(crate) use catalog::{quantile_sorted, variance};

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::FeatureError;

/// One row per window split, one named column per feature; `None` is missing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl FeatureMatrix {
    pub fn new(columns: Vec<String>, rows: Vec<Vec<Option<f64>>>) -> Result<Self, FeatureError> {
        let unique: std::collections::HashSet<_> = columns.iter().collect();
        if unique.len() != columns.len() || rows.iter().any(|r| r.len() != columns.len()) {
            return Err(FeatureError::Shape);
        }
        Ok(FeatureMatrix { columns, rows })
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, j: usize) -> Vec<Option<f64>> {
        self.rows.iter().map(|r| r[j]).collect()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Keeps the named columns, in the given order.
    pub fn select(&self, names: &[String]) -> Result<FeatureMatrix, FeatureError> {
        let idx: Vec<usize> = names
            .iter()
            .map(|n| self.column_index(n).ok_or(FeatureError::Shape))
            .collect::<Result<_, _>>()?;
        Ok(FeatureMatrix {
            columns: names.to_vec(),
            rows: self
                .rows
                .iter()
                .map(|r| idx.iter().map(|&j| r[j]).collect())
                .collect(),
        })
    }

    /// CSV with an empty cell for missing values.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|v| v.map(|x| x.to_string()).unwrap_or_default()))?;
        }
        w.flush()?;
        Ok(())
    }
}
