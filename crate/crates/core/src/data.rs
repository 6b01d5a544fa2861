//! Time-series data model: ingestion, standardization, date covariates and
//! sliding-window split planning.

use std::collections::HashSet;
use std::io::{Read, Write};
use std::ops::Range;
use std::path::Path;

use chrono::{DateTime, Datelike, NaiveDate, NaiveDateTime, TimeDelta, Timelike};
use serde::{Deserialize, Serialize};

use crate::error::DataError;

/// Category used for empty categorical cells.
pub const MISSING_CATEGORY: &str = "__missing__";

/// How a covariate column collapses over a training window.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    /// Sum of the window's values (numeric columns).
    Sum,
    /// Most common category, ties broken lexicographically (categorical columns).
    Mode,
    /// Value at the last training point (date parts).
    LastValue,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CovariateValues {
    Numeric(Vec<f64>),
    Categorical(Vec<String>),
}

impl CovariateValues {
    pub fn len(&self) -> usize {
        match self {
            CovariateValues::Numeric(v) => v.len(),
            CovariateValues::Categorical(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn slice(&self, range: Range<usize>) -> CovariateValues {
        match self {
            CovariateValues::Numeric(v) => CovariateValues::Numeric(v[range].to_vec()),
            CovariateValues::Categorical(v) => CovariateValues::Categorical(v[range].to_vec()),
        }
    }

    fn same_kind(&self, other: &CovariateValues) -> bool {
        matches!(
            (self, other),
            (CovariateValues::Numeric(_), CovariateValues::Numeric(_))
                | (CovariateValues::Categorical(_), CovariateValues::Categorical(_))
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Covariate {
    pub name: String,
    pub values: CovariateValues,
    pub aggregation: Aggregation,
}

impl Covariate {
    pub fn numeric(name: impl Into<String>, values: Vec<f64>) -> Self {
        Covariate {
            name: name.into(),
            values: CovariateValues::Numeric(values),
            aggregation: Aggregation::Sum,
        }
    }

    pub fn categorical(name: impl Into<String>, values: Vec<String>) -> Self {
        Covariate {
            name: name.into(),
            values: CovariateValues::Categorical(values),
            aggregation: Aggregation::Mode,
        }
    }
}

/// A regularly sampled univariate target with aligned covariate columns.
///
/// Construction validates every invariant, so a `TimeSeries` value is always
/// non-empty, strictly increasing with a constant step, and rectangular.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeSeries {
    timestamps: Vec<NaiveDateTime>,
    target: Vec<f64>,
    covariates: Vec<Covariate>,
    step: Option<TimeDelta>,
}

impl TimeSeries {
    pub fn new(
        timestamps: Vec<NaiveDateTime>,
        target: Vec<f64>,
        covariates: Vec<Covariate>,
    ) -> Result<Self, DataError> {
        if timestamps.is_empty() {
            return Err(DataError::Invalid("series is empty".into()));
        }
        if target.len() != timestamps.len() {
            return Err(DataError::Invalid(format!(
                "{} timestamps but {} target values",
                timestamps.len(),
                target.len()
            )));
        }
        if let Some(i) = target.iter().position(|v| !v.is_finite()) {
            return Err(DataError::Invalid(format!(
                "target value at index {i} is not finite"
            )));
        }
        let mut names = HashSet::new();
        for cov in &covariates {
            if !names.insert(cov.name.as_str()) {
                return Err(DataError::NameCollision(cov.name.clone()));
            }
            if cov.values.len() != timestamps.len() {
                return Err(DataError::Invalid(format!(
                    "covariate {:?} has {} values, expected {}",
                    cov.name,
                    cov.values.len(),
                    timestamps.len()
                )));
            }
            match &cov.values {
                CovariateValues::Numeric(v) => {
                    if let Some(i) = v.iter().position(|x| !x.is_finite()) {
                        return Err(DataError::Invalid(format!(
                            "covariate {:?} is not finite at index {i}",
                            cov.name
                        )));
                    }
                }
                CovariateValues::Categorical(v) => {
                    if let Some(i) = v.iter().position(|x| x.is_empty()) {
                        return Err(DataError::Invalid(format!(
                            "covariate {:?} has an empty category at index {i}",
                            cov.name
                        )));
                    }
                }
            }
        }
        let step = check_regular(&timestamps)?;
        Ok(TimeSeries {
            timestamps,
            target,
            covariates,
            step,
        })
    }

    /// Builds a covariate-free daily series starting at `start`.
    pub fn daily(start: NaiveDate, target: Vec<f64>) -> Result<Self, DataError> {
        let t0 = start.and_hms_opt(0, 0, 0).expect("midnight is valid");
        let timestamps = (0..target.len())
            .map(|i| t0 + TimeDelta::days(i as i64))
            .collect();
        TimeSeries::new(timestamps, target, Vec::new())
    }

    pub fn len(&self) -> usize {
        self.target.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn timestamps(&self) -> &[NaiveDateTime] {
        &self.timestamps
    }

    pub fn target(&self) -> &[f64] {
        &self.target
    }

    pub fn covariates(&self) -> &[Covariate] {
        &self.covariates
    }

    pub fn covariate(&self, name: &str) -> Option<&Covariate> {
        self.covariates.iter().find(|c| c.name == name)
    }

    /// The sampling interval; `None` for single-point series.
    pub fn step(&self) -> Option<TimeDelta> {
        self.step
    }

    pub fn first_timestamp(&self) -> NaiveDateTime {
        self.timestamps[0]
    }

    pub fn last_timestamp(&self) -> NaiveDateTime {
        *self.timestamps.last().expect("non-empty")
    }

    /// Timestamp `h` steps after the last observation.
    pub fn timestamp_after(&self, h: usize) -> Option<NaiveDateTime> {
        self.step.map(|s| self.last_timestamp() + s * h as i32)
    }

    pub fn slice(&self, range: Range<usize>) -> Result<TimeSeries, DataError> {
        if range.start >= range.end || range.end > self.len() {
            return Err(DataError::Invalid(format!(
                "slice {range:?} outside series of length {}",
                self.len()
            )));
        }
        Ok(TimeSeries {
            timestamps: self.timestamps[range.clone()].to_vec(),
            target: self.target[range.clone()].to_vec(),
            covariates: self
                .covariates
                .iter()
                .map(|c| Covariate {
                    name: c.name.clone(),
                    values: c.values.slice(range.clone()),
                    aggregation: c.aggregation,
                })
                .collect(),
            step: if range.len() > 1 { self.step } else { None },
        })
    }

    /// The most recent `k` points (the whole series when `k >= len`).
    pub fn tail(&self, k: usize) -> TimeSeries {
        let start = self.len().saturating_sub(k.max(1));
        self.slice(start..self.len()).expect("valid tail range")
    }

    /// Appends `other`, which must continue this series at the same step with
    /// the same covariate layout.
    pub fn extend(&mut self, other: &TimeSeries) -> Result<(), DataError> {
        if other.covariates.len() != self.covariates.len()
            || other
                .covariates
                .iter()
                .zip(&self.covariates)
                .any(|(a, b)| a.name != b.name || !a.values.same_kind(&b.values))
        {
            return Err(DataError::Invalid(
                "appended points have a different covariate layout".into(),
            ));
        }
        let step = match (self.step, other.step) {
            (Some(s), _) => s,
            (None, Some(s)) => s,
            (None, None) => other.first_timestamp() - self.last_timestamp(),
        };
        if step <= TimeDelta::zero() {
            return Err(DataError::DuplicateTimestamp(fmt_timestamp(
                &other.first_timestamp(),
            )));
        }
        let expected = self.last_timestamp() + step;
        if other.first_timestamp() != expected || other.step.is_some_and(|s| s != step) {
            return Err(DataError::IrregularStep {
                from: fmt_timestamp(&self.last_timestamp()),
                to: fmt_timestamp(&other.first_timestamp()),
                expected: step.num_seconds(),
                found: (other.first_timestamp() - self.last_timestamp()).num_seconds(),
            });
        }
        self.timestamps.extend_from_slice(&other.timestamps);
        self.target.extend_from_slice(&other.target);
        for (mine, theirs) in self.covariates.iter_mut().zip(&other.covariates) {
            match (&mut mine.values, &theirs.values) {
                (CovariateValues::Numeric(a), CovariateValues::Numeric(b)) => {
                    a.extend_from_slice(b)
                }
                (CovariateValues::Categorical(a), CovariateValues::Categorical(b)) => {
                    a.extend_from_slice(b)
                }
                _ => unreachable!("kinds checked above"),
            }
        }
        self.step = Some(step);
        Ok(())
    }

    /// Same timestamps and covariates with a replacement target.
    pub fn with_target(&self, target: Vec<f64>) -> Result<TimeSeries, DataError> {
        TimeSeries::new(self.timestamps.clone(), target, self.covariates.clone())
    }

    fn push_covariate(&mut self, covariate: Covariate) -> Result<(), DataError> {
        if self.covariate(&covariate.name).is_some() {
            return Err(DataError::NameCollision(covariate.name));
        }
        self.covariates.push(covariate);
        Ok(())
    }
}

fn check_regular(timestamps: &[NaiveDateTime]) -> Result<Option<TimeDelta>, DataError> {
    if timestamps.len() < 2 {
        return Ok(None);
    }
    let step = timestamps[1] - timestamps[0];
    for w in timestamps.windows(2) {
        let delta = w[1] - w[0];
        if delta <= TimeDelta::zero() {
            return Err(DataError::DuplicateTimestamp(fmt_timestamp(&w[1])));
        }
        if delta != step {
            return Err(DataError::IrregularStep {
                from: fmt_timestamp(&w[0]),
                to: fmt_timestamp(&w[1]),
                expected: step.num_seconds(),
                found: delta.num_seconds(),
            });
        }
    }
    Ok(Some(step))
}

pub fn fmt_timestamp(t: &NaiveDateTime) -> String {
    if t.time() == chrono::NaiveTime::MIN {
        t.format("%Y-%m-%d").to_string()
    } else if t.nanosecond() == 0 {
        t.format("%Y-%m-%dT%H:%M:%S").to_string()
    } else {
        t.format("%Y-%m-%dT%H:%M:%S%.f").to_string()
    }
}

/// Serde adapter writing timestamps in the same compact form as the CSV output.
pub mod timestamp_serde {
    use chrono::NaiveDateTime;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(t: &NaiveDateTime, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::fmt_timestamp(t))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<NaiveDateTime, D::Error> {
        let raw = String::deserialize(d)?;
        super::parse_timestamp(&raw).ok_or_else(|| D::Error::custom(format!("bad timestamp {raw:?}")))
    }
}

/// Parses `YYYY-MM-DD`, a naive ISO-8601 date-time, or an RFC 3339 timestamp
/// (converted to UTC).
pub fn parse_timestamp(s: &str) -> Option<NaiveDateTime> {
    let s = s.trim();
    if let Ok(d) = NaiveDate::parse_from_str(s, "%Y-%m-%d") {
        return d.and_hms_opt(0, 0, 0);
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f", "%Y-%m-%dT%H:%M"] {
        if let Ok(t) = NaiveDateTime::parse_from_str(s, fmt) {
            return Some(t);
        }
    }
    DateTime::parse_from_rfc3339(s).ok().map(|t| t.naive_utc())
}

/// Column roles for CSV ingestion.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CsvSchema {
    pub date_column: String,
    pub target_column: String,
    #[serde(default)]
    pub numeric: Vec<String>,
    #[serde(default)]
    pub categorical: Vec<String>,
    /// Expected sampling interval such as `1d`, `6h`, `15m`, `30s` or `1w`.
    /// When absent the interval is inferred from the first two rows.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<String>,
}

/// Parses `<count><unit>` with unit one of `s`, `m`, `h`, `d`, `w`.
pub fn parse_step(s: &str) -> Option<TimeDelta> {
    let s = s.trim();
    let unit = s.chars().last()?;
    let count: i64 = s[..s.len() - unit.len_utf8()].trim().parse().ok()?;
    if count <= 0 {
        return None;
    }
    match unit {
        's' => Some(TimeDelta::seconds(count)),
        'm' => Some(TimeDelta::minutes(count)),
        'h' => Some(TimeDelta::hours(count)),
        'd' => Some(TimeDelta::days(count)),
        'w' => Some(TimeDelta::weeks(count)),
        _ => None,
    }
}

impl CsvSchema {
    pub fn new(date_column: impl Into<String>, target_column: impl Into<String>) -> Self {
        CsvSchema {
            date_column: date_column.into(),
            target_column: target_column.into(),
            numeric: Vec::new(),
            categorical: Vec::new(),
            step: None,
        }
    }

    pub fn with_step(mut self, step: impl Into<String>) -> Self {
        self.step = Some(step.into());
        self
    }
}

enum Role {
    Date,
    Target,
    Numeric(usize),
    Categorical(usize),
}

pub fn ingest_csv(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<TimeSeries, DataError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| DataError::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_csv(file, schema)
}

/// Reads a header-first UTF-8 CSV. Every column must have a role in `schema`.
pub fn read_csv<R: Read>(reader: R, schema: &CsvSchema) -> Result<TimeSeries, DataError> {
    let expected_step = match &schema.step {
        Some(s) => Some(
            parse_step(s).ok_or_else(|| DataError::Schema(format!("bad step {s:?}")))?,
        ),
        None => None,
    };
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers()?.clone();

    let mut declared = HashSet::new();
    for name in [&schema.date_column, &schema.target_column]
        .into_iter()
        .chain(&schema.numeric)
        .chain(&schema.categorical)
    {
        if !declared.insert(name.as_str()) {
            return Err(DataError::Schema(format!("column {name:?} declared twice")));
        }
        if !headers.iter().any(|h| h == name) {
            return Err(DataError::Schema(format!("column {name:?} not in header")));
        }
    }
    let mut roles = Vec::with_capacity(headers.len());
    for h in headers.iter() {
        let role = if h == schema.date_column {
            Role::Date
        } else if h == schema.target_column {
            Role::Target
        } else if let Some(i) = schema.numeric.iter().position(|c| c == h) {
            Role::Numeric(i)
        } else if let Some(i) = schema.categorical.iter().position(|c| c == h) {
            Role::Categorical(i)
        } else {
            return Err(DataError::Schema(format!("column {h:?} has no declared role")));
        };
        roles.push(role);
    }

    struct Row {
        ts: NaiveDateTime,
        target: f64,
        numeric: Vec<f64>,
        categorical: Vec<String>,
    }
    let mut rows = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let row_no = i + 2;
        let mut row = Row {
            ts: NaiveDateTime::MIN,
            target: f64::NAN,
            numeric: vec![0.0; schema.numeric.len()],
            categorical: vec![String::new(); schema.categorical.len()],
        };
        for (field, role) in record.iter().zip(&roles) {
            match role {
                Role::Date => {
                    row.ts = parse_timestamp(field).ok_or_else(|| DataError::BadDate {
                        row: row_no,
                        value: field.to_string(),
                    })?;
                }
                Role::Target => {
                    if field.trim().is_empty() {
                        return Err(DataError::MissingTarget { row: row_no });
                    }
                    row.target = parse_number(field, row_no, &schema.target_column)?;
                }
                Role::Numeric(j) => {
                    row.numeric[*j] = parse_number(field, row_no, &schema.numeric[*j])?;
                }
                Role::Categorical(j) => {
                    let v = field.trim();
                    row.categorical[*j] = if v.is_empty() {
                        MISSING_CATEGORY.to_string()
                    } else {
                        v.to_string()
                    };
                }
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(DataError::Invalid("file has no data rows".into()));
    }
    rows.sort_by_key(|r| r.ts);
    if let Some(step) = expected_step {
        for w in rows.windows(2) {
            let delta = w[1].ts - w[0].ts;
            if delta == TimeDelta::zero() {
                return Err(DataError::DuplicateTimestamp(fmt_timestamp(&w[1].ts)));
            }
            if delta != step {
                return Err(DataError::IrregularStep {
                    from: fmt_timestamp(&w[0].ts),
                    to: fmt_timestamp(&w[1].ts),
                    expected: step.num_seconds(),
                    found: delta.num_seconds(),
                });
            }
        }
    }

    let mut covariates: Vec<Covariate> = schema
        .numeric
        .iter()
        .enumerate()
        .map(|(j, name)| Covariate::numeric(name, rows.iter().map(|r| r.numeric[j]).collect()))
        .collect();
    covariates.extend(schema.categorical.iter().enumerate().map(|(j, name)| {
        Covariate::categorical(name, rows.iter().map(|r| r.categorical[j].clone()).collect())
    }));
    TimeSeries::new(
        rows.iter().map(|r| r.ts).collect(),
        rows.iter().map(|r| r.target).collect(),
        covariates,
    )
}

fn parse_number(field: &str, row: usize, column: &str) -> Result<f64, DataError> {
    field
        .trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| DataError::BadNumber {
            row,
            column: column.to_string(),
            value: field.to_string(),
        })
}

/// Writes the series in the layout `read_csv` accepts, returning the schema
/// that reads it back.
pub fn write_csv<W: Write>(
    series: &TimeSeries,
    writer: W,
    date_column: &str,
    target_column: &str,
) -> Result<CsvSchema, DataError> {
    let mut wtr = csv::Writer::from_writer(writer);
    let mut schema = CsvSchema::new(date_column, target_column);
    let mut header = vec![date_column.to_string(), target_column.to_string()];
    for c in series.covariates() {
        header.push(c.name.clone());
        match c.values {
            CovariateValues::Numeric(_) => schema.numeric.push(c.name.clone()),
            CovariateValues::Categorical(_) => schema.categorical.push(c.name.clone()),
        }
    }
    wtr.write_record(&header)?;
    for i in 0..series.len() {
        let mut record = vec![
            fmt_timestamp(&series.timestamps[i]),
            series.target[i].to_string(),
        ];
        for c in series.covariates() {
            record.push(match &c.values {
                CovariateValues::Numeric(v) => v[i].to_string(),
                CovariateValues::Categorical(v) => v[i].clone(),
            });
        }
        wtr.write_record(&record)?;
    }
    wtr.flush().map_err(|source| DataError::Io {
        path: "<writer>".into(),
        source,
    })?;
    Ok(schema)
}

/// Z-score parameters (population standard deviation).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StandardizationParams {
    pub mean: f64,
    pub std_dev: f64,
}

impl StandardizationParams {
    pub fn fit(values: &[f64]) -> Result<Self, DataError> {
        if values.is_empty() {
            return Err(DataError::Invalid("cannot standardize an empty sequence".into()));
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let std_dev = var.sqrt();
        if !(std_dev > 0.0) || values.iter().all(|v| *v == values[0]) {
            return Err(DataError::ConstantTarget);
        }
        Ok(StandardizationParams { mean, std_dev })
    }

    pub fn apply(&self, value: f64) -> f64 {
        (value - self.mean) / self.std_dev
    }

    pub fn invert(&self, z: f64) -> f64 {
        z * self.std_dev + self.mean
    }
}

/// Standardizes the target; covariates are left untouched.
pub fn standardize(series: &TimeSeries) -> Result<(TimeSeries, StandardizationParams), DataError> {
    let params = StandardizationParams::fit(series.target())?;
    let target = series.target().iter().map(|v| params.apply(*v)).collect();
    Ok((series.with_target(target)?, params))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatePart {
    Day,
    Month,
    Year,
    /// Monday = 0 through Sunday = 6.
    Weekday,
}

impl DatePart {
    pub fn column_name(self) -> &'static str {
        match self {
            DatePart::Day => "day",
            DatePart::Month => "month",
            DatePart::Year => "year",
            DatePart::Weekday => "weekday",
        }
    }

    fn read(self, t: &NaiveDateTime) -> f64 {
        match self {
            DatePart::Day => t.day() as f64,
            DatePart::Month => t.month() as f64,
            DatePart::Year => t.year() as f64,
            DatePart::Weekday => t.weekday().num_days_from_monday() as f64,
        }
    }
}

/// Appends one last-value-aggregated numeric column per requested part.
pub fn add_date_covariates(
    series: &TimeSeries,
    parts: &[DatePart],
) -> Result<TimeSeries, DataError> {
    if parts.is_empty() {
        return Err(DataError::Invalid("no date parts requested".into()));
    }
    let mut out = series.clone();
    let mut seen = HashSet::new();
    for part in parts {
        if !seen.insert(*part) {
            continue;
        }
        out.push_covariate(Covariate {
            name: part.column_name().to_string(),
            values: CovariateValues::Numeric(
                series.timestamps().iter().map(|t| part.read(t)).collect(),
            ),
            aggregation: Aggregation::LastValue,
        })?;
    }
    Ok(out)
}

/// One training slice and the horizon that immediately follows it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowSplit {
    pub train_start: usize,
    pub train_end: usize,
    pub predict_end: usize,
}

impl WindowSplit {
    pub fn train(&self) -> Range<usize> {
        self.train_start..self.train_end
    }

    pub fn predict(&self) -> Range<usize> {
        self.train_end..self.predict_end
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub n: usize,
    pub m: usize,
    pub stride: usize,
    pub splits: Vec<WindowSplit>,
}

impl SplitPlan {
    /// Largest number of splits a series of `len` points supports.
    pub fn max_splits(len: usize, n: usize, m: usize, stride: usize) -> usize {
        if n + m > len || stride == 0 {
            0
        } else {
            (len - n - m) / stride + 1
        }
    }

    /// Splits over a series of `len` points. Without `requested`, train starts
    /// run 0, stride, 2·stride, …; with it, the `requested` most recent splits
    /// are taken, anchored at the end of the series.
    pub fn new(
        len: usize,
        n: usize,
        m: usize,
        stride: usize,
        requested: Option<usize>,
    ) -> Result<Self, DataError> {
        if n < 2 {
            return Err(DataError::SplitPlan(format!("n = {n}; need n >= 2")));
        }
        if m < 1 {
            return Err(DataError::SplitPlan("m must be at least 1".into()));
        }
        if stride < 1 {
            return Err(DataError::SplitPlan("stride must be at least 1".into()));
        }
        if n + m > len {
            return Err(DataError::SplitPlan(format!(
                "n + m = {} exceeds series length {len}",
                n + m
            )));
        }
        let max = Self::max_splits(len, n, m, stride);
        let make = |start: usize| WindowSplit {
            train_start: start,
            train_end: start + n,
            predict_end: start + n + m,
        };
        let splits = match requested {
            None => (0..max).map(|k| make(k * stride)).collect(),
            Some(0) => {
                return Err(DataError::SplitPlan("requested_splits must be >= 1".into()))
            }
            Some(k) if k > max => {
                return Err(DataError::SplitPlan(format!(
                    "requested {k} splits but at most {max} fit"
                )))
            }
            Some(k) => {
                let last = len - n - m;
                (0..k).rev().map(|i| make(last - i * stride)).collect()
            }
        };
        Ok(SplitPlan {
            n,
            m,
            stride,
            splits,
        })
    }

    pub fn len(&self) -> usize {
        self.splits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.splits.is_empty()
    }
}

pub fn plan_splits(
    series: &TimeSeries,
    n: usize,
    m: usize,
    requested_splits: Option<usize>,
    stride: usize,
) -> Result<SplitPlan, DataError> {
    SplitPlan::new(series.len(), n, m, stride, requested_splits)
}
