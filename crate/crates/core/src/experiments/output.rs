//! One row per parameter point, as CSV or JSON.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::estimate::EstimateCI;

pub const CSV_HEADER: &str =
    "experiment,n,param_name,param_value,trials,successes,ambiguous,estimate,ci_low,ci_high,seed,wall_seconds";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub experiment: String,
    pub n: usize,
    pub param_name: String,
    pub param_value: f64,
    pub trials: u64,
    /// Empty for means.
    pub successes: Option<u64>,
    pub ambiguous: u64,
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub seed: u64,
    pub wall_seconds: f64,
}

impl ResultRow {
    pub fn from_estimate(
        experiment: &str,
        n: usize,
        param_name: &str,
        param_value: f64,
        estimate: &EstimateCI,
        seed: u64,
        wall_seconds: f64,
    ) -> Self {
        ResultRow {
            experiment: experiment.to_string(),
            n,
            param_name: param_name.to_string(),
            param_value,
            trials: estimate.trials,
            successes: estimate.successes,
            ambiguous: estimate.ambiguous_count,
            estimate: estimate.estimate,
            ci_low: estimate.ci_low,
            ci_high: estimate.ci_high,
            seed,
            wall_seconds,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

pub fn write_csv<W: Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    writer.write_record(CSV_HEADER.split(','))?;
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<ResultRow>> {
    let mut reader = csv::Reader::from_reader(input);
    let mut rows = Vec::new();
    for row in reader.deserialize() {
        rows.push(row?);
    }
    Ok(rows)
}

pub fn write_json<W: Write>(rows: &[ResultRow], mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, rows)?;
    writeln!(out)?;
    Ok(())
}

pub fn read_json<R: Read>(input: R) -> Result<Vec<ResultRow>> {
    Ok(serde_json::from_reader(input)?)
}

pub fn write_rows<W: Write>(rows: &[ResultRow], format: Format, out: W) -> Result<()> {
    match format {
        Format::Csv => write_csv(rows, out),
        Format::Json => write_json(rows, out),
    }
}
