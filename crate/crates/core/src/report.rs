//! Output rows and their CSV / JSON-lines encodings.

use std::io::{Read, Write};

use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::coin::BackendKind;
use crate::error::{Error, Result};

/// Header of the per-trial CSV table, in column order.
pub const RESULT_HEADER: &str = "trial,n,k_true,epsilon,delta,seed,backend,k_hat,theta_min,theta_max,t_step1,iters_step2,grover_apps,oracle_queries,coin_flips,success,conforming,wall_ms";

/// One estimator trial. For amplitude runs `n` is empty, `k_true` holds `a`
/// and `k_hat` holds `â`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub trial: u64,
    pub n: Option<u64>,
    pub k_true: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub seed: u64,
    pub backend: BackendKind,
    pub k_hat: f64,
    pub theta_min: f64,
    pub theta_max: f64,
    pub t_step1: u32,
    pub iters_step2: u32,
    pub grover_apps: u64,
    pub oracle_queries: u64,
    pub coin_flips: u64,
    pub success: bool,
    pub conforming: bool,
    pub wall_ms: f64,
}

impl ResultRow {
    /// Copy with the timing column cleared, for reproducibility comparisons.
    pub fn without_timing(&self) -> ResultRow {
        ResultRow { wall_ms: 0.0, ..self.clone() }
    }
}

/// Summary statistics for one cell of a scaling study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingCell {
    pub n: u64,
    pub k: u64,
    pub epsilon: f64,
    pub delta: f64,
    pub trials: u64,
    pub seed: u64,
    pub median_queries: f64,
    pub q1_queries: f64,
    pub q3_queries: f64,
    pub median_step1: f64,
    pub median_step2: f64,
}

/// A rotation-lemma check that failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaViolation {
    pub sweep: u64,
    pub check: String,
    pub theta_min: f64,
    pub theta_max: f64,
    pub gamma: f64,
    pub r: u64,
    pub theta: f64,
    pub value: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    JsonLines,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json-lines" | "jsonl" => Ok(OutputFormat::JsonLines),
            other => Err(Error::InvalidParameter(format!("unknown format {other:?}"))),
        }
    }
}

/// Writes rows with a header (CSV) or one JSON object per line.
pub fn write_rows<W: Write, T: Serialize>(out: W, rows: &[T], format: OutputFormat) -> Result<()> {
    match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for row in rows {
                w.serialize(row)?;
            }
            w.flush()?;
        }
        OutputFormat::JsonLines => {
            let mut out = std::io::BufWriter::new(out);
            for row in rows {
                serde_json::to_writer(&mut out, row)?;
                out.write_all(b"\n")?;
            }
            out.flush()?;
        }
    }
    Ok(())
}

/// Reads rows written by [`write_rows`] in CSV form.
pub fn read_csv<R: Read, T: DeserializeOwned>(input: R) -> Result<Vec<T>> {
    csv::Reader::from_reader(input)
        .deserialize()
        .map(|r| r.map_err(Error::from))
        .collect()
}

/// Reads rows written by [`write_rows`] in JSON-lines form.
pub fn read_json_lines<R: Read, T: DeserializeOwned>(input: R) -> Result<Vec<T>> {
    let mut text = String::new();
    let mut input = input;
    input.read_to_string(&mut text)?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(Error::from))
        .collect()
}
