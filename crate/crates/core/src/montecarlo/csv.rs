use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{OpeError, Result};
use crate::estimators::EstimatorKind;

pub const CSV_COLUMNS: [&str; 9] = [
    "experiment",
    "instance_id",
    "estimator",
    "n",
    "replications",
    "mse",
    "nmse",
    "stderr",
    "seed",
];

/// One line of the simulation CSV. `stderr` is the standard error of `mse`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub experiment: String,
    pub instance_id: String,
    pub estimator: EstimatorKind,
    pub n: usize,
    pub replications: usize,
    pub mse: f64,
    pub nmse: f64,
    pub stderr: f64,
    pub seed: u64,
}

pub fn write_csv<W: Write>(rows: &[CsvRow], out: W) -> Result<()> {
    let mut w = ::csv::Writer::from_writer(out);
    // header comes from the field names; keep it even with zero rows
    if rows.is_empty() {
        w.write_record(CSV_COLUMNS).map_err(io_error)?;
    }
    for row in rows {
        w.serialize(row).map_err(io_error)?;
    }
    w.flush().map_err(|e| OpeError::Precondition(format!("csv write: {e}")))?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<CsvRow>> {
    let mut r = ::csv::Reader::from_reader(input);
    let header = r.headers().map_err(io_error)?.clone();
    if header.iter().ne(CSV_COLUMNS.iter().copied()) {
        return Err(OpeError::InvalidConfig(format!(
            "csv header {:?} does not match {:?}",
            header.iter().collect::<Vec<_>>(),
            CSV_COLUMNS
        )));
    }
    r.deserialize().map(|row| row.map_err(io_error)).collect()
}

fn io_error(e: ::csv::Error) -> OpeError {
    OpeError::InvalidConfig(format!("csv: {e}"))
}
