use std::io::Write;

use crate::BenchError;

pub const HEADER: [&str; 7] = ["scenario", "maximizer", "k", "seed", "trial", "metric", "value"];

/// One long-format CSV record.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub scenario: String,
    pub maximizer: String,
    pub k: usize,
    pub seed: u64,
    /// Trial index, or `mean` for summary rows.
    pub trial: String,
    pub metric: String,
    pub value: f64,
}

pub fn write_csv<W: Write>(rows: &[Row], out: W) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| BenchError::Runtime(e.to_string());
    w.write_record(HEADER).map_err(io)?;
    for r in rows {
        w.write_record([
            r.scenario.as_str(),
            r.maximizer.as_str(),
            &r.k.to_string(),
            &r.seed.to_string(),
            r.trial.as_str(),
            r.metric.as_str(),
            &r.value.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}
