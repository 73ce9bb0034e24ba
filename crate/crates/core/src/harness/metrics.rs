use std::io::Write;
use std::path::Path;

use crate::error::Result;
use crate::model::{format_mbps, Throughput};
use crate::placement::ScheduleState;

use super::io::FORMAT_HEADER;

pub const METRICS_COLUMNS: [&str; 11] = [
    "scenario",
    "step",
    "algorithm",
    "aggregated_throughput_mbps",
    "admitted_count",
    "rejected_count",
    "solving_time_seconds",
    "mean_table_length",
    "max_table_length",
    "max_buffer_occupancy",
    "schedulable",
];

/// One line of experiment output. `admitted_count` is the number of
/// streams in the network after the step; `rejected_count` counts the
/// step's own rejections.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub scenario: String,
    pub step: usize,
    pub algorithm: String,
    pub aggregated_throughput: Throughput,
    pub admitted_count: usize,
    pub rejected_count: usize,
    pub solving_time_seconds: f64,
    pub mean_table_length: f64,
    pub max_table_length: usize,
    pub max_buffer_occupancy: usize,
    pub schedulable: bool,
}

impl MetricsRow {
    pub fn throughput_mbps(&self) -> f64 {
        crate::model::mbps_f64(self.aggregated_throughput)
    }

    fn record(&self) -> [String; 11] {
        [
            self.scenario.clone(),
            self.step.to_string(),
            self.algorithm.clone(),
            format_mbps(self.aggregated_throughput),
            self.admitted_count.to_string(),
            self.rejected_count.to_string(),
            format!("{:.6}", self.solving_time_seconds),
            format!("{:.3}", self.mean_table_length),
            self.max_table_length.to_string(),
            self.max_buffer_occupancy.to_string(),
            self.schedulable.to_string(),
        ]
    }
}

/// Mean and max reservation count over the ports carrying at least one
/// reservation. Idle ports are left out of the mean.
pub fn table_lengths(state: &ScheduleState) -> (f64, usize) {
    let used: Vec<usize> = state
        .timelines()
        .iter()
        .map(|t| t.len())
        .filter(|&n| n > 0)
        .collect();
    if used.is_empty() {
        return (0.0, 0);
    }
    let mean = used.iter().sum::<usize>() as f64 / used.len() as f64;
    (mean, used.iter().copied().max().unwrap_or(0))
}

pub fn write_metrics<W: Write>(rows: &[MetricsRow], mut out: W) -> Result<()> {
    writeln!(out, "{FORMAT_HEADER}")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(METRICS_COLUMNS)?;
    for row in rows {
        w.write_record(row.record())?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_metrics_csv(rows: &[MetricsRow], path: impl AsRef<Path>) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_metrics(rows, std::io::BufWriter::new(file))
}
