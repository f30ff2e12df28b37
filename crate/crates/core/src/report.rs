//! CSV output: cell summaries, raw estimates and quantile sidecars.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::harness::{CellSummary, RawCell, SimulationSummary, VarianceCheckRow};
use crate::stats::five_number;

pub const SUMMARY_HEADER: [&str; 7] = [
    "estimator",
    "N",
    "n",
    "mean_k_czk",
    "sd_k_czk",
    "negative_count",
    "total_count",
];

pub const RAW_HEADER: [&str; 6] = [
    "estimator",
    "N",
    "n",
    "population_rep",
    "sample_rep",
    "mean_estimate_k_czk",
];

pub const QUANTILE_HEADER: [&str; 8] = ["estimator", "N", "n", "min", "q1", "median", "q3", "max"];

pub fn write_summary<W: Write>(summary: &SimulationSummary, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SUMMARY_HEADER)?;
    for c in &summary.cells {
        w.write_record([
            c.estimator.clone(),
            c.population_size.to_string(),
            c.sample_size.to_string(),
            format!("{:.3}", c.mean_k_czk),
            format!("{:.3}", c.sd_k_czk),
            c.negative_count.to_string(),
            c.total_count.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_summary(summary: &SimulationSummary, path: &Path) -> Result<()> {
    write_summary(
        summary,
        std::io::BufWriter::new(std::fs::File::create(path)?),
    )
}

fn field<T: std::str::FromStr>(record: &csv::StringRecord, i: usize) -> Result<T> {
    record.get(i).and_then(|v| v.parse().ok()).ok_or_else(|| {
        Error::Config(format!(
            "bad summary field {} in {:?}",
            SUMMARY_HEADER[i], record
        ))
    })
}

pub fn read_summary<R: std::io::Read>(input: R) -> Result<SimulationSummary> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    if header.iter().ne(SUMMARY_HEADER) {
        return Err(Error::Config(format!(
            "unexpected summary header {header:?}"
        )));
    }
    let mut cells = Vec::new();
    for record in r.records() {
        let record = record?;
        cells.push(CellSummary {
            estimator: field(&record, 0)?,
            population_size: field(&record, 1)?,
            sample_size: field(&record, 2)?,
            mean_k_czk: field(&record, 3)?,
            sd_k_czk: field(&record, 4)?,
            negative_count: field(&record, 5)?,
            total_count: field(&record, 6)?,
        });
    }
    Ok(SimulationSummary { cells })
}

pub fn parse_summary(path: &Path) -> Result<SimulationSummary> {
    read_summary(std::fs::File::open(path)?)
}

/// Long-format raw estimates with 1-based replication indices.
pub fn write_raw<W: Write>(raw: &[RawCell], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RAW_HEADER)?;
    for cell in raw {
        let label = cell.estimator.label();
        let big_n = cell.population_size.to_string();
        let n = cell.sample_size.to_string();
        for (idx, v) in cell.values.iter().enumerate() {
            let p = idx / cell.samples_per_population + 1;
            let s = idx % cell.samples_per_population + 1;
            w.write_record([
                label,
                &big_n,
                &n,
                &p.to_string(),
                &s.to_string(),
                &format!("{v:.6}"),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn emit_estimates(raw: &[RawCell], path: &Path) -> Result<()> {
    write_raw(raw, std::io::BufWriter::new(std::fs::File::create(path)?))
}

pub fn write_quantiles<W: Write>(raw: &[RawCell], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(QUANTILE_HEADER)?;
    for cell in raw {
        let Some(f) = five_number(&cell.values) else {
            continue;
        };
        let mut row = vec![
            cell.estimator.label().to_string(),
            cell.population_size.to_string(),
            cell.sample_size.to_string(),
        ];
        row.extend(
            [f.min, f.q1, f.median, f.q3, f.max]
                .iter()
                .map(|v| format!("{v:.6}")),
        );
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_quantiles(raw: &[RawCell], path: &Path) -> Result<()> {
    write_quantiles(raw, std::io::BufWriter::new(std::fs::File::create(path)?))
}

pub fn write_variance_check<W: Write>(rows: &[VarianceCheckRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "estimator",
        "N",
        "n",
        "randomization",
        "sampling",
        "theoretical_total",
        "empirical_within",
        "ratio",
    ])?;
    for r in rows {
        w.write_record([
            r.estimator.label().to_string(),
            r.population_size.to_string(),
            r.sample_size.to_string(),
            format!("{:.6}", r.randomization),
            format!("{:.6}", r.sampling),
            format!("{:.6}", r.theoretical_total),
            format!("{:.6}", r.empirical_within),
            format!("{:.4}", r.empirical_within / r.theoretical_total),
        ])?;
    }
    w.flush()?;
    Ok(())
}
