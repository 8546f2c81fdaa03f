//! Plot-ready CSV tables. Every float is written with 17 significant digits,
//! enough to read back the exact `f64`.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::experiments::{EnergyRecord, SweepRecord, Verdict};

pub const ENERGY_HEADER: [&str; 7] = ["t", "E", "dissipated", "norm1", "norm2", "l2_u", "l2_ut"];

pub const SWEEP_HEADER: [&str; 9] = [
    "eps",
    "coef_linf",
    "coef_lds",
    "coef_ld2s",
    "data_hs",
    "data_l2",
    "sup_norm1",
    "sup_norm2",
    "terminal_err",
];

pub const COHERENCE_HEADER: [&str; 2] = ["eps", "l2_err"];

/// Header plus rows of floats.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// `{:.16e}`: one digit before the point and sixteen after.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn energy_rows(records: &[EnergyRecord]) -> Vec<Vec<f64>> {
    records
        .iter()
        .map(|r| {
            vec![
                r.t,
                r.energy,
                r.dissipated,
                r.norm1,
                r.norm2,
                r.l2_u,
                r.l2_ut,
            ]
        })
        .collect()
}

pub fn sweep_rows(records: &[SweepRecord]) -> Vec<Vec<f64>> {
    records
        .iter()
        .map(|r| {
            vec![
                r.eps,
                r.coef_linf,
                r.coef_lds,
                r.coef_ld2s,
                r.data_hs,
                r.data_l2,
                r.sup_norm1,
                r.sup_norm2,
                r.terminal_err,
            ]
        })
        .collect()
}

pub fn coherence_rows(eps: &[f64], errors: &[f64]) -> Vec<Vec<f64>> {
    eps.iter().zip(errors).map(|(&e, &r)| vec![e, r]).collect()
}

pub fn write_table_to<W: Write>(w: W, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(header)?;
    for row in rows {
        if row.len() != header.len() {
            return Err(Error::Config(format!(
                "row of {} values under a {}-column header",
                row.len(),
                header.len()
            )));
        }
        out.write_record(row.iter().map(|&v| format_float(v)))?;
    }
    out.flush().map_err(|e| Error::io("<csv>", e))
}

pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_table_to(file, header, rows)
}

pub fn read_table_from<R: Read>(r: R) -> Result<Table> {
    let mut rdr = csv::Reader::from_reader(r);
    let header = rdr.headers()?.iter().map(str::to_owned).collect();
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|e| Error::Format(format!("bad number {s:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(Table { header, rows })
}

pub fn read_table(path: &Path) -> Result<Table> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_table_from(file)
}

pub fn write_verdict(path: &Path, verdict: &Verdict) -> Result<()> {
    let text = serde_json::to_string_pretty(verdict)?;
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}
