//! CSV tables and gnuplot-style plot files. Numbers are written with
//! `{:.16e}` so that identical results give identical bytes.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{usage, Result};
use crate::field::ChemicalField;
use crate::grid::{DensityField, Grid1D};
use crate::mild::{ErrorTable, MarginalHistory};

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    Ok(csv::Writer::from_writer(BufWriter::new(File::create(
        path,
    )?)))
}

/// Long form `t,x,p`, every populated row of the history.
pub fn write_history_csv(path: &Path, history: &MarginalHistory) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["t", "x", "p"])?;
    let x = history.grid().points();
    for (k, row) in history.rows().iter().enumerate() {
        let t = num(history.time(k));
        for (xi, p) in x.iter().zip(row) {
            w.write_record([t.as_str(), &num(*xi), &num(*p)])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `t,x,p` for standalone densities (KDE estimates, bounds).
pub fn write_densities_csv(path: &Path, grid: &Grid1D, densities: &[DensityField]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["t", "x", "p"])?;
    let x = grid.points();
    for d in densities {
        grid.check_len(&d.values, "density")?;
        let t = num(d.time);
        for (xi, p) in x.iter().zip(&d.values) {
            w.write_record([t.as_str(), &num(*xi), &num(*p)])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `t,x,c,dc`.
pub fn write_fields_csv(path: &Path, grid: &Grid1D, fields: &[ChemicalField]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["t", "x", "c", "dc"])?;
    let x = grid.points();
    for f in fields {
        grid.check_len(&f.values, "concentration")?;
        let t = num(f.time);
        for i in 0..x.len() {
            w.write_record([
                t.as_str(),
                &num(x[i]),
                &num(f.values[i]),
                &num(f.gradient[i]),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `t,l1,l2,linf`.
pub fn write_errors_csv(path: &Path, table: &ErrorTable) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["t", "l1", "l2", "linf"])?;
    for k in 0..table.times.len() {
        w.write_record([
            num(table.times[k]),
            num(table.l1[k]),
            num(table.l2[k]),
            num(table.linf[k]),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads back any of the CSV layouts above: the header and the columns.
pub fn read_csv_table(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut r = csv::Reader::from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    let mut cols = vec![Vec::new(); header.len()];
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        for (c, field) in rec.iter().enumerate() {
            let v = field.parse::<f64>().map_err(|e| {
                crate::Error::Usage(format!(
                    "{}: row {}: {field:?}: {e}",
                    path.display(),
                    line + 2
                ))
            })?;
            cols[c].push(v);
        }
    }
    Ok((header, cols))
}

/// Whitespace table with a `#` header line; columns must have equal length.
pub fn write_plot(path: &Path, header: &[&str], columns: &[&[f64]]) -> Result<()> {
    if header.len() != columns.len() {
        return usage(format!(
            "{} headers for {} columns",
            header.len(),
            columns.len()
        ));
    }
    let rows = columns.first().map_or(0, |c| c.len());
    if columns.iter().any(|c| c.len() != rows) {
        return usage("plot columns differ in length");
    }
    let mut f = BufWriter::new(File::create(path)?);
    writeln!(f, "# {}", header.join(" "))?;
    for r in 0..rows {
        let line: Vec<String> = columns.iter().map(|c| num(c[r])).collect();
        writeln!(f, "{}", line.join(" "))?;
    }
    f.flush()?;
    Ok(())
}

/// History in gnuplot block form: one block per time, blank line between.
pub fn write_history_plot(path: &Path, history: &MarginalHistory, stride: usize) -> Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    writeln!(f, "# t x p")?;
    let x = history.grid().points();
    for (k, row) in history.rows().iter().enumerate().step_by(stride.max(1)) {
        let t = num(history.time(k));
        for (xi, p) in x.iter().zip(row) {
            writeln!(f, "{t} {} {}", num(*xi), num(*p))?;
        }
        writeln!(f)?;
    }
    f.flush()?;
    Ok(())
}
