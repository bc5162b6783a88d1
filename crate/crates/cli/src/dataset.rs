//! CSV datasets and tables.

use std::io::{Read, Write};
use std::path::Path;

use scorebayes_core::experiments::Table;
use scorebayes_core::Dataset;

use crate::error::CliError;

/// A numeric CSV split into covariate columns and an optional `y` column.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvData {
    /// Names of the columns in `dataset`, in order.
    pub columns: Vec<String>,
    pub dataset: Dataset,
    pub y: Option<Vec<f64>>,
}

impl CsvData {
    pub fn n(&self) -> usize {
        self.dataset.n()
    }
}

pub fn read_dataset(path: &Path) -> Result<CsvData, CliError> {
    let file = std::fs::File::open(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    parse_dataset(file).map_err(|e| match e {
        CliError::Data(m) => CliError::Data(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn parse_dataset<R: Read>(reader: R) -> Result<CsvData, CliError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| CliError::Data(format!("line 1: {e}")))?
        .iter()
        .map(str::to_string)
        .collect();
    if header.is_empty() || header.iter().any(String::is_empty) {
        return Err(CliError::Data("line 1: header has empty column names".into()));
    }
    let y_col = header.iter().position(|h| h == "y");
    let columns: Vec<String> = header.iter().filter(|h| *h != "y").cloned().collect();
    let mut values = Vec::new();
    let mut y = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            CliError::Data(format!("line {line}: {e}"))
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != header.len() {
            return Err(CliError::Data(format!("line {line}: expected {} fields, found {}", header.len(), rec.len())));
        }
        for (j, cell) in rec.iter().enumerate() {
            let v: f64 = cell
                .parse()
                .map_err(|_| CliError::Data(format!("line {line}: column '{}': '{cell}' is not a number", header[j])))?;
            if !v.is_finite() {
                return Err(CliError::Data(format!("line {line}: column '{}': non-finite value '{cell}'", header[j])));
            }
            if Some(j) == y_col {
                y.push(v);
            } else {
                values.push(v);
            }
        }
    }
    let n = if columns.is_empty() { y.len() } else { values.len() / columns.len() };
    if n == 0 {
        return Err(CliError::Data("dataset has a header but no rows".into()));
    }
    let dataset = if columns.is_empty() {
        Dataset::empty(0)
    } else {
        Dataset::new(columns.len(), values).map_err(|e| CliError::Data(e.to_string()))?
    };
    Ok(CsvData { columns, dataset, y: y_col.map(|_| y) })
}

pub fn table_to_writer<W: Write>(table: &Table, w: W) -> Result<(), CliError> {
    let mut wtr = csv::Writer::from_writer(w);
    let io = |e: csv::Error| CliError::Io(std::io::Error::other(e));
    wtr.write_record(&table.header).map_err(io)?;
    for row in &table.rows {
        wtr.write_record(row.iter().map(|v| v.to_string())).map_err(io)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn table_to_string(table: &Table) -> String {
    let mut buf = Vec::new();
    table_to_writer(table, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("csv output is utf-8")
}
