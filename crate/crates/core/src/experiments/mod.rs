//! End-to-end pipelines for the three worked examples: von Mises
//! concentration, equi-correlated normal, robust linear regression.

pub mod eqcorr;
pub mod regression;
pub mod vmf;

use crate::error::{Error, Result};
use crate::numerics::Grid1D;
use crate::posterior::{Chain, PosteriorSummary};

/// A named numeric table, written out as `<name>.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self { name: name.to_string(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// Columns `theta` and one density column per grid; all grids must share
    /// their nodes.
    pub fn from_grids(name: &str, first: &str, columns: &[(&str, &Grid1D)]) -> Result<Self> {
        let nodes = columns.first().ok_or_else(|| Error::InvalidArgument("no grids".into()))?.1.nodes();
        if columns.iter().any(|(_, g)| g.nodes() != nodes) {
            return Err(Error::InvalidGrid("grids do not share nodes".into()));
        }
        let mut header = vec![first];
        header.extend(columns.iter().map(|(n, _)| *n));
        let mut t = Self::new(name, &header);
        for (i, x) in nodes.iter().enumerate() {
            let mut row = vec![*x];
            row.extend(columns.iter().map(|(_, g)| g.values()[i]));
            t.push(row);
        }
        Ok(t)
    }

    /// Columns `draw`, the parameter names, `log_target`.
    pub fn from_chain(name: &str, names: &[&str], chain: &Chain) -> Self {
        let mut header = vec!["draw"];
        header.extend_from_slice(names);
        header.push("log_target");
        let mut t = Self::new(name, &header);
        for (i, (row, lt)) in chain.draws.iter().zip(&chain.log_target).enumerate() {
            let mut r = vec![i as f64];
            r.extend_from_slice(row);
            r.push(*lt);
            t.push(r);
        }
        t
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|v| v.to_string()).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }
}

/// A labelled posterior summary for result files.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelledSummary {
    pub label: String,
    pub parameter: String,
    pub summary: PosteriorSummary,
}

impl LabelledSummary {
    pub fn new(label: &str, parameter: &str, summary: PosteriorSummary) -> Self {
        Self { label: label.to_string(), parameter: parameter.to_string(), summary }
    }
}

/// Output of a reproduction pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct Reproduction {
    pub tables: Vec<Table>,
    pub summaries: Vec<LabelledSummary>,
}
