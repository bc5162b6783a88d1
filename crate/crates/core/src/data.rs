use crate::error::{Error, Result};

/// `n` observations of dimension `m`, stored row-major.
///
/// Regression data keep the covariates first and the response in the last
/// column.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    m: usize,
    values: Vec<f64>,
}

impl Dataset {
    pub fn new(m: usize, values: Vec<f64>) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidArgument("observation dimension must be positive".into()));
        }
        if values.len() % m != 0 {
            return Err(Error::DimensionMismatch { expected: m * (values.len() / m + 1), got: values.len() });
        }
        Ok(Self { m, values })
    }

    pub fn empty(m: usize) -> Self {
        Self { m: m.max(1), values: Vec::new() }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let m = rows.first().map(|r| r.len()).ok_or(Error::EmptyDataset)?;
        let mut values = Vec::with_capacity(rows.len() * m);
        for r in rows {
            if r.len() != m {
                return Err(Error::DimensionMismatch { expected: m, got: r.len() });
            }
            values.extend_from_slice(r);
        }
        Self::new(m, values)
    }

    /// Scalar observations.
    pub fn from_scalars(xs: &[f64]) -> Self {
        Self { m: 1, values: xs.to_vec() }
    }

    pub fn n(&self) -> usize {
        self.values.len() / self.m
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.m..(i + 1) * self.m]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.m)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    /// The data concatenated with itself `k` times.
    pub fn repeated(&self, k: usize) -> Self {
        Self { m: self.m, values: self.values.repeat(k) }
    }

    pub fn select(&self, indices: &[usize]) -> Self {
        let mut values = Vec::with_capacity(indices.len() * self.m);
        for &i in indices {
            values.extend_from_slice(self.row(i));
        }
        Self { m: self.m, values }
    }
}
