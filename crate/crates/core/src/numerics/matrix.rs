//! Dense small-dimension matrices and the Cholesky-type factorization used
//! for the calibration matrix.

use std::fmt;
use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// Largest dimension supported by the dense routines.
pub const MAX_DIM: usize = 16;

/// Square matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct SquareMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl fmt::Debug for SquareMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.rows()).finish()
    }
}

impl SquareMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1 && dim <= MAX_DIM, "matrix dimension {dim} out of range");
        Self { dim, data: vec![0.0; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &v) in diag.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn scalar(v: f64) -> Self {
        Self::from_diag(&[v])
    }

    /// Builds a matrix from row slices; all rows must have the same length as the row count.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::InvalidArgument(format!("matrix dimension {dim} out of range")));
        }
        let mut data = Vec::with_capacity(dim * dim);
        for r in rows {
            if r.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: r.len() });
            }
            data.extend_from_slice(r);
        }
        Ok(Self { dim, data })
    }

    pub fn from_row_major(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::InvalidArgument(format!("matrix dimension {dim} out of range")));
        }
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, got: data.len() });
        }
        Ok(Self { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.dim).map(|r| r.to_vec()).collect()
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self[(i, i)]).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    /// `(A + A^T) / 2`.
    pub fn symmetrized(&self) -> Self {
        let mut s = self.clone();
        for i in 0..self.dim {
            for j in 0..i {
                let v = 0.5 * (self[(i, j)] + self[(j, i)]);
                s[(i, j)] = v;
                s[(j, i)] = v;
            }
        }
        s
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let d = self.dim;
        let mut out = Self::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..d {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.dim, v.len());
        self.data
            .chunks(self.dim)
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `v^T A v`.
    pub fn quad_form(&self, v: &[f64]) -> f64 {
        self.matvec(v).iter().zip(v).map(|(a, b)| a * b).sum()
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Self { dim: self.dim, data }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Self { dim: self.dim, data }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|a| a * s).collect() }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|a| a * a).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, a| m.max(a.abs()))
    }

    /// Relative Frobenius distance `|A - B|_F / max(|B|_F, tiny)`.
    pub fn rel_frobenius_distance(&self, reference: &Self) -> f64 {
        let denom = reference.frobenius_norm().max(f64::MIN_POSITIVE);
        self.sub(reference).frobenius_norm() / denom
    }

    pub fn is_symmetric(&self, rel_tol: f64) -> bool {
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        (0..self.dim).all(|i| (0..i).all(|j| (self[(i, j)] - self[(j, i)]).abs() <= rel_tol * scale))
    }

    /// LU decomposition with partial pivoting; returns (packed LU, permutation, sign).
    fn lu(&self) -> Result<(Vec<f64>, Vec<usize>, f64)> {
        let d = self.dim;
        let mut a = self.data.clone();
        let mut perm: Vec<usize> = (0..d).collect();
        let mut sign = 1.0;
        let scale = self.max_abs();
        if scale == 0.0 || !scale.is_finite() {
            return Err(Error::SingularMatrix);
        }
        for k in 0..d {
            let (p, pmax) = (k..d)
                .map(|i| (i, a[i * d + k].abs()))
                .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if pmax <= scale * 1e-14 {
                return Err(Error::SingularMatrix);
            }
            if p != k {
                for j in 0..d {
                    a.swap(k * d + j, p * d + j);
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let pivot = a[k * d + k];
            for i in k + 1..d {
                let f = a[i * d + k] / pivot;
                a[i * d + k] = f;
                for j in k + 1..d {
                    a[i * d + j] -= f * a[k * d + j];
                }
            }
        }
        Ok((a, perm, sign))
    }

    pub fn det(&self) -> f64 {
        match self.lu() {
            Ok((lu, _, sign)) => (0..self.dim).map(|i| lu[i * self.dim + i]).product::<f64>() * sign,
            Err(_) => 0.0,
        }
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let d = self.dim;
        if b.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: b.len() });
        }
        let (lu, perm, _) = self.lu()?;
        let mut y: Vec<f64> = perm.iter().map(|&p| b[p]).collect();
        for i in 0..d {
            for j in 0..i {
                y[i] -= lu[i * d + j] * y[j];
            }
        }
        for i in (0..d).rev() {
            for j in i + 1..d {
                y[i] -= lu[i * d + j] * y[j];
            }
            y[i] /= lu[i * d + i];
        }
        Ok(y)
    }

    pub fn inverse(&self) -> Result<Self> {
        let d = self.dim;
        let mut inv = Self::zeros(d);
        let mut e = vec![0.0; d];
        for j in 0..d {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[j] = 1.0;
            let col = self.solve(&e)?;
            for i in 0..d {
                inv[(i, j)] = col[i];
            }
        }
        Ok(inv)
    }
}

impl Index<(usize, usize)> for SquareMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for SquareMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.dim + j]
    }
}

/// Upper-triangular `R` with positive diagonal such that `R^T R` is the factored matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangularFactor {
    r: SquareMatrix,
}

impl TriangularFactor {
    pub fn dim(&self) -> usize {
        self.r.dim()
    }

    pub fn matrix(&self) -> &SquareMatrix {
        &self.r
    }

    /// `R^T R`.
    pub fn reconstruct(&self) -> SquareMatrix {
        self.r.transpose().matmul(&self.r)
    }

    pub fn log_det(&self) -> f64 {
        2.0 * self.r.diag().iter().map(|v| v.ln()).sum::<f64>()
    }

    /// Inverse of `R` (again upper triangular), by back substitution.
    pub fn inverse_factor(&self) -> SquareMatrix {
        let d = self.dim();
        let r = &self.r;
        let mut inv = SquareMatrix::zeros(d);
        for j in 0..d {
            inv[(j, j)] = 1.0 / r[(j, j)];
            for i in (0..j).rev() {
                let s: f64 = (i + 1..=j).map(|k| r[(i, k)] * inv[(k, j)]).sum();
                inv[(i, j)] = -s / r[(i, i)];
            }
        }
        inv
    }

    /// Solves `(R^T R) x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let d = self.dim();
        let r = &self.r;
        let mut y = b.to_vec();
        for i in 0..d {
            for k in 0..i {
                y[i] -= r[(k, i)] * y[k];
            }
            y[i] /= r[(i, i)];
        }
        for i in (0..d).rev() {
            for k in i + 1..d {
                y[i] -= r[(i, k)] * y[k];
            }
            y[i] /= r[(i, i)];
        }
        y
    }
}

/// Factors a symmetric positive definite matrix as `R^T R` with `R` upper triangular.
pub fn spd_factor(m: &SquareMatrix) -> Result<TriangularFactor> {
    if !m.is_finite() {
        return Err(Error::NotPositiveDefinite { minor: 0 });
    }
    if !m.is_symmetric(1e-8) {
        return Err(Error::InvalidArgument("matrix is not symmetric".into()));
    }
    let d = m.dim();
    let mut r = SquareMatrix::zeros(d);
    for j in 0..d {
        let mut diag = m[(j, j)];
        for k in 0..j {
            diag -= r[(k, j)] * r[(k, j)];
        }
        if !(diag > 0.0) {
            return Err(Error::NotPositiveDefinite { minor: j + 1 });
        }
        let rjj = diag.sqrt();
        r[(j, j)] = rjj;
        for i in j + 1..d {
            let mut s = m[(j, i)];
            for k in 0..j {
                s -= r[(k, j)] * r[(k, i)];
            }
            r[(j, i)] = s / rjj;
        }
    }
    Ok(TriangularFactor { r })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identity_factor_is_identity() {
        let f = spd_factor(&SquareMatrix::identity(2)).unwrap();
        assert_eq!(f.matrix(), &SquareMatrix::identity(2));
    }

    #[test]
    fn diagonal_factor_takes_square_roots() {
        let f = spd_factor(&SquareMatrix::from_diag(&[4.0, 9.0])).unwrap();
        assert_eq!(f.matrix(), &SquareMatrix::from_diag(&[2.0, 3.0]));
    }

    #[test]
    fn indefinite_matrix_reports_failing_minor() {
        let m = SquareMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert_eq!(spd_factor(&m), Err(Error::NotPositiveDefinite { minor: 2 }));
    }

    #[test]
    fn inverse_and_det() {
        let m = SquareMatrix::from_rows(&[vec![4.0, 1.0, 0.5], vec![1.0, 3.0, 0.2], vec![0.5, 0.2, 2.0]])
            .unwrap();
        let inv = m.inverse().unwrap();
        assert!(m.matmul(&inv).rel_frobenius_distance(&SquareMatrix::identity(3)) < 1e-14);
        let f = spd_factor(&m).unwrap();
        assert!((f.log_det() - m.det().ln()).abs() < 1e-13);
        let x = f.solve(&[1.0, 2.0, 3.0]);
        let y = m.solve(&[1.0, 2.0, 3.0]).unwrap();
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).abs() < 1e-13);
        }
        let ri = f.inverse_factor();
        assert!(f.matrix().matmul(&ri).rel_frobenius_distance(&SquareMatrix::identity(3)) < 1e-14);
    }

    fn random_spd(dim: usize, entries: &[f64]) -> SquareMatrix {
        let a = SquareMatrix::from_row_major(dim, entries[..dim * dim].to_vec()).unwrap();
        a.transpose().matmul(&a).add(&SquareMatrix::identity(dim))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn spd_round_trip(dim in 1usize..=8, entries in prop::collection::vec(-3.0f64..3.0, 64)) {
            let m = random_spd(dim, &entries);
            let f = spd_factor(&m).unwrap();
            prop_assert!(f.reconstruct().rel_frobenius_distance(&m) <= 1e-10);
            prop_assert!(f.matrix().diag().iter().all(|&v| v > 0.0));
        }
    }
}
