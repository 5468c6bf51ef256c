//! Small dense matrices over the reals or complexes.
//!
//! Entries are always stored as `Complex64`; a real matrix simply keeps every
//! imaginary part at zero and carries [`Field::Real`] so that real-only code
//! paths (eigenvector directions, real invariant subspaces) can be selected.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::svd;

pub type C64 = Complex64;

pub const MIN_DIM: usize = 2;
pub const MAX_DIM: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    Complex,
}

impl Field {
    /// Field of a product or combination of two matrices.
    pub fn join(self, other: Field) -> Field {
        if self == Field::Real && other == Field::Real {
            Field::Real
        } else {
            Field::Complex
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Real => f.write_str("real"),
            Field::Complex => f.write_str("complex"),
        }
    }
}

impl FromStr for Field {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "real" => Ok(Field::Real),
            "complex" => Ok(Field::Complex),
            other => Err(Error::Domain(format!("unknown field `{other}`"))),
        }
    }
}

/// Induced matrix norms. `Two` is the spectral norm (largest singular value).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormKind {
    One,
    #[default]
    Inf,
    Two,
}

impl NormKind {
    pub const ALL: [NormKind; 3] = [NormKind::One, NormKind::Inf, NormKind::Two];
}

impl fmt::Display for NormKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormKind::One => f.write_str("one"),
            NormKind::Inf => f.write_str("inf"),
            NormKind::Two => f.write_str("two"),
        }
    }
}

impl FromStr for NormKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "one" => Ok(NormKind::One),
            "inf" => Ok(NormKind::Inf),
            "two" => Ok(NormKind::Two),
            other => Err(Error::Domain(format!("unknown norm `{other}`"))),
        }
    }
}

/// A square `dim x dim` matrix stored row-major.
#[derive(Clone, PartialEq, Serialize)]
pub struct Matrix {
    dim: usize,
    field: Field,
    data: Vec<C64>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Matrix[{}]", self.field)?;
        let mut rows = f.debug_list();
        for r in 0..self.dim {
            let row: Vec<String> = self
                .row(r)
                .iter()
                .map(|z| match self.field {
                    Field::Real => format!("{}", z.re),
                    Field::Complex => format!("{}", z),
                })
                .collect();
            rows.entry(&row);
        }
        rows.finish()
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if (MIN_DIM..=MAX_DIM).contains(&dim) {
        Ok(())
    } else {
        Err(Error::Dimension(dim))
    }
}

impl Matrix {
    /// Builds a matrix from row-major entries. The field is taken as given;
    /// a real field with a nonzero imaginary part is rejected.
    pub fn new(dim: usize, field: Field, data: Vec<C64>) -> Result<Self> {
        check_dim(dim)?;
        if data.len() != dim * dim {
            return Err(Error::EntryCount {
                dim,
                expected: dim * dim,
                got: data.len(),
            });
        }
        for (i, z) in data.iter().enumerate() {
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::NonFinite {
                    row: i / dim,
                    col: i % dim,
                });
            }
            if field == Field::Real && z.im != 0.0 {
                return Err(Error::Domain(format!(
                    "real matrix has complex entry at ({}, {})",
                    i / dim,
                    i % dim
                )));
            }
        }
        Ok(Matrix { dim, field, data })
    }

    /// Real matrix from row-major entries.
    pub fn real(dim: usize, entries: &[f64]) -> Result<Self> {
        Self::new(
            dim,
            Field::Real,
            entries.iter().map(|&x| C64::new(x, 0.0)).collect(),
        )
    }

    /// Real matrix from nested rows; the dimension is the number of rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for r in rows {
            let r = r.as_ref();
            if r.len() != dim {
                return Err(Error::EntryCount {
                    dim,
                    expected: dim,
                    got: r.len(),
                });
            }
            entries.extend_from_slice(r);
        }
        Self::real(dim, &entries)
    }

    pub fn complex(dim: usize, entries: Vec<C64>) -> Result<Self> {
        Self::new(dim, Field::Complex, entries)
    }

    /// Internal constructor for results of arithmetic on valid matrices.
    pub(crate) fn from_raw(dim: usize, field: Field, data: Vec<C64>) -> Self {
        debug_assert_eq!(data.len(), dim * dim);
        Matrix { dim, field, data }
    }

    pub fn identity(dim: usize, field: Field) -> Result<Self> {
        check_dim(dim)?;
        let mut data = vec![C64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            data[i * dim + i] = C64::new(1.0, 0.0);
        }
        Ok(Matrix { dim, field, data })
    }

    pub fn zeros(dim: usize, field: Field) -> Result<Self> {
        check_dim(dim)?;
        Ok(Matrix {
            dim,
            field,
            data: vec![C64::new(0.0, 0.0); dim * dim],
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn is_real(&self) -> bool {
        self.field == Field::Real
    }

    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.data[row * self.dim + col]
    }

    pub fn row(&self, row: usize) -> &[C64] {
        &self.data[row * self.dim..(row + 1) * self.dim]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    /// Promotes to the complex field (same entries).
    pub fn to_complex(&self) -> Matrix {
        Matrix {
            dim: self.dim,
            field: Field::Complex,
            data: self.data.clone(),
        }
    }

    /// Matrix product `self * rhs`.
    pub fn mul(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in product");
        let n = self.dim;
        let field = self.field.join(rhs.field);
        let mut out = vec![C64::new(0.0, 0.0); n * n];
        if field == Field::Real {
            for i in 0..n {
                for k in 0..n {
                    let a = self.data[i * n + k].re;
                    if a == 0.0 {
                        continue;
                    }
                    for j in 0..n {
                        out[i * n + j].re += a * rhs.data[k * n + j].re;
                    }
                }
            }
        } else {
            for i in 0..n {
                for k in 0..n {
                    let a = self.data[i * n + k];
                    for j in 0..n {
                        out[i * n + j] += a * rhs.data[k * n + j];
                    }
                }
            }
        }
        Matrix::from_raw(n, field, out)
    }

    /// Row vector times matrix, `x * self`.
    pub fn left_apply(&self, x: &[C64]) -> Vec<C64> {
        let n = self.dim;
        assert_eq!(x.len(), n);
        let mut out = vec![C64::new(0.0, 0.0); n];
        for (k, &xk) in x.iter().enumerate() {
            for j in 0..n {
                out[j] += xk * self.data[k * n + j];
            }
        }
        out
    }

    pub fn scale(&self, factor: f64) -> Matrix {
        Matrix::from_raw(
            self.dim,
            self.field,
            self.data.iter().map(|z| z * factor).collect(),
        )
    }

    pub fn scale_complex(&self, factor: C64) -> Matrix {
        Matrix::from_raw(
            self.dim,
            self.field.join(if factor.im == 0.0 {
                Field::Real
            } else {
                Field::Complex
            }),
            self.data.iter().map(|z| z * factor).collect(),
        )
    }

    pub fn add(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.dim, rhs.dim);
        Matrix::from_raw(
            self.dim,
            self.field.join(rhs.field),
            self.data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    pub fn sub(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.dim, rhs.dim);
        Matrix::from_raw(
            self.dim,
            self.field.join(rhs.field),
            self.data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        )
    }

    /// `self - shift * I`.
    pub fn shifted(&self, shift: C64) -> Matrix {
        let mut out = self.clone();
        if shift.im != 0.0 {
            out.field = Field::Complex;
        }
        for i in 0..self.dim {
            out.data[i * self.dim + i] -= shift;
        }
        out
    }

    pub fn transpose(&self) -> Matrix {
        let n = self.dim;
        let mut out = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                out[j * n + i] = self.data[i * n + j];
            }
        }
        Matrix::from_raw(n, self.field, out)
    }

    pub fn conj_transpose(&self) -> Matrix {
        let n = self.dim;
        let mut out = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                out[j * n + i] = self.data[i * n + j].conj();
            }
        }
        Matrix::from_raw(n, self.field, out)
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Inf-norm of `self - other`; the clustering distance for limit points.
    pub fn distance_inf(&self, other: &Matrix) -> f64 {
        self.sub(other).norm(NormKind::Inf)
    }

    pub fn norm(&self, kind: NormKind) -> f64 {
        let n = self.dim;
        match kind {
            NormKind::One => (0..n)
                .map(|j| (0..n).map(|i| self.data[i * n + j].norm()).sum::<f64>())
                .fold(0.0, f64::max),
            NormKind::Inf => (0..n)
                .map(|i| self.row(i).iter().map(|z| z.norm()).sum::<f64>())
                .fold(0.0, f64::max),
            NormKind::Two => self.singular_values()[0],
        }
    }

    /// Singular values in descending order.
    pub fn singular_values(&self) -> Vec<f64> {
        svd::singular_values(self)
    }

    /// Determinant: cofactor expansion for `dim <= 4`, partial-pivot LU above.
    pub fn determinant(&self) -> C64 {
        if self.dim <= 4 {
            cofactor_det(&self.data, self.dim)
        } else {
            lu_det(&self.data, self.dim)
        }
    }
}

fn minor(a: &[C64], n: usize, skip_row: usize, skip_col: usize) -> Vec<C64> {
    let mut out = Vec::with_capacity((n - 1) * (n - 1));
    for i in (0..n).filter(|&i| i != skip_row) {
        for j in (0..n).filter(|&j| j != skip_col) {
            out.push(a[i * n + j]);
        }
    }
    out
}

fn cofactor_det(a: &[C64], n: usize) -> C64 {
    match n {
        1 => a[0],
        2 => a[0] * a[3] - a[1] * a[2],
        _ => {
            let mut det = C64::new(0.0, 0.0);
            for j in 0..n {
                if a[j] == C64::new(0.0, 0.0) {
                    continue;
                }
                let term = a[j] * cofactor_det(&minor(a, n, 0, j), n - 1);
                if j % 2 == 0 {
                    det += term;
                } else {
                    det -= term;
                }
            }
            det
        }
    }
}

fn lu_det(a: &[C64], n: usize) -> C64 {
    let mut m = a.to_vec();
    let mut det = C64::new(1.0, 0.0);
    for k in 0..n {
        let pivot = (k..n)
            .max_by(|&x, &y| m[x * n + k].norm().total_cmp(&m[y * n + k].norm()))
            .unwrap();
        if m[pivot * n + k].norm() == 0.0 {
            return C64::new(0.0, 0.0);
        }
        if pivot != k {
            for j in 0..n {
                m.swap(k * n + j, pivot * n + j);
            }
            det = -det;
        }
        let p = m[k * n + k];
        det *= p;
        for i in k + 1..n {
            let f = m[i * n + k] / p;
            if f == C64::new(0.0, 0.0) {
                continue;
            }
            for j in k..n {
                let v = m[k * n + j];
                m[i * n + j] -= f * v;
            }
        }
    }
    det
}
