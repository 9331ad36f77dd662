//! Dense square matrices and univariate polynomials over Gaussian rationals.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::gaussian::GaussianRational;
use crate::rational::{int, Rational};

/// Square matrix stored row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    size: usize,
    entries: Vec<GaussianRational>,
}

impl Matrix {
    pub fn zeros(size: usize) -> Self {
        Self {
            size,
            entries: vec![GaussianRational::zero(); size * size],
        }
    }

    pub fn identity(size: usize) -> Self {
        Self::scalar(size, GaussianRational::one())
    }

    pub fn scalar(size: usize, value: GaussianRational) -> Self {
        let mut m = Self::zeros(size);
        for i in 0..size {
            m.set(i, i, value.clone());
        }
        m
    }

    pub fn diagonal(values: &[GaussianRational]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, v) in values.iter().enumerate() {
            m.set(i, i, v.clone());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<GaussianRational>>) -> Result<Self> {
        let size = rows.len();
        let mut entries = Vec::with_capacity(size * size);
        for row in rows {
            if row.len() != size {
                return Err(Error::SizeMismatch {
                    expected: size,
                    found: row.len(),
                });
            }
            entries.extend(row);
        }
        Ok(Self { size, entries })
    }

    pub fn rows(&self) -> Vec<Vec<GaussianRational>> {
        self.entries
            .chunks(self.size.max(1))
            .map(<[_]>::to_vec)
            .take(self.size)
            .collect()
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, row: usize, col: usize) -> &GaussianRational {
        &self.entries[row * self.size + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: GaussianRational) {
        self.entries[row * self.size + col] = value;
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Zero::is_zero)
    }

    pub fn scale(&self, k: &GaussianRational) -> Self {
        Self {
            size: self.size,
            entries: self.entries.iter().map(|e| e * k).collect(),
        }
    }

    pub fn scale_rational(&self, k: &Rational) -> Self {
        Self {
            size: self.size,
            entries: self.entries.iter().map(|e| e.scale(k)).collect(),
        }
    }

    pub fn trace(&self) -> GaussianRational {
        let mut acc = GaussianRational::zero();
        for i in 0..self.size {
            acc += self.get(i, i);
        }
        acc
    }

    pub fn pow(&self, exp: u32) -> Self {
        let mut acc = Self::identity(self.size);
        for _ in 0..exp {
            acc = &acc * self;
        }
        acc
    }

    /// `P^T M P` for the permutation sending new index `i` to old index
    /// `order[i]`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        let mut out = Self::zeros(self.size);
        for (i, &oi) in order.iter().enumerate() {
            for (j, &oj) in order.iter().enumerate() {
                out.set(i, j, self.get(oi, oj).clone());
            }
        }
        out
    }

    /// Copies `block` into `self` with its top-left corner at `(row, col)`.
    pub fn place(&mut self, row: usize, col: usize, block: &Matrix) {
        for i in 0..block.size {
            for j in 0..block.size {
                self.set(row + i, col + j, block.get(i, j).clone());
            }
        }
    }

    pub fn is_lower_triangular(&self) -> bool {
        (0..self.size).all(|i| ((i + 1)..self.size).all(|j| self.get(i, j).is_zero()))
    }

    pub fn diagonal_entries(&self) -> Vec<GaussianRational> {
        (0..self.size).map(|i| self.get(i, i).clone()).collect()
    }

    /// Characteristic polynomial `det(t I - M)` by Faddeev–LeVerrier.
    pub fn char_poly(&self) -> Polynomial {
        let n = self.size;
        let mut coeffs = vec![GaussianRational::zero(); n + 1];
        coeffs[n] = GaussianRational::one();
        let mut aux = Self::zeros(n);
        for k in 1..=n {
            let mut next = self * &aux;
            for i in 0..n {
                let v = next.get(i, i) + &coeffs[n - k + 1];
                next.set(i, i, v);
            }
            let t = (self * &next).trace();
            coeffs[n - k] = -t.scale(&Rational::new(1.into(), (k as i64).into()));
            aux = next;
        }
        Polynomial::new(coeffs)
    }

    /// Determinant by Gaussian elimination.
    pub fn determinant(&self) -> GaussianRational {
        let n = self.size;
        let mut a = self.clone();
        let mut det = GaussianRational::one();
        for col in 0..n {
            let Some(pivot) = (col..n).find(|&r| !a.get(r, col).is_zero()) else {
                return GaussianRational::zero();
            };
            if pivot != col {
                for j in 0..n {
                    let tmp = a.get(pivot, j).clone();
                    a.set(pivot, j, a.get(col, j).clone());
                    a.set(col, j, tmp);
                }
                det = -det;
            }
            let p = a.get(col, col).clone();
            det = &det * &p;
            let p_inv = p.inv().expect("nonzero pivot");
            for r in (col + 1)..n {
                let factor = a.get(r, col) * &p_inv;
                if factor.is_zero() {
                    continue;
                }
                for j in col..n {
                    let v = a.get(r, j) - &(&factor * a.get(col, j));
                    a.set(r, j, v);
                }
            }
        }
        det
    }
}

impl<'a> Mul<&'a Matrix> for &'a Matrix {
    type Output = Matrix;
    fn mul(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.size, rhs.size, "matrix sizes differ");
        let n = self.size;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let b = rhs.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    out.entries[i * n + j] += &(a * b);
                }
            }
        }
        out
    }
}

impl<'a> Add<&'a Matrix> for &'a Matrix {
    type Output = Matrix;
    fn add(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.size, rhs.size, "matrix sizes differ");
        Matrix {
            size: self.size,
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl<'a> Sub<&'a Matrix> for &'a Matrix {
    type Output = Matrix;
    fn sub(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.size, rhs.size, "matrix sizes differ");
        Matrix {
            size: self.size,
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.rows() {
            let cells: Vec<String> = row.iter().map(ToString::to_string).collect();
            writeln!(f, "[{}]", cells.join(", "))?;
        }
        Ok(())
    }
}

/// Polynomial with coefficients listed from the constant term upwards.
/// Trailing zero coefficients are trimmed.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Polynomial {
    coeffs: Vec<GaussianRational>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<GaussianRational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn one() -> Self {
        Self::new(vec![GaussianRational::one()])
    }

    /// `prod (t - root)`.
    pub fn from_roots<'a>(roots: impl IntoIterator<Item = &'a GaussianRational>) -> Self {
        roots.into_iter().fold(Self::one(), |acc, r| {
            &acc * &Self::new(vec![-r, GaussianRational::one()])
        })
    }

    pub fn coeffs(&self) -> &[GaussianRational] {
        &self.coeffs
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn eval(&self, t: &GaussianRational) -> GaussianRational {
        self.coeffs
            .iter()
            .rev()
            .fold(GaussianRational::zero(), |acc, c| &(&acc * t) + c)
    }

    pub fn pow(&self, exp: u32) -> Self {
        (0..exp).fold(Self::one(), |acc, _| &acc * self)
    }

    /// Substitutes `t -> k t` and rescales to keep the polynomial monic;
    /// the roots get multiplied by `k`.
    pub fn scale_roots(&self, k: &Rational) -> Self {
        let Some(deg) = self.degree() else {
            return self.clone();
        };
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let mut factor = int(1);
                for _ in i..deg {
                    factor *= k;
                }
                c.scale(&factor)
            })
            .collect();
        Self::new(coeffs)
    }
}

impl<'a> Mul<&'a Polynomial> for &'a Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        if self.coeffs.is_empty() || rhs.coeffs.is_empty() {
            return Polynomial::new(vec![]);
        }
        let mut out = vec![GaussianRational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += &(a * b);
            }
        }
        Polynomial::new(out)
    }
}
