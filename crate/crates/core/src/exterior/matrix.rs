use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::arith::{Dyadic, RInterval, Rational, Scalar};
use crate::error::{Error, Result};

/// Square matrix stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct SquareMap<T> {
    dim: usize,
    data: Vec<T>,
}

impl<T: Scalar> SquareMap<T> {
    pub fn zeros(dim: usize) -> Self {
        SquareMap {
            dim,
            data: vec![T::zero(); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, T::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for r in rows {
            if r.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: r.len(),
                });
            }
            data.extend(r);
        }
        Ok(SquareMap { dim, data })
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[Vec<T>]) -> Result<Self> {
        let dim = cols.len();
        let mut m = Self::zeros(dim);
        for (j, c) in cols.iter().enumerate() {
            if c.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: c.len(),
                });
            }
            for (i, x) in c.iter().enumerate() {
                m.set(i, j, x.clone());
            }
        }
        Ok(m)
    }

    pub fn diagonal(d: &[T]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, x) in d.iter().enumerate() {
            m.set(i, i, x.clone());
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.dim + j] = v;
    }

    pub fn row(&self, i: usize) -> Vec<T> {
        self.data[i * self.dim..(i + 1) * self.dim].to_vec()
    }

    pub fn col(&self, j: usize) -> Vec<T> {
        (0..self.dim).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn columns(&self) -> Vec<Vec<T>> {
        (0..self.dim).map(|j| self.col(j)).collect()
    }

    pub fn entries(&self) -> &[T] {
        &self.data
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.dim, o.dim, "dimension mismatch");
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = T::zero();
                for k in 0..n {
                    let (a, b) = (self.get(i, k), o.get(k, j));
                    if a.is_exact_zero() || b.is_exact_zero() {
                        continue;
                    }
                    acc = acc.plus(&a.times(b));
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.dim, v.len(), "dimension mismatch");
        (0..self.dim)
            .map(|i| {
                let mut acc = T::zero();
                for (k, x) in v.iter().enumerate() {
                    let a = self.get(i, k);
                    if a.is_exact_zero() || x.is_exact_zero() {
                        continue;
                    }
                    acc = acc.plus(&a.times(x));
                }
                acc
            })
            .collect()
    }

    /// `M c` for an integer coefficient vector.
    pub fn mul_int_vec(&self, c: &[BigInt]) -> Vec<T> {
        let v: Vec<T> = c.iter().map(T::from_bigint).collect();
        self.mul_vec(&v)
    }

    pub fn transpose(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.set(j, i, self.get(i, j).clone());
            }
        }
        out
    }

    /// `diag(s) * self`.
    pub fn scale_rows(&self, s: &[T]) -> Self {
        let mut out = self.clone();
        for i in 0..self.dim {
            for j in 0..self.dim {
                out.set(i, j, s[i].times(self.get(i, j)));
            }
        }
        out
    }

    /// Determinant of the submatrix on the given rows and columns.
    pub fn minor(&self, rows: &[usize], cols: &[usize]) -> T {
        debug_assert_eq!(rows.len(), cols.len());
        match rows.len() {
            0 => T::one(),
            1 => self.get(rows[0], cols[0]).clone(),
            2 => {
                let a = self.get(rows[0], cols[0]).times(self.get(rows[1], cols[1]));
                let b = self.get(rows[0], cols[1]).times(self.get(rows[1], cols[0]));
                a.minus(&b)
            }
            _ => {
                let mut acc = T::zero();
                let mut rest: Vec<usize> = Vec::with_capacity(cols.len() - 1);
                for (k, &c) in cols.iter().enumerate() {
                    let a = self.get(rows[0], c);
                    if a.is_exact_zero() {
                        continue;
                    }
                    rest.clear();
                    rest.extend(cols.iter().enumerate().filter(|&(t, _)| t != k).map(|(_, &x)| x));
                    let term = a.times(&self.minor(&rows[1..], &rest));
                    acc = if k % 2 == 0 { acc.plus(&term) } else { acc.minus(&term) };
                }
                acc
            }
        }
    }

    pub fn det(&self) -> T {
        let idx: Vec<usize> = (0..self.dim).collect();
        self.minor(&idx, &idx)
    }

    pub fn map<U>(&self, f: impl Fn(&T) -> U) -> SquareMap<U> {
        SquareMap {
            dim: self.dim,
            data: self.data.iter().map(f).collect(),
        }
    }
}

impl SquareMap<Rational> {
    pub fn from_i64_rows(rows: &[&[i64]]) -> Self {
        let rows = rows
            .iter()
            .map(|r| r.iter().map(|&x| Rational::from_integer(BigInt::from(x))).collect())
            .collect();
        Self::from_rows(rows).expect("square input")
    }

    /// Gauss-Jordan inverse.
    pub fn inverse(&self) -> Result<Self> {
        let n = self.dim;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        for c in 0..n {
            let p = (c..n).find(|&r| !a.get(r, c).is_zero()).ok_or(Error::SingularBasis)?;
            if p != c {
                for j in 0..n {
                    a.data.swap(p * n + j, c * n + j);
                    inv.data.swap(p * n + j, c * n + j);
                }
            }
            let piv = a.get(c, c).clone();
            for j in 0..n {
                let x = a.get(c, j) / &piv;
                a.set(c, j, x);
                let y = inv.get(c, j) / &piv;
                inv.set(c, j, y);
            }
            for r in 0..n {
                if r == c || a.get(r, c).is_zero() {
                    continue;
                }
                let f = a.get(r, c).clone();
                for j in 0..n {
                    let x = a.get(r, j) - &f * a.get(c, j);
                    a.set(r, j, x);
                    let y = inv.get(r, j) - &f * inv.get(c, j);
                    inv.set(r, j, y);
                }
            }
        }
        Ok(inv)
    }

    /// Exact determinant by fraction-free elimination.
    pub fn det_exact(&self) -> Rational {
        let n = self.dim;
        let mut a = self.clone();
        let mut det = Rational::one();
        for c in 0..n {
            let Some(p) = (c..n).find(|&r| !a.get(r, c).is_zero()) else {
                return Rational::zero();
            };
            if p != c {
                for j in 0..n {
                    a.data.swap(p * n + j, c * n + j);
                }
                det = -det;
            }
            let piv = a.get(c, c).clone();
            det *= &piv;
            for r in c + 1..n {
                if a.get(r, c).is_zero() {
                    continue;
                }
                let f = a.get(r, c) / &piv;
                for j in c..n {
                    let x = a.get(r, j) - &f * a.get(c, j);
                    a.set(r, j, x);
                }
            }
        }
        det
    }

    pub fn to_interval(&self, prec: u32) -> SquareMap<RInterval> {
        self.map(|r| RInterval::from_rational(r, prec))
    }

    pub fn frobenius2(&self) -> Rational {
        self.data.iter().map(|x| x * x).sum()
    }
}

impl SquareMap<RInterval> {
    /// Entrywise midpoints.
    pub fn midpoint(&self) -> SquareMap<Rational> {
        self.map(|x| x.mid().to_rational())
    }

    /// Squared Frobenius norm of the entrywise radii.
    pub fn radius_frobenius2(&self) -> Rational {
        self.data
            .iter()
            .map(|x| {
                let r = x.radius().to_rational();
                &r * &r
            })
            .sum()
    }

    pub fn with_precision(&self, prec: u32) -> Self {
        self.map(|x| x.with_precision(prec))
    }

    pub fn contains(&self, m: &SquareMap<Rational>) -> bool {
        self.dim == m.dim && self.data.iter().zip(&m.data).all(|(a, b)| a.contains(b))
    }

    /// Largest entrywise radius.
    pub fn max_radius(&self) -> Dyadic {
        self.data
            .iter()
            .map(|x| x.radius())
            .max()
            .unwrap_or_else(Dyadic::zero)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{int, rat};

    #[test]
    fn inverse_and_det() {
        let m = SquareMap::from_i64_rows(&[&[2, 1, 0], &[1, 3, 1], &[0, 1, 4]]);
        assert_eq!(m.det(), int(18));
        assert_eq!(m.det_exact(), int(18));
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv), SquareMap::identity(3));
        let s = SquareMap::from_i64_rows(&[&[1, 2], &[2, 4]]);
        assert_eq!(s.inverse(), Err(Error::SingularBasis));
    }

    #[test]
    fn interval_product_contains_exact_product() {
        let a = SquareMap::from_rows(vec![vec![rat(1, 3), rat(2, 7)], vec![int(5), rat(-1, 9)]]).unwrap();
        let b = SquareMap::from_rows(vec![vec![rat(3, 11), int(1)], vec![rat(1, 13), rat(4, 5)]]).unwrap();
        let exact = a.mul(&b);
        let iv = a.to_interval(40).mul(&b.to_interval(40));
        assert!(iv.contains(&exact));
    }
}
