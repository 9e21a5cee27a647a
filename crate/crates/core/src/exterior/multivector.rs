use std::collections::BTreeMap;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use super::matrix::SquareMap;
use crate::arith::{format_rational, parse_rational, Rational, Scalar};
use crate::error::{Error, Result};

/// Largest ambient dimension accepted from external input.
pub const MAX_DIM: usize = 12;

/// Increasing index sets of size `grade` from `0..dim`, in lexicographic order.
pub fn index_sets(dim: usize, grade: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, dim: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for i in start..=dim - left {
            cur.push(i);
            go(i + 1, dim, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if grade <= dim {
        go(0, dim, grade, &mut Vec::new(), &mut out);
    }
    out
}

/// Sign of the permutation sorting the concatenation of two disjoint increasing sets.
fn merge_sign(a: &[usize], b: &[usize]) -> bool {
    let inversions: usize = a.iter().map(|&i| b.iter().filter(|&&j| j < i).count()).sum();
    inversions % 2 == 1
}

/// Element of the `grade`-th exterior power of a `dim`-dimensional space,
/// stored in the basis `e_I` with `I` in lexicographic order.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiVector<T> {
    dim: usize,
    grade: usize,
    coords: Vec<T>,
}

impl<T: Scalar> MultiVector<T> {
    pub fn zero(dim: usize, grade: usize) -> Result<Self> {
        if grade > dim {
            return Err(Error::GradeOutOfRange { grade, dim });
        }
        let n = index_sets(dim, grade).len();
        Ok(MultiVector {
            dim,
            grade,
            coords: vec![T::zero(); n],
        })
    }

    pub fn scalar(dim: usize, value: T) -> Self {
        MultiVector {
            dim,
            grade: 0,
            coords: vec![value],
        }
    }

    pub fn from_vector(v: Vec<T>) -> Self {
        MultiVector {
            dim: v.len(),
            grade: 1,
            coords: v,
        }
    }

    /// Basis element `e_I` for an increasing index set.
    pub fn basis(dim: usize, set: &[usize]) -> Result<Self> {
        let mut m = Self::zero(dim, set.len())?;
        let k = m.position(set)?;
        m.coords[k] = T::one();
        Ok(m)
    }

    pub fn from_coords(dim: usize, grade: usize, coords: Vec<T>) -> Result<Self> {
        let expected = index_sets(dim, grade).len();
        if grade > dim {
            return Err(Error::GradeOutOfRange { grade, dim });
        }
        if coords.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: coords.len(),
            });
        }
        Ok(MultiVector { dim, grade, coords })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn grade(&self) -> usize {
        self.grade
    }

    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    pub fn sets(&self) -> Vec<Vec<usize>> {
        index_sets(self.dim, self.grade)
    }

    fn position(&self, set: &[usize]) -> Result<usize> {
        if set.len() != self.grade || set.windows(2).any(|w| w[0] >= w[1]) || set.iter().any(|&i| i >= self.dim) {
            return Err(Error::Parse(format!("invalid index set {set:?}")));
        }
        index_sets(self.dim, self.grade)
            .binary_search_by(|s| s.as_slice().cmp(set))
            .map_err(|_| Error::Parse(format!("invalid index set {set:?}")))
    }

    pub fn coord(&self, set: &[usize]) -> Result<&T> {
        let k = self.position(set)?;
        Ok(&self.coords[k])
    }

    pub fn set_coord(&mut self, set: &[usize], v: T) -> Result<()> {
        let k = self.position(set)?;
        self.coords[k] = v;
        Ok(())
    }

    pub fn is_exact_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_exact_zero())
    }

    fn same_shape(&self, o: &Self) -> Result<()> {
        if self.dim != o.dim || self.grade != o.grade {
            return Err(Error::DimensionMismatch {
                expected: self.coords.len(),
                found: o.coords.len(),
            });
        }
        Ok(())
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.same_shape(o)?;
        Ok(MultiVector {
            dim: self.dim,
            grade: self.grade,
            coords: self.coords.iter().zip(&o.coords).map(|(a, b)| a.plus(b)).collect(),
        })
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.add(&o.scale(&T::from_i64(-1)))
    }

    pub fn scale(&self, s: &T) -> Self {
        MultiVector {
            dim: self.dim,
            grade: self.grade,
            coords: self.coords.iter().map(|c| c.times(s)).collect(),
        }
    }

    pub fn wedge(&self, o: &Self) -> Result<Self> {
        if self.dim != o.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: o.dim,
            });
        }
        let grade = self.grade + o.grade;
        let mut out = Self::zero(self.dim, grade)?;
        let (sa, sb, so) = (self.sets(), o.sets(), out.sets());
        for (i, a) in sa.iter().enumerate() {
            if self.coords[i].is_exact_zero() {
                continue;
            }
            for (j, b) in sb.iter().enumerate() {
                if o.coords[j].is_exact_zero() || a.iter().any(|x| b.contains(x)) {
                    continue;
                }
                let mut u: Vec<usize> = a.iter().chain(b).copied().collect();
                u.sort_unstable();
                let k = so.binary_search(&u).expect("union is a valid set");
                let term = self.coords[i].times(&o.coords[j]);
                out.coords[k] = if merge_sign(a, b) {
                    out.coords[k].minus(&term)
                } else {
                    out.coords[k].plus(&term)
                };
            }
        }
        Ok(out)
    }

    /// `v_1 ^ ... ^ v_k`.
    pub fn wedge_all(vectors: &[Vec<T>]) -> Result<Self> {
        let first = vectors.first().ok_or_else(|| Error::Parse("empty wedge".into()))?;
        let mut acc = Self::from_vector(first.clone());
        for v in &vectors[1..] {
            if v.len() != acc.dim {
                return Err(Error::DimensionMismatch {
                    expected: acc.dim,
                    found: v.len(),
                });
            }
            acc = acc.wedge(&Self::from_vector(v.clone()))?;
        }
        Ok(acc)
    }

    /// Standard inner product in the orthonormal basis `e_I`.
    pub fn dot(&self, o: &Self) -> Result<T> {
        self.same_shape(o)?;
        let mut acc = T::zero();
        for (a, b) in self.coords.iter().zip(&o.coords) {
            if a.is_exact_zero() || b.is_exact_zero() {
                continue;
            }
            acc = acc.plus(&a.times(b));
        }
        Ok(acc)
    }

    pub fn norm2(&self) -> T {
        self.dot(self).expect("same shape")
    }

    /// Induced action of a linear map: coordinates of `(^k L) self`.
    pub fn apply_map(&self, l: &SquareMap<T>) -> Result<Self> {
        if l.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: l.dim(),
            });
        }
        let sets = self.sets();
        let mut out = Self::zero(self.dim, self.grade)?;
        for (i, row) in sets.iter().enumerate() {
            let mut acc = T::zero();
            for (j, col) in sets.iter().enumerate() {
                if self.coords[j].is_exact_zero() {
                    continue;
                }
                acc = acc.plus(&l.minor(row, col).times(&self.coords[j]));
            }
            out.coords[i] = acc;
        }
        Ok(out)
    }

    /// Splits `self = e_k ^ inner + rest` with `inner` and `rest` free of `e_k`.
    pub fn split_off(&self, k: usize) -> Result<(Self, Self)> {
        if self.grade == 0 {
            return Err(Error::GradeOutOfRange { grade: 0, dim: self.dim });
        }
        let mut inner = Self::zero(self.dim, self.grade - 1)?;
        let mut rest = Self::zero(self.dim, self.grade)?;
        for (set, c) in self.sets().iter().zip(&self.coords) {
            if let Some(pos) = set.iter().position(|&x| x == k) {
                let sub: Vec<usize> = set.iter().copied().filter(|&x| x != k).collect();
                // e_k ^ e_sub = (-1)^pos e_set
                let v = if pos % 2 == 1 { c.negated() } else { c.clone() };
                inner.set_coord(&sub, v)?;
            } else {
                rest.set_coord(set, c.clone())?;
            }
        }
        Ok((inner, rest))
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> MultiVector<U> {
        MultiVector {
            dim: self.dim,
            grade: self.grade,
            coords: self.coords.iter().map(f).collect(),
        }
    }
}

impl MultiVector<Rational> {
    pub fn from_int_vector(v: &[BigInt]) -> Self {
        Self::from_vector(v.iter().map(|x| Rational::from_integer(x.clone())).collect())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&MultiVectorRepr::from(self)).expect("serializable")
    }

    /// Parses `{"dim": d, "grade": r, "coords": {"1,3": "p/q", ...}}` with 1-based sparse keys.
    pub fn from_json(s: &str) -> Result<Self> {
        let repr: MultiVectorRepr = serde_json::from_str(s)?;
        repr.try_into()
    }
}

/// Serialized form with 1-based comma-separated index keys.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultiVectorRepr {
    pub dim: usize,
    pub grade: usize,
    pub coords: BTreeMap<String, String>,
}

impl From<&MultiVector<Rational>> for MultiVectorRepr {
    fn from(m: &MultiVector<Rational>) -> Self {
        let coords = m
            .sets()
            .iter()
            .zip(&m.coords)
            .map(|(s, c)| {
                let key = s.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(",");
                (key, format_rational(c))
            })
            .collect();
        MultiVectorRepr {
            dim: m.dim,
            grade: m.grade,
            coords,
        }
    }
}

impl TryFrom<MultiVectorRepr> for MultiVector<Rational> {
    type Error = Error;

    fn try_from(r: MultiVectorRepr) -> Result<Self> {
        if r.dim == 0 || r.dim > MAX_DIM {
            return Err(Error::Parse(format!("dimension {} out of range", r.dim)));
        }
        if r.grade == 0 || r.grade > r.dim {
            return Err(Error::GradeOutOfRange {
                grade: r.grade,
                dim: r.dim,
            });
        }
        let mut m = MultiVector::zero(r.dim, r.grade)?;
        for (key, val) in &r.coords {
            let set: Vec<usize> = key
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse::<usize>()
                        .ok()
                        .filter(|&i| i >= 1 && i <= r.dim)
                        .map(|i| i - 1)
                        .ok_or_else(|| Error::Parse(format!("invalid index key {key:?}")))
                })
                .collect::<Result<_>>()?;
            m.set_coord(&set, parse_rational(val)?)?;
        }
        Ok(m)
    }
}
