use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::lattice::lll_gram;
use super::multivector::MultiVector;
use crate::arith::{Rational, Scalar};
use crate::error::{Error, Result};

/// Finite collection of integer vectors of a common dimension.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntCollection {
    dim: usize,
    vectors: Vec<Vec<BigInt>>,
}

impl IntCollection {
    pub fn new(vectors: Vec<Vec<BigInt>>) -> Result<Self> {
        let dim = vectors.first().map(Vec::len).ok_or_else(|| Error::Parse("empty collection".into()))?;
        if let Some(v) = vectors.iter().find(|v| v.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: v.len(),
            });
        }
        Ok(IntCollection { dim, vectors })
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        Self::new(rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect())
            .expect("consistent dimensions")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[Vec<BigInt>] {
        &self.vectors
    }

    pub fn rational_vectors(&self) -> Vec<Vec<Rational>> {
        self.vectors
            .iter()
            .map(|v| v.iter().map(|x| Rational::from_integer(x.clone())).collect())
            .collect()
    }

    pub fn wedge(&self) -> MultiVector<Rational> {
        MultiVector::wedge_all(&self.rational_vectors()).expect("consistent dimensions")
    }
}

/// Result of unimodular column operations bringing the row matrix to `[H | 0]`.
struct ColumnReduction {
    /// Diagonal of the lower-triangular block `H`.
    pivots: Vec<BigInt>,
    /// Unimodular transform, stored as columns.
    transform: Vec<Vec<BigInt>>,
}

fn column_reduce(c: &IntCollection) -> Result<ColumnReduction> {
    let (r, d) = (c.len(), c.dim);
    if r > d {
        return Err(Error::DependentInput);
    }
    // a[j] is column j of the r x d matrix whose rows are the vectors.
    let mut a: Vec<Vec<BigInt>> = (0..d).map(|j| c.vectors.iter().map(|v| v[j].clone()).collect()).collect();
    let mut u: Vec<Vec<BigInt>> = (0..d)
        .map(|j| (0..d).map(|i| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect();
    let combine = |cols: &mut Vec<Vec<BigInt>>, i: usize, j: usize, x: &BigInt, y: &BigInt, p: &BigInt, q: &BigInt| {
        // (col_i, col_j) <- (x col_i + y col_j, p col_i + q col_j)
        let (ci, cj) = (cols[i].clone(), cols[j].clone());
        cols[i] = ci.iter().zip(&cj).map(|(s, t)| x * s + y * t).collect();
        cols[j] = ci.iter().zip(&cj).map(|(s, t)| p * s + q * t).collect();
    };
    let mut pivots = Vec::with_capacity(r);
    for i in 0..r {
        for j in i + 1..d {
            if a[j][i].is_zero() {
                continue;
            }
            if a[i][i].is_zero() {
                a.swap(i, j);
                u.swap(i, j);
                continue;
            }
            let (s, t) = (a[i][i].clone(), a[j][i].clone());
            let e = s.extended_gcd(&t);
            let (p, q) = (-(&t / &e.gcd), &s / &e.gcd);
            combine(&mut a, i, j, &e.x, &e.y, &p, &q);
            combine(&mut u, i, j, &e.x, &e.y, &p, &q);
        }
        if a[i][i].is_zero() {
            return Err(Error::DependentInput);
        }
        if a[i][i].is_negative() {
            a[i] = a[i].iter().map(|x| -x).collect();
            u[i] = u[i].iter().map(|x| -x).collect();
        }
        pivots.push(a[i][i].clone());
    }
    Ok(ColumnReduction { pivots, transform: u })
}

/// True when the vectors extend to a basis of the integer lattice.
pub fn is_primitive(c: &IntCollection) -> Result<bool> {
    Ok(column_reduce(c)?.pivots.iter().all(|p| p.is_one()))
}

/// Index of the lattice spanned by the vectors inside its rational saturation.
pub fn saturation_index(c: &IntCollection) -> Result<BigInt> {
    Ok(column_reduce(c)?.pivots.iter().product())
}

/// Integer basis of the orthogonal complement, LLL-reduced.
///
/// The result is primitive and, when the input is primitive, its wedge has the same norm.
pub fn primitive_dual(c: &IntCollection) -> Result<IntCollection> {
    let red = column_reduce(c)?;
    let kernel: Vec<Vec<BigInt>> = red.transform[c.len()..].to_vec();
    if kernel.is_empty() {
        return Err(Error::PreconditionViolated("full-rank collection has no complement".into()));
    }
    let gram: Vec<Vec<Rational>> = kernel
        .iter()
        .map(|a| {
            kernel
                .iter()
                .map(|b| Rational::from_integer(a.iter().zip(b).map(|(x, y)| x * y).sum()))
                .collect()
        })
        .collect();
    let t = lll_gram(&gram);
    let reduced = (0..kernel.len())
        .map(|j| {
            (0..c.dim)
                .map(|k| kernel.iter().zip(&t).map(|(v, row)| &v[k] * &row[j]).sum())
                .collect()
        })
        .collect();
    IntCollection::new(reduced)
}

/// Gram determinant `det(u_i . v_j)`, the inner product of `u_1 ^ ... ^ u_k` with `v_1 ^ ... ^ v_k`.
pub fn laplace_gram<T: Scalar>(u: &[Vec<T>], v: &[Vec<T>]) -> Result<T> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            found: v.len(),
        });
    }
    let rows: Vec<Vec<T>> = u
        .iter()
        .map(|a| {
            v.iter()
                .map(|b| a.iter().zip(b).fold(T::zero(), |acc, (x, y)| acc.plus(&x.times(y))))
                .collect()
        })
        .collect();
    Ok(super::matrix::SquareMap::from_rows(rows)?.det())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::int;
    use proptest::prelude::*;

    /// Independent check: gcd of all maximal minors equals the product of elementary divisors.
    fn gcd_of_maximal_minors(c: &IntCollection) -> BigInt {
        let w = c.wedge();
        w.coords().iter().fold(BigInt::zero(), |g, x| g.gcd(x.numer()))
    }

    #[test]
    fn primitivity_examples() {
        assert!(is_primitive(&IntCollection::from_i64(&[&[1, 0, 0], &[0, 1, 0]])).unwrap());
        assert!(!is_primitive(&IntCollection::from_i64(&[&[2, 0, 0]])).unwrap());
        assert!(!is_primitive(&IntCollection::from_i64(&[&[1, 1, 0], &[1, -1, 0]])).unwrap());
        assert_eq!(
            is_primitive(&IntCollection::from_i64(&[&[1, 2, 3], &[2, 4, 6]])),
            Err(Error::DependentInput)
        );
    }

    #[test]
    fn dual_of_single_vector() {
        let c = IntCollection::from_i64(&[&[2, 1, 0]]);
        let d = primitive_dual(&c).unwrap();
        assert_eq!(d.len(), 2);
        for u in d.vectors() {
            let s: BigInt = &u[0] * 2 + &u[1]; assert!(s.is_zero());
        }
        assert_eq!(d.wedge().norm2(), int(5));
        assert!(is_primitive(&d).unwrap());
    }

    #[test]
    fn laplace_matches_wedge_product() {
        let u = IntCollection::from_i64(&[&[1, 2, 0, 1], &[0, 1, 3, -1]]);
        let v = IntCollection::from_i64(&[&[2, 0, 1, 1], &[1, 1, 1, 0]]);
        let lhs = laplace_gram(&u.rational_vectors(), &v.rational_vectors()).unwrap();
        assert_eq!(lhs, u.wedge().dot(&v.wedge()).unwrap());
    }

    fn collection(k: usize, d: usize) -> impl Strategy<Value = Vec<Vec<i64>>> {
        proptest::collection::vec(proptest::collection::vec(-5i64..6, d), k)
    }

    proptest! {
        #[test]
        fn primitive_iff_minor_gcd_is_one(rows in collection(2, 4)) {
            let c = IntCollection::new(rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()).unwrap();
            let g = gcd_of_maximal_minors(&c);
            match is_primitive(&c) {
                Err(Error::DependentInput) => prop_assert!(g.is_zero()),
                Ok(p) => {
                    prop_assert_eq!(p, g.is_one());
                    prop_assert_eq!(saturation_index(&c).unwrap(), g);
                }
                Err(e) => prop_assert!(false, "unexpected {e}"),
            }
        }

        #[test]
        fn dual_is_orthogonal_with_equal_norm(rows in collection(2, 5)) {
            let c = IntCollection::new(rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()).unwrap();
            prop_assume!(is_primitive(&c).unwrap_or(false));
            let d = primitive_dual(&c).unwrap();
            prop_assert_eq!(d.len(), 3);
            prop_assert!(is_primitive(&d).unwrap());
            for u in d.vectors() {
                for v in c.vectors() {
                    prop_assert!(u.iter().zip(v).map(|(a, b)| a * b).sum::<BigInt>().is_zero());
                }
            }
            prop_assert_eq!(d.wedge().norm2(), c.wedge().norm2());
        }
    }
}
