//! Shortest vectors of small lattices.
//!
//! Lattices are given by a basis whose columns span `L Z^d`. Enumeration is a
//! Fincke-Pohst search over the Gram matrix in exact rationals. Interval bases
//! are enumerated at their midpoint with a radius inflated by the perturbation
//! bound `||(B - M) c|| <= delta ||M^-1||_F ||M c||`, so no candidate is missed.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::matrix::SquareMap;
use crate::arith::{ceil, floor, Dyadic, RInterval, Rational, Scalar};
use crate::error::{Error, Result};

type Gram = Vec<Vec<Rational>>;

fn round_half_up(r: &Rational) -> BigInt {
    floor(&(r + Rational::new(BigInt::one(), BigInt::from(2))))
}

/// Gram-Schmidt data: `mu[i][j]` for `j < i` and squared lengths `b`.
fn gso(g: &Gram) -> Option<(Gram, Vec<Rational>)> {
    let n = g.len();
    let mut mu = vec![vec![Rational::zero(); n]; n];
    let mut b = vec![Rational::zero(); n];
    for i in 0..n {
        for j in 0..i {
            let mut s = g[i][j].clone();
            for l in 0..j {
                s -= &mu[j][l] * &mu[i][l] * &b[l];
            }
            mu[i][j] = s / &b[j];
        }
        let mut s = g[i][i].clone();
        for l in 0..i {
            s -= &mu[i][l] * &mu[i][l] * &b[l];
        }
        if !s.is_positive() {
            return None;
        }
        b[i] = s;
    }
    Some((mu, b))
}

/// LLL reduction (delta = 3/4) of a positive definite Gram matrix.
///
/// Returns the unimodular `T` with the reduced basis `b'_j = sum_i b_i T[i][j]`.
pub fn lll_gram(g0: &Gram) -> Vec<Vec<BigInt>> {
    let n = g0.len();
    let mut t: Vec<Vec<BigInt>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect();
    let mut g = g0.clone();
    let delta = Rational::new(BigInt::from(3), BigInt::from(4));
    let mut k = 1;
    let mut guard = 0usize;
    while k < n {
        guard += 1;
        if guard > 100_000 {
            break;
        }
        // Size-reduce b_k.
        for j in (0..k).rev() {
            let Some((mu, _)) = gso(&g) else { return t };
            let q = round_half_up(&mu[k][j]);
            if q.is_zero() {
                continue;
            }
            let qr = Rational::from_integer(q.clone());
            for row in t.iter_mut() {
                let v = &row[k] - &q * &row[j];
                row[k] = v;
            }
            // b_k <- b_k - q b_j
            let gkk = &g[k][k] - Rational::from_integer(BigInt::from(2)) * &qr * &g[k][j] + &qr * &qr * &g[j][j];
            for l in 0..n {
                if l != k {
                    let v = &g[k][l] - &qr * &g[j][l];
                    g[k][l] = v.clone();
                    g[l][k] = v;
                }
            }
            g[k][k] = gkk;
        }
        let Some((mu, b)) = gso(&g) else { return t };
        let lhs = &b[k];
        let rhs = (&delta - &mu[k][k - 1] * &mu[k][k - 1]) * &b[k - 1];
        if *lhs >= rhs {
            k += 1;
        } else {
            for row in t.iter_mut() {
                row.swap(k, k - 1);
            }
            g.swap(k, k - 1);
            for row in g.iter_mut() {
                row.swap(k, k - 1);
            }
            k = (k - 1).max(1);
        }
    }
    t
}

/// Enumerates nonzero `c` with `c^T G c <= radius`.
///
/// `visit` receives each candidate with its exact squared length and may shrink the radius.
fn enumerate(g: &Gram, radius: &mut Rational, visit: &mut dyn FnMut(&[BigInt], &Rational, &mut Rational)) -> Result<()> {
    let (mu, b) = gso(g).ok_or(Error::SingularBasis)?;
    let n = g.len();
    let mut c = vec![BigInt::zero(); n];
    fn rec(
        j: usize,
        partial: &Rational,
        mu: &Gram,
        b: &[Rational],
        c: &mut Vec<BigInt>,
        radius: &mut Rational,
        visit: &mut dyn FnMut(&[BigInt], &Rational, &mut Rational),
    ) {
        let n = c.len();
        let mut center = Rational::zero();
        for i in j + 1..n {
            if !c[i].is_zero() {
                center += &mu[i][j] * Rational::from_integer(c[i].clone());
            }
        }
        let rem = &*radius - partial;
        if rem.is_negative() {
            return;
        }
        let t = &rem / &b[j];
        let s: BigInt = num_integer::Roots::sqrt(&ceil(&t)) + 1;
        let neg_center = -&center;
        let lo = floor(&neg_center) - &s;
        let hi = ceil(&neg_center) + &s;
        let mut x = lo;
        while x <= hi {
            let y = Rational::from_integer(x.clone()) + &center;
            let v = partial + &b[j] * &y * &y;
            if v <= *radius {
                c[j] = x.clone();
                if j == 0 {
                    if c.iter().any(|z| !z.is_zero()) {
                        visit(c, &v, radius);
                    }
                } else {
                    rec(j - 1, &v, mu, b, c, radius, visit);
                }
            }
            x += 1;
        }
        c[j] = BigInt::zero();
    }
    if n > 0 {
        rec(n - 1, &Rational::zero(), &mu, &b, &mut c, radius, visit);
    }
    Ok(())
}

fn gram_of_columns<T: Scalar>(cols: &[Vec<T>]) -> Vec<Vec<T>> {
    cols.iter()
        .map(|a| {
            cols.iter()
                .map(|b| a.iter().zip(b).fold(T::zero(), |acc, (x, y)| acc.plus(&x.times(y))))
                .collect()
        })
        .collect()
}

fn apply_transform(c: &[BigInt], t: &[Vec<BigInt>]) -> Vec<BigInt> {
    (0..t.len())
        .map(|i| t[i].iter().zip(c).map(|(a, b)| a * b).sum())
        .collect()
}

fn transform_columns<T: Scalar>(cols: &[Vec<T>], t: &[Vec<BigInt>]) -> Vec<Vec<T>> {
    let n = t.len();
    (0..n)
        .map(|j| {
            let dim = cols[0].len();
            (0..dim)
                .map(|k| {
                    (0..n).fold(T::zero(), |acc, i| {
                        if t[i][j].is_zero() {
                            acc
                        } else {
                            acc.plus(&cols[i][k].times(&T::from_bigint(&t[i][j])))
                        }
                    })
                })
                .collect()
        })
        .collect()
}

/// A shortest nonzero lattice vector with its coefficient witness.
#[derive(Clone, Debug, PartialEq)]
pub struct ShortVector<T> {
    /// Squared Euclidean length (an enclosure of the minimum for interval bases).
    pub norm2: T,
    /// Integer coefficients in the given basis.
    pub coeffs: Vec<BigInt>,
    /// The lattice vector itself.
    pub vector: Vec<T>,
}

/// Shortest vector of a set of rational vectors spanning a lattice of rank `cols.len()`.
pub fn shortest_in_span(cols: &[Vec<Rational>]) -> Result<ShortVector<Rational>> {
    if cols.is_empty() {
        return Err(Error::Parse("empty basis".into()));
    }
    let g0 = gram_of_columns(cols);
    let t = lll_gram(&g0);
    let red = transform_columns(cols, &t);
    let g = gram_of_columns(&red);
    let mut radius = (0..g.len()).map(|i| g[i][i].clone()).min().expect("nonempty");
    let mut best: Option<(Rational, Vec<BigInt>)> = None;
    enumerate(&g, &mut radius.clone(), &mut |c, v, r| {
        if best.as_ref().is_none_or(|(bv, _)| v < bv) {
            best = Some((v.clone(), c.to_vec()));
            *r = v.clone();
        }
    })?;
    let (norm2, c_red) = best.ok_or(Error::SingularBasis)?;
    radius = norm2.clone();
    let coeffs = apply_transform(&c_red, &t);
    let vector = combine(cols, &coeffs);
    debug_assert_eq!(vector.iter().map(|x| x * x).sum::<Rational>(), radius);
    Ok(ShortVector { norm2, coeffs, vector })
}

fn combine<T: Scalar>(cols: &[Vec<T>], c: &[BigInt]) -> Vec<T> {
    let dim = cols[0].len();
    (0..dim)
        .map(|k| {
            cols.iter().zip(c).fold(T::zero(), |acc, (v, ci)| {
                if ci.is_zero() {
                    acc
                } else {
                    acc.plus(&v[k].times(&T::from_bigint(ci)))
                }
            })
        })
        .collect()
}

/// Calls `f` on every nonzero combination of `cols` with squared length at most `radius`,
/// passing the coefficients and the vector; stops early when `f` returns `true`.
pub fn for_each_short(
    cols: &[Vec<Rational>],
    radius: &Rational,
    mut f: impl FnMut(&[BigInt], &[Rational]) -> bool,
) -> Result<bool> {
    if cols.is_empty() {
        return Err(Error::Parse("empty basis".into()));
    }
    let t = lll_gram(&gram_of_columns(cols));
    let red = transform_columns(cols, &t);
    let g = gram_of_columns(&red);
    let mut r = radius.clone();
    let mut stop = false;
    enumerate(&g, &mut r, &mut |c, _v, r| {
        if stop {
            return;
        }
        let coeffs = apply_transform(c, &t);
        let v = combine(cols, &coeffs);
        if f(&coeffs, &v) {
            stop = true;
            // Shrink the radius to end the search quickly.
            *r = -Rational::one();
        }
    })?;
    Ok(stop)
}

/// Exact shortest vector of the lattice spanned by the columns of `b`.
pub fn shortest_vector_exact(b: &SquareMap<Rational>) -> Result<ShortVector<Rational>> {
    if b.det_exact().is_zero() {
        return Err(Error::SingularBasis);
    }
    shortest_in_span(&b.columns())
}

/// Enclosure of the shortest squared length over every basis in the interval matrix `b`.
///
/// Returns `Indeterminate` when the entries are too wide for the perturbation bound.
pub fn shortest_vector_interval(b: &SquareMap<RInterval>) -> Result<ShortVector<RInterval>> {
    let prec = b.entries().iter().map(RInterval::precision).max().unwrap_or(crate::arith::DEFAULT_PRECISION);
    let undecided = Error::Indeterminate { cap: prec };
    let mid = b.midpoint();
    let mid_cols = mid.columns();
    let t = lll_gram(&gram_of_columns(&mid_cols));
    let cols = transform_columns(&b.columns(), &t);
    let bt = SquareMap::from_columns(&cols)?;
    let m = bt.midpoint();
    let inv = m.inverse().map_err(|_| undecided.clone())?;
    // delta^2 kappa^2 with delta the radius norm and kappa = ||M^-1||_F.
    let dk2 = bt.radius_frobenius2() * inv.frobenius2();
    // The search radius grows like (1 - dk)^-2; past dk = 1/2 refining the box is cheaper.
    if &dk2 * Rational::from_integer(4.into()) > Rational::one() {
        return Err(undecided);
    }
    let dk = RInterval::from_rational(&dk2, prec + 8).sqrt()?.hi_rational();
    if dk >= Rational::one() {
        return Err(undecided);
    }
    let inflate = {
        let s = Rational::one() - &dk;
        (&s * &s).recip()
    };
    let m_cols = m.columns();
    let g = gram_of_columns(&m_cols);
    let len2 = |c: &[BigInt]| -> RInterval {
        combine(&cols, c).iter().fold(RInterval::zero().with_precision(prec), |acc, x| acc.add_ref(&x.sqr()))
    };
    let mut best_hi: Option<(Rational, Vec<BigInt>, RInterval)> = None;
    let mut min_lo: Option<Dyadic> = None;
    for j in 0..cols.len() {
        let mut e = vec![BigInt::zero(); cols.len()];
        e[j] = BigInt::one();
        let l = len2(&e);
        let hi = l.hi_rational();
        if best_hi.as_ref().is_none_or(|(h, _, _)| hi < *h) {
            best_hi = Some((hi, e, l));
        }
    }
    let mut radius = &best_hi.as_ref().expect("nonempty").0 * &inflate;
    enumerate(&g, &mut radius, &mut |c, _v, r| {
        let l = len2(c);
        let lo = l.lo().clone();
        if min_lo.as_ref().is_none_or(|m| lo < *m) {
            min_lo = Some(lo);
        }
        let hi = l.hi_rational();
        let better = best_hi.as_ref().is_none_or(|(h, _, _)| hi < *h);
        if better {
            *r = &hi * &inflate;
            best_hi = Some((hi, c.to_vec(), l));
        }
    })?;
    let (_, c_red, l) = best_hi.expect("nonempty");
    let lo = min_lo.map_or_else(|| l.lo().clone(), |m| m.min(l.lo().clone()));
    let lo = lo.max(Dyadic::zero());
    let norm2 = RInterval::new(lo, l.hi().clone(), prec)?;
    let coeffs = apply_transform(&c_red, &t);
    let vector = combine(&b.columns(), &coeffs);
    Ok(ShortVector { norm2, coeffs, vector })
}

/// Lattice types whose shortest vector can be computed.
pub trait LatticeScalar: Scalar {
    fn shortest_vector(b: &SquareMap<Self>) -> Result<ShortVector<Self>>;
    /// `Some(true)` when the shortest squared length is certainly at least `eps2`.
    fn decide_at_least(v: &Self, eps2: &Rational) -> Option<bool>;
}

impl LatticeScalar for Rational {
    fn shortest_vector(b: &SquareMap<Self>) -> Result<ShortVector<Self>> {
        shortest_vector_exact(b)
    }
    fn decide_at_least(v: &Self, eps2: &Rational) -> Option<bool> {
        Some(v >= eps2)
    }
}

impl LatticeScalar for RInterval {
    fn shortest_vector(b: &SquareMap<Self>) -> Result<ShortVector<Self>> {
        shortest_vector_interval(b)
    }
    fn decide_at_least(v: &Self, eps2: &Rational) -> Option<bool> {
        match v.cmp_rational(eps2) {
            Some(Ordering::Less) => Some(false),
            Some(_) => Some(true),
            None if v.lo_rational() >= *eps2 => Some(true),
            None => None,
        }
    }
}

pub fn shortest_vector<T: LatticeScalar>(b: &SquareMap<T>) -> Result<ShortVector<T>> {
    T::shortest_vector(b)
}

/// Membership of `b Z^d` in the set of lattices with no nonzero vector shorter than `sqrt(eps2)`.
///
/// `None` means the enclosure straddles the threshold.
pub fn in_k_eps<T: LatticeScalar>(b: &SquareMap<T>, eps2: &Rational) -> Result<Option<bool>> {
    let sv = shortest_vector(b)?;
    Ok(T::decide_at_least(&sv.norm2, eps2))
}

/// Nonzero combination of the given vectors no longer than `sqrt(i) covol^(1/i)`.
///
/// The returned vector is a shortest one, and the bound is verified exactly as
/// `(|v|^2 / i)^i <= det(Gram)`.
pub fn minkowski_short(vectors: &[Vec<Rational>]) -> Result<ShortVector<Rational>> {
    let sv = shortest_in_span(vectors)?;
    let i = vectors.len();
    let g = SquareMap::from_rows(gram_of_columns(vectors))?.det_exact();
    let lhs = num_traits::pow(&sv.norm2 / Rational::from_integer(BigInt::from(i)), i);
    if lhs > g {
        return Err(Error::PreconditionViolated("short vector exceeds the covolume bound".into()));
    }
    Ok(sv)
}

/// Minkowski-short vector of `transform * v_j` for integer vectors `v_j`.
pub fn minkowski_short_mapped(v: &super::intlin::IntCollection, transform: &SquareMap<Rational>) -> Result<ShortVector<Rational>> {
    let a: Vec<Vec<Rational>> = v.rational_vectors().iter().map(|x| transform.mul_vec(x)).collect();
    minkowski_short(&a)
}
