use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::make_u;
use crate::arith::Rational;
use crate::exterior::{for_each_short, MultiVector};
use crate::error::{Error, Result};

/// The two alternatives of the wedge decomposition.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Decomposition {
    /// A short lattice vector with a small second coordinate.
    CaseA {
        #[serde(with = "crate::arith::serde_bigint_vec")]
        coeffs: Vec<BigInt>,
        #[serde(with = "crate::arith::serde_rational_vec")]
        vector: Vec<Rational>,
    },
    /// `a_1 ^ ... ^ a_i = e_1 ^ lower + upper` with both parts free of `e_1`.
    CaseB {
        #[serde(skip)]
        lower: MultiVector<Rational>,
        #[serde(skip)]
        upper: MultiVector<Rational>,
    },
}

fn pow(r: &Rational, k: usize) -> Rational {
    num_traits::pow(r.clone(), k)
}

/// Splits a short wedge either into a short vector (case A) or along `e_1` (case B).
///
/// Requires `rho > 0`, `big_l >= 1` and `|u(theta e_1)(a_1 ^ ... ^ a_i)| <= rho^i` for
/// `theta` in `{0, big_l}`. Case A is an exhaustive search over the span lattice, so a
/// returned case B means case A is impossible. Both cases are verified exactly; if neither
/// verifies the result is `LemmaFailure`.
pub fn wedge_decompose(a: &[Vec<Rational>], rho: &Rational, big_l: &Rational) -> Result<Decomposition> {
    let i = a.len();
    let dim = a.first().map(Vec::len).ok_or_else(|| Error::PreconditionViolated("no vectors".into()))?;
    if dim < 2 || i >= dim {
        return Err(Error::PreconditionViolated("need 1 <= i < dim".into()));
    }
    if !rho.is_positive() || *big_l < Rational::one() {
        return Err(Error::PreconditionViolated("need rho > 0 and L >= 1".into()));
    }
    let w = MultiVector::wedge_all(a)?;
    if w.is_exact_zero() {
        return Err(Error::DependentInput);
    }
    let bound = pow(rho, 2 * i);
    let mut shift = vec![Rational::from_integer(0.into()); dim - 1];
    shift[0] = big_l.clone();
    let w_shift = w.apply_map(&make_u(&shift))?;
    if w.norm2() > bound || w_shift.norm2() > bound {
        return Err(Error::PreconditionViolated("wedge exceeds rho^i".into()));
    }

    let rho2 = rho * rho;
    let mut found = None;
    for_each_short(a, &rho2, |c, v| {
        if big_l * &v[1] * &v[1] <= rho2 {
            found = Some((c.to_vec(), v.to_vec()));
            true
        } else {
            false
        }
    })?;
    if let Some((coeffs, vector)) = found {
        return Ok(Decomposition::CaseA { coeffs, vector });
    }
    if i == 1 {
        return Err(Error::LemmaFailure("no short vector for a single generator".into()));
    }
    let (lower, upper) = w.split_off(0)?;
    let n = Rational::from_integer(((dim - 1) as i64).into());
    let upper_bound = Rational::from_integer(16.into()) * n * &bound / big_l;
    if lower.norm2() <= bound && upper.norm2() <= upper_bound {
        Ok(Decomposition::CaseB { lower, upper })
    } else {
        Err(Error::LemmaFailure(format!(
            "case B bounds fail for i = {i}, dim = {dim}"
        )))
    }
}

impl Decomposition {
    /// Re-verifies the returned alternative against the input.
    pub fn verify(&self, a: &[Vec<Rational>], rho: &Rational, big_l: &Rational) -> Result<bool> {
        let i = a.len();
        let bound = pow(rho, 2 * i);
        match self {
            Decomposition::CaseA { coeffs, vector } => {
                let dim = a[0].len();
                let combo: Vec<Rational> = (0..dim)
                    .map(|k| a.iter().zip(coeffs).map(|(v, c)| &v[k] * Rational::from_integer(c.clone())).sum())
                    .collect();
                let n2: Rational = vector.iter().map(|x| x * x).sum();
                Ok(combo == *vector
                    && coeffs.iter().any(|c| !c.is_zero())
                    && n2 <= rho * rho
                    && big_l * &vector[1] * &vector[1] <= rho * rho)
            }
            Decomposition::CaseB { lower, upper } => {
                let w = MultiVector::wedge_all(a)?;
                let e1 = MultiVector::basis(w.dim(), &[0])?;
                let rebuilt = e1.wedge(lower)?.add(upper)?;
                let free = lower.split_off(0)?.0.is_exact_zero() && upper.split_off(0)?.0.is_exact_zero();
                let n = Rational::from_integer(((w.dim() - 1) as i64).into());
                Ok(rebuilt == w
                    && free
                    && lower.norm2() <= bound
                    && upper.norm2() <= Rational::from_integer(16.into()) * n * &bound / big_l)
            }
        }
    }
}
