use std::collections::BinaryHeap;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{exp_rational, serde_bigint_vec, serde_rational, RInterval, Rational};
use crate::curves::{CurveModel, Polynomial};
use crate::error::{Error, Result};
use crate::exterior::{index_sets, is_primitive, primitive_dual, saturation_index, IntCollection, MultiVector};
use crate::flows::{lift_unipotent, make_g, HMatrix};

/// Rigorous enclosure of `sup |p|` over an interval.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupEnclosure {
    /// Value attained at `argmax`.
    #[serde(with = "serde_rational")]
    pub lo: Rational,
    #[serde(with = "serde_rational")]
    pub hi: Rational,
    #[serde(with = "serde_rational")]
    pub argmax: Rational,
    /// Subintervals examined.
    pub cells: usize,
}

impl SupEnclosure {
    /// The supremum is certified positive.
    pub fn positive(&self) -> bool {
        self.lo.is_positive()
    }
}

#[derive(PartialEq, Eq, PartialOrd, Ord)]
struct Pending {
    hi: Rational,
    a: Rational,
    b: Rational,
}

/// Branch and bound for `sup_{[a, b]} |p|` until `hi - lo <= tol`.
pub fn sup_abs_on(p: &Polynomial, a: &Rational, b: &Rational, tol: &Rational, max_cells: usize) -> Result<SupEnclosure> {
    if a > b {
        return Err(Error::InvalidConfig("empty interval".into()));
    }
    const PREC: u32 = 128;
    let two = Rational::from_integer(2.into());
    let mut best = (p.eval_rational(a).abs(), a.clone());
    let fb = p.eval_rational(b).abs();
    if fb > best.0 {
        best = (fb, b.clone());
    }
    let mut heap = BinaryHeap::new();
    heap.push(Pending {
        hi: p.abs_range(a, b, PREC).1,
        a: a.clone(),
        b: b.clone(),
    });
    let mut cells = 1;
    loop {
        let top = heap.pop().expect("a cell always remains");
        if &top.hi - &best.0 <= *tol || top.a == top.b {
            return Ok(SupEnclosure {
                lo: best.0,
                hi: top.hi,
                argmax: best.1,
                cells,
            });
        }
        if cells >= max_cells {
            return Err(Error::ToleranceNotReached(format!(
                "sup bracket [{}, {}] after {cells} cells",
                best.0, top.hi
            )));
        }
        let m = (&top.a + &top.b) / &two;
        let fm = p.eval_rational(&m).abs();
        if fm > best.0 {
            best = (fm, m.clone());
        }
        for (l, r) in [(top.a, m.clone()), (m, top.b)] {
            let (_, hi, _) = p.abs_range(&l, &r, PREC);
            heap.push(Pending { hi, a: l, b: r });
            cells += 1;
        }
    }
}

/// Integer data paired with the lifted curve: `v` or `a ^ b`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SupTarget {
    Vector(#[serde(with = "serde_bigint_vec")] Vec<BigInt>),
    Bivector(
        #[serde(with = "serde_bigint_vec")] Vec<BigInt>,
        #[serde(with = "serde_bigint_vec")] Vec<BigInt>,
    ),
}

fn rationals(v: &[BigInt]) -> Vec<Rational> {
    v.iter().map(|x| Rational::from_integer(x.clone())).collect()
}

/// Enclosure of `sup_{I0} |(1, phi) . v|` or `sup_{I0} |((1, phi) ^ (1, phi)') . (a ^ b)|`.
pub fn check_prop_sup_lower_bounds(
    curve: &CurveModel,
    i0: &(Rational, Rational),
    target: &SupTarget,
    tol: &Rational,
    max_cells: usize,
) -> Result<SupEnclosure> {
    let (a, b) = i0;
    if !curve.in_domain(a) || !curve.in_domain(b) {
        return Err(Error::DomainError(format!("[{a}, {b}]")));
    }
    let p = match target {
        SupTarget::Vector(v) => {
            if v.iter().all(Zero::is_zero) {
                return Err(Error::PreconditionViolated("v must be nonzero".into()));
            }
            curve.pairing(&rationals(v))?
        }
        SupTarget::Bivector(u, v) => {
            let w = MultiVector::wedge_all(&[rationals(u), rationals(v)])?;
            if w.is_exact_zero() {
                return Err(Error::PreconditionViolated("a ^ b must be nonzero".into()));
            }
            curve.wronskian_pair(&rationals(u), &rationals(v))?
        }
    };
    sup_abs_on(&p, a, b, tol, max_cells)
}

/// Both sides of the wedge-coordinate identity at one point, with `tau = 0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WedgeIdentity {
    /// Selected coordinate set, zero-based; always contains `0` and `1`.
    pub index: Vec<usize>,
    #[serde(with = "serde_bigint_vec")]
    pub a: Vec<BigInt>,
    #[serde(with = "serde_bigint_vec")]
    pub b: Vec<BigInt>,
    /// `|(M v_1 ^ ... ^ M v_r)_I|` with `M = z(x) u(phi(x))`.
    #[serde(with = "serde_rational")]
    pub lhs: Rational,
    /// `|((1, phi) ^ (1, phi)') . (a ^ b)|` at `x`.
    #[serde(with = "serde_rational")]
    pub rhs: Rational,
}

impl WedgeIdentity {
    pub fn holds(&self) -> bool {
        self.lhs == self.rhs
    }
}

fn unit(dim: usize, i: usize) -> Vec<BigInt> {
    (0..dim).map(|k| BigInt::from(u8::from(k == i))).collect()
}

/// Selects the coordinate set and the integer pair `a, b` for a primitive collection of
/// `r >= 2` vectors, and evaluates both sides of the identity exactly at `x`.
pub fn wedge_identity(curve: &CurveModel, v: &IntCollection, x: &Rational) -> Result<WedgeIdentity> {
    let dim = curve.n() + 1;
    let r = v.len();
    if v.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: v.dim(),
        });
    }
    if r < 2 || r > dim {
        return Err(Error::PreconditionViolated(format!("collection size {r} outside 2..={dim}")));
    }
    if !is_primitive(v)? {
        return Err(Error::PreconditionViolated("collection is not primitive".into()));
    }
    let complement: Vec<Vec<BigInt>> = if r < dim { primitive_dual(v)?.vectors().to_vec() } else { Vec::new() };
    let (index, a, b) = if dim == 2 {
        (vec![0, 1], unit(2, 0), unit(2, 1))
    } else {
        // Extra indices come from {2, ..., n}; the wedge with the complement must not vanish.
        let mut chosen = None;
        for set in index_sets(dim - 2, r - 2) {
            let extra: Vec<usize> = set.iter().map(|i| i + 2).collect();
            let rows: Vec<Vec<BigInt>> = extra.iter().map(|&i| unit(dim, i)).chain(complement.iter().cloned()).collect();
            let w = IntCollection::new(rows)?;
            if !w.wedge().is_exact_zero() {
                chosen = Some((extra, w));
                break;
            }
        }
        let (extra, w) = chosen.ok_or_else(|| Error::LemmaFailure("no coordinate set completes the complement".into()))?;
        let pair = primitive_dual(&w)?;
        let k = saturation_index(&w)?;
        let a: Vec<BigInt> = pair.vectors()[0].iter().map(|c| c * &k).collect();
        let b = pair.vectors()[1].clone();
        let index: Vec<usize> = [0, 1].into_iter().chain(extra).collect();
        (index, a, b)
    };
    let m = lift_unipotent(curve, x)?;
    let images: Vec<Vec<Rational>> = v.vectors().iter().map(|c| m.mul_int_vec(c)).collect();
    let lhs = MultiVector::wedge_all(&images)?.coord(&index)?.abs();
    let rhs = curve.wronskian_pair(&rationals(&a), &rationals(&b))?.eval_rational(x).abs();
    Ok(WedgeIdentity { index, a, b, lhs, rhs })
}

/// Checks the identity for `g_tau z(x) u(phi(x))`: the interval enclosure of the
/// coordinate overlaps `e^(sum_I tau_i)` times the exact pairing.
pub fn wedge_identity_scaled(
    curve: &CurveModel,
    tau: &[Rational],
    v: &IntCollection,
    x: &Rational,
    prec: u32,
) -> Result<(WedgeIdentity, RInterval, RInterval)> {
    let id = wedge_identity(curve, v, x)?;
    let h = HMatrix {
        diag: make_g(tau)?,
        unipotent: lift_unipotent(curve, x)?,
    }
    .enclose(prec);
    let images: Vec<Vec<RInterval>> = v.vectors().iter().map(|c| h.mul_int_vec(c)).collect();
    let lhs = MultiVector::wedge_all(&images)?.coord(&id.index)?.abs();
    let shift: Rational = id.index.iter().map(|&i| tau[i].clone()).sum();
    let rhs = exp_rational(&shift, prec).mul_ref(&RInterval::from_rational(&id.rhs, prec));
    Ok((id, lhs, rhs))
}
