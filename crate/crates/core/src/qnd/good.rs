use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::fit::least_squares;
use super::wedge::sup_abs_on;
use crate::arith::{serde_rational, to_f64, Rational};
use crate::curves::Polynomial;
use crate::error::{Error, Result};
use crate::fractal::{FractalMeasure, MeasureKind};

const PREC: u32 = 128;
/// Cells allowed when bracketing the full supremum.
const SUP_CELLS: usize = 1 << 16;

/// Sublevel mass bounds `mu({x in B : |f(x)| < eps})` for one `eps`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SublevelRow {
    #[serde(with = "serde_rational")]
    pub eps: Rational,
    #[serde(with = "serde_rational")]
    pub mass_lo: Rational,
    #[serde(with = "serde_rational")]
    pub mass_hi: Rational,
}

/// Fitted template `ratio ~ c (eps / norm)^alpha`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TemplateFit {
    pub c: f64,
    pub alpha: f64,
    pub points: usize,
}

/// Sublevel profile of a polynomial against a measure on an interval.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoodProfile {
    pub rows: Vec<SublevelRow>,
    #[serde(with = "serde_rational")]
    pub mass_b: Rational,
    /// Bracket of the supremum of `|f|` over the support inside `B`.
    #[serde(with = "serde_rational")]
    pub sup_mu_lo: Rational,
    #[serde(with = "serde_rational")]
    pub sup_mu_hi: Rational,
    /// Bracket of the supremum of `|f|` over all of `B`.
    #[serde(with = "serde_rational")]
    pub sup_full_lo: Rational,
    #[serde(with = "serde_rational")]
    pub sup_full_hi: Rational,
    pub fit_mu: Option<TemplateFit>,
    pub fit_full: Option<TemplateFit>,
}

/// Extremes of the support inside the cell `[l, r]` clipped to `[a, b]`.
///
/// The upper extreme is exact only when the cell is not clipped on the right.
fn support_extremes(mu: &FractalMeasure, l: &Rational, r: &Rational, a: &Rational, b: &Rational) -> Result<(Rational, Rational, bool)> {
    let (cl, cr) = (l.max(a), r.min(b));
    match mu.kind() {
        MeasureKind::Lebesgue { lo, hi } => Ok((cl.max(lo).clone(), cr.min(hi).clone(), true)),
        MeasureKind::DigitCantor { .. } => {
            let (h0, h1) = mu.hull();
            let w = r - l;
            let s_lo = if l >= a {
                l + &w * &h0
            } else {
                mu.least_support_at_or_above(cl)?
                    .ok_or_else(|| Error::InvalidMeasure("cell without support".into()))?
            };
            if r <= b {
                Ok((s_lo, l + &w * &h1, true))
            } else {
                Ok((s_lo, cr.clone(), false))
            }
        }
    }
}

fn fit_template(rows: &[SublevelRow], mass_b: &Rational, norm: f64) -> Option<TemplateFit> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter_map(|row| {
            let mid = (&row.mass_lo + &row.mass_hi) / Rational::from_integer(2.into());
            let ratio = to_f64(&(mid / mass_b));
            let eps = to_f64(&row.eps);
            (ratio > 0.0 && ratio < 1.0 && eps > 0.0).then(|| ((eps / norm).ln(), ratio.ln()))
        })
        .unzip();
    if xs.len() < 2 {
        return None;
    }
    let (alpha, log_c) = least_squares(&xs, &ys)?;
    Some(TemplateFit {
        c: log_c.exp(),
        alpha,
        points: xs.len(),
    })
}

/// Sublevel masses of `|f|` at cylinder resolution, the two supremum norms, and the
/// fitted `(C, alpha)` for each normalisation.
///
/// A cell counts towards the lower mass when `|f| <= eps` on its support hull: the
/// level set `|f| = eps` of a nonconstant polynomial is finite and carries no mass.
pub fn good_function_profile(
    f: &Polynomial,
    mu: &FractalMeasure,
    ball: &(Rational, Rational),
    eps_grid: &[Rational],
    depth: u32,
) -> Result<GoodProfile> {
    let (a, b) = ball;
    if a >= b {
        return Err(Error::InvalidConfig("ball must have positive length".into()));
    }
    if f.is_zero() {
        return Err(Error::PreconditionViolated("f vanishes identically".into()));
    }
    if eps_grid.iter().any(|e| !e.is_positive()) {
        return Err(Error::InvalidConfig("eps must be positive".into()));
    }
    let mass_b = mu.measure_interval(a, b);
    if mass_b.is_zero() {
        return Err(Error::InvalidMeasure("ball carries no mass".into()));
    }
    let constant = f.degree() == Some(0);
    let mut ranges = Vec::new();
    let mut sup_mu_lo = Rational::zero();
    let mut sup_mu_hi = Rational::zero();
    for (l, r, m) in mu.cells(a, b, depth) {
        let (s_lo, s_hi, hi_exact) = support_extremes(mu, &l, &r, a, b)?;
        let (lo, hi, _) = f.abs_range(&s_lo, &s_hi, PREC);
        sup_mu_lo = sup_mu_lo.max(f.eval_rational(&s_lo).abs());
        if hi_exact {
            sup_mu_lo = sup_mu_lo.max(f.eval_rational(&s_hi).abs());
        }
        sup_mu_hi = sup_mu_hi.max(hi.clone());
        ranges.push((lo, hi, m));
    }
    let rows: Vec<SublevelRow> = eps_grid
        .iter()
        .map(|eps| {
            let mut lo = Rational::zero();
            let mut hi = Rational::zero();
            for (rlo, rhi, m) in &ranges {
                // A constant equal to eps is never below it.
                if if constant { rhi < eps } else { rhi <= eps } {
                    lo += m;
                }
                if rlo < eps {
                    hi += m;
                }
            }
            SublevelRow {
                eps: eps.clone(),
                mass_lo: lo,
                mass_hi: hi,
            }
        })
        .collect();
    let tol = Rational::new(One::one(), num_bigint::BigInt::from(1u64 << 40));
    let full = sup_abs_on(f, a, b, &tol, SUP_CELLS)?;
    let mid = |x: &Rational, y: &Rational| to_f64(&((x + y) / Rational::from_integer(2.into())));
    let fit_mu = fit_template(&rows, &mass_b, mid(&sup_mu_lo, &sup_mu_hi));
    let fit_full = fit_template(&rows, &mass_b, mid(&full.lo, &full.hi));
    Ok(GoodProfile {
        rows,
        mass_b,
        sup_mu_lo,
        sup_mu_hi,
        sup_full_lo: full.lo,
        sup_full_hi: full.hi,
        fit_mu,
        fit_full,
    })
}
