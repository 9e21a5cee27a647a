//! Quantitative non-divergence experiments: masses of the set where the lattice
//! `g_tau z(x) u(phi(x)) Z^(n+1)` has a short vector, decay fits, sublevel profiles
//! of curve coordinate functions and the wedge-coordinate identity.

mod fit;
mod good;
mod wedge;

pub use fit::{fit_decay, DecayFit, FitOptions};
pub use good::{good_function_profile, GoodProfile, SublevelRow, TemplateFit};
pub use wedge::{check_prop_sup_lower_bounds, sup_abs_on, wedge_identity, wedge_identity_scaled, SupEnclosure, SupTarget, WedgeIdentity};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{
    serde_rational, serde_rational_pair, serde_rational_vec, to_f64, RInterval, Rational, HARD_PRECISION_LIMIT,
    MIN_PRECISION,
};
use crate::curves::{CurveModel, CurveSpec};
use crate::error::{Error, Result};
use crate::exterior::shortest_vector_interval;
use crate::flows::{lift_unipotent_interval, make_g};
use crate::fractal::{FractalMeasure, MeasureKind};
use num_traits::{Signed, Zero};

/// Cell budget of a run, as a power of two; admits depth 14 in base 3.
pub const MAX_CELLS_LOG2: u32 = 23;
/// Undecided mass above this fraction of `mu(J)` flags a run.
pub const GAP_FLAG_FRACTION: f64 = 0.05;

/// Working precision; cell width, not rounding, limits these enclosures.
pub const QND_DEFAULT_PRECISION: u32 = 64;

fn default_precision() -> u32 {
    QND_DEFAULT_PRECISION
}

fn one() -> Rational {
    Rational::from_integer(1.into())
}

/// Configuration of a non-divergence mass experiment.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QndExperiment {
    pub measure: FractalMeasure,
    pub curve: CurveSpec,
    /// Window `J` over which masses are taken.
    #[serde(rename = "J", with = "serde_rational_pair")]
    pub window: (Rational, Rational),
    /// Flow exponents; `n + 1` entries summing to zero.
    #[serde(with = "serde_rational_vec")]
    pub tau: Vec<Rational>,
    /// Short-vector radii.
    #[serde(with = "serde_rational_vec")]
    pub deltas: Vec<Rational>,
    /// Scale of the local estimate; recorded for the fitted bound.
    #[serde(default = "one", with = "serde_rational")]
    pub rho: Rational,
    /// Cylinder depth of the finest classification.
    pub depth: u32,
    /// Require `tau_1 > 0` and `tau_i < 0` for `i >= 3`.
    #[serde(default)]
    pub global: bool,
    /// Working precision of the interval enclosures, in bits.
    #[serde(default = "default_precision")]
    pub precision: u32,
}

impl QndExperiment {
    pub fn parse(s: &str) -> Result<Self> {
        let e: Self = serde_json::from_str(s)?;
        e.validate()?;
        Ok(e)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("serializable")
    }

    fn branching(&self) -> u32 {
        match self.measure.kind() {
            MeasureKind::Lebesgue { .. } => 2,
            MeasureKind::DigitCantor { digits, .. } => digits.len().max(2) as u32,
        }
    }

    /// Checks shapes, the flow exponents and the cylinder budget; returns the curve.
    pub fn validate(&self) -> Result<CurveModel> {
        let curve = self.curve.build()?;
        if self.tau.len() != curve.n() + 1 {
            return Err(Error::DimensionMismatch {
                expected: curve.n() + 1,
                found: self.tau.len(),
            });
        }
        if !self.tau.iter().sum::<Rational>().is_zero() {
            return Err(Error::InvalidConfig("tau must sum to zero".into()));
        }
        if self.global && (!self.tau[0].is_positive() || self.tau[2..].iter().any(|t| !t.is_negative())) {
            return Err(Error::InvalidConfig("global runs need tau_1 > 0 and tau_i < 0 for i >= 3".into()));
        }
        let (a, b) = &self.window;
        if a >= b {
            return Err(Error::InvalidConfig("window must have positive length".into()));
        }
        if !curve.in_domain(a) || !curve.in_domain(b) {
            return Err(Error::DomainError(format!("window [{a}, {b}]")));
        }
        if self.deltas.is_empty() || self.deltas.iter().any(|d| !d.is_positive()) {
            return Err(Error::InvalidConfig("deltas must be positive and nonempty".into()));
        }
        if !self.rho.is_positive() {
            return Err(Error::InvalidConfig("rho must be positive".into()));
        }
        let log2_cells = f64::from(self.depth) * f64::from(self.branching()).log2();
        if log2_cells > f64::from(MAX_CELLS_LOG2) {
            return Err(Error::InvalidConfig(format!(
                "depth {} gives about 2^{log2_cells:.1} cells; the limit is 2^{MAX_CELLS_LOG2}",
                self.depth
            )));
        }
        if !(MIN_PRECISION..=HARD_PRECISION_LIMIT).contains(&self.precision) {
            return Err(Error::InvalidConfig(format!(
                "precision must lie in {MIN_PRECISION}..={HARD_PRECISION_LIMIT}"
            )));
        }
        if self.measure.total_mass().is_zero() || self.measure.measure_interval(a, b).is_zero() {
            return Err(Error::InvalidMeasure("window carries no mass".into()));
        }
        Ok(curve)
    }
}

/// Mass bounds of `W(tau, J, delta)` for one radius.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WRow {
    #[serde(with = "serde_rational")]
    pub delta: Rational,
    #[serde(with = "serde_rational")]
    pub mass_lo: Rational,
    #[serde(with = "serde_rational")]
    pub mass_hi: Rational,
}

/// Result of [`measure_w`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WReport {
    pub rows: Vec<WRow>,
    #[serde(with = "serde_rational")]
    pub window_mass: Rational,
    pub depth: u32,
    /// Cells in the final partition.
    pub cells: usize,
    /// Cells left undecided for at least one radius.
    pub undecided_cells: usize,
}

impl WReport {
    /// Largest `(mass_hi - mass_lo) / mu(J)` over the grid.
    pub fn max_gap_fraction(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| to_f64(&((&r.mass_hi - &r.mass_lo) / &self.window_mass)))
            .fold(0.0, f64::max)
    }

    /// The bracket exceeds the accepted fraction of `mu(J)`.
    pub fn flagged(&self) -> bool {
        self.max_gap_fraction() >= GAP_FLAG_FRACTION
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["delta", "mass_lo", "mass_hi", "mass_lo_approx", "mass_hi_approx"])?;
        for r in &self.rows {
            w.write_record([
                crate::arith::format_rational(&r.delta),
                crate::arith::format_rational(&r.mass_lo),
                crate::arith::format_rational(&r.mass_hi),
                format!("{:.6e}", to_f64(&r.mass_lo)),
                format!("{:.6e}", to_f64(&r.mass_hi)),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
    }
}

/// Cylinder clipped to the window, with its mass and an enclosure of `lambda_1^2`.
#[derive(Clone, Debug)]
struct Cell {
    lo: Rational,
    hi: Rational,
    mass: Rational,
    n2_lo: Rational,
    n2_hi: Rational,
}

/// Enclosure of the squared first minimum over `x in [a, b]`, given the flow diagonal
/// enclosed at `prec` bits.
///
/// Cell width, not precision, limits these enclosures, so failures are refined
/// by subdivision rather than retried at higher precision.
fn lambda1_sq(curve: &CurveModel, diag: &[RInterval], a: &Rational, b: &Rational, prec: u32) -> Option<(Rational, Rational)> {
    let x = RInterval::from_rational_bounds(a, b, prec).ok()?;
    let m = lift_unipotent_interval(curve, &x).ok()?.with_precision(prec).scale_rows(diag);
    let sv = shortest_vector_interval(&m).ok()?;
    Some((sv.norm2.lo_rational().max(Rational::zero()), sv.norm2.hi_rational()))
}

/// A radius is decided on a cell when `delta^2` avoids `(n2_lo, n2_hi]`.
fn decided(c: &Cell, d2: &[Rational]) -> bool {
    d2.iter().all(|d| *d <= c.n2_lo || *d > c.n2_hi)
}

/// Lower and upper masses of `{x in J : the lattice has a nonzero vector shorter than delta}`.
///
/// Cylinders are refined level by level; a child's enclosure is intersected with its
/// parent's, so bounds at a deeper level nest inside those at a shallower one. A cell
/// decided for every radius is not refined further.
pub fn measure_w(exp: &QndExperiment) -> Result<WReport> {
    let curve = exp.validate()?;
    let dim = curve.n() + 1;
    let prec = exp.precision;
    let diag = make_g(&exp.tau)?.enclose(prec);
    let mu = &exp.measure;
    let (ja, jb) = &exp.window;
    let d2: Vec<Rational> = exp.deltas.iter().map(|d| d * d).collect();
    // Every unimodular lattice of rank d >= 2 has lambda_1^2 <= gamma_d < d.
    let minkowski = Rational::from_integer((dim as i64).into());

    let clip = |l: &Rational, r: &Rational| (l.max(ja).clone(), r.min(jb).clone());
    let enclose = |lo: Rational, hi: Rational, mass: Rational, parent: Option<(&Rational, &Rational)>| {
        let (mut n2_lo, mut n2_hi) = lambda1_sq(&curve, &diag, &lo, &hi, prec)
            .unwrap_or_else(|| (Rational::zero(), minkowski.clone()));
        if let Some((plo, phi)) = parent {
            n2_lo = n2_lo.max(plo.clone());
            n2_hi = n2_hi.min(phi.clone());
        }
        n2_hi = n2_hi.min(minkowski.clone());
        Cell { lo, hi, mass, n2_lo, n2_hi }
    };

    let mut active: Vec<Cell> = mu
        .cells(ja, jb, 0)
        .into_par_iter()
        .map(|(l, r, m)| {
            let (lo, hi) = clip(&l, &r);
            enclose(lo, hi, m, None)
        })
        .collect();
    let mut finished: Vec<Cell> = Vec::new();
    for level in 1..=exp.depth {
        let (done, open): (Vec<Cell>, Vec<Cell>) = active.into_iter().partition(|c| decided(c, &d2));
        finished.extend(done);
        if open.is_empty() {
            active = open;
            break;
        }
        active = open
            .into_par_iter()
            .flat_map_iter(|p| {
                mu.cells(&p.lo, &p.hi, level)
                    .into_iter()
                    .map(move |(l, r, m)| (l, r, m, p.n2_lo.clone(), p.n2_hi.clone()))
            })
            .map(|(l, r, m, plo, phi)| {
                let (lo, hi) = clip(&l, &r);
                enclose(lo, hi, m, Some((&plo, &phi)))
            })
            .collect();
    }
    finished.extend(active);
    finished.sort_by(|a, b| a.lo.cmp(&b.lo));

    let rows = exp
        .deltas
        .iter()
        .zip(&d2)
        .map(|(delta, dd)| {
            let certain_all = *dd >= minkowski;
            let mut lo = Rational::zero();
            let mut hi = Rational::zero();
            for c in &finished {
                if certain_all || c.n2_hi < *dd {
                    lo += &c.mass;
                }
                if certain_all || c.n2_lo < *dd {
                    hi += &c.mass;
                }
            }
            WRow {
                delta: delta.clone(),
                mass_lo: lo,
                mass_hi: hi,
            }
        })
        .collect();
    Ok(WReport {
        rows,
        window_mass: mu.measure_interval(ja, jb),
        depth: exp.depth,
        cells: finished.len(),
        undecided_cells: finished.iter().filter(|c| !decided(c, &d2)).count(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{int, rat};

    fn lebesgue_exp(t: Rational, deltas: Vec<Rational>, depth: u32) -> QndExperiment {
        QndExperiment {
            measure: FractalMeasure::lebesgue(int(0), int(1)).unwrap(),
            curve: CurveSpec::Preset("veronese:1".into()),
            window: (int(0), int(1)),
            tau: vec![t.clone(), -t],
            deltas,
            rho: int(1),
            depth,
            global: false,
            precision: QND_DEFAULT_PRECISION,
        }
    }

    #[test]
    fn radii_beyond_minkowski_cover_window() {
        let r = measure_w(&lebesgue_exp(int(2), vec![rat(3, 2), int(2)], 4)).unwrap();
        for row in &r.rows {
            assert_eq!((row.mass_lo.clone(), row.mass_hi.clone()), (int(1), int(1)));
        }
    }

    #[test]
    fn untwisted_lattice_has_no_short_vectors() {
        let r = measure_w(&lebesgue_exp(int(0), vec![rat(1, 4), rat(1, 2), rat(9, 10)], 6)).unwrap();
        for row in &r.rows {
            assert_eq!(row.mass_hi, int(0), "{row:?}");
        }
    }

    #[test]
    fn tau_must_sum_to_zero() {
        let mut e = lebesgue_exp(int(1), vec![rat(1, 2)], 4);
        e.tau = vec![int(1), int(1)];
        assert!(matches!(measure_w(&e), Err(Error::InvalidConfig(_))));
        let mut e = lebesgue_exp(int(1), vec![rat(1, 2)], 30);
        e.depth = 30;
        assert!(matches!(e.validate(), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn json_roundtrip() {
        let e = lebesgue_exp(rat(3, 2), vec![rat(1, 8), rat(1, 2)], 5);
        let back = QndExperiment::parse(&e.to_json()).unwrap();
        assert_eq!(back.to_json(), e.to_json());
    }
}
