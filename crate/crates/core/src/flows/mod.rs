//! Diagonal and unipotent flows on unimodular lattices.
//!
//! The weighted flow stretches the first coordinate by `e^t` and contracts the
//! others by `e^(-r_i t)`. Times used by the construction are rational multiples
//! of `ln R`, so every diagonal entry is a rational power of `R` and stays exact
//! whenever the root is rational.

mod conj;
mod decompose;
mod orbit;

pub use conj::{check_conjugations, ConjugationReport, IdentityCheck};
pub use decompose::{wedge_decompose, Decomposition};
pub use orbit::{orbit_floor, orbit_trajectory, time_grid, Coordinate, OrbitSample};

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{
    exp_rational, format_rational, pow_rational, serde_rational, serde_rational_vec, RInterval,
    Rational, RationalPower, Scalar,
};
use crate::curves::CurveModel;
use crate::exterior::SquareMap;
use crate::error::{Error, Result};

/// Weight vector: positive, non-increasing, summing to one.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "WeightsRepr", into = "WeightsRepr")]
pub struct Weights(Vec<Rational>);

#[derive(Serialize, Deserialize)]
struct WeightsRepr(#[serde(with = "serde_rational_vec")] Vec<Rational>);

impl TryFrom<WeightsRepr> for Weights {
    type Error = Error;
    fn try_from(r: WeightsRepr) -> Result<Self> {
        Weights::new(r.0)
    }
}

impl From<Weights> for WeightsRepr {
    fn from(w: Weights) -> Self {
        WeightsRepr(w.0)
    }
}

impl Weights {
    pub fn new(r: Vec<Rational>) -> Result<Self> {
        if r.is_empty() || r.len() > crate::curves::MAX_N {
            return Err(Error::InvalidWeights(format!("need 1..={} weights", crate::curves::MAX_N)));
        }
        if r.iter().any(|x| !x.is_positive()) {
            return Err(Error::InvalidWeights("weights must be positive".into()));
        }
        if r.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidWeights("weights must be non-increasing".into()));
        }
        if r.iter().sum::<Rational>() != Rational::one() {
            return Err(Error::InvalidWeights("weights must sum to 1".into()));
        }
        Ok(Weights(r))
    }

    /// Equal weights `1/n`.
    pub fn uniform(n: usize) -> Result<Self> {
        Self::new(vec![Rational::new(1.into(), (n as i64).into()); n])
    }

    /// Parses a comma-separated list such as `"1/2,1/2"`.
    pub fn parse(s: &str) -> Result<Self> {
        Self::new(
            s.split(',')
                .map(crate::arith::parse_rational)
                .collect::<Result<Vec<_>>>()?,
        )
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[Rational] {
        &self.0
    }

    pub fn largest(&self) -> &Rational {
        &self.0[0]
    }

    pub fn smallest(&self) -> &Rational {
        &self.0[self.0.len() - 1]
    }

    pub fn to_text(&self) -> String {
        self.0.iter().map(format_rational).collect::<Vec<_>>().join(",")
    }
}

/// Flow parameters shared by the construction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowConfig {
    pub weights: Weights,
    /// Subdivision factor `R >= 2`.
    #[serde(rename = "R")]
    pub r_scale: u64,
    #[serde(with = "serde_rational")]
    pub eps: Rational,
    /// Smallest scale index used by the dynamical removals.
    #[serde(default = "one_u32")]
    pub m: u32,
}

fn one_u32() -> u32 {
    1
}

impl FlowConfig {
    pub fn new(weights: Weights, r_scale: u64, eps: Rational, m: u32) -> Result<Self> {
        let c = FlowConfig {
            weights,
            r_scale,
            eps,
            m,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.r_scale < 2 {
            return Err(Error::InvalidConfig("R must be at least 2".into()));
        }
        if self.m == 0 {
            return Err(Error::InvalidConfig("m must be positive".into()));
        }
        let n = Rational::from_integer((self.weights.n() as i64).into());
        let cap = self.weights.smallest() / (Rational::from_integer(3.into()) * n);
        if !self.eps.is_positive() || self.eps > cap {
            return Err(Error::InvalidConfig(format!(
                "eps must lie in (0, {}]",
                format_rational(&cap)
            )));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.weights.n()
    }

    pub fn r_rational(&self) -> Rational {
        Rational::from_integer(self.r_scale.into())
    }

    /// `beta / ln R = 1 / (1 + r_1)`.
    pub fn beta_coeff(&self) -> Rational {
        (Rational::one() + self.weights.largest()).recip()
    }

    /// `beta' / ln R = n / (n + 1)`.
    pub fn beta_prime_coeff(&self) -> Rational {
        let n = self.n() as i64;
        Rational::new(n.into(), (n + 1).into())
    }

    pub fn beta(&self, prec: u32) -> RInterval {
        crate::arith::ln_rational(&self.r_rational(), prec + 8)
            .expect("R > 1")
            .mul_ref(&RInterval::from_rational(&self.beta_coeff(), prec + 8))
            .with_precision(prec)
    }

    pub fn beta_prime(&self, prec: u32) -> RInterval {
        crate::arith::ln_rational(&self.r_rational(), prec + 8)
            .expect("R > 1")
            .mul_ref(&RInterval::from_rational(&self.beta_prime_coeff(), prec + 8))
            .with_precision(prec)
    }

    /// Squared survival threshold `e^(-2 eps beta l)` as a power of `R`.
    pub fn threshold2(&self, l: u32) -> RationalPower {
        let e = -Rational::from_integer(2.into())
            * &self.eps
            * Rational::from_integer(l.into())
            * self.beta_coeff();
        RationalPower::new(self.r_rational(), e).expect("R > 0")
    }
}

/// Base of a diagonal flow.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FlowBase {
    /// Entries are `R^e` for a rational `R > 1`.
    Scale(Rational),
    /// Entries are `e^t`.
    Natural,
}

/// Diagonal matrix `diag(base^e_0, ..., base^e_n)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiagFlow {
    pub base: FlowBase,
    pub exps: Vec<Rational>,
}

impl DiagFlow {
    pub fn dim(&self) -> usize {
        self.exps.len()
    }

    pub fn inverse(&self) -> Self {
        DiagFlow {
            base: self.base.clone(),
            exps: self.exps.iter().map(|e| -e).collect(),
        }
    }

    /// Product of two diagonal flows with the same base.
    pub fn compose(&self, o: &Self) -> Result<Self> {
        if self.base != o.base || self.dim() != o.dim() {
            return Err(Error::InvalidConfig("incompatible diagonal flows".into()));
        }
        Ok(DiagFlow {
            base: self.base.clone(),
            exps: self.exps.iter().zip(&o.exps).map(|(a, b)| a + b).collect(),
        })
    }

    /// Exact entries when every one is rational.
    pub fn exact(&self) -> Option<Vec<Rational>> {
        match &self.base {
            FlowBase::Scale(b) => self
                .exps
                .iter()
                .map(|e| RationalPower::new(b.clone(), e.clone()).ok()?.exact())
                .collect(),
            FlowBase::Natural => self
                .exps
                .iter()
                .map(|e| e.is_zero().then(Rational::one))
                .collect(),
        }
    }

    pub fn enclose(&self, prec: u32) -> Vec<RInterval> {
        self.exps
            .iter()
            .map(|e| match &self.base {
                FlowBase::Scale(b) => pow_rational(b, e, prec).expect("positive base"),
                FlowBase::Natural => exp_rational(e, prec),
            })
            .collect()
    }

    pub fn to_map_exact(&self) -> Option<SquareMap<Rational>> {
        self.exact().map(|d| SquareMap::diagonal(&d))
    }

    pub fn to_map(&self, prec: u32) -> SquareMap<RInterval> {
        SquareMap::diagonal(&self.enclose(prec))
    }
}

/// `a` at time `s * beta`, as powers of `R`.
pub fn make_a(cfg: &FlowConfig, s: &Rational) -> DiagFlow {
    let c = s * cfg.beta_coeff();
    let mut exps = vec![c.clone()];
    exps.extend(cfg.weights.as_slice().iter().map(|r| -(&c * r)));
    DiagFlow {
        base: FlowBase::Scale(cfg.r_rational()),
        exps,
    }
}

/// `b` at time `s * beta'`, as powers of `R`.
pub fn make_b(cfg: &FlowConfig, s: &Rational) -> DiagFlow {
    let n = cfg.n() as i64;
    let small = -(s / Rational::from_integer((n + 1).into()));
    let big = s * cfg.beta_prime_coeff();
    let mut exps = vec![small.clone(); cfg.n() + 1];
    exps[1] = big;
    DiagFlow {
        base: FlowBase::Scale(cfg.r_rational()),
        exps,
    }
}

/// `a(t)` for a real time `t`.
pub fn make_a_time(weights: &Weights, t: &Rational) -> DiagFlow {
    let mut exps = vec![t.clone()];
    exps.extend(weights.as_slice().iter().map(|r| -(t * r)));
    DiagFlow {
        base: FlowBase::Natural,
        exps,
    }
}

/// `b(t)` for a real time `t`.
pub fn make_b_time(n: usize, t: &Rational) -> DiagFlow {
    let small = -(t / Rational::from_integer((n as i64).into()));
    let mut exps = vec![small; n + 1];
    exps[1] = t.clone();
    DiagFlow {
        base: FlowBase::Natural,
        exps,
    }
}

/// `g_tau = diag(e^tau_i)` with `sum tau = 0`.
pub fn make_g(tau: &[Rational]) -> Result<DiagFlow> {
    if tau.iter().sum::<Rational>() != Rational::zero() {
        return Err(Error::InvalidConfig("tau must sum to zero".into()));
    }
    Ok(DiagFlow {
        base: FlowBase::Natural,
        exps: tau.to_vec(),
    })
}

/// Unipotent map with first row `(1, x)`.
pub fn make_u<T: Scalar>(x: &[T]) -> SquareMap<T> {
    let mut m = SquareMap::identity(x.len() + 1);
    for (i, v) in x.iter().enumerate() {
        m.set(0, i + 1, v.clone());
    }
    m
}

/// Unipotent map with second row `(0, 1, y_2, ..., y_n)`; `y` has `n - 1` entries.
pub fn make_u1<T: Scalar>(y: &[T]) -> SquareMap<T> {
    let mut m = SquareMap::identity(y.len() + 2);
    for (i, v) in y.iter().enumerate() {
        m.set(1, i + 2, v.clone());
    }
    m
}

/// `z(x) = u1(phi_2'(x), ..., phi_n'(x))`.
pub fn make_z(curve: &CurveModel, x: &Rational) -> Result<SquareMap<Rational>> {
    let d = curve.eval_derivative(x)?;
    Ok(make_u1(&d[1..]))
}

pub fn make_z_interval(curve: &CurveModel, x: &RInterval) -> Result<SquareMap<RInterval>> {
    let d = curve.eval_derivative_interval(x)?;
    Ok(make_u1(&d[1..]))
}

/// `z(x) u(phi(x))`; its rows are `(1, phi)`, `(0, phi')` and `e_i` for `i >= 3`.
pub fn lift_unipotent(curve: &CurveModel, x: &Rational) -> Result<SquareMap<Rational>> {
    Ok(make_z(curve, x)?.mul(&make_u(&curve.eval(x)?)))
}

pub fn lift_unipotent_interval(curve: &CurveModel, x: &RInterval) -> Result<SquareMap<RInterval>> {
    Ok(make_z_interval(curve, x)?.mul(&make_u(&curve.eval_interval(x)?)))
}

/// `H = D M` with a diagonal flow `D` and a unipotent part `M`.
#[derive(Clone, Debug, PartialEq)]
pub struct HMatrix<T> {
    pub diag: DiagFlow,
    pub unipotent: SquareMap<T>,
}

impl HMatrix<Rational> {
    pub fn exact(&self) -> Option<SquareMap<Rational>> {
        self.diag.exact().map(|d| self.unipotent.scale_rows(&d))
    }

    pub fn enclose(&self, prec: u32) -> SquareMap<RInterval> {
        self.unipotent.to_interval(prec).scale_rows(&self.diag.enclose(prec))
    }
}

impl HMatrix<RInterval> {
    pub fn enclose(&self, prec: u32) -> SquareMap<RInterval> {
        self.unipotent.with_precision(prec).scale_rows(&self.diag.enclose(prec))
    }
}

/// Diagonal part `b(l beta') a((q + 1) beta)` of the renormalising matrix.
pub fn h_diagonal(cfg: &FlowConfig, l: u32, q: i64) -> DiagFlow {
    let a = make_a(cfg, &Rational::from_integer((q + 1).into()));
    let b = make_b(cfg, &Rational::from_integer(l.into()));
    b.compose(&a).expect("same base")
}

/// `H_{l,q}(x) = b(l beta') a((q + 1) beta) z(x) u(phi(x))`.
pub fn make_h(cfg: &FlowConfig, curve: &CurveModel, l: u32, q: i64, x: &Rational) -> Result<HMatrix<Rational>> {
    if curve.n() != cfg.n() {
        return Err(Error::DimensionMismatch {
            expected: cfg.n(),
            found: curve.n(),
        });
    }
    Ok(HMatrix {
        diag: h_diagonal(cfg, l, q),
        unipotent: lift_unipotent(curve, x)?,
    })
}

/// Interval version of [`make_h`] over a range of `x`.
pub fn make_h_interval(
    cfg: &FlowConfig,
    curve: &CurveModel,
    l: u32,
    q: i64,
    x: &RInterval,
) -> Result<HMatrix<RInterval>> {
    if curve.n() != cfg.n() {
        return Err(Error::DimensionMismatch {
            expected: cfg.n(),
            found: curve.n(),
        });
    }
    Ok(HMatrix {
        diag: h_diagonal(cfg, l, q),
        unipotent: lift_unipotent_interval(curve, x)?,
    })
}
