//! Polynomial curves `x -> (x, phi_2(x), ..., phi_n(x))`.

use serde::{Deserialize, Serialize};

use crate::arith::{
    format_rational, parse_rational, serde_rational_pair, RInterval, Rational, Scalar,
};
use crate::error::{Error, Result};
use num_traits::{One, Signed, Zero};

/// Largest supported degree.
pub const MAX_DEGREE: usize = 64;
/// Largest supported ambient dimension `n`.
pub const MAX_N: usize = 8;

/// Polynomial with rational coefficients, lowest degree first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polynomial {
    coeffs: Vec<Rational>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    pub fn from_i64(c: &[i64]) -> Self {
        Self::new(c.iter().map(|&x| crate::arith::int(x)).collect())
    }

    pub fn monomial(k: usize) -> Self {
        let mut c = vec![Rational::zero(); k + 1];
        c[k] = Rational::one();
        Self::new(c)
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Horner evaluation.
    pub fn eval<T: Scalar>(&self, x: &T, lift: impl Fn(&Rational) -> T) -> T {
        self.coeffs
            .iter()
            .rev()
            .fold(T::zero(), |acc, c| acc.times(x).plus(&lift(c)))
    }

    pub fn eval_rational(&self, x: &Rational) -> Rational {
        self.eval(x, Rational::clone)
    }

    pub fn eval_interval(&self, x: &RInterval) -> RInterval {
        let p = x.precision();
        self.eval(x, |c| RInterval::from_rational(c, p))
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * Rational::from_integer(k.into()))
                .collect(),
        )
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        let z = Rational::zero();
        Self::new(
            (0..n)
                .map(|i| self.coeffs.get(i).unwrap_or(&z) + o.coeffs.get(i).unwrap_or(&z))
                .collect(),
        )
    }

    pub fn scale(&self, s: &Rational) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::new(vec![]);
        }
        let mut c = vec![Rational::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Self::new(c)
    }

    /// Enclosure of the range over an interval via the mean-value form when tighter.
    pub fn range(&self, x: &RInterval) -> RInterval {
        let direct = self.eval_interval(x);
        if x.is_point() {
            return direct;
        }
        let p = x.precision();
        let m = RInterval::point(x.mid(), p);
        let centered = self
            .eval_interval(&m)
            .add_ref(&self.derivative().eval_interval(x).mul_ref(&x.sub_ref(&m)));
        direct.intersect(&centered).unwrap_or(direct)
    }

    fn leading(&self) -> Option<&Rational> {
        self.coeffs.last()
    }

    /// Quotient and remainder of Euclidean division by a nonzero divisor.
    pub fn div_rem(&self, d: &Self) -> Result<(Self, Self)> {
        let lead = d.leading().ok_or(Error::DivisionByZero)?;
        let dd = d.coeffs.len() - 1;
        let mut rem = self.coeffs.clone();
        let mut quot = vec![Rational::zero(); rem.len().saturating_sub(dd)];
        while rem.len() > dd && !rem.is_empty() {
            let k = rem.len() - 1 - dd;
            let c = rem.last().expect("nonempty") / lead;
            for (i, dc) in d.coeffs.iter().enumerate() {
                rem[k + i] -= &c * dc;
            }
            quot[k] = c;
            rem.pop();
            while rem.last().is_some_and(|c| c.is_zero()) {
                rem.pop();
            }
        }
        Ok((Self::new(quot), Self::new(rem)))
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, o: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.div_rem(&b).expect("nonzero divisor").1;
            a = b;
            b = r;
        }
        match a.leading() {
            Some(l) => a.scale(&l.recip()),
            None => a,
        }
    }

    /// Product of the distinct irreducible factors.
    pub fn squarefree(&self) -> Self {
        let g = self.gcd(&self.derivative());
        if g.degree().unwrap_or(0) == 0 {
            return self.clone();
        }
        self.div_rem(&g).expect("nonzero gcd").0
    }

    /// Number of distinct real roots in the open interval `(a, b)`.
    pub fn roots_in_open(&self, a: &Rational, b: &Rational) -> usize {
        if self.is_zero() || a >= b {
            return 0;
        }
        let mut h = self.squarefree();
        // Strip endpoint roots so the Sturm count applies to the open interval.
        for e in [a, b] {
            if h.eval_rational(e).is_zero() {
                h = h.div_rem(&Self::new(vec![-e.clone(), Rational::one()])).expect("linear divisor").0;
            }
        }
        if h.degree().unwrap_or(0) == 0 {
            return 0;
        }
        let mut chain = vec![h.clone(), h.derivative()];
        while !chain.last().expect("nonempty").is_zero() {
            let n = chain.len();
            let r = chain[n - 2].div_rem(&chain[n - 1]).expect("nonzero divisor").1;
            chain.push(r.scale(&-Rational::one()));
        }
        chain.pop();
        let variations = |x: &Rational| {
            let signs: Vec<bool> = chain
                .iter()
                .map(|p| p.eval_rational(x))
                .filter(|v| !v.is_zero())
                .map(|v| v > Rational::zero())
                .collect();
            signs.windows(2).filter(|w| w[0] != w[1]).count()
        };
        variations(a).saturating_sub(variations(b))
    }

    /// Range of `|p|` over `[a, b]`, exact when `p` is monotone there.
    ///
    /// Returns `(lo, hi, exact)`; otherwise an outward enclosure at `prec` bits.
    pub fn abs_range(&self, a: &Rational, b: &Rational, prec: u32) -> (Rational, Rational, bool) {
        let (fa, fb) = (self.eval_rational(a).abs(), self.eval_rational(b).abs());
        let (va, vb) = (self.eval_rational(a), self.eval_rational(b));
        if self.derivative().roots_in_open(a, b) == 0 {
            let crosses = (va.is_negative() && vb.is_positive()) || (va.is_positive() && vb.is_negative());
            let lo = if crosses { Rational::zero() } else { fa.clone().min(fb.clone()) };
            return (lo, fa.max(fb), true);
        }
        let x = RInterval::from_rational_bounds(a, b, prec).expect("ordered bounds");
        let r = self.range(&x).abs();
        let endpoint_max = fa.max(fb);
        (r.lo_rational().max(Rational::zero()), r.hi_rational().max(endpoint_max), false)
    }
}

/// Curve `x -> (phi_1, ..., phi_n)` with `phi_1(x) = x` on a closed domain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurveModel {
    components: Vec<Polynomial>,
    domain: (Rational, Rational),
}

impl CurveModel {
    pub fn new(components: Vec<Polynomial>, domain: (Rational, Rational)) -> Result<Self> {
        if components.is_empty() || components.len() > MAX_N {
            return Err(Error::DegenerateCurve(format!(
                "dimension {} outside 1..={MAX_N}",
                components.len()
            )));
        }
        if components[0] != Polynomial::monomial(1) {
            return Err(Error::DegenerateCurve("first component must be x".into()));
        }
        if let Some(p) = components.iter().find(|p| p.degree().unwrap_or(0) > MAX_DEGREE) {
            return Err(Error::DegenerateCurve(format!("degree {:?} too large", p.degree())));
        }
        if domain.0 >= domain.1 {
            return Err(Error::DegenerateCurve("empty domain".into()));
        }
        Ok(CurveModel { components, domain })
    }

    /// `x -> (x, x^2, ..., x^n)` on `[-10^6, 10^6]`.
    pub fn veronese(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_N {
            return Err(Error::DegenerateCurve(format!("dimension {n} outside 1..={MAX_N}")));
        }
        let big = Rational::from_integer(1_000_000.into());
        Self::new((1..=n).map(Polynomial::monomial).collect(), (-big.clone(), big))
    }

    pub fn n(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Polynomial] {
        &self.components
    }

    pub fn domain(&self) -> &(Rational, Rational) {
        &self.domain
    }

    pub fn in_domain(&self, x: &Rational) -> bool {
        &self.domain.0 <= x && x <= &self.domain.1
    }

    fn check_domain(&self, x: &Rational) -> Result<()> {
        if self.in_domain(x) {
            Ok(())
        } else {
            Err(Error::DomainError(format_rational(x)))
        }
    }

    fn check_domain_interval(&self, x: &RInterval) -> Result<()> {
        if self.in_domain(&x.lo_rational()) && self.in_domain(&x.hi_rational()) {
            Ok(())
        } else {
            Err(Error::DomainError(x.to_string()))
        }
    }

    /// `(phi_1(x), ..., phi_n(x))`.
    pub fn eval(&self, x: &Rational) -> Result<Vec<Rational>> {
        self.check_domain(x)?;
        Ok(self.components.iter().map(|p| p.eval_rational(x)).collect())
    }

    pub fn eval_derivative(&self, x: &Rational) -> Result<Vec<Rational>> {
        self.check_domain(x)?;
        Ok(self.components.iter().map(|p| p.derivative().eval_rational(x)).collect())
    }

    pub fn eval_interval(&self, x: &RInterval) -> Result<Vec<RInterval>> {
        self.check_domain_interval(x)?;
        Ok(self.components.iter().map(|p| p.range(x)).collect())
    }

    pub fn eval_derivative_interval(&self, x: &RInterval) -> Result<Vec<RInterval>> {
        self.check_domain_interval(x)?;
        Ok(self.components.iter().map(|p| p.derivative().range(x)).collect())
    }

    /// `(1, phi(x))` as polynomials.
    pub fn lifted(&self) -> Vec<Polynomial> {
        std::iter::once(Polynomial::monomial(0))
            .chain(self.components.iter().cloned())
            .collect()
    }

    /// `(0, phi'(x))` as polynomials.
    pub fn lifted_derivative(&self) -> Vec<Polynomial> {
        self.lifted().iter().map(Polynomial::derivative).collect()
    }

    /// `v . (1, phi(x))` as a polynomial.
    pub fn pairing(&self, v: &[Rational]) -> Result<Polynomial> {
        let lifted = self.lifted();
        if v.len() != lifted.len() {
            return Err(Error::DimensionMismatch {
                expected: lifted.len(),
                found: v.len(),
            });
        }
        Ok(lifted
            .iter()
            .zip(v)
            .fold(Polynomial::new(vec![]), |acc, (p, c)| acc.add(&p.scale(c))))
    }

    /// Wronskian `f_a f_b' - f_b f_a'` with `f_v = v . (1, phi)`.
    pub fn wronskian_pair(&self, a: &[Rational], b: &[Rational]) -> Result<Polynomial> {
        let fa = self.pairing(a)?;
        let fb = self.pairing(b)?;
        Ok(fa
            .mul(&fb.derivative())
            .add(&fb.mul(&fa.derivative()).scale(&-Rational::one())))
    }

    /// `1, phi_1, ..., phi_n` are linearly independent.
    pub fn nondegenerate_check(&self) -> bool {
        let lifted = self.lifted();
        let width = lifted.iter().map(|p| p.coeffs().len()).max().unwrap_or(0);
        let mut rows: Vec<Vec<Rational>> = lifted
            .iter()
            .map(|p| {
                let mut r = p.coeffs().to_vec();
                r.resize(width, Rational::zero());
                r
            })
            .collect();
        rank(&mut rows) == lifted.len()
    }

    /// Fails with `DegenerateCurve` unless the curve is nondegenerate.
    pub fn require_nondegenerate(&self) -> Result<()> {
        if self.nondegenerate_check() {
            Ok(())
        } else {
            Err(Error::DegenerateCurve("1, phi_1, ..., phi_n are linearly dependent".into()))
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&CurveRepr::from(self)).expect("serializable")
    }

    /// Parses either the JSON object form or a preset such as `"veronese:3"`.
    pub fn parse(s: &str) -> Result<Self> {
        let t = s.trim();
        if let Some(rest) = t.strip_prefix("veronese:") {
            let n: usize = rest
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("invalid preset {t:?}")))?;
            return Self::veronese(n);
        }
        let repr: CurveSpec = serde_json::from_str(t)?;
        repr.build()
    }
}

fn rank(rows: &mut [Vec<Rational>]) -> usize {
    let ncols = rows.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let f = &rows[i][c] / &rows[r][c];
                for k in c..ncols {
                    let v = &rows[i][k] - &f * &rows[r][k];
                    rows[i][k] = v;
                }
            }
        }
        r += 1;
    }
    r
}

/// JSON form: components as coefficient lists (lowest degree first) plus a domain.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveRepr {
    pub n: usize,
    pub components: Vec<Vec<String>>,
    #[serde(with = "serde_rational_pair")]
    pub domain: (Rational, Rational),
}

impl From<&CurveModel> for CurveRepr {
    fn from(c: &CurveModel) -> Self {
        CurveRepr {
            n: c.n(),
            components: c
                .components
                .iter()
                .map(|p| p.coeffs().iter().map(format_rational).collect())
                .collect(),
            domain: c.domain.clone(),
        }
    }
}

impl CurveRepr {
    pub fn build(&self) -> Result<CurveModel> {
        if self.components.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: self.components.len(),
            });
        }
        let comps = self
            .components
            .iter()
            .map(|c| {
                if c.len() > MAX_DEGREE + 1 {
                    return Err(Error::DegenerateCurve("degree too large".into()));
                }
                c.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>>>().map(Polynomial::new)
            })
            .collect::<Result<Vec<_>>>()?;
        CurveModel::new(comps, self.domain.clone())
    }
}

/// Curve as written in configuration: a preset string or the explicit object.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CurveSpec {
    Preset(String),
    Explicit(CurveRepr),
}

impl CurveSpec {
    pub fn build(&self) -> Result<CurveModel> {
        match self {
            CurveSpec::Preset(s) => {
                if s.trim_start().starts_with('{') {
                    return Err(Error::Parse("nested curve JSON".into()));
                }
                CurveModel::parse(s)
            }
            CurveSpec::Explicit(r) => r.build(),
        }
    }
}

impl From<&CurveModel> for CurveSpec {
    fn from(c: &CurveModel) -> Self {
        CurveSpec::Explicit(c.into())
    }
}

/// Sign-definiteness helper: `Some(true)` when `|p| > 0` on the whole interval.
pub fn nonvanishing_on(p: &Polynomial, x: &RInterval) -> Option<bool> {
    let r = p.range(x);
    if r.is_positive() || r.is_negative() {
        Some(true)
    } else if p.is_zero() {
        Some(false)
    } else {
        None
    }
}
