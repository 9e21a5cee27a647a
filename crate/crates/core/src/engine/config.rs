use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};

use crate::arith::{
    format_rational, serde_rational, serde_rational_pair, PrecisionPolicy, Rational, DEFAULT_PRECISION,
    DEFAULT_PRECISION_CAP, HARD_PRECISION_LIMIT,
};
use crate::curves::{CurveModel, CurveSpec};
use crate::error::{Error, Result};
use crate::flows::{FlowConfig, Weights};
use crate::fractal::FractalMeasure;

/// Largest accepted `q_max`.
pub const MAX_DEPTH: u32 = 64;

/// How the "for some x in I" quantifier of the dynamical condition is evaluated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Test the child midpoint only.
    #[default]
    Midpoint,
    /// Enclose the whole child; keep it only when every point is certified.
    Interval,
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "midpoint" => Ok(Mode::Midpoint),
            "interval" => Ok(Mode::Interval),
            _ => Err(Error::Parse(format!("unknown mode {s:?}"))),
        }
    }
}

/// Which surviving interval of the last generation anchors the certificate chain.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    #[default]
    Leftmost,
    MaxMeasure,
}

/// Ranges of the scale index `l` used by the two dynamical families.
///
/// The deep family (`p = 0`) uses `max(m, ceil(q / zero_lower_div)) <= l <= floor(q / zero_upper_div)`.
/// The shallow family uses `m <= l <= ceil(q / shallow_div) - 1` with `p = q - step l`, and only
/// while `p > q / 2`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ThresholdSchedule {
    pub zero_lower_div: u32,
    pub zero_upper_div: u32,
    pub shallow_div: u32,
    pub step: u32,
    /// Dynamical removals start at this `q`.
    pub activation: u32,
}

impl Default for ThresholdSchedule {
    fn default() -> Self {
        ThresholdSchedule {
            zero_lower_div: 8,
            zero_upper_div: 4,
            shallow_div: 8,
            step: 4,
            activation: 0,
        }
    }
}

impl ThresholdSchedule {
    /// A schedule that never removes dynamically.
    pub fn inactive() -> Self {
        ThresholdSchedule {
            activation: u32::MAX,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.zero_lower_div == 0 || self.zero_upper_div == 0 || self.shallow_div == 0 || self.step == 0 {
            return Err(Error::InvalidConfig("schedule divisors must be positive".into()));
        }
        // p = q - step l > q/2 needs l < q/(2 step); the cut must not exceed it.
        if self.shallow_div < 2 * self.step {
            return Err(Error::InvalidConfig(format!(
                "shallow_div must be at least 2 * step = {}",
                2 * self.step
            )));
        }
        Ok(())
    }

    /// Scale indices of the `p = 0` family at step `q`, ascending.
    pub fn zero_family(&self, q: u32, m: u32) -> Vec<u32> {
        if q < self.activation {
            return Vec::new();
        }
        let lo = m.max(q.div_ceil(self.zero_lower_div));
        let hi = q / self.zero_upper_div;
        (lo..=hi).collect()
    }

    /// `(p, l)` pairs of the shallow family at step `q`, ordered by increasing `p`.
    pub fn shallow_family(&self, q: u32, m: u32) -> Vec<(u32, u32)> {
        if q < self.activation {
            return Vec::new();
        }
        let cut = q.div_ceil(self.shallow_div);
        (m..cut)
            .rev()
            .filter_map(|l| {
                let p = q.checked_sub(self.step * l)?;
                (2 * p > q && p < q).then_some((p, l))
            })
            .collect()
    }
}

/// Everything a construction run needs.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub weights: Weights,
    #[serde(rename = "R")]
    pub r_scale: u64,
    #[serde(with = "serde_rational")]
    pub eps: Rational,
    #[serde(default = "one")]
    pub m: u32,
    pub curve: CurveSpec,
    pub measure: FractalMeasure,
    #[serde(rename = "I0", with = "serde_rational_pair")]
    pub i0: (Rational, Rational),
    pub q_max: u32,
    #[serde(default)]
    pub schedule: ThresholdSchedule,
    #[serde(default = "default_precision")]
    pub precision: u32,
    #[serde(default = "default_cap")]
    pub precision_cap: u32,
    #[serde(default)]
    pub mode: Mode,
    /// Parents expanded per generation; the rest are kept but not split.
    #[serde(default = "default_frontier")]
    pub frontier_cap: usize,
    #[serde(default)]
    pub strategy: Strategy,
    /// Horizon of the badness estimate on the extracted point.
    #[serde(default = "default_certify_q")]
    pub certify_q: u64,
}

fn one() -> u32 {
    1
}
fn default_precision() -> u32 {
    DEFAULT_PRECISION
}
fn default_cap() -> u32 {
    DEFAULT_PRECISION_CAP
}
fn default_frontier() -> usize {
    512
}
fn default_certify_q() -> u64 {
    10_000
}

impl RunConfig {
    /// Defaults for every optional field.
    pub fn new(flow: &FlowConfig, curve: &CurveModel, measure: FractalMeasure, i0: (Rational, Rational), q_max: u32) -> Self {
        RunConfig {
            weights: flow.weights.clone(),
            r_scale: flow.r_scale,
            eps: flow.eps.clone(),
            m: flow.m,
            curve: CurveSpec::from(curve),
            measure,
            i0,
            q_max,
            schedule: ThresholdSchedule::default(),
            precision: DEFAULT_PRECISION,
            precision_cap: DEFAULT_PRECISION_CAP,
            mode: Mode::Midpoint,
            frontier_cap: default_frontier(),
            strategy: Strategy::Leftmost,
            certify_q: default_certify_q(),
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("serializable")
    }

    pub fn flow(&self) -> Result<FlowConfig> {
        FlowConfig::new(self.weights.clone(), self.r_scale, self.eps.clone(), self.m)
    }

    pub fn policy(&self) -> PrecisionPolicy {
        PrecisionPolicy::new(self.precision, self.precision_cap)
    }

    /// Structural checks that do not depend on the measure or the curve.
    pub fn validate_shape(&self) -> Result<()> {
        self.flow()?;
        self.schedule.validate()?;
        if self.i0.0 >= self.i0.1 {
            return Err(Error::InvalidConfig("I0 must have positive length".into()));
        }
        if self.q_max > MAX_DEPTH {
            return Err(Error::InvalidConfig(format!("q_max must be at most {MAX_DEPTH}")));
        }
        // Grid indices are u128: R^(q_max + 1) must fit.
        let bits = 64 - self.r_scale.leading_zeros();
        if u64::from(bits) * u64::from(self.q_max + 1) > 126 {
            return Err(Error::InvalidConfig("R^(q_max + 1) exceeds the index range".into()));
        }
        if self.frontier_cap == 0 {
            return Err(Error::InvalidConfig("frontier_cap must be positive".into()));
        }
        if self.certify_q == 0 {
            return Err(Error::InvalidConfig("certify_q must be positive".into()));
        }
        if self.precision > HARD_PRECISION_LIMIT || self.precision_cap > HARD_PRECISION_LIMIT {
            return Err(Error::InvalidConfig(format!("precision above {HARD_PRECISION_LIMIT}")));
        }
        Ok(())
    }

    pub fn i0_length(&self) -> Rational {
        &self.i0.1 - &self.i0.0
    }
}

/// Admissibility of `I0` for the chosen measure and curve.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Admissibility {
    /// `3 |I0| <= rho0`.
    pub short_enough: bool,
    /// `3^(n+1) I0` (same centre) lies in the curve domain.
    pub dilation_in_domain: bool,
    /// `mu(I0) >= (3C)^-1 |I0|^alpha`.
    pub heavy_enough: bool,
    /// The centre of `I0` lies in the support.
    pub centred_on_support: bool,
    /// `R^alpha >= 21 C^2`.
    pub large_r: bool,
}

impl Admissibility {
    /// The hard requirements; centring and large `R` are only reported.
    pub fn require(&self) -> Result<()> {
        if !self.short_enough {
            return Err(Error::PreconditionViolated("3|I0| exceeds rho0".into()));
        }
        if !self.dilation_in_domain {
            return Err(Error::PreconditionViolated("3^(n+1) I0 leaves the curve domain".into()));
        }
        if !self.heavy_enough {
            return Err(Error::PreconditionViolated("mu(I0) is below (3C)^-1 |I0|^alpha".into()));
        }
        Ok(())
    }
}

pub(crate) fn admissibility(cfg: &RunConfig, curve: &CurveModel, policy: PrecisionPolicy) -> Result<Admissibility> {
    let mu = &cfg.measure;
    let len = cfg.i0_length();
    let three = Rational::from_integer(3.into());
    let short_enough = &three * &len <= *mu.rho0();
    let centre = (&cfg.i0.0 + &cfg.i0.1) / Rational::from_integer(2.into());
    let half = num_traits::pow(three.clone(), curve.n() + 1) * &len / Rational::from_integer(2.into());
    let dilation_in_domain = curve.in_domain(&(&centre - &half)) && curve.in_domain(&(&centre + &half));
    let mass = mu.measure_interval(&cfg.i0.0, &cfg.i0.1);
    let k = (&three * mu.c()).recip();
    let heavy_enough = mass.is_positive() && mu.alpha().cmp_scaled(&mass, &k, &len, policy)?.is_ge();
    let centred_on_support = mu.contains_point(&centre);
    let c2 = Rational::from_integer(21.into()) * mu.c() * mu.c();
    let large_r = mu
        .alpha()
        .cmp_scaled(&c2, &Rational::one(), &Rational::from_integer(cfg.r_scale.into()), policy)?
        .is_le();
    Ok(Admissibility {
        short_enough,
        dilation_in_domain,
        heavy_enough,
        centred_on_support,
        large_r,
    })
}

/// Human-readable one-line summary of a config.
pub fn describe(cfg: &RunConfig) -> String {
    format!(
        "r=({}) R={} eps={} I0=[{}, {}] q_max={} measure={}",
        cfg.weights.to_text(),
        cfg.r_scale,
        format_rational(&cfg.eps),
        format_rational(&cfg.i0.0),
        format_rational(&cfg.i0.1),
        cfg.q_max,
        cfg.measure.describe()
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;

    #[test]
    fn default_schedule_ranges() {
        let s = ThresholdSchedule::default();
        assert!(s.zero_family(3, 1).is_empty());
        assert_eq!(s.zero_family(8, 1), vec![1, 2]);
        assert_eq!(s.zero_family(16, 1), vec![2, 3, 4]);
        assert!(s.shallow_family(8, 1).is_empty());
        // l < 17/8 gives l in {1, 2}; p = 17 - 4l ascending.
        assert_eq!(s.shallow_family(17, 1), vec![(9, 2), (13, 1)]);
        for q in 0..200 {
            for (p, l) in s.shallow_family(q, 1) {
                assert!(2 * p > q && p < q && p == q - 4 * l);
                assert!(l <= q.div_ceil(8));
            }
        }
    }

    #[test]
    fn inactive_schedule_is_empty() {
        let s = ThresholdSchedule::inactive();
        assert!(s.zero_family(100, 1).is_empty() && s.shallow_family(100, 1).is_empty());
    }

    #[test]
    fn inconsistent_cut_rejected() {
        let s = ThresholdSchedule {
            shallow_div: 4,
            ..ThresholdSchedule::default()
        };
        assert!(s.validate().is_err());
    }

    #[test]
    fn config_json_roundtrip() {
        let flow = FlowConfig::new(Weights::uniform(1).unwrap(), 16, rat(1, 9), 1).unwrap();
        let curve = CurveModel::veronese(1).unwrap();
        let cfg = RunConfig::new(&flow, &curve, FractalMeasure::middle_third(), (rat(1, 12), rat(5, 12)), 3);
        let back = RunConfig::parse(&cfg.to_json()).unwrap();
        assert_eq!(back.to_json(), cfg.to_json());
        assert!(RunConfig::parse(r#"{"weights":["1"]}"#).is_err());
    }
}
