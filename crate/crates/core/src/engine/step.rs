use std::collections::BTreeMap;

use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::{Mode, ThresholdSchedule};
use crate::arith::{to_f64, PrecisionPolicy, RInterval, Rational, RationalPower};
use crate::curves::CurveModel;
use crate::error::{Error, Result};
use crate::exterior::{shortest_vector_exact, shortest_vector_interval, SquareMap};
use crate::flows::{make_h, make_h_interval, FlowConfig};
use crate::fractal::FractalMeasure;

/// Grid geometry: interval `k` at depth `q` is `[lo + k w_q, lo + (k + 1) w_q]` with `w_q = |I0| / R^q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Grid {
    pub lo: Rational,
    pub len: Rational,
    pub r: u64,
}

impl Grid {
    pub fn new(i0: &(Rational, Rational), r: u64) -> Result<Self> {
        if r < 2 {
            return Err(Error::InvalidConfig("R must be at least 2".into()));
        }
        if i0.0 >= i0.1 {
            return Err(Error::InvalidConfig("I0 must have positive length".into()));
        }
        Ok(Grid {
            lo: i0.0.clone(),
            len: &i0.1 - &i0.0,
            r,
        })
    }

    pub fn width(&self, depth: u32) -> Rational {
        &self.len / Rational::from_integer(num_traits::pow(num_bigint::BigInt::from(self.r), depth as usize))
    }

    pub fn endpoints(&self, depth: u32, index: u128) -> (Rational, Rational) {
        let w = self.width(depth);
        let a = &self.lo + &w * Rational::from_integer(index.into());
        let b = &a + &w;
        (a, b)
    }

    pub fn midpoint(&self, depth: u32, index: u128) -> Rational {
        let (a, b) = self.endpoints(depth, index);
        (a + b) / Rational::from_integer(2.into())
    }

    /// Index of the depth-`to` interval containing depth-`from` interval `index`.
    pub fn ancestor(&self, index: u128, from: u32, to: u32) -> u128 {
        debug_assert!(to <= from);
        index / u128::from(self.r).pow(from - to)
    }

    /// The `R` children of `index` at the next depth, left to right.
    pub fn children(&self, index: u128) -> impl Iterator<Item = u128> {
        let r = u128::from(self.r);
        (0..r).map(move |j| index * r + j)
    }
}

/// Kept intervals at one depth, by grid index (sorted, unique).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Generation {
    pub q: u32,
    pub kept: Vec<u128>,
}

impl Generation {
    pub fn initial() -> Self {
        Generation { q: 0, kept: vec![0] }
    }
}

/// Whether a dynamical removal clears the margin `norm < threshold / 3`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// Every point of the interval violates the inflated threshold.
    Certain,
    /// Only the tested point is known to violate the threshold.
    Boundary,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Reason {
    Measure,
    Dynamical { p: u32, l: u32, regime: Regime },
    /// SVP undecided at the precision cap; removed conservatively.
    Indeterminate { p: u32, l: u32 },
}

impl Reason {
    /// Removal family `p` at step `q`.
    pub fn family(&self, q: u32) -> u32 {
        match self {
            Reason::Measure => q,
            Reason::Dynamical { p, .. } | Reason::Indeterminate { p, .. } => *p,
        }
    }

    fn code(&self) -> String {
        match self {
            Reason::Measure => "m".into(),
            Reason::Dynamical { p, l, regime } => format!("d{p}:{l}:{regime:?}"),
            Reason::Indeterminate { p, l } => format!("i{p}:{l}"),
        }
    }
}

/// One removed child at depth `q + 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Removal {
    pub depth: u32,
    pub index: u128,
    pub reason: Reason,
    /// Squared shortest length bounds for dynamical removals.
    pub norm2_lo: Option<f64>,
    pub norm2_hi: Option<f64>,
    pub threshold2: Option<f64>,
}

/// Result of one generation step.
#[derive(Clone, Debug)]
pub struct StepOutcome {
    pub next: Generation,
    pub removed: Vec<Removal>,
    /// Parents of the current generation that were kept but not split.
    pub pruned: usize,
    /// Dynamical tests performed.
    pub tests: u64,
    pub indeterminate: u64,
    /// Per-family maxima of removals below a single ancestor: `(p, count)`.
    pub family_maxima: BTreeMap<u32, u64>,
    pub hash: String,
}

/// Evenly strided subset of at most `cap` entries, keeping the first.
pub fn stride_select(kept: &[u128], cap: usize) -> Vec<u128> {
    if kept.len() <= cap {
        return kept.to_vec();
    }
    (0..cap).map(|k| kept[k * kept.len() / cap]).collect()
}

/// `mu(I) < (3C)^-1 |I|^alpha`, decided exactly.
pub fn removal_measure(mu: &FractalMeasure, a: &Rational, b: &Rational, policy: PrecisionPolicy) -> Result<bool> {
    MassFloor::new(mu, &(b - a), policy).is_light(mu, a, b)
}

/// The floor `(3C)^-1 w^alpha` for intervals of one fixed width `w`.
///
/// All children of a step share their width, so the enclosure is computed once.
pub struct MassFloor {
    k: Rational,
    width: Rational,
    enclosure: Option<RInterval>,
    policy: PrecisionPolicy,
    alpha: crate::fractal::Alpha,
}

impl MassFloor {
    pub fn new(mu: &FractalMeasure, width: &Rational, policy: PrecisionPolicy) -> Self {
        let k = (Rational::from_integer(3.into()) * mu.c()).recip();
        let alpha = mu.alpha();
        let enclosure = (alpha.power_exact(width).is_none())
            .then(|| RInterval::from_rational(&k, policy.start).mul_ref(&alpha.power_enclose(width, policy.start)));
        MassFloor {
            k,
            width: width.clone(),
            enclosure,
            policy,
            alpha,
        }
    }

    /// True when `mu([a, b]) < (3C)^-1 |b - a|^alpha`; `b - a` must equal the stored width.
    pub fn is_light(&self, mu: &FractalMeasure, a: &Rational, b: &Rational) -> Result<bool> {
        debug_assert_eq!(&(b - a), &self.width);
        let mass = mu.measure_interval(a, b);
        if let Some(e) = &self.enclosure {
            if let Some(o) = e.cmp_rational(&mass) {
                return Ok(o.is_gt());
            }
        }
        Ok(self.alpha.cmp_scaled(&mass, &self.k, &self.width, self.policy)?.is_lt())
    }
}

/// Outcome of one shortest-vector test against a threshold.
#[derive(Clone, Debug, PartialEq)]
pub enum Verdict {
    Above,
    Below { regime: Regime, lo: f64, hi: f64 },
    Undecided,
}

fn decide_exact(norm2: &Rational, thr: &RationalPower) -> Verdict {
    if thr.cmp_rational(norm2).is_le() {
        return Verdict::Above;
    }
    let nine = Rational::from_integer(9.into()) * norm2;
    let regime = if thr.cmp_rational(&nine).is_gt() { Regime::Certain } else { Regime::Boundary };
    let v = to_f64(norm2);
    Verdict::Below { regime, lo: v, hi: v }
}

fn decide_interval(norm2: &RInterval, thr: &RationalPower, prec: u32) -> Option<Verdict> {
    let t = thr.enclose(prec);
    match norm2.cmp_certain(&t)? {
        std::cmp::Ordering::Less => {
            let nine = norm2.mul_ref(&RInterval::from_int(9));
            let regime = match nine.cmp_certain(&t) {
                Some(std::cmp::Ordering::Less) => Regime::Certain,
                _ => Regime::Boundary,
            };
            Some(Verdict::Below {
                regime,
                lo: to_f64(&norm2.lo_rational()),
                hi: to_f64(&norm2.hi_rational()),
            })
        }
        _ => Some(Verdict::Above),
    }
}

/// Shortest vector of `H_{l,q}(x) Z^(n+1)` against `e^(-eps beta l)`, on squared lengths.
pub fn test_point(
    flow: &FlowConfig,
    curve: &CurveModel,
    l: u32,
    q: u32,
    x: &Rational,
    policy: PrecisionPolicy,
) -> Result<Verdict> {
    let h = make_h(flow, curve, l, i64::from(q), x)?;
    let thr = flow.threshold2(l);
    if let Some(m) = h.exact() {
        let sv = shortest_vector_exact(&m)?;
        return Ok(decide_exact(&sv.norm2, &thr));
    }
    Ok(policy
        .escalate(|prec| {
            let sv = shortest_vector_interval(&h.enclose(prec)).ok()?;
            decide_interval(&sv.norm2, &thr, prec)
        })
        .unwrap_or(Verdict::Undecided))
}

/// Interval-mode test: `Below` when some point of `[a, b]` violates the threshold,
/// `Above` when every point is certified, `Undecided` otherwise.
pub fn test_interval(
    flow: &FlowConfig,
    curve: &CurveModel,
    l: u32,
    q: u32,
    a: &Rational,
    b: &Rational,
    policy: PrecisionPolicy,
    splits: u32,
) -> Result<Verdict> {
    let thr = flow.threshold2(l);
    let whole = policy.escalate(|prec| {
        let x = RInterval::from_rational_bounds(a, b, prec).ok()?;
        let h = make_h_interval(flow, curve, l, i64::from(q), &x).ok()?;
        let m: SquareMap<RInterval> = h.enclose(prec);
        let sv = shortest_vector_interval(&m).ok()?;
        decide_interval(&sv.norm2, &thr, prec)
    });
    match whole {
        Ok(Verdict::Above) => return Ok(Verdict::Above),
        Ok(Verdict::Below { lo, hi, .. }) => {
            return Ok(Verdict::Below {
                regime: Regime::Certain,
                lo,
                hi,
            })
        }
        _ => {}
    }
    // A single failing point decides existence.
    let mid = (a + b) / Rational::from_integer(2.into());
    if let below @ Verdict::Below { .. } = test_point(flow, curve, l, q, &mid, policy)? {
        return Ok(below);
    }
    if splits == 0 {
        return Ok(Verdict::Undecided);
    }
    let left = test_interval(flow, curve, l, q, a, &mid, policy, splits - 1)?;
    if matches!(left, Verdict::Below { .. }) {
        return Ok(left);
    }
    let right = test_interval(flow, curve, l, q, &mid, b, policy, splits - 1)?;
    Ok(match (left, right) {
        (_, r @ Verdict::Below { .. }) => r,
        (Verdict::Above, Verdict::Above) => Verdict::Above,
        _ => Verdict::Undecided,
    })
}

/// Everything `step` needs besides the generation itself.
pub struct StepContext<'a> {
    pub flow: &'a FlowConfig,
    pub curve: &'a CurveModel,
    pub measure: &'a FractalMeasure,
    pub grid: &'a Grid,
    pub schedule: &'a ThresholdSchedule,
    pub mode: Mode,
    pub policy: PrecisionPolicy,
    pub frontier_cap: usize,
}

struct ChildResult {
    index: u128,
    removal: Option<Removal>,
    tests: u64,
}

fn classify(ctx: &StepContext<'_>, floor: &MassFloor, q: u32, index: u128) -> Result<ChildResult> {
    let depth = q + 1;
    let (a, b) = ctx.grid.endpoints(depth, index);
    let removal = |reason, lo, hi, thr| Removal {
        depth,
        index,
        reason,
        norm2_lo: lo,
        norm2_hi: hi,
        threshold2: thr,
    };
    if floor.is_light(ctx.measure, &a, &b)? {
        return Ok(ChildResult {
            index,
            removal: Some(removal(Reason::Measure, None, None, None)),
            tests: 0,
        });
    }
    // p = 0 first, then increasing p: each family excludes every earlier one.
    let m = ctx.flow.m;
    let order: Vec<(u32, u32)> = ctx
        .schedule
        .zero_family(q, m)
        .into_iter()
        .map(|l| (0, l))
        .chain(ctx.schedule.shallow_family(q, m))
        .collect();
    let mid = ctx.grid.midpoint(depth, index);
    let mut tests = 0;
    for (p, l) in order {
        tests += 1;
        let verdict = match ctx.mode {
            Mode::Midpoint => test_point(ctx.flow, ctx.curve, l, q, &mid, ctx.policy)?,
            Mode::Interval => test_interval(ctx.flow, ctx.curve, l, q, &a, &b, ctx.policy, 3)?,
        };
        let thr = to_f64_power(&ctx.flow.threshold2(l));
        match verdict {
            Verdict::Above => {}
            Verdict::Below { regime, lo, hi } => {
                return Ok(ChildResult {
                    index,
                    removal: Some(removal(Reason::Dynamical { p, l, regime }, Some(lo), Some(hi), Some(thr))),
                    tests,
                })
            }
            Verdict::Undecided => {
                return Ok(ChildResult {
                    index,
                    removal: Some(removal(Reason::Indeterminate { p, l }, None, None, Some(thr))),
                    tests,
                })
            }
        }
    }
    Ok(ChildResult {
        index,
        removal: None,
        tests,
    })
}

fn to_f64_power(p: &RationalPower) -> f64 {
    p.enclose(64).to_f64()
}

/// Splits the (frontier-capped) generation `gen`, applies both removal families and
/// returns the next generation.
pub fn step(ctx: &StepContext<'_>, gen: &Generation) -> Result<StepOutcome> {
    let q = gen.q;
    let parents = stride_select(&gen.kept, ctx.frontier_cap);
    let pruned = gen.kept.len() - parents.len();
    let children: Vec<u128> = parents.iter().flat_map(|&p| ctx.grid.children(p)).collect();
    let floor = MassFloor::new(ctx.measure, &ctx.grid.width(q + 1), ctx.policy);
    let results = children
        .par_iter()
        .map(|&c| classify(ctx, &floor, q, c))
        .collect::<Result<Vec<_>>>()?;
    let mut kept = Vec::new();
    let mut removed = Vec::new();
    let mut tests = 0;
    for r in results {
        tests += r.tests;
        match r.removal {
            Some(rem) => removed.push(rem),
            None => kept.push(r.index),
        }
    }
    let indeterminate = removed
        .iter()
        .filter(|r| matches!(r.reason, Reason::Indeterminate { .. }))
        .count() as u64;
    let mut per_ancestor: BTreeMap<(u32, u128), u64> = BTreeMap::new();
    for r in &removed {
        let p = r.reason.family(q);
        let anc = ctx.grid.ancestor(r.index, q + 1, p);
        *per_ancestor.entry((p, anc)).or_default() += 1;
    }
    let mut family_maxima: BTreeMap<u32, u64> = BTreeMap::new();
    for ((p, _), c) in per_ancestor {
        let e = family_maxima.entry(p).or_default();
        *e = (*e).max(c);
    }
    let next = Generation { q: q + 1, kept };
    let hash = generation_hash(&next, &removed);
    Ok(StepOutcome {
        next,
        removed,
        pruned,
        tests,
        indeterminate,
        family_maxima,
        hash,
    })
}

/// SHA-256 over the kept indices and the removal decisions of a generation.
pub fn generation_hash(gen: &Generation, removed: &[Removal]) -> String {
    let mut h = Sha256::new();
    h.update(gen.q.to_le_bytes());
    h.update((gen.kept.len() as u64).to_le_bytes());
    for k in &gen.kept {
        h.update(k.to_le_bytes());
    }
    for r in removed {
        h.update(r.index.to_le_bytes());
        h.update(r.reason.code().as_bytes());
        h.update([0]);
    }
    hex::encode(h.finalize())
}

/// Exact mass of the union of kept intervals.
pub fn kept_mass(mu: &FractalMeasure, grid: &Grid, gen: &Generation) -> Rational {
    gen.kept.iter().fold(Rational::zero(), |acc, &k| {
        let (a, b) = grid.endpoints(gen.q, k);
        acc + mu.measure_interval(&a, &b)
    })
}

/// `mu(J) >= (3C)^-1 |J|^alpha` for every kept interval.
pub fn kept_satisfy_lower_bound(mu: &FractalMeasure, grid: &Grid, gen: &Generation, policy: PrecisionPolicy) -> Result<bool> {
    let floor = MassFloor::new(mu, &grid.width(gen.q), policy);
    for &k in &gen.kept {
        let (a, b) = grid.endpoints(gen.q, k);
        if floor.is_light(mu, &a, &b)? {
            return Ok(false);
        }
    }
    Ok(true)
}
