//! Generation-by-generation construction of a nested interval family whose
//! intersection avoids both the light intervals of the measure and the points whose
//! renormalised lattices become short.

mod audit;
mod certify;
mod config;
mod step;
mod tq;

pub use audit::{replay_audit, tq_csv, verify_content_hash, write_outputs, AuditLine, OutputPaths, ReplayReport};
pub use certify::{certify_bad, BadEstimate};
pub use config::{describe, Admissibility, Mode, RunConfig, Strategy, ThresholdSchedule, MAX_DEPTH};
pub use step::{
    generation_hash, kept_mass, kept_satisfy_lower_bound, removal_measure, MassFloor, step, stride_select, test_interval,
    test_point, Generation, Grid, Reason, Regime, Removal, StepContext, StepOutcome, Verdict,
};
pub use tq::{tq_f64, tq_recursion, InductionPreset, PresetConditions, RemovalRates, RemovalTable, TqTrace};

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::arith::{serde_rational, PrecisionPolicy, Rational};
use crate::curves::CurveModel;
use crate::error::{Error, Result};
use crate::flows::{Coordinate, FlowConfig};
use crate::fractal::FractalMeasure;

/// Per-generation bookkeeping.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerationSummary {
    pub q: u32,
    pub kept: usize,
    pub removed_measure: usize,
    pub removed_dynamical: usize,
    pub certain: usize,
    pub boundary: usize,
    pub indeterminate: usize,
    pub pruned: usize,
    pub tests: u64,
    pub hash: String,
}

/// One interval of the certificate chain.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainLink {
    pub depth: u32,
    /// Grid index as a decimal string (it may exceed 64 bits).
    pub index: String,
    #[serde(with = "serde_rational")]
    pub lo: Rational,
    #[serde(with = "serde_rational")]
    pub hi: Rational,
}

/// Witness of a nonempty construction up to the last generation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Certificate {
    pub chain: Vec<ChainLink>,
    /// A support point of the final interval (its midpoint for Lebesgue measure).
    #[serde(with = "serde_rational")]
    pub point: Rational,
    #[serde(with = "serde_rational")]
    pub midpoint: Rational,
    pub point_in_support: bool,
    pub bad_estimate: BadEstimate,
    pub horizon: u64,
    /// `e^(-eps beta l)` at the largest scale index used.
    pub survivor_threshold: Option<f64>,
}

/// Everything a construction run produces.
#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub config: RunConfig,
    pub admissibility: Admissibility,
    pub nonempty: bool,
    /// First generation that came out empty.
    pub failed_at: Option<u32>,
    pub generations: Vec<GenerationSummary>,
    pub removal_table: Vec<(u32, u32, u64)>,
    pub tq: TqTrace,
    pub dynamical_tests: u64,
    pub indeterminate: u64,
    pub indeterminate_fraction: f64,
    /// Measured `h_{q,q} <= R - floor((4C)^-2 R^alpha)`; `None` unless `R^alpha >= 21 C^2`.
    pub measure_rate_bound: Option<bool>,
    pub certificate: Option<Certificate>,
    #[serde(skip)]
    pub history: Vec<Generation>,
    #[serde(skip)]
    pub removals: Vec<Removal>,
    #[serde(skip)]
    pub table: RemovalTable,
}

/// A validated construction ready to run.
pub struct Construction {
    cfg: RunConfig,
    flow: FlowConfig,
    curve: CurveModel,
    grid: Grid,
    policy: PrecisionPolicy,
    admissibility: Admissibility,
}

impl Construction {
    /// Validates the config, including the admissibility of `I0`.
    pub fn new(cfg: RunConfig) -> Result<Self> {
        let c = Self::new_unchecked(cfg)?;
        c.admissibility.require()?;
        Ok(c)
    }

    /// Validates the config shape only; `I0` admissibility is computed but not enforced.
    pub fn new_unchecked(cfg: RunConfig) -> Result<Self> {
        cfg.validate_shape()?;
        let flow = cfg.flow()?;
        let curve = cfg.curve.build()?;
        if curve.n() != flow.n() {
            return Err(Error::DimensionMismatch {
                expected: flow.n(),
                found: curve.n(),
            });
        }
        curve.require_nondegenerate()?;
        let policy = cfg.policy();
        let admissibility = config::admissibility(&cfg, &curve, policy)?;
        let grid = Grid::new(&cfg.i0, cfg.r_scale)?;
        Ok(Construction {
            cfg,
            flow,
            curve,
            grid,
            policy,
            admissibility,
        })
    }

    pub fn config(&self) -> &RunConfig {
        &self.cfg
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn curve(&self) -> &CurveModel {
        &self.curve
    }

    pub fn admissibility(&self) -> &Admissibility {
        &self.admissibility
    }

    pub fn context(&self) -> StepContext<'_> {
        StepContext {
            flow: &self.flow,
            curve: &self.curve,
            measure: &self.cfg.measure,
            grid: &self.grid,
            schedule: &self.cfg.schedule,
            mode: self.cfg.mode,
            policy: self.policy,
            frontier_cap: self.cfg.frontier_cap,
        }
    }

    pub fn step(&self, gen: &Generation) -> Result<StepOutcome> {
        step(&self.context(), gen)
    }

    /// Runs `q_max + 1` steps, or until a generation comes out empty.
    pub fn run(&self) -> Result<RunReport> {
        let mut gen = Generation::initial();
        let mut history = vec![gen.clone()];
        let mut summaries = Vec::new();
        let mut removals = Vec::new();
        let mut table = RemovalTable::new();
        let (mut tests, mut indeterminate) = (0u64, 0u64);
        let mut failed_at = None;
        for q in 0..=self.cfg.q_max {
            let out = self.step(&gen)?;
            for (&p, &c) in &out.family_maxima {
                table.record(p, q, c);
            }
            tests += out.tests;
            indeterminate += out.indeterminate;
            summaries.push(summarize(&out));
            removals.extend(out.removed);
            gen = out.next;
            history.push(gen.clone());
            if gen.kept.is_empty() {
                failed_at = Some(q + 1);
                break;
            }
        }
        let tq = tq_recursion(self.cfg.r_scale, &table, self.cfg.q_max);
        let certificate = if failed_at.is_none() {
            Some(self.certificate(&history)?)
        } else {
            None
        };
        let measure_rate_bound = self.measure_rate_bound(&table)?;
        Ok(RunReport {
            config: self.cfg.clone(),
            admissibility: self.admissibility.clone(),
            nonempty: failed_at.is_none(),
            failed_at,
            generations: summaries,
            removal_table: table.rows(),
            tq,
            dynamical_tests: tests,
            indeterminate,
            indeterminate_fraction: if tests == 0 { 0.0 } else { indeterminate as f64 / tests as f64 },
            measure_rate_bound,
            certificate,
            history,
            removals,
            table,
        })
    }

    fn measure_rate_bound(&self, table: &RemovalTable) -> Result<Option<bool>> {
        if !self.admissibility.large_r {
            return Ok(None);
        }
        let mu = &self.cfg.measure;
        let sixteen_c2 = Rational::from_integer(16.into()) * mu.c() * mu.c();
        let r = Rational::from_integer(self.cfg.r_scale.into());
        // floor((4C)^-2 R^alpha) from an enclosure; escalate until the floor is decided.
        let fl = self.policy.escalate(|prec| {
            let v = mu.alpha().power_enclose(&r, prec).div_ref(&crate::arith::RInterval::from_rational(&sixteen_c2, prec)).ok()?;
            let (a, b) = (crate::arith::floor(&v.lo_rational()), crate::arith::floor(&v.hi_rational()));
            (a == b).then_some(a)
        })?;
        let bound = num_bigint::BigInt::from(self.cfg.r_scale) - fl;
        Ok(Some(
            (0..=self.cfg.q_max).all(|q| num_bigint::BigInt::from(table.get(q, q)) <= bound),
        ))
    }

    fn certificate(&self, history: &[Generation]) -> Result<Certificate> {
        let chain = extract_chain(&self.grid, &self.cfg.measure, history, self.cfg.strategy)?;
        let last = chain.last().expect("chain has I0");
        let midpoint = (&last.lo + &last.hi) / Rational::from_integer(2.into());
        let mu = &self.cfg.measure;
        let point = match mu.kind() {
            crate::fractal::MeasureKind::Lebesgue { .. } => midpoint.clone(),
            crate::fractal::MeasureKind::DigitCantor { .. } => mu
                .least_support_at_or_above(&last.lo)?
                .filter(|p| *p <= last.hi)
                .ok_or_else(|| Error::PreconditionViolated("final interval misses the support".into()))?,
        };
        let point_in_support = mu.contains_point(&point);
        let bad_estimate = certify_bad(
            &self.curve,
            &self.cfg.weights,
            &Coordinate::Exact(point.clone()),
            self.cfg.certify_q,
            self.policy.start,
        )?;
        let l_max = (0..=self.cfg.q_max)
            .flat_map(|q| {
                let m = self.flow.m;
                let s = &self.cfg.schedule;
                s.zero_family(q, m).into_iter().chain(s.shallow_family(q, m).into_iter().map(|(_, l)| l))
            })
            .max();
        let survivor_threshold = l_max.map(|l| self.flow.threshold2(l).enclose(64).to_f64().sqrt());
        Ok(Certificate {
            chain,
            point,
            midpoint,
            point_in_support,
            bad_estimate,
            horizon: self.cfg.certify_q,
            survivor_threshold,
        })
    }
}

fn summarize(out: &StepOutcome) -> GenerationSummary {
    let count = |f: &dyn Fn(&Reason) -> bool| out.removed.iter().filter(|r| f(&r.reason)).count();
    GenerationSummary {
        q: out.next.q,
        kept: out.next.kept.len(),
        removed_measure: count(&|r| matches!(r, Reason::Measure)),
        removed_dynamical: count(&|r| matches!(r, Reason::Dynamical { .. })),
        certain: count(&|r| matches!(r, Reason::Dynamical { regime: Regime::Certain, .. })),
        boundary: count(&|r| matches!(r, Reason::Dynamical { regime: Regime::Boundary, .. })),
        indeterminate: count(&|r| matches!(r, Reason::Indeterminate { .. })),
        pruned: out.pruned,
        tests: out.tests,
        hash: out.hash.clone(),
    }
}

/// Nested chain ending at the interval of the last generation chosen by `strategy`.
pub fn extract_chain(
    grid: &Grid,
    mu: &FractalMeasure,
    history: &[Generation],
    strategy: Strategy,
) -> Result<Vec<ChainLink>> {
    let last = history
        .last()
        .filter(|g| !g.kept.is_empty())
        .ok_or_else(|| Error::PreconditionViolated("empty generation: no certificate".into()))?;
    let pick = match strategy {
        Strategy::Leftmost => last.kept[0],
        Strategy::MaxMeasure => {
            let mut best = (Rational::zero(), last.kept[0]);
            for &k in &last.kept {
                let (a, b) = grid.endpoints(last.q, k);
                let m = mu.measure_interval(&a, &b);
                if m > best.0 {
                    best = (m, k);
                }
            }
            best.1
        }
    };
    let chain = (0..=last.q)
        .map(|d| {
            let idx = grid.ancestor(pick, last.q, d);
            let (lo, hi) = grid.endpoints(d, idx);
            ChainLink {
                depth: d,
                index: idx.to_string(),
                lo,
                hi,
            }
        })
        .collect::<Vec<_>>();
    // Every link must be kept in its own generation.
    for (link, gen) in chain.iter().zip(history) {
        let idx: u128 = link.index.parse().expect("decimal index");
        if gen.kept.binary_search(&idx).is_err() {
            return Err(Error::PreconditionViolated(format!("chain link at depth {} not kept", link.depth)));
        }
    }
    Ok(chain)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{int, rat};
    use crate::flows::Weights;

    fn lebesgue_cfg(q_max: u32) -> RunConfig {
        let flow = FlowConfig::new(Weights::uniform(1).unwrap(), 16, rat(1, 9), 1).unwrap();
        let curve = CurveModel::veronese(1).unwrap();
        let mu = FractalMeasure::lebesgue(int(0), int(1)).unwrap();
        RunConfig::new(&flow, &curve, mu, (rat(1, 4), rat(1, 2)), q_max)
    }

    #[test]
    fn inactive_schedule_keeps_everything() {
        let mut cfg = lebesgue_cfg(2);
        cfg.schedule = ThresholdSchedule::inactive();
        let rep = Construction::new(cfg).unwrap().run().unwrap();
        assert!(rep.nonempty);
        assert!(rep.removal_table.is_empty());
        assert_eq!(rep.generations[0].kept, 16);
        let cert = rep.certificate.unwrap();
        // Leftmost chain hugs the left endpoint of I0.
        assert!(cert.chain.iter().all(|l| l.lo == rat(1, 4)));
        assert!(rep.tq.t.iter().all(|t| *t == int(16)));
    }

    #[test]
    fn chain_lengths_shrink_by_r() {
        let rep = Construction::new(lebesgue_cfg(3)).unwrap().run().unwrap();
        let cert = rep.certificate.unwrap();
        for (d, link) in cert.chain.iter().enumerate() {
            let expect = rat(1, 4) / Rational::from_integer(num_traits::pow(num_bigint::BigInt::from(16), d));
            assert_eq!(&link.hi - &link.lo, expect);
            if d > 0 {
                assert!(cert.chain[d - 1].lo <= link.lo && link.hi <= cert.chain[d - 1].hi);
            }
        }
    }

    #[test]
    fn gap_interval_is_inadmissible() {
        let flow = FlowConfig::new(Weights::uniform(1).unwrap(), 16, rat(1, 9), 1).unwrap();
        let curve = CurveModel::veronese(1).unwrap();
        let cfg = RunConfig::new(&flow, &curve, FractalMeasure::middle_third(), (rat(4, 9), rat(5, 9)), 2);
        assert!(matches!(Construction::new(cfg), Err(Error::PreconditionViolated(_))));
    }
}
