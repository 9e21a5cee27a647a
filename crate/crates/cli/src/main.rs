//! Batch front-end: construct, certify, flow, qnd and tq.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use badlatt::arith::{format_rational, parse_rational, to_f64, PrecisionPolicy, DEFAULT_PRECISION};
use badlatt::curves::CurveModel;
use badlatt::engine::{
    certify_bad, tq_csv, tq_f64, tq_recursion, Construction, InductionPreset, Mode, RemovalTable, RunConfig,
};
use badlatt::flows::{orbit_floor, orbit_trajectory, time_grid, Coordinate, Weights};
use badlatt::qnd::{fit_decay, measure_w, FitOptions, QndExperiment};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

/// Exit code of a run whose construction or recursion came out empty.
const EXIT_EMPTY: u8 = 2;

#[derive(Parser, Debug)]
#[command(name = "badlatt", version, about = "Certified construction of badly approximable points")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Working precision in bits; overrides the config file.
    #[arg(long, global = true)]
    precision: Option<u32>,
    /// Quantifier evaluation of the construction.
    #[arg(long, global = true, value_enum)]
    mode: Option<ModeArg>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Recorded in every summary; no subcommand samples randomly.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Largest precision reached by escalation.
    #[arg(long, global = true, env = "BADLATT_PRECISION_CAP")]
    precision_cap: Option<u32>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Midpoint,
    Interval,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Midpoint => Mode::Midpoint,
            ModeArg::Interval => Mode::Interval,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Runs the interval construction and writes certificate, removal table, t_q trace and audit log.
    Construct {
        #[arg(long)]
        config: PathBuf,
    },
    /// Estimates min over q <= Q of max_i q^(r_i) dist(q phi_i(x), Z).
    Certify {
        /// Curve parameter: p/q, a decimal, `golden` or `sqrt(d)`.
        #[arg(long)]
        x: String,
        #[arg(long, default_value = "1")]
        weights: String,
        #[arg(long, default_value = "veronese:1")]
        curve: String,
        #[arg(long, default_value_t = 10_000)]
        horizon: u64,
    },
    /// Samples the shortest vector along the diagonal orbit of a point.
    Flow {
        /// Comma-separated coordinates.
        #[arg(long)]
        point: String,
        #[arg(long, default_value = "1")]
        weights: String,
        #[arg(long, default_value = "25")]
        t_end: String,
        #[arg(long, default_value_t = 100)]
        steps: u32,
    },
    /// Measures the non-divergence sets of an experiment and fits their decay.
    Qnd {
        #[arg(long)]
        config: PathBuf,
    },
    /// Runs the t_q recursion on a removal table, the induction preset, or zero rates.
    Tq {
        #[arg(long = "R", default_value_t = 16)]
        r: u64,
        /// CSV of `p,q,h` rows.
        #[arg(long, conflicts_with = "preset")]
        table: Option<PathBuf>,
        #[arg(long, value_enum)]
        preset: Option<PresetArg>,
        #[arg(long, default_value_t = 8)]
        q_max: u32,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PresetArg {
    /// C = 1, alpha = ln 2 / ln 3, R = 2^16, C3 = 1, eta = 2/3.
    Desk,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(dir: &Path, name: &str, text: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let p = dir.join(name);
    fs::write(&p, text).with_context(|| format!("writing {}", p.display()))?;
    Ok(p)
}

fn policy(common: &Common) -> PrecisionPolicy {
    let d = PrecisionPolicy::default();
    let start = common.precision.unwrap_or(DEFAULT_PRECISION);
    PrecisionPolicy::new(start, common.precision_cap.unwrap_or(d.cap).max(start))
}

fn pretty(v: &serde_json::Value) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

fn construct(common: &Common, config: &Path) -> Result<bool> {
    let mut cfg = RunConfig::parse(&read(config)?)?;
    if let Some(p) = common.precision {
        cfg.precision = p;
    }
    if let Some(c) = common.precision_cap {
        cfg.precision_cap = c;
    }
    if let Some(m) = common.mode {
        cfg.mode = m.into();
    }
    let c = Construction::new(cfg)?;
    let report = c.run()?;
    let paths = badlatt::engine::write_outputs(&c, &report, &common.out)?;
    let summary = json!({
        "seed": common.seed,
        "nonempty": report.nonempty,
        "failed_at": report.failed_at,
        "indeterminate_fraction": report.indeterminate_fraction,
        "certificate": paths.certificate,
    });
    println!("{}", serde_json::to_string(&summary)?);
    if let Some(cert) = &report.certificate {
        eprintln!(
            "point {} (in support: {}), c_est in [{:.6e}, {:.6e}] at Q = {}",
            format_rational(&cert.point),
            cert.point_in_support,
            cert.bad_estimate.lo_f64(),
            cert.bad_estimate.hi_f64(),
            cert.horizon
        );
    }
    Ok(report.nonempty)
}

fn certify(common: &Common, x: &str, weights: &str, curve: &str, horizon: u64) -> Result<()> {
    let curve = CurveModel::parse(curve)?;
    let weights = Weights::parse(weights)?;
    let x = Coordinate::parse(x)?;
    let est = certify_bad(&curve, &weights, &x, horizon, policy(common).start)?;
    let doc = json!({
        "seed": common.seed,
        "horizon": horizon,
        "estimate": est,
        "c_est_lo": est.lo_f64(),
        "c_est_hi": est.hi_f64(),
    });
    write(&common.out, "certify.json", &pretty(&doc))?;
    println!("{}", serde_json::to_string(&doc)?);
    Ok(())
}

fn flow(common: &Common, point: &str, weights: &str, t_end: &str, steps: u32) -> Result<()> {
    let weights = Weights::parse(weights)?;
    let point = point.split(',').map(Coordinate::parse).collect::<badlatt::Result<Vec<_>>>()?;
    let grid = time_grid(&parse_rational(t_end)?, steps);
    let samples = orbit_trajectory(&weights, &point, &grid, policy(common))?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["t", "norm2_lo", "norm2_hi", "witness"])?;
    for s in &samples {
        let fmt = |v: Option<f64>| v.map_or_else(String::new, |v| format!("{v:.12e}"));
        let witness: Vec<String> = s.witness.iter().map(ToString::to_string).collect();
        w.write_record([format_rational(&s.t), fmt(s.norm2_lo), fmt(s.norm2_hi), witness.join(" ")])?;
    }
    let body = String::from_utf8(w.into_inner()?)?;
    let (floor, undecided) = orbit_floor(&samples);
    write(
        &common.out,
        "flow.csv",
        &format!("# weights: {} seed: {}\n{body}", weights.to_text(), common.seed),
    )?;
    println!(
        "{}",
        json!({ "floor_norm2": floor.as_ref().map(to_f64), "undecided": undecided, "samples": samples.len() })
    );
    Ok(())
}

fn qnd(common: &Common, config: &Path) -> Result<()> {
    let mut exp = QndExperiment::parse(&read(config)?)?;
    if let Some(p) = common.precision {
        exp.precision = p;
    }
    let report = measure_w(&exp)?;
    write(&common.out, "qnd.csv", &report.to_csv()?)?;
    let deltas: Vec<f64> = report.rows.iter().map(|r| to_f64(&r.delta)).collect();
    let fit = |masses: Vec<f64>| fit_decay(&deltas, &masses, FitOptions::default()).ok();
    let fit_upper = fit(report.rows.iter().map(|r| to_f64(&r.mass_hi)).collect());
    let fit_lower = fit(report.rows.iter().map(|r| to_f64(&r.mass_lo)).collect());
    let summary = json!({
        "config": serde_json::from_str::<serde_json::Value>(&exp.to_json())?,
        "seed": common.seed,
        "window_mass": to_f64(&report.window_mass),
        "cells": report.cells,
        "undecided_cells": report.undecided_cells,
        "max_gap_fraction": report.max_gap_fraction(),
        "flagged": report.flagged(),
        "fit_upper": fit_upper,
        "fit_lower": fit_lower,
    });
    write(&common.out, "qnd_summary.json", &pretty(&summary))?;
    if report.flagged() {
        eprintln!("warning: undecided mass exceeds the accepted bracket; increase depth");
    }
    println!("{}", serde_json::to_string(&summary)?);
    Ok(())
}

fn tq(common: &Common, r: u64, table: Option<&Path>, preset: Option<PresetArg>, q_max: u32) -> Result<bool> {
    if r < 2 && preset.is_none() {
        bail!("R must be at least 2");
    }
    let (trace, r, extra) = match (table, preset) {
        (_, Some(PresetArg::Desk)) => {
            let p = InductionPreset::desk(q_max)?;
            let trace = tq_recursion(p.r, &p, q_max);
            let extra = json!({
                "preset": p.describe(),
                "conditions": p.conditions()?,
                "first_below_floor": p.first_below_floor(&trace),
            });
            (trace, p.r, extra)
        }
        (Some(path), None) => (tq_recursion(r, &RemovalTable::from_csv(&read(path)?)?, q_max), r, json!({})),
        (None, None) => (tq_recursion(r, &RemovalTable::new(), q_max), r, json!({})),
    };
    write(&common.out, "tq.csv", &tq_csv(&trace)?)?;
    let approx = tq_f64(&trace);
    println!(
        "{}",
        json!({
            "R": r,
            "q_max": q_max,
            "nonempty": trace.nonempty(),
            "failed_at": trace.failed_at,
            "t_min": approx.iter().copied().fold(f64::INFINITY, f64::min),
            "extra": extra,
        })
    );
    Ok(trace.nonempty())
}

fn run(cli: &Cli) -> Result<bool> {
    let c = &cli.common;
    match &cli.command {
        Command::Construct { config } => construct(c, config),
        Command::Certify { x, weights, curve, horizon } => certify(c, x, weights, curve, *horizon).map(|()| true),
        Command::Flow { point, weights, t_end, steps } => flow(c, point, weights, t_end, *steps).map(|()| true),
        Command::Qnd { config } => qnd(c, config).map(|()| true),
        Command::Tq { r, table, preset, q_max } => tq(c, *r, table.as_deref(), *preset, *q_max),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_EMPTY),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
