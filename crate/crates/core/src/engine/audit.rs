use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::step::{Reason, Removal};
use super::{tq_f64, Construction, GenerationSummary, RunConfig, RunReport};
use crate::arith::format_rational;
use crate::error::{Error, Result};

/// One line of the audit log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum AuditLine {
    Header {
        config: serde_json::Value,
        content_sha256: String,
    },
    Removal {
        depth: u32,
        index: String,
        lo: String,
        hi: String,
        reason: Reason,
        norm2_lo: Option<f64>,
        norm2_hi: Option<f64>,
        threshold2: Option<f64>,
    },
    Generation(GenerationSummary),
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Paths of the four output files.
#[derive(Clone, Debug)]
pub struct OutputPaths {
    pub certificate: PathBuf,
    pub removals: PathBuf,
    pub tq: PathBuf,
    pub audit: PathBuf,
}

fn removal_line(c: &Construction, r: &Removal) -> AuditLine {
    let (lo, hi) = c.grid().endpoints(r.depth, r.index);
    AuditLine::Removal {
        depth: r.depth,
        index: r.index.to_string(),
        lo: format_rational(&lo),
        hi: format_rational(&hi),
        reason: r.reason.clone(),
        norm2_lo: r.norm2_lo,
        norm2_hi: r.norm2_hi,
        threshold2: r.threshold2,
    }
}

/// Audit log body: removals of each generation followed by its summary.
fn audit_body(c: &Construction, report: &RunReport) -> String {
    let mut out = String::new();
    let mut it = report.removals.iter().peekable();
    for g in &report.generations {
        while let Some(r) = it.next_if(|r| r.depth == g.q) {
            out.push_str(&serde_json::to_string(&removal_line(c, r)).expect("serializable"));
            out.push('\n');
        }
        out.push_str(&serde_json::to_string(&AuditLine::Generation(g.clone())).expect("serializable"));
        out.push('\n');
    }
    out
}

fn config_value(cfg: &RunConfig) -> serde_json::Value {
    serde_json::to_value(cfg).expect("serializable")
}

/// CSV text preceded by `# config:` and `# content_sha256:` comment lines.
fn with_csv_header(cfg: &RunConfig, body: &str) -> String {
    format!(
        "# config: {}\n# content_sha256: {}\n{}",
        cfg.to_json(),
        sha256_hex(body.as_bytes()),
        body
    )
}

fn csv_text(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(|e| Error::Io(e.to_string()))?;
    for r in rows {
        w.write_record(&r).map_err(|e| Error::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

/// Certificate file contents: the report plus config and a hash of the report.
pub fn certificate_json(report: &RunReport) -> String {
    let body = serde_json::to_value(report).expect("serializable");
    let hash = sha256_hex(serde_json::to_string(&body).expect("serializable").as_bytes());
    let doc = serde_json::json!({
        "config": config_value(&report.config),
        "content_sha256": hash,
        "report": body,
    });
    serde_json::to_string_pretty(&doc).expect("serializable")
}

/// Writes `certificate.json`, `removals.csv`, `tq.csv` and `audit.jsonl` into `dir`.
pub fn write_outputs(c: &Construction, report: &RunReport, dir: &Path) -> Result<OutputPaths> {
    fs::create_dir_all(dir).map_err(|e| Error::Io(e.to_string()))?;
    let paths = OutputPaths {
        certificate: dir.join("certificate.json"),
        removals: dir.join("removals.csv"),
        tq: dir.join("tq.csv"),
        audit: dir.join("audit.jsonl"),
    };
    let write = |p: &Path, s: &str| fs::write(p, s).map_err(|e| Error::Io(format!("{}: {e}", p.display())));
    write(&paths.certificate, &certificate_json(report))?;
    let removals = csv_text(
        &["p", "q", "h"],
        report
            .removal_table
            .iter()
            .map(|(p, q, h)| vec![p.to_string(), q.to_string(), h.to_string()]),
    )?;
    write(&paths.removals, &with_csv_header(&report.config, &removals))?;
    write(&paths.tq, &with_csv_header(&report.config, &tq_csv(&report.tq)?))?;
    let body = audit_body(c, report);
    let header = AuditLine::Header {
        config: config_value(&report.config),
        content_sha256: sha256_hex(body.as_bytes()),
    };
    let audit = format!("{}\n{}", serde_json::to_string(&header).expect("serializable"), body);
    write(&paths.audit, &audit)?;
    Ok(paths)
}

/// `q,t_q,t_q_float` rows.
pub fn tq_csv(tq: &super::TqTrace) -> Result<String> {
    let approx = tq_f64(tq);
    csv_text(
        &["q", "t_q", "t_q_approx"],
        tq.t.iter()
            .zip(approx)
            .enumerate()
            .map(|(q, (t, a))| vec![q.to_string(), format_rational(t), format!("{a:.6e}")]),
    )
}

/// Checks the embedded content hash of an output file produced by [`write_outputs`].
pub fn verify_content_hash(name: &str, text: &str) -> Result<bool> {
    if name.ends_with(".json") {
        let v: serde_json::Value = serde_json::from_str(text)?;
        let body = serde_json::to_string(&v["report"])?;
        return Ok(v["content_sha256"].as_str() == Some(&sha256_hex(body.as_bytes())));
    }
    if name.ends_with(".jsonl") {
        let (first, rest) = text.split_once('\n').ok_or_else(|| Error::Parse("empty audit".into()))?;
        let AuditLine::Header { content_sha256, .. } = serde_json::from_str(first)? else {
            return Err(Error::Parse("audit must start with a header".into()));
        };
        return Ok(content_sha256 == sha256_hex(rest.as_bytes()));
    }
    let mut lines = text.splitn(3, '\n');
    let (_cfg, hash, body) = (lines.next(), lines.next(), lines.next().unwrap_or(""));
    let hash = hash
        .and_then(|h| h.strip_prefix("# content_sha256: "))
        .ok_or_else(|| Error::Parse("missing content hash".into()))?;
    Ok(hash == sha256_hex(body.as_bytes()))
}

/// Outcome of re-running a logged construction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReplayReport {
    pub generations_checked: usize,
    /// First generation whose hash differs, if any.
    pub mismatch_at: Option<u32>,
    pub content_hash_ok: bool,
}

impl ReplayReport {
    pub fn matches(&self) -> bool {
        self.mismatch_at.is_none() && self.content_hash_ok
    }
}

/// Re-runs the construction recorded in an audit log and compares generation hashes.
pub fn replay_audit(text: &str) -> Result<ReplayReport> {
    let content_hash_ok = verify_content_hash("audit.jsonl", text)?;
    let mut lines = text.lines();
    let first = lines.next().ok_or_else(|| Error::Parse("empty audit".into()))?;
    let AuditLine::Header { config, .. } = serde_json::from_str(first)? else {
        return Err(Error::Parse("audit must start with a header".into()));
    };
    let cfg: RunConfig = serde_json::from_value(config)?;
    let logged: Vec<GenerationSummary> = lines
        .filter(|l| !l.trim().is_empty())
        .map(serde_json::from_str::<AuditLine>)
        .filter_map(|r| match r {
            Ok(AuditLine::Generation(g)) => Some(Ok(g)),
            Ok(_) => None,
            Err(e) => Some(Err(Error::from(e))),
        })
        .collect::<Result<_>>()?;
    let report = Construction::new_unchecked(cfg)?.run()?;
    let mismatch_at = logged
        .iter()
        .zip(report.generations.iter().map(Some).chain(std::iter::repeat(None)))
        .find(|(a, b)| b.is_none_or(|b| b.hash != a.hash))
        .map(|(a, _)| a.q)
        .or_else(|| (logged.len() != report.generations.len()).then(|| logged.len() as u32 + 1));
    Ok(ReplayReport {
        generations_checked: logged.len(),
        mismatch_at,
        content_hash_ok,
    })
}
