//! File formats and persistence: error-stream files, trajectory CSV, trace
//! export, report artifacts, and atomic writes.
//!
//! All delimited outputs are UTF-8 with LF line endings and a header row.
//! Floats are written in Rust's shortest round-trip form, so re-reading a
//! file reproduces the exact binary values.

pub mod manifest;

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use crate::detector::StepOutcome;
use crate::error::{Error, Result};
use crate::harness::roc::RocPoint;
use crate::harness::sweep::SweepPoint;
use crate::trajectory::{ErrorRecord, Trajectory};

/// Writes `bytes` to `path` atomically (temp file in the same directory,
/// then rename), so a killed run never leaves a truncated artifact.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let mut tmp = tempfile::NamedTempFile::new_in(dir.unwrap_or(Path::new(".")))
        .map_err(|e| Error::io(path.display().to_string(), e))?;
    tmp.write_all(bytes)
        .map_err(|e| Error::io(path.display().to_string(), e))?;
    tmp.persist(path)
        .map_err(|e| Error::io(path.display().to_string(), e.error))?;
    Ok(())
}

/// SHA-256 digest as lowercase hex.
pub fn sha256_hex(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for byte in digest {
        let _ = write!(out, "{byte:02x}");
    }
    out
}

/// One row of an error-stream file (`t,epsilon[,true_mode]`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorStreamRow {
    pub t: u64,
    pub epsilon: f64,
    pub true_mode: Option<usize>,
}

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Reads an error-stream file. Header must be `t,epsilon` or
/// `t,epsilon,true_mode`; parse failures carry the 1-based file line.
pub fn read_errors_file(path: &Path) -> Result<Vec<ErrorStreamRow>> {
    let content =
        fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    parse_errors_text(&content)
}

pub fn parse_errors_text(content: &str) -> Result<Vec<ErrorStreamRow>> {
    let mut lines = content.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| parse_error(1, "empty file; expected a header row"))?;
    let with_mode = match header.trim() {
        "t,epsilon" => false,
        "t,epsilon,true_mode" => true,
        other => {
            return Err(parse_error(
                1,
                format!("unexpected header `{other}`; expected `t,epsilon[,true_mode]`"),
            ))
        }
    };
    let mut rows = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let expected = if with_mode { 3 } else { 2 };
        if fields.len() != expected {
            return Err(parse_error(
                line_no,
                format!("{} fields, expected {expected}", fields.len()),
            ));
        }
        let t: u64 = fields[0]
            .trim()
            .parse()
            .map_err(|_| parse_error(line_no, format!("bad time index `{}`", fields[0])))?;
        let epsilon: f64 = fields[1]
            .trim()
            .parse()
            .map_err(|_| parse_error(line_no, format!("bad epsilon `{}`", fields[1])))?;
        let true_mode = if with_mode {
            Some(fields[2].trim().parse::<usize>().map_err(|_| {
                parse_error(line_no, format!("bad true_mode `{}`", fields[2]))
            })?)
        } else {
            None
        };
        rows.push(ErrorStreamRow {
            t,
            epsilon,
            true_mode,
        });
    }
    Ok(rows)
}

/// Serializes an error stream; emits the `true_mode` column when every row
/// carries one.
pub fn format_errors_text(rows: &[ErrorStreamRow]) -> String {
    let with_mode = !rows.is_empty() && rows.iter().all(|r| r.true_mode.is_some());
    let mut out = String::new();
    out.push_str(if with_mode {
        "t,epsilon,true_mode\n"
    } else {
        "t,epsilon\n"
    });
    for row in rows {
        if with_mode {
            let _ = writeln!(out, "{},{},{}", row.t, row.epsilon, row.true_mode.unwrap());
        } else {
            let _ = writeln!(out, "{},{}", row.t, row.epsilon);
        }
    }
    out
}

pub fn write_errors_file(path: &Path, rows: &[ErrorStreamRow]) -> Result<()> {
    atomic_write(path, format_errors_text(rows).as_bytes())
}

/// Predicted/ground-truth trajectory pair for one agent in one scene.
#[derive(Debug, Clone)]
pub struct AgentPair {
    pub agent_id: u64,
    pub pred: Trajectory,
    pub truth: Trajectory,
}

/// All agents of one scene; the scene id doubles as the stream time index.
#[derive(Debug, Clone)]
pub struct SceneGroup {
    pub scene_id: u64,
    pub agents: Vec<AgentPair>,
}

const TRAJECTORY_HEADER: &str = "scene_id,agent_id,t,pred_x,pred_y,true_x,true_y";

/// Reads a trajectory CSV (`scene_id,agent_id,t,pred_x,pred_y,true_x,true_y`),
/// grouping rows into per-agent horizons ordered by `t` and scenes ordered
/// by `scene_id`.
pub fn read_trajectory_csv(path: &Path) -> Result<Vec<SceneGroup>> {
    let content =
        fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    parse_trajectory_text(&content)
}

pub fn parse_trajectory_text(content: &str) -> Result<Vec<SceneGroup>> {
    let mut lines = content.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| parse_error(1, "empty file; expected a header row"))?;
    if header.trim() != TRAJECTORY_HEADER {
        return Err(parse_error(
            1,
            format!("unexpected header `{}`; expected `{TRAJECTORY_HEADER}`", header.trim()),
        ));
    }

    struct Row {
        scene: u64,
        agent: u64,
        t: u64,
        pred: (f64, f64),
        truth: (f64, f64),
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return Err(parse_error(
                line_no,
                format!("{} fields, expected 7", fields.len()),
            ));
        }
        let int = |i: usize, name: &str| -> Result<u64> {
            fields[i]
                .trim()
                .parse()
                .map_err(|_| parse_error(line_no, format!("bad {name} `{}`", fields[i])))
        };
        let num = |i: usize, name: &str| -> Result<f64> {
            fields[i]
                .trim()
                .parse()
                .map_err(|_| parse_error(line_no, format!("bad {name} `{}`", fields[i])))
        };
        rows.push(Row {
            scene: int(0, "scene_id")?,
            agent: int(1, "agent_id")?,
            t: int(2, "t")?,
            pred: (num(3, "pred_x")?, num(4, "pred_y")?),
            truth: (num(5, "true_x")?, num(6, "true_y")?),
        });
    }
    if rows.is_empty() {
        return Err(parse_error(2, "no data rows"));
    }

    rows.sort_by_key(|r| (r.scene, r.agent, r.t));
    let mut scenes: Vec<SceneGroup> = Vec::new();
    let mut i = 0;
    while i < rows.len() {
        let scene_id = rows[i].scene;
        let mut agents = Vec::new();
        while i < rows.len() && rows[i].scene == scene_id {
            let agent_id = rows[i].agent;
            let mut pred = Vec::new();
            let mut truth = Vec::new();
            while i < rows.len() && rows[i].scene == scene_id && rows[i].agent == agent_id {
                pred.push(rows[i].pred);
                truth.push(rows[i].truth);
                i += 1;
            }
            agents.push(AgentPair {
                agent_id,
                pred: Trajectory::new(pred)?,
                truth: Trajectory::new(truth)?,
            });
        }
        scenes.push(SceneGroup { scene_id, agents });
    }
    Ok(scenes)
}

/// Serializes per-step metric records as `t,ade,fde,rmse`.
pub fn format_metrics_text(records: &[ErrorRecord]) -> String {
    let mut out = String::from("t,ade,fde,rmse\n");
    for r in records {
        let _ = writeln!(out, "{},{},{},{}", r.t, r.ade, r.fde, r.rmse);
    }
    out
}

/// One exported detector trace record.
#[derive(Debug, Clone, Copy)]
pub struct TraceRow {
    pub t: u64,
    pub epsilon: f64,
    pub mode_est: usize,
    pub llr: f64,
    pub w0: f64,
    pub w1: f64,
    pub theta0: f64,
    pub theta1: f64,
    pub alarmed: bool,
}

impl TraceRow {
    /// Builds a trace row from a step outcome and the detector snapshot;
    /// single-statistic detectors repeat their fixed threshold in both
    /// theta columns.
    pub fn from_step(epsilon: f64, outcome: &StepOutcome, w: &[f64], theta: &[f64]) -> Self {
        TraceRow {
            t: outcome.t,
            epsilon,
            mode_est: outcome.estimated_mode,
            llr: outcome.llr,
            w0: w.first().copied().unwrap_or(0.0),
            w1: w.get(1).copied().unwrap_or(0.0),
            theta0: theta.first().copied().unwrap_or(0.0),
            theta1: theta.get(1).copied().unwrap_or_else(|| theta[0]),
            alarmed: outcome.alarmed,
        }
    }
}

pub fn format_trace_text(rows: &[TraceRow]) -> String {
    let mut out = String::from("t,epsilon,mode_est,llr,W0,W1,theta0,theta1,alarmed\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.t, r.epsilon, r.mode_est, r.llr, r.w0, r.w1, r.theta0, r.theta1, r.alarmed
        );
    }
    out
}

/// Serializes sweep curves for every detector as
/// `detector,threshold_scale,far,mean_delay,stderr,censored_frac`.
pub fn format_sweep_csv(curves: &[(&str, &[SweepPoint])]) -> String {
    let mut out = String::from("detector,threshold_scale,far,mean_delay,stderr,censored_frac\n");
    for (name, points) in curves {
        for p in *points {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                name, p.threshold_scale, p.far, p.mean_delay, p.delay_stderr, p.censored_frac
            );
        }
    }
    out
}

/// Serializes an ROC/PR curve as `fpr,tpr,precision,recall`.
pub fn format_roc_csv(points: &[RocPoint]) -> String {
    let mut out = String::from("fpr,tpr,precision,recall\n");
    for p in points {
        let _ = writeln!(out, "{},{},{},{}", p.fpr, p.tpr, p.precision, p.recall);
    }
    out
}
