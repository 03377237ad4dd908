//! Iteration records, solve traces, and the exact-round-trip CSV format.
//!
//! Numbers are written as shortest round-trip decimals (Rust's default f64
//! Display), so write-then-read reproduces every field bit-exactly. Optional
//! fields serialize as empty cells.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Fixed CSV column order; the writer and reader both follow this list.
pub const CSV_COLUMNS: [&str; 13] = [
    "k",
    "f_val",
    "obj_residual",
    "feas_abs",
    "feas_rel",
    "gamma",
    "beta",
    "tau",
    "psi",
    "inner_iters",
    "wall_ns",
    "feas_bound",
    "obj_upper",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub k: usize,
    pub f_val: f64,
    /// f(x_k) - f*, when a reference objective is known.
    pub obj_residual: Option<f64>,
    pub feas_abs: f64,
    /// feas_abs / max(1, ||b||).
    pub feas_rel: f64,
    pub gamma: f64,
    pub beta: f64,
    pub tau: f64,
    /// Contraction decay term (certification mode only).
    pub psi: Option<f64>,
    pub inner_iters: usize,
    pub wall_ns: u64,
    /// Feasibility bound value at this k, when a bound set is attached.
    pub feas_bound: Option<f64>,
    /// Objective upper bound value at this k, when attached.
    pub obj_upper: Option<f64>,
}

/// Per-iteration operation counters (prox calls, A and A' applications).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpCounters {
    pub prox: usize,
    pub a_apply: usize,
    pub at_apply: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Converged,
    MaxIter,
    CertificateFailed,
    InnerBudget,
}

/// Everything a solve produces.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trace {
    pub records: Vec<IterationRecord>,
    /// Per-iteration counters, aligned with `records` (None when disabled).
    pub counters: Option<Vec<OpCounters>>,
    /// Smoothed-gap values G_k per record (certification mode only).
    pub g_gaps: Option<Vec<f64>>,
    pub status: SolveStatus,
    pub x_final: Vec<f64>,
    pub y_final: Vec<f64>,
    /// Scheme label, e.g. "1p2d-bregman".
    pub scheme: String,
    /// True when a tuning heuristic (kick / adaptive center) ran; bound
    /// certificates do not apply to such runs.
    pub tuned: bool,
    pub events: Vec<String>,
    pub seed: u64,
}

impl Trace {
    pub fn final_feas_rel(&self) -> f64 {
        self.records.last().map_or(f64::NAN, |r| r.feas_rel)
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |x| format!("{x}"))
}

fn parse_opt(s: &str) -> Result<Option<f64>> {
    if s.is_empty() {
        Ok(None)
    } else {
        s.parse::<f64>()
            .map(Some)
            .map_err(|e| Error::Config(format!("bad float {s:?}: {e}")))
    }
}

fn parse_f64(s: &str) -> Result<f64> {
    s.parse::<f64>()
        .map_err(|e| Error::Config(format!("bad float {s:?}: {e}")))
}

/// Serialize records as CSV with the fixed header row.
pub fn write_csv(records: &[IterationRecord]) -> String {
    let mut out = String::new();
    out.push_str(&CSV_COLUMNS.join(","));
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.k,
            r.f_val,
            fmt_opt(r.obj_residual),
            r.feas_abs,
            r.feas_rel,
            r.gamma,
            r.beta,
            r.tau,
            fmt_opt(r.psi),
            r.inner_iters,
            r.wall_ns,
            fmt_opt(r.feas_bound),
            fmt_opt(r.obj_upper),
        ));
    }
    out
}

pub fn read_csv(text: &str) -> Result<Vec<IterationRecord>> {
    let mut lines = text.lines();
    let header = lines.next().ok_or(Error::NoData)?;
    if header != CSV_COLUMNS.join(",") {
        return Err(Error::Config(format!("unexpected trace header {header:?}")));
    }
    let mut out = Vec::new();
    for line in lines {
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != CSV_COLUMNS.len() {
            return Err(Error::Config(format!(
                "expected {} cells, got {}",
                CSV_COLUMNS.len(),
                cells.len()
            )));
        }
        out.push(IterationRecord {
            k: cells[0]
                .parse()
                .map_err(|e| Error::Config(format!("bad k: {e}")))?,
            f_val: parse_f64(cells[1])?,
            obj_residual: parse_opt(cells[2])?,
            feas_abs: parse_f64(cells[3])?,
            feas_rel: parse_f64(cells[4])?,
            gamma: parse_f64(cells[5])?,
            beta: parse_f64(cells[6])?,
            tau: parse_f64(cells[7])?,
            psi: parse_opt(cells[8])?,
            inner_iters: cells[9]
                .parse()
                .map_err(|e| Error::Config(format!("bad inner_iters: {e}")))?,
            wall_ns: cells[10]
                .parse()
                .map_err(|e| Error::Config(format!("bad wall_ns: {e}")))?,
            feas_bound: parse_opt(cells[11])?,
            obj_upper: parse_opt(cells[12])?,
        });
    }
    Ok(out)
}
