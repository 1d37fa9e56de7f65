//! Sweep engine: evaluate analytic outage, Monte-Carlo outage, and
//! diversity metrics over a one-dimensional parameter grid and emit the
//! result as a plot-ready CSV table.
//!
//! Axis semantics:
//! - `omega_db`: the reference SNR sweeps in dB; thresholds come from the
//!   scenario's rate plan.
//! - `alpha_12`: the inter-station interference scaling sweeps linearly.
//! - `rf`: the finite-SNR multiplexing gain sweeps at the scenario's fixed
//!   `omega_x`; rates become rf log2(1+Omega) per node, so outage and MC
//!   cells use the matching variable-rate thresholds. `df_variable` is only
//!   meaningful on this axis, and `df_fixed` only off it.

use std::fmt;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;

use hbd_core::diversity::{self, RateMode};
use hbd_core::mc::{mc_outage, McEstimate};
use hbd_core::outage::{self, Detector, NodeMode, OutageError, SeriesControl};
use hbd_core::scenario::{db_to_linear, RatePlan, ScenarioConfig, ScenarioError};

/// Swept parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    OmegaDb,
    Rf,
    Alpha12,
}

impl Axis {
    pub fn parse(s: &str) -> Option<Axis> {
        match s {
            "omega_db" => Some(Axis::OmegaDb),
            "rf" => Some(Axis::Rf),
            "alpha_12" => Some(Axis::Alpha12),
            _ => None,
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::OmegaDb => "omega_db",
            Axis::Rf => "rf",
            Axis::Alpha12 => "alpha_12",
        })
    }
}

/// Requested computation per grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Outage,
    DfFixed,
    DfVariable,
    McOutage,
}

impl Metric {
    pub fn parse(s: &str) -> Option<Metric> {
        match s {
            "outage" => Some(Metric::Outage),
            "df_fixed" => Some(Metric::DfFixed),
            "df_variable" => Some(Metric::DfVariable),
            "mc_outage" => Some(Metric::McOutage),
            _ => None,
        }
    }

    fn tag(self) -> &'static str {
        match self {
            Metric::Outage => "outage",
            Metric::DfFixed => "df_fixed",
            Metric::DfVariable => "df_variable",
            Metric::McOutage => "mc_outage",
        }
    }
}

/// Link/detector configuration selector, including the system aggregates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepMode {
    Node(NodeMode),
    SystemIi,
    SystemSic,
    SystemHd,
}

impl SweepMode {
    pub fn parse(s: &str) -> Option<SweepMode> {
        match s {
            "gs_hbd" => Some(SweepMode::Node(NodeMode::GsHbd)),
            "as2_ii" => Some(SweepMode::Node(NodeMode::As2Ii)),
            "as2_sic" => Some(SweepMode::Node(NodeMode::As2Sic)),
            "gs_hd" => Some(SweepMode::Node(NodeMode::GsHd)),
            "as2_hd" => Some(SweepMode::Node(NodeMode::As2Hd)),
            "system_ii" => Some(SweepMode::SystemIi),
            "system_sic" => Some(SweepMode::SystemSic),
            "system_hd" => Some(SweepMode::SystemHd),
            _ => None,
        }
    }

    fn tag(self) -> &'static str {
        match self {
            SweepMode::Node(NodeMode::GsHbd) => "gs_hbd",
            SweepMode::Node(NodeMode::As2Ii) => "as2_ii",
            SweepMode::Node(NodeMode::As2Sic) => "as2_sic",
            SweepMode::Node(NodeMode::GsHd) => "gs_hd",
            SweepMode::Node(NodeMode::As2Hd) => "as2_hd",
            SweepMode::SystemIi => "system_ii",
            SweepMode::SystemSic => "system_sic",
            SweepMode::SystemHd => "system_hd",
        }
    }
}

/// Grid specification plus requested metrics and output location.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub axis: Axis,
    pub start: f64,
    pub stop: f64,
    pub step: f64,
    pub metrics: Vec<Metric>,
    pub modes: Vec<SweepMode>,
    pub samples: u64,
    pub seed: u64,
    pub output_path: PathBuf,
}

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("scenario: {0}")]
    Scenario(#[from] ScenarioError),
    #[error("sweep spec: {0}")]
    Invalid(String),
    #[error("output: {0}")]
    Io(#[from] std::io::Error),
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), SweepError> {
        let bad = |m: String| Err(SweepError::Invalid(m));
        if !(self.start < self.stop) {
            return bad(format!("start {} must be below stop {}", self.start, self.stop));
        }
        if !(self.step > 0.0) {
            return bad(format!("step {} must be positive", self.step));
        }
        if self.metrics.is_empty() {
            return bad("metrics list is empty".into());
        }
        if self.modes.is_empty() {
            return bad("modes list is empty".into());
        }
        if self.metrics.contains(&Metric::DfVariable) && self.axis != Axis::Rf {
            return bad("df_variable requires the rf axis".into());
        }
        if self.metrics.contains(&Metric::DfFixed) && self.axis == Axis::Rf {
            return bad("df_fixed is constant along the rf axis; sweep omega_db or alpha_12".into());
        }
        if self.axis == Axis::Rf && !(self.start >= 0.0 && self.stop <= 1.0) {
            return bad("rf axis must stay within [0, 1]".into());
        }
        if self.metrics.contains(&Metric::McOutage) && self.samples == 0 {
            return bad("mc_outage requires samples >= 1".into());
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..n).map(|i| self.start + i as f64 * self.step).collect()
    }
}

/// One table cell: a numeric value or a convergence flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CellValue {
    Num(f64),
    Bool(bool),
}

/// Rectangular sweep result; first column is the axis value.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<CellValue>>,
}

impl SweepTable {
    /// True when every analytic cell carried its convergence flag.
    pub fn fully_converged(&self) -> bool {
        self.rows
            .iter()
            .flatten()
            .all(|c| !matches!(c, CellValue::Bool(false)))
    }
}

fn header_for(metrics: &[Metric], modes: &[SweepMode]) -> Vec<String> {
    let mut h = vec!["axis".to_string()];
    for &metric in metrics {
        for &mode in modes {
            h.push(format!("{}_{}", metric.tag(), mode.tag()));
            h.push(format!("{}_{}_converged", metric.tag(), mode.tag()));
            if metric == Metric::McOutage {
                h.push(format!("mc_{}_se", mode.tag()));
            }
        }
    }
    h
}

// Scenario as adjusted for one grid point. On the rf axis the rate plan
// tracks rf log2(1+Omega), which reproduces both the HBD and HD
// variable-rate thresholds through the ordinary rate/threshold path.
fn cfg_at(base: &ScenarioConfig, axis: Axis, v: f64) -> ScenarioConfig {
    let mut cfg = base.clone();
    match axis {
        Axis::OmegaDb => cfg.omega_x = db_to_linear(v),
        Axis::Alpha12 => cfg.alpha_12 = v,
        Axis::Rf => {
            let r = v * (1.0 + cfg.omega_x).log2();
            cfg.rates = RatePlan {
                r1_hbd: r,
                rgs_hbd: r,
            };
        }
    }
    cfg
}

fn outage_cell(mode: SweepMode, cfg: &ScenarioConfig, ctl: &SeriesControl) -> (f64, bool) {
    let res = match mode {
        SweepMode::Node(m) => outage::outage(m, cfg, ctl),
        SweepMode::SystemIi => outage::outage_system(Detector::Ii, cfg, ctl),
        SweepMode::SystemSic => outage::outage_system(Detector::Sic, cfg, ctl),
        SweepMode::SystemHd => outage::outage_system_hd(cfg, ctl),
    };
    match res {
        Ok(r) => (r.probability, r.converged && r.convergence_bound_satisfied),
        Err(OutageError::NonConvergent(r)) => (r.probability, false),
        Err(_) => (f64::NAN, false),
    }
}

fn df_cell(
    mode: SweepMode,
    cfg: &ScenarioConfig,
    rate_mode: RateMode,
    rf: Option<f64>,
    ctl: &SeriesControl,
) -> (f64, bool) {
    let res = match (mode, rate_mode) {
        (SweepMode::Node(m), RateMode::Fixed) => diversity::df_fixed(m, cfg, ctl),
        (SweepMode::Node(m), RateMode::Variable) => {
            diversity::df_variable(m, cfg, rf.expect("rf set on rf axis"), ctl)
        }
        (SweepMode::SystemIi, rm) => diversity::df_system(Detector::Ii, rm, cfg, rf, ctl),
        (SweepMode::SystemSic, rm) => diversity::df_system(Detector::Sic, rm, cfg, rf, ctl),
        (SweepMode::SystemHd, rm) => diversity::df_system_hd(rm, cfg, rf, ctl),
    };
    match res {
        Ok(r) => (r.gain, true),
        Err(_) => (f64::NAN, false),
    }
}

fn mc_cell(mode: SweepMode, cfg: &ScenarioConfig, samples: u64, seed: u64) -> McEstimate {
    let one = |m| mc_outage(m, cfg, samples, seed);
    match mode {
        SweepMode::Node(m) => one(m),
        // System outage is the max of the two marginal outages; report the
        // larger estimate with its own standard error.
        SweepMode::SystemIi | SweepMode::SystemSic => {
            let gs = one(NodeMode::GsHbd);
            let as2 = one(match mode {
                SweepMode::SystemIi => NodeMode::As2Ii,
                _ => NodeMode::As2Sic,
            });
            if gs.probability >= as2.probability {
                gs
            } else {
                as2
            }
        }
        SweepMode::SystemHd => {
            let gs = one(NodeMode::GsHd);
            let as2 = one(NodeMode::As2Hd);
            if gs.probability >= as2.probability {
                gs
            } else {
                as2
            }
        }
    }
}

fn evaluate_row(v: f64, base: &ScenarioConfig, spec: &SweepSpec, ctl: &SeriesControl) -> Vec<CellValue> {
    let cfg = cfg_at(base, spec.axis, v);
    let rf = (spec.axis == Axis::Rf).then_some(v);
    let mut row = vec![CellValue::Num(v)];
    for &metric in &spec.metrics {
        for &mode in &spec.modes {
            match metric {
                Metric::Outage => {
                    let (p, ok) = outage_cell(mode, &cfg, ctl);
                    row.push(CellValue::Num(p));
                    row.push(CellValue::Bool(ok));
                }
                Metric::DfFixed => {
                    let (g, ok) = df_cell(mode, &cfg, RateMode::Fixed, None, ctl);
                    row.push(CellValue::Num(g));
                    row.push(CellValue::Bool(ok));
                }
                Metric::DfVariable => {
                    let (g, ok) = df_cell(mode, &cfg, RateMode::Variable, rf, ctl);
                    row.push(CellValue::Num(g));
                    row.push(CellValue::Bool(ok));
                }
                Metric::McOutage => {
                    let est = mc_cell(mode, &cfg, spec.samples, spec.seed);
                    row.push(CellValue::Num(est.probability));
                    row.push(CellValue::Bool(true));
                    row.push(CellValue::Num(est.std_error));
                }
            }
        }
    }
    row
}

/// Run the sweep over the scenario in `scenario_file`. Grid points evaluate
/// concurrently; rows come out ordered by axis value. Per-cell convergence
/// failures are recorded in the table, never aborting the sweep.
pub fn run_sweep(scenario_file: &Path, spec: &SweepSpec) -> Result<SweepTable, SweepError> {
    spec.validate()?;
    let base = ScenarioConfig::load(scenario_file)?;
    let ctl = SeriesControl::default();
    let grid = spec.grid();
    let rows: Vec<Vec<CellValue>> = grid
        .par_iter()
        .map(|&v| evaluate_row(v, &base, spec, &ctl))
        .collect();
    Ok(SweepTable {
        header: header_for(&spec.metrics, &spec.modes),
        rows,
    })
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

/// 12 significant digits, locale-free.
fn fmt_num(v: f64) -> String {
    format!("{v:.11e}")
}

/// Render the table as CSV text: header row, one row per grid point,
/// newline-separated, numeric cells at 12 significant digits.
pub fn csv_string(table: &SweepTable) -> String {
    let mut out = String::new();
    out.push_str(&table.header.join(","));
    out.push('\n');
    for row in &table.rows {
        let mut first = true;
        for cell in row {
            if !first {
                out.push(',');
            }
            first = false;
            match cell {
                CellValue::Num(v) => out.push_str(&fmt_num(*v)),
                CellValue::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
            }
        }
        out.push('\n');
    }
    out
}

/// Write the table to `path`.
pub fn emit_csv(table: &SweepTable, path: &Path) -> Result<(), SweepError> {
    Ok(std::fs::write(path, csv_string(table))?)
}

/// Parse CSV text produced by [`csv_string`] back into a table.
pub fn parse_csv(text: &str) -> Result<SweepTable, SweepError> {
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| SweepError::Invalid("empty CSV".into()))?
        .split(',')
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let mut row = Vec::new();
        for field in line.split(',') {
            row.push(match field {
                "true" => CellValue::Bool(true),
                "false" => CellValue::Bool(false),
                num => CellValue::Num(num.parse::<f64>().map_err(|e| {
                    SweepError::Invalid(format!("row {}: bad number {num:?}: {e}", i + 2))
                })?),
            });
        }
        if row.len() != header.len() {
            return Err(SweepError::Invalid(format!(
                "row {} has {} fields, header has {}",
                i + 2,
                row.len(),
                header.len()
            )));
        }
        rows.push(row);
    }
    Ok(SweepTable { header, rows })
}
