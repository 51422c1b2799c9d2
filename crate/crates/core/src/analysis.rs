//! Nail-placement error analysis.
//!
//! Errors are defined in the roof frame as desired minus actual: vertical
//! error `e_v = x_d - x_a` (up-slope) and horizontal error `e_h = y_d - y_a`
//! (along the eave). Undeployed nails are reported as failures and never
//! imputed into statistics. Internals are in meters; reports present
//! centimeters.
//!
//! The module also carries the two-run bias-correction workflow (run once,
//! estimate the systematic vertical offset from the mean error, shift the
//! run-two setpoints to cancel it) and the slope amplification check: a
//! horizontal position error `e_x` appears on the sloped surface as
//! `e_x / cos(alpha)` of vertical nail error.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sim::NailRecord;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("cannot summarize an empty group")]
    EmptyGroup,
    #[error("record index {index} outside the desired layout ({count} nails)")]
    IndexMismatch { index: usize, count: usize },
    #[error("no deployed nails to analyze")]
    NoDeployments,
    #[error("zero injected offset")]
    ZeroOffset,
    #[error("write failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization failure: {0}")]
    Json(#[from] serde_json::Error),
}

/// Placement error of one deployed nail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NailError {
    /// Horizontal error `y_d - y_a` (m).
    pub e_h: f64,
    /// Vertical error `x_d - x_a` (m).
    pub e_v: f64,
    /// Roof slope (rad).
    pub alpha: f64,
    pub test_id: String,
    pub nail_index: usize,
}

/// Computes per-nail errors against the desired layout. Undeployed nails
/// are excluded and counted separately.
pub fn nail_errors(
    records: &[NailRecord],
    desired: &[[f64; 2]],
    alpha: f64,
    test_id: &str,
) -> Result<(Vec<NailError>, usize), AnalysisError> {
    let mut errors = Vec::new();
    let mut undeployed = 0;
    for record in records {
        let want = desired.get(record.index).ok_or(AnalysisError::IndexMismatch {
            index: record.index,
            count: desired.len(),
        })?;
        if !record.deployed {
            undeployed += 1;
            continue;
        }
        let (x_a, y_a) = (record.x_roof.unwrap_or(f64::NAN), record.y_roof.unwrap_or(f64::NAN));
        errors.push(NailError {
            e_h: want[1] - y_a,
            e_v: want[0] - x_a,
            alpha,
            test_id: test_id.to_string(),
            nail_index: record.index,
        });
    }
    Ok((errors, undeployed))
}

/// Order statistics of one error component. Quartiles use linear
/// interpolation between order statistics; the even-count median is the
/// mean of the central pair (the p = 0.5 case of the same rule).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub min: f64,
    pub max: f64,
    pub range: f64,
    pub mean: f64,
    pub count: usize,
}

/// Interpolated order statistic at probability `p` of a sorted slice.
fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let rank = p * (n - 1) as f64;
    let lo = rank.floor() as usize;
    let frac = rank - lo as f64;
    if lo + 1 < n {
        sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac
    } else {
        sorted[n - 1]
    }
}

pub fn summarize(values: &[f64]) -> Result<SummaryStats, AnalysisError> {
    if values.is_empty() {
        return Err(AnalysisError::EmptyGroup);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite errors"));
    let min = sorted[0];
    let max = sorted[sorted.len() - 1];
    Ok(SummaryStats {
        median: quantile_sorted(&sorted, 0.5),
        q1: quantile_sorted(&sorted, 0.25),
        q3: quantile_sorted(&sorted, 0.75),
        min,
        max,
        range: max - min,
        mean: values.iter().sum::<f64>() / values.len() as f64,
        count: values.len(),
    })
}

/// Per-angle summary of both error components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorSummary {
    pub alpha_deg: f64,
    pub horizontal: SummaryStats,
    pub vertical: SummaryStats,
    pub count: usize,
}

/// Groups errors by slope angle (degrees, rounded to 1e-6) and summarizes
/// each group. Groups come out sorted by angle.
pub fn summarize_by_angle(errors: &[NailError]) -> Vec<ErrorSummary> {
    let mut keys: Vec<i64> = errors
        .iter()
        .map(|e| (e.alpha.to_degrees() * 1e6).round() as i64)
        .collect();
    keys.sort_unstable();
    keys.dedup();
    keys.iter()
        .map(|&key| {
            let group: Vec<&NailError> = errors
                .iter()
                .filter(|e| ((e.alpha.to_degrees() * 1e6).round() as i64) == key)
                .collect();
            let eh: Vec<f64> = group.iter().map(|e| e.e_h).collect();
            let ev: Vec<f64> = group.iter().map(|e| e.e_v).collect();
            ErrorSummary {
                alpha_deg: key as f64 / 1e6,
                horizontal: summarize(&eh).expect("group is nonempty"),
                vertical: summarize(&ev).expect("group is nonempty"),
                count: group.len(),
            }
        })
        .collect()
}

/// Setpoint shift estimated from a first run: the systematic placement
/// offset `dx = -mean(e_v)` (achieved minus desired). Horizontal correction
/// is off by default, matching the vertical-only procedure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SetpointShift {
    pub dx_up_slope: f64,
    pub dy_along_eave: f64,
}

impl SetpointShift {
    /// Scenario values that cancel the estimated offset: subtract the
    /// estimate from the commanded setpoints
    /// (`guidance.setpoint_shift_*` fields).
    pub fn corrective_scenario_shift(&self) -> (f64, f64) {
        (-self.dx_up_slope, -self.dy_along_eave)
    }
}

pub fn bias_correction(
    errors: &[NailError],
    correct_horizontal: bool,
) -> Result<SetpointShift, AnalysisError> {
    if errors.is_empty() {
        return Err(AnalysisError::NoDeployments);
    }
    let n = errors.len() as f64;
    let mean_ev = errors.iter().map(|e| e.e_v).sum::<f64>() / n;
    let mean_eh = errors.iter().map(|e| e.e_h).sum::<f64>() / n;
    Ok(SetpointShift {
        dx_up_slope: -mean_ev,
        dy_along_eave: if correct_horizontal { -mean_eh } else { 0.0 },
    })
}

/// Geometric prediction of the slope amplification: `1 / cos(alpha)`.
pub fn amplification_prediction(alpha: f64) -> f64 {
    1.0 / alpha.cos()
}

/// Measured amplification ratio: mean vertical error magnitude over the
/// injected horizontal offset.
pub fn amplification_ratio(errors: &[NailError], e_x: f64) -> Result<f64, AnalysisError> {
    if e_x == 0.0 {
        return Err(AnalysisError::ZeroOffset);
    }
    if errors.is_empty() {
        return Err(AnalysisError::NoDeployments);
    }
    let mean_ev = errors.iter().map(|e| e.e_v).sum::<f64>() / errors.len() as f64;
    Ok(mean_ev.abs() / e_x.abs())
}

/// One run's inputs to a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunData {
    pub test_id: String,
    pub alpha_deg: f64,
    pub records: Vec<NailRecord>,
    /// Desired nail positions, roof frame (m).
    pub desired: Vec<[f64; 2]>,
    /// Legal band edges (m).
    pub band: [f64; 2],
}

/// Machine-readable report bundle. Lengths in centimeters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    /// Explicit marker: true when there was nothing to analyze.
    pub empty: bool,
    pub quartile_convention: String,
    pub units: String,
    pub runs: Vec<RunReportEntry>,
    pub angle_groups: Vec<AngleGroupReport>,
    pub attempted: usize,
    pub deployed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReportEntry {
    pub test_id: String,
    pub alpha_deg: f64,
    pub attempted: usize,
    pub deployed: usize,
    pub mean_e_v_cm: Option<f64>,
    pub mean_e_h_cm: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngleGroupReport {
    pub alpha_deg: f64,
    pub count: usize,
    pub vertical_cm: SummaryStats,
    pub horizontal_cm: SummaryStats,
}

fn to_cm(s: &SummaryStats) -> SummaryStats {
    SummaryStats {
        median: s.median * 100.0,
        q1: s.q1 * 100.0,
        q3: s.q3 * 100.0,
        min: s.min * 100.0,
        max: s.max * 100.0,
        range: s.range * 100.0,
        mean: s.mean * 100.0,
        count: s.count,
    }
}

/// Builds the report over any number of runs. Empty input produces an
/// explicit empty-report marker rather than a silent success.
pub fn build_report(runs: &[RunData]) -> Result<Report, AnalysisError> {
    let mut all_errors = Vec::new();
    let mut entries = Vec::new();
    let mut attempted = 0;
    let mut deployed = 0;
    for run in runs {
        let (errors, undeployed) =
            nail_errors(&run.records, &run.desired, run.alpha_deg.to_radians(), &run.test_id)?;
        attempted += run.records.len();
        deployed += run.records.len() - undeployed;
        let mean = |f: fn(&NailError) -> f64| {
            if errors.is_empty() {
                None
            } else {
                Some(errors.iter().map(f).sum::<f64>() / errors.len() as f64 * 100.0)
            }
        };
        entries.push(RunReportEntry {
            test_id: run.test_id.clone(),
            alpha_deg: run.alpha_deg,
            attempted: run.records.len(),
            deployed: run.records.len() - undeployed,
            mean_e_v_cm: mean(|e| e.e_v),
            mean_e_h_cm: mean(|e| e.e_h),
        });
        all_errors.extend(errors);
    }
    let angle_groups = summarize_by_angle(&all_errors)
        .into_iter()
        .map(|g| AngleGroupReport {
            alpha_deg: g.alpha_deg,
            count: g.count,
            vertical_cm: to_cm(&g.vertical),
            horizontal_cm: to_cm(&g.horizontal),
        })
        .collect();
    Ok(Report {
        empty: runs.is_empty(),
        quartile_convention: "linear interpolation between order statistics".to_string(),
        units: "cm".to_string(),
        runs: entries,
        angle_groups,
        attempted,
        deployed,
    })
}

/// Writes `report.json`, `box_stats.csv`, and `nail_scatter.csv` into `dir`.
pub fn write_report(report: &Report, runs: &[RunData], dir: &std::path::Path) -> Result<(), AnalysisError> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("report.json"), serde_json::to_string_pretty(report)?)?;

    let mut box_stats = String::from(
        "alpha_deg,component,count,median_cm,q1_cm,q3_cm,min_cm,max_cm,range_cm,mean_cm\n",
    );
    for g in &report.angle_groups {
        for (component, s) in [("e_v", &g.vertical_cm), ("e_h", &g.horizontal_cm)] {
            box_stats.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                g.alpha_deg, component, s.count, s.median, s.q1, s.q3, s.min, s.max, s.range,
                s.mean
            ));
        }
    }
    std::fs::write(dir.join("box_stats.csv"), box_stats)?;

    let mut scatter = String::from(
        "test_id,alpha_deg,nail,deployed,x_desired_m,y_desired_m,x_actual_m,y_actual_m,band_low_m,band_high_m\n",
    );
    for run in runs {
        for r in &run.records {
            let want = run.desired.get(r.index).copied().unwrap_or([f64::NAN; 2]);
            scatter.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                run.test_id,
                run.alpha_deg,
                r.index,
                r.deployed as u8,
                want[0],
                want[1],
                r.x_roof.map(|v| v.to_string()).unwrap_or_else(|| "nan".into()),
                r.y_roof.map(|v| v.to_string()).unwrap_or_else(|| "nan".into()),
                run.band[0],
                run.band[1],
            ));
        }
    }
    std::fs::write(dir.join("nail_scatter.csv"), scatter)?;
    Ok(())
}
