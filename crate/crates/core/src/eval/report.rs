//! Metrics containers and the CSV/JSON report writers. Every run directory
//! gets a `manifest.json` listing the configuration, the seed, and the files
//! written, so any table can be regenerated from the manifest alone.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::LinkId;

/// One delay estimate versus ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointOutcome {
    pub link: LinkId,
    /// Index of the person point in the scene.
    pub point: usize,
    /// Ground-truth bistatic bin (1-based).
    pub truth_k: usize,
    /// Estimated bin, absent on a false negative.
    pub estimate_k: Option<usize>,
    /// Penalized delay error in ns: `T |k_hat - k*|`, or the full window
    /// length `n T` on a false negative.
    pub error_ns: f64,
}

/// Aggregate delay-estimation metrics for one method.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricsReport {
    pub method: String,
    pub rmse_ns: f64,
    /// Signed mean error over detected cases (ns); zero when nothing was
    /// detected.
    pub bias_ns: f64,
    pub fn_rate: f64,
    /// Present only when a false-positive study ran.
    pub fp_rate: Option<f64>,
    pub per_point: Vec<PointOutcome>,
    /// Method provenance: thresholds, parameter files, iteration counts —
    /// enough to re-run the method.
    pub metadata: serde_json::Value,
}

impl MetricsReport {
    pub fn from_outcomes(
        method: impl Into<String>,
        per_point: Vec<PointOutcome>,
        bin_width_ns: f64,
        metadata: serde_json::Value,
    ) -> Self {
        let n = per_point.len().max(1) as f64;
        let rmse_ns = (per_point
            .iter()
            .map(|o| o.error_ns * o.error_ns)
            .sum::<f64>()
            / n)
            .sqrt();
        let signed: Vec<f64> = per_point
            .iter()
            .filter_map(|o| {
                o.estimate_k
                    .map(|k| bin_width_ns * (k as f64 - o.truth_k as f64))
            })
            .collect();
        let bias_ns = if signed.is_empty() {
            0.0
        } else {
            signed.iter().sum::<f64>() / signed.len() as f64
        };
        let fn_count = per_point.iter().filter(|o| o.estimate_k.is_none()).count();
        MetricsReport {
            method: method.into(),
            rmse_ns,
            bias_ns,
            fn_rate: fn_count as f64 / per_point.len().max(1) as f64,
            fp_rate: None,
            per_point,
            metadata,
        }
    }
}

/// Per-iteration Baum-Welch evaluation (likelihood and test RMSE curves).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BwTrajectory {
    /// Row 0 is the initial parameter set.
    pub rows: Vec<BwTrajectoryRow>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BwTrajectoryRow {
    pub iteration: usize,
    pub loglik: f64,
    pub rmse_ns: f64,
}

/// Localization error tables (RMS and median, in cm) per method.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LocalizationTables {
    pub rms_cm: BTreeMap<String, f64>,
    pub median_cm: BTreeMap<String, f64>,
    pub per_point: Vec<LocalizationOutcome>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LocalizationOutcome {
    pub method: String,
    pub point: usize,
    pub true_x: f64,
    pub true_y: f64,
    pub est_x: Option<f64>,
    pub est_y: Option<f64>,
    pub error_cm: f64,
}

/// Run manifest: configuration echo plus the files the run wrote.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub seed: u64,
    pub config: serde_json::Value,
    pub outputs: Vec<String>,
}

impl Manifest {
    pub fn new(command: impl Into<String>, seed: u64, config: serde_json::Value) -> Self {
        Manifest {
            command: command.into(),
            seed,
            config,
            outputs: Vec::new(),
        }
    }

    pub fn record(&mut self, path: &Path) {
        self.outputs.push(path.display().to_string());
    }

    pub fn write(&self, out_dir: &Path) -> Result<PathBuf> {
        let path = out_dir.join("manifest.json");
        std::fs::write(&path, serde_json::to_string_pretty(self)?)?;
        Ok(path)
    }
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}

/// `method,link,point,truth_k,estimate_k,error_ns` rows for every outcome.
pub fn write_outcomes_csv(path: &Path, reports: &[MetricsReport]) -> Result<()> {
    let mut wtr = csv::Writer::from_path(path)?;
    wtr.write_record([
        "method",
        "link",
        "point",
        "truth_k",
        "estimate_k",
        "error_ns",
    ])?;
    for report in reports {
        for o in &report.per_point {
            wtr.write_record([
                report.method.clone(),
                o.link.to_string(),
                o.point.to_string(),
                o.truth_k.to_string(),
                o.estimate_k.map(|k| k.to_string()).unwrap_or_default(),
                format!("{:.6}", o.error_ns),
            ])?;
        }
    }
    wtr.flush()?;
    Ok(())
}

/// `gamma,rmse,fn_count` rows of a threshold sweep.
pub fn write_sweep_csv(path: &Path, sweep: &crate::baselines::SweepResult) -> Result<()> {
    let mut wtr = csv::Writer::from_path(path)?;
    wtr.write_record(["gamma", "rmse", "fn_count"])?;
    for i in 0..sweep.gammas.len() {
        wtr.write_record([
            format!("{:.9e}", sweep.gammas[i]),
            format!("{:.6}", sweep.rmse_per_gamma[i]),
            sweep.fn_count[i].to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// `iteration,loglik,rmse_ns` rows of a Baum-Welch trajectory.
pub fn write_trajectory_csv(path: &Path, traj: &BwTrajectory) -> Result<()> {
    let mut wtr = csv::Writer::from_path(path)?;
    wtr.write_record(["iteration", "loglik", "rmse_ns"])?;
    for row in &traj.rows {
        wtr.write_record([
            row.iteration.to_string(),
            format!("{:.9}", row.loglik),
            format!("{:.6}", row.rmse_ns),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// `rmse_ns,cdf` rows of an empirical CDF.
pub fn write_cdf_csv(path: &Path, sorted_values: &[f64]) -> Result<()> {
    let mut wtr = csv::Writer::from_path(path)?;
    wtr.write_record(["rmse_ns", "cdf"])?;
    let n = sorted_values.len() as f64;
    for (i, v) in sorted_values.iter().enumerate() {
        wtr.write_record([format!("{v:.6}"), format!("{:.6}", (i + 1) as f64 / n)])?;
    }
    wtr.flush()?;
    Ok(())
}

/// `method,point,true_x,true_y,est_x,est_y,error_cm` rows.
pub fn write_localization_csv(path: &Path, tables: &LocalizationTables) -> Result<()> {
    let mut wtr = csv::Writer::from_path(path)?;
    wtr.write_record([
        "method", "point", "true_x", "true_y", "est_x", "est_y", "error_cm",
    ])?;
    for o in &tables.per_point {
        wtr.write_record([
            o.method.clone(),
            o.point.to_string(),
            format!("{:.4}", o.true_x),
            format!("{:.4}", o.true_y),
            o.est_x.map(|v| format!("{v:.4}")).unwrap_or_default(),
            o.est_y.map(|v| format!("{v:.4}")).unwrap_or_default(),
            format!("{:.2}", o.error_cm),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}
