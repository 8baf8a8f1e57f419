//! Experiment harness: reproduces the measurement protocol on synthetic
//! scenes. A run trains on one scene (labeled observations -> initial HMM
//! parameters or swept threshold), evaluates on another, and reports RMSE,
//! bias, and false-negative rates per method, plus the Baum-Welch
//! likelihood/RMSE trajectory. Companion studies cover false positives on
//! empty-room splits, calibration-window sensitivity, and localization.
//!
//! Every stochastic stage derives its seed deterministically from the run
//! seed, so a run is reproducible from its manifest; per-trial and per-point
//! work parallelizes with a fixed aggregation order.

pub mod report;
pub mod scenes;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;
use std::path::Path;

use crate::baselines::{
    default_gamma_grid, ftc_estimate, ftc_sweep, noise_peak_leading, zetik_estimate, SweepResult,
    DEFAULT_ZETIK_SMOOTHING,
};
use crate::error::{Error, Result};
use crate::geometry::LinkId;
use crate::hmm::{
    baum_welch, estimate_k_star, forward_backward, init_params, HmmParams, DEFAULT_BW_MAX_ITERS,
    DEFAULT_BW_TOL, DEFAULT_EPSILON_ESCAPE,
};
use crate::localize::{
    locate, presence_image_hard, presence_image_soft, sla_locate, LinkTrack, PixelGrid, PixelNorm,
    DEFAULT_PIXEL_PITCH, DEFAULT_P_NORM, DEFAULT_SMOOTHING_SIGMA,
};
use crate::obs::{observations, Condition, LabeledObservation, ObservationVector, SampleSet};
use crate::seeding::{self, stream};
use crate::sim::{make_person_scene_range, make_static_scene_range, CirTrace};

use report::{
    BwTrajectory, BwTrajectoryRow, LocalizationOutcome, LocalizationTables, Manifest,
    MetricsReport, PointOutcome,
};
use scenes::SceneSpec;

/// Methods the harness can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Hmm,
    Ftc,
    Zetik,
}

/// Method selection for a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodChoice {
    All,
    Hmm,
    Ftc,
    Zetik,
}

impl MethodChoice {
    pub fn list(&self) -> Vec<Method> {
        match self {
            MethodChoice::All => vec![Method::Hmm, Method::Ftc, Method::Zetik],
            MethodChoice::Hmm => vec![Method::Hmm],
            MethodChoice::Ftc => vec![Method::Ftc],
            MethodChoice::Zetik => vec![Method::Zetik],
        }
    }
}

impl std::str::FromStr for MethodChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(MethodChoice::All),
            "hmm" => Ok(MethodChoice::Hmm),
            "ftc" => Ok(MethodChoice::Ftc),
            "zetik" => Ok(MethodChoice::Zetik),
            other => Err(Error::Input(format!(
                "unknown method '{other}' (expected hmm | ftc | zetik | all)"
            ))),
        }
    }
}

/// Full train/test experiment configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub train: SceneSpec,
    pub test: SceneSpec,
    pub methods: MethodChoice,
    /// Empty-room captures per link.
    pub n_calibration: usize,
    /// Person-present captures per point and link.
    pub n_test: usize,
    /// Master run seed; scene seeds are mixed in per scene.
    pub seed: u64,
    pub epsilon_escape: f64,
    pub bw_max_iters: usize,
    pub bw_tol: f64,
    pub zetik_smoothing: f64,
}

impl ExperimentConfig {
    pub fn new(train: SceneSpec, test: SceneSpec) -> Self {
        ExperimentConfig {
            train,
            test,
            methods: MethodChoice::All,
            n_calibration: 10,
            n_test: 10,
            seed: 7,
            epsilon_escape: DEFAULT_EPSILON_ESCAPE,
            bw_max_iters: DEFAULT_BW_MAX_ITERS,
            bw_tol: DEFAULT_BW_TOL,
            zetik_smoothing: DEFAULT_ZETIK_SMOOTHING,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_calibration < 2 || self.n_test < 2 {
            return Err(Error::Parameter(format!(
                "sample counts must be >= 2 (calibration {}, test {})",
                self.n_calibration, self.n_test
            )));
        }
        Ok(())
    }
}

/// Effective seed of one scene inside a run.
pub fn scene_run_seed(run_seed: u64, spec: &SceneSpec) -> u64 {
    seeding::subseed(run_seed, stream::SCENE, spec.seed)
}

/// Labeled KL observation vectors for every (person point, link) of a scene:
/// `n_calibration` empty-room captures against `n_test` person captures,
/// using disjoint noise draws from the shared scene channel.
pub fn labeled_observations(
    spec: &SceneSpec,
    n_calibration: usize,
    n_test: usize,
    scene_seed: u64,
) -> Result<Vec<LabeledObservation>> {
    let geom = spec.scene_geometry()?;
    let links = spec.links();
    let calib_sets: Vec<(LinkId, SampleSet)> = links
        .par_iter()
        .map(|&link| {
            let traces =
                make_static_scene_range(&geom, &spec.clutter, link, 0..n_calibration, scene_seed)?;
            Ok((link, trace_sample_set(&traces, Condition::Calibration)?))
        })
        .collect::<Result<_>>()?;
    let jobs: Vec<(usize, usize)> = (0..geom.person_points.len())
        .flat_map(|p| (0..links.len()).map(move |l| (p, l)))
        .collect();
    jobs.par_iter()
        .map(|&(point_idx, link_idx)| {
            let link = links[link_idx];
            let person = geom.person_points[point_idx];
            let traces = make_person_scene_range(
                &geom,
                &spec.clutter,
                link,
                person,
                n_calibration..n_calibration + n_test,
                scene_seed,
            )?;
            let truth_k = traces[0].truth_k_star.expect("person scene");
            let test_set = trace_sample_set(&traces, Condition::Test)?;
            let obs = observations(&calib_sets[link_idx].1, &test_set)?.with_point(point_idx);
            Ok(LabeledObservation { obs, truth_k })
        })
        .collect()
}

fn trace_sample_set(traces: &[CirTrace], condition: Condition) -> Result<SampleSet> {
    let rows: Vec<Vec<f64>> = traces.iter().map(|t| t.energies.clone()).collect();
    SampleSet::new(rows, condition, traces[0].link)
}

fn penalized_outcome(
    labeled: &LabeledObservation,
    estimate_k: Option<usize>,
    t_ns: f64,
) -> PointOutcome {
    let error_ns = match estimate_k {
        Some(k) => t_ns * (k as f64 - labeled.truth_k as f64).abs(),
        None => t_ns * labeled.obs.len() as f64,
    };
    PointOutcome {
        link: labeled.obs.link.expect("harness observations carry links"),
        point: labeled
            .obs
            .point
            .expect("harness observations carry points"),
        truth_k: labeled.truth_k,
        estimate_k,
        error_ns,
    }
}

/// Delay RMSE (ns) of forward-backward estimates under fixed parameters,
/// with the window-length false-negative penalty.
pub fn hmm_rmse_ns(test: &[LabeledObservation], params: &HmmParams, t_ns: f64) -> Result<f64> {
    let mut sq = 0.0;
    for labeled in test {
        let track = forward_backward(&labeled.obs, params)?;
        let outcome = penalized_outcome(labeled, estimate_k_star(&track), t_ns);
        sq += outcome.error_ns * outcome.error_ns;
    }
    Ok((sq / test.len() as f64).sqrt())
}

/// HMM evaluation: Baum-Welch refinement on the (unlabeled) test
/// observations from the training-room initialization, then per-vector
/// forward-backward estimates under the final parameters.
pub fn evaluate_hmm(
    test: &[LabeledObservation],
    params0: &HmmParams,
    bw_max_iters: usize,
    bw_tol: f64,
    t_ns: f64,
) -> Result<(MetricsReport, BwTrajectory, HmmParams)> {
    let vectors: Vec<ObservationVector> = test.iter().map(|l| l.obs.clone()).collect();
    let run = baum_welch(&vectors, params0, bw_max_iters, bw_tol)?;
    let mut rows = vec![BwTrajectoryRow {
        iteration: 0,
        loglik: run.logliks[0],
        rmse_ns: hmm_rmse_ns(test, params0, t_ns)?,
    }];
    for (i, params) in run.iterates.iter().enumerate() {
        rows.push(BwTrajectoryRow {
            iteration: i + 1,
            loglik: run.logliks[i + 1],
            rmse_ns: hmm_rmse_ns(test, params, t_ns)?,
        });
    }
    let outcomes: Vec<PointOutcome> = test
        .iter()
        .map(|l| {
            let track = forward_backward(&l.obs, &run.params)?;
            Ok(penalized_outcome(l, estimate_k_star(&track), t_ns))
        })
        .collect::<Result<_>>()?;
    let metadata = json!({
        "epsilon_escape": run.params.epsilon_escape,
        "bw_iterations": run.iterates.len(),
        "bw_tol": bw_tol,
        "bw_max_iters": bw_max_iters,
        "final_loglik": run.logliks.last(),
    });
    let report = MetricsReport::from_outcomes("hmm", outcomes, t_ns, metadata);
    Ok((report, BwTrajectory { rows }, run.params))
}

/// FTC evaluation: the training room picks the threshold (lowest training
/// RMSE over the default grid), the test room is scored with it. The test
/// room's own oracle sweep is returned for comparison.
pub fn evaluate_ftc(
    train: &[LabeledObservation],
    test: &[LabeledObservation],
    train_t_ns: f64,
    test_t_ns: f64,
) -> Result<(MetricsReport, SweepResult, SweepResult)> {
    let train_grid = default_gamma_grid(train);
    let sweep_train = ftc_sweep(train, &train_grid, train_t_ns * 1e-9)?;
    let gamma = sweep_train.best_gamma;
    let outcomes: Vec<PointOutcome> = test
        .iter()
        .map(|l| penalized_outcome(l, ftc_estimate(&l.obs, gamma), test_t_ns))
        .collect();
    let test_grid = default_gamma_grid(test);
    let sweep_test = ftc_sweep(test, &test_grid, test_t_ns * 1e-9)?;
    let metadata = json!({
        "gamma_transferred": gamma,
        "train_rmse_at_gamma_ns": sweep_train.best_rmse,
        "test_oracle_gamma": sweep_test.best_gamma,
        "test_oracle_rmse_ns": sweep_test.best_rmse,
        "grid_size": train_grid.len(),
    });
    let report = MetricsReport::from_outcomes("ftc", outcomes, test_t_ns, metadata);
    Ok((report, sweep_train, sweep_test))
}

/// Zetik evaluation: per (point, link), a stream of calibration amplitude
/// CIRs followed by person-present frames; each person frame contributes one
/// outcome. Detections inside the guard region clamp to bin 1.
pub fn evaluate_zetik(
    spec: &SceneSpec,
    n_calibration: usize,
    n_test: usize,
    scene_seed: u64,
    smoothing: f64,
    t_ns: f64,
) -> Result<MetricsReport> {
    let geom = spec.scene_geometry()?;
    let links = spec.links();
    let guard = spec.clutter.guard_bins;
    let jobs: Vec<(usize, usize)> = (0..geom.person_points.len())
        .flat_map(|p| (0..links.len()).map(move |l| (p, l)))
        .collect();
    let outcomes: Vec<Vec<PointOutcome>> = jobs
        .par_iter()
        .map(|&(point_idx, link_idx)| {
            let link = links[link_idx];
            let person = geom.person_points[point_idx];
            let calib =
                make_static_scene_range(&geom, &spec.clutter, link, 0..n_calibration, scene_seed)?;
            let person_traces = make_person_scene_range(
                &geom,
                &spec.clutter,
                link,
                person,
                n_calibration..n_calibration + n_test,
                scene_seed,
            )?;
            let truth_k = person_traces[0].truth_k_star.expect("person scene");
            let stream: Vec<Vec<f64>> = calib
                .iter()
                .chain(&person_traces)
                .map(|t| t.amplitude_view())
                .collect();
            let detections = zetik_estimate(&stream, smoothing, noise_peak_leading(guard))?;
            Ok(detections[n_calibration..]
                .iter()
                .map(|det| {
                    let estimate = det
                        .first_crossing
                        .map(|j| if j > guard { j - guard } else { 1 });
                    let labeled = LabeledObservation {
                        obs: ObservationVector {
                            values: vec![0.0; geom.n_bins],
                            link: Some(link),
                            point: Some(point_idx),
                        },
                        truth_k,
                    };
                    penalized_outcome(&labeled, estimate, t_ns)
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    let outcomes: Vec<PointOutcome> = outcomes.into_iter().flatten().collect();
    let metadata = json!({
        "smoothing": smoothing,
        "guard_bins": guard,
        "frames_per_point": n_test,
    });
    Ok(MetricsReport::from_outcomes(
        "zetik", outcomes, t_ns, metadata,
    ))
}

/// Everything a train/test run produces.
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub reports: Vec<MetricsReport>,
    pub bw_trajectory: Option<BwTrajectory>,
    pub sweep_train: Option<SweepResult>,
    pub sweep_test: Option<SweepResult>,
    /// Parameters fitted on the training scene.
    pub initial_params: HmmParams,
    /// Parameters after Baum-Welch on the test scene (HMM method only).
    pub refined_params: Option<HmmParams>,
}

/// Trains on `cfg.train`, evaluates every selected method on `cfg.test`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let train_seed = scene_run_seed(cfg.seed, &cfg.train);
    let test_seed = scene_run_seed(cfg.seed, &cfg.test);
    let train = labeled_observations(&cfg.train, cfg.n_calibration, cfg.n_test, train_seed)?;
    let test = labeled_observations(&cfg.test, cfg.n_calibration, cfg.n_test, test_seed)?;
    let train_t_ns = cfg.train.geometry.bin_width_ns;
    let test_t_ns = cfg.test.geometry.bin_width_ns;
    let initial_params = init_params(&train, cfg.epsilon_escape)?;
    let mut out = ExperimentOutput {
        reports: Vec::new(),
        bw_trajectory: None,
        sweep_train: None,
        sweep_test: None,
        initial_params: initial_params.clone(),
        refined_params: None,
    };
    for method in cfg.methods.list() {
        match method {
            Method::Hmm => {
                let (report, traj, refined) = evaluate_hmm(
                    &test,
                    &initial_params,
                    cfg.bw_max_iters,
                    cfg.bw_tol,
                    test_t_ns,
                )?;
                out.reports.push(report);
                out.bw_trajectory = Some(traj);
                out.refined_params = Some(refined);
            }
            Method::Ftc => {
                let (report, sweep_train, sweep_test) =
                    evaluate_ftc(&train, &test, train_t_ns, test_t_ns)?;
                out.reports.push(report);
                out.sweep_train = Some(sweep_train);
                out.sweep_test = Some(sweep_test);
            }
            Method::Zetik => {
                out.reports.push(evaluate_zetik(
                    &cfg.test,
                    cfg.n_calibration,
                    cfg.n_test,
                    test_seed,
                    cfg.zetik_smoothing,
                    test_t_ns,
                )?);
            }
        }
    }
    Ok(out)
}

/// Writes the run artifacts (outcome CSVs, sweeps, trajectory, parameter
/// files, JSON summary) under `out_dir` and returns the manifest.
pub fn write_experiment(
    out_dir: &Path,
    cfg: &ExperimentConfig,
    out: &ExperimentOutput,
) -> Result<Manifest> {
    report::ensure_dir(out_dir)?;
    let mut manifest = Manifest::new("report", cfg.seed, serde_json::to_value(cfg)?);
    let outcomes = out_dir.join("outcomes.csv");
    report::write_outcomes_csv(&outcomes, &out.reports)?;
    manifest.record(&outcomes);
    if let Some(traj) = &out.bw_trajectory {
        let path = out_dir.join("bw_trajectory.csv");
        report::write_trajectory_csv(&path, traj)?;
        manifest.record(&path);
    }
    if let Some(sweep) = &out.sweep_train {
        let path = out_dir.join("sweep_train.csv");
        report::write_sweep_csv(&path, sweep)?;
        manifest.record(&path);
    }
    if let Some(sweep) = &out.sweep_test {
        let path = out_dir.join("sweep_test.csv");
        report::write_sweep_csv(&path, sweep)?;
        manifest.record(&path);
    }
    let init_path = out_dir.join("params_init.toml");
    out.initial_params.save(&init_path)?;
    manifest.record(&init_path);
    if let Some(refined) = &out.refined_params {
        let path = out_dir.join("params_refined.toml");
        refined.save(&path)?;
        manifest.record(&path);
    }
    let summaries: Vec<serde_json::Value> = out
        .reports
        .iter()
        .map(|r| {
            json!({
                "method": r.method,
                "rmse_ns": r.rmse_ns,
                "bias_ns": r.bias_ns,
                "fn_rate": r.fn_rate,
                "fp_rate": r.fp_rate,
                "metadata": r.metadata,
            })
        })
        .collect();
    let summary_path = out_dir.join("summary.json");
    std::fs::write(
        &summary_path,
        serde_json::to_string_pretty(&json!({
            "train": cfg.train.name,
            "test": cfg.test.name,
            "seed": cfg.seed,
            "n_calibration": cfg.n_calibration,
            "n_test": cfg.n_test,
            "methods": summaries,
        }))?,
    )?;
    manifest.record(&summary_path);
    manifest.write(out_dir)?;
    Ok(manifest)
}

/// Outcome of a false-positive study.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FpTrials {
    pub trials: usize,
    pub detections: usize,
}

impl FpTrials {
    pub fn fp_rate(&self) -> f64 {
        self.detections as f64 / self.trials as f64
    }
}

/// False-positive trials: each trial splits an empty-room pool into random
/// even halves, computes the KL observation vector between them, and runs
/// forward-backward under `params` with no Baum-Welch refinement. A
/// detection in an empty room is a false positive.
pub fn false_positive_trials(
    pools: &[SampleSet],
    params: &HmmParams,
    trials_per_pool: usize,
    seed: u64,
) -> Result<FpTrials> {
    params.validate()?;
    if trials_per_pool == 0 {
        return Err(Error::Parameter("trial count must be positive".into()));
    }
    if pools.is_empty() {
        return Err(Error::Input("no empty-room pools given".into()));
    }
    for (i, pool) in pools.iter().enumerate() {
        if pool.n_realizations() < 4 {
            return Err(Error::Input(format!(
                "pool {i} has {} realizations; an even split needs >= 4",
                pool.n_realizations()
            )));
        }
    }
    let jobs: Vec<(usize, usize)> = (0..pools.len())
        .flat_map(|p| (0..trials_per_pool).map(move |t| (p, t)))
        .collect();
    let detections: usize = jobs
        .par_iter()
        .map(|&(pool_idx, trial)| {
            let pool = &pools[pool_idx];
            let mut rng = seeding::stream_rng(
                seed,
                stream::TRIAL,
                (pool_idx * trials_per_pool + trial) as u64,
            );
            let mut idx: Vec<usize> = (0..pool.n_realizations()).collect();
            idx.shuffle(&mut rng);
            let half = pool.n_realizations() / 2;
            let rows = pool.rows();
            let take =
                |ids: &[usize]| -> Vec<Vec<f64>> { ids.iter().map(|&i| rows[i].clone()).collect() };
            let calib = SampleSet::new(take(&idx[..half]), Condition::Calibration, pool.link)?;
            let test = SampleSet::new(take(&idx[half..2 * half]), Condition::Test, pool.link)?;
            let obs = observations(&calib, &test)?;
            let track = forward_backward(&obs, params)?;
            Ok(usize::from(track.detected))
        })
        .collect::<Result<Vec<usize>>>()?
        .into_iter()
        .sum();
    Ok(FpTrials {
        trials: jobs.len(),
        detections,
    })
}

/// Builds one empty-room pool per link of a scene.
pub fn empty_room_pools(
    spec: &SceneSpec,
    pool_size: usize,
    scene_seed: u64,
) -> Result<Vec<SampleSet>> {
    let geom = spec.scene_geometry()?;
    spec.links()
        .par_iter()
        .map(|&link| {
            let traces =
                make_static_scene_range(&geom, &spec.clutter, link, 0..pool_size, scene_seed)?;
            trace_sample_set(&traces, Condition::Calibration)
        })
        .collect()
}

/// Calibration-window sensitivity study configuration.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct WindowStudyConfig {
    /// Sequential calibration samples per window.
    pub subset_size: usize,
    /// Captures per calibration block.
    pub block_len: usize,
    /// Calibration blocks (windows never span blocks).
    pub n_blocks: usize,
    /// Person captures per point.
    pub n_test: usize,
    pub bw_max_iters: usize,
    pub bw_tol: f64,
}

/// Per-window pipeline RMSEs of the study.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WindowStudy {
    pub subset_size: usize,
    pub window_rmses: Vec<f64>,
}

impl WindowStudy {
    /// Sorted (rmse, cumulative fraction) pairs.
    pub fn cdf(&self) -> Vec<(f64, f64)> {
        let mut sorted = self.window_rmses.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        let n = sorted.len() as f64;
        sorted
            .into_iter()
            .enumerate()
            .map(|(i, v)| (v, (i + 1) as f64 / n))
            .collect()
    }

    pub fn median(&self) -> f64 {
        median(&self.window_rmses)
    }
}

fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty());
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Number of sliding windows the study enumerates.
pub fn window_count(block_len: usize, subset_size: usize, n_blocks: usize) -> usize {
    n_blocks * (block_len.saturating_sub(subset_size) + 1)
}

/// Sensitivity of the pipeline to which calibration window is used: slides a
/// `subset_size`-sample window through each calibration block, recomputes
/// the observations, reruns Baum-Welch from `params0`, and records the RMSE
/// per window.
pub fn empty_room_subset_study(
    spec: &SceneSpec,
    params0: &HmmParams,
    cfg: &WindowStudyConfig,
    scene_seed: u64,
) -> Result<WindowStudy> {
    params0.validate()?;
    if cfg.subset_size < 2 {
        return Err(Error::Parameter("subset_size must be >= 2".into()));
    }
    if cfg.block_len < cfg.subset_size || cfg.n_blocks == 0 {
        return Err(Error::Parameter(format!(
            "calibration blocks ({} x {}) cannot hold {}-sample windows",
            cfg.n_blocks, cfg.block_len, cfg.subset_size
        )));
    }
    let pool_size = cfg.n_blocks * cfg.block_len;
    let geom = spec.scene_geometry()?;
    let links = spec.links();
    let t_ns = spec.geometry.bin_width_ns;
    // Fixed captures: the full calibration pool and the person measurements.
    let pools: Vec<Vec<CirTrace>> = links
        .iter()
        .map(|&link| make_static_scene_range(&geom, &spec.clutter, link, 0..pool_size, scene_seed))
        .collect::<Result<_>>()?;
    let person_traces: Vec<Vec<CirTrace>> = (0..geom.person_points.len())
        .flat_map(|p| links.iter().enumerate().map(move |(l, _)| (p, l)))
        .map(|(p, l)| {
            make_person_scene_range(
                &geom,
                &spec.clutter,
                links[l],
                geom.person_points[p],
                pool_size..pool_size + cfg.n_test,
                scene_seed,
            )
        })
        .collect::<Result<_>>()?;
    let windows: Vec<(usize, usize)> = (0..cfg.n_blocks)
        .flat_map(|b| (0..=(cfg.block_len - cfg.subset_size)).map(move |s| (b, s)))
        .collect();
    debug_assert_eq!(
        windows.len(),
        window_count(cfg.block_len, cfg.subset_size, cfg.n_blocks)
    );
    let window_rmses: Vec<f64> = windows
        .par_iter()
        .map(|&(block, start)| {
            let lo = block * cfg.block_len + start;
            let hi = lo + cfg.subset_size;
            let calib_sets: Vec<SampleSet> = pools
                .iter()
                .map(|traces| trace_sample_set(&traces[lo..hi], Condition::Calibration))
                .collect::<Result<_>>()?;
            let labeled: Vec<LabeledObservation> = person_traces
                .iter()
                .enumerate()
                .map(|(job, traces)| {
                    let (point_idx, link_idx) = (job / links.len(), job % links.len());
                    let test_set = trace_sample_set(traces, Condition::Test)?;
                    let obs = observations(&calib_sets[link_idx], &test_set)?.with_point(point_idx);
                    Ok(LabeledObservation {
                        obs,
                        truth_k: traces[0].truth_k_star.expect("person scene"),
                    })
                })
                .collect::<Result<_>>()?;
            let vectors: Vec<ObservationVector> = labeled.iter().map(|l| l.obs.clone()).collect();
            let run = baum_welch(&vectors, params0, cfg.bw_max_iters, cfg.bw_tol)?;
            hmm_rmse_ns(&labeled, &run.params, t_ns)
        })
        .collect::<Result<_>>()?;
    Ok(WindowStudy {
        subset_size: cfg.subset_size,
        window_rmses,
    })
}

/// Localization study options.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LocalizationOptions {
    /// Pixel pitch (meters).
    pub pitch: f64,
    /// Gaussian smoothing sigma (meters).
    pub smoothing_sigma: f64,
    /// p-norm exponent for evidence fusion.
    pub p_norm: f64,
    pub n_calibration: usize,
    pub n_test: usize,
    pub bw_max_iters: usize,
    pub bw_tol: f64,
}

impl Default for LocalizationOptions {
    fn default() -> Self {
        LocalizationOptions {
            pitch: DEFAULT_PIXEL_PITCH,
            smoothing_sigma: DEFAULT_SMOOTHING_SIGMA,
            p_norm: DEFAULT_P_NORM,
            n_calibration: 10,
            n_test: 10,
            bw_max_iters: DEFAULT_BW_MAX_ITERS,
            bw_tol: DEFAULT_BW_TOL,
        }
    }
}

/// Names of the three localization methods, in report order.
pub const LOCALIZATION_METHODS: [&str; 3] = ["forward-soft", "forward-hard", "sla"];

/// Evaluates forward-soft (posterior presence image), forward-hard
/// (range-only indicator image), and the elliptical least-squares baseline
/// on every person point of a scene. Failures to produce an estimate are
/// penalized with the room-diagonal error so methods stay comparable.
pub fn localization_report(
    spec: &SceneSpec,
    params0: &HmmParams,
    opts: &LocalizationOptions,
    scene_seed: u64,
) -> Result<LocalizationTables> {
    let geom = spec.scene_geometry()?;
    let links = spec.links();
    if links.len() < 3 {
        return Err(Error::Input(format!(
            "localization needs >= 3 links, scene has {}",
            links.len()
        )));
    }
    let labeled = labeled_observations(spec, opts.n_calibration, opts.n_test, scene_seed)?;
    let vectors: Vec<ObservationVector> = labeled.iter().map(|l| l.obs.clone()).collect();
    let refined = baum_welch(&vectors, params0, opts.bw_max_iters, opts.bw_tol)?.params;
    let region = geom.person_region();
    let grid = PixelGrid::cover(region, opts.pitch)?;
    let penalty_cm = 100.0 * (region.width().powi(2) + region.height().powi(2)).sqrt();
    let norm = PixelNorm::Power(opts.p_norm);
    let n_points = geom.person_points.len();
    let per_point: Vec<Vec<LocalizationOutcome>> = (0..n_points)
        .into_par_iter()
        .map(|point_idx| {
            let truth = geom.person_points[point_idx];
            let tracks: Vec<LinkTrack> = labeled
                .iter()
                .filter(|l| l.obs.point == Some(point_idx))
                .map(|l| {
                    Ok(LinkTrack {
                        link: l.obs.link.expect("link set"),
                        track: forward_backward(&l.obs, &refined)?,
                    })
                })
                .collect::<Result<_>>()?;
            let estimates: Vec<(LinkId, Option<usize>)> = tracks
                .iter()
                .map(|t| (t.link, t.track.k_star_hat))
                .collect();
            let mut outcomes = Vec::with_capacity(3);
            let soft = presence_image_soft(&geom, &tracks, &grid, norm, opts.smoothing_sigma)
                .and_then(|img| locate(&img));
            outcomes.push(localization_outcome(
                "forward-soft",
                point_idx,
                truth,
                soft.ok(),
                penalty_cm,
            ));
            let hard = presence_image_hard(&geom, &estimates, &grid, norm, opts.smoothing_sigma)
                .and_then(|img| locate(&img));
            outcomes.push(localization_outcome(
                "forward-hard",
                point_idx,
                truth,
                hard.ok(),
                penalty_cm,
            ));
            let sla = sla_locate(&geom, &estimates).map(|fix| fix.point);
            outcomes.push(localization_outcome(
                "sla",
                point_idx,
                truth,
                sla.ok(),
                penalty_cm,
            ));
            Ok(outcomes)
        })
        .collect::<Result<_>>()?;
    let per_point: Vec<LocalizationOutcome> = per_point.into_iter().flatten().collect();
    let mut rms_cm = std::collections::BTreeMap::new();
    let mut median_cm = std::collections::BTreeMap::new();
    for method in LOCALIZATION_METHODS {
        let errors: Vec<f64> = per_point
            .iter()
            .filter(|o| o.method == method)
            .map(|o| o.error_cm)
            .collect();
        let rms = (errors.iter().map(|e| e * e).sum::<f64>() / errors.len() as f64).sqrt();
        rms_cm.insert(method.to_string(), rms);
        median_cm.insert(method.to_string(), median(&errors));
    }
    Ok(LocalizationTables {
        rms_cm,
        median_cm,
        per_point,
    })
}

fn localization_outcome(
    method: &str,
    point: usize,
    truth: crate::geometry::Point,
    estimate: Option<crate::geometry::Point>,
    penalty_cm: f64,
) -> LocalizationOutcome {
    let error_cm = estimate
        .map(|e| 100.0 * e.dist(truth))
        .unwrap_or(penalty_cm);
    LocalizationOutcome {
        method: method.to_string(),
        point,
        true_x: truth.x,
        true_y: truth.y,
        est_x: estimate.map(|e| e.x),
        est_y: estimate.map(|e| e.y),
        error_cm,
    }
}
