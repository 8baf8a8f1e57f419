//! Command-line harness over the library: synthetic scene simulation,
//! observation extraction, HMM training and estimation, threshold sweeps,
//! false-positive trials, localization, and full train/test reports. Every
//! command writes its outputs plus a `manifest.json` under `--out`.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use uwb_ranging::baselines::DEFAULT_ZETIK_SMOOTHING;
use uwb_ranging::eval::report::{self, Manifest};
use uwb_ranging::eval::scenes::SceneSpec;
use uwb_ranging::eval::{
    empty_room_pools, empty_room_subset_study, false_positive_trials, labeled_observations,
    localization_report, run_experiment, scene_run_seed, write_experiment, ExperimentConfig,
    LocalizationOptions, MethodChoice, WindowStudyConfig,
};
use uwb_ranging::hmm::{
    estimate_k_star, forward_backward, init_params, HmmParams, DEFAULT_BW_MAX_ITERS,
    DEFAULT_BW_TOL, DEFAULT_EPSILON_ESCAPE,
};
use uwb_ranging::localize::{DEFAULT_PIXEL_PITCH, DEFAULT_P_NORM, DEFAULT_SMOOTHING_SIGMA};
use uwb_ranging::obs::{read_observations_csv, write_observations_csv};
use uwb_ranging::sim::{make_person_scene_range, make_static_scene_range, write_traces_csv};
use uwb_ranging::{Error, Result};

#[derive(Parser)]
#[command(
    name = "uwb-ranging",
    version,
    about = "Bistatic delay estimation and localization on synthetic cluttered UWB channels"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate synthetic CIR traces for a scene and export them as CSV.
    Simulate {
        /// Scene file path or preset name (room-a | room-b | through-wall).
        #[arg(long)]
        scene: String,
        #[arg(long)]
        out: PathBuf,
        /// Empty-room realizations per link.
        #[arg(long, default_value_t = 10)]
        static_count: usize,
        /// Person-present realizations per point and link.
        #[arg(long, default_value_t = 10)]
        person_count: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Compute labeled KL observation vectors for a scene.
    Observe {
        #[arg(long)]
        scene: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 10)]
        calibration: usize,
        #[arg(long, default_value_t = 10)]
        test: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Fit initial HMM parameters on a scene's labeled observations.
    Train {
        #[arg(long)]
        scene: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 10)]
        calibration: usize,
        #[arg(long, default_value_t = 10)]
        test: usize,
        #[arg(long, default_value_t = DEFAULT_EPSILON_ESCAPE)]
        epsilon: f64,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Forward-backward delay estimates from saved parameters and observations.
    Estimate {
        /// HMM parameter file (TOML).
        #[arg(long)]
        params: PathBuf,
        /// Observation CSV (point,link,bin,value).
        #[arg(long)]
        obs: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// RMSE-versus-threshold sweeps for first threshold crossing.
    Sweep {
        #[arg(long)]
        train: String,
        #[arg(long)]
        test: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 10)]
        calibration: usize,
        #[arg(long, default_value_t = 10)]
        test_count: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Empty-room false-positive trials (no Baum-Welch refinement).
    FpTrials {
        /// Scene providing the empty-room pools.
        #[arg(long)]
        scene: String,
        /// Scene whose labeled data trains the parameters (default: --scene).
        #[arg(long)]
        train: Option<String>,
        #[arg(long)]
        out: PathBuf,
        /// Trials per link pool.
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        /// Empty-room pool size per link (split into two halves per trial).
        #[arg(long, default_value_t = 20)]
        pool: usize,
        #[arg(long, default_value_t = 10)]
        calibration: usize,
        #[arg(long, default_value_t = 10)]
        test: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Presence-image and least-squares localization error tables.
    Localize {
        #[arg(long)]
        scene: String,
        /// Scene whose labeled data trains the parameters (default: --scene).
        #[arg(long)]
        train: Option<String>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_PIXEL_PITCH)]
        pitch: f64,
        #[arg(long, default_value_t = DEFAULT_SMOOTHING_SIGMA)]
        sigma: f64,
        #[arg(long, default_value_t = DEFAULT_P_NORM)]
        p: f64,
        #[arg(long, default_value_t = 10)]
        calibration: usize,
        #[arg(long, default_value_t = 10)]
        test: usize,
        /// Person point whose presence image is exported as a CSV grid.
        #[arg(long, default_value_t = 0)]
        image_point: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Full train/test experiment: HMM, FTC, and Zetik reports.
    Report {
        #[arg(long)]
        train: String,
        #[arg(long)]
        test: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "all")]
        method: String,
        #[arg(long, default_value_t = 10)]
        calibration: usize,
        #[arg(long, default_value_t = 10)]
        test_count: usize,
        #[arg(long, default_value_t = DEFAULT_EPSILON_ESCAPE)]
        epsilon: f64,
        #[arg(long, default_value_t = DEFAULT_BW_MAX_ITERS)]
        bw_iters: usize,
        #[arg(long, default_value_t = DEFAULT_BW_TOL)]
        bw_tol: f64,
        #[arg(long, default_value_t = DEFAULT_ZETIK_SMOOTHING)]
        zetik_smoothing: f64,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Calibration-window sensitivity study (empirical CDF of RMSE).
    Windows {
        #[arg(long)]
        scene: String,
        /// Scene whose labeled data trains the parameters (default: --scene).
        #[arg(long)]
        train: Option<String>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 20)]
        subset_size: usize,
        #[arg(long, default_value_t = 100)]
        block_len: usize,
        #[arg(long, default_value_t = 2)]
        blocks: usize,
        #[arg(long, default_value_t = 10)]
        test: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

fn resolve_scene(arg: &str) -> Result<SceneSpec> {
    if let Some(preset) = SceneSpec::preset(arg) {
        Ok(preset)
    } else {
        let path = Path::new(arg);
        if !path.exists() {
            return Err(Error::Input(format!(
                "'{arg}' is neither a preset (room-a | room-b | through-wall) nor an existing file"
            )));
        }
        SceneSpec::load(path)
    }
}

/// Trains initial parameters on a scene with the in-room defaults.
fn train_params(spec: &SceneSpec, calibration: usize, test: usize, seed: u64) -> Result<HmmParams> {
    let labeled = labeled_observations(spec, calibration, test, scene_run_seed(seed, spec))?;
    init_params(&labeled, DEFAULT_EPSILON_ESCAPE)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate {
            scene,
            out,
            static_count,
            person_count,
            seed,
        } => {
            let spec = resolve_scene(&scene)?;
            let geom = spec.scene_geometry()?;
            let scene_seed = scene_run_seed(seed, &spec);
            report::ensure_dir(&out)?;
            let mut manifest = Manifest::new(
                "simulate",
                seed,
                json!({
                    "scene": spec.name,
                    "static_count": static_count,
                    "person_count": person_count,
                }),
            );
            let mut static_traces = Vec::new();
            for link in spec.links() {
                static_traces.extend(make_static_scene_range(
                    &geom,
                    &spec.clutter,
                    link,
                    0..static_count,
                    scene_seed,
                )?);
            }
            let static_path = out.join("static.csv");
            write_traces_csv(std::fs::File::create(&static_path)?, &static_traces)?;
            manifest.record(&static_path);
            for (pi, point) in geom.person_points.iter().enumerate() {
                let mut traces = Vec::new();
                for link in spec.links() {
                    traces.extend(make_person_scene_range(
                        &geom,
                        &spec.clutter,
                        link,
                        *point,
                        static_count..static_count + person_count,
                        scene_seed,
                    )?);
                }
                let path = out.join(format!("person_point_{pi}.csv"));
                write_traces_csv(std::fs::File::create(&path)?, &traces)?;
                manifest.record(&path);
            }
            manifest.write(&out)?;
            println!(
                "wrote {} static and {} person trace files under {}",
                1,
                geom.person_points.len(),
                out.display()
            );
        }
        Command::Observe {
            scene,
            out,
            calibration,
            test,
            seed,
        } => {
            let spec = resolve_scene(&scene)?;
            let labeled =
                labeled_observations(&spec, calibration, test, scene_run_seed(seed, &spec))?;
            report::ensure_dir(&out)?;
            let mut manifest = Manifest::new(
                "observe",
                seed,
                json!({
                    "scene": spec.name,
                    "calibration": calibration,
                    "test": test,
                }),
            );
            let obs_path = out.join("observations.csv");
            let vectors: Vec<_> = labeled.iter().map(|l| l.obs.clone()).collect();
            write_observations_csv(std::fs::File::create(&obs_path)?, &vectors)?;
            manifest.record(&obs_path);
            let truth_path = out.join("truth.csv");
            {
                let mut wtr = csv::Writer::from_path(&truth_path)?;
                wtr.write_record(["point", "link", "truth_k"])?;
                for l in &labeled {
                    wtr.write_record([
                        l.obs.point.expect("point set").to_string(),
                        l.obs.link.expect("link set").to_string(),
                        l.truth_k.to_string(),
                    ])?;
                }
                wtr.flush()?;
            }
            manifest.record(&truth_path);
            manifest.write(&out)?;
            println!("wrote {} observation vectors", labeled.len());
        }
        Command::Train {
            scene,
            out,
            calibration,
            test,
            epsilon,
            seed,
        } => {
            let spec = resolve_scene(&scene)?;
            let labeled =
                labeled_observations(&spec, calibration, test, scene_run_seed(seed, &spec))?;
            let params = init_params(&labeled, epsilon)?;
            report::ensure_dir(&out)?;
            let mut manifest = Manifest::new(
                "train",
                seed,
                json!({
                    "scene": spec.name,
                    "calibration": calibration,
                    "test": test,
                    "epsilon": epsilon,
                }),
            );
            let path = out.join("params.toml");
            params.save(&path)?;
            manifest.record(&path);
            manifest.write(&out)?;
            println!("trained parameters written to {}", path.display());
        }
        Command::Estimate { params, obs, out } => {
            let params = HmmParams::load(&params)?;
            let vectors = read_observations_csv(std::fs::File::open(&obs)?)?;
            if vectors.is_empty() {
                return Err(Error::Input("observation file holds no vectors".into()));
            }
            report::ensure_dir(&out)?;
            let mut manifest = Manifest::new(
                "estimate",
                0,
                json!({
                    "obs": obs.display().to_string(),
                    "epsilon_escape": params.epsilon_escape,
                }),
            );
            let est_path = out.join("estimates.csv");
            let post_path = out.join("posteriors.csv");
            {
                let mut est = csv::Writer::from_path(&est_path)?;
                est.write_record(["point", "link", "k_hat", "detected", "loglik"])?;
                let mut post = csv::Writer::from_path(&post_path)?;
                post.write_record(["point", "link", "bin", "alpha"])?;
                for v in &vectors {
                    let track = forward_backward(v, &params)?;
                    let point = v.point.map(|p| p.to_string()).unwrap_or_default();
                    let link = v.link.map(|l| l.to_string()).unwrap_or_default();
                    est.write_record([
                        point.clone(),
                        link.clone(),
                        estimate_k_star(&track)
                            .map(|k| k.to_string())
                            .unwrap_or_default(),
                        track.detected.to_string(),
                        format!("{:.9}", track.loglik),
                    ])?;
                    for (i, a) in track.alpha.iter().enumerate() {
                        post.write_record([
                            point.clone(),
                            link.clone(),
                            (i + 1).to_string(),
                            format!("{a:.9e}"),
                        ])?;
                    }
                }
                est.flush()?;
                post.flush()?;
            }
            manifest.record(&est_path);
            manifest.record(&post_path);
            manifest.write(&out)?;
            println!("estimates written to {}", est_path.display());
        }
        Command::Sweep {
            train,
            test,
            out,
            calibration,
            test_count,
            seed,
        } => {
            let mut cfg = ExperimentConfig::new(resolve_scene(&train)?, resolve_scene(&test)?);
            cfg.methods = MethodChoice::Ftc;
            cfg.n_calibration = calibration;
            cfg.n_test = test_count;
            cfg.seed = seed;
            let output = run_experiment(&cfg)?;
            let manifest = write_experiment(&out, &cfg, &output)?;
            let report = &output.reports[0];
            println!(
                "transferred-threshold RMSE {:.3} ns ({} outputs under {})",
                report.rmse_ns,
                manifest.outputs.len(),
                out.display()
            );
        }
        Command::FpTrials {
            scene,
            train,
            out,
            trials,
            pool,
            calibration,
            test,
            seed,
        } => {
            let spec = resolve_scene(&scene)?;
            let train_spec = train.map(|t| resolve_scene(&t)).transpose()?;
            let train_spec = train_spec.as_ref().unwrap_or(&spec);
            let params = train_params(train_spec, calibration, test, seed)?;
            let pools = empty_room_pools(&spec, pool, scene_run_seed(seed, &spec))?;
            let result = false_positive_trials(&pools, &params, trials, seed)?;
            report::ensure_dir(&out)?;
            let mut manifest = Manifest::new(
                "fp-trials",
                seed,
                json!({
                    "scene": spec.name,
                    "train": train_spec.name,
                    "trials_per_pool": trials,
                    "pool": pool,
                }),
            );
            let path = out.join("fp_trials.json");
            std::fs::write(
                &path,
                serde_json::to_string_pretty(&json!({
                    "trials": result.trials,
                    "detections": result.detections,
                    "fp_rate": result.fp_rate(),
                    "epsilon_escape": params.epsilon_escape,
                }))?,
            )?;
            manifest.record(&path);
            manifest.write(&out)?;
            println!(
                "{} / {} trials detected: fp_rate = {:.3e}",
                result.detections,
                result.trials,
                result.fp_rate()
            );
        }
        Command::Localize {
            scene,
            train,
            out,
            pitch,
            sigma,
            p,
            calibration,
            test,
            image_point,
            seed,
        } => {
            let spec = resolve_scene(&scene)?;
            let train_spec = train.map(|t| resolve_scene(&t)).transpose()?;
            let train_spec = train_spec.as_ref().unwrap_or(&spec);
            let params = train_params(train_spec, calibration, test, seed)?;
            let opts = LocalizationOptions {
                pitch,
                smoothing_sigma: sigma,
                p_norm: p,
                n_calibration: calibration,
                n_test: test,
                ..LocalizationOptions::default()
            };
            let tables = localization_report(&spec, &params, &opts, scene_run_seed(seed, &spec))?;
            report::ensure_dir(&out)?;
            let mut manifest = Manifest::new(
                "localize",
                seed,
                json!({
                    "scene": spec.name,
                    "train": train_spec.name,
                    "pitch": pitch,
                    "sigma": sigma,
                    "p": p,
                }),
            );
            let path = out.join("localization.csv");
            report::write_localization_csv(&path, &tables)?;
            manifest.record(&path);
            let summary = out.join("localization_summary.json");
            std::fs::write(
                &summary,
                serde_json::to_string_pretty(&json!({
                    "rms_cm": tables.rms_cm,
                    "median_cm": tables.median_cm,
                }))?,
            )?;
            manifest.record(&summary);
            write_sample_image(
                &out,
                &spec,
                &params,
                &opts,
                image_point,
                seed,
                &mut manifest,
            )?;
            manifest.write(&out)?;
            for (method, med) in &tables.median_cm {
                println!(
                    "{method}: median {med:.1} cm, rms {:.1} cm",
                    tables.rms_cm[method]
                );
            }
        }
        Command::Report {
            train,
            test,
            out,
            method,
            calibration,
            test_count,
            epsilon,
            bw_iters,
            bw_tol,
            zetik_smoothing,
            seed,
        } => {
            let mut cfg = ExperimentConfig::new(resolve_scene(&train)?, resolve_scene(&test)?);
            cfg.methods = method.parse()?;
            cfg.n_calibration = calibration;
            cfg.n_test = test_count;
            cfg.epsilon_escape = epsilon;
            cfg.bw_max_iters = bw_iters;
            cfg.bw_tol = bw_tol;
            cfg.zetik_smoothing = zetik_smoothing;
            cfg.seed = seed;
            let output = run_experiment(&cfg)?;
            write_experiment(&out, &cfg, &output)?;
            for report in &output.reports {
                println!(
                    "{:>6}: RMSE {:.3} ns, bias {:+.3} ns, FN rate {:.3}",
                    report.method, report.rmse_ns, report.bias_ns, report.fn_rate
                );
            }
        }
        Command::Windows {
            scene,
            train,
            out,
            subset_size,
            block_len,
            blocks,
            test,
            seed,
        } => {
            let spec = resolve_scene(&scene)?;
            let train_spec = train.map(|t| resolve_scene(&t)).transpose()?;
            let train_spec = train_spec.as_ref().unwrap_or(&spec);
            let params = train_params(train_spec, 10, 10, seed)?;
            let cfg = WindowStudyConfig {
                subset_size,
                block_len,
                n_blocks: blocks,
                n_test: test,
                bw_max_iters: DEFAULT_BW_MAX_ITERS,
                bw_tol: DEFAULT_BW_TOL,
            };
            let study = empty_room_subset_study(&spec, &params, &cfg, scene_run_seed(seed, &spec))?;
            report::ensure_dir(&out)?;
            let mut manifest = Manifest::new("windows", seed, serde_json::to_value(cfg)?);
            let path = out.join("window_rmse_cdf.csv");
            let sorted: Vec<f64> = study.cdf().into_iter().map(|(v, _)| v).collect();
            report::write_cdf_csv(&path, &sorted)?;
            manifest.record(&path);
            manifest.write(&out)?;
            println!(
                "{} windows, median RMSE {:.3} ns",
                study.window_rmses.len(),
                study.median()
            );
        }
    }
    Ok(())
}

/// Exports one point's soft presence image as raw and normalized CSV grids.
fn write_sample_image(
    out: &Path,
    spec: &SceneSpec,
    params: &HmmParams,
    opts: &LocalizationOptions,
    point_idx: usize,
    seed: u64,
    manifest: &mut Manifest,
) -> Result<()> {
    use uwb_ranging::localize::{presence_image_soft, LinkTrack, PixelGrid, PixelNorm};
    let geom = spec.scene_geometry()?;
    if point_idx >= geom.person_points.len() {
        return Err(Error::Input(format!(
            "image point {point_idx} out of range ({} points)",
            geom.person_points.len()
        )));
    }
    let labeled = labeled_observations(
        spec,
        opts.n_calibration,
        opts.n_test,
        scene_run_seed(seed, spec),
    )?;
    let tracks: Vec<LinkTrack> = labeled
        .iter()
        .filter(|l| l.obs.point == Some(point_idx))
        .map(|l| {
            Ok(LinkTrack {
                link: l.obs.link.expect("link set"),
                track: forward_backward(&l.obs, params)?,
            })
        })
        .collect::<Result<_>>()?;
    let grid = PixelGrid::cover(geom.person_region(), opts.pitch)?;
    let image = presence_image_soft(
        &geom,
        &tracks,
        &grid,
        PixelNorm::Power(opts.p_norm),
        opts.smoothing_sigma,
    )?;
    for (name, normalized) in [("raw", false), ("normalized", true)] {
        let path = out.join(format!("image_point_{point_idx}_{name}.csv"));
        image.write_csv(std::fs::File::create(&path)?, normalized)?;
        manifest.record(&path);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
