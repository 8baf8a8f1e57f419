//! Bistatic delay estimation from cluttered UWB channel impulse responses.
//!
//! When a person enters the space between an ultra-wideband transmitter and
//! receiver, the earliest delay at which the channel impulse response
//! changes (the bistatic delay) places them on an ellipse with the radios at
//! the foci. In cluttered indoor channels that change is buried in dense,
//! overlapping multipath, and plain background subtraction fails. This crate
//! estimates the bistatic delay by
//!
//! 1. summarizing repeated captures into per-delay-bin energies,
//! 2. scoring each bin's calibration-vs-test change with a symmetric
//!    Gaussian KL divergence, and
//! 3. decoding the change point with a two-state hidden Markov model
//!    (forward-backward posteriors, Baum-Welch refinement with log-normal
//!    emission refits),
//!
//! then fuses per-link posteriors into a presence image for 2-D
//! localization. First-threshold-crossing and adaptive background
//! subtraction baselines are included for comparison, and a synthetic
//! cluttered-channel simulator with known ground truth drives the built-in
//! evaluation harness.
//!
//! # Examples
//!
//! Each major capability has a runnable example:
//!
//! ```bash
//! cargo run --release --example simulate_scene      # synthetic CIRs + CSV export
//! cargo run --release --example kl_observations     # KL vectors + normality check
//! cargo run --release --example delay_estimation    # train room A, estimate in room B
//! cargo run --release --example baum_welch_convergence  # robustness to initial parameters
//! cargo run --release --example threshold_sweep     # FTC sweep + Zetik comparison
//! cargo run --release --example localization        # presence images and error tables
//! cargo run --release --example false_positives     # empty-room false positive study
//! cargo run --release --example empty_room_windows  # calibration-window sensitivity
//! ```
//!
//! The same flows are scriptable through the `uwb-ranging` binary
//! (`simulate`, `observe`, `train`, `estimate`, `sweep`, `fp-trials`,
//! `localize`, `report`).
//!
//! # Quick start
//!
//! ```
//! use uwb_ranging::eval::{labeled_observations, scene_run_seed, scenes};
//! use uwb_ranging::hmm::{estimate_k_star, forward_backward, init_params};
//!
//! let scene = scenes::room_a();
//! let seed = scene_run_seed(7, &scene);
//! let data = labeled_observations(&scene, 10, 10, seed).unwrap();
//! let params = init_params(&data, 1e-3).unwrap();
//! let track = forward_backward(&data[0].obs, &params).unwrap();
//! if let Some(k) = estimate_k_star(&track) {
//!     println!("bistatic bin estimate: {k} (truth {})", data[0].truth_k);
//! }
//! ```

pub mod baselines;
pub mod error;
pub mod eval;
pub mod geometry;
pub mod hmm;
pub mod localize;
pub mod obs;
pub mod seeding;
pub mod sim;

pub use error::{Error, Result};
