//! Two-state hidden Markov model over the KL-divergence observation vector.
//!
//! State 0: the person is not affecting the channel at this delay bin.
//! State 1: the person is. A single 0-to-1 transition is expected at the
//! bistatic bin, with a small escape probability `P_10 = epsilon` keeping the
//! chain ergodic. Emissions are log-normal in the observation, fitted by
//! maximum likelihood on labeled (initialization) or hard-assigned
//! (Baum-Welch refinement) partitions of the data.
//!
//! Inference is smoothed forward-backward with per-step scaling; emission
//! densities are rescaled by their per-bin maximum before the linear
//! recursion, so posteriors stay finite for vectors of 10^4 bins and any
//! emission separation. The delay estimate is the first bin whose posterior
//! probability of state 1 exceeds one half.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::obs::{LabeledObservation, ObservationVector, OBS_FLOOR};

/// Floor on the fitted log-normal scale; degenerate partitions (all values
/// equal) otherwise produce a zero maximum-likelihood scale.
pub const SCALE_FLOOR: f64 = 1e-6;

/// Log-likelihood ratio credited to the quiet state for observations at or
/// below the observation floor. A divergence too small to resolve is
/// evidence of no change; left to the fitted log-normals, the wider
/// disturbed-state tail would absorb these degenerate values instead.
pub const FLOOR_QUIET_LOG_ODDS: f64 = 13.815510557964274; // ln(1e6)

/// Default escape probability `P_10`.
pub const DEFAULT_EPSILON_ESCAPE: f64 = 1e-3;

/// Default Baum-Welch stopping tolerance on the total log-likelihood.
pub const DEFAULT_BW_TOL: f64 = 1e-4;

/// Default Baum-Welch iteration cap.
pub const DEFAULT_BW_MAX_ITERS: usize = 15;

/// Log-normal emission density for one state, parameterized on `ln O`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogNormalEmission {
    /// Mean of `ln O`.
    pub location: f64,
    /// Std of `ln O`, strictly positive.
    pub scale: f64,
}

impl LogNormalEmission {
    /// Maximum-likelihood fit on pre-logged values, scale floored at
    /// [`SCALE_FLOOR`].
    pub fn fit(log_values: &[f64]) -> Result<Self> {
        if log_values.is_empty() {
            return Err(Error::Input("cannot fit an emission to no samples".into()));
        }
        let n = log_values.len() as f64;
        let location = log_values.iter().sum::<f64>() / n;
        let var = log_values
            .iter()
            .map(|v| (v - location).powi(2))
            .sum::<f64>()
            / n;
        Ok(LogNormalEmission {
            location,
            scale: var.sqrt().max(SCALE_FLOOR),
        })
    }

    /// Log-density of the observation `o` (with the `1/o` Jacobian term).
    pub fn log_pdf(&self, ln_o: f64) -> f64 {
        let z = (ln_o - self.location) / self.scale;
        -ln_o - self.scale.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln() - 0.5 * z * z
    }
}

/// Full parameter set of the two-state model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HmmParams {
    /// Initial state distribution (state 0, state 1).
    pub pi: [f64; 2],
    /// Transition matrix, row i = from state i.
    pub trans: [[f64; 2]; 2],
    /// Emission densities (state 0, state 1).
    pub emit: [LogNormalEmission; 2],
    /// Lower bound kept on `trans[1][0]`.
    pub epsilon_escape: f64,
}

impl HmmParams {
    pub fn validate(&self) -> Result<()> {
        if !self.epsilon_escape.is_finite()
            || self.epsilon_escape <= 0.0
            || self.epsilon_escape >= 1.0
        {
            return Err(Error::Parameter(format!(
                "epsilon_escape must lie in (0, 1), got {}",
                self.epsilon_escape
            )));
        }
        let probs = [
            self.pi[0],
            self.pi[1],
            self.trans[0][0],
            self.trans[0][1],
            self.trans[1][0],
            self.trans[1][1],
        ];
        for p in probs {
            if !(0.0..=1.0).contains(&p) || !p.is_finite() {
                return Err(Error::Parameter(format!("probability {p} outside [0, 1]")));
            }
        }
        if (self.pi[0] + self.pi[1] - 1.0).abs() > 1e-12 {
            return Err(Error::Parameter(
                "initial distribution must sum to 1".into(),
            ));
        }
        for (i, row) in self.trans.iter().enumerate() {
            if (row[0] + row[1] - 1.0).abs() > 1e-12 {
                return Err(Error::Parameter(format!(
                    "transition row {i} must sum to 1"
                )));
            }
        }
        if self.trans[1][0] < self.epsilon_escape {
            return Err(Error::Parameter(format!(
                "P_10 = {} below epsilon_escape = {}",
                self.trans[1][0], self.epsilon_escape
            )));
        }
        for (i, e) in self.emit.iter().enumerate() {
            if !e.scale.is_finite() || e.scale <= 0.0 || !e.location.is_finite() {
                return Err(Error::Parameter(format!(
                    "emission {i} has invalid parameters (location {}, scale {})",
                    e.location, e.scale
                )));
            }
        }
        Ok(())
    }

    /// TOML serialization for handing a training-room fit to a test run.
    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string_pretty(self)?)
    }

    pub fn from_toml(s: &str) -> Result<Self> {
        let params: HmmParams = toml::from_str(s)?;
        params.validate()?;
        Ok(params)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_toml()?)?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }
}

/// Smoothed state-1 posteriors for one observation vector, with the derived
/// delay estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorTrack {
    /// `alpha[k] = P(X_{k+1} = 1 | O, lambda)` (index 0 = bin 1).
    pub alpha: Vec<f64>,
    /// First bin with posterior above one half, if any.
    pub k_star_hat: Option<usize>,
    pub detected: bool,
    /// `ln P(O | lambda)`.
    pub loglik: f64,
}

/// First bin (1-based) whose posterior exceeds one half.
pub fn estimate_k_star(track: &PosteriorTrack) -> Option<usize> {
    first_crossing(&track.alpha)
}

fn first_crossing(alpha: &[f64]) -> Option<usize> {
    alpha.iter().position(|&a| a > 0.5).map(|i| i + 1)
}

fn checked_log_values(obs: &ObservationVector) -> Result<Vec<f64>> {
    for (k, &v) in obs.values.iter().enumerate() {
        if !v.is_finite() || v < 0.0 {
            return Err(Error::Input(format!(
                "observation at bin {} is {v}; must be finite and >= 0",
                k + 1
            )));
        }
    }
    Ok(obs.log_values())
}

fn log_emissions(params: &HmmParams, log_obs: &[f64]) -> Vec<[f64; 2]> {
    let ln_floor = OBS_FLOOR.ln();
    log_obs
        .iter()
        .map(|&ln_o| {
            if ln_o <= ln_floor {
                [0.0, -FLOOR_QUIET_LOG_ODDS]
            } else {
                [params.emit[0].log_pdf(ln_o), params.emit[1].log_pdf(ln_o)]
            }
        })
        .collect()
}

/// Scaled forward-backward pass plus the per-step quantities needed by
/// Baum-Welch.
struct Smoother {
    /// Scaled forward variables, normalized per step.
    fwd: Vec<[f64; 2]>,
    /// Scaled backward variables.
    bwd: Vec<[f64; 2]>,
    /// Per-step normalizers of the shifted recursion.
    c_raw: Vec<f64>,
    /// Shifted emission values `exp(log_b - max_log_b)`.
    shifted: Vec<[f64; 2]>,
    loglik: f64,
}

impl Smoother {
    fn run(pi: [f64; 2], trans: [[f64; 2]; 2], log_b: &[[f64; 2]]) -> Result<Smoother> {
        let n = log_b.len();
        let mut shifted = Vec::with_capacity(n);
        let mut loglik = 0.0;
        for lb in log_b {
            let mx = lb[0].max(lb[1]);
            shifted.push([(lb[0] - mx).exp(), (lb[1] - mx).exp()]);
            loglik += mx;
        }
        let mut fwd = vec![[0.0; 2]; n];
        let mut c_raw = vec![0.0; n];
        let mut prev = [pi[0] * shifted[0][0], pi[1] * shifted[0][1]];
        for k in 0..n {
            if k > 0 {
                prev = [
                    (fwd[k - 1][0] * trans[0][0] + fwd[k - 1][1] * trans[1][0]) * shifted[k][0],
                    (fwd[k - 1][0] * trans[0][1] + fwd[k - 1][1] * trans[1][1]) * shifted[k][1],
                ];
            }
            let c = prev[0] + prev[1];
            if !c.is_finite() || c <= 0.0 {
                return Err(Error::Numerical(format!(
                    "forward normalizer degenerate at bin {} (c = {c})",
                    k + 1
                )));
            }
            c_raw[k] = c;
            fwd[k] = [prev[0] / c, prev[1] / c];
            loglik += c.ln();
        }
        let mut bwd = vec![[1.0; 2]; n];
        for k in (0..n.saturating_sub(1)).rev() {
            let e = shifted[k + 1];
            let b = bwd[k + 1];
            let c = c_raw[k + 1];
            bwd[k] = [
                (trans[0][0] * e[0] * b[0] + trans[0][1] * e[1] * b[1]) / c,
                (trans[1][0] * e[0] * b[0] + trans[1][1] * e[1] * b[1]) / c,
            ];
        }
        Ok(Smoother {
            fwd,
            bwd,
            c_raw,
            shifted,
            loglik,
        })
    }

    /// State-1 smoothed posterior per bin.
    fn posteriors(&self) -> Vec<f64> {
        self.fwd
            .iter()
            .zip(&self.bwd)
            .map(|(f, b)| {
                let g = [f[0] * b[0], f[1] * b[1]];
                g[1] / (g[0] + g[1])
            })
            .collect()
    }
}

/// Exact smoothed posteriors of state 1 under `params`, plus the derived
/// delay estimate and the data log-likelihood.
///
/// Observation values below [`OBS_FLOOR`] are raised to the floor and
/// treated as quiet-state evidence; negative or non-finite values are
/// rejected.
pub fn forward_backward(obs: &ObservationVector, params: &HmmParams) -> Result<PosteriorTrack> {
    params.validate()?;
    if obs.is_empty() {
        return Err(Error::Input("empty observation vector".into()));
    }
    let log_obs = checked_log_values(obs)?;
    let log_b = log_emissions(params, &log_obs);
    posterior_from_log_emissions(params.pi, params.trans, &log_b)
}

/// Forward-backward on explicit per-bin log emission values. Adding a common
/// constant to every log emission leaves the posteriors unchanged and shifts
/// the log-likelihood by `n` times that constant.
pub fn posterior_from_log_emissions(
    pi: [f64; 2],
    trans: [[f64; 2]; 2],
    log_b: &[[f64; 2]],
) -> Result<PosteriorTrack> {
    let sm = Smoother::run(pi, trans, log_b)?;
    let alpha = sm.posteriors();
    let k_star_hat = first_crossing(&alpha);
    Ok(PosteriorTrack {
        detected: k_star_hat.is_some(),
        k_star_hat,
        loglik: sm.loglik,
        alpha,
    })
}

/// Initial parameter estimates from labeled training data: log-normal
/// maximum-likelihood fits on the `k < k*` / `k >= k*` partitions, the
/// empirical initial-state and 0-to-1 transition frequencies, and
/// `P_10 = epsilon_escape`.
pub fn init_params(train: &[LabeledObservation], epsilon_escape: f64) -> Result<HmmParams> {
    if train.is_empty() {
        return Err(Error::Input("no training vectors".into()));
    }
    if !epsilon_escape.is_finite() || epsilon_escape <= 0.0 || epsilon_escape >= 1.0 {
        return Err(Error::Parameter(format!(
            "epsilon_escape must lie in (0, 1), got {epsilon_escape}"
        )));
    }
    let mut d0 = Vec::new();
    let mut d1 = Vec::new();
    let mut start_in_one = 0usize;
    let mut zero_departures = 0usize;
    let mut zero_to_one = 0usize;
    for (i, labeled) in train.iter().enumerate() {
        let k_star = labeled.truth_k;
        let n = labeled.obs.len();
        if k_star < 1 || k_star > n {
            return Err(Error::Input(format!(
                "training vector {i}: k* = {k_star} outside [1, {n}]"
            )));
        }
        let logs = checked_log_values(&labeled.obs)?;
        d0.extend_from_slice(&logs[..k_star - 1]);
        d1.extend_from_slice(&logs[k_star - 1..]);
        if k_star == 1 {
            start_in_one += 1;
        } else {
            zero_departures += k_star - 1;
            zero_to_one += 1;
        }
    }
    if d0.is_empty() {
        return Err(Error::Input(
            "state-0 training partition is empty (every k* = 1)".into(),
        ));
    }
    if d1.is_empty() {
        return Err(Error::Input("state-1 training partition is empty".into()));
    }
    let pi1 = start_in_one as f64 / train.len() as f64;
    let p01 = zero_to_one as f64 / zero_departures as f64;
    let params = HmmParams {
        pi: [1.0 - pi1, pi1],
        trans: [[1.0 - p01, p01], [epsilon_escape, 1.0 - epsilon_escape]],
        emit: [LogNormalEmission::fit(&d0)?, LogNormalEmission::fit(&d1)?],
        epsilon_escape,
    };
    params.validate()?;
    Ok(params)
}

/// One Baum-Welch refinement run.
#[derive(Debug, Clone)]
pub struct BaumWelchRun {
    /// Parameters after the final iteration.
    pub params: HmmParams,
    /// Total log-likelihood at params0 and after each iteration.
    pub logliks: Vec<f64>,
    /// Parameter snapshot after each iteration (same length as performed
    /// iterations), for per-iteration evaluation curves.
    pub iterates: Vec<HmmParams>,
}

struct EStats {
    loglik: f64,
    /// Sum over vectors of the k = 1 posterior.
    pi_acc: [f64; 2],
    /// Expected transition counts.
    xi_acc: [[f64; 2]; 2],
    /// Expected occupancy of each state over k = 1..n-1.
    gamma_acc: [f64; 2],
    /// Hard-assigned log observations per state.
    hard: [Vec<f64>; 2],
}

fn e_step(vectors: &[Vec<f64>], params: &HmmParams) -> Result<EStats> {
    let mut stats = EStats {
        loglik: 0.0,
        pi_acc: [0.0; 2],
        xi_acc: [[0.0; 2]; 2],
        gamma_acc: [0.0; 2],
        hard: [Vec::new(), Vec::new()],
    };
    let trans = params.trans;
    for log_obs in vectors {
        let log_b = log_emissions(params, log_obs);
        let sm = Smoother::run(params.pi, trans, &log_b)?;
        stats.loglik += sm.loglik;
        let n = log_obs.len();
        for (k, &x) in log_obs.iter().enumerate() {
            let f = sm.fwd[k];
            let b = sm.bwd[k];
            let g = [f[0] * b[0], f[1] * b[1]];
            let sum = g[0] + g[1];
            let g1 = g[1] / sum;
            if k == 0 {
                stats.pi_acc[0] += 1.0 - g1;
                stats.pi_acc[1] += g1;
            }
            if k + 1 < n {
                stats.gamma_acc[0] += 1.0 - g1;
                stats.gamma_acc[1] += g1;
                let e = sm.shifted[k + 1];
                let bn = sm.bwd[k + 1];
                let c = sm.c_raw[k + 1];
                for (i, row) in trans.iter().enumerate() {
                    for (j, &t_ij) in row.iter().enumerate() {
                        stats.xi_acc[i][j] += sm.fwd[k][i] * t_ij * e[j] * bn[j] / c;
                    }
                }
            }
            // Hard assignment; ties go to state 0.
            let state = usize::from(g1 > 0.5);
            stats.hard[state].push(x);
        }
    }
    Ok(stats)
}

fn m_step(stats: &EStats, prev: &HmmParams, n_vectors: usize) -> HmmParams {
    let eps = prev.epsilon_escape;
    let pi1 = stats.pi_acc[1] / n_vectors as f64;
    let pi = [(1.0 - pi1).clamp(0.0, 1.0), pi1.clamp(0.0, 1.0)];
    let mut trans = prev.trans;
    for (i, row_out) in trans.iter_mut().enumerate() {
        if stats.gamma_acc[i] > 0.0 {
            let row = [
                stats.xi_acc[i][0] / stats.gamma_acc[i],
                stats.xi_acc[i][1] / stats.gamma_acc[i],
            ];
            let sum = row[0] + row[1];
            if sum > 0.0 {
                *row_out = [row[0] / sum, row[1] / sum];
            }
        }
    }
    // Keep the escape probability away from zero, then renormalize the row.
    if trans[1][0] < eps {
        trans[1] = [eps, 1.0 - eps];
    }
    let emit = [0, 1].map(|i| {
        if stats.hard[i].is_empty() {
            prev.emit[i]
        } else {
            LogNormalEmission::fit(&stats.hard[i]).expect("nonempty partition")
        }
    });
    HmmParams {
        pi,
        trans,
        emit,
        epsilon_escape: eps,
    }
}

/// Baum-Welch refinement over a set of observation vectors (multi-sequence
/// expected-count updates for the initial distribution and transitions;
/// log-normal refits on the hard state partition for the emissions).
///
/// Stops after `max_iters` iterations or as soon as an update fails to
/// improve the total log-likelihood by at least `tol`; the failed update is
/// rolled back, so the returned parameters are those of the last accepted
/// iteration and the likelihood trajectory (starting at `params0`) is
/// non-decreasing. The hard-partition refit is not an exact M-step, so
/// without the rollback a terminal update could lower the likelihood. An
/// empty hard partition keeps that state's previous emission parameters and
/// continues.
pub fn baum_welch(
    obs_set: &[ObservationVector],
    params0: &HmmParams,
    max_iters: usize,
    tol: f64,
) -> Result<BaumWelchRun> {
    params0.validate()?;
    if obs_set.is_empty() {
        return Err(Error::Input("no observation vectors".into()));
    }
    let vectors: Vec<Vec<f64>> = obs_set
        .iter()
        .map(|o| {
            if o.is_empty() {
                Err(Error::Input("empty observation vector".into()))
            } else {
                checked_log_values(o)
            }
        })
        .collect::<Result<_>>()?;
    let mut params = params0.clone();
    let mut stats = e_step(&vectors, &params)?;
    let mut logliks = vec![stats.loglik];
    let mut iterates = Vec::new();
    for _ in 0..max_iters {
        let next = m_step(&stats, &params, vectors.len());
        let next_stats = e_step(&vectors, &next)?;
        let improvement = next_stats.loglik - logliks.last().expect("nonempty");
        if improvement < tol {
            break;
        }
        logliks.push(next_stats.loglik);
        iterates.push(next.clone());
        params = next;
        stats = next_stats;
    }
    Ok(BaumWelchRun {
        params,
        logliks,
        iterates,
    })
}
