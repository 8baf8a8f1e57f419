//! Synthetic cluttered-channel simulator: static scenes and person-perturbed
//! scenes with known ground-truth bistatic delay.
//!
//! The underlying static channel of a (scene seed, link) pair is drawn once
//! and shared by all realizations; realizations differ only by measurement
//! noise. Per-bin energies are generated directly in the energy domain:
//!
//! * clutter paths with uniform excess delays and Rayleigh magnitudes whose
//!   power follows a single exponential power-delay profile from the
//!   line-of-sight bin (bin 1), plus a constant receiver noise-floor energy;
//! * additive Gaussian measurement noise with variance
//!   `noise_std^2 / integration_factor`;
//! * for person scenes, an additive Gaussian energy bump at the true bistatic
//!   bin `k*` and a multiplicative log-normal perturbation of every bin
//!   `k >= k*`, fixed per scene with a smaller per-realization jitter.
//!
//! Bins `k < k*` of a person scene are bit-identical to the static scene
//! generated from the same seed, because each effect draws from its own
//! seeded stream.

use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{LinkId, Point, SceneGeometry};
use crate::seeding::{self, stream};

/// Receiver noise-floor energy as a multiple of `noise_std`. The floor keeps
/// every bin's mean several noise deviations above zero, so the nonnegativity
/// clamp on measured energies almost never engages and per-bin samples stay
/// Gaussian.
pub const NOISE_FLOOR_MULT: f64 = 6.0;

/// Relative jitter of the person path's energy bump across realizations.
pub const BUMP_JITTER: f64 = 0.25;

/// Exponent applied to the power-delay profile for the person-scattered
/// path: a single-bounce path off a large scatterer loses power with range
/// more slowly than the dense many-bounce clutter, so its energy decays at
/// half the clutter's log-rate.
pub const PERSON_PATH_DECAY_EXPONENT: f64 = 0.5;

/// Clutter and noise parameters for the synthetic channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClutterModel {
    /// Number of clutter paths scattered over the delay window.
    pub path_count: usize,
    /// Power-delay-profile decay constant (seconds).
    pub decay_constant: f64,
    /// Amplitude scale of the line-of-sight path; clutter power decays from
    /// its square.
    pub path_amplitude_scale: f64,
    /// Std of the additive per-bin energy measurement noise.
    pub noise_std: f64,
    /// Amplitude gain of the person-scattered path relative to
    /// `path_amplitude_scale`.
    pub person_path_gain: f64,
    /// Log-scale of the multiplicative perturbation the person applies to
    /// bins at and after the bistatic bin; in [0, 1].
    pub person_tail_perturbation: f64,
    /// Pulse-integration factor; divides the measurement-noise variance.
    pub integration_factor: u32,
    /// Noise-only bins prepended to the amplitude view (the region a capture
    /// window would hold before the line-of-sight arrival).
    pub guard_bins: usize,
}

impl Default for ClutterModel {
    fn default() -> Self {
        ClutterModel {
            path_count: 60,
            decay_constant: 18e-9,
            path_amplitude_scale: 1.0,
            noise_std: 0.2,
            person_path_gain: 0.6,
            person_tail_perturbation: 0.35,
            integration_factor: 1,
            guard_bins: 8,
        }
    }
}

impl ClutterModel {
    pub fn validate(&self) -> Result<()> {
        if self.path_count == 0 {
            return Err(Error::Parameter("path_count must be positive".into()));
        }
        if !self.decay_constant.is_finite() || self.decay_constant <= 0.0 {
            return Err(Error::Parameter(format!(
                "decay_constant must be positive, got {}",
                self.decay_constant
            )));
        }
        if !self.path_amplitude_scale.is_finite() || self.path_amplitude_scale <= 0.0 {
            return Err(Error::Parameter(format!(
                "path_amplitude_scale must be positive, got {}",
                self.path_amplitude_scale
            )));
        }
        if self.noise_std < 0.0 || !self.noise_std.is_finite() {
            return Err(Error::Parameter(format!(
                "noise_std must be >= 0, got {}",
                self.noise_std
            )));
        }
        if self.person_path_gain < 0.0 {
            return Err(Error::Parameter(format!(
                "person_path_gain must be >= 0, got {}",
                self.person_path_gain
            )));
        }
        if !(0.0..=1.0).contains(&self.person_tail_perturbation) {
            return Err(Error::Parameter(format!(
                "person_tail_perturbation must lie in [0, 1], got {}",
                self.person_tail_perturbation
            )));
        }
        if self.integration_factor == 0 {
            return Err(Error::Parameter("integration_factor must be >= 1".into()));
        }
        Ok(())
    }

    /// Copy with all path energies attenuated by `db` decibels (amplitudes by
    /// `db / 2`); measurement noise is receiver-side and unaffected.
    pub fn attenuated(&self, db: f64) -> ClutterModel {
        let mut c = self.clone();
        c.path_amplitude_scale *= 10f64.powf(-db / 20.0);
        c
    }

    /// Std of the per-bin energy measurement noise after integration.
    pub fn effective_noise_std(&self) -> f64 {
        self.noise_std / (self.integration_factor as f64).sqrt()
    }

    /// Mean noise-floor energy per bin (independent of integration, which
    /// narrows the fluctuation but not the mean).
    pub fn noise_floor_energy(&self) -> f64 {
        NOISE_FLOOR_MULT * self.noise_std
    }

    /// Relative power-delay profile at a 1-based bin.
    pub fn pdp_rel(&self, bin: usize, bin_width: f64) -> f64 {
        (-((bin - 1) as f64) * bin_width / self.decay_constant).exp()
    }
}

/// One sampled channel impulse response realization, binned into per-bin
/// energies `r_k` with bin 1 at the line-of-sight delay.
#[derive(Debug, Clone, PartialEq)]
pub struct CirTrace {
    pub link: LinkId,
    /// Per-bin energies, index 0 = bin 1.
    pub energies: Vec<f64>,
    /// Ground-truth bistatic bin (1-based), present for person scenes.
    pub truth_k_star: Option<usize>,
    /// Pre-LOS noise-only amplitudes for the subtraction-style baselines.
    guard_amplitudes: Vec<f64>,
    /// Deterministic per-bin sign of the static channel.
    signs: Vec<i8>,
}

impl CirTrace {
    pub fn n_bins(&self) -> usize {
        self.energies.len()
    }

    pub fn guard_len(&self) -> usize {
        self.guard_amplitudes.len()
    }

    /// Signed amplitude view `[guard..., sign_k * sqrt(r_k)...]` used by the
    /// CIR-subtraction baselines. The in-window part starts at index
    /// `guard_len()`.
    pub fn amplitude_view(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.guard_amplitudes.len() + self.energies.len());
        out.extend_from_slice(&self.guard_amplitudes);
        out.extend(
            self.energies
                .iter()
                .zip(&self.signs)
                .map(|(&e, &s)| f64::from(s) * e.sqrt()),
        );
        out
    }
}

fn link_mix(link: LinkId) -> u64 {
    (link.tx as u64) << 32 | link.rx as u64
}

/// Deterministic per-(scene, link) channel shared by all realizations.
struct StaticChannel {
    /// Per-bin mean energy: clutter paths plus noise floor.
    base: Vec<f64>,
    signs: Vec<i8>,
}

impl StaticChannel {
    fn build(geom: &SceneGeometry, clutter: &ClutterModel, link: LinkId, seed: u64) -> Self {
        let n = geom.n_bins;
        let mut rng = seeding::stream_rng(seed, stream::CHANNEL, link_mix(link));
        let s2 = clutter.path_amplitude_scale * clutter.path_amplitude_scale;
        let floor = clutter.noise_floor_energy();
        let mut base = vec![floor; n];
        // Line-of-sight path.
        base[0] += s2;
        // Clutter paths: uniform excess delay, Rayleigh magnitude with power
        // decaying exponentially in delay. Rayleigh energy = -2 s^2 pdp ln U.
        let window = n as f64 * geom.bin_width;
        for _ in 0..clutter.path_count {
            let delay: f64 = rng.gen::<f64>() * window;
            let bin = ((delay / geom.bin_width) as usize).min(n - 1);
            let pdp = (-delay / clutter.decay_constant).exp();
            let u: f64 = rng.gen::<f64>();
            let energy = -2.0 * s2 * pdp * u.max(f64::MIN_POSITIVE).ln();
            base[bin] += energy;
        }
        let signs = (0..n)
            .map(|k| {
                if k == 0 || rng.gen::<bool>() {
                    1i8
                } else {
                    -1i8
                }
            })
            .collect();
        StaticChannel { base, signs }
    }
}

fn check_realizations(realizations: &std::ops::Range<usize>) -> Result<()> {
    if realizations.is_empty() {
        return Err(Error::Parameter(
            "realization count must be positive".into(),
        ));
    }
    Ok(())
}

/// Per-link derived stream seeds, so links draw independent noise and the
/// realization index alone selects the draw.
struct LinkStreams {
    noise: u64,
    guard: u64,
    person: u64,
}

impl LinkStreams {
    fn new(seed: u64, link: LinkId) -> Self {
        let lm = link_mix(link);
        LinkStreams {
            noise: seeding::subseed(seed, stream::MEASUREMENT, lm),
            guard: seeding::subseed(seed, stream::GUARD, lm),
            person: seeding::subseed(seed, stream::PERSON_REALIZATION, lm),
        }
    }
}

/// Independent noisy realizations of one static link.
pub fn make_static_scene(
    geom: &SceneGeometry,
    clutter: &ClutterModel,
    link: LinkId,
    n_realizations: usize,
    seed: u64,
) -> Result<Vec<CirTrace>> {
    make_static_scene_range(geom, clutter, link, 0..n_realizations, seed)
}

/// Static realizations at explicit realization indices. Realization `i` is
/// identical whichever range it is requested through, so disjoint ranges
/// give draws that never share noise (calibration vs. test captures).
pub fn make_static_scene_range(
    geom: &SceneGeometry,
    clutter: &ClutterModel,
    link: LinkId,
    realizations: std::ops::Range<usize>,
    seed: u64,
) -> Result<Vec<CirTrace>> {
    clutter.validate()?;
    geom.link_positions(link)?;
    check_realizations(&realizations)?;
    let channel = StaticChannel::build(geom, clutter, link, seed);
    let streams = LinkStreams::new(seed, link);
    Ok(realizations
        .map(|i| realize(&channel, clutter, link, &streams, i as u64, None))
        .collect())
}

/// Independent noisy realizations of one link with a person at
/// `person_point`; `truth_k_star` carries the ground-truth bistatic bin.
pub fn make_person_scene(
    geom: &SceneGeometry,
    clutter: &ClutterModel,
    link: LinkId,
    person_point: Point,
    n_realizations: usize,
    seed: u64,
) -> Result<Vec<CirTrace>> {
    make_person_scene_range(geom, clutter, link, person_point, 0..n_realizations, seed)
}

/// Person-scene realizations at explicit realization indices; see
/// [`make_static_scene_range`].
pub fn make_person_scene_range(
    geom: &SceneGeometry,
    clutter: &ClutterModel,
    link: LinkId,
    person_point: Point,
    realizations: std::ops::Range<usize>,
    seed: u64,
) -> Result<Vec<CirTrace>> {
    clutter.validate()?;
    check_realizations(&realizations)?;
    if !geom.person_region().contains(person_point) {
        return Err(Error::Geometry(format!(
            "person point ({}, {}) outside the allowed region",
            person_point.x, person_point.y
        )));
    }
    let k_star = geom.bounce_bin(link, person_point)?;
    if k_star > geom.n_bins {
        return Err(Error::Geometry(format!(
            "person point maps to bin {k_star}, beyond the {}-bin window",
            geom.n_bins
        )));
    }
    let channel = StaticChannel::build(geom, clutter, link, seed);
    let streams = LinkStreams::new(seed, link);
    let person = PersonEffect::build(clutter, geom, link, person_point, k_star, seed);
    Ok(realizations
        .map(|i| realize(&channel, clutter, link, &streams, i as u64, Some(&person)))
        .collect())
}

/// Per-scene person perturbation, fixed across realizations.
struct PersonEffect {
    k_star: usize,
    /// Mean energy of the person-scattered path.
    bump_mean: f64,
    /// Fixed log-scale shift per bin `k >= k_star`.
    scene_shift: Vec<f64>,
    /// Per-realization log-jitter scale.
    jitter_scale: f64,
}

impl PersonEffect {
    fn build(
        clutter: &ClutterModel,
        geom: &SceneGeometry,
        link: LinkId,
        person_point: Point,
        k_star: usize,
        seed: u64,
    ) -> Self {
        let point_mix = person_point.x.to_bits() ^ person_point.y.to_bits().rotate_left(17);
        let scene_seed = seeding::subseed(seed, stream::PERSON_SCENE, link_mix(link));
        let mut rng = seeding::stream_rng(scene_seed, 0, point_mix);
        let q = clutter.person_tail_perturbation;
        let s2 = clutter.path_amplitude_scale * clutter.path_amplitude_scale;
        let bump_mean = clutter.person_path_gain
            * clutter.person_path_gain
            * s2
            * clutter
                .pdp_rel(k_star, geom.bin_width)
                .powf(PERSON_PATH_DECAY_EXPONENT);
        let scene_shift = (0..geom.n_bins)
            .map(|k| {
                if k + 1 >= k_star {
                    q * rng.sample::<f64, _>(StandardNormal)
                } else {
                    0.0
                }
            })
            .collect();
        PersonEffect {
            k_star,
            bump_mean,
            scene_shift,
            jitter_scale: q / 2.0,
        }
    }
}

fn realize(
    channel: &StaticChannel,
    clutter: &ClutterModel,
    link: LinkId,
    streams: &LinkStreams,
    index: u64,
    person: Option<&PersonEffect>,
) -> CirTrace {
    let sigma = clutter.effective_noise_std();
    let mut noise_rng = seeding::stream_rng(streams.noise, 0, index);
    let mut energies: Vec<f64> = channel
        .base
        .iter()
        .map(|&base| {
            let noise: f64 = if sigma > 0.0 {
                let d = Normal::new(0.0, sigma).expect("valid normal");
                d.sample(&mut noise_rng)
            } else {
                0.0
            };
            base + noise
        })
        .collect();
    if let Some(p) = person {
        let mut person_rng = seeding::stream_rng(streams.person, 0, index);
        for (k, e) in energies.iter_mut().enumerate().skip(p.k_star - 1) {
            let jitter: f64 = p.jitter_scale * person_rng.sample::<f64, _>(StandardNormal);
            let factor = (p.scene_shift[k] + jitter).exp();
            *e = (*e - channel.base[k]) + channel.base[k] * factor;
        }
        let bump_noise: f64 = person_rng.sample(StandardNormal);
        let bump = (p.bump_mean * (1.0 + BUMP_JITTER * bump_noise)).max(0.0);
        energies[p.k_star - 1] += bump;
    }
    for e in &mut energies {
        *e = e.max(0.0);
    }
    // Guard-bin amplitude noise matched to the amplitude fluctuation of a
    // floor-level in-window bin, sqrt(g + w) ~ sqrt(g) + w / (2 sqrt(g)).
    let floor = clutter.noise_floor_energy();
    let guard_sigma = if floor > 0.0 {
        clutter.effective_noise_std() / (2.0 * floor.sqrt())
    } else {
        0.0
    };
    let mut guard_rng = seeding::stream_rng(streams.guard, 0, index);
    let guard_amplitudes = (0..clutter.guard_bins)
        .map(|_| {
            if guard_sigma > 0.0 {
                guard_sigma * guard_rng.sample::<f64, _>(StandardNormal)
            } else {
                0.0
            }
        })
        .collect();
    CirTrace {
        link,
        energies,
        truth_k_star: person.map(|p| p.k_star),
        guard_amplitudes,
        signs: channel.signs.clone(),
    }
}

/// Analytic mean energy per bin of the configured static channel, before
/// measurement noise: LOS energy, the integrated power-delay profile of the
/// uniformly scattered clutter paths, and the noise floor.
pub fn analytic_mean_energy(geom: &SceneGeometry, clutter: &ClutterModel) -> Vec<f64> {
    let n = geom.n_bins;
    let t = geom.bin_width;
    let s2 = clutter.path_amplitude_scale * clutter.path_amplitude_scale;
    let gamma = clutter.decay_constant;
    let density = clutter.path_count as f64 / (n as f64 * t);
    // E[Rayleigh energy] at delay u is 2 s^2 exp(-u / gamma).
    (0..n)
        .map(|k| {
            let lo = k as f64 * t;
            let hi = (k + 1) as f64 * t;
            let clutter_energy =
                2.0 * s2 * density * gamma * ((-lo / gamma).exp() - (-hi / gamma).exp());
            let los = if k == 0 { s2 } else { 0.0 };
            los + clutter_energy + clutter.noise_floor_energy()
        })
        .collect()
}

/// Writes traces as CSV with columns `link,realization,bin,energy`.
pub fn write_traces_csv<W: std::io::Write>(w: W, traces: &[CirTrace]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["link", "realization", "bin", "energy"])?;
    let mut realization = 0usize;
    let mut last_link: Option<LinkId> = None;
    for trace in traces {
        if last_link == Some(trace.link) {
            realization += 1;
        } else {
            realization = 0;
            last_link = Some(trace.link);
        }
        for (i, &e) in trace.energies.iter().enumerate() {
            wtr.write_record([
                trace.link.to_string(),
                realization.to_string(),
                (i + 1).to_string(),
                format!("{e:.17e}"),
            ])?;
        }
    }
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Rect, SPEED_OF_LIGHT};

    fn test_geom(n_bins: usize) -> SceneGeometry {
        SceneGeometry::new(
            vec![Point::new(0.0, 0.0)],
            vec![Point::new(4.0, 0.0)],
            vec![Point::new(2.0, 1.5)],
            Rect::new(-1.0, -1.0, 5.0, 4.0),
            0.3 / SPEED_OF_LIGHT,
            n_bins,
        )
        .unwrap()
    }

    #[test]
    fn same_seed_gives_identical_traces() {
        let geom = test_geom(20);
        let clutter = ClutterModel {
            noise_std: 0.0,
            ..ClutterModel::default()
        };
        let link = LinkId::new(0, 0);
        let a = make_static_scene(&geom, &clutter, link, 3, 42).unwrap();
        let b = make_static_scene(&geom, &clutter, link, 3, 42).unwrap();
        assert_eq!(a, b);
        // Zero noise: every realization is the underlying channel itself.
        assert_eq!(a[0].energies, a[1].energies);
    }

    #[test]
    fn invalid_link_and_zero_count_rejected() {
        let geom = test_geom(20);
        let clutter = ClutterModel::default();
        assert!(make_static_scene(&geom, &clutter, LinkId::new(3, 0), 2, 1).is_err());
        assert!(make_static_scene(&geom, &clutter, LinkId::new(0, 0), 0, 1).is_err());
    }

    #[test]
    fn integration_factor_divides_noise_variance() {
        let geom = test_geom(20);
        let clutter1 = ClutterModel {
            integration_factor: 1,
            ..ClutterModel::default()
        };
        let clutter8 = ClutterModel {
            integration_factor: 8,
            ..ClutterModel::default()
        };
        let link = LinkId::new(0, 0);
        let n = 1000;
        let var_of = |traces: &[CirTrace], bin: usize| {
            let vals: Vec<f64> = traces.iter().map(|t| t.energies[bin]).collect();
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (vals.len() - 1) as f64
        };
        let t1 = make_static_scene(&geom, &clutter1, link, n, 7).unwrap();
        let t8 = make_static_scene(&geom, &clutter8, link, n, 7).unwrap();
        // Average the per-bin variance ratio over bins to tame sampling noise.
        let mut ratio_sum = 0.0;
        for bin in 0..20 {
            ratio_sum += var_of(&t8, bin) / var_of(&t1, bin);
        }
        let ratio = ratio_sum / 20.0;
        assert!(
            (ratio - 0.125).abs() < 0.125 * 0.2,
            "variance ratio {ratio} not within 20% of 1/8"
        );
    }

    #[test]
    fn tiny_decay_concentrates_energy_in_bin_one() {
        let geom = test_geom(30);
        let clutter = ClutterModel {
            decay_constant: 0.05e-9,
            noise_std: 1e-6,
            ..ClutterModel::default()
        };
        // Analytic check.
        let mean = analytic_mean_energy(&geom, &clutter);
        let total: f64 = mean.iter().sum();
        assert!(
            mean[0] / total > 0.9,
            "analytic bin-1 share {} <= 0.9",
            mean[0] / total
        );
        // Empirical check over channel draws (one realization per seed).
        let link = LinkId::new(0, 0);
        let mut sums = vec![0.0; 30];
        let n_seeds = 400;
        for seed in 0..n_seeds {
            let t = make_static_scene(&geom, &clutter, link, 1, seed).unwrap();
            for (s, e) in sums.iter_mut().zip(&t[0].energies) {
                *s += e;
            }
        }
        let total: f64 = sums.iter().sum();
        assert!(
            sums[0] / total > 0.9,
            "empirical bin-1 share {} <= 0.9",
            sums[0] / total
        );
        let expect_share = mean[0] / mean.iter().sum::<f64>();
        assert!((sums[0] / total - expect_share).abs() < 0.05);
    }

    #[test]
    fn person_truth_bin_matches_geometry() {
        let geom = test_geom(20);
        let clutter = ClutterModel::default();
        let link = LinkId::new(0, 0);
        let traces = make_person_scene(&geom, &clutter, link, Point::new(2.0, 1.5), 2, 5).unwrap();
        assert_eq!(traces[0].truth_k_star, Some(4));
        // On the tx-rx segment: zero excess, clamped to bin 1.
        let on_segment =
            make_person_scene(&geom, &clutter, link, Point::new(2.0, 0.0), 2, 5).unwrap();
        assert_eq!(on_segment[0].truth_k_star, Some(1));
    }

    #[test]
    fn person_point_outside_region_rejected() {
        let geom = test_geom(20);
        let clutter = ClutterModel::default();
        assert!(make_person_scene(
            &geom,
            &clutter,
            LinkId::new(0, 0),
            Point::new(40.0, 0.0),
            2,
            5
        )
        .is_err());
    }

    #[test]
    fn null_perturbation_is_identical_to_static() {
        let geom = test_geom(20);
        let clutter = ClutterModel {
            person_path_gain: 0.0,
            person_tail_perturbation: 0.0,
            ..ClutterModel::default()
        };
        let link = LinkId::new(0, 0);
        let person = make_person_scene(&geom, &clutter, link, Point::new(2.0, 1.5), 4, 11).unwrap();
        let stat = make_static_scene(&geom, &clutter, link, 4, 11).unwrap();
        for (p, s) in person.iter().zip(&stat) {
            assert_eq!(p.energies, s.energies);
        }
    }

    #[test]
    fn pre_kstar_bins_bit_identical_to_static_same_seed() {
        let geom = test_geom(20);
        let clutter = ClutterModel::default();
        let link = LinkId::new(0, 0);
        let person = make_person_scene(&geom, &clutter, link, Point::new(2.0, 1.5), 5, 3).unwrap();
        let stat = make_static_scene(&geom, &clutter, link, 5, 3).unwrap();
        let k_star = person[0].truth_k_star.unwrap();
        for (p, s) in person.iter().zip(&stat) {
            assert_eq!(p.energies[..k_star - 1], s.energies[..k_star - 1]);
        }
    }

    #[test]
    fn person_shifts_mean_at_kstar_beyond_three_standard_errors() {
        let geom = test_geom(20);
        let clutter = ClutterModel::default();
        let link = LinkId::new(0, 0);
        let n = 1000;
        let person = make_person_scene(&geom, &clutter, link, Point::new(2.0, 1.5), n, 21).unwrap();
        // Same channel, disjoint realization indices: exercises the
        // statistical claim with independent noise draws.
        let stat = make_static_scene_range(&geom, &clutter, link, n..2 * n, 21).unwrap();
        let k_star = person[0].truth_k_star.unwrap();
        let column = |traces: &[CirTrace], bin: usize| -> (f64, f64) {
            let vals: Vec<f64> = traces.iter().map(|t| t.energies[bin]).collect();
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            let var =
                vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (vals.len() - 1) as f64;
            (mean, var)
        };
        for bin in 0..k_star - 1 {
            let (mp, vp) = column(&person, bin);
            let (ms, vs) = column(&stat, bin);
            let se = ((vp + vs) / n as f64).sqrt();
            assert!(
                (mp - ms).abs() < 3.0 * se,
                "bin {} (< k*) differs by more than 3 SE",
                bin + 1
            );
        }
        let (mp, vp) = column(&person, k_star - 1);
        let (ms, vs) = column(&stat, k_star - 1);
        let se = ((vp + vs) / n as f64).sqrt();
        assert!(
            (mp - ms).abs() > 3.0 * se,
            "bin k* not separated: diff {} vs 3 SE {}",
            (mp - ms).abs(),
            3.0 * se
        );
    }

    #[test]
    fn energies_finite_and_nonnegative() {
        let geom = test_geom(25);
        let clutter = ClutterModel {
            noise_std: 0.5,
            person_tail_perturbation: 1.0,
            ..ClutterModel::default()
        };
        let link = LinkId::new(0, 0);
        for seed in 0..5 {
            let traces =
                make_person_scene(&geom, &clutter, link, Point::new(2.0, 1.5), 50, seed).unwrap();
            for t in traces {
                assert!(t.energies.iter().all(|e| e.is_finite() && *e >= 0.0));
            }
        }
    }

    #[test]
    fn normalized_static_samples_look_gaussian() {
        use crate::obs::{ks_normality_stat, Condition, SampleSet};
        let geom = test_geom(30);
        let clutter = ClutterModel::default();
        let link = LinkId::new(0, 0);
        let traces = make_static_scene(&geom, &clutter, link, 200, 13).unwrap();
        let rows: Vec<Vec<f64>> = traces.iter().map(|t| t.energies.clone()).collect();
        let set = SampleSet::new(rows, Condition::Calibration, link).unwrap();
        let (_, p) = ks_normality_stat(&[set]).unwrap();
        assert!(p > 0.01, "KS p-value {p} too small for Gaussian samples");
    }

    #[test]
    fn amplitude_view_layout() {
        let geom = test_geom(10);
        let clutter = ClutterModel {
            guard_bins: 4,
            ..ClutterModel::default()
        };
        let link = LinkId::new(0, 0);
        let t = &make_static_scene(&geom, &clutter, link, 1, 9).unwrap()[0];
        let view = t.amplitude_view();
        assert_eq!(view.len(), 14);
        assert_eq!(t.guard_len(), 4);
        for (k, v) in view[4..].iter().enumerate() {
            assert!((v * v - t.energies[k]).abs() < 1e-12);
        }
    }
}
