//! Location estimation: fuses per-link posteriors (or point estimates) into
//! a pixel presence image whose smoothed argmax is the location, plus an
//! elliptical least-squares baseline operating on point estimates only.
//!
//! Each link maps a pixel to the delay bin its single-bounce ellipse falls
//! in. The soft image accumulates the nonnegative posterior increment
//! `(alpha_k - alpha_{k-1})^+` at that bin; the hard image an indicator of
//! the link's point estimate. Per-pixel link evidence is combined with a
//! p-norm (default p = 0.2, which favors agreement of many weak links over
//! one strong link). Pixels mapping beyond the delay window contribute
//! nothing for that link.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{LinkId, Point, Rect, SceneGeometry};
use crate::hmm::PosteriorTrack;

/// Default pixel pitch (meters).
pub const DEFAULT_PIXEL_PITCH: f64 = 0.10;

/// Default Gaussian smoothing sigma (meters).
pub const DEFAULT_SMOOTHING_SIGMA: f64 = 0.20;

/// Default p-norm exponent.
pub const DEFAULT_P_NORM: f64 = 0.2;

/// How per-link evidence is combined at a pixel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PixelNorm {
    /// p-norm with exponent p > 0.
    Power(f64),
    /// Count of links with non-zero evidence (the limiting "p = 0" reading,
    /// kept behind an explicit variant because the p-norm formula is
    /// undefined there).
    CountNonzero,
}

impl PixelNorm {
    fn validate(&self) -> Result<()> {
        if let PixelNorm::Power(p) = self {
            if !p.is_finite() || *p <= 0.0 {
                return Err(Error::Parameter(format!(
                    "p-norm exponent must be positive, got {p}; use CountNonzero for the counting variant"
                )));
            }
        }
        Ok(())
    }

    fn combine(&self, evidence: &[f64]) -> f64 {
        match self {
            PixelNorm::Power(p) => {
                let sum: f64 = evidence.iter().map(|a| a.powf(*p)).sum();
                if sum == 0.0 {
                    0.0
                } else {
                    sum.powf(1.0 / p)
                }
            }
            PixelNorm::CountNonzero => evidence.iter().filter(|a| **a > 0.0).count() as f64,
        }
    }
}

/// Regular pixel grid covering a rectangle; pixel `i = iy * nx + ix` is
/// centered at `origin + ((ix + 1/2) pitch, (iy + 1/2) pitch)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PixelGrid {
    pub origin: Point,
    pub nx: usize,
    pub ny: usize,
    pub pitch: f64,
}

impl PixelGrid {
    /// Smallest grid of `pitch`-sized pixels covering `area`.
    pub fn cover(area: Rect, pitch: f64) -> Result<PixelGrid> {
        if !pitch.is_finite() || pitch <= 0.0 {
            return Err(Error::Parameter(format!(
                "pixel pitch must be positive, got {pitch}"
            )));
        }
        if area.width() <= 0.0 || area.height() <= 0.0 {
            return Err(Error::Geometry("grid area has no extent".into()));
        }
        Ok(PixelGrid {
            origin: Point::new(area.x_min, area.y_min),
            nx: (area.width() / pitch).ceil() as usize,
            ny: (area.height() / pitch).ceil() as usize,
            pitch,
        })
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn center(&self, i: usize) -> Point {
        let ix = i % self.nx;
        let iy = i / self.nx;
        Point::new(
            self.origin.x + (ix as f64 + 0.5) * self.pitch,
            self.origin.y + (iy as f64 + 0.5) * self.pitch,
        )
    }
}

/// Pixel-to-bin mapping outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PixelBin {
    /// Bin index clamped to `[1, n_bins]`.
    pub bin: usize,
    /// False when the unclamped bin fell beyond the window; imaging treats
    /// such pixels as contributing no evidence.
    pub in_window: bool,
}

/// Delay bin of the single-bounce ellipse through `pixel` for one link:
/// ceiling of the excess path over the bin distance, clamped to the window.
pub fn pixel_bin_map(geom: &SceneGeometry, link: LinkId, pixel: Point) -> Result<PixelBin> {
    let bin = geom.bounce_bin(link, pixel)?;
    if bin > geom.n_bins {
        Ok(PixelBin {
            bin: geom.n_bins,
            in_window: false,
        })
    } else {
        Ok(PixelBin {
            bin,
            in_window: true,
        })
    }
}

/// Per-link smoothed posteriors feeding the soft image.
#[derive(Debug, Clone)]
pub struct LinkTrack {
    pub link: LinkId,
    pub track: PosteriorTrack,
}

/// Fused per-pixel presence values over a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PresenceImage {
    pub values: Vec<f64>,
    pub grid: PixelGrid,
    pub norm: PixelNorm,
    /// Gaussian smoothing applied by [`locate`] (meters).
    pub smoothing_sigma: f64,
}

impl PresenceImage {
    /// Values rescaled to [0, 1] (all-zero images stay zero), row-major by
    /// y then x: ready for image/matrix export.
    pub fn normalized(&self) -> Vec<f64> {
        let max = self.values.iter().cloned().fold(0.0f64, f64::max);
        if max <= 0.0 {
            return vec![0.0; self.values.len()];
        }
        self.values.iter().map(|v| v / max).collect()
    }

    /// Writes the image as a CSV grid, one row per y index.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W, normalized: bool) -> Result<()> {
        let values = if normalized {
            self.normalized()
        } else {
            self.values.clone()
        };
        for iy in 0..self.grid.ny {
            let row: Vec<String> = (0..self.grid.nx)
                .map(|ix| format!("{:.9e}", values[iy * self.grid.nx + ix]))
                .collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

fn check_track_lengths(geom: &SceneGeometry, tracks: &[LinkTrack]) -> Result<()> {
    for t in tracks {
        if t.track.alpha.len() != geom.n_bins {
            return Err(Error::Input(format!(
                "link {} track has {} bins, scene window has {} (mismatched bin widths or windows)",
                t.link,
                t.track.alpha.len(),
                geom.n_bins
            )));
        }
    }
    Ok(())
}

/// Soft presence image from per-link posterior tracks: each link contributes
/// the clipped posterior increment at the pixel's mapped bin (`alpha_0 = 0`),
/// combined across links by the chosen norm.
///
/// A unique intersection needs at least three links; fewer is accepted (the
/// image is still defined) but the estimate is ambiguous.
pub fn presence_image_soft(
    geom: &SceneGeometry,
    tracks: &[LinkTrack],
    grid: &PixelGrid,
    norm: PixelNorm,
    smoothing_sigma: f64,
) -> Result<PresenceImage> {
    norm.validate()?;
    check_track_lengths(geom, tracks)?;
    build_image(geom, grid, norm, smoothing_sigma, tracks, |track, bin| {
        let alpha = &track.track.alpha;
        let prev = if bin >= 2 { alpha[bin - 2] } else { 0.0 };
        (alpha[bin - 1] - prev).max(0.0)
    })
}

/// Hard (range-only) presence image from per-link point estimates: indicator
/// evidence at pixels whose mapped bin equals the link's estimate. Links
/// with no detection contribute nothing.
pub fn presence_image_hard(
    geom: &SceneGeometry,
    estimates: &[(LinkId, Option<usize>)],
    grid: &PixelGrid,
    norm: PixelNorm,
    smoothing_sigma: f64,
) -> Result<PresenceImage> {
    norm.validate()?;
    let tracks: Vec<(LinkId, usize)> = estimates
        .iter()
        .filter_map(|(l, e)| e.map(|k| (*l, k)))
        .collect();
    build_image(
        geom,
        grid,
        norm,
        smoothing_sigma,
        &tracks,
        |&(_, k_hat), bin| {
            if bin == k_hat {
                1.0
            } else {
                0.0
            }
        },
    )
}

fn build_image<L>(
    geom: &SceneGeometry,
    grid: &PixelGrid,
    norm: PixelNorm,
    smoothing_sigma: f64,
    links: &[L],
    evidence_at: impl Fn(&L, usize) -> f64,
) -> Result<PresenceImage>
where
    L: LinkOf,
{
    if smoothing_sigma < 0.0 {
        return Err(Error::Parameter("smoothing sigma must be >= 0".into()));
    }
    let mut values = vec![0.0; grid.len()];
    let mut evidence = vec![0.0; links.len()];
    for (i, v) in values.iter_mut().enumerate() {
        let pixel = grid.center(i);
        for (m, l) in links.iter().enumerate() {
            let pb = pixel_bin_map(geom, l.link_id(), pixel)?;
            evidence[m] = if pb.in_window {
                evidence_at(l, pb.bin)
            } else {
                0.0
            };
        }
        *v = norm.combine(&evidence);
    }
    Ok(PresenceImage {
        values,
        grid: grid.clone(),
        norm,
        smoothing_sigma,
    })
}

trait LinkOf {
    fn link_id(&self) -> LinkId;
}

impl LinkOf for LinkTrack {
    fn link_id(&self) -> LinkId {
        self.link
    }
}

impl LinkOf for (LinkId, usize) {
    fn link_id(&self) -> LinkId {
        self.0
    }
}

/// Separable Gaussian blur with reflective padding; sigma in meters.
fn gaussian_blur(values: &[f64], grid: &PixelGrid, sigma_m: f64) -> Vec<f64> {
    let sigma = sigma_m / grid.pitch;
    if sigma <= 0.0 {
        return values.to_vec();
    }
    let radius = (3.0 * sigma).ceil() as isize;
    let kernel: Vec<f64> = (-radius..=radius)
        .map(|d| (-0.5 * (d as f64 / sigma).powi(2)).exp())
        .collect();
    let ksum: f64 = kernel.iter().sum();
    let kernel: Vec<f64> = kernel.into_iter().map(|k| k / ksum).collect();
    let reflect = |idx: isize, n: isize| -> usize {
        let mut i = idx;
        // Mirror at the boundaries until in range (n >= 1).
        loop {
            if i < 0 {
                i = -i - 1;
            } else if i >= n {
                i = 2 * n - 1 - i;
            } else {
                return i as usize;
            }
        }
    };
    let (nx, ny) = (grid.nx as isize, grid.ny as isize);
    let mut pass_x = vec![0.0; values.len()];
    for iy in 0..ny {
        for ix in 0..nx {
            let mut acc = 0.0;
            for (ki, kv) in kernel.iter().enumerate() {
                let sx = reflect(ix + ki as isize - radius, nx);
                acc += kv * values[iy as usize * grid.nx + sx];
            }
            pass_x[iy as usize * grid.nx + ix as usize] = acc;
        }
    }
    let mut out = vec![0.0; values.len()];
    for iy in 0..ny {
        for ix in 0..nx {
            let mut acc = 0.0;
            for (ki, kv) in kernel.iter().enumerate() {
                let sy = reflect(iy + ki as isize - radius, ny);
                acc += kv * pass_x[sy * grid.nx + ix as usize];
            }
            out[iy as usize * grid.nx + ix as usize] = acc;
        }
    }
    out
}

/// Location estimate: Gaussian-smoothed argmax pixel center. Ties break to
/// the lowest pixel index; an all-zero image is a no-estimate error.
pub fn locate(image: &PresenceImage) -> Result<Point> {
    if image.values.iter().all(|v| *v <= 0.0) {
        return Err(Error::NoEstimate(
            "presence image is all zero (no link contributed evidence)".into(),
        ));
    }
    let blurred = gaussian_blur(&image.values, &image.grid, image.smoothing_sigma);
    let mut best = 0usize;
    for (i, v) in blurred.iter().enumerate() {
        if *v > blurred[best] {
            best = i;
        }
    }
    Ok(image.grid.center(best))
}

/// Outcome of the elliptical least-squares baseline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlaFix {
    pub point: Point,
    /// False when the iteration hit its cap without meeting the step
    /// tolerance; `point` is then the best iterate.
    pub converged: bool,
    pub iterations: usize,
}

/// Elliptical least-squares location from per-link point estimates alone:
/// solves `||t_m - z|| + ||z - r_m|| = ||t_m - r_m|| + k_m * d_k` over all
/// detected links by damped Gauss-Newton from the centroid of the radios.
/// Requires at least three detections.
pub fn sla_locate(geom: &SceneGeometry, estimates: &[(LinkId, Option<usize>)]) -> Result<SlaFix> {
    let detections: Vec<(Point, Point, f64)> = estimates
        .iter()
        .filter_map(|(link, est)| {
            est.map(|k| {
                let (t, r) = geom.link_positions(*link)?;
                Ok((t, r, t.dist(r) + k as f64 * geom.bin_distance))
            })
        })
        .collect::<Result<_>>()?;
    if detections.len() < 3 {
        return Err(Error::Input(format!(
            "elliptical least squares needs >= 3 detections, got {}",
            detections.len()
        )));
    }
    let mut z = {
        let mut cx = 0.0;
        let mut cy = 0.0;
        for (t, r, _) in &detections {
            cx += t.x + r.x;
            cy += t.y + r.y;
        }
        let n = (2 * detections.len()) as f64;
        Point::new(cx / n, cy / n)
    };
    let cost = |z: Point| -> f64 {
        detections
            .iter()
            .map(|(t, r, range)| (t.dist(z) + z.dist(*r) - range).powi(2))
            .sum()
    };
    let mut current_cost = cost(z);
    let max_iters = 100;
    let mut converged = false;
    let mut iterations = 0;
    for it in 0..max_iters {
        iterations = it + 1;
        // Normal equations of the linearized residuals, lightly damped.
        let (mut jtj00, mut jtj01, mut jtj11) = (0.0, 0.0, 0.0);
        let (mut jtr0, mut jtr1) = (0.0, 0.0);
        for (t, r, range) in &detections {
            let dt = t.dist(z).max(1e-9);
            let dr = z.dist(*r).max(1e-9);
            let jx = (z.x - t.x) / dt + (z.x - r.x) / dr;
            let jy = (z.y - t.y) / dt + (z.y - r.y) / dr;
            let res = dt + dr - range;
            jtj00 += jx * jx;
            jtj01 += jx * jy;
            jtj11 += jy * jy;
            jtr0 += jx * res;
            jtr1 += jy * res;
        }
        let damping = 1e-9 * (jtj00 + jtj11 + 1.0);
        let (a, b, d) = (jtj00 + damping, jtj01, jtj11 + damping);
        let det = a * d - b * b;
        if det.abs() < 1e-30 {
            break;
        }
        let step_x = -(d * jtr0 - b * jtr1) / det;
        let step_y = -(-b * jtr0 + a * jtr1) / det;
        // Damped line search: halve the step while it does not improve.
        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..20 {
            let cand = Point::new(z.x + scale * step_x, z.y + scale * step_y);
            let c = cost(cand);
            if c < current_cost {
                z = cand;
                current_cost = c;
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        let step_norm = (step_x * step_x + step_y * step_y).sqrt() * scale;
        if !accepted || step_norm < 1e-10 {
            converged = true;
            break;
        }
    }
    Ok(SlaFix {
        point: z,
        converged,
        iterations,
    })
}
