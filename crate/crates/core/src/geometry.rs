//! Scene geometry: radio and person coordinates, room bounds, and the
//! delay-bin convention shared by the simulator and the localizer.
//!
//! Delay bins index *excess* path length relative to the direct
//! transmitter-receiver path: bin `k` (1-based) covers excess distances in
//! `((k-1)*d_k, k*d_k]`, so the line-of-sight component always falls in
//! bin 1. Points with zero excess (on the segment between the radios) are
//! clamped to bin 1 because the ceiling mapping would otherwise yield 0.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// 2-D point in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dist(&self, other: Point) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2)).sqrt()
    }
}

impl From<[f64; 2]> for Point {
    fn from(v: [f64; 2]) -> Self {
        Point { x: v[0], y: v[1] }
    }
}

/// Axis-aligned rectangle (meters).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl Rect {
    pub fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Self {
        Rect {
            x_min,
            y_min,
            x_max,
            y_max,
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.x_min && p.x <= self.x_max && p.y >= self.y_min && p.y <= self.y_max
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }
}

/// Transmitter/receiver pair, by index into the scene's radio lists.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LinkId {
    pub tx: usize,
    pub rx: usize,
}

impl LinkId {
    pub fn new(tx: usize, rx: usize) -> Self {
        LinkId { tx, rx }
    }
}

impl std::fmt::Display for LinkId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}-{}", self.tx, self.rx)
    }
}

impl std::str::FromStr for LinkId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (tx, rx) = s
            .split_once('-')
            .ok_or_else(|| Error::Input(format!("malformed link id '{s}', expected 'tx-rx'")))?;
        Ok(LinkId {
            tx: tx
                .trim()
                .parse()
                .map_err(|_| Error::Input(format!("malformed link id '{s}'")))?,
            rx: rx
                .trim()
                .parse()
                .map_err(|_| Error::Input(format!("malformed link id '{s}'")))?,
        })
    }
}

/// Radio and person placement for one monitored area.
///
/// `bin_distance` must equal `SPEED_OF_LIGHT * bin_width` to within 1e-9
/// relative error; use [`SceneGeometry::new`] to derive it. Person points
/// must lie inside `room_bounds`, or inside `adjacent_bounds` when one is
/// set (the through-wall case, where the radios sit on the other side of
/// the wall from the person).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SceneGeometry {
    pub tx_positions: Vec<Point>,
    pub rx_positions: Vec<Point>,
    pub person_points: Vec<Point>,
    pub room_bounds: Rect,
    /// Region holding the person points in through-wall scenes.
    pub adjacent_bounds: Option<Rect>,
    /// Delay-bin duration T (seconds).
    pub bin_width: f64,
    /// Distance light travels during one bin, d_k = c * T (meters).
    pub bin_distance: f64,
    /// Number of delay bins n in every trace and observation vector.
    pub n_bins: usize,
}

impl SceneGeometry {
    /// Builds a geometry with `bin_distance` derived from `bin_width`.
    pub fn new(
        tx_positions: Vec<Point>,
        rx_positions: Vec<Point>,
        person_points: Vec<Point>,
        room_bounds: Rect,
        bin_width: f64,
        n_bins: usize,
    ) -> Result<Self> {
        let geom = SceneGeometry {
            tx_positions,
            rx_positions,
            person_points,
            room_bounds,
            adjacent_bounds: None,
            bin_width,
            bin_distance: SPEED_OF_LIGHT * bin_width,
            n_bins,
        };
        geom.validate()?;
        Ok(geom)
    }

    /// Checks the documented invariants; call after any manual construction.
    pub fn validate(&self) -> Result<()> {
        if !self.bin_width.is_finite() || self.bin_width <= 0.0 {
            return Err(Error::Geometry(format!(
                "bin_width must be positive, got {}",
                self.bin_width
            )));
        }
        let expect = SPEED_OF_LIGHT * self.bin_width;
        if (self.bin_distance - expect).abs() > 1e-9 * expect {
            return Err(Error::Geometry(format!(
                "bin_distance {} inconsistent with c * bin_width = {expect}",
                self.bin_distance
            )));
        }
        if self.n_bins == 0 {
            return Err(Error::Geometry("n_bins must be positive".into()));
        }
        if self.tx_positions.is_empty() || self.rx_positions.is_empty() {
            return Err(Error::Geometry(
                "at least one tx and one rx required".into(),
            ));
        }
        for (label, pts) in [("tx", &self.tx_positions), ("rx", &self.rx_positions)] {
            for (i, p) in pts.iter().enumerate() {
                if !self.room_bounds.contains(*p) {
                    return Err(Error::Geometry(format!(
                        "{label} position {i} ({}, {}) outside room bounds",
                        p.x, p.y
                    )));
                }
            }
        }
        let person_region = self.person_region();
        for (i, p) in self.person_points.iter().enumerate() {
            if !person_region.contains(*p) {
                return Err(Error::Geometry(format!(
                    "person point {i} ({}, {}) outside the allowed region",
                    p.x, p.y
                )));
            }
        }
        Ok(())
    }

    /// Region in which person points must lie.
    pub fn person_region(&self) -> Rect {
        self.adjacent_bounds.unwrap_or(self.room_bounds)
    }

    /// Bin duration in nanoseconds.
    pub fn bin_width_ns(&self) -> f64 {
        self.bin_width * 1e9
    }

    /// Transmitter and receiver coordinates for a link.
    pub fn link_positions(&self, link: LinkId) -> Result<(Point, Point)> {
        let tx = *self.tx_positions.get(link.tx).ok_or_else(|| {
            Error::Geometry(format!(
                "tx index {} out of range ({} transmitters)",
                link.tx,
                self.tx_positions.len()
            ))
        })?;
        let rx = *self.rx_positions.get(link.rx).ok_or_else(|| {
            Error::Geometry(format!(
                "rx index {} out of range ({} receivers)",
                link.rx,
                self.rx_positions.len()
            ))
        })?;
        Ok((tx, rx))
    }

    /// Excess path length (meters) of the single-bounce path through `p`.
    pub fn excess_path(&self, link: LinkId, p: Point) -> Result<f64> {
        let (tx, rx) = self.link_positions(link)?;
        Ok(tx.dist(p) + p.dist(rx) - tx.dist(rx))
    }

    /// Delay bin of the single-bounce path through `p`: the ceiling of the
    /// excess path over `bin_distance`, clamped to a minimum of 1. Not
    /// clamped above; callers needing the window check use
    /// [`crate::localize::pixel_bin_map`].
    pub fn bounce_bin(&self, link: LinkId, p: Point) -> Result<usize> {
        let excess = self.excess_path(link, p)?;
        Ok(excess_to_bin(excess, self.bin_distance))
    }
}

/// Ceiling mapping from excess path length to a 1-based bin index.
pub fn excess_to_bin(excess_m: f64, bin_distance: f64) -> usize {
    let k = (excess_m / bin_distance).ceil();
    if k < 1.0 {
        1
    } else {
        k as usize
    }
}
