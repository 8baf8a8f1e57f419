//! Scene description files: a TOML document holding the radio layout, the
//! person grid, the clutter parameters, and the scene seed. Three presets
//! analogize the measurement campaigns: two four-radio in-room scenes with a
//! 90 cm person grid, and a single-link through-wall scene (5 dB wall
//! attenuation, 8x pulse integration, 30 person points at 60/120 cm
//! spacing and two 100-capture calibration blocks).

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{LinkId, Point, Rect, SceneGeometry, SPEED_OF_LIGHT};
use crate::sim::ClutterModel;

/// Complete scene description: geometry, clutter, and the channel seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub name: String,
    /// Seed of the scene's channel and measurement draws.
    pub seed: u64,
    pub geometry: GeometrySpec,
    pub clutter: ClutterModel,
}

/// Geometry section of a scene file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometrySpec {
    /// Radio coordinates (meters); each radio can transmit and receive.
    pub radios: Vec<[f64; 2]>,
    /// Measured radio pairs, as index pairs into `radios`.
    pub links: Vec<[usize; 2]>,
    /// Person standing points (meters).
    pub person_points: Vec<[f64; 2]>,
    /// Room rectangle holding the radios: `[x_min, y_min, x_max, y_max]`.
    pub room: [f64; 4],
    /// Adjacent rectangle holding the person points in through-wall scenes.
    pub adjacent: Option<[f64; 4]>,
    /// Delay-bin duration (nanoseconds).
    pub bin_width_ns: f64,
    /// Delay bins per trace.
    pub n_bins: usize,
}

impl SceneSpec {
    pub fn from_toml(s: &str) -> Result<Self> {
        let spec: SceneSpec = toml::from_str(s)?;
        spec.scene_geometry()?;
        spec.clutter.validate()?;
        Ok(spec)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string_pretty(self)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml()?)?;
        Ok(())
    }

    /// The validated geometry this spec describes.
    pub fn scene_geometry(&self) -> Result<SceneGeometry> {
        let g = &self.geometry;
        let radios: Vec<Point> = g.radios.iter().map(|&r| Point::from(r)).collect();
        let bin_width = g.bin_width_ns * 1e-9;
        let geom = SceneGeometry {
            tx_positions: radios.clone(),
            rx_positions: radios,
            person_points: g.person_points.iter().map(|&p| Point::from(p)).collect(),
            room_bounds: Rect::new(g.room[0], g.room[1], g.room[2], g.room[3]),
            adjacent_bounds: g.adjacent.map(|a| Rect::new(a[0], a[1], a[2], a[3])),
            bin_width,
            bin_distance: SPEED_OF_LIGHT * bin_width,
            n_bins: g.n_bins,
        };
        geom.validate()?;
        for (i, l) in g.links.iter().enumerate() {
            geom.link_positions(LinkId::new(l[0], l[1]))
                .map_err(|e| Error::Geometry(format!("link {i}: {e}")))?;
        }
        if g.links.is_empty() {
            return Err(Error::Geometry("scene lists no links".into()));
        }
        // Every person point must map inside the delay window on every link.
        for (pi, &p) in g.person_points.iter().enumerate() {
            for l in &g.links {
                let k = geom.bounce_bin(LinkId::new(l[0], l[1]), Point::from(p))?;
                if k > g.n_bins {
                    return Err(Error::Geometry(format!(
                        "person point {pi} maps to bin {k} on link {}-{}, beyond n_bins = {}",
                        l[0], l[1], g.n_bins
                    )));
                }
            }
        }
        Ok(geom)
    }

    pub fn links(&self) -> Vec<LinkId> {
        self.geometry
            .links
            .iter()
            .map(|l| LinkId::new(l[0], l[1]))
            .collect()
    }

    /// Looks up a built-in preset by name.
    pub fn preset(name: &str) -> Option<SceneSpec> {
        match name {
            "room-a" => Some(room_a()),
            "room-b" => Some(room_b()),
            "through-wall" => Some(through_wall()),
            _ => None,
        }
    }
}

fn grid_points(xs: &[f64], ys: &[f64]) -> Vec<[f64; 2]> {
    let mut pts = Vec::with_capacity(xs.len() * ys.len());
    for &y in ys {
        for &x in xs {
            pts.push([x, y]);
        }
    }
    pts
}

fn all_pairs(n: usize) -> Vec<[usize; 2]> {
    let mut links = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            links.push([i, j]);
        }
    }
    links
}

/// Cluttered office analog: four radios, six links, twelve person points on
/// a 90 cm grid.
pub fn room_a() -> SceneSpec {
    SceneSpec {
        name: "room-a".into(),
        seed: 1001,
        geometry: GeometrySpec {
            radios: vec![[0.5, 0.5], [5.5, 0.5], [5.5, 4.5], [0.5, 4.5]],
            links: all_pairs(4),
            person_points: grid_points(&[1.5, 2.4, 3.3, 4.2], &[1.5, 2.4, 3.3]),
            room: [0.0, 0.0, 6.0, 5.0],
            adjacent: None,
            bin_width_ns: 1.0,
            n_bins: 30,
        },
        clutter: ClutterModel::default(),
    }
}

/// Larger, lower-clutter classroom analog.
pub fn room_b() -> SceneSpec {
    SceneSpec {
        name: "room-b".into(),
        seed: 2002,
        geometry: GeometrySpec {
            radios: vec![[0.5, 0.5], [7.5, 0.5], [7.5, 5.5], [0.5, 5.5]],
            links: all_pairs(4),
            person_points: grid_points(&[1.6, 2.5, 3.4, 4.3, 5.2, 6.1], &[1.6, 2.5, 3.4, 4.3]),
            room: [0.0, 0.0, 8.0, 6.0],
            adjacent: None,
            bin_width_ns: 1.0,
            n_bins: 40,
        },
        clutter: ClutterModel {
            path_count: 35,
            decay_constant: 12e-9,
            path_amplitude_scale: 0.8,
            noise_std: 0.15,
            person_path_gain: 0.6,
            person_tail_perturbation: 0.28,
            integration_factor: 1,
            guard_bins: 8,
        },
    }
}

/// Single-link through-wall analog: radios 1 m apart on the far side of the
/// wall, 5 dB penetration loss, 8x pulse integration.
pub fn through_wall() -> SceneSpec {
    let xs: Vec<f64> = (0..10).map(|i| 0.3 + 0.6 * i as f64).collect();
    let ys = [1.3, 2.5, 3.7];
    SceneSpec {
        name: "through-wall".into(),
        seed: 3003,
        geometry: GeometrySpec {
            radios: vec![[-0.18, 2.0], [-0.18, 3.0]],
            links: vec![[0, 1]],
            person_points: grid_points(&xs, &ys),
            room: [-1.0, 0.0, 0.0, 5.0],
            adjacent: Some([0.0, 0.0, 6.0, 5.0]),
            bin_width_ns: 1.0,
            n_bins: 45,
        },
        clutter: ClutterModel {
            integration_factor: 8,
            person_path_gain: 0.3,
            person_tail_perturbation: 0.15,
            ..ClutterModel::default()
        }
        .attenuated(5.0),
    }
}
