//! Single-bounce specular propagation over an indoor scene.
//!
//! Receive power at a user is the incoherent sum of a direct line-of-sight
//! term (free-space path loss, zero when blocked) and one specular bounce per
//! tile. Each tile contribution combines spherical spreading to the tile, the
//! tile's projected aperture, its reflectivity, a cos^q lobe around the
//! specular direction, spreading to the user and the receive aperture. Walls
//! and obstacles are opaque blockers; their materials are carried as scene
//! description but do not re-radiate in this model.

use crate::geometry::{reflect, Aabb, ArrayLayout, TileGeom};
use crate::{Error, Result, Vec3};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Surface material with a power reflection coefficient in [0, 1].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Material {
    pub name: String,
    pub reflectance: f64,
}

impl Material {
    pub fn new(name: &str, reflectance: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&reflectance) {
            return Err(Error::InvalidConfiguration(format!(
                "material {name} reflectance {reflectance} outside [0, 1]"
            )));
        }
        Ok(Material { name: name.to_string(), reflectance })
    }
}

/// Axis-aligned wall slab with finite thickness.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Slab {
    pub bounds: Aabb,
    pub material: Material,
}

/// Vertical cylinder obstacle (axis parallel to z).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CylinderObstacle {
    pub center_x: f64,
    pub center_y: f64,
    pub radius: f64,
    pub z_min: f64,
    pub z_max: f64,
    pub material: Material,
}

/// Static scene: blockers, the transmitter, and the spatial regions the
/// simulation operates in.
#[derive(Clone, Debug)]
pub struct Scene {
    pub walls: Vec<Slab>,
    pub obstacles: Vec<CylinderObstacle>,
    pub ap_position: Vec3,
    pub frequency_hz: f64,
    pub tx_power_mw: f64,
    /// Height at which receive power is sampled for heatmaps, metres.
    pub rx_height: f64,
    /// Region focal points are confined to.
    pub focal_region: Aabb,
    /// Overall scene bounding box used for observation normalization.
    pub bounds: Aabb,
}

impl Scene {
    pub fn validate(&self) -> Result<()> {
        if !(self.frequency_hz > 0.0) {
            return Err(Error::InvalidConfiguration(format!(
                "carrier frequency must be positive, got {}",
                self.frequency_hz
            )));
        }
        if !(self.tx_power_mw > 0.0) {
            return Err(Error::InvalidConfiguration(format!(
                "transmit power must be positive, got {}",
                self.tx_power_mw
            )));
        }
        for wall in &self.walls {
            if wall.material.reflectance < 0.0 || wall.material.reflectance > 1.0 {
                return Err(Error::InvalidConfiguration(format!(
                    "wall material {} reflectance outside [0, 1]",
                    wall.material.name
                )));
            }
        }
        for obstacle in &self.obstacles {
            if !(obstacle.radius > 0.0) {
                return Err(Error::InvalidConfiguration(
                    "obstacle radius must be positive".into(),
                ));
            }
            if obstacle.z_min > obstacle.z_max {
                return Err(Error::InvalidConfiguration(
                    "obstacle z range out of order".into(),
                ));
            }
        }
        if !self.bounds.contains(self.ap_position) {
            return Err(Error::InvalidConfiguration(
                "transmitter lies outside the scene bounds".into(),
            ));
        }
        Ok(())
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.frequency_hz
    }

    pub fn tx_power_watts(&self) -> f64 {
        self.tx_power_mw * 1e-3
    }
}

/// Tile re-radiation parameters: specular lobe sharpness, tile power
/// reflectivity, and the receiver noise floor used as the reporting floor.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct RadiationModel {
    pub lobe_exponent: f64,
    pub tile_reflectivity: f64,
    pub noise_floor_dbm: f64,
}

impl Default for RadiationModel {
    fn default() -> Self {
        RadiationModel {
            lobe_exponent: 140.0,
            tile_reflectivity: 0.95,
            noise_floor_dbm: -150.0,
        }
    }
}

const GEOM_EPS: f64 = 1e-12;

/// True when the open segment strictly crosses the interior of the slab.
fn slab_blocks(p: Vec3, q: Vec3, slab: &Aabb) -> bool {
    let d = q - p;
    let mut t0 = 0.0f64;
    let mut t1 = 1.0f64;
    for axis in 0..3 {
        let (pa, da, lo, hi) = match axis {
            0 => (p.x, d.x, slab.min.x, slab.max.x),
            1 => (p.y, d.y, slab.min.y, slab.max.y),
            _ => (p.z, d.z, slab.min.z, slab.max.z),
        };
        if da.abs() < GEOM_EPS {
            if pa <= lo || pa >= hi {
                return false;
            }
        } else {
            let mut ta = (lo - pa) / da;
            let mut tb = (hi - pa) / da;
            if ta > tb {
                std::mem::swap(&mut ta, &mut tb);
            }
            t0 = t0.max(ta);
            t1 = t1.min(tb);
            if t0 >= t1 {
                return false;
            }
        }
    }
    if t1 - t0 < GEOM_EPS {
        return false;
    }
    // Midpoint of the clipped interval must be strictly interior; this
    // rejects face-grazing segments.
    let mid = p + d * (0.5 * (t0 + t1));
    mid.x > slab.min.x + GEOM_EPS
        && mid.x < slab.max.x - GEOM_EPS
        && mid.y > slab.min.y + GEOM_EPS
        && mid.y < slab.max.y - GEOM_EPS
        && mid.z > slab.min.z + GEOM_EPS
        && mid.z < slab.max.z - GEOM_EPS
}

/// True when the open segment strictly crosses the cylinder interior.
fn cylinder_blocks(p: Vec3, q: Vec3, cyl: &CylinderObstacle) -> bool {
    let dx = q.x - p.x;
    let dy = q.y - p.y;
    let fx = p.x - cyl.center_x;
    let fy = p.y - cyl.center_y;
    let a = dx * dx + dy * dy;
    let (mut t0, mut t1);
    if a < GEOM_EPS * GEOM_EPS {
        // Vertically projected point: inside the circle or not at all.
        if fx * fx + fy * fy >= cyl.radius * cyl.radius {
            return false;
        }
        t0 = 0.0;
        t1 = 1.0;
    } else {
        let b = 2.0 * (fx * dx + fy * dy);
        let c = fx * fx + fy * fy - cyl.radius * cyl.radius;
        let disc = b * b - 4.0 * a * c;
        if disc <= 0.0 {
            return false; // miss or tangent: open interior untouched
        }
        let sqrt_disc = disc.sqrt();
        t0 = (-b - sqrt_disc) / (2.0 * a);
        t1 = (-b + sqrt_disc) / (2.0 * a);
        t0 = t0.max(0.0);
        t1 = t1.min(1.0);
        if t1 - t0 < GEOM_EPS {
            return false;
        }
    }
    // Clip against the z extent.
    let dz = q.z - p.z;
    if dz.abs() < GEOM_EPS {
        if p.z <= cyl.z_min || p.z >= cyl.z_max {
            return false;
        }
    } else {
        let mut ta = (cyl.z_min - p.z) / dz;
        let mut tb = (cyl.z_max - p.z) / dz;
        if ta > tb {
            std::mem::swap(&mut ta, &mut tb);
        }
        t0 = t0.max(ta);
        t1 = t1.min(tb);
        if t1 - t0 < GEOM_EPS {
            return false;
        }
    }
    let tm = 0.5 * (t0 + t1);
    let mx = p.x + dx * tm - cyl.center_x;
    let my = p.y + dy * tm - cyl.center_y;
    let mz = p.z + dz * tm;
    mx * mx + my * my < cyl.radius * cyl.radius && mz > cyl.z_min && mz < cyl.z_max
}

/// True when any wall or obstacle blocks the open segment between two points.
pub fn segment_blocked(p: Vec3, q: Vec3, scene: &Scene) -> bool {
    scene.walls.iter().any(|w| slab_blocks(p, q, &w.bounds))
        || scene.obstacles.iter().any(|c| cylinder_blocks(p, q, c))
}

/// Receive power (watts) scattered by one tile towards `user`. Zero when the
/// tile faces away from the transmitter or the user, or when either hop is
/// blocked.
pub fn tile_contribution(
    tile: &TileGeom,
    scene: &Scene,
    user: Vec3,
    model: &RadiationModel,
) -> Result<f64> {
    let to_source = scene.ap_position - tile.position;
    let to_user = user - tile.position;
    let d1 = to_source.norm();
    let d2 = to_user.norm();
    if d1 < GEOM_EPS {
        return Err(Error::InvalidArgument(
            "transmitter coincides with tile centre".into(),
        ));
    }
    if d2 < GEOM_EPS {
        return Err(Error::InvalidArgument(
            "user coincides with tile centre".into(),
        ));
    }
    let incidence_cos = to_source.dot(tile.normal) / d1;
    if incidence_cos <= 0.0 {
        return Ok(0.0);
    }
    let outgoing = reflect(-to_source / d1, tile.normal);
    let lobe_cos = outgoing.dot(to_user) / d2;
    if lobe_cos <= 0.0 {
        return Ok(0.0);
    }
    if segment_blocked(scene.ap_position, tile.position, scene)
        || segment_blocked(tile.position, user, scene)
    {
        return Ok(0.0);
    }
    let lambda = scene.wavelength();
    let q = model.lobe_exponent;
    let power = scene.tx_power_watts() / (4.0 * PI * d1 * d1)
        * tile.area
        * incidence_cos
        * model.tile_reflectivity
        * ((q + 1.0) / (2.0 * PI))
        * lobe_cos.powf(q)
        * (1.0 / (d2 * d2))
        * (lambda * lambda / (4.0 * PI));
    Ok(power)
}

/// Direct free-space term (watts); zero when the line of sight is blocked.
pub fn direct_power_watts(scene: &Scene, user: Vec3) -> f64 {
    if segment_blocked(scene.ap_position, user, scene) {
        return 0.0;
    }
    let d = scene.ap_position.distance(user);
    if d < GEOM_EPS {
        return scene.tx_power_watts();
    }
    let lambda = scene.wavelength();
    let factor = lambda / (4.0 * PI * d);
    scene.tx_power_watts() * factor * factor
}

pub fn milliwatts_to_dbm(mw: f64) -> f64 {
    10.0 * mw.log10()
}

/// Total receive power in dBm: direct term plus incoherent tile sum, floored
/// at the noise floor. Tiles coincident with the user are skipped.
pub fn rssi(scene: &Scene, tiles: &[TileGeom], user: Vec3, model: &RadiationModel) -> f64 {
    let mut total_w = direct_power_watts(scene, user);
    for tile in tiles {
        match tile_contribution(tile, scene, user, model) {
            Ok(p) => total_w += p,
            Err(_) => continue,
        }
    }
    if total_w <= 0.0 {
        return model.noise_floor_dbm;
    }
    milliwatts_to_dbm(total_w * 1e3).max(model.noise_floor_dbm)
}

/// Rest orientation for every tile: the unsteered array.
pub fn flat_configuration(layout: &ArrayLayout) -> Vec<Vec3> {
    vec![layout.base_plane.normal; layout.tile_count()]
}

/// Copy of the layout's tiles with replaced normals.
pub fn tiles_with_normals(layout: &ArrayLayout, normals: &[Vec3]) -> Vec<TileGeom> {
    assert_eq!(normals.len(), layout.tile_count(), "one normal per tile");
    layout
        .tiles
        .iter()
        .zip(normals)
        .map(|(tile, &normal)| TileGeom { normal, ..tile.clone() })
        .collect()
}

/// Sampling grid for receive-power maps: `resolution` samples per axis over
/// the rectangle, evaluated at the scene's rx height.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct HeatmapGrid {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
    pub resolution: usize,
}

/// Receive-power samples in row-major order: y rows ascending, x within each
/// row ascending.
#[derive(Clone, Debug)]
pub struct Heatmap {
    pub grid: HeatmapGrid,
    pub values_dbm: Vec<f64>,
}

pub fn heatmap(
    scene: &Scene,
    tiles: &[TileGeom],
    grid: &HeatmapGrid,
    model: &RadiationModel,
) -> Result<Heatmap> {
    if grid.resolution < 2 {
        return Err(Error::InvalidArgument(format!(
            "heatmap resolution must be at least 2 per axis, got {}",
            grid.resolution
        )));
    }
    if !(grid.x1 > grid.x0) || !(grid.y1 > grid.y0) {
        return Err(Error::InvalidArgument(
            "heatmap rectangle must have positive extent".into(),
        ));
    }
    let n = grid.resolution;
    let mut values_dbm = Vec::with_capacity(n * n);
    for j in 0..n {
        let y = grid.y0 + (grid.y1 - grid.y0) * j as f64 / (n - 1) as f64;
        for i in 0..n {
            let x = grid.x0 + (grid.x1 - grid.x0) * i as f64 / (n - 1) as f64;
            let sample = Vec3::new(x, y, scene.rx_height);
            values_dbm.push(rssi(scene, tiles, sample, model));
        }
    }
    Ok(Heatmap { grid: *grid, values_dbm })
}

pub mod export {
    //! Plain-text and image writers for receive-power maps. Formats are fixed
    //! so repeated runs are byte-identical.

    use super::Heatmap;
    use crate::Result;
    use std::io::Write;

    /// Colour ramp endpoints in dBm matching the documented map scale.
    pub const RAMP_MIN_DBM: f64 = -110.0;
    pub const RAMP_MAX_DBM: f64 = -60.0;

    /// Piecewise-linear dark-to-bright colour stops, position in [0, 1].
    const STOPS: [(f64, [u8; 3]); 5] = [
        (0.00, [13, 8, 135]),
        (0.25, [126, 3, 168]),
        (0.50, [204, 71, 120]),
        (0.75, [248, 149, 64]),
        (1.00, [240, 249, 33]),
    ];

    /// Maps a dBm value onto the ramp; values outside the range clamp to the
    /// endpoint colours.
    pub fn ramp_color(dbm: f64) -> [u8; 3] {
        let t = ((dbm - RAMP_MIN_DBM) / (RAMP_MAX_DBM - RAMP_MIN_DBM)).clamp(0.0, 1.0);
        for pair in STOPS.windows(2) {
            let (t0, c0) = pair[0];
            let (t1, c1) = pair[1];
            if t <= t1 {
                let f = if t1 > t0 { (t - t0) / (t1 - t0) } else { 0.0 };
                let mut out = [0u8; 3];
                for k in 0..3 {
                    out[k] = (c0[k] as f64 + f * (c1[k] as f64 - c0[k] as f64)).round() as u8;
                }
                return out;
            }
        }
        STOPS[STOPS.len() - 1].1
    }

    /// CSV rows `x,y,rssi_dbm` in the map's row-major sample order.
    pub fn write_heatmap_csv<W: Write>(map: &Heatmap, out: &mut W) -> Result<()> {
        writeln!(out, "x,y,rssi_dbm")?;
        let n = map.grid.resolution;
        for j in 0..n {
            let y = map.grid.y0 + (map.grid.y1 - map.grid.y0) * j as f64 / (n - 1) as f64;
            for i in 0..n {
                let x = map.grid.x0 + (map.grid.x1 - map.grid.x0) * i as f64 / (n - 1) as f64;
                writeln!(out, "{},{},{}", x, y, map.values_dbm[j * n + i])?;
            }
        }
        Ok(())
    }

    /// Binary portable pixmap: one pixel per sample, top image row = largest
    /// y so the map reads like a floor plan.
    pub fn write_heatmap_ppm<W: Write>(map: &Heatmap, out: &mut W) -> Result<()> {
        let n = map.grid.resolution;
        write!(out, "P6\n{n} {n}\n255\n")?;
        let mut pixels = Vec::with_capacity(3 * n * n);
        for j in (0..n).rev() {
            for i in 0..n {
                pixels.extend_from_slice(&ramp_color(map.values_dbm[j * n + i]));
            }
        }
        out.write_all(&pixels)?;
        Ok(())
    }
}
