//! Array geometry and the focal-point steering abstraction.
//!
//! Tiles are packed on a hexagonal offset grid in a base plane. Steering a
//! segment means choosing one focal point for it: every tile in the segment
//! orients its normal along the bisector of the unit directions to the source
//! and to the focal point, so the specular reflection of the source ray passes
//! through the focal point. Orientations are expressed as (azimuth, polar)
//! pairs, clamped to actuator limits, and converted back to unit normals.

use crate::{Error, Result, Vec3};
use serde::{Deserialize, Serialize};

/// Axis-aligned box, used for wall slabs and spatial regions. Degenerate
/// extents (min == max on an axis) are allowed for planar regions.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn new(min: Vec3, max: Vec3) -> Result<Self> {
        if !(min.x <= max.x && min.y <= max.y && min.z <= max.z) {
            return Err(Error::InvalidConfiguration(format!(
                "box bounds out of order: min {min:?} max {max:?}"
            )));
        }
        if !min.is_finite() || !max.is_finite() {
            return Err(Error::InvalidConfiguration("box bounds must be finite".into()));
        }
        Ok(Aabb { min, max })
    }

    pub fn contains(&self, p: Vec3) -> bool {
        p.x >= self.min.x
            && p.x <= self.max.x
            && p.y >= self.min.y
            && p.y <= self.max.y
            && p.z >= self.min.z
            && p.z <= self.max.z
    }

    /// Closest point of the box to `p`.
    pub fn clamp_point(&self, p: Vec3) -> Vec3 {
        Vec3::new(
            p.x.clamp(self.min.x, self.max.x),
            p.y.clamp(self.min.y, self.max.y),
            p.z.clamp(self.min.z, self.max.z),
        )
    }

    pub fn center(&self) -> Vec3 {
        (self.min + self.max) * 0.5
    }

    pub fn extent(&self) -> Vec3 {
        self.max - self.min
    }
}

/// Actuator range for tile orientation, radians.
/// Azimuth bounds lie in (-pi, pi], polar bounds in [0, pi].
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct AngleLimits {
    pub phi_min: f64,
    pub phi_max: f64,
    pub theta_min: f64,
    pub theta_max: f64,
}

impl AngleLimits {
    pub fn new(phi_min: f64, phi_max: f64, theta_min: f64, theta_max: f64) -> Result<Self> {
        let limits = AngleLimits { phi_min, phi_max, theta_min, theta_max };
        limits.validate()?;
        Ok(limits)
    }

    pub fn validate(&self) -> Result<()> {
        let pi = std::f64::consts::PI;
        if !(self.phi_min <= self.phi_max) {
            return Err(Error::InvalidConfiguration(format!(
                "azimuth bounds out of order: [{}, {}]",
                self.phi_min, self.phi_max
            )));
        }
        if !(self.theta_min <= self.theta_max) {
            return Err(Error::InvalidConfiguration(format!(
                "polar bounds out of order: [{}, {}]",
                self.theta_min, self.theta_max
            )));
        }
        if self.phi_min <= -pi || self.phi_max > pi {
            return Err(Error::InvalidConfiguration(format!(
                "azimuth bounds must lie in (-pi, pi], got [{}, {}]",
                self.phi_min, self.phi_max
            )));
        }
        if self.theta_min < 0.0 || self.theta_max > pi {
            return Err(Error::InvalidConfiguration(format!(
                "polar bounds must lie in [0, pi], got [{}, {}]",
                self.theta_min, self.theta_max
            )));
        }
        Ok(())
    }
}

/// Plane the array is mounted on: `u` and `v` span the plane, `normal` is the
/// rest orientation of every tile. All three must be mutually orthonormal.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct BasePlane {
    pub origin: Vec3,
    pub u: Vec3,
    pub v: Vec3,
    pub normal: Vec3,
}

impl BasePlane {
    const ORTHO_TOL: f64 = 1e-9;

    pub fn new(origin: Vec3, u: Vec3, v: Vec3, normal: Vec3) -> Result<Self> {
        let plane = BasePlane { origin, u, v, normal };
        plane.validate()?;
        Ok(plane)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, axis) in [("u", self.u), ("v", self.v), ("normal", self.normal)] {
            if (axis.norm() - 1.0).abs() > Self::ORTHO_TOL {
                return Err(Error::InvalidConfiguration(format!(
                    "base plane axis {name} is not unit length (norm {})",
                    axis.norm()
                )));
            }
        }
        for (pair, d) in [
            ("u.v", self.u.dot(self.v)),
            ("u.normal", self.u.dot(self.normal)),
            ("v.normal", self.v.dot(self.normal)),
        ] {
            if d.abs() > Self::ORTHO_TOL {
                return Err(Error::InvalidConfiguration(format!(
                    "base plane axes not orthogonal: {pair} = {d}"
                )));
            }
        }
        Ok(())
    }

    /// Mirror image of `point` across the plane.
    pub fn mirror(&self, point: Vec3) -> Vec3 {
        point - 2.0 * (point - self.origin).dot(self.normal) * self.normal
    }
}

/// One reflecting tile: centre position, current unit normal, grid coordinates
/// and face area (m^2).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TileGeom {
    pub position: Vec3,
    pub normal: Vec3,
    pub row: usize,
    pub col: usize,
    pub area: f64,
}

/// Non-fatal event while mapping focal points to orientations; the affected
/// tile falls back to its rest normal.
#[derive(Clone, Debug)]
pub struct TileWarning {
    pub tile: usize,
    pub message: String,
}

/// Hexagonally packed tile array with a partition into contiguous column
/// segments, one steerable focal point per segment.
#[derive(Clone, Debug)]
pub struct ArrayLayout {
    pub tiles: Vec<TileGeom>,
    pub rows: usize,
    pub cols: usize,
    pub pitch: f64,
    pub base_plane: BasePlane,
    /// Tile indices per segment, in layout order.
    pub segments: Vec<Vec<usize>>,
    /// Segment index per tile, aligned with `tiles`.
    segment_of: Vec<usize>,
}

impl ArrayLayout {
    /// Builds a `rows x cols` hexagonal offset grid: odd rows shift half a
    /// pitch along `v`, rows advance by `pitch * sqrt(3)/2` along `u`. Starts
    /// with a single segment spanning the whole array.
    pub fn hex(rows: usize, cols: usize, pitch: f64, base_plane: BasePlane) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidConfiguration(format!(
                "array must have at least one row and column, got {rows}x{cols}"
            )));
        }
        if !(pitch > 0.0) || !pitch.is_finite() {
            return Err(Error::InvalidConfiguration(format!("tile pitch must be positive, got {pitch}")));
        }
        base_plane.validate()?;
        let area = 3.0f64.sqrt() / 2.0 * pitch * pitch;
        let row_step = pitch * 3.0f64.sqrt() / 2.0;
        let mut tiles = Vec::with_capacity(rows * cols);
        for row in 0..rows {
            let odd_shift = if row % 2 == 1 { pitch / 2.0 } else { 0.0 };
            for col in 0..cols {
                let position = base_plane.origin
                    + base_plane.v * (col as f64 * pitch + odd_shift)
                    + base_plane.u * (row as f64 * row_step);
                tiles.push(TileGeom {
                    position,
                    normal: base_plane.normal,
                    row,
                    col,
                    area,
                });
            }
        }
        let count = tiles.len();
        Ok(ArrayLayout {
            tiles,
            rows,
            cols,
            pitch,
            base_plane,
            segments: vec![(0..count).collect()],
            segment_of: vec![0; count],
        })
    }

    /// Repartitions the array into `num_segments` contiguous column slices.
    pub fn with_column_segments(mut self, num_segments: usize) -> Result<Self> {
        if num_segments == 0 || self.cols % num_segments != 0 {
            return Err(Error::InvalidConfiguration(format!(
                "cannot split {} columns into {num_segments} equal contiguous segments",
                self.cols
            )));
        }
        let width = self.cols / num_segments;
        let mut segments = vec![Vec::new(); num_segments];
        let mut segment_of = vec![0; self.tiles.len()];
        for (idx, tile) in self.tiles.iter().enumerate() {
            let seg = tile.col / width;
            segments[seg].push(idx);
            segment_of[idx] = seg;
        }
        self.segments = segments;
        self.segment_of = segment_of;
        Ok(self)
    }

    pub fn tile_count(&self) -> usize {
        self.tiles.len()
    }

    pub fn segment_count(&self) -> usize {
        self.segments.len()
    }

    pub fn segment_of_tile(&self, tile: usize) -> usize {
        self.segment_of[tile]
    }

    /// Mean tile centre of a segment.
    pub fn segment_centroid(&self, segment: usize) -> Vec3 {
        let ids = &self.segments[segment];
        let sum = ids.iter().fold(Vec3::ZERO, |acc, &i| acc + self.tiles[i].position);
        sum / ids.len() as f64
    }

    /// Number of scalars steered under focal-point control: 3 per segment.
    pub fn focal_coordinate_count(&self) -> usize {
        3 * self.segments.len()
    }

    /// Number of scalars steered under direct per-tile orientation control:
    /// an (azimuth, polar) pair per tile.
    pub fn tile_angle_count(&self) -> usize {
        2 * self.tiles.len()
    }

    /// Rest orientation of the array expressed as angles.
    pub fn rest_angles(&self) -> (f64, f64) {
        normal_to_angles(self.base_plane.normal)
            .expect("base plane normal is validated unit length")
    }
}

/// Unit normal bisecting the directions from `tile` to `source` and from
/// `tile` to `focal`: the orientation that makes the specular reflection of
/// the source ray pass through the focal point.
pub fn bisector_normal(source: Vec3, tile: Vec3, focal: Vec3) -> Result<Vec3> {
    let to_source = (source - tile).try_normalized().ok_or_else(|| {
        Error::InvalidArgument("source coincides with tile centre".to_string())
    })?;
    let to_focal = (focal - tile).try_normalized().ok_or_else(|| {
        Error::InvalidArgument("focal point coincides with tile centre".to_string())
    })?;
    let half_sum = 0.5 * (to_source + to_focal);
    half_sum.try_normalized().ok_or_else(|| {
        Error::DegenerateBisector(
            "source and focal directions are anti-parallel".to_string(),
        )
    })
}

/// Splits a unit normal into (azimuth, polar) angles: azimuth by atan2 in the
/// x-y plane (0 at the pole by convention), polar from the z axis.
pub fn normal_to_angles(normal: Vec3) -> Result<(f64, f64)> {
    if (normal.norm() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "normal must be unit length, got norm {}",
            normal.norm()
        )));
    }
    let phi = if normal.x.abs() < 1e-12 && normal.y.abs() < 1e-12 {
        0.0
    } else {
        normal.y.atan2(normal.x)
    };
    let theta = normal.z.clamp(-1.0, 1.0).acos();
    Ok((phi, theta))
}

/// Reconstructs the unit normal for (azimuth, polar) angles, polar in [0, pi].
pub fn angles_to_normal(phi: f64, theta: f64) -> Vec3 {
    let (sin_theta, cos_theta) = theta.sin_cos();
    let (sin_phi, cos_phi) = phi.sin_cos();
    Vec3::new(sin_theta * cos_phi, sin_theta * sin_phi, cos_theta)
}

/// Clamps each angle independently into the actuator range.
pub fn clamp_angles(phi: f64, theta: f64, limits: &AngleLimits) -> (f64, f64) {
    (
        phi.clamp(limits.phi_min, limits.phi_max),
        theta.clamp(limits.theta_min, limits.theta_max),
    )
}

/// Specular reflection of direction `d` at a surface with unit normal `n`.
pub fn reflect(d: Vec3, n: Vec3) -> Vec3 {
    d - 2.0 * d.dot(n) * n
}

/// Per-tile orientations produced by the focal-point mapping, after clamping.
#[derive(Clone, Debug)]
pub struct TileOrientations {
    /// (azimuth, polar) per tile, aligned with the layout's tile order.
    pub angles: Vec<(f64, f64)>,
    pub warnings: Vec<TileWarning>,
}

/// Ideal clamped orientation angles for every tile given one focal point per
/// segment. Degenerate tiles (focal at the tile centre or exactly behind it)
/// keep their rest orientation and produce a warning instead of an error.
pub fn focal_tile_angles(
    layout: &ArrayLayout,
    focal_points: &[Vec3],
    source: Vec3,
    limits: &AngleLimits,
) -> Result<TileOrientations> {
    if focal_points.len() != layout.segment_count() {
        return Err(Error::InvalidArgument(format!(
            "expected one focal point per segment ({}), got {}",
            layout.segment_count(),
            focal_points.len()
        )));
    }
    limits.validate()?;
    let rest = layout.rest_angles();
    let mut angles = Vec::with_capacity(layout.tile_count());
    let mut warnings = Vec::new();
    for (idx, tile) in layout.tiles.iter().enumerate() {
        let focal = focal_points[layout.segment_of(idx)];
        let ideal = match bisector_normal(source, tile.position, focal) {
            Ok(normal) => normal_to_angles(normal)
                .expect("bisector output is unit length"),
            Err(err) => {
                warnings.push(TileWarning {
                    tile: idx,
                    message: err.to_string(),
                });
                rest
            }
        };
        angles.push(clamp_angles(ideal.0, ideal.1, limits));
    }
    Ok(TileOrientations { angles, warnings })
}

impl ArrayLayout {
    fn segment_of(&self, tile: usize) -> usize {
        self.segment_of[tile]
    }
}

/// Unit normals for a set of per-tile angles.
pub fn orientations_to_normals(angles: &[(f64, f64)]) -> Vec<Vec3> {
    angles.iter().map(|&(phi, theta)| angles_to_normal(phi, theta)).collect()
}

/// Result of steering the whole array from focal points.
#[derive(Clone, Debug)]
pub struct AppliedNormals {
    pub normals: Vec<Vec3>,
    pub warnings: Vec<TileWarning>,
}

/// Full steering pipeline: bisector orientation per tile, clamped to limits,
/// reconstructed as unit normals.
pub fn apply_focal_points(
    layout: &ArrayLayout,
    focal_points: &[Vec3],
    source: Vec3,
    limits: &AngleLimits,
) -> Result<AppliedNormals> {
    let oriented = focal_tile_angles(layout, focal_points, source, limits)?;
    Ok(AppliedNormals {
        normals: orientations_to_normals(&oriented.angles),
        warnings: oriented.warnings,
    })
}

/// Replaces every tile's azimuth with the circular mean of the azimuths in its
/// layout column, modelling one shared azimuth actuator per column. Polar
/// angles are untouched. Inputs within an azimuth arc narrower than pi yield a
/// mean inside that arc, so clamped inputs stay within limits.
pub fn column_constrain(angles: &[(f64, f64)], layout: &ArrayLayout) -> Vec<(f64, f64)> {
    assert_eq!(
        angles.len(),
        layout.tile_count(),
        "one orientation per tile required"
    );
    let mut sin_sum = vec![0.0f64; layout.cols];
    let mut cos_sum = vec![0.0f64; layout.cols];
    for (tile, &(phi, _)) in layout.tiles.iter().zip(angles) {
        sin_sum[tile.col] += phi.sin();
        cos_sum[tile.col] += phi.cos();
    }
    let mut column_phi = vec![None; layout.cols];
    for col in 0..layout.cols {
        if sin_sum[col].hypot(cos_sum[col]) >= 1e-12 {
            column_phi[col] = Some(sin_sum[col].atan2(cos_sum[col]));
        }
    }
    layout
        .tiles
        .iter()
        .zip(angles)
        .map(|(tile, &(phi, theta))| (column_phi[tile.col].unwrap_or(phi), theta))
        .collect()
}
