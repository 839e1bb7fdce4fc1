//! Scene description files: the TOML schema and the built-in L-shaped room
//! used by the default experiment configuration.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::geometry::Aabb;
use crate::propagation::{CylinderObstacle, Material, Scene, Slab};
use crate::{Error, Result, Vec3};

/// Axis-aligned box in a scene file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxSpec {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

impl BoxSpec {
    pub fn to_aabb(&self) -> Result<Aabb> {
        Aabb::new(Vec3::from_array(self.min), Vec3::from_array(self.max))
    }
}

/// One wall slab in a scene file; `material` names an entry of `[materials]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WallSpec {
    pub name: String,
    pub min: [f64; 3],
    pub max: [f64; 3],
    pub material: String,
}

/// One vertical cylinder obstacle in a scene file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CylinderSpec {
    pub name: String,
    pub center_x: f64,
    pub center_y: f64,
    pub radius: f64,
    pub z_min: f64,
    pub z_max: f64,
    pub material: String,
}

/// Full scene description as stored on disk.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSpec {
    pub name: String,
    pub frequency_hz: f64,
    pub tx_power_mw: f64,
    /// Height receive power is sampled at for heatmaps, metres.
    pub rx_height: f64,
    pub ap_position: [f64; 3],
    pub bounds: BoxSpec,
    pub focal_region: BoxSpec,
    /// Material name to power reflectance in [0, 1].
    pub materials: BTreeMap<String, f64>,
    #[serde(default)]
    pub walls: Vec<WallSpec>,
    #[serde(default)]
    pub cylinders: Vec<CylinderSpec>,
}

impl SceneSpec {
    /// L-shaped room: leg A spans [0,7]x[0,3], leg B spans [0,3]x[0,6.5],
    /// interior height 3 m, 0.2 m wall slabs. The access point sits high in
    /// the far corner of leg A; the partition between the legs shadows the
    /// whole user area in leg B, so coverage there relies on the reflector
    /// mounted across the inner corner.
    pub fn builtin_lshape() -> Self {
        let concrete = "concrete".to_string();
        let plaster = "plasterboard".to_string();
        let mut materials = BTreeMap::new();
        materials.insert("concrete".to_string(), 0.3);
        materials.insert("plasterboard".to_string(), 0.2);
        materials.insert("wood".to_string(), 0.15);
        let wall = |name: &str, min: [f64; 3], max: [f64; 3], material: &String| WallSpec {
            name: name.to_string(),
            min,
            max,
            material: material.clone(),
        };
        SceneSpec {
            name: "lshape".to_string(),
            frequency_hz: 6.0e10,
            tx_power_mw: 1.0,
            rx_height: 1.5,
            ap_position: [6.5, 0.8, 2.5],
            bounds: BoxSpec { min: [-0.2, -0.2, -0.2], max: [7.2, 6.7, 3.2] },
            focal_region: BoxSpec { min: [0.2, 0.6, 0.4], max: [2.9, 6.3, 2.6] },
            materials,
            walls: vec![
                wall("west", [-0.2, -0.2, 0.0], [0.0, 6.7, 3.0], &concrete),
                wall("south", [-0.2, -0.2, 0.0], [7.2, 0.0, 3.0], &concrete),
                wall("east_leg_a", [7.0, -0.2, 0.0], [7.2, 3.2, 3.0], &concrete),
                // Partition between the legs; the opening x < 2.7 connects them.
                wall("north_leg_a", [2.7, 3.0, 0.0], [7.2, 3.2, 3.0], &plaster),
                wall("east_leg_b", [3.0, 3.0, 0.0], [3.2, 6.7, 3.0], &plaster),
                wall("north_leg_b", [-0.2, 6.5, 0.0], [3.2, 6.7, 3.0], &concrete),
                wall("floor", [-0.2, -0.2, -0.2], [7.2, 6.7, 0.0], &concrete),
                wall("ceiling", [-0.2, -0.2, 3.0], [7.2, 6.7, 3.2], &plaster),
            ],
            cylinders: vec![CylinderSpec {
                name: "pillar".to_string(),
                center_x: 0.28,
                center_y: 3.2,
                radius: 0.3,
                z_min: 0.0,
                z_max: 3.0,
                material: "wood".to_string(),
            }],
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text)
            .map_err(|e| Error::InvalidConfiguration(format!("scene file: {e}")))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("scene spec serializes to TOML")
    }

    fn material(&self, name: &str) -> Result<Material> {
        let reflectance = self.materials.get(name).ok_or_else(|| {
            Error::InvalidConfiguration(format!("scene references unknown material {name:?}"))
        })?;
        Material::new(name, *reflectance)
    }

    /// Build the simulation scene, validating geometry and materials.
    pub fn to_scene(&self) -> Result<Scene> {
        let mut walls = Vec::with_capacity(self.walls.len());
        for w in &self.walls {
            walls.push(Slab {
                bounds: Aabb::new(Vec3::from_array(w.min), Vec3::from_array(w.max))?,
                material: self.material(&w.material)?,
            });
        }
        let mut obstacles = Vec::with_capacity(self.cylinders.len());
        for c in &self.cylinders {
            if !(c.radius > 0.0) || !(c.z_max > c.z_min) {
                return Err(Error::InvalidConfiguration(format!(
                    "cylinder {:?} needs positive radius and z extent",
                    c.name
                )));
            }
            obstacles.push(CylinderObstacle {
                center_x: c.center_x,
                center_y: c.center_y,
                radius: c.radius,
                z_min: c.z_min,
                z_max: c.z_max,
                material: self.material(&c.material)?,
            });
        }
        let scene = Scene {
            walls,
            obstacles,
            ap_position: Vec3::from_array(self.ap_position),
            frequency_hz: self.frequency_hz,
            tx_power_mw: self.tx_power_mw,
            rx_height: self.rx_height,
            focal_region: self.focal_region.to_aabb()?,
            bounds: self.bounds.to_aabb()?,
        };
        scene.validate()?;
        Ok(scene)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::propagation::{direct_power_watts, segment_blocked};

    #[test]
    fn builtin_scene_validates() {
        let spec = SceneSpec::builtin_lshape();
        let scene = spec.to_scene().unwrap();
        assert_eq!(scene.walls.len(), 8);
        assert_eq!(scene.obstacles.len(), 1);
        assert!(scene.bounds.contains(scene.ap_position));
    }

    #[test]
    fn partition_shadows_leg_b_but_not_the_reflector() {
        let scene = SceneSpec::builtin_lshape().to_scene().unwrap();
        let ap = scene.ap_position;
        // Every corner of the user area is shadowed from the access point.
        for &(x, y) in &[(0.5, 4.6), (2.5, 4.6), (0.5, 5.9), (2.5, 5.9)] {
            let user = Vec3::new(x, y, 1.5);
            assert!(segment_blocked(ap, user, &scene), "({x},{y}) should be shadowed");
            assert_eq!(direct_power_watts(&scene, user), 0.0);
        }
        // The reflector mounting area near the inner corner sees the AP...
        let tile = Vec3::new(1.3, 1.2, 1.2);
        assert!(!segment_blocked(ap, tile, &scene));
        // ...and sees representative user positions through the opening.
        for &(x, y) in &[(0.6, 4.9), (2.4, 5.3), (1.0, 5.8)] {
            assert!(!segment_blocked(tile, Vec3::new(x, y, 1.5), &scene));
        }
    }

    #[test]
    fn toml_round_trip_preserves_spec() {
        let spec = SceneSpec::builtin_lshape();
        let text = spec.to_toml();
        let back = SceneSpec::from_toml(&text).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn unknown_material_is_rejected() {
        let mut spec = SceneSpec::builtin_lshape();
        spec.walls[0].material = "marble".to_string();
        assert!(spec.to_scene().is_err());
    }
}
