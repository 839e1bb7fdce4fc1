//! Experiment configuration: TOML schema, built-in defaults, and builders
//! that turn a configuration into simulator components.

use std::f64::consts::{FRAC_PI_3, FRAC_PI_4, FRAC_PI_6, PI};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::environment::{AngleMode, Env, EnvConfig};
use crate::geometry::{Aabb, AngleLimits, ArrayLayout, BasePlane};
use crate::harness::scene::SceneSpec;
use crate::marl::PpoHyper;
use crate::propagation::{RadiationModel, Scene};
use crate::{Error, Result, Vec3};

/// Reflector array placement and segmentation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArraySection {
    pub rows: usize,
    pub cols: usize,
    /// Centre-to-centre tile spacing, metres.
    pub pitch: f64,
    pub origin: [f64; 3],
    pub u: [f64; 3],
    pub v: [f64; 3],
    pub normal: [f64; 3],
    /// Number of column segments; each segment is one controlled agent.
    pub segments: usize,
}

impl Default for ArraySection {
    fn default() -> Self {
        // Mounted across the inner corner of the L-shaped room at 45 degrees:
        // rows run along the wall diagonal (u horizontal), columns stack up
        // (v = z), so each column is a horizontal rail sharing one azimuth
        // drive under the column-constrained mode.
        let s = std::f64::consts::SQRT_2 / 2.0;
        ArraySection {
            rows: 6,
            cols: 12,
            pitch: 0.22,
            origin: [0.8, 1.7, 0.4],
            u: [s, -s, 0.0],
            v: [0.0, 0.0, 1.0],
            normal: [s, s, 0.0],
            segments: 3,
        }
    }
}

/// Mechanical steering range of each tile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AngleSection {
    pub phi_min: f64,
    pub phi_max: f64,
    pub theta_min: f64,
    pub theta_max: f64,
}

impl Default for AngleSection {
    fn default() -> Self {
        // Azimuth swings a third of a turn around the rest direction (pi/4
        // for the default corner mount); elevation stays off the poles.
        AngleSection {
            phi_min: FRAC_PI_4 - FRAC_PI_3,
            phi_max: FRAC_PI_4 + FRAC_PI_3,
            theta_min: FRAC_PI_6,
            theta_max: 5.0 * PI / 6.0,
        }
    }
}

/// Environment dynamics: users, mobility, sensing noise, reward shaping.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvSection {
    pub num_users: usize,
    /// Segment index to user index.
    pub assignment: Vec<usize>,
    /// Per-axis focal-point move limit per step, metres.
    pub delta_max: f64,
    pub episode_length: usize,
    /// Steps per evaluation run.
    pub eval_steps: usize,
    /// Users move every this many steps.
    pub mobility_period: usize,
    /// Mobility patch radius around each user's home, metres.
    pub mobility_radius: f64,
    /// Std-dev of position sensing noise during training, metres.
    pub noise_sigma_train: f64,
    /// Sensing-noise levels swept at evaluation time, metres.
    pub noise_sigma_eval: Vec<f64>,
    pub user_region_min: [f64; 3],
    pub user_region_max: [f64; 3],
    /// Fixed user homes used for evaluation and heatmaps.
    pub eval_users: Vec<[f64; 3]>,
    /// Reward shaping: scaled = (raw_dbm - offset) / scale.
    pub reward_offset_dbm: f64,
    pub reward_scale_db: f64,
}

impl Default for EnvSection {
    fn default() -> Self {
        EnvSection {
            num_users: 3,
            assignment: vec![0, 1, 2],
            delta_max: 0.75,
            episode_length: 100,
            eval_steps: 300,
            mobility_period: 4,
            mobility_radius: 1.5,
            noise_sigma_train: 0.0,
            noise_sigma_eval: vec![0.0, 0.1, 0.3, 0.5, 1.0],
            user_region_min: [0.5, 4.6, 1.5],
            user_region_max: [2.5, 5.9, 1.5],
            eval_users: vec![[0.6, 4.9, 1.5], [2.4, 5.3, 1.5], [1.0, 5.8, 1.5]],
            reward_offset_dbm: -160.0,
            reward_scale_db: 4.0,
        }
    }
}

/// Tile re-radiation model parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadiationSection {
    pub lobe_exponent: f64,
    pub tile_reflectivity: f64,
    pub noise_floor_dbm: f64,
}

impl Default for RadiationSection {
    fn default() -> Self {
        let d = RadiationModel::default();
        RadiationSection {
            lobe_exponent: d.lobe_exponent,
            tile_reflectivity: d.tile_reflectivity,
            noise_floor_dbm: d.noise_floor_dbm,
        }
    }
}

/// Optimiser and policy hyper-parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PpoSection {
    pub lr: f64,
    pub gamma: f64,
    pub gae_lambda: f64,
    pub clip_eps: f64,
    pub value_coef: f64,
    pub entropy_coef: f64,
    pub rollout_size: usize,
    pub minibatch: usize,
    pub epochs_per_update: usize,
    pub episodes: usize,
    pub hidden: Vec<usize>,
    pub init_log_std: f64,
    /// Evaluation snapshot every this many episodes during training.
    pub snapshot_interval: usize,
    pub snapshot_steps: usize,
}

impl Default for PpoSection {
    fn default() -> Self {
        let h = PpoHyper::default();
        PpoSection {
            lr: h.lr,
            gamma: h.gamma,
            gae_lambda: h.gae_lambda,
            clip_eps: h.clip_eps,
            value_coef: h.value_coef,
            entropy_coef: h.entropy_coef,
            rollout_size: h.rollout_size,
            minibatch: h.minibatch,
            epochs_per_update: h.epochs_per_update,
            episodes: h.episodes,
            hidden: vec![256, 256],
            // Initial action std is a quarter of the per-step move limit.
            init_log_std: (0.25 * 0.75f64).ln(),
            snapshot_interval: 50,
            snapshot_steps: 100,
        }
    }
}

/// What to run by default: algorithm arm and seeds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub algo: String,
    pub seeds: Vec<u64>,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection { algo: "beam_focusing_ma".to_string(), seeds: vec![101, 102, 103] }
    }
}

/// Top-level experiment configuration as stored on disk.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Path to a scene file, relative to this configuration file.
    /// Absent means the built-in L-shaped room.
    pub scene_file: Option<String>,
    pub array: ArraySection,
    pub angles: AngleSection,
    pub env: EnvSection,
    pub radiation: RadiationSection,
    pub ppo: PpoSection,
    pub run: RunSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            scene_file: None,
            array: ArraySection::default(),
            angles: AngleSection::default(),
            env: EnvSection::default(),
            radiation: RadiationSection::default(),
            ppo: PpoSection::default(),
            run: RunSection::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text)
            .map_err(|e| Error::InvalidConfiguration(format!("config file: {e}")))
    }
}

/// Named training budgets.
pub fn apply_profile(config: &mut ExperimentConfig, profile: &str) -> Result<()> {
    match profile {
        "desk" => config.ppo.episodes = 300,
        "paper" => config.ppo.episodes = 3000,
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown profile {other:?}, expected desk|paper"
            )))
        }
    }
    Ok(())
}

/// A configuration together with its resolved scene, validated.
#[derive(Clone, Debug, PartialEq)]
pub struct ResolvedConfig {
    pub experiment: ExperimentConfig,
    pub scene_spec: SceneSpec,
}

/// Serialized form of a resolved configuration: one self-contained document
/// with the scene inlined, used for run snapshots and hashing.
#[derive(Serialize)]
struct SnapshotOut<'a> {
    experiment: &'a ExperimentConfig,
    scene: &'a SceneSpec,
}

#[derive(Deserialize)]
struct SnapshotIn {
    experiment: ExperimentConfig,
    scene: SceneSpec,
}

impl ResolvedConfig {
    /// Load from a configuration file, or the built-in defaults when no path
    /// is given. The scene file is resolved relative to the config file.
    pub fn load(path: Option<&Path>) -> Result<ResolvedConfig> {
        match path {
            None => ResolvedConfig::from_parts(ExperimentConfig::default(), None),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| {
                    Error::InvalidConfiguration(format!("reading {}: {e}", p.display()))
                })?;
                let experiment = ExperimentConfig::from_toml(&text)?;
                let scene_spec = match &experiment.scene_file {
                    None => None,
                    Some(rel) => {
                        let base = p.parent().unwrap_or_else(|| Path::new("."));
                        let sp = base.join(rel);
                        let stext = std::fs::read_to_string(&sp).map_err(|e| {
                            Error::InvalidConfiguration(format!(
                                "reading scene {}: {e}",
                                sp.display()
                            ))
                        })?;
                        Some(SceneSpec::from_toml(&stext)?)
                    }
                };
                ResolvedConfig::from_parts(experiment, scene_spec)
            }
        }
    }

    /// Re-load a configuration previously written by `snapshot_toml`.
    pub fn from_snapshot(text: &str) -> Result<ResolvedConfig> {
        let snap: SnapshotIn = toml::from_str(text)
            .map_err(|e| Error::InvalidConfiguration(format!("config snapshot: {e}")))?;
        ResolvedConfig::from_parts(snap.experiment, Some(snap.scene))
    }

    pub fn from_parts(
        experiment: ExperimentConfig,
        scene_spec: Option<SceneSpec>,
    ) -> Result<ResolvedConfig> {
        let scene_spec = scene_spec.unwrap_or_else(SceneSpec::builtin_lshape);
        let cfg = ResolvedConfig { experiment, scene_spec };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Self-contained snapshot with the scene inlined; hashing this pins the
    /// full experiment definition.
    pub fn snapshot_toml(&self) -> String {
        let snap = SnapshotOut { experiment: &self.experiment, scene: &self.scene_spec };
        toml::to_string_pretty(&snap).expect("config serializes to TOML")
    }

    fn validate(&self) -> Result<()> {
        self.scene()?;
        self.layout()?;
        self.limits()?;
        let r = &self.experiment.radiation;
        if !(r.lobe_exponent > 0.0) || !(0.0..=1.0).contains(&r.tile_reflectivity) {
            return Err(Error::InvalidConfiguration(
                "radiation needs positive lobe_exponent and reflectivity in [0, 1]".into(),
            ));
        }
        self.hyper().validate()?;
        let e = &self.experiment.env;
        if e.num_users == 0 {
            return Err(Error::InvalidConfiguration("num_users must be positive".into()));
        }
        if e.assignment.len() != self.experiment.array.segments {
            return Err(Error::InvalidConfiguration(format!(
                "assignment has {} entries for {} segments",
                e.assignment.len(),
                self.experiment.array.segments
            )));
        }
        if let Some(&bad) = e.assignment.iter().find(|&&u| u >= e.num_users) {
            return Err(Error::InvalidConfiguration(format!(
                "assignment references user {bad} but num_users is {}",
                e.num_users
            )));
        }
        if !(e.delta_max > 0.0) {
            return Err(Error::InvalidConfiguration("delta_max must be positive".into()));
        }
        if e.episode_length == 0 || e.eval_steps == 0 || e.mobility_period == 0 {
            return Err(Error::InvalidConfiguration(
                "episode_length, eval_steps and mobility_period must be positive".into(),
            ));
        }
        if e.eval_users.len() != e.num_users {
            return Err(Error::InvalidConfiguration(format!(
                "eval_users lists {} positions for {} users",
                e.eval_users.len(),
                e.num_users
            )));
        }
        if e.noise_sigma_train < 0.0 || e.noise_sigma_eval.iter().any(|&s| s < 0.0) {
            return Err(Error::InvalidConfiguration("noise sigma must be non-negative".into()));
        }
        if !(e.reward_scale_db > 0.0) {
            return Err(Error::InvalidConfiguration("reward_scale_db must be positive".into()));
        }
        self.user_region()?;
        if self.experiment.ppo.hidden.is_empty() {
            return Err(Error::InvalidConfiguration(
                "policy needs at least one hidden layer".into(),
            ));
        }
        self.experiment.run.algo.parse::<crate::baselines::BaselineKind>()?;
        if self.experiment.run.seeds.is_empty() {
            return Err(Error::InvalidConfiguration("run.seeds must not be empty".into()));
        }
        Ok(())
    }

    pub fn scene(&self) -> Result<Scene> {
        self.scene_spec.to_scene()
    }

    pub fn layout(&self) -> Result<ArrayLayout> {
        let a = &self.experiment.array;
        let plane = BasePlane::new(
            Vec3::from_array(a.origin),
            Vec3::from_array(a.u),
            Vec3::from_array(a.v),
            Vec3::from_array(a.normal),
        )?;
        ArrayLayout::hex(a.rows, a.cols, a.pitch, plane)?.with_column_segments(a.segments)
    }

    pub fn limits(&self) -> Result<AngleLimits> {
        let a = &self.experiment.angles;
        AngleLimits::new(a.phi_min, a.phi_max, a.theta_min, a.theta_max)
    }

    pub fn radiation(&self) -> RadiationModel {
        let r = &self.experiment.radiation;
        RadiationModel {
            lobe_exponent: r.lobe_exponent,
            tile_reflectivity: r.tile_reflectivity,
            noise_floor_dbm: r.noise_floor_dbm,
        }
    }

    pub fn user_region(&self) -> Result<Aabb> {
        let e = &self.experiment.env;
        Aabb::new(Vec3::from_array(e.user_region_min), Vec3::from_array(e.user_region_max))
    }

    pub fn eval_user_positions(&self) -> Vec<Vec3> {
        self.experiment.env.eval_users.iter().map(|&p| Vec3::from_array(p)).collect()
    }

    pub fn hyper(&self) -> PpoHyper {
        let p = &self.experiment.ppo;
        PpoHyper {
            lr: p.lr,
            gamma: p.gamma,
            gae_lambda: p.gae_lambda,
            clip_eps: p.clip_eps,
            value_coef: p.value_coef,
            entropy_coef: p.entropy_coef,
            rollout_size: p.rollout_size,
            minibatch: p.minibatch,
            epochs_per_update: p.epochs_per_update,
            episodes: p.episodes,
        }
    }

    /// Environment parameters for one run. `fixed_users` pins user homes
    /// (evaluation, heatmaps); `None` draws homes per reset (training).
    pub fn env_config(
        &self,
        episode_length: usize,
        noise_sigma: f64,
        fixed_users: Option<Vec<Vec3>>,
    ) -> Result<EnvConfig> {
        let e = &self.experiment.env;
        Ok(EnvConfig {
            num_agents: self.experiment.array.segments,
            num_users: e.num_users,
            user_assignment: e.assignment.clone(),
            delta_max: e.delta_max,
            episode_length,
            mobility_period: e.mobility_period,
            mobility_radius: e.mobility_radius,
            user_region: self.user_region()?,
            noise_sigma,
            fixed_user_positions: fixed_users,
            reward_offset: e.reward_offset_dbm,
            reward_scale: e.reward_scale_db,
        })
    }

    /// Build a fresh environment.
    pub fn make_env(&self, config: EnvConfig, angle_mode: AngleMode) -> Result<Env> {
        Env::new(
            self.scene()?,
            self.layout()?,
            self.limits()?,
            self.radiation(),
            config,
            angle_mode,
        )
    }
}
