//! Cooperative multi-agent control loop: each agent steers one array segment
//! by displacing its focal point, users move stochastically, and rewards mix
//! the global mean receive power with the agent's assigned user.
//!
//! Agents observe noisy (sensed) positions; rewards and reported receive
//! power always come from the true positions. The sensing noise models
//! localization error, not physics.

use crate::geometry::{
    angles_to_normal, column_constrain, focal_tile_angles, reflect, Aabb, AngleLimits,
    ArrayLayout,
};
use crate::propagation::{rssi, tiles_with_normals, RadiationModel, Scene};
use crate::{Error, Result, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Episode and population parameters for the control loop.
#[derive(Clone, Debug)]
pub struct EnvConfig {
    /// Number of controlling agents; must equal the layout's segment count.
    pub num_agents: usize,
    /// Number of served users.
    pub num_users: usize,
    /// Assigned user index per agent.
    pub user_assignment: Vec<usize>,
    /// Per-axis focal displacement bound per step, metres.
    pub delta_max: f64,
    /// Steps per episode.
    pub episode_length: usize,
    /// Users move whenever the step index is a multiple of this.
    pub mobility_period: usize,
    /// Radius of the horizontal patch a user wanders in around home, metres.
    pub mobility_radius: f64,
    /// Region user homes are drawn from and movement is clamped to.
    pub user_region: Aabb,
    /// Per-axis standard deviation of position sensing noise, metres.
    pub noise_sigma: f64,
    /// When set, homes are these fixed positions instead of random draws.
    pub fixed_user_positions: Option<Vec<Vec3>>,
    /// Reward shaping: scaled reward = (raw - offset) / scale.
    pub reward_offset: f64,
    pub reward_scale: f64,
}

impl EnvConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_agents == 0 || self.num_users == 0 {
            return Err(Error::InvalidConfiguration(
                "need at least one agent and one user".into(),
            ));
        }
        if self.user_assignment.len() != self.num_agents {
            return Err(Error::InvalidConfiguration(format!(
                "assignment lists {} agents, config says {}",
                self.user_assignment.len(),
                self.num_agents
            )));
        }
        if let Some(bad) = self.user_assignment.iter().find(|&&k| k >= self.num_users) {
            return Err(Error::InvalidConfiguration(format!(
                "assigned user index {bad} out of range for {} users",
                self.num_users
            )));
        }
        if !(self.delta_max > 0.0) {
            return Err(Error::InvalidConfiguration(format!(
                "delta_max must be positive, got {}",
                self.delta_max
            )));
        }
        if self.episode_length == 0 {
            return Err(Error::InvalidConfiguration("episode_length must be positive".into()));
        }
        if self.mobility_period == 0 {
            return Err(Error::InvalidConfiguration("mobility_period must be positive".into()));
        }
        if !(self.mobility_radius >= 0.0) {
            return Err(Error::InvalidConfiguration("mobility_radius must be >= 0".into()));
        }
        if !(self.noise_sigma >= 0.0) {
            return Err(Error::InvalidConfiguration("noise_sigma must be >= 0".into()));
        }
        if !(self.reward_scale > 0.0) {
            return Err(Error::InvalidConfiguration("reward_scale must be positive".into()));
        }
        if let Some(fixed) = &self.fixed_user_positions {
            if fixed.len() != self.num_users {
                return Err(Error::InvalidConfiguration(format!(
                    "{} fixed user positions for {} users",
                    fixed.len(),
                    self.num_users
                )));
            }
            for p in fixed {
                if !self.user_region.contains(*p) {
                    return Err(Error::InvalidConfiguration(format!(
                        "fixed user position {p:?} outside the user region"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Whether tile azimuths are free per tile or averaged per column.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AngleMode {
    Free,
    ColumnMean,
}

/// Everything one `step` call produces.
#[derive(Clone, Debug)]
pub struct AgentStep {
    pub observations: Vec<Vec<f64>>,
    /// Shaped rewards handed to the learner.
    pub rewards: Vec<f64>,
    /// Unshaped hybrid rewards in dBm terms.
    pub raw_rewards: Vec<f64>,
    pub done: bool,
    pub rssi_per_user: Vec<f64>,
    pub mean_rssi: f64,
}

/// Hybrid reward for one agent: mean receive power over all users plus the
/// agent's assigned user, both in dBm.
pub fn reward(rssi_per_user: &[f64], assignment: &[usize], agent: usize) -> f64 {
    let mean: f64 = rssi_per_user.iter().sum::<f64>() / rssi_per_user.len() as f64;
    mean + rssi_per_user[assignment[agent]]
}

/// Adds independent zero-mean Gaussian noise to every coordinate.
pub fn perturb_positions<R: Rng>(
    positions: &[Vec3],
    sigma: f64,
    rng: &mut R,
) -> Vec<Vec3> {
    positions
        .iter()
        .map(|p| {
            let nx: f64 = rng.sample(StandardNormal);
            let ny: f64 = rng.sample(StandardNormal);
            let nz: f64 = rng.sample(StandardNormal);
            Vec3::new(p.x + sigma * nx, p.y + sigma * ny, p.z + sigma * nz)
        })
        .collect()
}

/// Interface the trainer drives; lets adapters re-shape agent boundaries.
pub trait AgentEnv {
    fn num_agents(&self) -> usize;
    fn obs_dim(&self) -> usize;
    fn action_dim(&self) -> usize;
    fn state_dim(&self) -> usize;
    /// Starts a fresh episode from an explicit seed.
    fn reset(&mut self, seed: u64) -> Vec<Vec<f64>>;
    /// Starts the next episode continuing the internal random stream.
    fn reset_next(&mut self) -> Vec<Vec<f64>>;
    fn step(&mut self, actions: &[Vec<f64>]) -> Result<AgentStep>;
    fn global_state(&self) -> Vec<f64>;
}

/// The reflector-array control environment.
#[derive(Clone)]
pub struct Env {
    pub scene: Scene,
    pub layout: ArrayLayout,
    pub limits: AngleLimits,
    pub radiation: RadiationModel,
    pub config: EnvConfig,
    pub angle_mode: AngleMode,
    mobility_enabled: bool,
    rng: ChaCha8Rng,
    homes: Vec<Vec3>,
    users: Vec<Vec3>,
    sensed: Vec<Vec3>,
    focals: Vec<Vec3>,
    normals: Vec<Vec3>,
    step_index: usize,
}

impl Env {
    pub fn new(
        scene: Scene,
        layout: ArrayLayout,
        limits: AngleLimits,
        radiation: RadiationModel,
        config: EnvConfig,
        angle_mode: AngleMode,
    ) -> Result<Self> {
        scene.validate()?;
        limits.validate()?;
        config.validate()?;
        if layout.segment_count() != config.num_agents {
            return Err(Error::InvalidConfiguration(format!(
                "layout has {} segments but config declares {} agents",
                layout.segment_count(),
                config.num_agents
            )));
        }
        let num_users = config.num_users;
        let num_agents = config.num_agents;
        let tiles = layout.tile_count();
        let mut env = Env {
            scene,
            layout,
            limits,
            radiation,
            config,
            angle_mode,
            mobility_enabled: true,
            rng: ChaCha8Rng::seed_from_u64(0),
            homes: vec![Vec3::ZERO; num_users],
            users: vec![Vec3::ZERO; num_users],
            sensed: vec![Vec3::ZERO; num_users],
            focals: vec![Vec3::ZERO; num_agents],
            normals: vec![Vec3::ZERO; tiles],
            step_index: 0,
        };
        env.begin_episode();
        Ok(env)
    }

    /// Disables or enables the stochastic user motion (diagnostic renders
    /// settle the array against a frozen snapshot).
    pub fn set_mobility_enabled(&mut self, enabled: bool) {
        self.mobility_enabled = enabled;
    }

    pub fn true_user_positions(&self) -> &[Vec3] {
        &self.users
    }

    pub fn sensed_user_positions(&self) -> &[Vec3] {
        &self.sensed
    }

    pub fn focal_points(&self) -> &[Vec3] {
        &self.focals
    }

    pub fn tile_normals(&self) -> &[Vec3] {
        &self.normals
    }

    pub fn step_index(&self) -> usize {
        self.step_index
    }

    /// Receive power per user for the current tile orientation, from true
    /// positions.
    pub fn rssi_per_user(&self) -> Vec<f64> {
        let tiles = tiles_with_normals(&self.layout, &self.normals);
        self.users
            .iter()
            .map(|&u| rssi(&self.scene, &tiles, u, &self.radiation))
            .collect()
    }

    fn uniform_in_box(rng: &mut ChaCha8Rng, region: &Aabb) -> Vec3 {
        let u: f64 = rng.random();
        let v: f64 = rng.random();
        let w: f64 = rng.random();
        Vec3::new(
            region.min.x + u * (region.max.x - region.min.x),
            region.min.y + v * (region.max.y - region.min.y),
            region.min.z + w * (region.max.z - region.min.z),
        )
    }

    /// Initial focal point per segment: the segment centroid pushed along the
    /// rest-orientation specular direction by the distance to the user-region
    /// centre, then confined to the focal region. A neutral, flat-ish start.
    fn initial_focals(&self) -> Vec<Vec3> {
        let goal = self.config.user_region.center();
        (0..self.config.num_agents)
            .map(|l| {
                let c = self.layout.segment_centroid(l);
                let incoming = match (c - self.scene.ap_position).try_normalized() {
                    Some(d) => d,
                    None => return self.scene.focal_region.clamp_point(c),
                };
                let out = reflect(incoming, self.layout.base_plane.normal);
                let reach = (goal - c).norm();
                self.scene.focal_region.clamp_point(c + out * reach)
            })
            .collect()
    }

    fn begin_episode(&mut self) {
        self.homes = match &self.config.fixed_user_positions {
            Some(fixed) => fixed.clone(),
            None => (0..self.config.num_users)
                .map(|_| Self::uniform_in_box(&mut self.rng, &self.config.user_region))
                .collect(),
        };
        self.users = self.homes.clone();
        self.focals = self.initial_focals();
        self.step_index = 0;
        self.refresh_normals();
        self.refresh_sensed();
    }

    fn refresh_normals(&mut self) {
        // Degenerate tiles fall back to rest orientation inside the solver.
        let oriented = focal_tile_angles(
            &self.layout,
            &self.focals,
            self.scene.ap_position,
            &self.limits,
        )
        .expect("focal/tile geometry stays non-coincident inside the scene");
        let angles = match self.angle_mode {
            AngleMode::Free => oriented.angles,
            AngleMode::ColumnMean => column_constrain(&oriented.angles, &self.layout),
        };
        for (n, &(phi, theta)) in self.normals.iter_mut().zip(&angles) {
            *n = angles_to_normal(phi, theta);
        }
    }

    fn refresh_sensed(&mut self) {
        self.sensed = perturb_positions(&self.users, self.config.noise_sigma, &mut self.rng);
    }

    fn move_users(&mut self) {
        for k in 0..self.config.num_users {
            let a: f64 = self.rng.random();
            let b: f64 = self.rng.random();
            let angle = 2.0 * std::f64::consts::PI * a;
            let radius = self.config.mobility_radius * b.sqrt();
            let target = self.homes[k]
                + Vec3::new(radius * angle.cos(), radius * angle.sin(), 0.0);
            self.users[k] = self.config.user_region.clamp_point(target);
        }
    }

    fn normalize(&self, p: Vec3) -> [f64; 3] {
        let b = &self.scene.bounds;
        let axis = |x: f64, lo: f64, hi: f64| {
            if hi - lo < 1e-12 {
                0.0
            } else {
                (2.0 * (x.clamp(lo, hi) - lo) / (hi - lo)) - 1.0
            }
        };
        [
            axis(p.x, b.min.x, b.max.x),
            axis(p.y, b.min.y, b.max.y),
            axis(p.z, b.min.z, b.max.z),
        ]
    }

    fn observation(&self, agent: usize) -> Vec<f64> {
        let user = self.sensed[self.config.user_assignment[agent]];
        let centroid = self.layout.segment_centroid(agent);
        let focal = self.focals[agent];
        let mut out = Vec::with_capacity(9);
        out.extend_from_slice(&self.normalize(user));
        out.extend_from_slice(&self.normalize(centroid));
        out.extend_from_slice(&self.normalize(focal));
        out
    }

    fn observations(&self) -> Vec<Vec<f64>> {
        (0..self.config.num_agents).map(|l| self.observation(l)).collect()
    }
}

impl AgentEnv for Env {
    fn num_agents(&self) -> usize {
        self.config.num_agents
    }

    fn obs_dim(&self) -> usize {
        9
    }

    fn action_dim(&self) -> usize {
        3
    }

    fn state_dim(&self) -> usize {
        3 * self.config.num_users + 6 * self.config.num_agents
    }

    fn reset(&mut self, seed: u64) -> Vec<Vec<f64>> {
        self.rng = ChaCha8Rng::seed_from_u64(seed);
        self.begin_episode();
        self.observations()
    }

    fn reset_next(&mut self) -> Vec<Vec<f64>> {
        self.begin_episode();
        self.observations()
    }

    fn step(&mut self, actions: &[Vec<f64>]) -> Result<AgentStep> {
        if actions.len() != self.config.num_agents {
            return Err(Error::InvalidArgument(format!(
                "{} actions for {} agents",
                actions.len(),
                self.config.num_agents
            )));
        }
        for (l, action) in actions.iter().enumerate() {
            if action.len() != 3 {
                return Err(Error::InvalidArgument(format!(
                    "action for agent {l} has {} components, want 3",
                    action.len()
                )));
            }
            if !action.iter().all(|a| a.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "action for agent {l} contains non-finite components"
                )));
            }
            let d = self.config.delta_max;
            let shift = Vec3::new(
                action[0].clamp(-d, d),
                action[1].clamp(-d, d),
                action[2].clamp(-d, d),
            );
            self.focals[l] = self.scene.focal_region.clamp_point(self.focals[l] + shift);
        }
        self.refresh_normals();
        self.step_index += 1;
        if self.mobility_enabled && self.step_index % self.config.mobility_period == 0 {
            self.move_users();
        }
        let rssi_per_user = self.rssi_per_user();
        let mean_rssi =
            rssi_per_user.iter().sum::<f64>() / rssi_per_user.len() as f64;
        let raw_rewards: Vec<f64> = (0..self.config.num_agents)
            .map(|l| reward(&rssi_per_user, &self.config.user_assignment, l))
            .collect();
        let rewards: Vec<f64> = raw_rewards
            .iter()
            .map(|r| (r - self.config.reward_offset) / self.config.reward_scale)
            .collect();
        self.refresh_sensed();
        Ok(AgentStep {
            observations: self.observations(),
            rewards,
            raw_rewards,
            done: self.step_index >= self.config.episode_length,
            rssi_per_user,
            mean_rssi,
        })
    }

    fn global_state(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.state_dim());
        for &u in &self.sensed {
            out.extend_from_slice(&self.normalize(u));
        }
        for &f in &self.focals {
            out.extend_from_slice(&self.normalize(f));
        }
        for l in 0..self.config.num_agents {
            out.extend_from_slice(&self.normalize(self.layout.segment_centroid(l)));
        }
        out
    }
}
