//! Comparison arms: joint single-agent control, column-constrained azimuth
//! control, a static flat reflector, and no reflector at all. Adapters
//! change the control structure only; the physics stays identical.

use crate::environment::{AgentEnv, AgentStep, AngleMode, Env};
use crate::geometry::ArrayLayout;
use crate::propagation::{flat_configuration, rssi, tiles_with_normals, RadiationModel, Scene};
use crate::{Error, Result, Vec3};
use std::fmt;
use std::str::FromStr;

/// Experiment arm identifiers; the strings appear verbatim in configs and
/// log metadata.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BaselineKind {
    BeamFocusingMa,
    BeamFocusingSa,
    ColumnBasedMa,
    Flat,
    None,
}

impl BaselineKind {
    pub const ALL: [BaselineKind; 5] = [
        BaselineKind::BeamFocusingMa,
        BaselineKind::BeamFocusingSa,
        BaselineKind::ColumnBasedMa,
        BaselineKind::Flat,
        BaselineKind::None,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            BaselineKind::BeamFocusingMa => "beam_focusing_ma",
            BaselineKind::BeamFocusingSa => "beam_focusing_sa",
            BaselineKind::ColumnBasedMa => "column_based_ma",
            BaselineKind::Flat => "flat",
            BaselineKind::None => "none",
        }
    }

    /// Whether this arm involves a learned controller.
    pub fn is_trained(&self) -> bool {
        matches!(
            self,
            BaselineKind::BeamFocusingMa
                | BaselineKind::BeamFocusingSa
                | BaselineKind::ColumnBasedMa
        )
    }

    /// Tile-angle mode the environment must run with for this arm.
    pub fn angle_mode(&self) -> AngleMode {
        match self {
            BaselineKind::ColumnBasedMa => AngleMode::ColumnMean,
            _ => AngleMode::Free,
        }
    }
}

impl fmt::Display for BaselineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BaselineKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BaselineKind::ALL
            .iter()
            .copied()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| {
                Error::InvalidConfiguration(format!(
                    "unknown baseline `{s}`; expected one of {}",
                    BaselineKind::ALL.map(|k| k.as_str()).join(", ")
                ))
            })
    }
}

/// Presents the multi-agent environment as a single joint agent: the one
/// agent observes the global state and emits every focal displacement at
/// once. Its reward is twice the global mean receive power, shaped with the
/// same affine map as the per-agent rewards.
#[derive(Clone)]
pub struct SingleAgentAdapter {
    pub inner: Env,
}

impl SingleAgentAdapter {
    pub fn new(inner: Env) -> Self {
        SingleAgentAdapter { inner }
    }

    fn split_joint_action(&self, joint: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        let inner_agents = self.inner.num_agents();
        let inner_dim = self.inner.action_dim();
        if joint.len() != 1 {
            return Err(Error::InvalidArgument(format!(
                "joint adapter takes 1 action vector, got {}",
                joint.len()
            )));
        }
        if joint[0].len() != inner_agents * inner_dim {
            return Err(Error::InvalidArgument(format!(
                "joint action has {} components, want {}",
                joint[0].len(),
                inner_agents * inner_dim
            )));
        }
        Ok(joint[0].chunks(inner_dim).map(|c| c.to_vec()).collect())
    }

    fn wrap_step(&self, step: AgentStep) -> AgentStep {
        let raw = 2.0 * step.mean_rssi;
        let scaled = (raw - self.inner.config.reward_offset) / self.inner.config.reward_scale;
        AgentStep {
            observations: vec![self.inner.global_state()],
            rewards: vec![scaled],
            raw_rewards: vec![raw],
            done: step.done,
            rssi_per_user: step.rssi_per_user,
            mean_rssi: step.mean_rssi,
        }
    }
}

impl AgentEnv for SingleAgentAdapter {
    fn num_agents(&self) -> usize {
        1
    }

    fn obs_dim(&self) -> usize {
        self.inner.state_dim()
    }

    fn action_dim(&self) -> usize {
        self.inner.num_agents() * self.inner.action_dim()
    }

    fn state_dim(&self) -> usize {
        self.inner.state_dim()
    }

    fn reset(&mut self, seed: u64) -> Vec<Vec<f64>> {
        self.inner.reset(seed);
        vec![self.inner.global_state()]
    }

    fn reset_next(&mut self) -> Vec<Vec<f64>> {
        self.inner.reset_next();
        vec![self.inner.global_state()]
    }

    fn step(&mut self, actions: &[Vec<f64>]) -> Result<AgentStep> {
        let split = self.split_joint_action(actions)?;
        let step = self.inner.step(&split)?;
        Ok(self.wrap_step(step))
    }

    fn global_state(&self) -> Vec<f64> {
        self.inner.global_state()
    }
}

/// Receive power per user for the untrained arms: a flat (rest-orientation)
/// reflector or no reflector.
pub fn static_eval(
    kind: BaselineKind,
    scene: &Scene,
    layout: &ArrayLayout,
    radiation: &RadiationModel,
    users: &[Vec3],
) -> Result<Vec<f64>> {
    let tiles = match kind {
        BaselineKind::Flat => tiles_with_normals(layout, &flat_configuration(layout)),
        BaselineKind::None => Vec::new(),
        other => {
            return Err(Error::InvalidArgument(format!(
                "static evaluation handles flat|none, got {other}"
            )))
        }
    };
    Ok(users
        .iter()
        .map(|&u| rssi(scene, &tiles, u, radiation))
        .collect())
}
