//! Proximal policy optimization with centralized training and decentralized
//! execution: per-agent actors sample from local observations, one shared
//! critic scores the global state, and updates use the clipped surrogate
//! with generalized advantage estimation.

use crate::environment::{AgentEnv, AgentStep};
use crate::neural::{serialize, Adam, DenseNet, GaussianPolicy};
use crate::{Error, Result};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Hidden widths shared by actors and the critic.
pub const DEFAULT_HIDDEN: [usize; 2] = [256, 256];

/// Magic header of the checkpoint text format.
pub const CHECKPOINT_MAGIC: &str = "reflectsim-ckpt";
pub const CHECKPOINT_VERSION: &str = "v1";

/// Optimization hyperparameters.
#[derive(Clone, Debug)]
pub struct PpoHyper {
    pub lr: f64,
    pub gamma: f64,
    pub gae_lambda: f64,
    pub clip_eps: f64,
    pub value_coef: f64,
    pub entropy_coef: f64,
    /// Transitions gathered between updates.
    pub rollout_size: usize,
    pub minibatch: usize,
    pub epochs_per_update: usize,
    /// Episode budget for a full training run.
    pub episodes: usize,
}

impl Default for PpoHyper {
    fn default() -> Self {
        PpoHyper {
            lr: 2.0e-4,
            gamma: 0.985,
            gae_lambda: 0.9,
            clip_eps: 0.2,
            value_coef: 0.5,
            entropy_coef: 1.0e-4,
            rollout_size: 1000,
            minibatch: 200,
            epochs_per_update: 10,
            episodes: 3000,
        }
    }
}

impl PpoHyper {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::InvalidConfiguration(format!(
                "gamma must lie in (0, 1), got {}",
                self.gamma
            )));
        }
        if !(self.gae_lambda > 0.0 && self.gae_lambda <= 1.0) {
            return Err(Error::InvalidConfiguration(format!(
                "gae_lambda must lie in (0, 1], got {}",
                self.gae_lambda
            )));
        }
        if !(self.clip_eps > 0.0) {
            return Err(Error::InvalidConfiguration("clip_eps must be positive".into()));
        }
        if !(self.lr > 0.0) {
            return Err(Error::InvalidConfiguration("lr must be positive".into()));
        }
        if self.minibatch == 0 || self.minibatch > self.rollout_size {
            return Err(Error::InvalidConfiguration(format!(
                "minibatch {} must be in [1, rollout_size {}]",
                self.minibatch, self.rollout_size
            )));
        }
        if self.epochs_per_update == 0 {
            return Err(Error::InvalidConfiguration("epochs_per_update must be positive".into()));
        }
        Ok(())
    }
}

/// Generalized advantage estimation with termination masking.
///
/// `values` holds one estimate per transition; `bootstrap_value` stands in
/// for the state after the final transition when the rollout was truncated
/// mid-episode.
pub fn gae(
    rewards: &[f64],
    values: &[f64],
    dones: &[bool],
    bootstrap_value: f64,
    gamma: f64,
    lambda: f64,
) -> (Vec<f64>, Vec<f64>) {
    assert_eq!(rewards.len(), values.len(), "one value per reward");
    assert_eq!(rewards.len(), dones.len(), "one done flag per reward");
    let t_max = rewards.len();
    let mut advantages = vec![0.0; t_max];
    let mut carry = 0.0;
    for t in (0..t_max).rev() {
        let next_value = if t + 1 < t_max { values[t + 1] } else { bootstrap_value };
        let mask = if dones[t] { 0.0 } else { 1.0 };
        let delta = rewards[t] + gamma * next_value * mask - values[t];
        carry = delta + gamma * lambda * mask * carry;
        advantages[t] = carry;
    }
    let returns = advantages.iter().zip(values).map(|(a, v)| a + v).collect();
    (advantages, returns)
}

/// On-policy transition store for one update cycle.
#[derive(Clone, Debug)]
pub struct RolloutBuffer {
    pub num_agents: usize,
    /// Indexed `[agent][step]`.
    pub observations: Vec<Vec<Vec<f64>>>,
    pub actions: Vec<Vec<Vec<f64>>>,
    pub log_probs: Vec<Vec<f64>>,
    pub rewards: Vec<Vec<f64>>,
    /// Indexed `[step]`; shared across agents.
    pub states: Vec<Vec<f64>>,
    pub values: Vec<f64>,
    pub dones: Vec<bool>,
    pub bootstrap_value: f64,
    pub advantages: Vec<Vec<f64>>,
    pub returns: Vec<Vec<f64>>,
    /// Per-step mean of the agents' returns; the critic's regression target.
    pub mean_returns: Vec<f64>,
    prepared: bool,
}

impl RolloutBuffer {
    fn with_capacity(num_agents: usize, horizon: usize) -> Self {
        RolloutBuffer {
            num_agents,
            observations: vec![Vec::with_capacity(horizon); num_agents],
            actions: vec![Vec::with_capacity(horizon); num_agents],
            log_probs: vec![Vec::with_capacity(horizon); num_agents],
            rewards: vec![Vec::with_capacity(horizon); num_agents],
            states: Vec::with_capacity(horizon),
            values: Vec::with_capacity(horizon),
            dones: Vec::with_capacity(horizon),
            bootstrap_value: 0.0,
            advantages: vec![Vec::new(); num_agents],
            returns: vec![Vec::new(); num_agents],
            mean_returns: Vec::new(),
            prepared: false,
        }
    }

    pub fn len(&self) -> usize {
        self.dones.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dones.is_empty()
    }

    pub fn is_prepared(&self) -> bool {
        self.prepared
    }

    /// Computes advantages and returns, then normalizes each agent's
    /// advantages to zero mean and unit spread over the rollout.
    pub fn prepare(&mut self, gamma: f64, lambda: f64) {
        let t_max = self.len();
        self.mean_returns = vec![0.0; t_max];
        for agent in 0..self.num_agents {
            let (adv, ret) = gae(
                &self.rewards[agent],
                &self.values,
                &self.dones,
                self.bootstrap_value,
                gamma,
                lambda,
            );
            for (acc, r) in self.mean_returns.iter_mut().zip(&ret) {
                *acc += r / self.num_agents as f64;
            }
            self.advantages[agent] = adv;
            self.returns[agent] = ret;
        }
        for adv in &mut self.advantages {
            let n = adv.len() as f64;
            let mean = adv.iter().sum::<f64>() / n;
            let var = adv.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / n;
            let std = var.sqrt();
            for a in adv.iter_mut() {
                *a = (*a - mean) / (std + 1e-8);
            }
        }
        self.prepared = true;
    }
}

/// Loss and diagnostic statistics from one update cycle, evaluated on each
/// minibatch before its optimizer step.
#[derive(Clone, Debug)]
pub struct UpdateStats {
    pub actor_loss: Vec<f64>,
    pub critic_loss: f64,
    pub approx_kl: Vec<f64>,
    pub clip_fraction: Vec<f64>,
    /// Mean critic loss per epoch, for descent monitoring.
    pub critic_loss_per_epoch: Vec<f64>,
}

/// One completed episode's cumulative shaped reward per agent.
#[derive(Clone, Debug)]
pub struct EpisodeReward {
    pub episode: u64,
    pub cumulative: Vec<f64>,
}

/// Per-(episode, agent) training log entry.
#[derive(Clone, Debug)]
pub struct TrainRow {
    pub episode: u64,
    pub agent: usize,
    pub cumulative_reward: f64,
    pub actor_loss: f64,
    pub critic_loss: f64,
}

/// Periodic greedy-policy probe during training.
#[derive(Clone, Debug)]
pub struct Snapshot {
    pub episode: u64,
    pub mean_rssi_dbm: f64,
}

#[derive(Clone, Debug, Default)]
pub struct TrainingLog {
    pub rows: Vec<TrainRow>,
    pub snapshots: Vec<Snapshot>,
}

/// One evaluation step's receive power record.
#[derive(Clone, Debug)]
pub struct EvalRow {
    pub step: usize,
    pub rssi_per_user: Vec<f64>,
    pub mean_rssi_dbm: f64,
}

#[derive(Clone, Debug)]
pub struct EvalLog {
    pub rows: Vec<EvalRow>,
    /// Mean over steps of the per-step user mean, dBm.
    pub mean_rssi_dbm: f64,
    /// Mean shaped reward per step and agent.
    pub mean_scaled_reward: f64,
}

/// Network shapes the trainer binds to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NetDims {
    pub num_agents: usize,
    pub obs_dim: usize,
    pub action_dim: usize,
    pub state_dim: usize,
}

impl NetDims {
    pub fn of_env<E: AgentEnv + ?Sized>(env: &E) -> Self {
        NetDims {
            num_agents: env.num_agents(),
            obs_dim: env.obs_dim(),
            action_dim: env.action_dim(),
            state_dim: env.state_dim(),
        }
    }
}

/// Fixed seed evaluation probes use inside the training loop.
const SNAPSHOT_EVAL_SEED: u64 = 0x5EED_0EA1;

/// Actors, critic, optimizers, and the sampling stream.
pub struct Trainer {
    pub algo: String,
    pub hyper: PpoHyper,
    pub dims: NetDims,
    pub actors: Vec<GaussianPolicy>,
    pub actor_opts: Vec<Adam>,
    pub log_std_opts: Vec<Adam>,
    pub critic: DenseNet,
    pub critic_opt: Adam,
    pub episodes_trained: u64,
    pub seed: u64,
    rng: ChaCha8Rng,
    pending_obs: Option<Vec<Vec<f64>>>,
}

impl Trainer {
    pub fn new(
        algo: &str,
        dims: NetDims,
        hidden: &[usize],
        init_log_std: f64,
        hyper: PpoHyper,
        seed: u64,
    ) -> Result<Self> {
        hyper.validate()?;
        if dims.num_agents == 0 {
            return Err(Error::InvalidConfiguration("trainer needs at least one agent".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut actor_dims = vec![dims.obs_dim];
        actor_dims.extend_from_slice(hidden);
        actor_dims.push(dims.action_dim);
        let mut critic_dims = vec![dims.state_dim];
        critic_dims.extend_from_slice(hidden);
        critic_dims.push(1);

        let mut actors = Vec::with_capacity(dims.num_agents);
        let mut actor_opts = Vec::with_capacity(dims.num_agents);
        let mut log_std_opts = Vec::with_capacity(dims.num_agents);
        for _ in 0..dims.num_agents {
            let mut net = DenseNet::new(&actor_dims)?;
            net.init_scaled_uniform(&mut rng, 2.0f64.sqrt(), 0.01);
            let policy = GaussianPolicy::new(net, init_log_std)?;
            actor_opts.push(Adam::new(hyper.lr, policy.net.param_count()));
            log_std_opts.push(Adam::new(hyper.lr, dims.action_dim));
            actors.push(policy);
        }
        let mut critic = DenseNet::new(&critic_dims)?;
        critic.init_scaled_uniform(&mut rng, 2.0f64.sqrt(), 1.0);
        let critic_opt = Adam::new(hyper.lr, critic.param_count());

        Ok(Trainer {
            algo: algo.to_string(),
            hyper,
            dims,
            actors,
            actor_opts,
            log_std_opts,
            critic,
            critic_opt,
            episodes_trained: 0,
            seed,
            rng,
            pending_obs: None,
        })
    }

    /// Confirms the environment's shapes match these networks.
    pub fn check_env<E: AgentEnv + ?Sized>(&self, env: &E) -> Result<()> {
        let env_dims = NetDims::of_env(env);
        if env_dims != self.dims {
            return Err(Error::IncompatibleCheckpoint(format!(
                "checkpoint dims {:?} do not match environment dims {:?}",
                self.dims, env_dims
            )));
        }
        Ok(())
    }

    fn critic_value(&self, state: &[f64]) -> Result<f64> {
        Ok(self.critic.forward(state)?[0])
    }

    /// Gathers `horizon` on-policy transitions, resetting the environment at
    /// episode boundaries, and reports episodes completed along the way.
    pub fn collect<E: AgentEnv + ?Sized>(
        &mut self,
        env: &mut E,
        horizon: usize,
    ) -> Result<(RolloutBuffer, Vec<EpisodeReward>)> {
        self.check_env(env)?;
        let num_agents = self.dims.num_agents;
        let mut buffer = RolloutBuffer::with_capacity(num_agents, horizon);
        let mut completed = Vec::new();
        let mut episode_acc = vec![0.0; num_agents];
        let mut obs = match self.pending_obs.take() {
            Some(o) => o,
            None => env.reset_next(),
        };
        for _ in 0..horizon {
            let state = env.global_state();
            let value = self.critic_value(&state)?;
            let mut actions = Vec::with_capacity(num_agents);
            let mut log_probs = Vec::with_capacity(num_agents);
            for agent in 0..num_agents {
                let sample = self.actors[agent].sample(&obs[agent], &mut self.rng)?;
                actions.push(sample.action);
                log_probs.push(sample.log_prob);
            }
            let step: AgentStep = env.step(&actions)?;
            for agent in 0..num_agents {
                buffer.observations[agent].push(std::mem::take(&mut obs[agent]));
                buffer.actions[agent].push(actions[agent].clone());
                buffer.log_probs[agent].push(log_probs[agent]);
                buffer.rewards[agent].push(step.rewards[agent]);
                episode_acc[agent] += step.rewards[agent];
            }
            buffer.states.push(state);
            buffer.values.push(value);
            buffer.dones.push(step.done);
            if step.done {
                self.episodes_trained += 1;
                completed.push(EpisodeReward {
                    episode: self.episodes_trained,
                    cumulative: std::mem::replace(&mut episode_acc, vec![0.0; num_agents]),
                });
                obs = env.reset_next();
            } else {
                obs = step.observations;
            }
        }
        buffer.bootstrap_value = if *buffer.dones.last().unwrap_or(&true) {
            0.0
        } else {
            self.critic_value(&env.global_state())?
        };
        self.pending_obs = Some(obs);
        Ok((buffer, completed))
    }

    /// Gradient factor of `min(ratio·adv, clip(ratio)·adv)` with respect to
    /// the ratio: zero whenever the clipped branch is active.
    fn surrogate_grad_factor(ratio: f64, adv: f64, eps: f64) -> f64 {
        if (adv >= 0.0 && ratio >= 1.0 + eps) || (adv < 0.0 && ratio <= 1.0 - eps) {
            0.0
        } else {
            adv
        }
    }

    /// Runs the clipped-surrogate update over the prepared buffer.
    pub fn ppo_update(&mut self, buffer: &RolloutBuffer) -> Result<UpdateStats> {
        if !buffer.is_prepared() {
            return Err(Error::ContractViolation(
                "rollout buffer must be prepared before the update".into(),
            ));
        }
        if buffer.num_agents != self.dims.num_agents {
            return Err(Error::InvalidArgument(
                "buffer agent count does not match trainer".into(),
            ));
        }
        let t_max = buffer.len();
        let num_agents = self.dims.num_agents;
        let eps = self.hyper.clip_eps;

        let mut actor_loss_acc = vec![0.0; num_agents];
        let mut kl_acc = vec![0.0; num_agents];
        let mut clip_acc = vec![0.0; num_agents];
        let mut critic_loss_acc = 0.0;
        let mut passes = 0usize;
        let mut critic_loss_per_epoch = Vec::with_capacity(self.hyper.epochs_per_update);

        let mut indices: Vec<usize> = (0..t_max).collect();
        let mut actor_grads: Vec<Vec<f64>> = self
            .actors
            .iter()
            .map(|a| vec![0.0; a.net.param_count()])
            .collect();
        let mut log_std_grads: Vec<Vec<f64>> =
            vec![vec![0.0; self.dims.action_dim]; num_agents];
        let mut critic_grads = vec![0.0; self.critic.param_count()];

        for _ in 0..self.hyper.epochs_per_update {
            indices.shuffle(&mut self.rng);
            let mut epoch_critic_loss = 0.0;
            let mut epoch_batches = 0usize;
            for batch in indices.chunks(self.hyper.minibatch) {
                let batch_n = batch.len() as f64;
                // Actors: clipped surrogate plus entropy bonus.
                for agent in 0..num_agents {
                    let grads = &mut actor_grads[agent];
                    grads.iter_mut().for_each(|g| *g = 0.0);
                    let ls_grads = &mut log_std_grads[agent];
                    ls_grads.iter_mut().for_each(|g| *g = 0.0);
                    let mut surrogate = 0.0;
                    let mut kl = 0.0;
                    let mut clipped = 0usize;
                    for &i in batch {
                        let obs = &buffer.observations[agent][i];
                        let action = &buffer.actions[agent][i];
                        let adv = buffer.advantages[agent][i];
                        let trace = self.actors[agent].net.forward_trace(obs)?;
                        let mean = trace.output().to_vec();
                        let log_prob = self.actors[agent].log_prob(&mean, action);
                        let diff =
                            (log_prob - buffer.log_probs[agent][i]).clamp(-20.0, 20.0);
                        let ratio = diff.exp();
                        let clipped_ratio = ratio.clamp(1.0 - eps, 1.0 + eps);
                        surrogate += (ratio * adv).min(clipped_ratio * adv);
                        kl += ratio - 1.0 - diff;
                        if (ratio - clipped_ratio).abs() > 0.0 {
                            clipped += 1;
                        }
                        let factor = Self::surrogate_grad_factor(ratio, adv, eps);
                        if factor != 0.0 {
                            // d(-obj)/dmean = -(factor·ratio/batch)·dlogp/dmean
                            let (g_mean, g_ls) =
                                self.actors[agent].log_prob_grad(&mean, action);
                            let scale = -factor * ratio / batch_n;
                            let out_grad: Vec<f64> =
                                g_mean.iter().map(|g| scale * g).collect();
                            self.actors[agent].net.backward(&trace, &out_grad, grads)?;
                            for (acc, g) in ls_grads.iter_mut().zip(&g_ls) {
                                *acc += scale * g;
                            }
                        }
                    }
                    // Entropy bonus: state-independent, so it only touches
                    // log_std, with unit density gradient per coordinate.
                    for g in ls_grads.iter_mut() {
                        *g -= self.hyper.entropy_coef;
                    }
                    actor_loss_acc[agent] += -surrogate / batch_n
                        - self.hyper.entropy_coef * self.actors[agent].entropy();
                    kl_acc[agent] += kl / batch_n;
                    clip_acc[agent] += clipped as f64 / batch_n;

                    let params = std::mem::take(&mut self.actors[agent].net.params);
                    let mut params = params;
                    self.actor_opts[agent].step(&mut params, grads);
                    self.actors[agent].net.params = params;
                    let mut log_std = std::mem::take(&mut self.actors[agent].log_std);
                    self.log_std_opts[agent].step(&mut log_std, ls_grads);
                    self.actors[agent].log_std = log_std;
                    self.actors[agent].clamp_log_std();
                }

                // Critic: squared error against the mean-over-agents return.
                critic_grads.iter_mut().for_each(|g| *g = 0.0);
                let mut value_loss = 0.0;
                for &i in batch {
                    let trace = self.critic.forward_trace(&buffer.states[i])?;
                    let v = trace.output()[0];
                    let err = v - buffer.mean_returns[i];
                    value_loss += err * err;
                    let out_grad =
                        [self.hyper.value_coef * 2.0 * err / batch_n];
                    self.critic.backward(&trace, &out_grad, &mut critic_grads)?;
                }
                let loss_now = self.hyper.value_coef * value_loss / batch_n;
                critic_loss_acc += loss_now;
                epoch_critic_loss += loss_now;
                epoch_batches += 1;
                self.critic_opt.step(&mut self.critic.params, &critic_grads);

                passes += 1;
            }
            critic_loss_per_epoch.push(epoch_critic_loss / epoch_batches as f64);
        }

        let p = passes as f64;
        Ok(UpdateStats {
            actor_loss: actor_loss_acc.iter().map(|l| l / p).collect(),
            critic_loss: critic_loss_acc / p,
            approx_kl: kl_acc.iter().map(|k| k / p).collect(),
            clip_fraction: clip_acc.iter().map(|c| c / p).collect(),
            critic_loss_per_epoch,
        })
    }

    /// Alternates collection and updates until `episodes` episodes finish.
    /// Every `snapshot_interval` episodes (0 disables) a greedy-policy probe
    /// of `snapshot_steps` steps runs on a clone of the environment.
    pub fn train<E: AgentEnv + Clone>(
        &mut self,
        env: &mut E,
        episodes: usize,
        snapshot_interval: usize,
        snapshot_steps: usize,
    ) -> Result<TrainingLog> {
        self.check_env(env)?;
        let mut log = TrainingLog::default();
        // Separate the environment's stream from the trainer's weight and
        // sampling draws.
        env.reset(self.seed.wrapping_add(0x9E37_79B9_7F4A_7C15));
        self.pending_obs = None;
        let start_episodes = self.episodes_trained;
        let mut last_snapshot = self.episodes_trained;
        while self.episodes_trained - start_episodes < episodes as u64 {
            let (mut buffer, completed) = self.collect(env, self.hyper.rollout_size)?;
            buffer.prepare(self.hyper.gamma, self.hyper.gae_lambda);
            let stats = self.ppo_update(&buffer)?;
            for record in &completed {
                if record.episode - start_episodes > episodes as u64 {
                    break;
                }
                for agent in 0..self.dims.num_agents {
                    log.rows.push(TrainRow {
                        episode: record.episode,
                        agent,
                        cumulative_reward: record.cumulative[agent],
                        actor_loss: stats.actor_loss[agent],
                        critic_loss: stats.critic_loss,
                    });
                }
            }
            if snapshot_interval > 0
                && self.episodes_trained - last_snapshot >= snapshot_interval as u64
            {
                last_snapshot = self.episodes_trained;
                let mut probe_env = env.clone();
                let probe = self.evaluate(&mut probe_env, snapshot_steps, SNAPSHOT_EVAL_SEED)?;
                log.snapshots.push(Snapshot {
                    episode: self.episodes_trained,
                    mean_rssi_dbm: probe.mean_rssi_dbm,
                });
            }
        }
        // Trailing rows past the requested budget are trimmed, not logged.
        log.rows.retain(|r| r.episode - start_episodes <= episodes as u64);
        Ok(log)
    }

    /// Runs the greedy policy (action = mean) for `steps` steps and records
    /// per-user receive power each step.
    pub fn evaluate<E: AgentEnv + ?Sized>(
        &self,
        env: &mut E,
        steps: usize,
        seed: u64,
    ) -> Result<EvalLog> {
        self.check_env(env)?;
        let num_agents = self.dims.num_agents;
        let mut obs = env.reset(seed);
        let mut rows = Vec::with_capacity(steps);
        let mut rssi_acc = 0.0;
        let mut reward_acc = 0.0;
        for step in 0..steps {
            let mut actions = Vec::with_capacity(num_agents);
            for agent in 0..num_agents {
                actions.push(self.actors[agent].mean(&obs[agent])?);
            }
            let out = env.step(&actions)?;
            rssi_acc += out.mean_rssi;
            reward_acc += out.rewards.iter().sum::<f64>() / num_agents as f64;
            rows.push(EvalRow {
                step,
                rssi_per_user: out.rssi_per_user.clone(),
                mean_rssi_dbm: out.mean_rssi,
            });
            obs = if out.done { env.reset_next() } else { out.observations };
        }
        Ok(EvalLog {
            mean_rssi_dbm: rssi_acc / steps.max(1) as f64,
            mean_scaled_reward: reward_acc / steps.max(1) as f64,
            rows,
        })
    }

    /// Serializes networks, log-std vectors, and optimizer state to the
    /// versioned text format.
    pub fn save_checkpoint(&self) -> String {
        let mut out = String::new();
        out.push_str(CHECKPOINT_MAGIC);
        out.push(' ');
        out.push_str(CHECKPOINT_VERSION);
        out.push('\n');
        out.push_str(&format!("algo {}\n", self.algo));
        out.push_str(&format!("agents {}\n", self.dims.num_agents));
        out.push_str(&format!("obs_dim {}\n", self.dims.obs_dim));
        out.push_str(&format!("action_dim {}\n", self.dims.action_dim));
        out.push_str(&format!("state_dim {}\n", self.dims.state_dim));
        out.push_str(&format!("episodes_trained {}\n", self.episodes_trained));
        out.push_str(&format!("seed {}\n", self.seed));
        for agent in 0..self.dims.num_agents {
            out.push_str(&format!("agent {agent}\n"));
            serialize::push_policy(&mut out, &self.actors[agent]);
            serialize::push_adam(&mut out, &self.actor_opts[agent]);
            serialize::push_adam(&mut out, &self.log_std_opts[agent]);
        }
        out.push_str("critic\n");
        serialize::push_net(&mut out, &self.critic);
        serialize::push_adam(&mut out, &self.critic_opt);
        out.push_str("end\n");
        out
    }

    /// Restores a trainer from checkpoint text. Optimizer learning rates are
    /// taken from `hyper`, moments from the checkpoint.
    pub fn load_checkpoint(text: &str, hyper: PpoHyper) -> Result<Trainer> {
        hyper.validate()?;
        let mut reader = serialize::Reader::new(text);
        let magic = reader.next_token()?;
        if magic != CHECKPOINT_MAGIC {
            return Err(Error::IncompatibleCheckpoint(format!(
                "not a checkpoint file (starts with `{magic}`)"
            )));
        }
        let version = reader.next_token()?;
        if version != CHECKPOINT_VERSION {
            return Err(Error::IncompatibleCheckpoint(format!(
                "unsupported checkpoint version `{version}`"
            )));
        }
        reader.expect("algo")?;
        let algo = reader.next_token()?.to_string();
        reader.expect("agents")?;
        let num_agents = reader.read_usize()?;
        reader.expect("obs_dim")?;
        let obs_dim = reader.read_usize()?;
        reader.expect("action_dim")?;
        let action_dim = reader.read_usize()?;
        reader.expect("state_dim")?;
        let state_dim = reader.read_usize()?;
        reader.expect("episodes_trained")?;
        let episodes_trained = reader.read_u64()?;
        reader.expect("seed")?;
        let seed = reader.read_u64()?;
        if num_agents == 0 || num_agents > 4096 {
            return Err(Error::MalformedFile(format!(
                "implausible agent count {num_agents}"
            )));
        }

        let mut actors = Vec::with_capacity(num_agents);
        let mut actor_opts = Vec::with_capacity(num_agents);
        let mut log_std_opts = Vec::with_capacity(num_agents);
        for agent in 0..num_agents {
            reader.expect("agent")?;
            let idx = reader.read_usize()?;
            if idx != agent {
                return Err(Error::MalformedFile(format!(
                    "agent blocks out of order: found {idx}, expected {agent}"
                )));
            }
            let policy = serialize::read_policy(&mut reader)?;
            if policy.net.dims().first() != Some(&obs_dim)
                || policy.net.dims().last() != Some(&action_dim)
            {
                return Err(Error::IncompatibleCheckpoint(format!(
                    "actor {agent} has shape {:?}, header says {obs_dim}->{action_dim}",
                    policy.net.dims()
                )));
            }
            let opt = serialize::read_adam(&mut reader, hyper.lr, policy.net.param_count())?;
            let ls_opt = serialize::read_adam(&mut reader, hyper.lr, action_dim)?;
            actors.push(policy);
            actor_opts.push(opt);
            log_std_opts.push(ls_opt);
        }
        reader.expect("critic")?;
        let critic = serialize::read_net(&mut reader)?;
        if critic.dims().first() != Some(&state_dim) || critic.dims().last() != Some(&1) {
            return Err(Error::IncompatibleCheckpoint(format!(
                "critic has shape {:?}, header says {state_dim}->1",
                critic.dims()
            )));
        }
        let critic_opt = serialize::read_adam(&mut reader, hyper.lr, critic.param_count())?;
        reader.expect("end")?;
        reader.finish()?;

        Ok(Trainer {
            algo,
            hyper,
            dims: NetDims { num_agents, obs_dim, action_dim, state_dim },
            actors,
            actor_opts,
            log_std_opts,
            critic,
            critic_opt,
            episodes_trained,
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed.wrapping_add(episodes_trained)),
            pending_obs: None,
        })
    }
}
