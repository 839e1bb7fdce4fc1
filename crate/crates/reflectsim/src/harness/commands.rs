//! The four experiment commands: train, evaluate, heatmap, compare.
//! Each writes its artifacts plus a manifest into one output directory.

use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::baselines::{BaselineKind, SingleAgentAdapter};
use crate::environment::{reward, AgentEnv, AngleMode, Env};
use crate::harness::config::{apply_profile, ResolvedConfig};
use crate::harness::manifest::{sha256_hex, write_atomic, RunManifest, SeedSummary};
use crate::harness::outputs::{
    eval_csv, mean_std, snapshots_csv, summary_csv, summary_md, training_csv, FootprintCircle,
    FootprintRect, HeatmapMeta, SummaryRow,
};
use crate::marl::{EvalLog, EvalRow, NetDims, Trainer, TrainingLog};
use crate::propagation::export::{
    write_heatmap_csv, write_heatmap_ppm, RAMP_MAX_DBM, RAMP_MIN_DBM,
};
use crate::propagation::{flat_configuration, heatmap, rssi, tiles_with_normals, HeatmapGrid};
use crate::{Error, Result};

/// Environment variable naming the default output root when `--out` is
/// omitted; runs then land in `<root>/<command-derived-name>`.
pub const OUT_ROOT_ENV: &str = "REFLECTSIM_OUT";

/// Deterministic greedy steps a checkpointed policy is given to settle the
/// array before a heatmap is rendered.
pub const HEATMAP_SETTLE_STEPS: usize = 50;

pub const CONFIG_SNAPSHOT_NAME: &str = "config_snapshot.toml";
pub const CHECKPOINT_NAME: &str = "checkpoint.txt";
pub const TRAINING_CSV_NAME: &str = "training_log.csv";
pub const SNAPSHOTS_CSV_NAME: &str = "eval_snapshots.csv";
pub const EVAL_CSV_NAME: &str = "evaluation_log.csv";

/// What a command did, for the CLI to print. `exit_code` is nonzero when the
/// command completed but some arms failed (compare).
#[derive(Clone, Debug)]
pub struct CommandOutcome {
    pub exit_code: i32,
    pub summary: String,
    pub out_dir: PathBuf,
}

pub fn resolve_out_dir(out: Option<&Path>, default_name: &str) -> PathBuf {
    match out {
        Some(p) => p.to_path_buf(),
        None => {
            let root = std::env::var_os(OUT_ROOT_ENV)
                .map(PathBuf::from)
                .unwrap_or_else(|| PathBuf::from("runs"));
            root.join(default_name)
        }
    }
}

/// A trained arm's environment: either the cooperative multi-agent view or
/// the single-agent wrapper over the identical physics.
enum ArmEnv {
    Multi(Env),
    Single(SingleAgentAdapter),
}

impl ArmEnv {
    fn dims(&self) -> NetDims {
        match self {
            ArmEnv::Multi(e) => NetDims::of_env(e),
            ArmEnv::Single(e) => NetDims::of_env(e),
        }
    }

    fn train(
        &mut self,
        trainer: &mut Trainer,
        episodes: usize,
        snapshot_interval: usize,
        snapshot_steps: usize,
    ) -> Result<TrainingLog> {
        match self {
            ArmEnv::Multi(e) => trainer.train(e, episodes, snapshot_interval, snapshot_steps),
            ArmEnv::Single(e) => trainer.train(e, episodes, snapshot_interval, snapshot_steps),
        }
    }

    fn evaluate(&mut self, trainer: &Trainer, steps: usize, seed: u64) -> Result<EvalLog> {
        match self {
            ArmEnv::Multi(e) => trainer.evaluate(e, steps, seed),
            ArmEnv::Single(e) => trainer.evaluate(e, steps, seed),
        }
    }

    fn inner(&self) -> &Env {
        match self {
            ArmEnv::Multi(e) => e,
            ArmEnv::Single(a) => &a.inner,
        }
    }
}

fn build_arm_env(
    cfg: &ResolvedConfig,
    kind: BaselineKind,
    episode_length: usize,
    noise_sigma: f64,
    fixed_users: bool,
    mobility: bool,
) -> Result<ArmEnv> {
    let fixed = fixed_users.then(|| cfg.eval_user_positions());
    let env_cfg = cfg.env_config(episode_length, noise_sigma, fixed)?;
    let mut env = cfg.make_env(env_cfg, kind.angle_mode())?;
    env.set_mobility_enabled(mobility);
    Ok(match kind {
        BaselineKind::BeamFocusingSa => ArmEnv::Single(SingleAgentAdapter::new(env)),
        _ => ArmEnv::Multi(env),
    })
}

fn trained_kind(algo: &str) -> Result<BaselineKind> {
    let kind: BaselineKind = algo.parse()?;
    if !kind.is_trained() {
        return Err(Error::InvalidArgument(format!(
            "`{algo}` is a static arm; trainable arms are beam_focusing_ma, beam_focusing_sa, \
             column_based_ma"
        )));
    }
    Ok(kind)
}

fn write_output(
    dir: &Path,
    name: &str,
    data: &[u8],
    manifest: &mut RunManifest,
) -> Result<()> {
    write_atomic(&dir.join(name), data)?;
    manifest.record_file(dir, name)
}

/// Mean over agents of the final logged episode's cumulative scaled reward.
fn final_episode_reward(log: &TrainingLog) -> Option<f64> {
    let last = log.rows.iter().map(|r| r.episode).max()?;
    let vals: Vec<f64> =
        log.rows.iter().filter(|r| r.episode == last).map(|r| r.cumulative_reward).collect();
    Some(vals.iter().sum::<f64>() / vals.len() as f64)
}

pub struct TrainArgs {
    pub config: Option<PathBuf>,
    pub algo: Option<String>,
    pub episodes: Option<usize>,
    pub profile: Option<String>,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

pub fn run_train(args: &TrainArgs) -> Result<CommandOutcome> {
    let t0 = Instant::now();
    let mut cfg = ResolvedConfig::load(args.config.as_deref())?;
    if let Some(p) = &args.profile {
        apply_profile(&mut cfg.experiment, p)?;
    }
    if let Some(e) = args.episodes {
        cfg.experiment.ppo.episodes = e;
    }
    if let Some(a) = &args.algo {
        cfg.experiment.run.algo = a.clone();
    }
    let kind = trained_kind(&cfg.experiment.run.algo)?;
    let seed = args.seed;
    let dir = resolve_out_dir(
        args.out.as_deref(),
        &format!("train-{}-seed{seed}", kind.as_str()),
    );
    std::fs::create_dir_all(&dir)?;

    let snapshot = cfg.snapshot_toml();
    let mut manifest = RunManifest::new("train", &sha256_hex(snapshot.as_bytes()));

    // Training draws user homes per episode and senses with the configured
    // training noise.
    let mut env = build_arm_env(
        &cfg,
        kind,
        cfg.experiment.env.episode_length,
        cfg.experiment.env.noise_sigma_train,
        false,
        true,
    )?;
    let ppo = &cfg.experiment.ppo;
    let mut trainer =
        Trainer::new(kind.as_str(), env.dims(), &ppo.hidden, ppo.init_log_std, cfg.hyper(), seed)?;
    let episodes = ppo.episodes;
    let log = env.train(&mut trainer, episodes, ppo.snapshot_interval, ppo.snapshot_steps)?;

    write_output(&dir, CONFIG_SNAPSHOT_NAME, snapshot.as_bytes(), &mut manifest)?;
    write_output(&dir, TRAINING_CSV_NAME, training_csv(&log).as_bytes(), &mut manifest)?;
    write_output(&dir, SNAPSHOTS_CSV_NAME, snapshots_csv(&log).as_bytes(), &mut manifest)?;
    write_output(&dir, CHECKPOINT_NAME, trainer.save_checkpoint().as_bytes(), &mut manifest)?;

    let final_reward = final_episode_reward(&log);
    manifest.seed_summaries.push(SeedSummary {
        algo: kind.as_str().to_string(),
        seed,
        failed: false,
        episodes: Some(episodes as u64),
        mean_rssi_dbm: log.snapshots.last().map(|s| s.mean_rssi_dbm),
        std_rssi_dbm: None,
        final_reward,
    });
    manifest.wall_clock_s = t0.elapsed().as_secs_f64();
    manifest.write(&dir)?;

    let summary = match final_reward {
        Some(r) => format!(
            "train {} seed={seed}: {episodes} episodes in {:.1}s, final episode mean return {r:.3}",
            kind.as_str(),
            manifest.wall_clock_s
        ),
        None => format!(
            "train {} seed={seed}: wrote initialized checkpoint (0 episodes)",
            kind.as_str()
        ),
    };
    Ok(CommandOutcome { exit_code: 0, summary, out_dir: dir })
}

pub struct EvaluateArgs {
    pub config: Option<PathBuf>,
    pub checkpoint: PathBuf,
    pub steps: usize,
    pub noise_sigma: f64,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

fn load_trainer(checkpoint: &Path, cfg: &ResolvedConfig) -> Result<(Trainer, BaselineKind)> {
    let text = std::fs::read_to_string(checkpoint).map_err(|e| {
        Error::MalformedFile(format!("reading checkpoint {}: {e}", checkpoint.display()))
    })?;
    let trainer = Trainer::load_checkpoint(&text, cfg.hyper())?;
    let kind: BaselineKind = trainer
        .algo
        .parse()
        .map_err(|_| Error::IncompatibleCheckpoint(format!("unknown algo `{}`", trainer.algo)))?;
    if !kind.is_trained() {
        return Err(Error::IncompatibleCheckpoint(format!(
            "checkpoint algo `{}` is not a trainable arm",
            trainer.algo
        )));
    }
    Ok((trainer, kind))
}

pub fn run_evaluate(args: &EvaluateArgs) -> Result<CommandOutcome> {
    let t0 = Instant::now();
    if args.steps == 0 {
        return Err(Error::InvalidArgument("evaluate needs at least one step".into()));
    }
    if args.noise_sigma < 0.0 {
        return Err(Error::InvalidArgument("noise sigma must be non-negative".into()));
    }
    let cfg = ResolvedConfig::load(args.config.as_deref())?;
    let (trainer, kind) = load_trainer(&args.checkpoint, &cfg)?;

    let dir = resolve_out_dir(
        args.out.as_deref(),
        &format!("evaluate-{}-seed{}", kind.as_str(), args.seed),
    );
    std::fs::create_dir_all(&dir)?;
    let snapshot = cfg.snapshot_toml();
    let mut manifest = RunManifest::new("evaluate", &sha256_hex(snapshot.as_bytes()));

    // Evaluation pins user homes, keeps mobility, and senses with the
    // requested noise level; one continuous run, no mid-run resets.
    let mut env = build_arm_env(&cfg, kind, args.steps, args.noise_sigma, true, true)?;
    let log = env.evaluate(&trainer, args.steps, args.seed)?;

    let per_step: Vec<f64> = log.rows.iter().map(|r| r.mean_rssi_dbm).collect();
    let (mean, std) = mean_std(&per_step);

    write_output(&dir, CONFIG_SNAPSHOT_NAME, snapshot.as_bytes(), &mut manifest)?;
    let csv = eval_csv(&log, cfg.experiment.env.num_users)?;
    write_output(&dir, EVAL_CSV_NAME, csv.as_bytes(), &mut manifest)?;

    manifest.seed_summaries.push(SeedSummary {
        algo: kind.as_str().to_string(),
        seed: args.seed,
        failed: false,
        episodes: Some(trainer.episodes_trained),
        mean_rssi_dbm: Some(mean),
        std_rssi_dbm: Some(std),
        final_reward: Some(log.mean_scaled_reward),
    });
    manifest.wall_clock_s = t0.elapsed().as_secs_f64();
    manifest.write(&dir)?;

    let summary = format!(
        "evaluate {} seed={} sigma={}: mean_rssi_dbm={mean:.3} std={std:.3} over {} steps",
        kind.as_str(),
        args.seed,
        args.noise_sigma,
        args.steps
    );
    Ok(CommandOutcome { exit_code: 0, summary, out_dir: dir })
}

pub struct HeatmapArgs {
    pub config: Option<PathBuf>,
    pub checkpoint: Option<PathBuf>,
    pub static_kind: Option<String>,
    pub resolution: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

pub fn run_heatmap(args: &HeatmapArgs) -> Result<CommandOutcome> {
    let t0 = Instant::now();
    let cfg = ResolvedConfig::load(args.config.as_deref())?;
    let scene = cfg.scene()?;
    let layout = cfg.layout()?;
    let radiation = cfg.radiation();

    let (tiles, source, name_part) = match (&args.checkpoint, &args.static_kind) {
        (Some(_), Some(_)) | (None, None) => {
            return Err(Error::InvalidArgument(
                "heatmap needs exactly one of --checkpoint or --static".into(),
            ))
        }
        (None, Some(kind_str)) => {
            let kind: BaselineKind = kind_str.parse()?;
            let tiles = match kind {
                BaselineKind::Flat => {
                    tiles_with_normals(&layout, &flat_configuration(&layout))
                }
                BaselineKind::None => Vec::new(),
                other => {
                    return Err(Error::InvalidArgument(format!(
                        "--static expects flat|none, got {other}"
                    )))
                }
            };
            (tiles, format!("static {kind}"), format!("static-{kind}"))
        }
        (Some(path), None) => {
            let (trainer, kind) = load_trainer(path, &cfg)?;
            // Freeze the users at their evaluation homes, switch mobility
            // off, and let the greedy policy settle the array.
            let mut env =
                build_arm_env(&cfg, kind, HEATMAP_SETTLE_STEPS + 1, 0.0, true, false)?;
            env.evaluate(&trainer, HEATMAP_SETTLE_STEPS, args.seed)?;
            let tiles = tiles_with_normals(&layout, env.inner().tile_normals());
            (tiles, format!("checkpoint {}", path.display()), format!("ckpt-{kind}"))
        }
    };

    let grid = HeatmapGrid {
        x0: scene.bounds.min.x,
        y0: scene.bounds.min.y,
        x1: scene.bounds.max.x,
        y1: scene.bounds.max.y,
        resolution: args.resolution,
    };
    let map = heatmap(&scene, &tiles, &grid, &radiation)?;

    let dir = resolve_out_dir(args.out.as_deref(), &format!("heatmap-{name_part}"));
    std::fs::create_dir_all(&dir)?;
    let snapshot = cfg.snapshot_toml();
    let mut manifest = RunManifest::new("heatmap", &sha256_hex(snapshot.as_bytes()));
    write_output(&dir, CONFIG_SNAPSHOT_NAME, snapshot.as_bytes(), &mut manifest)?;

    let mut csv = Vec::new();
    write_heatmap_csv(&map, &mut csv)?;
    write_output(&dir, "heatmap.csv", &csv, &mut manifest)?;
    let mut ppm = Vec::new();
    write_heatmap_ppm(&map, &mut ppm)?;
    write_output(&dir, "heatmap.ppm", &ppm, &mut manifest)?;

    let meta = HeatmapMeta {
        source,
        resolution: args.resolution,
        x0: grid.x0,
        y0: grid.y0,
        x1: grid.x1,
        y1: grid.y1,
        rx_height: scene.rx_height,
        ramp_min_dbm: RAMP_MIN_DBM,
        ramp_max_dbm: RAMP_MAX_DBM,
        users: cfg.experiment.env.eval_users.clone(),
        cylinders: cfg
            .scene_spec
            .cylinders
            .iter()
            .map(|c| FootprintCircle {
                name: c.name.clone(),
                center_x: c.center_x,
                center_y: c.center_y,
                radius: c.radius,
            })
            .collect(),
        walls: cfg
            .scene_spec
            .walls
            .iter()
            .map(|w| FootprintRect {
                name: w.name.clone(),
                x0: w.min[0],
                y0: w.min[1],
                x1: w.max[0],
                y1: w.max[1],
            })
            .collect(),
    };
    let meta_text = toml::to_string_pretty(&meta).expect("heatmap meta serializes");
    write_output(&dir, "heatmap_meta.toml", meta_text.as_bytes(), &mut manifest)?;

    manifest.wall_clock_s = t0.elapsed().as_secs_f64();
    manifest.write(&dir)?;

    let (lo, hi) = map
        .values_dbm
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let summary = format!(
        "heatmap {}x{} from {}: rssi range [{lo:.1}, {hi:.1}] dBm",
        args.resolution, args.resolution, meta.source
    );
    Ok(CommandOutcome { exit_code: 0, summary, out_dir: dir })
}

pub struct CompareArgs {
    pub config: Option<PathBuf>,
    pub seeds: Option<Vec<u64>>,
    pub episodes: Option<usize>,
    pub profile: Option<String>,
    pub out: Option<PathBuf>,
}

/// Evaluation pass for the untrained arms: the array stays in the given
/// configuration while users keep moving on their evaluation homes.
fn static_arm_eval(
    cfg: &ResolvedConfig,
    kind: BaselineKind,
    steps: usize,
    seed: u64,
) -> Result<EvalLog> {
    let scene = cfg.scene()?;
    let layout = cfg.layout()?;
    let radiation = cfg.radiation();
    let tiles = match kind {
        BaselineKind::Flat => tiles_with_normals(&layout, &flat_configuration(&layout)),
        BaselineKind::None => Vec::new(),
        other => {
            return Err(Error::InvalidArgument(format!(
                "static arm evaluation handles flat|none, got {other}"
            )))
        }
    };
    // The environment only drives user mobility here; receive power comes
    // from the frozen tile configuration, not from the focal points.
    let env_cfg = cfg.env_config(steps, 0.0, Some(cfg.eval_user_positions()))?;
    let mut env = cfg.make_env(env_cfg, AngleMode::Free)?;
    env.set_mobility_enabled(true);
    env.reset(seed);
    let zero = vec![vec![0.0; env.action_dim()]; env.num_agents()];
    let assignment = &cfg.experiment.env.assignment;
    let offset = cfg.experiment.env.reward_offset_dbm;
    let scale = cfg.experiment.env.reward_scale_db;
    let num_agents = env.num_agents();

    let mut rows = Vec::with_capacity(steps);
    let mut rssi_acc = 0.0;
    let mut reward_acc = 0.0;
    for step in 0..steps {
        env.step(&zero)?;
        let users = env.true_user_positions().to_vec();
        let rssi_per_user: Vec<f64> =
            users.iter().map(|&u| rssi(&scene, &tiles, u, &radiation)).collect();
        let mean = rssi_per_user.iter().sum::<f64>() / rssi_per_user.len() as f64;
        let mut scaled_sum = 0.0;
        for agent in 0..num_agents {
            let raw = reward(&rssi_per_user, assignment, agent);
            scaled_sum += (raw - offset) / scale;
        }
        rssi_acc += mean;
        reward_acc += scaled_sum / num_agents as f64;
        rows.push(EvalRow { step, rssi_per_user, mean_rssi_dbm: mean });
    }
    Ok(EvalLog {
        mean_rssi_dbm: rssi_acc / steps.max(1) as f64,
        mean_scaled_reward: reward_acc / steps.max(1) as f64,
        rows,
    })
}

/// Train (if applicable) and evaluate one arm, writing its artifacts into
/// `<out>/<algo>-seed<seed>/`.
fn run_compare_arm(
    cfg: &ResolvedConfig,
    kind: BaselineKind,
    seed: u64,
    dir: &Path,
    manifest: &mut RunManifest,
) -> Result<SummaryRow> {
    let sub = format!("{}-seed{seed}", kind.as_str());
    let subdir = dir.join(&sub);
    std::fs::create_dir_all(&subdir)?;
    let eval_steps = cfg.experiment.env.eval_steps;
    let num_users = cfg.experiment.env.num_users;

    let log = if kind.is_trained() {
        let mut env = build_arm_env(
            cfg,
            kind,
            cfg.experiment.env.episode_length,
            cfg.experiment.env.noise_sigma_train,
            false,
            true,
        )?;
        let ppo = &cfg.experiment.ppo;
        let mut trainer = Trainer::new(
            kind.as_str(),
            env.dims(),
            &ppo.hidden,
            ppo.init_log_std,
            cfg.hyper(),
            seed,
        )?;
        let tlog =
            env.train(&mut trainer, ppo.episodes, ppo.snapshot_interval, ppo.snapshot_steps)?;
        write_atomic(&subdir.join(TRAINING_CSV_NAME), training_csv(&tlog).as_bytes())?;
        write_atomic(&subdir.join(SNAPSHOTS_CSV_NAME), snapshots_csv(&tlog).as_bytes())?;
        write_atomic(&subdir.join(CHECKPOINT_NAME), trainer.save_checkpoint().as_bytes())?;
        let mut eval_env = build_arm_env(cfg, kind, eval_steps, 0.0, true, true)?;
        eval_env.evaluate(&trainer, eval_steps, seed)?
    } else {
        static_arm_eval(cfg, kind, eval_steps, seed)?
    };

    write_atomic(&subdir.join(EVAL_CSV_NAME), eval_csv(&log, num_users)?.as_bytes())?;
    for name in [TRAINING_CSV_NAME, SNAPSHOTS_CSV_NAME, CHECKPOINT_NAME, EVAL_CSV_NAME] {
        if subdir.join(name).exists() {
            manifest.record_file(dir, &format!("{sub}/{name}"))?;
        }
    }

    let per_step: Vec<f64> = log.rows.iter().map(|r| r.mean_rssi_dbm).collect();
    let (mean, std) = mean_std(&per_step);
    Ok(SummaryRow {
        algo: kind.as_str().to_string(),
        seed,
        failed: false,
        mean_rssi_dbm: mean,
        std_rssi_dbm: std,
        final_reward: log.mean_scaled_reward,
    })
}

pub fn run_compare(args: &CompareArgs) -> Result<CommandOutcome> {
    let t0 = Instant::now();
    let mut cfg = ResolvedConfig::load(args.config.as_deref())?;
    if let Some(p) = &args.profile {
        apply_profile(&mut cfg.experiment, p)?;
    }
    if let Some(e) = args.episodes {
        cfg.experiment.ppo.episodes = e;
    }
    let mut seeds = args.seeds.clone().unwrap_or_else(|| cfg.experiment.run.seeds.clone());
    if seeds.is_empty() {
        return Err(Error::InvalidArgument("compare needs at least one seed".into()));
    }
    seeds.sort_unstable();
    seeds.dedup();

    let dir = resolve_out_dir(args.out.as_deref(), "compare");
    std::fs::create_dir_all(&dir)?;
    let snapshot = cfg.snapshot_toml();
    let mut manifest = RunManifest::new("compare", &sha256_hex(snapshot.as_bytes()));
    write_output(&dir, CONFIG_SNAPSHOT_NAME, snapshot.as_bytes(), &mut manifest)?;

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for kind in BaselineKind::ALL {
        for &seed in &seeds {
            match run_compare_arm(&cfg, kind, seed, &dir, &mut manifest) {
                Ok(row) => rows.push(row),
                Err(e) => {
                    eprintln!("compare: arm {} seed {seed} failed: {e}", kind.as_str());
                    failures.push(format!("{} seed {seed}", kind.as_str()));
                    rows.push(SummaryRow {
                        algo: kind.as_str().to_string(),
                        seed,
                        failed: true,
                        mean_rssi_dbm: f64::NAN,
                        std_rssi_dbm: f64::NAN,
                        final_reward: f64::NAN,
                    });
                }
            }
        }
    }
    rows.sort_by(|a, b| a.algo.cmp(&b.algo).then(a.seed.cmp(&b.seed)));

    write_output(&dir, "summary.csv", summary_csv(&rows).as_bytes(), &mut manifest)?;
    let md = summary_md(&rows, cfg.experiment.ppo.episodes, cfg.experiment.env.eval_steps);
    write_output(&dir, "summary.md", md.as_bytes(), &mut manifest)?;

    for row in &rows {
        manifest.seed_summaries.push(SeedSummary {
            algo: row.algo.clone(),
            seed: row.seed,
            failed: row.failed,
            episodes: None,
            mean_rssi_dbm: (!row.failed).then_some(row.mean_rssi_dbm),
            std_rssi_dbm: (!row.failed).then_some(row.std_rssi_dbm),
            final_reward: (!row.failed).then_some(row.final_reward),
        });
    }
    manifest.wall_clock_s = t0.elapsed().as_secs_f64();
    manifest.write(&dir)?;

    let summary = if failures.is_empty() {
        format!(
            "compare: {} arms x {} seeds in {:.1}s, see summary.csv",
            BaselineKind::ALL.len(),
            seeds.len(),
            manifest.wall_clock_s
        )
    } else {
        format!("compare: {} arm(s) failed: {}", failures.len(), failures.join(", "))
    };
    Ok(CommandOutcome {
        exit_code: if failures.is_empty() { 0 } else { 1 },
        summary,
        out_dir: dir,
    })
}
