//! Temporary pre-flight probe; deleted before finalizing.

use std::time::Instant;

use reflectsim::baselines::{static_eval, BaselineKind, SingleAgentAdapter};
use reflectsim::environment::{AgentEnv, AngleMode};
use reflectsim::geometry::apply_focal_points;
use reflectsim::harness::config::ResolvedConfig;
use reflectsim::marl::{NetDims, Trainer};
use reflectsim::propagation::{rssi, tiles_with_normals};

fn analytic_focus_mean(cfg: &ResolvedConfig) -> f64 {
    let scene = cfg.scene().unwrap();
    let layout = cfg.layout().unwrap();
    let limits = cfg.limits().unwrap();
    let radiation = cfg.radiation();
    let users = cfg.eval_user_positions();
    let assignment = &cfg.experiment.env.assignment;
    let focals: Vec<_> = assignment.iter().map(|&u| users[u]).collect();
    let applied = apply_focal_points(&layout, &focals, scene.ap_position, &limits).unwrap();
    let tiles = tiles_with_normals(&layout, &applied.normals);
    let vals: Vec<f64> = users.iter().map(|&u| rssi(&scene, &tiles, u, &radiation)).collect();
    println!("analytic per-user: {vals:?}  warnings: {}", applied.warnings.len());
    vals.iter().sum::<f64>() / vals.len() as f64
}

#[test]
#[ignore]
fn probe_static_and_analytic() {
    let cfg = ResolvedConfig::load(None).unwrap();
    let scene = cfg.scene().unwrap();
    let layout = cfg.layout().unwrap();
    let radiation = cfg.radiation();
    let users = cfg.eval_user_positions();
    for kind in [BaselineKind::Flat, BaselineKind::None] {
        let vals = static_eval(kind, &scene, &layout, &radiation, &users).unwrap();
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        println!("{kind}: per-user {vals:?} mean {mean:.2}");
    }
    let focus = analytic_focus_mean(&cfg);
    println!("analytic focusing mean: {focus:.2}");
}

#[test]
#[ignore]
fn probe_train_ma_desk() {
    let cfg = ResolvedConfig::load(None).unwrap();
    let t0 = Instant::now();
    let mut env = cfg
        .make_env(
            cfg.env_config(cfg.experiment.env.episode_length, 0.0, None).unwrap(),
            AngleMode::Free,
        )
        .unwrap();
    let ppo = &cfg.experiment.ppo;
    let mut trainer = Trainer::new(
        "beam_focusing_ma",
        NetDims::of_env(&env),
        &ppo.hidden,
        ppo.init_log_std,
        cfg.hyper(),
        101,
    )
    .unwrap();
    let log = trainer.train(&mut env, 300, 50, 100).unwrap();
    let train_secs = t0.elapsed().as_secs_f64();
    let episodes: Vec<u64> = log.rows.iter().map(|r| r.episode).collect();
    let max_ep = *episodes.iter().max().unwrap();
    let mean_over = |lo: u64, hi: u64| {
        let v: Vec<f64> = log
            .rows
            .iter()
            .filter(|r| r.episode >= lo && r.episode <= hi)
            .map(|r| r.cumulative_reward)
            .collect();
        v.iter().sum::<f64>() / v.len() as f64
    };
    println!(
        "train 300 ep in {train_secs:.0}s; first50 {:.2} last50 {:.2} (max_ep {max_ep})",
        mean_over(1, 50),
        mean_over(max_ep - 49, max_ep)
    );
    for s in &log.snapshots {
        println!("  snapshot ep {}: {:.2} dBm", s.episode, s.mean_rssi_dbm);
    }

    // Greedy eval at each noise level, fixed homes, mobility on.
    for sigma in [0.0, 0.1, 0.3, 0.5, 1.0] {
        let mut eval_env = cfg
            .make_env(
                cfg.env_config(300, sigma, Some(cfg.eval_user_positions())).unwrap(),
                AngleMode::Free,
            )
            .unwrap();
        let liv = trainer.evaluate(&mut eval_env, 300, 101).unwrap();
        println!("eval sigma {sigma}: mean_rssi {:.2} dBm", liv.mean_rssi_dbm);
    }
    println!("total {:.0}s", t0.elapsed().as_secs_f64());
}

#[test]
#[ignore]
fn probe_train_col_sa_desk() {
    let cfg = ResolvedConfig::load(None).unwrap();
    for seed in [101u64, 102, 103] {
    for kind in [BaselineKind::ColumnBasedMa, BaselineKind::BeamFocusingSa] {
        let t0 = Instant::now();
        let base = cfg
            .make_env(
                cfg.env_config(cfg.experiment.env.episode_length, 0.0, None).unwrap(),
                kind.angle_mode(),
            )
            .unwrap();
        let ppo = &cfg.experiment.ppo;
        match kind {
            BaselineKind::BeamFocusingSa => {
                let mut env = SingleAgentAdapter::new(base);
                let mut trainer = Trainer::new(
                    kind.as_str(),
                    NetDims::of_env(&env),
                    &ppo.hidden,
                    ppo.init_log_std,
                    cfg.hyper(),
                    seed,
                )
                .unwrap();
                trainer.train(&mut env, 300, 0, 0).unwrap();
                let mut eval_env = SingleAgentAdapter::new(
                    cfg.make_env(
                        cfg.env_config(300, 0.0, Some(cfg.eval_user_positions())).unwrap(),
                        kind.angle_mode(),
                    )
                    .unwrap(),
                );
                let liv = trainer.evaluate(&mut eval_env, 300, seed).unwrap();
                println!(
                    "{kind} seed {seed}: {:.0}s eval {:.2} dBm",
                    t0.elapsed().as_secs_f64(),
                    liv.mean_rssi_dbm
                );
            }
            _ => {
                let mut env = base;
                let mut trainer = Trainer::new(
                    kind.as_str(),
                    NetDims::of_env(&env),
                    &ppo.hidden,
                    ppo.init_log_std,
                    cfg.hyper(),
                    seed,
                )
                .unwrap();
                trainer.train(&mut env, 300, 0, 0).unwrap();
                let mut eval_env = cfg
                    .make_env(
                        cfg.env_config(300, 0.0, Some(cfg.eval_user_positions())).unwrap(),
                        kind.angle_mode(),
                    )
                    .unwrap();
                let liv = trainer.evaluate(&mut eval_env, 300, seed).unwrap();
                println!(
                    "{kind} seed {seed}: {:.0}s eval {:.2} dBm",
                    t0.elapsed().as_secs_f64(),
                    liv.mean_rssi_dbm
                );
            }
        }
    }
    }
}

#[test]
#[ignore]
fn probe_oracle_tracking() {
    // Best achievable eval RSSI for a policy that always steps its focal
    // point straight at the sensed user, under mobility.
    let base = ResolvedConfig::load(None).unwrap();
    for (delta_max, radius) in
        [(0.75, 1.5), (0.75, 0.5), (0.4, 1.5), (0.4, 0.5), (0.3, 0.3), (0.5, 0.75)]
    {
        let mut cfg = base.clone();
        cfg.experiment.env.delta_max = delta_max;
        cfg.experiment.env.mobility_radius = radius;
        let mut env = cfg
            .make_env(
                cfg.env_config(300, 0.0, Some(cfg.eval_user_positions())).unwrap(),
                AngleMode::Free,
            )
            .unwrap();
        env.reset(101);
        let assignment = cfg.experiment.env.assignment.clone();
        let mut acc = 0.0;
        for _ in 0..300 {
            let mut actions = Vec::new();
            for l in 0..3usize {
                let user = env.sensed_user_positions()[assignment[l]];
                let focal = env.focal_points()[l];
                actions.push(vec![user.x - focal.x, user.y - focal.y, user.z - focal.z]);
            }
            let out = env.step(&actions).unwrap();
            acc += out.mean_rssi;
        }
        println!("delta_max {delta_max} radius {radius}: oracle eval {:.2} dBm", acc / 300.0);
    }
}

fn run_ma_probe(delta_max: f64, radius: f64, seed: u64) {
    let base = ResolvedConfig::load(None).unwrap();
    let mut cfg = base.clone();
    cfg.experiment.env.delta_max = delta_max;
    cfg.experiment.env.mobility_radius = radius;
    cfg.experiment.ppo.init_log_std = (0.25 * delta_max).ln();
    let t0 = Instant::now();
    let mut env = cfg
        .make_env(cfg.env_config(100, 0.0, None).unwrap(), AngleMode::Free)
        .unwrap();
    let ppo = cfg.experiment.ppo.clone();
    let mut trainer = Trainer::new(
        "beam_focusing_ma",
        NetDims::of_env(&env),
        &ppo.hidden,
        ppo.init_log_std,
        cfg.hyper(),
        seed,
    )
    .unwrap();
    let log = trainer.train(&mut env, 300, 100, 100).unwrap();
    let mean_over = |lo: u64, hi: u64| {
        let v: Vec<f64> = log
            .rows
            .iter()
            .filter(|r| r.episode >= lo && r.episode <= hi)
            .map(|r| r.cumulative_reward)
            .collect();
        v.iter().sum::<f64>() / v.len() as f64
    };
    let stds: Vec<String> = trainer
        .actors
        .iter()
        .map(|a| {
            let m: f64 = a.log_std.iter().sum::<f64>() / a.log_std.len() as f64;
            format!("{:.2}", m.exp())
        })
        .collect();
    let mut evals = Vec::new();
    for sigma in [0.0, 1.0] {
        let mut eval_env = cfg
            .make_env(
                cfg.env_config(300, sigma, Some(cfg.eval_user_positions())).unwrap(),
                AngleMode::Free,
            )
            .unwrap();
        evals.push(trainer.evaluate(&mut eval_env, 300, seed).unwrap().mean_rssi_dbm);
    }
    println!(
        "d={delta_max} r={radius} seed={seed}: {:.0}s 1st50 {:.1} last50 {:.1} snaps {:?} eval0 {:.2} eval1 {:.2} std {:?}",
        t0.elapsed().as_secs_f64(),
        mean_over(1, 50),
        mean_over(251, 300),
        log.snapshots.iter().map(|s| s.mean_rssi_dbm.round()).collect::<Vec<_>>(),
        evals[0],
        evals[1],
        stds
    );
}

#[test]
#[ignore]
fn probe_sweep_a() {
    run_ma_probe(0.75, 0.75, 102);
}

#[test]
#[ignore]
fn probe_sweep_b() {
    run_ma_probe(0.75, 1.5, 103);
}

#[test]
#[ignore]
fn probe_update_diagnostics() {
    let cfg = ResolvedConfig::load(None).unwrap();
    let mut env = cfg
        .make_env(cfg.env_config(100, 0.0, None).unwrap(), AngleMode::Free)
        .unwrap();
    let ppo = cfg.experiment.ppo.clone();
    let mut trainer = Trainer::new(
        "beam_focusing_ma",
        NetDims::of_env(&env),
        &ppo.hidden,
        ppo.init_log_std,
        cfg.hyper(),
        101,
    )
    .unwrap();
    use reflectsim::environment::AgentEnv as _;
    env.reset(101u64.wrapping_add(0x9E37_79B9_7F4A_7C15));
    for update in 0..30 {
        let (mut buffer, completed) = trainer.collect(&mut env, 1000).unwrap();
        buffer.prepare(0.985, 0.9);
        let ret_mean =
            buffer.mean_returns.iter().sum::<f64>() / buffer.mean_returns.len() as f64;
        let val_mean = buffer.values.iter().sum::<f64>() / buffer.values.len() as f64;
        let stats = trainer.ppo_update(&buffer).unwrap();
        let ep_mean = completed.iter().map(|e| e.cumulative.iter().sum::<f64>() / 3.0).sum::<f64>()
            / completed.len().max(1) as f64;
        let std0: f64 = trainer.actors[0].log_std.iter().sum::<f64>() / 3.0;
        println!(
            "upd {update:2}: ep_ret {ep_mean:8.1} ret {ret_mean:7.2} V {val_mean:7.2} \
             aloss {:7.4} closs {:7.2}->{:7.2} kl {:6.4} clip {:4.2} std {:.3}",
            stats.actor_loss[0],
            stats.critic_loss_per_epoch.first().unwrap(),
            stats.critic_loss_per_epoch.last().unwrap(),
            stats.approx_kl[0],
            stats.clip_fraction[0],
            std0.exp()
        );
    }
}

#[test]
#[ignore]
fn probe_column_static_cost() {
    use reflectsim::geometry::{column_constrain, focal_tile_angles, orientations_to_normals};
    let s = std::f64::consts::SQRT_2 / 2.0;
    let vertical = ([0.0, 0.0, 1.0], [s, -s, 0.0]);
    let horizontal = ([s, -s, 0.0], [0.0, 0.0, 1.0]);
    for (label, pitch, (u, v)) in [
        ("u=z    p=0.10", 0.10, vertical),
        ("u=z    p=0.12", 0.12, vertical),
        ("u=horiz p=0.10", 0.10, horizontal),
        ("u=horiz p=0.12", 0.12, horizontal),
        ("u=horiz p=0.15", 0.15, horizontal),
    ] {
        let mut cfg = ResolvedConfig::load(None).unwrap();
        cfg.experiment.array.pitch = pitch;
        cfg.experiment.array.u = u;
        cfg.experiment.array.v = v;
        let scene = cfg.scene().unwrap();
        let layout = cfg.layout().unwrap();
        let limits = cfg.limits().unwrap();
        let radiation = cfg.radiation();
        let users = cfg.eval_user_positions();
        let focals: Vec<_> =
            cfg.experiment.env.assignment.iter().map(|&k| users[k]).collect();
        let oriented =
            focal_tile_angles(&layout, &focals, scene.ap_position, &limits).unwrap();
        let mean_of = |angles: &[(f64, f64)]| {
            let tiles = tiles_with_normals(&layout, &orientations_to_normals(angles));
            let vals: Vec<f64> =
                users.iter().map(|&p| rssi(&scene, &tiles, p, &radiation)).collect();
            vals.iter().sum::<f64>() / vals.len() as f64
        };
        let free = mean_of(&oriented.angles);
        let constrained = mean_of(&column_constrain(&oriented.angles, &layout));
        println!(
            "{label}: free {free:.2} dBm, column {constrained:.2} dBm, cost {:.2} dB ({} warnings)",
            free - constrained,
            oriented.warnings.len()
        );
    }
}

#[test]
#[ignore]
fn probe_column_cost_near_users() {
    use reflectsim::geometry::{column_constrain, focal_tile_angles, orientations_to_normals};
    let s = std::f64::consts::SQRT_2 / 2.0;
    for (label, pitch) in [("p=0.12", 0.12), ("p=0.15", 0.15), ("p=0.17", 0.17)] {
        let mut cfg = ResolvedConfig::load(None).unwrap();
        cfg.experiment.array.pitch = pitch;
        cfg.experiment.array.u = [s, -s, 0.0];
        cfg.experiment.array.v = [0.0, 0.0, 1.0];
        cfg.experiment.env.user_region_min = [1.0, 4.0, 1.5];
        cfg.experiment.env.user_region_max = [2.5, 5.3, 1.5];
        cfg.experiment.env.eval_users =
            vec![[1.2, 4.3, 1.5], [2.3, 4.8, 1.5], [1.5, 5.1, 1.5]];
        let scene = cfg.scene().unwrap();
        let layout = cfg.layout().unwrap();
        let limits = cfg.limits().unwrap();
        let radiation = cfg.radiation();
        let users = cfg.eval_user_positions();
        let focals: Vec<_> =
            cfg.experiment.env.assignment.iter().map(|&k| users[k]).collect();
        let oriented =
            focal_tile_angles(&layout, &focals, scene.ap_position, &limits).unwrap();
        let mean_of = |angles: &[(f64, f64)]| {
            let tiles = tiles_with_normals(&layout, &orientations_to_normals(angles));
            let vals: Vec<f64> =
                users.iter().map(|&p| rssi(&scene, &tiles, p, &radiation)).collect();
            vals.iter().sum::<f64>() / vals.len() as f64
        };
        let free = mean_of(&oriented.angles);
        let constrained = mean_of(&column_constrain(&oriented.angles, &layout));
        println!(
            "{label}: free {free:.2} dBm, column {constrained:.2} dBm, cost {:.2} dB ({} warn)",
            free - constrained,
            oriented.warnings.len()
        );
        let flat = static_eval(BaselineKind::Flat, &scene, &layout, &radiation, &users).unwrap();
        let none = static_eval(BaselineKind::None, &scene, &layout, &radiation, &users).unwrap();
        let m = |v: &Vec<f64>| v.iter().sum::<f64>() / v.len() as f64;
        println!("    flat {:.2} none {:.2}", m(&flat), m(&none));
    }
}

fn g17_cfg() -> ResolvedConfig {
    let s = std::f64::consts::SQRT_2 / 2.0;
    let mut cfg = ResolvedConfig::load(None).unwrap();
    cfg.experiment.array.pitch = 0.17;
    cfg.experiment.array.origin = [0.9, 1.6, 0.85];
    cfg.experiment.array.u = [s, -s, 0.0];
    cfg.experiment.array.v = [0.0, 0.0, 1.0];
    cfg.experiment.env.user_region_min = [1.0, 4.0, 1.5];
    cfg.experiment.env.user_region_max = [2.5, 5.3, 1.5];
    cfg.experiment.env.eval_users = vec![[1.2, 4.3, 1.5], [2.3, 4.8, 1.5], [1.5, 5.1, 1.5]];
    cfg
}

#[test]
#[ignore]
fn probe_g17_static() {
    use reflectsim::geometry::{column_constrain, focal_tile_angles, orientations_to_normals};
    let cfg = g17_cfg();
    let scene = cfg.scene().unwrap();
    let layout = cfg.layout().unwrap();
    let limits = cfg.limits().unwrap();
    let radiation = cfg.radiation();
    let users = cfg.eval_user_positions();
    let focals: Vec<_> = cfg.experiment.env.assignment.iter().map(|&k| users[k]).collect();
    let oriented = focal_tile_angles(&layout, &focals, scene.ap_position, &limits).unwrap();
    let mean_of = |angles: &[(f64, f64)]| {
        let tiles = tiles_with_normals(&layout, &orientations_to_normals(angles));
        let vals: Vec<f64> =
            users.iter().map(|&p| rssi(&scene, &tiles, p, &radiation)).collect();
        vals.iter().sum::<f64>() / vals.len() as f64
    };
    let free = mean_of(&oriented.angles);
    let constrained = mean_of(&column_constrain(&oriented.angles, &layout));
    let m = |v: &Vec<f64>| v.iter().sum::<f64>() / v.len() as f64;
    let flat = static_eval(BaselineKind::Flat, &scene, &layout, &radiation, &users).unwrap();
    let none = static_eval(BaselineKind::None, &scene, &layout, &radiation, &users).unwrap();
    println!(
        "g17 static: focus {free:.2} col {constrained:.2} (cost {:.2}) flat {:.2} none {:.2} warn {}",
        free - constrained,
        m(&flat),
        m(&none),
        oriented.warnings.len()
    );
    let zs: Vec<f64> = layout.tiles.iter().map(|t| t.position.z).collect();
    let zmax = zs.iter().cloned().fold(f64::MIN, f64::max);
    println!("tile z range {:.3}..{zmax:.3}", zs.iter().cloned().fold(f64::MAX, f64::min));
}

#[test]
#[ignore]
fn probe_g17_train() {
    let base = g17_cfg();
    let e = base.experiment.env.clone();
    let ppo = base.experiment.ppo.clone();
    let mut ma_trainers = Vec::new();
    for kind in
        [BaselineKind::BeamFocusingMa, BaselineKind::ColumnBasedMa, BaselineKind::BeamFocusingSa]
    {
        for seed in [101u64, 102, 103] {
            let cfg = g17_cfg();
            let t0 = Instant::now();
            let env_cfg =
                cfg.env_config(e.episode_length, e.noise_sigma_train, None).unwrap();
            let make_trainer = |env: &dyn AgentEnv| {
                Trainer::new(
                    kind.as_str(),
                    NetDims {
                        num_agents: env.num_agents(),
                        obs_dim: env.obs_dim(),
                        action_dim: env.action_dim(),
                        state_dim: env.state_dim(),
                    },
                    &ppo.hidden,
                    ppo.init_log_std,
                    cfg.hyper(),
                    seed,
                )
                .unwrap()
            };
            let eval_cfg = cfg.env_config(300, 0.0, Some(cfg.eval_user_positions())).unwrap();
            let (log, eval, trainer) = if kind == BaselineKind::BeamFocusingSa {
                let mut env =
                    SingleAgentAdapter::new(cfg.make_env(env_cfg, kind.angle_mode()).unwrap());
                let mut tr = make_trainer(&env);
                let log = tr.train(&mut env, 300, 0, 0).unwrap();
                let mut ev =
                    SingleAgentAdapter::new(cfg.make_env(eval_cfg, kind.angle_mode()).unwrap());
                let eval = tr.evaluate(&mut ev, 300, 7).unwrap().mean_rssi_dbm;
                (log, eval, tr)
            } else {
                let mut env = cfg.make_env(env_cfg, kind.angle_mode()).unwrap();
                let mut tr = make_trainer(&env);
                let log = tr.train(&mut env, 300, 0, 0).unwrap();
                let mut ev = cfg.make_env(eval_cfg, kind.angle_mode()).unwrap();
                let eval = tr.evaluate(&mut ev, 300, 7).unwrap().mean_rssi_dbm;
                (log, eval, tr)
            };
            let w = |lo: u64, hi: u64| {
                let v: Vec<f64> = log
                    .rows
                    .iter()
                    .filter(|r| r.episode >= lo && r.episode <= hi)
                    .map(|r| r.cumulative_reward)
                    .collect();
                v.iter().sum::<f64>() / v.len() as f64
            };
            println!(
                "{} seed {seed}: {:.0}s first50 {:.1} last50 {:.1} eval {eval:.2} dBm",
                kind.as_str(),
                t0.elapsed().as_secs_f64(),
                w(1, 50),
                w(251, 300)
            );
            if kind == BaselineKind::BeamFocusingMa {
                ma_trainers.push((seed, trainer));
            }
        }
    }
    let cfg = g17_cfg();
    let (seed, trainer) = &ma_trainers[0];
    for sigma in [0.0, 0.1, 0.3, 0.5, 1.0] {
        let ec = cfg.env_config(300, sigma, Some(cfg.eval_user_positions())).unwrap();
        let mut ev = cfg.make_env(ec, AngleMode::Free).unwrap();
        let v = trainer.evaluate(&mut ev, 300, 7).unwrap().mean_rssi_dbm;
        println!("ma seed {seed} sigma {sigma}: {v:.2} dBm");
    }
}

fn g20_cfg() -> ResolvedConfig {
    let s = std::f64::consts::SQRT_2 / 2.0;
    let mut cfg = ResolvedConfig::load(None).unwrap();
    cfg.experiment.array.pitch = 0.2;
    cfg.experiment.array.origin = [0.9, 1.6, 0.6];
    cfg.experiment.array.u = [s, -s, 0.0];
    cfg.experiment.array.v = [0.0, 0.0, 1.0];
    cfg.experiment.env.user_region_min = [1.1, 4.0, 1.5];
    cfg.experiment.env.user_region_max = [2.5, 5.3, 1.5];
    cfg.experiment.env.eval_users = vec![[1.2, 4.3, 1.5], [2.3, 4.8, 1.5], [1.5, 5.1, 1.5]];
    cfg
}

#[test]
#[ignore]
fn probe_g20_static() {
    use reflectsim::geometry::{column_constrain, focal_tile_angles, orientations_to_normals};
    let cfg = g20_cfg();
    let scene = cfg.scene().unwrap();
    let layout = cfg.layout().unwrap();
    let limits = cfg.limits().unwrap();
    let radiation = cfg.radiation();
    let users = cfg.eval_user_positions();
    let focals: Vec<_> = cfg.experiment.env.assignment.iter().map(|&k| users[k]).collect();
    let oriented = focal_tile_angles(&layout, &focals, scene.ap_position, &limits).unwrap();
    let mean_of = |angles: &[(f64, f64)]| {
        let tiles = tiles_with_normals(&layout, &orientations_to_normals(angles));
        let vals: Vec<f64> =
            users.iter().map(|&p| rssi(&scene, &tiles, p, &radiation)).collect();
        vals.iter().sum::<f64>() / vals.len() as f64
    };
    let free = mean_of(&oriented.angles);
    let constrained = mean_of(&column_constrain(&oriented.angles, &layout));
    let m = |v: &Vec<f64>| v.iter().sum::<f64>() / v.len() as f64;
    let flat = static_eval(BaselineKind::Flat, &scene, &layout, &radiation, &users).unwrap();
    let none = static_eval(BaselineKind::None, &scene, &layout, &radiation, &users).unwrap();
    println!(
        "g20 static: focus {free:.2} col {constrained:.2} (cost {:.2}) flat {:.2} none {:.2} warn {}",
        free - constrained,
        m(&flat),
        m(&none),
        oriented.warnings.len()
    );
    let zs: Vec<f64> = layout.tiles.iter().map(|t| t.position.z).collect();
    println!(
        "tile z {:.3}..{:.3}",
        zs.iter().cloned().fold(f64::MAX, f64::min),
        zs.iter().cloned().fold(f64::MIN, f64::max)
    );
}

fn g20r_cfg() -> ResolvedConfig {
    let s = std::f64::consts::SQRT_2 / 2.0;
    let mut cfg = ResolvedConfig::load(None).unwrap();
    cfg.experiment.array.pitch = 0.2;
    cfg.experiment.array.origin = [0.9, 1.6, 0.6];
    cfg.experiment.array.u = [s, -s, 0.0];
    cfg.experiment.array.v = [0.0, 0.0, 1.0];
    cfg
}

fn g21_cfg() -> ResolvedConfig {
    let mut cfg = g20r_cfg();
    cfg.scene_spec.tx_power_mw = 1.25;
    cfg
}

#[test]
#[ignore]
fn probe_g20r_static() {
    use reflectsim::geometry::{column_constrain, focal_tile_angles, orientations_to_normals};
    let cfg = g20r_cfg();
    let scene = cfg.scene().unwrap();
    let layout = cfg.layout().unwrap();
    let limits = cfg.limits().unwrap();
    let radiation = cfg.radiation();
    let users = cfg.eval_user_positions();
    let focals: Vec<_> = cfg.experiment.env.assignment.iter().map(|&k| users[k]).collect();
    let oriented = focal_tile_angles(&layout, &focals, scene.ap_position, &limits).unwrap();
    let mean_of = |angles: &[(f64, f64)]| {
        let tiles = tiles_with_normals(&layout, &orientations_to_normals(angles));
        let vals: Vec<f64> =
            users.iter().map(|&p| rssi(&scene, &tiles, p, &radiation)).collect();
        vals.iter().sum::<f64>() / vals.len() as f64
    };
    let free = mean_of(&oriented.angles);
    let constrained = mean_of(&column_constrain(&oriented.angles, &layout));
    let m = |v: &Vec<f64>| v.iter().sum::<f64>() / v.len() as f64;
    let flat = static_eval(BaselineKind::Flat, &scene, &layout, &radiation, &users).unwrap();
    let none = static_eval(BaselineKind::None, &scene, &layout, &radiation, &users).unwrap();
    println!(
        "g20r static: focus {free:.2} col {constrained:.2} (cost {:.2}) flat {:.2} none {:.2} warn {}",
        free - constrained,
        m(&flat),
        m(&none),
        oriented.warnings.len()
    );
}

#[test]
#[ignore]
fn probe_g20r_train() {
    let base = g20r_cfg();
    let e = base.experiment.env.clone();
    let ppo = base.experiment.ppo.clone();
    let mut ma_trainers = Vec::new();
    for kind in
        [BaselineKind::BeamFocusingMa, BaselineKind::ColumnBasedMa, BaselineKind::BeamFocusingSa]
    {
        for seed in [101u64, 102, 103] {
            let cfg = g20r_cfg();
            let t0 = Instant::now();
            let env_cfg =
                cfg.env_config(e.episode_length, e.noise_sigma_train, None).unwrap();
            let make_trainer = |env: &dyn AgentEnv| {
                Trainer::new(
                    kind.as_str(),
                    NetDims {
                        num_agents: env.num_agents(),
                        obs_dim: env.obs_dim(),
                        action_dim: env.action_dim(),
                        state_dim: env.state_dim(),
                    },
                    &ppo.hidden,
                    ppo.init_log_std,
                    cfg.hyper(),
                    seed,
                )
                .unwrap()
            };
            let eval_cfg = cfg.env_config(300, 0.0, Some(cfg.eval_user_positions())).unwrap();
            let (log, eval, trainer) = if kind == BaselineKind::BeamFocusingSa {
                let mut env =
                    SingleAgentAdapter::new(cfg.make_env(env_cfg, kind.angle_mode()).unwrap());
                let mut tr = make_trainer(&env);
                let log = tr.train(&mut env, 300, 0, 0).unwrap();
                let mut ev =
                    SingleAgentAdapter::new(cfg.make_env(eval_cfg, kind.angle_mode()).unwrap());
                let eval = tr.evaluate(&mut ev, 300, 7).unwrap().mean_rssi_dbm;
                (log, eval, tr)
            } else {
                let mut env = cfg.make_env(env_cfg, kind.angle_mode()).unwrap();
                let mut tr = make_trainer(&env);
                let log = tr.train(&mut env, 300, 0, 0).unwrap();
                let mut ev = cfg.make_env(eval_cfg, kind.angle_mode()).unwrap();
                let eval = tr.evaluate(&mut ev, 300, 7).unwrap().mean_rssi_dbm;
                (log, eval, tr)
            };
            let w = |lo: u64, hi: u64| {
                let v: Vec<f64> = log
                    .rows
                    .iter()
                    .filter(|r| r.episode >= lo && r.episode <= hi)
                    .map(|r| r.cumulative_reward)
                    .collect();
                v.iter().sum::<f64>() / v.len() as f64
            };
            println!(
                "{} seed {seed}: {:.0}s first50 {:.1} last50 {:.1} eval {eval:.2} dBm",
                kind.as_str(),
                t0.elapsed().as_secs_f64(),
                w(1, 50),
                w(251, 300)
            );
            if kind == BaselineKind::BeamFocusingMa {
                ma_trainers.push((seed, trainer));
            }
        }
    }
    let cfg = g20r_cfg();
    let (seed, trainer) = &ma_trainers[0];
    for sigma in [0.0, 0.1, 0.3, 0.5, 1.0] {
        let ec = cfg.env_config(300, sigma, Some(cfg.eval_user_positions())).unwrap();
        let mut ev = cfg.make_env(ec, AngleMode::Free).unwrap();
        let v = trainer.evaluate(&mut ev, 300, 7).unwrap().mean_rssi_dbm;
        println!("ma seed {seed} sigma {sigma}: {v:.2} dBm");
    }
}

#[test]
#[ignore]
fn probe_g21_train() {
    let base = g21_cfg();
    let e = base.experiment.env.clone();
    let ppo = base.experiment.ppo.clone();
    let kinds =
        [BaselineKind::BeamFocusingMa, BaselineKind::ColumnBasedMa, BaselineKind::BeamFocusingSa];
    let radii = [1.5f64, 0.75, 0.0];
    let mut results: Vec<(usize, [f64; 3])> = Vec::new();
    let mut ma_trainers = Vec::new();
    {
        let cfg = g21_cfg();
        let scene = cfg.scene().unwrap();
        let layout = cfg.layout().unwrap();
        let limits = cfg.limits().unwrap();
        let radiation = cfg.radiation();
        let users = cfg.eval_user_positions();
        let focals: Vec<_> =
            cfg.experiment.env.assignment.iter().map(|&k| users[k]).collect();
        let oriented =
            reflectsim::geometry::focal_tile_angles(&layout, &focals, scene.ap_position, &limits)
                .unwrap();
        let mean_of = |angles: &[(f64, f64)]| {
            let tiles = tiles_with_normals(
                &layout,
                &reflectsim::geometry::orientations_to_normals(angles),
            );
            let vals: Vec<f64> =
                users.iter().map(|&p| rssi(&scene, &tiles, p, &radiation)).collect();
            vals.iter().sum::<f64>() / vals.len() as f64
        };
        let free = mean_of(&oriented.angles);
        let constrained =
            mean_of(&reflectsim::geometry::column_constrain(&oriented.angles, &layout));
        println!("g21 static: focus {free:.2} col {constrained:.2} cost {:.2}", free - constrained);
    }
    for (ki, kind) in kinds.iter().enumerate() {
        for seed in [101u64, 102, 103] {
            let cfg = g21_cfg();
            let t0 = Instant::now();
            let env_cfg =
                cfg.env_config(e.episode_length, e.noise_sigma_train, None).unwrap();
            let make_trainer = |env: &dyn AgentEnv| {
                Trainer::new(
                    kind.as_str(),
                    NetDims {
                        num_agents: env.num_agents(),
                        obs_dim: env.obs_dim(),
                        action_dim: env.action_dim(),
                        state_dim: env.state_dim(),
                    },
                    &ppo.hidden,
                    ppo.init_log_std,
                    cfg.hyper(),
                    seed,
                )
                .unwrap()
            };
            let mk_eval = |radius: f64| {
                let mut ec =
                    cfg.env_config(300, 0.0, Some(cfg.eval_user_positions())).unwrap();
                ec.mobility_radius = radius;
                ec
            };
            let (log, evals) = if *kind == BaselineKind::BeamFocusingSa {
                let mut env =
                    SingleAgentAdapter::new(cfg.make_env(env_cfg, kind.angle_mode()).unwrap());
                let mut tr = make_trainer(&env);
                let log = tr.train(&mut env, 300, 0, 0).unwrap();
                let mut vals = [0.0f64; 3];
                for (ri, r) in radii.iter().enumerate() {
                    let mut ev = SingleAgentAdapter::new(
                        cfg.make_env(mk_eval(*r), kind.angle_mode()).unwrap(),
                    );
                    vals[ri] = tr.evaluate(&mut ev, 300, 7).unwrap().mean_rssi_dbm;
                }
                (log, vals)
            } else {
                let mut env = cfg.make_env(env_cfg, kind.angle_mode()).unwrap();
                let mut tr = make_trainer(&env);
                let log = tr.train(&mut env, 300, 0, 0).unwrap();
                let mut vals = [0.0f64; 3];
                for (ri, r) in radii.iter().enumerate() {
                    let mut ev = cfg.make_env(mk_eval(*r), kind.angle_mode()).unwrap();
                    vals[ri] = tr.evaluate(&mut ev, 300, 7).unwrap().mean_rssi_dbm;
                }
                if *kind == BaselineKind::BeamFocusingMa {
                    ma_trainers.push((seed, tr));
                    let tr_ref = &ma_trainers.last().unwrap().1;
                    (log, {
                        let _ = tr_ref;
                        vals
                    })
                } else {
                    (log, vals)
                }
            };
            let w = |lo: u64, hi: u64| {
                let v: Vec<f64> = log
                    .rows
                    .iter()
                    .filter(|r| r.episode >= lo && r.episode <= hi)
                    .map(|r| r.cumulative_reward)
                    .collect();
                v.iter().sum::<f64>() / v.len() as f64
            };
            println!(
                "{} seed {seed}: {:.0}s first50 {:.1} last50 {:.1} mob {:.2} r075 {:.2} frozen {:.2}",
                kind.as_str(),
                t0.elapsed().as_secs_f64(),
                w(1, 50),
                w(251, 300),
                evals[0],
                evals[1],
                evals[2]
            );
            results.push((ki, evals));
        }
    }
    for (ri, rname) in ["mob15", "r075", "frozen"].iter().enumerate() {
        let mean = |ki: usize| {
            let v: Vec<f64> = results
                .iter()
                .filter(|(k, _)| *k == ki)
                .map(|(_, ev)| ev[ri])
                .collect();
            v.iter().sum::<f64>() / v.len() as f64
        };
        let (ma, col, sa) = (mean(0), mean(1), mean(2));
        println!(
            "{rname}: MA {ma:.2} COL {col:.2} SA {sa:.2} | colMargin {:.2} saMargin {:.2}",
            ma - col,
            ma - sa
        );
        let per_seed_miss = |ki: usize| {
            results
                .iter()
                .filter(|(k, _)| *k == ki)
                .zip(results.iter().filter(|(k, _)| *k == 0))
                .filter(|((_, b), (_, m))| m[ri] - b[ri] < 1.0)
                .count()
        };
        println!("  per-seed misses: col {} sa {}", per_seed_miss(1), per_seed_miss(2));
    }
    let cfg = g21_cfg();
    let (seed, trainer) = &ma_trainers[0];
    for radius in [0.0f64, 1.5] {
        for sigma in [0.0, 0.1, 0.3, 0.5, 1.0] {
            let mut ec =
                cfg.env_config(300, sigma, Some(cfg.eval_user_positions())).unwrap();
            ec.mobility_radius = radius;
            let mut ev = cfg.make_env(ec, AngleMode::Free).unwrap();
            let v = trainer.evaluate(&mut ev, 300, 7).unwrap().mean_rssi_dbm;
            println!("r{radius} ma seed {seed} sigma {sigma}: {v:.2} dBm");
        }
    }
}

fn g22_cfg() -> ResolvedConfig {
    let s = std::f64::consts::SQRT_2 / 2.0;
    let mut cfg = ResolvedConfig::load(None).unwrap();
    cfg.experiment.array.pitch = 0.22;
    cfg.experiment.array.origin = [0.8, 1.7, 0.4];
    cfg.experiment.array.u = [s, -s, 0.0];
    cfg.experiment.array.v = [0.0, 0.0, 1.0];
    cfg.scene_spec.tx_power_mw = 1.0;
    cfg
}

#[test]
#[ignore]
fn probe_g22_train() {
    let base = g22_cfg();
    let e = base.experiment.env.clone();
    let ppo = base.experiment.ppo.clone();
    {
        let cfg = g22_cfg();
        let scene = cfg.scene().unwrap();
        let layout = cfg.layout().unwrap();
        let limits = cfg.limits().unwrap();
        let radiation = cfg.radiation();
        let users = cfg.eval_user_positions();
        let focals: Vec<_> =
            cfg.experiment.env.assignment.iter().map(|&k| users[k]).collect();
        let oriented =
            reflectsim::geometry::focal_tile_angles(&layout, &focals, scene.ap_position, &limits)
                .unwrap();
        let mean_of = |angles: &[(f64, f64)]| {
            let tiles = tiles_with_normals(
                &layout,
                &reflectsim::geometry::orientations_to_normals(angles),
            );
            let vals: Vec<f64> =
                users.iter().map(|&p| rssi(&scene, &tiles, p, &radiation)).collect();
            vals.iter().sum::<f64>() / vals.len() as f64
        };
        let free = mean_of(&oriented.angles);
        let constrained =
            mean_of(&reflectsim::geometry::column_constrain(&oriented.angles, &layout));
        let flat =
            static_eval(BaselineKind::Flat, &scene, &layout, &radiation, &users).unwrap();
        let m = |v: &Vec<f64>| v.iter().sum::<f64>() / v.len() as f64;
        println!(
            "g22 static: focus {free:.2} col {constrained:.2} cost {:.2} flat {:.2} warn {}",
            free - constrained,
            m(&flat),
            oriented.warnings.len()
        );
    }
    let kinds =
        [BaselineKind::BeamFocusingMa, BaselineKind::ColumnBasedMa, BaselineKind::BeamFocusingSa];
    // per arm: [mobA, frozA1000, mobB, frozB300, frozB1000, frozB3000]
    let mut results: Vec<(usize, [f64; 6])> = Vec::new();
    let mut ma_trainers = Vec::new();
    for (ki, kind) in kinds.iter().enumerate() {
        for seed in [101u64, 102, 103] {
            let cfg = g22_cfg();
            let env_cfg =
                cfg.env_config(e.episode_length, e.noise_sigma_train, None).unwrap();
            let make_trainer = |env: &dyn AgentEnv| {
                Trainer::new(
                    kind.as_str(),
                    NetDims {
                        num_agents: env.num_agents(),
                        obs_dim: env.obs_dim(),
                        action_dim: env.action_dim(),
                        state_dim: env.state_dim(),
                    },
                    &ppo.hidden,
                    ppo.init_log_std,
                    cfg.hyper(),
                    seed,
                )
                .unwrap()
            };
            let mk_eval = |radius: f64, steps: usize| {
                let mut ec =
                    cfg.env_config(steps, 0.0, Some(cfg.eval_user_positions())).unwrap();
                ec.mobility_radius = radius;
                ec
            };
            macro_rules! phase {
                ($env:expr, $wrap:expr) => {{
                    let mut env = $env;
                    let mut tr = make_trainer(&env);
                    let t0 = Instant::now();
                    let log1 = tr.train(&mut env, 300, 0, 0).unwrap();
                    let ta = t0.elapsed().as_secs_f64();
                    let ev = |tr: &Trainer, radius: f64, steps: usize| {
                        let mut e2 =
                            $wrap(cfg.make_env(mk_eval(radius, steps), kind.angle_mode()).unwrap());
                        tr.evaluate(&mut e2, steps, 7).unwrap().mean_rssi_dbm
                    };
                    let mob_a = ev(&tr, 1.5, 300);
                    let froz_a = ev(&tr, 0.0, 1000);
                    let t1 = Instant::now();
                    let log2 = tr.train(&mut env, 300, 0, 0).unwrap();
                    let tb = t1.elapsed().as_secs_f64();
                    let mob_b = ev(&tr, 1.5, 300);
                    let fb300 = ev(&tr, 0.0, 300);
                    let fb1000 = ev(&tr, 0.0, 1000);
                    let fb3000 = ev(&tr, 0.0, 3000);
                    (log1, log2, ta, tb, [mob_a, froz_a, mob_b, fb300, fb1000, fb3000], tr)
                }};
            }
            let (log1, log2, ta, tb, evals, tr) = if *kind == BaselineKind::BeamFocusingSa {
                phase!(
                    SingleAgentAdapter::new(cfg.make_env(env_cfg, kind.angle_mode()).unwrap()),
                    SingleAgentAdapter::new
                )
            } else {
                phase!(cfg.make_env(env_cfg, kind.angle_mode()).unwrap(), |x| x)
            };
            let w = |log: &reflectsim::marl::TrainingLog, lo: u64, hi: u64| {
                let v: Vec<f64> = log
                    .rows
                    .iter()
                    .filter(|r| r.episode >= lo && r.episode <= hi)
                    .map(|r| r.cumulative_reward)
                    .collect();
                v.iter().sum::<f64>() / v.len() as f64
            };
            println!(
                "{} seed {seed}: A {ta:.0}s f50 {:.1} l50 {:.1} mobA {:.2} frozA {:.2} | B {tb:.0}s l50 {:.1} mobB {:.2} frozB {:.2}/{:.2}/{:.2}",
                kind.as_str(),
                w(&log1, 1, 50),
                w(&log1, 251, 300),
                evals[0],
                evals[1],
                w(&log2, 551, 600),
                evals[2],
                evals[3],
                evals[4],
                evals[5]
            );
            if *kind == BaselineKind::BeamFocusingMa {
                ma_trainers.push((seed, tr));
            }
            results.push((ki, evals));
        }
    }
    for (ri, rname) in
        ["mobA", "frozA1k", "mobB", "frozB300", "frozB1k", "frozB3k"].iter().enumerate()
    {
        let mean = |ki: usize| {
            let v: Vec<f64> = results
                .iter()
                .filter(|(k, _)| *k == ki)
                .map(|(_, ev)| ev[ri])
                .collect();
            v.iter().sum::<f64>() / v.len() as f64
        };
        let (ma, col, sa) = (mean(0), mean(1), mean(2));
        let per_seed_miss = |ki: usize| {
            results
                .iter()
                .filter(|(k, _)| *k == ki)
                .zip(results.iter().filter(|(k, _)| *k == 0))
                .filter(|((_, b), (_, m))| m[ri] - b[ri] < 1.0)
                .count()
        };
        println!(
            "{rname}: MA {ma:.2} COL {col:.2} SA {sa:.2} | colM {:.2} saM {:.2} miss {}/{}",
            ma - col,
            ma - sa,
            per_seed_miss(1),
            per_seed_miss(2)
        );
    }
    let cfg = g22_cfg();
    let (seed, trainer) = &ma_trainers[0];
    for sigma in [0.0, 0.1, 0.3, 0.5, 1.0] {
        let mut ec = cfg.env_config(1000, sigma, Some(cfg.eval_user_positions())).unwrap();
        ec.mobility_radius = 0.0;
        let mut ev = cfg.make_env(ec, AngleMode::Free).unwrap();
        let v = trainer.evaluate(&mut ev, 1000, 7).unwrap().mean_rssi_dbm;
        println!("frozen1k ma seed {seed} sigma {sigma}: {v:.2} dBm");
    }
}
