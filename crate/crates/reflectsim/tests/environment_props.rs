//! Property tests for the control environment: focal points never escape
//! their region, and the hybrid reward obeys its summation identity.

use proptest::prelude::*;
use reflectsim::environment::{reward, AgentEnv, AngleMode, Env, EnvConfig};
use reflectsim::geometry::{Aabb, AngleLimits, ArrayLayout, BasePlane};
use reflectsim::propagation::{RadiationModel, Scene};
use reflectsim::Vec3;

fn build_env() -> Env {
    let scene = Scene {
        walls: vec![],
        obstacles: vec![],
        ap_position: Vec3::new(6.0, 0.0, 2.0),
        frequency_hz: 60e9,
        tx_power_mw: 5.0,
        rx_height: 1.5,
        focal_region: Aabb::new(Vec3::new(-4.0, -4.0, 0.2), Vec3::new(4.0, 6.0, 2.8)).unwrap(),
        bounds: Aabb::new(Vec3::new(-10.0, -10.0, 0.0), Vec3::new(10.0, 10.0, 3.0)).unwrap(),
    };
    let plane = BasePlane::new(Vec3::new(0.0, -1.0, 1.0), Vec3::Z, Vec3::Y, Vec3::X).unwrap();
    let layout = ArrayLayout::hex(2, 4, 0.05, plane)
        .unwrap()
        .with_column_segments(2)
        .unwrap();
    let limits = AngleLimits {
        phi_min: -std::f64::consts::FRAC_PI_2,
        phi_max: std::f64::consts::FRAC_PI_2,
        theta_min: std::f64::consts::FRAC_PI_6,
        theta_max: 5.0 * std::f64::consts::FRAC_PI_6,
    };
    let config = EnvConfig {
        num_agents: 2,
        num_users: 2,
        user_assignment: vec![0, 1],
        delta_max: 0.5,
        episode_length: 50,
        mobility_period: 4,
        mobility_radius: 1.5,
        user_region: Aabb::new(Vec3::new(-3.0, 2.0, 1.5), Vec3::new(3.0, 5.0, 1.5)).unwrap(),
        noise_sigma: 0.3,
        fixed_user_positions: None,
        reward_offset: -160.0,
        reward_scale: 4.0,
    };
    Env::new(scene, layout, limits, RadiationModel::default(), config, AngleMode::Free).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn focal_points_stay_in_region(
        seed in 0u64..1000,
        actions in prop::collection::vec(
            prop::collection::vec(-20.0f64..20.0, 6), 1..12),
    ) {
        let mut env = build_env();
        env.reset(seed);
        for flat in &actions {
            let split = vec![flat[0..3].to_vec(), flat[3..6].to_vec()];
            env.step(&split).unwrap();
            for f in env.focal_points() {
                prop_assert!(env.scene.focal_region.contains(*f), "escaped: {f:?}");
            }
        }
    }

    #[test]
    fn per_step_displacement_is_bounded(
        seed in 0u64..1000,
        flat in prop::collection::vec(-20.0f64..20.0, 6),
    ) {
        let mut env = build_env();
        env.reset(seed);
        let before = env.focal_points().to_vec();
        let split = vec![flat[0..3].to_vec(), flat[3..6].to_vec()];
        env.step(&split).unwrap();
        for (old, new) in before.iter().zip(env.focal_points()) {
            let d = *new - *old;
            let bound = env.config.delta_max + 1e-12;
            prop_assert!(d.x.abs() <= bound && d.y.abs() <= bound && d.z.abs() <= bound);
        }
    }

    #[test]
    fn reward_totals_match_identity(
        rssi in prop::collection::vec(-150.0f64..-40.0, 1..6),
        raw_assignment in prop::collection::vec(0usize..16, 1..6),
    ) {
        // General assignment: totals decompose into the user sum plus the
        // assigned-user sum.
        let assignment: Vec<usize> =
            raw_assignment.iter().map(|a| a % rssi.len()).collect();
        let total: f64 = (0..assignment.len())
            .map(|l| reward(&rssi, &assignment, l))
            .sum();
        let user_sum: f64 = rssi.iter().sum();
        let assigned_sum: f64 = assignment.iter().map(|&k| rssi[k]).sum();
        let mean_part = assignment.len() as f64 * user_sum / rssi.len() as f64;
        prop_assert!((total - (mean_part + assigned_sum)).abs() < 1e-9);
    }
}
