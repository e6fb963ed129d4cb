mod common;

use common::scenes::{fixture, three_robots};
use nalgebra::Point3;
use proptest::prelude::*;
use safe_motion::safety_gate::{GateConfig, ProtectionMode};
use safe_motion::task_env::{env_observe, env_reset, env_step, EpisodeConfig, TargetMode};

fn config(mode: TargetMode) -> EpisodeConfig {
    EpisodeConfig {
        target_mode: mode,
        ..EpisodeConfig::default()
    }
}

fn link_tip(scene: &safe_motion::robot_model::Scene, q: &[f64], robot: usize) -> [f64; 3] {
    let t = scene.forward_kinematics(q).unwrap()[robot]
        .last()
        .unwrap()
        .translation
        .vector;
    [t.x, t.y, t.z]
}

#[test]
fn simultaneous_mode_activates_one_target_per_robot() {
    let scene = fixture("two_robot.json");
    let (env, _) = env_reset(
        &scene,
        &config(TargetMode::Simultaneous),
        ProtectionMode::Collision,
        GateConfig::default(),
        1,
    )
    .unwrap();
    assert_eq!(env.targets.iter().filter(|t| t.active).count(), 2);
}

#[test]
fn alternating_mode_starts_with_robot_zero() {
    let scene = three_robots();
    let (env, obs) = env_reset(
        &scene,
        &config(TargetMode::Alternating),
        ProtectionMode::None,
        GateConfig::default(),
        1,
    )
    .unwrap();
    let active: Vec<_> = env.targets.iter().filter(|t| t.active).collect();
    assert_eq!(active.len(), 1);
    assert_eq!(active[0].robot, 0);
    assert_eq!(obs.len(), 3 * 21 + 6 * 3 + 3);
    assert_eq!(&obs[obs.len() - 3..], &[1.0, 0.0, 0.0]);
}

#[test]
fn same_seed_gives_same_targets() {
    let scene = fixture("one_robot.json");
    let cfg = config(TargetMode::Simultaneous);
    let a = env_reset(&scene, &cfg, ProtectionMode::Collision, GateConfig::default(), 7)
        .unwrap()
        .0;
    let b = env_reset(&scene, &cfg, ProtectionMode::Collision, GateConfig::default(), 7)
        .unwrap()
        .0;
    let c = env_reset(&scene, &cfg, ProtectionMode::Collision, GateConfig::default(), 8)
        .unwrap()
        .0;
    assert_eq!(a.targets, b.targets);
    assert_ne!(a.targets, c.targets);
}

#[test]
fn targets_spawn_inside_the_region_with_clearance() {
    let scene = fixture("one_robot.json");
    let cfg = config(TargetMode::Simultaneous);
    for seed in 0..20 {
        let env = env_reset(&scene, &cfg, ProtectionMode::None, GateConfig::default(), seed)
            .unwrap()
            .0;
        let p = env.targets[0].position;
        let r = cfg.spawn_region;
        assert!((0..3).all(|i| p[i] >= r.min_m[i] && p[i] <= r.max_m[i]));
        // table, walls and monitor of the fixture
        assert!(p[2] >= 0.1 - 1e-12);
        assert!(p[0] <= 0.9 + 1e-12 && p[0] >= -0.45 - 1e-12);
        assert!(p[1].abs() <= 0.65 + 1e-12);
    }
}

#[test]
fn home_observation_has_normalized_home_and_zero_motion() {
    let scene = fixture("one_robot.json");
    let (env, obs) = env_reset(
        &scene,
        &config(TargetMode::Simultaneous),
        ProtectionMode::None,
        GateConfig::default(),
        3,
    )
    .unwrap();
    let n = scene.dof();
    assert_eq!(obs.len(), 3 * n + 6);
    assert_eq!(obs.len(), env.observation_len());
    for (i, l) in scene.joint_limits().iter().enumerate() {
        assert_eq!(obs[i], l.normalize_position(scene.home()[i]));
    }
    assert!(obs[n..3 * n].iter().all(|x| *x == 0.0));
    assert_eq!(&obs[3 * n..3 * n + 3], &env.targets[0].position);
}

#[test]
fn target_at_the_link_frame_has_zero_relative_vector() {
    let scene = fixture("one_robot.json");
    let (mut env, _) = env_reset(
        &scene,
        &config(TargetMode::Simultaneous),
        ProtectionMode::None,
        GateConfig::default(),
        3,
    )
    .unwrap();
    env.targets[0].position = link_tip(&scene, &scene.home(), 0);
    let obs = env_observe(&env).unwrap();
    let n = scene.dof();
    assert!(obs[3 * n + 3..3 * n + 6].iter().all(|x| x.abs() < 1e-15));
}

#[test]
fn zero_motion_step_has_zero_reward() {
    let scene = fixture("one_robot.json");
    let cfg = EpisodeConfig {
        penalty: Some(safe_motion::task_env::ProximityPenalty {
            threshold_m: 0.05,
            max: 0.5,
        }),
        ..config(TargetMode::Simultaneous)
    };
    let (mut env, _) = env_reset(&scene, &cfg, ProtectionMode::Collision, GateConfig::default(), 3).unwrap();
    let (_, reward, done, info) = env_step(&mut env, &[0.0; 7]).unwrap();
    assert_eq!(reward, 0.0);
    assert_eq!(info.penalty, 0.0);
    assert!(!done);
}

#[test]
fn reward_is_the_distance_reduction() {
    let scene = fixture("one_robot.json");
    let (mut env, _) = env_reset(
        &scene,
        &config(TargetMode::Simultaneous),
        ProtectionMode::None,
        GateConfig::default(),
        3,
    )
    .unwrap();
    let m = [0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0];
    // place the target 0.4 m away along the direction the tip is about to move
    let tip = Point3::from(link_tip(&scene, &scene.home(), 0));
    let mut probe = env.clone();
    env_step(&mut probe, &m).unwrap();
    let moved = Point3::from(link_tip(&scene, &probe.gate.state.p, 0));
    let target = tip + (moved - tip).normalize() * 0.4;
    env.targets[0].position = [target.x, target.y, target.z];
    let (_, reward, _, info) = env_step(&mut env, &m).unwrap();
    assert!((reward - (0.4 - info.distances[0])).abs() < 1e-12);
    assert!(reward > 0.0);
}

#[test]
fn episode_ends_after_eighty_steps() {
    let scene = fixture("one_robot.json");
    let (mut env, _) = env_reset(
        &scene,
        &config(TargetMode::Simultaneous),
        ProtectionMode::None,
        GateConfig::default(),
        3,
    )
    .unwrap();
    for k in 1..=80 {
        let (_, _, done, _) = env_step(&mut env, &[0.0; 7]).unwrap();
        assert_eq!(done, k == 80);
    }
    assert!(env_step(&mut env, &[0.0; 7]).is_err());
}

#[test]
fn reaching_the_target_respawns_it() {
    let scene = fixture("one_robot.json");
    let (mut env, _) = env_reset(
        &scene,
        &config(TargetMode::Alternating),
        ProtectionMode::None,
        GateConfig::default(),
        3,
    )
    .unwrap();
    let tip = link_tip(&scene, &scene.home(), 0);
    env.targets[0].position = tip;
    let (_, _, _, info) = env_step(&mut env, &[0.0; 7]).unwrap();
    assert_eq!(info.reached, vec![0]);
    assert_eq!(env.reached, vec![1]);
    assert!(env.targets[0].active);
    assert_ne!(env.targets[0].position, tip);
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 16, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn rewards_telescope_and_observations_stay_bounded(
        seed in 0u64..1000,
        actions in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 7), 30),
    ) {
        let scene = fixture("one_robot.json");
        let cfg = EpisodeConfig { reach_threshold_m: 1e-12, ..config(TargetMode::Simultaneous) };
        let (mut env, _) = env_reset(&scene, &cfg, ProtectionMode::Collision, GateConfig::default(), seed).unwrap();
        let d0 = env.target_distances().unwrap()[0];
        let mut total = 0.0;
        let mut reached = 0;
        for m in &actions {
            let (obs, r, _, _) = env_step(&mut env, m).unwrap();
            total += r;
            prop_assert!(obs[..21].iter().all(|x| x.abs() <= 1.0 + 1e-9));
            prop_assert!(env.reached[0] >= reached);
            reached = env.reached[0];
        }
        let d1 = env.target_distances().unwrap()[0];
        prop_assert!((total - (d0 - d1)).abs() < 1e-9);
    }
}
