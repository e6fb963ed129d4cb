//! Side-by-side run of the damper baseline and the safety gate on one action script.

use serde::{Deserialize, Serialize};

use super::{damper_min_rate, damper_step, DamperParams};
use crate::collision::scene_pair_distances;
use crate::error::{Error, Result};
use crate::kinematic_limits::{sample_setpoints, KinematicState, TrajectorySegment};
use crate::robot_model::{Scene, SceneDoc};
use crate::safety_gate::{gate_step, init_gate, GateConfig, ProtectionMode};

/// Demo scenario: scene, damper parameters and the action script both controllers receive.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FtDemo {
    pub scene: SceneDoc,
    pub damper: DamperParams,
    pub f_n: f64,
    pub f_c: f64,
    /// Rate of the dense distance rows.
    pub measure_hz: f64,
    /// One action per decision step, applied from the home pose.
    pub actions: Vec<Vec<f64>>,
}

/// One dense sample of either controller.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemoRow {
    pub controller: String,
    pub t: f64,
    /// Smallest pair distance.
    pub distance: f64,
    /// Rate of change of that pair distance.
    pub rate: f64,
    /// Damper bound for `distance`; `-inf` outside the influence zone.
    pub min_rate: f64,
    /// Damper constraints were satisfiable in this step (always true for the gate).
    pub feasible: bool,
    /// The gate executed its backup in this step (always false for the baseline).
    pub adapted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FtDemoReport {
    pub rows: Vec<DemoRow>,
    pub baseline_infeasible_steps: usize,
    /// Start of the first infeasible decision interval.
    pub baseline_first_infeasible: Option<f64>,
    pub baseline_min_distance: f64,
    /// Minimum over the dense rows of the gate run.
    pub gate_min_distance: f64,
    /// Minimum over the gate's own collision samples.
    pub gate_min_distance_checked: f64,
    pub gate_adapted_steps: usize,
}

const RATE_STEP: f64 = 1e-6;

fn min_distance(scene: &Scene, q: &[f64]) -> Result<(usize, f64)> {
    scene_pair_distances(scene, q)?
        .iter()
        .map(|p| p.distance)
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or_else(|| Error::InvalidArgument("demo scene has no collision pairs".into()))
}

fn dense_rows(
    scene: &Scene,
    label: &str,
    segments: &[TrajectorySegment],
    flags: &[(bool, bool)],
    hz: f64,
    params: &DamperParams,
) -> Result<Vec<DemoRow>> {
    let dt = segments.first().map(|s| s.duration).unwrap_or(1.0);
    let mut rows = vec![];
    for (t, s) in sample_setpoints(segments, hz)? {
        let (pair, d) = min_distance(scene, &s.p)?;
        // directional derivative of the closest pair along the joint velocity
        let shifted = |sign: f64| -> Result<f64> {
            let q: Vec<f64> = s.p.iter().zip(&s.v).map(|(p, v)| p + sign * RATE_STEP * v).collect();
            Ok(scene_pair_distances(scene, &q)?[pair].distance)
        };
        let rate = (shifted(1.0)? - shifted(-1.0)?) / (2.0 * RATE_STEP);
        let k = ((t / dt) as usize).min(flags.len().saturating_sub(1));
        rows.push(DemoRow {
            controller: label.into(),
            t,
            distance: d,
            rate,
            min_rate: damper_min_rate(d, params),
            feasible: flags[k].0,
            adapted: flags[k].1,
        });
    }
    Ok(rows)
}

/// Runs the damper baseline and the gate (collision mode) on the same script.
pub fn run_ft_demo(demo: &FtDemo) -> Result<FtDemoReport> {
    demo.damper.validate()?;
    let scene = demo.scene.clone().into_scene()?;
    let dt = 1.0 / demo.f_n;
    let limits = scene.joint_limits();
    let start = KinematicState::at_rest(scene.home());

    let mut state = start.clone();
    let mut baseline = vec![];
    let mut baseline_flags = vec![];
    for m in &demo.actions {
        let step = damper_step(&state, m, &scene, &demo.damper, &limits, dt)?;
        state = step.segment.end_state();
        baseline.push(step.segment);
        baseline_flags.push((step.feasible, false));
    }

    let config = GateConfig {
        f_n: demo.f_n,
        f_c: demo.f_c,
        ..GateConfig::default()
    };
    let mut gate = init_gate(&scene, start, ProtectionMode::Collision, config)?;
    let mut gated = vec![];
    let mut gate_flags = vec![];
    let mut checked = f64::INFINITY;
    for m in &demo.actions {
        let out = gate_step(&mut gate, &scene, m)?;
        gate_flags.push((true, out.adapted));
        gated.push(out.executed);
    }
    for (_, s) in sample_setpoints(&gated, demo.f_c)? {
        checked = checked.min(min_distance(&scene, &s.p)?.1);
    }

    let mut rows = dense_rows(
        &scene,
        "baseline",
        &baseline,
        &baseline_flags,
        demo.measure_hz,
        &demo.damper,
    )?;
    let gate_rows = dense_rows(&scene, "gate", &gated, &gate_flags, demo.measure_hz, &demo.damper)?;
    let min_of = |r: &[DemoRow]| r.iter().map(|x| x.distance).fold(f64::INFINITY, f64::min);
    let baseline_min_distance = min_of(&rows);
    let gate_min_distance = min_of(&gate_rows);
    rows.extend(gate_rows);
    let infeasible: Vec<usize> = (0..baseline_flags.len()).filter(|k| !baseline_flags[*k].0).collect();
    Ok(FtDemoReport {
        rows,
        baseline_infeasible_steps: infeasible.len(),
        baseline_first_infeasible: infeasible.first().map(|k| *k as f64 * dt),
        baseline_min_distance,
        gate_min_distance,
        gate_min_distance_checked: checked,
        gate_adapted_steps: gate_flags.iter().filter(|f| f.1).count(),
    })
}
