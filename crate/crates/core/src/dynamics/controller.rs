use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// First-order lag between position setpoints and actual joint positions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControllerModel {
    /// Per-joint time constant T in seconds.
    pub time_constants: Vec<f64>,
}

impl ControllerModel {
    pub const DEFAULT_TIME_CONSTANT: f64 = 0.03;

    pub fn uniform(joints: usize, time_constant: f64) -> Result<Self> {
        let c = ControllerModel {
            time_constants: vec![time_constant; joints],
        };
        c.validate()?;
        Ok(c)
    }

    pub fn default_for(joints: usize) -> Self {
        Self::uniform(joints, Self::DEFAULT_TIME_CONSTANT).expect("default time constant is valid")
    }

    /// Same joint count with every time constant replaced.
    pub fn with_time_constant(mut self, time_constant: f64) -> Self {
        self.time_constants.iter_mut().for_each(|t| *t = time_constant);
        self
    }

    pub fn validate(&self) -> Result<()> {
        match self.time_constants.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
            Some(t) => Err(Error::InvalidArgument(format!(
                "controller time constant must be > 0, got {t}"
            ))),
            None => Ok(()),
        }
    }

    pub(crate) fn discretize(&self, f_s: f64) -> Vec<Discrete> {
        self.time_constants
            .iter()
            .map(|&t| Discrete::new(t, 1.0 / f_s))
            .collect()
    }

    /// Largest time constant, used to size settling tails.
    pub fn slowest(&self) -> f64 {
        self.time_constants.iter().copied().fold(0.0, f64::max)
    }
}

/// Exact discretization of `T ẏ = u − y` for inputs that vary linearly between samples:
/// `y⁺ = α y + (1 − α − β) u + β u⁺`, with pole `α = e^(−h/T)`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Discrete {
    alpha: f64,
    beta: f64,
}

impl Discrete {
    fn new(t: f64, h: f64) -> Self {
        let alpha = (-h / t).exp();
        Discrete {
            alpha,
            beta: 1.0 - t / h * (1.0 - alpha),
        }
    }

    #[inline]
    pub(crate) fn step(&self, y: f64, u: f64, u_next: f64) -> f64 {
        self.alpha * y + (1.0 - self.alpha - self.beta) * u + self.beta * u_next
    }
}

/// Controller-filtered positions with finite-difference velocities and accelerations.
#[derive(Debug, Clone, PartialEq)]
pub struct FilteredTrajectory {
    pub q: Vec<Vec<f64>>,
    pub qd: Vec<Vec<f64>>,
    pub qdd: Vec<Vec<f64>>,
}

/// Filters uniformly sampled setpoints, starting from the first setpoint.
///
/// Velocities and accelerations use central differences, one-sided at both ends.
pub fn apply_controller(controller: &ControllerModel, setpoints: &[Vec<f64>], f_s: f64) -> Result<FilteredTrajectory> {
    let first = setpoints
        .first()
        .ok_or_else(|| Error::InvalidArgument("no setpoints to filter".into()))?;
    if !(f_s.is_finite() && f_s > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "sampling frequency must be > 0, got {f_s}"
        )));
    }
    controller.validate()?;
    let n = first.len();
    if controller.time_constants.len() != n {
        return Err(Error::Dimension {
            expected: n,
            actual: controller.time_constants.len(),
        });
    }
    if let Some(bad) = setpoints.iter().find(|s| s.len() != n) {
        return Err(Error::Dimension {
            expected: n,
            actual: bad.len(),
        });
    }
    let disc = controller.discretize(f_s);
    let mut q = Vec::with_capacity(setpoints.len());
    q.push(first.clone());
    for w in setpoints.windows(2) {
        let y = q.last().unwrap();
        q.push((0..n).map(|i| disc[i].step(y[i], w[0][i], w[1][i])).collect());
    }
    let h = 1.0 / f_s;
    let len = q.len();
    let mut qd = vec![vec![0.0; n]; len];
    let mut qdd = vec![vec![0.0; n]; len];
    if len >= 2 {
        for (k, row) in qd.iter_mut().enumerate() {
            let (lo, hi) = if k == 0 {
                (0, 1)
            } else if k == len - 1 {
                (len - 2, len - 1)
            } else {
                (k - 1, k + 1)
            };
            for i in 0..n {
                row[i] = (q[hi][i] - q[lo][i]) / ((hi - lo) as f64 * h);
            }
        }
    }
    if len >= 3 {
        for (k, row) in qdd.iter_mut().enumerate() {
            let c = k.clamp(1, len - 2);
            for i in 0..n {
                row[i] = (q[c + 1][i] - 2.0 * q[c][i] + q[c - 1][i]) / (h * h);
            }
        }
    }
    Ok(FilteredTrajectory { q, qd, qdd })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_reaches_one_minus_inverse_e_after_one_time_constant() {
        let c = ControllerModel::uniform(1, 0.03).unwrap();
        let f = 10_000.0;
        let mut u = vec![vec![0.0]];
        u.extend(std::iter::repeat_n(vec![1.0], 600));
        let y = apply_controller(&c, &u, f).unwrap();
        // The step is spread over the first sample period; its midpoint is at h/2.
        let at = 0.03 * f + 0.5;
        let k = at.floor() as usize;
        let lerp = y.q[k][0] + (y.q[k + 1][0] - y.q[k][0]) * (at - k as f64);
        assert!((lerp - (1.0 - (-1.0f64).exp())).abs() < 1e-4, "{lerp}");
    }

    #[test]
    fn constant_input_is_a_fixed_point() {
        let c = ControllerModel::default_for(2);
        let u = vec![vec![0.7, -1.2]; 50];
        let y = apply_controller(&c, &u, 240.0).unwrap();
        assert!(y.q.iter().all(|r| r == &vec![0.7, -1.2]));
        assert!(y.qd.iter().chain(&y.qdd).flatten().all(|x| *x == 0.0));
    }

    #[test]
    fn ramp_lags_by_velocity_times_time_constant() {
        let c = ControllerModel::default_for(1);
        let f = 240.0;
        let v = 0.8;
        let u: Vec<Vec<f64>> = (0..2400).map(|k| vec![v * k as f64 / f]).collect();
        let y = apply_controller(&c, &u, f).unwrap();
        let last = y.q.len() - 1;
        assert!((u[last][0] - y.q[last][0] - v * 0.03).abs() < 1e-9);
        assert!((y.qd[last - 1][0] - v).abs() < 1e-9);
    }

    #[test]
    fn empty_input_is_rejected() {
        assert!(apply_controller(&ControllerModel::default_for(1), &[], 240.0).is_err());
    }
}
