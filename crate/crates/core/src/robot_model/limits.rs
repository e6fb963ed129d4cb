use serde::{Deserialize, Serialize};

/// Per-joint position, velocity, acceleration, jerk and torque bounds.
///
/// Units: rad, rad/s, rad/s², rad/s³, N·m.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointLimits {
    pub p_min: f64,
    pub p_max: f64,
    pub v_min: f64,
    pub v_max: f64,
    pub a_min: f64,
    pub a_max: f64,
    pub j_min: f64,
    pub j_max: f64,
    pub tau_min: f64,
    pub tau_max: f64,
}

impl JointLimits {
    /// Checks the ordering invariants; the message names the violated one.
    pub fn validate(&self) -> Result<(), String> {
        let all = [
            self.p_min,
            self.p_max,
            self.v_min,
            self.v_max,
            self.a_min,
            self.a_max,
            self.j_min,
            self.j_max,
            self.tau_min,
            self.tau_max,
        ];
        if !all.iter().all(|x| x.is_finite()) {
            return Err("all limits must be finite".into());
        }
        if self.p_min >= self.p_max {
            return Err(format!("p_min < p_max violated ({} >= {})", self.p_min, self.p_max));
        }
        let straddles = |name: &str, lo: f64, hi: f64| {
            if lo < 0.0 && 0.0 < hi {
                Ok(())
            } else {
                Err(format!("{name}_min < 0 < {name}_max violated ({lo}, {hi})"))
            }
        };
        straddles("v", self.v_min, self.v_max)?;
        straddles("a", self.a_min, self.a_max)?;
        straddles("j", self.j_min, self.j_max)?;
        straddles("tau", self.tau_min, self.tau_max)?;
        Ok(())
    }

    pub fn p_mid(&self) -> f64 {
        0.5 * (self.p_min + self.p_max)
    }

    /// Position mapped so that the bounds land on ±1.
    pub fn normalize_position(&self, p: f64) -> f64 {
        (p - self.p_mid()) / (0.5 * (self.p_max - self.p_min))
    }

    pub fn normalize_velocity(&self, v: f64) -> f64 {
        one_sided(v, self.v_min, self.v_max)
    }

    pub fn normalize_acceleration(&self, a: f64) -> f64 {
        one_sided(a, self.a_min, self.a_max)
    }

    pub fn normalize_jerk(&self, j: f64) -> f64 {
        one_sided(j, self.j_min, self.j_max)
    }

    pub fn normalize_torque(&self, tau: f64) -> f64 {
        one_sided(tau, self.tau_min, self.tau_max)
    }
}

/// `x / hi` for positive values and `x / |lo|` for negative ones, signed.
fn one_sided(x: f64, lo: f64, hi: f64) -> f64 {
    if x >= 0.0 {
        if hi > 0.0 {
            x / hi
        } else if x == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else if lo < 0.0 {
        x / -lo
    } else {
        f64::NEG_INFINITY
    }
}

/// Multiplicative factors applied to the maximum values of a limit set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitScale {
    pub pos_factor: f64,
    pub vel_factor: f64,
    pub acc_factor: f64,
    pub jerk_factor: f64,
    pub tor_factor: f64,
}

impl LimitScale {
    /// Full limits.
    pub const A: LimitScale = LimitScale {
        pos_factor: 1.0,
        vel_factor: 1.0,
        acc_factor: 1.0,
        jerk_factor: 1.0,
        tor_factor: 1.0,
    };

    /// Reduced limits.
    pub const B: LimitScale = LimitScale {
        pos_factor: 0.85,
        vel_factor: 0.5,
        acc_factor: 0.4,
        jerk_factor: 1.0,
        tor_factor: 0.6,
    };

    pub fn validate(&self) -> Result<(), String> {
        let f = [
            self.pos_factor,
            self.vel_factor,
            self.acc_factor,
            self.jerk_factor,
            self.tor_factor,
        ];
        if f.iter().all(|x| *x > 0.0 && *x <= 1.0) {
            Ok(())
        } else {
            Err(format!("limit factors must lie in (0, 1], got {f:?}"))
        }
    }
}

/// Applies `scale` to `limits`.
///
/// Position bounds contract about their midpoint. The jerk bound is the jerk factor
/// times the acceleration-consistent jerk: scaling the acceleration interval by `acc_factor`
/// scales `(a_max - a_min)·f_N` by the same factor, so the jerk bound follows it.
pub fn scale_limits(limits: &JointLimits, scale: &LimitScale) -> JointLimits {
    let mid = limits.p_mid();
    let half = 0.5 * (limits.p_max - limits.p_min) * scale.pos_factor;
    let jerk = scale.jerk_factor * scale.acc_factor;
    JointLimits {
        p_min: mid - half,
        p_max: mid + half,
        v_min: limits.v_min * scale.vel_factor,
        v_max: limits.v_max * scale.vel_factor,
        a_min: limits.a_min * scale.acc_factor,
        a_max: limits.a_max * scale.acc_factor,
        j_min: limits.j_min * jerk,
        j_max: limits.j_max * jerk,
        tau_min: limits.tau_min * scale.tor_factor,
        tau_max: limits.tau_max * scale.tor_factor,
    }
}

/// Largest jerk produced by linearly interpolating between any two admissible
/// accelerations over one decision interval of length `1 / f_n`.
pub fn derive_jerk_limit(a_min: f64, a_max: f64, f_n: f64) -> f64 {
    (a_max - a_min) * f_n
}
