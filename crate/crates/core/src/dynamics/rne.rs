use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::robot_model::{forward_kinematics, RobotModel};

/// Joint torques (N·m) of a serial chain from recursive Newton–Euler, plus friction.
///
/// Gravity enters as an upward acceleration of the base; all quantities are expressed in
/// the world frame.
pub fn inverse_dynamics(
    model: &RobotModel,
    q: &[f64],
    qd: &[f64],
    qdd: &[f64],
    gravity: &Vector3<f64>,
) -> Result<Vec<f64>> {
    let n = model.dof();
    for v in [q, qd, qdd] {
        if v.len() != n {
            return Err(Error::Dimension {
                expected: n,
                actual: v.len(),
            });
        }
    }
    let frames = forward_kinematics(model, q)?;
    let mut z = Vec::with_capacity(n);
    let mut origin = Vec::with_capacity(n);
    let mut com = Vec::with_capacity(n);
    let mut force = Vec::with_capacity(n);
    let mut moment = Vec::with_capacity(n);

    let mut omega = Vector3::zeros();
    let mut alpha = Vector3::zeros();
    let mut acc = -gravity;
    let mut prev_origin = model.base_iso.translation.vector;
    for (i, link) in model.links.iter().enumerate() {
        let frame = &frames[i];
        let zi = frame.rotation * link.axis.into_inner();
        let oi = frame.translation.vector;
        let r = oi - prev_origin;
        acc += alpha.cross(&r) + omega.cross(&omega.cross(&r));
        let spin = zi * qd[i];
        alpha += zi * qdd[i] + omega.cross(&spin);
        omega += spin;

        let ci = frame.rotation * link.com;
        let acc_c = acc + alpha.cross(&ci) + omega.cross(&omega.cross(&ci));
        let rot = frame.rotation.to_rotation_matrix();
        let inertia = rot.matrix() * link.inertia * rot.matrix().transpose();
        force.push(acc_c * link.mass);
        moment.push(inertia * alpha + omega.cross(&(inertia * omega)));
        z.push(zi);
        origin.push(oi);
        com.push(ci);
        prev_origin = oi;
    }

    let mut tau = vec![0.0; n];
    let mut f_next = Vector3::zeros();
    let mut n_next = Vector3::zeros();
    for i in (0..n).rev() {
        let lever_next = if i + 1 < n {
            origin[i + 1] - origin[i]
        } else {
            Vector3::zeros()
        };
        let f = force[i] + f_next;
        let m = moment[i] + com[i].cross(&force[i]) + n_next + lever_next.cross(&f_next);
        let fr = &model.friction[i];
        let coulomb = if qd[i] > 0.0 {
            fr.coulomb
        } else if qd[i] < 0.0 {
            -fr.coulomb
        } else {
            0.0
        };
        tau[i] = z[i].dot(&m) + fr.viscous * qd[i] + coulomb;
        f_next = f;
        n_next = m;
    }
    Ok(tau)
}
