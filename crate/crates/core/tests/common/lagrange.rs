use nalgebra::{DMatrix, DVector, Vector3};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use safe_motion::robot_model::{forward_kinematics, RobotModel};

/// Mass matrix from geometric Jacobians of every link's center of mass.
pub fn mass_matrix(model: &RobotModel, q: &[f64]) -> DMatrix<f64> {
    let n = q.len();
    let frames = forward_kinematics(model, q).unwrap();
    let z: Vec<Vector3<f64>> = (0..n)
        .map(|j| frames[j].rotation * model.links[j].axis.into_inner())
        .collect();
    let o: Vec<Vector3<f64>> = frames.iter().map(|f| f.translation.vector).collect();
    let mut m = DMatrix::zeros(n, n);
    for (i, (frame, link)) in frames.iter().zip(&model.links).enumerate() {
        let c = frame * nalgebra::Point3::from(link.com);
        let rot = frame.rotation.to_rotation_matrix();
        let iw = rot.matrix() * link.inertia * rot.matrix().transpose();
        let mut jv = DMatrix::zeros(3, n);
        let mut jw = DMatrix::zeros(3, n);
        for j in 0..=i {
            let v = z[j].cross(&(c.coords - o[j]));
            for r in 0..3 {
                jv[(r, j)] = v[r];
                jw[(r, j)] = z[j][r];
            }
        }
        let iw = DMatrix::from_iterator(3, 3, iw.iter().copied());
        m += jv.transpose() * &jv * link.mass + jw.transpose() * iw * &jw;
    }
    m
}

pub fn potential(model: &RobotModel, q: &[f64], g: &Vector3<f64>) -> f64 {
    let frames = forward_kinematics(model, q).unwrap();
    model
        .links
        .iter()
        .zip(&frames)
        .map(|(l, f)| -l.mass * g.dot(&(f * nalgebra::Point3::from(l.com)).coords))
        .sum()
}

/// τ = M q̈ + Ṁ q̇ − ∂T/∂q + ∂V/∂q with q-derivatives by central differences.
pub fn lagrangian_torque(model: &RobotModel, q: &[f64], qd: &[f64], qdd: &[f64], g: &Vector3<f64>) -> Vec<f64> {
    let n = q.len();
    let h = 1e-6;
    let qd_v = DVector::from_column_slice(qd);
    let shifted = |k: usize, s: f64| {
        let mut x = q.to_vec();
        x[k] += s;
        x
    };
    let dm: Vec<DMatrix<f64>> = (0..n)
        .map(|k| (mass_matrix(model, &shifted(k, h)) - mass_matrix(model, &shifted(k, -h))) / (2.0 * h))
        .collect();
    let mut m_dot = DMatrix::zeros(n, n);
    for k in 0..n {
        m_dot += &dm[k] * qd[k];
    }
    let mut tau = mass_matrix(model, q) * DVector::from_column_slice(qdd) + m_dot * &qd_v;
    for k in 0..n {
        let dt_dq = 0.5 * (qd_v.transpose() * &dm[k] * &qd_v)[(0, 0)];
        let dv_dq = (potential(model, &shifted(k, h), g) - potential(model, &shifted(k, -h), g)) / (2.0 * h);
        tau[k] += dv_dq - dt_dq;
    }
    tau.iter().copied().collect()
}

pub fn random_state(rng: &mut ChaCha8Rng, n: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let mut v = |s: f64| (0..n).map(|_| rng.gen_range(-s..s)).collect::<Vec<f64>>();
    (v(3.0), v(2.0), v(10.0))
}
