//! Projection of a point onto a box intersected with a few half-spaces.

/// Half-space `g·x >= b`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearConstraint {
    pub g: Vec<f64>,
    pub b: f64,
}

impl LinearConstraint {
    pub fn residual(&self, x: &[f64]) -> f64 {
        dot(&self.g, x) - self.b
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QpSolution {
    pub x: Vec<f64>,
    pub feasible: bool,
    /// Multiplier of each constraint.
    pub multipliers: Vec<f64>,
}

/// Constraint violation accepted as satisfied.
pub const QP_TOL: f64 = 1e-9;
const MAX_SWEEPS: usize = 20_000;
const MAX_MULTIPLIER: f64 = 1e12;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn primal(target: &[f64], lo: &[f64], hi: &[f64], cons: &[LinearConstraint], lambda: &[f64]) -> Vec<f64> {
    (0..target.len())
        .map(|i| {
            let shift: f64 = cons.iter().zip(lambda).map(|(c, l)| l * c.g[i]).sum();
            (target[i] + shift).clamp(lo[i], hi[i])
        })
        .collect()
}

/// Minimizes `|x - target|²` over `lo <= x <= hi` and `g_k·x >= b_k`.
///
/// Uses coordinate ascent on the dual: for multipliers `λ >= 0` the box-constrained minimizer is
/// `clamp(target + Σ λ_k g_k)`, and each constraint's residual is nondecreasing in its own
/// multiplier, so every coordinate update is a one-dimensional root search. When the feasible
/// set is empty the multipliers grow without bound; the returned `x` is then the last iterate
/// and `feasible` is false.
pub fn solve_box_qp(target: &[f64], lo: &[f64], hi: &[f64], cons: &[LinearConstraint]) -> QpSolution {
    let n = target.len();
    let mut lambda = vec![0.0; cons.len()];
    // a constraint that even the best box corner cannot satisfy makes the set empty
    for c in cons {
        let best: f64 = (0..n)
            .map(|i| if c.g[i] >= 0.0 { c.g[i] * hi[i] } else { c.g[i] * lo[i] })
            .sum();
        if best - c.b < -QP_TOL {
            return QpSolution {
                x: target.iter().enumerate().map(|(i, t)| t.clamp(lo[i], hi[i])).collect(),
                feasible: false,
                multipliers: lambda,
            };
        }
    }
    for _ in 0..MAX_SWEEPS {
        let mut change: f64 = 0.0;
        for k in 0..cons.len() {
            let old = lambda[k];
            let residual_at = |l: f64, lambda: &mut Vec<f64>| {
                lambda[k] = l;
                cons[k].residual(&primal(target, lo, hi, cons, lambda))
            };
            let next = if residual_at(0.0, &mut lambda) >= 0.0 {
                0.0
            } else {
                let mut upper = old.max(1e-6);
                while residual_at(upper, &mut lambda) < 0.0 && upper < MAX_MULTIPLIER {
                    upper *= 2.0;
                }
                let mut lower = 0.0;
                for _ in 0..200 {
                    let mid = 0.5 * (lower + upper);
                    if mid <= lower || mid >= upper {
                        break;
                    }
                    if residual_at(mid, &mut lambda) < 0.0 {
                        lower = mid;
                    } else {
                        upper = mid;
                    }
                }
                upper
            };
            lambda[k] = next;
            change = change.max((next - old).abs() / (1.0 + old.abs()));
        }
        if change < 1e-14 || lambda.iter().any(|l| *l >= MAX_MULTIPLIER) {
            break;
        }
    }
    let x = primal(target, lo, hi, cons, &lambda);
    let feasible = cons.iter().all(|c| c.residual(&x) >= -QP_TOL);
    QpSolution {
        x,
        feasible,
        multipliers: lambda,
    }
}
