//! Levenberg–Marquardt with a forward-difference Jacobian.

use nalgebra::{DMatrix, DVector};

use crate::error::Result;

pub(crate) struct LmSettings {
    pub max_iterations: usize,
    pub tolerance_step: f64,
    pub tolerance_cost: f64,
    pub damping_init: f64,
    /// Relative finite-difference step.
    pub fd_step: f64,
}

pub(crate) struct LmOutcome {
    pub params: Vec<f64>,
    pub residuals: Vec<f64>,
    pub cost: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn cost_of(r: &[f64]) -> f64 {
    0.5 * r.iter().map(|v| v * v).sum::<f64>()
}

/// Minimizes `½‖r(p)‖²`. `typical[i]` sets the finite-difference floor of
/// parameter `i`; `project` clamps trial points onto the feasible set.
/// Residual evaluations that fail count as infinitely bad trial points.
pub(crate) fn minimize(
    mut residual: impl FnMut(&[f64]) -> Result<Vec<f64>>,
    p0: &[f64],
    typical: &[f64],
    project: impl Fn(&mut [f64]),
    s: &LmSettings,
) -> Result<LmOutcome> {
    let np = p0.len();
    let mut p = p0.to_vec();
    project(&mut p);
    let mut r = residual(&p)?;
    let mut cost = cost_of(&r);
    let mut lambda = s.damping_init;
    let mut converged = false;
    let mut iterations = 0;
    let nr = r.len();

    while iterations < s.max_iterations {
        iterations += 1;
        let mut jac = DMatrix::<f64>::zeros(nr, np);
        for j in 0..np {
            let h = s.fd_step * p[j].abs().max(typical[j].abs());
            let mut q = p.clone();
            q[j] += h;
            let (h, rq) = match residual(&q) {
                Ok(rq) => (q[j] - p[j], rq),
                // at the edge of the feasible set: difference backwards
                Err(_) => {
                    q[j] = p[j] - h;
                    (q[j] - p[j], residual(&q)?)
                }
            };
            for i in 0..nr {
                jac[(i, j)] = (rq[i] - r[i]) / h;
            }
        }
        let rv = DVector::from_column_slice(&r);
        let jtj = jac.tr_mul(&jac);
        let grad = jac.tr_mul(&rv);
        let diag: Vec<f64> = (0..np).map(|j| jtj[(j, j)].max(1e-300)).collect();

        let mut accepted = false;
        for _ in 0..30 {
            let mut m = jtj.clone();
            for j in 0..np {
                m[(j, j)] += lambda * diag[j];
            }
            let step = match m.cholesky() {
                Some(ch) => ch.solve(&(-&grad)),
                None => {
                    lambda *= 4.0;
                    continue;
                }
            };
            let mut q: Vec<f64> = p.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            project(&mut q);
            let trial = match residual(&q) {
                Ok(rq) if rq.iter().all(|v| v.is_finite()) => rq,
                _ => {
                    lambda *= 4.0;
                    continue;
                }
            };
            let tcost = cost_of(&trial);
            if tcost < cost {
                let dp: f64 = q.iter().zip(&p).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                let pn: f64 = p.iter().map(|v| v * v).sum::<f64>().sqrt();
                let rel_cost = (cost - tcost) / cost.max(f64::MIN_POSITIVE);
                p = q;
                r = trial;
                cost = tcost;
                lambda = (lambda / 3.0).max(1e-12);
                accepted = true;
                if dp <= s.tolerance_step * (pn + s.tolerance_step) || rel_cost <= s.tolerance_cost {
                    converged = true;
                }
                break;
            }
            lambda *= 2.0;
        }
        if !accepted {
            // no descent direction left at any damping: stationary point
            converged = true;
        }
        if converged || cost == 0.0 {
            converged = true;
            break;
        }
    }
    Ok(LmOutcome {
        params: p,
        residuals: r,
        cost,
        iterations,
        converged,
    })
}
