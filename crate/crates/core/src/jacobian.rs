//! Jacobian of the residual with respect to positions.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::cc::{
    check_collisions, check_dims, form_center_lambda, raw_center, raw_inertia, raw_potential,
    raw_residual, Configuration, Form, Masses,
};
use crate::error::{Error, Result};
use crate::parallel_enabled;

pub const DEFAULT_FD_STEP: f64 = 1e-6;

/// Exact Jacobian of [`crate::cc::residual`].
///
/// For Form II the multiplier is a constant, so only its value enters; the
/// center-of-mass dependence still contributes `-lambda m_i m_j / M`.
pub fn jacobian_analytic(form: Form, q: &Configuration, m: &Masses) -> Result<DMatrix<f64>> {
    check_dims(q, m)?;
    Ok(raw_jacobian(form, q.coords(), m.as_slice(), None))
}

/// Jacobian of the Form II residual with a caller-fixed multiplier.
pub fn jacobian_analytic_fixed_lambda(
    q: &Configuration,
    m: &Masses,
    lambda: f64,
) -> Result<DMatrix<f64>> {
    check_dims(q, m)?;
    Ok(raw_jacobian(
        Form::II,
        q.coords(),
        m.as_slice(),
        Some(lambda),
    ))
}

/// Central-difference Jacobian, one column per coordinate.
pub fn jacobian_fd(form: Form, q: &Configuration, m: &Masses, step: f64) -> Result<DMatrix<f64>> {
    check_dims(q, m)?;
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::Precondition(format!(
            "finite-difference step {step} must be positive"
        )));
    }
    let x = q.coords();
    let w = m.as_slice();
    let lambda = match form {
        Form::II => Some(form_center_lambda(form, x, w, None).1),
        _ => None,
    };
    let column = |col: usize| -> Result<Vec<f64>> {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[col] += step;
        xm[col] -= step;
        check_collisions(&xp)?;
        check_collisions(&xm)?;
        let fp = raw_residual(form, &xp, w, lambda);
        let fm = raw_residual(form, &xm, w, lambda);
        Ok(fp
            .iter()
            .zip(&fm)
            .map(|(a, b)| (a - b) / (2.0 * step))
            .collect())
    };
    let n = x.len();
    let cols: Vec<Vec<f64>> = if parallel_enabled() {
        (0..n).into_par_iter().map(column).collect::<Result<_>>()?
    } else {
        (0..n).map(column).collect::<Result<_>>()?
    };
    Ok(DMatrix::from_fn(n, n, |r, c| cols[c][r]))
}

/// Block-diagonal rotation acting on flat coordinates.
pub fn rotation_block(n_bodies: usize, theta: f64) -> DMatrix<f64> {
    let (s, c) = theta.sin_cos();
    let mut a = DMatrix::zeros(2 * n_bodies, 2 * n_bodies);
    for i in 0..n_bodies {
        a[(2 * i, 2 * i)] = c;
        a[(2 * i, 2 * i + 1)] = -s;
        a[(2 * i + 1, 2 * i)] = s;
        a[(2 * i + 1, 2 * i + 1)] = c;
    }
    a
}

pub(crate) fn raw_jacobian(form: Form, q: &[f64], m: &[f64], lambda: Option<f64>) -> DMatrix<f64> {
    let n = m.len();
    let dim = 2 * n;
    let (c, lambda) = form_center_lambda(form, q, m, lambda);
    let mut jac = DMatrix::zeros(dim, dim);

    // Pair interaction m_i m_j (Id/r^3 - 3 d d^T / r^5), d = q_j - q_i.
    for i in 0..n {
        for j in i + 1..n {
            let d = [q[2 * j] - q[2 * i], q[2 * j + 1] - q[2 * i + 1]];
            let r2 = d[0] * d[0] + d[1] * d[1];
            let r3 = r2 * r2.sqrt();
            let r5 = r3 * r2;
            let mm = m[i] * m[j];
            for a in 0..2 {
                for b in 0..2 {
                    let id = if a == b { 1.0 } else { 0.0 };
                    let k = mm * (id / r3 - 3.0 * d[a] * d[b] / r5);
                    jac[(2 * i + a, 2 * j + b)] += k;
                    jac[(2 * j + a, 2 * i + b)] += k;
                    jac[(2 * i + a, 2 * i + b)] -= k;
                    jac[(2 * j + a, 2 * j + b)] -= k;
                }
            }
        }
    }

    let total: f64 = m.iter().sum();
    for i in 0..n {
        for a in 0..2 {
            jac[(2 * i + a, 2 * i + a)] += lambda * m[i];
            if form != Form::I {
                for j in 0..n {
                    jac[(2 * i + a, 2 * j + a)] -= lambda * m[i] * m[j] / total;
                }
            }
        }
    }

    if form != Form::II {
        // lambda = U/I depends on q; add m_i (q_i - c) (x) grad(lambda).
        let ic = match form {
            Form::I => [0.0, 0.0],
            _ => raw_center(q, m),
        };
        let u = raw_potential(q, m);
        let inertia = raw_inertia(q, m, ic);
        let mut grad_u = vec![0.0; dim];
        for i in 0..n {
            for j in i + 1..n {
                let dx = q[2 * j] - q[2 * i];
                let dy = q[2 * j + 1] - q[2 * i + 1];
                let r2 = dx * dx + dy * dy;
                let w = m[i] * m[j] / (r2 * r2.sqrt());
                grad_u[2 * i] += w * dx;
                grad_u[2 * i + 1] += w * dy;
                grad_u[2 * j] -= w * dx;
                grad_u[2 * j + 1] -= w * dy;
            }
        }
        let grad_lambda: Vec<f64> = (0..dim)
            .map(|k| {
                let grad_i = 2.0 * m[k / 2] * (q[k] - ic[k % 2]);
                (grad_u[k] * inertia - u * grad_i) / (inertia * inertia)
            })
            .collect();
        for i in 0..n {
            for a in 0..2 {
                let v = m[i] * (q[2 * i + a] - c[a]);
                for (k, g) in grad_lambda.iter().enumerate() {
                    jac[(2 * i + a, k)] += v * g;
                }
            }
        }
    }
    jac
}
