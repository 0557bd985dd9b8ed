//! Damped Gauss-Newton least-squares engine.
//!
//! Jacobians come from central finite differences with relative step 1e-6.
//! Box constraints are handled by projecting each trial step back onto the
//! box. Damping follows the usual Levenberg scheme on the scaled normal
//! matrix.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};

const MAX_ITER: usize = 200;
const STEP_TOL: f64 = 1e-8;
const RESIDUAL_TOL: f64 = 1e-10;
const FD_REL_STEP: f64 = 1e-6;

/// Outcome of a least-squares fit.
#[derive(Debug, Clone, Serialize)]
pub struct FitResult {
    pub names: Vec<String>,
    pub values: Vec<f64>,
    /// One standard error per parameter from the residual-scaled inverse
    /// normal matrix.
    pub stderr: Vec<f64>,
    /// Covariance matrix, row-major.
    pub covariance: Vec<f64>,
    /// Sum of squared (weighted) residuals at the solution.
    pub residual_norm: f64,
    pub converged: bool,
    pub n_iter: usize,
    /// False when the normal matrix was rank deficient at the solution.
    pub stderr_reliable: bool,
    pub warnings: Vec<String>,
}

impl FitResult {
    pub fn value(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|i| self.values[i])
    }

    pub fn stderr_of(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|i| self.stderr[i])
    }

    pub fn cov(&self, i: usize, j: usize) -> f64 {
        self.covariance[i * self.names.len() + j]
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("FitResult serializes")
    }

    pub fn push_warning(&mut self, w: impl Into<String>) {
        self.warnings.push(w.into());
    }
}

fn residual_vector<F>(f: &F, p: &[f64]) -> Result<DVector<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let r = f(p)?;
    if r.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("model returned a non-finite residual".into()));
    }
    Ok(DVector::from_vec(r))
}

fn jacobian<F>(f: &F, p: &[f64], n_res: usize) -> Result<DMatrix<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let n_par = p.len();
    let mut jac = DMatrix::zeros(n_res, n_par);
    let mut work = p.to_vec();
    for j in 0..n_par {
        let h = FD_REL_STEP * p[j].abs().max(1e-3);
        work[j] = p[j] + h;
        let hi = residual_vector(f, &work)?;
        work[j] = p[j] - h;
        let lo = residual_vector(f, &work)?;
        work[j] = p[j];
        for i in 0..n_res {
            jac[(i, j)] = (hi[i] - lo[i]) / (2.0 * h);
        }
    }
    Ok(jac)
}

fn project(p: &mut [f64], bounds: Option<&[(f64, f64)]>) {
    if let Some(b) = bounds {
        for (v, (lo, hi)) in p.iter_mut().zip(b) {
            *v = v.clamp(*lo, *hi);
        }
    }
}

/// Minimize the sum of squared residuals returned by `f` for the named
/// parameters, starting at `initial`, optionally inside box `bounds`.
///
/// `f` must return one residual per data point, already weighted. Returns a
/// converged flag rather than an error when the iteration budget runs out.
pub fn least_squares<F>(
    f: F,
    names: &[&str],
    initial: &[f64],
    bounds: Option<&[(f64, f64)]>,
) -> Result<FitResult>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let n_par = initial.len();
    if names.len() != n_par {
        return Err(Error::Domain("one name per parameter required".into()));
    }
    if let Some(b) = bounds {
        if b.len() != n_par {
            return Err(Error::Domain("one bound pair per parameter required".into()));
        }
        for ((lo, hi), v) in b.iter().zip(initial) {
            if v < lo || v > hi {
                return Err(Error::Domain(format!(
                    "initial value {v} outside bounds [{lo}, {hi}]"
                )));
            }
        }
    }

    let mut p = initial.to_vec();
    let mut r = residual_vector(&f, &p)
        .map_err(|_| Error::Domain("model not finite at the initial guess".into()))?;
    let n_res = r.len();
    if n_res <= n_par {
        return Err(Error::InsufficientData(format!(
            "{n_res} residuals cannot constrain {n_par} parameters"
        )));
    }
    let mut ssr = r.norm_squared();
    let mut lambda = 1e-4;
    let mut converged = false;
    let mut n_iter = 0;
    let mut warnings = Vec::new();

    while n_iter < MAX_ITER {
        n_iter += 1;
        let jac = jacobian(&f, &p, n_res)?;
        let jtj = jac.transpose() * &jac;
        let jtr = jac.transpose() * &r;
        let grad_norm = jtr.amax();

        let mut accepted = false;
        for _ in 0..25 {
            let mut damped = jtj.clone();
            for k in 0..n_par {
                damped[(k, k)] += lambda * jtj[(k, k)].max(1e-300);
            }
            let step = match damped.clone().lu().solve(&(-&jtr)) {
                Some(s) => s,
                None => {
                    lambda *= 10.0;
                    continue;
                }
            };
            let mut trial: Vec<f64> = p.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            project(&mut trial, bounds);
            let trial_r = match residual_vector(&f, &trial) {
                Ok(v) => v,
                Err(_) => {
                    lambda *= 10.0;
                    continue;
                }
            };
            let trial_ssr = trial_r.norm_squared();
            if trial_ssr <= ssr {
                let rel_step = p
                    .iter()
                    .zip(&trial)
                    .map(|(a, b)| (a - b).abs() / a.abs().max(1.0))
                    .fold(0.0f64, f64::max);
                let rel_impr = (ssr - trial_ssr) / ssr.max(1e-300);
                p = trial;
                r = trial_r;
                ssr = trial_ssr;
                lambda = (lambda / 3.0).max(1e-12);
                accepted = true;
                if rel_step < STEP_TOL || rel_impr < RESIDUAL_TOL || grad_norm < 1e-14 {
                    converged = true;
                }
                break;
            }
            lambda *= 5.0;
        }
        if converged || !accepted {
            if !accepted {
                // no downhill step available: treat a tiny gradient as converged
                converged = grad_norm < 1e-10 * (1.0 + ssr);
            }
            break;
        }
    }

    // covariance from the residual-scaled inverse normal matrix
    let jac = jacobian(&f, &p, n_res)?;
    let jtj = jac.transpose() * &jac;
    let dof = (n_res - n_par).max(1) as f64;
    let s2 = ssr / dof;
    // try_inverse can return garbage for a numerically singular matrix, so
    // gate on the spectral condition number of the normal matrix
    let eigs = jtj.clone().symmetric_eigenvalues();
    let eig_max = eigs.iter().fold(0.0f64, |a, e| a.max(*e));
    let eig_min = eigs.iter().fold(f64::INFINITY, |a, e| a.min(*e));
    let well_conditioned = eig_min > 1e-12 * eig_max && eig_min > 0.0;
    let inverse = if well_conditioned {
        jtj.clone().try_inverse()
    } else {
        None
    };
    let (covariance, stderr, reliable) = match inverse {
        Some(inv) => {
            let cov = &inv * s2;
            let mut se = Vec::with_capacity(n_par);
            let mut ok = true;
            for k in 0..n_par {
                let v = cov[(k, k)];
                if v < 0.0 || !v.is_finite() {
                    ok = false;
                    se.push(f64::NAN);
                } else {
                    se.push(v.sqrt());
                }
            }
            (cov.as_slice().to_vec(), se, ok)
        }
        None => {
            warnings.push("rank-deficient normal matrix: stderr unreliable".to_string());
            (vec![f64::NAN; n_par * n_par], vec![f64::NAN; n_par], false)
        }
    };
    if !reliable && warnings.is_empty() {
        warnings.push("non-finite covariance: stderr unreliable".to_string());
    }

    Ok(FitResult {
        names: names.iter().map(|s| s.to_string()).collect(),
        values: p,
        stderr,
        covariance,
        residual_norm: ssr,
        converged,
        n_iter,
        stderr_reliable: reliable,
        warnings,
    })
}
