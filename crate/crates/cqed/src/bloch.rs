//! Cavity-modified optical Bloch equations for a two-level emitter after
//! adiabatic elimination of the cavity field.
//!
//! Rates are taken literally as inverse-time units: a `gamma0` of x means
//! the excited population relaxes as exp(-x·(C f + 1)·t) in the same time
//! unit the integrator uses. The equations are internally written for
//! emitter-minus-laser detunings; [`DriveSpec`] stores laser-minus-emitter
//! (matching [`crate::params::Detuning`]) and the sign flip is applied here.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::CqedParams;
use crate::response::{cooperativities, spectral_mismatch};

/// Expectation values of the emitter operators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochState {
    /// ⟨σ_ge⟩, the optical coherence.
    pub sigma_ge: Complex64,
    /// ⟨σ_z⟩, the population inversion.
    pub sigma_z: f64,
}

impl BlochState {
    pub const GROUND: BlochState = BlochState {
        sigma_ge: Complex64::new(0.0, 0.0),
        sigma_z: -1.0,
    };

    pub fn new(sigma_ge: Complex64, sigma_z: f64) -> Result<Self> {
        let s = BlochState { sigma_ge, sigma_z };
        let v = s.physicality_violation();
        if v > 1e-12 {
            return Err(Error::Domain(format!(
                "unphysical initial state: violation {v:.3e}"
            )));
        }
        Ok(s)
    }

    /// How far the state sits outside the physical region
    /// σ_z ∈ [−1, 1], |σ_ge|² ≤ (1 − σ_z²)/4. Zero for physical states.
    pub fn physicality_violation(&self) -> f64 {
        let z_excess = (self.sigma_z.abs() - 1.0).max(0.0);
        let bound = ((1.0 - self.sigma_z * self.sigma_z) / 4.0).max(0.0);
        let coh_excess = (self.sigma_ge.norm_sqr() - bound).max(0.0);
        z_excess.max(coh_excess)
    }
}

/// Coherent drive specification.
///
/// `y` is the dimensionless drive Y = 4g√κ_in·⟨a_in⟩/(κγ0). Detunings are
/// laser-minus-emitter (`delta`) and laser-minus-cavity (`delta_c`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveSpec {
    pub y: Complex64,
    pub delta: f64,
    pub delta_c: f64,
}

impl DriveSpec {
    /// Dimensionless drive from a physical input amplitude.
    pub fn from_input_amplitude(a_in: Complex64, params: &CqedParams, delta: f64, delta_c: f64) -> Self {
        let y = 4.0 * params.g * params.kappa_in().sqrt() * a_in / (params.kappa * params.gamma0);
        DriveSpec { y, delta, delta_c }
    }

    /// Weak-excitation comparisons stop being valid above |Y| = 0.1.
    pub fn is_weak(&self) -> bool {
        self.y.norm() <= 0.1
    }
}

/// Time derivative of the Bloch state under `drive`.
pub fn bloch_derivatives(
    state: &BlochState,
    drive: &DriveSpec,
    params: &CqedParams,
) -> Result<(Complex64, f64)> {
    params.validate()?;
    let coop = cooperativities(params)?.c;
    let g0 = params.gamma0;
    // emitter-minus-laser / cavity-minus-laser detunings
    let delta = -drive.delta;
    let delta_c = -drive.delta_c;
    let w = 1.0 / Complex64::new(1.0, 2.0 * delta_c / params.kappa);
    let f = spectral_mismatch(delta_c, params.kappa)?;
    let i = Complex64::I;

    let decay = Complex64::new(1.0, 2.0 * delta / g0) + coop * w;
    let d_ge = -(g0 / 2.0) * decay * state.sigma_ge - i * (g0 / 2.0) * w * drive.y * state.sigma_z;

    let pump = (w * drive.y * state.sigma_ge.conj()).im;
    let d_z = -g0 * (1.0 + coop * f) * (1.0 + state.sigma_z) - 2.0 * g0 * pump;
    Ok((d_ge, d_z))
}

/// One sampled point of a trajectory.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub state: BlochState,
}

/// Result of a fixed-step integration.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    /// Worst physicality violation observed along the trajectory.
    pub max_violation: f64,
}

impl Trajectory {
    pub fn final_state(&self) -> BlochState {
        self.samples.last().expect("trajectory is never empty").state
    }

    /// True when the trajectory left the physical region beyond tolerance.
    pub fn violated(&self) -> bool {
        self.max_violation > 1e-6
    }
}

/// Classical RK4 over the Bloch equations with fixed step `dt` up to `t_end`.
pub fn integrate(
    state0: BlochState,
    drive: &DriveSpec,
    params: &CqedParams,
    t_end: f64,
    dt: f64,
) -> Result<Trajectory> {
    if !(dt > 0.0) || !(t_end >= 0.0) {
        return Err(Error::Config(format!("need dt > 0 and t_end >= 0, got dt={dt}, t_end={t_end}")));
    }
    let coop = cooperativities(params)?.c;
    let fastest = (params.gamma0 * (1.0 + coop))
        .max(drive.delta.abs())
        .max(drive.delta_c.abs());
    if dt * fastest > 0.1 {
        return Err(Error::Config(format!(
            "step too large: dt*max_rate = {:.3} > 0.1",
            dt * fastest
        )));
    }

    let n_steps = (t_end / dt).ceil() as usize;
    let mut samples = Vec::with_capacity(n_steps + 1);
    let mut max_violation = state0.physicality_violation();
    let mut s = state0;
    samples.push(TrajectorySample { t: 0.0, state: s });

    let deriv = |st: &BlochState| bloch_derivatives(st, drive, params);
    for k in 0..n_steps {
        let h = dt.min(t_end - k as f64 * dt);
        let (k1g, k1z) = deriv(&s)?;
        let s2 = BlochState {
            sigma_ge: s.sigma_ge + 0.5 * h * k1g,
            sigma_z: s.sigma_z + 0.5 * h * k1z,
        };
        let (k2g, k2z) = deriv(&s2)?;
        let s3 = BlochState {
            sigma_ge: s.sigma_ge + 0.5 * h * k2g,
            sigma_z: s.sigma_z + 0.5 * h * k2z,
        };
        let (k3g, k3z) = deriv(&s3)?;
        let s4 = BlochState {
            sigma_ge: s.sigma_ge + h * k3g,
            sigma_z: s.sigma_z + h * k3z,
        };
        let (k4g, k4z) = deriv(&s4)?;
        s = BlochState {
            sigma_ge: s.sigma_ge + h / 6.0 * (k1g + 2.0 * k2g + 2.0 * k3g + k4g),
            sigma_z: s.sigma_z + h / 6.0 * (k1z + 2.0 * k2z + 2.0 * k3z + k4z),
        };
        max_violation = max_violation.max(s.physicality_violation());
        samples.push(TrajectorySample {
            t: (k as f64 * dt + h).min(t_end),
            state: s,
        });
    }
    Ok(Trajectory { samples, max_violation })
}

/// Steady state of the Bloch equations, solved in closed form.
///
/// The coherence equation is linear in σ_ge given σ_z, which reduces the
/// fixed point to a scalar equation for σ_z.
pub fn steady_state(drive: &DriveSpec, params: &CqedParams) -> Result<BlochState> {
    params.validate()?;
    let coop = cooperativities(params)?.c;
    let g0 = params.gamma0;
    let delta = -drive.delta;
    let delta_c = -drive.delta_c;
    let w = 1.0 / Complex64::new(1.0, 2.0 * delta_c / params.kappa);
    let f = spectral_mismatch(delta_c, params.kappa)?;
    let i = Complex64::I;

    // dσ_ge = −A σ_ge − i(γ0/2) W Y σ_z  ⇒  σ_ge = K σ_z
    let a = (g0 / 2.0) * (Complex64::new(1.0, 2.0 * delta / g0) + coop * w);
    if a.norm() == 0.0 {
        return Err(Error::Numeric("singular coherence decay in steady state".into()));
    }
    let k = -i * (g0 / 2.0) * w * drive.y / a;
    let denom = (1.0 + coop * f) + 2.0 * (w * drive.y * k.conj()).im;
    if denom.abs() < 1e-300 {
        return Err(Error::Numeric("singular steady-state system".into()));
    }
    let z = -(1.0 + coop * f) / denom;
    Ok(BlochState {
        sigma_ge: k * z,
        sigma_z: z,
    })
}
