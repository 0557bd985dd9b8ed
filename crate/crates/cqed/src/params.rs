//! Core parameter types for the coupled emitter-cavity system.
//!
//! All rates and frequencies are stored as ordinary frequencies in GHz
//! (angular rates quoted as `2π × x` enter as `x`). Every response formula
//! is a ratio of rates, so this convention matches tabulated values directly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rate set of a single two-level emitter coupled to a single-sided cavity.
///
/// `kappa_in` is the decay rate of the port through which the cavity is
/// driven. It is unknown for top-excitation geometries and defaults to
/// `kappa_e`; it only scales overall amplitudes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CqedParams {
    /// Emitter-cavity coupling (GHz).
    pub g: f64,
    /// Total cavity decay rate (GHz).
    pub kappa: f64,
    /// External (waveguide) decay rate (GHz).
    pub kappa_e: f64,
    /// Input-port decay rate (GHz); `None` means `kappa_e`.
    pub kappa_in: Option<f64>,
    /// Natural emitter linewidth (GHz).
    pub gamma0: f64,
    /// Pure dephasing rate (GHz).
    pub gamma_dep: f64,
    /// Cavity frequency (GHz).
    pub omega_c: f64,
    /// Emitter frequency (GHz).
    pub omega_a: f64,
}

impl CqedParams {
    pub fn new(
        g: f64,
        kappa: f64,
        kappa_e: f64,
        gamma0: f64,
        gamma_dep: f64,
        omega_c: f64,
        omega_a: f64,
    ) -> Result<Self> {
        let p = CqedParams {
            g,
            kappa,
            kappa_e,
            kappa_in: None,
            gamma0,
            gamma_dep,
            omega_c,
            omega_a,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_kappa_in(mut self, kappa_in: f64) -> Result<Self> {
        self.kappa_in = Some(kappa_in);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let rates = [
            ("g", self.g),
            ("kappa", self.kappa),
            ("kappa_e", self.kappa_e),
            ("gamma0", self.gamma0),
            ("gamma_dep", self.gamma_dep),
        ];
        for (name, v) in rates {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Domain(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        if self.kappa_e > self.kappa {
            return Err(Error::Domain(format!(
                "kappa_e ({}) exceeds kappa ({})",
                self.kappa_e, self.kappa
            )));
        }
        if let Some(ki) = self.kappa_in {
            if !ki.is_finite() || ki < 0.0 || ki > self.kappa {
                return Err(Error::Domain(format!("kappa_in ({ki}) outside [0, kappa]")));
            }
        }
        Ok(())
    }

    /// Total off-resonant emitter linewidth γ = γ0 + γ_dep.
    pub fn gamma(&self) -> f64 {
        self.gamma0 + self.gamma_dep
    }

    /// Internal cavity loss κ_i = κ − κ_e.
    pub fn kappa_i(&self) -> f64 {
        self.kappa - self.kappa_e
    }

    /// Input-port decay rate: explicit value or the `kappa_e` default.
    pub fn kappa_in(&self) -> f64 {
        self.kappa_in.unwrap_or(self.kappa_e)
    }

    /// Cavity-emitter detuning Δ = ω_c − ω_a.
    pub fn delta_ce(&self) -> f64 {
        self.omega_c - self.omega_a
    }
}

/// The three detunings of a probe-laser experiment, all in GHz.
///
/// Sign convention: `delta = ω − ω_a`, `delta_c = ω − ω_c`,
/// `delta_ce = ω_c − ω_a`, so `delta_c = delta − delta_ce` always holds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Detuning {
    /// Laser-emitter detuning ω − ω_a.
    pub delta: f64,
    /// Laser-cavity detuning ω − ω_c.
    pub delta_c: f64,
    /// Cavity-emitter detuning ω_c − ω_a.
    pub delta_ce: f64,
}

impl Detuning {
    /// Detunings of probe frequency `omega` against `params`.
    pub fn at(omega: f64, params: &CqedParams) -> Self {
        Detuning {
            delta: omega - params.omega_a,
            delta_c: omega - params.omega_c,
            delta_ce: params.omega_c - params.omega_a,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_is_sum_of_natural_and_dephasing() {
        let p = CqedParams::new(1.94, 19.0, 3.99, 0.0245, 0.073, 0.0, 0.0).unwrap();
        assert_eq!(p.gamma(), 0.0975);
        assert_eq!(p.kappa_i(), 19.0 - 3.99);
        assert_eq!(p.kappa_in(), 3.99);
    }

    #[test]
    fn kappa_e_above_kappa_rejected() {
        assert!(CqedParams::new(1.0, 10.0, 11.0, 0.02, 0.0, 0.0, 0.0).is_err());
        assert!(CqedParams::new(1.0, -1.0, 0.5, 0.02, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn detuning_consistency() {
        let p = CqedParams::new(1.0, 10.0, 2.0, 0.02, 0.0, 100.0, 90.0).unwrap();
        let d = Detuning::at(95.0, &p);
        assert_eq!(d.delta_c, d.delta - d.delta_ce);
    }
}
