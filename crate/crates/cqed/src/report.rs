//! Assembly of the derived-parameter report: every quantity the toolkit can
//! infer for one device, with first-order Gaussian error propagation.
//!
//! Within a single fit the full parameter covariance is used; across
//! independent fits errors combine diagonally.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::response::{purcell_factor, quality_factor_from_kappa};

/// A correlated parameter pair extracted from one two-parameter fit.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CorrelatedPair {
    pub a: f64,
    pub b: f64,
    pub var_a: f64,
    pub var_b: f64,
    pub cov: f64,
}

/// Fixed efficiency constants entering the zero-detuning beta factor.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ReportConstants {
    /// Normalized mode volume V/(λ/n)³.
    pub v_norm: f64,
    /// Quantum efficiency.
    pub eta_q: f64,
    /// Debye-Waller factor.
    pub eta_dw: f64,
    /// Branching ratio.
    pub eta_br: f64,
}

impl Default for ReportConstants {
    fn default() -> Self {
        ReportConstants {
            v_norm: 0.45,
            eta_q: 0.8,
            eta_dw: 0.57,
            eta_br: 0.8,
        }
    }
}

/// Everything a report can be built from. Each fitted input is optional;
/// rows whose inputs are missing are simply absent from the output.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ReportInputs {
    /// Cavity linewidth from the transmission fit: (GHz, stderr).
    pub kappa: Option<(f64, f64)>,
    /// Cavity linewidth during the lifetime series: (GHz, stderr).
    pub kappa_prime: Option<(f64, f64)>,
    /// Coupling ratio κ_e/κ from the reflection fit: (value, stderr).
    pub kappa_e_over_kappa: Option<(f64, f64)>,
    /// Weak mirror cells of the device.
    pub m_w: Option<u32>,
    /// (τ0 in ns, C) with covariance, from the lifetime-vs-detuning fit.
    pub lifetime: Option<CorrelatedPair>,
    /// (γ in GHz, C_coh) with covariance, from the linewidth-vs-detuning fit.
    pub linewidth: Option<CorrelatedPair>,
    /// Resonance wavelength (nm), for Q.
    pub lambda_c_nm: Option<f64>,
    #[serde(default)]
    pub constants: Option<ReportConstants>,
}

/// One reported quantity: value, propagated stderr (0 for constants and
/// exact identities), and which fit or constant it came from.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportRow {
    pub name: String,
    pub value: f64,
    pub stderr: f64,
    pub source: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CqedReport {
    pub rows: Vec<ReportRow>,
    /// Inputs the report was built from, kept for closure checks.
    pub inputs: ReportInputs,
}

impl CqedReport {
    pub fn row(&self, name: &str) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.name == name)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(Error::Json)
    }
}

fn push(rows: &mut Vec<ReportRow>, name: &str, value: f64, stderr: f64, source: &str) {
    rows.push(ReportRow {
        name: name.to_string(),
        value,
        stderr,
        source: source.to_string(),
    });
}

/// Build the full derived-parameter report from whichever fits are present.
pub fn assemble_report(inputs: &ReportInputs) -> Result<CqedReport> {
    let consts = inputs.constants.unwrap_or_default();
    if !(consts.v_norm > 0.0
        && (0.0..=1.0).contains(&consts.eta_q)
        && (0.0..=1.0).contains(&consts.eta_dw)
        && (0.0..=1.0).contains(&consts.eta_br))
    {
        return Err(Error::Domain("report constants out of range".into()));
    }
    let mut rows = Vec::new();

    if let Some((k, dk)) = inputs.kappa {
        push(&mut rows, "kappa_GHz", k, dk, "transmission fit");
    }
    if let Some((kp, dkp)) = inputs.kappa_prime {
        push(&mut rows, "kappa_prime_GHz", kp, dkp, "transmission fit (lifetime run)");
    }
    if let Some((r, dr)) = inputs.kappa_e_over_kappa {
        push(&mut rows, "kappa_e_over_kappa", r, dr, "reflection fit");
        if let Some((k, dk)) = inputs.kappa {
            // κ_e = (κ_e/κ)·κ, independent fits → diagonal propagation
            let ke = r * k;
            let var = (k * dr).powi(2) + (r * dk).powi(2);
            push(&mut rows, "kappa_e_GHz", ke, var.sqrt(), "reflection x transmission");
        }
    }
    if let Some(m_w) = inputs.m_w {
        push(&mut rows, "m_w", m_w as f64, 0.0, "design");
    }

    let mut q_row: Option<(f64, f64)> = None;
    if let (Some(lambda), Some((k, dk))) = (inputs.lambda_c_nm, inputs.kappa) {
        let q = quality_factor_from_kappa(lambda, k)?;
        let dq = q * dk / k;
        q_row = Some((q, dq));
        push(&mut rows, "quality_factor", q, dq, "transmission fit");
    }
    push(&mut rows, "v_norm", consts.v_norm, 0.0, "constant");
    if let Some((q, dq)) = q_row {
        let fp = purcell_factor(q, consts.v_norm)?;
        push(&mut rows, "purcell_factor", fp, fp * dq / q, "quality_factor / v_norm");
    }

    if let Some(lt) = inputs.lifetime {
        let (tau0, c) = (lt.a, lt.b);
        if !(tau0 > 0.0) {
            return Err(Error::Domain(format!("tau0 must be positive, got {tau0}")));
        }
        push(&mut rows, "tau0_ns", tau0, lt.var_a.sqrt(), "lifetime fit");
        // γ0 = 1/(2πτ0), dγ0 = dτ0/(2πτ0²)
        let gamma0 = 1.0 / (std::f64::consts::TAU * tau0);
        let dgamma0 = lt.var_a.sqrt() / (std::f64::consts::TAU * tau0 * tau0);
        push(&mut rows, "gamma0_GHz", gamma0, dgamma0, "lifetime fit");
        push(&mut rows, "cooperativity", c, lt.var_b.sqrt(), "lifetime fit");

        // β = C/(C+1), dβ = dC/(C+1)²
        let beta = c / (c + 1.0);
        let dbeta = lt.var_b.sqrt() / ((c + 1.0) * (c + 1.0));
        push(&mut rows, "beta", beta, dbeta, "lifetime fit");

        if let Some((r, dr)) = inputs.kappa_e_over_kappa {
            // β_e = (κ_e/κ)·β, independent fits
            let be = r * beta;
            let var = (beta * dr).powi(2) + (r * dbeta).powi(2);
            push(&mut rows, "beta_e", be, var.sqrt(), "reflection x lifetime");
        }
        if let Some((kp, dkp)) = inputs.kappa_prime {
            // g' = √(C κ' γ0)/2 with C, τ0 correlated through the lifetime fit
            let gp = (c * kp * gamma0).sqrt() / 2.0;
            let rel = 0.25
                * (lt.var_b / (c * c) + lt.var_a / (tau0 * tau0)
                    - 2.0 * lt.cov / (c * tau0)
                    + (dkp / kp).powi(2));
            push(
                &mut rows,
                "g_prime_GHz",
                gp,
                gp * rel.max(0.0).sqrt(),
                "lifetime fit x kappa_prime",
            );
        }
    }

    if let Some(lw) = inputs.linewidth {
        let (gamma, c_coh) = (lw.a, lw.b);
        push(&mut rows, "gamma_GHz", gamma, lw.var_a.sqrt(), "linewidth fit");
        push(&mut rows, "c_coh", c_coh, lw.var_b.sqrt(), "linewidth fit");
        if let Some((k, dk)) = inputs.kappa {
            // g = √(C_coh κ γ)/2 with γ, C_coh correlated
            let g = (c_coh * k * gamma).sqrt() / 2.0;
            let rel = 0.25
                * (lw.var_b / (c_coh * c_coh)
                    + lw.var_a / (gamma * gamma)
                    + 2.0 * lw.cov / (c_coh * gamma)
                    + (dk / k).powi(2));
            push(&mut rows, "g_GHz", g, g * rel.max(0.0).sqrt(), "linewidth fit x kappa");
        }
    }

    push(&mut rows, "eta_q", consts.eta_q, 0.0, "constant");
    push(&mut rows, "eta_dw", consts.eta_dw, 0.0, "constant");
    push(&mut rows, "eta_br", consts.eta_br, 0.0, "constant");
    push(
        &mut rows,
        "beta0",
        consts.eta_q * consts.eta_dw * consts.eta_br,
        0.0,
        "eta_q x eta_dw x eta_br",
    );

    Ok(CqedReport {
        rows,
        inputs: inputs.clone(),
    })
}
