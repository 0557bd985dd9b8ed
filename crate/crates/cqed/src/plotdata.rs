//! Figure-ready curve emission: model overlays, maps and envelopes as
//! plain numeric tables with deterministic byte-identical formatting.

use serde::{Deserialize, Serialize};

use crate::design::{external_beta_map, reflection_envelope};
use crate::error::{Error, Result};
use crate::params::CqedParams;
use crate::response::{
    cooperativity_from_geometry, response_amplitudes, scattering_intensity,
    scattering_peak_detuning, spectral_mismatch,
};

/// One named numeric table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Curve {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// All tables of one view.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurveSet {
    pub view: String,
    pub curves: Vec<Curve>,
}

impl CurveSet {
    /// Concatenated CSV blocks, one per curve, values at 9 significant
    /// digits so identical inputs always produce identical bytes.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        for c in &self.curves {
            out.push_str(&format!("# {}\n", c.name));
            out.push_str(&c.columns.join(","));
            out.push('\n');
            for row in &c.rows {
                let cells: Vec<String> = row.iter().map(|v| format!("{v:.8e}")).collect();
                out.push_str(&cells.join(","));
                out.push('\n');
            }
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(Error::Json)
    }
}

/// Optional overrides for a view; every field falls back to a documented
/// per-view default (the flagship device, except where noted).
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ViewConfig {
    pub g: Option<f64>,
    pub kappa: Option<f64>,
    pub kappa_e_over_kappa: Option<f64>,
    pub gamma0: Option<f64>,
    pub gamma_dep: Option<f64>,
    pub gamma: Option<f64>,
    pub c: Option<f64>,
    pub c_coh: Option<f64>,
    pub tau0_ns: Option<f64>,
    pub lambda_c_nm: Option<f64>,
    pub fwhm_nm: Option<f64>,
    pub q: Option<f64>,
    pub v_norm: Option<f64>,
    pub beta0: Option<f64>,
}

fn pick(v: Option<f64>, default: f64) -> f64 {
    v.unwrap_or(default)
}

const N_POINTS: usize = 1001;

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

pub const VIEW_NAMES: [&str; 8] = [
    "fig2c", "fig3c", "fig4b", "fig4e", "fig5a", "fig5b", "fig5c", "fig14",
];

/// Emit the named view. Unknown names are a usage error listing the
/// available views.
pub fn emit_view(name: &str, cfg: &ViewConfig) -> Result<CurveSet> {
    match name {
        "fig2c" => fig2c(cfg),
        "fig3c" => fig3c(cfg),
        "fig4b" => fig4b(cfg),
        "fig4e" => fig4e(cfg),
        "fig5a" => fig5a(cfg),
        "fig5b" => fig5b(cfg),
        "fig5c" => fig5c(cfg),
        "fig14" => fig14(cfg),
        other => Err(Error::Config(format!(
            "unknown view '{other}'; available: {}",
            VIEW_NAMES.join(", ")
        ))),
    }
}

/// Lorentzian resonance lineshape over wavelength.
fn fig2c(cfg: &ViewConfig) -> Result<CurveSet> {
    let lc = pick(cfg.lambda_c_nm, 619.0);
    let q = pick(cfg.q, 25400.0);
    let fwhm = pick(cfg.fwhm_nm, lc / q);
    if !(fwhm > 0.0 && lc > 0.0) {
        return Err(Error::Domain("wavelength and FWHM must be positive".into()));
    }
    let hw2 = (fwhm / 2.0) * (fwhm / 2.0);
    let rows = linspace(lc - 8.0 * fwhm, lc + 8.0 * fwhm, N_POINTS)
        .into_iter()
        .map(|x| vec![x, hw2 / ((x - lc).powi(2) + hw2)])
        .collect();
    Ok(CurveSet {
        view: "fig2c".to_string(),
        curves: vec![Curve {
            name: "lorentzian".to_string(),
            columns: vec!["wavelength_nm".to_string(), "normalized_counts".to_string()],
            rows,
        }],
    })
}

/// Purcell-reduced lifetime versus cavity-emitter detuning.
fn fig3c(cfg: &ViewConfig) -> Result<CurveSet> {
    let tau0 = pick(cfg.tau0_ns, 6.5);
    let c = pick(cfg.c, 20.6);
    let kappa = pick(cfg.kappa, 28.6);
    let rows = linspace(-3.0 * kappa, 3.0 * kappa, N_POINTS)
        .into_iter()
        .map(|d| {
            let f = spectral_mismatch(d, kappa)?;
            Ok(vec![d, tau0 / (c * f + 1.0)])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CurveSet {
        view: "fig3c".to_string(),
        curves: vec![Curve {
            name: "lifetime".to_string(),
            columns: vec!["detuning_GHz".to_string(), "tau_ns".to_string()],
            rows,
        }],
    })
}

fn flagship(cfg: &ViewConfig) -> Result<CqedParams> {
    let kappa = pick(cfg.kappa, 19.0);
    CqedParams::new(
        pick(cfg.g, 1.94),
        kappa,
        pick(cfg.kappa_e_over_kappa, 0.21) * kappa,
        pick(cfg.gamma0, 0.0245),
        pick(cfg.gamma_dep, 0.073),
        0.0,
        0.0,
    )
}

/// Emitter-modulated transmission spectrum on double resonance.
fn fig4b(cfg: &ViewConfig) -> Result<CurveSet> {
    let p = flagship(cfg)?;
    let rows = linspace(-2.5 * p.kappa, 2.5 * p.kappa, N_POINTS)
        .into_iter()
        .map(|w| Ok(vec![w, response_amplitudes(w, &p)?.big_t]))
        .collect::<Result<Vec<_>>>()?;
    Ok(CurveSet {
        view: "fig4b".to_string(),
        curves: vec![Curve {
            name: "transmission".to_string(),
            columns: vec!["detuning_GHz".to_string(), "transmission".to_string()],
            rows,
        }],
    })
}

/// Cavity-broadened emitter linewidth versus detuning.
fn fig4e(cfg: &ViewConfig) -> Result<CurveSet> {
    let gamma = pick(cfg.gamma, 0.0975);
    let c_coh = pick(cfg.c_coh, 8.13);
    let kappa = pick(cfg.kappa, 19.0);
    let rows = linspace(-10.0 * kappa, 10.0 * kappa, N_POINTS)
        .into_iter()
        .map(|d| {
            let f = spectral_mismatch(d, kappa)?;
            Ok(vec![d, gamma * (c_coh * f + 1.0)])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CurveSet {
        view: "fig4e".to_string(),
        curves: vec![Curve {
            name: "linewidth".to_string(),
            columns: vec!["detuning_GHz".to_string(), "linewidth_GHz".to_string()],
            rows,
        }],
    })
}

/// Cooperativity versus the emitter-placement product u²ζ.
fn fig5a(cfg: &ViewConfig) -> Result<CurveSet> {
    let q = pick(cfg.q, 25400.0);
    let v = pick(cfg.v_norm, 0.45);
    let beta0 = pick(cfg.beta0, 0.3648);
    let f_p = crate::response::purcell_factor(q, v)?;
    let rows = linspace(0.0, 1.0, N_POINTS)
        .into_iter()
        .map(|x| Ok(vec![x, cooperativity_from_geometry(f_p, beta0, x, 1.0)?]))
        .collect::<Result<Vec<_>>>()?;
    Ok(CurveSet {
        view: "fig5a".to_string(),
        curves: vec![Curve {
            name: "cooperativity".to_string(),
            columns: vec!["u_sq_zeta".to_string(), "cooperativity".to_string()],
            rows,
        }],
    })
}

/// External beta factor map over (κ_e, κ_i) with lifetime contours.
fn fig5b(cfg: &ViewConfig) -> Result<CurveSet> {
    let g = pick(cfg.g, 1.94);
    let gamma0 = pick(cfg.gamma0, 0.0245);
    let tau0 = pick(cfg.tau0_ns, 6.5);
    let ke = linspace(1.0, 200.0, 200);
    let ki = linspace(1.0, 60.0, 120);
    let map = external_beta_map(&ke, &ki, g, gamma0, tau0, &[0.3, 0.5, 0.6], &[0.5, 2.0, 4.0])?;
    let mut grid_rows = Vec::with_capacity(ke.len() * ki.len());
    for (i, &ki_v) in map.kappa_i.iter().enumerate() {
        for (j, &ke_v) in map.kappa_e.iter().enumerate() {
            grid_rows.push(vec![ke_v, ki_v, map.beta_e[i][j], map.tau_ns[i][j]]);
        }
    }
    let mut curves = vec![Curve {
        name: "beta_e_map".to_string(),
        columns: vec![
            "kappa_e_GHz".to_string(),
            "kappa_i_GHz".to_string(),
            "beta_e".to_string(),
            "tau_ns".to_string(),
        ],
        rows: grid_rows,
    }];
    for (k, c) in map.contours.iter().enumerate() {
        curves.push(Curve {
            name: format!("contour_{}_{}_{}", c.kind, c.level, k),
            columns: vec!["kappa_e_GHz".to_string(), "kappa_i_GHz".to_string()],
            rows: c.points.iter().map(|&(a, b)| vec![a, b]).collect(),
        });
    }
    Ok(CurveSet {
        view: "fig5b".to_string(),
        curves,
    })
}

/// Reflection dip/peak envelopes versus cavity-emitter detuning for an
/// overcoupled device (defaults match the best waveguide-coupled cavity).
fn fig5c(cfg: &ViewConfig) -> Result<CurveSet> {
    let kappa = pick(cfg.kappa, 50.0);
    let p = CqedParams::new(
        pick(cfg.g, 0.99),
        kappa,
        pick(cfg.kappa_e_over_kappa, 0.6) * kappa,
        pick(cfg.gamma0, 0.052),
        pick(cfg.gamma_dep, 0.0),
        0.0,
        0.0,
    )?;
    let rows = linspace(0.5, 40.0, 80)
        .into_iter()
        .map(|dce| {
            let e = reflection_envelope(&p, dce)?;
            Ok(vec![dce, e.r_min, e.r_max])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CurveSet {
        view: "fig5c".to_string(),
        curves: vec![Curve {
            name: "reflection_envelope".to_string(),
            columns: vec![
                "delta_ce_GHz".to_string(),
                "r_min".to_string(),
                "r_max".to_string(),
            ],
            rows,
        }],
    })
}

/// Scattered-intensity map S(δ, Δce) plus its analytic ridge.
fn fig14(cfg: &ViewConfig) -> Result<CurveSet> {
    let g = pick(cfg.g, 1.94);
    let kappa = pick(cfg.kappa, 18.7);
    let gamma0 = pick(cfg.gamma0, 0.02437);
    let span = 30.0;
    let deltas = linspace(-span, span, 201);
    let dces = linspace(-span, span, 201);
    let mut rows = Vec::with_capacity(deltas.len() * dces.len());
    for &dce in &dces {
        let p = CqedParams::new(g, kappa, kappa / 2.0, gamma0, 0.0, dce, 0.0)?;
        for &d in &deltas {
            rows.push(vec![d, dce, scattering_intensity(d, dce, &p)?]);
        }
    }
    let ridge = dces
        .iter()
        .map(|&dce| Ok(vec![dce, scattering_peak_detuning(g, kappa, dce)?]))
        .collect::<Result<Vec<_>>>()?;
    Ok(CurveSet {
        view: "fig14".to_string(),
        curves: vec![
            Curve {
                name: "scattering_map".to_string(),
                columns: vec![
                    "delta_GHz".to_string(),
                    "delta_ce_GHz".to_string(),
                    "intensity".to_string(),
                ],
                rows,
            },
            Curve {
                name: "ridge".to_string(),
                columns: vec!["delta_ce_GHz".to_string(), "delta_max_GHz".to_string()],
                rows: ridge,
            },
        ],
    })
}
