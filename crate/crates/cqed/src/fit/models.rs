//! Fit models for the measured traces: Lorentzian spectra, exponential
//! decays, detuning series and the driven cavity lineshapes.
//!
//! Initial guesses are automated and deterministic: extrema of a 5-point
//! moving average and half-extremum crossings. Every model also accepts an
//! explicit initial-guess override in parameter order.

use num_complex::Complex64;
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::fit::engine::{least_squares, FitResult};
use crate::response::spectral_mismatch;
use crate::trace::{SampledTrace, TraceKind};

/// Spectrometer resolution below which fitted widths are censored (nm).
pub const DEFAULT_RESOLUTION_NM: f64 = 0.021;

fn moving_average5(y: &[f64]) -> Vec<f64> {
    let n = y.len();
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(2);
            let hi = (i + 3).min(n);
            y[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect()
}

/// Width between the half-level crossings around index `peak`; falls back to
/// `fallback` when a side never crosses.
fn half_crossing_width(x: &[f64], y: &[f64], peak: usize, half: f64, fallback: f64) -> f64 {
    let mut left = None;
    for i in (0..peak).rev() {
        if (y[i] - half) * (y[peak] - half) < 0.0 {
            left = Some(x[i]);
            break;
        }
    }
    let mut right = None;
    for i in peak + 1..y.len() {
        if (y[i] - half) * (y[peak] - half) < 0.0 {
            right = Some(x[i]);
            break;
        }
    }
    match (left, right) {
        (Some(l), Some(r)) => r - l,
        (Some(l), None) => 2.0 * (x[peak] - l),
        (None, Some(r)) => 2.0 * (r - x[peak]),
        (None, None) => fallback,
    }
}

fn weights_of(trace: &SampledTrace) -> Vec<f64> {
    trace
        .w
        .clone()
        .unwrap_or_else(|| vec![1.0; trace.len()])
        .iter()
        .map(|w| w.sqrt())
        .collect()
}

/// Lorentzian-plus-linear-background fit of a wavelength spectrum.
#[derive(Debug, Clone)]
pub struct LorentzianFit {
    /// Parameters: lambda_c, fwhm, amplitude, slope, offset.
    pub result: FitResult,
    /// Q = λc / FWHM.
    pub q: f64,
    pub q_stderr: f64,
    /// FWHM at or below the spectrometer resolution: Q is a lower bound.
    pub q_censored: bool,
}

pub fn fit_lorentzian_linear(
    trace: &SampledTrace,
    resolution_nm: Option<f64>,
    initial: Option<[f64; 5]>,
) -> Result<LorentzianFit> {
    if trace.kind != TraceKind::Spectrum {
        return Err(Error::Domain("lorentzian fit expects a wavelength spectrum".into()));
    }
    if trace.len() < 6 {
        return Err(Error::InsufficientData("need at least 6 spectrum points".into()));
    }
    let x = &trace.x;
    let y = &trace.y;
    let init = match initial {
        Some(i) => i,
        None => {
            let sm = moving_average5(y);
            let n = sm.len();
            let slope0 = (sm[n - 1] - sm[0]) / (x[n - 1] - x[0]);
            let offset0 = sm[0] - slope0 * x[0];
            let resid: Vec<f64> = sm
                .iter()
                .zip(x)
                .map(|(s, xv)| s - (slope0 * xv + offset0))
                .collect();
            let peak = resid
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .map(|(i, _)| i)
                .unwrap();
            let amp0 = resid[peak];
            // noise scale from the median absolute residual
            let mut mags: Vec<f64> = resid.iter().map(|r| r.abs()).collect();
            mags.sort_by(f64::total_cmp);
            let sigma = 1.4826 * mags[mags.len() / 2];
            let floor = 1e-9 * y.iter().fold(1.0f64, |a, b| a.max(b.abs()));
            if amp0 <= 3.0 * sigma || amp0 <= floor {
                return Err(Error::NoPeak(format!(
                    "peak amplitude {amp0:.3e} below 3 sigma of background ({sigma:.3e})"
                )));
            }
            let resid_y: Vec<f64> = y
                .iter()
                .zip(x)
                .map(|(v, xv)| v - (slope0 * xv + offset0))
                .collect();
            let fwhm0 = half_crossing_width(x, &resid_y, peak, amp0 / 2.0, (x[n - 1] - x[0]) / 4.0);
            [x[peak], fwhm0.max(x[1] - x[0]), amp0, slope0, offset0]
        }
    };

    let sw = weights_of(trace);
    let model = |p: &[f64]| -> Result<Vec<f64>> {
        let (lc, fwhm, amp, slope, offset) = (p[0], p[1], p[2], p[3], p[4]);
        let hw2 = (fwhm / 2.0) * (fwhm / 2.0);
        Ok(x.iter()
            .zip(y)
            .zip(&sw)
            .map(|((xv, yv), w)| {
                let lor = amp * hw2 / ((xv - lc).powi(2) + hw2);
                w * (lor + slope * xv + offset - yv)
            })
            .collect())
    };
    let span = x[x.len() - 1] - x[0];
    let bounds = [
        (x[0], x[x.len() - 1]),
        (f64::MIN_POSITIVE, 10.0 * span),
        (0.0, f64::INFINITY),
        (f64::NEG_INFINITY, f64::INFINITY),
        (f64::NEG_INFINITY, f64::INFINITY),
    ];
    let result = least_squares(
        model,
        &["lambda_c", "fwhm", "amplitude", "slope", "offset"],
        &init,
        Some(&bounds),
    )?;
    let lc = result.values[0];
    let fwhm = result.values[1];
    let q = lc / fwhm;
    // error propagation through Q = λc / w with the (λc, w) covariance block
    let dq_dl = 1.0 / fwhm;
    let dq_dw = -lc / (fwhm * fwhm);
    let var = dq_dl * dq_dl * result.cov(0, 0)
        + dq_dw * dq_dw * result.cov(1, 1)
        + 2.0 * dq_dl * dq_dw * result.cov(0, 1);
    let resolution = resolution_nm.unwrap_or(DEFAULT_RESOLUTION_NM);
    Ok(LorentzianFit {
        q,
        q_stderr: var.max(0.0).sqrt(),
        q_censored: fwhm <= resolution,
        result,
    })
}

/// Exponentially modified Gaussian: exp decay from `t0` through a Gaussian
/// IRF of width `sigma`.
fn emg(u: f64, tau: f64, sigma: f64) -> f64 {
    let arg = sigma * sigma / (2.0 * tau * tau) - u / tau;
    let z = (sigma * sigma / tau - u) / (sigma * std::f64::consts::SQRT_2);
    if arg > 300.0 {
        // asymptotic regime: exp overflows but erfc vanishes faster
        return 0.0;
    }
    0.5 * arg.exp() * erfc(z)
}

/// Single-exponential decay fit from `t_start`, optionally convolved with a
/// Gaussian instrument response of width `irf_sigma`.
///
/// Parameters: tau, amplitude, background.
pub fn fit_exponential_decay(
    trace: &SampledTrace,
    t_start: f64,
    irf_sigma: Option<f64>,
    initial: Option<[f64; 3]>,
) -> Result<FitResult> {
    if trace.kind != TraceKind::Histogram {
        return Err(Error::Domain("decay fit expects a time histogram".into()));
    }
    let pts: Vec<(f64, f64)> = trace
        .x
        .iter()
        .zip(&trace.y)
        .filter(|(t, _)| **t >= t_start)
        .map(|(t, y)| (*t, *y))
        .collect();
    if pts.len() < 5 {
        return Err(Error::InsufficientData(format!(
            "{} bins after t_start, need at least 5",
            pts.len()
        )));
    }
    let init = match initial {
        Some(i) => i,
        None => {
            let tail = pts.len().saturating_sub(pts.len() / 10).max(pts.len() - 1);
            let b0 = pts[tail..].iter().map(|p| p.1).sum::<f64>() / (pts.len() - tail) as f64;
            let a0 = (pts[0].1 - b0).max(1e-12);
            let target = b0 + a0 / std::f64::consts::E;
            let tau0 = pts
                .iter()
                .find(|p| p.1 <= target)
                .map(|p| p.0 - t_start)
                .filter(|t| *t > 0.0)
                .unwrap_or((pts[pts.len() - 1].0 - t_start) / 3.0);
            [tau0, a0, b0]
        }
    };
    let sw: Vec<f64> = match &trace.w {
        Some(w) => trace
            .x
            .iter()
            .zip(w)
            .filter(|(t, _)| **t >= t_start)
            .map(|(_, w)| w.sqrt())
            .collect(),
        None => vec![1.0; pts.len()],
    };
    let model = |p: &[f64]| -> Result<Vec<f64>> {
        let (tau, amp, bkg) = (p[0], p[1], p[2]);
        Ok(pts
            .iter()
            .zip(&sw)
            .map(|((t, y), w)| {
                let u = t - t_start;
                let v = match irf_sigma {
                    Some(s) if s > 0.0 => amp * 2.0 * emg(u, tau, s),
                    _ => amp * (-u / tau).exp(),
                };
                w * (v + bkg - y)
            })
            .collect())
    };
    let bounds = [
        (1e-9, f64::INFINITY),
        (0.0, f64::INFINITY),
        (f64::NEG_INFINITY, f64::INFINITY),
    ];
    least_squares(model, &["tau", "amplitude", "background"], &init, Some(&bounds))
}

/// τ(Δ) = τ0 / (C f(Δ) + 1) fit over a lifetime-vs-detuning series.
///
/// `exclude` lists indices (e.g. IRF-limited points) dropped from the fit.
pub fn fit_lifetime_vs_detuning(
    points: &[(f64, f64)],
    kappa: f64,
    exclude: &[usize],
    initial: Option<[f64; 2]>,
) -> Result<FitResult> {
    let kept: Vec<(f64, f64)> = points
        .iter()
        .enumerate()
        .filter(|(i, _)| !exclude.contains(i))
        .map(|(_, p)| *p)
        .collect();
    if kept.len() < 4 {
        return Err(Error::InsufficientData("need at least 4 lifetime points".into()));
    }
    let init = match initial {
        Some(i) => i,
        None => {
            let tau0 = kept.iter().map(|p| p.1).fold(0.0f64, f64::max);
            let (d_min, tau_min) = kept
                .iter()
                .copied()
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            let f = spectral_mismatch(d_min, kappa)?;
            let c0 = ((tau0 / tau_min - 1.0) / f.max(1e-6)).max(0.0);
            [tau0, c0]
        }
    };
    let model = |p: &[f64]| -> Result<Vec<f64>> {
        let (tau0, c) = (p[0], p[1]);
        kept.iter()
            .map(|(d, tau)| {
                let f = spectral_mismatch(*d, kappa)?;
                Ok(tau0 / (c * f + 1.0) - tau)
            })
            .collect()
    };
    let bounds = [(1e-9, f64::INFINITY), (0.0, f64::INFINITY)];
    least_squares(model, &["tau0", "c"], &init, Some(&bounds))
}

/// Linewidth-vs-detuning fit γ'(Δ) = γ (C_coh f(Δ) + 1) with the derived
/// coupling g = √(C_coh κ γ)/2.
#[derive(Debug, Clone)]
pub struct LinewidthFit {
    /// Parameters: gamma, c_coh.
    pub result: FitResult,
    pub g: f64,
    pub g_stderr: f64,
}

pub fn fit_linewidth_vs_detuning(
    points: &[(f64, f64)],
    kappa: f64,
    initial: Option<[f64; 2]>,
) -> Result<LinewidthFit> {
    if points.len() < 4 {
        return Err(Error::InsufficientData("need at least 4 linewidth points".into()));
    }
    let init = match initial {
        Some(i) => i,
        None => {
            let gamma0 = points.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
            let peak = points.iter().map(|p| p.1).fold(0.0f64, f64::max);
            [gamma0, (peak / gamma0 - 1.0).max(0.1)]
        }
    };
    let model = |p: &[f64]| -> Result<Vec<f64>> {
        let (gamma, c_coh) = (p[0], p[1]);
        points
            .iter()
            .map(|(d, gp)| {
                let f = spectral_mismatch(*d, kappa)?;
                Ok(gamma * (c_coh * f + 1.0) - gp)
            })
            .collect()
    };
    let bounds = [(1e-12, f64::INFINITY), (0.0, f64::INFINITY)];
    let result = least_squares(model, &["gamma", "c_coh"], &init, Some(&bounds))?;
    let gamma = result.values[0];
    let c_coh = result.values[1];
    let g = (c_coh * kappa * gamma).sqrt() / 2.0;
    // dg/dγ = g/(2γ), dg/dC = g/(2C); κ enters without error here
    let g_stderr = if g > 0.0 {
        let dg_dgam = g / (2.0 * gamma);
        let dg_dc = g / (2.0 * c_coh);
        (dg_dgam * dg_dgam * result.cov(0, 0)
            + dg_dc * dg_dc * result.cov(1, 1)
            + 2.0 * dg_dgam * dg_dc * result.cov(0, 1))
        .max(0.0)
        .sqrt()
    } else {
        f64::NAN
    };
    Ok(LinewidthFit { result, g, g_stderr })
}

/// Which transmission-model parameters are held fixed.
#[derive(Debug, Clone, Copy, Default)]
pub struct TransmissionFixed {
    pub g: Option<f64>,
    pub kappa: Option<f64>,
    pub gamma: Option<f64>,
    pub omega_c: Option<f64>,
    pub omega_a: Option<f64>,
}

impl TransmissionFixed {
    /// Bare-cavity mode: no emitter in the model.
    pub fn bare_cavity() -> Self {
        TransmissionFixed {
            g: Some(0.0),
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone)]
pub struct TransmissionFit {
    /// Parameters: g, kappa, gamma, omega_c, omega_a, scale.
    pub result: FitResult,
    /// Fitted on-double-resonance dip contrast 1 − T_dip/T_bare.
    pub dip_contrast: f64,
}

impl TransmissionFit {
    /// Q = (c/λc)/κ from the fitted total decay rate.
    pub fn quality_factor(&self, lambda_nm: f64) -> Result<f64> {
        crate::response::quality_factor_from_kappa(lambda_nm, self.result.value("kappa").unwrap())
    }
}

/// Normalized emitter-modulated transmission: scale·(κ/2)²/|κ/2 + iΔc + g²/(γ/2 + iδ)|².
fn transmission_model(x: f64, p: &[f64]) -> f64 {
    let (g, kappa, gamma, omega_c, omega_a, scale) = (p[0], p[1], p[2], p[3], p[4], p[5]);
    let denom = Complex64::new(kappa / 2.0, x - omega_c)
        + g * g / Complex64::new(gamma / 2.0, x - omega_a);
    scale * (kappa / 2.0) * (kappa / 2.0) / denom.norm_sqr()
}

/// Fit a laser transmission scan with the driven cavity model.
///
/// The overall scale absorbs κ_in and detection efficiency and is always
/// free. With `fixed.g = Some(0.0)` this degenerates to the bare-cavity
/// Lorentzian and yields κ.
pub fn fit_transmission_spectrum(
    trace: &SampledTrace,
    fixed: &TransmissionFixed,
    initial: Option<[f64; 6]>,
) -> Result<TransmissionFit> {
    if trace.kind != TraceKind::Scan {
        return Err(Error::Domain("transmission fit expects a laser scan".into()));
    }
    if trace.len() < 8 {
        return Err(Error::InsufficientData("need at least 8 scan points".into()));
    }
    let x = &trace.x;
    let y = &trace.y;
    let full_init = match initial {
        Some(i) => i,
        None => {
            let sm = moving_average5(y);
            let peak = sm
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .map(|(i, _)| i)
                .unwrap();
            let scale0 = sm[peak].max(1e-12);
            let omega_c0 = x[peak];
            let span = x[x.len() - 1] - x[0];
            let kappa0 = half_crossing_width(x, &sm, peak, scale0 / 2.0, span / 4.0);
            // emitter dip inside the cavity peak
            let window: Vec<usize> = (0..x.len())
                .filter(|&i| (x[i] - omega_c0).abs() <= kappa0 / 2.0)
                .collect();
            let dip = window
                .iter()
                .copied()
                .min_by(|&a, &b| sm[a].total_cmp(&sm[b]))
                .unwrap_or(peak);
            let omega_a0 = x[dip];
            let ratio = (sm[dip] / scale0).clamp(1e-6, 1.0);
            let c_coh0 = (1.0 / ratio.sqrt() - 1.0).max(0.1);
            let dx = span / (x.len() - 1) as f64;
            let gamma0 = (3.0 * dx).max(1e-6);
            let g0 = (c_coh0 * kappa0 * gamma0).sqrt() / 2.0;
            [g0, kappa0, gamma0, omega_c0, omega_a0, scale0]
        }
    };

    let names = ["g", "kappa", "gamma", "omega_c", "omega_a", "scale"];
    let mut fixed_vals = [fixed.g, fixed.kappa, fixed.gamma, fixed.omega_c, fixed.omega_a, None];
    if fixed.g == Some(0.0) {
        // without an emitter, γ and ω_a do not enter the model; freeze them
        // so the normal matrix stays full rank
        fixed_vals[2].get_or_insert(full_init[2]);
        fixed_vals[4].get_or_insert(full_init[4]);
    }
    let free_idx: Vec<usize> = (0..6).filter(|&i| fixed_vals[i].is_none()).collect();
    let assemble = |free: &[f64]| -> [f64; 6] {
        let mut p = full_init;
        for (i, v) in fixed_vals.iter().enumerate() {
            if let Some(v) = v {
                p[i] = *v;
            }
        }
        for (slot, v) in free_idx.iter().zip(free) {
            p[*slot] = *v;
        }
        p
    };

    let sw = weights_of(trace);
    let model = |free: &[f64]| -> Result<Vec<f64>> {
        let p = assemble(free);
        Ok(x.iter()
            .zip(y)
            .zip(&sw)
            .map(|((xv, yv), w)| w * (transmission_model(*xv, &p) - yv))
            .collect())
    };
    let free_init: Vec<f64> = free_idx.iter().map(|&i| full_init[i]).collect();
    let lo_x = x[0];
    let hi_x = x[x.len() - 1];
    let all_bounds: [(f64, f64); 6] = [
        (0.0, f64::INFINITY),
        (1e-9, f64::INFINITY),
        (1e-12, f64::INFINITY),
        (lo_x - (hi_x - lo_x), hi_x + (hi_x - lo_x)),
        (lo_x - (hi_x - lo_x), hi_x + (hi_x - lo_x)),
        (0.0, f64::INFINITY),
    ];
    let free_bounds: Vec<(f64, f64)> = free_idx.iter().map(|&i| all_bounds[i]).collect();
    let free_names: Vec<&str> = free_idx.iter().map(|&i| names[i]).collect();
    let inner = least_squares(model, &free_names, &free_init, Some(&free_bounds))?;

    // expand back to the full named parameter set (fixed entries: stderr 0)
    let full_values = assemble(&inner.values);
    let mut stderr = [0.0; 6];
    let mut covariance = vec![0.0; 36];
    for (k, &slot) in free_idx.iter().enumerate() {
        stderr[slot] = inner.stderr[k];
        for (l, &slot2) in free_idx.iter().enumerate() {
            covariance[slot * 6 + slot2] = inner.cov(k, l);
        }
    }
    let mut result = FitResult {
        names: names.iter().map(|s| s.to_string()).collect(),
        values: full_values.to_vec(),
        stderr: stderr.to_vec(),
        covariance,
        residual_norm: inner.residual_norm,
        converged: inner.converged,
        n_iter: inner.n_iter,
        stderr_reliable: inner.stderr_reliable,
        warnings: inner.warnings.clone(),
    };

    let (g, kappa, gamma) = (full_values[0], full_values[1], full_values[2]);
    let c_coh = 4.0 * g * g / (kappa * gamma);
    let dip_contrast = 1.0 - (1.0 / (1.0 + c_coh)).powi(2);
    if g > 0.0 {
        let dce = full_values[3] - full_values[4];
        let dip_width = gamma * (c_coh * spectral_mismatch(dce, kappa)? + 1.0);
        let dx = (hi_x - lo_x) / (x.len() - 1) as f64;
        if dip_width < 3.0 * dx {
            result.push_warning(format!(
                "UnderResolved: emitter dip width {dip_width:.3e} GHz spans fewer than 3 samples; gamma unreliable"
            ));
        }
    }
    Ok(TransmissionFit { result, dip_contrast })
}

/// Constrained bare-cavity reflection fit R'(Δc) = A·R(Δc) + c.
#[derive(Debug, Clone)]
pub struct ReflectionFit {
    /// Parameters: kappa_e_over_kappa, kappa, amplitude.
    pub result: FitResult,
    /// Fit landed on the κ_e = κ/2 bound; the undercoupled/overcoupled
    /// branches are indistinguishable there.
    pub ambiguous_branch: bool,
}

/// |r|² is invariant under κ_e ↔ κ − κ_e, so the undercoupled prior
/// κ_e ≤ κ/2 is what selects the physical branch; it is enforced as a
/// box bound.
pub fn fit_reflection(
    trace: &SampledTrace,
    background_c: f64,
    initial: Option<[f64; 3]>,
) -> Result<ReflectionFit> {
    if trace.kind != TraceKind::Scan {
        return Err(Error::Domain("reflection fit expects a laser scan".into()));
    }
    if trace.len() < 8 {
        return Err(Error::InsufficientData("need at least 8 scan points".into()));
    }
    let x = &trace.x;
    let y = &trace.y;
    let init = match initial {
        Some(i) => i,
        None => {
            let sm = moving_average5(y);
            let n = sm.len();
            let edge = (n / 20).max(2);
            let wings = (sm[..edge].iter().sum::<f64>() + sm[n - edge..].iter().sum::<f64>())
                / (2 * edge) as f64;
            let a0 = (wings - background_c).max(1e-12);
            let dip = sm
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(b.1))
                .map(|(i, _)| i)
                .unwrap();
            let r0 = ((sm[dip] - background_c) / a0).clamp(0.0, 1.0);
            let ratio0 = ((1.0 - r0.sqrt()) / 2.0).clamp(0.005, 0.495);
            let span = x[n - 1] - x[0];
            let kappa0 = half_crossing_width(x, &sm, dip, (wings + sm[dip]) / 2.0, span / 4.0);
            [ratio0, kappa0, a0]
        }
    };
    let sw = weights_of(trace);
    let model = |p: &[f64]| -> Result<Vec<f64>> {
        let (ratio, kappa, amp) = (p[0], p[1], p[2]);
        Ok(x.iter()
            .zip(y)
            .zip(&sw)
            .map(|((dc, yv), w)| {
                let r = 1.0 - 2.0 * ratio / Complex64::new(1.0, 2.0 * dc / kappa);
                w * (amp * r.norm_sqr() + background_c - yv)
            })
            .collect())
    };
    let bounds = [(0.0, 0.5), (1e-9, f64::INFINITY), (0.0, f64::INFINITY)];
    let result = least_squares(
        model,
        &["kappa_e_over_kappa", "kappa", "amplitude"],
        &init,
        Some(&bounds),
    )?;
    let ratio = result.values[0];
    let ambiguous = 0.5 - ratio < 1e-6;
    let mut result = result;
    if ambiguous {
        result.push_warning(
            "AmbiguousBranch: fit landed on kappa_e = kappa/2; coupling branch undetermined".to_string(),
        );
    }
    Ok(ReflectionFit {
        result,
        ambiguous_branch: ambiguous,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use crate::synth;

    #[test]
    fn lorentzian_roundtrip_with_noise() {
        let trace = synth::lorentzian_spectrum(619.5, 0.0620, 1000.0, 2.0, 50.0, 100.0, 7);
        let fit = fit_lorentzian_linear(&trace, None, None).unwrap();
        assert!(fit.result.converged);
        assert_relative_eq!(fit.q, 619.5 / 0.0620, max_relative = 0.01);
        assert!(!fit.q_censored);
    }

    #[test]
    fn flat_trace_has_no_peak() {
        let x: Vec<f64> = (0..200).map(|i| 619.0 + i as f64 * 0.001).collect();
        let y = vec![100.0; 200];
        let trace = SampledTrace::new(x, y, None, TraceKind::Spectrum).unwrap();
        assert!(matches!(
            fit_lorentzian_linear(&trace, None, None),
            Err(Error::NoPeak(_))
        ));
    }

    #[test]
    fn narrow_lorentzian_is_censored() {
        let trace = synth::lorentzian_spectrum(619.0, 0.015, 1000.0, 0.0, 20.0, 1e6, 3);
        let fit = fit_lorentzian_linear(&trace, None, None).unwrap();
        assert!(fit.q_censored);
    }

    #[test]
    fn exponential_decay_exact() {
        let trace = synth::exponential_histogram(2.0, 1000.0, 0.0, None, f64::INFINITY, 11);
        let fit = fit_exponential_decay(&trace, 0.0, None, None).unwrap();
        assert!(fit.converged);
        assert_relative_eq!(fit.value("tau").unwrap(), 2.0, max_relative = 1e-6);
    }

    #[test]
    fn irf_convolved_decay_recovers_tau() {
        let trace = synth::exponential_histogram(0.39, 5000.0, 20.0, Some(0.17), 200.0, 13);
        let fit = fit_exponential_decay(&trace, 0.0, Some(0.17), None).unwrap();
        assert!(fit.converged);
        assert_relative_eq!(fit.value("tau").unwrap(), 0.39, max_relative = 0.03);
    }

    #[test]
    fn empty_histogram_is_insufficient() {
        let trace = SampledTrace::new(vec![], vec![], None, TraceKind::Histogram).unwrap();
        assert!(matches!(
            fit_exponential_decay(&trace, 0.0, None, None),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn lifetime_vs_detuning_roundtrip() {
        let pts = synth::lifetime_series(6.5, 20.6, 28.6, 0.02, 17);
        let fit = fit_lifetime_vs_detuning(&pts, 28.6, &[], None).unwrap();
        assert!(fit.converged);
        assert_relative_eq!(fit.value("tau0").unwrap(), 6.5, max_relative = 0.05);
        assert_relative_eq!(fit.value("c").unwrap(), 20.6, max_relative = 0.05);
        // Cavity 2 analog
        let pts = synth::lifetime_series(8.8, 4.4, 75.0, 0.03, 19);
        let fit = fit_lifetime_vs_detuning(&pts, 75.0, &[], None).unwrap();
        assert_relative_eq!(fit.value("tau0").unwrap(), 8.8, max_relative = 0.05);
        assert_relative_eq!(fit.value("c").unwrap(), 4.4, max_relative = 0.05);
    }

    #[test]
    fn flat_lifetime_data_means_no_enhancement() {
        let pts: Vec<(f64, f64)> = (-10..=10).map(|i| (i as f64 * 3.0, 6.5)).collect();
        let fit = fit_lifetime_vs_detuning(&pts, 20.0, &[], None).unwrap();
        assert!(fit.value("c").unwrap() < 1e-6);
        assert_relative_eq!(fit.value("tau0").unwrap(), 6.5, max_relative = 1e-6);
    }

    #[test]
    fn lifetime_exclusion_skips_irf_limited_point() {
        let mut pts = synth::lifetime_series(6.5, 20.6, 28.6, 0.0, 23);
        // corrupt the deepest point the way an IRF floor would
        let deepest = pts
            .iter()
            .enumerate()
            .min_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
            .map(|(i, _)| i)
            .unwrap();
        pts[deepest].1 = 0.39;
        let biased = fit_lifetime_vs_detuning(&pts, 28.6, &[], None).unwrap();
        let clean = fit_lifetime_vs_detuning(&pts, 28.6, &[deepest], None).unwrap();
        let err_biased = (biased.value("c").unwrap() - 20.6).abs();
        let err_clean = (clean.value("c").unwrap() - 20.6).abs();
        assert!(err_clean < err_biased);
        assert_relative_eq!(clean.value("c").unwrap(), 20.6, max_relative = 1e-6);
    }

    #[test]
    fn linewidth_vs_detuning_roundtrip() {
        let pts = synth::linewidth_series(0.0975, 8.3, 19.0, 0.03, 29);
        let fit = fit_linewidth_vs_detuning(&pts, 19.0, None).unwrap();
        assert!(fit.result.converged);
        assert_relative_eq!(fit.result.value("gamma").unwrap(), 0.0975, max_relative = 0.05);
        assert_relative_eq!(fit.result.value("c_coh").unwrap(), 8.3, max_relative = 0.05);
        assert_relative_eq!(fit.g, 1.96, epsilon = 0.1);
        // Cavity 2 analog
        let pts = synth::linewidth_series(0.052, 1.6, 50.0, 0.03, 31);
        let fit = fit_linewidth_vs_detuning(&pts, 50.0, None).unwrap();
        assert_relative_eq!(fit.result.value("gamma").unwrap(), 0.052, max_relative = 0.05);
        assert_relative_eq!(fit.result.value("c_coh").unwrap(), 1.6, max_relative = 0.05);
    }

    #[test]
    fn linewidth_off_resonant_asymptote() {
        // f → 0 at huge detuning: the model tends to gamma alone
        let pts = synth::linewidth_series(0.0975, 8.3, 19.0, 0.0, 1);
        let fit = fit_linewidth_vs_detuning(&pts, 19.0, None).unwrap();
        let gamma = fit.result.value("gamma").unwrap();
        let c = fit.result.value("c_coh").unwrap();
        let far = gamma * (c * spectral_mismatch(1e6, 19.0).unwrap() + 1.0);
        assert_relative_eq!(far, gamma, max_relative = 1e-9);
    }

    #[test]
    fn bare_cavity_transmission_q() {
        let trace = synth::transmission_scan(0.0, 19.0, 0.0975, 0.0, 0.0, 1000.0, 0.0, 37);
        let fit = fit_transmission_spectrum(&trace, &TransmissionFixed::bare_cavity(), None).unwrap();
        assert!(fit.result.converged);
        assert_relative_eq!(fit.result.value("kappa").unwrap(), 19.0, max_relative = 0.01);
        assert_relative_eq!(fit.quality_factor(619.0).unwrap(), 25490.0, max_relative = 0.01);
    }

    #[test]
    fn full_transmission_fit_recovers_g_and_contrast() {
        let trace = synth::transmission_scan(1.94, 19.0, 0.0975, 0.0, 0.0, 1000.0, 0.005, 41);
        let fit = fit_transmission_spectrum(&trace, &TransmissionFixed::default(), None).unwrap();
        assert!(fit.result.converged);
        assert_relative_eq!(fit.result.value("g").unwrap(), 1.94, max_relative = 0.05);
        assert_relative_eq!(fit.dip_contrast, 0.988, epsilon = 0.005);
    }

    #[test]
    fn bare_generator_fitted_with_full_model_gives_zero_g() {
        let trace = synth::transmission_scan(0.0, 19.0, 0.0975, 0.0, 0.0, 1000.0, 0.003, 43);
        let fit = fit_transmission_spectrum(&trace, &TransmissionFixed::default(), None).unwrap();
        let g = fit.result.value("g").unwrap();
        let se = fit.result.stderr_of("g").unwrap();
        assert!(g <= 3.0 * se.max(1e-3), "g = {g} inconsistent with zero (se {se})");
    }

    #[test]
    fn reflection_selects_undercoupled_branch() {
        let trace = synth::reflection_scan(0.21, 19.0, 330e3, 21.9e3, 0.0, 47);
        let fit = fit_reflection(&trace, 21.9e3, None).unwrap();
        assert!(fit.result.converged);
        assert!(!fit.ambiguous_branch);
        assert_relative_eq!(
            fit.result.value("kappa_e_over_kappa").unwrap(),
            0.21,
            max_relative = 1e-4
        );
        let trace = synth::reflection_scan(0.31, 50.0, 700e3, 20.4e3, 0.0, 53);
        let fit = fit_reflection(&trace, 20.4e3, None).unwrap();
        assert_relative_eq!(
            fit.result.value("kappa_e_over_kappa").unwrap(),
            0.31,
            max_relative = 1e-4
        );
    }

    #[test]
    fn uncoupled_cavity_reflection_is_flat() {
        let trace = synth::reflection_scan(0.0, 19.0, 330e3, 21.9e3, 0.0, 59);
        let fit = fit_reflection(&trace, 21.9e3, None).unwrap();
        assert!(fit.result.value("kappa_e_over_kappa").unwrap() < 1e-3);
    }

    #[test]
    fn reflection_objective_is_branch_symmetric() {
        // the model evaluated at ratio and 1 − ratio is identical
        let trace = synth::reflection_scan(0.21, 19.0, 330e3, 21.9e3, 0.0, 61);
        let obj = |ratio: f64| -> f64 {
            trace
                .x
                .iter()
                .zip(&trace.y)
                .map(|(dc, yv)| {
                    let r = 1.0 - 2.0 * ratio / Complex64::new(1.0, 2.0 * dc / 19.0);
                    (330e3 * r.norm_sqr() + 21.9e3 - yv).powi(2)
                })
                .sum()
        };
        assert_relative_eq!(obj(0.21), obj(0.79), max_relative = 1e-12);
    }
}
