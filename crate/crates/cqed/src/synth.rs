//! Deterministic synthetic traces for testing fits and exercising the CLI
//! without measured data. Every generator takes a seed and produces the
//! same bytes on every platform.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::response::spectral_mismatch;
use crate::trace::{SampledTrace, TraceKind};

/// Standard normal draw via Box-Muller; avoids an extra distribution crate.
fn normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Lorentzian emission line on a linear background, sampled like a
/// spectrometer frame. `snr` is peak amplitude over Gaussian noise sigma;
/// pass `f64::INFINITY` for a noiseless trace.
pub fn lorentzian_spectrum(
    lambda_c: f64,
    fwhm: f64,
    amplitude: f64,
    slope: f64,
    offset: f64,
    snr: f64,
    seed: u64,
) -> SampledTrace {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half_span = (10.0 * fwhm).max(0.25);
    let n = 501;
    let sigma = if snr.is_finite() { amplitude / snr } else { 0.0 };
    let hw2 = (fwhm / 2.0) * (fwhm / 2.0);
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let xv = lambda_c - half_span + 2.0 * half_span * i as f64 / (n - 1) as f64;
        let clean = amplitude * hw2 / ((xv - lambda_c).powi(2) + hw2) + slope * xv + offset;
        x.push(xv);
        y.push((clean + sigma * normal(&mut rng)).max(0.0));
    }
    SampledTrace::new(x, y, None, TraceKind::Spectrum).unwrap()
}

/// Single-exponential decay histogram starting at t = 0, optionally
/// convolved with a Gaussian instrument response of width `irf_sigma`.
pub fn exponential_histogram(
    tau: f64,
    amplitude: f64,
    background: f64,
    irf_sigma: Option<f64>,
    snr: f64,
    seed: u64,
) -> SampledTrace {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 256;
    let t_max = 8.0 * tau;
    let sigma = if snr.is_finite() { amplitude / snr } else { 0.0 };
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let t = t_max * i as f64 / (n - 1) as f64;
        let clean = match irf_sigma {
            Some(s) if s > 0.0 => {
                let arg = s * s / (2.0 * tau * tau) - t / tau;
                let z = (s * s / tau - t) / (s * std::f64::consts::SQRT_2);
                amplitude * arg.exp() * statrs::function::erf::erfc(z)
            }
            _ => amplitude * (-t / tau).exp(),
        } + background;
        x.push(t);
        y.push((clean + sigma * normal(&mut rng)).max(0.0));
    }
    SampledTrace::new(x, y, None, TraceKind::Histogram).unwrap()
}

/// Lifetime-vs-detuning series τ(Δ) = τ0 / (C f(Δ) + 1) with relative
/// Gaussian scatter `noise_rel`.
pub fn lifetime_series(tau0: f64, c: f64, kappa: f64, noise_rel: f64, seed: u64) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..21)
        .map(|i| {
            let d = -3.0 * kappa + 6.0 * kappa * i as f64 / 20.0;
            let f = spectral_mismatch(d, kappa).unwrap();
            let tau = tau0 / (c * f + 1.0) * (1.0 + noise_rel * normal(&mut rng));
            (d, tau)
        })
        .collect()
}

/// Linewidth-vs-detuning series γ'(Δ) = γ (C_coh f(Δ) + 1) with relative
/// Gaussian scatter `noise_rel`.
pub fn linewidth_series(
    gamma: f64,
    c_coh: f64,
    kappa: f64,
    noise_rel: f64,
    seed: u64,
) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..21)
        .map(|i| {
            let d = -3.0 * kappa + 6.0 * kappa * i as f64 / 20.0;
            let f = spectral_mismatch(d, kappa).unwrap();
            let g = gamma * (c_coh * f + 1.0) * (1.0 + noise_rel * normal(&mut rng));
            (d, g)
        })
        .collect()
}

/// Emitter-modulated cavity transmission scan on a detuning axis centered
/// at `omega_c`. Additive Gaussian noise has sigma `noise_rel * scale`.
pub fn transmission_scan(
    g: f64,
    kappa: f64,
    gamma: f64,
    omega_c: f64,
    omega_a: f64,
    scale: f64,
    noise_rel: f64,
    seed: u64,
) -> SampledTrace {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 2001;
    let half_span = 2.5 * kappa;
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let w = omega_c - half_span + 2.0 * half_span * i as f64 / (n - 1) as f64;
        let denom = Complex64::new(kappa / 2.0, w - omega_c)
            + g * g / Complex64::new(gamma / 2.0, w - omega_a);
        let clean = scale * (kappa / 2.0) * (kappa / 2.0) / denom.norm_sqr();
        x.push(w);
        y.push((clean + noise_rel * scale * normal(&mut rng)).max(0.0));
    }
    SampledTrace::new(x, y, None, TraceKind::Scan).unwrap()
}

/// Bare-cavity reflection dip A·|1 − κ_e/(κ/2 + iΔc)|² + c on a detuning
/// axis, parameterized by the coupling ratio κ_e/κ.
pub fn reflection_scan(
    kappa_e_over_kappa: f64,
    kappa: f64,
    amplitude: f64,
    background: f64,
    noise_rel: f64,
    seed: u64,
) -> SampledTrace {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 801;
    let half_span = 5.0 * kappa;
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let dc = -half_span + 2.0 * half_span * i as f64 / (n - 1) as f64;
        let r = 1.0 - 2.0 * kappa_e_over_kappa / Complex64::new(1.0, 2.0 * dc / kappa);
        let clean = amplitude * r.norm_sqr() + background;
        x.push(dc);
        y.push((clean + noise_rel * amplitude * normal(&mut rng)).max(0.0));
    }
    SampledTrace::new(x, y, None, TraceKind::Scan).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_deterministic() {
        let a = lorentzian_spectrum(619.0, 0.06, 1000.0, 0.0, 10.0, 50.0, 42);
        let b = lorentzian_spectrum(619.0, 0.06, 1000.0, 0.0, 10.0, 50.0, 42);
        assert_eq!(a.to_csv_string(), b.to_csv_string());
        let c = lorentzian_spectrum(619.0, 0.06, 1000.0, 0.0, 10.0, 50.0, 43);
        assert_ne!(a.to_csv_string(), c.to_csv_string());
    }

    #[test]
    fn noiseless_reflection_matches_model() {
        let t = reflection_scan(0.21, 19.0, 1.0, 0.0, 0.0, 1);
        let mid = t.x.len() / 2;
        assert!((t.x[mid]).abs() < 1e-9);
        let expect = (1.0f64 - 2.0 * 0.21).powi(2);
        assert!((t.y[mid] - expect).abs() < 1e-12);
    }
}
