//! Bounded scalar minimization by golden-section search.

use crate::error::{Error, Result};

const INVPHI: f64 = 0.618_033_988_749_894_8;

/// Minimize `f` on `[lo, hi]` to abscissa tolerance `tol`.
///
/// Returns `(x_min, f(x_min))`. Deterministic; assumes `f` is unimodal on
/// the bracket (callers prescan on a grid to isolate one).
pub fn golden_min<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<(f64, f64)> {
    if !(lo.is_finite() && hi.is_finite()) || lo > hi {
        return Err(Error::Numeric(format!("invalid bracket [{lo}, {hi}]")));
    }
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INVPHI * (b - a);
    let mut d = a + INVPHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut iters = 0usize;
    while (b - a) > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INVPHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INVPHI * (b - a);
            fd = f(d);
        }
        iters += 1;
        if iters > 500 {
            return Err(Error::Numeric("golden-section search failed to converge".into()));
        }
    }
    let x = 0.5 * (a + b);
    Ok((x, f(x)))
}

/// Grid prescan followed by golden refinement: global bounded minimum of a
/// possibly multimodal scalar function.
pub fn grid_then_golden_min<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    n_grid: usize,
    tol: f64,
) -> Result<(f64, f64)> {
    if n_grid < 3 || !(hi > lo) {
        return Err(Error::Numeric("grid search needs hi > lo and n_grid >= 3".into()));
    }
    let step = (hi - lo) / (n_grid - 1) as f64;
    let mut best = (f64::INFINITY, lo);
    for k in 0..n_grid {
        let x = lo + step * k as f64;
        let v = f(x);
        if v < best.0 {
            best = (v, x);
        }
    }
    golden_min(f, (best.1 - step).max(lo), (best.1 + step).min(hi), tol)
}
