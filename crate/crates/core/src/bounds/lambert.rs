use crate::error::{Error, Result};

/// Principal branch of the Lambert W function on `[0, ∞)`: the `w ≥ 0`
/// with `w·e^w = x`.
///
/// Halley iteration from `ln(1 + x)`; bisection takes over if Halley has
/// not met `|w·e^w − x| ≤ 1e-12·max(1, x)` after a fixed number of steps.
pub fn lambert_w(x: f64) -> Result<f64> {
    if x.is_nan() || x < 0.0 || x.is_infinite() {
        return Err(Error::Domain(format!(
            "lambert_w needs a finite x >= 0, got {x}"
        )));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let tol = 1e-12 * x.max(1.0);
    let residual = |w: f64| w * w.exp() - x;

    let mut w = x.ln_1p();
    for _ in 0..50 {
        let ew = w.exp();
        let f = w * ew - x;
        if f == 0.0 {
            break;
        }
        let wp1 = w + 1.0;
        let step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        if !step.is_finite() {
            break;
        }
        w = (w - step).max(0.0);
        if step.abs() <= 4.0 * f64::EPSILON * w {
            break;
        }
    }
    if residual(w).abs() <= tol {
        return Ok(w);
    }

    let (mut lo, mut hi) = (0.0f64, 1.0f64.max(x.ln() + 1.0));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if residual(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}
