//! Bracketing and bisection for real scalar functions.

use crate::error::Result;

/// Bisects a sign change of `f` on `[lo, hi]` until the bracket stops shrinking
/// in floating point or its width drops below `xtol`.
pub fn bisect<F>(f: F, mut lo: f64, mut hi: f64, mut f_lo: f64, xtol: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= xtol {
            break;
        }
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Indices `i` with a sign change between `values[i]` and `values[i + 1]`,
/// plus exact zeros reported once.
pub fn sign_changes(values: &[f64]) -> Vec<usize> {
    let mut out = Vec::new();
    for i in 0..values.len().saturating_sub(1) {
        let (a, b) = (values[i], values[i + 1]);
        if a == 0.0 {
            continue;
        }
        if b == 0.0 || (a < 0.0) != (b < 0.0) {
            out.push(i);
        }
    }
    out
}
