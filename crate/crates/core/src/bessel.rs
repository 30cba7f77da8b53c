//! Bessel functions of the first kind of integer order.

use crate::error::{Error, Result};

const MAX_ORDER: u32 = 200;
const MAX_ARG: f64 = 1e5;
const RESCALE: f64 = 1e250;

/// `(J_nu(x), J_nu'(x))` via Miller's backward recurrence, normalized with
/// `1 = J_0 + 2 sum_k J_2k`.
pub fn bessel_j(nu: u32, x: f64) -> Result<(f64, f64)> {
    if !(x >= 0.0) || x > MAX_ARG || nu > MAX_ORDER {
        return Err(Error::OutOfRange(format!("bessel_j(nu = {nu}, x = {x})")));
    }
    let vals = bessel_sequence(nu + 1, x);
    let j = vals[nu as usize];
    let dj = if nu == 0 { -vals[1] } else { 0.5 * (vals[nu as usize - 1] - vals[nu as usize + 1]) };
    Ok((j, dj))
}

/// `J_0(x), ..., J_top(x)`.
pub fn bessel_sequence(top: u32, x: f64) -> Vec<f64> {
    let top = top as usize;
    let mut out = vec![0.0; top + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    if x < 1e-8 {
        // two terms of the power series are exact to rounding here
        let h = 0.5 * x;
        let mut lead = 1.0;
        for (k, o) in out.iter_mut().enumerate() {
            if k > 0 {
                lead *= h / k as f64;
            }
            *o = lead * (1.0 - h * h / (k as f64 + 1.0));
        }
        return out;
    }
    let big = (top as f64).max(x);
    let mut start = (big + 20.0 + 2.0 * (40.0 * big).sqrt()).ceil() as usize;
    start += start % 2;
    let (mut jp, mut j) = (0.0, 1e-300);
    let mut norm = 0.0;
    for k in (1..=start).rev() {
        // j holds J_k, jp holds J_{k+1}; step down to J_{k-1}
        let jm = 2.0 * k as f64 / x * j - jp;
        jp = j;
        j = jm;
        if k - 1 <= top {
            out[k - 1] = j;
        }
        if k <= top {
            out[k] = jp;
        }
        if (k - 1) % 2 == 0 && k - 1 > 0 {
            norm += 2.0 * j;
        }
        if j.abs() > RESCALE {
            j /= RESCALE;
            jp /= RESCALE;
            norm /= RESCALE;
            for o in out.iter_mut() {
                *o /= RESCALE;
            }
        }
    }
    norm += j;
    for o in out.iter_mut() {
        *o /= norm;
    }
    out
}
