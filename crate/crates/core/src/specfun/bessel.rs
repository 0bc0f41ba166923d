//! Zero-order Bessel functions `J0` and the exponentially scaled `I0`.
//!
//! `J0` uses three branches: the Taylor series up to `|x| = 8`, Miller's
//! backward recurrence up to `|x| = 25`, and the Hankel amplitude/phase
//! expansion beyond. The asymptotic expansion alone is only good to about
//! `e^{-2x}`, so it cannot take over as early as `x = 8`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{FamaError, Result};

pub(crate) const J0_SERIES_MAX: f64 = 8.0;
pub(crate) const J0_MILLER_MAX: f64 = 25.0;
const I0_SERIES_MAX: f64 = 20.0;

/// Zero-order Bessel function of the first kind.
pub fn bessel_j0(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(FamaError::Domain(format!("bessel_j0 needs a finite argument, got {x}")));
    }
    Ok(j0(x))
}

/// `e^{-x} I0(x)` for `x >= 0`. Never overflows.
pub fn bessel_i0_scaled(x: f64) -> Result<f64> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(FamaError::Domain(format!(
            "bessel_i0_scaled needs a finite non-negative argument, got {x}"
        )));
    }
    Ok(i0_scaled(x))
}

/// Unscaled `I0(x)`; overflows to infinity past `x ~ 713`.
pub fn bessel_i0(x: f64) -> Result<f64> {
    bessel_i0_scaled(x).map(|s| s * x.exp())
}

pub(crate) fn j0(x: f64) -> f64 {
    let x = x.abs();
    if x <= J0_SERIES_MAX {
        j0_series(x)
    } else if x <= J0_MILLER_MAX {
        j0_miller(x)
    } else {
        j0_asymptotic(x)
    }
}

pub(crate) fn j0_series(x: f64) -> f64 {
    let h = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut m = 0.0;
    loop {
        m += 1.0;
        term *= -h / (m * m);
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-3) && m > h.sqrt() {
            break;
        }
    }
    sum
}

pub(crate) fn j0_miller(x: f64) -> f64 {
    // Start far enough above x that J_start(x) is below 1e-18.
    let mut k = 2 * ((x as usize + 40) / 2);
    let two_over_x = 2.0 / x;
    let mut next = 0.0_f64;
    let mut cur = 1e-30_f64;
    let mut norm = 0.0_f64;
    while k > 0 {
        let prev = k as f64 * two_over_x * cur - next;
        next = cur;
        cur = prev;
        k -= 1;
        if k.is_multiple_of(2) && k > 0 {
            norm += 2.0 * cur;
        }
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            next *= 1e-250;
            norm *= 1e-250;
        }
    }
    norm += cur;
    cur / norm
}

/// Hankel coefficients `a_k = prod_{j<=k} (2j-1)^2 / (k! 8^k)` evaluated at `1/x`.
fn hankel_terms(x: f64, mut f: impl FnMut(usize, f64) -> bool) {
    let mut term = 1.0;
    let mut k = 0usize;
    loop {
        if !f(k, term) {
            break;
        }
        k += 1;
        let odd = (2 * k - 1) as f64;
        let next = term * odd * odd / (k as f64 * 8.0 * x);
        if next.abs() > term.abs() || k > 200 {
            break;
        }
        term = next;
    }
}

pub(crate) fn j0_asymptotic(x: f64) -> f64 {
    let mut p = 0.0;
    let mut q = 0.0;
    hankel_terms(x, |k, t| {
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * t;
        } else {
            // Q0 starts at -1/(8x)
            q -= sign * t;
        }
        t > 1e-18
    });
    let (s, c) = x.sin_cos();
    let cos_chi = (c + s) * FRAC_1_SQRT_2;
    let sin_chi = (s - c) * FRAC_1_SQRT_2;
    (2.0 / (PI * x)).sqrt() * (p * cos_chi - q * sin_chi)
}

pub(crate) fn i0_scaled(x: f64) -> f64 {
    if x <= I0_SERIES_MAX {
        let h = 0.25 * x * x;
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut m = 0.0;
        while term > 1e-17 * sum {
            m += 1.0;
            term *= h / (m * m);
            sum += term;
        }
        sum * (-x).exp()
    } else {
        let mut sum = 0.0;
        hankel_terms(x, |_, t| {
            sum += t;
            t > 1e-18 * sum
        });
        sum / (2.0 * PI * x).sqrt()
    }
}
