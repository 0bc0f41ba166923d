//! Monotone envelope of `|J0|` and its inverse.
//!
//! `|J0|` oscillates, so "the smallest `rho*` past which `|J0| <= mu*`" is
//! decided by the successive local maxima of `|J0|`. Those maxima decrease
//! strictly, which makes the inverse antitone in `mu*`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{FamaError, Result};
use crate::specfun::bessel::j0;

/// Largest abscissa covered by the shared table.
pub const ENVELOPE_CAP: f64 = 500.0;

#[derive(Debug, Clone)]
pub struct EnvelopeTable {
    /// `(abscissa, peak)` of successive maxima of `|J0|`, starting at `(0, 1)`.
    extrema: Vec<(f64, f64)>,
    /// `zeros[i]` is the zero that ends the descending branch after `extrema[i]`.
    zeros: Vec<f64>,
    cap: f64,
}

impl EnvelopeTable {
    /// Shared table up to [`ENVELOPE_CAP`], built on first use.
    pub fn global() -> &'static EnvelopeTable {
        static TABLE: OnceLock<EnvelopeTable> = OnceLock::new();
        TABLE.get_or_init(|| EnvelopeTable::build(ENVELOPE_CAP))
    }

    pub fn build(cap: f64) -> Self {
        let mut zeros = Vec::new();
        let mut s = 1usize;
        loop {
            let z = j0_zero(s);
            zeros.push(z);
            if z > cap {
                break;
            }
            s += 1;
        }
        let mut extrema = vec![(0.0, 1.0)];
        for pair in zeros.windows(2) {
            let (x, peak) = golden_max(pair[0], pair[1]);
            if x > cap {
                break;
            }
            extrema.push((x, peak));
        }
        zeros.truncate(extrema.len());
        Self { extrema, zeros, cap }
    }

    pub fn extrema(&self) -> &[(f64, f64)] {
        &self.extrema
    }

    pub fn zeros(&self) -> &[f64] {
        &self.zeros
    }

    pub fn cap(&self) -> f64 {
        self.cap
    }

    /// Smallest `rho* >= 0` with `|J0(rho)| <= mu_star` for every `rho >= rho*`.
    pub fn inverse(&self, mu_star: f64) -> Result<f64> {
        if !(mu_star > 0.0 && mu_star <= 1.0) {
            return Err(FamaError::Domain(format!(
                "envelope inverse needs mu* in (0, 1], got {mu_star}"
            )));
        }
        let above = self.extrema.partition_point(|&(_, peak)| peak > mu_star);
        if above == 0 {
            return Ok(0.0);
        }
        if above == self.extrema.len() {
            return Err(FamaError::ResolutionExceeded {
                target: mu_star,
                cap: self.cap,
            });
        }
        // |J0| falls from the peak above mu* to zero on this branch.
        let i = above - 1;
        let mut lo = self.extrema[i].0;
        let mut hi = self.zeros[i];
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if j0(mid).abs() > mu_star {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * hi {
                break;
            }
        }
        Ok(hi)
    }
}

/// Inverse of the monotone `|J0|` envelope over the shared table.
pub fn j0_envelope_inverse(mu_star: f64) -> Result<f64> {
    EnvelopeTable::global().inverse(mu_star)
}

/// `s`-th positive zero of `J0`: McMahon's expansion for the guess, then
/// bisection inside a bracket that always straddles the sign change.
fn j0_zero(s: usize) -> f64 {
    let beta = (s as f64 - 0.25) * PI;
    let b8 = 8.0 * beta;
    let guess = beta + 1.0 / b8 - 124.0 / (3.0 * b8.powi(3));
    let mut lo = guess - 0.25;
    let mut hi = guess + 0.25;
    let f_lo = j0(lo);
    debug_assert!(f_lo * j0(hi) < 0.0, "zero {s} not bracketed");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (j0(mid) * f_lo) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Golden-section search for the maximum of `|J0|` on `[a, b]`.
fn golden_max(mut a: f64, mut b: f64) -> (f64, f64) {
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let mut fc = j0(c).abs();
    let mut fd = j0(d).abs();
    while b - a > 1e-10 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = j0(c).abs();
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = j0(d).abs();
        }
    }
    let x = 0.5 * (a + b);
    (x, j0(x).abs())
}
