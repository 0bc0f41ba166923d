//! First-order Marcum Q function.
//!
//! Evaluated through its Poisson-mixture series
//!
//! ```text
//! Q1(a, b) = sum_k  e^{-a²/2} (a²/2)^k / k!  *  P(Pois(b²/2) <= k)
//! ```
//!
//! which is the `I_k`-weighted Bessel series regrouped so that every term is
//! non-negative. Terms are visited only inside the window where the Poisson
//! weights matter. The lower edge sits 12 standard deviations below the mean
//! (Chernoff tail below `e^{-72}`), so the window holds all the mass to
//! double precision and the sum is normalized by the weights it visited. The upper edge is found on the fly from
//! the geometric tail bound `w_k r / (1 - r)` with `r = λ / (k + 1)`, which is
//! valid because the weight ratio decreases past the mode.

use crate::error::{FamaError, Result};
use crate::specfun::gamma::{ln_factorial, poisson_cdf};

const TAIL_TOLERANCE: f64 = 1e-17;

pub fn marcum_q1(a: f64, b: f64) -> Result<f64> {
    if !(a >= 0.0 && b >= 0.0) || !a.is_finite() || !b.is_finite() {
        return Err(FamaError::Domain(format!(
            "marcum_q1 needs finite non-negative arguments, got ({a}, {b})"
        )));
    }
    Ok(q1(a, b))
}

pub(crate) fn q1(a: f64, b: f64) -> f64 {
    q1_from_means(0.5 * a * a, 0.5 * b * b)
}

/// `Q1(sqrt(2 lambda), sqrt(2 y))`, i.e. `P(Pois(y) <= Pois(lambda))`.
pub(crate) fn q1_from_means(lambda: f64, y: f64) -> f64 {
    if y <= 0.0 {
        return 1.0;
    }
    if lambda <= 0.0 {
        return (-y).exp();
    }
    let ln_lambda = lambda.ln();
    let ln_y = y.ln();

    let kmin = (lambda - 12.0 * lambda.sqrt() - 10.0).floor().max(0.0) as u64;
    let mut w = (-lambda + kmin as f64 * ln_lambda - ln_factorial(kmin)).exp();
    let mut lp = -y + kmin as f64 * ln_y - ln_factorial(kmin);
    let mut p = lp.exp();
    let mut cdf = if kmin == 0 { p } else { poisson_cdf(kmin, y) };

    // Dividing by the summed weights cancels the rounding in the starting
    // weight, which grows with lambda.
    let mut total = w * cdf;
    let mut mass = w;
    let mut k = kmin;
    let limit = kmin + 10_000_000;
    while k < limit {
        k += 1;
        let kf = k as f64;
        w *= lambda / kf;
        if p > 1e-290 {
            p *= y / kf;
        } else {
            lp += ln_y - kf.ln();
            p = lp.exp();
        }
        cdf = (cdf + p).min(1.0);
        total += w * cdf;
        mass += w;
        if kf > lambda {
            let r = lambda / (kf + 1.0);
            if w * r / (1.0 - r) < TAIL_TOLERANCE {
                break;
            }
        }
    }
    (total / mass).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::bessel::i0_scaled;

    /// Composite Gauss-free Simpson oracle of the defining integral
    /// `int_b^inf x exp(-(x²+a²)/2) I0(a x) dx`.
    fn q1_by_quadrature(a: f64, b: f64) -> f64 {
        let upper = a.max(b) + 40.0;
        let n = 200_000;
        let h = (upper - b) / n as f64;
        let f = |x: f64| x * (-(x - a) * (x - a) / 2.0).exp() * i0_scaled(a * x);
        let mut s = f(b) + f(upper);
        for i in 1..n {
            let x = b + i as f64 * h;
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
        }
        s * h / 3.0
    }

    #[test]
    fn boundary_values() {
        for &a in &[0.0, 0.5, 3.0, 40.0] {
            assert_eq!(marcum_q1(a, 0.0).unwrap(), 1.0);
        }
        for &b in &[0.1, 1.0, 4.0] {
            let got = marcum_q1(0.0, b).unwrap();
            assert!((got - (-b * b / 2.0).exp()).abs() < 1e-15);
        }
    }

    #[test]
    fn matches_quadrature() {
        let want = q1_by_quadrature(1.0, 1.0);
        assert!((marcum_q1(1.0, 1.0).unwrap() - want).abs() < 1e-8);
        for &(a, b) in &[(0.3, 2.0), (2.0, 0.3), (5.0, 5.5), (12.0, 10.0), (30.0, 31.0)] {
            let want = q1_by_quadrature(a, b);
            let got = q1(a, b);
            assert!((got - want).abs() < 1e-10, "({a},{b}): {got} vs {want}");
        }
    }

    #[test]
    fn large_arguments_stay_in_unit_interval() {
        for &(a, b) in &[(80.0, 80.0), (200.0, 150.0), (150.0, 200.0), (1.0, 60.0)] {
            let v = q1(a, b);
            assert!((0.0..=1.0).contains(&v), "({a},{b}) -> {v}");
        }
        assert!(q1(200.0, 150.0) > 1.0 - 1e-12);
        assert!(q1(150.0, 200.0) < 1e-12);
        // Q1(a, a) = (1 + e^{-a²} I0(a²)) / 2
        for &a in &[0.5, 3.0, 20.0, 100.0] {
            let want = 0.5 * (1.0 + i0_scaled(a * a));
            assert!((q1(a, a) - want).abs() < 1e-12, "a={a}");
        }
    }

    #[test]
    fn rejects_negative() {
        assert!(marcum_q1(-0.1, 1.0).is_err());
        assert!(marcum_q1(1.0, -0.1).is_err());
    }
}
