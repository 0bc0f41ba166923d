//! Generalized exponential integral `E_n(x) = int_1^inf e^{-xt} / t^n dt`.

use crate::error::{FamaError, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const SERIES_MAX: f64 = 1.5;

pub fn expint_en(n: u32, x: f64) -> Result<f64> {
    expint_en_scaled(n, x).map(|s| s * (-x).exp())
}

/// `e^x E_n(x)`, finite for every `x > 0` and the form the bounds consume.
pub fn expint_en_scaled(n: u32, x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(FamaError::Domain(format!(
            "expint_en needs a finite positive argument, got {x}"
        )));
    }
    Ok(en_scaled(n, x))
}

pub(crate) fn en_scaled(n: u32, x: f64) -> f64 {
    if n == 0 {
        return 1.0 / x;
    }
    if x >= SERIES_MAX {
        continued_fraction(n, x)
    } else {
        series(n, x) * x.exp()
    }
}

fn continued_fraction(n: u32, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let nm1 = f64::from(n) - 1.0;
    let mut b = x + f64::from(n);
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..100_000 {
        let fi = f64::from(i);
        let an = -fi * (nm1 + fi);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h
}

fn series(n: u32, x: f64) -> f64 {
    let nm1 = n - 1;
    let mut ans = if nm1 != 0 {
        1.0 / f64::from(nm1)
    } else {
        -x.ln() - EULER_GAMMA
    };
    let mut fact = 1.0;
    for i in 1..100_000u32 {
        fact *= -x / f64::from(i);
        let del = if i != nm1 {
            -fact / (f64::from(i) - f64::from(nm1))
        } else {
            let psi = -EULER_GAMMA + (1..=nm1).map(|j| 1.0 / f64::from(j)).sum::<f64>();
            fact * (-x.ln() + psi)
        };
        ans += del;
        if del.abs() < ans.abs() * 1e-17 {
            break;
        }
    }
    ans
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Simpson oracle for `int_1^inf e^{-x t} t^{-n} dt` after `t = e^u`,
    /// which leaves the smooth integrand `exp(-x e^u - (n - 1) u)`.
    fn en_by_quadrature(n: u32, x: f64) -> f64 {
        let upper = (50.0 / x).ln().max(1.0) + 1.0;
        let m = 200_000;
        let h = upper / m as f64;
        let f = |u: f64| (-x * u.exp() - (f64::from(n) - 1.0) * u).exp();
        let mut acc = f(0.0) + f(upper);
        for i in 1..m {
            acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
        }
        acc * h / 3.0
    }

    #[test]
    fn e0_closed_form() {
        let got = expint_en(0, 2.0).unwrap();
        assert!((got - (-2.0f64).exp() / 2.0).abs() < 1e-16);
    }

    #[test]
    fn e1_at_one() {
        let got = expint_en(1, 1.0).unwrap();
        assert!((got - 0.219_384).abs() < 1e-6);
        let oracle = en_by_quadrature(1, 1.0);
        assert!(((got - oracle) / oracle).abs() < 1e-10, "{got} vs {oracle}");
    }

    #[test]
    fn matches_quadrature_on_both_sides_of_switch() {
        for &n in &[1u32, 2, 5, 17] {
            for &x in &[0.05, 0.7, 1.49, 1.51, 3.0, 12.0] {
                let got = expint_en(n, x).unwrap();
                let want = en_by_quadrature(n, x);
                assert!(((got - want) / want).abs() < 1e-9, "n={n} x={x}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn recurrence_holds_for_large_orders() {
        // k E_{k+1}(x) + x E_k(x) = e^{-x}, written in scaled form
        for &x in &[0.01, 0.3, 1.0, 1.5, 2.0, 7.0, 40.0, 300.0] {
            for k in 1..=512u32 {
                let lhs = f64::from(k) * en_scaled(k + 1, x) + x * en_scaled(k, x);
                assert!((lhs - 1.0).abs() < 1e-9, "x={x} k={k}: {lhs}");
            }
        }
    }

    #[test]
    fn rejects_non_positive() {
        assert!(expint_en(1, 0.0).is_err());
        assert!(expint_en(3, -1.0).is_err());
    }
}
