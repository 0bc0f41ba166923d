//! Factorial logs and Poisson tail probabilities used by the Marcum-Q series.

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

pub(crate) fn ln_factorial(k: u64) -> f64 {
    if k < 24 {
        let mut s = 0.0;
        for i in 2..=k {
            s += (i as f64).ln();
        }
        return s;
    }
    // Stirling series; the first omitted term is below 1e-17 for k >= 24.
    let x = k as f64;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    x * x.ln() - x + 0.5 * x.ln() + LN_SQRT_2PI
        + inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)))
}

/// `P(Pois(mean) <= n)`, i.e. the regularized upper incomplete gamma `Q(n+1, mean)`.
pub(crate) fn poisson_cdf(n: u64, mean: f64) -> f64 {
    if mean <= 0.0 {
        return 1.0;
    }
    let a = n as f64 + 1.0;
    // ln(e^{-x} x^a / Gamma(a))
    let ln_pref = -mean + a * mean.ln() - ln_factorial(n);
    if mean < a + 1.0 {
        // lower series: P(a,x) = e^{-x} x^a / Gamma(a+1) * sum x^j / ((a+1)..(a+j))
        let mut ap = a;
        let mut del = 1.0 / a;
        let mut sum = del;
        for _ in 0..100_000 {
            ap += 1.0;
            del *= mean / ap;
            sum += del;
            if del.abs() < sum.abs() * 1e-17 {
                break;
            }
        }
        (1.0 - sum * ln_pref.exp()).clamp(0.0, 1.0)
    } else {
        // modified Lentz continued fraction for Q(a,x)
        const TINY: f64 = 1e-300;
        let mut b = mean + 1.0 - a;
        let mut c = 1.0 / TINY;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..100_000 {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < TINY {
                d = TINY;
            }
            c = b + an / c;
            if c.abs() < TINY {
                c = TINY;
            }
            d = 1.0 / d;
            let del = d * c;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        (ln_pref.exp() * h).clamp(0.0, 1.0)
    }
}
