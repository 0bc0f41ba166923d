//! Gauss rules and a small adaptive integrator.

use std::f64::consts::PI;

/// Nodes and weights of a Gauss rule.
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    /// `n`-point Gauss-Legendre rule on `[-1, 1]`.
    pub fn legendre(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, z);
                dp = d;
                let dz = p / d;
                z -= dz;
                if dz.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, z);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - z * z) * dp * dp);
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// `n`-point Gauss-Laguerre rule for `int_0^inf e^{-x} f(x) dx`.
    ///
    /// Polynomials are carried as `e^{-x/2} L_k(x)` so the recurrence stays
    /// finite at the large nodes. Weights that underflow are returned as 0.
    pub fn laguerre(n: usize) -> Self {
        assert!(n >= 1);
        let nf = n as f64;
        let mut nodes: Vec<f64> = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        let mut z = 0.0;
        for i in 0..n {
            z = match i {
                0 => 3.0 / (1.0 + 2.4 * nf),
                1 => z + 15.0 / (1.0 + 2.5 * nf),
                _ => {
                    let ai = (i - 1) as f64;
                    z + (1.0 + 2.55 * ai) / (1.9 * ai) * (z - nodes[i - 2])
                }
            };
            let mut prev = 0.0;
            for _ in 0..200 {
                let (ln, lnm1) = scaled_laguerre(n, z);
                prev = lnm1;
                let dz = z * ln / (nf * (ln - lnm1));
                z -= dz;
                if dz.abs() <= 1e-15 * z {
                    break;
                }
            }
            let (_, lnm1) = scaled_laguerre(n, z);
            if lnm1 != 0.0 {
                prev = lnm1;
            }
            nodes.push(z);
            weights.push(z * (-z).exp() / (nf * nf * prev * prev));
        }
        // The weights integrate 1 exactly; renormalizing removes the
        // rounding accumulated in the recurrence at high orders.
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integrate `f` over `[a, b]` with a Legendre rule.
    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p1 = 1.0;
    let mut p2 = 0.0;
    for j in 0..n {
        let p3 = p2;
        p2 = p1;
        p1 = ((2 * j + 1) as f64 * z * p2 - j as f64 * p3) / (j + 1) as f64;
    }
    let dp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
    (p1, dp)
}

/// `(e^{-x/2} L_n(x), e^{-x/2} L_{n-1}(x))`.
fn scaled_laguerre(n: usize, x: f64) -> (f64, f64) {
    let mut p1 = (-0.5 * x).exp();
    let mut p2 = 0.0;
    for j in 0..n {
        let p3 = p2;
        p2 = p1;
        p1 = (((2 * j + 1) as f64 - x) * p2 - j as f64 * p3) / (j + 1) as f64;
    }
    (p1, p2)
}

/// Adaptive Gauss-Legendre integration: a 16-point panel is accepted when it
/// agrees with the sum over its two halves to within `tol` (scaled by the
/// panel's share of the interval).
pub fn integrate_adaptive(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    thread_local! {
        static RULE: GaussRule = GaussRule::legendre(16);
    }
    RULE.with(|rule| {
        let whole = rule.integrate(a, b, f);
        adapt(rule, f, a, b, whole, tol, 0)
    })
}

fn adapt(
    rule: &GaussRule,
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let mid = 0.5 * (a + b);
    let left = rule.integrate(a, mid, f);
    let right = rule.integrate(mid, b, f);
    if (left + right - whole).abs() <= tol || depth >= 40 {
        return left + right;
    }
    adapt(rule, f, a, mid, left, 0.5 * tol, depth + 1)
        + adapt(rule, f, mid, b, right, 0.5 * tol, depth + 1)
}

/// Adaptive integration over consecutive panels `[breaks[i], breaks[i+1]]`.
pub fn integrate_panels(f: &impl Fn(f64) -> f64, breaks: &[f64], tol: f64) -> f64 {
    let panels = breaks.len().saturating_sub(1).max(1) as f64;
    breaks
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| integrate_adaptive(f, w[0], w[1], tol / panels))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_integrates_polynomials_exactly() {
        let rule = GaussRule::legendre(12);
        for k in 0..24 {
            let got = rule.integrate(-1.0, 1.0, |x| x.powi(k));
            let want = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
            assert!((got - want).abs() < 1e-14, "k={k}");
        }
    }

    #[test]
    fn laguerre_moments() {
        for &n in &[8usize, 32, 64, 128, 256] {
            let rule = GaussRule::laguerre(n);
            let mut fact = 1.0;
            for k in 0..12 {
                if k > 0 {
                    fact *= k as f64;
                }
                let got: f64 = rule
                    .nodes
                    .iter()
                    .zip(&rule.weights)
                    .map(|(x, w)| w * x.powi(k))
                    .sum();
                assert!(((got - fact) / fact).abs() < 1e-11, "n={n} k={k}: {got}");
            }
            for w in rule.nodes.windows(2) {
                assert!(w[1] > w[0], "n={n} nodes not increasing");
            }
        }
    }

    #[test]
    fn adaptive_handles_sharp_features() {
        let got = integrate_panels(&|x: f64| 1.0 / (1.0 + 400.0 * x), &[0.0, 1.0, 10.0], 1e-13);
        let want = (1.0 + 4000.0f64).ln() / 400.0;
        assert!((got - want).abs() < 1e-12, "{got} vs {want}");
    }
}
