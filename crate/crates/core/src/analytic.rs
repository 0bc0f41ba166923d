//! Deterministic outage, capacity and multiplexing-gain evaluators.
//!
//! The exact outage is a three-fold integral over the reference-port desired
//! power, the reference-port interference power and a Bessel angle. Folding
//! the angle into scaled `I0` and substituting `t = s q/(q+1)`,
//! `z = s/(q+1) + u` leaves a double Gauss-Laguerre sum
//!
//! ```text
//! P = q/(q+1) sum_i sum_j w_i w_j prod_k B_k(z_ij, t_i)
//! B_k = 1 + q/(q+1) exp(-c (sqrt(qz) - sqrt(t))^2) e^{-x} I0(x) - Q1(sqrt(2ct), sqrt(2cqz))
//! ```
//!
//! with `c = mu_k^2 / ((1 - mu_k^2)(q+1))` and `x = 2c sqrt(qzt)`. Every
//! exponent is non-positive.

use crate::channel::FamaScenario;
use crate::error::{FamaError, Result};
use crate::montecarlo::{Method, OutageEstimate};
use crate::quadrature::{integrate_panels, GaussRule};
use crate::specfun::{en_scaled, i0_scaled, j0, q1_from_means};

/// Largest port count accepted by [`outage_exact`].
pub const EXACT_CAP: usize = 32;

/// Decimal digits the alternating sum of [`outage_ub_closed`] may lose.
pub const MAX_LOST_DIGITS: f64 = 6.0;

const MAX_NODES: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSettings {
    /// Laguerre order over the scaled desired power.
    pub outer_nodes: usize,
    /// Laguerre order over the residual interference power.
    pub inner_nodes: usize,
    /// Nodes beyond this abscissa carry weight below `e^{-cutoff}` and are skipped.
    pub tail_cutoff: f64,
    /// Target absolute error.
    pub tolerance: f64,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        Self {
            outer_nodes: 48,
            inner_nodes: 48,
            tail_cutoff: 60.0,
            tolerance: 1e-9,
        }
    }
}

impl QuadratureSettings {
    pub fn validate(&self) -> Result<()> {
        if self.outer_nodes < 8 || self.inner_nodes < 8 {
            return Err(FamaError::InvalidArgument(format!(
                "quadrature orders must be at least 8, got {} and {}",
                self.outer_nodes, self.inner_nodes
            )));
        }
        if self.outer_nodes > MAX_NODES || self.inner_nodes > MAX_NODES {
            return Err(FamaError::InvalidArgument(format!(
                "quadrature orders are limited to {MAX_NODES}"
            )));
        }
        if !(self.tolerance > 0.0) || !(self.tail_cutoff > 0.0) {
            return Err(FamaError::InvalidArgument(
                "tolerance and tail cutoff must be positive".into(),
            ));
        }
        Ok(())
    }
}

fn check_q(q: f64) -> Result<()> {
    if q > 0.0 && q.is_finite() {
        Ok(())
    } else {
        Err(FamaError::Domain(format!("q = sigma_i^2 gamma / sigma^2 must be positive, got {q}")))
    }
}

/// `mu_2..mu_N`, rejecting fully correlated ports.
fn regular_mu(scenario: &FamaScenario) -> Result<&[f64]> {
    let mu = scenario.geometry.mu();
    match mu.iter().position(|m| m.abs() >= 1.0) {
        Some(i) => Err(FamaError::SingularCorrelation { port: i + 2 }),
        None => Ok(mu),
    }
}

/// Exact outage probability by node-doubled double Gauss-Laguerre quadrature.
pub fn outage_exact(scenario: &FamaScenario, settings: &QuadratureSettings) -> Result<OutageEstimate> {
    settings.validate()?;
    let n = scenario.n_ports();
    if n > EXACT_CAP {
        return Err(FamaError::ExactCapExceeded {
            n_ports: n,
            cap: EXACT_CAP,
        });
    }
    let q = scenario.q();
    check_q(q)?;
    let mu = regular_mu(scenario)?;
    let kappas: Vec<f64> = mu.iter().map(|m| m * m / ((1.0 - m * m) * (q + 1.0))).collect();

    let (mut outer, mut inner) = (settings.outer_nodes, settings.inner_nodes);
    let mut prev = exact_sum(&kappas, q, outer, inner, settings.tail_cutoff);
    loop {
        let (o2, i2) = ((2 * outer).min(MAX_NODES), (2 * inner).min(MAX_NODES));
        if (o2, i2) == (outer, inner) {
            return Err(FamaError::NoConvergence {
                tolerance: settings.tolerance,
                change: f64::NAN,
                nodes: outer,
            });
        }
        let next = exact_sum(&kappas, q, o2, i2, settings.tail_cutoff);
        let change = (next - prev).abs();
        if change <= settings.tolerance {
            return Ok(OutageEstimate::analytic(next.clamp(0.0, 1.0), Method::Exact));
        }
        if o2 == MAX_NODES && i2 == MAX_NODES {
            return Err(FamaError::NoConvergence {
                tolerance: settings.tolerance,
                change,
                nodes: MAX_NODES,
            });
        }
        (outer, inner, prev) = (o2, i2, next);
    }
}

fn exact_sum(kappas: &[f64], q: f64, outer: usize, inner: usize, cutoff: f64) -> f64 {
    let rs = GaussRule::laguerre(outer);
    let ru = GaussRule::laguerre(inner);
    let frac = q / (q + 1.0);
    let mut total = 0.0;
    for (&s, &ws) in rs.nodes.iter().zip(&rs.weights) {
        if s > cutoff || ws == 0.0 {
            break;
        }
        let t = s * frac;
        let mut row = 0.0;
        for (&u, &wu) in ru.nodes.iter().zip(&ru.weights) {
            if u > cutoff || wu == 0.0 {
                break;
            }
            let z = s / (q + 1.0) + u;
            let mut prod = 1.0;
            for &c in kappas {
                prod *= bracket(c, q, z, t);
            }
            row += wu * prod;
        }
        total += ws * row;
    }
    frac * total
}

#[inline]
fn bracket(c: f64, q: f64, z: f64, t: f64) -> f64 {
    if c == 0.0 {
        return q / (q + 1.0);
    }
    let qz = q * z;
    let d = qz.sqrt() - t.sqrt();
    let bessel = (-c * d * d).exp() * i0_scaled(2.0 * c * (qz * t).sqrt());
    1.0 + q / (q + 1.0) * bessel - q1_from_means(c * t, c * qz)
}

/// `e^{-x} I0(x)` from `(1/pi) int_0^pi exp(x (cos th - 1)) d th` with a
/// 64-node Gauss-Legendre rule. Accurate only while the integrand is not
/// sharply peaked (roughly `x <= 200`); kept as a cross-check of the
/// series route.
pub fn i0_scaled_theta(x: f64) -> f64 {
    thread_local! {
        static RULE: GaussRule = GaussRule::legendre(64);
    }
    RULE.with(|r| r.integrate(0.0, std::f64::consts::PI, |th| (x * (th.cos() - 1.0)).exp()))
        / std::f64::consts::PI
}

/// Single-integral upper bound
/// `int_0^inf e^{-z}(1 - e^{-qz}) prod_k [1 - e^{-a_k z}/((q+1)(1 + 4 a_k z))] dz`
/// with `a_k = mu_k^2 q / ((q+1)(1 - mu_k^2))`.
pub fn outage_ub_integral(
    scenario: &FamaScenario,
    settings: &QuadratureSettings,
) -> Result<OutageEstimate> {
    settings.validate()?;
    let q = scenario.q();
    check_q(q)?;
    let mu = regular_mu(scenario)?;
    let a: Vec<f64> = mu
        .iter()
        .map(|m| m * m * q / ((q + 1.0) * (1.0 - m * m)))
        .collect();
    let v = ub_integral(&a, q, settings.tolerance);
    Ok(OutageEstimate::analytic(v.clamp(0.0, 1.0), Method::BoundI))
}

/// The bound with every `|mu_k|` equal to `mu` over `n_ports` ports.
pub fn outage_ub_integral_equal(n_ports: usize, mu: f64, q: f64, tolerance: f64) -> Result<f64> {
    check_q(q)?;
    if n_ports == 0 {
        return Err(FamaError::InvalidArgument("need at least one port".into()));
    }
    if !(mu.abs() < 1.0) {
        return Err(FamaError::SingularCorrelation { port: 2 });
    }
    let a = vec![mu * mu * q / ((q + 1.0) * (1.0 - mu * mu)); n_ports - 1];
    Ok(ub_integral(&a, q, tolerance).clamp(0.0, 1.0))
}

fn ub_integral(a: &[f64], q: f64, tol: f64) -> f64 {
    let scale = 1.0 / (q + 1.0);
    // Independent ports (a = 0) contribute a constant factor.
    let mut constant = 1.0;
    let mut live = Vec::with_capacity(a.len());
    for &ak in a {
        if ak == 0.0 {
            constant *= 1.0 - scale;
        } else {
            live.push(ak);
        }
    }
    if live.is_empty() {
        return constant * q / (q + 1.0);
    }
    let f = |z: f64| {
        let mut r = (-z).exp() * -(-q * z).exp_m1();
        for &ak in &live {
            let x = ak * z;
            r *= 1.0 - scale * (-x).exp() / (1.0 + 4.0 * x);
        }
        r
    };
    let a_max = live.iter().cloned().fold(0.0, f64::max);
    let a_min = live.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut breaks = vec![0.0, 50.0];
    for p in [1.0 / q, 1.0 / (1.0 + q), 0.25 / a_max, 1.0 / a_max, 1.0 / a_min] {
        if p > 0.0 && p < 50.0 {
            breaks.push(p);
        }
    }
    let mut g = 1e-6;
    while g < 50.0 {
        breaks.push(g);
        g *= 4.0;
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    constant * integrate_panels(&f, &breaks, 0.01 * tol)
}

/// Closed-form equal-correlation bound with its cancellation diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedBound {
    /// Raw sum clamped to `[0, 1]`.
    pub value: f64,
    pub raw: f64,
    /// `log10(sum |t_k| / |sum t_k|)`.
    pub lost_digits: f64,
    pub clamped: bool,
}

/// Closed-form bound for `|mu_2| = ... = |mu_N| = mu`:
///
/// ```text
/// c e^c sum_{k=0}^{N-1} C(N-1,k) (-1)^k q^{-k} e^{k/4} E_k(k/4 + c),   c = (1 - mu^2)/(4 mu^2)
/// ```
///
/// Terms are built multiplicatively and summed with Neumaier compensation.
/// `mu = 0` returns the independent-port value `(q/(1+q))^N`. More than
/// [`MAX_LOST_DIGITS`] lost to cancellation is an error.
pub fn outage_ub_closed(n_ports: usize, mu: f64, q: f64) -> Result<ClosedBound> {
    check_q(q)?;
    if n_ports == 0 {
        return Err(FamaError::InvalidArgument("need at least one port".into()));
    }
    let mu = mu.abs();
    if !(mu < 1.0) {
        return Err(FamaError::Domain(format!("mu must lie in [0, 1), got {mu}")));
    }
    if mu == 0.0 {
        let v = (q / (1.0 + q)).powi(n_ports as i32);
        return Ok(ClosedBound {
            value: v,
            raw: v,
            lost_digits: 0.0,
            clamped: false,
        });
    }
    let c = (1.0 - mu * mu) / (4.0 * mu * mu);
    let m = (n_ports - 1) as f64;
    let mut coeff = 1.0; // C(N-1, k) q^{-k}
    let mut sum = 0.0;
    let mut comp = 0.0;
    let mut abs_sum = 0.0;
    for k in 0..n_ports {
        if k > 0 {
            coeff *= (m - (k - 1) as f64) / (k as f64 * q);
        }
        let mag = coeff * en_scaled(k as u32, k as f64 / 4.0 + c);
        let term = if k % 2 == 0 { mag } else { -mag };
        abs_sum += mag;
        let s = sum + term;
        comp += if sum.abs() >= term.abs() {
            (sum - s) + term
        } else {
            (term - s) + sum
        };
        sum = s;
    }
    let total = sum + comp;
    let lost_digits = if total == 0.0 {
        f64::INFINITY
    } else {
        (abs_sum / total.abs()).log10()
    };
    if lost_digits > MAX_LOST_DIGITS {
        return Err(FamaError::PrecisionLoss {
            lost_digits,
            limit: MAX_LOST_DIGITS,
        });
    }
    let raw = c * total;
    let value = raw.clamp(0.0, 1.0);
    Ok(ClosedBound {
        value,
        raw,
        lost_digits,
        clamped: value != raw,
    })
}

/// The integral the closed form sums term by term:
/// `int_0^inf e^{-z} [1 - e^{-az}/(q(1 + 4az))]^{N-1} dz`, `a = mu^2/(1 - mu^2)`.
/// Immune to cancellation, so it serves as a check and a fallback.
pub fn outage_ub_closed_integral(n_ports: usize, mu: f64, q: f64, tolerance: f64) -> Result<f64> {
    check_q(q)?;
    if n_ports == 0 || !(mu.abs() < 1.0) {
        return Err(FamaError::Domain(format!(
            "need N >= 1 and |mu| < 1, got N = {n_ports}, mu = {mu}"
        )));
    }
    let a = mu * mu / (1.0 - mu * mu);
    let e = (n_ports - 1) as i32;
    let f = |z: f64| (-z).exp() * (1.0 - (-a * z).exp() / (q * (1.0 + 4.0 * a * z))).powi(e);
    let mut breaks = vec![0.0, 50.0];
    if a > 0.0 {
        for p in [0.25 / a, 1.0 / a] {
            if p < 50.0 {
                breaks.push(p);
            }
        }
    }
    let mut g = 1e-4;
    while g < 50.0 {
        breaks.push(g);
        g *= 4.0;
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    Ok(integrate_panels(&f, &breaks, 0.01 * tolerance))
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if (0.0..=1.0).contains(&epsilon) {
        Ok(())
    } else {
        Err(FamaError::Domain(format!("outage probability must lie in [0, 1], got {epsilon}")))
    }
}

/// `(N_I + 1)(1 - epsilon) log2(1 + gamma)` in bits/s/Hz.
pub fn capacity_lower_bound(scenario: &FamaScenario, epsilon: f64) -> Result<f64> {
    check_epsilon(epsilon)?;
    Ok(multiplexing_gain(scenario.n_users(), epsilon)? * (1.0 + scenario.gamma).log2())
}

/// `(N_I + 1)(1 - epsilon)`.
pub fn multiplexing_gain(n_users: usize, epsilon: f64) -> Result<f64> {
    check_epsilon(epsilon)?;
    if n_users == 0 {
        return Err(FamaError::InvalidArgument("need at least one user".into()));
    }
    Ok(n_users as f64 * (1.0 - epsilon))
}

/// `min{(N - 1)(1 - mu^2)(N_I + 1)/q, N_I + 1}`.
pub fn mg_approx_equal_corr(n_ports: usize, mu: f64, q: f64, n_interferers: usize) -> Result<f64> {
    check_q(q)?;
    if n_ports < 2 {
        return Err(FamaError::InvalidArgument(format!("need N >= 2, got {n_ports}")));
    }
    let users = (n_interferers + 1) as f64;
    Ok(((n_ports - 1) as f64 * (1.0 - mu * mu) * users / q).min(users))
}

/// `min{(N/2 - 1)(1 - J0^2(pi W))(N_I + 1)/q, N_I + 1}`.
pub fn mg_approx_general(n_ports: usize, width: f64, q: f64, n_interferers: usize) -> Result<f64> {
    check_q(q)?;
    if n_ports < 3 {
        return Err(FamaError::InvalidArgument(format!("need N >= 3, got {n_ports}")));
    }
    if !(width >= 0.0) || !width.is_finite() {
        return Err(FamaError::InvalidArgument(format!("width must be non-negative, got {width}")));
    }
    let users = (n_interferers + 1) as f64;
    let j = j0(std::f64::consts::PI * width);
    Ok(((n_ports as f64 / 2.0 - 1.0) * (1.0 - j * j) * users / q).min(users))
}

/// Capacity of `N_I + 1` users at target `gamma` over two users at
/// `N_I gamma`: `((N_I + 1)/2) / (1 + log_gamma N_I)`.
pub fn more_users_capacity_ratio(gamma: f64, n_interferers: usize) -> Result<f64> {
    if !(gamma > 1.0) || !gamma.is_finite() {
        return Err(FamaError::Domain(format!("gamma must exceed 1, got {gamma}")));
    }
    if n_interferers < 2 {
        return Err(FamaError::InvalidArgument(format!(
            "need at least two interferers, got {n_interferers}"
        )));
    }
    let ni = n_interferers as f64;
    Ok((ni + 1.0) / 2.0 / (1.0 + ni.ln() / gamma.ln()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{make_geometry, PortGeometry};

    fn scenario(mu: Vec<f64>, q: f64) -> FamaScenario {
        FamaScenario::new(PortGeometry::from_correlations(mu).unwrap(), 1.0, 1.0, 1, q).unwrap()
    }

    #[test]
    fn single_port_values() {
        let s = FamaScenario::new(make_geometry(1, 0.0).unwrap(), 1.0, 1.0, 1, 10.0).unwrap();
        let st = QuadratureSettings::default();
        let want = 10.0 / 11.0;
        assert!((outage_exact(&s, &st).unwrap().probability - want).abs() < 1e-11);
        assert!((outage_ub_integral(&s, &st).unwrap().probability - want).abs() < 1e-12);
        assert_eq!(outage_ub_closed(1, 0.3, 10.0).unwrap().value, 1.0);
    }

    #[test]
    fn independent_ports_factorize() {
        let st = QuadratureSettings::default();
        let s = scenario(vec![0.0, 0.0], 1.0);
        assert!((outage_exact(&s, &st).unwrap().probability - 0.125).abs() < 1e-12);
        assert!((outage_ub_integral(&s, &st).unwrap().probability - 0.125).abs() < 1e-12);
    }

    #[test]
    fn exact_rejects_cap_and_singular() {
        let st = QuadratureSettings::default();
        let s = FamaScenario::identical_users(make_geometry(33, 1.0).unwrap(), 2, 1.0).unwrap();
        assert_eq!(
            outage_exact(&s, &st).unwrap_err(),
            FamaError::ExactCapExceeded { n_ports: 33, cap: 32 }
        );
        let s = FamaScenario::identical_users(make_geometry(3, 0.0).unwrap(), 2, 1.0).unwrap();
        assert_eq!(
            outage_exact(&s, &st).unwrap_err(),
            FamaError::SingularCorrelation { port: 2 }
        );
        assert!(outage_ub_integral(&s, &st).is_err());
    }

    #[test]
    fn settings_validation() {
        let st = QuadratureSettings {
            outer_nodes: 4,
            ..QuadratureSettings::default()
        };
        assert!(st.validate().is_err());
        let st = QuadratureSettings {
            tolerance: 0.0,
            ..QuadratureSettings::default()
        };
        assert!(st.validate().is_err());
    }

    #[test]
    fn theta_form_matches_series() {
        for &x in &[0.0, 0.3, 1.0, 5.0, 20.0, 80.0] {
            let a = i0_scaled_theta(x);
            let b = i0_scaled(x);
            assert!((a - b).abs() < 1e-12 * b.max(1e-300).max(1.0), "x={x}: {a} vs {b}");
        }
    }

    #[test]
    fn closed_bound_matches_its_integral() {
        for &(n, mu, q) in &[(2usize, 0.3, 10.0), (10, 0.3, 10.0), (20, 0.2, 10.0), (5, 0.7, 3.0)] {
            let c = outage_ub_closed(n, mu, q).unwrap();
            let i = outage_ub_closed_integral(n, mu, q, 1e-12).unwrap();
            assert!((c.raw - i).abs() < 1e-8, "N={n} mu={mu}: {} vs {i}", c.raw);
        }
        let v = outage_ub_closed(10, 0.3, 10.0).unwrap();
        assert!((v.value - 0.526625).abs() < 1e-6);
        let v = outage_ub_closed(100, 0.3, 10.0).unwrap();
        assert!((v.value - 0.0065655).abs() < 1e-6);
    }

    #[test]
    fn closed_bound_reports_cancellation() {
        match outage_ub_closed(200, 0.3, 10.0) {
            Err(FamaError::PrecisionLoss { lost_digits, .. }) => assert!(lost_digits > 6.0),
            other => panic!("{other:?}"),
        }
        let v = outage_ub_closed(100, 0.3, 10.0).unwrap();
        assert!(v.lost_digits > 5.0 && v.lost_digits < 6.0);
    }

    #[test]
    fn closed_bound_zero_mu() {
        let v = outage_ub_closed(3, 0.0, 1.0).unwrap();
        assert_eq!(v.value, 0.125);
        assert!(outage_ub_closed(3, 1.0, 1.0).is_err());
        assert!(outage_ub_closed(3, 0.5, 0.0).is_err());
    }

    #[test]
    fn capacity_and_gain() {
        let s = FamaScenario::identical_users(make_geometry(2, 1.0).unwrap(), 100, 1.0).unwrap();
        assert_eq!(capacity_lower_bound(&s, 0.0).unwrap(), 101.0);
        assert_eq!(capacity_lower_bound(&s, 1.0).unwrap(), 0.0);
        assert!((multiplexing_gain(6, 0.3).unwrap() - 4.2).abs() < 1e-12);
        assert!((multiplexing_gain(6, 0.2).unwrap() - 4.8).abs() < 1e-12);
        assert_eq!(multiplexing_gain(7, 1.0).unwrap(), 0.0);
        assert!(capacity_lower_bound(&s, 1.5).is_err());
    }

    #[test]
    fn approximate_gains() {
        assert_eq!(mg_approx_equal_corr(11, 0.0, 10.0, 4).unwrap(), 5.0);
        assert_eq!(mg_approx_equal_corr(1000, 0.0, 10.0, 4).unwrap(), 5.0);
        assert!(mg_approx_general(2, 1.0, 1.0, 1).is_err());
        // W = 0.7655... puts pi W on the first zero of J0
        let w = 2.404_825_557_695_773 / std::f64::consts::PI;
        let m = mg_approx_general(42, w, 100.0 * 10.0, 100).unwrap();
        assert!((m - 20.0 * 101.0 / 1000.0).abs() < 1e-9);
    }

    #[test]
    fn more_users_ratio() {
        assert!((more_users_capacity_ratio(10.0, 100).unwrap() - 50.5 / 3.0).abs() < 1e-12);
        assert!((more_users_capacity_ratio(7.0, 7).unwrap() - 2.0).abs() < 1e-12);
        assert!((more_users_capacity_ratio(100.0, 100).unwrap() - 50.5 / 2.0).abs() < 1e-12);
        assert!(more_users_capacity_ratio(1.0, 100).is_err());
        assert!(more_users_capacity_ratio(10.0, 1).is_err());
    }
}
