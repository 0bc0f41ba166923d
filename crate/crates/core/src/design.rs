//! Inverse design: ports, antenna width and correlation needed for a target
//! multiplexing gain `m` at SIR target `gamma`.

use std::f64::consts::PI;

use crate::analytic::{outage_ub_closed, outage_ub_integral_equal};
use crate::channel::{make_geometry, FamaScenario};
use crate::error::{FamaError, Result};
use crate::montecarlo::McRun;
use crate::specfun::{j0, j0_envelope_inverse};

/// Port counts explored before a target is declared out of reach.
pub const MAX_SEARCH_PORTS: usize = 1 << 16;

const UB_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignTarget {
    pub mult_gain: f64,
    pub gamma: f64,
    pub n_interferers: usize,
    /// `sigma_i^2 gamma / sigma^2`.
    pub q: f64,
}

impl DesignTarget {
    pub fn new(mult_gain: f64, gamma: f64, n_interferers: usize, q: f64) -> Result<Self> {
        if !(mult_gain > 0.0) || !(gamma > 0.0) || !(q > 0.0) {
            return Err(FamaError::InvalidArgument(format!(
                "need m, gamma, q > 0, got m = {mult_gain}, gamma = {gamma}, q = {q}"
            )));
        }
        if n_interferers == 0 {
            return Err(FamaError::InvalidArgument("need at least one interferer".into()));
        }
        if mult_gain > (n_interferers + 1) as f64 {
            return Err(FamaError::InvalidArgument(format!(
                "multiplexing gain {mult_gain} exceeds the {} users",
                n_interferers + 1
            )));
        }
        Ok(Self {
            mult_gain,
            gamma,
            n_interferers,
            q,
        })
    }

    /// `sigma_i^2 = N_I sigma^2`, hence `q = N_I gamma`.
    pub fn identical_users(mult_gain: f64, gamma: f64, n_interferers: usize) -> Result<Self> {
        Self::new(mult_gain, gamma, n_interferers, n_interferers as f64 * gamma)
    }

    pub fn n_users(&self) -> f64 {
        (self.n_interferers + 1) as f64
    }

    /// Largest outage compatible with the target, `1 - m/(N_I + 1)`.
    pub fn outage_budget(&self) -> f64 {
        1.0 - self.mult_gain / self.n_users()
    }

    /// Scenario with `sigma = 1` reproducing this target's `q`.
    pub fn scenario(&self, n_ports: usize, width: f64) -> Result<FamaScenario> {
        FamaScenario::new(
            make_geometry(n_ports, width)?,
            1.0,
            (self.q / self.gamma).sqrt(),
            self.n_interferers,
            self.gamma,
        )
    }
}

/// A design answer, or why none exists.
#[derive(Debug, Clone, PartialEq)]
pub enum DesignOutcome<T> {
    Feasible(T),
    Infeasible {
        reason: String,
        /// Best multiplexing gain reachable under the same constraint, if known.
        closest: Option<f64>,
    },
}

impl<T> DesignOutcome<T> {
    pub fn feasible(self) -> Option<T> {
        match self {
            DesignOutcome::Feasible(v) => Some(v),
            DesignOutcome::Infeasible { .. } => None,
        }
    }

    pub fn is_feasible(&self) -> bool {
        matches!(self, DesignOutcome::Feasible(_))
    }
}

/// Which bound decided a port count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundRoute {
    ClosedForm,
    Integral,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PortCount {
    pub n_ports: usize,
    /// Route used at the returned `N`.
    pub route: BoundRoute,
    pub outage_bound: f64,
}

fn equal_corr_bound(n: usize, mu: f64, q: f64) -> Result<(f64, BoundRoute)> {
    match outage_ub_closed(n, mu, q) {
        Ok(b) => Ok((b.value, BoundRoute::ClosedForm)),
        Err(FamaError::PrecisionLoss { .. }) => Ok((
            outage_ub_integral_equal(n, mu, q, UB_TOLERANCE)?,
            BoundRoute::Integral,
        )),
        Err(e) => Err(e),
    }
}

/// Smallest `N` whose equal-correlation bound meets the outage budget, by
/// doubling then bisection.
pub fn min_ports_equal_corr(target: &DesignTarget, mu: f64) -> Result<DesignOutcome<PortCount>> {
    if !(0.0..1.0).contains(&mu) {
        return Err(FamaError::Domain(format!("mu must lie in [0, 1), got {mu}")));
    }
    let budget = target.outage_budget();
    let eval = |n: usize| -> Result<PortCount> {
        let (outage_bound, route) = equal_corr_bound(n, mu, target.q)?;
        Ok(PortCount {
            n_ports: n,
            route,
            outage_bound,
        })
    };
    let first = eval(1)?;
    if first.outage_bound <= budget {
        return Ok(DesignOutcome::Feasible(first));
    }
    let mut lo = 1;
    let mut hi = 2;
    let mut at_hi = eval(hi)?;
    while at_hi.outage_bound > budget {
        if hi >= MAX_SEARCH_PORTS {
            return Ok(DesignOutcome::Infeasible {
                reason: format!("bound stays above {budget:.6} up to N = {MAX_SEARCH_PORTS}"),
                closest: Some(target.n_users() * (1.0 - at_hi.outage_bound)),
            });
        }
        lo = hi;
        hi = (2 * hi).min(MAX_SEARCH_PORTS);
        at_hi = eval(hi)?;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        let at_mid = eval(mid)?;
        if at_mid.outage_bound <= budget {
            hi = mid;
            at_hi = at_mid;
        } else {
            lo = mid;
        }
    }
    Ok(DesignOutcome::Feasible(at_hi))
}

/// Critical correlation for a fixed port count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalMu {
    /// Ratio of the two alternating binomial sums; `None` when the numerator
    /// is negative. Values above 1 mean any correlation meets the target.
    pub exact: Option<f64>,
    /// `sqrt(1 - m q / ((N_I + 1)(N - 1)))`.
    pub approx: f64,
}

/// `mu*` in both forms. The alternating sums
/// `S1 = sum_{k>=1} C(N-1,k)(-1)^{k+1} q^{-k}` and `S2 = sum_{k>=1} k C(N-1,k)(-1)^{k+1} q^{-k}`
/// are evaluated through the binomial theorem as `1 - (1 - 1/q)^{N-1}` and
/// `(N-1)/q (1 - 1/q)^{N-2}`, which loses no digits.
pub fn critical_mu(target: &DesignTarget, n_ports: usize) -> Result<DesignOutcome<CriticalMu>> {
    if n_ports < 2 {
        return Err(FamaError::InvalidArgument(format!("need N >= 2, got {n_ports}")));
    }
    let m1 = (n_ports - 1) as f64;
    let share = target.mult_gain / target.n_users();
    let arg = 1.0 - target.mult_gain * target.q / (target.n_users() * m1);
    if arg < 0.0 {
        return Ok(DesignOutcome::Infeasible {
            reason: format!("N = {n_ports} too small for target m = {}", target.mult_gain),
            closest: Some(m1 * target.n_users() / target.q),
        });
    }
    let r = 1.0 - 1.0 / target.q;
    let s1 = if r > 0.0 {
        -(m1 * r.ln()).exp_m1()
    } else {
        1.0 - r.powi(n_ports as i32 - 1)
    };
    let s2 = m1 / target.q * r.powi(n_ports as i32 - 2);
    let exact = if s2 > 0.0 && s1 - share >= 0.0 {
        Some(((s1 - share) / s2).sqrt())
    } else {
        None
    };
    Ok(DesignOutcome::Feasible(CriticalMu {
        exact,
        approx: arg.sqrt().min(1.0),
    }))
}

/// Minimum antenna length in wavelengths for `n_ports` ports:
/// `(1/pi) J0^{-1}(sqrt(1 - m q / ((N_I + 1)(floor(N/2) - 1))))`.
pub fn min_width(target: &DesignTarget, n_ports: usize) -> Result<DesignOutcome<f64>> {
    let half = n_ports / 2;
    if half < 2 {
        return Ok(DesignOutcome::Infeasible {
            reason: format!("N = {n_ports} leaves fewer than two ports in the far half"),
            closest: None,
        });
    }
    let h1 = (half - 1) as f64;
    let arg = 1.0 - target.mult_gain * target.q / (target.n_users() * h1);
    if arg < 0.0 {
        return Ok(DesignOutcome::Infeasible {
            reason: format!("N = {n_ports} too small for target m = {}", target.mult_gain),
            closest: Some(h1 * target.n_users() / target.q),
        });
    }
    if arg == 0.0 {
        return Ok(DesignOutcome::Infeasible {
            reason: "requires mu* = 0, i.e. an infinitely long antenna".into(),
            closest: None,
        });
    }
    let rho = j0_envelope_inverse(arg.sqrt())?;
    Ok(DesignOutcome::Feasible(rho / PI))
}

/// Ports needed at width `W`: `N >= 2[m q/((N_I + 1)(1 - J0^2(pi W))) + 1]`,
/// rounded up to an even count.
pub fn min_ports_general(target: &DesignTarget, width: f64) -> Result<DesignOutcome<usize>> {
    if !width.is_finite() || width < 0.0 {
        return Err(FamaError::InvalidArgument(format!("width must be non-negative, got {width}")));
    }
    let j = j0(PI * width);
    let spread = 1.0 - j * j;
    if width == 0.0 || spread <= 0.0 {
        return Ok(DesignOutcome::Infeasible {
            reason: "a zero-length antenna has fully correlated ports".into(),
            closest: None,
        });
    }
    let bound = 2.0 * (target.mult_gain * target.q / (target.n_users() * spread) + 1.0);
    if bound > MAX_SEARCH_PORTS as f64 {
        return Ok(DesignOutcome::Infeasible {
            reason: format!("needs more than {MAX_SEARCH_PORTS} ports"),
            closest: None,
        });
    }
    let n = bound.ceil() as usize;
    Ok(DesignOutcome::Feasible(n + n % 2))
}

/// Monte Carlo refinement of a bound-based port count: the smallest `N` in
/// `[1, upper]` whose simulated outage at width `W` meets the budget,
/// located by bisection. Simulated outage is only approximately monotone in
/// `N` at fixed `W`, so this is a heuristic that never exceeds `upper`.
pub fn refine_ports_mc(target: &DesignTarget, width: f64, upper: usize, run: &McRun) -> Result<usize> {
    if upper == 0 {
        return Err(FamaError::InvalidArgument("upper port count must be positive".into()));
    }
    let budget = target.outage_budget();
    let meets = |n: usize| -> Result<bool> {
        Ok(run.outage(&target.scenario(n, width)?)?.probability <= budget)
    };
    let (mut lo, mut hi) = (0usize, upper);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if meets(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn target_validation() {
        assert!(DesignTarget::identical_users(7.0, 10.0, 5).is_err());
        assert!(DesignTarget::identical_users(0.0, 10.0, 5).is_err());
        assert!(DesignTarget::identical_users(2.0, 10.0, 0).is_err());
        let t = DesignTarget::identical_users(2.0, 10.0, 9).unwrap();
        assert_eq!(t.q, 90.0);
        assert!((t.outage_budget() - 0.8).abs() < 1e-15);
    }

    #[test]
    fn general_ports_examples() {
        let t = DesignTarget::identical_users(2.0, 10.0, 100).unwrap();
        let w = 2.404_825_557_695_773 / PI;
        assert_eq!(min_ports_general(&t, w).unwrap(), DesignOutcome::Feasible(42));
        assert_eq!(min_ports_general(&t, 0.5).unwrap(), DesignOutcome::Feasible(54));
        assert!(!min_ports_general(&t, 0.0).unwrap().is_feasible());
    }

    #[test]
    fn critical_mu_examples() {
        let t = DesignTarget::identical_users(2.0, 10.0, 9).unwrap();
        let c = critical_mu(&t, 201).unwrap().feasible().unwrap();
        assert!((c.approx - 0.91f64.sqrt()).abs() < 1e-12);
        assert!(c.exact.is_some());
        // m q = (N_I + 1)(N - 1)
        let t = DesignTarget::identical_users(2.0, 5.0, 9).unwrap();
        let c = critical_mu(&t, 10).unwrap().feasible().unwrap();
        assert_eq!(c.approx, 0.0);
        let t = DesignTarget::identical_users(1e-9, 10.0, 9).unwrap();
        let c = critical_mu(&t, 50).unwrap().feasible().unwrap();
        assert!(c.approx > 0.999_999);
        assert!(!critical_mu(&t, 1).is_ok());
    }

    #[test]
    fn critical_mu_exact_matches_direct_sums() {
        let t = DesignTarget::new(2.0, 10.0, 9, 7.0).unwrap();
        let n = 30usize;
        let (mut s1, mut s2, mut c) = (0.0, 0.0, 1.0);
        for k in 1..n {
            c *= (n - k) as f64 / k as f64;
            let term = c * (-1f64).powi(k as i32 + 1) / t.q.powi(k as i32);
            s1 += term;
            s2 += k as f64 * term;
        }
        let want = ((s1 - 0.2) / s2).sqrt();
        let got = critical_mu(&t, n).unwrap().feasible().unwrap().exact.unwrap();
        assert!((got - want).abs() < 1e-10, "{got} vs {want}");
    }

    #[test]
    fn critical_mu_infeasible_when_n_small() {
        let t = DesignTarget::identical_users(2.0, 10.0, 9).unwrap();
        assert!(!critical_mu(&t, 10).unwrap().is_feasible());
        assert!(critical_mu(&t, 50).unwrap().is_feasible());
    }

    #[test]
    fn width_examples() {
        let t = DesignTarget::identical_users(1e-12, 10.0, 9).unwrap();
        let w = min_width(&t, 64).unwrap().feasible().unwrap();
        assert!(w < 1e-3);
        // arg exactly zero: m q = (N_I+1)(N/2 - 1)
        let t = DesignTarget::identical_users(2.0, 5.0, 9).unwrap();
        assert!(!min_width(&t, 20).unwrap().is_feasible());
        assert!(!min_width(&t, 3).unwrap().is_feasible());
    }

    #[test]
    fn equal_corr_independent_ports() {
        let t = DesignTarget::identical_users(3.0, 1.0, 9).unwrap();
        let q: f64 = t.q;
        let want = ((1.0 - 3.0 / 10.0f64).ln() / (q / (1.0 + q)).ln()).ceil() as usize;
        let got = min_ports_equal_corr(&t, 0.0).unwrap().feasible().unwrap();
        assert_eq!(got.n_ports, want);
    }

    #[test]
    fn equal_corr_large_q() {
        let t = DesignTarget::identical_users(2.0, 10.0, 100).unwrap();
        let got = min_ports_equal_corr(&t, 0.01).unwrap().feasible().unwrap();
        let approx = 2.0 * 10.0 / (1.0 - 1e-4) + 1.0;
        let ratio = got.n_ports as f64 / approx;
        assert!(ratio > 1.0 / 2.2 && ratio < 2.2, "{got:?}");
    }

    #[test]
    fn equal_corr_monotone_in_mu() {
        let t = DesignTarget::identical_users(2.0, 3.0, 9).unwrap();
        let mut prev = 0;
        for &mu in &[0.0, 0.1, 0.3, 0.5, 0.7, 0.8, 0.9] {
            let n = min_ports_equal_corr(&t, mu).unwrap().feasible().unwrap().n_ports;
            assert!(n >= prev, "mu={mu}: {n} < {prev}");
            prev = n;
        }
    }
}
