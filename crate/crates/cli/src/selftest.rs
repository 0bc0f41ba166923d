//! Built-in identity checks and a determinism probe.

use fama_core::analytic::outage_ub_integral;
use fama_core::montecarlo::Method;
use fama_core::quadrature::integrate_panels;
use fama_core::specfun::{bessel_i0, bessel_i0_scaled, expint_en_scaled, marcum_q1};
use fama_core::sweep::{Axis, Estimator};
use fama_core::{
    make_geometry, outage_exact, run_sweep, Execution, FamaScenario, QuadratureSettings, SweepSpec,
};

pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, worst: f64, limit: f64) -> Check {
    Check {
        name,
        passed: worst <= limit,
        detail: format!("worst {worst:.3e} (limit {limit:.0e})"),
    }
}

fn rician_identity() -> Check {
    let grid = [0.2, 1.6, 3.0];
    let mut worst = 0.0f64;
    for &a in &grid {
        for &b in &grid {
            for &c in &grid {
                let f = |x: f64| {
                    x * (-(x - c) * (x - c) / 2.0 + c * c / 2.0).exp()
                        * bessel_i0_scaled(c * x).unwrap_or(f64::NAN)
                        * marcum_q1(b, a * x).unwrap_or(f64::NAN)
                };
                let lhs = integrate_panels(&f, &[0.0, c + 1.0, c + 6.0, c + 40.0], 1e-12);
                let s = a * a + 1.0;
                let rhs = (c * c / 2.0).exp() * marcum_q1(b / s.sqrt(), a * c / s.sqrt()).unwrap_or(f64::NAN)
                    - a * a / s
                        * ((c * c - b * b) / (2.0 * s)).exp()
                        * bessel_i0(a * b * c / s).unwrap_or(f64::NAN);
                worst = worst.max((lhs - rhs).abs());
            }
        }
    }
    check("rician-marcum integral identity", worst, 1e-7)
}

fn marcum_lower_bound() -> Check {
    let mut worst = 0.0f64;
    for i in 0..=50 {
        for j in 0..=50 {
            let (al, be) = (i as f64 * 0.1, j as f64 * 0.1);
            let q = marcum_q1(al, be).unwrap_or(f64::NAN);
            let lb = (-(al - be) * (al - be) / 2.0).exp() * bessel_i0_scaled(al * be).unwrap_or(f64::NAN);
            worst = worst.max(lb - q);
        }
    }
    check("marcum Q1 lower bound", worst.max(0.0), 1e-14)
}

fn i0_lower_bound() -> Check {
    let mut worst = 0.0f64;
    for i in 1..=2000 {
        let x = i as f64 * 0.25;
        worst = worst.max(1.0 / (1.0 + 2.0 * x) - bessel_i0_scaled(x).unwrap_or(f64::NAN));
    }
    check("I0(x) >= e^x/(1+2x)", worst.max(0.0), 0.0)
}

fn expint_identity() -> Check {
    let mut worst = 0.0f64;
    for k in 1..=8u32 {
        for &a in &[0.5, 1.0, 2.0] {
            for &b in &[0.5, 1.0, 2.0] {
                let kf = f64::from(k);
                let f = |x: f64| ((-a * x).exp() / (1.0 + b * x)).powi(k as i32);
                let lhs = integrate_panels(&f, &[0.0, 0.1, 1.0, 5.0, 60.0 / (kf * a)], 1e-13);
                let rhs = expint_en_scaled(k, kf * a / b).unwrap_or(f64::NAN) / b;
                worst = worst.max((lhs - rhs).abs());
            }
        }
    }
    check("exponential-integral identity", worst, 1e-8)
}

fn single_port() -> Check {
    let st = QuadratureSettings::default();
    let mut worst = 0.0f64;
    for &q in &[0.1, 1.0, 10.0] {
        let s = FamaScenario::new(make_geometry(1, 1.0).unwrap(), 1.0, 1.0, 1, q).unwrap();
        let want = q / (1.0 + q);
        for v in [outage_exact(&s, &st), outage_ub_integral(&s, &st)] {
            worst = worst.max(v.map(|e| (e.probability - want).abs()).unwrap_or(f64::INFINITY));
        }
    }
    check("single-port outage q/(1+q)", worst, 1e-8)
}

/// The sweep whose bytes the determinism check compares.
pub fn probe_spec(seed: u64, execution: Execution) -> SweepSpec {
    SweepSpec {
        axis: Axis::NPorts,
        values: vec![1.0, 2.0, 4.0, 8.0, 16.0],
        gamma_db: 5.0,
        width: 1.0,
        n_interferers: 3,
        methods: vec![
            Estimator::Outage(Method::BoundI),
            Estimator::Outage(Method::MonteCarlo),
        ],
        trials: 150_000,
        seed,
        execution,
        ..SweepSpec::default()
    }
}

fn determinism(seed: u64) -> (Check, Option<String>) {
    let a = run_sweep(&probe_spec(seed, Execution::Serial)).and_then(|r| r.to_csv());
    let b = run_sweep(&probe_spec(seed, Execution::Parallel)).and_then(|r| r.to_csv());
    let (passed, detail, csv) = match (a, b) {
        (Ok(a), Ok(b)) => (a == b, format!("{} bytes", a.len()), Some(a)),
        (Err(e), _) | (_, Err(e)) => (false, e.to_string(), None),
    };
    (
        Check {
            name: "serial and parallel sweeps byte-identical",
            passed,
            detail,
        },
        csv,
    )
}

/// Run every check; also return the probe CSV.
pub fn run(seed: u64) -> (Vec<Check>, Option<String>) {
    let mut checks = vec![
        rician_identity(),
        marcum_lower_bound(),
        i0_lower_bound(),
        expint_identity(),
        single_port(),
    ];
    let (d, csv) = determinism(seed);
    checks.push(d);
    (checks, csv)
}
