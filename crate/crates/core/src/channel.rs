//! Port geometry and correlated channel sampling.
//!
//! Port `k` sits at `(k-1)/(N-1) * W` wavelengths from the reference port and
//! correlates with it through `mu_k = J0(2 pi (k-1) W / (N-1))`. A draw builds
//! every port from the reference variates:
//!
//! ```text
//! g_1 = sigma (x_0 + j y_0)
//! g_k = sigma (sqrt(1 - mu_k²) x_k + mu_k x_0) + j sigma (sqrt(1 - mu_k²) y_k + mu_k y_0)
//! ```
//!
//! with every `x`, `y` an independent `N(0, 1/2)` variate.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{FamaError, Result};
use crate::rng::complex_normal;
use crate::specfun::j0;

#[derive(Debug, Clone, PartialEq)]
pub struct PortGeometry {
    n_ports: usize,
    width: Option<f64>,
    mu: Vec<f64>,
}

impl PortGeometry {
    /// `N` evenly spaced ports over `W` wavelengths.
    pub fn new(n_ports: usize, width: f64) -> Result<Self> {
        if n_ports == 0 {
            return Err(FamaError::InvalidArgument("need at least one port".into()));
        }
        if !(width >= 0.0) || !width.is_finite() {
            return Err(FamaError::InvalidArgument(format!(
                "width must be finite and non-negative, got {width}"
            )));
        }
        let mu = (2..=n_ports)
            .map(|k| {
                if width == 0.0 {
                    1.0
                } else {
                    j0(2.0 * PI * (k - 1) as f64 * width / (n_ports - 1) as f64)
                }
            })
            .collect();
        Ok(Self {
            n_ports,
            width: Some(width),
            mu,
        })
    }

    /// Geometry with explicit correlations `mu_2..mu_N`, not tied to a width.
    pub fn from_correlations(mu: Vec<f64>) -> Result<Self> {
        if let Some(bad) = mu.iter().find(|m| !(m.abs() <= 1.0)) {
            return Err(FamaError::InvalidArgument(format!(
                "correlation {bad} outside [-1, 1]"
            )));
        }
        Ok(Self {
            n_ports: mu.len() + 1,
            width: None,
            mu,
        })
    }

    pub fn n_ports(&self) -> usize {
        self.n_ports
    }

    /// Antenna length in wavelengths, if the geometry came from one.
    pub fn width(&self) -> Option<f64> {
        self.width
    }

    /// `mu_2..mu_N`; port 1 is the reference and has no entry.
    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn max_abs_mu(&self) -> f64 {
        self.mu.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

pub fn make_geometry(n_ports: usize, width: f64) -> Result<PortGeometry> {
    PortGeometry::new(n_ports, width)
}

/// One analysis point: geometry, channel powers, interferer count and SIR target.
#[derive(Debug, Clone, PartialEq)]
pub struct FamaScenario {
    pub geometry: PortGeometry,
    /// RMS of the desired channel, `E|g_k|^2 = sigma^2`.
    pub sigma: f64,
    /// RMS of the aggregate interference.
    pub sigma_i: f64,
    pub n_interferers: usize,
    /// Linear SIR target.
    pub gamma: f64,
}

impl FamaScenario {
    pub fn new(
        geometry: PortGeometry,
        sigma: f64,
        sigma_i: f64,
        n_interferers: usize,
        gamma: f64,
    ) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(FamaError::InvalidArgument(format!("sigma must be positive, got {sigma}")));
        }
        if !(sigma_i >= 0.0) || !sigma_i.is_finite() {
            return Err(FamaError::InvalidArgument(format!(
                "sigma_i must be non-negative, got {sigma_i}"
            )));
        }
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(FamaError::InvalidArgument(format!("gamma must be positive, got {gamma}")));
        }
        Ok(Self {
            geometry,
            sigma,
            sigma_i,
            n_interferers,
            gamma,
        })
    }

    /// Statistically identical users: `sigma = 1` and `sigma_i^2 = N_I sigma^2`.
    pub fn identical_users(geometry: PortGeometry, n_interferers: usize, gamma: f64) -> Result<Self> {
        Self::new(geometry, 1.0, (n_interferers as f64).sqrt(), n_interferers, gamma)
    }

    /// `q = sigma_i^2 gamma / sigma^2`.
    pub fn q(&self) -> f64 {
        self.sigma_i * self.sigma_i * self.gamma / (self.sigma * self.sigma)
    }

    pub fn n_ports(&self) -> usize {
        self.geometry.n_ports()
    }

    pub fn n_users(&self) -> usize {
        self.n_interferers + 1
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// One realization of desired and aggregate interference gains over all ports.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelDraw {
    pub desired: Vec<Complex64>,
    pub interference: Vec<Complex64>,
}

/// Per-port mixing coefficients `(mu_k, sqrt(1 - mu_k^2))`, port 1 first.
#[derive(Debug, Clone)]
pub(crate) struct PortMixer {
    coeffs: Vec<(f64, f64)>,
}

impl PortMixer {
    pub(crate) fn new(geometry: &PortGeometry) -> Self {
        let coeffs = std::iter::once((1.0, 0.0))
            .chain(geometry.mu().iter().map(|&m| {
                let rest = if m.abs() >= 1.0 { 0.0 } else { (1.0 - m * m).sqrt() };
                (m, rest)
            }))
            .collect();
        Self { coeffs }
    }

    pub(crate) fn len(&self) -> usize {
        self.coeffs.len()
    }

    /// Overwrite `out` with one correlated draw of RMS `sigma`.
    #[inline]
    pub(crate) fn fill<R: Rng + ?Sized>(&self, sigma: f64, rng: &mut R, out: &mut [Complex64]) {
        let reference = complex_normal(rng);
        out[0] = reference * sigma;
        for (slot, &(m, rest)) in out[1..].iter_mut().zip(&self.coeffs[1..]) {
            let own = complex_normal(rng);
            *slot = (own * rest + reference * m) * sigma;
        }
    }

    /// Add `symbol` times one correlated draw of RMS `sigma` into `acc`.
    #[inline]
    pub(crate) fn accumulate<R: Rng + ?Sized>(
        &self,
        sigma: f64,
        symbol: Complex64,
        rng: &mut R,
        acc: &mut [Complex64],
    ) {
        let reference = complex_normal(rng);
        let scale = symbol * sigma;
        acc[0] += reference * scale;
        for (slot, &(m, rest)) in acc[1..].iter_mut().zip(&self.coeffs[1..]) {
            let own = complex_normal(rng);
            *slot += (own * rest + reference * m) * scale;
        }
    }
}

/// Desired and aggregate-interference gains for one channel use. The desired
/// vector consumes the stream first.
pub fn sample_draw<R: Rng + ?Sized>(scenario: &FamaScenario, rng: &mut R) -> ChannelDraw {
    let mixer = PortMixer::new(&scenario.geometry);
    let n = mixer.len();
    let mut desired = vec![Complex64::new(0.0, 0.0); n];
    let mut interference = vec![Complex64::new(0.0, 0.0); n];
    mixer.fill(scenario.sigma, rng, &mut desired);
    mixer.fill(scenario.sigma_i, rng, &mut interference);
    ChannelDraw {
        desired,
        interference,
    }
}

/// Aggregate interference built interferer by interferer:
/// `g^I_k = sum_i g_k^(i) s_i`, each `g^(i)` an independent correlated draw
/// with RMS `sigma_i / sqrt(N_I)` so the aggregate power matches the scenario.
pub fn sample_per_interferer<R: Rng + ?Sized>(
    scenario: &FamaScenario,
    symbols: &[Complex64],
    rng: &mut R,
) -> Result<Vec<Complex64>> {
    check_symbols(scenario, symbols)?;
    let mixer = PortMixer::new(&scenario.geometry);
    let mut acc = vec![Complex64::new(0.0, 0.0); mixer.len()];
    let per = scenario.sigma_i / (scenario.n_interferers as f64).sqrt();
    for &s in symbols {
        mixer.accumulate(per, s, rng, &mut acc);
    }
    Ok(acc)
}

pub(crate) fn check_symbols(scenario: &FamaScenario, symbols: &[Complex64]) -> Result<()> {
    if scenario.n_interferers == 0 {
        return Err(FamaError::InvalidArgument(
            "per-interferer sampling needs at least one interferer".into(),
        ));
    }
    if symbols.len() != scenario.n_interferers {
        return Err(FamaError::InvalidArgument(format!(
            "expected {} interferer symbols, got {}",
            scenario.n_interferers,
            symbols.len()
        )));
    }
    Ok(())
}
