//! Monte Carlo estimation of SIR outage, capacity and multiplexing gain.
//!
//! Trials are cut into shards of [`SHARD_TRIALS`]; shard `s` draws from
//! substream `s` of the run seed and reports an integer outage count. Counts
//! are summed in shard order, so serial and parallel runs agree bit for bit.

use std::fmt;

use num_complex::Complex64;

use crate::channel::{check_symbols, FamaScenario, PortMixer};
use crate::error::{FamaError, Result};
use crate::par::{map_indexed, Execution};
use crate::rng::substream;

pub const SHARD_TRIALS: u64 = 1 << 16;

/// Two-sided 99% normal quantile used for every reported interval.
pub const Z_99: f64 = 2.576;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    MonteCarlo,
    Exact,
    BoundI,
    BoundII,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::MonteCarlo => "mc",
            Method::Exact => "exact",
            Method::BoundI => "bound-I",
            Method::BoundII => "bound-II",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "mc" | "monte-carlo" => Some(Method::MonteCarlo),
            "exact" => Some(Method::Exact),
            "bound-I" | "bound-i" | "ub1" => Some(Method::BoundI),
            "bound-II" | "bound-ii" | "ub2" => Some(Method::BoundII),
            _ => None,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// An outage probability and where it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct OutageEstimate {
    pub probability: f64,
    pub trials: u64,
    /// 99% normal-approximation half-width; zero for analytic methods.
    pub ci_halfwidth: f64,
    pub method: Method,
    /// Ports seen with exactly zero interference (Monte Carlo only).
    pub zero_interference: u64,
    pub note: Option<String>,
}

impl OutageEstimate {
    pub fn analytic(probability: f64, method: Method) -> Self {
        Self {
            probability,
            trials: 0,
            ci_halfwidth: 0.0,
            method,
            zero_interference: 0,
            note: None,
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    /// Whether `value` lies inside the reported interval.
    pub fn covers(&self, value: f64) -> bool {
        (self.probability - value).abs() <= self.ci_halfwidth
    }
}

/// Result of the selection rule at one channel use.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PortChoice {
    /// Selected port, numbered from 1 like the geometry.
    pub port: usize,
    pub sir: f64,
    /// Some port had exactly zero interference and won with infinite SIR.
    pub zero_interference: bool,
}

/// Switch to the port maximizing `|g_k|^2 / |g_k^I|^2`; ties go to the
/// lowest port.
pub fn select_port(desired: &[Complex64], interference: &[Complex64]) -> Result<PortChoice> {
    if desired.is_empty() || desired.len() != interference.len() {
        return Err(FamaError::InvalidArgument(format!(
            "need equal non-empty gain vectors, got {} and {}",
            desired.len(),
            interference.len()
        )));
    }
    Ok(best_port(desired, interference))
}

#[inline]
fn port_sir(g: Complex64, gi: Complex64) -> (f64, bool) {
    let num = g.norm_sqr();
    let den = gi.norm_sqr();
    if den == 0.0 {
        if num == 0.0 {
            (0.0, false)
        } else {
            (f64::INFINITY, true)
        }
    } else {
        (num / den, false)
    }
}

#[inline]
fn best_port(desired: &[Complex64], interference: &[Complex64]) -> PortChoice {
    let mut best = PortChoice {
        port: 1,
        sir: f64::NEG_INFINITY,
        zero_interference: false,
    };
    for (k, (&g, &gi)) in desired.iter().zip(interference).enumerate() {
        let (sir, zero) = port_sir(g, gi);
        best.zero_interference |= zero;
        if sir > best.sir {
            best.sir = sir;
            best.port = k + 1;
        }
    }
    best
}

/// How the aggregate interference is generated.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum InterferenceModel {
    /// One correlated Gaussian draw with RMS `sigma_i`.
    #[default]
    Aggregate,
    /// Sum of `N_I` correlated draws weighted by the given symbols.
    PerInterferer(Vec<Complex64>),
}

impl InterferenceModel {
    /// Per-interferer sampling with every symbol equal to 1.
    pub fn unit_symbols(n_interferers: usize) -> Self {
        InterferenceModel::PerInterferer(vec![Complex64::new(1.0, 0.0); n_interferers])
    }
}

/// Monte Carlo run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct McRun {
    pub trials: u64,
    pub seed: u64,
    pub model: InterferenceModel,
    pub execution: Execution,
}

#[derive(Debug, Clone, Copy, Default)]
struct ShardCount {
    outages: u64,
    zero_interference: u64,
}

impl McRun {
    pub fn new(trials: u64, seed: u64) -> Self {
        Self {
            trials,
            seed,
            model: InterferenceModel::Aggregate,
            execution: Execution::Parallel,
        }
    }

    pub fn model(mut self, model: InterferenceModel) -> Self {
        self.model = model;
        self
    }

    pub fn execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    pub fn outage(&self, scenario: &FamaScenario) -> Result<OutageEstimate> {
        if self.trials == 0 {
            return Err(FamaError::InvalidArgument("need at least one trial".into()));
        }
        if !(scenario.sigma_i > 0.0) {
            return Err(FamaError::InvalidArgument(
                "SIR is undefined without interference (sigma_i = 0)".into(),
            ));
        }
        if let InterferenceModel::PerInterferer(symbols) = &self.model {
            check_symbols(scenario, symbols)?;
        }
        let mixer = PortMixer::new(&scenario.geometry);
        let shards = self.trials.div_ceil(SHARD_TRIALS) as usize;
        let counts = map_indexed(shards, self.execution, |s| {
            let start = s as u64 * SHARD_TRIALS;
            let len = SHARD_TRIALS.min(self.trials - start);
            self.run_shard(scenario, &mixer, s as u64, len)
        });
        let total = counts.iter().fold(ShardCount::default(), |acc, c| ShardCount {
            outages: acc.outages + c.outages,
            zero_interference: acc.zero_interference + c.zero_interference,
        });
        let p = total.outages as f64 / self.trials as f64;
        Ok(OutageEstimate {
            probability: p,
            trials: self.trials,
            ci_halfwidth: Z_99 * (p * (1.0 - p) / self.trials as f64).sqrt(),
            method: Method::MonteCarlo,
            zero_interference: total.zero_interference,
            note: None,
        })
    }

    fn run_shard(&self, scenario: &FamaScenario, mixer: &PortMixer, shard: u64, len: u64) -> ShardCount {
        let mut rng = substream(self.seed, shard);
        let n = mixer.len();
        let zero = Complex64::new(0.0, 0.0);
        let mut desired = vec![zero; n];
        let mut interference = vec![zero; n];
        let mut count = ShardCount::default();
        let per_sigma = scenario.sigma_i / (scenario.n_interferers.max(1) as f64).sqrt();
        for _ in 0..len {
            mixer.fill(scenario.sigma, &mut rng, &mut desired);
            match &self.model {
                InterferenceModel::Aggregate => {
                    mixer.fill(scenario.sigma_i, &mut rng, &mut interference)
                }
                InterferenceModel::PerInterferer(symbols) => {
                    interference.fill(zero);
                    for &s in symbols {
                        mixer.accumulate(per_sigma, s, &mut rng, &mut interference);
                    }
                }
            }
            let choice = best_port(&desired, &interference);
            if choice.sir <= scenario.gamma {
                count.outages += 1;
            }
            if choice.zero_interference {
                count.zero_interference += 1;
            }
        }
        count
    }
}

/// Fraction of trials whose best-port SIR stays at or below `gamma`.
pub fn estimate_outage(scenario: &FamaScenario, trials: u64, seed: u64) -> Result<OutageEstimate> {
    McRun::new(trials, seed).outage(scenario)
}

/// Network-level figures derived from one outage probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkMetrics {
    pub outage: f64,
    /// `(N_I + 1)(1 - p) log2(1 + gamma)` in bits/s/Hz.
    pub capacity: f64,
    /// `(N_I + 1)(1 - p)`.
    pub multiplexing_gain: f64,
}

impl NetworkMetrics {
    pub fn from_outage(n_users: usize, gamma: f64, outage: f64) -> Self {
        let gain = n_users as f64 * (1.0 - outage);
        Self {
            outage,
            capacity: gain * (1.0 + gamma).log2(),
            multiplexing_gain: gain,
        }
    }
}

/// Capacity and multiplexing gain with the Monte Carlo outage in place of a bound.
pub fn estimate_network_metrics(
    scenario: &FamaScenario,
    trials: u64,
    seed: u64,
) -> Result<NetworkMetrics> {
    let est = estimate_outage(scenario, trials, seed)?;
    Ok(NetworkMetrics::from_outage(
        scenario.n_users(),
        scenario.gamma,
        est.probability,
    ))
}
