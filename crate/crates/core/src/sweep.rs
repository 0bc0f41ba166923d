//! Parameter sweeps rendered as CSV.
//!
//! One row is written per (axis value, estimator). Rows carry the full
//! parameter tuple, are computed independently (Monte Carlo rows draw from a
//! seed derived from the row index) and are emitted in axis order, so the
//! output bytes depend only on the spec.

use std::fmt;
use std::io::Write;

use crate::analytic::{
    outage_exact, outage_ub_closed, outage_ub_integral, QuadratureSettings, EXACT_CAP,
};
use crate::channel::{db_to_linear, make_geometry, FamaScenario};
use crate::design::{
    critical_mu, min_ports_equal_corr, min_ports_general, min_width, refine_ports_mc, BoundRoute,
    DesignOutcome, DesignTarget,
};
use crate::error::{FamaError, Result};
use crate::montecarlo::{McRun, Method, OutageEstimate};
use crate::par::{map_indexed, Execution};

pub const CSV_HEADER: &str =
    "gamma_db,N,W,NI,sigma,sigma_i,method,value,ci_halfwidth,capacity_lb,mult_gain,note";

/// Smallest trial count accepted for Monte Carlo rows.
pub const MIN_MC_TRIALS: u64 = 1_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    GammaDb,
    NPorts,
    NInterferers,
    Width,
    MultGain,
}

impl Axis {
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "gamma_db" | "gamma-db" | "gamma" => Some(Axis::GammaDb),
            "n_ports" | "ports" | "N" => Some(Axis::NPorts),
            "n_interferers" | "interferers" | "NI" => Some(Axis::NInterferers),
            "width" | "W" => Some(Axis::Width),
            "mult_gain" | "mult-gain" | "m" => Some(Axis::MultGain),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Axis::GammaDb => "gamma_db",
            Axis::NPorts => "n_ports",
            Axis::NInterferers => "n_interferers",
            Axis::Width => "width",
            Axis::MultGain => "mult_gain",
        }
    }

    fn integral(self) -> bool {
        matches!(self, Axis::NPorts | Axis::NInterferers)
    }
}

/// Inverse-design quantities that can fill a sweep row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DesignQuantity {
    /// Ports needed at the fixed width.
    PortsGeneral,
    /// Ports needed with every correlation equal to the sweep's `mu`.
    PortsEqualCorr,
    /// Antenna length needed with the fixed port count.
    Width,
    /// Approximate critical correlation at the fixed port count.
    CriticalMu,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Estimator {
    Outage(Method),
    Design(DesignQuantity),
}

impl Estimator {
    pub fn parse(s: &str) -> Option<Self> {
        if let Some(m) = Method::parse(s) {
            return Some(Estimator::Outage(m));
        }
        let d = match s.trim() {
            "ports-general" => DesignQuantity::PortsGeneral,
            "ports-equal" => DesignQuantity::PortsEqualCorr,
            "width" => DesignQuantity::Width,
            "critical-mu" => DesignQuantity::CriticalMu,
            _ => return None,
        };
        Some(Estimator::Design(d))
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Estimator::Outage(m) => m.as_str(),
            Estimator::Design(DesignQuantity::PortsGeneral) => "ports-general",
            Estimator::Design(DesignQuantity::PortsEqualCorr) => "ports-equal",
            Estimator::Design(DesignQuantity::Width) => "width",
            Estimator::Design(DesignQuantity::CriticalMu) => "critical-mu",
        }
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Parse a comma-separated estimator list.
pub fn parse_estimators(list: &str) -> Result<Vec<Estimator>> {
    list.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            Estimator::parse(s)
                .ok_or_else(|| FamaError::InvalidArgument(format!("unknown method '{}'", s.trim())))
        })
        .collect()
}

/// Axis definition plus every fixed parameter of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub axis: Axis,
    pub values: Vec<f64>,
    pub gamma_db: f64,
    pub n_ports: usize,
    pub width: f64,
    pub n_interferers: usize,
    pub sigma: f64,
    /// Aggregate interference RMS; `None` means `sigma * sqrt(N_I)`.
    pub sigma_i: Option<f64>,
    pub methods: Vec<Estimator>,
    /// Replace an exact row beyond [`EXACT_CAP`] by a note instead of failing,
    /// and make sure bound-I and Monte Carlo rows are present there.
    pub auto_fallback: bool,
    pub trials: u64,
    pub seed: u64,
    pub mult_gain: f64,
    /// Correlation for equal-correlation design rows.
    pub mu: Option<f64>,
    /// Add a Monte Carlo refinement row after each general port count.
    pub refine_mc: bool,
    pub quadrature: QuadratureSettings,
    pub execution: Execution,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            axis: Axis::NPorts,
            values: vec![],
            gamma_db: 10.0,
            n_ports: 20,
            width: 2.0,
            n_interferers: 5,
            sigma: 1.0,
            sigma_i: None,
            methods: vec![
                Estimator::Outage(Method::Exact),
                Estimator::Outage(Method::BoundI),
                Estimator::Outage(Method::MonteCarlo),
            ],
            auto_fallback: true,
            trials: 100_000,
            seed: 1,
            mult_gain: 2.0,
            mu: None,
            refine_mc: false,
            quadrature: QuadratureSettings::default(),
            execution: Execution::Parallel,
        }
    }
}

/// Parameters of one axis point.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Point {
    gamma_db: f64,
    n_ports: usize,
    width: f64,
    n_interferers: usize,
    sigma: f64,
    sigma_i: f64,
    mult_gain: f64,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(FamaError::InvalidArgument("axis values must not be empty".into()));
        }
        if self.values.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(FamaError::InvalidArgument(
                "axis values must be strictly increasing".into(),
            ));
        }
        if self.axis.integral() && self.values.iter().any(|v| v.fract() != 0.0 || *v < 0.0) {
            return Err(FamaError::InvalidArgument(format!(
                "{} values must be non-negative integers",
                self.axis.as_str()
            )));
        }
        if self.methods.is_empty() {
            return Err(FamaError::InvalidArgument("no methods requested".into()));
        }
        let uses_mc = self.methods.contains(&Estimator::Outage(Method::MonteCarlo))
            || self.refine_mc
            || (self.auto_fallback && self.methods.contains(&Estimator::Outage(Method::Exact)));
        if uses_mc && self.trials < MIN_MC_TRIALS {
            return Err(FamaError::InvalidArgument(format!(
                "Monte Carlo needs at least {MIN_MC_TRIALS} trials, got {}",
                self.trials
            )));
        }
        if self.axis == Axis::MultGain
            && self.methods.iter().any(|m| matches!(m, Estimator::Outage(_)))
        {
            return Err(FamaError::InvalidArgument(
                "outage methods cannot sweep the multiplexing-gain target".into(),
            ));
        }
        if self.methods.contains(&Estimator::Design(DesignQuantity::PortsEqualCorr))
            && self.mu.is_none()
        {
            return Err(FamaError::InvalidArgument(
                "equal-correlation port design needs mu".into(),
            ));
        }
        self.quadrature.validate()?;
        if !self.auto_fallback && self.methods.contains(&Estimator::Outage(Method::Exact)) {
            for i in 0..self.values.len() {
                let n = self.point(i).n_ports;
                if n > EXACT_CAP {
                    return Err(FamaError::ExactCapExceeded {
                        n_ports: n,
                        cap: EXACT_CAP,
                    });
                }
            }
        }
        Ok(())
    }

    fn point(&self, i: usize) -> Point {
        let v = self.values[i];
        let mut p = Point {
            gamma_db: self.gamma_db,
            n_ports: self.n_ports,
            width: self.width,
            n_interferers: self.n_interferers,
            sigma: self.sigma,
            sigma_i: 0.0,
            mult_gain: self.mult_gain,
        };
        match self.axis {
            Axis::GammaDb => p.gamma_db = v,
            Axis::NPorts => p.n_ports = v as usize,
            Axis::NInterferers => p.n_interferers = v as usize,
            Axis::Width => p.width = v,
            Axis::MultGain => p.mult_gain = v,
        }
        p.sigma_i = self
            .sigma_i
            .unwrap_or(self.sigma * (p.n_interferers as f64).sqrt());
        p
    }

    /// Monte Carlo seed for axis point `i`.
    fn row_seed(&self, i: usize) -> u64 {
        self.seed ^ (i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
    }
}

/// One CSV row. Empty optional fields stay blank.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub gamma_db: f64,
    pub n_ports: usize,
    pub width: f64,
    pub n_interferers: usize,
    pub sigma: f64,
    pub sigma_i: f64,
    pub method: String,
    pub value: Option<f64>,
    pub ci_halfwidth: Option<f64>,
    pub capacity_lb: Option<f64>,
    pub mult_gain: Option<f64>,
    pub note: String,
    /// Cell is a design answer that turned out infeasible.
    pub infeasible: bool,
}

impl SweepRow {
    fn new(p: &Point, method: &str) -> Self {
        Self {
            gamma_db: p.gamma_db,
            n_ports: p.n_ports,
            width: p.width,
            n_interferers: p.n_interferers,
            sigma: p.sigma,
            sigma_i: p.sigma_i,
            method: method.to_string(),
            value: None,
            ci_halfwidth: None,
            capacity_lb: None,
            mult_gain: None,
            note: String::new(),
            infeasible: false,
        }
    }

    fn note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }

    fn fields(&self) -> [String; 12] {
        let opt = |v: Option<f64>| v.map(fmt_sig).unwrap_or_default();
        [
            fmt_sig(self.gamma_db),
            self.n_ports.to_string(),
            fmt_sig(self.width),
            self.n_interferers.to_string(),
            fmt_sig(self.sigma),
            fmt_sig(self.sigma_i),
            self.method.clone(),
            opt(self.value),
            opt(self.ci_halfwidth),
            opt(self.capacity_lb),
            opt(self.mult_gain),
            self.note.clone(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    /// Every row is an infeasible design cell.
    pub fn infeasible_only(&self) -> bool {
        !self.rows.is_empty() && self.rows.iter().all(|r| r.infeasible)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let io = |e: csv::Error| FamaError::Io {
            path: "<csv>".into(),
            message: e.to_string(),
        };
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        w.write_record(CSV_HEADER.split(',')).map_err(io)?;
        for r in &self.rows {
            w.write_record(r.fields()).map_err(io)?;
        }
        w.flush().map_err(|e| FamaError::Io {
            path: "<csv>".into(),
            message: e.to_string(),
        })
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is UTF-8"))
    }
}

/// Evaluate every (axis value, estimator) cell.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let per_point = map_indexed(spec.values.len(), spec.execution, |i| point_rows(spec, i));
    let mut rows = Vec::new();
    for r in per_point {
        rows.extend(r?);
    }
    Ok(SweepResult { rows })
}

fn point_rows(spec: &SweepSpec, i: usize) -> Result<Vec<SweepRow>> {
    let p = spec.point(i);
    let mut methods = spec.methods.clone();
    let over_cap = p.n_ports > EXACT_CAP;
    if spec.auto_fallback && over_cap && methods.contains(&Estimator::Outage(Method::Exact)) {
        for m in [Method::BoundI, Method::MonteCarlo] {
            if !methods.contains(&Estimator::Outage(m)) {
                methods.push(Estimator::Outage(m));
            }
        }
    }
    let mut rows = Vec::with_capacity(methods.len());
    let mut scenario = None;
    for est in methods {
        match est {
            Estimator::Outage(method) => {
                if scenario.is_none() {
                    scenario = Some(point_scenario(&p)?);
                }
                let s = scenario.as_ref().expect("scenario built above");
                rows.push(outage_row(spec, i, &p, s, method)?);
            }
            Estimator::Design(q) => {
                let (row, extra) = design_row(spec, i, &p, q)?;
                rows.push(row);
                rows.extend(extra);
            }
        }
    }
    Ok(rows)
}

fn point_scenario(p: &Point) -> Result<FamaScenario> {
    FamaScenario::new(
        make_geometry(p.n_ports, p.width)?,
        p.sigma,
        p.sigma_i,
        p.n_interferers,
        db_to_linear(p.gamma_db),
    )
}

fn outage_row(
    spec: &SweepSpec,
    i: usize,
    p: &Point,
    s: &FamaScenario,
    method: Method,
) -> Result<SweepRow> {
    let row = SweepRow::new(p, method.as_str());
    let est: Result<OutageEstimate> = match method {
        Method::Exact if p.n_ports > EXACT_CAP => {
            return Ok(row.note(format!(
                "N exceeds exact cap {EXACT_CAP}; see bound-I and mc rows"
            )))
        }
        Method::Exact => outage_exact(s, &spec.quadrature),
        Method::BoundI => outage_ub_integral(s, &spec.quadrature),
        Method::BoundII => {
            let mu = s.geometry.max_abs_mu();
            outage_ub_closed(p.n_ports, mu, s.q()).map(|b| {
                let mut e = OutageEstimate::analytic(b.value, Method::BoundII);
                let mut note = format!("mu={}", fmt_sig(mu));
                if b.clamped {
                    note.push_str(&format!("; raw {} clamped", fmt_sig(b.raw)));
                }
                e.note = Some(note);
                e
            })
        }
        Method::MonteCarlo => McRun::new(spec.trials, spec.row_seed(i))
            .execution(spec.execution)
            .outage(s)
            .map(|mut e| {
                if e.zero_interference > 0 {
                    e.note = Some(format!("{} zero-interference draws", e.zero_interference));
                }
                e
            }),
    };
    let est = match est {
        Ok(e) => e,
        Err(
            e @ (FamaError::PrecisionLoss { .. }
            | FamaError::NoConvergence { .. }
            | FamaError::SingularCorrelation { .. }
            | FamaError::Domain(_)),
        ) => return Ok(row.note(e.to_string())),
        Err(e) => return Err(e),
    };
    let users = s.n_users() as f64;
    let gain = users * (1.0 - est.probability);
    Ok(SweepRow {
        value: Some(est.probability),
        ci_halfwidth: (method == Method::MonteCarlo).then_some(est.ci_halfwidth),
        capacity_lb: Some(gain * (1.0 + s.gamma).log2()),
        mult_gain: Some(gain),
        note: est.note.unwrap_or_default(),
        ..row
    })
}

fn infeasible_row<T>(row: SweepRow, outcome: DesignOutcome<T>) -> SweepRow {
    match outcome {
        DesignOutcome::Feasible(_) => row,
        DesignOutcome::Infeasible { reason, closest } => {
            let note = match closest {
                Some(m) => format!("infeasible: {reason}; closest m={}", fmt_sig(m)),
                None => format!("infeasible: {reason}"),
            };
            SweepRow {
                infeasible: true,
                ..row.note(note)
            }
        }
    }
}

fn design_row(
    spec: &SweepSpec,
    i: usize,
    p: &Point,
    quantity: DesignQuantity,
) -> Result<(SweepRow, Option<SweepRow>)> {
    let gamma = db_to_linear(p.gamma_db);
    let q = p.sigma_i * p.sigma_i * gamma / (p.sigma * p.sigma);
    let base = SweepRow {
        mult_gain: Some(p.mult_gain),
        ..SweepRow::new(p, Estimator::Design(quantity).as_str())
    };
    let target = match DesignTarget::new(p.mult_gain, gamma, p.n_interferers, q) {
        Ok(t) => t,
        Err(FamaError::InvalidArgument(msg)) => {
            return Ok((
                SweepRow {
                    infeasible: true,
                    ..base.note(format!("infeasible: {msg}"))
                },
                None,
            ))
        }
        Err(e) => return Err(e),
    };
    let row = match quantity {
        DesignQuantity::PortsGeneral => match min_ports_general(&target, p.width)? {
            DesignOutcome::Feasible(n) => {
                let row = SweepRow {
                    value: Some(n as f64),
                    ..base
                };
                if spec.refine_mc {
                    let run = McRun::new(spec.trials, spec.row_seed(i)).execution(spec.execution);
                    let refined = refine_ports_mc(&target, p.width, n, &run)?;
                    let extra = SweepRow {
                        value: Some(refined as f64),
                        mult_gain: Some(p.mult_gain),
                        ..SweepRow::new(p, "ports-mc")
                            .note("Monte Carlo refinement of the bound-based count")
                    };
                    return Ok((row, Some(extra)));
                }
                row
            }
            other => infeasible_row(base, other),
        },
        DesignQuantity::PortsEqualCorr => {
            let mu = spec.mu.expect("validated");
            match min_ports_equal_corr(&target, mu)? {
                DesignOutcome::Feasible(c) => SweepRow {
                    value: Some(c.n_ports as f64),
                    ..base.note(match c.route {
                        BoundRoute::ClosedForm => format!("mu={}; closed form", fmt_sig(mu)),
                        BoundRoute::Integral => format!("mu={}; integral bound", fmt_sig(mu)),
                    })
                },
                other => infeasible_row(base, other),
            }
        }
        DesignQuantity::Width => match min_width(&target, p.n_ports) {
            Ok(DesignOutcome::Feasible(w)) => SweepRow {
                value: Some(w),
                ..base
            },
            Ok(other) => infeasible_row(base, other),
            Err(e @ FamaError::ResolutionExceeded { .. }) => SweepRow {
                infeasible: true,
                ..base.note(format!("infeasible: {e}"))
            },
            Err(e) => return Err(e),
        },
        DesignQuantity::CriticalMu => match critical_mu(&target, p.n_ports) {
            Ok(DesignOutcome::Feasible(c)) => SweepRow {
                value: Some(c.approx),
                ..base.note(match c.exact {
                    Some(x) => format!("exact form {}", fmt_sig(x)),
                    None => "exact form negative".to_string(),
                })
            },
            Ok(other) => infeasible_row(base, other),
            Err(FamaError::InvalidArgument(msg)) => SweepRow {
                infeasible: true,
                ..base.note(format!("infeasible: {msg}"))
            },
            Err(e) => return Err(e),
        },
    };
    Ok((row, None))
}

/// `x` with 9 significant digits, trailing zeros dropped; scientific
/// notation outside `[1e-5, 1e9)`.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{:.8e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        trim_zeros(format!("{:.*}", decimals, x))
    } else {
        format!("{}e{}", trim_zeros(mantissa.to_string()), exp)
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}
