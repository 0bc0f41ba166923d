//! `fama-lab`: sweeps of the FAMA outage, capacity and design relations.

mod config;
mod selftest;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use config::{parse_values, Settings};
use fama_core::plot::{emit_plot_script, FigureKind};
use fama_core::sweep::{parse_estimators, Axis};
use fama_core::{run_sweep, Execution, QuadratureSettings, SweepSpec};

#[derive(Parser)]
#[command(name = "fama-lab", version, about = "Fluid antenna multiple access laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Outage probability along an axis (default: number of ports).
    Outage(SweepArgs),
    /// Capacity lower bound along an axis (default: SIR target in dB).
    Capacity(SweepArgs),
    /// Multiplexing gain against antenna length.
    GainVsWidth(SweepArgs),
    /// Ports required against the target multiplexing gain.
    PortsVsGain(SweepArgs),
    /// Antenna length required against the number of ports.
    WidthVsPorts(SweepArgs),
    /// Every design rule at one multiplexing-gain target.
    Design(SweepArgs),
    /// Identity checks plus a serial-versus-parallel determinism probe.
    Selftest(SelftestArgs),
}

#[derive(Args, Default)]
struct SweepArgs {
    /// Swept parameter: gamma_db, n_ports, n_interferers, width or mult_gain.
    #[arg(long)]
    axis: Option<String>,
    /// Axis values: `a,b,c` or an inclusive `start:stop:step` range.
    #[arg(long, allow_hyphen_values = true)]
    values: Option<String>,
    /// SIR target in dB.
    #[arg(long, allow_hyphen_values = true)]
    gamma_db: Option<f64>,
    /// Number of ports N.
    #[arg(long)]
    ports: Option<usize>,
    /// Antenna length W in wavelengths.
    #[arg(long)]
    width: Option<f64>,
    /// Number of interferers N_I.
    #[arg(long)]
    interferers: Option<usize>,
    /// Comma list from exact, bound-I, bound-II, mc, ports-general,
    /// ports-equal, width, critical-mu.
    #[arg(long)]
    methods: Option<String>,
    /// Monte Carlo trials per point.
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Desired-channel amplitude scale.
    #[arg(long)]
    sigma: Option<f64>,
    /// Aggregate interference scale (default sqrt(N_I) * sigma).
    #[arg(long)]
    sigma_i: Option<f64>,
    /// Common port correlation for the equal-correlation rules.
    #[arg(long)]
    mu: Option<f64>,
    /// Target multiplexing gain for the design rules.
    #[arg(long)]
    mult_gain: Option<f64>,
    /// Tighten bound-based port counts with Monte Carlo.
    #[arg(long)]
    refine_mc: bool,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args, Default)]
struct CommonArgs {
    /// File of `key = value` lines; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// CSV destination (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, env = "FAMA_LAB_THREADS")]
    threads: Option<usize>,
    /// Also write a gnuplot script next to the CSV (optionally naming the figure kind).
    #[arg(long, num_args = 0..=1, default_missing_value = "auto")]
    plot: Option<String>,
}

#[derive(Args)]
struct SelftestArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[command(flatten)]
    common: CommonArgs,
}

/// Per-subcommand defaults, lowest priority in the merge.
fn defaults(cmd: &Command) -> (&'static str, FigureKind) {
    match cmd {
        Command::Outage(_) => (
            "axis = n_ports\nvalues = 1,2,5,10,20,30\nmethods = exact,bound-I,mc",
            FigureKind::OutageVsN,
        ),
        Command::Capacity(_) => (
            "axis = gamma_db\nvalues = -10:30:2\nports = 50\ninterferers = 100\nmethods = bound-I",
            FigureKind::CapacityVsGamma,
        ),
        Command::GainVsWidth(_) => (
            "axis = width\nvalues = 0.1:5:0.1\ngamma_db = 0\ninterferers = 100\nmethods = bound-I",
            FigureKind::GainVsWidth,
        ),
        Command::PortsVsGain(_) => (
            "axis = mult_gain\nvalues = 1:10:1\ngamma_db = 0\ninterferers = 100\nmethods = ports-general",
            FigureKind::PortsVsGain,
        ),
        Command::WidthVsPorts(_) => (
            "axis = n_ports\nvalues = 10,20,50,100,200,500,1000\ngamma_db = 0\ninterferers = 100\nmethods = width",
            FigureKind::WidthVsPorts,
        ),
        Command::Design(_) => (
            "axis = mult_gain\ngamma_db = 10\ninterferers = 100\nmethods = ports-general,width,critical-mu",
            FigureKind::PortsVsGain,
        ),
        Command::Selftest(_) => ("", FigureKind::OutageVsN),
    }
}

/// Merged settings, and whether the method list was chosen by the user
/// (an explicit `exact` beyond the cap is then an error, not a fallback).
fn merge(cmd: &Command, a: &SweepArgs) -> Result<(Settings, bool), String> {
    let mut s = Settings::parse(defaults(cmd).0, "defaults")?;
    let mut explicit = a.methods.as_deref().is_some_and(|m| m != "auto");
    if let Some(path) = &a.common.config {
        let file = Settings::load(path)?;
        explicit |= file.raw("methods").is_some_and(|m| m != "auto");
        for key in config::KNOWN_KEYS {
            s.set(key, file.raw(key));
        }
    }
    s.set("axis", a.axis.as_ref());
    s.set("values", a.values.as_ref());
    s.set("gamma_db", a.gamma_db);
    s.set("ports", a.ports);
    s.set("width", a.width);
    s.set("interferers", a.interferers);
    s.set("methods", a.methods.as_ref());
    if s.raw("methods") == Some("auto") {
        s.set("methods", Some("exact,bound-I,mc"));
    }
    s.set("trials", a.trials);
    s.set("seed", a.seed);
    s.set("sigma", a.sigma);
    s.set("sigma_i", a.sigma_i);
    s.set("mu", a.mu);
    s.set("mult_gain", a.mult_gain);
    s.set("threads", a.common.threads);
    s.set("plot", a.common.plot.as_ref());
    if a.refine_mc {
        s.set("refine_mc", Some(true));
    }
    if matches!(cmd, Command::Design(_)) {
        // one point at the requested gain
        let m = s.get_or("mult_gain", 2.0)?;
        s.set("values", Some(m));
        if s.raw("mu").is_some() && !explicit {
            s.set("methods", Some("ports-general,ports-equal,width,critical-mu"));
        }
    }
    if matches!(cmd, Command::PortsVsGain(_)) && s.raw("mu").is_some() && !explicit {
        s.set("methods", Some("ports-general,ports-equal"));
    }
    Ok((s, explicit))
}

fn build_spec(s: &Settings, explicit_methods: bool) -> Result<SweepSpec, String> {
    let d = SweepSpec::default();
    let q = QuadratureSettings::default();
    let axis_name = s.raw("axis").unwrap_or("n_ports");
    let spec = SweepSpec {
        axis: Axis::parse(axis_name).ok_or_else(|| format!("unknown axis '{axis_name}'"))?,
        values: parse_values(s.raw("values").unwrap_or(""))?,
        gamma_db: s.get_or("gamma_db", d.gamma_db)?,
        n_ports: s.get_or("ports", d.n_ports)?,
        width: s.get_or("width", d.width)?,
        n_interferers: s.get_or("interferers", d.n_interferers)?,
        sigma: s.get_or("sigma", d.sigma)?,
        sigma_i: s.get("sigma_i")?,
        methods: parse_estimators(s.raw("methods").unwrap_or("exact,bound-I,mc"))
            .map_err(|e| e.to_string())?,
        auto_fallback: !explicit_methods,
        trials: s.get_or("trials", d.trials)?,
        seed: s.get_or("seed", d.seed)?,
        mult_gain: s.get_or("mult_gain", d.mult_gain)?,
        mu: s.get("mu")?,
        refine_mc: s.flag("refine_mc")?,
        quadrature: QuadratureSettings {
            outer_nodes: s.get_or("outer_nodes", q.outer_nodes)?,
            inner_nodes: s.get_or("inner_nodes", q.inner_nodes)?,
            tail_cutoff: s.get_or("tail_cutoff", q.tail_cutoff)?,
            tolerance: s.get_or("tolerance", q.tolerance)?,
        },
        execution: execution(),
    };
    spec.validate().map_err(|e| e.to_string())?;
    Ok(spec)
}

fn execution() -> Execution {
    if cfg!(feature = "parallel") {
        Execution::Parallel
    } else {
        Execution::Serial
    }
}

fn install_pool(threads: Option<usize>) -> Result<(), String> {
    match threads {
        Some(0) => Err("--threads must be at least 1".into()),
        #[cfg(feature = "parallel")]
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| format!("thread pool: {e}")),
        _ => Ok(()),
    }
}

fn write_output(csv: &str, out: Option<&Path>) -> Result<(), String> {
    match out {
        Some(p) => fs::write(p, csv).map_err(|e| format!("{}: {e}", p.display())),
        None => io::stdout()
            .lock()
            .write_all(csv.as_bytes())
            .map_err(|e| format!("stdout: {e}")),
    }
}

/// Resolve `--plot` up front so a bad kind fails before any work.
fn plot_kind(
    plot: Option<&str>,
    fallback: FigureKind,
    out: Option<&Path>,
) -> Result<Option<FigureKind>, String> {
    let Some(kind) = plot else { return Ok(None) };
    if out.is_none() {
        return Err("--plot needs --out so the script can reference the CSV".into());
    }
    if kind == "auto" {
        return Ok(Some(fallback));
    }
    kind.parse()
        .map(Some)
        .map_err(|e: fama_core::FamaError| e.to_string())
}

fn emit_plot(kind: Option<FigureKind>, out: Option<&Path>) -> Result<(), String> {
    if let (Some(kind), Some(out)) = (kind, out) {
        let script = emit_plot_script(out, kind).map_err(|e| e.to_string())?;
        eprintln!("wrote {}", script.display());
    }
    Ok(())
}

fn run_sweep_command(cmd: &Command, args: &SweepArgs) -> Result<ExitCode, String> {
    let (settings, explicit) = merge(cmd, args)?;
    let out = args.common.out.as_deref();
    let plot = plot_kind(settings.raw("plot"), defaults(cmd).1, out)?;
    install_pool(settings.get("threads")?)?;
    let spec = build_spec(&settings, explicit)?;
    let result = run_sweep(&spec).map_err(|e| e.to_string())?;
    let csv = result.to_csv().map_err(|e| e.to_string())?;
    write_output(&csv, out)?;
    emit_plot(plot, out)?;
    Ok(if result.infeasible_only() {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    })
}

fn run_selftest(args: &SelftestArgs) -> Result<ExitCode, String> {
    let out = args.common.out.as_deref();
    let plot = plot_kind(args.common.plot.as_deref(), FigureKind::OutageVsN, out)?;
    install_pool(args.common.threads)?;
    let (checks, csv) = selftest::run(args.seed);
    let mut failed = 0;
    for c in &checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        failed += usize::from(!c.passed);
    }
    if let (Some(out), Some(csv)) = (out, csv) {
        write_output(&csv, Some(out))?;
        emit_plot(plot, Some(out))?;
    }
    if failed > 0 {
        return Err(format!("{failed} selftest check(s) failed"));
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Selftest(a) => run_selftest(a),
        Command::Outage(a)
        | Command::Capacity(a)
        | Command::GainVsWidth(a)
        | Command::PortsVsGain(a)
        | Command::WidthVsPorts(a)
        | Command::Design(a) => run_sweep_command(&cli.command, a),
    };
    match result {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("fama-lab: {msg}");
            ExitCode::FAILURE
        }
    }
}
