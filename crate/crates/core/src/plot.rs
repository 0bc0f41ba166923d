//! Gnuplot scripts for sweep CSVs.
//!
//! Columns are addressed by header name, so a script keeps working if the
//! sweep gains rows. Series are discovered from the CSV itself: one line per
//! method and per distinct value of the parameters that vary off-axis.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{FamaError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureKind {
    OutageVsN,
    OutageVsGamma,
    CapacityVsGamma,
    CapacityVsN,
    GainVsWidth,
    PortsVsGain,
    WidthVsPorts,
}

impl FigureKind {
    pub const ALL: [FigureKind; 7] = [
        FigureKind::OutageVsN,
        FigureKind::OutageVsGamma,
        FigureKind::CapacityVsGamma,
        FigureKind::CapacityVsN,
        FigureKind::GainVsWidth,
        FigureKind::PortsVsGain,
        FigureKind::WidthVsPorts,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FigureKind::OutageVsN => "outage-vs-N",
            FigureKind::OutageVsGamma => "outage-vs-gamma",
            FigureKind::CapacityVsGamma => "capacity-vs-gamma",
            FigureKind::CapacityVsN => "capacity-vs-N",
            FigureKind::GainVsWidth => "gain-vs-width",
            FigureKind::PortsVsGain => "ports-vs-gain",
            FigureKind::WidthVsPorts => "width-vs-ports",
        }
    }

    /// `(x column, y column, x label, y label, log-scale y)`.
    fn layout(self) -> (&'static str, &'static str, &'static str, &'static str, bool) {
        match self {
            FigureKind::OutageVsN => ("N", "value", "number of ports N", "outage probability", true),
            FigureKind::OutageVsGamma => ("gamma_db", "value", "SIR target (dB)", "outage probability", true),
            FigureKind::CapacityVsGamma => ("gamma_db", "capacity_lb", "SIR target (dB)", "capacity (bits/s/Hz)", false),
            FigureKind::CapacityVsN => ("N", "capacity_lb", "number of ports N", "capacity (bits/s/Hz)", false),
            FigureKind::GainVsWidth => ("W", "mult_gain", "antenna length W (wavelengths)", "multiplexing gain", false),
            FigureKind::PortsVsGain => ("mult_gain", "value", "multiplexing gain m", "ports N", false),
            FigureKind::WidthVsPorts => ("N", "value", "number of ports N", "antenna length W (wavelengths)", false),
        }
    }
}

impl FromStr for FigureKind {
    type Err = FamaError;

    fn from_str(s: &str) -> Result<Self> {
        FigureKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| {
                let known: Vec<_> = FigureKind::ALL.iter().map(|k| k.as_str()).collect();
                FamaError::InvalidArgument(format!(
                    "unknown figure kind '{s}' (expected one of {})",
                    known.join(", ")
                ))
            })
    }
}

/// Build the script text for `csv_path`, reading the CSV to find its series.
pub fn plot_script(csv_path: &Path, kind: FigureKind) -> Result<String> {
    let io = |e: &dyn std::fmt::Display| FamaError::Io {
        path: csv_path.display().to_string(),
        message: e.to_string(),
    };
    let mut reader = csv::Reader::from_path(csv_path).map_err(|e| io(&e))?;
    let headers = reader.headers().map_err(|e| io(&e))?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let (x, y, xlabel, ylabel, logy) = kind.layout();
    for needed in [x, y, "method", "NI", "W"] {
        if col(needed).is_none() {
            return Err(io(&format!("missing column '{needed}'")));
        }
    }
    let (mi, ni, wi) = (col("method").unwrap(), col("NI").unwrap(), col("W").unwrap());
    let mut series = BTreeSet::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| io(&e))?;
        let w = if x == "W" { String::new() } else { rec[wi].to_string() };
        series.insert((rec[mi].to_string(), rec[ni].to_string(), w));
    }
    let distinct_w = series.iter().map(|s| &s.2).collect::<BTreeSet<_>>().len() > 1;

    let file = csv_path.display().to_string().replace('"', "\\\"");
    let mut s = String::new();
    writeln!(s, "# {} from {}", kind.as_str(), file).unwrap();
    writeln!(s, "set datafile separator \",\"").unwrap();
    writeln!(s, "set datafile missing \"\"").unwrap();
    writeln!(s, "set xlabel \"{xlabel}\"").unwrap();
    writeln!(s, "set ylabel \"{ylabel}\"").unwrap();
    if logy {
        writeln!(s, "set logscale y").unwrap();
        writeln!(s, "set format y \"10^{{%L}}\"").unwrap();
    } else {
        writeln!(s, "unset logscale y").unwrap();
    }
    writeln!(s, "set key outside right").unwrap();
    writeln!(s, "set grid").unwrap();
    writeln!(s, "data = \"{file}\"").unwrap();
    if series.is_empty() {
        writeln!(s, "plot data using \"{x}\":\"{y}\" with linespoints notitle").unwrap();
        return Ok(s);
    }
    let parts: Vec<String> = series
        .iter()
        .map(|(method, ni, w)| {
            let mut cond = format!("strcol(\"method\") eq \"{method}\" && strcol(\"NI\") eq \"{ni}\"");
            let mut title = format!("{method}, N_I={ni}");
            if distinct_w {
                write!(cond, " && strcol(\"W\") eq \"{w}\"").unwrap();
                write!(title, ", W={w}").unwrap();
            }
            format!(
                "data using \"{x}\":(({cond}) ? column(\"{y}\") : NaN) with linespoints title \"{title}\""
            )
        })
        .collect();
    writeln!(s, "plot {}", parts.join(", \\\n     ")).unwrap();
    Ok(s)
}

/// Write the script next to the CSV as `<stem>.<kind>.gp` and return its path.
pub fn emit_plot_script(csv_path: &Path, kind: FigureKind) -> Result<PathBuf> {
    let text = plot_script(csv_path, kind)?;
    let stem = csv_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "sweep".into());
    let out = csv_path.with_file_name(format!("{stem}.{}.gp", kind.as_str()));
    fs::write(&out, text).map_err(|e| FamaError::Io {
        path: out.display().to_string(),
        message: e.to_string(),
    })?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn temp_csv(name: &str, body: &str) -> PathBuf {
        let dir = std::env::temp_dir().join(format!("fama-plot-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let p = dir.join(name);
        fs::write(&p, body).unwrap();
        p
    }

    const HEADER: &str = "gamma_db,N,W,NI,sigma,sigma_i,method,value,ci_halfwidth,capacity_lb,mult_gain,note\n";

    #[test]
    fn outage_vs_n_uses_log_y() {
        let p = temp_csv(
            "outage.csv",
            &format!("{HEADER}10,2,2,5,1,2.2,exact,0.9,,1,0.6,\n10,2,2,5,1,2.2,bound-I,0.95,,1,0.3,\n"),
        );
        let text = plot_script(&p, FigureKind::OutageVsN).unwrap();
        assert!(text.contains("set logscale y"));
        assert!(text.contains("\"N\""));
        assert!(text.contains("exact, N_I=5") && text.contains("bound-I, N_I=5"));
        let out = emit_plot_script(&p, FigureKind::OutageVsN).unwrap();
        assert!(out.exists());
    }

    #[test]
    fn capacity_vs_gamma_has_series_per_interferer_count() {
        let p = temp_csv(
            "cap.csv",
            &format!("{HEADER}0,50,2,10,1,3,bound-I,0.5,,5,5,\n0,50,2,100,1,10,bound-I,0.6,,40,40,\n"),
        );
        let text = plot_script(&p, FigureKind::CapacityVsGamma).unwrap();
        assert!(text.contains("unset logscale y"));
        assert!(text.contains("N_I=10") && text.contains("N_I=100"));
        assert!(text.contains("column(\"capacity_lb\")"));
    }

    #[test]
    fn unknown_kind_and_missing_file() {
        assert!("fig-9".parse::<FigureKind>().is_err());
        let missing = Path::new("/nonexistent/dir/sweep.csv");
        let err = plot_script(missing, FigureKind::OutageVsN).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/dir/sweep.csv"));
    }
}
