//! `key = value` settings merged from a config file and the command line.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::str::FromStr;

pub const KNOWN_KEYS: &[&str] = &[
    "axis",
    "values",
    "gamma_db",
    "ports",
    "width",
    "interferers",
    "methods",
    "trials",
    "seed",
    "threads",
    "sigma",
    "sigma_i",
    "mu",
    "mult_gain",
    "refine_mc",
    "plot",
    "outer_nodes",
    "inner_nodes",
    "tail_cutoff",
    "tolerance",
];

/// Later insertions win, so load the file first and overlay flags.
#[derive(Debug, Default, Clone)]
pub struct Settings {
    entries: BTreeMap<String, String>,
}

fn normalize(key: &str) -> String {
    key.trim().replace('-', "_")
}

impl Settings {
    pub fn parse(text: &str, origin: &str) -> Result<Self, String> {
        let mut s = Settings::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| format!("{origin}:{}: expected 'key = value'", i + 1))?;
            let key = normalize(k);
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(format!("{origin}:{}: unknown key '{}'", i + 1, k.trim()));
            }
            s.entries.insert(key, v.trim().to_string());
        }
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn set(&mut self, key: &str, value: Option<impl ToString>) {
        if let Some(v) = value {
            self.entries.insert(normalize(key), v.to_string());
        }
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, String>
    where
        T::Err: std::fmt::Display,
    {
        self.raw(key)
            .map(|v| v.parse::<T>().map_err(|e| format!("{key} = '{v}': {e}")))
            .transpose()
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T, String>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn flag(&self, key: &str) -> Result<bool, String> {
        match self.raw(key) {
            None => Ok(false),
            Some("true" | "1" | "yes" | "on") => Ok(true),
            Some("false" | "0" | "no" | "off") => Ok(false),
            Some(v) => Err(format!("{key} = '{v}': expected true or false")),
        }
    }
}

/// Comma-separated numbers, or an inclusive `start:stop:step` range.
pub fn parse_values(text: &str) -> Result<Vec<f64>, String> {
    let text = text.trim();
    if let Some((start, rest)) = text.split_once(':') {
        let (stop, step) = rest
            .split_once(':')
            .ok_or_else(|| format!("range '{text}' must be start:stop:step"))?;
        let num = |s: &str| s.trim().parse::<f64>().map_err(|e| format!("'{s}': {e}"));
        let (a, b, h) = (num(start)?, num(stop)?, num(step)?);
        if h.is_nan() || h <= 0.0 || b < a {
            return Err(format!("range '{text}' needs step > 0 and stop >= start"));
        }
        let count = ((b - a) / h + 1e-9).floor() as usize;
        // Snap to the step grid so values like 0.1 print cleanly.
        return Ok((0..=count)
            .map(|i| {
                let v = a + i as f64 * h;
                (v * 1e9).round() / 1e9
            })
            .collect());
    }
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse::<f64>().map_err(|e| format!("'{}': {e}", s.trim())))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_key_value_lines() {
        let s = Settings::parse("# sweep\ngamma-db = 10\n\nports=20 # inline\n", "cfg").unwrap();
        assert_eq!(s.get::<f64>("gamma_db").unwrap(), Some(10.0));
        assert_eq!(s.get::<usize>("ports").unwrap(), Some(20));
        assert!(Settings::parse("bogus = 1", "cfg").is_err());
        assert!(Settings::parse("ports 20", "cfg").is_err());
    }

    #[test]
    fn later_values_override() {
        let mut s = Settings::parse("ports = 20", "cfg").unwrap();
        s.set("ports", Some(30));
        s.set("width", None::<f64>);
        assert_eq!(s.get_or("ports", 0usize).unwrap(), 30);
        assert_eq!(s.get_or("width", 2.0).unwrap(), 2.0);
    }

    #[test]
    fn value_lists_and_ranges() {
        assert_eq!(parse_values("1, 2,5").unwrap(), vec![1.0, 2.0, 5.0]);
        assert_eq!(parse_values("0:1:0.25").unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(parse_values("0.1:0.3:0.1").unwrap(), vec![0.1, 0.2, 0.3]);
        assert!(parse_values("1:0:1").is_err());
        assert!(parse_values("a,b").is_err());
    }
}
