//! Two-column text trace files.
//!
//! ```text
//! # name: averaged
//! # unit: tesla
//! # sample_rate: 2.5000000000000000e5
//! 0.0000000000000000e0,1.2345678901234567e-9
//! ```
//!
//! Values are written with 17 significant digits so a write/read cycle is
//! bit-exact. The time column is informational; the reader rebuilds times
//! from the sample rate.

use std::fmt::Write as _;
use std::path::Path;

use nvmag::{Trace, Unit};

use crate::error::{CliError, Result};

pub fn format_trace(name: &str, trace: &Trace) -> String {
    let mut out = String::with_capacity(trace.len() * 48 + 96);
    let _ = writeln!(out, "# name: {name}");
    let _ = writeln!(out, "# unit: {}", trace.unit());
    let _ = writeln!(out, "# sample_rate: {:.16e}", trace.sample_rate());
    for (i, v) in trace.samples().iter().enumerate() {
        let _ = writeln!(out, "{:.16e},{:.16e}", trace.time(i), v);
    }
    out
}

pub fn write_trace(path: &Path, name: &str, trace: &Trace) -> Result<()> {
    std::fs::write(path, format_trace(name, trace)).map_err(|e| CliError::io(path, e))
}

fn header<'a>(line: Option<(usize, &'a str)>, key: &str, path: &Path) -> Result<&'a str> {
    let (i, text) = line.ok_or_else(|| CliError::TraceFormat {
        path: path.into(),
        line: 0,
        message: format!("missing `# {key}:` header"),
    })?;
    let prefix = format!("# {key}:");
    text.strip_prefix(&prefix)
        .map(str::trim)
        .ok_or_else(|| CliError::TraceFormat {
            path: path.into(),
            line: i + 1,
            message: format!("expected `# {key}:` header"),
        })
}

/// Parses the text form; `path` is used only in diagnostics.
pub fn parse_trace(text: &str, path: &Path) -> Result<(String, Trace)> {
    let mut lines = text.lines().enumerate();
    let name = header(lines.next(), "name", path)?.to_string();
    let unit_line = lines.next();
    let unit_text = header(unit_line, "unit", path)?;
    let unit: Unit = unit_text
        .parse()
        .map_err(|e: nvmag::Error| CliError::TraceFormat {
            path: path.into(),
            line: 2,
            message: e.to_string(),
        })?;
    let rate_text = header(lines.next(), "sample_rate", path)?;
    let sample_rate: f64 = rate_text.parse().map_err(|_| CliError::TraceFormat {
        path: path.into(),
        line: 3,
        message: format!("invalid sample rate `{rate_text}`"),
    })?;
    let mut samples = Vec::new();
    for (i, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let value =
            line.split_once(',')
                .map(|(_, v)| v.trim())
                .ok_or_else(|| CliError::TraceFormat {
                    path: path.into(),
                    line: i + 1,
                    message: "expected `time,value`".into(),
                })?;
        samples.push(value.parse::<f64>().map_err(|_| CliError::TraceFormat {
            path: path.into(),
            line: i + 1,
            message: format!("invalid value `{value}`"),
        })?);
    }
    let trace = Trace::new(sample_rate, samples, unit).map_err(|e| CliError::TraceFormat {
        path: path.into(),
        line: 3,
        message: e.to_string(),
    })?;
    Ok((name, trace))
}

pub fn read_trace(path: &Path) -> Result<(String, Trace)> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_trace(&text, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bit_exact_round_trip() {
        let t = Trace::from_fn(250e3, 100, Unit::Tesla, |t| {
            (t * 1e4).sin() * 1.234_567_890_123e-9 + 1e-300
        })
        .unwrap();
        let text = format_trace("x", &t);
        let (name, back) = parse_trace(&text, Path::new("mem")).unwrap();
        assert_eq!(name, "x");
        assert_eq!(back, t);
    }

    #[test]
    fn diagnostics_carry_line_numbers() {
        let bad = "# name: a\n# unit: tesla\n# sample_rate: 10\n0,1\n1,oops\n";
        match parse_trace(bad, Path::new("f")) {
            Err(CliError::TraceFormat { line, .. }) => assert_eq!(line, 5),
            other => panic!("{other:?}"),
        }
        let bad_unit = "# name: a\n# unit: furlongs\n# sample_rate: 10\n";
        assert!(parse_trace(bad_unit, Path::new("f")).is_err());
    }
}
