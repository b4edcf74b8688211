//! Scenario runner, reference reproduction and reporting for `nvmag`.

pub mod checks;
pub mod config;
pub mod error;
pub mod report;
pub mod reproduction;
pub mod scenario;
pub mod sensitivity;
pub mod trace_io;

use std::path::Path;

use nvmag::analysis::snr;
use nvmag::{MatchedTemplate, Trace};

pub use checks::{run_checks, CheckRow};
pub use config::{builtin, Scenario, ScenarioConfig, BUILTIN_NAMES};
pub use error::{CliError, Result};
pub use report::{Format, Node};
pub use scenario::{run_scenario, Bundle};
pub use sensitivity::{report_sensitivity, Method, SensitivityRun};

/// Resolves a builtin name or reads a scenario file.
pub fn load_scenario(arg: &str) -> Result<Scenario> {
    if BUILTIN_NAMES.contains(&arg) {
        return Scenario::from_config(&builtin(arg)?);
    }
    if !Path::new(arg).exists() {
        return Err(CliError::UnknownBuiltin(
            arg.to_string(),
            BUILTIN_NAMES.join(", "),
        ));
    }
    let text = std::fs::read_to_string(arg).map_err(|e| CliError::io(Path::new(arg), e))?;
    Scenario::from_toml(&text, arg)
}

/// Analysis windows and averaging count used when scoring a record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Windows {
    pub signal: (f64, f64),
    pub quiet: (f64, f64),
    pub n_avg: usize,
}

impl Windows {
    pub fn of(s: &Scenario) -> Self {
        let (signal, quiet) = scenario::windows(s);
        Self {
            signal,
            quiet,
            n_avg: s.n_avg,
        }
    }
}

fn snr_node(r: &nvmag::analysis::SnrReport<f64>) -> Node {
    Node::map()
        .with("snr_avg", r.snr_avg)
        .with("snr_single", r.snr_single)
        .with("n_avg", r.n_avg)
        .with("peak_to_peak_t", r.peak_to_peak)
        .with("sigma_t", r.sigma)
        .with("detected", r.detected)
}

/// Scores a calibrated record, optionally also through a matched filter.
/// `simulate` and `detect` share this so reloaded traces reproduce the
/// original report.
pub fn analyze(trace: &Trace, template: Option<&MatchedTemplate>, w: &Windows) -> Result<Node> {
    let mut node = Node::map().with("direct", snr_node(&snr(trace, w.signal, w.quiet, w.n_avg)?));
    if let Some(t) = template {
        let filtered = nvmag::analysis::matched_filter(trace, t)?;
        let delayed = (w.signal.0, (w.signal.1 + t.window()).min(w.quiet.0));
        let r = snr(&filtered, delayed, w.quiet, w.n_avg)?;
        let range = filtered.window_range(delayed.0, delayed.1)?;
        let peak = range
            .clone()
            .max_by(|&a, &b| {
                filtered.samples()[a]
                    .abs()
                    .total_cmp(&filtered.samples()[b].abs())
            })
            .unwrap_or(range.start);
        node.push(
            "matched",
            snr_node(&r)
                .with("template_window_s", t.window())
                .with("peak_time_s", filtered.time(peak)),
        );
    }
    Ok(node)
}

/// Template file contents: the expected signal in forward time.
pub fn template_trace(t: &MatchedTemplate) -> Result<Trace> {
    Ok(Trace::new(
        t.sample_rate(),
        t.forward(),
        nvmag::Unit::Tesla,
    )?)
}

pub fn template_from_trace(trace: &Trace) -> Result<MatchedTemplate> {
    let reversed = trace.samples().iter().rev().copied().collect();
    Ok(MatchedTemplate::from_reversed(
        reversed,
        trace.sample_rate(),
        1,
    )?)
}

pub fn bundle_node(s: &Scenario, b: &Bundle) -> Result<Node> {
    let w = Windows::of(s);
    let mut node = Node::map()
        .with("scenario", s.name.as_str())
        .with("seed", s.seed)
        .with("n_avg", s.n_avg)
        .with("calibration_t_per_v", b.calibration)
        .with("true_peak_to_peak_t", b.true_field.peak_to_peak())
        .with("true_peak_t", b.true_field.max_abs())
        .with("rejected_trials", b.rejected)
        .with("snr", snr_node(&b.snr));
    if let Some(t) = &b.template {
        node.push(
            "template",
            Node::map()
                .with("set_size", t.set_size)
                .with("set_snr", t.set_snr.clone())
                .with("correlation", t.correlation)
                .with("low_energy", t.template.is_low_energy()),
        );
    }
    node.push(
        "analysis",
        analyze(&b.filtered, b.template.as_ref().map(|t| &t.template), &w)?,
    );
    Ok(node)
}

/// Writes the bundle traces (and template) into `dir`.
pub fn write_bundle(dir: &Path, b: &Bundle) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    for (name, trace) in [
        ("true_field", &b.true_field),
        ("measured", &b.measured),
        ("averaged", &b.averaged),
        ("filtered", &b.filtered),
    ] {
        trace_io::write_trace(&dir.join(format!("{name}.csv")), name, trace)?;
    }
    if let Some(t) = &b.template {
        trace_io::write_trace(
            &dir.join("template.csv"),
            "template",
            &template_trace(&t.template)?,
        )?;
    }
    Ok(())
}
