//! Reversal checks: each one flips a single experimental knob and asserts
//! the expected transformation of the calibrated output, noise disabled.

use nvmag::analysis::snr;
use nvmag::sensor::volts_to_field;
use nvmag::{Error, Trace};

use crate::config::{builtin, Alignment, Scenario};
use crate::error::Result;
use crate::report::Node;
use crate::scenario::{windows, TrialSource};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckRow {
    pub name: &'static str,
    pub expected: &'static str,
    /// Largest absolute deviation from the expected trace, T.
    pub deviation: f64,
    pub passed: bool,
    pub note: String,
}

fn max_deviation(a: &Trace, b: impl Fn(usize) -> f64) -> f64 {
    a.samples()
        .iter()
        .enumerate()
        .fold(0.0, |m, (i, &x)| m.max((x - b(i)).abs()))
}

/// Calibrated noise-free output with the nominal C_LIA, so that a sign
/// change in the chain shows up in the result.
fn measure(s: &Scenario, c_nominal: f64, field: &Trace) -> Result<Trace> {
    Ok(volts_to_field(
        &s.chain.synthesize(field, s.seed)?,
        c_nominal,
    )?)
}

fn base_scenario() -> Result<Scenario> {
    let mut cfg = builtin("worm_excised")?;
    cfg.noise.enabled = false;
    cfg.n_avg = 1;
    cfg.analysis.template_traces = 0;
    Scenario::from_config(&cfg)
}

fn negation_row(name: &'static str, base: &Trace, flipped: &Trace) -> CheckRow {
    let deviation = max_deviation(flipped, |i| -base.samples()[i]);
    CheckRow {
        name,
        expected: "B_meas -> -B_meas",
        deviation,
        passed: deviation == 0.0 && base.max_abs() > 0.0,
        note: format!("reference p2p {:.4e} T", base.peak_to_peak()),
    }
}

pub fn run_checks() -> Result<Vec<CheckRow>> {
    let s = base_scenario()?;
    let src = TrialSource::new(&s)?;
    let c = src.calibration();
    let field = src.nominal_field();
    let base = measure(&s, c, field)?;
    let mut rows = Vec::new();

    let mut flipped = s.clone();
    flipped.chain.slope_sign = s.chain.slope_sign.flipped();
    rows.push(negation_row(
        "slope sign flip",
        &base,
        &measure(&flipped, c, field)?,
    ));

    let mut phased = s.clone();
    phased.chain.phase_deg += 180.0;
    rows.push(negation_row(
        "phase +180 deg",
        &base,
        &measure(&phased, c, field)?,
    ));

    let mut reversed = s.clone();
    reversed.chain.geometry = s.chain.geometry.with_reversed_bias();
    rows.push(negation_row(
        "B0 reversal",
        &base,
        &measure(&reversed, c, field)?,
    ));

    let off = measure(&s, c, &field.map(field.unit(), |_| 0.0)?)?;
    let (sig, quiet) = windows(&s);
    let detected = match snr(&off, sig, quiet, 1) {
        Ok(r) => r.detected,
        Err(Error::Singular(_)) => false,
        Err(e) => return Err(e.into()),
    };
    let deviation = off.max_abs();
    rows.push(CheckRow {
        name: "source off",
        expected: "B_meas -> 0, not detected",
        deviation,
        passed: deviation == 0.0 && !detected,
        note: format!("detected = {detected}"),
    });

    // Electrode placement changes the trigger trace, not the field: scaling
    // and inverting the electrode gain must leave the aligned record intact.
    let mut triggered = s.clone();
    triggered.alignment = Alignment::Trigger;
    let a = TrialSource::new(&triggered)?.trial(0)?;
    let mut moved = triggered.clone();
    moved.record.trigger_gain *= -3.7;
    let b = TrialSource::new(&moved)?.trial(0)?;
    let (deviation, passed) = match (a, b) {
        (Some(a), Some(b)) => {
            let d = max_deviation(&a, |i| b.samples()[i]);
            (d, d == 0.0)
        }
        _ => (f64::INFINITY, false),
    };
    rows.push(CheckRow {
        name: "electrode placement",
        expected: "B_meas unchanged",
        deviation,
        passed,
        note: "trigger gain x(-3.7)".into(),
    });
    Ok(rows)
}

pub fn checks_node(rows: &[CheckRow]) -> Node {
    let list: Vec<Node> = rows
        .iter()
        .map(|r| {
            Node::map()
                .with("name", r.name)
                .with("expected", r.expected)
                .with("max_deviation_t", r.deviation)
                .with("passed", r.passed)
                .with("note", r.note.as_str())
        })
        .collect();
    Node::map()
        .with("passed", rows.iter().all(|r| r.passed))
        .with("rows", list)
}
