//! Sensitivity runs: synthetic test-tone and noise-only trials pushed
//! through the scenario's chain, then the requested estimators.

use std::collections::BTreeSet;

use rayon::prelude::*;

use nvmag::analysis::{
    sensitivity_method1, sensitivity_method2, sensitivity_method3, TheoreticalBudget,
};
use nvmag::sensor::{cascade_response, spin_projection_limit, volts_to_field};
use nvmag::{SensitivityReport, Trace, Unit};

use crate::config::Scenario;
use crate::error::Result;
use crate::report::Node;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, clap::ValueEnum)]
pub enum Method {
    /// Test-tone projection spread.
    Projection,
    /// Spectral floor calibrated by the test tone.
    Spectral,
    /// RMS of noise-only records over the noise bandwidth.
    Rms,
}

impl Method {
    pub fn all() -> BTreeSet<Method> {
        [Method::Projection, Method::Spectral, Method::Rms]
            .into_iter()
            .collect()
    }
}

/// Trial layout for a sensitivity run.
#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityRun {
    pub n_trials: usize,
    pub t_trial: f64,
    /// Acquisition rate for these runs. Lower than the AP record rate: the
    /// lock-in band sits well inside it and 150 s of data stay small.
    pub sample_rate: f64,
    pub b_test: f64,
    pub f_test: f64,
    pub band: (f64, f64),
    /// Ensemble for the spin-projection line.
    pub n_spins: f64,
    pub t2_star: f64,
}

impl Default for SensitivityRun {
    fn default() -> Self {
        Self {
            n_trials: 150,
            t_trial: 1.0,
            sample_rate: 25e3,
            b_test: 1.8e-9,
            f_test: 250.0,
            band: (300.0, 600.0),
            n_spins: 8e11,
            t2_star: 450e-9,
        }
    }
}

/// Calibrated trials for `field` on streams `offset..offset + n`.
fn trials(s: &Scenario, run: &SensitivityRun, field: &Trace, offset: u64) -> Result<Vec<Trace>> {
    let mut chain = s.chain;
    chain.sample_rate = run.sample_rate;
    let c = chain.calibration()?;
    (0..run.n_trials as u64)
        .into_par_iter()
        .map(|i| {
            Ok(volts_to_field(
                &chain.synthesize_trial(field, s.seed, offset + i)?,
                c,
            )?)
        })
        .collect()
}

/// Runs `methods` on fresh trials generated from the scenario's chain and
/// attaches the analytic budget.
pub fn report_sensitivity(
    s: &Scenario,
    run: &SensitivityRun,
    methods: &BTreeSet<Method>,
) -> Result<SensitivityReport> {
    let fs = run.sample_rate;
    let n = (run.t_trial * fs).round() as usize;
    let w = std::f64::consts::TAU * run.f_test;
    let tone = Trace::from_fn(fs, n, Unit::Tesla, |t| run.b_test * (w * t).sin())?;
    let silent = Trace::zeros(fs, n, Unit::Tesla)?;

    let needs_tone = methods.contains(&Method::Projection) || methods.contains(&Method::Spectral);
    let tone_trials = if needs_tone {
        trials(s, run, &tone, 0)?
    } else {
        Vec::new()
    };
    let eta1 = if methods.contains(&Method::Projection) {
        Some(sensitivity_method1(&tone_trials, run.b_test, run.f_test)?)
    } else {
        None
    };
    let eta2 = if methods.contains(&Method::Spectral) {
        Some(sensitivity_method2(
            &tone_trials,
            run.b_test,
            run.f_test,
            run.band,
        )?)
    } else {
        None
    };
    drop(tone_trials);
    let eta3 = if methods.contains(&Method::Rms) {
        let f_enbw = cascade_response(&s.lockin, fs)?.enbw;
        let quiet = trials(s, run, &silent, run.n_trials as u64)?;
        Some(sensitivity_method3(&quiet, f_enbw)?)
    } else {
        None
    };

    let delta_f = s.odmr.gamma / std::f64::consts::TAU;
    let theoretical = TheoreticalBudget {
        chain: s.noise.chain(delta_f, 2.0 * s.odmr.contrast)?,
        spin_projection: spin_projection_limit(run.n_spins, run.t2_star)?,
    };
    Ok(SensitivityReport {
        eta1,
        eta2,
        eta3,
        n_trials: run.n_trials,
        t_trial: run.t_trial,
        band: run.band,
        theoretical: Some(theoretical),
    })
}

pub fn sensitivity_node(s: &Scenario, r: &SensitivityReport) -> Node {
    let mut measured = Node::map();
    for (key, v) in [("eta1", r.eta1), ("eta2", r.eta2), ("eta3", r.eta3)] {
        if let Some(v) = v {
            measured.push(key, v);
        }
    }
    let mut node = Node::map()
        .with("injected_noise_t_per_rthz", s.chain.noise_density)
        .with("n_trials", r.n_trials)
        .with("t_trial_s", r.t_trial)
        .with("band_hz", vec![r.band.0, r.band.1])
        .with("measured_t_per_rthz", measured);
    if let Some(t) = &r.theoretical {
        node.push(
            "theory_t_per_rthz",
            Node::map()
                .with("shot", t.chain.shot)
                .with("cw_esr", t.chain.cw_esr)
                .with("full", t.chain.full)
                .with("spin_projection", t.spin_projection),
        );
    }
    node
}
