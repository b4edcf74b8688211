//! End-to-end scenario runs: source → chain → averaging → detection.

use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use nvmag::analysis::{
    align_to, build_template, matched_filter, snr, trigger_index, Extremum, SnrReport,
};
use nvmag::neuro::{ap_field_from_voltage, synth_ap_waveform};
use nvmag::sensor::volts_to_field;
use nvmag::{CombFilter, MatchedTemplate, Trace, Unit};

use crate::config::{Alignment, Scenario};
use crate::error::Result;

/// Trials generated concurrently before being folded into the running sum.
const CHUNK: usize = 32;
/// Separates the timing-jitter streams from the sensor-noise streams.
const JITTER_SALT: u64 = 0x6a69_7474_6572;

#[derive(Debug, Clone, PartialEq)]
pub struct TemplateOutcome {
    pub template: MatchedTemplate,
    pub set_size: usize,
    /// Matched-filter SNR of each set average.
    pub set_snr: Vec<f64>,
    /// Pearson correlation of the template with the noise-free response.
    pub correlation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bundle {
    pub true_field: Trace,
    /// First trial, calibrated to tesla.
    pub measured: Trace,
    pub averaged: Trace,
    /// `averaged` after the powerline comb (or unchanged when disabled).
    pub filtered: Trace,
    pub snr: SnrReport<f64>,
    pub calibration: f64,
    /// Trials dropped for a flat trigger.
    pub rejected: usize,
    pub template: Option<TemplateOutcome>,
}

/// Per-trial generator shared by the scenario runners.
pub struct TrialSource<'a> {
    s: &'a Scenario,
    calibration: f64,
    nominal_phi: Trace,
    nominal_field: Trace,
    reference: usize,
    which: Extremum,
}

impl<'a> TrialSource<'a> {
    pub fn new(s: &'a Scenario) -> Result<Self> {
        let fs = s.record.sample_rate;
        let nominal_phi = synth_ap_waveform(&s.template, fs)?;
        let nominal_field = ap_field_from_voltage(&nominal_phi, &s.axon)?;
        let which = if s.record.trigger_gain > 0.0 {
            Extremum::Max
        } else {
            Extremum::Min
        };
        let reference = trigger_index(&trigger_trace(s, &nominal_phi)?, which).unwrap_or(0);
        Ok(Self {
            s,
            calibration: s.chain.calibration()?,
            nominal_phi,
            nominal_field,
            reference,
            which,
        })
    }

    pub fn calibration(&self) -> f64 {
        self.calibration
    }

    pub fn nominal_field(&self) -> &Trace {
        &self.nominal_field
    }

    pub fn nominal_phi(&self) -> &Trace {
        &self.nominal_phi
    }

    /// Source field and electrode trace of trial `i`.
    pub fn source(&self, i: usize) -> Result<(Trace, Trace)> {
        let s = self.s;
        if s.alignment == Alignment::Stimulus || s.record.trigger_jitter == 0.0 {
            return Ok((
                self.nominal_field.clone(),
                trigger_trace(s, &self.nominal_phi)?,
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(s.seed ^ JITTER_SALT);
        rng.set_stream(i as u64);
        let j = s.record.trigger_jitter;
        let shift: f64 = rng.random_range(-j..=j);
        let template = s
            .template
            .with_timing(s.record.latency + shift, s.record.length);
        let phi = synth_ap_waveform(&template, s.record.sample_rate)?;
        let field = ap_field_from_voltage(&phi, &s.axon)?;
        Ok((field, trigger_trace(s, &phi)?))
    }

    /// Calibrated, aligned trial `i`; `None` when its trigger is unusable.
    pub fn trial(&self, i: usize) -> Result<Option<Trace>> {
        let (field, trigger) = self.source(i)?;
        let volts = self
            .s
            .chain
            .synthesize_trial(&field, self.s.seed, i as u64)?;
        let tesla = volts_to_field(&volts, self.calibration)?;
        match self.s.alignment {
            Alignment::Stimulus => Ok(Some(tesla)),
            Alignment::Trigger => {
                let trigger = nvmag::sensor::resample(&trigger, self.s.chain.sample_rate)?;
                Ok(align_to(
                    &tesla,
                    &trigger,
                    self.reference.min(tesla.len() - 1),
                    self.which,
                )?)
            }
        }
    }

    /// Average of the usable trials in `range` and the number rejected.
    /// Trials are generated in parallel but summed in index order, so the
    /// result is independent of thread count.
    pub fn average(&self, range: Range<usize>) -> Result<(Trace, usize)> {
        let indices: Vec<usize> = range.collect();
        let mut acc: Option<Vec<f64>> = None;
        let mut used = 0usize;
        let mut rejected = 0usize;
        let mut template = None;
        for chunk in indices.chunks(CHUNK) {
            let trials: Vec<Option<Trace>> = chunk
                .par_iter()
                .map(|&i| self.trial(i))
                .collect::<Result<_>>()?;
            for t in trials {
                let Some(t) = t else {
                    rejected += 1;
                    continue;
                };
                let sum = acc.get_or_insert_with(|| vec![0.0; t.len()]);
                for (a, x) in sum.iter_mut().zip(t.samples()) {
                    *a += x;
                }
                used += 1;
                template.get_or_insert(t);
            }
        }
        let (Some(sum), Some(template)) = (acc, template) else {
            return Err(nvmag::Error::Empty("no usable trials".into()).into());
        };
        let n = used as f64;
        Ok((
            template.with_samples(sum.into_iter().map(|x| x / n).collect(), Unit::Tesla)?,
            rejected,
        ))
    }
}

fn trigger_trace(s: &Scenario, phi: &Trace) -> Result<Trace> {
    let rest = s.template.resting_potential;
    let g = s.record.trigger_gain;
    Ok(phi.map(Unit::Volts, |v| g * (v - rest))?)
}

pub(crate) fn comb(s: &Scenario) -> CombFilter {
    CombFilter {
        extra_notches: s.analysis.extra_notches.clone(),
        ..CombFilter::default()
    }
}

fn post_filter(s: &Scenario, trace: &Trace) -> Result<Trace> {
    if s.analysis.comb {
        Ok(comb(s).apply(trace)?)
    } else {
        Ok(trace.clone())
    }
}

pub(crate) fn windows(s: &Scenario) -> ((f64, f64), (f64, f64)) {
    let r = &s.record;
    (
        (r.signal_window[0], r.signal_window[1]),
        (r.quiet_window[0], r.quiet_window[1]),
    )
}

/// SNR of a matched-filter output; the causal filter delays the response by
/// up to one template length.
pub fn matched_snr(
    s: &Scenario,
    trace: &Trace,
    template: &MatchedTemplate,
    n_avg: usize,
) -> Result<SnrReport<f64>> {
    let filtered = matched_filter(trace, template)?;
    let (sig, quiet) = windows(s);
    let delayed = (sig.0, (sig.1 + template.window()).min(quiet.0));
    Ok(snr(&filtered, delayed, quiet, n_avg)?)
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len()) as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    sab / (saa * sbb).sqrt()
}

pub fn run_scenario(s: &Scenario) -> Result<Bundle> {
    let src = TrialSource::new(s)?;
    let (sig, quiet) = windows(s);
    let measured = src.trial(0)?.unwrap_or_else(|| src.nominal_field().clone());

    let a = &s.analysis;
    let mut sets = Vec::new();
    let mut rejected = 0;
    if a.template_traces > 0 {
        let size = a.template_traces / a.template_sets;
        for k in 0..a.template_sets {
            let (avg, rej) = src.average(k * size..(k + 1) * size)?;
            rejected += rej;
            sets.push(avg);
        }
    }
    let set_size = a.template_traces.checked_div(a.template_sets).unwrap_or(0);
    let averaged = if !sets.is_empty() && set_size == s.n_avg {
        sets[0].clone()
    } else {
        let (avg, rej) = src.average(0..s.n_avg)?;
        rejected += rej;
        avg
    };
    let filtered = post_filter(s, &averaged)?;
    let report = snr(&filtered, sig, quiet, s.n_avg)?;

    let template = if sets.is_empty() {
        None
    } else {
        let template = build_template(&sets, a.template_window)?;
        let set_snr = sets
            .iter()
            .map(|set| Ok(matched_snr(s, &post_filter(s, set)?, &template, set_size)?.snr_avg))
            .collect::<Result<Vec<_>>>()?;
        let clean_chain = s.chain.without_noise();
        let clean = volts_to_field(
            &clean_chain.synthesize(src.nominal_field(), s.seed)?,
            src.calibration(),
        )?;
        let clean = nvmag::analysis::spectral::highpass(
            &clean,
            nvmag::analysis::template::TEMPLATE_HIGHPASS,
        )?;
        let start = template.offset();
        let segment = &clean.samples()[start..start + template.samples().len()];
        let correlation = pearson(&template.forward(), segment);
        Some(TemplateOutcome {
            template,
            set_size,
            set_snr,
            correlation,
        })
    };

    Ok(Bundle {
        true_field: src.nominal_field().clone(),
        measured,
        averaged,
        filtered,
        snr: report,
        calibration: src.calibration(),
        rejected,
        template,
    })
}
