//! Scenario files: TOML with one table per subsystem. Unknown keys are
//! rejected so typos surface as configuration errors.

use serde::{Deserialize, Serialize};

use nvmag::geometry::{BiasField, NvAxes, SensingGeometry};
use nvmag::neuro::Direction;
use nvmag::odmr::optimal_deviation;
use nvmag::sensor::{Digitizer, Penalties, SlopeSign};
use nvmag::{ApTemplate, AxonParams, LockInConfig, NoiseBudget, OdmrParams, SensorChain};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Species {
    #[default]
    Worm,
    Squid,
    Mammal,
}

impl Species {
    /// Highest stimulation rate at which the preparation responds reliably, Hz.
    pub fn max_stim_rate(self) -> f64 {
        match self {
            Species::Worm => 1.0,
            Species::Squid => 300.0,
            Species::Mammal => 1000.0,
        }
    }
}

/// How trials are registered before averaging.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Alignment {
    /// Acquisition is locked to the stimulus pulse.
    #[default]
    Stimulus,
    /// Each trial is shifted onto the extremum of an electrode trace.
    Trigger,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DirectionTag {
    #[default]
    Anterograde,
    Retrograde,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NoiseSourceTag {
    /// Fixed white level `density`.
    #[default]
    Measured,
    /// Level from the full analytic budget.
    Budget,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxonSection {
    pub r_a: f64,
    pub rho: f64,
    pub sigma: f64,
    pub v_c: f64,
    #[serde(default)]
    pub direction: DirectionTag,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TemplateSection {
    pub resting_potential: f64,
    pub peak_amplitude: f64,
    pub rise_time: f64,
    pub fall_time: f64,
    #[serde(default)]
    pub undershoot_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OdmrSection {
    pub linewidth_hz: f64,
    pub contrast_per_axis: f64,
    pub bias_per_axis_tesla: f64,
    pub v0: f64,
    pub hyperfine_hz: f64,
    pub negative_slope: bool,
    pub phase_deg: f64,
}

impl Default for OdmrSection {
    fn default() -> Self {
        Self {
            linewidth_hz: 1.5e6,
            contrast_per_axis: 0.0265,
            bias_per_axis_tesla: 7e-4,
            v0: 0.4,
            hyperfine_hz: 2.16e6,
            negative_slope: false,
            phase_deg: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LockInSection {
    pub f_mod: f64,
    pub tau: f64,
    pub stages: usize,
    pub gain: f64,
    pub expand: f64,
    /// Measured noise bandwidth the cascade is rescaled to; 0 disables.
    pub enbw_measured: f64,
    /// Output low-pass, Hz; 0 disables.
    pub output_lowpass: f64,
    pub digitizer_bits: u32,
    pub digitizer_full_scale: f64,
}

impl Default for LockInSection {
    fn default() -> Self {
        let l = LockInConfig::default();
        let d = Digitizer::<f64>::default();
        Self {
            f_mod: l.f_mod,
            tau: l.tau_lia,
            stages: l.rolloff_stages,
            gain: l.gain,
            expand: l.expand,
            enbw_measured: l.f_enbw_measured.unwrap_or(0.0),
            output_lowpass: l.output_lowpass.unwrap_or(0.0),
            digitizer_bits: d.bits,
            digitizer_full_scale: d.full_scale,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseSection {
    pub enabled: bool,
    pub source: NoiseSourceTag,
    /// T/√Hz.
    pub density: f64,
    pub v_sig: f64,
    pub r_load: f64,
}

impl Default for NoiseSection {
    fn default() -> Self {
        Self {
            enabled: true,
            source: NoiseSourceTag::Measured,
            density: 15e-12,
            v_sig: 0.4,
            r_load: 50.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RecordSection {
    pub sample_rate: f64,
    /// Length of one trial, s.
    pub length: f64,
    /// Stimulus-to-AP delay, s.
    pub latency: f64,
    pub signal_window: [f64; 2],
    pub quiet_window: [f64; 2],
    /// Uniform AP timing jitter ±, s (trigger alignment only).
    pub trigger_jitter: f64,
    /// Electrode trace gain, V per V of intracellular excursion.
    pub trigger_gain: f64,
}

impl Default for RecordSection {
    fn default() -> Self {
        Self {
            sample_rate: 250e3,
            length: 0.25,
            latency: 0.1,
            signal_window: [0.099, 0.105],
            quiet_window: [0.15, 0.24],
            trigger_jitter: 0.0,
            trigger_gain: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisSection {
    pub comb: bool,
    pub extra_notches: Vec<f64>,
    pub template_window: f64,
    /// Trials pooled into the matched-filter template; 0 skips the template.
    pub template_traces: usize,
    /// Number of equal sets the pooled trials are split into and filtered.
    pub template_sets: usize,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        Self {
            comb: true,
            extra_notches: Vec::new(),
            template_window: 1.4e-3,
            template_traces: 0,
            template_sets: 4,
        }
    }
}

/// On-disk scenario description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    #[serde(default)]
    pub species: Species,
    pub seed: u64,
    pub n_avg: usize,
    pub f_stim: f64,
    #[serde(default)]
    pub alignment: Alignment,
    pub axon: AxonSection,
    pub template: TemplateSection,
    #[serde(default)]
    pub odmr: OdmrSection,
    #[serde(default)]
    pub lockin: LockInSection,
    #[serde(default)]
    pub noise: NoiseSection,
    #[serde(default)]
    pub record: RecordSection,
    #[serde(default)]
    pub analysis: AnalysisSection,
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before
        .rfind('\n')
        .map_or(before.len(), |i| before.len() - i - 1)
        + 1;
    (line, column)
}

impl ScenarioConfig {
    pub fn from_toml(text: &str, source_name: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let (line, column) = e.span().map_or((0, 0), |s| line_col(text, s.start));
            CliError::Parse {
                source_name: source_name.to_string(),
                line,
                column,
                message: e.message().to_string(),
            }
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("scenario config always serialises")
    }
}

/// Validated scenario with model types resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub species: Species,
    pub axon: AxonParams,
    pub template: ApTemplate,
    pub odmr: OdmrParams,
    pub lockin: LockInConfig,
    pub noise: NoiseBudget,
    pub chain: SensorChain,
    pub n_avg: usize,
    pub f_stim: f64,
    pub seed: u64,
    pub alignment: Alignment,
    pub record: RecordSection,
    pub analysis: AnalysisSection,
}

impl Scenario {
    pub fn from_config(cfg: &ScenarioConfig) -> Result<Self> {
        let invalid = |message: String| CliError::Invalid {
            scenario: cfg.name.clone(),
            message,
        };
        let model = |e: nvmag::Error| invalid(e.to_string());

        if cfg.n_avg < 1 {
            return Err(invalid("n_avg must be at least 1".into()));
        }
        let limit = cfg.species.max_stim_rate();
        if !(cfg.f_stim > 0.0 && cfg.f_stim <= limit) {
            return Err(invalid(format!(
                "f_stim = {} Hz outside (0, {limit}] Hz for {:?}",
                cfg.f_stim, cfg.species
            )));
        }
        let a = &cfg.axon;
        let axon = AxonParams {
            r_a: a.r_a,
            rho: a.rho,
            sigma: a.sigma,
            v_c: a.v_c,
            direction: match a.direction {
                DirectionTag::Anterograde => Direction::Anterograde,
                DirectionTag::Retrograde => Direction::Retrograde,
            },
        };
        axon.validate().map_err(model)?;

        let r = &cfg.record;
        if !(r.length > 0.0 && r.latency >= 0.0 && r.latency < r.length) {
            return Err(invalid("record latency must lie inside the record".into()));
        }
        for (name, w) in [
            ("signal_window", r.signal_window),
            ("quiet_window", r.quiet_window),
        ] {
            if !(w[0] >= 0.0 && w[1] > w[0] && w[1] <= r.length) {
                return Err(invalid(format!(
                    "{name} must be ordered and inside the record"
                )));
            }
        }
        if !(r.trigger_jitter >= 0.0 && r.trigger_jitter < r.latency) {
            return Err(invalid(
                "trigger jitter must be non-negative and below the latency".into(),
            ));
        }
        if r.trigger_gain == 0.0 || !r.trigger_gain.is_finite() {
            return Err(invalid("trigger gain must be finite and non-zero".into()));
        }

        let t = &cfg.template;
        let template = ApTemplate {
            resting_potential: t.resting_potential,
            peak_amplitude: t.peak_amplitude,
            rise_time: t.rise_time,
            fall_time: t.fall_time,
            undershoot_fraction: t.undershoot_fraction,
            duration: r.length,
            onset: r.latency,
        };
        template.validate().map_err(model)?;

        let o = &cfg.odmr;
        let bias_field = BiasField::equal_projection(o.bias_per_axis_tesla).map_err(model)?;
        let geometry =
            SensingGeometry::new(NvAxes::lab_frame(), bias_field, [0, 1]).map_err(model)?;
        let omega0 = nvmag::geometry::zeeman_resonance(
            o.bias_per_axis_tesla,
            nvmag::geometry::SpinBranch::Plus,
        )
        .map_err(model)?;
        let gamma = std::f64::consts::TAU * o.linewidth_hz;
        let odmr = OdmrParams {
            omega0,
            gamma,
            contrast: o.contrast_per_axis,
            f0: 1.0,
            delta_hf: std::f64::consts::TAU * o.hyperfine_hz,
            omega_dev: optimal_deviation(gamma),
            v0: o.v0,
        };
        odmr.validate().map_err(model)?;

        let l = &cfg.lockin;
        let positive_or_none = |x: f64| (x > 0.0).then_some(x);
        let lockin = LockInConfig {
            f_mod: l.f_mod,
            tau_lia: l.tau,
            rolloff_stages: l.stages,
            gain: l.gain,
            expand: l.expand,
            f_enbw_measured: positive_or_none(l.enbw_measured),
            output_lowpass: positive_or_none(l.output_lowpass),
        };
        lockin.validate().map_err(model)?;
        let digitizer = Digitizer {
            full_scale: l.digitizer_full_scale,
            bits: l.digitizer_bits,
        };
        digitizer.validate().map_err(model)?;

        let n = &cfg.noise;
        let penalties = Penalties {
            p_mod: nvmag::sensor::modulation_penalty(l.f_mod).map_err(model)?,
            ..Penalties::default()
        };
        let noise = NoiseBudget::new(n.v_sig, n.r_load, penalties).map_err(model)?;

        let mut chain = SensorChain {
            odmr,
            geometry,
            lockin,
            digitizer: Some(digitizer),
            slope_sign: if o.negative_slope {
                SlopeSign::Negative
            } else {
                SlopeSign::Positive
            },
            phase_deg: o.phase_deg,
            noise_density: n.density,
            sample_rate: r.sample_rate,
            ..SensorChain::default()
        };
        if n.source == NoiseSourceTag::Budget {
            chain = chain.with_budget_noise(&noise).map_err(model)?;
        }
        if !n.enabled {
            chain = chain.without_noise();
        }
        chain.validate().map_err(model)?;

        let an = &cfg.analysis;
        if an.template_traces > 0 {
            if an.template_sets == 0 || !an.template_traces.is_multiple_of(an.template_sets) {
                return Err(invalid(
                    "template_traces must split evenly into template_sets".into(),
                ));
            }
            if !(an.template_window > 0.0 && an.template_window < r.length) {
                return Err(invalid(
                    "template window must be positive and shorter than the record".into(),
                ));
            }
        }

        Ok(Self {
            name: cfg.name.clone(),
            species: cfg.species,
            axon,
            template,
            odmr,
            lockin,
            noise,
            chain,
            n_avg: cfg.n_avg,
            f_stim: cfg.f_stim,
            seed: cfg.seed,
            alignment: cfg.alignment,
            record: cfg.record.clone(),
            analysis: cfg.analysis.clone(),
        })
    }

    pub fn from_toml(text: &str, source_name: &str) -> Result<Self> {
        Self::from_config(&ScenarioConfig::from_toml(text, source_name)?)
    }
}

fn axon_section(p: &AxonParams) -> AxonSection {
    AxonSection {
        r_a: p.r_a,
        rho: p.rho,
        sigma: p.sigma,
        v_c: p.v_c,
        direction: match p.direction {
            Direction::Anterograde => DirectionTag::Anterograde,
            Direction::Retrograde => DirectionTag::Retrograde,
        },
    }
}

fn template_section(t: &ApTemplate) -> TemplateSection {
    TemplateSection {
        resting_potential: t.resting_potential,
        peak_amplitude: t.peak_amplitude,
        rise_time: t.rise_time,
        fall_time: t.fall_time,
        undershoot_fraction: t.undershoot_fraction,
    }
}

pub const BUILTIN_NAMES: [&str; 4] = [
    "worm_excised",
    "worm_whole",
    "purkinje_r2um",
    "squid_excised",
];

pub fn builtin(name: &str) -> Result<ScenarioConfig> {
    let base = |name: &str, axon: AxonParams, template: ApTemplate| ScenarioConfig {
        name: name.to_string(),
        species: Species::Worm,
        seed: 20_160_707,
        n_avg: 150,
        f_stim: 0.4,
        alignment: Alignment::Stimulus,
        axon: axon_section(&axon),
        template: template_section(&template),
        odmr: OdmrSection::default(),
        lockin: LockInSection::default(),
        noise: NoiseSection::default(),
        record: RecordSection::default(),
        analysis: AnalysisSection::default(),
    };
    let cfg = match name {
        "worm_excised" => ScenarioConfig {
            analysis: AnalysisSection {
                template_traces: 600,
                ..AnalysisSection::default()
            },
            ..base(name, AxonParams::worm_excised(), ApTemplate::worm())
        },
        "worm_whole" => ScenarioConfig {
            n_avg: 600,
            alignment: Alignment::Trigger,
            record: RecordSection {
                trigger_jitter: 0.5e-3,
                ..RecordSection::default()
            },
            ..base(name, AxonParams::worm_whole(), ApTemplate::worm())
        },
        "purkinje_r2um" => ScenarioConfig {
            species: Species::Mammal,
            n_avg: 1000,
            f_stim: 10.0,
            ..base(name, AxonParams::purkinje(2e-6), ApTemplate::purkinje())
        },
        "squid_excised" => ScenarioConfig {
            species: Species::Squid,
            f_stim: 10.0,
            ..base(name, AxonParams::squid(), ApTemplate::squid())
        },
        other => {
            return Err(CliError::UnknownBuiltin(
                other.to_string(),
                BUILTIN_NAMES.join(", "),
            ));
        }
    };
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_round_trip_through_toml() {
        for name in BUILTIN_NAMES {
            let cfg = builtin(name).unwrap();
            let text = cfg.to_toml();
            let back = ScenarioConfig::from_toml(&text, name).unwrap();
            assert_eq!(back, cfg);
            Scenario::from_config(&cfg).unwrap();
        }
        assert!(matches!(
            builtin("zebrafish"),
            Err(CliError::UnknownBuiltin(..))
        ));
    }

    #[test]
    fn parse_errors_report_position() {
        let mut text = builtin("worm_excised").unwrap().to_toml();
        text.push_str("\n[axon2]\nbogus = 1\n");
        match ScenarioConfig::from_toml(&text, "s.toml") {
            Err(CliError::Parse { line, .. }) => assert!(line > 1),
            other => panic!("{other:?}"),
        }
        let e = ScenarioConfig::from_toml("name = 3", "s.toml").unwrap_err();
        assert_eq!(e.exit_code(), crate::error::EXIT_CONFIG);
    }

    #[test]
    fn species_stimulation_limits() {
        let mut cfg = builtin("worm_excised").unwrap();
        cfg.f_stim = 5.0;
        assert!(Scenario::from_config(&cfg).is_err());
        let mut squid = builtin("squid_excised").unwrap();
        squid.f_stim = 300.0;
        assert!(Scenario::from_config(&squid).is_ok());
        squid.f_stim = 301.0;
        assert!(Scenario::from_config(&squid).is_err());
        cfg.f_stim = 0.4;
        cfg.n_avg = 0;
        assert!(Scenario::from_config(&cfg).is_err());
    }
}
