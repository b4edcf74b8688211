//! Baseband model of the lock-in output filter: identical one-pole stages in
//! cascade, an optional brick-wall output low-pass, and the derived cutoff and
//! noise bandwidth.

use crate::analysis::spectral;
use crate::error::{domain, Result};
use crate::optimize::bisect;
use crate::trace::TimeTrace;
use crate::{Real, Unit};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LockInConfig<T> {
    /// Modulation frequency, Hz.
    pub f_mod: T,
    /// Nominal per-stage time constant, s.
    pub tau_lia: T,
    /// 1 → 6 dB/oct, 4 → 24 dB/oct.
    pub rolloff_stages: usize,
    /// Output gain, V/V.
    pub gain: T,
    /// Output expand factor applied ahead of the digitiser.
    pub expand: T,
    /// When set, the per-stage time constant is rescaled so the discrete
    /// cascade has exactly this equivalent noise bandwidth.
    pub f_enbw_measured: Option<T>,
    /// Brick-wall low-pass applied to the recorded output, Hz.
    pub output_lowpass: Option<T>,
}

impl<T: Real> LockInConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.f_mod > T::zero() && self.f_mod.is_finite()) {
            return Err(domain("modulation frequency must be positive"));
        }
        if !(self.tau_lia > T::zero() && self.tau_lia.is_finite()) {
            return Err(domain("lock-in time constant must be positive"));
        }
        if !(1..=4).contains(&self.rolloff_stages) {
            return Err(domain("roll-off stages must be 1, 2, 3 or 4"));
        }
        if !(self.gain.is_finite() && self.gain != T::zero()) {
            return Err(domain("lock-in gain must be finite and non-zero"));
        }
        if !(self.expand >= T::one() && self.expand.is_finite()) {
            return Err(domain("expand factor must be at least 1"));
        }
        if let Some(f) = self.f_enbw_measured {
            if !(f > T::zero() && f.is_finite()) {
                return Err(domain("measured ENBW must be positive"));
            }
        }
        if let Some(f) = self.output_lowpass {
            if !(f > T::zero()) {
                return Err(domain("output low-pass cutoff must be positive"));
            }
        }
        Ok(())
    }

    /// A bare cascade: no ENBW override, no output low-pass.
    pub fn cascade(tau: T, stages: usize) -> Self {
        Self {
            tau_lia: tau,
            rolloff_stages: stages,
            f_enbw_measured: None,
            output_lowpass: None,
            ..Self::default()
        }
    }
}

impl<T: Real> Default for LockInConfig<T> {
    /// 18 kHz modulation, 30 μs × 4 stages, ENBW pinned to the measured
    /// 4.0 kHz, ×5 expand, 45 kHz display low-pass.
    fn default() -> Self {
        Self {
            f_mod: T::lit(18e3),
            tau_lia: T::lit(30e-6),
            rolloff_stages: 4,
            gain: T::lit(5e4),
            expand: T::lit(5.0),
            f_enbw_measured: Some(T::lit(4.0e3)),
            output_lowpass: Some(T::lit(45e3)),
        }
    }
}

/// Bandwidth figures of a cascade at a given sample rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CascadeResponse<T> {
    pub stages: usize,
    /// Per-stage time constant actually used (after any ENBW rescale).
    pub tau_effective: T,
    /// Continuous-time 3 dB cutoff for `tau_effective`, Hz.
    pub f_c_analytic: T,
    /// Continuous-time ENBW for `tau_effective`, Hz.
    pub enbw_analytic: T,
    /// 3 dB cutoff of the sampled filter, Hz.
    pub f_c: T,
    /// ENBW of the sampled filter, Hz.
    pub enbw: T,
}

/// `∫₀^∞ (1 + x²)^{-n} dx`.
fn cascade_integral<T: Real>(n: usize) -> T {
    let mut i = T::FRAC_PI_2();
    for k in 1..n {
        let k = T::from_usize_lossy(k);
        i = i * (T::lit(2.0) * k - T::one()) / (T::lit(2.0) * k);
    }
    i
}

pub fn analytic_cutoff<T: Real>(tau: T, stages: usize) -> T {
    let n = T::from_usize_lossy(stages);
    (T::lit(2.0).powf(T::one() / n) - T::one()).sqrt() / (T::TAU() * tau)
}

pub fn analytic_enbw<T: Real>(tau: T, stages: usize) -> T {
    cascade_integral::<T>(stages) / (T::TAU() * tau)
}

#[inline]
fn stage_alpha<T: Real>(tau: T, sample_rate: T) -> T {
    T::one() - (-(T::one() / (sample_rate * tau))).exp()
}

/// Power response |H(f)|² of the sampled cascade.
fn discrete_power_response<T: Real>(f: T, alpha: T, stages: usize, sample_rate: T) -> T {
    let beta = T::one() - alpha;
    let w = T::TAU() * f / sample_rate;
    let one = alpha * alpha / (T::one() - T::lit(2.0) * beta * w.cos() + beta * beta);
    one.powi(stages as i32)
}

/// ENBW of the sampled cascade from its impulse-response energy,
/// `(fs/2)·Σh²`. Falls back to the continuous form when τ spans so many
/// samples that the two coincide.
fn discrete_enbw<T: Real>(tau: T, stages: usize, sample_rate: T) -> T {
    let span = (tau * sample_rate).to_f64_lossy();
    if span > 1e4 {
        return analytic_enbw(tau, stages);
    }
    let alpha = stage_alpha(tau, sample_rate);
    let mut state = vec![T::zero(); stages];
    let mut energy = T::zero();
    let min_len = ((span * stages as f64 * 4.0).ceil() as usize).max(16);
    let mut k = 0usize;
    loop {
        let mut x = if k == 0 { T::one() } else { T::zero() };
        for s in state.iter_mut() {
            *s += alpha * (x - *s);
            x = *s;
        }
        let term = x * x;
        energy += term;
        k += 1;
        if k > min_len && term <= energy * T::epsilon() * T::lit(1e-2) {
            break;
        }
        if k > 50_000_000 {
            break;
        }
    }
    energy * sample_rate / T::lit(2.0)
}

fn discrete_cutoff<T: Real>(tau: T, stages: usize, sample_rate: T) -> T {
    let alpha = stage_alpha(tau, sample_rate);
    let nyq = sample_rate / T::lit(2.0);
    let half = T::lit(0.5);
    if discrete_power_response(nyq, alpha, stages, sample_rate) >= half {
        return nyq;
    }
    bisect(
        |f| discrete_power_response(f, alpha, stages, sample_rate) - half,
        T::zero(),
        nyq,
        nyq * T::lit(1e-12),
    )
    .unwrap_or(nyq)
}

/// Bandwidth figures for `cfg` sampled at `sample_rate`, including the τ
/// rescale implied by `f_enbw_measured`.
pub fn cascade_response<T: Real>(
    cfg: &LockInConfig<T>,
    sample_rate: T,
) -> Result<CascadeResponse<T>> {
    cfg.validate()?;
    if !(sample_rate > T::zero() && sample_rate.is_finite()) {
        return Err(domain("sample rate must be positive"));
    }
    let n = cfg.rolloff_stages;
    let tau = match cfg.f_enbw_measured {
        None => cfg.tau_lia,
        Some(target) => {
            if target >= sample_rate / T::lit(2.0) * T::lit(0.999) {
                return Err(domain("measured ENBW is not below the Nyquist frequency"));
            }
            // ENBW falls monotonically with τ; bracket generously around nominal.
            let lo = cfg.tau_lia * T::lit(1e-4);
            let hi = cfg.tau_lia * T::lit(1e4);
            bisect(
                |tau| (discrete_enbw(tau, n, sample_rate) / target).ln(),
                lo,
                hi,
                cfg.tau_lia * T::lit(1e-10),
            )
            .ok_or_else(|| domain("measured ENBW cannot be reached by rescaling τ"))?
        }
    };
    Ok(CascadeResponse {
        stages: n,
        tau_effective: tau,
        f_c_analytic: analytic_cutoff(tau, n),
        enbw_analytic: analytic_enbw(tau, n),
        f_c: discrete_cutoff(tau, n, sample_rate),
        enbw: discrete_enbw(tau, n, sample_rate),
    })
}

/// Filtered trace plus the response that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Filtered<T> {
    pub trace: TimeTrace<T>,
    pub response: CascadeResponse<T>,
}

/// Runs the cascade (filter starts at rest) and the optional output
/// low-pass.
pub fn filter_cascade<T: Real>(trace: &TimeTrace<T>, cfg: &LockInConfig<T>) -> Result<Filtered<T>> {
    if !matches!(trace.unit(), Unit::Volts | Unit::Tesla) {
        return Err(crate::Error::UnitMismatch {
            expected: Unit::Volts,
            found: trace.unit(),
        });
    }
    let fs = trace.sample_rate();
    let response = cascade_response(cfg, fs)?;
    let alpha = stage_alpha(response.tau_effective, fs);
    let mut state = vec![T::zero(); response.stages];
    let out: Vec<T> = trace
        .samples()
        .iter()
        .map(|&x| {
            let mut x = x;
            for s in state.iter_mut() {
                *s += alpha * (x - *s);
                x = *s;
            }
            x
        })
        .collect();
    let mut filtered = trace.with_samples(out, trace.unit())?;
    if let Some(fc) = cfg.output_lowpass {
        if fc < fs / T::lit(2.0) {
            filtered = spectral::lowpass(&filtered, fc)?;
        }
    }
    Ok(Filtered {
        trace: filtered,
        response,
    })
}

/// 10–90 % rise time of a record containing one upward transition from
/// `low` to `high`, linearly interpolated between samples.
pub fn rise_time_10_90<T: Real>(samples: &[T], dt: T, low: T, high: T) -> Option<T> {
    let span = high - low;
    let crossing = |level: T| -> Option<T> {
        let target = low + level * span;
        samples.windows(2).enumerate().find_map(|(i, w)| {
            (w[0] < target && w[1] >= target).then(|| {
                let frac = (target - w[0]) / (w[1] - w[0]);
                (T::from_usize_lossy(i) + frac) * dt
            })
        })
    };
    let t10 = crossing(T::lit(0.1))?;
    let t90 = crossing(T::lit(0.9))?;
    (t90 > t10).then(|| t90 - t10)
}

#[cfg(test)]
mod tests {
    use super::*;

    const FS: f64 = 250e3;

    #[test]
    fn single_stage_closed_forms() {
        let tau = 10e-6;
        assert!((analytic_cutoff(tau, 1) - 1.0 / (std::f64::consts::TAU * tau)).abs() < 1e-9);
        assert!((analytic_enbw(tau, 1) - 1.0 / (4.0 * tau)).abs() < 1e-9);
        // discrete one-pole: Σh² = α/(2 − α)
        let a = stage_alpha(tau, FS);
        let expected = a / (2.0 - a) * FS / 2.0;
        assert!((discrete_enbw(tau, 1, FS) - expected).abs() / expected < 1e-12);
    }

    #[test]
    fn discrete_tends_to_continuous_when_oversampled() {
        let tau = 30e-6f64;
        let fs = 1e8;
        for n in 1..=4 {
            let d = discrete_enbw(tau, n, fs);
            let c = analytic_enbw(tau, n);
            assert!((d - c).abs() / c < 1e-3, "n={n}");
            let fd = discrete_cutoff(tau, n, fs);
            let fc = analytic_cutoff(tau, n);
            assert!((fd - fc).abs() / fc < 1e-3);
        }
    }

    #[test]
    fn enbw_override_hits_target() {
        let cfg = LockInConfig::<f64> {
            output_lowpass: None,
            ..Default::default()
        };
        let r = cascade_response(&cfg, FS).unwrap();
        assert!((r.enbw - 4.0e3).abs() < 1e-3);
        assert!(r.tau_effective < 30e-6);
        let bare = cascade_response(&LockInConfig::cascade(30e-6, 4), FS).unwrap();
        assert_eq!(bare.tau_effective, 30e-6);
    }

    #[test]
    fn dc_gain_is_unity() {
        let cfg = LockInConfig::<f64>::cascade(30e-6, 4);
        let t = TimeTrace::new(FS, vec![2.5; 5000], Unit::Volts).unwrap();
        let out = filter_cascade(&t, &cfg).unwrap().trace;
        assert!((out.samples()[4999] - 2.5).abs() < 1e-12);
    }

    #[test]
    fn one_stage_rise_time_is_2_2_tau() {
        let tau = 10e-6;
        let fs = 1e8;
        let cfg = LockInConfig::<f64>::cascade(tau, 1);
        let n = 20_000;
        let t =
            TimeTrace::from_fn(fs, n, Unit::Volts, |t| if t >= 1e-5 { 1.0 } else { 0.0 }).unwrap();
        let out = filter_cascade(&t, &cfg).unwrap().trace;
        let rise = rise_time_10_90(out.samples(), 1.0 / fs, 0.0, 1.0).unwrap();
        assert!((rise / tau - 9f64.ln()).abs() < 1e-3);
    }

    #[test]
    fn rejects_bad_config_and_units() {
        let cfg = LockInConfig::<f64> {
            rolloff_stages: 5,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
        let t = TimeTrace::new(FS, vec![0.0; 10], Unit::VoltsIntracellular).unwrap();
        assert!(filter_cascade(&t, &LockInConfig::default()).is_err());
    }
}
