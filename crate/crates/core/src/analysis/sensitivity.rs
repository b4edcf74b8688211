//! The three sensitivity estimators.
//!
//! η is normalised so that white noise of level η, observed through a filter
//! of noise bandwidth f_E, has RMS η·√(2f_E). All three estimators agree on
//! that convention:
//!
//! * η₁ projects each trial onto the known test tone and compares the spread
//!   of the projections with their mean.
//! * η₂ reads the spectral noise floor in a band, calibrated by the test tone
//!   bin.
//! * η₃ divides the RMS of test-free records by √(2f_E).

use crate::analysis::spectral::spectrum;
use crate::error::{domain, Error, Result};
use crate::scalar::abs;
use crate::sensor::BudgetChain;
use crate::trace::{mean, TimeTrace};
use crate::{Real, Unit};

/// Analytic figures attached to a measured report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoreticalBudget<T> {
    pub chain: BudgetChain<T>,
    pub spin_projection: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensitivityReport<T> {
    pub eta1: Option<T>,
    pub eta2: Option<T>,
    pub eta3: Option<T>,
    pub n_trials: usize,
    pub t_trial: T,
    pub band: (T, T),
    pub theoretical: Option<TheoreticalBudget<T>>,
}

fn check_trials<T: Real>(traces: &[TimeTrace<T>], min: usize) -> Result<(usize, T)> {
    if traces.len() < min {
        return Err(Error::TooShort {
            needed: min,
            got: traces.len(),
        });
    }
    let n = traces[0].len();
    let fs = traces[0].sample_rate();
    for (i, t) in traces.iter().enumerate() {
        t.expect_unit(Unit::Tesla)?;
        if t.len() != n || t.sample_rate() != fs {
            return Err(domain(format!(
                "trial {i} differs in length or sample rate"
            )));
        }
    }
    if n < 2 {
        return Err(Error::TooShort { needed: 2, got: n });
    }
    Ok((n, fs))
}

/// η₁ from test-tone projections `x_i = (1/T)∫B_meas(t)·B_test(t)dt` with
/// `B_test = b_test·sin(2πf_test·t)`: `η₁ = B_rms·std(x)·√T/mean(x)`.
pub fn sensitivity_method1<T: Real>(traces: &[TimeTrace<T>], b_test: T, f_test: T) -> Result<T> {
    let (n, fs) = check_trials(traces, 2)?;
    if !(b_test > T::zero() && f_test > T::zero()) {
        return Err(domain("test amplitude and frequency must be positive"));
    }
    let t_trial = T::from_usize_lossy(n) / fs;
    let w = T::TAU() * f_test / fs;
    let reference: Vec<T> = (0..n)
        .map(|k| b_test * (w * T::from_usize_lossy(k)).sin())
        .collect();
    let x: Vec<T> = traces
        .iter()
        .map(|t| {
            let s = t
                .samples()
                .iter()
                .zip(&reference)
                .fold(T::zero(), |a, (&b, &r)| a + b * r);
            s / T::from_usize_lossy(n)
        })
        .collect();
    let mu = mean(&x);
    let b_rms = b_test * T::FRAC_1_SQRT_2();
    if !(abs(mu) > T::lit(1e-3) * b_rms * b_rms) {
        return Err(Error::NoSignal(
            "test tone not present in the trials".into(),
        ));
    }
    let m = T::from_usize_lossy(x.len());
    let var = x.iter().fold(T::zero(), |a, &v| a + (v - mu) * (v - mu)) / (m - T::one());
    Ok(b_rms * var.sqrt() * t_trial.sqrt() / abs(mu))
}

fn is_harmonic(k: usize, k_test: usize) -> bool {
    k_test > 0 && k.is_multiple_of(k_test)
}

/// η₂ from the band-averaged spectral floor, calibrated so the test-tone bin
/// reads B_rms. Bins at harmonics of the test tone are skipped.
pub fn sensitivity_method2<T: Real>(
    traces: &[TimeTrace<T>],
    b_test: T,
    f_test: T,
    band: (T, T),
) -> Result<T> {
    let (n, fs) = check_trials(traces, 1)?;
    if !(b_test > T::zero() && f_test > T::zero()) {
        return Err(domain("test amplitude and frequency must be positive"));
    }
    let (f_start, f_stop) = band;
    if !(f_start > T::zero() && f_stop > f_start) {
        return Err(domain("band must be ordered and positive"));
    }
    if f_stop > fs / T::lit(2.0) {
        return Err(domain("band extends past the Nyquist frequency"));
    }
    if f_test >= f_start && f_test <= f_stop {
        return Err(domain("band must exclude the test frequency"));
    }
    let t_trial = T::from_usize_lossy(n) / fs;
    let k_of = |f: T| (f * t_trial).round().to_usize().unwrap_or(0);
    let k_test = k_of(f_test);
    let (k0, k1) = (
        (f_start * t_trial).ceil().to_usize().unwrap_or(0),
        (f_stop * t_trial).floor().to_usize().unwrap_or(0),
    );
    let bins: Vec<usize> = (k0..=k1).filter(|&k| !is_harmonic(k, k_test)).collect();
    if k_test == 0 || k_test > n / 2 || bins.is_empty() {
        return Err(domain(
            "band or test tone does not resolve to any frequency bin",
        ));
    }
    let mut tone = T::zero();
    let mut power = T::zero();
    for t in traces {
        let s = spectrum(t.samples());
        tone += s[k_test].norm();
        power += bins.iter().fold(T::zero(), |a, &k| a + s[k].norm_sqr())
            / T::from_usize_lossy(bins.len());
    }
    let m = T::from_usize_lossy(traces.len());
    let tone = tone / m;
    let power = power / m;
    if !(tone > T::zero()) {
        return Err(Error::NoSignal("test-tone bin is empty".into()));
    }
    let scale = b_test * T::FRAC_1_SQRT_2() / tone;
    Ok(scale * power.sqrt() * t_trial.sqrt() * T::FRAC_1_SQRT_2())
}

/// η₃ = mean over trials of RMS/√(2f_E); RMS is taken about each trial's mean.
pub fn sensitivity_method3<T: Real>(traces: &[TimeTrace<T>], f_enbw: T) -> Result<T> {
    check_trials(traces, 1)?;
    if !(f_enbw > T::zero() && f_enbw.is_finite()) {
        return Err(domain("noise bandwidth must be positive"));
    }
    let denom = (T::lit(2.0) * f_enbw).sqrt();
    let sum = traces.iter().fold(T::zero(), |a, t| {
        a + crate::trace::std_dev(t.samples()) / denom
    });
    Ok(sum / T::from_usize_lossy(traces.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    const FS: f64 = 20_000.0;

    /// White noise of level η (per-sample σ = η√fs) plus an optional tone.
    fn trials(eta: f64, b: f64, n_trials: usize, seed: u64) -> Vec<TimeTrace<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = FS as usize;
        (0..n_trials)
            .map(|_| {
                let s: Vec<f64> = (0..n)
                    .map(|k| {
                        let t = k as f64 / FS;
                        let z: f64 = StandardNormal.sample(&mut rng);
                        b * (std::f64::consts::TAU * 250.0 * t).sin() + eta * FS.sqrt() * z
                    })
                    .collect();
                TimeTrace::new(FS, s, Unit::Tesla).unwrap()
            })
            .collect()
    }

    #[test]
    fn method1_recovers_level() {
        let tr = trials(15e-12, 1.8e-9, 150, 3);
        let e = sensitivity_method1(&tr, 1.8e-9, 250.0).unwrap();
        assert!((e / 15e-12 - 1.0).abs() < 0.15, "{e}");
        let clean = trials(0.0, 1.8e-9, 3, 0);
        assert!(sensitivity_method1(&clean, 1.8e-9, 250.0).unwrap() < 1e-20);
        let none = trials(15e-12, 0.0, 5, 1);
        assert!(matches!(
            sensitivity_method1(&none, 1.8e-9, 250.0),
            Err(Error::NoSignal(_))
        ));
    }

    #[test]
    fn method2_independent_of_tone_amplitude() {
        let tr = trials(15e-12, 1.8e-9, 20, 4);
        let e = sensitivity_method2(&tr, 1.8e-9, 250.0, (300.0, 600.0)).unwrap();
        assert!((e / 15e-12 - 1.0).abs() < 0.1, "{e}");
        let tr2 = trials(15e-12, 3.6e-9, 20, 4);
        let e2 = sensitivity_method2(&tr2, 3.6e-9, 250.0, (300.0, 600.0)).unwrap();
        assert!((e2 / e - 1.0).abs() < 0.02);
        assert!(sensitivity_method2(&tr, 1.8e-9, 250.0, (200.0, 600.0)).is_err());
        assert!(sensitivity_method2(&tr, 1.8e-9, 250.0, (300.0, 20_000.0)).is_err());
    }

    #[test]
    fn method3_basics() {
        let zero = vec![TimeTrace::new(FS, vec![0.0; 100], Unit::Tesla).unwrap()];
        assert_eq!(sensitivity_method3(&zero, 4e3).unwrap(), 0.0);
        assert!(sensitivity_method3(&zero, 0.0).is_err());
        // unfiltered white noise has f_E = fs/2
        let tr = trials(15e-12, 0.0, 4, 5);
        let e = sensitivity_method3(&tr, FS / 2.0).unwrap();
        assert!((e / 15e-12 - 1.0).abs() < 0.02);
    }
}
