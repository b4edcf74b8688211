//! Powerline comb: FFT high-pass plus narrow notches at mains harmonics.

use crate::analysis::spectral::apply_mask;
use crate::error::{domain, Result};
use crate::trace::TimeTrace;
use crate::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct CombFilter<T> {
    /// Bins below this frequency are removed, Hz.
    pub highpass: T,
    /// Mains fundamental, Hz.
    pub mains: T,
    /// Highest harmonic notched, Hz.
    pub mains_max: T,
    /// Full width of each notch, Hz.
    pub notch_width: T,
    /// Additional notch centres, Hz.
    pub extra_notches: Vec<T>,
}

impl<T: Real> Default for CombFilter<T> {
    /// 80 Hz high-pass and 1 Hz notches at 60, 120, …, 660 Hz.
    fn default() -> Self {
        Self {
            highpass: T::lit(80.0),
            mains: T::lit(60.0),
            mains_max: T::lit(660.0),
            notch_width: T::one(),
            extra_notches: Vec::new(),
        }
    }
}

impl<T: Real> CombFilter<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.highpass >= T::zero() && self.highpass.is_finite()) {
            return Err(domain("comb high-pass must be non-negative"));
        }
        if !(self.mains > T::zero() && self.notch_width > T::zero()) {
            return Err(domain("mains frequency and notch width must be positive"));
        }
        if self
            .extra_notches
            .iter()
            .any(|f| !(*f > T::zero() && f.is_finite()))
        {
            return Err(domain("extra notch frequencies must be positive"));
        }
        Ok(())
    }

    pub fn notch_centres(&self) -> Vec<T> {
        let mut centres = Vec::new();
        let mut k = 1usize;
        loop {
            let f = self.mains * T::from_usize_lossy(k);
            if f > self.mains_max * (T::one() + T::epsilon()) {
                break;
            }
            centres.push(f);
            k += 1;
        }
        centres.extend(self.extra_notches.iter().copied());
        centres
    }

    /// Folded bins (0..=n/2) to zero for a record of `n` samples. A notch that
    /// falls between bins removes the nearest bin.
    fn stop_bins(&self, n: usize, sample_rate: T) -> Vec<bool> {
        let half = n / 2;
        let mut stop = vec![false; half + 1];
        let df = sample_rate / T::from_usize_lossy(n);
        let hw = self.notch_width / T::lit(2.0);
        for c in self.notch_centres() {
            let mut any = false;
            for (k, s) in stop.iter_mut().enumerate() {
                let f = T::from_usize_lossy(k) * df;
                if crate::scalar::abs(f - c) <= hw {
                    *s = true;
                    any = true;
                }
            }
            if !any {
                if let Some(k) = (c / df).round().to_usize() {
                    if k <= half {
                        stop[k] = true;
                    }
                }
            }
        }
        stop
    }

    pub fn apply(&self, trace: &TimeTrace<T>) -> Result<TimeTrace<T>> {
        self.validate()?;
        let n = trace.len();
        if n == 0 {
            return Ok(trace.clone());
        }
        let stop = self.stop_bins(n, trace.sample_rate());
        let hp = self.highpass;
        let out = apply_mask(trace.samples(), trace.sample_rate(), |k, f| {
            k != 0 && f >= hp && !stop[k]
        });
        trace.with_samples(out, trace.unit())
    }
}

/// Default comb applied to one trace.
pub fn comb_filter<T: Real>(trace: &TimeTrace<T>) -> Result<TimeTrace<T>> {
    CombFilter::default().apply(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Unit;

    fn tone(f: f64) -> TimeTrace<f64> {
        TimeTrace::from_fn(10_000.0, 10_000, Unit::Tesla, |t| {
            (std::f64::consts::TAU * f * t).sin()
        })
        .unwrap()
    }

    #[test]
    fn notches_and_passband() {
        let hum = comb_filter(&tone(60.0)).unwrap();
        assert!(hum.rms() < 0.01 * tone(60.0).rms());
        let h7 = comb_filter(&tone(420.0)).unwrap();
        assert!(h7.rms() < 1e-10);
        let sig = tone(250.0);
        let out = comb_filter(&sig).unwrap();
        assert!((out.rms() / sig.rms() - 1.0).abs() < 0.01);
        let dc = TimeTrace::new(1000.0, vec![1.0; 1000], Unit::Tesla).unwrap();
        assert!(comb_filter(&dc).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn idempotent_and_extra_notches() {
        let mixed = TimeTrace::from_fn(5000.0, 5000, Unit::Tesla, |t| {
            let w = std::f64::consts::TAU * t;
            (w * 250.0).sin() + 0.3 * (w * 2100.0).sin() + (w * 61.0).cos()
        })
        .unwrap();
        let c = CombFilter {
            extra_notches: vec![2100.0],
            ..CombFilter::default()
        };
        let once = c.apply(&mixed).unwrap();
        let twice = c.apply(&once).unwrap();
        for (a, b) in once.samples().iter().zip(twice.samples()) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((once.rms() - tone(250.0).rms()).abs() < 1e-3);
    }

    #[test]
    fn short_record_zeroes_nearest_bin() {
        // 0.25 s record: 4 Hz bins, 60 Hz lands on a bin, 90 Hz on none.
        let c = CombFilter {
            extra_notches: vec![90.0],
            ..CombFilter::default()
        };
        let stop = c.stop_bins(2500, 10_000.0);
        assert!(stop[15]);
        assert!(stop[22] || stop[23]);
    }
}
