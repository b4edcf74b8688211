//! FFT helpers: forward spectra of real records and frequency-domain masks.

use num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{domain, Result};
use crate::trace::TimeTrace;
use crate::Real;

/// Forward DFT of a real record (unnormalised, full length).
pub fn spectrum<T: Real>(samples: &[T]) -> Vec<Complex<T>> {
    let mut buf: Vec<Complex<T>> = samples
        .iter()
        .map(|&x| Complex::new(x, T::zero()))
        .collect();
    if !buf.is_empty() {
        FftPlanner::new()
            .plan_fft_forward(buf.len())
            .process(&mut buf);
    }
    buf
}

/// Absolute frequency of DFT bin `k` in a length-`n` record.
#[inline]
pub fn bin_frequency<T: Real>(k: usize, n: usize, sample_rate: T) -> T {
    let folded = k.min(n - k);
    T::from_usize_lossy(folded) * sample_rate / T::from_usize_lossy(n)
}

/// Zeroes every bin whose `(index, |frequency|)` fails `keep`, Hermitian
/// symmetric by construction, and returns the real inverse transform.
pub fn apply_mask<T: Real>(
    samples: &[T],
    sample_rate: T,
    keep: impl Fn(usize, T) -> bool,
) -> Vec<T> {
    let n = samples.len();
    if n == 0 {
        return Vec::new();
    }
    let mut planner = FftPlanner::new();
    let mut buf: Vec<Complex<T>> = samples
        .iter()
        .map(|&x| Complex::new(x, T::zero()))
        .collect();
    planner.plan_fft_forward(n).process(&mut buf);
    for (k, c) in buf.iter_mut().enumerate() {
        let folded = k.min(n - k);
        if !keep(folded, bin_frequency(k, n, sample_rate)) {
            *c = Complex::new(T::zero(), T::zero());
        }
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    let scale = T::one() / T::from_usize_lossy(n);
    buf.iter().map(|c| c.re * scale).collect()
}

/// Brick-wall FFT low-pass keeping `|f| ≤ cutoff`.
pub fn lowpass<T: Real>(trace: &TimeTrace<T>, cutoff: T) -> Result<TimeTrace<T>> {
    if !(cutoff > T::zero()) {
        return Err(domain("low-pass cutoff must be positive"));
    }
    let out = apply_mask(trace.samples(), trace.sample_rate(), |_, f| f <= cutoff);
    trace.with_samples(out, trace.unit())
}

/// Brick-wall FFT high-pass removing `|f| < cutoff` (DC always removed).
pub fn highpass<T: Real>(trace: &TimeTrace<T>, cutoff: T) -> Result<TimeTrace<T>> {
    if !(cutoff >= T::zero()) {
        return Err(domain("high-pass cutoff must be non-negative"));
    }
    let out = apply_mask(trace.samples(), trace.sample_rate(), |k, f| {
        k != 0 && f >= cutoff
    });
    trace.with_samples(out, trace.unit())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Unit;

    fn tone(f: f64, fs: f64, n: usize) -> TimeTrace<f64> {
        TimeTrace::from_fn(fs, n, Unit::Tesla, |t| {
            (std::f64::consts::TAU * f * t).sin()
        })
        .unwrap()
    }

    #[test]
    fn lowpass_passes_and_stops() {
        let fs = 10_000.0;
        let low = tone(100.0, fs, 10_000);
        let high = tone(3000.0, fs, 10_000);
        let mixed = low
            .with_samples(
                low.samples()
                    .iter()
                    .zip(high.samples())
                    .map(|(a, b)| a + b)
                    .collect(),
                Unit::Tesla,
            )
            .unwrap();
        let out = lowpass(&mixed, 1000.0).unwrap();
        let err: f64 = out
            .samples()
            .iter()
            .zip(low.samples())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-10);
    }

    #[test]
    fn highpass_removes_dc() {
        let t = TimeTrace::new(1000.0, vec![3.0; 1000], Unit::Volts).unwrap();
        let out = highpass(&t, 0.0).unwrap();
        assert!(out.max_abs() < 1e-12);
    }

    #[test]
    fn spectrum_peak_at_tone() {
        let t = tone(50.0, 1000.0, 1000);
        let s = spectrum(t.samples());
        let k = (0..500)
            .max_by(|&a, &b| s[a].norm().partial_cmp(&s[b].norm()).unwrap())
            .unwrap();
        assert_eq!(k, 50);
        assert!((s[50].norm() - 500.0).abs() < 1e-9);
        assert_eq!(bin_frequency(999, 1000, 1000.0), 1.0);
    }
}
