//! Peak-to-peak over quiet-window standard deviation.

use crate::error::{Error, Result};
use crate::trace::{peak_to_peak, std_dev, TimeTrace};
use crate::Real;

/// SNR at which an event counts as detected.
pub const DETECTION_THRESHOLD: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrReport<T> {
    /// SNR of the supplied (averaged) trace.
    pub snr_avg: T,
    /// Equivalent single-trial SNR, `snr_avg/√n_avg`.
    pub snr_single: T,
    pub n_avg: usize,
    pub peak_to_peak: T,
    pub sigma: T,
    pub detected: bool,
}

/// SNR of `trace` with the signal in `signal_window` and noise estimated from
/// `quiet_window` (both `(t0, t1)` in seconds).
pub fn snr<T: Real>(
    trace: &TimeTrace<T>,
    signal_window: (T, T),
    quiet_window: (T, T),
    n_avg: usize,
) -> Result<SnrReport<T>> {
    if n_avg == 0 {
        return Err(crate::error::domain("averaging count must be at least 1"));
    }
    let sig = trace.window_range(signal_window.0, signal_window.1)?;
    let quiet = trace.window_range(quiet_window.0, quiet_window.1)?;
    if sig.start < quiet.end && quiet.start < sig.end {
        return Err(Error::Window("signal and quiet windows overlap".into()));
    }
    let p2p = peak_to_peak(&trace.samples()[sig]);
    let sigma = std_dev(&trace.samples()[quiet]);
    if !(sigma > T::zero()) {
        return Err(Error::Singular("quiet window has zero variance".into()));
    }
    let snr_avg = p2p / sigma;
    Ok(SnrReport {
        snr_avg,
        snr_single: snr_avg / T::from_usize_lossy(n_avg).sqrt(),
        n_avg,
        peak_to_peak: p2p,
        sigma,
        detected: snr_avg >= T::lit(DETECTION_THRESHOLD),
    })
}
