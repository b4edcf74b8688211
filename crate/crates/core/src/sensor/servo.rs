//! Slow re-centring of the microwave frequency on a drifting resonance.

use crate::error::{domain, Result};
use crate::trace::TimeTrace;
use crate::{Real, Unit};

/// Zero-order-hold tracking: at each update instant `k/update_rate` the
/// drive is set to the current resonance, and held until the next update.
/// Returns the residual detuning ω₀(t) − ω_c(t).
pub fn drift_servo<T: Real>(omega0: &TimeTrace<T>, update_rate: T) -> Result<TimeTrace<T>> {
    omega0.expect_unit(Unit::RadPerSecond)?;
    if !(update_rate > T::zero() && update_rate.is_finite()) {
        return Err(domain("servo update rate must be positive"));
    }
    let period = T::one() / update_rate;
    let mut held = omega0.samples().first().copied().unwrap_or(T::zero());
    let mut next_update = period;
    let residual = omega0
        .samples()
        .iter()
        .enumerate()
        .map(|(i, &w)| {
            let t = omega0.time(i);
            if t >= next_update {
                held = w;
                while next_update <= t {
                    next_update += period;
                }
            }
            w - held
        })
        .collect();
    omega0.with_samples(residual, Unit::RadPerSecond)
}

/// Default update rate, Hz.
pub const DEFAULT_SERVO_RATE: f64 = 0.4;
