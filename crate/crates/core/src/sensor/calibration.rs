//! Voltage-to-field calibration and the reference coil.

use crate::constants::Constants;
use crate::error::{domain, Error, Result};
use crate::geometry::two_axis_angle_factor;
use crate::trace::TimeTrace;
use crate::{Real, Unit};

/// `C_LIA = h / (slope·g_eμ_B·cos(π/2 − θ/2))` in T/V, for a zero-crossing
/// slope in V/Hz of resonance shift.
pub fn calibration_constant<T: Real>(slope: T) -> Result<T> {
    if !slope.is_finite() {
        return Err(domain("slope must be finite"));
    }
    if slope == T::zero() {
        return Err(Error::Singular(
            "zero dispersion slope cannot be calibrated".into(),
        ));
    }
    let tesla_per_hz = Constants::<T>::si().tesla_per_hz();
    Ok(tesla_per_hz / (slope * two_axis_angle_factor::<T>()))
}

/// Applies a calibration constant to a lock-in voltage trace.
pub fn volts_to_field<T: Real>(trace: &TimeTrace<T>, c_lia: T) -> Result<TimeTrace<T>> {
    trace.expect_unit(Unit::Volts)?;
    trace.map(Unit::Tesla, |v| c_lia * v)
}

/// On-axis field of an `n_turns` circular loop, `μ₀NIr²/(2(z² + r²)^{3/2})`.
pub fn coil_field<T: Real>(n_turns: u32, i_coil: T, r_coil: T, z_coil: T) -> Result<T> {
    if !(r_coil > T::zero() && r_coil.is_finite()) {
        return Err(domain("coil radius must be positive"));
    }
    if !(z_coil >= T::zero() && z_coil.is_finite()) {
        return Err(domain("coil distance must be non-negative"));
    }
    if !i_coil.is_finite() {
        return Err(domain("coil current must be finite"));
    }
    let mu0 = Constants::<T>::si().mu0;
    let n = T::lit(n_turns as f64);
    let d2 = z_coil * z_coil + r_coil * r_coil;
    Ok(mu0 * n * i_coil * r_coil * r_coil / (T::lit(2.0) * d2 * d2.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn calibration_inverse_in_slope() {
        let a = calibration_constant(1e-3f64).unwrap();
        let b = calibration_constant(2e-3).unwrap();
        assert!((a / b - 2.0).abs() < 1e-12);
        assert!(calibration_constant(-1e-3).unwrap() < 0.0);
        assert!(matches!(calibration_constant(0.0), Err(Error::Singular(_))));
    }

    #[test]
    fn coil_center_limit_and_linearity() {
        let mu0 = Constants::<f64>::si().mu0;
        let b = coil_field(7, 1e-3, 0.02, 0.0).unwrap();
        assert!((b - mu0 * 7.0 * 1e-3 / (2.0 * 0.02)).abs() < 1e-18);
        let b1 = coil_field(7, 0.88e-3f64, 0.0235, 0.103).unwrap();
        let b2 = coil_field(7, 1.76e-3, 0.0235, 0.103).unwrap();
        assert!((b2 / b1 - 2.0).abs() < 1e-12);
        assert!(coil_field(7, 1e-3, 0.0, 0.1).is_err());
    }

    #[test]
    fn volts_to_field_requires_volts() {
        let t = TimeTrace::new(1e3, vec![1.0, -2.0], Unit::Volts).unwrap();
        let b = volts_to_field(&t, 3.0).unwrap();
        assert_eq!(b.samples(), &[3.0, -6.0]);
        assert_eq!(b.unit(), Unit::Tesla);
        assert!(volts_to_field(&b, 1.0).is_err());
    }
}
