//! Physical constants used by the sensor and source models.

use crate::Real;

/// Electron gyromagnetic ratio g_e·μ_B/ħ in s⁻¹·T⁻¹ (value used for the NV
/// ground state throughout).
pub const GYROMAGNETIC_RATIO: f64 = 1.761e11;
pub const PLANCK: f64 = 6.626_070_15e-34;
pub const HBAR: f64 = PLANCK / (2.0 * std::f64::consts::PI);
pub const VACUUM_PERMEABILITY: f64 = 1.256_637_062_12e-6;
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// NV ground-state zero-field splitting, Hz.
pub const ZERO_FIELD_SPLITTING_HZ: f64 = 2.87e9;
/// ¹⁴N hyperfine splitting of the NV resonance, Hz.
pub const HYPERFINE_SPLITTING_HZ: f64 = 2.16e6;
/// Tetrahedral bond angle of the diamond lattice, degrees.
pub const TETRAHEDRAL_ANGLE_DEG: f64 = 109.4712;
/// Default digitiser rate, Hz.
pub const DEFAULT_SAMPLE_RATE: f64 = 250e3;

/// The constants record in a chosen scalar type.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constants<T> {
    /// g_e·μ_B/ħ, s⁻¹·T⁻¹.
    pub gamma: T,
    pub h: T,
    pub hbar: T,
    pub mu0: T,
    pub q: T,
    pub k_b: T,
}

impl<T: Real> Constants<T> {
    pub fn si() -> Self {
        Self {
            gamma: T::lit(GYROMAGNETIC_RATIO),
            h: T::lit(PLANCK),
            hbar: T::lit(HBAR),
            mu0: T::lit(VACUUM_PERMEABILITY),
            q: T::lit(ELEMENTARY_CHARGE),
            k_b: T::lit(BOLTZMANN),
        }
    }

    /// h/(g_e·μ_B) = 2π/γ, in T·s. Converts a frequency shift in Hz to tesla.
    pub fn tesla_per_hz(&self) -> T {
        T::TAU() / self.gamma
    }
}

impl<T: Real> Default for Constants<T> {
    fn default() -> Self {
        Self::si()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_matches_planck_form() {
        let c = Constants::<f64>::si();
        // g_e μ_B / h ≈ 28.03 GHz/T
        let ghz_per_tesla = c.gamma / (2.0 * std::f64::consts::PI) / 1e9;
        assert!((ghz_per_tesla - 28.027).abs() < 0.01);
        assert!((c.tesla_per_hz() * c.gamma - 2.0 * std::f64::consts::PI).abs() < 1e-12);
    }
}
