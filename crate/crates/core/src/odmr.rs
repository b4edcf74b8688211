//! Closed-form ODMR fluorescence lineshapes and the lock-in dispersion signal.
//!
//! Each feature is a Lorentzian dip of FWHM Γ and fractional depth 𝒞 below the
//! off-resonant fluorescence F₀. Square-wave frequency modulation with
//! deviation ω_dev followed by lock-in demodulation reduces to the two-point
//! difference `V₀·[F(ω_c + ω_dev) − F(ω_c − ω_dev)] / (2F₀)`. Power
//! broadening is not modelled; it enters only through the value of Γ.

use crate::constants::{Constants, HYPERFINE_SPLITTING_HZ};
use crate::error::{domain, Result};
use crate::geometry::{zeeman_resonance, SpinBranch};
use crate::optimize::golden_section_max;
use crate::scalar::abs;
use crate::Real;

/// Which fluorescence model feeds the dispersion difference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DispersionMode {
    /// One Lorentzian feature.
    SingleFeature,
    /// The ¹⁴N hyperfine triplet swept by a single tone.
    Hyperfine,
    /// The triplet driven by three tones spaced by the hyperfine splitting.
    ThreeTone,
}

/// Parameters of the NV resonance and its lock-in readout. All frequencies
/// are angular (rad/s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdmrParams<T> {
    /// Resonance centre ω₀.
    pub omega0: T,
    /// Linewidth Γ (FWHM).
    pub gamma: T,
    /// Fractional dip depth 𝒞 of one feature.
    pub contrast: T,
    /// Off-resonance fluorescence F₀, arbitrary units.
    pub f0: T,
    /// Hyperfine splitting Δω_HF.
    pub delta_hf: T,
    /// Modulation deviation ω_dev.
    pub omega_dev: T,
    /// Lock-in prefactor voltage V₀.
    pub v0: T,
}

impl<T: Real> OdmrParams<T> {
    /// Parameters with ω_dev set to the slope-maximising Γ/(2√3).
    pub fn new(omega0: T, gamma: T, contrast: T, f0: T, v0: T) -> Result<Self> {
        let p = Self {
            omega0,
            gamma,
            contrast,
            f0,
            delta_hf: T::TAU() * T::lit(HYPERFINE_SPLITTING_HZ),
            omega_dev: optimal_deviation(gamma),
            v0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.omega0,
            self.gamma,
            self.contrast,
            self.f0,
            self.delta_hf,
            self.omega_dev,
            self.v0,
        ]
        .iter()
        .all(|x| x.is_finite());
        if !finite {
            return Err(domain("ODMR parameters must be finite"));
        }
        if !(self.gamma > T::zero()) {
            return Err(domain("linewidth must be positive"));
        }
        if !(self.contrast > T::zero() && self.contrast < T::one()) {
            return Err(domain("contrast must lie in (0, 1)"));
        }
        if !(self.f0 > T::zero()) {
            return Err(domain("off-resonance fluorescence must be positive"));
        }
        if self.delta_hf < T::zero() {
            return Err(domain("hyperfine splitting must be non-negative"));
        }
        if !(self.omega_dev > T::zero()) {
            return Err(domain("modulation deviation must be positive"));
        }
        Ok(())
    }

    pub fn with_omega_dev(mut self, omega_dev: T) -> Self {
        self.omega_dev = omega_dev;
        self
    }

    pub fn with_contrast(mut self, contrast: T) -> Self {
        self.contrast = contrast;
        self
    }

    pub fn with_gamma(mut self, gamma: T) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn with_delta_hf(mut self, delta_hf: T) -> Self {
        self.delta_hf = delta_hf;
        self
    }
}

impl<T: Real> Default for OdmrParams<T> {
    /// Operating point of the two-axis sensor: 1.5 MHz power-broadened line
    /// placed by a 7 G axial bias, 2.65 % contrast per axis (5.3 % for both axes), and a
    /// 0.4 V photodiode level as V₀.
    fn default() -> Self {
        let omega0 = zeeman_resonance(T::lit(7e-4), SpinBranch::Plus).expect("linear regime");
        Self::new(
            omega0,
            T::TAU() * T::lit(1.5e6),
            T::lit(0.0265),
            T::one(),
            T::lit(0.4),
        )
        .expect("default ODMR parameters are valid")
    }
}

/// Slope-maximising modulation deviation Γ/(2√3) for a single feature.
pub fn optimal_deviation<T: Real>(gamma: T) -> T {
    gamma / (T::lit(2.0) * T::lit(3.0).sqrt())
}

#[inline]
fn unit_lorentzian<T: Real>(detuning: T, gamma: T) -> T {
    let hw2 = gamma * gamma / T::lit(4.0);
    hw2 / (hw2 + detuning * detuning)
}

#[inline]
fn unit_lorentzian_derivative<T: Real>(detuning: T, gamma: T) -> T {
    let hw2 = gamma * gamma / T::lit(4.0);
    let den = hw2 + detuning * detuning;
    -T::lit(2.0) * detuning * hw2 / (den * den)
}

const OFFSETS: [i32; 3] = [-1, 0, 1];

/// Sum of unit Lorentzians (or their derivatives) at `detuning` for a mode,
/// i.e. the dip profile divided by 𝒞.
fn profile<T: Real>(detuning: T, p: &OdmrParams<T>, mode: DispersionMode, f: fn(T, T) -> T) -> T {
    match mode {
        DispersionMode::SingleFeature => f(detuning, p.gamma),
        DispersionMode::Hyperfine => OFFSETS.iter().fold(T::zero(), |acc, &q| {
            acc + f(detuning - T::lit(q as f64) * p.delta_hf, p.gamma)
        }),
        DispersionMode::ThreeTone => {
            let mut acc = T::zero();
            for &tone in &OFFSETS {
                for &feature in &OFFSETS {
                    let offset = T::lit((tone - feature) as f64) * p.delta_hf;
                    acc += f(detuning + offset, p.gamma);
                }
            }
            acc
        }
    }
}

fn check_omega<T: Real>(omega: T) -> Result<()> {
    if omega.is_finite() {
        Ok(())
    } else {
        Err(domain("angular frequency must be finite"))
    }
}

/// Fluorescence `F(ω)` for the given drive model.
pub fn fluorescence<T: Real>(omega: T, p: &OdmrParams<T>, mode: DispersionMode) -> Result<T> {
    p.validate()?;
    check_omega(omega)?;
    let dip = profile(omega - p.omega0, p, mode, unit_lorentzian);
    Ok(p.f0 * (T::one() - p.contrast * dip))
}

/// Single Lorentzian feature: `F₀(1 − 𝒞·L(ω − ω₀))`.
pub fn lorentzian_fluorescence<T: Real>(omega: T, p: &OdmrParams<T>) -> Result<T> {
    fluorescence(omega, p, DispersionMode::SingleFeature)
}

/// Hyperfine triplet swept by one tone.
pub fn hyperfine_fluorescence<T: Real>(omega: T, p: &OdmrParams<T>) -> Result<T> {
    fluorescence(omega, p, DispersionMode::Hyperfine)
}

/// Triplet driven by three tones; the 3×3 double sum over tone and feature
/// indices.
pub fn three_tone_fluorescence<T: Real>(omega: T, p: &OdmrParams<T>) -> Result<T> {
    fluorescence(omega, p, DispersionMode::ThreeTone)
}

/// Lock-in dispersion voltage at centre frequency `omega_c` as a function of
/// detuning from ω₀. Negative below resonance, positive above, zero at ω₀.
pub fn dispersion_at_detuning<T: Real>(detuning: T, p: &OdmrParams<T>, mode: DispersionMode) -> T {
    let upper = profile(detuning + p.omega_dev, p, mode, unit_lorentzian);
    let lower = profile(detuning - p.omega_dev, p, mode, unit_lorentzian);
    // V₀/F₀ · [F(+) − F(−)]/2 with F = F₀(1 − 𝒞·profile)
    p.v0 * p.contrast * (lower - upper) / T::lit(2.0)
}

pub fn lia_dispersion<T: Real>(omega_c: T, p: &OdmrParams<T>, mode: DispersionMode) -> Result<T> {
    p.validate()?;
    check_omega(omega_c)?;
    Ok(dispersion_at_detuning(omega_c - p.omega0, p, mode))
}

/// Analytic zero-crossing slope `dV_LIA/dω_c` at ω₀, volts per rad/s.
pub fn zero_crossing_slope<T: Real>(p: &OdmrParams<T>, mode: DispersionMode) -> Result<T> {
    p.validate()?;
    let upper = profile(p.omega_dev, p, mode, unit_lorentzian_derivative);
    let lower = profile(-p.omega_dev, p, mode, unit_lorentzian_derivative);
    Ok(p.v0 * p.contrast * (lower - upper) / T::lit(2.0))
}

/// Numerically maximises the zero-crossing slope over ω_dev ∈ (0, Γ].
pub fn slope_maximizing_deviation<T: Real>(p: &OdmrParams<T>, mode: DispersionMode) -> Result<T> {
    p.validate()?;
    let slope = |dev: T| {
        let q = p.with_omega_dev(dev);
        zero_crossing_slope(&q, mode).unwrap_or(T::zero())
    };
    let lo = p.gamma * T::lit(1e-3);
    let hi = p.gamma;
    Ok(golden_section_max(slope, lo, hi, p.gamma * T::lit(1e-9)))
}

/// Linear field-to-voltage coefficient of the single-feature dispersion at the
/// optimal deviation: `−3√3·V₀·𝒞·γ / (4Γ)`, volts per tesla.
pub fn small_signal_gain<T: Real>(p: &OdmrParams<T>) -> Result<T> {
    p.validate()?;
    let optimum = optimal_deviation(p.gamma);
    if abs(p.omega_dev - optimum) > optimum * T::lit(1e-6) {
        return Err(domain(
            "small-signal gain assumes the slope-maximising deviation Γ/(2√3)",
        ));
    }
    let gamma_e = Constants::<T>::si().gamma;
    let three_root3 = T::lit(3.0) * T::lit(3.0).sqrt();
    Ok(-three_root3 * p.v0 * p.contrast * gamma_e / (T::lit(4.0) * p.gamma))
}
