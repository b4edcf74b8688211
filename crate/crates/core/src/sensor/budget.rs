//! Analytic sensitivity budget: the shot-noise floor of CW-ESR readout, the
//! scalar penalty factors that degrade it, the spin-projection and Ramsey
//! limits, and the photodiode noise model.

use crate::constants::Constants;
use crate::error::{domain, Error, Result};
use crate::geometry::two_axis_angle_factor;
use crate::optimize::{fit_line, golden_section_min};
use crate::Real;

fn positive<T: Real>(x: T, what: &str) -> Result<()> {
    if x > T::zero() && x.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("{what} must be positive and finite")))
    }
}

/// Multiplicative penalties relative to the quadrature-rejected shot-noise
/// floor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Penalties<T> {
    /// Reference-channel subtraction.
    pub p_ref: T,
    /// Dispersion slope reduction from the three-tone lineshape.
    pub p_slope: T,
    /// Slope loss due to finite modulation frequency.
    pub p_mod: T,
    /// Photodiode amplifier noise.
    pub p_amp: T,
    /// Microwave-chain noise.
    pub p_mw: T,
}

impl<T: Real> Default for Penalties<T> {
    fn default() -> Self {
        Self {
            p_ref: T::SQRT_2(),
            p_slope: T::lit(1.19),
            p_mod: modulation_penalty(T::lit(18e3)).expect("positive"),
            p_amp: T::lit(10f64.powf(0.18).sqrt()),
            p_mw: T::lit(1.76),
        }
    }
}

impl<T: Real> Penalties<T> {
    pub fn validate(&self) -> Result<()> {
        for (v, name) in [
            (self.p_ref, "P_ref"),
            (self.p_slope, "P_slope"),
            (self.p_mod, "P_mod"),
            (self.p_amp, "P_amp"),
            (self.p_mw, "P_MW"),
        ] {
            if !(v >= T::one() && v.is_finite()) {
                return Err(domain(format!("penalty {name} must be ≥ 1")));
            }
        }
        Ok(())
    }

    pub fn product(&self) -> T {
        self.p_ref * self.p_slope * self.p_mod * self.p_amp * self.p_mw
    }
}

/// Photodetection operating point and penalties.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseBudget<T> {
    photon_rate: T,
    v_sig: T,
    r_load: T,
    pub penalties: Penalties<T>,
}

impl<T: Real> NoiseBudget<T> {
    /// The photoelectron rate follows from `qℛ = V_sig/R_L`.
    pub fn new(v_sig: T, r_load: T, penalties: Penalties<T>) -> Result<Self> {
        positive(v_sig, "photodiode voltage")?;
        positive(r_load, "load resistance")?;
        penalties.validate()?;
        let q = Constants::<T>::si().q;
        Ok(Self {
            photon_rate: v_sig / (r_load * q),
            v_sig,
            r_load,
            penalties,
        })
    }

    pub fn photon_rate(&self) -> T {
        self.photon_rate
    }

    pub fn v_sig(&self) -> T {
        self.v_sig
    }

    pub fn r_load(&self) -> T {
        self.r_load
    }

    /// The three stages of the budget for a linewidth `delta_f` (Hz) and
    /// two-axis contrast `contrast`.
    pub fn chain(&self, delta_f: T, contrast: T) -> Result<BudgetChain<T>> {
        let shot = shot_noise_sensitivity_cwesr(delta_f, contrast, self.photon_rate)?;
        let p = &self.penalties;
        Ok(BudgetChain {
            shot,
            cw_esr: shot * p.p_ref * p.p_slope,
            full: shot * p.product(),
        })
    }
}

impl<T: Real> Default for NoiseBudget<T> {
    /// 400 mV across 50 Ω with the default penalties.
    fn default() -> Self {
        Self::new(T::lit(0.4), T::lit(50.0), Penalties::default()).expect("valid default")
    }
}

/// Budget stages in T/√Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BudgetChain<T> {
    /// Shot-noise floor after quadrature rejection.
    pub shot: T,
    /// With reference subtraction and slope penalties.
    pub cw_esr: T,
    /// With every penalty.
    pub full: T,
}

/// Shot-noise-limited CW-ESR sensitivity, T/√Hz:
/// `(1/√2)·(4/(3√3))·h·Δf / (g_eμ_B·𝒞·cos(π/2 − θ/2)·√ℛ)`.
pub fn shot_noise_sensitivity_cwesr<T: Real>(delta_f: T, contrast: T, photon_rate: T) -> Result<T> {
    positive(delta_f, "linewidth")?;
    positive(contrast, "contrast")?;
    positive(photon_rate, "photon rate")?;
    let c = Constants::<T>::si();
    let lineshape = T::lit(4.0) / (T::lit(3.0) * T::lit(3.0).sqrt());
    let eff_contrast = contrast * two_axis_angle_factor::<T>();
    Ok(T::FRAC_1_SQRT_2() * lineshape * c.tesla_per_hz() * delta_f
        / (eff_contrast * photon_rate.sqrt()))
}

/// Spin-projection limit `(ħ/g_eμ_B)/√(N·T₂*)`, T/√Hz.
pub fn spin_projection_limit<T: Real>(n_spins: T, t2_star: T) -> Result<T> {
    positive(n_spins, "spin count")?;
    positive(t2_star, "T2*")?;
    let gamma = Constants::<T>::si().gamma;
    Ok(T::one() / (gamma * (n_spins * t2_star).sqrt()))
}

/// Ramsey sensitivity with initialisation `t_i`, free precession `tau` and
/// readout `t_r`: `(ħ/g_eμ_B)·√(t_I + τ + t_R)/τ · 1/(𝒞√(ℛ·t_R))`.
pub fn ramsey_sensitivity<T: Real>(
    t_i: T,
    tau: T,
    t_r: T,
    contrast: T,
    photon_rate: T,
) -> Result<T> {
    positive(t_i, "initialisation time")?;
    positive(tau, "free precession time")?;
    positive(t_r, "readout time")?;
    positive(contrast, "contrast")?;
    positive(photon_rate, "photon rate")?;
    let gamma = Constants::<T>::si().gamma;
    let beta = photon_rate * t_r;
    Ok((t_i + tau + t_r).sqrt() / (gamma * tau * contrast * beta.sqrt()))
}

/// Finite-modulation slope penalty: 1 in the unmodulated limit and 1.6 at
/// 18 kHz, linear between (and extrapolated beyond).
pub fn modulation_penalty<T: Real>(f_mod: T) -> Result<T> {
    if !(f_mod >= T::zero() && f_mod.is_finite()) {
        return Err(domain("modulation frequency must be non-negative"));
    }
    Ok(T::one() + T::lit(0.6) * f_mod / T::lit(18e3))
}

/// Diamond heating from the pump laser, 2.4 K per watt.
pub fn diamond_temperature_rise<T: Real>(p_laser: T) -> Result<T> {
    if !(p_laser >= T::zero() && p_laser.is_finite()) {
        return Err(domain("laser power must be non-negative"));
    }
    Ok(T::lit(2.4) * p_laser)
}

/// Fractional fluorescence change `ΔF/F` from a static field `b` at the
/// lock-in's operating points: the steepest-slope value
/// `𝒞·(3√3/4)·γ·cos·B/Γ`, reduced by the slope and modulation penalties that
/// act on the signal.
pub fn fractional_lif_change<T: Real>(
    b: T,
    delta_f: T,
    contrast: T,
    penalties: &Penalties<T>,
) -> Result<T> {
    positive(delta_f, "linewidth")?;
    positive(contrast, "contrast")?;
    let gamma = Constants::<T>::si().gamma;
    let shift = gamma * two_axis_angle_factor::<T>() * b;
    let slope = T::lit(3.0) * T::lit(3.0).sqrt() / (T::lit(4.0) * T::TAU() * delta_f);
    Ok(contrast * slope * shift / (penalties.p_slope * penalties.p_mod))
}

/// Photodiode and amplifier noise at the lock-in input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhotodiodeModel<T> {
    pub r_load: T,
    /// Excess factor the amplifier applies to the shot noise.
    pub amp_factor: T,
    /// Temperature of the load, K, setting the amplifier-input floor.
    pub temperature: T,
}

impl<T: Real> Default for PhotodiodeModel<T> {
    fn default() -> Self {
        Self {
            r_load: T::lit(50.0),
            amp_factor: Penalties::<T>::default().p_amp,
            temperature: T::lit(295.0),
        }
    }
}

impl<T: Real> PhotodiodeModel<T> {
    /// RMS voltage noise in bandwidth `f_enbw`. Without the amplifier this is
    /// bare shot noise `√(2qV_sigR_Lf)`; with it, the shot term is scaled by
    /// `amp_factor` and the load's Johnson floor `√(4kTRf)` is added in
    /// quadrature.
    pub fn noise_rms(&self, v_sig: T, f_enbw: T, include_amp: bool) -> Result<T> {
        if !(v_sig >= T::zero() && v_sig.is_finite()) {
            return Err(domain("photodiode voltage must be non-negative"));
        }
        positive(f_enbw, "noise bandwidth")?;
        positive(self.r_load, "load resistance")?;
        let c = Constants::<T>::si();
        let shot2 = T::lit(2.0) * c.q * v_sig * self.r_load * f_enbw;
        if !include_amp {
            return Ok(shot2.sqrt());
        }
        let floor2 = T::lit(4.0) * c.k_b * self.temperature * self.r_load * f_enbw;
        Ok((shot2 * self.amp_factor * self.amp_factor + floor2).sqrt())
    }
}

/// Default-model shorthand for [`PhotodiodeModel::noise_rms`].
pub fn photodiode_noise_model<T: Real>(v_sig: T, f_enbw: T, include_amp: bool) -> Result<T> {
    PhotodiodeModel::default().noise_rms(v_sig, f_enbw, include_amp)
}

/// Fit of `y = (a + b·x)^{1/c}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseCurveFit<T> {
    pub a: T,
    pub b: T,
    pub c: T,
}

/// Least-squares fit of `y = (a + b·x)^{1/c}` with `c ∈ [1, 4]`. For each
/// trial `c`, `(a, b)` follow linearly from `y^c`; `c` is chosen to minimise
/// the residual in `y`.
pub fn fit_noise_curve<T: Real>(x: &[T], y: &[T]) -> Result<NoiseCurveFit<T>> {
    if x.len() != y.len() {
        return Err(Error::DegenerateFit("x and y lengths differ".into()));
    }
    if x.len() < 3 {
        return Err(Error::DegenerateFit("need at least 3 points".into()));
    }
    if y.iter().any(|&v| !(v > T::zero())) || x.iter().any(|v| !v.is_finite()) {
        return Err(Error::DegenerateFit("noise values must be positive".into()));
    }
    let linear = |c: T| -> Option<(T, T)> {
        let yc: Vec<T> = y.iter().map(|&v| v.powf(c)).collect();
        fit_line(x, &yc)
    };
    let sse = |c: T| -> T {
        match linear(c) {
            Some((a, b)) => x.iter().zip(y).fold(T::zero(), |acc, (&xi, &yi)| {
                let base = a + b * xi;
                let model = if base > T::zero() {
                    base.powf(T::one() / c)
                } else {
                    T::zero()
                };
                let r = (model - yi) / yi;
                acc + r * r
            }),
            None => T::infinity(),
        }
    };
    let c = golden_section_min(sse, T::one(), T::lit(4.0), T::lit(1e-7));
    let (a, b) = linear(c).ok_or_else(|| Error::DegenerateFit("x values are all equal".into()))?;
    Ok(NoiseCurveFit { a, b, c })
}
