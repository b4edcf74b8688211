//! Forward model of the measurement: true field → lock-in voltage record.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::constants::{Constants, DEFAULT_SAMPLE_RATE};
use crate::error::{domain, Result};
use crate::geometry::{two_axis_angle_factor, SensingGeometry, Vec3};
use crate::odmr::{small_signal_gain, OdmrParams};
use crate::scalar::abs;
use crate::sensor::budget::NoiseBudget;
use crate::sensor::calibration::calibration_constant;
use crate::sensor::lockin::{filter_cascade, LockInConfig};
use crate::trace::TimeTrace;
use crate::{Real, Unit};

/// Which zero crossing of the dispersion the microwave is locked to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum SlopeSign {
    #[default]
    Positive,
    Negative,
}

impl SlopeSign {
    pub fn factor<T: Real>(self) -> T {
        match self {
            SlopeSign::Positive => T::one(),
            SlopeSign::Negative => -T::one(),
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            SlopeSign::Positive => SlopeSign::Negative,
            SlopeSign::Negative => SlopeSign::Positive,
        }
    }
}

/// Demodulation-phase projection `cos φ`, exact at multiples of 90°.
pub fn phase_factor<T: Real>(phase_deg: T) -> T {
    let r = phase_deg % T::lit(360.0);
    let r = if r < T::zero() { r + T::lit(360.0) } else { r };
    for (k, v) in [
        (0.0, 1.0),
        (90.0, 0.0),
        (180.0, -1.0),
        (270.0, 0.0),
        (360.0, 1.0),
    ] {
        if r == T::lit(k) {
            return T::lit(v);
        }
    }
    r.to_radians().cos()
}

/// Bipolar uniform quantiser with symmetric rounding and clipping, so
/// `quantize(−x) == −quantize(x)` exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Digitizer<T> {
    /// Input range is ±full_scale volts.
    pub full_scale: T,
    pub bits: u32,
}

impl<T: Real> Default for Digitizer<T> {
    fn default() -> Self {
        Self {
            full_scale: T::lit(10.0),
            bits: 16,
        }
    }
}

impl<T: Real> Digitizer<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.full_scale > T::zero() && self.full_scale.is_finite()) {
            return Err(domain("digitiser full scale must be positive"));
        }
        if !(1..=32).contains(&self.bits) {
            return Err(domain("digitiser resolution must be 1..=32 bits"));
        }
        Ok(())
    }

    pub fn lsb(&self) -> T {
        T::lit(2.0) * self.full_scale / T::lit(2f64.powi(self.bits as i32))
    }

    pub fn quantize(&self, x: T) -> T {
        let lsb = self.lsb();
        let clipped = x.max(-self.full_scale).min(self.full_scale);
        (clipped / lsb).round() * lsb
    }
}

/// Linear-interpolation resampling onto a new uniform grid.
pub fn resample<T: Real>(trace: &TimeTrace<T>, sample_rate: T) -> Result<TimeTrace<T>> {
    if !(sample_rate > T::zero() && sample_rate.is_finite()) {
        return Err(domain("sample rate must be positive"));
    }
    if trace.sample_rate() == sample_rate {
        return Ok(trace.clone());
    }
    let src = trace.samples();
    if src.is_empty() {
        return TimeTrace::new(sample_rate, Vec::new(), trace.unit());
    }
    let n = (trace.duration() * sample_rate)
        .floor()
        .to_usize()
        .unwrap_or(0)
        .max(1);
    let ratio = trace.sample_rate() / sample_rate;
    let last = src.len() - 1;
    let out = (0..n)
        .map(|i| {
            let pos = T::from_usize_lossy(i) * ratio;
            let j = pos.floor().to_usize().unwrap_or(0).min(last);
            if j >= last {
                return src[last];
            }
            let frac = pos - T::from_usize_lossy(j);
            src[j] + frac * (src[j + 1] - src[j])
        })
        .collect();
    TimeTrace::new(sample_rate, out, trace.unit())
}

/// The complete sensor: resonance, geometry, lock-in and digitiser, with a
/// white field-noise floor injected ahead of the lock-in filter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorChain<T> {
    /// Per-axis resonance; the two sensing axes are overlapped.
    pub odmr: OdmrParams<T>,
    pub geometry: SensingGeometry<T>,
    pub lockin: LockInConfig<T>,
    pub digitizer: Option<Digitizer<T>>,
    pub slope_sign: SlopeSign,
    /// Demodulation phase offset, degrees.
    pub phase_deg: T,
    /// White noise level η in T/√Hz, defined so a record filtered to noise
    /// bandwidth f_E has RMS η·√(2f_E). Zero disables noise.
    pub noise_density: T,
    /// Acquisition rate, Hz.
    pub sample_rate: T,
    /// Direction of the source field at the sensor.
    pub field_direction: Vec3<T>,
}

impl<T: Real> Default for SensorChain<T> {
    fn default() -> Self {
        Self {
            odmr: OdmrParams::default(),
            geometry: SensingGeometry::default(),
            lockin: LockInConfig::default(),
            digitizer: Some(Digitizer::default()),
            slope_sign: SlopeSign::Positive,
            phase_deg: T::zero(),
            noise_density: T::lit(15e-12),
            sample_rate: T::lit(DEFAULT_SAMPLE_RATE),
            field_direction: Vec3::new(T::one(), T::zero(), T::zero()),
        }
    }
}

impl<T: Real> SensorChain<T> {
    pub fn validate(&self) -> Result<()> {
        self.odmr.validate()?;
        self.lockin.validate()?;
        if let Some(d) = &self.digitizer {
            d.validate()?;
        }
        if !(self.noise_density >= T::zero() && self.noise_density.is_finite()) {
            return Err(domain("noise density must be non-negative"));
        }
        if !(self.sample_rate > T::zero() && self.sample_rate.is_finite()) {
            return Err(domain("sample rate must be positive"));
        }
        if !self.phase_deg.is_finite() {
            return Err(domain("demodulation phase must be finite"));
        }
        let n = self.field_direction.norm();
        if !(abs(n - T::one()) < T::check_tol(1e-9)) {
            return Err(domain("field direction must be a unit vector"));
        }
        Ok(())
    }

    pub fn without_noise(mut self) -> Self {
        self.noise_density = T::zero();
        self
    }

    /// Noise floor taken from the full analytic budget instead of the
    /// measured value.
    pub fn with_budget_noise(mut self, budget: &NoiseBudget<T>) -> Result<Self> {
        let delta_f = self.odmr.gamma / T::TAU();
        let chain = budget.chain(delta_f, T::lit(2.0) * self.odmr.contrast)?;
        self.noise_density = chain.full;
        Ok(self)
    }

    /// Output volts per tesla of source field along `field_direction`.
    pub fn transduction_gain(&self) -> Result<T> {
        self.validate()?;
        let per_axis = small_signal_gain(&self.odmr)?;
        let coupling = self.geometry.coupling(self.field_direction);
        Ok(self.lockin.gain
            * phase_factor(self.phase_deg)
            * self.slope_sign.factor::<T>()
            * per_axis
            * coupling)
    }

    /// Zero-crossing slope in V/Hz of resonance shift of the overlapped pair,
    /// as a calibration would measure it for this configuration.
    pub fn zero_crossing_slope(&self) -> Result<T> {
        let tesla_per_hz = Constants::<T>::si().tesla_per_hz();
        Ok(self.transduction_gain()? * tesla_per_hz / two_axis_angle_factor::<T>())
    }

    /// C_LIA for this configuration.
    pub fn calibration(&self) -> Result<T> {
        calibration_constant(self.zero_crossing_slope()?)
    }

    /// Noise-free-path plus noise, filtered and digitised, as the lock-in
    /// output voltage. `trial` selects an independent random stream under the
    /// same `seed`.
    pub fn synthesize_trial(
        &self,
        true_field: &TimeTrace<T>,
        seed: u64,
        trial: u64,
    ) -> Result<TimeTrace<T>> {
        true_field.expect_unit(Unit::Tesla)?;
        let gain = self.transduction_gain()?;
        let field = resample(true_field, self.sample_rate)?;
        let mut volts: Vec<T> = field.samples().iter().map(|&b| gain * b).collect();
        if self.noise_density > T::zero() {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(trial);
            let sigma = abs(gain) * self.noise_density * self.sample_rate.sqrt();
            for v in volts.iter_mut() {
                let z: f64 = rng.sample(StandardNormal);
                *v += sigma * T::lit(z);
            }
        }
        let raw = TimeTrace::new(self.sample_rate, volts, Unit::Volts)?;
        let filtered = filter_cascade(&raw, &self.lockin)?.trace;
        match &self.digitizer {
            None => Ok(filtered),
            Some(d) => {
                let expand = self.lockin.expand;
                filtered.map(Unit::Volts, |v| d.quantize(v * expand) / expand)
            }
        }
    }

    pub fn synthesize(&self, true_field: &TimeTrace<T>, seed: u64) -> Result<TimeTrace<T>> {
        self.synthesize_trial(true_field, seed, 0)
    }
}

/// Free-function form of [`SensorChain::synthesize`] with the analytic budget
/// supplying the noise floor.
pub fn synthesize_measurement<T: Real>(
    true_field: &TimeTrace<T>,
    odmr: &OdmrParams<T>,
    cfg: &LockInConfig<T>,
    noise: &NoiseBudget<T>,
    seed: u64,
) -> Result<TimeTrace<T>> {
    let chain = SensorChain {
        odmr: *odmr,
        lockin: *cfg,
        ..SensorChain::default()
    }
    .with_budget_noise(noise)?;
    chain.synthesize(true_field, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sensor::calibration::volts_to_field;

    fn field(n: usize, f: impl Fn(f64) -> f64) -> TimeTrace<f64> {
        TimeTrace::from_fn(DEFAULT_SAMPLE_RATE, n, Unit::Tesla, f).unwrap()
    }

    #[test]
    fn digitizer_is_odd_and_clips() {
        let d = Digitizer::<f64>::default();
        for x in [0.0, 1e-5, 0.5 * d.lsb(), 1.5 * d.lsb(), 3.3, 12.0] {
            assert_eq!(d.quantize(-x), -d.quantize(x));
        }
        assert_eq!(d.quantize(12.0), 10.0);
        assert!((d.quantize(0.123456) - 0.123456).abs() <= d.lsb() / 2.0);
    }

    #[test]
    fn phase_factor_exact_quadrants() {
        assert_eq!(phase_factor(0.0f64), 1.0);
        assert_eq!(phase_factor(180.0f64), -1.0);
        assert_eq!(phase_factor(-180.0f64), -1.0);
        assert_eq!(phase_factor(540.0f64), -1.0);
        assert_eq!(phase_factor(90.0f64), 0.0);
        assert!((phase_factor(60.0f64) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn calibration_round_trip_is_identity_gain() {
        let chain = SensorChain::<f64>::default();
        let g = chain.transduction_gain().unwrap();
        let c = chain.calibration().unwrap();
        assert!((c * g - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sinusoid_recovered_in_band() {
        let chain = SensorChain::<f64>::default().without_noise();
        let n = 62_500;
        let b = field(n, |t| 1e-9 * (std::f64::consts::TAU * 250.0 * t).sin());
        let v = chain.synthesize(&b, 1).unwrap();
        let rec = volts_to_field(&v, chain.calibration().unwrap()).unwrap();
        let tail = &rec.samples()[n / 2..];
        let amp = tail.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
        assert!((amp / 1e-9 - 1.0).abs() < 0.05, "amp {amp}");
    }

    #[test]
    fn deterministic_and_streams_differ() {
        let chain = SensorChain::<f64>::default();
        let b = field(5000, |_| 0.0);
        let a1 = chain.synthesize_trial(&b, 9, 3).unwrap();
        let a2 = chain.synthesize_trial(&b, 9, 3).unwrap();
        let a3 = chain.synthesize_trial(&b, 9, 4).unwrap();
        assert_eq!(a1, a2);
        assert_ne!(a1, a3);
    }

    #[test]
    fn requires_tesla_input() {
        let chain = SensorChain::<f64>::default();
        let v = TimeTrace::new(DEFAULT_SAMPLE_RATE, vec![0.0; 10], Unit::Volts).unwrap();
        assert!(chain.synthesize(&v, 0).is_err());
    }

    #[test]
    fn resample_linear() {
        let t = TimeTrace::new(10.0, (0..10).map(|i| i as f64).collect(), Unit::Tesla).unwrap();
        let r = resample(&t, 20.0).unwrap();
        assert_eq!(r.len(), 20);
        assert!((r.samples()[3] - 1.5).abs() < 1e-12);
    }
}
