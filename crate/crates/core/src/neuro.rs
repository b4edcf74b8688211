//! Action-potential magnetic field of an axon treated as a conducting wire.
//!
//! For a pulse travelling at `v_c`, `∂Φ/∂t = −v_c·∂Φ/∂z`, so the axial current
//! and the azimuthal field at distance ρ follow the intracellular voltage's
//! time derivative: `B = s·dΦ/dt` with `s = μ₀r_a²σ/(2v_cρ)`. Return currents
//! outside the axon are neglected. That is reasonable close to the
//! membrane, but the same model is used unchanged for millimetre standoffs.

use crate::constants::Constants;
use crate::error::{domain, Error, Result};
use crate::scalar::abs;
use crate::trace::TimeTrace;
use crate::{Real, Unit};

/// Propagation sense along the +y axon axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Direction {
    /// Towards +y (posterior stimulation in the worm).
    #[default]
    Anterograde,
    /// Towards −y.
    Retrograde,
}

impl Direction {
    pub fn sign<T: Real>(self) -> T {
        match self {
            Direction::Anterograde => T::one(),
            Direction::Retrograde => -T::one(),
        }
    }

    pub fn reversed(self) -> Self {
        match self {
            Direction::Anterograde => Direction::Retrograde,
            Direction::Retrograde => Direction::Anterograde,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxonParams<T> {
    /// Axon radius, m.
    pub r_a: T,
    /// Distance from the axon centre to the field point, m.
    pub rho: T,
    /// Axoplasm conductivity, S/m.
    pub sigma: T,
    /// Conduction velocity, m/s.
    pub v_c: T,
    pub direction: Direction,
}

impl<T: Real> AxonParams<T> {
    pub fn validate(&self) -> Result<()> {
        let all_finite = [self.r_a, self.rho, self.sigma, self.v_c]
            .iter()
            .all(|x| x.is_finite());
        if !all_finite {
            return Err(domain("axon parameters must be finite"));
        }
        if !(self.r_a > T::zero()) {
            return Err(domain("axon radius must be positive"));
        }
        if !(self.rho >= self.r_a) {
            return Err(domain(
                "field point must lie at or outside the axon surface",
            ));
        }
        if !(self.sigma > T::zero()) {
            return Err(domain("axoplasm conductivity must be positive"));
        }
        if !(self.v_c > T::zero()) {
            return Err(domain("conduction velocity must be positive"));
        }
        Ok(())
    }

    /// Excised giant-axon worm preparation pressed against the diamond:
    /// 200 μm radius, 300 μm standoff, 11 m/s.
    pub fn worm_excised() -> Self {
        Self {
            r_a: T::lit(200e-6),
            rho: T::lit(300e-6),
            sigma: T::lit(1.0),
            v_c: T::lit(11.0),
            direction: Direction::Anterograde,
        }
    }

    /// Intact worm: same axon, 1.2 mm from the sensor.
    pub fn worm_whole() -> Self {
        Self {
            rho: T::lit(1.2e-3),
            ..Self::worm_excised()
        }
    }

    /// Squid giant axon.
    pub fn squid() -> Self {
        Self {
            r_a: T::lit(250e-6),
            rho: T::lit(350e-6),
            sigma: T::lit(1.47),
            v_c: T::lit(20.0),
            direction: Direction::Anterograde,
        }
    }

    /// Cerebellar Purkinje axon evaluated at its surface.
    pub fn purkinje(r_a: T) -> Self {
        Self {
            r_a,
            rho: r_a,
            sigma: T::lit(0.66),
            v_c: T::lit(0.25),
            direction: Direction::Anterograde,
        }
    }

    pub fn with_direction(mut self, direction: Direction) -> Self {
        self.direction = direction;
        self
    }
}

impl<T: Real> Default for AxonParams<T> {
    fn default() -> Self {
        Self::worm_excised()
    }
}

/// `s = μ₀r_a²σ/(2v_cρ)`, T per V/s.
pub fn scaling_constant<T: Real>(p: &AxonParams<T>) -> Result<T> {
    p.validate()?;
    let mu0 = Constants::<T>::si().mu0;
    Ok(mu0 * p.r_a * p.r_a * p.sigma / (T::lit(2.0) * p.v_c * p.rho))
}

/// Second-order finite-difference derivative: central inside, one-sided
/// three-point stencils at the ends.
pub fn derivative<T: Real>(trace: &TimeTrace<T>) -> Result<Vec<T>> {
    let x = trace.samples();
    let n = x.len();
    if n < 3 {
        return Err(Error::TooShort { needed: 3, got: n });
    }
    let fs = trace.sample_rate();
    let half = fs / T::lit(2.0);
    let mut d = Vec::with_capacity(n);
    d.push((-T::lit(3.0) * x[0] + T::lit(4.0) * x[1] - x[2]) * half);
    for i in 1..n - 1 {
        d.push((x[i + 1] - x[i - 1]) * half);
    }
    d.push((T::lit(3.0) * x[n - 1] - T::lit(4.0) * x[n - 2] + x[n - 3]) * half);
    Ok(d)
}

/// Azimuthal field `±s·dΦ/dt`; retrograde propagation negates.
pub fn ap_field_from_voltage<T: Real>(
    phi: &TimeTrace<T>,
    p: &AxonParams<T>,
) -> Result<TimeTrace<T>> {
    if !matches!(phi.unit(), Unit::VoltsIntracellular | Unit::Volts) {
        return Err(Error::UnitMismatch {
            expected: Unit::VoltsIntracellular,
            found: phi.unit(),
        });
    }
    let s = scaling_constant(p)? * p.direction.sign::<T>();
    let d = derivative(phi)?;
    phi.with_samples(d.into_iter().map(|v| s * v).collect(), Unit::Tesla)
}

/// Parametric action-potential voltage: raised-cosine rise and fall, then an
/// optional sin² undershoot lasting twice the fall time. Continuous with
/// continuous first derivative everywhere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApTemplate<T> {
    /// Φ₀, V.
    pub resting_potential: T,
    /// Peak excursion above Φ₀, V.
    pub peak_amplitude: T,
    pub rise_time: T,
    pub fall_time: T,
    /// Undershoot depth as a fraction of the amplitude.
    pub undershoot_fraction: T,
    /// Record length, s.
    pub duration: T,
    /// Time of rise start within the record, s.
    pub onset: T,
}

impl<T: Real> ApTemplate<T> {
    pub fn validate(&self) -> Result<()> {
        let v = *self;
        let all_finite = [
            v.resting_potential,
            v.peak_amplitude,
            v.rise_time,
            v.fall_time,
            v.undershoot_fraction,
            v.duration,
            v.onset,
        ]
        .iter()
        .all(|x| x.is_finite());
        if !all_finite {
            return Err(domain("template parameters must be finite"));
        }
        if !(v.resting_potential >= T::lit(-0.1) && v.resting_potential <= T::zero()) {
            return Err(domain("resting potential must lie in [-100, 0] mV"));
        }
        if !(v.peak_amplitude > T::zero() && v.peak_amplitude < T::lit(0.2)) {
            return Err(domain("peak amplitude must lie in (0, 200) mV"));
        }
        if !(v.rise_time > T::zero() && v.fall_time > T::zero()) {
            return Err(domain("rise and fall times must be positive"));
        }
        if !(v.undershoot_fraction >= T::zero()) {
            return Err(domain("undershoot fraction must be non-negative"));
        }
        if !(v.onset >= T::zero() && v.duration > T::zero()) {
            return Err(domain("onset must be non-negative and duration positive"));
        }
        Ok(())
    }

    /// Worm giant axon: Φ₀ = −70 mV, 105 mV spike, no overshoot below rest.
    pub fn worm() -> Self {
        Self {
            resting_potential: T::lit(-0.070),
            peak_amplitude: T::lit(0.105),
            rise_time: T::lit(0.46e-3),
            fall_time: T::lit(0.92e-3),
            undershoot_fraction: T::zero(),
            duration: T::lit(4e-3),
            onset: T::lit(0.5e-3),
        }
    }

    /// Squid giant axon with an after-hyperpolarisation.
    pub fn squid() -> Self {
        Self {
            resting_potential: T::lit(-0.065),
            peak_amplitude: T::lit(0.100),
            rise_time: T::lit(0.3e-3),
            fall_time: T::lit(0.5e-3),
            undershoot_fraction: T::lit(0.15),
            duration: T::lit(4e-3),
            onset: T::lit(0.5e-3),
        }
    }

    /// Purkinje spike whose steepest rise is 339 V/s.
    pub fn purkinje() -> Self {
        let amplitude = 0.100;
        Self {
            resting_potential: T::lit(-0.065),
            peak_amplitude: T::lit(amplitude),
            rise_time: T::lit(std::f64::consts::FRAC_PI_2 * amplitude / 339.0),
            fall_time: T::lit(0.6e-3),
            undershoot_fraction: T::zero(),
            duration: T::lit(4e-3),
            onset: T::lit(0.5e-3),
        }
    }

    pub fn with_timing(mut self, onset: T, duration: T) -> Self {
        self.onset = onset;
        self.duration = duration;
        self
    }

    /// Time from onset until the voltage is back at rest.
    pub fn pulse_length(&self) -> T {
        let tail = if self.undershoot_fraction > T::zero() {
            T::lit(2.0) * self.fall_time
        } else {
            T::zero()
        };
        self.rise_time + self.fall_time + tail
    }

    /// Voltage at absolute time `t` in the record.
    pub fn voltage(&self, t: T) -> T {
        let pi = T::PI();
        let half = T::lit(0.5);
        let a = self.peak_amplitude;
        let u = t - self.onset;
        let excursion = if u <= T::zero() {
            T::zero()
        } else if u < self.rise_time {
            a * half * (T::one() - (pi * u / self.rise_time).cos())
        } else if u < self.rise_time + self.fall_time {
            let w = (u - self.rise_time) / self.fall_time;
            a * half * (T::one() + (pi * w).cos())
        } else if u < self.pulse_length() {
            let w = (u - self.rise_time - self.fall_time) / (T::lit(2.0) * self.fall_time);
            let s = (pi * w).sin();
            -self.undershoot_fraction * a * s * s
        } else {
            T::zero()
        };
        self.resting_potential + excursion
    }

    /// Peak-to-peak of the analytic dΦ/dt.
    pub fn slope_peak_to_peak(&self) -> T {
        let a = self.peak_amplitude * T::FRAC_PI_2();
        a / self.rise_time + a / self.fall_time
    }
}

impl<T: Real> Default for ApTemplate<T> {
    fn default() -> Self {
        Self::worm()
    }
}

/// Samples the template over its `duration`.
pub fn synth_ap_waveform<T: Real>(t: &ApTemplate<T>, sample_rate: T) -> Result<TimeTrace<T>> {
    t.validate()?;
    if !(sample_rate > T::zero() && sample_rate.is_finite()) {
        return Err(domain("sample rate must be positive"));
    }
    let n = (t.duration * sample_rate).round().to_usize().unwrap_or(0);
    TimeTrace::from_fn(sample_rate, n, Unit::VoltsIntracellular, |time| {
        t.voltage(time)
    })
}

/// Fields for stimulation at the posterior (slower, anterograde) and anterior
/// (faster, retrograde) ends of a tapered axon with the same voltage.
pub fn taper_scenario<T: Real>(
    v_post: T,
    v_ant: T,
    base: &AxonParams<T>,
    phi: &TimeTrace<T>,
) -> Result<(TimeTrace<T>, TimeTrace<T>)> {
    if !(v_post <= v_ant) {
        return Err(domain(
            "posterior-stimulated conduction must not be faster than anterior",
        ));
    }
    let post = AxonParams {
        v_c: v_post,
        direction: Direction::Anterograde,
        ..*base
    };
    let ant = AxonParams {
        v_c: v_ant,
        direction: Direction::Retrograde,
        ..*base
    };
    Ok((
        ap_field_from_voltage(phi, &post)?,
        ap_field_from_voltage(phi, &ant)?,
    ))
}

/// Predicted amplitude ratio `B(ρ₁)/B(ρ₂) = ρ₂/ρ₁`.
pub fn standoff_scaling<T: Real>(rho1: T, rho2: T) -> Result<T> {
    if !(rho1 > T::zero() && rho2 > T::zero() && rho1.is_finite() && rho2.is_finite()) {
        return Err(domain("standoff distances must be positive"));
    }
    Ok(rho2 / rho1)
}

/// Order-of-magnitude surface field of a Purkinje axon, `μ₀r_aσ·(dΦ/dt)/(2v_c)`
/// with σ = 0.66 S/m, dΦ/dt = 339 V/s, v_c = 0.25 m/s.
pub fn purkinje_estimate<T: Real>(r_a: T) -> Result<T> {
    let p = AxonParams::purkinje(r_a);
    Ok(scaling_constant(&p)? * T::lit(339.0))
}

/// Result of a two-electrode velocity measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VelocityEstimate<T> {
    pub speed: T,
    /// Anterograde when the pulse reaches point 2 (at larger y) last.
    pub direction: Direction,
}

pub fn conduction_velocity_two_point<T: Real>(
    t_peak_1: T,
    t_peak_2: T,
    separation: T,
) -> Result<VelocityEstimate<T>> {
    if !(separation > T::zero() && separation.is_finite()) {
        return Err(domain("electrode separation must be positive"));
    }
    let dt = t_peak_2 - t_peak_1;
    if !dt.is_finite() || dt == T::zero() {
        return Err(Error::Singular(
            "coincident arrival times give no velocity".into(),
        ));
    }
    Ok(VelocityEstimate {
        speed: separation / abs(dt),
        direction: if dt > T::zero() {
            Direction::Anterograde
        } else {
            Direction::Retrograde
        },
    })
}

/// Propagation direction read from the sign of the first lobe exceeding half
/// the peak |B|; a single measurement point suffices.
pub fn leading_lobe_direction<T: Real>(b: &TimeTrace<T>) -> Option<Direction> {
    let peak = b.max_abs();
    if !(peak > T::zero()) {
        return None;
    }
    let threshold = peak / T::lit(2.0);
    b.samples()
        .iter()
        .find(|x| abs(**x) >= threshold)
        .map(|&x| {
            if x > T::zero() {
                Direction::Anterograde
            } else {
                Direction::Retrograde
            }
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const FS: f64 = 250e3;

    #[test]
    fn scaling_constant_dependencies() {
        let p = AxonParams::<f64>::worm_excised();
        let s = scaling_constant(&p).unwrap();
        let fast = AxonParams {
            v_c: 2.0 * p.v_c,
            ..p
        };
        let far = AxonParams {
            rho: 2.0 * p.rho,
            ..p
        };
        assert!((scaling_constant(&fast).unwrap() * 2.0 - s).abs() < 1e-24);
        assert!((scaling_constant(&far).unwrap() * 2.0 - s).abs() < 1e-24);
        let inside = AxonParams {
            rho: 0.5 * p.r_a,
            ..p
        };
        assert!(scaling_constant(&inside).is_err());
        let still = AxonParams { v_c: 0.0, ..p };
        assert!(scaling_constant(&still).is_err());
    }

    #[test]
    fn template_shape() {
        let t = ApTemplate::<f64>::worm();
        let phi = synth_ap_waveform(&t, FS).unwrap();
        let max = phi.samples().iter().cloned().fold(f64::MIN, f64::max);
        assert!((max - 0.035).abs() < 1e-6);
        assert!(phi
            .samples()
            .iter()
            .all(|&v| v >= t.resting_potential - 1e-15));
        assert!((phi.samples()[0] - t.resting_potential).abs() < 1e-15);
        assert!((phi.samples()[phi.len() - 1] - t.resting_potential).abs() < 1e-15);
        assert!(t.slope_peak_to_peak() > 530.0 && t.slope_peak_to_peak() < 545.0);
    }

    #[test]
    fn squid_undershoot_goes_below_rest_and_returns() {
        let t = ApTemplate::<f64>::squid();
        let phi = synth_ap_waveform(&t, FS).unwrap();
        let min = phi.samples().iter().cloned().fold(f64::MAX, f64::min);
        assert!((min - (t.resting_potential - 0.15 * t.peak_amplitude)).abs() < 1e-6);
        let b = ap_field_from_voltage(&phi, &AxonParams::squid()).unwrap();
        let integral: f64 = b.samples().iter().sum::<f64>() / FS;
        assert!(integral.abs() < 1e-3 * b.max_abs() / FS);
    }

    #[test]
    fn template_is_c1() {
        let t = ApTemplate::<f64>::squid();
        let h = 1e-9;
        let knots = [
            t.onset,
            t.onset + t.rise_time,
            t.onset + t.rise_time + t.fall_time,
            t.onset + t.pulse_length(),
        ];
        for k in knots {
            let left = (t.voltage(k) - t.voltage(k - h)) / h;
            let right = (t.voltage(k + h) - t.voltage(k)) / h;
            assert!(
                (left - right).abs() < 1e-2 * t.slope_peak_to_peak(),
                "knot {k}"
            );
        }
    }

    #[test]
    fn field_noise_free_properties() {
        let t = ApTemplate::<f64>::worm();
        let phi = synth_ap_waveform(&t, FS).unwrap();
        let p = AxonParams::<f64>::worm_excised();
        let b = ap_field_from_voltage(&phi, &p).unwrap();
        let s = scaling_constant(&p).unwrap();
        assert!((b.peak_to_peak() / (s * t.slope_peak_to_peak()) - 1.0).abs() < 1e-3);
        // peak |B| at max slope, not at the voltage peak
        let i_b = (0..b.len())
            .max_by(|&i, &j| b.samples()[i].partial_cmp(&b.samples()[j]).unwrap())
            .unwrap();
        let i_phi = (0..phi.len())
            .max_by(|&i, &j| phi.samples()[i].partial_cmp(&phi.samples()[j]).unwrap())
            .unwrap();
        assert!(i_b < i_phi);
        let t_max_slope = t.onset + t.rise_time / 2.0;
        assert!((b.time(i_b) - t_max_slope).abs() <= 1.0 / FS);
        let back = ap_field_from_voltage(&phi, &p.with_direction(Direction::Retrograde)).unwrap();
        for (a, r) in b.samples().iter().zip(back.samples()) {
            assert_eq!(*a, -*r);
        }
        assert_eq!(leading_lobe_direction(&b), Some(Direction::Anterograde));
        assert_eq!(leading_lobe_direction(&back), Some(Direction::Retrograde));
    }

    #[test]
    fn constant_voltage_zero_field_and_short_trace() {
        let phi = TimeTrace::new(FS, vec![-0.07; 100], Unit::VoltsIntracellular).unwrap();
        let b = ap_field_from_voltage(&phi, &AxonParams::default()).unwrap();
        assert!(b.max_abs() < 1e-20);
        let short = TimeTrace::new(FS, vec![0.0; 2], Unit::VoltsIntracellular).unwrap();
        assert!(matches!(
            ap_field_from_voltage(&short, &AxonParams::default()),
            Err(Error::TooShort { .. })
        ));
    }

    #[test]
    fn two_point_velocity() {
        let v = conduction_velocity_two_point(0.0f64, 1e-3, 9e-3).unwrap();
        assert!((v.speed - 9.0).abs() < 1e-9);
        assert_eq!(v.direction, Direction::Anterograde);
        let w = conduction_velocity_two_point(1e-3f64, 0.0, 18e-3).unwrap();
        assert!((w.speed - 18.0).abs() < 1e-9);
        assert_eq!(w.direction, Direction::Retrograde);
        assert!(conduction_velocity_two_point(1e-3, 1e-3, 1e-3).is_err());
    }

    #[test]
    fn taper_requires_ordering() {
        let phi = synth_ap_waveform(&ApTemplate::<f64>::worm(), FS).unwrap();
        assert!(taper_scenario(10.0, 6.0, &AxonParams::default(), &phi).is_err());
        let (a, b) = taper_scenario(9.0, 9.0, &AxonParams::default(), &phi).unwrap();
        for (x, y) in a.samples().iter().zip(b.samples()) {
            assert_eq!(*x, -*y);
        }
    }

    #[test]
    fn standoff() {
        assert!((standoff_scaling(300e-6f64, 1.2e-3).unwrap() - 4.0).abs() < 1e-12);
        assert_eq!(standoff_scaling(1e-3, 1e-3).unwrap(), 1.0);
        assert!(standoff_scaling(0.0, 1e-3).is_err());
    }

    #[test]
    fn single_precision_template() {
        let t = ApTemplate::<f32>::worm();
        let phi = synth_ap_waveform(&t, 250e3f32).unwrap();
        let b = ap_field_from_voltage(&phi, &AxonParams::<f32>::worm_excised()).unwrap();
        assert!((b.peak_to_peak() / 4.1e-9 - 1.0).abs() < 0.05);
    }

    proptest! {
        #[test]
        fn field_linear_in_voltage(scale in 0.1f64..1.5, sigma in 0.2f64..3.0) {
            let t = ApTemplate::<f64>::worm();
            let phi = synth_ap_waveform(&t, FS).unwrap();
            let scaled = phi.scaled(scale).unwrap();
            let p = AxonParams { sigma, ..AxonParams::worm_excised() };
            let b1 = ap_field_from_voltage(&phi, &p).unwrap();
            let b2 = ap_field_from_voltage(&scaled, &p).unwrap();
            for (x, y) in b1.samples().iter().zip(b2.samples()) {
                prop_assert!((x * scale - y).abs() <= 1e-12 * b1.max_abs());
            }
        }
    }
}
