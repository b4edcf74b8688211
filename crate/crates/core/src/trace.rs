//! Uniformly sampled time series, the common currency of the pipeline.

use std::fmt;
use std::str::FromStr;

use crate::error::{domain, Error, Result};
use crate::scalar::abs;
use crate::Real;

/// Physical unit carried by a [`TimeTrace`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Unit {
    Tesla,
    Volts,
    /// Intracellular membrane potential.
    VoltsIntracellular,
    /// Angular frequency, rad/s (drift and detuning traces).
    RadPerSecond,
}

impl Unit {
    pub fn as_str(&self) -> &'static str {
        match self {
            Unit::Tesla => "tesla",
            Unit::Volts => "volts",
            Unit::VoltsIntracellular => "volts_intracellular",
            Unit::RadPerSecond => "rad_per_second",
        }
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Unit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "tesla" => Ok(Unit::Tesla),
            "volts" => Ok(Unit::Volts),
            "volts_intracellular" => Ok(Unit::VoltsIntracellular),
            "rad_per_second" => Ok(Unit::RadPerSecond),
            other => Err(domain(format!("unknown unit tag `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeTrace<T> {
    sample_rate: T,
    samples: Vec<T>,
    unit: Unit,
}

impl<T: Real> TimeTrace<T> {
    /// Builds a trace; the sample rate must be positive and every sample finite.
    pub fn new(sample_rate: T, samples: Vec<T>, unit: Unit) -> Result<Self> {
        if !(sample_rate > T::zero()) || !sample_rate.is_finite() {
            return Err(domain("sample rate must be positive and finite"));
        }
        if let Some(i) = samples.iter().position(|x| !x.is_finite()) {
            return Err(domain(format!("sample {i} is not finite")));
        }
        Ok(Self {
            sample_rate,
            samples,
            unit,
        })
    }

    pub fn zeros(sample_rate: T, len: usize, unit: Unit) -> Result<Self> {
        Self::new(sample_rate, vec![T::zero(); len], unit)
    }

    /// Samples `f(t)` at `t = i / sample_rate` for `i in 0..len`.
    pub fn from_fn(sample_rate: T, len: usize, unit: Unit, f: impl Fn(T) -> T) -> Result<Self> {
        let dt = T::one() / sample_rate;
        let samples = (0..len).map(|i| f(T::from_usize_lossy(i) * dt)).collect();
        Self::new(sample_rate, samples, unit)
    }

    pub fn sample_rate(&self) -> T {
        self.sample_rate
    }

    pub fn dt(&self) -> T {
        T::one() / self.sample_rate
    }

    pub fn unit(&self) -> Unit {
        self.unit
    }

    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<T> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Total duration, `len / sample_rate`.
    pub fn duration(&self) -> T {
        T::from_usize_lossy(self.len()) / self.sample_rate
    }

    pub fn time(&self, index: usize) -> T {
        T::from_usize_lossy(index) / self.sample_rate
    }

    pub fn expect_unit(&self, unit: Unit) -> Result<()> {
        if self.unit == unit {
            Ok(())
        } else {
            Err(Error::UnitMismatch {
                expected: unit,
                found: self.unit,
            })
        }
    }

    /// Same sampling, new samples. Non-finite results are rejected.
    pub fn with_samples(&self, samples: Vec<T>, unit: Unit) -> Result<Self> {
        Self::new(self.sample_rate, samples, unit)
    }

    pub fn map(&self, unit: Unit, f: impl Fn(T) -> T) -> Result<Self> {
        self.with_samples(self.samples.iter().map(|&x| f(x)).collect(), unit)
    }

    pub fn scaled(&self, factor: T) -> Result<Self> {
        self.map(self.unit, |x| x * factor)
    }

    pub fn mean(&self) -> T {
        if self.is_empty() {
            return T::zero();
        }
        self.samples.iter().fold(T::zero(), |a, &x| a + x) / T::from_usize_lossy(self.len())
    }

    /// Root mean square about zero.
    pub fn rms(&self) -> T {
        if self.is_empty() {
            return T::zero();
        }
        let ss = self.samples.iter().fold(T::zero(), |a, &x| a + x * x);
        (ss / T::from_usize_lossy(self.len())).sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.samples.iter().fold(T::zero(), |m, &x| m.max(abs(x)))
    }

    pub fn peak_to_peak(&self) -> T {
        peak_to_peak(&self.samples)
    }

    /// Index range `[start, end)` covering times `t0 <= t < t1`.
    pub fn window_range(&self, t0: T, t1: T) -> Result<std::ops::Range<usize>> {
        if !(t1 > t0) || t0 < T::zero() {
            return Err(Error::Window(format!(
                "window ({t0}, {t1}) must be ordered and non-negative"
            )));
        }
        let start = (t0 * self.sample_rate)
            .ceil()
            .to_usize()
            .unwrap_or(usize::MAX);
        let end = (t1 * self.sample_rate)
            .ceil()
            .to_usize()
            .unwrap_or(usize::MAX);
        if end > self.len() || start >= end {
            return Err(Error::Window(format!(
                "window ({t0}, {t1}) s outside trace of duration {}",
                self.duration()
            )));
        }
        Ok(start..end)
    }

    pub fn window(&self, t0: T, t1: T) -> Result<&[T]> {
        let r = self.window_range(t0, t1)?;
        Ok(&self.samples[r])
    }
}

pub(crate) fn peak_to_peak<T: Real>(xs: &[T]) -> T {
    if xs.is_empty() {
        return T::zero();
    }
    let (lo, hi) = xs
        .iter()
        .fold((xs[0], xs[0]), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    hi - lo
}

pub(crate) fn mean<T: Real>(xs: &[T]) -> T {
    if xs.is_empty() {
        return T::zero();
    }
    xs.iter().fold(T::zero(), |a, &x| a + x) / T::from_usize_lossy(xs.len())
}

/// Population standard deviation.
pub(crate) fn std_dev<T: Real>(xs: &[T]) -> T {
    if xs.is_empty() {
        return T::zero();
    }
    let m = mean(xs);
    let ss = xs.iter().fold(T::zero(), |a, &x| a + (x - m) * (x - m));
    (ss / T::from_usize_lossy(xs.len())).sqrt()
}
