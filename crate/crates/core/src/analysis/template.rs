//! Matched-filter template construction and filtering.

use crate::analysis::averaging::average;
use crate::analysis::spectral::highpass;
use crate::error::{domain, Error, Result};
use crate::trace::TimeTrace;
use crate::Real;

/// Default template window, s.
pub const DEFAULT_TEMPLATE_WINDOW: f64 = 1.4e-3;
/// High-pass applied to the averaged traces before windowing, Hz.
pub const TEMPLATE_HIGHPASS: f64 = 80.0;

/// Time-reversed expected signal.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchedTemplate<T> {
    samples: Vec<T>,
    sample_rate: T,
    window: T,
    source_count: usize,
    /// Start of the window in the averaged record, samples.
    offset: usize,
    low_energy: bool,
}

impl<T: Real> MatchedTemplate<T> {
    /// Wraps already time-reversed samples (e.g. loaded from disk).
    pub fn from_reversed(samples: Vec<T>, sample_rate: T, source_count: usize) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Empty("template has no samples".into()));
        }
        if !(sample_rate > T::zero()) || samples.iter().any(|x| !x.is_finite()) {
            return Err(domain(
                "template samples must be finite with a positive rate",
            ));
        }
        let energy = samples.iter().fold(T::zero(), |a, &x| a + x * x);
        Ok(Self {
            window: T::from_usize_lossy(samples.len()) / sample_rate,
            samples,
            sample_rate,
            source_count,
            offset: 0,
            low_energy: !(energy > T::zero()),
        })
    }

    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    pub fn sample_rate(&self) -> T {
        self.sample_rate
    }

    pub fn window(&self) -> T {
        self.window
    }

    pub fn source_count(&self) -> usize {
        self.source_count
    }

    pub fn offset(&self) -> usize {
        self.offset
    }

    /// Set when the window holds no more energy than noise would.
    pub fn is_low_energy(&self) -> bool {
        self.low_energy
    }

    /// `Σh²·dt`, the zero-lag autocorrelation peak of the filter.
    pub fn energy(&self) -> T {
        self.samples.iter().fold(T::zero(), |a, &x| a + x * x) / self.sample_rate
    }

    /// The expected signal in forward time.
    pub fn forward(&self) -> Vec<T> {
        self.samples.iter().rev().copied().collect()
    }
}

/// Mean → 80 Hz high-pass → keep a `window`-long span centred between the
/// global maximum and minimum → time-reverse.
pub fn build_template<T: Real>(traces: &[TimeTrace<T>], window: T) -> Result<MatchedTemplate<T>> {
    let mean = average(traces)?;
    let filtered = highpass(&mean, T::lit(TEMPLATE_HIGHPASS))?;
    let n = filtered.len();
    let fs = filtered.sample_rate();
    let len = (window * fs).round().to_usize().unwrap_or(0);
    if len == 0 || len >= n {
        return Err(Error::Window(
            "template window must be shorter than the traces".into(),
        ));
    }
    let x = filtered.samples();
    let imax = (0..n).fold(0, |b, i| if x[i] > x[b] { i } else { b });
    let imin = (0..n).fold(0, |b, i| if x[i] < x[b] { i } else { b });
    let centre = (imax + imin) / 2;
    let start = centre.saturating_sub(len / 2).min(n - len);
    let segment = &x[start..start + len];

    let total = x.iter().fold(T::zero(), |a, &v| a + v * v);
    let inside = segment.iter().fold(T::zero(), |a, &v| a + v * v);
    let uniform = T::from_usize_lossy(len) / T::from_usize_lossy(n);
    let low_energy = !(total > T::zero()) || inside / total < T::lit(3.0) * uniform;

    Ok(MatchedTemplate {
        samples: segment.iter().rev().copied().collect(),
        sample_rate: fs,
        window: T::from_usize_lossy(len) / fs,
        source_count: traces.len(),
        offset: start,
        low_energy,
    })
}

/// Causal discrete convolution `y[n] = dt·Σ_m h[m]·x[n − m]`.
pub fn matched_filter<T: Real>(
    trace: &TimeTrace<T>,
    h: &MatchedTemplate<T>,
) -> Result<TimeTrace<T>> {
    if h.sample_rate != trace.sample_rate() {
        return Err(domain("template and trace sample rates differ"));
    }
    if h.samples.len() >= trace.len() {
        return Err(Error::TooShort {
            needed: h.samples.len() + 1,
            got: trace.len(),
        });
    }
    let dt = trace.dt();
    let x = trace.samples();
    let out = (0..x.len())
        .map(|n| {
            let m_max = n.min(h.samples.len() - 1);
            let mut acc = T::zero();
            for m in 0..=m_max {
                acc += h.samples[m] * x[n - m];
            }
            acc * dt
        })
        .collect();
    trace.with_samples(out, trace.unit())
}
