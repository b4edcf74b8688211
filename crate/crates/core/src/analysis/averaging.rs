//! Trigger alignment and averaging of repeated trials.

use crate::error::{domain, Error, Result};
use crate::trace::TimeTrace;
use crate::Real;

/// Which extremum of the trigger trace marks the event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Extremum {
    #[default]
    Max,
    Min,
}

/// Averaged trace plus bookkeeping of rejected trials.
#[derive(Debug, Clone, PartialEq)]
pub struct Averaged<T> {
    pub average: TimeTrace<T>,
    pub used: usize,
    /// Indices of trials whose trigger had no extremum.
    pub rejected: Vec<usize>,
}

fn check_compatible<T: Real>(traces: &[TimeTrace<T>]) -> Result<()> {
    let first = traces
        .first()
        .ok_or_else(|| Error::Empty("no traces to average".into()))?;
    for (i, t) in traces.iter().enumerate() {
        if t.len() != first.len() || t.sample_rate() != first.sample_rate() {
            return Err(domain(format!(
                "trace {i} has a different length or sample rate"
            )));
        }
        t.expect_unit(first.unit())?;
    }
    Ok(())
}

/// Pointwise mean of traces already aligned (stimulus-locked acquisition).
pub fn average<T: Real>(traces: &[TimeTrace<T>]) -> Result<TimeTrace<T>> {
    check_compatible(traces)?;
    let n = traces[0].len();
    let mut acc = vec![T::zero(); n];
    for t in traces {
        for (a, &x) in acc.iter_mut().zip(t.samples()) {
            *a += x;
        }
    }
    let inv = T::one() / T::from_usize_lossy(traces.len());
    traces[0].with_samples(acc.into_iter().map(|a| a * inv).collect(), traces[0].unit())
}

fn extremum_index<T: Real>(xs: &[T], which: Extremum) -> Option<usize> {
    let (lo, hi) = xs
        .iter()
        .fold((T::infinity(), T::neg_infinity()), |(l, h), &x| {
            (l.min(x), h.max(x))
        });
    if xs.is_empty() || !(hi > lo) {
        return None;
    }
    let target = match which {
        Extremum::Max => hi,
        Extremum::Min => lo,
    };
    xs.iter().position(|&x| x == target)
}

/// Circularly shifts `trace` so the chosen extremum of `trigger` lands on
/// sample `reference`. `None` when the trigger is flat.
pub fn align_to<T: Real>(
    trace: &TimeTrace<T>,
    trigger: &TimeTrace<T>,
    reference: usize,
    which: Extremum,
) -> Result<Option<TimeTrace<T>>> {
    let n = trace.len();
    if trigger.len() != n || reference >= n {
        return Err(domain(
            "trigger length or reference index does not match the trace",
        ));
    }
    let Some(idx) = extremum_index(trigger.samples(), which) else {
        return Ok(None);
    };
    let shift = (reference + n - idx) % n;
    let mut out = vec![T::zero(); n];
    for (k, &x) in trace.samples().iter().enumerate() {
        out[(k + shift) % n] = x;
    }
    Ok(Some(trace.with_samples(out, trace.unit())?))
}

/// Index of the chosen extremum, `None` for a flat or empty record.
pub fn trigger_index<T: Real>(trigger: &TimeTrace<T>, which: Extremum) -> Option<usize> {
    extremum_index(trigger.samples(), which)
}

/// Shifts each trace circularly so its trigger extremum lands on that of the
/// first usable trigger, then averages. Flat triggers are rejected.
pub fn align_and_average<T: Real>(
    traces: &[TimeTrace<T>],
    triggers: &[TimeTrace<T>],
    which: Extremum,
) -> Result<Averaged<T>> {
    if traces.len() != triggers.len() {
        return Err(domain("trace and trigger counts differ"));
    }
    check_compatible(traces)?;
    let n = traces[0].len();
    let mut reference = None;
    let mut acc = vec![T::zero(); n];
    let mut used = 0usize;
    let mut rejected = Vec::new();
    for (i, (trace, trig)) in traces.iter().zip(triggers).enumerate() {
        if trig.len() != n {
            return Err(domain(format!("trigger {i} length differs from its trace")));
        }
        let Some(idx) = extremum_index(trig.samples(), which) else {
            rejected.push(i);
            continue;
        };
        let r = *reference.get_or_insert(idx);
        let shift = (r + n - idx) % n;
        for (k, &x) in trace.samples().iter().enumerate() {
            acc[(k + shift) % n] += x;
        }
        used += 1;
    }
    if used == 0 {
        return Err(Error::Empty("every trigger trace was flat".into()));
    }
    let inv = T::one() / T::from_usize_lossy(used);
    let average =
        traces[0].with_samples(acc.into_iter().map(|a| a * inv).collect(), traces[0].unit())?;
    Ok(Averaged {
        average,
        used,
        rejected,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Unit;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rotated(xs: &[f64], by: usize) -> Vec<f64> {
        let n = xs.len();
        (0..n).map(|k| xs[(k + n - by) % n]).collect()
    }

    #[test]
    fn shifted_copies_realign_exactly() {
        let base: Vec<f64> = (0..200)
            .map(|k| (-(k as f64 - 80.0).powi(2) / 50.0).exp())
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut traces = Vec::new();
        let mut triggers = Vec::new();
        for _ in 0..20 {
            let s = rng.random_range(0..60);
            let t = TimeTrace::new(1e3, rotated(&base, s), Unit::Tesla).unwrap();
            triggers.push(t.clone());
            traces.push(t);
        }
        let first_shift = traces[0].samples().iter().position(|&x| x == 1.0).unwrap() - 80;
        let out = align_and_average(&traces, &triggers, Extremum::Max).unwrap();
        let expected = rotated(&base, first_shift);
        for (a, b) in out.average.samples().iter().zip(&expected) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(out.used, 20);
    }

    #[test]
    fn flat_triggers_rejected() {
        let t = TimeTrace::new(1e3, vec![1.0, 2.0, 3.0], Unit::Tesla).unwrap();
        let flat = TimeTrace::new(1e3, vec![0.0; 3], Unit::Volts).unwrap();
        let out = align_and_average(
            &[t.clone(), t.clone()],
            &[flat.clone(), t.clone()],
            Extremum::Max,
        )
        .unwrap();
        assert_eq!(out.rejected, vec![0]);
        assert_eq!(out.used, 1);
        assert!(align_and_average(std::slice::from_ref(&t), &[flat], Extremum::Min).is_err());
        assert!(average::<f64>(&[]).is_err());
    }

    #[test]
    fn mismatched_inputs_rejected() {
        let a = TimeTrace::new(1e3, vec![0.0; 4], Unit::Tesla).unwrap();
        let b = TimeTrace::new(1e3, vec![0.0; 5], Unit::Tesla).unwrap();
        assert!(average(&[a.clone(), b]).is_err());
        let v = TimeTrace::new(1e3, vec![0.0; 4], Unit::Volts).unwrap();
        assert!(average(&[a, v]).is_err());
    }
}
