//! Small one-dimensional numerical routines.

use crate::Real;

/// Golden-section search for the maximum of a unimodal `f` on `[lo, hi]`.
/// Returns the abscissa once the bracket is narrower than `tol`.
pub fn golden_section_max<T: Real>(f: impl Fn(T) -> T, mut lo: T, mut hi: T, tol: T) -> T {
    let inv_phi = (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0);
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        if fc > fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }
    (lo + hi) / T::lit(2.0)
}

pub fn golden_section_min<T: Real>(f: impl Fn(T) -> T, lo: T, hi: T, tol: T) -> T {
    golden_section_max(|x| -f(x), lo, hi, tol)
}

/// Bisection for a sign change of `f` on `[lo, hi]`. `None` if the ends do
/// not bracket a root.
pub fn bisect<T: Real>(f: impl Fn(T) -> T, mut lo: T, mut hi: T, tol: T) -> Option<T> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == T::zero() {
        return Some(lo);
    }
    if fhi == T::zero() {
        return Some(hi);
    }
    if (flo > T::zero()) == (fhi > T::zero()) {
        return None;
    }
    for _ in 0..300 {
        let mid = (lo + hi) / T::lit(2.0);
        if hi - lo <= tol {
            return Some(mid);
        }
        let fm = f(mid);
        if fm == T::zero() {
            return Some(mid);
        }
        if (fm > T::zero()) == (flo > T::zero()) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Some((lo + hi) / T::lit(2.0))
}

/// Ordinary least squares line `y = a + b x`. `None` when x has no spread.
pub fn fit_line<T: Real>(x: &[T], y: &[T]) -> Option<(T, T)> {
    let n = T::from_usize_lossy(x.len().min(y.len()));
    if x.len() < 2 || x.len() != y.len() {
        return None;
    }
    let mx = x.iter().fold(T::zero(), |a, &v| a + v) / n;
    let my = y.iter().fold(T::zero(), |a, &v| a + v) / n;
    let (mut sxy, mut sxx) = (T::zero(), T::zero());
    for (&xi, &yi) in x.iter().zip(y) {
        sxy += (xi - mx) * (yi - my);
        sxx += (xi - mx) * (xi - mx);
    }
    if sxx == T::zero() {
        return None;
    }
    let b = sxy / sxx;
    Some((my - b * mx, b))
}
