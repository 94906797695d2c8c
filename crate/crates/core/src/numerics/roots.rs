//! Scalar root finding: bracketed bisection with a secant acceleration, and
//! monotone-function inversion.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Root of `f` in `[a, b]` given `f(a)` and `f(b)` of opposite sign.
/// Bisection with secant steps when they stay inside the bracket.
pub fn bisect<T: Real>(f: &dyn Fn(T) -> T, a: T, b: T, xtol: T, max_iter: usize) -> Result<T> {
    let mut lo = a;
    let mut hi = b;
    let mut flo = f(lo);
    let mut fhi = f(hi);
    if flo == T::zero() {
        return Ok(lo);
    }
    if fhi == T::zero() {
        return Ok(hi);
    }
    if (flo > T::zero()) == (fhi > T::zero()) {
        return Err(Error::RootFind(format!(
            "no sign change on [{}, {}]",
            lo.as_f64(),
            hi.as_f64()
        )));
    }
    for _ in 0..max_iter {
        if (hi - lo).abs() <= xtol {
            break;
        }
        // secant proposal, fall back to midpoint when outside
        let mut x = hi - fhi * (hi - lo) / (fhi - flo);
        let mid = T::of(0.5) * (lo + hi);
        if !(x > lo && x < hi) || (x - mid).abs() > T::of(0.45) * (hi - lo) {
            x = mid;
        }
        let fx = f(x);
        if fx == T::zero() {
            return Ok(x);
        }
        if (fx > T::zero()) == (flo > T::zero()) {
            lo = x;
            flo = fx;
        } else {
            hi = x;
            fhi = fx;
        }
    }
    Ok(T::of(0.5) * (lo + hi))
}

/// All roots of `f` on `[a, b]` found by a scan over `n` cells plus bisection
/// in every sign-change cell. Tangential zeros without sign change are missed
/// by construction; callers needing those must refine `n`.
pub fn scan_roots<T: Real>(f: &dyn Fn(T) -> T, a: T, b: T, n: usize, xtol: T) -> Vec<T> {
    let mut roots = Vec::new();
    let h = (b - a) / T::of(n as f64);
    let mut x0 = a;
    let mut f0 = f(x0);
    for i in 1..=n {
        let x1 = a + h * T::of(i as f64);
        let f1 = f(x1);
        if f0 == T::zero() {
            roots.push(x0);
        } else if f1 != T::zero() && (f0 > T::zero()) != (f1 > T::zero()) {
            // exact zeros at nodes are handled by the f0 branch next turn
            if let Ok(r) = bisect(f, x0, x1, xtol, 200) {
                roots.push(r);
            }
        }
        x0 = x1;
        f0 = f1;
    }
    if f0 == T::zero() {
        roots.push(x0);
    }
    roots
}

/// Invert a strictly monotone function `g` on `[lo, hi]`: solve `g(x) = y`.
/// Newton (when a derivative is supplied) guarded by a shrinking bracket.
pub fn invert_monotone<T: Real>(
    g: &dyn Fn(T) -> T,
    dg: Option<&dyn Fn(T) -> T>,
    lo: T,
    hi: T,
    y: T,
    xtol: T,
) -> Result<T> {
    let increasing = g(hi) > g(lo);
    let mut a = lo;
    let mut b = hi;
    let mut x = T::of(0.5) * (a + b);
    for _ in 0..200 {
        let gx = g(x) - y;
        if gx.abs() == T::zero() || (b - a).abs() <= xtol {
            return Ok(x);
        }
        let below = (gx < T::zero()) == increasing;
        if below {
            a = x;
        } else {
            b = x;
        }
        let mut next = T::of(0.5) * (a + b);
        if let Some(d) = dg {
            let dx = d(x);
            if dx.abs() > T::epsilon() {
                let cand = x - gx / dx;
                if cand > a && cand < b {
                    next = cand;
                }
            }
        }
        x = next;
    }
    Ok(x)
}
