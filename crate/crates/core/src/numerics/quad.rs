//! Quadrature: adaptive Simpson with error control and fixed Gauss-Legendre
//! panels for smooth integrands.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// 8-point Gauss-Legendre nodes (positive half) and weights on `[-1, 1]`.
const GL8_NODES: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329_0,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_2,
];
const GL8_WEIGHTS: [f64; 4] = [
    0.362_683_783_378_362_0,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// One 8-point Gauss-Legendre panel over `[a, b]`.
pub fn gauss8<T: Real>(f: &dyn Fn(T) -> T, a: T, b: T) -> T {
    let half = T::of(0.5) * (b - a);
    let mid = T::of(0.5) * (a + b);
    let mut acc = T::zero();
    for i in 0..4 {
        let x = T::of(GL8_NODES[i]) * half;
        let w = T::of(GL8_WEIGHTS[i]);
        acc += w * (f(mid + x) + f(mid - x));
    }
    acc * half
}

/// Composite Gauss-Legendre with `n` equal panels.
pub fn gauss8_composite<T: Real>(f: &dyn Fn(T) -> T, a: T, b: T, n: usize) -> T {
    let n = n.max(1);
    let h = (b - a) / T::of(n as f64);
    let mut acc = T::zero();
    for i in 0..n {
        let lo = a + h * T::of(i as f64);
        acc += gauss8(f, lo, lo + h);
    }
    acc
}

/// Adaptive Simpson quadrature to absolute tolerance `tol`.
pub fn adaptive_simpson<T: Real>(f: &dyn Fn(T) -> T, a: T, b: T, tol: T) -> Result<T> {
    if a == b {
        return Ok(T::zero());
    }
    let fa = f(a);
    let fb = f(b);
    let m = T::of(0.5) * (a + b);
    let fm = f(m);
    let whole = simpson_rule(a, b, fa, fm, fb);
    let mut evals = 3usize;
    let v = simpson_recurse(f, a, b, fa, fm, fb, whole, tol, 52, &mut evals)?;
    Ok(v)
}

fn simpson_rule<T: Real>(a: T, b: T, fa: T, fm: T, fb: T) -> T {
    (b - a) / T::of(6.0) * (fa + T::of(4.0) * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn simpson_recurse<T: Real>(
    f: &dyn Fn(T) -> T,
    a: T,
    b: T,
    fa: T,
    fm: T,
    fb: T,
    whole: T,
    tol: T,
    depth: usize,
    evals: &mut usize,
) -> Result<T> {
    let m = T::of(0.5) * (a + b);
    let lm = T::of(0.5) * (a + m);
    let rm = T::of(0.5) * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    *evals += 2;
    if *evals > 4_000_000 {
        return Err(Error::Quadrature(format!(
            "evaluation budget exhausted on [{}, {}]",
            a.as_f64(),
            b.as_f64()
        )));
    }
    let left = simpson_rule(a, m, fa, flm, fm);
    let right = simpson_rule(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 {
        return Err(Error::Quadrature(format!(
            "max depth reached on [{}, {}], residual {:e}",
            a.as_f64(),
            b.as_f64(),
            delta.as_f64()
        )));
    }
    if delta.abs() <= T::of(15.0) * tol {
        return Ok(left + right + delta / T::of(15.0));
    }
    let half_tol = T::of(0.5) * tol;
    let l = simpson_recurse(f, a, m, fa, flm, fm, left, half_tol, depth - 1, evals)?;
    let r = simpson_recurse(f, m, b, fm, frm, fb, right, half_tol, depth - 1, evals)?;
    Ok(l + r)
}
