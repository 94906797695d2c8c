//! Finite-difference probes used by tests and verification code, never by the
//! construction of fields or maps themselves.

use crate::scalar::Real;

/// Central difference first derivative.
pub fn central1<T: Real>(f: &dyn Fn(T) -> T, x: T, h: T) -> T {
    (f(x + h) - f(x - h)) / (T::of(2.0) * h)
}

/// Five-point central first derivative, error `O(h^4)`.
pub fn central1_order4<T: Real>(f: &dyn Fn(T) -> T, x: T, h: T) -> T {
    let two = T::of(2.0);
    (f(x - two * h) - T::of(8.0) * f(x - h) + T::of(8.0) * f(x + h) - f(x + two * h))
        / (T::of(12.0) * h)
}

/// Coordinate divergence of a 3-component field at `q` (constant-density
/// charts: divergence is the plain sum of coordinate partials).
pub fn divergence3<T: Real>(field: &dyn Fn([T; 3]) -> [T; 3], q: [T; 3], h: T) -> T {
    let mut acc = T::zero();
    for i in 0..3 {
        let mut qp = q;
        let mut qm = q;
        qp[i] += h;
        qm[i] -= h;
        acc += (field(qp)[i] - field(qm)[i]) / (T::of(2.0) * h);
    }
    acc
}

/// Lie bracket `[x, y]^i = x^j d_j y^i - y^j d_j x^i` by central differences.
pub fn lie_bracket3<T: Real>(
    x: &dyn Fn([T; 3]) -> [T; 3],
    y: &dyn Fn([T; 3]) -> [T; 3],
    q: [T; 3],
    h: T,
) -> [T; 3] {
    let xv = x(q);
    let yv = y(q);
    let mut out = [T::zero(); 3];
    for j in 0..3 {
        let mut qp = q;
        let mut qm = q;
        qp[j] += h;
        qm[j] -= h;
        let dyj = y(qp);
        let dym = y(qm);
        let dxj = x(qp);
        let dxm = x(qm);
        for i in 0..3 {
            let dy = (dyj[i] - dym[i]) / (T::of(2.0) * h);
            let dx = (dxj[i] - dxm[i]) / (T::of(2.0) * h);
            out[i] += xv[j] * dy - yv[j] * dx;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivative_of_sin() {
        let d = central1_order4(&|x: f64| x.sin(), 0.7, 1e-3);
        assert!((d - 0.7f64.cos()).abs() < 1e-12);
    }

    #[test]
    fn divergence_of_linear_field() {
        let f = |q: [f64; 3]| [2.0 * q[0], -3.0 * q[1], 1.0 * q[2]];
        let d = divergence3(&f, [0.3, -0.2, 0.9], 1e-5);
        assert!((d - 0.0).abs() < 1e-9);
    }

    #[test]
    fn bracket_of_commuting_fields() {
        // both depend on q[2] only and have no third component
        let x = |q: [f64; 3]| [q[2].sin(), q[2] * q[2], 0.0];
        let y = |q: [f64; 3]| [1.0 + q[2], (3.0 * q[2]).cos(), 0.0];
        let b = lie_bracket3(&x, &y, [0.1, 0.4, 0.8], 1e-5);
        for c in b {
            assert!(c.abs() < 1e-9);
        }
    }
}
