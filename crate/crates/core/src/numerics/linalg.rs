//! 2x2 matrix helpers for Jacobian chains and linearization frames.

use crate::scalar::Real;

pub type Mat2<T> = [[T; 2]; 2];
pub type Vec2<T> = [T; 2];

pub fn mat_mul<T: Real>(a: &Mat2<T>, b: &Mat2<T>) -> Mat2<T> {
    [
        [
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
        ],
        [
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        ],
    ]
}

pub fn mat_vec<T: Real>(a: &Mat2<T>, v: &Vec2<T>) -> Vec2<T> {
    [
        a[0][0] * v[0] + a[0][1] * v[1],
        a[1][0] * v[0] + a[1][1] * v[1],
    ]
}

pub fn det<T: Real>(a: &Mat2<T>) -> T {
    a[0][0] * a[1][1] - a[0][1] * a[1][0]
}

pub fn trace<T: Real>(a: &Mat2<T>) -> T {
    a[0][0] + a[1][1]
}

pub fn inverse<T: Real>(a: &Mat2<T>) -> Option<Mat2<T>> {
    let d = det(a);
    if d.abs() < T::epsilon() {
        return None;
    }
    Some([
        [a[1][1] / d, -a[0][1] / d],
        [-a[1][0] / d, a[0][0] / d],
    ])
}

/// Solve `a x = b` for a 2x2 system.
pub fn solve2<T: Real>(a: &Mat2<T>, b: &Vec2<T>) -> Option<Vec2<T>> {
    inverse(a).map(|inv| mat_vec(&inv, b))
}

/// Linearizing frame of an elliptic 2x2 matrix: returns `(b, omega)` with
/// `m = b * rot(omega) * b^-1`, `det b = 1` and `omega` the signed rotation
/// angle. `None` when `|trace/2| >= 1` (not elliptic).
pub fn elliptic_frame<T: Real>(m: &Mat2<T>) -> Option<(Mat2<T>, T)> {
    let d = det(m);
    if d <= T::zero() {
        return None;
    }
    let s = d.sqrt();
    let half_tr = trace(m) / (T::of(2.0) * s);
    if half_tr.abs() >= T::one() {
        return None;
    }
    let sin_omega = (T::one() - half_tr * half_tr).sqrt();
    // eigenvector for lambda = cos + i sin: (m - lambda I) v = 0
    // v = (m01, lambda - m00) works unless m01 ~ 0
    let (re, im) = if m[0][1].abs() > m[1][0].abs() {
        ([m[0][1] / s, half_tr - m[0][0] / s], [T::zero(), sin_omega])
    } else {
        ([half_tr - m[1][1] / s, m[1][0] / s], [sin_omega, T::zero()])
    };
    // columns Re v, -Im v conjugate m to a rotation
    let mut b: Mat2<T> = [[re[0], -im[0]], [re[1], -im[1]]];
    let mut bd = det(&b);
    let mut omega = sin_omega.atan2(half_tr);
    if bd < T::zero() {
        // flip orientation: conjugates to rotation by -omega
        b = [[b[0][0], -b[0][1]], [b[1][0], -b[1][1]]];
        bd = -bd;
        omega = -omega;
    }
    let scale = bd.sqrt();
    let bn = [[b[0][0] / scale, b[0][1] / scale], [b[1][0] / scale, b[1][1] / scale]];
    Some((bn, omega))
}
