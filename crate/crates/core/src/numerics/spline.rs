//! C2 cubic splines in moment form, with natural or periodic boundary
//! conditions, analytic derivatives up to third order and exact piecewise
//! integration. Profile derivatives must come from the spline itself, never
//! from finite differences of it.

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SplineBc {
    Natural,
    /// `y[last]` must equal `y[0]`; the spline is extended by the period
    /// `x[last] - x[0]`.
    Periodic,
}

#[derive(Clone, Debug)]
pub struct CubicSpline<T> {
    xs: Vec<T>,
    ys: Vec<T>,
    /// Second derivatives at the nodes.
    moments: Vec<T>,
    bc: SplineBc,
}

impl<T: Real> CubicSpline<T> {
    pub fn new(xs: Vec<T>, ys: Vec<T>, bc: SplineBc) -> Result<Self> {
        let n = xs.len();
        if n < 3 || ys.len() != n {
            return Err(Error::InvalidProfile(format!(
                "spline needs >= 3 nodes, got {} xs / {} ys",
                n,
                ys.len()
            )));
        }
        for i in 1..n {
            if !(xs[i] > xs[i - 1]) {
                return Err(Error::InvalidProfile("spline nodes must be strictly increasing".into()));
            }
        }
        if bc == SplineBc::Periodic {
            let gap = (ys[n - 1] - ys[0]).abs();
            let scale = ys.iter().fold(T::one(), |m, v| m.max(v.abs()));
            if gap > T::of(1e-9) * scale {
                return Err(Error::InvalidProfile(format!(
                    "periodic spline endpoint mismatch: |y_last - y_first| = {:e}",
                    gap.as_f64()
                )));
            }
        }
        let moments = match bc {
            SplineBc::Natural => natural_moments(&xs, &ys),
            SplineBc::Periodic => periodic_moments(&xs, &ys),
        };
        Ok(Self { xs, ys, moments, bc })
    }

    pub fn bc(&self) -> SplineBc {
        self.bc
    }

    pub fn x_min(&self) -> T {
        self.xs[0]
    }

    pub fn x_max(&self) -> T {
        *self.xs.last().unwrap()
    }

    fn locate(&self, x: T) -> (usize, T) {
        let x = match self.bc {
            SplineBc::Periodic => {
                let period = self.x_max() - self.x_min();
                let mut u = (x - self.x_min()) % period;
                if u < T::zero() {
                    u += period;
                }
                self.x_min() + u
            }
            SplineBc::Natural => x,
        };
        let n = self.xs.len();
        let mut lo = 0usize;
        let mut hi = n - 1;
        if x <= self.xs[0] {
            return (0, x);
        }
        if x >= self.xs[n - 1] {
            return (n - 2, x);
        }
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.xs[mid] <= x {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (lo, x)
    }

    pub fn eval(&self, x: T) -> T {
        let (i, x) = self.locate(x);
        let h = self.xs[i + 1] - self.xs[i];
        let a = (self.xs[i + 1] - x) / h;
        let b = (x - self.xs[i]) / h;
        let six = T::of(6.0);
        a * self.ys[i]
            + b * self.ys[i + 1]
            + ((a * a * a - a) * self.moments[i] + (b * b * b - b) * self.moments[i + 1]) * h * h
                / six
    }

    pub fn deriv1(&self, x: T) -> T {
        let (i, x) = self.locate(x);
        let h = self.xs[i + 1] - self.xs[i];
        let a = (self.xs[i + 1] - x) / h;
        let b = (x - self.xs[i]) / h;
        let six = T::of(6.0);
        (self.ys[i + 1] - self.ys[i]) / h
            + h / six
                * (-(T::of(3.0) * a * a - T::one()) * self.moments[i]
                    + (T::of(3.0) * b * b - T::one()) * self.moments[i + 1])
    }

    pub fn deriv2(&self, x: T) -> T {
        let (i, x) = self.locate(x);
        let h = self.xs[i + 1] - self.xs[i];
        let a = (self.xs[i + 1] - x) / h;
        let b = (x - self.xs[i]) / h;
        a * self.moments[i] + b * self.moments[i + 1]
    }

    pub fn deriv3(&self, x: T) -> T {
        let (i, _) = self.locate(x);
        let h = self.xs[i + 1] - self.xs[i];
        (self.moments[i + 1] - self.moments[i]) / h
    }

    /// Exact integral of the spline over `[a, b]` (within `[x_min, x_max]`).
    pub fn integral(&self, a: T, b: T) -> T {
        if b < a {
            return -self.integral(b, a);
        }
        let anti = |i: usize, x: T| -> T {
            // antiderivative on piece i, zero at xs[i]
            let h = self.xs[i + 1] - self.xs[i];
            let t = x - self.xs[i];
            let u = self.xs[i + 1] - x;
            let six = T::of(6.0);
            let quarter = T::of(0.25);
            // int of moment form
            let m0 = self.moments[i];
            let m1 = self.moments[i + 1];
            let y0 = self.ys[i];
            let y1 = self.ys[i + 1];
            let c0 = y0 / h - m0 * h / six;
            let c1 = y1 / h - m1 * h / six;
            m0 / (six * h) * (h * h * h * h * quarter - u * u * u * u * quarter)
                + m1 / (six * h) * (t * t * t * t * quarter)
                + c0 * (h * h - u * u) * T::of(0.5)
                + c1 * t * t * T::of(0.5)
        };
        let (ia, _) = self.locate(a.max(self.x_min()));
        let (ib, _) = self.locate(b.min(self.x_max()));
        if ia == ib {
            return anti(ia, b) - anti(ia, a);
        }
        let mut acc = anti(ia, self.xs[ia + 1]) - anti(ia, a);
        for i in ia + 1..ib {
            acc += anti(i, self.xs[i + 1]);
        }
        acc + anti(ib, b)
    }
}

fn natural_moments<T: Real>(xs: &[T], ys: &[T]) -> Vec<T> {
    let n = xs.len();
    let mut m = vec![T::zero(); n];
    if n == 3 {
        // single interior equation
        let h0 = xs[1] - xs[0];
        let h1 = xs[2] - xs[1];
        let rhs = (ys[2] - ys[1]) / h1 - (ys[1] - ys[0]) / h0;
        m[1] = rhs / ((h0 + h1) / T::of(3.0));
        return m;
    }
    let k = n - 2; // interior unknowns
    let mut diag = vec![T::zero(); k];
    let mut lower = vec![T::zero(); k];
    let mut upper = vec![T::zero(); k];
    let mut rhs = vec![T::zero(); k];
    for i in 1..n - 1 {
        let h0 = xs[i] - xs[i - 1];
        let h1 = xs[i + 1] - xs[i];
        let j = i - 1;
        lower[j] = h0 / T::of(6.0);
        diag[j] = (h0 + h1) / T::of(3.0);
        upper[j] = h1 / T::of(6.0);
        rhs[j] = (ys[i + 1] - ys[i]) / h1 - (ys[i] - ys[i - 1]) / h0;
    }
    let sol = thomas(&lower, &diag, &upper, &rhs);
    m[1..(k + 1)].copy_from_slice(&sol[..k]);
    m
}

fn periodic_moments<T: Real>(xs: &[T], ys: &[T]) -> Vec<T> {
    // unknowns m[0..n-1], m[n-1] == m[0]; cyclic tridiagonal via
    // Sherman-Morrison on the Thomas solver.
    let n = xs.len();
    let k = n - 1;
    let h = |i: usize| xs[i + 1] - xs[i];
    let hw = |i: usize| if i == 0 { h(k - 1) } else { h(i - 1) }; // h before node i
    let yd = |i: usize| (ys[i + 1] - ys[i]) / h(i);
    let ydw = |i: usize| if i == 0 { yd(k - 1) } else { yd(i - 1) };
    let mut diag = vec![T::zero(); k];
    let mut sub = vec![T::zero(); k];
    let mut sup = vec![T::zero(); k];
    let mut rhs = vec![T::zero(); k];
    for i in 0..k {
        sub[i] = hw(i) / T::of(6.0);
        diag[i] = (hw(i) + h(i)) / T::of(3.0);
        sup[i] = h(i) / T::of(6.0);
        rhs[i] = yd(i) - ydw(i);
    }
    // corner entries sub[0] (couples to m[k-1]) and sup[k-1] (couples to m[0])
    let alpha = sub[0];
    let beta = sup[k - 1];
    let gamma = -diag[0];
    let mut diag_mod = diag.clone();
    diag_mod[0] = diag[0] - gamma;
    diag_mod[k - 1] = diag[k - 1] - alpha * beta / gamma;
    let y = thomas(&sub, &diag_mod, &sup, &rhs);
    let mut u = vec![T::zero(); k];
    u[0] = gamma;
    u[k - 1] = alpha;
    let z = thomas(&sub, &diag_mod, &sup, &u);
    let fact = (y[0] + beta * y[k - 1] / gamma) / (T::one() + z[0] + beta * z[k - 1] / gamma);
    let mut m = vec![T::zero(); n];
    for i in 0..k {
        m[i] = y[i] - fact * z[i];
    }
    m[k] = m[0];
    m
}

/// Thomas algorithm; `lower[0]` and `upper[last]` are ignored.
fn thomas<T: Real>(lower: &[T], diag: &[T], upper: &[T], rhs: &[T]) -> Vec<T> {
    let n = diag.len();
    let mut c = vec![T::zero(); n];
    let mut d = vec![T::zero(); n];
    c[0] = upper[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let denom = diag[i] - lower[i] * c[i - 1];
        c[i] = if i < n - 1 { upper[i] / denom } else { T::zero() };
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / denom;
    }
    let mut x = vec![T::zero(); n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, a: f64, b: f64) -> Vec<f64> {
        (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect()
    }

    #[test]
    fn reproduces_smooth_function() {
        let xs = grid(64, 0.0, 1.0);
        let ys: Vec<f64> = xs.iter().map(|&x| (2.0 * x).sin() + x * x).collect();
        let s = CubicSpline::new(xs, ys, SplineBc::Natural).unwrap();
        // natural end conditions leave an O(h^2) boundary layer; test the
        // interior
        for i in 0..200 {
            let x = 0.1 + 0.8 * i as f64 / 199.0;
            let want = (2.0 * x).sin() + x * x;
            assert!((s.eval(x) - want).abs() < 2e-7, "x={x}");
            let want_d = 2.0 * (2.0 * x).cos() + 2.0 * x;
            assert!((s.deriv1(x) - want_d).abs() < 5e-5, "x={x}");
        }
    }

    #[test]
    fn periodic_wraps() {
        let n = 128;
        let xs = grid(n, 0.0, std::f64::consts::TAU);
        let ys: Vec<f64> = xs.iter().map(|&x| x.cos()).collect();
        let s = CubicSpline::new(xs, ys, SplineBc::Periodic).unwrap();
        for i in 0..50 {
            let x = -10.0 + 25.0 * i as f64 / 49.0;
            assert!((s.eval(x) - x.cos()).abs() < 1e-7, "x={x}");
            assert!((s.deriv1(x) + x.sin()).abs() < 1e-5, "x={x}");
            assert!((s.deriv2(x) + x.cos()).abs() < 1e-3, "x={x}");
        }
    }

    #[test]
    fn integral_matches_quadrature() {
        let xs = grid(40, 0.0, 2.0);
        let ys: Vec<f64> = xs.iter().map(|&x| x * x * x - x).collect();
        let s = CubicSpline::new(xs, ys, SplineBc::Natural).unwrap();
        // cubic data: spline integral should match the exact integral closely
        let exact = |x: f64| x.powi(4) / 4.0 - x * x / 2.0;
        assert!((s.integral(0.25, 1.75) - (exact(1.75) - exact(0.25))).abs() < 1e-6);
        // additivity
        let whole = s.integral(0.0, 2.0);
        let parts = s.integral(0.0, 0.7) + s.integral(0.7, 2.0);
        assert!((whole - parts).abs() < 1e-13);
    }
}
