//! Field-line integration in chart coordinates and Poincaré sections.
//!
//! The integrator is an adaptive embedded Dormand-Prince 5(4) pair. Section
//! crossings are bracketed by the sign change of the unreduced sectioned
//! angle between accepted steps, located on the cubic Hermite interpolant of
//! the step, then polished with short Runge-Kutta steps and Newton
//! corrections in time, so the final crossing satisfies the section equation
//! at full integration accuracy. Angles accumulate without reduction:
//! winding counts carry the knot data.

use crate::error::{Error, Result};
use crate::geometry::{ChartField, Space, CHART_GUARD};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug)]
pub struct IntegratorOpts<T> {
    /// Per-step tolerance (used both absolutely and relatively).
    pub tol: T,
    pub h_init: T,
    pub h_min: T,
    pub h_max: T,
    pub max_steps: usize,
    /// Sphere only: half-width of the refused zone around `rho = 0, 1`.
    pub chart_guard: T,
}

impl<T: Real> Default for IntegratorOpts<T> {
    fn default() -> Self {
        Self {
            tol: T::of(1e-10),
            h_init: T::of(1e-2),
            h_min: T::of(1e-13),
            h_max: T::one(),
            max_steps: 50_000_000,
            chart_guard: T::of(CHART_GUARD),
        }
    }
}

impl<T: Real> IntegratorOpts<T> {
    pub fn with_tol(tol: T) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct IntegStats {
    pub accepted: usize,
    pub rejected: usize,
    pub field_evals: usize,
}

#[derive(Clone, Debug)]
pub struct EscapeInfo<T> {
    pub t: T,
    pub state: [T; 3],
}

#[derive(Clone, Debug)]
pub struct Trajectory<T> {
    pub ts: Vec<T>,
    pub states: Vec<[T; 3]>,
    pub stats: IntegStats,
    /// Set when the orbit left the guarded chart domain before `t_end`.
    pub escape: Option<EscapeInfo<T>>,
}

// Dormand-Prince 5(4) tableau.
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

struct StepResult<T> {
    y1: [T; 3],
    /// Derivative at `y1` (FSAL stage).
    f1: [T; 3],
    err: T,
}

/// One trial Dormand-Prince step of size `h` from `(y0, f0)`.
fn dopri_step<T: Real>(
    field: &dyn ChartField<T>,
    y0: &[T; 3],
    f0: &[T; 3],
    h: T,
    tol: T,
    stats: &mut IntegStats,
) -> StepResult<T> {
    let mut k = [[T::zero(); 3]; 7];
    k[0] = *f0;
    for s in 1..7 {
        let mut y = *y0;
        for j in 0..s {
            let a = T::of(A[s - 1][j]);
            if a != T::zero() {
                for i in 0..3 {
                    y[i] += h * a * k[j][i];
                }
            }
        }
        k[s] = field.eval(y);
        stats.field_evals += 1;
    }
    let mut y1 = *y0;
    let mut err_vec = [T::zero(); 3];
    for (s, ks) in k.iter().enumerate() {
        let b = T::of(B5[s]);
        let e = T::of(B5[s] - B4[s]);
        for i in 0..3 {
            if b != T::zero() {
                y1[i] += h * b * ks[i];
            }
            if e != T::zero() {
                err_vec[i] += h * e * ks[i];
            }
        }
    }
    // scaled RMS error against tol * max(1, |y|)
    let mut err = T::zero();
    for i in 0..3 {
        let scale = tol * T::one().max(y0[i].abs().max(y1[i].abs()));
        let e = err_vec[i] / scale;
        err += e * e;
    }
    let err = (err / T::of(3.0)).sqrt();
    StepResult { y1, f1: k[6], err }
}

fn next_h<T: Real>(h: T, err: T, h_max: T) -> T {
    let fac = if err == T::zero() {
        T::of(5.0)
    } else {
        (T::of(0.9) * err.powf(T::of(-0.2)))
            .min(T::of(5.0))
            .max(T::of(0.2))
    };
    (h * fac).min(h_max)
}

fn escape_check<T: Real>(space: Space, q: &[T; 3], guard: T) -> bool {
    match space {
        Space::S3 => q[2] <= guard || q[2] >= T::one() - guard,
        Space::T3 => false,
    }
}

/// Integrate a field line for time `t_end`, sampling every accepted step.
pub fn trace<T: Real>(
    field: &dyn ChartField<T>,
    q0: [T; 3],
    t_end: T,
    opts: &IntegratorOpts<T>,
) -> Result<Trajectory<T>> {
    let mut stats = IntegStats::default();
    let mut ts = vec![T::zero()];
    let mut states = vec![q0];
    let mut t = T::zero();
    let mut y = q0;
    let mut f = field.eval(y);
    stats.field_evals += 1;
    let mut h = opts.h_init.min(t_end);
    let space = field.space();
    if escape_check(space, &y, opts.chart_guard) {
        return Ok(Trajectory {
            ts,
            states,
            stats,
            escape: Some(EscapeInfo { t, state: y }),
        });
    }
    while t < t_end {
        if stats.accepted + stats.rejected > opts.max_steps {
            return Err(Error::Numeric(format!(
                "step budget exhausted at t={}",
                t.as_f64()
            )));
        }
        h = h.min(t_end - t);
        if h < opts.h_min {
            return Err(Error::Stiffness { t: t.as_f64() });
        }
        let step = dopri_step(field, &y, &f, h, opts.tol, &mut stats);
        if step.err > T::one() {
            stats.rejected += 1;
            h = next_h(h, step.err, opts.h_max);
            continue;
        }
        stats.accepted += 1;
        t += h;
        y = step.y1;
        f = step.f1;
        ts.push(t);
        states.push(y);
        if escape_check(space, &y, opts.chart_guard) {
            return Ok(Trajectory {
                ts,
                states,
                stats,
                escape: Some(EscapeInfo { t, state: y }),
            });
        }
        h = next_h(h, step.err, opts.h_max);
    }
    Ok(Trajectory {
        ts,
        states,
        stats,
        escape: None,
    })
}

/// Poincaré section: which chart angle is held, and the crossing direction.
#[derive(Clone, Copy, Debug)]
pub struct SectionSpec<T> {
    /// Index of the sectioned angle in the chart state.
    pub axis: usize,
    /// `+1` for increasing crossings, `-1` for decreasing.
    pub direction: i8,
    /// Minimum |sectioned-angle speed| at the crossing.
    pub speed_floor: T,
}

impl<T: Real> SectionSpec<T> {
    /// Sphere section `{theta2 = const}`.
    pub fn s3_theta2(direction: i8) -> Self {
        Self {
            axis: 1,
            direction,
            speed_floor: T::of(1e-4),
        }
    }

    /// Torus section `{x = const}`.
    pub fn t3_x(direction: i8) -> Self {
        Self {
            axis: 0,
            direction,
            speed_floor: T::of(1e-4),
        }
    }

    /// Torus section `{y = const}`.
    pub fn t3_y(direction: i8) -> Self {
        Self {
            axis: 1,
            direction,
            speed_floor: T::of(1e-4),
        }
    }

    /// The two in-section state indices (annulus coordinates), angle first.
    pub fn annulus_axes(&self) -> (usize, usize) {
        let angle = if self.axis == 0 { 1 } else { 0 };
        (angle, 2)
    }
}

#[derive(Clone, Debug)]
pub struct ReturnData<T> {
    /// State at the return crossing (angles unreduced).
    pub state: [T; 3],
    /// Unreduced displacement over the transit, `state - start`.
    pub delta: [T; 3],
    pub transit_time: T,
    pub stats: IntegStats,
}

/// First return of a field line to the section through `q0`.
///
/// `q0` must lie on the section. The return target is one full turn of the
/// sectioned angle in the crossing direction; transversality keeps the angle
/// monotone for every in-scope field, so the target is crossed exactly once.
pub fn return_map<T: Real>(
    field: &dyn ChartField<T>,
    section: &SectionSpec<T>,
    q0: [T; 3],
    opts: &IntegratorOpts<T>,
    max_transit: T,
) -> Result<ReturnData<T>> {
    let mut stats = IntegStats::default();
    let axis = section.axis;
    let dir = T::of(section.direction as f64);
    let target = q0[axis] + dir * T::two_pi();
    let space = field.space();

    let mut t = T::zero();
    let mut y = q0;
    let mut f = field.eval(y);
    stats.field_evals += 1;
    let mut h = opts.h_init;
    loop {
        if stats.accepted + stats.rejected > opts.max_steps {
            return Err(Error::Numeric(format!(
                "step budget exhausted during transit at t={}",
                t.as_f64()
            )));
        }
        if t > max_transit {
            return Err(Error::NonReturn {
                max_transit: max_transit.as_f64(),
            });
        }
        if h < opts.h_min {
            return Err(Error::Stiffness { t: t.as_f64() });
        }
        let step = dopri_step(field, &y, &f, h, opts.tol, &mut stats);
        if step.err > T::one() {
            stats.rejected += 1;
            h = next_h(h, step.err, opts.h_max);
            continue;
        }
        let s0 = y[axis] - target;
        let s1 = step.y1[axis] - target;
        if s0 * s1 <= T::zero() && s1 != s0 {
            // crossing inside this step: locate on the Hermite interpolant
            let theta = hermite_crossing(&y, &f, &step.y1, &step.f1, h, axis, target);
            let mut tc = theta * h;
            let mut yc = hermite_eval(&y, &f, &step.y1, &step.f1, h, theta);
            // polish with short RK steps + Newton in time
            for _ in 0..8 {
                let miss = yc[axis] - target;
                if miss.abs() <= T::of(1e-11) {
                    break;
                }
                let fc = field.eval(yc);
                stats.field_evals += 1;
                if fc[axis].abs() < section.speed_floor {
                    return Err(Error::SectionTransversality(format!(
                        "sectioned-angle speed {:e} below floor at crossing",
                        fc[axis].as_f64()
                    )));
                }
                let dt = -miss / fc[axis];
                let sub = dopri_step(field, &yc, &fc, dt, opts.tol, &mut stats);
                yc = sub.y1;
                tc += dt;
            }
            let fc = field.eval(yc);
            stats.field_evals += 1;
            if fc[axis].abs() < section.speed_floor {
                return Err(Error::SectionTransversality(format!(
                    "sectioned-angle speed {:e} below floor at crossing",
                    fc[axis].as_f64()
                )));
            }
            let mut delta = [T::zero(); 3];
            for i in 0..3 {
                delta[i] = yc[i] - q0[i];
            }
            return Ok(ReturnData {
                state: yc,
                delta,
                transit_time: t + tc,
                stats,
            });
        }
        stats.accepted += 1;
        t += h;
        y = step.y1;
        f = step.f1;
        if escape_check(space, &y, opts.chart_guard) {
            return Err(Error::Escape {
                t: t.as_f64(),
                value: y[2].as_f64(),
            });
        }
        h = next_h(h, step.err, opts.h_max);
    }
}

fn hermite_eval<T: Real>(
    y0: &[T; 3],
    f0: &[T; 3],
    y1: &[T; 3],
    f1: &[T; 3],
    h: T,
    theta: T,
) -> [T; 3] {
    let t = theta;
    let t2 = t * t;
    let t3 = t2 * t;
    let h00 = T::of(2.0) * t3 - T::of(3.0) * t2 + T::one();
    let h10 = t3 - T::of(2.0) * t2 + t;
    let h01 = -T::of(2.0) * t3 + T::of(3.0) * t2;
    let h11 = t3 - t2;
    let mut out = [T::zero(); 3];
    for i in 0..3 {
        out[i] = h00 * y0[i] + h10 * h * f0[i] + h01 * y1[i] + h11 * h * f1[i];
    }
    out
}

/// Crossing parameter of `component = target` on the Hermite interpolant,
/// by bisection in `theta` over `[0, 1]`.
fn hermite_crossing<T: Real>(
    y0: &[T; 3],
    f0: &[T; 3],
    y1: &[T; 3],
    f1: &[T; 3],
    h: T,
    axis: usize,
    target: T,
) -> T {
    let miss = |theta: T| hermite_eval(y0, f0, y1, f1, h, theta)[axis] - target;
    let mut lo = T::zero();
    let mut hi = T::one();
    let mut flo = miss(lo);
    for _ in 0..80 {
        if (hi - lo).abs() < T::of(1e-15) {
            break;
        }
        let mid = T::of(0.5) * (lo + hi);
        let fm = miss(mid);
        if fm == T::zero() {
            return mid;
        }
        if (fm > T::zero()) == (flo > T::zero()) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    T::of(0.5) * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::Profile1D;
    use crate::steady::{ShearCurlS3, ShearCurlT3, ShearProfileS3, ShearProfileT3};
    use std::sync::Arc;

    fn example_curl_field() -> ShearCurlS3<f64> {
        let prof = Arc::new(ShearProfileS3::new(
            Profile1D::parse("1 + rho", "rho").unwrap(),
            Profile1D::constant(0.0),
        ));
        Arc::new(prof.curl()).as_field()
    }

    struct ZeroField;
    impl ChartField<f64> for ZeroField {
        fn space(&self) -> Space {
            Space::T3
        }
        fn eval(&self, _q: [f64; 3]) -> [f64; 3] {
            [0.0, 0.0, 0.0]
        }
    }

    #[test]
    fn trace_conserves_rho_and_matches_linear_flow() {
        let field = example_curl_field();
        let opts = IntegratorOpts::with_tol(1e-10);
        let traj = trace(&field, [0.0, 0.0, 0.25], 1.0, &opts).unwrap();
        assert!(traj.escape.is_none());
        let last = *traj.states.last().unwrap();
        let t = *traj.ts.last().unwrap();
        assert!((t - 1.0).abs() < 1e-14);
        // closed form: theta1 = -4 rho t, theta2 = (2 + 4 rho) t, rho const
        assert!((last[2] - 0.25).abs() < 1e-9, "rho drift {}", last[2] - 0.25);
        assert!((last[0] - (-1.0)).abs() < 1e-9);
        assert!((last[1] - 3.0).abs() < 1e-9);
    }

    #[test]
    fn trace_zero_field_is_constant() {
        let traj = trace(&ZeroField, [0.3, 0.4, 0.5], 2.0, &IntegratorOpts::default()).unwrap();
        for s in &traj.states {
            assert_eq!(*s, [0.3, 0.4, 0.5]);
        }
    }

    #[test]
    fn trace_t3_conserves_z() {
        let prof: Arc<ShearProfileT3<f64>> = Arc::new(
            ShearProfileT3::new(
                Profile1D::parse("2*cos(z)", "z").unwrap(),
                Profile1D::parse("sin(z)", "z").unwrap(),
            )
            .unwrap(),
        );
        let field = ShearCurlT3 { prof };
        let traj = trace(&field, [0.0, 0.0, 1.0], 5.0, &IntegratorOpts::with_tol(1e-10)).unwrap();
        for s in &traj.states {
            assert!((s[2] - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn return_map_matches_analytic_twist() {
        let field = example_curl_field();
        let section = SectionSpec::s3_theta2(1);
        let opts = IntegratorOpts::with_tol(1e-10);
        // W(rho) = 2 pi f / g = -8 pi rho / (2 + 4 rho); at rho = 0.25: -2pi/3
        let r = return_map(&field, &section, [0.0, 0.0, 0.25], &opts, 1e4).unwrap();
        let want = -2.0 * std::f64::consts::PI / 3.0;
        assert!((r.delta[0] - want).abs() < 1e-9, "delta {}", r.delta[0]);
        assert!((r.state[2] - 0.25).abs() < 1e-10);
        assert!((r.delta[1] - std::f64::consts::TAU).abs() < 1e-10);
        // transit time 2 pi / g(0.25) = 2 pi / 3
        assert!((r.transit_time - std::f64::consts::TAU / 3.0).abs() < 1e-9);
    }

    #[test]
    fn return_map_fixed_circle_at_small_rho() {
        // f(rho) -> 0 as rho -> 0: near-zero angular advance
        let field = example_curl_field();
        let r = return_map(
            &field,
            &SectionSpec::s3_theta2(1),
            [1.0, 0.0, 1e-4],
            &IntegratorOpts::with_tol(1e-11),
            1e4,
        )
        .unwrap();
        let want = -8.0 * std::f64::consts::PI * 1e-4 / (2.0 + 4.0 * 1e-4);
        assert!((r.delta[0] - want).abs() < 1e-9);
    }

    #[test]
    fn return_map_nonreturn_for_zero_angle_speed() {
        let r = return_map(
            &ZeroField,
            &SectionSpec::t3_y(1),
            [0.0, 0.0, 1.0],
            &IntegratorOpts::default(),
            10.0,
        );
        assert!(matches!(r, Err(Error::NonReturn { .. })));
    }

    #[test]
    fn reversed_field_inverts_return_map() {
        struct Neg<F>(F);
        impl<F: ChartField<f64>> ChartField<f64> for Neg<F> {
            fn space(&self) -> Space {
                self.0.space()
            }
            fn eval(&self, q: [f64; 3]) -> [f64; 3] {
                let v = self.0.eval(q);
                [-v[0], -v[1], -v[2]]
            }
        }
        let field = example_curl_field();
        let neg = Neg(example_curl_field());
        let opts = IntegratorOpts::with_tol(1e-11);
        let start = [0.7, 0.0, 0.4];
        let fwd = return_map(&field, &SectionSpec::s3_theta2(1), start, &opts, 1e4).unwrap();
        let back = return_map(&neg, &SectionSpec::s3_theta2(-1), fwd.state, &opts, 1e4).unwrap();
        for i in 0..3 {
            assert!(
                (back.state[i] - start[i]).abs() < 1e-7,
                "i={i} {} vs {}",
                back.state[i],
                start[i]
            );
        }
    }
}
