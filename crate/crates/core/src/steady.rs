//! Shear steady flows on the sphere and the torus: construction from profile
//! functions, curl, Bernoulli function, and nondegeneracy certificates
//! (Morse-Bott Bernoulli function plus a certified twist lower bound).

use crate::error::{Error, Result};
use crate::geometry::{ChartField, HopfBasis, Space, VolumePreservingDiffeo};
use crate::numerics::quad::adaptive_simpson;
use crate::numerics::rng::uniform01;
use crate::numerics::roots::scan_roots;
use crate::profile::Profile1D;
use crate::scalar::Real;
use std::sync::Arc;

// ---------------------------------------------------------------------------
// sphere

/// Shear flow `u = f1(rho) u1 + f2(rho) u2` on the sphere.
#[derive(Clone, Debug)]
pub struct ShearProfileS3<T> {
    pub f1: Profile1D<T>,
    pub f2: Profile1D<T>,
}

impl<T: Real> ShearProfileS3<T> {
    pub fn new(f1: Profile1D<T>, f2: Profile1D<T>) -> Self {
        Self { f1, f2 }
    }

    /// Chart components of the velocity field at `rho`:
    /// `(f1 + f2) d/dtheta1 + (-f1 + f2) d/dtheta2`.
    pub fn velocity(&self, rho: T) -> [T; 3] {
        let v1 = self.f1.eval(rho);
        let v2 = self.f2.eval(rho);
        let u1 = HopfBasis::u1::<T>();
        let u2 = HopfBasis::u2::<T>();
        [
            v1 * u1[0] + v2 * u2[0],
            v1 * u1[1] + v2 * u2[1],
            T::zero(),
        ]
    }

    pub fn curl(self: &Arc<Self>) -> CurlProfileS3<T> {
        CurlProfileS3 { prof: self.clone() }
    }

    pub fn bernoulli(self: &Arc<Self>) -> BernoulliS3<T> {
        BernoulliS3 {
            prof: self.clone(),
            quad_tol: T::of(1e-12),
        }
    }
}

/// Field evaluation for the velocity `u` itself.
pub struct ShearVelocityS3<T> {
    pub prof: Arc<ShearProfileS3<T>>,
}

impl<T: Real> ChartField<T> for ShearVelocityS3<T> {
    fn space(&self) -> Space {
        Space::S3
    }
    fn eval(&self, q: [T; 3]) -> [T; 3] {
        self.prof.velocity(q[2])
    }
}

/// Evaluate the shear field at a chart point, checking the chart domain.
pub fn eval_field<T: Real>(prof: &ShearProfileS3<T>, rho: T) -> Result<[T; 3]> {
    if !(rho > T::zero() && rho < T::one()) {
        return Err(Error::ChartDomain {
            rho: rho.as_f64(),
            lo: 0.0,
            hi: 1.0,
        });
    }
    Ok(prof.velocity(rho))
}

/// Curl of a shear flow, kept in both bases: coefficients `(a1, a2)` on the
/// Hopf pair and chart components `(f, g) = (a1 + a2, -a1 + a2)`.
#[derive(Clone)]
pub struct CurlProfileS3<T> {
    prof: Arc<ShearProfileS3<T>>,
}

impl<T: Real> CurlProfileS3<T> {
    pub fn profile(&self) -> &Arc<ShearProfileS3<T>> {
        &self.prof
    }

    pub fn a1(&self, rho: T) -> T {
        let p = &self.prof;
        let two = T::of(2.0);
        -(p.f1.d1(rho) * (two * rho - T::one()) + two * p.f1.eval(rho) + p.f2.d1(rho))
    }

    pub fn a2(&self, rho: T) -> T {
        let p = &self.prof;
        let two = T::of(2.0);
        p.f2.d1(rho) * (two * rho - T::one()) + two * p.f2.eval(rho) + p.f1.d1(rho)
    }

    /// `theta1` chart component of the curl.
    pub fn f(&self, rho: T) -> T {
        self.a1(rho) + self.a2(rho)
    }

    /// `theta2` chart component of the curl.
    pub fn g(&self, rho: T) -> T {
        -self.a1(rho) + self.a2(rho)
    }

    pub fn f_d1(&self, rho: T) -> T {
        // f = 2 [ (1 - rho)(f1' - f2') + (f2 - f1) ]
        let p = &self.prof;
        let two = T::of(2.0);
        two * ((T::one() - rho) * (p.f1.d2(rho) - p.f2.d2(rho))
            + two * (p.f2.d1(rho) - p.f1.d1(rho)))
    }

    pub fn g_d1(&self, rho: T) -> T {
        // g = 2 rho (f1' + f2') + 2 (f1 + f2)
        let p = &self.prof;
        let two = T::of(2.0);
        two * rho * (p.f1.d2(rho) + p.f2.d2(rho)) + T::of(4.0) * (p.f1.d1(rho) + p.f2.d1(rho))
    }

    /// Twist quantity `|f' g - f g'|`.
    pub fn twist(&self, rho: T) -> T {
        (self.f_d1(rho) * self.g(rho) - self.f(rho) * self.g_d1(rho)).abs()
    }

    pub fn as_field(self: &Arc<Self>) -> ShearCurlS3<T> {
        ShearCurlS3 { curl: self.clone() }
    }
}

/// Curl field `f(rho) d/dtheta1 + g(rho) d/dtheta2` as a chart field.
pub struct ShearCurlS3<T> {
    pub curl: Arc<CurlProfileS3<T>>,
}

impl<T: Real> ChartField<T> for ShearCurlS3<T> {
    fn space(&self) -> Space {
        Space::S3
    }
    fn eval(&self, q: [T; 3]) -> [T; 3] {
        [self.curl.f(q[2]), self.curl.g(q[2]), T::zero()]
    }
}

/// Independent recomputation of the curl components through the dual-form
/// route: the 1-form of `u` has chart coefficients
/// `alpha = rho (f1 + f2) dtheta1 + (1 - rho)(-f1 + f2) dtheta2`;
/// its exterior derivative contracted with the volume density `1/2` yields
/// the chart components directly. Serves as a regression oracle for
/// [`CurlProfileS3::f`] and [`CurlProfileS3::g`].
pub fn curl_via_forms<T: Real>(prof: &ShearProfileS3<T>, rho: T) -> (T, T) {
    let two = T::of(2.0);
    let f1 = prof.f1.eval(rho);
    let f2 = prof.f2.eval(rho);
    let d1 = prof.f1.d1(rho);
    let d2 = prof.f2.d1(rho);
    // d/drho of the two 1-form coefficients (product rule)
    let c1 = (f1 + f2) + rho * (d1 + d2);
    let c2 = -(-f1 + f2) + (T::one() - rho) * (-d1 + d2);
    // i_W (1/2 dtheta1^dtheta2^drho) = dalpha fixes W1 = -2 c2, W2 = 2 c1
    (-two * c2, two * c1)
}

/// Bernoulli function of a sphere shear flow, as the integral of the closed
/// 1-form coefficient from 0 to `rho` (so the normalization `B(0) = 0` holds
/// by construction). Evaluation is adaptive quadrature; the derivative is the
/// integrand itself.
pub struct BernoulliS3<T> {
    prof: Arc<ShearProfileS3<T>>,
    pub quad_tol: T,
}

impl<T: Real> BernoulliS3<T> {
    pub fn with_tol(mut self, tol: T) -> Self {
        self.quad_tol = tol;
        self
    }

    pub fn integrand(&self, s: T) -> T {
        let p = &self.prof;
        let f1 = p.f1.eval(s);
        let f2 = p.f2.eval(s);
        let d1 = p.f1.d1(s);
        let d2 = p.f2.d1(s);
        f1 * d1 + f2 * d2 + T::of(4.0) * f1 * f2 + (T::of(2.0) * s - T::one()) * (f1 * d2 + f2 * d1)
    }

    pub fn eval(&self, rho: T) -> Result<T> {
        adaptive_simpson(&|s| self.integrand(s), T::zero(), rho, self.quad_tol)
    }

    /// `B'` is the integrand, exactly.
    pub fn d1(&self, rho: T) -> T {
        self.integrand(rho)
    }

    pub fn d2(&self, rho: T) -> T {
        let p = &self.prof;
        let f1 = p.f1.eval(rho);
        let f2 = p.f2.eval(rho);
        let d1 = p.f1.d1(rho);
        let d2 = p.f2.d1(rho);
        let s1 = p.f1.d2(rho);
        let s2 = p.f2.d2(rho);
        let two = T::of(2.0);
        d1 * d1 + f1 * s1 + d2 * d2 + f2 * s2
            + T::of(4.0) * (d1 * f2 + f1 * d2)
            + two * (f1 * d2 + f2 * d1)
            + (two * rho - T::one()) * (d1 * d2 + f1 * s2 + d2 * d1 + f2 * s1)
    }
}

// ---------------------------------------------------------------------------
// torus

/// Shear flow `u = f(z) d/dx + g(z) d/dy` on the torus; profiles must be
/// 2*pi-periodic.
#[derive(Clone, Debug)]
pub struct ShearProfileT3<T> {
    pub f: Profile1D<T>,
    pub g: Profile1D<T>,
}

impl<T: Real> ShearProfileT3<T> {
    pub fn new(f: Profile1D<T>, g: Profile1D<T>) -> Result<Self> {
        let tau = T::two_pi();
        for (name, p) in [("f", &f), ("g", &g)] {
            let gap = (p.eval(T::zero()) - p.eval(tau)).abs();
            let scale = T::one().max(p.eval(T::zero()).abs());
            if gap > T::of(1e-12) * scale {
                return Err(Error::InvalidProfile(format!(
                    "torus profile {name} is not 2*pi-periodic: |{name}(0) - {name}(2pi)| = {:e}",
                    gap.as_f64()
                )));
            }
        }
        Ok(Self { f, g })
    }

    pub fn velocity(&self, z: T) -> [T; 3] {
        [self.f.eval(z), self.g.eval(z), T::zero()]
    }

    /// Curl components `(-g'(z), f'(z), 0)`.
    pub fn curl_components(&self, z: T) -> [T; 3] {
        [-self.g.d1(z), self.f.d1(z), T::zero()]
    }

    /// Bernoulli function `(f^2 + g^2) / 2` (raw, not normalized).
    pub fn bernoulli(&self, z: T) -> T {
        let f = self.f.eval(z);
        let g = self.g.eval(z);
        (f * f + g * g) * T::of(0.5)
    }

    /// Bernoulli function shifted so that the value at `z = 0` vanishes.
    pub fn bernoulli_normalized(&self, z: T) -> T {
        self.bernoulli(z) - self.bernoulli(T::zero())
    }

    pub fn bernoulli_d1(&self, z: T) -> T {
        self.f.eval(z) * self.f.d1(z) + self.g.eval(z) * self.g.d1(z)
    }

    pub fn bernoulli_d2(&self, z: T) -> T {
        let f = self.f.eval(z);
        let g = self.g.eval(z);
        let fd = self.f.d1(z);
        let gd = self.g.d1(z);
        fd * fd + f * self.f.d2(z) + gd * gd + g * self.g.d2(z)
    }

    /// Twist quantity `f'' g' - f' g''` (signed).
    pub fn twist_signed(&self, z: T) -> T {
        self.f.d2(z) * self.g.d1(z) - self.f.d1(z) * self.g.d2(z)
    }
}

/// Torus curl field as a chart field.
pub struct ShearCurlT3<T> {
    pub prof: Arc<ShearProfileT3<T>>,
}

impl<T: Real> ChartField<T> for ShearCurlT3<T> {
    fn space(&self) -> Space {
        Space::T3
    }
    fn eval(&self, q: [T; 3]) -> [T; 3] {
        self.prof.curl_components(q[2])
    }
}

// ---------------------------------------------------------------------------
// nondegeneracy certificates

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Nondegenerate,
    Degenerate,
    Inconclusive,
}

#[derive(Clone, Debug)]
pub struct NondegeneracyReport<T> {
    pub morse_bott_ok: bool,
    /// `(location, Bernoulli value)` of every critical point found (the two
    /// chart endpoints always appear for the sphere).
    pub critical_points: Vec<(T, T)>,
    /// Grid minimum of the twist quantity.
    pub twist_min: T,
    /// Certified lower bound: grid minimum minus the Lipschitz margin.
    pub tau: T,
    /// Torus only: intervals of `[0, 2pi]` where the twist stays above `tau`.
    pub omega_tau: Vec<(T, T)>,
    /// Torus only: located zeros of the signed twist quantity.
    pub twist_zeros: Vec<T>,
    pub verdict: Verdict,
}

#[derive(Clone, Copy, Debug)]
pub struct NondegeneracyOpts<T> {
    /// Base grid size for twist evaluation.
    pub grid: usize,
    /// Lipschitz bound for the twist quantity; estimated from grid slopes
    /// (doubled) when absent.
    pub lipschitz: Option<T>,
    /// Floor under which `|B'|` at the endpoints (sphere) or `|B''|` at
    /// interior critical points is considered degenerate.
    pub mb_floor: T,
    /// Below this twist resolution the Morse-Bott/twist questions are
    /// reported inconclusive rather than guessed.
    pub resolution: T,
}

impl<T: Real> Default for NondegeneracyOpts<T> {
    fn default() -> Self {
        Self {
            grid: 4096,
            lipschitz: None,
            mb_floor: T::of(1e-9),
            resolution: T::of(1e-11),
        }
    }
}

fn certified_min<T: Real>(values: &[T], h: T, lipschitz: Option<T>) -> (T, T) {
    let mut min = values[0];
    let mut max_slope = T::zero();
    for w in values.windows(2) {
        min = min.min(w[1]);
        max_slope = max_slope.max((w[1] - w[0]).abs() / h);
    }
    let lip = lipschitz.unwrap_or(T::of(2.0) * max_slope);
    let tau = (min - lip * h * T::of(0.5)).max(T::zero());
    (min, tau)
}

/// Nondegeneracy certificate for a sphere shear flow: the Bernoulli function
/// must be critical exactly at the chart endpoints with nonvanishing slope,
/// and the twist `|f'g - fg'|` must stay above a certified `tau` on `(0, 1)`.
pub fn check_nondegenerate_s3<T: Real>(
    prof: &Arc<ShearProfileS3<T>>,
    tau_request: Option<T>,
    opts: &NondegeneracyOpts<T>,
) -> Result<NondegeneracyReport<T>> {
    let curl = prof.curl();
    let bern = prof.bernoulli();
    let n = opts.grid.max(16);
    let h = T::one() / T::of(n as f64);

    // twist grid plus one refinement pass around the minimum
    let values: Vec<T> = (0..=n)
        .map(|i| curl.twist(T::of(i as f64) * h))
        .collect();
    let (mut twist_min, _) = certified_min(&values, h, opts.lipschitz);
    let argmin = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, _)| i)
        .unwrap_or(0);
    let lo = T::of(argmin.saturating_sub(2) as f64) * h;
    let hi = (T::of((argmin + 2) as f64) * h).min(T::one());
    let fine: Vec<T> = (0..=64)
        .map(|i| curl.twist(lo + (hi - lo) * T::of(i as f64) / T::of(64.0)))
        .collect();
    for &v in &fine {
        twist_min = twist_min.min(v);
    }
    let (_, tau) = certified_min(&values, h, opts.lipschitz);
    let tau = tau.min(twist_min);

    // Morse-Bott bookkeeping for B
    let mut critical_points = Vec::new();
    let b0 = T::zero();
    let b1 = bern.eval(T::one())?;
    critical_points.push((T::zero(), b0));
    critical_points.push((T::one(), b1));
    let dp0 = bern.d1(T::zero()).abs();
    let dp1 = bern.d1(T::one()).abs();
    let mut morse_bott_ok = dp0 > opts.mb_floor && dp1 > opts.mb_floor;
    // interior critical points are forbidden outright
    let margin = T::of(1e-4);
    let interior = scan_roots(
        &|r| bern.d1(r),
        margin,
        T::one() - margin,
        n,
        T::of(1e-12),
    );
    for &r in &interior {
        critical_points.push((r, bern.eval(r)?));
    }
    if !interior.is_empty() {
        morse_bott_ok = false;
    }
    // near-tangential dips below resolution: inconclusive, not degenerate
    let mut inconclusive = false;
    if morse_bott_ok {
        let dip = (0..=n)
            .map(|i| bern.d1(T::of(i as f64) * h).abs())
            .fold(T::infinity(), |m, v| m.min(v));
        if dip <= opts.resolution {
            inconclusive = true;
        }
    }

    let twist_ok = match tau_request {
        Some(req) => tau >= req && tau > T::zero(),
        None => tau > T::zero(),
    };
    let verdict = if inconclusive || (twist_min > T::zero() && twist_min <= opts.resolution) {
        Verdict::Inconclusive
    } else if morse_bott_ok && twist_ok {
        Verdict::Nondegenerate
    } else {
        Verdict::Degenerate
    };

    Ok(NondegeneracyReport {
        morse_bott_ok,
        critical_points,
        twist_min,
        tau,
        omega_tau: Vec::new(),
        twist_zeros: Vec::new(),
        verdict,
    })
}

/// Nondegeneracy certificate for a torus shear flow. The twist quantity
/// `f''g' - f'g''` may vanish at finitely many `z`; the certificate reports
/// the zero set and the intervals where the twist stays above `tau`.
pub fn check_nondegenerate_t3<T: Real>(
    prof: &ShearProfileT3<T>,
    tau_request: Option<T>,
    opts: &NondegeneracyOpts<T>,
) -> Result<NondegeneracyReport<T>> {
    let tau_len = T::two_pi();
    let n = opts.grid.max(16);
    let h = tau_len / T::of(n as f64);

    let twist_abs: Vec<T> = (0..=n)
        .map(|i| prof.twist_signed(T::of(i as f64) * h).abs())
        .collect();
    let (twist_min, _) = certified_min(&twist_abs, h, opts.lipschitz);

    // locate zeros of the signed twist by sign-change bisection
    let twist_zeros = scan_roots(&|z| prof.twist_signed(z), T::zero(), tau_len, n, T::of(1e-12));

    // identically-zero twist (grid all below resolution) is degenerate
    let all_tiny = twist_abs.iter().all(|v| *v <= opts.resolution);

    // Morse-Bott: critical tori are zeros of B'; each needs |B''| above floor
    let crit = scan_roots(
        &|z| prof.bernoulli_d1(z),
        T::zero(),
        tau_len - T::of(1e-12),
        n,
        T::of(1e-12),
    );
    let bp_sup = (0..=n)
        .map(|i| prof.bernoulli_d1(T::of(i as f64) * h).abs())
        .fold(T::zero(), |m, v| m.max(v));
    let mut morse_bott_ok = bp_sup > opts.mb_floor; // B' not identically zero
    let mut critical_points = Vec::new();
    for &z in &crit {
        critical_points.push((z, prof.bernoulli(z)));
        if prof.bernoulli_d2(z).abs() <= opts.mb_floor {
            morse_bott_ok = false;
        }
    }

    // intervals where |twist| >= tau
    let tau = match tau_request {
        Some(req) => req,
        None => (twist_min * T::of(0.9)).max(T::zero()),
    };
    let mut omega_tau = Vec::new();
    let mut start: Option<T> = None;
    for i in 0..=n {
        let z = T::of(i as f64) * h;
        let above = twist_abs[i] >= tau && tau > T::zero();
        match (above, start) {
            (true, None) => start = Some(z),
            (false, Some(s)) => {
                omega_tau.push((s, z - h));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        omega_tau.push((s, tau_len));
    }

    let verdict = if all_tiny || !morse_bott_ok {
        Verdict::Degenerate
    } else if omega_tau.is_empty() {
        if twist_min <= opts.resolution {
            Verdict::Inconclusive
        } else {
            Verdict::Degenerate
        }
    } else {
        Verdict::Nondegenerate
    };

    Ok(NondegeneracyReport {
        morse_bott_ok,
        critical_points,
        twist_min,
        tau,
        omega_tau,
        twist_zeros,
        verdict,
    })
}

// ---------------------------------------------------------------------------
// Bernoulli identity and pushforward

/// Max over sample points of the metric norm of `u x rot u - grad B`.
///
/// The left side is evaluated algebraically in the chart with the induced
/// metric; the gradient is a five-point finite difference of the
/// quadrature-computed Bernoulli function, so the two routes are independent.
pub fn bernoulli_identity_residual_s3<T: Real>(
    prof: &Arc<ShearProfileS3<T>>,
    n_points: usize,
    seed: u64,
) -> Result<T> {
    let curl = prof.curl();
    let bern = prof.bernoulli().with_tol(T::of(1e-13));
    let h = T::of(1e-3);
    let mut worst = T::zero();
    for k in 0..n_points {
        let rho = T::of(0.01) + T::of(0.98) * T::of(uniform01(seed, k as u64));
        let a = prof.f1.eval(rho) + prof.f2.eval(rho);
        let b = -prof.f1.eval(rho) + prof.f2.eval(rho);
        let cross_coeff = T::of(0.5) * (a * curl.g(rho) - b * curl.f(rho));
        // five-point central difference of B
        let two = T::of(2.0);
        let bm2 = bern.eval(rho - two * h)?;
        let bm1 = bern.eval(rho - h)?;
        let bp1 = bern.eval(rho + h)?;
        let bp2 = bern.eval(rho + two * h)?;
        let db = (bm2 - T::of(8.0) * bm1 + T::of(8.0) * bp1 - bp2) / (T::of(12.0) * h);
        // metric norm of the d/drho defect
        let resid = (rho * (T::one() - rho)).sqrt() * (cross_coeff - db).abs() * two;
        worst = worst.max(resid);
    }
    Ok(worst)
}

/// Same residual on the torus, where the identity is
/// `f f' + g g' = dB/dz` pointwise in the flat metric.
pub fn bernoulli_identity_residual_t3<T: Real>(
    prof: &ShearProfileT3<T>,
    n_points: usize,
    seed: u64,
) -> T {
    let h = T::of(1e-3);
    let mut worst = T::zero();
    for k in 0..n_points {
        let z = T::two_pi() * T::of(uniform01(seed, k as u64));
        let lhs = prof.f.eval(z) * prof.f.d1(z) + prof.g.eval(z) * prof.g.d1(z);
        let two = T::of(2.0);
        let db = (prof.bernoulli(z - two * h) - T::of(8.0) * prof.bernoulli(z - h)
            + T::of(8.0) * prof.bernoulli(z + h)
            - prof.bernoulli(z + two * h))
            / (T::of(12.0) * h);
        worst = worst.max((lhs - db).abs());
    }
    worst
}

/// A shear profile on either space, as loaded from the profile JSON schema.
pub enum AnyShear<T: Real> {
    S3(Arc<ShearProfileS3<T>>),
    T3(Arc<ShearProfileT3<T>>),
}

impl<T: Real> AnyShear<T> {
    pub fn space(&self) -> Space {
        match self {
            AnyShear::S3(_) => Space::S3,
            AnyShear::T3(_) => Space::T3,
        }
    }
}

/// Load a shear profile from the schema
/// `{ "domain": "s3"|"t3", "kind": "closed-form"|"spline",
///    "f1"/"f2" or "f"/"g": expression string or [[x, y], ...] nodes }`.
pub fn shear_from_json<T: Real>(v: &serde_json::Value) -> Result<AnyShear<T>> {
    let domain = v
        .get("domain")
        .and_then(|d| d.as_str())
        .ok_or_else(|| Error::Parse("profile: missing \"domain\" (s3 or t3)".into()))?;
    let kind = v.get("kind").and_then(|d| d.as_str()).unwrap_or("closed-form");
    if kind != "closed-form" && kind != "spline" {
        return Err(Error::Parse(format!(
            "profile: kind must be closed-form or spline, got {kind}"
        )));
    }
    let field = |name: &str| -> Result<&serde_json::Value> {
        v.get(name)
            .ok_or_else(|| Error::Parse(format!("profile: missing \"{name}\"")))
    };
    match domain {
        "s3" => {
            let f1 = Profile1D::from_json(field("f1")?, "rho", crate::numerics::spline::SplineBc::Natural)?;
            let f2 = Profile1D::from_json(field("f2")?, "rho", crate::numerics::spline::SplineBc::Natural)?;
            Ok(AnyShear::S3(Arc::new(ShearProfileS3::new(f1, f2))))
        }
        "t3" => {
            let f = Profile1D::from_json(field("f")?, "z", crate::numerics::spline::SplineBc::Periodic)?;
            let g = Profile1D::from_json(field("g")?, "z", crate::numerics::spline::SplineBc::Periodic)?;
            Ok(AnyShear::T3(Arc::new(ShearProfileT3::new(f, g)?)))
        }
        other => Err(Error::Parse(format!(
            "profile: domain must be s3 or t3, got {other}"
        ))),
    }
}

/// Pushforward of a field by a volume-preserving diffeomorphism:
/// `v(p) = DPhi(Phi^-1 p) w(Phi^-1 p)`.
pub struct PushforwardField<T: Real> {
    pub inner: Arc<dyn ChartField<T>>,
    pub phi: Arc<VolumePreservingDiffeo<T>>,
}

impl<T: Real> PushforwardField<T> {
    pub fn new(inner: Arc<dyn ChartField<T>>, phi: Arc<VolumePreservingDiffeo<T>>) -> Result<Self> {
        if inner.space() != phi.space() {
            return Err(Error::Numeric(
                "pushforward: field and diffeomorphism live on different spaces".into(),
            ));
        }
        Ok(Self { inner, phi })
    }
}

impl<T: Real> ChartField<T> for PushforwardField<T> {
    fn space(&self) -> Space {
        self.inner.space()
    }
    fn eval(&self, q: [T; 3]) -> [T; 3] {
        let p = self.phi.inverse_apply(q);
        let v = self.inner.eval(p);
        self.phi.pushforward_vector(p, v)
    }
}
