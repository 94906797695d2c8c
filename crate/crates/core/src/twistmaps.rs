//! Area-preserving annulus maps and their diagnostics.
//!
//! Maps come in three flavours: exact twist maps `(theta1, rho) ->
//! (theta1 + W(rho), rho)` of a shear curl, generating-function perturbations
//! of those (exact by construction, hence satisfying the intersection
//! property), and numerical section return maps of a field. All of them
//! present the same trait: unreduced `theta1` in and out, an annulus of
//! validity, and the invariant area density.
//!
//! Diagnostics: orbit iteration with winding bookkeeping, weighted Birkhoff
//! rotation numbers, resonance location, Newton continuation of periodic
//! orbits, linear stability classification with eigenvalue-resonance flags,
//! and the first twist (Birkhoff) coefficient of an elliptic point measured
//! from the rotation-number profile in the linearizing frame.

use crate::dynamics::{self, IntegratorOpts, SectionSpec};
use crate::error::{Error, Result};
use crate::geometry::ChartField;
use crate::numerics::linalg::{self, Mat2};
use crate::numerics::quad::gauss8;
use crate::numerics::roots::{invert_monotone, scan_roots};
use crate::scalar::{wrap_signed, Real};
use crate::steady::{CurlProfileS3, ShearProfileT3};
use std::sync::Arc;

// ---------------------------------------------------------------------------
// area density and its action coordinate

/// Invariant area density `dens(rho)` of an annulus map together with its
/// cumulative integral (the action coordinate `P(rho)`), cached as a cubic
/// Hermite interpolant with exact node derivatives so that `P` and `P^-1`
/// compose to the identity at solver precision.
pub struct AreaDensity<T> {
    dens: Arc<dyn Fn(T) -> T + Send + Sync>,
    lo: T,
    hi: T,
    h: T,
    action_nodes: Vec<T>,
    dens_nodes: Vec<T>,
}

impl<T: Real> AreaDensity<T> {
    pub fn new(dens: Arc<dyn Fn(T) -> T + Send + Sync>, lo: T, hi: T, n: usize) -> Self {
        let n = n.max(16);
        let h = (hi - lo) / T::of(n as f64);
        let mut action_nodes = Vec::with_capacity(n + 1);
        let mut dens_nodes = Vec::with_capacity(n + 1);
        let mut acc = T::zero();
        action_nodes.push(acc);
        dens_nodes.push(dens(lo));
        for i in 0..n {
            let a = lo + h * T::of(i as f64);
            acc += gauss8(&*dens, a, a + h);
            action_nodes.push(acc);
            dens_nodes.push(dens(a + h));
        }
        Self {
            dens,
            lo,
            hi,
            h,
            action_nodes,
            dens_nodes,
        }
    }

    /// Unit density (trivial action) on `[lo, hi]`.
    pub fn unit(lo: T, hi: T) -> Self {
        Self::new(Arc::new(|_| T::one()), lo, hi, 16)
    }

    pub fn domain(&self) -> (T, T) {
        (self.lo, self.hi)
    }

    pub fn dens(&self, rho: T) -> T {
        (self.dens)(rho)
    }

    fn piece(&self, rho: T) -> (usize, T) {
        let n = self.action_nodes.len() - 1;
        let u = ((rho - self.lo) / self.h).floor();
        let i = (u.as_f64() as isize).clamp(0, n as isize - 1) as usize;
        (i, (rho - (self.lo + self.h * T::of(i as f64))) / self.h)
    }

    /// Action `P(rho) = integral of dens from lo to rho` (cubic Hermite).
    pub fn action(&self, rho: T) -> T {
        let (i, t) = self.piece(rho);
        let y0 = self.action_nodes[i];
        let y1 = self.action_nodes[i + 1];
        let m0 = self.dens_nodes[i] * self.h;
        let m1 = self.dens_nodes[i + 1] * self.h;
        let t2 = t * t;
        let t3 = t2 * t;
        (T::of(2.0) * t3 - T::of(3.0) * t2 + T::one()) * y0
            + (t3 - T::of(2.0) * t2 + t) * m0
            + (-T::of(2.0) * t3 + T::of(3.0) * t2) * y1
            + (t3 - t2) * m1
    }

    fn action_deriv(&self, rho: T) -> T {
        let (i, t) = self.piece(rho);
        let y0 = self.action_nodes[i];
        let y1 = self.action_nodes[i + 1];
        let m0 = self.dens_nodes[i] * self.h;
        let m1 = self.dens_nodes[i + 1] * self.h;
        let t2 = t * t;
        ((T::of(6.0) * t2 - T::of(6.0) * t) * (y0 - y1)
            + (T::of(3.0) * t2 - T::of(4.0) * t + T::one()) * m0
            + (T::of(3.0) * t2 - T::of(2.0) * t) * m1)
            / self.h
    }

    /// Inverse of the action: `rho` with `action(rho) = p`.
    pub fn rho_of_action(&self, p: T) -> Result<T> {
        invert_monotone(
            &|r| self.action(r),
            Some(&|r| self.action_deriv(r)),
            self.lo,
            self.hi,
            p,
            T::of(1e-15),
        )
    }
}

// ---------------------------------------------------------------------------
// the map trait

/// Failure of a single map application.
#[derive(Clone, Debug)]
pub enum MapFail {
    /// The point left the annulus of validity.
    LeftAnnulus,
    /// Evaluation failed (implicit solve, integration, ...).
    Failed(String),
}

impl From<MapFail> for Error {
    fn from(m: MapFail) -> Self {
        match m {
            MapFail::LeftAnnulus => Error::Numeric("point left the annulus".into()),
            MapFail::Failed(s) => Error::Numeric(s),
        }
    }
}

/// Area-preserving annulus map. `x = [theta1, rho]` with `theta1` unreduced
/// on input and output (the output carries the winding of one application).
pub trait AnnulusMap<T: Real>: Send + Sync {
    fn bounds(&self) -> (T, T);
    fn apply(&self, x: [T; 2]) -> Result<[T; 2], MapFail>;
    fn density(&self) -> &AreaDensity<T>;
    /// Exact maps satisfy the intersection property by construction.
    fn is_exact(&self) -> bool;
}

impl<T: Real, M: AnnulusMap<T> + ?Sized> AnnulusMap<T> for &M {
    fn bounds(&self) -> (T, T) {
        (**self).bounds()
    }
    fn apply(&self, x: [T; 2]) -> Result<[T; 2], MapFail> {
        (**self).apply(x)
    }
    fn density(&self) -> &AreaDensity<T> {
        (**self).density()
    }
    fn is_exact(&self) -> bool {
        (**self).is_exact()
    }
}

impl<T: Real, M: AnnulusMap<T> + ?Sized> AnnulusMap<T> for Arc<M> {
    fn bounds(&self) -> (T, T) {
        (**self).bounds()
    }
    fn apply(&self, x: [T; 2]) -> Result<[T; 2], MapFail> {
        (**self).apply(x)
    }
    fn density(&self) -> &AreaDensity<T> {
        (**self).density()
    }
    fn is_exact(&self) -> bool {
        (**self).is_exact()
    }
}

/// `n`-fold composition with failure index.
pub fn apply_n<T: Real>(
    map: &dyn AnnulusMap<T>,
    x: [T; 2],
    n: usize,
) -> Result<[T; 2], (usize, MapFail)> {
    let mut y = x;
    for i in 0..n {
        y = map.apply(y).map_err(|e| (i, e))?;
    }
    Ok(y)
}

// ---------------------------------------------------------------------------
// exact twist maps

/// Exact twist map `(theta1, rho) -> (theta1 + w(rho), rho)`.
pub struct TwistMap<T: Real> {
    w: Arc<dyn Fn(T) -> T + Send + Sync>,
    w_prime: Arc<dyn Fn(T) -> T + Send + Sync>,
    bounds: (T, T),
    density: AreaDensity<T>,
}

impl<T: Real> TwistMap<T> {
    pub fn from_fn(
        w: Arc<dyn Fn(T) -> T + Send + Sync>,
        w_prime: Arc<dyn Fn(T) -> T + Send + Sync>,
        bounds: (T, T),
        density: AreaDensity<T>,
    ) -> Self {
        Self {
            w,
            w_prime,
            bounds,
            density,
        }
    }

    /// Rigid rotation by `2 pi nu` on the unit annulus (test helper).
    pub fn rigid(nu: T) -> Self {
        let w = move |_: T| T::two_pi() * nu;
        Self {
            w: Arc::new(w),
            w_prime: Arc::new(|_| T::zero()),
            bounds: (T::zero(), T::one()),
            density: AreaDensity::unit(T::zero(), T::one()),
        }
    }

    pub fn w(&self, rho: T) -> T {
        (self.w)(rho)
    }

    pub fn w_prime(&self, rho: T) -> T {
        (self.w_prime)(rho)
    }
}

impl<T: Real> AnnulusMap<T> for TwistMap<T> {
    fn bounds(&self) -> (T, T) {
        self.bounds
    }

    fn apply(&self, x: [T; 2]) -> Result<[T; 2], MapFail> {
        let (a, b) = self.bounds;
        if x[1] < a || x[1] > b {
            return Err(MapFail::LeftAnnulus);
        }
        Ok([x[0] + (self.w)(x[1]), x[1]])
    }

    fn density(&self) -> &AreaDensity<T> {
        &self.density
    }

    fn is_exact(&self) -> bool {
        true
    }
}

fn pad_interval<T: Real>(a: T, b: T, clip_unit: bool) -> (T, T) {
    let pad = (b - a) * T::of(0.05);
    let mut lo = a - pad;
    let mut hi = b + pad;
    if clip_unit {
        lo = lo.max(T::of(1e-9));
        hi = hi.min(T::one() - T::of(1e-9));
    }
    (lo, hi)
}

/// Exact section return map of a sphere shear curl on the annulus
/// `rho in (a, b)`: `W = 2 pi d f / g`, invariant density `|g|`.
/// Fails with a section-choice error when `g` changes sign or opposes the
/// crossing direction on the closed annulus (in that case the other angle
/// should be sectioned, giving `W = 2 pi g / f`).
pub fn analytic_return_map<T: Real>(
    curl: &Arc<CurlProfileS3<T>>,
    annulus: (T, T),
    direction: i8,
) -> Result<TwistMap<T>> {
    let (a, b) = annulus;
    let d = T::of(direction as f64);
    let n = 512;
    for i in 0..=n {
        let rho = a + (b - a) * T::of(i as f64) / T::of(n as f64);
        if d * curl.g(rho) <= T::zero() {
            return Err(Error::SectionChoice(format!(
                "g({}) = {} does not match crossing direction {}",
                rho.as_f64(),
                curl.g(rho).as_f64(),
                direction
            )));
        }
    }
    let c1 = curl.clone();
    let c2 = curl.clone();
    let c3 = curl.clone();
    let tau = T::two_pi();
    let w = move |rho: T| tau * d * c1.f(rho) / c1.g(rho);
    let wp = move |rho: T| {
        let g = c2.g(rho);
        tau * d * (c2.f_d1(rho) * g - c2.f(rho) * c2.g_d1(rho)) / (g * g)
    };
    let (lo, hi) = pad_interval(a, b, true);
    let density = AreaDensity::new(Arc::new(move |rho| c3.g(rho).abs()), lo, hi, 2048);
    Ok(TwistMap::from_fn(
        Arc::new(w),
        Arc::new(wp),
        annulus,
        density,
    ))
}

/// Exact section return map of a torus shear curl. `section_axis = 0`
/// sections `{x = const}` (annulus coordinates `(y, z)`); `1` sections
/// `{y = const}` (annulus coordinates `(x, z)`).
pub fn analytic_return_map_t3<T: Real>(
    prof: &Arc<ShearProfileT3<T>>,
    section_axis: usize,
    annulus: (T, T),
    direction: i8,
) -> Result<TwistMap<T>> {
    let (a, b) = annulus;
    let d = T::of(direction as f64);
    // (sectioned, angular) curl components and their z-derivatives
    let comp = move |p: &ShearProfileT3<T>, z: T| -> (T, T) {
        match section_axis {
            0 => (-p.g.d1(z), p.f.d1(z)),
            _ => (p.f.d1(z), -p.g.d1(z)),
        }
    };
    let comp_d = move |p: &ShearProfileT3<T>, z: T| -> (T, T) {
        match section_axis {
            0 => (-p.g.d2(z), p.f.d2(z)),
            _ => (p.f.d2(z), -p.g.d2(z)),
        }
    };
    let n = 512;
    for i in 0..=n {
        let z = a + (b - a) * T::of(i as f64) / T::of(n as f64);
        let (sec, _) = comp(prof, z);
        if d * sec <= T::zero() {
            return Err(Error::SectionChoice(format!(
                "sectioned curl component {} at z={} opposes direction {}",
                sec.as_f64(),
                z.as_f64(),
                direction
            )));
        }
    }
    let p1 = prof.clone();
    let p2 = prof.clone();
    let p3 = prof.clone();
    let tau = T::two_pi();
    let w = move |z: T| {
        let (sec, ang) = comp(&p1, z);
        tau * d * ang / sec
    };
    let wp = move |z: T| {
        let (sec, ang) = comp(&p2, z);
        let (dsec, dang) = comp_d(&p2, z);
        tau * d * (dang * sec - ang * dsec) / (sec * sec)
    };
    let (lo, hi) = pad_interval(a, b, false);
    let density = AreaDensity::new(Arc::new(move |z| comp(&p3, z).0.abs()), lo, hi, 2048);
    Ok(TwistMap::from_fn(
        Arc::new(w),
        Arc::new(wp),
        annulus,
        density,
    ))
}

// ---------------------------------------------------------------------------
// numerical return maps

/// Section return map of a chart field, evaluated by integration.
pub struct NumericReturnMap<T: Real> {
    pub field: Arc<dyn ChartField<T>>,
    pub section: SectionSpec<T>,
    pub opts: IntegratorOpts<T>,
    pub max_transit: T,
    bounds: (T, T),
    density: AreaDensity<T>,
}

impl<T: Real> NumericReturnMap<T> {
    pub fn new(
        field: Arc<dyn ChartField<T>>,
        section: SectionSpec<T>,
        opts: IntegratorOpts<T>,
        max_transit: T,
        bounds: (T, T),
        density: AreaDensity<T>,
    ) -> Self {
        Self {
            field,
            section,
            opts,
            max_transit,
            bounds,
            density,
        }
    }

    /// Build the section state from annulus coordinates.
    pub fn section_state(&self, x: [T; 2]) -> [T; 3] {
        let (angle_axis, trans_axis) = self.section.annulus_axes();
        let mut q = [T::zero(); 3];
        q[angle_axis] = x[0];
        q[trans_axis] = x[1];
        q[self.section.axis] = T::zero();
        q
    }

    /// Full return data (transit time included) for one application.
    pub fn return_data(&self, x: [T; 2]) -> Result<dynamics::ReturnData<T>> {
        dynamics::return_map(
            &self.field,
            &self.section,
            self.section_state(x),
            &self.opts,
            self.max_transit,
        )
    }
}

impl<T: Real> AnnulusMap<T> for NumericReturnMap<T> {
    fn bounds(&self) -> (T, T) {
        self.bounds
    }

    fn apply(&self, x: [T; 2]) -> Result<[T; 2], MapFail> {
        let (a, b) = self.bounds;
        if x[1] < a || x[1] > b {
            return Err(MapFail::LeftAnnulus);
        }
        let (angle_axis, trans_axis) = self.section.annulus_axes();
        match self.return_data(x) {
            Ok(r) => Ok([x[0] + r.delta[angle_axis], r.state[trans_axis]]),
            Err(Error::Escape { .. }) => Err(MapFail::LeftAnnulus),
            Err(e) => Err(MapFail::Failed(e.to_string())),
        }
    }

    fn density(&self) -> &AreaDensity<T> {
        &self.density
    }

    fn is_exact(&self) -> bool {
        // section maps of divergence-free fields on the sphere are exact
        true
    }
}

// ---------------------------------------------------------------------------
// generating-function perturbations

/// `C^2` compactly supported bump `(1 - u^2)^3` on `|u| < 1`.
pub fn bump<T: Real>(u: T) -> T {
    if u.abs() >= T::one() {
        return T::zero();
    }
    let v = T::one() - u * u;
    v * v * v
}

pub fn bump_d1<T: Real>(u: T) -> T {
    if u.abs() >= T::one() {
        return T::zero();
    }
    let v = T::one() - u * u;
    -T::of(6.0) * u * v * v
}

pub fn bump_d2<T: Real>(u: T) -> T {
    if u.abs() >= T::one() {
        return T::zero();
    }
    let u2 = u * u;
    (T::one() - u2) * (T::of(30.0) * u2 - T::of(6.0))
}

/// Exact area-preserving perturbation defined by the generating function
/// `theta1 P + eps s(theta1, P)` with
/// `s = cos(harmonic * theta1) * bump((rho(P) - center)/radius)`.
/// The induced map is the identity outside the bump support.
#[derive(Clone, Debug)]
pub struct GeneratingPerturbation<T> {
    pub eps: T,
    /// Angular wavenumber of the perturbation (the resonance order `q`).
    pub harmonic: u32,
    /// Resonant circle the bump is centred on.
    pub center: T,
    /// Bump support radius in the transverse coordinate.
    pub radius: T,
    pub solve_tol: T,
    pub max_iter: usize,
}

impl<T: Real> GeneratingPerturbation<T> {
    pub fn new(eps: T, harmonic: u32, center: T, radius: T) -> Self {
        Self {
            eps,
            harmonic,
            center,
            radius,
            solve_tol: T::of(1e-15),
            max_iter: 80,
        }
    }

    #[inline]
    pub fn u(&self, rho: T) -> T {
        (rho - self.center) / self.radius
    }

    /// `ds/dtheta1` at `(theta1, rho(P))`.
    #[inline]
    pub fn s_q(&self, theta1: T, rho: T) -> T {
        let k = T::of(self.harmonic as f64);
        -k * (k * theta1).sin() * bump(self.u(rho))
    }

    /// `ds/dP` at `(theta1, rho(P))`, where `dP = dens * drho`.
    #[inline]
    pub fn s_p(&self, theta1: T, rho: T, dens: T) -> T {
        let k = T::of(self.harmonic as f64);
        (k * theta1).cos() * bump_d1(self.u(rho)) / (self.radius * dens)
    }
}

/// Composition `base o phi_eps` with `phi_eps` the exact generating-function
/// map.
pub struct PerturbedMap<T: Real> {
    pub base: Arc<dyn AnnulusMap<T>>,
    pub pert: GeneratingPerturbation<T>,
}

impl<T: Real> PerturbedMap<T> {
    /// The exact perturbation alone, scaled by `t` along the generating
    /// family `theta1 P + t eps s`.
    pub fn phi(&self, x: [T; 2], t: T) -> Result<[T; 2], MapFail> {
        let pert = &self.pert;
        let dens = self.base.density();
        if pert.eps * t == T::zero() || (x[1] - pert.center).abs() >= pert.radius {
            return Ok(x);
        }
        let eps_t = pert.eps * t;
        let p0 = dens.action(x[1]);
        let tol = pert
            .solve_tol
            .max(T::epsilon() * T::of(4.0) * (p0.abs() + T::one()));
        let mut p = p0;
        let mut rho = x[1];
        let mut converged = false;
        for _ in 0..pert.max_iter {
            let p_next = p0 - eps_t * pert.s_q(x[0], rho);
            let delta = (p_next - p).abs();
            p = p_next;
            rho = dens
                .rho_of_action(p)
                .map_err(|e| MapFail::Failed(e.to_string()))?;
            if delta <= tol {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(MapFail::Failed(
                "generating-function solve did not contract (amplitude too large)".into(),
            ));
        }
        let theta_out = x[0] + eps_t * pert.s_p(x[0], rho, dens.dens(rho));
        Ok([theta_out, rho])
    }
}

impl<T: Real> AnnulusMap<T> for PerturbedMap<T> {
    fn bounds(&self) -> (T, T) {
        self.base.bounds()
    }

    fn apply(&self, x: [T; 2]) -> Result<[T; 2], MapFail> {
        let y = self.phi(x, T::one())?;
        self.base.apply(y)
    }

    fn density(&self) -> &AreaDensity<T> {
        self.base.density()
    }

    fn is_exact(&self) -> bool {
        self.base.is_exact()
    }
}

/// Build the perturbed map, verifying the contraction condition of the
/// implicit solve up front.
pub fn perturb<T: Real>(
    base: Arc<dyn AnnulusMap<T>>,
    pert: GeneratingPerturbation<T>,
) -> Result<Arc<PerturbedMap<T>>> {
    let k = T::of(pert.harmonic as f64);
    let (a, b) = base.bounds();
    let mut min_dens = T::infinity();
    for i in 0..=256 {
        let rho = a + (b - a) * T::of(i as f64) / T::of(256.0);
        min_dens = min_dens.min(base.density().dens(rho).abs());
    }
    // sup |eps ds_q/dP| = eps k max|bump'| / (radius min dens); max |bump'|
    // sits at u = 1/sqrt(5)
    let u_star = T::of(1.0 / 5.0f64.sqrt());
    let max_bump_d1 = bump_d1(u_star).abs();
    let contraction = pert.eps.abs() * k * max_bump_d1 / (pert.radius * min_dens);
    if contraction >= T::of(0.5) {
        return Err(Error::AmplitudeTooLarge(format!(
            "implicit-solve contraction factor {:.3} >= 0.5 at eps={:e}",
            contraction.as_f64(),
            pert.eps.as_f64()
        )));
    }
    let map = PerturbedMap { base, pert };
    // spot-check convergence on the resonant circle
    for i in 0..8 {
        let theta = T::two_pi() * T::of(i as f64) / T::of(8.0);
        map.phi([theta, map.pert.center], T::one())
            .map_err(|e| Error::AmplitudeTooLarge(format!("{e:?}")))?;
    }
    Ok(Arc::new(map))
}

// ---------------------------------------------------------------------------
// orbits, rotation numbers, resonances

#[derive(Clone, Debug)]
pub struct Orbit<T> {
    /// Successive states, starting with the seed; `theta1` accumulates.
    pub points: Vec<[T; 2]>,
    /// Index of the application that failed by leaving the annulus.
    pub escape_index: Option<usize>,
    pub failure: Option<String>,
}

impl<T: Real> Orbit<T> {
    pub fn escaped(&self) -> bool {
        self.escape_index.is_some()
    }
}

/// Iterate a map `n` times with winding bookkeeping.
pub fn iterate<T: Real>(map: &dyn AnnulusMap<T>, x0: [T; 2], n: usize) -> Orbit<T> {
    let mut points = Vec::with_capacity(n + 1);
    points.push(x0);
    let mut x = x0;
    for i in 0..n {
        match map.apply(x) {
            Ok(y) => {
                points.push(y);
                x = y;
            }
            Err(MapFail::LeftAnnulus) => {
                return Orbit {
                    points,
                    escape_index: Some(i),
                    failure: None,
                }
            }
            Err(MapFail::Failed(s)) => {
                return Orbit {
                    points,
                    escape_index: Some(i),
                    failure: Some(s),
                }
            }
        }
    }
    Orbit {
        points,
        escape_index: None,
        failure: None,
    }
}

/// Exponential bump weight for weighted Birkhoff averages.
fn birkhoff_weight<T: Real>(t: T) -> T {
    if t <= T::zero() || t >= T::one() {
        return T::zero();
    }
    (-T::one() / (t * (T::one() - t))).exp()
}

/// Weighted Birkhoff average of a sequence.
pub fn weighted_birkhoff<T: Real>(values: &[T]) -> T {
    let n = values.len();
    if n == 0 {
        return T::zero();
    }
    let mut num = T::zero();
    let mut den = T::zero();
    for (i, v) in values.iter().enumerate() {
        let w = birkhoff_weight(T::of((i + 1) as f64) / T::of((n + 1) as f64));
        num += w * *v;
        den += w;
    }
    num / den
}

#[derive(Clone, Copy, Debug)]
pub struct RotationEstimate<T> {
    /// Rotation number in `[0, 1)`.
    pub value: T,
    /// Signed mean winding per iterate, in turns (not reduced).
    pub signed: T,
    /// Difference between the full-orbit and half-orbit estimates.
    pub confidence: T,
    /// True when the orbit ended early (escape) and the estimate is partial.
    pub partial: bool,
    pub n_used: usize,
}

/// Weighted Birkhoff rotation number of the orbit of `x0`.
pub fn rotation_number<T: Real>(
    map: &dyn AnnulusMap<T>,
    x0: [T; 2],
    n: usize,
) -> RotationEstimate<T> {
    let orbit = iterate(map, x0, n);
    rotation_number_of_orbit(&orbit, n)
}

/// Rotation estimate from an already-computed orbit.
pub fn rotation_number_of_orbit<T: Real>(
    orbit: &Orbit<T>,
    n_requested: usize,
) -> RotationEstimate<T> {
    let pts = &orbit.points;
    let m = pts.len().saturating_sub(1);
    if m < 8 {
        return RotationEstimate {
            value: T::zero(),
            signed: T::zero(),
            confidence: T::infinity(),
            partial: true,
            n_used: m,
        };
    }
    let tau = T::two_pi();
    let incr: Vec<T> = (0..m).map(|i| (pts[i + 1][0] - pts[i][0]) / tau).collect();
    let full = weighted_birkhoff(&incr);
    let half = weighted_birkhoff(&incr[..m / 2]);
    let signed = full;
    let value = signed - signed.floor();
    RotationEstimate {
        value,
        signed,
        confidence: (full - half).abs(),
        partial: orbit.escaped() || m < n_requested,
        n_used: m,
    }
}

/// All `c` in the annulus with `w(c) = 2 pi p / q` (signed `p`), located by a
/// dense scan plus bisection (multiplicity-aware: every sign-change root is
/// returned).
pub fn find_resonance<T: Real>(
    w: &dyn Fn(T) -> T,
    bounds: (T, T),
    p: i64,
    q: u32,
) -> Result<Vec<T>> {
    if q == 0 {
        return Err(Error::Numeric("resonance order q must be positive".into()));
    }
    if gcd(p.unsigned_abs(), q as u64) != 1 {
        return Err(Error::Numeric(format!("p/q must be coprime, got {p}/{q}")));
    }
    let target = T::two_pi() * T::of(p as f64) / T::of(q as f64);
    let roots = scan_roots(&|r| w(r) - target, bounds.0, bounds.1, 4096, T::of(1e-12));
    Ok(roots)
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

// ---------------------------------------------------------------------------
// periodic orbits

#[derive(Clone, Debug)]
pub struct PeriodicOrbit<T> {
    pub q: u32,
    /// Signed winding number over one period: total `theta1` advance is
    /// `2 pi p`.
    pub p: i64,
    /// The `q` points of the orbit (`theta1` reduced to `[0, 2 pi)`).
    pub points: Vec<[T; 2]>,
    /// `sup |Pi^q(x0) - x0 - (2 pi p, 0)|`.
    pub residual: T,
    pub mean_rho: T,
}

#[derive(Clone, Debug)]
pub struct FindPeriodicResult<T> {
    pub orbits: Vec<PeriodicOrbit<T>>,
    pub seeds_tried: usize,
    pub seeds_converged: usize,
    /// Degenerate resonance signature: essentially every seed is its own
    /// periodic point (unbroken resonant circle).
    pub whole_circle: bool,
}

#[derive(Clone, Copy, Debug)]
pub struct NewtonOpts<T> {
    pub max_iter: usize,
    pub fd_step_frac: T,
    pub tol: T,
    pub dedup_tol: T,
    /// Solutions farther than this from the seed circle are discarded
    /// (fraction of the annulus width).
    pub max_drift_frac: T,
}

impl<T: Real> Default for NewtonOpts<T> {
    fn default() -> Self {
        Self {
            max_iter: 40,
            fd_step_frac: T::of(1e-6),
            tol: T::of(1e-11),
            dedup_tol: T::of(1e-6),
            max_drift_frac: T::of(0.12),
        }
    }
}

fn period_residual<T: Real>(map: &dyn AnnulusMap<T>, x: [T; 2], q: u32, p: i64) -> Option<[T; 2]> {
    let y = apply_n(map, x, q as usize).ok()?;
    Some([y[0] - x[0] - T::two_pi() * T::of(p as f64), y[1] - x[1]])
}

/// Newton search for period-`q` orbits seeded on the circle `rho = c`.
pub fn find_periodic<T: Real>(
    map: &dyn AnnulusMap<T>,
    q: u32,
    c: T,
    n_seeds: usize,
    opts: &NewtonOpts<T>,
) -> FindPeriodicResult<T> {
    let (a, b) = map.bounds();
    let width = b - a;
    let h = opts.fd_step_frac * width;
    let mut found: Vec<PeriodicOrbit<T>> = Vec::new();
    let mut converged = 0usize;
    let tau = T::two_pi();

    for seed_idx in 0..n_seeds {
        let theta0 = tau * T::of(seed_idx as f64) / T::of(n_seeds as f64);
        let mut x = [theta0, c];
        // fix the winding target from the seed
        let p = match apply_n(map, x, q as usize) {
            Ok(y) => ((y[0] - x[0]) / tau).round().as_f64() as i64,
            Err(_) => continue,
        };
        let mut ok = false;
        for _ in 0..opts.max_iter {
            let f = match period_residual(map, x, q, p) {
                Some(f) => f,
                None => break,
            };
            let fn_norm = f[0].abs().max(f[1].abs());
            if fn_norm <= opts.tol {
                ok = true;
                break;
            }
            let mut jac: Mat2<T> = [[T::zero(); 2]; 2];
            let mut bad = false;
            for j in 0..2 {
                let mut xp = x;
                let mut xm = x;
                xp[j] += h;
                xm[j] -= h;
                match (
                    period_residual(map, xp, q, p),
                    period_residual(map, xm, q, p),
                ) {
                    (Some(fp), Some(fm)) => {
                        for i in 0..2 {
                            jac[i][j] = (fp[i] - fm[i]) / (T::of(2.0) * h);
                        }
                    }
                    _ => {
                        bad = true;
                        break;
                    }
                }
            }
            if bad {
                break;
            }
            match linalg::solve2(&jac, &f) {
                Some(step) => {
                    let cap = T::of(0.2) * width;
                    let mut limited = step;
                    for s in &mut limited {
                        *s = s.min(cap).max(-cap);
                    }
                    x = [x[0] - limited[0], x[1] - limited[1]];
                    if x[1] < a || x[1] > b {
                        break;
                    }
                }
                None => break,
            }
        }
        if !ok {
            continue;
        }
        if (x[1] - c).abs() > opts.max_drift_frac * width {
            continue;
        }
        converged += 1;
        let mut pts = Vec::with_capacity(q as usize);
        let mut y = x;
        let mut valid = true;
        for _ in 0..q {
            pts.push([crate::scalar::wrap_angle(y[0]), y[1]]);
            match map.apply(y) {
                Ok(z) => y = z,
                Err(_) => {
                    valid = false;
                    break;
                }
            }
        }
        if !valid {
            continue;
        }
        let f = period_residual(map, x, q, p).unwrap_or([T::infinity(); 2]);
        let residual = f[0].abs().max(f[1].abs());
        let mean_rho = pts.iter().map(|p| p[1]).sum::<T>() / T::of(q as f64);
        let orbit = PeriodicOrbit {
            q,
            p,
            points: pts,
            residual,
            mean_rho,
        };
        let mut duplicate = false;
        'outer: for other in &found {
            for pa in &orbit.points {
                for pb in &other.points {
                    let dth = crate::scalar::circular_dist(pa[0], pb[0]);
                    let dr = (pa[1] - pb[1]).abs();
                    if dth < opts.dedup_tol && dr < opts.dedup_tol {
                        duplicate = true;
                        break 'outer;
                    }
                }
            }
        }
        if !duplicate {
            found.push(orbit);
        }
    }
    let whole_circle = found.len() * (q as usize) > n_seeds.max(1) * 4 / 5 && found.len() > 4;
    FindPeriodicResult {
        orbits: found,
        seeds_tried: n_seeds,
        seeds_converged: converged,
        whole_circle,
    }
}

// ---------------------------------------------------------------------------
// linear stability and the first twist coefficient

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StabilityVerdict {
    EllipticNondegenerate,
    EllipticResonant,
    EllipticDegenerateTwist,
    /// Elliptic, twist fit skipped or unavailable.
    EllipticUnresolved,
    Hyperbolic,
    Parabolic,
}

#[derive(Clone, Debug)]
pub struct FixedPointClass<T> {
    /// Base point of the orbit (`theta1` reduced).
    pub point: [T; 2],
    pub q: u32,
    pub p: i64,
    /// Eigenvalue of `D Pi^q` (complex for elliptic, real for hyperbolic).
    pub lambda: (T, T),
    /// Rotation angle of the linearization, radians, signed by orientation.
    pub omega: T,
    pub trace: T,
    pub det: T,
    /// `|lambda^k - 1| < tol` for `k = 1..4`.
    pub resonance_flags: [bool; 4],
    /// First twist coefficient estimate `(alpha, sigma)` when fitted.
    pub alpha: Option<(T, T)>,
    pub verdict: StabilityVerdict,
}

#[derive(Clone, Copy, Debug)]
pub struct ClassifyOpts<T> {
    pub fd_step_frac: T,
    pub resonance_tol: T,
    pub parabolic_zone: T,
    /// Fit the twist coefficient when the point is elliptic nonresonant.
    pub fit_twist: bool,
    pub twist: TwistFitOpts<T>,
}

impl<T: Real> Default for ClassifyOpts<T> {
    fn default() -> Self {
        Self {
            fd_step_frac: T::of(1e-6),
            resonance_tol: T::of(1e-4),
            parabolic_zone: T::of(1e-6),
            fit_twist: true,
            twist: TwistFitOpts::default(),
        }
    }
}

/// Jacobian of one map application by central differences.
pub fn jacobian_fd<T: Real>(map: &dyn AnnulusMap<T>, x: [T; 2], h: T) -> Result<Mat2<T>> {
    let mut jac: Mat2<T> = [[T::zero(); 2]; 2];
    for j in 0..2 {
        let mut xp = x;
        let mut xm = x;
        xp[j] += h;
        xm[j] -= h;
        let fp = map.apply(xp).map_err(Error::from)?;
        let fm = map.apply(xm).map_err(Error::from)?;
        for i in 0..2 {
            jac[i][j] = (fp[i] - fm[i]) / (T::of(2.0) * h);
        }
    }
    Ok(jac)
}

/// `D Pi^q` along the orbit by chained per-point Jacobians.
pub fn jacobian_period<T: Real>(
    map: &dyn AnnulusMap<T>,
    orbit: &PeriodicOrbit<T>,
    h: T,
) -> Result<Mat2<T>> {
    let mut m: Mat2<T> = [[T::one(), T::zero()], [T::zero(), T::one()]];
    for pt in &orbit.points {
        let j = jacobian_fd(map, *pt, h)?;
        m = linalg::mat_mul(&j, &m);
    }
    Ok(m)
}

/// Linear stability of a periodic orbit, with eigenvalue resonance flags and
/// (for elliptic nonresonant points) the first twist coefficient.
pub fn classify<T: Real>(
    map: &dyn AnnulusMap<T>,
    orbit: &PeriodicOrbit<T>,
    opts: &ClassifyOpts<T>,
) -> Result<FixedPointClass<T>> {
    let (a, b) = map.bounds();
    let h = opts.fd_step_frac * (b - a);
    let m = jacobian_period(map, orbit, h)?;
    let tr = linalg::trace(&m);
    let dt = linalg::det(&m);
    let tr_norm = if dt > T::zero() { tr / dt.sqrt() } else { tr };

    let two = T::of(2.0);
    let mut resonance_flags = [false; 4];
    let point = orbit.points[0];

    if (tr_norm.abs() - two).abs() < opts.parabolic_zone {
        return Ok(FixedPointClass {
            point,
            q: orbit.q,
            p: orbit.p,
            lambda: (tr_norm / two, T::zero()),
            omega: T::zero(),
            trace: tr,
            det: dt,
            resonance_flags,
            alpha: None,
            verdict: StabilityVerdict::Parabolic,
        });
    }

    if tr_norm.abs() > two {
        let disc = (tr_norm * tr_norm / T::of(4.0) - T::one()).sqrt();
        let lam = tr_norm / two + disc * tr_norm.signum();
        return Ok(FixedPointClass {
            point,
            q: orbit.q,
            p: orbit.p,
            lambda: (lam, T::zero()),
            omega: T::zero(),
            trace: tr,
            det: dt,
            resonance_flags,
            alpha: None,
            verdict: StabilityVerdict::Hyperbolic,
        });
    }

    let (_, omega) = linalg::elliptic_frame(&m)
        .ok_or_else(|| Error::Numeric("elliptic frame construction failed".into()))?;
    let lambda = (omega.cos(), omega.sin());
    for (k, flag) in resonance_flags.iter_mut().enumerate() {
        let kw = T::of((k + 1) as f64) * omega;
        // |e^{i k w} - 1| = 2 |sin(k w / 2)|
        let dist = two * (kw / two).sin().abs();
        *flag = dist < opts.resonance_tol;
    }
    if resonance_flags.iter().any(|&f| f) {
        return Ok(FixedPointClass {
            point,
            q: orbit.q,
            p: orbit.p,
            lambda,
            omega,
            trace: tr,
            det: dt,
            resonance_flags,
            alpha: None,
            verdict: StabilityVerdict::EllipticResonant,
        });
    }

    let mut alpha = None;
    let mut verdict = StabilityVerdict::EllipticUnresolved;
    if opts.fit_twist {
        if let Ok(fit) = twist_fit(map, orbit, &opts.twist) {
            let nondeg = fit.alpha.abs() > T::of(3.0) * fit.alpha_sigma;
            alpha = Some((fit.alpha, fit.alpha_sigma));
            verdict = if nondeg {
                StabilityVerdict::EllipticNondegenerate
            } else {
                StabilityVerdict::EllipticDegenerateTwist
            };
        }
    }
    Ok(FixedPointClass {
        point,
        q: orbit.q,
        p: orbit.p,
        lambda,
        omega,
        trace: tr,
        det: dt,
        resonance_flags,
        alpha,
        verdict,
    })
}

#[derive(Clone, Copy, Debug)]
pub struct TwistFitOpts<T> {
    /// Largest probe radius in the linearizing frame.
    pub r_max: T,
    pub n_radii: usize,
    pub decay: T,
    pub n_iter: usize,
}

impl<T: Real> Default for TwistFitOpts<T> {
    fn default() -> Self {
        Self {
            r_max: T::of(5e-3),
            n_radii: 6,
            decay: T::of(0.72),
            n_iter: 3000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct TwistFit<T> {
    pub radii: Vec<T>,
    pub mean_r2: Vec<T>,
    /// Measured rotation angle of `Pi^q` per application at each radius.
    pub values: Vec<T>,
    pub omega: T,
    pub alpha: T,
    pub alpha_sigma: T,
    pub residual: T,
}

/// Local polar view of `Pi^q` around an elliptic periodic point: coordinates
/// `(phi, r)` in the linearizing frame, `phi` unreduced. Usable as an
/// annulus map for KAM probing.
pub struct LocalPolarMap<'m, T: Real> {
    map: &'m dyn AnnulusMap<T>,
    pub center: [T; 2],
    pub frame: Mat2<T>,
    pub frame_inv: Mat2<T>,
    pub q: u32,
    pub p: i64,
    r_bounds: (T, T),
    density: AreaDensity<T>,
}

impl<'m, T: Real> LocalPolarMap<'m, T> {
    pub fn new(
        map: &'m dyn AnnulusMap<T>,
        orbit: &PeriodicOrbit<T>,
        r_bounds: (T, T),
        fd_step_frac: T,
    ) -> Result<Self> {
        let (a, b) = map.bounds();
        let h = fd_step_frac * (b - a);
        let m = jacobian_period(map, orbit, h)?;
        let (frame, _) = linalg::elliptic_frame(&m)
            .ok_or_else(|| Error::Numeric("point is not elliptic".into()))?;
        let frame_inv = linalg::inverse(&frame)
            .ok_or_else(|| Error::Numeric("frame not invertible".into()))?;
        let density = AreaDensity::new(
            Arc::new(|r: T| r.abs().max(T::of(1e-30))),
            r_bounds.0,
            r_bounds.1,
            64,
        );
        Ok(Self {
            map,
            center: orbit.points[0],
            frame,
            frame_inv,
            q: orbit.q,
            p: orbit.p,
            r_bounds,
            density,
        })
    }

    /// Ambient annulus point at local polar coordinates.
    pub fn embed(&self, phi: T, r: T) -> [T; 2] {
        let local = [r * phi.cos(), r * phi.sin()];
        let v = linalg::mat_vec(&self.frame, &local);
        [self.center[0] + v[0], self.center[1] + v[1]]
    }
}

impl<'m, T: Real> AnnulusMap<T> for LocalPolarMap<'m, T> {
    fn bounds(&self) -> (T, T) {
        self.r_bounds
    }

    fn apply(&self, x: [T; 2]) -> Result<[T; 2], MapFail> {
        let (rlo, rhi) = self.r_bounds;
        if x[1] < rlo || x[1] > rhi {
            return Err(MapFail::LeftAnnulus);
        }
        let pt = self.embed(x[0], x[1]);
        let y = apply_n(self.map, pt, self.q as usize).map_err(|(_, e)| e)?;
        let u = [
            y[0] - T::two_pi() * T::of(self.p as f64) - self.center[0],
            y[1] - self.center[1],
        ];
        let local = linalg::mat_vec(&self.frame_inv, &u);
        let r = (local[0] * local[0] + local[1] * local[1]).sqrt();
        let phi_new = local[1].atan2(local[0]);
        let dphi = wrap_signed(phi_new - x[0]);
        Ok([x[0] + dphi, r])
    }

    fn density(&self) -> &AreaDensity<T> {
        &self.density
    }

    fn is_exact(&self) -> bool {
        self.map.is_exact()
    }
}

/// Rotation-vs-radius fit on any polar-type map (`x = [phi, r]`, rotation
/// angle per application near `omega`): least squares of
/// `W(r) ~ omega + alpha r^2` over a geometric radius schedule.
pub fn twist_fit_polar<T: Real>(
    polar: &dyn AnnulusMap<T>,
    opts: &TwistFitOpts<T>,
) -> Result<TwistFit<T>> {
    let mut radii = Vec::new();
    let mut mean_r2 = Vec::new();
    let mut values = Vec::new();
    let mut r = opts.r_max;
    for _ in 0..opts.n_radii {
        let orbit_pts = iterate(polar, [T::zero(), r], opts.n_iter);
        if orbit_pts.escaped() || orbit_pts.points.len() < opts.n_iter / 2 {
            r *= opts.decay;
            continue;
        }
        let rot = rotation_number_of_orbit(&orbit_pts, opts.n_iter);
        let msq = orbit_pts.points.iter().map(|p| p[1] * p[1]).sum::<T>()
            / T::of(orbit_pts.points.len() as f64);
        radii.push(r);
        mean_r2.push(msq);
        values.push(rot.signed * T::two_pi());
        r *= opts.decay;
    }
    if radii.len() < 3 {
        return Err(Error::FitFailed(format!(
            "only {} usable probe radii around the elliptic point",
            radii.len()
        )));
    }
    let n = T::of(radii.len() as f64);
    let sx = mean_r2.iter().copied().sum::<T>();
    let sxx = mean_r2.iter().map(|&x| x * x).sum::<T>();
    let sy = values.iter().copied().sum::<T>();
    let sxy = mean_r2
        .iter()
        .zip(values.iter())
        .map(|(&x, &y)| x * y)
        .sum::<T>();
    let denom = n * sxx - sx * sx;
    if denom.abs() < T::epsilon() {
        return Err(Error::FitFailed("degenerate radius schedule".into()));
    }
    let alpha = (n * sxy - sx * sy) / denom;
    let omega = (sy - alpha * sx) / n;
    let mut rss = T::zero();
    for (&x, &y) in mean_r2.iter().zip(values.iter()) {
        let e = y - (omega + alpha * x);
        rss += e * e;
    }
    let dof = T::of((radii.len().max(3) - 2) as f64);
    let sigma2 = rss / dof;
    let alpha_sigma = (sigma2 * n / denom).sqrt().max(T::of(1e-300));
    Ok(TwistFit {
        radii,
        mean_r2,
        values,
        omega,
        alpha,
        alpha_sigma,
        residual: rss.sqrt(),
    })
}

/// Measure the rotation-angle profile of `Pi^q` around an elliptic periodic
/// point and fit the first twist coefficient.
pub fn twist_fit<T: Real>(
    map: &dyn AnnulusMap<T>,
    orbit: &PeriodicOrbit<T>,
    opts: &TwistFitOpts<T>,
) -> Result<TwistFit<T>> {
    let polar = LocalPolarMap::new(map, orbit, (T::zero(), T::of(1e9)), T::of(1e-6))?;
    twist_fit_polar(&polar, opts)
}

/// Sampled area-preservation residual `|det DPi * dens(rho')/dens(rho) - 1|`.
pub fn area_residual<T: Real>(map: &dyn AnnulusMap<T>, n_samples: usize, seed: u64) -> Result<T> {
    let (a, b) = map.bounds();
    let h = T::of(1e-6) * (b - a);
    let margin = (b - a) * T::of(0.02);
    let mut worst = T::zero();
    for k in 0..n_samples {
        let theta = T::two_pi() * T::of(crate::numerics::rng::uniform01(seed, k as u64));
        let rho = a
            + margin
            + (b - a - T::of(2.0) * margin)
                * T::of(crate::numerics::rng::uniform01(seed ^ 0x5b, k as u64));
        let x = [theta, rho];
        let jac = jacobian_fd(map, x, h)?;
        let y = map.apply(x).map_err(Error::from)?;
        let ratio = map.density().dens(y[1]) / map.density().dens(x[1]);
        let resid = (linalg::det(&jac) * ratio - T::one()).abs();
        worst = worst.max(resid);
    }
    Ok(worst)
}

/// Intersection-property check: each circle `rho = const` must intersect its
/// image (the signed radial displacement changes sign or vanishes).
pub fn intersection_property<T: Real>(
    map: &dyn AnnulusMap<T>,
    n_circles: usize,
    n_theta: usize,
) -> Result<bool> {
    let (a, b) = map.bounds();
    let margin = (b - a) * T::of(0.05);
    for ic in 0..n_circles {
        let rho = a
            + margin
            + (b - a - T::of(2.0) * margin) * T::of(ic as f64)
                / T::of((n_circles - 1).max(1) as f64);
        let mut has_pos = false;
        let mut has_neg = false;
        let mut all_zero = true;
        for it in 0..n_theta {
            let theta = T::two_pi() * T::of(it as f64) / T::of(n_theta as f64);
            let y = map.apply([theta, rho]).map_err(Error::from)?;
            let d = y[1] - rho;
            if d.abs() > T::of(1e-14) {
                all_zero = false;
                if d > T::zero() {
                    has_pos = true;
                } else {
                    has_neg = true;
                }
            }
        }
        if !(all_zero || (has_pos && has_neg)) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::Profile1D;
    use crate::steady::ShearProfileS3;

    fn example_curl() -> Arc<CurlProfileS3<f64>> {
        let prof = Arc::new(ShearProfileS3::new(
            Profile1D::parse("1 + rho", "rho").unwrap(),
            Profile1D::constant(0.0),
        ));
        Arc::new(prof.curl())
    }

    fn example_map() -> TwistMap<f64> {
        analytic_return_map(&example_curl(), (0.05, 0.95), 1).unwrap()
    }

    #[test]
    fn analytic_map_values() {
        let map = analytic_return_map(&example_curl(), (0.1, 0.9), 1).unwrap();
        for i in 0..=16 {
            let rho = 0.1 + 0.8 * i as f64 / 16.0;
            let want = -8.0 * std::f64::consts::PI * rho / (2.0 + 4.0 * rho);
            assert!((map.w(rho) - want).abs() < 1e-12);
        }
        // W'(0.5) = -pi
        assert!((map.w_prime(0.5) + std::f64::consts::PI).abs() < 1e-12);
        // f1 = f2 = const has curl component f == 0: identity map on theta1
        let idp: Arc<ShearProfileS3<f64>> = Arc::new(ShearProfileS3::new(
            Profile1D::constant(1.0),
            Profile1D::constant(1.0),
        ));
        let idm = analytic_return_map(&Arc::new(idp.curl()), (0.1, 0.9), 1).unwrap();
        assert!(idm.w(0.3).abs() < 1e-14);
    }

    #[test]
    fn analytic_map_rejects_bad_direction() {
        assert!(matches!(
            analytic_return_map(&example_curl(), (0.1, 0.9), -1),
            Err(Error::SectionChoice(_))
        ));
    }

    #[test]
    fn action_coordinate_roundtrip() {
        let map = example_map();
        let d = map.density();
        for i in 0..=50 {
            let rho = 0.06 + 0.88 * i as f64 / 50.0;
            let p = d.action(rho);
            let back = d.rho_of_action(p).unwrap();
            assert!((back - rho).abs() < 1e-13, "rho={rho} back={back}");
        }
        // for g = 2 + 4 rho the action is exactly 2(rho - lo) + 2(rho^2 - lo^2)
        let (lo, _) = d.domain();
        let p = d.action(0.5);
        let want = 2.0 * (0.5 - lo) + 2.0 * (0.25 - lo * lo);
        assert!((p - want).abs() < 1e-12);
    }

    #[test]
    fn iterate_rigid_rotation() {
        let map = TwistMap::rigid(0.25);
        let orbit = iterate(&map, [0.0, 0.5], 4);
        assert_eq!(orbit.points.len(), 5);
        assert!((orbit.points[4][0] - std::f64::consts::TAU).abs() < 1e-14);
        assert!(!orbit.escaped());
    }

    #[test]
    fn iterate_period_two_circle() {
        let map = example_map();
        // W(0.5) = -pi: two applications advance theta1 by -2 pi
        let orbit = iterate(&map, [0.3, 0.5], 2);
        assert!((orbit.points[2][0] - (0.3 - std::f64::consts::TAU)).abs() < 1e-13);
        assert!((orbit.points[2][1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn iterate_escape_reports_index() {
        struct Drift(AreaDensity<f64>);
        impl AnnulusMap<f64> for Drift {
            fn bounds(&self) -> (f64, f64) {
                (0.0, 1.0)
            }
            fn apply(&self, x: [f64; 2]) -> Result<[f64; 2], MapFail> {
                if x[1] > 1.0 {
                    return Err(MapFail::LeftAnnulus);
                }
                Ok([x[0], x[1] + 0.3])
            }
            fn density(&self) -> &AreaDensity<f64> {
                &self.0
            }
            fn is_exact(&self) -> bool {
                false
            }
        }
        let orbit = iterate(&Drift(AreaDensity::unit(0.0, 1.0)), [0.0, 0.5], 10);
        assert_eq!(orbit.escape_index, Some(2));
    }

    #[test]
    fn rotation_number_golden() {
        let nu = (5.0f64.sqrt() - 1.0) / 2.0;
        let map = TwistMap::rigid(nu);
        let est = rotation_number(&map, [0.0, 0.5], 10_000);
        assert!((est.value - nu).abs() < 1e-9, "value {}", est.value);
        assert!(est.confidence < 1e-9);
        assert!(!est.partial);
    }

    #[test]
    fn rotation_number_example_half() {
        let map = example_map();
        let est = rotation_number(&map, [0.0, 0.5], 4096);
        // |W(0.5)|/2pi = 1/2; the signed mean is -1/2
        assert!((est.value - 0.5).abs() < 1e-10);
        assert!((est.signed + 0.5).abs() < 1e-10);
    }

    #[test]
    fn resonance_examples() {
        let curl = example_curl();
        let map = analytic_return_map(&curl, (0.01, 0.99), 1).unwrap();
        let w = |rho: f64| map.w(rho);
        // W(c) = -pi at c = 1/2
        let roots = find_resonance(&w, (0.01, 0.99), -1, 2).unwrap();
        assert_eq!(roots.len(), 1);
        assert!((roots[0] - 0.5).abs() < 1e-10);
        // W(c) = -4 pi / 5 at c = 1/3
        let roots = find_resonance(&w, (0.01, 0.99), -2, 5).unwrap();
        assert_eq!(roots.len(), 1);
        assert!((roots[0] - 1.0 / 3.0).abs() < 1e-10);
        // |p|/q = 3/4 out of range (|W|/2pi < 2/3)
        let roots = find_resonance(&w, (0.01, 0.99), -3, 4).unwrap();
        assert!(roots.is_empty());
        // non-coprime pair rejected
        assert!(find_resonance(&w, (0.01, 0.99), -2, 4).is_err());
    }

    #[test]
    fn perturbation_identity_at_zero_eps() {
        let base: Arc<dyn AnnulusMap<f64>> = Arc::new(example_map());
        let pert = GeneratingPerturbation::new(0.0, 5, 0.5, 0.1);
        let map = perturb(base.clone(), pert).unwrap();
        for i in 0..50 {
            let x = [0.13 * i as f64, 0.1 + 0.016 * i as f64];
            let a = map.apply(x).unwrap();
            let b = base.apply(x).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn perturbation_supported_near_resonance() {
        let base: Arc<dyn AnnulusMap<f64>> = Arc::new(example_map());
        let eps = 1e-3;
        let map = perturb(base.clone(), GeneratingPerturbation::new(eps, 2, 0.5, 0.1)).unwrap();
        // outside the bump: identical to the base map
        for &rho in &[0.2, 0.35, 0.65, 0.9] {
            let x = [1.234, rho];
            assert_eq!(map.apply(x).unwrap(), base.apply(x).unwrap());
        }
        // inside: within C * eps of the base map, but not equal
        let mut worst: f64 = 0.0;
        for i in 0..100 {
            let x = [std::f64::consts::TAU * i as f64 / 100.0, 0.48];
            let a = map.apply(x).unwrap();
            let b = base.apply(x).unwrap();
            worst = worst.max((a[0] - b[0]).abs().max((a[1] - b[1]).abs()));
        }
        assert!(worst > 1e-6, "perturbation should act inside the bump");
        assert!(worst < 50.0 * eps, "worst {worst}");
    }

    #[test]
    fn perturbation_amplitude_gate() {
        let base: Arc<dyn AnnulusMap<f64>> = Arc::new(example_map());
        let res = perturb(base, GeneratingPerturbation::new(0.5, 8, 0.5, 0.05));
        assert!(matches!(res, Err(Error::AmplitudeTooLarge(_))));
    }

    #[test]
    fn perturbed_map_preserves_area_and_intersection() {
        let base: Arc<dyn AnnulusMap<f64>> = Arc::new(example_map());
        let map = perturb(base, GeneratingPerturbation::new(1e-3, 5, 1.0 / 3.0, 0.1)).unwrap();
        let resid = area_residual(&*map, 200, 11).unwrap();
        assert!(resid < 1e-8, "area residual {resid:e}");
        assert!(intersection_property(&*map, 21, 256).unwrap());
    }

    #[test]
    fn rotation_number_q_scaling() {
        let map = example_map();
        struct Pow<'a>(&'a TwistMap<f64>, usize);
        impl<'a> AnnulusMap<f64> for Pow<'a> {
            fn bounds(&self) -> (f64, f64) {
                self.0.bounds()
            }
            fn apply(&self, x: [f64; 2]) -> Result<[f64; 2], MapFail> {
                apply_n(self.0, x, self.1).map_err(|(_, e)| e)
            }
            fn density(&self) -> &AreaDensity<f64> {
                self.0.density()
            }
            fn is_exact(&self) -> bool {
                true
            }
        }
        for &rho in &[0.21, 0.47, 0.83] {
            let base = rotation_number(&map, [0.0, rho], 4096);
            for q in [2usize, 3, 5] {
                let pq = Pow(&map, q);
                let est = rotation_number(&pq, [0.0, rho], 4096);
                let want = (q as f64 * base.value).rem_euclid(1.0);
                let diff = (est.value - want).rem_euclid(1.0);
                let dist = diff.min(1.0 - diff);
                assert!(dist < 1e-8, "q={q} rho={rho}: {} vs {want}", est.value);
            }
        }
    }

    #[test]
    fn find_periodic_unperturbed_whole_circle() {
        let map = example_map();
        // resonant circle of W = -pi at rho = 1/2, q = 2
        let res = find_periodic(&map, 2, 0.5, 24, &NewtonOpts::default());
        assert_eq!(res.seeds_converged, 24);
        assert!(res.whole_circle);
        for o in &res.orbits {
            assert!(o.residual < 1e-10);
            assert_eq!(o.p, -1);
        }
    }

    #[test]
    fn find_periodic_perturbed_isolated() {
        let base: Arc<dyn AnnulusMap<f64>> = Arc::new(example_map());
        let map = perturb(base, GeneratingPerturbation::new(1e-3, 2, 0.5, 0.1)).unwrap();
        let res = find_periodic(&*map, 2, 0.5, 48, &NewtonOpts::default());
        assert!(!res.whole_circle);
        assert!(
            res.orbits.len() >= 2 && res.orbits.len() % 2 == 0,
            "expected a multiple of 2 orbits (2q fixed points), got {}",
            res.orbits.len()
        );
        for o in &res.orbits {
            assert!(o.residual < 1e-10, "residual {:e}", o.residual);
            assert_eq!(o.q, 2);
            assert_eq!(o.p, -1);
        }
        // q mismatched to the local rotation number: nothing found nearby
        let res = find_periodic(&*map, 3, 0.5, 16, &NewtonOpts::default());
        assert!(res.orbits.is_empty());
    }

    #[test]
    fn classify_known_linear_maps() {
        struct Linear(Mat2<f64>, AreaDensity<f64>);
        impl AnnulusMap<f64> for Linear {
            fn bounds(&self) -> (f64, f64) {
                (-1.0, 1.0)
            }
            fn apply(&self, x: [f64; 2]) -> Result<[f64; 2], MapFail> {
                Ok(linalg::mat_vec(&self.0, &x))
            }
            fn density(&self) -> &AreaDensity<f64> {
                &self.1
            }
            fn is_exact(&self) -> bool {
                true
            }
        }
        let orbit = PeriodicOrbit {
            q: 1,
            p: 0,
            points: vec![[0.0, 0.0]],
            residual: 0.0,
            mean_rho: 0.0,
        };
        let opts = ClassifyOpts {
            fit_twist: false,
            ..ClassifyOpts::default()
        };

        // cat-map linearization: hyperbolic with lambda = (3 + sqrt 5)/2
        let cat = Linear([[2.0, 1.0], [1.0, 1.0]], AreaDensity::unit(-1.0, 1.0));
        let c = classify(&cat, &orbit, &opts).unwrap();
        assert_eq!(c.verdict, StabilityVerdict::Hyperbolic);
        assert!((c.lambda.0 - (3.0 + 5.0f64.sqrt()) / 2.0).abs() < 1e-6);

        // rigid rotation by 2 pi * 0.3: elliptic, no k <= 4 resonance
        let w = std::f64::consts::TAU * 0.3;
        let rot = Linear(
            [[w.cos(), -w.sin()], [w.sin(), w.cos()]],
            AreaDensity::unit(-1.0, 1.0),
        );
        let c = classify(&rot, &orbit, &opts).unwrap();
        assert_eq!(c.verdict, StabilityVerdict::EllipticUnresolved);
        assert_eq!(c.resonance_flags, [false; 4]);
        assert!((c.omega.abs() - w).abs() < 1e-7);

        // rotation by 2 pi / 3: k = 3 resonance flagged
        let w = std::f64::consts::TAU / 3.0;
        let rot3 = Linear(
            [[w.cos(), -w.sin()], [w.sin(), w.cos()]],
            AreaDensity::unit(-1.0, 1.0),
        );
        let c = classify(&rot3, &orbit, &opts).unwrap();
        assert_eq!(c.verdict, StabilityVerdict::EllipticResonant);
        assert!(c.resonance_flags[2]);
        assert!(!c.resonance_flags[0] && !c.resonance_flags[1]);
    }

    #[test]
    fn twist_fit_integrable_model() {
        // polar model (phi, r) -> (phi + 1 + 0.5 r^2, r)
        let map = TwistMap::from_fn(
            Arc::new(|r: f64| 1.0 + 0.5 * r * r),
            Arc::new(|r: f64| r),
            (0.0, 1.0),
            AreaDensity::new(Arc::new(|r: f64| r.max(1e-30)), 0.0, 1.0, 256),
        );
        let fit = twist_fit_polar(
            &map,
            &TwistFitOpts {
                r_max: 0.3,
                n_radii: 6,
                decay: 0.7,
                n_iter: 2000,
            },
        )
        .unwrap();
        assert!((fit.omega - 1.0).abs() < 1e-3, "omega {}", fit.omega);
        assert!((fit.alpha - 0.5).abs() < 1e-3, "alpha {}", fit.alpha);
        assert!(fit.alpha.abs() > 3.0 * fit.alpha_sigma);
    }

    #[test]
    fn classify_is_base_point_invariant() {
        let base: Arc<dyn AnnulusMap<f64>> = Arc::new(example_map());
        let map = perturb(base, GeneratingPerturbation::new(1e-3, 2, 0.5, 0.1)).unwrap();
        let res = find_periodic(&*map, 2, 0.5, 32, &NewtonOpts::default());
        let opts = ClassifyOpts {
            fit_twist: false,
            ..ClassifyOpts::default()
        };
        for orbit in &res.orbits {
            let c0 = classify(&*map, orbit, &opts).unwrap();
            // relabel the orbit starting from its second point
            let mut rotated = orbit.clone();
            rotated.points.rotate_left(1);
            let c1 = classify(&*map, &rotated, &opts).unwrap();
            assert_eq!(c0.verdict, c1.verdict);
            assert!((c0.trace - c1.trace).abs() < 1e-6);
            assert_eq!(c0.resonance_flags, c1.resonance_flags);
        }
    }
}
