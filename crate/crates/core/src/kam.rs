//! Orbit classification, isotopy classes of invariant tori, per-class
//! measure estimation, and KAM-stability probing of elliptic points.
//!
//! An "ergodic invariant torus" is operationalized as an orbit that (i) has a
//! tightly converged weighted-Birkhoff rotation number, (ii) lies on a smooth
//! closed curve reconstructed by Fourier fitting against the linearized
//! angle, and (iii) is not suspiciously close to a low-order resonance. The
//! inner measure over true C1 tori is not computable at desk scale; this
//! surrogate is calibrated so that the integrable reference flow classifies
//! at full measure.

use crate::error::Result;
use crate::geometry::Space;
use crate::numerics::rng::uniform01;
use crate::scalar::{wrap_angle, Real};
use crate::twistmaps::{
    gcd, iterate, rotation_number_of_orbit, AnnulusMap, LocalPolarMap, Orbit, PeriodicOrbit,
    RotationEstimate,
};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;
use std::sync::Arc;

// ---------------------------------------------------------------------------
// orbit classification

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrbitVerdict {
    InvariantCurve,
    IslandChain { p: i64, q: u32 },
    Chaotic,
    Escaped,
    Undecided,
}

#[derive(Clone, Debug)]
pub struct OrbitClass<T> {
    pub verdict: OrbitVerdict,
    pub rotation: RotationEstimate<T>,
    pub curve_residual: Option<T>,
    /// Distance to the nearest rational `p/q` with `q <= q_max`.
    pub resonance_gap: Option<(i64, u32, T)>,
}

#[derive(Clone, Copy, Debug)]
pub struct ClassifyOrbitOpts<T> {
    pub n_iter: usize,
    /// Rotation-number confidence required for the invariant-curve verdict.
    pub tol_rot: T,
    /// Max curve-fit residual for the invariant-curve verdict.
    pub tol_fit: T,
    pub fit_degree: usize,
    /// Winding within this distance of a low-order rational counts as locked.
    pub lock_tol: T,
    pub q_max: u32,
    /// Confidence above this (with a failed fit) is chaotic.
    pub chaos_floor: T,
    /// Exclusion half-width around low-order rationals for the ergodicity
    /// gate, scaled by `1/q^2`.
    pub resonance_width: T,
}

impl<T: Real> Default for ClassifyOrbitOpts<T> {
    fn default() -> Self {
        Self {
            n_iter: 10_000,
            tol_rot: T::of(1e-7),
            tol_fit: T::of(1e-5),
            fit_degree: 32,
            lock_tol: T::of(1e-7),
            q_max: 12,
            chaos_floor: T::of(1e-3),
            resonance_width: T::of(1e-8),
        }
    }
}

/// Nearest rational `p/q` with `q <= q_max` to a signed winding mean.
pub fn nearest_rational<T: Real>(value: T, q_max: u32) -> (i64, u32, T) {
    let mut best = (0i64, 1u32, T::infinity());
    for q in 1..=q_max {
        let p = (value * T::of(q as f64)).round();
        let err = (value - p / T::of(q as f64)).abs();
        let pi = p.as_f64() as i64;
        let g = gcd(pi.unsigned_abs(), q as u64) as u32;
        let (pr, qr) = (pi / g as i64, q / g);
        if err < best.2 {
            best = (pr, qr, err);
        }
    }
    best
}

/// Fourier reconstruction of the orbit against its linearized angle
/// `phi_i = 2 pi nu i`: returns the max deviation of the transverse
/// coordinate from the fitted trigonometric polynomial.
fn curve_fit_residual<T: Real>(orbit: &Orbit<T>, nu: T, degree: usize) -> T {
    // a few thousand samples are ample for the Fourier quadrature at the
    // shipped residual tolerances
    let m = orbit.points.len().min(4097);
    let pts = &orbit.points[..m];
    let n = pts.len();
    if n < 4 * degree {
        return T::infinity();
    }
    let tau = T::two_pi();
    // Harmonics whose sampled frequency k*nu sits too close to an integer
    // alias onto the mean and cannot be estimated from this orbit; the
    // threshold tracks the bump-weighted quadrature resolution ~ 1/n.
    let alias_floor = T::of(0.01).max(T::of(30.0) / T::of(n as f64));
    let aliased: Vec<bool> = (0..=degree)
        .map(|k| {
            if k == 0 {
                return false;
            }
            let f = nu * T::of(k as f64);
            (f - f.round()).abs() < alias_floor
        })
        .collect();
    // Birkhoff-weighted Fourier coefficients of rho(phi), phi_i = tau nu i,
    // with the harmonics generated by complex recurrences (no per-harmonic
    // trig calls)
    let (step_c, step_s) = {
        let phi1 = tau * nu;
        (phi1.cos(), phi1.sin())
    };
    let mut wsum = T::zero();
    let mut a = vec![T::zero(); degree + 1];
    let mut b = vec![T::zero(); degree + 1];
    let mut pc = T::one(); // cos(phi_i)
    let mut ps = T::zero(); // sin(phi_i)
    for (i, p) in pts.iter().enumerate() {
        let t = T::of((i + 1) as f64) / T::of((n + 1) as f64);
        let w = if t <= T::zero() || t >= T::one() {
            T::zero()
        } else {
            (-T::one() / (t * (T::one() - t))).exp()
        };
        if w > T::zero() {
            wsum += w;
            let rho = p[1];
            let wr = w * rho;
            a[0] += wr;
            let mut kc = pc;
            let mut ks = ps;
            for k in 1..=degree {
                if !aliased[k] {
                    a[k] += wr * kc;
                    b[k] += wr * ks;
                }
                let nc = kc * pc - ks * ps;
                ks = ks * pc + kc * ps;
                kc = nc;
            }
        }
        let nc = pc * step_c - ps * step_s;
        ps = ps * step_c + pc * step_s;
        pc = nc;
    }
    if wsum == T::zero() {
        return T::infinity();
    }
    a[0] /= wsum;
    for k in 1..=degree {
        a[k] = a[k] * T::of(2.0) / wsum;
        b[k] = b[k] * T::of(2.0) / wsum;
    }
    // residual over a subsample
    let stride = (n / 512).max(1);
    let mut worst = T::zero();
    for i in (0..n).step_by(stride) {
        let phi = tau * nu * T::of(i as f64);
        let (c1, s1) = (phi.cos(), phi.sin());
        let mut fit = a[0];
        let mut kc = c1;
        let mut ks = s1;
        for k in 1..=degree {
            if !aliased[k] {
                fit += a[k] * kc + b[k] * ks;
            }
            let nc = kc * c1 - ks * s1;
            ks = ks * c1 + kc * s1;
            kc = nc;
        }
        worst = worst.max((pts[i][1] - fit).abs());
    }
    worst
}

/// Largest circular gap of the `q`-decimated angle samples; a gap of order
/// one means the decimated orbit librates inside an arc (island signature)
/// rather than filling the circle.
fn decimated_arc_gap<T: Real>(orbit: &Orbit<T>, q: u32) -> T {
    let mut angles: Vec<T> = orbit
        .points
        .iter()
        .step_by(q.max(1) as usize)
        .map(|p| wrap_angle(p[0]))
        .collect();
    if angles.len() < 2 {
        return T::two_pi();
    }
    angles.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let mut gap = angles[0] + T::two_pi() - angles[angles.len() - 1];
    for w in angles.windows(2) {
        gap = gap.max(w[1] - w[0]);
    }
    gap
}

/// Decision tree: escaped / island chain (winding locked to a low-order
/// rational with the decimated orbit confined to an arc) / invariant curve
/// (converged rotation number and a good single-curve fit) / chaotic /
/// undecided.
pub fn classify_orbit<T: Real>(
    map: &dyn AnnulusMap<T>,
    x0: [T; 2],
    opts: &ClassifyOrbitOpts<T>,
) -> OrbitClass<T> {
    let orbit = iterate(map, x0, opts.n_iter);
    classify_orbit_data(&orbit, opts)
}

/// Classification of an already-computed orbit.
pub fn classify_orbit_data<T: Real>(orbit: &Orbit<T>, opts: &ClassifyOrbitOpts<T>) -> OrbitClass<T> {
    let rotation = rotation_number_of_orbit(orbit, opts.n_iter);
    if orbit.escaped() {
        return OrbitClass {
            verdict: OrbitVerdict::Escaped,
            rotation,
            curve_residual: None,
            resonance_gap: None,
        };
    }
    let (p, q, gap) = nearest_rational(rotation.signed, opts.q_max);
    let resonance_gap = Some((p, q, gap));

    if gap < opts.lock_tol {
        let arc = decimated_arc_gap(orbit, q);
        if arc > T::of(0.2) * T::two_pi() {
            return OrbitClass {
                verdict: OrbitVerdict::IslandChain { p, q },
                rotation,
                curve_residual: None,
                resonance_gap,
            };
        }
    }

    let residual = curve_fit_residual(orbit, rotation.value, opts.fit_degree);
    if rotation.confidence < opts.tol_rot && residual < opts.tol_fit {
        return OrbitClass {
            verdict: OrbitVerdict::InvariantCurve,
            rotation,
            curve_residual: Some(residual),
            resonance_gap,
        };
    }
    if rotation.confidence > opts.chaos_floor && residual > T::of(10.0) * opts.tol_fit {
        return OrbitClass {
            verdict: OrbitVerdict::Chaotic,
            rotation,
            curve_residual: Some(residual),
            resonance_gap,
        };
    }
    OrbitClass {
        verdict: OrbitVerdict::Undecided,
        rotation,
        curve_residual: Some(residual),
        resonance_gap,
    }
}

/// Ergodicity gate applied on top of the invariant-curve verdict before an
/// orbit contributes to a kappa class: the winding must stay clear of every
/// low-order rational by a margin scaled with the measurement confidence.
pub fn passes_ergodic_gate<T: Real>(class: &OrbitClass<T>, opts: &ClassifyOrbitOpts<T>) -> bool {
    if class.verdict != OrbitVerdict::InvariantCurve {
        return false;
    }
    if let Some((_, q, gap)) = class.resonance_gap {
        let width = opts
            .resonance_width
            .max(T::of(10.0) * class.rotation.confidence)
            / T::of((q * q) as f64);
        if gap < width {
            return false;
        }
    }
    true
}

// ---------------------------------------------------------------------------
// isotopy classes

/// Isotopy classes of embedded invariant tori distinguishable at desk scale.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum IsotopyClass {
    /// Boundary of a tubular neighbourhood of an unknotted circle.
    Unknot,
    /// `(p, q)` torus knot, normalized to `2 <= p < q`, `gcd(p, q) = 1`.
    TorusKnot { p: u32, q: u32 },
    /// Horizontal torus class on the 3-torus.
    T3Horizontal,
    Other,
}

impl IsotopyClass {
    /// Normalized class of a `(p, q)` winding pair (signed `p` accepted).
    pub fn torus_knot(p: i64, q: u32) -> IsotopyClass {
        let pa = p.unsigned_abs();
        let qa = q as u64;
        if pa == 0 || qa == 0 {
            return IsotopyClass::Unknot;
        }
        if gcd(pa, qa) != 1 {
            return IsotopyClass::Other;
        }
        if pa.min(qa) <= 1 {
            return IsotopyClass::Unknot;
        }
        let (lo, hi) = if pa < qa { (pa, qa) } else { (qa, pa) };
        IsotopyClass::TorusKnot {
            p: lo as u32,
            q: hi as u32,
        }
    }

    pub fn label(&self) -> String {
        match self {
            IsotopyClass::Unknot => "unknot".into(),
            IsotopyClass::TorusKnot { p, q } => format!("torus-knot({p},{q})"),
            IsotopyClass::T3Horizontal => "t3-horizontal".into(),
            IsotopyClass::Other => "other".into(),
        }
    }
}

/// Knot class of a section orbit from its total unreduced angular advance
/// over `q` returns.
pub fn knot_class<T: Real>(delta_theta1_total: T, q: u32) -> IsotopyClass {
    let p = (delta_theta1_total / T::two_pi()).round().as_f64() as i64;
    IsotopyClass::torus_knot(p, q)
}

// ---------------------------------------------------------------------------
// kappa estimation

#[derive(Clone, Copy, Debug, Serialize)]
pub struct GridSpec {
    pub n_theta: usize,
    pub n_rho: usize,
    pub orbit_iters: usize,
    pub jitter: bool,
}

/// What the estimator runs on: a section map plus the measure lift.
pub struct KappaInput<'a, T> {
    pub map: &'a dyn AnnulusMap<T>,
    pub space: Space,
    /// 3D measure carried per unit section area `dtheta1 drho` at `rho`
    /// (invariant flux density times first-return time).
    pub weight: Arc<dyn Fn(T) -> T + Send + Sync>,
    /// Class of the invariant curves of the base annulus.
    pub base_class: IsotopyClass,
    /// Class of island cores from their `(p, q)` winding.
    pub island_class: Arc<dyn Fn(i64, u32) -> IsotopyClass + Send + Sync>,
}

impl<'a, T: Real> KappaInput<'a, T> {
    /// Sphere section input: the lift weight is `pi` per unit section area
    /// (flux density `g/2` times nominal transit `2 pi / g`; the transit of
    /// perturbed fields differs from the nominal one at relative order
    /// `eps`, well below the estimator's standard error).
    pub fn s3_map(map: &'a dyn AnnulusMap<T>) -> Self {
        Self {
            map,
            space: Space::S3,
            weight: Arc::new(|_| T::PI()),
            base_class: IsotopyClass::Unknot,
            island_class: Arc::new(|p, q| IsotopyClass::torus_knot(p, q)),
        }
    }

    /// Torus section input: lift weight `2 pi` per unit section area; the
    /// base tori are horizontal, island cores wind in two angle directions
    /// and fall outside the tracked classes.
    pub fn t3_map(map: &'a dyn AnnulusMap<T>) -> Self {
        Self {
            map,
            space: Space::T3,
            weight: Arc::new(|_| T::two_pi()),
            base_class: IsotopyClass::T3Horizontal,
            island_class: Arc::new(|_, _| IsotopyClass::Other),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ClassMeasure<T> {
    pub class: IsotopyClass,
    pub fraction: T,
    pub absolute: T,
    pub stderr: T,
    pub orbit_count: usize,
}

#[derive(Clone, Debug)]
pub struct KappaEstimate<T> {
    pub space: Space,
    pub total_volume: T,
    pub classes: Vec<ClassMeasure<T>>,
    /// Fraction of the total volume not positively classified (chaotic,
    /// undecided, escaped, resonance-gated, and unsampled regions).
    pub unclassified: T,
    pub grid: GridSpec,
    pub seed: u64,
}

impl<T: Real> KappaEstimate<T> {
    pub fn fraction_of(&self, class: IsotopyClass) -> T {
        self.classes
            .iter()
            .find(|c| c.class == class)
            .map(|c| c.fraction)
            .unwrap_or(T::zero())
    }

    pub fn stderr_of(&self, class: IsotopyClass) -> T {
        self.classes
            .iter()
            .find(|c| c.class == class)
            .map(|c| c.stderr)
            .unwrap_or(T::zero())
    }

    /// Total measure of nontrivially knotted classes.
    pub fn lambda(&self) -> T {
        self.classes
            .iter()
            .filter(|c| matches!(c.class, IsotopyClass::TorusKnot { .. }))
            .map(|c| c.absolute)
            .sum()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let classes: Vec<serde_json::Value> = self
            .classes
            .iter()
            .map(|c| {
                serde_json::json!({
                    "tag": c.class.label(),
                    "fraction": c.fraction.as_f64(),
                    "absolute": c.absolute.as_f64(),
                    "stderr": c.stderr.as_f64(),
                    "orbit_count": c.orbit_count,
                })
            })
            .collect();
        serde_json::json!({
            "space": match self.space { Space::S3 => "s3", Space::T3 => "t3" },
            "total_volume": self.total_volume.as_f64(),
            "classes": classes,
            "unclassified": self.unclassified.as_f64(),
            "grid": {
                "n_theta": self.grid.n_theta,
                "n_rho": self.grid.n_rho,
                "orbit_iters": self.grid.orbit_iters,
                "jitter": self.grid.jitter,
            },
            "seed": self.seed,
        })
    }
}

/// Classify a jittered grid of section orbits and accumulate the lifted
/// measure per isotopy class. The grid is stratified by transverse rows;
/// standard errors come from the per-row binomial variance of the stratified
/// estimator. Cells are evaluated in parallel and reduced in index order, so
/// the result is independent of thread scheduling.
pub fn kappa_estimate<T: Real>(
    input: &KappaInput<'_, T>,
    grid: GridSpec,
    seed: u64,
    opts: &ClassifyOrbitOpts<T>,
) -> KappaEstimate<T> {
    let (a, b) = input.map.bounds();
    let n_th = grid.n_theta.max(1);
    let n_rho = grid.n_rho.max(1);
    let d_th = T::two_pi() / T::of(n_th as f64);
    let d_rho = (b - a) / T::of(n_rho as f64);
    let opts = ClassifyOrbitOpts {
        n_iter: grid.orbit_iters,
        ..*opts
    };

    let cells: Vec<(usize, usize)> = (0..n_rho)
        .flat_map(|j| (0..n_th).map(move |i| (i, j)))
        .collect();
    let results: Vec<(usize, IsotopyClass, bool, T)> = cells
        .par_iter()
        .map(|&(i, j)| {
            let idx = (j * n_th + i) as u64;
            let (jt, jr) = if grid.jitter {
                (
                    T::of(uniform01(seed, 2 * idx)),
                    T::of(uniform01(seed, 2 * idx + 1)),
                )
            } else {
                (T::of(0.5), T::of(0.5))
            };
            let theta = d_th * (T::of(i as f64) + jt);
            let rho = a + d_rho * (T::of(j as f64) + jr);
            let class = classify_orbit(input.map, [theta, rho], &opts);
            let cls = match class.verdict {
                OrbitVerdict::InvariantCurve if passes_ergodic_gate(&class, &opts) => {
                    Some(input.base_class)
                }
                OrbitVerdict::IslandChain { p, q } => Some((input.island_class)(p, q)),
                _ => None,
            };
            let w = (input.weight)(rho) * d_th * d_rho;
            match cls {
                Some(c) => (j, c, true, w),
                None => (j, IsotopyClass::Other, false, w),
            }
        })
        .collect();

    let total_volume = crate::geometry::total_volume::<T>(input.space);
    // stratified accumulation by rho rows
    let mut class_weight: BTreeMap<IsotopyClass, T> = BTreeMap::new();
    let mut class_count: BTreeMap<IsotopyClass, usize> = BTreeMap::new();
    let mut class_var: BTreeMap<IsotopyClass, T> = BTreeMap::new();
    let mut row_stats: Vec<BTreeMap<IsotopyClass, (T, usize)>> = vec![BTreeMap::new(); n_rho];
    let mut row_weight = vec![T::zero(); n_rho];
    let mut row_cells = vec![0usize; n_rho];
    for &(j, cls, classified, w) in &results {
        row_weight[j] += w;
        row_cells[j] += 1;
        if classified {
            let e = row_stats[j].entry(cls).or_insert((T::zero(), 0));
            e.0 += w;
            e.1 += 1;
        }
    }
    for j in 0..n_rho {
        let wj = row_weight[j];
        let nj = row_cells[j].max(1);
        for (&cls, &(wcls, cnt)) in &row_stats[j] {
            *class_weight.entry(cls).or_insert(T::zero()) += wcls;
            *class_count.entry(cls).or_insert(0) += cnt;
            // binomial variance of the stratified row estimate
            let p = wcls / wj.max(T::epsilon());
            let var = wj * wj * p * (T::one() - p) / T::of(nj as f64);
            *class_var.entry(cls).or_insert(T::zero()) += var;
        }
    }
    let mut classes = Vec::new();
    let mut classified_total = T::zero();
    for (cls, w) in &class_weight {
        let fraction = *w / total_volume;
        classified_total += fraction;
        classes.push(ClassMeasure {
            class: *cls,
            fraction,
            absolute: *w,
            stderr: class_var[cls].sqrt() / total_volume,
            orbit_count: class_count[cls],
        });
    }
    KappaEstimate {
        space: input.space,
        total_volume,
        classes,
        unclassified: (T::one() - classified_total).max(T::zero()),
        grid,
        seed,
    }
}

/// Two estimates agree when every tracked class matches within `k` combined
/// standard errors (with a tiny absolute floor for exactly-equal runs).
pub fn kappa_agree<T: Real>(a: &KappaEstimate<T>, b: &KappaEstimate<T>, k: T) -> (bool, T) {
    let mut all: Vec<IsotopyClass> = a
        .classes
        .iter()
        .chain(b.classes.iter())
        .map(|c| c.class)
        .collect();
    all.sort();
    all.dedup();
    let floor = T::of(1e-12);
    let mut worst = T::zero();
    let mut agree = true;
    for cls in all {
        let fa = a.fraction_of(cls);
        let fb = b.fraction_of(cls);
        let se = (a.stderr_of(cls).powi(2) + b.stderr_of(cls).powi(2)).sqrt();
        let dist = (fa - fb).abs();
        let sigma_dist = dist / se.max(floor);
        worst = worst.max(sigma_dist);
        if dist > k * se + floor {
            agree = false;
        }
    }
    (agree, worst)
}

// ---------------------------------------------------------------------------
// stability probe

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StabilityEvidence {
    KamStableEvidence,
    Inconclusive,
}

#[derive(Clone, Debug)]
pub struct StabilityReport<T> {
    pub point: [T; 2],
    /// Probed dyadic annuli `[eps_j, 2 eps_j]` in the linearizing frame.
    pub annuli: Vec<(T, T)>,
    /// Invariant-curve fraction per annulus.
    pub fractions: Vec<T>,
    pub verdict: StabilityEvidence,
}

#[derive(Clone, Copy, Debug)]
pub struct StabilityProbeOpts<T> {
    pub eps0: T,
    pub levels: usize,
    pub radii_per_annulus: usize,
    pub orbit_iters: usize,
    pub frac_floor: T,
    pub consecutive: usize,
}

impl<T: Real> Default for StabilityProbeOpts<T> {
    fn default() -> Self {
        Self {
            eps0: T::of(1e-2),
            levels: 5,
            radii_per_annulus: 8,
            orbit_iters: 2000,
            frac_floor: T::of(0.5),
            consecutive: 3,
        }
    }
}

/// Probe dyadic annuli around an elliptic periodic point in its linearizing
/// frame and report the invariant-curve fraction per annulus. Evidence of
/// KAM stability requires the fraction to stay above the floor across
/// several consecutive annuli.
pub fn stability_probe<T: Real>(
    map: &dyn AnnulusMap<T>,
    orbit: &PeriodicOrbit<T>,
    opts: &StabilityProbeOpts<T>,
) -> Result<StabilityReport<T>> {
    let polar = LocalPolarMap::new(map, orbit, (T::zero(), opts.eps0 * T::of(8.0)), T::of(1e-6))?;
    let classify_opts = ClassifyOrbitOpts {
        n_iter: opts.orbit_iters,
        // the polar angle converges more slowly than the ambient one;
        // tolerances stay as calibrated on the integrable model
        ..ClassifyOrbitOpts::default()
    };
    let mut annuli = Vec::new();
    let mut fractions = Vec::new();
    for j in 0..opts.levels {
        let eps_j = opts.eps0 * T::of(0.5).powi(j as i32);
        annuli.push((eps_j, T::of(2.0) * eps_j));
        let m = opts.radii_per_annulus.max(1);
        let results: Vec<bool> = (0..m)
            .into_par_iter()
            .map(|k| {
                let r = eps_j * (T::one() + T::of(k as f64) / T::of(m as f64));
                let phi0 = T::two_pi() * T::of(uniform01(11, (j * m + k) as u64));
                let class = classify_orbit(&polar, [phi0, r], &classify_opts);
                class.verdict == OrbitVerdict::InvariantCurve
            })
            .collect();
        let good = results.iter().filter(|&&b| b).count();
        fractions.push(T::of(good as f64) / T::of(m as f64));
    }
    let mut run = 0usize;
    let mut best_run = 0usize;
    for f in &fractions {
        if *f >= opts.frac_floor {
            run += 1;
            best_run = best_run.max(run);
        } else {
            run = 0;
        }
    }
    let verdict = if best_run >= opts.consecutive {
        StabilityEvidence::KamStableEvidence
    } else {
        StabilityEvidence::Inconclusive
    };
    Ok(StabilityReport {
        point: orbit.points[0],
        annuli,
        fractions,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::Profile1D;
    use crate::steady::ShearProfileS3;
    use crate::twistmaps::{
        analytic_return_map, find_periodic, perturb, AreaDensity, GeneratingPerturbation, MapFail,
        NewtonOpts, TwistMap,
    };

    fn example_curl() -> Arc<crate::steady::CurlProfileS3<f64>> {
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
    fn twist_circle_is_invariant_curve() {
        let map = example_map();
        let opts = ClassifyOrbitOpts {
            n_iter: 4000,
            ..ClassifyOrbitOpts::default()
        };
        let class = classify_orbit(&map, [0.3, 0.4137], &opts);
        assert_eq!(class.verdict, OrbitVerdict::InvariantCurve);
        let want = (4.0 * 0.4137 / (2.0 + 4.0 * 0.4137)) % 1.0;
        // |W|/2pi; the signed value is negative so value = 1 - want
        assert!((class.rotation.value - (1.0 - want)).abs() < 1e-9);
        assert!(passes_ergodic_gate(&class, &opts));
    }

    #[test]
    fn island_orbit_classifies_as_chain() {
        let base: Arc<dyn AnnulusMap<f64>> = Arc::new(example_map());
        let map = perturb(base, GeneratingPerturbation::new(1e-3, 2, 0.5, 0.1)).unwrap();
        let res = find_periodic(&*map, 2, 0.5, 32, &NewtonOpts::default());
        // pick the elliptic one: probe both orbits
        let opts = ClassifyOrbitOpts {
            n_iter: 6000,
            ..ClassifyOrbitOpts::default()
        };
        let mut island_seen = false;
        for orbit in &res.orbits {
            let x = orbit.points[0];
            let class = classify_orbit(&*map, [x[0] + 2e-3, x[1] + 1e-3], &opts);
            if class.verdict == (OrbitVerdict::IslandChain { p: -1, q: 2 }) {
                island_seen = true;
            }
        }
        assert!(island_seen, "no island orbit found near the periodic points");
    }

    #[test]
    fn chaotic_orbit_flagged() {
        // Chirikov-type map at large coupling: y' = y + K sin(theta),
        // theta' = theta + y'
        struct Chirikov(f64, AreaDensity<f64>);
        impl AnnulusMap<f64> for Chirikov {
            fn bounds(&self) -> (f64, f64) {
                (-50.0, 50.0)
            }
            fn apply(&self, x: [f64; 2]) -> Result<[f64; 2], MapFail> {
                let y = x[1] + self.0 * x[0].sin();
                Ok([x[0] + y, y])
            }
            fn density(&self) -> &AreaDensity<f64> {
                &self.1
            }
            fn is_exact(&self) -> bool {
                true
            }
        }
        let map = Chirikov(2.5, AreaDensity::unit(-50.0, 50.0));
        let opts = ClassifyOrbitOpts {
            n_iter: 4000,
            ..ClassifyOrbitOpts::default()
        };
        // seed in the chaotic sea near the hyperbolic fixed point
        let class = classify_orbit(&map, [0.1, 0.1], &opts);
        assert_eq!(class.verdict, OrbitVerdict::Chaotic);
        assert!(class.rotation.confidence > 1e-3);
    }

    #[test]
    fn knot_class_examples() {
        // (-4 pi, 5) -> (2, 5) torus knot
        assert_eq!(
            knot_class(-4.0 * std::f64::consts::PI, 5),
            IsotopyClass::TorusKnot { p: 2, q: 5 }
        );
        // (2 pi, 1) -> unknot
        assert_eq!(knot_class(std::f64::consts::TAU, 1), IsotopyClass::Unknot);
        // (-2 pi, 2): the (1, 2) torus knot is trivial
        assert_eq!(knot_class(-std::f64::consts::TAU, 2), IsotopyClass::Unknot);
        // non-coprime pair is a cable, out of scope
        assert_eq!(IsotopyClass::torus_knot(4, 6), IsotopyClass::Other);
        // symmetry after normalization
        assert_eq!(
            IsotopyClass::torus_knot(5, 2),
            IsotopyClass::torus_knot(-2, 5)
        );
    }

    #[test]
    fn kappa_integrable_full_measure() {
        let map = example_map();
        let input = KappaInput::s3_map(&map);
        let grid = GridSpec {
            n_theta: 24,
            n_rho: 48,
            orbit_iters: 3000,
            jitter: true,
        };
        let est = kappa_estimate(&input, grid, 7, &ClassifyOrbitOpts::default());
        let f = est.fraction_of(IsotopyClass::Unknot);
        // annulus coverage is (0.95 - 0.05) = 0.9 of the chart; weight pi per
        // unit area lifts to 2 pi^2 * 0.9 of the full volume
        assert!((f - 0.9).abs() < 0.02, "unknot fraction {f}");
        assert!(est.lambda() == 0.0);
        assert!(est.unclassified < 0.12);
    }

    #[test]
    fn kappa_json_shape() {
        let map = example_map();
        let input = KappaInput::s3_map(&map);
        let grid = GridSpec {
            n_theta: 8,
            n_rho: 8,
            orbit_iters: 1500,
            jitter: false,
        };
        let est = kappa_estimate(&input, grid, 0, &ClassifyOrbitOpts::default());
        let v = est.to_json();
        assert_eq!(v["space"], "s3");
        assert!(v["total_volume"].as_f64().unwrap() > 19.7);
        assert!(v["classes"].as_array().unwrap().len() >= 1);
        assert_eq!(v["classes"][0]["tag"], "unknot");
    }

    #[test]
    fn kappa_deterministic_and_seed_sensitive() {
        let map = example_map();
        let input = KappaInput::s3_map(&map);
        let grid = GridSpec {
            n_theta: 6,
            n_rho: 6,
            orbit_iters: 1200,
            jitter: true,
        };
        let a = kappa_estimate(&input, grid, 3, &ClassifyOrbitOpts::default());
        let b = kappa_estimate(&input, grid, 3, &ClassifyOrbitOpts::default());
        assert_eq!(
            a.fraction_of(IsotopyClass::Unknot),
            b.fraction_of(IsotopyClass::Unknot)
        );
    }

    #[test]
    fn stability_probe_integrable_model() {
        // polar twist model: every probe circle is invariant
        let map = TwistMap::from_fn(
            Arc::new(|r: f64| 0.7 + 0.5 * r * r),
            Arc::new(|r: f64| r),
            (0.0, 1.0),
            AreaDensity::new(Arc::new(|r: f64| r.max(1e-30)), 0.0, 1.0, 128),
        );
        // probe the model directly: it is already a polar map around r = 0
        let opts = ClassifyOrbitOpts {
            n_iter: 2000,
            ..ClassifyOrbitOpts::default()
        };
        for j in 0..4 {
            let eps = 0.05 * 0.5f64.powi(j);
            let mut good = 0;
            for k in 0..8 {
                let r = eps * (1.0 + k as f64 / 8.0);
                let class = classify_orbit(&map, [0.0, r], &opts);
                if class.verdict == OrbitVerdict::InvariantCurve {
                    good += 1;
                }
            }
            assert_eq!(good, 8, "annulus {j}");
        }
    }

    #[test]
    fn stability_probe_perturbed_elliptic() {
        let base: Arc<dyn AnnulusMap<f64>> = Arc::new(example_map());
        let map = perturb(base, GeneratingPerturbation::new(1e-3, 2, 0.5, 0.1)).unwrap();
        let res = find_periodic(&*map, 2, 0.5, 32, &NewtonOpts::default());
        // find the elliptic orbit
        let copts = crate::twistmaps::ClassifyOpts {
            fit_twist: false,
            ..Default::default()
        };
        let elliptic = res
            .orbits
            .iter()
            .find(|o| {
                matches!(
                    crate::twistmaps::classify(&*map, o, &copts).map(|c| c.verdict),
                    Ok(crate::twistmaps::StabilityVerdict::EllipticUnresolved)
                        | Ok(crate::twistmaps::StabilityVerdict::EllipticNondegenerate)
                )
            })
            .expect("one orbit should be elliptic");
        let probe = stability_probe(
            &*map,
            elliptic,
            &StabilityProbeOpts {
                eps0: 5e-3,
                levels: 4,
                radii_per_annulus: 6,
                orbit_iters: 2500,
                ..StabilityProbeOpts::default()
            },
        )
        .unwrap();
        assert_eq!(probe.verdict, StabilityEvidence::KamStableEvidence);
        for (j, f) in probe.fractions.iter().enumerate() {
            assert!(*f >= 0.5, "annulus {j} fraction {f}");
        }
    }

    #[test]
    fn kappa_agreement_of_identical_runs() {
        let map = example_map();
        let input = KappaInput::s3_map(&map);
        let grid = GridSpec {
            n_theta: 8,
            n_rho: 8,
            orbit_iters: 1200,
            jitter: true,
        };
        let a = kappa_estimate(&input, grid, 1, &ClassifyOrbitOpts::default());
        let b = kappa_estimate(&input, grid, 2, &ClassifyOrbitOpts::default());
        let (agree, worst) = kappa_agree(&a, &b, 2.0);
        assert!(agree, "worst sigma distance {worst}");
    }
}
