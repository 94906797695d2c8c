//! The acceptance suite: every shipped guarantee as an executable check with
//! pinned tolerances. The integration test target runs each criterion and the
//! command-line `verify` subcommand prints one pass/fail line per criterion.

use crate::dynamics::{return_map, IntegratorOpts, SectionSpec};
use crate::geometry::{total_volume, ChartField, Space, VolumePreservingDiffeo};
use crate::kam::{
    kappa_agree, kappa_estimate, ClassifyOrbitOpts, GridSpec, IsotopyClass, KappaInput,
    StabilityEvidence, StabilityProbeOpts,
};
use crate::numerics::rng::uniform01;
use crate::numerics::spline::SplineBc;
use crate::profile::Profile1D;
use crate::steady::{
    bernoulli_identity_residual_s3, bernoulli_identity_residual_t3, check_nondegenerate_s3,
    curl_via_forms, CurlProfileS3, NondegeneracyOpts, PushforwardField, ShearCurlT3,
    ShearProfileS3, ShearProfileT3, Verdict,
};
use crate::suspension::{build_pair, suspend, verify_suspension};
use crate::twistmaps::{
    analytic_return_map, area_residual, classify, find_periodic,
    find_resonance, intersection_property, iterate, perturb, rotation_number, AnnulusMap,
    ClassifyOpts, GeneratingPerturbation, NewtonOpts, NumericReturnMap, StabilityVerdict,
    TwistFitOpts,
};
use rayon::prelude::*;
use std::sync::Arc;
use std::time::Instant;

#[derive(Clone, Debug)]
pub struct CriterionResult {
    pub id: usize,
    pub name: &'static str,
    pub pass: bool,
    pub details: String,
    pub seconds: f64,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "criterion {:2} [{}] {:<22} ({:.1}s) {}",
            self.id,
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.seconds,
            self.details
        )
    }
}

fn example_profile() -> Arc<ShearProfileS3<f64>> {
    Arc::new(ShearProfileS3::new(
        Profile1D::parse("1 + rho", "rho").unwrap(),
        Profile1D::constant(0.0),
    ))
}

fn example_curl() -> Arc<CurlProfileS3<f64>> {
    Arc::new(example_profile().curl())
}

fn t3_profile() -> Arc<ShearProfileT3<f64>> {
    Arc::new(
        ShearProfileT3::new(
            Profile1D::parse("2*cos(z)", "z").unwrap(),
            Profile1D::parse("sin(z)", "z").unwrap(),
        )
        .unwrap(),
    )
}

struct Check {
    pass: bool,
    notes: Vec<String>,
}

impl Check {
    fn new() -> Self {
        Self {
            pass: true,
            notes: Vec::new(),
        }
    }

    fn require(&mut self, ok: bool, note: String) {
        if !ok {
            self.pass = false;
            self.notes.push(format!("FAILED: {note}"));
        } else {
            self.notes.push(note);
        }
    }

    fn finish(self, id: usize, name: &'static str, start: Instant) -> CriterionResult {
        CriterionResult {
            id,
            name,
            pass: self.pass,
            details: self.notes.join("; "),
            seconds: start.elapsed().as_secs_f64(),
        }
    }
}

/// Example-flow regression: curl components, Bernoulli values, and the twist
/// certificate of the reference profile, in closed form and through splines.
pub fn criterion_1() -> CriterionResult {
    let start = Instant::now();
    let mut c = Check::new();

    let prof = example_profile();
    let curl = prof.curl();
    let mut worst_f: f64 = 0.0;
    let mut worst_g: f64 = 0.0;
    for i in 0..=512 {
        let rho = i as f64 / 512.0;
        worst_f = worst_f.max((curl.f(rho) + 4.0 * rho).abs());
        worst_g = worst_g.max((curl.g(rho) - (2.0 + 4.0 * rho)).abs());
    }
    c.require(
        worst_f < 1e-9 && worst_g < 1e-9,
        format!("curl closed-form residual {:.1e}", worst_f.max(worst_g)),
    );

    let bern = prof.bernoulli();
    let b1 = bern.eval(1.0).unwrap();
    let bh = bern.eval(0.5).unwrap();
    c.require(
        (b1 - 1.5).abs() < 1e-9 && (bh - 0.625).abs() < 1e-9,
        format!("B(1)={b1:.12}, B(0.5)={bh:.12}"),
    );

    let rep = check_nondegenerate_s3(&prof, Some(7.9), &NondegeneracyOpts::default()).unwrap();
    c.require(
        rep.verdict == Verdict::Nondegenerate && (rep.twist_min - 8.0).abs() < 1e-9 && rep.tau >= 7.9,
        format!("twist_min={:.10}, tau={:.6}", rep.twist_min, rep.tau),
    );

    // spline route
    let f1s = prof
        .f1
        .resample_spline(0.0, 1.0, 512, SplineBc::Natural)
        .unwrap();
    let sp = Arc::new(ShearProfileS3::new(f1s, Profile1D::constant(0.0)));
    let curl_s = sp.curl();
    let mut worst_sp: f64 = 0.0;
    for i in 0..=256 {
        let rho = i as f64 / 256.0;
        worst_sp = worst_sp.max((curl_s.f(rho) + 4.0 * rho).abs());
        worst_sp = worst_sp.max((curl_s.g(rho) - (2.0 + 4.0 * rho)).abs());
    }
    let rep_s = check_nondegenerate_s3(&sp, Some(7.9), &NondegeneracyOpts::default()).unwrap();
    c.require(
        worst_sp < 1e-6 && rep_s.verdict == Verdict::Nondegenerate,
        format!("spline residual {worst_sp:.1e}, spline tau={:.6}", rep_s.tau),
    );

    c.finish(1, "example-flow regression", start)
}

/// Hopf eigenfield identities and the dual-form recomputation of the curl.
pub fn criterion_2() -> CriterionResult {
    let start = Instant::now();
    let mut c = Check::new();

    let u1: Arc<ShearProfileS3<f64>> = Arc::new(ShearProfileS3::new(
        Profile1D::constant(1.0),
        Profile1D::constant(0.0),
    ));
    let u2: Arc<ShearProfileS3<f64>> = Arc::new(ShearProfileS3::new(
        Profile1D::constant(0.0),
        Profile1D::constant(1.0),
    ));
    let c1 = u1.curl();
    let c2 = u2.curl();
    let mut worst: f64 = 0.0;
    for i in 0..=64 {
        let rho = i as f64 / 64.0;
        worst = worst.max((c1.a1(rho) + 2.0).abs());
        worst = worst.max(c1.a2(rho).abs());
        worst = worst.max(c2.a1(rho).abs());
        worst = worst.max((c2.a2(rho) - 2.0).abs());
    }
    c.require(worst < 1e-12, format!("eigenfield residual {worst:.1e}"));

    let prof = example_profile();
    let curl = prof.curl();
    let mut worst_forms: f64 = 0.0;
    for i in 0..=512 {
        let rho = i as f64 / 512.0;
        let (w1, w2) = curl_via_forms(&prof, rho);
        worst_forms = worst_forms.max((w1 - curl.f(rho)).abs());
        worst_forms = worst_forms.max((w2 - curl.g(rho)).abs());
    }
    c.require(
        worst_forms < 1e-10,
        format!("dual-form residual {worst_forms:.1e}"),
    );

    c.finish(2, "eigenfields + dual form", start)
}

/// Pointwise steady-state identity `u x rot u = grad B` on both spaces.
pub fn criterion_3() -> CriterionResult {
    let start = Instant::now();
    let mut c = Check::new();
    let r_s3 = bernoulli_identity_residual_s3(&example_profile(), 1000, 42).unwrap();
    c.require(r_s3 < 1e-8, format!("sphere residual {r_s3:.2e}"));
    let r_t3 = bernoulli_identity_residual_t3(&t3_profile(), 1000, 43);
    c.require(r_t3 < 1e-8, format!("torus residual {r_t3:.2e}"));
    c.finish(3, "Bernoulli identity", start)
}

/// Numeric return map against the exact twist map over 1000 seeds.
pub fn criterion_4() -> CriterionResult {
    let start = Instant::now();
    let mut c = Check::new();
    let curl = example_curl();
    let field = curl.as_field();
    let twist = analytic_return_map(&curl, (0.05, 0.95), 1).unwrap();
    let section = SectionSpec::s3_theta2(1);
    let opts = IntegratorOpts::with_tol(1e-10);
    let sup = (0..1000u64)
        .into_par_iter()
        .map(|k| {
            let theta = std::f64::consts::TAU * uniform01(100, k);
            let rho = 0.05 + 0.9 * uniform01(101, k);
            let r = return_map(&field, &section, [theta, 0.0, rho], &opts, 1e4).unwrap();
            let got = [theta + r.delta[0], r.state[2]];
            let want = twist.apply([theta, rho]).unwrap();
            (got[0] - want[0]).abs().max((got[1] - want[1]).abs())
        })
        .reduce(|| 0.0f64, f64::max);
    c.require(sup < 1e-7, format!("sup error over 1000 seeds {sup:.2e}"));
    c.finish(4, "return-map equivalence", start)
}

/// Resonant-circle location in closed form.
pub fn criterion_5() -> CriterionResult {
    let start = Instant::now();
    let mut c = Check::new();
    let curl = example_curl();
    let map = analytic_return_map(&curl, (0.01, 0.99), 1).unwrap();
    let w = |rho: f64| map.w(rho);
    let r_half = find_resonance(&w, (0.01, 0.99), -1, 2).unwrap();
    c.require(
        r_half.len() == 1 && (r_half[0] - 0.5).abs() < 1e-10,
        format!("c(1/2) = {:.12}", r_half.first().copied().unwrap_or(f64::NAN)),
    );
    let r_25 = find_resonance(&w, (0.01, 0.99), -2, 5).unwrap();
    c.require(
        r_25.len() == 1 && (r_25[0] - 1.0 / 3.0).abs() < 1e-10,
        format!("c(2/5) = {:.12}", r_25.first().copied().unwrap_or(f64::NAN)),
    );
    let none = find_resonance(&w, (0.01, 0.99), -3, 4).unwrap();
    c.require(none.is_empty(), format!("3/4 roots: {}", none.len()));
    c.finish(5, "resonance location", start)
}

/// The resonant-perturbation pipeline: periodic orbit, elliptic
/// classification, twist coefficient, KAM-stability probe.
pub fn criterion_6() -> CriterionResult {
    let start = Instant::now();
    let mut c = Check::new();
    let curl = example_curl();
    let annulus = (0.05, 0.95);
    let cc = 1.0 / 3.0;
    let base: Arc<dyn AnnulusMap<f64>> = Arc::new(analytic_return_map(&curl, annulus, 1).unwrap());
    let map = perturb(base, GeneratingPerturbation::new(1e-3, 5, cc, 0.1)).unwrap();

    let found = find_periodic(&*map, 5, cc, 64, &NewtonOpts::default());
    c.require(
        !found.orbits.is_empty() && !found.whole_circle,
        format!(
            "{} period-5 orbits from {} converged seeds",
            found.orbits.len(),
            found.seeds_converged
        ),
    );
    let res_ok = found.orbits.iter().all(|o| o.residual < 1e-9);
    let best_res = found
        .orbits
        .iter()
        .map(|o| o.residual)
        .fold(f64::INFINITY, f64::min);
    c.require(res_ok, format!("orbit residuals <= {best_res:.1e} (min)"));

    let copts = ClassifyOpts {
        twist: TwistFitOpts {
            r_max: 4e-3,
            n_radii: 6,
            decay: 0.72,
            n_iter: 4000,
        },
        ..ClassifyOpts::default()
    };
    let mut elliptic = None;
    for orbit in &found.orbits {
        if let Ok(class) = classify(&*map, orbit, &copts) {
            if matches!(
                class.verdict,
                StabilityVerdict::EllipticNondegenerate | StabilityVerdict::EllipticDegenerateTwist
            ) {
                elliptic = Some((orbit.clone(), class));
                break;
            }
        }
    }
    match &elliptic {
        None => c.require(false, "no elliptic period-5 orbit found".into()),
        Some((orbit, class)) => {
            c.require(
                class.p == -2 && class.q == 5,
                format!("orbit labels p={}, q={}", class.p, class.q),
            );
            c.require(
                !class.resonance_flags.iter().any(|&f| f),
                format!("omega = {:.6}, no k<=4 resonance", class.omega),
            );
            match class.alpha {
                Some((alpha, sigma)) => c.require(
                    alpha.abs() > 3.0 * sigma,
                    format!("alpha = {alpha:.4e} +- {sigma:.1e} (3-sigma nonzero)"),
                ),
                None => c.require(false, "twist fit unavailable".into()),
            }
            let probe = crate::kam::stability_probe(
                &*map,
                orbit,
                &StabilityProbeOpts {
                    eps0: 8e-3,
                    levels: 5,
                    radii_per_annulus: 8,
                    orbit_iters: 3000,
                    frac_floor: 0.5,
                    consecutive: 3,
                },
            );
            match probe {
                Ok(rep) => {
                    let fr: Vec<String> =
                        rep.fractions.iter().map(|f| format!("{f:.2}")).collect();
                    c.require(
                        rep.verdict == StabilityEvidence::KamStableEvidence,
                        format!("stability fractions [{}]", fr.join(", ")),
                    );
                }
                Err(e) => c.require(false, format!("stability probe failed: {e}")),
            }
        }
    }
    c.finish(6, "resonant pipeline", start)
}

/// Knotted-tori measure: the perturbed map carries a positive `(2,5)` class
/// and the integrable flow has full unknotted measure.
pub fn criterion_7() -> CriterionResult {
    criterion_7_sized(200, 200, 10_000)
}

pub fn criterion_7_sized(n_theta: usize, n_rho: usize, iters: usize) -> CriterionResult {
    let start = Instant::now();
    let mut c = Check::new();
    let curl = example_curl();
    let annulus = (0.005, 0.995);
    let total = total_volume::<f64>(Space::S3);

    // integrable reference
    let twist = analytic_return_map(&curl, annulus, 1).unwrap();
    let input = KappaInput::s3_map(&twist);
    let grid = GridSpec {
        n_theta,
        n_rho,
        orbit_iters: iters,
        jitter: true,
    };
    let est0 = kappa_estimate(&input, grid, 2024, &ClassifyOrbitOpts::default());
    let f0 = est0.fraction_of(IsotopyClass::Unknot);
    c.require(
        (f0 - 1.0).abs() <= 0.02,
        format!(
            "integrable unknot fraction {f0:.4} (absolute {:.4} vs {total:.4})",
            f0 * total
        ),
    );

    // perturbed map (same construction the suspension verifies)
    let base: Arc<dyn AnnulusMap<f64>> =
        Arc::new(analytic_return_map(&curl, annulus, 1).unwrap());
    let pmap = perturb(base, GeneratingPerturbation::new(1e-3, 5, 1.0 / 3.0, 0.1)).unwrap();
    let input = KappaInput::s3_map(&*pmap);
    let est1 = kappa_estimate(&input, grid, 2025, &ClassifyOrbitOpts::default());
    let knot = IsotopyClass::TorusKnot { p: 2, q: 5 };
    let lambda = est1.lambda();
    let class = est1.classes.iter().find(|cm| cm.class == knot);
    match class {
        None => c.require(false, "no (2,5) class mass found".into()),
        Some(cm) => {
            c.require(
                cm.orbit_count >= 10,
                format!("{} island orbits in the (2,5) class", cm.orbit_count),
            );
            c.require(
                cm.absolute > 0.0 && cm.stderr * total < lambda / 3.0,
                format!(
                    "lambda = {:.4e} (stderr {:.1e})",
                    lambda,
                    cm.stderr * total
                ),
            );
        }
    }
    let kappa0_abs = est1.fraction_of(IsotopyClass::Unknot) * total;
    c.require(
        kappa0_abs <= total - lambda,
        format!("kappa0 {kappa0_abs:.4} <= {:.4}", total - lambda),
    );
    c.finish(7, "knotted measure", start)
}

/// Suspension recovery at three amplitudes, divergence, and support.
pub fn criterion_8() -> CriterionResult {
    criterion_8_sized(64)
}

pub fn criterion_8_sized(n: usize) -> CriterionResult {
    let start = Instant::now();
    let mut c = Check::new();
    let curl = example_curl();
    let annulus = (0.05, 0.95);
    let integ = IntegratorOpts::with_tol(1e-10);

    let residual_at = |eps: f64| -> f64 {
        let (map, field) =
            build_pair(&curl, GeneratingPerturbation::new(eps, 5, 1.0 / 3.0, 0.1), annulus, -2)
                .unwrap();
        let rep = verify_suspension(&field, &*map, (n, n), &integ).unwrap();
        rep.sup_residual
    };
    let r_mid = residual_at(1e-3);
    c.require(
        r_mid < 5e-6,
        format!("sup residual {r_mid:.2e} at eps=1e-3 on {n}x{n}"),
    );
    let r_lo = residual_at(1e-4);
    let r_hi = residual_at(1e-2);
    // construction is exact: residuals must stay within a linear envelope of
    // the mid-amplitude one (integration noise floor included)
    let envelope = |eps: f64| 5e-6 * (eps / 1e-3).max(1.0);
    c.require(
        r_lo <= envelope(1e-4) && r_hi <= envelope(1e-2),
        format!("sweep residuals {r_lo:.2e} / {r_mid:.2e} / {r_hi:.2e}"),
    );

    let field = suspend(
        &curl,
        &GeneratingPerturbation::new(1e-3, 5, 1.0 / 3.0, 0.1),
        annulus,
        -2,
    )
    .unwrap();
    let mut div_worst: f64 = 0.0;
    for k in 0..2000u64 {
        let q = [
            std::f64::consts::TAU * uniform01(200, k),
            std::f64::consts::TAU * uniform01(201, k),
            0.06 + 0.88 * uniform01(202, k),
        ];
        div_worst = div_worst.max(field.divergence(q).abs());
    }
    c.require(div_worst < 1e-12, format!("divergence sup {div_worst:.1e}"));

    let mut support_ok = true;
    for k in 0..500u64 {
        let rho = 0.06 + 0.88 * uniform01(203, k);
        let th2 = std::f64::consts::TAU * uniform01(204, k);
        let outside = (rho - 1.0 / 3.0).abs() >= 0.1;
        if outside {
            let v = field.eval([1.0, th2, rho]);
            if v != [curl.f(rho), curl.g(rho), 0.0] {
                support_ok = false;
            }
        }
    }
    c.require(support_ok, "field equals reference outside support".into());
    c.finish(8, "suspension recovery", start)
}

/// Per-class measure agreement before and after volume-preserving transport.
pub fn criterion_9() -> CriterionResult {
    criterion_9_sized(24, 24, 800)
}

pub fn criterion_9_sized(n_theta: usize, n_rho: usize, iters: usize) -> CriterionResult {
    let start = Instant::now();
    let mut c = Check::new();
    let grid = GridSpec {
        n_theta,
        n_rho,
        orbit_iters: iters,
        jitter: true,
    };
    let copts = ClassifyOrbitOpts::default();

    // sphere: rotation along the second Hopf field
    {
        let curl = example_curl();
        let annulus = (0.1, 0.9);
        let field: Arc<dyn ChartField<f64>> = Arc::new(curl.as_field());
        let phi = Arc::new(VolumePreservingDiffeo::S3Rotation {
            along_u1: false,
            time: 0.78,
        });
        let pushed: Arc<dyn ChartField<f64>> =
            Arc::new(PushforwardField::new(field.clone(), phi).unwrap());
        let mk = |f: Arc<dyn ChartField<f64>>| {
            let c3 = curl.clone();
            NumericReturnMap::new(
                f,
                SectionSpec::s3_theta2(1),
                IntegratorOpts::with_tol(1e-9),
                500.0,
                annulus,
                crate::twistmaps::AreaDensity::new(
                    Arc::new(move |rho| c3.g(rho).abs()),
                    0.05,
                    0.95,
                    1024,
                ),
            )
        };
        let map_a = mk(field);
        let map_b = mk(pushed);
        let ia = KappaInput::s3_map(&map_a);
        let ib = KappaInput::s3_map(&map_b);
        let ea = kappa_estimate(&ia, grid, 31, &copts);
        let eb = kappa_estimate(&ib, grid, 32, &copts);
        let (agree, worst) = kappa_agree(&ea, &eb, 2.0);
        c.require(
            agree,
            format!(
                "sphere rotation: fractions {:.4} vs {:.4} ({worst:.2} sigma)",
                ea.fraction_of(IsotopyClass::Unknot),
                eb.fraction_of(IsotopyClass::Unknot)
            ),
        );
    }

    // torus: shear (x, y, z) -> (x + a(z), y + b(z), z)
    {
        let prof = t3_profile();
        let annulus = (0.55 * std::f64::consts::PI, 1.45 * std::f64::consts::PI);
        let field: Arc<dyn ChartField<f64>> = Arc::new(ShearCurlT3 { prof: prof.clone() });
        let phi = Arc::new(VolumePreservingDiffeo::T3Shear {
            a: Profile1D::parse("sin(z)", "z").unwrap(),
            b: Profile1D::parse("0.5*cos(z)", "z").unwrap(),
        });
        let pushed: Arc<dyn ChartField<f64>> =
            Arc::new(PushforwardField::new(field.clone(), phi).unwrap());
        let mk = |f: Arc<dyn ChartField<f64>>| {
            let p3 = prof.clone();
            NumericReturnMap::new(
                f,
                SectionSpec::t3_x(1),
                IntegratorOpts::with_tol(1e-9),
                3000.0,
                annulus,
                crate::twistmaps::AreaDensity::new(
                    Arc::new(move |z: f64| p3.g.d1(z).abs()),
                    annulus.0 - 0.05,
                    annulus.1 + 0.05,
                    1024,
                ),
            )
        };
        let map_a = mk(field);
        let map_b = mk(pushed);
        let ia = KappaInput::t3_map(&map_a);
        let ib = KappaInput::t3_map(&map_b);
        let ea = kappa_estimate(&ia, grid, 33, &copts);
        let eb = kappa_estimate(&ib, grid, 34, &copts);
        let (agree, worst) = kappa_agree(&ea, &eb, 2.0);
        c.require(
            agree,
            format!(
                "torus shear: fractions {:.4} vs {:.4} ({worst:.2} sigma)",
                ea.fraction_of(IsotopyClass::T3Horizontal),
                eb.fraction_of(IsotopyClass::T3Horizontal)
            ),
        );
    }
    c.finish(9, "transport invariance", start)
}

/// Property bundle: area preservation, exactness, rotation q-scaling,
/// first-integral conservation, determinism under thread-count variation.
pub fn criterion_10() -> CriterionResult {
    let start = Instant::now();
    let mut c = Check::new();
    let curl = example_curl();
    let annulus = (0.05, 0.95);

    // area preservation: analytic and generating maps at 1e-8
    let twist = analytic_return_map(&curl, annulus, 1).unwrap();
    let ra = area_residual(&twist, 300, 51).unwrap();
    let base: Arc<dyn AnnulusMap<f64>> = Arc::new(analytic_return_map(&curl, annulus, 1).unwrap());
    let pmap = perturb(base, GeneratingPerturbation::new(1e-3, 5, 1.0 / 3.0, 0.1)).unwrap();
    let rp = area_residual(&*pmap, 300, 52).unwrap();
    c.require(
        ra < 1e-8 && rp < 1e-8,
        format!("area residuals: twist {ra:.1e}, perturbed {rp:.1e}"),
    );

    // numeric return map area preservation at 1e-6
    let field: Arc<dyn ChartField<f64>> = Arc::new(curl.as_field());
    let c3 = curl.clone();
    let nmap = NumericReturnMap::new(
        field,
        SectionSpec::s3_theta2(1),
        IntegratorOpts::with_tol(1e-11),
        500.0,
        (0.1, 0.9),
        crate::twistmaps::AreaDensity::new(Arc::new(move |rho| c3.g(rho).abs()), 0.05, 0.95, 1024),
    );
    let rn = area_residual(&nmap, 40, 53).unwrap();
    c.require(rn < 1e-6, format!("numeric-map area residual {rn:.1e}"));

    // exactness / intersection
    c.require(
        intersection_property(&*pmap, 15, 128).unwrap(),
        "intersection property".into(),
    );

    // rotation q-scaling on invariant circles
    let mut worst_scale: f64 = 0.0;
    for &rho in &[0.17, 0.39, 0.71] {
        let nu = rotation_number(&twist, [0.0, rho], 4096);
        for q in [2usize, 3, 5] {
            struct Pow<'a>(&'a dyn AnnulusMap<f64>, usize);
            impl<'a> AnnulusMap<f64> for Pow<'a> {
                fn bounds(&self) -> (f64, f64) {
                    self.0.bounds()
                }
                fn apply(&self, x: [f64; 2]) -> Result<[f64; 2], crate::twistmaps::MapFail> {
                    crate::twistmaps::apply_n(self.0, x, self.1).map_err(|(_, e)| e)
                }
                fn density(&self) -> &crate::twistmaps::AreaDensity<f64> {
                    self.0.density()
                }
                fn is_exact(&self) -> bool {
                    true
                }
            }
            let est = rotation_number(&Pow(&twist, q), [0.0, rho], 4096);
            let want = (q as f64 * nu.value).rem_euclid(1.0);
            let diff = (est.value - want).rem_euclid(1.0);
            worst_scale = worst_scale.max(diff.min(1.0 - diff));
        }
    }
    c.require(worst_scale < 1e-8, format!("q-scaling residual {worst_scale:.1e}"));

    // first-integral conservation along traced curls
    let tol = 1e-10;
    let t_end = 30.0;
    let traj = crate::dynamics::trace(
        &curl.as_field(),
        [0.0, 0.0, 0.37],
        t_end,
        &IntegratorOpts::with_tol(tol),
    )
    .unwrap();
    let drift = traj
        .states
        .iter()
        .map(|s| (s[2] - 0.37).abs())
        .fold(0.0f64, f64::max);
    c.require(
        drift < 10.0 * tol * t_end,
        format!("rho drift {drift:.1e} over t={t_end}"),
    );

    // determinism under thread-count variation
    let det_run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| {
            let input = KappaInput::s3_map(&twist);
            let grid = GridSpec {
                n_theta: 12,
                n_rho: 12,
                orbit_iters: 1200,
                jitter: true,
            };
            let est = kappa_estimate(&input, grid, 5, &ClassifyOrbitOpts::default());
            est.to_json().to_string()
        })
    };
    let one = det_run(1);
    let four = det_run(4);
    c.require(one == four, "kappa byte-identical at 1 and 4 threads".into());

    // orbit iteration is pure: same result twice
    let o1 = iterate(&*pmap, [0.3, 0.4], 64);
    let o2 = iterate(&*pmap, [0.3, 0.4], 64);
    c.require(o1.points == o2.points, "orbit iteration reproducible".into());

    c.finish(10, "property suites", start)
}

/// Run the whole suite. `quick` shrinks the large grids (used by unit-level
/// smoke checks; the acceptance test target runs the full sizes).
pub fn run_all(quick: bool) -> Vec<CriterionResult> {
    let c7 = if quick {
        criterion_7_sized(60, 60, 3000)
    } else {
        criterion_7()
    };
    let c8 = if quick { criterion_8_sized(16) } else { criterion_8() };
    let c9 = if quick {
        criterion_9_sized(12, 12, 500)
    } else {
        criterion_9()
    };
    vec![
        criterion_1(),
        criterion_2(),
        criterion_3(),
        criterion_4(),
        criterion_5(),
        criterion_6(),
        c7,
        c8,
        c9,
        criterion_10(),
    ]
}
