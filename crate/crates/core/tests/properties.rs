//! Cross-module property tests that do not fit a single unit-test module:
//! escape reporting, bifurcation counting, estimator stability under grid
//! refinement, the suspension recovery bound, and the generic-scalar smoke
//! checks.

use eulab_core::dynamics::{trace, IntegratorOpts};
use eulab_core::geometry::{
    chart_of, embed, total_volume, ChartField, ChartPointS3, HopfBasis, Space, VolumeWeight,
};
use eulab_core::kam::{
    kappa_agree, kappa_estimate, ClassifyOrbitOpts, GridSpec, IsotopyClass, KappaInput,
};
use eulab_core::profile::Profile1D;
use eulab_core::steady::ShearProfileS3;
use eulab_core::suspension::{build_pair, verify_suspension};
use eulab_core::twistmaps::{
    analytic_return_map, find_periodic, iterate, perturb, rotation_number_of_orbit, AnnulusMap,
    AreaDensity, GeneratingPerturbation, MapFail, NewtonOpts,
};
use proptest::prelude::*;
use std::sync::Arc;

fn example_curl() -> Arc<eulab_core::steady::CurlProfileS3<f64>> {
    let prof = Arc::new(ShearProfileS3::new(
        Profile1D::parse("1 + rho", "rho").unwrap(),
        Profile1D::constant(0.0),
    ));
    Arc::new(prof.curl())
}

#[test]
fn hopf_basis_and_volume_weights() {
    assert_eq!(HopfBasis::u1::<f64>(), [1.0, -1.0, 0.0]);
    assert_eq!(HopfBasis::u2::<f64>(), [1.0, 1.0, 0.0]);
    assert_eq!(VolumeWeight::<f64>::for_space(Space::S3).density, 0.5);
    assert_eq!(VolumeWeight::<f64>::for_space(Space::T3).density, 1.0);
    let pi = std::f64::consts::PI;
    assert!((total_volume::<f64>(Space::S3) - 2.0 * pi * pi).abs() < 1e-12);
    assert!((total_volume::<f64>(Space::T3) - 8.0 * pi * pi * pi).abs() < 1e-12);
}

#[test]
fn trace_reports_escape_from_chart_guard() {
    // synthetic field with a steady drift toward the critical circle
    struct Drift;
    impl ChartField<f64> for Drift {
        fn space(&self) -> Space {
            Space::S3
        }
        fn eval(&self, _q: [f64; 3]) -> [f64; 3] {
            [0.0, 1.0, -0.05]
        }
    }
    let traj = trace(&Drift, [0.0, 0.0, 0.1], 100.0, &IntegratorOpts::default()).unwrap();
    let esc = traj.escape.expect("orbit must escape through rho -> 0");
    assert!(esc.state[2] <= 1e-6 + 1e-12);
    assert!(esc.t < 2.1, "escape time {}", esc.t);
}

#[test]
fn rotation_estimate_flags_partial_orbits() {
    struct Leak(AreaDensity<f64>);
    impl AnnulusMap<f64> for Leak {
        fn bounds(&self) -> (f64, f64) {
            (0.0, 1.0)
        }
        fn apply(&self, x: [f64; 2]) -> Result<[f64; 2], MapFail> {
            if x[1] > 0.9 {
                return Err(MapFail::LeftAnnulus);
            }
            Ok([x[0] + 0.37, x[1] + 0.01])
        }
        fn density(&self) -> &AreaDensity<f64> {
            &self.0
        }
        fn is_exact(&self) -> bool {
            false
        }
    }
    let map = Leak(AreaDensity::unit(0.0, 1.0));
    let orbit = iterate(&map, [0.0, 0.5], 1000);
    assert!(orbit.escaped());
    let est = rotation_number_of_orbit(&orbit, 1000);
    assert!(est.partial);
}

#[test]
fn bifurcation_count_stable_under_seed_refinement() {
    // the broken resonance has finitely many periodic points; doubling the
    // seed count must not change the deduplicated orbit count
    let base: Arc<dyn AnnulusMap<f64>> =
        Arc::new(analytic_return_map(&example_curl(), (0.05, 0.95), 1).unwrap());
    let map = perturb(base, GeneratingPerturbation::new(1e-3, 2, 0.5, 0.1)).unwrap();
    let a = find_periodic(&*map, 2, 0.5, 48, &NewtonOpts::default());
    let b = find_periodic(&*map, 2, 0.5, 96, &NewtonOpts::default());
    assert!(!a.whole_circle && !b.whole_circle);
    assert_eq!(a.orbits.len(), b.orbits.len());
    assert!(a.orbits.len() >= 2);
}

#[test]
fn kappa_stable_under_grid_refinement() {
    let curl = example_curl();
    let map = analytic_return_map(&curl, (0.05, 0.95), 1).unwrap();
    let input = KappaInput::s3_map(&map);
    let coarse = GridSpec {
        n_theta: 12,
        n_rho: 24,
        orbit_iters: 2000,
        jitter: true,
    };
    let fine = GridSpec {
        n_theta: 24,
        n_rho: 48,
        orbit_iters: 2000,
        jitter: true,
    };
    let a = kappa_estimate(&input, coarse, 9, &ClassifyOrbitOpts::default());
    let b = kappa_estimate(&input, fine, 9, &ClassifyOrbitOpts::default());
    let (agree, worst) = kappa_agree(&a, &b, 2.0);
    assert!(agree, "refinement moved fractions by {worst:.2} sigma");
}

#[test]
fn island_measure_positive_for_small_eps_and_zero_without() {
    let curl = example_curl();
    let grid = GridSpec {
        n_theta: 40,
        n_rho: 40,
        orbit_iters: 2000,
        jitter: true,
    };
    let base_map = analytic_return_map(&curl, (0.05, 0.95), 1).unwrap();
    let input = KappaInput::s3_map(&base_map);
    let est0 = kappa_estimate(&input, grid, 77, &ClassifyOrbitOpts::default());
    assert_eq!(est0.lambda(), 0.0, "integrable flow has no knotted mass");

    for eps in [5e-4, 2e-3] {
        let base: Arc<dyn AnnulusMap<f64>> =
            Arc::new(analytic_return_map(&curl, (0.05, 0.95), 1).unwrap());
        let pmap = perturb(base, GeneratingPerturbation::new(eps, 5, 1.0 / 3.0, 0.1)).unwrap();
        let input = KappaInput::s3_map(&*pmap);
        let est = kappa_estimate(&input, grid, 78, &ClassifyOrbitOpts::default());
        assert!(
            est.lambda() > 0.0,
            "eps={eps}: expected positive knotted measure"
        );
        assert!(est.fraction_of(IsotopyClass::TorusKnot { p: 2, q: 5 }) > 0.0);
    }
}

#[test]
fn fully_chaotic_map_classifies_nothing() {
    struct Chirikov(f64, AreaDensity<f64>);
    impl AnnulusMap<f64> for Chirikov {
        fn bounds(&self) -> (f64, f64) {
            (-30.0, 30.0)
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
    let map = Chirikov(7.0, AreaDensity::unit(-30.0, 30.0));
    let input = KappaInput {
        map: &map,
        space: Space::T3,
        weight: Arc::new(|_| 1.0),
        base_class: IsotopyClass::T3Horizontal,
        island_class: Arc::new(|_, _| IsotopyClass::Other),
    };
    let grid = GridSpec {
        n_theta: 8,
        n_rho: 8,
        orbit_iters: 1500,
        jitter: true,
    };
    let est = kappa_estimate(&input, grid, 5, &ClassifyOrbitOpts::default());
    // at K = 7 the phase space is a chaotic sea: horizontal-curve mass must
    // be essentially absent (an accelerator-mode sliver may survive)
    assert!(
        est.fraction_of(IsotopyClass::T3Horizontal) < 0.05,
        "chaotic map produced {:.3} horizontal mass",
        est.fraction_of(IsotopyClass::T3Horizontal)
    );
}

#[test]
fn suspension_recovery_bound() {
    // sup residual < max(10 * integrator_tol, 1e-6 * eps)
    let curl = example_curl();
    let tol = 1e-12;
    for eps in [0.0, 1e-4, 1e-3, 1e-2] {
        let (map, field) = build_pair(
            &curl,
            GeneratingPerturbation::new(eps, 5, 1.0 / 3.0, 0.1),
            (0.05, 0.95),
            -2,
        )
        .unwrap();
        let rep =
            verify_suspension(&field, &*map, (12, 12), &IntegratorOpts::with_tol(tol)).unwrap();
        let bound = (10.0 * tol).max(1e-6 * eps);
        assert!(
            rep.sup_residual < bound,
            "eps={eps}: sup {:.2e} >= bound {bound:.2e}",
            rep.sup_residual
        );
    }
}

#[test]
fn generic_scalar_f32_smoke() {
    // the numerical core is generic: an f32 instantiation must build and
    // produce coarse but sane values
    let prof: Arc<ShearProfileS3<f32>> = Arc::new(ShearProfileS3::new(
        Profile1D::parse("1 + rho", "rho").unwrap(),
        Profile1D::constant(0.0f32),
    ));
    let curl = Arc::new(prof.curl());
    assert!((curl.f(0.5f32) + 2.0).abs() < 1e-5);
    assert!((curl.g(0.5f32) - 4.0).abs() < 1e-5);
    let map = analytic_return_map(&curl, (0.1f32, 0.9f32), 1).unwrap();
    let y = map.apply([0.0f32, 0.5]).unwrap();
    assert!((y[0] + std::f32::consts::PI).abs() < 1e-5);
    let p = ChartPointS3::new(0.3f32, 0.4, 0.5).unwrap();
    let a = embed(&p).unwrap();
    assert!((a.norm_sq() - 1.0).abs() < 1e-6);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn embed_chart_roundtrip(
        theta1 in 0.0f64..std::f64::consts::TAU,
        theta2 in 0.0f64..std::f64::consts::TAU,
        rho in 1e-4f64..0.9999,
    ) {
        let p = ChartPointS3::new(theta1, theta2, rho).unwrap();
        let a = embed(&p).unwrap();
        prop_assert!((a.norm_sq() - 1.0).abs() < 1e-12);
        prop_assert!((a.rho() - rho).abs() < 1e-13);
        let back = chart_of(&a, 1e-6).unwrap();
        let b = embed(&back).unwrap();
        let dist = ((a.x - b.x).powi(2) + (a.y - b.y).powi(2)
            + (a.z - b.z).powi(2) + (a.xi - b.xi).powi(2)).sqrt();
        prop_assert!(dist < 1e-10);
    }

    #[test]
    fn torus_knot_normalization_symmetric(p in -40i64..40, q in 1u32..40) {
        let a = IsotopyClass::torus_knot(p, q);
        let swapped = IsotopyClass::torus_knot(q as i64, p.unsigned_abs() as u32);
        // symmetry holds whenever both pairs are well-formed windings
        if p != 0 {
            prop_assert_eq!(a, swapped);
        }
        // the trivial cases are always the unknot
        if p.unsigned_abs().min(q as u64) <= 1 {
            prop_assert_eq!(a, IsotopyClass::Unknot);
        }
    }
}
