//! Suspension: a divergence-free field on the annulus-times-circle whose
//! section return map is a prescribed perturbation of the reference twist
//! map.
//!
//! The perturbed map is `Pi = Pi0 o phi_eps` with `phi_eps` a
//! generating-function map, so the isotopy `phi_t` (generating family
//! `theta1 P + t eps s`) has an explicit generator Hamiltonian. Written in
//! the frame co-moving with the reference flow, the suspended field is
//!
//! `w_hat = w + chi(theta2) X_K(theta1, rho, theta2)`
//!
//! where `chi` is a C2 temporal bump on `theta2 in (pi/2, 3pi/2)` with unit
//! integral, `K` is the conjugated generator Hamiltonian, and `X_K` its
//! Hamiltonian vector field with respect to the section area form. The
//! theta2 component is untouched (`g(rho) > 0`), so transversality holds by
//! construction, the field equals the reference one outside the bump
//! supports, and its chart divergence vanishes identically. The return map
//! of `w_hat` is `Pi` exactly, up to the precision of the implicit solves.

use crate::dynamics::{IntegratorOpts, SectionSpec};
use crate::error::{Error, Result};
use crate::geometry::{ChartField, Space};
use crate::scalar::{wrap_angle, Real};
use crate::steady::CurlProfileS3;
use crate::twistmaps::{
    analytic_return_map, bump, bump_d1, bump_d2, perturb, AnnulusMap, GeneratingPerturbation,
    PerturbedMap,
};
use rayon::prelude::*;
use std::sync::Arc;

/// C2 temporal bump supported on `theta2 in (pi/2, 3pi/2)`, unit integral.
pub fn chi<T: Real>(theta2: T) -> T {
    let half = T::PI() * T::of(0.5);
    let v = (theta2 - T::PI()) / half;
    if v.abs() >= T::one() {
        return T::zero();
    }
    // normalization: (pi/2) * int (1-v^2)^3 dv = 16 pi / 35
    let norm = T::of(35.0) / (T::of(16.0) * T::PI());
    bump(v) * norm
}

/// Cumulative integral `T(theta2) = int_0^theta2 chi`.
pub fn chi_cumulative<T: Real>(theta2: T) -> T {
    let half = T::PI() * T::of(0.5);
    let v = (theta2 - T::PI()) / half;
    if v <= -T::one() {
        return T::zero();
    }
    if v >= T::one() {
        return T::one();
    }
    // antiderivative of (1-u^2)^3 is u - u^3 + (3/5) u^5 - u^7/7
    let anti = |u: T| {
        let u2 = u * u;
        u * (T::one() - u2 + T::of(0.6) * u2 * u2 - u2 * u2 * u2 / T::of(7.0))
    };
    let sixteen_35 = T::of(16.0 / 35.0);
    (anti(v) + sixteen_35) * T::of(35.0 / 32.0)
}

/// Divergence-free suspension of `Pi0 o phi_eps` over the reference shear
/// curl `w`.
pub struct SuspendedField<T: Real> {
    pub curl: Arc<CurlProfileS3<T>>,
    pub pert: GeneratingPerturbation<T>,
    /// Winding label of the resonance the perturbation targets (provenance
    /// for reports; the construction itself only needs the perturbation).
    pub resonance_p: i64,
    pub annulus: (T, T),
}

/// Local quantities of the perturbation Hamiltonian at one chart point.
struct PertFrame<T> {
    chi: T,
    k_theta1: T,
    k_rho: T,
    // pieces reused by the divergence evaluation
    t: T,
    cq: T,
    cqp: T,
    b0: T,
    b0p: T,
    b1: T,
    b1p: T,
    jden: T,
    q_th: T,
    q_rh: T,
}

impl<T: Real> SuspendedField<T> {
    /// Wavenumber of the perturbation.
    fn kk(&self) -> T {
        T::of(self.pert.harmonic as f64)
    }

    /// Solve the angular implicit equation `q = Q - t eps s_P(q, rho)` and
    /// assemble the Hamiltonian derivatives. `None` outside the bump
    /// support.
    fn frame(&self, theta1: T, theta2w: T, rho: T) -> Option<PertFrame<T>> {
        let eps = self.pert.eps;
        if eps == T::zero() {
            return None;
        }
        let c = self.pert.center;
        let r = self.pert.radius;
        let u = (rho - c) / r;
        if u.abs() >= T::one() {
            return None;
        }
        let chi_v = chi(theta2w);
        let t = chi_cumulative(theta2w);
        if chi_v == T::zero() && t == T::zero() {
            return None;
        }
        let g = self.curl.g(rho);
        let gp = self.curl.g_d1(rho);
        let f = self.curl.f(rho);
        let fp = self.curl.f_d1(rho);
        let k = self.kk();

        let b0 = bump(u);
        let b0p = bump_d1(u) / r;
        let b1 = bump_d1(u) / (r * g);
        let b1p = bump_d2(u) / (r * r * g) - bump_d1(u) * gp / (r * g * g);
        let wt = f / g;
        let wtp = (fp * g - f * gp) / (g * g);
        let qq = theta1 - theta2w * wt;

        // fixed point for the angular variable of the generating pair
        let te = t * eps;
        let mut q = qq;
        let tol = T::epsilon() * T::of(8.0) * (qq.abs() + T::one());
        let mut converged = false;
        for _ in 0..self.pert.max_iter {
            let q_next = qq - te * (k * q).cos() * b1;
            let delta = (q_next - q).abs();
            q = q_next;
            if delta <= tol {
                converged = true;
                break;
            }
        }
        if !converged {
            // the contraction gate in `suspend` makes this unreachable for
            // accepted amplitudes; bail to the unperturbed field
            return None;
        }
        let cq = (k * q).cos();
        let cqp = -k * (k * q).sin();
        let cqpp = -k * k * cq;
        let jden = T::one() + te * cqp * b1;
        let q_th = T::one() / jden;
        let q_rh = (-theta2w * wtp - te * cq * b1p) / jden;

        let k_theta1 = eps * cqp * b0 / jden;
        let k_rho = eps * (cqp * q_rh * b0 + cq * b0p);
        let _ = cqpp;
        Some(PertFrame {
            chi: chi_v,
            k_theta1,
            k_rho,
            t,
            cq,
            cqp,
            b0,
            b0p,
            b1,
            b1p,
            jden,
            q_th,
            q_rh,
        })
    }

    /// Magnitude of the perturbation term at a point (sup norm of the two
    /// nonzero components).
    pub fn perturbation_magnitude(&self, q: [T; 3]) -> T {
        match self.frame(q[0], wrap_angle(q[1]), q[2]) {
            None => T::zero(),
            Some(fr) => (fr.chi * fr.k_rho).abs().max((fr.chi * fr.k_theta1).abs()),
        }
    }

    /// Chart divergence at a point, evaluated analytically: the two mixed
    /// second partials of the Hamiltonian are computed through independent
    /// differentiation routes and subtracted, so the result measures the
    /// internal consistency of the construction (identically zero up to
    /// rounding).
    pub fn divergence(&self, q: [T; 3]) -> T {
        let theta2w = wrap_angle(q[1]);
        let fr = match self.frame(q[0], theta2w, q[2]) {
            None => return T::zero(),
            Some(fr) => fr,
        };
        let eps = self.pert.eps;
        let k = self.kk();
        let te = fr.t * eps;
        let cqpp = -k * k * fr.cq;
        // dJ/drho and dJ/dtheta1
        let dj_drho = te * (cqpp * fr.q_rh * fr.b1 + fr.cqp * fr.b1p);
        let dj_dth = te * cqpp * fr.q_th * fr.b1;
        // d(q_rho)/dtheta1 via the quotient rule on q_rh = num / J
        let dqrh_dth = (-te * fr.cqp * fr.q_th * fr.b1p - fr.q_rh * dj_dth) / fr.jden;
        // route 1: d/dtheta1 of K_rho
        let d_th_k_rho = eps
            * (cqpp * fr.q_th * fr.q_rh * fr.b0
                + fr.cqp * dqrh_dth * fr.b0
                + fr.cqp * fr.q_th * fr.b0p);
        // route 2: d/drho of K_theta1
        let d_rh_k_th = eps
            * (cqpp * fr.q_rh * fr.b0 / fr.jden + fr.cqp * fr.b0p / fr.jden
                - fr.cqp * fr.b0 * dj_drho / (fr.jden * fr.jden));
        fr.chi * (d_th_k_rho - d_rh_k_th)
    }
}

impl<T: Real> ChartField<T> for SuspendedField<T> {
    fn space(&self) -> Space {
        Space::S3
    }

    fn eval(&self, q: [T; 3]) -> [T; 3] {
        let rho = q[2];
        let f = self.curl.f(rho);
        let g = self.curl.g(rho);
        match self.frame(q[0], wrap_angle(q[1]), rho) {
            None => [f, g, T::zero()],
            Some(fr) => [f + fr.chi * fr.k_rho, g, -fr.chi * fr.k_theta1],
        }
    }
}

/// Build the suspended field for a perturbation of the reference curl, after
/// checking that the bump support sits inside the annulus and that the
/// angular implicit solve contracts.
pub fn suspend<T: Real>(
    curl: &Arc<CurlProfileS3<T>>,
    pert: &GeneratingPerturbation<T>,
    annulus: (T, T),
    resonance_p: i64,
) -> Result<SuspendedField<T>> {
    let (a, b) = annulus;
    if pert.center - pert.radius <= a || pert.center + pert.radius >= b {
        return Err(Error::AmplitudeTooLarge(format!(
            "bump support [{}, {}] must sit strictly inside the annulus ({}, {})",
            (pert.center - pert.radius).as_f64(),
            (pert.center + pert.radius).as_f64(),
            a.as_f64(),
            b.as_f64()
        )));
    }
    let mut min_g = T::infinity();
    for i in 0..=512 {
        let rho = a + (b - a) * T::of(i as f64) / T::of(512.0);
        let g = curl.g(rho);
        if g <= T::zero() {
            return Err(Error::SectionChoice(format!(
                "reference curl has g({}) = {} <= 0; suspension requires a positive transit speed",
                rho.as_f64(),
                g.as_f64()
            )));
        }
        min_g = min_g.min(g);
    }
    // contraction of the angular implicit solve:
    // sup |t eps d/dq s_P| = eps k max|bump'| / (radius min g)
    let k = T::of(pert.harmonic as f64);
    let u_star = T::of(1.0 / 5.0f64.sqrt());
    let contraction = pert.eps.abs() * k * bump_d1(u_star).abs() / (pert.radius * min_g);
    if contraction >= T::of(0.5) {
        return Err(Error::AmplitudeTooLarge(format!(
            "suspension implicit solve would not contract: factor {:.3}",
            contraction.as_f64()
        )));
    }
    Ok(SuspendedField {
        curl: curl.clone(),
        pert: pert.clone(),
        resonance_p,
        annulus,
    })
}

/// Convenience: the perturbed section map and its suspension built from the
/// same generating data.
pub fn build_pair<T: Real>(
    curl: &Arc<CurlProfileS3<T>>,
    pert: GeneratingPerturbation<T>,
    annulus: (T, T),
    resonance_p: i64,
) -> Result<(Arc<PerturbedMap<T>>, SuspendedField<T>)> {
    let base: Arc<dyn AnnulusMap<T>> = Arc::new(analytic_return_map(curl, annulus, 1)?);
    let map = perturb(base, pert.clone())?;
    let field = suspend(curl, &pert, annulus, resonance_p)?;
    Ok((map, field))
}

#[derive(Clone, Debug)]
pub struct SuspensionReport<T> {
    pub sup_residual: T,
    pub rms_residual: T,
    /// Grid cells where the verification return failed.
    pub flagged: Vec<(usize, usize)>,
    /// `sup |w_hat - w| / sup |Pi - Pi0|`: proxy for the construction
    /// constant.
    pub field_to_map_ratio: T,
    pub grid: (usize, usize),
}

/// Compare the numerical return map of the suspended field against the
/// prescribed annulus map on an `n_theta x n_rho` grid.
pub fn verify_suspension<T: Real>(
    field: &SuspendedField<T>,
    map: &dyn AnnulusMap<T>,
    grid: (usize, usize),
    integ: &IntegratorOpts<T>,
) -> Result<SuspensionReport<T>> {
    let (a, b) = field.annulus;
    let (n_theta, n_rho) = grid;
    let section = SectionSpec::s3_theta2(1);
    let mut min_g = T::infinity();
    for i in 0..=64 {
        let rho = a + (b - a) * T::of(i as f64) / T::of(64.0);
        min_g = min_g.min(field.curl.g(rho));
    }
    let max_transit = T::of(50.0) * T::two_pi() / min_g;

    let cells: Vec<(usize, usize)> = (0..n_rho)
        .flat_map(|j| (0..n_theta).map(move |i| (i, j)))
        .collect();
    let results: Vec<Result<T, (usize, usize)>> = cells
        .par_iter()
        .map(|&(i, j)| {
            let theta = T::two_pi() * T::of(i as f64) / T::of(n_theta as f64);
            let rho = a
                + (b - a) * (T::of(j as f64) + T::of(0.5)) / T::of(n_rho as f64);
            let want = match map.apply([theta, rho]) {
                Ok(w) => w,
                Err(_) => return Err((i, j)),
            };
            match crate::dynamics::return_map(field, &section, [theta, T::zero(), rho], integ, max_transit)
            {
                Ok(r) => {
                    let got = [theta + r.delta[0], r.state[2]];
                    Ok((got[0] - want[0]).abs().max((got[1] - want[1]).abs()))
                }
                Err(_) => Err((i, j)),
            }
        })
        .collect();

    let mut sup = T::zero();
    let mut sq = T::zero();
    let mut count = 0usize;
    let mut flagged = Vec::new();
    for (idx, res) in results.iter().enumerate() {
        match res {
            Ok(r) => {
                sup = sup.max(*r);
                sq += *r * *r;
                count += 1;
            }
            Err(_) => flagged.push(cells[idx]),
        }
    }
    if count == 0 {
        return Err(Error::Numeric("no verification cell returned".into()));
    }
    let rms = (sq / T::of(count as f64)).sqrt();

    // field-to-map distance ratio
    let mut sup_field = T::zero();
    let mut sup_map = T::zero();
    for j in 0..32 {
        let rho = a + (b - a) * (T::of(j as f64) + T::of(0.5)) / T::of(32.0);
        for i in 0..32 {
            let theta = T::two_pi() * T::of(i as f64) / T::of(32.0);
            for s in 0..16 {
                let theta2 = T::two_pi() * T::of(s as f64) / T::of(16.0);
                sup_field = sup_field.max(field.perturbation_magnitude([theta, theta2, rho]));
            }
            if let (Ok(y), Ok(y0)) = (
                map.apply([theta, rho]),
                analytic_w_image(field, [theta, rho]),
            ) {
                let d = (y[0] - y0[0]).abs().max((y[1] - y0[1]).abs());
                sup_map = sup_map.max(d);
            }
        }
    }
    let ratio = if sup_map > T::zero() {
        sup_field / sup_map
    } else {
        T::zero()
    };
    Ok(SuspensionReport {
        sup_residual: sup,
        rms_residual: rms,
        flagged,
        field_to_map_ratio: ratio,
        grid,
    })
}

fn analytic_w_image<T: Real>(field: &SuspendedField<T>, x: [T; 2]) -> Result<[T; 2]> {
    let w = T::two_pi() * field.curl.f(x[1]) / field.curl.g(x[1]);
    Ok([x[0] + w, x[1]])
}

/// Serialization of the suspended field: profile block plus the
/// perturbation data.
pub fn suspension_json<T: Real>(field: &SuspendedField<T>) -> serde_json::Value {
    serde_json::json!({
        "domain": "s3",
        "kind": "closed-form",
        "f1": field.curl.profile().f1.describe(),
        "f2": field.curl.profile().f2.describe(),
        "perturbation": {
            "eps": field.pert.eps.as_f64(),
            "p": field.resonance_p,
            "q": field.pert.harmonic,
            "c": field.pert.center.as_f64(),
            "bump_radius": field.pert.radius.as_f64(),
            "chi_support": [0.5 * std::f64::consts::PI, 1.5 * std::f64::consts::PI],
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::quad::adaptive_simpson;
    use crate::numerics::rng::uniform01;
    use crate::profile::Profile1D;
    use crate::steady::ShearProfileS3;

    fn example_curl() -> Arc<CurlProfileS3<f64>> {
        let prof = Arc::new(ShearProfileS3::new(
            Profile1D::parse("1 + rho", "rho").unwrap(),
            Profile1D::constant(0.0),
        ));
        Arc::new(prof.curl())
    }

    #[test]
    fn chi_normalized_and_supported() {
        assert_eq!(chi(0.3f64), 0.0);
        assert_eq!(chi(5.0f64), 0.0);
        assert!(chi(std::f64::consts::PI) > 0.0);
        let total = adaptive_simpson(&chi::<f64>, 0.0, std::f64::consts::TAU, 1e-12).unwrap();
        assert!((total - 1.0).abs() < 1e-10, "integral {total}");
        // cumulative endpoints
        assert_eq!(chi_cumulative(0.5f64), 0.0);
        assert_eq!(chi_cumulative(6.0f64), 1.0);
        let mid = chi_cumulative(std::f64::consts::PI);
        assert!((mid - 0.5).abs() < 1e-12);
        // cumulative matches quadrature at an interior point
        let t = adaptive_simpson(&chi::<f64>, 0.0, 2.5, 1e-12).unwrap();
        assert!((chi_cumulative(2.5f64) - t).abs() < 1e-10);
    }

    #[test]
    fn zero_eps_is_reference_field() {
        let curl = example_curl();
        let pert = GeneratingPerturbation::new(0.0, 5, 1.0 / 3.0, 0.1);
        let field = suspend(&curl, &pert, (0.05, 0.95), -2).unwrap();
        for k in 0..100u64 {
            let q = [
                6.28 * uniform01(1, k),
                6.28 * uniform01(2, k),
                0.06 + 0.88 * uniform01(3, k),
            ];
            let v = field.eval(q);
            assert_eq!(v, [curl.f(q[2]), curl.g(q[2]), 0.0]);
        }
    }

    #[test]
    fn equals_reference_outside_supports() {
        let curl = example_curl();
        let pert = GeneratingPerturbation::new(1e-3, 5, 1.0 / 3.0, 0.1);
        let field = suspend(&curl, &pert, (0.05, 0.95), -2).unwrap();
        // outside the radial bump
        for &rho in &[0.1, 0.2, 0.45, 0.7, 0.9] {
            let v = field.eval([1.0, std::f64::consts::PI, rho]);
            assert_eq!(v, [curl.f(rho), curl.g(rho), 0.0]);
        }
        // outside the temporal bump (theta2 near the section)
        for &th2 in &[0.0, 1.0, 5.0, 6.2] {
            let v = field.eval([1.0, th2, 1.0 / 3.0]);
            assert_eq!(v, [curl.f(1.0 / 3.0), curl.g(1.0 / 3.0), 0.0]);
        }
        // inside both supports the perturbation acts
        assert!(field.perturbation_magnitude([0.3, std::f64::consts::PI, 1.0 / 3.0]) > 1e-6);
    }

    #[test]
    fn transversality_floor() {
        let curl = example_curl();
        let pert = GeneratingPerturbation::new(1e-2, 5, 1.0 / 3.0, 0.1);
        let field = suspend(&curl, &pert, (0.05, 0.95), -2).unwrap();
        for k in 0..200u64 {
            let q = [
                6.28 * uniform01(5, k),
                6.28 * uniform01(6, k),
                0.06 + 0.88 * uniform01(7, k),
            ];
            let v = field.eval(q);
            assert!(v[1] >= 2.0, "theta2 speed must stay >= min g");
        }
    }

    #[test]
    fn divergence_vanishes_analytically() {
        let curl = example_curl();
        for &eps in &[1e-4, 1e-3, 1e-2] {
            let pert = GeneratingPerturbation::new(eps, 5, 1.0 / 3.0, 0.1);
            let field = suspend(&curl, &pert, (0.05, 0.95), -2).unwrap();
            let mut worst: f64 = 0.0;
            for k in 0..500u64 {
                let q = [
                    6.28 * uniform01(8, k),
                    0.5 * std::f64::consts::PI + std::f64::consts::PI * uniform01(9, k),
                    1.0 / 3.0 - 0.099 + 0.198 * uniform01(10, k),
                ];
                worst = worst.max(field.divergence(q).abs());
            }
            assert!(worst < 1e-12, "eps={eps}: divergence {worst:e}");
        }
    }

    #[test]
    fn amplitude_gates() {
        let curl = example_curl();
        // bump leaking out of the annulus
        let pert = GeneratingPerturbation::new(1e-3, 5, 0.1, 0.1);
        assert!(matches!(
            suspend(&curl, &pert, (0.05, 0.95), -2),
            Err(Error::AmplitudeTooLarge(_))
        ));
        // eps too large for the contraction
        let pert = GeneratingPerturbation::new(1.0, 8, 0.5, 0.05);
        assert!(matches!(
            suspend(&curl, &pert, (0.05, 0.95), -1),
            Err(Error::AmplitudeTooLarge(_))
        ));
    }

    #[test]
    fn recovery_small_grid() {
        let curl = example_curl();
        let pert = GeneratingPerturbation::new(1e-3, 5, 1.0 / 3.0, 0.1);
        let (map, field) = build_pair(&curl, pert, (0.05, 0.95), -2).unwrap();
        let rep = verify_suspension(
            &field,
            &*map,
            (8, 8),
            &IntegratorOpts::with_tol(1e-10),
        )
        .unwrap();
        assert!(rep.flagged.is_empty());
        assert!(rep.sup_residual < 5e-6, "sup residual {:e}", rep.sup_residual);
    }

    #[test]
    fn zero_eps_recovery_at_integrator_tolerance() {
        let curl = example_curl();
        let pert = GeneratingPerturbation::new(0.0, 5, 1.0 / 3.0, 0.1);
        let (map, field) = build_pair(&curl, pert, (0.05, 0.95), -2).unwrap();
        let rep = verify_suspension(&field, &*map, (6, 6), &IntegratorOpts::with_tol(1e-11))
            .unwrap();
        assert!(rep.sup_residual < 1e-8, "sup {:e}", rep.sup_residual);
    }

    #[test]
    fn serialization_block() {
        let curl = example_curl();
        let pert = GeneratingPerturbation::new(1e-3, 5, 1.0 / 3.0, 0.1);
        let field = suspend(&curl, &pert, (0.05, 0.95), -2).unwrap();
        let v = suspension_json(&field);
        assert_eq!(v["perturbation"]["q"], 5);
        assert_eq!(v["perturbation"]["p"], -2);
        assert!((v["perturbation"]["eps"].as_f64().unwrap() - 1e-3).abs() < 1e-18);
        assert_eq!(v["f1"], "1 + rho");
    }
}
