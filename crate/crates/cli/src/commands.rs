//! Subcommand implementations. Every artifact embeds the configuration hash;
//! tables are CSV by default, reports are JSON.

use crate::config::Validated;
use crate::{AppError, Common};
use eulab_core::dynamics::{IntegratorOpts, SectionSpec};
use eulab_core::geometry::{total_volume, ChartField, Space};
use eulab_core::kam::{
    kappa_estimate, stability_probe, ClassifyOrbitOpts, GridSpec, IsotopyClass, KappaEstimate,
    KappaInput, StabilityEvidence, StabilityProbeOpts,
};
use eulab_core::numerics::rng::uniform01;
use eulab_core::steady::{
    bernoulli_identity_residual_s3, bernoulli_identity_residual_t3, check_nondegenerate_s3,
    check_nondegenerate_t3, AnyShear, NondegeneracyOpts, NondegeneracyReport,
};
use eulab_core::suspension::{build_pair, suspension_json, verify_suspension, SuspensionReport};
use eulab_core::twistmaps::{
    analytic_return_map, analytic_return_map_t3, classify, find_periodic, find_resonance, perturb,
    rotation_number, AnnulusMap, ClassifyOpts, FixedPointClass, GeneratingPerturbation,
    NewtonOpts, PeriodicOrbit, StabilityVerdict, TwistFitOpts, TwistMap,
};
use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;

// ---------------------------------------------------------------------------
// shared plumbing

fn write_file(common: &Common, name: &str, bytes: &[u8]) -> Result<PathBuf, AppError> {
    let dir = common.out_dir();
    std::fs::create_dir_all(&dir)
        .map_err(|e| AppError::numeric("io/out-dir", format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    std::fs::File::create(&path)
        .and_then(|mut f| f.write_all(bytes))
        .map_err(|e| AppError::numeric("io/write", format!("{}: {e}", path.display())))?;
    println!("wrote {}", path.display());
    Ok(path)
}

fn write_json(common: &Common, name: &str, value: &serde_json::Value) -> Result<PathBuf, AppError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| AppError::numeric("io/json", e.to_string()))?;
    text.push('\n');
    write_file(common, name, text.as_bytes())
}

/// The analytic section map of the configured flow, the axis/direction the
/// section uses, and a description string.
struct BaseMap {
    map: Arc<TwistMap<f64>>,
    section: SectionSpec<f64>,
    label: String,
}

fn base_map(v: &Validated) -> Result<BaseMap, AppError> {
    let (a, b) = (v.cfg.annulus[0], v.cfg.annulus[1]);
    match &v.shear {
        AnyShear::S3(prof) => {
            let curl = Arc::new(prof.curl());
            for dir in [1i8, -1] {
                if let Ok(m) = analytic_return_map(&curl, (a, b), dir) {
                    return Ok(BaseMap {
                        map: Arc::new(m),
                        section: SectionSpec::s3_theta2(dir),
                        label: format!("s3 theta2-section, direction {dir}"),
                    });
                }
            }
            Err(AppError::numeric(
                "numeric/section",
                "no transverse theta2 section on the annulus (g changes sign); \
                 choose a different annulus"
                    .into(),
            ))
        }
        AnyShear::T3(prof) => {
            for (axis, dir) in [(0usize, 1i8), (0, -1), (1, 1), (1, -1)] {
                if let Ok(m) = analytic_return_map_t3(prof, axis, (a, b), dir) {
                    let section = if axis == 0 {
                        SectionSpec::t3_x(dir)
                    } else {
                        SectionSpec::t3_y(dir)
                    };
                    return Ok(BaseMap {
                        map: Arc::new(m),
                        section,
                        label: format!("t3 axis-{axis} section, direction {dir}"),
                    });
                }
            }
            Err(AppError::numeric(
                "numeric/section",
                "no transverse section on the z-annulus (both curl components vanish there)".into(),
            ))
        }
    }
}

fn resonant_circle(v: &Validated, base: &BaseMap) -> Result<(i64, u32, f64), AppError> {
    let res = v.cfg.resonance.ok_or_else(|| {
        AppError::validation("config/resonance", "this command requires a resonance block".into())
    })?;
    let (a, b) = (v.cfg.annulus[0], v.cfg.annulus[1]);
    let m = base.map.clone();
    let roots = find_resonance(&move |r| m.w(r), (a, b), res.p, res.q)?;
    let c = *roots.first().ok_or_else(|| {
        AppError::numeric(
            "numeric/no-resonance",
            format!("W(c) = 2 pi {}/{} has no root in ({a}, {b})", res.p, res.q),
        )
    })?;
    Ok((res.p, res.q, c))
}

fn perturbed_map(
    v: &Validated,
    base: &BaseMap,
    c: f64,
    q: u32,
) -> Result<Arc<dyn AnnulusMap<f64>>, AppError> {
    let pert = GeneratingPerturbation::new(v.cfg.eps, q, c, v.cfg.bump_radius);
    let base_dyn: Arc<dyn AnnulusMap<f64>> = base.map.clone();
    Ok(perturb(base_dyn, pert)?)
}

fn classify_opts(v: &Validated) -> ClassifyOrbitOpts<f64> {
    ClassifyOrbitOpts {
        n_iter: v.cfg.grid.orbit_iters,
        tol_rot: v.cfg.tolerances.rotation_confidence,
        tol_fit: v.cfg.tolerances.curve_fit,
        ..ClassifyOrbitOpts::default()
    }
}

fn verdict_str(v: StabilityVerdict) -> &'static str {
    match v {
        StabilityVerdict::EllipticNondegenerate => "elliptic-nondegenerate",
        StabilityVerdict::EllipticResonant => "elliptic-resonant",
        StabilityVerdict::EllipticDegenerateTwist => "elliptic-degenerate-twist",
        StabilityVerdict::EllipticUnresolved => "elliptic-unresolved",
        StabilityVerdict::Hyperbolic => "hyperbolic",
        StabilityVerdict::Parabolic => "parabolic",
    }
}

fn fixed_point_json(c: &FixedPointClass<f64>) -> serde_json::Value {
    serde_json::json!({
        "point": { "theta1": c.point[0], "rho": c.point[1] },
        "q": c.q,
        "p": c.p,
        "lambda_re": c.lambda.0,
        "lambda_im": c.lambda.1,
        "omega": c.omega,
        "trace": c.trace,
        "det": c.det,
        "resonance_flags": c.resonance_flags,
        "alpha": c.alpha.map(|a| a.0),
        "alpha_sigma": c.alpha.map(|a| a.1),
        "verdict": verdict_str(c.verdict),
    })
}

fn nondegeneracy_json(rep: &NondegeneracyReport<f64>) -> serde_json::Value {
    serde_json::json!({
        "verdict": format!("{:?}", rep.verdict).to_lowercase(),
        "morse_bott_ok": rep.morse_bott_ok,
        "critical_points": rep.critical_points
            .iter()
            .map(|(x, b)| serde_json::json!({ "location": x, "bernoulli": b }))
            .collect::<Vec<_>>(),
        "twist_min": rep.twist_min,
        "tau": rep.tau,
        "omega_tau": rep.omega_tau,
        "twist_zeros": rep.twist_zeros,
    })
}

fn suspension_report_json(rep: &SuspensionReport<f64>) -> serde_json::Value {
    serde_json::json!({
        "sup_residual": rep.sup_residual,
        "rms_residual": rep.rms_residual,
        "flagged_cells": rep.flagged.len(),
        "field_to_map_ratio": rep.field_to_map_ratio,
        "grid": [rep.grid.0, rep.grid.1],
    })
}

fn kappa_with_hash(est: &KappaEstimate<f64>, hash: &str) -> serde_json::Value {
    let mut v = est.to_json();
    v.as_object_mut()
        .unwrap()
        .insert("config_hash".into(), serde_json::json!(hash));
    v
}

// ---------------------------------------------------------------------------
// commands

pub fn flow(v: &Validated, common: &Common) -> Result<(), AppError> {
    let opts = NondegeneracyOpts::default();
    let tau_req = v.cfg.tolerances.twist_tau;
    let (report, residual) = match &v.shear {
        AnyShear::S3(prof) => (
            check_nondegenerate_s3(prof, tau_req, &opts)?,
            bernoulli_identity_residual_s3(prof, 256, v.cfg.rng_seed ^ common.seed)?,
        ),
        AnyShear::T3(prof) => (
            check_nondegenerate_t3(prof, tau_req, &opts)?,
            bernoulli_identity_residual_t3(prof, 256, v.cfg.rng_seed ^ common.seed),
        ),
    };
    let out = serde_json::json!({
        "schema": "flow-report/1",
        "config_hash": v.hash,
        "space": v.cfg.space,
        "nondegeneracy": nondegeneracy_json(&report),
        "bernoulli_identity_residual": residual,
    });
    write_json(common, "flow.json", &out)?;
    Ok(())
}

pub fn poincare(v: &Validated, common: &Common) -> Result<(), AppError> {
    let base = base_map(v)?;
    let (a, b) = (v.cfg.annulus[0], v.cfg.annulus[1]);

    // field-backed when possible: integrable shear curl, or the suspended
    // field when a perturbation is configured on the sphere
    let field: Arc<dyn ChartField<f64>> = match (&v.shear, v.cfg.eps > 0.0, v.cfg.resonance) {
        (AnyShear::S3(prof), true, Some(_)) => {
            let curl = Arc::new(prof.curl());
            let (p, q, c) = resonant_circle(v, &base)?;
            let pert = GeneratingPerturbation::new(v.cfg.eps, q, c, v.cfg.bump_radius);
            Arc::new(eulab_core::suspension::suspend(&curl, &pert, (a, b), p)?)
        }
        (AnyShear::S3(prof), _, _) => {
            let curl = Arc::new(prof.curl());
            Arc::new(curl.as_field())
        }
        (AnyShear::T3(prof), _, _) => Arc::new(eulab_core::steady::ShearCurlT3 {
            prof: prof.clone(),
        }),
    };
    let integ = IntegratorOpts::with_tol(v.cfg.tolerances.integrator);
    let max_transit = 500.0 * std::f64::consts::TAU;
    let (angle_axis, trans_axis) = base.section.annulus_axes();

    let mut rows: Vec<(usize, usize, f64, f64, f64)> = Vec::new();
    for s in 0..v.cfg.seeds {
        let theta0 = std::f64::consts::TAU * uniform01(common.seed ^ v.cfg.rng_seed, s as u64);
        let rho0 = a + (b - a) * uniform01(common.seed ^ v.cfg.rng_seed ^ 0xa5, s as u64);
        let mut q = {
            let mut st = [0.0; 3];
            st[angle_axis] = theta0;
            st[trans_axis] = rho0;
            st
        };
        rows.push((s, 0, q[angle_axis], q[trans_axis], 0.0));
        for it in 1..=v.cfg.iters {
            match eulab_core::dynamics::return_map(&field, &base.section, q, &integ, max_transit) {
                Ok(r) => {
                    q = r.state;
                    rows.push((s, it, q[angle_axis], q[trans_axis], r.transit_time));
                }
                Err(_) => break,
            }
        }
    }
    if common.format == "json" {
        let arr: Vec<serde_json::Value> = rows
            .iter()
            .map(|(s, it, th, rho, t)| {
                serde_json::json!({
                    "seed_id": s, "iter": it, "theta1_unreduced": th,
                    "rho": rho, "transit_time": t,
                })
            })
            .collect();
        let out = serde_json::json!({
            "schema": "poincare/1", "config_hash": v.hash, "rows": arr,
        });
        write_json(common, "poincare.json", &out)?;
    } else {
        let mut text = format!("# config_hash={}\n", v.hash);
        text.push_str("seed_id,iter,theta1_unreduced,rho,transit_time\n");
        for (s, it, th, rho, t) in rows {
            text.push_str(&format!("{s},{it},{th:.17e},{rho:.17e},{t:.17e}\n"));
        }
        write_file(common, "poincare.csv", text.as_bytes())?;
    }
    Ok(())
}

pub fn rotnum(v: &Validated, common: &Common) -> Result<(), AppError> {
    let base = base_map(v)?;
    let (a, b) = (v.cfg.annulus[0], v.cfg.annulus[1]);
    let map: Arc<dyn AnnulusMap<f64>> = match (v.cfg.eps > 0.0, v.cfg.resonance) {
        (true, Some(_)) => {
            let (_, q, c) = resonant_circle(v, &base)?;
            perturbed_map(v, &base, c, q)?
        }
        _ => base.map.clone(),
    };
    let n = v.cfg.grid.n_rho.max(2);
    let iters = v.cfg.grid.orbit_iters;
    let rows: Vec<(f64, f64, f64)> = (0..n)
        .map(|j| {
            let rho = a + (b - a) * (j as f64 + 0.5) / n as f64;
            let est = rotation_number(&*map, [0.0, rho], iters);
            (rho, est.value, est.confidence)
        })
        .collect();
    if common.format == "json" {
        let arr: Vec<serde_json::Value> = rows
            .iter()
            .map(|(rho, v_, c_)| {
                serde_json::json!({ "rho": rho, "rotation_number": v_, "confidence": c_ })
            })
            .collect();
        let out = serde_json::json!({
            "schema": "rotnum/1", "config_hash": v.hash, "rows": arr,
        });
        write_json(common, "rotnum.json", &out)?;
    } else {
        let mut text = format!("# config_hash={}\n", v.hash);
        text.push_str("rho,rotation_number,confidence\n");
        for (rho, val, conf) in rows {
            text.push_str(&format!("{rho:.17e},{val:.17e},{conf:.17e}\n"));
        }
        write_file(common, "rotnum.csv", text.as_bytes())?;
    }
    Ok(())
}

pub fn resonance(v: &Validated, common: &Common) -> Result<(), AppError> {
    let base = base_map(v)?;
    let res = v.cfg.resonance.ok_or_else(|| {
        AppError::validation("config/resonance", "resonance block required".into())
    })?;
    let (a, b) = (v.cfg.annulus[0], v.cfg.annulus[1]);
    let m = base.map.clone();
    let roots = find_resonance(&move |r| m.w(r), (a, b), res.p, res.q)?;
    let out = serde_json::json!({
        "schema": "resonance/1",
        "config_hash": v.hash,
        "p": res.p,
        "q": res.q,
        "section": base.label,
        "roots": roots,
        "no_resonance": roots.is_empty(),
    });
    write_json(common, "resonance.json", &out)?;
    Ok(())
}

fn locate_and_classify(
    v: &Validated,
    base: &BaseMap,
) -> Result<
    (
        i64,
        u32,
        f64,
        Arc<dyn AnnulusMap<f64>>,
        Vec<(PeriodicOrbit<f64>, FixedPointClass<f64>)>,
    ),
    AppError,
> {
    let (p, q, c) = resonant_circle(v, base)?;
    let map = perturbed_map(v, base, c, q)?;
    let found = find_periodic(&*map, q, c, 16 * q as usize, &NewtonOpts::default());
    if found.orbits.is_empty() {
        return Err(AppError::numeric(
            "numeric/periodic-not-found",
            format!("no period-{q} orbit converged near c = {c}"),
        ));
    }
    let copts = ClassifyOpts {
        twist: TwistFitOpts {
            r_max: (v.cfg.bump_radius * 0.04).max(1e-4),
            ..TwistFitOpts::default()
        },
        ..ClassifyOpts::default()
    };
    let mut classified = Vec::new();
    for orbit in &found.orbits {
        let class = classify(&*map, orbit, &copts)?;
        classified.push((orbit.clone(), class));
    }
    Ok((p, q, c, map, classified))
}

pub fn perturb_cmd(v: &Validated, common: &Common) -> Result<(), AppError> {
    let base = base_map(v)?;
    let (p, q, c, _map, classified) = locate_and_classify(v, &base)?;
    let orbits_json: Vec<serde_json::Value> = classified
        .iter()
        .map(|(o, cl)| {
            serde_json::json!({
                "residual": o.residual,
                "mean_rho": o.mean_rho,
                "class": fixed_point_json(cl),
            })
        })
        .collect();
    let out = serde_json::json!({
        "schema": "perturb-report/1",
        "config_hash": v.hash,
        "p": p, "q": q, "c": c,
        "eps": v.cfg.eps,
        "orbit_count": classified.len(),
        "orbits": orbits_json,
    });
    write_json(common, "perturb.json", &out)?;

    let mut text = format!("# config_hash={}\n", v.hash);
    text.push_str("orbit_id,point_index,theta1,rho\n");
    for (i, (o, _)) in classified.iter().enumerate() {
        for (j, pt) in o.points.iter().enumerate() {
            text.push_str(&format!("{i},{j},{:.17e},{:.17e}\n", pt[0], pt[1]));
        }
    }
    write_file(common, "perturb_orbits.csv", text.as_bytes())?;
    Ok(())
}

pub fn suspend_cmd(v: &Validated, common: &Common) -> Result<(), AppError> {
    let prof = match &v.shear {
        AnyShear::S3(p) => p.clone(),
        AnyShear::T3(_) => {
            return Err(AppError::validation(
                "config/space",
                "suspension is defined over the sphere annulus".into(),
            ))
        }
    };
    let base = base_map(v)?;
    let (p, q, c) = resonant_circle(v, &base)?;
    let curl = Arc::new(prof.curl());
    let pert = GeneratingPerturbation::new(v.cfg.eps, q, c, v.cfg.bump_radius);
    let (map, field) = build_pair(&curl, pert, (v.cfg.annulus[0], v.cfg.annulus[1]), p)?;
    let n = v.cfg.grid.n_theta.min(64).max(8);
    let rep = verify_suspension(
        &field,
        &*map,
        (n, n),
        &IntegratorOpts::with_tol(v.cfg.tolerances.integrator),
    )?;
    let out = serde_json::json!({
        "schema": "suspend-report/1",
        "config_hash": v.hash,
        "field": suspension_json(&field),
        "verification": suspension_report_json(&rep),
    });
    write_json(common, "suspend.json", &out)?;
    Ok(())
}

fn kappa_for_map(
    v: &Validated,
    common: &Common,
    map: &dyn AnnulusMap<f64>,
    space: Space,
    seed_salt: u64,
) -> KappaEstimate<f64> {
    let input = match space {
        Space::S3 => KappaInput::s3_map(map),
        Space::T3 => KappaInput::t3_map(map),
    };
    let grid = GridSpec {
        n_theta: v.cfg.grid.n_theta,
        n_rho: v.cfg.grid.n_rho,
        orbit_iters: v.cfg.grid.orbit_iters,
        jitter: v.cfg.grid.jitter,
    };
    kappa_estimate(
        &input,
        grid,
        common.seed ^ v.cfg.rng_seed ^ seed_salt,
        &classify_opts(v),
    )
}

pub fn kappa_cmd(v: &Validated, common: &Common) -> Result<(), AppError> {
    let base = base_map(v)?;
    let map: Arc<dyn AnnulusMap<f64>> = match (v.cfg.eps > 0.0, v.cfg.resonance) {
        (true, Some(_)) => {
            let (_, q, c) = resonant_circle(v, &base)?;
            perturbed_map(v, &base, c, q)?
        }
        _ => base.map.clone(),
    };
    let est = kappa_for_map(v, common, &*map, v.space, 0);
    let out = kappa_with_hash(&est, &v.hash);
    write_json(common, "kappa.json", &out)?;
    Ok(())
}

pub fn nonmixing(v: &Validated, common: &Common) -> Result<(), AppError> {
    let prof = match &v.shear {
        AnyShear::S3(p) => p.clone(),
        AnyShear::T3(_) => {
            return Err(AppError::validation(
                "config/space",
                "the non-mixing pipeline runs on the sphere".into(),
            ))
        }
    };
    if v.cfg.eps <= 0.0 {
        return Err(AppError::validation(
            "config/eps",
            "the non-mixing pipeline needs eps > 0".into(),
        ));
    }
    // 1. nondegeneracy certificate
    let cert = check_nondegenerate_s3(
        &prof,
        v.cfg.tolerances.twist_tau,
        &NondegeneracyOpts::default(),
    )?;
    // 2. resonance
    let base = base_map(v)?;
    let (p, q, c) = resonant_circle(v, &base)?;
    // 3. periodic orbits of the perturbed map
    let (_, _, _, map, classified) = locate_and_classify(v, &base)?;
    let elliptic = classified
        .iter()
        .find(|(_, cl)| {
            matches!(
                cl.verdict,
                StabilityVerdict::EllipticNondegenerate | StabilityVerdict::EllipticDegenerateTwist
            )
        })
        .ok_or_else(|| {
            AppError::numeric(
                "numeric/no-elliptic",
                "no elliptic periodic orbit among the continued ones".into(),
            )
        })?;
    // 4. KAM-stability probe around the elliptic orbit
    let probe = stability_probe(
        &*map,
        &elliptic.0,
        &StabilityProbeOpts {
            eps0: (v.cfg.bump_radius * 8e-2).max(1e-3),
            ..StabilityProbeOpts::default()
        },
    )?;
    // 5. suspension and verification
    let curl = Arc::new(prof.curl());
    let pert = GeneratingPerturbation::new(v.cfg.eps, q, c, v.cfg.bump_radius);
    let (pmap, field) = build_pair(&curl, pert, (v.cfg.annulus[0], v.cfg.annulus[1]), p)?;
    let nver = v.cfg.grid.n_theta.min(48).max(8);
    let srep = verify_suspension(
        &field,
        &*pmap,
        (nver, nver),
        &IntegratorOpts::with_tol(v.cfg.tolerances.integrator),
    )?;
    // 6. measures before and after
    let before = kappa_for_map(v, common, &*base.map, Space::S3, 0x10);
    let after = kappa_for_map(v, common, &*map, Space::S3, 0x20);
    let lambda = after.lambda();
    let total = total_volume::<f64>(Space::S3);
    let kappa0_after = after.fraction_of(IsotopyClass::Unknot) * total;
    let bound_holds = kappa0_after <= total - lambda + 1e-12;

    let out = serde_json::json!({
        "schema": "nonmixing-report/1",
        "config_hash": v.hash,
        "version": env!("CARGO_PKG_VERSION"),
        "nondegeneracy": nondegeneracy_json(&cert),
        "resonance": { "p": p, "q": q, "c": c },
        "eps": v.cfg.eps,
        "elliptic": fixed_point_json(&elliptic.1),
        "stability": {
            "fractions": probe.fractions,
            "verdict": match probe.verdict {
                StabilityEvidence::KamStableEvidence => "kam-stable-evidence",
                StabilityEvidence::Inconclusive => "inconclusive",
            },
        },
        "suspension": suspension_report_json(&srep),
        "kappa_before": kappa_with_hash(&before, &v.hash),
        "kappa_after": kappa_with_hash(&after, &v.hash),
        "lambda": lambda,
        "kappa0_bound": {
            "kappa0_after": kappa0_after,
            "bound": total - lambda,
            "holds": bound_holds,
        },
    });
    write_json(common, "nonmixing.json", &out)?;
    Ok(())
}

pub fn verify(v: &Validated, common: &Common, quick: bool) -> Result<(), AppError> {
    // re-derive the config hash and check every artifact in the out dir
    let dir = common.out_dir();
    let mut checked = 0usize;
    let mut mismatched = Vec::new();
    if dir.is_dir() {
        let mut entries: Vec<PathBuf> = std::fs::read_dir(&dir)
            .map_err(|e| AppError::numeric("io/out-dir", e.to_string()))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .collect();
        entries.sort();
        for path in entries {
            let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("");
            let found_hash = if name.ends_with(".json") {
                std::fs::read_to_string(&path)
                    .ok()
                    .and_then(|t| serde_json::from_str::<serde_json::Value>(&t).ok())
                    .and_then(|j| j.get("config_hash").and_then(|h| h.as_str().map(String::from)))
            } else if name.ends_with(".csv") {
                std::fs::read_to_string(&path).ok().and_then(|t| {
                    t.lines()
                        .next()
                        .and_then(|l| l.strip_prefix("# config_hash="))
                        .map(String::from)
                })
            } else {
                None
            };
            if let Some(h) = found_hash {
                checked += 1;
                if h != v.hash {
                    mismatched.push(name.to_string());
                }
            }
        }
    }
    println!(
        "hash check: {} artifact(s) checked, {} mismatched",
        checked,
        mismatched.len()
    );
    if !mismatched.is_empty() {
        return Err(AppError::numeric(
            "verify/hash-mismatch",
            format!("artifacts from a different config: {}", mismatched.join(", ")),
        ));
    }

    let results = eulab_core::acceptance::run_all(quick);
    let mut all_pass = true;
    for r in &results {
        println!("{}", r.line());
        all_pass &= r.pass;
    }
    if !all_pass {
        return Err(AppError::numeric(
            "verify/acceptance",
            "one or more acceptance criteria failed".into(),
        ));
    }
    Ok(())
}
