//! Experiment configuration: schema, validation, canonical hashing.

use eulab_core::geometry::Space;
use eulab_core::steady::{shear_from_json, AnyShear};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::AppError;

fn d_schema() -> u32 {
    1
}
fn d_annulus() -> [f64; 2] {
    [0.05, 0.95]
}
fn d_eps() -> f64 {
    0.0
}
fn d_bump() -> f64 {
    0.1
}
fn d_seeds() -> usize {
    8
}
fn d_iters() -> usize {
    200
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Resonance {
    pub p: i64,
    pub q: u32,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub n_theta: usize,
    pub n_rho: usize,
    pub orbit_iters: usize,
    pub jitter: bool,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            n_theta: 96,
            n_rho: 96,
            orbit_iters: 4000,
            jitter: true,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TolerancesConfig {
    pub integrator: f64,
    pub rotation_confidence: f64,
    pub curve_fit: f64,
    /// Requested certified twist lower bound (optional).
    pub twist_tau: Option<f64>,
}

impl Default for TolerancesConfig {
    fn default() -> Self {
        Self {
            integrator: 1e-10,
            rotation_confidence: 1e-7,
            curve_fit: 1e-5,
            twist_tau: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "d_schema")]
    pub schema_version: u32,
    pub space: String,
    pub profile: serde_json::Value,
    #[serde(default = "d_annulus")]
    pub annulus: [f64; 2],
    #[serde(default)]
    pub resonance: Option<Resonance>,
    #[serde(default = "d_eps")]
    pub eps: f64,
    #[serde(default = "d_bump")]
    pub bump_radius: f64,
    #[serde(default = "d_seeds")]
    pub seeds: usize,
    #[serde(default = "d_iters")]
    pub iters: usize,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub tolerances: TolerancesConfig,
    #[serde(default)]
    pub rng_seed: u64,
}

/// Parsed and validated configuration.
pub struct Validated {
    pub cfg: ExperimentConfig,
    pub space: Space,
    pub shear: AnyShear<f64>,
    pub hash: String,
}

pub fn load(path: &std::path::Path) -> Result<Validated, AppError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| AppError::validation("config/read", format!("{}: {e}", path.display())))?;
    let cfg: ExperimentConfig = serde_json::from_str(&text)
        .map_err(|e| AppError::validation("config/parse", e.to_string()))?;
    validate(cfg)
}

pub fn validate(mut cfg: ExperimentConfig) -> Result<Validated, AppError> {
    let bad = |code: &str, msg: String| Err(AppError::validation(code, msg));
    if cfg.schema_version != 1 {
        return bad(
            "config/schema",
            format!("unsupported schema_version {}", cfg.schema_version),
        );
    }
    let space = match cfg.space.as_str() {
        "s3" => Space::S3,
        "t3" => Space::T3,
        other => return bad("config/space", format!("space must be s3 or t3, got {other}")),
    };
    // the profile block may omit "domain"; default it from the space
    if cfg.profile.get("domain").is_none() {
        if let Some(obj) = cfg.profile.as_object_mut() {
            obj.insert("domain".into(), serde_json::json!(cfg.space));
        }
    }
    if cfg
        .profile
        .get("domain")
        .and_then(|d| d.as_str())
        .map(|d| d != cfg.space)
        .unwrap_or(true)
    {
        return bad(
            "config/profile",
            "profile domain must match the configured space".into(),
        );
    }
    let [a, b] = cfg.annulus;
    let (lo, hi) = match space {
        Space::S3 => (0.0, 1.0),
        Space::T3 => (0.0, std::f64::consts::TAU),
    };
    if !(a > lo && b < hi + 1e-12 && a < b) {
        return bad(
            "config/annulus",
            format!("annulus [{a}, {b}] must satisfy {lo} < a < b < {hi:.6}"),
        );
    }
    if let Some(r) = cfg.resonance {
        if r.q == 0 || eulab_core::twistmaps::gcd(r.p.unsigned_abs(), r.q as u64) != 1 {
            return bad(
                "config/resonance",
                format!("resonance p/q = {}/{} must be coprime with q >= 1", r.p, r.q),
            );
        }
    }
    if cfg.eps < 0.0 {
        return bad("config/eps", format!("eps must be >= 0, got {}", cfg.eps));
    }
    if cfg.bump_radius <= 0.0 {
        return bad(
            "config/bump",
            format!("bump_radius must be > 0, got {}", cfg.bump_radius),
        );
    }
    let t = &cfg.tolerances;
    if t.integrator <= 0.0 || t.rotation_confidence <= 0.0 || t.curve_fit <= 0.0 {
        return bad("config/tolerances", "all tolerances must be positive".into());
    }
    if let Some(tau) = t.twist_tau {
        if tau <= 0.0 {
            return bad("config/tolerances", "twist_tau must be positive".into());
        }
    }
    if cfg.grid.n_theta == 0 || cfg.grid.n_rho == 0 || cfg.grid.orbit_iters < 64 {
        return bad(
            "config/grid",
            "grid dimensions must be positive and orbit_iters >= 64".into(),
        );
    }
    if cfg.seeds == 0 || cfg.iters == 0 {
        return bad("config/seeds", "seeds and iters must be positive".into());
    }
    let shear = shear_from_json::<f64>(&cfg.profile)
        .map_err(|e| AppError::validation("config/profile", e.to_string()))?;
    let hash = config_hash(&cfg);
    Ok(Validated {
        cfg,
        space,
        shear,
        hash,
    })
}

/// SHA-256 over the canonical serialization of the parsed configuration.
pub fn config_hash(cfg: &ExperimentConfig) -> String {
    let canon = serde_json::to_string(cfg).expect("config serializes");
    let mut h = Sha256::new();
    h.update(canon.as_bytes());
    hex::encode(h.finalize())
}
