//! Charts and reference structures on the 3-sphere and the 3-torus.
//!
//! The sphere minus two linked critical circles is covered by a single product
//! chart `(theta1, theta2, rho)` built from the two commuting unit-Hopf
//! rotations; the chart volume density is the constant `1/2`. The torus uses
//! plain `(x, y, z)` angles with density `1`. Angles are kept unreduced while
//! integrating (winding counts carry knot data) and reduced only for
//! presentation.

use crate::error::{Error, Result};
use crate::profile::Profile1D;
use crate::scalar::{wrap_angle, Real};

/// Default guard half-width around the two critical circles `rho = 0, 1`.
pub const CHART_GUARD: f64 = 1e-6;

/// Which manifold a chart state lives on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Space {
    S3,
    T3,
}

/// Point on the unit sphere in 4-space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AmbientPoint<T> {
    pub x: T,
    pub y: T,
    pub z: T,
    pub xi: T,
}

impl<T: Real> AmbientPoint<T> {
    pub fn new(x: T, y: T, z: T, xi: T) -> Result<Self> {
        let p = Self { x, y, z, xi };
        let err = (p.norm_sq() - T::one()).abs();
        if err > T::of(1e-12) {
            return Err(Error::Numeric(format!(
                "ambient point off the unit sphere by {:e}",
                err.as_f64()
            )));
        }
        Ok(p)
    }

    pub fn norm_sq(&self) -> T {
        self.x * self.x + self.y * self.y + self.z * self.z + self.xi * self.xi
    }

    /// First integral `rho = x^2 + y^2` of both Hopf rotations.
    pub fn rho(&self) -> T {
        self.x * self.x + self.y * self.y
    }
}

/// Chart point of the sphere minus the critical link. Angles may be
/// unreduced; `rho` is strictly inside `(0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChartPointS3<T> {
    pub theta1: T,
    pub theta2: T,
    pub rho: T,
}

impl<T: Real> ChartPointS3<T> {
    pub fn new(theta1: T, theta2: T, rho: T) -> Result<Self> {
        if !(rho > T::zero() && rho < T::one()) {
            return Err(Error::ChartDomain {
                rho: rho.as_f64(),
                lo: 0.0,
                hi: 1.0,
            });
        }
        Ok(Self { theta1, theta2, rho })
    }

    pub fn as_state(&self) -> [T; 3] {
        [self.theta1, self.theta2, self.rho]
    }

    pub fn from_state(q: [T; 3]) -> Self {
        Self {
            theta1: q[0],
            theta2: q[1],
            rho: q[2],
        }
    }

    /// Presentation form: angles reduced to `[0, 2*pi)`.
    pub fn reduced(&self) -> Self {
        Self {
            theta1: wrap_angle(self.theta1),
            theta2: wrap_angle(self.theta2),
            rho: self.rho,
        }
    }
}

/// Chart point of the torus; angles may be unreduced.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChartPointT3<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Real> ChartPointT3<T> {
    pub fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    pub fn as_state(&self) -> [T; 3] {
        [self.x, self.y, self.z]
    }

    pub fn from_state(q: [T; 3]) -> Self {
        Self {
            x: q[0],
            y: q[1],
            z: q[2],
        }
    }

    pub fn reduced(&self) -> Self {
        Self {
            x: wrap_angle(self.x),
            y: wrap_angle(self.y),
            z: wrap_angle(self.z),
        }
    }
}

/// The two commuting unit rotations in chart components: constant vectors at
/// every chart point.
pub struct HopfBasis;

impl HopfBasis {
    /// `u1 = d/dtheta1 - d/dtheta2`.
    pub fn u1<T: Real>() -> [T; 3] {
        [T::one(), -T::one(), T::zero()]
    }

    /// `u2 = d/dtheta1 + d/dtheta2`.
    pub fn u2<T: Real>() -> [T; 3] {
        [T::one(), T::one(), T::zero()]
    }
}

/// Constant chart volume density.
#[derive(Clone, Copy, Debug)]
pub struct VolumeWeight<T> {
    pub density: T,
}

impl<T: Real> VolumeWeight<T> {
    pub fn for_space(space: Space) -> Self {
        match space {
            Space::S3 => Self { density: T::of(0.5) },
            Space::T3 => Self { density: T::one() },
        }
    }
}

/// Total Riemannian volume of the space: `2*pi^2` for the sphere, `8*pi^3`
/// for the torus.
pub fn total_volume<T: Real>(space: Space) -> T {
    match space {
        Space::S3 => T::of(2.0) * T::PI() * T::PI(),
        Space::T3 => T::of(8.0) * T::PI() * T::PI() * T::PI(),
    }
}

/// Chart to ambient: `(sqrt(rho) e^{i theta1}, sqrt(1-rho) e^{i theta2})`.
pub fn embed<T: Real>(p: &ChartPointS3<T>) -> Result<AmbientPoint<T>> {
    if !(p.rho > T::zero() && p.rho < T::one()) {
        return Err(Error::ChartDomain {
            rho: p.rho.as_f64(),
            lo: 0.0,
            hi: 1.0,
        });
    }
    let r1 = p.rho.sqrt();
    let r2 = (T::one() - p.rho).sqrt();
    Ok(AmbientPoint {
        x: r1 * p.theta1.cos(),
        y: r1 * p.theta1.sin(),
        z: r2 * p.theta2.cos(),
        xi: r2 * p.theta2.sin(),
    })
}

/// Ambient to chart, refusing points within `guard` of the critical link.
pub fn chart_of<T: Real>(a: &AmbientPoint<T>, guard: T) -> Result<ChartPointS3<T>> {
    let rho = a.rho();
    if rho <= guard || rho >= T::one() - guard {
        return Err(Error::NearLink {
            rho: rho.as_f64(),
            guard: guard.as_f64(),
        });
    }
    Ok(ChartPointS3 {
        theta1: wrap_angle(a.y.atan2(a.x)),
        theta2: wrap_angle(a.xi.atan2(a.z)),
        rho,
    })
}

/// Evaluation interface for divergence-free fields in chart coordinates.
/// States are `[theta1, theta2, rho]` on the sphere and `[x, y, z]` on the
/// torus.
pub trait ChartField<T: Real>: Send + Sync {
    fn space(&self) -> Space;
    fn eval(&self, q: [T; 3]) -> [T; 3];
}

impl<T: Real, F: ChartField<T> + ?Sized> ChartField<T> for &F {
    fn space(&self) -> Space {
        (**self).space()
    }
    fn eval(&self, q: [T; 3]) -> [T; 3] {
        (**self).eval(q)
    }
}

impl<T: Real, F: ChartField<T> + ?Sized> ChartField<T> for std::sync::Arc<F> {
    fn space(&self) -> Space {
        (**self).space()
    }
    fn eval(&self, q: [T; 3]) -> [T; 3] {
        (**self).eval(q)
    }
}

/// Explicit volume-preserving diffeomorphisms used by the transport checks.
pub enum VolumePreservingDiffeo<T> {
    /// Flow of one of the unit Hopf rotations for a fixed time: a chart
    /// translation `(theta1 + t, theta2 -/+ t, rho)`.
    S3Rotation { along_u1: bool, time: T },
    /// `(x, y, z) -> (x + a(z), y + b(z), z)`; the Jacobian is unipotent
    /// triangular, so the determinant is identically 1.
    T3Shear { a: Profile1D<T>, b: Profile1D<T> },
}

impl<T: Real> VolumePreservingDiffeo<T> {
    pub fn space(&self) -> Space {
        match self {
            VolumePreservingDiffeo::S3Rotation { .. } => Space::S3,
            VolumePreservingDiffeo::T3Shear { .. } => Space::T3,
        }
    }

    pub fn apply(&self, q: [T; 3]) -> [T; 3] {
        match self {
            VolumePreservingDiffeo::S3Rotation { along_u1, time } => {
                let s = if *along_u1 { -T::one() } else { T::one() };
                [q[0] + *time, q[1] + s * *time, q[2]]
            }
            VolumePreservingDiffeo::T3Shear { a, b } => {
                [q[0] + a.eval(q[2]), q[1] + b.eval(q[2]), q[2]]
            }
        }
    }

    pub fn inverse_apply(&self, q: [T; 3]) -> [T; 3] {
        match self {
            VolumePreservingDiffeo::S3Rotation { along_u1, time } => {
                let s = if *along_u1 { -T::one() } else { T::one() };
                [q[0] - *time, q[1] - s * *time, q[2]]
            }
            VolumePreservingDiffeo::T3Shear { a, b } => {
                [q[0] - a.eval(q[2]), q[1] - b.eval(q[2]), q[2]]
            }
        }
    }

    /// Jacobian matrix of `apply` at `q`.
    pub fn jacobian(&self, q: [T; 3]) -> [[T; 3]; 3] {
        let one = T::one();
        let zero = T::zero();
        match self {
            VolumePreservingDiffeo::S3Rotation { .. } => {
                [[one, zero, zero], [zero, one, zero], [zero, zero, one]]
            }
            VolumePreservingDiffeo::T3Shear { a, b } => [
                [one, zero, a.d1(q[2])],
                [zero, one, b.d1(q[2])],
                [zero, zero, one],
            ],
        }
    }

    /// Pushforward of a tangent vector: `DPhi(q) v`.
    pub fn pushforward_vector(&self, q: [T; 3], v: [T; 3]) -> [T; 3] {
        let j = self.jacobian(q);
        let mut out = [T::zero(); 3];
        for (i, row) in j.iter().enumerate() {
            out[i] = row[0] * v[0] + row[1] * v[1] + row[2] * v[2];
        }
        out
    }

    pub fn jacobian_det(&self, q: [T; 3]) -> T {
        let j = self.jacobian(q);
        j[0][0] * (j[1][1] * j[2][2] - j[1][2] * j[2][1])
            - j[0][1] * (j[1][0] * j[2][2] - j[1][2] * j[2][0])
            + j[0][2] * (j[1][0] * j[2][1] - j[1][1] * j[2][0])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::rng::uniform01;

    #[test]
    fn embed_axis_points() {
        // (0, 0, 0.5) -> (sqrt(.5), 0, sqrt(.5), 0)
        let p = ChartPointS3::new(0.0, 0.0, 0.5).unwrap();
        let a = embed(&p).unwrap();
        let s = 0.5f64.sqrt();
        assert!((a.x - s).abs() < 1e-15);
        assert!(a.y.abs() < 1e-15);
        assert!((a.z - s).abs() < 1e-15);
        assert!(a.xi.abs() < 1e-15);

        // (pi/2, 0, 0.25) -> (0, 0.5, sqrt(0.75), 0)
        let p = ChartPointS3::new(std::f64::consts::FRAC_PI_2, 0.0, 0.25).unwrap();
        let a = embed(&p).unwrap();
        assert!(a.x.abs() < 1e-15);
        assert!((a.y - 0.5).abs() < 1e-15);
        assert!((a.z - 0.75f64.sqrt()).abs() < 1e-15);
        assert!(a.xi.abs() < 1e-15);
    }

    #[test]
    fn embed_rejects_boundary() {
        assert!(ChartPointS3::new(0.0, 0.0, 0.0).is_err());
        assert!(ChartPointS3::new(0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn chart_of_known_points() {
        let s = 0.5f64.sqrt();
        let a = AmbientPoint::new(s, 0.0, s, 0.0).unwrap();
        let p = chart_of(&a, 1e-6).unwrap();
        assert!(p.theta1.abs() < 1e-15 && p.theta2.abs() < 1e-15);
        assert!((p.rho - 0.5).abs() < 1e-15);

        let a = AmbientPoint::new(0.0, 0.5, 0.75f64.sqrt(), 0.0).unwrap();
        let p = chart_of(&a, 1e-6).unwrap();
        assert!((p.theta1 - std::f64::consts::FRAC_PI_2).abs() < 1e-14);
        assert!((p.rho - 0.25).abs() < 1e-15);
    }

    #[test]
    fn chart_of_rejects_link() {
        let a = AmbientPoint::new(1.0, 0.0, 0.0, 0.0).unwrap();
        assert!(matches!(chart_of(&a, 1e-6), Err(Error::NearLink { .. })));
    }

    #[test]
    fn roundtrip_random_points() {
        for k in 0..10_000u64 {
            let theta1 = std::f64::consts::TAU * uniform01(1, k);
            let theta2 = std::f64::consts::TAU * uniform01(2, k);
            let rho = 1e-5 + (1.0 - 2e-5) * uniform01(3, k);
            let p = ChartPointS3::new(theta1, theta2, rho).unwrap();
            let a = embed(&p).unwrap();
            assert!((a.norm_sq() - 1.0).abs() < 1e-12);
            assert!((a.rho() - rho).abs() < 1e-14);
            let back = chart_of(&a, 1e-6).unwrap();
            let b = embed(&back).unwrap();
            let dist = ((a.x - b.x).powi(2)
                + (a.y - b.y).powi(2)
                + (a.z - b.z).powi(2)
                + (a.xi - b.xi).powi(2))
            .sqrt();
            assert!(dist < 1e-10, "k={k} dist={dist}");
        }
    }

    #[test]
    fn s3_rotation_time_zero_is_identity() {
        let d = VolumePreservingDiffeo::S3Rotation {
            along_u1: true,
            time: 0.0,
        };
        let q = [0.3, 1.1, 0.6];
        assert_eq!(d.apply(q), q);
    }

    #[test]
    fn t3_shear_example() {
        // a(z) = sin z at (0, 0, pi/2) -> (1, 0, pi/2)
        let d = VolumePreservingDiffeo::T3Shear {
            a: Profile1D::parse("sin(z)", "z").unwrap(),
            b: Profile1D::constant(0.0),
        };
        let q = d.apply([0.0, 0.0, std::f64::consts::FRAC_PI_2]);
        assert!((q[0] - 1.0).abs() < 1e-15);
        assert!(q[1].abs() < 1e-15);
        assert!((q[2] - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn diffeo_jacobian_det_one_and_inverse() {
        let shear = VolumePreservingDiffeo::T3Shear {
            a: Profile1D::parse("sin(z)", "z").unwrap(),
            b: Profile1D::parse("0.5*cos(2*z)", "z").unwrap(),
        };
        let rot = VolumePreservingDiffeo::S3Rotation {
            along_u1: false,
            time: 0.37,
        };
        for k in 0..200u64 {
            let q = [
                std::f64::consts::TAU * uniform01(10, k),
                std::f64::consts::TAU * uniform01(11, k),
                0.05 + 0.9 * uniform01(12, k),
            ];
            for d in [&shear, &rot] {
                assert!((d.jacobian_det(q) - 1.0).abs() < 1e-10);
                let r = d.inverse_apply(d.apply(q));
                for i in 0..3 {
                    assert!((r[i] - q[i]).abs() < 1e-10);
                }
            }
        }
    }
}
