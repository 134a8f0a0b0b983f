//! The nine Cayley-Klein planes `S^2_[k1],k2` and their isometry groups.
//!
//! Points are handled in three charts:
//!
//! * ambient (Weierstrass) coordinates `(x0, x1, x2)` on the quadric
//!   `x0^2 + k1 x1^2 + k1 k2 x2^2 = 1`,
//! * geodesic parallel coordinates `(x, y)`, obtained as `exp(x P1) exp(y P2) O`,
//! * geodesic polar coordinates `(r, phi)`, obtained as `exp(phi J12) exp(r P1) O`,
//!
//! where `O = (1, 0, 0)` is the origin.

use std::fmt;
use std::ops::Mul;
use std::str::FromStr;

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kappa::{self, ck, sk, vk, KappaError};

/// Tolerance on the quadric constraint for a valid [`AmbientPoint`].
pub const CONSTRAINT_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum SpaceError {
    #[error("ambient point ({x0}, {x1}, {x2}) is not on the sheet containing the origin")]
    OutOfComponent { x0: f64, x1: f64, x2: f64 },
    #[error("points are off-manifold for this signature: versine separation {separation:e}")]
    OffManifold { separation: f64 },
    #[error(transparent)]
    Kappa(#[from] KappaError),
}

/// Contraction parameters: `kappa1` is the Gaussian curvature, `kappa2` fixes
/// the signature `diag(+1, kappa2)` of the metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KappaPair {
    pub kappa1: f64,
    pub kappa2: f64,
}

impl KappaPair {
    pub const fn new(kappa1: f64, kappa2: f64) -> Self {
        Self { kappa1, kappa2 }
    }

    /// `kappa1 * kappa2`, the label of the functions of `y`.
    pub fn k12(&self) -> f64 {
        self.kappa1 * self.kappa2
    }

    /// `kappa1^2 * kappa2`, the label of the area functions.
    pub fn k1_sq_k2(&self) -> f64 {
        self.kappa1 * self.kappa1 * self.kappa2
    }

    /// The bilinear form `I_k = diag(1, k1, k1 k2)`.
    pub fn metric_form(&self) -> Matrix3<f64> {
        Matrix3::from_diagonal(&nalgebra::Vector3::new(1.0, self.kappa1, self.k12()))
    }

    pub fn canonical(&self) -> Option<CanonicalSpace> {
        CanonicalSpace::ALL
            .into_iter()
            .find(|s| s.kappa() == *self)
    }
}

impl fmt::Display for KappaPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.kappa1, self.kappa2)
    }
}

/// The nine spaces with normalized parameters `kappa_a in {+1, 0, -1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CanonicalSpace {
    Sphere,
    Euclidean,
    Hyperbolic,
    OscillatingNewtonHooke,
    Galilean,
    ExpandingNewtonHooke,
    AntiDeSitter,
    Minkowski,
    DeSitter,
}

impl CanonicalSpace {
    /// Row-major order: Riemannian, Newtonian, Lorentzian; curvature +, 0, -.
    pub const ALL: [CanonicalSpace; 9] = [
        CanonicalSpace::Sphere,
        CanonicalSpace::Euclidean,
        CanonicalSpace::Hyperbolic,
        CanonicalSpace::OscillatingNewtonHooke,
        CanonicalSpace::Galilean,
        CanonicalSpace::ExpandingNewtonHooke,
        CanonicalSpace::AntiDeSitter,
        CanonicalSpace::Minkowski,
        CanonicalSpace::DeSitter,
    ];

    pub fn kappa(self) -> KappaPair {
        use CanonicalSpace::*;
        let (k1, k2) = match self {
            Sphere => (1.0, 1.0),
            Euclidean => (0.0, 1.0),
            Hyperbolic => (-1.0, 1.0),
            OscillatingNewtonHooke => (1.0, 0.0),
            Galilean => (0.0, 0.0),
            ExpandingNewtonHooke => (-1.0, 0.0),
            AntiDeSitter => (1.0, -1.0),
            Minkowski => (0.0, -1.0),
            DeSitter => (-1.0, -1.0),
        };
        KappaPair::new(k1, k2)
    }

    pub fn name(self) -> &'static str {
        use CanonicalSpace::*;
        match self {
            Sphere => "sphere",
            Euclidean => "euclidean",
            Hyperbolic => "hyperbolic",
            OscillatingNewtonHooke => "oscillating-newton-hooke",
            Galilean => "galilean",
            ExpandingNewtonHooke => "expanding-newton-hooke",
            AntiDeSitter => "anti-de-sitter",
            Minkowski => "minkowski",
            DeSitter => "de-sitter",
        }
    }

    pub fn is_newtonian(self) -> bool {
        self.kappa().kappa2 == 0.0
    }
}

impl fmt::Display for CanonicalSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CanonicalSpace {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CanonicalSpace::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown space `{s}`"))
    }
}

/// A point in geodesic parallel coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParallelPoint {
    pub x: f64,
    pub y: f64,
}

impl ParallelPoint {
    pub const ORIGIN: ParallelPoint = ParallelPoint { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

/// A point in ambient (Weierstrass) coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmbientPoint {
    pub x0: f64,
    pub x1: f64,
    pub x2: f64,
}

impl AmbientPoint {
    pub const ORIGIN: AmbientPoint = AmbientPoint {
        x0: 1.0,
        x1: 0.0,
        x2: 0.0,
    };

    pub const fn new(x0: f64, x1: f64, x2: f64) -> Self {
        Self { x0, x1, x2 }
    }

    /// `x0^2 + k1 x1^2 + k1 k2 x2^2 - 1`.
    pub fn constraint_residual(&self, kp: KappaPair) -> f64 {
        self.x0 * self.x0 + kp.kappa1 * self.x1 * self.x1 + kp.k12() * self.x2 * self.x2 - 1.0
    }

    fn as_vector(&self) -> nalgebra::Vector3<f64> {
        nalgebra::Vector3::new(self.x0, self.x1, self.x2)
    }
}

/// A point in geodesic polar coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarPoint {
    pub r: f64,
    pub phi: f64,
}

pub fn parallel_to_ambient(kp: KappaPair, p: ParallelPoint) -> AmbientPoint {
    let k12 = kp.k12();
    let cy = ck(k12, p.y);
    AmbientPoint {
        x0: ck(kp.kappa1, p.x) * cy,
        x1: sk(kp.kappa1, p.x) * cy,
        x2: sk(k12, p.y),
    }
}

/// Inverse of [`parallel_to_ambient`], normalized into the chart domain.
///
/// On spaces where `Ck_{k1 k2}(y)` is always positive the point must have
/// `x0 > 0`; on de Sitter-type spaces the sign of `x0` picks the `y` preimage.
pub fn ambient_to_parallel(kp: KappaPair, a: AmbientPoint) -> Result<ParallelPoint, SpaceError> {
    let k1 = kp.kappa1;
    let k12 = kp.k12();
    let out = || SpaceError::OutOfComponent {
        x0: a.x0,
        x1: a.x1,
        x2: a.x2,
    };

    let mut y = kappa::sk_inv(k12, a.x2)?;
    if k12 > 0.0 && k1 < 0.0 && a.x0 < 0.0 {
        y = kappa::wrap_periodic(k12, std::f64::consts::PI / k12.sqrt() - y);
    }
    let cy = ck(k12, y);

    let x = if k1 > 0.0 {
        if cy.abs() < 1e-12 {
            // pole of the chart: every x names the same point
            0.0
        } else {
            let r = k1.sqrt();
            (r * a.x1 / cy).atan2(a.x0 / cy) / r
        }
    } else {
        if a.x0 / cy <= 0.0 {
            return Err(out());
        }
        if k1 == 0.0 {
            a.x1 / cy
        } else {
            let r = (-k1).sqrt();
            (r * a.x1 / cy).asinh() / r
        }
    };
    Ok(normalize(kp, ParallelPoint { x, y }))
}

/// Brings a chart point into the domain of its space: `x` into
/// `(-pi/sqrt k1, pi/sqrt k1]` for `k1 > 0`, `y` into the analogous interval
/// for `k1 k2 > 0` (and into `(-pi/2, pi/2]/sqrt(k1 k2)` on sphere-type spaces).
pub fn normalize(kp: KappaPair, p: ParallelPoint) -> ParallelPoint {
    let k1 = kp.kappa1;
    let k12 = kp.k12();
    let mut x = p.x;
    let mut y = kappa::wrap_periodic(k12, p.y);
    if k12 > 0.0 && k1 > 0.0 {
        let quarter = 0.5 * std::f64::consts::PI / k12.sqrt();
        if y.abs() > quarter {
            // (x + pi/sqrt k1, pi/sqrt k12 - y) is the same point
            y = y.signum() * 2.0 * quarter - y;
            x += std::f64::consts::PI / k1.sqrt();
        }
    }
    ParallelPoint {
        x: kappa::wrap_periodic(k1, x),
        y,
    }
}

pub fn polar_to_ambient(kp: KappaPair, q: PolarPoint) -> AmbientPoint {
    let sr = sk(kp.kappa1, q.r);
    AmbientPoint {
        x0: ck(kp.kappa1, q.r),
        x1: sr * ck(kp.kappa2, q.phi),
        x2: sr * sk(kp.kappa2, q.phi),
    }
}

pub fn polar_to_parallel(kp: KappaPair, q: PolarPoint) -> Result<ParallelPoint, SpaceError> {
    ambient_to_parallel(kp, polar_to_ambient(kp, q))
}

/// Coefficients of `ds^2 = gxx dx^2 + gyy dy^2`; `gyy = 0` on Newtonian spaces.
pub fn metric_coefficients(kp: KappaPair, p: ParallelPoint) -> (f64, f64) {
    let c = ck(kp.k12(), p.y);
    (c * c, kp.kappa2)
}

/// `Vk_{k1}(s)` for the geodesic distance `s` between two points, in the
/// versine form that needs no limit at `k1 = 0`.
pub fn versine_separation(kp: KappaPair, p1: ParallelPoint, p2: ParallelPoint) -> f64 {
    let k12 = kp.k12();
    vk(kp.kappa1, p1.x - p2.x) * ck(k12, p1.y) * ck(k12, p2.y) + kp.kappa2 * vk(k12, p1.y - p2.y)
}

/// Minimal non-negative geodesic distance.
///
/// Fails with [`SpaceError::OffManifold`] when no real distance exists, e.g.
/// for space-like separated pairs on Lorentzian spaces.
pub fn geodesic_distance(kp: KappaPair, p1: ParallelPoint, p2: ParallelPoint) -> Result<f64, SpaceError> {
    let v = versine_separation(kp, p1, p2);
    kappa::vk_inv(kp.kappa1, v).map_err(|_| SpaceError::OffManifold { separation: v })
}

/// Which one-parameter subgroup to exponentiate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IsometryGenerator {
    P1,
    P2,
    J12,
}

/// The matrix realization of the generators `P1, P2, J12`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorMatrices {
    pub p1: Matrix3<f64>,
    pub p2: Matrix3<f64>,
    pub j12: Matrix3<f64>,
}

fn unit(i: usize, j: usize) -> Matrix3<f64> {
    let mut m = Matrix3::zeros();
    m[(i, j)] = 1.0;
    m
}

pub fn generator_matrices(kp: KappaPair) -> GeneratorMatrices {
    GeneratorMatrices {
        p1: unit(1, 0) - kp.kappa1 * unit(0, 1),
        p2: unit(2, 0) - kp.k12() * unit(0, 2),
        j12: unit(2, 1) - kp.kappa2 * unit(1, 2),
    }
}

/// An element of `SO_{k1,k2}(3)` acting linearly on ambient coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupElement(pub Matrix3<f64>);

impl GroupElement {
    pub fn identity() -> Self {
        GroupElement(Matrix3::identity())
    }

    pub fn act(&self, a: AmbientPoint) -> AmbientPoint {
        let v = self.0 * a.as_vector();
        AmbientPoint::new(v[0], v[1], v[2])
    }

    /// Largest entry of `m^T I_k m - I_k`.
    pub fn isometry_residual(&self, kp: KappaPair) -> f64 {
        let form = kp.metric_form();
        (self.0.transpose() * form * self.0 - form).abs().max()
    }
}

impl Mul for GroupElement {
    type Output = GroupElement;

    fn mul(self, rhs: GroupElement) -> GroupElement {
        GroupElement(self.0 * rhs.0)
    }
}

/// Closed form of `exp(param * generator)`.
pub fn subgroup_exp(kp: KappaPair, generator: IsometryGenerator, param: f64) -> GroupElement {
    let (k, i, j) = match generator {
        IsometryGenerator::P1 => (kp.kappa1, 0, 1),
        IsometryGenerator::P2 => (kp.k12(), 0, 2),
        IsometryGenerator::J12 => (kp.kappa2, 1, 2),
    };
    let c = ck(k, param);
    let s = sk(k, param);
    let mut m = Matrix3::identity();
    m[(i, i)] = c;
    m[(j, j)] = c;
    m[(i, j)] = -k * s;
    m[(j, i)] = s;
    GroupElement(m)
}

/// The isometry `exp(x P1) exp(y P2)` carrying the origin to `p`.
pub fn translation_to(kp: KappaPair, p: ParallelPoint) -> GroupElement {
    subgroup_exp(kp, IsometryGenerator::P1, p.x) * subgroup_exp(kp, IsometryGenerator::P2, p.y)
}

/// The isometry `exp(-y P2) exp(-x P1)` carrying `p` to the origin.
pub fn translation_from(kp: KappaPair, p: ParallelPoint) -> GroupElement {
    subgroup_exp(kp, IsometryGenerator::P2, -p.y) * subgroup_exp(kp, IsometryGenerator::P1, -p.x)
}

/// Applies `g` to a chart point and returns the image in the chart.
pub fn act_on_parallel(kp: KappaPair, g: &GroupElement, p: ParallelPoint) -> Result<ParallelPoint, SpaceError> {
    ambient_to_parallel(kp, g.act(parallel_to_ambient(kp, p)))
}
