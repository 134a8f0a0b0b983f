//! Superposition rule: the general solution from two particular solutions and
//! the side lengths and area of the triangle the three solutions span.
//!
//! Side convention: `s1 = d(q1, q2)`, `s2 = d(q1, q3)`, `s3 = d(q3, q2)`.
//!
//! The rule is evaluated in the frame where `q2` sits at the origin and `q3`
//! at `(x3', y3')`; the result is carried back by the inverse isometry.

use std::f64::consts::PI;

use serde::Serialize;
use thiserror::Error;

use crate::kappa::{self, ck, sk, tk, vk, KappaError};
use crate::space::{
    act_on_parallel, geodesic_distance, normalize, translation_from, translation_to, KappaPair, ParallelPoint,
    SpaceError,
};

/// Below this area a triangle is flagged as degenerate.
pub const DEGENERATE_AREA: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum SuperpositionError {
    #[error("q2 and q3 coincide")]
    CoincidentPoints,
    #[error("no area from side lengths on a Newtonian space; supply it explicitly")]
    MissingArea,
    #[error("sides ({s1}, {s2}, {s3}) do not form a triangle in this signature")]
    NotATriangle { s1: f64, s2: f64, s3: f64 },
    #[error("degenerate Newtonian triangle: a side has zero length")]
    DegenerateNewtonian,
    #[error("no branch value lies in the chart")]
    Inversion,
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Kappa(#[from] KappaError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub const BOTH: [Branch; 2] = [Branch::Plus, Branch::Minus];

    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TriangleInvariants {
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
    pub area: f64,
    pub degenerate: bool,
}

impl TriangleInvariants {
    pub fn half_perimeter(&self) -> f64 {
        0.5 * (self.s1 + self.s2 + self.s3)
    }
}

/// Sides and area of the triangle `q1 q2 q3`.
pub fn triangle_invariants(
    kp: KappaPair,
    q1: ParallelPoint,
    q2: ParallelPoint,
    q3: ParallelPoint,
) -> Result<TriangleInvariants, SuperpositionError> {
    let s1 = geodesic_distance(kp, q1, q2)?;
    let s2 = geodesic_distance(kp, q1, q3)?;
    let s3 = geodesic_distance(kp, q3, q2)?;
    let area = if kp.kappa2 == 0.0 {
        area_newtonian(kp, q1, q2, q3)?
    } else {
        area_lhuillier(kp, s1, s2, s3)?
    };
    Ok(TriangleInvariants {
        s1,
        s2,
        s3,
        area,
        degenerate: area < DEGENERATE_AREA,
    })
}

/// Area from the sides via the generalized L'Huillier relation; `kappa2 != 0`.
pub fn area_lhuillier(kp: KappaPair, s1: f64, s2: f64, s3: f64) -> Result<f64, SuperpositionError> {
    if kp.kappa2 == 0.0 {
        return Err(SuperpositionError::MissingArea);
    }
    let k1 = kp.kappa1;
    let p = 0.5 * (s1 + s2 + s3);
    let rhs = tk(k1, 0.5 * p)? * tk(k1, 0.5 * (p - s1))? * tk(k1, 0.5 * (p - s2))? * tk(k1, 0.5 * (p - s3))?
        / kp.kappa2;
    if rhs < -1e-12 {
        return Err(SuperpositionError::NotATriangle { s1, s2, s3 });
    }
    let t = rhs.max(0.0).sqrt();
    let quarter = kappa::tk_inv(kp.k1_sq_k2(), t).map_err(|_| SuperpositionError::NotATriangle { s1, s2, s3 })?;
    Ok(4.0 * quarter)
}

/// Area on a Newtonian space (`kappa2 = 0`) from the coordinates, through the
/// orthogonal-triangle angles. Evaluated with `q2` moved to the origin.
pub fn area_newtonian(
    kp: KappaPair,
    q1: ParallelPoint,
    q2: ParallelPoint,
    q3: ParallelPoint,
) -> Result<f64, SuperpositionError> {
    let k1 = kp.kappa1;
    let (a1, a3) = (q1.x - q2.x, q3.x - q2.x);
    let (b1, b3) = (q1.y - q2.y * ck(k1, a1), q3.y - q2.y * ck(k1, a3));
    let (sa1, sa3) = (sk(k1, a1), sk(k1, a3));
    if sa1.abs() < 1e-12 || sa3.abs() < 1e-12 || sk(k1, a1 - a3).abs() < 1e-12 {
        return Err(SuperpositionError::DegenerateNewtonian);
    }
    let (s1, s2, s3) = (a1.abs(), (a1 - a3).abs(), a3.abs());
    let half = ck(k1, 0.5 * s1) * ck(k1, 0.5 * s2) * ck(k1, 0.5 * s3);
    let beta = b3 / sa3;
    let alpha = b1 / sa1 - beta;
    Ok((sa1 * sa3 * alpha).abs() / (2.0 * half))
}

/// `(Ck(s2) - Ck(s1) Ck(s3)) / k1` in versine form.
pub fn cosine_factor(k1: f64, s1: f64, s2: f64, s3: f64) -> f64 {
    vk(k1, s1) + vk(k1, s3) - vk(k1, s2) - k1 * vk(k1, s1) * vk(k1, s3)
}

/// `Ck(s1/2) Ck(s2/2) Ck(s3/2) Sk_{k1^2 k2}(A/2)`.
pub fn area_factor(kp: KappaPair, s1: f64, s2: f64, s3: f64, area: f64) -> f64 {
    let k1 = kp.kappa1;
    ck(k1, 0.5 * s1) * ck(k1, 0.5 * s2) * ck(k1, 0.5 * s3) * sk(kp.k1_sq_k2(), 0.5 * area)
}

/// Both branch results; a branch may fail on its own (e.g. leave the chart).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchPair {
    pub plus: Result<ParallelPoint, SuperpositionError>,
    pub minus: Result<ParallelPoint, SuperpositionError>,
}

impl BranchPair {
    pub fn get(&self, b: Branch) -> &Result<ParallelPoint, SuperpositionError> {
        match b {
            Branch::Plus => &self.plus,
            Branch::Minus => &self.minus,
        }
    }
}

/// The rule with the area taken from L'Huillier; fails with
/// [`SuperpositionError::MissingArea`] when `kappa2 = 0`.
pub fn superpose(
    kp: KappaPair,
    q2: ParallelPoint,
    q3: ParallelPoint,
    s1: f64,
    s2: f64,
    branch: Branch,
) -> Result<ParallelPoint, SuperpositionError> {
    let s3 = geodesic_distance(kp, q3, q2)?;
    let area = area_lhuillier(kp, s1, s2, s3)?;
    superpose_with_area(kp, q2, q3, s1, s2, area, branch)
}

pub fn superpose_both(kp: KappaPair, q2: ParallelPoint, q3: ParallelPoint, s1: f64, s2: f64) -> BranchPair {
    BranchPair {
        plus: superpose(kp, q2, q3, s1, s2, Branch::Plus),
        minus: superpose(kp, q2, q3, s1, s2, Branch::Minus),
    }
}

pub fn superpose_both_with_area(
    kp: KappaPair,
    q2: ParallelPoint,
    q3: ParallelPoint,
    s1: f64,
    s2: f64,
    area: f64,
) -> BranchPair {
    BranchPair {
        plus: superpose_with_area(kp, q2, q3, s1, s2, area, Branch::Plus),
        minus: superpose_with_area(kp, q2, q3, s1, s2, area, Branch::Minus),
    }
}

/// `q3` expressed in the frame where `q2` is the origin, and `s3 = d(q3, q2)`.
fn moved_frame(
    kp: KappaPair,
    q2: ParallelPoint,
    q3: ParallelPoint,
) -> Result<(ParallelPoint, f64), SuperpositionError> {
    let s3 = geodesic_distance(kp, q3, q2)?;
    if s3 < 1e-14 {
        return Err(SuperpositionError::CoincidentPoints);
    }
    let q3m = act_on_parallel(kp, &translation_from(kp, q2), q3)?;
    Ok((q3m, s3))
}

/// The solution in the moved frame, before selecting among chart preimages:
/// numerator and denominator of `Tk(x1')`, and `Sk_{k1k2}(y1')`.
fn moved_frame_rule(kp: KappaPair, q3m: ParallelPoint, s1: f64, s2: f64, s3: f64, area: f64, sign: f64) -> (f64, f64, f64) {
    let (k1, k2, k12) = (kp.kappa1, kp.kappa2, kp.k12());
    let cfac = cosine_factor(k1, s1, s2, s3);
    let h = area_factor(kp, s1, s2, s3, area);
    let ss3 = sk(k1, s3);
    // Tk(x3') Ck(s3) = Sk(x3') Ck_{k1k2}(y3') when q2 is the origin
    let sx3c = sk(k1, q3m.x) * ck(k12, q3m.y);
    let sy3 = sk(k12, q3m.y);
    let num = sx3c * cfac - sign * 4.0 * k2 * sy3 * h;
    let den = ck(k1, s1) * ss3 * ss3;
    let sy1 = (sy3 * cfac + sign * 4.0 * sx3c * h) / (ss3 * ss3);
    (num, den, sy1)
}

/// The rule with an explicitly supplied area.
pub fn superpose_with_area(
    kp: KappaPair,
    q2: ParallelPoint,
    q3: ParallelPoint,
    s1: f64,
    s2: f64,
    area: f64,
    branch: Branch,
) -> Result<ParallelPoint, SuperpositionError> {
    let (k1, k12) = (kp.kappa1, kp.k12());
    let (q3m, s3) = moved_frame(kp, q2, q3)?;
    let (num, den, sy1) = moved_frame_rule(kp, q3m, s1, s2, s3, area, branch.sign());

    let x = if k1 > 0.0 {
        let r = k1.sqrt();
        (r * num).atan2(den) / r
    } else {
        kappa::tk_inv(k1, num / den).map_err(|_| SuperpositionError::Inversion)?
    };
    let y = kappa::sk_inv(k12, sy1).map_err(|_| SuperpositionError::Inversion)?;

    let mut candidates = vec![ParallelPoint::new(x, y)];
    if k1 > 0.0 {
        candidates.push(ParallelPoint::new(x + PI / k1.sqrt(), y));
    }
    if k12 > 0.0 {
        let mirrored: Vec<_> = candidates
            .iter()
            .map(|c| ParallelPoint::new(c.x, PI / k12.sqrt() - c.y))
            .collect();
        candidates.extend(mirrored);
    }
    let cost = |c: &ParallelPoint| match (
        geodesic_distance(kp, *c, ParallelPoint::ORIGIN),
        geodesic_distance(kp, *c, q3m),
    ) {
        (Ok(d1), Ok(d2)) => (d1 - s1).abs() + (d2 - s2).abs(),
        _ => f64::INFINITY,
    };
    let best = candidates
        .into_iter()
        .map(|c| (cost(&c), c))
        .filter(|(e, _)| e.is_finite())
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, c)| c)
        .ok_or(SuperpositionError::Inversion)?;

    let back = act_on_parallel(kp, &translation_to(kp, q2), best)?;
    Ok(normalize(kp, back))
}

/// The rule evaluated literally on global chart differences `x3 - x2`, `y3 - y2`.
///
/// Exact only when `q2` lies on the base geodesic `y = 0` (or on flat spaces);
/// kept to quantify that deviation.
pub fn superpose_chart_literal(
    kp: KappaPair,
    q2: ParallelPoint,
    q3: ParallelPoint,
    s1: f64,
    s2: f64,
    area: f64,
    branch: Branch,
) -> Result<ParallelPoint, SuperpositionError> {
    let (k1, k12) = (kp.kappa1, kp.kappa2 * kp.kappa1);
    let s3 = geodesic_distance(kp, q3, q2)?;
    if s3 < 1e-14 {
        return Err(SuperpositionError::CoincidentPoints);
    }
    let (tx, sy) = literal_rule(kp, q3.x - q2.x, q3.y - q2.y, [s1, s2, s3], area, branch)?;
    let dx = kappa::tk_inv(k1, tx).map_err(|_| SuperpositionError::Inversion)?;
    let dy = kappa::sk_inv(k12, sy).map_err(|_| SuperpositionError::Inversion)?;
    Ok(normalize(kp, ParallelPoint::new(q2.x + dx, q2.y + dy)))
}

/// Right-hand sides of the chart-form rule: `(Tk1(x1 - x2), Sk(y1 - y2))` from
/// the offsets `dx = x3 - x2`, `dy = y3 - y2` and the sides `[s1, s2, s3]`.
pub fn literal_rule(
    kp: KappaPair,
    dx: f64,
    dy: f64,
    sides: [f64; 3],
    area: f64,
    branch: Branch,
) -> Result<(f64, f64), KappaError> {
    let (k1, k2, k12) = (kp.kappa1, kp.kappa2, kp.k12());
    let [s1, s2, s3] = sides;
    let sign = branch.sign();
    let cfac = cosine_factor(k1, s1, s2, s3);
    let h = area_factor(kp, s1, s2, s3, area);
    let (tx3, sy3) = (tk(k1, dx)?, sk(k12, dy));
    let (ss3, ts3) = (sk(k1, s3), tk(k1, s3)?);
    let tx = tx3 * cfac / (ck(k1, s1) * ss3 * ts3) - sign * 4.0 * k2 * sy3 * h / (ck(k1, s1) * ss3 * ss3);
    let sy = sy3 * cfac / (ss3 * ss3) + sign * 4.0 * tx3 * h / (ss3 * ts3);
    Ok((tx, sy))
}

/// The Newtonian `y` relation written with `Tk(x3' )/(Sk(s3) Tk(s3))` and a
/// bare area term, in the frame where `q2` is the origin. Returns `y1'`.
pub fn newtonian_y_moved(
    kp: KappaPair,
    q3m: ParallelPoint,
    s1: f64,
    s2: f64,
    area: f64,
    branch: Branch,
) -> Result<f64, SuperpositionError> {
    let k1 = kp.kappa1;
    let s3 = q3m.x.abs();
    let (ss3, ts3) = (sk(k1, s3), tk(k1, s3)?);
    let half = ck(k1, 0.5 * s1) * ck(k1, 0.5 * s2) * ck(k1, 0.5 * s3);
    let cfac = cosine_factor(k1, s1, s2, s3);
    Ok(q3m.y * cfac / (ss3 * ss3) + branch.sign() * 2.0 * tk(k1, q3m.x)? * half * area / (ss3 * ts3))
}

/// `q` seen from the frame where `q2` is the origin.
pub fn to_moved_frame(kp: KappaPair, q2: ParallelPoint, q: ParallelPoint) -> Result<ParallelPoint, SuperpositionError> {
    Ok(act_on_parallel(kp, &translation_from(kp, q2), q)?)
}

/// Angles at `q2` from the triangle data, as `Ck_{k2}`/`Sk_{k2}` pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AngleCertificate {
    /// Angle between the base geodesic and side `q2 q3`.
    pub ck_beta: f64,
    pub sk_beta: f64,
    /// Interior angle between sides `s1` and `s3`.
    pub ck_alpha: f64,
    pub sk_alpha: f64,
}

impl AngleCertificate {
    /// Largest deviation of `Ck^2 + k2 Sk^2` from 1 over the two angles.
    pub fn residual(&self, kappa2: f64) -> f64 {
        let r = |c: f64, s: f64| (c * c + kappa2 * s * s - 1.0).abs();
        r(self.ck_beta, self.sk_beta).max(r(self.ck_alpha, self.sk_alpha))
    }
}

pub fn angle_certificate(
    kp: KappaPair,
    q2: ParallelPoint,
    q3: ParallelPoint,
    tri: &TriangleInvariants,
) -> Result<AngleCertificate, SuperpositionError> {
    let (k1, k12) = (kp.kappa1, kp.k12());
    let q3m = to_moved_frame(kp, q2, q3)?;
    let (ss1, ss3) = (sk(k1, tri.s1), sk(k1, tri.s3));
    let h = area_factor(kp, tri.s1, tri.s2, tri.s3, tri.area);
    Ok(AngleCertificate {
        ck_beta: sk(k1, q3m.x) * ck(k12, q3m.y) / ss3,
        sk_beta: sk(k12, q3m.y) / ss3,
        ck_alpha: cosine_factor(k1, tri.s1, tri.s2, tri.s3) / (ss1 * ss3),
        sk_alpha: 4.0 * h / (ss1 * ss3),
    })
}
