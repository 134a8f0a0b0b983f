//! Continuity of every quantity through the contractions `kappa1 -> 0` and
//! `kappa2 -> 0`.
//!
//! Each row compares a quantity at a limit pair, such as `(0, kappa2)`, with
//! the same quantity at a perturbed pair `(delta, kappa2)`. Superposition rows
//! freeze the sides and area measured at the limit.

use serde::Serialize;

use crate::coalgebra::f2_closed_form;
use crate::hamilton::{hamiltonian, symplectic_density, vector_field, Generator};
use crate::kappa::{ck, sk, tk, vk};
use crate::space::{geodesic_distance, KappaPair, ParallelPoint};
use crate::superposition::{superpose_with_area, triangle_invariants, Branch, SuperpositionError};

pub const DEFAULT_DELTAS: [f64; 2] = [1e-7, -1e-7];

/// Three points with pairwise separations that are time-like in every
/// Lorentzian signature reached by the sweep.
pub const SWEEP_POINTS: [ParallelPoint; 3] = [
    ParallelPoint::new(0.2, 0.1),
    ParallelPoint::new(1.0, 0.3),
    ParallelPoint::new(0.6, 0.05),
];

const TRIG_ARGS: [f64; 2] = [0.3, 1.1];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Varied {
    Kappa1,
    Kappa2,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContractionRow {
    pub quantity: String,
    pub varied: Varied,
    pub limit: KappaPair,
    pub delta: f64,
    pub at_limit: f64,
    pub at_delta: f64,
}

impl ContractionRow {
    pub fn difference(&self) -> f64 {
        (self.at_delta - self.at_limit).abs()
    }
}

/// Named scalar quantities evaluated at one pair.
fn quantities(kp: KappaPair, area: f64, sides: (f64, f64)) -> Result<Vec<(String, f64)>, SuperpositionError> {
    let [q1, q2, q3] = SWEEP_POINTS;
    let mut out = Vec::new();
    for u in TRIG_ARGS {
        for (label, kappa) in [("k1", kp.kappa1), ("k1k2", kp.k12())] {
            out.push((format!("C_{label}({u})"), ck(kappa, u)));
            out.push((format!("S_{label}({u})"), sk(kappa, u)));
            out.push((format!("T_{label}({u})"), tk(kappa, u)?));
            out.push((format!("V_{label}({u})"), vk(kappa, u)));
        }
    }
    for (i, p) in SWEEP_POINTS.iter().enumerate() {
        for g in [Generator::V1, Generator::V2, Generator::V3] {
            let v = vector_field(kp, g, *p)?;
            let n = g.index();
            out.push((format!("X{n}.x@q{}", i + 1), v.dx));
            out.push((format!("X{n}.y@q{}", i + 1), v.dy));
            out.push((format!("h{n}@q{}", i + 1), hamiltonian(kp, g, *p)));
        }
        out.push((format!("omega@q{}", i + 1), symplectic_density(kp, *p)));
    }
    for (label, a, b) in [("12", q1, q2), ("13", q1, q3), ("32", q3, q2)] {
        out.push((format!("F2(q{label})"), f2_closed_form(kp, a, b)));
        out.push((format!("d(q{label})"), geodesic_distance(kp, a, b)?));
    }
    out.push(("area".to_string(), triangle_invariants(kp, q1, q2, q3)?.area));
    for b in Branch::BOTH {
        let r = superpose_with_area(kp, q2, q3, sides.0, sides.1, area, b)?;
        let tag = if b == Branch::Plus { "+" } else { "-" };
        out.push((format!("superposed{tag}.x"), r.x));
        out.push((format!("superposed{tag}.y"), r.y));
    }
    Ok(out)
}

/// Limit pairs swept by default: `(0, k2)` and `(k1, 0)` for `k in {1, 0, -1}`.
pub fn default_limits() -> Vec<(Varied, KappaPair)> {
    let mut v = Vec::new();
    for k in [1.0, 0.0, -1.0] {
        v.push((Varied::Kappa1, KappaPair::new(0.0, k)));
    }
    for k in [1.0, 0.0, -1.0] {
        v.push((Varied::Kappa2, KappaPair::new(k, 0.0)));
    }
    v
}

pub fn sweep_one(varied: Varied, limit: KappaPair, deltas: &[f64]) -> Result<Vec<ContractionRow>, SuperpositionError> {
    let [q1, q2, q3] = SWEEP_POINTS;
    let tri = triangle_invariants(limit, q1, q2, q3)?;
    let sides = (tri.s1, tri.s2);
    let base = quantities(limit, tri.area, sides)?;
    let mut rows = Vec::new();
    for &delta in deltas {
        let kp = match varied {
            Varied::Kappa1 => KappaPair::new(delta, limit.kappa2),
            Varied::Kappa2 => KappaPair::new(limit.kappa1, delta),
        };
        let perturbed = quantities(kp, tri.area, sides)?;
        for ((name, at_limit), (_, at_delta)) in base.iter().zip(perturbed) {
            rows.push(ContractionRow {
                quantity: name.clone(),
                varied,
                limit,
                delta,
                at_limit: *at_limit,
                at_delta,
            });
        }
    }
    Ok(rows)
}

pub fn sweep(deltas: &[f64]) -> Result<Vec<ContractionRow>, SuperpositionError> {
    let mut rows = Vec::new();
    for (varied, limit) in default_limits() {
        rows.extend(sweep_one(varied, limit, deltas)?);
    }
    Ok(rows)
}

pub fn max_difference(rows: &[ContractionRow]) -> f64 {
    rows.iter().map(ContractionRow::difference).fold(0.0, f64::max)
}
