//! Vessiot-Guldberg vector fields, the symplectic form `Ck_{k1k2}(y) dx^dy`
//! and the Hamiltonian functions of the Lie-Hamilton system on `S^2_[k1],k2`.

use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::kappa::{self, ck, sk, vk, KappaError};
use crate::space::{KappaPair, ParallelPoint};

/// Step used for central differences of black-box scalar fields.
pub const GRADIENT_STEP: f64 = 1e-6;
/// Step used for finite-difference Jacobians in [`lie_bracket_numeric`].
pub const JACOBIAN_STEP: f64 = 1e-5;

/// A time-dependent coefficient `b_i(t)` drawn from a closed catalog.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TimeFunction {
    Constant {
        value: f64,
    },
    /// `amplitude * sin(omega t + phase)`
    Sinusoid {
        amplitude: f64,
        omega: f64,
        #[serde(default)]
        phase: f64,
    },
    /// `c0 + c1 t + c2 t^2 + c3 t^3`; at most four coefficients.
    Polynomial {
        coefficients: Vec<f64>,
    },
    /// `amplitude * exp(rate t)`
    Exponential {
        amplitude: f64,
        rate: f64,
    },
}

impl TimeFunction {
    pub fn constant(value: f64) -> Self {
        TimeFunction::Constant { value }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            TimeFunction::Constant { value } => *value,
            TimeFunction::Sinusoid {
                amplitude,
                omega,
                phase,
            } => amplitude * (omega * t + phase).sin(),
            TimeFunction::Polynomial { coefficients } => {
                coefficients.iter().rev().fold(0.0, |acc, c| acc * t + c)
            }
            TimeFunction::Exponential { amplitude, rate } => amplitude * (rate * t).exp(),
        }
    }

    /// Checks the catalog constraints and that the function is finite on `[t0, t1]`.
    pub fn validate(&self, t0: f64, t1: f64) -> Result<(), String> {
        let params: Vec<f64> = match self {
            TimeFunction::Constant { value } => vec![*value],
            TimeFunction::Sinusoid {
                amplitude,
                omega,
                phase,
            } => vec![*amplitude, *omega, *phase],
            TimeFunction::Polynomial { coefficients } => {
                if coefficients.len() > 4 {
                    return Err(format!(
                        "polynomial of degree {} exceeds the maximum degree 3",
                        coefficients.len() - 1
                    ));
                }
                coefficients.clone()
            }
            TimeFunction::Exponential { amplitude, rate } => vec![*amplitude, *rate],
        };
        if params.iter().any(|v| !v.is_finite()) {
            return Err("non-finite parameter".to_string());
        }
        if !(self.eval(t0).is_finite() && self.eval(t1).is_finite()) {
            return Err(format!("not finite on [{t0}, {t1}]"));
        }
        Ok(())
    }
}

/// The three coefficients `b1, b2, b3` of the system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientSpec {
    pub b1: TimeFunction,
    pub b2: TimeFunction,
    pub b3: TimeFunction,
}

impl CoefficientSpec {
    pub fn constant(b1: f64, b2: f64, b3: f64) -> Self {
        Self {
            b1: TimeFunction::constant(b1),
            b2: TimeFunction::constant(b2),
            b3: TimeFunction::constant(b3),
        }
    }

    pub fn eval(&self, t: f64) -> [f64; 3] {
        [self.b1.eval(t), self.b2.eval(t), self.b3.eval(t)]
    }

    pub fn validate(&self, t0: f64, t1: f64) -> Result<(), String> {
        for (name, f) in [("b1", &self.b1), ("b2", &self.b2), ("b3", &self.b3)] {
            f.validate(t0, t1).map_err(|e| format!("{name}: {e}"))?;
        }
        Ok(())
    }
}

/// Index of a basis element: `V0` is the central element (`h0 = 1`, zero
/// vector field), `V1..V3` correspond to `X1..X3` and `h1..h3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Generator {
    V0,
    V1,
    V2,
    V3,
}

impl Generator {
    pub const ALL: [Generator; 4] = [Generator::V0, Generator::V1, Generator::V2, Generator::V3];
    pub const FIELDS: [Generator; 3] = [Generator::V1, Generator::V2, Generator::V3];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Generator> {
        Generator::ALL.get(i).copied()
    }
}

/// Components of a tangent vector in the parallel chart.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct VectorValue {
    pub dx: f64,
    pub dy: f64,
}

impl VectorValue {
    pub const ZERO: VectorValue = VectorValue { dx: 0.0, dy: 0.0 };

    pub const fn new(dx: f64, dy: f64) -> Self {
        Self { dx, dy }
    }

    pub fn max_abs(&self) -> f64 {
        self.dx.abs().max(self.dy.abs())
    }
}

impl Add for VectorValue {
    type Output = VectorValue;
    fn add(self, o: VectorValue) -> VectorValue {
        VectorValue::new(self.dx + o.dx, self.dy + o.dy)
    }
}

impl Sub for VectorValue {
    type Output = VectorValue;
    fn sub(self, o: VectorValue) -> VectorValue {
        VectorValue::new(self.dx - o.dx, self.dy - o.dy)
    }
}

impl Mul<VectorValue> for f64 {
    type Output = VectorValue;
    fn mul(self, v: VectorValue) -> VectorValue {
        VectorValue::new(self * v.dx, self * v.dy)
    }
}

/// `X_{k,i}` at `p`. Fails at the chart poles `Ck_{k1k2}(y) = 0`.
pub fn vector_field(kp: KappaPair, g: Generator, p: ParallelPoint) -> Result<VectorValue, KappaError> {
    let (k1, k2) = (kp.kappa1, kp.kappa2);
    let k12 = kp.k12();
    Ok(match g {
        Generator::V0 => VectorValue::ZERO,
        Generator::V1 => VectorValue::new(1.0, 0.0),
        Generator::V2 => VectorValue::new(
            k12 * sk(k1, p.x) * kappa::tk(k12, p.y)?,
            ck(k1, p.x),
        ),
        Generator::V3 => VectorValue::new(
            k2 * ck(k1, p.x) * kappa::tk(k12, p.y)?,
            -sk(k1, p.x),
        ),
    })
}

/// `b1(t) X1 + b2(t) X2 + b3(t) X3` at `p`.
pub fn system_rhs(kp: KappaPair, c: &CoefficientSpec, t: f64, p: ParallelPoint) -> Result<VectorValue, KappaError> {
    let b = c.eval(t);
    let mut out = VectorValue::ZERO;
    for (bi, g) in b.into_iter().zip(Generator::FIELDS) {
        if bi != 0.0 {
            out = out + bi * vector_field(kp, g, p)?;
        }
    }
    Ok(out)
}

/// `h_{k,i}` at `p`; `h3` uses the versed-sine form, regular at `k1 = 0`.
pub fn hamiltonian(kp: KappaPair, g: Generator, p: ParallelPoint) -> f64 {
    let (k1, k2) = (kp.kappa1, kp.kappa2);
    let k12 = kp.k12();
    match g {
        Generator::V0 => 1.0,
        Generator::V1 => sk(k12, p.y),
        Generator::V2 => -sk(k1, p.x) * ck(k12, p.y),
        Generator::V3 => vk(k1, p.x) + k2 * vk(k12, p.y) - k12 * vk(k1, p.x) * vk(k12, p.y),
    }
}

/// Analytic `(dh/dx, dh/dy)`.
pub fn hamiltonian_gradient(kp: KappaPair, g: Generator, p: ParallelPoint) -> (f64, f64) {
    let (k1, k2) = (kp.kappa1, kp.kappa2);
    let k12 = kp.k12();
    match g {
        Generator::V0 => (0.0, 0.0),
        Generator::V1 => (0.0, ck(k12, p.y)),
        Generator::V2 => (
            -ck(k1, p.x) * ck(k12, p.y),
            k12 * sk(k1, p.x) * sk(k12, p.y),
        ),
        Generator::V3 => (sk(k1, p.x) * ck(k12, p.y), k2 * ck(k1, p.x) * sk(k12, p.y)),
    }
}

/// Coefficient of `dx ^ dy` in the symplectic form.
pub fn symplectic_density(kp: KappaPair, p: ParallelPoint) -> f64 {
    ck(kp.k12(), p.y)
}

/// Poisson-bracket structure constants: `{h_a, h_b}` as coefficients over `h0..h3`.
pub fn bracket_table(kp: KappaPair, a: Generator, b: Generator) -> [f64; 4] {
    use Generator::*;
    let (k1, k2) = (kp.kappa1, kp.kappa2);
    let (pair, sign) = if a <= b { ((a, b), 1.0) } else { ((b, a), -1.0) };
    let row = match pair {
        (V1, V2) => [1.0, 0.0, 0.0, -k1],
        (V1, V3) => [0.0, 0.0, 1.0, 0.0],
        (V2, V3) => [0.0, -k2, 0.0, 0.0],
        _ => [0.0; 4],
    };
    row.map(|c| sign * c)
}

/// Lie-bracket structure constants of the vector fields: `[X_a, X_b]` over `X1..X3`.
pub fn field_bracket_table(kp: KappaPair, a: Generator, b: Generator) -> [f64; 3] {
    use Generator::*;
    let (k1, k2) = (kp.kappa1, kp.kappa2);
    let (pair, sign) = if a <= b { ((a, b), 1.0) } else { ((b, a), -1.0) };
    let row = match pair {
        (V1, V2) => [0.0, 0.0, k1],
        (V1, V3) => [0.0, -1.0, 0.0],
        (V2, V3) => [k2, 0.0, 0.0],
        _ => [0.0; 3],
    };
    row.map(|c| sign * c)
}

/// A scalar function on the chart.
pub trait ScalarField {
    fn value(&self, p: ParallelPoint) -> f64;

    /// Central differences at [`GRADIENT_STEP`] unless overridden.
    fn gradient(&self, p: ParallelPoint) -> (f64, f64) {
        let h = GRADIENT_STEP;
        let fx = (self.value(ParallelPoint::new(p.x + h, p.y)) - self.value(ParallelPoint::new(p.x - h, p.y))) / (2.0 * h);
        let fy = (self.value(ParallelPoint::new(p.x, p.y + h)) - self.value(ParallelPoint::new(p.x, p.y - h))) / (2.0 * h);
        (fx, fy)
    }
}

/// A catalog Hamiltonian with analytic partials.
#[derive(Debug, Clone, Copy)]
pub struct HamiltonianField {
    pub kp: KappaPair,
    pub generator: Generator,
}

impl ScalarField for HamiltonianField {
    fn value(&self, p: ParallelPoint) -> f64 {
        hamiltonian(self.kp, self.generator, p)
    }

    fn gradient(&self, p: ParallelPoint) -> (f64, f64) {
        hamiltonian_gradient(self.kp, self.generator, p)
    }
}

/// Wraps a closure as a black-box field, differentiated numerically.
pub struct NumericField<F>(pub F);

impl<F: Fn(ParallelPoint) -> f64> ScalarField for NumericField<F> {
    fn value(&self, p: ParallelPoint) -> f64 {
        (self.0)(p)
    }
}

/// `{f, g}` induced by the symplectic form.
pub fn poisson_bracket(kp: KappaPair, f: &dyn ScalarField, g: &dyn ScalarField, p: ParallelPoint) -> Result<f64, KappaError> {
    let c = symplectic_density(kp, p);
    if c.abs() < kappa::POLE_FLOOR {
        return Err(KappaError::Pole {
            kappa: kp.k12(),
            u: p.y,
            ck: c,
        });
    }
    let (fx, fy) = f.gradient(p);
    let (gx, gy) = g.gradient(p);
    Ok((fx * gy - fy * gx) / c)
}

/// Components of `i_{X_i} w - dh_i` along `dx` and `dy`.
pub fn hamiltonian_residual(kp: KappaPair, g: Generator, p: ParallelPoint) -> Result<(f64, f64), KappaError> {
    hamiltonian_residual_with(kp, g, p, hamiltonian_gradient)
}

/// As [`hamiltonian_residual`] with a caller-supplied gradient of `h_i`.
pub fn hamiltonian_residual_with(
    kp: KappaPair,
    g: Generator,
    p: ParallelPoint,
    gradient: impl Fn(KappaPair, Generator, ParallelPoint) -> (f64, f64),
) -> Result<(f64, f64), KappaError> {
    let c = symplectic_density(kp, p);
    let x = vector_field(kp, g, p)?;
    let (hx, hy) = gradient(kp, g, p);
    Ok((-c * x.dy - hx, c * x.dx - hy))
}

fn jacobian(kp: KappaPair, g: Generator, p: ParallelPoint) -> Result<[[f64; 2]; 2], KappaError> {
    let h = JACOBIAN_STEP;
    let ddx = vector_field(kp, g, ParallelPoint::new(p.x + h, p.y))? - vector_field(kp, g, ParallelPoint::new(p.x - h, p.y))?;
    let ddy = vector_field(kp, g, ParallelPoint::new(p.x, p.y + h))? - vector_field(kp, g, ParallelPoint::new(p.x, p.y - h))?;
    let s = 0.5 / h;
    Ok([[ddx.dx * s, ddy.dx * s], [ddx.dy * s, ddy.dy * s]])
}

/// `[X_i, X_j] = (DX_j) X_i - (DX_i) X_j` with finite-difference Jacobians.
pub fn lie_bracket_numeric(kp: KappaPair, i: Generator, j: Generator, p: ParallelPoint) -> Result<VectorValue, KappaError> {
    let (xi, xj) = (vector_field(kp, i, p)?, vector_field(kp, j, p)?);
    let (di, dj) = (jacobian(kp, i, p)?, jacobian(kp, j, p)?);
    let apply = |m: [[f64; 2]; 2], v: VectorValue| {
        VectorValue::new(m[0][0] * v.dx + m[0][1] * v.dy, m[1][0] * v.dx + m[1][1] * v.dy)
    };
    Ok(apply(dj, xi) - apply(di, xj))
}

/// The value of `[X_i, X_j]` predicted by the structure constants.
pub fn lie_bracket_predicted(kp: KappaPair, i: Generator, j: Generator, p: ParallelPoint) -> Result<VectorValue, KappaError> {
    let coeffs = field_bracket_table(kp, i, j);
    let mut out = VectorValue::ZERO;
    for (c, g) in coeffs.into_iter().zip(Generator::FIELDS) {
        if c != 0.0 {
            out = out + c * vector_field(kp, g, p)?;
        }
    }
    Ok(out)
}
