//! Poisson coalgebra on the symmetric algebra of the extended CK algebra
//! `span{v0, v1, v2, v3}`, and the constants of motion it produces.
//!
//! Elements live in one copy (`slots = 1`) or in the tensor product of two
//! copies (`slots = 2`). Coefficients are generic so that centrality of the
//! Casimir can be checked exactly with [`KappaPoly`] coefficients.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_rational::Rational64;
use thiserror::Error;

use crate::hamilton::{hamiltonian, Generator};
use crate::space::{versine_separation, KappaPair, ParallelPoint};

/// Exponents of `v0..v3` in slot 1 followed by slot 2.
pub type Monomial = [u8; 8];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoalgebraError {
    #[error("slot count mismatch: {left} vs {right}")]
    SlotMismatch { left: usize, right: usize },
    #[error("expected {expected} point(s), got {got}")]
    Arity { expected: usize, got: usize },
}

pub trait Coefficient:
    Clone
    + PartialEq
    + fmt::Debug
    + fmt::Display
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_ratio(numer: i64, denom: i64) -> Self;
    fn is_zero(&self) -> bool;
}

impl Coefficient for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_ratio(numer: i64, denom: i64) -> Self {
        numer as f64 / denom as f64
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
}

/// A polynomial in the symbols `k1, k2` with rational coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct KappaPoly {
    terms: BTreeMap<(u32, u32), Rational64>,
}

impl KappaPoly {
    fn single(e: (u32, u32), c: Rational64) -> Self {
        let mut p = KappaPoly::default();
        if c != Rational64::from_integer(0) {
            p.terms.insert(e, c);
        }
        p
    }

    pub fn kappa1() -> Self {
        Self::single((1, 0), Rational64::from_integer(1))
    }

    pub fn kappa2() -> Self {
        Self::single((0, 1), Rational64::from_integer(1))
    }

    pub fn eval(&self, kp: KappaPair) -> f64 {
        self.terms
            .iter()
            .map(|(&(a, b), c)| {
                let c = *c.numer() as f64 / *c.denom() as f64;
                c * kp.kappa1.powi(a as i32) * kp.kappa2.powi(b as i32)
            })
            .sum()
    }

    fn accumulate(&mut self, e: (u32, u32), c: Rational64) {
        let entry = self.terms.entry(e).or_insert_with(|| Rational64::from_integer(0));
        *entry += c;
        if *entry == Rational64::from_integer(0) {
            self.terms.remove(&e);
        }
    }
}

impl Add for KappaPoly {
    type Output = KappaPoly;
    fn add(mut self, rhs: KappaPoly) -> KappaPoly {
        for (e, c) in rhs.terms {
            self.accumulate(e, c);
        }
        self
    }
}

impl Neg for KappaPoly {
    type Output = KappaPoly;
    fn neg(mut self) -> KappaPoly {
        for c in self.terms.values_mut() {
            *c = -*c;
        }
        self
    }
}

impl Sub for KappaPoly {
    type Output = KappaPoly;
    fn sub(self, rhs: KappaPoly) -> KappaPoly {
        self + (-rhs)
    }
}

impl Mul for KappaPoly {
    type Output = KappaPoly;
    fn mul(self, rhs: KappaPoly) -> KappaPoly {
        let mut out = KappaPoly::default();
        for (&(a1, b1), c1) in &self.terms {
            for (&(a2, b2), c2) in &rhs.terms {
                out.accumulate((a1 + a2, b1 + b2), c1 * c2);
            }
        }
        out
    }
}

impl fmt::Display for KappaPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (&(a, b), c)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{c}")?;
            for (sym, e) in [("k1", a), ("k2", b)] {
                match e {
                    0 => {}
                    1 => write!(f, "*{sym}")?,
                    _ => write!(f, "*{sym}^{e}")?,
                }
            }
        }
        Ok(())
    }
}

impl Coefficient for KappaPoly {
    fn zero() -> Self {
        KappaPoly::default()
    }
    fn one() -> Self {
        Self::single((0, 0), Rational64::from_integer(1))
    }
    fn from_ratio(numer: i64, denom: i64) -> Self {
        Self::single((0, 0), Rational64::new(numer, denom))
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

/// The parameters entering the bracket `{v1, v2} = v0 - k1 v3`, `{v2, v3} = -k2 v1`.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureConstants<C> {
    pub kappa1: C,
    pub kappa2: C,
}

impl StructureConstants<f64> {
    pub fn numeric(kp: KappaPair) -> Self {
        Self {
            kappa1: kp.kappa1,
            kappa2: kp.kappa2,
        }
    }
}

impl StructureConstants<KappaPoly> {
    pub fn symbolic() -> Self {
        Self {
            kappa1: KappaPoly::kappa1(),
            kappa2: KappaPoly::kappa2(),
        }
    }
}

impl<C: Coefficient> StructureConstants<C> {
    /// `{v_a, v_b}` as coefficients over `v0..v3`.
    pub fn bracket(&self, a: Generator, b: Generator) -> [C; 4] {
        use Generator::*;
        let z = C::zero;
        let (pair, flip) = if a <= b { ((a, b), false) } else { ((b, a), true) };
        let row = match pair {
            (V1, V2) => [C::one(), z(), z(), -self.kappa1.clone()],
            (V1, V3) => [z(), z(), C::one(), z()],
            (V2, V3) => [z(), -self.kappa2.clone(), z(), z()],
            _ => [z(), z(), z(), z()],
        };
        if flip {
            row.map(|c| -c)
        } else {
            row
        }
    }
}

/// A polynomial in the generators over one or two tensor slots.
///
/// Arithmetic operators panic on mismatched slot counts.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyElement<C> {
    slots: usize,
    terms: BTreeMap<Monomial, C>,
}

impl<C: Coefficient> PolyElement<C> {
    pub fn zero(slots: usize) -> Self {
        assert!(slots == 1 || slots == 2, "slot count must be 1 or 2");
        Self {
            slots,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(slots: usize, c: C) -> Self {
        let mut p = Self::zero(slots);
        p.accumulate([0; 8], c);
        p
    }

    pub fn one(slots: usize) -> Self {
        Self::constant(slots, C::one())
    }

    /// `v_g` in the given slot (0-based).
    pub fn generator(slots: usize, slot: usize, g: Generator) -> Self {
        assert!(slot < slots);
        let mut m = [0; 8];
        m[slot * 4 + g.index()] = 1;
        let mut p = Self::zero(slots);
        p.accumulate(m, C::one());
        p
    }

    pub fn slots(&self) -> usize {
        self.slots
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &C)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> C {
        self.terms.get(m).cloned().unwrap_or_else(C::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scale(mut self, c: &C) -> Self {
        if c.is_zero() {
            return Self::zero(self.slots);
        }
        for v in self.terms.values_mut() {
            *v = v.clone() * c.clone();
        }
        self.terms.retain(|_, v| !v.is_zero());
        self
    }

    pub fn map_coefficients<D: Coefficient>(&self, f: impl Fn(&C) -> D) -> PolyElement<D> {
        let mut out = PolyElement::zero(self.slots);
        for (m, c) in &self.terms {
            out.accumulate(*m, f(c));
        }
        out
    }

    fn accumulate(&mut self, m: Monomial, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.remove(&m) {
            Some(old) => {
                let sum = old + c;
                if !sum.is_zero() {
                    self.terms.insert(m, sum);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    fn check_slots(&self, other: &Self) -> Result<(), CoalgebraError> {
        if self.slots == other.slots {
            Ok(())
        } else {
            Err(CoalgebraError::SlotMismatch {
                left: self.slots,
                right: other.slots,
            })
        }
    }
}

fn monomial_product(a: &Monomial, b: &Monomial) -> Monomial {
    std::array::from_fn(|i| a[i] + b[i])
}

impl<C: Coefficient> Add for PolyElement<C> {
    type Output = PolyElement<C>;
    fn add(mut self, rhs: PolyElement<C>) -> PolyElement<C> {
        self.check_slots(&rhs).expect("PolyElement addition");
        for (m, c) in rhs.terms {
            self.accumulate(m, c);
        }
        self
    }
}

impl<C: Coefficient> Neg for PolyElement<C> {
    type Output = PolyElement<C>;
    fn neg(mut self) -> PolyElement<C> {
        for v in self.terms.values_mut() {
            *v = -v.clone();
        }
        self
    }
}

impl<C: Coefficient> Sub for PolyElement<C> {
    type Output = PolyElement<C>;
    fn sub(self, rhs: PolyElement<C>) -> PolyElement<C> {
        self + (-rhs)
    }
}

impl<C: Coefficient> Mul for PolyElement<C> {
    type Output = PolyElement<C>;
    fn mul(self, rhs: PolyElement<C>) -> PolyElement<C> {
        self.check_slots(&rhs).expect("PolyElement product");
        let mut out = PolyElement::zero(self.slots);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.accumulate(monomial_product(ma, mb), ca.clone() * cb.clone());
            }
        }
        out
    }
}

impl<C: Coefficient> fmt::Display for PolyElement<C> {
    /// Slot-1 generators print as `v0..v3`, slot-2 generators as `w0..w3`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "({c})")?;
            for (idx, &e) in m.iter().enumerate() {
                let sym = if idx < 4 { 'v' } else { 'w' };
                match e {
                    0 => {}
                    1 => write!(f, "*{sym}{}", idx % 4)?,
                    _ => write!(f, "*{sym}{}^{e}", idx % 4)?,
                }
            }
        }
        Ok(())
    }
}

/// Poisson bracket on the symmetric algebra, acting slot-wise on tensor products.
pub fn bracket<C: Coefficient>(
    sc: &StructureConstants<C>,
    a: &PolyElement<C>,
    b: &PolyElement<C>,
) -> Result<PolyElement<C>, CoalgebraError> {
    a.check_slots(b)?;
    let mut out = PolyElement::zero(a.slots);
    for (ma, ca) in &a.terms {
        for (mb, cb) in &b.terms {
            for slot in 0..a.slots {
                for ga in Generator::ALL {
                    let ia = slot * 4 + ga.index();
                    if ma[ia] == 0 {
                        continue;
                    }
                    for gb in Generator::ALL {
                        let ib = slot * 4 + gb.index();
                        if mb[ib] == 0 {
                            continue;
                        }
                        let row = sc.bracket(ga, gb);
                        if row.iter().all(|c| c.is_zero()) {
                            continue;
                        }
                        let mut base = monomial_product(ma, mb);
                        base[ia] -= 1;
                        base[ib] -= 1;
                        let weight = ca.clone() * cb.clone() * C::from_ratio(ma[ia] as i64 * mb[ib] as i64, 1);
                        for (gc, t) in Generator::ALL.into_iter().zip(row) {
                            if t.is_zero() {
                                continue;
                            }
                            let mut m = base;
                            m[slot * 4 + gc.index()] += 1;
                            out.accumulate(m, weight.clone() * t);
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// [`bracket`] with numeric structure constants.
pub fn poly_poisson(
    kp: KappaPair,
    a: &PolyElement<f64>,
    b: &PolyElement<f64>,
) -> Result<PolyElement<f64>, CoalgebraError> {
    bracket(&StructureConstants::numeric(kp), a, b)
}

/// `C = v3 v0 - (k2 v1^2 + v2^2 + k1 v3^2) / 2` in one slot.
pub fn casimir<C: Coefficient>(sc: &StructureConstants<C>) -> PolyElement<C> {
    let v = |g| PolyElement::<C>::generator(1, 0, g);
    let half = C::from_ratio(1, 2);
    v(Generator::V3) * v(Generator::V0)
        - (v(Generator::V1) * v(Generator::V1)).scale(&(half.clone() * sc.kappa2.clone()))
        - (v(Generator::V2) * v(Generator::V2)).scale(&half)
        - (v(Generator::V3) * v(Generator::V3)).scale(&(half * sc.kappa1.clone()))
}

/// The primitive coproduct `v_a -> v_a (x) 1 + 1 (x) v_a`, extended multiplicatively.
pub fn coproduct<C: Coefficient>(e: &PolyElement<C>) -> Result<PolyElement<C>, CoalgebraError> {
    if e.slots != 1 {
        return Err(CoalgebraError::SlotMismatch {
            left: e.slots,
            right: 1,
        });
    }
    let delta: Vec<PolyElement<C>> = Generator::ALL
        .into_iter()
        .map(|g| PolyElement::generator(2, 0, g) + PolyElement::generator(2, 1, g))
        .collect();
    let mut out = PolyElement::zero(2);
    for (m, c) in &e.terms {
        let mut term = PolyElement::constant(2, c.clone());
        for g in Generator::ALL {
            for _ in 0..m[g.index()] {
                term = term * delta[g.index()].clone();
            }
        }
        out = out + term;
    }
    Ok(out)
}

/// Evaluates `e` with `v_a` in slot `j` replaced by `h_a(points[j])`.
pub fn realize(kp: KappaPair, e: &PolyElement<f64>, points: &[ParallelPoint]) -> Result<f64, CoalgebraError> {
    if points.len() != e.slots {
        return Err(CoalgebraError::Arity {
            expected: e.slots,
            got: points.len(),
        });
    }
    let h: Vec<[f64; 4]> = points
        .iter()
        .map(|&p| Generator::ALL.map(|g| hamiltonian(kp, g, p)))
        .collect();
    Ok(e.terms
        .iter()
        .map(|(m, c)| {
            m.iter()
                .enumerate()
                .filter(|(_, &n)| n > 0)
                .fold(*c, |acc, (i, &n)| acc * h[i / 4][i % 4].powi(n as i32))
        })
        .sum())
}

/// `F^(2)` in versed-sine form; equals `Vk_{k1}(d(p1, p2))`.
pub fn f2_closed_form(kp: KappaPair, p1: ParallelPoint, p2: ParallelPoint) -> f64 {
    versine_separation(kp, p1, p2)
}

/// The two permuted copies of `F^(2)` on three points.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Permutation {
    /// `F^(2)_13 = F^(2)(p3, p2)`
    P13,
    /// `F^(2)_23 = F^(2)(p1, p3)`
    P23,
}

pub fn f2_permuted(kp: KappaPair, which: Permutation, p1: ParallelPoint, p2: ParallelPoint, p3: ParallelPoint) -> f64 {
    match which {
        Permutation::P13 => f2_closed_form(kp, p3, p2),
        Permutation::P23 => f2_closed_form(kp, p1, p3),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InvariantKind {
    /// `D(C)`, identically zero.
    F,
    F2,
    F2Perm13,
    F2Perm23,
}

impl InvariantKind {
    pub fn copies(self) -> usize {
        match self {
            InvariantKind::F => 1,
            InvariantKind::F2 => 2,
            InvariantKind::F2Perm13 | InvariantKind::F2Perm23 => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            InvariantKind::F => "F",
            InvariantKind::F2 => "F2",
            InvariantKind::F2Perm13 => "F2_13",
            InvariantKind::F2Perm23 => "F2_23",
        }
    }
}

/// A constant of motion of the diagonal prolongation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvariantFn {
    pub kp: KappaPair,
    pub kind: InvariantKind,
}

impl InvariantFn {
    pub fn copies(&self) -> usize {
        self.kind.copies()
    }

    pub fn eval(&self, points: &[ParallelPoint]) -> Result<f64, CoalgebraError> {
        if points.len() != self.copies() {
            return Err(CoalgebraError::Arity {
                expected: self.copies(),
                got: points.len(),
            });
        }
        let kp = self.kp;
        Ok(match self.kind {
            InvariantKind::F => realize(kp, &casimir(&StructureConstants::numeric(kp)), points)?,
            InvariantKind::F2 => f2_closed_form(kp, points[0], points[1]),
            InvariantKind::F2Perm13 => f2_permuted(kp, Permutation::P13, points[0], points[1], points[2]),
            InvariantKind::F2Perm23 => f2_permuted(kp, Permutation::P23, points[0], points[1], points[2]),
        })
    }
}
