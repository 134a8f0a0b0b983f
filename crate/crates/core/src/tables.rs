//! Closed forms of the nine canonical spaces written out by hand with ordinary
//! trigonometric and hyperbolic functions, set against the generic
//! κ-dependent evaluation.

use std::f64::consts::FRAC_PI_6;
use std::io::Write;

use serde::Serialize;

use crate::coalgebra::{casimir, coproduct, f2_closed_form, realize, StructureConstants};
use crate::hamilton::{hamiltonian, symplectic_density, vector_field, Generator};
use crate::kappa::KappaError;
use crate::space::{metric_coefficients, CanonicalSpace, ParallelPoint};
use crate::superposition::{literal_rule, Branch};

/// Grid used for every pointwise row.
pub const GRID_X: [f64; 4] = [-0.9, -0.3, 0.5, 1.1];
pub const GRID_Y: [f64; 4] = [-0.6, -0.1, FRAC_PI_6, 0.9];

/// Triangle data fed to the superposition rows. Only the algebraic form is
/// compared, so the values need not come from a realizable triangle.
pub const RULE_SIDES: [f64; 3] = [0.7, 0.9, 1.1];
pub const RULE_AREA: f64 = 0.3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableRow {
    pub space: &'static str,
    pub quantity: String,
    pub sample: String,
    pub generic: f64,
    pub closed_form: f64,
}

impl TableRow {
    pub fn discrepancy(&self) -> f64 {
        (self.generic - self.closed_form).abs()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TableSummary {
    pub space: &'static str,
    pub rows: usize,
    pub max_discrepancy: f64,
    pub worst_quantity: String,
}

type RuleFn = fn(f64, f64, [f64; 3], f64, f64) -> (f64, f64);

struct Closed {
    metric: fn(f64, f64) -> (f64, f64),
    x2: fn(f64, f64) -> (f64, f64),
    x3: fn(f64, f64) -> (f64, f64),
    h: fn(f64, f64) -> [f64; 3],
    omega: fn(f64) -> f64,
    /// Coefficients of `v3 v0, v1^2, v2^2, v3^2`.
    casimir: [f64; 4],
    f2: fn(f64, f64, f64, f64) -> f64,
    /// `(Tk(x1 - x2), Sk(y1 - y2))` from `(dx, dy)`, the sides, the area and the sign.
    rule: RuleFn,
}

fn sq(u: f64) -> f64 {
    u * u
}

fn half_cos(s: [f64; 3]) -> f64 {
    (0.5 * s[0]).cos() * (0.5 * s[1]).cos() * (0.5 * s[2]).cos()
}

fn half_cosh(s: [f64; 3]) -> f64 {
    (0.5 * s[0]).cosh() * (0.5 * s[1]).cosh() * (0.5 * s[2]).cosh()
}

fn flat_factor(s: [f64; 3]) -> f64 {
    (sq(s[0]) + sq(s[2]) - sq(s[1])) / (2.0 * sq(s[2]))
}

fn closed(space: CanonicalSpace) -> Closed {
    use CanonicalSpace::*;
    match space {
        Sphere => Closed {
            metric: |_, y| (sq(y.cos()), 1.0),
            x2: |x, y| (x.sin() * y.tan(), x.cos()),
            x3: |x, y| (x.cos() * y.tan(), -x.sin()),
            h: |x, y| [y.sin(), -x.sin() * y.cos(), 1.0 - x.cos() * y.cos()],
            omega: |y| y.cos(),
            casimir: [1.0, -0.5, -0.5, -0.5],
            f2: |x1, y1, x2, y2| 1.0 - (x1 - x2).cos() * y1.cos() * y2.cos() - y1.sin() * y2.sin(),
            rule: |dx, dy, s, a, sg| {
                let c = s[1].cos() - s[0].cos() * s[2].cos();
                let h = half_cos(s) * (0.5 * a).sin();
                (
                    dx.tan() * c / (s[0].cos() * s[2].sin() * s[2].tan())
                        - sg * 4.0 * dy.sin() * h / (s[0].cos() * sq(s[2].sin())),
                    dy.sin() * c / sq(s[2].sin()) + sg * 4.0 * dx.tan() * h / (s[2].sin() * s[2].tan()),
                )
            },
        },
        Euclidean => Closed {
            metric: |_, _| (1.0, 1.0),
            x2: |_, _| (0.0, 1.0),
            x3: |x, y| (y, -x),
            h: |x, y| [y, -x, 0.5 * (x * x + y * y)],
            omega: |_| 1.0,
            casimir: [1.0, -0.5, -0.5, 0.0],
            f2: |x1, y1, x2, y2| 0.5 * (sq(x1 - x2) + sq(y1 - y2)),
            rule: |dx, dy, s, a, sg| {
                let f = flat_factor(s);
                (dx * f - sg * 2.0 * dy * a / sq(s[2]), dy * f + sg * 2.0 * dx * a / sq(s[2]))
            },
        },
        Hyperbolic => Closed {
            metric: |_, y| (sq(y.cosh()), 1.0),
            x2: |x, y| (-x.sinh() * y.tanh(), x.cosh()),
            x3: |x, y| (x.cosh() * y.tanh(), -x.sinh()),
            h: |x, y| [y.sinh(), -x.sinh() * y.cosh(), x.cosh() * y.cosh() - 1.0],
            omega: |y| y.cosh(),
            casimir: [1.0, -0.5, -0.5, 0.5],
            f2: |x1, y1, x2, y2| (x1 - x2).cosh() * y1.cosh() * y2.cosh() - y1.sinh() * y2.sinh() - 1.0,
            rule: |dx, dy, s, a, sg| {
                let c = s[0].cosh() * s[2].cosh() - s[1].cosh();
                let h = half_cosh(s) * (0.5 * a).sin();
                (
                    dx.tanh() * c / (s[0].cosh() * s[2].sinh() * s[2].tanh())
                        - sg * 4.0 * dy.sinh() * h / (s[0].cosh() * sq(s[2].sinh())),
                    dy.sinh() * c / sq(s[2].sinh()) + sg * 4.0 * dx.tanh() * h / (s[2].sinh() * s[2].tanh()),
                )
            },
        },
        OscillatingNewtonHooke => Closed {
            metric: |_, _| (1.0, 0.0),
            x2: |x, _| (0.0, x.cos()),
            x3: |x, _| (0.0, -x.sin()),
            h: |x, y| [y, -x.sin(), 1.0 - x.cos()],
            omega: |_| 1.0,
            casimir: [1.0, 0.0, -0.5, -0.5],
            f2: |x1, _, x2, _| 1.0 - (x1 - x2).cos(),
            rule: |dx, dy, s, a, sg| {
                let c = s[1].cos() - s[0].cos() * s[2].cos();
                (
                    dx.tan() * c / (s[0].cos() * s[2].sin() * s[2].tan()),
                    dy * c / sq(s[2].sin()) + sg * 2.0 * dx.tan() * half_cos(s) * a / (s[2].sin() * s[2].tan()),
                )
            },
        },
        Galilean => Closed {
            metric: |_, _| (1.0, 0.0),
            x2: |_, _| (0.0, 1.0),
            x3: |x, _| (0.0, -x),
            h: |x, y| [y, -x, 0.5 * x * x],
            omega: |_| 1.0,
            casimir: [1.0, 0.0, -0.5, 0.0],
            f2: |x1, _, x2, _| 0.5 * sq(x1 - x2),
            rule: |dx, dy, s, a, sg| {
                let f = flat_factor(s);
                (dx * f, dy * f + sg * 2.0 * dx * a / sq(s[2]))
            },
        },
        ExpandingNewtonHooke => Closed {
            metric: |_, _| (1.0, 0.0),
            x2: |x, _| (0.0, x.cosh()),
            x3: |x, _| (0.0, -x.sinh()),
            h: |x, y| [y, -x.sinh(), x.cosh() - 1.0],
            omega: |_| 1.0,
            casimir: [1.0, 0.0, -0.5, 0.5],
            f2: |x1, _, x2, _| (x1 - x2).cosh() - 1.0,
            rule: |dx, dy, s, a, sg| {
                let c = s[0].cosh() * s[2].cosh() - s[1].cosh();
                (
                    dx.tanh() * c / (s[0].cosh() * s[2].sinh() * s[2].tanh()),
                    dy * c / sq(s[2].sinh()) + sg * 2.0 * dx.tanh() * half_cosh(s) * a / (s[2].sinh() * s[2].tanh()),
                )
            },
        },
        AntiDeSitter => Closed {
            metric: |_, y| (sq(y.cosh()), -1.0),
            x2: |x, y| (-x.sin() * y.tanh(), x.cos()),
            x3: |x, y| (-x.cos() * y.tanh(), -x.sin()),
            h: |x, y| [y.sinh(), -x.sin() * y.cosh(), 1.0 - x.cos() * y.cosh()],
            omega: |y| y.cosh(),
            casimir: [1.0, 0.5, -0.5, -0.5],
            f2: |x1, y1, x2, y2| 1.0 - (x1 - x2).cos() * y1.cosh() * y2.cosh() + y1.sinh() * y2.sinh(),
            rule: |dx, dy, s, a, sg| {
                let c = s[1].cos() - s[0].cos() * s[2].cos();
                let h = half_cos(s) * (0.5 * a).sinh();
                (
                    dx.tan() * c / (s[0].cos() * s[2].sin() * s[2].tan())
                        + sg * 4.0 * dy.sinh() * h / (s[0].cos() * sq(s[2].sin())),
                    dy.sinh() * c / sq(s[2].sin()) + sg * 4.0 * dx.tan() * h / (s[2].sin() * s[2].tan()),
                )
            },
        },
        Minkowski => Closed {
            metric: |_, _| (1.0, -1.0),
            x2: |_, _| (0.0, 1.0),
            x3: |x, y| (-y, -x),
            h: |x, y| [y, -x, 0.5 * (x * x - y * y)],
            omega: |_| 1.0,
            casimir: [1.0, 0.5, -0.5, 0.0],
            f2: |x1, y1, x2, y2| 0.5 * (sq(x1 - x2) - sq(y1 - y2)),
            rule: |dx, dy, s, a, sg| {
                let f = flat_factor(s);
                (dx * f + sg * 2.0 * dy * a / sq(s[2]), dy * f + sg * 2.0 * dx * a / sq(s[2]))
            },
        },
        DeSitter => Closed {
            metric: |_, y| (sq(y.cos()), -1.0),
            x2: |x, y| (x.sinh() * y.tan(), x.cosh()),
            x3: |x, y| (-x.cosh() * y.tan(), -x.sinh()),
            h: |x, y| [y.sin(), -x.sinh() * y.cos(), x.cosh() * y.cos() - 1.0],
            omega: |y| y.cos(),
            casimir: [1.0, 0.5, -0.5, 0.5],
            f2: |x1, y1, x2, y2| (x1 - x2).cosh() * y1.cos() * y2.cos() + y1.sin() * y2.sin() - 1.0,
            rule: |dx, dy, s, a, sg| {
                let c = s[0].cosh() * s[2].cosh() - s[1].cosh();
                let h = half_cosh(s) * (0.5 * a).sinh();
                (
                    dx.tanh() * c / (s[0].cosh() * s[2].sinh() * s[2].tanh())
                        + sg * 4.0 * dy.sin() * h / (s[0].cosh() * sq(s[2].sinh())),
                    dy.sin() * c / sq(s[2].sinh()) + sg * 4.0 * dx.tanh() * h / (s[2].sinh() * s[2].tanh()),
                )
            },
        },
    }
}

fn grid() -> impl Iterator<Item = ParallelPoint> {
    GRID_X
        .into_iter()
        .flat_map(|x| GRID_Y.into_iter().map(move |y| ParallelPoint::new(x, y)))
}

fn at(p: ParallelPoint) -> String {
    format!("({}, {})", p.x, p.y)
}

fn at2(p: ParallelPoint, q: ParallelPoint) -> String {
    format!("({}, {}) ({}, {})", p.x, p.y, q.x, q.y)
}

/// Every comparison row for one space.
pub fn table_rows(space: CanonicalSpace) -> Result<Vec<TableRow>, KappaError> {
    let kp = space.kappa();
    let c = closed(space);
    let name = space.name();
    let mut rows = Vec::new();
    let mut push = |quantity: &str, sample: String, generic: f64, closed_form: f64| {
        rows.push(TableRow {
            space: name,
            quantity: quantity.to_string(),
            sample,
            generic,
            closed_form,
        })
    };

    let cas = casimir(&StructureConstants::numeric(kp));
    let monomials = [[1, 0, 0, 1, 0, 0, 0, 0], [0, 2, 0, 0, 0, 0, 0, 0], [0, 0, 2, 0, 0, 0, 0, 0], [0, 0, 0, 2, 0, 0, 0, 0]];
    for ((label, m), hand) in ["C[v3 v0]", "C[v1^2]", "C[v2^2]", "C[v3^2]"].iter().zip(monomials).zip(c.casimir) {
        push(label, String::new(), cas.coefficient(&m), hand);
    }
    let delta_c = coproduct(&cas).expect("one-slot Casimir");

    for p in grid() {
        let (gxx, gyy) = metric_coefficients(kp, p);
        let (hx, hy) = (c.metric)(p.x, p.y);
        push("g_xx", at(p), gxx, hx);
        push("g_yy", at(p), gyy, hy);
        for (g, hand) in [
            (Generator::V1, (1.0, 0.0)),
            (Generator::V2, (c.x2)(p.x, p.y)),
            (Generator::V3, (c.x3)(p.x, p.y)),
        ] {
            let v = vector_field(kp, g, p)?;
            let i = g.index();
            push(&format!("X{i}.x"), at(p), v.dx, hand.0);
            push(&format!("X{i}.y"), at(p), v.dy, hand.1);
        }
        let hand = (c.h)(p.x, p.y);
        for (i, g) in [Generator::V1, Generator::V2, Generator::V3].into_iter().enumerate() {
            push(&format!("h{}", i + 1), at(p), hamiltonian(kp, g, p), hand[i]);
        }
        push("omega", at(p), symplectic_density(kp, p), (c.omega)(p.y));
    }

    for p in grid() {
        for q in grid().filter(|&q| q != p) {
            let hand = (c.f2)(p.x, p.y, q.x, q.y);
            push("F2", at2(p, q), f2_closed_form(kp, p, q), hand);
            let realized = realize(kp, &delta_c, &[p, q]).expect("two points for a two-slot element");
            push("F2 (coproduct)", at2(p, q), realized, hand);
            for b in Branch::BOTH {
                let (dx, dy) = (q.x - p.x, q.y - p.y);
                let (tx, sy) = literal_rule(kp, dx, dy, RULE_SIDES, RULE_AREA, b)?;
                let (hx, hy) = (c.rule)(dx, dy, RULE_SIDES, RULE_AREA, b.sign());
                let tag = if b == Branch::Plus { "+" } else { "-" };
                push(&format!("rule.x{tag}"), at2(p, q), tx, hx);
                push(&format!("rule.y{tag}"), at2(p, q), sy, hy);
            }
        }
    }
    Ok(rows)
}

pub fn summarize(space: CanonicalSpace, rows: &[TableRow]) -> TableSummary {
    let worst = rows.iter().max_by(|a, b| a.discrepancy().total_cmp(&b.discrepancy()));
    TableSummary {
        space: space.name(),
        rows: rows.len(),
        max_discrepancy: worst.map_or(0.0, TableRow::discrepancy),
        worst_quantity: worst.map_or_else(String::new, |r| r.quantity.clone()),
    }
}

/// Writes rows as CSV with columns `space,quantity,sample,generic,closed_form,discrepancy`.
pub fn write_rows<W: Write>(w: W, rows: &[TableRow]) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["space", "quantity", "sample", "generic", "closed_form", "discrepancy"])?;
    for r in rows {
        out.write_record([
            r.space.to_string(),
            r.quantity.clone(),
            r.sample.clone(),
            crate::integrator::fmt17(r.generic),
            crate::integrator::fmt17(r.closed_form),
            crate::integrator::fmt17(r.discrepancy()),
        ])?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_h1_at_pi_over_six() {
        let rows = table_rows(CanonicalSpace::Sphere).unwrap();
        let r = rows
            .iter()
            .find(|r| r.quantity == "h1" && r.sample == at(ParallelPoint::new(0.5, FRAC_PI_6)))
            .unwrap();
        assert!((r.generic - 0.5).abs() < 1e-15);
        assert!((r.closed_form - 0.5).abs() < 1e-15);
    }

    #[test]
    fn every_space_agrees_with_its_closed_forms() {
        for s in CanonicalSpace::ALL {
            let rows = table_rows(s).unwrap();
            let sum = summarize(s, &rows);
            assert!(sum.max_discrepancy < 1e-12, "{}: {} ({})", s, sum.max_discrepancy, sum.worst_quantity);
        }
    }

    #[test]
    fn a_wrong_sign_is_caught() {
        let kp = CanonicalSpace::AntiDeSitter.kappa();
        let p = ParallelPoint::new(0.5, 0.4);
        let generic = hamiltonian(kp, Generator::V3, p);
        let wrong = 1.0 - p.x.cos() * p.y.cos();
        assert!((generic - wrong).abs() > 1e-3);
    }

    #[test]
    fn csv_has_header_and_one_line_per_row() {
        let rows = table_rows(CanonicalSpace::Galilean).unwrap();
        let mut buf = Vec::new();
        write_rows(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("space,quantity,sample,generic,closed_form,discrepancy\n"));
        assert_eq!(text.lines().count(), rows.len() + 1);
    }
}
