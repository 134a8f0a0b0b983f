//! Acceptance criteria AC1-AC10. Runs without the libtest harness so every
//! `[PASS]`/`[FAIL]` line is printed. The process fails when a criterion
//! fails in a way not listed in `KNOWN_FAILURES`, or when a listed failure
//! no longer matches its recorded characterization.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use cklh::coalgebra::{bracket, casimir, coproduct, realize, f2_closed_form, PolyElement, StructureConstants, KappaPoly};
use cklh::contraction;
use cklh::hamilton::{hamiltonian, hamiltonian_gradient, symplectic_density, system_rhs, vector_field, CoefficientSpec, Generator, VectorValue};
use cklh::integrator::Trajectory;
use cklh::kappa::{ck, ck_add, d_ck, d_sk, d_tk, d_vk, sk, sk_add, tk, vk, AddSign};
use cklh::space::{CanonicalSpace, KappaPair, ParallelPoint};
use cklh::superposition::{area_lhuillier, superpose_both_with_area, triangle_invariants, Branch};
use cklh::tables;
use cklh::verify::{draw_flow, suite_rng, SUPERPOSITION_STREAM};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 0;

struct Outcome {
    id: &'static str,
    passed: bool,
    detail: String,
    /// For a documented failure: whether the measured behaviour still matches it.
    characterized: Option<bool>,
}

fn outcome(id: &'static str, passed: bool, detail: String) -> Outcome {
    Outcome {
        id,
        passed,
        detail,
        characterized: None,
    }
}

fn rng(stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(SEED);
    r.set_stream(1000 + stream);
    r
}

// Oracle trigonometry from the circular and hyperbolic functions.
fn cos_k(k: f64, u: f64) -> f64 {
    if k > 0.0 {
        (k.sqrt() * u).cos()
    } else if k < 0.0 {
        ((-k).sqrt() * u).cosh()
    } else {
        1.0
    }
}

fn sin_k(k: f64, u: f64) -> f64 {
    if k > 0.0 {
        (k.sqrt() * u).sin() / k.sqrt()
    } else if k < 0.0 {
        ((-k).sqrt() * u).sinh() / (-k).sqrt()
    } else {
        u
    }
}

fn ambient(kp: KappaPair, p: ParallelPoint) -> [f64; 3] {
    let (k1, k12) = (kp.kappa1, kp.k12());
    [cos_k(k1, p.x) * cos_k(k12, p.y), sin_k(k1, p.x) * cos_k(k12, p.y), sin_k(k12, p.y)]
}

/// `F2` from the ambient bilinear form.
fn f2_oracle(kp: KappaPair, p: ParallelPoint, q: ParallelPoint) -> f64 {
    let (a, b) = (ambient(kp, p), ambient(kp, q));
    let (k1, k2) = (kp.kappa1, kp.kappa2);
    if k1 == 0.0 {
        0.5 * ((a[1] - b[1]).powi(2) + k2 * (a[2] - b[2]).powi(2))
    } else {
        let dot = a[0] * b[0] + k1 * a[1] * b[1] + k1 * k2 * a[2] * b[2];
        (1.0 - dot) / k1
    }
}

fn central(f: impl Fn(f64) -> f64, u: f64, h: f64) -> f64 {
    (f(u + h) - f(u - h)) / (2.0 * h)
}

fn five_point(f: impl Fn(f64) -> f64, u: f64) -> f64 {
    let h = 1e-3;
    (f(u - 2.0 * h) - 8.0 * f(u - h) + 8.0 * f(u + h) - f(u + 2.0 * h)) / (12.0 * h)
}

fn gradient(f: impl Fn(ParallelPoint) -> f64, p: ParallelPoint) -> (f64, f64) {
    (
        five_point(|x| f(ParallelPoint::new(x, p.y)), p.x),
        five_point(|y| f(ParallelPoint::new(p.x, y)), p.y),
    )
}

fn interior(r: &mut impl Rng) -> ParallelPoint {
    ParallelPoint::new(r.random_range(-1.2..=1.2), r.random_range(-1.0..=1.0))
}

fn field(kp: KappaPair, g: Generator, p: ParallelPoint) -> VectorValue {
    vector_field(kp, g, p).expect("interior point")
}

fn chart_distance(kp: KappaPair, a: ParallelPoint, b: ParallelPoint) -> f64 {
    let wrap = |k: f64, d: f64| if k > 0.0 { (d + PI).rem_euclid(2.0 * PI) - PI } else { d };
    wrap(kp.kappa1, a.x - b.x).abs().max(wrap(kp.k12(), a.y - b.y).abs())
}

fn ac1() -> Outcome {
    let mut r = rng(1);
    let start = Instant::now();
    let (mut abs, mut rel, mut oracle) = (0f64, 0f64, 0f64);
    for _ in 0..10_000 {
        let k = r.random_range(-4.0..=4.0);
        let u = r.random_range(-3.0..=3.0);
        let v = r.random_range(-3.0..=3.0);
        let (c, s) = (ck(k, u), sk(k, u));
        let (cv, sv) = (ck(k, v), sk(k, v));
        let mut track = |res: f64, scale: f64| {
            abs = abs.max(res.abs());
            rel = rel.max(res.abs() / scale.max(1.0));
        };
        track(c * c + k * s * s - 1.0, c * c);
        track(ck(k, 2.0 * u) - (c * c - k * s * s), c * c);
        track(sk(k, 2.0 * u) - 2.0 * s * c, (s * c).abs());
        for (sign, w) in [(AddSign::Plus, u + v), (AddSign::Minus, u - v)] {
            track(ck_add(k, u, v, sign) - ck(k, w), (c * cv).abs().max((k * s * sv).abs()));
            track(sk_add(k, u, v, sign) - sk(k, w), (s * cv).abs().max((c * sv).abs()));
        }
        oracle = oracle
            .max((c - cos_k(k, u)).abs() / c.abs().max(1.0))
            .max((s - sin_k(k, u)).abs() / s.abs().max(1.0));
    }
    let elapsed = start.elapsed();
    let passed = abs < 1e-12 && elapsed < Duration::from_secs(1);
    let mut o = outcome(
        "AC1",
        passed,
        format!(
            "trig identities over 1e4 (k,u,v): abs residual {abs:.3e} (< 1e-12), relative to largest term {rel:.3e}, \
             oracle cos/cosh rel error {oracle:.3e}, runtime {:.1} ms",
            elapsed.as_secs_f64() * 1e3
        ),
    );
    // Known: terms reach cosh(6)^2 ~ 4e4 whose ulp is ~7e-12.
    o.characterized = Some(rel < 1e-14 && abs < 1e-9 && oracle < 1e-14 && elapsed < Duration::from_secs(1));
    o
}

fn ac2() -> Outcome {
    let mut r = rng(2);
    let mut worst = 0f64;
    let err = |f: &dyn Fn(f64) -> f64, d: f64, u: f64| (d - central(f, u, 1e-5)).abs() / d.abs().max(1.0);
    let mut tk_samples = 0;
    for _ in 0..1000 {
        let k = r.random_range(-4.0..=4.0);
        let u = r.random_range(-3.0..=3.0);
        worst = worst
            .max(err(&|t| ck(k, t), d_ck(k, u), u))
            .max(err(&|t| sk(k, t), d_sk(k, u), u))
            .max(err(&|t| vk(k, t), d_vk(k, u), u));
        if ck(k, u).abs() >= 0.2 {
            tk_samples += 1;
            worst = worst.max(err(&|t| tk(k, t).unwrap_or(f64::NAN), d_tk(k, u).unwrap(), u));
        }
    }
    outcome(
        "AC2",
        worst < 1e-6,
        format!("derivatives vs central differences over 1e3 samples: max rel error {worst:.3e} (< 1e-6); Tk at {tk_samples} samples with |Ck| >= 0.2"),
    )
}

fn ac3() -> Outcome {
    let mut worst = 0f64;
    for space in CanonicalSpace::ALL {
        let kp = space.kappa();
        let mut r = rng(3);
        for _ in 0..100 {
            let p = interior(&mut r);
            // [X, Y]^i = X^j d_j Y^i - Y^j d_j X^i
            let lie = |a: Generator, b: Generator| {
                let jac = |g: Generator| {
                    let dx = |h: f64| field(kp, g, ParallelPoint::new(p.x + h, p.y));
                    let dy = |h: f64| field(kp, g, ParallelPoint::new(p.x, p.y + h));
                    let e = 1e-5;
                    (
                        (1.0 / (2.0 * e)) * (dx(e) - dx(-e)),
                        (1.0 / (2.0 * e)) * (dy(e) - dy(-e)),
                    )
                };
                let (xa, xb) = (field(kp, a, p), field(kp, b, p));
                let (ja, jb) = (jac(a), jac(b));
                (xa.dx * jb.0 + xa.dy * jb.1) - (xb.dx * ja.0 + xb.dy * ja.1)
            };
            let (x1, x2, x3) = (field(kp, Generator::V1, p), field(kp, Generator::V2, p), field(kp, Generator::V3, p));
            let checks = [
                lie(Generator::V3, Generator::V1) - x2,
                lie(Generator::V3, Generator::V2) - (-kp.kappa2) * x1,
                lie(Generator::V1, Generator::V2) - kp.kappa1 * x3,
            ];
            worst = checks.iter().fold(worst, |w, c| w.max(c.max_abs()));
        }
    }
    outcome(
        "AC3",
        worst < 1e-6,
        format!("finite-difference Lie brackets at 100 points x 9 spaces: max abs error {worst:.3e} (< 1e-6)"),
    )
}

fn ac4() -> Outcome {
    let (mut contraction_res, mut gradient_check, mut poisson) = (0f64, 0f64, 0f64);
    for space in CanonicalSpace::ALL {
        let kp = space.kappa();
        let mut r = rng(4);
        for _ in 0..100 {
            let p = interior(&mut r);
            let rho = symplectic_density(kp, p);
            for g in Generator::FIELDS {
                let x = field(kp, g, p);
                let (hx, hy) = hamiltonian_gradient(kp, g, p);
                // i_X (rho dx ^ dy) = rho (X^x dy - X^y dx)
                contraction_res = contraction_res.max((-rho * x.dy - hx).abs()).max((rho * x.dx - hy).abs());
                let (fx, fy) = gradient(|q| hamiltonian(kp, g, q), p);
                gradient_check = gradient_check.max((fx - hx).abs()).max((fy - hy).abs());
            }
            let grads = Generator::FIELDS.map(|g| gradient(|q| hamiltonian(kp, g, q), p));
            let h = |g: Generator| hamiltonian(kp, g, p);
            let pb = |a: usize, b: usize| (grads[a].0 * grads[b].1 - grads[a].1 * grads[b].0) / rho;
            let (h0, h1, h2, h3) = (1.0, h(Generator::V1), h(Generator::V2), h(Generator::V3));
            let expected = [
                (pb(0, 1), h0 - kp.kappa1 * h3),
                (pb(0, 2), h2),
                (pb(1, 2), -kp.kappa2 * h1),
            ];
            poisson = expected.iter().fold(poisson, |w, (a, b)| w.max((a - b).abs()));
        }
    }
    outcome(
        "AC4",
        contraction_res < 1e-10 && poisson < 1e-8,
        format!(
            "i_X omega - dh at 100 points x 9 spaces: {contraction_res:.3e} (< 1e-10), analytic dh vs 5-point stencil {gradient_check:.3e}; \
             Poisson table {poisson:.3e} (< 1e-8)"
        ),
    )
}

fn ac5() -> Outcome {
    let sc = StructureConstants::<KappaPoly>::symbolic();
    let c = casimir(&sc);
    let nonzero: usize = Generator::ALL
        .into_iter()
        .map(|g| bracket(&sc, &c, &PolyElement::generator(1, 0, g)).unwrap().terms().count())
        .sum();
    let (mut realized, mut closed, mut oracle) = (0f64, 0f64, 0f64);
    for space in CanonicalSpace::ALL {
        let kp = space.kappa();
        let cas = casimir(&StructureConstants::numeric(kp));
        let dc = coproduct(&cas).unwrap();
        let mut r = rng(5);
        for _ in 0..10_000 {
            realized = realized.max(realize(kp, &cas, &[interior(&mut r)]).unwrap().abs());
        }
        for _ in 0..1000 {
            let (p, q) = (interior(&mut r), interior(&mut r));
            let v = realize(kp, &dc, &[p, q]).unwrap();
            closed = closed.max((v - f2_closed_form(kp, p, q)).abs());
            oracle = oracle.max((v - f2_oracle(kp, p, q)).abs());
        }
    }
    outcome(
        "AC5",
        nonzero == 0 && realized < 1e-12 && closed < 1e-10 && oracle < 1e-10,
        format!(
            "symbolic {{C, v_a}} nonzero coefficients {nonzero}; D(C) at 1e4 points x 9 spaces {realized:.3e} (< 1e-12); \
             D2(Delta C) vs closed form {closed:.3e}, vs ambient form {oracle:.3e} (< 1e-10)"
        ),
    )
}

fn drift(kp: KappaPair, t: &[Trajectory; 3]) -> f64 {
    let mut worst = 0f64;
    for (a, b) in [(0, 1), (1, 2), (0, 2)] {
        let f0 = f2_oracle(kp, t[a].points[0], t[b].points[0]);
        for (p, q) in t[a].points.iter().zip(&t[b].points) {
            worst = worst.max((f2_oracle(kp, *p, *q) - f0).abs());
        }
    }
    worst
}

fn ac6() -> Outcome {
    let mut max_drift = 0f64;
    let mut lines = Vec::new();
    let mut failing = Vec::new();
    let mut characterized = true;
    for space in CanonicalSpace::ALL {
        let kp = space.kappa();
        let mut r = suite_rng(SEED, 10, Some(space));
        let (runs, _) = draw_flow(kp, &mut r, [0.0, 1.0], &[1e-3, 0.05, 0.025]).expect("flow");
        let d = drift(kp, &runs[0]);
        max_drift = max_drift.max(d);
        let (dc, df) = (drift(kp, &runs[1]), drift(kp, &runs[2]));
        let ratio = dc / df;
        let scaling_ok = if space.is_newtonian() {
            dc.max(df) < 1e-12
        } else {
            (12.0..=20.0).contains(&ratio)
        };
        if !scaling_ok {
            failing.push(space.name());
            characterized &= space.kappa().kappa1 == 0.0 && (28.0..=36.0).contains(&ratio);
        }
        lines.push(if space.is_newtonian() {
            format!("{}: drift {d:.1e}, exact at coarse steps ({:.1e})", space.name(), dc.max(df))
        } else {
            format!("{}: drift {d:.1e}, ratio {ratio:.2}", space.name())
        });
    }
    let passed = max_drift < 1e-6 && failing.is_empty();
    let mut o = outcome(
        "AC6",
        passed,
        format!(
            "F2 drift at step 1e-3 max {max_drift:.3e} (< 1e-6); step 0.05 -> 0.025 ratio in [12, 20]; failing: [{}]\n       {}",
            failing.join(", "),
            lines.join("\n       ")
        ),
    );
    // Known: flat non-Newtonian spaces converge at fifth order (ratio ~32).
    o.characterized = Some(characterized && max_drift < 1e-6 && failing == ["euclidean", "minkowski"]);
    o
}

fn ac7() -> Outcome {
    let mut worst = 0f64;
    let mut slowest = Duration::ZERO;
    for space in CanonicalSpace::ALL {
        let kp = space.kappa();
        let start = Instant::now();
        let mut r = suite_rng(SEED, SUPERPOSITION_STREAM, Some(space));
        let (runs, _) = draw_flow(kp, &mut r, [0.0, 1.0], &[1e-3]).expect("flow");
        let t = &runs[0];
        let tri = triangle_invariants(kp, t[0].points[0], t[1].points[0], t[2].points[0]).unwrap();
        let last = t[0].len() - 1;
        for k in 1..=100 {
            let i = k * last / 100;
            let pair = superpose_both_with_area(kp, t[1].points[i], t[2].points[i], tri.s1, tri.s2, tri.area);
            let best = Branch::BOTH
                .iter()
                .filter_map(|&b| pair.get(b).ok())
                .map(|q| chart_distance(kp, q, t[0].points[i]))
                .fold(f64::INFINITY, f64::min);
            worst = worst.max(best);
        }
        slowest = slowest.max(start.elapsed());
    }
    outcome(
        "AC7",
        worst < 1e-5 && slowest < Duration::from_secs(10),
        format!(
            "best-branch reconstruction at 100 samples x 9 spaces: max error {worst:.3e} (< 1e-5); slowest space {:.0} ms (< 10 s)",
            slowest.as_secs_f64() * 1e3
        ),
    )
}

fn ac8() -> Outcome {
    let kp = KappaPair::new(0.0, 1.0);
    let mut r = rng(8);
    let mut worst = 0f64;
    let mut track = |a: f64, b: f64| worst = worst.max((a - b).abs());
    let cas = casimir(&StructureConstants::numeric(kp));
    let dc = coproduct(&cas).unwrap();
    let mut triangles = 0;
    while triangles < 100 {
        let [p1, p2, p3] = [(); 3].map(|_| ParallelPoint::new(r.random_range(-2.0..=2.0), r.random_range(-2.0..=2.0)));
        let (x, y) = (p1.x, p1.y);
        for (g, (ex, ey)) in [(Generator::V1, (1.0, 0.0)), (Generator::V2, (0.0, 1.0)), (Generator::V3, (y, -x))] {
            let v = field(kp, g, p1);
            track(v.dx, ex);
            track(v.dy, ey);
        }
        let b = [(); 3].map(|_| r.random_range(-1.0..=1.0));
        let rhs = system_rhs(kp, &CoefficientSpec::constant(b[0], b[1], b[2]), 0.0, p1).unwrap();
        track(rhs.dx, b[0] + b[2] * y);
        track(rhs.dy, b[1] - b[2] * x);
        track(hamiltonian(kp, Generator::V1, p1), y);
        track(hamiltonian(kp, Generator::V2, p1), -x);
        track(hamiltonian(kp, Generator::V3, p1), 0.5 * (x * x + y * y));
        track(symplectic_density(kp, p1), 1.0);
        track(realize(kp, &cas, &[p1]).unwrap(), 0.0);
        let d = |a: ParallelPoint, b: ParallelPoint| (a.x - b.x).hypot(a.y - b.y);
        track(realize(kp, &dc, &[p1, p2]).unwrap(), 0.5 * d(p1, p2).powi(2));

        let (s1, s2, s3) = (d(p1, p2), d(p1, p3), d(p2, p3));
        let heron = 0.5 * ((p2.x - p1.x) * (p3.y - p1.y) - (p3.x - p1.x) * (p2.y - p1.y)).abs();
        if heron < 0.05 || s3 < 0.5 {
            continue;
        }
        triangles += 1;
        track(area_lhuillier(kp, s1, s2, s3).unwrap(), heron);
        // The two intersections of the circles |q - p2| = s1 and |q - p3| = s2.
        let (ux, uy) = ((p3.x - p2.x) / s3, (p3.y - p2.y) / s3);
        let a = (s1 * s1 - s2 * s2 + s3 * s3) / (2.0 * s3);
        let h = (s1 * s1 - a * a).max(0.0).sqrt();
        let cands = [1.0, -1.0].map(|sg| ParallelPoint::new(p2.x + a * ux - sg * h * uy, p2.y + a * uy + sg * h * ux));
        let pair = superpose_both_with_area(kp, p2, p3, s1, s2, heron);
        let (rp, rm) = (pair.plus.unwrap(), pair.minus.unwrap());
        let direct = d(rp, cands[0]).max(d(rm, cands[1]));
        let swapped = d(rp, cands[1]).max(d(rm, cands[0]));
        track(direct.min(swapped), 0.0);
        track(d(rp, p1).min(d(rm, p1)), 0.0);
    }
    let heron = area_lhuillier(kp, 3.0, 4.0, 5.0).unwrap();
    let heron_err = (heron - 6.0).abs();
    outcome(
        "AC8",
        worst < 1e-12 && heron_err <= 4.0 * f64::EPSILON * 6.0,
        format!("Euclidean fields, Hamiltonians, Casimir, F2, area and rule at 100 triangles: max {worst:.3e} (< 1e-12); 3-4-5 area {heron:?}"),
    )
}

fn ac9() -> Outcome {
    let rows = contraction::sweep(&contraction::DEFAULT_DELTAS).unwrap();
    let max = contraction::max_difference(&rows);
    let worst = rows.iter().max_by(|a, b| a.difference().total_cmp(&b.difference())).unwrap();
    let mut trig = 0f64;
    for u in [-2.0, -0.4, 0.3, 1.1, 2.5] {
        for k in [1e-7, -1e-7] {
            trig = trig.max((ck(k, u) - 1.0).abs()).max((sk(k, u) - u).abs()).max((vk(k, u) - 0.5 * u * u).abs());
        }
    }
    outcome(
        "AC9",
        max < 1e-5 && trig < 1e-5,
        format!(
            "{} rows at kappa = +-1e-7: max difference {max:.3e} ({} at {:?} -> {}) (< 1e-5); trig kernels vs flat forms {trig:.3e}",
            rows.len(),
            worst.quantity,
            worst.varied,
            worst.limit
        ),
    )
}

fn ac10() -> Outcome {
    let mut max = 0f64;
    let mut count = 0;
    let mut oracle = 0f64;
    for space in CanonicalSpace::ALL {
        let rows = tables::table_rows(space).unwrap();
        count += rows.len();
        max = rows.iter().map(|r| r.discrepancy()).fold(max, f64::max);
        let kp = space.kappa();
        for r in rows.iter().filter(|r| r.quantity == "F2") {
            let pts: Vec<f64> = r.sample.split(|c: char| "(), ".contains(c)).filter(|s| !s.is_empty()).map(|s| s.parse().unwrap()).collect();
            let (p, q) = (ParallelPoint::new(pts[0], pts[1]), ParallelPoint::new(pts[2], pts[3]));
            oracle = oracle.max((r.generic - f2_oracle(kp, p, q)).abs());
        }
    }
    let kp = CanonicalSpace::Sphere.kappa();
    let h1 = hamiltonian(kp, Generator::V1, ParallelPoint::new(0.5, PI / 6.0));
    outcome(
        "AC10",
        max < 1e-12 && oracle < 1e-12 && (h1 - 0.5).abs() < 1e-15,
        format!("{count} table rows x 9 spaces: max discrepancy {max:.3e} (< 1e-12); F2 rows vs ambient form {oracle:.3e}; sphere h1(y = pi/6) = {h1}"),
    )
}

/// Criteria that cannot be met as stated; see the decisions ledger.
const KNOWN_FAILURES: [&str; 2] = ["AC1", "AC6"];

fn main() -> ExitCode {
    let start = Instant::now();
    let criteria: [fn() -> Outcome; 10] = [ac1, ac2, ac3, ac4, ac5, ac6, ac7, ac8, ac9, ac10];
    let mut unexpected = Vec::new();
    println!("\nrunning acceptance criteria (seed {SEED})");
    for f in criteria {
        let o = f();
        println!("[{}] {} {}", if o.passed { "PASS" } else { "FAIL" }, o.id, o.detail);
        if !o.passed {
            let known = KNOWN_FAILURES.contains(&o.id) && o.characterized == Some(true);
            if known {
                println!("       known failure, behaviour matches its recorded analysis");
            } else {
                unexpected.push(o.id);
            }
        }
    }
    println!("acceptance finished in {:.2} s", start.elapsed().as_secs_f64());
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("unexpected failures: {}", unexpected.join(", "));
        ExitCode::FAILURE
    }
}
