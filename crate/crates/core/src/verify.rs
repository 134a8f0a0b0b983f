//! Seeded verification suites over every module.
//!
//! Each suite reports the largest residual it saw against a named tolerance;
//! a suite passes when `max_residual <= tolerance`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::coalgebra::{
    bracket, casimir, coproduct, f2_closed_form, f2_permuted, realize, KappaPoly, Permutation, PolyElement,
    StructureConstants,
};
use crate::contraction;
use crate::hamilton::{
    bracket_table, hamiltonian, hamiltonian_gradient, hamiltonian_residual_with, lie_bracket_numeric,
    lie_bracket_predicted, poisson_bracket, system_rhs, vector_field, CoefficientSpec, Generator, NumericField,
    TimeFunction,
};
use crate::integrator::{integrate, invariant_drift, IntegrateError, Trajectory};
use crate::kappa::{self, ck, ck_add, d_ck, d_sk, d_tk, d_vk, sk, sk_add, tk, vk, AddSign, KappaError};
use crate::space::{
    act_on_parallel, ambient_to_parallel, geodesic_distance, parallel_to_ambient, subgroup_exp, CanonicalSpace,
    IsometryGenerator, KappaPair, ParallelPoint,
};
use crate::superposition::{
    angle_certificate, area_lhuillier, newtonian_y_moved, superpose_both_with_area, superpose_chart_literal,
    to_moved_frame, triangle_invariants, Branch, SuperpositionError,
};
use crate::tables;

/// Gradient of `h_i`, replaceable to exercise the Hamiltonian suite.
pub type GradientFn = fn(KappaPair, Generator, ParallelPoint) -> (f64, f64);

macro_rules! tolerances {
    ($($name:ident = $default:expr),* $(,)?) => {
        /// Per-suite tolerances. Field names are the names accepted by `--tol`.
        #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
        #[serde(default, deny_unknown_fields)]
        pub struct Tolerances {
            $(pub $name: f64,)*
        }

        impl Default for Tolerances {
            fn default() -> Self {
                Self { $($name: $default,)* }
            }
        }

        impl Tolerances {
            pub const NAMES: &'static [&'static str] = &[$(stringify!($name),)*];

            pub fn get(&self, name: &str) -> Option<f64> {
                match name {
                    $(stringify!($name) => Some(self.$name),)*
                    _ => None,
                }
            }

            pub fn set(&mut self, name: &str, value: f64) -> Result<(), UnknownTolerance> {
                match name {
                    $(stringify!($name) => self.$name = value,)*
                    _ => return Err(UnknownTolerance(name.to_string())),
                }
                Ok(())
            }
        }
    };
}

tolerances! {
    trig_identity = 1e-12,
    trig_derivative = 1e-6,
    chart_round_trip = 1e-10,
    isometry = 1e-9,
    lie_bracket = 1e-6,
    hamiltonian_residual = 1e-10,
    poisson_table = 1e-8,
    casimir_centrality = 0.0,
    casimir_realization = 1e-12,
    coproduct_closed_form = 1e-10,
    conservation = 1e-6,
    drift_scaling = 4.0,
    superposition = 1e-5,
    angle_identity = 1e-8,
    newtonian_y = 1e-10,
    euclidean = 1e-12,
    contraction = 1e-5,
    tables = 1e-12,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown tolerance `{0}`")]
pub struct UnknownTolerance(pub String);

/// Sample counts and steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Sampling {
    pub trig_pairs: usize,
    pub derivative_samples: usize,
    pub interior_points: usize,
    pub casimir_points: usize,
    pub pair_samples: usize,
    pub flow_step: f64,
    /// Coarse and fine steps for the drift-scaling ratio.
    pub scaling_steps: [f64; 2],
    pub superposition_samples: usize,
    pub triangles: usize,
}

impl Default for Sampling {
    fn default() -> Self {
        Self {
            trig_pairs: 10_000,
            derivative_samples: 1_000,
            interior_points: 100,
            casimir_points: 10_000,
            pair_samples: 1_000,
            flow_step: 1e-3,
            scaling_steps: [0.05, 0.025],
            superposition_samples: 100,
            triangles: 100,
        }
    }
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub seed: u64,
    pub spaces: Vec<CanonicalSpace>,
    pub tolerances: Tolerances,
    pub sampling: Sampling,
    pub gradient: GradientFn,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            spaces: CanonicalSpace::ALL.to_vec(),
            tolerances: Tolerances::default(),
            sampling: Sampling::default(),
            gradient: hamiltonian_gradient,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteResult {
    pub suite: &'static str,
    pub space: Option<&'static str>,
    pub max_residual: f64,
    pub tolerance: f64,
    pub samples: usize,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub tolerances: Tolerances,
    pub suites: Vec<SuiteResult>,
    pub passed: bool,
}

impl VerifyReport {
    pub fn failures(&self) -> impl Iterator<Item = &SuiteResult> {
        self.suites.iter().filter(|s| !s.passed)
    }
}

/// A suite that could not run to completion, e.g. an integration that hit a pole.
#[derive(Debug, thiserror::Error)]
pub enum SuiteError {
    #[error(transparent)]
    Kappa(#[from] KappaError),
    #[error(transparent)]
    Integrate(#[from] IntegrateError),
    #[error(transparent)]
    Superposition(#[from] SuperpositionError),
    #[error(transparent)]
    Space(#[from] crate::space::SpaceError),
}

fn result(
    suite: &'static str,
    space: Option<CanonicalSpace>,
    max_residual: f64,
    tolerance: f64,
    samples: usize,
    note: Option<String>,
) -> SuiteResult {
    SuiteResult {
        suite,
        space: space.map(CanonicalSpace::name),
        max_residual,
        tolerance,
        samples,
        passed: max_residual <= tolerance,
        note,
    }
}

/// A generator with its own stream for each (suite, space) so suites are
/// reproducible independently of which others run.
pub fn suite_rng(seed: u64, suite: u64, space: Option<CanonicalSpace>) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let idx = space.map_or(0, |s| 1 + CanonicalSpace::ALL.iter().position(|&t| t == s).unwrap() as u64);
    rng.set_stream(suite * 16 + idx);
    rng
}

/// Stream of the superposition suite; `cklh superpose` draws from the same one.
pub const SUPERPOSITION_STREAM: u64 = 11;

/// Random point clear of the chart poles.
pub fn interior_point(rng: &mut impl Rng) -> ParallelPoint {
    ParallelPoint::new(rng.random_range(-1.2..=1.2), rng.random_range(-1.0..=1.0))
}

/// Three points with pairwise time-like separations on Lorentzian spaces and
/// a generic triangle otherwise.
pub fn random_triangle(kp: KappaPair, rng: &mut impl Rng) -> [ParallelPoint; 3] {
    if kp.kappa2 < 0.0 {
        let x0 = rng.random_range(-0.5..=0.5);
        let offsets = [0.0, 0.7 + rng.random_range(-0.1..=0.1), 1.6 + rng.random_range(-0.1..=0.1)];
        offsets.map(|o| ParallelPoint::new(x0 + o, 0.2 * rng.random_range(-1.0..=1.0)))
    } else {
        [(); 3].map(|_| ParallelPoint::new(rng.random_range(-1.0..=1.0), rng.random_range(-0.4..=0.4)))
    }
}

/// Sinusoidal coefficients with amplitudes up to 0.4 and frequencies in [1, 3].
pub fn random_sinusoids(rng: &mut impl Rng) -> CoefficientSpec {
    let mut f = || TimeFunction::Sinusoid {
        amplitude: rng.random_range(0.1..=0.4),
        omega: rng.random_range(1.0..=3.0),
        phase: rng.random_range(0.0..=std::f64::consts::TAU),
    };
    CoefficientSpec {
        b1: f(),
        b2: f(),
        b3: f(),
    }
}

/// Difference between two chart points, modulo the chart periods.
pub fn chart_error(kp: KappaPair, a: ParallelPoint, b: ParallelPoint) -> f64 {
    let dx = kappa::wrap_periodic(kp.kappa1, a.x - b.x);
    let dy = kappa::wrap_periodic(kp.k12(), a.y - b.y);
    dx.abs().max(dy.abs())
}

pub fn run_all(opts: &VerifyOptions) -> Result<VerifyReport, SuiteError> {
    let mut suites = vec![trig_identity(opts), trig_derivative(opts)?];
    for &s in &opts.spaces {
        suites.push(chart_round_trip(opts, s)?);
        suites.push(isometry(opts, s)?);
        suites.push(lie_brackets(opts, s)?);
        suites.push(hamiltonian_suite(opts, s)?);
        suites.push(poisson_table(opts, s)?);
    }
    suites.push(casimir_centrality(opts));
    for &s in &opts.spaces {
        suites.push(casimir_realization(opts, s));
        suites.push(coproduct_closed_form(opts, s));
        suites.extend(conservation(opts, s)?);
        suites.push(superposition_flow(opts, s)?);
        suites.push(triangle_suite(opts, s)?);
    }
    suites.push(euclidean(opts)?);
    suites.push(contraction_suite(opts)?);
    for &s in &opts.spaces {
        suites.push(tables_suite(opts, s)?);
    }
    let passed = suites.iter().all(|s| s.passed);
    Ok(VerifyReport {
        seed: opts.seed,
        tolerances: opts.tolerances.clone(),
        suites,
        passed,
    })
}

/// Largest absolute residuals of the trigonometric identities, and the same
/// residuals divided by the magnitude of the largest term.
pub fn trig_identity_residuals(kappa: f64, u: f64, v: f64) -> (f64, f64) {
    let (c, s) = (ck(kappa, u), sk(kappa, u));
    let (c2, s2) = (ck(kappa, 2.0 * u), sk(kappa, 2.0 * u));
    let mut abs = 0f64;
    let mut rel = 0f64;
    let mut track = |r: f64, scale: f64| {
        abs = abs.max(r.abs());
        rel = rel.max(r.abs() / scale.max(1.0));
    };
    track(c * c + kappa * s * s - 1.0, c * c);
    track(c2 - (c * c - kappa * s * s), c * c);
    track(s2 - 2.0 * s * c, (s * c).abs());
    for sign in [AddSign::Plus, AddSign::Minus] {
        let w = u + sign.value() * v;
        let scale = (c * ck(kappa, v)).abs().max((kappa * s * sk(kappa, v)).abs());
        track(ck_add(kappa, u, v, sign) - ck(kappa, w), scale);
        let scale = (s * ck(kappa, v)).abs().max((c * sk(kappa, v)).abs());
        track(sk_add(kappa, u, v, sign) - sk(kappa, w), scale);
    }
    (abs, rel)
}

fn trig_identity(opts: &VerifyOptions) -> SuiteResult {
    let mut rng = suite_rng(opts.seed, 1, None);
    let n = opts.sampling.trig_pairs;
    let (mut abs, mut rel) = (0f64, 0f64);
    for _ in 0..n {
        let kappa = rng.random_range(-4.0..=4.0);
        let u = rng.random_range(-3.0..=3.0);
        let v = rng.random_range(-3.0..=3.0);
        let (a, r) = trig_identity_residuals(kappa, u, v);
        abs = abs.max(a);
        rel = rel.max(r);
    }
    result(
        "trig_identity",
        None,
        abs,
        opts.tolerances.trig_identity,
        n,
        Some(format!("absolute residual; relative to the largest term: {rel:.3e}")),
    )
}

/// Relative error of one analytic derivative against a central difference,
/// floored at magnitude 1.
pub fn derivative_error(f: impl Fn(f64) -> f64, df: f64, u: f64) -> f64 {
    let h = 1e-5;
    let fd = (f(u + h) - f(u - h)) / (2.0 * h);
    (df - fd).abs() / df.abs().max(1.0)
}

fn trig_derivative(opts: &VerifyOptions) -> Result<SuiteResult, SuiteError> {
    let mut rng = suite_rng(opts.seed, 2, None);
    let n = opts.sampling.derivative_samples;
    let mut worst = 0f64;
    for _ in 0..n {
        let kappa = rng.random_range(-4.0..=4.0);
        let u = rng.random_range(-3.0..=3.0);
        worst = worst
            .max(derivative_error(|t| ck(kappa, t), d_ck(kappa, u), u))
            .max(derivative_error(|t| sk(kappa, t), d_sk(kappa, u), u))
            .max(derivative_error(|t| vk(kappa, t), d_vk(kappa, u), u));
        if ck(kappa, u).abs() >= 0.2 {
            let d = d_tk(kappa, u)?;
            worst = worst.max(derivative_error(|t| tk(kappa, t).unwrap_or(f64::NAN), d, u));
        }
    }
    Ok(result(
        "trig_derivative",
        None,
        worst,
        opts.tolerances.trig_derivative,
        n,
        Some("Tk skipped where |Ck| < 0.2".into()),
    ))
}

fn chart_round_trip(opts: &VerifyOptions, space: CanonicalSpace) -> Result<SuiteResult, SuiteError> {
    let kp = space.kappa();
    let mut rng = suite_rng(opts.seed, 3, Some(space));
    let n = opts.sampling.interior_points;
    let mut worst = 0f64;
    for _ in 0..n {
        let p = interior_point(&mut rng);
        let a = parallel_to_ambient(kp, p);
        worst = worst.max(a.constraint_residual(kp));
        worst = worst.max(chart_error(kp, ambient_to_parallel(kp, a)?, p));
    }
    Ok(result("chart_round_trip", Some(space), worst, opts.tolerances.chart_round_trip, n, None))
}

fn isometry(opts: &VerifyOptions, space: CanonicalSpace) -> Result<SuiteResult, SuiteError> {
    let kp = space.kappa();
    let mut rng = suite_rng(opts.seed, 4, Some(space));
    let n = opts.sampling.interior_points;
    let mut worst = 0f64;
    for _ in 0..n {
        let [p, q, _] = random_triangle(kp, &mut rng);
        let g = subgroup_exp(kp, IsometryGenerator::P1, rng.random_range(-0.5..=0.5))
            * subgroup_exp(kp, IsometryGenerator::P2, rng.random_range(-0.3..=0.3))
            * subgroup_exp(kp, IsometryGenerator::J12, rng.random_range(-0.3..=0.3));
        worst = worst.max(g.isometry_residual(kp));
        let d0 = geodesic_distance(kp, p, q)?;
        let d1 = geodesic_distance(kp, act_on_parallel(kp, &g, p)?, act_on_parallel(kp, &g, q)?)?;
        worst = worst.max((d1 - d0).abs());
    }
    Ok(result(
        "isometry",
        Some(space),
        worst,
        opts.tolerances.isometry,
        n,
        Some("metric preservation and distance invariance".into()),
    ))
}

fn lie_brackets(opts: &VerifyOptions, space: CanonicalSpace) -> Result<SuiteResult, SuiteError> {
    let kp = space.kappa();
    let mut rng = suite_rng(opts.seed, 5, Some(space));
    let n = opts.sampling.interior_points;
    let mut worst = 0f64;
    for _ in 0..n {
        let p = interior_point(&mut rng);
        for (i, j) in [(Generator::V3, Generator::V1), (Generator::V3, Generator::V2), (Generator::V1, Generator::V2)] {
            let e = lie_bracket_numeric(kp, i, j, p)? - lie_bracket_predicted(kp, i, j, p)?;
            worst = worst.max(e.max_abs());
        }
    }
    Ok(result("lie_bracket", Some(space), worst, opts.tolerances.lie_bracket, n, None))
}

fn hamiltonian_suite(opts: &VerifyOptions, space: CanonicalSpace) -> Result<SuiteResult, SuiteError> {
    let kp = space.kappa();
    let mut rng = suite_rng(opts.seed, 6, Some(space));
    let n = opts.sampling.interior_points;
    let mut worst = 0f64;
    for _ in 0..n {
        let p = interior_point(&mut rng);
        for g in Generator::FIELDS {
            let (rx, ry) = hamiltonian_residual_with(kp, g, p, opts.gradient)?;
            worst = worst.max(rx.abs()).max(ry.abs());
        }
    }
    Ok(result("hamiltonian_residual", Some(space), worst, opts.tolerances.hamiltonian_residual, n, None))
}

fn poisson_table(opts: &VerifyOptions, space: CanonicalSpace) -> Result<SuiteResult, SuiteError> {
    let kp = space.kappa();
    let mut rng = suite_rng(opts.seed, 7, Some(space));
    let n = opts.sampling.interior_points;
    let h = |g: Generator| NumericField(move |p: ParallelPoint| hamiltonian(kp, g, p));
    let mut worst = 0f64;
    for _ in 0..n {
        let p = interior_point(&mut rng);
        for a in Generator::FIELDS {
            for b in Generator::FIELDS {
                let lhs = poisson_bracket(kp, &h(a), &h(b), p)?;
                let rhs: f64 = bracket_table(kp, a, b)
                    .iter()
                    .zip(Generator::ALL)
                    .map(|(c, g)| c * hamiltonian(kp, g, p))
                    .sum();
                worst = worst.max((lhs - rhs).abs());
            }
        }
    }
    Ok(result(
        "poisson_table",
        Some(space),
        worst,
        opts.tolerances.poisson_table,
        n,
        Some("brackets from central differences of h_i".into()),
    ))
}

fn casimir_centrality(opts: &VerifyOptions) -> SuiteResult {
    let sc = StructureConstants::<KappaPoly>::symbolic();
    let c = casimir(&sc);
    let nonzero: usize = Generator::ALL
        .into_iter()
        .map(|g| {
            let b = bracket(&sc, &c, &PolyElement::generator(1, 0, g)).expect("one slot");
            b.terms().count()
        })
        .sum();
    result(
        "casimir_centrality",
        None,
        nonzero as f64,
        opts.tolerances.casimir_centrality,
        Generator::ALL.len(),
        Some("count of nonzero symbolic coefficients in {C, v_a}".into()),
    )
}

fn casimir_realization(opts: &VerifyOptions, space: CanonicalSpace) -> SuiteResult {
    let kp = space.kappa();
    let mut rng = suite_rng(opts.seed, 8, Some(space));
    let c = casimir(&StructureConstants::numeric(kp));
    let n = opts.sampling.casimir_points;
    let worst = (0..n)
        .map(|_| realize(kp, &c, &[interior_point(&mut rng)]).expect("one point").abs())
        .fold(0.0, f64::max);
    result("casimir_realization", Some(space), worst, opts.tolerances.casimir_realization, n, None)
}

fn coproduct_closed_form(opts: &VerifyOptions, space: CanonicalSpace) -> SuiteResult {
    let kp = space.kappa();
    let mut rng = suite_rng(opts.seed, 9, Some(space));
    let dc = coproduct(&casimir(&StructureConstants::numeric(kp))).expect("one-slot Casimir");
    let n = opts.sampling.pair_samples;
    let mut worst = 0f64;
    for _ in 0..n {
        let (p, q) = (interior_point(&mut rng), interior_point(&mut rng));
        let lhs = realize(kp, &dc, &[p, q]).expect("two points");
        worst = worst.max((lhs - f2_closed_form(kp, p, q)).abs());
    }
    result("coproduct_closed_form", Some(space), worst, opts.tolerances.coproduct_closed_form, n, None)
}

/// Largest drift of `F2`, `F2_13` and `F2_23` along three trajectories.
pub fn three_point_drift(kp: KappaPair, trajs: [&Trajectory; 3]) -> f64 {
    let f2 = invariant_drift(&trajs, |p| f2_closed_form(kp, p[0], p[1]));
    let f13 = invariant_drift(&trajs, |p| f2_permuted(kp, Permutation::P13, p[0], p[1], p[2]));
    let f23 = invariant_drift(&trajs, |p| f2_permuted(kp, Permutation::P23, p[0], p[1], p[2]));
    f2.max(f13).max(f23)
}

/// Integrates three initial points over `window = [t0, t1]`.
pub fn integrate_three(
    kp: KappaPair,
    c: &CoefficientSpec,
    pts: [ParallelPoint; 3],
    window: [f64; 2],
    step: f64,
) -> Result<[Trajectory; 3], IntegrateError> {
    let [a, b, d] = pts.map(|p| integrate(kp, c, p, window[0], window[1], step));
    Ok([a?, b?, d?])
}

/// Draws a triangle and coefficients and integrates them at each step,
/// redrawing when a solution runs into a chart pole. Returns the
/// trajectories per step and the number of redraws.
pub fn draw_flow(
    kp: KappaPair,
    rng: &mut impl Rng,
    window: [f64; 2],
    steps: &[f64],
) -> Result<(Vec<[Trajectory; 3]>, usize), SuiteError> {
    const ATTEMPTS: usize = 50;
    let mut last = None;
    for attempt in 0..ATTEMPTS {
        let pts = random_triangle(kp, rng);
        let c = random_sinusoids(rng);
        match steps.iter().map(|&h| integrate_three(kp, &c, pts, window, h)).collect() {
            Ok(runs) => return Ok((runs, attempt)),
            Err(e @ IntegrateError::Singularity { .. }) => last = Some(e),
            Err(e) => return Err(e.into()),
        }
    }
    Err(last.expect("at least one attempt").into())
}

fn redraw_note(n: usize) -> String {
    if n == 0 {
        String::new()
    } else {
        format!("; {n} draws hit a pole and were replaced")
    }
}

fn conservation(opts: &VerifyOptions, space: CanonicalSpace) -> Result<Vec<SuiteResult>, SuiteError> {
    let kp = space.kappa();
    let mut rng = suite_rng(opts.seed, 10, Some(space));
    let [coarse, fine] = opts.sampling.scaling_steps;
    let (runs, redraws) = draw_flow(kp, &mut rng, [0.0, 1.0], &[opts.sampling.flow_step, coarse, fine])?;
    let drift = |t: &[Trajectory; 3]| three_point_drift(kp, [&t[0], &t[1], &t[2]]);
    let mut out = vec![result(
        "conservation",
        Some(space),
        drift(&runs[0]),
        opts.tolerances.conservation,
        runs[0][0].len(),
        Some(format!("step {}{}", opts.sampling.flow_step, redraw_note(redraws))),
    )];
    let (dc, df) = (drift(&runs[1]), drift(&runs[2]));
    if space.is_newtonian() {
        out.push(result(
            "drift_exact",
            Some(space),
            dc.max(df),
            opts.tolerances.conservation,
            2,
            Some(format!("F2 depends on x only and RK4 moves every x by the same amount; drift at steps {coarse}, {fine}")),
        ));
    } else {
        let ratio = dc / df;
        out.push(result(
            "drift_scaling",
            Some(space),
            (ratio - 16.0).abs(),
            opts.tolerances.drift_scaling,
            2,
            Some(format!("drift {dc:.3e} at step {coarse}, {df:.3e} at step {fine}, ratio {ratio:.3}")),
        ));
    }
    Ok(out)
}

/// One sample of the reconstruction of solution 1 from solutions 2 and 3.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReconstructionSample {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub error_plus: f64,
    pub error_minus: f64,
    pub best: Branch,
    /// Best error of the rule evaluated on raw chart differences.
    pub literal_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Reconstruction {
    pub s1: f64,
    pub s2: f64,
    pub area: f64,
    pub degenerate: bool,
    pub samples: Vec<ReconstructionSample>,
    pub max_error: f64,
    pub max_literal_error: f64,
    pub branch_flips: usize,
}

/// Freezes `(s1, s2, A)` at the first sample and rebuilds trajectory 1 from
/// trajectories 2 and 3 at `count` evenly spaced samples after `t0`.
pub fn reconstruct(kp: KappaPair, trajs: [&Trajectory; 3], count: usize) -> Result<Reconstruction, SuperpositionError> {
    let tri = triangle_invariants(kp, trajs[0].points[0], trajs[1].points[0], trajs[2].points[0])?;
    let last = trajs.iter().map(|t| t.len()).min().unwrap_or(0).saturating_sub(1);
    let mut samples = Vec::with_capacity(count);
    let mut flips = 0;
    for k in 1..=count {
        let i = ((k * last) as f64 / count as f64).round() as usize;
        let [q1, q2, q3] = trajs.map(|t| t.points[i]);
        let pair = superpose_both_with_area(kp, q2, q3, tri.s1, tri.s2, tri.area);
        let err = |b: Branch| pair.get(b).as_ref().map_or(f64::INFINITY, |&r| chart_error(kp, r, q1));
        let (ep, em) = (err(Branch::Plus), err(Branch::Minus));
        let best = if ep <= em { Branch::Plus } else { Branch::Minus };
        let literal = Branch::BOTH
            .iter()
            .filter_map(|&b| superpose_chart_literal(kp, q2, q3, tri.s1, tri.s2, tri.area, b).ok())
            .map(|r| chart_error(kp, r, q1))
            .fold(f64::INFINITY, f64::min);
        if let Some(prev) = samples.last().map(|s: &ReconstructionSample| s.best) {
            if prev != best && (ep - em).abs() > 1e-8 {
                flips += 1;
            }
        }
        let r = pair.get(best).unwrap_or(ParallelPoint::new(f64::NAN, f64::NAN));
        samples.push(ReconstructionSample {
            t: trajs[0].times[i],
            x: r.x,
            y: r.y,
            error_plus: ep,
            error_minus: em,
            best,
            literal_error: literal,
        });
    }
    let max_error = samples.iter().map(|s| s.error_plus.min(s.error_minus)).fold(0.0, f64::max);
    let max_literal_error = samples.iter().map(|s| s.literal_error).fold(0.0, f64::max);
    Ok(Reconstruction {
        s1: tri.s1,
        s2: tri.s2,
        area: tri.area,
        degenerate: tri.degenerate,
        samples,
        max_error,
        max_literal_error,
        branch_flips: flips,
    })
}

fn superposition_flow(opts: &VerifyOptions, space: CanonicalSpace) -> Result<SuiteResult, SuiteError> {
    let kp = space.kappa();
    let mut rng = suite_rng(opts.seed, SUPERPOSITION_STREAM, Some(space));
    let (runs, redraws) = draw_flow(kp, &mut rng, [0.0, 1.0], &[opts.sampling.flow_step])?;
    let t = &runs[0];
    let rec = reconstruct(kp, [&t[0], &t[1], &t[2]], opts.sampling.superposition_samples)?;
    let area = if kp.kappa2 == 0.0 { "Newtonian area" } else { "L'Huillier area" };
    Ok(result(
        "superposition",
        Some(space),
        rec.max_error,
        opts.tolerances.superposition,
        rec.samples.len(),
        Some(format!(
            "{area}; branch flips {}; chart-literal error {:.3e}{}",
            rec.branch_flips,
            rec.max_literal_error,
            redraw_note(redraws)
        )),
    ))
}

/// Shortest side accepted by the triangle suites; the rule divides by `Sk(s3)^2`.
pub const MIN_SIDE: f64 = 0.05;

/// Angle identities on `kappa2 != 0` spaces; the Newtonian `y` relation on
/// `kappa2 = 0`, where L'Huillier does not apply.
fn triangle_suite(opts: &VerifyOptions, space: CanonicalSpace) -> Result<SuiteResult, SuiteError> {
    let kp = space.kappa();
    let mut rng = suite_rng(opts.seed, 12, Some(space));
    let n = opts.sampling.triangles;
    let mut worst = 0f64;
    let mut used = 0;
    while used < n {
        let [q1, q2, q3] = random_triangle(kp, &mut rng);
        let tri = match triangle_invariants(kp, q1, q2, q3) {
            Ok(t) if !t.degenerate && t.s1.min(t.s2).min(t.s3) >= MIN_SIDE => t,
            _ => continue,
        };
        used += 1;
        if kp.kappa2 == 0.0 {
            let q1m = to_moved_frame(kp, q2, q1)?;
            let q3m = to_moved_frame(kp, q2, q3)?;
            let e = Branch::BOTH
                .iter()
                .map(|&b| newtonian_y_moved(kp, q3m, tri.s1, tri.s2, tri.area, b).map(|y| (y - q1m.y).abs()))
                .collect::<Result<Vec<_>, _>>()?
                .into_iter()
                .fold(f64::INFINITY, f64::min);
            worst = worst.max(e);
        } else {
            worst = worst.max(angle_certificate(kp, q2, q3, &tri)?.residual(kp.kappa2));
        }
    }
    let note = Some(format!("triangles with a side below {MIN_SIDE} skipped"));
    Ok(if kp.kappa2 == 0.0 {
        result("newtonian_y", Some(space), worst, opts.tolerances.newtonian_y, n, note)
    } else {
        result("angle_identity", Some(space), worst, opts.tolerances.angle_identity, n, note)
    })
}

fn euclidean(opts: &VerifyOptions) -> Result<SuiteResult, SuiteError> {
    let kp = KappaPair::new(0.0, 1.0);
    let mut rng = suite_rng(opts.seed, 13, None);
    let n = opts.sampling.interior_points;
    let mut worst = 0f64;
    let mut track = |a: f64, b: f64| worst = worst.max((a - b).abs());
    let cas = casimir(&StructureConstants::numeric(kp));
    let dc = coproduct(&cas).expect("one-slot Casimir");
    let mut used = 0;
    while used < n {
        let [p1, p2, p3] = [(); 3].map(|_| ParallelPoint::new(rng.random_range(-2.0..=2.0), rng.random_range(-2.0..=2.0)));
        let (x, y) = (p1.x, p1.y);
        let x3 = vector_field(kp, Generator::V3, p1)?;
        track(x3.dx, y);
        track(x3.dy, -x);
        let x1 = vector_field(kp, Generator::V1, p1)?;
        let x2 = vector_field(kp, Generator::V2, p1)?;
        track(x1.dx, 1.0);
        track(x1.dy, 0.0);
        track(x2.dx, 0.0);
        track(x2.dy, 1.0);
        let b = [rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0)];
        let rhs = system_rhs(kp, &CoefficientSpec::constant(b[0], b[1], b[2]), 0.0, p1)?;
        track(rhs.dx, b[0] + b[2] * y);
        track(rhs.dy, b[1] - b[2] * x);
        track(hamiltonian(kp, Generator::V1, p1), y);
        track(hamiltonian(kp, Generator::V2, p1), -x);
        track(hamiltonian(kp, Generator::V3, p1), 0.5 * (x * x + y * y));
        let pb = |a: Generator, b: Generator| {
            let (ax, ay) = hamiltonian_gradient(kp, a, p1);
            let (bx, by) = hamiltonian_gradient(kp, b, p1);
            ax * by - ay * bx
        };
        track(pb(Generator::V3, Generator::V1), x);
        track(pb(Generator::V3, Generator::V2), y);
        track(pb(Generator::V1, Generator::V2), 1.0);
        track(realize(kp, &cas, &[p1]).expect("one point"), 0.0);
        let half_sq = |a: ParallelPoint, b: ParallelPoint| 0.5 * ((a.x - b.x).powi(2) + (a.y - b.y).powi(2));
        track(realize(kp, &dc, &[p1, p2]).expect("two points"), half_sq(p1, p2));
        track(f2_permuted(kp, Permutation::P13, p1, p2, p3), half_sq(p3, p2));
        track(f2_permuted(kp, Permutation::P23, p1, p2, p3), half_sq(p1, p3));

        let k1sq = 2.0 * half_sq(p1, p2);
        let k2sq = 2.0 * half_sq(p1, p3);
        let k3sq = 2.0 * half_sq(p3, p2);
        let heron = 0.25 * (2.0 * (k1sq * k2sq + k1sq * k3sq + k2sq * k3sq) - (k1sq * k1sq + k2sq * k2sq + k3sq * k3sq)).sqrt();
        if !(heron > 0.05 && k3sq > 0.25) {
            continue;
        }
        used += 1;
        let (s1, s2, s3) = (k1sq.sqrt(), k2sq.sqrt(), k3sq.sqrt());
        track(area_lhuillier(kp, s1, s2, s3)?, heron);
        let pair = superpose_both_with_area(kp, p2, p3, s1, s2, heron);
        let f = (k1sq + k3sq - k2sq) / (2.0 * k3sq);
        for (branch, sign) in [(Branch::Plus, 1.0), (Branch::Minus, -1.0)] {
            let r = (*pair.get(branch))?;
            track(r.x, p2.x + f * (p3.x - p2.x) - sign * 2.0 * heron * (p3.y - p2.y) / k3sq);
            track(r.y, p2.y + f * (p3.y - p2.y) + sign * 2.0 * heron * (p3.x - p2.x) / k3sq);
        }
    }
    track(area_lhuillier(kp, 3.0, 4.0, 5.0)?, 6.0);
    Ok(result("euclidean", None, worst, opts.tolerances.euclidean, n, None))
}

fn contraction_suite(opts: &VerifyOptions) -> Result<SuiteResult, SuiteError> {
    let rows = contraction::sweep(&contraction::DEFAULT_DELTAS)?;
    Ok(result(
        "contraction",
        None,
        contraction::max_difference(&rows),
        opts.tolerances.contraction,
        rows.len(),
        Some("kappa = +-1e-7 against kappa = 0".into()),
    ))
}

fn tables_suite(opts: &VerifyOptions, space: CanonicalSpace) -> Result<SuiteResult, SuiteError> {
    let rows = tables::table_rows(space)?;
    let s = tables::summarize(space, &rows);
    Ok(result(
        "tables",
        Some(space),
        s.max_discrepancy,
        opts.tolerances.tables,
        s.rows,
        Some(format!("worst: {}", s.worst_quantity)),
    ))
}
