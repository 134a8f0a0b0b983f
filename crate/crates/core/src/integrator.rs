//! Fixed-step classical RK4 for the nonautonomous system, used as an
//! independent oracle, plus trajectory serialization.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hamilton::{system_rhs, CoefficientSpec, VectorValue};
use crate::kappa::ck;
use crate::space::{normalize, versine_separation, KappaPair, ParallelPoint};

/// Abort when `|Ck_{k1k2}(y)|` drops below this along the path.
pub const SINGULARITY_MARGIN: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum IntegrateError {
    #[error("step must be positive and finite, got {0}")]
    InvalidStep(f64),
    #[error("invalid time window [{t0}, {t1}]")]
    InvalidInterval { t0: f64, t1: f64 },
    #[error("invalid coefficients: {0}")]
    Coefficients(String),
    #[error("chart singularity approached at t = {t}; last point ({}, {})", .point.x, .point.y)]
    Singularity { t: f64, point: ParallelPoint },
}

#[derive(Debug, Error)]
pub enum TrajectoryIoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("bad trajectory header {0:?}, expected t,x,y")]
    Header(Vec<String>),
    #[error("metadata: {0}")]
    MetadataParse(#[from] toml::de::Error),
    #[error("metadata: {0}")]
    MetadataWrite(#[from] toml::ser::Error),
    #[error("times are not strictly increasing at row {0}")]
    NonMonotone(usize),
}

/// A sampled solution of the system.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub kp: KappaPair,
    pub coeffs: CoefficientSpec,
    pub step: f64,
    pub times: Vec<f64>,
    /// Normalized into the chart domain.
    pub points: Vec<ParallelPoint>,
    /// Unwrapped values as integrated.
    pub raw: Vec<ParallelPoint>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn endpoint(&self) -> ParallelPoint {
        *self.points.last().expect("trajectory has at least one sample")
    }

    /// `t,x,y` rows with 17 significant digits.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), TrajectoryIoError> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["t", "x", "y"])?;
        for (t, p) in self.times.iter().zip(&self.points) {
            wtr.write_record([fmt17(*t), fmt17(p.x), fmt17(p.y)])?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn metadata(&self) -> TrajectoryMetadata {
        TrajectoryMetadata {
            kappa1: self.kp.kappa1,
            kappa2: self.kp.kappa2,
            step: self.step,
            t0: self.times[0],
            t1: *self.times.last().unwrap(),
            samples: self.len(),
            initial: self.raw[0],
            coefficients: self.coeffs.clone(),
        }
    }

    /// Writes `<stem>.csv` and the `<stem>.meta.toml` sidecar into `dir`.
    pub fn save(&self, dir: &Path, stem: &str) -> Result<(), TrajectoryIoError> {
        self.write_csv(File::create(dir.join(format!("{stem}.csv")))?)?;
        std::fs::write(dir.join(format!("{stem}.meta.toml")), self.metadata().to_toml()?)?;
        Ok(())
    }

    pub fn load(dir: &Path, stem: &str) -> Result<Trajectory, TrajectoryIoError> {
        let meta = TrajectoryMetadata::from_toml(&std::fs::read_to_string(dir.join(format!("{stem}.meta.toml")))?)?;
        let (times, points) = read_csv(File::open(dir.join(format!("{stem}.csv")))?)?;
        Ok(Trajectory {
            kp: KappaPair::new(meta.kappa1, meta.kappa2),
            coeffs: meta.coefficients,
            step: meta.step,
            times,
            raw: points.clone(),
            points,
        })
    }
}

pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn read_csv<R: Read>(r: R) -> Result<(Vec<f64>, Vec<ParallelPoint>), TrajectoryIoError> {
    let mut rdr = csv::Reader::from_reader(r);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header != ["t", "x", "y"] {
        return Err(TrajectoryIoError::Header(header));
    }
    let mut times = Vec::new();
    let mut points = Vec::new();
    for (i, row) in rdr.deserialize::<(f64, f64, f64)>().enumerate() {
        let (t, x, y) = row?;
        if times.last().is_some_and(|&prev| t <= prev) {
            return Err(TrajectoryIoError::NonMonotone(i + 1));
        }
        times.push(t);
        points.push(ParallelPoint::new(x, y));
    }
    Ok((times, points))
}

/// Sidecar record describing how a trajectory file was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoryMetadata {
    pub kappa1: f64,
    pub kappa2: f64,
    pub step: f64,
    pub t0: f64,
    pub t1: f64,
    pub samples: usize,
    pub initial: ParallelPoint,
    pub coefficients: CoefficientSpec,
}

impl TrajectoryMetadata {
    pub fn to_toml(&self) -> Result<String, TrajectoryIoError> {
        Ok(toml::to_string(self)?)
    }

    pub fn from_toml(s: &str) -> Result<Self, TrajectoryIoError> {
        Ok(toml::from_str(s)?)
    }
}

fn rhs(kp: KappaPair, c: &CoefficientSpec, t: f64, p: ParallelPoint, last: ParallelPoint) -> Result<VectorValue, IntegrateError> {
    let singular = IntegrateError::Singularity { t, point: last };
    let (cp, cl) = (ck(kp.k12(), p.y), ck(kp.k12(), last.y));
    // a sign change of Ck means a stage stepped across the pole
    if cp.abs() < SINGULARITY_MARGIN || cp.signum() != cl.signum() {
        return Err(singular);
    }
    system_rhs(kp, c, t, p).map_err(|_| singular)
}

fn shifted(p: ParallelPoint, v: VectorValue, h: f64) -> ParallelPoint {
    ParallelPoint::new(p.x + h * v.dx, p.y + h * v.dy)
}

/// Number of RK4 steps covering `[t0, t1]` with steps no longer than `step`.
pub fn step_count(t0: f64, t1: f64, step: f64) -> usize {
    ((t1 - t0) / step - 1e-9).ceil().max(0.0) as usize
}

/// Integrates from `p0` at `t0` to `t1`, recording every step.
pub fn integrate(
    kp: KappaPair,
    c: &CoefficientSpec,
    p0: ParallelPoint,
    t0: f64,
    t1: f64,
    step: f64,
) -> Result<Trajectory, IntegrateError> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(IntegrateError::InvalidStep(step));
    }
    if !(t0.is_finite() && t1.is_finite() && t1 >= t0) {
        return Err(IntegrateError::InvalidInterval { t0, t1 });
    }
    c.validate(t0, t1).map_err(IntegrateError::Coefficients)?;

    let n = step_count(t0, t1, step);
    let h = if n == 0 { 0.0 } else { (t1 - t0) / n as f64 };
    let mut times = Vec::with_capacity(n + 1);
    let mut raw = Vec::with_capacity(n + 1);
    let mut p = p0;
    rhs(kp, c, t0, p, p)?;
    times.push(t0);
    raw.push(p);
    for i in 0..n {
        let t = t0 + i as f64 * h;
        let k1 = rhs(kp, c, t, p, p)?;
        let k2 = rhs(kp, c, t + 0.5 * h, shifted(p, k1, 0.5 * h), p)?;
        let k3 = rhs(kp, c, t + 0.5 * h, shifted(p, k2, 0.5 * h), p)?;
        let k4 = rhs(kp, c, t + h, shifted(p, k3, h), p)?;
        p = ParallelPoint::new(
            p.x + h / 6.0 * (k1.dx + 2.0 * k2.dx + 2.0 * k3.dx + k4.dx),
            p.y + h / 6.0 * (k1.dy + 2.0 * k2.dy + 2.0 * k3.dy + k4.dy),
        );
        let t_next = if i + 1 == n { t1 } else { t0 + (i + 1) as f64 * h };
        rhs(kp, c, t_next, p, *raw.last().unwrap())?;
        times.push(t_next);
        raw.push(p);
    }
    Ok(Trajectory {
        kp,
        coeffs: c.clone(),
        step: h,
        times,
        points: raw.iter().map(|&q| normalize(kp, q)).collect(),
        raw,
    })
}

/// `max_t |f(pts(t)) - f(pts(t0))|` over trajectories sampled on a common grid.
pub fn invariant_drift(trajectories: &[&Trajectory], f: impl Fn(&[ParallelPoint]) -> f64) -> f64 {
    let n = trajectories.iter().map(|t| t.len()).min().unwrap_or(0);
    let at = |i: usize| -> Vec<ParallelPoint> { trajectories.iter().map(|t| t.raw[i]).collect() };
    if n == 0 {
        return 0.0;
    }
    let f0 = f(&at(0));
    (0..n).map(|i| (f(&at(i)) - f0).abs()).fold(0.0, f64::max)
}

/// Drift of `F^(2)` along two solutions of the same system.
pub fn flow_invariant_drift(
    kp: KappaPair,
    c: &CoefficientSpec,
    p0a: ParallelPoint,
    p0b: ParallelPoint,
    t0: f64,
    t1: f64,
    step: f64,
) -> Result<f64, IntegrateError> {
    let a = integrate(kp, c, p0a, t0, t1, step)?;
    let b = integrate(kp, c, p0b, t0, t1, step)?;
    Ok(invariant_drift(&[&a, &b], |p| versine_separation(kp, p[0], p[1])))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamilton::TimeFunction;
    use crate::space::{geodesic_distance, CanonicalSpace};
    use std::f64::consts::PI;

    fn pt(x: f64, y: f64) -> ParallelPoint {
        ParallelPoint::new(x, y)
    }

    fn sinusoidal() -> CoefficientSpec {
        CoefficientSpec {
            b1: TimeFunction::Sinusoid { amplitude: 0.8, omega: 2.0, phase: 0.3 },
            b2: TimeFunction::Sinusoid { amplitude: 0.5, omega: 3.0, phase: -0.2 },
            b3: TimeFunction::Sinusoid { amplitude: 0.6, omega: 1.5, phase: 1.0 },
        }
    }

    #[test]
    fn translation_endpoint_on_every_space() {
        let c = CoefficientSpec::constant(1.0, 0.0, 0.0);
        for s in CanonicalSpace::ALL {
            let tr = integrate(s.kappa(), &c, ParallelPoint::ORIGIN, 0.0, 1.0, 1e-2).unwrap();
            let e = tr.endpoint();
            assert!((e.x - 1.0).abs() < 1e-13 && e.y == 0.0, "{s}");
        }
    }

    #[test]
    fn euclidean_rotation_endpoint() {
        let c = CoefficientSpec::constant(0.0, 0.0, 1.0);
        let tr = integrate(KappaPair::new(0.0, 1.0), &c, pt(1.0, 0.0), 0.0, PI / 2.0, 1e-3).unwrap();
        let e = tr.endpoint();
        assert!(e.x.abs() < 1e-8 && (e.y + 1.0).abs() < 1e-8);
        assert_eq!(*tr.times.last().unwrap(), PI / 2.0);
        assert!(tr.times.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn sphere_meridian() {
        let c = CoefficientSpec::constant(0.0, 1.0, 0.0);
        let tr = integrate(KappaPair::new(1.0, 1.0), &c, ParallelPoint::ORIGIN, 0.0, 1.2, 1e-3).unwrap();
        let e = tr.endpoint();
        assert!(e.x.abs() < 1e-12 && (e.y - 1.2).abs() < 1e-10);
    }

    #[test]
    fn pole_aborts() {
        let c = CoefficientSpec::constant(0.0, 1.0, 0.0);
        let err = integrate(KappaPair::new(1.0, 1.0), &c, ParallelPoint::ORIGIN, 0.0, 2.0, 1e-3).unwrap_err();
        match err {
            IntegrateError::Singularity { t, point } => {
                assert!(t > 1.5 && t < PI / 2.0 + 1e-3);
                assert!(point.y < PI / 2.0);
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn invalid_inputs() {
        let c = CoefficientSpec::constant(1.0, 0.0, 0.0);
        let k = KappaPair::new(0.0, 1.0);
        assert!(matches!(integrate(k, &c, ParallelPoint::ORIGIN, 0.0, 1.0, 0.0), Err(IntegrateError::InvalidStep(_))));
        assert!(matches!(
            integrate(k, &c, ParallelPoint::ORIGIN, 1.0, 0.0, 0.1),
            Err(IntegrateError::InvalidInterval { .. })
        ));
        let bad = CoefficientSpec {
            b1: TimeFunction::Polynomial { coefficients: vec![0.0; 6] },
            ..c
        };
        assert!(matches!(integrate(k, &bad, ParallelPoint::ORIGIN, 0.0, 1.0, 0.1), Err(IntegrateError::Coefficients(_))));
    }

    #[test]
    fn drift_examples() {
        let k = KappaPair::new(0.0, 1.0);
        let d = flow_invariant_drift(k, &sinusoidal(), pt(0.1, 0.2), pt(-0.5, 0.7), 0.0, 1.0, 1e-3).unwrap();
        assert!(d < 1e-6);
        let zero = CoefficientSpec::constant(0.0, 0.0, 0.0);
        assert_eq!(flow_invariant_drift(k, &zero, pt(0.1, 0.2), pt(1.0, 0.0), 0.0, 1.0, 1e-2).unwrap(), 0.0);
        let d = flow_invariant_drift(KappaPair::new(1.0, 1.0), &sinusoidal(), pt(0.3, 0.1), pt(0.3, 0.1), 0.0, 1.0, 1e-2).unwrap();
        assert_eq!(d, 0.0);
    }

    #[test]
    fn distance_is_conserved_on_all_spaces() {
        for s in CanonicalSpace::ALL {
            let k = s.kappa();
            let (a0, b0) = (pt(0.1, 0.05), pt(0.9, -0.1));
            let a = integrate(k, &sinusoidal(), a0, 0.0, 1.0, 1e-3).unwrap();
            let b = integrate(k, &sinusoidal(), b0, 0.0, 1.0, 1e-3).unwrap();
            let d0 = geodesic_distance(k, a0, b0).unwrap();
            let drift = invariant_drift(&[&a, &b], |p| geodesic_distance(k, p[0], p[1]).unwrap() - d0);
            assert!(drift < 1e-6, "{s}: {drift}");
        }
    }

    #[test]
    fn fourth_order_convergence() {
        let k = KappaPair::new(1.0, 1.0);
        let p0 = pt(0.2, 0.1);
        let reference = integrate(k, &sinusoidal(), p0, 0.0, 1.0, 0.1 / 16.0).unwrap().endpoint();
        let err = |h: f64| {
            let e = integrate(k, &sinusoidal(), p0, 0.0, 1.0, h).unwrap().endpoint();
            (e.x - reference.x).hypot(e.y - reference.y)
        };
        let ratio = err(0.1) / err(0.05);
        assert!((12.0..=20.0).contains(&ratio), "{ratio}");
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let tr = integrate(KappaPair::new(-1.0, 0.0), &sinusoidal(), pt(0.3, -0.2), 0.0, 0.5, 0.01).unwrap();
        let dir = tempfile::tempdir().unwrap();
        tr.save(dir.path(), "traj").unwrap();
        let back = Trajectory::load(dir.path(), "traj").unwrap();
        assert_eq!(back.times, tr.times);
        assert_eq!(back.points, tr.points);
        assert_eq!(back.coeffs, tr.coeffs);
        assert_eq!(back.kp, tr.kp);
        let text = std::fs::read_to_string(dir.path().join("traj.csv")).unwrap();
        assert!(text.starts_with("t,x,y\n"));
    }

    #[test]
    fn bad_csv_header_is_rejected() {
        let err = read_csv("a,b,c\n1,2,3\n".as_bytes()).unwrap_err();
        assert!(matches!(err, TrajectoryIoError::Header(_)));
        let err = read_csv("t,x,y\n1,2,3\n0,2,3\n".as_bytes()).unwrap_err();
        assert!(matches!(err, TrajectoryIoError::NonMonotone(2)));
    }

    #[test]
    fn metadata_rejects_unknown_keys() {
        let tr = integrate(KappaPair::new(0.0, 1.0), &sinusoidal(), pt(0.0, 0.0), 0.0, 0.1, 0.05).unwrap();
        let mut text = tr.metadata().to_toml().unwrap();
        assert_eq!(TrajectoryMetadata::from_toml(&text).unwrap(), tr.metadata());
        text.insert_str(0, "bogus = 1\n");
        assert!(TrajectoryMetadata::from_toml(&text).is_err());
    }
}
