use cklh::hamilton::{CoefficientSpec, TimeFunction};
use cklh::integrator::{integrate, Trajectory};
use cklh::space::{CanonicalSpace, ParallelPoint};
use proptest::prelude::*;

fn coeffs(a: f64, w: f64) -> CoefficientSpec {
    CoefficientSpec {
        b1: TimeFunction::Sinusoid { amplitude: a, omega: w, phase: 0.3 },
        b2: TimeFunction::constant(0.2),
        b3: TimeFunction::Sinusoid { amplitude: 0.5 * a, omega: 2.0 * w, phase: 1.0 },
    }
}

#[test]
fn save_and_load_round_trip_bit_exactly() {
    let dir = tempfile::tempdir().unwrap();
    for space in CanonicalSpace::ALL {
        let t = integrate(space.kappa(), &coeffs(0.3, 1.7), ParallelPoint::new(0.2, -0.1), 0.0, 0.5, 1e-2).unwrap();
        t.save(dir.path(), space.name()).unwrap();
        let back = Trajectory::load(dir.path(), space.name()).unwrap();
        assert_eq!(back.times, t.times);
        assert_eq!(back.points, t.points);
        assert_eq!(back.kp, t.kp);
        assert_eq!(back.coeffs, t.coeffs);
        let csv = std::fs::read_to_string(dir.path().join(format!("{}.csv", space.name()))).unwrap();
        assert!(csv.starts_with("t,x,y\n"));
        assert_eq!(csv.lines().count(), t.len() + 1);
    }
}

#[test]
fn repeated_runs_write_identical_bytes() {
    let run = || {
        let t = integrate(CanonicalSpace::DeSitter.kappa(), &coeffs(0.25, 2.2), ParallelPoint::new(0.1, 0.3), 0.0, 1.0, 1e-3).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        (buf, t.metadata().to_toml().unwrap())
    };
    assert_eq!(run(), run());
}

proptest! {
    #[test]
    fn csv_values_parse_back_exactly(x in -1.5f64..1.5, y in -1.0f64..1.0, a in 0.0f64..0.5) {
        let t = integrate(CanonicalSpace::Hyperbolic.kappa(), &coeffs(a, 1.0), ParallelPoint::new(x, y), 0.0, 0.05, 1e-2).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let (times, points) = cklh::integrator::read_csv(buf.as_slice()).unwrap();
        prop_assert_eq!(times, t.times);
        prop_assert_eq!(points, t.points);
    }
}
