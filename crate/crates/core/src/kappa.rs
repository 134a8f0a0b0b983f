//! Curvature-labelled trigonometry.
//!
//! `ck`, `sk`, `tk` and `vk` interpolate between circular (`kappa > 0`),
//! parabolic (`kappa = 0`) and hyperbolic (`kappa < 0`) functions:
//!
//! ```text
//! ck(k, u) = sum (-k)^l u^(2l)   / (2l)!      cos(sqrt(k) u) | 1 | cosh(sqrt(-k) u)
//! sk(k, u) = sum (-k)^l u^(2l+1) / (2l+1)!
//! tk(k, u) = sk / ck
//! vk(k, u) = (1 - ck) / k
//! ```
//!
//! Near `k u^2 = 0` every function is evaluated from its power series, so the
//! results are continuous in `k` and `vk` never forms `0/0`.

use std::f64::consts::PI;

use thiserror::Error;

/// Below this value of `|k u^2|` the power series is used instead of the
/// closed form.
pub const SERIES_THRESHOLD: f64 = 1e-4;

/// Default floor on `|ck|` below which `tk` reports a pole.
pub const POLE_FLOOR: f64 = 1e-12;

/// Inverse functions clamp arguments that overshoot their range by at most
/// this much and reject anything further out.
pub const RANGE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum KappaError {
    #[error("tk pole: |ck({kappa}, {u})| = {ck:e} is below the floor")]
    Pole { kappa: f64, u: f64, ck: f64 },
    #[error("{function}: argument {value} outside the range for kappa = {kappa}")]
    Domain {
        function: &'static str,
        kappa: f64,
        value: f64,
    },
}

/// Sign used by the addition formulas.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AddSign {
    Plus,
    Minus,
}

impl AddSign {
    pub fn value(self) -> f64 {
        match self {
            AddSign::Plus => 1.0,
            AddSign::Minus => -1.0,
        }
    }
}

// Series coefficients in w = -k u^2, which carries the alternating sign.
const CK_SERIES: [f64; 7] = [
    1.0,
    1.0 / 2.0,
    1.0 / 24.0,
    1.0 / 720.0,
    1.0 / 40_320.0,
    1.0 / 3_628_800.0,
    1.0 / 479_001_600.0,
];
const SK_SERIES: [f64; 7] = [
    1.0,
    1.0 / 6.0,
    1.0 / 120.0,
    1.0 / 5040.0,
    1.0 / 362_880.0,
    1.0 / 39_916_800.0,
    1.0 / 6_227_020_800.0,
];
const VK_SERIES: [f64; 6] = [
    1.0 / 2.0,
    1.0 / 24.0,
    1.0 / 720.0,
    1.0 / 40_320.0,
    1.0 / 3_628_800.0,
    1.0 / 479_001_600.0,
];
// asin(sqrt z)/sqrt z, which also equals asinh(sqrt -z)/sqrt -z for z < 0
const ASIN_RATIO_SERIES: [f64; 6] = [
    1.0,
    1.0 / 6.0,
    3.0 / 40.0,
    5.0 / 112.0,
    35.0 / 1152.0,
    63.0 / 2816.0,
];

fn horner(coeffs: &[f64], w: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * w + c)
}

/// Series variable `w = -k u^2`; the even/odd series are polynomials in it.
fn series_arg(kappa: f64, u: f64) -> Option<f64> {
    let w = -kappa * u * u;
    (w.abs() < SERIES_THRESHOLD).then_some(w)
}

/// Curvature-dependent cosine.
pub fn ck(kappa: f64, u: f64) -> f64 {
    if let Some(w) = series_arg(kappa, u) {
        return horner(&CK_SERIES, w);
    }
    if kappa > 0.0 {
        (kappa.sqrt() * u).cos()
    } else {
        ((-kappa).sqrt() * u).cosh()
    }
}

/// Curvature-dependent sine.
pub fn sk(kappa: f64, u: f64) -> f64 {
    if let Some(w) = series_arg(kappa, u) {
        return u * horner(&SK_SERIES, w);
    }
    if kappa > 0.0 {
        let r = kappa.sqrt();
        (r * u).sin() / r
    } else {
        let r = (-kappa).sqrt();
        (r * u).sinh() / r
    }
}

/// Curvature-dependent versed sine `(1 - ck) / k`, equal to `u^2 / 2` at `k = 0`.
pub fn vk(kappa: f64, u: f64) -> f64 {
    if let Some(w) = series_arg(kappa, u) {
        return u * u * horner(&VK_SERIES, w);
    }
    if kappa > 0.0 {
        let s = (0.5 * kappa.sqrt() * u).sin();
        2.0 * s * s / kappa
    } else {
        let s = (0.5 * (-kappa).sqrt() * u).sinh();
        -2.0 * s * s / kappa
    }
}

/// Curvature-dependent tangent with the default pole floor.
pub fn tk(kappa: f64, u: f64) -> Result<f64, KappaError> {
    tk_with_floor(kappa, u, POLE_FLOOR)
}

/// `sk / ck`, failing when `|ck| < floor`.
pub fn tk_with_floor(kappa: f64, u: f64, floor: f64) -> Result<f64, KappaError> {
    let c = ck(kappa, u);
    if c.abs() < floor {
        return Err(KappaError::Pole { kappa, u, ck: c });
    }
    Ok(sk(kappa, u) / c)
}

pub fn d_ck(kappa: f64, u: f64) -> f64 {
    -kappa * sk(kappa, u)
}

pub fn d_sk(kappa: f64, u: f64) -> f64 {
    ck(kappa, u)
}

pub fn d_tk(kappa: f64, u: f64) -> Result<f64, KappaError> {
    let c = ck(kappa, u);
    if c.abs() < POLE_FLOOR {
        return Err(KappaError::Pole { kappa, u, ck: c });
    }
    Ok(1.0 / (c * c))
}

pub fn d_vk(kappa: f64, u: f64) -> f64 {
    sk(kappa, u)
}

/// Right-hand side of the addition formula for `ck(k, u ± v)`.
pub fn ck_add(kappa: f64, u: f64, v: f64, sign: AddSign) -> f64 {
    ck(kappa, u) * ck(kappa, v) - sign.value() * kappa * sk(kappa, u) * sk(kappa, v)
}

/// Right-hand side of the addition formula for `sk(k, u ± v)`.
pub fn sk_add(kappa: f64, u: f64, v: f64, sign: AddSign) -> f64 {
    sk(kappa, u) * ck(kappa, v) + sign.value() * ck(kappa, u) * sk(kappa, v)
}

/// Half period `pi / sqrt(k)` of the circular functions, `None` for `k <= 0`.
pub fn half_period(kappa: f64) -> Option<f64> {
    (kappa > 0.0).then(|| PI / kappa.sqrt())
}

/// Reduces `u` into `(-pi/sqrt(k), pi/sqrt(k)]` for `k > 0`; identity otherwise.
pub fn wrap_periodic(kappa: f64, u: f64) -> f64 {
    match half_period(kappa) {
        Some(h) => {
            let period = 2.0 * h;
            let mut r = u - period * ((u + h) / period).floor();
            // floor puts u = h at -h; the interval is closed on the right
            if r <= -h {
                r += period;
            }
            r
        }
        None => u,
    }
}

fn clamp_unit(function: &'static str, kappa: f64, value: f64, x: f64) -> Result<f64, KappaError> {
    if x.abs() <= 1.0 {
        Ok(x)
    } else if x.abs() <= 1.0 + RANGE_TOLERANCE {
        Ok(x.signum())
    } else {
        Err(KappaError::Domain {
            function,
            kappa,
            value,
        })
    }
}

/// Principal inverse of `sk`: the `u` nearest zero with `sk(k, u) = v`.
pub fn sk_inv(kappa: f64, v: f64) -> Result<f64, KappaError> {
    if kappa > 0.0 {
        let r = kappa.sqrt();
        Ok(clamp_unit("sk_inv", kappa, v, r * v)?.asin() / r)
    } else if kappa < 0.0 {
        let r = (-kappa).sqrt();
        Ok((r * v).asinh() / r)
    } else {
        Ok(v)
    }
}

/// Principal inverse of `tk`.
pub fn tk_inv(kappa: f64, t: f64) -> Result<f64, KappaError> {
    if kappa > 0.0 {
        let r = kappa.sqrt();
        Ok((r * t).atan() / r)
    } else if kappa < 0.0 {
        let r = (-kappa).sqrt();
        let z = r * t;
        if z.abs() >= 1.0 {
            return Err(KappaError::Domain {
                function: "tk_inv",
                kappa,
                value: t,
            });
        }
        Ok(z.atanh() / r)
    } else {
        Ok(t)
    }
}

/// Minimal non-negative `s` with `vk(k, s) = v`.
///
/// For `k > 0` the result lies in `[0, pi/sqrt(k)]`.
pub fn vk_inv(kappa: f64, v: f64) -> Result<f64, KappaError> {
    let domain = || KappaError::Domain {
        function: "vk_inv",
        kappa,
        value: v,
    };
    let v = if v < 0.0 {
        if v < -RANGE_TOLERANCE {
            return Err(domain());
        }
        0.0
    } else {
        v
    };
    let z = 0.5 * kappa * v;
    if z > 1.0 {
        if z > 1.0 + RANGE_TOLERANCE {
            return Err(domain());
        }
        return Ok(half_period(kappa).unwrap_or(0.0));
    }
    let base = (2.0 * v).sqrt();
    if z.abs() < SERIES_THRESHOLD {
        return Ok(base * horner(&ASIN_RATIO_SERIES, z));
    }
    if kappa > 0.0 {
        Ok(2.0 * z.sqrt().asin() / kappa.sqrt())
    } else {
        Ok(2.0 * (-z).sqrt().asinh() / (-kappa).sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // Direct summation until the terms stop changing the sum.
    fn series(kappa: f64, u: f64, odd: bool) -> f64 {
        let mut term = if odd { u } else { 1.0 };
        let mut sum = term;
        let mut n = if odd { 1.0 } else { 0.0 };
        for _ in 0..200 {
            term *= -kappa * u * u / ((n + 1.0) * (n + 2.0));
            n += 2.0;
            let next = sum + term;
            if next == sum {
                break;
            }
            sum = next;
        }
        sum
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn ck_examples() {
        assert_eq!(ck(0.0, 7.3), 1.0);
        assert!(close(ck(1.0, PI / 2.0), 0.0, 1e-15));
        let oracle = series(-1.0, 1.0, false);
        assert!(close(oracle, 1.5430806348, 1e-10));
        assert!(close(ck(-1.0, 1.0), oracle, 1e-15));
    }

    #[test]
    fn sk_examples() {
        assert_eq!(sk(0.0, 2.5), 2.5);
        assert!(close(sk(1.0, PI), 0.0, 1e-15));
        let oracle = series(4.0, 1.0, true);
        assert!(close(oracle, 0.4546487134, 1e-10));
        assert!(close(sk(4.0, 1.0), oracle, 1e-15));
    }

    #[test]
    fn tk_examples() {
        assert_eq!(tk(0.0, 5.0).unwrap(), 5.0);
        assert!(close(tk(1.0, PI / 4.0).unwrap(), 1.0, 1e-15));
        let oracle = series(-1.0, 0.5, true) / series(-1.0, 0.5, false);
        assert!(close(oracle, 0.4621171573, 1e-10));
        assert!(close(tk(-1.0, 0.5).unwrap(), oracle, 1e-15));
    }

    #[test]
    fn tk_pole_is_reported() {
        // cos(pi/2) in f64 is 6e-17
        assert!(matches!(tk(1.0, PI / 2.0), Err(KappaError::Pole { .. })));
        assert!(tk_with_floor(1.0, 1.5, 0.1).is_err());
        assert!(tk_with_floor(1.0, 1.5, 0.01).is_ok());
    }

    #[test]
    fn vk_examples() {
        assert_eq!(vk(0.0, 3.0), 4.5);
        assert!(close(vk(1.0, PI), 2.0, 1e-15));
        // (1 - cosh 1) / (-1)
        let oracle = (1.0 - series(-1.0, 1.0, false)) / -1.0;
        assert!(close(oracle, 0.5430806348, 1e-10));
        assert!(close(vk(-1.0, 1.0), oracle, 1e-15));
    }

    #[test]
    fn addition_examples() {
        assert!(close(ck_add(1.0, PI / 2.0, PI / 2.0, AddSign::Plus), -1.0, 1e-15));
        assert_eq!(sk_add(0.0, 2.0, 3.0, AddSign::Plus), 5.0);
        let direct = ck(-1.0, 0.3 - 0.4);
        assert!(close(direct, 1.0050041681, 1e-10));
        assert!(close(ck_add(-1.0, 0.3, 0.4, AddSign::Minus), direct, 1e-15));
    }

    #[test]
    fn series_branch_matches_oracle_at_threshold() {
        for &kappa in &[1e-5, -1e-5, 0.9e-4, -0.9e-4, 1.1e-4, -1.1e-4] {
            let u = 1.0;
            assert!(close(ck(kappa, u), series(kappa, u, false), 4e-16));
            assert!(close(sk(kappa, u), series(kappa, u, true), 4e-16));
            let v_oracle = (1.0 - series(kappa, u, false)) / kappa;
            assert!(close(vk(kappa, u), v_oracle, 1e-11));
        }
    }

    #[test]
    fn wrap_periodic_interval() {
        assert!(close(wrap_periodic(1.0, 3.0 * PI / 2.0), -PI / 2.0, 1e-15));
        assert_eq!(wrap_periodic(1.0, PI), PI);
        assert_eq!(wrap_periodic(1.0, -PI), PI);
        assert_eq!(wrap_periodic(0.0, 100.0), 100.0);
        assert!(close(wrap_periodic(4.0, 2.0), 2.0 - PI, 1e-15));
    }

    #[test]
    fn inverses() {
        assert!(close(vk_inv(1.0, 2.0).unwrap(), PI, 1e-12));
        assert!(close(vk_inv(0.0, 4.5).unwrap(), 3.0, 1e-15));
        assert!(close(vk_inv(-1.0, vk(-1.0, 1.3)).unwrap(), 1.3, 1e-13));
        assert!(vk_inv(1.0, -1e-6).is_err());
        assert_eq!(vk_inv(1.0, -1e-12).unwrap(), 0.0);
        assert!(vk_inv(1.0, 2.1).is_err());
        assert!(close(sk_inv(1.0, 1.0).unwrap(), PI / 2.0, 1e-15));
        assert!(sk_inv(1.0, 1.1).is_err());
        assert!(close(tk_inv(-1.0, 0.5f64.tanh()).unwrap(), 0.5, 1e-15));
        assert!(tk_inv(-1.0, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn vk_inv_inverts_on_principal_range(kappa in -4.0f64..4.0, frac in 0.0f64..0.999) {
            let s = match half_period(kappa) { Some(h) => frac * h, None => frac * 3.0 };
            let back = vk_inv(kappa, vk(kappa, s)).unwrap();
            prop_assert!((back - s).abs() < 1e-7 * (1.0 + s));
        }

        #[test]
        fn contraction_continuity(u in -3.0f64..3.0, kappa in -1e-6f64..1e-6) {
            let bound = u * u * kappa.abs() + 1e-15;
            prop_assert!((ck(kappa, u) - ck(0.0, u)).abs() <= bound);
            prop_assert!((sk(kappa, u) - sk(0.0, u)).abs() <= bound * u.abs().max(1.0));
            prop_assert!((vk(kappa, u) - vk(0.0, u)).abs() <= bound * u * u);
        }

        #[test]
        fn odd_and_even(kappa in -4.0f64..4.0, u in -3.0f64..3.0) {
            prop_assert_eq!(sk(kappa, -u), -sk(kappa, u));
            prop_assert_eq!(ck(kappa, -u), ck(kappa, u));
            prop_assert_eq!(vk(kappa, -u), vk(kappa, u));
        }
    }
}
