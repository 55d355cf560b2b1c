use crate::error::{Error, Result};

/// Pre-shock solution of `u_t = 6 u u_x` from the implicit relation
/// `u = u0(x + 6 u t)`.
pub fn burgers_characteristics(u0: &dyn Fn(f64) -> f64, x: f64, t: f64) -> Result<f64> {
    scalar_characteristics(u0, 6.0, x, t)
}

/// Solves `u = u0(x + a u t)`, the characteristic relation of
/// `u_t = a u u_x`, by damped Newton iteration.
///
/// Fails with [`Error::CharacteristicsNoConvergence`] once characteristics
/// have crossed at `(x, t)` (the relation loses monotonicity) or the
/// iteration stalls.
pub fn scalar_characteristics(u0: &dyn Fn(f64) -> f64, a: f64, x: f64, t: f64) -> Result<f64> {
    let fail = || Error::CharacteristicsNoConvergence { x, t };
    let residual = |u: f64| u - u0(x + a * u * t);
    let mut u = u0(x);
    let mut r = residual(u);
    if t == 0.0 {
        return Ok(u);
    }
    for _ in 0..200 {
        if !r.is_finite() {
            return Err(fail());
        }
        if r.abs() < 1e-14 * u.abs().max(1.0) {
            return Ok(u);
        }
        let xi = x + a * u * t;
        let h = 1e-6 * xi.abs().max(1.0);
        let du0 = (u0(xi + h) - u0(xi - h)) / (2.0 * h);
        let slope = 1.0 - a * t * du0;
        if slope <= 1e-8 {
            return Err(fail());
        }
        let mut step = -r / slope;
        let mut accepted = false;
        for _ in 0..30 {
            let trial = u + step;
            let r_trial = residual(trial);
            if r_trial.abs() < r.abs() || r_trial.abs() < 1e-14 {
                u = trial;
                r = r_trial;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            // Stalled at round-off.
            return if r.abs() < 1e-12 { Ok(u) } else { Err(fail()) };
        }
    }
    if r.abs() < 1e-12 {
        Ok(u)
    } else {
        Err(fail())
    }
}

/// First crossing time `1 / (a max(u0'))` of characteristics for
/// `u_t = a u u_x`, estimated by sampling `u0'` on `[0, L)`.
pub fn burgers_shock_time(u0: &dyn Fn(f64) -> f64, a: f64, length: f64) -> f64 {
    let m = 4096;
    let h = length / m as f64;
    let max_slope = (0..m)
        .map(|i| {
            let x = i as f64 * h;
            a * (u0(x + 1e-6) - u0(x - 1e-6)) / 2e-6
        })
        .fold(f64::NEG_INFINITY, f64::max);
    if max_slope <= 0.0 {
        f64::INFINITY
    } else {
        1.0 / max_slope
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn bump(x: f64) -> f64 {
        1.0 + 0.5 * (2.0 * PI * x / 8.0).cos()
    }

    #[test]
    fn initial_time_returns_profile() {
        for &x in &[0.0, 1.3, 7.9] {
            assert_eq!(burgers_characteristics(&bump, x, 0.0).unwrap(), bump(x));
        }
    }

    #[test]
    fn constants_are_exact() {
        let c = |_x: f64| 1.7;
        for &t in &[0.1, 1.0, 10.0] {
            assert!((burgers_characteristics(&c, 2.0, t).unwrap() - 1.7).abs() < 1e-14);
        }
    }

    #[test]
    fn relation_is_satisfied() {
        for i in 0..40 {
            let x = i as f64 * 0.2;
            for &t in &[0.05, 0.2, 0.35] {
                let u = burgers_characteristics(&bump, x, t).unwrap();
                assert!((u - bump(x + 6.0 * u * t)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn satisfies_pde_numerically() {
        // u_t - 6 u u_x = 0 checked with central differences.
        let u = |x: f64, t: f64| burgers_characteristics(&bump, x, t).unwrap();
        let err = |h: f64| {
            let (x, t) = (2.3, 0.2);
            let ut = (u(x, t + h) - u(x, t - h)) / (2.0 * h);
            let ux = (u(x + h, t) - u(x - h, t)) / (2.0 * h);
            (ut - 6.0 * u(x, t) * ux).abs()
        };
        let (e1, e2) = (err(1e-2), err(5e-3));
        assert!(e2 < 1e-4);
        assert!((e1 / e2).log2() > 1.7);
    }

    #[test]
    fn shock_time_of_cosine_bump() {
        let ts = burgers_shock_time(&bump, 6.0, 8.0);
        let expected = 8.0 / (6.0 * PI);
        assert!((ts - expected).abs() < 1e-6, "{ts}");
        assert!((0.4..0.45).contains(&ts));
    }

    #[test]
    fn fails_after_shock() {
        // Just past the crossing time the relation folds near the steepest point.
        let x_steep = 2.0 + 6.0 * 1.0 * 0.6; // characteristic foot at x=2 has u=1, slope max
        let mut failures = 0;
        for i in 0..200 {
            let x = x_steep - 4.0 + i as f64 * 0.04;
            if burgers_characteristics(&bump, x, 0.6).is_err() {
                failures += 1;
            }
        }
        assert!(failures > 0);
    }
}
