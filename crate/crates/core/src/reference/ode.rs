//! Embedded explicit Runge-Kutta 5(4) pair (Dormand-Prince) with PI step
//! size control and the classical 4th-order continuous extension.

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// 5th-order minus embedded 4th-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// dense output
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Initial step; estimated from the right-hand side when `None`.
    pub h_init: Option<f64>,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            h_init: None,
            h_max: f64::INFINITY,
            max_steps: 1_000_000,
        }
    }
}

impl AdaptiveOptions {
    pub fn with_tolerances(rel_tol: f64, abs_tol: f64) -> Self {
        Self {
            rel_tol,
            abs_tol,
            ..Self::default()
        }
    }
}

/// One accepted step with its interpolation coefficients.
#[derive(Debug, Clone)]
struct DenseStep {
    s0: f64,
    h: f64,
    /// `y0, y1 - y0, bspl, ydiff - h k7 - bspl, h Σ d_i k_i`
    coeffs: [Vec<f64>; 5],
    error_norm: f64,
}

impl DenseStep {
    fn eval_into(&self, s: f64, out: &mut [f64]) {
        let theta = (s - self.s0) / self.h;
        let theta1 = 1.0 - theta;
        let [r1, r2, r3, r4, r5] = &self.coeffs;
        for i in 0..out.len() {
            out[i] = r1[i] + theta * (r2[i] + theta1 * (r3[i] + theta * (r4[i] + theta1 * r5[i])));
        }
    }
}

/// Accepted steps of an adaptive run with continuous output over the whole
/// span.
#[derive(Debug, Clone)]
pub struct DenseTrajectory {
    steps: Vec<DenseStep>,
    y_end: Vec<f64>,
    rejected: usize,
}

impl DenseTrajectory {
    pub fn s_start(&self) -> f64 {
        self.steps.first().map_or(0.0, |st| st.s0)
    }

    pub fn s_end(&self) -> f64 {
        self.steps.last().map_or(0.0, |st| st.s0 + st.h)
    }

    pub fn final_state(&self) -> &[f64] {
        &self.y_end
    }

    pub fn accepted_steps(&self) -> usize {
        self.steps.len()
    }

    pub fn rejected_steps(&self) -> usize {
        self.rejected
    }

    /// Mesh `s_0 < s_1 < ... < s_end` of accepted steps.
    pub fn mesh(&self) -> Vec<f64> {
        let mut m: Vec<f64> = self.steps.iter().map(|st| st.s0).collect();
        m.push(self.s_end());
        m
    }

    /// Scaled local-error estimates of the accepted steps (each `<= 1`).
    pub fn error_norms(&self) -> Vec<f64> {
        self.steps.iter().map(|st| st.error_norm).collect()
    }

    /// State at `s`, which must lie in `[s_start, s_end]`.
    pub fn eval(&self, s: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.y_end.len()];
        if self.steps.is_empty() {
            out.copy_from_slice(&self.y_end);
            return out;
        }
        let idx = self
            .steps
            .partition_point(|st| st.s0 + st.h < s)
            .min(self.steps.len() - 1);
        self.steps[idx].eval_into(s, &mut out);
        out
    }

    pub fn sample(&self, points: &[f64]) -> Vec<Vec<f64>> {
        points.iter().map(|&s| self.eval(s)).collect()
    }
}

fn error_norm(err: &[f64], y0: &[f64], y1: &[f64], opts: &AdaptiveOptions) -> f64 {
    let n = err.len().max(1) as f64;
    let sum: f64 = err
        .iter()
        .zip(y0.iter().zip(y1))
        .map(|(e, (a, b))| {
            let sc = opts.abs_tol + opts.rel_tol * a.abs().max(b.abs());
            (e / sc).powi(2)
        })
        .sum();
    (sum / n).sqrt()
}

fn rms_scaled(v: &[f64], y: &[f64], opts: &AdaptiveOptions) -> f64 {
    let n = v.len().max(1) as f64;
    let sum: f64 = v
        .iter()
        .zip(y)
        .map(|(a, b)| (a / (opts.abs_tol + opts.rel_tol * b.abs())).powi(2))
        .sum();
    (sum / n).sqrt()
}

/// Integrates `y' = rhs(s, y)` over `s_span = (s0, s1)` with `s1 > s0`.
pub fn integrate_ode_adaptive<F>(
    mut rhs: F,
    y0: &[f64],
    s_span: (f64, f64),
    opts: &AdaptiveOptions,
) -> Result<DenseTrajectory>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    let (s_begin, s_final) = s_span;
    if !(opts.rel_tol > 0.0 && opts.abs_tol > 0.0) {
        return Err(Error::Config("tolerances must be positive".into()));
    }
    if !(s_final > s_begin) {
        return Err(Error::Config(format!(
            "integration span must be increasing, got ({s_begin}, {s_final})"
        )));
    }
    let n = y0.len();
    let span = s_final - s_begin;
    let mut s = s_begin;
    let mut y = y0.to_vec();
    let mut k1 = vec![0.0; n];
    rhs(s, &y, &mut k1)?;

    let mut h = match opts.h_init {
        Some(h) => h,
        None => {
            let d0 = rms_scaled(&y, &y, opts);
            let d1 = rms_scaled(&k1, &y, opts);
            let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
            let h0 = h0.min(span);
            let y_euler: Vec<f64> = y.iter().zip(&k1).map(|(a, b)| a + h0 * b).collect();
            let mut f1 = vec![0.0; n];
            rhs(s + h0, &y_euler, &mut f1)?;
            let diff: Vec<f64> = f1.iter().zip(&k1).map(|(a, b)| a - b).collect();
            let d2 = rms_scaled(&diff, &y, opts) / h0;
            let h1 = if d1.max(d2) <= 1e-15 {
                (h0 * 1e-3).max(1e-6)
            } else {
                (0.01 / d1.max(d2)).powf(0.2)
            };
            (100.0 * h0).min(h1)
        }
    }
    .min(opts.h_max)
    .min(span);

    const SAFE: f64 = 0.9;
    const BETA: f64 = 0.04;
    let expo1 = 0.2 - BETA * 0.75;
    let (fac_min, fac_max) = (1.0 / 10.0, 1.0 / 0.2);
    let mut err_old: f64 = 1e-4;
    let mut last_rejected = false;

    let mut steps = Vec::new();
    let mut rejected = 0;
    let (mut k2, mut k3, mut k4, mut k5, mut k6, mut k7) = (
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
    );
    let mut tmp = vec![0.0; n];
    let mut y1 = vec![0.0; n];
    let mut err = vec![0.0; n];

    while s < s_final {
        if steps.len() + rejected >= opts.max_steps {
            return Err(Error::MaxStepsExceeded {
                max_steps: opts.max_steps,
                s,
            });
        }
        if h.abs() <= 1e-14 * s.abs().max(1.0) || !h.is_finite() {
            return Err(Error::StepSizeUnderflow { s, h });
        }
        // Land exactly on the end point; absorb a tiny remainder.
        let remaining = s_final - s;
        let last = h >= remaining || remaining - h < 1e-12 * span;
        if last {
            h = remaining;
        }

        for i in 0..n {
            tmp[i] = y[i] + h * A21 * k1[i];
        }
        rhs(s + C2 * h, &tmp, &mut k2)?;
        for i in 0..n {
            tmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        rhs(s + C3 * h, &tmp, &mut k3)?;
        for i in 0..n {
            tmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        rhs(s + C4 * h, &tmp, &mut k4)?;
        for i in 0..n {
            tmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        rhs(s + C5 * h, &tmp, &mut k5)?;
        for i in 0..n {
            tmp[i] = y[i]
                + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        rhs(s + h, &tmp, &mut k6)?;
        for i in 0..n {
            y1[i] = y[i]
                + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
        }
        rhs(s + h, &y1, &mut k7)?;
        for i in 0..n {
            err[i] = h
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        }
        let en = error_norm(&err, &y, &y1, opts);
        if !en.is_finite() {
            rejected += 1;
            h *= 0.1;
            last_rejected = true;
            continue;
        }

        let fac11 = en.powf(expo1);
        if en <= 1.0 {
            let fac = (fac11 / err_old.powf(BETA) / SAFE).clamp(fac_min, fac_max);
            let mut h_new = (h / fac).min(opts.h_max);
            if last_rejected {
                h_new = h_new.min(h);
            }
            err_old = en.max(1e-4);

            let ydiff: Vec<f64> = y1.iter().zip(&y).map(|(a, b)| a - b).collect();
            let bspl: Vec<f64> = (0..n).map(|i| h * k1[i] - ydiff[i]).collect();
            let c4: Vec<f64> = (0..n).map(|i| ydiff[i] - h * k7[i] - bspl[i]).collect();
            let c5: Vec<f64> = (0..n)
                .map(|i| {
                    h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i])
                })
                .collect();
            steps.push(DenseStep {
                s0: s,
                h,
                coeffs: [y.clone(), ydiff, bspl, c4, c5],
                error_norm: en,
            });

            s = if last { s_final } else { s + h };
            y.copy_from_slice(&y1);
            k1.copy_from_slice(&k7);
            h = h_new;
            last_rejected = false;
        } else {
            rejected += 1;
            h /= (fac11 / SAFE).min(fac_max);
            last_rejected = true;
        }
    }

    Ok(DenseTrajectory {
        steps,
        y_end: y,
        rejected,
    })
}
