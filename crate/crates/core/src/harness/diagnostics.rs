use rustfft::{num_complex::Complex, FftPlanner};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::Field;

use super::config::Scheme;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticsRecord {
    pub scheme: Scheme,
    pub step: usize,
    pub t: f64,
    #[serde(rename = "H_hat")]
    pub h_hat: f64,
    pub casimir: f64,
    #[serde(rename = "H_rel_err")]
    pub h_rel_err: f64,
    pub casimir_rel_err: f64,
    pub solution_rel_err: Option<f64>,
    pub fourier_amp: Vec<f64>,
    /// `NaN` for odd `N`.
    pub nyquist_amp: f64,
    /// Residual evaluations in the step that produced this record.
    pub newton_iters: usize,
}

/// DFT magnitudes `|Σ_j u_j e^{-2πi jk/N}| / N` for `k = 0..=N/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierModes {
    pub amplitudes: Vec<f64>,
    /// False for odd `N`, where the last entry is mode `(N-1)/2` rather than
    /// the Nyquist mode.
    pub has_nyquist: bool,
}

impl FourierModes {
    pub fn nyquist(&self) -> Option<f64> {
        self.has_nyquist.then(|| *self.amplitudes.last().unwrap())
    }
}

pub fn fourier_modes(u: &Field) -> FourierModes {
    let n = u.len();
    if n == 0 {
        return FourierModes {
            amplitudes: Vec::new(),
            has_nyquist: false,
        };
    }
    let mut buf: Vec<Complex<f64>> = u.values().iter().map(|&v| Complex::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    FourierModes {
        amplitudes: buf[..=n / 2].iter().map(|c| c.norm() / n as f64).collect(),
        has_nyquist: n % 2 == 0,
    }
}

/// Relative discrete L2 error `‖u_num - u_ref‖ / ‖u_ref‖`.
pub fn solution_error(u_num: &Field, u_ref: &Field) -> Result<f64> {
    let diff = u_num.sub(u_ref)?;
    let num = diff.dot(&diff)?.sqrt();
    let den = u_ref.dot(u_ref)?.sqrt();
    if den == 0.0 {
        return Err(Error::Config("reference field has zero norm".into()));
    }
    Ok(num / den)
}

/// `(v0 - v) / v0`, exactly zero when `v == v0`.
pub fn relative_change(v0: f64, v: f64) -> f64 {
    if v == v0 {
        0.0
    } else {
        (v0 - v) / v0
    }
}
