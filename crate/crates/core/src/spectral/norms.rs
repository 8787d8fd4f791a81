use super::Spectral;
use crate::domain::Grid;
use crate::error::{NsasError, Result};
use num_complex::Complex64;

/// Supported Lebesgue exponents.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LpExponent {
    Finite(f64),
    Infinity,
}

impl LpExponent {
    const ALLOWED: [f64; 7] = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 10.0 / 3.0];

    pub fn new(p: f64) -> Result<Self> {
        if p == f64::INFINITY {
            return Ok(LpExponent::Infinity);
        }
        Self::ALLOWED
            .iter()
            .find(|&&a| (a - p).abs() < 1e-12)
            .map(|&a| LpExponent::Finite(a))
            .ok_or_else(|| NsasError::param(format!("unsupported Lebesgue exponent {p}")))
    }
}

/// `||f||_{L^p}` by the rectangle rule; `L^inf` is the sampled maximum.
pub fn lebesgue_norm(grid: &Grid, field: &[f64], exponent: f64) -> Result<f64> {
    if field.len() != grid.len() {
        return Err(NsasError::shape(grid.len(), field.len()));
    }
    match LpExponent::new(exponent)? {
        LpExponent::Infinity => Ok(field.iter().fold(0.0, |m, v| m.max(v.abs()))),
        LpExponent::Finite(p) => {
            let dv = grid.cell_volume();
            let sum: f64 = if p == 2.0 {
                field.iter().map(|v| v * v).sum()
            } else if p == 1.0 {
                field.iter().map(|v| v.abs()).sum()
            } else {
                field.iter().map(|v| v.abs().powf(p)).sum()
            };
            Ok((sum * dv).powf(1.0 / p))
        }
    }
}

/// `(sum_q w(|q|^2) |u_hat(q)|^2 / volume)^(1/2)`.
pub fn weighted_spectral_norm(
    spectral: &Spectral,
    spec: &[Complex64],
    weight: impl Fn(f64) -> f64,
) -> f64 {
    let sum: f64 = spec
        .iter()
        .zip(spectral.freqs())
        .map(|(c, q)| weight(q[0] * q[0] + q[1] * q[1] + q[2] * q[2]) * c.norm_sqr())
        .sum();
    (sum / spectral.grid().volume()).sqrt()
}

/// `H^s` norm from a spectrum, `s` in `0..=4`.
pub fn sobolev_norm_spectral(spectral: &Spectral, spec: &[Complex64], s: u32) -> Result<f64> {
    if s > 4 {
        return Err(NsasError::param(format!("Sobolev order {s} not in 0..=4")));
    }
    if spec.len() != spectral.len() {
        return Err(NsasError::shape(spectral.len(), spec.len()));
    }
    Ok(weighted_spectral_norm(spectral, spec, |p| {
        (1.0 + p).powi(s as i32)
    }))
}

/// `H^s` norm of a real field.
pub fn sobolev_norm(spectral: &Spectral, field: &[f64], s: u32) -> Result<f64> {
    let spec = spectral.forward(field)?;
    sobolev_norm_spectral(spectral, &spec, s)
}
