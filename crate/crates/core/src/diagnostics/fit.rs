//! Decay-model fits in log space.

use crate::error::{NsasError, Result};
use std::fmt;
use std::str::FromStr;

/// Samples below this are excluded from log fits.
pub const FLOOR: f64 = 1e-14;
pub const MIN_FIT_SAMPLES: usize = 10;
/// Log-log slope jump that still counts as transient.
pub const TRANSIENT_THRESHOLD: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct DecaySeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub label: String,
    /// Samples removed for being non-finite or below [`FLOOR`].
    pub dropped: usize,
}

impl DecaySeries {
    pub fn new(times: &[f64], values: &[f64], label: impl Into<String>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(NsasError::shape(times.len(), values.len()));
        }
        let label = label.into();
        let mut t = Vec::with_capacity(times.len());
        let mut v = Vec::with_capacity(values.len());
        let mut dropped = 0;
        for (&a, &b) in times.iter().zip(values) {
            if let Some(&last) = t.last() {
                if !(a > last) {
                    return Err(NsasError::Data(format!(
                        "{label}: times not strictly increasing at t = {a}"
                    )));
                }
            }
            if b.is_finite() && b >= FLOOR {
                t.push(a);
                v.push(b);
            } else {
                dropped += 1;
            }
        }
        if dropped > 0 {
            log::warn!("{label}: dropped {dropped} samples below {FLOOR}");
        }
        Ok(DecaySeries {
            times: t,
            values: v,
            label,
            dropped,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecayModel {
    /// `A (1+t)^beta`
    Power,
    /// `A (1+t)^beta ln(2+t)`
    PowerLog,
    /// `A exp(-r t)`
    Exponential,
}

impl fmt::Display for DecayModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DecayModel::Power => "power",
            DecayModel::PowerLog => "power_log",
            DecayModel::Exponential => "exp",
        })
    }
}

impl FromStr for DecayModel {
    type Err = NsasError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "power" => Ok(DecayModel::Power),
            "power_log" | "powerlog" => Ok(DecayModel::PowerLog),
            "exp" | "exponential" => Ok(DecayModel::Exponential),
            other => Err(NsasError::Config(format!("unknown decay model `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub model: DecayModel,
    /// `beta` for the power models, `r` for the exponential one.
    pub exponent_or_rate: f64,
    pub amplitude: f64,
    pub residual_rms: f64,
    pub window: (f64, f64),
    pub samples: usize,
}

/// Least squares of `ln y` against the model's regressor on `window`.
pub fn fit_decay(series: &DecaySeries, model: DecayModel, window: (f64, f64)) -> Result<DecayFit> {
    let (lo, hi) = window;
    if !(lo < hi) {
        return Err(NsasError::Data(format!("empty window [{lo}, {hi}]")));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&t, &v) in series.times.iter().zip(&series.values) {
        if t < lo || t > hi {
            continue;
        }
        let (x, y) = match model {
            DecayModel::Power => ((1.0 + t).ln(), v.ln()),
            DecayModel::PowerLog => ((1.0 + t).ln(), v.ln() - (2.0 + t).ln().ln()),
            DecayModel::Exponential => (t, v.ln()),
        };
        xs.push(x);
        ys.push(y);
    }
    if xs.len() < MIN_FIT_SAMPLES {
        return Err(NsasError::Data(format!(
            "{}: {} samples in [{lo}, {hi}], need {MIN_FIT_SAMPLES}",
            series.label,
            xs.len()
        )));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if !(sxx > 0.0) {
        return Err(NsasError::Data(format!(
            "{}: degenerate window",
            series.label
        )));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    Ok(DecayFit {
        model,
        exponent_or_rate: if model == DecayModel::Exponential {
            -slope
        } else {
            slope
        },
        amplitude: intercept.exp(),
        residual_rms: (rss / n).sqrt(),
        window,
        samples: xs.len(),
    })
}

/// Last sample time at which the log-log slope between neighbouring
/// segments jumps by more than [`TRANSIENT_THRESHOLD`]; 0 if never.
pub fn detect_transient(series: &DecaySeries) -> f64 {
    let lx: Vec<f64> = series.times.iter().map(|t| (1.0 + t).ln()).collect();
    let ly: Vec<f64> = series.values.iter().map(|v| v.ln()).collect();
    let slopes: Vec<f64> = (1..lx.len())
        .map(|k| (ly[k] - ly[k - 1]) / (lx[k] - lx[k - 1]))
        .collect();
    let mut last = 0.0;
    for k in 1..slopes.len() {
        if (slopes[k] - slopes[k - 1]).abs() > TRANSIENT_THRESHOLD {
            last = series.times[k];
        }
    }
    last
}

/// `[max(10, 5 transient), 0.9 t_wrap]`.
pub fn default_window(series: &DecaySeries, t_wrap: f64) -> (f64, f64) {
    (10f64.max(5.0 * detect_transient(series)), 0.9 * t_wrap)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synth(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> DecaySeries {
        let t: Vec<f64> = (0..n)
            .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
            .collect();
        let v: Vec<f64> = t.iter().map(|&t| f(t)).collect();
        DecaySeries::new(&t, &v, "synthetic").unwrap()
    }

    #[test]
    fn exact_power_law() {
        let s = synth(|t| (1.0 + t).powf(-0.5), 10.0, 100.0, 50);
        let f = fit_decay(&s, DecayModel::Power, (10.0, 100.0)).unwrap();
        assert!((f.exponent_or_rate + 0.5).abs() < 1e-10);
        assert!(f.residual_rms < 1e-10);
        assert!((f.amplitude - 1.0).abs() < 1e-10);
    }

    #[test]
    fn exact_exponential() {
        let s = synth(|t| 3.0 * (-0.2 * t).exp(), 0.0, 50.0, 40);
        let f = fit_decay(&s, DecayModel::Exponential, (0.0, 50.0)).unwrap();
        assert!((f.exponent_or_rate - 0.2).abs() < 1e-10);
        assert!((f.amplitude - 3.0).abs() < 1e-9);
    }

    #[test]
    fn log_factor_contaminates_power_fit() {
        let g = |t: f64| (1.0 + t).powf(-0.75) * (2.0 + t).ln();
        let s = synth(g, 10.0, 100.0, 60);
        let p = fit_decay(&s, DecayModel::Power, (10.0, 100.0)).unwrap();
        // d ln ln(2+t) / d ln(1+t) ~ 1 / ln t ~ 0.27 on this window
        assert!(
            p.exponent_or_rate > -0.50 && p.exponent_or_rate < -0.45,
            "{}",
            p.exponent_or_rate
        );
        let pl = fit_decay(&s, DecayModel::PowerLog, (10.0, 100.0)).unwrap();
        assert!((pl.exponent_or_rate + 0.75).abs() < 1e-6);
        assert!(pl.residual_rms < 1e-10);
    }

    #[test]
    fn too_few_samples() {
        let s = synth(|t| 1.0 / (1.0 + t), 0.0, 100.0, 30);
        assert!(matches!(
            fit_decay(&s, DecayModel::Power, (10.0, 20.0)),
            Err(NsasError::Data(_))
        ));
    }

    #[test]
    fn tiny_values_are_dropped() {
        let s = DecaySeries::new(&[0.0, 1.0, 2.0], &[1.0, 1e-20, 0.5], "x").unwrap();
        assert_eq!(s.dropped, 1);
        assert_eq!(s.values, vec![1.0, 0.5]);
        assert!(DecaySeries::new(&[0.0, 0.0], &[1.0, 1.0], "x").is_err());
    }

    #[test]
    fn transient_and_window() {
        // a kink at t = 4 between two power laws
        let f = |t: f64| {
            if t < 4.0 {
                (1.0 + t).powf(-0.1)
            } else {
                5f64.powf(-0.1) * ((1.0 + t) / 5.0).powf(-0.5)
            }
        };
        let s = synth(f, 0.0, 200.0, 401);
        let tr = detect_transient(&s);
        assert!((tr - 4.5).abs() < 0.51, "{tr}");
        let w = default_window(&s, 100.0);
        assert!((w.0 - 5.0 * tr).abs() < 1e-12 && (w.1 - 90.0).abs() < 1e-12);
        let smooth = synth(|t| (1.0 + t).powf(-0.5), 0.0, 100.0, 200);
        assert_eq!(default_window(&smooth, 100.0).0, 10.0);
    }
}
