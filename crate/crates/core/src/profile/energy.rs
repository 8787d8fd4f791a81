//! Energy functional `N(t)` and the weighted sup-functionals of the profile.

use super::run::{ProfileSink, ProfileSolver};
use super::ProfileState;
use crate::error::Result;
use crate::field::Spectra;
use crate::spectral::{weighted_spectral_norm, Spectral};

/// `(1+t)` powers on `||eta||` and `||d_y eta||` in `M0`.
pub const M0_WEIGHTS: (f64, f64) = (0.5, 1.0);
/// Slower weights used when the profile is one-dimensional.
pub const M0_TILDE_WEIGHTS: (f64, f64) = (0.25, 0.75);

/// Norms of one profile snapshot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileSample {
    pub t: f64,
    pub l2_eta: f64,
    pub l2_dy_eta: f64,
    pub h2_eta_sq: f64,
    /// `||eta_t||_{H^1}^2 + ||d_y w||_{H^2}^2 + ||d_y sigma||_{H^1}^2`
    pub dissipation: f64,
}

fn sum_sq(
    spectral: &Spectral,
    spectra: &[Vec<num_complex::Complex64>],
    w: impl Fn(f64) -> f64 + Copy,
) -> f64 {
    spectra
        .iter()
        .map(|s| weighted_spectral_norm(spectral, s, w).powi(2))
        .sum()
}

/// Norms of `eta` and of its time derivative `eta_t` (both as spectra).
pub fn sample_from_spectra(
    spectral: &Spectral,
    t: f64,
    eta: &Spectra,
    eta_t: &Spectra,
) -> ProfileSample {
    let l2 = sum_sq(spectral, eta, |_| 1.0).sqrt();
    let dy = sum_sq(spectral, eta, |p| p).sqrt();
    let h2 = sum_sq(spectral, eta, |p| (1.0 + p) * (1.0 + p));
    let dt_h1 = sum_sq(spectral, eta_t, |p| 1.0 + p);
    let dw = sum_sq(spectral, &eta[1..], |p| p * (1.0 + p) * (1.0 + p));
    let ds = sum_sq(spectral, &eta[..1], |p| p * (1.0 + p));
    ProfileSample {
        t,
        l2_eta: l2,
        l2_dy_eta: dy,
        h2_eta_sq: h2,
        dissipation: dt_h1 + dw + ds,
    }
}

pub fn profile_sample(solver: &ProfileSolver) -> Result<ProfileSample> {
    let rhs = solver.rhs()?;
    Ok(sample_from_spectra(
        solver.spectral(),
        solver.time(),
        solver.spectra(),
        &rhs,
    ))
}

/// Records samples and, optionally, full states.
#[derive(Debug, Default)]
pub struct ProfileRecorder {
    pub samples: Vec<ProfileSample>,
    pub keep_states: bool,
    pub states: Vec<ProfileState>,
}

impl ProfileRecorder {
    pub fn with_states() -> Self {
        ProfileRecorder {
            keep_states: true,
            ..Default::default()
        }
    }
}

impl ProfileSink for ProfileRecorder {
    fn observe(&mut self, solver: &ProfileSolver) -> Result<()> {
        self.samples.push(profile_sample(solver)?);
        if self.keep_states {
            self.states.push(solver.state()?);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyRecord {
    pub t: f64,
    pub eta_h2_sq: f64,
    pub accumulated_dissipation: f64,
    pub n_t: f64,
}

/// `N(t) = ||eta||_{H^2}^2 + int_0^t D`, trapezoid rule over the samples.
pub fn energy_n(samples: &[ProfileSample]) -> Vec<EnergyRecord> {
    let mut acc = 0.0;
    samples
        .iter()
        .enumerate()
        .map(|(k, s)| {
            if k > 0 {
                let p = &samples[k - 1];
                acc += 0.5 * (s.t - p.t) * (s.dissipation + p.dissipation);
            }
            EnergyRecord {
                t: s.t,
                eta_h2_sq: s.h2_eta_sq,
                accumulated_dissipation: acc,
                n_t: s.h2_eta_sq + acc,
            }
        })
        .collect()
}

/// Running sup of `(1+t)^a ||eta|| + (1+t)^b ||d_y eta||` with
/// `(a, b) = weights`.
pub fn decay_functional_m0(samples: &[ProfileSample], weights: (f64, f64)) -> Vec<f64> {
    let mut sup = 0.0f64;
    samples
        .iter()
        .map(|s| {
            let v =
                (1.0 + s.t).powf(weights.0) * s.l2_eta + (1.0 + s.t).powf(weights.1) * s.l2_dy_eta;
            sup = sup.max(v);
            sup
        })
        .collect()
}
