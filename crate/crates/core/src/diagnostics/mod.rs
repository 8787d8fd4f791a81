//! Norm series, torus-average and profile comparisons, sup-functionals and
//! decay fits.

pub mod fit;
pub mod series;
pub mod sup;

pub use fit::{default_window, detect_transient, fit_decay, DecayFit, DecayModel, DecaySeries};
pub use series::{profile_table, NsDiagnostics, SeriesTable, PROFILE_COLUMNS, SERIES_COLUMNS};
pub use sup::{SupFunctionalTracker, SupKind};

use crate::error::{NsasError, Result};
use crate::field::{Spectra, StateField};
use crate::profile::ProfileState;
use crate::spectral::{weighted_spectral_norm, Spectral};
use num_complex::Complex64;

/// `||d^k u||_{L^2}` for each `k` in `orders`, with
/// `||d^k u||^2 = sum_q |q|^(2k) |u_hat(q)|^2` summed over components.
pub fn derivative_norms(
    spectral: &Spectral,
    spectra: &[Vec<Complex64>],
    orders: &[u32],
) -> Vec<f64> {
    orders
        .iter()
        .map(|&k| {
            spectra
                .iter()
                .map(|s| weighted_spectral_norm(spectral, s, |p| p.powi(k as i32)).powi(2))
                .sum::<f64>()
                .sqrt()
        })
        .collect()
}

pub fn record_norms(u: &StateField, orders: &[u32]) -> Result<Vec<f64>> {
    if let Some(k) = orders.iter().find(|&&k| k > 4) {
        return Err(NsasError::param(format!(
            "derivative order {k} not in 0..=4"
        )));
    }
    let spectral = Spectral::new(u.domain.grid());
    let spectra = u.to_spectra(&spectral)?;
    Ok(derivative_norms(&spectral, &spectra, orders))
}

/// True when `idx` carries torus wavenumber `k = 0`.
pub fn is_torus_mean(spectral: &Spectral, ell: usize, idx: usize) -> bool {
    let pos = spectral.grid().unravel(idx);
    pos[..ell].iter().all(|&p| p == 0)
}

/// Spectra of `u - u_bar`: the `k = 0` modes removed.
pub fn oscillating_spectra(spectral: &Spectral, ell: usize, spectra: &Spectra) -> Spectra {
    let mut out = spectra.clone();
    for s in out.iter_mut() {
        for (idx, c) in s.iter_mut().enumerate() {
            if is_torus_mean(spectral, ell, idx) {
                *c = Complex64::new(0.0, 0.0);
            }
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct AverageComparison {
    pub u_bar: ProfileState,
    pub tilde: StateField,
    /// `[||u_tilde||, ||grad u_tilde||]`
    pub tilde_norms: [f64; 2],
}

pub fn compare_to_average(u: &StateField) -> Result<AverageComparison> {
    let ell = u.domain.ell;
    let spectral = Spectral::new(u.domain.grid());
    let spectra = u.to_spectra(&spectral)?;
    let osc = oscillating_spectra(&spectral, ell, &spectra);
    let n = derivative_norms(&spectral, &osc, &[0, 1]);
    Ok(AverageComparison {
        u_bar: ProfileState::from_average(u)?,
        tilde: StateField::from_spectra(u.domain.clone(), u.params, &spectral, &osc, u.time)?,
        tilde_norms: [n[0], n[1]],
    })
}

/// `(||u_bar - eta||_{L^2}, ||u_bar - eta||_{H^1})` on the reduced grid.
pub fn profile_difference(u_bar: &ProfileState, eta: &ProfileState) -> Result<(f64, f64)> {
    let grid = u_bar.grid();
    if eta.grid() != grid {
        return Err(NsasError::shape(grid.len(), eta.grid().len()));
    }
    let spectral = Spectral::new(grid);
    let a = u_bar.components();
    let b = eta.components();
    let mut diff: Vec<Vec<Complex64>> = Vec::with_capacity(4);
    for c in 0..4 {
        let d: Vec<f64> = a[c].iter().zip(b[c]).map(|(x, y)| x - y).collect();
        diff.push(spectral.forward(&d)?);
    }
    let n = derivative_norms(&spectral, &diff, &[0, 1]);
    Ok((n[0], (n[0] * n[0] + n[1] * n[1]).sqrt()))
}

fn aligned(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileDifference {
    pub t: f64,
    pub l2: f64,
    pub h1: f64,
}

/// `||u_bar - eta||_{H^1}` at each shared timestamp.
pub fn compare_to_profile(
    u_bar: &[ProfileState],
    eta: &[ProfileState],
) -> Result<Vec<ProfileDifference>> {
    if u_bar.len() != eta.len() {
        return Err(NsasError::Alignment(format!(
            "{} averaged snapshots against {} profile snapshots",
            u_bar.len(),
            eta.len()
        )));
    }
    u_bar
        .iter()
        .zip(eta)
        .map(|(a, b)| {
            if !aligned(a.time, b.time) {
                return Err(NsasError::Alignment(format!(
                    "timestamps {} and {} differ",
                    a.time, b.time
                )));
            }
            let (l2, h1) = profile_difference(a, b)?;
            Ok(ProfileDifference { t: a.time, l2, h1 })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::DomainSpec;
    use crate::params::FluidParams;
    use crate::solver::{make_initial_data, InitialDataSpec};
    use crate::spectral::lebesgue_norm;
    use std::f64::consts::PI;

    fn domain() -> DomainSpec {
        DomainSpec::new(1, 8.0 * PI, [8, 16, 16]).unwrap()
    }

    fn params() -> FluidParams {
        FluidParams::quadratic(1.0, 1.0).unwrap()
    }

    #[test]
    fn constant_field_has_no_gradient() {
        let d = domain();
        let mut u = StateField::zeros(d, params());
        u.phi.iter_mut().for_each(|v| *v = 0.2);
        let n = record_norms(&u, &[0, 1]).unwrap();
        assert!(n[1] < 1e-14);
        assert!((n[0] - lebesgue_norm(&u.domain.grid(), &u.phi, 2.0).unwrap()).abs() < 1e-12);
        assert!(record_norms(&u, &[5]).is_err());
    }

    #[test]
    fn single_mode_weighting() {
        // cos(2 x) normalised to unit L^2 mass, |q| = 2
        let d = domain();
        let g = d.grid();
        let x = g.coordinates(0);
        let mut u = StateField::zeros(d, params());
        for idx in 0..g.len() {
            u.phi[idx] = (2.0 * x[g.unravel(idx)[0]]).cos();
        }
        let l2 = lebesgue_norm(&g, &u.phi, 2.0).unwrap();
        u.phi.iter_mut().for_each(|v| *v /= l2);
        let n = record_norms(&u, &[0, 2]).unwrap();
        assert!((n[0] - 1.0).abs() < 1e-12);
        assert!((n[1] - 4.0).abs() < 1e-12);
    }

    #[test]
    fn average_split_is_orthogonal() {
        let d = domain();
        let u = make_initial_data(&d, &params(), &InitialDataSpec::default()).unwrap();
        let c = compare_to_average(&u).unwrap();
        let total = record_norms(&u, &[0]).unwrap()[0];
        let bar = record_norms(&c.u_bar.lift().unwrap(), &[0]).unwrap()[0];
        let reduced = {
            let s = Spectral::new(c.u_bar.grid());
            let sp = c.u_bar.to_spectra(&s).unwrap();
            derivative_norms(&s, &sp, &[0])[0]
        };
        assert!((bar * bar - reduced * reduced * d.torus_volume()).abs() < 1e-12 * bar * bar);
        let split = bar * bar + c.tilde_norms[0].powi(2);
        assert!((total * total - split).abs() < 1e-12 * total * total);
        // the oscillating part has no torus mean
        let again = compare_to_average(&c.tilde).unwrap();
        assert!(again
            .u_bar
            .components()
            .iter()
            .all(|f| f.iter().all(|v| v.abs() < 1e-15)));
    }

    #[test]
    fn x_independent_field_has_no_oscillation() {
        let d = domain();
        let u = make_initial_data(&d, &params(), &InitialDataSpec::default()).unwrap();
        let bar = ProfileState::from_average(&u).unwrap().lift().unwrap();
        let c = compare_to_average(&bar).unwrap();
        assert!(c.tilde_norms[0] < 1e-15 && c.tilde_norms[1] < 1e-15);
    }

    #[test]
    fn pure_oscillation_has_zero_average() {
        let d = domain();
        let g = d.grid();
        let x = g.coordinates(0);
        let y = g.coordinates(1);
        let mut u = StateField::zeros(d, params());
        for idx in 0..g.len() {
            let p = g.unravel(idx);
            u.momentum[1][idx] = x[p[0]].sin() * (-(y[p[1]] - 4.0 * PI).powi(2) / 9.0).exp();
        }
        let c = compare_to_average(&u).unwrap();
        assert!(c.u_bar.w[1].iter().all(|v| v.abs() < 1e-15));
        let n = record_norms(&u, &[0, 1]).unwrap();
        assert!((c.tilde_norms[0] - n[0]).abs() < 1e-14 && (c.tilde_norms[1] - n[1]).abs() < 1e-13);
    }

    #[test]
    fn profile_comparison_alignment() {
        let d = domain();
        let u = make_initial_data(&d, &params(), &InitialDataSpec::default()).unwrap();
        let eta = ProfileState::from_average(&u).unwrap();
        let r = compare_to_profile(std::slice::from_ref(&eta), std::slice::from_ref(&eta)).unwrap();
        assert_eq!(r[0].h1, 0.0);
        let mut late = eta.clone();
        late.time = 0.5;
        assert!(matches!(
            compare_to_profile(std::slice::from_ref(&eta), &[late]),
            Err(NsasError::Alignment(_))
        ));
        assert!(matches!(
            compare_to_profile(std::slice::from_ref(&eta), &[]),
            Err(NsasError::Alignment(_))
        ));
    }
}
