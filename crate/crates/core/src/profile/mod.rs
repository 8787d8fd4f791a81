//! Reduced profile systems in the unbounded directions.
//!
//! The profile `eta = (sigma, w)` lives on the reduced grid and solves
//! `eta_t + L_hat(0, xi) eta = B(eta)` with
//! `B_i = -sum_j d_j(w_i w_j) - alpha d_i(sigma^2)`, `j` and `d_i` running
//! over the open directions only. For `ell = 1` this is the 2-D system, for
//! `ell = 2` the 1-D one.

mod energy;
mod run;

pub use energy::{
    decay_functional_m0, energy_n, profile_sample, EnergyRecord, ProfileRecorder, ProfileSample,
    M0_TILDE_WEIGHTS, M0_WEIGHTS,
};
pub use run::{profile_resolve_dt, profile_run, ProfileSink, ProfileSolver};

use crate::domain::{DomainSpec, Grid};
use crate::error::{NsasError, Result};
use crate::field::{Spectra, StateField};
use crate::linear::semigroup::zero_spectra;
use crate::linear::symbol::grid_symbol_entries;
use crate::params::FluidParams;
use crate::solver::nonlinear::filtered;
use crate::solver::ModeFilter;
use crate::spectral::{lift_average, torus_average, Spectral};
use nalgebra::Vector4;
use num_complex::Complex64;
use rayon::prelude::*;

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileState {
    pub domain: DomainSpec,
    pub params: FluidParams,
    pub sigma: Vec<f64>,
    /// All three momentum components; `w[a]` for `a < ell` points along the
    /// torus, the rest is `w'`.
    pub w: [Vec<f64>; 3],
    pub time: f64,
}

impl ProfileState {
    pub fn zeros(domain: DomainSpec, params: FluidParams) -> Self {
        let n = domain.reduced_grid().len();
        ProfileState {
            domain,
            params,
            sigma: vec![0.0; n],
            w: [vec![0.0; n], vec![0.0; n], vec![0.0; n]],
            time: 0.0,
        }
    }

    pub fn from_components(
        domain: DomainSpec,
        params: FluidParams,
        components: [Vec<f64>; 4],
        time: f64,
    ) -> Result<Self> {
        let n = domain.reduced_grid().len();
        for c in &components {
            if c.len() != n {
                return Err(NsasError::shape(n, c.len()));
            }
        }
        let [sigma, w1, w2, w3] = components;
        Ok(ProfileState {
            domain,
            params,
            sigma,
            w: [w1, w2, w3],
            time,
        })
    }

    /// `eta = (Pi phi, Pi m)`.
    pub fn from_average(u: &StateField) -> Result<Self> {
        let [phi, m1, m2, m3] = u.components();
        Self::from_components(
            u.domain.clone(),
            u.params,
            [
                torus_average(&u.domain, phi)?,
                torus_average(&u.domain, m1)?,
                torus_average(&u.domain, m2)?,
                torus_average(&u.domain, m3)?,
            ],
            u.time,
        )
    }

    /// The profile as an `x`-independent state on the full grid.
    pub fn lift(&self) -> Result<StateField> {
        let [a, b, c, d] = self.components();
        StateField::from_components(
            self.domain.clone(),
            self.params,
            [
                lift_average(&self.domain, a)?,
                lift_average(&self.domain, b)?,
                lift_average(&self.domain, c)?,
                lift_average(&self.domain, d)?,
            ],
            self.time,
        )
    }

    pub fn grid(&self) -> Grid {
        self.domain.reduced_grid()
    }

    pub fn components(&self) -> [&[f64]; 4] {
        [&self.sigma, &self.w[0], &self.w[1], &self.w[2]]
    }

    pub fn check(&self) -> Result<()> {
        let n = self.grid().len();
        for c in self.components() {
            if c.len() != n {
                return Err(NsasError::shape(n, c.len()));
            }
            if c.iter().any(|v| !v.is_finite()) {
                return Err(NsasError::State("non-finite profile value".into()));
            }
        }
        Ok(())
    }

    pub fn to_spectra(&self, spectral: &Spectral) -> Result<Spectra> {
        let [a, b, c, d] = self.components();
        Ok([
            spectral.forward(a)?,
            spectral.forward(b)?,
            spectral.forward(c)?,
            spectral.forward(d)?,
        ])
    }

    pub fn from_spectra(
        domain: DomainSpec,
        params: FluidParams,
        spectral: &Spectral,
        spectra: &Spectra,
        time: f64,
    ) -> Result<Self> {
        let comps = [
            spectral.inverse(&spectra[0])?,
            spectral.inverse(&spectra[1])?,
            spectral.inverse(&spectra[2])?,
            spectral.inverse(&spectra[3])?,
        ];
        Self::from_components(domain, params, comps, time)
    }

    pub fn mean_sigma(&self) -> f64 {
        self.sigma.iter().sum::<f64>() / self.sigma.len() as f64
    }
}

/// Places reduced-axis values on the open axes of the full frequency vector.
fn lift_axes<T: Copy>(ell: usize, v: [T; 3], zero: T) -> [T; 3] {
    let mut out = [zero; 3];
    out[ell..].copy_from_slice(&v[..3 - ell]);
    out
}

/// `(q, nyquist)` of a reduced-grid mode as seen by the full symbol.
pub(crate) fn full_frequency(spectral: &Spectral, ell: usize, idx: usize) -> ([f64; 3], [bool; 3]) {
    let g = spectral.grid();
    let pos = g.unravel(idx);
    let nyq = [0, 1, 2].map(|a| g.is_nyquist(a, pos[a]));
    (
        lift_axes(ell, spectral.freqs()[idx], 0.0),
        lift_axes(ell, nyq, false),
    )
}

/// First-derivative wavenumbers (zero on Nyquist planes), lifted to full axes.
fn odd_wavenumbers(spectral: &Spectral, ell: usize, idx: usize) -> [f64; 3] {
    let (q, nyq) = full_frequency(spectral, ell, idx);
    [0, 1, 2].map(|a| if nyq[a] { 0.0 } else { q[a] })
}

type ProductSpectra = [[Option<Vec<Complex64>>; 3]; 3];

fn products(
    spectral: &Spectral,
    filter: &ModeFilter,
    ell: usize,
    sigma: &[f64],
    w: [&[f64]; 3],
) -> Result<(ProductSpectra, Vec<Complex64>)> {
    let mul = |a: &[f64], b: &[f64]| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| x * y).collect() };
    let mut ww: ProductSpectra = Default::default();
    for i in 0..3 {
        for j in ell..3 {
            if ww[i][j].is_none() {
                let s = filtered(spectral, filter, &mul(w[i], w[j]))?;
                if j != i && i >= ell {
                    ww[j][i] = Some(s.clone());
                }
                ww[i][j] = Some(s);
            }
        }
    }
    let s2 = filtered(spectral, filter, &mul(sigma, sigma))?;
    Ok((ww, s2))
}

/// Spectrum of `B` (three momentum components) from physical fields, with
/// every product passed through `filter`.
pub(crate) fn profile_source_spectrum(
    spectral: &Spectral,
    filter: &ModeFilter,
    params: &FluidParams,
    ell: usize,
    sigma: &[f64],
    w: [&[f64]; 3],
) -> Result<[Vec<Complex64>; 3]> {
    let (ww, s2) = products(spectral, filter, ell, sigma, w)?;
    let alpha = params.alpha;
    let mut out: [Vec<Complex64>; 3] = Default::default();
    for (i, o) in out.iter_mut().enumerate() {
        *o = (0..spectral.len())
            .into_par_iter()
            .map(|idx| {
                if !filter.keeps(idx) {
                    return Complex64::new(0.0, 0.0);
                }
                let q = odd_wavenumbers(spectral, ell, idx);
                let mut acc = Complex64::new(0.0, 0.0);
                for j in ell..3 {
                    acc += ww[i][j].as_ref().expect("open pair")[idx] * q[j];
                }
                if i >= ell {
                    acc += s2[idx] * (alpha * q[i]);
                }
                Complex64::new(0.0, -1.0) * acc
            })
            .collect();
    }
    Ok(out)
}

/// `-L_hat(0, xi) eta_hat` on every mode.
pub(crate) fn linear_rhs_spectra(
    spectral: &Spectral,
    params: &FluidParams,
    ell: usize,
    spectra: &Spectra,
) -> Spectra {
    let vals: Vec<Vector4<Complex64>> = (0..spectral.len())
        .into_par_iter()
        .map(|idx| {
            let (q, nyq) = full_frequency(spectral, ell, idx);
            let l = grid_symbol_entries(q, nyq, params);
            let v = Vector4::new(
                spectra[0][idx],
                spectra[1][idx],
                spectra[2][idx],
                spectra[3][idx],
            );
            -(l * v)
        })
        .collect();
    let mut out = zero_spectra(spectral.len());
    for (idx, v) in vals.into_iter().enumerate() {
        for c in 0..4 {
            out[c][idx] = v[c];
        }
    }
    out
}

/// Time derivative `-L_hat(0, xi) eta + B(eta)` with dealiased products.
pub fn profile_rhs(eta: &ProfileState) -> Result<[Vec<f64>; 4]> {
    eta.check()?;
    let grid = eta.grid();
    let spectral = Spectral::new(grid.clone());
    let filter = ModeFilter::new(&grid, true);
    let ell = eta.domain.ell;
    let spectra = eta.to_spectra(&spectral)?;
    let mut rhs = linear_rhs_spectra(&spectral, &eta.params, ell, &spectra);
    let [_, w1, w2, w3] = eta.components();
    let b = profile_source_spectrum(
        &spectral,
        &filter,
        &eta.params,
        ell,
        &eta.sigma,
        [w1, w2, w3],
    )?;
    for (i, bi) in b.iter().enumerate() {
        for (r, s) in rhs[i + 1].iter_mut().zip(bi) {
            *r += s;
        }
    }
    Ok([
        spectral.inverse(&rhs[0])?,
        spectral.inverse(&rhs[1])?,
        spectral.inverse(&rhs[2])?,
        spectral.inverse(&rhs[3])?,
    ])
}

fn require_open_dims(eta: &ProfileState, dims: usize) -> Result<()> {
    let open = 3 - eta.domain.ell;
    if open != dims {
        return Err(NsasError::shape(dims, open));
    }
    Ok(())
}

/// Right-hand side of the 2-D profile system (`ell = 1`).
pub fn profile_rhs_2d(eta: &ProfileState) -> Result<[Vec<f64>; 4]> {
    require_open_dims(eta, 2)?;
    profile_rhs(eta)
}

/// Right-hand side of the 1-D profile system (`ell = 2`).
pub fn profile_rhs_1d(eta: &ProfileState) -> Result<[Vec<f64>; 4]> {
    require_open_dims(eta, 1)?;
    profile_rhs(eta)
}

/// Flux `b` with `B = Div' b`: `b[i][j] = -P(w_i w_j) - alpha P(sigma^2)
/// delta_ij` for open `j`, zero for periodic `j`, where `P` is the 2/3
/// projection used by [`profile_rhs`].
#[derive(Debug, Clone)]
pub struct ProfileFlux {
    pub ell: usize,
    pub b: [[Vec<f64>; 3]; 3],
}

impl ProfileFlux {
    /// `Div' b`, evaluated spectrally.
    pub fn divergence(&self, spectral: &Spectral) -> Result<[Vec<f64>; 3]> {
        let mut out: [Vec<f64>; 3] = Default::default();
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = vec![0.0; spectral.len()];
            for j in self.ell..3 {
                let d = spectral.derivative(&self.b[i][j], j - self.ell, 1)?;
                acc.iter_mut().zip(d).for_each(|(a, b)| *a += b);
            }
            *o = acc;
        }
        Ok(out)
    }
}

pub fn profile_nonlinearity_flux(eta: &ProfileState) -> Result<ProfileFlux> {
    eta.check()?;
    let grid = eta.grid();
    let spectral = Spectral::new(grid.clone());
    let filter = ModeFilter::new(&grid, true);
    let ell = eta.domain.ell;
    let [_, w1, w2, w3] = eta.components();
    let (ww, s2) = products(&spectral, &filter, ell, &eta.sigma, [w1, w2, w3])?;
    let pressure = spectral.inverse(&s2)?;
    let n = spectral.len();
    let mut b: [[Vec<f64>; 3]; 3] = Default::default();
    for i in 0..3 {
        for j in 0..3 {
            b[i][j] = match &ww[i][j] {
                Some(s) if j >= ell => {
                    let mut v = spectral.inverse(s)?;
                    v.iter_mut().for_each(|x| *x = -*x);
                    if i == j {
                        v.iter_mut()
                            .zip(&pressure)
                            .for_each(|(x, p)| *x -= eta.params.alpha * p);
                    }
                    v
                }
                _ => vec![0.0; n],
            };
        }
    }
    Ok(ProfileFlux { ell, b })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::PressureLaw;
    use std::f64::consts::PI;

    fn params() -> FluidParams {
        FluidParams::new(1.0, 0.7, PressureLaw::polytropic_matching(1.0, 0.5)).unwrap()
    }

    fn bump(grid: &Grid, centre: f64, width: f64, scale: f64) -> Vec<f64> {
        let l = grid.lengths();
        let c0 = grid.coordinates(0);
        let c1 = grid.coordinates(1);
        (0..grid.len())
            .map(|idx| {
                let p = grid.unravel(idx);
                let d0 = c0[p[0]] - centre * l[0];
                let d1 = if grid.shape()[1] > 1 {
                    c1[p[1]] - 0.5 * l[1]
                } else {
                    0.0
                };
                scale * (-(d0 * d0 + d1 * d1) / (width * width)).exp()
            })
            .collect()
    }

    fn state_2d(amp: f64) -> ProfileState {
        let d = DomainSpec::new(1, 40.0, [8, 32, 32]).unwrap();
        let g = d.reduced_grid();
        ProfileState::from_components(
            d,
            params(),
            [
                bump(&g, 0.5, 5.0, amp),
                bump(&g, 0.45, 4.0, -0.5 * amp),
                bump(&g, 0.55, 6.0, 0.8 * amp),
                bump(&g, 0.5, 3.0, 0.3 * amp),
            ],
            0.0,
        )
        .unwrap()
    }

    /// The averaged linear system, written with spectral derivatives.
    fn averaged_linear(eta: &ProfileState) -> [Vec<f64>; 4] {
        let s = Spectral::new(eta.grid());
        let ell = eta.domain.ell;
        let p = eta.params;
        let d = |f: &[f64], a: usize| s.derivative(f, a - ell, 1).unwrap();
        let d2 = |f: &[f64], a: usize| s.derivative(f, a - ell, 2).unwrap();
        let n = eta.sigma.len();
        let mut div = vec![0.0; n];
        for a in ell..3 {
            div.iter_mut()
                .zip(d(&eta.w[a], a))
                .for_each(|(x, y)| *x += y);
        }
        let mut out: [Vec<f64>; 4] = Default::default();
        out[0] = div.iter().map(|v| -p.gamma * v).collect();
        for i in 0..3 {
            let mut r = vec![0.0; n];
            for a in ell..3 {
                let dd = d2(&eta.w[i], a);
                r.iter_mut().zip(dd).for_each(|(x, y)| *x += p.nu1 * y);
            }
            if i >= ell {
                for a in ell..3 {
                    let gd = if a == i {
                        d2(&eta.w[a], a)
                    } else {
                        d(&d(&eta.w[a], a), i)
                    };
                    r.iter_mut().zip(gd).for_each(|(x, y)| *x += p.nu2 * y);
                }
                let gs = d(&eta.sigma, i);
                r.iter_mut().zip(gs).for_each(|(x, y)| *x -= p.gamma * y);
            }
            out[i + 1] = r;
        }
        out
    }

    #[test]
    fn zero_and_constant_states_are_steady() {
        let d = DomainSpec::new(1, 40.0, [8, 16, 16]).unwrap();
        let z = ProfileState::zeros(d.clone(), params());
        let r = profile_rhs_2d(&z).unwrap();
        assert!(r.iter().all(|c| c.iter().all(|v| *v == 0.0)));
        let mut c = z.clone();
        c.sigma.iter_mut().for_each(|v| *v = 0.3);
        let r = profile_rhs_2d(&c).unwrap();
        assert!(r.iter().all(|c| c.iter().all(|v| v.abs() < 1e-14)));
    }

    #[test]
    fn linearization_matches_averaged_system() {
        // the quadratic source is even, so the symmetric difference isolates
        // the linear part
        let eta = state_2d(1e-8);
        let neg = state_2d(-1e-8);
        let rp = profile_rhs_2d(&eta).unwrap();
        let rn = profile_rhs_2d(&neg).unwrap();
        let r: Vec<Vec<f64>> = (0..4)
            .map(|c| {
                rp[c]
                    .iter()
                    .zip(&rn[c])
                    .map(|(a, b)| 0.5 * (a - b))
                    .collect()
            })
            .collect();
        let l = averaged_linear(&eta);
        let num: f64 = (0..4)
            .map(|c| {
                r[c].iter()
                    .zip(&l[c])
                    .map(|(a, b)| (a - b).powi(2))
                    .sum::<f64>()
            })
            .sum();
        let den: f64 = l.iter().map(|c| c.iter().map(|v| v * v).sum::<f64>()).sum();
        assert!((num / den).sqrt() < 1e-12, "{}", (num / den).sqrt());
    }

    #[test]
    fn sine_density_in_one_dimension() {
        let d = DomainSpec::new(2, 2.0 * PI, [8, 8, 32]).unwrap();
        let p = FluidParams::with_sound_speed(1.0, 1.0, 1.0).unwrap();
        let g = d.reduced_grid();
        let y = g.coordinates(0);
        let mut eta = ProfileState::zeros(d, p);
        eta.sigma = y.iter().map(|v| v.sin()).collect();
        let r = profile_rhs_1d(&eta).unwrap();
        assert!(r[0].iter().all(|v| v.abs() < 1e-13));
        assert!(r[1].iter().chain(&r[2]).all(|v| v.abs() < 1e-13));
        // -gamma cos y - alpha d_y sin^2 y
        for (k, v) in r[3].iter().enumerate() {
            let expect = -y[k].cos() - p.alpha * (2.0 * y[k]).sin();
            assert!((v - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn dimension_checks() {
        let d = DomainSpec::new(2, 40.0, [8, 8, 16]).unwrap();
        let eta = ProfileState::zeros(d, params());
        assert!(matches!(profile_rhs_2d(&eta), Err(NsasError::Shape { .. })));
        assert!(profile_rhs_1d(&eta).is_ok());
    }

    #[test]
    fn flux_of_constant_density() {
        let d = DomainSpec::new(1, 40.0, [8, 16, 16]).unwrap();
        let p = params();
        let mut eta = ProfileState::zeros(d, p);
        eta.sigma.iter_mut().for_each(|v| *v = 1.0);
        let f = profile_nonlinearity_flux(&eta).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j && i >= 1 { -p.alpha } else { 0.0 };
                assert!(f.b[i][j].iter().all(|v| (v - expect).abs() < 1e-14));
            }
        }
    }

    #[test]
    fn flux_divergence_is_the_source() {
        let eta = state_2d(0.05);
        let f = profile_nonlinearity_flux(&eta).unwrap();
        let s = Spectral::new(eta.grid());
        let div = f.divergence(&s).unwrap();
        let lin = averaged_linear(&eta);
        let full = profile_rhs_2d(&eta).unwrap();
        let mut err = 0.0f64;
        let mut scale = 0.0f64;
        for i in 0..3 {
            for z in 0..s.len() {
                let b = full[i + 1][z] - lin[i + 1][z];
                err = err.max((div[i][z] - b).abs());
                scale = scale.max(b.abs());
            }
        }
        assert!(scale > 1e-6 && err < 1e-10, "{err} {scale}");
    }

    #[test]
    fn average_and_lift_round_trip() {
        let eta = state_2d(0.01);
        let u = eta.lift().unwrap();
        let back = ProfileState::from_average(&u).unwrap();
        for c in 0..4 {
            let a = eta.components()[c];
            let b = back.components()[c];
            assert!(a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-15));
        }
    }
}
