//! The momentum source `G(phi, m)` and its flux form `Div(T) + grad(g)`.

use super::filter::ModeFilter;
use crate::domain::Grid;
use crate::error::{NsasError, Result};
use crate::field::{StateField, VACUUM_MARGIN};
use crate::params::FluidParams;
use crate::spectral::Spectral;
use num_complex::Complex64;
use rayon::prelude::*;

const PAIRS: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];

fn pair_slot(i: usize, j: usize) -> usize {
    let (a, b) = if i <= j { (i, j) } else { (j, i) };
    PAIRS.iter().position(|&p| p == (a, b)).expect("valid pair")
}

pub(crate) fn vacuum_guard(phi: &[f64], gamma: f64) -> Result<()> {
    let mut min = f64::INFINITY;
    for &p in phi {
        if !p.is_finite() {
            return Err(NsasError::State("non-finite phi".into()));
        }
        min = min.min(1.0 + p / gamma);
    }
    if min < VACUUM_MARGIN {
        return Err(NsasError::State(format!(
            "minimum density {min} below vacuum margin {VACUUM_MARGIN}"
        )));
    }
    Ok(())
}

/// Physical-space ingredients of the source: the convective tensor
/// `-gamma/(phi+gamma) m_i m_j` (symmetric, 6 slots), the weighted momentum
/// `v = phi/(phi+gamma) m` and `F(phi)`.
struct Ingredients {
    convective: [Vec<f64>; 6],
    v: [Vec<f64>; 3],
    remainder: Vec<f64>,
}

fn ingredients(params: &FluidParams, phi: &[f64], m: [&[f64]; 3]) -> Result<Ingredients> {
    let g = params.gamma;
    vacuum_guard(phi, g)?;
    let n = phi.len();
    let convective = PAIRS.map(|(i, j)| {
        (0..n)
            .into_par_iter()
            .map(|z| -g / (phi[z] + g) * m[i][z] * m[j][z])
            .collect::<Vec<f64>>()
    });
    let v = [0, 1, 2].map(|i| {
        (0..n)
            .into_par_iter()
            .map(|z| phi[z] / (phi[z] + g) * m[i][z])
            .collect::<Vec<f64>>()
    });
    let remainder = phi.par_iter().map(|&p| params.remainder(p)).collect();
    Ok(Ingredients {
        convective,
        v,
        remainder,
    })
}

pub(crate) fn filtered(
    spectral: &Spectral,
    filter: &ModeFilter,
    field: &[f64],
) -> Result<Vec<Complex64>> {
    let mut s = spectral.forward(field)?;
    filter.apply(&mut s);
    Ok(s)
}

/// Spectrum of `G` (three momentum components) from physical fields, with
/// every product passed through `filter`.
pub(crate) fn source_spectrum(
    spectral: &Spectral,
    filter: &ModeFilter,
    params: &FluidParams,
    phi: &[f64],
    m: [&[f64]; 3],
) -> Result<[Vec<Complex64>; 3]> {
    let ing = ingredients(params, phi, m)?;
    let mut conv: Vec<Vec<Complex64>> = Vec::with_capacity(6);
    for f in &ing.convective {
        conv.push(filtered(spectral, filter, f)?);
    }
    let mut vh: Vec<Vec<Complex64>> = Vec::with_capacity(3);
    for f in &ing.v {
        vh.push(filtered(spectral, filter, f)?);
    }
    let fh = filtered(spectral, filter, &ing.remainder)?;
    let (nu1, nu2) = (params.nu1, params.nu2);
    let freqs = spectral.freqs();
    let grid = spectral.grid();
    let mut out: [Vec<Complex64>; 3] = Default::default();
    for (i, o) in out.iter_mut().enumerate() {
        *o = (0..spectral.len())
            .into_par_iter()
            .map(|idx| {
                if !filter.keeps(idx) {
                    return Complex64::new(0.0, 0.0);
                }
                // odd-derivative wavenumbers: zero on a Nyquist plane
                let pos = grid.unravel(idx);
                let q = [0, 1, 2].map(|a| {
                    if grid.is_nyquist(a, pos[a]) {
                        0.0
                    } else {
                        freqs[idx][a]
                    }
                });
                let p = q[0] * q[0] + q[1] * q[1] + q[2] * q[2];
                let mut div = Complex64::new(0.0, 0.0);
                let mut qv = Complex64::new(0.0, 0.0);
                for j in 0..3 {
                    div += conv[pair_slot(i, j)][idx] * q[j];
                    qv += vh[j][idx] * q[j];
                }
                let i_unit = Complex64::new(0.0, 1.0);
                i_unit * div + vh[i][idx] * (nu1 * p) + qv * (nu2 * q[i]) - i_unit * fh[idx] * q[i]
            })
            .collect();
    }
    Ok(out)
}

/// `G(phi, m)` on the grid, products not dealiased. Every first derivative
/// drops the Nyquist plane of its axis, as in [`Spectral::derivative`].
pub fn nonlinearity_g(u: &StateField) -> Result<[Vec<f64>; 3]> {
    nonlinearity_g_filtered(u, false)
}

/// `G(phi, m)` with products optionally restricted to the 2/3 box.
pub fn nonlinearity_g_filtered(u: &StateField, dealias: bool) -> Result<[Vec<f64>; 3]> {
    let grid = u.domain.grid();
    let spectral = Spectral::new(grid.clone());
    let filter = if dealias {
        ModeFilter::new(&grid, true)
    } else {
        ModeFilter::all(&grid)
    };
    let [phi, m1, m2, m3] = u.components();
    let spec = source_spectrum(&spectral, &filter, &u.params, phi, [m1, m2, m3])?;
    Ok([
        spectral.inverse(&spec[0])?,
        spectral.inverse(&spec[1])?,
        spectral.inverse(&spec[2])?,
    ])
}

/// `G = Div(T) + grad(g)` with
/// `T_ij = -gamma/(phi+gamma) m_i m_j - nu1 d_j v_i` and
/// `g = -nu2 Div(v) - F(phi)`, `v = phi/(phi+gamma) m`.
#[derive(Debug, Clone)]
pub struct FluxFields {
    /// `tensor[i][j] = T_ij`
    pub tensor: [[Vec<f64>; 3]; 3],
    pub scalar: Vec<f64>,
}

impl FluxFields {
    /// `(||T||_{L^1}, ||g||_{L^1})` with the pointwise Frobenius norm for `T`.
    pub fn l1_norms(&self, grid: &Grid) -> (f64, f64) {
        let dv = grid.cell_volume();
        let n = self.scalar.len();
        let t: f64 = (0..n)
            .map(|z| {
                let mut s = 0.0;
                for row in &self.tensor {
                    for c in row {
                        s += c[z] * c[z];
                    }
                }
                s.sqrt()
            })
            .sum::<f64>()
            * dv;
        let g: f64 = self.scalar.iter().map(|v| v.abs()).sum::<f64>() * dv;
        (t, g)
    }

    /// `Div(T) + grad(g)`, evaluated spectrally.
    pub fn reassemble(&self, spectral: &Spectral) -> Result<[Vec<f64>; 3]> {
        let mut out: [Vec<f64>; 3] = Default::default();
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = spectral.derivative(&self.scalar, i, 1)?;
            for j in 0..3 {
                if spectral.grid().shape()[j] == 1 {
                    continue;
                }
                let d = spectral.derivative(&self.tensor[i][j], j, 1)?;
                for (a, b) in acc.iter_mut().zip(d) {
                    *a += b;
                }
            }
            *o = acc;
        }
        Ok(out)
    }
}

pub fn flux_decomposition(u: &StateField) -> Result<FluxFields> {
    let grid = u.domain.grid();
    let spectral = Spectral::new(grid.clone());
    let [phi, m1, m2, m3] = u.components();
    let ing = ingredients(&u.params, phi, [m1, m2, m3])?;
    let n = phi.len();
    let active = |a: usize| grid.shape()[a] > 1;
    let mut grad_v: [[Vec<f64>; 3]; 3] = Default::default();
    for i in 0..3 {
        for j in 0..3 {
            grad_v[i][j] = if active(j) {
                spectral.derivative(&ing.v[i], j, 1)?
            } else {
                vec![0.0; n]
            };
        }
    }
    let nu1 = u.params.nu1;
    let tensor = [0, 1, 2].map(|i| {
        [0, 1, 2].map(|j| {
            let c = &ing.convective[pair_slot(i, j)];
            (0..n)
                .map(|z| c[z] - nu1 * grad_v[i][j][z])
                .collect::<Vec<f64>>()
        })
    });
    let nu2 = u.params.nu2;
    let scalar = (0..n)
        .map(|z| -nu2 * (grad_v[0][0][z] + grad_v[1][1][z] + grad_v[2][2][z]) - ing.remainder[z])
        .collect();
    Ok(FluxFields { tensor, scalar })
}
