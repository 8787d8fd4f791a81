//! Exact evolution of the linearized system, `u_hat(t) = exp(-t L_hat(q)) u_hat0`.

use super::expm::{expm, CMatrix};
use super::symbol::grid_symbol_entries;
use crate::error::{NsasError, Result};
use crate::field::{Spectra, StateField};
use crate::params::FluidParams;
use crate::spectral::Spectral;
use nalgebra::Vector4;
use num_complex::Complex64;
use rayon::prelude::*;

/// `exp(-t L_hat(q))`, with the Nyquist rule of [`grid_symbol_entries`].
pub fn propagator(q: [f64; 3], nyquist: [bool; 3], t: f64, params: &FluidParams) -> CMatrix<4> {
    let l = grid_symbol_entries(q, nyquist, params);
    expm(&(l * Complex64::new(-t, 0.0)))
}

pub(crate) fn nyquist_flags(spectral: &Spectral, idx: usize) -> [bool; 3] {
    let g = spectral.grid();
    let pos = g.unravel(idx);
    [0, 1, 2].map(|a| g.is_nyquist(a, pos[a]))
}

pub(crate) fn mode_vector(spectra: &Spectra, idx: usize) -> Vector4<Complex64> {
    Vector4::new(
        spectra[0][idx],
        spectra[1][idx],
        spectra[2][idx],
        spectra[3][idx],
    )
}

pub(crate) fn zero_spectra(n: usize) -> Spectra {
    let z = Complex64::new(0.0, 0.0);
    [vec![z; n], vec![z; n], vec![z; n], vec![z; n]]
}

/// Scatters per-mode 4-vectors back into component arrays.
pub(crate) fn gather(modes: Vec<Vector4<Complex64>>) -> Spectra {
    let n = modes.len();
    let mut out = zero_spectra(n);
    for (idx, v) in modes.into_iter().enumerate() {
        for c in 0..4 {
            out[c][idx] = v[c];
        }
    }
    out
}

/// Applies the semigroup at time `t` to every mode with `keep(idx)`; other
/// modes are zeroed. Modes that are identically zero are skipped.
pub fn semigroup_apply_spectra(
    spectral: &Spectral,
    params: &FluidParams,
    spectra: &Spectra,
    t: f64,
    keep: impl Fn(usize) -> bool + Sync,
) -> Result<Spectra> {
    if !(t >= 0.0) {
        return Err(NsasError::param(format!("time {t} must be >= 0")));
    }
    let n = spectral.len();
    for s in spectra {
        if s.len() != n {
            return Err(NsasError::shape(n, s.len()));
        }
    }
    let freqs = spectral.freqs();
    let modes: Vec<Vector4<Complex64>> = (0..n)
        .into_par_iter()
        .map(|idx| {
            let v = mode_vector(spectra, idx);
            if !keep(idx) || v.iter().all(|c| c.norm_sqr() == 0.0) {
                return Vector4::zeros();
            }
            if t == 0.0 {
                return v;
            }
            propagator(freqs[idx], nyquist_flags(spectral, idx), t, params) * v
        })
        .collect();
    Ok(gather(modes))
}

/// `U(t) u0`.
pub fn semigroup_apply(t: f64, u0: &StateField) -> Result<StateField> {
    let spectral = Spectral::new(u0.domain.grid());
    let spectra = u0.to_spectra(&spectral)?;
    let out = semigroup_apply_spectra(&spectral, &u0.params, &spectra, t, |_| true)?;
    StateField::from_spectra(u0.domain.clone(), u0.params, &spectral, &out, u0.time + t)
}

/// `|q| <= r0`
pub fn low_frequency_mask(spectral: &Spectral, r0: f64) -> Vec<bool> {
    let r2 = r0 * r0;
    spectral
        .freqs()
        .iter()
        .map(|q| q[0] * q[0] + q[1] * q[1] + q[2] * q[2] <= r2)
        .collect()
}

/// Splits spectra by the sharp cutoff `|q| <= r0`.
pub fn split_spectra(spectral: &Spectral, spectra: &Spectra, r0: f64) -> (Spectra, Spectra) {
    let mask = low_frequency_mask(spectral, r0);
    let z = Complex64::new(0.0, 0.0);
    let mut low = spectra.clone();
    let mut high = spectra.clone();
    for c in 0..4 {
        for (idx, &is_low) in mask.iter().enumerate() {
            if is_low {
                high[c][idx] = z;
            } else {
                low[c][idx] = z;
            }
        }
    }
    (low, high)
}

/// `(low, high)` parts of `u` for the cutoff `|q| <= r0`.
///
/// The low part is synthesized from its spectrum; the high part is the
/// physical remainder.
pub fn frequency_split(u: &StateField, r0: f64) -> Result<(StateField, StateField)> {
    if !(r0 > 0.0) {
        return Err(NsasError::param(format!(
            "cutoff r0 = {r0} must be positive"
        )));
    }
    let spectral = Spectral::new(u.domain.grid());
    let spectra = u.to_spectra(&spectral)?;
    let (low_spec, _) = split_spectra(&spectral, &spectra, r0);
    let low = StateField::from_spectra(u.domain.clone(), u.params, &spectral, &low_spec, u.time)?;
    let mut high = u.clone();
    for (h, l) in high.components_mut().into_iter().zip(low.components()) {
        for (a, b) in h.iter_mut().zip(l) {
            *a -= b;
        }
    }
    Ok((low, high))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::DomainSpec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn setup() -> StateField {
        let d = DomainSpec::new(1, 24.0, [4, 8, 8]).unwrap();
        let p = FluidParams::with_sound_speed(1.0, 1.0, 1.0).unwrap();
        let mut u = StateField::zeros(d, p);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for c in u.components_mut() {
            for v in c.iter_mut() {
                *v = rng.random_range(-1.0..1.0);
            }
        }
        u
    }

    fn l2(u: &StateField) -> f64 {
        u.components()
            .iter()
            .flat_map(|c| c.iter())
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
    }

    fn diff(a: &StateField, b: &StateField) -> f64 {
        a.components()
            .iter()
            .zip(b.components())
            .flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q) * (p - q)))
            .sum::<f64>()
            .sqrt()
    }

    #[test]
    fn identity_at_zero_time() {
        let u = setup();
        let v = semigroup_apply(0.0, &u).unwrap();
        assert!(diff(&u, &v) < 1e-12 * l2(&u));
        assert!(semigroup_apply(-1.0, &u).is_err());
    }

    #[test]
    fn transverse_mode_decays_viscously() {
        let d = DomainSpec::new(3, 1.0, [8, 8, 8]).unwrap();
        let p = FluidParams::quadratic(0.7, 1.3).unwrap();
        let g = d.grid();
        let z = g.coordinates(0);
        let mut u = StateField::zeros(d.clone(), p);
        // m = (0, cos(2 z1), 0): q = (2, 0, 0), m perpendicular to q
        for idx in 0..g.len() {
            u.momentum[1][idx] = (2.0 * z[g.unravel(idx)[0]]).cos();
        }
        let t = 0.3;
        let v = semigroup_apply(t, &u).unwrap();
        let factor = (-0.7 * 4.0 * t).exp();
        for idx in 0..g.len() {
            assert!((v.momentum[1][idx] - factor * u.momentum[1][idx]).abs() < 1e-13);
            assert!(v.phi[idx].abs() < 1e-13);
        }
    }

    #[test]
    fn semigroup_composition() {
        let u = setup();
        let a = semigroup_apply(1.4, &u).unwrap();
        let b = semigroup_apply(0.7, &semigroup_apply(0.7, &u).unwrap()).unwrap();
        assert!(diff(&a, &b) <= 1e-10 * l2(&u));
    }

    #[test]
    fn split_partitions_lattice() {
        let u = setup();
        let (low, high) = frequency_split(&u, 0.45).unwrap();
        let mut sum = low.clone();
        for (s, h) in sum.components_mut().into_iter().zip(high.components()) {
            for (a, b) in s.iter_mut().zip(h) {
                *a += b;
            }
        }
        assert!(diff(&sum, &u) < 1e-14 * l2(&u).max(1.0));
        // the low part carries no periodic-direction content
        let g = u.domain.grid();
        for idx in 0..g.len() {
            let pos = g.unravel(idx);
            let base = g.index(0, pos[1], pos[2]);
            assert!((low.phi[idx] - low.phi[base]).abs() < 1e-14);
        }
    }

    #[test]
    fn split_of_constant_and_oscillating_fields() {
        let d = DomainSpec::new(1, 24.0, [4, 8, 8]).unwrap();
        let p = FluidParams::with_sound_speed(1.0, 1.0, 1.0).unwrap();
        let g = d.grid();
        let mut c = StateField::zeros(d.clone(), p);
        c.phi.iter_mut().for_each(|v| *v = 0.3);
        let (_, high) = frequency_split(&c, 0.45).unwrap();
        assert!(high.phi.iter().all(|v| v.abs() < 1e-15));

        let z = g.coordinates(0);
        let mut s = StateField::zeros(d, p);
        for idx in 0..g.len() {
            s.phi[idx] = z[g.unravel(idx)[0]].sin();
        }
        let (low, _) = frequency_split(&s, 0.45).unwrap();
        assert!(low.phi.iter().all(|v| v.abs() < 1e-15));
    }
}
