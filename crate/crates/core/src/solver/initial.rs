//! Seeded small initial data and spectral prolongation.

use super::filter::ModeFilter;
use crate::domain::{DomainSpec, Grid};
use crate::error::{NsasError, Result};
use crate::field::StateField;
use crate::params::FluidParams;
use crate::spectral::{sobolev_norm_spectral, Spectral};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialDataSpec {
    pub seed: u64,
    /// Target `||u0||_{H^4} + ||u0||_{L^1}`.
    pub epsilon: f64,
    /// Largest periodic mode index `|n|` per periodic axis.
    pub band: usize,
    /// Gaussian envelope width `w` in `exp(-|y - y_c|^2 / w^2)`.
    pub envelope_width: f64,
    /// Restrict the data to the 2/3 box.
    pub dealias: bool,
}

impl Default for InitialDataSpec {
    fn default() -> Self {
        InitialDataSpec {
            seed: 0,
            epsilon: 1e-2,
            band: 1,
            envelope_width: 6.0,
            dealias: true,
        }
    }
}

/// `||u||_{H^4} + ||u||_{L^1}` with the Euclidean norm of the 4-vector
/// pointwise in `L^1`.
pub fn data_norm(spectral: &Spectral, fields: [&[f64]; 4]) -> Result<f64> {
    let mut h4 = 0.0;
    for f in fields {
        let s = spectral.forward(f)?;
        h4 += sobolev_norm_spectral(spectral, &s, 4)?.powi(2);
    }
    let dv = spectral.grid().cell_volume();
    let l1: f64 = (0..fields[0].len())
        .map(|z| fields.iter().map(|f| f[z] * f[z]).sum::<f64>().sqrt())
        .sum::<f64>()
        * dv;
    Ok(h4.sqrt() + l1)
}

/// Random trigonometric polynomial over the first `periodic_axes` axes,
/// times a Gaussian envelope centred in the remaining axes, for each of
/// four components. Unnormalized.
pub fn random_fields(
    grid: &Grid,
    periodic_axes: usize,
    seed: u64,
    band: usize,
    width: f64,
) -> Result<[Vec<f64>; 4]> {
    if !(width > 0.0) {
        return Err(NsasError::param("envelope width must be positive"));
    }
    let shape = grid.shape();
    for a in 0..periodic_axes {
        if 3 * band >= shape[a] && shape[a] > 1 {
            return Err(NsasError::param(format!(
                "band {band} outside the resolved lattice on axis {a}"
            )));
        }
    }
    let lengths = grid.lengths();
    let coords = [
        grid.coordinates(0),
        grid.coordinates(1),
        grid.coordinates(2),
    ];
    let b = band as i64;
    let mut modes: Vec<[i64; 3]> = Vec::new();
    let range = |a: usize| {
        if a < periodic_axes && shape[a] > 1 {
            -b..=b
        } else {
            0..=0
        }
    };
    for n2 in range(2) {
        for n1 in range(1) {
            for n0 in range(0) {
                modes.push([n0, n1, n2]);
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: [Vec<f64>; 4] = Default::default();
    for comp in out.iter_mut() {
        let coeffs: Vec<(f64, f64)> = modes
            .iter()
            .map(|n| {
                if *n == [0, 0, 0] {
                    let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                    (sign * rng.random_range(0.5..1.0), 0.0)
                } else {
                    (rng.sample(StandardNormal), rng.sample(StandardNormal))
                }
            })
            .collect();
        *comp = (0..grid.len())
            .map(|idx| {
                let p = grid.unravel(idx);
                let mut env = 1.0;
                let mut phase_base = [0.0; 3];
                for a in 0..3 {
                    let x = coords[a][p[a]];
                    if a < periodic_axes {
                        phase_base[a] = 2.0 * std::f64::consts::PI * x / lengths[a];
                    } else if shape[a] > 1 {
                        let d = x - 0.5 * lengths[a];
                        env *= (-(d * d) / (width * width)).exp();
                    }
                }
                let s: f64 = modes
                    .iter()
                    .zip(&coeffs)
                    .map(|(n, (c, s))| {
                        let th = n[0] as f64 * phase_base[0]
                            + n[1] as f64 * phase_base[1]
                            + n[2] as f64 * phase_base[2];
                        c * th.cos() + s * th.sin()
                    })
                    .sum();
                s * env
            })
            .collect();
    }
    Ok(out)
}

/// Filters (optionally) and rescales `fields` so that `data_norm = epsilon`.
pub fn normalize_fields(
    spectral: &Spectral,
    fields: &mut [Vec<f64>; 4],
    epsilon: f64,
    dealias: bool,
) -> Result<()> {
    if !(epsilon > 0.0) {
        return Err(NsasError::param(format!(
            "epsilon = {epsilon} must be positive"
        )));
    }
    if dealias {
        let filter = ModeFilter::new(spectral.grid(), true);
        for f in fields.iter_mut() {
            let mut s = spectral.forward(f)?;
            filter.apply(&mut s);
            *f = spectral.inverse(&s)?;
        }
    }
    let norm = data_norm(spectral, [&fields[0], &fields[1], &fields[2], &fields[3]])?;
    if !(norm > 0.0) {
        return Err(NsasError::param("initial data vanish"));
    }
    let scale = epsilon / norm;
    for f in fields.iter_mut() {
        f.iter_mut().for_each(|v| *v *= scale);
    }
    Ok(())
}

/// Deterministic small data with `||u0||_{H^4} + ||u0||_{L^1} = epsilon`.
pub fn make_initial_data(
    domain: &DomainSpec,
    params: &FluidParams,
    spec: &InitialDataSpec,
) -> Result<StateField> {
    let grid = domain.grid();
    let spectral = Spectral::new(grid.clone());
    let mut fields = random_fields(&grid, domain.ell, spec.seed, spec.band, spec.envelope_width)?;
    normalize_fields(&spectral, &mut fields, spec.epsilon, spec.dealias)?;
    let u = StateField::from_components(domain.clone(), *params, fields, 0.0)?;
    u.check()?;
    Ok(u)
}

/// Spectral interpolation of `u` onto a finer `resolution` (same lengths).
/// Modes below the coarse Nyquist index are copied; the rest are zero.
pub fn prolongate(u: &StateField, resolution: [usize; 3]) -> Result<StateField> {
    let old = u.domain.grid();
    let mut domain = u.domain.clone();
    domain.resolution = resolution;
    domain.validate()?;
    let new = domain.grid();
    let os = old.shape();
    let ns = new.shape();
    if (0..3).any(|a| ns[a] < os[a]) {
        return Err(NsasError::param("prolongation target must not be coarser"));
    }
    let from = Spectral::new(old.clone());
    let to = Spectral::new(new.clone());
    let map = |a: usize, i: usize| -> Option<usize> {
        let n = old.signed_mode(a, i);
        if old.is_nyquist(a, i) {
            return None;
        }
        Some(if n >= 0 {
            n as usize
        } else {
            (ns[a] as i64 + n) as usize
        })
    };
    let mut comps: [Vec<f64>; 4] = Default::default();
    for (c, f) in u.components().iter().enumerate() {
        let s = from.forward(f)?;
        let mut t = vec![Complex64::new(0.0, 0.0); new.len()];
        for (idx, v) in s.iter().enumerate() {
            let p = old.unravel(idx);
            if let (Some(a), Some(b), Some(cc)) = (map(0, p[0]), map(1, p[1]), map(2, p[2])) {
                t[new.index(a, b, cc)] = *v;
            }
        }
        comps[c] = to.inverse(&t)?;
    }
    StateField::from_components(domain, u.params, comps, u.time)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (DomainSpec, FluidParams) {
        (
            DomainSpec::new(1, 60.0, [8, 32, 32]).unwrap(),
            FluidParams::quadratic(1.0, 1.0).unwrap(),
        )
    }

    #[test]
    fn deterministic_and_normalized() {
        let (d, p) = setup();
        let spec = InitialDataSpec {
            seed: 11,
            epsilon: 0.01,
            ..Default::default()
        };
        let a = make_initial_data(&d, &p, &spec).unwrap();
        let b = make_initial_data(&d, &p, &spec).unwrap();
        assert_eq!(a.phi, b.phi);
        assert_eq!(a.momentum, b.momentum);
        let s = Spectral::new(d.grid());
        let n = data_norm(&s, a.components()).unwrap();
        assert!((n - 0.01).abs() < 1e-10 * 0.01);
        let c = make_initial_data(&d, &p, &InitialDataSpec { seed: 12, ..spec }).unwrap();
        assert_ne!(a.phi, c.phi);
    }

    #[test]
    fn positive_density_for_small_epsilon() {
        let (d, p) = setup();
        for seed in 0..5 {
            let spec = InitialDataSpec {
                seed,
                epsilon: 0.1,
                ..Default::default()
            };
            let u = make_initial_data(&d, &p, &spec).unwrap();
            assert!(u.min_density() > 0.0);
        }
    }

    #[test]
    fn dealiased_data_live_in_two_thirds_box() {
        let (d, p) = setup();
        let u = make_initial_data(&d, &p, &InitialDataSpec::default()).unwrap();
        let s = Spectral::new(d.grid());
        let f = ModeFilter::new(&d.grid(), true);
        let spec = s.forward(&u.phi).unwrap();
        let outside: f64 = (0..spec.len())
            .filter(|&i| !f.keeps(i))
            .map(|i| spec[i].norm())
            .fold(0.0, f64::max);
        assert!(outside < 1e-15);
    }

    #[test]
    fn prolongation_preserves_band_limited_fields() {
        let (d, p) = setup();
        let u = make_initial_data(&d, &p, &InitialDataSpec::default()).unwrap();
        let v = prolongate(&u, [16, 64, 64]).unwrap();
        let g = v.domain.grid();
        // every second point of the fine grid is a coarse point
        for k in 0..32 {
            for j in 0..32 {
                for i in 0..8 {
                    let a = u.phi[d.grid().index(i, j, k)];
                    let b = v.phi[g.index(2 * i, 2 * j, 2 * k)];
                    assert!((a - b).abs() < 1e-15);
                }
            }
        }
        let n0 = data_norm(&Spectral::new(d.grid()), u.components()).unwrap();
        let n1 = data_norm(&Spectral::new(g.clone()), v.components()).unwrap();
        // H^4 parts agree; L^1 by quadrature differs slightly
        assert!((n0 - n1).abs() < 1e-3 * n0);
    }
}
