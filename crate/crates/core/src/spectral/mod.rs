//! Spectral substrate: transforms, derivatives, torus averages and norms.

mod norms;
mod transform;

pub use norms::{
    lebesgue_norm, sobolev_norm, sobolev_norm_spectral, weighted_spectral_norm, LpExponent,
};
pub use transform::Spectral;

use crate::domain::DomainSpec;
use crate::error::{NsasError, Result};

/// `Pi[g](y)`: mean of `g` over the periodic coordinates.
///
/// The periodic axes are the fastest in storage, so each reduced point owns
/// one contiguous block; blocks are summed in index order.
pub fn torus_average(domain: &DomainSpec, field: &[f64]) -> Result<Vec<f64>> {
    let full = domain.grid().len();
    if field.len() != full {
        return Err(NsasError::shape(full, field.len()));
    }
    let block: usize = domain.resolution[..domain.ell].iter().product();
    Ok(field
        .chunks(block)
        .map(|c| c.iter().sum::<f64>() / block as f64)
        .collect())
}

/// Broadcasts a reduced field back onto the full grid (constant in `x`).
pub fn lift_average(domain: &DomainSpec, reduced: &[f64]) -> Result<Vec<f64>> {
    let block: usize = domain.resolution[..domain.ell].iter().product();
    let expected = domain.grid().len() / block;
    if reduced.len() != expected {
        return Err(NsasError::shape(expected, reduced.len()));
    }
    let mut out = Vec::with_capacity(domain.grid().len());
    for &v in reduced {
        out.extend(std::iter::repeat_n(v, block));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn domain() -> DomainSpec {
        DomainSpec::new(1, 40.0, [8, 16, 16]).unwrap()
    }

    #[test]
    fn average_of_constant_and_sine() {
        let d = domain();
        let g = d.grid();
        let avg = torus_average(&d, &vec![1.5; g.len()]).unwrap();
        assert!(avg.iter().all(|v| (v - 1.5).abs() < 1e-15));
        let x = g.coordinates(0);
        let y = g.coordinates(1);
        let f: Vec<f64> = (0..g.len())
            .map(|i| {
                let p = g.unravel(i);
                x[p[0]].sin() * (1.0 + y[p[1]])
            })
            .collect();
        assert!(torus_average(&d, &f)
            .unwrap()
            .iter()
            .all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn average_matches_quadrature_oracle() {
        // (2 + cos z1) h(y): direct x-quadrature at each y gives 2 h(y)
        let d = domain();
        let g = d.grid();
        let x = g.coordinates(0);
        let y1 = g.coordinates(1);
        let y2 = g.coordinates(2);
        let h = |a: f64, b: f64| (-(a - 20.0).powi(2) / 30.0).exp() * (1.0 + 0.1 * b);
        let f: Vec<f64> = (0..g.len())
            .map(|i| {
                let p = g.unravel(i);
                (2.0 + x[p[0]].cos()) * h(y1[p[1]], y2[p[2]])
            })
            .collect();
        let avg = torus_average(&d, &f).unwrap();
        let r = d.reduced_grid();
        for (j, v) in avg.iter().enumerate() {
            let p = r.unravel(j);
            let expect = 2.0 * h(y1[p[0]], y2[p[1]]);
            assert!((v - expect).abs() < 1e-12, "{v} vs {expect}");
        }
    }

    #[test]
    fn average_is_zero_k_slice() {
        let d = domain();
        let g = d.grid();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f: Vec<f64> = (0..g.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let full = Spectral::new(g.clone()).forward(&f).unwrap();
        let red = Spectral::new(d.reduced_grid())
            .forward(&torus_average(&d, &f).unwrap())
            .unwrap();
        let torus = d.torus_volume();
        for (j, c) in red.iter().enumerate() {
            let p = d.reduced_grid().unravel(j);
            let k0 = full[g.index(0, p[0], p[1])];
            assert!((k0 / torus - c).norm() < 1e-12);
        }
    }

    #[test]
    fn average_idempotent_and_commutes_with_derivative() {
        let d = domain();
        let g = d.grid();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f: Vec<f64> = (0..g.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let avg = torus_average(&d, &f).unwrap();
        let twice = torus_average(&d, &lift_average(&d, &avg).unwrap()).unwrap();
        for (a, b) in avg.iter().zip(&twice) {
            assert!((a - b).abs() < 1e-15);
        }
        // d/dy commutes with Pi
        let full = Spectral::new(g.clone());
        let red = Spectral::new(d.reduced_grid());
        let lhs = torus_average(&d, &full.derivative(&f, 2, 1).unwrap()).unwrap();
        let rhs = red.derivative(&avg, 1, 1).unwrap();
        for (a, b) in lhs.iter().zip(&rhs) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
