//! Computational domains: the discrete stand-in for `T^ell x R^(3-ell)`.
//!
//! Every grid is stored as a 3-axis array in row-major order with the first
//! axis fastest. Reduced grids (the unbounded directions only) pad unused
//! axes with a single point of unit length so the same transforms and norms
//! apply unchanged.

use crate::error::{NsasError, Result};
use std::f64::consts::PI;

/// Default length of a truncated unbounded direction.
pub const DEFAULT_OPEN_LENGTH: f64 = 100.0 * 2.0 * PI;

/// Uniform periodic tensor grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    shape: [usize; 3],
    lengths: [f64; 3],
}

impl Grid {
    pub fn new(shape: [usize; 3], lengths: [f64; 3]) -> Result<Self> {
        for a in 0..3 {
            if shape[a] == 0 {
                return Err(NsasError::param("grid axis with zero points"));
            }
            if !(lengths[a] > 0.0) || !lengths[a].is_finite() {
                return Err(NsasError::param(format!(
                    "grid length {} on axis {a} must be positive",
                    lengths[a]
                )));
            }
        }
        Ok(Grid { shape, lengths })
    }

    pub fn shape(&self) -> [usize; 3] {
        self.shape
    }

    pub fn lengths(&self) -> [f64; 3] {
        self.lengths
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of axes carrying more than one point.
    pub fn active_dims(&self) -> usize {
        self.shape.iter().filter(|&&n| n > 1).count()
    }

    pub fn volume(&self) -> f64 {
        self.lengths.iter().product()
    }

    pub fn cell_volume(&self) -> f64 {
        self.volume() / self.len() as f64
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.shape[0] * (j + self.shape[1] * k)
    }

    #[inline]
    pub fn unravel(&self, idx: usize) -> [usize; 3] {
        let i = idx % self.shape[0];
        let r = idx / self.shape[0];
        [i, r % self.shape[1], r / self.shape[1]]
    }

    /// Signed lattice index `n` of position `idx` on `axis`.
    #[inline]
    pub fn signed_mode(&self, axis: usize, idx: usize) -> i64 {
        let n = self.shape[axis];
        if idx <= n / 2 {
            idx as i64
        } else {
            idx as i64 - n as i64
        }
    }

    /// `2 pi n / length` on `axis`.
    #[inline]
    pub fn wavenumber(&self, axis: usize, idx: usize) -> f64 {
        2.0 * PI * self.signed_mode(axis, idx) as f64 / self.lengths[axis]
    }

    pub fn wavenumbers(&self, axis: usize) -> Vec<f64> {
        (0..self.shape[axis])
            .map(|i| self.wavenumber(axis, i))
            .collect()
    }

    #[inline]
    pub fn is_nyquist(&self, axis: usize, idx: usize) -> bool {
        let n = self.shape[axis];
        n > 1 && n.is_multiple_of(2) && idx == n / 2
    }

    /// Inside the 2/3-rule box on every axis.
    #[inline]
    pub fn dealias_keep(&self, pos: [usize; 3]) -> bool {
        (0..3).all(|a| {
            let n = self.shape[a] as i64;
            n == 1 || 3 * self.signed_mode(a, pos[a]).abs() < n
        })
    }

    pub fn coordinates(&self, axis: usize) -> Vec<f64> {
        let n = self.shape[axis];
        (0..n)
            .map(|i| i as f64 * self.lengths[axis] / n as f64)
            .collect()
    }

    /// Largest `|q|` on the lattice.
    pub fn max_wavenumber(&self) -> f64 {
        (0..3)
            .map(|a| {
                let kmax = 2.0 * PI * (self.shape[a] / 2) as f64 / self.lengths[a];
                kmax * kmax
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Full frequency 3-vector at every lattice point, in storage order.
    pub fn frequencies(&self) -> Vec<[f64; 3]> {
        let k0 = self.wavenumbers(0);
        let k1 = self.wavenumbers(1);
        let k2 = self.wavenumbers(2);
        let mut out = Vec::with_capacity(self.len());
        for &c in &k2 {
            for &b in &k1 {
                for &a in &k0 {
                    out.push([a, b, c]);
                }
            }
        }
        out
    }
}

/// Dimensionality split, box lengths and resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainSpec {
    pub ell: usize,
    pub periodic_lengths: Vec<f64>,
    pub open_lengths: Vec<f64>,
    pub resolution: [usize; 3],
}

impl DomainSpec {
    /// Periodic axes of length `2 pi`, open axes of length `open_length`.
    pub fn new(ell: usize, open_length: f64, resolution: [usize; 3]) -> Result<Self> {
        if !(1..=3).contains(&ell) {
            return Err(NsasError::param(format!("ell = {ell} must be in 1..=3")));
        }
        let d = DomainSpec {
            ell,
            periodic_lengths: vec![2.0 * PI; ell],
            open_lengths: vec![open_length; 3 - ell],
            resolution,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.ell) {
            return Err(NsasError::param(format!(
                "ell = {} must be in 1..=3",
                self.ell
            )));
        }
        if self.periodic_lengths.len() != self.ell || self.open_lengths.len() != 3 - self.ell {
            return Err(NsasError::param("length arrays do not match ell"));
        }
        for &l in self.periodic_lengths.iter().chain(&self.open_lengths) {
            if !(l > 0.0) || !l.is_finite() {
                return Err(NsasError::param(format!("length {l} must be positive")));
            }
        }
        for &n in &self.resolution {
            if n < 4 || !n.is_power_of_two() {
                return Err(NsasError::param(format!(
                    "resolution {n} must be a power of two >= 4"
                )));
            }
        }
        Ok(())
    }

    pub fn lengths(&self) -> [f64; 3] {
        let mut l = [0.0; 3];
        for (a, v) in self
            .periodic_lengths
            .iter()
            .chain(&self.open_lengths)
            .enumerate()
        {
            l[a] = *v;
        }
        l
    }

    /// Full 3-D grid.
    pub fn grid(&self) -> Grid {
        Grid::new(self.resolution, self.lengths()).expect("validated domain")
    }

    /// Grid over the unbounded directions only, padded to three axes.
    pub fn reduced_grid(&self) -> Grid {
        let mut shape = [1; 3];
        let mut lengths = [1.0; 3];
        for (i, a) in (self.ell..3).enumerate() {
            shape[i] = self.resolution[a];
            lengths[i] = self.open_lengths[a - self.ell];
        }
        Grid::new(shape, lengths).expect("validated domain")
    }

    /// `|T^ell|`
    pub fn torus_volume(&self) -> f64 {
        self.periodic_lengths.iter().product()
    }

    /// Time after which sound (speed `gamma`, plus margin) wraps around the
    /// truncated directions. Infinite on the full torus.
    pub fn wrap_horizon(&self, gamma: f64) -> f64 {
        self.open_lengths
            .iter()
            .map(|&l| l / (2.0 * (gamma + 1.0)))
            .fold(f64::INFINITY, f64::min)
    }

    /// Frequency vector of a full-grid lattice point.
    pub fn frequency_at(&self, grid: &Grid, idx: usize) -> FrequencyVector {
        let pos = grid.unravel(idx);
        let q = [
            grid.wavenumber(0, pos[0]),
            grid.wavenumber(1, pos[1]),
            grid.wavenumber(2, pos[2]),
        ];
        FrequencyVector::new(self.ell, q)
    }
}

/// A point `(k, xi)` of the mixed Fourier lattice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyVector {
    ell: usize,
    q: [f64; 3],
}

impl FrequencyVector {
    pub fn new(ell: usize, q: [f64; 3]) -> Self {
        FrequencyVector { ell, q }
    }

    pub fn from_parts(k: &[f64], xi: &[f64]) -> Result<Self> {
        if k.len() + xi.len() != 3 || k.is_empty() {
            return Err(NsasError::param(
                "frequency needs 1..=3 periodic and 3 total components",
            ));
        }
        let mut q = [0.0; 3];
        for (a, v) in k.iter().chain(xi).enumerate() {
            q[a] = *v;
        }
        Ok(FrequencyVector { ell: k.len(), q })
    }

    /// Periodic wavenumbers.
    pub fn k(&self) -> &[f64] {
        &self.q[..self.ell]
    }

    /// Continuous-direction wavenumbers.
    pub fn xi(&self) -> &[f64] {
        &self.q[self.ell..]
    }

    pub fn full(&self) -> [f64; 3] {
        self.q
    }

    /// `p = |k|^2 + |xi|^2`
    pub fn p(&self) -> f64 {
        self.q.iter().map(|v| v * v).sum()
    }

    pub fn q_abs(&self) -> f64 {
        self.p().sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_is_two_pi_n_over_length() {
        let d = DomainSpec::new(1, 200.0, [8, 16, 16]).unwrap();
        let g = d.grid();
        assert_eq!(g.wavenumber(0, 1), 1.0);
        assert_eq!(g.wavenumber(0, 7), -1.0);
        assert!((g.wavenumber(1, 3) - 2.0 * PI * 3.0 / 200.0).abs() < 1e-15);
        assert!((g.wavenumber(1, 8) - 2.0 * PI * 8.0 / 200.0).abs() < 1e-15);
        assert!(g.is_nyquist(1, 8));
    }

    #[test]
    fn rejects_bad_domains() {
        assert!(DomainSpec::new(0, 10.0, [8, 8, 8]).is_err());
        assert!(DomainSpec::new(4, 10.0, [8, 8, 8]).is_err());
        assert!(DomainSpec::new(1, -1.0, [8, 8, 8]).is_err());
        assert!(DomainSpec::new(1, 10.0, [8, 12, 8]).is_err());
        assert!(DomainSpec::new(1, 10.0, [2, 8, 8]).is_err());
    }

    #[test]
    fn reduced_grid_keeps_open_axes() {
        let d = DomainSpec::new(2, 50.0, [8, 8, 64]).unwrap();
        let r = d.reduced_grid();
        assert_eq!(r.shape(), [64, 1, 1]);
        assert_eq!(r.lengths(), [50.0, 1.0, 1.0]);
        assert!((d.torus_volume() - 4.0 * PI * PI).abs() < 1e-12);
        let t = DomainSpec::new(3, 1.0, [8, 8, 8]).unwrap();
        assert_eq!(t.reduced_grid().len(), 1);
        assert!(t.wrap_horizon(1.0).is_infinite());
    }

    #[test]
    fn frequency_vector_parts() {
        let f = FrequencyVector::from_parts(&[1.0], &[0.5, -2.0]).unwrap();
        assert_eq!(f.k(), &[1.0]);
        assert_eq!(f.xi(), &[0.5, -2.0]);
        assert!((f.p() - 5.25).abs() < 1e-15);
        assert_eq!(FrequencyVector::new(3, [0.0; 3]).p(), 0.0);
    }

    #[test]
    fn index_round_trip() {
        let g = Grid::new([4, 8, 16], [1.0, 2.0, 3.0]).unwrap();
        for idx in [0, 5, 37, 511] {
            let [i, j, k] = g.unravel(idx);
            assert_eq!(g.index(i, j, k), idx);
        }
    }

    #[test]
    fn dealias_box() {
        let g = Grid::new([128, 1, 1], [1.0; 3]).unwrap();
        assert!(g.dealias_keep([42, 0, 0]));
        assert!(!g.dealias_keep([43, 0, 0]));
        assert!(g.dealias_keep([128 - 42, 0, 0]));
        assert!(!g.dealias_keep([128 - 43, 0, 0]));
    }
}
