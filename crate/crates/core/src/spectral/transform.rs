use crate::domain::Grid;
use crate::error::{NsasError, Result};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

/// Lines handed to one FFT call; bounds scratch reuse per task.
const LINES_PER_TASK: usize = 64;

/// Forward/inverse transforms on a fixed grid.
///
/// Coefficients approximate the continuous transform
/// `u_hat(q) = int u(z) exp(-i q.z) dz`, i.e. the DFT scaled by the cell
/// volume, so a constant `c` maps to `c * volume` at `q = 0` and
/// `int |u|^2 = sum |u_hat|^2 / volume`.
pub struct Spectral {
    grid: Grid,
    forward_plans: [Option<Arc<dyn Fft<f64>>>; 3],
    inverse_plans: [Option<Arc<dyn Fft<f64>>>; 3],
    freqs: Vec<[f64; 3]>,
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral")
            .field("grid", &self.grid)
            .finish()
    }
}

impl Spectral {
    pub fn new(grid: Grid) -> Self {
        let mut planner = FftPlanner::new();
        let shape = grid.shape();
        let plan = |planner: &mut FftPlanner<f64>, n: usize, inverse: bool| {
            (n > 1).then(|| {
                if inverse {
                    planner.plan_fft_inverse(n)
                } else {
                    planner.plan_fft_forward(n)
                }
            })
        };
        let forward_plans = [
            plan(&mut planner, shape[0], false),
            plan(&mut planner, shape[1], false),
            plan(&mut planner, shape[2], false),
        ];
        let inverse_plans = [
            plan(&mut planner, shape[0], true),
            plan(&mut planner, shape[1], true),
            plan(&mut planner, shape[2], true),
        ];
        let freqs = grid.frequencies();
        Spectral {
            grid,
            forward_plans,
            inverse_plans,
            freqs,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Frequency 3-vector per storage index.
    pub fn freqs(&self) -> &[[f64; 3]] {
        &self.freqs
    }

    fn check_len(&self, got: usize) -> Result<()> {
        if got != self.grid.len() {
            return Err(NsasError::shape(self.grid.len(), got));
        }
        Ok(())
    }

    pub fn forward(&self, field: &[f64]) -> Result<Vec<Complex64>> {
        self.check_len(field.len())?;
        let mut data: Vec<Complex64> = field.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward_in_place(&mut data);
        Ok(data)
    }

    /// Forward transform of complex data in place (same scaling as [`forward`]).
    ///
    /// [`forward`]: Spectral::forward
    pub fn forward_in_place(&self, data: &mut [Complex64]) {
        debug_assert_eq!(data.len(), self.grid.len());
        for axis in 0..3 {
            if let Some(plan) = &self.forward_plans[axis] {
                self.transform_axis(data, axis, plan);
            }
        }
        let scale = self.grid.cell_volume();
        data.par_iter_mut().for_each(|c| *c *= scale);
    }

    /// Inverse transform returning the real part.
    pub fn inverse(&self, spectrum: &[Complex64]) -> Result<Vec<f64>> {
        self.check_len(spectrum.len())?;
        let mut data = spectrum.to_vec();
        self.inverse_in_place(&mut data);
        Ok(data.par_iter().map(|c| c.re).collect())
    }

    pub fn inverse_in_place(&self, data: &mut [Complex64]) {
        debug_assert_eq!(data.len(), self.grid.len());
        for axis in 0..3 {
            if let Some(plan) = &self.inverse_plans[axis] {
                self.transform_axis(data, axis, plan);
            }
        }
        let scale = 1.0 / self.grid.volume();
        data.par_iter_mut().for_each(|c| *c *= scale);
    }

    fn transform_axis(&self, data: &mut [Complex64], axis: usize, plan: &Arc<dyn Fft<f64>>) {
        let shape = self.grid.shape();
        let n = shape[axis];
        let scratch_len = plan.get_inplace_scratch_len();
        if axis == 0 {
            data.par_chunks_mut(n * LINES_PER_TASK).for_each(|chunk| {
                let mut scratch = vec![Complex64::new(0.0, 0.0); scratch_len];
                plan.process_with_scratch(chunk, &mut scratch);
            });
            return;
        }
        // lines along `axis` have stride `stride`; transpose each block so the
        // lines become contiguous, transform, and transpose back.
        let stride: usize = shape[..axis].iter().product();
        let block = n * stride;
        let blocks = data.len() / block;
        if blocks >= stride {
            // many small blocks: one task per group of blocks
            let per_task = (LINES_PER_TASK / stride).max(1);
            data.par_chunks_mut(block * per_task).for_each(|group| {
                let mut tmp = vec![Complex64::new(0.0, 0.0); block];
                let mut scratch = vec![Complex64::new(0.0, 0.0); scratch_len];
                for blk in group.chunks_mut(block) {
                    gather(blk, &mut tmp, n, stride);
                    plan.process_with_scratch(&mut tmp, &mut scratch);
                    scatter(&tmp, blk, n, stride);
                }
            });
        } else {
            let mut tmp = vec![Complex64::new(0.0, 0.0); block];
            for blk in data.chunks_mut(block) {
                let src: &[Complex64] = blk;
                tmp.par_chunks_mut(n).enumerate().for_each(|(r, row)| {
                    for (j, v) in row.iter_mut().enumerate() {
                        *v = src[j * stride + r];
                    }
                });
                tmp.par_chunks_mut(n * LINES_PER_TASK).for_each(|chunk| {
                    let mut scratch = vec![Complex64::new(0.0, 0.0); scratch_len];
                    plan.process_with_scratch(chunk, &mut scratch);
                });
                let src: &[Complex64] = &tmp;
                blk.par_chunks_mut(stride).enumerate().for_each(|(j, row)| {
                    for (r, v) in row.iter_mut().enumerate() {
                        *v = src[r * n + j];
                    }
                });
            }
        }
    }

    /// Multiplies the spectrum of `field` by `(i q_axis)^order` and returns
    /// the real result. Odd orders drop the Nyquist mode on `axis`.
    pub fn derivative(&self, field: &[f64], axis: usize, order: u32) -> Result<Vec<f64>> {
        if axis >= 3 {
            return Err(NsasError::param(format!("axis {axis} out of range")));
        }
        if order == 0 {
            return Err(NsasError::param("derivative order must be >= 1"));
        }
        let mut spec = self.forward(field)?;
        self.derivative_in_spectrum(&mut spec, axis, order);
        self.inverse(&spec)
    }

    pub fn derivative_in_spectrum(&self, spec: &mut [Complex64], axis: usize, order: u32) {
        let grid = &self.grid;
        let odd = order % 2 == 1;
        spec.par_iter_mut()
            .zip(self.freqs.par_iter())
            .enumerate()
            .for_each(|(idx, (c, q))| {
                if odd && grid.is_nyquist(axis, grid.unravel(idx)[axis]) {
                    *c = Complex64::new(0.0, 0.0);
                } else {
                    *c *= Complex64::new(0.0, q[axis]).powu(order);
                }
            });
    }

    /// Zeroes every mode outside the 2/3-rule box.
    pub fn dealias(&self, spec: &mut [Complex64]) {
        let grid = &self.grid;
        spec.par_iter_mut().enumerate().for_each(|(idx, c)| {
            if !grid.dealias_keep(grid.unravel(idx)) {
                *c = Complex64::new(0.0, 0.0);
            }
        });
    }

    /// Zeroes Nyquist modes on every axis (keeps odd-derivative products real).
    pub fn drop_nyquist(&self, spec: &mut [Complex64]) {
        let grid = &self.grid;
        spec.par_iter_mut().enumerate().for_each(|(idx, c)| {
            let pos = grid.unravel(idx);
            if (0..3).any(|a| grid.is_nyquist(a, pos[a])) {
                *c = Complex64::new(0.0, 0.0);
            }
        });
    }

    /// Storage index of the mirrored frequency `-q`.
    pub fn mirror_index(&self, idx: usize) -> usize {
        let shape = self.grid.shape();
        let pos = self.grid.unravel(idx);
        let m = |a: usize| (shape[a] - pos[a]) % shape[a];
        self.grid.index(m(0), m(1), m(2))
    }
}

/// `tmp[r n + j] = blk[j stride + r]`
fn gather(blk: &[Complex64], tmp: &mut [Complex64], n: usize, stride: usize) {
    for r in 0..stride {
        for j in 0..n {
            tmp[r * n + j] = blk[j * stride + r];
        }
    }
}

fn scatter(tmp: &[Complex64], blk: &mut [Complex64], n: usize, stride: usize) {
    for r in 0..stride {
        for j in 0..n {
            blk[j * stride + r] = tmp[r * n + j];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn grid() -> Grid {
        Grid::new([8, 16, 4], [2.0 * PI, 30.0, 12.0]).unwrap()
    }

    #[test]
    fn constant_maps_to_zero_mode() {
        let s = Spectral::new(grid());
        let spec = s.forward(&vec![2.5; s.len()]).unwrap();
        let vol = s.grid().volume();
        assert!((spec[0].re - 2.5 * vol).abs() < 1e-12 * vol);
        assert!(spec[1..].iter().all(|c| c.norm() < 1e-10));
    }

    #[test]
    fn sine_has_two_modes() {
        let s = Spectral::new(grid());
        let g = s.grid().clone();
        let x = g.coordinates(0);
        let f: Vec<f64> = (0..g.len()).map(|i| x[g.unravel(i)[0]].sin()).collect();
        let spec = s.forward(&f).unwrap();
        let big: Vec<usize> = (0..g.len()).filter(|&i| spec[i].norm() > 1e-9).collect();
        assert_eq!(big, vec![g.index(1, 0, 0), g.index(7, 0, 0)]);
    }

    #[test]
    fn round_trip_and_hermitian() {
        let s = Spectral::new(grid());
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let f: Vec<f64> = (0..s.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let spec = s.forward(&f).unwrap();
        let back = s.inverse(&spec).unwrap();
        let scale = f.iter().map(|v| v.abs()).fold(0.0, f64::max);
        for (a, b) in f.iter().zip(&back) {
            assert!((a - b).abs() < 1e-12 * scale);
        }
        let smax = spec.iter().map(|c| c.norm()).fold(0.0, f64::max);
        for idx in 0..s.len() {
            let m = s.mirror_index(idx);
            assert!((spec[m] - spec[idx].conj()).norm() < 1e-12 * smax);
        }
    }

    #[test]
    fn shape_error() {
        let s = Spectral::new(grid());
        assert!(matches!(
            s.forward(&[1.0, 2.0]),
            Err(NsasError::Shape { .. })
        ));
    }

    #[test]
    fn derivative_of_sine() {
        let s = Spectral::new(grid());
        let g = s.grid().clone();
        let x = g.coordinates(0);
        let f: Vec<f64> = (0..g.len()).map(|i| x[g.unravel(i)[0]].sin()).collect();
        let df = s.derivative(&f, 0, 1).unwrap();
        for i in 0..g.len() {
            assert!((df[i] - x[g.unravel(i)[0]].cos()).abs() < 1e-12);
        }
        let c = s.derivative(&vec![3.0; g.len()], 2, 3).unwrap();
        assert!(c.iter().all(|v| v.abs() < 1e-12));
        assert!(s.derivative(&f, 0, 0).is_err());
        assert!(s.derivative(&f, 3, 1).is_err());
    }
}
