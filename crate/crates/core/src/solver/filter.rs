use crate::domain::Grid;
use num_complex::Complex64;
use rayon::prelude::*;

/// Modes that survive nonlinear products: the 2/3 box when dealiasing,
/// otherwise everything but the Nyquist planes.
#[derive(Debug, Clone)]
pub struct ModeFilter {
    keep: Vec<bool>,
    kept: Vec<usize>,
}

impl ModeFilter {
    pub fn new(grid: &Grid, dealias: bool) -> Self {
        let keep: Vec<bool> = (0..grid.len())
            .map(|idx| {
                let pos = grid.unravel(idx);
                if dealias {
                    grid.dealias_keep(pos)
                } else {
                    !(0..3).any(|a| grid.is_nyquist(a, pos[a]))
                }
            })
            .collect();
        let kept = keep
            .iter()
            .enumerate()
            .filter_map(|(i, &k)| k.then_some(i))
            .collect();
        ModeFilter { keep, kept }
    }

    /// Keeps every mode.
    pub fn all(grid: &Grid) -> Self {
        ModeFilter {
            keep: vec![true; grid.len()],
            kept: (0..grid.len()).collect(),
        }
    }

    #[inline]
    pub fn keeps(&self, idx: usize) -> bool {
        self.keep[idx]
    }

    /// Storage indices of kept modes, ascending.
    pub fn kept(&self) -> &[usize] {
        &self.kept
    }

    pub fn apply(&self, spec: &mut [Complex64]) {
        spec.par_iter_mut()
            .zip(self.keep.par_iter())
            .for_each(|(c, &k)| {
                if !k {
                    *c = Complex64::new(0.0, 0.0);
                }
            });
    }
}
