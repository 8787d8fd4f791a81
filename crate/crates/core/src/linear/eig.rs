//! Dense eigenvalues of small complex matrices, used to cross-check the
//! closed forms.

use super::expm::CMatrix;
use num_complex::Complex64;

/// Eigenvalues of a 4x4 complex matrix via complex Schur decomposition.
pub fn eigenvalues4(m: &CMatrix<4>) -> [Complex64; 4] {
    let ev = m
        .schur()
        .eigenvalues()
        .expect("complex Schur form is triangular");
    [ev[0], ev[1], ev[2], ev[3]]
}

/// Largest pointwise distance under the best matching of two 4-element sets.
pub fn matched_deviation(a: &[Complex64; 4], b: &[Complex64; 4]) -> f64 {
    const PERMS: [[usize; 4]; 24] = [
        [0, 1, 2, 3],
        [0, 1, 3, 2],
        [0, 2, 1, 3],
        [0, 2, 3, 1],
        [0, 3, 1, 2],
        [0, 3, 2, 1],
        [1, 0, 2, 3],
        [1, 0, 3, 2],
        [1, 2, 0, 3],
        [1, 2, 3, 0],
        [1, 3, 0, 2],
        [1, 3, 2, 0],
        [2, 0, 1, 3],
        [2, 0, 3, 1],
        [2, 1, 0, 3],
        [2, 1, 3, 0],
        [2, 3, 0, 1],
        [2, 3, 1, 0],
        [3, 0, 1, 2],
        [3, 0, 2, 1],
        [3, 1, 0, 2],
        [3, 1, 2, 0],
        [3, 2, 0, 1],
        [3, 2, 1, 0],
    ];
    PERMS
        .iter()
        .map(|p| (0..4).map(|i| (a[i] - b[p[i]]).norm()).fold(0.0, f64::max))
        .fold(f64::INFINITY, f64::min)
}
