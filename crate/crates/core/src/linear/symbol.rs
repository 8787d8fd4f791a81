//! Fourier symbol of the linearized operator and its closed-form spectrum.

use super::expm::CMatrix;
use crate::domain::FrequencyVector;
use crate::error::{NsasError, Result};
use crate::params::FluidParams;
use num_complex::Complex64;

/// Upper end of the sampled `p` range used to verify the gap.
pub const GAP_CHECK_P_MAX: f64 = 1e4;
const GAP_CHECK_SAMPLES: usize = 20_000;
const GAP_CHECK_REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct SymbolMatrix {
    pub entries: CMatrix<4>,
    pub freq: FrequencyVector,
    pub params: FluidParams,
}

/// `L_hat(q) = [[0, i gamma q^T], [i gamma q, nu1 |q|^2 I + nu2 q q^T]]`
/// for the full frequency `q = (k, xi)`.
pub fn symbol_entries(q: [f64; 3], params: &FluidParams) -> CMatrix<4> {
    let p: f64 = q.iter().map(|v| v * v).sum();
    let mut m = CMatrix::<4>::zeros();
    for i in 0..3 {
        let ig = Complex64::new(0.0, params.gamma * q[i]);
        m[(0, 1 + i)] = ig;
        m[(1 + i, 0)] = ig;
        for j in 0..3 {
            let mut v = params.nu2 * q[i] * q[j];
            if i == j {
                v += params.nu1 * p;
            }
            m[(1 + i, 1 + j)] = Complex64::new(v, 0.0);
        }
    }
    m
}

/// Symbol acting on a real grid field: on an axis where the mode sits at the
/// Nyquist index, odd powers of that wavenumber are dropped (the same rule
/// as odd spectral derivatives), which keeps the symbol real there.
pub fn grid_symbol_entries(q: [f64; 3], nyquist: [bool; 3], params: &FluidParams) -> CMatrix<4> {
    if !nyquist.iter().any(|&b| b) {
        return symbol_entries(q, params);
    }
    let p: f64 = q.iter().map(|v| v * v).sum();
    let odd = |i: usize| if nyquist[i] { 0.0 } else { q[i] };
    let mut m = CMatrix::<4>::zeros();
    for i in 0..3 {
        let ig = Complex64::new(0.0, params.gamma * odd(i));
        m[(0, 1 + i)] = ig;
        m[(1 + i, 0)] = ig;
        for j in 0..3 {
            let v = if i == j {
                params.nu2 * q[i] * q[i] + params.nu1 * p
            } else {
                params.nu2 * odd(i) * odd(j)
            };
            m[(1 + i, 1 + j)] = Complex64::new(v, 0.0);
        }
    }
    m
}

pub fn assemble_symbol(freq: FrequencyVector, params: &FluidParams) -> SymbolMatrix {
    SymbolMatrix {
        entries: symbol_entries(freq.full(), params),
        freq,
        params: *params,
    }
}

/// The four eigenvalues at one `p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenSet {
    pub lambda1: Complex64,
    pub lambda2: Complex64,
    pub lambda_plus: Complex64,
    pub lambda_minus: Complex64,
    pub p: f64,
}

impl EigenSet {
    pub fn as_array(&self) -> [Complex64; 4] {
        [
            self.lambda1,
            self.lambda2,
            self.lambda_plus,
            self.lambda_minus,
        ]
    }

    pub fn min_real_part(&self) -> f64 {
        self.as_array()
            .iter()
            .map(|l| l.re)
            .fold(f64::INFINITY, f64::min)
    }
}

/// `(nu1 + nu2)^2 p^2 - 4 gamma^2 p`
pub fn discriminant(p: f64, params: &FluidParams) -> f64 {
    let s = (params.nu1 + params.nu2) * p;
    s * s - 4.0 * params.gamma * params.gamma * p
}

/// Closed-form eigenvalues. When the discriminant is negative `lambda_plus`
/// carries the non-negative imaginary part. On the real branch the smaller
/// root is taken as `gamma^2 p / lambda_plus` to avoid cancellation.
pub fn symbol_eigenvalues(p: f64, params: &FluidParams) -> Result<EigenSet> {
    if !(p >= 0.0) {
        return Err(NsasError::param(format!("p = {p} must be >= 0")));
    }
    let s = (params.nu1 + params.nu2) * p;
    let disc = discriminant(p, params);
    let (plus, minus) = if disc < 0.0 {
        let im = 0.5 * (-disc).sqrt();
        (Complex64::new(0.5 * s, im), Complex64::new(0.5 * s, -im))
    } else {
        let big = 0.5 * (s + disc.sqrt());
        let small = if big > 0.0 {
            params.gamma * params.gamma * p / big
        } else {
            0.0
        };
        (Complex64::new(big, 0.0), Complex64::new(small, 0.0))
    };
    let l1 = Complex64::new(params.nu1 * p, 0.0);
    Ok(EigenSet {
        lambda1: l1,
        lambda2: l1,
        lambda_plus: plus,
        lambda_minus: minus,
        p,
    })
}

/// `min{1, gamma^2 / (nu1 + nu2)^2}`: `r0^2` must lie strictly below this.
pub fn admissible_r0_sq_bound(params: &FluidParams) -> f64 {
    let g2 = params.gamma * params.gamma;
    let s = params.nu1 + params.nu2;
    (g2 / (s * s)).min(1.0)
}

/// Default cutoff `r0^2 = 0.9 * min{1, gamma^2 / (nu1 + nu2)^2}`.
pub fn default_r0_sq(params: &FluidParams) -> f64 {
    0.9 * admissible_r0_sq_bound(params)
}

/// `a = min{nu1 r0^2, gamma^2 / (2 (nu1 + nu2))}`.
pub fn gap_bound(r0_sq: f64, nu1: f64, nu2: f64, gamma: f64) -> f64 {
    (nu1 * r0_sq).min(gamma * gamma / (2.0 * (nu1 + nu2)))
}

/// Smallest eigenvalue real part over log-spaced `p` in `[p_lo, p_hi]`.
pub fn sampled_min_real_part(p_lo: f64, p_hi: f64, samples: usize, params: &FluidParams) -> f64 {
    let (a, b) = (p_lo.ln(), p_hi.ln());
    (0..samples)
        .map(|i| {
            let p = (a + (b - a) * i as f64 / (samples - 1) as f64).exp();
            symbol_eigenvalues(p, params)
                .map(|e| e.min_real_part())
                .unwrap_or(f64::NAN)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Validates the squared cutoff `r0_sq` against the admissible window and
/// returns the gap `a`.
///
/// The returned value is additionally checked as a lower bound on the
/// smallest eigenvalue real part for sampled `p >= r0^2`; failure of that
/// check is reported as a stability error.
pub fn spectral_gap(r0_sq: f64, params: &FluidParams) -> Result<f64> {
    let bound = admissible_r0_sq_bound(params);
    if !(r0_sq > 0.0) || r0_sq >= bound {
        return Err(NsasError::param(format!(
            "r0^2 = {r0_sq} outside admissible window (0, {bound})"
        )));
    }
    let a = gap_bound(r0_sq, params.nu1, params.nu2, params.gamma);
    let sampled = sampled_min_real_part(
        r0_sq,
        GAP_CHECK_P_MAX.max(2.0 * r0_sq),
        GAP_CHECK_SAMPLES,
        params,
    );
    if sampled < a * (1.0 - GAP_CHECK_REL_TOL) {
        return Err(NsasError::Stability(format!(
            "min Re(lambda) = {sampled} over p >= r0^2 falls below a = {a}"
        )));
    }
    Ok(a)
}

/// `exp(-t L_hat)` from spectral projectors onto the distinct eigenvalues
/// `{lambda1, lambda_plus, lambda_minus}`. Returns `None` where two of them
/// are closer than `sep`.
pub fn exp_by_projectors(symbol: &SymbolMatrix, t: f64, sep: f64) -> Option<CMatrix<4>> {
    let e = symbol_eigenvalues(symbol.freq.p(), &symbol.params).ok()?;
    if e.p == 0.0 {
        return Some(CMatrix::<4>::identity());
    }
    let roots = [e.lambda1, e.lambda_plus, e.lambda_minus];
    for i in 0..3 {
        for j in (i + 1)..3 {
            if (roots[i] - roots[j]).norm() < sep {
                return None;
            }
        }
    }
    let id = CMatrix::<4>::identity();
    let mut out = CMatrix::<4>::zeros();
    for i in 0..3 {
        let mut proj = id;
        for j in 0..3 {
            if i != j {
                proj = proj * (symbol.entries - id * roots[j]) / (roots[i] - roots[j]);
            }
        }
        out += proj * (-roots[i] * t).exp();
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> FluidParams {
        FluidParams::with_sound_speed(1.0, 1.0, 1.0).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zero_frequency_symbol_vanishes() {
        let s = assemble_symbol(FrequencyVector::new(1, [0.0; 3]), &unit());
        assert_eq!(s.entries, CMatrix::<4>::zeros());
    }

    #[test]
    fn hand_evaluated_symbol() {
        let s = assemble_symbol(FrequencyVector::new(1, [1.0, 0.0, 0.0]), &unit());
        let e = &s.entries;
        assert_eq!(e[(0, 0)], c(0.0, 0.0));
        assert_eq!(e[(0, 1)], c(0.0, 1.0));
        assert_eq!(e[(0, 2)], c(0.0, 0.0));
        assert_eq!(e[(0, 3)], c(0.0, 0.0));
        assert_eq!(e[(1, 1)], c(2.0, 0.0));
        assert_eq!(e[(2, 2)], c(1.0, 0.0));
        assert_eq!(e[(3, 3)], c(1.0, 0.0));
        assert_eq!(e[(1, 2)], c(0.0, 0.0));
    }

    #[test]
    fn closed_form_examples() {
        let p = unit();
        let z = symbol_eigenvalues(0.0, &p).unwrap();
        assert!(z.as_array().iter().all(|l| l.norm() == 0.0));

        let one = symbol_eigenvalues(1.0, &p).unwrap();
        for l in one.as_array() {
            assert!((l - c(1.0, 0.0)).norm() < 1e-15);
        }

        let q = symbol_eigenvalues(0.25, &p).unwrap();
        assert!((q.lambda_plus - c(0.25, 0.75f64.sqrt() / 2.0)).norm() < 1e-15);
        assert!((q.lambda_plus - c(0.25, 0.433013)).norm() < 1e-6);
        assert!((q.lambda_minus - c(0.25, -0.433013)).norm() < 1e-6);

        let big = symbol_eigenvalues(1e6, &p).unwrap();
        assert!((big.lambda_minus.re - 0.5).abs() < 1e-5);

        assert!(symbol_eigenvalues(-1e-3, &p).is_err());
    }

    #[test]
    fn gap_examples() {
        let p = unit();
        assert_eq!(spectral_gap(0.2, &p).unwrap(), 0.2);
        // nu1 = 2, nu2 = 0, gamma = 1 by the formula alone
        assert!((gap_bound(0.1, 2.0, 0.0, 1.0) - 0.2).abs() < 1e-15);
        // r0^2 = 0.3 exceeds gamma^2 / (nu1 + nu2)^2 = 0.25
        assert!(matches!(
            spectral_gap(0.3, &p),
            Err(NsasError::Parameter(_))
        ));
    }

    #[test]
    fn min_form_can_fail_for_small_nu2() {
        // nu2 < nu1: the acoustic real part (nu1+nu2) p / 2 dips below nu1 r0^2
        let p = FluidParams::with_sound_speed(1.0, 0.5, 1.0).unwrap();
        assert!(matches!(
            spectral_gap(0.4, &p),
            Err(NsasError::Stability(_))
        ));
    }

    #[test]
    fn projector_exponential_matches_pade_at_one_mode() {
        let p = FluidParams::quadratic(1.0, 2.0).unwrap();
        let s = assemble_symbol(FrequencyVector::new(1, [1.0, 0.3, -0.2]), &p);
        let a = super::super::expm::expm(&(s.entries * c(-0.7, 0.0)));
        let b = exp_by_projectors(&s, 0.7, 1e-6).unwrap();
        assert!((a - b).norm() < 1e-12);
    }
}
