//! Linearization of the full-torus system about a constant background
//! `(phi_bar, m_bar)`, its closed-form spectrum and the resulting gap.

use super::eig::{eigenvalues4, matched_deviation};
use super::expm::CMatrix;
use crate::error::{NsasError, Result};
use crate::params::FluidParams;
use num_complex::Complex64;

/// Per-axis bound of the integer lattice scanned for the gap.
pub const DEFAULT_K_MAX: i64 = 16;
/// Closed form vs dense eigensolver.
pub const CLOSED_FORM_TOL: f64 = 1e-9;

/// Constant background state on `T^3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Background {
    pub phi: f64,
    pub m: [f64; 3],
}

impl Background {
    pub const ZERO: Background = Background {
        phi: 0.0,
        m: [0.0; 3],
    };
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbedSymbol {
    pub entries: CMatrix<4>,
    pub k: [i64; 3],
    pub background: Background,
    /// `c = p'((phi_bar + gamma) / gamma)`
    pub c: f64,
}

/// Eigenvalues of the perturbed symbol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbedEigenvalues {
    pub lambda1: Complex64,
    pub lambda2: Complex64,
    pub lambda_plus: Complex64,
    pub lambda_minus: Complex64,
}

impl PerturbedEigenvalues {
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

fn kf(k: [i64; 3]) -> [f64; 3] {
    k.map(|v| v as f64)
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn check_background(bg: &Background, params: &FluidParams) -> Result<()> {
    if !(bg.phi + params.gamma > 0.0) {
        return Err(NsasError::param(format!(
            "background density (phi_bar + gamma) / gamma = {} not positive",
            (bg.phi + params.gamma) / params.gamma
        )));
    }
    Ok(())
}

/// Symbol of the system linearized about `background`:
///
/// * row 0: `[0, i gamma k^T]`
/// * column 0: `-i gamma (m.k) m / (phi+gamma)^2 + i c k / gamma
///   - nu1 gamma |k|^2 m / (phi+gamma)^2 - nu2 gamma (m.k) k / (phi+gamma)^2`
/// * momentum block: `i f (m k^T + (m.k) I) + f (nu1 |k|^2 I + nu2 k k^T)`
///   with `f = gamma / (phi + gamma)`; the transport part `m Div + m.grad`
///   maps to `m k^T + (m.k) I`.
pub fn assemble_perturbed_symbol(
    k: [i64; 3],
    background: Background,
    params: &FluidParams,
) -> Result<PerturbedSymbol> {
    check_background(&background, params)?;
    let g = params.gamma;
    let kv = kf(k);
    let m = background.m;
    let den = background.phi + g;
    let f = g / den;
    let c = params.law.dp(den / g);
    let k2 = dot(kv, kv);
    let mk = dot(m, kv);
    let mut a = CMatrix::<4>::zeros();
    for i in 0..3 {
        a[(0, 1 + i)] = Complex64::new(0.0, g * kv[i]);
        let re =
            -params.nu1 * g * k2 * m[i] / (den * den) - params.nu2 * g * mk * kv[i] / (den * den);
        let im = -g * mk * m[i] / (den * den) + c * kv[i] / g;
        a[(1 + i, 0)] = Complex64::new(re, im);
        for j in 0..3 {
            let mut re = f * params.nu2 * kv[i] * kv[j];
            let mut im = f * m[i] * kv[j];
            if i == j {
                re += f * params.nu1 * k2;
                im += f * mk;
            }
            a[(1 + i, 1 + j)] = Complex64::new(re, im);
        }
    }
    Ok(PerturbedSymbol {
        entries: a,
        k,
        background,
        c,
    })
}

/// Closed-form eigenvalues
/// `lambda_{1,2} = f (nu1 |k|^2 + i m.k)` and
/// `lambda_pm = (f ((nu1+nu2)|k|^2 + 2 i m.k) pm sqrt(f^2 (nu1+nu2)^2 |k|^4 - 4 c |k|^2)) / 2`.
pub fn perturbed_eigenvalues_closed(
    k: [i64; 3],
    background: Background,
    params: &FluidParams,
) -> Result<PerturbedEigenvalues> {
    check_background(&background, params)?;
    let g = params.gamma;
    let kv = kf(k);
    let den = background.phi + g;
    let f = g / den;
    let c = params.law.dp(den / g);
    let k2 = dot(kv, kv);
    let mk = dot(background.m, kv);
    let l1 = Complex64::new(f * params.nu1 * k2, f * mk);
    let s = f * (params.nu1 + params.nu2) * k2;
    let disc = s * s - 4.0 * c * k2;
    let shift = Complex64::new(0.0, f * mk);
    let (plus, minus) = if disc < 0.0 {
        let im = 0.5 * (-disc).sqrt();
        (Complex64::new(0.5 * s, im), Complex64::new(0.5 * s, -im))
    } else {
        let big = 0.5 * (s + disc.sqrt());
        let small = if big > 0.0 { c * k2 / big } else { 0.0 };
        (Complex64::new(big, 0.0), Complex64::new(small, 0.0))
    };
    Ok(PerturbedEigenvalues {
        lambda1: l1,
        lambda2: l1,
        lambda_plus: plus + shift,
        lambda_minus: minus + shift,
    })
}

/// Closed-form eigenvalues, checked against a dense eigensolve of the
/// assembled symbol.
pub fn perturbed_eigenvalues(
    k: [i64; 3],
    background: Background,
    params: &FluidParams,
) -> Result<PerturbedEigenvalues> {
    let closed = perturbed_eigenvalues_closed(k, background, params)?;
    let sym = assemble_perturbed_symbol(k, background, params)?;
    let numeric = eigenvalues4(&sym.entries);
    let dev = matched_deviation(&closed.as_array(), &numeric);
    let scale = 1.0 + numeric.iter().map(|l| l.norm()).fold(0.0, f64::max);
    if dev > CLOSED_FORM_TOL * scale {
        return Err(NsasError::Stability(format!(
            "closed-form eigenvalues at k = {k:?} deviate from the dense solve by {dev:e}"
        )));
    }
    Ok(closed)
}

/// Verified gap of the perturbed symbol over the integer lattice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbedGap {
    /// `min(lattice_min, tail_infimum)`
    pub a0: f64,
    /// Smallest real part over the scanned lattice.
    pub lattice_min: f64,
    pub argmin: [i64; 3],
    /// `lim Re(lambda_minus)` as `|k| -> inf`, i.e. `c (phi + gamma) / (gamma (nu1 + nu2))`.
    pub tail_infimum: f64,
    /// Largest closed-form vs numeric deviation seen in the scan.
    pub max_deviation: f64,
}

/// Scans `0 < |k|_inf <= k_max` for the smallest eigenvalue real part.
///
/// Past the scanned box `lambda_{1,2}` and the acoustic real parts grow,
/// except `Re(lambda_minus)`, which decreases monotonically towards
/// `tail_infimum` once the discriminant is positive. The outer shell must
/// therefore lie on the real branch; the reported gap is the smaller of the
/// lattice minimum and that limit.
///
/// Fails with a stability error naming the first offending `k` when some
/// real part is not positive.
pub fn perturbed_gap(
    background: Background,
    params: &FluidParams,
    k_max: i64,
) -> Result<PerturbedGap> {
    if k_max < 2 {
        return Err(NsasError::param("k_max must be >= 2"));
    }
    check_background(&background, params)?;
    let g = params.gamma;
    let den = background.phi + g;
    let f = g / den;
    let c = params.law.dp(den / g);
    let nu = params.nu1 + params.nu2;
    if !(c > 0.0) {
        return Err(NsasError::Stability(format!(
            "background {background:?}: sound speed squared {c} not positive"
        )));
    }
    let mut best = PerturbedGap {
        a0: f64::INFINITY,
        lattice_min: f64::INFINITY,
        argmin: [0; 3],
        tail_infimum: c / (f * nu),
        max_deviation: 0.0,
    };
    for a in -k_max..=k_max {
        for b in -k_max..=k_max {
            for cc in -k_max..=k_max {
                let k = [a, b, cc];
                if k == [0, 0, 0] {
                    continue;
                }
                let closed = perturbed_eigenvalues_closed(k, background, params)?;
                let re = closed.min_real_part();
                if re <= 0.0 {
                    return Err(NsasError::Stability(format!(
                        "background {background:?} too large: Re(lambda) = {re} at k = {k:?}"
                    )));
                }
                if re < best.lattice_min {
                    best.lattice_min = re;
                    best.argmin = k;
                }
                // the dense check is cheap enough near the bottom of the spectrum
                if a.abs().max(b.abs()).max(cc.abs()) <= 3 {
                    let sym = assemble_perturbed_symbol(k, background, params)?;
                    let dev = matched_deviation(&closed.as_array(), &eigenvalues4(&sym.entries));
                    best.max_deviation = best.max_deviation.max(dev);
                }
            }
        }
    }
    // smallest |k|^2 on the outer shell
    let p_outer = (k_max * k_max) as f64;
    let s = f * nu * p_outer;
    if s * s - 4.0 * c * p_outer < 0.0 {
        return Err(NsasError::Stability(format!(
            "outer shell |k| = {k_max} still on the oscillatory branch; tail not monotone"
        )));
    }
    if best.max_deviation > CLOSED_FORM_TOL {
        return Err(NsasError::Stability(format!(
            "closed-form eigenvalues deviate from dense solve by {:e}",
            best.max_deviation
        )));
    }
    best.a0 = best.lattice_min.min(best.tail_infimum);
    Ok(best)
}
