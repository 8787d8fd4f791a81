//! Exponential time differencing with the exact per-mode linear propagator.
//!
//! For `u' + L u = N(u)` and step `h`, with `Z = -h L_hat(q)`:
//!
//! * ETD-RK2: `a = E u + h phi1 N(u)`, `u+ = a + h phi2 (N(a) - N(u))`
//! * ETD2:    `u+ = E u + h phi1 N_n + h phi2 (N_n - N_{n-1})`,
//!   bootstrapped with one ETD-RK2 step.

use super::filter::ModeFilter;
use crate::error::{NsasError, Result};
use crate::field::Spectra;
use crate::linear::expm::{exp_phi12, CMatrix};
use crate::linear::semigroup::zero_spectra;
use crate::linear::symbol::symbol_entries;
use crate::params::FluidParams;
use crate::spectral::Spectral;
use nalgebra::Vector4;
use num_complex::Complex64;
use rayon::prelude::*;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Etd2,
    EtdRk2,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Etd2 => "etd2",
            Scheme::EtdRk2 => "etdrk2",
        })
    }
}

impl FromStr for Scheme {
    type Err = NsasError;

    fn from_str(s: &str) -> Result<Self> {
        match s
            .trim()
            .to_ascii_lowercase()
            .replace(['-', '_'], "")
            .as_str()
        {
            "etd2" => Ok(Scheme::Etd2),
            "etdrk2" => Ok(Scheme::EtdRk2),
            other => Err(NsasError::Config(format!("unknown scheme `{other}`"))),
        }
    }
}

/// Anything that evaluates the filtered source spectrum `N_hat(u_hat)`.
pub trait Source: Sync {
    fn eval(&self, u: &Spectra) -> Result<Spectra>;
}

/// `E = exp(Z)`, `h phi1(Z)` and `h phi2(Z)` for every kept mode.
pub struct Propagators {
    h: f64,
    modes: Vec<usize>,
    e: Vec<CMatrix<4>>,
    p1: Vec<CMatrix<4>>,
    p2: Vec<CMatrix<4>>,
}

impl Propagators {
    pub fn new(spectral: &Spectral, filter: &ModeFilter, params: &FluidParams, h: f64) -> Self {
        let freqs = spectral.freqs();
        Self::with_frequencies(filter.kept().to_vec(), |idx| freqs[idx], params, h)
    }

    /// Propagators for `modes`, with `freq(idx)` the full 3-vector `q` of
    /// storage index `idx`.
    pub fn with_frequencies(
        modes: Vec<usize>,
        freq: impl Fn(usize) -> [f64; 3] + Sync,
        params: &FluidParams,
        h: f64,
    ) -> Self {
        let mats: Vec<_> = modes
            .par_iter()
            .map(|&idx| {
                let z = symbol_entries(freq(idx), params) * Complex64::new(-h, 0.0);
                if z.iter().all(|c| c.norm_sqr() == 0.0) {
                    let id = CMatrix::<4>::identity();
                    return (
                        id,
                        id * Complex64::new(h, 0.0),
                        id * Complex64::new(0.5 * h, 0.0),
                    );
                }
                let (e, p1, p2) = exp_phi12(&z);
                (e, p1 * Complex64::new(h, 0.0), p2 * Complex64::new(h, 0.0))
            })
            .collect();
        let mut e = Vec::with_capacity(mats.len());
        let mut p1 = Vec::with_capacity(mats.len());
        let mut p2 = Vec::with_capacity(mats.len());
        for (a, b, c) in mats {
            e.push(a);
            p1.push(b);
            p2.push(c);
        }
        Propagators {
            h,
            modes,
            e,
            p1,
            p2,
        }
    }

    pub fn dt(&self) -> f64 {
        self.h
    }

    /// `sum_k M_k x_k` per kept mode for up to three operator/vector pairs.
    fn combine(&self, n: usize, terms: &[(&[CMatrix<4>], &Spectra)]) -> Spectra {
        let vals: Vec<Vector4<Complex64>> = (0..self.modes.len())
            .into_par_iter()
            .map(|k| {
                let idx = self.modes[k];
                let mut acc = Vector4::zeros();
                for (ops, x) in terms {
                    let v = Vector4::new(x[0][idx], x[1][idx], x[2][idx], x[3][idx]);
                    acc += ops[k] * v;
                }
                acc
            })
            .collect();
        let mut out = zero_spectra(n);
        for (k, v) in vals.into_iter().enumerate() {
            let idx = self.modes[k];
            for c in 0..4 {
                out[c][idx] = v[c];
            }
        }
        out
    }
}

fn add(a: &Spectra, b: &Spectra, sb: f64) -> Spectra {
    let mut out = a.clone();
    for c in 0..4 {
        out[c]
            .par_iter_mut()
            .zip(b[c].par_iter())
            .for_each(|(x, y)| *x += y * sb);
    }
    out
}

/// One-step driver holding the propagators and, for ETD2, the previous source.
pub struct Integrator {
    pub scheme: Scheme,
    props: Propagators,
    n: usize,
    previous: Option<Spectra>,
}

impl Integrator {
    pub fn new(
        spectral: &Spectral,
        filter: &ModeFilter,
        params: &FluidParams,
        h: f64,
        scheme: Scheme,
    ) -> Self {
        Self::with_propagators(
            Propagators::new(spectral, filter, params, h),
            spectral.len(),
            scheme,
        )
    }

    /// `n` is the spectrum length.
    pub fn with_propagators(props: Propagators, n: usize, scheme: Scheme) -> Self {
        Integrator {
            scheme,
            props,
            n,
            previous: None,
        }
    }

    pub fn dt(&self) -> f64 {
        self.props.dt()
    }

    /// Forgets multistep history (after an external change of state).
    pub fn reset(&mut self) {
        self.previous = None;
    }

    pub fn advance(&mut self, u: &Spectra, source: &dyn Source) -> Result<Spectra> {
        let p = &self.props;
        let nu = source.eval(u)?;
        let next = match (self.scheme, self.previous.take()) {
            (Scheme::Etd2, Some(prev)) => {
                let diff = add(&nu, &prev, -1.0);
                p.combine(self.n, &[(&p.e, u), (&p.p1, &nu), (&p.p2, &diff)])
            }
            _ => {
                let a = p.combine(self.n, &[(&p.e, u), (&p.p1, &nu)]);
                let na = source.eval(&a)?;
                let diff = add(&na, &nu, -1.0);
                let corr = p.combine(self.n, &[(&p.p2, &diff)]);
                add(&a, &corr, 1.0)
            }
        };
        if self.scheme == Scheme::Etd2 {
            self.previous = Some(nu);
        }
        Ok(next)
    }
}
