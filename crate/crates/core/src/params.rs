//! Fluid parameters and barotropic pressure laws.
//!
//! The perturbation variables are `phi = gamma (rho - 1)` and the momentum
//! `m`; the pressure law enters the nonlinear system only through
//! `gamma = sqrt(p'(1))`, `alpha = p''(1) / (2 gamma^2)` and the remainder
//! function `F(phi)` built from `p''`.

use crate::error::{NsasError, Result};
use std::fmt;
use std::sync::OnceLock;

/// Tolerance used when checking derived constants against the law.
const LAW_CONSISTENCY_TOL: f64 = 1e-12;

/// Below this `|phi / gamma|` the remainder integral is evaluated by its
/// binomial series instead of the closed form, which cancels badly near 0.
const SERIES_RADIUS: f64 = 0.25;

/// A user supplied pressure law given by its first two derivatives.
#[derive(Clone, Copy)]
pub struct CustomLaw {
    pub name: &'static str,
    pub dp: fn(f64) -> f64,
    pub d2p: fn(f64) -> f64,
}

impl fmt::Debug for CustomLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomLaw")
            .field("name", &self.name)
            .finish()
    }
}

impl PartialEq for CustomLaw {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PressureLaw {
    /// `p(rho) = rho^2`
    Quadratic,
    /// `p(rho) = rho^kappa`
    Adiabatic { kappa: f64 },
    /// `p(rho) = coefficient * rho^exponent`
    Polytropic { coefficient: f64, exponent: f64 },
    /// Remainder evaluated by 16-node Gauss-Legendre quadrature.
    Custom(CustomLaw),
}

impl PressureLaw {
    /// `(coefficient, exponent)` for the power-law family.
    fn power_form(&self) -> Option<(f64, f64)> {
        match *self {
            PressureLaw::Quadratic => Some((1.0, 2.0)),
            PressureLaw::Adiabatic { kappa } => Some((1.0, kappa)),
            PressureLaw::Polytropic {
                coefficient,
                exponent,
            } => Some((coefficient, exponent)),
            PressureLaw::Custom(_) => None,
        }
    }

    pub fn dp(&self, rho: f64) -> f64 {
        match self.power_form() {
            Some((a, k)) => a * k * rho.powf(k - 1.0),
            None => match self {
                PressureLaw::Custom(c) => (c.dp)(rho),
                _ => unreachable!(),
            },
        }
    }

    pub fn d2p(&self, rho: f64) -> f64 {
        match self.power_form() {
            Some((a, k)) => a * k * (k - 1.0) * rho.powf(k - 2.0),
            None => match self {
                PressureLaw::Custom(c) => (c.d2p)(rho),
                _ => unreachable!(),
            },
        }
    }

    /// `F(phi) = (phi^2 / gamma^2) * int_0^1 (1 - theta)^2 p''(1 + theta phi / gamma) dtheta`.
    pub fn remainder(&self, phi: f64, gamma: f64) -> f64 {
        let scale = phi * phi / (gamma * gamma);
        match *self {
            PressureLaw::Quadratic => scale * (2.0 / 3.0),
            PressureLaw::Custom(_) => scale * self.remainder_integral_quadrature(phi / gamma),
            _ => {
                let (a, k) = self.power_form().expect("power law");
                scale * a * k * (k - 1.0) * power_weight_integral(phi / gamma, k - 2.0)
            }
        }
    }

    /// `int_0^1 (1 - theta)^2 p''(1 + theta s) dtheta` by Gauss-Legendre.
    pub fn remainder_integral_quadrature(&self, s: f64) -> f64 {
        let (nodes, weights) = gauss_legendre_16();
        nodes
            .iter()
            .zip(weights.iter())
            .map(|(&x, &w)| {
                let theta = 0.5 * (x + 1.0);
                0.5 * w * (1.0 - theta).powi(2) * self.d2p(1.0 + theta * s)
            })
            .sum()
    }

    /// Polytropic law with the same `gamma` and `alpha`.
    pub fn polytropic_matching(gamma: f64, alpha: f64) -> Self {
        let exponent = 2.0 * alpha + 1.0;
        PressureLaw::Polytropic {
            coefficient: gamma * gamma / exponent,
            exponent,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim().to_ascii_lowercase();
        if t == "quadratic" {
            return Ok(PressureLaw::Quadratic);
        }
        let parse_num = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| NsasError::Config(format!("bad pressure law `{text}`")))
        };
        if let Some(rest) = t.strip_prefix("adiabatic") {
            let inner = rest
                .trim()
                .trim_start_matches(['(', ':'])
                .trim_end_matches(')');
            return Ok(PressureLaw::Adiabatic {
                kappa: parse_num(inner)?,
            });
        }
        if let Some(rest) = t.strip_prefix("polytropic") {
            let inner = rest
                .trim()
                .trim_start_matches(['(', ':'])
                .trim_end_matches(')');
            let mut parts = inner.split(',');
            let (Some(a), Some(k), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(NsasError::Config(format!("bad pressure law `{text}`")));
            };
            return Ok(PressureLaw::Polytropic {
                coefficient: parse_num(a)?,
                exponent: parse_num(k)?,
            });
        }
        Err(NsasError::Config(format!("unknown pressure law `{text}`")))
    }
}

impl fmt::Display for PressureLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PressureLaw::Quadratic => write!(f, "quadratic"),
            PressureLaw::Adiabatic { kappa } => write!(f, "adiabatic({kappa})"),
            PressureLaw::Polytropic {
                coefficient,
                exponent,
            } => write!(f, "polytropic({coefficient},{exponent})"),
            PressureLaw::Custom(c) => write!(f, "custom({})", c.name),
        }
    }
}

/// `int_0^1 (1 - theta)^2 (1 + theta s)^n dtheta`.
fn power_weight_integral(s: f64, n: f64) -> f64 {
    if s.abs() < SERIES_RADIUS {
        // sum_j binom(n, j) s^j * 2 / ((j+1)(j+2)(j+3))
        let mut sum = 0.0;
        let mut binom = 1.0;
        let mut s_pow = 1.0;
        for j in 0..80 {
            let jf = j as f64;
            let term = binom * s_pow * 2.0 / ((jf + 1.0) * (jf + 2.0) * (jf + 3.0));
            sum += term;
            if term.abs() < 1e-18 * sum.abs().max(1e-300) && j > 2 {
                break;
            }
            binom *= (n - jf) / (jf + 1.0);
            s_pow *= s;
            if binom == 0.0 {
                break;
            }
        }
        return sum;
    }
    // substitute x = 1 + theta s
    let b = 1.0 + s;
    let moment = |m: f64| {
        if (m + 1.0).abs() < 1e-14 {
            b.ln()
        } else {
            (b.powf(m + 1.0) - 1.0) / (m + 1.0)
        }
    };
    (b * b * moment(n) - 2.0 * b * moment(n + 1.0) + moment(n + 2.0)) / (s * s * s)
}

/// Nodes and weights of the 16-point Gauss-Legendre rule on [-1, 1].
pub fn gauss_legendre_16() -> &'static ([f64; 16], [f64; 16]) {
    static RULE: OnceLock<([f64; 16], [f64; 16])> = OnceLock::new();
    RULE.get_or_init(|| {
        let v = gauss_legendre(16);
        let mut nodes = [0.0; 16];
        let mut weights = [0.0; 16];
        for (i, (x, w)) in v.into_iter().enumerate() {
            nodes[i] = x;
            weights[i] = w;
        }
        (nodes, weights)
    })
}

/// Gauss-Legendre rule by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let nf = n as f64;
    (0..n)
        .map(|i| {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                    p0 = p1;
                    p1 = p2;
                }
                dp = nf * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

/// Viscosities, sound speed and nonlinearity constant of the perturbed system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluidParams {
    /// `nu1 = mu`
    pub nu1: f64,
    /// `nu2 = mu + mu'`
    pub nu2: f64,
    /// `gamma = sqrt(p'(1))`
    pub gamma: f64,
    /// `alpha = p''(1) / (2 gamma^2)`
    pub alpha: f64,
    pub law: PressureLaw,
}

impl FluidParams {
    /// Builds parameters with `gamma` and `alpha` derived from `law`.
    pub fn new(nu1: f64, nu2: f64, law: PressureLaw) -> Result<Self> {
        let dp1 = law.dp(1.0);
        if !(dp1 > 0.0) {
            return Err(NsasError::param(format!("p'(1) = {dp1} must be positive")));
        }
        let gamma = dp1.sqrt();
        let alpha = law.d2p(1.0) / (2.0 * gamma * gamma);
        Self::with_constants(nu1, nu2, gamma, alpha, law)
    }

    /// Builds parameters from explicit constants, checked against `law`.
    pub fn with_constants(
        nu1: f64,
        nu2: f64,
        gamma: f64,
        alpha: f64,
        law: PressureLaw,
    ) -> Result<Self> {
        let p = FluidParams {
            nu1,
            nu2,
            gamma,
            alpha,
            law,
        };
        p.validate()?;
        Ok(p)
    }

    /// Parameters with sound speed `gamma` and `alpha = 1/2`, backed by the
    /// matching polytropic law (`p = rho^2 / 2` when `gamma = 1`).
    pub fn with_sound_speed(nu1: f64, nu2: f64, gamma: f64) -> Result<Self> {
        Self::new(nu1, nu2, PressureLaw::polytropic_matching(gamma, 0.5))
    }

    pub fn quadratic(nu1: f64, nu2: f64) -> Result<Self> {
        Self::new(nu1, nu2, PressureLaw::Quadratic)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.nu1, self.nu2, self.gamma, self.alpha]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(NsasError::param("non-finite fluid parameter"));
        }
        if !(self.nu1 > 0.0) {
            return Err(NsasError::param(format!("nu1 = {} must be > 0", self.nu1)));
        }
        // 2/3 mu + mu' >= 0  <=>  nu2 >= nu1 / 3
        if self.nu2 < self.nu1 / 3.0 {
            return Err(NsasError::param(format!(
                "viscosity inadmissible: nu2 = {} < nu1 / 3 = {}",
                self.nu2,
                self.nu1 / 3.0
            )));
        }
        if !(self.gamma > 0.0) {
            return Err(NsasError::param("gamma must be > 0"));
        }
        let dp1 = self.law.dp(1.0);
        if (self.gamma * self.gamma - dp1).abs() > LAW_CONSISTENCY_TOL * dp1.abs().max(1.0) {
            return Err(NsasError::param(format!(
                "gamma^2 = {} disagrees with p'(1) = {dp1}",
                self.gamma * self.gamma
            )));
        }
        let alpha_law = self.law.d2p(1.0) / (2.0 * dp1);
        if (self.alpha - alpha_law).abs() > LAW_CONSISTENCY_TOL * alpha_law.abs().max(1.0) {
            return Err(NsasError::param(format!(
                "alpha = {} disagrees with p''(1)/(2 gamma^2) = {alpha_law}",
                self.alpha
            )));
        }
        if !(self.alpha > 0.0) {
            return Err(NsasError::param(format!(
                "alpha = {} must be > 0 for the profile systems",
                self.alpha
            )));
        }
        Ok(())
    }

    /// `F(phi)` for the configured law.
    pub fn remainder(&self, phi: f64) -> f64 {
        self.law.remainder(phi, self.gamma)
    }

    /// Packed form used by the checkpoint header.
    pub fn to_array(&self) -> [f64; 4] {
        [self.nu1, self.nu2, self.gamma, self.alpha]
    }
}
