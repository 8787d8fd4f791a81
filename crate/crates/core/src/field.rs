//! The perturbation state `u = (phi, m)` and its binary checkpoint format.

use crate::domain::DomainSpec;
use crate::error::{NsasError, Result};
use crate::params::{FluidParams, PressureLaw};
use crate::spectral::Spectral;
use num_complex::Complex64;
use std::io::{Read, Write};

/// Smallest admissible density `1 + phi / gamma`.
pub const VACUUM_MARGIN: f64 = 0.1;

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"NSAS";
pub const CHECKPOINT_VERSION: u32 = 1;

/// Four spectra `(phi_hat, m1_hat, m2_hat, m3_hat)`.
pub type Spectra = [Vec<Complex64>; 4];

#[derive(Debug, Clone, PartialEq)]
pub struct StateField {
    pub domain: DomainSpec,
    /// `phi = gamma (rho - 1)`
    pub phi: Vec<f64>,
    pub momentum: [Vec<f64>; 3],
    pub time: f64,
    pub params: FluidParams,
}

impl StateField {
    pub fn zeros(domain: DomainSpec, params: FluidParams) -> Self {
        let n = domain.grid().len();
        StateField {
            domain,
            phi: vec![0.0; n],
            momentum: [vec![0.0; n], vec![0.0; n], vec![0.0; n]],
            time: 0.0,
            params,
        }
    }

    pub fn from_components(
        domain: DomainSpec,
        params: FluidParams,
        components: [Vec<f64>; 4],
        time: f64,
    ) -> Result<Self> {
        let n = domain.grid().len();
        for c in &components {
            if c.len() != n {
                return Err(NsasError::shape(n, c.len()));
            }
        }
        let [phi, m1, m2, m3] = components;
        Ok(StateField {
            domain,
            phi,
            momentum: [m1, m2, m3],
            time,
            params,
        })
    }

    pub fn components(&self) -> [&[f64]; 4] {
        [
            &self.phi,
            &self.momentum[0],
            &self.momentum[1],
            &self.momentum[2],
        ]
    }

    pub fn components_mut(&mut self) -> [&mut Vec<f64>; 4] {
        let [m1, m2, m3] = &mut self.momentum;
        [&mut self.phi, m1, m2, m3]
    }

    pub fn len(&self) -> usize {
        self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }

    /// `min(1 + phi / gamma)` over the grid.
    pub fn min_density(&self) -> f64 {
        let g = self.params.gamma;
        self.phi
            .iter()
            .fold(f64::INFINITY, |m, &p| m.min(1.0 + p / g))
    }

    /// Finite values and density bounded away from vacuum.
    pub fn check(&self) -> Result<()> {
        if !self
            .components()
            .iter()
            .all(|c| c.iter().all(|v| v.is_finite()))
        {
            return Err(NsasError::State("non-finite field value".into()));
        }
        let rho = self.min_density();
        if rho < VACUUM_MARGIN {
            return Err(NsasError::State(format!(
                "density {rho} below vacuum margin {VACUUM_MARGIN}"
            )));
        }
        Ok(())
    }

    pub fn to_spectra(&self, spectral: &Spectral) -> Result<Spectra> {
        let [a, b, c, d] = self.components();
        Ok([
            spectral.forward(a)?,
            spectral.forward(b)?,
            spectral.forward(c)?,
            spectral.forward(d)?,
        ])
    }

    pub fn from_spectra(
        domain: DomainSpec,
        params: FluidParams,
        spectral: &Spectral,
        spectra: &Spectra,
        time: f64,
    ) -> Result<Self> {
        let comps = [
            spectral.inverse(&spectra[0])?,
            spectral.inverse(&spectra[1])?,
            spectral.inverse(&spectra[2])?,
            spectral.inverse(&spectra[3])?,
        ];
        Self::from_components(domain, params, comps, time)
    }

    /// Mean of `phi` over the whole domain.
    pub fn mean_phi(&self) -> f64 {
        self.phi.iter().sum::<f64>() / self.phi.len() as f64
    }

    pub fn mean_momentum(&self) -> [f64; 3] {
        let n = self.len() as f64;
        [0, 1, 2].map(|i| self.momentum[i].iter().sum::<f64>() / n)
    }

    pub fn write_checkpoint<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(CHECKPOINT_MAGIC)?;
        w.write_all(&CHECKPOINT_VERSION.to_le_bytes())?;
        w.write_all(&(self.domain.ell as u32).to_le_bytes())?;
        for n in self.domain.resolution {
            w.write_all(&(n as u32).to_le_bytes())?;
        }
        for l in self.domain.lengths() {
            w.write_all(&l.to_le_bytes())?;
        }
        w.write_all(&self.time.to_le_bytes())?;
        for v in self.params.to_array() {
            w.write_all(&v.to_le_bytes())?;
        }
        let mut buf = Vec::with_capacity(8 * self.len());
        for c in self.components() {
            buf.clear();
            for v in c {
                buf.extend_from_slice(&v.to_le_bytes());
            }
            w.write_all(&buf)?;
        }
        Ok(())
    }

    /// Reads a checkpoint. The pressure law is not stored; it is rebuilt as
    /// the polytropic law with the stored `gamma` and `alpha`.
    pub fn read_checkpoint<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != CHECKPOINT_MAGIC {
            return Err(NsasError::Format("bad magic bytes".into()));
        }
        let version = read_u32(&mut r)?;
        if version != CHECKPOINT_VERSION {
            return Err(NsasError::Format(format!("unsupported version {version}")));
        }
        let ell = read_u32(&mut r)? as usize;
        let mut resolution = [0usize; 3];
        for n in &mut resolution {
            *n = read_u32(&mut r)? as usize;
        }
        let mut lengths = [0.0; 3];
        for l in &mut lengths {
            *l = read_f64(&mut r)?;
        }
        let time = read_f64(&mut r)?;
        let mut p = [0.0; 4];
        for v in &mut p {
            *v = read_f64(&mut r)?;
        }
        if !(1..=3).contains(&ell) {
            return Err(NsasError::Format(format!("bad ell {ell}")));
        }
        let domain = DomainSpec {
            ell,
            periodic_lengths: lengths[..ell].to_vec(),
            open_lengths: lengths[ell..].to_vec(),
            resolution,
        };
        domain
            .validate()
            .map_err(|e| NsasError::Format(e.to_string()))?;
        let law = match PressureLaw::polytropic_matching(p[2], p[3]) {
            PressureLaw::Polytropic {
                coefficient,
                exponent,
            } if (coefficient - 1.0).abs() < 1e-12 && (exponent - 2.0).abs() < 1e-12 => {
                PressureLaw::Quadratic
            }
            other => other,
        };
        let params = FluidParams::with_constants(p[0], p[1], p[2], p[3], law)?;
        let n = domain.grid().len();
        let mut comps: [Vec<f64>; 4] = Default::default();
        let mut bytes = vec![0u8; 8 * n];
        for c in &mut comps {
            r.read_exact(&mut bytes)?;
            *c = bytes
                .chunks_exact(8)
                .map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes")))
                .collect();
        }
        Self::from_components(domain, params, comps, time)
    }
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state() -> StateField {
        let d = DomainSpec::new(2, 30.0, [4, 4, 8]).unwrap();
        let p = FluidParams::quadratic(1.0, 1.0).unwrap();
        let mut s = StateField::zeros(d, p);
        for (i, v) in s.phi.iter_mut().enumerate() {
            *v = 0.01 * i as f64;
        }
        s.momentum[2][3] = -0.25;
        s.time = 1.5;
        s
    }

    #[test]
    fn checkpoint_layout() {
        let s = state();
        let mut bytes = Vec::new();
        s.write_checkpoint(&mut bytes).unwrap();
        assert_eq!(&bytes[..4], b"NSAS");
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 1);
        assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 2);
        assert_eq!(u32::from_le_bytes(bytes[20..24].try_into().unwrap()), 8);
        assert_eq!(f64::from_le_bytes(bytes[40..48].try_into().unwrap()), 30.0);
        assert_eq!(f64::from_le_bytes(bytes[48..56].try_into().unwrap()), 1.5);
        assert_eq!(bytes.len(), 88 + 4 * 8 * s.len());
        // phi[1] is the second f64 of the first array (z1 fastest)
        assert_eq!(f64::from_le_bytes(bytes[96..104].try_into().unwrap()), 0.01);
    }

    #[test]
    fn checkpoint_round_trip() {
        let s = state();
        let mut bytes = Vec::new();
        s.write_checkpoint(&mut bytes).unwrap();
        let r = StateField::read_checkpoint(bytes.as_slice()).unwrap();
        assert_eq!(r.phi, s.phi);
        assert_eq!(r.momentum, s.momentum);
        assert_eq!(r.time, s.time);
        assert_eq!(r.params.law, PressureLaw::Quadratic);
    }

    #[test]
    fn checkpoint_rejects_bad_magic() {
        let mut bytes = Vec::new();
        state().write_checkpoint(&mut bytes).unwrap();
        bytes[0] = b'X';
        assert!(matches!(
            StateField::read_checkpoint(bytes.as_slice()),
            Err(NsasError::Format(_))
        ));
    }

    #[test]
    fn vacuum_guard() {
        let mut s = state();
        assert!(s.check().is_ok());
        s.phi[0] = -0.95 * s.params.gamma;
        assert!(matches!(s.check(), Err(NsasError::State(_))));
        s.phi[0] = f64::NAN;
        assert!(s.check().is_err());
    }
}
