//! Per-sample norm tables, their CSV form, and the solver sink that fills them.

use super::sup::{SupFunctionalTracker, SupKind};
use super::{derivative_norms, oscillating_spectra, profile_difference};
use crate::error::{NsasError, Result};
use crate::profile::{
    decay_functional_m0, energy_n, ProfileSample, ProfileSolver, ProfileState, M0_TILDE_WEIGHTS,
    M0_WEIGHTS,
};
use crate::solver::{Observation, Sink};
use std::io::{BufRead, Write};
use std::path::Path;

pub const SERIES_COLUMNS: [&str; 13] = [
    "t",
    "L2_u",
    "L2_du",
    "L2_d2u",
    "L2_d3u",
    "L2_d4u",
    "L2_tilde",
    "H1_tilde",
    "L2_ubar_minus_eta",
    "H1_ubar_minus_eta",
    "L2_u_minus_eta",
    "M_t",
    "N_t",
];

pub const PROFILE_COLUMNS: [&str; 6] = ["t", "L2_eta", "L2_dy_eta", "H2_eta_sq", "N_t", "M0_t"];

/// Rows of optional values under fixed column names; blanks in CSV are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl SeriesTable {
    pub fn new(columns: &[&str]) -> Self {
        SeriesTable {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Option<f64>>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(NsasError::shape(self.columns.len(), row.len()));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| NsasError::Data(format!("no column `{name}`")))
    }

    /// `(t, value)` pairs of a column, blanks skipped. The first column is time.
    pub fn column(&self, name: &str) -> Result<(Vec<f64>, Vec<f64>)> {
        let k = self.index_of(name)?;
        let mut t = Vec::new();
        let mut v = Vec::new();
        for r in &self.rows {
            if let (Some(a), Some(b)) = (r[0], r[k]) {
                t.push(a);
                v.push(b);
            }
        }
        Ok((t, v))
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{}", self.columns.join(","))?;
        for r in &self.rows {
            let cells: Vec<String> = r
                .iter()
                .map(|c| c.map(|v| format!("{v:e}")).unwrap_or_default())
                .collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(f))
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| NsasError::Data("empty series file".into()))??;
        let columns: Vec<String> = header.split(',').map(|s| s.trim().to_string()).collect();
        let mut rows = Vec::new();
        for (n, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != columns.len() {
                return Err(NsasError::Data(format!(
                    "line {}: {} cells, expected {}",
                    n + 2,
                    cells.len(),
                    columns.len()
                )));
            }
            let row = cells
                .iter()
                .map(|c| {
                    let c = c.trim();
                    if c.is_empty() {
                        Ok(None)
                    } else {
                        c.parse::<f64>()
                            .map(Some)
                            .map_err(|e| NsasError::Data(format!("line {}: {e}", n + 2)))
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        Ok(SeriesTable { columns, rows })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read_csv(std::io::BufReader::new(f))
    }
}

/// Sink producing one [`SERIES_COLUMNS`] row per observation.
///
/// With a companion profile solver (same `dt`, started from the averaged
/// initial data) the profile is advanced in lockstep and `u_bar - eta` and
/// `N1` are filled in.
pub struct NsDiagnostics {
    pub table: SeriesTable,
    pub m: Option<SupFunctionalTracker>,
    pub n1: SupFunctionalTracker,
    pub mean_phi: Vec<f64>,
    pub mean_momentum: Vec<[f64; 3]>,
    /// Companion profile states at each sample, when `keep_profiles`.
    pub profiles: Vec<ProfileState>,
    pub keep_profiles: bool,
    companion: Option<ProfileSolver>,
}

impl NsDiagnostics {
    /// `M_t` uses `M` for `ell = 1`, `M1` for `ell = 2` and `M2` (when `a0`
    /// is given) for `ell = 3`.
    pub fn new(ell: usize, a0: Option<f64>, companion: Option<ProfileSolver>) -> Self {
        let m = match (ell, a0) {
            (1, _) => Some(SupFunctionalTracker::new(SupKind::M)),
            (2, _) => Some(SupFunctionalTracker::new(SupKind::M1)),
            (_, Some(a0)) => Some(SupFunctionalTracker::new(SupKind::M2 { a0 })),
            _ => None,
        };
        NsDiagnostics {
            table: SeriesTable::new(&SERIES_COLUMNS),
            m,
            n1: SupFunctionalTracker::new(SupKind::N1),
            mean_phi: Vec::new(),
            mean_momentum: Vec::new(),
            profiles: Vec::new(),
            keep_profiles: false,
            companion,
        }
    }

    fn advance_companion(&mut self, step: usize, time: f64) -> Result<Option<ProfileState>> {
        let Some(p) = self.companion.as_mut() else {
            return Ok(None);
        };
        while p.steps() < step {
            p.advance()?;
        }
        if p.steps() != step || (p.time() - time).abs() > 1e-12 * time.abs().max(1.0) {
            return Err(NsasError::Alignment(format!(
                "profile at step {} (t = {}) against solver step {step} (t = {time})",
                p.steps(),
                p.time()
            )));
        }
        Ok(Some(p.state()?))
    }
}

impl Sink for NsDiagnostics {
    fn observe(&mut self, obs: &Observation) -> Result<()> {
        let spectral = obs.spectral;
        let ell = obs.domain.ell;
        let norms = derivative_norms(spectral, obs.spectra, &[0, 1, 2, 3, 4]);
        let osc = oscillating_spectra(spectral, ell, obs.spectra);
        let tn = derivative_norms(spectral, &osc, &[0, 1]);
        let h1_tilde = (tn[0] * tn[0] + tn[1] * tn[1]).sqrt();
        let m_t = self.m.as_mut().map(|tr| match tr.kind {
            SupKind::M2 { .. } => tr.update(obs.time, h1_tilde, 0.0),
            _ => tr.update(obs.time, norms[0], norms[1]),
        });
        let n = spectral.len() as f64;
        self.mean_phi.push(obs.spectra[0][0].re / n);
        self.mean_momentum
            .push([1, 2, 3].map(|c| obs.spectra[c][0].re / n));
        let (mut l2d, mut h1d, mut n_t, mut full) = (None, None, None, None);
        if let Some(eta) = self.advance_companion(obs.step, obs.time)? {
            let u_bar = ProfileState::from_average(&obs.state()?)?;
            let (a, b) = profile_difference(&u_bar, &eta)?;
            l2d = Some(a);
            h1d = Some(b);
            // u - eta = (u_bar - eta) + u_tilde, orthogonal on the full domain
            full = Some((tn[0] * tn[0] + obs.domain.torus_volume() * a * a).sqrt());
            n_t = Some(self.n1.update(obs.time, b, 0.0));
            if self.keep_profiles {
                self.profiles.push(eta);
            }
        }
        self.table.push(vec![
            Some(obs.time),
            Some(norms[0]),
            Some(norms[1]),
            Some(norms[2]),
            Some(norms[3]),
            Some(norms[4]),
            Some(tn[0]),
            Some(h1_tilde),
            l2d,
            h1d,
            full,
            m_t,
            n_t,
        ])
    }
}

/// [`PROFILE_COLUMNS`] table from recorded samples; `M0` uses the slower
/// weights when the profile is one-dimensional.
pub fn profile_table(samples: &[ProfileSample], ell: usize) -> Result<SeriesTable> {
    let energy = energy_n(samples);
    let weights = if ell == 2 {
        M0_TILDE_WEIGHTS
    } else {
        M0_WEIGHTS
    };
    let m0 = decay_functional_m0(samples, weights);
    let mut t = SeriesTable::new(&PROFILE_COLUMNS);
    for ((s, e), m) in samples.iter().zip(&energy).zip(&m0) {
        t.push(vec![
            Some(s.t),
            Some(s.l2_eta),
            Some(s.l2_dy_eta),
            Some(s.h2_eta_sq),
            Some(e.n_t),
            Some(*m),
        ])?;
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::DomainSpec;
    use crate::params::FluidParams;
    use crate::profile::ProfileState;
    use crate::solver::{make_initial_data, run, InitialDataSpec, Scheme, SolverConfig};

    #[test]
    fn csv_round_trip_with_blanks() {
        let mut t = SeriesTable::new(&["t", "a", "b"]);
        t.push(vec![Some(0.0), Some(1.5e-7), None]).unwrap();
        t.push(vec![Some(0.1), Some(std::f64::consts::PI), Some(-2.0)])
            .unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("t,a,b\n"));
        assert!(text.lines().nth(1).unwrap().ends_with(','));
        let back = SeriesTable::read_csv(&buf[..]).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.column("b").unwrap(), (vec![0.1], vec![-2.0]));
        assert!(back.column("zz").is_err());
    }

    #[test]
    fn sink_fills_columns_and_tracks_profile() {
        let d = DomainSpec::new(1, 60.0, [8, 16, 16]).unwrap();
        let p = FluidParams::quadratic(1.0, 1.0).unwrap();
        let u = make_initial_data(&d, &p, &InitialDataSpec::default()).unwrap();
        let cfg = SolverConfig {
            t_end: 1.0,
            diagnostics_stride: 3,
            ..Default::default()
        };
        let dt = crate::solver::resolve_dt(&u, &cfg).unwrap();
        let eta0 = ProfileState::from_average(&u).unwrap();
        let comp = ProfileSolver::new(&eta0, dt, true, Scheme::EtdRk2).unwrap();
        let mut sink = NsDiagnostics::new(1, None, Some(comp));
        run(&u, &cfg, &mut [&mut sink]).unwrap();
        let rows = &sink.table.rows;
        assert!(rows.len() >= 3);
        assert!(rows[0][8].unwrap() < 1e-18);
        assert!(rows.iter().all(|r| r.iter().all(|c| c.is_some())));
        let m: Vec<f64> = rows.iter().map(|r| r[11].unwrap()).collect();
        assert!((rows[0][10].unwrap() - rows[0][6].unwrap()).abs() < 1e-15);
        assert!(m.windows(2).all(|w| w[1] >= w[0]));
        let drift = sink
            .mean_phi
            .iter()
            .map(|v| (v - sink.mean_phi[0]).abs())
            .fold(0.0, f64::max);
        assert!(drift < 1e-15);
    }
}
