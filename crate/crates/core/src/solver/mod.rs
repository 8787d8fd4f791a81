//! Nonlinear evolution of the perturbation `(phi, m)` by exponential time
//! differencing in Fourier space.

pub mod etd;
pub mod filter;
pub mod initial;
pub mod nonlinear;

pub use etd::{Integrator, Propagators, Scheme, Source};
pub use filter::ModeFilter;
pub use initial::{data_norm, make_initial_data, prolongate, InitialDataSpec};
pub use nonlinear::{flux_decomposition, nonlinearity_g, nonlinearity_g_filtered, FluxFields};

use crate::domain::DomainSpec;
use crate::error::{NsasError, Result};
use crate::field::{Spectra, StateField};
use crate::linear::semigroup::zero_spectra;
use crate::params::FluidParams;
use crate::spectral::Spectral;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

/// Acoustic/advective Courant number.
pub const CFL: f64 = 0.5;
/// Default `dt` as a fraction of the stability bound.
pub const DEFAULT_DT_FRACTION: f64 = 0.8;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// `None` selects `0.8 dt_max`.
    pub dt: Option<f64>,
    pub t_end: f64,
    pub dealias: bool,
    pub scheme: Scheme,
    /// Steps between checkpoints; 0 disables them.
    pub checkpoint_stride: usize,
    /// Steps between diagnostic samples.
    pub diagnostics_stride: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            dt: None,
            t_end: 1.0,
            dealias: true,
            scheme: Scheme::EtdRk2,
            checkpoint_stride: 0,
            diagnostics_stride: 10,
        }
    }
}

/// Largest `|q|` among evolved modes.
pub fn max_evolved_wavenumber(spectral: &Spectral, filter: &ModeFilter) -> f64 {
    let f = spectral.freqs();
    filter
        .kept()
        .iter()
        .map(|&i| (f[i][0] * f[i][0] + f[i][1] * f[i][1] + f[i][2] * f[i][2]).sqrt())
        .fold(0.0, f64::max)
}

/// `CFL / ((gamma + ||m||_inf) |q|_max)`.
pub fn dt_max(q_max: f64, gamma: f64, momentum_sup: f64) -> f64 {
    CFL / ((gamma + momentum_sup) * q_max)
}

pub(crate) fn momentum_sup(m: &[Vec<f64>; 3]) -> f64 {
    (0..m[0].len())
        .map(|z| (m[0][z] * m[0][z] + m[1][z] * m[1][z] + m[2][z] * m[2][z]).sqrt())
        .fold(0.0, f64::max)
}

/// Step count and uniform step for `t_end`, shrinking `dt` so that it divides
/// `t_end` exactly.
pub fn step_plan(t_end: f64, dt: f64) -> (usize, f64) {
    if t_end <= 0.0 {
        return (0, dt);
    }
    let n = ((t_end / dt) - 1e-9).ceil().max(1.0) as usize;
    (n, t_end / n as f64)
}

struct NsSource<'a> {
    spectral: &'a Spectral,
    filter: &'a ModeFilter,
    params: &'a FluidParams,
}

impl Source for NsSource<'_> {
    fn eval(&self, u: &Spectra) -> Result<Spectra> {
        let s = self.spectral;
        let phys = [
            s.inverse(&u[0])?,
            s.inverse(&u[1])?,
            s.inverse(&u[2])?,
            s.inverse(&u[3])?,
        ];
        let g = nonlinear::source_spectrum(
            s,
            self.filter,
            self.params,
            &phys[0],
            [&phys[1], &phys[2], &phys[3]],
        )?;
        let [g1, g2, g3] = g;
        Ok([vec![Default::default(); s.len()], g1, g2, g3])
    }
}

/// Solver state in Fourier space.
pub struct Solver {
    domain: DomainSpec,
    params: FluidParams,
    spectral: Spectral,
    filter: ModeFilter,
    integrator: Integrator,
    spectra: Spectra,
    t0: f64,
    steps: usize,
}

impl Solver {
    /// Filters `u0` to the evolved modes and prepares propagators for `dt`.
    pub fn new(u0: &StateField, dt: f64, dealias: bool, scheme: Scheme) -> Result<Self> {
        u0.check()?;
        if !(dt > 0.0) {
            return Err(NsasError::param(format!("dt = {dt} must be positive")));
        }
        let grid = u0.domain.grid();
        let spectral = Spectral::new(grid.clone());
        let filter = ModeFilter::new(&grid, dealias);
        let bound = dt_max(
            max_evolved_wavenumber(&spectral, &filter),
            u0.params.gamma,
            momentum_sup(&u0.momentum),
        );
        if dt > bound * (1.0 + 1e-12) {
            return Err(NsasError::param(format!(
                "dt = {dt} exceeds the stability bound {bound}"
            )));
        }
        let mut spectra = u0.to_spectra(&spectral)?;
        for s in spectra.iter_mut() {
            filter.apply(s);
        }
        let integrator = Integrator::new(&spectral, &filter, &u0.params, dt, scheme);
        Ok(Solver {
            domain: u0.domain.clone(),
            params: u0.params,
            spectral,
            filter,
            integrator,
            spectra,
            t0: u0.time,
            steps: 0,
        })
    }

    /// Uses the configured `dt` or `0.8 dt_max`, shrunk to divide `t_end`.
    pub fn from_config(u0: &StateField, cfg: &SolverConfig) -> Result<Self> {
        let dt = resolve_dt(u0, cfg)?;
        Self::new(u0, dt, cfg.dealias, cfg.scheme)
    }

    pub fn dt(&self) -> f64 {
        self.integrator.dt()
    }

    pub fn time(&self) -> f64 {
        self.t0 + self.steps as f64 * self.dt()
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn spectral(&self) -> &Spectral {
        &self.spectral
    }

    pub fn spectra(&self) -> &Spectra {
        &self.spectra
    }

    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    pub fn params(&self) -> &FluidParams {
        &self.params
    }

    pub fn filter(&self) -> &ModeFilter {
        &self.filter
    }

    pub fn state(&self) -> Result<StateField> {
        StateField::from_spectra(
            self.domain.clone(),
            self.params,
            &self.spectral,
            &self.spectra,
            self.time(),
        )
    }

    /// Source spectrum at the current state.
    pub fn source(&self) -> Result<Spectra> {
        NsSource {
            spectral: &self.spectral,
            filter: &self.filter,
            params: &self.params,
        }
        .eval(&self.spectra)
    }

    pub fn advance(&mut self) -> Result<()> {
        let src = NsSource {
            spectral: &self.spectral,
            filter: &self.filter,
            params: &self.params,
        };
        let next = self.integrator.advance(&self.spectra, &src)?;
        let finite = next
            .iter()
            .all(|s| s.iter().all(|c| c.re.is_finite() && c.im.is_finite()));
        if !finite {
            return Err(NsasError::Divergence {
                step: self.steps + 1,
                time: self.time() + self.dt(),
            });
        }
        self.spectra = next;
        self.steps += 1;
        Ok(())
    }
}

/// `cfg.dt` or the default fraction of the bound, adjusted to divide `t_end`.
pub fn resolve_dt(u0: &StateField, cfg: &SolverConfig) -> Result<f64> {
    let dt = match cfg.dt {
        Some(dt) => dt,
        None => {
            let grid = u0.domain.grid();
            let spectral = Spectral::new(grid.clone());
            let filter = ModeFilter::new(&grid, cfg.dealias);
            DEFAULT_DT_FRACTION
                * dt_max(
                    max_evolved_wavenumber(&spectral, &filter),
                    u0.params.gamma,
                    momentum_sup(&u0.momentum),
                )
        }
    };
    if !(dt > 0.0) {
        return Err(NsasError::param(format!("dt = {dt} must be positive")));
    }
    Ok(step_plan(cfg.t_end, dt).1)
}

/// One step of size `cfg.dt` (or its default).
pub fn step(u: &StateField, cfg: &SolverConfig) -> Result<StateField> {
    let dt = match cfg.dt {
        Some(dt) => dt,
        None => resolve_dt(
            u,
            &SolverConfig {
                t_end: 0.0,
                ..cfg.clone()
            },
        )?,
    };
    let mut s = Solver::new(u, dt, cfg.dealias, cfg.scheme)?;
    s.advance()?;
    s.state()
}

/// What a diagnostics sink sees at a sample time.
pub struct Observation<'a> {
    pub step: usize,
    pub time: f64,
    pub domain: &'a DomainSpec,
    pub params: &'a FluidParams,
    pub spectral: &'a Spectral,
    pub spectra: &'a Spectra,
}

impl Observation<'_> {
    pub fn state(&self) -> Result<StateField> {
        StateField::from_spectra(
            self.domain.clone(),
            *self.params,
            self.spectral,
            self.spectra,
            self.time,
        )
    }
}

pub trait Sink {
    fn observe(&mut self, obs: &Observation) -> Result<()>;

    /// Called once at the end of a run, also when it aborts.
    fn flush(&mut self) -> Result<()> {
        Ok(())
    }
}

/// Collects observed states in memory.
#[derive(Debug, Default)]
pub struct StateRecorder {
    pub states: Vec<StateField>,
}

impl Sink for StateRecorder {
    fn observe(&mut self, obs: &Observation) -> Result<()> {
        self.states.push(obs.state()?);
        Ok(())
    }
}

pub fn checkpoint_path(dir: &Path, step: usize) -> PathBuf {
    dir.join(format!("checkpoint_{step:08}.nsas"))
}

/// Evolves `u0` to `cfg.t_end`, sampling sinks every `diagnostics_stride`
/// steps (and at the start and end).
pub fn run(u0: &StateField, cfg: &SolverConfig, sinks: &mut [&mut dyn Sink]) -> Result<StateField> {
    run_with_checkpoints(u0, cfg, sinks, None)
}

pub fn run_with_checkpoints(
    u0: &StateField,
    cfg: &SolverConfig,
    sinks: &mut [&mut dyn Sink],
    checkpoint_dir: Option<&Path>,
) -> Result<StateField> {
    if cfg.t_end == 0.0 {
        let mut solver = Solver::from_config(u0, cfg)?;
        let r = observe_all(&mut solver, sinks);
        flush_all(sinks)?;
        r?;
        return Ok(u0.clone());
    }
    if !(cfg.t_end > 0.0) {
        return Err(NsasError::param(format!(
            "t_end = {} must be >= 0",
            cfg.t_end
        )));
    }
    if cfg.diagnostics_stride == 0 {
        return Err(NsasError::param("diagnostics_stride must be >= 1"));
    }
    let mut solver = Solver::from_config(u0, cfg)?;
    let (n, _) = step_plan(cfg.t_end, solver.dt());
    let result = drive(&mut solver, n, cfg, sinks, checkpoint_dir);
    flush_all(sinks)?;
    result?;
    solver.state()
}

fn observe_all(solver: &mut Solver, sinks: &mut [&mut dyn Sink]) -> Result<()> {
    let obs = Observation {
        step: solver.steps(),
        time: solver.time(),
        domain: &solver.domain,
        params: &solver.params,
        spectral: &solver.spectral,
        spectra: &solver.spectra,
    };
    for s in sinks.iter_mut() {
        s.observe(&obs)?;
    }
    Ok(())
}

fn flush_all(sinks: &mut [&mut dyn Sink]) -> Result<()> {
    for s in sinks.iter_mut() {
        s.flush()?;
    }
    Ok(())
}

fn drive(
    solver: &mut Solver,
    n: usize,
    cfg: &SolverConfig,
    sinks: &mut [&mut dyn Sink],
    checkpoint_dir: Option<&Path>,
) -> Result<()> {
    observe_all(solver, sinks)?;
    for k in 1..=n {
        solver.advance()?;
        if k % cfg.diagnostics_stride == 0 || k == n {
            observe_all(solver, sinks)?;
        }
        if let Some(dir) = checkpoint_dir {
            if cfg.checkpoint_stride > 0 && (k % cfg.checkpoint_stride == 0 || k == n) {
                let f = File::create(checkpoint_path(dir, k))?;
                solver.state()?.write_checkpoint(BufWriter::new(f))?;
            }
        }
        log::debug!("step {k}/{n} t = {:.4}", solver.time());
    }
    Ok(())
}

/// Zero spectra of the right size, for callers building sources by hand.
pub fn empty_spectra(spectral: &Spectral) -> Spectra {
    zero_spectra(spectral.len())
}
