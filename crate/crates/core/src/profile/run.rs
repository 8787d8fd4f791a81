use super::{full_frequency, linear_rhs_spectra, profile_source_spectrum, ProfileState};
use crate::domain::DomainSpec;
use crate::error::{NsasError, Result};
use crate::field::Spectra;
use crate::params::FluidParams;
use crate::solver::{
    dt_max, max_evolved_wavenumber, momentum_sup, step_plan, Integrator, ModeFilter, Propagators,
    Scheme, SolverConfig, Source, DEFAULT_DT_FRACTION,
};
use crate::spectral::Spectral;

struct ProfileSource<'a> {
    spectral: &'a Spectral,
    filter: &'a ModeFilter,
    params: &'a FluidParams,
    ell: usize,
}

impl Source for ProfileSource<'_> {
    fn eval(&self, u: &Spectra) -> Result<Spectra> {
        let s = self.spectral;
        let phys = [
            s.inverse(&u[0])?,
            s.inverse(&u[1])?,
            s.inverse(&u[2])?,
            s.inverse(&u[3])?,
        ];
        let [b1, b2, b3] = profile_source_spectrum(
            s,
            self.filter,
            self.params,
            self.ell,
            &phys[0],
            [&phys[1], &phys[2], &phys[3]],
        )?;
        Ok([vec![Default::default(); s.len()], b1, b2, b3])
    }
}

/// Profile state in Fourier space on the reduced grid.
pub struct ProfileSolver {
    domain: DomainSpec,
    params: FluidParams,
    spectral: Spectral,
    filter: ModeFilter,
    integrator: Integrator,
    spectra: Spectra,
    t0: f64,
    steps: usize,
}

fn bound(spectral: &Spectral, filter: &ModeFilter, eta: &ProfileState) -> f64 {
    dt_max(
        max_evolved_wavenumber(spectral, filter),
        eta.params.gamma,
        momentum_sup(&eta.w),
    )
}

impl ProfileSolver {
    pub fn new(eta0: &ProfileState, dt: f64, dealias: bool, scheme: Scheme) -> Result<Self> {
        eta0.check()?;
        if !(dt > 0.0) {
            return Err(NsasError::param(format!("dt = {dt} must be positive")));
        }
        let grid = eta0.grid();
        let spectral = Spectral::new(grid.clone());
        let filter = ModeFilter::new(&grid, dealias);
        let b = bound(&spectral, &filter, eta0);
        if dt > b * (1.0 + 1e-12) {
            return Err(NsasError::param(format!(
                "dt = {dt} exceeds the stability bound {b}"
            )));
        }
        let mut spectra = eta0.to_spectra(&spectral)?;
        for s in spectra.iter_mut() {
            filter.apply(s);
        }
        let ell = eta0.domain.ell;
        let props = Propagators::with_frequencies(
            filter.kept().to_vec(),
            |idx| full_frequency(&spectral, ell, idx).0,
            &eta0.params,
            dt,
        );
        let integrator = Integrator::with_propagators(props, spectral.len(), scheme);
        Ok(ProfileSolver {
            domain: eta0.domain.clone(),
            params: eta0.params,
            spectral,
            filter,
            integrator,
            spectra,
            t0: eta0.time,
            steps: 0,
        })
    }

    pub fn from_config(eta0: &ProfileState, cfg: &SolverConfig) -> Result<Self> {
        let dt = profile_resolve_dt(eta0, cfg)?;
        Self::new(eta0, dt, cfg.dealias, cfg.scheme)
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

    pub fn state(&self) -> Result<ProfileState> {
        ProfileState::from_spectra(
            self.domain.clone(),
            self.params,
            &self.spectral,
            &self.spectra,
            self.time(),
        )
    }

    fn source(&self) -> ProfileSource<'_> {
        ProfileSource {
            spectral: &self.spectral,
            filter: &self.filter,
            params: &self.params,
            ell: self.domain.ell,
        }
    }

    /// Spectrum of `d eta / dt` at the current state.
    pub fn rhs(&self) -> Result<Spectra> {
        let mut out =
            linear_rhs_spectra(&self.spectral, &self.params, self.domain.ell, &self.spectra);
        let b = self.source().eval(&self.spectra)?;
        for c in 0..4 {
            out[c].iter_mut().zip(&b[c]).for_each(|(o, s)| *o += s);
        }
        Ok(out)
    }

    pub fn advance(&mut self) -> Result<()> {
        let src = ProfileSource {
            spectral: &self.spectral,
            filter: &self.filter,
            params: &self.params,
            ell: self.domain.ell,
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

/// `cfg.dt` or `0.8` of the reduced-grid bound, adjusted to divide `t_end`.
pub fn profile_resolve_dt(eta0: &ProfileState, cfg: &SolverConfig) -> Result<f64> {
    let dt = match cfg.dt {
        Some(dt) => dt,
        None => {
            let grid = eta0.grid();
            let spectral = Spectral::new(grid.clone());
            let filter = ModeFilter::new(&grid, cfg.dealias);
            DEFAULT_DT_FRACTION * bound(&spectral, &filter, eta0)
        }
    };
    if !(dt > 0.0) {
        return Err(NsasError::param(format!("dt = {dt} must be positive")));
    }
    Ok(step_plan(cfg.t_end, dt).1)
}

pub trait ProfileSink {
    fn observe(&mut self, solver: &ProfileSolver) -> Result<()>;

    fn flush(&mut self) -> Result<()> {
        Ok(())
    }
}

/// Evolves `eta0` to `cfg.t_end`; sinks see step 0, every
/// `diagnostics_stride` steps and the final step.
pub fn profile_run(
    eta0: &ProfileState,
    cfg: &SolverConfig,
    sinks: &mut [&mut dyn ProfileSink],
) -> Result<ProfileState> {
    if !(cfg.t_end >= 0.0) {
        return Err(NsasError::param(format!(
            "t_end = {} must be >= 0",
            cfg.t_end
        )));
    }
    if cfg.diagnostics_stride == 0 {
        return Err(NsasError::param("diagnostics_stride must be >= 1"));
    }
    let mut solver = ProfileSolver::from_config(eta0, cfg)?;
    let (n, _) = step_plan(cfg.t_end, solver.dt());
    let result = (|| -> Result<()> {
        for s in sinks.iter_mut() {
            s.observe(&solver)?;
        }
        for k in 1..=n {
            solver.advance()?;
            if k % cfg.diagnostics_stride == 0 || k == n {
                for s in sinks.iter_mut() {
                    s.observe(&solver)?;
                }
            }
        }
        Ok(())
    })();
    for s in sinks.iter_mut() {
        s.flush()?;
    }
    result?;
    if n == 0 {
        return Ok(eta0.clone());
    }
    solver.state()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::ProfileRecorder;
    use crate::solver::initial::{normalize_fields, random_fields};

    fn eta0(ell: usize, res: [usize; 3], eps: f64) -> ProfileState {
        let d = DomainSpec::new(ell, 60.0, res).unwrap();
        let p = FluidParams::quadratic(1.0, 1.0).unwrap();
        let g = d.reduced_grid();
        let s = Spectral::new(g.clone());
        let mut f = random_fields(&g, 0, 3, 0, 5.0).unwrap();
        normalize_fields(&s, &mut f, eps, true).unwrap();
        ProfileState::from_components(d, p, f, 0.0).unwrap()
    }

    #[test]
    fn zero_time_returns_initial_state() {
        let e = eta0(1, [8, 32, 32], 1e-2);
        let cfg = SolverConfig {
            t_end: 0.0,
            ..Default::default()
        };
        assert_eq!(profile_run(&e, &cfg, &mut []).unwrap(), e);
    }

    #[test]
    fn mean_density_is_conserved() {
        for (ell, res) in [(1, [8, 32, 32]), (2, [8, 8, 64])] {
            let e = eta0(ell, res, 5e-2);
            let cfg = SolverConfig {
                t_end: 5.0,
                diagnostics_stride: 50,
                ..Default::default()
            };
            let out = profile_run(&e, &cfg, &mut []).unwrap();
            assert!((out.mean_sigma() - e.mean_sigma()).abs() < 1e-15);
        }
    }

    #[test]
    fn sinks_see_start_and_end() {
        let e = eta0(2, [8, 8, 64], 1e-2);
        let cfg = SolverConfig {
            t_end: 2.0,
            diagnostics_stride: 7,
            ..Default::default()
        };
        let mut rec = ProfileRecorder::default();
        profile_run(&e, &cfg, &mut [&mut rec]).unwrap();
        assert_eq!(rec.samples[0].t, 0.0);
        assert!((rec.samples.last().unwrap().t - 2.0).abs() < 1e-12);
    }

    #[test]
    fn energy_decreases_for_small_data() {
        let e = eta0(1, [8, 32, 32], 1e-3);
        let cfg = SolverConfig {
            t_end: 4.0,
            diagnostics_stride: 5,
            ..Default::default()
        };
        let mut rec = ProfileRecorder::default();
        profile_run(&e, &cfg, &mut [&mut rec]).unwrap();
        let h: Vec<f64> = rec.samples.iter().map(|s| s.h2_eta_sq).collect();
        assert!(h.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9)));
    }
}
