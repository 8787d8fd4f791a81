//! Experiment recipes: run, fit, judge, and write the artifacts.

use super::config::{Experiment, ExperimentConfig};
use super::stamp::reproducibility_stamp;
use super::verdict::{Check, InPhase, PhaseError, Verdict};
use crate::diagnostics::fit::MIN_FIT_SAMPLES;
use crate::diagnostics::{
    default_window, fit_decay, profile_table, DecayFit, DecayModel, DecaySeries, NsDiagnostics,
    SeriesTable,
};
use crate::domain::FrequencyVector;
use crate::error::{NsasError, Result};
use crate::linear::semigroup::nyquist_flags;
use crate::linear::symbol::{sampled_min_real_part, GAP_CHECK_P_MAX};
use crate::linear::{
    assemble_symbol, default_r0_sq, eigenvalues4, gap_bound, high_frequency_rate,
    matched_deviation, perturbed_gap, propagator, spectral_gap, split_spectra, symbol_eigenvalues,
    Background, DEFAULT_K_MAX,
};
use crate::profile::{
    profile_resolve_dt, profile_run, ProfileRecorder, ProfileSolver, ProfileState,
};
use crate::solver::{make_initial_data, prolongate, resolve_dt, run, SolverConfig};
use crate::spectral::Spectral;
use nalgebra::Vector4;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::time::Instant;

type Phased<T> = std::result::Result<T, PhaseError>;

pub const SERIES_FILE: &str = "series.csv";
pub const VERDICT_FILE: &str = "verdict.txt";
pub const STAMP_FILE: &str = "stamp.txt";

pub const LINEAR_COLUMNS: [&str; 4] = ["t", "L2_low", "L2_dy_low", "L2_high"];
pub const SWEEP_COLUMNS: [&str; 6] = [
    "p",
    "re_lambda1",
    "re_lambda_plus",
    "im_lambda_plus",
    "re_lambda_minus",
    "im_lambda_minus",
];
/// `p` range of the symbol sweep.
pub const SWEEP_P_RANGE: (f64, f64) = (1e-4, 1e8);
/// Radius of the ball random frequencies are drawn from.
pub const RANDOM_Q_RADIUS: f64 = 10.0;
const GAP_SAMPLES: usize = 20000;

/// Runs `cfg` and writes `series.csv`, `stamp.txt` and `verdict.txt` under
/// `cfg.out_dir`. Failures of any phase end up in the verdict as `ERROR`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Verdict {
    let start = Instant::now();
    let mut v = Verdict::new(cfg.experiment);
    let mut series: Option<SeriesTable> = None;
    let r = (|| -> Phased<()> {
        cfg.validate().phase("config")?;
        std::fs::create_dir_all(&cfg.out_dir)
            .map_err(NsasError::from)
            .phase("output")?;
        match cfg.experiment {
            Experiment::OnePeriodic | Experiment::TwoPeriodic => {
                open_decay(cfg, &mut v, &mut series)
            }
            Experiment::FullTorus => torus_decay(cfg, &mut v, &mut series),
            Experiment::LinearSplit => linear_split(cfg, &mut v, &mut series),
            Experiment::ProfileOnly => profile_only(cfg, &mut v, &mut series),
            Experiment::SymbolSweep => symbol_sweep(cfg, &mut v, &mut series),
        }
    })();
    if let Err(e) = &r {
        log::error!("{} failed: {e}", cfg.experiment);
        v.fail_with(e);
    }
    let written = write_artifacts(cfg, series.as_ref(), start);
    if let Err(e) = written {
        if v.error.is_none() {
            v.fail_with(&e);
        }
    }
    v.finalize();
    if let Err(e) = v.write(&cfg.out_dir.join(VERDICT_FILE)) {
        log::error!("cannot write verdict: {e}");
    }
    v
}

fn write_artifacts(
    cfg: &ExperimentConfig,
    series: Option<&SeriesTable>,
    start: Instant,
) -> Phased<()> {
    if !cfg.out_dir.is_dir() {
        return Err(NsasError::Config(format!(
            "out_dir {} missing",
            cfg.out_dir.display()
        )))
        .phase("output");
    }
    let bytes = match series {
        Some(t) => {
            let mut b = Vec::new();
            t.write_csv(&mut b).phase("output")?;
            std::fs::write(cfg.out_dir.join(SERIES_FILE), &b)
                .map_err(NsasError::from)
                .phase("output")?;
            Some(b)
        }
        None => None,
    };
    reproducibility_stamp(cfg, bytes.as_deref(), start.elapsed())
        .write(&cfg.out_dir.join(STAMP_FILE))
        .phase("output")
}

/// Solver run with diagnostics only (companion profile when the domain
/// has open directions). Writes `series.csv` and `stamp.txt`.
pub fn simulate(cfg: &ExperimentConfig) -> Result<SeriesTable> {
    let start = Instant::now();
    cfg.validate()?;
    let domain = cfg.domain()?;
    let params = cfg.params()?;
    let u0 = make_initial_data(&domain, &params, &cfg.initial_data())?;
    let scfg = cfg.solver_config()?;
    let dt = resolve_dt(&u0, &scfg)?;
    let companion = if cfg.ell < 3 {
        let eta0 = ProfileState::from_average(&u0)?;
        Some(ProfileSolver::new(&eta0, dt, cfg.dealias, cfg.scheme)?)
    } else {
        None
    };
    let a0 = if cfg.ell == 3 {
        let bg = Background {
            phi: u0.mean_phi(),
            m: u0.mean_momentum(),
        };
        Some(perturbed_gap(bg, &params, DEFAULT_K_MAX)?.a0)
    } else {
        None
    };
    let mut diag = NsDiagnostics::new(cfg.ell, a0, companion);
    let scfg = SolverConfig {
        dt: Some(dt),
        ..scfg
    };
    std::fs::create_dir_all(&cfg.out_dir)?;
    let ckpt = (cfg.checkpoint_stride > 0).then_some(cfg.out_dir.as_path());
    crate::solver::run_with_checkpoints(&u0, &scfg, &mut [&mut diag], ckpt)?;
    save_with_stamp(cfg, &diag.table, start)?;
    Ok(diag.table)
}

/// Profile system alone from the averaged initial data. Writes
/// `series.csv` (profile columns) and `stamp.txt`.
pub fn simulate_profile(cfg: &ExperimentConfig) -> Result<SeriesTable> {
    let start = Instant::now();
    cfg.validate()?;
    if cfg.ell == 3 {
        return Err(NsasError::Config(
            "the profile system needs ell = 1 or 2".into(),
        ));
    }
    let domain = cfg.domain()?;
    let params = cfg.params()?;
    let u0 = make_initial_data(&domain, &params, &cfg.initial_data())?;
    let eta0 = ProfileState::from_average(&u0)?;
    let mut rec = ProfileRecorder::default();
    profile_run(&eta0, &cfg.solver_config()?, &mut [&mut rec])?;
    let table = profile_table(&rec.samples, cfg.ell)?;
    std::fs::create_dir_all(&cfg.out_dir)?;
    save_with_stamp(cfg, &table, start)?;
    Ok(table)
}

fn save_with_stamp(cfg: &ExperimentConfig, table: &SeriesTable, start: Instant) -> Result<()> {
    let mut b = Vec::new();
    table.write_csv(&mut b)?;
    std::fs::write(cfg.out_dir.join(SERIES_FILE), &b)?;
    reproducibility_stamp(cfg, Some(&b), start.elapsed()).write(&cfg.out_dir.join(STAMP_FILE))
}

/// `[start, end]` for a power fit: configured bounds first, otherwise
/// `[max(10, 5 transient), min(0.9 t_wrap, horizon)]`, falling back to a
/// start of 10 when the transient rule leaves too few samples.
pub fn fit_window(
    cfg: &ExperimentConfig,
    series: &DecaySeries,
    t_wrap: f64,
    horizon: f64,
) -> (f64, f64) {
    let end = cfg.fit_end.unwrap_or((0.9 * t_wrap).min(horizon));
    let start = cfg.fit_start.unwrap_or_else(|| {
        let s = default_window(series, t_wrap).0;
        let n = series.times.iter().filter(|&&t| t >= s && t <= end).count();
        if n >= MIN_FIT_SAMPLES {
            s
        } else {
            10.0
        }
    });
    (start, end)
}

fn fit_column(
    cfg: &ExperimentConfig,
    table: &SeriesTable,
    column: &str,
    model: DecayModel,
    t_wrap: f64,
    horizon: f64,
) -> Result<DecayFit> {
    let (t, y) = table.column(column)?;
    let s = DecaySeries::new(&t, &y, column)?;
    let w = fit_window(cfg, &s, t_wrap, horizon);
    fit_decay(&s, model, w)
}

fn max_of(table: &SeriesTable, column: &str) -> Result<f64> {
    Ok(table.column(column)?.1.into_iter().fold(0.0, f64::max))
}

/// Runs on `T^1 x R^2` and `T^2 x R`: solver with a companion
/// profile, then power(-log) fits of the tracked norms.
fn open_decay(
    cfg: &ExperimentConfig,
    v: &mut Verdict,
    out: &mut Option<SeriesTable>,
) -> Phased<()> {
    let domain = cfg.domain().phase("setup")?;
    let params = cfg.params().phase("setup")?;
    let u0 = make_initial_data(&domain, &params, &cfg.initial_data()).phase("initial_data")?;
    let scfg = cfg.solver_config().phase("setup")?;
    let dt = resolve_dt(&u0, &scfg).phase("setup")?;
    let eta0 = ProfileState::from_average(&u0).phase("averaging")?;
    let companion = ProfileSolver::new(&eta0, dt, cfg.dealias, cfg.scheme).phase("profile")?;
    let mut diag = NsDiagnostics::new(cfg.ell, None, Some(companion));
    let scfg = SolverConfig {
        dt: Some(dt),
        ..scfg
    };
    let solved = run(&u0, &scfg, &mut [&mut diag]);
    *out = Some(diag.table.clone());
    solved.phase("solve")?;

    let t_wrap = domain.wrap_horizon(params.gamma);
    let horizon = scfg.t_end;
    v.note("dt", dt);
    v.note("t_wrap", t_wrap);
    let th = &cfg.thresholds;
    let table = &diag.table;
    let fit =
        |col: &str, m: DecayModel| fit_column(cfg, table, col, m, t_wrap, horizon).phase("fit");

    let l2 = fit("L2_u", DecayModel::Power)?;
    v.check(Check::within(
        "l2_slope",
        l2.exponent_or_rate,
        th.l2_slope_target,
        th.l2_slope_tol,
    ));
    let grad = fit("L2_du", DecayModel::Power)?;
    v.check(Check::within(
        "grad_slope",
        grad.exponent_or_rate,
        th.grad_slope_target,
        th.grad_slope_tol,
    ));
    v.note("fit_start", l2.window.0);
    v.note("fit_end", l2.window.1);
    if cfg.ell == 1 {
        let d = fit("L2_u_minus_eta", DecayModel::Power)?;
        v.check(Check::at_most(
            "diff_slope",
            d.exponent_or_rate,
            th.diff_slope_max,
        ));
        for k in 2..=4 {
            let f = fit(&format!("L2_d{k}u"), DecayModel::Power)?;
            let bound = -(4.0 - k as f64) / 3.0 + th.higher_slope_margin;
            v.check(Check::at_most(
                &format!("d{k}_slope"),
                f.exponent_or_rate,
                bound,
            ));
        }
    } else {
        let d = fit("L2_u_minus_eta", DecayModel::PowerLog)?;
        v.check(Check::within(
            "diff_slope_log",
            d.exponent_or_rate,
            th.diff_slope_target,
            th.diff_slope_tol,
        ));
        v.note("diff_fit_start", d.window.0);
    }
    for m in [DecayModel::Power, DecayModel::PowerLog] {
        if let Ok(f) = fit("L2_ubar_minus_eta", m) {
            v.note(&format!("ubar_minus_eta_{m}_slope"), f.exponent_or_rate);
        }
    }
    v.note(
        "max_m_over_eps",
        max_of(table, "M_t").phase("fit")? / cfg.epsilon,
    );
    v.note("max_n1", max_of(table, "N_t").phase("fit")?);
    Ok(())
}

/// `T^3` run: mass conservation and exponential decay of the oscillation.
fn torus_decay(
    cfg: &ExperimentConfig,
    v: &mut Verdict,
    out: &mut Option<SeriesTable>,
) -> Phased<()> {
    let domain = cfg.domain().phase("setup")?;
    let params = cfg.params().phase("setup")?;
    let u0 = make_initial_data(&domain, &params, &cfg.initial_data()).phase("initial_data")?;
    let background = Background {
        phi: u0.mean_phi(),
        m: u0.mean_momentum(),
    };
    let gap = perturbed_gap(background, &params, DEFAULT_K_MAX).phase("gap")?;
    let a0 = gap.a0;
    v.note("a0", a0);
    v.note("background_phi", background.phi);
    let scfg = cfg.solver_config().phase("setup")?;
    let mut diag = NsDiagnostics::new(3, Some(a0), None);
    let solved = run(&u0, &scfg, &mut [&mut diag]);
    *out = Some(diag.table.clone());
    solved.phase("solve")?;

    let th = &cfg.thresholds;
    let m0 = diag.mean_phi[0];
    let drift = diag
        .mean_phi
        .iter()
        .map(|m| (m - m0).abs())
        .fold(0.0, f64::max);
    v.check(Check::at_most("mean_phi_drift", drift, th.mean_drift_max));
    let p0 = diag.mean_momentum[0];
    let mdrift = diag
        .mean_momentum
        .iter()
        .flat_map(|m| (0..3).map(move |c| (m[c] - p0[c]).abs()))
        .fold(0.0, f64::max);
    v.note("mean_momentum_drift", mdrift);

    let horizon = scfg.t_end;
    let (t, y) = diag.table.column("H1_tilde").phase("fit")?;
    let s = DecaySeries::new(&t, &y, "H1_tilde").phase("fit")?;
    let w = (
        cfg.fit_start.unwrap_or(0.25 * horizon),
        cfg.fit_end.unwrap_or(horizon),
    );
    let f = fit_decay(&s, DecayModel::Exponential, w).phase("fit")?;
    v.check(Check::at_least(
        "h1_tilde_rate",
        f.exponent_or_rate,
        th.rate_fraction * a0,
    ));
    v.note("rate_over_a0", f.exponent_or_rate / a0);
    let m2 = max_of(&diag.table, "M_t").phase("fit")?;
    v.check(Check::at_most(
        "m2_sup",
        m2,
        th.sup_bound_factor * cfg.epsilon,
    ));
    Ok(())
}

/// `sum_modes sum_c |q|^(2k) |v_c|^2 / volume`, square-rooted.
fn mode_norm(modes: &[Vector4<Complex64>], q_abs: &[f64], k: i32, volume: f64) -> f64 {
    let s: f64 = modes
        .iter()
        .zip(q_abs)
        .map(|(m, q)| q.powi(2 * k) * m.iter().map(|c| c.norm_sqr()).sum::<f64>())
        .sum();
    (s / volume).sqrt()
}

/// Low/high frequency split evolved exactly: the propagator for one sample
/// interval is built once per active mode and applied repeatedly.
fn linear_split(
    cfg: &ExperimentConfig,
    v: &mut Verdict,
    out: &mut Option<SeriesTable>,
) -> Phased<()> {
    let domain = cfg.domain().phase("setup")?;
    let params = cfg.params().phase("setup")?;
    let u0 = make_initial_data(&domain, &params, &cfg.initial_data()).phase("initial_data")?;
    let r0_sq = cfg.r0_sq.unwrap_or_else(|| default_r0_sq(&params));
    let a = spectral_gap(r0_sq, &params).phase("gap")?;
    let a0 = high_frequency_rate(a);
    v.note("r0_sq", r0_sq);
    v.note("a0", a0);
    let spectral = Spectral::new(domain.grid());
    let spectra = u0.to_spectra(&spectral).phase("transform")?;
    let (low, high) = split_spectra(&spectral, &spectra, r0_sq.sqrt());
    let horizon = cfg.horizon().phase("setup")?;
    let n = cfg.samples;
    let step = horizon / (n - 1) as f64;
    let freqs = spectral.freqs();
    let active: Vec<usize> = (0..spectral.len())
        .filter(|&i| (0..4).any(|c| spectra[c][i].norm_sqr() > 0.0))
        .collect();
    let props: Vec<_> = active
        .par_iter()
        .map(|&i| propagator(freqs[i], nyquist_flags(&spectral, i), step, &params))
        .collect();
    let q_abs: Vec<f64> = active
        .iter()
        .map(|&i| freqs[i].iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    let pick = |s: &crate::field::Spectra| -> Vec<Vector4<Complex64>> {
        active
            .iter()
            .map(|&i| Vector4::new(s[0][i], s[1][i], s[2][i], s[3][i]))
            .collect()
    };
    let mut lo = pick(&low);
    let mut hi = pick(&high);
    let volume = domain.grid().volume();
    let mut table = SeriesTable::new(&LINEAR_COLUMNS);
    for k in 0..n {
        let t = k as f64 * step;
        table
            .push(vec![
                Some(t),
                Some(mode_norm(&lo, &q_abs, 0, volume)),
                Some(mode_norm(&lo, &q_abs, 1, volume)),
                Some(mode_norm(&hi, &q_abs, 0, volume)),
            ])
            .phase("evolve")?;
        lo.par_iter_mut().zip(&props).for_each(|(x, p)| *x = p * *x);
        hi.par_iter_mut().zip(&props).for_each(|(x, p)| *x = p * *x);
    }
    *out = Some(table.clone());

    let t_wrap = domain.wrap_horizon(params.gamma);
    let th = &cfg.thresholds;
    let fit =
        |col: &str, m: DecayModel| fit_column(cfg, &table, col, m, t_wrap, horizon).phase("fit");
    let l0 = fit("L2_low", DecayModel::Power)?;
    v.check(Check::within(
        "low_slope_j0",
        l0.exponent_or_rate,
        th.l2_slope_target,
        th.l2_slope_tol,
    ));
    let l1 = fit("L2_dy_low", DecayModel::Power)?;
    v.check(Check::within(
        "low_slope_j1",
        l1.exponent_or_rate,
        th.grad_slope_target,
        th.grad_slope_tol,
    ));
    let hf = fit("L2_high", DecayModel::Exponential)?;
    v.check(Check::at_least(
        "high_rate",
        hf.exponent_or_rate,
        th.rate_fraction * a0,
    ));
    v.note("high_rate_over_a0", hf.exponent_or_rate / a0);
    Ok(())
}

fn profile_only(
    cfg: &ExperimentConfig,
    v: &mut Verdict,
    out: &mut Option<SeriesTable>,
) -> Phased<()> {
    let domain = cfg.domain().phase("setup")?;
    let params = cfg.params().phase("setup")?;
    let u0 = make_initial_data(&domain, &params, &cfg.initial_data()).phase("initial_data")?;
    let eta0 = ProfileState::from_average(&u0).phase("averaging")?;
    let scfg = cfg.solver_config().phase("setup")?;
    let fine = if cfg.refinement_check {
        let mut res = cfg.resolution;
        for r in res.iter_mut().skip(cfg.ell) {
            *r *= 2;
        }
        let uf = prolongate(&u0, res).phase("refinement")?;
        Some(ProfileState::from_average(&uf).phase("refinement")?)
    } else {
        None
    };
    // the refined grid has the tighter step bound; both runs share it
    let dt = profile_resolve_dt(fine.as_ref().unwrap_or(&eta0), &scfg).phase("setup")?;
    let scfg = SolverConfig {
        dt: Some(dt),
        ..scfg
    };
    let mut rec = ProfileRecorder::default();
    let solved = profile_run(&eta0, &scfg, &mut [&mut rec]);
    let table = profile_table(&rec.samples, cfg.ell).phase("diagnostics")?;
    *out = Some(table.clone());
    solved.phase("profile")?;

    let th = &cfg.thresholds;
    let eps = cfg.epsilon;
    v.note("dt", dt);
    let n_max = max_of(&table, "N_t").phase("fit")?;
    v.check(Check::at_most(
        "energy_sup",
        n_max,
        th.energy_bound_factor * eps * eps,
    ));
    let m0 = max_of(&table, "M0_t").phase("fit")?;
    v.check(Check::at_most("m0_sup", m0, th.sup_bound_factor * eps));
    let t_wrap = domain.wrap_horizon(params.gamma);
    let horizon = scfg.t_end;
    let fit =
        |col: &str| fit_column(cfg, &table, col, DecayModel::Power, t_wrap, horizon).phase("fit");
    let f0 = fit("L2_eta")?;
    v.check(Check::within(
        "eta_slope",
        f0.exponent_or_rate,
        th.l2_slope_target,
        th.l2_slope_tol,
    ));
    let f1 = fit("L2_dy_eta")?;
    v.check(Check::within(
        "dy_eta_slope",
        f1.exponent_or_rate,
        th.grad_slope_target,
        th.grad_slope_tol,
    ));

    if let Some(eta_fine) = fine {
        let mut rf = ProfileRecorder::default();
        profile_run(&eta_fine, &scfg, &mut [&mut rf]).phase("refinement")?;
        if rf.samples.len() != rec.samples.len() {
            return Err(NsasError::Alignment(
                "refined run sampled differently".into(),
            ))
            .phase("refinement");
        }
        let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
        let worst = rec
            .samples
            .iter()
            .zip(&rf.samples)
            .map(|(a, b)| {
                rel(a.l2_eta, b.l2_eta)
                    .max(rel(a.l2_dy_eta, b.l2_dy_eta))
                    .max(rel(a.h2_eta_sq, b.h2_eta_sq))
            })
            .fold(0.0, f64::max);
        v.check(Check::at_most(
            "refinement_change",
            worst,
            th.refinement_tol,
        ));
    }
    Ok(())
}

/// Uniform draw from the ball `|q| <= radius`, by rejection from the cube.
fn random_frequency(rng: &mut ChaCha8Rng, radius: f64) -> [f64; 3] {
    loop {
        let q = [0; 3].map(|_| rng.random_range(-radius..=radius));
        let r2: f64 = q.iter().map(|x| x * x).sum();
        if r2 <= radius * radius && r2 > 0.0 {
            return q;
        }
    }
}

fn symbol_sweep(
    cfg: &ExperimentConfig,
    v: &mut Verdict,
    out: &mut Option<SeriesTable>,
) -> Phased<()> {
    let params = cfg.params().phase("setup")?;
    let th = &cfg.thresholds;
    let n = cfg.samples;
    let (lo, hi) = (SWEEP_P_RANGE.0.ln(), SWEEP_P_RANGE.1.ln());
    let mut table = SeriesTable::new(&SWEEP_COLUMNS);
    let mut last = None;
    for i in 0..n {
        let p = (lo + (hi - lo) * i as f64 / (n - 1) as f64).exp();
        let e = symbol_eigenvalues(p, &params).phase("sweep")?;
        table
            .push(vec![
                Some(p),
                Some(e.lambda1.re),
                Some(e.lambda_plus.re),
                Some(e.lambda_plus.im),
                Some(e.lambda_minus.re),
                Some(e.lambda_minus.im),
            ])
            .phase("sweep")?;
        last = Some(e);
    }
    *out = Some(table);
    let limit = params.gamma * params.gamma / (params.nu1 + params.nu2);
    let tail = last.map(|e| e.lambda_minus.re).unwrap_or(f64::NAN);
    v.note("lambda_minus_limit", limit);
    v.check(Check::at_most(
        "asymptote_deviation",
        (tail - limit).abs() / limit,
        th.asymptote_tol,
    ));

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let freqs: Vec<[f64; 3]> = (0..n)
        .map(|_| random_frequency(&mut rng, RANDOM_Q_RADIUS))
        .collect();
    let nu = params.nu1 + params.nu2;
    let g2 = params.gamma * params.gamma;
    let mut eig_dev = 0.0f64;
    let mut vieta = 0.0f64;
    for q in freqs {
        let f = FrequencyVector::new(cfg.ell, q);
        let closed = symbol_eigenvalues(f.p(), &params).phase("eigen")?;
        let numeric = eigenvalues4(&assemble_symbol(f, &params).entries);
        eig_dev = eig_dev.max(matched_deviation(&closed.as_array(), &numeric));
        let (lp, lm) = (closed.lambda_plus, closed.lambda_minus);
        let p = f.p();
        vieta = vieta
            .max(((lp + lm).re - nu * p).abs().max((lp + lm).im.abs()) / (nu * p))
            .max(((lp * lm).re - g2 * p).abs().max((lp * lm).im.abs()) / (g2 * p));
    }
    v.check(Check::at_most("eigen_deviation", eig_dev, th.eig_tol));
    v.check(Check::at_most("vieta_relative", vieta, th.vieta_tol));

    if let Some(r0_sq) = cfg.r0_sq {
        let a = spectral_gap(r0_sq, &params).phase("gap")?;
        v.note("gap", a);
        let formula = gap_bound(r0_sq, params.nu1, params.nu2, params.gamma);
        v.check(Check::at_most(
            "gap_formula_mismatch",
            (a - formula).abs(),
            0.0,
        ));
        let sampled = sampled_min_real_part(r0_sq, GAP_CHECK_P_MAX, GAP_SAMPLES, &params);
        v.check(Check::at_least(
            "gap_sampled_min",
            sampled,
            a * (1.0 - 1e-9),
        ));
    }
    Ok(())
}
