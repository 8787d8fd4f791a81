//! Flat `key = value` experiment configuration.

use crate::domain::DomainSpec;
use crate::error::{NsasError, Result};
use crate::params::{FluidParams, PressureLaw};
use crate::solver::{InitialDataSpec, Scheme, SolverConfig};
use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    OnePeriodic,
    TwoPeriodic,
    FullTorus,
    LinearSplit,
    ProfileOnly,
    SymbolSweep,
}

impl Experiment {
    /// The `ell` an experiment requires, if it fixes one.
    pub fn required_ell(&self) -> Option<usize> {
        match self {
            Experiment::OnePeriodic | Experiment::LinearSplit => Some(1),
            Experiment::TwoPeriodic => Some(2),
            Experiment::FullTorus => Some(3),
            Experiment::ProfileOnly | Experiment::SymbolSweep => None,
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Experiment::OnePeriodic => "theorem1",
            Experiment::TwoPeriodic => "theorem2",
            Experiment::FullTorus => "theorem3",
            Experiment::LinearSplit => "linear_lemma21",
            Experiment::ProfileOnly => "profile_only",
            Experiment::SymbolSweep => "symbol_sweep",
        })
    }
}

impl FromStr for Experiment {
    type Err = NsasError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "theorem1" => Experiment::OnePeriodic,
            "theorem2" => Experiment::TwoPeriodic,
            "theorem3" => Experiment::FullTorus,
            "linear_lemma21" => Experiment::LinearSplit,
            "profile_only" => Experiment::ProfileOnly,
            "symbol_sweep" => Experiment::SymbolSweep,
            other => return Err(NsasError::Config(format!("unknown experiment `{other}`"))),
        })
    }
}

/// Verdict thresholds. Every field can be overridden by the config key of
/// the same name.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub l2_slope_target: f64,
    pub l2_slope_tol: f64,
    pub grad_slope_target: f64,
    pub grad_slope_tol: f64,
    /// Two-sided target for `||u - eta||` (power-log fit when `ell = 2`).
    pub diff_slope_target: f64,
    pub diff_slope_tol: f64,
    /// One-sided bound for `||u - eta||` when `ell = 1`.
    pub diff_slope_max: f64,
    /// Slack on the one-sided bounds for derivative orders 2..=4.
    pub higher_slope_margin: f64,
    /// Fitted exponential rate must reach this fraction of `a0`.
    pub rate_fraction: f64,
    pub mean_drift_max: f64,
    /// Sup-functional bound as a multiple of `epsilon`.
    pub sup_bound_factor: f64,
    /// `N(t)` bound as a multiple of `epsilon^2`.
    pub energy_bound_factor: f64,
    pub eig_tol: f64,
    pub vieta_tol: f64,
    pub asymptote_tol: f64,
    /// Relative change allowed under resolution doubling.
    pub refinement_tol: f64,
}

impl Thresholds {
    /// Shipped thresholds. Profile-only runs on `T^2 x R` use the slower
    /// one-dimensional rates.
    pub fn defaults_for(experiment: Experiment, ell: usize) -> Self {
        let mut t = Self::defaults(experiment);
        if experiment == Experiment::ProfileOnly && ell == 2 {
            t.l2_slope_target = -0.25;
            t.grad_slope_target = -0.75;
        }
        t
    }

    pub fn defaults(experiment: Experiment) -> Self {
        let mut t = Thresholds {
            l2_slope_target: -0.5,
            l2_slope_tol: 0.15,
            grad_slope_target: -1.0,
            grad_slope_tol: 0.2,
            diff_slope_target: -0.75,
            diff_slope_tol: 0.15,
            diff_slope_max: -0.8,
            higher_slope_margin: 0.15,
            rate_fraction: 0.9,
            mean_drift_max: 1e-12,
            sup_bound_factor: 10.0,
            energy_bound_factor: 10.0,
            eig_tol: 1e-10,
            vieta_tol: 1e-12,
            asymptote_tol: 1e-6,
            refinement_tol: 1e-6,
        };
        match experiment {
            Experiment::TwoPeriodic => {
                t.l2_slope_target = -0.25;
                t.l2_slope_tol = 0.1;
                t.grad_slope_target = -0.75;
                t.grad_slope_tol = 0.15;
            }
            Experiment::LinearSplit => {
                t.l2_slope_tol = 0.1;
                t.grad_slope_tol = 0.1;
                t.rate_fraction = 0.95;
            }
            Experiment::ProfileOnly => {
                t.l2_slope_tol = 0.1;
                t.grad_slope_tol = 0.15;
            }
            _ => {}
        }
        t
    }

    fn fields_mut(&mut self) -> [(&'static str, &mut f64); 16] {
        [
            ("l2_slope_target", &mut self.l2_slope_target),
            ("l2_slope_tol", &mut self.l2_slope_tol),
            ("grad_slope_target", &mut self.grad_slope_target),
            ("grad_slope_tol", &mut self.grad_slope_tol),
            ("diff_slope_target", &mut self.diff_slope_target),
            ("diff_slope_tol", &mut self.diff_slope_tol),
            ("diff_slope_max", &mut self.diff_slope_max),
            ("higher_slope_margin", &mut self.higher_slope_margin),
            ("rate_fraction", &mut self.rate_fraction),
            ("mean_drift_max", &mut self.mean_drift_max),
            ("sup_bound_factor", &mut self.sup_bound_factor),
            ("energy_bound_factor", &mut self.energy_bound_factor),
            ("eig_tol", &mut self.eig_tol),
            ("vieta_tol", &mut self.vieta_tol),
            ("asymptote_tol", &mut self.asymptote_tol),
            ("refinement_tol", &mut self.refinement_tol),
        ]
    }

    fn entries(&self) -> Vec<(&'static str, f64)> {
        let mut c = *self;
        c.fields_mut().into_iter().map(|(k, v)| (k, *v)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub ell: usize,
    /// Box length of each open direction.
    pub box_length: f64,
    pub resolution: [usize; 3],
    pub nu1: f64,
    pub nu2: f64,
    pub pressure_law: PressureLaw,
    pub epsilon: f64,
    pub seed: u64,
    pub band: usize,
    pub envelope_width: f64,
    pub dealias: bool,
    pub scheme: Scheme,
    pub dt: Option<f64>,
    /// Defaults to `0.9 T_wrap` when the experiment has open directions.
    pub t_end: Option<f64>,
    /// Squared low-frequency cutoff; defaults to the admissible default.
    pub r0_sq: Option<f64>,
    pub diagnostics_stride: usize,
    pub checkpoint_stride: usize,
    pub fit_start: Option<f64>,
    pub fit_end: Option<f64>,
    /// Sample count for sweeps and semigroup time series.
    pub samples: usize,
    /// Profile-only: repeat the run at doubled open-direction resolution.
    pub refinement_check: bool,
    pub out_dir: PathBuf,
    pub thresholds: Thresholds,
}

const KEYS: [&str; 24] = [
    "experiment",
    "ell",
    "box_length",
    "resolution",
    "nu1",
    "nu2",
    "pressure_law",
    "epsilon",
    "seed",
    "band",
    "envelope_width",
    "dealias",
    "scheme",
    "dt",
    "t_end",
    "r0_sq",
    "diagnostics_stride",
    "checkpoint_stride",
    "fit_start",
    "fit_end",
    "samples",
    "refinement_check",
    "out_dir",
    // accepted for completeness; the periodic length is fixed at 2 pi
    "periodic_length",
];

fn bad(key: &str, value: &str) -> NsasError {
    NsasError::Config(format!("`{key}`: cannot parse `{value}`"))
}

fn num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| bad(key, value))
}

/// Optional numeric key; `auto` leaves it unset.
fn opt_num(key: &str, value: &str) -> Result<Option<f64>> {
    if value.eq_ignore_ascii_case("auto") {
        Ok(None)
    } else {
        num(key, value).map(Some)
    }
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(bad(key, value)),
    }
}

fn parse_resolution(value: &str) -> Result<[usize; 3]> {
    let parts: Vec<&str> = value
        .split([',', 'x', ' '])
        .filter(|s| !s.is_empty())
        .collect();
    if parts.len() != 3 {
        return Err(bad("resolution", value));
    }
    let mut r = [0; 3];
    for (slot, p) in r.iter_mut().zip(parts) {
        *slot = num("resolution", p)?;
    }
    Ok(r)
}

/// Splits config text into an ordered key map. Duplicate keys are errors.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(NsasError::Config(format!(
                "line {}: expected `key = value`",
                n + 1
            )));
        };
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(NsasError::Config(format!("line {}: empty key", n + 1)));
        }
        if map.insert(k.to_string(), v.to_string()).is_some() {
            return Err(NsasError::Config(format!(
                "line {}: duplicate key `{k}`",
                n + 1
            )));
        }
    }
    Ok(map)
}

impl ExperimentConfig {
    /// Shipped defaults for `experiment`; `ell` follows the experiment (1 for
    /// the free-choice ones).
    pub fn defaults(experiment: Experiment) -> Self {
        Self::defaults_with_ell(experiment, experiment.required_ell().unwrap_or(1))
    }

    pub fn defaults_with_ell(experiment: Experiment, ell: usize) -> Self {
        let resolution = match ell {
            1 => [8, 128, 128],
            2 => [8, 8, 1024],
            _ => [32, 32, 32],
        };
        ExperimentConfig {
            experiment,
            ell,
            box_length: if ell == 2 {
                400.0 * std::f64::consts::PI
            } else {
                100.0 * std::f64::consts::PI
            },
            resolution,
            nu1: 3.0,
            nu2: 3.0,
            pressure_law: PressureLaw::Quadratic,
            epsilon: 1e-2,
            seed: 1,
            band: 1,
            envelope_width: 6.0,
            dealias: true,
            scheme: Scheme::EtdRk2,
            dt: None,
            t_end: None,
            r0_sq: None,
            diagnostics_stride: 4,
            checkpoint_stride: 0,
            fit_start: None,
            fit_end: None,
            samples: 200,
            refinement_check: false,
            out_dir: PathBuf::from(format!("out/{experiment}")),
            thresholds: Thresholds::defaults_for(experiment, ell),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut map = parse_pairs(text)?;
        let experiment: Experiment = map
            .remove("experiment")
            .ok_or_else(|| NsasError::Config("missing key `experiment`".into()))?
            .parse()?;
        let ell = match map.remove("ell") {
            Some(v) => num::<usize>("ell", &v)?,
            None => experiment.required_ell().unwrap_or(1),
        };
        if !(1..=3).contains(&ell) {
            return Err(NsasError::Config(format!("ell = {ell} not in 1..=3")));
        }
        let mut cfg = Self::defaults_with_ell(experiment, ell);
        let mut thresholds = cfg.thresholds;
        for (k, v) in &map {
            let v = v.as_str();
            match k.as_str() {
                "box_length" => cfg.box_length = num(k, v)?,
                "resolution" => cfg.resolution = parse_resolution(v)?,
                "nu1" => cfg.nu1 = num(k, v)?,
                "nu2" => cfg.nu2 = num(k, v)?,
                "pressure_law" => cfg.pressure_law = PressureLaw::parse(v)?,
                "epsilon" => cfg.epsilon = num(k, v)?,
                "seed" => cfg.seed = num(k, v)?,
                "band" => cfg.band = num(k, v)?,
                "envelope_width" => cfg.envelope_width = num(k, v)?,
                "dealias" => cfg.dealias = parse_bool(k, v)?,
                "scheme" => cfg.scheme = v.parse()?,
                "dt" => cfg.dt = opt_num(k, v)?,
                "t_end" => cfg.t_end = opt_num(k, v)?,
                "r0_sq" => cfg.r0_sq = opt_num(k, v)?,
                "diagnostics_stride" => cfg.diagnostics_stride = num(k, v)?,
                "checkpoint_stride" => cfg.checkpoint_stride = num(k, v)?,
                "fit_start" => cfg.fit_start = opt_num(k, v)?,
                "fit_end" => cfg.fit_end = opt_num(k, v)?,
                "samples" => cfg.samples = num(k, v)?,
                "refinement_check" => cfg.refinement_check = parse_bool(k, v)?,
                "out_dir" => cfg.out_dir = PathBuf::from(v),
                "periodic_length" => {
                    let l: f64 = num(k, v)?;
                    if (l - 2.0 * std::f64::consts::PI).abs() > 1e-12 {
                        return Err(NsasError::Config("periodic_length must be 2 pi".into()));
                    }
                }
                other => {
                    let slot = thresholds
                        .fields_mut()
                        .into_iter()
                        .find(|(name, _)| *name == other)
                        .map(|(_, s)| s);
                    match slot {
                        Some(s) => *s = num(other, v)?,
                        None => return Err(NsasError::Config(format!("unknown key `{other}`"))),
                    }
                }
            }
        }
        cfg.thresholds = thresholds;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let err = |m: String| Err(NsasError::Config(m));
        if let Some(req) = self.experiment.required_ell() {
            if self.ell != req {
                return err(format!(
                    "{} requires ell = {req}, got {}",
                    self.experiment, self.ell
                ));
            }
        }
        if self.experiment == Experiment::ProfileOnly && !(1..=2).contains(&self.ell) {
            return err(format!("profile_only needs ell = 1 or 2, got {}", self.ell));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return err(format!("epsilon = {} must be positive", self.epsilon));
        }
        if !(self.envelope_width > 0.0) {
            return err("envelope_width must be positive".into());
        }
        if self.diagnostics_stride == 0 {
            return err("diagnostics_stride must be >= 1".into());
        }
        if self.samples < 2 {
            return err("samples must be >= 2".into());
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0) {
                return err(format!("dt = {dt} must be positive"));
            }
        }
        if let Some(t) = self.t_end {
            if !(t >= 0.0) {
                return err(format!("t_end = {t} must be >= 0"));
            }
        }
        if let (Some(a), Some(b)) = (self.fit_start, self.fit_end) {
            if !(a < b) {
                return err(format!("fit window [{a}, {b}] is empty"));
            }
        }
        let th = self.thresholds.entries();
        if let Some((k, v)) = th.iter().find(|(_, v)| !v.is_finite()) {
            return err(format!("threshold `{k}` = {v} is not finite"));
        }
        self.domain()
            .map_err(|e| NsasError::Config(e.to_string()))?;
        self.params()
            .map_err(|e| NsasError::Config(e.to_string()))?;
        Ok(())
    }

    pub fn domain(&self) -> Result<DomainSpec> {
        DomainSpec::new(self.ell, self.box_length, self.resolution)
    }

    pub fn params(&self) -> Result<FluidParams> {
        FluidParams::new(self.nu1, self.nu2, self.pressure_law)
    }

    pub fn initial_data(&self) -> InitialDataSpec {
        InitialDataSpec {
            seed: self.seed,
            epsilon: self.epsilon,
            band: self.band,
            envelope_width: self.envelope_width,
            dealias: self.dealias,
        }
    }

    /// `t_end`, defaulting to `0.9 T_wrap` (or 20 on the full torus).
    pub fn horizon(&self) -> Result<f64> {
        if let Some(t) = self.t_end {
            return Ok(t);
        }
        let d = self.domain()?;
        Ok(if d.ell == 3 {
            20.0
        } else {
            0.9 * d.wrap_horizon(self.params()?.gamma)
        })
    }

    pub fn solver_config(&self) -> Result<SolverConfig> {
        Ok(SolverConfig {
            dt: self.dt,
            t_end: self.horizon()?,
            dealias: self.dealias,
            scheme: self.scheme,
            checkpoint_stride: self.checkpoint_stride,
            diagnostics_stride: self.diagnostics_stride,
        })
    }

    /// Every resolved key in sorted order, one `key = value` per line. Two
    /// configs with the same canonical text describe the same experiment.
    pub fn canonical_text(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_else(|| "auto".into());
        let mut m: BTreeMap<&str, String> = BTreeMap::new();
        m.insert("experiment", self.experiment.to_string());
        m.insert("ell", self.ell.to_string());
        m.insert("box_length", format!("{:e}", self.box_length));
        m.insert(
            "resolution",
            format!(
                "{},{},{}",
                self.resolution[0], self.resolution[1], self.resolution[2]
            ),
        );
        m.insert("nu1", format!("{:e}", self.nu1));
        m.insert("nu2", format!("{:e}", self.nu2));
        m.insert("pressure_law", self.pressure_law.to_string());
        m.insert("epsilon", format!("{:e}", self.epsilon));
        m.insert("seed", self.seed.to_string());
        m.insert("band", self.band.to_string());
        m.insert("envelope_width", format!("{:e}", self.envelope_width));
        m.insert("dealias", self.dealias.to_string());
        m.insert("scheme", self.scheme.to_string());
        m.insert("dt", opt(self.dt));
        m.insert("t_end", opt(self.t_end));
        m.insert("r0_sq", opt(self.r0_sq));
        m.insert("diagnostics_stride", self.diagnostics_stride.to_string());
        m.insert("checkpoint_stride", self.checkpoint_stride.to_string());
        m.insert("fit_start", opt(self.fit_start));
        m.insert("fit_end", opt(self.fit_end));
        m.insert("samples", self.samples.to_string());
        m.insert("refinement_check", self.refinement_check.to_string());
        for (k, v) in self.thresholds.entries() {
            m.insert(k, format!("{v:e}"));
        }
        // out_dir is deliberately left out: it does not change results
        m.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

/// Names of all accepted keys, thresholds included.
pub fn known_keys() -> Vec<&'static str> {
    let mut k: Vec<&str> = KEYS.to_vec();
    let mut t = Thresholds::defaults(Experiment::OnePeriodic);
    k.extend(t.fields_mut().into_iter().map(|(n, _)| n));
    k
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_with_comments_and_overrides() {
        let text = "# one periodic axis\nexperiment = theorem1\nell = 1  # periodic axes\nresolution = 8x64x64\nnu1 = 2\nnu2=2\nseed = 7\nl2_slope_tol = 0.3\ndealias = false\n";
        let c = ExperimentConfig::parse(text).unwrap();
        assert_eq!(c.experiment, Experiment::OnePeriodic);
        assert_eq!(c.resolution, [8, 64, 64]);
        assert_eq!((c.nu1, c.nu2, c.seed), (2.0, 2.0, 7));
        assert_eq!(c.thresholds.l2_slope_tol, 0.3);
        assert_eq!(c.thresholds.grad_slope_tol, 0.2);
        assert!(!c.dealias);
    }

    #[test]
    fn rejects_inconsistent_ell() {
        let e = ExperimentConfig::parse("experiment = theorem1\nell = 2\n").unwrap_err();
        assert!(matches!(e, NsasError::Config(_)), "{e}");
    }

    #[test]
    fn rejects_unknown_and_duplicate_keys() {
        assert!(ExperimentConfig::parse("experiment = theorem3\nfoo = 1\n").is_err());
        assert!(ExperimentConfig::parse("experiment = theorem3\nseed = 1\nseed = 2\n").is_err());
        assert!(ExperimentConfig::parse("seed = 1\n").is_err());
        assert!(ExperimentConfig::parse("experiment = theorem3\nseed\n").is_err());
        assert!(ExperimentConfig::parse("experiment = theorem3\nnu1 = -1\n").is_err());
        assert!(ExperimentConfig::parse("experiment = theorem3\nresolution = 6,8,8\n").is_err());
    }

    #[test]
    fn canonical_text_round_trips() {
        let c = ExperimentConfig::parse("experiment = theorem2\nepsilon = 0.005\nfit_start = 12\n")
            .unwrap();
        let again = ExperimentConfig::parse(&c.canonical_text()).unwrap();
        assert_eq!(again.canonical_text(), c.canonical_text());
        assert_eq!(again.epsilon, 0.005);
        assert_eq!(again.thresholds, c.thresholds);
    }

    #[test]
    fn defaults_follow_experiment() {
        let c = ExperimentConfig::defaults(Experiment::TwoPeriodic);
        assert_eq!(c.ell, 2);
        assert_eq!(c.thresholds.l2_slope_target, -0.25);
        let h = c.horizon().unwrap();
        let d = c.domain().unwrap();
        assert!((h - 0.9 * d.wrap_horizon(c.params().unwrap().gamma)).abs() < 1e-12);
        assert_eq!(
            ExperimentConfig::defaults(Experiment::FullTorus)
                .horizon()
                .unwrap(),
            20.0
        );
        assert!(known_keys().contains(&"rate_fraction"));
    }
}
