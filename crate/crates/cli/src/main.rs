use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use nsas::diagnostics::{fit_decay, DecayModel, DecaySeries, SeriesTable};
use nsas::domain::FrequencyVector;
use nsas::harness::{
    configure_threads, report, run_experiment, simulate, simulate_profile, ExperimentConfig,
};
use nsas::linear::{assemble_symbol, eigenvalues4, spectral_gap, symbol_eigenvalues};
use nsas::{FluidParams, PressureLaw};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "nsas",
    version,
    about = "Compressible Navier-Stokes decay experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalues of the linear symbol, and optionally the spectral gap.
    AnalyzeSymbol {
        #[arg(long, default_value_t = 1.0)]
        nu1: f64,
        #[arg(long, default_value_t = 1.0)]
        nu2: f64,
        #[arg(long, default_value = "quadratic")]
        pressure_law: String,
        /// |q|^2 values to evaluate.
        #[arg(long, value_delimiter = ',')]
        p: Vec<f64>,
        /// A full frequency `q1,q2,q3` to cross-check against a dense eigensolve.
        #[arg(long, value_delimiter = ',')]
        q: Option<Vec<f64>>,
        /// Squared low-frequency cutoff for the gap.
        #[arg(long)]
        r0_sq: Option<f64>,
    },
    /// Solver run with diagnostics; writes series.csv and stamp.txt.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Profile system run; writes series.csv and stamp.txt.
    Profile {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Fit a decay model to one column of a series file.
    Fit {
        #[arg(long)]
        series: PathBuf,
        #[arg(long)]
        column: String,
        #[arg(long, default_value = "power")]
        model: String,
        #[arg(long)]
        start: Option<f64>,
        #[arg(long)]
        end: Option<f64>,
    },
    /// Plot and summarize an output directory.
    Report {
        #[arg(long)]
        dir: PathBuf,
    },
    /// Run an experiment and write its verdict; the exit code is 0 on PASS,
    /// 1 on FAIL and 2 on ERROR.
    RunExperiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

fn load(path: &Path, out_dir: Option<PathBuf>) -> Result<ExperimentConfig> {
    let mut cfg =
        ExperimentConfig::load(path).with_context(|| format!("reading {}", path.display()))?;
    if let Some(d) = out_dir {
        cfg.out_dir = d;
    }
    Ok(cfg)
}

fn analyze(
    nu1: f64,
    nu2: f64,
    law: &str,
    ps: &[f64],
    q: Option<Vec<f64>>,
    r0_sq: Option<f64>,
) -> Result<()> {
    let params = FluidParams::new(nu1, nu2, PressureLaw::parse(law)?)?;
    println!("gamma = {} alpha = {}", params.gamma, params.alpha);
    for &p in ps {
        let e = symbol_eigenvalues(p, &params)?;
        println!(
            "p = {p:e}: lambda1 = {} lambda+ = {} lambda- = {}",
            e.lambda1, e.lambda_plus, e.lambda_minus
        );
    }
    if let Some(q) = q {
        if q.len() != 3 {
            bail!("--q needs three components, got {}", q.len());
        }
        let f = FrequencyVector::new(3, [q[0], q[1], q[2]]);
        let s = assemble_symbol(f, &params);
        let closed = symbol_eigenvalues(f.p(), &params)?;
        let numeric = eigenvalues4(&s.entries);
        println!("q = {q:?}: closed {:?}", closed.as_array());
        println!("q = {q:?}: numeric {numeric:?}");
    }
    if let Some(r) = r0_sq {
        println!("gap(r0^2 = {r}) = {}", spectral_gap(r, &params)?);
    }
    Ok(())
}

fn fit(
    series: &Path,
    column: &str,
    model: &str,
    start: Option<f64>,
    end: Option<f64>,
) -> Result<()> {
    let table = SeriesTable::load(series)?;
    let (t, y) = table.column(column)?;
    let s = DecaySeries::new(&t, &y, column)?;
    let (Some(&first), Some(&last)) = (s.times.first(), s.times.last()) else {
        bail!("column `{column}` has no usable samples");
    };
    let model: DecayModel = model.parse()?;
    let f = fit_decay(&s, model, (start.unwrap_or(first), end.unwrap_or(last)))?;
    println!(
        "{column}: model = {} exponent_or_rate = {:.6} amplitude = {:.6e} residual_rms = {:.3e} window = [{}, {}] samples = {}",
        f.model, f.exponent_or_rate, f.amplitude, f.residual_rms, f.window.0, f.window.1, f.samples
    );
    Ok(())
}

fn dispatch(cmd: Command) -> Result<ExitCode> {
    match cmd {
        Command::AnalyzeSymbol {
            nu1,
            nu2,
            pressure_law,
            p,
            q,
            r0_sq,
        } => analyze(nu1, nu2, &pressure_law, &p, q, r0_sq)?,
        Command::Simulate { config, out_dir } => {
            let cfg = load(&config, out_dir)?;
            let t = simulate(&cfg)?;
            println!(
                "{} samples written to {}",
                t.rows.len(),
                cfg.out_dir.display()
            );
        }
        Command::Profile { config, out_dir } => {
            let cfg = load(&config, out_dir)?;
            let t = simulate_profile(&cfg)?;
            println!(
                "{} samples written to {}",
                t.rows.len(),
                cfg.out_dir.display()
            );
        }
        Command::Fit {
            series,
            column,
            model,
            start,
            end,
        } => fit(&series, &column, &model, start, end)?,
        Command::Report { dir } => {
            for p in report(&dir)? {
                println!("{}", p.display());
            }
        }
        Command::RunExperiment { config, out_dir } => {
            let cfg = load(&config, out_dir)?;
            let v = run_experiment(&cfg);
            print!("{}", v.to_text());
            return Ok(ExitCode::from(v.status.exit_code() as u8));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
