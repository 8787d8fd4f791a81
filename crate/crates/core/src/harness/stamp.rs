//! Reproducibility metadata written next to every experiment's outputs.

use super::config::ExperimentConfig;
use crate::error::Result;
use sha2::{Digest, Sha256};
use std::path::Path;
use std::time::Duration;

pub const BUILD_ID: &str = concat!("nsas-core ", env!("CARGO_PKG_VERSION"));

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "NSAS_THREADS";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stamp {
    pub config_sha256: String,
    pub seed: u64,
    pub build: String,
    pub threads: usize,
    pub wall_time_s: f64,
    /// Hash of the written `series.csv`, when there is one.
    pub series_sha256: Option<String>,
}

impl Stamp {
    pub fn to_text(&self) -> String {
        let mut s = format!(
            "config_sha256 = {}\nseed = {}\nbuild = {}\nthreads = {}\nwall_time_s = {:.3}\n",
            self.config_sha256, self.seed, self.build, self.threads, self.wall_time_s
        );
        if let Some(h) = &self.series_sha256 {
            s += &format!("series_sha256 = {h}\n");
        }
        s
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}

pub fn reproducibility_stamp(
    cfg: &ExperimentConfig,
    series: Option<&[u8]>,
    wall: Duration,
) -> Stamp {
    Stamp {
        config_sha256: sha256_hex(cfg.canonical_text().as_bytes()),
        seed: cfg.seed,
        build: BUILD_ID.to_string(),
        threads: rayon::current_num_threads(),
        wall_time_s: wall.as_secs_f64(),
        series_sha256: series.map(sha256_hex),
    }
}

/// Installs a global pool of `NSAS_THREADS` workers when the variable is
/// set. Returns the thread count in effect.
pub fn configure_threads() -> Result<usize> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v.trim().parse().map_err(|_| {
            crate::error::NsasError::Config(format!("{THREADS_ENV} = `{v}` is not a count"))
        })?;
        if n == 0 {
            return Err(crate::error::NsasError::Config(format!(
                "{THREADS_ENV} must be >= 1"
            )));
        }
        // a pool installed earlier in the process wins
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    Ok(rayon::current_num_threads())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::Experiment;

    #[test]
    fn known_digest() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn stamp_depends_on_config_not_out_dir() {
        let mut a = ExperimentConfig::defaults(Experiment::SymbolSweep);
        let s1 = reproducibility_stamp(&a, Some(b"x"), Duration::from_millis(5));
        a.out_dir = "elsewhere".into();
        let s2 = reproducibility_stamp(&a, Some(b"x"), Duration::from_millis(9));
        assert_eq!(s1.config_sha256, s2.config_sha256);
        assert_eq!(s1.series_sha256, s2.series_sha256);
        a.seed += 1;
        let s3 = reproducibility_stamp(&a, Some(b"y"), Duration::ZERO);
        assert_ne!(s1.config_sha256, s3.config_sha256);
        assert_ne!(s1.series_sha256, s3.series_sha256);
        assert!(s3.to_text().contains("seed = 2\n"));
    }
}
