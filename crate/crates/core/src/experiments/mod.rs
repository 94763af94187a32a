//! Named, reproducible experiments writing CSV artifacts.
//!
//! Every artifact starts with two `#` comment lines: the first records the
//! code version and the full configuration, the second a timestamp. Apart
//! from the timestamp line, re-running an experiment with the same
//! configuration produces byte-identical files.

mod gauss_ranks;
mod grid_transform;
mod quadratic;
pub mod setup;
mod svd_cross;

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use crate::error::Error;
use crate::gridtransform::SquareRootKind;
use crate::linalg::Matrix;
use crate::matdecomp::{fmt_f64, write_matrix_csv, PivotMode};

pub use gauss_ranks::{gauss_case, hadamard_demo, run_gauss_ranks, GaussCase, HadamardDemo};
pub use grid_transform::{
    radar_spectra, run_grid_transform, PlateauReport, NOISE_INDEX, NOISE_MIN_RATIO, PLATEAU_BAND,
    PLATEAU_LEN,
};
pub use quadratic::run_quadratic;
pub use svd_cross::run_svd_cross;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    SvdCross,
    Quadratic,
    GaussRanks,
    GridTransform,
}

impl Experiment {
    pub const ALL: [Experiment; 4] = [
        Experiment::SvdCross,
        Experiment::Quadratic,
        Experiment::GaussRanks,
        Experiment::GridTransform,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Experiment::SvdCross => "svd-cross",
            Experiment::Quadratic => "quadratic",
            Experiment::GaussRanks => "gauss-ranks",
            Experiment::GridTransform => "grid-transform",
        }
    }

    /// Keys accepted by `--set`.
    pub fn override_keys(&self) -> &'static [&'static str] {
        match self {
            Experiment::SvdCross => &["max_rank"],
            Experiment::Quadratic => &["points"],
            Experiment::GaussRanks => &["correlation"],
            Experiment::GridTransform => &["map", "target_step", "target_half_width"],
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, ExperimentError> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| ExperimentError::Config(format!("unknown experiment '{s}'")))
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Run(#[from] Error),
}

impl ExperimentError {
    /// 1 for configuration errors, 2 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            ExperimentError::Config(_) => 1,
            ExperimentError::Run(_) => 2,
        }
    }
}

impl From<std::io::Error> for ExperimentError {
    fn from(e: std::io::Error) -> Self {
        ExperimentError::Run(Error::Io(e))
    }
}

impl From<csv::Error> for ExperimentError {
    fn from(e: csv::Error) -> Self {
        ExperimentError::Run(Error::Csv(e))
    }
}

pub type ExperimentResult<T> = std::result::Result<T, ExperimentError>;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub eps: f64,
    /// Source grid spacing; experiment default when absent.
    pub grid_step: Option<f64>,
    /// Restricts grid-transform to one square root.
    pub root: Option<SquareRootKind>,
    /// Cross pivoting for svd-cross; full pivoting when absent.
    pub pivot: Option<PivotMode>,
    pub overrides: BTreeMap<String, String>,
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment, out_dir: impl Into<PathBuf>) -> Self {
        ExperimentConfig {
            experiment,
            out_dir: out_dir.into(),
            seed: 0,
            eps: 1e-5,
            grid_step: None,
            root: None,
            pivot: None,
            overrides: BTreeMap::new(),
        }
    }

    /// Parses `KEY=VALUE`.
    pub fn add_override(&mut self, kv: &str) -> ExperimentResult<()> {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| ExperimentError::Config(format!("override '{kv}' is not KEY=VALUE")))?;
        self.overrides
            .insert(k.trim().to_string(), v.trim().to_string());
        Ok(())
    }

    /// Checks everything that does not need computation.
    pub fn validate(&self) -> ExperimentResult<()> {
        let config = |m: String| Err(ExperimentError::Config(m));
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return config(format!("eps {} outside (0, 1)", self.eps));
        }
        if let Some(step) = self.grid_step {
            if self.experiment == Experiment::Quadratic {
                return config("--grid-step has no effect on quadratic".into());
            }
            if !(step > 0.0 && step.is_finite()) {
                return config(format!("grid step {step} must be positive"));
            }
        }
        if self.root.is_some() && self.experiment != Experiment::GridTransform {
            return config("--root only applies to grid-transform".into());
        }
        if self.pivot.is_some() && self.experiment != Experiment::SvdCross {
            return config("--pivot only applies to svd-cross".into());
        }
        let allowed = self.experiment.override_keys();
        if let Some(k) = self
            .overrides
            .keys()
            .find(|k| !allowed.contains(&k.as_str()))
        {
            return config(format!(
                "unknown key '{k}' for {} (allowed: {})",
                self.experiment,
                allowed.join(", ")
            ));
        }
        Ok(())
    }

    pub(crate) fn override_parsed<T: FromStr>(&self, key: &str, default: T) -> ExperimentResult<T> {
        match self.overrides.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| ExperimentError::Config(format!("invalid value '{v}' for {key}"))),
        }
    }

    pub(crate) fn step_or(&self, default: f64) -> f64 {
        self.grid_step.unwrap_or(default)
    }

    /// Single-line description used in artifact headers.
    pub fn describe(&self) -> String {
        let overrides: Vec<String> = self
            .overrides
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        format!(
            "ttdensity {VERSION} experiment={} seed={} eps={:e} grid_step={} root={} pivot={} overrides=[{}]",
            self.experiment,
            self.seed,
            self.eps,
            self.grid_step.map_or("default".to_string(), |s| s.to_string()),
            self.root.map_or("all", |r| r.name()),
            self.pivot.unwrap_or_default().name(),
            overrides.join(";")
        )
    }
}

/// Validates the configuration, then runs the experiment.
/// Returns the written artifact paths.
pub fn run(cfg: &ExperimentConfig) -> ExperimentResult<Vec<PathBuf>> {
    cfg.validate()?;
    match cfg.experiment {
        Experiment::SvdCross => run_svd_cross(cfg),
        Experiment::Quadratic => run_quadratic(cfg),
        Experiment::GaussRanks => run_gauss_ranks(cfg),
        Experiment::GridTransform => run_grid_transform(cfg),
    }
}

/// Writes artifact files into one experiment directory.
pub(crate) struct Artifacts {
    dir: PathBuf,
    header: String,
    written: Vec<PathBuf>,
}

impl Artifacts {
    pub(crate) fn create(cfg: &ExperimentConfig) -> ExperimentResult<Self> {
        let dir = cfg.out_dir.join(cfg.experiment.name());
        fs::create_dir_all(&dir)?;
        let stamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let header = format!("# {}\n# generated_unix={stamp}\n", cfg.describe());
        Ok(Artifacts {
            dir,
            header,
            written: Vec::new(),
        })
    }

    fn open(&mut self, name: &str) -> ExperimentResult<fs::File> {
        let path = self.dir.join(name);
        let mut f = fs::File::create(&path)?;
        f.write_all(self.header.as_bytes())?;
        self.written.push(path);
        Ok(f)
    }

    pub(crate) fn csv(
        &mut self,
        name: &str,
        columns: &[&str],
        rows: &[Vec<String>],
    ) -> ExperimentResult<()> {
        let f = self.open(name)?;
        let mut w = csv::Writer::from_writer(f);
        w.write_record(columns)?;
        for row in rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub(crate) fn matrix(&mut self, name: &str, m: &Matrix) -> ExperimentResult<()> {
        let f = self.open(name)?;
        write_matrix_csv(f, m)?;
        Ok(())
    }

    pub(crate) fn text(&mut self, name: &str, body: &str) -> ExperimentResult<()> {
        let mut f = self.open(name)?;
        f.write_all(body.as_bytes())?;
        Ok(())
    }

    pub(crate) fn dir(&self) -> &Path {
        &self.dir
    }

    pub(crate) fn finish(self) -> Vec<PathBuf> {
        self.written
    }
}

pub(crate) fn num(v: f64) -> String {
    fmt_f64(v)
}

pub(crate) fn ranks_text(r: &[usize]) -> String {
    let parts: Vec<String> = r.iter().map(|v| v.to_string()).collect();
    format!("[{}]", parts.join(","))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for e in Experiment::ALL {
            assert_eq!(e.name().parse::<Experiment>().unwrap(), e);
        }
        let err = "svd".parse::<Experiment>().unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn validation() {
        let mut cfg = ExperimentConfig::new(Experiment::GridTransform, "out");
        cfg.add_override("map=identity").unwrap();
        assert!(cfg.validate().is_ok());
        cfg.add_override("bogus=1").unwrap();
        assert!(matches!(cfg.validate(), Err(ExperimentError::Config(_))));
        assert!(cfg.add_override("novalue").is_err());

        let mut q = ExperimentConfig::new(Experiment::Quadratic, "out");
        q.grid_step = Some(0.1);
        assert!(q.validate().is_err());
        q.grid_step = None;
        q.root = Some(SquareRootKind::Eigen);
        assert!(q.validate().is_err());
        q.root = None;
        q.eps = 0.0;
        assert!(q.validate().is_err());
    }

    #[test]
    fn description_is_stable() {
        let mut cfg = ExperimentConfig::new(Experiment::SvdCross, "x");
        cfg.add_override("max_rank=3").unwrap();
        assert_eq!(
            cfg.describe(),
            format!(
                "ttdensity {VERSION} experiment=svd-cross seed=0 eps=1e-5 grid_step=default root=all pivot=full overrides=[max_rank=3]"
            )
        );
        assert_eq!(ranks_text(&[1, 10, 55, 10, 1]), "[1,10,55,10,1]");
    }
}
