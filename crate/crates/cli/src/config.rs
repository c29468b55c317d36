//! Experiment configuration: a JSON file, overridden by command-line flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};

use hidden_parity::{Grid, NamedPotential, OmegaBranch, Potential, SuiteOptions, Tolerances};

use crate::CliError;

pub const DEFAULT_X_MIN: f64 = -10.0;
pub const DEFAULT_X_MAX: f64 = 10.0;
pub const DEFAULT_N: usize = 999;

/// `M` or `"full"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Truncate {
    Full,
    Modes(usize),
}

impl std::str::FromStr for Truncate {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "full" {
            return Ok(Truncate::Full);
        }
        match s.parse::<usize>() {
            Ok(0) | Err(_) => Err(format!("truncation must be 'full' or a positive integer, got '{s}'")),
            Ok(m) => Ok(Truncate::Modes(m)),
        }
    }
}

impl Truncate {
    pub fn modes(self) -> Option<usize> {
        match self {
            Truncate::Full => None,
            Truncate::Modes(m) => Some(m),
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(untagged)]
enum TruncateField {
    Modes(usize),
    Word(String),
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub x_min: Option<f64>,
    pub x_max: Option<f64>,
    pub n: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteSection {
    pub omega_branch: Option<OmegaBranch>,
    truncate: Option<TruncateField>,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub n_values: Option<Vec<usize>>,
    pub h_values: Option<Vec<f64>>,
}

/// On-disk experiment file.
///
/// ```json
/// {
///   "potential": {"named": "quartic_cubic"},
///   "grid": {"x_min": -10, "x_max": 10, "n": 999},
///   "suite": {"omega_branch": "+", "truncate": "full", "tolerances": {"involution": 1e-10}},
///   "sweep": {"n_values": [199, 399, 799]},
///   "out": "results",
///   "jobs": 4
/// }
/// ```
#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub potential: Option<Potential>,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub suite: SuiteSection,
    #[serde(default)]
    pub sweep: SweepSection,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("bad config {}: {e}", path.display())))
    }
}

/// Flags shared by every subcommand. Anything given here overrides the file.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// JSON experiment file
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Built-in potential: harmonic, quartic, quartic_cubic
    #[arg(long, value_name = "NAME", conflicts_with = "poly")]
    pub potential: Option<String>,

    /// Polynomial coefficients c0,c1,... of V(x) = Σ c_k x^k
    #[arg(long, value_name = "C0,C1,...", value_delimiter = ',', allow_negative_numbers = true)]
    pub poly: Option<Vec<f64>>,

    #[arg(long, allow_negative_numbers = true)]
    pub xmin: Option<f64>,

    #[arg(long, allow_negative_numbers = true)]
    pub xmax: Option<f64>,

    /// Interior grid points
    #[arg(long, allow_negative_numbers = true)]
    pub n: Option<i64>,

    /// Modes kept in the parity/triparity sums: M or "full"
    #[arg(long, value_name = "M|full")]
    pub truncate: Option<Truncate>,

    /// Triparity branch ω = exp(±2πi/3)
    #[arg(long, value_name = "+|-", allow_hyphen_values = true)]
    pub omega_branch: Option<OmegaBranch>,

    /// Tolerance override, repeatable: --tol involution=1e-12
    #[arg(long = "tol", value_name = "CHECK=VALUE")]
    pub tol: Vec<String>,

    /// Output directory
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Parallel sweep points
    #[arg(long)]
    pub jobs: Option<usize>,
}

/// Fully resolved settings for one run.
#[derive(Debug, Clone)]
pub struct Settings {
    pub potential: Potential,
    pub grid: Grid,
    pub suite: SuiteOptions,
    pub sweep_n: Option<Vec<usize>>,
    pub sweep_h: Option<Vec<f64>>,
    pub out: PathBuf,
    pub jobs: usize,
}

impl CommonArgs {
    pub fn resolve(&self) -> Result<Settings, CliError> {
        let file = match &self.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };

        let potential = if let Some(name) = &self.potential {
            NamedPotential::from_name(name)
                .map(Potential::named)
                .ok_or_else(|| CliError::Config(format!("unknown potential '{name}'")))?
        } else if let Some(coeffs) = &self.poly {
            Potential::polynomial(coeffs.clone()).map_err(|e| CliError::Config(e.to_string()))?
        } else {
            file.potential
                .clone()
                .ok_or_else(|| CliError::Config("no potential given (--potential, --poly or config)".into()))?
        };

        let x_min = self.xmin.or(file.grid.x_min).unwrap_or(DEFAULT_X_MIN);
        let x_max = self.xmax.or(file.grid.x_max).unwrap_or(DEFAULT_X_MAX);
        let n = match self.n {
            Some(n) if n < 0 => return Err(CliError::Config(format!("--n must be positive, got {n}"))),
            Some(n) => n as usize,
            None => file.grid.n.unwrap_or(DEFAULT_N),
        };
        let grid = Grid::new(x_min, x_max, n).map_err(|e| CliError::Config(e.to_string()))?;

        let mut tolerances = Tolerances::default();
        for (k, v) in &file.suite.tolerances {
            tolerances.set(k, *v).map_err(CliError::Config)?;
        }
        for item in &self.tol {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("--tol expects CHECK=VALUE, got '{item}'")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| CliError::Config(format!("bad tolerance value in '{item}'")))?;
            tolerances.set(k.trim(), v).map_err(CliError::Config)?;
        }

        let file_truncate = match &file.suite.truncate {
            None => None,
            Some(TruncateField::Modes(0)) => {
                return Err(CliError::Config("truncate must be positive".into()))
            }
            Some(TruncateField::Modes(m)) => Some(Truncate::Modes(*m)),
            Some(TruncateField::Word(w)) => Some(w.parse().map_err(CliError::Config)?),
        };
        let truncation = self.truncate.or(file_truncate).and_then(Truncate::modes);
        if let Some(m) = truncation {
            if m > n {
                return Err(CliError::Config(format!("truncation {m} exceeds grid size {n}")));
            }
        }

        let suite = SuiteOptions {
            omega_branch: self.omega_branch.or(file.suite.omega_branch).unwrap_or_default(),
            truncation,
            tolerances,
            ..SuiteOptions::default()
        };

        let jobs = self.jobs.or(file.jobs).unwrap_or(1);
        if jobs == 0 {
            return Err(CliError::Config("--jobs must be at least 1".into()));
        }

        let out = self.out.clone().or(file.out).unwrap_or_else(|| PathBuf::from("."));
        std::fs::create_dir_all(&out)
            .map_err(|e| CliError::Config(format!("output directory {}: {e}", out.display())))?;
        let probe = out.join(".hparity-write-test");
        std::fs::write(&probe, b"")
            .and_then(|_| std::fs::remove_file(&probe))
            .map_err(|e| CliError::Config(format!("output directory {} not writable: {e}", out.display())))?;

        Ok(Settings {
            potential,
            grid,
            suite,
            sweep_n: file.sweep.n_values,
            sweep_h: file.sweep.h_values,
            out,
            jobs,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truncate_parsing() {
        assert_eq!("full".parse::<Truncate>().unwrap(), Truncate::Full);
        assert_eq!("50".parse::<Truncate>().unwrap(), Truncate::Modes(50));
        assert!("0".parse::<Truncate>().is_err());
        assert!("half".parse::<Truncate>().is_err());
    }

    #[test]
    fn file_config_parses() {
        let cfg: FileConfig = serde_json::from_str(
            r#"{
                "potential": {"poly": [0, 0, 1]},
                "grid": {"x_min": -8, "x_max": 8, "n": 199},
                "suite": {"omega_branch": "-", "truncate": 40, "tolerances": {"involution": 1e-9}},
                "sweep": {"h_values": [0.08, 0.04, 0.02]},
                "jobs": 2
            }"#,
        )
        .unwrap();
        assert!(cfg.potential.unwrap().is_harmonic());
        assert_eq!(cfg.grid.n, Some(199));
        assert_eq!(cfg.suite.omega_branch, Some(OmegaBranch::Minus));
        assert_eq!(cfg.jobs, Some(2));

        assert!(serde_json::from_str::<FileConfig>(r#"{"potentail": {"named": "harmonic"}}"#).is_err());
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        std::fs::write(
            &path,
            r#"{"potential": {"named": "quartic"}, "grid": {"x_min": -5, "x_max": 5, "n": 50}}"#,
        )
        .unwrap();
        let args = CommonArgs {
            config: Some(path),
            n: Some(80),
            out: Some(dir.path().join("out")),
            tol: vec!["commutator=1e-9".into()],
            ..CommonArgs::default()
        };
        let s = args.resolve().unwrap();
        assert_eq!(s.potential, Potential::quartic());
        assert_eq!(s.grid.len(), 80);
        assert_eq!(s.grid.x_min(), -5.0);
        assert_eq!(s.suite.tolerances.get("commutator"), 1e-9);
        assert!(dir.path().join("out").is_dir());
    }

    #[test]
    fn bad_tolerance_is_config_error() {
        let dir = tempfile::tempdir().unwrap();
        let args = CommonArgs {
            potential: Some("harmonic".into()),
            n: Some(20),
            out: Some(dir.path().to_path_buf()),
            tol: vec!["involution=-1".into()],
            ..CommonArgs::default()
        };
        assert!(matches!(args.resolve(), Err(CliError::Config(_))));
    }
}
