//! JSON experiment descriptions.
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "seed": 7,
//!   "problem": { "generator": "gaussian", "n": 600, "p": 2000,
//!                "sparsity": 0.1, "noise_variance": 1e-10 },
//!   "penalty": { "kind": "l1" },
//!   "lambda": 1.0,
//!   "budget": { "max_iters": 500 },
//!   "solvers": [
//!     { "name": "vamp" },
//!     { "name": "prs", "rho": 0.1, "label": "prs-0.1", "budget": { "max_iters": 250 } }
//!   ]
//! }
//! ```
//!
//! Relative paths (matrix files, trace outputs, `output_dir`) are resolved
//! against the directory holding the config file.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::solvers::{Algorithm, Budget, SolverOptions};

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

/// Where the design matrix and measurements come from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProblemSpec {
    /// I.i.d. `N(0, 1/n)` design, Bernoulli–Gaussian signal.
    Gaussian {
        n: usize,
        p: usize,
        sparsity: f64,
        noise_variance: f64,
    },
    /// `A = U Vᵀ` with inner dimension `rank`.
    Product {
        n: usize,
        p: usize,
        rank: usize,
        sparsity: f64,
        noise_variance: f64,
    },
    /// Shepp–Logan phantom through the Radon matrix, 1% noise.
    SheppLogan { side: usize, angles: usize },
    /// Pre-exported matrices in the flat binary format.
    Files {
        a: PathBuf,
        y: PathBuf,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        x_true: Option<PathBuf>,
    },
}

impl ProblemSpec {
    pub fn generator_name(&self) -> &'static str {
        match self {
            ProblemSpec::Gaussian { .. } => "gaussian",
            ProblemSpec::Product { .. } => "product",
            ProblemSpec::SheppLogan { .. } => "shepp-logan",
            ProblemSpec::Files { .. } => "files",
        }
    }

    fn validate(&self, base_dir: &Path) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        let check_sparse = |n: usize, p: usize, sparsity: f64, noise: f64| {
            if n == 0 || p == 0 {
                return bad("problem dimensions must be positive".into());
            }
            if !(0.0..=1.0).contains(&sparsity) {
                return bad(format!("sparsity must lie in [0, 1], got {sparsity}"));
            }
            if !(noise >= 0.0 && noise.is_finite()) {
                return bad(format!("noise_variance must be nonnegative, got {noise}"));
            }
            Ok(())
        };
        match self {
            ProblemSpec::Gaussian {
                n,
                p,
                sparsity,
                noise_variance,
            } => check_sparse(*n, *p, *sparsity, *noise_variance),
            ProblemSpec::Product {
                n,
                p,
                rank,
                sparsity,
                noise_variance,
            } => {
                if *rank == 0 {
                    return bad("product rank must be positive".into());
                }
                check_sparse(*n, *p, *sparsity, *noise_variance)
            }
            ProblemSpec::SheppLogan { side, angles } => {
                if *side < 16 {
                    return bad(format!("phantom side must be at least 16, got {side}"));
                }
                if *angles == 0 {
                    return bad("need at least one projection angle".into());
                }
                Ok(())
            }
            ProblemSpec::Files { a, y, x_true } => {
                for path in [Some(a), Some(y), x_true.as_ref()].into_iter().flatten() {
                    let full = resolve(base_dir, path);
                    if !full.is_file() {
                        return bad(format!("input file {} does not exist", full.display()));
                    }
                }
                Ok(())
            }
        }
    }
}

/// Penalty on `Kx`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum PenaltySpec {
    L1,
    /// Isotropic TV on a periodic grid; the grid defaults to the phantom's
    /// `side × side` for the Shepp–Logan generator.
    Tv {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        grid: Option<Vec<usize>>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    pub name: Algorithm,
    /// Legend and default trace file stem; defaults to the solver name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub freeze_variances: bool,
    /// Overrides the experiment-wide budget.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<Budget>,
    /// Trace CSV path; defaults to `<output_dir>/<label>.csv`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<PathBuf>,
}

impl SolverSpec {
    pub fn new(name: Algorithm) -> Self {
        Self {
            name,
            label: None,
            rho: None,
            gamma: None,
            freeze_variances: false,
            budget: None,
            trace: None,
        }
    }

    pub fn label(&self) -> String {
        self.label.clone().unwrap_or_else(|| self.name.name().to_string())
    }

    pub fn options(&self) -> SolverOptions {
        SolverOptions {
            rho: self.rho,
            gamma: self.gamma,
            freeze_variances: self.freeze_variances,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub seed: u64,
    pub problem: ProblemSpec,
    pub penalty: PenaltySpec,
    pub lambda: f64,
    /// Shared budget for solvers without their own.
    #[serde(default)]
    pub budget: Budget,
    pub solvers: Vec<SolverSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

/// `path` if absolute, else `base/path`.
pub fn resolve(base: &Path, path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        base.join(path)
    }
}

fn check_version(v: u32) -> Result<()> {
    if v == CONFIG_SCHEMA_VERSION {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "unsupported config schema_version {v} (expected {CONFIG_SCHEMA_VERSION})"
        )))
    }
}

impl ExperimentConfig {
    /// Parse without validating referenced files.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("malformed config: {e}")))?;
        check_version(cfg.schema_version)?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    /// Read and validate a config file; relative paths resolve against its
    /// directory, which is returned alongside.
    pub fn load(path: impl AsRef<Path>) -> Result<(Self, PathBuf)> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        let cfg = Self::from_json(&text)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        cfg.validate(&base)?;
        Ok((cfg, base))
    }

    pub fn validate(&self, base_dir: &Path) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        check_version(self.schema_version)?;
        self.problem.validate(base_dir)?;
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return bad(format!("lambda must be nonnegative, got {}", self.lambda));
        }
        if let PenaltySpec::Tv { grid } = &self.penalty {
            if grid.is_none() && !matches!(self.problem, ProblemSpec::SheppLogan { .. }) {
                return bad("tv penalty needs an explicit grid for this problem".into());
            }
        }
        if self.solvers.is_empty() {
            return bad("solver list is empty".into());
        }
        self.budget.validate()?;
        let mut labels = HashSet::new();
        for s in &self.solvers {
            let label = s.label();
            if label.is_empty() || label.contains(['/', '\\']) {
                return bad(format!("solver label {label:?} is not a usable file stem"));
            }
            if !labels.insert(label.clone()) {
                return bad(format!("duplicate solver label {label:?}"));
            }
            if let Some(b) = &s.budget {
                b.validate()?;
            }
            if matches!(s.name, Algorithm::Ista | Algorithm::Amp)
                && !matches!(self.penalty, PenaltySpec::L1)
            {
                return bad(format!("{} supports only the l1 penalty", s.name));
            }
            if matches!(s.name, Algorithm::Admm | Algorithm::Prs) && s.rho.is_none() {
                return bad(format!("{label}: {} requires rho", s.name));
            }
            if let Some(rho) = s.rho {
                if !(rho > 0.0 && rho.is_finite()) {
                    return bad(format!("{label}: rho must be positive, got {rho}"));
                }
            }
            if let Some(g) = s.gamma {
                if !(g > 0.0 && g <= 1.0) {
                    return bad(format!("{label}: gamma must lie in (0, 1], got {g}"));
                }
            }
        }
        Ok(())
    }

    pub fn budget_for(&self, solver: &SolverSpec) -> Budget {
        solver.budget.clone().unwrap_or_else(|| self.budget.clone())
    }

    /// Hex SHA-256 of the compact JSON serialisation.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serialises");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}

/// The subset of a config that `gen` reads; any experiment config is also a
/// valid generator config.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub seed: u64,
    pub problem: ProblemSpec,
}

impl GenConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("malformed config: {e}")))?;
        check_version(cfg.schema_version)?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<(Self, PathBuf)> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        let cfg = Self::from_json(&text)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        cfg.problem.validate(&base)?;
        Ok((cfg, base))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIG1: &str = r#"{
        "schema_version": 1,
        "seed": 3,
        "problem": {"generator": "gaussian", "n": 600, "p": 2000, "sparsity": 0.1, "noise_variance": 1e-10},
        "penalty": {"kind": "l1"},
        "lambda": 1.0,
        "solvers": [{"name": "ista"}, {"name": "amp"}, {"name": "vamp"}]
    }"#;

    #[test]
    fn parses_and_round_trips() {
        let cfg = ExperimentConfig::from_json(FIG1).unwrap();
        cfg.validate(Path::new(".")).unwrap();
        assert_eq!(cfg.budget, Budget::default());
        let once = cfg.to_json();
        let again = ExperimentConfig::from_json(&once).unwrap();
        assert_eq!(again, cfg);
        assert_eq!(again.to_json(), once);
        assert_eq!(cfg.hash(), again.hash());
        assert_eq!(cfg.hash().len(), 64);
    }

    #[test]
    fn validation_errors() {
        let base = Path::new(".");
        let mut cfg = ExperimentConfig::from_json(FIG1).unwrap();
        cfg.solvers.clear();
        assert!(matches!(cfg.validate(base), Err(Error::Config(_))));

        let mut cfg = ExperimentConfig::from_json(FIG1).unwrap();
        cfg.solvers.push(SolverSpec::new(Algorithm::Prs));
        assert!(cfg.validate(base).is_err(), "prs without rho");

        let mut cfg = ExperimentConfig::from_json(FIG1).unwrap();
        cfg.solvers.push(SolverSpec::new(Algorithm::Vamp));
        assert!(cfg.validate(base).is_err(), "duplicate label");

        let mut cfg = ExperimentConfig::from_json(FIG1).unwrap();
        cfg.budget.max_iters = 0;
        assert!(cfg.validate(base).is_err());

        let mut cfg = ExperimentConfig::from_json(FIG1).unwrap();
        cfg.penalty = PenaltySpec::Tv { grid: None };
        assert!(cfg.validate(base).is_err());

        assert!(ExperimentConfig::from_json(&FIG1.replace("gaussian", "cauchy")).is_err());
        assert!(ExperimentConfig::from_json(&FIG1.replace("\"ista\"", "\"fista\"")).is_err());
        assert!(ExperimentConfig::from_json(&FIG1.replace("\"schema_version\": 1", "\"schema_version\": 2")).is_err());
        assert!(ExperimentConfig::from_json(&FIG1.replace("\"lambda\"", "\"lamda\"")).is_err());
    }

    #[test]
    fn missing_files_are_config_errors() {
        let mut cfg = ExperimentConfig::from_json(FIG1).unwrap();
        cfg.problem = ProblemSpec::Files {
            a: "nope_a.bin".into(),
            y: "nope_y.bin".into(),
            x_true: None,
        };
        assert!(matches!(cfg.validate(Path::new("/nonexistent")), Err(Error::Config(_))));
    }

    #[test]
    fn gen_config_accepts_experiment_configs() {
        let g = GenConfig::from_json(FIG1).unwrap();
        assert_eq!(g.seed, 3);
        assert_eq!(g.problem.generator_name(), "gaussian");
    }
}
