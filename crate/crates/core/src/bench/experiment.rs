//! Building problems from configs, writing generated data, running solvers.

use std::path::{Path, PathBuf};
use std::sync::Arc;

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::Serialize;

use super::binary;
use super::config::{resolve, ExperimentConfig, PenaltySpec, ProblemSpec};
use crate::datagen::{Design, SyntheticInstance, TomoInstance};
use crate::error::{Error, Result};
use crate::fastpath::precompute;
use crate::operators::{DenseMap, GradientOperator, GridShape, LinearMap};
use crate::solvers::{run_with_precomputation, Penalty, Problem};
use crate::trace::Trace;

/// Data produced by a generator (or read from files).
#[derive(Clone, Debug)]
pub struct GeneratedData {
    pub a: DenseMap,
    pub y: Vec<f64>,
    pub x_true: Option<Vec<f64>>,
    /// Shape used when writing `x_true` (the image for tomography).
    pub x_shape: (usize, usize),
    /// Shape used when writing `y` (the sinogram for tomography).
    pub y_shape: (usize, usize),
    pub noise_variance: Option<f64>,
}

pub fn generate(spec: &ProblemSpec, seed: u64, base_dir: &Path) -> Result<GeneratedData> {
    let synthetic = |inst: SyntheticInstance| {
        let (n, p) = (inst.a.rows(), inst.a.cols());
        GeneratedData {
            x_shape: (p, 1),
            y_shape: (n, 1),
            noise_variance: Some(inst.noise_variance),
            x_true: Some(inst.x_true),
            y: inst.y,
            a: inst.a,
        }
    };
    Ok(match spec {
        ProblemSpec::Gaussian {
            n,
            p,
            sparsity,
            noise_variance,
        } => synthetic(SyntheticInstance::generate(
            *n,
            *p,
            *sparsity,
            *noise_variance,
            Design::Gaussian,
            seed,
        )?),
        ProblemSpec::Product {
            n,
            p,
            rank,
            sparsity,
            noise_variance,
        } => synthetic(SyntheticInstance::generate(
            *n,
            *p,
            *sparsity,
            *noise_variance,
            Design::Product { rank: *rank },
            seed,
        )?),
        ProblemSpec::SheppLogan { side, angles } => {
            let inst = TomoInstance::generate(*side, *angles, seed)?;
            GeneratedData {
                x_shape: (*side, *side),
                y_shape: (*angles, *side),
                noise_variance: Some(inst.noise_variance),
                x_true: Some(inst.phantom),
                y: inst.y,
                a: inst.radon,
            }
        }
        ProblemSpec::Files { a, y, x_true } => {
            let a = binary::read_matrix(resolve(base_dir, a))?;
            let y = binary::read_vector(resolve(base_dir, y))?;
            if y.len() != a.rows() {
                return Err(Error::Input(format!(
                    "y has {} entries but A has {} rows",
                    y.len(),
                    a.rows()
                )));
            }
            let x_true = x_true
                .as_ref()
                .map(|path| binary::read_vector(resolve(base_dir, path)))
                .transpose()?;
            GeneratedData {
                x_shape: (a.cols(), 1),
                y_shape: (a.rows(), 1),
                noise_variance: None,
                x_true,
                y,
                a,
            }
        }
    })
}

/// Sidecar metadata written by [`write_generated`].
#[derive(Clone, Debug, Serialize)]
pub struct GenMetadata {
    pub generator: &'static str,
    pub problem: ProblemSpec,
    pub seed: u64,
    pub format: &'static str,
    pub files: Vec<FileEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise_variance: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FileEntry {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
    pub bytes: usize,
}

/// Write `A.bin`, `y.bin`, `x_true.bin` (when known) and `meta.json`.
pub fn write_generated(
    dir: &Path,
    spec: &ProblemSpec,
    seed: u64,
    data: &GeneratedData,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    let mut written = Vec::new();
    let mut put = |name: &str, rows: usize, cols: usize, values: &[f64]| -> Result<()> {
        let path = dir.join(name);
        binary::write_matrix_to(
            std::io::BufWriter::new(std::fs::File::create(&path)?),
            rows,
            cols,
            values,
        )?;
        files.push(FileEntry {
            name: name.to_string(),
            rows,
            cols,
            bytes: binary::file_len(rows, cols),
        });
        written.push(path);
        Ok(())
    };
    put("A.bin", data.a.rows(), data.a.cols(), data.a.data())?;
    put("y.bin", data.y_shape.0, data.y_shape.1, &data.y)?;
    if let Some(x) = &data.x_true {
        put("x_true.bin", data.x_shape.0, data.x_shape.1, x)?;
    }
    let meta = GenMetadata {
        generator: spec.generator_name(),
        problem: spec.clone(),
        seed,
        format: "PROXFLW1: 8-byte magic, u32 rows, u32 cols (little-endian), then row-major little-endian f64",
        files,
        noise_variance: data.noise_variance,
    };
    let meta_path = dir.join("meta.json");
    std::fs::write(&meta_path, serde_json::to_string_pretty(&meta)? + "\n")?;
    written.push(meta_path);
    Ok(written)
}

fn penalty_for(cfg: &ExperimentConfig, p: usize) -> Result<Penalty> {
    match &cfg.penalty {
        PenaltySpec::L1 => Ok(Penalty::L1),
        PenaltySpec::Tv { grid } => {
            let dims = match (grid, &cfg.problem) {
                (Some(g), _) => g.clone(),
                (None, ProblemSpec::SheppLogan { side, .. }) => vec![*side, *side],
                (None, _) => return Err(Error::Config("tv penalty needs a grid".into())),
            };
            let shape = GridShape::new(dims).map_err(|e| Error::Config(e.to_string()))?;
            if shape.len() != p {
                return Err(Error::Config(format!(
                    "tv grid has {} sites but the problem has {p} unknowns",
                    shape.len()
                )));
            }
            Ok(Penalty::Tv(GradientOperator::new(shape)))
        }
    }
}

/// Generate (or load) the data and assemble the optimisation problem.
pub fn build_problem(cfg: &ExperimentConfig, base_dir: &Path) -> Result<(Problem, GeneratedData)> {
    let data = generate(&cfg.problem, cfg.seed, base_dir)?;
    let penalty = penalty_for(cfg, data.a.cols())?;
    let problem = Problem::new(data.y.clone(), data.a.clone(), cfg.lambda, penalty)?;
    Ok((problem, data))
}

/// Trace path for each solver, in config order.
pub fn trace_paths(cfg: &ExperimentConfig, base_dir: &Path, out_override: Option<&Path>) -> Vec<PathBuf> {
    let out_dir = match (out_override, &cfg.output_dir) {
        (Some(o), _) => o.to_path_buf(),
        (None, Some(d)) => resolve(base_dir, d),
        (None, None) => base_dir.to_path_buf(),
    };
    cfg.solvers
        .iter()
        .map(|s| match (&s.trace, out_override) {
            (Some(t), None) => resolve(base_dir, t),
            _ => out_dir.join(format!("{}.csv", s.label())),
        })
        .collect()
}

/// Run every configured solver on `problem`. Factorisations are shared
/// between solvers but their build time is charged to each trace.
///
/// With `parallel` (and the `parallel` feature) solvers run concurrently,
/// so their wall-clock columns include contention.
pub fn run_solvers(cfg: &ExperimentConfig, problem: &Problem, parallel: bool) -> Result<Vec<Trace>> {
    let precomp = if cfg.solvers.iter().any(|s| s.name.needs_precomputation()) {
        Some(Arc::new(precompute(problem.a().clone(), problem.penalty())?))
    } else {
        None
    };
    let hash = cfg.hash();
    let one = |spec: &super::config::SolverSpec| -> Result<Trace> {
        let mut trace = run_with_precomputation(
            problem,
            spec.name,
            &spec.options(),
            &cfg.budget_for(spec),
            precomp.clone(),
        )?;
        trace.label = spec.label();
        trace.config_hash = hash.clone();
        Ok(trace)
    };
    #[cfg(feature = "parallel")]
    if parallel {
        return cfg.solvers.par_iter().map(one).collect();
    }
    let _ = parallel;
    cfg.solvers.iter().map(one).collect()
}
