use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fastpath::{precompute, Precomputation};
use crate::operators::LinearMap;
use crate::trace::{Trace, TraceRow};

use super::kkt::kkt_residual;
use super::problem::{Penalty, Problem};
use super::state::{init, Algorithm, Diagnostics, SolverOptions, SolverState};
use super::steps;

/// Iteration budget and stopping rule for [`run`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Budget {
    pub max_iters: usize,
    /// Wall-clock cap, preprocessing included.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_seconds: Option<f64>,
    /// Stop when `|f_t - f_{t-window}| / |f_t|` drops below this.
    pub stop_tol: f64,
    pub window: usize,
    /// Record the KKT residual every this many iterations (0: never).
    pub kkt_every: usize,
    /// Stop once a recorded KKT residual is at most this.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kkt_tol: Option<f64>,
    /// Flag divergence once the objective exceeds this multiple of `½‖y‖²`.
    pub divergence_factor: f64,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            max_iters: 1000,
            max_seconds: None,
            stop_tol: 1e-10,
            window: 10,
            kkt_every: 0,
            kkt_tol: None,
            divergence_factor: 1e8,
        }
    }
}

impl Budget {
    /// Positive iteration cap and time limit, sane tolerances.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.max_iters == 0 {
            return bad("budget max_iters must be positive".into());
        }
        if let Some(t) = self.max_seconds {
            if !(t > 0.0 && t.is_finite()) {
                return bad(format!("budget max_seconds must be positive, got {t}"));
            }
        }
        if !(self.stop_tol >= 0.0 && self.stop_tol.is_finite()) {
            return bad(format!("budget stop_tol must be nonnegative, got {}", self.stop_tol));
        }
        if self.window == 0 {
            return bad("budget window must be positive".into());
        }
        if let Some(t) = self.kkt_tol {
            if t.is_nan() || t < 0.0 || self.kkt_every == 0 {
                return bad("budget kkt_tol needs kkt_every > 0 and a nonnegative tolerance".into());
            }
        }
        if self.divergence_factor.is_nan() || self.divergence_factor <= 1.0 {
            return bad(format!(
                "budget divergence_factor must exceed 1, got {}",
                self.divergence_factor
            ));
        }
        Ok(())
    }

    pub fn iterations(max_iters: usize) -> Self {
        Self {
            max_iters,
            ..Self::default()
        }
    }

    /// Run exactly `max_iters` iterations unless the iteration diverges.
    pub fn fixed(max_iters: usize) -> Self {
        Self {
            max_iters,
            stop_tol: 0.0,
            ..Self::default()
        }
    }
}

/// A solver state bound to its problem and (when needed) factorisation.
pub struct Solver<'p> {
    problem: &'p Problem,
    precomp: Option<Arc<Precomputation>>,
    state: SolverState,
}

impl<'p> Solver<'p> {
    /// Initialise, factorising `A` if the algorithm needs it.
    pub fn new(problem: &'p Problem, algorithm: Algorithm, options: &SolverOptions) -> Result<Self> {
        let precomp = if algorithm.needs_precomputation() {
            Some(Arc::new(precompute(problem.a().clone(), problem.penalty())?))
        } else {
            None
        };
        Self::with_precomputation(problem, algorithm, options, precomp)
    }

    /// Initialise with a factorisation built elsewhere (it must match the
    /// problem's matrix and penalty).
    pub fn with_precomputation(
        problem: &'p Problem,
        algorithm: Algorithm,
        options: &SolverOptions,
        precomp: Option<Arc<Precomputation>>,
    ) -> Result<Self> {
        if algorithm.needs_precomputation() {
            let pc = precomp
                .as_ref()
                .ok_or_else(|| Error::Config(format!("{algorithm} needs a precomputation")))?;
            let matches_penalty = match problem.penalty() {
                Penalty::L1 => pc.tv().is_none(),
                Penalty::Tv(_) => pc.tv().is_some(),
            };
            if !matches_penalty || pc.matrix().rows() != problem.n() || pc.matrix().cols() != problem.p()
            {
                return Err(Error::Config(
                    "precomputation does not match the problem".into(),
                ));
            }
        }
        let state = init(problem, algorithm, options)?;
        Ok(Self {
            problem,
            precomp,
            state,
        })
    }

    pub fn problem(&self) -> &Problem {
        self.problem
    }

    pub fn state(&self) -> &SolverState {
        &self.state
    }

    pub fn state_mut(&mut self) -> &mut SolverState {
        &mut self.state
    }

    pub fn precomputation(&self) -> Option<&Arc<Precomputation>> {
        self.precomp.as_ref()
    }

    pub fn preprocessing_seconds(&self) -> f64 {
        self.precomp.as_ref().map_or(0.0, |p| p.seconds())
    }

    pub fn x(&self) -> &[f64] {
        self.state.x()
    }

    pub fn diagnostics(&self) -> Diagnostics {
        self.state.diagnostics()
    }

    pub fn step(&mut self) -> Result<()> {
        let problem = self.problem;
        let pc = self.precomp.as_deref();
        match &mut self.state {
            SolverState::Ista(s) => steps::ista_step(s, problem),
            SolverState::Amp(s) => steps::amp_step(s, problem),
            SolverState::Vamp(s) => {
                let pc = pc.expect("checked at construction");
                match problem.penalty() {
                    Penalty::L1 => steps::vamp_sep_step(s, problem, pc),
                    Penalty::Tv(_) => steps::vamp_tv_step(s, problem, pc),
                }
            }
            SolverState::Admm(s) => steps::admm_step(s, problem, pc.expect("checked at construction")),
            SolverState::Prs(s) => steps::prs_step(s, problem, pc.expect("checked at construction")),
        }
    }

    /// Objective at the current primal iterate, reusing `Ax` when cached.
    pub fn objective(&self) -> f64 {
        match &self.state {
            SolverState::Ista(s) => self.problem.objective_with_ax(&s.x, &s.ax),
            SolverState::Amp(s) => self.problem.objective_with_ax(&s.x, &s.ax),
            SolverState::Vamp(s) => self.problem.objective_with_ax(&s.x, &s.ax),
            SolverState::Admm(s) | SolverState::Prs(s) => self.problem.objective_with_ax(&s.x, &s.ax),
        }
    }
}

fn row(iter: usize, seconds: f64, objective: f64, kkt: Option<f64>, d: Diagnostics) -> TraceRow {
    TraceRow {
        iter,
        seconds,
        objective,
        kkt,
        sigma_x: d.sigma_x,
        sigma_z: d.sigma_z,
        rho: d.rho,
    }
}

/// Run a solver from its zero initialisation under `budget`.
///
/// Divergence is recorded in the trace rather than returned as an error.
pub fn run(problem: &Problem, algorithm: Algorithm, options: &SolverOptions, budget: &Budget) -> Result<Trace> {
    run_with_precomputation(problem, algorithm, options, budget, None)
}

/// As [`run`], reusing `precomp` when given. Its recorded build time is
/// still charged to the trace.
pub fn run_with_precomputation(
    problem: &Problem,
    algorithm: Algorithm,
    options: &SolverOptions,
    budget: &Budget,
    precomp: Option<Arc<Precomputation>>,
) -> Result<Trace> {
    let mut solver = match precomp {
        Some(pc) if algorithm.needs_precomputation() => {
            Solver::with_precomputation(problem, algorithm, options, Some(pc))?
        }
        _ => Solver::new(problem, algorithm, options)?,
    };
    drive(&mut solver, budget)
}

/// Iterate an initialised solver under `budget`, leaving it at the last
/// iterate.
pub fn drive(solver: &mut Solver<'_>, budget: &Budget) -> Result<Trace> {
    let problem = solver.problem;
    let pre = solver.preprocessing_seconds();
    let mut trace = Trace::new(solver.state.algorithm().name(), pre);
    let start = Instant::now();
    let clock = |start: &Instant| pre + start.elapsed().as_secs_f64();

    let f0 = solver.objective();
    let kkt0 = (budget.kkt_every > 0).then(|| kkt_residual(problem, solver.x())).transpose()?;
    trace
        .rows
        .push(row(0, clock(&start), f0, kkt0, solver.diagnostics()));
    let blowup = budget.divergence_factor * (0.5 * crate::linalg::norm2_sq(problem.y())).max(f0.abs()).max(1e-300);

    let mut history = vec![f0];
    for it in 1..=budget.max_iters {
        if let Some(limit) = budget.max_seconds {
            if clock(&start) >= limit {
                break;
            }
        }
        match solver.step() {
            Ok(()) => {}
            Err(Error::Diverged(msg)) => {
                trace.divergence = Some(format!("iteration {it}: {msg}"));
                break;
            }
            Err(e) => return Err(e),
        }
        let f = solver.objective();
        let kkt = (budget.kkt_every > 0 && it % budget.kkt_every == 0)
            .then(|| kkt_residual(problem, solver.x()))
            .transpose()?;
        trace
            .rows
            .push(row(it, clock(&start), f, kkt, solver.diagnostics()));
        if !f.is_finite() || f > blowup {
            trace.divergence = Some(format!("iteration {it}: objective {f:e} blew up"));
            break;
        }
        history.push(f);
        if let (Some(tol), Some(k)) = (budget.kkt_tol, kkt) {
            if k <= tol {
                break;
            }
        }
        if it >= budget.window {
            let old = history[it - budget.window];
            let rel = (f - old).abs() / f.abs().max(f64::MIN_POSITIVE);
            if rel < budget.stop_tol {
                break;
            }
        }
    }
    trace.solution = solver.x().to_vec();
    Ok(trace)
}
