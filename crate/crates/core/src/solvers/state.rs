use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

use super::problem::Problem;

/// Lower bound on `σx`, `σz`.
pub const SIGMA_MIN: f64 = 1e-11;
/// Lower bound on the adaptive stepsize `ρ`.
pub const RHO_MIN: f64 = 1e-11;
/// Lower bound on `1 - σx ρ`.
pub const DENOM_MIN: f64 = 1e-8;

pub const DEFAULT_VAMP_GAMMA: f64 = 0.6;
pub const DEFAULT_PRS_GAMMA: f64 = 0.95;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Ista,
    Amp,
    Vamp,
    Admm,
    Prs,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Ista,
        Algorithm::Amp,
        Algorithm::Vamp,
        Algorithm::Admm,
        Algorithm::Prs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Ista => "ista",
            Algorithm::Amp => "amp",
            Algorithm::Vamp => "vamp",
            Algorithm::Admm => "admm",
            Algorithm::Prs => "prs",
        }
    }

    /// Whether the solver needs a [`crate::fastpath::Precomputation`].
    pub fn needs_precomputation(self) -> bool {
        matches!(self, Algorithm::Vamp | Algorithm::Admm | Algorithm::Prs)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown solver `{s}`")))
    }
}

/// Per-solver knobs. Unset fields take the algorithm's default.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverOptions {
    /// Fixed stepsize for ADMM/PRS (required there); initial stepsize for
    /// VAMP (default 1); ignored by ISTA and AMP.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    /// Relaxation on the dual (and, for VAMP, stepsize) update.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    /// VAMP only: hold `σx = σz = 1/(2ρ)`, which turns VAMP into PRS.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub freeze_variances: bool,
}

impl SolverOptions {
    pub fn with_rho(rho: f64) -> Self {
        Self {
            rho: Some(rho),
            ..Self::default()
        }
    }

    pub fn gamma(mut self, gamma: f64) -> Self {
        self.gamma = Some(gamma);
        self
    }

    pub fn frozen(mut self) -> Self {
        self.freeze_variances = true;
        self
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IstaState {
    pub x: Vec<f64>,
    /// Cached `A x`.
    pub ax: Vec<f64>,
    /// Upper estimate of the largest eigenvalue of `AᵀA`; the step is `1/L`.
    pub lipschitz: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AmpState {
    pub x: Vec<f64>,
    /// Onsager-corrected residual.
    pub z: Vec<f64>,
    pub ax: Vec<f64>,
    pub sigma: f64,
    /// `n / p`
    pub alpha: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VampState {
    pub x: Vec<f64>,
    /// `A x` as returned by the x-update.
    pub ax: Vec<f64>,
    pub z: Vec<f64>,
    pub u: Vec<f64>,
    pub rho: f64,
    pub sigma_x: f64,
    pub sigma_z: f64,
    pub gamma: f64,
    pub freeze_variances: bool,
}

/// ADMM / PRS iterate.
#[derive(Clone, Debug, PartialEq)]
pub struct SplitState {
    pub x: Vec<f64>,
    pub ax: Vec<f64>,
    pub z: Vec<f64>,
    pub u: Vec<f64>,
    pub rho: f64,
    /// PRS dual relaxation; always 1 for ADMM.
    pub gamma: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SolverState {
    Ista(IstaState),
    Amp(AmpState),
    Vamp(VampState),
    Admm(SplitState),
    Prs(SplitState),
}

impl SolverState {
    pub fn algorithm(&self) -> Algorithm {
        match self {
            SolverState::Ista(_) => Algorithm::Ista,
            SolverState::Amp(_) => Algorithm::Amp,
            SolverState::Vamp(_) => Algorithm::Vamp,
            SolverState::Admm(_) => Algorithm::Admm,
            SolverState::Prs(_) => Algorithm::Prs,
        }
    }

    /// Current primal estimate.
    pub fn x(&self) -> &[f64] {
        match self {
            SolverState::Ista(s) => &s.x,
            SolverState::Amp(s) => &s.x,
            SolverState::Vamp(s) => &s.x,
            SolverState::Admm(s) | SolverState::Prs(s) => &s.x,
        }
    }

    /// `(σx, σz, ρ)` where meaningful. AMP reports its `σ` as `σx`.
    pub fn diagnostics(&self) -> Diagnostics {
        match self {
            SolverState::Ista(_) => Diagnostics::default(),
            SolverState::Amp(s) => Diagnostics {
                sigma_x: Some(s.sigma),
                ..Diagnostics::default()
            },
            SolverState::Vamp(s) => Diagnostics {
                sigma_x: Some(s.sigma_x),
                sigma_z: Some(s.sigma_z),
                rho: Some(s.rho),
            },
            SolverState::Admm(s) | SolverState::Prs(s) => Diagnostics {
                rho: Some(s.rho),
                ..Diagnostics::default()
            },
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Diagnostics {
    pub sigma_x: Option<f64>,
    pub sigma_z: Option<f64>,
    pub rho: Option<f64>,
}

fn check_gamma(gamma: f64) -> Result<f64> {
    if gamma > 0.0 && gamma <= 1.0 {
        Ok(gamma)
    } else {
        Err(Error::Config(format!("relaxation must lie in (0, 1], got {gamma}")))
    }
}

fn fixed_rho(options: &SolverOptions, algorithm: Algorithm) -> Result<f64> {
    match options.rho {
        Some(rho) if rho > 0.0 && rho.is_finite() => Ok(rho),
        Some(rho) => Err(Error::Config(format!("{algorithm}: stepsize must be positive, got {rho}"))),
        None => Err(Error::Config(format!("{algorithm} requires a stepsize `rho`"))),
    }
}

/// Largest eigenvalue of `AᵀA` by power iteration (100 iterations, 1e-6
/// relative tolerance), inflated by 1% so that `1/L` is a safe step.
pub fn lipschitz_constant(problem: &Problem) -> f64 {
    use crate::operators::LinearMap;
    let a = problem.a();
    let p = problem.p();
    // fixed, non-degenerate start vector
    let mut v: Vec<f64> = (0..p)
        .map(|j| 1.0 + 0.5 * ((j as f64 + 1.0) * 0.618_033_988_75).fract())
        .collect();
    let nv = linalg::norm2(&v);
    v.iter_mut().for_each(|x| *x /= nv);
    let mut av = vec![0.0; problem.n()];
    let mut w = vec![0.0; p];
    let mut est = 0.0;
    for _ in 0..100 {
        a.apply_into(&v, &mut av);
        a.adjoint_into(&av, &mut w);
        let next = linalg::dot(&v, &w);
        let nw = linalg::norm2(&w);
        if nw == 0.0 {
            return f64::MIN_POSITIVE;
        }
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / nw;
        }
        let done = (next - est).abs() <= 1e-6 * next.abs();
        est = next;
        if done {
            break;
        }
    }
    est * 1.01
}

/// Zero iterates and the algorithm's starting scalars.
pub fn init(problem: &Problem, algorithm: Algorithm, options: &SolverOptions) -> Result<SolverState> {
    let (n, p, r) = (problem.n(), problem.p(), problem.r());
    Ok(match algorithm {
        Algorithm::Ista => {
            if !problem.penalty().is_separable() {
                return Err(Error::Config("ISTA supports only the l1 penalty".into()));
            }
            SolverState::Ista(IstaState {
                x: vec![0.0; p],
                ax: vec![0.0; n],
                lipschitz: lipschitz_constant(problem),
            })
        }
        Algorithm::Amp => {
            if !problem.penalty().is_separable() {
                return Err(Error::Config("AMP supports only the l1 penalty".into()));
            }
            SolverState::Amp(AmpState {
                x: vec![0.0; p],
                z: vec![0.0; n],
                ax: vec![0.0; n],
                sigma: 1.0,
                alpha: n as f64 / p as f64,
            })
        }
        Algorithm::Vamp => SolverState::Vamp(VampState {
            x: vec![0.0; p],
            ax: vec![0.0; n],
            z: vec![0.0; r],
            u: vec![0.0; r],
            rho: match options.rho {
                None => 1.0,
                Some(_) => fixed_rho(options, algorithm)?,
            },
            sigma_x: 0.5,
            sigma_z: 0.5,
            gamma: check_gamma(options.gamma.unwrap_or(DEFAULT_VAMP_GAMMA))?,
            freeze_variances: options.freeze_variances,
        }),
        Algorithm::Admm => SolverState::Admm(SplitState {
            x: vec![0.0; p],
            ax: vec![0.0; n],
            z: vec![0.0; r],
            u: vec![0.0; r],
            rho: fixed_rho(options, algorithm)?,
            gamma: 1.0,
        }),
        Algorithm::Prs => SolverState::Prs(SplitState {
            x: vec![0.0; p],
            ax: vec![0.0; n],
            z: vec![0.0; r],
            u: vec![0.0; r],
            rho: fixed_rho(options, algorithm)?,
            gamma: check_gamma(options.gamma.unwrap_or(DEFAULT_PRS_GAMMA))?,
        }),
    })
}
