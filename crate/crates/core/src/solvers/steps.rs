//! One iteration of each solver.

use crate::error::{check_len, Error, Result};
use crate::fastpath::Precomputation;
use crate::linalg;
use crate::operators::LinearMap;

use super::problem::{Penalty, Problem};
use super::state::{
    AmpState, IstaState, SplitState, VampState, DENOM_MIN, RHO_MIN, SIGMA_MIN,
};

fn require_separable(problem: &Problem, what: &str) -> Result<()> {
    if problem.penalty().is_separable() {
        Ok(())
    } else {
        Err(Error::Config(format!("{what} requires the separable l1 penalty")))
    }
}

fn require_tv(problem: &Problem, what: &str) -> Result<()> {
    if problem.penalty().is_separable() {
        Err(Error::Config(format!("{what} requires a TV penalty")))
    } else {
        Ok(())
    }
}

fn diverged(what: &str) -> Error {
    Error::Diverged(format!("{what} produced a non-finite iterate"))
}

/// `(AᵀA + ρKᵀK)⁻¹ (Aᵀy + Kᵀ dual)` and its image under `A`, through the
/// cached factorisation.
pub(crate) fn x_update(
    problem: &Problem,
    precomp: &Precomputation,
    dual: &[f64],
    rho: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    match problem.penalty() {
        Penalty::L1 => precomp.ridge_solve_with_image(problem.y(), dual, rho),
        Penalty::Tv(_) => {
            let mut rhs = problem.aty().to_vec();
            let mut ktu = vec![0.0; problem.p()];
            problem.adjoint_k_into(dual, &mut ktu);
            linalg::axpy(1.0, &ktu, &mut rhs);
            precomp.tv_solve_rhs_with_image(&rhs, rho)
        }
    }
}

/// `x ← η_{λ/L}(x + Aᵀ(y - Ax)/L)`
pub fn ista_step(state: &mut IstaState, problem: &Problem) -> Result<()> {
    require_separable(problem, "ISTA")?;
    let a = problem.a();
    let step = 1.0 / state.lipschitz;
    let resid: Vec<f64> = problem.y().iter().zip(&state.ax).map(|(y, v)| y - v).collect();
    let mut g = vec![0.0; problem.p()];
    a.adjoint_into(&resid, &mut g);
    for (gi, xi) in g.iter_mut().zip(&state.x) {
        *gi = xi + step * *gi;
    }
    crate::prox::soft_threshold_into(&g, problem.lambda() * step, &mut state.x);
    a.apply_into(&state.x, &mut state.ax);
    if !linalg::all_finite(&state.x) {
        return Err(diverged("ISTA"));
    }
    Ok(())
}

/// Soft-threshold AMP with Onsager correction and threshold `λσ`.
pub fn amp_step(state: &mut AmpState, problem: &Problem) -> Result<()> {
    require_separable(problem, "AMP")?;
    let a = problem.a();
    let mut v = vec![0.0; problem.p()];
    a.adjoint_into(&state.z, &mut v);
    linalg::axpy(1.0, &state.x, &mut v);
    let deriv =
        crate::prox::soft_threshold_into(&v, problem.lambda() * state.sigma, &mut state.x);
    a.apply_into(&state.x, &mut state.ax);
    let onsager = deriv / state.alpha;
    for ((z, y), ax) in state.z.iter_mut().zip(problem.y()).zip(&state.ax) {
        *z = y - ax + onsager * *z;
    }
    state.sigma = 1.0 + state.sigma * onsager;
    if !(linalg::all_finite(&state.x) && linalg::all_finite(&state.z) && state.sigma.is_finite()) {
        return Err(diverged("AMP"));
    }
    Ok(())
}

fn vamp_step(state: &mut VampState, problem: &Problem, precomp: &Precomputation) -> Result<()> {
    check_len("VAMP dual", problem.r(), state.u.len())?;
    let rho = state.rho;
    (state.x, state.ax) = x_update(problem, precomp, &state.u, rho)?;
    let sigma_x = if state.freeze_variances {
        0.5 / rho
    } else {
        let s = match problem.penalty() {
            Penalty::L1 => precomp.sigma_x_spectral(rho)?,
            Penalty::Tv(_) => precomp.sigma_x_tv(rho)?,
        };
        s.max(SIGMA_MIN)
    };
    let mut kx = vec![0.0; problem.r()];
    problem.apply_k_into(&state.x, &mut kx);

    let denom = (1.0 - sigma_x * rho).max(DENOM_MIN);
    let v: Vec<f64> = kx
        .iter()
        .zip(&state.u)
        .map(|(k, u)| (k - sigma_x * u) / denom)
        .collect();
    let theta = problem.lambda() * sigma_x / denom;
    let deriv = problem.penalty().prox_into(&v, theta, &mut state.z);
    let sigma_z = if state.freeze_variances {
        sigma_x
    } else {
        (sigma_x / denom * deriv).max(SIGMA_MIN)
    };

    let g = state.gamma;
    for ((u, z), k) in state.u.iter_mut().zip(&state.z).zip(&kx) {
        *u += g * (z / sigma_z - k / sigma_x);
    }
    if !state.freeze_variances {
        state.rho = (rho + g * (1.0 / sigma_z - 1.0 / sigma_x)).max(RHO_MIN);
    }
    state.sigma_x = sigma_x;
    state.sigma_z = sigma_z;
    if !(linalg::all_finite(&state.x) && linalg::all_finite(&state.u) && state.rho.is_finite()) {
        return Err(diverged("VAMP"));
    }
    Ok(())
}

/// VAMP for the separable l1 penalty.
pub fn vamp_sep_step(state: &mut VampState, problem: &Problem, precomp: &Precomputation) -> Result<()> {
    require_separable(problem, "separable VAMP")?;
    vamp_step(state, problem, precomp)
}

/// VAMP-like iteration for penalties on `Kx` (TV).
pub fn vamp_tv_step(state: &mut VampState, problem: &Problem, precomp: &Precomputation) -> Result<()> {
    require_tv(problem, "non-separable VAMP")?;
    vamp_step(state, problem, precomp)
}

/// ADMM on `L(x,z,u) = ½‖y-Ax‖² + λR(z) - uᵀ(Kx - z) + ρ/2‖Kx - z‖²`.
pub fn admm_step(state: &mut SplitState, problem: &Problem, precomp: &Precomputation) -> Result<()> {
    let rho = state.rho;
    let dual: Vec<f64> = state.u.iter().zip(&state.z).map(|(u, z)| u + rho * z).collect();
    (state.x, state.ax) = x_update(problem, precomp, &dual, rho)?;
    let mut kx = vec![0.0; problem.r()];
    problem.apply_k_into(&state.x, &mut kx);
    let v: Vec<f64> = kx.iter().zip(&state.u).map(|(k, u)| k - u / rho).collect();
    problem
        .penalty()
        .prox_into(&v, problem.lambda() / rho, &mut state.z);
    for ((u, z), k) in state.u.iter_mut().zip(&state.z).zip(&kx) {
        *u += rho * (z - k);
    }
    if !(linalg::all_finite(&state.x) && linalg::all_finite(&state.u)) {
        return Err(diverged("ADMM"));
    }
    Ok(())
}

/// Peaceman–Rachford splitting with relaxation `γ` on the dual update.
pub fn prs_step(state: &mut SplitState, problem: &Problem, precomp: &Precomputation) -> Result<()> {
    let rho = state.rho;
    (state.x, state.ax) = x_update(problem, precomp, &state.u, rho)?;
    let mut kx = vec![0.0; problem.r()];
    problem.apply_k_into(&state.x, &mut kx);
    let v: Vec<f64> = kx.iter().zip(&state.u).map(|(k, u)| 2.0 * k - u / rho).collect();
    problem
        .penalty()
        .prox_into(&v, problem.lambda() / rho, &mut state.z);
    let step = 2.0 * rho * state.gamma;
    for ((u, z), k) in state.u.iter_mut().zip(&state.z).zip(&kx) {
        *u += step * (z - k);
    }
    if !(linalg::all_finite(&state.x) && linalg::all_finite(&state.u)) {
        return Err(diverged("PRS"));
    }
    Ok(())
}
