//! Proximal operators of `θ|·|` and `θ‖·‖₂` (per group), with the averaged
//! divergence `⟨∇η⟩` that drives the variance updates of the message-passing
//! solvers.
//!
//! Points exactly on the threshold boundary (`|v| = θ`, `‖v_g‖ = θ`) map to
//! zero and contribute zero to the derivative.

use std::str::FromStr;

use crate::error::{Error, Result};

/// Output of a proximal map together with its averaged Jacobian diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct ProxResult {
    pub value: Vec<f64>,
    pub avg_derivative: f64,
}

/// Penalty whose prox is available in closed form.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PenaltyKind {
    /// `f(x) = Σ |x_i|`
    Abs,
    /// `f(x) = ‖x‖₂` over a single group.
    GroupL2,
}

impl FromStr for PenaltyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "abs" | "l1" => Ok(PenaltyKind::Abs),
            "group-l2" | "l2" => Ok(PenaltyKind::GroupL2),
            other => Err(Error::Parameter(format!("unknown penalty function `{other}`"))),
        }
    }
}

fn check_theta(theta: f64) -> Result<()> {
    if theta >= 0.0 && theta.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter(format!(
            "threshold must be finite and nonnegative, got {theta}"
        )))
    }
}

/// Elementwise soft threshold into `out`; returns the fraction of entries
/// strictly above the threshold.
pub fn soft_threshold_into(v: &[f64], theta: f64, out: &mut [f64]) -> f64 {
    debug_assert_eq!(v.len(), out.len());
    let mut active = 0usize;
    for (o, &vi) in out.iter_mut().zip(v) {
        let mag = vi.abs();
        if mag > theta {
            *o = vi - theta.copysign(vi);
            active += 1;
        } else {
            *o = 0.0;
        }
    }
    if v.is_empty() {
        0.0
    } else {
        active as f64 / v.len() as f64
    }
}

pub fn soft_threshold(v: &[f64], theta: f64) -> Result<ProxResult> {
    check_theta(theta)?;
    let mut value = vec![0.0; v.len()];
    let avg_derivative = soft_threshold_into(v, theta, &mut value);
    Ok(ProxResult {
        value,
        avg_derivative,
    })
}

/// Group soft threshold over consecutive groups of `group_size` entries, into
/// `out`. Returns `⟨∇η⟩`, the Jacobian trace averaged over all components.
pub fn group_soft_threshold_into(v: &[f64], group_size: usize, theta: f64, out: &mut [f64]) -> f64 {
    debug_assert_eq!(v.len(), out.len());
    debug_assert!(group_size > 0 && v.len().is_multiple_of(group_size));
    let m = group_size as f64;
    let mut trace = 0.0;
    for (og, vg) in out.chunks_mut(group_size).zip(v.chunks(group_size)) {
        let norm = vg.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > theta {
            let shrink = 1.0 - theta / norm;
            for (o, x) in og.iter_mut().zip(vg) {
                *o = shrink * x;
            }
            // Σ_i [1 - θ/‖v‖ + θ v_i²/‖v‖³] = m - (m-1) θ/‖v‖
            trace += m - (m - 1.0) * theta / norm;
        } else {
            og.fill(0.0);
        }
    }
    if v.is_empty() {
        0.0
    } else {
        trace / v.len() as f64
    }
}

pub fn group_soft_threshold(v: &[f64], group_size: usize, theta: f64) -> Result<ProxResult> {
    check_theta(theta)?;
    if group_size == 0 || !v.len().is_multiple_of(group_size) {
        return Err(Error::Parameter(format!(
            "length {} is not a multiple of group size {group_size}",
            v.len()
        )));
    }
    let mut value = vec![0.0; v.len()];
    let avg_derivative = group_soft_threshold_into(v, group_size, theta, &mut value);
    Ok(ProxResult {
        value,
        avg_derivative,
    })
}

/// `min_x weight·f(x) + ½‖x - v‖²`, evaluated through the prox.
///
/// For [`PenaltyKind::GroupL2`] the whole of `v` is one group.
pub fn moreau_envelope(kind: PenaltyKind, v: &[f64], weight: f64) -> Result<f64> {
    if !(weight > 0.0 && weight.is_finite()) {
        return Err(Error::Parameter(format!(
            "Moreau envelope weight must be positive, got {weight}"
        )));
    }
    let (x, fx) = match kind {
        PenaltyKind::Abs => {
            let x = soft_threshold(v, weight)?.value;
            let fx = x.iter().map(|xi| xi.abs()).sum::<f64>();
            (x, fx)
        }
        PenaltyKind::GroupL2 => {
            let size = v.len().max(1);
            let x = if v.is_empty() {
                Vec::new()
            } else {
                group_soft_threshold(v, size, weight)?.value
            };
            let fx = x.iter().map(|xi| xi * xi).sum::<f64>().sqrt();
            (x, fx)
        }
    };
    let dist_sq: f64 = x.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(weight * fx + 0.5 * dist_sq)
}
