use std::sync::Arc;

use crate::error::{check_len, Error, Result};
use crate::linalg;
use crate::operators::{DenseMap, GradientOperator, LinearMap};
use crate::prox;

/// Penalty `λ Σ_k f((Kx)_k)`.
#[derive(Clone, Debug, PartialEq)]
pub enum Penalty {
    /// `K = I`, `f = |·|`.
    L1,
    /// `K = ∇` on a periodic grid, `f = ‖·‖₂` per site (isotropic TV).
    Tv(GradientOperator),
}

impl Penalty {
    pub fn group_size(&self) -> usize {
        match self {
            Penalty::L1 => 1,
            Penalty::Tv(grad) => grad.group_size(),
        }
    }

    pub fn is_separable(&self) -> bool {
        matches!(self, Penalty::L1)
    }

    /// Proximal map of `θ f` into `out`, returning `⟨∇η⟩`.
    pub fn prox_into(&self, v: &[f64], theta: f64, out: &mut [f64]) -> f64 {
        match self {
            Penalty::L1 => prox::soft_threshold_into(v, theta, out),
            Penalty::Tv(grad) => prox::group_soft_threshold_into(v, grad.group_size(), theta, out),
        }
    }

    /// `Σ_k f(v_k)` for `v` already in the split domain.
    pub fn value(&self, v: &[f64]) -> f64 {
        match self {
            Penalty::L1 => v.iter().map(|x| x.abs()).sum(),
            Penalty::Tv(grad) => v
                .chunks(grad.group_size())
                .map(|g| g.iter().map(|x| x * x).sum::<f64>().sqrt())
                .sum(),
        }
    }
}

/// `min_x ½‖y - Ax‖² + λ Σ_k f((Kx)_k)`.
#[derive(Clone, Debug)]
pub struct Problem {
    y: Vec<f64>,
    a: Arc<DenseMap>,
    lambda: f64,
    penalty: Penalty,
    aty: Vec<f64>,
}

impl Problem {
    pub fn new(
        y: Vec<f64>,
        a: impl Into<Arc<DenseMap>>,
        lambda: f64,
        penalty: Penalty,
    ) -> Result<Self> {
        let a = a.into();
        check_len("responses vs rows of A", a.rows(), y.len())?;
        if let Penalty::Tv(grad) = &penalty {
            check_len("TV grid size vs columns of A", a.cols(), grad.cols())?;
        }
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::Parameter(format!(
                "regularization must be finite and nonnegative, got {lambda}"
            )));
        }
        if !linalg::all_finite(&y) {
            return Err(Error::Input("responses contain non-finite values".into()));
        }
        let aty = a.adjoint(&y)?;
        Ok(Self {
            y,
            a,
            lambda,
            penalty,
            aty,
        })
    }

    /// Number of measurements.
    pub fn n(&self) -> usize {
        self.a.rows()
    }

    /// Number of unknowns.
    pub fn p(&self) -> usize {
        self.a.cols()
    }

    /// Length of the split variable `z = Kx`.
    pub fn r(&self) -> usize {
        self.p() * self.penalty.group_size()
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn a(&self) -> &Arc<DenseMap> {
        &self.a
    }

    pub fn aty(&self) -> &[f64] {
        &self.aty
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn penalty(&self) -> &Penalty {
        &self.penalty
    }

    pub(crate) fn apply_k_into(&self, x: &[f64], out: &mut [f64]) {
        match &self.penalty {
            Penalty::L1 => out.copy_from_slice(x),
            Penalty::Tv(grad) => grad.apply_into(x, out),
        }
    }

    pub(crate) fn adjoint_k_into(&self, v: &[f64], out: &mut [f64]) {
        match &self.penalty {
            Penalty::L1 => out.copy_from_slice(v),
            Penalty::Tv(grad) => grad.adjoint_into(v, out),
        }
    }

    pub fn apply_k(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len("apply K", self.p(), x.len())?;
        let mut out = vec![0.0; self.r()];
        self.apply_k_into(x, &mut out);
        Ok(out)
    }

    pub fn adjoint_k(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_len("adjoint K", self.r(), v.len())?;
        let mut out = vec![0.0; self.p()];
        self.adjoint_k_into(v, &mut out);
        Ok(out)
    }

    /// Objective given a precomputed `Ax`.
    pub(crate) fn objective_with_ax(&self, x: &[f64], ax: &[f64]) -> f64 {
        let loss = 0.5
            * self
                .y
                .iter()
                .zip(ax)
                .map(|(y, v)| (y - v) * (y - v))
                .sum::<f64>();
        let reg = match &self.penalty {
            Penalty::L1 => self.penalty.value(x),
            Penalty::Tv(grad) => {
                let mut kx = vec![0.0; grad.rows()];
                grad.apply_into(x, &mut kx);
                self.penalty.value(&kx)
            }
        };
        loss + self.lambda * reg
    }

    /// `½‖y - Ax‖² + λ Σ_k f((Kx)_k)`.
    pub fn objective(&self, x: &[f64]) -> Result<f64> {
        check_len("objective", self.p(), x.len())?;
        let ax = self.a.apply(x)?;
        Ok(self.objective_with_ax(x, &ax))
    }
}

/// Free-function form of [`Problem::objective`].
pub fn objective(problem: &Problem, x: &[f64]) -> Result<f64> {
    problem.objective(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::GridShape;

    #[test]
    fn objective_at_zero_is_half_norm_y() {
        let a = DenseMap::from_fn(3, 4, |i, j| (i + 2 * j) as f64);
        let p = Problem::new(vec![1.0, 2.0, 2.0], a, 0.7, Penalty::L1).unwrap();
        assert_eq!(p.objective(&[0.0; 4]).unwrap(), 4.5);
    }

    #[test]
    fn tv_of_constant_is_loss_only() {
        let shape = GridShape::new(vec![2, 3]).unwrap();
        let a = DenseMap::from_fn(2, 6, |i, j| ((i * 6 + j) % 5) as f64 - 2.0);
        let y = vec![0.5, -1.0];
        let prob = Problem::new(y.clone(), a.clone(), 3.0, Penalty::Tv(GradientOperator::new(shape)))
            .unwrap();
        let x = vec![1.5; 6];
        let ax = a.apply(&x).unwrap();
        let loss: f64 = 0.5 * y.iter().zip(&ax).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
        assert!((prob.objective(&x).unwrap() - loss).abs() < 1e-14);
    }

    #[test]
    fn construction_errors() {
        let a = DenseMap::zeros(2, 3);
        assert!(Problem::new(vec![0.0; 3], a.clone(), 1.0, Penalty::L1).is_err());
        assert!(Problem::new(vec![0.0; 2], a.clone(), -1.0, Penalty::L1).is_err());
        let tv = Penalty::Tv(GradientOperator::new(GridShape::new(vec![2, 2]).unwrap()));
        assert!(Problem::new(vec![0.0; 2], a, 1.0, tv).is_err());
    }
}
