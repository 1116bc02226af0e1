//! Fast-path solves and variances against dense solves on every shape
//! with `n·p ≤ 10⁴`.

use std::sync::Arc;

use proxflow::fastpath::precompute;
use proxflow::operators::{GradientOperator, GridShape, LinearMap};
use proxflow::solvers::Penalty;

use super::{dense_gradient, dense_sigma_x, dense_solve, pseudo_random_matrix, pseudo_random_vec, rel_err};

pub const RHOS: [f64; 3] = [0.01, 1.0, 100.0];
const TOL: f64 = 1e-8;

pub const SEPARABLE_SHAPES: [(usize, usize); 9] =
    [(1, 1), (3, 7), (10, 25), (15, 40), (20, 50), (40, 40), (30, 10), (50, 200), (80, 120)];

pub const TV_CASES: [(usize, &[usize]); 7] = [
    (3, &[6]),
    (8, &[4, 4]),
    (12, &[5, 3]),
    (20, &[8, 8]),
    (30, &[3, 3, 3]),
    (60, &[10, 12]),
    (100, &[10, 10]),
];

macro_rules! check {
    ($cond:expr, $($msg:tt)*) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)*));
        }
    };
}

pub fn woodbury() -> Result<(), String> {
    for (k, &(n, p)) in SEPARABLE_SHAPES.iter().enumerate() {
        let a = pseudo_random_matrix(n, p, 100 + k as u64);
        let y = pseudo_random_vec(n, 200 + k as u64);
        let u = pseudo_random_vec(p, 300 + k as u64);
        let pre = precompute(Arc::new(a.clone()), &Penalty::L1).map_err(|e| e.to_string())?;
        for rho in RHOS {
            let mut b = a.adjoint(&y).unwrap();
            b.iter_mut().zip(&u).for_each(|(bi, ui)| *bi += ui);
            let want = dense_solve(&a, None, rho, &b);
            let (x, ax) = pre.ridge_solve_with_image(&y, &u, rho).map_err(|e| e.to_string())?;
            let err = rel_err(&x, &want);
            check!(err <= TOL, "{n}x{p} ρ={rho}: solve error {err:e}");
            let err = rel_err(&ax, &a.apply(&x).unwrap());
            check!(err <= TOL, "{n}x{p} ρ={rho}: image error {err:e}");
            let s = pre.sigma_x_spectral(rho).map_err(|e| e.to_string())?;
            let s_dense = dense_sigma_x(&a, None, rho);
            check!((s - s_dense).abs() <= TOL * s_dense, "{n}x{p} ρ={rho}: σx {s} vs {s_dense}");
        }
    }
    Ok(())
}

pub fn fft() -> Result<(), String> {
    for (k, &(n, dims)) in TV_CASES.iter().enumerate() {
        let grad = GradientOperator::new(GridShape::new(dims.to_vec()).unwrap());
        let p = grad.cols();
        let a = pseudo_random_matrix(n, p, 400 + k as u64);
        let y = pseudo_random_vec(n, 500 + k as u64);
        let u = pseudo_random_vec(grad.rows(), 600 + k as u64);
        let kd = dense_gradient(dims);
        let pre = precompute(Arc::new(a.clone()), &Penalty::Tv(grad.clone())).map_err(|e| e.to_string())?;
        for rho in RHOS {
            let mut b = a.adjoint(&y).unwrap();
            let ktu = grad.adjoint(&u).unwrap();
            b.iter_mut().zip(&ktu).for_each(|(bi, ui)| *bi += ui);
            let want = dense_solve(&a, Some(&kd), rho, &b);
            let x = pre.tv_solve_fft(&y, &u, rho).map_err(|e| e.to_string())?;
            let err = rel_err(&x, &want);
            check!(err <= TOL, "{dims:?} ρ={rho}: solve error {err:e}");
            let (x2, ax) = pre.tv_solve_rhs_with_image(&b, rho).map_err(|e| e.to_string())?;
            let err = rel_err(&x2, &want);
            check!(err <= TOL, "{dims:?} ρ={rho}: rhs route error {err:e}");
            let err = rel_err(&ax, &a.apply(&x2).unwrap());
            check!(err <= TOL, "{dims:?} ρ={rho}: image error {err:e}");
            let s = pre.sigma_x_tv(rho).map_err(|e| e.to_string())?;
            let s_dense = dense_sigma_x(&a, Some(&kd), rho);
            check!((s - s_dense).abs() <= TOL * s_dense, "{dims:?} ρ={rho}: σx {s} vs {s_dense}");
        }
    }
    Ok(())
}
