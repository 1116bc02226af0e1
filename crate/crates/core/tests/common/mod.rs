//! Shared oracles and property checks for the integration tests.
#![allow(dead_code)]

pub mod fastpath;
pub mod props;

use nalgebra::{DMatrix, DVector};
use proxflow::datagen::TomoInstance;
use proxflow::operators::{DenseMap, GradientOperator, GridShape, LinearMap};
use proxflow::solvers::{Penalty, Problem};

/// Periodic forward-difference matrix built straight from the definition:
/// row `s·d + c` differences site `s` along axis `d-1-c`.
pub fn dense_gradient(dims: &[usize]) -> DMatrix<f64> {
    let d = dims.len();
    let n: usize = dims.iter().product();
    let mut m = DMatrix::zeros(d * n, n);
    for s in 0..n {
        // row-major multi-index, last axis fastest
        let mut idx = vec![0; d];
        let mut rem = s;
        for ax in (0..d).rev() {
            idx[ax] = rem % dims[ax];
            rem /= dims[ax];
        }
        for c in 0..d {
            let ax = d - 1 - c;
            let mut nb = idx.clone();
            nb[ax] = (nb[ax] + 1) % dims[ax];
            let t = nb.iter().zip(dims).fold(0, |acc, (&i, &l)| acc * l + i);
            m[(s * d + c, t)] += 1.0;
            m[(s * d + c, s)] -= 1.0;
        }
    }
    m
}

pub fn to_dvec(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}

pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    num / den.max(f64::MIN_POSITIVE)
}

/// Dense `(AᵀA + ρKᵀK)⁻¹ b` by LU, or the minimum-norm least-squares
/// solution via SVD when the system is singular.
pub fn dense_solve(a: &DenseMap, k: Option<&DMatrix<f64>>, rho: f64, b: &[f64]) -> Vec<f64> {
    let am = a.to_nalgebra();
    let mut m = am.transpose() * &am;
    match k {
        Some(k) => m += k.transpose() * k * rho,
        None => {
            for i in 0..m.nrows() {
                m[(i, i)] += rho;
            }
        }
    }
    let rhs = to_dvec(b);
    match m.clone().lu().solve(&rhs) {
        Some(x) => x.as_slice().to_vec(),
        None => m.svd(true, true).solve(&rhs, 1e-12).unwrap().as_slice().to_vec(),
    }
}

/// Dense `(1/r) Tr[K (AᵀA + ρKᵀK)⁻¹ Kᵀ]`, `K = I` when `k` is `None`.
pub fn dense_sigma_x(a: &DenseMap, k: Option<&DMatrix<f64>>, rho: f64) -> f64 {
    let am = a.to_nalgebra();
    let p = am.ncols();
    let ident = DMatrix::<f64>::identity(p, p);
    let k = k.cloned().unwrap_or(ident);
    let m = am.transpose() * &am + k.transpose() * &k * rho;
    let inv = m.try_inverse().expect("nonsingular system");
    (&k * inv * k.transpose()).trace() / k.nrows() as f64
}

/// Lasso by cyclic coordinate descent on the residual, independent of the
/// library's solvers. Runs until no coordinate moves by more than `tol`.
pub fn lasso_cd(a: &DenseMap, y: &[f64], lambda: f64, tol: f64, max_sweeps: usize) -> Vec<f64> {
    let (n, p) = (a.rows(), a.cols());
    let cols: Vec<Vec<f64>> = (0..p).map(|j| (0..n).map(|i| a.get(i, j)).collect()).collect();
    let sq: Vec<f64> = cols.iter().map(|c| c.iter().map(|v| v * v).sum()).collect();
    let mut x = vec![0.0; p];
    let mut r = y.to_vec();
    for _ in 0..max_sweeps {
        let mut biggest = 0.0f64;
        for j in 0..p {
            if sq[j] == 0.0 {
                continue;
            }
            let c = &cols[j];
            let rho_j: f64 = c.iter().zip(&r).map(|(a, r)| a * r).sum::<f64>() + sq[j] * x[j];
            let new = rho_j.signum() * (rho_j.abs() - lambda).max(0.0) / sq[j];
            let delta = new - x[j];
            if delta != 0.0 {
                for (ri, ci) in r.iter_mut().zip(c) {
                    *ri -= delta * ci;
                }
                x[j] = new;
                biggest = biggest.max(delta.abs());
            }
        }
        if biggest < tol {
            break;
        }
    }
    x
}

/// Objective by explicit summation, independent of `Problem::objective`.
#[allow(clippy::needless_range_loop)]
pub fn naive_l1_objective(a: &DenseMap, y: &[f64], lambda: f64, x: &[f64]) -> f64 {
    let mut loss = 0.0;
    for i in 0..a.rows() {
        let mut ax = 0.0;
        for j in 0..a.cols() {
            ax += a.get(i, j) * x[j];
        }
        loss += (y[i] - ax).powi(2);
    }
    0.5 * loss + lambda * x.iter().map(|v| v.abs()).sum::<f64>()
}

pub fn tomo_problem(side: usize, angles: usize, seed: u64, lambda: f64) -> (Problem, TomoInstance) {
    let inst = TomoInstance::generate(side, angles, seed).unwrap();
    let grad = GradientOperator::new(GridShape::new(vec![side, side]).unwrap());
    let prob = Problem::new(inst.y.clone(), inst.radon.clone(), lambda, Penalty::Tv(grad)).unwrap();
    (prob, inst)
}

/// Small random matrix with a deterministic xorshift generator.
pub fn pseudo_random_matrix(rows: usize, cols: usize, seed: u64) -> DenseMap {
    let mut s = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
    DenseMap::from_fn(rows, cols, |_, _| {
        s ^= s << 13;
        s ^= s >> 7;
        s ^= s << 17;
        (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    })
}

pub fn pseudo_random_vec(len: usize, seed: u64) -> Vec<f64> {
    pseudo_random_matrix(len, 1, seed).into_data()
}

pub fn dense_apply(m: &DMatrix<f64>, x: &[f64]) -> Vec<f64> {
    (m * to_dvec(x)).as_slice().to_vec()
}

pub fn assert_linear_map_dims(op: &dyn LinearMap, rows: usize, cols: usize) {
    assert_eq!((op.rows(), op.cols()), (rows, cols));
}
