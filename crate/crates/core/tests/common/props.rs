//! Property checks shared by the `properties` suite and the acceptance run.
//! Each returns `Err` with the shrunk counterexample on failure.

use proptest::collection::vec;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

use proxflow::operators::{laplacian_spectrum, GradientOperator, GridShape, LinearMap};
use proxflow::prox::{self, PenaltyKind};

use super::{dense_apply, dense_gradient};

fn runner(cases: u32) -> TestRunner {
    TestRunner::new(Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    })
}

/// Grid shapes with every side ≥ 2 and 1–3 dimensions.
pub fn grid_dims(max_side: usize, max_len: usize) -> impl Strategy<Value = Vec<usize>> {
    prop_oneof![
        (2..=max_side.max(2) * 4).prop_map(|l| vec![l]),
        (2..=max_side, 2..=max_side).prop_map(|(a, b)| vec![a, b]),
        (2..=max_side, 2..=max_side, 2..=max_side).prop_map(|(a, b, c)| vec![a, b, c]),
    ]
    .prop_filter("grid too large", move |d| d.iter().product::<usize>() <= max_len)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `⟨Kx, g⟩ = ⟨x, Kᵀg⟩` relative to `‖Kx‖‖g‖`, 100 pairs per shape.
pub fn adjoint_identity() -> Result<(), String> {
    let shapes: [&[usize]; 6] = [&[3], &[17], &[2, 2], &[5, 7], &[4, 3, 6], &[8, 8, 2]];
    for dims in shapes {
        let op = GradientOperator::new(GridShape::new(dims.to_vec()).unwrap());
        let n = op.cols();
        let r = op.rows();
        runner(100)
            .run(&(vec(-10.0..10.0f64, n), vec(-10.0..10.0f64, r)), |(x, g)| {
                let kx = op.apply(&x).unwrap();
                let ktg = op.adjoint(&g).unwrap();
                let lhs = dot(&kx, &g);
                let rhs = dot(&x, &ktg);
                let scale = (norm(&kx) * norm(&g)).max(1e-300);
                prop_assert!((lhs - rhs).abs() <= 1e-12 * scale, "{dims:?}: {lhs} vs {rhs}");
                Ok(())
            })
            .map_err(|e| e.to_string())?;
    }
    Ok(())
}

/// Operator form against a definition-built dense matrix, n ≤ 64.
pub fn dense_equivalence() -> Result<(), String> {
    runner(64)
        .run(&grid_dims(6, 64).prop_flat_map(|d| {
            let n: usize = d.iter().product();
            let r = n * d.len();
            (Just(d), vec(-5.0..5.0f64, n), vec(-5.0..5.0f64, r))
        }), |(dims, x, g)| {
            let k = dense_gradient(&dims);
            let op = GradientOperator::new(GridShape::new(dims.clone()).unwrap());
            let kx = op.apply(&x).unwrap();
            let ktg = op.adjoint(&g).unwrap();
            let kx_dense = dense_apply(&k, &x);
            let ktg_dense = dense_apply(&k.transpose(), &g);
            for (a, b) in kx.iter().zip(&kx_dense).chain(ktg.iter().zip(&ktg_dense)) {
                prop_assert!((a - b).abs() <= 1e-14 * b.abs().max(1.0), "{dims:?}: {a} vs {b}");
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// Laplacian spectrum against the dense `KᵀK` eigenvalues, n ≤ 64.
pub fn spectrum_consistency() -> Result<(), String> {
    runner(48)
        .run(&grid_dims(6, 64), |dims| {
            let k = dense_gradient(&dims);
            let mut dense: Vec<f64> = (k.transpose() * &k).symmetric_eigenvalues().iter().copied().collect();
            let mut fast = laplacian_spectrum(&GridShape::new(dims.clone()).unwrap());
            dense.sort_by(f64::total_cmp);
            fast.sort_by(f64::total_cmp);
            prop_assert_eq!(dense.len(), fast.len());
            for (a, b) in dense.iter().zip(&fast) {
                prop_assert!((a - b).abs() <= 1e-10, "{dims:?}: {a} vs {b}");
            }
            let d = dims.len() as f64;
            prop_assert!(fast[0] == 0.0, "min eigenvalue {}", fast[0]);
            prop_assert!(fast[1] > 1e-12, "more than one zero mode");
            prop_assert!(*fast.last().unwrap() <= 4.0 * d + 1e-12);
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// `‖prox(a) - prox(b)‖ ≤ ‖a - b‖`, scalar and grouped.
pub fn prox_nonexpansive() -> Result<(), String> {
    let scalar = (vec(-5.0..5.0f64, 1..20), 0.0..3.0f64).prop_flat_map(|(a, t)| {
        let len = a.len();
        (Just(a), vec(-5.0..5.0f64, len), Just(t))
    });
    runner(100)
        .run(&scalar, |(a, b, t)| {
            let pa = prox::soft_threshold(&a, t).unwrap().value;
            let pb = prox::soft_threshold(&b, t).unwrap().value;
            let lhs = norm(&pa.iter().zip(&pb).map(|(x, y)| x - y).collect::<Vec<_>>());
            let rhs = norm(&a.iter().zip(&b).map(|(x, y)| x - y).collect::<Vec<_>>());
            prop_assert!(lhs <= rhs * (1.0 + 1e-12) + 1e-15);
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    let grouped = (1usize..=3, 1usize..8, 0.0..3.0f64).prop_flat_map(|(d, groups, t)| {
        (Just(d), vec(-5.0..5.0f64, d * groups), vec(-5.0..5.0f64, d * groups), Just(t))
    });
    runner(100)
        .run(&grouped, |(d, a, b, t)| {
            let pa = prox::group_soft_threshold(&a, d, t).unwrap().value;
            let pb = prox::group_soft_threshold(&b, d, t).unwrap().value;
            let lhs = norm(&pa.iter().zip(&pb).map(|(x, y)| x - y).collect::<Vec<_>>());
            let rhs = norm(&a.iter().zip(&b).map(|(x, y)| x - y).collect::<Vec<_>>());
            prop_assert!(lhs <= rhs * (1.0 + 1e-12) + 1e-15);
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// Brute-force grid minimisation of `θ f(x) + ½‖x - v‖²` in 1D and 2D.
pub fn prox_optimality() -> Result<(), String> {
    runner(40)
        .run(&(-3.0..3.0f64, 0.0..2.0f64), |(v, t)| {
            let got = prox::soft_threshold(&[v], t).unwrap().value[0];
            let obj = |x: f64| t * x.abs() + 0.5 * (x - v).powi(2);
            let best = (0..=6000)
                .map(|i| -3.0 + i as f64 * 1e-3)
                .min_by(|a, b| obj(*a).total_cmp(&obj(*b)))
                .unwrap();
            prop_assert!((got - best).abs() <= 1e-3, "v={v} θ={t}: {got} vs {best}");
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    runner(12)
        .run(&(-2.0..2.0f64, -2.0..2.0f64, 0.0..1.5f64), |(v0, v1, t)| {
            let got = prox::group_soft_threshold(&[v0, v1], 2, t).unwrap().value;
            let obj = |a: f64, b: f64| t * (a * a + b * b).sqrt() + 0.5 * ((a - v0).powi(2) + (b - v1).powi(2));
            let step = 2e-3;
            let mut best = (0.0, 0.0, f64::INFINITY);
            for i in 0..=2000 {
                let a = -2.0 + i as f64 * step;
                for j in 0..=2000 {
                    let b = -2.0 + j as f64 * step;
                    let f = obj(a, b);
                    if f < best.2 {
                        best = (a, b, f);
                    }
                }
            }
            // the grid minimiser lies within one cell of the true one
            let err = ((got[0] - best.0).powi(2) + (got[1] - best.1).powi(2)).sqrt();
            prop_assert!(err <= 2.0 * step, "v=({v0},{v1}) θ={t}: {got:?} vs {best:?}");
            prop_assert!(obj(got[0], got[1]) <= best.2 + 1e-12);
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// `avg_derivative` against a central finite-difference Jacobian diagonal.
pub fn divergence_fd() -> Result<(), String> {
    const H: f64 = 1e-6;
    let margin = 1e-3;
    let scalar = (vec(-4.0..4.0f64, 1..12), 0.1..2.0f64)
        .prop_filter("near the threshold", move |(v, t)| v.iter().all(|x| (x.abs() - t).abs() > margin));
    runner(100)
        .run(&scalar, |(v, t)| {
            let got = prox::soft_threshold(&v, t).unwrap().avg_derivative;
            let mut fd = 0.0;
            for i in 0..v.len() {
                let (mut a, mut b) = (v.clone(), v.clone());
                a[i] += H;
                b[i] -= H;
                let pa = prox::soft_threshold(&a, t).unwrap().value[i];
                let pb = prox::soft_threshold(&b, t).unwrap().value[i];
                fd += (pa - pb) / (2.0 * H);
            }
            fd /= v.len() as f64;
            prop_assert!((got - fd).abs() <= 1e-4, "{got} vs {fd}");
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    let grouped = (1usize..=3, 1usize..6, 0.1..2.0f64)
        .prop_flat_map(|(d, g, t)| (Just(d), vec(-3.0..3.0f64, d * g), Just(t)))
        .prop_filter("near the threshold", move |(d, v, t)| {
            v.chunks(*d).all(|g| (g.iter().map(|x| x * x).sum::<f64>().sqrt() - t).abs() > margin)
        });
    runner(100)
        .run(&grouped, |(d, v, t)| {
            let got = prox::group_soft_threshold(&v, d, t).unwrap().avg_derivative;
            let mut fd = 0.0;
            for i in 0..v.len() {
                let (mut a, mut b) = (v.clone(), v.clone());
                a[i] += H;
                b[i] -= H;
                let pa = prox::group_soft_threshold(&a, d, t).unwrap().value[i];
                let pb = prox::group_soft_threshold(&b, d, t).unwrap().value[i];
                fd += (pa - pb) / (2.0 * H);
            }
            fd /= v.len() as f64;
            prop_assert!((got - fd).abs() <= 1e-4, "d={d}: {got} vs {fd}");
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// `∇M(v) = v - prox(v)` by central differences with `h = 1e-6`.
pub fn moreau_gradient() -> Result<(), String> {
    const H: f64 = 1e-6;
    runner(100)
        .run(&(-4.0..4.0f64, 0.05..2.0f64), |(v, w)| {
            let fd = (prox::moreau_envelope(PenaltyKind::Abs, &[v + H], w).unwrap()
                - prox::moreau_envelope(PenaltyKind::Abs, &[v - H], w).unwrap())
                / (2.0 * H);
            let grad = v - prox::soft_threshold(&[v], w).unwrap().value[0];
            prop_assert!((fd - grad).abs() <= 1e-6, "v={v} w={w}: {fd} vs {grad}");
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    runner(100)
        .run(&(vec(-3.0..3.0f64, 2..=3), 0.05..2.0f64), |(v, w)| {
            let p = prox::group_soft_threshold(&v, v.len(), w).unwrap().value;
            for i in 0..v.len() {
                let (mut a, mut b) = (v.clone(), v.clone());
                a[i] += H;
                b[i] -= H;
                let fd = (prox::moreau_envelope(PenaltyKind::GroupL2, &a, w).unwrap()
                    - prox::moreau_envelope(PenaltyKind::GroupL2, &b, w).unwrap())
                    / (2.0 * H);
                prop_assert!((fd - (v[i] - p[i])).abs() <= 1e-6, "component {i}: {fd}");
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// Every property suite, as `(name, outcome)`.
pub fn all() -> Vec<(&'static str, Result<(), String>)> {
    vec![
        ("adjoint identity", adjoint_identity()),
        ("dense gradient equivalence", dense_equivalence()),
        ("laplacian spectrum", spectrum_consistency()),
        ("prox nonexpansiveness", prox_nonexpansive()),
        ("prox optimality", prox_optimality()),
        ("finite-difference divergence", divergence_fd()),
        ("moreau gradient", moreau_gradient()),
    ]
}
