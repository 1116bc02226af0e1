//! Fast x-updates for the `n ≪ p` regime.
//!
//! The separable route diagonalises `A Aᵀ = U diag(d) Uᵀ` once and applies
//! `(AᵀA + ρI)⁻¹` through the Woodbury identity in `O(np)` per call.
//!
//! The TV route needs `(AᵀA + ρΔ)⁻¹` with `Δ = ∇ᵀ∇` the periodic Laplacian,
//! which is diagonal in the Fourier basis but singular on the constant
//! (DC) mode. We write
//!
//! ```text
//! AᵀA + ρΔ = ρH⁻¹ + AᵀA − ρwwᵀ,   H = Δ⁺ + wwᵀ,   w = 1/√p
//! ```
//!
//! so that `H` is positive definite and FFT-diagonal. The `ρH⁻¹ + AᵀA` part
//! is inverted by Woodbury with the eigendecomposition of `A H Aᵀ`, and the
//! `−ρwwᵀ` part by a Sherman–Morrison correction whose scalars only involve
//! `ã = Uᵀ A w`. Everything per call is two FFT round trips plus `O(np)`.

use std::sync::{Arc, Mutex};
use std::time::Instant;

use nalgebra::DMatrix;

use crate::error::{check_len, Error, Result};
use crate::fft::GridFft;
use crate::linalg;
use crate::operators::{laplacian_spectrum, DenseMap, GradientOperator, LinearMap};
use crate::solvers::Penalty;

/// Relative cutoff below which Gram eigenvalues are treated as zero.
const EIG_CLAMP: f64 = 1e-12;

/// Fourier-side data for the TV route.
#[derive(Clone, Debug)]
pub struct TvSpectral {
    grad: GradientOperator,
    spectrum: Vec<f64>,
    multiplier: Vec<f64>,
    fft: GridFft,
    dc_coupling: Vec<f64>,
    dc_degenerate: bool,
}

impl TvSpectral {
    /// Laplacian eigenvalues in DFT order.
    pub fn laplacian_eigs(&self) -> &[f64] {
        &self.spectrum
    }

    /// `ã = Uᵀ A w`, the coupling of each Woodbury mode to the DC mode.
    pub fn dc_coupling(&self) -> &[f64] {
        &self.dc_coupling
    }

    pub fn fft(&self) -> &GridFft {
        &self.fft
    }
}

/// `(y, Uᵀy)`
type ProjectedY = (Vec<f64>, Vec<f64>);

/// Cached factorisations for one feature matrix and penalty.
#[derive(Clone, Debug)]
pub struct Precomputation {
    a: Arc<DenseMap>,
    eigvecs: DenseMap,
    eigvals: Vec<f64>,
    /// `Uᵀ A`, so that both Woodbury products are single passes over `n × p`.
    projected: DenseMap,
    /// Last `(y, Uᵀy)` pair; solvers call the ridge solve with one fixed `y`.
    projected_y: Arc<Mutex<Option<ProjectedY>>>,
    seconds: f64,
    tv: Option<TvSpectral>,
}

/// Symmetric eigendecomposition sorted by decreasing eigenvalue, with tiny
/// and negative eigenvalues clamped to zero.
fn sorted_eigen(gram: DMatrix<f64>) -> (DenseMap, Vec<f64>) {
    let n = gram.nrows();
    let sym = (&gram + gram.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]).then(i.cmp(&j)));
    let top = order
        .first()
        .map(|&i| eig.eigenvalues[i].max(0.0))
        .unwrap_or(0.0);
    let eigvals = order
        .iter()
        .map(|&i| {
            let v = eig.eigenvalues[i];
            if v <= EIG_CLAMP * top {
                0.0
            } else {
                v
            }
        })
        .collect();
    let eigvecs = DenseMap::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (eigvecs, eigvals)
}

/// Factorise `A` for the given penalty. Wall-clock time is recorded.
pub fn precompute(a: Arc<DenseMap>, penalty: &Penalty) -> Result<Precomputation> {
    let start = Instant::now();
    if !linalg::all_finite(a.data()) {
        return Err(Error::Input("feature matrix has non-finite entries".into()));
    }
    let (n, p) = (a.rows(), a.cols());
    let am = a.to_nalgebra();
    let (eigvecs, eigvals, tv) = match penalty {
        Penalty::L1 => {
            let gram = &am * am.transpose();
            let (u, d) = sorted_eigen(gram);
            (u, d, None)
        }
        Penalty::Tv(grad) => {
            check_len("TV grid size vs columns of A", grad.cols(), p)?;
            let shape = grad.shape().clone();
            let fft = GridFft::new(&shape);
            let spectrum = laplacian_spectrum(&shape);
            let multiplier: Vec<f64> = spectrum
                .iter()
                .enumerate()
                .map(|(k, &l)| if k == 0 { 1.0 } else { 1.0 / l })
                .collect();
            // A H, one FFT per row
            let mut ah = DMatrix::<f64>::zeros(n, p);
            for i in 0..n {
                let row = fft.apply_multiplier(a.row(i), &multiplier);
                for (j, v) in row.into_iter().enumerate() {
                    ah[(i, j)] = v;
                }
            }
            let gram = &ah * am.transpose();
            let (u, d) = sorted_eigen(gram);
            let w = 1.0 / (p as f64).sqrt();
            let aw: Vec<f64> = (0..n).map(|i| a.row(i).iter().sum::<f64>() * w).collect();
            let dc_coupling = u.adjoint(&aw)?;
            let scale = d.first().copied().unwrap_or(0.0).max(1.0).sqrt();
            let dc_degenerate = linalg::norm2(&aw) <= 1e-12 * scale;
            let tv = TvSpectral {
                grad: grad.clone(),
                spectrum,
                multiplier,
                fft,
                dc_coupling,
                dc_degenerate,
            };
            (u, d, Some(tv))
        }
    };
    let projected = DenseMap::from_nalgebra(&(eigvecs.to_nalgebra().transpose() * &am));
    Ok(Precomputation {
        a,
        eigvecs,
        eigvals,
        projected,
        projected_y: Arc::default(),
        seconds: start.elapsed().as_secs_f64(),
        tv,
    })
}

fn check_rho(rho: f64) -> Result<()> {
    if rho > 0.0 && rho.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter(format!("stepsize must be positive, got {rho}")))
    }
}

impl Precomputation {
    pub fn matrix(&self) -> &Arc<DenseMap> {
        &self.a
    }

    /// Orthogonal eigenvectors of the Gram matrix, one per column.
    pub fn eigenvectors(&self) -> &DenseMap {
        &self.eigvecs
    }

    /// Eigenvalues in decreasing order. For the TV route these belong to
    /// `A H Aᵀ` rather than `A Aᵀ`.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigvals
    }

    pub fn seconds(&self) -> f64 {
        self.seconds
    }

    pub fn tv(&self) -> Option<&TvSpectral> {
        self.tv.as_ref()
    }

    /// `U diag(d) Uᵀ`.
    pub fn reconstruct_gram(&self) -> DenseMap {
        let n = self.eigvals.len();
        DenseMap::from_fn(n, n, |i, j| {
            (0..n)
                .map(|k| self.eigvecs.get(i, k) * self.eigvals[k] * self.eigvecs.get(j, k))
                .sum()
        })
    }

    /// `(AᵀA + ρI)⁻¹ (Aᵀy + u)` via Woodbury.
    pub fn ridge_solve_woodbury(&self, y: &[f64], u: &[f64], rho: f64) -> Result<Vec<f64>> {
        Ok(self.ridge_solve_with_image(y, u, rho)?.0)
    }

    /// As [`Self::ridge_solve_woodbury`], also returning `A x` computed in
    /// the eigenbasis (`n²` work instead of `np`).
    pub fn ridge_solve_with_image(&self, y: &[f64], u: &[f64], rho: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        check_rho(rho)?;
        check_len("ridge solve: y", self.a.rows(), y.len())?;
        check_len("ridge solve: u", self.a.cols(), u.len())?;
        // x = u/ρ + Aᵀ U (d + ρ)⁻¹ Uᵀ (y - A u/ρ)
        let mut x = linalg::scale(1.0 / rho, u);
        let uy = self.project_y(y)?;
        let base = self.projected.apply(&x)?;
        let t: Vec<f64> = base
            .iter()
            .zip(&uy)
            .zip(&self.eigvals)
            .map(|((b, yi), di)| (yi - b) / (di + rho))
            .collect();
        let mut back = vec![0.0; x.len()];
        self.projected.adjoint_into(&t, &mut back);
        linalg::axpy(1.0, &back, &mut x);
        // A x = U (Uᵀ A u/ρ + d ∘ t)
        let modes: Vec<f64> = base
            .iter()
            .zip(&t)
            .zip(&self.eigvals)
            .map(|((b, ti), di)| b + di * ti)
            .collect();
        let ax = self.eigvecs.apply(&modes)?;
        Ok((x, ax))
    }

    fn project_y(&self, y: &[f64]) -> Result<Vec<f64>> {
        let mut cache = self.projected_y.lock().unwrap_or_else(|e| e.into_inner());
        if let Some((cached_y, uy)) = cache.as_ref() {
            if cached_y.as_slice() == y {
                return Ok(uy.clone());
            }
        }
        let uy = self.eigvecs.adjoint(y)?;
        *cache = Some((y.to_vec(), uy.clone()));
        Ok(uy)
    }

    /// Average variance `(1/p) Tr (AᵀA + ρI)⁻¹`, counting the `p - n` zero
    /// modes of `AᵀA` that the n-term spectral sum leaves out.
    pub fn sigma_x_spectral(&self, rho: f64) -> Result<f64> {
        check_rho(rho)?;
        let (n, p) = (self.a.rows() as f64, self.a.cols() as f64);
        let s: f64 = self.eigvals.iter().map(|d| 1.0 / (d + rho)).sum();
        Ok((s + (p - n) / rho) / p)
    }

    fn tv_spectral(&self) -> Result<&TvSpectral> {
        self.tv
            .as_ref()
            .ok_or_else(|| Error::Config("precomputation was not built for a TV penalty".into()))
    }

    /// `(AᵀA + ρ∇ᵀ∇)⁻¹ (Aᵀy + ∇ᵀu)`.
    pub fn tv_solve_fft(&self, y: &[f64], u: &[f64], rho: f64) -> Result<Vec<f64>> {
        let tv = self.tv_spectral()?;
        check_len("TV solve: y", self.a.rows(), y.len())?;
        check_len("TV solve: u", tv.grad.rows(), u.len())?;
        let mut rhs = self.a.adjoint(y)?;
        let ktu = tv.grad.adjoint(u)?;
        linalg::axpy(1.0, &ktu, &mut rhs);
        self.tv_solve_rhs(&rhs, rho)
    }

    /// `(AᵀA + ρ∇ᵀ∇)⁻¹ b` for an arbitrary right-hand side.
    ///
    /// When `A` annihilates constants the system is singular on the DC mode;
    /// a right-hand side orthogonal to constants then gets the minimum-norm
    /// solution and anything else is rejected.
    pub fn tv_solve_rhs(&self, rhs: &[f64], rho: f64) -> Result<Vec<f64>> {
        Ok(self.tv_solve_rhs_with_image(rhs, rho)?.0)
    }

    /// As [`Self::tv_solve_rhs`], also returning `A x` from the eigenbasis.
    pub fn tv_solve_rhs_with_image(&self, rhs: &[f64], rho: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        check_rho(rho)?;
        let tv = self.tv_spectral()?;
        let p = self.a.cols();
        check_len("TV solve: rhs", p, rhs.len())?;
        let w = 1.0 / (p as f64).sqrt();

        let h = tv.fft.apply_multiplier(rhs, &tv.multiplier);
        let t_modes = self.projected.apply(&h)?;
        let inv: Vec<f64> = self.eigvals.iter().map(|d| 1.0 / (d + rho)).collect();

        let dc_rhs = rhs.iter().sum::<f64>() * w;
        let c = if tv.dc_degenerate {
            let tol = 1e-10 * linalg::norm2(rhs).max(f64::MIN_POSITIVE);
            if dc_rhs.abs() > tol {
                return Err(Error::Singular(
                    "A maps constants to zero and the right-hand side has a DC component".into(),
                ));
            }
            0.0
        } else {
            let ad = &tv.dc_coupling;
            let delta: f64 = ad.iter().zip(&inv).map(|(a, i)| a * a * i).sum();
            let proj: f64 = ad
                .iter()
                .zip(&t_modes)
                .zip(&inv)
                .map(|((a, t), i)| a * t * i)
                .sum();
            (dc_rhs - proj) / (rho * delta)
        };

        let coef: Vec<f64> = t_modes
            .iter()
            .zip(&tv.dc_coupling)
            .zip(&inv)
            .map(|((t, a), i)| (t / rho + c * a) * i)
            .collect();
        let g = self.projected.adjoint(&coef)?;
        let hg = tv.fft.apply_multiplier(&g, &tv.multiplier);
        let x = h
            .iter()
            .zip(&hg)
            .map(|(hi, gi)| hi / rho - gi + c * w)
            .collect();
        // A h = U t̃, A H Aᵀ U = U diag(d), A w = U ã
        let modes: Vec<f64> = t_modes
            .iter()
            .zip(&coef)
            .zip(self.eigvals.iter().zip(&tv.dc_coupling))
            .map(|((t, k), (d, a))| t / rho - d * k + c * a)
            .collect();
        let ax = self.eigvecs.apply(&modes)?;
        Ok((x, ax))
    }

    /// Average variance of `∇x`: `(1/r) Tr[∇ (AᵀA + ρΔ)⁻¹ ∇ᵀ]` with
    /// `r = d·p`. Uses the pseudo-inverse when `A` annihilates constants.
    pub fn sigma_x_tv(&self, rho: f64) -> Result<f64> {
        check_rho(rho)?;
        let tv = self.tv_spectral()?;
        let p = self.a.cols() as f64;
        let r = tv.grad.rows() as f64;
        let mut trace = (p - 1.0) - self.eigvals.iter().map(|d| d / (d + rho)).sum::<f64>();
        if !tv.dc_degenerate {
            let mut delta = 0.0;
            let mut curv = 0.0;
            for (a, d) in tv.dc_coupling.iter().zip(&self.eigvals) {
                let i = 1.0 / (d + rho);
                delta += a * a * i;
                curv += d * a * a * i * i;
            }
            trace += curv / delta;
        }
        Ok(trace / (rho * r))
    }
}
