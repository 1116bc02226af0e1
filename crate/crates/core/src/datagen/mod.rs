//! Deterministic generators for synthetic regression and tomography inputs.
//!
//! Randomness comes from ChaCha20 seeded with the caller's 64-bit seed; each
//! generator draws from its own stream (see [`stream`]) so that, for one
//! seed, the signal, the matrix and the noise are independent and each is
//! reproducible on its own.

mod phantom;
mod radon;

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg;
use crate::operators::{DenseMap, LinearMap};

pub use phantom::{shepp_logan, shepp_logan_at, Ellipse, SHEPP_LOGAN_ELLIPSES};
pub use radon::radon_matrix;

/// ChaCha20 stream ids, one per generator.
pub mod stream {
    pub const BERNOULLI_GAUSSIAN: u64 = 1;
    pub const GAUSSIAN_MATRIX: u64 = 2;
    pub const PRODUCT_LEFT: u64 = 3;
    pub const PRODUCT_RIGHT: u64 = 4;
    pub const NOISE: u64 = 5;
}

pub fn rng_for(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn normal(rng: &mut ChaCha20Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Entries are `N(0,1)` with probability `sparsity` and exactly zero otherwise.
pub fn bernoulli_gaussian(p: usize, sparsity: f64, seed: u64) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&sparsity) {
        return Err(Error::Parameter(format!(
            "sparsity must lie in [0, 1], got {sparsity}"
        )));
    }
    let mut rng = rng_for(seed, stream::BERNOULLI_GAUSSIAN);
    Ok((0..p)
        .map(|_| {
            let active = rng.random::<f64>() < sparsity;
            let value = normal(&mut rng);
            if active {
                value
            } else {
                0.0
            }
        })
        .collect())
}

fn gaussian_entries(rows: usize, cols: usize, std: f64, rng: &mut ChaCha20Rng) -> DenseMap {
    DenseMap::from_fn(rows, cols, |_, _| std * normal(rng))
}

/// I.i.d. `N(0, 1/n)` entries.
pub fn gaussian_matrix(n: usize, p: usize, seed: u64) -> Result<DenseMap> {
    if n == 0 || p == 0 {
        return Err(Error::Parameter("matrix dimensions must be positive".into()));
    }
    let mut rng = rng_for(seed, stream::GAUSSIAN_MATRIX);
    Ok(gaussian_entries(n, p, (1.0 / n as f64).sqrt(), &mut rng))
}

/// `A = U Vᵀ` with `U ~ N(0, 1/n)^{n×r}` and `V ~ N(0, 1/r)^{p×r}`, so
/// entries of `A` have variance `1/n` like [`gaussian_matrix`].
pub fn product_matrix(n: usize, p: usize, r: usize, seed: u64) -> Result<DenseMap> {
    if n == 0 || p == 0 || r == 0 {
        return Err(Error::Parameter("matrix dimensions and rank must be positive".into()));
    }
    let u = gaussian_entries(n, r, (1.0 / n as f64).sqrt(), &mut rng_for(seed, stream::PRODUCT_LEFT));
    let v = gaussian_entries(p, r, (1.0 / r as f64).sqrt(), &mut rng_for(seed, stream::PRODUCT_RIGHT));
    let prod = u.to_nalgebra() * v.to_nalgebra().transpose();
    Ok(DenseMap::from_nalgebra(&prod))
}

/// `y = A x + N(0, noise_variance)`.
pub fn noisy_measurements(a: &DenseMap, x: &[f64], noise_variance: f64, seed: u64) -> Result<Vec<f64>> {
    if !(noise_variance >= 0.0 && noise_variance.is_finite()) {
        return Err(Error::Parameter(format!(
            "noise variance must be nonnegative, got {noise_variance}"
        )));
    }
    let mut y = a.apply(x)?;
    if noise_variance > 0.0 {
        let std = noise_variance.sqrt();
        let mut rng = rng_for(seed, stream::NOISE);
        for v in y.iter_mut() {
            *v += std * normal(&mut rng);
        }
    }
    Ok(y)
}

/// Noise variance giving a 1% noise-to-signal power ratio: `0.01 ‖Ax‖² / n`.
pub fn one_percent_noise_variance(ax: &[f64]) -> f64 {
    0.01 * linalg::norm2_sq(ax) / ax.len().max(1) as f64
}

/// Sparse regression instance.
#[derive(Clone, Debug)]
pub struct SyntheticInstance {
    pub a: DenseMap,
    pub x_true: Vec<f64>,
    pub y: Vec<f64>,
    pub noise_variance: f64,
    pub seed: u64,
}

/// Which random design to draw.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Design {
    Gaussian,
    /// Product of Gaussian factors with the given inner rank.
    Product { rank: usize },
}

impl SyntheticInstance {
    pub fn generate(
        n: usize,
        p: usize,
        sparsity: f64,
        noise_variance: f64,
        design: Design,
        seed: u64,
    ) -> Result<Self> {
        let x_true = bernoulli_gaussian(p, sparsity, seed)?;
        let a = match design {
            Design::Gaussian => gaussian_matrix(n, p, seed)?,
            Design::Product { rank } => product_matrix(n, p, rank, seed)?,
        };
        let y = noisy_measurements(&a, &x_true, noise_variance, seed)?;
        Ok(Self {
            a,
            x_true,
            y,
            noise_variance,
            seed,
        })
    }
}

/// `count` angles equally spaced over `[0, π)`.
pub fn equispaced_angles(count: usize) -> Vec<f64> {
    (0..count).map(|k| k as f64 * PI / count as f64).collect()
}

/// Shepp–Logan tomography instance with 1% noise.
#[derive(Clone, Debug)]
pub struct TomoInstance {
    pub side: usize,
    /// Row-major `side × side` image.
    pub phantom: Vec<f64>,
    pub radon: DenseMap,
    pub y: Vec<f64>,
    pub angles: Vec<f64>,
    pub noise_variance: f64,
}

impl TomoInstance {
    pub fn generate(side: usize, n_angles: usize, seed: u64) -> Result<Self> {
        if n_angles == 0 {
            return Err(Error::Parameter("need at least one projection angle".into()));
        }
        let phantom = shepp_logan(side)?.into_data();
        let angles = equispaced_angles(n_angles);
        let radon = radon_matrix(side, &angles)?;
        let clean = radon.apply(&phantom)?;
        let noise_variance = one_percent_noise_variance(&clean);
        let y = noisy_measurements(&radon, &phantom, noise_variance, seed)?;
        Ok(Self {
            side,
            phantom,
            radon,
            y,
            angles,
            noise_variance,
        })
    }
}
