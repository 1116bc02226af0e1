//! Linear operators: dense feature matrices and the periodic lattice gradient.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::linalg;

/// A real linear map with an adjoint.
pub trait LinearMap: Send + Sync {
    fn rows(&self) -> usize;
    fn cols(&self) -> usize;

    /// `out = M x`; lengths are the caller's responsibility.
    fn apply_into(&self, x: &[f64], out: &mut [f64]);

    /// `out = Mᵀ y`; lengths are the caller's responsibility.
    fn adjoint_into(&self, y: &[f64], out: &mut [f64]);

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len("apply", self.cols(), x.len())?;
        let mut out = vec![0.0; self.rows()];
        self.apply_into(x, &mut out);
        Ok(out)
    }

    fn adjoint(&self, y: &[f64]) -> Result<Vec<f64>> {
        check_len("adjoint", self.rows(), y.len())?;
        let mut out = vec![0.0; self.cols()];
        self.adjoint_into(y, &mut out);
        Ok(out)
    }

    /// Materialise as a row-major dense matrix by applying to unit vectors.
    fn to_dense(&self) -> DenseMap {
        let (rows, cols) = (self.rows(), self.cols());
        let mut data = vec![0.0; rows * cols];
        let mut e = vec![0.0; cols];
        let mut col = vec![0.0; rows];
        for j in 0..cols {
            e[j] = 1.0;
            self.apply_into(&e, &mut col);
            for i in 0..rows {
                data[i * cols + j] = col[i];
            }
            e[j] = 0.0;
        }
        DenseMap { rows, cols, data }
    }
}

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMap {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMap {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        check_len("dense matrix data", rows * cols, data.len())?;
        if !linalg::all_finite(&data) {
            return Err(Error::Input("matrix has non-finite entries".into()));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn transpose(&self) -> DenseMap {
        DenseMap::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn to_nalgebra(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    pub fn from_nalgebra(m: &nalgebra::DMatrix<f64>) -> Self {
        DenseMap::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }
}

impl LinearMap for DenseMap {
    fn rows(&self) -> usize {
        self.rows
    }

    fn cols(&self) -> usize {
        self.cols
    }

    fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        linalg::gemv(&self.data, self.rows, self.cols, x, out);
    }

    fn adjoint_into(&self, y: &[f64], out: &mut [f64]) {
        linalg::gemv_t(&self.data, self.rows, self.cols, y, out);
    }
}

/// Side lengths of a periodic lattice with 1 to 3 axes, row-major site order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct GridShape {
    dims: Vec<usize>,
}

impl GridShape {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() || dims.len() > 3 {
            return Err(Error::Parameter(format!(
                "grid must have 1 to 3 axes, got {}",
                dims.len()
            )));
        }
        if let Some(&bad) = dims.iter().find(|&&l| l < 2) {
            return Err(Error::Parameter(format!(
                "every grid side must be at least 2, got {bad}"
            )));
        }
        Ok(Self { dims })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn ndim(&self) -> usize {
        self.dims.len()
    }

    /// Number of lattice sites.
    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Row-major stride of each axis.
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.dims.len()];
        for a in (0..self.dims.len().saturating_sub(1)).rev() {
            strides[a] = strides[a + 1] * self.dims[a + 1];
        }
        strides
    }
}

impl TryFrom<Vec<usize>> for GridShape {
    type Error = Error;

    fn try_from(dims: Vec<usize>) -> Result<Self> {
        GridShape::new(dims)
    }
}

impl From<GridShape> for Vec<usize> {
    fn from(shape: GridShape) -> Self {
        shape.dims
    }
}

/// Forward-difference gradient with periodic wraparound.
///
/// Output is site-major: the `d` components of site `k` live at
/// `[k*d, (k+1)*d)`. Component `c` differences along axis `d-1-c`, so in 2D
/// the first component runs along the row (fast axis) and the second down
/// the column.
#[derive(Clone, Debug, PartialEq)]
pub struct GradientOperator {
    shape: GridShape,
    strides: Vec<usize>,
}

impl GradientOperator {
    pub fn new(shape: GridShape) -> Self {
        let strides = shape.strides();
        Self { shape, strides }
    }

    pub fn shape(&self) -> &GridShape {
        &self.shape
    }

    /// Components per group (the lattice dimension).
    pub fn group_size(&self) -> usize {
        self.shape.ndim()
    }

    /// Index of the periodic neighbour of `site` one step along `axis`.
    #[inline]
    fn forward(&self, site: usize, axis: usize) -> usize {
        let stride = self.strides[axis];
        let len = self.shape.dims[axis];
        let coord = (site / stride) % len;
        if coord + 1 == len {
            site + stride - len * stride
        } else {
            site + stride
        }
    }

    #[inline]
    fn backward(&self, site: usize, axis: usize) -> usize {
        let stride = self.strides[axis];
        let len = self.shape.dims[axis];
        let coord = (site / stride) % len;
        if coord == 0 {
            site + (len - 1) * stride
        } else {
            site - stride
        }
    }

    pub fn grad_apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.apply(x)
    }

    pub fn grad_adjoint(&self, g: &[f64]) -> Result<Vec<f64>> {
        self.adjoint(g)
    }
}

impl LinearMap for GradientOperator {
    fn rows(&self) -> usize {
        self.shape.len() * self.shape.ndim()
    }

    fn cols(&self) -> usize {
        self.shape.len()
    }

    fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        let d = self.shape.ndim();
        for k in 0..x.len() {
            for c in 0..d {
                let axis = d - 1 - c;
                out[k * d + c] = x[self.forward(k, axis)] - x[k];
            }
        }
    }

    fn adjoint_into(&self, g: &[f64], out: &mut [f64]) {
        let d = self.shape.ndim();
        for (k, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for c in 0..d {
                let axis = d - 1 - c;
                acc += g[self.backward(k, axis) * d + c] - g[k * d + c];
            }
            *o = acc;
        }
    }
}

/// Eigenvalues of the periodic Laplacian `∇ᵀ∇`, indexed like the
/// row-major multidimensional DFT: `Σ_a 2 - 2 cos(2π k_a / L_a)`.
pub fn laplacian_spectrum(shape: &GridShape) -> Vec<f64> {
    let dims = shape.dims();
    let strides = shape.strides();
    let per_axis: Vec<Vec<f64>> = dims
        .iter()
        .map(|&l| {
            (0..l)
                .map(|k| 2.0 - 2.0 * (2.0 * PI * k as f64 / l as f64).cos())
                .collect()
        })
        .collect();
    (0..shape.len())
        .map(|idx| {
            dims.iter()
                .enumerate()
                .map(|(a, &l)| per_axis[a][(idx / strides[a]) % l])
                .sum()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(d: &[usize]) -> GradientOperator {
        GradientOperator::new(GridShape::new(d.to_vec()).unwrap())
    }

    #[test]
    fn shape_validation() {
        assert!(GridShape::new(vec![]).is_err());
        assert!(GridShape::new(vec![1, 4]).is_err());
        assert!(GridShape::new(vec![2, 2, 2, 2]).is_err());
        let s = GridShape::new(vec![2, 3, 4]).unwrap();
        assert_eq!(s.len(), 24);
        assert_eq!(s.strides(), vec![12, 4, 1]);
    }

    #[test]
    fn gradient_1d_example() {
        let k = grid(&[3]);
        assert_eq!(k.grad_apply(&[1.0, 2.0, 4.0]).unwrap(), vec![1.0, 2.0, -3.0]);
    }

    #[test]
    fn gradient_2d_example() {
        let (a, b, c, d) = (1.0, 2.0, 4.0, 8.0);
        let g = grid(&[2, 2]).grad_apply(&[a, b, c, d]).unwrap();
        let want = [b - a, c - a, a - b, d - b, d - c, a - c, c - d, b - d];
        assert_eq!(g, want);
    }

    #[test]
    fn constant_image_has_zero_gradient() {
        let k = grid(&[3, 4, 5]);
        let g = k.grad_apply(&vec![2.5; 60]).unwrap();
        assert!(g.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn adjoint_of_gradient_is_laplacian_1d() {
        let k = grid(&[3]);
        let g = k.grad_apply(&[1.0, 2.0, 4.0]).unwrap();
        // circulant [[2,-1,-1],[-1,2,-1],[-1,-1,2]] applied to (1,2,4)
        assert_eq!(k.grad_adjoint(&g).unwrap(), vec![-4.0, -1.0, 5.0]);
        assert_eq!(k.grad_adjoint(&[0.0; 3]).unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn dimension_errors() {
        let k = grid(&[3, 3]);
        assert!(matches!(k.grad_apply(&[0.0; 8]), Err(Error::Dimension { .. })));
        assert!(matches!(k.grad_adjoint(&[0.0; 9]), Err(Error::Dimension { .. })));
        assert!(DenseMap::new(2, 2, vec![0.0; 3]).is_err());
        assert!(DenseMap::new(1, 1, vec![f64::NAN]).is_err());
    }

    #[test]
    fn spectrum_1d_and_2x2() {
        let s = laplacian_spectrum(&GridShape::new(vec![5]).unwrap());
        for (k, v) in s.iter().enumerate() {
            let want = 2.0 - 2.0 * (2.0 * PI * k as f64 / 5.0).cos();
            assert!((v - want).abs() < 1e-15);
        }
        let mut s = laplacian_spectrum(&GridShape::new(vec![2, 2]).unwrap());
        s.sort_by(f64::total_cmp);
        assert_eq!(s, vec![0.0, 4.0, 4.0, 8.0]);
    }

    #[test]
    fn dense_identity_roundtrip() {
        let i3 = DenseMap::identity(3);
        assert_eq!(i3.apply(&[1.0, 2.0, 3.0]).unwrap(), vec![1.0, 2.0, 3.0]);
        assert_eq!(i3.to_dense(), i3);
        assert_eq!(i3.transpose(), i3);
    }
}
