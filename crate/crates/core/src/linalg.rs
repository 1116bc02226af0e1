//! Dense vector kernels shared by the operators and solvers.
//!
//! Matrix-vector products are split over output blocks so that every output
//! entry is accumulated in the same order regardless of the thread count.
//! With the `parallel` feature disabled all kernels run sequentially.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Work (multiply-adds) below which the parallel kernels stay sequential.
#[cfg(feature = "parallel")]
const PAR_MIN_WORK: usize = 1 << 16;

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    // four accumulators let the compiler vectorise without reassociating
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        let i = 4 * c;
        acc[0] += a[i] * b[i];
        acc[1] += a[i + 1] * b[i + 1];
        acc[2] += a[i + 2] * b[i + 2];
        acc[3] += a[i + 3] * b[i + 3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for i in 4 * chunks..a.len() {
        s += a[i] * b[i];
    }
    s
}

#[inline]
pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn norm2_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

/// `y += alpha * x`
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scale(alpha: f64, x: &[f64]) -> Vec<f64> {
    x.iter().map(|v| alpha * v).collect()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub fn all_finite(a: &[f64]) -> bool {
    a.iter().all(|v| v.is_finite())
}

/// `out = M x` for a row-major `rows x cols` matrix.
pub fn gemv(data: &[f64], rows: usize, cols: usize, x: &[f64], out: &mut [f64]) {
    debug_assert_eq!(data.len(), rows * cols);
    debug_assert_eq!(x.len(), cols);
    debug_assert_eq!(out.len(), rows);
    if cols == 0 {
        out.fill(0.0);
        return;
    }
    #[cfg(feature = "parallel")]
    if rows * cols >= PAR_MIN_WORK && rayon::current_num_threads() > 1 {
        out.par_iter_mut()
            .zip(data.par_chunks(cols))
            .for_each(|(o, row)| *o = dot(row, x));
        return;
    }
    for (o, row) in out.iter_mut().zip(data.chunks(cols)) {
        *o = dot(row, x);
    }
}

/// `out = Mᵀ y` for a row-major `rows x cols` matrix.
pub fn gemv_t(data: &[f64], rows: usize, cols: usize, y: &[f64], out: &mut [f64]) {
    debug_assert_eq!(data.len(), rows * cols);
    debug_assert_eq!(y.len(), rows);
    debug_assert_eq!(out.len(), cols);
    #[cfg(feature = "parallel")]
    if rows * cols >= PAR_MIN_WORK && rayon::current_num_threads() > 1 {
        // column blocks: each block walks all rows in order
        let block = cols.div_ceil(rayon::current_num_threads() * 4).max(64);
        out.par_chunks_mut(block)
            .enumerate()
            .for_each(|(b, out_block)| {
                let c0 = b * block;
                let w = out_block.len();
                out_block.fill(0.0);
                for (r, &yr) in y.iter().enumerate() {
                    if yr != 0.0 {
                        let row = &data[r * cols + c0..r * cols + c0 + w];
                        axpy(yr, row, out_block);
                    }
                }
            });
        return;
    }
    out.fill(0.0);
    for (row, &yr) in data.chunks(cols).zip(y) {
        if yr != 0.0 {
            axpy(yr, row, out);
        }
    }
}
