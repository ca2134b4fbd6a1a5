//! Dense kernels, activations, initializers and the seeded generator.
//!
//! All training math runs in `f64`. Vectors are plain `Vec<f64>` / `&[f64]`;
//! matrices are row-major [`Matrix`] values.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length does not match {rows}x{cols}");
        Matrix { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.data[c * self.rows + r] = self.data[r * self.cols + c];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[r * self.cols + k];
                if a == 0.0 {
                    continue;
                }
                let orow = other.row(k);
                let dst = &mut out.data[r * other.cols..(r + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        out
    }

    /// `out += self · x`
    #[inline]
    pub fn matvec_acc(&self, x: &[f64], out: &mut [f64]) {
        assert_eq!(self.cols, x.len(), "matvec: cols {} != |x| {}", self.cols, x.len());
        assert_eq!(self.rows, out.len(), "matvec: rows {} != |out| {}", self.rows, out.len());
        for (r, o) in out.iter_mut().enumerate() {
            *o += dot(self.row(r), x);
        }
    }

    /// `out += selfᵀ · y`
    #[inline]
    pub fn matvec_t_acc(&self, y: &[f64], out: &mut [f64]) {
        assert_eq!(self.rows, y.len(), "matvecᵀ: rows {} != |y| {}", self.rows, y.len());
        assert_eq!(self.cols, out.len(), "matvecᵀ: cols {} != |out| {}", self.cols, out.len());
        for (r, &yr) in y.iter().enumerate() {
            if yr == 0.0 {
                continue;
            }
            axpy(yr, self.row(r), out);
        }
    }

    /// `self += y · xᵀ`
    #[inline]
    pub fn outer_acc(&mut self, y: &[f64], x: &[f64]) {
        assert_eq!(self.rows, y.len(), "outer: rows mismatch");
        assert_eq!(self.cols, x.len(), "outer: cols mismatch");
        for (r, &yr) in y.iter().enumerate() {
            if yr == 0.0 {
                continue;
            }
            let cols = self.cols;
            axpy(yr, x, &mut self.data[r * cols..(r + 1) * cols]);
        }
    }

    pub fn fill(&mut self, v: f64) {
        self.data.iter_mut().for_each(|e| *e = v);
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    // Four independent accumulators; fixed order keeps results reproducible.
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for k in 0..chunks {
        let i = 4 * k;
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

/// `y += alpha · x`
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Cosine similarity; zero when either vector has zero norm.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "cosine: length mismatch");
    let denom = norm(a) * norm(b);
    if denom == 0.0 {
        0.0
    } else {
        dot(a, b) / denom
    }
}

/// Returns `w·x + b`.
pub fn affine(w: &Matrix, x: &[f64], b: &[f64]) -> Vec<f64> {
    assert_eq!(w.rows(), b.len(), "affine: W.rows {} != |b| {}", w.rows(), b.len());
    let mut y = b.to_vec();
    w.matvec_acc(x, &mut y);
    y
}

/// Softmax via max subtraction; panics on empty input.
pub fn softmax_stable(u: &[f64]) -> Vec<f64> {
    assert!(!u.is_empty(), "softmax of an empty vector");
    let max = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = u.iter().map(|&v| (v - max).exp()).collect();
    let z: f64 = out.iter().sum();
    out.iter_mut().for_each(|p| *p /= z);
    out
}

/// `ln Σ exp(u)` computed stably.
pub fn log_sum_exp(u: &[f64]) -> f64 {
    assert!(!u.is_empty(), "log-sum-exp of an empty vector");
    let max = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + u.iter().map(|&v| (v - max).exp()).sum::<f64>().ln()
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Deterministic generator; one per worker.
#[derive(Clone, Debug)]
pub struct SeededRng {
    seed: u64,
    inner: ChaCha8Rng,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        SeededRng { seed, inner: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent generator for a named sub-stream.
    pub fn derive(&self, stream: u64) -> SeededRng {
        let mut inner = ChaCha8Rng::seed_from_u64(self.seed);
        inner.set_stream(stream);
        SeededRng { seed: self.seed, inner }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.gen()
    }

    /// Uniform draw in `[lo, hi]`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.inner.gen_range(lo..=hi)
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    pub fn below(&mut self, n: usize) -> usize {
        self.inner.gen_range(0..n)
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        use rand::seq::SliceRandom;
        items.shuffle(&mut self.inner);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitMode {
    /// i.i.d. in `[-a, a]`
    Uniform(f64),
    /// i.i.d. in `±sqrt(6 / (rows + cols))`
    Glorot,
    /// Square orthogonal matrix.
    Orthogonal,
}

pub fn init_matrix(rows: usize, cols: usize, mode: InitMode, rng: &mut SeededRng) -> Matrix {
    assert!(rows >= 1 && cols >= 1, "init_matrix: dimensions must be positive");
    match mode {
        InitMode::Uniform(a) => uniform_matrix(rows, cols, a, rng),
        InitMode::Glorot => {
            let a = (6.0 / (rows + cols) as f64).sqrt();
            uniform_matrix(rows, cols, a, rng)
        }
        InitMode::Orthogonal => {
            assert_eq!(rows, cols, "orthogonal init requires a square matrix");
            orthogonal(rows, rng)
        }
    }
}

fn uniform_matrix(rows: usize, cols: usize, a: f64, rng: &mut SeededRng) -> Matrix {
    let data = (0..rows * cols).map(|_| rng.uniform(-a, a)).collect();
    Matrix::from_vec(rows, cols, data)
}

/// Q factor of a standard-normal matrix. Gram-Schmidt with a second
/// reorthogonalization pass; the implied triangular factor has a positive
/// diagonal, which fixes the sign of each column.
fn orthogonal(n: usize, rng: &mut SeededRng) -> Matrix {
    // Work on columns stored contiguously.
    let mut cols: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..n).map(|_| rng.standard_normal()).collect())
        .collect();
    for j in 0..n {
        for _pass in 0..2 {
            for k in 0..j {
                let (done, rest) = cols.split_at_mut(j);
                let proj = dot(&done[k], &rest[0]);
                axpy(-proj, &done[k], &mut rest[0]);
            }
        }
        let nrm = norm(&cols[j]);
        assert!(nrm > 0.0, "degenerate draw in orthogonal init");
        cols[j].iter_mut().for_each(|v| *v /= nrm);
    }
    let mut m = Matrix::zeros(n, n);
    for (c, col) in cols.iter().enumerate() {
        for (r, &v) in col.iter().enumerate() {
            m.set(r, c, v);
        }
    }
    m
}

/// Central-difference gradient of `f` at `x`.
pub fn finite_difference_grad<F>(mut f: F, x: &[f64], epsilon: f64) -> Result<Vec<f64>>
where
    F: FnMut(&[f64]) -> f64,
{
    assert!(epsilon > 0.0, "finite difference step must be positive");
    let mut probe = x.to_vec();
    let mut grad = Vec::with_capacity(x.len());
    for k in 0..x.len() {
        let orig = probe[k];
        probe[k] = orig + epsilon;
        let plus = f(&probe);
        probe[k] = orig - epsilon;
        let minus = f(&probe);
        probe[k] = orig;
        if !plus.is_finite() || !minus.is_finite() {
            return Err(Error::Oracle {
                index: k,
                msg: format!("f(x+e)={plus}, f(x-e)={minus}"),
            });
        }
        grad.push((plus - minus) / (2.0 * epsilon));
    }
    Ok(grad)
}
