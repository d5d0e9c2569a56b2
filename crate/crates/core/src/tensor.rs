//! Small dense tensors over an `n`-dimensional index range.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use crate::jet::Jet;

/// Rank-`R` tensor with every index running over `0..dim`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor<T, const R: usize> {
    dim: usize,
    data: Vec<T>,
}

pub type Vector = Tensor<f64, 1>;
pub type Matrix = Tensor<f64, 2>;
pub type Tensor3 = Tensor<f64, 3>;
pub type Tensor4 = Tensor<f64, 4>;

/// All multi-indices of rank `R` over `0..dim` in row-major order.
pub fn indices<const R: usize>(dim: usize) -> impl Iterator<Item = [usize; R]> {
    let total = dim.pow(R as u32);
    (0..total).map(move |mut flat| {
        let mut idx = [0usize; R];
        for slot in idx.iter_mut().rev() {
            *slot = flat % dim;
            flat /= dim;
        }
        idx
    })
}

impl<T, const R: usize> Tensor<T, R> {
    pub fn from_fn(dim: usize, mut f: impl FnMut([usize; R]) -> T) -> Self {
        Tensor {
            dim,
            data: indices::<R>(dim).map(&mut f).collect(),
        }
    }

    pub fn try_from_fn<E>(
        dim: usize,
        mut f: impl FnMut([usize; R]) -> Result<T, E>,
    ) -> Result<Self, E> {
        let data = indices::<R>(dim)
            .map(&mut f)
            .collect::<Result<Vec<T>, E>>()?;
        Ok(Tensor { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Tensor<U, R> {
        Tensor {
            dim: self.dim,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn try_map<U, E>(&self, f: impl FnMut(&T) -> Result<U, E>) -> Result<Tensor<U, R>, E> {
        Ok(Tensor {
            dim: self.dim,
            data: self.data.iter().map(f).collect::<Result<_, E>>()?,
        })
    }

    pub fn iter(&self) -> impl Iterator<Item = ([usize; R], &T)> {
        indices::<R>(self.dim).zip(self.data.iter())
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    fn offset(&self, idx: &[usize; R]) -> usize {
        idx.iter().fold(0, |acc, &i| {
            debug_assert!(i < self.dim);
            acc * self.dim + i
        })
    }
}

impl<T, const R: usize> Index<[usize; R]> for Tensor<T, R> {
    type Output = T;
    fn index(&self, idx: [usize; R]) -> &T {
        &self.data[self.offset(&idx)]
    }
}

impl<T, const R: usize> IndexMut<[usize; R]> for Tensor<T, R> {
    fn index_mut(&mut self, idx: [usize; R]) -> &mut T {
        let o = self.offset(&idx);
        &mut self.data[o]
    }
}

impl<const R: usize> Tensor<f64, R> {
    pub fn zeros(dim: usize) -> Self {
        Tensor {
            dim,
            data: vec![0.0; dim.pow(R as u32)],
        }
    }

    pub fn from_vec(dim: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), dim.pow(R as u32), "tensor data length");
        Tensor { dim, data }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Index of the entry with the largest magnitude.
    pub fn argmax_abs(&self) -> [usize; R] {
        let (best, _) = self.iter().fold(([0; R], -1.0), |(bi, bv), (i, v)| {
            if v.abs() > bv {
                (i, v.abs())
            } else {
                (bi, bv)
            }
        });
        best
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| v * c)
    }

    /// Largest deviation between entries related by an index permutation.
    pub fn symmetry_defect(&self) -> f64 {
        self.symmetry_defect_from(0)
    }

    /// Like [`symmetry_defect`](Self::symmetry_defect) over the indices from `start` on.
    pub fn symmetry_defect_from(&self, start: usize) -> f64 {
        let mut worst = 0.0f64;
        for (idx, &v) in self.iter() {
            let mut sorted = idx;
            sorted[start..].sort_unstable();
            worst = worst.max((v - self[sorted]).abs());
        }
        worst
    }
}

impl<const R: usize> Add for &Tensor<f64, R> {
    type Output = Tensor<f64, R>;
    fn add(self, rhs: Self) -> Tensor<f64, R> {
        assert_eq!(self.dim, rhs.dim);
        Tensor {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl<const R: usize> Sub for &Tensor<f64, R> {
    type Output = Tensor<f64, R>;
    fn sub(self, rhs: Self) -> Tensor<f64, R> {
        assert_eq!(self.dim, rhs.dim);
        Tensor {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl<const R: usize> Tensor<Jet, R> {
    /// Point values of a jet-valued tensor.
    pub fn values(&self) -> Tensor<f64, R> {
        self.map(Jet::value)
    }
}

/// Minimal ring interface shared by `f64` and [`Jet`] for small-matrix algebra.
pub trait Ring: Clone + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> {}
impl Ring for f64 {}
impl Ring for Jet {}

/// Determinant and adjugate of a 2x2 or 3x3 matrix.
pub fn det_adjugate<S: Ring>(m: &Tensor<S, 2>) -> (S, Tensor<S, 2>) {
    let a = |i: usize, j: usize| m[[i, j]].clone();
    match m.dim() {
        2 => {
            let det = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
            let zero = a(0, 0) - a(0, 0);
            let adj = Tensor {
                dim: 2,
                data: vec![a(1, 1), zero.clone() - a(0, 1), zero - a(1, 0), a(0, 0)],
            };
            (det, adj)
        }
        3 => {
            let cof = |i: usize, j: usize| {
                let (r0, r1) = match i {
                    0 => (1, 2),
                    1 => (0, 2),
                    _ => (0, 1),
                };
                let (c0, c1) = match j {
                    0 => (1, 2),
                    1 => (0, 2),
                    _ => (0, 1),
                };
                let minor = a(r0, c0) * a(r1, c1) - a(r0, c1) * a(r1, c0);
                if (i + j).is_multiple_of(2) {
                    minor
                } else {
                    a(0, 0) - a(0, 0) - minor
                }
            };
            let det = a(0, 0) * cof(0, 0) + a(0, 1) * cof(0, 1) + a(0, 2) * cof(0, 2);
            // adjugate is the transposed cofactor matrix
            let adj = Tensor::from_fn(3, |[i, j]| cof(j, i));
            (det, adj)
        }
        n => panic!("det_adjugate supports dimensions 2 and 3, got {n}"),
    }
}

/// Contracts `a^i b_i`.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `m^{ij} v_j`
pub fn mat_vec(m: &Matrix, v: &[f64]) -> Vec<f64> {
    let n = m.dim();
    (0..n)
        .map(|i| (0..n).map(|j| m[[i, j]] * v[j]).sum())
        .collect()
}
