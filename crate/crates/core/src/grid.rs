//! Rectangular grids over a coordinate region of the complex plane, and
//! node-indexed fields living on them.
//!
//! Node `(j, k)` sits at `z0 + j*dz_re + i*k*dz_im`; `j` runs along the real
//! axis and `k` along the imaginary axis. Storage is row-major in `k`
//! (`index = k * n_re + j`), so a fixed `k` is one contiguous row.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexGrid {
    pub z0: Complex64,
    pub dz_re: f64,
    pub dz_im: f64,
    pub n_re: usize,
    pub n_im: usize,
}

impl ComplexGrid {
    pub fn new(z0: Complex64, dz_re: f64, dz_im: f64, n_re: usize, n_im: usize) -> Result<Self> {
        let grid = ComplexGrid {
            z0,
            dz_re,
            dz_im,
            n_re,
            n_im,
        };
        grid.validate()?;
        Ok(grid)
    }

    /// Grid covering `[re0, re1] x [im0, im1]` with `n_re x n_im` nodes,
    /// corners included.
    pub fn from_bounds(re0: f64, im0: f64, re1: f64, im1: f64, n_re: usize, n_im: usize) -> Result<Self> {
        if n_re < 2 || n_im < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 3x3 nodes, got {n_re}x{n_im}"
            )));
        }
        let dz_re = (re1 - re0) / (n_re - 1) as f64;
        let dz_im = (im1 - im0) / (n_im - 1) as f64;
        Self::new(Complex64::new(re0, im0), dz_re, dz_im, n_re, n_im)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_re < 3 || self.n_im < 3 {
            return Err(Error::InvalidGrid(format!(
                "need at least 3x3 nodes, got {}x{}",
                self.n_re, self.n_im
            )));
        }
        if !(self.dz_re.is_finite() && self.dz_re > 0.0 && self.dz_im.is_finite() && self.dz_im > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "spacings must be finite and positive, got ({}, {})",
                self.dz_re, self.dz_im
            )));
        }
        if !(self.z0.re.is_finite() && self.z0.im.is_finite()) {
            return Err(Error::InvalidGrid("corner z0 is not finite".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.n_re * self.n_im
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, j: usize, k: usize) -> usize {
        k * self.n_re + j
    }

    #[inline]
    pub fn node(&self, j: usize, k: usize) -> Complex64 {
        self.z0 + Complex64::new(j as f64 * self.dz_re, k as f64 * self.dz_im)
    }

    /// Upper-right corner.
    pub fn z1(&self) -> Complex64 {
        self.node(self.n_re - 1, self.n_im - 1)
    }

    pub fn is_boundary(&self, j: usize, k: usize) -> bool {
        j == 0 || k == 0 || j + 1 == self.n_re || k + 1 == self.n_im
    }

    pub fn cell_area(&self) -> f64 {
        self.dz_re * self.dz_im
    }

    /// Grid with every spacing halved over the same rectangle.
    pub fn refined(&self) -> ComplexGrid {
        ComplexGrid {
            z0: self.z0,
            dz_re: self.dz_re / 2.0,
            dz_im: self.dz_im / 2.0,
            n_re: 2 * self.n_re - 1,
            n_im: 2 * self.n_im - 1,
        }
    }

    /// All `(j, k)` pairs, `j` fastest.
    pub fn nodes(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n_im).flat_map(move |k| (0..self.n_re).map(move |j| (j, k)))
    }

    pub fn interior_nodes(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (1..self.n_im - 1).flat_map(move |k| (1..self.n_re - 1).map(move |j| (j, k)))
    }
}

/// Values of type `T` at every node of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Field<T> {
    grid: ComplexGrid,
    data: Vec<T>,
}

pub type ComplexField = Field<Complex64>;
pub type RealField = Field<f64>;

impl<T> Field<T> {
    pub fn from_vec(grid: ComplexGrid, data: Vec<T>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(Error::FieldSize {
                expected: grid.len(),
                got: data.len(),
            });
        }
        Ok(Field { grid, data })
    }

    pub fn from_fn(grid: ComplexGrid, mut f: impl FnMut(usize, usize, Complex64) -> T) -> Self {
        let data = grid.nodes().map(|(j, k)| f(j, k, grid.node(j, k))).collect();
        Field { grid, data }
    }

    pub fn try_from_fn<E>(
        grid: ComplexGrid,
        mut f: impl FnMut(usize, usize, Complex64) -> std::result::Result<T, E>,
    ) -> std::result::Result<Self, E> {
        let data = grid
            .nodes()
            .map(|(j, k)| f(j, k, grid.node(j, k)))
            .collect::<std::result::Result<Vec<_>, E>>()?;
        Ok(Field { grid, data })
    }

    pub fn grid(&self) -> &ComplexGrid {
        &self.grid
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn get(&self, j: usize, k: usize) -> &T {
        &self.data[self.grid.index(j, k)]
    }

    #[inline]
    pub fn get_mut(&mut self, j: usize, k: usize) -> &mut T {
        let i = self.grid.index(j, k);
        &mut self.data[i]
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Field<U> {
        Field {
            grid: self.grid,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn zip_map<U, V>(&self, other: &Field<U>, mut f: impl FnMut(&T, &U) -> V) -> Field<V> {
        debug_assert_eq!(self.grid, other.grid);
        Field {
            grid: self.grid,
            data: self.data.iter().zip(other.data.iter()).map(|(a, b)| f(a, b)).collect(),
        }
    }
}

impl<T: Copy> Field<T> {
    pub fn constant(grid: ComplexGrid, value: T) -> Self {
        Field {
            grid,
            data: vec![value; grid.len()],
        }
    }

    #[inline]
    pub fn at(&self, j: usize, k: usize) -> T {
        self.data[self.grid.index(j, k)]
    }

    #[inline]
    pub fn set(&mut self, j: usize, k: usize, value: T) {
        let i = self.grid.index(j, k);
        self.data[i] = value;
    }
}

impl RealField {
    /// Maximum absolute value over all nodes; 0 for an all-zero field.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl ComplexField {
    pub fn max_norm(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    pub fn conj(&self) -> ComplexField {
        self.map(|v| v.conj())
    }

    /// Maximum of `|value|` over interior nodes only.
    pub fn interior_max_norm(&self) -> f64 {
        self.grid
            .interior_nodes()
            .fold(0.0, |m, (j, k)| m.max(self.at(j, k).norm()))
    }

    /// Index of the first node holding a non-finite value.
    pub fn first_non_finite(&self) -> Option<(usize, usize)> {
        self.grid.nodes().find(|&(j, k)| {
            let v = self.at(j, k);
            !(v.re.is_finite() && v.im.is_finite())
        })
    }
}
