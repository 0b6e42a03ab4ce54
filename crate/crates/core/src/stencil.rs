//! Finite-difference stencils on [`ComplexGrid`] fields.
//!
//! First derivatives come in two orders: centered second-order in the interior
//! with one-sided second-order closures at the boundary (the default), and a
//! five-point fourth-order variant with matching one-sided closures. Wirtinger
//! derivatives are assembled componentwise as
//! `d/dz = (d/dx - i d/dy) / 2` and `d/dzbar = (d/dx + i d/dy) / 2`.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::grid::{ComplexField, ComplexGrid, Field};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StencilOrder {
    #[default]
    Second,
    Fourth,
}

impl StencilOrder {
    /// Minimum number of nodes per axis the stencil needs.
    pub fn min_nodes(self) -> usize {
        match self {
            StencilOrder::Second => 3,
            StencilOrder::Fourth => 5,
        }
    }
}

pub trait FieldValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {}

impl<T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>> FieldValue for T {}

#[derive(Clone, Copy)]
enum Axis {
    Re,
    Im,
}

fn axis_len(grid: &ComplexGrid, axis: Axis) -> (usize, f64) {
    match axis {
        Axis::Re => (grid.n_re, grid.dz_re),
        Axis::Im => (grid.n_im, grid.dz_im),
    }
}

/// Derivative at position `i` of a line of `n` samples spaced `h`, read through `at`.
#[inline]
fn line_derivative<T: FieldValue>(at: impl Fn(usize) -> T, i: usize, n: usize, h: f64, order: StencilOrder) -> T {
    match order {
        StencilOrder::Second => {
            let s = 1.0 / (2.0 * h);
            if i == 0 {
                (at(1) * 4.0 - at(0) * 3.0 - at(2)) * s
            } else if i + 1 == n {
                (at(n - 1) * 3.0 - at(n - 2) * 4.0 + at(n - 3)) * s
            } else {
                (at(i + 1) - at(i - 1)) * s
            }
        }
        StencilOrder::Fourth => {
            let s = 1.0 / (12.0 * h);
            if i == 0 {
                (at(1) * 48.0 - at(0) * 25.0 - at(2) * 36.0 + at(3) * 16.0 - at(4) * 3.0) * s
            } else if i == 1 {
                (at(2) * 18.0 - at(0) * 3.0 - at(1) * 10.0 - at(3) * 6.0 + at(4)) * s
            } else if i + 2 == n {
                (at(n - 1) * 3.0 + at(n - 2) * 10.0 - at(n - 3) * 18.0 + at(n - 4) * 6.0 - at(n - 5)) * s
            } else if i + 1 == n {
                (at(n - 1) * 25.0 - at(n - 2) * 48.0 + at(n - 3) * 36.0 - at(n - 4) * 16.0 + at(n - 5) * 3.0) * s
            } else {
                (at(i - 2) - at(i - 1) * 8.0 + at(i + 1) * 8.0 - at(i + 2)) * s
            }
        }
    }
}

/// Second derivative, second order; one-sided four-point closure at the ends.
#[inline]
fn line_second_derivative<T: FieldValue>(at: impl Fn(usize) -> T, i: usize, n: usize, h: f64) -> T {
    let s = 1.0 / (h * h);
    if n < 4 {
        // three nodes: the centered formula is the only second-order choice
        let c = i.clamp(1, n - 2);
        return (at(c + 1) - at(c) * 2.0 + at(c - 1)) * s;
    }
    if i == 0 {
        (at(0) * 2.0 - at(1) * 5.0 + at(2) * 4.0 - at(3)) * s
    } else if i + 1 == n {
        (at(n - 1) * 2.0 - at(n - 2) * 5.0 + at(n - 3) * 4.0 - at(n - 4)) * s
    } else {
        (at(i + 1) - at(i) * 2.0 + at(i - 1)) * s
    }
}

fn derivative<T: FieldValue>(f: &Field<T>, axis: Axis, order: StencilOrder) -> Field<T> {
    let grid = *f.grid();
    let (n, h) = axis_len(&grid, axis);
    assert!(n >= order.min_nodes(), "grid too small for {order:?} stencil");
    Field::from_fn(grid, |j, k, _| match axis {
        Axis::Re => line_derivative(|i| f.at(i, k), j, n, h, order),
        Axis::Im => line_derivative(|i| f.at(j, i), k, n, h, order),
    })
}

fn second_derivative<T: FieldValue>(f: &Field<T>, axis: Axis) -> Field<T> {
    let grid = *f.grid();
    let (n, h) = axis_len(&grid, axis);
    Field::from_fn(grid, |j, k, _| match axis {
        Axis::Re => line_second_derivative(|i| f.at(i, k), j, n, h),
        Axis::Im => line_second_derivative(|i| f.at(j, i), k, n, h),
    })
}

/// `d/d(Re z)`.
pub fn d_re<T: FieldValue>(f: &Field<T>, order: StencilOrder) -> Field<T> {
    derivative(f, Axis::Re, order)
}

/// `d/d(Im z)`.
pub fn d_im<T: FieldValue>(f: &Field<T>, order: StencilOrder) -> Field<T> {
    derivative(f, Axis::Im, order)
}

pub fn d2_re<T: FieldValue>(f: &Field<T>) -> Field<T> {
    second_derivative(f, Axis::Re)
}

pub fn d2_im<T: FieldValue>(f: &Field<T>) -> Field<T> {
    second_derivative(f, Axis::Im)
}

/// Mixed derivative `d^2/(d Re z d Im z)`, as the composition of the two
/// second-order first-derivative stencils.
pub fn d_re_im<T: FieldValue>(f: &Field<T>) -> Field<T> {
    d_im(&d_re(f, StencilOrder::Second), StencilOrder::Second)
}

pub fn d_z(f: &ComplexField, order: StencilOrder) -> ComplexField {
    let fx = d_re(f, order);
    let fy = d_im(f, order);
    fx.zip_map(&fy, |a, b| 0.5 * (a - Complex64::i() * b))
}

pub fn d_zbar(f: &ComplexField, order: StencilOrder) -> ComplexField {
    let fx = d_re(f, order);
    let fy = d_im(f, order);
    fx.zip_map(&fy, |a, b| 0.5 * (a + Complex64::i() * b))
}

/// `d^2/(dz dzbar) = (d^2/dx^2 + d^2/dy^2) / 4`.
pub fn d_z_zbar(f: &ComplexField) -> ComplexField {
    let fxx = d2_re(f);
    let fyy = d2_im(f);
    fxx.zip_map(&fyy, |a, b| 0.25 * (a + b))
}
