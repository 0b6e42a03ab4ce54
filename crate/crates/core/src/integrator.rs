//! Integral representation of the immersion:
//!
//! ```text
//! x(z) = x(z0) + 2 Re int_{z0}^{z} ( e^{mu1 x3} phi1, e^{mu2 x3} phi2, phi3 ) dz
//! ```
//!
//! The third integrand does not involve `x3`, so `x3` is integrated first and
//! then substituted into the exponential weights of the other two. Integrals
//! run along staircase paths of grid edges with the trapezoidal rule, and every
//! node's value is accumulated in a fixed order.

use num_complex::Complex64;

use crate::ambient::{group_mul, GroupPoint, Params};
use crate::error::{Error, Result};
use crate::gaussdata::{max_residual, phi_from_fg, phi_residuals, GaussData, PhiTriple};
use crate::grid::{ComplexField, ComplexGrid, Field, RealField};
use crate::stencil::{d_z, StencilOrder};

/// Max-norm residual above which [`integrate_surface_with`] refuses data.
pub const DEFAULT_GATE: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PathOrder {
    /// Along the base node's row first, then along the target's column.
    #[default]
    RightThenUp,
    /// Along the base node's column first, then along the target's row.
    UpThenRight,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrateOptions {
    pub base: GroupPoint,
    /// Grid node playing the role of `z0`.
    pub base_node: (usize, usize),
    pub path: PathOrder,
    pub gate: f64,
    /// Integrate even when the residual gate fails.
    pub force: bool,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        IntegrateOptions {
            base: GroupPoint::IDENTITY,
            base_node: (0, 0),
            path: PathOrder::RightThenUp,
            gate: DEFAULT_GATE,
            force: false,
        }
    }
}

impl IntegrateOptions {
    pub fn with_base(base: GroupPoint) -> Self {
        IntegrateOptions {
            base,
            ..Default::default()
        }
    }
}

/// A map of the grid into `G(mu1, mu2)` given by its group coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Immersion {
    pub x1: RealField,
    pub x2: RealField,
    pub x3: RealField,
    pub params: Params,
    pub basepoint: GroupPoint,
}

impl Immersion {
    pub fn new(x1: RealField, x2: RealField, x3: RealField, params: Params, basepoint: GroupPoint) -> Result<Self> {
        if x1.grid() != x2.grid() || x1.grid() != x3.grid() {
            return Err(Error::InvalidGrid(
                "immersion components live on different grids".into(),
            ));
        }
        Ok(Immersion {
            x1,
            x2,
            x3,
            params,
            basepoint,
        })
    }

    /// Immersion sampled from a closed-form parametrization.
    pub fn from_fn(grid: ComplexGrid, params: Params, mut x: impl FnMut(Complex64) -> [f64; 3]) -> Self {
        let pts = Field::from_fn(grid, |_, _, z| x(z));
        let basepoint = {
            let b = pts.at(0, 0);
            GroupPoint::new(b[0], b[1], b[2])
        };
        Immersion {
            x1: pts.map(|p| p[0]),
            x2: pts.map(|p| p[1]),
            x3: pts.map(|p| p[2]),
            params,
            basepoint,
        }
    }

    pub fn grid(&self) -> &ComplexGrid {
        self.x1.grid()
    }

    pub fn point(&self, j: usize, k: usize) -> GroupPoint {
        GroupPoint::new(self.x1.at(j, k), self.x2.at(j, k), self.x3.at(j, k))
    }

    /// Image under the left translation `L_a`.
    pub fn left_translated(&self, a: GroupPoint) -> Immersion {
        let p = self.params;
        let pts = Field::from_fn(*self.grid(), |j, k, _| group_mul(a, self.point(j, k), p));
        Immersion {
            x1: pts.map(|q| q.x1),
            x2: pts.map(|q| q.x2),
            x3: pts.map(|q| q.x3),
            params: p,
            basepoint: group_mul(a, self.basepoint, p),
        }
    }
}

/// Per-component maximum of `|loop integral| / cell area` over grid cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathReport {
    pub max_loop_defect: [f64; 3],
    pub loops_tested: usize,
}

impl PathReport {
    pub fn max(&self) -> f64 {
        self.max_loop_defect.iter().cloned().fold(0.0, f64::max)
    }
}

/// Integrates the closed-if-exact form `2 Re(w dz)` from `base_node`, where
/// `w` holds the coefficient at each node.
fn integrate_form(w: &ComplexField, base_value: f64, base_node: (usize, usize), path: PathOrder) -> RealField {
    let grid = *w.grid();
    let (j0, k0) = base_node;
    let step_re = Complex64::new(grid.dz_re, 0.0);
    let step_im = Complex64::new(0.0, grid.dz_im);
    // trapezoid for 2 Re(w dz) on the edge a -> b
    let edge = |a: Complex64, b: Complex64, dz: Complex64| ((a + b) * dz).re;
    let mut out = Field::constant(grid, 0.0);
    out.set(j0, k0, base_value);
    match path {
        PathOrder::RightThenUp => {
            for j in j0 + 1..grid.n_re {
                let v = out.at(j - 1, k0) + edge(w.at(j - 1, k0), w.at(j, k0), step_re);
                out.set(j, k0, v);
            }
            for j in (0..j0).rev() {
                let v = out.at(j + 1, k0) - edge(w.at(j, k0), w.at(j + 1, k0), step_re);
                out.set(j, k0, v);
            }
            for j in 0..grid.n_re {
                for k in k0 + 1..grid.n_im {
                    let v = out.at(j, k - 1) + edge(w.at(j, k - 1), w.at(j, k), step_im);
                    out.set(j, k, v);
                }
                for k in (0..k0).rev() {
                    let v = out.at(j, k + 1) - edge(w.at(j, k), w.at(j, k + 1), step_im);
                    out.set(j, k, v);
                }
            }
        }
        PathOrder::UpThenRight => {
            for k in k0 + 1..grid.n_im {
                let v = out.at(j0, k - 1) + edge(w.at(j0, k - 1), w.at(j0, k), step_im);
                out.set(j0, k, v);
            }
            for k in (0..k0).rev() {
                let v = out.at(j0, k + 1) - edge(w.at(j0, k), w.at(j0, k + 1), step_im);
                out.set(j0, k, v);
            }
            for k in 0..grid.n_im {
                for j in j0 + 1..grid.n_re {
                    let v = out.at(j - 1, k) + edge(w.at(j - 1, k), w.at(j, k), step_re);
                    out.set(j, k, v);
                }
                for j in (0..j0).rev() {
                    let v = out.at(j + 1, k) - edge(w.at(j, k), w.at(j + 1, k), step_re);
                    out.set(j, k, v);
                }
            }
        }
    }
    out
}

fn check_base_node(grid: &ComplexGrid, node: (usize, usize)) -> Result<()> {
    if node.0 >= grid.n_re || node.1 >= grid.n_im {
        return Err(Error::InvalidConfig(format!(
            "base node ({}, {}) outside the {}x{} grid",
            node.0, node.1, grid.n_re, grid.n_im
        )));
    }
    Ok(())
}

/// `x3 = base + 2 Re int f g dz` along the default staircase from the lower-left node.
pub fn integrate_x3(d: &GaussData, base: f64) -> RealField {
    let phi3 = d.f.zip_map(&d.g, |f, g| f * g);
    integrate_form(&phi3, base, (0, 0), PathOrder::RightThenUp)
}

fn weighted(phi: &ComplexField, x3: &RealField, mu: f64) -> Result<ComplexField> {
    Field::try_from_fn(*phi.grid(), |j, k, _| {
        let w = (mu * x3.at(j, k)).exp();
        if !w.is_finite() {
            return Err(Error::Overflow(j, k));
        }
        Ok(w * phi.at(j, k))
    })
}

fn integrate_triple(t: &PhiTriple, p: Params, opts: &IntegrateOptions) -> Result<Immersion> {
    let grid = *t.grid();
    check_base_node(&grid, opts.base_node)?;
    let x3 = integrate_form(&t.phi3, opts.base.x3, opts.base_node, opts.path);
    let w1 = weighted(&t.phi1, &x3, p.mu1)?;
    let w2 = weighted(&t.phi2, &x3, p.mu2)?;
    let x1 = integrate_form(&w1, opts.base.x1, opts.base_node, opts.path);
    let x2 = integrate_form(&w2, opts.base.x2, opts.base_node, opts.path);
    for (j, k) in grid.nodes() {
        if !(x1.at(j, k).is_finite() && x2.at(j, k).is_finite() && x3.at(j, k).is_finite()) {
            return Err(Error::Overflow(j, k));
        }
    }
    Immersion::new(x1, x2, x3, p, opts.base)
}

/// Weakly conformal harmonic map from Weierstrass data, with default options.
pub fn integrate_surface(d: &GaussData, p: Params, base: GroupPoint) -> Result<Immersion> {
    integrate_surface_with(d, p, &IntegrateOptions::with_base(base))
}

pub fn integrate_surface_with(d: &GaussData, p: Params, opts: &IntegrateOptions) -> Result<Immersion> {
    if !opts.force {
        let max = max_residual(d, p, StencilOrder::Second);
        if !(max <= opts.gate) {
            return Err(Error::ResidualTooLarge {
                max,
                threshold: opts.gate,
            });
        }
    }
    integrate_triple(&phi_from_fg(d), p, opts)
}

/// Harmonic (not necessarily conformal) map from a triple solving the
/// `phi`-form of the harmonic map system.
pub fn integrate_harmonic_map(omega: &PhiTriple, p: Params, base: GroupPoint) -> Result<Immersion> {
    integrate_harmonic_map_with(omega, p, &IntegrateOptions::with_base(base))
}

pub fn integrate_harmonic_map_with(omega: &PhiTriple, p: Params, opts: &IntegrateOptions) -> Result<Immersion> {
    if !opts.force {
        let max = phi_residuals(omega, p, StencilOrder::Second)
            .iter()
            .map(|r| r.max_norm())
            .fold(0.0, f64::max);
        if !(max <= opts.gate) {
            return Err(Error::ResidualTooLarge {
                max,
                threshold: opts.gate,
            });
        }
    }
    integrate_triple(omega, p, opts)
}

/// Loop integrals of the three representation 1-forms around every grid cell,
/// divided by the cell area. `x3` in the weights comes from [`integrate_x3`].
pub fn loop_defect(d: &GaussData, p: Params) -> PathReport {
    let grid = *d.grid();
    let t = phi_from_fg(d);
    let x3 = integrate_x3(d, 0.0);
    let forms = [
        t.phi1.zip_map(&x3, |phi, &x| (p.mu1 * x).exp() * phi),
        t.phi2.zip_map(&x3, |phi, &x| (p.mu2 * x).exp() * phi),
        t.phi3.clone(),
    ];
    let dx = Complex64::new(grid.dz_re, 0.0);
    let dy = Complex64::new(0.0, grid.dz_im);
    let area = grid.cell_area();
    let mut max = [0.0f64; 3];
    for k in 0..grid.n_im - 1 {
        for j in 0..grid.n_re - 1 {
            for (m, w) in max.iter_mut().zip(&forms) {
                let (a, b, c, e) = (w.at(j, k), w.at(j + 1, k), w.at(j + 1, k + 1), w.at(j, k + 1));
                // counterclockwise: bottom, right, top, left
                let circ = ((a + b) * dx).re + ((b + c) * dy).re - ((e + c) * dx).re - ((a + e) * dy).re;
                let v = circ.abs() / area;
                *m = if v.is_nan() { f64::NAN } else { m.max(v) };
            }
        }
    }
    PathReport {
        max_loop_defect: max,
        loops_tested: (grid.n_re - 1) * (grid.n_im - 1),
    }
}

/// Max-norm of `d x3 / dz - phi3`, the finite-difference consistency of the
/// height function with the data.
pub fn phi3_consistency(s: &Immersion, d: &GaussData) -> f64 {
    let x3 = s.x3.map(|&v| Complex64::new(v, 0.0));
    let x3z = d_z(&x3, StencilOrder::Second);
    Field::from_fn(*s.grid(), |j, k, _| (x3z.at(j, k) - d.f.at(j, k) * d.g.at(j, k)).norm()).max_abs()
}
