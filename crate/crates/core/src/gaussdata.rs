//! Weierstrass data `(f, g)` on a grid, the associated `phi`-triple, the
//! normal Gauss map and the first-order system the data must satisfy:
//!
//! ```text
//! f_zbar = 1/2 |f|^2 g { mu1 (1 - gbar^2) - mu2 (1 + gbar^2) }
//! g_zbar = -1/4 { mu1 (1 + g^2)(1 - gbar^2) + mu2 (1 - g^2)(1 + gbar^2) } fbar
//! ```
//!
//! with `phi1 = f (1 - g^2) / 2`, `phi2 = i f (1 + g^2) / 2`, `phi3 = f g`.
//! Only the affine chart of the extended plane is supported: `g = infinity`
//! is reported as an error.

use num_complex::Complex64;

use crate::ambient::{FrameVector, Params};
use crate::error::{Error, Result};
use crate::grid::{ComplexField, ComplexGrid, Field, RealField};
use crate::stencil::{d_z, d_zbar, StencilOrder};

const I: Complex64 = Complex64::new(0.0, 1.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Relative tolerance for branch-point detection: a node is a branch point
/// when its regularity defect is at most this times the grid maximum.
pub const DEFAULT_BRANCH_TOL: f64 = 1e-9;

/// Tolerance on `1 - psi3` below which a normal counts as the north pole.
pub const NORTH_POLE_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct GaussData {
    pub f: ComplexField,
    pub g: ComplexField,
}

impl GaussData {
    pub fn new(f: ComplexField, g: ComplexField) -> Result<Self> {
        if f.grid() != g.grid() {
            return Err(Error::InvalidGrid("f and g live on different grids".into()));
        }
        f.grid().validate()?;
        for (name, field) in [("f", &f), ("g", &g)] {
            if let Some((j, k)) = field.first_non_finite() {
                return Err(Error::DomainViolation(format!(
                    "{name} is not finite at node ({j}, {k})"
                )));
            }
        }
        Ok(GaussData { f, g })
    }

    pub fn from_fn(grid: ComplexGrid, mut fg: impl FnMut(Complex64) -> (Complex64, Complex64)) -> Result<Self> {
        let pairs = Field::from_fn(grid, |_, _, z| fg(z));
        GaussData::new(pairs.map(|p| p.0), pairs.map(|p| p.1))
    }

    pub fn grid(&self) -> &ComplexGrid {
        self.f.grid()
    }
}

/// The triple of `(1,0)`-form coefficients `omega^i = phi^i dz`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiTriple {
    pub phi1: ComplexField,
    pub phi2: ComplexField,
    pub phi3: ComplexField,
}

impl PhiTriple {
    pub fn new(phi1: ComplexField, phi2: ComplexField, phi3: ComplexField) -> Result<Self> {
        if phi1.grid() != phi2.grid() || phi1.grid() != phi3.grid() {
            return Err(Error::InvalidGrid("phi components live on different grids".into()));
        }
        Ok(PhiTriple { phi1, phi2, phi3 })
    }

    pub fn grid(&self) -> &ComplexGrid {
        self.phi1.grid()
    }

    pub fn components(&self) -> [&ComplexField; 3] {
        [&self.phi1, &self.phi2, &self.phi3]
    }
}

/// Unit normal left-translated to the Lie algebra, as frame components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalVector(pub FrameVector);

impl NormalVector {
    /// Normalizes `v`; returns `None` for the zero vector.
    pub fn normalized(v: FrameVector) -> Option<Self> {
        let n = v.norm();
        (n > 0.0 && n.is_finite()).then(|| NormalVector(v.scale(1.0 / n)))
    }

    pub fn frame(&self) -> FrameVector {
        self.0
    }

    pub fn negated(&self) -> NormalVector {
        NormalVector(self.0.scale(-1.0))
    }
}

#[inline]
pub fn phi_at(f: Complex64, g: Complex64) -> [Complex64; 3] {
    let g2 = g * g;
    [0.5 * f * (ONE - g2), 0.5 * I * f * (ONE + g2), f * g]
}

pub fn phi_from_fg(d: &GaussData) -> PhiTriple {
    let phi = d.f.zip_map(&d.g, |&f, &g| phi_at(f, g));
    PhiTriple {
        phi1: phi.map(|p| p[0]),
        phi2: phi.map(|p| p[1]),
        phi3: phi.map(|p| p[2]),
    }
}

pub fn fg_from_phi(t: &PhiTriple) -> Result<GaussData> {
    let grid = *t.grid();
    let mut f = Field::constant(grid, Complex64::default());
    let mut g = Field::constant(grid, Complex64::default());
    for (j, k) in grid.nodes() {
        let fv = t.phi1.at(j, k) - I * t.phi2.at(j, k);
        if fv == Complex64::default() {
            return Err(Error::DivisionAtNode(j, k));
        }
        f.set(j, k, fv);
        g.set(j, k, t.phi3.at(j, k) / fv);
    }
    GaussData::new(f, g)
}

fn rhs_f(f: Complex64, g: Complex64, p: Params) -> Complex64 {
    let gb2 = g.conj() * g.conj();
    0.5 * f.norm_sqr() * g * (p.mu1 * (ONE - gb2) - p.mu2 * (ONE + gb2))
}

fn rhs_g(f: Complex64, g: Complex64, p: Params) -> Complex64 {
    let g2 = g * g;
    let gb2 = g.conj() * g.conj();
    -0.25 * (p.mu1 * (ONE + g2) * (ONE - gb2) + p.mu2 * (ONE - g2) * (ONE + gb2)) * f.conj()
}

/// `f_zbar` minus the right-hand side of the `f` equation, nodewise.
pub fn residual_f(d: &GaussData, p: Params) -> ComplexField {
    residual_f_with(d, p, StencilOrder::Second)
}

/// `g_zbar` minus the right-hand side of the `g` equation, nodewise.
pub fn residual_g(d: &GaussData, p: Params) -> ComplexField {
    residual_g_with(d, p, StencilOrder::Second)
}

pub fn residual_f_with(d: &GaussData, p: Params, order: StencilOrder) -> ComplexField {
    let fzb = d_zbar(&d.f, order);
    Field::from_fn(*d.grid(), |j, k, _| fzb.at(j, k) - rhs_f(d.f.at(j, k), d.g.at(j, k), p))
}

pub fn residual_g_with(d: &GaussData, p: Params, order: StencilOrder) -> ComplexField {
    let gzb = d_zbar(&d.g, order);
    Field::from_fn(*d.grid(), |j, k, _| gzb.at(j, k) - rhs_g(d.f.at(j, k), d.g.at(j, k), p))
}

/// Max-norm of both residuals.
pub fn max_residual(d: &GaussData, p: Params, order: StencilOrder) -> f64 {
    residual_f_with(d, p, order)
        .max_norm()
        .max(residual_g_with(d, p, order).max_norm())
}

/// Residuals of the `phi`-form of the harmonic map system:
/// `phi^i_zbar - mu_i conj(phi^i) phi^3` for `i = 1, 2` and
/// `phi^3_zbar + mu1 |phi^1|^2 + mu2 |phi^2|^2`.
pub fn phi_residuals(t: &PhiTriple, p: Params, order: StencilOrder) -> [ComplexField; 3] {
    let d1 = d_zbar(&t.phi1, order);
    let d2 = d_zbar(&t.phi2, order);
    let d3 = d_zbar(&t.phi3, order);
    let grid = *t.grid();
    let r1 = Field::from_fn(grid, |j, k, _| {
        d1.at(j, k) - p.mu1 * t.phi1.at(j, k).conj() * t.phi3.at(j, k)
    });
    let r2 = Field::from_fn(grid, |j, k, _| {
        d2.at(j, k) - p.mu2 * t.phi2.at(j, k).conj() * t.phi3.at(j, k)
    });
    let r3 = Field::from_fn(grid, |j, k, _| {
        d3.at(j, k) + p.mu1 * t.phi1.at(j, k).norm_sqr() + p.mu2 * t.phi2.at(j, k).norm_sqr()
    });
    [r1, r2, r3]
}

/// `|phi1^2 + phi2^2 + phi3^2|` nodewise.
pub fn null_defect(t: &PhiTriple) -> RealField {
    Field::from_fn(*t.grid(), |j, k, _| {
        let (a, b, c) = (t.phi1.at(j, k), t.phi2.at(j, k), t.phi3.at(j, k));
        (a * a + b * b + c * c).norm()
    })
}

/// `|phi1|^2 + |phi2|^2 + |phi3|^2` nodewise; zero marks a branch point.
pub fn regularity_defect(t: &PhiTriple) -> RealField {
    Field::from_fn(*t.grid(), |j, k, _| {
        t.phi1.at(j, k).norm_sqr() + t.phi2.at(j, k).norm_sqr() + t.phi3.at(j, k).norm_sqr()
    })
}

/// Nodes whose regularity defect is at most `rel_tol` times the grid maximum.
pub fn branch_nodes(t: &PhiTriple, rel_tol: f64) -> Vec<(usize, usize)> {
    let reg = regularity_defect(t);
    let cutoff = rel_tol * reg.max_abs();
    reg.grid().nodes().filter(|&(j, k)| reg.at(j, k) <= cutoff).collect()
}

/// Inverse stereographic projection of `g` onto the unit sphere of the Lie algebra.
pub fn psi_from_g(gval: Complex64) -> NormalVector {
    let m = gval.norm_sqr();
    if m > 1e150 {
        // avoid overflow in |g|^2 for huge g; the limit is the north pole
        let s = 1.0 / gval.norm();
        let u = gval * s;
        let v = FrameVector::new(2.0 * u.re * s, 2.0 * u.im * s, 1.0);
        return NormalVector(v.scale(1.0 / v.norm()));
    }
    let d = 1.0 + m;
    NormalVector(FrameVector::new(2.0 * gval.re / d, 2.0 * gval.im / d, (m - 1.0) / d))
}

/// Stereographic projection from the north pole.
pub fn g_from_psi(psi: NormalVector) -> Result<Complex64> {
    let v = psi.0;
    let denom = 1.0 - v.u3;
    if denom <= NORTH_POLE_TOL {
        return Err(Error::NorthPole);
    }
    // (u1 + i u2)/(1 - u3) = (1 + u3)(u1 + i u2)/(u1^2 + u2^2) is better
    // conditioned near the north pole but undefined at the south pole.
    if v.u3 > 0.0 {
        let r2 = v.u1 * v.u1 + v.u2 * v.u2;
        if r2 > 0.0 {
            return Ok(Complex64::new(v.u1, v.u2) * ((1.0 + v.u3) / r2));
        }
    }
    Ok(Complex64::new(v.u1, v.u2) / denom)
}

/// `f = 2 conj(g)_z / (g^2 - conj(g)^2)`: recovers the `f` half of the data
/// from a harmonic map into the Sol target metric.
pub fn recover_f_sol(g: &ComplexField) -> Result<ComplexField> {
    recover_f_sol_with(g, StencilOrder::Second)
}

pub fn recover_f_sol_with(g: &ComplexField, order: StencilOrder) -> Result<ComplexField> {
    let gbar_z = d_z(&g.conj(), order);
    Field::try_from_fn(*g.grid(), |j, k, _| {
        let gv = g.at(j, k);
        let denom = gv * gv - gv.conj() * gv.conj();
        // g^2 - conj(g)^2 = 4 i Re(g) Im(g)
        if denom.norm() <= 1e-14 * (1.0 + gv.norm_sqr()) {
            return Err(Error::SingularSet(j, k));
        }
        Ok(2.0 * gbar_z.at(j, k) / denom)
    })
}
