//! Dirichlet problems for harmonic maps into the singular target metrics,
//! solved by an explicit heat flow.
//!
//! The update uses the tension numerator `g_{z zbar} + Gamma g_z g_zbar`
//! rather than the full `4 lambda^{-2}`-scaled tension: the zero set is the
//! same and the step stays bounded near the singular set. All updates in one
//! iteration read the previous iterate only (Jacobi order).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ambient::{GroupPoint, Params};
use crate::error::{Error, Result};
use crate::gaussdata::{branch_nodes, phi_from_fg, recover_f_sol, GaussData, DEFAULT_BRANCH_TOL};
use crate::grid::{ComplexField, ComplexGrid, Field, RealField};
use crate::integrator::{integrate_surface, Immersion};
use crate::stencil::{d_z, StencilOrder};
use crate::targetmetric::{MetricKind, SingularMetric};

pub const DEFAULT_SINGULAR_MARGIN: f64 = 0.1;
pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITERS: usize = 500_000;
/// Fraction of the stability bound `min(dz_re, dz_im)^2` used by default.
pub const DEFAULT_DT_FACTOR: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowConfig {
    pub metric: SingularMetric,
    pub dt: f64,
    pub max_iters: usize,
    /// Max-norm of the residual at which the flow stops.
    pub tol: f64,
    /// Minimum distance in the target plane to the singular set.
    pub singular_margin: f64,
}

impl FlowConfig {
    /// Defaults for `grid`: the largest admissible step, `tol = 1e-8`,
    /// margin `0.1`.
    pub fn for_grid(metric: SingularMetric, grid: &ComplexGrid) -> Self {
        FlowConfig {
            metric,
            dt: max_dt(grid),
            max_iters: DEFAULT_MAX_ITERS,
            tol: DEFAULT_TOL,
            singular_margin: DEFAULT_SINGULAR_MARGIN,
        }
    }

    pub fn validate(&self, grid: &ComplexGrid) -> Result<()> {
        let bound = max_dt(grid);
        if !(self.dt > 0.0) || self.dt > bound * (1.0 + 1e-12) {
            return Err(Error::InvalidConfig(format!("dt = {} outside (0, {bound}]", self.dt)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidConfig(format!("tol = {} must be positive", self.tol)));
        }
        if !(self.singular_margin > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "singular margin = {} must be positive",
                self.singular_margin
            )));
        }
        Ok(())
    }
}

/// Stability bound `dt <= min(dz_re, dz_im)^2 / 4`.
pub fn max_dt(grid: &ComplexGrid) -> f64 {
    let h = grid.dz_re.min(grid.dz_im);
    DEFAULT_DT_FACTOR * h * h
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowResult {
    pub g: ComplexField,
    pub iters: usize,
    pub final_residual: f64,
    pub converged: bool,
    /// Discrete Dirichlet energy of the initial field and after every step.
    pub energy_history: Vec<f64>,
    /// `(iteration, residual)` at iteration 0, powers of two and the end.
    pub residual_history: Vec<(usize, f64)>,
}

impl FlowResult {
    pub fn ensure_converged(&self) -> Result<()> {
        if self.converged {
            Ok(())
        } else {
            Err(Error::NotConverged {
                final_residual: self.final_residual,
                iters: self.iters,
            })
        }
    }

    /// Largest single-step energy increase relative to `1 + E`, or zero.
    pub fn max_energy_increase(&self) -> f64 {
        self.energy_history
            .windows(2)
            .map(|w| (w[1] - w[0]) / (1.0 + w[0].abs()))
            .fold(0.0, f64::max)
    }

    pub fn energy_monotone(&self, slack: f64) -> bool {
        self.energy_history
            .windows(2)
            .all(|w| w[1] <= w[0] + slack * (1.0 + w[0].abs()))
    }
}

/// Dirichlet data on the four sides of a grid. Each side is listed in
/// increasing index order (`j` along bottom and top, `k` along left and
/// right); corners appear on two sides and must agree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryValues {
    pub grid: ComplexGrid,
    pub bottom: Vec<Complex64>,
    pub right: Vec<Complex64>,
    pub top: Vec<Complex64>,
    pub left: Vec<Complex64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Bottom,
    Right,
    Top,
    Left,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::Bottom, Side::Right, Side::Top, Side::Left];

    pub fn name(self) -> &'static str {
        match self {
            Side::Bottom => "bottom",
            Side::Right => "right",
            Side::Top => "top",
            Side::Left => "left",
        }
    }

    pub fn parse(s: &str) -> Option<Side> {
        Side::ALL.into_iter().find(|side| side.name() == s)
    }

    /// Grid node of the `index`-th entry on this side.
    pub fn node(self, grid: &ComplexGrid, index: usize) -> (usize, usize) {
        match self {
            Side::Bottom => (index, 0),
            Side::Right => (grid.n_re - 1, index),
            Side::Top => (index, grid.n_im - 1),
            Side::Left => (0, index),
        }
    }

    pub fn len(self, grid: &ComplexGrid) -> usize {
        match self {
            Side::Bottom | Side::Top => grid.n_re,
            Side::Left | Side::Right => grid.n_im,
        }
    }
}

impl BoundaryValues {
    pub fn new(
        grid: ComplexGrid,
        bottom: Vec<Complex64>,
        right: Vec<Complex64>,
        top: Vec<Complex64>,
        left: Vec<Complex64>,
    ) -> Result<Self> {
        grid.validate()?;
        let b = BoundaryValues {
            grid,
            bottom,
            right,
            top,
            left,
        };
        for side in Side::ALL {
            let v = b.side(side);
            if v.len() != side.len(&grid) {
                return Err(Error::DomainViolation(format!(
                    "{} boundary has {} values, grid needs {}",
                    side.name(),
                    v.len(),
                    side.len(&grid)
                )));
            }
            if let Some(i) = v.iter().position(|w| !(w.re.is_finite() && w.im.is_finite())) {
                return Err(Error::DomainViolation(format!(
                    "non-finite {} boundary value at index {i}",
                    side.name()
                )));
            }
        }
        let corner = |a: Complex64, c: Complex64| (a - c).norm() <= 1e-12 * (1.0 + a.norm());
        let (nr, ni) = (grid.n_re, grid.n_im);
        if !(corner(b.bottom[0], b.left[0])
            && corner(b.bottom[nr - 1], b.right[0])
            && corner(b.top[0], b.left[ni - 1])
            && corner(b.top[nr - 1], b.right[ni - 1]))
        {
            return Err(Error::DomainViolation("boundary sides disagree at a corner".into()));
        }
        Ok(b)
    }

    pub fn from_fn(grid: ComplexGrid, g: impl Fn(Complex64) -> Complex64) -> Result<Self> {
        Self::from_field(&Field::from_fn(grid, |_, _, z| g(z)))
    }

    /// Boundary trace of a field.
    pub fn from_field(field: &ComplexField) -> Result<Self> {
        let grid = *field.grid();
        let side = |s: Side| {
            (0..s.len(&grid))
                .map(|i| field.get(s.node(&grid, i).0, s.node(&grid, i).1))
                .copied()
                .collect()
        };
        Self::new(
            grid,
            side(Side::Bottom),
            side(Side::Right),
            side(Side::Top),
            side(Side::Left),
        )
    }

    pub fn side(&self, side: Side) -> &[Complex64] {
        match side {
            Side::Bottom => &self.bottom,
            Side::Right => &self.right,
            Side::Top => &self.top,
            Side::Left => &self.left,
        }
    }

    /// Overwrites the boundary nodes of `field`.
    pub fn apply(&self, field: &mut ComplexField) {
        for side in Side::ALL {
            for (i, &v) in self.side(side).iter().enumerate() {
                let (j, k) = side.node(&self.grid, i);
                field.set(j, k, v);
            }
        }
    }

    /// Every boundary value with its node.
    pub fn values(&self) -> impl Iterator<Item = ((usize, usize), Complex64)> + '_ {
        Side::ALL.into_iter().flat_map(move |s| {
            self.side(s)
                .iter()
                .enumerate()
                .map(move |(i, &v)| (s.node(&self.grid, i), v))
        })
    }
}

/// Euclidean-harmonic extension of the boundary data (five-point Laplacian,
/// solved by successive over-relaxation from a bilinear blend).
pub fn harmonic_extension(boundary: &BoundaryValues) -> ComplexField {
    let grid = boundary.grid;
    let (nr, ni) = (grid.n_re, grid.n_im);
    // transfinite (Coons) interpolation as the starting guess
    let mut u = Field::from_fn(grid, |j, k, _| {
        let s = j as f64 / (nr - 1) as f64;
        let t = k as f64 / (ni - 1) as f64;
        let (b, tp, l, r) = (boundary.bottom[j], boundary.top[j], boundary.left[k], boundary.right[k]);
        let corners = (1.0 - s) * (1.0 - t) * boundary.bottom[0]
            + s * (1.0 - t) * boundary.bottom[nr - 1]
            + (1.0 - s) * t * boundary.top[0]
            + s * t * boundary.top[nr - 1];
        (1.0 - t) * b + t * tp + (1.0 - s) * l + s * r - corners
    });
    boundary.apply(&mut u);
    let ax = 1.0 / (grid.dz_re * grid.dz_re);
    let ay = 1.0 / (grid.dz_im * grid.dz_im);
    let diag = 2.0 * (ax + ay);
    let omega = 2.0 / (1.0 + (std::f64::consts::PI / nr.max(ni) as f64).sin());
    let scale = 1.0 + u.max_norm();
    let data = u.as_mut_slice();
    for _ in 0..100_000 {
        let mut change = 0.0f64;
        for k in 1..ni - 1 {
            for j in 1..nr - 1 {
                let i = k * nr + j;
                let target = (ax * (data[i - 1] + data[i + 1]) + ay * (data[i - nr] + data[i + nr])) / diag;
                let step = omega * (target - data[i]);
                data[i] += step;
                change = change.max(step.norm());
            }
        }
        if change <= 1e-15 * scale {
            break;
        }
    }
    u
}

/// Tension numerator at interior node `i` of a row-major slice.
#[inline]
fn numerator(data: &[Complex64], i: usize, nr: usize, hx: f64, hy: f64, metric: &SingularMetric) -> Complex64 {
    let c = data[i];
    let (e, w, n, s) = (data[i + 1], data[i - 1], data[i + nr], data[i - nr]);
    let gx = (e - w) / (2.0 * hx);
    let gy = (n - s) / (2.0 * hy);
    let gz = 0.5 * (gx - Complex64::i() * gy);
    let gzbar = 0.5 * (gx + Complex64::i() * gy);
    let lap = (e + w - 2.0 * c) / (hx * hx) + (n + s - 2.0 * c) / (hy * hy);
    0.25 * lap + metric.christoffel_unchecked(c) * gz * gzbar
}

/// Nodewise `|g_{z zbar} + Gamma(g) g_z g_zbar|` on interior nodes (centered
/// second-order stencils); boundary entries are zero.
pub fn residual_field(g: &ComplexField, metric: &SingularMetric) -> Result<RealField> {
    let grid = *g.grid();
    for (j, k) in grid.interior_nodes() {
        metric.christoffel(g.at(j, k))?;
    }
    Ok(residual_unchecked(g, metric))
}

fn residual_unchecked(g: &ComplexField, metric: &SingularMetric) -> RealField {
    let grid = *g.grid();
    let data = g.as_slice();
    Field::from_fn(grid, |j, k, _| {
        if grid.is_boundary(j, k) {
            0.0
        } else {
            numerator(data, grid.index(j, k), grid.n_re, grid.dz_re, grid.dz_im, metric).norm()
        }
    })
}

/// Discrete Dirichlet energy `sum lambda^2(g) |grad g|^2 * area` over cells,
/// with `lambda^2` at the cell average and the gradient from edge differences.
pub fn dirichlet_energy(g: &ComplexField, metric: &SingularMetric) -> Result<f64> {
    let grid = *g.grid();
    let (nr, ni) = (grid.n_re, grid.n_im);
    let d = g.as_slice();
    let mut total = 0.0;
    for k in 0..ni - 1 {
        for j in 0..nr - 1 {
            let i = k * nr + j;
            let (a, b, c, e) = (d[i], d[i + 1], d[i + nr + 1], d[i + nr]);
            let gx = 0.5 * ((b - a) + (c - e)) / grid.dz_re;
            let gy = 0.5 * ((e - a) + (c - b)) / grid.dz_im;
            let mid = 0.25 * (a + b + c + e);
            let l2 = metric
                .lambda2(mid)
                .map_err(|_| Error::SingularSetHit { iteration: 0, j, k })?;
            total += l2 * (gx.norm_sqr() + gy.norm_sqr());
        }
    }
    Ok(total * grid.cell_area())
}

fn check_margin(g: &ComplexField, cfg: &FlowConfig, iteration: usize) -> Result<()> {
    let grid = g.grid();
    for (j, k) in grid.nodes() {
        if !(cfg.metric.distance_to_singular_set(g.at(j, k)) >= cfg.singular_margin) {
            return Err(Error::SingularSetHit { iteration, j, k });
        }
    }
    Ok(())
}

/// Runs the flow from `initial` with `boundary` imposed on the boundary
/// nodes. Exhausting `max_iters` is not an error; see
/// [`FlowResult::ensure_converged`].
pub fn flow(initial: &ComplexField, boundary: &BoundaryValues, cfg: &FlowConfig) -> Result<FlowResult> {
    let grid = *initial.grid();
    if grid != boundary.grid {
        return Err(Error::InvalidGrid(
            "initial field and boundary data live on different grids".into(),
        ));
    }
    cfg.validate(&grid)?;
    if let Some((j, k)) = initial.first_non_finite() {
        return Err(Error::DomainViolation(format!(
            "non-finite initial value at node ({j}, {k})"
        )));
    }
    let mut g = initial.clone();
    boundary.apply(&mut g);
    check_margin(&g, cfg, 0)?;

    let (nr, ni) = (grid.n_re, grid.n_im);
    let (hx, hy) = (grid.dz_re, grid.dz_im);
    let metric = cfg.metric;
    let mut update = vec![Complex64::new(0.0, 0.0); grid.len()];
    let mut energy_history = vec![dirichlet_energy(&g, &metric)?];
    let mut residual_history = Vec::new();
    let mut iters: usize = 0;
    let (final_residual, converged) = loop {
        let data = g.as_slice();
        let mut max = 0.0f64;
        for k in 1..ni - 1 {
            for j in 1..nr - 1 {
                let i = k * nr + j;
                let r = numerator(data, i, nr, hx, hy, &metric);
                update[i] = r;
                let m = r.norm();
                max = if m.is_nan() { f64::NAN } else { max.max(m) };
            }
        }
        if iters == 0 || iters.is_power_of_two() {
            residual_history.push((iters, max));
        }
        if max < cfg.tol {
            break (max, true);
        }
        if iters == cfg.max_iters || max.is_nan() {
            break (max, false);
        }
        let data = g.as_mut_slice();
        for k in 1..ni - 1 {
            for j in 1..nr - 1 {
                let i = k * nr + j;
                data[i] += cfg.dt * update[i];
                if !(metric.distance_to_singular_set(data[i]) >= cfg.singular_margin) {
                    return Err(Error::SingularSetHit {
                        iteration: iters + 1,
                        j,
                        k,
                    });
                }
            }
        }
        iters += 1;
        let e = dirichlet_energy(&g, &metric).map_err(|e| match e {
            Error::SingularSetHit { j, k, .. } => Error::SingularSetHit { iteration: iters, j, k },
            other => other,
        })?;
        energy_history.push(e);
    };
    if residual_history.last().map(|&(i, _)| i) != Some(iters) {
        residual_history.push((iters, final_residual));
    }
    Ok(FlowResult {
        g,
        iters,
        final_residual,
        converged,
        energy_history,
        residual_history,
    })
}

/// Output of the Sol pipeline: solved Gauss map, recovered data and surface.
#[derive(Debug, Clone, PartialEq)]
pub struct SolSurface {
    pub flow: FlowResult,
    pub data: GaussData,
    pub immersion: Immersion,
}

/// Heat flow for the Gauss map, recovery of `f` and integration into Sol.
/// `initial` defaults to the harmonic extension of the boundary data.
pub fn solve_sol_surface(
    boundary: &BoundaryValues,
    base: GroupPoint,
    cfg: &FlowConfig,
    initial: Option<&ComplexField>,
) -> Result<SolSurface> {
    if cfg.metric.kind != MetricKind::Sol {
        return Err(Error::InvalidConfig(
            "the Sol pipeline needs the Sol target metric".into(),
        ));
    }
    let start = match initial {
        Some(g) => g.clone(),
        None => harmonic_extension(boundary),
    };
    let result = flow(&start, boundary, cfg)?;
    result.ensure_converged()?;
    let data = sol_data(&result.g)?;
    let immersion = integrate_surface(&data, Params::SOL, base)?;
    Ok(SolSurface {
        flow: result,
        data,
        immersion,
    })
}

/// `(f, g)` for Sol from a Gauss map, refusing maps whose recovered `f`
/// vanishes everywhere.
pub fn sol_data(g: &ComplexField) -> Result<GaussData> {
    let grid = *g.grid();
    let total = grid.len();
    // f is proportional to conj(g)_z; compare it with the size of g over the
    // domain so that rounding noise in a constant map counts as zero
    let gbar_z = d_z(&g.conj(), StencilOrder::Second).max_norm();
    let scale = (1.0 + g.max_norm()) / (grid.z1() - grid.z0).norm();
    if !(gbar_z > 1e-9 * scale) {
        return Err(Error::DegenerateData {
            branch_nodes: total,
            total,
        });
    }
    let f = recover_f_sol(g)?;
    let data = GaussData::new(f, g.clone())?;
    let branch = branch_nodes(&phi_from_fg(&data), DEFAULT_BRANCH_TOL);
    if branch.len() == total {
        return Err(Error::DegenerateData {
            branch_nodes: branch.len(),
            total,
        });
    }
    Ok(data)
}
