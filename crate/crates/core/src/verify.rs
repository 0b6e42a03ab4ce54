//! Finite-difference geometry of sampled immersions: induced metric,
//! conformality, unit normal, mean curvature and the recovered Gauss map.
//!
//! Second derivatives are taken in group coordinates and corrected with the
//! coordinate Christoffel symbols, so the frame is never differentiated.

use serde::Serialize;

use crate::ambient::{coordinate_christoffels, coordinate_to_frame, frame_to_coordinate, metric_dot};
use crate::error::{Error, Result};
use crate::gaussdata::{g_from_psi, GaussData, NormalVector};
use crate::grid::{Field, RealField};
use crate::integrator::Immersion;
use crate::stencil::{d2_im, d2_re, d_im, d_re, d_re_im, StencilOrder};

/// Relative threshold on `det I / (trace I)^2` below which a node is degenerate.
pub const DEGENERACY_TOL: f64 = 1e-12;

/// `(E, F, G)` of the induced metric in the coordinates `(Re z, Im z)`.
pub type FundamentalForm = [f64; 3];

struct Tangents {
    xu: Field<[f64; 3]>,
    xv: Field<[f64; 3]>,
}

fn stack(s: &Immersion, op: impl Fn(&RealField) -> RealField) -> Field<[f64; 3]> {
    let (a, b, c) = (op(&s.x1), op(&s.x2), op(&s.x3));
    Field::from_fn(*s.grid(), |j, k, _| [a.at(j, k), b.at(j, k), c.at(j, k)])
}

fn tangents(s: &Immersion) -> Tangents {
    Tangents {
        xu: stack(s, |f| d_re(f, StencilOrder::Second)),
        xv: stack(s, |f| d_im(f, StencilOrder::Second)),
    }
}

fn form_at(t: &Tangents, s: &Immersion, j: usize, k: usize) -> FundamentalForm {
    let (x3, p) = (s.x3.at(j, k), s.params);
    let (u, v) = (t.xu.at(j, k), t.xv.at(j, k));
    [
        metric_dot(u, u, x3, p),
        metric_dot(u, v, x3, p),
        metric_dot(v, v, x3, p),
    ]
}

fn degenerate(ff: FundamentalForm) -> bool {
    let det = ff[0] * ff[2] - ff[1] * ff[1];
    let trace = ff[0] + ff[2];
    !(det > DEGENERACY_TOL * trace * trace)
}

pub fn first_fundamental_form(s: &Immersion) -> Field<FundamentalForm> {
    let t = tangents(s);
    Field::from_fn(*s.grid(), |j, k, _| form_at(&t, s, j, k))
}

/// Nodewise `max(|E - G|, 2|F|) / max(E, G)`; zero for conformal maps.
pub fn conformal_defect(s: &Immersion) -> RealField {
    first_fundamental_form(s).map(|&[e, f, g]| {
        let scale = e.max(g);
        if scale > 0.0 {
            (e - g).abs().max(2.0 * f.abs()) / scale
        } else {
            f64::INFINITY
        }
    })
}

/// `X_u x X_v` in the orthonormal frame, normalized, at a non-degenerate node.
fn normal_at(t: &Tangents, s: &Immersion, j: usize, k: usize) -> Option<NormalVector> {
    if degenerate(form_at(t, s, j, k)) {
        return None;
    }
    let (x3, p) = (s.x3.at(j, k), s.params);
    let u = coordinate_to_frame(t.xu.at(j, k), x3, p);
    let v = coordinate_to_frame(t.xv.at(j, k), x3, p);
    NormalVector::normalized(u.cross(v))
}

/// Left-translated unit normal `dL^{-1} N` in frame components, oriented
/// along `X_u x X_v`.
pub fn unit_normal(s: &Immersion) -> Result<Field<NormalVector>> {
    let t = tangents(s);
    Field::try_from_fn(*s.grid(), |j, k, _| {
        normal_at(&t, s, j, k).ok_or(Error::DegenerateNode(j, k))
    })
}

/// Orientation used for signed mean curvature: `e3` component positive, else
/// `e1`, else `e2`.
fn canonical(n: NormalVector) -> NormalVector {
    let v = n.frame();
    let key = [v.u3, v.u1, v.u2].into_iter().find(|c| c.abs() > 1e-12).unwrap_or(0.0);
    if key < 0.0 {
        n.negated()
    } else {
        n
    }
}

/// Mean curvature at every interior node and the degenerate interior nodes,
/// which get `H = 0`. Boundary entries are zero.
pub fn mean_curvature_lenient(s: &Immersion) -> (RealField, Vec<(usize, usize)>) {
    let grid = *s.grid();
    let p = s.params;
    let t = tangents(s);
    let xuu = stack(s, d2_re);
    let xvv = stack(s, d2_im);
    let xuv = stack(s, d_re_im);
    let mut skipped = Vec::new();
    let h = Field::from_fn(grid, |j, k, _| {
        if grid.is_boundary(j, k) {
            return 0.0;
        }
        let Some(n) = normal_at(&t, s, j, k) else {
            skipped.push((j, k));
            return 0.0;
        };
        let x3 = s.x3.at(j, k);
        let nc = frame_to_coordinate(canonical(n).frame(), x3, p);
        let gamma = coordinate_christoffels(x3, p);
        let (u, v) = (t.xu.at(j, k), t.xv.at(j, k));
        // <nabla_a X_b, N> with nabla_a X_b = X_ab + Gamma(X_a, X_b)
        let second = |xab: [f64; 3], a: [f64; 3], b: [f64; 3]| {
            let mut cov = xab;
            for (m, c) in cov.iter_mut().enumerate() {
                for (i, ai) in a.iter().enumerate() {
                    for (l, bl) in b.iter().enumerate() {
                        *c += gamma[m][i][l] * ai * bl;
                    }
                }
            }
            metric_dot(cov, nc, x3, p)
        };
        let l = second(xuu.at(j, k), u, u);
        let m = second(xuv.at(j, k), u, v);
        let nn = second(xvv.at(j, k), v, v);
        let [e, f, g] = form_at(&t, s, j, k);
        (e * nn - 2.0 * f * m + g * l) / (2.0 * (e * g - f * f))
    });
    (h, skipped)
}

/// Mean curvature at interior nodes (boundary entries zero); fails at the
/// first degenerate interior node.
pub fn mean_curvature(s: &Immersion) -> Result<RealField> {
    let (h, skipped) = mean_curvature_lenient(s);
    match skipped.first() {
        Some(&(j, k)) => Err(Error::DegenerateNode(j, k)),
        None => Ok(h),
    }
}

/// Nodewise `|g(psi) - d.g|` with the normal orientation that minimizes the
/// total mismatch. Also returns whether the `X_u x X_v` orientation was flipped.
pub fn gauss_map_mismatch_oriented(s: &Immersion, d: &GaussData) -> Result<(RealField, bool)> {
    if s.grid() != d.grid() {
        return Err(Error::InvalidGrid("immersion and data live on different grids".into()));
    }
    let normals = unit_normal(s)?;
    let attempt = |flip: bool| -> Result<(RealField, f64)> {
        let field = Field::try_from_fn(*s.grid(), |j, k, _| {
            let n = *normals.get(j, k);
            let n = if flip { n.negated() } else { n };
            Ok::<f64, Error>((g_from_psi(n)? - d.g.at(j, k)).norm())
        })?;
        let total = field.as_slice().iter().sum();
        Ok((field, total))
    };
    match (attempt(false), attempt(true)) {
        (Ok((a, ta)), Ok((b, tb))) => Ok(if tb < ta { (b, true) } else { (a, false) }),
        (Ok((a, _)), Err(_)) => Ok((a, false)),
        (Err(_), Ok((b, _))) => Ok((b, true)),
        (Err(e), Err(_)) => Err(e),
    }
}

pub fn gauss_map_mismatch(s: &Immersion, d: &GaussData) -> Result<RealField> {
    Ok(gauss_map_mismatch_oriented(s, d)?.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurfaceReport {
    #[serde(rename = "conformal_defect_max")]
    pub max_conformal_defect: f64,
    #[serde(rename = "mean_curvature_max")]
    pub max_mean_curvature: f64,
    #[serde(skip)]
    pub mean_curvature_field: RealField,
    /// Absent when no Gauss data accompanies the immersion.
    #[serde(rename = "gauss_map_mismatch")]
    pub max_gauss_map_mismatch: Option<f64>,
    pub normal_flipped: Option<bool>,
    pub branch_nodes: Vec<(usize, usize)>,
    pub interior_nodes: usize,
}

/// Runs every check that applies. Degenerate nodes are listed rather than
/// failing the report.
pub fn surface_report(s: &Immersion, d: Option<&GaussData>) -> Result<SurfaceReport> {
    let grid = *s.grid();
    let (h, branch) = mean_curvature_lenient(s);
    let ff = first_fundamental_form(s);
    let defect = conformal_defect(s);
    let max_conformal_defect = grid
        .nodes()
        .filter(|&(j, k)| !degenerate(ff.at(j, k)))
        .map(|(j, k)| defect.at(j, k))
        .fold(0.0, nan_max);
    let max_mean_curvature = h.as_slice().iter().map(|v| v.abs()).fold(0.0, nan_max);
    let (mismatch, flipped) = match d {
        Some(d) if branch.is_empty() => {
            let (m, flip) = gauss_map_mismatch_oriented(s, d)?;
            (Some(m.as_slice().iter().cloned().fold(0.0, nan_max)), Some(flip))
        }
        _ => (None, None),
    };
    Ok(SurfaceReport {
        max_conformal_defect,
        max_mean_curvature,
        mean_curvature_field: h,
        max_gauss_map_mismatch: mismatch,
        normal_flipped: flipped,
        branch_nodes: branch,
        interior_nodes: (grid.n_re - 2) * (grid.n_im - 2),
    })
}

/// `max` that propagates NaN, so a broken field cannot pass a threshold.
fn nan_max(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}
