//! C ABI for `solmin`.
//!
//! Gauss data and immersions are exposed as opaque handles created by the
//! library and released with the matching `*_free` function. Every fallible
//! call returns a [`SolminStatus`]; the message of the most recent failure on
//! the calling thread is available from [`solmin_last_error_message`].
//!
//! # Safety
//!
//! Pointer arguments must be null or valid for the documented number of
//! elements for the duration of the call. Handles must come from this library
//! and must not be used after they are freed.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use solmin::ambient::{GroupPoint, Params};
use solmin::gaussdata::{max_residual, GaussData};
use solmin::grid::{ComplexGrid, Field};
use solmin::heatflow::{solve_sol_surface, BoundaryValues, FlowConfig};
use solmin::integrator::{integrate_surface_with, Immersion, IntegrateOptions};
use solmin::num_complex::Complex64;
use solmin::stencil::StencilOrder;
use solmin::targetmetric::SingularMetric;
use solmin::verify::mean_curvature;
use solmin::Error;

/// Result of a library call. Values match the command-line exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolminStatus {
    Ok = 0,
    Io = 1,
    InvalidArgument = 2,
    Parse = 3,
    Domain = 4,
    NotConverged = 5,
    ResidualGate = 7,
    Numerical = 8,
    NullPointer = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolminMetric {
    /// `|dw|^2 / |1 - |w|^4|`
    Kokubu = 0,
    /// `|dw|^2 / |w^2 - wbar^2|`
    Sol = 1,
}

/// Rectangular grid of `n_re x n_im` nodes spanning `[re0, re1] x [im0, im1]`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolminGrid {
    pub re0: f64,
    pub im0: f64,
    pub re1: f64,
    pub im1: f64,
    pub n_re: usize,
    pub n_im: usize,
}

/// Opaque Weierstrass data `(f, g)` on a grid.
pub struct SolminGaussData {
    inner: GaussData,
}

/// Opaque sampled immersion in group coordinates.
pub struct SolminImmersion {
    inner: Immersion,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> SolminStatus {
    match solmin::cli::exit_code(e) {
        1 => SolminStatus::Io,
        2 => SolminStatus::InvalidArgument,
        3 => SolminStatus::Parse,
        4 => SolminStatus::Domain,
        5 => SolminStatus::NotConverged,
        7 => SolminStatus::ResidualGate,
        _ => SolminStatus::Numerical,
    }
}

/// Runs `body`, recording errors and converting panics.
fn guard(body: impl FnOnce() -> Result<(), (SolminStatus, String)>) -> SolminStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => SolminStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            SolminStatus::Panic
        }
    }
}

fn lib_err(e: Error) -> (SolminStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (SolminStatus, String) {
    (SolminStatus::NullPointer, format!("{what} is null"))
}

fn to_grid(g: &SolminGrid) -> Result<ComplexGrid, (SolminStatus, String)> {
    ComplexGrid::from_bounds(g.re0, g.im0, g.re1, g.im1, g.n_re, g.n_im)
        .map_err(|e| (SolminStatus::InvalidArgument, e.to_string()))
}

unsafe fn read_field(
    grid: ComplexGrid,
    re: *const f64,
    im: *const f64,
    what: &str,
) -> Result<Field<Complex64>, (SolminStatus, String)> {
    if re.is_null() || im.is_null() {
        return Err(null(what));
    }
    let n = grid.len();
    let re = std::slice::from_raw_parts(re, n);
    let im = std::slice::from_raw_parts(im, n);
    let data = re.iter().zip(im).map(|(&a, &b)| Complex64::new(a, b)).collect();
    Field::from_vec(grid, data).map_err(lib_err)
}

unsafe fn out_handle<T>(out: *mut *mut T, value: T) {
    *out = Box::into_raw(Box::new(value));
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn solmin_status_string(status: SolminStatus) -> *const c_char {
    let s: &'static [u8] = match status {
        SolminStatus::Ok => b"ok\0",
        SolminStatus::Io => b"i/o error\0",
        SolminStatus::InvalidArgument => b"invalid argument\0",
        SolminStatus::Parse => b"parse error\0",
        SolminStatus::Domain => b"domain violation\0",
        SolminStatus::NotConverged => b"not converged\0",
        SolminStatus::ResidualGate => b"residual above gate\0",
        SolminStatus::Numerical => b"numerical failure\0",
        SolminStatus::NullPointer => b"null pointer\0",
        SolminStatus::Panic => b"internal panic\0",
    };
    s.as_ptr().cast()
}

/// Message of the last failed call on this thread; valid until the next
/// failing call on the same thread. Empty if nothing failed yet.
#[no_mangle]
pub extern "C" fn solmin_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Builds Gauss data from row-major arrays (`index = k * n_re + j`) of
/// length `n_re * n_im`.
#[no_mangle]
pub unsafe extern "C" fn solmin_gauss_new(
    grid: SolminGrid,
    f_re: *const f64,
    f_im: *const f64,
    g_re: *const f64,
    g_im: *const f64,
    out: *mut *mut SolminGaussData,
) -> SolminStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let grid = to_grid(&grid)?;
        let f = read_field(grid, f_re, f_im, "f")?;
        let g = read_field(grid, g_re, g_im, "g")?;
        let inner = GaussData::new(f, g).map_err(lib_err)?;
        out_handle(out, SolminGaussData { inner });
        Ok(())
    })
}

/// Data of the plane `x2 = const`: `f = i / (mu1 (z + zbar))`, `g = -i`.
#[no_mangle]
pub unsafe extern "C" fn solmin_gauss_x2_plane(
    grid: SolminGrid,
    mu1: f64,
    out: *mut *mut SolminGaussData,
) -> SolminStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let grid = to_grid(&grid)?;
        if grid.z0.re <= 0.0 && grid.z1().re >= 0.0 {
            return Err((SolminStatus::Domain, "grid crosses Re z = 0".into()));
        }
        let i = Complex64::i();
        let inner = GaussData::from_fn(grid, |z| (i / (mu1 * (z + z.conj())), -i)).map_err(lib_err)?;
        out_handle(out, SolminGaussData { inner });
        Ok(())
    })
}

/// Max-norm residual of the first-order system for `(mu1, mu2)`.
#[no_mangle]
pub unsafe extern "C" fn solmin_gauss_max_residual(
    data: *const SolminGaussData,
    mu1: f64,
    mu2: f64,
    out: *mut f64,
) -> SolminStatus {
    guard(|| {
        let d = data.as_ref().ok_or_else(|| null("data"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = max_residual(&d.inner, Params::new(mu1, mu2), StencilOrder::Second);
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn solmin_gauss_free(data: *mut SolminGaussData) {
    if !data.is_null() {
        drop(Box::from_raw(data));
    }
}

/// Integrates the data into `G(mu1, mu2)` from the identity at the lower-left
/// node. Data failing the residual gate are refused unless `force` is nonzero.
#[no_mangle]
pub unsafe extern "C" fn solmin_integrate(
    data: *const SolminGaussData,
    mu1: f64,
    mu2: f64,
    force: i32,
    out: *mut *mut SolminImmersion,
) -> SolminStatus {
    guard(|| {
        let d = data.as_ref().ok_or_else(|| null("data"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let opts = IntegrateOptions {
            force: force != 0,
            ..Default::default()
        };
        let inner = integrate_surface_with(&d.inner, Params::new(mu1, mu2), &opts).map_err(lib_err)?;
        out_handle(out, SolminImmersion { inner });
        Ok(())
    })
}

/// Solves for the Gauss map into Sol with the boundary values of `g` (arrays
/// as in [`solmin_gauss_new`]; interior entries are ignored) and integrates
/// the surface. Either output may be null if not wanted.
#[no_mangle]
pub unsafe extern "C" fn solmin_solve_sol(
    grid: SolminGrid,
    g_re: *const f64,
    g_im: *const f64,
    max_iters: usize,
    tol: f64,
    out_data: *mut *mut SolminGaussData,
    out_surface: *mut *mut SolminImmersion,
) -> SolminStatus {
    guard(|| {
        let grid = to_grid(&grid)?;
        let g = read_field(grid, g_re, g_im, "g")?;
        let boundary = BoundaryValues::from_field(&g).map_err(lib_err)?;
        let cfg = FlowConfig {
            max_iters,
            tol,
            ..FlowConfig::for_grid(SingularMetric::sol(), &grid)
        };
        let s = solve_sol_surface(&boundary, GroupPoint::IDENTITY, &cfg, None).map_err(lib_err)?;
        if !out_data.is_null() {
            out_handle(out_data, SolminGaussData { inner: s.data });
        }
        if !out_surface.is_null() {
            out_handle(out_surface, SolminImmersion { inner: s.immersion });
        }
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn solmin_immersion_node_count(surface: *const SolminImmersion, out: *mut usize) -> SolminStatus {
    guard(|| {
        let s = surface.as_ref().ok_or_else(|| null("surface"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = s.inner.grid().len();
        Ok(())
    })
}

/// Copies the group coordinates into three arrays of length `len`, which
/// must equal the node count.
#[no_mangle]
pub unsafe extern "C" fn solmin_immersion_coords(
    surface: *const SolminImmersion,
    x1: *mut f64,
    x2: *mut f64,
    x3: *mut f64,
    len: usize,
) -> SolminStatus {
    guard(|| {
        let s = surface.as_ref().ok_or_else(|| null("surface"))?;
        if x1.is_null() || x2.is_null() || x3.is_null() {
            return Err(null("coordinate buffer"));
        }
        let n = s.inner.grid().len();
        if len != n {
            return Err((
                SolminStatus::InvalidArgument,
                format!("buffer length {len}, surface has {n} nodes"),
            ));
        }
        for (dst, src) in [(x1, &s.inner.x1), (x2, &s.inner.x2), (x3, &s.inner.x3)] {
            std::slice::from_raw_parts_mut(dst, n).copy_from_slice(src.as_slice());
        }
        Ok(())
    })
}

/// Largest `|H|` over interior nodes.
#[no_mangle]
pub unsafe extern "C" fn solmin_immersion_max_mean_curvature(
    surface: *const SolminImmersion,
    out: *mut f64,
) -> SolminStatus {
    guard(|| {
        let s = surface.as_ref().ok_or_else(|| null("surface"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = mean_curvature(&s.inner).map_err(lib_err)?.max_abs();
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn solmin_immersion_free(surface: *mut SolminImmersion) {
    if !surface.is_null() {
        drop(Box::from_raw(surface));
    }
}

fn metric(kind: SolminMetric) -> SingularMetric {
    match kind {
        SolminMetric::Kokubu => SingularMetric::kokubu(),
        SolminMetric::Sol => SingularMetric::sol(),
    }
}

/// Conformal factor `lambda^2` of a target metric at `w`.
#[no_mangle]
pub unsafe extern "C" fn solmin_metric_lambda2(kind: SolminMetric, re: f64, im: f64, out: *mut f64) -> SolminStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = metric(kind).lambda2(Complex64::new(re, im)).map_err(lib_err)?;
        Ok(())
    })
}

/// Christoffel symbol `d/dw log lambda^2` of a target metric at `w`.
#[no_mangle]
pub unsafe extern "C" fn solmin_metric_christoffel(
    kind: SolminMetric,
    re: f64,
    im: f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> SolminStatus {
    guard(|| {
        if out_re.is_null() || out_im.is_null() {
            return Err(null("out"));
        }
        let c = metric(kind).christoffel(Complex64::new(re, im)).map_err(lib_err)?;
        *out_re = c.re;
        *out_im = c.im;
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CStr;
    use std::ptr;

    fn grid(n: usize) -> SolminGrid {
        SolminGrid {
            re0: 2.0,
            im0: 0.0,
            re1: 3.0,
            im1: 1.0,
            n_re: n,
            n_im: n,
        }
    }

    #[test]
    fn x2_plane_round_trip() {
        unsafe {
            let mut d = ptr::null_mut();
            assert_eq!(solmin_gauss_x2_plane(grid(65), 1.0, &mut d), SolminStatus::Ok);
            let mut r = 0.0;
            assert_eq!(solmin_gauss_max_residual(d, 1.0, -1.0, &mut r), SolminStatus::Ok);
            assert!(r < 1e-4);
            let mut s = ptr::null_mut();
            assert_eq!(solmin_integrate(d, 1.0, -1.0, 0, &mut s), SolminStatus::Ok);
            let mut n = 0;
            assert_eq!(solmin_immersion_node_count(s, &mut n), SolminStatus::Ok);
            let (mut a, mut b, mut c) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
            assert_eq!(
                solmin_immersion_coords(s, a.as_mut_ptr(), b.as_mut_ptr(), c.as_mut_ptr(), n),
                SolminStatus::Ok
            );
            assert!(b.iter().all(|&v| v == 0.0));
            assert_eq!(
                solmin_immersion_coords(s, a.as_mut_ptr(), b.as_mut_ptr(), c.as_mut_ptr(), n - 1),
                SolminStatus::InvalidArgument
            );
            let mut h = 1.0;
            assert_eq!(solmin_immersion_max_mean_curvature(s, &mut h), SolminStatus::Ok);
            assert!(h < 1e-8);
            solmin_immersion_free(s);
            solmin_gauss_free(d);
        }
    }

    #[test]
    fn errors_are_reported() {
        unsafe {
            let mut d = ptr::null_mut();
            let bad = SolminGrid { re0: -1.0, ..grid(9) };
            assert_eq!(solmin_gauss_x2_plane(bad, 1.0, &mut d), SolminStatus::Domain);
            assert!(d.is_null());
            let msg = CStr::from_ptr(solmin_last_error_message()).to_str().unwrap();
            assert!(msg.contains("Re z"), "{msg}");
            assert_eq!(
                solmin_gauss_max_residual(ptr::null(), 1.0, 1.0, &mut 0.0),
                SolminStatus::NullPointer
            );
            let mut v = 0.0;
            assert_eq!(
                solmin_metric_lambda2(SolminMetric::Sol, 1.0, 0.0, &mut v),
                SolminStatus::Domain
            );
            assert_eq!(
                solmin_metric_lambda2(SolminMetric::Kokubu, 0.5, 0.0, &mut v),
                SolminStatus::Ok
            );
            assert!((v - 1.0 / (1.0 - 0.0625)).abs() < 1e-15);
            let s = CStr::from_ptr(solmin_status_string(SolminStatus::NotConverged));
            assert_eq!(s.to_str().unwrap(), "not converged");
            solmin_gauss_free(ptr::null_mut());
            solmin_immersion_free(ptr::null_mut());
        }
    }
}
