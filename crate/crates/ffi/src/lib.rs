//! C ABI for the conical Radon transform toolkit.
//!
//! Conventions:
//! - Every object is an opaque handle created by a `*_new`/`*_read`/`*_from_*`
//!   function and released by the matching `*_free`. Handles are not thread
//!   safe for concurrent mutation but may be shared read-only.
//! - Every fallible call returns a [`ConradStatus`]; on failure the
//!   thread-local message behind [`conrad_last_error_message`] describes it.
//! - Output parameters are written only when the call returns `Ok`.
//!
//! The matching C header lives at `include/conrad.h`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use conrad::config::RunConfig;
use conrad::recon::SolveOptions;
use conrad::transforms::{conical_forward, weighted_ray, QuadratureSpec};
use conrad::{
    AnalyticPhantom, ConeLattice, DiskGrid, Error, GridSpec, ScalarField3, UnitVec3, Vec3,
};

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConradStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Hypothesis = 3,
    Numerical = 4,
    Io = 5,
    Format = 6,
    Utf8 = 7,
    Panic = 8,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: &str) {
    let sanitized: String = msg.chars().map(|c| if c == '\0' { ' ' } else { c }).collect();
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(sanitized).unwrap());
}

fn status_from(err: &Error) -> ConradStatus {
    match err {
        Error::InvalidInput(_) => ConradStatus::InvalidArgument,
        Error::Hypothesis(_) => ConradStatus::Hypothesis,
        Error::Numerical(_) => ConradStatus::Numerical,
        Error::Io(_) => ConradStatus::Io,
        Error::Format(_) => ConradStatus::Format,
    }
}

fn guard<F: FnOnce() -> ConradStatus>(f: F) -> ConradStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic in conrad".into());
            set_error(&msg);
            ConradStatus::Panic
        }
    }
}

fn fail(err: Error) -> ConradStatus {
    set_error(&err.to_string());
    status_from(&err)
}

/// Copies the last error message (NUL terminated) into `buf` and returns the
/// full message length in bytes excluding the NUL. `buf` may be null to query
/// the length only.
#[no_mangle]
pub extern "C" fn conrad_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes_with_nul();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len);
            unsafe {
                std::ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
                // always terminate
                *buf.add(n - 1) = 0;
            }
        }
        bytes.len() - 1
    })
}

/// Crate version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn conrad_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

// ---------------------------------------------------------------------------
// plain-old-data specs
// ---------------------------------------------------------------------------

/// Voxel grid geometry; `origin` is the lower box corner, voxel centers sit
/// at `origin + (i + 1/2) * spacing`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct ConradGridSpec {
    pub origin: [f64; 3],
    pub spacing: [f64; 3],
    pub dims: [u64; 3],
}

impl ConradGridSpec {
    fn to_spec(self) -> Result<GridSpec, Error> {
        GridSpec::new(
            self.origin.into(),
            self.spacing.into(),
            [self.dims[0] as usize, self.dims[1] as usize, self.dims[2] as usize],
        )
    }
}

/// Uniform cone lattice: `u_count` vertices over `[u_min, u_max]`,
/// `beta_count` axis angles over `[0, 2 pi)`, `s_count` openings over
/// `[-1, 1]` inclusive.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct ConradLatticeSpec {
    pub u_min: f64,
    pub u_max: f64,
    pub u_count: usize,
    pub beta_count: usize,
    pub s_count: usize,
}

/// Quadrature resolutions; non-positive values select library defaults.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct ConradQuadSpec {
    pub circle_nodes: usize,
    pub ray_step: f64,
    pub plane_step: f64,
    pub chord_step: f64,
    pub sphere_t: usize,
    pub sphere_phi: usize,
}

impl ConradQuadSpec {
    fn to_spec(self) -> Result<QuadratureSpec, Error> {
        let d = QuadratureSpec::default();
        let spec = QuadratureSpec {
            circle_nodes: if self.circle_nodes == 0 { d.circle_nodes } else { self.circle_nodes },
            ray_step: if self.ray_step > 0.0 { self.ray_step } else { d.ray_step },
            plane_step: if self.plane_step > 0.0 { self.plane_step } else { d.plane_step },
            chord_step: if self.chord_step > 0.0 { self.chord_step } else { d.chord_step },
            sphere_t: if self.sphere_t == 0 { d.sphere_t } else { self.sphere_t },
            sphere_phi: if self.sphere_phi == 0 { d.sphere_phi } else { self.sphere_phi },
        };
        spec.validate()?;
        Ok(spec)
    }
}

// ---------------------------------------------------------------------------
// opaque handles
// ---------------------------------------------------------------------------

pub struct ConradPhantom(AnalyticPhantom);
pub struct ConradField(ScalarField3);
pub struct ConradSinogram(ConeLattice);

unsafe fn cstr_to_path<'a>(ptr: *const c_char) -> Result<&'a Path, ConradStatus> {
    if ptr.is_null() {
        set_error("null path");
        return Err(ConradStatus::NullPointer);
    }
    match unsafe { CStr::from_ptr(ptr) }.to_str() {
        Ok(s) => Ok(Path::new(s)),
        Err(_) => {
            set_error("path is not valid UTF-8");
            Err(ConradStatus::Utf8)
        }
    }
}

macro_rules! nonnull {
    ($ptr:expr) => {
        if $ptr.is_null() {
            set_error(concat!("null pointer: ", stringify!($ptr)));
            return ConradStatus::NullPointer;
        }
    };
}

// ---------------------------------------------------------------------------
// phantom
// ---------------------------------------------------------------------------

/// Parses a phantom from JSON of the form
/// `{"primitives": [{"type": "ball", "center": [0,2,0], "radius": 0.5, "amplitude": 1.0}, ...]}`.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn conrad_phantom_from_json(
    json: *const c_char,
    out: *mut *mut ConradPhantom,
) -> ConradStatus {
    guard(|| {
        nonnull!(json);
        nonnull!(out);
        let text = match unsafe { CStr::from_ptr(json) }.to_str() {
            Ok(s) => s,
            Err(_) => {
                set_error("phantom JSON is not valid UTF-8");
                return ConradStatus::Utf8;
            }
        };
        // reuse the config-side validation (unknown keys rejected)
        let wrapped = format!("{{\"phantom\": {text}}}");
        match RunConfig::from_json(&wrapped) {
            Ok(cfg) => {
                unsafe { *out = Box::into_raw(Box::new(ConradPhantom(cfg.phantom))) };
                ConradStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Evaluates the phantom at a point.
///
/// # Safety
/// `phantom` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn conrad_phantom_eval(
    phantom: *const ConradPhantom,
    x: f64,
    y: f64,
    z: f64,
    out: *mut f64,
) -> ConradStatus {
    guard(|| {
        nonnull!(phantom);
        nonnull!(out);
        let p = unsafe { &*phantom };
        unsafe { *out = p.0.eval(Vec3::new(x, y, z)) };
        ConradStatus::Ok
    })
}

/// # Safety
/// `phantom` must come from `conrad_phantom_from_json` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn conrad_phantom_free(phantom: *mut ConradPhantom) {
    if !phantom.is_null() {
        drop(unsafe { Box::from_raw(phantom) });
    }
}

// ---------------------------------------------------------------------------
// field
// ---------------------------------------------------------------------------

/// Samples the phantom at the voxel centers of `grid`.
///
/// # Safety
/// `phantom` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn conrad_rasterize(
    phantom: *const ConradPhantom,
    grid: ConradGridSpec,
    out: *mut *mut ConradField,
) -> ConradStatus {
    guard(|| {
        nonnull!(phantom);
        nonnull!(out);
        let p = unsafe { &*phantom };
        let spec = match grid.to_spec() {
            Ok(s) => s,
            Err(e) => return fail(e),
        };
        match conrad::rasterize(&p.0, spec) {
            Ok(field) => {
                unsafe { *out = Box::into_raw(Box::new(ConradField(field))) };
                ConradStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Reads a field container file.
///
/// # Safety
/// `path` must be NUL-terminated; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn conrad_field_read(
    path: *const c_char,
    out: *mut *mut ConradField,
) -> ConradStatus {
    guard(|| {
        nonnull!(out);
        let path = match unsafe { cstr_to_path(path) } {
            Ok(p) => p,
            Err(s) => return s,
        };
        match ScalarField3::read(path) {
            Ok(field) => {
                unsafe { *out = Box::into_raw(Box::new(ConradField(field))) };
                ConradStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Writes a field container file.
///
/// # Safety
/// `field` must be a live handle; `path` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn conrad_field_write(
    field: *const ConradField,
    path: *const c_char,
) -> ConradStatus {
    guard(|| {
        nonnull!(field);
        let path = match unsafe { cstr_to_path(path) } {
            Ok(p) => p,
            Err(s) => return s,
        };
        match unsafe { &*field }.0.write(path) {
            Ok(()) => ConradStatus::Ok,
            Err(e) => fail(e),
        }
    })
}

/// Grid geometry of a field handle.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn conrad_field_grid(
    field: *const ConradField,
    out: *mut ConradGridSpec,
) -> ConradStatus {
    guard(|| {
        nonnull!(field);
        nonnull!(out);
        let f = unsafe { &*field };
        let g = f.0.grid;
        unsafe {
            *out = ConradGridSpec {
                origin: g.origin.into(),
                spacing: g.spacing.into(),
                dims: [g.dims[0] as u64, g.dims[1] as u64, g.dims[2] as u64],
            };
        }
        ConradStatus::Ok
    })
}

/// Borrowed pointer to the voxel values (x fastest); length via
/// `conrad_field_len`. Valid until the handle is freed.
///
/// # Safety
/// `field` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn conrad_field_data(field: *const ConradField) -> *const f64 {
    if field.is_null() {
        return std::ptr::null();
    }
    unsafe { &*field }.0.values.as_ptr()
}

/// # Safety
/// `field` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn conrad_field_len(field: *const ConradField) -> usize {
    if field.is_null() {
        return 0;
    }
    unsafe { &*field }.0.values.len()
}

/// # Safety
/// `field` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn conrad_field_free(field: *mut ConradField) {
    if !field.is_null() {
        drop(unsafe { Box::from_raw(field) });
    }
}

// ---------------------------------------------------------------------------
// forward transform and sinogram
// ---------------------------------------------------------------------------

fn project_impl<V: conrad::Volume>(
    volume: &V,
    lattice: ConradLatticeSpec,
    quad: ConradQuadSpec,
    out: *mut *mut ConradSinogram,
) -> ConradStatus {
    let spec = match quad.to_spec() {
        Ok(q) => q,
        Err(e) => return fail(e),
    };
    let lat = match ConeLattice::uniform(
        lattice.u_min,
        lattice.u_max,
        lattice.u_count,
        lattice.beta_count,
        lattice.s_count,
    ) {
        Ok(l) => l,
        Err(e) => return fail(e),
    };
    match conical_forward(volume, lat, &spec) {
        Ok(sino) => {
            unsafe { *out = Box::into_raw(Box::new(ConradSinogram(sino))) };
            ConradStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Forward-projects a phantom onto a uniform cone lattice.
///
/// # Safety
/// `phantom` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn conrad_project_phantom(
    phantom: *const ConradPhantom,
    lattice: ConradLatticeSpec,
    quad: ConradQuadSpec,
    out: *mut *mut ConradSinogram,
) -> ConradStatus {
    guard(|| {
        nonnull!(phantom);
        nonnull!(out);
        project_impl(&unsafe { &*phantom }.0, lattice, quad, out)
    })
}

/// Forward-projects a voxel field (trilinear between centers).
///
/// # Safety
/// `field` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn conrad_project_field(
    field: *const ConradField,
    lattice: ConradLatticeSpec,
    quad: ConradQuadSpec,
    out: *mut *mut ConradSinogram,
) -> ConradStatus {
    guard(|| {
        nonnull!(field);
        nonnull!(out);
        project_impl(&unsafe { &*field }.0, lattice, quad, out)
    })
}

/// Weighted ray transform `Pf(u, direction)` of a phantom.
///
/// # Safety
/// `phantom`, `direction` (3 doubles) and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn conrad_weighted_ray(
    phantom: *const ConradPhantom,
    u: f64,
    direction: *const f64,
    quad: ConradQuadSpec,
    out: *mut f64,
) -> ConradStatus {
    guard(|| {
        nonnull!(phantom);
        nonnull!(direction);
        nonnull!(out);
        let spec = match quad.to_spec() {
            Ok(q) => q,
            Err(e) => return fail(e),
        };
        let d = unsafe { std::slice::from_raw_parts(direction, 3) };
        let dir = match UnitVec3::normalized(Vec3::new(d[0], d[1], d[2])) {
            Ok(v) => v,
            Err(e) => return fail(e),
        };
        let value = weighted_ray(&unsafe { &*phantom }.0, u, dir, &spec);
        unsafe { *out = value };
        ConradStatus::Ok
    })
}

/// Writes a sinogram as `u,beta,s,value` CSV with 17 significant digits.
///
/// # Safety
/// `sino` must be a live handle; `path` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn conrad_sinogram_write_csv(
    sino: *const ConradSinogram,
    path: *const c_char,
) -> ConradStatus {
    guard(|| {
        nonnull!(sino);
        let path = match unsafe { cstr_to_path(path) } {
            Ok(p) => p,
            Err(s) => return s,
        };
        match unsafe { &*sino }.0.write_csv(path) {
            Ok(()) => ConradStatus::Ok,
            Err(e) => fail(e),
        }
    })
}

/// Reads a sinogram CSV produced by this library.
///
/// # Safety
/// `path` must be NUL-terminated; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn conrad_sinogram_read_csv(
    path: *const c_char,
    out: *mut *mut ConradSinogram,
) -> ConradStatus {
    guard(|| {
        nonnull!(out);
        let path = match unsafe { cstr_to_path(path) } {
            Ok(p) => p,
            Err(s) => return s,
        };
        match ConeLattice::read_csv(path) {
            Ok(l) => {
                unsafe { *out = Box::into_raw(Box::new(ConradSinogram(l))) };
                ConradStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Lattice shape `(u_count, beta_count, s_count)`.
///
/// # Safety
/// `sino` must be live; `out` must point to 3 u64 slots.
#[no_mangle]
pub unsafe extern "C" fn conrad_sinogram_shape(
    sino: *const ConradSinogram,
    out: *mut u64,
) -> ConradStatus {
    guard(|| {
        nonnull!(sino);
        nonnull!(out);
        let (nu, nb, ns) = unsafe { &*sino }.0.shape();
        unsafe {
            *out = nu as u64;
            *out.add(1) = nb as u64;
            *out.add(2) = ns as u64;
        }
        ConradStatus::Ok
    })
}

/// One lattice value by index.
///
/// # Safety
/// `sino` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn conrad_sinogram_value(
    sino: *const ConradSinogram,
    iu: usize,
    ib: usize,
    is: usize,
    out: *mut f64,
) -> ConradStatus {
    guard(|| {
        nonnull!(sino);
        nonnull!(out);
        let l = &unsafe { &*sino }.0;
        let (nu, nb, ns) = l.shape();
        if iu >= nu || ib >= nb || is >= ns {
            set_error("lattice index out of range");
            return ConradStatus::InvalidArgument;
        }
        unsafe { *out = l.value(iu, ib, is) };
        ConradStatus::Ok
    })
}

/// # Safety
/// `sino` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn conrad_sinogram_free(sino: *mut ConradSinogram) {
    if !sino.is_null() {
        drop(unsafe { Box::from_raw(sino) });
    }
}

// ---------------------------------------------------------------------------
// reconstruction
// ---------------------------------------------------------------------------

/// Runs the full pipeline (per-vertex filtered backprojection, then conjugate
/// gradient least squares) on a sinogram. `disk_nodes` is the disk sampling
/// per axis; `max_iters`/`tol` bound the solver; `rank_check` != 0 verifies
/// the discrete ray operator first.
///
/// # Safety
/// `sino` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn conrad_reconstruct(
    sino: *const ConradSinogram,
    grid: ConradGridSpec,
    disk_nodes: usize,
    quad: ConradQuadSpec,
    max_iters: usize,
    tol: f64,
    rank_check: i32,
    out: *mut *mut ConradField,
) -> ConradStatus {
    guard(|| {
        nonnull!(sino);
        nonnull!(out);
        let spec = match grid.to_spec() {
            Ok(g) => g,
            Err(e) => return fail(e),
        };
        let mut qspec = match quad.to_spec() {
            Ok(q) => q,
            Err(e) => return fail(e),
        };
        if quad.ray_step <= 0.0 {
            qspec = qspec.for_grid(&spec);
        }
        let disk = match DiskGrid::new(disk_nodes) {
            Ok(d) => d,
            Err(e) => return fail(e),
        };
        let opts = SolveOptions {
            max_iters: if max_iters == 0 { SolveOptions::default().max_iters } else { max_iters },
            tol: if tol > 0.0 { tol } else { SolveOptions::default().tol },
            rank_check: rank_check != 0,
            ..SolveOptions::default()
        };
        match conrad::recon::reconstruct(&unsafe { &*sino }.0, spec, disk, &qspec, &opts) {
            Ok((field, _, _)) => {
                unsafe { *out = Box::into_raw(Box::new(ConradField(field))) };
                ConradStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CString;

    const BALL_JSON: &str = r#"{"primitives": [
        {"type": "ball", "center": [0.0, 2.0, 0.0], "radius": 0.5, "amplitude": 1.0}
    ]}"#;

    fn default_quad() -> ConradQuadSpec {
        ConradQuadSpec {
            circle_nodes: 64,
            ray_step: 0.01,
            plane_step: 0.0,
            chord_step: 0.0,
            sphere_t: 0,
            sphere_phi: 0,
        }
    }

    #[test]
    fn phantom_round_trip_and_eval() {
        let json = CString::new(BALL_JSON).unwrap();
        let mut phantom: *mut ConradPhantom = std::ptr::null_mut();
        let status = unsafe { conrad_phantom_from_json(json.as_ptr(), &mut phantom) };
        assert_eq!(status, ConradStatus::Ok);
        let mut v = 0.0;
        let status = unsafe { conrad_phantom_eval(phantom, 0.0, 2.0, 0.0, &mut v) };
        assert_eq!(status, ConradStatus::Ok);
        assert_eq!(v, 1.0);
        unsafe { conrad_phantom_free(phantom) };
    }

    #[test]
    fn bad_json_reports_error() {
        let json = CString::new("{\"primitives\": [{\"type\": \"cube\"}]}").unwrap();
        let mut phantom: *mut ConradPhantom = std::ptr::null_mut();
        let status = unsafe { conrad_phantom_from_json(json.as_ptr(), &mut phantom) };
        assert_eq!(status, ConradStatus::InvalidArgument);
        let needed = conrad_last_error_message(std::ptr::null_mut(), 0);
        assert!(needed > 0);
        let mut buf = vec![0i8; needed + 1];
        let n = conrad_last_error_message(buf.as_mut_ptr() as *mut c_char, buf.len());
        assert_eq!(n, needed);
        let msg = unsafe { CStr::from_ptr(buf.as_ptr() as *const c_char) };
        assert!(msg.to_str().unwrap().contains("cube"));
    }

    #[test]
    fn null_pointers_are_rejected() {
        let mut out: *mut ConradPhantom = std::ptr::null_mut();
        let status = unsafe { conrad_phantom_from_json(std::ptr::null(), &mut out) };
        assert_eq!(status, ConradStatus::NullPointer);
    }

    #[test]
    fn rasterize_project_write_read_cycle() {
        let dir = std::env::temp_dir().join(format!("conrad_ffi_test_{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let json = CString::new(BALL_JSON).unwrap();
        let mut phantom: *mut ConradPhantom = std::ptr::null_mut();
        assert_eq!(
            unsafe { conrad_phantom_from_json(json.as_ptr(), &mut phantom) },
            ConradStatus::Ok
        );

        let grid = ConradGridSpec {
            origin: [-1.0, 1.0, -1.0],
            spacing: [0.25, 0.25, 0.25],
            dims: [8, 8, 8],
        };
        let mut field: *mut ConradField = std::ptr::null_mut();
        assert_eq!(
            unsafe { conrad_rasterize(phantom, grid, &mut field) },
            ConradStatus::Ok
        );
        assert_eq!(unsafe { conrad_field_len(field) }, 512);

        let field_path = CString::new(dir.join("f.crtfld").to_str().unwrap()).unwrap();
        assert_eq!(
            unsafe { conrad_field_write(field, field_path.as_ptr()) },
            ConradStatus::Ok
        );
        let mut field2: *mut ConradField = std::ptr::null_mut();
        assert_eq!(
            unsafe { conrad_field_read(field_path.as_ptr(), &mut field2) },
            ConradStatus::Ok
        );
        let a = unsafe { std::slice::from_raw_parts(conrad_field_data(field), 512) };
        let b = unsafe { std::slice::from_raw_parts(conrad_field_data(field2), 512) };
        assert_eq!(a, b);

        let lattice = ConradLatticeSpec {
            u_min: -0.5,
            u_max: 0.5,
            u_count: 2,
            beta_count: 4,
            s_count: 9,
        };
        let mut sino: *mut ConradSinogram = std::ptr::null_mut();
        assert_eq!(
            unsafe { conrad_project_phantom(phantom, lattice, default_quad(), &mut sino) },
            ConradStatus::Ok
        );
        let mut shape = [0u64; 3];
        assert_eq!(
            unsafe { conrad_sinogram_shape(sino, shape.as_mut_ptr()) },
            ConradStatus::Ok
        );
        assert_eq!(shape, [2, 4, 9]);
        let mut v = -1.0;
        assert_eq!(
            unsafe { conrad_sinogram_value(sino, 0, 0, 4, &mut v) },
            ConradStatus::Ok
        );
        assert!(v.is_finite());

        let sino_path = CString::new(dir.join("s.csv").to_str().unwrap()).unwrap();
        assert_eq!(
            unsafe { conrad_sinogram_write_csv(sino, sino_path.as_ptr()) },
            ConradStatus::Ok
        );
        let mut sino2: *mut ConradSinogram = std::ptr::null_mut();
        assert_eq!(
            unsafe { conrad_sinogram_read_csv(sino_path.as_ptr(), &mut sino2) },
            ConradStatus::Ok
        );
        let mut v2 = -2.0;
        assert_eq!(
            unsafe { conrad_sinogram_value(sino2, 0, 0, 4, &mut v2) },
            ConradStatus::Ok
        );
        assert_eq!(v.to_bits(), v2.to_bits());

        unsafe {
            conrad_sinogram_free(sino);
            conrad_sinogram_free(sino2);
            conrad_field_free(field);
            conrad_field_free(field2);
            conrad_phantom_free(phantom);
        }
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn weighted_ray_through_ball() {
        let json = CString::new(BALL_JSON).unwrap();
        let mut phantom: *mut ConradPhantom = std::ptr::null_mut();
        assert_eq!(
            unsafe { conrad_phantom_from_json(json.as_ptr(), &mut phantom) },
            ConradStatus::Ok
        );
        let dir = [0.0, 1.0, 0.0];
        let mut v = 0.0;
        let quad = ConradQuadSpec { ray_step: 1e-3, ..default_quad() };
        assert_eq!(
            unsafe { conrad_weighted_ray(phantom, 0.0, dir.as_ptr(), quad, &mut v) },
            ConradStatus::Ok
        );
        assert!((v - 2.0).abs() / 2.0 < 0.002, "{v}");
        unsafe { conrad_phantom_free(phantom) };
    }
}
