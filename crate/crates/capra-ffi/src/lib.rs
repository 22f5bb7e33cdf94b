//! C ABI for the capra toolkit.
//!
//! Callers hold an opaque `CapraContext` carrying the source-norm
//! exponent, solver settings and the last error message. Every function
//! returns a `CapraStatus`; on failure `capra_last_error` yields a
//! human-readable message owned by the context.
//!
//! Extended-real values cross the boundary as IEEE doubles: `+inf` and
//! `-inf` map to the infinite variants, NaN is rejected.

use capra_core::capra::{self, PhiSpec, SubdiffCase};
use capra_core::extreal::ExtReal;
use capra_core::solver::SolverConfig;
use capra_core::{bounds, norms, CapraError, SourceNorm};
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

/// Status code returned by every FFI call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CapraStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    SolverFailure = 4,
    InternalPanic = 5,
}

/// Which case of the subdifferential formula applied.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CapraSubdiffCase {
    AtZero = 0,
    NonzeroFinite = 1,
    NonzeroInfiniteAll = 2,
    NonzeroEmpty = 3,
}

/// Subdifferential membership evidence (fixed-size part).
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct CapraSubdiffCertificate {
    pub member: bool,
    pub case_tag: CapraSubdiffCase,
    pub residual_coupling_eq: f64,
    pub residual_argmax: f64,
}

/// Ratio lower-bound report for l0.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct CapraBoundReport {
    pub phi_norm_value: f64,
    pub source_norm_value: f64,
    pub ratio: f64,
    pub phi_at_l0: f64,
    pub slack: f64,
    /// Certified integer lower bound on l0, or -1 when phi is not
    /// strictly increasing.
    pub integer_bound: i64,
}

/// Opaque evaluation context: source norm, solver settings, last error.
pub struct CapraContext {
    src: SourceNorm,
    cfg: SolverConfig,
    last_error: Option<CString>,
}

impl CapraContext {
    fn set_error(&mut self, e: &CapraError) -> CapraStatus {
        self.last_error = CString::new(e.to_string()).ok();
        match e {
            CapraError::DimensionMismatch { .. } => CapraStatus::DimensionMismatch,
            CapraError::SolverDidNotConverge { .. } => CapraStatus::SolverFailure,
            _ => CapraStatus::InvalidArgument,
        }
    }

    fn set_message(&mut self, msg: &str, status: CapraStatus) -> CapraStatus {
        self.last_error = CString::new(msg).ok();
        status
    }
}

/// Creates a context for the lp source norm; `p` may be `INFINITY`.
/// Returns NULL when `p < 1` or NaN.
#[no_mangle]
pub extern "C" fn capra_context_new(p: f64) -> *mut CapraContext {
    match SourceNorm::new(p) {
        Ok(src) => Box::into_raw(Box::new(CapraContext {
            src,
            cfg: SolverConfig::default(),
            last_error: None,
        })),
        Err(_) => std::ptr::null_mut(),
    }
}

/// Frees a context created by `capra_context_new`. NULL is ignored.
///
/// # Safety
/// `ctx` must be NULL or a pointer returned by `capra_context_new` that
/// has not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn capra_context_free(ctx: *mut CapraContext) {
    if !ctx.is_null() {
        drop(Box::from_raw(ctx));
    }
}

/// Last error message for this context, or NULL; owned by the context
/// and valid until the next failing call.
///
/// # Safety
/// `ctx` must be a live context pointer.
#[no_mangle]
pub unsafe extern "C" fn capra_last_error(ctx: *const CapraContext) -> *const c_char {
    if ctx.is_null() {
        return std::ptr::null();
    }
    match &(*ctx).last_error {
        Some(msg) => msg.as_ptr(),
        None => std::ptr::null(),
    }
}

/// Sets the solver tolerance.
///
/// # Safety
/// `ctx` must be a live context pointer.
#[no_mangle]
pub unsafe extern "C" fn capra_context_set_tolerance(
    ctx: *mut CapraContext,
    tol: f64,
) -> CapraStatus {
    let Some(ctx) = ctx.as_mut() else {
        return CapraStatus::NullPointer;
    };
    if !(tol > 0.0) {
        return ctx.set_message("tolerance must be positive", CapraStatus::InvalidArgument);
    }
    ctx.cfg.tol = tol;
    CapraStatus::Ok
}

/// Sets the solver iteration budget.
///
/// # Safety
/// `ctx` must be a live context pointer.
#[no_mangle]
pub unsafe extern "C" fn capra_context_set_max_iters(
    ctx: *mut CapraContext,
    max_iters: usize,
) -> CapraStatus {
    let Some(ctx) = ctx.as_mut() else {
        return CapraStatus::NullPointer;
    };
    if max_iters == 0 {
        return ctx.set_message("max_iters must be positive", CapraStatus::InvalidArgument);
    }
    ctx.cfg.max_iters = max_iters;
    CapraStatus::Ok
}

/// Sets the solver seed.
///
/// # Safety
/// `ctx` must be a live context pointer.
#[no_mangle]
pub unsafe extern "C" fn capra_context_set_seed(ctx: *mut CapraContext, seed: u64) -> CapraStatus {
    let Some(ctx) = ctx.as_mut() else {
        return CapraStatus::NullPointer;
    };
    ctx.cfg.seed = seed;
    CapraStatus::Ok
}

unsafe fn read_vector(ptr: *const f64, dim: usize) -> Option<Vec<f64>> {
    if ptr.is_null() || dim == 0 {
        return None;
    }
    let slice = std::slice::from_raw_parts(ptr, dim);
    if slice.iter().any(|v| v.is_nan()) {
        return None;
    }
    Some(slice.to_vec())
}

unsafe fn read_phi(ptr: *const f64, dim: usize) -> Option<PhiSpec> {
    if ptr.is_null() {
        return None;
    }
    let slice = std::slice::from_raw_parts(ptr, dim + 1);
    if slice.iter().any(|v| v.is_nan()) {
        return None;
    }
    PhiSpec::new(slice.iter().map(|&v| ExtReal::from_f64(v)).collect()).ok()
}

unsafe fn with_ctx(
    ctx: *mut CapraContext,
    body: impl FnOnce(&mut CapraContext) -> Result<(), CapraError>,
) -> CapraStatus {
    let Some(ctx) = ctx.as_mut() else {
        return CapraStatus::NullPointer;
    };
    match catch_unwind(AssertUnwindSafe(|| body(ctx))) {
        Ok(Ok(())) => CapraStatus::Ok,
        Ok(Err(e)) => ctx.set_error(&e),
        Err(_) => ctx.set_message("internal panic", CapraStatus::InternalPanic),
    }
}

/// Number of entries of `x` with magnitude above `tol`.
///
/// # Safety
/// `x` must point to `dim` doubles; `out` must be a valid destination.
#[no_mangle]
pub unsafe extern "C" fn capra_l0(
    ctx: *mut CapraContext,
    x: *const f64,
    dim: usize,
    tol: f64,
    out: *mut usize,
) -> CapraStatus {
    if out.is_null() {
        return CapraStatus::NullPointer;
    }
    with_ctx(ctx, |_| {
        let x = read_vector(x, dim)
            .ok_or_else(|| CapraError::InvalidArgument("bad input vector".into()))?;
        *out = capra_core::l0core::l0(&x, tol);
        Ok(())
    })
}

/// Source norm of `x`.
///
/// # Safety
/// `x` must point to `dim` doubles; `out` must be a valid destination.
#[no_mangle]
pub unsafe extern "C" fn capra_source_norm(
    ctx: *mut CapraContext,
    x: *const f64,
    dim: usize,
    out: *mut f64,
) -> CapraStatus {
    if out.is_null() {
        return CapraStatus::NullPointer;
    }
    with_ctx(ctx, |c| {
        let x = read_vector(x, dim)
            .ok_or_else(|| CapraError::InvalidArgument("bad input vector".into()))?;
        *out = norms::source_norm(&x, c.src);
        Ok(())
    })
}

/// Dual norm of `y`.
///
/// # Safety
/// `y` must point to `dim` doubles; `out` must be a valid destination.
#[no_mangle]
pub unsafe extern "C" fn capra_dual_norm(
    ctx: *mut CapraContext,
    y: *const f64,
    dim: usize,
    out: *mut f64,
) -> CapraStatus {
    if out.is_null() {
        return CapraStatus::NullPointer;
    }
    with_ctx(ctx, |c| {
        let y = read_vector(y, dim)
            .ok_or_else(|| CapraError::InvalidArgument("bad input vector".into()))?;
        *out = norms::dual_norm(&y, c.src);
        Ok(())
    })
}

/// Coordinate-k norm of `x` (1 <= k <= dim).
///
/// # Safety
/// `x` must point to `dim` doubles; `out` must be a valid destination.
#[no_mangle]
pub unsafe extern "C" fn capra_coordinate_norm(
    ctx: *mut CapraContext,
    x: *const f64,
    dim: usize,
    k: usize,
    out: *mut f64,
) -> CapraStatus {
    if out.is_null() {
        return CapraStatus::NullPointer;
    }
    with_ctx(ctx, |c| {
        let x = read_vector(x, dim)
            .ok_or_else(|| CapraError::InvalidArgument("bad input vector".into()))?;
        *out = norms::coordinate_norm(&x, k, c.src)?;
        Ok(())
    })
}

/// Dual coordinate-k norm of `y` (0 <= k <= dim; k = 0 gives 0).
///
/// # Safety
/// `y` must point to `dim` doubles; `out` must be a valid destination.
#[no_mangle]
pub unsafe extern "C" fn capra_dual_coordinate_norm(
    ctx: *mut CapraContext,
    y: *const f64,
    dim: usize,
    k: usize,
    out: *mut f64,
) -> CapraStatus {
    if out.is_null() {
        return CapraStatus::NullPointer;
    }
    with_ctx(ctx, |c| {
        let y = read_vector(y, dim)
            .ok_or_else(|| CapraError::InvalidArgument("bad input vector".into()))?;
        *out = norms::dual_coordinate_norm(&y, k, c.src)?;
        Ok(())
    })
}

/// Fills `values_out` and `dual_values_out` (both of length `dim`) with
/// the coordinate-k and dual coordinate-k norm sequences of `x`.
///
/// # Safety
/// `x` must point to `dim` doubles; both outputs must hold `dim` doubles.
#[no_mangle]
pub unsafe extern "C" fn capra_norm_sequence(
    ctx: *mut CapraContext,
    x: *const f64,
    dim: usize,
    values_out: *mut f64,
    dual_values_out: *mut f64,
) -> CapraStatus {
    if values_out.is_null() || dual_values_out.is_null() {
        return CapraStatus::NullPointer;
    }
    with_ctx(ctx, |c| {
        let x = read_vector(x, dim)
            .ok_or_else(|| CapraError::InvalidArgument("bad input vector".into()))?;
        let seq = norms::norm_sequence(&x, c.src)?;
        std::ptr::copy_nonoverlapping(seq.values.as_ptr(), values_out, dim);
        std::ptr::copy_nonoverlapping(seq.dual_values.as_ptr(), dual_values_out, dim);
        Ok(())
    })
}

/// Smallest k whose coordinate-k norm equals the source norm of `x`
/// within relative `tol`; equals l0(x) for strictly convex sources.
///
/// # Safety
/// `x` must point to `dim` doubles; `out` must be a valid destination.
#[no_mangle]
pub unsafe extern "C" fn capra_sparsity_from_grading(
    ctx: *mut CapraContext,
    x: *const f64,
    dim: usize,
    tol: f64,
    out: *mut usize,
) -> CapraStatus {
    if out.is_null() {
        return CapraStatus::NullPointer;
    }
    with_ctx(ctx, |c| {
        let x = read_vector(x, dim)
            .ok_or_else(|| CapraError::InvalidArgument("bad input vector".into()))?;
        *out = norms::sparsity_from_grading(&x, c.src, tol)?;
        Ok(())
    })
}

/// Conjugate of `phi(l0(.))` at `y`; `phi` holds `dim + 1` doubles with
/// IEEE infinities allowed. The result uses IEEE infinities as well.
///
/// # Safety
/// `phi` must point to `dim + 1` doubles, `y` to `dim`; `out` must be a
/// valid destination.
#[no_mangle]
pub unsafe extern "C" fn capra_conjugate(
    ctx: *mut CapraContext,
    phi: *const f64,
    y: *const f64,
    dim: usize,
    out: *mut f64,
) -> CapraStatus {
    if out.is_null() {
        return CapraStatus::NullPointer;
    }
    with_ctx(ctx, |c| {
        let phi = read_phi(phi, dim)
            .ok_or_else(|| CapraError::InvalidPhi("bad phi table".into()))?;
        let y = read_vector(y, dim)
            .ok_or_else(|| CapraError::InvalidArgument("bad input vector".into()))?;
        *out = capra::capra_conjugate(&phi, &y, c.src)?.to_f64();
        Ok(())
    })
}

/// Biconjugate of `phi(l0(.))` at `x`. `value_out` uses IEEE infinities;
/// `variational_out` and `gap_out` are NaN when the decomposition route
/// does not apply.
///
/// # Safety
/// `phi` must point to `dim + 1` doubles, `x` to `dim`; outputs must be
/// valid destinations.
#[no_mangle]
pub unsafe extern "C" fn capra_biconjugate(
    ctx: *mut CapraContext,
    phi: *const f64,
    x: *const f64,
    dim: usize,
    value_out: *mut f64,
    variational_out: *mut f64,
    gap_out: *mut f64,
) -> CapraStatus {
    if value_out.is_null() || variational_out.is_null() || gap_out.is_null() {
        return CapraStatus::NullPointer;
    }
    with_ctx(ctx, |c| {
        let phi = read_phi(phi, dim)
            .ok_or_else(|| CapraError::InvalidPhi("bad phi table".into()))?;
        let x = read_vector(x, dim)
            .ok_or_else(|| CapraError::InvalidArgument("bad input vector".into()))?;
        let b = capra::capra_biconjugate(&phi, &x, c.src, &c.cfg)?;
        *value_out = b.value.to_f64();
        *variational_out = b.variational.unwrap_or(f64::NAN);
        *gap_out = b.gap.unwrap_or(f64::NAN);
        Ok(())
    })
}

/// Biconjugate of the level-set indicator `delta_{l0 <= k}` at `x`:
/// 0 or IEEE `+inf`.
///
/// # Safety
/// `x` must point to `dim` doubles; `out` must be a valid destination.
#[no_mangle]
pub unsafe extern "C" fn capra_biconjugate_levelset(
    ctx: *mut CapraContext,
    k: usize,
    x: *const f64,
    dim: usize,
    tol: f64,
    out: *mut f64,
) -> CapraStatus {
    if out.is_null() {
        return CapraStatus::NullPointer;
    }
    with_ctx(ctx, |c| {
        let x = read_vector(x, dim)
            .ok_or_else(|| CapraError::InvalidArgument("bad input vector".into()))?;
        *out = capra::biconjugate_levelset_indicator(k, &x, c.src, tol)?.to_f64();
        Ok(())
    })
}

/// Subdifferential membership: pass `x = NULL` to test at the origin.
///
/// # Safety
/// `phi` must point to `dim + 1` doubles, `y` (and `x` when non-NULL) to
/// `dim`; `cert_out` must be a valid destination.
#[no_mangle]
pub unsafe extern "C" fn capra_subdiff_membership(
    ctx: *mut CapraContext,
    phi: *const f64,
    x: *const f64,
    y: *const f64,
    dim: usize,
    tol: f64,
    cert_out: *mut CapraSubdiffCertificate,
) -> CapraStatus {
    if cert_out.is_null() {
        return CapraStatus::NullPointer;
    }
    with_ctx(ctx, |c| {
        let phi = read_phi(phi, dim)
            .ok_or_else(|| CapraError::InvalidPhi("bad phi table".into()))?;
        let y = read_vector(y, dim)
            .ok_or_else(|| CapraError::InvalidArgument("bad input vector".into()))?;
        let cert = if x.is_null() {
            capra::subdiff_at_zero_contains(&phi, &y, c.src, tol)?
        } else {
            let x = read_vector(x, dim)
                .ok_or_else(|| CapraError::InvalidArgument("bad input vector".into()))?;
            capra::subdiff_membership(&phi, &x, &y, c.src, tol)?
        };
        *cert_out = CapraSubdiffCertificate {
            member: cert.member,
            case_tag: match cert.case_tag {
                SubdiffCase::AtZero => CapraSubdiffCase::AtZero,
                SubdiffCase::NonzeroFinite => CapraSubdiffCase::NonzeroFinite,
                SubdiffCase::NonzeroInfiniteAll => CapraSubdiffCase::NonzeroInfiniteAll,
                SubdiffCase::NonzeroEmpty => CapraSubdiffCase::NonzeroEmpty,
            },
            residual_coupling_eq: cert.residual_coupling_eq,
            residual_argmax: cert.residual_argmax,
        };
        Ok(())
    })
}

/// Phi-norm of `x` (phi finite positive with phi(0) = 0).
///
/// # Safety
/// `phi` must point to `dim + 1` doubles, `x` to `dim`; `out` must be a
/// valid destination.
#[no_mangle]
pub unsafe extern "C" fn capra_phi_norm(
    ctx: *mut CapraContext,
    phi: *const f64,
    x: *const f64,
    dim: usize,
    out: *mut f64,
) -> CapraStatus {
    if out.is_null() {
        return CapraStatus::NullPointer;
    }
    with_ctx(ctx, |c| {
        let phi = read_phi(phi, dim)
            .ok_or_else(|| CapraError::InvalidPhi("bad phi table".into()))?;
        let x = read_vector(x, dim)
            .ok_or_else(|| CapraError::InvalidArgument("bad input vector".into()))?;
        *out = bounds::phi_norm(&x, &phi, c.src, &c.cfg)?;
        Ok(())
    })
}

/// Dual phi-norm of `y`.
///
/// # Safety
/// `phi` must point to `dim + 1` doubles, `y` to `dim`; `out` must be a
/// valid destination.
#[no_mangle]
pub unsafe extern "C" fn capra_dual_phi_norm(
    ctx: *mut CapraContext,
    phi: *const f64,
    y: *const f64,
    dim: usize,
    out: *mut f64,
) -> CapraStatus {
    if out.is_null() {
        return CapraStatus::NullPointer;
    }
    with_ctx(ctx, |c| {
        let phi = read_phi(phi, dim)
            .ok_or_else(|| CapraError::InvalidPhi("bad phi table".into()))?;
        let y = read_vector(y, dim)
            .ok_or_else(|| CapraError::InvalidArgument("bad input vector".into()))?;
        *out = bounds::dual_phi_norm(&y, &phi, c.src)?;
        Ok(())
    })
}

/// Ratio lower bound on l0(x); see `CapraBoundReport`.
///
/// # Safety
/// `phi` must point to `dim + 1` doubles, `x` to `dim`; `report_out`
/// must be a valid destination.
#[no_mangle]
pub unsafe extern "C" fn capra_l0_lower_bound(
    ctx: *mut CapraContext,
    phi: *const f64,
    x: *const f64,
    dim: usize,
    report_out: *mut CapraBoundReport,
) -> CapraStatus {
    if report_out.is_null() {
        return CapraStatus::NullPointer;
    }
    with_ctx(ctx, |c| {
        let phi = read_phi(phi, dim)
            .ok_or_else(|| CapraError::InvalidPhi("bad phi table".into()))?;
        let x = read_vector(x, dim)
            .ok_or_else(|| CapraError::InvalidArgument("bad input vector".into()))?;
        let report = bounds::l0_lower_bound(&x, &phi, c.src, &c.cfg)?;
        *report_out = CapraBoundReport {
            phi_norm_value: report.phi_norm_value,
            source_norm_value: report.source_norm_value,
            ratio: report.ratio,
            phi_at_l0: report.phi_at_l0,
            slack: report.slack,
            integer_bound: report.integer_bound.map_or(-1, |b| b as i64),
        };
        Ok(())
    })
}

/// Hoelder ratio bound `(||x||_1 / ||x||_p)^q`, a lower bound on l0(x);
/// requires p > 1.
///
/// # Safety
/// `x` must point to `dim` doubles; `out` must be a valid destination.
#[no_mangle]
pub unsafe extern "C" fn capra_holder_ratio_bound(
    ctx: *mut CapraContext,
    x: *const f64,
    dim: usize,
    out: *mut f64,
) -> CapraStatus {
    if out.is_null() {
        return CapraStatus::NullPointer;
    }
    with_ctx(ctx, |c| {
        let x = read_vector(x, dim)
            .ok_or_else(|| CapraError::InvalidArgument("bad input vector".into()))?;
        *out = bounds::holder_ratio_bound(&x, c.src)?;
        Ok(())
    })
}
