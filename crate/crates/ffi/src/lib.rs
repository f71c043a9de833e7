//! C ABI over `sparsrec`.
//!
//! Objects are opaque handles created by `*_new`/`*_build` functions and
//! released with the matching `*_free`. Every fallible call returns a
//! [`SparsrecStatus`]; on failure the message is available from
//! [`sparsrec_last_error_message`] on the same thread. Matrices are passed
//! column-major.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use nalgebra::{DMatrix, DVector};
use sparsrec::fem::{Dim, Discretization};
use sparsrec::operators::{ProjectorWeights, SvdFactors};
use sparsrec::solver::{AdmmSolver, SolverConfig};
use sparsrec::theory::{max_property_scan, predict_noise_free};
use sparsrec::Error;

/// Result codes shared by all functions.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SparsrecStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Assembly = 3,
    Numeric = 4,
    WeightDegeneracy = 5,
    AssumptionViolation = 6,
    TheoremViolation = 7,
    AmbiguousArgmax = 8,
    Config = 9,
    Io = 10,
    Panic = 11,
}

impl From<&Error> for SparsrecStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InvalidArgument(_) => SparsrecStatus::InvalidArgument,
            Error::Assembly(_) => SparsrecStatus::Assembly,
            Error::Numeric(_) => SparsrecStatus::Numeric,
            Error::WeightDegeneracy { .. } => SparsrecStatus::WeightDegeneracy,
            Error::AssumptionViolation { .. } => SparsrecStatus::AssumptionViolation,
            Error::TheoremViolation(_) => SparsrecStatus::TheoremViolation,
            Error::AmbiguousArgmax(..) => SparsrecStatus::AmbiguousArgmax,
            Error::Config(_) => SparsrecStatus::Config,
            Error::Io(_) | Error::Csv(_) | Error::Image(_) => SparsrecStatus::Io,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

struct Failure(SparsrecStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(SparsrecStatus::from(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(SparsrecStatus::NullPointer, format!("{what} is null"))
}

fn bad(msg: impl Into<String>) -> Failure {
    Failure(SparsrecStatus::InvalidArgument, msg.into())
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> SparsrecStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SparsrecStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            SparsrecStatus::Panic
        }
    }
}

unsafe fn input<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn output<'a>(p: *mut f64, len: usize, need: usize, what: &str) -> Result<&'a mut [f64], Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    if len < need {
        return Err(bad(format!("{what} holds {len} values, {need} required")));
    }
    Ok(slice::from_raw_parts_mut(p, need))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn emit<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output handle"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// Transfer matrix of a unit interval or square, with its SVD.
pub struct SparsrecTransfer {
    disc: Discretization,
    svd: SvdFactors,
}

/// Projector `P_k` and weights `w_i = ‖P_k e_i‖₂`.
pub struct SparsrecWeights {
    pw: ProjectorWeights,
}

/// Solver for `min ½‖Bx − c‖² + α‖diag(w)x‖₁` with a fixed `B`.
pub struct SparsrecSolver {
    solver: AdmmSolver,
}

/// Message of the last failed call on this thread, or null. The pointer stays
/// valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn sparsrec_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Assembles the transfer matrix for `dim` (1 or 2), `nodes_per_side` mesh
/// nodes, `source_cells` coarse cells per side and reaction coefficient
/// `epsilon`.
///
/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn sparsrec_transfer_build(
    dim: u32,
    nodes_per_side: usize,
    source_cells: usize,
    epsilon: f64,
    out: *mut *mut SparsrecTransfer,
) -> SparsrecStatus {
    guard(|| {
        let dim = Dim::from_usize(dim as usize)?;
        let disc = Discretization::build(dim, nodes_per_side, source_cells, epsilon)?;
        let svd = SvdFactors::compute(disc.transfer.matrix())?;
        emit(out, SparsrecTransfer { disc, svd })
    })
}

/// # Safety
/// `h` must be null or a handle from [`sparsrec_transfer_build`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sparsrec_transfer_free(h: *mut SparsrecTransfer) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Writes the row count `m`, column count `n` and numerical rank.
///
/// # Safety
/// `h` must be a live transfer handle; the output pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn sparsrec_transfer_shape(
    h: *const SparsrecTransfer,
    m: *mut usize,
    n: *mut usize,
    rank: *mut usize,
) -> SparsrecStatus {
    guard(|| {
        let t = handle(h, "transfer")?;
        if m.is_null() || n.is_null() || rank.is_null() {
            return Err(null("shape output"));
        }
        *m = t.disc.transfer.nrows();
        *n = t.disc.transfer.ncols();
        *rank = t.svd.rank();
        Ok(())
    })
}

/// Copies `A` column-major into `buf` (at least `m·n` values).
///
/// # Safety
/// `h` must be a live transfer handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn sparsrec_transfer_matrix(h: *const SparsrecTransfer, buf: *mut f64, len: usize) -> SparsrecStatus {
    guard(|| {
        let a = handle(h, "transfer")?.disc.transfer.matrix();
        output(buf, len, a.len(), "matrix buffer")?.copy_from_slice(a.as_slice());
        Ok(())
    })
}

/// Builds `P_k` and its weights; `k = 0` selects the full numerical rank.
///
/// # Safety
/// `t` must be a live transfer handle and `out` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn sparsrec_weights_new(
    t: *const SparsrecTransfer,
    k: usize,
    out: *mut *mut SparsrecWeights,
) -> SparsrecStatus {
    guard(|| {
        let t = handle(t, "transfer")?;
        let pw = ProjectorWeights::new(&t.svd, (k > 0).then_some(k))?;
        emit(out, SparsrecWeights { pw })
    })
}

/// # Safety
/// `h` must be null or a handle from [`sparsrec_weights_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sparsrec_weights_free(h: *mut SparsrecWeights) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Copies the `n` weights into `buf`.
///
/// # Safety
/// `h` must be a live weights handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn sparsrec_weights_get(h: *const SparsrecWeights, buf: *mut f64, len: usize) -> SparsrecStatus {
    guard(|| {
        let w = handle(h, "weights")?.pw.weights();
        output(buf, len, w.len(), "weight buffer")?.copy_from_slice(w.as_slice());
        Ok(())
    })
}

/// Copies `P_k e_j` into `buf`.
///
/// # Safety
/// `h` must be a live weights handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn sparsrec_weights_projected_unit(
    h: *const SparsrecWeights,
    j: usize,
    buf: *mut f64,
    len: usize,
) -> SparsrecStatus {
    guard(|| {
        let pw = &handle(h, "weights")?.pw;
        if j >= pw.dim() {
            return Err(bad(format!("index {j} out of range (n = {})", pw.dim())));
        }
        let col = pw.column(j);
        output(buf, len, col.len(), "column buffer")?.copy_from_slice(col.as_slice());
        Ok(())
    })
}

/// Noise-free single-spike prediction: `γ = 1 − α/[W⁻¹Pe_j]_j`, the upper
/// bound `[W⁻¹Pe_j]_j`, and whether `α` lies below it.
///
/// # Safety
/// `h` must be a live weights handle; the output pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn sparsrec_predict_noise_free(
    h: *const SparsrecWeights,
    j: usize,
    alpha: f64,
    gamma: *mut f64,
    alpha_upper: *mut f64,
    feasible: *mut bool,
) -> SparsrecStatus {
    guard(|| {
        let pw = &handle(h, "weights")?.pw;
        if gamma.is_null() || alpha_upper.is_null() || feasible.is_null() {
            return Err(null("prediction output"));
        }
        let p = predict_noise_free(pw, j, alpha)?;
        *gamma = p.gamma;
        *alpha_upper = p.alpha_upper;
        *feasible = p.feasible;
        Ok(())
    })
}

/// Sets `holds` when `argmax_i |[W⁻¹Pe_j]_i| = j` for every `j`; `failures`
/// receives the number of violating or ambiguous columns.
///
/// # Safety
/// `h` must be a live weights handle; the output pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn sparsrec_max_property(
    h: *const SparsrecWeights,
    holds: *mut bool,
    failures: *mut usize,
) -> SparsrecStatus {
    guard(|| {
        let pw = &handle(h, "weights")?.pw;
        if holds.is_null() || failures.is_null() {
            return Err(null("max-property output"));
        }
        let scan = max_property_scan(pw);
        *holds = scan.holds();
        *failures = scan.failures.len() + scan.ambiguous.len();
        Ok(())
    })
}

/// Solver with fidelity operator `B` (`rows × cols`, column-major).
///
/// # Safety
/// `b` must be valid for `rows·cols` reads and `out` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn sparsrec_solver_new(
    b: *const f64,
    rows: usize,
    cols: usize,
    out: *mut *mut SparsrecSolver,
) -> SparsrecStatus {
    guard(|| {
        if rows == 0 || cols == 0 {
            return Err(bad("operator must be non-empty"));
        }
        let len = rows.checked_mul(cols).ok_or_else(|| bad("operator size overflows"))?;
        let data = input(b, len, "operator")?;
        let solver = AdmmSolver::new(DMatrix::from_column_slice(rows, cols, data))?;
        emit(out, SparsrecSolver { solver })
    })
}

/// Solver with `B = P_k` taken from a weights handle.
///
/// # Safety
/// `h` must be a live weights handle and `out` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn sparsrec_solver_from_weights(
    h: *const SparsrecWeights,
    out: *mut *mut SparsrecSolver,
) -> SparsrecStatus {
    guard(|| {
        let pw = &handle(h, "weights")?.pw;
        let solver = AdmmSolver::new(pw.matrix())?;
        emit(out, SparsrecSolver { solver })
    })
}

/// # Safety
/// `h` must be null or a solver handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sparsrec_solver_free(h: *mut SparsrecSolver) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Solves with default settings. `c` has one entry per row of `B`; `w` and
/// `x` one per column. `iterations` and `converged` may be null.
///
/// # Safety
/// All array pointers must be valid for their stated lengths.
#[no_mangle]
pub unsafe extern "C" fn sparsrec_solver_solve(
    h: *const SparsrecSolver,
    c: *const f64,
    c_len: usize,
    w: *const f64,
    w_len: usize,
    alpha: f64,
    x: *mut f64,
    x_len: usize,
    iterations: *mut usize,
    converged: *mut bool,
) -> SparsrecStatus {
    guard(|| {
        let s = &handle(h, "solver")?.solver;
        let (rows, cols) = s.operator().shape();
        if c_len != rows || w_len != cols {
            return Err(bad(format!(
                "expected {rows} data values and {cols} weights, got {c_len} and {w_len}"
            )));
        }
        let c = DVector::from_column_slice(input(c, c_len, "data")?);
        let w = DVector::from_column_slice(input(w, w_len, "weights")?);
        let out = output(x, x_len, cols, "solution buffer")?;
        let r = s.solve(&c, &w, alpha, &SolverConfig::default(), None)?;
        out.copy_from_slice(r.x.as_slice());
        if !iterations.is_null() {
            *iterations = r.iterations;
        }
        if !converged.is_null() {
            *converged = r.converged;
        }
        Ok(())
    })
}
