//! C ABI over `ultrafit`.
//!
//! Objects cross the boundary as opaque handles created by `*_new`/`*_fit`
//! functions and released by the matching `*_free`. Every fallible call
//! returns an [`UltrafitStatus`]; on failure a message is kept per thread and
//! can be read with [`ultrafit_last_error`]. Strings returned to the caller
//! must be released with [`ultrafit_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ultrafit::dendro::Dendrogram;
use ultrafit::eval::distortion;
use ultrafit::pipeline::fit;
use ultrafit::{Algorithm, Error, PointSet, SpannerConfig};

/// Point set handle.
pub struct UltrafitPoints(PointSet);

/// Dendrogram handle; leaves are the rows of the point set it was fitted on.
pub struct UltrafitDendrogram(Dendrogram);

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UltrafitStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    EmptyInput = 3,
    OutOfRange = 4,
    InvalidDendrogram = 5,
    SizeMismatch = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UltrafitAlgorithm {
    Approx = 0,
    Acc = 1,
    Exact = 2,
    Single = 3,
    Complete = 4,
    Average = 5,
    Ward = 6,
}

impl From<UltrafitAlgorithm> for Algorithm {
    fn from(a: UltrafitAlgorithm) -> Self {
        match a {
            UltrafitAlgorithm::Approx => Algorithm::Approx,
            UltrafitAlgorithm::Acc => Algorithm::Acc,
            UltrafitAlgorithm::Exact => Algorithm::Exact,
            UltrafitAlgorithm::Single => Algorithm::Single,
            UltrafitAlgorithm::Complete => Algorithm::Complete,
            UltrafitAlgorithm::Average => Algorithm::Average,
            UltrafitAlgorithm::Ward => Algorithm::Ward,
        }
    }
}

/// Spanner parameters; `reps` and `projections` of 0 select the defaults.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct UltrafitSpannerConfig {
    pub gamma: f64,
    pub seed: u64,
    pub reps: usize,
    pub projections: usize,
}

impl From<UltrafitSpannerConfig> for SpannerConfig {
    fn from(c: UltrafitSpannerConfig) -> Self {
        SpannerConfig {
            gamma: c.gamma,
            seed: c.seed,
            reps: (c.reps > 0).then_some(c.reps),
            projections: (c.projections > 0).then_some(c.projections),
            ..SpannerConfig::default()
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct UltrafitDistortion {
    pub max: f64,
    pub min: f64,
    pub mean: f64,
    /// Pair attaining `max`; both equal when there are fewer than two leaves.
    pub argmax_u: usize,
    pub argmax_v: usize,
    pub pairs: u64,
    pub scale: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(err: &Error) -> UltrafitStatus {
    match err {
        Error::Empty => UltrafitStatus::EmptyInput,
        Error::IndexOutOfRange { .. } => UltrafitStatus::OutOfRange,
        Error::InvalidDendrogram(_) => UltrafitStatus::InvalidDendrogram,
        Error::ShapeMismatch { .. } | Error::MisalignedHeights { .. } => UltrafitStatus::SizeMismatch,
        _ => UltrafitStatus::InvalidArgument,
    }
}

/// Runs `f`, recording the error message and converting panics.
fn guard(f: impl FnOnce() -> Result<(), (UltrafitStatus, String)>) -> UltrafitStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => UltrafitStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            UltrafitStatus::Panic
        }
    }
}

fn lib(err: Error) -> (UltrafitStatus, String) {
    (status_of(&err), err.to_string())
}

fn null(name: &str) -> (UltrafitStatus, String) {
    (UltrafitStatus::NullPointer, format!("{name} is null"))
}

unsafe fn handle<'a, T>(p: *const T, name: &str) -> Result<&'a T, (UltrafitStatus, String)> {
    p.as_ref().ok_or_else(|| null(name))
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ultrafit_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

#[no_mangle]
pub extern "C" fn ultrafit_spanner_config_default() -> UltrafitSpannerConfig {
    let d = SpannerConfig::default();
    UltrafitSpannerConfig {
        gamma: d.gamma,
        seed: d.seed,
        reps: 0,
        projections: 0,
    }
}

/// Copies `n * d` row-major coordinates into a new point set.
///
/// # Safety
/// `coords` must point to `n * d` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ultrafit_points_new(
    coords: *const f64,
    n: usize,
    d: usize,
    out: *mut *mut UltrafitPoints,
) -> UltrafitStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        if coords.is_null() && n * d > 0 {
            return Err(null("coords"));
        }
        let len = n
            .checked_mul(d)
            .ok_or((UltrafitStatus::InvalidArgument, "n * d overflows".into()))?;
        let data = if len == 0 {
            Vec::new()
        } else {
            std::slice::from_raw_parts(coords, len).to_vec()
        };
        let points = PointSet::new(n, d, data).map_err(lib)?;
        *out = Box::into_raw(Box::new(UltrafitPoints(points)));
        Ok(())
    })
}

/// # Safety
/// `points` must be null or a handle from [`ultrafit_points_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ultrafit_points_free(points: *mut UltrafitPoints) {
    if !points.is_null() {
        drop(Box::from_raw(points));
    }
}

/// Number of points, or 0 for a null handle.
///
/// # Safety
/// `points` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ultrafit_points_len(points: *const UltrafitPoints) -> usize {
    points.as_ref().map_or(0, |p| p.0.len())
}

/// Fits `algorithm`. Duplicate points are allowed: copies are joined at
/// height zero, so the result always has one leaf per input row.
///
/// # Safety
/// `points` and `config` must be live/readable; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ultrafit_fit(
    points: *const UltrafitPoints,
    algorithm: UltrafitAlgorithm,
    config: *const UltrafitSpannerConfig,
    out: *mut *mut UltrafitDendrogram,
) -> UltrafitStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let points = &handle(points, "points")?.0;
        let config: SpannerConfig = (*handle(config, "config")?).into();
        config.validate().map_err(lib)?;
        let (distinct, multiplicity) = points.dedupe();
        let fitted = fit(&distinct, algorithm.into(), &config).map_err(lib)?;
        let dendro = fitted.dendrogram.expand(&multiplicity).map_err(lib)?;
        *out = Box::into_raw(Box::new(UltrafitDendrogram(dendro)));
        Ok(())
    })
}

/// # Safety
/// `dendrogram` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ultrafit_dendrogram_free(dendrogram: *mut UltrafitDendrogram) {
    if !dendrogram.is_null() {
        drop(Box::from_raw(dendrogram));
    }
}

/// Leaf count, or 0 for a null handle.
///
/// # Safety
/// `dendrogram` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ultrafit_dendrogram_n_leaves(dendrogram: *const UltrafitDendrogram) -> usize {
    dendrogram.as_ref().map_or(0, |d| d.0.num_leaves())
}

/// Ultrametric distance between leaves `u` and `v`.
///
/// # Safety
/// `dendrogram` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ultrafit_dendrogram_distance(
    dendrogram: *const UltrafitDendrogram,
    u: usize,
    v: usize,
    out: *mut f64,
) -> UltrafitStatus {
    guard(|| {
        let d = &handle(dendrogram, "dendrogram")?.0;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = d.ultra_distance(u, v).map_err(lib)?;
        Ok(())
    })
}

/// Copies the `n - 1` merges into caller arrays of at least `capacity`
/// entries. Internal node ids follow the leaves: merge `i` creates `n + i`.
///
/// # Safety
/// Each non-null array must hold `capacity` writable elements.
#[no_mangle]
pub unsafe extern "C" fn ultrafit_dendrogram_merges(
    dendrogram: *const UltrafitDendrogram,
    left: *mut usize,
    right: *mut usize,
    height: *mut f64,
    size: *mut usize,
    capacity: usize,
) -> UltrafitStatus {
    guard(|| {
        let d = &handle(dendrogram, "dendrogram")?.0;
        let merges = d.merges();
        if capacity < merges.len() {
            return Err((
                UltrafitStatus::BufferTooSmall,
                format!("need {} entries, capacity is {capacity}", merges.len()),
            ));
        }
        if merges.is_empty() {
            return Ok(());
        }
        if left.is_null() || right.is_null() || height.is_null() || size.is_null() {
            return Err(null("output array"));
        }
        for (i, m) in merges.iter().enumerate() {
            *left.add(i) = m.left;
            *right.add(i) = m.right;
            *height.add(i) = m.height;
            *size.add(i) = m.size;
        }
        Ok(())
    })
}

fn export(text: String, out: *mut *mut c_char) -> Result<(), (UltrafitStatus, String)> {
    let c =
        CString::new(text).map_err(|_| (UltrafitStatus::InvalidArgument, "label contains a nul byte".to_string()))?;
    unsafe { *out = c.into_raw() };
    Ok(())
}

/// Newick text with leaves labelled by index. Free with [`ultrafit_string_free`].
///
/// # Safety
/// `dendrogram` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ultrafit_dendrogram_to_newick(
    dendrogram: *const UltrafitDendrogram,
    out: *mut *mut c_char,
) -> UltrafitStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let d = &handle(dendrogram, "dendrogram")?.0;
        let labels: Vec<String> = (0..d.num_leaves()).map(|i| i.to_string()).collect();
        export(d.to_newick(&labels).map_err(lib)?, out)
    })
}

/// Rows of `left right height size`. Free with [`ultrafit_string_free`].
///
/// # Safety
/// `dendrogram` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ultrafit_dendrogram_to_merge_list(
    dendrogram: *const UltrafitDendrogram,
    out: *mut *mut c_char,
) -> UltrafitStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        export(handle(dendrogram, "dendrogram")?.0.to_merge_list(), out)
    })
}

/// Parses a merge list as written by [`ultrafit_dendrogram_to_merge_list`].
///
/// # Safety
/// `text` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ultrafit_dendrogram_from_merge_list(
    text: *const c_char,
    out: *mut *mut UltrafitDendrogram,
) -> UltrafitStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        if text.is_null() {
            return Err(null("text"));
        }
        let text = CStr::from_ptr(text)
            .to_str()
            .map_err(|_| (UltrafitStatus::InvalidArgument, "text is not UTF-8".to_string()))?;
        let d = Dendrogram::parse_merge_list(text).map_err(lib)?;
        *out = Box::into_raw(Box::new(UltrafitDendrogram(d)));
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ultrafit_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Exact distortion of `dendrogram` over all point pairs, optionally after
/// rescaling so that the smallest ratio is 1.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ultrafit_distortion(
    points: *const UltrafitPoints,
    dendrogram: *const UltrafitDendrogram,
    normalize: bool,
    out: *mut UltrafitDistortion,
) -> UltrafitStatus {
    guard(|| {
        let points = &handle(points, "points")?.0;
        let d = &handle(dendrogram, "dendrogram")?.0;
        if out.is_null() {
            return Err(null("out"));
        }
        if d.num_leaves() != points.len() {
            return Err((
                UltrafitStatus::SizeMismatch,
                format!(
                    "dendrogram has {} leaves, point set has {}",
                    d.num_leaves(),
                    points.len()
                ),
            ));
        }
        let r = distortion(points, d, normalize).map_err(lib)?;
        let (u, v) = r.argmax.unwrap_or((0, 0));
        *out = UltrafitDistortion {
            max: r.max,
            min: r.min,
            mean: r.mean,
            argmax_u: u,
            argmax_v: v,
            pairs: r.pairs,
            scale: r.scale,
        };
        Ok(())
    })
}
