//! C ABI over the plotbridge kernel.
//!
//! Every fallible call returns a `PbStatus`; on failure the message is
//! available from `pb_last_error()` on the same thread. Handles are opaque
//! and owned by the caller until passed to the matching `*_free`. Strings
//! returned through `char **` must be released with `pb_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use plotbridge::bridge::wire;
use plotbridge::data::{load_csv, CsvOptions, DataSource, RowIndexSet};
use plotbridge::parcoords::{line_to_dual_point, CartesianLine, DualPoint, PairIndex};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PbStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Data = 3,
    Script = 4,
    Render = 5,
    Query = 6,
    Panic = 99,
}

pub struct PbDataSource {
    data: Arc<DataSource>,
}

/// A parallel-coordinates index together with the data it was built on.
pub struct PbIndex {
    data: Arc<DataSource>,
    index: PairIndex,
}

pub struct PbRowSet {
    rows: RowIndexSet,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PbDualPoint {
    /// Non-zero when the line has slope 1; `x`, `y` then hold the direction.
    pub ideal: i32,
    pub x: f64,
    pub y: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let text = CString::new(msg.into().replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(text));
}

type Outcome = Result<(), (PbStatus, String)>;

/// Runs `f`, recording its error and turning panics into `Panic`.
fn guard(f: impl FnOnce() -> Outcome) -> PbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PbStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            PbStatus::Panic
        }
    }
}

fn fail<T>(status: PbStatus, e: impl ToString) -> Result<T, (PbStatus, String)> {
    Err((status, e.to_string()))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, (PbStatus, String)> {
    if p.is_null() {
        return fail(PbStatus::NullArgument, format!("{what} is null"));
    }
    CStr::from_ptr(p)
        .to_str()
        .or_else(|e| fail(PbStatus::InvalidUtf8, format!("{what}: {e}")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, (PbStatus, String)> {
    p.as_ref().ok_or((PbStatus::NullArgument, format!("{what} is null")))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Outcome {
    if out.is_null() {
        return fail(PbStatus::NullArgument, "output pointer is null");
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Outcome {
    if out.is_null() {
        return fail(PbStatus::NullArgument, "output pointer is null");
    }
    *out = CString::new(s).or_else(|e| fail(PbStatus::Render, e))?.into_raw();
    Ok(())
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn pb_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn pb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `s` must be null or a string returned by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn pb_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses CSV text with a header row.
///
/// # Safety
/// `csv` and `name` must be nul-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pb_datasource_from_csv(
    csv: *const c_char,
    name: *const c_char,
    out: *mut *mut PbDataSource,
) -> PbStatus {
    guard(|| {
        let csv = text(csv, "csv")?;
        let opts = CsvOptions {
            name: text(name, "name")?.to_string(),
            ..CsvOptions::default()
        };
        let data = load_csv(csv.as_bytes(), &opts).or_else(|e| fail(PbStatus::Data, e))?;
        put(out, PbDataSource { data: Arc::new(data) })
    })
}

/// Decodes the wire JSON form.
///
/// # Safety
/// `json` must be nul-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pb_datasource_from_json(json: *const c_char, out: *mut *mut PbDataSource) -> PbStatus {
    guard(|| {
        let data = wire::from_json_bytes(text(json, "json")?.as_bytes()).or_else(|e| fail(PbStatus::Data, e))?;
        put(out, PbDataSource { data: Arc::new(data) })
    })
}

/// Encodes to the wire JSON form.
///
/// # Safety
/// `data` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pb_datasource_to_json(data: *const PbDataSource, out: *mut *mut c_char) -> PbStatus {
    guard(|| {
        let d = handle(data, "data")?;
        let bytes = wire::to_json_bytes(&d.data);
        put_string(out, String::from_utf8(bytes).or_else(|e| fail(PbStatus::Data, e))?)
    })
}

/// # Safety
/// `data` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pb_datasource_n_rows(data: *const PbDataSource) -> usize {
    data.as_ref().map_or(0, |d| d.data.n_rows())
}

/// # Safety
/// `data` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pb_datasource_n_cols(data: *const PbDataSource) -> usize {
    data.as_ref().map_or(0, |d| d.data.n_cols())
}

/// # Safety
/// `data` must be null or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn pb_datasource_free(data: *mut PbDataSource) {
    if !data.is_null() {
        drop(Box::from_raw(data));
    }
}

/// Compiles a GoG script against `data` and renders it as SVG.
///
/// # Safety
/// `script` must be nul-terminated, `data` live, `out_svg` writable.
#[no_mangle]
pub unsafe extern "C" fn pb_render_script(
    script: *const c_char,
    data: *const PbDataSource,
    width: u32,
    height: u32,
    out_svg: *mut *mut c_char,
) -> PbStatus {
    guard(|| {
        let script = text(script, "script")?;
        let d = handle(data, "data")?;
        let scene = plotbridge::gog::compile_script(script, &d.data).or_else(|e| fail(PbStatus::Script, e))?;
        let svg = plotbridge::render::render_scene(&scene, (width, height), &[]).or_else(|e| fail(PbStatus::Render, e))?;
        put_string(out_svg, svg)
    })
}

/// Builds a parallel-coordinates index over the named quantitative columns.
///
/// # Safety
/// `axes` must point to `n_axes` nul-terminated strings; `data` must be live.
#[no_mangle]
pub unsafe extern "C" fn pb_index_build(
    data: *const PbDataSource,
    axes: *const *const c_char,
    n_axes: usize,
    spacing: f64,
    out: *mut *mut PbIndex,
) -> PbStatus {
    guard(|| {
        let d = handle(data, "data")?;
        if axes.is_null() && n_axes > 0 {
            return fail(PbStatus::NullArgument, "axes is null");
        }
        let names = (0..n_axes)
            .map(|i| text(*axes.add(i), "axis name"))
            .collect::<Result<Vec<_>, _>>()?;
        let layout = plotbridge::parcoords::layout(&d.data, &names, spacing).or_else(|e| fail(PbStatus::Query, e))?;
        let index = PairIndex::build(&layout, &d.data).or_else(|e| fail(PbStatus::Query, e))?;
        put(
            out,
            PbIndex {
                data: d.data.clone(),
                index,
            },
        )
    })
}

/// # Safety
/// `index` must be null or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn pb_index_free(index: *mut PbIndex) {
    if !index.is_null() {
        drop(Box::from_raw(index));
    }
}

/// Rows with `lo <= value <= hi` on `axis`, in data units.
///
/// # Safety
/// `index` must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pb_index_axis_interval(
    index: *const PbIndex,
    axis: usize,
    lo: f64,
    hi: f64,
    out: *mut *mut PbRowSet,
) -> PbStatus {
    guard(|| {
        let rows = handle(index, "index")?
            .index
            .axis_interval_query(axis, lo, hi)
            .or_else(|e| fail(PbStatus::Query, e))?;
        put(out, PbRowSet { rows })
    })
}

/// Rows whose segment in band `pair` crosses `x` within `[ylo, yhi]`
/// (normalized units).
///
/// # Safety
/// `index` must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pb_index_brush_segment(
    index: *const PbIndex,
    pair: usize,
    x: f64,
    ylo: f64,
    yhi: f64,
    out: *mut *mut PbRowSet,
) -> PbStatus {
    guard(|| {
        let rows = handle(index, "index")?
            .index
            .brush_segment_query(pair, x, ylo, yhi)
            .or_else(|e| fail(PbStatus::Query, e))?;
        put(out, PbRowSet { rows })
    })
}

/// Rows whose segment slope in band `pair` lies in `[lo, hi]`.
///
/// # Safety
/// `index` must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pb_index_slope(
    index: *const PbIndex,
    pair: usize,
    lo: f64,
    hi: f64,
    out: *mut *mut PbRowSet,
) -> PbStatus {
    guard(|| {
        let rows = handle(index, "index")?
            .index
            .slope_query(pair, lo, hi)
            .or_else(|e| fail(PbStatus::Query, e))?;
        put(out, PbRowSet { rows })
    })
}

/// Renders the indexed data on its axes. Rows in `highlight` (may be null)
/// are drawn as one selection group.
///
/// # Safety
/// `index` must be live, `highlight` null or live, `out_svg` writable.
#[no_mangle]
pub unsafe extern "C" fn pb_index_render_svg(
    index: *const PbIndex,
    highlight: *const PbRowSet,
    width: u32,
    height: u32,
    out_svg: *mut *mut c_char,
) -> PbStatus {
    guard(|| {
        let ix = handle(index, "index")?;
        let mut store = plotbridge::selection::GroupStore::new();
        if let Some(h) = highlight.as_ref() {
            store
                .create_group(&ix.data, h.rows.clone(), "highlight", None, None)
                .or_else(|e| fail(PbStatus::Query, e))?;
        }
        let groups: Vec<_> = store.for_source(ix.data.id()).cloned().collect();
        let svg = plotbridge::render::render_parcoords(ix.index.layout(), &ix.data, &groups, (width, height))
            .or_else(|e| fail(PbStatus::Render, e))?;
        put_string(out_svg, svg)
    })
}

/// # Safety
/// `rows` must be null or live.
#[no_mangle]
pub unsafe extern "C" fn pb_rowset_len(rows: *const PbRowSet) -> usize {
    rows.as_ref().map_or(0, |r| r.rows.len())
}

/// Ascending row indices; `pb_rowset_len` entries, valid while `rows` lives.
///
/// # Safety
/// `rows` must be null or live.
#[no_mangle]
pub unsafe extern "C" fn pb_rowset_data(rows: *const PbRowSet) -> *const usize {
    rows.as_ref().map_or(ptr::null(), |r| r.rows.as_slice().as_ptr())
}

/// # Safety
/// `rows` must be null or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn pb_rowset_free(rows: *mut PbRowSet) {
    if !rows.is_null() {
        drop(Box::from_raw(rows));
    }
}

/// Point where the segments induced by `y = slope * x + intercept` meet,
/// for axes `spacing` apart.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pb_dual_point(slope: f64, intercept: f64, spacing: f64, out: *mut PbDualPoint) -> PbStatus {
    guard(|| {
        if out.is_null() {
            return fail(PbStatus::NullArgument, "output pointer is null");
        }
        let p = line_to_dual_point(CartesianLine { slope, intercept }, spacing).or_else(|e| fail(PbStatus::Query, e))?;
        *out = match p {
            DualPoint::Point { x, y } => PbDualPoint { ideal: 0, x, y },
            DualPoint::Ideal { direction } => PbDualPoint {
                ideal: 1,
                x: direction.0,
                y: direction.1,
            },
        };
        Ok(())
    })
}
