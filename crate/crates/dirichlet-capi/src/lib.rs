//! C ABI over the dirichlet crate.
//!
//! Groups, built domains and spectra are opaque handles; every fallible call
//! returns a status code and the last error message is kept per thread.
//! The generated header is written to `include/dirichlet.h` at build time.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::ptr;

use dirichlet::formats::{self, GeneratorFile};
use dirichlet::moebius::Word;
use dirichlet::pipeline::{self, RunConfig, SpectrumRun};
use dirichlet::tolerance::Tolerance;
use dirichlet::wordprob;

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl std::fmt::Display) {
    let c = CString::new(msg.to_string()).unwrap_or_else(|_| CString::new("error").unwrap());
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum DirichletStatus {
    Ok = 0,
    NullArgument = 1,
    ParseError = 2,
    NotConverged = 3,
    GeneratorNotFace = 4,
    ExplosionGuard = 5,
    InsufficientRadius = 6,
    OracleFailed = 7,
    BadConfig = 8,
    InternalError = 9,
}

/// An input group: parsed generators plus run configuration.
pub struct DirichletGroup {
    file: GeneratorFile,
    config: RunConfig,
}

/// A finished pipeline run.
pub struct DirichletRun {
    run: SpectrumRun,
    name: String,
    tolerance: Tolerance,
}

/// Scalar statistics of a built domain, mirrored into C.
#[repr(C)]
#[derive(Clone, Copy)]
pub struct DirichletStats {
    pub injectivity_radius: f64,
    /// Negative when undefined.
    pub spine_radius: f64,
    /// Negative when unbounded or not computed.
    pub volume: f64,
    pub volume_error: f64,
    /// Negative when every vertex is ideal.
    pub max_vertex_distance: f64,
    pub word_length_reached: u32,
    pub converged: bool,
    pub cusped: bool,
    pub vertex_count: u32,
    pub edge_count: u32,
    pub face_count: u32,
    pub tile_count: u64,
    pub coverage_fraction: f64,
    pub oracle_passed: bool,
}

/// One spectrum line.
#[repr(C)]
#[derive(Clone, Copy)]
pub struct DirichletSpectrumEntry {
    pub lambda: f64,
    pub theta: f64,
    pub multiplicity: u64,
}

/// Message of the most recent error on this thread, or NULL.
///
/// # Safety
/// The returned pointer is valid until the next failing call on the same
/// thread; do not free it.
#[no_mangle]
pub unsafe extern "C" fn dirichlet_last_error() -> *const c_char {
    LAST_ERROR.with(|e| {
        e.borrow()
            .as_ref()
            .map(|c| c.as_ptr())
            .unwrap_or(ptr::null())
    })
}

/// Free a string returned by this library.
///
/// # Safety
/// `s` must have been returned by a `dirichlet_*` function and not freed yet.
#[no_mangle]
pub unsafe extern "C" fn dirichlet_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parse a generator file into a group handle with default configuration.
///
/// # Safety
/// `text` must be a valid NUL-terminated UTF-8 string; `out` must be a valid
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn dirichlet_group_parse(
    text: *const c_char,
    out: *mut *mut DirichletGroup,
) -> DirichletStatus {
    if text.is_null() || out.is_null() {
        set_error("null argument");
        return DirichletStatus::NullArgument;
    }
    let Ok(text) = CStr::from_ptr(text).to_str() else {
        set_error("input is not UTF-8");
        return DirichletStatus::ParseError;
    };
    let config = RunConfig::default();
    match GeneratorFile::parse(text, &config.tolerance) {
        Ok(file) => {
            *out = Box::into_raw(Box::new(DirichletGroup { file, config }));
            DirichletStatus::Ok
        }
        Err(e) => {
            set_error(e);
            DirichletStatus::ParseError
        }
    }
}

/// Create a group handle from raw matrices: `n` generators, each eight
/// doubles `a.re a.im b.re b.im c.re c.im d.re d.im`.
///
/// # Safety
/// `entries` must point to `8 n` readable doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn dirichlet_group_new(
    entries: *const f64,
    n: usize,
    out: *mut *mut DirichletGroup,
) -> DirichletStatus {
    if entries.is_null() || out.is_null() || n == 0 {
        set_error("null argument or zero generators");
        return DirichletStatus::NullArgument;
    }
    let raw = std::slice::from_raw_parts(entries, 8 * n);
    let mut text = String::from("name capi\n");
    for i in 0..n {
        let e = &raw[8 * i..8 * i + 8];
        text.push_str(&format!(
            "generator\n {} {} {} {}\n {} {} {} {}\n",
            formats::fmt_f64(e[0]),
            formats::fmt_f64(e[1]),
            formats::fmt_f64(e[2]),
            formats::fmt_f64(e[3]),
            formats::fmt_f64(e[4]),
            formats::fmt_f64(e[5]),
            formats::fmt_f64(e[6]),
            formats::fmt_f64(e[7])
        ));
    }
    let c = CString::new(text).unwrap();
    dirichlet_group_parse(c.as_ptr(), out)
}

/// Set the main pipeline knobs on a group handle.
///
/// # Safety
/// `group` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn dirichlet_group_configure(
    group: *mut DirichletGroup,
    lambda_cutoff: f64,
    max_word_length: u32,
    optimize_basepoint: bool,
    oriented: bool,
    oracle_max_length: u32,
) -> DirichletStatus {
    let Some(g) = group.as_mut() else {
        set_error("null group");
        return DirichletStatus::NullArgument;
    };
    if lambda_cutoff <= 0.0 {
        set_error("lambda cutoff must be positive");
        return DirichletStatus::BadConfig;
    }
    g.config.lambda_cutoff = lambda_cutoff;
    g.config.max_word_length = max_word_length as usize;
    g.config.optimize_basepoint = optimize_basepoint;
    g.config.oriented = oriented;
    g.config.oracle_max_length = oracle_max_length as usize;
    DirichletStatus::Ok
}

/// Free a group handle.
///
/// # Safety
/// `group` must be a live handle from this library (or NULL).
#[no_mangle]
pub unsafe extern "C" fn dirichlet_group_free(group: *mut DirichletGroup) {
    if !group.is_null() {
        drop(Box::from_raw(group));
    }
}

fn status_of(e: &pipeline::PipelineError) -> DirichletStatus {
    use dirichlet::domain::DomainError;
    use dirichlet::spectrum::SpectrumError;
    use dirichlet::tiling::TilingError;
    match e {
        pipeline::PipelineError::Domain(DomainError::GeneratorNotFace { .. }) => {
            DirichletStatus::GeneratorNotFace
        }
        pipeline::PipelineError::Tiling(TilingError::ExplosionGuard { .. }) => {
            DirichletStatus::ExplosionGuard
        }
        pipeline::PipelineError::Spectrum(SpectrumError::InsufficientRadius { .. }) => {
            DirichletStatus::InsufficientRadius
        }
        pipeline::PipelineError::Basepoint(_) => DirichletStatus::BadConfig,
        _ => DirichletStatus::InternalError,
    }
}

/// Run the full pipeline (build, tile, verify, reduce) on a group.
///
/// # Safety
/// `group` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn dirichlet_run(
    group: *const DirichletGroup,
    out: *mut *mut DirichletRun,
) -> DirichletStatus {
    let Some(g) = group.as_ref() else {
        set_error("null group");
        return DirichletStatus::NullArgument;
    };
    if out.is_null() {
        set_error("null output pointer");
        return DirichletStatus::NullArgument;
    }
    match pipeline::run_spectrum(&g.file, &g.config) {
        Ok(run) => {
            let status = if run.report.oracle_passed() {
                DirichletStatus::Ok
            } else {
                set_error("covering oracle failed");
                DirichletStatus::OracleFailed
            };
            *out = Box::into_raw(Box::new(DirichletRun {
                run,
                name: g.file.name.clone(),
                tolerance: g.config.tolerance,
            }));
            status
        }
        Err(e) => {
            let status = status_of(&e);
            set_error(e);
            status
        }
    }
}

/// Free a run handle.
///
/// # Safety
/// `run` must be a live handle from this library (or NULL).
#[no_mangle]
pub unsafe extern "C" fn dirichlet_run_free(run: *mut DirichletRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// Copy the run's scalar statistics into `out`.
///
/// # Safety
/// `run` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn dirichlet_run_stats(
    run: *const DirichletRun,
    out: *mut DirichletStats,
) -> DirichletStatus {
    let Some(r) = run.as_ref() else {
        set_error("null run");
        return DirichletStatus::NullArgument;
    };
    if out.is_null() {
        set_error("null output pointer");
        return DirichletStatus::NullArgument;
    }
    let stats = &r.run.build.build.stats;
    *out = DirichletStats {
        injectivity_radius: stats.injectivity_radius,
        spine_radius: stats.spine_radius.unwrap_or(-1.0),
        volume: stats.volume.map(|v| v.value).unwrap_or(-1.0),
        volume_error: stats.volume.map(|v| v.error_estimate).unwrap_or(-1.0),
        max_vertex_distance: stats.max_vertex_distance.unwrap_or(-1.0),
        word_length_reached: stats.word_length_reached as u32,
        converged: stats.converged,
        cusped: stats.has_ideal_vertices,
        vertex_count: stats.vertex_count as u32,
        edge_count: stats.edge_count as u32,
        face_count: stats.face_count as u32,
        tile_count: r.run.tiles.len() as u64,
        coverage_fraction: r.run.coverage.fraction,
        oracle_passed: r.run.report.oracle_passed(),
    };
    DirichletStatus::Ok
}

/// Number of spectrum entries in a run.
///
/// # Safety
/// `run` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn dirichlet_spectrum_len(run: *const DirichletRun) -> usize {
    run.as_ref().map_or(0, |r| r.run.small.entries.len())
}

/// Copy spectrum entry `i` into `out`.
///
/// # Safety
/// `run` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn dirichlet_spectrum_entry(
    run: *const DirichletRun,
    i: usize,
    out: *mut DirichletSpectrumEntry,
) -> DirichletStatus {
    let Some(r) = run.as_ref() else {
        set_error("null run");
        return DirichletStatus::NullArgument;
    };
    if out.is_null() {
        set_error("null output pointer");
        return DirichletStatus::NullArgument;
    }
    let Some(e) = r.run.small.entries.get(i) else {
        set_error(format!("spectrum index {i} out of range"));
        return DirichletStatus::BadConfig;
    };
    *out = DirichletSpectrumEntry {
        lambda: e.length.lambda,
        theta: e.length.theta,
        multiplicity: e.multiplicity as u64,
    };
    DirichletStatus::Ok
}

/// Representative word of spectrum entry `i` as a newly allocated string
/// (free with `dirichlet_string_free`). Returns NULL on bad input.
///
/// # Safety
/// `run` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn dirichlet_spectrum_word(
    run: *const DirichletRun,
    i: usize,
) -> *mut c_char {
    let Some(r) = run.as_ref() else {
        return ptr::null_mut();
    };
    let Some(e) = r.run.small.entries.get(i) else {
        return ptr::null_mut();
    };
    let Some(w) = e.representatives.first() else {
        return ptr::null_mut();
    };
    CString::new(w.to_string())
        .map(CString::into_raw)
        .unwrap_or(ptr::null_mut())
}

/// The full text of an export: 0 = domain, 1 = big list, 2 = spectrum,
/// 3 = verification report. Free with `dirichlet_string_free`.
///
/// # Safety
/// `run` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn dirichlet_run_export(
    run: *const DirichletRun,
    kind: u32,
) -> *mut c_char {
    let Some(r) = run.as_ref() else {
        return ptr::null_mut();
    };
    let body = match kind {
        0 => formats::emit_domain(
            &r.name,
            &r.run.build.build.poly,
            &r.run.build.build.stats,
            &r.tolerance,
        ),
        1 => formats::emit_biglist(&r.name, &r.run.tiles),
        2 => formats::emit_spectrum(&r.name, &r.run.small),
        3 => formats::emit_report(&r.name, &r.run.report, Some(&r.run.coverage)),
        _ => return ptr::null_mut(),
    };
    CString::new(body)
        .map(CString::into_raw)
        .unwrap_or(ptr::null_mut())
}

/// Decide whether two words (signed generator indices, e.g. "1 2 -1")
/// represent the same group element; `verdict` receives 1 or 0.
///
/// # Safety
/// `group` and `run` must be live handles; the word strings must be valid
/// NUL-terminated UTF-8; `verdict` must be valid.
#[no_mangle]
pub unsafe extern "C" fn dirichlet_check_words(
    group: *const DirichletGroup,
    run: *const DirichletRun,
    word1: *const c_char,
    word2: *const c_char,
    verdict: *mut bool,
) -> DirichletStatus {
    let (Some(g), Some(r)) = (group.as_ref(), run.as_ref()) else {
        set_error("null handle");
        return DirichletStatus::NullArgument;
    };
    if word1.is_null() || word2.is_null() || verdict.is_null() {
        set_error("null argument");
        return DirichletStatus::NullArgument;
    }
    let parse = |p: *const c_char| -> Result<Word, DirichletStatus> {
        let s = CStr::from_ptr(p).to_str().map_err(|_| {
            set_error("word is not UTF-8");
            DirichletStatus::ParseError
        })?;
        Word::parse(s).map_err(|e| {
            set_error(e);
            DirichletStatus::ParseError
        })
    };
    let (w1, w2) = match (parse(word1), parse(word2)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(s), _) | (_, Err(s)) => return s,
    };
    let tol = g.config.tolerance;
    let elements = (
        dirichlet::domain::element_of_word(&g.file.generators, &w1, &tol),
        dirichlet::domain::element_of_word(&g.file.generators, &w2, &tol),
    );
    let (Ok(e1), Ok(e2)) = elements else {
        set_error("word references an unknown generator");
        return DirichletStatus::ParseError;
    };
    let rho = r.run.build.build.stats.injectivity_radius;
    match wordprob::same_element(&e1, &e2, &r.run.build.basepoint, rho, &tol) {
        Ok(eq) => {
            *verdict = eq;
            DirichletStatus::Ok
        }
        Err(e) => {
            set_error(e);
            DirichletStatus::BadConfig
        }
    }
}
