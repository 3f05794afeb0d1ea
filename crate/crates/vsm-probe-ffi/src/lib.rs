//! C ABI for the harness's numeric core: VSM scoring, the disparity
//! metrics, the bundled human reference, the questionnaire bank (as an
//! opaque handle), and the response-parsing fallback rules.
//!
//! Conventions:
//! - every fallible function returns a [`VsmStatus`] code and writes its
//!   result through out-pointers;
//! - a human-readable message for the most recent failure on the current
//!   thread is available via [`vsm_last_error_message`];
//! - point clouds are row-major `f64` arrays with 6 columns; national
//!   tables have exactly 9 rows in the canonical nation order returned by
//!   [`vsm_nation_label`] (U.S.A., China, France, Germany, Brazil, India,
//!   Singapore, Japan, South Africa);
//! - strings returned as `char*` are owned by the caller and must be
//!   released with [`vsm_string_free`].

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use vsm_probe::collection::parse_response;
use vsm_probe::metrics::{dbi, dimension_dispersion, mcd, pearson, silhouette, ss_h, PointSet};
use vsm_probe::protocol::Nation;
use vsm_probe::questionnaire::{present_options, Locale, Questionnaire};
use vsm_probe::reference::load_human_reference;
use vsm_probe::scoring::{vsm_score, Dimension, MeanRawScores, ScoringConstants, VsmScore};

/// Result code of every fallible call in this interface.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VsmStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// An argument was structurally invalid (bad locale, length, id, ...).
    InvalidArgument = 2,
    /// Numeric input outside its documented domain.
    DomainError = 3,
    /// A metric precondition failed (degenerate input, mismatch, ...).
    MetricError = 4,
    /// The implementation panicked; state is unchanged.
    InternalError = 5,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: impl Into<String>) {
    let message = message.into();
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(message).ok();
    });
}

fn fail(status: VsmStatus, message: impl Into<String>) -> VsmStatus {
    set_last_error(message);
    status
}

fn guarded<F: FnOnce() -> VsmStatus>(body: F) -> VsmStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => fail(VsmStatus::InternalError, "internal panic"),
    }
}

/// Message describing the most recent failure on this thread, or null.
/// Valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn vsm_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map_or(ptr::null(), |message| message.as_ptr())
    })
}

/// Library version as a static string; never freed.
#[no_mangle]
pub extern "C" fn vsm_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr().cast()
}

/// Release a string allocated by this library.
///
/// # Safety
/// `s` must be a pointer previously returned by a `char*`-returning function
/// of this library (or null), not yet freed.
#[no_mangle]
pub unsafe extern "C" fn vsm_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

fn export_string(value: &str) -> *mut c_char {
    CString::new(value).map_or(ptr::null_mut(), CString::into_raw)
}

// ---------------------------------------------------------------------------
// Nations and the bundled human reference
// ---------------------------------------------------------------------------

/// Number of nations in every national table.
pub const VSM_NATION_COUNT: usize = 9;

/// Number of score dimensions per row (PDI, IDV, MAS, UAI, LTO, IVR).
pub const VSM_DIMENSION_COUNT: usize = 6;

/// Canonical label of nation `index` (0..9), or null when out of range.
/// Caller frees with [`vsm_string_free`].
#[no_mangle]
pub extern "C" fn vsm_nation_label(index: usize) -> *mut c_char {
    Nation::ALL
        .get(index)
        .map_or(ptr::null_mut(), |nation| export_string(nation.label()))
}

/// Copy the bundled 9x6 human reference scores (row-major, canonical nation
/// order) into `out`.
///
/// # Safety
/// `out` must point to at least 54 writable doubles.
#[no_mangle]
pub unsafe extern "C" fn vsm_human_reference(out: *mut f64) -> VsmStatus {
    guarded(|| {
        if out.is_null() {
            return fail(VsmStatus::NullPointer, "out is null");
        }
        let human = match load_human_reference() {
            Ok(human) => human,
            Err(e) => return fail(VsmStatus::InternalError, e.to_string()),
        };
        for (row, nation) in Nation::ALL.iter().enumerate() {
            let values = human.nationals[nation].to_array();
            for (column, value) in values.iter().enumerate() {
                *out.add(row * VSM_DIMENSION_COUNT + column) = *value;
            }
        }
        VsmStatus::Ok
    })
}

// ---------------------------------------------------------------------------
// Scoring
// ---------------------------------------------------------------------------

/// Score a 24-d mean raw vector into the six dimensions.
///
/// `constants` may be null for all-zero additive constants; otherwise it
/// points to 6 doubles in dimension order.
///
/// # Safety
/// `means` must point to 24 readable doubles, `out` to 6 writable doubles,
/// and `constants` to 6 readable doubles when non-null.
#[no_mangle]
pub unsafe extern "C" fn vsm_score_compute(
    means: *const f64,
    constants: *const f64,
    out: *mut f64,
) -> VsmStatus {
    guarded(|| {
        if means.is_null() || out.is_null() {
            return fail(VsmStatus::NullPointer, "means/out is null");
        }
        let mut values = [0.0; 24];
        values.copy_from_slice(std::slice::from_raw_parts(means, 24));
        let m = match MeanRawScores::new(values) {
            Ok(m) => m,
            Err(e) => return fail(VsmStatus::DomainError, e.to_string()),
        };
        let c = if constants.is_null() {
            ScoringConstants::default()
        } else {
            let v = std::slice::from_raw_parts(constants, 6);
            ScoringConstants {
                pdi: v[0],
                idv: v[1],
                mas: v[2],
                uai: v[3],
                lto: v[4],
                ivr: v[5],
            }
        };
        let score = vsm_score(&m, &c).to_array();
        std::slice::from_raw_parts_mut(out, 6).copy_from_slice(&score);
        VsmStatus::Ok
    })
}

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

unsafe fn read_points(data: *const f64, len: usize) -> Vec<[f64; 6]> {
    (0..len)
        .map(|i| {
            let mut p = [0.0; 6];
            p.copy_from_slice(std::slice::from_raw_parts(
                data.add(i * VSM_DIMENSION_COUNT),
                VSM_DIMENSION_COUNT,
            ));
            p
        })
        .collect()
}

unsafe fn read_nationals(data: *const f64) -> BTreeMap<Nation, VsmScore> {
    Nation::ALL
        .iter()
        .enumerate()
        .map(|(row, nation)| {
            let mut values = [0.0; 6];
            values.copy_from_slice(std::slice::from_raw_parts(
                data.add(row * VSM_DIMENSION_COUNT),
                VSM_DIMENSION_COUNT,
            ));
            (*nation, VsmScore::from_array(values))
        })
        .collect()
}

/// Pearson correlation of two equal-length vectors with its two-sided
/// p-value. `out_p` may be null when only rho is wanted.
///
/// # Safety
/// `x` and `y` must point to `len` readable doubles each; `out_rho` must be
/// writable; `out_p` must be writable when non-null.
#[no_mangle]
pub unsafe extern "C" fn vsm_pearson(
    x: *const f64,
    y: *const f64,
    len: usize,
    out_rho: *mut f64,
    out_p: *mut f64,
) -> VsmStatus {
    guarded(|| {
        if x.is_null() || y.is_null() || out_rho.is_null() {
            return fail(VsmStatus::NullPointer, "x/y/out_rho is null");
        }
        let xs = std::slice::from_raw_parts(x, len);
        let ys = std::slice::from_raw_parts(y, len);
        match pearson(xs, ys) {
            Ok(result) => {
                *out_rho = result.rho;
                if !out_p.is_null() {
                    *out_p = result.p_value;
                }
                VsmStatus::Ok
            }
            Err(e) => fail(VsmStatus::MetricError, e.to_string()),
        }
    })
}

/// Pairwise Davies-Bouldin index of two 6-d point clouds (row-major).
///
/// # Safety
/// `a` must point to `a_len * 6` readable doubles, `b` to `b_len * 6`, and
/// `out` to one writable double.
#[no_mangle]
pub unsafe extern "C" fn vsm_dbi(
    a: *const f64,
    a_len: usize,
    b: *const f64,
    b_len: usize,
    out: *mut f64,
) -> VsmStatus {
    guarded(|| {
        if a.is_null() || b.is_null() || out.is_null() {
            return fail(VsmStatus::NullPointer, "a/b/out is null");
        }
        let set_a = PointSet::new("a", read_points(a, a_len));
        let set_b = PointSet::new("b", read_points(b, b_len));
        match dbi(&set_a, &set_b) {
            Ok(value) => {
                *out = value;
                VsmStatus::Ok
            }
            Err(e) => fail(VsmStatus::MetricError, e.to_string()),
        }
    })
}

/// Pairwise silhouette score of two 6-d point clouds (row-major).
///
/// # Safety
/// Same layout requirements as [`vsm_dbi`].
#[no_mangle]
pub unsafe extern "C" fn vsm_silhouette(
    a: *const f64,
    a_len: usize,
    b: *const f64,
    b_len: usize,
    out: *mut f64,
) -> VsmStatus {
    guarded(|| {
        if a.is_null() || b.is_null() || out.is_null() {
            return fail(VsmStatus::NullPointer, "a/b/out is null");
        }
        let set_a = PointSet::new("a", read_points(a, a_len));
        let set_b = PointSet::new("b", read_points(b, b_len));
        match silhouette(&set_a, &set_b) {
            Ok(value) => {
                *out = value;
                VsmStatus::Ok
            }
            Err(e) => fail(VsmStatus::MetricError, e.to_string()),
        }
    })
}

/// Per-dimension sample standard deviation and their mean over a 9x6
/// national table. `out_sigma` may be null when only the distance is wanted.
///
/// # Safety
/// `nationals` must point to 54 readable doubles; `out_distance` must be
/// writable; `out_sigma` must point to 6 writable doubles when non-null.
#[no_mangle]
pub unsafe extern "C" fn vsm_dimension_dispersion(
    nationals: *const f64,
    out_sigma: *mut f64,
    out_distance: *mut f64,
) -> VsmStatus {
    guarded(|| {
        if nationals.is_null() || out_distance.is_null() {
            return fail(VsmStatus::NullPointer, "nationals/out_distance is null");
        }
        match dimension_dispersion(&read_nationals(nationals)) {
            Ok(report) => {
                if !out_sigma.is_null() {
                    for (i, dimension) in Dimension::ALL.iter().enumerate() {
                        *out_sigma.add(i) = report.sigma[dimension];
                    }
                }
                *out_distance = report.distance;
                VsmStatus::Ok
            }
            Err(e) => fail(VsmStatus::MetricError, e.to_string()),
        }
    })
}

/// Model cultural disparity of a 9x6 national table against a human table.
/// `human` may be null to use the bundled reference.
///
/// # Safety
/// `model` must point to 54 readable doubles; `human` likewise when
/// non-null; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn vsm_mcd(
    model: *const f64,
    human: *const f64,
    out: *mut f64,
) -> VsmStatus {
    guarded(|| {
        if model.is_null() || out.is_null() {
            return fail(VsmStatus::NullPointer, "model/out is null");
        }
        let model_nationals = read_nationals(model);
        let human_nationals = if human.is_null() {
            match load_human_reference() {
                Ok(reference) => reference.nationals,
                Err(e) => return fail(VsmStatus::InternalError, e.to_string()),
            }
        } else {
            read_nationals(human)
        };
        match mcd(&model_nationals, &human_nationals) {
            Ok(value) => {
                *out = value;
                VsmStatus::Ok
            }
            Err(e) => fail(VsmStatus::MetricError, e.to_string()),
        }
    })
}

/// Silhouette score with human reference over two 9x6 national tables.
/// `human` may be null to use the bundled reference.
///
/// # Safety
/// `a` and `b` must point to 54 readable doubles each; `human` likewise
/// when non-null; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn vsm_ss_h(
    a: *const f64,
    b: *const f64,
    human: *const f64,
    out: *mut f64,
) -> VsmStatus {
    guarded(|| {
        if a.is_null() || b.is_null() || out.is_null() {
            return fail(VsmStatus::NullPointer, "a/b/out is null");
        }
        let a_nationals = read_nationals(a);
        let b_nationals = read_nationals(b);
        let human_nationals = if human.is_null() {
            match load_human_reference() {
                Ok(reference) => reference.nationals,
                Err(e) => return fail(VsmStatus::InternalError, e.to_string()),
            }
        } else {
            read_nationals(human)
        };
        match ss_h(&a_nationals, &b_nationals, &human_nationals) {
            Ok(value) => {
                *out = value;
                VsmStatus::Ok
            }
            Err(e) => fail(VsmStatus::MetricError, e.to_string()),
        }
    })
}

// ---------------------------------------------------------------------------
// Response parsing
// ---------------------------------------------------------------------------

/// Parse a raw model reply. Writes the parsed option (0 when unrecognized)
/// and the effective score after the neutral-option fallback rules (health
/// questions 15/18 and unrecognizable replies both score 3).
///
/// # Safety
/// `raw_text` must be a valid NUL-terminated string; `out_option` and
/// `out_effective` must be writable when non-null.
#[no_mangle]
pub unsafe extern "C" fn vsm_parse_option(
    raw_text: *const c_char,
    question_id: u8,
    out_option: *mut i32,
    out_effective: *mut i32,
) -> VsmStatus {
    guarded(|| {
        if raw_text.is_null() {
            return fail(VsmStatus::NullPointer, "raw_text is null");
        }
        if !(1..=24).contains(&question_id) {
            return fail(VsmStatus::InvalidArgument, "question_id must be 1..=24");
        }
        let text = match CStr::from_ptr(raw_text).to_str() {
            Ok(text) => text,
            Err(_) => return fail(VsmStatus::InvalidArgument, "raw_text is not UTF-8"),
        };
        let parsed = parse_response(text, question_id);
        if !out_option.is_null() {
            *out_option = parsed.option_id.map_or(0, i32::from);
        }
        if !out_effective.is_null() {
            *out_effective = i32::from(parsed.effective_score());
        }
        VsmStatus::Ok
    })
}

// ---------------------------------------------------------------------------
// Questionnaire handle
// ---------------------------------------------------------------------------

/// Opaque handle over a loaded questionnaire bank.
pub struct VsmQuestionnaire {
    bank: Questionnaire,
    locale: Locale,
}

/// Load the bundled questionnaire for a locale tag ("en" or "zh").
///
/// # Safety
/// `locale_tag` must be a valid NUL-terminated string and `out` a writable
/// handle slot. A non-null result must be released with
/// [`vsm_questionnaire_close`].
#[no_mangle]
pub unsafe extern "C" fn vsm_questionnaire_open(
    locale_tag: *const c_char,
    out: *mut *mut VsmQuestionnaire,
) -> VsmStatus {
    guarded(|| {
        if locale_tag.is_null() || out.is_null() {
            return fail(VsmStatus::NullPointer, "locale_tag/out is null");
        }
        let tag = match CStr::from_ptr(locale_tag).to_str() {
            Ok(tag) => tag,
            Err(_) => return fail(VsmStatus::InvalidArgument, "locale tag is not UTF-8"),
        };
        let Some(locale) = Locale::from_tag(tag) else {
            return fail(
                VsmStatus::InvalidArgument,
                format!("unknown locale {tag:?}; expected en or zh"),
            );
        };
        match Questionnaire::load(locale) {
            Ok(bank) => {
                *out = Box::into_raw(Box::new(VsmQuestionnaire { bank, locale }));
                VsmStatus::Ok
            }
            Err(e) => fail(VsmStatus::InternalError, e.to_string()),
        }
    })
}

/// Release a questionnaire handle.
///
/// # Safety
/// `handle` must come from [`vsm_questionnaire_open`] (or be null) and must
/// not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn vsm_questionnaire_close(handle: *mut VsmQuestionnaire) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Number of questions in the bank (24).
///
/// # Safety
/// `handle` must be a live handle from [`vsm_questionnaire_open`].
#[no_mangle]
pub unsafe extern "C" fn vsm_questionnaire_len(handle: *const VsmQuestionnaire) -> usize {
    if handle.is_null() {
        return 0;
    }
    (*handle).bank.len()
}

/// Question text by 1-based ID, in the handle's locale. Null when the ID is
/// out of range. Caller frees with [`vsm_string_free`].
///
/// # Safety
/// `handle` must be a live handle from [`vsm_questionnaire_open`].
#[no_mangle]
pub unsafe extern "C" fn vsm_questionnaire_question_text(
    handle: *const VsmQuestionnaire,
    question_id: u8,
) -> *mut c_char {
    if handle.is_null() {
        return ptr::null_mut();
    }
    let q = &*handle;
    q.bank
        .question(question_id)
        .and_then(|question| question.text(q.locale).ok())
        .map_or(ptr::null_mut(), export_string)
}

/// Option text by question ID and option ID. Null when out of range.
/// Caller frees with [`vsm_string_free`].
///
/// # Safety
/// `handle` must be a live handle from [`vsm_questionnaire_open`].
#[no_mangle]
pub unsafe extern "C" fn vsm_questionnaire_option_text(
    handle: *const VsmQuestionnaire,
    question_id: u8,
    option_id: u8,
) -> *mut c_char {
    if handle.is_null() {
        return ptr::null_mut();
    }
    let q = &*handle;
    q.bank
        .question(question_id)
        .and_then(|question| question.option(option_id))
        .and_then(|option| option.text(q.locale).ok())
        .map_or(ptr::null_mut(), export_string)
}

/// Whether a question is one of the two health items (always scored 3).
///
/// # Safety
/// `handle` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn vsm_questionnaire_is_health(
    handle: *const VsmQuestionnaire,
    question_id: u8,
    out: *mut bool,
) -> VsmStatus {
    guarded(|| {
        if handle.is_null() || out.is_null() {
            return fail(VsmStatus::NullPointer, "handle/out is null");
        }
        match (*handle).bank.question(question_id) {
            Some(question) => {
                *out = question.is_health();
                VsmStatus::Ok
            }
            None => fail(VsmStatus::InvalidArgument, "question_id must be 1..=24"),
        }
    })
}

/// Display order of a question's five options: the identity order when
/// `shuffle` is false, otherwise the deterministic seeded permutation.
///
/// # Safety
/// `handle` must be a live handle and `out_order` must point to 5 writable
/// bytes.
#[no_mangle]
pub unsafe extern "C" fn vsm_questionnaire_presentation(
    handle: *const VsmQuestionnaire,
    question_id: u8,
    shuffle: bool,
    seed: u64,
    out_order: *mut u8,
) -> VsmStatus {
    guarded(|| {
        if handle.is_null() || out_order.is_null() {
            return fail(VsmStatus::NullPointer, "handle/out_order is null");
        }
        match (*handle).bank.question(question_id) {
            Some(question) => {
                let presentation = present_options(question, shuffle, seed);
                for (i, id) in presentation.order.iter().enumerate() {
                    *out_order.add(i) = *id;
                }
                VsmStatus::Ok
            }
            None => fail(VsmStatus::InvalidArgument, "question_id must be 1..=24"),
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn score_roundtrip_through_ffi() {
        let mut means = [3.0; 24];
        means[6] = 4.0; // m7
        means[1] = 2.0; // m2
        let mut out = [0.0; 6];
        let status = unsafe { vsm_score_compute(means.as_ptr(), ptr::null(), out.as_mut_ptr()) };
        assert_eq!(status, VsmStatus::Ok);
        assert_eq!(out[0], 70.0);
        assert_eq!(out[1..], [0.0; 5]);
    }

    #[test]
    fn domain_error_sets_message() {
        let means = [0.0; 24];
        let mut out = [0.0; 6];
        let status = unsafe { vsm_score_compute(means.as_ptr(), ptr::null(), out.as_mut_ptr()) };
        assert_eq!(status, VsmStatus::DomainError);
        let message = vsm_last_error_message();
        assert!(!message.is_null());
        let text = unsafe { CStr::from_ptr(message) }.to_str().unwrap();
        assert!(text.contains("outside [1, 5]"));
    }

    #[test]
    fn human_reference_and_mcd_against_self() {
        let mut human = [0.0; 54];
        assert_eq!(
            unsafe { vsm_human_reference(human.as_mut_ptr()) },
            VsmStatus::Ok
        );
        assert_eq!(human[0], 40.0); // U.S.A. PDI
        let mut out = 0.0;
        assert_eq!(
            unsafe { vsm_mcd(human.as_ptr(), ptr::null(), &mut out) },
            VsmStatus::Ok
        );
        assert_eq!(out, 1.0);

        let mut sigma = [0.0; 6];
        let mut distance = 0.0;
        assert_eq!(
            unsafe { vsm_dimension_dispersion(human.as_ptr(), sigma.as_mut_ptr(), &mut distance) },
            VsmStatus::Ok
        );
        assert!((distance - 20.330).abs() < 0.005);
        assert!((sigma[0] - 16.613).abs() < 0.005);
    }

    #[test]
    fn pearson_through_ffi() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let y = [2.0, 4.0, 6.0, 8.0, 10.0, 12.0];
        let mut rho = 0.0;
        let mut p = 1.0;
        let status = unsafe { vsm_pearson(x.as_ptr(), y.as_ptr(), 6, &mut rho, &mut p) };
        assert_eq!(status, VsmStatus::Ok);
        assert!((rho - 1.0).abs() < 1e-12);
        // Degenerate: constant vector.
        let constant = [3.0; 6];
        let status = unsafe { vsm_pearson(x.as_ptr(), constant.as_ptr(), 6, &mut rho, &mut p) };
        assert_eq!(status, VsmStatus::MetricError);
    }

    #[test]
    fn cluster_metrics_through_ffi() {
        // Two pairs with spread 1 and centroid gap 10: DBI = 0.2.
        let a = [
            0.0, 0.0, 0.0, 0.0, 0.0, 0.0, //
            2.0, 0.0, 0.0, 0.0, 0.0, 0.0,
        ];
        let b = [
            10.0, 0.0, 0.0, 0.0, 0.0, 0.0, //
            12.0, 0.0, 0.0, 0.0, 0.0, 0.0,
        ];
        let mut out = 0.0;
        assert_eq!(
            unsafe { vsm_dbi(a.as_ptr(), 2, b.as_ptr(), 2, &mut out) },
            VsmStatus::Ok
        );
        assert!((out - 0.2).abs() < 1e-12);
        assert_eq!(
            unsafe { vsm_silhouette(a.as_ptr(), 2, b.as_ptr(), 2, &mut out) },
            VsmStatus::Ok
        );
        assert!(out > 0.7);
    }

    #[test]
    fn ss_h_toy_through_ffi() {
        // All nations of A at origin, all of B at 20 along PDI; bundled human
        // reference supplies the normalizers.
        let a = [0.0; 54];
        let mut b = [0.0; 54];
        for row in 0..9 {
            b[row * 6] = 20.0;
        }
        let mut out = 0.0;
        assert_eq!(
            unsafe { vsm_ss_h(a.as_ptr(), b.as_ptr(), ptr::null(), &mut out) },
            VsmStatus::Ok
        );
        assert!(out > 0.0);
    }

    #[test]
    fn parse_option_applies_fallbacks() {
        let raw = CString::new(r#"{"option": 4, "rationale": "ok"}"#).unwrap();
        let mut option = -1;
        let mut effective = -1;
        let status = unsafe { vsm_parse_option(raw.as_ptr(), 3, &mut option, &mut effective) };
        assert_eq!(status, VsmStatus::Ok);
        assert_eq!((option, effective), (4, 4));

        // Health question: parsed option retained, effective forced to 3.
        let status = unsafe { vsm_parse_option(raw.as_ptr(), 15, &mut option, &mut effective) };
        assert_eq!(status, VsmStatus::Ok);
        assert_eq!((option, effective), (4, 3));

        // Unrecognizable prose.
        let prose = CString::new("no idea").unwrap();
        let status = unsafe { vsm_parse_option(prose.as_ptr(), 3, &mut option, &mut effective) };
        assert_eq!(status, VsmStatus::Ok);
        assert_eq!((option, effective), (0, 3));
    }

    #[test]
    fn questionnaire_handle_lifecycle() {
        let tag = CString::new("en").unwrap();
        let mut handle: *mut VsmQuestionnaire = ptr::null_mut();
        assert_eq!(
            unsafe { vsm_questionnaire_open(tag.as_ptr(), &mut handle) },
            VsmStatus::Ok
        );
        assert!(!handle.is_null());
        assert_eq!(unsafe { vsm_questionnaire_len(handle) }, 24);

        let text = unsafe { vsm_questionnaire_question_text(handle, 1) };
        assert!(!text.is_null());
        let question = unsafe { CStr::from_ptr(text) }
            .to_str()
            .unwrap()
            .to_string();
        assert!(question.contains("ideal job"));
        unsafe { vsm_string_free(text) };

        let mut health = false;
        assert_eq!(
            unsafe { vsm_questionnaire_is_health(handle, 15, &mut health) },
            VsmStatus::Ok
        );
        assert!(health);

        let mut order = [0u8; 5];
        assert_eq!(
            unsafe { vsm_questionnaire_presentation(handle, 7, false, 0, order.as_mut_ptr()) },
            VsmStatus::Ok
        );
        assert_eq!(order, [1, 2, 3, 4, 5]);
        assert_eq!(
            unsafe { vsm_questionnaire_presentation(handle, 7, true, 42, order.as_mut_ptr()) },
            VsmStatus::Ok
        );
        let mut sorted = order;
        sorted.sort_unstable();
        assert_eq!(sorted, [1, 2, 3, 4, 5]);

        // Bad locale is rejected.
        let bad = CString::new("fr").unwrap();
        let mut other: *mut VsmQuestionnaire = ptr::null_mut();
        assert_eq!(
            unsafe { vsm_questionnaire_open(bad.as_ptr(), &mut other) },
            VsmStatus::InvalidArgument
        );

        unsafe { vsm_questionnaire_close(handle) };
    }
}
