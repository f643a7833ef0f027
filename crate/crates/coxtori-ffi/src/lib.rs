//! C ABI over `coxtori`.
//!
//! Objects are opaque handles created by `*_new` and released by `*_free`.
//! Every fallible call returns a [`CoxtoriStatus`]; outputs go through
//! caller-provided pointers and are only written on success, except that
//! array outputs always report the required length. Rationals are
//! returned as parallel numerator/denominator arrays.

use std::ffi::{c_char, CStr, CString};

use coxtori::affine;
use coxtori::apartment;
use coxtori::linalg::Q;
use coxtori::report::{self, RunConfig, Section, VerificationReport};
use coxtori::root_datum::{Family, GroupType, Isogeny, Pi1Variant, RootDatum};
use num_traits::ToPrimitive;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoxtoriStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Unsupported = 3,
    BufferTooSmall = 4,
    Overflow = 5,
    Panic = 6,
}

/// A root datum with Frobenius, built from a family, rank and isogeny.
pub struct CoxtoriDatum {
    group_type: GroupType,
    datum: RootDatum,
}

/// A finished verification report.
pub struct CoxtoriReport {
    report: VerificationReport,
}

fn guard(f: impl FnOnce() -> CoxtoriStatus) -> CoxtoriStatus {
    std::panic::catch_unwind(std::panic::AssertUnwindSafe(f)).unwrap_or(CoxtoriStatus::Panic)
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, CoxtoriStatus> {
    if s.is_null() {
        return Err(CoxtoriStatus::NullPointer);
    }
    CStr::from_ptr(s).to_str().map_err(|_| CoxtoriStatus::InvalidArgument)
}

unsafe fn parse<T: std::str::FromStr>(s: *const c_char) -> Result<T, CoxtoriStatus> {
    read_str(s)?.parse().map_err(|_| CoxtoriStatus::InvalidArgument)
}

macro_rules! tri {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(s) => return s,
        }
    };
}

/// Static description of a status code. Never null.
#[no_mangle]
pub extern "C" fn coxtori_status_message(status: CoxtoriStatus) -> *const c_char {
    let s: &'static CStr = match status {
        CoxtoriStatus::Ok => c"ok",
        CoxtoriStatus::NullPointer => c"null pointer argument",
        CoxtoriStatus::InvalidArgument => c"invalid argument",
        CoxtoriStatus::Unsupported => c"operation not available for this group",
        CoxtoriStatus::BufferTooSmall => c"output buffer too small",
        CoxtoriStatus::Overflow => c"value does not fit the output type",
        CoxtoriStatus::Panic => c"internal error",
    };
    s.as_ptr()
}

/// Build a datum. `family` is one of `A B C D 2A 2D`; `isogeny` is `model`,
/// `adjoint`, `sc` or null for the model.
///
/// # Safety
/// String arguments must be null or NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn coxtori_datum_new(
    family: *const c_char,
    rank: u32,
    isogeny: *const c_char,
    out: *mut *mut CoxtoriDatum,
) -> CoxtoriStatus {
    guard(|| {
        if out.is_null() {
            return CoxtoriStatus::NullPointer;
        }
        let family: Family = tri!(parse(family));
        let isogeny = if isogeny.is_null() { Isogeny::PaperModel } else { tri!(parse(isogeny)) };
        let Ok(group_type) = GroupType::new(family, rank as usize, isogeny) else { return CoxtoriStatus::InvalidArgument };
        let Ok(datum) = RootDatum::build(group_type) else { return CoxtoriStatus::InvalidArgument };
        *out = Box::into_raw(Box::new(CoxtoriDatum { group_type, datum }));
        CoxtoriStatus::Ok
    })
}

/// # Safety
/// `d` must be null or a handle from [`coxtori_datum_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn coxtori_datum_free(d: *mut CoxtoriDatum) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// Rank of the cocharacter lattice.
///
/// # Safety
/// `d` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn coxtori_datum_rank(d: *const CoxtoriDatum, out: *mut u32) -> CoxtoriStatus {
    if d.is_null() || out.is_null() {
        return CoxtoriStatus::NullPointer;
    }
    *out = (*d).datum.rank() as u32;
    CoxtoriStatus::Ok
}

/// Order of the Frobenius coinvariants of the fundamental group; `0` when
/// infinite. `adjoint` selects the fundamental group of the adjoint quotient.
///
/// # Safety
/// `d` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn coxtori_pi1_coinvariants_order(d: *const CoxtoriDatum, adjoint: bool, out: *mut u64) -> CoxtoriStatus {
    if d.is_null() || out.is_null() {
        return CoxtoriStatus::NullPointer;
    }
    guard(|| {
        let variant = if adjoint { Pi1Variant::Adjoint } else { Pi1Variant::Model };
        let order = match (*d).datum.fundamental_group(variant).coinvariants.order() {
            None => 0,
            Some(o) => tri!(o.to_u64().ok_or(CoxtoriStatus::Overflow)),
        };
        *out = order;
        CoxtoriStatus::Ok
    })
}

unsafe fn write_rationals(v: &[Q], num: *mut i64, den: *mut i64, cap: usize, len: *mut usize) -> CoxtoriStatus {
    if len.is_null() {
        return CoxtoriStatus::NullPointer;
    }
    *len = v.len();
    if cap < v.len() {
        return CoxtoriStatus::BufferTooSmall;
    }
    if v.is_empty() {
        return CoxtoriStatus::Ok;
    }
    if num.is_null() || den.is_null() {
        return CoxtoriStatus::NullPointer;
    }
    for (i, x) in v.iter().enumerate() {
        let (Some(n), Some(d)) = (x.numer().to_i64(), x.denom().to_i64()) else { return CoxtoriStatus::Overflow };
        *num.add(i) = n;
        *den.add(i) = d;
    }
    CoxtoriStatus::Ok
}

fn model_kappa(d: &CoxtoriDatum, kappa: i64) -> Result<GroupType, CoxtoriStatus> {
    if d.group_type.isogeny != Isogeny::PaperModel {
        return Err(CoxtoriStatus::Unsupported);
    }
    d.group_type.check_kappa(kappa).map_err(|_| CoxtoriStatus::InvalidArgument)?;
    Ok(d.group_type)
}

/// Fixed point of `c_kappa sigma` on the apartment, normalized modulo the
/// center. `*len` receives the number of coordinates even when the buffers
/// are too small.
///
/// # Safety
/// `d` must be a live handle; `num` and `den` must hold `cap` entries.
#[no_mangle]
pub unsafe extern "C" fn coxtori_fixed_point(
    d: *const CoxtoriDatum,
    kappa: i64,
    num: *mut i64,
    den: *mut i64,
    cap: usize,
    len: *mut usize,
) -> CoxtoriStatus {
    if d.is_null() {
        return CoxtoriStatus::NullPointer;
    }
    guard(|| {
        let t = tri!(model_kappa(&*d, kappa));
        let Ok((datum, b)) = affine::special_lift(t, kappa) else { return CoxtoriStatus::Unsupported };
        let Ok(x) = apartment::fixed_point(&datum, &b) else { return CoxtoriStatus::Unsupported };
        write_rationals(&x.coords, num, den, cap, len)
    })
}

/// Valuation bounds `<alpha, x>` over the cross-section roots, for `c_kappa`.
///
/// # Safety
/// As for [`coxtori_fixed_point`].
#[no_mangle]
pub unsafe extern "C" fn coxtori_bound_table(
    d: *const CoxtoriDatum,
    kappa: i64,
    num: *mut i64,
    den: *mut i64,
    cap: usize,
    len: *mut usize,
) -> CoxtoriStatus {
    if d.is_null() {
        return CoxtoriStatus::NullPointer;
    }
    guard(|| {
        let t = tri!(model_kappa(&*d, kappa));
        let Ok(v) = apartment::cross_section_bound_table(t, kappa) else { return CoxtoriStatus::Unsupported };
        write_rationals(&v, num, den, cap, len)
    })
}

/// Run the verification report for one model group. `sections` is a
/// comma-separated list such as `"pi1,bounds"`, or null for all sections.
///
/// # Safety
/// String arguments must be null or NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn coxtori_report_new(
    family: *const c_char,
    rank: u32,
    sections: *const c_char,
    seed: u64,
    out: *mut *mut CoxtoriReport,
) -> CoxtoriStatus {
    guard(|| {
        if out.is_null() {
            return CoxtoriStatus::NullPointer;
        }
        let family: Family = tri!(parse(family));
        let mut cfg = RunConfig { family: Some(family), rank: Some(rank as usize), seed, ..RunConfig::default() };
        if !sections.is_null() {
            let list = tri!(read_str(sections));
            let parsed: Result<Vec<Section>, _> = list.split(',').map(|s| s.trim().parse()).collect();
            cfg.sections = tri!(parsed.map_err(|_| CoxtoriStatus::InvalidArgument));
        }
        let Ok(report) = report::cmd_report(&cfg) else { return CoxtoriStatus::InvalidArgument };
        *out = Box::into_raw(Box::new(CoxtoriReport { report }));
        CoxtoriStatus::Ok
    })
}

/// # Safety
/// `r` must be null or a handle from [`coxtori_report_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn coxtori_report_free(r: *mut CoxtoriReport) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Total and failed check counts.
///
/// # Safety
/// `r` must be a live handle; `total` and `failed` writable.
#[no_mangle]
pub unsafe extern "C" fn coxtori_report_counts(r: *const CoxtoriReport, total: *mut usize, failed: *mut usize) -> CoxtoriStatus {
    if r.is_null() || total.is_null() || failed.is_null() {
        return CoxtoriStatus::NullPointer;
    }
    let s = &(*r).report.summary;
    *total = s.total;
    *failed = s.failed;
    CoxtoriStatus::Ok
}

/// The report as JSON. Release the string with [`coxtori_string_free`].
///
/// # Safety
/// `r` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn coxtori_report_json(r: *const CoxtoriReport, out: *mut *mut c_char) -> CoxtoriStatus {
    if r.is_null() || out.is_null() {
        return CoxtoriStatus::NullPointer;
    }
    guard(|| {
        let Ok(s) = CString::new((*r).report.to_json()) else { return CoxtoriStatus::Panic };
        *out = s.into_raw();
        CoxtoriStatus::Ok
    })
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn coxtori_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
