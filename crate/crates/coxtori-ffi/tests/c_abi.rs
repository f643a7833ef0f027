use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use coxtori_ffi::*;

fn datum(family: &str, rank: u32, iso: Option<&str>) -> *mut CoxtoriDatum {
    let family = CString::new(family).unwrap();
    let iso = iso.map(|s| CString::new(s).unwrap());
    let mut d = ptr::null_mut();
    let s = unsafe { coxtori_datum_new(family.as_ptr(), rank, iso.as_ref().map_or(ptr::null(), |s| s.as_ptr()), &mut d) };
    assert_eq!(s, CoxtoriStatus::Ok);
    d
}

fn rationals(f: unsafe extern "C" fn(*const CoxtoriDatum, i64, *mut i64, *mut i64, usize, *mut usize) -> CoxtoriStatus, d: *const CoxtoriDatum, kappa: i64) -> Vec<(i64, i64)> {
    let mut len = 0;
    let s = unsafe { f(d, kappa, ptr::null_mut(), ptr::null_mut(), 0, &mut len) };
    assert_eq!(s, CoxtoriStatus::BufferTooSmall);
    let (mut num, mut den) = (vec![0; len], vec![0; len]);
    let s = unsafe { f(d, kappa, num.as_mut_ptr(), den.as_mut_ptr(), len, &mut len) };
    assert_eq!(s, CoxtoriStatus::Ok);
    num.into_iter().zip(den).collect()
}

#[test]
fn bound_table_and_fixed_point_for_d4() {
    let d = datum("D", 4, None);
    assert_eq!(rationals(coxtori_bound_table, d, 2), [(1, 2), (1, 1), (1, 2), (1, 1)]);
    // e0 first, then -(m-1)/4 + (i-1)/2 and -1/4 for m = 4.
    assert_eq!(rationals(coxtori_fixed_point, d, 2), [(0, 1), (-3, 4), (-1, 4), (1, 4), (-1, 4)]);
    let mut len = 0;
    let s = unsafe { coxtori_bound_table(d, 3, ptr::null_mut(), ptr::null_mut(), 0, &mut len) };
    assert_eq!(s, CoxtoriStatus::InvalidArgument);
    unsafe { coxtori_datum_free(d) };
}

#[test]
fn fundamental_group_orders() {
    let d = datum("2A", 5, None);
    let (mut model, mut adjoint) = (7, 7);
    unsafe {
        assert_eq!(coxtori_pi1_coinvariants_order(d, false, &mut model), CoxtoriStatus::Ok);
        assert_eq!(coxtori_pi1_coinvariants_order(d, true, &mut adjoint), CoxtoriStatus::Ok);
        coxtori_datum_free(d);
    }
    // pi_1 of the unitary GL_5 model is Z with sigma = -1.
    assert_eq!((model, adjoint), (2, 1));
    let d = datum("A", 3, None);
    unsafe {
        coxtori_pi1_coinvariants_order(d, false, &mut model);
        coxtori_datum_free(d);
    }
    assert_eq!(model, 0);
    let d = datum("D", 5, Some("adjoint"));
    let mut rank = 0;
    let mut order = 0;
    unsafe {
        coxtori_datum_rank(d, &mut rank);
        coxtori_pi1_coinvariants_order(d, false, &mut order);
        coxtori_datum_free(d);
    }
    assert_eq!((rank, order), (5, 4));
}

#[test]
fn report_round_trip() {
    let family = CString::new("C").unwrap();
    let sections = CString::new("pi1,bounds,fixed-point").unwrap();
    let mut r = ptr::null_mut();
    let s = unsafe { coxtori_report_new(family.as_ptr(), 3, sections.as_ptr(), 0, &mut r) };
    assert_eq!(s, CoxtoriStatus::Ok);
    let (mut total, mut failed) = (0, 0);
    let mut json = ptr::null_mut();
    unsafe {
        assert_eq!(coxtori_report_counts(r, &mut total, &mut failed), CoxtoriStatus::Ok);
        assert_eq!(coxtori_report_json(r, &mut json), CoxtoriStatus::Ok);
    }
    let text = unsafe { CStr::from_ptr(json) }.to_str().unwrap().to_owned();
    unsafe {
        coxtori_string_free(json);
        coxtori_report_free(r);
    }
    assert_eq!((total, failed), (5, 0));
    assert!(text.contains("\"bounds/C3/kappa=1\""));

    let bad = CString::new("pi1,nope").unwrap();
    let s = unsafe { coxtori_report_new(family.as_ptr(), 3, bad.as_ptr(), 0, &mut r) };
    assert_eq!(s, CoxtoriStatus::InvalidArgument);
}

const C_PROGRAM: &str = r#"
#include <stdio.h>
#include "coxtori.h"

int main(void) {
    CoxtoriDatum *d = NULL;
    if (coxtori_datum_new("C", 3, NULL, &d) != COXTORI_STATUS_OK) return 1;
    int64_t num[8], den[8];
    size_t len = 0;
    CoxtoriStatus s = coxtori_bound_table(d, 1, num, den, 8, &len);
    if (s != COXTORI_STATUS_OK) { printf("%s\n", coxtori_status_message(s)); return 2; }
    for (size_t i = 0; i < len; i++) printf("%lld/%lld ", (long long)num[i], (long long)den[i]);
    printf("\n");
    coxtori_datum_free(d);
    s = coxtori_datum_new("E", 8, NULL, &d);
    printf("%s\n", coxtori_status_message(s));
    return 0;
}
"#;

#[test]
fn header_compiles_and_links_from_c() {
    let crate_dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let target = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = target.join("libcoxtori_ffi.a");
    assert!(lib.exists(), "static library missing at {}", lib.display());
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    let src = dir.join("coxtori_smoke.c");
    let exe = dir.join("coxtori_smoke");
    std::fs::write(&src, C_PROGRAM).unwrap();
    let out = Command::new("cc")
        .args(["-std=c11", "-Wall", "-Werror", "-I"])
        .arg(crate_dir.join("include"))
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .output()
        .expect("cc runs");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = Command::new(&exe).output().unwrap();
    assert!(run.status.success());
    assert_eq!(String::from_utf8(run.stdout).unwrap(), "1/2 1/1 3/2 \ninvalid argument\n");
}
