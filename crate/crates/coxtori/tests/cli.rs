use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn coxtori(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coxtori")).args(args).output().expect("binary runs")
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut all = args.to_vec();
    all.extend(["--format", "json"]);
    let out = coxtori(&all);
    let v = serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stderr)));
    (out.status.code().expect("exit code"), v)
}

fn golden(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn check<'a>(report: &'a Value, id: &str) -> &'a Value {
    report["checks"].as_array().unwrap().iter().find(|c| c["id"] == id).unwrap_or_else(|| panic!("no check {id}"))
}

#[test]
fn bounds_d4_kappa2_matches_table() {
    let (code, r) = json(&["bounds", "--type", "D", "--m", "4", "--kappa", "2"]);
    assert_eq!(code, 0);
    let c = check(&r, "bounds/D4/kappa=2");
    // i/2, then (m-2)/4 and m/4 with m = 4.
    assert_eq!(c["expected"], serde_json::json!(["1/2", "1", "1/2", "1"]));
    assert_eq!(c["computed"]["apartment"], c["expected"]);
    assert!(c["computed"]["tropical"].is_null());
}

#[test]
fn bounds_table_prints_both_routes() {
    let out = coxtori(&["bounds", "--type", "C", "--m", "3", "--kappa", "1"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let header = text.lines().find(|l| l.contains("apartment")).expect("table header");
    assert!(header.contains("tropical") && header.contains("published"));
    assert!(text.lines().any(|l| l.contains("-2*1") && l.matches("3/2").count() == 3));
}

#[test]
fn fixed_point_b3_is_origin() {
    let (code, r) = json(&["fixed-point", "--type", "B", "--m", "3", "--kappa", "0"]);
    assert_eq!(code, 0);
    assert_eq!(check(&r, "fixed-point/B3/kappa=0")["computed"], serde_json::json!(["0", "0", "0"]));
}

#[test]
fn filtration_2a7_has_five_steps() {
    let (code, r) = json(&["filtration", "--type", "2A", "--n", "7"]);
    assert_eq!(code, 0);
    let c = check(&r, "filtration/2A7");
    assert_eq!(c["computed"]["r"], 5);
    assert_eq!(c["details"]["r"], 5);
}

#[test]
fn tori_sl2_pair_counts() {
    let (code, r) = json(&["tori", "--preset", "sl2xsl2", "--b", "1"]);
    assert_eq!(code, 0);
    assert_eq!(check(&r, "tori/sl2xsl2/b=1")["computed"]["classes"], 2);
    let (code, r) = json(&["tori", "--preset", "sl2xsl2", "--b", "b1"]);
    assert_eq!(code, 0);
    assert_eq!(check(&r, "tori/sl2xsl2/b=b1")["computed"]["classes"], 1);
}

#[test]
fn tori_adjoint_a3_one_class_per_label() {
    let (code, r) = json(&["tori", "--type", "A", "--n", "3", "--isogeny", "adjoint"]);
    assert_eq!(code, 0);
    let checks = r["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 3);
    assert!(checks.iter().all(|c| c["computed"]["classes"] == 1));
}

#[test]
fn config_errors_exit_two() {
    assert_eq!(coxtori(&["report", "--type", "D", "--m", "3"]).status.code(), Some(2));
    assert_eq!(coxtori(&["bounds", "--type", "C", "--m", "3", "--kappa", "2"]).status.code(), Some(2));
    assert_eq!(coxtori(&["isocrystal", "--n", "3", "--q", "6"]).status.code(), Some(2));
    assert_eq!(coxtori(&["bounds"]).status.code(), Some(2));
    assert_eq!(coxtori(&["report", "--preset", "nope"]).status.code(), Some(2));
}

#[test]
fn adjoint_pi1_golden_table() {
    let g = golden("pi1_adjoint.json");
    let (code, r) = json(&["report", "--n-max", "10", "--only", "pi1", "--golden", g.to_str().unwrap()]);
    assert_eq!(code, 0, "{:?}", r["summary"]);
    assert_eq!(r["summary"]["total"], 49);
}

#[test]
fn corrupted_golden_table_fails_by_name() {
    let text = std::fs::read_to_string(golden("pi1_adjoint.json")).unwrap();
    let mut table: serde_json::Map<String, Value> = serde_json::from_str(&text).unwrap();
    table.insert("pi1/D5".into(), serde_json::json!({ "group": "Z/2 x Z/2", "coinvariants": "Z/4" }));
    let path = std::env::temp_dir().join(format!("coxtori-corrupt-{}.json", std::process::id()));
    std::fs::write(&path, serde_json::to_string(&table).unwrap()).unwrap();
    let (code, r) = json(&["report", "--n-max", "10", "--only", "pi1", "--golden", path.to_str().unwrap()]);
    std::fs::remove_file(&path).ok();
    assert_eq!(code, 1);
    assert_eq!(r["summary"]["failed_ids"], serde_json::json!(["pi1/D5"]));
}

#[test]
fn unknown_golden_id_is_a_config_error() {
    let path = std::env::temp_dir().join(format!("coxtori-unknown-{}.json", std::process::id()));
    std::fs::write(&path, r#"{"pi1/Z9": {}}"#).unwrap();
    let out = coxtori(&["report", "--only", "pi1", "--golden", path.to_str().unwrap()]);
    std::fs::remove_file(&path).ok();
    assert_eq!(out.status.code(), Some(2));
}

fn without_version(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("version");
    v
}

#[test]
fn report_matches_stored_output() {
    let args = ["report", "--type", "C", "--n", "3", "--trials", "3", "--max-slope-n", "2", "--lift-trials", "5", "--mutations", "20"];
    let (code, r) = json(&args);
    assert_eq!(code, 0);
    let stored: Value = serde_json::from_str(&std::fs::read_to_string(golden("report_c3.json")).unwrap()).unwrap();
    assert_eq!(without_version(r.clone()), without_version(stored));
    let schema: Vec<&str> = r.as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(schema, ["version", "config", "checks", "summary"]);
    for c in r["checks"].as_array().unwrap() {
        assert!(["PAPER", "TRIVIAL", "DERIVED"].contains(&c["provenance"].as_str().unwrap()));
        for k in ["id", "paper_ref", "expected", "computed", "pass"] {
            assert!(c.get(k).is_some(), "{k}");
        }
    }
}

#[test]
fn output_is_byte_stable() {
    let dir = std::env::temp_dir();
    let a = dir.join(format!("coxtori-a-{}.json", std::process::id()));
    let b = dir.join(format!("coxtori-b-{}.json", std::process::id()));
    for p in [&a, &b] {
        let out = coxtori(&["isocrystal", "--n", "3", "--trials", "5", "--seed", "11", "--format", "json", "--out", p.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
    }
    let (x, y) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    std::fs::remove_file(&a).ok();
    std::fs::remove_file(&b).ok();
    assert_eq!(x, y);
}

#[test]
fn lang_lift_small_run() {
    let (code, r) = json(&["lang-lift", "--trials", "10", "--seed", "4"]);
    assert_eq!(code, 0);
    assert_eq!(check(&r, "lang-lift/unipotent3")["computed"]["solved"], 10);
}

#[test]
fn newton_and_kottwitz_presets() {
    let (code, r) = json(&["newton", "--preset", "d4-k2", "--lift-trials", "10"]);
    assert_eq!(code, 0);
    assert_eq!(check(&r, "newton/D4/kappa=2")["computed"]["slope"], "1/2");
    let (code, r) = json(&["kottwitz", "--type", "A", "--n", "5"]);
    assert_eq!(code, 0);
    assert_eq!(check(&r, "kottwitz/A5")["computed"]["distinct_classes"], 5);
}

#[test]
fn presets_list_every_type() {
    let out = coxtori(&["presets", "--format", "json"]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let names: Vec<&str> = v.as_array().unwrap().iter().map(|p| p["name"].as_str().unwrap()).collect();
    for n in ["a4-k0", "b3-k1", "c3-k1", "d4-k2", "2a4-k1", "2a5-k0", "2d4-k1", "sl2xsl2"] {
        assert!(names.contains(&n), "{n}");
    }
}
