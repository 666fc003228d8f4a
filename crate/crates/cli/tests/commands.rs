use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(format!("../../fixtures/{name}.pv.json"))
}

fn augvis(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_augvis"))
        .args(args)
        .env_remove("PAPAR_HUB")
        .output()
        .unwrap()
}

fn arg(p: &std::path::Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn compile_writes_four_files() {
    let out = tempfile::tempdir().unwrap();
    let r = augvis(&["compile", arg(&fixture("bar_extend")), "--out", arg(out.path())]);
    assert_eq!(r.status.code(), Some(0));
    let preview = fs::read_to_string(out.path().join("preview.svg")).unwrap();
    assert!(preview.contains("<g data-layer=\"static\">") && preview.contains("<g data-layer=\"virtual\""));
    let anchor: serde_json::Value = serde_json::from_slice(&fs::read(out.path().join("anchor.json")).unwrap()).unwrap();
    assert_eq!(anchor["ver"], 1);
    assert!(fs::read_to_string(out.path().join("static.svg")).unwrap().contains("data-anchor="));
    assert!(out.path().join("virtual.svg").exists());
}

#[test]
fn static_layer_matches_golden() {
    let out = tempfile::tempdir().unwrap();
    augvis(&["compile", arg(&fixture("bar_extend")), "--out", arg(out.path())]);
    let golden = fs::read_to_string(fixture("bar_extend").parent().unwrap().join("golden/bar_extend.static.svg")).unwrap();
    let preview = fs::read_to_string(out.path().join("preview.svg")).unwrap();
    for rect in golden.lines().filter(|l| l.starts_with("<rect") && l.contains("data-pid")) {
        assert!(preview.contains(rect), "{rect}");
    }
}

#[test]
fn spec_without_ar_skips_virtual() {
    let dir = tempfile::tempdir().unwrap();
    let mut doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(fixture("bar_extend")).unwrap()).unwrap();
    doc.as_object_mut().unwrap().remove("ar");
    let spec = dir.path().join("plain.pv.json");
    fs::write(&spec, doc.to_string()).unwrap();
    let out = dir.path().join("out");
    let r = augvis(&["compile", arg(&spec), "--out", arg(&out)]);
    assert_eq!(r.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&r.stderr).contains("virtual.svg not written"));
    assert!(!out.join("virtual.svg").exists());
    assert!(out.join("preview.svg").exists());
}

#[test]
fn validate_exit_codes() {
    let r = augvis(&["validate", arg(&fixture("bar_extend"))]);
    assert_eq!(r.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&r.stdout).starts_with("valid"));

    let r = augvis(&["validate", arg(&fixture("pie_extend"))]);
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&r.stdout).contains("(pie)"));

    let r = augvis(&["validate", arg(&fixture("treemap_internal")), "--json"]);
    assert_eq!(r.status.code(), Some(2));
    let report: serde_json::Value = serde_json::from_slice(&r.stdout).unwrap();
    assert_eq!(
        report["stageDiffs"][0]["hint"]["text"],
        "avoid 'treemap' when new nodes are added to the internal nodes"
    );
}

#[test]
fn usage_and_compile_errors() {
    let dir = tempfile::tempdir().unwrap();
    let broken = dir.path().join("broken.pv.json");
    fs::write(&broken, "{").unwrap();
    assert_eq!(augvis(&["validate", arg(&broken)]).status.code(), Some(3));
    assert_eq!(augvis(&["compile", arg(&dir.path().join("missing.json"))]).status.code(), Some(1));
}

#[test]
fn mock_honours_seed() {
    let a = augvis(&["mock", arg(&fixture("timeline_placeholder")), "--seed", "1"]);
    let b = augvis(&["mock", arg(&fixture("timeline_placeholder")), "--seed", "2"]);
    assert_eq!(a.status.code(), Some(0));
    let rows: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(rows[0]["values"].as_array().unwrap().len(), 3);
    assert_ne!(a.stdout, b.stdout);
}

#[test]
fn publish_invalid_needs_force() {
    // Nothing listens here: a refused upload would exit 1, so exit 2 shows no upload was tried.
    let r = augvis(&["publish", arg(&fixture("pie_extend")), "--hub", "http://127.0.0.1:9"]);
    assert_eq!(r.status.code(), Some(2));
    let r = augvis(&["publish", arg(&fixture("pie_extend")), "--hub", "http://127.0.0.1:9", "--force"]);
    assert_eq!(r.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&r.stderr).contains("warning: publishing"));
}
