use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn regulus(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_regulus")).args(args).output().expect("spawn regulus")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn cartan_identity_has_zero_projection() {
    let out = regulus(&["cartan", path(&fixture("plane_lattice.json")), "1"]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    for mu in v["mu"].as_array().unwrap() {
        assert_eq!(mu.as_f64().unwrap(), 0.0);
    }
}

#[test]
fn cartan_mixed_unipotent_word_is_bracketed() {
    let out = regulus(&["cartan", path(&fixture("mixed_unipotent.json")), "x^12 y^-8"]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let gap = v["gap"].as_f64().unwrap();
    let bounds: Vec<f64> = v["gap_bounds"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert!(bounds[0] <= gap && gap <= bounds[1]);
    // the triple (4, -2, 4) has exact ratio 18/13
    assert!(bounds[0] <= 18.0 / 13.0 && 18.0 / 13.0 <= bounds[1]);
}

#[test]
fn cartan_csv_has_header_and_row() {
    let out = regulus(&["cartan", path(&fixture("diagonal.json")), "x y^-1", "--format", "csv"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("word,sigma1,sigma2,sigma3,mu1"));
    assert!(lines[1].starts_with("x y^-1,"));
}

#[test]
fn bad_input_exits_2() {
    let group = fixture("plane_lattice.json");
    assert_eq!(code(&regulus(&["cartan", path(&group), "x^"])), 2);
    assert_eq!(code(&regulus(&["cartan", path(&group), "z"])), 2);
    assert_eq!(code(&regulus(&["cartan", "/nonexistent/group.json", "x"])), 2);
    assert_eq!(code(&regulus(&["cartan", path(&fixture("rep_plane.json")), "x"])), 2);
    assert_eq!(code(&regulus(&["scan", path(&group), "--threshold", "-1"])), 2);
    assert_eq!(code(&regulus(&["limitset", path(&group), "--threshold", "1"])), 2);
    assert_eq!(code(&regulus(&["classify-z2", path(&fixture("rep_noncommuting.json"))])), 2);
}

#[test]
fn malformed_json_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\n  \"dim\": 3,\n  \"generators\": [\n").unwrap();
    let out = regulus(&["cartan", path(&bad), "x"]);
    assert_eq!(code(&out), 2);
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("bad.json:"), "{err}");
}

#[test]
fn scan_exit_codes_follow_verdict() {
    assert_eq!(code(&regulus(&["scan", path(&fixture("plane_lattice.json")), "--radius", "20"])), 0);
    let out = regulus(&["scan", path(&fixture("diagonal.json")), "--radius", "10"]);
    assert_eq!(code(&out), 3);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["verdict"], "BOUNDED-WITNESS");
    assert!(!v["witness"].is_null());
}

#[test]
fn scan_radius_over_cap_is_rejected() {
    let group = fixture("plane_lattice.json");
    let out = regulus(&["scan", path(&group), "--radius", "1000"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8(out.stderr).unwrap().contains("cap"));
}

#[test]
fn scan_output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let group = fixture("mixed_unipotent.json");
    let mut outputs = Vec::new();
    for (i, jobs) in ["1", "4"].iter().enumerate() {
        for format in ["json", "csv"] {
            let file = dir.path().join(format!("{i}.{format}"));
            let out = regulus(&["--jobs", jobs, "scan", path(&group), "--radius", "8", "--format", format, "--out", path(&file)]);
            assert!(out.stdout.is_empty());
            outputs.push(std::fs::read(&file).unwrap());
        }
    }
    assert_eq!(outputs[0], outputs[2]);
    assert_eq!(outputs[1], outputs[3]);
}

#[test]
fn classify_z2_routes_the_three_examples() {
    let cases = [
        ("rep_plane.json", "REGULAR_LATTICE_PLANE_TYPE"),
        ("rep_not_regular.json", "NOT_REGULAR"),
        ("rep_rank1.json", "NOT_FAITHFUL_OR_NOT_DISCRETE"),
    ];
    for (file, kind) in cases {
        let out = regulus(&["classify-z2", path(&fixture(file))]);
        assert_eq!(code(&out), 0, "{file}");
        let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(v["kind"], kind, "{file}");
    }
    let out = regulus(&["classify-z2", path(&fixture("rep_not_regular.json"))]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["witness"]["kind"], "CLAIM2");
}

#[test]
fn limitset_csv_round_trips_and_empty_sample_exits_5() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("flags.csv");
    let out = regulus(&["limitset", path(&fixture("plane_lattice.json")), "--radius", "12", "--format", "csv", "--out", path(&file)]);
    assert_eq!(code(&out), 0);
    let flags = regulus::files::read_flags_csv(&std::fs::read_to_string(&file).unwrap()).unwrap();
    assert!(!flags.is_empty());
    for (_, conormal) in &flags {
        assert!(conormal[0].abs() < 1e-4 && conormal[1].abs() < 1e-4);
    }
    let out = regulus(&["limitset", path(&fixture("diagonal.json")), "--radius", "3", "--threshold", "1000"]);
    assert_eq!(code(&out), 5);
    assert!(String::from_utf8(out.stderr).unwrap().contains("warning"));
}

#[test]
fn pingpong_plane_lattice_has_no_opposite_point() {
    let out = regulus(&["pingpong", "search", path(&fixture("plane_lattice.json")), "--delta", "x,y"]);
    assert_eq!(code(&out), 6);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["reason"], "no-opposite-point");
}

#[test]
fn pingpong_certificate_verifies_and_tampering_is_caught() {
    let dir = tempfile::tempdir().unwrap();
    let cert = dir.path().join("cert.json");
    let out = regulus(&["pingpong", "search", path(&fixture("so31.json")), "--delta", "u,v", "--out", path(&cert)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(code(&regulus(&["pingpong", "verify", path(&cert)])), 0);

    let original: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&cert).unwrap()).unwrap();
    let tampered = |edit: &dyn Fn(&mut serde_json::Value), name: &str| {
        let mut v = original.clone();
        edit(&mut v);
        let file = dir.path().join(name);
        std::fs::write(&file, serde_json::to_string(&v).unwrap()).unwrap();
        code(&regulus(&["pingpong", "verify", path(&file)]))
    };
    let inflate = |key: &'static str| {
        move |v: &mut serde_json::Value| {
            let r = v[key][0]["radius"].as_f64().unwrap();
            v[key][0]["radius"] = serde_json::json!(r * 4.0);
        }
    };
    assert_eq!(tampered(&inflate("c1"), "c1.json"), 1);
    assert_eq!(tampered(&inflate("c2"), "c2.json"), 1);
    assert_eq!(tampered(&|v| v["power"] = serde_json::json!(1), "power.json"), 1);
}
