use std::process::{Command, Output};

fn boxdim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_boxdim"))
        .args(args)
        .env_remove("BOXDIM_PRECISION_BITS")
        .output()
        .unwrap()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn csv_rows(out: &Output) -> (csv::StringRecord, Vec<csv::StringRecord>) {
    let mut r = csv::ReaderBuilder::new().from_reader(out.stdout.as_slice());
    let header = r.headers().unwrap().clone();
    let rows = r.records().map(|x| x.unwrap()).collect();
    (header, rows)
}

#[test]
fn validate_decimal_tower() {
    let out = boxdim(&["validate", "--k", "paper", "--horizon", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(v["rows"].as_array().unwrap().iter().all(|r| r["outcome"] == "pass"));
}

#[test]
fn validate_geometric_list_fails() {
    let out = boxdim(&["validate", "--k", "1,2,4,8,16", "--horizon", "3"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn count_example() {
    let out = boxdim(&["count", "--set", "F", "--delta", "1/125", "--oracle", "both"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["analytic"], "8");
    for k in ["cover", "pack"] {
        assert_eq!(v[k]["lower"], "8");
        assert_eq!(v[k]["upper"], "8");
        assert_eq!(v[k]["exact"], true);
    }
    assert!(String::from_utf8_lossy(&out.stderr).contains("ms"));
}

#[test]
fn count_accepts_all_delta_forms() {
    for (delta, n) in [
        ("0,3,0", "8"),
        ("0.9", "2"),
        ("neglog:4.8283137373023", "8"),
        ("1/2", "2"),
    ] {
        let out = boxdim(&["count", "--delta", delta, "--oracle", "analytic"]);
        assert_eq!(out.status.code(), Some(0), "{delta}");
        assert_eq!(json(&out)["analytic"], n, "{delta}");
    }
}

#[test]
fn stages_csv() {
    let out = boxdim(&["stages", "--set", "F", "--depth", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "stage,left_num,left_den,right_num,right_den\n2,0,1,1,25\n2,4,25,1,5\n2,4,5,21,25\n2,24,25,1,1\n"
    );
}

#[test]
fn figure1_band() {
    let out = boxdim(&["figure1", "--window", "0.5:4.5", "--samples", "2000"]);
    assert_eq!(out.status.code(), Some(0));
    let (header, rows) = csv_rows(&out);
    assert_eq!(header.iter().collect::<Vec<_>>(), ["loglog_x", "phi_F", "phi_G"]);
    assert_eq!(rows.len(), 2000);
    let f: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(f.iter().cloned().fold(f64::MAX, f64::min) < 0.37);
    assert!(f.iter().cloned().fold(f64::MIN, f64::max) > 0.59);
}

#[test]
fn profile_columns() {
    let out = boxdim(&["profile", "--samples", "50"]);
    assert_eq!(out.status.code(), Some(0));
    let (header, rows) = csv_rows(&out);
    assert_eq!(
        header.iter().collect::<Vec<_>>(),
        ["x", "loglog_x", "j_F", "phi_F", "j_G", "phi_G", "phi_sum"]
    );
    for r in &rows {
        let (f, g, s): (f64, f64, f64) = (r[3].parse().unwrap(), r[5].parse().unwrap(), r[6].parse().unwrap());
        assert!((f + g - s).abs() < 1e-12);
    }
}

#[test]
fn output_is_deterministic() {
    for args in [
        &["figure1", "--samples", "300"][..],
        &["profile", "--samples", "200"],
        &["phase-check", "--samples", "500"],
        &["dims", "--n-max", "1"],
        &[
            "product-check",
            "--f",
            "F-desk",
            "--g",
            "G-desk",
            "--delta",
            "1/625",
            "--depth",
            "6",
        ],
    ] {
        let a = boxdim(args);
        let b = boxdim(args);
        assert_eq!(a.status.code(), Some(0), "{args:?}");
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn output_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("dims.json");
    let to_file = boxdim(&["dims", "--output", path.to_str().unwrap()]);
    assert_eq!(to_file.status.code(), Some(0));
    assert!(to_file.stdout.is_empty());
    assert_eq!(std::fs::read(&path).unwrap(), boxdim(&["dims"]).stdout);
}

#[test]
fn product_check_exit_follows_certified_checks() {
    let out = boxdim(&["product-check", "--delta", "1/25", "--depth", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["packing_size"], "16");
    assert_eq!(v["holds"], true);
}

#[test]
fn verification_commands_pass() {
    for args in [
        &["phase-check", "--samples", "2000", "--format", "json"][..],
        &["bands", "--set", "G", "--band", "lower"],
        &["extrema", "--samples", "500"],
        &["ratios", "--format", "json"],
    ] {
        assert_eq!(boxdim(args).status.code(), Some(0), "{args:?}");
    }
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["count", "--delta", "2/0"][..],
        &["count", "--delta", "1/5", "--set", "no-such-schedule"],
        &["stages", "--depth", "30"],
        &["count", "--delta", "1/125", "--depth", "1", "--oracle", "greedy"],
        &["nope"],
        &["figure1", "--window", "4:1"],
    ] {
        assert_eq!(boxdim(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn indeterminate_exits_3() {
    // 30 digits of the stage-100 boundary 90 ln 3 + 10 ln 5
    let x = "neglog:114.969485104470875971579664655";
    let fine = boxdim(&["count", "--set", "F", "--delta", x, "--oracle", "analytic"]);
    assert_eq!(fine.status.code(), Some(0));
    assert_eq!(json(&fine)["stage"], "100");
    let coarse = boxdim(&[
        "--precision",
        "64",
        "count",
        "--set",
        "F",
        "--delta",
        x,
        "--oracle",
        "analytic",
    ]);
    assert_eq!(coarse.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&coarse.stderr).contains("100"));
}

#[test]
fn schedule_file_input() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("thirds.json");
    std::fs::write(
        &path,
        r#"{ "k_rule": "paper", "role": "custom", "runs": [ { "from": "1", "to": null, "generator": "G3" } ] }"#,
    )
    .unwrap();
    let out = boxdim(&["count", "--set", path.to_str().unwrap(), "--delta", "1/27"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["analytic"], "8");
}
