use std::fs;
use std::process::{Command, Output};

use robba::{PadicCtx, SeriesElement};
use serde_json::Value;

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_robba-cli"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(path: &std::path::Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn eps_prints_gauss_sum() {
    let out = cli(&["eps", "p=3;dp=7;fin=1;m=1;k=0"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["conductor"], 1);
    assert_eq!(v["character"], "p=3;dp=7;fin=1;m=1;k=0");
    assert!(v["gauss_sum"].as_str().unwrap().contains("sum"));
}

#[test]
fn eps_rejects_bad_spec() {
    let out = cli(&["eps", "p=4;dp=1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = cli(&["--p", "5", "eps", "p=3;dp=7;fin=1;m=1;k=0"]);
    assert!(!out.status.success());
}

#[test]
fn colmez_sample_of_unit_indicator() {
    let dir = tempfile::tempdir().unwrap();
    let ctx = PadicCtx::new(3, 12).unwrap();
    let f = SeriesElement::from_coeffs(&ctx, -1, vec![ctx.one(), ctx.one()]);
    let input = dir.path().join("f.json");
    let output = dir.path().join("col.json");
    fs::write(&input, serde_json::to_string(&f).unwrap()).unwrap();
    let out = cli(&["transform", "colmez-sample", input.to_str().unwrap(), output.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&output);
    let samples = v["samples"].as_array().unwrap();
    assert_eq!(samples.len(), 27);
    for s in samples {
        assert_eq!(s["display"], "1 + O(3^12)", "{s}");
    }
}

#[test]
fn dirac_moments_and_back() {
    let dir = tempfile::tempdir().unwrap();
    let ctx = PadicCtx::new(5, 12).unwrap();
    let f = SeriesElement::one_plus_pi_pow(&ctx, 3, 0).unwrap();
    let input = dir.path().join("dirac.json");
    let moments = dir.path().join("moments.json");
    let back = dir.path().join("back.json");
    fs::write(&input, serde_json::to_string(&f).unwrap()).unwrap();
    let p = |x: &std::path::Path| x.to_str().unwrap().to_string();
    assert!(cli(&["transform", "amice-to-moments", &p(&input), &p(&moments)]).status.success());
    let m: Vec<robba::PadicScalar> = serde_json::from_value(json(&moments)["moments"].clone()).unwrap();
    let want: Vec<_> = [1, 3, 9, 27].iter().map(|&x| ctx.int(x)).collect();
    assert_eq!(m, want);
    assert!(cli(&["transform", "moments-to-amice", &p(&moments), &p(&back)]).status.success());
    let g: SeriesElement = serde_json::from_value(json(&back)).unwrap();
    assert!(g.agreement(&f) >= 10);
}

#[test]
fn moments_accept_plain_rationals() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("m.json");
    let output = dir.path().join("a.json");
    fs::write(&input, r#"{"p": 3, "moments": [1, 2, "4"]}"#).unwrap();
    let out = cli(&["transform", "moments-to-amice", input.to_str().unwrap(), output.to_str().unwrap()]);
    assert!(out.status.success());
    let g: SeriesElement = serde_json::from_value(json(&output)).unwrap();
    // Dirac at 2: (1+π)^2 = 1 + 2π + π²
    let ctx = PadicCtx::new(3, 12).unwrap();
    assert_eq!(g.coeff(1).unwrap(), ctx.int(2));
    assert_eq!(g.coeff(2).unwrap(), ctx.int(1));
}

#[test]
fn verify_writes_versioned_report() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("appendix.json");
    let out = cli(&["verify", "appendix", "--p", "3", "--json-out", out_path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out_path);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["suite"], "appendix");
    assert!(v["records"].as_array().unwrap().iter().all(|r| r["pass"] == true));
    let tsv = String::from_utf8(out.stdout).unwrap();
    assert!(tsv.starts_with("suite\tidentity_id"));
    assert!(tsv.contains("residue_phi_side"));
}

#[test]
fn verify_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for path in [&a, &b] {
        let out = cli(&["verify", "operators", "--seed", "7", "--json-out", path.to_str().unwrap()]);
        assert!(out.status.success());
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn config_file_and_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("session.conf");
    let out_path = dir.path().join("r.json");
    fs::write(&conf, "p = 5\nprec = 10\nseed = 3\ncharacters = 4\n").unwrap();
    let out = cli(&[
        "verify",
        "epsilon",
        "--config",
        conf.to_str().unwrap(),
        "--p",
        "3",
        "--json-out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let v = json(&out_path);
    assert_eq!((v["p"].as_u64(), v["prec"].as_u64(), v["seed"].as_u64()), (Some(3), Some(10), Some(3)));
}

#[test]
fn failing_records_give_nonzero_exit() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("strict.conf");
    // the residue is only certified to about 10 digits at this window
    fs::write(&conf, "residue_digits = 12\n").unwrap();
    let out = cli(&["verify", "appendix", "--config", conf.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stdout).unwrap().contains("FAIL"));
}

#[test]
fn unknown_suite_is_an_error() {
    assert_eq!(cli(&["verify", "nonsense"]).status.code(), Some(2));
}
