use std::process::{Command, Output};

fn multiscale(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_multiscale"))
        .args(args)
        .env_remove("MULTISCALE_MAX_N")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn betti_json() {
    let o = multiscale(&["betti", "--model", "B", "--n", "4", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["ranks"], serde_json::json!([1, 8, 1]));
    assert_eq!(v["schema"], "multiscale.betti/1");
}

#[test]
fn betti_other_models_and_formats() {
    let o = multiscale(&["betti", "--model", "M0", "--n", "5"]);
    assert_eq!(stdout(&o), "(1, 16, 16, 1)\n");
    let o = multiscale(&["betti", "--model", "A", "--n", "3", "--format", "csv"]);
    assert_eq!(stdout(&o), "degree,rank\n0,1\n1,4\n2,1\n");
}

#[test]
fn verify_all_n3() {
    let o = multiscale(&["verify", "--suite", "all", "--n", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("8 A-strata"), "{out}");
    assert!(out.contains("fixed-point count 3"), "{out}");
    assert!(out.ends_with("overall: PASS\n"));
}

#[test]
fn verify_all_small_n() {
    for n in ["2", "4", "5"] {
        let o = multiscale(&["verify", "--suite", "all", "--n", n, "--format", "json"]);
        assert_eq!(o.status.code(), Some(0), "n = {n}");
        let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
        assert_eq!(v["passed"], true);
        assert_eq!(v["suites"].as_array().unwrap().len(), 7);
    }
}

#[test]
fn tree_dot_for_example_chain() {
    let o = multiscale(&["tree", "--space", "B", "--chain", "123|45<12|3|45"]);
    assert_eq!(o.status.code(), Some(0));
    let dot = stdout(&o);
    let vertices = dot.lines().filter(|l| l.trim_start().starts_with('v') && l.contains("[label=")).count();
    // root plus {123}, {12} and {45}
    assert_eq!(vertices, 4);
    assert_eq!(dot.matches("style=dashed").count(), 1);
    assert!(dot.contains("v0 -> v3 [style=dashed, minlen=2]"));
}

#[test]
fn output_is_deterministic() {
    for args in [
        &["strata", "--space", "A", "--n", "4", "--format", "json"][..],
        &["verify", "--suite", "ideal-consistency", "--n", "4", "--seed", "9"][..],
        &["pairing", "--model", "B", "--n", "5", "--k", "1", "--format", "csv"][..],
    ] {
        assert_eq!(multiscale(args).stdout, multiscale(args).stdout);
    }
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(multiscale(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(multiscale(&["betti", "--model", "Q", "--n", "4"]).status.code(), Some(2));
    assert_eq!(multiscale(&["betti", "--model", "B"]).status.code(), Some(2));
    assert_eq!(multiscale(&["tree", "--space", "B", "--chain", "12|3<13|2"]).status.code(), Some(2));
    assert_eq!(multiscale(&["partitions", "--n", "3", "--format", "dot"]).status.code(), Some(2));
}

#[test]
fn guardrail_and_override() {
    let o = multiscale(&["partitions", "--n", "7"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("capacity exceeded"));
    let o = Command::new(env!("CARGO_BIN_EXE_multiscale"))
        .args(["partitions", "--n", "7", "--format", "json"])
        .env("MULTISCALE_MAX_N", "7")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["count"], 877);
}

#[test]
fn catalog_plan_and_oracle() {
    let o = multiscale(&["catalog", "--kind", "diag-inf", "--n", "4", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["members"].as_array().unwrap().len(), 10);
    let o = multiscale(&["plan", "--model", "B", "--n", "4", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["steps"].as_array().unwrap().len(), 13);
    let o = multiscale(&["oracle", "--model", "B", "--n", "5"]);
    assert_eq!(stdout(&o), "(1, 41, 41, 1)\n");
    let o = multiscale(&["oracle", "--model", "A", "--n", "5"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn pairing_and_reduce() {
    let o = multiscale(&["pairing", "--model", "B", "--n", "4", "--k", "1", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["rank"], 8);
    assert_eq!(v["schema"], "multiscale.pairing/1");
    let o = multiscale(&["reduce", "--model", "B", "--n", "4", "--expr", "x[12|3|4] * x[13|2|4]"]);
    assert_eq!(stdout(&o), "0\n");
    let o = multiscale(&["reduce", "--model", "B", "--n", "3", "--expr", "x[12|3] - x[13|2]"]);
    assert_eq!(stdout(&o), "0\n");
}
