use std::path::PathBuf;
use std::process::{Command, Output};

fn branched(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_branched")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn ok(args: &[&str]) -> String {
    let o = branched(args);
    assert!(o.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&o.stderr));
    stdout(&o)
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("branched-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn star_of_two_leaves() {
    assert_eq!(ok(&["hopf", "star", "1", "1"]).trim(), "2*1 1 + 1*1[1]");
    assert_eq!(ok(&["hopf", "star", "1", "2"]).trim(), "1*1 2 + 1*2[1]");
}

#[test]
fn basis_for_two_labels_has_five_generators() {
    let out = ok(&["basis", "gen", "--max-degree", "2", "--labels", "2"]);
    assert!(out.trim_end().ends_with("5 generators"), "{out}");
    let v: serde_json::Value = serde_json::from_str(&ok(&["--json", "basis", "gen", "--max-degree", "2", "--labels", "2"])).unwrap();
    assert_eq!(v["count"], 5);
}

#[test]
fn three_node_forests_with_one_label() {
    let out = ok(&["trees", "enum", "--nodes", "3", "--labels", "1", "--forests"]);
    assert!(out.trim_end().ends_with("4 forests"), "{out}");
    let v: serde_json::Value = serde_json::from_str(&ok(&["--json", "trees", "enum", "--nodes", "3", "--labels", "1", "--forests"])).unwrap();
    assert_eq!(v["count"], 4);
}

#[test]
fn coproduct_exp_and_log() {
    assert_eq!(ok(&["hopf", "cop", "1"]).trim(), "1*(e ⊗ 1) + 1*(1 ⊗ e)");
    let g = ok(&["hopf", "exp", "1*1", "--level", "2"]);
    assert_eq!(g.trim(), "1*e + 1*1 + 1*1 1 + 1/2*1[1]");
    assert_eq!(ok(&["hopf", "log", g.trim(), "--level", "2"]).trim(), "1*1");
}

#[test]
fn rewrite_in_words() {
    assert_eq!(ok(&["rewrite", "1 2"]).trim(), "1*(1 2) - 1*(4)");
}

#[test]
fn exit_codes() {
    assert_eq!(branched(&["trees", "enum", "--nodes", "2"]).status.code(), Some(2));
    assert_eq!(branched(&["hopf", "star", "1[", "1"]).status.code(), Some(3));
    let dir = scratch("codes");
    let bad = dir.join("bad.json");
    std::fs::write(&bad, r#"{"times":[0,0.5,0.4],"values":[[0],[1],[2]],"seed":null,"scheme":"x"}"#).unwrap();
    assert_eq!(branched(&["lift", "ito", "--path", bad.to_str().unwrap()]).status.code(), Some(4));
    let broken = dir.join("broken.json");
    std::fs::write(&broken, "{").unwrap();
    assert_eq!(branched(&["lift", "ito", "--path", broken.to_str().unwrap()]).status.code(), Some(3));
    let tight = branched(&["esig", "mc", "--cov", "1", "--level", "2", "--samples", "500", "--seed", "1", "--band", "0"]);
    assert_eq!(tight.status.code(), Some(5));
    // stochastic commands need a seed
    assert_eq!(branched(&["sim", "bm", "--dim", "1", "--steps", "4"]).status.code(), Some(2));
}

#[test]
fn path_lift_signature_pipeline() {
    let dir = scratch("pipeline");
    let (p, l, s) = (dir.join("path.json"), dir.join("lift.json"), dir.join("sig.json"));
    ok(&["sim", "bm", "--dim", "2", "--steps", "12", "--seed", "4", "--out", p.to_str().unwrap()]);
    ok(&["lift", "ito", "--path", p.to_str().unwrap(), "--out", l.to_str().unwrap()]);
    let from_lift = ok(&["sig", "--lift", l.to_str().unwrap(), "--level", "3", "--check", "--out", s.to_str().unwrap()]);
    let from_path = ok(&["sig", "--path", p.to_str().unwrap(), "--level", "3"]);
    assert_eq!(from_lift, from_path);
    let sig: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&s).unwrap()).unwrap();
    assert_eq!(sig["level"], 3);
    assert_eq!(sig["series"].as_str().unwrap(), from_lift.trim());
    // same seed, same path
    let again = dir.join("again.json");
    ok(&["sim", "bm", "--dim", "2", "--steps", "12", "--seed", "4", "--out", again.to_str().unwrap()]);
    assert_eq!(std::fs::read(&p).unwrap(), std::fs::read(&again).unwrap());
}

#[test]
fn saved_basis_reloads() {
    let dir = scratch("basis");
    let b = dir.join("basis.json");
    ok(&["basis", "gen", "--max-degree", "3", "--labels", "2", "--out", b.to_str().unwrap()]);
    let via_file = ok(&["rewrite", "1 2[1]", "--basis", b.to_str().unwrap()]);
    let direct = ok(&["rewrite", "1 2[1]", "--max-degree", "3", "--labels", "2"]);
    assert_eq!(via_file, direct);
}

#[test]
fn thread_count_does_not_change_results() {
    let args = |t: &'static str| ["--threads", t, "--json", "esig", "mc", "--cov", "1,1/2;1/2,2", "--level", "3", "--samples", "3000", "--seed", "8"];
    assert_eq!(ok(&args("1")), ok(&args("3")));
}

#[test]
fn esig_closed_and_bound() {
    assert_eq!(ok(&["esig", "closed", "--cov", "1,0;0,1", "--level", "2"]).trim(), "1*e + 1*1 1 + 1*2 2");
    let rows: serde_json::Value = serde_json::from_str(&ok(&["--json", "esig", "bound", "--cov", "1", "--max-len", "6"])).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 7);
}

#[test]
fn rde_compare_solvers_agree() {
    let dir = scratch("rde");
    let (p, f) = (dir.join("path.json"), dir.join("fields.json"));
    ok(&["sim", "bm", "--dim", "2", "--steps", "6", "--seed", "5", "--out", p.to_str().unwrap()]);
    std::fs::write(&f, r#"{"e":2,"components":[["x2^2 + 1","x1*x2"],["x1","1 - x2"]]}"#).unwrap();
    let out = ok(&["--json", "rde", "compare", "--driver", p.to_str().unwrap(), "--fields", f.to_str().unwrap(), "--p", "2.5", "--y0", "1/3,-1/2", "--bits", "4"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["identical"], true);
    assert_eq!(v["steps"], 6);
}

#[test]
fn fourier_eval_and_compare() {
    let dir = scratch("fourier");
    let (a, b, rep, rnd) = (dir.join("a.json"), dir.join("b.json"), dir.join("rep.json"), dir.join("rnd.json"));
    ok(&["esig", "sample", "--cov", "1", "--level", "2", "--samples", "3000", "--seed", "1", "--out", a.to_str().unwrap()]);
    ok(&["esig", "sample", "--cov", "4", "--level", "2", "--samples", "3000", "--seed", "2", "--out", b.to_str().unwrap()]);
    std::fs::write(&rep, r#"{"dim":1,"entries":{"1":[[0,1]]}}"#).unwrap();
    ok(&["fourier", "random", "--dim", "2", "--generators", "1,2", "--seed", "3", "--out", rnd.to_str().unwrap()]);
    let v: serde_json::Value = serde_json::from_str(&ok(&["--json", "fourier", "eval", "--rep", rep.to_str().unwrap(), "--sigs", a.to_str().unwrap()])).unwrap();
    let re = v["entries"][0]["re"].as_f64().unwrap();
    let se = v["entries"][0]["stderr"].as_f64().unwrap();
    assert!((re - (-0.5f64).exp()).abs() < 4.0 * se, "{re} ± {se}");
    let v: serde_json::Value = serde_json::from_str(&ok(&[
        "--json", "fourier", "compare", "--rep", rep.to_str().unwrap(), "--rep", rnd.to_str().unwrap(), "--sigs", a.to_str().unwrap(), "--other", b.to_str().unwrap(),
    ]))
    .unwrap();
    assert_eq!(v["distinguished"], true);
}

#[test]
fn demo_walkthrough() {
    let v: serde_json::Value = serde_json::from_str(&ok(&["--json", "demo", "section6", "--seed", "2", "--samples", "4000"])).unwrap();
    assert_eq!(v["generators"].as_array().unwrap().len(), 5);
    assert_eq!(v["ito_stratonovich"]["exact_match"], true);
    assert_eq!(v["products"][0]["product"], "2*1 1 + 1*1[1]");
}
