use dyadic_walsh::experiments::run;
use dyadic_walsh::transform::{dirichlet_formula, walsh};
use dyadic_walsh::StepFunction;
use serde_json::Value;

fn call(args: &[&str]) -> (i32, String) {
    let mut out = Vec::new();
    let argv = std::iter::once("dyadic-walsh").chain(args.iter().copied());
    let code = run(argv, &mut out);
    (code, String::from_utf8(out).unwrap())
}

#[test]
fn index_json() {
    let (code, out) = call(&["index", "1025"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!((v["order"].clone(), v["low"].clone(), v["gap"].clone(), v["variation"].clone()),
        (10.into(), 0.into(), 10.into(), 4.into()));
}

#[test]
fn kernel_json_and_csv() {
    let (code, out) = call(&["kernel", "3", "--level", "2", "--format", "json"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["values"], serde_json::json!(["3/2^0", "1/2^0", "1/2^0", "-1/2^0"]));
    let (code, out) = call(&["kernel", "3", "--level", "2", "--format", "csv", "--route", "direct"]);
    assert_eq!(code, 0);
    assert_eq!(out, "ix,value\n0,3/2^0\n1,1/2^0\n2,1/2^0\n3,-1/2^0\n");
}

#[test]
fn lebesgue_full_sweep() {
    let (code, out) = call(&["lebesgue", "--max-n", "4096", "--format", "csv"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert!(lines[0].starts_with("# dyadic-walsh lebesgue schema v1"));
    assert_eq!(lines[1], "n,variation,gap,lebesgue,ratio");
    let rows = lines.iter().filter(|l| !l.starts_with('#')).count() - 1;
    assert_eq!(rows, 4096);
    assert!(out.contains("# check lebesgue_two_sided: pass"));
}

#[test]
fn fwht_roundtrip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let f_path = dir.path().join("d5.json");
    let c_path = dir.path().join("c.json");
    let back = dir.path().join("back.json");
    let d5 = dirichlet_formula(5, 4).unwrap();
    d5.save(&f_path).unwrap();
    let f = f_path.to_str().unwrap();
    let (code, _) = call(&["fwht", "--in", f, "--out", c_path.to_str().unwrap()]);
    assert_eq!(code, 0);
    let c: Value = serde_json::from_str(&std::fs::read_to_string(&c_path).unwrap()).unwrap();
    let coeffs = c["coeffs"].as_array().unwrap();
    assert_eq!(coeffs.len(), 16);
    assert_eq!(coeffs[4], "1/2^0");
    assert_eq!(coeffs[5], "0/2^0");
    let (code, _) = call(&["fwht", "--inverse", "--in", c_path.to_str().unwrap(), "--out", back.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(StepFunction::load(&back).unwrap(), d5);
}

#[test]
fn norms_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("w.json");
    walsh(6, 4).unwrap().save(&path).unwrap();
    let (code, out) = call(&["norms", "--in", path.to_str().unwrap(), "--ops", "lp,weak,hp,mod:0", "--format", "json"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[0][2], "1/2^0");
    assert_eq!(rows[2][2], "1/2^0");
    assert_eq!(rows[3][2], "2/2^0");
}

#[test]
fn construct_and_diverge() {
    let (code, out) = call(&["construct", "--theorem", "t5b", "--level", "16"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["oracle"]["mismatches"], 0);
    assert_eq!(v["alphas"].as_array().unwrap().len(), 3);

    let (code, out) = call(&["diverge", "--theorem", "t5b", "--level", "16"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("# check floor_one_eighth: pass"));

    let (code, out) = call(&["diverge", "--theorem", "t1b", "--level", "12", "--format", "json"]);
    let v: Value = serde_json::from_str(&out).unwrap();
    let failed = v["checks"].as_array().unwrap().iter().any(|c| c["passed"] == false);
    assert_eq!(code, if failed { 2 } else { 0 });

    // Three terms below 2^20 are too few for the fitted slope to settle.
    let (code, out) = call(&["diverge", "--theorem", "t2b", "--level", "20"]);
    assert_eq!(code, 2);
    assert!(out.contains("# check growth_slope: FAIL"));
    assert!(out.contains("# check ratio_floor: pass"));
}

#[test]
fn converge_runs() {
    let (code, out) = call(&["converge", "--level", "12", "--seed", "5"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("# check errors_decay: pass"));
    let (code, out) = call(&["converge", "--theorem", "t4b", "--level", "12"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("# check positive_floor: pass"));
}

#[test]
fn usage_errors() {
    assert_eq!(call(&["nonsense"]).0, 1);
    assert_eq!(call(&["index"]).0, 1);
    assert_eq!(call(&["index", "0"]).0, 1);
    assert_eq!(call(&["kernel", "9", "--level", "2"]).0, 1);
    assert_eq!(call(&["lebesgue", "--max-n", "5000"]).0, 1);
    assert_eq!(call(&["construct", "--theorem", "t5b", "--level", "6"]).0, 1);
    assert_eq!(call(&["norms", "--in", "/nonexistent/file.json"]).0, 1);
    let (code, out) = call(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("lebesgue"));
}
