use serde_json::Value;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_toric-exc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut a = args.to_vec();
    a.extend(["--format", "json"]);
    let o = run(&a);
    let v = serde_json::from_str(&stdout(&o)).unwrap_or_else(|e| panic!("{args:?}: {e}\n{}", stdout(&o)));
    (o.status.code().unwrap(), v)
}

#[test]
fn build_block_sizes() {
    for (n, sizes) in [("2", vec![2, 3, 1]), ("4", vec![2, 5, 10, 10, 2, 1])] {
        let (code, v) = json(&["build", "--dim", n]);
        assert_eq!(code, 0);
        let got: Vec<usize> = v["blocks"].as_array().unwrap().iter().map(|b| b["members"].as_array().unwrap().len()).collect();
        assert_eq!(got, sizes);
    }
    let text = stdout(&run(&["build", "--dim", "2"]));
    assert!(text.starts_with("V_2: 6 line bundles in 3 blocks"), "{text}");
    assert!(text.contains("E_2  l=3  (1,3) (2,3)  [2]: O(-H), O(E-2H)"), "{text}");
}

#[test]
fn odd_dimension_is_a_usage_error() {
    let o = run(&["build", "--dim", "3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("n must be even"));
    assert_eq!(run(&["figure", "--dim", "10"]).status.code(), Some(2));
    assert_eq!(run(&["figure", "--dim", "10", "--allow-large"]).status.code(), Some(0));
    assert_eq!(run(&["verify", "--dim", "2", "--method", "guess"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "--dim", "2", "--mutate", "drop:99"]).status.code(), Some(2));
}

#[test]
fn verify_examples() {
    let (code, v) = json(&["verify", "--dim", "4", "--what", "exceptional", "--method", "inequalities"]);
    assert_eq!(code, 0);
    assert_eq!(v["report"]["checked_pairs"], 870);
    let (code, v) = json(&["verify", "--dim", "6", "--what", "generation"]);
    assert_eq!(code, 0);
    assert_eq!(v["report"]["walls"].as_array().unwrap().len(), 64);
    for what in ["stability", "cardinality", "walls"] {
        assert_eq!(run(&["verify", "--dim", "4", "--what", what]).status.code(), Some(0), "{what}");
    }
    let o = run(&["verify", "--dim", "2", "--what", "exceptional", "--method", "oracle", "--mutate", "drop:0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("FAIL"));
}

#[test]
fn all_methods_pass_on_v2() {
    for m in ["inequalities", "forbidden", "oracle"] {
        let (code, v) = json(&["verify", "--dim", "2", "--method", m, "--full-report"]);
        assert_eq!(code, 0, "{m}");
        assert_eq!(v["report"]["verdicts"].as_array().unwrap().len(), 30);
        assert!(v["report"]["violations"].as_array().unwrap().is_empty());
    }
}

#[test]
fn sampling_defaults_and_determinism() {
    let (_, a) = json(&["verify", "--dim", "6", "--method", "oracle", "--full-report", "--budget", "40", "--seed", "3"]);
    let (_, b) = json(&["verify", "--dim", "6", "--method", "oracle", "--full-report", "--budget", "40", "--seed", "3"]);
    assert_eq!(a["report"]["verdicts"], b["report"]["verdicts"]);
    assert_eq!(a["report"]["sample"]["budget"], 40);
    let (_, c) = json(&["verify", "--dim", "6", "--method", "forbidden"]);
    assert_eq!(c["report"]["checked_pairs"], 500);
    assert_eq!(c["report"]["sample"]["seed"], 0);
}

#[test]
fn cohomology_examples() {
    for (d, want) in [("[-1,0,0,0]", "h = 0,0,0"), ("[0,0,0,0]", "h = 1,0,0"), ("[3,−1,−1,−1]", "h = 7,0,0")] {
        let out = stdout(&run(&["cohomology", "--dim", "2", "--divisor", d]));
        assert!(out.contains(want), "{d}: {out}");
    }
    let (_, v) = json(&["cohomology", "--dim", "2", "--divisor", "[-1,0,0,0]", "--forbidden"]);
    assert_eq!(v["euler"], 0);
    assert!(v["forbidden_cones"].as_array().unwrap().is_empty());
    let (_, v) = json(&["cohomology", "--dim", "2", "--divisor", "[0,0,0,0]", "--forbidden"]);
    assert!(!v["forbidden_cones"].as_array().unwrap().is_empty());
    assert_eq!(run(&["cohomology", "--dim", "2", "--divisor", "[1,2]"]).status.code(), Some(2));
}

#[test]
fn figure_row_counts() {
    for (n, rows) in [("2", 4), ("4", 9), ("6", 16), ("8", 25)] {
        let out = stdout(&run(&["figure", "--dim", n]));
        assert_eq!(out.lines().count(), rows + 1, "{n}");
        assert_eq!(out.lines().next(), Some("c,ell"));
    }
}

#[test]
fn gram_and_certificate() {
    let (code, v) = json(&["gram", "--dim", "2"]);
    assert_eq!(code, 0);
    assert_eq!(v["upper_unitriangular"], true);
    let g = v["gram"].as_array().unwrap();
    // O(-H) is first and O last
    assert_eq!(g[0][5], 3);
    let (code, v) = json(&["certificate", "--dim", "2"]);
    assert_eq!(code, 0);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["d"], 1);
    assert_eq!(v["base_case"], "empty");
    let walls = v["walls"].as_array().unwrap();
    assert_eq!(walls.len(), 4);
    let j0 = walls.iter().find(|w| w["J"] == serde_json::json!([0])).unwrap();
    assert_eq!(j0["wall_range"], serde_json::json!([-1, -1]));
    assert_eq!(j0["pieces"][0]["w"], 1);
    assert_eq!(j0["pieces"][0]["branch"], "high");
}

#[test]
fn out_file_and_collection_round_trip() {
    let dir = std::env::temp_dir().join(format!("toric-exc-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("g4.json");
    let p = path.to_str().unwrap();
    assert_eq!(run(&["build", "--dim", "4", "--out", p]).status.code(), Some(0));
    let o = run(&["verify", "--dim", "4", "--collection", p, "--method", "oracle"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    // a collection for another dimension is rejected
    assert_eq!(run(&["verify", "--dim", "2", "--collection", p]).status.code(), Some(2));
    std::fs::remove_dir_all(&dir).unwrap();
}
