use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use paracel_core::cluster::registry;
use paracel_core::instances::{self, Instance};
use paracel_core::polyring::MPolyJson;
use paracel_core::MPoly;
use serde_json::Value;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/data")
        .join(name)
}

fn paracel(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_paracel"))
        .args(args)
        .env_remove("RC_MAX_EDGES")
        .output()
        .unwrap()
}

fn run_on(args: &[&str], graph: &str) -> Output {
    let path = data(graph);
    let mut full = args.to_vec();
    full.insert(1, path.to_str().unwrap());
    paracel(&full)
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn mpoly_prints_triangle_polynomial() {
    let out = run_on(&["mpoly"], "k3.graph");
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "x_g*q^3 + x_g^2*q^2\n");
    let out = run_on(&["mpoly", "--at-q", "1"], "k3.graph");
    assert_eq!(stdout(&out), "x_g + x_g^2\n");
}

#[test]
fn mpoly_evaluates_at_weights() {
    let out = run_on(&["mpoly", "--at-q", "1/2", "--weights", "g=2"], "k3.graph");
    // 2/8 + 4/4
    assert_eq!(stdout(&out), "5/4\n");
    let out = run_on(&["mpoly", "--weights", "g=2"], "k3.graph");
    assert_eq!(stdout(&out), "4*q^2 + 2*q^3\n");
}

#[test]
fn malformed_input_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.graph");
    std::fs::write(
        &bad,
        "vertices 3\nedge e 0 1\nedge f 1 7\nmark e e\nmark f f\n",
    )
    .unwrap();
    let out = paracel(&["mpoly", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(64));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("out of range"), "{err}");

    assert_eq!(paracel(&["mpoly", "/no/such/file"]).status.code(), Some(64));
    assert_eq!(paracel(&["frobnicate"]).status.code(), Some(64));
    assert_eq!(
        run_on(&["mpoly", "--at-q", "x"], "k3.graph").status.code(),
        Some(64)
    );
    assert_eq!(
        run_on(&["classify", "--a", "e"], "k3.graph").status.code(),
        Some(64)
    );
    assert_eq!(paracel(&["ansatz"]).status.code(), Some(64));
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(paracel(&["--help"]).status.code(), Some(0));
    assert_eq!(paracel(&["--version"]).status.code(), Some(0));
}

#[test]
fn edge_cap_applies_and_can_be_overridden() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("big.graph");
    let mut text = String::from("vertices 2\nedge e 0 1\nedge f 0 1\n");
    for i in 0..4 {
        text.push_str(&format!("edge g{i} 0 0\n"));
    }
    text.push_str("mark e e\nmark f f\n");
    std::fs::write(&path, text).unwrap();
    let path = path.to_str().unwrap();
    let capped = Command::new(env!("CARGO_BIN_EXE_paracel"))
        .args(["mpoly", path])
        .env("RC_MAX_EDGES", "5")
        .output()
        .unwrap();
    assert_eq!(capped.status.code(), Some(64));
    let err = String::from_utf8(capped.stderr).unwrap();
    assert!(err.contains("warning") && err.contains("cap"), "{err}");
    let raised = Command::new(env!("CARGO_BIN_EXE_paracel"))
        .args(["mpoly", path])
        .env("RC_MAX_EDGES", "6")
        .output()
        .unwrap();
    assert_eq!(raised.status.code(), Some(0));
}

#[test]
fn verify_passes_on_bundled_graphs_and_loops() {
    for name in ["k3.graph", "k4_minus_edge.graph", "k4.graph"] {
        assert_eq!(run_on(&["verify"], name).status.code(), Some(0), "{name}");
    }
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("loop.graph");
    std::fs::write(
        &path,
        "vertices 2\nedge e 0 0\nedge f 0 1\nedge g 0 1\nmark e e\nmark f f\n",
    )
    .unwrap();
    let out = paracel(&["verify", path.to_str().unwrap(), "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    assert_eq!(report["payload"]["equal"], true);
    assert_eq!(report["payload"]["lhs"]["terms"], Value::Array(vec![]));
}

#[test]
fn paracel_tables_have_expected_rows() {
    let rows = |graph: &str| {
        let report = json(&run_on(&["paracels", "--table", "--json"], graph));
        report["payload"]["table"].as_array().unwrap().len()
    };
    assert_eq!(rows("k3.graph"), 2);
    assert_eq!(rows("k4_minus_edge.graph"), 14);
    let text = stdout(&run_on(&["paracels", "--table"], "k4_minus_edge.graph"));
    assert!(text.starts_with("3 paracel(s)\n"));
    assert!(text.contains("{k}  | {g}   | {{h}}               | {x_h^2}"));
}

#[test]
fn split_and_classify() {
    let out = run_on(&["split", "--gamma", "g,h"], "k4_minus_edge.graph");
    assert_eq!(stdout(&out), "gamma {g,h}  beta {k}  alpha {}  alpha' {}\n");
    assert_eq!(
        run_on(&["split", "--gamma", "h"], "k4_minus_edge.graph")
            .status
            .code(),
        Some(64)
    );
    let report = json(&run_on(
        &["classify", "--a", "g", "--b", "", "--json"],
        "k3.graph",
    ));
    assert_eq!(report["payload"]["k1"], 3);
    assert_eq!(report["payload"]["k2"], 4);
    assert_eq!(report["payload"]["sign"], "positive");
    assert_eq!(
        report["payload"]["contribution"],
        serde_json::json!(["0", "0", "0", "1"])
    );
}

#[test]
fn ust_reports_square_roots() {
    let report = json(&run_on(&["ust", "--json"], "k4.graph"));
    assert_eq!(report["outcome"], "pass");
    assert_eq!(report["payload"]["kind"], "square");
    let g = instances::k4();
    let model: MPolyJson = serde_json::from_value(report["payload"]["root"].clone()).unwrap();
    let root = MPoly::from_json_model(&model, &registry(&g)).unwrap();
    assert_eq!(root.to_string(), "-x_k*x_l + x_g*x_h");
}

#[test]
fn ansatz_modes() {
    for instance in Instance::ALL {
        let out = paracel(&["ansatz", "--paper", instance.name()]);
        assert_eq!(out.status.code(), Some(0), "{instance}");
        assert!(stdout(&out).starts_with("identity holds\npsd on all 11 grid points"));
    }
    let out = run_on(&["ansatz", "--search"], "k3.graph");
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(
        text.contains("identity holds") || text == "none found\n",
        "{text}"
    );

    // a decomposition that misses one diagonal term leaves a residual
    let dir = tempfile::tempdir().unwrap();
    let decomp = dir.path().join("d.json");
    std::fs::write(
        &decomp,
        r#"{"entries":[{"beta":[],"gamma":["g"],"basis":[[]],"matrix":[[["0","1"]]]}]}"#,
    )
    .unwrap();
    let out = run_on(
        &["ansatz", "--decomp", decomp.to_str().unwrap()],
        "k3.graph",
    );
    assert_eq!(out.status.code(), Some(1));
    // a negative scalar form: residual and not psd
    std::fs::write(
        &decomp,
        r#"{"entries":[{"beta":[],"gamma":[],"basis":[["g"]],"matrix":[[["-1"]]]}]}"#,
    )
    .unwrap();
    assert_eq!(
        run_on(
            &["ansatz", "--decomp", decomp.to_str().unwrap()],
            "k3.graph"
        )
        .status
        .code(),
        Some(1)
    );
    std::fs::write(&decomp, r#"{"entries":[{"beta":["e"]}]}"#).unwrap();
    assert_eq!(
        run_on(
            &["ansatz", "--decomp", decomp.to_str().unwrap()],
            "k3.graph"
        )
        .status
        .code(),
        Some(64)
    );
}

#[test]
fn fuzz_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "fuzz",
        "--vertices",
        "4",
        "--edges",
        "5",
        "--count",
        "100",
        "--seed",
        "7",
        "--json",
        "--replay-dir",
    ];
    let run = || {
        let mut a = args.to_vec();
        a.push(dir.path().to_str().unwrap());
        paracel(&a)
    };
    let (first, second) = (run(), run());
    assert_eq!(first.status.code(), Some(0));
    let strip = |out: &Output| {
        let mut v = json(out);
        v["elapsed_ms"] = Value::Null;
        v
    };
    let report = strip(&first);
    assert_eq!(report, strip(&second));
    assert_eq!(report["payload"]["passed"], 100);
    assert_eq!(report["payload"]["instances"], 100);
}

#[test]
fn fuzz_with_only_marked_edges() {
    let out = paracel(&[
        "fuzz",
        "--vertices",
        "2",
        "--edges",
        "0",
        "--count",
        "10",
        "--seed",
        "1",
        "--json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    assert_eq!(report["payload"]["passed"], 10);
    // e and f are parallel on two vertices, so M = q^2 rather than 0
    assert_eq!(report["payload"]["zero_m"], 0);
    assert_eq!(
        paracel(&[
            "fuzz",
            "--vertices",
            "1",
            "--edges",
            "0",
            "--count",
            "1",
            "--seed",
            "1"
        ])
        .status
        .code(),
        Some(64)
    );
}

#[test]
fn json_reports_round_trip() {
    let cases: [(&[&str], &str); 6] = [
        (&["mpoly", "--json"], "k4.graph"),
        (&["verify", "--json"], "k4_minus_edge.graph"),
        (&["paracels", "--table", "--json"], "k4.graph"),
        (&["ust", "--json"], "k4_minus_edge.graph"),
        (&["split", "--json"], "k4.graph"),
        (&["ansatz", "--search", "--json"], "k3.graph"),
    ];
    for (args, graph) in cases {
        let out = run_on(args, graph);
        let text = stdout(&out);
        let value: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(
            serde_json::to_string(&value).unwrap() + "\n",
            text,
            "{args:?}"
        );
    }
    let report = json(&run_on(&["mpoly", "--json"], "k4.graph"));
    let g = instances::k4();
    let model: MPolyJson = serde_json::from_value(report["payload"]["poly"].clone()).unwrap();
    let m = MPoly::from_json_model(&model, &registry(&g)).unwrap();
    assert_eq!(m, paracel_core::cluster::m_poly(&g).unwrap());
    assert_eq!(
        m.to_json(),
        serde_json::to_string(&report["payload"]["poly"]).unwrap()
    );
}
