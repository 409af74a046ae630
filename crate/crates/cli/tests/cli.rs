use std::fs;
use std::path::Path;
use std::process::Command;

use softmapper_cli::export::GraphDocument;

fn softmapper(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_softmapper"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn read(path: &Path) -> String {
    fs::read_to_string(path).unwrap()
}

#[test]
fn circle_build_has_one_loop() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let status = softmapper(&[
        "build",
        "--synthetic",
        "circle",
        "--n",
        "200",
        "--noise",
        "0",
        "--filter",
        "axis:1",
        "--scheme",
        "standard",
        "--threshold",
        "0.5",
        "-o",
        out.to_str().unwrap(),
    ]);
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let doc = GraphDocument::from_json(&read(&out.join("mapper.json"))).unwrap();
    let (graph, _) = doc.to_graph().unwrap();
    assert_eq!(graph.betti_1(), 1);
    assert!(read(&out.join("diagram.csv")).lines().any(|l| l.starts_with("Ext1,")));
    assert!(read(&out.join("mapper.dot")).starts_with("graph mapper {"));
}

#[test]
fn same_config_gives_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.json");
    fs::write(
        &config,
        r#"{"synthetic": "cylinder", "n": 300, "seed": 5, "resolution": 6}"#,
    )
    .unwrap();
    for name in ["a", "b"] {
        let out = dir.path().join(name);
        let run = softmapper(&[
            "build",
            "--config",
            config.to_str().unwrap(),
            "-o",
            out.to_str().unwrap(),
        ]);
        assert!(run.status.success());
    }
    for file in ["mapper.json", "mapper.dot", "diagram.csv", "summary.json"] {
        assert_eq!(
            read(&dir.path().join("a").join(file)),
            read(&dir.path().join("b").join(file)),
            "{file}"
        );
    }
}

#[test]
fn empty_point_cloud_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("empty.csv");
    fs::write(&input, "").unwrap();
    let run = softmapper(&["build", "--input", input.to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(1));
    assert!(!run.stderr.is_empty());
}

#[test]
fn unknown_flag_and_bad_values_exit_with_one() {
    assert_eq!(softmapper(&["build", "--bogus"]).status.code(), Some(1));
    assert_eq!(
        softmapper(&["build", "--synthetic", "circle", "--gain", "2"]).status.code(),
        Some(1)
    );
    assert_eq!(softmapper(&["--help"]).status.code(), Some(0));
}

#[test]
fn fixed_filter_has_nothing_to_optimize() {
    let dir = tempfile::tempdir().unwrap();
    let run = softmapper(&[
        "optimize",
        "--synthetic",
        "circle",
        "--filter",
        "axis:0",
        "-o",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(run.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&run.stderr).contains("nothing to optimize"));
}

#[test]
fn zero_step_keeps_theta() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("opt");
    let run = softmapper(&[
        "optimize",
        "--synthetic",
        "y_shape",
        "--n",
        "120",
        "--epochs",
        "1",
        "--lr",
        "0",
        "--theta",
        "0.3,-0.2,0.9",
        "-o",
        out.to_str().unwrap(),
    ]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let theta: serde_json::Value = serde_json::from_str(&read(&out.join("theta_final.json"))).unwrap();
    assert_eq!(theta["theta"], serde_json::json!([0.3, -0.2, 0.9]));
    assert_eq!(read(&out.join("trace.csv")).lines().count(), 2);
    for sub in ["initial", "final"] {
        assert!(out.join(sub).join("mapper.json").exists());
    }
    let summary: serde_json::Value = serde_json::from_str(&read(&out.join("summary.json"))).unwrap();
    assert_eq!(summary["seed"], 0);
    assert!(summary["config_hash"].as_str().unwrap().len() == 16);
    assert!(summary["correlation"].as_f64().is_some());
}

#[test]
fn synth_then_build_from_file_then_export() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let run = softmapper(&["synth", "--synthetic", "plane_with_leg", "--n", "400", "-o", d]);
    assert!(run.status.success());
    let points = dir.path().join("points.csv");
    assert_eq!(read(&points).lines().count(), 400);

    let built = dir.path().join("built");
    let run = softmapper(&[
        "build",
        "--input",
        points.to_str().unwrap(),
        "--threshold",
        "0.3",
        "-o",
        built.to_str().unwrap(),
    ]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));

    let exported = dir.path().join("exported");
    let run = softmapper(&[
        "export",
        "--graph",
        built.join("mapper.json").to_str().unwrap(),
        "-o",
        exported.to_str().unwrap(),
    ]);
    assert!(run.status.success());
    assert_eq!(read(&exported.join("mapper.dot")), read(&built.join("mapper.dot")));
    assert_eq!(softmapper(&["export"]).status.code(), Some(1));
}
