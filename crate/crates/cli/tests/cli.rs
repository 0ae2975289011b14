use std::path::Path;
use std::process::{Command, Output};

use netred_cli::schema::{NetworkFile, ReportFile};
use serde_json::Value;

fn netred(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_netred")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn write_example(dir: &Path, name: &str, seed: u64) -> std::path::PathBuf {
    let out = netred(&["example", name, "--seed", &seed.to_string()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let path = dir.join(format!("{name}-{seed}.json"));
    std::fs::write(&path, stdout(&out)).unwrap();
    path
}

fn write_json(dir: &Path, name: &str, v: &Value) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string(v).unwrap()).unwrap();
    path
}

fn analyze(path: &Path, extra: &[&str]) -> ReportFile {
    let mut args = vec!["analyze", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    let out = netred(&args);
    assert!(out.status.success(), "exit {:?}: {}", out.status.code(), stderr(&out));
    serde_json::from_str(&stdout(&out)).expect("report parses")
}

fn value<T: Copy + std::fmt::Debug>(e: &netred::bounds::Entry<T>) -> T {
    *e.value().unwrap_or_else(|| panic!("absent: {e:?}"))
}

#[test]
fn path_example_closest_aep_laplacian() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_example(dir.path(), "paper-section7", 0);
    let report = analyze(&path, &["--triangle"]);
    assert!(!report.aep);
    let l_aep = report.l_aep.as_ref().expect("non-AEP report carries L_AEP");
    let printed = [
        [11. / 9., -7. / 9., -1. / 9., 0., -1. / 3.],
        [-7. / 9., 20. / 9., -10. / 9., 0., -1. / 3.],
        [-1. / 9., -10. / 9., 14. / 9., -1. / 2., 1. / 6.],
        [0., 0., -1. / 2., 3. / 2., -1.],
        [-1. / 3., -1. / 3., 1. / 6., -1., 3. / 2.],
    ];
    for (row, expected) in l_aep.matrix.iter().zip(printed) {
        for (got, want) in row.iter().zip(expected) {
            assert!((got - want).abs() <= 1e-12, "{got} vs {want}");
        }
    }
    assert!(l_aep.has_negative_weights);

    let b = &report.bounds;
    let tri_h2 = b.triangle_h2.value().unwrap();
    let tri_hinf = b.triangle_hinf.value().unwrap();
    assert!(tri_h2.total >= b.true_h2_error.value().unwrap().value);
    assert!(tri_hinf.total >= b.true_hinf_error.value().unwrap().value);
    assert_eq!(b.abs_h2_bound.value(), None);
}

#[test]
fn triangle_example_is_aep_and_bounds_hold() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_example(dir.path(), "k3-aep", 0);
    let report = analyze(&path, &["--oracle-check"]);
    assert!(report.aep);
    assert!(report.l_aep.is_none());
    let b = &report.bounds;
    // Single leader alone in its cell: nothing is lost.
    assert_eq!(value(&b.abs_h2_bound), 0.0);
    assert!(b.true_h2_error.value().unwrap().value <= 1e-10);
    assert!(value(&b.exact_hinf_error) <= 1e-12);
    assert!(b.triangle_h2.value().is_none());
    let lam = &report.eigenvalues.laplacian;
    for mu in &report.eigenvalues.reduced {
        assert!(lam.iter().any(|l| (l - mu).abs() < 1e-9), "{mu} not in {lam:?}");
    }
    assert!(report.oracle.as_ref().unwrap().all_pass);
}

#[test]
fn random_aep_report_bounds_hold() {
    let dir = tempfile::tempdir().unwrap();
    for seed in 0..5 {
        let path = write_example(dir.path(), "random-aep", seed);
        let report = analyze(&path, &[]);
        assert!(report.aep);
        let b = &report.bounds;
        assert!(b.true_h2_error.value().unwrap().value <= value(&b.abs_h2_bound) * (1.0 + 1e-7) + 1e-12);
        let exact = value(&b.exact_hinf_error);
        assert!((b.true_hinf_error.value().unwrap().value - exact).abs() <= 1e-5 * exact + 1e-10);
    }
}

#[test]
fn overlapping_partition_names_the_node() {
    let dir = tempfile::tempdir().unwrap();
    let file = serde_json::json!({
        "n_nodes": 3,
        "edges": [[1, 2, 1.0], [2, 3, 1.0]],
        "leaders": [1],
        "partition": [[1, 2], [2, 3]],
    });
    let out = netred(&["analyze", write_json(dir.path(), "overlap.json", &file).to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let msg = stderr(&out);
    assert!(msg.contains("node 2") && msg.contains("cells 1 and 2"), "{msg}");
}

#[test]
fn validation_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        (serde_json::json!({"n_nodes": 3, "edges": [[1, 4, 1.0]], "partition": [[1, 2, 3]]}), "edges[1]"),
        (serde_json::json!({"n_nodes": 2, "edges": [[1, 2, -1.0]], "partition": [[1, 2]]}), "weight"),
        (serde_json::json!({"n_nodes": 2, "edges": [[1, 2, 1.0]], "leaders": [3], "partition": [[1, 2]]}), "leaders[1]"),
        (serde_json::json!({"n_nodes": 3, "edges": [[1, 2, 1.0], [2, 3, 1.0]], "partition": [[1, 2]]}), "node 3 is not in any cell"),
        (
            serde_json::json!({"n_nodes": 2, "edges": [[1, 2, 1.0]], "partition": [[1, 2]],
                "agent": {"A": [[0.0, 1.0]], "B": [[1.0]], "E": [[1.0]]}}),
            "agent.A",
        ),
        (serde_json::json!({"n_nodes": 2, "edges": [[1, 2, 1.0]], "partition": [[1, 2]], "extra": 1}), "unknown field"),
    ];
    for (k, (file, needle)) in cases.iter().enumerate() {
        let path = write_json(dir.path(), &format!("bad{k}.json"), file);
        let out = netred(&["analyze", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(2), "case {k}: {}", stderr(&out));
        assert!(stderr(&out).contains(needle), "case {k}: {}", stderr(&out));
    }
    assert_eq!(netred(&["example", "no-such-example"]).status.code(), Some(2));
    let path = write_example(dir.path(), "k3-aep", 0);
    assert_eq!(netred(&["analyze", path.to_str().unwrap(), "--norms", "h3"]).status.code(), Some(2));
    assert_eq!(netred(&["analyze", path.to_str().unwrap(), "--h2-engine", "sweep"]).status.code(), Some(2));
}

#[test]
fn precondition_refusals_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_example(dir.path(), "paper-section7", 0);
    let out = netred(&["analyze", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("--triangle"));

    let general = write_example(dir.path(), "random-general", 3);
    assert_eq!(netred(&["analyze", general.to_str().unwrap()]).status.code(), Some(3));

    let disconnected = serde_json::json!({"n_nodes": 3, "edges": [[1, 2, 1.0]], "partition": [[1], [2], [3]]});
    let out = netred(&["analyze", write_json(dir.path(), "disc.json", &disconnected).to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("disconnected"));

    let unsynchronized = serde_json::json!({"n_nodes": 2, "edges": [[1, 2, 1.0]], "partition": [[1], [2]],
        "agent": {"A": [[3.0]], "B": [[1.0]], "E": [[1.0]]}});
    let out = netred(&["analyze", write_json(dir.path(), "unsync.json", &unsynchronized).to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn report_round_trips_through_json() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_example(dir.path(), "random-general", 1);
    let report = analyze(&path, &["--triangle", "--oracle-check"]);
    let text = serde_json::to_string(&report).unwrap();
    let back: ReportFile = serde_json::from_str(&text).unwrap();
    assert_eq!(back, report);
    assert_eq!(report.schema_version, "1.0");

    let input: NetworkFile = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(report.input, input);
}

#[test]
fn out_flag_writes_file_and_norms_filter() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_example(dir.path(), "random-aep", 2);
    let target = dir.path().join("report.json");
    let out = netred(&["analyze", path.to_str().unwrap(), "--norms", "h2", "--out", target.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let report: ReportFile = serde_json::from_str(&std::fs::read_to_string(&target).unwrap()).unwrap();
    assert!(report.bounds.abs_h2_bound.is_present());
    match &report.bounds.abs_hinf_bound {
        netred::bounds::Entry::Absent(a) => assert_eq!(a.code, "not_requested"),
        other => panic!("expected absent, got {other:?}"),
    }
}

#[test]
fn output_is_deterministic() {
    for name in ["random-aep", "random-general"] {
        let a = netred(&["example", name, "--seed", "11"]);
        let b = netred(&["example", name, "--seed", "11"]);
        let c = netred(&["example", name, "--seed", "12"]);
        assert_eq!(a.stdout, b.stdout);
        assert_ne!(a.stdout, c.stdout);
    }
    let dir = tempfile::tempdir().unwrap();
    let path = write_example(dir.path(), "random-general", 11);
    let strip = |r: ReportFile| {
        let mut v = serde_json::to_value(r).unwrap();
        v.as_object_mut().unwrap().remove("timings_ms");
        serde_json::to_string(&v).unwrap()
    };
    let first = strip(analyze(&path, &["--triangle"]));
    let second = strip(analyze(&path, &["--triangle"]));
    assert_eq!(first, second);
}
