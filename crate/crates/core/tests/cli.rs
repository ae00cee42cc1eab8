use std::path::Path;
use std::process::{Command, Output};

use detflux::cli::{run_source, Overrides, Registry, Status, SuiteError};
use detflux::geometry::{identity, linear};

fn detflux(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_detflux")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

const SMALL: &str = r#"{
  "scenarios": [
    {
      "id": "square-quadratic",
      "domain": {"name": "unit_box", "params": [2]},
      "map_plus": {"name": "quadratic"},
      "checks": ["triple", "piola", "cauchy_binet"],
      "points": 50,
      "order": 12
    },
    {
      "id": "disk-pair",
      "domain": {"name": "unit_ball", "params": [2]},
      "map_plus": {"name": "sum", "args": [
        {"name": "identity"},
        {"name": "bump", "params": [0, 0, 0.5, 0.1, 0.0]}
      ]},
      "map_minus": {"name": "identity"},
      "checks": ["theorem1", "kulpa", "krylov"]
    }
  ]
}"#;

fn strip_volatile(json: &str) -> serde_json::Value {
    let mut v: serde_json::Value = serde_json::from_str(json).unwrap();
    v.as_object_mut().unwrap().remove("volatile").expect("volatile block present");
    v
}

#[test]
fn unknown_map_is_a_validation_error_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let body = "{\"scenarios\": [\n  {\"id\": \"a\",\n   \"domain\": {\"name\": \"unit_ball\", \"params\": [2]},\n   \"map_plus\": {\"name\": \"no_such_map\"},\n   \"checks\": [\"triple\"]}\n]}";
    let file = write(dir.path(), "bad.json", body);
    let out = detflux(&["verify", &file, "--out", dir.path().join("r").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("scenarios[0].map_plus.name"), "{err}");
    assert!(err.contains("line 4"), "{err}");
    assert!(err.contains("no_such_map"), "{err}");
}

#[test]
fn nested_unknown_map_and_incompatible_check() {
    let src = r#"{"scenarios": [
        {"id": "a", "domain": {"name": "unit_box", "params": [5]},
         "map_plus": {"name": "identity"}, "checks": ["triple"]},
        {"id": "b", "domain": {"name": "unit_ball", "params": [2]},
         "map_plus": {"name": "sum", "args": [{"name": "identity"}, {"name": "bogus"}]},
         "checks": ["triple"]},
        {"id": "c", "domain": {"name": "unit_box", "params": [2]},
         "map_plus": {"name": "identity"}, "checks": ["theorem1", "no_retraction"]}
    ]}"#;
    let Err(SuiteError::Invalid(diags)) = run_source(src, &Registry::with_builtins(), &Overrides::default()) else {
        panic!("expected validation errors");
    };
    let fields: Vec<&str> = diags.iter().map(|d| d.field.as_str()).collect();
    assert!(fields.contains(&"scenarios[0].checks[0]"), "{fields:?}");
    assert!(fields.contains(&"scenarios[1].map_plus.args[1].name"), "{fields:?}");
    assert!(fields.contains(&"scenarios[2].checks[0]"), "{fields:?}");
    assert!(fields.contains(&"scenarios[2].checks[1]"), "{fields:?}");
    assert!(diags.iter().all(|d| d.line.is_some()));
}

#[test]
fn parse_errors_exit_2_with_a_line() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(dir.path(), "bad.json", "{\"scenarios\": [\n  {\"id\": 1}\n]}");
    let out = detflux(&["verify", &file, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("line 2"));
    assert_eq!(detflux(&["verify"]).status.code(), Some(2));
    assert_eq!(detflux(&["verify", "/no/such/file.json"]).status.code(), Some(2));
}

#[test]
fn empty_scenario_list_passes_with_empty_summary() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(dir.path(), "empty.json", r#"{"scenarios": []}"#);
    let out_dir = dir.path().join("out");
    let out = detflux(&["verify", &file, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(out_dir.join("summary.csv")).unwrap();
    assert_eq!(csv, "id,status,max_discrepancy,boundary_gap,order,duration_ms\n");
}

#[test]
fn reports_are_deterministic_and_summary_matches() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(dir.path(), "small.json", SMALL);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        let out = detflux(&["verify", &file, "--out", d.to_str().unwrap(), "--seed", "7"]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    }
    for id in ["square-quadratic", "disk-pair"] {
        let ra = std::fs::read_to_string(a.join(format!("{id}.json"))).unwrap();
        let rb = std::fs::read_to_string(b.join(format!("{id}.json"))).unwrap();
        let (sa, sb) = (strip_volatile(&ra), strip_volatile(&rb));
        assert_eq!(serde_json::to_string(&sa).unwrap(), serde_json::to_string(&sb).unwrap());
        assert_eq!(sa["library_version"], detflux::VERSION);
        assert_eq!(sa["seed"], 7);
        // the volatile block is the last entry, so everything before it matches byte for byte
        let cut = |s: &str| s[..s.find("\"volatile\"").unwrap()].to_string();
        assert_eq!(cut(&ra), cut(&rb));
    }
    let csv = std::fs::read_to_string(a.join("summary.csv")).unwrap();
    assert!(!csv.contains('\r'));
    let mut reader = csv::Reader::from_reader(csv.as_bytes());
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, ["id", "status", "max_discrepancy", "boundary_gap", "order", "duration_ms"]);
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(&rows[0][0], "square-quadratic");
    assert_eq!(&rows[0][4], "12");
    assert_eq!(&rows[1][1], "pass");
    assert_eq!(&rows[1][4], "32");
}

#[test]
fn every_requested_check_appears_once() {
    let reports = run_source(SMALL, &Registry::with_builtins(), &Overrides::default()).unwrap();
    let names: Vec<Vec<String>> =
        reports.iter().map(|r| r.checks.iter().map(|c| c.check.name().to_string()).collect()).collect();
    assert_eq!(names, [vec!["triple", "piola", "cauchy_binet"], vec!["theorem1", "kulpa", "krylov"]]);
    assert!(reports.iter().all(|r| r.passed()));
}

#[test]
fn filter_and_order_override() {
    let overrides = Overrides { order: Some(20), seed: None, filter: Some(glob::Pattern::new("disk-*").unwrap()) };
    let reports = run_source(SMALL, &Registry::with_builtins(), &overrides).unwrap();
    assert_eq!(reports.len(), 1);
    assert_eq!(reports[0].scenario, "disk-pair");
    assert_eq!(reports[0].order, 20);
}

#[test]
fn unexpected_violation_fails_and_exits_1() {
    let src = r#"{"scenarios": [{"id": "stretch", "domain": {"name": "unit_ball", "params": [2]},
        "map_plus": {"name": "linear", "params": [1.1, 0, 0, 1]}, "map_minus": {"name": "identity"},
        "checks": ["theorem1"]}]}"#;
    let reports = run_source(src, &Registry::with_builtins(), &Overrides::default()).unwrap();
    assert_eq!(reports[0].status, Status::Fail);
    assert_eq!(reports[0].checks[0].status, Status::HypothesisViolation);

    let dir = tempfile::tempdir().unwrap();
    let file = write(dir.path(), "s.json", src);
    assert_eq!(detflux(&["verify", &file, "--out", dir.path().to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn evaluation_errors_are_recorded_per_scenario() {
    // 64^8 nodes exceed the rule budget; the second scenario still runs.
    let src = r#"{"scenarios": [
        {"id": "huge", "domain": {"name": "unit_box", "params": [8]}, "map_plus": {"name": "identity"},
         "checks": ["piola"], "order": 64},
        {"id": "fine", "domain": {"name": "unit_box", "params": [2]}, "map_plus": {"name": "identity"},
         "checks": ["triple"]}
    ]}"#;
    let reports = run_source(src, &Registry::with_builtins(), &Overrides::default()).unwrap();
    assert_eq!(reports[0].status, Status::Error);
    assert!(reports[0].error.is_some());
    assert_eq!(reports[1].status, Status::Pass);
}

#[test]
fn list_shows_registry_sorted() {
    let out = detflux(&["list"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["unit_ball", "identity", "bump", "theorem1"] {
        assert!(text.contains(name), "{name} missing");
    }
    let maps: Vec<&str> = text
        .split("maps:\n")
        .nth(1)
        .unwrap()
        .split("checks:")
        .next()
        .unwrap()
        .lines()
        .map(|l| l.split_whitespace().next().unwrap())
        .collect();
    let mut sorted = maps.clone();
    sorted.sort();
    assert_eq!(maps, sorted);
}

#[test]
fn custom_maps_can_be_registered() {
    let mut r = Registry::with_builtins();
    r.register_map("shear", "[k]", "(x + k y, y)", |m| linear(2, vec![1.0, m.params[0], 0.0, 1.0]));
    r.register_map("same_as_identity", "[]", "x", |m| identity(m.dim()));
    assert!(r.list().contains("same_as_identity"));
    assert!(r.list().contains("shear [k]"));
    let src = r#"{"scenarios": [{"id": "s", "domain": {"name": "unit_ball", "params": [2]},
        "map_plus": {"name": "shear", "params": [0.7]}, "map_minus": {"name": "same_as_identity"},
        "checks": ["triple", "piola", "cauchy_binet"]}]}"#;
    let reports = run_source(src, &r, &Overrides::default()).unwrap();
    assert_eq!(reports[0].status, Status::Pass);
}

#[test]
fn demo_no_retraction_runs() {
    let out = detflux(&["demo", "no-retraction", "--dim", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stdout).unwrap().contains("no smooth retraction"));
    assert_eq!(detflux(&["demo", "no-retraction", "--dim", "4"]).status.code(), Some(2));
}

#[test]
fn built_in_suite_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = detflux(&["verify", "paper-core", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let csv = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    let suite: serde_json::Value = serde_json::from_str(detflux::cli::PAPER_CORE).unwrap();
    assert_eq!(csv.lines().count() - 1, suite["scenarios"].as_array().unwrap().len());
}
