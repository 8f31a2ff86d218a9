use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use sfc_core::model::{check_deployment, ChainRequest, DeploymentView, Problem, SubstrateNetwork};
use sfc_core::simlab::{default_catalog, TopologySpec};
use sfc_core::CostModel;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn sfc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sfc")).args(args).output().expect("binary runs")
}

fn solve(request: &str, solver: &str) -> (i32, Value) {
    let net = fixture("network.json");
    let cat = fixture("catalog.json");
    let req = fixture(request);
    let out = sfc(&[
        "solve",
        net.to_str().unwrap(),
        cat.to_str().unwrap(),
        req.to_str().unwrap(),
        "--solver",
        solver,
    ]);
    let code = out.status.code().unwrap();
    let report = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (code, report)
}

fn stage_totals(report: &Value) -> BTreeMap<String, u64> {
    let mut by_sf = BTreeMap::new();
    for a in report["deployment"]["allocations"].as_array().unwrap() {
        *by_sf.entry(a["sf"].as_str().unwrap().to_string()).or_default() += a["mbps"].as_u64().unwrap();
    }
    by_sf
}

#[test]
fn exact_accepts_the_worked_example() {
    let (code, report) = solve("request.json", "exact");
    assert_eq!(code, 0);
    assert_eq!(report["accepted"], true);
    let totals = stage_totals(&report);
    assert_eq!(totals.len(), 2);
    assert!(totals.values().all(|&t| t == 210), "{totals:?}");
    let families = report["feasibility"]["families"].as_array().unwrap();
    assert_eq!(families.len(), 6);
    assert!(families.iter().all(|f| f["violations"].as_array().unwrap().is_empty()));
}

#[test]
fn kariz_never_beats_exact() {
    let (k_code, kariz) = solve("request.json", "kariz");
    let (e_code, exact) = solve("request.json", "exact");
    assert_eq!((k_code, e_code), (0, 0));
    assert!(stage_totals(&kariz).values().all(|&t| t == 210));
    let total = |r: &Value| r["cost"]["total"].as_f64().unwrap();
    assert!(total(&kariz) >= total(&exact) - 1e-9);
}

#[test]
fn demand_beyond_source_links_exits_two() {
    // Two 130 Mbps links leave A.
    for solver in ["exact", "kariz"] {
        let (code, report) = solve("request_oversized.json", solver);
        assert_eq!(code, 2, "{solver}");
        assert_eq!(report["accepted"], false);
        assert!(report["reason"].is_string());
    }
}

#[test]
fn malformed_input_exits_one_with_position() {
    let net = fixture("network.json");
    let cat = fixture("catalog.json");
    let req = fixture("request_malformed.json");
    let out = sfc(&["solve", net.to_str().unwrap(), cat.to_str().unwrap(), req.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("request_malformed.json") && err.contains("line 5"), "{err}");
}

#[test]
fn unknown_field_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("req.json");
    fs::write(&bad, r#"{"sfs": ["IDS"], "source": "A", "target": "F", "mbps": 10, "bandwith": 3}"#).unwrap();
    let out = sfc(&[
        "solve",
        fixture("network.json").to_str().unwrap(),
        fixture("catalog.json").to_str().unwrap(),
        bad.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bandwith"));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(sfc(&["solve"]).status.code(), Some(1));
    assert_eq!(sfc(&["frobnicate"]).status.code(), Some(1));
    let out = sfc(&[
        "solve",
        fixture("network.json").to_str().unwrap(),
        fixture("catalog.json").to_str().unwrap(),
        fixture("request.json").to_str().unwrap(),
        "--epsilon",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(sfc(&["solve", "/nonexistent/a", "/nonexistent/b", "/nonexistent/c"]).status.code(), Some(1));
}

#[test]
fn csv_format_lists_costs_and_allocations() {
    let out = sfc(&[
        "solve",
        fixture("network.json").to_str().unwrap(),
        fixture("catalog.json").to_str().unwrap(),
        fixture("request.json").to_str().unwrap(),
        "--solver",
        "exact",
        "--format",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut rows = csv::Reader::from_reader(text.as_bytes());
    let mut alloc = 0;
    let mut total = None;
    for r in rows.records() {
        let r = r.unwrap();
        match &r[0] {
            "allocation" => alloc += r[5].parse::<u64>().unwrap(),
            "cost" if &r[2] == "total" => total = Some(r[5].to_string()),
            _ => {}
        }
    }
    assert_eq!(alloc, 420);
    assert_eq!(total.as_deref(), Some("11.00"));
}

#[test]
fn topology_writes_the_fat_tree() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("k6.json");
    let out = sfc(&["topology", "--k", "6", "--out", out_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let net = SubstrateNetwork::from_json(&fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!((net.node_count(), net.link_count()), (99, 162));
    assert_eq!(sfc(&["topology", "--k", "5"]).status.code(), Some(1));
}

fn run_experiment(out_dir: &Path, seeds: &str, jobs: &str) -> Output {
    sfc(&[
        "experiment",
        fixture("experiment.json").to_str().unwrap(),
        "--seeds",
        seeds,
        "--out-dir",
        out_dir.to_str().unwrap(),
        "--jobs",
        jobs,
    ])
}

fn dir_contents(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect()
}

#[test]
fn experiment_outputs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let out = run_experiment(a.path(), "3,4", "1");
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(run_experiment(b.path(), "3,4", "2").status.code(), Some(0));
    let (ca, cb) = (dir_contents(a.path()), dir_contents(b.path()));
    assert_eq!(ca, cb);
    for name in ["aggregate.csv", "comparison.csv", "kariz_seed3.csv", "exact_seed4_summary.csv"] {
        assert!(ca.contains_key(name), "{name} missing");
    }
    // Four runs, three files each, plus the aggregate and comparison.
    assert_eq!(ca.len(), 14);
    let cmp = String::from_utf8(ca["comparison.csv"].clone()).unwrap();
    assert!(cmp.lines().any(|l| l.starts_with("mean,acceptance_ratio,")));
}

#[test]
fn experiment_rows_replay() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run_experiment(dir.path(), "9", "1").status.code(), Some(0));
    let net = TopologySpec::FatTree { k: 4, host_cores: 8, link_mbps: 1000 }.build().unwrap();
    let cat = default_catalog();
    for solver in ["kariz", "exact"] {
        let mut totals = BTreeMap::new();
        let mut rows = csv::Reader::from_path(dir.path().join(format!("{solver}_seed9.csv"))).unwrap();
        let headers = rows.headers().unwrap().clone();
        let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
        let (id, accepted, total) = (col("id"), col("accepted"), col("total_cost"));
        for r in rows.records() {
            let r = r.unwrap();
            if &r[accepted] == "true" {
                totals.insert(r[id].parse::<u64>().unwrap(), r[total].parse::<f64>().unwrap());
            }
        }
        let lines = fs::read_to_string(dir.path().join(format!("{solver}_seed9_placements.jsonl"))).unwrap();
        let mut replayed = 0;
        for line in lines.lines() {
            let v: Value = serde_json::from_str(line).unwrap();
            let req: ChainRequest = serde_json::from_value(v["request"].clone()).unwrap();
            let view: DeploymentView = serde_json::from_value(v["deployment"].clone()).unwrap();
            let p = Problem::new(&net, &req, &cat, &CostModel::default()).unwrap();
            let dep = view.to_deployment(&net, &p.chain).unwrap();
            assert!(check_deployment(&net, &p.chain, &dep).unwrap().is_feasible());
            assert_eq!(p.cost_of(&dep).total.as_f64(), totals[&req.id]);
            replayed += 1;
        }
        assert_eq!(replayed, totals.len());
        assert!(replayed > 0);
    }
}

#[test]
fn failed_seed_flags_partial_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"topology": {"network_file": "/nonexistent/net.json"}, "demand": 100, "solver": "kariz"}"#)
        .unwrap();
    let out_dir = dir.path().join("out");
    let out = sfc(&["experiment", cfg.to_str().unwrap(), "--seeds", "1", "--out-dir", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(out_dir.join("FAILED").exists());
    assert!(!out_dir.join("aggregate.csv").exists());
}
