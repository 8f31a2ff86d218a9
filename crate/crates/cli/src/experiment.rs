use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use anyhow::{bail, Context, Result};
use clap::Args;
use serde::Serialize;
use serde_json::Value;
use sfc_core::model::{ChainRequest, DeploymentView};
use sfc_core::simlab::{
    run_experiment, summary_rows, write_records_csv, write_summary_csv, ExperimentConfig, ExperimentMetrics,
    SolverKind,
};

use crate::read_text;

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// Experiment config; `solver` may be a single solver or a list.
    pub config: PathBuf,
    /// Comma-separated; defaults to the config's own seed.
    #[arg(long, value_delimiter = ',')]
    pub seeds: Vec<u64>,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Runs executed concurrently.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

/// One configured solver on one seed.
#[derive(Debug, Clone)]
struct Task {
    solver: SolverKind,
    cfg: ExperimentConfig,
}

fn solver_name(s: SolverKind) -> &'static str {
    match s {
        SolverKind::Kariz => "kariz",
        SolverKind::Exact => "exact",
    }
}

/// Expands a config whose `solver` is a list into one config per solver.
pub fn load_configs(text: &str) -> Result<Vec<ExperimentConfig>> {
    let value: Value = serde_json::from_str(text)?;
    let solvers = match value.get("solver") {
        Some(Value::Array(list)) if list.is_empty() => bail!("field `solver`: empty list"),
        Some(Value::Array(list)) => list.clone(),
        Some(one) => vec![one.clone()],
        None => bail!("missing field `solver`"),
    };
    let mut out: Vec<ExperimentConfig> = Vec::with_capacity(solvers.len());
    for s in solvers {
        let mut v = value.clone();
        v["solver"] = s;
        let cfg: ExperimentConfig = serde_json::from_value(v).context("invalid experiment config")?;
        if out.iter().any(|c| c.solver == cfg.solver) {
            bail!("field `solver`: {} listed twice", solver_name(cfg.solver));
        }
        cfg.validate().context("invalid experiment config")?;
        out.push(cfg);
    }
    Ok(out)
}

#[derive(Serialize)]
struct PlacementLine<'a> {
    id: usize,
    request: &'a ChainRequest,
    deployment: &'a DeploymentView,
}

fn stem(solver: SolverKind, seed: u64) -> String {
    format!("{}_seed{seed}", solver_name(solver))
}

fn write_seed(dir: &Path, solver: SolverKind, seed: u64, m: &ExperimentMetrics) -> Result<()> {
    let stem = stem(solver, seed);
    let open = |name: String| {
        let path = dir.join(name);
        fs::File::create(&path).with_context(|| format!("cannot write {}", path.display()))
    };
    write_records_csv(&m.records, open(format!("{stem}.csv"))?)?;
    write_summary_csv(&m.summary, open(format!("{stem}_summary.csv"))?)?;
    let mut lines = String::new();
    for r in &m.records {
        if let Some(d) = &r.deployment {
            let line = PlacementLine { id: r.id, request: &r.request, deployment: d };
            lines.push_str(&serde_json::to_string(&line)?);
            lines.push('\n');
        }
    }
    fs::write(dir.join(format!("{stem}_placements.jsonl")), lines)?;
    Ok(())
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn ratio(a: f64, b: f64) -> String {
    if b == 0.0 {
        String::new()
    } else {
        (a / b).to_string()
    }
}

/// Per-solver metric values in seed order.
type Columns = BTreeMap<String, Vec<f64>>;

fn write_aggregate(dir: &Path, per_solver: &[(SolverKind, Columns)]) -> Result<()> {
    let mut w = csv::Writer::from_path(dir.join("aggregate.csv"))?;
    w.write_record(["solver", "metric", "seeds", "mean"])?;
    for (solver, cols) in per_solver {
        for (metric, xs) in cols {
            w.write_record([solver_name(*solver), metric, &xs.len().to_string(), &mean(xs).to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Kariz over exact, per seed and for the seed means.
fn write_comparison(dir: &Path, seeds: &[u64], kariz: &Columns, exact: &Columns) -> Result<()> {
    let mut w = csv::Writer::from_path(dir.join("comparison.csv"))?;
    w.write_record(["seed", "metric", "kariz", "exact", "ratio"])?;
    for (metric, k) in kariz {
        let Some(e) = exact.get(metric) else { continue };
        for (i, seed) in seeds.iter().enumerate() {
            w.write_record([&seed.to_string(), metric, &k[i].to_string(), &e[i].to_string(), &ratio(k[i], e[i])])?;
        }
        let (mk, me) = (mean(k), mean(e));
        w.write_record(["mean", metric, &mk.to_string(), &me.to_string(), &ratio(mk, me)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn run(args: &ExperimentArgs) -> Result<()> {
    if args.jobs == 0 {
        bail!("--jobs must be at least 1");
    }
    let configs = load_configs(&read_text(&args.config)?).with_context(|| format!("{}", args.config.display()))?;
    let seeds = if args.seeds.is_empty() { vec![configs[0].seed] } else { args.seeds.clone() };
    let mut seen = seeds.clone();
    seen.sort_unstable();
    seen.dedup();
    if seen.len() != seeds.len() {
        bail!("--seeds: duplicate seed");
    }
    fs::create_dir_all(&args.out_dir).with_context(|| format!("cannot create {}", args.out_dir.display()))?;

    let tasks: Vec<Task> = configs
        .iter()
        .flat_map(|c| seeds.iter().map(move |&seed| Task { solver: c.solver, cfg: ExperimentConfig { seed, ..c.clone() } }))
        .collect();
    let results: Vec<Mutex<Option<Result<ExperimentMetrics, String>>>> = tasks.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    thread::scope(|s| {
        for _ in 0..args.jobs.min(tasks.len()) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(task) = tasks.get(i) else { break };
                let r = run_experiment(&task.cfg).map_err(|e| e.to_string());
                *results[i].lock().expect("no poisoned lock") = Some(r);
            });
        }
    });

    let mut failures = Vec::new();
    let mut per_solver: Vec<(SolverKind, Columns)> = configs.iter().map(|c| (c.solver, Columns::new())).collect();
    for (task, slot) in tasks.iter().zip(results) {
        let result = slot.into_inner().expect("no poisoned lock").expect("every task ran");
        match result {
            Ok(m) => {
                if !m.conserved {
                    failures.push(format!("{}: resource accounting drifted", stem(task.solver, task.cfg.seed)));
                }
                write_seed(&args.out_dir, task.solver, task.cfg.seed, &m)?;
                let cols = &mut per_solver.iter_mut().find(|(s, _)| *s == task.solver).expect("configured").1;
                for (metric, v) in summary_rows(&m.summary) {
                    cols.entry(metric).or_default().push(v);
                }
            }
            Err(e) => failures.push(format!("{}: {e}", stem(task.solver, task.cfg.seed))),
        }
    }
    let marker = args.out_dir.join("FAILED");
    if !failures.is_empty() {
        let text = failures.join("\n") + "\n";
        fs::write(&marker, &text).with_context(|| format!("cannot write {}", marker.display()))?;
        bail!("{} run(s) failed, outputs are partial:\n{}", failures.len(), text.trim_end());
    }
    if marker.exists() {
        fs::remove_file(&marker)?;
    }
    write_aggregate(&args.out_dir, &per_solver)?;
    let column = |kind| per_solver.iter().find(|(s, _)| *s == kind).map(|(_, c)| c);
    if let (Some(k), Some(e)) = (column(SolverKind::Kariz), column(SolverKind::Exact)) {
        write_comparison(&args.out_dir, &seeds, k, e)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solver_list_expands() {
        let cfgs = load_configs(r#"{"topology": {"fat_tree": {"k": 4}}, "demand": 100, "solver": ["kariz", "exact"]}"#)
            .unwrap();
        assert_eq!(cfgs.len(), 2);
        assert_eq!((cfgs[0].solver, cfgs[1].solver), (SolverKind::Kariz, SolverKind::Exact));
    }

    #[test]
    fn bad_configs_name_the_problem() {
        let e = load_configs(r#"{"topology": {"fat_tree": {"k": 4}}, "demand": 100}"#).unwrap_err();
        assert!(e.to_string().contains("solver"));
        let e = load_configs("{\n \"demand\": 100,,\n}").unwrap_err();
        assert!(e.to_string().contains("line 2"), "{e}");
        let e = load_configs(r#"{"topology": {"fat_tree": {"k": 4}}, "demand": 100, "solver": "kariz", "colour": 1}"#)
            .unwrap_err();
        assert!(format!("{e:#}").contains("colour"), "{e:#}");
    }
}
