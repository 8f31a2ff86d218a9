use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, ValueEnum};
use serde::Serialize;
use sfc_core::kariz::{deploy_problem, KarizConfig};
use sfc_core::linprog::{solve_problem, LinprogError, MilpStatus, SolveLimits};
use sfc_core::model::{
    check_deployment, ChainRequest, ConstraintReport, CostBreakdown, CostModel, Deployment, DeploymentView, Problem,
    SubstrateNetwork, VnfCatalog,
};

use crate::{emit, read_text, Verdict};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Solver {
    Kariz,
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    pub network: PathBuf,
    pub catalog: PathBuf,
    pub request: PathBuf,
    #[arg(long, value_enum, default_value = "kariz")]
    pub solver: Solver,
    /// Kariz admissibility parameter.
    #[arg(long, default_value_t = 20.0)]
    pub epsilon: f64,
    /// Cost weights `{alpha: {kind: weight}, beta}`; defaults to one per
    /// core and 0.01 per Mbps-hop.
    #[arg(long)]
    pub cost: Option<PathBuf>,
    /// Branch-and-bound node budget for the exact solver.
    #[arg(long)]
    pub node_limit: Option<usize>,
    /// Defaults to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Debug, Serialize)]
pub struct SolveReport {
    pub solver: Solver,
    pub accepted: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cost: Option<CostBreakdown>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub deployment: Option<DeploymentView>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub feasibility: Option<ConstraintReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<ExactStats>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kariz: Option<KarizStats>,
}

#[derive(Debug, Serialize)]
pub struct ExactStats {
    pub status: MilpStatus,
    pub bound: f64,
    pub relaxation: f64,
    pub nodes: usize,
}

#[derive(Debug, Serialize)]
pub struct KarizStats {
    pub epsilon: f64,
    pub rounds: usize,
    pub actions: usize,
}

fn load<T>(path: &Path, parse: impl FnOnce(&str) -> Result<T, sfc_core::InputError>) -> Result<T> {
    let text = read_text(path)?;
    parse(&text).with_context(|| format!("invalid {}", path.display()))
}

pub fn run(args: &SolveArgs) -> Result<Verdict> {
    let cfg = KarizConfig::with_epsilon(args.epsilon);
    cfg.validate().context("--epsilon")?;
    let net = load(&args.network, SubstrateNetwork::from_json)?;
    let cat = load(&args.catalog, VnfCatalog::from_json)?;
    let req = load(&args.request, ChainRequest::from_json)?;
    let cost = match &args.cost {
        Some(path) => load(path, |t| Ok(serde_json::from_str::<CostModel>(t)?))?,
        None => CostModel::default(),
    };
    let problem = Problem::new(&net, &req, &cat, &cost).context("request does not fit the network and catalog")?;

    let mut report = SolveReport {
        solver: args.solver,
        accepted: false,
        reason: None,
        cost: None,
        deployment: None,
        feasibility: None,
        exact: None,
        kariz: None,
    };
    let placed: Option<Deployment> = match args.solver {
        Solver::Kariz => {
            let run = deploy_problem(&problem, &cfg);
            report.kariz = Some(KarizStats {
                epsilon: args.epsilon,
                rounds: run.logs.len(),
                actions: run.logs.iter().map(|l| l.actions.len()).sum(),
            });
            match run.result {
                Ok(acc) => Some(acc.deployment),
                Err(rej) => {
                    report.reason = Some(rej.to_string());
                    None
                }
            }
        }
        Solver::Exact => {
            let limits = SolveLimits { nodes: args.node_limit, ..SolveLimits::default() };
            let result = match solve_problem(&problem, limits) {
                Ok(r) => r,
                Err(LinprogError::Input(e)) => return Err(e).context("invalid request"),
                Err(e) => return Err(e).context("exact solver failed"),
            };
            report.exact = Some(ExactStats {
                status: result.status,
                bound: result.bound,
                relaxation: result.relaxation,
                nodes: result.nodes,
            });
            if result.deployment.is_none() {
                report.reason = Some(format!("{:?}", result.status));
            }
            result.deployment
        }
    };
    if let Some(dep) = &placed {
        let check = check_deployment(&net, &problem.chain, dep)?;
        report.accepted = check.is_feasible();
        if !report.accepted {
            report.reason = Some(format!("infeasible deployment: {:?}", check.failed_families()));
        }
        report.cost = Some(problem.cost_of(dep));
        report.deployment = Some(dep.describe(&net, &problem.chain));
        report.feasibility = Some(check);
    }

    let bytes = match args.format {
        Format::Json => {
            let mut text = serde_json::to_string_pretty(&report)?;
            text.push('\n');
            text.into_bytes()
        }
        Format::Csv => report_csv(&report)?,
    };
    emit(args.out.as_deref(), &bytes)?;
    Ok(if report.accepted { Verdict::Accepted } else { Verdict::Rejected })
}

/// Flat form: one `record,stage,name,node,peer,value` row per flow,
/// instance count, allocation and cost component.
fn report_csv(r: &SolveReport) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["record", "stage", "name", "node", "peer", "value"])?;
    let verdict = if r.accepted { "accepted" } else { "rejected" };
    w.write_record(["status", "", verdict, "", "", r.reason.as_deref().unwrap_or("")])?;
    if let Some(c) = &r.cost {
        for (name, v) in [("bandwidth", c.bandwidth), ("host", c.host), ("total", c.total)] {
            w.write_record(["cost", "", name, "", "", &v.to_string()])?;
        }
    }
    if let Some(d) = &r.deployment {
        for f in &d.flows {
            w.write_record(["flow", &f.stage.to_string(), &f.commodity, &f.from, &f.to, &f.mbps.to_string()])?;
        }
        for i in &d.instances {
            w.write_record(["instance", &i.stage.to_string(), &i.vnf, &i.node, "", &i.count.to_string()])?;
        }
        for a in &d.allocations {
            w.write_record(["allocation", &a.stage.to_string(), &a.sf, &a.node, "", &a.mbps.to_string()])?;
        }
    }
    Ok(w.into_inner().map_err(|e| e.into_error())?)
}
