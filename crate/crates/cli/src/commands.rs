use std::fmt::Write as _;
use std::path::Path;

use riskroute::analysis::{
    max_shortest_path_oracle, pra_report, shortest_path_length, AnalysisError, PraReport, CSV_HEADER,
};
use riskroute::instances::generate as generate_family;
use riskroute::io::{read_instance, write_instance};
use riskroute::network::Instance;
use riskroute::solver::{solve_equilibrium, Objective, SolveError};
use riskroute::sp::sp_decompose;
use serde_json::json;

use crate::args::{AnalyzeArgs, GenerateArgs, Mode, ModelArg, OracleArgs, SolveArgs};
use crate::{write_output, CliError};

pub fn load_instance(path: &Path, model: Option<ModelArg>) -> Result<Instance, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    let inst = read_instance(&bytes).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    Ok(match model {
        Some(m) => inst.with_risk_model(m.into()),
        None => inst,
    })
}

pub(crate) fn solve_error(e: SolveError) -> CliError {
    CliError::Input(e.to_string())
}

pub(crate) fn analysis_error(e: AnalysisError) -> CliError {
    match e {
        AnalysisError::NotConverged { .. } => CliError::NotConverged(e.to_string()),
        AnalysisError::Alternating(_) => CliError::BoundFailure(e.to_string()),
        _ => CliError::Input(e.to_string()),
    }
}

pub fn solve(args: &SolveArgs) -> Result<(), CliError> {
    let inst = load_instance(&args.instance, args.risk_model)?;
    let objective = match args.mode {
        Mode::Rnwe => Objective::RiskNeutral,
        Mode::Rawe => Objective::risk_averse(inst.risk_model),
    };
    let res = solve_equilibrium(&inst, objective, &args.solver.options()).map_err(solve_error)?;
    let net = &inst.network;
    let cost = inst.social_cost(&res.flow.edge_flow);

    let mut out = String::new();
    let _ = writeln!(out, "instance      {}", inst.name);
    let _ = writeln!(out, "objective     {objective}");
    let _ = writeln!(out, "converged     {}", res.converged);
    let gap_kind = if res.gap_is_absolute { " (absolute)" } else { "" };
    let _ = writeln!(out, "relative gap  {:e}{gap_kind}", res.relative_gap);
    let _ = writeln!(out, "iterations    {}", res.iterations);
    let _ = writeln!(out, "social cost   {cost}");
    let _ = writeln!(out, "paths");
    let mut paths = Vec::new();
    for (p, &f) in res.flow.paths.iter().zip(&res.flow.path_flow) {
        let ids = net.path_ids(p);
        let q = objective.path_cost(&inst, &res.flow.edge_flow, p);
        let _ = writeln!(out, "  {:<24} flow {f:<22} cost {q}", ids.join(","));
        paths.push(json!({ "edges": ids, "flow": f, "cost": q }));
    }
    print!("{out}");

    if let Some(path) = &args.out {
        let edge_flow: serde_json::Map<String, serde_json::Value> = net
            .edges()
            .iter()
            .zip(&res.flow.edge_flow)
            .map(|(e, &f)| (e.id.clone(), json!(f)))
            .collect();
        let doc = json!({
            "instance": inst.name,
            "objective": objective,
            "converged": res.converged,
            "relative_gap": res.relative_gap,
            "gap_is_absolute": res.gap_is_absolute,
            "iterations": res.iterations,
            "social_cost": cost,
            "paths": paths,
            "edge_flow": edge_flow,
        });
        let mut bytes = serde_json::to_vec_pretty(&doc).expect("flow document serializes");
        bytes.push(b'\n');
        write_output(Some(path), &bytes)?;
    }

    if res.converged {
        Ok(())
    } else {
        Err(CliError::NotConverged(format!(
            "no convergence after {} iterations (gap {:e})",
            res.iterations, res.relative_gap
        )))
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "undefined".into(), |v| v.to_string())
}

pub fn render_report(r: &PraReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "instance         {}", r.name);
    let _ = writeln!(out, "risk model       {}  gamma {}  demand {}", r.risk_model, r.gamma, r.demand);
    let _ = writeln!(out, "C(z) risk-neutral {}", r.cost_rnwe);
    let _ = writeln!(out, "C(x) risk-averse  {}", r.cost_rawe);
    let _ = writeln!(out, "PRA              {}", fmt_opt(r.pra));
    let flag = if r.kappa_unbounded { " (unbounded)" } else { "" };
    let _ = writeln!(out, "kappa            {}{flag}", r.kappa);
    let _ = writeln!(out, "eta              {}  (ceiling {})", r.eta, r.eta_ceiling);
    let _ = writeln!(out, "bound 1+gk*eta   {}", r.bound_eta);
    let _ = writeln!(out, "bound worst case {}", r.bound_worstcase);
    let _ = writeln!(out, "rho              {}", r.rho);
    let _ = writeln!(out, "bound (1+gk)rho  {}", r.bound_rho);
    let _ = writeln!(out, "series-parallel  {}", r.series_parallel);
    let _ = writeln!(out, "A                {}", r.set_a.join(" "));
    let _ = writeln!(out, "B                {}", r.set_b.join(" "));
    if !r.removed.is_empty() {
        let _ = writeln!(out, "removed          {}", r.removed.join(" "));
    }
    let arcs: Vec<String> = r
        .alternating_path
        .iter()
        .map(|a| {
            let sign = match a.direction {
                riskroute::alternating::Direction::Forward => "+",
                riskroute::alternating::Direction::Backward => "-",
            };
            format!("{}{sign}", a.edge)
        })
        .collect();
    let _ = writeln!(out, "alternating path {}", arcs.join(" "));
    let _ = writeln!(out, "min-risk path    {}", r.min_risk_path.join(","));
    let _ = writeln!(out);
    let _ = writeln!(out, "{:<22} {:<10} {:>24} {:>24}  result", "check", "status", "lhs", "rhs");
    for c in &r.checks {
        let status = serde_json::to_value(c.status).expect("status serializes");
        let status = status.as_str().unwrap_or_default();
        let label = if c.status == riskroute::analysis::CheckStatus::Unproven {
            "unproven bound"
        } else if c.pass {
            "PASS"
        } else {
            "FAIL"
        };
        let _ = writeln!(out, "{:<22} {:<10} {:>24} {:>24}  {label}", c.name, status, c.lhs, c.rhs);
    }
    out
}

pub fn analyze(args: &AnalyzeArgs) -> Result<(), CliError> {
    let inst = load_instance(&args.instance, args.risk_model)?;
    let opts = args.solver.options();
    let x = solve_equilibrium(&inst, Objective::risk_averse(inst.risk_model), &opts).map_err(solve_error)?;
    let z = solve_equilibrium(&inst, Objective::RiskNeutral, &opts).map_err(solve_error)?;
    let report = pra_report(&inst, &x, &z).map_err(analysis_error)?;

    print!("{}", render_report(&report));
    println!();
    println!("{CSV_HEADER}");
    let quoted = format!("\"{}\"", inst.name.replace('"', "\"\""));
    println!("{}", report.csv_row(quoted));

    if let Some(path) = &args.out {
        let mut bytes = serde_json::to_vec_pretty(&report).expect("report serializes");
        bytes.push(b'\n');
        write_output(Some(path), &bytes)?;
    }

    let failed: Vec<&str> = report.proven_failures().map(|c| c.name).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::BoundFailure(format!("proven bound failed: {}", failed.join(", "))))
    }
}

pub fn generate(args: &GenerateArgs) -> Result<(), CliError> {
    let inst = generate_family(&args.family.params()).map_err(|e| CliError::Input(e.to_string()))?;
    write_output(args.out.as_deref(), &write_instance(&inst))
}

pub fn oracle(args: &OracleArgs) -> Result<(), CliError> {
    let inst = load_instance(&args.instance, None)?;
    let z = solve_equilibrium(&inst, Objective::RiskNeutral, &args.solver.options()).map_err(solve_error)?;
    if !z.converged {
        return Err(CliError::NotConverged(format!(
            "risk-neutral equilibrium did not converge (gap {:e})",
            z.relative_gap
        )));
    }
    let s_z = shortest_path_length(&inst.network, &z.flow.edge_flow);
    let res = max_shortest_path_oracle(&inst, args.grid).map_err(analysis_error)?;

    println!("instance         {}", inst.name);
    println!("series-parallel  {}", sp_decompose(&inst.network).is_series_parallel());
    println!("paths            {}", res.paths.len());
    println!("grid             {} (requested {})", res.effective_grid, args.grid);
    println!("max S(f)         {}", res.best_value);
    println!("S(z)             {s_z}");
    println!("slack            {}", res.slack);
    println!("best flow");
    for (p, f) in res.paths.iter().zip(&res.best_path_flow) {
        if *f > 0.0 {
            println!("  {:<24} {f}", p.join(","));
        }
    }
    Ok(())
}
