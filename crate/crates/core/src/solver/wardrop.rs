use std::collections::HashMap;

use super::{gap_from_costs, EquilibriumResult, Flow, Gap, Objective, SolveError, SolverOptions};
use crate::network::{validate_instance, Instance, Path, RiskModel};

const BISECTION_STEPS: usize = 60;
const POTENTIAL_SLACK: f64 = 1e-12;

/// Separable potential `sum_e int_0^{f_e} c_e(t) dt` for an additive objective.
pub struct Potential<'a> {
    inst: &'a Instance,
    gamma: f64,
}

impl<'a> Potential<'a> {
    /// # Panics
    /// If `objective` is not additive.
    pub fn new(inst: &'a Instance, objective: Objective) -> Self {
        let gamma = match objective {
            Objective::RiskNeutral => 0.0,
            Objective::MeanVar => inst.gamma,
            Objective::MeanStdev => panic!("mean-stdev cost has no separable potential"),
        };
        Self { inst, gamma }
    }

    pub fn edge_cost(&self, e: usize, x: f64) -> f64 {
        let edge = &self.inst.network.edges()[e];
        let l = edge.latency.eval(x);
        if self.gamma == 0.0 {
            l
        } else {
            l + self.gamma * edge.risk.eval(x)
        }
    }

    pub fn value(&self, edge_flow: &[f64]) -> f64 {
        self.inst
            .network
            .edges()
            .iter()
            .zip(edge_flow)
            .map(|(e, &f)| {
                let l = e.latency.integral(f);
                if self.gamma == 0.0 {
                    l
                } else {
                    l + self.gamma * e.risk.integral(f)
                }
            })
            .sum()
    }

    /// Derivative of the potential along `direction` (sparse edge
    /// multiplicities) at step `lambda`.
    fn directional_derivative(&self, edge_flow: &[f64], direction: &[(usize, f64)], lambda: f64) -> f64 {
        direction
            .iter()
            .map(|&(e, d)| self.edge_cost(e, edge_flow[e] + lambda * d) * d)
            .sum()
    }
}

/// Risk-neutral or mean-var Wardrop equilibrium by conditional gradient on the
/// potential.
///
/// Every iteration evaluates edge costs at the current flow, finds the
/// all-or-nothing shortest path and moves flow to it from the most expensive
/// used path, with the step chosen by bisection on the directional
/// derivative. Path flows are kept explicitly; at most one new path enters per
/// iteration.
pub fn solve_wardrop(
    inst: &Instance,
    objective: Objective,
    opts: &SolverOptions,
) -> Result<EquilibriumResult, SolveError> {
    let verdict = validate_instance(inst);
    if !verdict.is_ok() {
        return Err(SolveError::Invalid(verdict));
    }
    match (objective, inst.risk_model) {
        (Objective::RiskNeutral, _) | (Objective::MeanVar, RiskModel::MeanVar) => {}
        (objective, model) => return Err(SolveError::ModeMismatch { objective, model }),
    }

    let net = &inst.network;
    let demand = inst.demand;
    let potential = Potential::new(inst, objective);
    let costs_at = |edge_flow: &[f64]| -> Vec<f64> {
        (0..net.edge_count())
            .map(|e| potential.edge_cost(e, edge_flow[e]))
            .collect()
    };

    let mut paths: Vec<Path> = Vec::new();
    let mut path_flow: Vec<f64> = Vec::new();
    let mut index: HashMap<Path, usize> = HashMap::new();

    let zero = vec![0.0; net.edge_count()];
    let (_, first) = net
        .shortest_path(&costs_at(&zero))
        .expect("validated instance has a source-sink path");
    index.insert(first.clone(), 0);
    paths.push(first);
    path_flow.push(demand);
    let mut edge_flow = net.edge_flow(&paths, &path_flow);

    let mut trace = Vec::new();
    let mut phi = potential.value(&edge_flow);
    if opts.record_trace {
        trace.push(phi);
    }

    let mut best: Option<(Gap, Vec<Path>, Vec<f64>)> = None;
    let mut stalls = 0;
    let mut iterations = 0;
    let mut converged = false;

    while iterations <= opts.max_iter {
        let costs = costs_at(&edge_flow);
        let (min_cost, shortest) = net
            .shortest_path(&costs)
            .expect("validated instance has a source-sink path");
        let path_costs: Vec<f64> = paths
            .iter()
            .map(|p| p.iter().map(|&e| costs[e]).sum())
            .collect();
        let gap = gap_from_costs(demand, &path_flow, &path_costs, min_cost);
        if best.as_ref().is_none_or(|(b, _, _)| rank(&gap) < rank(b)) {
            best = Some((gap, paths.clone(), path_flow.clone()));
        }
        if gap.within(opts.tol) {
            converged = true;
            break;
        }
        if iterations == opts.max_iter || stalls >= 3 {
            break;
        }
        iterations += 1;

        let away = (0..paths.len())
            .filter(|&i| path_flow[i] > 0.0)
            .max_by(|&a, &b| path_costs[a].total_cmp(&path_costs[b]).then(b.cmp(&a)))
            .expect("some path carries flow");
        if paths[away] == shortest {
            break;
        }
        let target = match index.get(&shortest) {
            Some(&i) => i,
            None => {
                index.insert(shortest.clone(), paths.len());
                paths.push(shortest.clone());
                path_flow.push(0.0);
                paths.len() - 1
            }
        };

        let mut dir: HashMap<usize, f64> = HashMap::new();
        for &e in &paths[target] {
            *dir.entry(e).or_default() += 1.0;
        }
        for &e in &paths[away] {
            *dir.entry(e).or_default() -= 1.0;
        }
        let mut direction: Vec<(usize, f64)> = dir.into_iter().filter(|&(_, d)| d != 0.0).collect();
        direction.sort_unstable_by_key(|&(e, _)| e);

        let max_step = path_flow[away];
        let slope = |lambda: f64| potential.directional_derivative(&edge_flow, &direction, lambda);
        let step = if slope(max_step) <= 0.0 {
            max_step
        } else {
            let (mut lo, mut hi) = (0.0, max_step);
            for _ in 0..BISECTION_STEPS {
                let mid = 0.5 * (lo + hi);
                if slope(mid) <= 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            lo
        };

        if step <= 0.0 {
            stalls += 1;
            continue;
        }
        stalls = 0;
        if step >= max_step {
            path_flow[away] = 0.0;
        } else {
            path_flow[away] -= step;
        }
        path_flow[target] += step;

        // Drop emptied paths so the active set stays small.
        if path_flow[away] == 0.0 {
            let removed = paths.swap_remove(away);
            path_flow.swap_remove(away);
            index.remove(&removed);
            if away < paths.len() {
                index.insert(paths[away].clone(), away);
            }
        }
        edge_flow = net.edge_flow(&paths, &path_flow);

        let next_phi = potential.value(&edge_flow);
        debug_assert!(
            next_phi <= phi + POTENTIAL_SLACK * phi.abs().max(1.0),
            "potential increased from {phi} to {next_phi}"
        );
        phi = next_phi;
        if opts.record_trace {
            trace.push(phi);
        }
    }

    let (gap, paths, path_flow) = if converged {
        let costs = costs_at(&edge_flow);
        let min_cost = net.shortest_path(&costs).map_or(f64::INFINITY, |(d, _)| d);
        let path_costs: Vec<f64> = paths.iter().map(|p| p.iter().map(|&e| costs[e]).sum()).collect();
        (gap_from_costs(demand, &path_flow, &path_costs, min_cost), paths, path_flow)
    } else {
        best.expect("at least one iterate was evaluated")
    };
    let converged = converged || gap.within(opts.tol);
    let (paths, path_flow): (Vec<Path>, Vec<f64>) = paths
        .into_iter()
        .zip(path_flow)
        .filter(|&(_, f)| f > 0.0)
        .unzip();
    Ok(EquilibriumResult {
        flow: Flow::from_paths(net, paths, path_flow, objective),
        relative_gap: gap.value,
        gap_is_absolute: gap.absolute,
        iterations,
        converged,
        potential_trace: trace,
    })
}

fn rank(gap: &Gap) -> f64 {
    gap.value.max(gap.max_used_excess)
}
