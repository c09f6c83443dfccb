use super::{gap_from_costs, EquilibriumResult, Flow, Gap, Objective, SolveError, SolverOptions};
use crate::network::{validate_instance, Instance, RiskModel};

const BISECTION_STEPS: usize = 60;

/// Mean-stdev equilibrium by pairwise path equalization.
///
/// The path cost `l_p + gamma * sqrt(sum sigma_e^2)` is not a sum of edge
/// costs, so this works on the enumerated path set: each iteration moves flow
/// from the most expensive used path to the cheapest path until their costs
/// meet (or the donor is empty).
pub fn solve_rawe_meanstdev(inst: &Instance, opts: &SolverOptions) -> Result<EquilibriumResult, SolveError> {
    let verdict = validate_instance(inst);
    if !verdict.is_ok() {
        return Err(SolveError::Invalid(verdict));
    }
    if inst.risk_model != RiskModel::MeanStdev {
        return Err(SolveError::ModeMismatch {
            objective: Objective::MeanStdev,
            model: inst.risk_model,
        });
    }
    let net = &inst.network;
    let objective = Objective::MeanStdev;
    let demand = inst.demand;
    let paths = net.enumerate_simple_paths(opts.path_cap)?.into_paths();

    let zero = vec![0.0; net.edge_count()];
    let start = argmin(paths.iter().map(|p| objective.path_cost(inst, &zero, p)));
    let mut path_flow = vec![0.0; paths.len()];
    path_flow[start] = demand;

    let mut best: Option<(Gap, Vec<f64>)> = None;
    let mut iterations = 0;
    let mut converged = false;
    let mut scratch = vec![0.0; net.edge_count()];

    loop {
        let edge_flow = net.edge_flow(&paths, &path_flow);
        let costs: Vec<f64> = paths.iter().map(|p| objective.path_cost(inst, &edge_flow, p)).collect();
        let cheapest = argmin(costs.iter().copied());
        let gap = gap_from_costs(demand, &path_flow, &costs, costs[cheapest]);
        if best.as_ref().is_none_or(|(b, _)| rank(&gap) < rank(b)) {
            best = Some((gap, path_flow.clone()));
        }
        if gap.within(opts.tol) {
            converged = true;
            break;
        }
        if iterations >= opts.max_iter {
            break;
        }
        iterations += 1;

        let donor = (0..paths.len())
            .filter(|&i| path_flow[i] > 0.0)
            .max_by(|&a, &b| costs[a].total_cmp(&costs[b]).then(b.cmp(&a)))
            .expect("some path carries flow");
        if donor == cheapest {
            break;
        }

        // Cost difference after moving `delta` from donor to receiver; non-increasing in delta.
        scratch.copy_from_slice(&edge_flow);
        let mut difference = |delta: f64| {
            for &e in &paths[donor] {
                scratch[e] -= delta;
            }
            for &e in &paths[cheapest] {
                scratch[e] += delta;
            }
            let h = objective.path_cost(inst, &scratch, &paths[donor])
                - objective.path_cost(inst, &scratch, &paths[cheapest]);
            for &e in &paths[donor] {
                scratch[e] += delta;
            }
            for &e in &paths[cheapest] {
                scratch[e] -= delta;
            }
            h
        };
        let max_step = path_flow[donor];
        let step = if difference(max_step) >= 0.0 {
            max_step
        } else {
            let (mut lo, mut hi) = (0.0, max_step);
            for _ in 0..BISECTION_STEPS {
                let mid = 0.5 * (lo + hi);
                if difference(mid) >= 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            lo
        };
        if step <= 0.0 {
            break;
        }
        if step >= max_step {
            path_flow[donor] = 0.0;
        } else {
            path_flow[donor] -= step;
        }
        path_flow[cheapest] += step;
    }

    let (gap, path_flow) = best.expect("at least one iterate was evaluated");
    let converged = converged || gap.within(opts.tol);
    let (paths, path_flow): (Vec<_>, Vec<f64>) = paths.into_iter().zip(path_flow).filter(|&(_, f)| f > 0.0).unzip();
    Ok(EquilibriumResult {
        flow: Flow::from_paths(net, paths, path_flow, objective),
        relative_gap: gap.value,
        gap_is_absolute: gap.absolute,
        iterations,
        converged,
        potential_trace: Vec::new(),
    })
}

fn argmin(values: impl Iterator<Item = f64>) -> usize {
    values
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
        .map(|(i, _)| i)
        .expect("validated instance has a source-sink path")
}

fn rank(gap: &Gap) -> f64 {
    gap.value.max(gap.max_used_excess)
}
