//! Equilibrium solvers and their certificates.

mod meanstdev;
mod wardrop;

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::network::{Instance, Network, NetworkError, Path, RiskModel, Verdict, DEFAULT_PATH_CAP};

pub use meanstdev::solve_rawe_meanstdev;
pub use wardrop::{solve_wardrop, Potential};

/// Paths carrying more than this fraction of the demand must be cost-minimal
/// up to the tolerance.
pub const USED_PATH_FRACTION: f64 = 1e-7;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("invalid instance: {0}")]
    Invalid(Verdict),
    #[error("objective {objective} does not match the instance risk model {model}")]
    ModeMismatch { objective: Objective, model: RiskModel },
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error("edge flows violate conservation at node `{node}` by {excess:e}")]
    Conservation { node: String, excess: f64 },
}

/// Which path cost the players minimize.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Objective {
    RiskNeutral,
    MeanVar,
    MeanStdev,
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Objective::RiskNeutral => "risk-neutral",
            Objective::MeanVar => "mean-var",
            Objective::MeanStdev => "mean-stdev",
        })
    }
}

impl Objective {
    /// The risk-averse objective that matches an instance's risk model.
    pub fn risk_averse(model: RiskModel) -> Self {
        match model {
            RiskModel::MeanVar => Objective::MeanVar,
            RiskModel::MeanStdev => Objective::MeanStdev,
        }
    }

    /// Whether the path cost is a sum of per-edge costs.
    pub fn is_additive(self) -> bool {
        !matches!(self, Objective::MeanStdev)
    }

    pub fn path_cost(self, inst: &Instance, edge_flow: &[f64], path: &[usize]) -> f64 {
        let edges = inst.network.edges();
        let latency = inst.network.path_latency(edge_flow, path);
        let risk = match self {
            Objective::RiskNeutral => return latency,
            Objective::MeanVar => path.iter().map(|&e| edges[e].risk.eval(edge_flow[e])).sum(),
            Objective::MeanStdev => path
                .iter()
                .map(|&e| edges[e].risk.eval(edge_flow[e]).powi(2))
                .sum::<f64>()
                .sqrt(),
        };
        latency + inst.gamma * risk
    }

    /// Per-edge cost for additive objectives.
    pub fn edge_costs(self, inst: &Instance, edge_flow: &[f64]) -> Option<Vec<f64>> {
        let gamma = match self {
            Objective::RiskNeutral => 0.0,
            Objective::MeanVar => inst.gamma,
            Objective::MeanStdev => return None,
        };
        Some(
            inst.network
                .edges()
                .iter()
                .zip(edge_flow)
                .map(|(e, &f)| {
                    let l = e.latency.eval(f);
                    if gamma == 0.0 {
                        l
                    } else {
                        l + gamma * e.risk.eval(f)
                    }
                })
                .collect(),
        )
    }
}

/// Path flows with their derived edge flows.
#[derive(Debug, Clone, PartialEq)]
pub struct Flow {
    pub paths: Vec<Path>,
    pub path_flow: Vec<f64>,
    pub edge_flow: Vec<f64>,
    pub objective: Objective,
}

impl Flow {
    pub fn from_paths(net: &Network, paths: Vec<Path>, path_flow: Vec<f64>, objective: Objective) -> Self {
        let edge_flow = net.edge_flow(&paths, &path_flow);
        Self {
            paths,
            path_flow,
            edge_flow,
            objective,
        }
    }

    pub fn total(&self) -> f64 {
        self.path_flow.iter().sum()
    }

    /// Flow on the given path, zero if it is not part of the decomposition.
    pub fn flow_on(&self, path: &[usize]) -> f64 {
        self.paths
            .iter()
            .zip(&self.path_flow)
            .filter(|(p, _)| p.as_slice() == path)
            .map(|(_, &f)| f)
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumResult {
    pub flow: Flow,
    pub relative_gap: f64,
    /// True when the minimum path cost was zero and `relative_gap` holds the
    /// absolute gap instead.
    pub gap_is_absolute: bool,
    pub iterations: usize,
    pub converged: bool,
    /// Potential value after each conditional-gradient step, when requested.
    pub potential_trace: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub path_cap: usize,
    pub record_trace: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 200_000,
            path_cap: 2_000,
            record_trace: false,
        }
    }
}

impl SolverOptions {
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gap {
    pub value: f64,
    pub absolute: bool,
    /// Largest `(Q_p - min Q) / min Q` over paths carrying more than
    /// [`USED_PATH_FRACTION`] of the demand (absolute if `min Q = 0`).
    pub max_used_excess: f64,
    pub min_cost: f64,
}

impl Gap {
    pub fn within(&self, tol: f64) -> bool {
        self.value <= tol && self.max_used_excess <= tol
    }
}

fn gap_from_costs(demand: f64, path_flow: &[f64], path_costs: &[f64], min_cost: f64) -> Gap {
    let total: f64 = path_flow.iter().zip(path_costs).map(|(f, q)| f * q).sum();
    let absolute = min_cost <= 0.0;
    let scale = if absolute { 1.0 } else { min_cost };
    let value = ((total - demand * min_cost) / (demand * scale)).max(0.0);
    let max_used_excess = path_flow
        .iter()
        .zip(path_costs)
        .filter(|(&f, _)| f > USED_PATH_FRACTION * demand)
        .map(|(_, &q)| (q - min_cost) / scale)
        .fold(0.0, f64::max);
    Gap {
        value,
        absolute,
        max_used_excess,
        min_cost,
    }
}

/// Solves for the equilibrium of `objective`, choosing the edge-based or the
/// path-based method.
pub fn solve_equilibrium(inst: &Instance, objective: Objective, opts: &SolverOptions) -> Result<EquilibriumResult, SolveError> {
    match objective {
        Objective::MeanStdev => solve_rawe_meanstdev(inst, opts),
        _ => solve_wardrop(inst, objective, opts),
    }
}

/// Normalized gap between the flow's total cost and the all-shortest-path
/// lower bound. Zero exactly at equilibrium.
pub fn relative_gap(inst: &Instance, flow: &Flow, objective: Objective) -> Result<Gap, SolveError> {
    let path_costs: Vec<f64> = flow
        .paths
        .iter()
        .map(|p| objective.path_cost(inst, &flow.edge_flow, p))
        .collect();
    let min_cost = match objective.edge_costs(inst, &flow.edge_flow) {
        Some(costs) => inst
            .network
            .shortest_path(&costs)
            .map_or(f64::INFINITY, |(d, _)| d),
        None => inst
            .network
            .enumerate_simple_paths(DEFAULT_PATH_CAP)?
            .paths()
            .iter()
            .map(|p| objective.path_cost(inst, &flow.edge_flow, p))
            .fold(f64::INFINITY, f64::min),
    };
    Ok(gap_from_costs(inst.demand, &flow.path_flow, &path_costs, min_cost))
}

/// Greedy path decomposition: repeatedly peel off the lexicographically
/// first source-sink path with positive residual flow at its bottleneck.
pub fn decompose_edge_flow(net: &Network, edge_flow: &[f64]) -> Result<(Vec<Path>, Vec<f64>), SolveError> {
    let supply: f64 = net.out_edges(net.source()).iter().map(|&e| edge_flow[e]).sum::<f64>()
        - net.in_edges(net.source()).iter().map(|&e| edge_flow[e]).sum::<f64>();
    let tol = 1e-9 * supply.abs().max(1.0);
    for v in 0..net.node_count() {
        let inflow: f64 = net.in_edges(v).iter().map(|&e| edge_flow[e]).sum();
        let outflow: f64 = net.out_edges(v).iter().map(|&e| edge_flow[e]).sum();
        let expected = if v == net.source() {
            supply
        } else if v == net.sink() {
            -supply
        } else {
            0.0
        };
        let excess = outflow - inflow - expected;
        if excess.abs() > tol || edge_flow.iter().any(|&f| f < -tol) {
            return Err(SolveError::Conservation {
                node: net.nodes()[v].clone(),
                excess,
            });
        }
    }

    const POSITIVE: f64 = 1e-13;
    let mut residual = edge_flow.to_vec();
    let mut paths: Vec<Path> = Vec::new();
    let mut flows = Vec::new();
    loop {
        let mut path = Vec::new();
        let mut v = net.source();
        let mut visited = vec![false; net.node_count()];
        visited[v] = true;
        while v != net.sink() {
            let next = net
                .out_edges(v)
                .iter()
                .copied()
                .find(|&e| residual[e] > POSITIVE && !visited[net.head(e)]);
            match next {
                Some(e) => {
                    path.push(e);
                    v = net.head(e);
                    visited[v] = true;
                }
                None => break,
            }
        }
        if v != net.sink() || path.is_empty() {
            break;
        }
        let bottleneck = path.iter().map(|&e| residual[e]).fold(f64::INFINITY, f64::min);
        for &e in &path {
            residual[e] -= bottleneck;
        }
        match paths.iter().position(|p| *p == path) {
            Some(i) => flows[i] += bottleneck,
            None => {
                paths.push(path);
                flows.push(bottleneck);
            }
        }
    }
    if let Some((e, &r)) = residual
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
    {
        if r.abs() > 1e-10 * supply.abs().max(1.0) {
            return Err(SolveError::Conservation {
                node: net.edges()[e].tail.clone(),
                excess: r,
            });
        }
    }
    Ok((paths, flows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{braess, pigou};
    use proptest::prelude::*;

    fn braess_flow(inst: &Instance, p: f64, q: f64, r: f64, objective: Objective) -> Flow {
        let net = &inst.network;
        let paths = vec![
            net.path_from_ids(&["a", "b"]).unwrap(),
            net.path_from_ids(&["c", "d"]).unwrap(),
            net.path_from_ids(&["a", "e", "d"]).unwrap(),
        ];
        Flow::from_paths(net, paths, vec![p, q, r], objective)
    }

    #[test]
    fn braess_gap_zero_at_both_equilibria() {
        let inst = braess(0.1, RiskModel::MeanVar);
        let z = braess_flow(&inst, 0.5, 0.5, 0.0, Objective::RiskNeutral);
        let g = relative_gap(&inst, &z, Objective::RiskNeutral).unwrap();
        assert!(g.value <= 1e-12 && !g.absolute, "{g:?}");
        let x = braess_flow(&inst, 0.0, 0.0, 1.0, Objective::MeanVar);
        let g = relative_gap(&inst, &x, Objective::MeanVar).unwrap();
        assert!(g.value <= 1e-12, "{g:?}");
        let bad = braess_flow(&inst, 1.0, 0.0, 0.0, Objective::RiskNeutral);
        assert!(relative_gap(&inst, &bad, Objective::RiskNeutral).unwrap().value > 0.0);
    }

    #[test]
    fn mean_stdev_gap_uses_enumeration() {
        let inst = braess(0.1, RiskModel::MeanStdev);
        let x = braess_flow(&inst, 0.0, 0.0, 1.0, Objective::MeanStdev);
        assert!(relative_gap(&inst, &x, Objective::MeanStdev).unwrap().value <= 1e-12);
    }

    #[test]
    fn zero_min_cost_reports_absolute_gap() {
        let inst = crate::instances::zigzag(2);
        let (_, path) = inst.network.shortest_path(&vec![0.0; inst.network.edge_count()]).unwrap();
        let flow = Flow::from_paths(&inst.network, vec![path], vec![0.0], Objective::RiskNeutral);
        let g = relative_gap(&inst, &flow, Objective::RiskNeutral).unwrap();
        assert!(g.absolute);
        assert_eq!(g.value, 0.0);
    }

    #[test]
    fn decompose_braess_flows() {
        let inst = braess(0.1, RiskModel::MeanVar);
        let net = &inst.network;
        let idx = |id| net.edge_index(id).unwrap();

        let mut ef = vec![0.0; 5];
        for id in ["a", "d", "e"] {
            ef[idx(id)] = 1.0;
        }
        let (paths, flows) = decompose_edge_flow(net, &ef).unwrap();
        assert_eq!(paths, vec![net.path_from_ids(&["a", "e", "d"]).unwrap()]);
        assert_eq!(flows, vec![1.0]);

        let mut ef = vec![0.5; 5];
        ef[idx("e")] = 0.0;
        let (paths, flows) = decompose_edge_flow(net, &ef).unwrap();
        let ids: Vec<_> = paths.iter().map(|p| net.path_ids(p)).collect();
        assert_eq!(ids, vec![vec!["a", "b"], vec!["c", "d"]]);
        assert_eq!(flows, vec![0.5, 0.5]);
    }

    #[test]
    fn decompose_single_edge() {
        let inst = pigou(1.0, 1.0, RiskModel::MeanVar);
        let (paths, flows) = decompose_edge_flow(&inst.network, &[1.0, 0.0]).unwrap();
        assert_eq!(paths, vec![vec![0]]);
        assert_eq!(flows, vec![1.0]);
    }

    #[test]
    fn decompose_rejects_non_conserving_flow() {
        let inst = braess(0.1, RiskModel::MeanVar);
        let err = decompose_edge_flow(&inst.network, &[1.0, 0.0, 0.0, 0.0, 0.0]).unwrap_err();
        assert!(matches!(err, SolveError::Conservation { .. }));
    }

    proptest! {
        #[test]
        fn decomposition_reproduces_edge_flows(seed in any::<u64>(), weights in prop::collection::vec(0.0..1.0_f64, 1..40)) {
            let inst = crate::instances::random_general(6, 11, seed);
            let net = &inst.network;
            let all = net.enumerate_simple_paths(DEFAULT_PATH_CAP).unwrap().into_paths();
            let pf: Vec<f64> = (0..all.len()).map(|i| weights[i % weights.len()]).collect();
            let ef = net.edge_flow(&all, &pf);
            let (paths, flows) = decompose_edge_flow(net, &ef).unwrap();
            let back = net.edge_flow(&paths, &flows);
            for (a, b) in ef.iter().zip(&back) {
                prop_assert!((a - b).abs() <= 1e-9, "{} vs {}", a, b);
            }
        }

        #[test]
        fn social_cost_matches_path_decomposition(seed in any::<u64>(), weights in prop::collection::vec(0.01..1.0_f64, 1..40)) {
            let inst = crate::instances::random_general(7, 12, seed);
            let net = &inst.network;
            let all = net.enumerate_simple_paths(DEFAULT_PATH_CAP).unwrap().into_paths();
            let raw: Vec<f64> = (0..all.len()).map(|i| weights[i % weights.len()]).collect();
            let sum: f64 = raw.iter().sum();
            let pf: Vec<f64> = raw.iter().map(|w| w * inst.demand / sum).collect();
            let ef = net.edge_flow(&all, &pf);
            let by_paths: f64 = all.iter().zip(&pf).map(|(p, f)| f * net.path_latency(&ef, p)).sum();
            prop_assert!((net.social_cost(&ef) - by_paths).abs() <= 1e-10 * (1.0 + by_paths));
        }
    }
}
