//! Edge partition between the two equilibria and the alternating-path
//! certificate built from it.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::Serialize;
use thiserror::Error;

use crate::network::{Instance, Network, RiskModel};
use crate::sp::braess_labels;

/// Classification threshold relative to demand.
pub const CLASSIFY_REL_EPS: f64 = 1e-7;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlternatingError {
    #[error("no alternating source-sink path in the residual graph (inputs are not a pair of equilibria)")]
    NoResidualPath,
    #[error("unsupported: {0}")]
    Unsupported(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum EdgeClass {
    /// `z_e >= x_e` and `z_e > 0`.
    A,
    /// `z_e < x_e`.
    B,
    /// Both flows are negligible.
    Removed,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgePartition {
    classes: Vec<EdgeClass>,
}

impl EdgePartition {
    pub fn from_classes(classes: Vec<EdgeClass>) -> Self {
        Self { classes }
    }

    pub fn class(&self, edge: usize) -> EdgeClass {
        self.classes[edge]
    }

    pub fn classes(&self) -> &[EdgeClass] {
        &self.classes
    }

    /// Edge indices of one class, in index order.
    pub fn members(&self, class: EdgeClass) -> Vec<usize> {
        (0..self.classes.len()).filter(|&e| self.classes[e] == class).collect()
    }

    /// Edge ids of one class, sorted.
    pub fn ids<'a>(&self, net: &'a Network, class: EdgeClass) -> Vec<&'a str> {
        let mut ids: Vec<&str> = self.members(class).into_iter().map(|e| net.edges()[e].id.as_str()).collect();
        ids.sort_unstable();
        ids
    }
}

/// Splits edges by comparing RAWE flows `x` with RNWE flows `z`.
///
/// An edge with `z_e <= eps` whose flows agree within `eps` is removed; both
/// of its flows are then at most `2 eps`.
pub fn classify_edges(x: &[f64], z: &[f64], eps: f64) -> EdgePartition {
    assert_eq!(x.len(), z.len());
    let classes = x
        .iter()
        .zip(z)
        .map(|(&x, &z)| {
            if z > eps && z >= x - eps {
                EdgeClass::A
            } else if z < x - eps {
                EdgeClass::B
            } else {
                EdgeClass::Removed
            }
        })
        .collect();
    EdgePartition { classes }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Backward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Arc {
    pub edge: usize,
    pub direction: Direction,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlternatingPath {
    pub arcs: Vec<Arc>,
    pub forward_runs: usize,
}

impl AlternatingPath {
    pub fn new(arcs: Vec<Arc>) -> Self {
        let forward_runs = count_forward_runs(&arcs);
        Self { arcs, forward_runs }
    }

    pub fn is_all_forward(&self) -> bool {
        self.arcs.iter().all(|a| a.direction == Direction::Forward)
    }

    pub fn edges(&self, direction: Direction) -> impl Iterator<Item = usize> + '_ {
        self.arcs.iter().filter(move |a| a.direction == direction).map(|a| a.edge)
    }

    /// `(edge id, "fwd" | "bwd")` pairs in path order.
    pub fn describe<'a>(&self, net: &'a Network) -> Vec<(&'a str, &'static str)> {
        self.arcs
            .iter()
            .map(|a| {
                let dir = match a.direction {
                    Direction::Forward => "fwd",
                    Direction::Backward => "bwd",
                };
                (net.edges()[a.edge].id.as_str(), dir)
            })
            .collect()
    }
}

pub fn count_forward_runs(arcs: &[Arc]) -> usize {
    let mut runs = 0;
    let mut previous = None;
    for a in arcs {
        if a.direction == Direction::Forward && previous != Some(Direction::Forward) {
            runs += 1;
        }
        previous = Some(a.direction);
    }
    runs
}

/// Residual arcs leaving each node: A edges forward, B edges reversed, in edge-id order.
pub fn residual_arcs(partition: &EdgePartition, net: &Network) -> Vec<Vec<(Arc, usize)>> {
    let mut order: Vec<usize> = (0..net.edge_count()).collect();
    order.sort_by(|&a, &b| net.edges()[a].id.cmp(&net.edges()[b].id));
    let mut out = vec![Vec::new(); net.node_count()];
    for e in order {
        match partition.class(e) {
            EdgeClass::A => out[net.tail(e)].push((
                Arc {
                    edge: e,
                    direction: Direction::Forward,
                },
                net.head(e),
            )),
            EdgeClass::B => out[net.head(e)].push((
                Arc {
                    edge: e,
                    direction: Direction::Backward,
                },
                net.tail(e),
            )),
            EdgeClass::Removed => {}
        }
    }
    out
}

const START: usize = 0;
const FWD: usize = 1;
const BWD: usize = 2;

/// Source-sink path in the residual graph with the fewest forward runs (and
/// the fewest arcs among those).
///
/// Runs a lexicographic shortest-path search over `(node, last direction)`
/// states, paying one unit whenever a forward arc opens a new run, then
/// shortcuts any repeated node. Cutting out a loop never adds a run, so the
/// result is a simple path that is still optimal.
pub fn find_alternating_path(partition: &EdgePartition, net: &Network) -> Result<AlternatingPath, AlternatingError> {
    let residual = residual_arcs(partition, net);
    let n = net.node_count();
    let state = |v: usize, last: usize| v * 3 + last;
    let mut dist = vec![(usize::MAX, usize::MAX); n * 3];
    let mut pred: Vec<Option<(usize, Arc)>> = vec![None; n * 3];
    let mut heap = BinaryHeap::new();
    let start = state(net.source(), START);
    dist[start] = (0, 0);
    heap.push(Reverse(((0usize, 0usize), start)));

    while let Some(Reverse((d, s))) = heap.pop() {
        if d > dist[s] {
            continue;
        }
        let (v, last) = (s / 3, s % 3);
        for &(arc, w) in &residual[v] {
            let (next_last, cost) = match arc.direction {
                Direction::Forward => (FWD, usize::from(last != FWD)),
                Direction::Backward => (BWD, 0),
            };
            let nd = (d.0 + cost, d.1 + 1);
            let ns = state(w, next_last);
            if nd < dist[ns] {
                dist[ns] = nd;
                pred[ns] = Some((s, arc));
                heap.push(Reverse((nd, ns)));
            }
        }
    }

    let t = net.sink();
    let end = [state(t, FWD), state(t, BWD)]
        .into_iter()
        .filter(|&s| dist[s].0 != usize::MAX)
        .min_by_key(|&s| (dist[s], s))
        .ok_or(AlternatingError::NoResidualPath)?;

    let mut arcs = Vec::new();
    let mut s = end;
    while let Some((prev, arc)) = pred[s] {
        arcs.push(arc);
        s = prev;
    }
    arcs.reverse();
    Ok(AlternatingPath::new(shortcut(net, arcs)))
}

/// Removes loops from a residual walk so every node is visited once.
fn shortcut(net: &Network, arcs: Vec<Arc>) -> Vec<Arc> {
    let endpoint = |a: &Arc| match a.direction {
        Direction::Forward => net.head(a.edge),
        Direction::Backward => net.tail(a.edge),
    };
    let mut out: Vec<Arc> = Vec::with_capacity(arcs.len());
    // position[v] = number of arcs in `out` when v was reached.
    let mut position = vec![usize::MAX; net.node_count()];
    position[net.source()] = 0;
    for a in arcs {
        let w = endpoint(&a);
        out.push(a);
        if position[w] != usize::MAX {
            for dropped in out.drain(position[w]..) {
                position[endpoint(&dropped)] = usize::MAX;
            }
            position[w] = out.len();
        } else {
            position[w] = out.len();
        }
    }
    out
}

/// `(1 + gamma kappa) sum_{A on path} l_e(x_e) - sum_{B on path} l_e(x_e)`.
///
/// Defined for mean-var instances, and for mean-stdev only on the Braess
/// topology.
pub fn lemma1_rhs(inst: &Instance, x: &[f64], path: &AlternatingPath, kappa: f64) -> Result<f64, AlternatingError> {
    if inst.risk_model == RiskModel::MeanStdev && braess_labels(&inst.network).is_none() {
        return Err(AlternatingError::Unsupported(
            "the alternating-path upper bound for mean-stdev costs is only established on Braess networks".into(),
        ));
    }
    let (forward, backward) = signed_latencies(inst, x, path);
    let factor = if inst.gamma == 0.0 { 1.0 } else { 1.0 + inst.gamma * kappa };
    Ok(factor * forward - backward)
}

/// `sum_{A on path} l_e(z_e) - sum_{B on path} l_e(z_e)`.
pub fn lemma2_rhs(inst: &Instance, z: &[f64], path: &AlternatingPath) -> f64 {
    let (forward, backward) = signed_latencies(inst, z, path);
    forward - backward
}

/// Latency sums over forward and backward arcs at the given edge flows.
pub fn signed_latencies(inst: &Instance, flow: &[f64], path: &AlternatingPath) -> (f64, f64) {
    let edges = inst.network.edges();
    let sum = |dir| path.edges(dir).map(|e| edges[e].latency.eval(flow[e])).sum::<f64>();
    (sum(Direction::Forward), sum(Direction::Backward))
}

/// `1 + gamma kappa eta`; exactly 1 when either factor vanishes.
pub fn theoretical_pra_bound(gamma: f64, kappa: f64, eta: usize) -> f64 {
    if gamma == 0.0 || kappa == 0.0 || eta == 0 {
        1.0
    } else {
        1.0 + gamma * kappa * eta as f64
    }
}

/// `ceil((n - 1) / 2)`, the largest number of forward runs a simple path
/// through `n` nodes can have.
pub fn eta_ceiling(node_count: usize) -> usize {
    node_count.saturating_sub(1).div_ceil(2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{braess, pigou, random_general};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn braess_flows(inst: &Instance) -> (Vec<f64>, Vec<f64>) {
        let net = &inst.network;
        let mut x = vec![0.0; 5];
        let mut z = vec![0.5; 5];
        for id in ["a", "d", "e"] {
            x[net.edge_index(id).unwrap()] = 1.0;
        }
        z[net.edge_index("e").unwrap()] = 0.0;
        (x, z)
    }

    #[test]
    fn braess_partition_and_path() {
        let inst = braess(0.1, RiskModel::MeanVar);
        let net = &inst.network;
        let (x, z) = braess_flows(&inst);
        let part = classify_edges(&x, &z, 1e-7);
        assert_eq!(part.ids(net, EdgeClass::A), ["b", "c"]);
        assert_eq!(part.ids(net, EdgeClass::B), ["a", "d", "e"]);
        assert!(part.members(EdgeClass::Removed).is_empty());

        let path = find_alternating_path(&part, net).unwrap();
        assert_eq!(path.describe(net), [("c", "fwd"), ("e", "bwd"), ("b", "fwd")]);
        assert_eq!(path.forward_runs, 2);

        let l1 = lemma1_rhs(&inst, &x, &path, 0.1).unwrap();
        assert!((l1 - 1.3).abs() < 1e-12, "{l1}");
        // Only e is backward on the path: l_b + l_c - l_e(0) = 2 - 0.9.
        let l2 = lemma2_rhs(&inst, &z, &path);
        assert!((l2 - 1.1).abs() < 1e-12, "{l2}");
        assert!((theoretical_pra_bound(1.0, 0.1, 2) - 1.2).abs() < 1e-15);
    }

    #[test]
    fn equal_positive_flows_are_all_a() {
        let part = classify_edges(&[0.3, 0.7], &[0.3, 0.7], 1e-7);
        assert_eq!(part.members(EdgeClass::A), [0, 1]);
        let part = classify_edges(&[0.0, 1.0], &[0.0, 1.0], 1e-7);
        assert_eq!(part.class(0), EdgeClass::Removed);
    }

    #[test]
    fn pigou_single_forward_arc() {
        let inst = pigou(1.0, 1.0, RiskModel::MeanVar);
        let part = classify_edges(&[1.0, 0.0], &[0.5, 0.5], 1e-7);
        let path = find_alternating_path(&part, &inst.network).unwrap();
        assert_eq!(path.arcs.len(), 1);
        assert_eq!(path.forward_runs, 1);
        assert!(path.is_all_forward());
        let l1 = lemma1_rhs(&inst, &[1.0, 0.0], &path, 1.0).unwrap();
        // (1 + 1) * l_e2 = 2
        assert!((l1 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn series_edges_form_one_run() {
        let net = Network::new(
            vec!["s".into(), "m".into(), "t".into()],
            vec![
                crate::network::Edge::new("x", "s", "m", crate::poly::CostPoly::affine(0.0, 1.0), Default::default()),
                crate::network::Edge::new("y", "m", "t", crate::poly::CostPoly::affine(0.0, 1.0), Default::default()),
            ],
            "s",
            "t",
        )
        .unwrap();
        let part = EdgePartition::from_classes(vec![EdgeClass::A, EdgeClass::A]);
        let path = find_alternating_path(&part, &net).unwrap();
        assert_eq!(path.arcs.len(), 2);
        assert_eq!(path.forward_runs, 1);
    }

    #[test]
    fn gamma_zero_drops_the_kappa_term() {
        let inst = braess(0.1, RiskModel::MeanVar).with_gamma(0.0);
        let (x, z) = braess_flows(&inst);
        let path = find_alternating_path(&classify_edges(&x, &z, 1e-7), &inst.network).unwrap();
        let l1 = lemma1_rhs(&inst, &x, &path, 0.1).unwrap();
        assert!((l1 - (2.0 - 0.9)).abs() < 1e-12);
        assert_eq!(theoretical_pra_bound(0.0, f64::INFINITY, 3), 1.0);
    }

    #[test]
    fn mean_stdev_outside_braess_is_unsupported() {
        let inst = pigou(1.0, 1.0, RiskModel::MeanStdev);
        let path = AlternatingPath::new(vec![Arc {
            edge: 0,
            direction: Direction::Forward,
        }]);
        assert!(matches!(
            lemma1_rhs(&inst, &[1.0, 0.0], &path, 1.0),
            Err(AlternatingError::Unsupported(_))
        ));
        let inst = braess(0.1, RiskModel::MeanStdev);
        let (x, z) = braess_flows(&inst);
        let path = find_alternating_path(&classify_edges(&x, &z, 1e-7), &inst.network).unwrap();
        assert!(lemma1_rhs(&inst, &x, &path, 0.1).is_ok());
    }

    #[test]
    fn missing_path_is_an_error() {
        let inst = braess(0.1, RiskModel::MeanVar);
        let part = EdgePartition::from_classes(vec![EdgeClass::Removed; 5]);
        assert_eq!(
            find_alternating_path(&part, &inst.network),
            Err(AlternatingError::NoResidualPath)
        );
    }

    #[test]
    fn run_counting() {
        let f = |e| Arc {
            edge: e,
            direction: Direction::Forward,
        };
        let b = |e| Arc {
            edge: e,
            direction: Direction::Backward,
        };
        assert_eq!(count_forward_runs(&[f(0), f(1), b(2), f(3), b(4), b(5), f(6)]), 3);
        assert_eq!(count_forward_runs(&[]), 0);
        assert_eq!(eta_ceiling(4), 2);
        assert_eq!(eta_ceiling(5), 2);
        assert_eq!(eta_ceiling(2), 1);
    }

    /// Minimum forward-run count over every simple residual path, by DFS.
    fn exhaustive_min_runs(partition: &EdgePartition, net: &Network) -> Option<usize> {
        fn go(
            v: usize,
            t: usize,
            residual: &[Vec<(Arc, usize)>],
            visited: &mut [bool],
            arcs: &mut Vec<Arc>,
            best: &mut Option<usize>,
        ) {
            if v == t {
                let runs = count_forward_runs(arcs);
                *best = Some(best.map_or(runs, |b| b.min(runs)));
                return;
            }
            for &(arc, w) in &residual[v] {
                if !visited[w] {
                    visited[w] = true;
                    arcs.push(arc);
                    go(w, t, residual, visited, arcs, best);
                    arcs.pop();
                    visited[w] = false;
                }
            }
        }
        let residual = residual_arcs(partition, net);
        let mut visited = vec![false; net.node_count()];
        visited[net.source()] = true;
        let mut best = None;
        go(net.source(), net.sink(), &residual, &mut visited, &mut Vec::new(), &mut best);
        best
    }

    fn assert_valid(path: &AlternatingPath, partition: &EdgePartition, net: &Network) {
        let mut v = net.source();
        let mut seen = vec![false; net.node_count()];
        seen[v] = true;
        for a in &path.arcs {
            let (from, to, class) = match a.direction {
                Direction::Forward => (net.tail(a.edge), net.head(a.edge), EdgeClass::A),
                Direction::Backward => (net.head(a.edge), net.tail(a.edge), EdgeClass::B),
            };
            assert_eq!(from, v);
            assert_eq!(partition.class(a.edge), class);
            assert!(!seen[to], "node repeated");
            seen[to] = true;
            v = to;
        }
        assert_eq!(v, net.sink());
        assert_eq!(path.forward_runs, count_forward_runs(&path.arcs));
        assert!(path.forward_runs <= eta_ceiling(net.node_count()));
    }

    #[test]
    fn minimal_runs_match_exhaustive_search() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut found = 0;
        for seed in 0..400 {
            let nodes = rng.gen_range(3..=8);
            let edges = rng.gen_range(nodes - 1..=nodes * 2 + 2);
            let inst = random_general(nodes, edges, seed);
            let net = &inst.network;
            let classes = (0..net.edge_count())
                .map(|_| match rng.gen_range(0..5) {
                    0 | 1 => EdgeClass::A,
                    2 | 3 => EdgeClass::B,
                    _ => EdgeClass::Removed,
                })
                .collect();
            let part = EdgePartition::from_classes(classes);
            let expected = exhaustive_min_runs(&part, net);
            match find_alternating_path(&part, net) {
                Ok(path) => {
                    found += 1;
                    assert_valid(&path, &part, net);
                    assert_eq!(Some(path.forward_runs), expected, "seed {seed}");
                }
                Err(_) => assert_eq!(expected, None, "seed {seed}"),
            }
        }
        assert!(found > 50, "only {found} partitions had a path");
    }
}
