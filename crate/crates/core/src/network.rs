//! Directed network model, instances and the path-level cost functions.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::poly::CostPoly;

/// Default cap on the number of enumerated simple paths.
pub const DEFAULT_PATH_CAP: usize = 10_000;

/// A path as a sequence of edge indices into [`Network::edges`].
pub type Path = Vec<usize>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetworkError {
    #[error("duplicate node id `{0}`")]
    DuplicateNode(String),
    #[error("duplicate edge id `{0}`")]
    DuplicateEdge(String),
    #[error("edge `{edge}` references undeclared node `{node}`")]
    UnknownNode { edge: String, node: String },
    #[error("source or sink `{0}` is not a declared node")]
    UnknownTerminal(String),
    #[error("edge `{0}` is a self-loop")]
    SelfLoop(String),
    #[error("source and sink coincide")]
    SourceIsSink,
    #[error("more than {cap} simple source-sink paths")]
    PathOverflow { cap: usize },
    #[error("unknown edge id `{0}`")]
    UnknownEdge(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub id: String,
    pub tail: String,
    pub head: String,
    pub latency: CostPoly,
    /// Variance under mean-var, standard deviation under mean-stdev.
    pub risk: CostPoly,
}

impl Edge {
    pub fn new(
        id: impl Into<String>,
        tail: impl Into<String>,
        head: impl Into<String>,
        latency: CostPoly,
        risk: CostPoly,
    ) -> Self {
        Self {
            id: id.into(),
            tail: tail.into(),
            head: head.into(),
            latency,
            risk,
        }
    }
}

/// Single-commodity directed multigraph with index-based adjacency.
///
/// Construction only enforces structural invariants that the index needs
/// (declared endpoints, unique ids, no self-loops). Reachability, acyclicity
/// and coefficient signs are reported by [`validate_instance`].
#[derive(Debug, Clone)]
pub struct Network {
    nodes: Vec<String>,
    edges: Vec<Edge>,
    source: usize,
    sink: usize,
    tails: Vec<usize>,
    heads: Vec<usize>,
    out_edges: Vec<Vec<usize>>,
    in_edges: Vec<Vec<usize>>,
    node_rank: Vec<usize>,
    node_index: HashMap<String, usize>,
    edge_index: HashMap<String, usize>,
}

impl PartialEq for Network {
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes
            && self.edges == other.edges
            && self.source == other.source
            && self.sink == other.sink
    }
}

impl Network {
    pub fn new(
        nodes: Vec<String>,
        edges: Vec<Edge>,
        source: impl Into<String>,
        sink: impl Into<String>,
    ) -> Result<Self, NetworkError> {
        let source = source.into();
        let sink = sink.into();
        let mut node_index = HashMap::with_capacity(nodes.len());
        for (i, n) in nodes.iter().enumerate() {
            if node_index.insert(n.clone(), i).is_some() {
                return Err(NetworkError::DuplicateNode(n.clone()));
            }
        }
        let s = *node_index
            .get(&source)
            .ok_or_else(|| NetworkError::UnknownTerminal(source.clone()))?;
        let t = *node_index
            .get(&sink)
            .ok_or_else(|| NetworkError::UnknownTerminal(sink.clone()))?;
        if s == t {
            return Err(NetworkError::SourceIsSink);
        }

        let mut edge_index = HashMap::with_capacity(edges.len());
        let mut tails = Vec::with_capacity(edges.len());
        let mut heads = Vec::with_capacity(edges.len());
        let mut out_edges = vec![Vec::new(); nodes.len()];
        let mut in_edges = vec![Vec::new(); nodes.len()];
        for (i, e) in edges.iter().enumerate() {
            if edge_index.insert(e.id.clone(), i).is_some() {
                return Err(NetworkError::DuplicateEdge(e.id.clone()));
            }
            let lookup = |node: &String| {
                node_index
                    .get(node)
                    .copied()
                    .ok_or_else(|| NetworkError::UnknownNode {
                        edge: e.id.clone(),
                        node: node.clone(),
                    })
            };
            let u = lookup(&e.tail)?;
            let v = lookup(&e.head)?;
            if u == v {
                return Err(NetworkError::SelfLoop(e.id.clone()));
            }
            tails.push(u);
            heads.push(v);
            out_edges[u].push(i);
            in_edges[v].push(i);
        }
        for adj in out_edges.iter_mut().chain(in_edges.iter_mut()) {
            adj.sort_by(|&a, &b| edges[a].id.cmp(&edges[b].id));
        }

        let mut order: Vec<usize> = (0..nodes.len()).collect();
        order.sort_by(|&a, &b| nodes[a].cmp(&nodes[b]));
        let mut node_rank = vec![0; nodes.len()];
        for (rank, &n) in order.iter().enumerate() {
            node_rank[n] = rank;
        }

        Ok(Self {
            nodes,
            edges,
            source: s,
            sink: t,
            tails,
            heads,
            out_edges,
            in_edges,
            node_rank,
            node_index,
            edge_index,
        })
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn sink(&self) -> usize {
        self.sink
    }

    pub fn source_id(&self) -> &str {
        &self.nodes[self.source]
    }

    pub fn sink_id(&self) -> &str {
        &self.nodes[self.sink]
    }

    pub fn tail(&self, e: usize) -> usize {
        self.tails[e]
    }

    pub fn head(&self, e: usize) -> usize {
        self.heads[e]
    }

    /// Outgoing edges of `node`, ordered by edge id.
    pub fn out_edges(&self, node: usize) -> &[usize] {
        &self.out_edges[node]
    }

    /// Incoming edges of `node`, ordered by edge id.
    pub fn in_edges(&self, node: usize) -> &[usize] {
        &self.in_edges[node]
    }

    /// Position of `node` in the lexicographic order of node ids.
    pub fn node_rank(&self, node: usize) -> usize {
        self.node_rank[node]
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.node_index.get(id).copied()
    }

    pub fn edge_index(&self, id: &str) -> Option<usize> {
        self.edge_index.get(id).copied()
    }

    /// Translates a list of edge ids into a [`Path`].
    pub fn path_from_ids(&self, ids: &[&str]) -> Result<Path, NetworkError> {
        ids.iter()
            .map(|id| {
                self.edge_index(id)
                    .ok_or_else(|| NetworkError::UnknownEdge(id.to_string()))
            })
            .collect()
    }

    pub fn path_ids(&self, path: &[usize]) -> Vec<&str> {
        path.iter().map(|&e| self.edges[e].id.as_str()).collect()
    }

    /// Nodes reachable from `start` along directed edges.
    pub fn reachable_from(&self, start: usize) -> Vec<bool> {
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(u) = stack.pop() {
            for &e in &self.out_edges[u] {
                let v = self.heads[e];
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen
    }

    pub fn has_directed_cycle(&self) -> bool {
        let mut indeg: Vec<usize> = self.in_edges.iter().map(Vec::len).collect();
        let mut queue: Vec<usize> = (0..self.nodes.len()).filter(|&v| indeg[v] == 0).collect();
        let mut visited = 0;
        while let Some(u) = queue.pop() {
            visited += 1;
            for &e in &self.out_edges[u] {
                let v = self.heads[e];
                indeg[v] -= 1;
                if indeg[v] == 0 {
                    queue.push(v);
                }
            }
        }
        visited < self.nodes.len()
    }

    /// All simple source-sink paths in lexicographic order of their edge-id
    /// sequences.
    pub fn enumerate_simple_paths(&self, cap: usize) -> Result<PathSet, NetworkError> {
        let mut paths = Vec::new();
        let mut on_path = vec![false; self.nodes.len()];
        let mut current = Vec::new();
        on_path[self.source] = true;
        self.extend_paths(self.source, &mut on_path, &mut current, &mut paths, cap)?;
        paths.sort_by(|a: &Path, b: &Path| {
            a.iter()
                .map(|&e| &self.edges[e].id)
                .cmp(b.iter().map(|&e| &self.edges[e].id))
        });
        Ok(PathSet { paths })
    }

    fn extend_paths(
        &self,
        node: usize,
        on_path: &mut [bool],
        current: &mut Path,
        out: &mut Vec<Path>,
        cap: usize,
    ) -> Result<(), NetworkError> {
        if node == self.sink {
            if out.len() == cap {
                return Err(NetworkError::PathOverflow { cap });
            }
            out.push(current.clone());
            return Ok(());
        }
        for &e in &self.out_edges[node] {
            let v = self.heads[e];
            if on_path[v] {
                continue;
            }
            on_path[v] = true;
            current.push(e);
            self.extend_paths(v, on_path, current, out, cap)?;
            current.pop();
            on_path[v] = false;
        }
        Ok(())
    }

    /// Aggregates path flows into edge flows.
    pub fn edge_flow(&self, paths: &[Path], path_flow: &[f64]) -> Vec<f64> {
        let mut flow = vec![0.0; self.edges.len()];
        for (p, &f) in paths.iter().zip(path_flow) {
            for &e in p {
                flow[e] += f;
            }
        }
        flow
    }

    pub fn edge_latencies(&self, edge_flow: &[f64]) -> Vec<f64> {
        self.edges
            .iter()
            .zip(edge_flow)
            .map(|(e, &f)| e.latency.eval(f))
            .collect()
    }

    pub fn path_latency(&self, edge_flow: &[f64], path: &[usize]) -> f64 {
        path.iter()
            .map(|&e| self.edges[e].latency.eval(edge_flow[e]))
            .sum()
    }

    /// Total expected delay `sum_e f_e * l_e(f_e)`.
    pub fn social_cost(&self, edge_flow: &[f64]) -> f64 {
        self.edges
            .iter()
            .zip(edge_flow)
            .map(|(e, &f)| f * e.latency.eval(f))
            .sum()
    }

    /// Label-setting shortest path for nonnegative edge costs.
    ///
    /// Returns the distance and edge sequence, or `None` when the sink is
    /// unreachable. Equal-distance labels are settled in node-id order.
    pub fn shortest_path(&self, costs: &[f64]) -> Option<(f64, Path)> {
        let n = self.nodes.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut pred: Vec<Option<usize>> = vec![None; n];
        let mut done = vec![false; n];
        let mut heap = BinaryHeap::new();
        dist[self.source] = 0.0;
        heap.push(Label {
            dist: 0.0,
            rank: self.node_rank[self.source],
            node: self.source,
        });
        while let Some(Label { dist: d, node: u, .. }) = heap.pop() {
            if done[u] {
                continue;
            }
            done[u] = true;
            if u == self.sink {
                break;
            }
            for &e in &self.out_edges[u] {
                debug_assert!(costs[e] >= 0.0, "negative edge cost on {}", self.edges[e].id);
                let v = self.heads[e];
                let nd = d + costs[e];
                if !done[v] && nd < dist[v] {
                    dist[v] = nd;
                    pred[v] = Some(e);
                    heap.push(Label {
                        dist: nd,
                        rank: self.node_rank[v],
                        node: v,
                    });
                }
            }
        }
        if !dist[self.sink].is_finite() {
            return None;
        }
        let mut path = Vec::new();
        let mut v = self.sink;
        while let Some(e) = pred[v] {
            path.push(e);
            v = self.tails[e];
        }
        path.reverse();
        Some((dist[self.sink], path))
    }

    /// `S(f)`: minimum path latency at the given edge flows.
    pub fn shortest_path_length(&self, edge_flow: &[f64]) -> f64 {
        let lat = self.edge_latencies(edge_flow);
        self.shortest_path(&lat).map_or(f64::INFINITY, |(d, _)| d)
    }
}

#[derive(Debug, Clone, Copy)]
struct Label {
    dist: f64,
    rank: usize,
    node: usize,
}

impl PartialEq for Label {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Label {}

impl PartialOrd for Label {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Label {
    // Reversed so that `BinaryHeap` pops the smallest (dist, rank).
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.rank.cmp(&self.rank))
    }
}

/// Ordered set of simple source-sink paths.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PathSet {
    paths: Vec<Path>,
}

impl PathSet {
    pub fn paths(&self) -> &[Path] {
        &self.paths
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn position(&self, path: &[usize]) -> Option<usize> {
        self.paths.iter().position(|p| p == path)
    }

    pub fn into_paths(self) -> Vec<Path> {
        self.paths
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RiskModel {
    #[serde(rename = "mean-var")]
    MeanVar,
    #[serde(rename = "mean-stdev")]
    MeanStdev,
}

impl fmt::Display for RiskModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RiskModel::MeanVar => f.write_str("mean-var"),
            RiskModel::MeanStdev => f.write_str("mean-stdev"),
        }
    }
}

impl std::str::FromStr for RiskModel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mean-var" => Ok(RiskModel::MeanVar),
            "mean-stdev" => Ok(RiskModel::MeanStdev),
            other => Err(format!("unknown risk model `{other}`")),
        }
    }
}

/// Network, demand, risk-aversion coefficient and risk model.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub name: String,
    pub network: Network,
    pub demand: f64,
    pub gamma: f64,
    pub risk_model: RiskModel,
}

impl Instance {
    pub fn new(
        name: impl Into<String>,
        network: Network,
        demand: f64,
        gamma: f64,
        risk_model: RiskModel,
    ) -> Self {
        Self {
            name: name.into(),
            network,
            demand,
            gamma,
            risk_model,
        }
    }

    pub fn with_risk_model(mut self, risk_model: RiskModel) -> Self {
        self.risk_model = risk_model;
        self
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    /// Path variability: summed variance (mean-var) or the root of summed
    /// squared standard deviations (mean-stdev).
    pub fn path_risk(&self, edge_flow: &[f64], path: &[usize]) -> f64 {
        let edges = self.network.edges();
        match self.risk_model {
            RiskModel::MeanVar => path.iter().map(|&e| edges[e].risk.eval(edge_flow[e])).sum(),
            RiskModel::MeanStdev => path
                .iter()
                .map(|&e| edges[e].risk.eval(edge_flow[e]).powi(2))
                .sum::<f64>()
                .sqrt(),
        }
    }

    /// Risk-averse path cost `Q_p(f) = l_p(f) + gamma * risk_p(f)`.
    pub fn path_cost(&self, edge_flow: &[f64], path: &[usize]) -> f64 {
        self.network.path_latency(edge_flow, path) + self.gamma * self.path_risk(edge_flow, path)
    }

    pub fn social_cost(&self, edge_flow: &[f64]) -> f64 {
        self.network.social_cost(edge_flow)
    }
}

/// One reason an instance is unusable.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NegativeCoefficient { edge: String, function: &'static str },
    NonFiniteCoefficient { edge: String, function: &'static str },
    SinkUnreachable,
    DirectedCycle,
    NonPositiveDemand(f64),
    NegativeGamma(f64),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NegativeCoefficient { edge, function } => {
                write!(f, "negative coefficient in {function} of edge `{edge}`")
            }
            Violation::NonFiniteCoefficient { edge, function } => {
                write!(f, "non-finite coefficient in {function} of edge `{edge}`")
            }
            Violation::SinkUnreachable => f.write_str("sink unreachable"),
            Violation::DirectedCycle => f.write_str("directed cycle"),
            Violation::NonPositiveDemand(d) => write!(f, "demand must be positive, got {d}"),
            Violation::NegativeGamma(g) => write!(f, "gamma must be nonnegative, got {g}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Verdict {
    pub violations: Vec<Violation>,
}

impl Verdict {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("ok");
        }
        let parts: Vec<String> = self.violations.iter().map(ToString::to_string).collect();
        f.write_str(&parts.join("; "))
    }
}

pub fn validate_instance(instance: &Instance) -> Verdict {
    let mut violations = Vec::new();
    let net = &instance.network;
    for e in net.edges() {
        for (function, poly) in [("latency", &e.latency), ("risk", &e.risk)] {
            if !poly.is_finite() {
                violations.push(Violation::NonFiniteCoefficient {
                    edge: e.id.clone(),
                    function,
                });
            } else if !poly.is_nonnegative() {
                violations.push(Violation::NegativeCoefficient {
                    edge: e.id.clone(),
                    function,
                });
            }
        }
    }
    if !net.reachable_from(net.source())[net.sink()] {
        violations.push(Violation::SinkUnreachable);
    }
    if net.has_directed_cycle() {
        violations.push(Violation::DirectedCycle);
    }
    if !(instance.demand > 0.0) || !instance.demand.is_finite() {
        violations.push(Violation::NonPositiveDemand(instance.demand));
    }
    if !(instance.gamma >= 0.0) || !instance.gamma.is_finite() {
        violations.push(Violation::NegativeGamma(instance.gamma));
    }
    Verdict { violations }
}

/// Edges whose tail is reachable from the source and whose head reaches the sink.
pub fn edges_on_st_paths(net: &Network) -> HashSet<usize> {
    let fwd = net.reachable_from(net.source());
    let mut bwd = vec![false; net.node_count()];
    let mut stack = vec![net.sink()];
    bwd[net.sink()] = true;
    while let Some(v) = stack.pop() {
        for &e in net.in_edges(v) {
            let u = net.tail(e);
            if !bwd[u] {
                bwd[u] = true;
                stack.push(u);
            }
        }
    }
    (0..net.edge_count())
        .filter(|&e| fwd[net.tail(e)] && bwd[net.head(e)])
        .collect()
}
