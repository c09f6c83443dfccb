//! Instance documents: JSON with a fixed canonical field order.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::network::{validate_instance, Edge, Instance, Network, NetworkError, RiskModel, Verdict};
use crate::poly::CostPoly;

#[derive(Debug, Error)]
pub enum ReadError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("malformed network: {0}")]
    Network(#[from] NetworkError),
    #[error("invalid instance: {0}")]
    Invalid(Verdict),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeDoc {
    id: String,
    tail: String,
    head: String,
    latency: CostPoly,
    risk: CostPoly,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDoc {
    name: String,
    nodes: Vec<String>,
    edges: Vec<EdgeDoc>,
    source: String,
    sink: String,
    demand: f64,
    gamma: f64,
    risk_model: RiskModel,
}

/// Parses and validates an instance document.
pub fn read_instance(bytes: &[u8]) -> Result<Instance, ReadError> {
    let doc: InstanceDoc = serde_json::from_slice(bytes).map_err(|e| ReadError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let edges = doc
        .edges
        .into_iter()
        .map(|e| Edge::new(e.id, e.tail, e.head, e.latency, e.risk))
        .collect();
    let network = Network::new(doc.nodes, edges, doc.source, doc.sink)?;
    let instance = Instance::new(doc.name, network, doc.demand, doc.gamma, doc.risk_model);
    let verdict = validate_instance(&instance);
    if !verdict.is_ok() {
        return Err(ReadError::Invalid(verdict));
    }
    Ok(instance)
}

/// Canonical serialization (pretty-printed, trailing newline).
pub fn write_instance(instance: &Instance) -> Vec<u8> {
    let net = &instance.network;
    let doc = InstanceDoc {
        name: instance.name.clone(),
        nodes: net.nodes().to_vec(),
        edges: net
            .edges()
            .iter()
            .map(|e| EdgeDoc {
                id: e.id.clone(),
                tail: e.tail.clone(),
                head: e.head.clone(),
                latency: e.latency.clone(),
                risk: e.risk.clone(),
            })
            .collect(),
        source: net.source_id().to_string(),
        sink: net.sink_id().to_string(),
        demand: instance.demand,
        gamma: instance.gamma,
        risk_model: instance.risk_model,
    };
    let mut out = serde_json::to_vec_pretty(&doc).expect("instance documents always serialize");
    out.push(b'\n');
    out
}
