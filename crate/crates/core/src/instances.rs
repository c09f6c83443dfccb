//! Generators for the Pigou, Braess and zigzag families and for random
//! series-parallel and random acyclic instances.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::network::{Edge, Instance, Network, RiskModel};
use crate::poly::CostPoly;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenerateError {
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    Pigou { gamma: f64, kappa: f64 },
    /// Worst-case Braess member with `alpha = 2v`.
    Braess { v: f64 },
    BraessGeneral { alpha: f64, v: f64 },
    Zigzag { k: usize },
    RandomSp { budget: usize, seed: u64 },
    RandomGeneral { nodes: usize, edges: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FamilyParams {
    pub family: Family,
    pub risk_model: RiskModel,
}

impl FamilyParams {
    pub fn new(family: Family, risk_model: RiskModel) -> Self {
        Self { family, risk_model }
    }

    pub fn check(&self) -> Result<(), GenerateError> {
        let bad = |msg: String| Err(GenerateError::InvalidParam(msg));
        match self.family {
            Family::Pigou { gamma, kappa } => {
                if !(gamma >= 0.0 && kappa >= 0.0 && gamma.is_finite() && kappa.is_finite()) {
                    return bad(format!("pigou needs finite gamma, kappa >= 0 (got {gamma}, {kappa})"));
                }
            }
            Family::Braess { v } => {
                if !(v > 0.0 && v <= 1.0) {
                    return bad(format!("braess needs 0 < v <= 1 (got {v})"));
                }
            }
            Family::BraessGeneral { alpha, v } => {
                if !(v > 0.0 && v <= 1.0) {
                    return bad(format!("braess_general needs 0 < v <= 1 (got {v})"));
                }
                if !(alpha >= 2.0 * v && alpha <= 1.0 + v) {
                    return bad(format!(
                        "braess_general needs 2v <= alpha <= 1 + v (got alpha={alpha}, v={v})"
                    ));
                }
            }
            Family::Zigzag { k } => {
                if k < 2 {
                    return bad(format!("zigzag needs k >= 2 (got {k})"));
                }
            }
            Family::RandomSp { budget, .. } => {
                if budget == 0 {
                    return bad("random_sp needs a positive edge budget".into());
                }
            }
            Family::RandomGeneral { nodes, edges, .. } => {
                if nodes < 2 || edges + 1 < nodes {
                    return bad(format!(
                        "random_general needs nodes >= 2 and edges >= nodes - 1 (got {nodes}, {edges})"
                    ));
                }
            }
        }
        Ok(())
    }
}

pub fn generate(params: &FamilyParams) -> Result<Instance, GenerateError> {
    params.check()?;
    let model = params.risk_model;
    Ok(match params.family {
        Family::Pigou { gamma, kappa } => pigou(gamma, kappa, model),
        Family::Braess { v } => braess(v, model),
        Family::BraessGeneral { alpha, v } => braess_general(alpha, v, model),
        Family::Zigzag { k } => zigzag(k).with_risk_model(model),
        Family::RandomSp { budget, seed } => random_sp(budget, seed).with_risk_model(model),
        Family::RandomGeneral { nodes, edges, seed } => {
            random_general(nodes, edges, seed).with_risk_model(model)
        }
    })
}

fn build(
    name: String,
    nodes: &[&str],
    edges: Vec<Edge>,
    gamma: f64,
    risk_model: RiskModel,
) -> Instance {
    let nodes = nodes.iter().map(|n| n.to_string()).collect();
    let network = Network::new(nodes, edges, "s", "t").expect("generator builds a valid network");
    Instance::new(name, network, 1.0, gamma, risk_model)
}

/// Two parallel links: `(1 + gamma*kappa) x` with no risk, and constant 1
/// with risk `kappa`.
pub fn pigou(gamma: f64, kappa: f64, risk_model: RiskModel) -> Instance {
    let edges = vec![
        Edge::new("e1", "s", "t", CostPoly::affine(0.0, 1.0 + gamma * kappa), CostPoly::zero()),
        Edge::new("e2", "s", "t", CostPoly::constant(1.0), CostPoly::constant(kappa)),
    ];
    build(format!("pigou(gamma={gamma},kappa={kappa})"), &["s", "t"], edges, gamma, risk_model)
}

/// Braess network with `alpha = 2v`, i.e. `l_a = l_d = 2v x`, `l_b = l_c = 1`,
/// `l_e = 1 - v`, risk `v` on `b` and `c`.
///
/// # Panics
/// If `v` is outside `(0, 1]`.
pub fn braess(v: f64, risk_model: RiskModel) -> Instance {
    assert!(v > 0.0 && v <= 1.0, "braess needs 0 < v <= 1");
    let mut inst = braess_general(2.0 * v, v, risk_model);
    inst.name = format!("braess(v={v})");
    inst
}

/// Braess network `s->u (a), u->t (b), s->w (c), w->t (d), u->w (e)` with
/// `l_a = l_d = alpha x`, `l_b = l_c = 1`, `l_e = 1 - alpha + v`, risk `v` on
/// `b` and `c`, `gamma = 1`, unit demand.
pub fn braess_general(alpha: f64, v: f64, risk_model: RiskModel) -> Instance {
    let risky = CostPoly::constant(v);
    let edges = vec![
        Edge::new("a", "s", "u", CostPoly::affine(0.0, alpha), CostPoly::zero()),
        Edge::new("b", "u", "t", CostPoly::constant(1.0), risky.clone()),
        Edge::new("c", "s", "w", CostPoly::constant(1.0), risky),
        Edge::new("d", "w", "t", CostPoly::affine(0.0, alpha), CostPoly::zero()),
        Edge::new("e", "u", "w", CostPoly::constant(1.0 - alpha + v), CostPoly::zero()),
    ];
    build(
        format!("braess_general(alpha={alpha},v={v})"),
        &["s", "u", "w", "t"],
        edges,
        1.0,
        risk_model,
    )
}

/// Non-series-parallel ladder with `k` unit-slope "horizontal" edges
/// `u_i -> w_i`, free entries `s -> u_i`, free exits `w_i -> t` and free
/// connectors `w_i -> u_{i+1}`. No risk, unit demand.
///
/// # Panics
/// If `k < 2`.
pub fn zigzag(k: usize) -> Instance {
    assert!(k >= 2, "zigzag needs k >= 2");
    let width = k.to_string().len();
    let u = |i: usize| format!("u{i:0width$}");
    let w = |i: usize| format!("w{i:0width$}");
    let mut node_ids = vec!["s".to_string()];
    node_ids.extend((1..=k).map(u));
    node_ids.extend((1..=k).map(w));
    node_ids.push("t".to_string());

    let mut edges = Vec::with_capacity(4 * k);
    for i in 1..=k {
        edges.push(Edge::new(format!("in{i:0width$}"), "s", u(i), CostPoly::zero(), CostPoly::zero()));
        edges.push(Edge::new(
            format!("h{i:0width$}"),
            u(i),
            w(i),
            CostPoly::affine(0.0, 1.0),
            CostPoly::zero(),
        ));
        edges.push(Edge::new(format!("out{i:0width$}"), w(i), "t", CostPoly::zero(), CostPoly::zero()));
        if i < k {
            edges.push(Edge::new(
                format!("link{i:0width$}"),
                w(i),
                u(i + 1),
                CostPoly::zero(),
                CostPoly::zero(),
            ));
        }
    }
    let network = Network::new(node_ids, edges, "s", "t").expect("zigzag network is valid");
    Instance::new(format!("zigzag(k={k})"), network, 1.0, 1.0, RiskModel::MeanVar)
}

/// Latency of degree at most 3 with nonnegative coefficients, never
/// identically zero.
fn sample_latency(rng: &mut ChaCha8Rng) -> CostPoly {
    let degree = rng.gen_range(0..=3);
    let mut coeffs: Vec<f64> = (0..=degree)
        .map(|i| {
            let keep = if i == 0 { 0.75 } else { 0.6 };
            if rng.gen_bool(keep) {
                rng.gen_range(0.1..2.0)
            } else {
                0.0
            }
        })
        .collect();
    if coeffs.iter().all(|&c| c == 0.0) {
        coeffs[0] = rng.gen_range(0.1..2.0);
    }
    CostPoly::new(coeffs)
}

/// Risk polynomial dominated coefficientwise by `kappa * latency`, so the
/// risk-to-latency ratio stays below `kappa` at every flow.
fn sample_risk(rng: &mut ChaCha8Rng, latency: &CostPoly, kappa: f64) -> CostPoly {
    let coeffs = latency
        .coeffs()
        .iter()
        .map(|&c| {
            if c > 0.0 && rng.gen_bool(0.6) {
                c * kappa * rng.gen_range(0.0..=1.0)
            } else {
                0.0
            }
        })
        .collect();
    CostPoly::new(coeffs)
}

fn sample_gamma_kappa(rng: &mut ChaCha8Rng) -> (f64, f64) {
    (rng.gen_range(0.2..2.0), rng.gen_range(0.1..1.5))
}

/// Random series-parallel instance grown from a single edge by `budget - 1`
/// random subdivisions or duplications.
pub fn random_sp(budget: usize, seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (gamma, kappa) = sample_gamma_kappa(&mut rng);
    let mut nodes = vec!["s".to_string(), "t".to_string()];
    let mut arcs: Vec<(String, String)> = vec![("s".into(), "t".into())];
    while arcs.len() < budget.max(1) {
        let i = rng.gen_range(0..arcs.len());
        if rng.gen_bool(0.5) {
            let mid = format!("n{:03}", nodes.len() - 1);
            nodes.push(mid.clone());
            let (tail, head) = arcs[i].clone();
            arcs[i] = (tail, mid.clone());
            arcs.push((mid, head));
        } else {
            let dup = arcs[i].clone();
            arcs.push(dup);
        }
    }
    let edges = arcs
        .into_iter()
        .enumerate()
        .map(|(i, (tail, head))| {
            let latency = sample_latency(&mut rng);
            let risk = sample_risk(&mut rng, &latency, kappa);
            Edge::new(format!("e{i:03}"), tail, head, latency, risk)
        })
        .collect();
    let network = Network::new(nodes, edges, "s", "t").expect("sp construction is valid");
    Instance::new(
        format!("random_sp(budget={budget},seed={seed})"),
        network,
        1.0,
        gamma,
        RiskModel::MeanVar,
    )
}

/// Random DAG on nodes `v0 < v1 < ... ` with a Hamiltonian spine from source
/// to sink plus extra forward edges (parallel edges allowed).
pub fn random_general(nodes: usize, edges: usize, seed: u64) -> Instance {
    let n = nodes.max(2);
    let m = edges.max(n - 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (gamma, kappa) = sample_gamma_kappa(&mut rng);
    let node_ids: Vec<String> = (0..n).map(|i| format!("v{i:02}")).collect();
    let mut arcs: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
    while arcs.len() < m {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a != b {
            arcs.push((a.min(b), a.max(b)));
        }
    }
    let edge_list = arcs
        .into_iter()
        .enumerate()
        .map(|(i, (a, b))| {
            let latency = sample_latency(&mut rng);
            let risk = sample_risk(&mut rng, &latency, kappa);
            Edge::new(format!("e{i:03}"), node_ids[a].clone(), node_ids[b].clone(), latency, risk)
        })
        .collect();
    let source = node_ids[0].clone();
    let sink = node_ids[n - 1].clone();
    let network = Network::new(node_ids, edge_list, source, sink).expect("dag construction is valid");
    Instance::new(
        format!("random_general(nodes={n},edges={m},seed={seed})"),
        network,
        1.0,
        gamma,
        RiskModel::MeanVar,
    )
}
