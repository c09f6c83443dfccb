//! Price of risk aversion, variability ratio, bound checks and the
//! brute-force shortest-path oracle.

use serde::Serialize;
use thiserror::Error;

use crate::alternating::{
    classify_edges, eta_ceiling, find_alternating_path, signed_latencies, theoretical_pra_bound, AlternatingError,
    Direction, EdgeClass, CLASSIFY_REL_EPS,
};
use crate::network::{Instance, Network, NetworkError, Path, RiskModel, DEFAULT_PATH_CAP};
use crate::solver::{relative_gap, solve_equilibrium, EquilibriumResult, Objective, SolveError, SolverOptions};
use crate::sp::{braess_labels, sp_decompose};

/// Relative slack allowed on every bound check.
pub const CHECK_REL_SLACK: f64 = 1e-6;
/// Largest path set the brute-force oracle accepts.
pub const ORACLE_MAX_PATHS: usize = 12;
/// Grid points the oracle may visit before it coarsens the grid.
pub const ORACLE_MAX_POINTS: u128 = 5_000_000;

pub const CSV_HEADER: &str = "param,cost_rnwe,cost_rawe,pra,kappa,eta,bound_eta,bound_rho,pass";

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("{which} did not converge (gap {gap:e})")]
    NotConverged { which: &'static str, gap: f64 },
    #[error("expected a {expected} equilibrium, got {got}")]
    WrongObjective { expected: Objective, got: Objective },
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Alternating(#[from] AlternatingError),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error("oracle grid must be positive")]
    ZeroGrid,
}

/// Max over edges of `risk_e(f_e) / l_e(f_e)`, with `0/0 = 0` and
/// `positive/0 = inf`.
pub fn kappa_at_flow(inst: &Instance, edge_flow: &[f64]) -> f64 {
    inst.network
        .edges()
        .iter()
        .zip(edge_flow)
        .map(|(e, &f)| {
            let risk = e.risk.eval(f);
            let latency = e.latency.eval(f);
            if risk <= 0.0 {
                0.0
            } else if latency <= 0.0 {
                f64::INFINITY
            } else {
                risk / latency
            }
        })
        .fold(0.0, f64::max)
}

/// `S(f)`, the minimum path latency.
pub fn shortest_path_length(net: &Network, edge_flow: &[f64]) -> f64 {
    net.shortest_path_length(edge_flow)
}

/// Path with the least variability at `x` (first in enumeration order on
/// ties) and its latency.
pub fn min_risk_path_bound(inst: &Instance, x: &[f64]) -> Result<(Path, f64), NetworkError> {
    let paths = inst.network.enumerate_simple_paths(DEFAULT_PATH_CAP)?.into_paths();
    let best = paths
        .into_iter()
        .map(|p| (inst.path_risk(x, &p), p))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, p)| p)
        .expect("validated instance has a source-sink path");
    let latency = inst.network.path_latency(x, &best);
    Ok((best, latency))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SigmaCheck {
    pub sigma_p: f64,
    pub sigma_q: f64,
    pub sigma_r: f64,
    /// `sigma_p + sigma_q - sigma_r`
    pub lhs: f64,
    /// `sigma_b + sigma_c`
    pub rhs: f64,
    /// `sigma_r <= max(sigma_p, sigma_q)`
    pub precondition: bool,
    pub holds: bool,
}

/// Evaluates the Braess standard-deviation inequality for edge deviations
/// `[a, b, c, d, e]`.
pub fn braess_stdev_inequality(sigmas: [f64; 5]) -> SigmaCheck {
    let [a, b, c, d, e] = sigmas;
    let sigma_p = a.hypot(b);
    let sigma_q = c.hypot(d);
    let sigma_r = (a * a + e * e + d * d).sqrt();
    let lhs = sigma_p + sigma_q - sigma_r;
    let rhs = b + c;
    SigmaCheck {
        sigma_p,
        sigma_q,
        sigma_r,
        lhs,
        rhs,
        precondition: sigma_r <= sigma_p.max(sigma_q),
        holds: lhs <= rhs + 1e-9,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    /// Established for this instance class; a failure indicates a bug.
    Proven,
    /// Expected but only verified numerically.
    Empirical,
    /// Conjectural value reported for information.
    Unproven,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
    pub status: CheckStatus,
}

impl Check {
    pub fn new(name: &'static str, lhs: f64, rhs: f64, status: CheckStatus) -> Self {
        Self {
            name,
            lhs,
            rhs,
            pass: lhs <= rhs + CHECK_REL_SLACK * rhs.abs() + 1e-12,
            status,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArcReport {
    pub edge: String,
    pub direction: Direction,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PraReport {
    pub name: String,
    pub risk_model: RiskModel,
    pub gamma: f64,
    pub demand: f64,
    pub cost_rnwe: f64,
    pub cost_rawe: f64,
    /// `None` when the risk-neutral cost is zero.
    pub pra: Option<f64>,
    pub kappa: f64,
    pub kappa_unbounded: bool,
    /// Largest ratio over both solved flows, for diagnostics.
    pub kappa_over_solved: f64,
    pub eta: usize,
    pub eta_ceiling: usize,
    pub bound_eta: f64,
    pub bound_worstcase: f64,
    pub rho: f64,
    pub bound_rho: f64,
    pub series_parallel: bool,
    pub set_a: Vec<String>,
    pub set_b: Vec<String>,
    pub removed: Vec<String>,
    pub alternating_path: Vec<ArcReport>,
    pub min_risk_path: Vec<String>,
    pub gap_rnwe: f64,
    pub gap_rawe: f64,
    pub checks: Vec<Check>,
}

impl PraReport {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Failing checks that are established results.
    pub fn proven_failures(&self) -> impl Iterator<Item = &Check> {
        self.checks
            .iter()
            .filter(|c| !c.pass && c.status == CheckStatus::Proven)
    }

    pub fn proven_pass(&self) -> bool {
        self.proven_failures().next().is_none()
    }

    /// One CSV line (no newline) matching [`CSV_HEADER`].
    pub fn csv_row(&self, param: impl std::fmt::Display) -> String {
        let pra = self.pra.map_or(String::from("nan"), |p| p.to_string());
        format!(
            "{param},{},{},{pra},{},{},{},{},{}",
            self.cost_rnwe,
            self.cost_rawe,
            self.kappa,
            self.eta,
            self.bound_eta,
            self.bound_rho,
            self.proven_pass()
        )
    }
}

/// Ratio with the conventions `0/0 = 1` and `positive/0 = inf`.
fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else if num > 0.0 {
        f64::INFINITY
    } else {
        1.0
    }
}

/// Builds the full report from a converged risk-averse equilibrium `x` and
/// risk-neutral equilibrium `z` of the same instance.
pub fn pra_report(inst: &Instance, x: &EquilibriumResult, z: &EquilibriumResult) -> Result<PraReport, AnalysisError> {
    let averse = Objective::risk_averse(inst.risk_model);
    if x.flow.objective != averse {
        return Err(AnalysisError::WrongObjective {
            expected: averse,
            got: x.flow.objective,
        });
    }
    if z.flow.objective != Objective::RiskNeutral {
        return Err(AnalysisError::WrongObjective {
            expected: Objective::RiskNeutral,
            got: z.flow.objective,
        });
    }
    for (which, res) in [("risk-averse equilibrium", x), ("risk-neutral equilibrium", z)] {
        if !res.converged {
            return Err(AnalysisError::NotConverged {
                which,
                gap: res.relative_gap,
            });
        }
    }

    let net = &inst.network;
    let d = inst.demand;
    let gamma = inst.gamma;
    let stdev = inst.risk_model == RiskModel::MeanStdev;
    let (xf, zf) = (&x.flow.edge_flow, &z.flow.edge_flow);
    let cost_rawe = net.social_cost(xf);
    let cost_rnwe = net.social_cost(zf);
    let pra = (cost_rnwe > 0.0).then(|| cost_rawe / cost_rnwe);

    let kappa = kappa_at_flow(inst, xf);
    let kappa_over_solved = kappa.max(kappa_at_flow(inst, zf));
    // gamma * kappa, with a zero coefficient silencing an unbounded ratio.
    let gk = if gamma == 0.0 { 0.0 } else { gamma * kappa };
    let bounded = gk.is_finite();

    let partition = classify_edges(xf, zf, CLASSIFY_REL_EPS * d);
    let path = find_alternating_path(&partition, net)?;
    let eta = path.forward_runs;
    let ceiling = eta_ceiling(net.node_count());
    let bound_eta = theoretical_pra_bound(gamma, kappa, eta);
    let bound_worstcase = theoretical_pra_bound(gamma, kappa, ceiling);
    let rho = ratio(shortest_path_length(net, xf), shortest_path_length(net, zf));
    let bound_rho = if gk == 0.0 { rho } else { (1.0 + gk) * rho };

    let series_parallel = sp_decompose(net).is_series_parallel();
    let braess = braess_labels(net);
    let all_forward = path.is_all_forward();

    let (ax, bx) = signed_latencies(inst, xf, &path);
    let (az, bz) = signed_latencies(inst, zf, &path);
    let lemma1_x = (1.0 + gk) * ax - bx;
    let lemma1_z = (1.0 + gk) * az - bz;
    let lemma2 = az - bz;

    let min_cost = relative_gap(inst, &x.flow, averse)?.min_cost;
    let (p_star, l_star) = min_risk_path_bound(inst, xf)?;

    use CheckStatus::*;
    // Status of bounds that rest on the alternating-path upper bound for x.
    let (lemma1_status, theorem_status) = if !stdev || all_forward {
        (Proven, Proven)
    } else if braess.is_some() {
        (Proven, Empirical)
    } else {
        (Unproven, Unproven)
    };

    let mut checks = vec![Check::new("rawe-path-cost", cost_rawe, d * min_cost, Proven)];
    if bounded {
        checks.push(Check::new(
            "rawe-latency-blowup",
            cost_rawe,
            d * (1.0 + gk) * shortest_path_length(net, xf),
            Proven,
        ));
    }
    checks.push(Check::new("min-risk-path", cost_rawe, d * l_star, Proven));
    if bounded {
        checks.push(Check::new("lemma1-rawe-upper", cost_rawe, d * lemma1_x, lemma1_status));
        checks.push(Check::new("lemma1-monotone", lemma1_x, lemma1_z, Proven));
    }
    checks.push(Check::new("lemma2-rnwe-lower", d * lemma2, cost_rnwe, Proven));
    if bounded {
        checks.push(Check::new("lemma2-chain", d * lemma1_z, cost_rnwe + gk * d * az, Proven));
    }
    checks.push(Check::new("forward-runs", d * az, eta as f64 * cost_rnwe, Proven));
    checks.push(Check::new("eta-ceiling", eta as f64, ceiling as f64, Proven));
    if bounded {
        checks.push(Check::new("theorem-eta", cost_rawe, bound_eta * cost_rnwe, theorem_status));
        checks.push(Check::new("worst-case", cost_rawe, bound_worstcase * cost_rnwe, theorem_status));
        if rho.is_finite() {
            checks.push(Check::new("rho", cost_rawe, bound_rho * cost_rnwe, Proven));
        }
    }
    if stdev {
        let edges = net.edges();
        let excess = net
            .enumerate_simple_paths(DEFAULT_PATH_CAP)?
            .paths()
            .iter()
            .map(|p| inst.path_risk(xf, p) - p.iter().map(|&e| edges[e].risk.eval(xf[e])).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max);
        checks.push(Check::new("stdev-norm", excess, 0.0, Proven));
        if let Some(l) = braess {
            let sigma = |e: usize| edges[e].risk.eval(xf[e]);
            let s = braess_stdev_inequality([sigma(l.a), sigma(l.b), sigma(l.c), sigma(l.d), sigma(l.e)]);
            if s.precondition {
                checks.push(Check::new("braess-sigma", s.lhs, s.rhs, Proven));
            }
        }
    }
    if series_parallel {
        checks.push(Check::new("sp-eta-one", eta as f64, 1.0, Proven));
    }

    let ids = |class| partition.ids(net, class).into_iter().map(String::from).collect();
    Ok(PraReport {
        name: inst.name.clone(),
        risk_model: inst.risk_model,
        gamma,
        demand: d,
        cost_rnwe,
        cost_rawe,
        pra,
        kappa,
        kappa_unbounded: kappa.is_infinite(),
        kappa_over_solved,
        eta,
        eta_ceiling: ceiling,
        bound_eta,
        bound_worstcase,
        rho,
        bound_rho,
        series_parallel,
        set_a: ids(EdgeClass::A),
        set_b: ids(EdgeClass::B),
        removed: ids(EdgeClass::Removed),
        alternating_path: path
            .describe(net)
            .into_iter()
            .zip(&path.arcs)
            .map(|((id, _), arc)| ArcReport {
                edge: id.to_string(),
                direction: arc.direction,
            })
            .collect(),
        min_risk_path: net.path_ids(&p_star).into_iter().map(String::from).collect(),
        gap_rnwe: z.relative_gap,
        gap_rawe: x.relative_gap,
        checks,
    })
}

/// Solves the risk-averse and risk-neutral equilibria.
pub fn solve_pair(
    inst: &Instance,
    opts: &SolverOptions,
) -> Result<(EquilibriumResult, EquilibriumResult), SolveError> {
    let x = solve_equilibrium(inst, Objective::risk_averse(inst.risk_model), opts)?;
    let z = solve_equilibrium(inst, Objective::RiskNeutral, opts)?;
    Ok((x, z))
}

/// Solves both equilibria and builds the report.
pub fn analyze(inst: &Instance, opts: &SolverOptions) -> Result<PraReport, AnalysisError> {
    let (x, z) = solve_pair(inst, opts)?;
    pra_report(inst, &x, &z)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleResult {
    pub paths: Vec<Vec<String>>,
    pub best_path_flow: Vec<f64>,
    pub best_edge_flow: Vec<f64>,
    pub best_value: f64,
    /// Grid actually used; smaller than requested when the path set is large.
    pub effective_grid: usize,
    /// `sum_e l_e'(d)`, a crude Lipschitz constant for `S`.
    pub lipschitz: f64,
    /// `1e-6 + d * lipschitz / effective_grid`.
    pub slack: f64,
}

fn compositions(units: usize, parts: usize) -> u128 {
    // C(units + parts - 1, parts - 1), saturating.
    let k = parts.saturating_sub(1) as u128;
    let mut acc: u128 = 1;
    for i in 1..=k {
        acc = acc.saturating_mul(units as u128 + i) / i;
        if acc > ORACLE_MAX_POINTS * 1000 {
            return u128::MAX;
        }
    }
    acc
}

/// Maximizes `S(f)` over path flows on the demand simplex with resolution
/// `d / grid`, by exhaustive enumeration.
///
/// If the simplex has more than [`ORACLE_MAX_POINTS`] grid points the grid is
/// coarsened; the result reports the grid used.
pub fn max_shortest_path_oracle(inst: &Instance, grid: usize) -> Result<OracleResult, AnalysisError> {
    if grid == 0 {
        return Err(AnalysisError::ZeroGrid);
    }
    let net = &inst.network;
    let paths = net.enumerate_simple_paths(ORACLE_MAX_PATHS)?.into_paths();
    let d = inst.demand;
    let mut g = grid;
    while g > 1 && compositions(g, paths.len()) > ORACLE_MAX_POINTS {
        g -= 1;
    }
    let step = d / g as f64;

    // Latency of every edge at every reachable multiple of the step.
    let table: Vec<Vec<f64>> = net
        .edges()
        .iter()
        .map(|e| (0..=g).map(|u| e.latency.eval(u as f64 * step)).collect())
        .collect();

    struct Search<'a> {
        paths: &'a [Path],
        table: &'a [Vec<f64>],
        units: Vec<usize>,
        edge_units: Vec<usize>,
        best: f64,
        best_units: Vec<usize>,
    }

    impl Search<'_> {
        fn value(&self) -> f64 {
            self.paths
                .iter()
                .map(|p| p.iter().map(|&e| self.table[e][self.edge_units[e]]).sum::<f64>())
                .fold(f64::INFINITY, f64::min)
        }

        fn assign(&mut self, i: usize, amount: usize, sign: bool) {
            self.units[i] = if sign { self.units[i] + amount } else { self.units[i] - amount };
            for &e in &self.paths[i] {
                if sign {
                    self.edge_units[e] += amount;
                } else {
                    self.edge_units[e] -= amount;
                }
            }
        }

        fn go(&mut self, i: usize, left: usize) {
            if i + 1 == self.paths.len() {
                self.assign(i, left, true);
                let v = self.value();
                if v > self.best {
                    self.best = v;
                    self.best_units.clone_from(&self.units);
                }
                self.assign(i, left, false);
                return;
            }
            for u in 0..=left {
                self.assign(i, u, true);
                self.go(i + 1, left - u);
                self.assign(i, u, false);
            }
        }
    }

    let mut search = Search {
        paths: &paths,
        table: &table,
        units: vec![0; paths.len()],
        edge_units: vec![0; net.edge_count()],
        best: f64::NEG_INFINITY,
        best_units: Vec::new(),
    };
    search.go(0, g);

    let best_path_flow: Vec<f64> = search.best_units.iter().map(|&u| u as f64 * step).collect();
    let best_edge_flow = net.edge_flow(&paths, &best_path_flow);
    let lipschitz: f64 = net.edges().iter().map(|e| e.latency.derivative(d)).sum();
    Ok(OracleResult {
        paths: paths.iter().map(|p| net.path_ids(p).into_iter().map(String::from).collect()).collect(),
        best_path_flow,
        best_edge_flow,
        best_value: search.best,
        effective_grid: g,
        lipschitz,
        slack: 1e-6 + d * lipschitz / g as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{braess, pigou, zigzag};
    use crate::network::Edge;
    use crate::poly::CostPoly;

    fn parallel_x_and_1() -> Instance {
        let net = Network::new(
            vec!["s".into(), "t".into()],
            vec![
                Edge::new("e1", "s", "t", CostPoly::affine(0.0, 1.0), CostPoly::zero()),
                Edge::new("e2", "s", "t", CostPoly::constant(1.0), CostPoly::zero()),
            ],
            "s",
            "t",
        )
        .unwrap();
        Instance::new("parallel", net, 1.0, 1.0, RiskModel::MeanVar)
    }

    #[test]
    fn kappa_examples() {
        let inst = braess(0.1, RiskModel::MeanVar);
        let x = [1.0, 0.0, 0.0, 1.0, 1.0];
        assert!((kappa_at_flow(&inst, &x) - 0.1).abs() < 1e-15);
        let inst = pigou(1.0, 1.0, RiskModel::MeanVar);
        assert_eq!(kappa_at_flow(&inst, &[1.0, 0.0]), 1.0);
        assert_eq!(kappa_at_flow(&zigzag(3), &[0.5; 12]), 0.0);
    }

    #[test]
    fn kappa_unbounded_when_latency_vanishes() {
        let net = Network::new(
            vec!["s".into(), "t".into()],
            vec![Edge::new("e", "s", "t", CostPoly::affine(0.0, 1.0), CostPoly::constant(0.5))],
            "s",
            "t",
        )
        .unwrap();
        let inst = Instance::new("x", net, 1.0, 1.0, RiskModel::MeanVar);
        assert_eq!(kappa_at_flow(&inst, &[0.0]), f64::INFINITY);
        assert_eq!(kappa_at_flow(&inst, &[1.0]), 0.5);
    }

    #[test]
    fn min_risk_paths() {
        let inst = braess(0.1, RiskModel::MeanVar);
        let x = [1.0, 0.0, 0.0, 1.0, 1.0];
        let (p, l) = min_risk_path_bound(&inst, &x).unwrap();
        assert_eq!(inst.network.path_ids(&p), ["a", "e", "d"]);
        assert!((l - 1.3).abs() < 1e-12);

        let inst = pigou(1.0, 1.0, RiskModel::MeanVar);
        let (p, l) = min_risk_path_bound(&inst, &[1.0, 0.0]).unwrap();
        assert_eq!(inst.network.path_ids(&p), ["e1"]);
        assert_eq!(l, 2.0);
    }

    #[test]
    fn sigma_inequality_examples() {
        let s = braess_stdev_inequality([0.0, 1.0, 1.0, 0.0, 0.0]);
        assert_eq!((s.lhs, s.rhs), (2.0, 2.0));
        assert!(s.precondition && s.holds);
        let s = braess_stdev_inequality([0.0; 5]);
        assert_eq!((s.lhs, s.rhs), (0.0, 0.0));
        assert!(s.holds);
        let s = braess_stdev_inequality([3.0, 4.0, 0.0, 0.0, 0.0]);
        assert_eq!((s.sigma_p, s.sigma_q, s.sigma_r), (5.0, 0.0, 3.0));
        assert!(s.precondition);
        assert_eq!((s.lhs, s.rhs), (2.0, 4.0));
        assert!(s.holds);
    }

    #[test]
    fn shortest_path_length_examples() {
        let inst = parallel_x_and_1();
        assert_eq!(shortest_path_length(&inst.network, &[1.0, 0.0]), 1.0);
        let pigou = pigou(1.0, 1.0, RiskModel::MeanVar);
        // (1 + gamma kappa) x at zero flow.
        assert_eq!(shortest_path_length(&pigou.network, &[0.0, 0.0]), 0.0);
    }

    #[test]
    fn oracle_examples() {
        let res = max_shortest_path_oracle(&parallel_x_and_1(), 100).unwrap();
        assert_eq!(res.effective_grid, 100);
        assert!((res.best_value - 1.0).abs() < 1e-12);

        let res = max_shortest_path_oracle(&zigzag(2), 100).unwrap();
        assert!((res.best_value - 1.0).abs() < 1e-12);

        let net = Network::new(
            vec!["s".into(), "t".into()],
            vec![Edge::new("e", "s", "t", CostPoly::new(vec![1.0, 0.0, 2.0]), CostPoly::zero())],
            "s",
            "t",
        )
        .unwrap();
        let inst = Instance::new("one", net, 1.5, 1.0, RiskModel::MeanVar);
        let res = max_shortest_path_oracle(&inst, 7).unwrap();
        assert!((res.best_value - (1.0 + 2.0 * 2.25)).abs() < 1e-12);
        assert!(matches!(max_shortest_path_oracle(&inst, 0), Err(AnalysisError::ZeroGrid)));
    }

    #[test]
    fn oracle_coarsens_large_path_sets() {
        let res = max_shortest_path_oracle(&zigzag(4), 100).unwrap();
        assert_eq!(res.paths.len(), 10);
        assert!(res.effective_grid < 100);
        assert!(compositions(res.effective_grid, 10) <= ORACLE_MAX_POINTS);
        assert!(compositions(res.effective_grid + 1, 10) > ORACLE_MAX_POINTS);
        assert!((res.best_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn compositions_count() {
        assert_eq!(compositions(100, 1), 1);
        assert_eq!(compositions(100, 2), 101);
        assert_eq!(compositions(3, 3), 10);
    }

    fn report(inst: &Instance) -> PraReport {
        analyze(inst, &SolverOptions::default().with_tol(1e-12)).unwrap()
    }

    #[test]
    fn pigou_report() {
        let r = report(&pigou(1.0, 1.0, RiskModel::MeanVar));
        assert!((r.pra.unwrap() - 2.0).abs() < 1e-6);
        assert_eq!(r.eta, 1);
        assert!((r.bound_eta - 2.0).abs() < 1e-9);
        assert!(r.series_parallel);
        assert!(r.checks.iter().all(|c| c.pass), "{:?}", r.checks);
    }

    #[test]
    fn braess_report() {
        let r = report(&braess(0.1, RiskModel::MeanVar));
        assert!((r.cost_rnwe - 1.1).abs() < 1e-6);
        assert!((r.cost_rawe - 1.3).abs() < 1e-6);
        assert!((r.pra.unwrap() - 1.3 / 1.1).abs() < 1e-6);
        assert!((r.kappa - 0.1).abs() < 1e-6);
        assert_eq!(r.eta, 2);
        assert!((r.bound_eta - 1.2).abs() < 1e-6);
        assert_eq!(r.set_a, ["b", "c"]);
        assert_eq!(r.set_b, ["a", "d", "e"]);
        assert!(!r.series_parallel);
        assert!(r.checks.iter().all(|c| c.pass), "{:?}", r.checks);
        let row = r.csv_row(0.1);
        assert_eq!(row.split(',').count(), CSV_HEADER.split(',').count());
    }

    #[test]
    fn braess_stdev_report_has_sigma_checks() {
        let r = report(&braess(0.1, RiskModel::MeanStdev));
        assert!(r.check("stdev-norm").unwrap().pass);
        assert_eq!(r.check("theorem-eta").unwrap().status, CheckStatus::Empirical);
        assert!(r.proven_pass(), "{:?}", r.checks);
    }

    #[test]
    fn gamma_zero_report_has_unit_pra() {
        let r = report(&braess(0.3, RiskModel::MeanVar).with_gamma(0.0));
        assert!((r.pra.unwrap() - 1.0).abs() < 1e-6);
        assert_eq!(r.bound_eta, 1.0);
    }

    #[test]
    fn unconverged_inputs_are_rejected() {
        let inst = braess(0.1, RiskModel::MeanVar);
        let opts = SolverOptions::default().with_max_iter(0);
        let (x, z) = solve_pair(&inst, &opts).unwrap();
        assert!(matches!(pra_report(&inst, &x, &z), Err(AnalysisError::NotConverged { .. })));
        assert!(matches!(pra_report(&inst, &z, &x), Err(AnalysisError::WrongObjective { .. })));
    }

    #[test]
    fn zero_cost_network_has_no_pra() {
        let net = Network::new(
            vec!["s".into(), "t".into()],
            vec![Edge::new("e", "s", "t", CostPoly::zero(), CostPoly::zero())],
            "s",
            "t",
        )
        .unwrap();
        let r = report(&Instance::new("free", net, 1.0, 1.0, RiskModel::MeanVar));
        assert_eq!(r.pra, None);
        assert_eq!(r.cost_rnwe, 0.0);
        assert!(r.csv_row(1.0).contains(",nan,"));
    }
}
