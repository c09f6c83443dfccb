use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use riskroute::analysis::{analyze, braess_stdev_inequality, max_shortest_path_oracle, shortest_path_length};
use riskroute::instances::{random_general, random_sp, zigzag};
use riskroute::network::Instance;
use riskroute::solver::{solve_equilibrium, Objective, SolverOptions};
use riskroute::sp::sp_decompose;

use crate::args::{Suite, VerifyArgs};
use crate::{pool, CliError};

/// Largest path set the oracle suites sample.
const ORACLE_SUITE_PATHS: usize = 6;

#[derive(Debug, Clone, PartialEq)]
pub struct CaseResult {
    pub label: String,
    pub pass: bool,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteSummary {
    pub suite: Suite,
    pub cases: Vec<CaseResult>,
}

impl SuiteSummary {
    pub fn passed(&self) -> usize {
        self.cases.iter().filter(|c| c.pass).count()
    }

    pub fn all_pass(&self) -> bool {
        self.passed() == self.cases.len()
    }
}

pub fn default_count(suite: Suite) -> u64 {
    match suite {
        Suite::BoundChain => 200,
        Suite::SpTheorem => 100,
        Suite::SigmaLemma => 100_000,
        Suite::Oracle => 50,
    }
}

/// Random acyclic instance with 2..=8 nodes for the given seed.
pub fn general_instance(seed: u64) -> Instance {
    let nodes = 2 + (seed % 7) as usize;
    let edges = nodes - 1 + (seed / 7 % (2 * nodes as u64 + 1)) as usize;
    random_general(nodes, edges, seed)
}

pub fn sp_instance(seed: u64) -> Instance {
    random_sp(2 + (seed % 12) as usize, seed)
}

fn case(label: String, pass: bool, note: String) -> CaseResult {
    CaseResult { label, pass, note }
}

fn bound_chain(seed: u64, opts: &SolverOptions) -> CaseResult {
    let inst = general_instance(seed);
    let label = format!("seed {seed}");
    match analyze(&inst, opts) {
        Ok(r) => {
            let failed: Vec<&str> = r.proven_failures().map(|c| c.name).collect();
            let note = if failed.is_empty() {
                format!("pra {:?} <= {}", r.pra, r.bound_eta)
            } else {
                format!("{}: failed {}", inst.name, failed.join(", "))
            };
            case(label, failed.is_empty(), note)
        }
        Err(e) => case(label, false, format!("{}: {e}", inst.name)),
    }
}

/// Oracle value against `S(z)`; `two_sided` also demands the oracle reach `S(z)`.
fn oracle_vs_equilibrium(inst: &Instance, grid: usize, opts: &SolverOptions, two_sided: bool) -> Result<(bool, String), String> {
    let z = solve_equilibrium(inst, Objective::RiskNeutral, opts).map_err(|e| e.to_string())?;
    if !z.converged {
        return Err(format!("no convergence (gap {:e})", z.relative_gap));
    }
    let s_z = shortest_path_length(&inst.network, &z.flow.edge_flow);
    let o = max_shortest_path_oracle(inst, grid).map_err(|e| e.to_string())?;
    let upper = o.best_value <= s_z + o.slack;
    let lower = !two_sided || o.best_value >= s_z - o.slack;
    Ok((upper && lower, format!("oracle {} vs S(z) {s_z} (slack {:.2e})", o.best_value, o.slack)))
}

fn sp_path_count(inst: &Instance) -> usize {
    inst.network
        .enumerate_simple_paths(ORACLE_SUITE_PATHS + 1)
        .map_or(usize::MAX, |p| p.len())
}

fn sp_theorem(seed: u64, grid: usize, opts: &SolverOptions) -> CaseResult {
    let inst = sp_instance(seed);
    let label = format!("seed {seed}");
    if !sp_decompose(&inst.network).is_series_parallel() {
        return case(label, false, format!("{} not recognized as series-parallel", inst.name));
    }
    let r = match analyze(&inst, opts) {
        Ok(r) => r,
        Err(e) => return case(label, false, format!("{}: {e}", inst.name)),
    };
    let bound = 1.0 + r.gamma * r.kappa;
    let mut pass = r.eta == 1 && r.cost_rawe <= bound * r.cost_rnwe * (1.0 + 1e-6) && r.proven_pass();
    let mut note = format!("eta {} pra {:?} <= {bound}", r.eta, r.pra);
    if sp_path_count(&inst) <= ORACLE_SUITE_PATHS {
        match oracle_vs_equilibrium(&inst, grid, opts, false) {
            Ok((ok, n)) => {
                pass &= ok;
                note = format!("{note}; {n}");
            }
            Err(e) => return case(label, false, e),
        }
    }
    case(label, pass, note)
}

/// Zigzag networks are not series-parallel and their equilibrium does not
/// maximize the shortest-path latency.
fn zigzag_counterexample(k: usize, grid: usize, opts: &SolverOptions) -> CaseResult {
    let inst = zigzag(k);
    let label = format!("zigzag k={k}");
    let non_sp = !sp_decompose(&inst.network).is_series_parallel();
    let z = match solve_equilibrium(&inst, Objective::RiskNeutral, opts) {
        Ok(z) if z.converged => z,
        Ok(z) => return case(label, false, format!("no convergence (gap {:e})", z.relative_gap)),
        Err(e) => return case(label, false, e.to_string()),
    };
    let s_z = shortest_path_length(&inst.network, &z.flow.edge_flow);
    match max_shortest_path_oracle(&inst, grid) {
        Ok(o) => {
            let pass = non_sp && o.best_value > s_z + o.slack && (s_z - 1.0 / k as f64).abs() <= 1e-6;
            case(label, pass, format!("non-SP {non_sp}, oracle {} > S(z) {s_z}", o.best_value))
        }
        Err(e) => case(label, false, e.to_string()),
    }
}

fn sigma_lemma(samples: u64, seed: u64) -> Vec<CaseResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(samples as usize);
    let mut drawn = 0u64;
    while (out.len() as u64) < samples {
        let sigmas: [f64; 5] = std::array::from_fn(|_| rng.gen_range(0.0..=10.0));
        drawn += 1;
        let s = braess_stdev_inequality(sigmas);
        if s.precondition {
            out.push(case(
                format!("sample {drawn}"),
                s.holds,
                format!("sigmas {sigmas:?}: {} <= {}", s.lhs, s.rhs),
            ));
        }
    }
    out
}

/// Seeds whose SP instance is small enough for the exhaustive oracle.
fn oracle_seeds(start: u64, count: u64) -> Vec<u64> {
    (start..)
        .filter(|&s| sp_path_count(&sp_instance(s)) <= ORACLE_SUITE_PATHS)
        .take(count as usize)
        .collect()
}

pub fn run_suite(suite: Suite, count: u64, seed: u64, grid: usize, opts: &SolverOptions) -> Result<SuiteSummary, CliError> {
    let pool = pool()?;
    let cases = match suite {
        Suite::BoundChain => pool.install(|| (seed..seed + count).into_par_iter().map(|s| bound_chain(s, opts)).collect()),
        Suite::SpTheorem => {
            let mut cases: Vec<CaseResult> =
                pool.install(|| (seed..seed + count).into_par_iter().map(|s| sp_theorem(s, grid, opts)).collect());
            cases.extend((2..=4).map(|k| zigzag_counterexample(k, grid, opts)));
            cases
        }
        Suite::SigmaLemma => sigma_lemma(count, seed),
        Suite::Oracle => {
            let seeds = oracle_seeds(seed, count);
            let mut cases: Vec<CaseResult> = pool.install(|| {
                seeds
                    .par_iter()
                    .map(|&s| {
                        let label = format!("seed {s}");
                        match oracle_vs_equilibrium(&sp_instance(s), grid, opts, true) {
                            Ok((pass, note)) => case(label, pass, note),
                            Err(e) => case(label, false, e),
                        }
                    })
                    .collect()
            });
            cases.extend((2..=4).map(|k| zigzag_counterexample(k, grid, opts)));
            cases
        }
    };
    Ok(SuiteSummary { suite, cases })
}

fn suite_name(suite: Suite) -> &'static str {
    match suite {
        Suite::BoundChain => "bound-chain",
        Suite::SpTheorem => "sp-theorem",
        Suite::SigmaLemma => "sigma-lemma",
        Suite::Oracle => "oracle",
    }
}

pub fn run(args: &VerifyArgs) -> Result<(), CliError> {
    let count = args.seeds.unwrap_or_else(|| default_count(args.suite));
    let summary = run_suite(args.suite, count, args.seed, args.grid, &args.solver.options())?;
    let name = suite_name(args.suite);
    for c in summary.cases.iter().filter(|c| !c.pass) {
        println!("FAIL {name} {}: {}", c.label, c.note);
    }
    let verdict = if summary.all_pass() { "PASS" } else { "FAIL" };
    println!("{name}: {}/{} {verdict}", summary.passed(), summary.cases.len());
    if summary.all_pass() {
        Ok(())
    } else {
        Err(CliError::BoundFailure(format!(
            "{name}: {} of {} cases failed",
            summary.cases.len() - summary.passed(),
            summary.cases.len()
        )))
    }
}
