use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use riskroute::instances::{Family, FamilyParams};
use riskroute::network::RiskModel;
use riskroute::solver::SolverOptions;

#[derive(Debug, Parser)]
#[command(name = "riskroute", version, about = "Wardrop equilibria and the price of risk aversion")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one equilibrium of an instance file.
    Solve(SolveArgs),
    /// Solve both equilibria and check every bound.
    Analyze(AnalyzeArgs),
    /// Analyze a family over a range of one parameter and write CSV.
    Sweep(SweepArgs),
    /// Run a property suite over generated instances.
    Verify(VerifyArgs),
    /// Write a generated instance.
    Generate(GenerateArgs),
    /// Brute-force maximum of the shortest-path latency over feasible flows.
    Oracle(OracleArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// Risk-neutral equilibrium.
    Rnwe,
    /// Risk-averse equilibrium under the instance's risk model.
    Rawe,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    MeanVar,
    MeanStdev,
}

impl From<ModelArg> for RiskModel {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::MeanVar => RiskModel::MeanVar,
            ModelArg::MeanStdev => RiskModel::MeanStdev,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    /// Relative-gap tolerance.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, default_value_t = 200_000)]
    pub max_iter: usize,
}

impl SolverArgs {
    pub fn options(&self) -> SolverOptions {
        SolverOptions::default().with_tol(self.tol).with_max_iter(self.max_iter)
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    pub instance: PathBuf,
    #[arg(long, value_enum, default_value = "rawe")]
    pub mode: Mode,
    /// Override the risk model stored in the file.
    #[arg(long, value_enum)]
    pub risk_model: Option<ModelArg>,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Write the flow as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    pub instance: PathBuf,
    #[arg(long, value_enum)]
    pub risk_model: Option<ModelArg>,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Write the full report as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyName {
    Pigou,
    Braess,
    BraessGeneral,
    Zigzag,
    RandomSp,
    RandomGeneral,
}

#[derive(Debug, Clone, Args)]
pub struct FamilyArgs {
    #[arg(long, value_enum)]
    pub family: FamilyName,
    #[arg(long, value_enum, default_value = "mean-var")]
    pub risk_model: ModelArg,
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    #[arg(long, default_value_t = 1.0)]
    pub kappa: f64,
    #[arg(long, default_value_t = 0.1)]
    pub v: f64,
    /// Braess slope; defaults to `2v`.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    #[arg(long, default_value_t = 8)]
    pub budget: usize,
    #[arg(long, default_value_t = 6)]
    pub nodes: usize,
    #[arg(long, default_value_t = 10)]
    pub edges: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl FamilyArgs {
    pub fn params(&self) -> FamilyParams {
        let family = match self.family {
            FamilyName::Pigou => Family::Pigou {
                gamma: self.gamma,
                kappa: self.kappa,
            },
            FamilyName::Braess => Family::Braess { v: self.v },
            FamilyName::BraessGeneral => Family::BraessGeneral {
                alpha: self.alpha.unwrap_or(2.0 * self.v),
                v: self.v,
            },
            FamilyName::Zigzag => Family::Zigzag { k: self.k },
            FamilyName::RandomSp => Family::RandomSp {
                budget: self.budget,
                seed: self.seed,
            },
            FamilyName::RandomGeneral => Family::RandomGeneral {
                nodes: self.nodes,
                edges: self.edges,
                seed: self.seed,
            },
        };
        FamilyParams::new(family, self.risk_model.into())
    }
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    /// Parameter to sweep: gamma or kappa (pigou), v or alpha (braess families).
    #[arg(long)]
    pub param: String,
    #[arg(long)]
    pub from: f64,
    #[arg(long)]
    pub to: f64,
    #[arg(long)]
    pub steps: usize,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    BoundChain,
    SpTheorem,
    SigmaLemma,
    Oracle,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub suite: Suite,
    /// Number of instances (or samples for sigma-lemma); suite default when absent.
    #[arg(long)]
    pub seeds: Option<u64>,
    /// First seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub grid: usize,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    /// Destination file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    pub instance: PathBuf,
    #[arg(long, default_value_t = 100)]
    pub grid: usize,
    #[command(flatten)]
    pub solver: SolverArgs,
}
