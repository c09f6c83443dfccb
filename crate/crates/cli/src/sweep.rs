use rayon::prelude::*;
use riskroute::analysis::{analyze, PraReport, CSV_HEADER};
use riskroute::instances::{generate, Family};
use riskroute::solver::SolverOptions;

use crate::args::{FamilyArgs, SweepArgs};
use crate::commands::analysis_error;
use crate::{pool, write_output, CliError};

/// A family with one parameter varied over an evenly spaced range.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub family: FamilyArgs,
    pub param: String,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
}

impl SweepSpec {
    pub fn check(&self) -> Result<(), CliError> {
        if self.steps < 2 {
            return Err(CliError::Input(format!("--steps must be at least 2 (got {})", self.steps)));
        }
        if !(self.from < self.to) {
            return Err(CliError::Input(format!(
                "--from must be below --to (got {} and {})",
                self.from, self.to
            )));
        }
        for value in [self.from, self.to] {
            self.instance_args(value)?
                .params()
                .check()
                .map_err(|e| CliError::Input(format!("{} = {value}: {e}", self.param)))?;
        }
        Ok(())
    }

    /// Parameter values; the last one is exactly `to`.
    pub fn values(&self) -> Vec<f64> {
        let width = (self.to - self.from) / (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| if i + 1 == self.steps { self.to } else { self.from + i as f64 * width })
            .collect()
    }

    fn instance_args(&self, value: f64) -> Result<FamilyArgs, CliError> {
        let mut args = self.family.clone();
        let family = args.params().family;
        match (self.param.as_str(), family) {
            ("gamma", Family::Pigou { .. }) => args.gamma = value,
            ("kappa", Family::Pigou { .. }) => args.kappa = value,
            ("v", Family::Braess { .. } | Family::BraessGeneral { .. }) => args.v = value,
            ("alpha", Family::BraessGeneral { .. }) => args.alpha = Some(value),
            (name, _) => {
                return Err(CliError::Input(format!(
                    "parameter `{name}` cannot be swept for this family (pigou: gamma, kappa; braess: v; \
                     braess-general: v, alpha)"
                )))
            }
        }
        Ok(args)
    }
}

/// Analyzes every point, in parallel, and renders the CSV in input order.
pub fn sweep_csv(spec: &SweepSpec, opts: &SolverOptions) -> Result<(String, Vec<PraReport>), CliError> {
    spec.check()?;
    let values = spec.values();
    let reports: Vec<Result<PraReport, CliError>> = pool()?.install(|| {
        values
            .par_iter()
            .map(|&value| {
                let params = spec.instance_args(value)?.params();
                let inst = generate(&params).map_err(|e| CliError::Input(format!("{} = {value}: {e}", spec.param)))?;
                analyze(&inst, opts).map_err(analysis_error)
            })
            .collect()
    });
    let reports: Vec<PraReport> = reports.into_iter().collect::<Result<_, _>>()?;
    let mut csv = String::from(CSV_HEADER);
    csv.push('\n');
    for (value, r) in values.iter().zip(&reports) {
        csv.push_str(&r.csv_row(value));
        csv.push('\n');
    }
    Ok((csv, reports))
}

pub fn run(args: &SweepArgs) -> Result<(), CliError> {
    let spec = SweepSpec {
        family: args.family.clone(),
        param: args.param.clone(),
        from: args.from,
        to: args.to,
        steps: args.steps,
    };
    let (csv, reports) = sweep_csv(&spec, &args.solver.options())?;
    write_output(args.out.as_deref(), csv.as_bytes())?;
    let failed: Vec<String> = spec
        .values()
        .iter()
        .zip(&reports)
        .filter(|(_, r)| !r.proven_pass())
        .map(|(v, _)| v.to_string())
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::BoundFailure(format!(
            "proven bound failed at {} = {}",
            spec.param,
            failed.join(", ")
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::args::{FamilyName, ModelArg};

    fn family(name: FamilyName) -> FamilyArgs {
        FamilyArgs {
            family: name,
            risk_model: ModelArg::MeanVar,
            gamma: 1.0,
            kappa: 1.0,
            v: 0.1,
            alpha: None,
            k: 3,
            budget: 8,
            nodes: 6,
            edges: 10,
            seed: 0,
        }
    }

    fn spec(name: FamilyName, param: &str, from: f64, to: f64, steps: usize) -> SweepSpec {
        SweepSpec {
            family: family(name),
            param: param.into(),
            from,
            to,
            steps,
        }
    }

    #[test]
    fn values_hit_both_ends() {
        let s = spec(FamilyName::Braess, "v", 0.05, 0.5, 10);
        let v = s.values();
        assert_eq!(v.len(), 10);
        assert_eq!(v[0], 0.05);
        assert_eq!(v[9], 0.5);
    }

    #[test]
    fn invalid_specs() {
        assert!(spec(FamilyName::Braess, "v", 0.1, 0.5, 1).check().is_err());
        assert!(spec(FamilyName::Braess, "v", 0.5, 0.1, 3).check().is_err());
        assert!(spec(FamilyName::Braess, "kappa", 0.1, 0.5, 3).check().is_err());
        assert!(spec(FamilyName::Zigzag, "k", 2.0, 4.0, 3).check().is_err());
        assert!(spec(FamilyName::Braess, "v", 0.0, 0.5, 3).check().is_err());
    }

    #[test]
    fn braess_rows_follow_the_closed_form() {
        let (csv, reports) = sweep_csv(&spec(FamilyName::Braess, "v", 0.05, 0.5, 10), &SolverOptions::default()).unwrap();
        assert_eq!(csv.lines().count(), 11);
        for (v, r) in spec(FamilyName::Braess, "v", 0.05, 0.5, 10).values().iter().zip(&reports) {
            assert!((r.pra.unwrap() - (1.0 + 3.0 * v) / (1.0 + v)).abs() < 1e-5);
        }
    }

    #[test]
    fn pigou_kappa_sweep() {
        let (_, reports) = sweep_csv(&spec(FamilyName::Pigou, "kappa", 0.1, 1.0, 4), &SolverOptions::default()).unwrap();
        for r in reports {
            assert!((r.pra.unwrap() - (1.0 + r.kappa)).abs() < 1e-6);
        }
    }
}
