//! Command-line flags, optional JSON defaults, and their merge into a
//! validated run configuration.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use fracadapt::experiments::{DEFAULT_B_INTERVALS, DEFAULT_C_INTERVALS};
use fracadapt::residual::SampleDistribution;
use fracadapt::{AdaptConfig, BarrierKind, Norm, ProblemId, SamplePlan, TestProblem};

use crate::CliError;

#[derive(Parser, Debug)]
#[command(
    name = "fracadapt",
    version,
    about = "Adaptive L1 time stepping for time-fractional problems"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// One adaptive or graded solve, one CSV row per time node.
    Run(SolveArgs),
    /// Several solves over a TOL or M list, with observed rates.
    Sweep(SolveArgs),
    /// Evaluate the Mittag-Leffler function E_{alpha,beta}.
    Mlf(MlfArgs),
    /// A posteriori bound next to the actual error for a completed run.
    Bound(SolveArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemArg {
    A,
    B,
    C,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BarrierArg {
    R0,
    R1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormArg {
    L2,
    Linf,
}

#[derive(Args, Debug, Default)]
pub struct SolveArgs {
    /// JSON file with defaults for any of the flags below.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub problem: Option<ProblemArg>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, value_enum)]
    pub barrier: Option<BarrierArg>,
    /// Tolerance; a comma-separated list for `sweep`.
    #[arg(long, value_delimiter = ',')]
    pub tol: Option<Vec<f64>>,
    /// Use the graded mesh t_j = T (j/M)^r instead of the adaptive one.
    #[arg(long)]
    pub graded: bool,
    /// Mesh grading exponent (default (2 - alpha) / alpha).
    #[arg(long)]
    pub r: Option<f64>,
    /// Number of time steps; a comma-separated list for `sweep`.
    #[arg(long = "M", value_delimiter = ',')]
    pub steps: Option<Vec<usize>>,
    /// Spatial intervals for problems b and c.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, value_enum)]
    pub norm: Option<NormArg>,
    /// Residual samples per time interval.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Initial adaptive step (default 5 TOL^(1/alpha) for r0, TOL for r1).
    #[arg(long)]
    pub tau_star: Option<f64>,
    #[arg(long)]
    pub max_retries: Option<usize>,
    /// Write CSV here (atomically) instead of standard output.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Concurrent runs in `sweep`.
    #[arg(long, env = "FRACADAPT_JOBS")]
    pub jobs: Option<usize>,
}

#[derive(Args, Debug)]
pub struct MlfArgs {
    #[arg(long)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    /// Evaluation points, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub x: Vec<f64>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

/// Defaults read from `--config`; keys match the long flag names.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    problem: Option<ProblemArg>,
    alpha: Option<f64>,
    barrier: Option<BarrierArg>,
    tol: Option<OneOrMany<f64>>,
    graded: Option<bool>,
    r: Option<f64>,
    #[serde(rename = "M")]
    steps: Option<OneOrMany<usize>>,
    n: Option<usize>,
    norm: Option<NormArg>,
    samples: Option<usize>,
    tau_star: Option<f64>,
    max_retries: Option<usize>,
    jobs: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T> OneOrMany<T> {
    fn into_vec(self) -> Vec<T> {
        match self {
            OneOrMany::One(v) => vec![v],
            OneOrMany::Many(v) => v,
        }
    }
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
    }
}

/// Mesh selection for a solve.
#[derive(Debug, Clone, PartialEq)]
pub enum MeshChoice {
    Adaptive { tols: Vec<f64> },
    Graded { steps: Vec<usize>, grading: f64 },
}

/// Fully merged and validated settings.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub problem: ProblemId,
    pub alpha: f64,
    pub barrier: BarrierKind,
    pub mesh: MeshChoice,
    pub spatial_intervals: usize,
    pub norm: Norm,
    pub samples: usize,
    pub tau_star: Option<f64>,
    pub max_retries: usize,
    pub output: Option<PathBuf>,
    pub jobs: Option<usize>,
}

fn usage<T>(msg: impl Into<String>) -> Result<T, CliError> {
    Err(CliError::Usage(msg.into()))
}

impl RunConfig {
    /// Flags override the JSON file, which overrides built-in defaults.
    pub fn resolve(args: SolveArgs) -> Result<Self, CliError> {
        let file = match &args.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        let problem = match args.problem.or(file.problem).unwrap_or(ProblemArg::A) {
            ProblemArg::A => ProblemId::A,
            ProblemArg::B => ProblemId::B,
            ProblemArg::C => ProblemId::C,
        };
        let Some(alpha) = args.alpha.or(file.alpha) else {
            return usage("--alpha is required");
        };
        if !(alpha > 0.0 && alpha < 1.0) {
            return usage(format!("--alpha must lie in (0, 1), got {alpha}"));
        }
        let barrier = match args.barrier.or(file.barrier).unwrap_or(BarrierArg::R0) {
            BarrierArg::R0 => BarrierKind::R0,
            BarrierArg::R1 => BarrierKind::R1,
        };
        let graded = args.graded || file.graded.unwrap_or(false);
        let tols = args.tol.or_else(|| file.tol.map(OneOrMany::into_vec));
        let steps = args.steps.or_else(|| file.steps.map(OneOrMany::into_vec));
        let mesh = if graded {
            let Some(steps) = steps else {
                return usage("graded runs require --M");
            };
            if steps.contains(&0) {
                return usage("--M entries must be positive");
            }
            let grading = args.r.or(file.r).unwrap_or((2.0 - alpha) / alpha);
            if grading < 1.0 || !grading.is_finite() {
                return usage(format!("--r must be at least 1, got {grading}"));
            }
            MeshChoice::Graded { steps, grading }
        } else {
            if steps.is_some() {
                return usage("--M applies to graded runs; add --graded");
            }
            let Some(tols) = tols else {
                return usage("adaptive runs require --tol");
            };
            if let Some(bad) = tols.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
                return usage(format!("--tol entries must be positive, got {bad}"));
            }
            MeshChoice::Adaptive { tols }
        };
        let spatial_intervals = args.n.or(file.n).unwrap_or(match problem {
            ProblemId::C => DEFAULT_C_INTERVALS,
            _ => DEFAULT_B_INTERVALS,
        });
        let norm = match args.norm.or(file.norm).unwrap_or(NormArg::L2) {
            NormArg::L2 => Norm::L2,
            NormArg::Linf => Norm::Linf,
        };
        let samples = args
            .samples
            .or(file.samples)
            .unwrap_or(SamplePlan::default().points_per_interval);
        let jobs = args.jobs.or(file.jobs);
        if jobs == Some(0) {
            return usage("--jobs must be positive");
        }
        Ok(Self {
            problem,
            alpha,
            barrier,
            mesh,
            spatial_intervals,
            norm,
            samples,
            tau_star: args.tau_star.or(file.tau_star),
            max_retries: args.max_retries.or(file.max_retries).unwrap_or(10_000),
            output: args.output,
            jobs,
        })
    }

    pub fn test_problem(&self) -> fracadapt::Result<TestProblem> {
        TestProblem::new(self.problem, self.alpha, Some(self.spatial_intervals))
    }

    pub fn plan(&self) -> Result<SamplePlan, CliError> {
        SamplePlan::new(self.samples, SampleDistribution::Chebyshev).map_err(|e| CliError::Usage(e.to_string()))
    }

    pub fn adapt_config(&self, tol: f64) -> Result<AdaptConfig, CliError> {
        let mut config = AdaptConfig::new(tol, self.barrier);
        config.plan = self.plan()?;
        config.norm = self.norm;
        config.tau_star = self.tau_star;
        config.max_retries_per_step = self.max_retries;
        config.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(alpha: f64) -> SolveArgs {
        SolveArgs {
            alpha: Some(alpha),
            ..Default::default()
        }
    }

    #[test]
    fn adaptive_needs_tol_and_graded_needs_m() {
        assert!(matches!(RunConfig::resolve(args(0.5)), Err(CliError::Usage(_))));
        let mut a = args(0.5);
        a.graded = true;
        assert!(matches!(RunConfig::resolve(a), Err(CliError::Usage(_))));
        let mut a = args(0.5);
        a.graded = true;
        a.steps = Some(vec![4]);
        let c = RunConfig::resolve(a).unwrap();
        assert_eq!(
            c.mesh,
            MeshChoice::Graded {
                steps: vec![4],
                grading: 3.0
            }
        );
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        std::fs::write(
            &path,
            r#"{"alpha": 0.3, "tol": [1e-2, 1e-3], "problem": "b", "n": 100}"#,
        )
        .unwrap();
        let mut a = SolveArgs {
            config: Some(path),
            ..Default::default()
        };
        a.n = Some(50);
        let c = RunConfig::resolve(a).unwrap();
        assert_eq!(c.alpha, 0.3);
        assert_eq!(c.problem, ProblemId::B);
        assert_eq!(c.spatial_intervals, 50);
        assert_eq!(c.mesh, MeshChoice::Adaptive { tols: vec![1e-2, 1e-3] });
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        std::fs::write(&path, r#"{"alpha": 0.3, "tolerance": 1e-3}"#).unwrap();
        let a = SolveArgs {
            config: Some(path),
            ..Default::default()
        };
        assert!(matches!(RunConfig::resolve(a), Err(CliError::Usage(_))));
    }

    #[test]
    fn alpha_range() {
        let mut a = args(1.0);
        a.tol = Some(vec![1e-3]);
        assert!(RunConfig::resolve(a).is_err());
    }
}
