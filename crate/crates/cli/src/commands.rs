use std::fmt::Write as _;

use rayon::prelude::*;

use fracadapt::adapt::AdaptiveRunReport;
use fracadapt::bounds::{inv_op_apply, ResidualTrace};
use fracadapt::experiments::{error_metrics, rate_table, reference_solution_c, ErrorMetrics};
use fracadapt::residual::ResidualEvaluator;
use fracadapt::stepper::Forcing;
use fracadapt::{mlf, Barrier, BarrierKind, MlfAccuracy, Norm, ProblemId, TestProblem, TimeGridFunction};

use crate::config::{MeshChoice, MlfArgs, RunConfig};
use crate::CliError;

const VERSION_TAG: &str = "fracadapt v1";

/// One point of a sweep: a tolerance (adaptive) or a step count (graded).
#[derive(Debug, Clone, Copy)]
enum Target {
    Tol(f64),
    Steps(usize, f64),
}

struct Solved {
    u: TimeGridFunction,
    report: Option<AdaptiveRunReport>,
    tol: Option<f64>,
}

fn targets(cfg: &RunConfig) -> Vec<Target> {
    match &cfg.mesh {
        MeshChoice::Adaptive { tols } => tols.iter().map(|&t| Target::Tol(t)).collect(),
        MeshChoice::Graded { steps, grading } => steps.iter().map(|&m| Target::Steps(m, *grading)).collect(),
    }
}

fn solve(cfg: &RunConfig, problem: &TestProblem, target: Target) -> Result<Solved, CliError> {
    Ok(match target {
        Target::Tol(tol) => {
            let report = problem.solve_adaptive(&cfg.adapt_config(tol)?)?;
            Solved {
                u: report.solution.clone(),
                report: Some(report),
                tol: Some(tol),
            }
        }
        Target::Steps(m, r) => Solved {
            u: problem.solve_graded(m, r)?,
            report: None,
            tol: None,
        },
    })
}

fn fmt_tol(tol: Option<f64>) -> String {
    tol.map_or_else(|| "-".to_string(), |t| format!("{t}"))
}

fn header(out: &mut String, cfg: &RunConfig, tol: &str) {
    let _ = writeln!(
        out,
        "# {VERSION_TAG}, problem={}, alpha={}, tol={tol}",
        cfg.problem, cfg.alpha
    );
}

/// Nodal errors; problem C is measured at `T` against a finer graded solve.
fn errors(
    cfg: &RunConfig,
    problem: &TestProblem,
    u: &TimeGridFunction,
    largest_m: usize,
) -> Result<ErrorMetrics, CliError> {
    let reference = match cfg.problem {
        ProblemId::C => Some(reference_solution_c(problem, largest_m, 0)?),
        _ => None,
    };
    Ok(error_metrics(problem, u, cfg.norm, reference.as_deref())?)
}

fn barrier_for(cfg: &RunConfig, problem: &TestProblem, u: &TimeGridFunction) -> fracadapt::Result<Barrier> {
    Barrier::new(cfg.barrier, cfg.alpha, problem.lambda(), u.mesh().nodes()[1])
}

/// Worst `||R_h|| / (TOL R_p)` on each interval (`TOL = 1` for graded meshes).
fn interval_ratios(cfg: &RunConfig, problem: &TestProblem, solved: &Solved) -> Result<Vec<f64>, CliError> {
    if let Some(report) = &solved.report {
        return Ok(report.per_step.iter().map(|s| s.worst_ratio).collect());
    }
    let u = &solved.u;
    let barrier = barrier_for(cfg, problem, u)?;
    let f = problem.forcing();
    let forcing: &Forcing<'_> = &f;
    let mode = problem.residual_mode(u);
    let ev = ResidualEvaluator::new(cfg.alpha, problem.op(), forcing, u.mesh().nodes(), u.values(), &mode)?;
    let threshold = |s: f64| barrier.value_unchecked(s);
    let plan = cfg.plan()?;
    (1..u.mesh().nodes().len())
        .map(|m| Ok(ev.check_interval(m, &threshold, &plan, cfg.norm)?.worst_ratio))
        .collect()
}

fn single_target(cfg: &RunConfig) -> Result<Target, CliError> {
    match targets(cfg).as_slice() {
        [one] => Ok(*one),
        _ => Err(CliError::Usage(
            "this command takes a single --tol or --M value; use sweep for lists".into(),
        )),
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|v| format!("{v:e}")).unwrap_or_default()
}

pub fn run(cfg: &RunConfig) -> Result<String, CliError> {
    let target = single_target(cfg)?;
    let problem = cfg.test_problem()?;
    let solved = solve(cfg, &problem, target)?;
    let u = &solved.u;
    let nodes = u.mesh().nodes();
    let metrics = errors(cfg, &problem, u, u.mesh().steps())?;
    let ratios = interval_ratios(cfg, &problem, &solved)?;
    let barrier = match &solved.report {
        Some(r) => r.barrier,
        None => barrier_for(cfg, &problem, u)?,
    };

    let mut out = String::new();
    header(&mut out, cfg, &fmt_tol(solved.tol));
    let mesh = if solved.report.is_some() { "adaptive" } else { "graded" };
    let _ = writeln!(
        out,
        "# barrier={}, mesh={mesh}, M={}, norm={}",
        match cfg.barrier {
            BarrierKind::R0 => "r0",
            BarrierKind::R1 => "r1",
        },
        u.mesh().steps(),
        match cfg.norm {
            Norm::L2 => "l2",
            Norm::Linf => "linf",
        }
    );
    out.push_str("t_j,step,error,residual_worst_ratio,barrier_value\n");
    for (j, &t) in nodes.iter().enumerate() {
        let error = metrics.per_node.iter().find(|(s, _)| *s == t).map(|&(_, e)| e);
        let (step, ratio, bval) = if j == 0 {
            (Some(0.0), None, None)
        } else {
            (Some(t - nodes[j - 1]), Some(ratios[j - 1]), Some(barrier.value(t)?))
        };
        let _ = writeln!(out, "{t:e},{},{},{},{}", opt(step), opt(error), opt(ratio), opt(bval));
    }
    Ok(out)
}

pub fn sweep(cfg: &RunConfig) -> Result<String, CliError> {
    let list = targets(cfg);
    if list.len() < 2 {
        return Err(CliError::Usage("sweep needs at least two --tol or --M values".into()));
    }
    let problem = cfg.test_problem()?;
    let solve_all = || -> Result<Vec<Solved>, CliError> { list.par_iter().map(|&t| solve(cfg, &problem, t)).collect() };
    let runs = match cfg.jobs {
        Some(jobs) => rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| CliError::Usage(format!("cannot start {jobs} workers: {e}")))?
            .install(solve_all)?,
        None => solve_all()?,
    };
    let largest = runs.iter().map(|s| s.u.mesh().steps()).max().unwrap_or(1);
    let mut rows = Vec::with_capacity(runs.len());
    for s in &runs {
        let e = errors(cfg, &problem, &s.u, largest)?;
        let err = if problem.has_exact_solution() {
            e.max_node_error
        } else {
            e.terminal_error
        };
        rows.push((s.u.mesh().steps(), s.tol, err));
    }
    let table = rate_table(&rows)?;

    let mut out = String::new();
    let tols: Vec<String> = runs.iter().map(|s| fmt_tol(s.tol)).collect();
    let tol_field = if runs.iter().all(|s| s.tol.is_none()) {
        "-".to_string()
    } else {
        tols.join(";")
    };
    header(&mut out, cfg, &tol_field);
    out.push_str("M,TOL,error,rate\n");
    for row in &table.rows {
        let rate = row.rate.map_or_else(|| "-".to_string(), |r| format!("{r:.4}"));
        let _ = writeln!(out, "{},{},{:e},{rate}", row.steps, fmt_tol(row.tol), row.error);
    }
    Ok(out)
}

pub fn bound(cfg: &RunConfig) -> Result<String, CliError> {
    let target = single_target(cfg)?;
    let problem = cfg.test_problem()?;
    let solved = solve(cfg, &problem, target)?;
    let u = &solved.u;
    let f = problem.forcing();
    let forcing: &Forcing<'_> = &f;
    let mode = problem.residual_mode(u);
    let trace = ResidualTrace::sample(cfg.alpha, u, &mode, problem.op(), forcing, &cfg.plan()?, cfg.norm)?;
    let metrics = errors(cfg, &problem, u, u.mesh().steps())?;

    let mut out = String::new();
    header(&mut out, cfg, &fmt_tol(solved.tol));
    out.push_str("t,bound,error\n");
    for &t in &u.mesh().nodes()[1..] {
        let b = inv_op_apply(&trace, t)?;
        let error = metrics.per_node.iter().find(|(s, _)| *s == t).map(|&(_, e)| e);
        let _ = writeln!(out, "{t:e},{b:e},{}", opt(error));
    }
    Ok(out)
}

pub fn mlf_table(args: &MlfArgs) -> Result<String, CliError> {
    let acc = MlfAccuracy::default();
    let mut out = String::new();
    let _ = writeln!(out, "# {VERSION_TAG}, mlf, alpha={}, beta={}", args.alpha, args.beta);
    out.push_str("x,E_alpha_beta(x)\n");
    for &x in &args.x {
        let v = mlf(args.alpha, args.beta, x, &acc)?;
        let _ = writeln!(out, "{x},{v:.17e}");
    }
    Ok(out)
}
