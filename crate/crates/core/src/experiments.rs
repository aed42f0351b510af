//! The three model problems, their exact or reference solutions, error
//! metrics and observed convergence rates.
//!
//! * A: `D^a u + 3u = f` on `(0, 1]`, `u = t^a - t^2`.
//! * B: `D^a u - u_xx = f` on `(0, pi) x (0, 1]`, `u = (t^a - t^2) sin(x^2/pi)`.
//! * C: `D^a u - u_xx = 0` on `(0, pi) x (0, 0.2]` with a hat-shaped `u_0`
//!   whose kink keeps `L u_0` out of `L2`.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::adapt::{adaptive_solve, AdaptConfig, AdaptProblem, AdaptiveRunReport, InitialTreatment};
use crate::error::{domain, Error, Result};
use crate::fracops::{FirstInterval, TemporalMesh, TimeGridFunction};
use crate::residual::{problem_c_mode, ResidualMode};
use crate::spatial::{Norm, SpatialOperator};
use crate::specfun::gamma;
use crate::stepper::l1_solve_all;

pub const DEFAULT_B_INTERVALS: usize = 2000;
pub const DEFAULT_C_INTERVALS: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProblemId {
    A,
    B,
    C,
}

impl std::fmt::Display for ProblemId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ProblemId::A => "a",
            ProblemId::B => "b",
            ProblemId::C => "c",
        })
    }
}

#[derive(Debug, Clone)]
pub struct TestProblem {
    id: ProblemId,
    alpha: f64,
    final_time: f64,
    op: SpatialOperator,
    grid: Vec<f64>,
    u0: Vec<f64>,
    g1pa: f64,
    g3ma: f64,
}

fn hat(x: f64) -> f64 {
    if x <= 1.0 {
        x
    } else {
        1.0 - (x - 1.0) / (PI - 1.0)
    }
}

impl TestProblem {
    pub fn new(id: ProblemId, alpha: f64, spatial_intervals: Option<usize>) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return domain(format!("fractional order must lie in (0, 1), got {alpha}"));
        }
        let (op, final_time) = match id {
            ProblemId::A => (SpatialOperator::scalar_shift(3.0)?, 1.0),
            ProblemId::B => (
                SpatialOperator::laplacian_1d(PI, spatial_intervals.unwrap_or(DEFAULT_B_INTERVALS), 0.0, 1.0)?,
                1.0,
            ),
            ProblemId::C => (
                SpatialOperator::laplacian_1d(PI, spatial_intervals.unwrap_or(DEFAULT_C_INTERVALS), 0.0, 1.0)?,
                0.2,
            ),
        };
        let grid = op.grid();
        let u0 = match id {
            ProblemId::A => vec![0.0],
            ProblemId::B => vec![0.0; grid.len()],
            ProblemId::C => grid.iter().map(|&x| hat(x)).collect(),
        };
        Ok(Self {
            id,
            alpha,
            final_time,
            op,
            grid,
            u0,
            g1pa: gamma(1.0 + alpha)?,
            g3ma: gamma(3.0 - alpha)?,
        })
    }

    pub fn a(alpha: f64) -> Result<Self> {
        Self::new(ProblemId::A, alpha, None)
    }

    pub fn b(alpha: f64, spatial_intervals: usize) -> Result<Self> {
        Self::new(ProblemId::B, alpha, Some(spatial_intervals))
    }

    pub fn c(alpha: f64, spatial_intervals: usize) -> Result<Self> {
        Self::new(ProblemId::C, alpha, Some(spatial_intervals))
    }

    pub fn id(&self) -> ProblemId {
        self.id
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn final_time(&self) -> f64 {
        self.final_time
    }

    pub fn op(&self) -> &SpatialOperator {
        &self.op
    }

    pub fn lambda(&self) -> f64 {
        self.op.lambda()
    }

    pub fn u0(&self) -> &[f64] {
        &self.u0
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn has_exact_solution(&self) -> bool {
        self.id != ProblemId::C
    }

    pub fn initial_treatment(&self) -> InitialTreatment {
        match self.id {
            ProblemId::C => InitialTreatment::HoldFirstInterval,
            _ => InitialTreatment::Standard,
        }
    }

    pub fn first_interval(&self) -> FirstInterval {
        match self.id {
            ProblemId::C => FirstInterval::ConstantEqualToU1,
            _ => FirstInterval::Linear,
        }
    }

    /// Residual mode matching this problem for a computed solution.
    pub fn residual_mode(&self, u: &TimeGridFunction) -> ResidualMode {
        match self.id {
            ProblemId::C => problem_c_mode(u),
            _ => ResidualMode::Standard,
        }
    }

    /// `D^a (t^a - t^2) = Gamma(1+a) - 2 t^{2-a} / Gamma(3-a)`.
    fn time_part(&self, t: f64) -> (f64, f64) {
        let a = self.alpha;
        (t.powf(a) - t * t, self.g1pa - 2.0 * t.powf(2.0 - a) / self.g3ma)
    }

    /// Forcing derived from the exact solution (A, B).
    pub fn manufactured_f(&self, t: f64) -> Result<Vec<f64>> {
        if !(t >= 0.0) || !t.is_finite() {
            return domain(format!("forcing requires t >= 0, got {t}"));
        }
        let (u, du) = self.time_part(t);
        match self.id {
            ProblemId::A => Ok(vec![du + 3.0 * u]),
            ProblemId::B => Ok(self
                .grid
                .iter()
                .map(|&x| {
                    let arg = x * x / PI;
                    let (s, c) = arg.sin_cos();
                    du * s + u * (-2.0 / PI * c + 4.0 * x * x / (PI * PI) * s)
                })
                .collect()),
            ProblemId::C => Err(Error::Unsupported("problem C has zero forcing".into())),
        }
    }

    /// `t -> f(., t)` as used by the solvers (zero for C).
    pub fn forcing(&self) -> impl Fn(f64) -> Vec<f64> + Sync + '_ {
        move |t: f64| match self.id {
            ProblemId::C => vec![0.0; self.grid.len()],
            _ => self.manufactured_f(t).expect("forcing evaluated at t >= 0"),
        }
    }

    pub fn exact(&self, t: f64) -> Result<Vec<f64>> {
        if !(t >= 0.0) {
            return domain(format!("exact solution requires t >= 0, got {t}"));
        }
        let (u, _) = self.time_part(t);
        match self.id {
            ProblemId::A => Ok(vec![u]),
            ProblemId::B => Ok(self.grid.iter().map(|&x| u * (x * x / PI).sin()).collect()),
            ProblemId::C => Err(Error::Unsupported("problem C has no closed-form solution".into())),
        }
    }

    /// Optimal grading exponent `(2 - a) / a`.
    pub fn optimal_grading(&self) -> f64 {
        (2.0 - self.alpha) / self.alpha
    }

    pub fn solve_on(&self, mesh: &TemporalMesh) -> Result<TimeGridFunction> {
        let f = self.forcing();
        let u = l1_solve_all(self.alpha, &self.op, mesh, self.u0.clone(), &f)?;
        Ok(u.with_first_interval(self.first_interval()))
    }

    pub fn solve_graded(&self, steps: usize, grading: f64) -> Result<TimeGridFunction> {
        self.solve_on(&TemporalMesh::graded(self.final_time, steps, grading)?)
    }

    pub fn solve_adaptive(&self, config: &AdaptConfig) -> Result<AdaptiveRunReport> {
        let f = self.forcing();
        let problem = AdaptProblem {
            alpha: self.alpha,
            op: &self.op,
            u0: self.u0.clone(),
            forcing: &f,
            final_time: self.final_time,
            initial: self.initial_treatment(),
        };
        adaptive_solve(&problem, config)
    }

    /// Terminal snapshot of a graded-mesh solve with `steps` intervals and
    /// the optimal grading (the reference for problem C).
    pub fn reference_terminal(&self, steps: usize) -> Result<Vec<f64>> {
        Ok(self.solve_graded(steps, self.optimal_grading())?.terminal().to_vec())
    }
}

/// Reference for problem C: `M_ref = max(4 * largest_adaptive_m, min_steps)`.
pub fn reference_solution_c(problem: &TestProblem, largest_adaptive_m: usize, min_steps: usize) -> Result<Vec<f64>> {
    if problem.id != ProblemId::C {
        return Err(Error::Unsupported("reference recipe is specific to problem C".into()));
    }
    problem.reference_terminal((4 * largest_adaptive_m).max(min_steps).max(1))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorMetrics {
    /// Over nodes `t_j > 0` (only `T` when errors come from a reference).
    pub max_node_error: f64,
    pub terminal_error: f64,
    /// `(t_j, ||e(t_j)||)`; `t = 0` included when the exact solution is known.
    pub per_node: Vec<(f64, f64)>,
}

/// Nodal errors in `norm`. For problem C a terminal reference is required.
pub fn error_metrics(
    problem: &TestProblem,
    u: &TimeGridFunction,
    norm: Norm,
    reference: Option<&[f64]>,
) -> Result<ErrorMetrics> {
    let op = problem.op();
    let diff = |a: &[f64], b: &[f64]| -> f64 {
        let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        op.norm(&d, norm)
    };
    if problem.has_exact_solution() {
        let mut per_node = Vec::with_capacity(u.values().len());
        let mut max_node_error = 0.0f64;
        for (&t, v) in u.mesh().nodes().iter().zip(u.values()) {
            let e = diff(v, &problem.exact(t)?);
            if t > 0.0 {
                max_node_error = max_node_error.max(e);
            }
            per_node.push((t, e));
        }
        let terminal_error = per_node[per_node.len() - 1].1;
        return Ok(ErrorMetrics {
            max_node_error,
            terminal_error,
            per_node,
        });
    }
    let reference = reference.ok_or_else(|| Error::State("problem C needs a reference solution".into()))?;
    if reference.len() != u.dim() {
        return Err(Error::Shape {
            expected: u.dim(),
            got: reference.len(),
        });
    }
    let e = diff(u.terminal(), reference);
    Ok(ErrorMetrics {
        max_node_error: e,
        terminal_error: e,
        per_node: vec![(u.mesh().final_time(), e)],
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateRow {
    pub steps: usize,
    pub tol: Option<f64>,
    pub error: f64,
    /// Rate against the previous row; `None` for the first row or when
    /// undefined (zero error or equal step counts).
    pub rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateTable {
    pub rows: Vec<RateRow>,
}

impl RateTable {
    pub fn rates(&self) -> Vec<Option<f64>> {
        self.rows.iter().skip(1).map(|r| r.rate).collect()
    }

    /// Least-squares slope of `-log e` against `log M`.
    pub fn fitted_rate(&self) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .rows
            .iter()
            .filter(|r| r.error > 0.0)
            .map(|r| ((r.steps as f64).ln(), -r.error.ln()))
            .collect();
        if pts.len() < 2 {
            return None;
        }
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        if sxx == 0.0 {
            return None;
        }
        Some(pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx)
    }
}

/// Observed rates `log(e_i / e_{i+1}) / log(M_{i+1} / M_i)` between
/// consecutive runs `(M, TOL, error)`.
pub fn rate_table(runs: &[(usize, Option<f64>, f64)]) -> Result<RateTable> {
    if runs.len() < 2 {
        return domain(format!("rate table needs at least 2 runs, got {}", runs.len()));
    }
    let mut rows = Vec::with_capacity(runs.len());
    for (i, &(steps, tol, error)) in runs.iter().enumerate() {
        if steps == 0 || !(error >= 0.0) {
            return domain(format!("invalid run (M = {steps}, error = {error})"));
        }
        let rate = (i > 0).then(|| {
            let (m0, _, e0) = runs[i - 1];
            if e0 > 0.0 && error > 0.0 && m0 != steps {
                Some((e0 / error).ln() / (steps as f64 / m0 as f64).ln())
            } else {
                None
            }
        });
        rows.push(RateRow {
            steps,
            tol,
            error,
            rate: rate.flatten(),
        });
    }
    Ok(RateTable { rows })
}

/// Max nodal error of graded-mesh runs for each `M`, computed concurrently;
/// rows come back in input order.
pub fn graded_study(problem: &TestProblem, steps: &[usize], grading: f64, norm: Norm) -> Result<RateTable> {
    let errors: Result<Vec<(usize, Option<f64>, f64)>> = steps
        .par_iter()
        .map(|&m| {
            let u = problem.solve_graded(m, grading)?;
            Ok((m, None, error_metrics(problem, &u, norm, None)?.max_node_error))
        })
        .collect();
    rate_table(&errors?)
}
