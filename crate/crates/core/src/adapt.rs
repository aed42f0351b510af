//! Adaptive construction of the temporal mesh.
//!
//! Each step is first tried at a proposed node. A passing trial is stashed
//! and the step grown by `Q`; a failing trial shrinks the step by `Q` unless
//! a passing trial is already stashed, in which case that trial is accepted.
//! The next step then starts from the accepted step length.

use crate::barriers::{Barrier, BarrierKind};
use crate::error::{domain, Error, Result};
use crate::fracops::{FirstInterval, TemporalMesh, TimeGridFunction};
use crate::residual::{IntervalCheck, ResidualEvaluator, ResidualMode, SamplePlan};
use crate::spatial::{Norm, SpatialOperator};
use crate::stepper::{Forcing, L1State};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptConfig {
    /// Growth/shrink factor `Q > 1`.
    pub q: f64,
    pub tol: f64,
    pub barrier: BarrierKind,
    /// Initial step; `None` selects `5 TOL^{1/a}` for `R0` and `TOL` for `R1`.
    pub tau_star: Option<f64>,
    /// Minimum step; a trial at or below it is accepted unconditionally.
    pub tau_star_star: f64,
    pub max_retries_per_step: usize,
    pub plan: SamplePlan,
    pub norm: Norm,
    /// Multiplies `TOL` in the acceptance test (1 = none).
    pub safety: f64,
}

impl AdaptConfig {
    pub fn new(tol: f64, barrier: BarrierKind) -> Self {
        Self {
            q: 1.1,
            tol,
            barrier,
            tau_star: None,
            tau_star_star: 0.0,
            max_retries_per_step: 10_000,
            plan: SamplePlan::default(),
            norm: Norm::L2,
            safety: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.q > 1.0) || !self.q.is_finite() {
            return domain(format!("Q must exceed 1, got {}", self.q));
        }
        if !(self.tol > 0.0) || !self.tol.is_finite() {
            return domain(format!("TOL must be positive, got {}", self.tol));
        }
        if let Some(ts) = self.tau_star {
            if !(ts > 0.0) || !ts.is_finite() {
                return domain(format!("initial step must be positive, got {ts}"));
            }
        }
        if !(self.tau_star_star >= 0.0) {
            return domain(format!("minimum step must be non-negative, got {}", self.tau_star_star));
        }
        if !(self.safety > 0.0 && self.safety <= 1.0) {
            return domain(format!("safety factor must lie in (0, 1], got {}", self.safety));
        }
        if self.max_retries_per_step == 0 {
            return domain("max_retries_per_step must be positive");
        }
        self.plan.validate()
    }

    pub fn initial_step(&self, alpha: f64) -> f64 {
        self.tau_star.unwrap_or(match self.barrier {
            BarrierKind::R0 => 5.0 * self.tol.powf(1.0 / alpha),
            BarrierKind::R1 => self.tol,
        })
    }
}

/// How `u_h` is interpreted near `t = 0` during the run.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum InitialTreatment {
    #[default]
    Standard,
    /// `u_h(0+) - u_0 = jump`.
    JumpAtZero(Vec<f64>),
    /// Hold `u_h := u^1` on `(0, t_1]` (non-smooth initial data).
    HoldFirstInterval,
}

pub struct AdaptProblem<'a> {
    pub alpha: f64,
    pub op: &'a SpatialOperator,
    pub u0: Vec<f64>,
    pub forcing: &'a Forcing<'a>,
    pub final_time: f64,
    pub initial: InitialTreatment,
}

/// Which branch accepted a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AcceptPath {
    /// The trial reached `T` and passed.
    ReachedFinalTime,
    /// A grown trial failed; the stashed passing trial was restored.
    RestoredStash,
    /// The step fell to the minimum step size and was taken as is.
    MinimumStep,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub t: f64,
    pub step: f64,
    /// Trials beyond the first.
    pub retries: usize,
    pub worst_ratio: f64,
    pub worst_time: f64,
    pub path: AcceptPath,
    /// Step length this step started from.
    pub first_trial_step: f64,
}

#[derive(Debug, Clone)]
pub struct AdaptiveRunReport {
    pub mesh: TemporalMesh,
    pub solution: TimeGridFunction,
    pub per_step: Vec<StepRecord>,
    pub total_steps: usize,
    /// `R1` is bound to the accepted `t_1`.
    pub barrier: Barrier,
    pub mode: ResidualMode,
}

struct Trial {
    t: f64,
    u: Vec<f64>,
    check: IntervalCheck,
}

fn mode_for(initial: &InitialTreatment, nodes: &[f64], values: &[Vec<f64>]) -> ResidualMode {
    match initial {
        InitialTreatment::Standard => ResidualMode::Standard,
        InitialTreatment::JumpAtZero(j) => ResidualMode::JumpAtZero(j.clone()),
        InitialTreatment::HoldFirstInterval => ResidualMode::ProblemC {
            t1: nodes[1],
            u1_minus_u0: values[1].iter().zip(&values[0]).map(|(a, b)| a - b).collect(),
        },
    }
}

/// Runs the adaptive algorithm to `T`.
pub fn adaptive_solve(problem: &AdaptProblem<'_>, config: &AdaptConfig) -> Result<AdaptiveRunReport> {
    config.validate()?;
    let big_t = problem.final_time;
    if !(big_t > 0.0) || !big_t.is_finite() {
        return domain(format!("final time must be positive, got {big_t}"));
    }
    if let InitialTreatment::JumpAtZero(j) = &problem.initial {
        if j.len() != problem.op.dim() {
            return Err(Error::Shape {
                expected: problem.op.dim(),
                got: j.len(),
            });
        }
    }
    let alpha = problem.alpha;
    let tol = config.tol * config.safety;
    let snap = |t: f64| if big_t - t < 1e-14 * big_t { big_t } else { t.min(big_t) };
    let mut barrier = match config.barrier {
        BarrierKind::R0 => Barrier::r0(alpha, problem.op.lambda())?,
        BarrierKind::R1 => Barrier::r1(alpha, problem.op.lambda(), config.initial_step(alpha).min(big_t))?,
    };
    let mut state = L1State::new(alpha, problem.op, problem.u0.clone(), problem.forcing)?;
    let mut fixed_mode: Option<ResidualMode> = None;
    let mut per_step = Vec::new();
    let mut proposal = snap(config.initial_step(alpha));

    // Computes u at trial node t and checks the new interval.
    let try_node =
        |state: &mut L1State<'_>, barrier: &mut Barrier, fixed_mode: &Option<ResidualMode>, t: f64| -> Result<Trial> {
            let u = state.step(t)?;
            state.push(t, u);
            let first = state.nodes().len() == 2;
            if first && barrier.kind() == BarrierKind::R1 {
                *barrier = barrier.with_tau(t)?;
            }
            let owned;
            let mode = match fixed_mode {
                Some(m) => m,
                None => {
                    owned = mode_for(&problem.initial, state.nodes(), state.values());
                    &owned
                }
            };
            let b = *barrier;
            let threshold = move |s: f64| tol * b.value_unchecked(s);
            let m = state.nodes().len() - 1;
            let check = ResidualEvaluator::new(alpha, problem.op, problem.forcing, state.nodes(), state.values(), mode)
                .and_then(|ev| ev.check_interval(m, &threshold, &config.plan, config.norm));
            let (t, u) = state.pop().expect("trial node was pushed");
            Ok(Trial { t, u, check: check? })
        };

    while state.last_time() < big_t {
        let m = state.nodes().len();
        let t_prev = state.last_time();
        let first_trial_step = proposal - t_prev;
        let mut t_m = proposal;
        let mut stash: Option<Trial> = None;
        let mut trials = 0usize;
        let mut last_ratio = f64::NAN;
        let (accepted, path) = loop {
            if !(t_m - t_prev > config.tau_star_star) {
                let t = if t_m > t_prev {
                    t_m
                } else {
                    snap(t_prev + config.tau_star_star.max(f64::EPSILON * big_t))
                };
                break (
                    try_node(&mut state, &mut barrier, &fixed_mode, t)?,
                    AcceptPath::MinimumStep,
                );
            }
            if trials > config.max_retries_per_step {
                return Err(Error::NonConvergence {
                    step: m,
                    retries: trials - 1,
                    last_ratio,
                    last_step: t_m - t_prev,
                });
            }
            trials += 1;
            let trial = try_node(&mut state, &mut barrier, &fixed_mode, t_m)?;
            last_ratio = trial.check.worst_ratio;
            if trial.check.passed {
                if trial.t == big_t {
                    break (trial, AcceptPath::ReachedFinalTime);
                }
                t_m = snap(t_prev + config.q * (t_m - t_prev));
                stash = Some(trial);
            } else if let Some(s) = stash.take() {
                break (s, AcceptPath::RestoredStash);
            } else {
                t_m = t_prev + (t_m - t_prev) / config.q;
            }
        };
        let step = accepted.t - t_prev;
        if m == 1 && barrier.kind() == BarrierKind::R1 {
            barrier = barrier.with_tau(accepted.t)?;
        }
        per_step.push(StepRecord {
            t: accepted.t,
            step,
            retries: trials.saturating_sub(1),
            worst_ratio: accepted.check.worst_ratio,
            worst_time: accepted.check.worst_time,
            path,
            first_trial_step,
        });
        state.push(accepted.t, accepted.u);
        if m == 1 {
            fixed_mode = Some(mode_for(&problem.initial, state.nodes(), state.values()));
        }
        proposal = snap(accepted.t + step);
    }

    let first_interval = match problem.initial {
        InitialTreatment::HoldFirstInterval => FirstInterval::ConstantEqualToU1,
        _ => FirstInterval::Linear,
    };
    let solution = state.into_solution(first_interval)?;
    let mesh = solution.mesh().clone();
    Ok(AdaptiveRunReport {
        total_steps: mesh.steps(),
        mesh,
        solution,
        per_step,
        barrier,
        mode: fixed_mode.unwrap_or(ResidualMode::Standard),
    })
}
