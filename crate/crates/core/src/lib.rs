//! Adaptive L1 time stepping for time-fractional parabolic problems
//! `D^a u + L u = f`, `0 < a < 1`, with the time step controlled by sampling
//! the residual of the piecewise-linear solution against an explicit barrier.
//!
//! ```
//! use fracadapt::{AdaptConfig, BarrierKind, Norm, TestProblem};
//!
//! let problem = TestProblem::a(0.4)?;
//! let report = problem.solve_adaptive(&AdaptConfig::new(1e-2, BarrierKind::R0))?;
//! let err = fracadapt::experiments::error_metrics(&problem, &report.solution, Norm::L2, None)?;
//! assert!(err.max_node_error <= 1e-2);
//! # Ok::<(), fracadapt::Error>(())
//! ```

// NaN-rejecting argument checks are written as `!(x > 0.0)` on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adapt;
pub mod barriers;
pub mod bounds;
pub mod error;
pub mod experiments;
pub mod fracops;
pub mod quad;
pub mod residual;
pub mod spatial;
pub mod specfun;
pub mod stepper;

pub use adapt::{adaptive_solve, AdaptConfig, AdaptProblem, AdaptiveRunReport, InitialTreatment};
pub use barriers::{Barrier, BarrierKind};
pub use error::{Error, Result};
pub use experiments::{ProblemId, TestProblem};
pub use fracops::{FirstInterval, TemporalMesh, TimeGridFunction};
pub use residual::{ResidualMode, SamplePlan};
pub use spatial::{Norm, SpatialOperator};
pub use specfun::{gamma, mlf, MlfAccuracy};
