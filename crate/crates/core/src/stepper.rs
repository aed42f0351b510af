//! The L1 scheme on an arbitrary temporal mesh.
//!
//! At each new node `t_m` the interpolant satisfies the collocation equation
//! `D^a u_h(t_m) + L u^m = f(t_m)`, i.e.
//!
//! ```text
//! (mu_m I + L) u^m = f(t_m) + mu_m u^{m-1} - H_m,   mu_m = tau_m^{-a} / Gamma(2-a),
//! ```
//!
//! where `H_m` collects the contributions of the completed intervals.

use crate::error::{domain, Error, Result};
use crate::fracops::{CaputoKernel, FirstInterval, TemporalMesh, TimeGridFunction};
use crate::spatial::SpatialOperator;

/// Right-hand side `t -> f(., t)`.
pub type Forcing<'a> = dyn Fn(f64) -> Vec<f64> + Sync + 'a;

/// Accepted history of an L1 run.
pub struct L1State<'a> {
    kernel: CaputoKernel,
    op: &'a SpatialOperator,
    forcing: &'a Forcing<'a>,
    nodes: Vec<f64>,
    values: Vec<Vec<f64>>,
}

impl<'a> L1State<'a> {
    pub fn new(alpha: f64, op: &'a SpatialOperator, u0: Vec<f64>, forcing: &'a Forcing<'a>) -> Result<Self> {
        if u0.len() != op.dim() {
            return Err(Error::Shape {
                expected: op.dim(),
                got: u0.len(),
            });
        }
        Ok(Self {
            kernel: CaputoKernel::new(alpha)?,
            op,
            forcing,
            nodes: vec![0.0],
            values: vec![u0],
        })
    }

    pub fn kernel(&self) -> &CaputoKernel {
        &self.kernel
    }

    pub fn op(&self) -> &SpatialOperator {
        self.op
    }

    pub fn forcing(&self) -> &Forcing<'a> {
        self.forcing
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn last_time(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    /// Computes `u^m` at a trial node `t_new` without committing it.
    pub fn step(&self, t_new: f64) -> Result<Vec<f64>> {
        let t_prev = self.last_time();
        if !(t_new > t_prev) || !t_new.is_finite() {
            return domain(format!("new node {t_new} must exceed the last node {t_prev}"));
        }
        let m = self.nodes.len();
        let n = self.op.dim();
        let mu = (t_new - t_prev).powf(-self.kernel.alpha()) * self.kernel.inv_gamma_2ma();
        let mut history = vec![0.0; n];
        self.kernel
            .history_into(&self.nodes, &self.values, m, t_new, &mut history);
        let f = (self.forcing)(t_new);
        if f.len() != n {
            return Err(Error::Shape {
                expected: n,
                got: f.len(),
            });
        }
        let prev = &self.values[m - 1];
        let rhs: Vec<f64> = (0..n).map(|i| f[i] + mu * prev[i] - history[i]).collect();
        self.op.solve_shifted(mu, &rhs)
    }

    /// Commits a node computed by [`L1State::step`].
    pub fn push(&mut self, t: f64, u: Vec<f64>) {
        debug_assert!(t > self.last_time());
        self.nodes.push(t);
        self.values.push(u);
    }

    /// Removes the most recent node (never the initial one).
    pub fn pop(&mut self) -> Option<(f64, Vec<f64>)> {
        if self.nodes.len() <= 1 {
            return None;
        }
        Some((self.nodes.pop()?, self.values.pop()?))
    }

    pub fn into_solution(self, first_interval: FirstInterval) -> Result<TimeGridFunction> {
        TimeGridFunction::new(TemporalMesh::new(self.nodes)?, self.values, first_interval)
    }
}

/// Runs the L1 scheme over every node of `mesh`.
pub fn l1_solve_all(
    alpha: f64,
    op: &SpatialOperator,
    mesh: &TemporalMesh,
    u0: Vec<f64>,
    forcing: &Forcing<'_>,
) -> Result<TimeGridFunction> {
    let mut state = L1State::new(alpha, op, u0, forcing)?;
    for &t in &mesh.nodes()[1..] {
        let u = state.step(t)?;
        state.push(t, u);
    }
    state.into_solution(FirstInterval::Linear)
}
