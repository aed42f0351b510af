//! A posteriori error bounds from a sampled residual trace (diagnostics only;
//! the adaptive controller works with barriers alone).
//!
//! `inv_op_apply` evaluates `(D^a + lambda)^{-1} ||R_h||`, i.e. the
//! convolution with `s^{a-1} E_{a,a}(-lambda s^a)`; `sup_bounds` evaluates
//! the cheaper barrier-weighted supremum.

use crate::barriers::{Barrier, BarrierKind, ProfileKind};
use crate::error::{domain, Error, Result};
use crate::fracops::TimeGridFunction;
use crate::residual::{ResidualEvaluator, ResidualMode, SamplePlan};
use crate::spatial::{Norm, SpatialOperator};
use crate::specfun::{gamma, mlf, MlfAccuracy};
use crate::stepper::Forcing;

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualTrace {
    times: Vec<f64>,
    norms: Vec<f64>,
    alpha: f64,
    lambda: f64,
}

impl ResidualTrace {
    pub fn new(times: Vec<f64>, norms: Vec<f64>, alpha: f64, lambda: f64) -> Result<Self> {
        if times.len() != norms.len() {
            return Err(Error::Shape {
                expected: times.len(),
                got: norms.len(),
            });
        }
        if times.is_empty() {
            return domain("residual trace is empty");
        }
        if !(times[0] > 0.0) || times.windows(2).any(|w| !(w[0] < w[1])) {
            return domain("trace times must be positive and strictly increasing");
        }
        if norms.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return domain("trace norms must be finite and non-negative");
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return domain(format!("fractional order must lie in (0, 1), got {alpha}"));
        }
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return domain(format!("lambda must be finite and non-negative, got {lambda}"));
        }
        Ok(Self {
            times,
            norms,
            alpha,
            lambda,
        })
    }

    /// Samples `||R_h||` on every interval of `u` (plan points plus the
    /// right node of each interval).
    pub fn sample(
        alpha: f64,
        u: &TimeGridFunction,
        mode: &ResidualMode,
        op: &SpatialOperator,
        f: &Forcing<'_>,
        plan: &SamplePlan,
        norm: Norm,
    ) -> Result<Self> {
        let nodes = u.mesh().nodes();
        let ev = ResidualEvaluator::new(alpha, op, f, nodes, u.values(), mode)?;
        let never = |_t: f64| f64::INFINITY;
        let (mut times, mut norms) = (Vec::new(), Vec::new());
        for (m, &node) in nodes.iter().enumerate().skip(1) {
            let check = ev.check_interval(m, &never, plan, norm)?;
            for (t, r) in check.samples {
                times.push(t);
                norms.push(r);
            }
            times.push(node);
            norms.push(op.norm(&ev.at_node(m)?, norm));
        }
        Self::new(times, norms, alpha, op.lambda())
    }

    pub fn with_lambda(mut self, lambda: f64) -> Result<Self> {
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return domain(format!("lambda must be finite and non-negative, got {lambda}"));
        }
        self.lambda = lambda;
        Ok(self)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn norms(&self) -> &[f64] {
        &self.norms
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    fn check_t(&self, t: f64) -> Result<()> {
        let last = self.times[self.times.len() - 1];
        if !(t > 0.0) || t > last {
            return domain(format!("t = {t} outside the trace coverage (0, {last}]"));
        }
        Ok(())
    }
}

/// `(D^a + lambda)^{-1} v (t)` for `v` held constant on the cells around each
/// sample (cell edges at sample midpoints, first cell starting at 0).
pub fn inv_op_apply(trace: &ResidualTrace, t: f64) -> Result<f64> {
    trace.check_t(t)?;
    let (alpha, lambda) = (trace.alpha, trace.lambda);
    let acc = MlfAccuracy::with_rel_tol(1e-12);
    let ga1 = gamma(alpha + 1.0)?;
    // Antiderivative in s of the kernel, up to a constant: F(s) with
    // int_a^b k(t-s) ds = F(b) - F(a).
    let anti = |s: f64| -> Result<f64> {
        let x = (t - s).max(0.0).powf(alpha);
        if lambda == 0.0 {
            Ok(-x / ga1)
        } else {
            Ok(mlf(alpha, 1.0, -lambda * x, &acc)? / lambda)
        }
    };
    let times = &trace.times;
    let mut total = 0.0;
    let mut a = 0.0;
    let mut fa = anti(a)?;
    for (i, &v) in trace.norms.iter().enumerate() {
        let edge = if i + 1 < times.len() {
            0.5 * (times[i] + times[i + 1])
        } else {
            times[i]
        };
        let b = edge.min(t);
        if b > a {
            let fb = anti(b)?;
            if v > 0.0 {
                total += v * (fb - fa);
            }
            a = b;
            fa = fb;
        }
        if b >= t {
            break;
        }
    }
    Ok(total.max(0.0))
}

/// `sup_{s_i <= t} ||R_h(s_i)|| / R_0(s_i)`, or for `R1` the same supremum
/// against `R_1` multiplied by `E_1(t)`.
pub fn sup_bounds(trace: &ResidualTrace, barrier: &Barrier, t: f64) -> Result<f64> {
    trace.check_t(t)?;
    let mut sup = 0.0f64;
    for (&s, &v) in trace.times.iter().zip(&trace.norms) {
        if s > t {
            break;
        }
        sup = sup.max(v / barrier.value(s)?);
    }
    Ok(match barrier.kind() {
        BarrierKind::R0 => sup,
        BarrierKind::R1 => {
            let tau = barrier.tau().expect("R1 carries tau");
            sup * crate::barriers::profile_value(ProfileKind::E1, barrier.alpha(), tau, t)?
        }
    })
}
