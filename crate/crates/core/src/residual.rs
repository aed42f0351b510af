//! Residual of the L1 interpolant between collocation nodes.
//!
//! Inside interval `m` the residual is assembled as `g - g^I + R^I`, where
//! `g = D^a u_h - f`, `g^I` is its linear interpolant between `t_{m-1}` and
//! `t_m`, and `R^I = (L u^0 - f(0)) (1 - t/t_1)^+`. Because `L u_h` is linear
//! in time on each interval, this never needs `L` applied to anything but the
//! initial data.

use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::fracops::{interval_of, CaputoKernel, FirstInterval, TimeGridFunction};
use crate::spatial::{Norm, SpatialOperator};
use crate::specfun::gamma;
use crate::stepper::Forcing;

/// How the computed solution is interpreted near `t = 0`.
#[derive(Debug, Clone, PartialEq)]
pub enum ResidualMode {
    Standard,
    /// `u_h(0+) - u_0 = jump`; adds `jump * t^{-a} / Gamma(1-a)`.
    JumpAtZero(Vec<f64>),
    /// `u_h` held at `u^1` on `(0, t1]` and reset to `u^0` at `t = 0`.
    ProblemC {
        t1: f64,
        u1_minus_u0: Vec<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SampleDistribution {
    #[default]
    Chebyshev,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SamplePlan {
    pub points_per_interval: usize,
    pub distribution: SampleDistribution,
}

impl Default for SamplePlan {
    fn default() -> Self {
        Self {
            points_per_interval: 16,
            distribution: SampleDistribution::Chebyshev,
        }
    }
}

impl SamplePlan {
    pub fn new(points_per_interval: usize, distribution: SampleDistribution) -> Result<Self> {
        let plan = Self {
            points_per_interval,
            distribution,
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        if self.points_per_interval < 3 {
            return domain(format!(
                "need at least 3 sample points per interval, got {}",
                self.points_per_interval
            ));
        }
        Ok(())
    }

    /// Sample times strictly inside `(a, b)`, increasing.
    pub fn points(&self, a: f64, b: f64) -> Vec<f64> {
        let n = self.points_per_interval;
        let len = b - a;
        (0..n)
            .map(|i| {
                let s = match self.distribution {
                    SampleDistribution::Chebyshev => {
                        let theta = (2 * i + 1) as f64 * std::f64::consts::PI / (2 * n) as f64;
                        0.5 * (1.0 - theta.cos())
                    }
                    SampleDistribution::Uniform => (i + 1) as f64 / (n + 1) as f64,
                };
                a + len * s
            })
            .collect()
    }
}

/// Outcome of checking one interval against a residual threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalCheck {
    pub passed: bool,
    /// `max ||R_h(t)|| / threshold(t)` over the samples.
    pub worst_ratio: f64,
    pub worst_time: f64,
    /// `(t, ||R_h(t)||)` for every sample, in time order.
    pub samples: Vec<(f64, f64)>,
}

/// Residual evaluation over raw node data; used both on finished solutions
/// and on the adaptive controller's trial history.
pub struct ResidualEvaluator<'a> {
    kernel: CaputoKernel,
    op: &'a SpatialOperator,
    forcing: &'a Forcing<'a>,
    nodes: &'a [f64],
    values: &'a [Vec<f64>],
    mode: &'a ResidualMode,
    inv_gamma_1ma: f64,
    /// `L u^0 - f(0)` (Standard / JumpAtZero) or `L u^1` (ProblemC).
    anchor: Vec<f64>,
}

impl<'a> ResidualEvaluator<'a> {
    pub fn new(
        alpha: f64,
        op: &'a SpatialOperator,
        forcing: &'a Forcing<'a>,
        nodes: &'a [f64],
        values: &'a [Vec<f64>],
        mode: &'a ResidualMode,
    ) -> Result<Self> {
        let kernel = CaputoKernel::new(alpha)?;
        if nodes.len() != values.len() || nodes.len() < 2 {
            return Err(Error::Shape {
                expected: nodes.len().max(2),
                got: values.len(),
            });
        }
        let n = op.dim();
        if let Some(bad) = values.iter().find(|v| v.len() != n) {
            return Err(Error::Shape {
                expected: n,
                got: bad.len(),
            });
        }
        let anchor = match mode {
            ResidualMode::Standard | ResidualMode::JumpAtZero(_) => {
                let mut a = op.apply(&values[0])?;
                let f0 = forcing(0.0);
                if f0.len() != n {
                    return Err(Error::Shape {
                        expected: n,
                        got: f0.len(),
                    });
                }
                a.iter_mut().zip(&f0).for_each(|(a, f)| *a -= f);
                a
            }
            ResidualMode::ProblemC { .. } => op.apply(&values[1])?,
        };
        match mode {
            ResidualMode::JumpAtZero(j) if j.len() != n => {
                return Err(Error::Shape {
                    expected: n,
                    got: j.len(),
                })
            }
            ResidualMode::ProblemC { t1, u1_minus_u0 } => {
                if u1_minus_u0.len() != n {
                    return Err(Error::Shape {
                        expected: n,
                        got: u1_minus_u0.len(),
                    });
                }
                if *t1 != nodes[1] {
                    return domain(format!("problem-C mode t1 = {t1} differs from first node {}", nodes[1]));
                }
            }
            _ => {}
        }
        Ok(Self {
            kernel,
            op,
            forcing,
            nodes,
            values,
            mode,
            inv_gamma_1ma: 1.0 / gamma(1.0 - alpha)?,
            anchor,
        })
    }

    fn forcing_at(&self, t: f64) -> Result<Vec<f64>> {
        let f = (self.forcing)(t);
        if f.len() != self.op.dim() {
            return Err(Error::Shape {
                expected: self.op.dim(),
                got: f.len(),
            });
        }
        Ok(f)
    }

    /// `g(t) = D^a u_h(t) - f(t)` for the linear interpolant; `g(0) = -f(0)`.
    fn g(&self, t: f64) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.op.dim()];
        if t > 0.0 {
            self.kernel.eval_into(self.nodes, self.values, t, &mut out);
        }
        let f = self.forcing_at(t)?;
        out.iter_mut().zip(&f).for_each(|(d, f)| *d -= f);
        Ok(out)
    }

    /// Extra term from the jump at `t = 0` (zero in Standard mode).
    fn add_mode_term(&self, t: f64, r: &mut [f64]) -> Result<()> {
        match self.mode {
            ResidualMode::Standard => {}
            ResidualMode::JumpAtZero(jump) => {
                let c = t.powf(-self.kernel.alpha()) * self.inv_gamma_1ma;
                r.iter_mut().zip(jump).for_each(|(r, j)| *r += c * j);
            }
            ResidualMode::ProblemC { t1, u1_minus_u0 } => {
                if t > *t1 {
                    let s = crate::fracops::sigma_correction(self.kernel.alpha(), *t1, t)?;
                    let c = s * self.inv_gamma_1ma;
                    r.iter_mut().zip(u1_minus_u0).for_each(|(r, d)| *r += c * d);
                }
            }
        }
        Ok(())
    }

    fn locate(&self, t: f64) -> Result<usize> {
        if !(t > 0.0) {
            return domain(format!("residual requires t > 0, got {t}"));
        }
        interval_of(self.nodes, t)
            .ok_or_else(|| Error::Domain(format!("t = {t} outside (0, {}]", self.nodes[self.nodes.len() - 1])))
    }

    /// On the held-constant first interval of problem C.
    fn problem_c_first(&self, t: f64) -> Result<Vec<f64>> {
        let ResidualMode::ProblemC { u1_minus_u0, .. } = self.mode else {
            unreachable!()
        };
        let c = t.powf(-self.kernel.alpha()) * self.inv_gamma_1ma;
        let f = self.forcing_at(t)?;
        Ok((0..f.len())
            .map(|i| c * u1_minus_u0[i] + self.anchor[i] - f[i])
            .collect())
    }

    /// Residual vector at a node `t_j`, `j >= 1`, by direct evaluation.
    pub fn at_node(&self, j: usize) -> Result<Vec<f64>> {
        if j == 0 || j >= self.nodes.len() {
            return domain(format!("node index {j} out of range"));
        }
        let t = self.nodes[j];
        if let ResidualMode::ProblemC { t1, .. } = self.mode {
            if t <= *t1 {
                return self.problem_c_first(t);
            }
        }
        let mut r = self.g(t)?;
        let lu = self.op.apply(&self.values[j])?;
        r.iter_mut().zip(&lu).for_each(|(r, l)| *r += l);
        self.add_mode_term(t, &mut r)?;
        Ok(r)
    }

    /// Residual vector at an interior point of interval `m`, given `g` at its
    /// endpoints.
    fn interior(&self, m: usize, t: f64, g_left: &[f64], g_right: &[f64]) -> Result<Vec<f64>> {
        if let ResidualMode::ProblemC { t1, .. } = self.mode {
            if t <= *t1 {
                return self.problem_c_first(t);
            }
        }
        let (a, b) = (self.nodes[m - 1], self.nodes[m]);
        let theta = (t - a) / (b - a);
        let mut r = self.g(t)?;
        for i in 0..r.len() {
            r[i] -= g_left[i] + theta * (g_right[i] - g_left[i]);
        }
        if m == 1 && !matches!(self.mode, ResidualMode::ProblemC { .. }) {
            let w = 1.0 - theta;
            r.iter_mut().zip(&self.anchor).for_each(|(r, a)| *r += w * a);
        }
        self.add_mode_term(t, &mut r)?;
        Ok(r)
    }

    fn endpoint_g(&self, m: usize) -> Result<(Vec<f64>, Vec<f64>)> {
        Ok((self.g(self.nodes[m - 1])?, self.g(self.nodes[m])?))
    }

    /// Residual vector at any `t in (0, T]`.
    pub fn residual(&self, t: f64) -> Result<Vec<f64>> {
        let m = self.locate(t)?;
        if t == self.nodes[m] {
            return self.at_node(m);
        }
        let (gl, gr) = self.endpoint_g(m)?;
        self.interior(m, t, &gl, &gr)
    }

    pub fn norm_at(&self, t: f64, norm: Norm) -> Result<f64> {
        Ok(self.op.norm(&self.residual(t)?, norm))
    }

    /// Samples interval `m` and compares against `threshold(t)`
    /// (typically `TOL * R_p(t)`).
    pub fn check_interval(
        &self,
        m: usize,
        threshold: &(dyn Fn(f64) -> f64 + Sync),
        plan: &SamplePlan,
        norm: Norm,
    ) -> Result<IntervalCheck> {
        plan.validate()?;
        if m == 0 || m >= self.nodes.len() {
            return domain(format!("interval index {m} out of range"));
        }
        let (gl, gr) = self.endpoint_g(m)?;
        let times = plan.points(self.nodes[m - 1], self.nodes[m]);
        let evals: Vec<Result<(f64, f64, f64)>> = times
            .par_iter()
            .map(|&t| {
                let r = self.op.norm(&self.interior(m, t, &gl, &gr)?, norm);
                let thr = threshold(t);
                let ratio = if r == 0.0 {
                    0.0
                } else if thr > 0.0 {
                    r / thr
                } else {
                    f64::INFINITY
                };
                Ok((t, r, ratio))
            })
            .collect();
        let mut samples = Vec::with_capacity(evals.len());
        let (mut worst_ratio, mut worst_time) = (f64::NEG_INFINITY, times[0]);
        for e in evals {
            let (t, r, ratio) = e?;
            if ratio > worst_ratio || ratio.is_nan() {
                worst_ratio = ratio;
                worst_time = t;
            }
            samples.push((t, r));
        }
        Ok(IntervalCheck {
            passed: worst_ratio <= 1.0,
            worst_ratio,
            worst_time,
            samples,
        })
    }
}

fn check_mode(u: &TimeGridFunction, mode: &ResidualMode) -> Result<()> {
    let constant = u.first_interval() == FirstInterval::ConstantEqualToU1;
    match (mode, constant) {
        (ResidualMode::ProblemC { .. }, false) => Err(Error::State(
            "problem-C mode needs a solution held constant on the first interval".into(),
        )),
        (ResidualMode::ProblemC { .. }, true) => Ok(()),
        (_, true) => Err(Error::State(
            "a solution held constant on the first interval needs problem-C mode".into(),
        )),
        _ => Ok(()),
    }
}

/// `||R_h(t)||` for a finished solution. At mesh nodes the residual is
/// evaluated directly (and should vanish up to rounding in Standard mode).
pub fn residual_norm_at(
    alpha: f64,
    u: &TimeGridFunction,
    mode: &ResidualMode,
    op: &SpatialOperator,
    f: &Forcing<'_>,
    t: f64,
    norm: Norm,
) -> Result<f64> {
    check_mode(u, mode)?;
    ResidualEvaluator::new(alpha, op, f, u.mesh().nodes(), u.values(), mode)?.norm_at(t, norm)
}

/// Sampled check of `||R_h(t)|| <= threshold(t)` on interval `m` of `u`.
#[allow(clippy::too_many_arguments)]
pub fn interval_check(
    alpha: f64,
    u: &TimeGridFunction,
    mode: &ResidualMode,
    op: &SpatialOperator,
    f: &Forcing<'_>,
    m: usize,
    threshold: &(dyn Fn(f64) -> f64 + Sync),
    plan: &SamplePlan,
    norm: Norm,
) -> Result<IntervalCheck> {
    check_mode(u, mode)?;
    ResidualEvaluator::new(alpha, op, f, u.mesh().nodes(), u.values(), mode)?.check_interval(m, threshold, plan, norm)
}

/// The problem-C mode matching a solution's first two nodes.
pub fn problem_c_mode(u: &TimeGridFunction) -> ResidualMode {
    let v = u.values();
    ResidualMode::ProblemC {
        t1: u.mesh().nodes()[1],
        u1_minus_u0: v[1].iter().zip(&v[0]).map(|(a, b)| a - b).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fracops::{caputo_pwlinear, TemporalMesh};
    use crate::stepper::l1_solve_all;

    fn forcing_a(alpha: f64) -> impl Fn(f64) -> Vec<f64> + Sync {
        let g1 = gamma(1.0 + alpha).unwrap();
        let g3 = gamma(3.0 - alpha).unwrap();
        move |t: f64| vec![g1 - 2.0 / g3 * t.powf(2.0 - alpha) + 3.0 * (t.powf(alpha) - t * t)]
    }

    fn run_a(alpha: f64, mesh: &TemporalMesh) -> (SpatialOperator, TimeGridFunction) {
        let op = SpatialOperator::scalar_shift(3.0).unwrap();
        let f = forcing_a(alpha);
        let u = l1_solve_all(alpha, &op, mesh, vec![0.0], &f).unwrap();
        (op, u)
    }

    /// Residual with `L` applied at every sample: `D^a u_h + L u_h - f`.
    fn brute(alpha: f64, u: &TimeGridFunction, t: f64) -> f64 {
        let f = forcing_a(alpha);
        let d = caputo_pwlinear(alpha, u, t).unwrap().value[0];
        d + 3.0 * u.value_at(t).unwrap()[0] - f(t)[0]
    }

    #[test]
    fn chebyshev_points_are_interior_and_increasing() {
        let pts = SamplePlan::default().points(1.0, 2.0);
        assert_eq!(pts.len(), 16);
        assert!(pts[0] > 1.0 && pts[15] < 2.0);
        assert!(pts.windows(2).all(|w| w[0] < w[1]));
        assert!(SamplePlan::new(2, SampleDistribution::Uniform).is_err());
        let u = SamplePlan::new(3, SampleDistribution::Uniform)
            .unwrap()
            .points(0.0, 4.0);
        assert_eq!(u, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn vanishes_at_nodes() {
        let alpha = 0.5;
        let mesh = TemporalMesh::graded(1.0, 20, 3.0).unwrap();
        let (op, u) = run_a(alpha, &mesh);
        let f = forcing_a(alpha);
        for &t in &mesh.nodes()[1..] {
            let r = residual_norm_at(alpha, &u, &ResidualMode::Standard, &op, &f, t, Norm::L2).unwrap();
            assert!(r <= 1e-10 * (1.0 + f(t)[0].abs()), "t = {t}: {r}");
        }
    }

    #[test]
    fn trick_matches_brute_force() {
        let alpha = 0.35;
        let mesh = TemporalMesh::new(vec![0.0, 0.05, 0.12, 0.3, 0.55, 1.0]).unwrap();
        let (op, u) = run_a(alpha, &mesh);
        let f = forcing_a(alpha);
        let ev = ResidualEvaluator::new(alpha, &op, &f, mesh.nodes(), u.values(), &ResidualMode::Standard).unwrap();
        for w in mesh.nodes().windows(2) {
            for s in [0.01, 0.3, 0.5, 0.77, 0.99] {
                let t = w[0] + s * (w[1] - w[0]);
                let trick = ev.residual(t).unwrap()[0];
                assert!((trick - brute(alpha, &u, t)).abs() < 1e-8, "t = {t}");
            }
        }
    }

    #[test]
    fn trick_matches_brute_force_on_laplacian() {
        let alpha = 0.6;
        let op = SpatialOperator::laplacian_1d(std::f64::consts::PI, 8, 0.0, 1.0).unwrap();
        let grid = op.grid();
        let u0: Vec<f64> = grid.iter().map(|x| x.sin() + 0.2 * (2.0 * x).sin()).collect();
        let f = |t: f64| grid.iter().map(|x| (1.0 + t) * (x * x / 3.0).cos()).collect::<Vec<_>>();
        let mesh = TemporalMesh::new(vec![0.0, 0.1, 0.25, 0.6]).unwrap();
        let u = l1_solve_all(alpha, &op, &mesh, u0, &f).unwrap();
        let ev = ResidualEvaluator::new(alpha, &op, &f, mesh.nodes(), u.values(), &ResidualMode::Standard).unwrap();
        for t in [0.03, 0.09, 0.11, 0.2, 0.4, 0.59] {
            let trick = ev.residual(t).unwrap();
            let d = caputo_pwlinear(alpha, &u, t).unwrap().value;
            let lu = op.apply(&u.value_at(t).unwrap()).unwrap();
            let ft = f(t);
            for i in 0..trick.len() {
                assert!((trick[i] - (d[i] + lu[i] - ft[i])).abs() < 1e-8 * (1.0 + ft[i].abs()));
            }
        }
    }

    #[test]
    fn exact_injection_gives_positive_bubble() {
        // Exact node values are not collocated, so the residual is sampled
        // mid-interval and must shrink like tau^{2-a} under refinement.
        let alpha = 0.5;
        let op = SpatialOperator::scalar_shift(3.0).unwrap();
        let f = forcing_a(alpha);
        let worst = |m: usize| {
            let mesh = TemporalMesh::uniform(1.0, m).unwrap();
            let vals: Vec<f64> = mesh.nodes().iter().map(|t| t.powf(alpha) - t * t).collect();
            let u = TimeGridFunction::scalar(mesh.nodes().to_vec(), &vals).unwrap();
            mesh.nodes()
                .windows(2)
                .skip(m / 2)
                .map(|w| {
                    let r = residual_norm_at(
                        alpha,
                        &u,
                        &ResidualMode::Standard,
                        &op,
                        &f,
                        0.5 * (w[0] + w[1]),
                        Norm::L2,
                    )
                    .unwrap();
                    assert!(r > 0.0);
                    r
                })
                .fold(0.0, f64::max)
        };
        let (coarse, fine) = (worst(10), worst(40));
        assert!(coarse < 0.1);
        let rate = (coarse / fine).log2() / 2.0;
        assert!(rate > 1.2, "rate {rate}");
    }

    #[test]
    fn zero_jump_matches_standard_bitwise() {
        let alpha = 0.7;
        let mesh = TemporalMesh::graded(1.0, 9, 2.0).unwrap();
        let (op, u) = run_a(alpha, &mesh);
        let f = forcing_a(alpha);
        let jump = ResidualMode::JumpAtZero(vec![0.0]);
        let plan = SamplePlan::default();
        let thr = |_t: f64| 1.0;
        for m in 1..=9 {
            let a = interval_check(alpha, &u, &ResidualMode::Standard, &op, &f, m, &thr, &plan, Norm::L2).unwrap();
            let b = interval_check(alpha, &u, &jump, &op, &f, m, &thr, &plan, Norm::L2).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn bubble_vanishes_toward_both_nodes() {
        let alpha = 0.4;
        let mesh = TemporalMesh::graded(1.0, 12, 1.5).unwrap();
        let (op, u) = run_a(alpha, &mesh);
        let f = forcing_a(alpha);
        let ev = ResidualEvaluator::new(alpha, &op, &f, mesh.nodes(), u.values(), &ResidualMode::Standard).unwrap();
        let n = mesh.nodes();
        for m in 2..=12 {
            let len = n[m] - n[m - 1];
            let mid = ev.norm_at(n[m - 1] + 0.5 * len, Norm::L2).unwrap();
            let near_l = ev.norm_at(n[m - 1] + 1e-9 * len, Norm::L2).unwrap();
            let near_r = ev.norm_at(n[m] - 1e-9 * len, Norm::L2).unwrap();
            assert!(mid > 0.0);
            assert!(near_l < 1e-3 * mid && near_r < 1e-3 * mid, "m = {m}");
        }
    }

    #[test]
    fn threshold_extremes() {
        let alpha = 0.5;
        let mesh = TemporalMesh::uniform(1.0, 4).unwrap();
        let (op, u) = run_a(alpha, &mesh);
        let f = forcing_a(alpha);
        let plan = SamplePlan::default();
        let huge = |_t: f64| 1e300;
        let c = interval_check(alpha, &u, &ResidualMode::Standard, &op, &f, 2, &huge, &plan, Norm::L2).unwrap();
        assert!(c.passed && c.worst_ratio < 1e-290);
        let zero = |_t: f64| 0.0;
        let c = interval_check(alpha, &u, &ResidualMode::Standard, &op, &f, 2, &zero, &plan, Norm::L2).unwrap();
        assert!(!c.passed && c.worst_ratio.is_infinite());
    }

    #[test]
    fn oversized_first_step_fails() {
        let alpha = 0.7;
        let mesh = TemporalMesh::new(vec![0.0, 0.5]).unwrap();
        let (op, u) = run_a(alpha, &mesh);
        let f = forcing_a(alpha);
        let g = gamma(1.0 - alpha).unwrap();
        let thr = move |t: f64| 1e-3 * (t.powf(-alpha) / g + 3.0);
        let c = interval_check(
            alpha,
            &u,
            &ResidualMode::Standard,
            &op,
            &f,
            1,
            &thr,
            &SamplePlan::default(),
            Norm::L2,
        )
        .unwrap();
        assert!(!c.passed && c.worst_ratio > 1.0);
    }

    #[test]
    fn problem_c_first_interval_formula() {
        let alpha = 0.6;
        let op = SpatialOperator::laplacian_1d(std::f64::consts::PI, 10, 0.0, 1.0).unwrap();
        let u0: Vec<f64> = op
            .grid()
            .iter()
            .map(|&x| {
                if x <= 1.0 {
                    x
                } else {
                    1.0 - (x - 1.0) / (std::f64::consts::PI - 1.0)
                }
            })
            .collect();
        let f = |_t: f64| vec![0.0; 9];
        let mesh = TemporalMesh::new(vec![0.0, 0.01, 0.03]).unwrap();
        let u = l1_solve_all(alpha, &op, &mesh, u0, &f)
            .unwrap()
            .with_first_interval(FirstInterval::ConstantEqualToU1);
        let mode = problem_c_mode(&u);
        let t = 0.005;
        let got = residual_norm_at(alpha, &u, &mode, &op, &f, t, Norm::L2).unwrap();
        let c = t.powf(-alpha) / gamma(1.0 - alpha).unwrap();
        let lu1 = op.apply(&u.values()[1]).unwrap();
        let want: Vec<f64> = (0..9)
            .map(|i| c * (u.values()[1][i] - u.values()[0][i]) + lu1[i])
            .collect();
        assert!((got - op.norm(&want, Norm::L2)).abs() < 1e-12 * got);
        assert!(residual_norm_at(alpha, &u, &ResidualMode::Standard, &op, &f, t, Norm::L2).is_err());
        // the sigma term makes the held-constant interpolant's residual exact
        let t = 0.02;
        let r = residual_norm_at(alpha, &u, &mode, &op, &f, t, Norm::L2).unwrap();
        assert!(r.is_finite() && r > 0.0);
    }

    #[test]
    fn out_of_range() {
        let mesh = TemporalMesh::uniform(1.0, 2).unwrap();
        let (op, u) = run_a(0.5, &mesh);
        let f = forcing_a(0.5);
        for t in [0.0, -1.0, 1.5] {
            assert!(residual_norm_at(0.5, &u, &ResidualMode::Standard, &op, &f, t, Norm::L2).is_err());
        }
    }
}
