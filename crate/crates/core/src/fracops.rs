//! Temporal meshes, piecewise-linear-in-time grid functions, and exact
//! Caputo derivatives of their interpolants.
//!
//! For the continuous piecewise-linear interpolant of node values `u^j` on
//! the mesh `t_0 = 0 < t_1 < ... < t_M`,
//!
//! ```text
//! D^a u(t) = 1/Gamma(2-a) sum_{j: t_{j-1} < t} s_j [ (t - t_{j-1})^{1-a} - (t - t_j)_+^{1-a} ]
//! ```
//!
//! with slopes `s_j = (u^j - u^{j-1}) / (t_j - t_{j-1})`. Everything here
//! evaluates that sum in closed form; quadrature appears only in the
//! independent cross-check [`caputo_via_eq7`].

use crate::error::{domain, Error, Result};
use crate::quad::{self, QuadOptions};
use crate::specfun::gamma;

/// Strictly increasing time nodes starting at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalMesh {
    nodes: Vec<f64>,
}

impl TemporalMesh {
    pub fn new(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 {
            return domain("a temporal mesh needs at least two nodes");
        }
        if nodes[0] != 0.0 {
            return domain(format!("a temporal mesh must start at t = 0, got {}", nodes[0]));
        }
        for w in nodes.windows(2) {
            if !(w[1] > w[0]) || !w[1].is_finite() {
                return domain(format!(
                    "mesh nodes must be strictly increasing ({} then {})",
                    w[0], w[1]
                ));
            }
        }
        Ok(Self { nodes })
    }

    /// Graded mesh `t_j = T (j/M)^r`.
    pub fn graded(final_time: f64, steps: usize, grading: f64) -> Result<Self> {
        if steps < 1 {
            return domain("graded mesh needs at least one step");
        }
        if !(grading >= 1.0) {
            return domain(format!("grading exponent must be >= 1, got {grading}"));
        }
        if !(final_time > 0.0) {
            return domain(format!("final time must be positive, got {final_time}"));
        }
        let m = steps as f64;
        let mut nodes: Vec<f64> = (0..=steps).map(|j| final_time * (j as f64 / m).powf(grading)).collect();
        nodes[steps] = final_time;
        Self::new(nodes)
    }

    pub fn uniform(final_time: f64, steps: usize) -> Result<Self> {
        Self::graded(final_time, steps, 1.0)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Number of steps `M`.
    pub fn steps(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn final_time(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    /// Index `m` of the interval `(t_{m-1}, t_m]` containing `t`.
    pub fn interval_of(&self, t: f64) -> Option<usize> {
        interval_of(&self.nodes, t)
    }

    pub fn into_nodes(self) -> Vec<f64> {
        self.nodes
    }
}

pub(crate) fn interval_of(nodes: &[f64], t: f64) -> Option<usize> {
    let last = *nodes.last()?;
    if !(t > nodes[0]) || t > last {
        return None;
    }
    // First node >= t.
    Some(nodes.partition_point(|&x| x < t))
}

/// How the grid function is interpolated on the first interval `(0, t_1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FirstInterval {
    /// Standard piecewise-linear interpolation everywhere.
    Linear,
    /// `u_h(t) := u^1` on `(0, t_1]`, discontinuous at `t = 0`.
    ConstantEqualToU1,
}

/// Node values of a semi-discrete solution on a temporal mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGridFunction {
    mesh: TemporalMesh,
    values: Vec<Vec<f64>>,
    first_interval: FirstInterval,
    initial_jump: Option<Vec<f64>>,
}

impl TimeGridFunction {
    pub fn new(mesh: TemporalMesh, values: Vec<Vec<f64>>, first_interval: FirstInterval) -> Result<Self> {
        if values.len() != mesh.nodes.len() {
            return Err(Error::Shape {
                expected: mesh.nodes.len(),
                got: values.len(),
            });
        }
        let dim = values[0].len();
        if let Some(bad) = values.iter().find(|v| v.len() != dim) {
            return Err(Error::Shape {
                expected: dim,
                got: bad.len(),
            });
        }
        let initial_jump = match first_interval {
            FirstInterval::Linear => None,
            FirstInterval::ConstantEqualToU1 => Some(values[1].iter().zip(&values[0]).map(|(a, b)| a - b).collect()),
        };
        Ok(Self {
            mesh,
            values,
            first_interval,
            initial_jump,
        })
    }

    pub fn linear(mesh: TemporalMesh, values: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(mesh, values, FirstInterval::Linear)
    }

    /// Scalar convenience constructor.
    pub fn scalar(nodes: Vec<f64>, values: &[f64]) -> Result<Self> {
        Self::linear(TemporalMesh::new(nodes)?, values.iter().map(|&v| vec![v]).collect())
    }

    pub fn mesh(&self) -> &TemporalMesh {
        &self.mesh
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn first_interval(&self) -> FirstInterval {
        self.first_interval
    }

    /// `u_h(0+) - u_0` when the first interval is held constant.
    pub fn initial_jump(&self) -> Option<&[f64]> {
        self.initial_jump.as_deref()
    }

    pub fn dim(&self) -> usize {
        self.values[0].len()
    }

    pub fn terminal(&self) -> &[f64] {
        &self.values[self.values.len() - 1]
    }

    /// Same node data with a different first-interval interpolation.
    pub fn with_first_interval(self, first_interval: FirstInterval) -> Self {
        Self::new(self.mesh, self.values, first_interval).expect("shape already validated")
    }

    /// Interpolated value at `t in [0, T]`.
    pub fn value_at(&self, t: f64) -> Result<Vec<f64>> {
        let nodes = self.mesh.nodes();
        if t == 0.0 {
            return Ok(self.values[0].clone());
        }
        let m = interval_of(nodes, t)
            .ok_or_else(|| Error::Domain(format!("t = {t} outside [0, {}]", self.mesh.final_time())))?;
        if m == 1 && self.first_interval == FirstInterval::ConstantEqualToU1 {
            return Ok(self.values[1].clone());
        }
        let theta = (t - nodes[m - 1]) / (nodes[m] - nodes[m - 1]);
        Ok(self.values[m - 1]
            .iter()
            .zip(&self.values[m])
            .map(|(a, b)| a + theta * (b - a))
            .collect())
    }
}

/// A sampled Caputo derivative.
#[derive(Debug, Clone, PartialEq)]
pub struct CaputoSample {
    pub t: f64,
    pub value: Vec<f64>,
}

/// Closed-form L1 kernel for a fixed order `alpha`.
#[derive(Debug, Clone, Copy)]
pub struct CaputoKernel {
    alpha: f64,
    beta: f64,
    inv_gamma_2ma: f64,
}

impl CaputoKernel {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return domain(format!("fractional order must lie in (0, 1), got {alpha}"));
        }
        Ok(Self {
            alpha,
            beta: 1.0 - alpha,
            inv_gamma_2ma: 1.0 / gamma(2.0 - alpha)?,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `1 / Gamma(2 - alpha)`.
    pub fn inv_gamma_2ma(&self) -> f64 {
        self.inv_gamma_2ma
    }

    /// Coefficient of `u^j - u^{j-1}` in `D^a u(t)` for the interval `[a, b]`.
    ///
    /// `[(t-a)^{1-alpha} - (t-b)_+^{1-alpha}] / ((b - a) Gamma(2-alpha))`, with
    /// the difference formed through `expm1`/`ln_1p` so that far-history
    /// intervals keep full relative accuracy.
    #[inline]
    pub fn weight(&self, t: f64, a: f64, b: f64) -> f64 {
        let len = b - a;
        let ta = t - a;
        if ta <= 0.0 {
            return 0.0;
        }
        let head = ta.powf(self.beta);
        let diff = if t <= b {
            head
        } else {
            -head * (self.beta * (-len / ta).ln_1p()).exp_m1()
        };
        diff * self.inv_gamma_2ma / len
    }

    /// `D^a` of the piecewise-linear interpolant at `t in (0, t_last]`,
    /// written into `out`. History is accumulated oldest-first with
    /// compensated summation.
    pub fn eval_into(&self, nodes: &[f64], values: &[Vec<f64>], t: f64, out: &mut [f64]) {
        self.accumulate(nodes, values, t, nodes.len(), out);
    }

    /// The history part `H_m`: contributions of intervals `j < m` at time `t`.
    pub fn history_into(&self, nodes: &[f64], values: &[Vec<f64>], m: usize, t: f64, out: &mut [f64]) {
        self.accumulate(nodes, values, t, m, out);
    }

    fn accumulate(&self, nodes: &[f64], values: &[Vec<f64>], t: f64, end: usize, out: &mut [f64]) {
        let n = out.len();
        out.fill(0.0);
        let mut comp = vec![0.0; n];
        for j in 1..end.min(values.len()) {
            if nodes[j - 1] >= t {
                break;
            }
            let w = self.weight(t, nodes[j - 1], nodes[j]);
            let (lo, hi) = (&values[j - 1], &values[j]);
            for i in 0..n {
                let v = w * (hi[i] - lo[i]);
                let s = out[i] + v;
                if out[i].abs() >= v.abs() {
                    comp[i] += (out[i] - s) + v;
                } else {
                    comp[i] += (v - s) + out[i];
                }
                out[i] = s;
            }
        }
        for i in 0..n {
            out[i] += comp[i];
        }
    }
}

/// Caputo derivative of the piecewise-linear interpolant of `u` at `t`.
pub fn caputo_pwlinear(alpha: f64, u: &TimeGridFunction, t: f64) -> Result<CaputoSample> {
    if u.first_interval != FirstInterval::Linear {
        return domain("caputo_pwlinear needs a Linear-mode grid function");
    }
    let nodes = u.mesh.nodes();
    if !(t > 0.0) || t > u.mesh.final_time() {
        return domain(format!("t = {t} outside (0, {}]", u.mesh.final_time()));
    }
    let kernel = CaputoKernel::new(alpha)?;
    let mut value = vec![0.0; u.dim()];
    kernel.eval_into(nodes, &u.values, t, &mut value);
    Ok(CaputoSample { t, value })
}

/// `t^{-alpha} / Gamma(1 - alpha)`: the Caputo derivative of the unit step
/// switched on at `t = 0+`.
pub fn caputo_e0(alpha: f64, t: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return domain(format!("fractional order must lie in (0, 1), got {alpha}"));
    }
    if !(t > 0.0) {
        return domain(format!("caputo_e0 requires t > 0, got {t}"));
    }
    Ok(t.powf(-alpha) / gamma(1.0 - alpha)?)
}

/// `sigma(t) = t^{-a} - [t^{1-a} - (t - t1)^{1-a}] / ((1-a) t1)` for `t > t1`.
///
/// Multiplied by `(u^1 - u^0) / Gamma(1-a)`, it converts the Caputo derivative
/// of the linear interpolant into that of the interpolant held at `u^1` on
/// `(0, t1]` (including its jump at zero).
pub fn sigma_correction(alpha: f64, t1: f64, t: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return domain(format!("fractional order must lie in (0, 1), got {alpha}"));
    }
    if !(t1 > 0.0) || !(t > t1) {
        return domain(format!("sigma_correction requires 0 < t1 < t, got t1 = {t1}, t = {t}"));
    }
    let beta = 1.0 - alpha;
    Ok(t.powf(-alpha) - (t.powf(beta) - (t - t1).powf(beta)) / (beta * t1))
}

/// Caputo derivative through the integrated-by-parts representation
///
/// ```text
/// Gamma(1-a) D^a v(t) = t^{-a} (v(t) - v(0)) + int_0^t a (t-s)^{-a-1} (v(t) - v(s)) ds
/// ```
///
/// evaluated with adaptive quadrature on every completed interval and in
/// closed form on the interval holding `t`. Intended as an independent check
/// of [`caputo_pwlinear`], not for production use.
pub fn caputo_via_eq7(alpha: f64, u: &TimeGridFunction, t: f64, quad_tol: f64) -> Result<CaputoSample> {
    if u.first_interval != FirstInterval::Linear {
        return domain("caputo_via_eq7 needs a Linear-mode grid function");
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return domain(format!("fractional order must lie in (0, 1), got {alpha}"));
    }
    let nodes = u.mesh.nodes();
    let k =
        interval_of(nodes, t).ok_or_else(|| Error::Domain(format!("t = {t} outside (0, {}]", u.mesh.final_time())))?;
    let g1 = gamma(1.0 - alpha)?;
    let mut value = Vec::with_capacity(u.dim());
    let opts = QuadOptions {
        abs_tol: quad_tol / k as f64,
        rel_tol: 0.0,
        max_intervals: 4000,
    };
    let beta = 1.0 - alpha;
    for i in 0..u.dim() {
        let node = |j: usize| u.values[j][i];
        let slope_k = (node(k) - node(k - 1)) / (nodes[k] - nodes[k - 1]);
        let vt = node(k - 1) + slope_k * (t - nodes[k - 1]);
        let mut total = t.powf(-alpha) * (vt - node(0));
        total += alpha * slope_k * (t - nodes[k - 1]).powf(beta) / beta;
        for j in 1..k {
            let (a, b) = (nodes[j - 1], nodes[j]);
            let slope = (node(j) - node(j - 1)) / (b - a);
            let base = node(j - 1);
            let integrand = |s: f64| alpha * (t - s).powf(-alpha - 1.0) * (vt - (base + slope * (s - a)));
            let r = quad::integrate(integrand, a, b, opts).map_err(|e| match e {
                Error::Accuracy { achieved, .. } => Error::Accuracy {
                    requested: quad_tol,
                    achieved,
                    context: format!("eq7 quadrature on [{a}, {b}]"),
                },
                other => other,
            })?;
            total += r.value;
        }
        value.push(total / g1);
    }
    Ok(CaputoSample { t, value })
}

/// Caputo derivative of an arbitrary scalar function `v` (with `v(0) = v0`,
/// possibly discontinuous at `0+`) by the same integrated-by-parts formula.
///
/// `breakpoints` lists interior points where `v` is not smooth. Near `s = t`
/// the substitution `t - s = z^{1/(1-a)}` absorbs the `(t-s)^{-a}`
/// singularity, so `v` must be differentiable just left of `t`.
pub fn caputo_eq7_fn<F: Fn(f64) -> f64>(
    alpha: f64,
    v: F,
    v0: f64,
    t: f64,
    breakpoints: &[f64],
    quad_tol: f64,
) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return domain(format!("fractional order must lie in (0, 1), got {alpha}"));
    }
    if !(t > 0.0) {
        return domain(format!("t must be positive, got {t}"));
    }
    let vt = v(t);
    let mut pts: Vec<f64> = std::iter::once(0.0)
        .chain(breakpoints.iter().copied().filter(|&b| b > 0.0 && b < t))
        .collect();
    pts.sort_by(f64::total_cmp);
    let last = *pts.last().expect("contains 0");
    let opts = QuadOptions {
        abs_tol: quad_tol / (pts.len() + 1) as f64,
        rel_tol: 0.0,
        max_intervals: 4000,
    };
    let mut total = t.powf(-alpha) * (vt - v0);
    // Smooth pieces away from s = t. Evaluate strictly inside (0, .) so the
    // left endpoint value v(0+) is used rather than v0.
    for w in pts.windows(2) {
        let r = quad::integrate(|s| alpha * (t - s).powf(-alpha - 1.0) * (vt - v(s)), w[0], w[1], opts)?;
        total += r.value;
    }
    // Last piece [last, t] in w = t - s, w = z^p, p = 1/(1-alpha):
    // a w^{-a-1} (v(t) - v(t-w)) dw = a p (v(t) - v(t-w)) / w dz, bounded at z = 0.
    let beta = 1.0 - alpha;
    let p = 1.0 / beta;
    let zmax = (t - last).powf(beta);
    // Below `w_min` the difference quotient is frozen at its value there;
    // smaller w only adds rounding noise.
    let w_min = 1e-7 * (t - last);
    let r = quad::integrate(
        |z: f64| {
            let w = z.powf(p).max(w_min);
            alpha * p * (vt - v(t - w)) / w
        },
        0.0,
        zmax,
        opts,
    )?;
    total += r.value;
    Ok(total / gamma(1.0 - alpha)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn graded_mesh_examples() {
        assert_eq!(TemporalMesh::graded(1.0, 2, 1.0).unwrap().nodes(), &[0.0, 0.5, 1.0]);
        assert_eq!(TemporalMesh::graded(1.0, 2, 2.0).unwrap().nodes(), &[0.0, 0.25, 1.0]);
        let r = (2.0 - 0.7) / 0.7;
        let m = TemporalMesh::graded(1.0, 4, r).unwrap();
        assert!(close(m.nodes()[1], 0.25f64.powf(13.0 / 7.0), 1e-15));
        assert_eq!(m.final_time(), 1.0);
    }

    #[test]
    fn mesh_validation() {
        assert!(TemporalMesh::new(vec![0.0]).is_err());
        assert!(TemporalMesh::new(vec![0.1, 1.0]).is_err());
        assert!(TemporalMesh::new(vec![0.0, 0.5, 0.5]).is_err());
        assert!(TemporalMesh::graded(1.0, 0, 1.0).is_err());
        assert!(TemporalMesh::graded(1.0, 4, 0.5).is_err());
    }

    #[test]
    fn interval_lookup_is_left_open() {
        let m = TemporalMesh::new(vec![0.0, 0.5, 1.0]).unwrap();
        assert_eq!(m.interval_of(0.5), Some(1));
        assert_eq!(m.interval_of(0.50001), Some(2));
        assert_eq!(m.interval_of(1.0), Some(2));
        assert_eq!(m.interval_of(0.0), None);
        assert_eq!(m.interval_of(1.5), None);
    }

    #[test]
    fn caputo_of_t_on_single_interval() {
        let u = TimeGridFunction::scalar(vec![0.0, 1.0], &[0.0, 1.0]).unwrap();
        let d = caputo_pwlinear(0.5, &u, 1.0).unwrap();
        assert!(close(d.value[0], 2.0 / std::f64::consts::PI.sqrt(), 1e-14));
    }

    #[test]
    fn caputo_of_constant_vanishes() {
        let u = TimeGridFunction::scalar(vec![0.0, 0.3, 0.7, 1.0], &[2.5; 4]).unwrap();
        for t in [0.1, 0.3, 0.55, 1.0] {
            assert_eq!(caputo_pwlinear(0.4, &u, t).unwrap().value[0], 0.0);
        }
    }

    #[test]
    fn caputo_of_t_on_two_intervals() {
        let u = TimeGridFunction::scalar(vec![0.0, 0.5, 1.0], &[0.0, 0.5, 1.0]).unwrap();
        let d = caputo_pwlinear(0.4, &u, 0.75).unwrap();
        let want = 0.75f64.powf(0.6) / gamma(1.6).unwrap();
        assert!(close(d.value[0], want, 1e-14), "{} vs {want}", d.value[0]);
    }

    #[test]
    fn caputo_rejects_out_of_range() {
        let u = TimeGridFunction::scalar(vec![0.0, 1.0], &[0.0, 1.0]).unwrap();
        assert!(caputo_pwlinear(0.5, &u, 0.0).is_err());
        assert!(caputo_pwlinear(0.5, &u, 1.5).is_err());
        let c = u.clone().with_first_interval(FirstInterval::ConstantEqualToU1);
        assert!(caputo_pwlinear(0.5, &c, 0.5).is_err());
    }

    #[test]
    fn caputo_e0_values() {
        let pi_sqrt = std::f64::consts::PI.sqrt();
        assert!(close(caputo_e0(0.5, 1.0).unwrap(), 1.0 / pi_sqrt, 1e-15));
        assert!(close(caputo_e0(0.5, 4.0).unwrap(), 0.5 / pi_sqrt, 1e-15));
        let want = 2f64.powf(-0.3) / gamma(0.7).unwrap();
        assert!(close(caputo_e0(0.3, 2.0).unwrap(), want, 1e-15));
        assert!(caputo_e0(0.3, 0.0).is_err());
    }

    #[test]
    fn sigma_values() {
        let s = sigma_correction(0.5, 0.1, 0.2).unwrap();
        let want = 0.2f64.powf(-0.5) - 2.0 * (0.2f64.sqrt() - 0.1f64.sqrt()) / 0.1;
        assert!(close(s, want, 1e-14));
        let s = sigma_correction(0.5, 1.0, 2.0).unwrap();
        assert!(close(s, 2f64.powf(-0.5) - 2.0 * (2f64.sqrt() - 1.0), 1e-14));
        assert!(sigma_correction(0.5, 0.1, 0.1).is_err());
        let far = sigma_correction(0.5, 0.1, 100.0).unwrap();
        let near = sigma_correction(0.5, 0.1, 0.2).unwrap();
        assert!(far.abs() < near.abs());
    }

    #[test]
    fn eq7_matches_closed_form_on_t() {
        let u = TimeGridFunction::scalar(vec![0.0, 1.0], &[0.0, 1.0]).unwrap();
        let d = caputo_via_eq7(0.5, &u, 1.0, 1e-10).unwrap();
        assert!(close(d.value[0], 2.0 / std::f64::consts::PI.sqrt(), 1e-9));
        let z = TimeGridFunction::scalar(vec![0.0, 0.4, 1.0], &[0.0; 3]).unwrap();
        assert_eq!(caputo_via_eq7(0.5, &z, 0.7, 1e-10).unwrap().value[0], 0.0);
    }

    #[test]
    fn eq7_generic_matches_e0() {
        // v = 1 for t > 0 with v(0) = 0
        let d = caputo_eq7_fn(0.3, |_| 1.0, 0.0, 2.0, &[], 1e-12).unwrap();
        assert!(close(d, caputo_e0(0.3, 2.0).unwrap(), 1e-12));
    }

    #[test]
    fn value_at_respects_first_interval_mode() {
        let u = TimeGridFunction::scalar(vec![0.0, 1.0, 2.0], &[0.0, 2.0, 3.0]).unwrap();
        assert_eq!(u.value_at(0.5).unwrap(), vec![1.0]);
        assert_eq!(u.value_at(1.5).unwrap(), vec![2.5]);
        let c = u.with_first_interval(FirstInterval::ConstantEqualToU1);
        assert_eq!(c.value_at(0.5).unwrap(), vec![2.0]);
        assert_eq!(c.value_at(0.0).unwrap(), vec![0.0]);
        assert_eq!(c.initial_jump().unwrap(), &[2.0]);
    }
}
