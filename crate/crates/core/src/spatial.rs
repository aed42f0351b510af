//! Spatial operators: a scalar shift (ODE case) and the 1-D Dirichlet
//! Laplacian `-d^2/dx^2 + reaction` on a uniform grid.
//!
//! Boundary values are identically zero and never stored: a Laplacian vector
//! on `n` intervals has `n - 1` interior entries.

use std::f64::consts::PI;

use crate::error::{domain, Error, Result};

/// Spatial norm used for residuals and errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Norm {
    /// Lumped-mass discrete `L2`: `sqrt(h sum v_i^2)`.
    #[default]
    L2,
    /// `max_i |v_i|`.
    Linf,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OperatorKind {
    ScalarShift {
        c: f64,
    },
    Laplacian1D {
        domain_length: f64,
        n_intervals: usize,
        reaction: f64,
    },
}

/// The elliptic part `L` together with its coercivity constant `lambda`
/// (`<L v, v> >= lambda |v|^2`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialOperator {
    kind: OperatorKind,
    lambda: f64,
}

impl SpatialOperator {
    /// `L v = c v`; the coercivity constant is `c` itself.
    pub fn scalar_shift(c: f64) -> Result<Self> {
        if !c.is_finite() {
            return domain(format!("shift must be finite, got {c}"));
        }
        Ok(Self {
            kind: OperatorKind::ScalarShift { c },
            lambda: c,
        })
    }

    /// Three-point Dirichlet Laplacian on `(0, domain_length)` plus a
    /// constant reaction term.
    ///
    /// `lambda` is supplied by the caller and validated against the
    /// continuum bound `reaction + (pi / domain_length)^2`. The discrete
    /// smallest eigenvalue sits below that bound by `O(h^2)`.
    pub fn laplacian_1d(domain_length: f64, n_intervals: usize, reaction: f64, lambda: f64) -> Result<Self> {
        if !(domain_length > 0.0) || !domain_length.is_finite() {
            return domain(format!("domain length must be positive, got {domain_length}"));
        }
        if n_intervals < 2 {
            return domain(format!("need at least 2 intervals, got {n_intervals}"));
        }
        if !(reaction >= 0.0) {
            return domain(format!("reaction must be non-negative, got {reaction}"));
        }
        let bound = reaction + (PI / domain_length).powi(2);
        if !(lambda >= 0.0) || lambda > bound * (1.0 + 1e-12) {
            return domain(format!("lambda = {lambda} outside [0, {bound}]"));
        }
        Ok(Self {
            kind: OperatorKind::Laplacian1D {
                domain_length,
                n_intervals,
                reaction,
            },
            lambda,
        })
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Number of stored unknowns.
    pub fn dim(&self) -> usize {
        match self.kind {
            OperatorKind::ScalarShift { .. } => 1,
            OperatorKind::Laplacian1D { n_intervals, .. } => n_intervals - 1,
        }
    }

    /// Grid spacing (1 for the scalar case).
    pub fn spacing(&self) -> f64 {
        match self.kind {
            OperatorKind::ScalarShift { .. } => 1.0,
            OperatorKind::Laplacian1D {
                domain_length,
                n_intervals,
                ..
            } => domain_length / n_intervals as f64,
        }
    }

    /// Interior grid coordinates `x_i = i h`, `i = 1..n-1` (empty for the
    /// scalar case).
    pub fn grid(&self) -> Vec<f64> {
        match self.kind {
            OperatorKind::ScalarShift { .. } => Vec::new(),
            OperatorKind::Laplacian1D {
                domain_length,
                n_intervals,
                ..
            } => (1..n_intervals)
                .map(|i| domain_length * i as f64 / n_intervals as f64)
                .collect(),
        }
    }

    fn check_dim(&self, len: usize) -> Result<()> {
        if len != self.dim() {
            return Err(Error::Shape {
                expected: self.dim(),
                got: len,
            });
        }
        Ok(())
    }

    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; v.len()];
        self.apply_into(v, &mut out)?;
        Ok(out)
    }

    pub fn apply_into(&self, v: &[f64], out: &mut [f64]) -> Result<()> {
        self.check_dim(v.len())?;
        self.check_dim(out.len())?;
        match self.kind {
            OperatorKind::ScalarShift { c } => out[0] = c * v[0],
            OperatorKind::Laplacian1D { reaction, .. } => {
                let inv_h2 = 1.0 / self.spacing().powi(2);
                let n = v.len();
                for i in 0..n {
                    let left = if i > 0 { v[i - 1] } else { 0.0 };
                    let right = if i + 1 < n { v[i + 1] } else { 0.0 };
                    // differences of neighbours first: exact for smooth v
                    out[i] = ((v[i] - left) - (right - v[i])) * inv_h2 + reaction * v[i];
                }
            }
        }
        Ok(())
    }

    /// Solves `(mu I + L) w = rhs`.
    pub fn solve_shifted(&self, mu: f64, rhs: &[f64]) -> Result<Vec<f64>> {
        if !(mu > 0.0) || !mu.is_finite() {
            return domain(format!("shift mu must be positive, got {mu}"));
        }
        self.check_dim(rhs.len())?;
        match self.kind {
            OperatorKind::ScalarShift { c } => {
                let d = mu + c;
                if d == 0.0 {
                    return domain("singular shifted scalar operator");
                }
                Ok(vec![rhs[0] / d])
            }
            OperatorKind::Laplacian1D { reaction, .. } => {
                let inv_h2 = 1.0 / self.spacing().powi(2);
                let diag = mu + reaction + 2.0 * inv_h2;
                let mut w = thomas_constant(diag, -inv_h2, rhs);
                // one step of iterative refinement
                let mut r = vec![0.0; rhs.len()];
                self.apply_into(&w, &mut r)?;
                for i in 0..r.len() {
                    r[i] = rhs[i] - (mu * w[i] + r[i]);
                }
                let dw = thomas_constant(diag, -inv_h2, &r);
                w.iter_mut().zip(&dw).for_each(|(w, d)| *w += d);
                Ok(w)
            }
        }
    }

    /// Discrete inner product `h sum v_i w_i` (plain product for the scalar case).
    pub fn inner(&self, v: &[f64], w: &[f64]) -> f64 {
        self.spacing() * v.iter().zip(w).map(|(a, b)| a * b).sum::<f64>()
    }

    pub fn norm(&self, v: &[f64], which: Norm) -> f64 {
        match which {
            Norm::L2 => (self.spacing() * v.iter().map(|x| x * x).sum::<f64>()).sqrt(),
            Norm::Linf => v.iter().fold(0.0, |m, x| m.max(x.abs())),
        }
    }
}

/// Tridiagonal solve for a constant symmetric stencil `[off, diag, off]`.
fn thomas_constant(diag: f64, off: f64, rhs: &[f64]) -> Vec<f64> {
    let n = rhs.len();
    let mut c = vec![0.0; n];
    let mut x = vec![0.0; n];
    let mut denom = diag;
    c[0] = off / denom;
    x[0] = rhs[0] / denom;
    for i in 1..n {
        denom = diag - off * c[i - 1];
        c[i] = off / denom;
        x[i] = (rhs[i] - off * x[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lap(n: usize) -> SpatialOperator {
        SpatialOperator::laplacian_1d(PI, n, 0.0, 1.0).unwrap()
    }

    #[test]
    fn scalar_shift_apply_and_solve() {
        let op = SpatialOperator::scalar_shift(3.0).unwrap();
        assert_eq!(op.apply(&[2.0]).unwrap(), vec![6.0]);
        assert_eq!(op.solve_shifted(2.0, &[10.0]).unwrap(), vec![2.0]);
        assert_eq!(op.lambda(), 3.0);
        assert_eq!(op.norm(&[-3.0], Norm::L2), 3.0);
    }

    #[test]
    fn laplacian_of_zero_is_zero() {
        let op = lap(8);
        assert_eq!(op.apply(&[0.0; 7]).unwrap(), vec![0.0; 7]);
        assert_eq!(op.solve_shifted(1.0, &[0.0; 7]).unwrap(), vec![0.0; 7]);
    }

    #[test]
    fn discrete_sine_is_an_eigenvector() {
        let op = lap(4);
        let h = op.spacing();
        let v: Vec<f64> = op.grid().iter().map(|x| x.sin()).collect();
        let lv = op.apply(&v).unwrap();
        let eig = (2.0 - 2.0 * h.cos()) / (h * h);
        for (a, b) in lv.iter().zip(&v) {
            assert!((a - eig * b).abs() < 1e-13);
        }
    }

    #[test]
    fn constant_norm_tends_to_sqrt_pi() {
        for n in [10, 100, 1000] {
            let op = lap(n);
            let v = vec![1.0; n - 1];
            let got = op.norm(&v, Norm::L2);
            assert!((got - (op.spacing() * (n - 1) as f64).sqrt()).abs() < 1e-14);
            assert!((got - PI.sqrt()).abs() < op.spacing());
        }
        assert_eq!(lap(10).norm(&[0.0; 9], Norm::L2), 0.0);
        assert_eq!(lap(4).norm(&[1.0, -4.0, 2.0], Norm::Linf), 4.0);
    }

    #[test]
    fn errors() {
        let op = lap(4);
        assert!(matches!(op.apply(&[1.0]), Err(Error::Shape { expected: 3, got: 1 })));
        assert!(matches!(op.solve_shifted(0.0, &[1.0; 3]), Err(Error::Domain(_))));
        assert!(SpatialOperator::laplacian_1d(PI, 1, 0.0, 1.0).is_err());
        assert!(SpatialOperator::laplacian_1d(PI, 10, 0.0, 1.5).is_err());
        assert!(SpatialOperator::laplacian_1d(PI, 10, 0.0, -0.1).is_err());
    }
}
