//! Residual barriers `R0`, `R1` and the error profiles they enforce.
//!
//! `(D^a + lambda) E_p = R_p`, so `||R_h|| <= TOL R_p` keeps the error below
//! `TOL E_p`: uniformly for `p = 0`, and like `max(tau, t)^{a-1}` for `p = 1`.

use crate::error::{domain, Result};
use crate::specfun::gamma;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BarrierKind {
    R0,
    R1,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Barrier {
    kind: BarrierKind,
    alpha: f64,
    lambda: f64,
    tau: f64,
    inv_gamma_1ma: f64,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return domain(format!("fractional order must lie in (0, 1), got {alpha}"));
    }
    Ok(())
}

impl Barrier {
    pub fn r0(alpha: f64, lambda: f64) -> Result<Self> {
        Self::new(BarrierKind::R0, alpha, lambda, f64::NAN)
    }

    pub fn r1(alpha: f64, lambda: f64, tau: f64) -> Result<Self> {
        Self::new(BarrierKind::R1, alpha, lambda, tau)
    }

    /// `tau` is ignored for `R0`.
    pub fn new(kind: BarrierKind, alpha: f64, lambda: f64, tau: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return domain(format!("lambda must be finite and non-negative, got {lambda}"));
        }
        if kind == BarrierKind::R1 && !(tau > 0.0 && tau.is_finite()) {
            return domain(format!("R1 needs tau > 0, got {tau}"));
        }
        Ok(Self {
            kind,
            alpha,
            lambda,
            tau,
            inv_gamma_1ma: 1.0 / gamma(1.0 - alpha)?,
        })
    }

    /// Same barrier with `tau` rebound (used while `t_1` is still being chosen).
    pub fn with_tau(self, tau: f64) -> Result<Self> {
        Self::new(self.kind, self.alpha, self.lambda, tau)
    }

    pub fn kind(&self) -> BarrierKind {
        self.kind
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// `None` for `R0`.
    pub fn tau(&self) -> Option<f64> {
        (self.kind == BarrierKind::R1).then_some(self.tau)
    }

    pub fn value(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return domain(format!("barrier requires t > 0, got {t}"));
        }
        Ok(self.value_unchecked(t))
    }

    /// [`Barrier::value`] without the domain check; `t` must be positive.
    #[inline]
    pub fn value_unchecked(&self, t: f64) -> f64 {
        match self.kind {
            BarrierKind::R0 => t.powf(-self.alpha) * self.inv_gamma_1ma + self.lambda,
            BarrierKind::R1 => {
                let beta = 1.0 - self.alpha;
                rho_unchecked(self.tau / t, beta) / t * self.inv_gamma_1ma
                    + self.lambda * self.tau.max(t).powf(self.alpha - 1.0)
            }
        }
    }

    /// The error profile this barrier enforces, at `t >= 0`.
    pub fn profile(&self, t: f64) -> Result<f64> {
        match self.kind {
            BarrierKind::R0 => profile_value(ProfileKind::E0, self.alpha, 0.0, t),
            BarrierKind::R1 => profile_value(ProfileKind::E1, self.alpha, self.tau, t),
        }
    }
}

fn rho_unchecked(s: f64, beta: f64) -> f64 {
    let head = s.powf(-beta);
    if s >= 1.0 {
        head
    } else {
        // 1 - (1-s)^beta without cancellation for small s
        -head * (beta * (-s).ln_1p()).exp_m1()
    }
}

/// `rho(s) = s^{-beta} [1 - ((1-s)^+)^beta]`.
pub fn rho(s: f64, beta: f64) -> Result<f64> {
    if !(s > 0.0) || !s.is_finite() {
        return domain(format!("rho requires finite s > 0, got {s}"));
    }
    if !(beta > 0.0 && beta < 1.0) {
        return domain(format!("rho requires beta in (0, 1), got {beta}"));
    }
    Ok(rho_unchecked(s, beta))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileKind {
    E0,
    E1,
}

/// `E0(t) = 1` and `E1(t) = max(tau, t)^{a-1}` for `t > 0`; both vanish at 0.
pub fn profile_value(kind: ProfileKind, alpha: f64, tau: f64, t: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(t >= 0.0) {
        return domain(format!("profile requires t >= 0, got {t}"));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    match kind {
        ProfileKind::E0 => Ok(1.0),
        ProfileKind::E1 => {
            if !(tau > 0.0) {
                return domain(format!("E1 needs tau > 0, got {tau}"));
            }
            Ok(tau.max(t).powf(alpha - 1.0))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fracops::{caputo_e0, caputo_eq7_fn};
    use proptest::prelude::*;

    #[test]
    fn rho_examples() {
        assert_eq!(rho(1.0, 0.3).unwrap(), 1.0);
        assert!((rho(2.0, 0.5).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
        let want = 2f64.sqrt() * (1.0 - 0.5f64.sqrt());
        assert!((rho(0.5, 0.5).unwrap() - want).abs() < 1e-15);
        assert!(rho(0.0, 0.5).is_err());
        assert!(rho(-1.0, 0.5).is_err());
    }

    #[test]
    fn barrier_examples() {
        let b = Barrier::r0(0.5, 0.0).unwrap();
        assert!((b.value(1.0).unwrap() - 1.0 / std::f64::consts::PI.sqrt()).abs() < 1e-15);
        let b = Barrier::r0(0.4, 3.0).unwrap();
        assert!((b.value(1.0).unwrap() - (1.0 / gamma(0.6).unwrap() + 3.0)).abs() < 1e-14);
        assert!(b.value(0.0).is_err());

        let (alpha, tau) = (0.3f64, 0.2f64);
        let b = Barrier::r1(alpha, 0.0, tau).unwrap();
        for t in [0.01f64, 0.1, 0.2] {
            let want = tau.powf(-(1.0 - alpha)) * t.powf(-alpha) / gamma(1.0 - alpha).unwrap();
            assert!((b.value(t).unwrap() - want).abs() < 1e-13 * want);
        }
        assert!(Barrier::r1(alpha, 0.0, 0.0).is_err());
        assert!(Barrier::r0(alpha, -1.0).is_err());
        assert!(Barrier::r0(1.0, 0.0).is_err());
    }

    #[test]
    fn profile_examples() {
        assert_eq!(profile_value(ProfileKind::E0, 0.5, 0.0, 0.0).unwrap(), 0.0);
        assert_eq!(profile_value(ProfileKind::E0, 0.5, 0.0, 0.37).unwrap(), 1.0);
        let v = profile_value(ProfileKind::E1, 0.4, 0.1, 0.05).unwrap();
        assert!((v - 0.1f64.powf(-0.6)).abs() < 1e-14);
        assert_eq!(profile_value(ProfileKind::E1, 0.4, 0.1, 1.0).unwrap(), 1.0);
        assert_eq!(profile_value(ProfileKind::E1, 0.4, 0.1, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn r0_is_caputo_of_e0_plus_lambda() {
        for alpha in [0.2, 0.5, 0.9] {
            let b = Barrier::r0(alpha, 2.0).unwrap();
            for t in [1e-3, 0.4, 7.0] {
                let want = caputo_e0(alpha, t).unwrap() + 2.0;
                assert!((b.value(t).unwrap() - want).abs() <= 1e-15 * want);
            }
        }
    }

    #[test]
    fn r1_is_caputo_of_e1_plus_lambda() {
        let (alpha, tau, lambda) = (0.4f64, 0.05f64, 1.5);
        let b = Barrier::r1(alpha, lambda, tau).unwrap();
        let e1 = |s: f64| tau.max(s).powf(alpha - 1.0);
        for k in 0..=10 {
            let t = tau * 10f64.powf(-1.0 + 0.2 * k as f64);
            let d = caputo_eq7_fn(alpha, e1, 0.0, t, &[tau], 1e-10).unwrap();
            let lhs = d + lambda * e1(t);
            let rhs = b.value(t).unwrap();
            assert!((lhs - rhs).abs() <= 1e-7 * rhs, "t = {t}: {lhs} vs {rhs}");
        }
    }

    proptest! {
        #[test]
        fn rho_lower_bound(ls in -6.0f64..6.0, beta in 0.01f64..0.99) {
            let s = 10f64.powf(ls);
            let r = rho(s, beta).unwrap();
            prop_assert!(r >= s.powf(-beta) * (beta * s).min(1.0) * (1.0 - 1e-12));
        }

        #[test]
        fn barriers_positive(alpha in 0.05f64..0.95, lambda in 0.0f64..10.0, ltau in -6.0f64..0.0, lt in -8.0f64..2.0) {
            let t = 10f64.powf(lt);
            let tau = 10f64.powf(ltau);
            prop_assert!(Barrier::r0(alpha, lambda).unwrap().value(t).unwrap() > 0.0);
            prop_assert!(Barrier::r1(alpha, lambda, tau).unwrap().value(t).unwrap() > 0.0);
        }

        #[test]
        fn r0_decreasing(alpha in 0.05f64..0.95, lambda in 0.0f64..10.0, lt in -8.0f64..2.0, dl in 0.01f64..2.0) {
            let b = Barrier::r0(alpha, lambda).unwrap();
            let (t1, t2) = (10f64.powf(lt), 10f64.powf(lt + dl));
            prop_assert!(b.value(t1).unwrap() > b.value(t2).unwrap());
            prop_assert!(b.value(t2).unwrap() > lambda);
        }
    }
}
