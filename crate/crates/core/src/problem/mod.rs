//! Problem definitions: the boundary-value problem, its discretisation
//! grid, discrete fields and trajectories, and the closed-form a-priori
//! bounds (maximum principles, stability coefficients).

mod bounds;
mod field;
mod grid;
pub mod sampling;
mod trajectory;

pub use bounds::{
    impulsive_bounds, impulsive_stability_rhs, max_principle_bound, refined_exponent,
    refined_max_bound, stability_rhs, BoundaryDiff, ImpulsiveStabilityInputs, StabilityInputs,
};
pub use field::Field;
pub use grid::Grid;
pub use sampling::{DataNorms, TimeProfile, SUP_INFLATION};
pub use trajectory::{RunInfo, RunMode, Snapshot, Trajectory};

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::exprdsl::{Bindings, Expr, Var};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProblemError {
    #[error("validation error: {0}")]
    Validation(String),
    #[error("refined maximum principle undefined: initial data vanish while b1 > -1")]
    ZeroInitialData,
    #[error("source is present but its lambda-support bound b1 is not set")]
    MissingSupportBound,
    #[error("degenerate grid: {0}")]
    DegenerateGrid(String),
}

/// Extents of the cylinder `Omega x (0,T) x (0,S)` with `Omega = (0,L)^d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub d: usize,
    pub length: f64,
    pub t_end: f64,
    pub s_end: f64,
}

impl Domain {
    /// Lebesgue measure of `Omega`.
    pub fn omega_measure(&self) -> f64 {
        self.length.powi(self.d as i32)
    }

    /// Measure of `Omega x (0,S)`.
    pub fn xi1_measure(&self) -> f64 {
        self.omega_measure() * self.s_end
    }
}

/// Full problem definition.
///
/// `gamma = 0` selects the impulsive problem; `epsilon > 0` the
/// parabolic regularisation in `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub domain: Domain,
    pub flux_a: Expr,
    pub flux_phi: Vec<Expr>,
    pub beta: Option<Expr>,
    pub tau: f64,
    pub gamma: f64,
    pub epsilon: f64,
    /// Initial data in `(x, s)` at `t = 0`.
    pub u0_1: Expr,
    /// Data in `(x, t)` prescribed at `s = 0`.
    pub u0_2: Expr,
    /// Data in `(x, t)` prescribed at `s = S`.
    pub us_2: Expr,
    /// `beta(x,s,lambda) = 0` for `|lambda| > b1`.
    pub b1: Option<f64>,
}

/// Relative width of the boundary collar in which data must vanish.
pub const COLLAR_WIDTH: f64 = 0.05;
const COLLAR_ZERO: f64 = 1e-12;

pub(crate) fn xs_bindings(x: &[f64], s: f64) -> Bindings {
    let mut b = Bindings::new().x(x[0]).s(s);
    if x.len() > 1 {
        b.set(Var::Y, x[1]);
    }
    b
}

pub(crate) fn xt_bindings(x: &[f64], t: f64) -> Bindings {
    let mut b = Bindings::new().x(x[0]).t(t);
    if x.len() > 1 {
        b.set(Var::Y, x[1]);
    }
    b
}

impl ProblemSpec {
    /// Zero-data, zero-source problem with the given fluxes, handy as a
    /// starting point for programmatic construction.
    pub fn new(domain: Domain, flux_a: Expr, flux_phi: Vec<Expr>) -> Self {
        Self {
            domain,
            flux_a,
            flux_phi,
            beta: None,
            tau: 0.5 * domain.t_end,
            gamma: 0.0,
            epsilon: 0.0,
            u0_1: Expr::num(0.0),
            u0_2: Expr::num(0.0),
            us_2: Expr::num(0.0),
            b1: None,
        }
    }

    /// `gamma_0 = min(tau, T - tau)`.
    pub fn gamma0(&self) -> f64 {
        self.tau.min(self.domain.t_end - self.tau)
    }

    pub fn initial_at(&self, x: &[f64], s: f64) -> f64 {
        self.u0_1.eval(&xs_bindings(x, s)).unwrap_or(f64::NAN)
    }

    pub fn s0_data_at(&self, x: &[f64], t: f64) -> f64 {
        self.u0_2.eval(&xt_bindings(x, t)).unwrap_or(f64::NAN)
    }

    pub fn s_end_data_at(&self, x: &[f64], t: f64) -> f64 {
        self.us_2.eval(&xt_bindings(x, t)).unwrap_or(f64::NAN)
    }

    /// `beta(x, s, lambda)`, zero when the problem has no source.
    pub fn beta_at(&self, x: &[f64], s: f64, lambda: f64) -> f64 {
        match &self.beta {
            Some(b) => b
                .eval(&xs_bindings(x, s).lambda(lambda))
                .unwrap_or(f64::NAN),
            None => 0.0,
        }
    }

    /// `d beta / d lambda` at a point, zero without a source.
    pub fn beta_lambda_deriv_at(&self, x: &[f64], s: f64, lambda: f64) -> f64 {
        match &self.beta {
            Some(b) => b
                .eval_dual(&xs_bindings(x, s).lambda(lambda), Var::Lambda)
                .map(|d| d.deriv)
                .unwrap_or(f64::NAN),
            None => 0.0,
        }
    }

    /// Short stable hash of the problem, used to tag reports.
    pub fn fingerprint(&self) -> String {
        let phi: Vec<String> = self.flux_phi.iter().map(|p| p.to_string()).collect();
        let canon = format!(
            "d={};L={:?};T={:?};S={:?};a={};phi={};beta={};tau={:?};gamma={:?};eps={:?};u01={};u02={};uS2={};b1={:?}",
            self.domain.d,
            self.domain.length,
            self.domain.t_end,
            self.domain.s_end,
            self.flux_a,
            phi.join(","),
            self.beta.as_ref().map(|b| b.to_string()).unwrap_or_default(),
            self.tau,
            self.gamma,
            self.epsilon,
            self.u0_1,
            self.u0_2,
            self.us_2,
            self.b1,
        );
        let digest = Sha256::digest(canon.as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    /// Checks every load-time invariant and returns the first violation.
    pub fn validate(&self) -> Result<(), ProblemError> {
        let fail = |msg: String| Err(ProblemError::Validation(msg));
        let dom = &self.domain;
        if dom.d != 1 && dom.d != 2 {
            return fail(format!("domain: d = {} is not supported (1 or 2)", dom.d));
        }
        for (name, v) in [("L", dom.length), ("T", dom.t_end), ("S", dom.s_end)] {
            if !(v > 0.0 && v.is_finite()) {
                return fail(format!("domain: {name} = {v} must be positive"));
            }
        }
        if self.flux_phi.len() != dom.d {
            return fail(format!(
                "flux: {} phi components given for d = {}",
                self.flux_phi.len(),
                dom.d
            ));
        }
        let lambda_only = [Var::Lambda];
        check_vars("flux a", &self.flux_a, &lambda_only)?;
        let a0 = self.flux_a.eval_lambda(0.0);
        if a0 != 0.0 {
            return fail(format!("flux a: a(0) = {a0} \u{2260} 0"));
        }
        for (i, phi) in self.flux_phi.iter().enumerate() {
            check_vars(&format!("flux phi_{}", i + 1), phi, &lambda_only)?;
            let p0 = phi.eval_lambda(0.0);
            if p0 != 0.0 {
                return fail(format!(
                    "flux phi_{}: phi_{}(0) = {p0} \u{2260} 0",
                    i + 1,
                    i + 1
                ));
            }
        }
        let space: &[Var] = if dom.d == 2 {
            &[Var::X, Var::Y]
        } else {
            &[Var::X]
        };
        let with = |extra: &[Var]| -> Vec<Var> { space.iter().chain(extra).copied().collect() };
        check_vars("data u0_1", &self.u0_1, &with(&[Var::S]))?;
        check_vars("data u0_2", &self.u0_2, &with(&[Var::T]))?;
        check_vars("data uS_2", &self.us_2, &with(&[Var::T]))?;
        if let Some(beta) = &self.beta {
            check_vars("source beta", beta, &with(&[Var::S, Var::Lambda]))?;
        }

        if !(self.tau > 0.0 && self.tau < dom.t_end) {
            return fail(format!(
                "source: tau = {} must lie in (0, T = {})",
                self.tau, dom.t_end
            ));
        }
        if !(self.gamma >= 0.0) {
            return fail(format!(
                "source: gamma = {} must be nonnegative",
                self.gamma
            ));
        }
        let g0 = self.gamma0();
        if self.gamma > 0.5 * g0 {
            return fail(format!(
                "source: gamma = {} exceeds gamma_0/2 = {} where gamma_0 = min(tau, T - tau) = {}",
                self.gamma,
                0.5 * g0,
                g0
            ));
        }
        if !(self.epsilon >= 0.0) {
            return fail(format!(
                "scheme: epsilon = {} must be nonnegative",
                self.epsilon
            ));
        }
        if let Some(b1) = self.b1 {
            if !(b1 > 0.0) {
                return fail(format!("source: b1 = {b1} must be positive"));
            }
        }

        self.check_collars()?;
        self.check_beta_support()?;
        Ok(())
    }

    fn check_collars(&self) -> Result<(), ProblemError> {
        let dom = self.domain;
        let n = 256;
        let xi1: Vec<f64> = std::iter::repeat_n(dom.length, dom.d)
            .chain([dom.s_end])
            .collect();
        let xi2: Vec<f64> = std::iter::repeat_n(dom.length, dom.d)
            .chain([dom.t_end])
            .collect();
        let checks: [(&str, &Expr, &[f64], bool); 3] = [
            ("u0_1", &self.u0_1, &xi1, true),
            ("u0_2", &self.u0_2, &xi2, false),
            ("uS_2", &self.us_2, &xi2, false),
        ];
        for (name, expr, extents, is_xs) in checks {
            let mut bad = None;
            sampling::for_each_lattice_point(extents, n, |p| {
                if bad.is_some() || !sampling::in_collar(p, extents, COLLAR_WIDTH) {
                    return;
                }
                let (x, last) = p.split_at(p.len() - 1);
                let b = if is_xs {
                    xs_bindings(x, last[0])
                } else {
                    xt_bindings(x, last[0])
                };
                let v = expr.eval(&b).unwrap_or(f64::NAN);
                if !(v.abs() < COLLAR_ZERO) {
                    bad = Some((p.to_vec(), v));
                }
            });
            if let Some((p, v)) = bad {
                return Err(ProblemError::Validation(format!(
                    "data {name}: must vanish near the boundary, found {v} at {p:?}"
                )));
            }
        }
        Ok(())
    }

    fn check_beta_support(&self) -> Result<(), ProblemError> {
        let Some(beta) = &self.beta else {
            return Ok(());
        };
        let dom = self.domain;
        let extents: Vec<f64> = std::iter::repeat_n(dom.length, dom.d)
            .chain([dom.s_end])
            .collect();
        let lam_max = self.b1.unwrap_or(1.0) + 1.0;
        let lambdas: Vec<f64> = (0..=16)
            .map(|k| -lam_max + 2.0 * lam_max * k as f64 / 16.0)
            .collect();
        let mut bad = None;
        sampling::for_each_lattice_point(&extents, 64, |p| {
            if bad.is_some() || !sampling::in_collar(p, &extents, COLLAR_WIDTH) {
                return;
            }
            let (x, s) = p.split_at(p.len() - 1);
            for &lam in &lambdas {
                let v = beta
                    .eval(&xs_bindings(x, s[0]).lambda(lam))
                    .unwrap_or(f64::NAN);
                if !(v.abs() < COLLAR_ZERO) {
                    bad = Some((p.to_vec(), lam, v));
                    return;
                }
            }
        });
        if let Some((p, lam, v)) = bad {
            return Err(ProblemError::Validation(format!(
                "source beta: must vanish near the boundary of Omega x [0,S], found {v} at {p:?}, lambda = {lam}"
            )));
        }
        if let Some(b1) = self.b1 {
            let mut bad = None;
            sampling::for_each_lattice_point(&extents, 32, |p| {
                if bad.is_some() {
                    return;
                }
                let (x, s) = p.split_at(p.len() - 1);
                for k in 1..=16 {
                    let mag = b1 * (1.0 + k as f64 / 16.0) + 1e-9;
                    for lam in [mag, -mag] {
                        let v = beta
                            .eval(&xs_bindings(x, s[0]).lambda(lam))
                            .unwrap_or(f64::NAN);
                        if !(v.abs() < COLLAR_ZERO) {
                            bad = Some((lam, v));
                            return;
                        }
                    }
                }
            });
            if let Some((lam, v)) = bad {
                return Err(ProblemError::Validation(format!(
                    "source beta: must vanish for |lambda| > b1 = {b1}, found {v} at lambda = {lam}"
                )));
            }
        }
        Ok(())
    }
}

fn check_vars(what: &str, e: &Expr, allowed: &[Var]) -> Result<(), ProblemError> {
    for v in e.free_vars() {
        if !allowed.contains(&v) {
            let names: Vec<&str> = allowed.iter().map(|v| v.name()).collect();
            return Err(ProblemError::Validation(format!(
                "{what}: variable `{}` not allowed here (expected only {})",
                v.name(),
                names.join(", ")
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprdsl::parse;

    fn base() -> ProblemSpec {
        let dom = Domain {
            d: 1,
            length: 1.0,
            t_end: 1.0,
            s_end: 1.0,
        };
        ProblemSpec::new(dom, parse("lambda^2/2").unwrap(), vec![parse("0").unwrap()])
    }

    #[test]
    fn accepts_zero_problem() {
        base().validate().unwrap();
    }

    #[test]
    fn rejects_nonzero_flux_at_origin() {
        let mut spec = base();
        spec.flux_a = parse("lambda + 0.3").unwrap();
        let err = spec.validate().unwrap_err().to_string();
        assert!(err.contains("a(0) = 0.3"), "{err}");
        let mut spec = base();
        spec.flux_a = parse("lambda").unwrap();
        spec.validate().unwrap();
    }

    #[test]
    fn rejects_large_gamma() {
        let mut spec = base();
        spec.gamma = 0.3;
        let err = spec.validate().unwrap_err().to_string();
        assert!(err.contains("gamma_0"), "{err}");
        spec.gamma = 0.25;
        spec.validate().unwrap();
    }

    #[test]
    fn rejects_data_not_vanishing_at_boundary() {
        let mut spec = base();
        spec.u0_1 = parse("sin(pi*x)").unwrap();
        let err = spec.validate().unwrap_err().to_string();
        assert!(err.contains("u0_1"), "{err}");
        spec.u0_1 = parse("max(0, (x-0.1)*(0.9-x))^3 * max(0, (s-0.1)*(0.9-s))^3").unwrap();
        spec.validate().unwrap();
    }

    #[test]
    fn rejects_wrong_variables() {
        let mut spec = base();
        spec.u0_2 = parse("s").unwrap();
        assert!(spec.validate().is_err());
        let mut spec = base();
        spec.flux_a = parse("lambda*x").unwrap();
        assert!(spec.validate().is_err());
    }

    #[test]
    fn beta_support_in_lambda() {
        let mut spec = base();
        spec.gamma = 0.1;
        spec.beta = Some(
            parse("max(0,(x-0.2)*(0.8-x))^2 * max(0,(s-0.2)*(0.8-s))^2 * max(0, 1-lambda^2)^2")
                .unwrap(),
        );
        spec.b1 = Some(1.0);
        spec.validate().unwrap();
        spec.b1 = Some(0.5);
        let err = spec.validate().unwrap_err().to_string();
        assert!(err.contains("b1"), "{err}");
    }

    #[test]
    fn fingerprint_is_stable_and_sensitive() {
        let a = base();
        let mut b = base();
        assert_eq!(a.fingerprint(), b.fingerprint());
        b.tau = 0.4;
        assert_ne!(a.fingerprint(), b.fingerprint());
        assert_eq!(a.fingerprint().len(), 16);
    }
}
