//! Numerical certification of the a-priori estimates and structural
//! conditions on computed trajectories.
//!
//! Every check produces a [`VerificationReport`] in the normal form
//! `measured <= bound * (1 + tolerance) + slack`. Lower-bound checks are
//! negated into that form.

mod entropy;
mod estimates;
mod limits;
mod nonlinearity;

pub use entropy::{
    check_bln, check_entropy_residual, entropy_production, entropy_residual, kruzhkov_bank,
    trace_data_gap, TestFunction, TEST_FUNCTIONS,
};
pub use estimates::{
    calibrate_grid_constant, check_energy, check_jump, check_max_principle, check_stability,
    max_principle_profile, StabilityOptions,
};
pub use limits::{check_epsilon_cauchy, check_gamma_limit, EpsilonCauchy, GammaLimit};
pub use nonlinearity::{validate_genuine_nonlinearity, NonlinearityProfile};

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::chi::ChiError;
use crate::problem::{ProblemError, Trajectory};
use crate::solver::SolverError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerifyError {
    #[error("trajectories live on different grids")]
    GridMismatch,
    #[error("energy check needs at least 3 runs, got {0}")]
    TooFewRuns(usize),
    #[error("trajectory has no fields at tau +- 0")]
    MissingTauTraces,
    #[error("gamma values must be strictly decreasing in (0, gamma_0/2]: {0}")]
    GammaOutOfRange(String),
    #[error("epsilon values must be positive and strictly decreasing: {0}")]
    EpsilonOutOfRange(String),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Chi(#[from] ChiError),
}

/// Run parameters a report refers to.
#[derive(Debug, Clone, PartialEq)]
pub struct Context {
    pub fingerprint: String,
    pub nx: usize,
    pub ns: usize,
    pub gamma: f64,
    pub epsilon: f64,
}

impl Context {
    pub fn of(traj: &Trajectory) -> Self {
        Self {
            fingerprint: traj.info.fingerprint.clone(),
            nx: traj.info.grid.nx,
            ns: traj.info.grid.ns,
            gamma: traj.info.gamma,
            epsilon: traj.info.epsilon,
        }
    }

    /// Short hash identifying the problem, grid and parameters.
    pub fn hash(&self) -> String {
        let text = format!(
            "{};{};{};{:?};{:?}",
            self.fingerprint, self.nx, self.ns, self.gamma, self.epsilon
        );
        Sha256::digest(text.as_bytes())
            .iter()
            .take(6)
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub check: String,
    pub measured: f64,
    pub bound: f64,
    /// Relative tolerance on the bound.
    pub tolerance: f64,
    /// Absolute slack added to the bound.
    pub slack: f64,
    pub pass: bool,
    pub context: Context,
}

impl VerificationReport {
    pub fn new(
        check: &str,
        measured: f64,
        bound: f64,
        tolerance: f64,
        slack: f64,
        context: Context,
    ) -> Self {
        let pass = measured <= bound * (1.0 + tolerance) + slack;
        Self {
            check: check.to_string(),
            measured,
            bound,
            tolerance,
            slack,
            pass,
            context,
        }
    }

    /// `bound * (1 + tolerance) + slack - measured`.
    pub fn margin(&self) -> f64 {
        self.bound * (1.0 + self.tolerance) + self.slack - self.measured
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> Context {
        Context {
            fingerprint: "abc".into(),
            nx: 4,
            ns: 4,
            gamma: 0.1,
            epsilon: 0.0,
        }
    }

    #[test]
    fn pass_rule() {
        assert!(VerificationReport::new("c", 1.04, 1.0, 0.05, 0.0, ctx()).pass);
        assert!(!VerificationReport::new("c", 1.06, 1.0, 0.05, 0.0, ctx()).pass);
        assert!(VerificationReport::new("c", 1.06, 1.0, 0.05, 0.02, ctx()).pass);
        assert!(!VerificationReport::new("c", f64::NAN, 1.0, 0.0, 0.0, ctx()).pass);
    }

    #[test]
    fn context_hash_changes_with_parameters() {
        let a = ctx();
        let mut b = ctx();
        b.gamma = 0.05;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash(), ctx().hash());
    }
}
