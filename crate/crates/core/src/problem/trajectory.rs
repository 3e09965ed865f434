use super::{Field, Grid};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunMode {
    /// Parabolic regularisation `epsilon > 0`, data imposed strongly in `s`.
    Regularized,
    /// `epsilon = 0`, mollified source, boundary data through the flux.
    Entropy,
    /// `epsilon = 0`, no source, jump map applied at `tau`.
    Impulsive,
}

impl RunMode {
    pub fn name(self) -> &'static str {
        match self {
            RunMode::Regularized => "regularized",
            RunMode::Entropy => "entropy",
            RunMode::Impulsive => "impulsive",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "regularized" => Some(RunMode::Regularized),
            "entropy" => Some(RunMode::Entropy),
            "impulsive" => Some(RunMode::Impulsive),
            _ => None,
        }
    }
}

/// Metadata describing how a trajectory was produced.
#[derive(Debug, Clone, PartialEq)]
pub struct RunInfo {
    pub mode: RunMode,
    pub gamma: f64,
    pub epsilon: f64,
    /// Grid including the time step actually used.
    pub grid: Grid,
    /// Sup-norm bound used for the CFL step and flux dissipation.
    pub m_cfl: f64,
    /// Step index at which `tau` was snapped.
    pub n_tau: usize,
    pub fingerprint: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub step: usize,
    pub t: f64,
    pub field: Field,
    /// `int_0^t ||grad_x u||^2` accumulated by the solver.
    pub grad_x_sq: f64,
    /// `int_0^t ||d_s u||^2` accumulated by the solver.
    pub grad_s_sq: f64,
}

impl Snapshot {
    /// `||u(t)||^2 + int ||grad_x u||^2 + eps int ||d_s u||^2`.
    pub fn energy(&self, epsilon: f64) -> f64 {
        self.field.l2_norm_sq() + self.grad_x_sq + epsilon * self.grad_s_sq
    }
}

/// Time-ordered snapshots of one run plus the fields on either side of `tau`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub info: RunInfo,
    pub snapshots: Vec<Snapshot>,
    /// Field after step `n_tau` with no jump applied.
    pub tau_minus: Option<Field>,
    /// Field after the jump map (impulsive runs) or equal to `tau_minus`.
    pub tau_plus: Option<Field>,
}

impl Trajectory {
    pub fn last(&self) -> &Snapshot {
        self.snapshots
            .last()
            .expect("trajectory has at least the initial snapshot")
    }

    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.t).collect()
    }

    /// Snapshot recorded exactly at step `n`, if any.
    pub fn at_step(&self, n: usize) -> Option<&Snapshot> {
        self.snapshots
            .binary_search_by_key(&n, |s| s.step)
            .ok()
            .map(|i| &self.snapshots[i])
    }
}
