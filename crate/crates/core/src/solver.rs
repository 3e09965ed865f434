//! Time-marching drivers for the regularised, entropy and impulsive
//! problems.

use thiserror::Error;

use crate::problem::sampling::beta_sup;
use crate::problem::{
    impulsive_bounds, refined_max_bound, DataNorms, Field, Grid, ProblemError, ProblemSpec,
    RunInfo, RunMode, Snapshot, Trajectory, SUP_INFLATION,
};
use crate::scheme::{
    cfl_dt_with, source_rate, FluxKind, Scheme, SchemeError, StepOptions, Workspace,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error("sup-norm {measured} exceeded the bound {bound} used for the time step")]
    CflViolation { measured: f64, bound: f64 },
    #[error("invalid run: {0}")]
    InvalidRun(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub flux: FluxKind,
    pub cfl_safety: f64,
    pub snapshot_stride: usize,
    pub step: StepOptions,
    /// Fixed time step (upper bound; snapped to divide `T`). Sweeps use
    /// this so all runs share one time grid.
    pub dt: Option<f64>,
    /// Fixed state bound for the fluxes (otherwise predicted from the data).
    /// Sweeps share it so flux dissipation is identical across runs.
    pub bound: Option<f64>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            flux: FluxKind::EngquistOsher,
            cfl_safety: 0.9,
            snapshot_stride: 32,
            step: StepOptions::default(),
            dt: None,
            bound: None,
        }
    }
}

/// Called with `(n, u(t_n))` for every time level, after the jump at `tau`.
/// After a restart the levels are replayed from `n = 0`.
pub type Observer<'o> = &'o mut dyn FnMut(usize, &Field);

/// Predicted sup-norm bound of the run, used for the time step and flux
/// dissipation. Includes the sampling inflation.
pub fn predicted_bound(spec: &ProblemSpec, mode: RunMode, norms: &DataNorms) -> f64 {
    let data = norms.data_max() * SUP_INFLATION;
    let Some(_) = spec.beta else { return data };
    match mode {
        RunMode::Impulsive => {
            impulsive_bounds(spec, &norms.inflated(SUP_INFLATION)).1 * SUP_INFLATION
        }
        RunMode::Regularized | RunMode::Entropy => {
            let lam = spec.b1.unwrap_or(norms.data_max() + 1.0);
            // |u| grows by at most sup|beta| int K = sup|beta|
            let crude = (norms.data_max() + beta_sup(spec, lam)) * SUP_INFLATION;
            match refined_max_bound(spec, &norms.inflated(SUP_INFLATION), spec.domain.t_end) {
                Ok(m7) => crude.min(m7),
                Err(_) => crude,
            }
        }
    }
}

/// Largest time step the scheme admits for `spec` in `mode` with states in `[-m, m]`.
pub fn stable_dt(
    spec: &ProblemSpec,
    mode: RunMode,
    grid: &Grid,
    m: f64,
    options: &SolveOptions,
) -> f64 {
    let rate = if mode == RunMode::Impulsive {
        0.0
    } else {
        source_rate(spec, m)
    };
    cfl_dt_with(
        spec,
        grid,
        m,
        options.cfl_safety,
        rate,
        options.step.x_diffusion,
    )
}

/// Options under which every `(spec, mode)` run shares one state bound
/// and one time step, so their time levels coincide.
pub fn shared_options(
    runs: &[(&ProblemSpec, RunMode)],
    grid: &Grid,
    base: &SolveOptions,
) -> SolveOptions {
    let m = runs
        .iter()
        .map(|(s, mode)| predicted_bound(s, *mode, &DataNorms::estimate(s)))
        .fold(0.0, f64::max);
    let dt = runs
        .iter()
        .map(|(s, mode)| {
            let g = Grid::new(&s.domain, grid.nx, grid.ns).expect("grid validated by caller");
            stable_dt(s, *mode, &g, m, base)
        })
        .fold(f64::INFINITY, f64::min);
    SolveOptions {
        dt: Some(dt),
        bound: Some(m),
        ..*base
    }
}

/// Copy of `spec` with the parameters implied by `mode` applied.
pub fn effective_spec(spec: &ProblemSpec, mode: RunMode, epsilon: f64, gamma: f64) -> ProblemSpec {
    let mut s = spec.clone();
    match mode {
        RunMode::Regularized => {
            s.epsilon = epsilon;
            s.gamma = gamma;
        }
        RunMode::Entropy => {
            s.epsilon = 0.0;
            s.gamma = gamma;
        }
        RunMode::Impulsive => {
            s.epsilon = 0.0;
            s.gamma = 0.0;
        }
    }
    s
}

fn check_mode(spec: &ProblemSpec, mode: RunMode) -> Result<(), SolverError> {
    spec.validate()?;
    let has_source = spec.beta.is_some();
    match mode {
        RunMode::Regularized if !(spec.epsilon > 0.0) => Err(SolverError::InvalidRun(format!(
            "regularized run needs epsilon > 0, got {}",
            spec.epsilon
        ))),
        RunMode::Regularized | RunMode::Entropy if has_source && spec.gamma <= 0.0 => {
            Err(SolverError::InvalidRun(
                "gamma = 0 selects the impulsive problem; use the impulsive solver".into(),
            ))
        }
        _ => Ok(()),
    }
}

/// Marches `spec` (with its own `epsilon`, `gamma`) in the given mode.
pub fn solve(
    spec: &ProblemSpec,
    grid: &Grid,
    mode: RunMode,
    options: &SolveOptions,
    observer: Option<Observer<'_>>,
) -> Result<Trajectory, SolverError> {
    check_mode(spec, mode)?;
    let m = match options.bound {
        Some(m) => m,
        None => predicted_bound(spec, mode, &DataNorms::estimate(spec)),
    };
    let mut noop = |_: usize, _: &Field| {};
    let obs: &mut dyn FnMut(usize, &Field) = match observer {
        Some(o) => o,
        None => &mut noop,
    };
    match march(spec, grid, mode, options, m, &mut *obs) {
        Err(SolverError::CflViolation { measured, .. })
            if options.dt.is_none() && options.bound.is_none() =>
        {
            // one restart with a generous bound
            march(spec, grid, mode, options, 2.0 * measured.max(m), obs)
        }
        other => other,
    }
}

/// Regularised problem with viscosity `eps` in `s` and kernel width `gamma`.
pub fn solve_regularized(
    spec: &ProblemSpec,
    grid: &Grid,
    eps: f64,
    gamma: f64,
    options: &SolveOptions,
) -> Result<Trajectory, SolverError> {
    let s = effective_spec(spec, RunMode::Regularized, eps, gamma);
    solve(&s, grid, RunMode::Regularized, options, None)
}

/// Entropy problem (`eps = 0`) with kernel width `gamma`.
pub fn solve_entropy(
    spec: &ProblemSpec,
    grid: &Grid,
    gamma: f64,
    options: &SolveOptions,
) -> Result<Trajectory, SolverError> {
    let s = effective_spec(spec, RunMode::Entropy, 0.0, gamma);
    solve(&s, grid, RunMode::Entropy, options, None)
}

/// Impulsive problem: no source, jump `u + beta(x, s, u)` at `tau`.
pub fn solve_impulsive(
    spec: &ProblemSpec,
    grid: &Grid,
    options: &SolveOptions,
) -> Result<Trajectory, SolverError> {
    let s = effective_spec(spec, RunMode::Impulsive, 0.0, 0.0);
    solve(&s, grid, RunMode::Impulsive, options, None)
}

/// `u(tau + 0) = u(tau - 0) + beta(x, s, u(tau - 0))`.
pub fn apply_jump(spec: &ProblemSpec, u: &Field) -> Field {
    let g = u.grid;
    let mut out = u.clone();
    for ix in 0..g.n_space() {
        let xc = g.x_coords(ix);
        for j in 0..g.ns {
            let c = u.index(ix, j);
            out.values[c] = u.values[c] + spec.beta_at(&xc[..g.d], g.s_center(j), u.values[c]);
        }
    }
    out
}

fn gradient_energy(u: &Field, ghost_x: f64) -> (f64, f64) {
    let g = u.grid;
    let ns = g.ns;
    let nx = g.nx;
    let vol = g.cell_volume();
    let mut gx = 0.0;
    let mut gs = 0.0;
    for ix in 0..g.n_space() {
        let coords: [usize; 2] = if g.d == 1 {
            [ix, 0]
        } else {
            [ix / nx, ix % nx]
        };
        let strides: [usize; 2] = if g.d == 1 { [1, 0] } else { [nx, 1] };
        for j in 0..ns {
            let c = ix * ns + j;
            let uc = u.values[c];
            for dim in 0..g.d {
                let i = coords[dim];
                let upper = if i + 1 < nx {
                    u.values[c + strides[dim] * ns]
                } else {
                    ghost_x
                };
                gx += (upper - uc).powi(2);
                if i == 0 {
                    gx += (uc - ghost_x).powi(2);
                }
            }
            if j + 1 < ns {
                gs += (u.values[c + 1] - uc).powi(2);
            }
        }
    }
    (gx * vol / (g.dx * g.dx), gs * vol / (g.ds * g.ds))
}

fn march(
    spec: &ProblemSpec,
    grid: &Grid,
    mode: RunMode,
    options: &SolveOptions,
    m: f64,
    observer: &mut dyn FnMut(usize, &Field),
) -> Result<Trajectory, SolverError> {
    let base = Grid::new(&spec.domain, grid.nx, grid.ns)?;
    let dt = options
        .dt
        .unwrap_or_else(|| stable_dt(spec, mode, &base, m, options));
    let g = base.with_dt(dt);
    let n_tau = g.tau_step(spec.tau);
    let scheme = Scheme::new(spec, g, options.flux, m, options.step);
    let stride = options.snapshot_stride.max(1);

    let mut u = Field::from_fn(g, |x, s| spec.initial_at(x, s));
    let mut next = Field::zeros(g);
    let mut ws = Workspace::default();
    let (mut grad_x_sq, mut grad_s_sq) = (0.0, 0.0);
    let mut snapshots = vec![Snapshot {
        step: 0,
        t: 0.0,
        field: u.clone(),
        grad_x_sq,
        grad_s_sq,
    }];
    let (mut tau_minus, mut tau_plus) = (None, None);
    observer(0, &u);
    let limit = m * (1.0 + 1e-9) + 1e-12;

    for n in 0..g.nt {
        let (ex, es) = gradient_energy(&u, 0.0);
        grad_x_sq += g.dt * ex;
        grad_s_sq += g.dt * es;
        scheme.step(&u, n, &mut ws, &mut next)?;
        std::mem::swap(&mut u, &mut next);
        let level = n + 1;
        if level == n_tau {
            tau_minus = Some(u.clone());
            if mode == RunMode::Impulsive {
                u = apply_jump(spec, &u);
            }
            tau_plus = Some(u.clone());
        }
        let sup = u.sup_norm();
        if sup > limit {
            return Err(SolverError::CflViolation {
                measured: sup,
                bound: m,
            });
        }
        observer(level, &u);
        if level % stride == 0 || level == n_tau || level == g.nt {
            snapshots.push(Snapshot {
                step: level,
                t: g.t_at(level),
                field: u.clone(),
                grad_x_sq,
                grad_s_sq,
            });
        }
    }

    Ok(Trajectory {
        info: RunInfo {
            mode,
            gamma: spec.gamma,
            epsilon: spec.epsilon,
            grid: g,
            m_cfl: m,
            n_tau,
            fingerprint: spec.fingerprint(),
        },
        snapshots,
        tau_minus,
        tau_plus,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceSide {
    S0,
    SEnd,
}

/// Cell row adjacent to `s = 0` or `s = S` at every snapshot, as `(t, row)`.
pub fn extract_s_trace(traj: &Trajectory, side: TraceSide) -> Vec<(f64, Vec<f64>)> {
    traj.snapshots
        .iter()
        .map(|s| (s.t, s.field.s_row(side == TraceSide::S0)))
        .collect()
}
