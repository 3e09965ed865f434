//! Maximum principle, L1 stability, energy and jump checks.

use super::{Context, VerificationReport, VerifyError};
use crate::chi::{kinetic_impulse_residual, DEFAULT_CELLS};
use crate::kernels::{growth_constants, DelayedKernel};
use crate::problem::sampling::{
    beta_at_zero_sup, beta_lambda_deriv_sup, beta_sup, for_each_lattice_point,
};
use crate::problem::{
    impulsive_stability_rhs, max_principle_bound, refined_max_bound, stability_rhs, BoundaryDiff,
    DataNorms, ImpulsiveStabilityInputs, ProblemSpec, RunMode, StabilityInputs, Trajectory,
    SUP_INFLATION,
};
use crate::scheme::max_abs_derivative;

const MAX_PRINCIPLE_SLACK: f64 = 1e-10;

/// `(M2, M3)` with sampled norms inflated.
fn inflated_impulsive_bounds(spec: &ProblemSpec, norms: &DataNorms) -> (f64, f64) {
    let n = norms.inflated(SUP_INFLATION);
    let tau = spec.tau;
    let t_end = spec.domain.t_end;
    let m2 = n
        .initial
        .max(n.s0.sup_on(0.0, tau))
        .max(n.s_end.sup_on(0.0, tau));
    let m3 = (m2 + SUP_INFLATION * beta_sup(spec, m2))
        .max(n.s0.sup_on(tau, t_end))
        .max(n.s_end.sup_on(tau, t_end));
    (m2, m3)
}

/// Sup-norm bound as a function of time for a run of `spec` in `mode`.
struct MaxBound {
    norms: DataNorms,
    growth: (f64, f64),
    spec: ProblemSpec,
    refined: bool,
    impulsive: Option<(f64, f64)>,
}

impl MaxBound {
    fn new(spec: &ProblemSpec, mode: RunMode) -> Self {
        let raw = DataNorms::estimate(spec);
        let norms = raw.inflated(SUP_INFLATION);
        let impulsive = (mode == RunMode::Impulsive && spec.beta.is_some())
            .then(|| inflated_impulsive_bounds(spec, &raw));
        let growth = if spec.beta.is_some() && spec.gamma > 0.0 {
            let b0 = SUP_INFLATION * crate::kernels::estimate_b0(spec);
            let z = SUP_INFLATION * beta_at_zero_sup(spec);
            growth_constants(z, spec.gamma, b0).expect("gamma positive")
        } else {
            (0.0, 0.0)
        };
        let refined = refined_max_bound(spec, &norms, 0.0).is_ok();
        Self {
            norms,
            growth,
            spec: spec.clone(),
            refined,
            impulsive,
        }
    }

    fn at(&self, step: usize, n_tau: usize, t: f64) -> f64 {
        if let Some((m2, m3)) = self.impulsive {
            return if step < n_tau { m2 } else { m3 };
        }
        let m = max_principle_bound(&self.norms, t, self.growth.0, self.growth.1);
        if self.refined {
            m.min(refined_max_bound(&self.spec, &self.norms, t).expect("checked defined"))
        } else {
            m
        }
    }
}

/// `(t, sup |u(t)|, bound(t))` at every snapshot.
pub fn max_principle_profile(traj: &Trajectory, spec: &ProblemSpec) -> Vec<(f64, f64, f64)> {
    let mb = MaxBound::new(spec, traj.info.mode);
    traj.snapshots
        .iter()
        .map(|s| (s.t, s.field.sup_norm(), mb.at(s.step, traj.info.n_tau, s.t)))
        .collect()
}

/// `||u(t')||_inf <= min(M(t'), M7(t')) + 1e-10` at every snapshot
/// (`M2`/`M3` before/after the jump for impulsive runs). Reports the
/// snapshot with the smallest margin.
pub fn check_max_principle(traj: &Trajectory, spec: &ProblemSpec) -> VerificationReport {
    let profile = max_principle_profile(traj, spec);
    let (_, sup, bound) = profile
        .into_iter()
        .min_by(|a, b| (a.2 - a.1).total_cmp(&(b.2 - b.1)))
        .expect("trajectory has snapshots");
    VerificationReport::new(
        "max_principle",
        sup,
        bound,
        0.0,
        MAX_PRINCIPLE_SLACK,
        Context::of(traj),
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityOptions {
    /// Grid constant `K` in the slack `K (dx^{1/2} + ds^{1/2})`.
    pub grid_constant: f64,
    /// Relative tolerance on the continuum bound.
    pub tolerance: f64,
}

impl Default for StabilityOptions {
    fn default() -> Self {
        Self {
            grid_constant: 0.0,
            tolerance: 0.05,
        }
    }
}

fn sampled_beta_difference(p: &ProblemSpec, q: &ProblemSpec, lam: f64) -> f64 {
    let d = p.domain.d;
    let extents: Vec<f64> = std::iter::repeat_n(p.domain.length, d)
        .chain([p.domain.s_end])
        .collect();
    let n_lam = 129;
    let mut m: f64 = 0.0;
    for_each_lattice_point(&extents, if d == 1 { 65 } else { 25 }, |pt| {
        let (x, s) = pt.split_at(d);
        for k in 0..n_lam {
            let l = -lam + 2.0 * lam * k as f64 / (n_lam - 1) as f64;
            m = m.max((p.beta_at(x, s[0], l) - q.beta_at(x, s[0], l)).abs());
        }
    });
    m
}

/// `(t, ||u1 - u2||_L1, rhs(t))` at every common snapshot.
fn stability_series(
    t1: &Trajectory,
    t2: &Trajectory,
    s1: &ProblemSpec,
    s2: &ProblemSpec,
) -> Result<Vec<(f64, f64, f64)>, VerifyError> {
    let (g1, g2) = (t1.info.grid, t2.info.grid);
    if !g1.same_shape(&g2)
        || g1.nt != g2.nt
        || g1.dt != g2.dt
        || t1.snapshots.len() != t2.snapshots.len()
    {
        return Err(VerifyError::GridMismatch);
    }
    let g = g1;
    let diff = BoundaryDiff::sample(s1, s2, g.dt, g.nt, g.nx).total();
    let d_init = t1.snapshots[0].field.l1_distance(&t2.snapshots[0].field);
    let mut out = Vec::with_capacity(t1.snapshots.len());

    if t1.info.mode == RunMode::Impulsive {
        let (n1, n2) = (
            DataNorms::estimate(s1).inflated(SUP_INFLATION),
            DataNorms::estimate(s2).inflated(SUP_INFLATION),
        );
        let (tau, t_end) = (s1.tau, s1.domain.t_end);
        let m5 = n1.data_max_until(tau).max(n2.data_max_until(tau));
        let post = |n: &DataNorms| n.s0.sup_on(tau, t_end).max(n.s_end.sup_on(tau, t_end));
        let m4 = (m5 + SUP_INFLATION * beta_sup(s1, m5))
            .max(m5 + SUP_INFLATION * beta_sup(s2, m5))
            .max(post(&n1))
            .max(post(&n2));
        let inputs = ImpulsiveStabilityInputs {
            dt: g.dt,
            n_tau: t1.info.n_tau,
            boundary_diff: diff,
            d_init,
            a_prime_max_m4: max_abs_derivative(&s1.flux_a, m4),
            a_prime_max_m5: max_abs_derivative(&s1.flux_a, m5),
            xi1_measure: s1.domain.xi1_measure(),
            beta_diff_sup: SUP_INFLATION * sampled_beta_difference(s1, s2, m5),
            beta1_deriv_sup: SUP_INFLATION * beta_lambda_deriv_sup(s1, m5),
        };
        for (a, b) in t1.snapshots.iter().zip(&t2.snapshots) {
            out.push((
                a.t,
                a.field.l1_distance(&b.field),
                impulsive_stability_rhs(&inputs, a.step),
            ));
        }
        return Ok(out);
    }

    let mb1 = MaxBound::new(s1, t1.info.mode);
    let mb2 = MaxBound::new(s2, t2.info.mode);
    let kernel = (s1.beta.is_some() && s1.gamma > 0.0)
        .then(|| DelayedKernel::new(s1.tau, s1.gamma).expect("gamma positive"));
    let b0 = SUP_INFLATION * crate::kernels::estimate_b0(s1).max(crate::kernels::estimate_b0(s2));
    let growth_rate: Vec<f64> = (0..g.nt)
        .map(|k| kernel.map_or(0.0, |kr| kr.eval((k as f64 + 0.5) * g.dt) * b0))
        .collect();
    for (a, b) in t1.snapshots.iter().zip(&t2.snapshots) {
        let m1 = mb1.at(a.step, 0, a.t).max(mb2.at(b.step, 0, b.t));
        let inputs = StabilityInputs {
            dt: g.dt,
            growth_rate: growth_rate.clone(),
            boundary_diff: diff.clone(),
            d_init,
            a_prime_max: max_abs_derivative(&s1.flux_a, m1),
        };
        out.push((
            a.t,
            a.field.l1_distance(&b.field),
            stability_rhs(&inputs, a.step),
        ));
    }
    Ok(out)
}

fn grid_scale(traj: &Trajectory) -> f64 {
    traj.info.grid.dx.sqrt() + traj.info.grid.ds.sqrt()
}

/// Smallest `K` such that `lhs <= 1.05 rhs + K (dx^{1/2} + ds^{1/2})` at
/// every snapshot of this pair. Calibrate on the finest grid of a suite.
pub fn calibrate_grid_constant(
    t1: &Trajectory,
    t2: &Trajectory,
    s1: &ProblemSpec,
    s2: &ProblemSpec,
) -> Result<f64, VerifyError> {
    let series = stability_series(t1, t2, s1, s2)?;
    let excess = series
        .iter()
        .map(|(_, l, r)| (l - 1.05 * r).max(0.0))
        .fold(0.0, f64::max);
    Ok(excess / grid_scale(t1))
}

/// `||u1(t) - u2(t)||_L1 <= rhs(t) (1 + tol) + K (dx^{1/2} + ds^{1/2})`
/// at every snapshot; the impulsive form is used for impulsive runs.
pub fn check_stability(
    t1: &Trajectory,
    t2: &Trajectory,
    s1: &ProblemSpec,
    s2: &ProblemSpec,
    options: &StabilityOptions,
) -> Result<VerificationReport, VerifyError> {
    let series = stability_series(t1, t2, s1, s2)?;
    let slack = options.grid_constant * grid_scale(t1);
    let (_, lhs, rhs) = series
        .into_iter()
        .min_by(|a, b| {
            let ma = a.2 * (1.0 + options.tolerance) - a.1;
            let mb = b.2 * (1.0 + options.tolerance) - b.1;
            ma.total_cmp(&mb)
        })
        .expect("trajectory has snapshots");
    Ok(VerificationReport::new(
        "stability",
        lhs,
        rhs,
        options.tolerance,
        slack,
        Context::of(t1),
    ))
}

/// Ratio of largest to smallest final energy
/// `||u||^2 + int ||grad_x u||^2 + eps int ||d_s u||^2` across a family.
pub fn check_energy(runs: &[&Trajectory]) -> Result<VerificationReport, VerifyError> {
    if runs.len() < 3 {
        return Err(VerifyError::TooFewRuns(runs.len()));
    }
    let energies: Vec<f64> = runs
        .iter()
        .map(|t| t.last().energy(t.info.epsilon))
        .collect();
    let max = energies.iter().copied().fold(0.0, f64::max);
    let min = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let ratio = if max == 0.0 { 1.0 } else { max / min };
    Ok(VerificationReport::new(
        "energy_uniform",
        ratio,
        3.0,
        0.0,
        0.0,
        Context::of(runs[0]),
    ))
}

/// Pointwise jump map, its kinetic form, and the post-jump bound `M3`.
pub fn check_jump(
    traj: &Trajectory,
    spec: &ProblemSpec,
) -> Result<Vec<VerificationReport>, VerifyError> {
    let (Some(um), Some(up)) = (&traj.tau_minus, &traj.tau_plus) else {
        return Err(VerifyError::MissingTauTraces);
    };
    let g = um.grid;
    let ctx = Context::of(traj);
    let mut pointwise: f64 = 0.0;
    for ix in 0..g.n_space() {
        let xc = g.x_coords(ix);
        for j in 0..g.ns {
            let (a, b) = (um.at(ix, j), up.at(ix, j));
            let r = (b - a - spec.beta_at(&xc[..g.d], g.s_center(j), a)).abs();
            pointwise = pointwise.max(r);
        }
    }
    let (_, m3) = inflated_impulsive_bounds(spec, &DataNorms::estimate(spec));
    let range = m3.max(um.sup_norm()).max(up.sup_norm());
    let n_cells = DEFAULT_CELLS;
    let dl = 2.0 * range / n_cells as f64;
    let b0 = beta_lambda_deriv_sup(spec, range);
    let kinetic = kinetic_impulse_residual(
        um,
        up,
        |x, s, l| spec.beta_at(x, s, l),
        |x, s, l| spec.beta_lambda_deriv_at(x, s, l),
        range,
        n_cells,
    )?;
    Ok(vec![
        VerificationReport::new("jump_pointwise", pointwise, 0.0, 0.0, 1e-14, ctx.clone()),
        VerificationReport::new(
            "jump_kinetic",
            kinetic,
            3.0 * dl * (1.0 + b0),
            0.0,
            0.0,
            ctx.clone(),
        ),
        VerificationReport::new(
            "jump_bound_m3",
            up.sup_norm(),
            m3,
            0.0,
            MAX_PRINCIPLE_SLACK,
            ctx,
        ),
    ])
}
