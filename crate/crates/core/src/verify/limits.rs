//! Convergence sweeps: `gamma -> 0` towards the impulsive problem and
//! `eps -> 0` towards the entropy solution.

use super::{Context, VerificationReport, VerifyError};
use crate::problem::{Field, Grid, ProblemSpec, RunMode};
use crate::solver::{effective_spec, shared_options, solve, SolveOptions};
#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Allowed growth of the error between consecutive `gamma` levels.
const MONOTONE_SLACK: f64 = 1.05;
/// Required overall error reduction across the `gamma` sweep.
const REDUCTION: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct GammaLimit {
    pub gammas: Vec<f64>,
    /// `sum_n dt ||u_gamma(t_n) - u_imp(t_n)||_L1` per `gamma`.
    pub errors: Vec<f64>,
    /// Time levels `t_n <= tau - gamma - dt` where the fields differ at all.
    pub window_mismatches: Vec<usize>,
    pub reports: Vec<VerificationReport>,
}

impl GammaLimit {
    pub fn finest_error(&self) -> f64 {
        *self.errors.last().expect("non-empty sweep")
    }
}

/// Runs of a sweep are independent; with parallel execution they are
/// spread over the current rayon pool.
fn map_runs<T, R, F>(items: &[T], options: &SolveOptions, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if options.step.execution == crate::scheme::Execution::Parallel {
        return items.par_iter().map(f).collect();
    }
    #[cfg(not(feature = "parallel"))]
    let _ = options;
    items.iter().map(f).collect()
}

fn sweep_context(spec: &ProblemSpec, grid: &Grid, gamma: f64, epsilon: f64) -> Context {
    Context {
        fingerprint: spec.fingerprint(),
        nx: grid.nx,
        ns: grid.ns,
        gamma,
        epsilon,
    }
}

fn check_gammas(spec: &ProblemSpec, gammas: &[f64]) -> Result<(), VerifyError> {
    let cap = 0.5 * spec.gamma0();
    let in_range = gammas.iter().all(|&g| g > 0.0 && g <= cap);
    let decreasing = gammas.windows(2).all(|w| w[1] < w[0]);
    if gammas.is_empty() || !in_range || !decreasing {
        return Err(VerifyError::GammaOutOfRange(format!(
            "{gammas:?} with gamma_0/2 = {cap}"
        )));
    }
    Ok(())
}

/// Solves the entropy problem for each `gamma` and the impulsive problem
/// on one shared time grid and compares them level by level.
pub fn check_gamma_limit(
    spec: &ProblemSpec,
    grid: &Grid,
    gammas: &[f64],
    options: &SolveOptions,
) -> Result<GammaLimit, VerifyError> {
    check_gammas(spec, gammas)?;
    let imp_spec = effective_spec(spec, RunMode::Impulsive, 0.0, 0.0);
    let specs: Vec<ProblemSpec> = gammas
        .iter()
        .map(|&g| effective_spec(spec, RunMode::Entropy, 0.0, g))
        .collect();
    let mut runs: Vec<(&ProblemSpec, RunMode)> = vec![(&imp_spec, RunMode::Impulsive)];
    runs.extend(specs.iter().map(|s| (s, RunMode::Entropy)));
    let shared = shared_options(&runs, grid, options);

    let mut reference: Vec<Field> = Vec::new();
    let mut keep = |n: usize, u: &Field| {
        reference.truncate(n);
        reference.push(u.clone());
    };
    let imp = solve(
        &imp_spec,
        grid,
        RunMode::Impulsive,
        &shared,
        Some(&mut keep),
    )?;
    let g = imp.info.grid;

    let pairs: Vec<(&ProblemSpec, f64)> = specs.iter().zip(gammas.iter().copied()).collect();
    let outcomes = map_runs(&pairs, &shared, |&(s, gamma)| {
        let window_end = s.tau - gamma - g.dt;
        let mut err = 0.0;
        let mut mismatches = 0;
        let mut compare = |n: usize, u: &Field| {
            if n > 0 {
                err += g.dt * u.l1_distance(&reference[n]);
            }
            if g.t_at(n) <= window_end && u.values != reference[n].values {
                mismatches += 1;
            }
        };
        solve(s, grid, RunMode::Entropy, &shared, Some(&mut compare))?;
        Ok::<_, VerifyError>((err, mismatches))
    });
    let mut errors = Vec::with_capacity(gammas.len());
    let mut window_mismatches = Vec::with_capacity(gammas.len());
    for o in outcomes {
        let (err, mismatches) = o?;
        errors.push(err);
        window_mismatches.push(mismatches);
    }

    let ctx = sweep_context(spec, grid, *gammas.last().expect("checked"), 0.0);
    let growth = errors
        .windows(2)
        .map(|w| {
            if w[0] == 0.0 {
                if w[1] == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            } else {
                w[1] / w[0]
            }
        })
        .fold(0.0, f64::max);
    let reduction = if errors[0] == 0.0 {
        0.0
    } else {
        errors[errors.len() - 1] / errors[0]
    };
    let total_mismatches = window_mismatches.iter().sum::<usize>() as f64;
    let reports = vec![
        VerificationReport::new(
            "gamma_monotone",
            growth,
            MONOTONE_SLACK,
            0.0,
            0.0,
            ctx.clone(),
        ),
        VerificationReport::new(
            "gamma_reduction",
            reduction,
            REDUCTION,
            0.0,
            0.0,
            ctx.clone(),
        ),
        VerificationReport::new("gamma_window", total_mismatches, 0.0, 0.0, 0.0, ctx),
    ];
    Ok(GammaLimit {
        gammas: gammas.to_vec(),
        errors,
        window_mismatches,
        reports,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonCauchy {
    pub epsilons: Vec<f64>,
    /// `||u_{eps/2}(T) - u_eps(T)||_L1` per `eps`.
    pub distances: Vec<f64>,
    pub report: VerificationReport,
}

/// Cauchy test for vanishing viscosity: the distance between the
/// solutions at `eps` and `eps/2` must decrease along the sweep.
pub fn check_epsilon_cauchy(
    spec: &ProblemSpec,
    grid: &Grid,
    gamma: f64,
    epsilons: &[f64],
    options: &SolveOptions,
) -> Result<EpsilonCauchy, VerifyError> {
    let ok = epsilons.len() >= 2
        && epsilons.iter().all(|&e| e > 0.0)
        && epsilons.windows(2).all(|w| w[1] < w[0]);
    if !ok {
        return Err(VerifyError::EpsilonOutOfRange(format!("{epsilons:?}")));
    }
    let specs: Vec<(ProblemSpec, ProblemSpec)> = epsilons
        .iter()
        .map(|&e| {
            (
                effective_spec(spec, RunMode::Regularized, e, gamma),
                effective_spec(spec, RunMode::Regularized, 0.5 * e, gamma),
            )
        })
        .collect();
    let runs: Vec<(&ProblemSpec, RunMode)> = specs
        .iter()
        .flat_map(|(a, b)| [(a, RunMode::Regularized), (b, RunMode::Regularized)])
        .collect();
    let shared = shared_options(&runs, grid, options);
    let finals = map_runs(&runs, &shared, |&(s, mode)| {
        solve(s, grid, mode, &shared, None).map(|t| t.last().field.clone())
    });
    let finals = finals.into_iter().collect::<Result<Vec<_>, _>>()?;
    let distances: Vec<f64> = finals.chunks(2).map(|p| p[0].l1_distance(&p[1])).collect();
    let growth = distances
        .windows(2)
        .map(|w| {
            if w[0] == 0.0 {
                if w[1] == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            } else {
                w[1] / w[0]
            }
        })
        .fold(0.0, f64::max);
    let ctx = sweep_context(spec, grid, gamma, *epsilons.last().expect("checked"));
    // strictly decreasing: ratio below one
    let report = VerificationReport::new("epsilon_cauchy", growth, 1.0, 0.0, 0.0, ctx);
    Ok(EpsilonCauchy {
        epsilons: epsilons.to_vec(),
        distances,
        report,
    })
}
