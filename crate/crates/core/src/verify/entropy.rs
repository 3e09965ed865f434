//! Discrete entropy inequalities in the interior and at `s = 0, S`.

use super::{Context, VerificationReport};
use crate::exprdsl::Expr;
use crate::problem::{refined_max_bound, DataNorms, Field, ProblemSpec, Trajectory, SUP_INFLATION};
use crate::scheme::{Ghosts, Scheme, Workspace};
use crate::solver::{SolveOptions, TraceSide};

/// Residuals above `-ENTROPY_FLOOR` count as satisfied.
const ENTROPY_FLOOR: f64 = 1e-8;
/// Width of the smoothed sign used in the boundary entropy flux.
const SIGN_WIDTH: f64 = 1e-6;

/// Tensor-product bump `prod (1 - ((z - c) / w)^2)_+^2` in coordinates
/// normalised to `[0, 1]`. The same profile is used for every `x` axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestFunction {
    pub x_center: f64,
    pub x_width: f64,
    pub s_center: f64,
    pub s_width: f64,
}

impl TestFunction {
    fn profile(z: f64, c: f64, w: f64) -> f64 {
        let r = (z - c) / w;
        let v = (1.0 - r * r).max(0.0);
        v * v
    }

    /// Value at normalised coordinates.
    pub fn eval(&self, x: &[f64], s: f64) -> f64 {
        x.iter()
            .map(|&xi| Self::profile(xi, self.x_center, self.x_width))
            .product::<f64>()
            * Self::profile(s, self.s_center, self.s_width)
    }
}

pub const TEST_FUNCTIONS: [TestFunction; 8] = [
    TestFunction {
        x_center: 0.5,
        x_width: 0.5,
        s_center: 0.5,
        s_width: 0.5,
    },
    TestFunction {
        x_center: 0.5,
        x_width: 0.25,
        s_center: 0.5,
        s_width: 0.25,
    },
    TestFunction {
        x_center: 0.25,
        x_width: 0.2,
        s_center: 0.25,
        s_width: 0.2,
    },
    TestFunction {
        x_center: 0.75,
        x_width: 0.2,
        s_center: 0.25,
        s_width: 0.2,
    },
    TestFunction {
        x_center: 0.25,
        x_width: 0.2,
        s_center: 0.75,
        s_width: 0.2,
    },
    TestFunction {
        x_center: 0.75,
        x_width: 0.2,
        s_center: 0.75,
        s_width: 0.2,
    },
    TestFunction {
        x_center: 0.5,
        x_width: 0.4,
        s_center: 0.15,
        s_width: 0.12,
    },
    TestFunction {
        x_center: 0.5,
        x_width: 0.4,
        s_center: 0.85,
        s_width: 0.12,
    },
];

/// Nine Kruzhkov constants spread over `[-M, M]`, with `M` the refined
/// maximum-principle bound at `T` when defined and the run's flux bound
/// otherwise.
pub fn kruzhkov_bank(traj: &Trajectory, spec: &ProblemSpec) -> Vec<f64> {
    let norms = DataNorms::estimate(spec).inflated(SUP_INFLATION);
    let m = refined_max_bound(spec, &norms, spec.domain.t_end)
        .ok()
        .filter(|m| m.is_finite() && *m > 0.0)
        .unwrap_or(traj.info.m_cfl);
    (0..9).map(|i| -m + 2.0 * m * i as f64 / 8.0).collect()
}

/// Cellwise entropy production of one step from `u`, for constant `k`:
///
/// `H(u v k) - H(u ^ k) + sgn(H(u) - k) dt K beta(u) - |H(u) - k|`
///
/// where `H` is the operator without the source, with ghosts clipped the
/// same way, and `H(u)` on the right includes the source.
fn step_production(
    scheme: &Scheme<'_>,
    u: &Field,
    n: usize,
    k: f64,
    ws: &mut Workspace,
    out: &mut [Field; 4],
) -> Vec<f64> {
    let g = scheme.grid;
    let ghosts: Ghosts = scheme.ghosts(n);
    let kernel = scheme.kernel_weight(n);
    let hi = Field::from_values(g, u.values.iter().map(|v| v.max(k)).collect());
    let lo = Field::from_values(g, u.values.iter().map(|v| v.min(k)).collect());
    let [full, bare, h_hi, h_lo] = out;
    scheme.apply(u, &ghosts, kernel, ws, full);
    scheme.apply(u, &ghosts, 0.0, ws, bare);
    scheme.apply(&hi, &ghosts.map(|v| v.max(k)), 0.0, ws, h_hi);
    scheme.apply(&lo, &ghosts.map(|v| v.min(k)), 0.0, ws, h_lo);
    (0..g.n_cells())
        .map(|c| {
            let next = full.values[c];
            // the source increment exactly as the scheme applied it
            let src = next - bare.values[c];
            let sgn = if next > k {
                1.0
            } else if next < k {
                -1.0
            } else {
                0.0
            };
            h_hi.values[c] - h_lo.values[c] + sgn * src - (next - k).abs()
        })
        .collect()
}

/// Test-function-weighted entropy production rate `(t_n, P_n)` of the
/// step leaving every stored snapshot except the last. Nonnegative for
/// an entropy-consistent operator.
pub fn entropy_production(
    traj: &Trajectory,
    spec: &ProblemSpec,
    options: &SolveOptions,
    k: f64,
    phi: &TestFunction,
) -> Vec<(f64, f64)> {
    let g = traj.info.grid;
    let scheme = Scheme::new(spec, g, options.flux, traj.info.m_cfl, options.step);
    let weights = test_weights(&g, phi);
    let mut ws = Workspace::default();
    let mut buf = [
        Field::zeros(g),
        Field::zeros(g),
        Field::zeros(g),
        Field::zeros(g),
    ];
    traj.snapshots
        .iter()
        .filter(|s| s.step < g.nt)
        .map(|snap| {
            let r = step_production(&scheme, &snap.field, snap.step, k, &mut ws, &mut buf);
            let total =
                r.iter().zip(&weights).map(|(a, w)| a * w).sum::<f64>() * g.cell_volume() / g.dt;
            (snap.t, total)
        })
        .collect()
}

/// Smallest value of [`entropy_production`] over the run.
pub fn entropy_residual(
    traj: &Trajectory,
    spec: &ProblemSpec,
    options: &SolveOptions,
    k: f64,
    phi: &TestFunction,
) -> f64 {
    entropy_production(traj, spec, options, k, phi)
        .into_iter()
        .map(|(_, p)| p)
        .fold(f64::INFINITY, f64::min)
}

fn test_weights(g: &crate::problem::Grid, phi: &TestFunction) -> Vec<f64> {
    let mut w = Vec::with_capacity(g.n_cells());
    for ix in 0..g.n_space() {
        let xc = g.x_coords(ix);
        let xn: Vec<f64> = xc[..g.d].iter().map(|x| x / g.length).collect();
        for j in 0..g.ns {
            w.push(phi.eval(&xn, g.s_center(j) / g.s_end));
        }
    }
    w
}

/// Entropy production `>= -1e-8` for every `k` and every test function.
/// Reported negated, so `measured = -min residual`.
pub fn check_entropy_residual(
    traj: &Trajectory,
    spec: &ProblemSpec,
    k_values: &[f64],
    options: &SolveOptions,
) -> VerificationReport {
    let mut worst = f64::INFINITY;
    for &k in k_values {
        for phi in &TEST_FUNCTIONS {
            worst = worst.min(entropy_residual(traj, spec, options, k, phi));
        }
    }
    VerificationReport::new(
        "entropy_residual",
        -worst,
        0.0,
        0.0,
        ENTROPY_FLOOR,
        Context::of(traj),
    )
}

fn smooth_sign(v: f64) -> f64 {
    (v / SIGN_WIDTH).clamp(-1.0, 1.0)
}

/// Boundary entropy flux defect
/// `q(u_tr) - q(u_d) - eta'(u_d) (a(u_tr) - a(u_d))` for the Kruzhkov
/// pair with constant `k` and a smoothed sign.
fn bln_defect(a: &Expr, u_tr: f64, u_d: f64, k: f64) -> f64 {
    let a_k = a.eval_lambda(k);
    let a_tr = a.eval_lambda(u_tr);
    let a_d = a.eval_lambda(u_d);
    let q = |u: f64, au: f64| smooth_sign(u - k) * (au - a_k);
    q(u_tr, a_tr) - q(u_d, a_d) - smooth_sign(u_d - k) * (a_tr - a_d)
}

fn boundary_data(spec: &ProblemSpec, side: TraceSide, x: &[f64], t: f64) -> f64 {
    match side {
        TraceSide::S0 => spec.s0_data_at(x, t),
        TraceSide::SEnd => spec.s_end_data_at(x, t),
    }
}

/// Boundary entropy condition on the cell rows next to `s = 0` and
/// `s = S`: the defect must be `<= tol` at `s = 0` and `>= -tol` at
/// `s = S`, with `tol = 5 (ds + dx)`.
pub fn check_bln(traj: &Trajectory, spec: &ProblemSpec, k_values: &[f64]) -> VerificationReport {
    let g = traj.info.grid;
    let tol = 5.0 * (g.ds + g.dx);
    let mut worst: f64 = f64::NEG_INFINITY;
    for snap in &traj.snapshots {
        for side in [TraceSide::S0, TraceSide::SEnd] {
            let row = snap.field.s_row(side == TraceSide::S0);
            let sign = if side == TraceSide::S0 { 1.0 } else { -1.0 };
            for (ix, &u_tr) in row.iter().enumerate() {
                let xc = g.x_coords(ix);
                let u_d = boundary_data(spec, side, &xc[..g.d], snap.t);
                for &k in k_values {
                    worst = worst.max(sign * bln_defect(&spec.flux_a, u_tr, u_d, k));
                }
                // the constants between trace and data are the informative ones
                for i in 1..8 {
                    let k = u_tr + (u_d - u_tr) * i as f64 / 8.0;
                    worst = worst.max(sign * bln_defect(&spec.flux_a, u_tr, u_d, k));
                }
            }
        }
    }
    VerificationReport::new("bln", worst, 0.0, 0.0, tol, Context::of(traj))
}

/// Time-averaged `L1(Omega)` gap between the boundary row and the data.
pub fn trace_data_gap(traj: &Trajectory, spec: &ProblemSpec, side: TraceSide) -> f64 {
    let g = traj.info.grid;
    let cell = g.space_cell_measure();
    let per_snapshot: Vec<f64> = traj
        .snapshots
        .iter()
        .map(|snap| {
            let row = snap.field.s_row(side == TraceSide::S0);
            row.iter()
                .enumerate()
                .map(|(ix, &u)| {
                    let xc = g.x_coords(ix);
                    (u - boundary_data(spec, side, &xc[..g.d], snap.t)).abs()
                })
                .sum::<f64>()
                * cell
        })
        .collect();
    per_snapshot.iter().sum::<f64>() / per_snapshot.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprdsl::parse;

    #[test]
    fn test_functions_vanish_outside_support() {
        for phi in &TEST_FUNCTIONS {
            assert!(phi.eval(&[phi.x_center], phi.s_center) == 1.0);
            assert!(phi.eval(&[phi.x_center + phi.x_width], phi.s_center) < 1e-28);
            assert_eq!(
                phi.eval(&[phi.x_center + 1.01 * phi.x_width], phi.s_center),
                0.0
            );
            assert!(phi.eval(&[phi.x_center], phi.s_center - phi.s_width) < 1e-28);
            assert!(phi.eval(&[0.5, 0.5], 0.5) >= 0.0);
        }
    }

    #[test]
    fn bln_defect_matches_burgers_cases() {
        let a = parse("lambda^2/2").unwrap();
        // trace equal to data: no defect for any k
        for k in [-1.0, -0.3, 0.0, 0.4, 2.0] {
            assert!(bln_defect(&a, 0.7, 0.7, k).abs() < 1e-15);
        }
        // outflow at s = 0: admissible, defect <= 0
        assert!((bln_defect(&a, -0.5, -1.0, -0.75) + 0.3125).abs() < 1e-12);
        // k outside the interval between trace and data
        assert!(bln_defect(&a, -0.5, -1.0, 0.5).abs() < 1e-12);
        // inflow ignored at s = 0: inadmissible, defect > 0
        assert!(bln_defect(&a, 0.2, 1.0, 0.5) > 0.0);
    }
}
