//! Monotone finite-volume discretisation of
//! `u_t + a(u)_s + div_x phi(u) = Lap_x u + eps u_ss + K beta(x, s, u)`.
//!
//! Both numerical fluxes are written in split form
//! `F(uL, uR) = L(uL) + R(uR)` with `L` nondecreasing and `R`
//! nonincreasing, which makes monotonicity evident and lets a step
//! evaluate each flux once per cell.

use thiserror::Error;

use crate::exprdsl::Expr;
use crate::kernels::DelayedKernel;
use crate::problem::sampling::beta_lambda_deriv_sup;
use crate::problem::{Field, Grid, ProblemError, ProblemSpec};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SchemeError {
    #[error("non-finite value at step {step}, cell (x index {ix}, s index {js})")]
    NaNDetected { step: usize, ix: usize, js: usize },
    #[error(transparent)]
    Problem(#[from] ProblemError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FluxKind {
    #[default]
    LaxFriedrichs,
    EngquistOsher,
}

impl FluxKind {
    pub fn name(self) -> &'static str {
        match self {
            FluxKind::LaxFriedrichs => "lax-friedrichs",
            FluxKind::EngquistOsher => "engquist-osher",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "lax-friedrichs" | "lf" => Some(FluxKind::LaxFriedrichs),
            "engquist-osher" | "eo" => Some(FluxKind::EngquistOsher),
            _ => None,
        }
    }
}

/// How a step distributes its work over cell rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// Rows are processed on the rayon pool. Falls back to sequential
    /// when the `parallel` feature is disabled.
    #[default]
    Parallel,
}

/// Lax-Friedrichs flux `(f(uL) + f(uR))/2 - alpha (uR - uL)/2`.
pub fn lf_flux(u_l: f64, u_r: f64, f: &Expr, alpha: f64) -> f64 {
    0.5 * (f.eval_lambda(u_l) + f.eval_lambda(u_r)) - 0.5 * alpha * (u_r - u_l)
}

/// Cells per unit length in the Engquist-Osher split integrals.
pub const EO_CELLS_PER_UNIT: usize = 64;

/// `int_0^u g(f'(l)) dl` by the composite midpoint rule on cells of width
/// `1/64` aligned to zero; a partial last cell uses the full cell's midpoint.
fn eo_split_integral<G: Fn(f64) -> f64>(f: &Expr, u: f64, g: G) -> f64 {
    let h = 1.0 / EO_CELLS_PER_UNIT as f64;
    let dir = u.signum();
    let cells = u.abs() / h;
    let whole = cells.floor() as usize;
    let mut acc = 0.0;
    for k in 0..whole {
        acc += g(f.deriv_lambda(dir * (k as f64 + 0.5) * h));
    }
    let frac = cells - whole as f64;
    if frac > 0.0 {
        acc += frac * g(f.deriv_lambda(dir * (whole as f64 + 0.5) * h));
    }
    dir * acc * h
}

/// Engquist-Osher flux `f(0) + int_0^uL max(f',0) + int_0^uR min(f',0)`.
pub fn eo_flux(u_l: f64, u_r: f64, f: &Expr) -> f64 {
    f.eval_lambda(0.0)
        + eo_split_integral(f, u_l, |v| v.max(0.0))
        + eo_split_integral(f, u_r, |v| v.min(0.0))
}

/// Tabulated Engquist-Osher split integrals on `[-range, range]`,
/// extended linearly outside.
#[derive(Debug, Clone, PartialEq)]
struct EoTable {
    f0: f64,
    /// Cell count per side.
    n: usize,
    /// Cumulative integrals at nodes `k h`, `k = -n..=n` (index `k + n`).
    plus: Vec<f64>,
    minus: Vec<f64>,
    /// Integrand values per cell (index `k + n` for cell `(k h, (k+1) h)`).
    plus_rate: Vec<f64>,
    minus_rate: Vec<f64>,
}

impl EoTable {
    fn new(f: &Expr, range: f64) -> Self {
        let h = 1.0 / EO_CELLS_PER_UNIT as f64;
        let n = (range / h).ceil().max(1.0) as usize;
        let mut plus_rate = Vec::with_capacity(2 * n);
        let mut minus_rate = Vec::with_capacity(2 * n);
        for k in 0..2 * n {
            let mid = (k as f64 - n as f64 + 0.5) * h;
            let d = f.deriv_lambda(mid);
            plus_rate.push(d.max(0.0));
            minus_rate.push(d.min(0.0));
        }
        let cumulate = |rate: &[f64]| {
            let mut nodes = vec![0.0; 2 * n + 1];
            for k in n..2 * n {
                nodes[k + 1] = nodes[k] + rate[k] * h;
            }
            for k in (0..n).rev() {
                nodes[k] = nodes[k + 1] - rate[k] * h;
            }
            nodes
        };
        Self {
            f0: f.eval_lambda(0.0),
            n,
            plus: cumulate(&plus_rate),
            minus: cumulate(&minus_rate),
            plus_rate,
            minus_rate,
        }
    }

    #[inline]
    fn lookup(&self, nodes: &[f64], rate: &[f64], u: f64) -> f64 {
        let h = 1.0 / EO_CELLS_PER_UNIT as f64;
        let pos = u / h;
        let n = self.n as f64;
        let cell = pos.floor().clamp(-n, n - 1.0);
        let idx = (cell + n) as usize;
        nodes[idx] + rate[idx] * (u - cell * h)
    }

    #[inline]
    fn split(&self, u: f64) -> (f64, f64) {
        (
            self.f0 + self.lookup(&self.plus, &self.plus_rate, u),
            self.lookup(&self.minus, &self.minus_rate, u),
        )
    }
}

/// A numerical flux ready for repeated evaluation in split form.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedFlux(Prepared);

#[derive(Debug, Clone, PartialEq)]
enum Prepared {
    LaxFriedrichs { f: Expr, alpha: f64 },
    EngquistOsher(Box<EoTable>),
}

impl PreparedFlux {
    /// Prepares `f` for states in `[-m, m]`. Lax-Friedrichs uses
    /// `alpha = 1.05 max |f'|` on that interval.
    pub fn new(kind: FluxKind, f: &Expr, m: f64) -> Self {
        PreparedFlux(match kind {
            FluxKind::LaxFriedrichs => Prepared::LaxFriedrichs {
                f: f.clone(),
                alpha: 1.05 * max_abs_derivative(f, m),
            },
            FluxKind::EngquistOsher => {
                Prepared::EngquistOsher(Box::new(EoTable::new(f, 2.0 * m.max(1.0))))
            }
        })
    }

    /// Dissipation coefficient of a Lax-Friedrichs flux.
    pub fn alpha(&self) -> Option<f64> {
        match &self.0 {
            Prepared::LaxFriedrichs { alpha, .. } => Some(*alpha),
            Prepared::EngquistOsher(_) => None,
        }
    }

    /// `(L(u), R(u))` with `F(uL, uR) = L(uL) + R(uR)`.
    #[inline]
    pub fn split(&self, u: f64) -> (f64, f64) {
        match &self.0 {
            Prepared::LaxFriedrichs { f, alpha } => {
                let fu = f.eval_lambda(u);
                (0.5 * (fu + alpha * u), 0.5 * (fu - alpha * u))
            }
            Prepared::EngquistOsher(t) => t.split(u),
        }
    }

    pub fn eval(&self, u_l: f64, u_r: f64) -> f64 {
        self.split(u_l).0 + self.split(u_r).1
    }
}

/// `max |f'|` over `[-m, m]`, sampled at 2049 points.
pub fn max_abs_derivative(f: &Expr, m: f64) -> f64 {
    let n = 2048;
    (0..=n)
        .map(|k| f.deriv_lambda(-m + 2.0 * m * k as f64 / n as f64).abs())
        .fold(0.0, f64::max)
}

/// `sup_t K_gamma * sup |d_lambda beta|` on `[-m, m]`; zero without a
/// mollified source.
pub fn source_rate(spec: &ProblemSpec, m: f64) -> f64 {
    if spec.beta.is_none() || spec.gamma <= 0.0 {
        return 0.0;
    }
    let kernel = DelayedKernel::new(spec.tau, spec.gamma).expect("gamma checked positive");
    kernel.sup() * beta_lambda_deriv_sup(spec, m)
}

/// Explicit stable step
///
/// `dt = safety / (max|a'|/ds + sum max|phi_i'|/dx + 2d/dx^2 + 2 eps/ds^2 + sup K b0)`
///
/// with derivative maxima sampled on `[-m, m]`.
pub fn cfl_dt(spec: &ProblemSpec, grid: &Grid, m: f64, safety: f64) -> Result<f64, SchemeError> {
    if !(grid.dx > 0.0 && grid.ds > 0.0) {
        return Err(
            ProblemError::DegenerateGrid(format!("dx = {}, ds = {}", grid.dx, grid.ds)).into(),
        );
    }
    let rate = source_rate(spec, m);
    Ok(cfl_dt_with(spec, grid, m, safety, rate, true))
}

/// [`cfl_dt`] with an explicit source rate and optional x-diffusion.
pub fn cfl_dt_with(
    spec: &ProblemSpec,
    grid: &Grid,
    m: f64,
    safety: f64,
    source_rate: f64,
    x_diffusion: bool,
) -> f64 {
    let d = spec.domain.d as f64;
    let mut denom = max_abs_derivative(&spec.flux_a, m) / grid.ds;
    for phi in &spec.flux_phi {
        denom += max_abs_derivative(phi, m) / grid.dx;
    }
    if x_diffusion {
        denom += 2.0 * d / (grid.dx * grid.dx);
    }
    denom += 2.0 * spec.epsilon / (grid.ds * grid.ds) + source_rate;
    if denom == 0.0 {
        return spec.domain.t_end;
    }
    safety / denom
}

/// Exterior states used by one step.
#[derive(Debug, Clone, PartialEq)]
pub struct Ghosts {
    /// Value outside `Omega` (homogeneous Dirichlet: `0`).
    pub x: f64,
    /// Per spatial cell, the state below `s = 0`.
    pub s0: Vec<f64>,
    /// Per spatial cell, the state above `s = S`.
    pub s_end: Vec<f64>,
}

impl Ghosts {
    pub fn zero(grid: &Grid) -> Self {
        Self {
            x: 0.0,
            s0: vec![0.0; grid.n_space()],
            s_end: vec![0.0; grid.n_space()],
        }
    }

    /// Boundary data of `spec` at time `t`.
    pub fn from_data(spec: &ProblemSpec, grid: &Grid, t: f64) -> Self {
        let mut s0 = Vec::with_capacity(grid.n_space());
        let mut s_end = Vec::with_capacity(grid.n_space());
        for ix in 0..grid.n_space() {
            let xc = grid.x_coords(ix);
            let x = &xc[..grid.d];
            s0.push(spec.s0_data_at(x, t));
            s_end.push(spec.s_end_data_at(x, t));
        }
        Self { x: 0.0, s0, s_end }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            x: f(self.x),
            s0: self.s0.iter().map(|&v| f(v)).collect(),
            s_end: self.s_end.iter().map(|&v| f(v)).collect(),
        }
    }
}

/// Options that change the discrete operator, used for debugging and
/// manufactured tests.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOptions {
    pub execution: Execution,
    /// Wrap ghosts periodically in every direction instead of using data.
    pub periodic: bool,
    /// Include `Lap_x u`.
    pub x_diffusion: bool,
}

impl Default for StepOptions {
    fn default() -> Self {
        Self {
            execution: Execution::Parallel,
            periodic: false,
            x_diffusion: true,
        }
    }
}

/// Discrete evolution operator for one problem on one grid.
#[derive(Debug, Clone)]
pub struct Scheme<'a> {
    spec: &'a ProblemSpec,
    pub grid: Grid,
    pub epsilon: f64,
    flux_a: PreparedFlux,
    flux_phi: Vec<PreparedFlux>,
    kernel: Option<DelayedKernel>,
    pub options: StepOptions,
}

/// Per-cell split flux values, reused across steps.
#[derive(Debug, Default, Clone)]
pub struct Workspace {
    la: Vec<f64>,
    ra: Vec<f64>,
    lp: Vec<Vec<f64>>,
    rp: Vec<Vec<f64>>,
}

impl<'a> Scheme<'a> {
    /// `m` bounds the states the fluxes must handle; `grid.dt` must be set.
    pub fn new(
        spec: &'a ProblemSpec,
        grid: Grid,
        kind: FluxKind,
        m: f64,
        options: StepOptions,
    ) -> Self {
        let kernel = match (&spec.beta, spec.gamma > 0.0) {
            (Some(_), true) => DelayedKernel::new(spec.tau, spec.gamma).ok(),
            _ => None,
        };
        Self {
            spec,
            grid,
            epsilon: spec.epsilon,
            flux_a: PreparedFlux::new(kind, &spec.flux_a, m),
            flux_phi: spec
                .flux_phi
                .iter()
                .map(|p| PreparedFlux::new(kind, p, m))
                .collect(),
            kernel,
            options,
        }
    }

    pub fn spec(&self) -> &ProblemSpec {
        self.spec
    }

    /// `K_gamma` at the midpoint of step `n`, or zero without a source.
    pub fn kernel_weight(&self, n: usize) -> f64 {
        match &self.kernel {
            Some(k) => k.eval((n as f64 + 0.5) * self.grid.dt),
            None => 0.0,
        }
    }

    /// Ghost states for step `n` (boundary data at `t_n`).
    pub fn ghosts(&self, n: usize) -> Ghosts {
        Ghosts::from_data(self.spec, &self.grid, self.grid.t_at(n))
    }

    /// Advances `u` from `t_n` to `t_{n+1}` into `out`, including the source.
    pub fn step(
        &self,
        u: &Field,
        n: usize,
        ws: &mut Workspace,
        out: &mut Field,
    ) -> Result<(), SchemeError> {
        let ghosts = self.ghosts(n);
        self.apply(u, &ghosts, self.kernel_weight(n), ws, out);
        if !out.is_finite() {
            let c = out.values.iter().position(|v| !v.is_finite()).unwrap_or(0);
            return Err(SchemeError::NaNDetected {
                step: n,
                ix: c / self.grid.ns,
                js: c % self.grid.ns,
            });
        }
        Ok(())
    }

    /// The discrete operator with explicit ghost states and kernel weight.
    /// The source is skipped entirely when `kernel` is zero.
    pub fn apply(
        &self,
        u: &Field,
        ghosts: &Ghosts,
        kernel: f64,
        ws: &mut Workspace,
        out: &mut Field,
    ) {
        let g = self.grid;
        let n_cells = g.n_cells();
        let d = g.d;
        ws.la.resize(n_cells, 0.0);
        ws.ra.resize(n_cells, 0.0);
        ws.lp.resize(d, Vec::new());
        ws.rp.resize(d, Vec::new());
        for i in 0..d {
            ws.lp[i].resize(n_cells, 0.0);
            ws.rp[i].resize(n_cells, 0.0);
        }
        self.fill_splits(u, ws);

        let x_ghost: Vec<(f64, f64)> = self.flux_phi.iter().map(|f| f.split(ghosts.x)).collect();
        let ctx = RowContext {
            scheme: self,
            u: &u.values,
            ws,
            ghosts,
            x_ghost: &x_ghost,
            kernel,
        };
        let ns = g.ns;
        match self.options.execution {
            #[cfg(feature = "parallel")]
            Execution::Parallel => out
                .values
                .par_chunks_mut(ns)
                .enumerate()
                .for_each(|(ix, row)| ctx.update_row(ix, row)),
            _ => out
                .values
                .chunks_mut(ns)
                .enumerate()
                .for_each(|(ix, row)| ctx.update_row(ix, row)),
        }
        out.grid = u.grid;
    }

    fn fill_splits(&self, u: &Field, ws: &mut Workspace) {
        let fill = |flux: &PreparedFlux, l: &mut Vec<f64>, r: &mut Vec<f64>| {
            let body = |(c, (lv, rv)): (usize, (&mut f64, &mut f64))| {
                let (a, b) = flux.split(u.values[c]);
                *lv = a;
                *rv = b;
            };
            match self.options.execution {
                #[cfg(feature = "parallel")]
                Execution::Parallel => l
                    .par_iter_mut()
                    .zip(r.par_iter_mut())
                    .enumerate()
                    .for_each(body),
                _ => l.iter_mut().zip(r.iter_mut()).enumerate().for_each(body),
            }
        };
        fill(&self.flux_a, &mut ws.la, &mut ws.ra);
        for (i, f) in self.flux_phi.iter().enumerate() {
            fill(f, &mut ws.lp[i], &mut ws.rp[i]);
        }
    }
}

struct RowContext<'s, 'a> {
    scheme: &'s Scheme<'a>,
    u: &'s [f64],
    ws: &'s Workspace,
    ghosts: &'s Ghosts,
    x_ghost: &'s [(f64, f64)],
    kernel: f64,
}

impl RowContext<'_, '_> {
    fn update_row(&self, ix: usize, row: &mut [f64]) {
        let sc = self.scheme;
        let g = sc.grid;
        let ns = g.ns;
        let nx = g.nx;
        let periodic = sc.options.periodic;
        let lam_s = g.dt / g.ds;
        let lam_x = g.dt / g.dx;
        let mu_x = g.dt / (g.dx * g.dx);
        let mu_s = sc.epsilon * g.dt / (g.ds * g.ds);
        let base = ix * ns;
        let u = self.u;
        let ws = self.ws;

        // s-direction exterior states for this column
        let (g_lo, g_hi) = if periodic {
            (u[base + ns - 1], u[base])
        } else {
            (self.ghosts.s0[ix], self.ghosts.s_end[ix])
        };
        let (la_lo, _) = sc.flux_a.split(g_lo);
        let (_, ra_hi) = sc.flux_a.split(g_hi);

        // x-direction neighbours: (offset, has_lower, has_upper, wrap offsets)
        let coords: [usize; 2] = if g.d == 1 {
            [ix, 0]
        } else {
            [ix / nx, ix % nx]
        };
        let strides: [usize; 2] = if g.d == 1 { [1, 0] } else { [nx, 1] };

        let source_on = self.kernel != 0.0 && sc.spec.beta.is_some();
        let xc = g.x_coords(ix);

        for (j, out) in row.iter_mut().enumerate() {
            let c = base + j;
            let uc = u[c];
            // s convection
            let f_lo = if j == 0 {
                la_lo + ws.ra[c]
            } else {
                ws.la[c - 1] + ws.ra[c]
            };
            let f_hi = if j + 1 == ns {
                ws.la[c] + ra_hi
            } else {
                ws.la[c] + ws.ra[c + 1]
            };
            let mut v = uc - lam_s * (f_hi - f_lo);

            // s diffusion
            if mu_s != 0.0 {
                let lo = if j == 0 { g_lo } else { u[c - 1] };
                let hi = if j + 1 == ns { g_hi } else { u[c + 1] };
                v += mu_s * (lo - 2.0 * uc + hi);
            }

            // x convection and diffusion, per dimension
            for dim in 0..g.d {
                let i = coords[dim];
                let stride = strides[dim] * ns;
                let lower = if i > 0 {
                    Some(c - stride)
                } else if periodic {
                    Some(c + (nx - 1) * stride)
                } else {
                    None
                };
                let upper = if i + 1 < nx {
                    Some(c + stride)
                } else if periodic {
                    Some(c - (nx - 1) * stride)
                } else {
                    None
                };
                let (lp, rp) = (&ws.lp[dim], &ws.rp[dim]);
                let (gl, gr) = self.x_ghost[dim];
                let f_lo = lower.map_or(gl, |k| lp[k]) + rp[c];
                let f_hi = lp[c] + upper.map_or(gr, |k| rp[k]);
                v -= lam_x * (f_hi - f_lo);
                if sc.options.x_diffusion {
                    let ul = lower.map_or(self.ghosts.x, |k| u[k]);
                    let ur = upper.map_or(self.ghosts.x, |k| u[k]);
                    v += mu_x * (ul - 2.0 * uc + ur);
                }
            }

            if source_on {
                v += g.dt * self.kernel * sc.spec.beta_at(&xc[..g.d], g.s_center(j), uc);
            }
            *out = v;
        }
    }
}

/// One step of the scheme from `t` with an explicitly given `dt` in
/// `grid`, building the operator on the fly. Convenient for tests; the
/// solvers reuse a [`Scheme`] instead.
pub fn step(
    u: &Field,
    spec: &ProblemSpec,
    grid: &Grid,
    t: f64,
    kind: FluxKind,
) -> Result<Field, SchemeError> {
    let m = u.sup_norm().max(1.0);
    let scheme = Scheme::new(spec, *grid, kind, m, StepOptions::default());
    let n = (t / grid.dt).round() as usize;
    let mut out = Field::zeros(*grid);
    scheme.step(u, n, &mut Workspace::default(), &mut out)?;
    Ok(out)
}
