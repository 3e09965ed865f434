//! Closed-form a-priori bounds: maximum principles and L1 stability
//! right-hand sides.

use super::sampling::beta_sup;
use super::{DataNorms, ProblemError, ProblemSpec};
use crate::quadrature::golden_section;

/// Upper end of the search window for `xi`, measured from `b1g`.
const XI_WINDOW: f64 = 50.0;
const XI_TOL: f64 = 1e-10;

/// Maximum principle for the regularised problem:
///
/// `M(t') = inf_{xi > b1g} e^{xi t'} max{D(t'), sqrt(b2g / (xi - b1g))}`
///
/// where `D(t')` is the largest data sup-norm on `(0, t')`.
pub fn max_principle_bound(norms: &DataNorms, t_prime: f64, b1g: f64, b2g: f64) -> f64 {
    let data = norms.data_max_until(t_prime);
    if b2g == 0.0 {
        // the infimum is approached as xi -> b1g
        return (b1g * t_prime).exp() * data;
    }
    // minimise the logarithm, which is better conditioned for large xi t'
    let log_obj = |xi: f64| {
        let root = (b2g / (xi - b1g)).sqrt();
        xi * t_prime + data.max(root).ln()
    };
    let (_, best) = golden_section(log_obj, b1g + 1e-9, b1g + XI_WINDOW, XI_TOL);
    best.exp()
}

/// Exponent `xi_*` of the refined maximum principle for `K_gamma beta`
/// sources. A missing source is treated as `b1 = 0`.
pub fn refined_exponent(spec: &ProblemSpec, initial_norm: f64) -> Result<f64, ProblemError> {
    let b1 = match (&spec.beta, spec.b1) {
        (None, _) => 0.0,
        (Some(_), Some(b1)) => b1,
        (Some(_), None) => return Err(ProblemError::MissingSupportBound),
    };
    if initial_norm == 0.0 {
        return Err(ProblemError::ZeroInitialData);
    }
    if b1 <= initial_norm - 1.0 {
        return Ok(0.0);
    }
    let g0 = spec.gamma0();
    Ok(2.0 / (2.0 * spec.tau - g0) * ((b1 + 1.0) / initial_norm).ln())
}

/// Refined maximum principle `M7(t') = e^{xi_* t'} max{data norms}`.
pub fn refined_max_bound(
    spec: &ProblemSpec,
    norms: &DataNorms,
    t_prime: f64,
) -> Result<f64, ProblemError> {
    let xi = refined_exponent(spec, norms.initial)?;
    Ok((xi * t_prime).exp() * norms.data_max())
}

/// Discretised ingredients of the L1 stability estimate, tabulated on a
/// uniform time grid with step `dt`. Entry `k` refers to the cell
/// `(k dt, (k+1) dt)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityInputs {
    pub dt: f64,
    /// `max |d_lambda Z|` at the cell midpoint.
    pub growth_rate: Vec<f64>,
    /// `||u1_0^(2) - u2_0^(2)||_L1(Omega) + ||u1_S^(2) - u2_S^(2)||_L1(Omega)`
    /// at the cell midpoint.
    pub boundary_diff: Vec<f64>,
    /// `||u1_0^(1) - u2_0^(1)||_L1`.
    pub d_init: f64,
    /// `max |a'|` over `[-M1, M1]`.
    pub a_prime_max: f64,
}

/// Right-hand side of the stability estimate at `t = n dt`:
///
/// `e^{G(t)} [d_init + max|a'| int_0^t e^{-G(t')} (d_s0 + d_sS) dt']`
/// with `G(t) = int_0^t max |d_lambda Z| dt'`, both by the midpoint rule.
pub fn stability_rhs(inputs: &StabilityInputs, n: usize) -> f64 {
    let dt = inputs.dt;
    let mut g = 0.0;
    let mut integral = 0.0;
    for k in 0..n {
        let rate = inputs.growth_rate.get(k).copied().unwrap_or(0.0);
        let bd = inputs.boundary_diff.get(k).copied().unwrap_or(0.0);
        integral += (-(g + 0.5 * rate * dt)).exp() * bd * dt;
        g += rate * dt;
    }
    g.exp() * (inputs.d_init + inputs.a_prime_max * integral)
}

/// Difference of boundary data of two problems, split by side.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryDiff {
    /// Per time cell, `||u1_0^(2) - u2_0^(2)||_L1(Omega)` at the midpoint.
    pub s0: Vec<f64>,
    /// Per time cell, `||u1_S^(2) - u2_S^(2)||_L1(Omega)` at the midpoint.
    pub s_end: Vec<f64>,
}

impl BoundaryDiff {
    /// Samples both differences at time-cell midpoints with the
    /// midpoint rule in `x` on `nx` cells per axis.
    pub fn sample(p: &ProblemSpec, q: &ProblemSpec, dt: f64, nt: usize, nx: usize) -> Self {
        let d = p.domain.d;
        let h = p.domain.length / nx as f64;
        let cell = h.powi(d as i32);
        let n_space = nx.pow(d as u32);
        let coords = |ix: usize| -> [f64; 2] {
            if d == 1 {
                [(ix as f64 + 0.5) * h, 0.0]
            } else {
                [
                    (ix / nx) as f64 * h + 0.5 * h,
                    (ix % nx) as f64 * h + 0.5 * h,
                ]
            }
        };
        let mut s0 = Vec::with_capacity(nt);
        let mut s_end = Vec::with_capacity(nt);
        for k in 0..nt {
            let t = (k as f64 + 0.5) * dt;
            let (mut a, mut b) = (0.0, 0.0);
            for ix in 0..n_space {
                let x = coords(ix);
                let x = &x[..d];
                a += (p.s0_data_at(x, t) - q.s0_data_at(x, t)).abs();
                b += (p.s_end_data_at(x, t) - q.s_end_data_at(x, t)).abs();
            }
            s0.push(a * cell);
            s_end.push(b * cell);
        }
        Self { s0, s_end }
    }

    pub fn total(&self) -> Vec<f64> {
        self.s0
            .iter()
            .zip(&self.s_end)
            .map(|(a, b)| a + b)
            .collect()
    }
}

/// `(M2, M3)` for the impulsive problem: the sup-norm bounds before and
/// after the jump at `tau`.
pub fn impulsive_bounds(spec: &ProblemSpec, norms: &DataNorms) -> (f64, f64) {
    let tau = spec.tau;
    let t_end = spec.domain.t_end;
    let m2 = norms
        .initial
        .max(norms.s0.sup_on(0.0, tau))
        .max(norms.s_end.sup_on(0.0, tau));
    let m3 = (m2 + beta_sup(spec, m2))
        .max(norms.s0.sup_on(tau, t_end))
        .max(norms.s_end.sup_on(tau, t_end));
    (m2, m3)
}

/// Ingredients of the impulsive stability estimate, on a uniform time
/// grid with step `dt`; the jump sits at step `n_tau`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImpulsiveStabilityInputs {
    pub dt: f64,
    pub n_tau: usize,
    /// Per time cell boundary-data L1 difference (both sides summed).
    pub boundary_diff: Vec<f64>,
    pub d_init: f64,
    /// `||a'||` over `[-M4(T), M4(T)]`.
    pub a_prime_max_m4: f64,
    /// `||a'||` over `[-M5(tau), M5(tau)]`.
    pub a_prime_max_m5: f64,
    /// `S meas(Omega)`.
    pub xi1_measure: f64,
    /// `||beta1 - beta2||` over `Xi1 x [-M5, M5]`.
    pub beta_diff_sup: f64,
    /// `max |d_lambda beta1|` over `Xi1 x [-M5, M5]`.
    pub beta1_deriv_sup: f64,
}

/// Right-hand side of the impulsive stability estimate at `t = n dt`.
pub fn impulsive_stability_rhs(inputs: &ImpulsiveStabilityInputs, n: usize) -> f64 {
    let integral =
        |upto: usize| -> f64 { inputs.boundary_diff.iter().take(upto).sum::<f64>() * inputs.dt };
    let mut rhs = inputs.d_init + inputs.a_prime_max_m4 * integral(n);
    if n >= inputs.n_tau {
        rhs += inputs.xi1_measure * inputs.beta_diff_sup
            + inputs.beta1_deriv_sup
                * (inputs.d_init + inputs.a_prime_max_m5 * integral(inputs.n_tau));
    }
    rhs
}
