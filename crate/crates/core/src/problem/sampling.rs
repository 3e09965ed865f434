//! Dense-sampling estimates of data sup-norms.
//!
//! These are estimates, not certified bounds. Wherever a sampled norm
//! enters a bound asserted by the verifier it is inflated by
//! [`SUP_INFLATION`].

use super::{xs_bindings, xt_bindings, ProblemSpec};
use crate::exprdsl::{Expr, Var};

/// Safety factor applied to sampled sup-norms inside asserted bounds.
pub const SUP_INFLATION: f64 = 1.01;

/// Visits every point of the uniform lattice with `n` points per axis
/// (endpoints included) on the box `[0, extents[i]]`.
pub fn for_each_lattice_point<F: FnMut(&[f64])>(extents: &[f64], n: usize, mut f: F) {
    let dims = extents.len();
    let mut idx = vec![0usize; dims];
    let mut p = vec![0.0; dims];
    let step = |i: usize, k: usize| extents[i] * k as f64 / (n - 1) as f64;
    loop {
        for i in 0..dims {
            p[i] = step(i, idx[i]);
        }
        f(&p);
        let mut axis = 0;
        loop {
            if axis == dims {
                return;
            }
            idx[axis] += 1;
            if idx[axis] < n {
                break;
            }
            idx[axis] = 0;
            axis += 1;
        }
    }
}

/// True if any coordinate lies within `width * extent` of its boundary.
pub fn in_collar(p: &[f64], extents: &[f64], width: f64) -> bool {
    p.iter()
        .zip(extents)
        .any(|(&c, &e)| c < width * e || c > (1.0 - width) * e)
}

fn per_axis(d: usize) -> usize {
    if d == 1 {
        257
    } else {
        97
    }
}

/// Running maximum over `x` of a boundary datum, tabulated in `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeProfile {
    t_end: f64,
    max_abs: Vec<f64>,
}

impl TimeProfile {
    fn sample(spec: &ProblemSpec, expr: &Expr) -> Self {
        let d = spec.domain.d;
        let n = per_axis(d);
        let t_end = spec.domain.t_end;
        let xs: Vec<f64> = vec![spec.domain.length; d];
        let max_abs = (0..n)
            .map(|k| {
                let t = t_end * k as f64 / (n - 1) as f64;
                let mut m: f64 = 0.0;
                for_each_lattice_point(&xs, n, |x| {
                    let v = expr.eval(&xt_bindings(x, t)).unwrap_or(f64::INFINITY);
                    m = m.max(v.abs());
                });
                m
            })
            .collect();
        Self { t_end, max_abs }
    }

    /// Sampled sup over `Omega x [t0, t1]`. One neighbouring sample on
    /// each side of the window is included so short windows are covered.
    pub fn sup_on(&self, t0: f64, t1: f64) -> f64 {
        let n = self.max_abs.len();
        let h = self.t_end / (n - 1) as f64;
        let lo = ((t0 / h).floor().max(0.0) as usize).min(n - 1);
        let hi = ((t1 / h).ceil().max(0.0) as usize).min(n - 1);
        self.max_abs[lo..=hi.max(lo)]
            .iter()
            .copied()
            .fold(0.0, f64::max)
    }

    pub fn sup(&self) -> f64 {
        self.max_abs.iter().copied().fold(0.0, f64::max)
    }

    fn scaled(&self, factor: f64) -> Self {
        Self {
            t_end: self.t_end,
            max_abs: self.max_abs.iter().map(|v| v * factor).collect(),
        }
    }
}

/// Sampled sup-norms of the three data functions.
#[derive(Debug, Clone, PartialEq)]
pub struct DataNorms {
    /// `||u0_1||` over `Omega x [0,S]`.
    pub initial: f64,
    /// `|u0_2|` profile in `t`.
    pub s0: TimeProfile,
    /// `|uS_2|` profile in `t`.
    pub s_end: TimeProfile,
}

impl DataNorms {
    pub fn estimate(spec: &ProblemSpec) -> Self {
        let d = spec.domain.d;
        let extents: Vec<f64> = std::iter::repeat_n(spec.domain.length, d)
            .chain([spec.domain.s_end])
            .collect();
        let mut initial: f64 = 0.0;
        for_each_lattice_point(&extents, per_axis(d), |p| {
            let (x, s) = p.split_at(d);
            let v = spec
                .u0_1
                .eval(&xs_bindings(x, s[0]))
                .unwrap_or(f64::INFINITY);
            initial = initial.max(v.abs());
        });
        Self {
            initial,
            s0: TimeProfile::sample(spec, &spec.u0_2),
            s_end: TimeProfile::sample(spec, &spec.us_2),
        }
    }

    /// Copy with every norm multiplied by `factor`.
    pub fn inflated(&self, factor: f64) -> Self {
        Self {
            initial: self.initial * factor,
            s0: self.s0.scaled(factor),
            s_end: self.s_end.scaled(factor),
        }
    }

    /// `max{||u0_1||, ||u0_2||_(0,t'), ||uS_2||_(0,t')}`.
    pub fn data_max_until(&self, t_prime: f64) -> f64 {
        self.initial
            .max(self.s0.sup_on(0.0, t_prime))
            .max(self.s_end.sup_on(0.0, t_prime))
    }

    /// Max of all three norms over their full domains.
    pub fn data_max(&self) -> f64 {
        self.initial.max(self.s0.sup()).max(self.s_end.sup())
    }
}

fn xi1_extents(spec: &ProblemSpec) -> Vec<f64> {
    std::iter::repeat_n(spec.domain.length, spec.domain.d)
        .chain([spec.domain.s_end])
        .collect()
}

fn xi1_per_axis(d: usize) -> usize {
    if d == 1 {
        65
    } else {
        25
    }
}

/// Sampled `max |beta|` over `Omega x [0,S] x [-lam, lam]` on a
/// 64 x 64 x 256 cell lattice (coarser in `d = 2`).
pub fn beta_sup(spec: &ProblemSpec, lam: f64) -> f64 {
    let Some(beta) = &spec.beta else { return 0.0 };
    sample_beta(spec, lam, |x, s, l| {
        beta.eval(&xs_bindings(x, s).lambda(l))
            .unwrap_or(f64::INFINITY)
    })
}

/// Sampled `max |d beta / d lambda|` over `Omega x [0,S] x [-lam, lam]`.
pub fn beta_lambda_deriv_sup(spec: &ProblemSpec, lam: f64) -> f64 {
    let Some(beta) = &spec.beta else { return 0.0 };
    sample_beta(spec, lam, |x, s, l| {
        beta.eval_dual(&xs_bindings(x, s).lambda(l), Var::Lambda)
            .map(|d| d.deriv)
            .unwrap_or(f64::INFINITY)
    })
}

/// Sampled `max |beta(., ., 0)|` over `Omega x [0,S]`.
pub fn beta_at_zero_sup(spec: &ProblemSpec) -> f64 {
    let Some(beta) = &spec.beta else { return 0.0 };
    let extents = xi1_extents(spec);
    let d = spec.domain.d;
    let mut m: f64 = 0.0;
    for_each_lattice_point(&extents, per_axis(d), |p| {
        let (x, s) = p.split_at(d);
        let v = beta
            .eval(&xs_bindings(x, s[0]).lambda(0.0))
            .unwrap_or(f64::INFINITY);
        m = m.max(v.abs());
    });
    m
}

fn sample_beta<F: Fn(&[f64], f64, f64) -> f64>(spec: &ProblemSpec, lam: f64, f: F) -> f64 {
    let extents = xi1_extents(spec);
    let d = spec.domain.d;
    let n_lam = if d == 1 { 257 } else { 97 };
    let mut m: f64 = 0.0;
    for_each_lattice_point(&extents, xi1_per_axis(d), |p| {
        let (x, s) = p.split_at(d);
        for k in 0..n_lam {
            let l = -lam + 2.0 * lam * k as f64 / (n_lam - 1) as f64;
            m = m.max(f(x, s[0], l).abs());
        }
    });
    m
}
