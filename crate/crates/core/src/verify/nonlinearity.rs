//! Numerical test of the genuine nonlinearity condition
//!
//! `mu(delta) = sup_{tau^2 + xi^2 = 1} meas{ |lambda| <= L : |tau + xi a'(lambda)| <= delta }`
//!
//! which must vanish linearly in `delta`.

use super::{Context, VerificationReport};
use crate::exprdsl::Expr;

const LAMBDA_CELLS: usize = 4096;
/// `mu(delta_min) <= RATE delta_min L` is required.
const RATE: f64 = 10.0;

#[derive(Debug, Clone, PartialEq)]
pub struct NonlinearityProfile {
    pub flux: String,
    pub lambda_max: f64,
    pub deltas: Vec<f64>,
    /// `mu(delta)` for each entry of `deltas`.
    pub mu: Vec<f64>,
    /// Direction `(tau, xi)` attaining `mu` at the smallest `delta`.
    pub worst_direction: (f64, f64),
    pub pass: bool,
}

impl NonlinearityProfile {
    fn smallest(&self) -> (usize, f64) {
        let (i, &d) = self
            .deltas
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("at least one delta");
        (i, d)
    }

    /// `mu(delta_min)` against `10 delta_min Lambda`.
    pub fn report(&self) -> VerificationReport {
        let (i, d) = self.smallest();
        let ctx = Context {
            fingerprint: self.flux.clone(),
            nx: LAMBDA_CELLS,
            ns: 0,
            gamma: 0.0,
            epsilon: 0.0,
        };
        VerificationReport::new(
            "genuine_nonlinearity",
            self.mu[i],
            RATE * d * self.lambda_max,
            0.0,
            0.0,
            ctx,
        )
    }
}

/// Samples `mu(delta)` over `n_dirs` uniform directions plus the
/// directions that flatten `tau + xi a'` at the extrema of `a'`.
pub fn validate_genuine_nonlinearity(
    a: &Expr,
    lambda_max: f64,
    n_dirs: usize,
    deltas: &[f64],
) -> NonlinearityProfile {
    let h = 2.0 * lambda_max / LAMBDA_CELLS as f64;
    let slope: Vec<f64> = (0..LAMBDA_CELLS)
        .map(|k| a.deriv_lambda(-lambda_max + (k as f64 + 0.5) * h))
        .collect();

    let mut dirs: Vec<(f64, f64)> = (0..n_dirs)
        .map(|i| {
            let th = std::f64::consts::PI * i as f64 / n_dirs as f64;
            (th.cos(), th.sin())
        })
        .collect();
    let mut critical = |v: f64| {
        let n = (1.0 + v * v).sqrt();
        dirs.push((-v / n, 1.0 / n));
    };
    for k in 1..LAMBDA_CELLS - 1 {
        let (l, c, r) = (slope[k - 1], slope[k], slope[k + 1]);
        if (c >= l && c >= r) || (c <= l && c <= r) {
            critical(c);
        }
    }
    critical(slope[0]);
    critical(slope[LAMBDA_CELLS - 1]);

    let measure = |(tau, xi): (f64, f64), delta: f64| -> f64 {
        slope
            .iter()
            .filter(|&&v| (tau + xi * v).abs() < delta)
            .count() as f64
            * h
    };

    let mut mu = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        mu.push(dirs.iter().map(|&d| measure(d, delta)).fold(0.0, f64::max));
    }
    let (i_min, &d_min) = deltas
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("at least one delta");
    let worst_direction = dirs
        .iter()
        .copied()
        .max_by(|p, q| measure(*p, d_min).total_cmp(&measure(*q, d_min)))
        .expect("directions");
    let pass = mu[i_min] <= RATE * d_min * lambda_max;
    NonlinearityProfile {
        flux: a.to_string(),
        lambda_max,
        deltas: deltas.to_vec(),
        mu,
        worst_direction,
        pass,
    }
}
