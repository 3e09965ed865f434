//! The kinetic chi-function `chi(lambda; v)` and its quadrature identities.

use thiserror::Error;

use crate::exprdsl::Expr;
use crate::problem::Field;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChiError {
    #[error("lambda range {range} does not cover |v| = {value}")]
    LambdaTooSmall { range: f64, value: f64 },
    #[error("fields live on different grids")]
    GridMismatch,
}

/// Default number of lambda cells.
pub const DEFAULT_CELLS: usize = 1024;

/// `1` on `0 < lambda < v`, `-1` on `v < lambda < 0`, `0` elsewhere
/// (including the breakpoints).
#[inline]
pub fn chi(lambda: f64, v: f64) -> i8 {
    if 0.0 < lambda && lambda < v {
        1
    } else if v < lambda && lambda < 0.0 {
        -1
    } else {
        0
    }
}

/// Uniform midpoint grid of `n_cells` on `[-range, range]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaGrid {
    pub range: f64,
    pub n_cells: usize,
}

impl LambdaGrid {
    pub fn new(range: f64, n_cells: usize) -> Self {
        Self { range, n_cells }
    }

    pub fn step(&self) -> f64 {
        2.0 * self.range / self.n_cells as f64
    }

    pub fn midpoints(&self) -> impl Iterator<Item = f64> + '_ {
        let h = self.step();
        (0..self.n_cells).map(move |k| -self.range + (k as f64 + 0.5) * h)
    }

    fn covers(&self, v: f64) -> Result<(), ChiError> {
        if v.abs() > self.range {
            Err(ChiError::LambdaTooSmall {
                range: self.range,
                value: v.abs(),
            })
        } else {
            Ok(())
        }
    }

    /// Values of `chi(.; v)` on every cell.
    pub fn sample(&self, v: f64) -> Vec<i8> {
        self.midpoints().map(|l| chi(l, v)).collect()
    }
}

/// Midpoint quadrature of `int psi'(lambda) chi(lambda; v) dlambda`,
/// which equals `Psi(v) - Psi(0)` up to `O(dlambda)`.
pub fn chi_integral(psi_prime: &Expr, v: f64, range: f64, n_cells: usize) -> Result<f64, ChiError> {
    let g = LambdaGrid::new(range, n_cells);
    g.covers(v)?;
    Ok(g.midpoints()
        .map(|l| psi_prime.eval_lambda(l) * chi(l, v) as f64)
        .sum::<f64>()
        * g.step())
}

/// Midpoint quadrature of `int |chi(.; v) - chi(.; w)| dlambda = |v - w|`.
pub fn chi_distance(v: f64, w: f64, range: f64, n_cells: usize) -> Result<f64, ChiError> {
    let g = LambdaGrid::new(range, n_cells);
    g.covers(v)?;
    g.covers(w)?;
    Ok(g.midpoints()
        .map(|l| (chi(l, v) - chi(l, w)).abs() as f64)
        .sum::<f64>()
        * g.step())
}

/// Sup over grid cells of the kinetic jump residual
///
/// `| int chi(l; u+) - int (1 + d_l beta(x,s,l)) chi(l; u-) - beta(x,s,0) |`
///
/// with both integrals by the midpoint rule on `[-m3, m3]`.
pub fn kinetic_impulse_residual<B, D>(
    u_minus: &Field,
    u_plus: &Field,
    beta: B,
    beta_lambda: D,
    m3: f64,
    n_cells: usize,
) -> Result<f64, ChiError>
where
    B: Fn(&[f64], f64, f64) -> f64,
    D: Fn(&[f64], f64, f64) -> f64,
{
    let grid = u_minus.grid;
    if !grid.same_shape(&u_plus.grid) {
        return Err(ChiError::GridMismatch);
    }
    let lg = LambdaGrid::new(m3, n_cells);
    let h = lg.step();
    let lambdas: Vec<f64> = lg.midpoints().collect();
    let mut worst: f64 = 0.0;
    for ix in 0..grid.n_space() {
        let xc = grid.x_coords(ix);
        let x = &xc[..grid.d];
        for j in 0..grid.ns {
            let s = grid.s_center(j);
            let (um, up) = (u_minus.at(ix, j), u_plus.at(ix, j));
            lg.covers(um)?;
            lg.covers(up)?;
            let mut lhs = 0.0;
            let mut rhs = 0.0;
            for &l in &lambdas {
                lhs += chi(l, up) as f64;
                let c = chi(l, um);
                if c != 0 {
                    rhs += (1.0 + beta_lambda(x, s, l)) * c as f64;
                }
            }
            let r = ((lhs - rhs) * h - beta(x, s, 0.0)).abs();
            worst = worst.max(r);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprdsl::parse;
    use crate::problem::{Domain, Grid};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn branches() {
        assert_eq!(chi(1.0, 2.0), 1);
        assert_eq!(chi(-0.5, -1.0), -1);
        assert_eq!(chi(0.5, 0.2), 0);
        assert_eq!(chi(0.0, 1.0), 0);
        assert_eq!(chi(1.0, 1.0), 0);
    }

    #[test]
    fn integral_examples() {
        let one = parse("1").unwrap();
        assert!((chi_integral(&one, 3.0, 10.0, 1024).unwrap() - 3.0).abs() < 20.0 / 1024.0);
        assert_eq!(chi_integral(&one, 0.0, 10.0, 1024).unwrap(), 0.0);
        let lam = parse("lambda").unwrap();
        assert!((chi_integral(&lam, 2.0, 10.0, 1024).unwrap() - 2.0).abs() < 2.0 * 20.0 / 1024.0);
        assert!(matches!(
            chi_integral(&one, 11.0, 10.0, 1024),
            Err(ChiError::LambdaTooSmall { .. })
        ));
    }

    #[test]
    fn distance_examples() {
        let h = 20.0 / 1024.0;
        assert!((chi_distance(2.0, -1.0, 10.0, 1024).unwrap() - 3.0).abs() <= h);
        assert_eq!(chi_distance(5.0, 5.0, 10.0, 1024).unwrap(), 0.0);
        assert!((chi_distance(0.7, 0.2, 10.0, 1024).unwrap() - 0.5).abs() <= h);
    }

    #[test]
    fn random_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let one = parse("1").unwrap();
        let g = LambdaGrid::new(10.0, 1024);
        for _ in 0..200 {
            let v: f64 = rng.gen_range(-10.0..10.0);
            let w: f64 = rng.gen_range(-10.0..10.0);
            assert!((chi_integral(&one, v, 10.0, 1024).unwrap() - v).abs() <= g.step());
            assert!((chi_distance(v, w, 10.0, 1024).unwrap() - (v - w).abs()).abs() <= g.step());
            for (a, b) in g.sample(v).into_iter().zip(g.sample(w)) {
                let diff = (a - b).abs();
                assert_eq!(diff, diff * diff);
            }
        }
    }

    fn small_grid() -> Grid {
        Grid::new(
            &Domain {
                d: 1,
                length: 1.0,
                t_end: 1.0,
                s_end: 1.0,
            },
            8,
            8,
        )
        .unwrap()
    }

    #[test]
    fn continuity_case_has_zero_residual() {
        let u = Field::from_fn(small_grid(), |x, s| (x[0] - s).sin());
        let r = kinetic_impulse_residual(&u, &u, |_, _, _| 0.0, |_, _, _| 0.0, 2.0, 1024).unwrap();
        assert_eq!(r, 0.0);
    }

    #[test]
    fn constant_shift() {
        let g = small_grid();
        let um = Field::from_fn(g, |x, s| 0.5 * (x[0] + s) - 0.4);
        let up = Field::from_fn(g, |x, s| um_value(x[0], s) + 0.3);
        fn um_value(x: f64, s: f64) -> f64 {
            0.5 * (x + s) - 0.4
        }
        let r =
            kinetic_impulse_residual(&um, &up, |_, _, _| 0.3, |_, _, _| 0.0, 2.0, 1024).unwrap();
        assert!(r <= 2.0 * 4.0 / 1024.0, "{r}");
    }

    #[test]
    fn sine_source_jump() {
        let g = small_grid();
        let beta = |l: f64| 0.1 * l.sin();
        let um = Field::from_fn(g, |x, s| 1.5 * (3.0 * x[0]).sin() * s);
        let up = Field::from_values(g, um.values.iter().map(|&u| u + beta(u)).collect());
        let n = 1024;
        let m3 = 2.0;
        let dl = 2.0 * m3 / n as f64;
        let r =
            kinetic_impulse_residual(&um, &up, |_, _, l| beta(l), |_, _, l| 0.1 * l.cos(), m3, n)
                .unwrap();
        assert!(r <= 2.0 * dl, "{r} vs {}", 2.0 * dl);
        let gm = Grid::new(
            &Domain {
                d: 1,
                length: 1.0,
                t_end: 1.0,
                s_end: 2.0,
            },
            8,
            4,
        )
        .unwrap();
        let other = Field::zeros(gm);
        assert_eq!(
            kinetic_impulse_residual(&um, &other, |_, _, _| 0.0, |_, _, _| 0.0, m3, n),
            Err(ChiError::GridMismatch)
        );
    }
}
