//! Solvers and numerical verification for genuinely nonlinear
//! ultra-parabolic equations
//!
//! `d_t u + d_s a(u) + div_x phi(u) = Lap_x u + K_gamma(t, tau) beta(x, s, u)`
//!
//! on `Omega x (0,T) x (0,S)`, together with their impulsive limit as the
//! mollified source collapses to a jump at `t = tau`.

// `!(x > 0.0)` deliberately rejects NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chi;
pub mod exprdsl;
pub mod io;
pub mod kernels;
pub mod problem;
pub mod quadrature;
pub mod scheme;
pub mod solver;
pub mod verify;
