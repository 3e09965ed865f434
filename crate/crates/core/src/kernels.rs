//! The standard mollifier and the one-sided delayed kernel
//! `K_gamma(t, tau) = 1_{t <= tau} (2/gamma) omega((t - tau)/gamma)`.

use std::sync::OnceLock;

use thiserror::Error;

use crate::problem::sampling::{beta_at_zero_sup, beta_lambda_deriv_sup};
use crate::problem::ProblemSpec;
use crate::quadrature::adaptive_simpson;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum KernelError {
    #[error("kernel width gamma = {0} must be positive")]
    NonPositiveGamma(f64),
}

/// `omega(t) = C^{-1} exp(-1/(1 - t^2))` on `|t| < 1`, normalised to unit mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mollifier {
    /// `int_{-1}^{1} exp(-1/(1-t^2)) dt`.
    pub c_star: f64,
}

fn bump(t: f64) -> f64 {
    if t.abs() < 1.0 {
        (-1.0 / (1.0 - t * t)).exp()
    } else {
        0.0
    }
}

impl Mollifier {
    /// The unit-mass mollifier; the normalisation is integrated once and cached.
    pub fn standard() -> &'static Mollifier {
        static CELL: OnceLock<Mollifier> = OnceLock::new();
        CELL.get_or_init(|| Mollifier {
            c_star: adaptive_simpson(&bump, -1.0, 1.0, 1e-12),
        })
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        bump(t) / self.c_star
    }

    /// `||omega||_C = omega(0)`.
    pub fn peak(&self) -> f64 {
        self.eval(0.0)
    }
}

pub fn omega(t: f64) -> f64 {
    Mollifier::standard().eval(t)
}

pub fn k_gamma(t: f64, tau: f64, gamma: f64) -> Result<f64, KernelError> {
    Ok(DelayedKernel::new(tau, gamma)?.eval(t))
}

/// `K_gamma(., tau)`, supported in `[tau - gamma, tau]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayedKernel {
    pub tau: f64,
    pub gamma: f64,
    mollifier: Mollifier,
}

impl DelayedKernel {
    pub fn new(tau: f64, gamma: f64) -> Result<Self, KernelError> {
        if !(gamma > 0.0) {
            return Err(KernelError::NonPositiveGamma(gamma));
        }
        Ok(Self {
            tau,
            gamma,
            mollifier: *Mollifier::standard(),
        })
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        if t > self.tau {
            return 0.0;
        }
        2.0 / self.gamma * self.mollifier.eval((t - self.tau) / self.gamma)
    }

    /// `sup_t K_gamma = 2 omega(0) / gamma`.
    pub fn sup(&self) -> f64 {
        2.0 * self.mollifier.peak() / self.gamma
    }

    /// `int_a^b phi(t) K_gamma(t) dt` by adaptive Simpson on the support.
    pub fn integrate<F: Fn(f64) -> f64>(&self, phi: F, a: f64, b: f64, tol: f64) -> f64 {
        let lo = a.max(self.tau - self.gamma);
        let hi = b.min(self.tau);
        if lo >= hi {
            return 0.0;
        }
        adaptive_simpson(&|t| phi(t) * self.eval(t), lo, hi, tol)
    }

    /// `int_0^T K_gamma dt`.
    pub fn mass(&self, t_end: f64) -> f64 {
        self.integrate(|_| 1.0, 0.0, t_end, 1e-13)
    }

    /// Midpoint rule on the solver's time cells, `sum_n K(t_n + dt/2) dt`.
    pub fn discrete_mass(&self, dt: f64, nt: usize) -> f64 {
        (0..nt)
            .map(|n| self.eval((n as f64 + 0.5) * dt))
            .sum::<f64>()
            * dt
    }
}

/// Growth constants `(b1g, b2g)` of the source `K_gamma beta`:
///
/// `b1g = 2 omega(0) (b0 + |beta(.,.,0)|/2) / gamma`,
/// `b2g = omega(0) |beta(.,.,0)| / gamma`.
pub fn growth_constants(
    beta_zero_sup: f64,
    gamma: f64,
    b0: f64,
) -> Result<(f64, f64), KernelError> {
    if !(gamma > 0.0) {
        return Err(KernelError::NonPositiveGamma(gamma));
    }
    let w0 = Mollifier::standard().peak();
    Ok((
        2.0 * w0 * (b0 + 0.5 * beta_zero_sup) / gamma,
        w0 * beta_zero_sup / gamma,
    ))
}

/// [`growth_constants`] with `|beta(.,.,0)|` estimated by sampling the problem's source.
pub fn source_growth_constants(
    spec: &ProblemSpec,
    gamma: f64,
    b0: f64,
) -> Result<(f64, f64), KernelError> {
    growth_constants(beta_at_zero_sup(spec), gamma, b0)
}

/// Sampled estimate of `b0 = sup |d_lambda beta|` with `lambda` in
/// `[-(b1 + 1), b1 + 1]`. This is an estimate, not a proof.
pub fn estimate_b0(spec: &ProblemSpec) -> f64 {
    let lam = spec.b1.unwrap_or(1.0) + 1.0;
    beta_lambda_deriv_sup(spec, lam)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprdsl::parse;
    use crate::problem::Domain;

    #[test]
    fn normalisation_and_peak() {
        let m = Mollifier::standard();
        assert!((m.c_star - 0.443_993_816_168_078_65).abs() < 1e-12);
        assert!((omega(0.0) - 0.828_568_839_869_106_7).abs() < 1e-12);
        assert!((adaptive_simpson(&omega, -1.0, 1.0, 1e-13) - 1.0).abs() < 1e-10);
        // the reciprocal of the normalisation is the often-quoted 2.2522
        assert!((1.0 / m.c_star - 2.2522).abs() < 1e-3);
    }

    #[test]
    fn omega_shape() {
        assert_eq!(omega(1.0), 0.0);
        assert_eq!(omega(-1.5), 0.0);
        assert_eq!(omega(-0.3), omega(0.3));
        assert!(omega(0.999) >= 0.0);
    }

    #[test]
    fn kernel_support() {
        let tau = 0.5;
        for g in [0.2, 0.05] {
            assert_eq!(k_gamma(tau + 0.01, tau, g).unwrap(), 0.0);
            assert_eq!(k_gamma(tau - 2.0 * g, tau, g).unwrap(), 0.0);
            assert!(k_gamma(tau - 0.5 * g, tau, g).unwrap() > 0.0);
        }
        assert_eq!(
            k_gamma(0.0, 0.5, 0.0),
            Err(KernelError::NonPositiveGamma(0.0))
        );
    }

    #[test]
    fn kernel_mass_is_one() {
        for g in [0.25, 0.2, 0.1, 0.05, 0.025] {
            let k = DelayedKernel::new(0.5, g).unwrap();
            assert!((k.mass(1.0) - 1.0).abs() < 1e-8, "gamma {g}");
            let nt = 4000;
            assert!((k.discrete_mass(1.0 / nt as f64, nt) - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn growth_constants_formulas() {
        assert_eq!(growth_constants(0.0, 0.1, 0.0).unwrap(), (0.0, 0.0));
        let w0 = omega(0.0);
        let (b1, b2) = growth_constants(0.3, 0.1, 0.0).unwrap();
        assert!((b1 - w0 * 0.3 / 0.1).abs() < 1e-12);
        assert!((b2 - w0 * 0.3 / 0.1).abs() < 1e-12);
        let (h1, h2) = growth_constants(0.3, 0.05, 0.7).unwrap();
        let (f1, f2) = growth_constants(0.3, 0.1, 0.7).unwrap();
        assert!((h1 - 2.0 * f1).abs() < 1e-12 && (h2 - 2.0 * f2).abs() < 1e-12);
    }

    #[test]
    fn sampled_source_constants() {
        let dom = Domain {
            d: 1,
            length: 1.0,
            t_end: 1.0,
            s_end: 1.0,
        };
        let mut spec = ProblemSpec::new(dom, parse("lambda").unwrap(), vec![parse("0").unwrap()]);
        spec.beta = Some(parse("0.4").unwrap());
        let (b1, b2) = source_growth_constants(&spec, 0.2, estimate_b0(&spec)).unwrap();
        let w0 = omega(0.0);
        assert!((b1 - w0 * 0.4 / 0.2).abs() < 1e-12);
        assert!((b2 - w0 * 0.4 / 0.2).abs() < 1e-12);
        spec.beta = Some(parse("0.5*sin(lambda)").unwrap());
        assert!((estimate_b0(&spec) - 0.5).abs() < 1e-12);
    }
}
