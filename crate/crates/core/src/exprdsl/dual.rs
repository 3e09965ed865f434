use std::ops::{Add, Div, Mul, Neg, Sub};

use super::EvalError;

/// A value carrying its derivative with respect to one seeded variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual {
    pub value: f64,
    pub deriv: f64,
}

impl Dual {
    pub fn new(value: f64, deriv: f64) -> Self {
        Self { value, deriv }
    }

    pub fn constant(value: f64) -> Self {
        Self { value, deriv: 0.0 }
    }

    pub fn variable(value: f64) -> Self {
        Self { value, deriv: 1.0 }
    }

    /// `self ^ exp` given the already computed primal `value`.
    pub(crate) fn pow(self, exp: Dual, value: f64) -> Result<Dual, EvalError> {
        let base_term = if self.deriv == 0.0 || exp.value == 0.0 {
            0.0
        } else if exp.deriv == 0.0 && exp.value.fract() == 0.0 {
            exp.value * self.value.powi(exp.value as i32 - 1) * self.deriv
        } else {
            if self.value == 0.0 && exp.value < 1.0 {
                return Err(EvalError::DomainError("derivative of power at 0"));
            }
            exp.value * self.value.powf(exp.value - 1.0) * self.deriv
        };
        let exp_term = if exp.deriv == 0.0 {
            0.0
        } else {
            if self.value <= 0.0 {
                return Err(EvalError::DomainError(
                    "variable exponent with non-positive base",
                ));
            }
            value * self.value.ln() * exp.deriv
        };
        Ok(Dual::new(value, base_term + exp_term))
    }
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, rhs: Dual) -> Dual {
        Dual::new(self.value + rhs.value, self.deriv + rhs.deriv)
    }
}

impl Sub for Dual {
    type Output = Dual;
    fn sub(self, rhs: Dual) -> Dual {
        Dual::new(self.value - rhs.value, self.deriv - rhs.deriv)
    }
}

impl Mul for Dual {
    type Output = Dual;
    fn mul(self, rhs: Dual) -> Dual {
        Dual::new(
            self.value * rhs.value,
            self.deriv * rhs.value + self.value * rhs.deriv,
        )
    }
}

impl Div for Dual {
    type Output = Dual;
    fn div(self, rhs: Dual) -> Dual {
        let q = self.value / rhs.value;
        Dual::new(q, (self.deriv - q * rhs.deriv) / rhs.value)
    }
}

impl Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        Dual::new(-self.value, -self.deriv)
    }
}
