//! Arithmetic expressions for fluxes, sources and boundary data.
//!
//! Expressions are parsed once from config strings and then evaluated
//! many times inside the solver loops. Variables are a closed set
//! (`lambda`, `x`, `y`, `s`, `t`), so bindings are a fixed-slot struct
//! rather than a map.
//!
//! Forward-mode derivatives with respect to a single seeded variable are
//! available through [`Expr::eval_dual`].

mod dual;
mod parser;

use std::fmt;

pub use dual::Dual;
pub use parser::{parse, SyntaxError};

use thiserror::Error;

/// Free variables recognised by the grammar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    Lambda,
    X,
    /// Second spatial coordinate, only meaningful when `d = 2`.
    Y,
    S,
    T,
}

impl Var {
    pub const ALL: [Var; 5] = [Var::Lambda, Var::X, Var::Y, Var::S, Var::T];

    pub fn name(self) -> &'static str {
        match self {
            Var::Lambda => "lambda",
            Var::X => "x",
            Var::Y => "y",
            Var::S => "s",
            Var::T => "t",
        }
    }

    pub fn from_name(name: &str) -> Option<Var> {
        Var::ALL.into_iter().find(|v| v.name() == name)
    }

    fn slot(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryFn {
    Sin,
    Cos,
    Exp,
    Tanh,
    Sqrt,
    Abs,
}

impl UnaryFn {
    fn name(self) -> &'static str {
        match self {
            UnaryFn::Sin => "sin",
            UnaryFn::Cos => "cos",
            UnaryFn::Exp => "exp",
            UnaryFn::Tanh => "tanh",
            UnaryFn::Sqrt => "sqrt",
            UnaryFn::Abs => "abs",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryFn {
    Min,
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

/// Expression AST.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(UnaryFn, Box<Expr>),
    Call2(BinaryFn, Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    UnboundVariable(&'static str),
    #[error("domain error: {0}")]
    DomainError(&'static str),
}

/// Values for the free variables of an expression.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Bindings {
    slots: [Option<f64>; 5],
}

impl Bindings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, var: Var, value: f64) -> Self {
        self.slots[var.slot()] = Some(value);
        self
    }

    pub fn lambda(self, v: f64) -> Self {
        self.with(Var::Lambda, v)
    }

    pub fn x(self, v: f64) -> Self {
        self.with(Var::X, v)
    }

    pub fn y(self, v: f64) -> Self {
        self.with(Var::Y, v)
    }

    pub fn s(self, v: f64) -> Self {
        self.with(Var::S, v)
    }

    pub fn t(self, v: f64) -> Self {
        self.with(Var::T, v)
    }

    pub fn set(&mut self, var: Var, value: f64) {
        self.slots[var.slot()] = Some(value);
    }

    pub fn get(&self, var: Var) -> Option<f64> {
        self.slots[var.slot()]
    }

    /// Builds bindings from `(name, value)` pairs; unknown names are ignored.
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, f64)>) -> Self {
        let mut b = Self::new();
        for (name, value) in pairs {
            if let Some(v) = Var::from_name(name) {
                b.set(v, value);
            }
        }
        b
    }
}

impl Expr {
    pub fn num(v: f64) -> Self {
        Expr::Num(v)
    }

    pub fn var(v: Var) -> Self {
        Expr::Var(v)
    }

    /// True if `var` occurs anywhere in the expression.
    pub fn uses(&self, var: Var) -> bool {
        match self {
            Expr::Num(_) => false,
            Expr::Var(v) => *v == var,
            Expr::Neg(e) | Expr::Call(_, e) => e.uses(var),
            Expr::Bin(_, a, b) | Expr::Call2(_, a, b) => a.uses(var) || b.uses(var),
        }
    }

    /// Variables referenced by the expression, in declaration order.
    pub fn free_vars(&self) -> Vec<Var> {
        Var::ALL.into_iter().filter(|v| self.uses(*v)).collect()
    }

    pub fn eval(&self, bindings: &Bindings) -> Result<f64, EvalError> {
        match self {
            Expr::Num(v) => Ok(*v),
            Expr::Var(v) => bindings.get(*v).ok_or(EvalError::UnboundVariable(v.name())),
            Expr::Neg(e) => Ok(-e.eval(bindings)?),
            Expr::Bin(op, a, b) => {
                let a = a.eval(bindings)?;
                let b = b.eval(bindings)?;
                match op {
                    BinOp::Add => Ok(a + b),
                    BinOp::Sub => Ok(a - b),
                    BinOp::Mul => Ok(a * b),
                    BinOp::Div => {
                        if b == 0.0 {
                            Err(EvalError::DomainError("division by zero"))
                        } else {
                            Ok(a / b)
                        }
                    }
                    BinOp::Pow => pow(a, b),
                }
            }
            Expr::Call(f, e) => {
                let v = e.eval(bindings)?;
                apply_unary(*f, v)
            }
            Expr::Call2(f, a, b) => {
                let a = a.eval(bindings)?;
                let b = b.eval(bindings)?;
                Ok(match f {
                    BinaryFn::Min => a.min(b),
                    BinaryFn::Max => a.max(b),
                })
            }
        }
    }

    /// Value and derivative with respect to `seed`.
    ///
    /// At the kinks of `abs`, `min` and `max` the derivative is the one-sided
    /// limit as the argument increases, so `abs'(0) = +1`.
    pub fn eval_dual(&self, bindings: &Bindings, seed: Var) -> Result<Dual, EvalError> {
        match self {
            Expr::Num(v) => Ok(Dual::constant(*v)),
            Expr::Var(v) => {
                let value = bindings
                    .get(*v)
                    .ok_or(EvalError::UnboundVariable(v.name()))?;
                Ok(if *v == seed {
                    Dual::variable(value)
                } else {
                    Dual::constant(value)
                })
            }
            Expr::Neg(e) => Ok(-e.eval_dual(bindings, seed)?),
            Expr::Bin(op, a, b) => {
                let a = a.eval_dual(bindings, seed)?;
                let b = b.eval_dual(bindings, seed)?;
                match op {
                    BinOp::Add => Ok(a + b),
                    BinOp::Sub => Ok(a - b),
                    BinOp::Mul => Ok(a * b),
                    BinOp::Div => {
                        if b.value == 0.0 {
                            Err(EvalError::DomainError("division by zero"))
                        } else {
                            Ok(a / b)
                        }
                    }
                    BinOp::Pow => {
                        let value = pow(a.value, b.value)?;
                        a.pow(b, value)
                    }
                }
            }
            Expr::Call(f, e) => {
                let u = e.eval_dual(bindings, seed)?;
                let value = apply_unary(*f, u.value)?;
                let slope = match f {
                    UnaryFn::Sin => u.value.cos(),
                    UnaryFn::Cos => -u.value.sin(),
                    UnaryFn::Exp => value,
                    UnaryFn::Tanh => 1.0 - value * value,
                    UnaryFn::Sqrt => {
                        if value == 0.0 {
                            return Err(EvalError::DomainError("derivative of sqrt at 0"));
                        }
                        0.5 / value
                    }
                    UnaryFn::Abs => {
                        if u.value >= 0.0 {
                            1.0
                        } else {
                            -1.0
                        }
                    }
                };
                Ok(Dual::new(value, slope * u.deriv))
            }
            Expr::Call2(f, a, b) => {
                let a = a.eval_dual(bindings, seed)?;
                let b = b.eval_dual(bindings, seed)?;
                Ok(match f {
                    BinaryFn::Min if a.value < b.value => a,
                    BinaryFn::Min if a.value > b.value => b,
                    BinaryFn::Min => Dual::new(a.value, a.deriv.min(b.deriv)),
                    BinaryFn::Max if a.value > b.value => a,
                    BinaryFn::Max if a.value < b.value => b,
                    BinaryFn::Max => Dual::new(a.value, a.deriv.max(b.deriv)),
                })
            }
        }
    }

    /// Evaluates a function of `lambda` alone. Domain errors come back as NaN;
    /// callers in hot loops detect them through the NaN guard of the stepper.
    #[inline]
    pub fn eval_lambda(&self, lambda: f64) -> f64 {
        self.eval(&Bindings::new().lambda(lambda))
            .unwrap_or(f64::NAN)
    }

    /// Derivative in `lambda` of a function of `lambda` alone (NaN on error).
    #[inline]
    pub fn deriv_lambda(&self, lambda: f64) -> f64 {
        self.eval_dual(&Bindings::new().lambda(lambda), Var::Lambda)
            .map(|d| d.deriv)
            .unwrap_or(f64::NAN)
    }
}

fn pow(a: f64, b: f64) -> Result<f64, EvalError> {
    if a < 0.0 && b.fract() != 0.0 {
        return Err(EvalError::DomainError(
            "negative base with non-integer exponent",
        ));
    }
    if a == 0.0 && b < 0.0 {
        return Err(EvalError::DomainError("division by zero"));
    }
    if b.fract() == 0.0 && b.abs() <= i32::MAX as f64 {
        Ok(a.powi(b as i32))
    } else {
        Ok(a.powf(b))
    }
}

fn apply_unary(f: UnaryFn, v: f64) -> Result<f64, EvalError> {
    Ok(match f {
        UnaryFn::Sin => v.sin(),
        UnaryFn::Cos => v.cos(),
        UnaryFn::Exp => v.exp(),
        UnaryFn::Tanh => v.tanh(),
        UnaryFn::Sqrt => {
            if v < 0.0 {
                return Err(EvalError::DomainError("sqrt of negative"));
            }
            v.sqrt()
        }
        UnaryFn::Abs => v.abs(),
    })
}

/// Prints a fully parenthesised form that parses back to an equivalent tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => {
                if *v < 0.0 || (*v == 0.0 && v.is_sign_negative()) {
                    write!(f, "(-{:?})", -v)
                } else {
                    write!(f, "{v:?}")
                }
            }
            Expr::Var(v) => f.write_str(v.name()),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Bin(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Expr::Call(func, e) => write!(f, "{}({e})", func.name()),
            Expr::Call2(func, a, b) => {
                let name = match func {
                    BinaryFn::Min => "min",
                    BinaryFn::Max => "max",
                };
                write!(f, "{name}({a}, {b})")
            }
        }
    }
}

impl std::str::FromStr for Expr {
    type Err = SyntaxError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}
