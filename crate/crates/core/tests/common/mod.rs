//! Problem family shared by the integration suites.
#![allow(dead_code)]

use rand::Rng;
use ultrapar::exprdsl::{parse, Expr};
use ultrapar::problem::{Domain, Grid, ProblemSpec};

/// `max(0, (z-a)(b-z))^2` scaled to peak 1 at the midpoint.
pub fn bump(var: &str, a: f64, b: f64) -> String {
    let scale = (2.0 / (b - a)).powi(4);
    format!("{scale}*max(0, ({var}-{a})*({b}-{var}))^2")
}

pub fn e(text: &str) -> Expr {
    parse(text).unwrap_or_else(|err| panic!("{text}: {err:?}"))
}

pub fn domain() -> Domain {
    Domain {
        d: 1,
        length: 4.0,
        t_end: 1.0,
        s_end: 1.0,
    }
}

pub fn grid(n: usize) -> Grid {
    Grid::new(&domain(), n, n).unwrap()
}

pub fn x_bump() -> String {
    bump("x", 0.5, 3.5)
}

/// Burgers in `s`, half-Burgers in `x`, unit bump of initial data, zero
/// boundary data and no source.
pub fn burgers() -> ProblemSpec {
    let mut s = ProblemSpec::new(domain(), e("lambda^2/2"), vec![e("lambda^2/4")]);
    s.u0_1 = e(&format!("{}*{}", x_bump(), bump("s", 0.15, 0.65)));
    s.tau = 0.5;
    s
}

/// [`burgers`] with `beta = c bump(x) bump(s) max(0, 1 - lambda^2)^2`,
/// supported in `|lambda| <= 1`.
pub fn with_source(c: f64, gamma: f64) -> ProblemSpec {
    let mut s = burgers();
    s.beta = Some(e(&format!(
        "{c}*{}*{}*max(0, 1 - lambda^2)^2",
        x_bump(),
        bump("s", 0.1, 0.9)
    )));
    s.b1 = Some(1.0);
    s.gamma = gamma;
    s
}

/// Initial data shifted by `delta bump(x) bump(s)`.
pub fn perturbed(spec: &ProblemSpec, delta: f64) -> ProblemSpec {
    let mut s = spec.clone();
    s.u0_1 = e(&format!(
        "{} + {delta}*{}*{}",
        spec.u0_1,
        x_bump(),
        bump("s", 0.2, 0.8)
    ));
    s
}

/// Outflow at `s = S` with positive data there: the data cannot be
/// attained while the solution near `s = S` stays small.
pub fn unattainable_final_data() -> ProblemSpec {
    let mut s = burgers();
    s.u0_1 = e(&format!("{}*{}", x_bump(), bump("s", 0.2, 0.6)));
    s.us_2 = e(&format!("0.6*{}*{}", x_bump(), bump("t", 0.05, 0.95)));
    s
}

/// Random smooth expression in `lambda` whose derivative is well defined
/// everywhere on `[-1, 1]`.
pub fn random_smooth_expr<R: Rng>(rng: &mut R, depth: u32) -> String {
    if depth == 0 || rng.gen_bool(0.2) {
        return if rng.gen_bool(0.6) {
            "lambda".to_string()
        } else {
            format!("{:.3}", rng.gen_range(-2.0..2.0))
        };
    }
    let a = random_smooth_expr(rng, depth - 1);
    match rng.gen_range(0..9) {
        0 => format!("({a} + {})", random_smooth_expr(rng, depth - 1)),
        1 => format!("({a} - {})", random_smooth_expr(rng, depth - 1)),
        2 => format!("({a} * {})", random_smooth_expr(rng, depth - 1)),
        3 => format!(
            "({a}) / (2 + sin({})^2)",
            random_smooth_expr(rng, depth - 1)
        ),
        4 => format!("sin({a})"),
        5 => format!("cos({a})"),
        6 => format!("exp(tanh({a}))"),
        7 => format!("tanh({a})"),
        _ => format!("({a})^{}", rng.gen_range(2..4)),
    }
}
