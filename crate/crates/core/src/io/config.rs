//! TOML problem configs.
//!
//! ```toml
//! [domain]
//! d = 1
//! L = 4.0
//! T = 1.0
//! S = 1.0
//!
//! [flux]
//! a = "lambda^2/2"
//! phi_1 = "lambda^2/4"
//!
//! [source]
//! beta = "max(0, 1 - lambda^2)^2*max(0, (x-0.5)*(3.5-x))^2*max(0, (s-0.1)*(0.9-s))^2"
//! tau = 0.5
//! gamma = 0.1
//! b1 = 1.0
//!
//! [data]
//! u0_1 = "..."
//! u0_2 = "0"
//! uS_2 = "0"
//!
//! [grid]
//! Nx = 64
//! Ns = 64
//! snapshot_stride = 32
//!
//! [scheme]
//! flux_kind = "eo"
//! epsilon = 0.0
//! cfl_safety = 0.9
//!
//! [output]
//! dir = "out"
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;
use toml::Spanned;

use super::IoError;
use crate::exprdsl::{parse, Expr};
use crate::problem::{Domain, Grid, ProblemError, ProblemSpec};
use crate::scheme::FluxKind;
use crate::solver::SolveOptions;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDocument {
    pub domain: DomainSection,
    pub flux: FluxSection,
    pub source: SourceSection,
    pub data: DataSection,
    pub grid: GridSection,
    pub scheme: SchemeSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSection {
    pub d: usize,
    #[serde(rename = "L")]
    pub length: f64,
    #[serde(rename = "T")]
    pub t_end: f64,
    #[serde(rename = "S")]
    pub s_end: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluxSection {
    pub a: Spanned<String>,
    pub phi_1: Option<Spanned<String>>,
    pub phi_2: Option<Spanned<String>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSection {
    pub beta: Option<Spanned<String>>,
    pub tau: f64,
    #[serde(default)]
    pub gamma: f64,
    pub b1: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    pub u0_1: Spanned<String>,
    pub u0_2: Spanned<String>,
    #[serde(rename = "uS_2")]
    pub us_2: Spanned<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(rename = "Nx")]
    pub nx: usize,
    #[serde(rename = "Ns")]
    pub ns: usize,
    pub snapshot_stride: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeSection {
    pub flux_kind: String,
    #[serde(default)]
    pub epsilon: f64,
    pub cfl_safety: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

/// A validated config.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub document: ConfigDocument,
    pub spec: ProblemSpec,
    /// Spatial grid; the time step is chosen by the solver.
    pub grid: Grid,
    pub options: SolveOptions,
    pub output: OutputSection,
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before
        .rfind('\n')
        .map_or(before.len(), |nl| before.len() - nl - 1)
        + 1;
    (line, column)
}

fn expression(text: &str, name: &str, value: &Spanned<String>) -> Result<Expr, IoError> {
    parse(value.get_ref()).map_err(|e| {
        // skip the opening quote of the TOML string
        let (line, column) = line_column(text, value.span().start + 1 + e.offset);
        IoError::Parse {
            line,
            column,
            message: format!("{name}: expected {}", e.expected),
        }
    })
}

fn validation(e: ProblemError) -> IoError {
    match e {
        ProblemError::Validation(m) => IoError::Validation(m),
        other => IoError::Validation(other.to_string()),
    }
}

/// Parses and validates a config held in memory.
pub fn parse_config(text: &str) -> Result<LoadedConfig, IoError> {
    let doc: ConfigDocument = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map_or((1, 1), |s| line_column(text, s.start));
        IoError::Parse {
            line,
            column,
            message: e.message().trim().to_string(),
        }
    })?;

    let d = doc.domain.d;
    let domain = Domain {
        d,
        length: doc.domain.length,
        t_end: doc.domain.t_end,
        s_end: doc.domain.s_end,
    };
    let flux_a = expression(text, "flux a", &doc.flux.a)?;
    let mut flux_phi = Vec::new();
    for (i, phi) in [&doc.flux.phi_1, &doc.flux.phi_2].into_iter().enumerate() {
        match phi {
            Some(p) if i < d => flux_phi.push(expression(text, &format!("flux phi_{}", i + 1), p)?),
            Some(_) => {
                return Err(IoError::Validation(format!(
                    "flux: phi_{} given but d = {d}",
                    i + 1
                )));
            }
            None if i < d => {
                return Err(IoError::Validation(format!(
                    "flux: phi_{} is required for d = {d}",
                    i + 1
                )));
            }
            None => {}
        }
    }

    let mut spec = ProblemSpec::new(domain, flux_a, flux_phi);
    spec.beta = doc
        .source
        .beta
        .as_ref()
        .map(|b| expression(text, "source beta", b))
        .transpose()?;
    spec.tau = doc.source.tau;
    spec.gamma = doc.source.gamma;
    spec.b1 = doc.source.b1;
    spec.epsilon = doc.scheme.epsilon;
    spec.u0_1 = expression(text, "data u0_1", &doc.data.u0_1)?;
    spec.u0_2 = expression(text, "data u0_2", &doc.data.u0_2)?;
    spec.us_2 = expression(text, "data uS_2", &doc.data.us_2)?;
    spec.validate().map_err(validation)?;

    let grid = Grid::new(&domain, doc.grid.nx, doc.grid.ns).map_err(validation)?;
    let flux = FluxKind::from_name(&doc.scheme.flux_kind).ok_or_else(|| {
        IoError::Validation(format!(
            "scheme: unknown flux_kind {:?}",
            doc.scheme.flux_kind
        ))
    })?;
    let mut options = SolveOptions {
        flux,
        ..SolveOptions::default()
    };
    if let Some(c) = doc.scheme.cfl_safety {
        if !(c > 0.0 && c <= 1.0) {
            return Err(IoError::Validation(format!(
                "scheme: cfl_safety = {c} must lie in (0, 1]"
            )));
        }
        options.cfl_safety = c;
    }
    if let Some(k) = doc.grid.snapshot_stride {
        if k == 0 {
            return Err(IoError::Validation(
                "grid: snapshot_stride must be positive".into(),
            ));
        }
        options.snapshot_stride = k;
    }
    let output = doc.output.clone();
    Ok(LoadedConfig {
        document: doc,
        spec,
        grid,
        options,
        output,
    })
}

pub fn load_config(path: &Path) -> Result<LoadedConfig, IoError> {
    parse_config(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
[domain]
d = 1
L = 4.0
T = 1.0
S = 1.0

[flux]
a = "lambda^2/2"
phi_1 = "lambda^2/4"

[source]
beta = "0.5*max(0, 1 - lambda^2)^2*max(0, (x-0.5)*(3.5-x))^2*max(0, (s-0.1)*(0.9-s))^2"
tau = 0.5
gamma = 0.1
b1 = 1.0

[data]
u0_1 = "max(0, (x-1)*(3-x))^2*max(0, (s-0.2)*(0.8-s))^2*100"
u0_2 = "0"
uS_2 = "0"

[grid]
Nx = 16
Ns = 16

[scheme]
flux_kind = "eo"
"#;

    #[test]
    fn loads_the_base_config() {
        let c = parse_config(BASE).unwrap();
        assert_eq!(c.spec.domain.length, 4.0);
        assert_eq!(c.spec.flux_phi.len(), 1);
        assert_eq!(c.spec.b1, Some(1.0));
        assert_eq!(c.grid.nx, 16);
        assert_eq!(c.options.flux, FluxKind::EngquistOsher);
        assert_eq!(
            c.options.snapshot_stride,
            SolveOptions::default().snapshot_stride
        );
        assert!(c.output.dir.is_none());
    }

    #[test]
    fn order_within_sections_does_not_matter() {
        let swapped = BASE.replace("Nx = 16\nNs = 16", "Ns = 16\nNx = 16");
        let a = parse_config(BASE).unwrap();
        let b = parse_config(&swapped).unwrap();
        assert_eq!(a.spec, b.spec);
        assert_eq!(a.grid, b.grid);
    }

    #[test]
    fn a_of_zero_must_vanish() {
        let bad = BASE.replace(r#"a = "lambda^2/2""#, r#"a = "lambda^2/2 + 0.3""#);
        match parse_config(&bad) {
            Err(IoError::Validation(m)) => assert!(m.contains("a(0) = 0.3"), "{m}"),
            other => panic!("{other:?}"),
        }
        let ok = BASE.replace(r#"a = "lambda^2/2""#, r#"a = "lambda""#);
        assert!(parse_config(&ok).is_ok());
    }

    #[test]
    fn gamma_above_half_gamma0() {
        let bad = BASE.replace("gamma = 0.1", "gamma = 0.3");
        match parse_config(&bad) {
            Err(IoError::Validation(m)) => assert!(m.contains("gamma_0"), "{m}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_section_and_unknown_keys() {
        let start = BASE.find("[data]").unwrap();
        let end = BASE.find("[grid]").unwrap();
        let no_data = format!("{}{}", &BASE[..start], &BASE[end..]);
        assert!(matches!(parse_config(&no_data), Err(IoError::Parse { .. })));
        let extra = BASE.replace("Ns = 16", "Ns = 16\nNz = 3");
        match parse_config(&extra) {
            Err(IoError::Parse { line, message, .. }) => {
                assert!(message.contains("Nz"), "{message}");
                assert_eq!(line, BASE.lines().position(|l| l == "Ns = 16").unwrap() + 2);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn type_errors_and_bad_expressions() {
        let bad = BASE.replace("Nx = 16", "Nx = \"sixteen\"");
        assert!(matches!(parse_config(&bad), Err(IoError::Parse { .. })));
        let bad = BASE.replace(r#"uS_2 = "0""#, r#"uS_2 = "1 + * x""#);
        match parse_config(&bad) {
            Err(IoError::Parse { line, column, .. }) => {
                assert_eq!(
                    line,
                    BASE.lines().position(|l| l == r#"uS_2 = "0""#).unwrap() + 1
                );
                assert_eq!(column, 13);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn phi_components_match_dimension() {
        let bad = BASE.replace("phi_1 = \"lambda^2/4\"\n", "");
        assert!(matches!(parse_config(&bad), Err(IoError::Validation(_))));
        let bad = BASE.replace(
            "phi_1 = \"lambda^2/4\"",
            "phi_1 = \"lambda^2/4\"\nphi_2 = \"lambda\"",
        );
        assert!(matches!(parse_config(&bad), Err(IoError::Validation(_))));
    }
}
