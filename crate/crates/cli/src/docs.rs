//! TOML documents: problem, symmetry and trajectories.
//!
//! Expression fields are strings in the expression grammar. Infinite bounds
//! are written `inf` / `-inf`; open flags default to `true`.

use std::fmt;

use gauge_noether::expr::{parse_in, Dims, Expr, ParseError, Scope};
use gauge_noether::extremal::ControlLaw;
use gauge_noether::problem::{Bound, Diagnostic, OcpProblem};
use gauge_noether::symmetry::{GaugeSymmetry, SymmetryParts};
use serde::Deserialize;

/// Everything wrong with one input document.
#[derive(Debug, Clone, PartialEq)]
pub struct DocError {
    pub document: String,
    pub problems: Vec<Diagnostic>,
}

impl DocError {
    fn one(document: &str, field: impl Into<String>, message: impl Into<String>) -> Self {
        DocError { document: document.to_string(), problems: vec![Diagnostic::new(field, message)] }
    }
}

impl fmt::Display for DocError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, d) in self.problems.iter().enumerate() {
            if k > 0 {
                writeln!(f)?;
            }
            write!(f, "{}: {}", self.document, d)?;
        }
        Ok(())
    }
}

impl std::error::Error for DocError {}

fn toml_error(document: &str, e: toml::de::Error) -> DocError {
    let message = e.message().to_string();
    let field = e.span().map_or_else(|| "document".to_string(), |s| format!("bytes {}..{}", s.start, s.end));
    DocError::one(document, field, message)
}

fn expr_field(document: &str, field: &str, text: &str, dims: Dims, scope: Scope) -> Result<Expr, DocError> {
    parse_in(text, dims, scope).map_err(|e: ParseError| DocError::one(document, field, e.to_string()))
}

fn default_open() -> bool {
    true
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BoundDoc {
    lower: f64,
    upper: f64,
    #[serde(default = "default_open")]
    lower_open: bool,
    #[serde(default = "default_open")]
    upper_open: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemDoc {
    name: String,
    n: usize,
    r: usize,
    a: f64,
    b: f64,
    #[serde(rename = "L")]
    lagrangian: String,
    phi: Vec<String>,
    omega: Vec<BoundDoc>,
}

pub fn load_problem(document: &str, text: &str) -> Result<OcpProblem, DocError> {
    let doc: ProblemDoc = toml::from_str(text).map_err(|e| toml_error(document, e))?;
    let dims = Dims::plain(doc.n, doc.r);
    let lagrangian = expr_field(document, "L", &doc.lagrangian, dims, Scope::PROBLEM)?;
    let dynamics = doc
        .phi
        .iter()
        .enumerate()
        .map(|(i, s)| expr_field(document, &format!("phi[{}]", i + 1), s, dims, Scope::PROBLEM))
        .collect::<Result<Vec<_>, _>>()?;
    let omega = doc
        .omega
        .iter()
        .map(|b| Bound { lower: b.lower, upper: b.upper, lower_open: b.lower_open, upper_open: b.upper_open })
        .collect();
    let problem = OcpProblem { name: doc.name, n: doc.n, r: doc.r, a: doc.a, b: doc.b, lagrangian, dynamics, omega };
    let problems = problem.validate();
    if problems.is_empty() {
        Ok(problem)
    } else {
        Err(DocError { document: document.to_string(), problems })
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SymmetryDoc {
    k: usize,
    m: usize,
    #[serde(rename = "T")]
    time: String,
    #[serde(rename = "X")]
    state: Vec<String>,
    #[serde(rename = "U")]
    control: Vec<String>,
    #[serde(rename = "F", default)]
    gauge: Option<String>,
    /// `lambda[j-1][i]`; omitted means all zero.
    #[serde(default)]
    lambda: Vec<Vec<f64>>,
}

pub fn load_symmetry(document: &str, text: &str, problem: &OcpProblem) -> Result<GaugeSymmetry, DocError> {
    let doc: SymmetryDoc = toml::from_str(text).map_err(|e| toml_error(document, e))?;
    let dims = Dims::new(problem.n, problem.r, doc.k, doc.m);
    let e = |field: &str, s: &str| expr_field(document, field, s, dims, Scope::SYMMETRY);
    let list = |name: &str, items: &[String]| {
        items.iter().enumerate().map(|(i, s)| e(&format!("{name}[{}]", i + 1), s)).collect::<Result<Vec<_>, _>>()
    };
    let parts = SymmetryParts {
        k: doc.k,
        m: doc.m,
        time: e("T", &doc.time)?,
        state: list("X", &doc.state)?,
        control: list("U", &doc.control)?,
        gauge: e("F", doc.gauge.as_deref().unwrap_or("0"))?,
        lambda: doc.lambda,
    };
    GaugeSymmetry::new(problem, parts).map_err(|err| DocError::one(document, "symmetry", err.to_string()))
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
enum LawDoc {
    Piecewise {
        #[serde(default)]
        breakpoints: Vec<f64>,
        values: Vec<Vec<f64>>,
    },
    Feedback {
        u: Vec<String>,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TrajectoryDoc {
    name: String,
    x0: Vec<f64>,
    psi0: f64,
    psi: Vec<f64>,
    law: LawDoc,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TrajectorySpecDoc {
    trajectory: Vec<TrajectoryDoc>,
}

/// One requested integration run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySpec {
    pub name: String,
    pub x0: Vec<f64>,
    pub psi0: f64,
    pub psi: Vec<f64>,
    pub law: ControlLaw,
}

pub fn load_trajectories(document: &str, text: &str, problem: &OcpProblem) -> Result<Vec<TrajectorySpec>, DocError> {
    let doc: TrajectorySpecDoc = toml::from_str(text).map_err(|e| toml_error(document, e))?;
    let dims = Dims::plain(problem.n, problem.r);
    let mut problems = Vec::new();
    let mut out = Vec::new();
    for (t, tr) in doc.trajectory.into_iter().enumerate() {
        let field = |f: &str| format!("trajectory[{}].{f}", t + 1);
        let law = match tr.law {
            LawDoc::Piecewise { breakpoints, values } => ControlLaw::PiecewiseConstant { breakpoints, values },
            LawDoc::Feedback { u } => {
                let u = u
                    .iter()
                    .enumerate()
                    .map(|(j, s)| expr_field(document, &field(&format!("law.u[{}]", j + 1)), s, dims, Scope::CONTROL_LAW))
                    .collect::<Result<Vec<_>, _>>()?;
                ControlLaw::Feedback { u }
            }
        };
        if let Err(e) = law.validate(problem) {
            problems.push(Diagnostic::new(field("law"), e.to_string()));
        }
        if tr.x0.len() != problem.n || tr.psi.len() != problem.n {
            problems.push(Diagnostic::new(field("x0, psi"), format!("expected {} entries each", problem.n)));
        }
        if tr.psi0.is_nan() || tr.psi0 > 0.0 {
            problems.push(Diagnostic::new(field("psi0"), format!("psi0 = {} must be <= 0", tr.psi0)));
        } else if tr.psi0 == 0.0 && tr.psi.iter().all(|v| *v == 0.0) {
            problems.push(Diagnostic::new(field("psi0, psi"), "psi0 and psi must not vanish together"));
        }
        if out.iter().any(|s: &TrajectorySpec| s.name == tr.name) {
            problems.push(Diagnostic::new(field("name"), format!("duplicate name `{}`", tr.name)));
        }
        out.push(TrajectorySpec { name: tr.name, x0: tr.x0, psi0: tr.psi0, psi: tr.psi, law });
    }
    if problems.is_empty() {
        Ok(out)
    } else {
        Err(DocError { document: document.to_string(), problems })
    }
}
