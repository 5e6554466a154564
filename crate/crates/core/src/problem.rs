//! Optimal control problems in Lagrange form and their Pontryagin
//! Hamiltonian.
//!
//! Minimize `∫_a^b L(t, x, u) dt` subject to `dx/dt = φ(t, x, u)` and
//! `u(t) ∈ Ω`. The admissible set `Ω` is a box; each side may be open or
//! closed and finite or infinite.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::expr::{self, Dims, Expr, ExprError, Symbol, SymbolKind};

/// One side-pair of the control box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bound {
    pub lower: f64,
    pub upper: f64,
    pub lower_open: bool,
    pub upper_open: bool,
}

impl Bound {
    pub fn open(lower: f64, upper: f64) -> Self {
        Bound { lower, upper, lower_open: true, upper_open: true }
    }

    pub fn closed(lower: f64, upper: f64) -> Self {
        Bound { lower, upper, lower_open: false, upper_open: false }
    }

    pub fn unbounded() -> Self {
        Bound::open(f64::NEG_INFINITY, f64::INFINITY)
    }

    pub fn contains(&self, v: f64) -> bool {
        let above = if self.lower_open { v > self.lower } else { v >= self.lower };
        let below = if self.upper_open { v < self.upper } else { v <= self.upper };
        above && below
    }

    /// Membership in the closure `[lower, upper]`.
    pub fn closure_contains(&self, v: f64) -> bool {
        v >= self.lower && v <= self.upper
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OcpProblem {
    pub name: String,
    pub n: usize,
    pub r: usize,
    pub a: f64,
    pub b: f64,
    pub lagrangian: Expr,
    pub dynamics: Vec<Expr>,
    pub omega: Vec<Bound>,
}

/// A structural problem with a document or a constructed problem.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub field: String,
    pub message: String,
}

impl Diagnostic {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Diagnostic { field: field.into(), message: message.into() }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

/// `H = ψ₀ L + Σ ψᵢ φᵢ`, an expression over `(t, x, u, psi0, psi)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hamiltonian {
    pub expr: Expr,
}

impl OcpProblem {
    pub fn dims(&self) -> Dims {
        Dims::plain(self.n, self.r)
    }

    /// Total time derivative along the control equation, in a context that
    /// may carry jet variables.
    pub fn total_derivative(&self, e: &Expr, dims: Dims) -> Result<Expr, ExprError> {
        expr::total_derivative(e, dims, &self.dynamics)
    }

    pub fn hamiltonian(&self) -> Hamiltonian {
        build_hamiltonian(self)
    }

    pub fn validate(&self) -> Vec<Diagnostic> {
        validate_problem(self)
    }
}

pub fn build_hamiltonian(problem: &OcpProblem) -> Hamiltonian {
    let cost = Expr::mul(Expr::var(Symbol::Costate0), problem.lagrangian.clone());
    let dynamics = problem
        .dynamics
        .iter()
        .enumerate()
        .map(|(i, phi)| Expr::mul(Expr::var(Symbol::Costate(i + 1)), phi.clone()));
    Hamiltonian { expr: Expr::sum(std::iter::once(cost).chain(dynamics)) }
}

fn check_symbols(field: &str, e: &Expr, dims: Dims, out: &mut Vec<Diagnostic>) {
    for s in e.symbols() {
        match s.kind() {
            SymbolKind::Time | SymbolKind::State | SymbolKind::Control => {
                if !dims.contains(s) {
                    out.push(Diagnostic::new(field, format!("index of `{s}` is out of range")));
                }
            }
            _ => out.push(Diagnostic::new(field, format!("symbol `{s}` is not allowed here"))),
        }
    }
}

/// Structural checks; an empty list means the problem is well formed.
pub fn validate_problem(problem: &OcpProblem) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let dims = problem.dims();
    if problem.n == 0 {
        out.push(Diagnostic::new("n", "state dimension must be at least 1"));
    }
    if problem.r == 0 {
        out.push(Diagnostic::new("r", "control dimension must be at least 1"));
    }
    if !(problem.a.is_finite() && problem.b.is_finite()) {
        out.push(Diagnostic::new("a, b", "interval endpoints must be finite"));
    } else if problem.a >= problem.b {
        out.push(Diagnostic::new("a, b", format!("degenerate interval: a = {} is not below b = {}", problem.a, problem.b)));
    }
    check_symbols("L", &problem.lagrangian, dims, &mut out);
    if problem.dynamics.len() != problem.n {
        out.push(Diagnostic::new("phi", format!("expected {} entries, found {}", problem.n, problem.dynamics.len())));
    }
    for (i, phi) in problem.dynamics.iter().enumerate() {
        check_symbols(&format!("phi[{}]", i + 1), phi, dims, &mut out);
    }
    if problem.omega.len() != problem.r {
        out.push(Diagnostic::new("omega", format!("expected {} bounds, found {}", problem.r, problem.omega.len())));
    }
    for (j, bound) in problem.omega.iter().enumerate() {
        if bound.lower.is_nan() || bound.upper.is_nan() || bound.lower >= bound.upper {
            out.push(Diagnostic::new(
                format!("omega[{}]", j + 1),
                format!("lower bound {} must be below upper bound {}", bound.lower, bound.upper),
            ));
        }
        if (bound.lower.is_infinite() && !bound.lower_open) || (bound.upper.is_infinite() && !bound.upper_open) {
            out.push(Diagnostic::new(format!("omega[{}]", j + 1), "an infinite side must be open"));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{equivalent, is_zero, parse, IdentityConfig};

    pub(crate) fn time_optimal() -> OcpProblem {
        OcpProblem {
            name: "time-optimal".into(),
            n: 1,
            r: 1,
            a: 0.0,
            b: 1.0,
            lagrangian: Expr::one(),
            dynamics: vec![Expr::var(Symbol::Control(1))],
            omega: vec![Bound::open(-1.0, 1.0)],
        }
    }

    fn p(text: &str) -> Expr {
        parse(text, Dims::plain(2, 2)).unwrap()
    }

    #[test]
    fn hamiltonian_of_time_optimal_problem() {
        let h = time_optimal().hamiltonian();
        assert!(equivalent(&h.expr, &p("psi0 + psi1*u1"), &IdentityConfig::default()).unwrap());
    }

    #[test]
    fn hamiltonian_of_linear_cost_problem() {
        let problem = OcpProblem { lagrangian: p("u1"), ..time_optimal() };
        let h = problem.hamiltonian();
        assert!(equivalent(&h.expr, &p("psi0*u1 + psi1*u1"), &IdentityConfig::default()).unwrap());
    }

    #[test]
    fn hamiltonian_of_zero_problem() {
        let problem = OcpProblem { lagrangian: Expr::zero(), dynamics: vec![Expr::zero()], ..time_optimal() };
        assert_eq!(problem.hamiltonian().expr, Expr::zero());
    }

    #[test]
    fn costate_partials_recover_dynamics() {
        let problem = OcpProblem {
            n: 2,
            r: 2,
            lagrangian: p("x1^2 + u2*t"),
            dynamics: vec![p("x2*u1"), p("sin(x1) - u2")],
            omega: vec![Bound::unbounded(); 2],
            ..time_optimal()
        };
        let h = problem.hamiltonian();
        assert!(!h.expr.any_symbol(&|s| matches!(s.kind(), SymbolKind::Jet | SymbolKind::ControlDot)));
        for (i, phi) in problem.dynamics.iter().enumerate() {
            let d = expr::partial(&h.expr, Symbol::Costate(i + 1));
            let diff = Expr::sub(d, phi.clone());
            assert!(is_zero(&diff, &IdentityConfig::new(100, 1e-10, 5)).unwrap().is_zero());
        }
    }

    #[test]
    fn well_formed_problem_has_no_diagnostics() {
        assert!(time_optimal().validate().is_empty());
    }

    #[test]
    fn out_of_range_state_is_reported() {
        let problem = OcpProblem { dynamics: vec![Expr::var(Symbol::State(2))], ..time_optimal() };
        let d = problem.validate();
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].field, "phi[1]");
        assert!(d[0].message.contains("out of range"));
    }

    #[test]
    fn degenerate_interval_is_reported() {
        let problem = OcpProblem { b: 0.0, ..time_optimal() };
        let d = problem.validate();
        assert_eq!(d.len(), 1);
        assert!(d[0].message.contains("degenerate interval"));
    }

    #[test]
    fn bad_bounds_and_symbols_are_reported() {
        let problem = OcpProblem {
            lagrangian: Expr::var(Symbol::Costate(1)),
            omega: vec![Bound::closed(1.0, -1.0)],
            ..time_optimal()
        };
        let d = problem.validate();
        assert_eq!(d.len(), 2, "{d:?}");
        let closed_inf = OcpProblem { omega: vec![Bound::closed(0.0, f64::INFINITY)], ..time_optimal() };
        assert_eq!(closed_inf.validate().len(), 1);
    }

    #[test]
    fn bound_membership() {
        let b = Bound::open(-1.0, 1.0);
        assert!(b.contains(0.0) && !b.contains(1.0) && b.closure_contains(1.0));
        assert!(Bound::closed(-1.0, 1.0).contains(-1.0));
    }
}
