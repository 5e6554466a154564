//! Noether currents of a gauge symmetry.
//!
//! For every jet variable `p_j^(i)` the current is
//!
//! ```text
//! C_ij = ψ₀ (δF + λ_j^i L) + ψ · δX − H δT
//! ```
//!
//! where `δ·` is the partial derivative with respect to `p_j^(i)` at zero
//! jets. A symmetry with `k` functions and order `m` yields `k (m + 1)`
//! currents, some of which may vanish identically.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::expr::{is_zero, Expr, ExprError, IdentityConfig, Symbol};
use crate::problem::OcpProblem;
use crate::symmetry::GaugeSymmetry;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoetherCurrent {
    /// Jet order label, `0..=m`.
    pub i: usize,
    /// Function label, `1..=k`.
    pub j: usize,
    /// Expression over `(t, x, u, psi0, psi)`.
    pub expr: Expr,
    pub trivial: bool,
}

impl NoetherCurrent {
    /// Wraps an arbitrary expression, classifying triviality with `cfg`.
    pub fn new(i: usize, j: usize, expr: Expr, cfg: &IdentityConfig) -> Result<Self, ExprError> {
        let trivial = is_zero(&expr, cfg)?.is_zero();
        Ok(NoetherCurrent { i, j, expr, trivial })
    }
}

/// Currents ordered by `i`, then `j`, classified with the default identity
/// configuration.
pub fn generate_currents(sym: &GaugeSymmetry, problem: &OcpProblem) -> Result<Vec<NoetherCurrent>, ExprError> {
    generate_currents_with(sym, problem, &IdentityConfig::default())
}

pub fn generate_currents_with(
    sym: &GaugeSymmetry,
    problem: &OcpProblem,
    cfg: &IdentityConfig,
) -> Result<Vec<NoetherCurrent>, ExprError> {
    let hamiltonian = problem.hamiltonian().expr;
    let mut out = Vec::with_capacity(sym.k() * (sym.m() + 1));
    for i in 0..=sym.m() {
        for j in 1..=sym.k() {
            let c = sym.jet_coefficients(i, j);
            let cost = Expr::mul(
                Expr::var(Symbol::Costate0),
                Expr::sum([c.gauge, Expr::mul(Expr::constant(sym.lambda(i, j)), problem.lagrangian.clone())]),
            );
            let transport = c
                .state
                .into_iter()
                .enumerate()
                .map(|(l, dx)| Expr::mul(Expr::var(Symbol::Costate(l + 1)), dx));
            let time = Expr::neg(Expr::mul(hamiltonian.clone(), c.time));
            let expr = Expr::sum(std::iter::once(cost).chain(transport).chain(std::iter::once(time)));
            out.push(NoetherCurrent::new(i, j, expr, cfg)?);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurrentEntry {
    pub i: usize,
    pub j: usize,
    pub expression: String,
    pub trivial: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurrentsReport {
    pub entries: Vec<CurrentEntry>,
}

impl CurrentsReport {
    pub fn nontrivial(&self) -> usize {
        self.entries.iter().filter(|e| !e.trivial).count()
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for e in &self.entries {
            let flag = if e.trivial { "  (trivial)" } else { "" };
            let _ = writeln!(s, "C[i={}, j={}] = {}{}", e.i, e.j, e.expression, flag);
        }
        let _ = writeln!(s, "{} of {} currents are non-trivial", self.nontrivial(), self.entries.len());
        s
    }
}

pub fn currents_report(currents: &[NoetherCurrent]) -> CurrentsReport {
    CurrentsReport {
        entries: currents
            .iter()
            .map(|c| CurrentEntry { i: c.i, j: c.j, expression: c.expr.to_string(), trivial: c.trivial })
            .collect(),
    }
}
