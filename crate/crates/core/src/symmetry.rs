//! Gauge symmetries: transformation groups `g = (T, X, U)` that depend on
//! `k` arbitrary functions `p_j(t)` and their derivatives up to order `m`,
//! and reduce to the identity when every jet vanishes.
//!
//! A problem is semi-invariant under `g` when, identically in the jets,
//!
//! ```text
//! L(g) D_t T = (Σ λ_j^i p_j^(i)) D_t L + L + D_t F
//! D_t X      = φ(g) D_t T
//! ```
//!
//! Both identities are checked by random evaluation after every total
//! derivative has been expanded symbolically (`dx/dt = φ`, `du/dt` free).
//! The linearized conditions are the derivatives of these identities with
//! respect to each `p_j^(i)`, evaluated at zero jets.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{self, is_zero, partial, restrict_to_zero_jets, Dims, Expr, ExprError, IdentityConfig, Symbol, SymbolKind, Verdict};
use crate::problem::OcpProblem;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SymmetryError {
    #[error("{0}")]
    Shape(String),
    #[error("{field}: symbol `{symbol}` is not allowed")]
    ForbiddenSymbol { field: String, symbol: Symbol },
    #[error("{field} does not reduce to the identity at zero jets (witness: {witness})")]
    NotIdentityAtZero { field: String, witness: String },
    #[error(transparent)]
    Expr(#[from] ExprError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaugeSymmetry {
    dims: Dims,
    time: Expr,
    state: Vec<Expr>,
    control: Vec<Expr>,
    gauge: Expr,
    /// `lambda[j - 1][i]` is the weight of `p_j^(i)`.
    lambda: Vec<Vec<f64>>,
}

/// Components of a symmetry before validation.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryParts {
    pub k: usize,
    pub m: usize,
    pub time: Expr,
    pub state: Vec<Expr>,
    pub control: Vec<Expr>,
    pub gauge: Expr,
    /// `k` rows of `m + 1` weights; empty means all zero.
    pub lambda: Vec<Vec<f64>>,
}

impl GaugeSymmetry {
    /// Validates shapes and symbol usage against `problem`, then checks that
    /// the group is the identity at zero jets.
    pub fn new(problem: &OcpProblem, parts: SymmetryParts) -> Result<Self, SymmetryError> {
        let SymmetryParts { k, m, time, state, control, gauge, mut lambda } = parts;
        let dims = Dims::new(problem.n, problem.r, k, m);
        if k == 0 {
            return Err(SymmetryError::Shape("k must be at least 1".into()));
        }
        if state.len() != problem.n {
            return Err(SymmetryError::Shape(format!("X has {} entries, expected n = {}", state.len(), problem.n)));
        }
        if control.len() != problem.r {
            return Err(SymmetryError::Shape(format!("U has {} entries, expected r = {}", control.len(), problem.r)));
        }
        if lambda.is_empty() {
            lambda = vec![vec![0.0; m + 1]; k];
        }
        if lambda.len() != k || lambda.iter().any(|row| row.len() != m + 1) {
            return Err(SymmetryError::Shape(format!("lambda must have {k} rows of {} entries", m + 1)));
        }
        if lambda.iter().flatten().any(|v| !v.is_finite()) {
            return Err(SymmetryError::Shape("lambda entries must be finite".into()));
        }

        let fields = std::iter::once(("T".to_string(), &time))
            .chain(state.iter().enumerate().map(|(i, e)| (format!("X[{}]", i + 1), e)))
            .chain(control.iter().enumerate().map(|(j, e)| (format!("U[{}]", j + 1), e)))
            .chain(std::iter::once(("F".to_string(), &gauge)));
        for (field, e) in fields {
            for s in e.symbols() {
                let kind_ok = matches!(s.kind(), SymbolKind::Time | SymbolKind::State | SymbolKind::Control | SymbolKind::Jet);
                let order_ok = !matches!(s, Symbol::Jet { order, .. } if order > m);
                if !kind_ok || !order_ok || !dims.contains(s) {
                    return Err(SymmetryError::ForbiddenSymbol { field, symbol: s });
                }
            }
        }

        let sym = GaugeSymmetry { dims, time, state, control, gauge, lambda };
        sym.check_identity_at_zero(&IdentityConfig::default())?;
        Ok(sym)
    }

    /// The identity transformation with zero gauge term and weights.
    pub fn identity(problem: &OcpProblem, k: usize, m: usize) -> Self {
        GaugeSymmetry {
            dims: Dims::new(problem.n, problem.r, k.max(1), m),
            time: Expr::var(Symbol::Time),
            state: (1..=problem.n).map(|i| Expr::var(Symbol::State(i))).collect(),
            control: (1..=problem.r).map(|j| Expr::var(Symbol::Control(j))).collect(),
            gauge: Expr::zero(),
            lambda: vec![vec![0.0; m + 1]; k.max(1)],
        }
    }

    fn check_identity_at_zero(&self, cfg: &IdentityConfig) -> Result<(), SymmetryError> {
        let pairs = std::iter::once(("T".to_string(), &self.time, Symbol::Time))
            .chain(self.state.iter().enumerate().map(|(i, e)| (format!("X[{}]", i + 1), e, Symbol::State(i + 1))))
            .chain(self.control.iter().enumerate().map(|(j, e)| (format!("U[{}]", j + 1), e, Symbol::Control(j + 1))));
        for (field, e, sym) in pairs {
            let diff = Expr::sub(restrict_to_zero_jets(e), Expr::var(sym));
            if let Verdict::NonZeroWitness { env, .. } = is_zero(&diff, cfg)? {
                return Err(SymmetryError::NotIdentityAtZero { field, witness: env.to_string() });
            }
        }
        Ok(())
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn k(&self) -> usize {
        self.dims.k
    }

    pub fn m(&self) -> usize {
        self.dims.m
    }

    pub fn time(&self) -> &Expr {
        &self.time
    }

    pub fn state(&self) -> &[Expr] {
        &self.state
    }

    pub fn control(&self) -> &[Expr] {
        &self.control
    }

    pub fn gauge(&self) -> &Expr {
        &self.gauge
    }

    /// Weight `λ_j^i` (1-based `j`).
    pub fn lambda(&self, i: usize, j: usize) -> f64 {
        self.lambda[j - 1][i]
    }

    pub fn lambda_rows(&self) -> &[Vec<f64>] {
        &self.lambda
    }

    /// `Σ_{j, i} λ_j^i p_j^(i)`.
    fn weighted_jets(&self) -> Expr {
        Expr::sum(self.lambda.iter().enumerate().flat_map(|(j, row)| {
            row.iter()
                .enumerate()
                .map(move |(i, w)| Expr::mul(Expr::constant(*w), Expr::var(Symbol::jet(j + 1, i))))
        }))
    }

    /// Jet coefficients `∂(T, X, U, F)/∂p_j^(i)` at zero jets.
    pub fn jet_coefficients(&self, i: usize, j: usize) -> JetCoefficients {
        let s = Symbol::jet(j, i);
        let coeff = |e: &Expr| restrict_to_zero_jets(&partial(e, s));
        JetCoefficients {
            time: coeff(&self.time),
            state: self.state.iter().map(coeff).collect(),
            control: self.control.iter().map(coeff).collect(),
            gauge: coeff(&self.gauge),
        }
    }
}

/// Partial derivatives of the group components with respect to one jet
/// variable, evaluated at zero jets. Always jet-free.
#[derive(Debug, Clone, PartialEq)]
pub struct JetCoefficients {
    pub time: Expr,
    pub state: Vec<Expr>,
    pub control: Vec<Expr>,
    pub gauge: Expr,
}

impl JetCoefficients {
    fn zero(n: usize, r: usize) -> Self {
        JetCoefficients {
            time: Expr::zero(),
            state: vec![Expr::zero(); n],
            control: vec![Expr::zero(); r],
            gauge: Expr::zero(),
        }
    }
}

/// `e(t, x, u)` composed with the group: `t → T`, `x → X`, `u → U`.
pub fn substitute_group(e: &Expr, sym: &GaugeSymmetry) -> Expr {
    e.substitute(&|s| match s {
        Symbol::Time => Some(sym.time.clone()),
        Symbol::State(i) => sym.state.get(i - 1).cloned(),
        Symbol::Control(j) => sym.control.get(j - 1).cloned(),
        _ => None,
    })
}

/// Left minus right side of each invariance identity.
#[derive(Debug, Clone, PartialEq)]
pub struct Residuals {
    pub cost: Expr,
    pub dynamics: Vec<Expr>,
}

impl Residuals {
    fn labelled(&self) -> impl Iterator<Item = (String, &Expr)> {
        std::iter::once(("cost".to_string(), &self.cost))
            .chain(self.dynamics.iter().enumerate().map(|(i, e)| (format!("dynamics[{}]", i + 1), e)))
    }
}

/// Residuals of the semi-invariance identities:
///
/// * cost: `L(g) D_t T − [(Σ λ p) D_t L + L + D_t F]`
/// * dynamics `i`: `D_t X_i − φ_i(g) D_t T`
pub fn invariance_residuals(sym: &GaugeSymmetry, problem: &OcpProblem) -> Result<Residuals, ExprError> {
    let dims = sym.dims;
    let dt = |e: &Expr| problem.total_derivative(e, dims);
    let dt_time = dt(&sym.time)?;
    let cost = Expr::sub(
        Expr::mul(substitute_group(&problem.lagrangian, sym), dt_time.clone()),
        Expr::sum([
            Expr::mul(sym.weighted_jets(), dt(&problem.lagrangian)?),
            problem.lagrangian.clone(),
            dt(&sym.gauge)?,
        ]),
    );
    let dynamics = sym
        .state
        .iter()
        .zip(&problem.dynamics)
        .map(|(x, phi)| Ok(Expr::sub(dt(x)?, Expr::mul(substitute_group(phi, sym), dt_time.clone()))))
        .collect::<Result<_, ExprError>>()?;
    Ok(Residuals { cost, dynamics })
}

/// Linearized residuals for `(i, j)`: the invariance identities
/// differentiated with respect to `p_j^(i)` and restricted to zero jets.
///
/// With `δT, δX, δU, δF` the jet coefficients of order `i` and `δ'·` those
/// of order `i − 1` (zero when `i = 0`):
///
/// ```text
/// cost:  L_t δT + L_x·δX + L_u·δU + L (D_t δT + δ'T) − [λ_j^i D_t L + D_t δF + δ'F]
/// dyn l: D_t δX_l + δ'X_l − [φ_l,t δT + φ_l,x·δX + φ_l,u·δU + φ_l (D_t δT + δ'T)]
/// ```
///
/// The `δ'` terms come from `∂/∂p^(i) ∘ D_t = D_t ∘ ∂/∂p^(i) + ∂/∂p^(i-1)`.
pub fn linearized_residuals(sym: &GaugeSymmetry, problem: &OcpProblem, i: usize, j: usize) -> Result<Residuals, ExprError> {
    assert!(i <= sym.m() && (1..=sym.k()).contains(&j), "jet index (i={i}, j={j}) out of range");
    let dims = sym.dims;
    let dt = |e: &Expr| problem.total_derivative(e, dims);
    let cur = sym.jet_coefficients(i, j);
    let prev = if i == 0 { JetCoefficients::zero(problem.n, problem.r) } else { sym.jet_coefficients(i - 1, j) };

    // ∂f(g)/∂p at zero jets, for f = f(t, x, u)
    let chain = |f: &Expr| {
        let mut terms = vec![Expr::mul(partial(f, Symbol::Time), cur.time.clone())];
        terms.extend(cur.state.iter().enumerate().map(|(q, dx)| Expr::mul(partial(f, Symbol::State(q + 1)), dx.clone())));
        terms.extend(cur.control.iter().enumerate().map(|(q, du)| Expr::mul(partial(f, Symbol::Control(q + 1)), du.clone())));
        Expr::sum(terms)
    };
    let time_rate = Expr::sum([dt(&cur.time)?, prev.time.clone()]);

    let cost = Expr::sub(
        Expr::sum([chain(&problem.lagrangian), Expr::mul(problem.lagrangian.clone(), time_rate.clone())]),
        Expr::sum([
            Expr::mul(Expr::constant(sym.lambda(i, j)), dt(&problem.lagrangian)?),
            dt(&cur.gauge)?,
            prev.gauge.clone(),
        ]),
    );
    let dynamics = problem
        .dynamics
        .iter()
        .enumerate()
        .map(|(l, phi)| {
            Ok(Expr::sub(
                Expr::sum([dt(&cur.state[l])?, prev.state[l].clone()]),
                Expr::sum([chain(phi), Expr::mul(phi.clone(), time_rate.clone())]),
            ))
        })
        .collect::<Result<_, ExprError>>()?;
    Ok(Residuals { cost, dynamics })
}

/// Independent route to the linearized residuals: differentiate the full
/// residual expressions symbolically, then restrict to zero jets.
pub fn differentiated_residuals(sym: &GaugeSymmetry, problem: &OcpProblem, i: usize, j: usize) -> Result<Residuals, ExprError> {
    let full = invariance_residuals(sym, problem)?;
    let s = Symbol::jet(j, i);
    let d = |e: &Expr| restrict_to_zero_jets(&expr::partial(e, s));
    Ok(Residuals { cost: d(&full.cost), dynamics: full.dynamics.iter().map(d).collect() })
}

/// Outcome of one identity test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquationCheck {
    pub equation: String,
    pub passed: bool,
    pub verdict: Option<Verdict>,
    /// Set when the sampler could not find points where the residual is
    /// defined.
    pub error: Option<String>,
    pub depends_on_control_rate: bool,
}

fn check_equation(equation: String, residual: &Expr, cfg: &IdentityConfig) -> EquationCheck {
    let depends_on_control_rate = residual.any_symbol(&|s| s.kind() == SymbolKind::ControlDot);
    match is_zero(residual, cfg) {
        Ok(v) => EquationCheck { equation, passed: v.is_zero(), verdict: Some(v), error: None, depends_on_control_rate },
        Err(e) => EquationCheck { equation, passed: false, verdict: None, error: Some(e.to_string()), depends_on_control_rate },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FullCheck {
    pub config: IdentityConfig,
    pub equations: Vec<EquationCheck>,
    pub controldot_dependence: bool,
    pub passed: bool,
}

/// Tests every semi-invariance residual for identical vanishing.
pub fn check_semi_invariance(sym: &GaugeSymmetry, problem: &OcpProblem, cfg: &IdentityConfig) -> Result<FullCheck, ExprError> {
    let residuals = invariance_residuals(sym, problem)?;
    let equations: Vec<_> = residuals.labelled().map(|(name, e)| check_equation(name, e, cfg)).collect();
    Ok(FullCheck {
        config: *cfg,
        controldot_dependence: equations.iter().any(|e| e.depends_on_control_rate),
        passed: equations.iter().all(|e| e.passed),
        equations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearizedEntry {
    pub i: usize,
    pub j: usize,
    pub equations: Vec<EquationCheck>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearizedCheck {
    pub config: IdentityConfig,
    /// Ordered by `i`, then `j`.
    pub entries: Vec<LinearizedEntry>,
    pub passed: bool,
}

/// Tests the linearized residuals over the whole `(i, j)` grid.
pub fn check_linearized(sym: &GaugeSymmetry, problem: &OcpProblem, cfg: &IdentityConfig) -> Result<LinearizedCheck, ExprError> {
    let mut entries = Vec::with_capacity((sym.m() + 1) * sym.k());
    for i in 0..=sym.m() {
        for j in 1..=sym.k() {
            let residuals = linearized_residuals(sym, problem, i, j)?;
            let equations: Vec<_> = residuals.labelled().map(|(name, e)| check_equation(name, e, cfg)).collect();
            let passed = equations.iter().all(|e| e.passed);
            entries.push(LinearizedEntry { i, j, equations, passed });
        }
    }
    Ok(LinearizedCheck { config: *cfg, passed: entries.iter().all(|e| e.passed), entries })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    /// Both identities hold: a gauge symmetry in the full sense.
    GaugeSymmetry,
    /// Only the linearized conditions hold; currents are still available.
    LinearizedOnly,
    NotASymmetry,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Classification::GaugeSymmetry => "gauge symmetry",
            Classification::LinearizedOnly => "linearized conditions only",
            Classification::NotASymmetry => "not a symmetry",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvarianceReport {
    pub full_check: FullCheck,
    pub linearized_check: LinearizedCheck,
    pub controldot_dependence: bool,
    pub classification: Classification,
    pub overall: bool,
}

/// Runs the full check at `cfg` and the linearized check at ten times its
/// tolerance, on the same seed.
pub fn check_invariance(sym: &GaugeSymmetry, problem: &OcpProblem, cfg: &IdentityConfig) -> Result<InvarianceReport, ExprError> {
    let full_check = check_semi_invariance(sym, problem, cfg)?;
    let linearized_check = check_linearized(sym, problem, &cfg.scaled_tol(10.0))?;
    let controldot_dependence = full_check.controldot_dependence
        || linearized_check.entries.iter().flat_map(|e| &e.equations).any(|e| e.depends_on_control_rate);
    let classification = match (full_check.passed, linearized_check.passed) {
        (true, true) => Classification::GaugeSymmetry,
        (false, true) => Classification::LinearizedOnly,
        _ => Classification::NotASymmetry,
    };
    Ok(InvarianceReport {
        overall: full_check.passed && linearized_check.passed,
        full_check,
        linearized_check,
        controldot_dependence,
        classification,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{equivalent, parse};
    use crate::models;

    fn p(text: &str) -> Expr {
        parse(text, Dims::new(1, 1, 1, 2)).unwrap()
    }

    fn zero(e: &Expr) -> bool {
        is_zero(e, &IdentityConfig::default()).unwrap().is_zero()
    }

    #[test]
    fn substitution_into_time_optimal_data() {
        let problem = models::time_optimal_problem();
        let sym = models::time_optimal_symmetry(&problem);
        assert_eq!(substitute_group(&problem.lagrangian, &sym), Expr::one());
        let u = substitute_group(&p("u1"), &sym);
        assert!(equivalent(&u, &p("2*ddp1*x1 + (dp1+1)*u1"), &IdentityConfig::default()).unwrap());
        let id = GaugeSymmetry::identity(&problem, 1, 2);
        let e = p("sin(t)*x1 + u1^2");
        assert_eq!(substitute_group(&e, &id), e);
    }

    #[test]
    fn time_optimal_residuals_vanish() {
        let problem = models::time_optimal_problem();
        let sym = models::time_optimal_symmetry(&problem);
        let r = invariance_residuals(&sym, &problem).unwrap();
        assert!(zero(&r.cost));
        assert!(r.dynamics.iter().all(zero));
        let report = check_semi_invariance(&sym, &problem, &IdentityConfig::new(200, 1e-9, 1)).unwrap();
        assert!(report.passed && !report.controldot_dependence);
    }

    #[test]
    fn identity_symmetry_passes_for_any_problem() {
        let problem = models::linear_cost_problem();
        let id = GaugeSymmetry::identity(&problem, 2, 1);
        let report = check_invariance(&id, &problem, &IdentityConfig::default()).unwrap();
        assert!(report.overall);
        assert_eq!(report.classification, Classification::GaugeSymmetry);
        assert_eq!(report.linearized_check.entries.len(), 4);
    }

    #[test]
    fn mutated_state_map_fails_with_witness() {
        let problem = models::time_optimal_problem();
        let sym = models::time_optimal_symmetry(&problem);
        let mutated = GaugeSymmetry { state: vec![p("(dp1+1)*x1")], ..sym };
        let r = invariance_residuals(&mutated, &problem).unwrap();
        // hand expansion of D_t X − U D_t T
        let expected = p("ddp1*x1 + (dp1+1)*u1 - (2*ddp1*x1 + (dp1+1)*u1)*(dp1+1)");
        assert!(equivalent(&r.dynamics[0], &expected, &IdentityConfig::default()).unwrap());
        let report = check_semi_invariance(&mutated, &problem, &IdentityConfig::new(200, 1e-9, 1)).unwrap();
        assert!(!report.passed);
        assert!(matches!(report.equations[1].verdict, Some(Verdict::NonZeroWitness { .. })));
    }

    #[test]
    fn linearized_routes_agree() {
        for (problem, sym) in [
            (models::time_optimal_problem(), models::time_optimal_symmetry(&models::time_optimal_problem())),
            (models::linear_cost_problem(), models::translation_symmetry(&models::linear_cost_problem())),
        ] {
            for i in 0..=sym.m() {
                let a = linearized_residuals(&sym, &problem, i, 1).unwrap();
                let b = differentiated_residuals(&sym, &problem, i, 1).unwrap();
                let cfg = IdentityConfig::new(100, 1e-10, 11);
                assert!(equivalent(&a.cost, &b.cost, &cfg).unwrap(), "cost i={i}");
                for (x, y) in a.dynamics.iter().zip(&b.dynamics) {
                    assert!(equivalent(x, y, &cfg).unwrap(), "dyn i={i}");
                }
            }
        }
    }

    #[test]
    fn linearized_routes_agree_on_non_symmetry() {
        // a group that is not a symmetry still has matching linearizations
        let problem = models::time_optimal_problem();
        let base = models::time_optimal_symmetry(&problem);
        let sym = GaugeSymmetry { state: vec![p("(dp1+1)*x1 + p1*t")], gauge: p("p1*x1 + dp1^2"), ..base };
        for i in 0..=2 {
            let a = linearized_residuals(&sym, &problem, i, 1).unwrap();
            let b = differentiated_residuals(&sym, &problem, i, 1).unwrap();
            let cfg = IdentityConfig::new(100, 1e-10, 4);
            assert!(equivalent(&a.cost, &b.cost, &cfg).unwrap());
            assert!(equivalent(&a.dynamics[0], &b.dynamics[0], &cfg).unwrap());
        }
    }

    #[test]
    fn time_optimal_first_order_linearization_vanishes() {
        let problem = models::time_optimal_problem();
        let sym = models::time_optimal_symmetry(&problem);
        let c = sym.jet_coefficients(1, 1);
        assert!(equivalent(&c.state[0], &p("2*x1"), &IdentityConfig::default()).unwrap());
        assert_eq!(c.time, Expr::zero());
        assert_eq!(c.control[0], p("u1"));
        let r = linearized_residuals(&sym, &problem, 1, 1).unwrap();
        assert!(zero(&r.cost) && zero(&r.dynamics[0]));
    }

    #[test]
    fn full_check_implies_linearized() {
        for (problem, sym) in [
            (models::time_optimal_problem(), models::time_optimal_symmetry(&models::time_optimal_problem())),
            (models::linear_cost_problem(), models::translation_symmetry(&models::linear_cost_problem())),
        ] {
            let cfg = IdentityConfig::new(200, 1e-9, 0);
            assert!(check_semi_invariance(&sym, &problem, &cfg).unwrap().passed);
            assert!(check_linearized(&sym, &problem, &cfg.scaled_tol(10.0)).unwrap().passed);
        }
    }

    #[test]
    fn residuals_never_contain_costates() {
        let problem = models::time_optimal_problem();
        let sym = models::time_optimal_symmetry(&problem);
        let r = invariance_residuals(&sym, &problem).unwrap();
        let costate = |s: Symbol| s.kind() == SymbolKind::Costate;
        assert!(!r.cost.any_symbol(&costate) && !r.dynamics[0].any_symbol(&costate));
    }

    #[test]
    fn control_dependent_group_sets_rate_flag() {
        let problem = models::linear_cost_problem();
        let parts = SymmetryParts {
            k: 1,
            m: 0,
            time: p("t"),
            state: vec![p("x1 + p1*u1")],
            control: vec![p("u1")],
            gauge: Expr::zero(),
            lambda: vec![],
        };
        let sym = GaugeSymmetry::new(&problem, parts).unwrap();
        let report = check_invariance(&sym, &problem, &IdentityConfig::default()).unwrap();
        assert!(report.controldot_dependence);
        assert!(!report.overall);
    }

    #[test]
    fn construction_rejects_non_identity_and_bad_shapes() {
        let problem = models::time_optimal_problem();
        let parts = |time: &str| SymmetryParts {
            k: 1,
            m: 2,
            time: p(time),
            state: vec![p("x1")],
            control: vec![p("u1")],
            gauge: Expr::zero(),
            lambda: vec![],
        };
        assert!(matches!(
            GaugeSymmetry::new(&problem, parts("t + 1 + p1")),
            Err(SymmetryError::NotIdentityAtZero { .. })
        ));
        assert!(GaugeSymmetry::new(&problem, parts("t + p1")).is_ok());
        let bad_lambda = SymmetryParts { lambda: vec![vec![0.0; 2]], ..parts("t") };
        assert!(matches!(GaugeSymmetry::new(&problem, bad_lambda), Err(SymmetryError::Shape(_))));
        let with_costate = SymmetryParts { gauge: p("psi1"), ..parts("t") };
        assert!(matches!(GaugeSymmetry::new(&problem, with_costate), Err(SymmetryError::ForbiddenSymbol { .. })));
    }

    #[test]
    fn report_is_deterministic() {
        let problem = models::time_optimal_problem();
        let sym = models::time_optimal_symmetry(&problem);
        let cfg = IdentityConfig::new(50, 1e-9, 99);
        assert_eq!(check_invariance(&sym, &problem, &cfg).unwrap(), check_invariance(&sym, &problem, &cfg).unwrap());
    }
}
