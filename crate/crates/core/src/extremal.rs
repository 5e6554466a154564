//! Candidate Pontryagin extremals.
//!
//! The state and costate are integrated together with classical fixed-step
//! RK4 under a user-supplied control law:
//!
//! ```text
//! dx/dt = φ(t, x, u),   dψ/dt = −∂H/∂x(t, x, u, ψ₀, ψ),   dJ/dt = L(t, x, u)
//! ```
//!
//! Nothing here searches for extremals; the checks measure how far a given
//! trajectory is from satisfying the adjoint system, the maximality
//! condition and `dH/dt = ∂H/∂t`.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{eval, partial, Dims, EvalError, Expr, Scope, Symbol, Valuation};
use crate::problem::OcpProblem;

/// Largest factor by which the grid is refined to put breakpoints on nodes.
pub const MAX_REFINEMENT: usize = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExtremalError {
    #[error("invalid control law: {0}")]
    InvalidLaw(String),
    #[error("invalid initial data: {0}")]
    InvalidInitialData(String),
    #[error("need at least 2 steps, got {0}")]
    TooFewSteps(usize),
    #[error("breakpoints cannot be aligned with the grid within a refinement factor of {MAX_REFINEMENT}")]
    UnalignedBreakpoints,
    #[error("state or costate blew up near t = {time}")]
    BlowUp { time: f64 },
    #[error("evaluation failed at t = {time}: {source}")]
    Eval { time: f64, source: EvalError },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ControlLaw {
    /// `u_j = expr_j(t, x, psi0, psi)`.
    Feedback { u: Vec<Expr> },
    /// `values[s]` holds the control on the `s`-th segment between sorted
    /// interior `breakpoints`.
    PiecewiseConstant { breakpoints: Vec<f64>, values: Vec<Vec<f64>> },
}

impl ControlLaw {
    pub fn constant(values: Vec<f64>) -> Self {
        ControlLaw::PiecewiseConstant { breakpoints: vec![], values: vec![values] }
    }

    pub fn validate(&self, problem: &OcpProblem) -> Result<(), ExtremalError> {
        let bad = |m: String| Err(ExtremalError::InvalidLaw(m));
        match self {
            ControlLaw::Feedback { u } => {
                if u.len() != problem.r {
                    return bad(format!("{} feedback expressions for r = {}", u.len(), problem.r));
                }
                let dims = Dims::plain(problem.n, problem.r);
                for (j, e) in u.iter().enumerate() {
                    for s in e.symbols() {
                        if !Scope::CONTROL_LAW.allows(s.kind()) || !dims.contains(s) {
                            return bad(format!("u[{}] uses `{s}`", j + 1));
                        }
                    }
                }
            }
            ControlLaw::PiecewiseConstant { breakpoints, values } => {
                if values.len() != breakpoints.len() + 1 {
                    return bad(format!("{} breakpoints need {} value rows", breakpoints.len(), breakpoints.len() + 1));
                }
                if values.iter().any(|row| row.len() != problem.r || row.iter().any(|v| !v.is_finite())) {
                    return bad(format!("every value row needs {} finite entries", problem.r));
                }
                if breakpoints.windows(2).any(|w| w[0] >= w[1])
                    || breakpoints.iter().any(|b| !(*b > problem.a && *b < problem.b))
                {
                    return bad("breakpoints must increase strictly inside (a, b)".into());
                }
            }
        }
        Ok(())
    }

    fn segment(breakpoints: &[f64], t: f64, slack: f64) -> usize {
        breakpoints.iter().filter(|b| **b <= t + slack).count()
    }
}

/// Values of every symbol at one trajectory node (or RK stage).
#[derive(Debug, Clone, Copy)]
pub struct Point<'a> {
    pub t: f64,
    pub x: &'a [f64],
    pub u: &'a [f64],
    pub psi0: f64,
    pub psi: &'a [f64],
}

impl Valuation for Point<'_> {
    fn value(&self, sym: Symbol) -> Option<f64> {
        match sym {
            Symbol::Time => Some(self.t),
            Symbol::State(i) => self.x.get(i.checked_sub(1)?).copied(),
            Symbol::Control(j) => self.u.get(j.checked_sub(1)?).copied(),
            Symbol::Costate0 => Some(self.psi0),
            Symbol::Costate(i) => self.psi.get(i.checked_sub(1)?).copied(),
            Symbol::ControlDot(_) | Symbol::Jet { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub step: f64,
    pub x: Vec<Vec<f64>>,
    pub u: Vec<Vec<f64>>,
    pub psi: Vec<Vec<f64>>,
    pub psi0: f64,
    pub h_values: Vec<f64>,
    /// Running cost integrated to `b`.
    pub j_value: f64,
    /// Nodes that coincide with a control breakpoint.
    pub breakpoint_nodes: Vec<usize>,
    pub warnings: Vec<String>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn node(&self, k: usize) -> Point<'_> {
        Point { t: self.times[k], x: &self.x[k], u: &self.u[k], psi0: self.psi0, psi: &self.psi[k] }
    }

    /// Normal when `ψ₀ ≠ 0`, abnormal otherwise.
    pub fn is_normal(&self) -> bool {
        self.psi0 != 0.0
    }

    fn is_breakpoint(&self, k: usize) -> bool {
        self.breakpoint_nodes.binary_search(&k).is_ok()
    }

    /// CSV with header `t,x1..xn,u1..ur,psi1..psin,H`, one row per node.
    pub fn to_csv(&self) -> String {
        let (n, r) = (self.x.first().map_or(0, Vec::len), self.u.first().map_or(0, Vec::len));
        let mut s = String::from("t");
        (1..=n).for_each(|i| write!(s, ",x{i}").unwrap());
        (1..=r).for_each(|j| write!(s, ",u{j}").unwrap());
        (1..=n).for_each(|i| write!(s, ",psi{i}").unwrap());
        s.push_str(",H\n");
        for k in 0..self.len() {
            write!(s, "{}", self.times[k]).unwrap();
            for v in self.x[k].iter().chain(&self.u[k]).chain(&self.psi[k]) {
                write!(s, ",{v}").unwrap();
            }
            writeln!(s, ",{}", self.h_values[k]).unwrap();
        }
        s
    }
}

/// Right-hand sides shared by the integrator and the checks.
struct System {
    dynamics: Vec<Expr>,
    adjoint: Vec<Expr>,
    lagrangian: Expr,
    hamiltonian: Expr,
}

impl System {
    fn new(problem: &OcpProblem) -> Self {
        let hamiltonian = problem.hamiltonian().expr;
        let adjoint = (1..=problem.n).map(|i| Expr::neg(partial(&hamiltonian, Symbol::State(i)))).collect();
        System { dynamics: problem.dynamics.clone(), adjoint, lagrangian: problem.lagrangian.clone(), hamiltonian }
    }
}

fn eval_at(e: &Expr, p: &Point<'_>) -> Result<f64, ExtremalError> {
    eval(e, p).map_err(|source| ExtremalError::Eval { time: p.t, source })
}

struct Integrator<'a> {
    system: System,
    law: &'a ControlLaw,
    n: usize,
    psi0: f64,
}

impl Integrator<'_> {
    fn feedback(&self, u: &[Expr], t: f64, x: &[f64], psi: &[f64]) -> Result<Vec<f64>, ExtremalError> {
        let p = Point { t, x, u: &[], psi0: self.psi0, psi };
        u.iter().map(|e| eval_at(e, &p)).collect()
    }

    /// Derivative of the packed state `[x, ψ, J]`. `fixed_u` is the control
    /// for piecewise-constant laws.
    fn rhs(&self, t: f64, y: &[f64], fixed_u: Option<&[f64]>) -> Result<Vec<f64>, ExtremalError> {
        let (x, rest) = y.split_at(self.n);
        let psi = &rest[..self.n];
        let u_owned;
        let u = match (self.law, fixed_u) {
            (_, Some(u)) => u,
            (ControlLaw::Feedback { u }, None) => {
                u_owned = self.feedback(u, t, x, psi)?;
                &u_owned
            }
            (ControlLaw::PiecewiseConstant { .. }, None) => unreachable!("piecewise law without a segment value"),
        };
        let p = Point { t, x, u, psi0: self.psi0, psi };
        let mut out = Vec::with_capacity(2 * self.n + 1);
        for e in self.system.dynamics.iter().chain(&self.system.adjoint) {
            out.push(eval_at(e, &p)?);
        }
        out.push(eval_at(&self.system.lagrangian, &p)?);
        Ok(out)
    }

    fn step(&self, t: f64, h: f64, y: &[f64], fixed_u: Option<&[f64]>) -> Result<Vec<f64>, ExtremalError> {
        let axpy = |a: &[f64], k: &[f64], c: f64| a.iter().zip(k).map(|(a, k)| a + c * k).collect::<Vec<_>>();
        let k1 = self.rhs(t, y, fixed_u)?;
        let k2 = self.rhs(t + h / 2.0, &axpy(y, &k1, h / 2.0), fixed_u)?;
        let k3 = self.rhs(t + h / 2.0, &axpy(y, &k2, h / 2.0), fixed_u)?;
        let k4 = self.rhs(t + h, &axpy(y, &k3, h), fixed_u)?;
        Ok((0..y.len()).map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect())
    }

    fn node_control(&self, t: f64, x: &[f64], psi: &[f64], slack: f64) -> Result<Vec<f64>, ExtremalError> {
        match self.law {
            ControlLaw::Feedback { u } => self.feedback(u, t, x, psi),
            ControlLaw::PiecewiseConstant { breakpoints, values } => {
                Ok(values[ControlLaw::segment(breakpoints, t, slack)].clone())
            }
        }
    }
}

/// Picks the step count: `steps`, refined by the smallest factor that puts
/// every breakpoint on a node.
fn aligned_steps(problem: &OcpProblem, law: &ControlLaw, steps: usize) -> Result<usize, ExtremalError> {
    let breakpoints = match law {
        ControlLaw::PiecewiseConstant { breakpoints, .. } if !breakpoints.is_empty() => breakpoints,
        _ => return Ok(steps),
    };
    let span = problem.b - problem.a;
    (1..=MAX_REFINEMENT)
        .map(|f| steps * f)
        .find(|&total| {
            breakpoints.iter().all(|b| {
                let s = (b - problem.a) / span * total as f64;
                (s - s.round()).abs() <= 1e-9 * s.max(1.0)
            })
        })
        .ok_or(ExtremalError::UnalignedBreakpoints)
}

/// Integrates state, costate and running cost from `a` to `b` with RK4.
pub fn integrate_extremal(
    problem: &OcpProblem,
    law: &ControlLaw,
    x_a: &[f64],
    psi0: f64,
    psi_a: &[f64],
    steps: usize,
) -> Result<Trajectory, ExtremalError> {
    if steps < 2 {
        return Err(ExtremalError::TooFewSteps(steps));
    }
    law.validate(problem)?;
    let (n, r) = (problem.n, problem.r);
    if x_a.len() != n || psi_a.len() != n {
        return Err(ExtremalError::InvalidInitialData(format!("x and psi need {n} entries")));
    }
    if !psi0.is_finite() || psi0 > 0.0 {
        return Err(ExtremalError::InvalidInitialData(format!("psi0 = {psi0} must be finite and <= 0")));
    }
    if psi0 == 0.0 && psi_a.iter().all(|v| *v == 0.0) {
        return Err(ExtremalError::InvalidInitialData("(psi0, psi) must not vanish together".into()));
    }
    if x_a.iter().chain(psi_a).any(|v| !v.is_finite()) {
        return Err(ExtremalError::InvalidInitialData("initial values must be finite".into()));
    }

    let total = aligned_steps(problem, law, steps)?;
    let h = (problem.b - problem.a) / total as f64;
    let slack = 1e-9 * h;
    let integrator = Integrator { system: System::new(problem), law, n, psi0 };

    let mut y: Vec<f64> = x_a.iter().chain(psi_a).copied().chain(std::iter::once(0.0)).collect();
    let mut traj = Trajectory {
        times: Vec::with_capacity(total + 1),
        step: h,
        x: Vec::with_capacity(total + 1),
        u: Vec::with_capacity(total + 1),
        psi: Vec::with_capacity(total + 1),
        psi0,
        h_values: Vec::with_capacity(total + 1),
        j_value: 0.0,
        breakpoint_nodes: Vec::new(),
        warnings: Vec::new(),
    };
    let mut left_omega = vec![false; r];

    for k in 0..=total {
        let t = if k == total { problem.b } else { problem.a + k as f64 * h };
        let (x, psi) = (y[..n].to_vec(), y[n..2 * n].to_vec());
        let u = integrator.node_control(t, &x, &psi, slack)?;
        for (j, (v, bound)) in u.iter().zip(&problem.omega).enumerate() {
            if !bound.closure_contains(*v) && !left_omega[j] {
                left_omega[j] = true;
                traj.warnings.push(format!("control u{} = {v} leaves the closure of omega at t = {t}", j + 1));
            }
        }
        if let ControlLaw::PiecewiseConstant { breakpoints, .. } = law {
            if breakpoints.iter().any(|b| (b - t).abs() <= slack.max(1e-12)) {
                traj.breakpoint_nodes.push(k);
            }
        }
        let point = Point { t, x: &x, u: &u, psi0, psi: &psi };
        traj.h_values.push(eval_at(&integrator.system.hamiltonian, &point)?);
        traj.times.push(t);
        traj.x.push(x);
        traj.psi.push(psi);
        traj.u.push(u);
        if k == total {
            break;
        }

        let fixed = match law {
            ControlLaw::PiecewiseConstant { breakpoints, values } => {
                Some(values[ControlLaw::segment(breakpoints, t + h / 2.0, 0.0)].as_slice())
            }
            ControlLaw::Feedback { .. } => None,
        };
        y = integrator.step(t, h, &y, fixed)?;
        if y.iter().any(|v| !v.is_finite()) {
            return Err(ExtremalError::BlowUp { time: t + h });
        }
    }
    traj.j_value = y[2 * n];
    Ok(traj)
}

/// Largest mismatch between the central-difference costate rate at interior
/// nodes and `−∂H/∂x`. Breakpoint nodes are skipped.
pub fn check_adjoint(problem: &OcpProblem, traj: &Trajectory) -> f64 {
    let system = System::new(problem);
    let mut worst = 0.0f64;
    for k in 1..traj.len().saturating_sub(1) {
        if traj.is_breakpoint(k) {
            continue;
        }
        let p = traj.node(k);
        for (i, rhs) in system.adjoint.iter().enumerate() {
            let rate = (traj.psi[k + 1][i] - traj.psi[k - 1][i]) / (2.0 * traj.step);
            let residual = eval(rhs, &p).map_or(f64::INFINITY, |v| (rate - v).abs());
            worst = worst.max(residual);
        }
    }
    worst
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaximalityCheck {
    /// `max(H(sample) − H(u(t)), 0)` over nodes and interior samples.
    pub violation_max: f64,
    pub worst_time: Option<f64>,
    /// Nodes where `H` grows toward an open side of `Ω`, so the supremum
    /// over `Ω` is approached on the boundary.
    pub boundary_supremum_nodes: usize,
    pub first_boundary_time: Option<f64>,
    /// Breakpoint nodes exempt from the check.
    pub exempt_nodes: usize,
}

/// Sampled maximality check. Infinite sides of `Ω` are truncated to a
/// window of `10 (1 + |u|)` around the node's control.
pub fn check_maximality(problem: &OcpProblem, traj: &Trajectory, samples_per_node: usize, seed: u64) -> MaximalityCheck {
    let hamiltonian = problem.hamiltonian().expr;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = MaximalityCheck {
        violation_max: 0.0,
        worst_time: None,
        boundary_supremum_nodes: 0,
        first_boundary_time: None,
        exempt_nodes: 0,
    };
    let mut candidate = vec![0.0; problem.r];
    for k in 0..traj.len() {
        if traj.is_breakpoint(k) {
            out.exempt_nodes += 1;
            continue;
        }
        let p = traj.node(k);
        let h_here = match eval(&hamiltonian, &p) {
            Ok(v) => v,
            Err(_) => {
                out.violation_max = f64::INFINITY;
                out.worst_time.get_or_insert(p.t);
                continue;
            }
        };
        let windows: Vec<(f64, f64)> = problem
            .omega
            .iter()
            .zip(p.u)
            .map(|(b, u)| {
                let reach = 10.0 * (1.0 + u.abs());
                let lo = if b.lower.is_finite() { b.lower } else { u - reach };
                let hi = if b.upper.is_finite() { b.upper } else { u + reach };
                (lo, hi)
            })
            .collect();
        let record = |value: Result<f64, EvalError>, out: &mut MaximalityCheck| {
            let gap = value.map_or(0.0, |v| (v - h_here).max(0.0));
            if gap > out.violation_max {
                out.violation_max = gap;
                out.worst_time = Some(p.t);
            }
        };
        for _ in 0..samples_per_node {
            for (c, (lo, hi)) in candidate.iter_mut().zip(&windows) {
                *c = loop {
                    let v = rng.gen_range(*lo..*hi);
                    if v > *lo {
                        break v;
                    }
                };
            }
            record(eval(&hamiltonian, &Point { u: &candidate, ..p }), &mut out);
        }
        // closed sides belong to Ω; open sides are probed just inside
        let mut at_open_boundary = false;
        for (j, b) in problem.omega.iter().enumerate() {
            for (edge, open) in [(b.lower, b.lower_open), (b.upper, b.upper_open)] {
                if !edge.is_finite() {
                    continue;
                }
                candidate.copy_from_slice(p.u);
                candidate[j] = edge;
                let value = eval(&hamiltonian, &Point { u: &candidate, ..p });
                if open {
                    if matches!(value, Ok(v) if v > h_here + 1e-12 * (1.0 + h_here.abs())) {
                        at_open_boundary = true;
                    }
                } else {
                    record(value, &mut out);
                }
            }
        }
        if at_open_boundary {
            out.boundary_supremum_nodes += 1;
            out.first_boundary_time.get_or_insert(p.t);
        }
    }
    out
}

/// Largest mismatch between the central-difference rate of the recorded
/// Hamiltonian and `∂H/∂t`. Differences straddling a breakpoint are skipped.
pub fn check_dhdt(problem: &OcpProblem, traj: &Trajectory) -> f64 {
    let dh_dt = partial(&problem.hamiltonian().expr, Symbol::Time);
    let mut worst = 0.0f64;
    for k in 1..traj.len().saturating_sub(1) {
        if traj.is_breakpoint(k - 1) || traj.is_breakpoint(k) || traj.is_breakpoint(k + 1) {
            continue;
        }
        let rate = (traj.h_values[k + 1] - traj.h_values[k - 1]) / (2.0 * traj.step);
        let mismatch = eval(&dh_dt, &traj.node(k)).map_or(f64::INFINITY, |v| (rate - v).abs());
        worst = worst.max(mismatch);
    }
    worst
}

/// Pass thresholds for [`ExtremalityReport::passes`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtremalityTolerances {
    pub adjoint: f64,
    pub maximality: f64,
    pub dhdt: f64,
}

impl Default for ExtremalityTolerances {
    fn default() -> Self {
        ExtremalityTolerances { adjoint: 1e-6, maximality: 1e-9, dhdt: 1e-5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremalityReport {
    pub adjoint_residual_max: f64,
    pub maximality_violation_max: f64,
    pub dhdt_mismatch_max: f64,
    pub normal: bool,
    pub maximality: MaximalityCheck,
    pub warnings: Vec<String>,
}

impl ExtremalityReport {
    pub fn passes(&self, tol: &ExtremalityTolerances) -> bool {
        self.adjoint_residual_max <= tol.adjoint
            && self.maximality_violation_max <= tol.maximality
            && self.dhdt_mismatch_max <= tol.dhdt
    }
}

pub fn check_extremality(problem: &OcpProblem, traj: &Trajectory, samples_per_node: usize, seed: u64) -> ExtremalityReport {
    let maximality = check_maximality(problem, traj, samples_per_node, seed);
    let mut warnings = traj.warnings.clone();
    if maximality.boundary_supremum_nodes > 0 {
        warnings.push(format!(
            "H increases toward an open side of omega at {} nodes (first at t = {}); the maximum is not attained",
            maximality.boundary_supremum_nodes,
            maximality.first_boundary_time.unwrap_or(f64::NAN)
        ));
    }
    ExtremalityReport {
        adjoint_residual_max: check_adjoint(problem, traj),
        maximality_violation_max: maximality.violation_max,
        dhdt_mismatch_max: check_dhdt(problem, traj),
        normal: traj.is_normal(),
        maximality,
        warnings,
    }
}
