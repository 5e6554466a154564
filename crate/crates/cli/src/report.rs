//! Run reports: one structure, rendered as text or JSON.

use std::fmt::Write as _;

use gauge_noether::conservation::HalvingCheck;
use gauge_noether::expr::{IdentityConfig, Verdict};
use gauge_noether::extremal::{ExtremalityReport, ExtremalityTolerances};
use gauge_noether::noether::CurrentsReport;
use gauge_noether::symmetry::{EquationCheck, InvarianceReport};
use serde::Serialize;

pub const TOOL: &str = "gauge-noether";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigEcho {
    pub problem: String,
    pub symmetry: Option<String>,
    pub trajectories: Option<String>,
    pub identity: IdentityConfig,
    pub steps: usize,
    pub samples_per_node: usize,
    pub extremality: ExtremalityTolerances,
    /// `None` means `max(1e-8, 100 h⁴)` per trajectory.
    pub drift_tolerance: Option<f64>,
    pub force: bool,
    pub halving: bool,
}

/// SHA-256 of each input document, hex encoded.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Digests {
    pub problem: String,
    pub symmetry: Option<String>,
    pub trajectories: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryOutcome {
    pub name: String,
    pub psi0: f64,
    pub normal: bool,
    pub nodes: usize,
    pub step: f64,
    pub j_value: Option<f64>,
    pub breakpoint_nodes: Vec<usize>,
    pub integration_error: Option<String>,
    pub extremality: Option<ExtremalityReport>,
    pub passed: bool,
}

/// A conservation record without its node values (those go to CSV).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConservationEntry {
    pub trajectory: String,
    pub i: usize,
    pub j: usize,
    pub trivial: bool,
    pub mean: Option<f64>,
    pub drift: Option<f64>,
    pub relative_drift: Option<f64>,
    pub tolerance: Option<f64>,
    pub conserved: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConservationSummary {
    pub entries: Vec<ConservationEntry>,
    pub worst: Option<usize>,
    pub passed: bool,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HalvingEntry {
    pub trajectory: String,
    pub i: usize,
    pub j: usize,
    pub check: HalvingCheck,
    pub consistent: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HalvingSummary {
    pub fine_steps: usize,
    pub floor: f64,
    pub ratio_range: (f64, f64),
    pub entries: Vec<HalvingEntry>,
    pub passed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Pass,
    Fail,
}

impl Outcome {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Outcome::Pass
        } else {
            Outcome::Fail
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config: ConfigEcho,
    pub digests: Digests,
    pub invariance: Option<InvarianceReport>,
    /// Currents were produced although the invariance stage failed.
    pub gate_overridden: bool,
    pub currents: Option<CurrentsReport>,
    pub trajectories: Vec<TrajectoryOutcome>,
    pub conservation: Option<ConservationSummary>,
    pub halving: Option<HalvingSummary>,
    pub notes: Vec<String>,
    pub overall: Outcome,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.overall == Outcome::Pass
    }

    /// Recomputes `overall` from the stages present.
    pub fn settle(&mut self) {
        let ok = self.invariance.as_ref().is_none_or(|r| r.overall)
            && self.trajectories.iter().all(|t| t.passed)
            && self.conservation.as_ref().is_none_or(|c| c.passed)
            && self.halving.as_ref().is_none_or(|h| h.passed)
            && !self.notes.iter().any(|n| n.starts_with("skipped"));
        self.overall = Outcome::from_bool(ok);
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{} {} {}", self.tool, self.version, self.command);
        if let Some(inv) = &self.invariance {
            render_invariance(&mut s, inv);
        }
        if let Some(c) = &self.currents {
            let _ = writeln!(s, "currents{}:", if self.gate_overridden { " (invariance gate overridden)" } else { "" });
            for line in c.to_text().lines() {
                let _ = writeln!(s, "  {line}");
            }
        }
        for t in &self.trajectories {
            render_trajectory(&mut s, t);
        }
        if let Some(c) = &self.conservation {
            render_conservation(&mut s, c);
        }
        if let Some(h) = &self.halving {
            let _ = writeln!(
                s,
                "step halving ({} steps): {} (ratio window [{}, {}], floor {:e})",
                h.fine_steps,
                pass_word(h.passed),
                h.ratio_range.0,
                h.ratio_range.1,
                h.floor
            );
            for e in &h.entries {
                let ratio = e.check.ratio.map_or_else(|| "-".to_string(), |r| format!("{r:.3}"));
                let floor = if e.check.at_floor { ", at floor" } else { "" };
                let _ = writeln!(
                    s,
                    "  {} C[i={}, j={}]: drift {:.3e} -> {:.3e}, ratio {ratio}{floor}",
                    e.trajectory, e.i, e.j, e.check.coarse, e.check.fine
                );
            }
        }
        for n in &self.notes {
            let _ = writeln!(s, "note: {n}");
        }
        let _ = writeln!(s, "overall: {}", pass_word(self.passed()));
        s
    }
}

fn pass_word(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn render_equation(s: &mut String, e: &EquationCheck, indent: &str) {
    let _ = match (&e.verdict, &e.error) {
        (Some(Verdict::IdenticallyZero { trials, max_abs, .. }), _) => {
            writeln!(s, "{indent}{}: zero at {trials} samples (max |R| = {max_abs:.3e})", e.equation)
        }
        (Some(Verdict::NonZeroWitness { env, value, .. }), _) => {
            writeln!(s, "{indent}{}: NONZERO, R = {value:.6e} at {env}", e.equation)
        }
        (None, Some(err)) => writeln!(s, "{indent}{}: ERROR {err}", e.equation),
        (None, None) => writeln!(s, "{indent}{}: not evaluated", e.equation),
    };
}

fn render_invariance(s: &mut String, inv: &InvarianceReport) {
    let _ = writeln!(s, "invariance: {} ({})", inv.classification, pass_word(inv.overall));
    let _ = writeln!(
        s,
        "  full check (trials {}, tol {:e}, seed {}):",
        inv.full_check.config.trials, inv.full_check.config.tol, inv.full_check.config.seed
    );
    for e in &inv.full_check.equations {
        render_equation(s, e, "    ");
    }
    let lin = &inv.linearized_check;
    let passed = lin.entries.iter().filter(|e| e.passed).count();
    let _ = writeln!(s, "  linearized check (tol {:e}): {passed}/{} (i, j) pairs pass", lin.config.tol, lin.entries.len());
    for entry in lin.entries.iter().filter(|e| !e.passed) {
        for e in entry.equations.iter().filter(|e| !e.passed) {
            render_equation(s, e, &format!("    (i={}, j={}) ", entry.i, entry.j));
        }
    }
    if inv.controldot_dependence {
        let _ = writeln!(s, "  note: residuals depend on control rates du");
    }
}

fn render_trajectory(s: &mut String, t: &TrajectoryOutcome) {
    let kind = if t.normal { "normal" } else { "abnormal" };
    let _ = writeln!(s, "trajectory {} ({kind}, psi0 = {}, {} nodes, h = {:e}): {}", t.name, t.psi0, t.nodes, t.step, pass_word(t.passed));
    if let Some(err) = &t.integration_error {
        let _ = writeln!(s, "  integration failed: {err}");
    }
    if let Some(j) = t.j_value {
        let _ = writeln!(s, "  J = {j}");
    }
    if let Some(x) = &t.extremality {
        let _ = writeln!(
            s,
            "  adjoint residual {:.3e}, maximality violation {:.3e}, dH/dt mismatch {:.3e}",
            x.adjoint_residual_max, x.maximality_violation_max, x.dhdt_mismatch_max
        );
        for w in &x.warnings {
            let _ = writeln!(s, "  warning: {w}");
        }
    }
}

fn render_conservation(s: &mut String, c: &ConservationSummary) {
    let _ = writeln!(s, "conservation: {}", pass_word(c.passed));
    for e in &c.entries {
        match (&e.error, e.relative_drift) {
            (Some(err), _) => {
                let _ = writeln!(s, "  {} C[i={}, j={}]: ERROR {err}", e.trajectory, e.i, e.j);
            }
            (None, Some(rel)) => {
                let _ = writeln!(
                    s,
                    "  {} C[i={}, j={}]: mean {:.6e}, relative drift {rel:.3e} (tol {:.1e}) {}",
                    e.trajectory,
                    e.i,
                    e.j,
                    e.mean.unwrap_or(0.0),
                    e.tolerance.unwrap_or(0.0),
                    if e.conserved { "conserved" } else { "VIOLATED" }
                );
            }
            _ => {}
        }
    }
    if let Some(w) = c.worst.map(|k| &c.entries[k]) {
        let _ = writeln!(s, "  worst: {} C[i={}, j={}]", w.trajectory, w.i, w.j);
    }
    for w in &c.warnings {
        let _ = writeln!(s, "  warning: {w}");
    }
}
