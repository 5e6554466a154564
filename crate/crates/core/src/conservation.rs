//! Drift of Noether currents along integrated trajectories.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{eval, EvalError};
use crate::extremal::Trajectory;
use crate::noether::NoetherCurrent;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("current C[i={i}, j={j}] cannot be evaluated at node {node} (t = {time}): {source}")]
pub struct ConservationError {
    pub i: usize,
    pub j: usize,
    pub node: usize,
    pub time: f64,
    pub source: EvalError,
}

/// `max(1e-8, 100 h⁴)`: the RK4 global error budget with a safety factor.
pub fn default_tolerance(step: f64) -> f64 {
    (100.0 * step.powi(4)).max(1e-8)
}

/// Evaluates `current` at every node of `traj` and summarizes the values.
pub fn evaluate_current_along(
    current: &NoetherCurrent,
    traj: &Trajectory,
    tolerance: f64,
) -> Result<ConservationRecord, ConservationError> {
    let values = (0..traj.len())
        .map(|k| {
            eval(&current.expr, &traj.node(k)).map_err(|source| ConservationError {
                i: current.i,
                j: current.j,
                node: k,
                time: traj.times[k],
                source,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ConservationRecord::from_values(current.i, current.j, current.trivial, values, tolerance))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConservationRecord {
    pub i: usize,
    pub j: usize,
    pub trivial: bool,
    pub values: Vec<f64>,
    /// The conserved constant.
    pub mean: f64,
    /// `max_k |C(t_k) − mean|`.
    pub drift: f64,
    /// `drift / (1 + |mean|)`.
    pub relative_drift: f64,
    pub tolerance: f64,
    /// `relative_drift <= tolerance`.
    pub conserved: bool,
}

impl ConservationRecord {
    pub fn from_values(i: usize, j: usize, trivial: bool, values: Vec<f64>, tolerance: f64) -> Self {
        // `+ 0.0` turns a negative zero into zero
        let mean = if values.is_empty() { 0.0 } else { values.iter().sum::<f64>() / values.len() as f64 + 0.0 };
        let drift = values.iter().fold(0.0f64, |acc, v| acc.max((v - mean).abs()));
        let relative_drift = drift / (1.0 + mean.abs());
        ConservationRecord {
            i,
            j,
            trivial,
            values,
            mean,
            drift,
            relative_drift,
            tolerance,
            conserved: relative_drift <= tolerance,
        }
    }

    pub fn label(&self) -> String {
        format!("C[i={}, j={}]", self.i, self.j)
    }

    /// Two columns, `t` and the current value.
    pub fn to_csv(&self, times: &[f64]) -> String {
        let mut s = String::from("t,current_value\n");
        for (t, v) in times.iter().zip(&self.values) {
            let _ = writeln!(s, "{t},{v}");
        }
        s
    }
}

/// One (current, trajectory) pair; exactly one of `record` and `error` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairResult {
    pub trajectory: usize,
    pub i: usize,
    pub j: usize,
    pub record: Option<ConservationRecord>,
    pub error: Option<String>,
}

impl PairResult {
    pub fn conserved(&self) -> bool {
        self.record.as_ref().is_some_and(|r| r.conserved)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConservationSuite {
    pub pairs: Vec<PairResult>,
    /// Index into `pairs` of the worst offender: any failed evaluation,
    /// otherwise the largest relative drift.
    pub worst: Option<usize>,
    pub passed: bool,
    pub warnings: Vec<String>,
}

/// Cross product of `currents` and `trajectories`. Without an explicit
/// `tolerance` each trajectory uses [`default_tolerance`] of its step.
pub fn conservation_suite(currents: &[NoetherCurrent], trajectories: &[Trajectory], tolerance: Option<f64>) -> ConservationSuite {
    let mut pairs = Vec::with_capacity(currents.len() * trajectories.len());
    for (t, traj) in trajectories.iter().enumerate() {
        let tol = tolerance.unwrap_or_else(|| default_tolerance(traj.step));
        for c in currents {
            let (record, error) = match evaluate_current_along(c, traj, tol) {
                Ok(r) => (Some(r), None),
                Err(e) => (None, Some(e.to_string())),
            };
            pairs.push(PairResult { trajectory: t, i: c.i, j: c.j, record, error });
        }
    }
    let badness = |p: &PairResult| p.record.as_ref().map_or(f64::INFINITY, |r| r.relative_drift);
    let worst = (0..pairs.len()).rev().max_by(|&a, &b| badness(&pairs[a]).total_cmp(&badness(&pairs[b])));
    let mut warnings = Vec::new();
    if trajectories.is_empty() {
        warnings.push("no trajectories supplied; conservation holds vacuously".to_string());
    } else if currents.is_empty() {
        warnings.push("no currents supplied; conservation holds vacuously".to_string());
    }
    ConservationSuite { passed: pairs.iter().all(PairResult::conserved), worst, pairs, warnings }
}

/// Drift ratio between a run and the same run with half the step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalvingCheck {
    pub coarse: f64,
    pub fine: f64,
    pub ratio: Option<f64>,
    /// Both drifts are below `floor`, so the ratio carries no information.
    pub at_floor: bool,
}

impl HalvingCheck {
    pub fn new(coarse: f64, fine: f64, floor: f64) -> Self {
        let at_floor = coarse <= floor && fine <= floor;
        let ratio = (fine > 0.0).then(|| coarse / fine);
        HalvingCheck { coarse, fine, ratio, at_floor }
    }

    /// Fourth-order behaviour: a ratio within `[lo, hi]`, or both at the floor.
    pub fn consistent_with(&self, lo: f64, hi: f64) -> bool {
        self.at_floor || self.ratio.is_some_and(|r| (lo..=hi).contains(&r))
    }
}
