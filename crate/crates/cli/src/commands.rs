//! The four commands, callable in-process.

use std::fs;
use std::path::{Path, PathBuf};

use gauge_noether::conservation::{conservation_suite, ConservationSuite, HalvingCheck};
use gauge_noether::expr::IdentityConfig;
use gauge_noether::extremal::{check_extremality, integrate_extremal, ExtremalityTolerances, Trajectory};
use gauge_noether::noether::{currents_report, generate_currents_with, NoetherCurrent};
use gauge_noether::problem::OcpProblem;
use gauge_noether::symmetry::{check_invariance, GaugeSymmetry};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::docs::{self, DocError, TrajectorySpec};
use crate::report::{
    ConfigEcho, ConservationEntry, ConservationSummary, Digests, HalvingEntry, HalvingSummary, Outcome, RunReport,
    TrajectoryOutcome, TOOL, VERSION,
};

/// Drifts below this are rounding noise; their halving ratio is meaningless.
pub const DRIFT_FLOOR: f64 = 1e-12;
pub const HALVING_WINDOW: (f64, f64) = (8.0, 32.0);

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Document(#[from] DocError),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("symbolic stage failed: {0}")]
    Symbolic(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub identity: IdentityConfig,
    pub steps: usize,
    pub samples_per_node: usize,
    pub extremality: ExtremalityTolerances,
    pub drift_tolerance: Option<f64>,
    /// Produce currents even when the invariance stage fails.
    pub force: bool,
    /// Repeat every integration with half the step and report drift ratios.
    pub halving: bool,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            identity: IdentityConfig::default(),
            steps: 1000,
            samples_per_node: 20,
            extremality: ExtremalityTolerances::default(),
            drift_tolerance: None,
            force: false,
            halving: false,
            out: None,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: &str| Err(CliError::Usage(m.to_string()));
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if self.identity.trials == 0 || !positive(self.identity.tol) {
            return bad("--trials and --tol must be positive");
        }
        if self.steps < 2 {
            return bad("--steps must be at least 2");
        }
        if self.samples_per_node == 0 {
            return bad("--samples must be positive");
        }
        let t = &self.extremality;
        if !(positive(t.adjoint) && positive(t.maximality) && positive(t.dhdt)) || self.drift_tolerance.is_some_and(|d| !positive(d)) {
            return bad("tolerances must be positive");
        }
        Ok(())
    }
}

/// A document and the label it is reported under.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Input {
    pub label: String,
    pub text: String,
}

impl Input {
    pub fn read(path: &Path) -> Result<Input, CliError> {
        let label = path.display().to_string();
        let text = fs::read_to_string(path).map_err(|e| CliError::Io { path: label.clone(), message: e.to_string() })?;
        Ok(Input { label, text })
    }

    pub fn inline(label: &str, text: &str) -> Input {
        Input { label: label.to_string(), text: text.to_string() }
    }

    fn digest(&self) -> String {
        Sha256::digest(self.text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// A file to write under `--out`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Run {
    pub report: RunReport,
    pub artifacts: Vec<Artifact>,
}

impl Run {
    /// Writes `report.json` and every artifact into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<(), CliError> {
        let io = |e: std::io::Error, p: &Path| CliError::Io { path: p.display().to_string(), message: e.to_string() };
        fs::create_dir_all(dir).map_err(|e| io(e, dir))?;
        let report = dir.join("report.json");
        fs::write(&report, self.report.to_json()).map_err(|e| io(e, &report))?;
        for a in &self.artifacts {
            let path = dir.join(&a.name);
            fs::write(&path, &a.contents).map_err(|e| io(e, &path))?;
        }
        Ok(())
    }
}

fn file_stem(name: &str) -> String {
    name.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect()
}

fn new_report(command: &str, cfg: &RunConfig, problem: &Input, symmetry: Option<&Input>, trajectories: Option<&Input>) -> RunReport {
    RunReport {
        tool: TOOL,
        version: VERSION,
        command: command.to_string(),
        config: ConfigEcho {
            problem: problem.label.clone(),
            symmetry: symmetry.map(|i| i.label.clone()),
            trajectories: trajectories.map(|i| i.label.clone()),
            identity: cfg.identity,
            steps: cfg.steps,
            samples_per_node: cfg.samples_per_node,
            extremality: cfg.extremality,
            drift_tolerance: cfg.drift_tolerance,
            force: cfg.force,
            halving: cfg.halving,
        },
        digests: Digests {
            problem: problem.digest(),
            symmetry: symmetry.map(Input::digest),
            trajectories: trajectories.map(Input::digest),
        },
        invariance: None,
        gate_overridden: false,
        currents: None,
        trajectories: Vec::new(),
        conservation: None,
        halving: None,
        notes: Vec::new(),
        overall: Outcome::Fail,
    }
}

fn load_pair(problem: &Input, symmetry: &Input) -> Result<(OcpProblem, GaugeSymmetry), CliError> {
    let p = docs::load_problem(&problem.label, &problem.text)?;
    let s = docs::load_symmetry(&symmetry.label, &symmetry.text, &p)?;
    Ok((p, s))
}

/// Runs the invariance stage and, when it passes or `force` is set, builds
/// the currents.
fn symbolic_stages(
    report: &mut RunReport,
    problem: &OcpProblem,
    sym: &GaugeSymmetry,
    cfg: &RunConfig,
) -> Result<Option<Vec<NoetherCurrent>>, CliError> {
    let inv = check_invariance(sym, problem, &cfg.identity).map_err(|e| CliError::Symbolic(e.to_string()))?;
    let gate = inv.overall;
    report.invariance = Some(inv);
    if !gate && !cfg.force {
        report.notes.push("skipped currents: the invariance stage failed (use --force to override)".into());
        return Ok(None);
    }
    report.gate_overridden = !gate;
    let currents = generate_currents_with(sym, problem, &cfg.identity).map_err(|e| CliError::Symbolic(e.to_string()))?;
    report.currents = Some(currents_report(&currents));
    Ok(Some(currents))
}

pub fn cmd_check(problem: &Input, symmetry: &Input, cfg: &RunConfig) -> Result<Run, CliError> {
    cfg.validate()?;
    let (p, s) = load_pair(problem, symmetry)?;
    let mut report = new_report("check", cfg, problem, Some(symmetry), None);
    report.invariance = Some(check_invariance(&s, &p, &cfg.identity).map_err(|e| CliError::Symbolic(e.to_string()))?);
    report.settle();
    Ok(Run { report, artifacts: vec![] })
}

pub fn cmd_currents(problem: &Input, symmetry: &Input, cfg: &RunConfig) -> Result<Run, CliError> {
    cfg.validate()?;
    let (p, s) = load_pair(problem, symmetry)?;
    let mut report = new_report("currents", cfg, problem, Some(symmetry), None);
    symbolic_stages(&mut report, &p, &s, cfg)?;
    report.settle();
    Ok(Run { report, artifacts: vec![] })
}

fn integrate_all(
    problem: &OcpProblem,
    specs: &[TrajectorySpec],
    steps: usize,
    cfg: &RunConfig,
) -> (Vec<TrajectoryOutcome>, Vec<Option<Trajectory>>) {
    let mut outcomes = Vec::with_capacity(specs.len());
    let mut trajectories = Vec::with_capacity(specs.len());
    for spec in specs {
        let mut outcome = TrajectoryOutcome {
            name: spec.name.clone(),
            psi0: spec.psi0,
            normal: spec.psi0 != 0.0,
            nodes: 0,
            step: (problem.b - problem.a) / steps as f64,
            j_value: None,
            breakpoint_nodes: vec![],
            integration_error: None,
            extremality: None,
            passed: false,
        };
        match integrate_extremal(problem, &spec.law, &spec.x0, spec.psi0, &spec.psi, steps) {
            Ok(traj) => {
                let ext = check_extremality(problem, &traj, cfg.samples_per_node, cfg.identity.seed);
                outcome.passed = ext.passes(&cfg.extremality);
                outcome.nodes = traj.len();
                outcome.step = traj.step;
                outcome.j_value = Some(traj.j_value);
                outcome.breakpoint_nodes = traj.breakpoint_nodes.clone();
                outcome.extremality = Some(ext);
                trajectories.push(Some(traj));
            }
            Err(e) => {
                outcome.integration_error = Some(e.to_string());
                trajectories.push(None);
            }
        }
        outcomes.push(outcome);
    }
    (outcomes, trajectories)
}

/// Runs the suite over the trajectories that integrated; the returned names
/// are indexed like the suite's trajectory indices.
fn conservation_over(
    currents: &[NoetherCurrent],
    specs: &[TrajectorySpec],
    trajectories: &[Option<Trajectory>],
    tolerance: Option<f64>,
) -> (ConservationSuite, Vec<String>, Vec<Vec<f64>>) {
    let mut names = Vec::new();
    let mut integrated = Vec::new();
    for (s, t) in specs.iter().zip(trajectories) {
        if let Some(t) = t {
            names.push(s.name.clone());
            integrated.push(t.clone());
        }
    }
    let suite = conservation_suite(currents, &integrated, tolerance);
    (suite, names, integrated.into_iter().map(|t| t.times).collect())
}

fn summarize(suite: &ConservationSuite, names: &[String]) -> ConservationSummary {
    let entries = suite
        .pairs
        .iter()
        .map(|p| {
            let r = p.record.as_ref();
            ConservationEntry {
                trajectory: names[p.trajectory].clone(),
                i: p.i,
                j: p.j,
                trivial: r.is_some_and(|r| r.trivial),
                mean: r.map(|r| r.mean),
                drift: r.map(|r| r.drift),
                relative_drift: r.map(|r| r.relative_drift),
                tolerance: r.map(|r| r.tolerance),
                conserved: p.conserved(),
                error: p.error.clone(),
            }
        })
        .collect();
    ConservationSummary { entries, worst: suite.worst, passed: suite.passed, warnings: suite.warnings.clone() }
}

fn trajectory_artifacts(specs: &[TrajectorySpec], trajectories: &[Option<Trajectory>]) -> Vec<Artifact> {
    specs
        .iter()
        .zip(trajectories)
        .filter_map(|(s, t)| t.as_ref().map(|t| Artifact { name: format!("{}.csv", file_stem(&s.name)), contents: t.to_csv() }))
        .collect()
}

pub fn cmd_verify(problem: &Input, symmetry: &Input, trajectories: &Input, cfg: &RunConfig) -> Result<Run, CliError> {
    cfg.validate()?;
    let (p, s) = load_pair(problem, symmetry)?;
    let specs = docs::load_trajectories(&trajectories.label, &trajectories.text, &p)?;
    let mut report = new_report("verify", cfg, problem, Some(symmetry), Some(trajectories));
    let currents = symbolic_stages(&mut report, &p, &s, cfg)?;

    let (outcomes, trajs) = integrate_all(&p, &specs, cfg.steps, cfg);
    report.trajectories = outcomes;
    let mut artifacts = trajectory_artifacts(&specs, &trajs);

    if let Some(currents) = &currents {
        let (suite, names, times) = conservation_over(currents, &specs, &trajs, cfg.drift_tolerance);
        for pair in &suite.pairs {
            if let Some(r) = &pair.record {
                artifacts.push(Artifact {
                    name: format!("{}.C{}-{}.csv", file_stem(&names[pair.trajectory]), pair.i, pair.j),
                    contents: r.to_csv(&times[pair.trajectory]),
                });
            }
        }
        if cfg.halving {
            let fine_steps = 2 * cfg.steps;
            let (_, fine_trajs) = integrate_all(&p, &specs, fine_steps, cfg);
            let (fine, fine_names, _) = conservation_over(currents, &specs, &fine_trajs, cfg.drift_tolerance);
            let mut entries = Vec::new();
            for coarse in &suite.pairs {
                let name = &names[coarse.trajectory];
                let matching = fine.pairs.iter().find(|f| &fine_names[f.trajectory] == name && f.i == coarse.i && f.j == coarse.j);
                if let (Some(c), Some(f)) = (coarse.record.as_ref(), matching.and_then(|f| f.record.as_ref())) {
                    let check = HalvingCheck::new(c.drift, f.drift, DRIFT_FLOOR);
                    let consistent = check.consistent_with(HALVING_WINDOW.0, HALVING_WINDOW.1);
                    entries.push(HalvingEntry { trajectory: name.clone(), i: coarse.i, j: coarse.j, check, consistent });
                }
            }
            let passed = entries.iter().all(|e| e.consistent);
            report.halving = Some(HalvingSummary { fine_steps, floor: DRIFT_FLOOR, ratio_range: HALVING_WINDOW, entries, passed });
        }
        report.conservation = Some(summarize(&suite, &names));
    }
    report.settle();
    Ok(Run { report, artifacts })
}

pub fn cmd_simulate(problem: &Input, trajectories: &Input, cfg: &RunConfig) -> Result<Run, CliError> {
    cfg.validate()?;
    let p = docs::load_problem(&problem.label, &problem.text)?;
    let specs = docs::load_trajectories(&trajectories.label, &trajectories.text, &p)?;
    let mut report = new_report("simulate", cfg, problem, None, Some(trajectories));
    let (outcomes, trajs) = integrate_all(&p, &specs, cfg.steps, cfg);
    report.trajectories = outcomes;
    report.settle();
    Ok(Run { report, artifacts: trajectory_artifacts(&specs, &trajs) })
}
