//! Alternating between testing a gate command and adjusting it.
//!
//! The gate is a one-qubit rotation. A command is `b_v ∥ b_U(θ) ∥ b_M`: one
//! bit for the prepared state `|0⟩`, a quantized rotation angle `θ`, and one
//! bit choosing the `Z` or `X` measurement basis. The harness believes that
//! command `θ` produces `R_y(θ)`; the instrument may disagree. Each precision
//! stage tests the current command against the target gate's predictions and,
//! on failure, searches for a better `θ` by coordinate descent with step
//! halving. The small mode net shipped with the crate decides what happens
//! next at each point.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::{CpcError, DetectorShape, Instrument, OutcomeParser, ParsePolicy, Result};
use crate::linalg::{basis, CMatrix, CVector, C64};
use crate::petri_net::{Color, Marking, NetDocument, NetFragment, TraceEntry};
use crate::qm_model::{Eigenspace, HilbertSpace, MeasurementFn, Model, Spectral, StateFn, UnitaryFn};
use crate::stat_distance::{min_sample_size, weighted_record_distance, CommandWeights};
use crate::Command;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    Z,
    X,
}

pub const BASES: [Basis; 2] = [Basis::Z, Basis::X];

/// `exp(−i φ σ/2)` for the Pauli matrix of `axis`.
pub fn rotation(axis: Axis, phi: f64) -> CMatrix {
    let c = C64::new((phi / 2.0).cos(), 0.0);
    let s = (phi / 2.0).sin();
    match axis {
        Axis::Y => CMatrix::from_row_slice(2, 2, &[c, C64::new(-s, 0.0), C64::new(s, 0.0), c]),
        Axis::X => CMatrix::from_row_slice(2, 2, &[c, C64::new(0.0, -s), C64::new(0.0, -s), c]),
    }
}

/// Measurement in `basis`. The first outcome carries value 2 and the second
/// value 1, which is what per-record parsing reads off a one-hot record from
/// two detectors.
pub fn basis_measurement(b: Basis) -> Spectral {
    let (first, second) = match b {
        Basis::Z => (basis(2, 0), basis(2, 1)),
        Basis::X => {
            let h = C64::new(FRAC_1_SQRT_2, 0.0);
            (CVector::from_vec(vec![h, h]), CVector::from_vec(vec![h, -h]))
        }
    };
    Spectral::new(vec![
        Eigenspace {
            value: 2.0,
            projector: &first * first.adjoint(),
        },
        Eigenspace {
            value: 1.0,
            projector: &second * second.adjoint(),
        },
    ])
    .expect("orthonormal basis")
}

/// Quantized angle commands over `[−π, π)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RotationFamily {
    pub theta_bits: usize,
}

impl RotationFamily {
    pub fn new(theta_bits: usize) -> Result<Self> {
        if !(1..=20).contains(&theta_bits) {
            return Err(CpcError::Config(format!("theta_bits = {theta_bits} is outside 1..=20")));
        }
        Ok(Self { theta_bits })
    }

    pub fn levels(&self) -> u64 {
        1 << self.theta_bits
    }

    pub fn resolution(&self) -> f64 {
        2.0 * PI / self.levels() as f64
    }

    pub fn index(&self, theta: f64) -> u64 {
        let k = ((theta + PI) / self.resolution()).round() as i64;
        k.rem_euclid(self.levels() as i64) as u64
    }

    pub fn angle(&self, index: u64) -> f64 {
        -PI + index as f64 * self.resolution()
    }

    /// Nearest representable angle.
    pub fn snap(&self, theta: f64) -> f64 {
        self.angle(self.index(theta))
    }

    pub fn command(&self, theta: f64, b: Basis) -> Command {
        let prep = Command::from_binary("0").expect("literal");
        let meas = Command::from_binary(if b == Basis::Z { "0" } else { "1" }).expect("literal");
        prep.concat(&Command::from_uint(self.index(theta), self.theta_bits))
            .concat(&meas)
    }
}

/// Model in which every command of `family` prepares `|0⟩`, applies
/// `R_axis(θ + offset)` and measures in its basis.
pub fn rotation_model(family: &RotationFamily, axis: Axis, offset: f64) -> Result<Model> {
    let mut states = IndexMap::new();
    let mut unitaries = IndexMap::new();
    let mut measurements = IndexMap::new();
    for k in 0..family.levels() {
        let theta = family.angle(k);
        for b in BASES {
            let cmd = family.command(theta, b);
            states.insert(cmd.clone(), basis(2, 0));
            unitaries.insert(cmd.clone(), rotation(axis, theta + offset));
            measurements.insert(cmd, basis_measurement(b));
        }
    }
    Ok(Model::new(
        HilbertSpace::new(2)?,
        StateFn::new(states)?,
        UnitaryFn::new(unitaries)?,
        MeasurementFn::new(measurements),
    )?)
}

/// Instrument whose rotation about `axis` is off by `offset` from what the
/// command asks for. Records come from two detectors over one interval.
pub fn rotation_instrument(family: &RotationFamily, axis: Axis, offset: f64, seed: u64) -> Result<Instrument> {
    Instrument::new(rotation_model(family, axis, offset)?, DetectorShape::new(2, 1)?, seed)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationConfig {
    /// The target gate is `R_y(target_angle)`.
    pub target_angle: f64,
    #[serde(default = "default_theta_bits")]
    pub theta_bits: usize,
    /// Strictly decreasing target precisions.
    pub epsilon_schedule: Vec<f64>,
    /// Trials per basis per estimate are `⌈budget_factor · ε⁻²⌉`.
    #[serde(default = "default_budget_factor")]
    pub budget_factor: f64,
    /// Largest first step of the search, in radians.
    #[serde(default = "default_initial_step")]
    pub initial_step: f64,
    /// Search iterations per adjustment.
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    /// Adjustments allowed per stage before the stage fails.
    #[serde(default = "default_max_rounds")]
    pub max_rounds: usize,
    /// Weights of the `Z` and `X` commands in the distance; equal by default.
    #[serde(default = "default_weights")]
    pub weights: [f64; 2],
}

fn default_theta_bits() -> usize {
    12
}
fn default_budget_factor() -> f64 {
    4.0
}
fn default_initial_step() -> f64 {
    0.5
}
fn default_max_iterations() -> usize {
    40
}
fn default_max_rounds() -> usize {
    3
}
fn default_weights() -> [f64; 2] {
    [0.5, 0.5]
}

impl CalibrationConfig {
    pub fn new(target_angle: f64, epsilon_schedule: Vec<f64>) -> Self {
        Self {
            target_angle,
            theta_bits: default_theta_bits(),
            epsilon_schedule,
            budget_factor: default_budget_factor(),
            initial_step: default_initial_step(),
            max_iterations: default_max_iterations(),
            max_rounds: default_max_rounds(),
            weights: default_weights(),
        }
    }

    pub fn budget(&self, epsilon: f64) -> u64 {
        (self.budget_factor * epsilon.powi(-2)).ceil() as u64
    }

    pub fn validate(&self) -> Result<()> {
        let schedule = &self.epsilon_schedule;
        if schedule.is_empty() {
            return Err(CpcError::Config("empty precision schedule".into()));
        }
        if schedule.windows(2).any(|w| w[1] >= w[0]) {
            return Err(CpcError::Config("precision schedule must strictly decrease".into()));
        }
        for &eps in schedule {
            let floor = min_sample_size(eps).map_err(|_| CpcError::Config(format!("ε = {eps} is outside (0, 2]")))?;
            if self.budget(eps) < floor {
                return Err(CpcError::Config(format!(
                    "budget {} at ε = {eps} is below the minimum {floor}",
                    self.budget(eps)
                )));
            }
        }
        if !(self.initial_step > 0.0 && self.initial_step.is_finite()) || self.max_iterations == 0 {
            return Err(CpcError::Config(
                "search needs a positive step and iteration count".into(),
            ));
        }
        RotationFamily::new(self.theta_bits)?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub epsilon: f64,
    /// Trials per basis for each estimate.
    pub budget: u64,
    /// All trials spent in this stage, tests and search together.
    pub trials_used: u64,
    /// Distance found by the stage's last test.
    pub distance: f64,
    /// Command angle in force when the stage ended.
    pub theta: f64,
    pub passed: bool,
    /// Accepted search moves.
    pub moves: usize,
    pub adjustments: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub stages: Vec<StageReport>,
    pub final_theta: f64,
    /// Firings of the mode net, in order.
    pub mode_trace: Vec<TraceEntry>,
}

struct Harness<'a> {
    cfg: &'a CalibrationConfig,
    family: RotationFamily,
    parser: OutcomeParser,
    instrument: &'a mut Instrument,
    target: CMatrix,
    trials: u64,
}

impl Harness<'_> {
    /// Weighted distance between the target gate's predictions and what the
    /// instrument reports for command `theta`.
    fn estimate(&mut self, theta: f64, budget: u64) -> Result<f64> {
        let commands: Vec<Command> = BASES.iter().map(|&b| self.family.command(theta, b)).collect();
        let mut record = crate::qm_model::OutcomeRecord::new();
        for cmd in &commands {
            let raw = self.instrument.measure(cmd, budget)?;
            self.parser.parse_into(&mut record, cmd, &raw)?;
            self.trials += budget;
        }
        let prediction = Model::new(
            HilbertSpace::new(2)?,
            StateFn::new(commands.iter().map(|c| (c.clone(), basis(2, 0))).collect())?,
            UnitaryFn::constant(&commands, self.target.clone()),
            MeasurementFn::new(
                commands
                    .iter()
                    .zip(BASES)
                    .map(|(c, b)| (c.clone(), basis_measurement(b)))
                    .collect(),
            ),
        )?;
        let weights = CommandWeights::new(commands.iter().cloned().zip(self.cfg.weights).collect())?;
        Ok(weighted_record_distance(&prediction, &record, &weights)?)
    }

    /// Coordinate descent on the single angle. The current point is
    /// re-estimated each round so that one lucky estimate cannot pin it.
    fn search(&mut self, theta: f64, epsilon: f64, budget: u64) -> Result<(f64, usize)> {
        let mut theta = theta;
        let mut step = self.cfg.initial_step.min(8.0 * epsilon);
        let min_step = (epsilon / 4.0).max(self.family.resolution());
        let mut moves = 0;
        for _ in 0..self.cfg.max_iterations {
            if step < min_step {
                break;
            }
            let here = self.estimate(theta, budget)?;
            let up = self.family.snap(theta + step);
            let down = self.family.snap(theta - step);
            let d_up = self.estimate(up, budget)?;
            let d_down = self.estimate(down, budget)?;
            let (best, d_best) = if d_up <= d_down { (up, d_up) } else { (down, d_down) };
            if d_best < here {
                theta = best;
                moves += 1;
            } else {
                step /= 2.0;
            }
        }
        Ok((theta, moves))
    }
}

struct ModeNet {
    net: NetFragment,
    marking: Marking,
    trace: Vec<TraceEntry>,
}

impl ModeNet {
    fn fire(&mut self, event: &str) -> Result<()> {
        let f = self.net.fire_by_id(&self.marking, event)?;
        self.marking = f.marking;
        self.trace.push(TraceEntry {
            step: self.trace.len(),
            event: event.to_string(),
            consumed: f.consumed,
            produced: f.produced,
            emitted: Vec::new(),
        });
        Ok(())
    }

    fn verdict(&mut self, passed: bool) -> Result<()> {
        let color = Color::str(if passed { "pass" } else { "fail" });
        self.marking = self.net.inject(&self.marking, "verdict", color)?;
        self.fire(if passed { "accept" } else { "reject" })?;
        if passed {
            let (m, c) = self.net.extract(&self.marking, "stage_done")?;
            self.marking = m;
            if let Some(last) = self.trace.last_mut() {
                last.emitted.push(("stage_done".into(), c));
            }
        }
        Ok(())
    }
}

/// Runs every stage of the schedule against `instrument`, which is reached
/// only through measurements.
pub fn run_calibration(cfg: &CalibrationConfig, instrument: &mut Instrument) -> Result<CalibrationReport> {
    cfg.validate()?;
    let family = RotationFamily::new(cfg.theta_bits)?;
    let mut h = Harness {
        cfg,
        family,
        parser: OutcomeParser::new(ParsePolicy::PerRecord, instrument.shape()),
        instrument,
        target: rotation(Axis::Y, cfg.target_angle),
        trials: 0,
    };
    let doc = NetDocument::calibration_modes();
    let mut modes = ModeNet {
        marking: doc.initial,
        net: doc.net,
        trace: Vec::new(),
    };
    // The harness trusts its gate model at first: command θ* for gate R_y(θ*).
    let mut theta = family.snap(cfg.target_angle);
    let mut stages = Vec::new();
    for &epsilon in &cfg.epsilon_schedule {
        let budget = cfg.budget(epsilon);
        let start_trials = h.trials;
        let mut moves = 0;
        let mut adjustments = 0;
        let (distance, passed) = loop {
            modes.fire("test")?;
            let d = h.estimate(theta, budget)?;
            let passed = d <= epsilon / 2.0;
            modes.verdict(passed)?;
            if passed {
                break (d, true);
            }
            if adjustments == cfg.max_rounds {
                modes.fire("adjust")?;
                break (d, false);
            }
            modes.fire("adjust")?;
            let (t, m) = h.search(theta, epsilon, budget)?;
            theta = t;
            moves += m;
            adjustments += 1;
        };
        stages.push(StageReport {
            epsilon,
            budget,
            trials_used: h.trials - start_trials,
            distance,
            theta,
            passed,
            moves,
            adjustments,
        });
    }
    Ok(CalibrationReport {
        stages,
        final_theta: theta,
        mode_trace: modes.trace,
    })
}

/// Harness settings plus the hidden behavior of the simulated instrument.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationExperiment {
    pub harness: CalibrationConfig,
    /// Axis the instrument actually rotates about.
    #[serde(default = "default_axis")]
    pub true_axis: Axis,
    /// Offset the instrument adds to every commanded angle.
    pub true_offset: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_axis() -> Axis {
    Axis::Y
}

impl CalibrationExperiment {
    pub fn run(&self) -> Result<CalibrationReport> {
        self.harness.validate()?;
        let family = RotationFamily::new(self.harness.theta_bits)?;
        let mut instrument = rotation_instrument(&family, self.true_axis, self.true_offset, self.seed)?;
        run_calibration(&self.harness, &mut instrument)
    }
}
