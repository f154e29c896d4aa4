//! A classical process-control computer in simulation: a clocked Turing
//! machine, instruments that hide their quantum model behind bit records,
//! parsers that turn bits into outcomes, and experiments that calibrate gate
//! commands and probe how many trials distinguish nearby gates.

mod calibration;
mod gate_error;
mod instrument;
mod parser;
mod sample_size;
mod tmp;

pub use calibration::{
    basis_measurement, rotation, rotation_instrument, rotation_model, run_calibration, Axis, Basis, CalibrationConfig,
    CalibrationExperiment, CalibrationReport, RotationFamily, StageReport, BASES,
};
pub use gate_error::{gate_error_trials, gate_sequence_error, GateErrorReport};
pub use instrument::{Access, BitRecord, DetectorShape, Instrument};
pub use parser::{OutcomeParser, ParsePolicy};
pub use sample_size::{
    least_squares_slope, model_pair, power_at, sample_size_experiment, SampleSizeConfig, SampleSizeReport,
    SampleSizeRow,
};
pub use tmp::{run_program, tape_token, CoupledPair, Effect, Mode, Move, Program, Rule, RunOutput, StepOutput, Tmp};

use thiserror::Error;

use crate::petri_net::{Color, NetError};
use crate::qm_model::QmError;
use crate::stat_distance::StatError;
use crate::Command;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CpcError {
    #[error("command {0} is not accepted by the instrument")]
    CommandNotInSet(Command),
    #[error("record has {found} bits, expected {expected}")]
    BadRecordShape { expected: usize, found: usize },
    #[error("invalid detector shape: {0}")]
    InvalidShape(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("bad program: {0}")]
    BadProgram(String),
    #[error("step budget of {steps} exhausted")]
    Timeout { steps: usize, partial: Vec<Color> },
    #[error("gate {0} is not unitary")]
    NotUnitary(usize),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Model(#[from] QmError),
    #[error(transparent)]
    Stat(#[from] StatError),
    #[error(transparent)]
    Net(#[from] NetError),
}

pub type Result<T, E = CpcError> = std::result::Result<T, E>;
