//! Simulation laboratory for command-parameterized quantum models.
//!
//! * [`qm_model`]: models `(|v⟩, U, M)_B`, unitary equivalence and models that
//!   fit any outcome record exactly.
//! * [`stat_distance`]: statistical distance between outcome distributions and
//!   the sample sizes needed to tell models apart.
//! * [`model_lattice`]: finite sets of models, narrowing predicates and
//!   best-fit selection.
//! * [`petri_net`]: colored condition-event net fragments with exogenous
//!   input and output states.
//! * [`cpc_sim`]: a clocked Turing machine for process control, a simulated
//!   instrument, outcome parsing and the test/calibrate/run harness.

pub mod command;
pub mod cpc_sim;
pub mod linalg;
pub mod model_lattice;
pub mod petri_net;
pub mod qm_model;
pub mod stat_distance;

pub use command::{Command, CommandSet};
