//! Colored condition-event net fragments `(S, S_I, S_O, E, F)`.
//!
//! Internal states hold at most one token. Input states (`S_I`) receive
//! tokens only through [`NetFragment::inject`] and output states (`S_O`) give
//! them up only through [`NetFragment::extract`]; these are the channels for
//! guesses entered by a scientist and results returned by instruments.
//!
//! An event is enabled when every input state holds a token, every output
//! state is empty and the color function is defined on the input colors.

mod analysis;
mod color;
mod couple;
mod fsm;
mod io;
mod morphism;
mod sim;

pub use analysis::{analyze, reduced_net, Analysis, ClassicalNet, Transition};
pub use color::{Color, ColorFn, ColorSet, TableRow};
pub use couple::{couple, Side, SignalArc};
pub use fsm::{fsm_fragment, FsmSpec};
pub use io::{NetDocument, NetFile};
pub use morphism::{coarsen_colors, coarsen_marking, refine_colors, Partition, Refinement};
pub use sim::{Injection, Scheduler, SimulationOutcome, Simulator, TraceEntry};

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetError {
    #[error("invalid net: {0}")]
    Invalid(String),
    #[error("unknown state {0:?}")]
    UnknownState(String),
    #[error("unknown event {0:?}")]
    UnknownEvent(String),
    #[error("event {0:?} is not enabled")]
    NotEnabled(String),
    #[error("state {0:?} already holds a token")]
    CapacityViolation(String),
    #[error("state {0:?} holds no token")]
    NoToken(String),
    #[error("color {color:?} is not allowed on state {state:?}")]
    ColorNotAllowed { state: String, color: Color },
    #[error("state {0:?} is not an input state")]
    NotAnInputState(String),
    #[error("state {0:?} is not an output state")]
    NotAnOutputState(String),
    #[error("bad partition: {0}")]
    BadPartition(String),
    #[error("bad signal phase: {0}")]
    BadPhase(String),
    #[error("reachable state space exceeds {0} markings")]
    StateSpaceTooLarge(usize),
    #[error("malformed net file: {0}")]
    Malformed(String),
}

pub type Result<T, E = NetError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StateKind {
    Internal,
    Input,
    Output,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct State {
    pub id: String,
    pub kind: StateKind,
    pub colors: ColorSet,
}

/// Clock phase of an event in an FSM fragment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Tick,
    Tock,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub id: String,
    /// Input arcs, in the order the color function sees them.
    pub inputs: Vec<usize>,
    pub outputs: Vec<usize>,
    pub color_fn: ColorFn,
    pub phase: Option<Phase>,
}

/// At most one token per state, indexed like [`NetFragment::states`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Marking(Vec<Option<Color>>);

impl Marking {
    pub fn empty(net: &NetFragment) -> Self {
        Marking(vec![None; net.states.len()])
    }

    pub fn token(&self, state: usize) -> Option<&Color> {
        self.0.get(state).and_then(Option::as_ref)
    }

    pub fn tokens(&self) -> &[Option<Color>] {
        &self.0
    }

    pub fn count(&self) -> usize {
        self.0.iter().filter(|t| t.is_some()).count()
    }
}

/// Result of firing one event.
#[derive(Debug, Clone, PartialEq)]
pub struct Firing {
    pub marking: Marking,
    pub consumed: Vec<Color>,
    pub produced: Vec<Color>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetFragment {
    states: Vec<State>,
    events: Vec<Event>,
}

impl NetFragment {
    /// Validates disjointness of ids, arc directions, arc counts, the absence
    /// of self-loops and color-function arities.
    pub fn new(states: Vec<State>, events: Vec<Event>) -> Result<Self> {
        let mut seen = HashSet::new();
        for s in &states {
            if !seen.insert(s.id.as_str()) {
                return Err(NetError::Invalid(format!("duplicate state id {:?}", s.id)));
            }
        }
        let mut seen_events = HashSet::new();
        for e in &events {
            if !seen_events.insert(e.id.as_str()) {
                return Err(NetError::Invalid(format!("duplicate event id {:?}", e.id)));
            }
            if e.inputs.is_empty() || e.outputs.is_empty() {
                return Err(NetError::Invalid(format!(
                    "event {:?} needs input and output arcs",
                    e.id
                )));
            }
            for &i in &e.inputs {
                let s = states
                    .get(i)
                    .ok_or_else(|| NetError::Invalid(format!("event {:?} has a dangling input arc", e.id)))?;
                if s.kind == StateKind::Output {
                    return Err(NetError::Invalid(format!(
                        "output state {:?} cannot feed event {:?}",
                        s.id, e.id
                    )));
                }
            }
            for &o in &e.outputs {
                let s = states
                    .get(o)
                    .ok_or_else(|| NetError::Invalid(format!("event {:?} has a dangling output arc", e.id)))?;
                if s.kind == StateKind::Input {
                    return Err(NetError::Invalid(format!(
                        "event {:?} cannot write input state {:?}",
                        e.id, s.id
                    )));
                }
                if e.inputs.contains(&o) {
                    return Err(NetError::Invalid(format!(
                        "event {:?} has a self-loop on {:?}",
                        e.id, s.id
                    )));
                }
            }
            let distinct_in: HashSet<_> = e.inputs.iter().collect();
            let distinct_out: HashSet<_> = e.outputs.iter().collect();
            if distinct_in.len() != e.inputs.len() || distinct_out.len() != e.outputs.len() {
                return Err(NetError::Invalid(format!("event {:?} repeats an arc", e.id)));
            }
            if let Some(n) = e.color_fn.output_arity(e.inputs.len()) {
                if n != e.outputs.len() {
                    return Err(NetError::Invalid(format!(
                        "color function of {:?} yields {n} colors for {} output arcs",
                        e.id,
                        e.outputs.len()
                    )));
                }
            }
            if let ColorFn::Table { rows } = &e.color_fn {
                for row in rows {
                    let ok_in = row.input.len() == e.inputs.len()
                        && row
                            .input
                            .iter()
                            .zip(&e.inputs)
                            .all(|(c, &s)| states[s].colors.contains(c));
                    let ok_out = row.output.len() == e.outputs.len()
                        && row
                            .output
                            .iter()
                            .zip(&e.outputs)
                            .all(|(c, &s)| states[s].colors.contains(c));
                    if !ok_in || !ok_out {
                        return Err(NetError::Invalid(format!(
                            "table row {:?} -> {:?} of {:?} does not match its arcs",
                            row.input, row.output, e.id
                        )));
                    }
                }
            }
        }
        Ok(Self { states, events })
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn state_index(&self, id: &str) -> Result<usize> {
        self.states
            .iter()
            .position(|s| s.id == id)
            .ok_or_else(|| NetError::UnknownState(id.to_string()))
    }

    pub fn event_index(&self, id: &str) -> Result<usize> {
        self.events
            .iter()
            .position(|e| e.id == id)
            .ok_or_else(|| NetError::UnknownEvent(id.to_string()))
    }

    /// Marking with the given tokens on any kind of state.
    pub fn marking(&self, tokens: &[(&str, Color)]) -> Result<Marking> {
        let mut m = Marking::empty(self);
        for (id, color) in tokens {
            let i = self.state_index(id)?;
            if !self.states[i].colors.contains(color) {
                return Err(NetError::ColorNotAllowed {
                    state: id.to_string(),
                    color: color.clone(),
                });
            }
            if m.0[i].is_some() {
                return Err(NetError::CapacityViolation(id.to_string()));
            }
            m.0[i] = Some(color.clone());
        }
        Ok(m)
    }

    fn output_colors(&self, e: &Event, m: &Marking) -> Option<(Vec<Color>, Vec<Color>)> {
        let inputs: Vec<Color> = e.inputs.iter().map(|&i| m.0[i].clone()).collect::<Option<_>>()?;
        if e.outputs.iter().any(|&o| m.0[o].is_some()) {
            return None;
        }
        let outputs = e.color_fn.apply(&inputs)?;
        let fits = outputs.len() == e.outputs.len()
            && outputs
                .iter()
                .zip(&e.outputs)
                .all(|(c, &o)| self.states[o].colors.contains(c));
        fits.then_some((inputs, outputs))
    }

    pub fn is_enabled(&self, event: usize, m: &Marking) -> bool {
        self.events
            .get(event)
            .is_some_and(|e| self.output_colors(e, m).is_some())
    }

    /// Indices of enabled events, ascending.
    pub fn enabled_events(&self, m: &Marking) -> Vec<usize> {
        (0..self.events.len()).filter(|&e| self.is_enabled(e, m)).collect()
    }

    pub fn fire(&self, m: &Marking, event: usize) -> Result<Firing> {
        let e = self
            .events
            .get(event)
            .ok_or_else(|| NetError::UnknownEvent(event.to_string()))?;
        let (consumed, produced) = self
            .output_colors(e, m)
            .ok_or_else(|| NetError::NotEnabled(e.id.clone()))?;
        let mut next = m.clone();
        for &i in &e.inputs {
            next.0[i] = None;
        }
        for (&o, c) in e.outputs.iter().zip(&produced) {
            next.0[o] = Some(c.clone());
        }
        Ok(Firing {
            marking: next,
            consumed,
            produced,
        })
    }

    pub fn fire_by_id(&self, m: &Marking, id: &str) -> Result<Firing> {
        self.fire(m, self.event_index(id)?)
    }

    /// Places a token on an input state from outside the net.
    pub fn inject(&self, m: &Marking, state: &str, color: Color) -> Result<Marking> {
        let i = self.state_index(state)?;
        let s = &self.states[i];
        if s.kind != StateKind::Input {
            return Err(NetError::NotAnInputState(state.to_string()));
        }
        if m.0[i].is_some() {
            return Err(NetError::CapacityViolation(state.to_string()));
        }
        if !s.colors.contains(&color) {
            return Err(NetError::ColorNotAllowed {
                state: state.to_string(),
                color,
            });
        }
        let mut next = m.clone();
        next.0[i] = Some(color);
        Ok(next)
    }

    /// Removes the token from an output state.
    pub fn extract(&self, m: &Marking, state: &str) -> Result<(Marking, Color)> {
        let i = self.state_index(state)?;
        if self.states[i].kind != StateKind::Output {
            return Err(NetError::NotAnOutputState(state.to_string()));
        }
        let mut next = m.clone();
        let color = next.0[i].take().ok_or_else(|| NetError::NoToken(state.to_string()))?;
        Ok((next, color))
    }
}

/// Event declared by state ids, resolved when the builder finishes.
type PendingEvent = (String, Vec<String>, Vec<String>, ColorFn, Option<Phase>);

/// Incremental construction by state id.
#[derive(Debug, Default)]
pub struct NetBuilder {
    states: Vec<State>,
    events: Vec<PendingEvent>,
}

impl NetBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn state(mut self, id: &str, kind: StateKind, colors: ColorSet) -> Self {
        self.states.push(State {
            id: id.to_string(),
            kind,
            colors,
        });
        self
    }

    pub fn internal(self, id: &str, colors: ColorSet) -> Self {
        self.state(id, StateKind::Internal, colors)
    }

    pub fn event(
        mut self,
        id: &str,
        inputs: &[&str],
        outputs: &[&str],
        color_fn: ColorFn,
        phase: Option<Phase>,
    ) -> Self {
        self.events.push((
            id.to_string(),
            inputs.iter().map(|s| s.to_string()).collect(),
            outputs.iter().map(|s| s.to_string()).collect(),
            color_fn,
            phase,
        ));
        self
    }

    pub fn build(self) -> Result<NetFragment> {
        let index = |id: &str| {
            self.states
                .iter()
                .position(|s| s.id == id)
                .ok_or_else(|| NetError::UnknownState(id.to_string()))
        };
        let mut events = Vec::with_capacity(self.events.len());
        for (id, ins, outs, color_fn, phase) in &self.events {
            events.push(Event {
                id: id.clone(),
                inputs: ins.iter().map(|s| index(s)).collect::<Result<_>>()?,
                outputs: outs.iter().map(|s| index(s)).collect::<Result<_>>()?,
                color_fn: color_fn.clone(),
                phase: *phase,
            });
        }
        NetFragment::new(self.states, events)
    }
}
