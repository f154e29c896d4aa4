//! Turing machine for process control.
//!
//! The machine is clocked: [`Tmp::tick`] reads one token from the scientist
//! and one from the instrument channel and updates the machine, and
//! [`Tmp::tock`] emits the latched output tokens. A machine holding no program
//! and fed only `Empty` tokens never changes.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{CpcError, Result};
use crate::petri_net::Color;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Move {
    #[serde(rename = "L")]
    Left,
    #[serde(rename = "R")]
    Right,
    #[default]
    #[serde(rename = "S")]
    Stay,
}

fn any() -> String {
    "*".to_string()
}

/// One row of a program table.
///
/// Patterns: `*` matches anything, `_` matches a blank cell or an `Empty`
/// token, `?` matches any non-empty token; anything else must match exactly.
/// Output templates `$in`, `$instr` and `$read` copy the scientist token, the
/// instrument token or the scanned symbol.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rule {
    pub state: String,
    #[serde(default = "any")]
    pub read: String,
    #[serde(default = "any")]
    pub input: String,
    #[serde(default = "any")]
    pub instr: String,
    pub next: String,
    /// `_` erases the cell.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub write: Option<String>,
    #[serde(default, rename = "move")]
    pub mv: Move,
    /// Token for the scientist.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    /// Token for the instrument channel.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
}

/// A special machine encoded as a table of rules. The first matching rule
/// fires; no matching rule halts the machine.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Program {
    pub start: String,
    #[serde(default)]
    pub halt: Vec<String>,
    pub rules: Vec<Rule>,
}

impl Program {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| CpcError::BadProgram(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("programs serialize")
    }

    /// Scientist token that installs this program.
    pub fn load_token(&self) -> Color {
        Color::Tuple(vec![Color::str("load"), Color::Str(self.to_json())])
    }
}

/// Scientist token that replaces the tape.
pub fn tape_token(cells: &str, head: i64) -> Color {
    Color::Tuple(vec![
        Color::str("tape"),
        Color::Tuple(cells.chars().map(|c| Color::Str(c.to_string())).collect()),
        Color::Int(head),
    ])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Idle,
    Running,
    Halted,
}

/// What one tick did. Every tick reports exactly one effect.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "effect", rename_all = "snake_case")]
pub enum Effect {
    Quiescent,
    Loaded,
    TapeSet,
    Started,
    Interrupted,
    Executed {
        rule: usize,
    },
    Halted {
        state: String,
    },
    /// The token was recognized as meaningless here and changed nothing.
    NoOp {
        reason: String,
    },
}

/// Tokens emitted by one tock.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepOutput {
    pub scientist: Color,
    pub instrument: Color,
    pub effect: Effect,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tmp {
    mode: Mode,
    program: Option<Program>,
    control: String,
    tape: BTreeMap<i64, String>,
    head: i64,
    latch_scientist: Color,
    latch_instrument: Color,
}

impl Default for Tmp {
    fn default() -> Self {
        Self::new()
    }
}

fn symbol(c: &Color) -> Option<String> {
    match c {
        Color::Empty => None,
        Color::Str(s) => Some(s.clone()),
        Color::Int(i) => Some(i.to_string()),
        other => Some(format!("{other:?}")),
    }
}

fn token_matches(pattern: &str, c: &Color) -> bool {
    match pattern {
        "*" => true,
        "_" => c.is_empty(),
        "?" => !c.is_empty(),
        p => symbol(c).as_deref() == Some(p),
    }
}

fn cell_matches(pattern: &str, cell: Option<&String>) -> bool {
    match pattern {
        "*" => true,
        "_" => cell.is_none(),
        p => cell.map(String::as_str) == Some(p),
    }
}

impl Tmp {
    /// Bare machine: no program, blank tape, head at 0.
    pub fn new() -> Self {
        Self {
            mode: Mode::Idle,
            program: None,
            control: "idle".to_string(),
            tape: BTreeMap::new(),
            head: 0,
            latch_scientist: Color::Empty,
            latch_instrument: Color::Empty,
        }
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn control(&self) -> &str {
        &self.control
    }

    pub fn head(&self) -> i64 {
        self.head
    }

    pub fn program(&self) -> Option<&Program> {
        self.program.as_ref()
    }

    /// Tape contents from the leftmost to the rightmost written cell, blanks
    /// shown as `_`.
    pub fn tape_string(&self) -> String {
        let (Some((&lo, _)), Some((&hi, _))) = (self.tape.first_key_value(), self.tape.last_key_value()) else {
            return String::new();
        };
        (lo..=hi)
            .map(|i| self.tape.get(&i).map_or("_", String::as_str).to_string())
            .collect()
    }

    /// SHA-256 over the written cells.
    pub fn memory_hash(&self) -> String {
        let mut h = Sha256::new();
        for (pos, sym) in &self.tape {
            h.update(pos.to_le_bytes());
            h.update((sym.len() as u64).to_le_bytes());
            h.update(sym.as_bytes());
        }
        hex::encode(h.finalize())
    }

    /// First clock phase: consume both input tokens and latch outputs.
    pub fn tick(&mut self, scientist: Color, instrument: Color) -> Effect {
        match &scientist {
            Color::Str(word) if word == "run" => {
                return match &self.program {
                    Some(p) => {
                        self.control = p.start.clone();
                        self.mode = Mode::Running;
                        Effect::Started
                    }
                    None => Effect::NoOp {
                        reason: "run without a program".into(),
                    },
                };
            }
            Color::Str(word) if word == "interrupt" => {
                return if self.mode == Mode::Running {
                    self.mode = Mode::Idle;
                    Effect::Interrupted
                } else {
                    Effect::NoOp {
                        reason: "nothing to interrupt".into(),
                    }
                };
            }
            Color::Tuple(items) if matches!(items.first(), Some(Color::Str(w)) if w == "load") => {
                return match items.as_slice() {
                    [_, Color::Str(text)] => match Program::from_json(text) {
                        Ok(p) => {
                            self.control = p.start.clone();
                            self.program = Some(p);
                            Effect::Loaded
                        }
                        Err(e) => Effect::NoOp { reason: e.to_string() },
                    },
                    _ => Effect::NoOp {
                        reason: "load needs one program text".into(),
                    },
                };
            }
            Color::Tuple(items) if matches!(items.first(), Some(Color::Str(w)) if w == "tape") => {
                return match items.as_slice() {
                    [_, Color::Tuple(cells), Color::Int(head)] => {
                        let parsed: Option<Vec<String>> =
                            cells.iter().map(|c| c.as_str().map(str::to_string)).collect();
                        match parsed {
                            Some(cells) => {
                                self.tape = cells
                                    .into_iter()
                                    .enumerate()
                                    .filter(|(_, s)| s != "_")
                                    .map(|(i, s)| (i as i64, s))
                                    .collect();
                                self.head = *head;
                                Effect::TapeSet
                            }
                            None => Effect::NoOp {
                                reason: "tape cells must be strings".into(),
                            },
                        }
                    }
                    _ => Effect::NoOp {
                        reason: "tape needs cells and a head position".into(),
                    },
                };
            }
            _ => {}
        }
        if self.mode == Mode::Running {
            return self.execute(&scientist, &instrument);
        }
        if scientist.is_empty() && instrument.is_empty() {
            Effect::Quiescent
        } else {
            Effect::NoOp {
                reason: format!("{:?} / {:?} ignored while {:?}", scientist, instrument, self.mode),
            }
        }
    }

    fn execute(&mut self, scientist: &Color, instrument: &Color) -> Effect {
        let Some(program) = &self.program else {
            self.mode = Mode::Idle;
            return Effect::NoOp {
                reason: "running without a program".into(),
            };
        };
        let cell = self.tape.get(&self.head).cloned();
        let found = program.rules.iter().position(|r| {
            r.state == self.control
                && cell_matches(&r.read, cell.as_ref())
                && token_matches(&r.input, scientist)
                && token_matches(&r.instr, instrument)
        });
        let Some(k) = found else {
            self.mode = Mode::Halted;
            return Effect::Halted {
                state: self.control.clone(),
            };
        };
        let rule = program.rules[k].clone();
        let halts = program.halt.contains(&rule.next);
        let render = |template: &Option<String>| -> Color {
            match template.as_deref() {
                None => Color::Empty,
                Some("$in") => scientist.clone(),
                Some("$instr") => instrument.clone(),
                Some("$read") => cell.clone().map_or(Color::Empty, Color::Str),
                Some(lit) => Color::str(lit),
            }
        };
        self.latch_scientist = render(&rule.output);
        self.latch_instrument = render(&rule.command);
        match rule.write.as_deref() {
            Some("_") => {
                self.tape.remove(&self.head);
            }
            Some(sym) => {
                self.tape.insert(self.head, sym.to_string());
            }
            None => {}
        }
        self.head += match rule.mv {
            Move::Left => -1,
            Move::Right => 1,
            Move::Stay => 0,
        };
        self.control = rule.next;
        if halts {
            self.mode = Mode::Halted;
        }
        Effect::Executed { rule: k }
    }

    /// Second clock phase: release the latched output tokens.
    pub fn tock(&mut self) -> (Color, Color) {
        (
            std::mem::replace(&mut self.latch_scientist, Color::Empty),
            std::mem::replace(&mut self.latch_instrument, Color::Empty),
        )
    }

    /// One full clock cycle.
    pub fn step(&mut self, scientist: Color, instrument: Color) -> StepOutput {
        let effect = self.tick(scientist, instrument);
        let (scientist, instrument) = self.tock();
        StepOutput {
            scientist,
            instrument,
            effect,
        }
    }
}

/// Outputs of a program run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOutput {
    /// Non-empty scientist tokens in order of emission.
    pub outputs: Vec<Color>,
    /// Clock cycles spent executing the program.
    pub steps: usize,
}

/// Loads `program`, starts it and feeds `inputs` one per clock cycle
/// (`Empty` once they run out) until the machine halts.
pub fn run_program(tmp: &mut Tmp, program: &Program, inputs: &[Color], budget: usize) -> Result<RunOutput> {
    tmp.step(program.load_token(), Color::Empty);
    tmp.step(Color::str("run"), Color::Empty);
    let mut outputs = Vec::new();
    for steps in 0..budget {
        if tmp.mode() != Mode::Running {
            return Ok(RunOutput { outputs, steps });
        }
        let input = inputs.get(steps).cloned().unwrap_or(Color::Empty);
        let out = tmp.step(input, Color::Empty);
        if !out.scientist.is_empty() {
            outputs.push(out.scientist);
        }
    }
    if tmp.mode() != Mode::Running {
        return Ok(RunOutput { outputs, steps: budget });
    }
    Err(CpcError::Timeout {
        steps: budget,
        partial: outputs,
    })
}

/// Two machines whose instrument channels feed each other. What one machine
/// emits at a tock reaches the other at its next tick.
#[derive(Debug, Clone)]
pub struct CoupledPair {
    pub a: Tmp,
    pub b: Tmp,
    to_a: Color,
    to_b: Color,
}

impl CoupledPair {
    pub fn new(a: Tmp, b: Tmp) -> Self {
        Self {
            a,
            b,
            to_a: Color::Empty,
            to_b: Color::Empty,
        }
    }

    /// One lockstep round: both tick, then both tock. Returns the scientist
    /// outputs of `a` and `b`.
    pub fn round(&mut self, scientist_a: Color, scientist_b: Color) -> (Color, Color) {
        self.a
            .tick(scientist_a, std::mem::replace(&mut self.to_a, Color::Empty));
        self.b
            .tick(scientist_b, std::mem::replace(&mut self.to_b, Color::Empty));
        let (out_a, signal_ab) = self.a.tock();
        let (out_b, signal_ba) = self.b.tock();
        self.to_b = signal_ab;
        self.to_a = signal_ba;
        (out_a, out_b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn increment() -> Program {
        Program::from_json(
            r#"{"start":"right","halt":["done"],"rules":[
                {"state":"right","read":"0","next":"right","move":"R"},
                {"state":"right","read":"1","next":"right","move":"R"},
                {"state":"right","read":"_","next":"carry","move":"L"},
                {"state":"carry","read":"1","next":"carry","write":"0","move":"L"},
                {"state":"carry","read":"0","next":"done","write":"1"},
                {"state":"carry","read":"_","next":"done","write":"1"}]}"#,
        )
        .unwrap()
    }

    fn echo() -> Program {
        Program::from_json(
            r#"{"start":"q","halt":["end"],"rules":[
                {"state":"q","input":"?","next":"q","output":"$in"},
                {"state":"q","input":"_","next":"end"}]}"#,
        )
        .unwrap()
    }

    #[test]
    fn bare_machine_is_quiescent() {
        let mut m = Tmp::new();
        let before = m.clone();
        for _ in 0..1000 {
            let out = m.step(Color::Empty, Color::Empty);
            assert_eq!(out.effect, Effect::Quiescent);
            assert!(out.scientist.is_empty() && out.instrument.is_empty());
        }
        assert_eq!(m, before);
    }

    #[test]
    fn echo_program_copies_stream() {
        let mut m = Tmp::new();
        let inputs: Vec<Color> = ["a", "b", "c"].iter().map(|s| Color::str(*s)).collect();
        let out = run_program(&mut m, &echo(), &inputs, 100).unwrap();
        assert_eq!(out.outputs, inputs);
        assert_eq!(out.steps, 4);
        assert_eq!(m.mode(), Mode::Halted);
    }

    #[test]
    fn binary_increment() {
        for (before, after) in [("101", "110"), ("0", "1"), ("111", "1000"), ("1011", "1100")] {
            let mut m = Tmp::new();
            m.step(tape_token(before, 0), Color::Empty);
            run_program(&mut m, &increment(), &[], 100).unwrap();
            assert_eq!(m.tape_string(), after, "{before}");
        }
    }

    #[test]
    fn budget_exhaustion_times_out() {
        let spin = Program::from_json(r#"{"start":"s","rules":[{"state":"s","next":"s","output":"x"}]}"#).unwrap();
        match run_program(&mut Tmp::new(), &spin, &[], 5) {
            Err(CpcError::Timeout { steps, partial }) => {
                assert_eq!(steps, 5);
                assert_eq!(partial.len(), 5);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn interrupt_and_reprogram() {
        let spin = Program::from_json(r#"{"start":"s","rules":[{"state":"s","next":"s","output":"spin"}]}"#).unwrap();
        let mut m = Tmp::new();
        m.step(spin.load_token(), Color::Empty);
        m.step(Color::str("run"), Color::Empty);
        assert_eq!(m.step(Color::Empty, Color::Empty).scientist, Color::str("spin"));
        assert_eq!(
            m.step(Color::str("interrupt"), Color::Empty).effect,
            Effect::Interrupted
        );
        assert_eq!(m.step(echo().load_token(), Color::Empty).effect, Effect::Loaded);
        m.step(Color::str("run"), Color::Empty);
        assert_eq!(m.step(Color::str("hi"), Color::Empty).scientist, Color::str("hi"));
    }

    #[test]
    fn bad_tokens_are_logged_no_ops() {
        let mut m = Tmp::new();
        let before = m.clone();
        for t in [
            Color::str("run"),
            Color::str("interrupt"),
            Color::Int(4),
            Color::Tuple(vec![Color::str("load"), Color::str("{not json")]),
            Color::Tuple(vec![Color::str("tape"), Color::Int(1)]),
        ] {
            assert!(matches!(m.step(t, Color::Empty).effect, Effect::NoOp { .. }));
        }
        assert!(matches!(m.step(Color::Empty, Color::Black).effect, Effect::NoOp { .. }));
        assert_eq!(m, before);
    }

    #[test]
    fn coupled_machines_exchange_signals() {
        let pinger =
            Program::from_json(r#"{"start":"p","rules":[{"state":"p","input":"?","next":"p","command":"$in"}]}"#)
                .unwrap();
        let reflector = Program::from_json(
            r#"{"start":"r","rules":[{"state":"r","instr":"?","next":"r","output":"$instr"},
                                    {"state":"r","instr":"_","next":"r"}]}"#,
        )
        .unwrap();
        let mut a = Tmp::new();
        let mut b = Tmp::new();
        for (m, p) in [(&mut a, &pinger), (&mut b, &reflector)] {
            m.step(p.load_token(), Color::Empty);
            m.step(Color::str("run"), Color::Empty);
        }
        let mut pair = CoupledPair::new(a, b);
        let (_, b0) = pair.round(Color::str("ping"), Color::Empty);
        assert!(b0.is_empty(), "signal arrives one round later");
        let (_, b1) = pair.round(Color::Empty, Color::Empty);
        assert_eq!(b1, Color::str("ping"));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn quiescence_for_any_step_count(n in 0usize..20_000) {
            let mut m = Tmp::new();
            let hash = m.memory_hash();
            for _ in 0..n {
                m.step(Color::Empty, Color::Empty);
            }
            prop_assert_eq!(m.memory_hash(), hash);
            prop_assert_eq!(m, Tmp::new());
        }
    }
}
