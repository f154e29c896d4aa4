//! Step-by-step simulation with an explicit conflict-resolution policy.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Color, Marking, NetFragment, Result, StateKind};

/// How to choose among several enabled events.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheduler {
    /// First enabled event in this list of ids; events not listed come after,
    /// in declaration order.
    Priority(Vec<String>),
    /// Uniform choice from a seeded generator.
    Seeded(u64),
}

/// A token placed on an input state just before step `step` is taken.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Injection {
    pub step: usize,
    pub state: String,
    pub color: Color,
}

/// One line of a firing trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub step: usize,
    pub event: String,
    pub consumed: Vec<Color>,
    pub produced: Vec<Color>,
    /// Tokens removed from output states after the firing.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub emitted: Vec<(String, Color)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationOutcome {
    pub marking: Marking,
    pub trace: Vec<TraceEntry>,
}

impl SimulationOutcome {
    pub fn to_json_lines(&self) -> String {
        self.trace
            .iter()
            .map(|t| serde_json::to_string(t).expect("trace entries serialize") + "\n")
            .collect()
    }
}

pub struct Simulator<'a> {
    net: &'a NetFragment,
    marking: Marking,
    order: Vec<usize>,
    rng: Option<ChaCha8Rng>,
    step: usize,
}

impl<'a> Simulator<'a> {
    pub fn new(net: &'a NetFragment, initial: Marking, scheduler: &Scheduler) -> Result<Self> {
        let (order, rng) = match scheduler {
            Scheduler::Priority(ids) => {
                let mut order = Vec::with_capacity(net.events().len());
                for id in ids {
                    order.push(net.event_index(id)?);
                }
                let rest: Vec<usize> = (0..net.events().len()).filter(|e| !order.contains(e)).collect();
                order.extend(rest);
                (order, None)
            }
            Scheduler::Seeded(seed) => (
                (0..net.events().len()).collect(),
                Some(ChaCha8Rng::seed_from_u64(*seed)),
            ),
        };
        Ok(Self {
            net,
            marking: initial,
            order,
            rng,
            step: 0,
        })
    }

    pub fn marking(&self) -> &Marking {
        &self.marking
    }

    pub fn inject(&mut self, state: &str, color: Color) -> Result<()> {
        self.marking = self.net.inject(&self.marking, state, color)?;
        Ok(())
    }

    /// Fires one event and drains the output states, or returns `None` when
    /// nothing is enabled.
    pub fn step(&mut self) -> Result<Option<TraceEntry>> {
        let enabled: Vec<usize> = self
            .order
            .iter()
            .copied()
            .filter(|&e| self.net.is_enabled(e, &self.marking))
            .collect();
        let Some(&first) = enabled.first() else {
            return Ok(None);
        };
        let event = match &mut self.rng {
            Some(rng) => enabled[rng.random_range(0..enabled.len())],
            None => first,
        };
        let firing = self.net.fire(&self.marking, event)?;
        self.marking = firing.marking;
        let mut emitted = Vec::new();
        for (i, s) in self.net.states().iter().enumerate() {
            if s.kind == StateKind::Output && self.marking.token(i).is_some() {
                let (m, c) = self.net.extract(&self.marking, &s.id)?;
                self.marking = m;
                emitted.push((s.id.clone(), c));
            }
        }
        let entry = TraceEntry {
            step: self.step,
            event: self.net.events()[event].id.clone(),
            consumed: firing.consumed,
            produced: firing.produced,
            emitted,
        };
        self.step += 1;
        Ok(Some(entry))
    }

    /// Runs up to `max_steps` firings. Injections are applied when their
    /// step comes up; the run ends early once nothing is enabled and no
    /// injection is pending.
    pub fn run(mut self, injections: &[Injection], max_steps: usize) -> Result<SimulationOutcome> {
        let mut trace = Vec::new();
        while self.step < max_steps {
            let now = self.step;
            for inj in injections.iter().filter(|i| i.step == now) {
                self.inject(&inj.state, inj.color.clone())?;
            }
            match self.step()? {
                Some(entry) => trace.push(entry),
                None => match injections.iter().map(|i| i.step).filter(|&s| s > now).min() {
                    // idle until the environment supplies the next token
                    Some(next) => self.step = next,
                    None => break,
                },
            }
        }
        Ok(SimulationOutcome {
            marking: self.marking,
            trace,
        })
    }
}
