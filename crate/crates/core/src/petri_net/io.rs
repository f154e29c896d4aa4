//! JSON form of net fragments.
//!
//! ```json
//! {
//!   "states": [{"id": "s", "kind": "internal", "colors": {"finite": ["black"]}}],
//!   "events": [{"id": "e", "inputs": ["s"], "outputs": ["t"],
//!               "color_fn": {"kind": "identity"}, "phase": "tick"}],
//!   "initial": [{"state": "s", "color": "black"}]
//! }
//! ```

use serde::{Deserialize, Serialize};

use super::{Color, ColorFn, ColorSet, Event, Marking, NetError, NetFragment, Phase, Result, State, StateKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub id: String,
    #[serde(default = "internal")]
    pub kind: StateKind,
    pub colors: ColorSet,
}

fn internal() -> StateKind {
    StateKind::Internal
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventFile {
    pub id: String,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub color_fn: ColorFn,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase: Option<Phase>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TokenFile {
    pub state: String,
    pub color: Color,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetFile {
    pub states: Vec<StateFile>,
    pub events: Vec<EventFile>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub initial: Vec<TokenFile>,
}

/// A net with an initial marking.
#[derive(Debug, Clone, PartialEq)]
pub struct NetDocument {
    pub net: NetFragment,
    pub initial: Marking,
}

impl NetDocument {
    pub fn from_file(file: NetFile) -> Result<Self> {
        let states: Vec<State> = file
            .states
            .into_iter()
            .map(|s| State {
                id: s.id,
                kind: s.kind,
                colors: s.colors,
            })
            .collect();
        let index = |id: &str| {
            states
                .iter()
                .position(|s| s.id == id)
                .ok_or_else(|| NetError::UnknownState(id.to_string()))
        };
        let mut events = Vec::with_capacity(file.events.len());
        for e in file.events {
            events.push(Event {
                inputs: e.inputs.iter().map(|s| index(s)).collect::<Result<_>>()?,
                outputs: e.outputs.iter().map(|s| index(s)).collect::<Result<_>>()?,
                id: e.id,
                color_fn: e.color_fn,
                phase: e.phase,
            });
        }
        let net = NetFragment::new(states, events)?;
        let tokens: Vec<(&str, Color)> = file
            .initial
            .iter()
            .map(|t| (t.state.as_str(), t.color.clone()))
            .collect();
        let initial = net.marking(&tokens)?;
        Ok(Self { net, initial })
    }

    pub fn to_file(&self) -> NetFile {
        let net = &self.net;
        let name = |i: &usize| net.states()[*i].id.clone();
        NetFile {
            states: net
                .states()
                .iter()
                .map(|s| StateFile {
                    id: s.id.clone(),
                    kind: s.kind,
                    colors: s.colors.clone(),
                })
                .collect(),
            events: net
                .events()
                .iter()
                .map(|e| EventFile {
                    id: e.id.clone(),
                    inputs: e.inputs.iter().map(name).collect(),
                    outputs: e.outputs.iter().map(name).collect(),
                    color_fn: e.color_fn.clone(),
                    phase: e.phase,
                })
                .collect(),
            initial: self
                .initial
                .tokens()
                .iter()
                .enumerate()
                .filter_map(|(i, t)| {
                    t.as_ref().map(|c| TokenFile {
                        state: name(&i),
                        color: c.clone(),
                    })
                })
                .collect(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: NetFile = serde_json::from_str(text).map_err(|e| NetError::Malformed(e.to_string()))?;
        Self::from_file(file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("net files always serialize")
    }

    /// Net of two working modes joined at a choice state: running an
    /// existing program, or stopping to install a new one.
    pub fn two_modes() -> Self {
        Self::from_json(include_str!("../../nets/two_modes.json")).expect("bundled net is valid")
    }

    /// Mode net driving the calibration loop.
    pub fn calibration_modes() -> Self {
        Self::from_json(include_str!("../../nets/calibration_modes.json")).expect("bundled net is valid")
    }

    /// Program-holding machine with scientist and instrument channels.
    pub fn utmp_loop() -> Self {
        Self::from_json(include_str!("../../nets/utmp.json")).expect("bundled net is valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::petri_net::{analyze, reduced_net};

    #[test]
    fn round_trip() {
        for doc in [
            NetDocument::two_modes(),
            NetDocument::calibration_modes(),
            NetDocument::utmp_loop(),
        ] {
            let again = NetDocument::from_json(&doc.to_json()).unwrap();
            assert_eq!(again, doc);
        }
    }

    #[test]
    fn malformed_and_invalid_files() {
        assert!(matches!(NetDocument::from_json("{"), Err(NetError::Malformed(_))));
        let dangling = r#"{"states":[{"id":"a","colors":"any"}],
            "events":[{"id":"e","inputs":["a"],"outputs":["zz"],"color_fn":{"kind":"identity"}}]}"#;
        assert_eq!(
            NetDocument::from_json(dangling).unwrap_err(),
            NetError::UnknownState("zz".into())
        );
    }

    #[test]
    fn two_modes_are_live_from_choice() {
        let doc = NetDocument::two_modes();
        let reduced = reduced_net(&doc.net);
        let a = analyze(&reduced, &reduced.project(&doc.initial), 100).unwrap();
        assert!(a.markings.len() <= 12);
        assert!(a.all_live());
        assert!(a.is_safe());
    }

    #[test]
    fn utmp_loop_reduces_to_a_safe_cycle() {
        let doc = NetDocument::utmp_loop();
        let reduced = reduced_net(&doc.net);
        assert_eq!(reduced.places.len(), 2);
        let a = analyze(&reduced, &reduced.project(&doc.initial), 100).unwrap();
        assert_eq!(a.markings.len(), 2);
        assert!(a.all_live() && a.is_safe());
    }
}
