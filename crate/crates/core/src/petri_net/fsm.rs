use super::{ColorFn, ColorSet, Event, NetFragment, Phase, Result, State, StateKind};

/// Description of a clocked finite-state machine as a net fragment.
///
/// The tick event reads the state token and one token per input state and
/// leaves a single token on `{name}.mid` colored by `tick`. The tock event
/// turns that token back into a state token plus one token per output state
/// using `tock`.
#[derive(Debug, Clone)]
pub struct FsmSpec {
    pub name: String,
    pub state_colors: ColorSet,
    pub mid_colors: ColorSet,
    pub inputs: Vec<(String, ColorSet)>,
    pub outputs: Vec<(String, ColorSet)>,
    pub tick: ColorFn,
    pub tock: ColorFn,
}

pub fn fsm_fragment(spec: &FsmSpec) -> Result<NetFragment> {
    let mut states = vec![
        State {
            id: format!("{}.state", spec.name),
            kind: StateKind::Internal,
            colors: spec.state_colors.clone(),
        },
        State {
            id: format!("{}.mid", spec.name),
            kind: StateKind::Internal,
            colors: spec.mid_colors.clone(),
        },
    ];
    let mut tick_inputs = vec![0];
    for (id, colors) in &spec.inputs {
        tick_inputs.push(states.len());
        states.push(State {
            id: id.clone(),
            kind: StateKind::Input,
            colors: colors.clone(),
        });
    }
    let mut tock_outputs = vec![0];
    for (id, colors) in &spec.outputs {
        tock_outputs.push(states.len());
        states.push(State {
            id: id.clone(),
            kind: StateKind::Output,
            colors: colors.clone(),
        });
    }
    let events = vec![
        Event {
            id: format!("{}.tick", spec.name),
            inputs: tick_inputs,
            outputs: vec![1],
            color_fn: spec.tick.clone(),
            phase: Some(Phase::Tick),
        },
        Event {
            id: format!("{}.tock", spec.name),
            inputs: vec![1],
            outputs: tock_outputs,
            color_fn: spec.tock.clone(),
            phase: Some(Phase::Tock),
        },
    ];
    NetFragment::new(states, events)
}
