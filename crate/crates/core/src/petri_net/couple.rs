use super::{ColorFn, ColorSet, Event, NetError, NetFragment, Phase, Result, State, StateKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    A,
    B,
}

/// A signal from a tock event on one side to a tick event on the other.
/// The signal carries a copy of the first color the tock event produces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignalArc {
    pub from: Side,
    pub tock: String,
    pub tick: String,
}

impl SignalArc {
    pub fn a_to_b(tock: &str, tick: &str) -> Self {
        Self {
            from: Side::A,
            tock: tock.to_string(),
            tick: tick.to_string(),
        }
    }

    pub fn b_to_a(tock: &str, tick: &str) -> Self {
        Self {
            from: Side::B,
            tock: tock.to_string(),
            tick: tick.to_string(),
        }
    }
}

fn prefix(side: Side) -> &'static str {
    match side {
        Side::A => "A/",
        Side::B => "B/",
    }
}

fn other(side: Side) -> Side {
    match side {
        Side::A => Side::B,
        Side::B => Side::A,
    }
}

/// Disjoint union of `a` and `b` (ids prefixed `A/` and `B/`) joined by one
/// internal signal state per arc.
pub fn couple(a: &NetFragment, b: &NetFragment, arcs: &[SignalArc]) -> Result<NetFragment> {
    let mut states: Vec<State> = Vec::new();
    let mut events: Vec<Event> = Vec::new();
    let mut offsets = [0usize; 2];
    let mut event_offsets = [0usize; 2];
    for (k, (net, side)) in [(a, Side::A), (b, Side::B)].into_iter().enumerate() {
        offsets[k] = states.len();
        event_offsets[k] = events.len();
        let base = states.len();
        states.extend(net.states().iter().map(|s| State {
            id: format!("{}{}", prefix(side), s.id),
            ..s.clone()
        }));
        events.extend(net.events().iter().map(|e| Event {
            id: format!("{}{}", prefix(side), e.id),
            inputs: e.inputs.iter().map(|i| i + base).collect(),
            outputs: e.outputs.iter().map(|o| o + base).collect(),
            ..e.clone()
        }));
    }
    let locate = |side: Side, id: &str, want: Phase| -> Result<usize> {
        let (net, k) = match side {
            Side::A => (a, 0),
            Side::B => (b, 1),
        };
        let e = net.event_index(id)?;
        let phase = net.events()[e].phase;
        if phase != Some(want) {
            return Err(NetError::BadPhase(format!(
                "{}{id} has phase {phase:?}, the signal needs {want:?}",
                prefix(side)
            )));
        }
        Ok(event_offsets[k] + e)
    };
    for (n, arc) in arcs.iter().enumerate() {
        let src = locate(arc.from, &arc.tock, Phase::Tock)?;
        let dst = locate(other(arc.from), &arc.tick, Phase::Tick)?;
        let signal = states.len();
        states.push(State {
            id: format!("signal{n}:{}->{}", events[src].id, events[dst].id),
            kind: StateKind::Internal,
            colors: ColorSet::Any,
        });

        let e = &mut events[src];
        e.color_fn = ColorFn::Wired {
            take: e.inputs.len(),
            inner: Box::new(e.color_fn.clone()),
            append: vec![0],
        };
        e.outputs.push(signal);

        let e = &mut events[dst];
        e.color_fn = ColorFn::Wired {
            take: e.inputs.len(),
            inner: Box::new(e.color_fn.clone()),
            append: vec![],
        };
        e.inputs.push(signal);
    }
    NetFragment::new(states, events)
}
