//! Moving detail between colors and net structure.

use std::collections::{BTreeMap, BTreeSet};

use super::{Color, ColorFn, ColorSet, Event, Marking, NetError, NetFragment, Result, State};

/// Blocks of each partitioned state's color set, keyed by state id. States
/// not listed keep a single block.
pub type Partition = BTreeMap<String, Vec<BTreeSet<Color>>>;

/// A net refined by color partition, with the map back to its origin.
///
/// States are not split, so the marking bijection is the identity; each
/// refined event remembers the original event it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Refinement {
    pub net: NetFragment,
    /// `origin[k]` is the index in the original net of refined event `k`.
    pub origin: Vec<usize>,
    original_events: Vec<Event>,
}

impl Refinement {
    /// Merges refined events back into their originals, which yields a net
    /// equal to the one that was refined.
    pub fn collapse(&self) -> NetFragment {
        NetFragment::new(self.net.states().to_vec(), self.original_events.clone()).expect("original net was valid")
    }

    pub fn map_marking(&self, m: &Marking) -> Marking {
        m.clone()
    }

    /// Refined events that stem from original event `e`.
    pub fn events_of(&self, e: usize) -> Vec<usize> {
        (0..self.origin.len()).filter(|&k| self.origin[k] == e).collect()
    }
}

fn blocks_for(state: &State, partition: &Partition) -> Result<Vec<ColorSet>> {
    let Some(blocks) = partition.get(&state.id) else {
        return Ok(vec![state.colors.clone()]);
    };
    let Some(all) = state.colors.finite() else {
        return Err(NetError::BadPartition(format!(
            "state {:?} has an unbounded color set",
            state.id
        )));
    };
    let mut covered = BTreeSet::new();
    for block in blocks {
        if block.is_empty() {
            return Err(NetError::BadPartition(format!("empty block for {:?}", state.id)));
        }
        for c in block {
            if !all.contains(c) {
                return Err(NetError::BadPartition(format!(
                    "{c:?} is not a color of {:?}",
                    state.id
                )));
            }
            if !covered.insert(c.clone()) {
                return Err(NetError::BadPartition(format!(
                    "{c:?} appears twice for {:?}",
                    state.id
                )));
            }
        }
    }
    if covered.len() != all.len() {
        return Err(NetError::BadPartition(format!("blocks do not cover {:?}", state.id)));
    }
    Ok(blocks.iter().map(|b| ColorSet::Finite(b.clone())).collect())
}

/// Whether `f` restricted to the given blocks can produce colors that fit the
/// output states. Blocks with unbounded color sets are assumed inhabited.
fn domain_nonempty(f: &ColorFn, blocks: &[&ColorSet], outputs: &[&ColorSet]) -> bool {
    fn walk(f: &ColorFn, blocks: &[&ColorSet], outputs: &[&ColorSet], prefix: &mut Vec<Color>) -> bool {
        let Some(block) = blocks.get(prefix.len()) else {
            return f
                .apply(prefix)
                .is_some_and(|out| out.len() == outputs.len() && out.iter().zip(outputs).all(|(c, s)| s.contains(c)));
        };
        match block.finite() {
            Some(colors) => colors.iter().any(|c| {
                prefix.push(c.clone());
                let hit = walk(f, blocks, outputs, prefix);
                prefix.pop();
                hit
            }),
            None => true,
        }
    }
    walk(f, blocks, outputs, &mut Vec::new())
}

/// Splits every event into one event per combination of input blocks on
/// which its color function is defined. Refined ids are `id[k1.k2...]`.
pub fn refine_colors(net: &NetFragment, partition: &Partition) -> Result<Refinement> {
    for id in partition.keys() {
        net.state_index(id)
            .map_err(|_| NetError::BadPartition(format!("unknown state {id:?}")))?;
    }
    let blocks: Vec<Vec<ColorSet>> = net
        .states()
        .iter()
        .map(|s| blocks_for(s, partition))
        .collect::<Result<_>>()?;

    let mut events = Vec::new();
    let mut origin = Vec::new();
    for (ei, e) in net.events().iter().enumerate() {
        let outputs: Vec<&ColorSet> = e.outputs.iter().map(|&o| &net.states()[o].colors).collect();
        let mut choice = vec![0usize; e.inputs.len()];
        loop {
            let chosen: Vec<&ColorSet> = e.inputs.iter().zip(&choice).map(|(&s, &k)| &blocks[s][k]).collect();
            if domain_nonempty(&e.color_fn, &chosen, &outputs) {
                let tag: Vec<String> = choice.iter().map(usize::to_string).collect();
                events.push(Event {
                    id: format!("{}[{}]", e.id, tag.join(".")),
                    inputs: e.inputs.clone(),
                    outputs: e.outputs.clone(),
                    color_fn: ColorFn::Restrict {
                        domain: chosen.into_iter().cloned().collect(),
                        inner: Box::new(e.color_fn.clone()),
                    },
                    phase: e.phase,
                });
                origin.push(ei);
            }
            // Odometer over block choices.
            let mut pos = 0;
            loop {
                if pos == choice.len() {
                    break;
                }
                choice[pos] += 1;
                if choice[pos] < blocks[e.inputs[pos]].len() {
                    break;
                }
                choice[pos] = 0;
                pos += 1;
            }
            if pos == choice.len() {
                break;
            }
        }
    }
    Ok(Refinement {
        net: NetFragment::new(net.states().to_vec(), events)?,
        origin,
        original_events: net.events().to_vec(),
    })
}

/// Drops all color distinctions: every state holds black tokens and every
/// color function becomes total.
pub fn coarsen_colors(net: &NetFragment) -> NetFragment {
    let states = net
        .states()
        .iter()
        .map(|s| State {
            colors: ColorSet::black(),
            ..s.clone()
        })
        .collect();
    let events = net
        .events()
        .iter()
        .map(|e| Event {
            color_fn: ColorFn::Const {
                outputs: vec![Color::Black; e.outputs.len()],
            },
            ..e.clone()
        })
        .collect();
    NetFragment::new(states, events).expect("coarsening keeps the graph valid")
}

pub fn coarsen_marking(m: &Marking) -> Marking {
    Marking(m.0.iter().map(|t| t.as_ref().map(|_| Color::Black)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::petri_net::NetBuilder;
    use std::collections::{HashSet, VecDeque};

    fn pm() -> ColorSet {
        ColorSet::of([Color::str("+"), Color::str("-")])
    }

    fn pm_blocks() -> Vec<BTreeSet<Color>> {
        vec![
            [Color::str("+")].into_iter().collect(),
            [Color::str("-")].into_iter().collect(),
        ]
    }

    /// Two inputs, two outputs; undefined when both inputs are "-".
    fn two_by_two() -> NetFragment {
        let p = Color::str("+");
        let n = Color::str("-");
        let f = ColorFn::table([
            (vec![p.clone(), p.clone()], vec![p.clone(), p.clone()]),
            (vec![p.clone(), n.clone()], vec![n.clone(), p.clone()]),
            (vec![n.clone(), p.clone()], vec![p.clone(), n.clone()]),
        ]);
        NetBuilder::new()
            .internal("a", pm())
            .internal("b", pm())
            .internal("c", pm())
            .internal("d", pm())
            .event("e", &["a", "b"], &["c", "d"], f, None)
            .event("back", &["c", "d"], &["a", "b"], ColorFn::Identity, None)
            .build()
            .unwrap()
    }

    fn full_partition() -> Partition {
        ["a", "b", "c", "d"]
            .into_iter()
            .map(|s| (s.to_string(), pm_blocks()))
            .collect()
    }

    #[test]
    fn trivial_partition_keeps_net() {
        let net = two_by_two();
        let r = refine_colors(&net, &Partition::new()).unwrap();
        assert_eq!(r.net.events().len(), 2);
        assert_eq!(r.net.events()[0].id, "e[0.0]");
        assert_eq!(r.collapse(), net);
    }

    #[test]
    fn one_event_per_nonempty_restriction() {
        let r = refine_colors(&two_by_two(), &full_partition()).unwrap();
        // e is undefined on (-,-): three pieces. back is total: four pieces.
        assert_eq!(r.events_of(0).len(), 3);
        assert_eq!(r.events_of(1).len(), 4);
        assert_eq!(r.collapse(), two_by_two());
    }

    #[test]
    fn bad_partitions() {
        let net = two_by_two();
        let mut p = Partition::new();
        p.insert("a".into(), vec![[Color::str("+")].into_iter().collect()]);
        assert!(matches!(refine_colors(&net, &p), Err(NetError::BadPartition(_))));
        p.insert(
            "a".into(),
            vec![
                [Color::str("+"), Color::str("-")].into_iter().collect(),
                [Color::str("-")].into_iter().collect(),
            ],
        );
        assert!(matches!(refine_colors(&net, &p), Err(NetError::BadPartition(_))));
        let mut q = Partition::new();
        q.insert("zz".into(), pm_blocks());
        assert!(matches!(refine_colors(&net, &q), Err(NetError::BadPartition(_))));
    }

    /// Successor markings labelled by original event index.
    fn successors(
        net: &NetFragment,
        origin: &dyn Fn(usize) -> usize,
        m: &Marking,
    ) -> BTreeSet<(usize, Vec<Option<Color>>)> {
        net.enabled_events(m)
            .into_iter()
            .map(|e| (origin(e), net.fire(m, e).unwrap().marking.0))
            .collect()
    }

    #[test]
    fn refinement_preserves_one_step_reachability() {
        let net = two_by_two();
        let r = refine_colors(&net, &full_partition()).unwrap();
        let mut seen = HashSet::new();
        let mut queue = VecDeque::new();
        for a in ["+", "-"] {
            for b in ["+", "-"] {
                let m = net.marking(&[("a", Color::str(a)), ("b", Color::str(b))]).unwrap();
                seen.insert(m.clone());
                queue.push_back(m);
            }
        }
        while let Some(m) = queue.pop_front() {
            let s_orig = successors(&net, &|e| e, &m);
            let s_ref = successors(&r.net, &|e| r.origin[e], &r.map_marking(&m));
            assert_eq!(s_orig, s_ref);
            // Each enabled original event has exactly one enabled refined piece.
            for e in net.enabled_events(&m) {
                let pieces = r.events_of(e).into_iter().filter(|&k| r.net.is_enabled(k, &m)).count();
                assert_eq!(pieces, 1);
            }
            for (_, next) in s_orig {
                let next = Marking(next);
                if seen.insert(next.clone()) {
                    queue.push_back(next);
                }
            }
        }
        assert!(seen.len() >= 7);
    }

    #[test]
    fn coarsening_replays_and_can_enable_more() {
        use rand::{Rng, SeedableRng};
        let net = two_by_two();
        let black = coarsen_colors(&net);
        assert!(black.states().iter().all(|s| s.colors == ColorSet::black()));
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let mut m = net.marking(&[("a", Color::str("+")), ("b", Color::str("-"))]).unwrap();
            let mut mb = coarsen_marking(&m);
            for _ in 0..20 {
                let enabled = net.enabled_events(&m);
                if enabled.is_empty() {
                    break;
                }
                let e = enabled[rng.random_range(0..enabled.len())];
                m = net.fire(&m, e).unwrap().marking;
                mb = black.fire(&mb, e).unwrap().marking;
                assert_eq!(coarsen_marking(&m), mb);
            }
        }
        // (-,-) blocks e in the colored net but not in the black one.
        let stuck = net.marking(&[("a", Color::str("-")), ("b", Color::str("-"))]).unwrap();
        assert!(net.enabled_events(&stuck).is_empty());
        assert_eq!(black.enabled_events(&coarsen_marking(&stuck)), vec![0]);
    }
}
