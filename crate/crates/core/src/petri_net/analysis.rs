//! Reachability, liveness and safety of reduced nets with black tokens.

use std::collections::{HashMap, VecDeque};

use serde::Serialize;

use super::{Marking, NetError, NetFragment, Result, StateKind};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Transition {
    pub id: String,
    pub pre: Vec<usize>,
    pub post: Vec<usize>,
}

/// Uncolored net over the internal states of a fragment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassicalNet {
    pub places: Vec<String>,
    pub transitions: Vec<Transition>,
    /// Index of each place in the fragment it was reduced from.
    #[serde(skip)]
    source: Vec<usize>,
}

impl ClassicalNet {
    pub fn new(places: Vec<String>, transitions: Vec<Transition>) -> Self {
        let source = (0..places.len()).collect();
        Self {
            places,
            transitions,
            source,
        }
    }

    /// Projection of a fragment marking onto the places of this net.
    pub fn project(&self, m: &Marking) -> Vec<bool> {
        self.source.iter().map(|&s| m.token(s).is_some()).collect()
    }

    pub fn marking_of(&self, marked: &[&str]) -> Result<Vec<bool>> {
        let mut m = vec![false; self.places.len()];
        for id in marked {
            let i = self
                .places
                .iter()
                .position(|p| p == id)
                .ok_or_else(|| NetError::UnknownState(id.to_string()))?;
            m[i] = true;
        }
        Ok(m)
    }

    fn enabled(&self, t: &Transition, m: &[bool]) -> bool {
        t.pre.iter().all(|&p| m[p]) && t.post.iter().all(|&p| !m[p] || t.pre.contains(&p))
    }

    /// Marked pre-set but a marked post-set place: under place-transition
    /// semantics this would stack two tokens on one state.
    fn contact(&self, t: &Transition, m: &[bool]) -> bool {
        t.pre.iter().all(|&p| m[p]) && t.post.iter().any(|&p| m[p] && !t.pre.contains(&p))
    }
}

/// Drops `S_I`, `S_O` and their arcs. Events left with no arcs keep empty
/// pre- or post-sets.
pub fn reduced_net(net: &NetFragment) -> ClassicalNet {
    let mut index = vec![usize::MAX; net.states().len()];
    let mut places = Vec::new();
    let mut source = Vec::new();
    for (i, s) in net.states().iter().enumerate() {
        if s.kind == StateKind::Internal {
            index[i] = places.len();
            places.push(s.id.clone());
            source.push(i);
        }
    }
    let keep = |arcs: &[usize]| -> Vec<usize> {
        arcs.iter()
            .filter(|&&s| index[s] != usize::MAX)
            .map(|&s| index[s])
            .collect()
    };
    let transitions = net
        .events()
        .iter()
        .map(|e| Transition {
            id: e.id.clone(),
            pre: keep(&e.inputs),
            post: keep(&e.outputs),
        })
        .collect();
    ClassicalNet {
        places,
        transitions,
        source,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Analysis {
    /// Reachable markings in breadth-first order, the initial one first.
    pub markings: Vec<Vec<bool>>,
    /// `(from, transition, to)` edges of the reachability graph.
    pub edges: Vec<(usize, usize, usize)>,
    /// Whether each transition can still fire from every reachable marking.
    pub live: Vec<bool>,
    /// Markings where nothing is enabled.
    pub deadlocks: Vec<usize>,
    /// `(marking, transition)` pairs where firing would break 1-safety.
    pub safety_violations: Vec<(usize, usize)>,
}

impl Analysis {
    pub fn all_live(&self) -> bool {
        self.live.iter().all(|&l| l)
    }

    pub fn is_safe(&self) -> bool {
        self.safety_violations.is_empty()
    }
}

pub fn analyze(net: &ClassicalNet, initial: &[bool], bound: usize) -> Result<Analysis> {
    if initial.len() != net.places.len() {
        return Err(NetError::Invalid(format!(
            "marking has {} entries for {} places",
            initial.len(),
            net.places.len()
        )));
    }
    let mut index: HashMap<Vec<bool>, usize> = HashMap::new();
    let mut markings = vec![initial.to_vec()];
    index.insert(initial.to_vec(), 0);
    let mut edges = Vec::new();
    let mut safety_violations = Vec::new();
    let mut deadlocks = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        let m = markings[i].clone();
        let mut any = false;
        for (ti, t) in net.transitions.iter().enumerate() {
            if net.contact(t, &m) {
                safety_violations.push((i, ti));
            }
            if !net.enabled(t, &m) {
                continue;
            }
            any = true;
            let mut next = m.clone();
            for &p in &t.pre {
                next[p] = false;
            }
            for &p in &t.post {
                next[p] = true;
            }
            let j = match index.get(&next) {
                Some(&j) => j,
                None => {
                    if markings.len() >= bound {
                        return Err(NetError::StateSpaceTooLarge(bound));
                    }
                    let j = markings.len();
                    index.insert(next.clone(), j);
                    markings.push(next);
                    queue.push_back(j);
                    j
                }
            };
            edges.push((i, ti, j));
        }
        if !any {
            deadlocks.push(i);
        }
    }

    let mut reverse = vec![Vec::new(); markings.len()];
    for &(from, _, to) in &edges {
        reverse[to].push(from);
    }
    let live = (0..net.transitions.len())
        .map(|ti| {
            // Markings from which `ti` can eventually fire.
            let mut reach = vec![false; markings.len()];
            let mut stack: Vec<usize> = edges
                .iter()
                .filter(|&&(_, t, _)| t == ti)
                .map(|&(from, _, _)| from)
                .collect();
            while let Some(k) = stack.pop() {
                if !std::mem::replace(&mut reach[k], true) {
                    stack.extend(&reverse[k]);
                }
            }
            reach.iter().all(|&r| r)
        })
        .collect();

    Ok(Analysis {
        markings,
        edges,
        live,
        deadlocks,
        safety_violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(n: usize) -> ClassicalNet {
        ClassicalNet::new(
            (0..n).map(|i| format!("p{i}")).collect(),
            (0..n)
                .map(|i| Transition {
                    id: format!("t{i}"),
                    pre: vec![i],
                    post: vec![(i + 1) % n],
                })
                .collect(),
        )
    }

    #[test]
    fn single_loop_is_live() {
        let net = ring(4);
        let mut m0 = vec![false; 4];
        m0[0] = true;
        let a = analyze(&net, &m0, 100).unwrap();
        assert_eq!(a.markings.len(), 4);
        assert!(a.all_live());
        assert!(a.is_safe());
        assert!(a.deadlocks.is_empty());
    }

    #[test]
    fn unmarked_cycle_is_dead() {
        let a = analyze(&ring(3), &[false; 3], 100).unwrap();
        assert_eq!(a.markings.len(), 1);
        assert!(a.live.iter().all(|&l| !l));
        assert_eq!(a.deadlocks, vec![0]);
    }

    #[test]
    fn bound_is_enforced() {
        let mut m0 = vec![false; 5];
        m0[0] = true;
        assert_eq!(analyze(&ring(5), &m0, 3), Err(NetError::StateSpaceTooLarge(3)));
    }

    #[test]
    fn contact_is_reported() {
        let mut m0 = vec![true, true, false];
        let a = analyze(&ring(3), &m0, 100).unwrap();
        assert!(!a.is_safe());
        m0[1] = false;
        assert!(analyze(&ring(3), &m0, 100).unwrap().is_safe());
    }
}
