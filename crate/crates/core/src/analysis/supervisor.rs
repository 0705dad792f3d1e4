//! Off-line supervisor synthesis over an explored state space.
//!
//! The kept set is the largest set of non-forbidden nodes from which a final
//! node stays reachable inside the set. With uncontrollable transitions the
//! set must additionally be closed under them; nodes that can be pushed out
//! by an uncontrollable edge are dropped and the fixpoint repeats.

use std::collections::{BTreeMap, VecDeque};

use super::{AnalysisError, ReachabilityGraph};
use crate::pn::Marking;

/// Marking -> transitions the supervisor lets fire there. Covers exactly the
/// markings reachable from the root under the policy itself.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupervisorPolicy {
    allowed: BTreeMap<Marking, Vec<String>>,
}

impl SupervisorPolicy {
    pub fn allowed(&self, m: &Marking) -> Option<&[String]> {
        self.allowed.get(m).map(Vec::as_slice)
    }

    pub fn permits(&self, m: &Marking, transition: &str) -> bool {
        self.allowed(m).is_some_and(|ts| ts.iter().any(|t| t == transition))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Marking, &[String])> {
        self.allowed.iter().map(|(m, ts)| (m, ts.as_slice()))
    }

    pub fn len(&self) -> usize {
        self.allowed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.allowed.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.allowed.values().map(Vec::len).sum()
    }
}

/// All transitions controllable.
pub fn synthesize_supervisor(
    g: &ReachabilityGraph,
    is_final: impl Fn(&Marking) -> bool,
    forbidden: impl Fn(&Marking) -> bool,
) -> Result<SupervisorPolicy, AnalysisError> {
    synthesize_with_uncontrollable(g, is_final, forbidden, |_| false)
}

pub fn synthesize_with_uncontrollable(
    g: &ReachabilityGraph,
    is_final: impl Fn(&Marking) -> bool,
    forbidden: impl Fn(&Marking) -> bool,
    uncontrollable: impl Fn(&str) -> bool,
) -> Result<SupervisorPolicy, AnalysisError> {
    let n = g.len();
    let finals: Vec<bool> = g.nodes().iter().map(&is_final).collect();
    let bad: Vec<bool> = g.nodes().iter().map(&forbidden).collect();
    let edges: Vec<(usize, usize, bool)> = g
        .edges()
        .iter()
        .map(|e| (e.source, e.target, uncontrollable(g.transition_id(e.transition))))
        .collect();
    let keep = trim(n, &edges, &finals, &bad);
    if !keep[g.root()] {
        return Err(AnalysisError::NoSupervisor);
    }

    let mut allowed = BTreeMap::new();
    let mut seen = vec![false; n];
    seen[g.root()] = true;
    let mut queue = VecDeque::from([g.root()]);
    while let Some(v) = queue.pop_front() {
        let mut ts = Vec::new();
        for e in g.outgoing(v).filter(|e| keep[e.target]) {
            ts.push(g.transition_id(e.transition).to_string());
            if !seen[e.target] {
                seen[e.target] = true;
                queue.push_back(e.target);
            }
        }
        allowed.insert(g.node(v).clone(), ts);
    }
    Ok(SupervisorPolicy { allowed })
}

/// Greatest fixpoint: non-forbidden, co-reachable to a final node within the
/// set, and closed under uncontrollable edges.
pub(crate) fn trim(
    n: usize,
    edges: &[(usize, usize, bool)],
    finals: &[bool],
    forbidden: &[bool],
) -> Vec<bool> {
    let mut incoming = vec![Vec::new(); n];
    for &(s, t, _) in edges {
        incoming[t].push(s);
    }
    let mut keep: Vec<bool> = forbidden.iter().map(|&f| !f).collect();
    loop {
        let mut co = vec![false; n];
        let mut queue: VecDeque<usize> = (0..n).filter(|&v| keep[v] && finals[v]).collect();
        for &v in &queue {
            co[v] = true;
        }
        while let Some(v) = queue.pop_front() {
            for &u in &incoming[v] {
                if keep[u] && !co[u] {
                    co[u] = true;
                    queue.push_back(u);
                }
            }
        }
        let mut changed = false;
        for v in 0..n {
            if keep[v] && !co[v] {
                keep[v] = false;
                changed = true;
            }
        }
        for &(s, t, unc) in edges {
            if unc && keep[s] && !keep[t] {
                keep[s] = false;
                changed = true;
            }
        }
        if !changed {
            return keep;
        }
    }
}
