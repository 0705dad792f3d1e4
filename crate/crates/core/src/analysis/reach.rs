use std::collections::{HashMap, VecDeque};

use super::AnalysisError;
use crate::pn::{Marking, PetriNet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub source: usize,
    /// Transition index in the analysed net.
    pub transition: usize,
    pub target: usize,
}

/// Explored state space. Node 0 is the initial marking; nodes appear in
/// breadth-first discovery order, successors in transition-id order.
#[derive(Debug, Clone)]
pub struct ReachabilityGraph {
    nodes: Vec<Marking>,
    index: HashMap<Marking, usize>,
    edges: Vec<Edge>,
    outgoing: Vec<Vec<usize>>,
    transition_ids: Vec<String>,
}

impl ReachabilityGraph {
    pub fn root(&self) -> usize {
        0
    }

    pub fn nodes(&self) -> &[Marking] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> &Marking {
        &self.nodes[i]
    }

    pub fn node_index(&self, m: &Marking) -> Option<usize> {
        self.index.get(m).copied()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Edges leaving node `i`.
    pub fn outgoing(&self, i: usize) -> impl Iterator<Item = &Edge> {
        self.outgoing[i].iter().map(move |&e| &self.edges[e])
    }

    pub fn transition_id(&self, t: usize) -> &str {
        &self.transition_ids[t]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes without outgoing edges.
    pub fn sinks(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nodes.len()).filter(|&i| self.outgoing[i].is_empty())
    }
}

/// Breadth-first reachability from the initial marking.
///
/// Fails with [`AnalysisError::CapacityExceeded`] once more than `node_cap`
/// markings would be stored, and with [`AnalysisError::Unbounded`] when a
/// new marking strictly covers one of its ancestors on the BFS tree.
pub fn reachability(net: &PetriNet, node_cap: usize) -> Result<ReachabilityGraph, AnalysisError> {
    let root = net.initial_marking();
    let mut g = ReachabilityGraph {
        nodes: vec![root.clone()],
        index: HashMap::from([(root, 0)]),
        edges: Vec::new(),
        outgoing: vec![Vec::new()],
        transition_ids: net.transitions().iter().map(|t| t.id.clone()).collect(),
    };
    if node_cap == 0 {
        return Err(AnalysisError::CapacityExceeded {
            cap: 0,
            explored: 0,
        });
    }
    let mut parent: Vec<Option<usize>> = vec![None];
    let mut queue = VecDeque::from([0usize]);
    while let Some(src) = queue.pop_front() {
        let m = g.nodes[src].clone();
        for t in net.enabled_indices(&m)? {
            let next = net.fire_at(t, &m)?;
            let target = match g.index.get(&next) {
                Some(&i) => i,
                None => {
                    let mut anc = Some(src);
                    while let Some(a) = anc {
                        if next.strictly_covers(&g.nodes[a]) {
                            return Err(AnalysisError::Unbounded {
                                marking: net.display_marking(&next),
                            });
                        }
                        anc = parent[a];
                    }
                    if g.nodes.len() >= node_cap {
                        return Err(AnalysisError::CapacityExceeded {
                            cap: node_cap,
                            explored: g.nodes.len(),
                        });
                    }
                    let i = g.nodes.len();
                    g.nodes.push(next.clone());
                    g.index.insert(next, i);
                    g.outgoing.push(Vec::new());
                    parent.push(Some(src));
                    queue.push_back(i);
                    i
                }
            };
            g.outgoing[src].push(g.edges.len());
            g.edges.push(Edge {
                source: src,
                transition: t,
                target,
            });
        }
    }
    Ok(g)
}

/// Sinks that are not final, in canonical marking order.
pub fn find_deadlocks(g: &ReachabilityGraph, is_final: impl Fn(&Marking) -> bool) -> Vec<Marking> {
    let mut out: Vec<Marking> = g
        .sinks()
        .map(|i| g.node(i))
        .filter(|m| !is_final(m))
        .cloned()
        .collect();
    out.sort();
    out
}

/// Every node satisfying `forbidden`, in canonical marking order.
pub fn check_forbidden(g: &ReachabilityGraph, forbidden: impl Fn(&Marking) -> bool) -> Vec<Marking> {
    let mut out: Vec<Marking> = g.nodes().iter().filter(|m| forbidden(m)).cloned().collect();
    out.sort();
    out
}
