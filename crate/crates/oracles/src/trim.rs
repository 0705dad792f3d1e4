//! Supervisor reference: the plain definition of the largest trim set,
//! computed by repeated relaxation over the edge list.

use std::collections::BTreeMap;

use wfnet_core::analysis::ReachabilityGraph;
use wfnet_core::pn::Marking;

/// Largest set of non-forbidden nodes from which a final node is reachable
/// without leaving the set.
pub fn naive_trim(n: usize, edges: &[(usize, usize)], finals: &[bool], forbidden: &[bool]) -> Vec<bool> {
    let mut keep: Vec<bool> = (0..n).map(|v| !forbidden[v]).collect();
    loop {
        let mut co: Vec<bool> = (0..n).map(|v| keep[v] && finals[v]).collect();
        let mut changed = true;
        while changed {
            changed = false;
            for &(u, v) in edges {
                if keep[u] && co[v] && !co[u] {
                    co[u] = true;
                    changed = true;
                }
            }
        }
        if co == keep {
            return keep;
        }
        keep = co;
    }
}

/// Nodes reachable from `root` through kept nodes only.
pub fn reachable_within(n: usize, root: usize, edges: &[(usize, usize)], keep: &[bool]) -> Vec<bool> {
    let mut seen = vec![false; n];
    if !keep[root] {
        return seen;
    }
    seen[root] = true;
    let mut changed = true;
    while changed {
        changed = false;
        for &(u, v) in edges {
            if seen[u] && keep[v] && !seen[v] {
                seen[v] = true;
                changed = true;
            }
        }
    }
    seen
}

/// True when `set` is non-forbidden and every member reaches a final member
/// inside `set`.
pub fn is_valid(set: &[bool], edges: &[(usize, usize)], finals: &[bool], forbidden: &[bool]) -> bool {
    if set.iter().zip(forbidden).any(|(&s, &f)| s && f) {
        return false;
    }
    let restricted = naive_trim(set.len(), edges, finals, &set.iter().map(|s| !s).collect::<Vec<_>>());
    restricted == set
}

/// The policy a maximally permissive supervisor must produce on `g`: for
/// every kept marking reachable from the root inside the kept set, the
/// sorted transitions leading to kept markings. `None` when the root is not
/// kept.
pub fn expected_policy(
    g: &ReachabilityGraph,
    is_final: impl Fn(&Marking) -> bool,
    forbidden: impl Fn(&Marking) -> bool,
) -> Option<BTreeMap<Marking, Vec<String>>> {
    let n = g.len();
    let edges: Vec<(usize, usize)> = g.edges().iter().map(|e| (e.source, e.target)).collect();
    let finals: Vec<bool> = g.nodes().iter().map(&is_final).collect();
    let bad: Vec<bool> = g.nodes().iter().map(&forbidden).collect();
    let keep = naive_trim(n, &edges, &finals, &bad);
    if !keep[g.root()] {
        return None;
    }
    let live = reachable_within(n, g.root(), &edges, &keep);
    let mut policy = BTreeMap::new();
    for v in (0..n).filter(|&v| live[v]) {
        let mut ts: Vec<String> = g
            .edges()
            .iter()
            .filter(|e| e.source == v && keep[e.target])
            .map(|e| g.transition_id(e.transition).to_string())
            .collect();
        ts.sort();
        policy.insert(g.node(v).clone(), ts);
    }
    Some(policy)
}
