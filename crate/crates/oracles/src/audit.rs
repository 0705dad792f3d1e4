//! Direct checks of state-space and trace invariants, written against the
//! public data model only.

use std::collections::{BTreeMap, BTreeSet};

use wfnet_core::agents::{EventKind, SimConfig, Trace};
use wfnet_core::analysis::{check_schedule, InstanceId, ReachabilityGraph};
use wfnet_core::pn::{Marking, PetriNet};
use wfnet_core::workflow::{is_final, names, Constraint, ResourcePool, WorkflowSpec};

fn tokens(net: &PetriNet, m: &Marking, label: &str) -> u32 {
    net.place_by_label(label).map_or(0, |p| m.get(p))
}

/// Resource conservation, mutual exclusion and the exactly-once outcome of
/// final markings, checked on every reachable marking.
pub fn invariant_violations(
    net: &PetriNet,
    g: &ReachabilityGraph,
    specs: &[WorkflowSpec],
    pool: &ResourcePool,
    counts: &BTreeMap<String, u32>,
) -> Vec<String> {
    let mut out = Vec::new();
    for m in g.nodes() {
        for (r, cap) in pool.iter() {
            let held: u32 = specs
                .iter()
                .flat_map(|s| &s.jobs)
                .map(|j| tokens(net, m, &names::exec(&j.id)) * j.demand.get(r).copied().unwrap_or(0))
                .sum();
            if tokens(net, m, r) + held != cap {
                out.push(format!("{r} not conserved at {}", net.display_marking(m)));
            }
        }
        for spec in specs {
            for c in &spec.constraints {
                if let Constraint::NonOverlap(a, b) = c {
                    if tokens(net, m, &names::exec(a)) + tokens(net, m, &names::exec(b)) > 1 {
                        out.push(format!("{a} and {b} overlap at {}", net.display_marking(m)));
                    }
                }
            }
            if is_final(net, m) {
                let n = counts.get(&spec.activity).copied().unwrap_or(0);
                let want = n * spec.sink_jobs().len() as u32;
                if tokens(net, m, &names::done(&spec.activity)) != want {
                    out.push(format!("{} finished wrongly at {}", spec.activity, net.display_marking(m)));
                }
            }
        }
    }
    out
}

/// Trace invariants that must hold for every run.
pub fn trace_problems(t: &Trace, c: &SimConfig) -> Vec<String> {
    let mut out = Vec::new();
    if t.total_debits() != t.total_earnings() {
        out.push(format!("debits {} != earnings {}", t.total_debits(), t.total_earnings()));
    }
    let mut last = 0;
    let mut started = BTreeSet::new();
    let mut ended = BTreeMap::new();
    let mut broken: BTreeMap<InstanceId, u32> = BTreeMap::new();
    let mut paid: BTreeMap<InstanceId, i64> = BTreeMap::new();
    for e in &t.events {
        if e.time < last {
            out.push(format!("time goes back at {e}"));
        }
        last = e.time;
        match &e.kind {
            EventKind::TaskStart { product, occurrence, partners, .. } => {
                started.insert((product.clone(), occurrence.clone()));
                for p in partners {
                    if broken.contains_key(p) {
                        out.push(format!("broken {p} serves: {e}"));
                    }
                }
            }
            EventKind::TaskAbort { product, occurrence, .. } => {
                started.remove(&(product.clone(), occurrence.clone()));
            }
            EventKind::TaskEnd { product, occurrence } => {
                if !started.remove(&(product.clone(), occurrence.clone())) {
                    out.push(format!("end without start: {e}"));
                }
                ended.insert(product.clone(), e.time);
            }
            EventKind::Payment { product, agent, amount } => {
                if ended.get(product) != Some(&e.time) {
                    out.push(format!("payment without task end: {e}"));
                }
                *paid.entry(agent.clone()).or_default() += amount;
            }
            EventKind::Breakdown { agent } => {
                broken.insert(agent.clone(), e.time);
            }
            _ => {}
        }
    }
    for r in &t.resources {
        if paid.get(&r.id).copied().unwrap_or(0) != r.earned {
            out.push(format!("{} earned {} but was paid otherwise", r.id, r.earned));
        }
        let expected: i64 = t
            .tasks
            .iter()
            .filter(|task| task.partners.contains(&r.id))
            .map(|task| {
                c.prices
                    .get(&(r.id.resource.clone(), task.occurrence.job.clone()))
                    .copied()
                    .unwrap_or_else(|| i64::from(task.end - task.start))
            })
            .sum();
        if expected != r.earned {
            out.push(format!("{} earned {} instead of {expected}", r.id, r.earned));
        }
    }
    for p in &t.products {
        if p.balance < 0 {
            out.push(format!("{} overdrawn", p.id));
        }
    }
    let problems = check_schedule(&t.realized_schedule(), &c.specs, &c.pool, &c.counts);
    if t.all_completed() && !problems.is_empty() {
        out.push(format!("realized schedule infeasible: {problems:?}"));
    }
    out
}
