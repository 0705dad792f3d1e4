//! Random small workflow instances and predicates.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;

use wfnet_core::workflow::{Constraint, Job, ResourcePool, WorkflowSpec};

#[derive(Debug, Clone)]
pub struct Instance {
    pub specs: Vec<WorkflowSpec>,
    pub pool: ResourcePool,
    pub counts: BTreeMap<String, u32>,
}

/// One to three activities with at most `max_jobs` jobs in total, random
/// precedence DAGs and exclusive pairs, over one to three resource types.
/// Every instance passes validation.
pub fn random_instance(rng: &mut impl Rng, max_jobs: usize) -> Instance {
    let type_count = rng.gen_range(1..=3);
    let caps: Vec<(String, u32)> = (1..=type_count)
        .map(|i| (format!("R{i}"), rng.gen_range(1..=2)))
        .collect();
    let pool = ResourcePool::new(caps.iter().map(|(r, c)| (r.as_str(), *c))).expect("valid pool");

    let activities = rng.gen_range(1..=3.min(max_jobs));
    let mut sizes = vec![1; activities];
    for _ in activities..rng.gen_range(activities..=max_jobs) {
        let i = rng.gen_range(0..activities);
        sizes[i] += 1;
    }

    let mut specs = Vec::new();
    let mut counts = BTreeMap::new();
    for (a, &size) in sizes.iter().enumerate() {
        let activity = format!("A{}", a + 1);
        let mut jobs = Vec::new();
        for k in 0..size {
            let used = rng.gen_range(1..=caps.len().min(2));
            let mut types: Vec<&(String, u32)> = caps.iter().collect();
            types.shuffle(rng);
            let demand: Vec<(&str, u32)> = types[..used]
                .iter()
                .map(|(r, c)| (r.as_str(), rng.gen_range(1..=*c)))
                .collect();
            let id = format!("J{}{}", a + 1, k + 1);
            jobs.push(Job::new(&id, &activity, rng.gen_range(1..=3), &demand));
        }
        let mut constraints = Vec::new();
        for x in 0..size {
            for y in x + 1..size {
                let (p, q) = (jobs[x].id.clone(), jobs[y].id.clone());
                let roll: f64 = rng.gen();
                if roll < 0.4 {
                    constraints.push(Constraint::Precedence(p, q));
                } else if roll < 0.55 {
                    constraints.push(Constraint::NonOverlap(p, q));
                }
            }
        }
        let n = if size <= 2 && rng.gen_bool(0.25) { 2 } else { 1 };
        counts.insert(activity.clone(), n);
        specs.push(WorkflowSpec {
            activity,
            jobs,
            constraints,
        });
    }
    Instance { specs, pool, counts }
}

/// A random `mark(..) >= k` formula over the given place names.
pub fn random_predicate(rng: &mut impl Rng, places: &[String]) -> String {
    fn atom(rng: &mut impl Rng, places: &[String]) -> String {
        let p = places.choose(rng).expect("at least one place");
        format!("mark({p}) >= {}", rng.gen_range(1..=2))
    }
    fn expr(rng: &mut impl Rng, places: &[String], depth: u32) -> String {
        if depth == 0 || rng.gen_bool(0.4) {
            return atom(rng, places);
        }
        let op = if rng.gen_bool(0.5) { "and" } else { "or" };
        format!(
            "({} {op} {})",
            expr(rng, places, depth - 1),
            expr(rng, places, depth - 1)
        )
    }
    expr(rng, places, 2)
}
