//! Eager timed semantics simulated directly on jobs.
//!
//! At every instant the oracle picks a maximal multiset of jobs that can
//! start together (enough free units of every demanded type, one credit per
//! predecessor edge or entry token, exclusive pairs idle), starts them all,
//! then jumps to the next completion. Every maximal choice is explored.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use wfnet_core::workflow::{Constraint, ResourcePool, WorkflowSpec};

/// (job, occurrence index, start, end), sorted.
pub type OracleSchedule = Vec<(String, u32, u32, u32)>;

struct JobData {
    id: String,
    duration: u32,
    demand: Vec<(usize, u32)>,
    /// Entry jobs draw from their own token supply instead of edges.
    entry: Option<usize>,
    preds: Vec<usize>,
    succs: Vec<usize>,
    mutexes: Vec<usize>,
}

#[derive(Clone, PartialEq, Eq, Hash)]
struct State {
    time: u32,
    entry_tokens: Vec<u32>,
    credits: Vec<u32>,
    free: Vec<u32>,
    mutex_free: Vec<bool>,
    running: Vec<(u32, usize)>,
    history: Vec<(usize, u32)>,
}

struct Oracle {
    jobs: Vec<JobData>,
    out: BTreeSet<OracleSchedule>,
    seen: HashSet<(u32, Vec<(usize, u32)>)>,
}

pub fn eager_schedules(
    specs: &[WorkflowSpec],
    pool: &ResourcePool,
    counts: &BTreeMap<String, u32>,
) -> Result<BTreeSet<OracleSchedule>, String> {
    let types: Vec<&str> = pool.iter().map(|(r, _)| r).collect();
    let type_index = |r: &str| types.iter().position(|t| *t == r).ok_or(format!("unknown type {r}"));
    let mut jobs: Vec<JobData> = Vec::new();
    let mut entry_tokens = Vec::new();
    let mut edges = 0;
    let mut mutexes = 0;
    for spec in specs {
        let base = jobs.len();
        let local = |id: &str| {
            spec.jobs
                .iter()
                .position(|j| j.id == id)
                .map(|k| base + k)
                .ok_or(format!("unknown job {id}"))
        };
        for job in &spec.jobs {
            let mut demand = Vec::new();
            for (r, &k) in &job.demand {
                demand.push((type_index(r)?, k));
            }
            jobs.push(JobData {
                id: job.id.clone(),
                duration: job.duration,
                demand,
                entry: None,
                preds: Vec::new(),
                succs: Vec::new(),
                mutexes: Vec::new(),
            });
        }
        for c in &spec.constraints {
            match c {
                Constraint::Precedence(a, b) => {
                    let (a, b) = (local(a)?, local(b)?);
                    jobs[a].succs.push(edges);
                    jobs[b].preds.push(edges);
                    edges += 1;
                }
                Constraint::NonOverlap(a, b) => {
                    for j in [local(a)?, local(b)?] {
                        jobs[j].mutexes.push(mutexes);
                    }
                    mutexes += 1;
                }
            }
        }
        let n = counts.get(&spec.activity).copied().unwrap_or(0);
        for job in jobs.iter_mut().skip(base) {
            if job.preds.is_empty() {
                job.entry = Some(entry_tokens.len());
                entry_tokens.push(n);
            }
        }
    }
    let initial = State {
        time: 0,
        entry_tokens,
        credits: vec![0; edges],
        free: pool.iter().map(|(_, c)| c).collect(),
        mutex_free: vec![true; mutexes],
        running: Vec::new(),
        history: Vec::new(),
    };
    let mut oracle = Oracle {
        jobs,
        out: BTreeSet::new(),
        seen: HashSet::new(),
    };
    oracle.instant(initial)?;
    Ok(oracle.out)
}

impl Oracle {
    fn can_start(&self, s: &State, j: usize) -> bool {
        let job = &self.jobs[j];
        let token = match job.entry {
            Some(e) => s.entry_tokens[e] > 0,
            None => job.preds.iter().all(|&e| s.credits[e] > 0),
        };
        token
            && job.demand.iter().all(|&(r, k)| s.free[r] >= k)
            && job.mutexes.iter().all(|&m| s.mutex_free[m])
    }

    fn start(&self, s: &mut State, j: usize) {
        let job = &self.jobs[j];
        match job.entry {
            Some(e) => s.entry_tokens[e] -= 1,
            None => job.preds.iter().for_each(|&e| s.credits[e] -= 1),
        }
        for &(r, k) in &job.demand {
            s.free[r] -= k;
        }
        for &m in &job.mutexes {
            s.mutex_free[m] = false;
        }
        s.running.push((s.time + job.duration, j));
        s.history.push((j, s.time));
    }

    /// All maximal start multisets, choosing multiplicities job by job.
    fn maximal_sets(&self, s: &State, from: usize, started_any: bool, acc: &mut Vec<State>) {
        if from == self.jobs.len() {
            if (0..self.jobs.len()).all(|j| !self.can_start(s, j)) && started_any {
                acc.push(s.clone());
            }
            return;
        }
        self.maximal_sets(s, from + 1, started_any, acc);
        let mut t = s.clone();
        while self.can_start(&t, from) {
            self.start(&mut t, from);
            self.maximal_sets(&t, from + 1, true, acc);
        }
    }

    fn instant(&mut self, s: State) -> Result<(), String> {
        let any = (0..self.jobs.len()).any(|j| self.can_start(&s, j));
        if any {
            let mut next = Vec::new();
            self.maximal_sets(&s, 0, false, &mut next);
            for n in next {
                let mut key = n.history.clone();
                key.sort();
                if self.seen.insert((n.time, key)) {
                    self.advance(n)?;
                }
            }
            Ok(())
        } else {
            self.advance(s)
        }
    }

    fn advance(&mut self, mut s: State) -> Result<(), String> {
        let Some(t) = s.running.iter().map(|r| r.0).min() else {
            let idle = s.entry_tokens.iter().all(|&n| n == 0) && s.credits.iter().all(|&n| n == 0);
            if !idle {
                return Err(format!("stuck at t={}", s.time));
            }
            self.out.insert(self.finish(&s));
            return Ok(());
        };
        s.time = t;
        let (done, rest): (Vec<_>, Vec<_>) = s.running.iter().partition(|r| r.0 == t);
        s.running = rest;
        for (_, j) in done {
            let job = &self.jobs[j];
            for &(r, k) in &job.demand {
                s.free[r] += k;
            }
            for &m in &job.mutexes {
                s.mutex_free[m] = true;
            }
            for &e in &job.succs {
                s.credits[e] += 1;
            }
        }
        self.instant(s)
    }

    fn finish(&self, s: &State) -> OracleSchedule {
        let mut starts: BTreeMap<usize, Vec<u32>> = BTreeMap::new();
        for &(j, t) in &s.history {
            starts.entry(j).or_default().push(t);
        }
        let mut out = Vec::new();
        for (j, mut ts) in starts {
            ts.sort();
            let job = &self.jobs[j];
            for (k, t) in ts.into_iter().enumerate() {
                out.push((job.id.clone(), k as u32, t, t + job.duration));
            }
        }
        out.sort();
        out
    }
}
