//! Eager timed execution of composed workflow nets.
//!
//! Start transitions are the only choices. Time advances to the next job
//! end only when no start is enabled; ends fire automatically `duration`
//! units after their start. Every maximal run is one schedule; runs that
//! differ only in the interleaving of starts at the same instant collapse.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use super::AnalysisError;
use crate::pn::{Marking, PetriNet};
use crate::workflow::{names, Constraint, FinalCondition, JobTable, ResourcePool, WorkflowSpec};

/// The `index`-th start of `job` (counting from 0 in start-time order).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Occurrence {
    pub job: String,
    pub index: u32,
}

impl Occurrence {
    pub fn new(job: &str, index: u32) -> Self {
        Occurrence {
            job: job.to_string(),
            index,
        }
    }
}

impl fmt::Display for Occurrence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.index == 0 {
            write!(f, "{}", self.job)
        } else {
            write!(f, "{}[{}]", self.job, self.index)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ScheduledJob {
    pub occurrence: Occurrence,
    pub activity: String,
    pub start: u32,
    pub end: u32,
}

/// Job occurrence -> [start, end). Entries are kept sorted by occurrence, so
/// the derived order compares start vectors lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Schedule {
    jobs: Vec<ScheduledJob>,
}

impl Schedule {
    pub fn new(mut jobs: Vec<ScheduledJob>) -> Self {
        jobs.sort();
        Schedule { jobs }
    }

    /// Entries in occurrence order.
    pub fn jobs(&self) -> &[ScheduledJob] {
        &self.jobs
    }

    /// Entries ordered by (start, job, index) for display.
    pub fn by_start(&self) -> Vec<&ScheduledJob> {
        let mut v: Vec<&ScheduledJob> = self.jobs.iter().collect();
        v.sort_by(|a, b| (a.start, &a.occurrence).cmp(&(b.start, &b.occurrence)));
        v
    }

    pub fn get(&self, occ: &Occurrence) -> Option<&ScheduledJob> {
        self.jobs
            .binary_search_by(|j| j.occurrence.cmp(occ))
            .ok()
            .map(|i| &self.jobs[i])
    }

    pub fn makespan(&self) -> u32 {
        self.jobs.iter().map(|j| j.end).max().unwrap_or(0)
    }

    pub fn start_vector(&self) -> Vec<u32> {
        self.jobs.iter().map(|j| j.start).collect()
    }

    pub fn len(&self) -> usize {
        self.jobs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.jobs.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunningJob {
    pub occurrence: Occurrence,
    pub activity: String,
    pub start: u32,
    pub end: u32,
}

/// Starting point of an enumeration: a marking at a given time with some
/// jobs already running and some already finished.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimedState {
    pub marking: Marking,
    pub time: u32,
    pub running: Vec<RunningJob>,
    pub finished: Vec<ScheduledJob>,
    /// Next occurrence index per job; absent means 0.
    pub next_index: BTreeMap<String, u32>,
}

impl TimedState {
    pub fn initial(net: &PetriNet) -> Self {
        TimedState {
            marking: net.initial_marking(),
            time: 0,
            running: Vec::new(),
            finished: Vec::new(),
            next_index: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Upper bound on distinct partial runs visited.
    pub max_states: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_states: 2_000_000,
        }
    }
}

/// All eager schedules of `net` from its initial marking, in ascending
/// start-vector order.
pub fn enumerate_schedules(net: &PetriNet, jobs: &JobTable) -> Result<Vec<Schedule>, AnalysisError> {
    enumerate_from(net, jobs, &TimedState::initial(net), Limits::default())
}

#[derive(Clone, Copy)]
enum Role {
    Start(usize),
    End,
}

struct JobRef {
    id: String,
    activity: String,
    duration: u32,
    start: usize,
    end: usize,
}

#[derive(Clone)]
struct Node {
    marking: Marking,
    time: u32,
    // (end, job, occurrence index)
    running: Vec<(u32, usize, u32)>,
    next: Vec<u32>,
    // (job, occurrence index, start), kept sorted
    started: Vec<(usize, u32, u32)>,
}

struct Explorer<'a> {
    net: &'a PetriNet,
    jobs: Vec<JobRef>,
    starts: Vec<(usize, usize)>,
    finals: FinalCondition,
    finished: Vec<ScheduledJob>,
    seen: HashSet<(u32, Vec<(usize, u32, u32)>)>,
    out: BTreeSet<Schedule>,
    limits: Limits,
}

impl Explorer<'_> {
    fn fire_due_ends(&self, node: &mut Node) -> Result<(), AnalysisError> {
        let time = node.time;
        let mut i = 0;
        while i < node.running.len() {
            if node.running[i].0 <= time {
                let (_, j, _) = node.running.remove(i);
                node.marking = self.net.fire_at(self.jobs[j].end, &node.marking)?;
            } else {
                i += 1;
            }
        }
        Ok(())
    }

    fn record(&mut self, node: &Node) {
        let mut entries = self.finished.clone();
        entries.extend(node.started.iter().map(|&(j, idx, start)| {
            let job = &self.jobs[j];
            ScheduledJob {
                occurrence: Occurrence::new(&job.id, idx),
                activity: job.activity.clone(),
                start,
                end: start + job.duration,
            }
        }));
        self.out.insert(Schedule::new(entries));
    }

    fn visit(&mut self, mut node: Node) -> Result<(), AnalysisError> {
        loop {
            let enabled: Vec<usize> = self
                .starts
                .iter()
                .filter(|&&(t, _)| self.net.is_enabled_at(t, &node.marking))
                .map(|&(_, j)| j)
                .collect();
            if !enabled.is_empty() {
                for j in enabled {
                    let mut child = node.clone();
                    child.marking = self.net.fire_at(self.jobs[j].start, &child.marking)?;
                    let idx = child.next[j];
                    child.next[j] += 1;
                    let start = child.time;
                    child.running.push((start + self.jobs[j].duration, j, idx));
                    let pos = child.started.partition_point(|e| *e < (j, idx, start));
                    child.started.insert(pos, (j, idx, start));
                    if self.seen.insert((child.time, child.started.clone())) {
                        if self.seen.len() > self.limits.max_states {
                            return Err(AnalysisError::CapacityExceeded {
                                cap: self.limits.max_states,
                                explored: self.seen.len(),
                            });
                        }
                        self.visit(child)?;
                    }
                }
                return Ok(());
            }
            match node.running.iter().map(|r| r.0).min() {
                Some(t) => {
                    node.time = t;
                    self.fire_due_ends(&mut node)?;
                }
                None => {
                    if self.finals.holds(&node.marking) {
                        self.record(&node);
                        return Ok(());
                    }
                    return Err(AnalysisError::SchedulingDeadlock {
                        time: node.time,
                        marking: self.net.display_marking(&node.marking),
                    });
                }
            }
        }
    }
}

/// Eager schedules reachable from `state`. Running and finished jobs of the
/// state appear in every returned schedule.
pub fn enumerate_from(
    net: &PetriNet,
    jobs: &JobTable,
    state: &TimedState,
    limits: Limits,
) -> Result<Vec<Schedule>, AnalysisError> {
    let mut refs: Vec<JobRef> = Vec::new();
    let mut roles: Vec<Option<Role>> = vec![None; net.transitions().len()];
    for (id, info) in jobs.iter() {
        let (s, e) = (
            net.transition_by_label(&names::start(id)),
            net.transition_by_label(&names::end(id)),
        );
        if let (Some(s), Some(e)) = (s, e) {
            roles[s] = Some(Role::Start(refs.len()));
            roles[e] = Some(Role::End);
            refs.push(JobRef {
                id: id.to_string(),
                activity: info.activity.clone(),
                duration: info.duration,
                start: s,
                end: e,
            });
        }
    }
    if let Some(t) = roles.iter().position(Option::is_none) {
        return Err(AnalysisError::ForeignTransition(net.transitions()[t].id.clone()));
    }
    let starts = roles
        .iter()
        .enumerate()
        .filter_map(|(t, r)| match r {
            Some(Role::Start(j)) => Some((t, *j)),
            _ => None,
        })
        .collect();
    let job_index = |id: &str| {
        refs.iter()
            .position(|r| r.id == id)
            .ok_or_else(|| AnalysisError::UnknownJob(id.to_string()))
    };

    let mut node = Node {
        marking: state.marking.clone(),
        time: state.time,
        running: Vec::new(),
        next: refs
            .iter()
            .map(|r| state.next_index.get(&r.id).copied().unwrap_or(0))
            .collect(),
        started: Vec::new(),
    };
    let mut finished = state.finished.clone();
    for r in &state.running {
        let j = job_index(&r.occurrence.job)?;
        node.running.push((r.end, j, r.occurrence.index));
        if r.end <= state.time {
            finished.push(ScheduledJob {
                occurrence: r.occurrence.clone(),
                activity: r.activity.clone(),
                start: r.start,
                end: r.end,
            });
        } else {
            node.started.push((j, r.occurrence.index, r.start));
        }
    }
    node.started.sort();

    let mut ex = Explorer {
        net,
        jobs: refs,
        starts,
        finals: FinalCondition::new(net),
        finished,
        seen: HashSet::new(),
        out: BTreeSet::new(),
        limits,
    };
    ex.fire_due_ends(&mut node)?;
    ex.visit(node)?;
    Ok(ex.out.into_iter().collect())
}

/// Violations of the schedule invariants against the workflow data: wrong
/// durations, wrong occurrence counts, resource overuse, broken precedence or
/// non-overlap. Empty means the schedule is valid.
pub fn check_schedule(
    s: &Schedule,
    specs: &[WorkflowSpec],
    pool: &ResourcePool,
    counts: &BTreeMap<String, u32>,
) -> Vec<String> {
    let mut problems = Vec::new();
    let mut by_job: BTreeMap<&str, Vec<&ScheduledJob>> = BTreeMap::new();
    for j in s.jobs() {
        by_job.entry(j.occurrence.job.as_str()).or_default().push(j);
    }
    let mut demand_of = BTreeMap::new();
    for spec in specs {
        let n = counts.get(&spec.activity).copied().unwrap_or(0) as usize;
        for job in &spec.jobs {
            demand_of.insert(job.id.as_str(), &job.demand);
            let occ = by_job.get(job.id.as_str()).map(Vec::as_slice).unwrap_or(&[]);
            if occ.len() != n {
                problems.push(format!("{} runs {} times, expected {n}", job.id, occ.len()));
            }
            for o in occ {
                if o.end != o.start + job.duration {
                    problems.push(format!("{} has wrong duration", o.occurrence));
                }
            }
        }
        for c in &spec.constraints {
            match c {
                Constraint::Precedence(a, b) => {
                    let mut ends: Vec<u32> = by_job.get(a.as_str()).into_iter().flatten().map(|o| o.end).collect();
                    let mut starts: Vec<u32> = by_job.get(b.as_str()).into_iter().flatten().map(|o| o.start).collect();
                    ends.sort();
                    starts.sort();
                    for (i, st) in starts.iter().enumerate() {
                        if ends.get(i).is_none_or(|e| e > st) {
                            problems.push(format!("{b} start {st} precedes an end of {a}"));
                        }
                    }
                }
                Constraint::NonOverlap(a, b) => {
                    let group: Vec<&&ScheduledJob> = [a, b]
                        .iter()
                        .flat_map(|j| by_job.get(j.as_str()).into_iter().flatten())
                        .collect();
                    for (i, x) in group.iter().enumerate() {
                        for y in &group[i + 1..] {
                            if x.start < y.end && y.start < x.end {
                                problems.push(format!("{} overlaps {}", x.occurrence, y.occurrence));
                            }
                        }
                    }
                }
            }
        }
    }
    let times: BTreeSet<u32> = s.jobs().iter().map(|j| j.start).collect();
    for t in times {
        let mut used: BTreeMap<&str, u32> = BTreeMap::new();
        for j in s.jobs().iter().filter(|j| j.start <= t && t < j.end) {
            match demand_of.get(j.occurrence.job.as_str()) {
                Some(d) => {
                    for (r, k) in d.iter() {
                        *used.entry(r.as_str()).or_default() += k;
                    }
                }
                None => problems.push(format!("{} is not a known job", j.occurrence)),
            }
        }
        for (r, k) in used {
            if k > pool.capacity(r).unwrap_or(0) {
                problems.push(format!("{r} overused at t={t}: {k}"));
            }
        }
    }
    problems
}
