//! Workflow specifications and their translation to Petri nets.
//!
//! Every job becomes a `start -> exec -> end` block. Precedence edges get a
//! waiting place between the two blocks; non-overlap pairs share a one-token
//! mutex place. Jobs without predecessors are fed from a `pending_<job>` entry
//! place, which stays unmarked until [`compose_global`] sets instance counts.
//! Resource places carry the resource type as fusion label, so composing the
//! activity nets with the marked resource net shares them.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::pn::{fuse_compose, is_identifier, Marking, NetBuilder, NetError, PetriNet};

pub mod text;

pub use text::{parse_bundle, Bundle, ParseError};

/// Place and transition naming used by the construction.
pub mod names {
    pub fn pending(job: &str) -> String {
        format!("pending_{job}")
    }
    pub fn exec(job: &str) -> String {
        format!("exec_{job}")
    }
    pub fn wait(from: &str, to: &str) -> String {
        format!("wait_{from}_{to}")
    }
    pub fn mutex(a: &str, b: &str) -> String {
        format!("mutex_{a}_{b}")
    }
    pub fn done(activity: &str) -> String {
        format!("done_{activity}")
    }
    pub fn start(job: &str) -> String {
        format!("start_{job}")
    }
    pub fn end(job: &str) -> String {
        format!("end_{job}")
    }

    pub const WORK_PREFIXES: [&str; 3] = ["pending_", "wait_", "exec_"];
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Job {
    pub id: String,
    pub activity: String,
    pub duration: u32,
    /// Resource type -> units held for the whole job.
    pub demand: BTreeMap<String, u32>,
}

impl Job {
    pub fn new(id: &str, activity: &str, duration: u32, demand: &[(&str, u32)]) -> Self {
        Job {
            id: id.into(),
            activity: activity.into(),
            duration,
            demand: demand.iter().map(|&(r, k)| (r.to_string(), k)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Constraint {
    /// First job must end before the second starts.
    Precedence(String, String),
    /// The two jobs never execute at the same time.
    NonOverlap(String, String),
}

impl Constraint {
    fn endpoints(&self) -> (&str, &str) {
        match self {
            Constraint::Precedence(a, b) | Constraint::NonOverlap(a, b) => (a, b),
        }
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constraint::Precedence(a, b) => write!(f, "before {a} {b}"),
            Constraint::NonOverlap(a, b) => write!(f, "exclusive {a} {b}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WorkflowSpec {
    pub activity: String,
    pub jobs: Vec<Job>,
    pub constraints: Vec<Constraint>,
}

impl WorkflowSpec {
    pub fn job(&self, id: &str) -> Option<&Job> {
        self.jobs.iter().find(|j| j.id == id)
    }

    pub fn predecessors<'a>(&'a self, job: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.constraints.iter().filter_map(move |c| match c {
            Constraint::Precedence(a, b) if b == job => Some(a.as_str()),
            _ => None,
        })
    }

    pub fn successors<'a>(&'a self, job: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.constraints.iter().filter_map(move |c| match c {
            Constraint::Precedence(a, b) if a == job => Some(b.as_str()),
            _ => None,
        })
    }

    /// Jobs with no predecessor, in declaration order.
    pub fn entry_jobs(&self) -> Vec<&Job> {
        self.jobs
            .iter()
            .filter(|j| self.predecessors(&j.id).next().is_none())
            .collect()
    }

    /// Jobs with no successor, in declaration order.
    pub fn sink_jobs(&self) -> Vec<&Job> {
        self.jobs
            .iter()
            .filter(|j| self.successors(&j.id).next().is_none())
            .collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ResourcePool {
    capacities: BTreeMap<String, u32>,
}

impl ResourcePool {
    pub fn new<'a, I>(entries: I) -> Result<Self, WorkflowError>
    where
        I: IntoIterator<Item = (&'a str, u32)>,
    {
        let mut capacities = BTreeMap::new();
        for (id, cap) in entries {
            if !is_identifier(id) {
                return Err(WorkflowError::InvalidPool(format!("bad resource id {id:?}")));
            }
            if cap == 0 {
                return Err(WorkflowError::InvalidPool(format!("{id} has capacity 0")));
            }
            if capacities.insert(id.to_string(), cap).is_some() {
                return Err(WorkflowError::InvalidPool(format!("{id} declared twice")));
            }
        }
        Ok(ResourcePool { capacities })
    }

    pub fn capacity(&self, resource: &str) -> Option<u32> {
        self.capacities.get(resource).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u32)> {
        self.capacities.iter().map(|(k, &v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.capacities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.capacities.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Diagnostic {
    DuplicateJob(String),
    InvalidIdentifier(String),
    ZeroDuration(String),
    EmptyDemand(String),
    ForeignJob { job: String, activity: String },
    UnknownResource { job: String, resource: String },
    ExceedsCapacity { job: String, resource: String, demand: u32, capacity: u32 },
    UnknownJob { constraint: String, job: String },
    SelfConstraint(String),
    DuplicateConstraint(String),
    CyclicPrecedence(Vec<String>),
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::DuplicateJob(j) => write!(f, "duplicate-job {j}"),
            Diagnostic::InvalidIdentifier(s) => write!(f, "invalid-identifier {s:?}"),
            Diagnostic::ZeroDuration(j) => write!(f, "zero-duration {j}"),
            Diagnostic::EmptyDemand(j) => write!(f, "empty-demand {j}"),
            Diagnostic::ForeignJob { job, activity } => {
                write!(f, "foreign-job {job} belongs to {activity}")
            }
            Diagnostic::UnknownResource { job, resource } => {
                write!(f, "unknown-resource {resource} used by {job}")
            }
            Diagnostic::ExceedsCapacity {
                job,
                resource,
                demand,
                capacity,
            } => write!(
                f,
                "exceeds-capacity {job} needs {demand} of {resource}, capacity {capacity}"
            ),
            Diagnostic::UnknownJob { constraint, job } => {
                write!(f, "unknown-job {job} in `{constraint}`")
            }
            Diagnostic::SelfConstraint(c) => write!(f, "self-constraint `{c}`"),
            Diagnostic::DuplicateConstraint(c) => write!(f, "duplicate-constraint `{c}`"),
            Diagnostic::CyclicPrecedence(jobs) => {
                write!(f, "cyclic-precedence {}", jobs.join(" "))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WorkflowError {
    #[error("invalid workflow {activity}: {}", join_diagnostics(.diagnostics))]
    Invalid {
        activity: String,
        diagnostics: Vec<Diagnostic>,
    },
    #[error("invalid resource pool: {0}")]
    InvalidPool(String),
    #[error("activity {0} declared twice")]
    DuplicateActivity(String),
    #[error("job {0} appears in more than one activity")]
    SharedJob(String),
    #[error("instance count given for unknown activity {0}")]
    UnknownActivity(String),
    #[error(transparent)]
    Net(#[from] NetError),
}

fn join_diagnostics(d: &[Diagnostic]) -> String {
    d.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; ")
}

/// Checks that do not need a resource pool.
pub fn validate_structure(spec: &WorkflowSpec) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    if !is_identifier(&spec.activity) {
        out.push(Diagnostic::InvalidIdentifier(spec.activity.clone()));
    }
    let mut ids = BTreeSet::new();
    for job in &spec.jobs {
        if !is_identifier(&job.id) {
            out.push(Diagnostic::InvalidIdentifier(job.id.clone()));
        }
        if !ids.insert(job.id.as_str()) {
            out.push(Diagnostic::DuplicateJob(job.id.clone()));
        }
        if job.activity != spec.activity {
            out.push(Diagnostic::ForeignJob {
                job: job.id.clone(),
                activity: job.activity.clone(),
            });
        }
        if job.duration == 0 {
            out.push(Diagnostic::ZeroDuration(job.id.clone()));
        }
        if job.demand.is_empty() || job.demand.values().all(|&k| k == 0) {
            out.push(Diagnostic::EmptyDemand(job.id.clone()));
        }
        for r in job.demand.keys() {
            if !is_identifier(r) {
                out.push(Diagnostic::InvalidIdentifier(r.clone()));
            }
        }
    }
    let mut seen = BTreeSet::new();
    for c in &spec.constraints {
        let (a, b) = c.endpoints();
        for j in [a, b] {
            if !ids.contains(j) {
                out.push(Diagnostic::UnknownJob {
                    constraint: c.to_string(),
                    job: j.to_string(),
                });
            }
        }
        if a == b {
            out.push(Diagnostic::SelfConstraint(c.to_string()));
        }
        if !seen.insert(c.clone()) {
            out.push(Diagnostic::DuplicateConstraint(c.to_string()));
        }
    }
    if let Some(cycle) = precedence_cycle(spec) {
        out.push(Diagnostic::CyclicPrecedence(cycle));
    }
    out
}

/// All violations of `spec` against `pool`; empty means valid.
pub fn validate_spec(spec: &WorkflowSpec, pool: &ResourcePool) -> Vec<Diagnostic> {
    let mut out = validate_structure(spec);
    for job in &spec.jobs {
        for (r, &k) in &job.demand {
            match pool.capacity(r) {
                None => out.push(Diagnostic::UnknownResource {
                    job: job.id.clone(),
                    resource: r.clone(),
                }),
                Some(cap) if k > cap => out.push(Diagnostic::ExceedsCapacity {
                    job: job.id.clone(),
                    resource: r.clone(),
                    demand: k,
                    capacity: cap,
                }),
                Some(_) => {}
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

// Kahn's algorithm; on failure returns the jobs left with nonzero in-degree,
// which contain every cycle.
fn precedence_cycle(spec: &WorkflowSpec) -> Option<Vec<String>> {
    let mut indeg: BTreeMap<&str, usize> = BTreeMap::new();
    let mut succ: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for c in &spec.constraints {
        if let Constraint::Precedence(a, b) = c {
            indeg.entry(a).or_default();
            *indeg.entry(b).or_default() += 1;
            succ.entry(a).or_default().push(b);
        }
    }
    let mut ready: Vec<&str> = indeg.iter().filter(|(_, &d)| d == 0).map(|(&j, _)| j).collect();
    while let Some(j) = ready.pop() {
        for &s in succ.get(j).map(Vec::as_slice).unwrap_or(&[]) {
            let d = indeg.get_mut(s).unwrap();
            *d -= 1;
            if *d == 0 {
                ready.push(s);
            }
        }
        indeg.remove(j);
    }
    if indeg.is_empty() {
        None
    } else {
        Some(indeg.keys().map(|s| s.to_string()).collect())
    }
}

fn refuse(spec: &WorkflowSpec, diagnostics: Vec<Diagnostic>) -> WorkflowError {
    WorkflowError::Invalid {
        activity: spec.activity.clone(),
        diagnostics,
    }
}

/// Translates one activity into its (unmarked) Petri net block structure.
pub fn activity_to_net(spec: &WorkflowSpec) -> Result<PetriNet, WorkflowError> {
    let diagnostics = validate_structure(spec);
    if !diagnostics.is_empty() {
        return Err(refuse(spec, diagnostics));
    }
    let mut b = NetBuilder::new();
    let mut resources = BTreeSet::new();
    for job in &spec.jobs {
        let (start, end, exec) = (names::start(&job.id), names::end(&job.id), names::exec(&job.id));
        b.transition(&start, &start)
            .transition(&end, &end)
            .place(&exec, &exec, 0)
            .output(&start, &exec, 1)
            .input(&exec, &end, 1);
        for (r, &k) in job.demand.iter().filter(|(_, &k)| k > 0) {
            resources.insert(r.as_str());
            b.input(r, &start, k).output(&end, r, k);
        }
    }
    for job in spec.entry_jobs() {
        let pending = names::pending(&job.id);
        b.place(&pending, &pending, 0)
            .input(&pending, &names::start(&job.id), 1);
    }
    let done = names::done(&spec.activity);
    b.place(&done, &done, 0);
    for job in spec.sink_jobs() {
        b.output(&names::end(&job.id), &done, 1);
    }
    for c in &spec.constraints {
        match c {
            Constraint::Precedence(a, z) => {
                let w = names::wait(a, z);
                b.place(&w, &w, 0)
                    .output(&names::end(a), &w, 1)
                    .input(&w, &names::start(z), 1);
            }
            Constraint::NonOverlap(x, y) => {
                let m = names::mutex(x, y);
                b.place(&m, &m, 1);
                for j in [x, y] {
                    b.input(&m, &names::start(j), 1).output(&names::end(j), &m, 1);
                }
            }
        }
    }
    for r in resources {
        b.place(r, r, 0);
    }
    Ok(b.build()?)
}

/// One marked place per resource type, holding its capacity.
pub fn resource_net(pool: &ResourcePool) -> Result<PetriNet, WorkflowError> {
    let mut b = NetBuilder::new();
    for (r, cap) in pool.iter() {
        b.place(r, r, cap);
    }
    Ok(b.build()?)
}

/// Global model: all activity nets fused with the resource net, entry places
/// marked with the instance counts (missing activities get 0).
pub fn compose_global(
    specs: &[WorkflowSpec],
    pool: &ResourcePool,
    counts: &BTreeMap<String, u32>,
) -> Result<PetriNet, WorkflowError> {
    let mut activities = BTreeSet::new();
    let mut jobs = BTreeSet::new();
    for spec in specs {
        if !activities.insert(spec.activity.as_str()) {
            return Err(WorkflowError::DuplicateActivity(spec.activity.clone()));
        }
        let diagnostics = validate_spec(spec, pool);
        if !diagnostics.is_empty() {
            return Err(refuse(spec, diagnostics));
        }
        for job in &spec.jobs {
            if !jobs.insert(job.id.as_str()) {
                return Err(WorkflowError::SharedJob(job.id.clone()));
            }
        }
    }
    if let Some(a) = counts.keys().find(|a| !activities.contains(a.as_str())) {
        return Err(WorkflowError::UnknownActivity(a.clone()));
    }

    let mut nets = vec![resource_net(pool)?];
    for spec in specs {
        nets.push(activity_to_net(spec)?);
    }
    let net = fuse_compose(&nets)?;

    let mut m = net.initial_marking();
    for spec in specs {
        let n = counts.get(&spec.activity).copied().unwrap_or(0);
        for job in spec.entry_jobs() {
            let p = net
                .place_by_label(&names::pending(&job.id))
                .expect("entry place exists by construction");
            m.set(p, n);
        }
    }
    Ok(net.with_initial_marking(&m)?)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JobInfo {
    pub activity: String,
    pub duration: u32,
    pub demand: BTreeMap<String, u32>,
}

/// Job id -> activity, duration and demand, gathered from a set of specs.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct JobTable {
    jobs: BTreeMap<String, JobInfo>,
}

impl JobTable {
    pub fn from_specs(specs: &[WorkflowSpec]) -> Self {
        let jobs = specs
            .iter()
            .flat_map(|s| &s.jobs)
            .map(|j| {
                (
                    j.id.clone(),
                    JobInfo {
                        activity: j.activity.clone(),
                        duration: j.duration,
                        demand: j.demand.clone(),
                    },
                )
            })
            .collect();
        JobTable { jobs }
    }

    pub fn get(&self, job: &str) -> Option<&JobInfo> {
        self.jobs.get(job)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &JobInfo)> {
        self.jobs.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.jobs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.jobs.is_empty()
    }
}

/// True when no work place (`pending_*`, `wait_*`, `exec_*`) holds a token,
/// i.e. every started instance has run to its done place.
pub fn is_final(net: &PetriNet, m: &Marking) -> bool {
    FinalCondition::new(net).holds(m)
}

/// Precomputed form of [`is_final`] for repeated evaluation.
#[derive(Debug, Clone)]
pub struct FinalCondition {
    work: Vec<usize>,
}

impl FinalCondition {
    pub fn new(net: &PetriNet) -> Self {
        let work = net
            .places()
            .iter()
            .enumerate()
            .filter(|(_, p)| names::WORK_PREFIXES.iter().any(|pre| p.label.starts_with(pre)))
            .map(|(i, _)| i)
            .collect();
        FinalCondition { work }
    }

    pub fn holds(&self, m: &Marking) -> bool {
        self.work.iter().all(|&p| m.get(p) == 0)
    }
}
