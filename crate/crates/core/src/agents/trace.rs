use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use super::Failure;
use crate::analysis::{InstanceId, Occurrence, Schedule, ScheduledJob};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EventKind {
    CallForProposals { product: String, job: String, resource: String },
    Proposal { agent: InstanceId, product: String, job: String, start: u32, price: i64 },
    Award { product: String, job: String, partners: Vec<InstanceId>, start: u32 },
    Confirm { product: String, job: String },
    Cancel { product: String, job: String, reason: String },
    Refuse { product: String, job: String, reason: Failure },
    TaskStart { product: String, occurrence: Occurrence, partners: Vec<InstanceId>, end: u32 },
    TaskEnd { product: String, occurrence: Occurrence },
    TaskAbort { product: String, occurrence: Occurrence, agent: InstanceId },
    Payment { product: String, agent: InstanceId, amount: i64 },
    Breakdown { agent: InstanceId },
    Supervisor { action: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub time: u32,
    pub kind: EventKind,
}

fn list(ids: &[InstanceId]) -> String {
    ids.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",")
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t={} ", self.time)?;
        match &self.kind {
            EventKind::CallForProposals { product, job, resource } => {
                write!(f, "cfp {product} {job} {resource}")
            }
            EventKind::Proposal { agent, product, job, start, price } => {
                write!(f, "proposal {agent} {product} {job} start={start} price={price}")
            }
            EventKind::Award { product, job, partners, start } => {
                write!(f, "award {product} {job} {} start={start}", list(partners))
            }
            EventKind::Confirm { product, job } => write!(f, "reservation-confirm {product} {job}"),
            EventKind::Cancel { product, job, reason } => {
                write!(f, "reservation-cancel {product} {job} {reason}")
            }
            EventKind::Refuse { product, job, reason } => write!(f, "failure {product} {job} {reason}"),
            EventKind::TaskStart { product, occurrence, partners, end } => {
                write!(f, "task-start {product} {occurrence} {} end={end}", list(partners))
            }
            EventKind::TaskEnd { product, occurrence } => write!(f, "task-end {product} {occurrence}"),
            EventKind::TaskAbort { product, occurrence, agent } => {
                write!(f, "task-abort {product} {occurrence} {agent}")
            }
            EventKind::Payment { product, agent, amount } => {
                write!(f, "payment {product} {agent} {amount}")
            }
            EventKind::Breakdown { agent } => write!(f, "breakdown {agent}"),
            EventKind::Supervisor { action } => write!(f, "supervisor-action {action}"),
        }
    }
}

/// A completed task.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskRecord {
    pub product: String,
    pub activity: String,
    pub occurrence: Occurrence,
    pub partners: Vec<InstanceId>,
    pub start: u32,
    pub end: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductSummary {
    pub id: String,
    pub budget: i64,
    pub balance: i64,
    pub completion: Option<u32>,
    /// Unfinished jobs with their state, for products that did not complete.
    pub blocked: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResourceSummary {
    pub id: InstanceId,
    pub earned: i64,
    pub broken_at: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub events: Vec<Event>,
    pub end_time: u32,
    pub tasks: Vec<TaskRecord>,
    pub products: Vec<ProductSummary>,
    pub resources: Vec<ResourceSummary>,
}

impl Trace {
    pub fn blocked_products(&self) -> Vec<&str> {
        self.products
            .iter()
            .filter(|p| p.completion.is_none())
            .map(|p| p.id.as_str())
            .collect()
    }

    pub fn all_completed(&self) -> bool {
        self.products.iter().all(|p| p.completion.is_some())
    }

    pub fn total_debits(&self) -> i64 {
        self.products.iter().map(|p| p.budget - p.balance).sum()
    }

    pub fn total_earnings(&self) -> i64 {
        self.resources.iter().map(|r| r.earned).sum()
    }

    /// Latest completion over completed tasks.
    pub fn makespan(&self) -> u32 {
        self.tasks.iter().map(|t| t.end).max().unwrap_or(0)
    }

    /// Completed tasks as a schedule, occurrences renumbered per job in
    /// start order.
    pub fn realized_schedule(&self) -> Schedule {
        let mut by_job: BTreeMap<&str, Vec<&TaskRecord>> = BTreeMap::new();
        for t in &self.tasks {
            by_job.entry(t.occurrence.job.as_str()).or_default().push(t);
        }
        let mut entries = Vec::new();
        for (job, mut tasks) in by_job {
            tasks.sort_by_key(|t| (t.start, t.occurrence.index));
            for (k, t) in tasks.into_iter().enumerate() {
                entries.push(ScheduledJob {
                    occurrence: Occurrence::new(job, k as u32),
                    activity: t.activity.clone(),
                    start: t.start,
                    end: t.end,
                });
            }
        }
        Schedule::new(entries)
    }

    /// One event per line, then the end time and the final accounts.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            let _ = writeln!(out, "{e}");
        }
        let _ = writeln!(out, "end t={}", self.end_time);
        for p in &self.products {
            let _ = write!(out, "account {} balance={} spent={}", p.id, p.balance, p.budget - p.balance);
            match p.completion {
                Some(t) => {
                    let _ = writeln!(out, " completed t={t}");
                }
                None => {
                    let jobs: Vec<String> = p.blocked.iter().map(|(j, s)| format!("{j}:{s}")).collect();
                    let _ = writeln!(out, " blocked {}", jobs.join(" "));
                }
            }
        }
        for r in &self.resources {
            let _ = write!(out, "earned {} {}", r.id, r.earned);
            match r.broken_at {
                Some(t) => {
                    let _ = writeln!(out, " broken t={t}");
                }
                None => out.push('\n'),
            }
        }
        out
    }
}
