//! Product and resource agents negotiating over a shared resource pool.
//!
//! Product agents own one activity instance each and pay for every task out
//! of a manufacturing account. Resource agents own one resource instance and
//! sell the tasks in their catalog. A supervisor hands out recommended
//! partners derived from the best eager schedule and replans after a
//! breakdown.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::analysis::{AnalysisError, InstanceId, Occurrence};
use crate::workflow::{ParseError, WorkflowError};

mod negotiation;
mod scenario;
mod sim;
mod trace;

pub use negotiation::{negotiate_job, Award, Failure, Proposal};
pub use scenario::{parse_scenario, scenario_to_text, Scenario};
pub use sim::{plan_recommendations, run_simulation, SimConfig, Simulation};
pub use trace::{Event, EventKind, ProductSummary, ResourceSummary, TaskRecord, Trace};

pub const DEFAULT_BUDGET: i64 = 100;
/// Cost units per time unit when no catalog price is configured.
pub const DEFAULT_UNIT_PRICE: i64 = 1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AgentError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Workflow(#[from] WorkflowError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Offer {
    pub duration: u32,
    pub price: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResourceState {
    Idle,
    BusyUntil(u32),
    Broken,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResourceAgent {
    pub id: InstanceId,
    /// Job id -> duration and price.
    pub catalog: BTreeMap<String, Offer>,
    pub state: ResourceState,
    pub earned: i64,
    /// Recommended service order; while non-empty the agent only bids for
    /// its head.
    pub queue: VecDeque<Occurrence>,
}

impl ResourceAgent {
    pub fn new(id: InstanceId, catalog: BTreeMap<String, Offer>) -> Self {
        ResourceAgent {
            id,
            catalog,
            state: ResourceState::Idle,
            earned: 0,
            queue: VecDeque::new(),
        }
    }

    pub fn is_broken(&self) -> bool {
        self.state == ResourceState::Broken
    }

    pub fn can_serve(&self, job: &str) -> bool {
        !self.is_broken() && self.catalog.contains_key(job)
    }

    /// Earliest start this agent could offer at `now`.
    pub fn free_at(&self, now: u32) -> Option<u32> {
        match self.state {
            ResourceState::Idle => Some(now),
            ResourceState::BusyUntil(t) => Some(t.max(now)),
            ResourceState::Broken => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JobState {
    Waiting,
    Executing,
    Done,
    Blocked(Failure),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductAgent {
    /// `<activity>.<instance>`, instances numbered from 1.
    pub id: String,
    pub activity: String,
    pub instance: u32,
    pub budget: i64,
    pub balance: i64,
    pub jobs: BTreeMap<String, JobState>,
    pub recommended: BTreeMap<Occurrence, Vec<InstanceId>>,
}

impl ProductAgent {
    pub fn is_complete(&self) -> bool {
        self.jobs.values().all(|s| *s == JobState::Done)
    }

    pub fn state(&self, job: &str) -> JobState {
        self.jobs[job]
    }
}

impl fmt::Display for JobState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            JobState::Waiting => f.write_str("waiting"),
            JobState::Executing => f.write_str("executing"),
            JobState::Done => f.write_str("done"),
            JobState::Blocked(why) => write!(f, "blocked({why})"),
        }
    }
}
