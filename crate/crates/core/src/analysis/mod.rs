//! State-space analysis of composed workflow nets.

use thiserror::Error;

use crate::pn::NetError;

pub mod cost;
pub mod predicate;
pub mod reach;
pub mod recommend;
pub mod schedule;
pub mod supervisor;

pub use cost::{evaluate_schedule, parse_weights, rank_schedules, CostReport, Weights};
pub use predicate::{Predicate, PredicateError};
pub use reach::{check_forbidden, find_deadlocks, reachability, Edge, ReachabilityGraph};
pub use recommend::{derive_recommendations, derive_with_availability, pool_instances, InstanceId, RecommendationSet};
pub use schedule::{
    check_schedule, enumerate_from, enumerate_schedules, Limits, Occurrence, RunningJob,
    Schedule, ScheduledJob, TimedState,
};
pub use supervisor::{synthesize_supervisor, synthesize_with_uncontrollable, SupervisorPolicy};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("state space exceeds the cap of {cap} (explored {explored})")]
    CapacityExceeded { cap: usize, explored: usize },
    #[error("net is unbounded: {marking} strictly covers an ancestor")]
    Unbounded { marking: String },
    #[error("no supervisor exists: the initial marking cannot be kept")]
    NoSupervisor,
    #[error("scheduling deadlock at t={time}: {marking}")]
    SchedulingDeadlock { time: u32, marking: String },
    #[error("transition {0} is neither the start nor the end of a known job")]
    ForeignTransition(String),
    #[error("no weight for activity {0}")]
    IncompleteWeights(String),
    #[error("invalid weight for {activity}: {value}")]
    InvalidWeight { activity: String, value: f64 },
    #[error("nothing to rank")]
    EmptyInput,
    #[error("schedule infeasible: {occurrence} needs {resource} at t={time}, no instance free")]
    FeasibilityViolation {
        occurrence: String,
        resource: String,
        time: u32,
    },
    #[error("unknown job {0}")]
    UnknownJob(String),
    #[error(transparent)]
    Predicate(#[from] PredicateError),
    #[error(transparent)]
    Net(#[from] NetError),
}
