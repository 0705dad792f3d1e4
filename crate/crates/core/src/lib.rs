//! Workflow control over Petri nets: model activities sharing resources,
//! explore the state space, synthesize a deadlock-free supervisor, enumerate
//! and rank eager schedules, and simulate product/resource agents negotiating
//! under the supervisor's recommendations.

pub mod analysis;
pub mod agents;
pub mod case_study;
pub mod kb;
pub mod pn;
pub mod workflow;

pub use pn::{fuse_compose, Marking, NetError, PetriNet};
pub use workflow::{compose_global, ResourcePool, WorkflowSpec};
