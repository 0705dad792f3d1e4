//! The three-activity shared-resource example used throughout the tests,
//! the golden files and the CLI data directory.
//!
//! | job | resources | time |
//! |-----|-----------|------|
//! | J11 | R1, R3    | 3    |
//! | J12 | R3        | 1    |
//! | J13 | R4        | 2    |
//! | J21 | R1        | 2    |
//! | J22 | R2        | 1    |
//! | J23 | R3        | 2    |
//! | J31 | R1        | 3    |
//! | J32 | R4        | 2    |
//! | J33 | R2        | 2    |
//!
//! A1 runs its jobs strictly in sequence. A2 runs J21 first, then J22 and
//! J23 in either order but never together. A3 runs J31 and J32 in any
//! order (possibly together), then J33. Pool: two R1, one each of R2..R4.

use std::collections::BTreeMap;

use crate::workflow::{Constraint, Job, ResourcePool, WorkflowSpec};

fn before(a: &str, b: &str) -> Constraint {
    Constraint::Precedence(a.into(), b.into())
}

pub fn specs() -> Vec<WorkflowSpec> {
    vec![
        WorkflowSpec {
            activity: "A1".into(),
            jobs: vec![
                Job::new("J11", "A1", 3, &[("R1", 1), ("R3", 1)]),
                Job::new("J12", "A1", 1, &[("R3", 1)]),
                Job::new("J13", "A1", 2, &[("R4", 1)]),
            ],
            constraints: vec![before("J11", "J12"), before("J12", "J13")],
        },
        WorkflowSpec {
            activity: "A2".into(),
            jobs: vec![
                Job::new("J21", "A2", 2, &[("R1", 1)]),
                Job::new("J22", "A2", 1, &[("R2", 1)]),
                Job::new("J23", "A2", 2, &[("R3", 1)]),
            ],
            constraints: vec![
                before("J21", "J22"),
                before("J21", "J23"),
                Constraint::NonOverlap("J22".into(), "J23".into()),
            ],
        },
        WorkflowSpec {
            activity: "A3".into(),
            jobs: vec![
                Job::new("J31", "A3", 3, &[("R1", 1)]),
                Job::new("J32", "A3", 2, &[("R4", 1)]),
                Job::new("J33", "A3", 2, &[("R2", 1)]),
            ],
            constraints: vec![before("J31", "J33"), before("J32", "J33")],
        },
    ]
}

pub fn pool() -> ResourcePool {
    ResourcePool::new([("R1", 2), ("R2", 1), ("R3", 1), ("R4", 1)]).expect("valid pool")
}

/// One instance of each activity.
pub fn unary_counts() -> BTreeMap<String, u32> {
    ["A1", "A2", "A3"].iter().map(|a| (a.to_string(), 1)).collect()
}
