//! Turning a schedule into recommended negotiation partners.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use super::{AnalysisError, Occurrence, Schedule};
use crate::workflow::{JobTable, ResourcePool};

/// One concrete unit of a resource type, numbered from 1 (`R1#2`).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct InstanceId {
    pub resource: String,
    pub index: u32,
}

impl InstanceId {
    pub fn new(resource: &str, index: u32) -> Self {
        InstanceId {
            resource: resource.to_string(),
            index,
        }
    }
}

impl fmt::Display for InstanceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.resource, self.index)
    }
}

impl FromStr for InstanceId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (r, i) = s
            .split_once('#')
            .ok_or_else(|| format!("expected <type>#<index>, found {s:?}"))?;
        let index: u32 = i.parse().map_err(|_| format!("bad instance index in {s:?}"))?;
        if r.is_empty() || index == 0 {
            return Err(format!("bad instance {s:?}"));
        }
        Ok(InstanceId::new(r, index))
    }
}

/// Every instance of every type in the pool, in (type, index) order.
pub fn pool_instances(pool: &ResourcePool) -> Vec<InstanceId> {
    pool.iter()
        .flat_map(|(r, cap)| (1..=cap).map(move |i| InstanceId::new(r, i)))
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RecommendationSet {
    /// Occurrence -> instances it should be served by.
    pub assignments: BTreeMap<Occurrence, Vec<InstanceId>>,
    /// Instance -> occurrences in the order it should serve them.
    pub service_order: BTreeMap<InstanceId, Vec<Occurrence>>,
}

impl RecommendationSet {
    pub fn partners(&self, occ: &Occurrence) -> Option<&[InstanceId]> {
        self.assignments.get(occ).map(Vec::as_slice)
    }
}

/// First-fit assignment of schedule entries (by start time) to the lowest
/// numbered instances that are free over the whole interval.
pub fn derive_recommendations(
    best: &Schedule,
    pool: &ResourcePool,
    jobs: &JobTable,
) -> Result<RecommendationSet, AnalysisError> {
    let free_from = pool_instances(pool).into_iter().map(|i| (i, 0)).collect();
    derive_with_availability(best, &free_from, &BTreeSet::new(), jobs)
}

/// Like [`derive_recommendations`], but instances become free at the given
/// times and entries in `skip` (already running) are left unassigned.
/// Instances absent from `free_from` are unavailable.
pub fn derive_with_availability(
    best: &Schedule,
    free_from: &BTreeMap<InstanceId, u32>,
    skip: &BTreeSet<Occurrence>,
    jobs: &JobTable,
) -> Result<RecommendationSet, AnalysisError> {
    let mut busy_until = free_from.clone();
    let mut rec = RecommendationSet::default();
    for entry in best.by_start() {
        if skip.contains(&entry.occurrence) {
            continue;
        }
        let info = jobs
            .get(&entry.occurrence.job)
            .ok_or_else(|| AnalysisError::UnknownJob(entry.occurrence.job.clone()))?;
        let mut chosen = Vec::new();
        for (r, &k) in &info.demand {
            let picks: Vec<InstanceId> = busy_until
                .iter()
                .filter(|(i, &t)| &i.resource == r && t <= entry.start)
                .map(|(i, _)| i.clone())
                .take(k as usize)
                .collect();
            if picks.len() < k as usize {
                return Err(AnalysisError::FeasibilityViolation {
                    occurrence: entry.occurrence.to_string(),
                    resource: r.clone(),
                    time: entry.start,
                });
            }
            for i in picks {
                busy_until.insert(i.clone(), entry.end);
                rec.service_order
                    .entry(i.clone())
                    .or_default()
                    .push(entry.occurrence.clone());
                chosen.push(i);
            }
        }
        rec.assignments.insert(entry.occurrence.clone(), chosen);
    }
    Ok(rec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::ScheduledJob;
    use crate::case_study;
    use crate::workflow::{Job, WorkflowSpec};

    fn entry(job: &str, activity: &str, start: u32, end: u32) -> ScheduledJob {
        ScheduledJob {
            occurrence: Occurrence::new(job, 0),
            activity: activity.into(),
            start,
            end,
        }
    }

    #[test]
    fn sole_instance() {
        let spec = WorkflowSpec {
            activity: "A".into(),
            jobs: vec![Job::new("J", "A", 1, &[("R2", 1)])],
            constraints: vec![],
        };
        let rec = derive_recommendations(
            &Schedule::new(vec![entry("J", "A", 0, 1)]),
            &case_study::pool(),
            &JobTable::from_specs(&[spec]),
        )
        .unwrap();
        assert_eq!(rec.partners(&Occurrence::new("J", 0)).unwrap(), &[InstanceId::new("R2", 1)]);
    }

    #[test]
    fn overlapping_jobs_get_distinct_units() {
        let jobs = JobTable::from_specs(&case_study::specs());
        let s = Schedule::new(vec![entry("J11", "A1", 0, 3), entry("J21", "A2", 0, 2)]);
        let rec = derive_recommendations(&s, &case_study::pool(), &jobs).unwrap();
        assert_eq!(
            rec.partners(&Occurrence::new("J11", 0)).unwrap(),
            &[InstanceId::new("R1", 1), InstanceId::new("R3", 1)]
        );
        assert_eq!(rec.partners(&Occurrence::new("J21", 0)).unwrap(), &[InstanceId::new("R1", 2)]);
        assert_eq!(
            rec.service_order[&InstanceId::new("R1", 1)],
            vec![Occurrence::new("J11", 0)]
        );
    }

    #[test]
    fn pigeonhole_is_infeasible() {
        let jobs = JobTable::from_specs(&case_study::specs());
        let s = Schedule::new(vec![
            entry("J11", "A1", 0, 3),
            entry("J21", "A2", 0, 2),
            entry("J31", "A3", 1, 4),
        ]);
        assert!(matches!(
            derive_recommendations(&s, &case_study::pool(), &jobs),
            Err(AnalysisError::FeasibilityViolation { time: 1, .. })
        ));
    }

    #[test]
    fn instance_ids_parse() {
        assert_eq!("R1#2".parse::<InstanceId>().unwrap(), InstanceId::new("R1", 2));
        assert!("R1".parse::<InstanceId>().is_err());
        assert!("R1#0".parse::<InstanceId>().is_err());
    }
}
