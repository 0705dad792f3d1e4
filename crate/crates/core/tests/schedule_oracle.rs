use std::collections::BTreeSet;

use rand::rngs::StdRng;
use rand::SeedableRng;

use wfnet_core::analysis::{check_schedule, enumerate_schedules, AnalysisError, Schedule};
use wfnet_core::case_study;
use wfnet_core::workflow::{compose_global, JobTable};
use wfnet_oracles::generate::random_instance;
use wfnet_oracles::timed::{eager_schedules, OracleSchedule};

fn flatten(s: &Schedule) -> OracleSchedule {
    s.jobs()
        .iter()
        .map(|j| (j.occurrence.job.clone(), j.occurrence.index, j.start, j.end))
        .collect()
}

#[test]
fn case_study_matches_the_oracle() {
    let (specs, pool, counts) = (case_study::specs(), case_study::pool(), case_study::unary_counts());
    let net = compose_global(&specs, &pool, &counts).unwrap();
    let got: BTreeSet<OracleSchedule> = enumerate_schedules(&net, &JobTable::from_specs(&specs))
        .unwrap()
        .iter()
        .map(flatten)
        .collect();
    let want = eager_schedules(&specs, &pool, &counts).unwrap();
    assert_eq!(got, want);
    assert_eq!(got.len(), 7);
}

#[test]
fn a1_alone_is_strictly_sequential() {
    let specs = vec![case_study::specs().remove(0)];
    let counts = [("A1".to_string(), 1)].into_iter().collect();
    let net = compose_global(&specs, &case_study::pool(), &counts).unwrap();
    let all = enumerate_schedules(&net, &JobTable::from_specs(&specs)).unwrap();
    assert_eq!(all.len(), 1);
    assert_eq!(all[0].makespan(), 6);
}

#[test]
fn two_instances_of_every_activity() {
    let (specs, pool) = (case_study::specs(), case_study::pool());
    let counts = ["A1", "A2", "A3"].iter().map(|a| (a.to_string(), 2)).collect();
    let net = compose_global(&specs, &pool, &counts).unwrap();
    let got: BTreeSet<OracleSchedule> = enumerate_schedules(&net, &JobTable::from_specs(&specs))
        .unwrap()
        .iter()
        .map(flatten)
        .collect();
    assert_eq!(got, eager_schedules(&specs, &pool, &counts).unwrap());
}

#[test]
fn random_instances_match_the_oracle() {
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let mut branching = 0;
    for round in 0..150 {
        let inst = random_instance(&mut rng, 6);
        let net = compose_global(&inst.specs, &inst.pool, &inst.counts).unwrap();
        let jobs = JobTable::from_specs(&inst.specs);
        let oracle = eager_schedules(&inst.specs, &inst.pool, &inst.counts);
        match enumerate_schedules(&net, &jobs) {
            Ok(all) => {
                let got: BTreeSet<OracleSchedule> = all.iter().map(flatten).collect();
                branching += usize::from(got.len() > 1);
                assert_eq!(Ok(got), oracle, "round {round}: {inst:?}");
                for s in &all {
                    let problems = check_schedule(s, &inst.specs, &inst.pool, &inst.counts);
                    assert!(problems.is_empty(), "round {round}: {problems:?}");
                }
            }
            Err(AnalysisError::SchedulingDeadlock { .. }) => {
                assert!(oracle.is_err(), "round {round}: {inst:?}");
            }
            Err(e) => panic!("round {round}: {e}"),
        }
    }
    assert!(branching >= 30, "only {branching} instances had a choice");
}
