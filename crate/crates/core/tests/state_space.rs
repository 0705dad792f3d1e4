use std::collections::BTreeMap;

use rand::rngs::StdRng;
use rand::SeedableRng;

use wfnet_core::analysis::{find_deadlocks, reachability, synthesize_supervisor, AnalysisError, Predicate};
use wfnet_core::case_study;
use wfnet_core::pn::PetriNet;
use wfnet_core::workflow::{compose_global, is_final};
use wfnet_oracles::audit::invariant_violations;
use wfnet_oracles::generate::{random_instance, random_predicate};
use wfnet_oracles::trim::expected_policy;

#[test]
fn case_study_state_space() {
    let (specs, pool, counts) = (case_study::specs(), case_study::pool(), case_study::unary_counts());
    let net = compose_global(&specs, &pool, &counts).unwrap();
    let g = reachability(&net, 1_000_000).unwrap();
    assert_eq!((g.len(), g.edges().len()), (679, 1920));
    assert!(find_deadlocks(&g, |m| is_final(&net, m)).is_empty());
    assert_eq!(invariant_violations(&net, &g, &specs, &pool, &counts), Vec::<String>::new());
}

#[test]
fn random_state_spaces_keep_their_invariants() {
    let mut rng = StdRng::seed_from_u64(7);
    for round in 0..100 {
        let inst = random_instance(&mut rng, 6);
        let net = compose_global(&inst.specs, &inst.pool, &inst.counts).unwrap();
        let g = reachability(&net, 1_000_000).unwrap();
        let bad = invariant_violations(&net, &g, &inst.specs, &inst.pool, &inst.counts);
        assert!(bad.is_empty(), "round {round}: {bad:?}");
        // Jobs take all their resources at once, so nothing can wait while
        // holding: no dead markings.
        assert!(find_deadlocks(&g, |m| is_final(&net, m)).is_empty(), "round {round}");
    }
}

fn check_supervisor(net: &PetriNet, predicate: &str) -> Result<bool, String> {
    let bound = Predicate::parse(predicate).unwrap().bind(net).unwrap();
    let g = reachability(net, 1_000_000).unwrap();
    let expected = expected_policy(&g, |m| is_final(net, m), |m| bound.eval(m));
    let got = synthesize_supervisor(&g, |m| is_final(net, m), |m| bound.eval(m));
    match (got, expected) {
        (Err(AnalysisError::NoSupervisor), None) => Ok(false),
        (Ok(policy), Some(want)) => {
            if !want.contains_key(&net.initial_marking()) {
                return Err("oracle lost the root".into());
            }
            let mut have = BTreeMap::new();
            for (m, ts) in policy.iter() {
                if ts.is_empty() && !is_final(net, m) {
                    return Err(format!("non-final sink {}", net.display_marking(m)));
                }
                let mut ts = ts.to_vec();
                ts.sort();
                have.insert(m.clone(), ts);
            }
            if have == want {
                Ok(true)
            } else {
                Err(format!("policy differs: {} vs {} markings", have.len(), want.len()))
            }
        }
        (got, want) => Err(format!("got {:?}, oracle kept root: {}", got.map(|p| p.len()), want.is_some())),
    }
}

#[test]
fn supervisor_matches_the_trim_oracle() {
    let (specs, pool, counts) = (case_study::specs(), case_study::pool(), case_study::unary_counts());
    let net = compose_global(&specs, &pool, &counts).unwrap();
    assert_eq!(check_supervisor(&net, "mark(exec_J11) >= 1 and mark(exec_J31) >= 1"), Ok(true));
    assert_eq!(check_supervisor(&net, "mark(R1) >= 2"), Ok(false));

    let mut rng = StdRng::seed_from_u64(11);
    let (mut kept, mut refused) = (0, 0);
    for round in 0..120 {
        let inst = random_instance(&mut rng, 6);
        let net = compose_global(&inst.specs, &inst.pool, &inst.counts).unwrap();
        let places: Vec<String> = net.places().iter().map(|p| p.label.clone()).collect();
        let predicate = random_predicate(&mut rng, &places);
        match check_supervisor(&net, &predicate) {
            Ok(true) => kept += 1,
            Ok(false) => refused += 1,
            Err(e) => panic!("round {round} ({predicate}): {e}"),
        }
    }
    assert!(kept > 10 && refused > 10, "kept {kept}, refused {refused}");
}
