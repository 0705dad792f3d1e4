use std::fs;
use std::path::PathBuf;

use wfnet_core::analysis::parse_weights;
use wfnet_core::case_study;
use wfnet_core::workflow::text::{parse_instances, parse_pool, parse_workflows};

fn data(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/case_study").join(name);
    fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

#[test]
fn workflow_files_match_the_built_in_model() {
    let mut specs = Vec::new();
    for f in ["a1.wf", "a2.wf", "a3.wf"] {
        specs.extend(parse_workflows(&data(f)).unwrap());
    }
    assert_eq!(specs, case_study::specs());
}

#[test]
fn pool_instances_and_weights_files() {
    let pool: Vec<(String, u32)> = case_study::pool().iter().map(|(r, c)| (r.to_string(), c)).collect();
    assert_eq!(parse_pool(&data("pool.txt")).unwrap(), pool);
    assert_eq!(parse_instances(&data("instances.txt")).unwrap(), case_study::unary_counts());
    let weights = parse_weights(&data("weights.txt")).unwrap();
    assert_eq!(weights.values().copied().collect::<Vec<_>>(), vec![1.0; 3]);
}
