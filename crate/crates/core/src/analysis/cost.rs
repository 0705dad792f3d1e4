use std::cmp::Ordering;
use std::collections::BTreeMap;

use super::{AnalysisError, Schedule};
use crate::workflow::text::{directive_lines, ident};
use crate::workflow::ParseError;

/// Activity -> non-negative weight on its completion time.
pub type Weights = BTreeMap<String, f64>;

#[derive(Debug, Clone, PartialEq)]
pub struct CostReport {
    /// Activity -> latest end over its jobs.
    pub completion: BTreeMap<String, u32>,
    pub cost: BTreeMap<String, f64>,
    pub total: f64,
    pub makespan: u32,
}

/// Weighted completion time per activity, summed.
pub fn evaluate_schedule(s: &Schedule, weights: &Weights) -> Result<CostReport, AnalysisError> {
    let mut completion: BTreeMap<String, u32> = BTreeMap::new();
    for j in s.jobs() {
        let c = completion.entry(j.activity.clone()).or_insert(0);
        *c = (*c).max(j.end);
    }
    let mut cost = BTreeMap::new();
    for (activity, &t) in &completion {
        let w = *weights
            .get(activity)
            .ok_or_else(|| AnalysisError::IncompleteWeights(activity.clone()))?;
        if !(w >= 0.0 && w.is_finite()) {
            return Err(AnalysisError::InvalidWeight {
                activity: activity.clone(),
                value: w,
            });
        }
        cost.insert(activity.clone(), w * f64::from(t));
    }
    let total = cost.values().sum();
    Ok(CostReport {
        completion,
        cost,
        total,
        makespan: s.makespan(),
    })
}

/// Ranking order: total cost, then makespan, then the start vector.
pub fn ranking_order(a: (&Schedule, &CostReport), b: (&Schedule, &CostReport)) -> Ordering {
    a.1.total
        .total_cmp(&b.1.total)
        .then(a.1.makespan.cmp(&b.1.makespan))
        .then_with(|| a.0.start_vector().cmp(&b.0.start_vector()))
}

pub fn rank_schedules(
    schedules: &[Schedule],
    weights: &Weights,
) -> Result<Vec<(Schedule, CostReport)>, AnalysisError> {
    if schedules.is_empty() {
        return Err(AnalysisError::EmptyInput);
    }
    let mut ranked = schedules
        .iter()
        .map(|s| Ok((s.clone(), evaluate_schedule(s, weights)?)))
        .collect::<Result<Vec<_>, AnalysisError>>()?;
    ranked.sort_by(|a, b| ranking_order((&a.0, &a.1), (&b.0, &b.1)));
    Ok(ranked)
}

/// `weight <activity> <value>` lines.
pub fn parse_weights(text: &str) -> Result<Weights, ParseError> {
    let mut out = Weights::new();
    for (line, f) in directive_lines(text) {
        let err = |message: String| ParseError { line, message };
        match f.as_slice() {
            ["weight", a, v] => {
                let value: f64 = v
                    .parse()
                    .map_err(|_| err(format!("expected a number, found {v:?}")))?;
                if !(value >= 0.0 && value.is_finite()) {
                    return Err(err(format!("weight must be finite and >= 0, got {v}")));
                }
                if out.insert(ident(line, a)?, value).is_some() {
                    return Err(err(format!("weight for {a} given twice")));
                }
            }
            _ => return Err(err(format!("expected `weight <activity> <value>`, found {:?}", f.join(" ")))),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{Occurrence, ScheduledJob};
    use proptest::prelude::*;

    fn sched(entries: &[(&str, &str, u32, u32)]) -> Schedule {
        Schedule::new(
            entries
                .iter()
                .map(|&(job, act, start, end)| ScheduledJob {
                    occurrence: Occurrence::new(job, 0),
                    activity: act.into(),
                    start,
                    end,
                })
                .collect(),
        )
    }

    fn w(pairs: &[(&str, f64)]) -> Weights {
        pairs.iter().map(|&(a, v)| (a.to_string(), v)).collect()
    }

    #[test]
    fn zero_weights_cost_nothing() {
        let s = sched(&[("J11", "A1", 0, 3), ("J21", "A2", 0, 5)]);
        let r = evaluate_schedule(&s, &w(&[("A1", 0.0), ("A2", 0.0)])).unwrap();
        assert_eq!(r.total, 0.0);
        assert_eq!(r.makespan, 5);
    }

    #[test]
    fn sequential_activity_cost() {
        let s = sched(&[("J11", "A1", 0, 3), ("J12", "A1", 3, 4), ("J13", "A1", 4, 6)]);
        let r = evaluate_schedule(&s, &w(&[("A1", 1.0)])).unwrap();
        assert_eq!(r.completion["A1"], 6);
        assert_eq!(r.total, 6.0);
        assert_eq!(r.makespan, 6);
    }

    #[test]
    fn missing_weight_is_an_error() {
        let s = sched(&[("J11", "A1", 0, 3)]);
        assert_eq!(
            evaluate_schedule(&s, &Weights::new()),
            Err(AnalysisError::IncompleteWeights("A1".into()))
        );
    }

    #[test]
    fn ranking_basics() {
        assert_eq!(rank_schedules(&[], &Weights::new()), Err(AnalysisError::EmptyInput));
        let only = sched(&[("J", "A", 0, 1)]);
        let r = rank_schedules(std::slice::from_ref(&only), &w(&[("A", 1.0)])).unwrap();
        assert_eq!(r[0].0, only);
        // Equal cost and makespan: earlier start vector first.
        let a = sched(&[("Ja", "A", 0, 2), ("Jb", "B", 2, 4)]);
        let b = sched(&[("Ja", "A", 2, 4), ("Jb", "B", 0, 2)]);
        let r = rank_schedules(&[b.clone(), a.clone()], &w(&[("A", 1.0), ("B", 1.0)])).unwrap();
        assert_eq!(r[0].0, a);
        assert_eq!(r[1].0, b);
    }

    #[test]
    fn weights_file() {
        let ws = parse_weights("# w\nweight A1 1\nweight A2 0.5\n").unwrap();
        assert_eq!(ws["A2"], 0.5);
        assert_eq!(parse_weights("weight A1 -1\n").unwrap_err().line, 1);
        assert!(parse_weights("weight A1 x\n").is_err());
        assert!(parse_weights("budget A1 1\n").is_err());
    }

    proptest! {
        #[test]
        fn ranking_is_a_sorted_permutation(
            raw in proptest::collection::vec((0u32..5, 1u32..4, 0u32..5, 1u32..4), 1..12),
            wa in 0.0f64..3.0,
            wb in 0.0f64..3.0,
        ) {
            let schedules: Vec<Schedule> = raw
                .iter()
                .map(|&(sa, da, sb, db)| sched(&[("Ja", "A", sa, sa + da), ("Jb", "B", sb, sb + db)]))
                .collect();
            let weights = w(&[("A", wa), ("B", wb)]);
            let ranked = rank_schedules(&schedules, &weights).unwrap();
            prop_assert_eq!(ranked.len(), schedules.len());
            let mut before: Vec<Schedule> = schedules.clone();
            let mut after: Vec<Schedule> = ranked.iter().map(|r| r.0.clone()).collect();
            before.sort();
            after.sort();
            prop_assert_eq!(before, after);
            for pair in ranked.windows(2) {
                prop_assert_ne!(
                    ranking_order((&pair[0].0, &pair[0].1), (&pair[1].0, &pair[1].1)),
                    Ordering::Greater
                );
            }
            // Totality and antisymmetry on every pair.
            for x in &ranked {
                for y in &ranked {
                    let xy = ranking_order((&x.0, &x.1), (&y.0, &y.1));
                    let yx = ranking_order((&y.0, &y.1), (&x.0, &x.1));
                    prop_assert_eq!(xy, yx.reverse());
                }
            }
        }
    }
}
