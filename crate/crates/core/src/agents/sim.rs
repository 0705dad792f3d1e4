use std::collections::{BTreeMap, BTreeSet};

use super::{
    negotiate_job, AgentError, Event, EventKind, JobState, Offer, ProductAgent, ProductSummary,
    ResourceAgent, ResourceState, ResourceSummary, Scenario, TaskRecord, Trace, DEFAULT_BUDGET,
    DEFAULT_UNIT_PRICE,
};
use crate::analysis::recommend::pool_instances;
use crate::analysis::{
    derive_recommendations, enumerate_from, enumerate_schedules, rank_schedules,
    recommend::derive_with_availability, InstanceId, Limits, Occurrence, RecommendationSet,
    RunningJob, Schedule, ScheduledJob, TimedState, Weights,
};
use crate::pn::{Marking, PetriNet};
use crate::workflow::{
    compose_global, names, Constraint, Job, JobTable, ResourcePool, WorkflowSpec,
};

/// Partial runs the supervisor may explore when replanning.
const REPLAN_LIMITS: Limits = Limits { max_states: 200_000 };

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub specs: Vec<WorkflowSpec>,
    pub pool: ResourcePool,
    /// Activity -> number of product agents.
    pub counts: BTreeMap<String, u32>,
    /// Activity -> initial balance; missing entries get [`DEFAULT_BUDGET`].
    pub budgets: BTreeMap<String, i64>,
    /// (resource type, job) -> price; missing entries cost the job duration.
    pub prices: BTreeMap<(String, String), i64>,
    pub breakdowns: Vec<(InstanceId, u32)>,
    /// Supervised mode when present.
    pub recommendations: Option<RecommendationSet>,
    /// Recompute recommendations on the degraded model after a breakdown.
    pub replan: bool,
    /// Ranking weights used when replanning.
    pub weights: Weights,
}

impl SimConfig {
    pub fn new(specs: Vec<WorkflowSpec>, pool: ResourcePool, counts: BTreeMap<String, u32>) -> Self {
        let weights = specs.iter().map(|s| (s.activity.clone(), 1.0)).collect();
        SimConfig {
            specs,
            pool,
            counts,
            budgets: BTreeMap::new(),
            prices: BTreeMap::new(),
            breakdowns: Vec::new(),
            recommendations: None,
            replan: true,
            weights,
        }
    }

    pub fn apply_scenario(&mut self, scenario: &Scenario) {
        self.budgets.extend(scenario.budgets.clone());
        self.prices.extend(scenario.prices.clone());
        self.breakdowns.extend(scenario.breakdowns.iter().cloned());
    }
}

/// Best-ranked eager schedule of the model and the partners realizing it.
pub fn plan_recommendations(
    specs: &[WorkflowSpec],
    pool: &ResourcePool,
    counts: &BTreeMap<String, u32>,
    weights: &Weights,
) -> Result<(Schedule, RecommendationSet), AgentError> {
    let net = compose_global(specs, pool, counts)?;
    let jobs = JobTable::from_specs(specs);
    let schedules = enumerate_schedules(&net, &jobs)?;
    let best = rank_schedules(&schedules, weights)?.swap_remove(0).0;
    let rec = derive_recommendations(&best, pool, &jobs)?;
    Ok((best, rec))
}

pub fn run_simulation(config: &SimConfig) -> Result<Trace, AgentError> {
    Ok(Simulation::new(config)?.run())
}

#[derive(Debug, Clone)]
struct Task {
    product: usize,
    occurrence: Occurrence,
    partners: Vec<(usize, i64)>,
    start: u32,
    end: u32,
}

/// The event loop. Built from a [`SimConfig`], consumed by [`Simulation::run`].
#[derive(Debug, Clone)]
pub struct Simulation {
    specs: Vec<WorkflowSpec>,
    spec_of: BTreeMap<String, usize>,
    jobs: JobTable,
    net: PetriNet,
    weights: Weights,
    products: Vec<ProductAgent>,
    resources: Vec<ResourceAgent>,
    /// (time, resource index), sorted; `next_breakdown` points at the first
    /// one not yet applied.
    breakdowns: Vec<(u32, usize)>,
    next_breakdown: usize,
    supervised: bool,
    replan: bool,
    now: u32,
    next_index: BTreeMap<String, u32>,
    running: Vec<Task>,
    events: Vec<Event>,
    tasks: Vec<TaskRecord>,
    completion: Vec<Option<u32>>,
    broken_at: Vec<Option<u32>>,
}

fn config_error(msg: String) -> AgentError {
    AgentError::Config(msg)
}

impl Simulation {
    pub fn new(config: &SimConfig) -> Result<Self, AgentError> {
        let net = compose_global(&config.specs, &config.pool, &config.counts)?;
        let jobs = JobTable::from_specs(&config.specs);
        let mut specs = config.specs.clone();
        specs.sort_by(|a, b| a.activity.cmp(&b.activity));
        for s in &mut specs {
            s.jobs.sort_by(|a, b| a.id.cmp(&b.id));
        }
        let spec_of: BTreeMap<String, usize> = specs
            .iter()
            .enumerate()
            .map(|(i, s)| (s.activity.clone(), i))
            .collect();

        if let Some(a) = config.budgets.keys().find(|a| !spec_of.contains_key(*a)) {
            return Err(config_error(format!("budget for unknown activity {a}")));
        }
        if let Some((a, b)) = config.budgets.iter().find(|(_, &b)| b < 0) {
            return Err(config_error(format!("negative budget {b} for {a}")));
        }
        for ((r, j), &p) in &config.prices {
            let demands = jobs.get(j).is_some_and(|info| info.demand.contains_key(r));
            if !demands {
                return Err(config_error(format!("price for {r} {j}: job does not use that type")));
            }
            if p < 0 {
                return Err(config_error(format!("negative price {p} for {r} {j}")));
            }
        }

        let mut products = Vec::new();
        for spec in &specs {
            let n = config.counts.get(&spec.activity).copied().unwrap_or(0);
            let budget = config.budgets.get(&spec.activity).copied().unwrap_or(DEFAULT_BUDGET);
            for i in 1..=n {
                products.push(ProductAgent {
                    id: format!("{}.{}", spec.activity, i),
                    activity: spec.activity.clone(),
                    instance: i,
                    budget,
                    balance: budget,
                    jobs: spec.jobs.iter().map(|j| (j.id.clone(), JobState::Waiting)).collect(),
                    recommended: BTreeMap::new(),
                });
            }
        }

        let resources: Vec<ResourceAgent> = pool_instances(&config.pool)
            .into_iter()
            .map(|id| {
                let catalog = jobs
                    .iter()
                    .filter(|(_, info)| info.demand.contains_key(&id.resource))
                    .map(|(j, info)| {
                        let price = config
                            .prices
                            .get(&(id.resource.clone(), j.to_string()))
                            .copied()
                            .unwrap_or(i64::from(info.duration) * DEFAULT_UNIT_PRICE);
                        (j.to_string(), Offer { duration: info.duration, price })
                    })
                    .collect();
                ResourceAgent::new(id, catalog)
            })
            .collect();
        let index_of = |id: &InstanceId| resources.iter().position(|r| &r.id == id);

        let mut breakdowns = Vec::new();
        let mut seen = BTreeSet::new();
        for (id, t) in &config.breakdowns {
            let i = index_of(id).ok_or_else(|| config_error(format!("unknown instance {id}")))?;
            if !seen.insert(i) {
                return Err(config_error(format!("instance {id} breaks down twice")));
            }
            breakdowns.push((*t, i));
        }
        breakdowns.sort();

        if let Some(rec) = &config.recommendations {
            for (occ, partners) in &rec.assignments {
                if jobs.get(&occ.job).is_none() {
                    return Err(config_error(format!("recommendation for unknown job {}", occ.job)));
                }
                if let Some(p) = partners.iter().find(|p| index_of(p).is_none()) {
                    return Err(config_error(format!("recommendation names unknown instance {p}")));
                }
            }
            if let Some(p) = rec.service_order.keys().find(|p| index_of(p).is_none()) {
                return Err(config_error(format!("recommendation names unknown instance {p}")));
            }
        }

        let mut sim = Simulation {
            spec_of,
            jobs,
            net,
            weights: config.weights.clone(),
            completion: vec![None; products.len()],
            broken_at: vec![None; resources.len()],
            products,
            resources,
            breakdowns,
            next_breakdown: 0,
            supervised: config.recommendations.is_some(),
            replan: config.replan,
            now: 0,
            next_index: BTreeMap::new(),
            running: Vec::new(),
            events: Vec::new(),
            tasks: Vec::new(),
            specs,
        };
        if let Some(rec) = &config.recommendations {
            sim.install(rec);
        }
        Ok(sim)
    }

    fn log(&mut self, kind: EventKind) {
        self.events.push(Event { time: self.now, kind });
    }

    fn install(&mut self, rec: &RecommendationSet) {
        for r in &mut self.resources {
            r.queue = if r.is_broken() {
                Default::default()
            } else {
                rec.service_order.get(&r.id).cloned().unwrap_or_default().into()
            };
        }
        for p in &mut self.products {
            p.recommended = rec
                .assignments
                .iter()
                .filter(|(occ, _)| p.jobs.contains_key(&occ.job))
                .map(|(o, v)| (o.clone(), v.clone()))
                .collect();
        }
    }

    fn has_recommendations(&self) -> bool {
        self.resources.iter().any(|r| !r.queue.is_empty())
            || self.products.iter().any(|p| !p.recommended.is_empty())
    }

    fn clear_recommendations(&mut self) {
        self.install(&RecommendationSet::default());
    }

    pub fn run(mut self) -> Trace {
        loop {
            self.fire_ends();
            self.apply_breakdowns();
            self.negotiate_round();
            if self.products.iter().all(ProductAgent::is_complete) {
                break;
            }
            let Some(next_end) = self.running.iter().map(|t| t.end).min() else {
                if self.has_recommendations() {
                    self.clear_recommendations();
                    self.log(EventKind::Supervisor {
                        action: "release-recommendations".into(),
                    });
                    continue;
                }
                break;
            };
            let next_breakdown = self.breakdowns.get(self.next_breakdown).map(|b| b.0);
            self.now = next_breakdown.map_or(next_end, |b| b.min(next_end));
        }
        self.into_trace()
    }

    fn fire_ends(&mut self) {
        let now = self.now;
        let mut due: Vec<Task> = Vec::new();
        self.running.retain(|t| {
            if t.end <= now {
                due.push(t.clone());
                false
            } else {
                true
            }
        });
        due.sort_by(|a, b| (a.end, a.product, &a.occurrence).cmp(&(b.end, b.product, &b.occurrence)));
        for task in due {
            let pid = self.products[task.product].id.clone();
            self.log(EventKind::TaskEnd {
                product: pid.clone(),
                occurrence: task.occurrence.clone(),
            });
            for &(r, price) in &task.partners {
                self.resources[r].state = ResourceState::Idle;
                self.resources[r].earned += price;
                self.products[task.product].balance -= price;
                let agent = self.resources[r].id.clone();
                self.log(EventKind::Payment {
                    product: pid.clone(),
                    agent,
                    amount: price,
                });
            }
            let product = &mut self.products[task.product];
            product.jobs.insert(task.occurrence.job.clone(), JobState::Done);
            if product.is_complete() {
                self.completion[task.product] = Some(now);
            }
            self.tasks.push(TaskRecord {
                product: pid,
                activity: product.activity.clone(),
                occurrence: task.occurrence,
                partners: task.partners.iter().map(|&(r, _)| self.resources[r].id.clone()).collect(),
                start: task.start,
                end: task.end,
            });
        }
    }

    fn apply_breakdowns(&mut self) {
        while let Some(&(t, r)) = self.breakdowns.get(self.next_breakdown) {
            if t > self.now {
                break;
            }
            self.next_breakdown += 1;
            self.handle_breakdown(r);
        }
    }

    /// The instance stops bidding for good. A task it is serving aborts
    /// without payment, its other partners are released and the product
    /// renegotiates the whole job. In supervised mode the supervisor then
    /// replans on the degraded model.
    fn handle_breakdown(&mut self, r: usize) {
        let id = self.resources[r].id.clone();
        self.log(EventKind::Breakdown { agent: id.clone() });
        self.resources[r].state = ResourceState::Broken;
        self.resources[r].queue.clear();
        self.broken_at[r] = Some(self.now);

        let (aborted, kept): (Vec<Task>, Vec<Task>) = std::mem::take(&mut self.running)
            .into_iter()
            .partition(|t| t.partners.iter().any(|&(p, _)| p == r));
        self.running = kept;
        for task in aborted {
            for &(p, _) in &task.partners {
                if p != r {
                    self.resources[p].state = ResourceState::Idle;
                }
            }
            self.products[task.product]
                .jobs
                .insert(task.occurrence.job.clone(), JobState::Waiting);
            let product = self.products[task.product].id.clone();
            self.log(EventKind::TaskAbort {
                product,
                occurrence: task.occurrence,
                agent: id.clone(),
            });
        }

        if self.supervised && self.replan {
            let action = match self.replan_now() {
                Ok((best, rec)) => {
                    self.install(&rec);
                    format!("replan makespan={}", best.makespan())
                }
                Err(e) => {
                    self.clear_recommendations();
                    self.supervised = false;
                    format!("replan-failed autonomous ({e})")
                }
            };
            self.log(EventKind::Supervisor { action });
        }
    }

    /// Current progress as a marking of the composed model: resource places
    /// hold the idle working instances, so broken ones are gone for good.
    fn progress_marking(&self) -> Marking {
        let mut m = Marking::from_counts(vec![0; self.net.places().len()]);
        let mut add = |label: &str, n: u32| {
            if let Some(p) = self.net.place_by_label(label) {
                m.set(p, m.get(p) + n);
            }
        };
        for spec in &self.specs {
            let of_activity: Vec<&ProductAgent> =
                self.products.iter().filter(|p| p.activity == spec.activity).collect();
            let count = |job: &str, pred: &dyn Fn(JobState) -> bool| {
                of_activity.iter().filter(|p| pred(p.state(job))).count() as u32
            };
            let not_started = |s: JobState| matches!(s, JobState::Waiting | JobState::Blocked(_));
            for job in spec.entry_jobs() {
                add(&names::pending(&job.id), count(&job.id, &not_started));
            }
            for job in &spec.jobs {
                add(&names::exec(&job.id), count(&job.id, &|s| s == JobState::Executing));
            }
            for job in spec.sink_jobs() {
                add(&names::done(&spec.activity), count(&job.id, &|s| s == JobState::Done));
            }
            for c in &spec.constraints {
                match c {
                    Constraint::Precedence(a, b) => {
                        let n = of_activity
                            .iter()
                            .filter(|p| p.state(a) == JobState::Done && not_started(p.state(b)))
                            .count() as u32;
                        add(&names::wait(a, b), n);
                    }
                    Constraint::NonOverlap(x, y) => {
                        let busy = count(x, &|s| s == JobState::Executing)
                            + count(y, &|s| s == JobState::Executing);
                        add(&names::mutex(x, y), 1u32.saturating_sub(busy));
                    }
                }
            }
        }
        for r in &self.resources {
            if r.state == ResourceState::Idle {
                add(&r.id.resource, 1);
            }
        }
        m
    }

    fn replan_now(&self) -> Result<(Schedule, RecommendationSet), AgentError> {
        let activity = |job: &str| self.jobs.get(job).map(|i| i.activity.clone()).unwrap_or_default();
        let state = TimedState {
            marking: self.progress_marking(),
            time: self.now,
            running: self
                .running
                .iter()
                .map(|t| RunningJob {
                    occurrence: t.occurrence.clone(),
                    activity: activity(&t.occurrence.job),
                    start: t.start,
                    end: t.end,
                })
                .collect(),
            finished: self
                .tasks
                .iter()
                .map(|t| ScheduledJob {
                    occurrence: t.occurrence.clone(),
                    activity: t.activity.clone(),
                    start: t.start,
                    end: t.end,
                })
                .collect(),
            next_index: self.next_index.clone(),
        };
        let schedules = enumerate_from(&self.net, &self.jobs, &state, REPLAN_LIMITS)?;
        let best = rank_schedules(&schedules, &self.weights)?.swap_remove(0).0;
        let free_from: BTreeMap<InstanceId, u32> = self
            .resources
            .iter()
            .filter_map(|r| r.free_at(self.now).map(|t| (r.id.clone(), t)))
            .collect();
        let skip: BTreeSet<Occurrence> = state
            .running
            .iter()
            .map(|r| r.occurrence.clone())
            .chain(state.finished.iter().map(|f| f.occurrence.clone()))
            .collect();
        let rec = derive_with_availability(&best, &free_from, &skip, &self.jobs)?;
        Ok((best, rec))
    }

    /// Predecessors done in this product, and no NonOverlap partner running
    /// in any product of the same activity.
    fn is_ready(&self, product: usize, spec: &WorkflowSpec, job: &str) -> bool {
        let p = &self.products[product];
        if spec.predecessors(job).any(|a| p.state(a) != JobState::Done) {
            return false;
        }
        spec.constraints.iter().all(|c| match c {
            Constraint::NonOverlap(x, y) if x == job || y == job => self
                .products
                .iter()
                .filter(|q| q.activity == p.activity)
                .all(|q| q.state(x) != JobState::Executing && q.state(y) != JobState::Executing),
            _ => true,
        })
    }

    fn negotiate_round(&mut self) {
        for pi in 0..self.products.len() {
            let spec = &self.specs[self.spec_of[&self.products[pi].activity]];
            let candidates: Vec<Job> = spec
                .jobs
                .iter()
                .filter(|j| self.products[pi].state(&j.id) == JobState::Waiting)
                .filter(|j| self.is_ready(pi, spec, &j.id))
                .cloned()
                .collect();
            for job in candidates {
                // An earlier start in this round may have closed a mutex.
                let spec = &self.specs[self.spec_of[&self.products[pi].activity]];
                if !self.is_ready(pi, spec, &job.id) {
                    continue;
                }
                self.negotiate(pi, &job);
            }
        }
    }

    fn negotiate(&mut self, pi: usize, job: &Job) {
        let now = self.now;
        let occurrence = Occurrence::new(&job.id, self.next_index.get(&job.id).copied().unwrap_or(0));
        let committed: i64 = self
            .running
            .iter()
            .filter(|t| t.product == pi)
            .flat_map(|t| t.partners.iter().map(|p| p.1))
            .sum();
        let mut log = Vec::new();
        let outcome = negotiate_job(&self.products[pi], job, &occurrence, &self.resources, now, committed, &mut log);
        for kind in log {
            self.log(kind);
        }
        let product = self.products[pi].id.clone();
        let award = match outcome {
            Ok(a) => a,
            Err(reason) => {
                self.log(EventKind::Refuse {
                    product,
                    job: job.id.clone(),
                    reason,
                });
                if reason.is_permanent() {
                    self.products[pi].jobs.insert(job.id.clone(), JobState::Blocked(reason));
                }
                return;
            }
        };
        let partner_ids: Vec<InstanceId> = award.partners.iter().map(|p| p.0.clone()).collect();
        self.log(EventKind::Award {
            product: product.clone(),
            job: job.id.clone(),
            partners: partner_ids.clone(),
            start: award.start,
        });
        if award.start != now {
            self.log(EventKind::Cancel {
                product,
                job: job.id.clone(),
                reason: format!("start={}", award.start),
            });
            return;
        }
        self.log(EventKind::Confirm {
            product: product.clone(),
            job: job.id.clone(),
        });
        let mut partners = Vec::new();
        for (id, price) in award.partners {
            let r = self
                .resources
                .iter()
                .position(|a| a.id == id)
                .expect("award partners come from the resource list");
            let agent = &mut self.resources[r];
            agent.state = ResourceState::BusyUntil(award.end);
            if agent.queue.front() == Some(&occurrence) {
                agent.queue.pop_front();
            }
            partners.push((r, price));
        }
        self.products[pi].jobs.insert(job.id.clone(), JobState::Executing);
        *self.next_index.entry(job.id.clone()).or_insert(0) += 1;
        self.log(EventKind::TaskStart {
            product,
            occurrence: occurrence.clone(),
            partners: partner_ids,
            end: award.end,
        });
        self.running.push(Task {
            product: pi,
            occurrence,
            partners,
            start: now,
            end: award.end,
        });
    }

    fn into_trace(self) -> Trace {
        let products = self
            .products
            .iter()
            .zip(&self.completion)
            .map(|(p, &completion)| ProductSummary {
                id: p.id.clone(),
                budget: p.budget,
                balance: p.balance,
                completion,
                blocked: if completion.is_some() {
                    Vec::new()
                } else {
                    p.jobs
                        .iter()
                        .filter(|(_, s)| **s != JobState::Done)
                        .map(|(j, s)| (j.clone(), s.to_string()))
                        .collect()
                },
            })
            .collect();
        let resources = self
            .resources
            .iter()
            .zip(&self.broken_at)
            .map(|(r, &broken_at)| ResourceSummary {
                id: r.id.clone(),
                earned: r.earned,
                broken_at,
            })
            .collect();
        Trace {
            events: self.events,
            end_time: self.now,
            tasks: self.tasks,
            products,
            resources,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::check_schedule;
    use crate::case_study;

    fn case_config() -> SimConfig {
        SimConfig::new(case_study::specs(), case_study::pool(), case_study::unary_counts())
    }

    fn supervised() -> (SimConfig, Schedule) {
        let mut c = case_config();
        let (best, rec) = plan_recommendations(&c.specs, &c.pool, &c.counts, &c.weights).unwrap();
        c.recommendations = Some(rec);
        (c, best)
    }

    #[test]
    fn zero_products() {
        let c = SimConfig::new(case_study::specs(), case_study::pool(), BTreeMap::new());
        let t = run_simulation(&c).unwrap();
        assert!(t.events.is_empty());
        assert_eq!(t.end_time, 0);
        assert!(t.products.is_empty());
    }

    #[test]
    fn supervised_run_replays_the_best_schedule() {
        let (c, best) = supervised();
        let t = run_simulation(&c).unwrap();
        assert!(t.all_completed());
        assert_eq!(t.realized_schedule(), best);
        assert_eq!(t.total_debits(), t.total_earnings());
        assert_eq!(t.end_time, best.makespan());
    }

    #[test]
    fn autonomous_run_is_feasible() {
        let c = case_config();
        let t = run_simulation(&c).unwrap();
        assert!(t.all_completed());
        let s = t.realized_schedule();
        assert!(check_schedule(&s, &c.specs, &c.pool, &c.counts).is_empty());
        assert_eq!(t.total_debits(), t.total_earnings());
    }

    #[test]
    fn unused_instance_breakdown_changes_nothing() {
        let spec = WorkflowSpec {
            activity: "A".into(),
            jobs: vec![Job::new("J", "A", 2, &[("R", 1)])],
            constraints: vec![],
        };
        let pool = ResourcePool::new([("R", 1), ("S", 1)]).unwrap();
        let counts = BTreeMap::from([("A".to_string(), 1)]);
        let base = SimConfig::new(vec![spec], pool, counts);
        let mut broken = base.clone();
        broken.breakdowns.push((InstanceId::new("S", 1), 0));
        let (a, b) = (run_simulation(&base).unwrap(), run_simulation(&broken).unwrap());
        assert_eq!(a.tasks, b.tasks);
        assert_eq!(a.end_time, b.end_time);
    }

    #[test]
    fn losing_one_r1_still_completes() {
        let (mut c, best) = supervised();
        c.breakdowns.push((InstanceId::new("R1", 1), 0));
        let t = run_simulation(&c).unwrap();
        assert!(t.all_completed(), "{}", t.to_text());
        assert!(t.makespan() >= best.makespan());
        assert!(t.tasks.iter().all(|task| !task.partners.contains(&InstanceId::new("R1", 1))));
        assert!(check_schedule(&t.realized_schedule(), &c.specs, &c.pool, &c.counts).is_empty());
    }

    #[test]
    fn losing_r2_blocks_a2_and_a3() {
        let (mut c, _) = supervised();
        c.breakdowns.push((InstanceId::new("R2", 1), 0));
        let t = run_simulation(&c).unwrap();
        assert_eq!(t.blocked_products(), vec!["A2.1", "A3.1"]);
        assert_eq!(t.total_debits(), t.total_earnings());
    }

    #[test]
    fn mid_task_breakdown_aborts_without_payment() {
        let spec = WorkflowSpec {
            activity: "A".into(),
            jobs: vec![Job::new("J", "A", 4, &[("R", 1)])],
            constraints: vec![],
        };
        let pool = ResourcePool::new([("R", 2)]).unwrap();
        let mut c = SimConfig::new(vec![spec], pool, BTreeMap::from([("A".to_string(), 1)]));
        c.breakdowns.push((InstanceId::new("R", 1), 2));
        let t = run_simulation(&c).unwrap();
        assert_eq!(t.tasks.len(), 1);
        assert_eq!((t.tasks[0].start, t.tasks[0].end), (2, 6));
        assert_eq!(t.tasks[0].partners, vec![InstanceId::new("R", 2)]);
        assert_eq!(t.resources[0].earned, 0);
        assert_eq!(t.resources[1].earned, 4);
        assert!(t.events.iter().any(|e| matches!(e.kind, EventKind::TaskAbort { .. })));
    }

    #[test]
    fn poor_product_is_blocked() {
        let mut c = case_config();
        c.budgets.insert("A1".into(), 3);
        let t = run_simulation(&c).unwrap();
        assert_eq!(t.blocked_products(), vec!["A1.1"]);
        let a1 = &t.products[0];
        assert!(a1.balance >= 0);
    }

    #[test]
    fn config_errors() {
        let mut c = case_config();
        c.breakdowns.push((InstanceId::new("R2", 2), 0));
        assert!(matches!(Simulation::new(&c), Err(AgentError::Config(_))));
        let mut c = case_config();
        c.prices.insert(("R2".into(), "J11".into()), 3);
        assert!(matches!(Simulation::new(&c), Err(AgentError::Config(_))));
        let mut c = case_config();
        c.budgets.insert("A9".into(), 3);
        assert!(matches!(Simulation::new(&c), Err(AgentError::Config(_))));
    }

    #[test]
    fn identical_configs_give_identical_traces() {
        let (mut c, _) = supervised();
        c.breakdowns.push((InstanceId::new("R3", 1), 1));
        assert_eq!(run_simulation(&c).unwrap().to_text(), run_simulation(&c).unwrap().to_text());
    }
}
