//! The `wfnet` command line. [`execute`] runs one command and returns its
//! exit code and output instead of touching the process streams, so tests
//! can drive it directly.
//!
//! Exit codes: 0 success, 1 domain failure (invalid model, deadlocks found,
//! no supervisor, blocked products), 2 usage, I/O or parse error.

use std::collections::{BTreeMap, VecDeque};
use std::ffi::OsString;
use std::fmt::{self, Write as _};
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use wfnet_core::agents::{parse_scenario, plan_recommendations, run_simulation, SimConfig};
use wfnet_core::analysis::{
    check_forbidden, derive_recommendations, enumerate_schedules, find_deadlocks, parse_weights,
    rank_schedules, reachability, synthesize_supervisor, CostReport, Predicate, ReachabilityGraph,
    Schedule, Weights,
};
use wfnet_core::kb::KnowledgeBase;
use wfnet_core::pn::{Marking, PetriNet};
use wfnet_core::workflow::text::{parse_instances, parse_pool, parse_workflows};
use wfnet_core::workflow::{
    compose_global, is_final, parse_bundle, validate_spec, validate_structure, Bundle, JobTable,
    ResourcePool, WorkflowSpec,
};

pub const DEFAULT_NODE_CAP: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandOutcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Parser, Debug)]
#[command(
    name = "wfnet",
    version,
    about = "Model, analyse, schedule and simulate shared-resource workflows as Petri nets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct ModelArgs {
    /// Workflow files, directories (reads *.wf, pool.txt, instances.txt) or
    /// one composed .net file
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    /// Resource pool file (`resource <type> capacity <n>` lines)
    #[arg(long)]
    pool: Option<PathBuf>,
    /// Instance counts file (`instances <activity> <n>` lines); every
    /// activity defaults to one instance
    #[arg(long)]
    instances: Option<PathBuf>,
    /// Write the report to this file instead of standard output
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CapArg {
    /// Upper bound on explored markings
    #[arg(long, default_value_t = DEFAULT_NODE_CAP)]
    node_cap: usize,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check workflows against the pool; prints "ok" when consistent
    Validate(ModelArgs),
    /// Print the composed global net
    Compose(ModelArgs),
    /// Explore the reachability graph and print its size and sink markings
    Reach {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        cap: CapArg,
    },
    /// List reachable non-final dead markings with a firing sequence to each
    Deadlocks {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        cap: CapArg,
    },
    /// List reachable markings satisfying a forbidden-state predicate
    Forbidden {
        #[command(flatten)]
        model: ModelArgs,
        /// Predicate file, e.g. `mark(exec_J11) >= 1 and mark(R1) >= 1`
        #[arg(long, required = true)]
        forbidden: PathBuf,
        #[command(flatten)]
        cap: CapArg,
    },
    /// Synthesize the maximally permissive supervisor
    Synthesize {
        #[command(flatten)]
        model: ModelArgs,
        /// Optional forbidden-state predicate file
        #[arg(long)]
        forbidden: Option<PathBuf>,
        #[command(flatten)]
        cap: CapArg,
    },
    /// Enumerate eager schedules, ranked by weighted completion time
    Schedules {
        #[command(flatten)]
        model: ModelArgs,
        /// Weights file (`weight <activity> <value>`); default weight 1
        #[arg(long)]
        weights: Option<PathBuf>,
    },
    /// Show the best schedule with recommended partners and the ranking
    Rank {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        weights: Option<PathBuf>,
    },
    /// Run the supervised agent negotiation and print the trace
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        /// Scenario file (`budget`, `price` and `breakdown` directives)
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long)]
        weights: Option<PathBuf>,
    },
    /// Manage the static and dynamic knowledge bases
    Kb {
        /// Knowledge-base directory
        #[arg(long, required = true)]
        kb: PathBuf,
        #[command(subcommand)]
        action: KbAction,
    },
}

#[derive(Subcommand, Debug)]
enum KbAction {
    /// Store workflow templates
    Register {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Compose registered templates into a marked model
    Instantiate {
        #[arg(long, required = true)]
        pool: PathBuf,
        #[arg(long, required = true)]
        instances: PathBuf,
    },
    /// Remove a model
    Retire { id: u64 },
    /// List templates and models
    List,
}

enum CliError {
    /// Bad invocation, unreadable file or malformed input.
    Usage(String),
    /// The input is well-formed but the answer is negative.
    Domain(String),
}

impl CliError {
    fn domain(e: impl fmt::Display) -> Self {
        CliError::Domain(e.to_string())
    }
}

type Res<T> = Result<T, CliError>;

/// A report plus whether it describes a domain failure.
struct Report {
    text: String,
    failed: bool,
}

impl Report {
    fn ok(text: String) -> Self {
        Report { text, failed: false }
    }
}

pub fn execute<I, T>(argv: I) -> CommandOutcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                CommandOutcome { code: 2, stdout: String::new(), stderr: text }
            } else {
                CommandOutcome { code: 0, stdout: text, stderr: String::new() }
            };
        }
    };
    let out = match &cli.command {
        Command::Validate(m)
        | Command::Compose(m)
        | Command::Reach { model: m, .. }
        | Command::Deadlocks { model: m, .. }
        | Command::Forbidden { model: m, .. }
        | Command::Synthesize { model: m, .. }
        | Command::Schedules { model: m, .. }
        | Command::Rank { model: m, .. }
        | Command::Simulate { model: m, .. } => m.out.clone(),
        Command::Kb { .. } => None,
    };
    let result = dispatch(&cli.command);
    match result {
        Ok(report) => {
            let code = i32::from(report.failed);
            match out {
                Some(path) => match fs::write(&path, &report.text) {
                    Ok(()) => CommandOutcome { code, stdout: String::new(), stderr: String::new() },
                    Err(e) => CommandOutcome {
                        code: 2,
                        stdout: String::new(),
                        stderr: format!("error: {}: {e}\n", path.display()),
                    },
                },
                None => CommandOutcome { code, stdout: report.text, stderr: String::new() },
            }
        }
        Err(CliError::Usage(msg)) => CommandOutcome {
            code: 2,
            stdout: String::new(),
            stderr: format!("error: {msg}\n"),
        },
        Err(CliError::Domain(msg)) => CommandOutcome {
            code: 1,
            stdout: String::new(),
            stderr: format!("error: {msg}\n"),
        },
    }
}

fn dispatch(cmd: &Command) -> Res<Report> {
    match cmd {
        Command::Validate(m) => validate(&load(m)?),
        Command::Compose(m) => Ok(Report::ok(load(m)?.net()?.to_text())),
        Command::Reach { model, cap } => reach(&load(model)?.net()?, cap.node_cap),
        Command::Deadlocks { model, cap } => deadlocks(&load(model)?.net()?, cap.node_cap),
        Command::Forbidden { model, forbidden, cap } => {
            forbidden_states(&load(model)?.net()?, forbidden, cap.node_cap)
        }
        Command::Synthesize { model, forbidden, cap } => {
            synthesize(&load(model)?.net()?, forbidden.as_deref(), cap.node_cap)
        }
        Command::Schedules { model, weights } => schedules(&load(model)?, weights.as_deref()),
        Command::Rank { model, weights } => rank(&load(model)?, weights.as_deref()),
        Command::Simulate { model, scenario, weights } => {
            simulate(&load(model)?, scenario.as_deref(), weights.as_deref())
        }
        Command::Kb { kb, action } => kb_command(kb, action),
    }
}

fn read(path: &Path) -> Res<String> {
    fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn parse_err(path: &Path, e: impl fmt::Display) -> CliError {
    CliError::Usage(format!("{}: {e}", path.display()))
}

struct Inputs {
    bundle: Bundle,
    net: Option<PetriNet>,
}

fn directory_files(dir: &Path) -> Res<Vec<PathBuf>> {
    let entries = fs::read_dir(dir).map_err(|e| CliError::Usage(format!("{}: {e}", dir.display())))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry
            .map_err(|e| CliError::Usage(format!("{}: {e}", dir.display())))?
            .path();
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("");
        if name.ends_with(".wf") || name == "pool.txt" || name == "instances.txt" {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

fn load(args: &ModelArgs) -> Res<Inputs> {
    let mut bundle = Bundle::default();
    let mut net = None;
    let mut files = Vec::new();
    for p in &args.inputs {
        if p.is_dir() {
            files.extend(directory_files(p)?);
        } else {
            files.push(p.clone());
        }
    }
    for f in &files {
        let text = read(f)?;
        if f.extension().and_then(|e| e.to_str()) == Some("net") {
            if net.is_some() || files.len() > 1 {
                return Err(CliError::Usage("a .net file must be the only input".into()));
            }
            net = Some(PetriNet::from_text(&text).map_err(|e| parse_err(f, e))?);
        } else {
            bundle.merge(parse_bundle(&text).map_err(|e| parse_err(f, e))?);
        }
    }
    if let Some(p) = &args.pool {
        bundle.resources.extend(parse_pool(&read(p)?).map_err(|e| parse_err(p, e))?);
    }
    if let Some(p) = &args.instances {
        let counts = parse_instances(&read(p)?).map_err(|e| parse_err(p, e))?;
        for (a, n) in counts {
            if bundle.instances.insert(a.clone(), n).is_some() {
                return Err(CliError::Usage(format!("instances for {a} given twice")));
            }
        }
    }
    if net.is_some() && (args.pool.is_some() || args.instances.is_some()) {
        return Err(CliError::Usage("--pool and --instances do not apply to a .net input".into()));
    }
    Ok(Inputs { bundle, net })
}

struct Model {
    specs: Vec<WorkflowSpec>,
    pool: ResourcePool,
    counts: BTreeMap<String, u32>,
}

impl Inputs {
    fn model(&self) -> Res<Model> {
        if self.net.is_some() {
            return Err(CliError::Usage(
                "this command needs workflow files, not a composed net".into(),
            ));
        }
        if self.bundle.specs.is_empty() {
            return Err(CliError::Usage("no workflow given".into()));
        }
        let pool = self.bundle.pool().map_err(CliError::domain)?;
        let counts = if self.bundle.instances.is_empty() {
            self.bundle.specs.iter().map(|s| (s.activity.clone(), 1)).collect()
        } else {
            self.bundle.instances.clone()
        };
        Ok(Model {
            specs: self.bundle.specs.clone(),
            pool,
            counts,
        })
    }

    fn net(&self) -> Res<PetriNet> {
        if let Some(net) = &self.net {
            return Ok(net.clone());
        }
        let m = self.model()?;
        compose_global(&m.specs, &m.pool, &m.counts).map_err(CliError::domain)
    }
}

fn validate(inputs: &Inputs) -> Res<Report> {
    let m = inputs.model()?;
    let structural_only = inputs.bundle.resources.is_empty();
    let mut text = String::new();
    for spec in &m.specs {
        let diagnostics = if structural_only {
            validate_structure(spec)
        } else {
            validate_spec(spec, &m.pool)
        };
        for d in diagnostics {
            let _ = writeln!(text, "{}: {d}", spec.activity);
        }
    }
    let mut seen = std::collections::BTreeSet::new();
    for spec in &m.specs {
        if !seen.insert(&spec.activity) {
            let _ = writeln!(text, "{}: activity defined twice", spec.activity);
        }
    }
    if text.is_empty() {
        text.push_str(if structural_only { "ok (structure only, no pool given)\n" } else { "ok\n" });
        Ok(Report::ok(text))
    } else {
        Ok(Report { text, failed: true })
    }
}

fn explore(net: &PetriNet, cap: usize) -> Res<ReachabilityGraph> {
    reachability(net, cap).map_err(CliError::domain)
}

fn reach(net: &PetriNet, cap: usize) -> Res<Report> {
    let g = explore(net, cap)?;
    let sinks: Vec<usize> = g.sinks().collect();
    let mut text = format!("nodes {}\nedges {}\nsinks {}\n", g.len(), g.edges().len(), sinks.len());
    for s in sinks {
        let kind = if is_final(net, g.node(s)) { "final" } else { "dead" };
        let _ = writeln!(text, "sink {kind} {}", net.display_marking(g.node(s)));
    }
    Ok(Report::ok(text))
}

/// Shortest firing sequence from the root to `target`.
fn path_to(g: &ReachabilityGraph, target: usize) -> Vec<String> {
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; g.len()];
    let mut seen = vec![false; g.len()];
    seen[g.root()] = true;
    let mut queue = VecDeque::from([g.root()]);
    while let Some(v) = queue.pop_front() {
        if v == target {
            break;
        }
        for e in g.outgoing(v) {
            if !seen[e.target] {
                seen[e.target] = true;
                parent[e.target] = Some((v, e.transition));
                queue.push_back(e.target);
            }
        }
    }
    let mut path = Vec::new();
    let mut v = target;
    while let Some((p, t)) = parent[v] {
        path.push(g.transition_id(t).to_string());
        v = p;
    }
    path.reverse();
    path
}

fn deadlocks(net: &PetriNet, cap: usize) -> Res<Report> {
    let g = explore(net, cap)?;
    let dead = find_deadlocks(&g, |m| is_final(net, m));
    let mut text = format!("deadlocks {}\n", dead.len());
    for m in &dead {
        let i = g.node_index(m).expect("deadlock comes from the graph");
        let _ = writeln!(text, "deadlock {}", net.display_marking(m));
        let _ = writeln!(text, "  via {}", path_to(&g, i).join(" "));
    }
    Ok(Report {
        failed: !dead.is_empty(),
        text,
    })
}

fn load_predicate(net: &PetriNet, path: &Path) -> Res<impl Fn(&Marking) -> bool> {
    let pred = Predicate::parse(&read(path)?).map_err(|e| parse_err(path, e))?;
    let bound = pred.bind(net).map_err(|e| parse_err(path, e))?;
    Ok(move |m: &Marking| bound.eval(m))
}

fn forbidden_states(net: &PetriNet, path: &Path, cap: usize) -> Res<Report> {
    let pred = load_predicate(net, path)?;
    let g = explore(net, cap)?;
    let hits = check_forbidden(&g, pred);
    let mut text = format!("forbidden {}\n", hits.len());
    for m in &hits {
        let i = g.node_index(m).expect("hit comes from the graph");
        let _ = writeln!(text, "reachable {}", net.display_marking(m));
        let _ = writeln!(text, "  via {}", path_to(&g, i).join(" "));
    }
    Ok(Report {
        failed: !hits.is_empty(),
        text,
    })
}

fn synthesize(net: &PetriNet, forbidden: Option<&Path>, cap: usize) -> Res<Report> {
    let pred: Box<dyn Fn(&Marking) -> bool> = match forbidden {
        Some(p) => Box::new(load_predicate(net, p)?),
        None => Box::new(|_: &Marking| false),
    };
    let g = explore(net, cap)?;
    let policy = synthesize_supervisor(&g, |m| is_final(net, m), pred).map_err(CliError::domain)?;
    let mut text = format!(
        "states {} of {}\ntransitions {} of {}\n",
        policy.len(),
        g.len(),
        policy.edge_count(),
        g.edges().len()
    );
    let mut restrictions = Vec::new();
    for (m, allowed) in policy.iter() {
        let enabled = net.enabled_transitions(m).map_err(CliError::domain)?;
        let disabled: Vec<&str> = enabled
            .iter()
            .filter(|t| !allowed.contains(t))
            .map(String::as_str)
            .collect();
        if !disabled.is_empty() {
            restrictions.push(format!("disable {} at {}", disabled.join(","), net.display_marking(m)));
        }
    }
    let _ = writeln!(text, "restrictions {}", restrictions.len());
    for r in restrictions {
        let _ = writeln!(text, "{r}");
    }
    Ok(Report::ok(text))
}

fn load_weights(path: Option<&Path>, specs: &[WorkflowSpec]) -> Res<Weights> {
    let mut weights: Weights = specs.iter().map(|s| (s.activity.clone(), 1.0)).collect();
    if let Some(p) = path {
        weights.extend(parse_weights(&read(p)?).map_err(|e| parse_err(p, e))?);
    }
    Ok(weights)
}

fn ranked(inputs: &Inputs, weights: Option<&Path>) -> Res<(Model, Vec<(Schedule, CostReport)>)> {
    let m = inputs.model()?;
    let weights = load_weights(weights, &m.specs)?;
    let net = compose_global(&m.specs, &m.pool, &m.counts).map_err(CliError::domain)?;
    let all = enumerate_schedules(&net, &JobTable::from_specs(&m.specs)).map_err(CliError::domain)?;
    let ranked = rank_schedules(&all, &weights).map_err(CliError::domain)?;
    Ok((m, ranked))
}

fn summary(rank: usize, s: &Schedule, c: &CostReport) -> String {
    let starts: Vec<String> = s
        .by_start()
        .iter()
        .map(|j| format!("{}@{}-{}", j.occurrence, j.start, j.end))
        .collect();
    format!("#{rank} total={} makespan={} {}", c.total, c.makespan, starts.join(" "))
}

fn schedules(inputs: &Inputs, weights: Option<&Path>) -> Res<Report> {
    let (_, ranked) = ranked(inputs, weights)?;
    let mut text = format!("schedules {}\n", ranked.len());
    for (i, (s, c)) in ranked.iter().enumerate() {
        let _ = writeln!(text, "{}", summary(i + 1, s, c));
    }
    for (i, (s, _)) in ranked.iter().enumerate() {
        for j in s.by_start() {
            let _ = writeln!(text, "sched {} {} {} {}", i + 1, j.occurrence, j.start, j.end);
        }
    }
    Ok(Report::ok(text))
}

fn rank(inputs: &Inputs, weights: Option<&Path>) -> Res<Report> {
    let (m, ranked) = ranked(inputs, weights)?;
    let (best, cost) = &ranked[0];
    let rec = derive_recommendations(best, &m.pool, &JobTable::from_specs(&m.specs))
        .map_err(CliError::domain)?;
    let mut text = format!(
        "best of {} total={} makespan={}\n",
        ranked.len(),
        cost.total,
        cost.makespan
    );
    for (a, t) in &cost.completion {
        let _ = writeln!(text, "completion {a} {t} cost {}", cost.cost[a]);
    }
    let _ = writeln!(text, "job start end resources");
    for j in best.by_start() {
        let partners: Vec<String> = rec
            .partners(&j.occurrence)
            .unwrap_or_default()
            .iter()
            .map(ToString::to_string)
            .collect();
        let _ = writeln!(text, "{} {} {} {}", j.occurrence, j.start, j.end, partners.join(","));
    }
    for (instance, order) in &rec.service_order {
        let jobs: Vec<String> = order.iter().map(ToString::to_string).collect();
        let _ = writeln!(text, "serve {instance} {}", jobs.join(" "));
    }
    let _ = writeln!(text, "ranking");
    for (i, (s, c)) in ranked.iter().enumerate() {
        let _ = writeln!(text, "{}", summary(i + 1, s, c));
    }
    Ok(Report::ok(text))
}

fn simulate(inputs: &Inputs, scenario: Option<&Path>, weights: Option<&Path>) -> Res<Report> {
    let m = inputs.model()?;
    let weights = load_weights(weights, &m.specs)?;
    let mut config = SimConfig::new(m.specs, m.pool, m.counts);
    config.weights = weights;
    if let Some(p) = scenario {
        config.apply_scenario(&parse_scenario(&read(p)?).map_err(|e| parse_err(p, e))?);
    }
    let mut text = String::new();
    match plan_recommendations(&config.specs, &config.pool, &config.counts, &config.weights) {
        Ok((best, rec)) => {
            let _ = writeln!(text, "plan makespan={}", best.makespan());
            config.recommendations = Some(rec);
        }
        Err(e) => {
            let _ = writeln!(text, "plan unavailable ({e}); agents run autonomously");
        }
    }
    let trace = run_simulation(&config).map_err(CliError::domain)?;
    text.push_str(&trace.to_text());
    Ok(Report {
        failed: !trace.all_completed(),
        text,
    })
}

fn kb_command(dir: &Path, action: &KbAction) -> Res<Report> {
    let mut kb = KnowledgeBase::load(dir).map_err(|e| CliError::Usage(e.to_string()))?;
    let text = match action {
        KbAction::Register { files } => {
            let mut text = String::new();
            for f in files {
                let specs = parse_workflows(&read(f)?).map_err(|e| parse_err(f, e))?;
                for spec in specs {
                    let name = kb.templates.register_template(spec).map_err(CliError::domain)?;
                    let _ = writeln!(text, "registered {name}");
                }
            }
            text
        }
        KbAction::Instantiate { pool, instances } => {
            let resources = parse_pool(&read(pool)?).map_err(|e| parse_err(pool, e))?;
            let pool = ResourcePool::new(resources.iter().map(|(r, c)| (r.as_str(), *c)))
                .map_err(CliError::domain)?;
            let counts = parse_instances(&read(instances)?).map_err(|e| parse_err(instances, e))?;
            let id = kb
                .models
                .instantiate_model(&kb.templates, &counts, &pool)
                .map_err(CliError::domain)?;
            format!("model {id}\n")
        }
        KbAction::Retire { id } => {
            kb.models.retire_model(*id).map_err(CliError::domain)?;
            format!("retired {id}\n")
        }
        KbAction::List => {
            let mut text = String::new();
            for name in kb.templates.names() {
                let _ = writeln!(text, "template {name}");
            }
            for id in kb.models.ids() {
                let model = kb.models.get(id).map_err(CliError::domain)?;
                let counts: Vec<String> = model.counts.iter().map(|(a, n)| format!("{a}={n}")).collect();
                let _ = writeln!(
                    text,
                    "model {id} created {} places {} transitions {} instances {}",
                    model.created,
                    model.net.places().len(),
                    model.net.transitions().len(),
                    counts.join(",")
                );
            }
            return Ok(Report::ok(text));
        }
    };
    kb.save(dir).map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(Report::ok(text))
}
