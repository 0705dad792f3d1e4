//! Line-oriented text formats for workflows, resource pools and instance
//! counts.
//!
//! ```text
//! workflow A1
//! job J11 duration 3 uses R1 R3
//! job J12 duration 1 uses R3
//! before J11 J12
//! exclusive J22 J23
//! resource R1 capacity 2
//! instances A1 1
//! ```
//!
//! Blank lines and `#` comments are ignored. The three kinds of directives
//! may share a file; [`parse_bundle`] accepts all of them.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use super::{Constraint, Job, ResourcePool, WorkflowSpec};
use crate::pn::is_identifier;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

/// Everything found in one or more input texts.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Bundle {
    pub specs: Vec<WorkflowSpec>,
    pub resources: Vec<(String, u32)>,
    pub instances: BTreeMap<String, u32>,
}

impl Bundle {
    pub fn pool(&self) -> Result<ResourcePool, super::WorkflowError> {
        ResourcePool::new(self.resources.iter().map(|(r, c)| (r.as_str(), *c)))
    }

    pub fn merge(&mut self, other: Bundle) {
        self.specs.extend(other.specs);
        self.resources.extend(other.resources);
        self.instances.extend(other.instances);
    }
}

/// Lines split into whitespace fields, with comments and blanks removed. A
/// comment starts at a `#` that begins a field, so `R1#2` survives.
pub(crate) fn directive_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let fields: Vec<&str> = raw
            .split_whitespace()
            .take_while(|f| !f.starts_with('#'))
            .collect();
        (!fields.is_empty()).then_some((i + 1, fields))
    })
}

pub(crate) fn ident(line: usize, s: &str) -> Result<String, ParseError> {
    if is_identifier(s) {
        Ok(s.to_string())
    } else {
        Err(ParseError {
            line,
            message: format!("invalid identifier {s:?}"),
        })
    }
}

pub(crate) fn number(line: usize, s: &str) -> Result<u32, ParseError> {
    s.parse().map_err(|_| ParseError {
        line,
        message: format!("expected a non-negative integer, found {s:?}"),
    })
}

fn parse_demand(line: usize, items: &[&str]) -> Result<BTreeMap<String, u32>, ParseError> {
    let mut demand = BTreeMap::new();
    for item in items {
        let (res, k) = match item.split_once('*') {
            Some((r, k)) => (r, number(line, k)?),
            None => (*item, 1),
        };
        if k == 0 {
            return Err(ParseError {
                line,
                message: format!("zero multiplicity in {item:?}"),
            });
        }
        *demand.entry(ident(line, res)?).or_insert(0) += k;
    }
    Ok(demand)
}

pub fn parse_bundle(text: &str) -> Result<Bundle, ParseError> {
    let mut bundle = Bundle::default();
    let mut current: Option<WorkflowSpec> = None;
    for (line, f) in directive_lines(text) {
        let err = |message: String| ParseError { line, message };
        let need_workflow = |cur: &Option<WorkflowSpec>| {
            if cur.is_none() {
                Err(ParseError {
                    line,
                    message: format!("`{}` outside of a workflow block", f[0]),
                })
            } else {
                Ok(())
            }
        };
        match f.as_slice() {
            ["workflow", id] => {
                bundle.specs.extend(current.take());
                current = Some(WorkflowSpec {
                    activity: ident(line, id)?,
                    jobs: Vec::new(),
                    constraints: Vec::new(),
                });
            }
            ["job", id, "duration", n, "uses", rest @ ..] if !rest.is_empty() => {
                need_workflow(&current)?;
                let spec = current.as_mut().unwrap();
                spec.jobs.push(Job {
                    id: ident(line, id)?,
                    activity: spec.activity.clone(),
                    duration: number(line, n)?,
                    demand: parse_demand(line, rest)?,
                });
            }
            ["before", a, b] => {
                need_workflow(&current)?;
                current
                    .as_mut()
                    .unwrap()
                    .constraints
                    .push(Constraint::Precedence(ident(line, a)?, ident(line, b)?));
            }
            ["exclusive", a, b] => {
                need_workflow(&current)?;
                current
                    .as_mut()
                    .unwrap()
                    .constraints
                    .push(Constraint::NonOverlap(ident(line, a)?, ident(line, b)?));
            }
            ["resource", id, "capacity", n] => {
                bundle.resources.push((ident(line, id)?, number(line, n)?));
            }
            ["instances", a, n] => {
                let a = ident(line, a)?;
                if bundle.instances.insert(a.clone(), number(line, n)?).is_some() {
                    return Err(err(format!("instances for {a} given twice")));
                }
            }
            [kw, ..] => {
                let known = [
                    "workflow",
                    "job",
                    "before",
                    "exclusive",
                    "resource",
                    "instances",
                ];
                return Err(err(if known.contains(kw) {
                    format!("malformed `{kw}` directive")
                } else {
                    format!("unknown directive `{kw}`")
                }));
            }
            [] => unreachable!(),
        }
    }
    bundle.specs.extend(current);
    Ok(bundle)
}

fn only<T>(
    text: &str,
    what: &str,
    pick: impl FnOnce(Bundle) -> (T, bool),
) -> Result<T, ParseError> {
    let bundle = parse_bundle(text)?;
    let (value, clean) = pick(bundle);
    if clean {
        Ok(value)
    } else {
        Err(ParseError {
            line: 0,
            message: format!("expected only {what} directives"),
        })
    }
}

pub fn parse_workflows(text: &str) -> Result<Vec<WorkflowSpec>, ParseError> {
    only(text, "workflow", |b| {
        let clean = b.resources.is_empty() && b.instances.is_empty();
        (b.specs, clean)
    })
}

pub fn parse_pool(text: &str) -> Result<Vec<(String, u32)>, ParseError> {
    only(text, "resource", |b| {
        let clean = b.specs.is_empty() && b.instances.is_empty();
        (b.resources, clean)
    })
}

pub fn parse_instances(text: &str) -> Result<BTreeMap<String, u32>, ParseError> {
    only(text, "instances", |b| {
        let clean = b.specs.is_empty() && b.resources.is_empty();
        (b.instances, clean)
    })
}

pub fn spec_to_text(spec: &WorkflowSpec) -> String {
    let mut out = format!("workflow {}\n", spec.activity);
    for job in &spec.jobs {
        let uses: Vec<String> = job
            .demand
            .iter()
            .map(|(r, &k)| if k == 1 { r.clone() } else { format!("{r}*{k}") })
            .collect();
        let _ = writeln!(
            out,
            "job {} duration {} uses {}",
            job.id,
            job.duration,
            uses.join(" ")
        );
    }
    for c in &spec.constraints {
        let _ = writeln!(out, "{c}");
    }
    out
}

pub fn pool_to_text(pool: &ResourcePool) -> String {
    pool.iter()
        .map(|(r, c)| format!("resource {r} capacity {c}\n"))
        .collect()
}

pub fn instances_to_text(counts: &BTreeMap<String, u32>) -> String {
    counts
        .iter()
        .map(|(a, n)| format!("instances {a} {n}\n"))
        .collect()
}
