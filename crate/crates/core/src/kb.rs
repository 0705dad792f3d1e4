//! Knowledge bases: structural workflow templates (static) and instantiated,
//! fully marked global models (dynamic).
//!
//! On disk a knowledge base is a directory:
//!
//! ```text
//! index            next <id>
//! static/A1.wf     one workflow template
//! dynamic/3.net    composed net of model 3
//! dynamic/3.meta   its pool, instance counts and `created <seq>`
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::pn::PetriNet;
use crate::workflow::text::{instances_to_text, parse_bundle, parse_workflows, pool_to_text, spec_to_text};
use crate::workflow::{compose_global, validate_structure, ResourcePool, WorkflowError, WorkflowSpec};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KbError {
    #[error("template {0} is already registered")]
    DuplicateTemplate(String),
    #[error("{0} not found")]
    NotFound(String),
    #[error("instantiation requests no instances")]
    EmptyInstantiation,
    #[error(transparent)]
    Workflow(#[from] WorkflowError),
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("{path}: {message}")]
    Corrupt { path: PathBuf, message: String },
}

fn io_error(path: &Path) -> impl Fn(io::Error) -> KbError + '_ {
    move |e| KbError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

fn corrupt(path: &Path, message: impl ToString) -> KbError {
    KbError::Corrupt {
        path: path.to_path_buf(),
        message: message.to_string(),
    }
}

/// Template name -> structure. Templates carry no marking data.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StaticKb {
    templates: BTreeMap<String, WorkflowSpec>,
}

impl StaticKb {
    /// Stores `spec` under its activity name.
    pub fn register_template(&mut self, spec: WorkflowSpec) -> Result<String, KbError> {
        if self.templates.contains_key(&spec.activity) {
            return Err(KbError::DuplicateTemplate(spec.activity));
        }
        let diagnostics = validate_structure(&spec);
        if !diagnostics.is_empty() {
            return Err(WorkflowError::Invalid {
                activity: spec.activity,
                diagnostics,
            }
            .into());
        }
        let name = spec.activity.clone();
        self.templates.insert(name.clone(), spec);
        Ok(name)
    }

    pub fn get(&self, name: &str) -> Option<&WorkflowSpec> {
        self.templates.get(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.templates.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.templates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Model {
    /// Composed net with its complete initial marking.
    pub net: PetriNet,
    pub pool: ResourcePool,
    pub counts: BTreeMap<String, u32>,
    /// Position in creation order, starting at 1.
    pub created: u64,
}

/// Model id -> instantiated model. Ids increase monotonically and are never
/// reused, even after retirement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DynamicKb {
    models: BTreeMap<u64, Model>,
    next_id: u64,
}

impl Default for DynamicKb {
    fn default() -> Self {
        DynamicKb {
            models: BTreeMap::new(),
            next_id: 1,
        }
    }
}

impl DynamicKb {
    pub fn instantiate_model(
        &mut self,
        templates: &StaticKb,
        counts: &BTreeMap<String, u32>,
        pool: &ResourcePool,
    ) -> Result<u64, KbError> {
        let specs = counts
            .keys()
            .map(|name| {
                templates
                    .get(name)
                    .cloned()
                    .ok_or_else(|| KbError::NotFound(format!("template {name}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if counts.values().all(|&n| n == 0) {
            return Err(KbError::EmptyInstantiation);
        }
        let net = compose_global(&specs, pool, counts)?;
        let id = self.next_id;
        self.next_id += 1;
        self.models.insert(
            id,
            Model {
                net,
                pool: pool.clone(),
                counts: counts.clone(),
                created: id,
            },
        );
        Ok(id)
    }

    pub fn get(&self, id: u64) -> Result<&Model, KbError> {
        self.models
            .get(&id)
            .ok_or_else(|| KbError::NotFound(format!("model {id}")))
    }

    pub fn retire_model(&mut self, id: u64) -> Result<Model, KbError> {
        self.models
            .remove(&id)
            .ok_or_else(|| KbError::NotFound(format!("model {id}")))
    }

    pub fn ids(&self) -> impl Iterator<Item = u64> + '_ {
        self.models.keys().copied()
    }

    pub fn next_id(&self) -> u64 {
        self.next_id
    }

    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KnowledgeBase {
    pub templates: StaticKb,
    pub models: DynamicKb,
}

fn meta_text(m: &Model) -> String {
    format!(
        "{}{}created {}\n",
        pool_to_text(&m.pool),
        instances_to_text(&m.counts),
        m.created
    )
}

/// Files in `dir` with the given extension, keyed by stem.
fn files_with_extension(dir: &Path, ext: &str) -> Result<BTreeMap<String, PathBuf>, KbError> {
    let mut out = BTreeMap::new();
    if !dir.exists() {
        return Ok(out);
    }
    for entry in fs::read_dir(dir).map_err(io_error(dir))? {
        let path = entry.map_err(io_error(dir))?.path();
        if path.extension().and_then(|e| e.to_str()) == Some(ext) {
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                out.insert(stem.to_string(), path.clone());
            }
        }
    }
    Ok(out)
}

fn read(path: &Path) -> Result<String, KbError> {
    fs::read_to_string(path).map_err(io_error(path))
}

fn write(path: &Path, text: &str) -> Result<(), KbError> {
    fs::write(path, text).map_err(io_error(path))
}

impl KnowledgeBase {
    /// Writes the whole base under `dir`, removing files of templates and
    /// models that no longer exist.
    pub fn save(&self, dir: &Path) -> Result<(), KbError> {
        let (st, dy) = (dir.join("static"), dir.join("dynamic"));
        for d in [&st, &dy] {
            fs::create_dir_all(d).map_err(io_error(d))?;
        }
        for (name, path) in files_with_extension(&st, "wf")? {
            if self.templates.get(&name).is_none() {
                fs::remove_file(&path).map_err(io_error(&path))?;
            }
        }
        for ext in ["net", "meta"] {
            for (stem, path) in files_with_extension(&dy, ext)? {
                let live = stem.parse().is_ok_and(|id| self.models.models.contains_key(&id));
                if !live {
                    fs::remove_file(&path).map_err(io_error(&path))?;
                }
            }
        }
        for (name, spec) in &self.templates.templates {
            write(&st.join(format!("{name}.wf")), &spec_to_text(spec))?;
        }
        for (id, m) in &self.models.models {
            write(&dy.join(format!("{id}.net")), &m.net.to_text())?;
            write(&dy.join(format!("{id}.meta")), &meta_text(m))?;
        }
        write(&dir.join("index"), &format!("next {}\n", self.models.next_id))
    }

    /// Reads a base written by [`KnowledgeBase::save`]. A missing directory
    /// is an empty base.
    pub fn load(dir: &Path) -> Result<Self, KbError> {
        let mut kb = KnowledgeBase::default();
        let index = dir.join("index");
        if index.exists() {
            let text = read(&index)?;
            let next = match text.split_whitespace().collect::<Vec<_>>().as_slice() {
                ["next", n] => n.parse::<u64>().ok().filter(|&n| n >= 1),
                _ => None,
            };
            kb.models.next_id = next.ok_or_else(|| corrupt(&index, "expected `next <id>`"))?;
        }
        for (name, path) in files_with_extension(&dir.join("static"), "wf")? {
            let mut specs = parse_workflows(&read(&path)?).map_err(|e| corrupt(&path, e))?;
            if specs.len() != 1 || specs[0].activity != name {
                return Err(corrupt(&path, format!("expected exactly the workflow {name}")));
            }
            kb.templates
                .register_template(specs.remove(0))
                .map_err(|e| corrupt(&path, e))?;
        }
        let dy = dir.join("dynamic");
        let metas = files_with_extension(&dy, "meta")?;
        for (stem, path) in files_with_extension(&dy, "net")? {
            let id: u64 = stem.parse().map_err(|_| corrupt(&path, "model file name is not an id"))?;
            let net = PetriNet::from_text(&read(&path)?).map_err(|e| corrupt(&path, e))?;
            let meta_path = metas
                .get(&stem)
                .ok_or_else(|| corrupt(&path, "missing .meta file"))?;
            let model = parse_meta(meta_path, net)?;
            if id >= kb.models.next_id {
                return Err(corrupt(&path, "model id not below the index"));
            }
            kb.models.models.insert(id, model);
        }
        Ok(kb)
    }
}

fn parse_meta(path: &Path, net: PetriNet) -> Result<Model, KbError> {
    let text = read(path)?;
    let mut created = None;
    let mut rest = String::new();
    for line in text.lines() {
        match line.split_whitespace().collect::<Vec<_>>().as_slice() {
            ["created", n] => created = n.parse().ok(),
            _ => {
                rest.push_str(line);
                rest.push('\n');
            }
        }
    }
    let bundle = parse_bundle(&rest).map_err(|e| corrupt(path, e))?;
    if !bundle.specs.is_empty() {
        return Err(corrupt(path, "unexpected workflow in model metadata"));
    }
    Ok(Model {
        net,
        pool: bundle.pool().map_err(|e| corrupt(path, e))?,
        counts: bundle.instances,
        created: created.ok_or_else(|| corrupt(path, "missing `created <seq>`"))?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::case_study;
    use crate::workflow::names;

    fn loaded() -> StaticKb {
        let mut kb = StaticKb::default();
        for s in case_study::specs() {
            kb.register_template(s).unwrap();
        }
        kb
    }

    #[test]
    fn register_and_read_back() {
        let kb = loaded();
        assert_eq!(kb.get("A1"), Some(&case_study::specs()[0]));
        let mut kb = kb;
        assert_eq!(
            kb.register_template(case_study::specs()[0].clone()),
            Err(KbError::DuplicateTemplate("A1".into()))
        );
    }

    #[test]
    fn template_files_hold_no_marking() {
        let dir = tempfile::tempdir().unwrap();
        let kb = KnowledgeBase {
            templates: loaded(),
            models: DynamicKb::default(),
        };
        kb.save(dir.path()).unwrap();
        let text = fs::read_to_string(dir.path().join("static/A1.wf")).unwrap();
        assert!(!text.contains("instances") && !text.contains("resource"));
    }

    #[test]
    fn instantiation_matches_compose_global() {
        let statics = loaded();
        let mut dynamic = DynamicKb::default();
        let counts = case_study::unary_counts();
        let id = dynamic.instantiate_model(&statics, &counts, &case_study::pool()).unwrap();
        let direct = compose_global(&case_study::specs(), &case_study::pool(), &counts).unwrap();
        assert_eq!(dynamic.get(id).unwrap().net.to_text(), direct.to_text());
    }

    #[test]
    fn instantiation_errors() {
        let statics = loaded();
        let mut dynamic = DynamicKb::default();
        let pool = case_study::pool();
        let unknown = BTreeMap::from([("A9".to_string(), 1)]);
        assert!(matches!(
            dynamic.instantiate_model(&statics, &unknown, &pool),
            Err(KbError::NotFound(_))
        ));
        let zero = BTreeMap::from([("A1".to_string(), 0)]);
        assert_eq!(
            dynamic.instantiate_model(&statics, &zero, &pool),
            Err(KbError::EmptyInstantiation)
        );
        assert_eq!(
            dynamic.instantiate_model(&statics, &BTreeMap::new(), &pool),
            Err(KbError::EmptyInstantiation)
        );
    }

    #[test]
    fn doubled_entry_marking() {
        let statics = loaded();
        let mut dynamic = DynamicKb::default();
        let counts = BTreeMap::from([("A1".to_string(), 2)]);
        let id = dynamic.instantiate_model(&statics, &counts, &case_study::pool()).unwrap();
        let net = &dynamic.get(id).unwrap().net;
        let p = net.place_by_label(&names::pending("J11")).unwrap();
        assert_eq!(net.initial_marking().get(p), 2);
    }

    #[test]
    fn retire_lifecycle() {
        let statics = loaded();
        let before = statics.clone();
        let mut dynamic = DynamicKb::default();
        let id = dynamic
            .instantiate_model(&statics, &case_study::unary_counts(), &case_study::pool())
            .unwrap();
        dynamic.retire_model(id).unwrap();
        assert!(matches!(dynamic.get(id), Err(KbError::NotFound(_))));
        assert!(matches!(dynamic.retire_model(id), Err(KbError::NotFound(_))));
        assert_eq!(statics, before);
        let next = dynamic
            .instantiate_model(&statics, &case_study::unary_counts(), &case_study::pool())
            .unwrap();
        assert!(next > id);
    }

    #[test]
    fn save_prunes_retired_models() {
        let dir = tempfile::tempdir().unwrap();
        let mut kb = KnowledgeBase {
            templates: loaded(),
            models: DynamicKb::default(),
        };
        let id = kb
            .models
            .instantiate_model(&kb.templates, &case_study::unary_counts(), &case_study::pool())
            .unwrap();
        kb.save(dir.path()).unwrap();
        assert_eq!(KnowledgeBase::load(dir.path()).unwrap(), kb);
        kb.models.retire_model(id).unwrap();
        kb.save(dir.path()).unwrap();
        assert!(!dir.path().join(format!("dynamic/{id}.net")).exists());
        let back = KnowledgeBase::load(dir.path()).unwrap();
        assert_eq!(back, kb);
        assert_eq!(back.models.next_id(), id + 1);
    }

    #[test]
    fn missing_directory_is_empty() {
        let dir = tempfile::tempdir().unwrap();
        assert_eq!(KnowledgeBase::load(&dir.path().join("nope")).unwrap(), KnowledgeBase::default());
    }
}
