//! Project generation, single and batch.
//!
//! ```text
//! <target_dir>/<name>/
//!   scrapy.cfg
//!   <name>/
//!     __init__.py items.py middlewares.py pipelines.py settings.py
//!     spiders/
//!       __init__.py <spider_name>.py
//! ```

use std::collections::BTreeSet;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codein::{self, Bindings, CodeinError};
use crate::confi::{self, ConfiError, ConfigEdit, WaitPolicy};
use crate::registry::{ConfigRecord, Registry, RegistryEntry, RegistryError};
use crate::templates::{
    ProjectFile, ProjectLayout, TemplateLibrary, TemplateSetError, DEFAULT_SET,
};

/// Directory under the workspace that holds generated projects.
pub const PROJECTS_DIR: &str = "spiders";

#[derive(Debug, Error)]
pub enum ScaffoldError {
    #[error("invalid project spec: {0}")]
    InvalidSpec(String),
    #[error("{} already exists", .0.display())]
    AlreadyExists(PathBuf),
    #[error(transparent)]
    TemplateSet(#[from] TemplateSetError),
    #[error(transparent)]
    Codein(#[from] CodeinError),
    #[error(transparent)]
    Confi(#[from] ConfiError),
    #[error(transparent)]
    Registry(#[from] RegistryError),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> ScaffoldError + '_ {
    move |source| ScaffoldError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn default_template_set() -> String {
    DEFAULT_SET.to_string()
}

/// Inputs for one generated project. Field names are the manifest schema.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectSpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spider_name: Option<String>,
    #[serde(default)]
    pub allowed_domains: Vec<String>,
    #[serde(default)]
    pub start_urls: Vec<String>,
    #[serde(default = "default_template_set")]
    pub template_set: String,
    /// Parent directory of the project root; relative paths resolve
    /// against the workspace, `None` means `<workspace>/spiders`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_dir: Option<PathBuf>,
    #[serde(default)]
    pub config_overrides: Vec<(String, String)>,
}

impl ProjectSpec {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            spider_name: None,
            allowed_domains: Vec::new(),
            start_urls: Vec::new(),
            template_set: default_template_set(),
            target_dir: None,
            config_overrides: Vec::new(),
        }
    }

    pub fn spider_name(&self) -> &str {
        self.spider_name.as_deref().unwrap_or(&self.name)
    }

    pub fn with_domain(mut self, domain: impl Into<String>) -> Self {
        self.allowed_domains.push(domain.into());
        self
    }

    pub fn with_start_url(mut self, url: impl Into<String>) -> Self {
        self.start_urls.push(url.into());
        self
    }

    pub fn with_target_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.target_dir = Some(dir.into());
        self
    }

    pub fn with_override(mut self, key: impl Into<String>, option: impl Into<String>) -> Self {
        self.config_overrides.push((key.into(), option.into()));
        self
    }

    pub fn validate(&self) -> Result<(), ScaffoldError> {
        validate_name(&self.name).map_err(ScaffoldError::InvalidSpec)?;
        validate_name(self.spider_name()).map_err(ScaffoldError::InvalidSpec)?;
        Ok(())
    }

    fn bindings(&self) -> Bindings {
        let start_urls = if self.start_urls.is_empty() {
            self.allowed_domains
                .iter()
                .map(|d| format!("https://{d}"))
                .collect()
        } else {
            self.start_urls.clone()
        };
        [
            ("name", self.name.clone()),
            ("spider_name", self.spider_name().to_string()),
            ("project_class", camel_case(&self.name)),
            ("spider_class", camel_case(self.spider_name())),
            ("allowed_domains", python_list(&self.allowed_domains)),
            ("start_urls", python_list(&start_urls)),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
    }
}

/// Letters, digits and underscores, not starting with a digit.
pub fn validate_name(name: &str) -> Result<(), String> {
    if crate::confi::is_identifier(name) {
        Ok(())
    } else {
        Err(format!(
            "{name:?} is not a valid name (letters, digits and underscores, not starting with a digit)"
        ))
    }
}

/// `demo_app` -> `DemoApp`, matching how the crawler runtime names classes.
fn camel_case(name: &str) -> String {
    let mut out = String::with_capacity(name.len());
    let mut prev_alpha = false;
    for c in name.chars() {
        if c.is_ascii_alphanumeric() {
            if c.is_ascii_alphabetic() && !prev_alpha {
                out.push(c.to_ascii_uppercase());
            } else if c.is_ascii_alphabetic() {
                out.push(c.to_ascii_lowercase());
            } else {
                out.push(c);
            }
        }
        prev_alpha = c.is_ascii_alphabetic();
    }
    out
}

fn python_list(items: &[String]) -> String {
    let quoted: Vec<String> = items
        .iter()
        .map(|s| format!("'{}'", s.replace('\\', "\\\\").replace('\'', "\\'")))
        .collect();
    format!("[{}]", quoted.join(", "))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratedProject {
    pub name: String,
    pub root: PathBuf,
    pub settings_path: PathBuf,
    pub spider_path: PathBuf,
    pub created_at: DateTime<Utc>,
}

#[derive(Debug)]
pub struct BatchOutcome {
    pub name: String,
    pub result: Result<GeneratedProject, ScaffoldError>,
}

#[derive(Debug)]
pub struct BatchReport {
    pub outcomes: Vec<BatchOutcome>,
    pub elapsed: Duration,
}

impl BatchReport {
    pub fn succeeded(&self) -> usize {
        self.outcomes.iter().filter(|o| o.result.is_ok()).count()
    }

    pub fn all_ok(&self) -> bool {
        self.succeeded() == self.outcomes.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayoutReport {
    pub root: PathBuf,
    /// Expected entries absent from disk, relative to the root.
    pub missing: Vec<PathBuf>,
    /// Entries on disk the layout does not name, relative to the root.
    pub extra: Vec<PathBuf>,
    /// `None` when the project is not registered.
    pub change_once_applied: Option<bool>,
}

impl LayoutReport {
    pub fn is_complete(&self) -> bool {
        self.missing.is_empty()
    }
}

/// Generates projects into a workspace and records them in its registry.
#[derive(Debug, Clone)]
pub struct Scaffolder {
    workspace: PathBuf,
    projects_dir: PathBuf,
    registry: Registry,
    library: TemplateLibrary,
    wait: WaitPolicy,
}

impl Scaffolder {
    /// Registry at `<workspace>/spiders.json`, projects under
    /// `<workspace>/spiders/`, template sets from `<workspace>/templates/`
    /// then the built-ins.
    pub fn new(workspace: impl Into<PathBuf>) -> Self {
        let workspace = absolute(&workspace.into());
        Self {
            projects_dir: workspace.join(PROJECTS_DIR),
            registry: Registry::in_workspace(&workspace),
            library: TemplateLibrary::new().with_dir(workspace.join("templates")),
            wait: WaitPolicy {
                interval: Duration::from_millis(10),
                timeout: Duration::from_secs(1),
            },
            workspace,
        }
    }

    pub fn with_registry(mut self, registry: Registry) -> Self {
        self.registry = registry;
        self
    }

    pub fn with_library(mut self, library: TemplateLibrary) -> Self {
        self.library = library;
        self
    }

    pub fn with_projects_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.projects_dir = self.resolve(&dir.into());
        self
    }

    pub fn registry(&self) -> &Registry {
        &self.registry
    }

    pub fn workspace(&self) -> &Path {
        &self.workspace
    }

    pub fn projects_dir(&self) -> &Path {
        &self.projects_dir
    }

    fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.workspace.join(path)
        }
    }

    /// Root directory `spec` would be generated into.
    pub fn project_root(&self, spec: &ProjectSpec) -> PathBuf {
        let parent = match &spec.target_dir {
            Some(dir) => self.resolve(dir),
            None => self.projects_dir.clone(),
        };
        parent.join(&spec.name)
    }

    pub fn generate_project(&self, spec: &ProjectSpec) -> Result<GeneratedProject, ScaffoldError> {
        spec.validate()?;
        let set = self.library.resolve(&spec.template_set)?;
        let root = self.project_root(spec);
        if root.exists() || self.registry.get(&spec.name)?.is_some() {
            return Err(ScaffoldError::AlreadyExists(root));
        }
        let parent = root.parent().expect("project root has a parent");
        fs::create_dir_all(parent).map_err(io_err(parent))?;
        match fs::create_dir(&root) {
            Ok(()) => {}
            Err(e) if e.kind() == io::ErrorKind::AlreadyExists => {
                return Err(ScaffoldError::AlreadyExists(root));
            }
            Err(e) => return Err(io_err(&root)(e)),
        }

        let layout = ProjectLayout::new(&root, &spec.name, spec.spider_name());
        match self.populate(spec, &set, &layout) {
            Ok(project) => Ok(project),
            Err(e) => {
                let _ = fs::remove_dir_all(&root);
                Err(e)
            }
        }
    }

    fn populate(
        &self,
        spec: &ProjectSpec,
        set: &crate::templates::TemplateSet,
        layout: &ProjectLayout,
    ) -> Result<GeneratedProject, ScaffoldError> {
        let bindings = spec.bindings();
        for dir in [layout.package_dir(), layout.spiders_dir()] {
            fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        }
        for file in ProjectFile::ALL {
            let text = codein::instantiate_template(set.skeleton(file), &bindings)?;
            let path = layout.path(file);
            fs::write(&path, text).map_err(io_err(&path))?;
        }
        codein::apply_change_once_set(layout, set, &bindings, &self.registry)?;

        let settings_path = layout.path(ProjectFile::Settings);
        let mut history = Vec::new();
        for (key, option) in &spec.config_overrides {
            confi::apply_edit(&settings_path, &ConfigEdit::set(key, option), &self.wait)?;
            history.push(ConfigRecord {
                key: key.clone(),
                option: option.clone(),
                timestamp: Utc::now(),
            });
        }

        let mut entry = RegistryEntry::new(&spec.name, &layout.root, set.id());
        if spec.spider_name.as_deref().is_some_and(|s| s != spec.name) {
            entry.spider_name = spec.spider_name.clone();
        }
        entry.change_once_applied = true;
        entry.config_history = history;
        let created_at = entry.created_at;
        self.registry.record_project(entry)?;

        Ok(GeneratedProject {
            name: spec.name.clone(),
            root: layout.root.clone(),
            settings_path,
            spider_path: layout.path(ProjectFile::Spider),
            created_at,
        })
    }

    /// Generate every spec; failures are recorded per item. `jobs > 1`
    /// runs generations on that many threads.
    pub fn generate_batch(&self, specs: &[ProjectSpec], jobs: usize) -> BatchReport {
        let started = Instant::now();
        let jobs = jobs.clamp(1, specs.len().max(1));
        let outcomes = if jobs == 1 {
            specs.iter().map(|s| self.outcome(s)).collect()
        } else {
            let next = AtomicUsize::new(0);
            let slots: Vec<Mutex<Option<BatchOutcome>>> =
                specs.iter().map(|_| Mutex::new(None)).collect();
            std::thread::scope(|scope| {
                for _ in 0..jobs {
                    scope.spawn(|| loop {
                        let i = next.fetch_add(1, Ordering::Relaxed);
                        let Some(spec) = specs.get(i) else { break };
                        *slots[i].lock().unwrap() = Some(self.outcome(spec));
                    });
                }
            });
            slots
                .into_iter()
                .map(|s| s.into_inner().unwrap().expect("every slot filled"))
                .collect()
        };
        BatchReport {
            outcomes,
            elapsed: started.elapsed(),
        }
    }

    fn outcome(&self, spec: &ProjectSpec) -> BatchOutcome {
        BatchOutcome {
            name: spec.name.clone(),
            result: self.generate_project(spec),
        }
    }

    /// Check `root` against the expected layout, using the registry for
    /// spider name and change-once state.
    pub fn verify_layout(&self, root: &Path) -> Result<LayoutReport, ScaffoldError> {
        verify_layout(root, Some(&self.registry))
    }
}

fn absolute(path: &Path) -> PathBuf {
    std::path::absolute(path).unwrap_or_else(|_| path.to_path_buf())
}

pub fn verify_layout(
    root: &Path,
    registry: Option<&Registry>,
) -> Result<LayoutReport, ScaffoldError> {
    let root = absolute(root);
    let name = root
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let entry = match registry {
        Some(reg) => reg.load()?.into_iter().find(|e| e.root == root),
        None => None,
    };
    let (name, spider) = match &entry {
        Some(e) => (e.name.clone(), e.spider_name().to_string()),
        None => (name.clone(), name),
    };
    let layout = ProjectLayout::new(&root, name, spider);
    let expected: BTreeSet<PathBuf> = layout.expected_entries().into_iter().collect();

    let missing = expected
        .iter()
        .filter(|p| !root.join(p).exists())
        .cloned()
        .collect();
    let mut extra = Vec::new();
    if root.is_dir() {
        for item in walkdir::WalkDir::new(&root)
            .min_depth(1)
            .sort_by_file_name()
        {
            let item = item.map_err(|e| ScaffoldError::Io {
                path: root.clone(),
                source: e.into(),
            })?;
            let rel = item
                .path()
                .strip_prefix(&root)
                .expect("walk stays under root")
                .to_path_buf();
            if !expected.contains(&rel) {
                extra.push(rel);
            }
        }
    }
    Ok(LayoutReport {
        root,
        missing,
        extra,
        change_once_applied: entry.map(|e| e.change_once_applied),
    })
}
