//! Template sets and the on-disk project layout they fill.
//!
//! A template set directory looks like
//!
//! ```text
//! <set-id>/
//!   skeleton/scrapy.cfg
//!   skeleton/module/{__init__,items,middlewares,pipelines,settings}.py
//!   skeleton/module/spiders/{__init__,spider}.py
//!   change_once/{items,pipelines,spider}.py
//! ```
//!
//! `module` is renamed to the project name and `spider.py` to
//! `<spider_name>.py` when the set is written out. The `default` set is
//! compiled into the binary.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::codein::Template;

pub const DEFAULT_SET: &str = "default";

#[derive(Debug, Error)]
pub enum TemplateSetError {
    #[error("template set {0:?} not found")]
    NotFound(String),
    #[error("template set {id:?} is missing {file}")]
    MissingFile { id: String, file: String },
    #[error("reading template {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

/// Files of a generated project.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ProjectFile {
    ScrapyCfg,
    PackageInit,
    Items,
    Middlewares,
    Pipelines,
    Settings,
    SpidersInit,
    Spider,
}

impl ProjectFile {
    pub const ALL: [ProjectFile; 8] = [
        ProjectFile::ScrapyCfg,
        ProjectFile::PackageInit,
        ProjectFile::Items,
        ProjectFile::Middlewares,
        ProjectFile::Pipelines,
        ProjectFile::Settings,
        ProjectFile::SpidersInit,
        ProjectFile::Spider,
    ];

    /// Files rewritten once at initialization.
    pub const CHANGE_ONCE: [ProjectFile; 3] = [
        ProjectFile::Items,
        ProjectFile::Pipelines,
        ProjectFile::Spider,
    ];

    fn skeleton_path(self) -> &'static str {
        match self {
            ProjectFile::ScrapyCfg => "skeleton/scrapy.cfg",
            ProjectFile::PackageInit => "skeleton/module/__init__.py",
            ProjectFile::Items => "skeleton/module/items.py",
            ProjectFile::Middlewares => "skeleton/module/middlewares.py",
            ProjectFile::Pipelines => "skeleton/module/pipelines.py",
            ProjectFile::Settings => "skeleton/module/settings.py",
            ProjectFile::SpidersInit => "skeleton/module/spiders/__init__.py",
            ProjectFile::Spider => "skeleton/module/spiders/spider.py",
        }
    }

    fn change_once_path(self) -> Option<&'static str> {
        match self {
            ProjectFile::Items => Some("change_once/items.py"),
            ProjectFile::Pipelines => Some("change_once/pipelines.py"),
            ProjectFile::Spider => Some("change_once/spider.py"),
            _ => None,
        }
    }
}

/// Paths of one project's files.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProjectLayout {
    pub root: PathBuf,
    pub name: String,
    pub spider_name: String,
}

impl ProjectLayout {
    pub fn new(
        root: impl Into<PathBuf>,
        name: impl Into<String>,
        spider_name: impl Into<String>,
    ) -> Self {
        Self {
            root: root.into(),
            name: name.into(),
            spider_name: spider_name.into(),
        }
    }

    pub fn package_dir(&self) -> PathBuf {
        self.root.join(&self.name)
    }

    pub fn spiders_dir(&self) -> PathBuf {
        self.package_dir().join("spiders")
    }

    /// Path of `file` relative to the project root.
    pub fn relative(&self, file: ProjectFile) -> PathBuf {
        let pkg = PathBuf::from(&self.name);
        match file {
            ProjectFile::ScrapyCfg => PathBuf::from("scrapy.cfg"),
            ProjectFile::PackageInit => pkg.join("__init__.py"),
            ProjectFile::Items => pkg.join("items.py"),
            ProjectFile::Middlewares => pkg.join("middlewares.py"),
            ProjectFile::Pipelines => pkg.join("pipelines.py"),
            ProjectFile::Settings => pkg.join("settings.py"),
            ProjectFile::SpidersInit => pkg.join("spiders").join("__init__.py"),
            ProjectFile::Spider => pkg.join("spiders").join(format!("{}.py", self.spider_name)),
        }
    }

    pub fn path(&self, file: ProjectFile) -> PathBuf {
        self.root.join(self.relative(file))
    }

    /// Every directory and file the layout requires, relative to the root.
    pub fn expected_entries(&self) -> Vec<PathBuf> {
        let mut out = vec![
            PathBuf::from(&self.name),
            PathBuf::from(&self.name).join("spiders"),
        ];
        out.extend(ProjectFile::ALL.iter().map(|f| self.relative(*f)));
        out
    }
}

/// Templates for a full project plus the change-once overlays.
#[derive(Debug, Clone)]
pub struct TemplateSet {
    id: String,
    skeleton: BTreeMap<ProjectFile, Template>,
    change_once: BTreeMap<ProjectFile, Template>,
}

static BUILTIN_DEFAULT: &[(&str, &str)] = &[
    (
        "skeleton/scrapy.cfg",
        include_str!("../templates/default/skeleton/scrapy.cfg"),
    ),
    (
        "skeleton/module/__init__.py",
        include_str!("../templates/default/skeleton/module/__init__.py"),
    ),
    (
        "skeleton/module/items.py",
        include_str!("../templates/default/skeleton/module/items.py"),
    ),
    (
        "skeleton/module/middlewares.py",
        include_str!("../templates/default/skeleton/module/middlewares.py"),
    ),
    (
        "skeleton/module/pipelines.py",
        include_str!("../templates/default/skeleton/module/pipelines.py"),
    ),
    (
        "skeleton/module/settings.py",
        include_str!("../templates/default/skeleton/module/settings.py"),
    ),
    (
        "skeleton/module/spiders/__init__.py",
        include_str!("../templates/default/skeleton/module/spiders/__init__.py"),
    ),
    (
        "skeleton/module/spiders/spider.py",
        include_str!("../templates/default/skeleton/module/spiders/spider.py"),
    ),
    (
        "change_once/items.py",
        include_str!("../templates/default/change_once/items.py"),
    ),
    (
        "change_once/pipelines.py",
        include_str!("../templates/default/change_once/pipelines.py"),
    ),
    (
        "change_once/spider.py",
        include_str!("../templates/default/change_once/spider.py"),
    ),
];

impl TemplateSet {
    fn assemble(
        id: &str,
        mut read: impl FnMut(&str) -> Result<Option<String>, TemplateSetError>,
    ) -> Result<Self, TemplateSetError> {
        let mut fetch = |rel: &str| -> Result<Template, TemplateSetError> {
            let body = read(rel)?.ok_or_else(|| TemplateSetError::MissingFile {
                id: id.to_string(),
                file: rel.to_string(),
            })?;
            Ok(Template::new(format!("{id}/{rel}"), body))
        };
        let mut skeleton = BTreeMap::new();
        let mut change_once = BTreeMap::new();
        for file in ProjectFile::ALL {
            skeleton.insert(file, fetch(file.skeleton_path())?);
            if let Some(rel) = file.change_once_path() {
                change_once.insert(file, fetch(rel)?);
            }
        }
        Ok(Self {
            id: id.to_string(),
            skeleton,
            change_once,
        })
    }

    pub fn builtin(id: &str) -> Option<Self> {
        if id != DEFAULT_SET {
            return None;
        }
        let set = Self::assemble(id, |rel| {
            Ok(BUILTIN_DEFAULT
                .iter()
                .find(|(p, _)| *p == rel)
                .map(|(_, body)| body.to_string()))
        })
        .expect("built-in template set is complete");
        Some(set)
    }

    /// Load a set from `<dir>`, using the directory name as its id.
    pub fn load_dir(dir: &Path) -> Result<Self, TemplateSetError> {
        let id = dir
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        Self::assemble(&id, |rel| {
            let path = dir.join(rel);
            match fs::read_to_string(&path) {
                Ok(body) => Ok(Some(body)),
                Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
                Err(source) => Err(TemplateSetError::Io { path, source }),
            }
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn skeleton(&self, file: ProjectFile) -> &Template {
        &self.skeleton[&file]
    }

    pub fn change_once(&self, file: ProjectFile) -> Option<&Template> {
        self.change_once.get(&file)
    }
}

/// Looks template sets up by id: search directories first, then built-ins.
#[derive(Debug, Clone, Default)]
pub struct TemplateLibrary {
    search_dirs: Vec<PathBuf>,
}

impl TemplateLibrary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.search_dirs.push(dir.into());
        self
    }

    pub fn resolve(&self, id: &str) -> Result<TemplateSet, TemplateSetError> {
        for dir in &self.search_dirs {
            let candidate = dir.join(id);
            if candidate.is_dir() {
                return TemplateSet::load_dir(&candidate);
            }
        }
        TemplateSet::builtin(id).ok_or_else(|| TemplateSetError::NotFound(id.to_string()))
    }
}
