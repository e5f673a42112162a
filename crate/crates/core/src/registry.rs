//! Persistent record of generated projects (`spiders.json`).
//!
//! The registry is a single JSON document `{"v": 1, "entries": [...]}`.
//! Writes take an advisory lock on a sibling `.lock` file and replace the
//! document atomically. A document that fails to parse is reported as
//! corrupt and is never overwritten.

use std::fs::{self, File, OpenOptions};
use std::io;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fsutil::atomic_write;

pub const REGISTRY_FILE: &str = "spiders.json";
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum RegistryError {
    #[error("registry i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("registry file {path} is corrupt: {reason}")]
    Corrupt { path: PathBuf, reason: String },
    #[error("a project named {0:?} is already registered")]
    DuplicateName(String),
    #[error("unknown project {0:?}")]
    UnknownProject(String),
    #[error("project root {0} is not an absolute path")]
    RelativeRoot(PathBuf),
    #[error("invalid name filter: {0}")]
    InvalidFilter(#[from] glob::PatternError),
}

/// One configuration edit applied through the tool.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigRecord {
    pub key: String,
    pub option: String,
    pub timestamp: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegistryEntry {
    pub name: String,
    pub root: PathBuf,
    /// Spider module name when it differs from the project name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spider_name: Option<String>,
    pub template_set: String,
    pub created_at: DateTime<Utc>,
    pub change_once_applied: bool,
    #[serde(default)]
    pub config_history: Vec<ConfigRecord>,
}

impl RegistryEntry {
    pub fn new(
        name: impl Into<String>,
        root: impl Into<PathBuf>,
        template_set: impl Into<String>,
    ) -> Self {
        Self {
            name: name.into(),
            root: root.into(),
            spider_name: None,
            template_set: template_set.into(),
            created_at: Utc::now(),
            change_once_applied: false,
            config_history: Vec::new(),
        }
    }

    pub fn spider_name(&self) -> &str {
        self.spider_name.as_deref().unwrap_or(&self.name)
    }

    /// Package directory holding items, pipelines, settings and spiders.
    pub fn package_dir(&self) -> PathBuf {
        self.root.join(&self.name)
    }

    pub fn settings_path(&self) -> PathBuf {
        self.package_dir().join("settings.py")
    }

    pub fn spider_path(&self) -> PathBuf {
        self.package_dir()
            .join("spiders")
            .join(format!("{}.py", self.spider_name()))
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct RegistryDoc {
    v: u32,
    entries: Vec<RegistryEntry>,
}

/// Handle to a registry file. Cheap to clone; holds no open files.
#[derive(Debug, Clone)]
pub struct Registry {
    path: PathBuf,
}

struct LockGuard(File);

impl Drop for LockGuard {
    fn drop(&mut self) {
        let _ = self.0.unlock();
    }
}

impl Registry {
    pub fn open(path: impl Into<PathBuf>) -> Self {
        Self { path: path.into() }
    }

    /// `<workspace>/spiders.json`
    pub fn in_workspace(workspace: &Path) -> Self {
        Self::open(workspace.join(REGISTRY_FILE))
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    fn lock_path(&self) -> PathBuf {
        let mut name = self.path.file_name().unwrap_or_default().to_os_string();
        name.push(".lock");
        self.path.with_file_name(name)
    }

    fn lock(&self) -> Result<LockGuard, RegistryError> {
        if let Some(parent) = self.path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent)?;
        }
        let file = OpenOptions::new()
            .create(true)
            .truncate(false)
            .write(true)
            .open(self.lock_path())?;
        file.lock()?;
        Ok(LockGuard(file))
    }

    /// All entries in creation order. A missing file is an empty registry.
    pub fn load(&self) -> Result<Vec<RegistryEntry>, RegistryError> {
        let text = match fs::read_to_string(&self.path) {
            Ok(text) => text,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Vec::new()),
            Err(e) => return Err(e.into()),
        };
        let doc: RegistryDoc = serde_json::from_str(&text).map_err(|e| RegistryError::Corrupt {
            path: self.path.clone(),
            reason: e.to_string(),
        })?;
        if doc.v != SCHEMA_VERSION {
            return Err(RegistryError::Corrupt {
                path: self.path.clone(),
                reason: format!("unsupported schema version {}", doc.v),
            });
        }
        Ok(doc.entries)
    }

    fn save(&self, entries: Vec<RegistryEntry>) -> Result<Vec<RegistryEntry>, RegistryError> {
        let doc = RegistryDoc {
            v: SCHEMA_VERSION,
            entries,
        };
        let mut bytes = serde_json::to_vec_pretty(&doc).expect("registry serializes");
        bytes.push(b'\n');
        atomic_write(&self.path, &bytes)?;
        Ok(doc.entries)
    }

    /// Locked read-modify-write cycle.
    fn update<T>(
        &self,
        f: impl FnOnce(&mut Vec<RegistryEntry>) -> Result<T, RegistryError>,
    ) -> Result<T, RegistryError> {
        let _guard = self.lock()?;
        let mut entries = self.load()?;
        let out = f(&mut entries)?;
        self.save(entries)?;
        Ok(out)
    }

    pub fn record_project(
        &self,
        entry: RegistryEntry,
    ) -> Result<Vec<RegistryEntry>, RegistryError> {
        if !entry.root.is_absolute() {
            return Err(RegistryError::RelativeRoot(entry.root));
        }
        self.update(|entries| {
            if entries.iter().any(|e| e.name == entry.name) {
                return Err(RegistryError::DuplicateName(entry.name));
            }
            entries.push(entry);
            Ok(entries.clone())
        })
    }

    /// Entries whose name matches the glob `filter`, in creation order.
    pub fn list_projects(&self, filter: Option<&str>) -> Result<Vec<RegistryEntry>, RegistryError> {
        let pattern = filter.map(glob::Pattern::new).transpose()?;
        let mut entries = self.load()?;
        if let Some(p) = pattern {
            entries.retain(|e| p.matches(&e.name));
        }
        Ok(entries)
    }

    pub fn get(&self, name: &str) -> Result<Option<RegistryEntry>, RegistryError> {
        Ok(self.load()?.into_iter().find(|e| e.name == name))
    }

    pub fn log_config_edit(
        &self,
        name: &str,
        key: &str,
        option: &str,
    ) -> Result<RegistryEntry, RegistryError> {
        self.update(|entries| {
            let entry = entries
                .iter_mut()
                .find(|e| e.name == name)
                .ok_or_else(|| RegistryError::UnknownProject(name.to_string()))?;
            entry.config_history.push(ConfigRecord {
                key: key.to_string(),
                option: option.to_string(),
                timestamp: Utc::now(),
            });
            Ok(entry.clone())
        })
    }

    pub fn mark_change_once_applied(&self, name: &str) -> Result<(), RegistryError> {
        self.update(|entries| {
            let entry = entries
                .iter_mut()
                .find(|e| e.name == name)
                .ok_or_else(|| RegistryError::UnknownProject(name.to_string()))?;
            entry.change_once_applied = true;
            Ok(())
        })
    }

    /// Drop an entry; used when a generation is rolled back.
    pub fn remove(&self, name: &str) -> Result<Option<RegistryEntry>, RegistryError> {
        self.update(|entries| {
            let pos = entries.iter().position(|e| e.name == name);
            Ok(pos.map(|i| entries.remove(i)))
        })
    }
}
