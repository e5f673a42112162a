//! One-shot source mutation: template instantiation and block-aware
//! code insertion.
//!
//! Insertion resolves a line index `ind` in two steps. First the block
//! path is looked up in the block tree and `ind` becomes the block's last
//! body line. If that fails and the path has a single signature, the first
//! line whose trimmed text equals the signature is used instead. Code is
//! indented with the exact leading whitespace of line `ind` and placed
//! after it (`Back`) or before it (`Front`).

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::blocktree::{self, BlockError, BlockPath};
use crate::fsutil::atomic_write;
use crate::registry::{Registry, RegistryError};
use crate::templates::{ProjectFile, ProjectLayout, TemplateSet};

/// Placeholder name to substituted text.
pub type Bindings = BTreeMap<String, String>;

#[derive(Debug, Error)]
pub enum CodeinError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("line index {index} is out of range for a file of {line_count} lines")]
    IndexOutOfRange { index: usize, line_count: usize },
    #[error("no insertion target for block path {0}")]
    TargetNotFound(String),
    #[error("code line contains a line terminator: {0:?}")]
    InvalidCode(String),
    #[error(transparent)]
    Block(#[from] BlockError),
    #[error("missing binding for placeholder {0:?}")]
    MissingBinding(String),
    #[error("template uses undeclared placeholder {0:?}")]
    UnknownPlaceholder(String),
    #[error("project layout mismatch: {} is missing", .0.display())]
    LayoutMismatch(PathBuf),
    #[error("change-once files of project {0:?} were already initialized")]
    AlreadyApplied(String),
    #[error(transparent)]
    Registry(#[from] RegistryError),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CodeinError + '_ {
    move |source| CodeinError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Placement {
    Front,
    #[default]
    Back,
}

impl std::str::FromStr for Placement {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "front" | "f" => Ok(Placement::Front),
            "back" | "b" => Ok(Placement::Back),
            other => Err(format!(
                "unknown placement {other:?} (expected front or back)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InsertionRequest {
    pub file_path: PathBuf,
    pub path: BlockPath,
    pub code: Vec<String>,
    pub placement: Placement,
}

impl InsertionRequest {
    pub fn new<I, S>(
        file_path: impl Into<PathBuf>,
        path: BlockPath,
        code: I,
    ) -> Result<Self, CodeinError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let code: Vec<String> = code.into_iter().map(Into::into).collect();
        check_code(&code)?;
        Ok(Self {
            file_path: file_path.into(),
            path,
            code,
            placement: Placement::default(),
        })
    }

    pub fn placement(mut self, placement: Placement) -> Self {
        self.placement = placement;
        self
    }
}

fn check_code<S: AsRef<str>>(code: &[S]) -> Result<(), CodeinError> {
    match code.iter().find(|l| l.as_ref().contains(['\n', '\r'])) {
        Some(bad) => Err(CodeinError::InvalidCode(bad.as_ref().to_string())),
        None => Ok(()),
    }
}

/// Text with `{{name}}` placeholders.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    id: String,
    body: String,
    required_bindings: BTreeSet<String>,
}

impl Template {
    /// Requires exactly the placeholders that occur in `body`.
    pub fn new(id: impl Into<String>, body: impl Into<String>) -> Self {
        let body = body.into();
        let required_bindings = placeholders(&body)
            .into_iter()
            .map(str::to_string)
            .collect();
        Self {
            id: id.into(),
            body,
            required_bindings,
        }
    }

    /// Explicit binding set; placeholders outside it fail at instantiation.
    pub fn with_bindings<I, S>(id: impl Into<String>, body: impl Into<String>, required: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            id: id.into(),
            body: body.into(),
            required_bindings: required.into_iter().map(Into::into).collect(),
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn body(&self) -> &str {
        &self.body
    }

    pub fn required_bindings(&self) -> &BTreeSet<String> {
        &self.required_bindings
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Placeholder match at the start of `s` (which begins with `{{`):
/// returns the name and the total matched length.
fn placeholder_at(s: &str) -> Option<(&str, usize)> {
    let inner = s.strip_prefix("{{")?;
    let name_len = inner.find(|c: char| !is_ident(c)).unwrap_or(inner.len());
    let name = &inner[..name_len];
    if !name.starts_with(is_ident_start) || !inner[name_len..].starts_with("}}") {
        return None;
    }
    Some((name, name.len() + 4))
}

enum Piece<'a> {
    Literal(&'a str),
    Placeholder(&'a str),
}

/// Split `body` into literal runs and placeholder names.
fn scan(body: &str) -> Vec<Piece<'_>> {
    let mut pieces = Vec::new();
    let mut rest = body;
    while let Some(pos) = rest.find("{{") {
        match placeholder_at(&rest[pos..]) {
            Some((name, len)) => {
                pieces.push(Piece::Literal(&rest[..pos]));
                pieces.push(Piece::Placeholder(name));
                rest = &rest[pos + len..];
            }
            None => {
                pieces.push(Piece::Literal(&rest[..pos + 1]));
                rest = &rest[pos + 1..];
            }
        }
    }
    pieces.push(Piece::Literal(rest));
    pieces
}

fn placeholders(body: &str) -> BTreeSet<&str> {
    scan(body)
        .into_iter()
        .filter_map(|p| match p {
            Piece::Placeholder(name) => Some(name),
            Piece::Literal(_) => None,
        })
        .collect()
}

pub fn instantiate_template(
    template: &Template,
    bindings: &Bindings,
) -> Result<String, CodeinError> {
    if let Some(unknown) = placeholders(&template.body)
        .into_iter()
        .find(|n| !template.required_bindings.contains(*n))
    {
        return Err(CodeinError::UnknownPlaceholder(unknown.to_string()));
    }
    if let Some(missing) = template
        .required_bindings
        .iter()
        .find(|n| !bindings.contains_key(*n))
    {
        return Err(CodeinError::MissingBinding(missing.clone()));
    }
    let mut out = String::with_capacity(template.body.len());
    for piece in scan(&template.body) {
        match piece {
            Piece::Literal(text) => out.push_str(text),
            Piece::Placeholder(name) => out.push_str(&bindings[name]),
        }
    }
    Ok(out)
}

/// Insert `code` after line `ind` of `text` (0 prepends). Every other byte
/// is kept.
pub fn insert_lines<S: AsRef<str>>(
    text: &str,
    ind: usize,
    code: &[S],
) -> Result<String, CodeinError> {
    check_code(code)?;
    let lines: Vec<&str> = text.split_inclusive('\n').collect();
    if ind > lines.len() {
        return Err(CodeinError::IndexOutOfRange {
            index: ind,
            line_count: lines.len(),
        });
    }
    let offset: usize = lines[..ind].iter().map(|l| l.len()).sum();
    let mut insert = String::new();
    if ind == lines.len() && !text.is_empty() && !text.ends_with('\n') {
        // unterminated last line: terminate it and leave the new tail unterminated
        for line in code {
            insert.push('\n');
            insert.push_str(line.as_ref());
        }
        // an empty unterminated tail would not count as a line
        if code.last().is_some_and(|l| l.as_ref().is_empty()) {
            insert.push('\n');
        }
    } else {
        for line in code {
            insert.push_str(line.as_ref());
            insert.push('\n');
        }
    }
    let mut out = String::with_capacity(text.len() + insert.len());
    out.push_str(&text[..offset]);
    out.push_str(&insert);
    out.push_str(&text[offset..]);
    Ok(out)
}

fn read(path: &Path) -> Result<String, CodeinError> {
    fs::read_to_string(path).map_err(io_err(path))
}

fn write(path: &Path, text: &str) -> Result<(), CodeinError> {
    atomic_write(path, text.as_bytes()).map_err(io_err(path))
}

/// File variant of [`insert_lines`]; returns the new content.
pub fn insert_at_index<S: AsRef<str>>(
    file_path: &Path,
    ind: usize,
    code: &[S],
) -> Result<String, CodeinError> {
    let text = read(file_path)?;
    let out = insert_lines(&text, ind, code)?;
    write(file_path, &out)?;
    Ok(out)
}

/// Where a block path resolved to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Resolution {
    /// 1-based line the code is placed relative to.
    pub index: usize,
    /// Leading whitespace copied onto every inserted line.
    pub indent: String,
    /// Whether the single-signature line scan was used.
    pub fallback: bool,
}

pub fn resolve_insertion<S: AsRef<str>>(
    lines: &[S],
    path: &BlockPath,
) -> Result<Resolution, CodeinError> {
    let tree = blocktree::build_block_tree(lines)?;
    let (index, fallback) = match blocktree::locate_block(&tree, path) {
        Ok(node) => (node.end, false),
        Err(BlockError::NotFound { .. }) if path.len() == 1 => {
            let hits = blocktree::code_inds_list(lines, &path.signatures()[0]);
            match hits.first() {
                Some(&i) => (i, true),
                None => return Err(CodeinError::TargetNotFound(path.to_string())),
            }
        }
        Err(BlockError::NotFound { .. }) => {
            return Err(CodeinError::TargetNotFound(path.to_string()))
        }
        Err(e) => return Err(e.into()),
    };
    let indent = blocktree::leading_whitespace(lines[index - 1].as_ref()).to_string();
    Ok(Resolution {
        index,
        indent,
        fallback,
    })
}

/// In-memory variant of [`insert_in_block`].
pub fn insert_in_block_text<S: AsRef<str>>(
    text: &str,
    path: &BlockPath,
    code: &[S],
    placement: Placement,
) -> Result<String, CodeinError> {
    check_code(code)?;
    let lines = blocktree::source_lines(text);
    let res = resolve_insertion(&lines, path)?;
    let indented: Vec<String> = code
        .iter()
        .map(|l| format!("{}{}", res.indent, l.as_ref()))
        .collect();
    let after = match placement {
        Placement::Back => res.index,
        Placement::Front => res.index - 1,
    };
    insert_lines(text, after, &indented)
}

pub fn insert_in_block(request: &InsertionRequest) -> Result<String, CodeinError> {
    let text = read(&request.file_path)?;
    let out = insert_in_block_text(&text, &request.path, &request.code, request.placement)?;
    write(&request.file_path, &out)?;
    Ok(out)
}

/// Files written by [`apply_change_once_set`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChangeOnceReport {
    pub written: Vec<PathBuf>,
    /// Whether a registry marker was set (only for registered projects).
    pub marked: bool,
}

/// Overwrite items, pipelines and the spider source with the set's
/// change-once templates. Refuses projects whose registry entry already
/// carries the change-once marker.
pub fn apply_change_once_set(
    layout: &ProjectLayout,
    set: &TemplateSet,
    bindings: &Bindings,
    registry: &Registry,
) -> Result<ChangeOnceReport, CodeinError> {
    let entry = registry.get(&layout.name)?;
    if entry.as_ref().is_some_and(|e| e.change_once_applied) {
        return Err(CodeinError::AlreadyApplied(layout.name.clone()));
    }
    for file in ProjectFile::ALL {
        let path = layout.path(file);
        if !path.is_file() {
            return Err(CodeinError::LayoutMismatch(path));
        }
    }
    let mut rendered = Vec::new();
    for file in ProjectFile::CHANGE_ONCE {
        let template = set
            .change_once(file)
            .expect("template sets carry every change-once file");
        rendered.push((layout.path(file), instantiate_template(template, bindings)?));
    }
    let mut written = Vec::new();
    for (path, text) in rendered {
        write(&path, &text)?;
        written.push(path);
    }
    let marked = entry.is_some();
    if marked {
        registry.mark_change_once_applied(&layout.name)?;
    }
    Ok(ChangeOnceReport { written, marked })
}
