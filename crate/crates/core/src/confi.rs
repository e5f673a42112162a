//! Repeatable key/value rewriting of settings files.
//!
//! A settings line has the shape `head key equal option`, where `head` is
//! empty or a `#` (optionally surrounded by spaces) and `key` is an
//! identifier. Lines that do not fit, such as prose comments, are never
//! touched. An option whose brackets do not balance on its first line
//! extends over the following lines until they do; for commented options
//! the continuation lines must be commented too.
//!
//! Matched lines are normalized to `key = option`; every other line is
//! copied byte for byte.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::thread;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::fsutil::atomic_write;

pub const DEFAULT_EQUAL: &str = "=";
pub const DEFAULT_TERMINATOR: &str = "\n";

#[derive(Debug, Error)]
pub enum ConfiError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("timed out after {waited:?} waiting for {}", path.display())]
    Timeout { path: PathBuf, waited: Duration },
    #[error("invalid option text {0:?}")]
    InvalidOption(String),
    #[error("invalid key {0:?}")]
    InvalidKey(String),
    #[error("key {0:?} not found")]
    KeyNotFound(String),
    #[error("equal symbol and line terminator must be non-empty")]
    InvalidSyntax,
    #[error("poll interval must be positive")]
    InvalidInterval,
}

/// A parsed settings line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigLine {
    /// Text before the key: empty, `#`, or `#` with surrounding spaces.
    pub head: String,
    pub key: String,
    /// Trimmed text after the first equal symbol.
    pub option: String,
    /// The line as read, terminator excluded.
    pub raw: String,
    pub terminator: String,
}

impl ConfigLine {
    pub fn is_commented(&self) -> bool {
        self.head.contains('#')
    }
}

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn split_terminator<'a>(line: &'a str, terminator: &'a str) -> (&'a str, &'a str) {
    match line.strip_suffix(terminator) {
        Some(content) if terminator == "\n" && content.ends_with('\r') => {
            let cut = content.len() - 1;
            (&line[..cut], &line[cut..])
        }
        Some(content) => (content, terminator),
        None => (line, ""),
    }
}

fn parse_content(content: &str, terminator: &str, equal: &str) -> Option<ConfigLine> {
    if equal.is_empty() {
        return None;
    }
    let eq = content.find(equal)?;
    let before = &content[..eq];
    let after = &content[eq + equal.len()..];
    if after.starts_with(equal) {
        // `==` comparison, not an assignment
        return None;
    }
    let indent = before.len() - before.trim_start_matches([' ', '\t']).len();
    let mut key_start = indent;
    if before[key_start..].starts_with('#') {
        key_start += 1;
        key_start +=
            before[key_start..].len() - before[key_start..].trim_start_matches([' ', '\t']).len();
    }
    let key = before[key_start..].trim_end();
    if !is_identifier(key) {
        return None;
    }
    Some(ConfigLine {
        head: before[..key_start].to_string(),
        key: key.to_string(),
        option: after.trim().to_string(),
        raw: content.to_string(),
        terminator: terminator.to_string(),
    })
}

/// Parse one line (with or without its `\n` / `\r\n` terminator).
pub fn parse_config_line(line: &str, equal: &str) -> Option<ConfigLine> {
    let (content, term) = if let Some(c) = line.strip_suffix("\r\n") {
        (c, "\r\n")
    } else if let Some(c) = line.strip_suffix('\n') {
        (c, "\n")
    } else {
        (line, "")
    };
    parse_content(content, term, equal)
}

/// Open-bracket counter that ignores quoted text and trailing comments.
/// Quote state carries across lines so triple-quoted strings stay opaque.
#[derive(Debug, Default)]
struct BracketScanner {
    depth: i64,
    quote: Option<char>,
}

impl BracketScanner {
    fn feed(&mut self, text: &str) {
        let mut chars = text.chars();
        while let Some(c) = chars.next() {
            match self.quote {
                Some(q) => {
                    if c == '\\' {
                        chars.next();
                    } else if c == q {
                        self.quote = None;
                    }
                }
                None => match c {
                    '\'' | '"' => self.quote = Some(c),
                    '#' => break,
                    '(' | '[' | '{' => self.depth += 1,
                    ')' | ']' | '}' => self.depth -= 1,
                    _ => {}
                },
            }
        }
    }

    fn open(&self) -> bool {
        self.depth > 0
    }
}

/// Strip the first `#` after leading whitespace, if any.
fn uncomment_continuation(content: &str) -> Option<String> {
    let indent = content.len() - content.trim_start_matches([' ', '\t']).len();
    let rest = &content[indent..];
    rest.strip_prefix('#')
        .map(|tail| format!("{}{}", &content[..indent], tail))
}

#[derive(Debug)]
struct RawLine<'a> {
    content: &'a str,
    terminator: &'a str,
}

impl RawLine<'_> {
    fn push_to(&self, out: &mut String) {
        out.push_str(self.content);
        out.push_str(self.terminator);
    }
}

#[derive(Debug)]
enum Item {
    Plain(usize),
    Entry {
        first: usize,
        line: ConfigLine,
        /// Continuation line indices (exclusive end).
        end: usize,
    },
}

struct Document<'a> {
    lines: Vec<RawLine<'a>>,
    items: Vec<Item>,
}

impl<'a> Document<'a> {
    fn parse(text: &'a str, equal: &str, terminator: &'a str) -> Self {
        let lines: Vec<RawLine<'a>> = text
            .split_inclusive(terminator)
            .map(|l| {
                let (content, terminator) = split_terminator(l, terminator);
                RawLine {
                    content,
                    terminator,
                }
            })
            .collect();
        let mut items = Vec::new();
        let mut i = 0;
        while i < lines.len() {
            let Some(line) = parse_content(lines[i].content, lines[i].terminator, equal) else {
                items.push(Item::Plain(i));
                i += 1;
                continue;
            };
            let mut scanner = BracketScanner::default();
            scanner.feed(&line.option);
            let commented = line.is_commented();
            let mut j = i + 1;
            while scanner.open() && j < lines.len() {
                let content = lines[j].content;
                if commented {
                    match uncomment_continuation(content) {
                        Some(inner) => scanner.feed(&inner),
                        None => break,
                    }
                } else {
                    scanner.feed(content);
                }
                j += 1;
            }
            items.push(Item::Entry {
                first: i,
                line,
                end: j,
            });
            i = j;
        }
        Self { lines, items }
    }

    /// Terminator of the last physical line of an entry.
    fn entry_terminator(&self, end: usize) -> &'a str {
        self.lines[end - 1].terminator
    }

    fn push_raw(&self, range: std::ops::Range<usize>, out: &mut String) {
        for line in &self.lines[range] {
            line.push_to(out);
        }
    }

    fn find(&self, key: &str) -> Option<(&ConfigLine, bool)> {
        self.items.iter().find_map(|item| match item {
            Item::Entry { first, line, end } if line.key == key => Some((line, *end > first + 1)),
            _ => None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EditAction {
    /// Activate the key with this option, appending it when absent.
    Set(String),
    /// Flip the comment state of every line carrying the key.
    ToggleComment,
    /// Append `key = option` only if the key is absent; never touches
    /// existing lines.
    Append(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigEdit {
    pub key: String,
    pub action: EditAction,
    pub equal: String,
    pub terminator: String,
}

impl ConfigEdit {
    fn with_action(key: impl Into<String>, action: EditAction) -> Self {
        Self {
            key: key.into(),
            action,
            equal: DEFAULT_EQUAL.to_string(),
            terminator: DEFAULT_TERMINATOR.to_string(),
        }
    }

    pub fn set(key: impl Into<String>, option: impl Into<String>) -> Self {
        Self::with_action(key, EditAction::Set(option.into()))
    }

    pub fn toggle(key: impl Into<String>) -> Self {
        Self::with_action(key, EditAction::ToggleComment)
    }

    pub fn append(key: impl Into<String>, option: impl Into<String>) -> Self {
        Self::with_action(key, EditAction::Append(option.into()))
    }

    pub fn equal(mut self, equal: impl Into<String>) -> Self {
        self.equal = equal.into();
        self
    }

    pub fn terminator(mut self, terminator: impl Into<String>) -> Self {
        self.terminator = terminator.into();
        self
    }

    fn validate(&self) -> Result<(), ConfiError> {
        if self.equal.is_empty() || self.terminator.is_empty() {
            return Err(ConfiError::InvalidSyntax);
        }
        if !is_identifier(&self.key) {
            return Err(ConfiError::InvalidKey(self.key.clone()));
        }
        if let EditAction::Set(option) | EditAction::Append(option) = &self.action {
            let trimmed = option.trim();
            if trimmed.is_empty() || trimmed == "#" || option.contains(['\n', '\r']) {
                return Err(ConfiError::InvalidOption(option.clone()));
            }
        }
        Ok(())
    }

    fn active_line(&self, option: &str) -> String {
        format!("{} {} {}", self.key, self.equal, option.trim())
    }

    fn commented_line(&self, option: &str) -> String {
        format!("#{} {} {}", self.key, self.equal, option.trim())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EditOutcome {
    /// `lines` entries carrying the key were rewritten.
    Updated {
        lines: usize,
    },
    Appended,
    KeyNotFound,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EditReport {
    pub outcome: EditOutcome,
    /// Whether the file content changed.
    pub changed: bool,
}

impl EditReport {
    pub fn found(&self) -> bool {
        matches!(self.outcome, EditOutcome::Updated { .. })
    }
}

fn append_line(text: &str, line: &str, terminator: &str, out: &mut String) {
    out.push_str(text);
    if !text.is_empty() {
        if !text.ends_with(terminator) {
            out.push_str(terminator);
        }
        out.push_str(terminator);
    }
    out.push_str(line);
    out.push_str(terminator);
}

/// Apply `edit` to in-memory settings text.
pub fn apply_edit_text(text: &str, edit: &ConfigEdit) -> Result<(String, EditReport), ConfiError> {
    edit.validate()?;
    let doc = Document::parse(text, &edit.equal, &edit.terminator);
    let mut out = String::with_capacity(text.len() + 64);
    let mut matched = 0usize;

    match &edit.action {
        EditAction::Append(option) => {
            if doc.find(&edit.key).is_some() {
                return Ok((
                    text.to_string(),
                    EditReport {
                        outcome: EditOutcome::Updated { lines: 0 },
                        changed: false,
                    },
                ));
            }
            append_line(text, &edit.active_line(option), &edit.terminator, &mut out);
            return Ok((
                out,
                EditReport {
                    outcome: EditOutcome::Appended,
                    changed: true,
                },
            ));
        }
        EditAction::Set(option) => {
            for item in &doc.items {
                match item {
                    Item::Plain(i) => doc.lines[*i].push_to(&mut out),
                    Item::Entry { first, line, end } if line.key == edit.key => {
                        matched += 1;
                        if matched == 1 {
                            out.push_str(&edit.active_line(option));
                            out.push_str(doc.entry_terminator(*end));
                        } else if !line.is_commented() {
                            // a later active duplicate would shadow the first
                            comment_entry(&doc, *first, *end, line, edit, &mut out);
                        } else {
                            doc.push_raw(*first..*end, &mut out);
                        }
                    }
                    Item::Entry { first, end, .. } => doc.push_raw(*first..*end, &mut out),
                }
            }
            if matched == 0 {
                out.clear();
                append_line(text, &edit.active_line(option), &edit.terminator, &mut out);
                return Ok((
                    out,
                    EditReport {
                        outcome: EditOutcome::Appended,
                        changed: true,
                    },
                ));
            }
        }
        EditAction::ToggleComment => {
            for item in &doc.items {
                match item {
                    Item::Plain(i) => doc.lines[*i].push_to(&mut out),
                    Item::Entry { first, line, end } if line.key == edit.key => {
                        matched += 1;
                        if line.is_commented() {
                            uncomment_entry(&doc, *first, *end, line, edit, &mut out);
                        } else {
                            comment_entry(&doc, *first, *end, line, edit, &mut out);
                        }
                    }
                    Item::Entry { first, end, .. } => doc.push_raw(*first..*end, &mut out),
                }
            }
            if matched == 0 {
                return Ok((
                    text.to_string(),
                    EditReport {
                        outcome: EditOutcome::KeyNotFound,
                        changed: false,
                    },
                ));
            }
        }
    }
    let changed = out != text;
    Ok((
        out,
        EditReport {
            outcome: EditOutcome::Updated { lines: matched },
            changed,
        },
    ))
}

fn comment_entry(
    doc: &Document<'_>,
    first: usize,
    end: usize,
    line: &ConfigLine,
    edit: &ConfigEdit,
    out: &mut String,
) {
    out.push_str(&edit.commented_line(&line.option));
    out.push_str(doc.lines[first].terminator);
    for cont in &doc.lines[first + 1..end] {
        out.push('#');
        cont.push_to(out);
    }
}

fn uncomment_entry(
    doc: &Document<'_>,
    first: usize,
    end: usize,
    line: &ConfigLine,
    edit: &ConfigEdit,
    out: &mut String,
) {
    out.push_str(&edit.active_line(&line.option));
    out.push_str(doc.lines[first].terminator);
    for cont in &doc.lines[first + 1..end] {
        // continuation of a commented option always starts with `#`
        let inner =
            uncomment_continuation(cont.content).unwrap_or_else(|| cont.content.to_string());
        out.push_str(&inner);
        out.push_str(cont.terminator);
    }
}

/// Existence polling for settings files that another process may still be
/// writing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WaitPolicy {
    pub interval: Duration,
    pub timeout: Duration,
}

impl Default for WaitPolicy {
    fn default() -> Self {
        Self {
            interval: Duration::from_millis(100),
            timeout: Duration::from_secs(30),
        }
    }
}

pub fn wait_for_file(path: &Path, policy: &WaitPolicy) -> Result<(), ConfiError> {
    if policy.interval.is_zero() {
        return Err(ConfiError::InvalidInterval);
    }
    let started = Instant::now();
    loop {
        if path.exists() {
            return Ok(());
        }
        let waited = started.elapsed();
        if waited >= policy.timeout {
            return Err(ConfiError::Timeout {
                path: path.to_path_buf(),
                waited,
            });
        }
        thread::sleep(policy.interval.min(policy.timeout - waited));
    }
}

fn read(path: &Path) -> Result<String, ConfiError> {
    fs::read_to_string(path).map_err(|source| ConfiError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Wait for `path`, apply `edit`, and write back atomically when changed.
pub fn apply_edit(
    path: &Path,
    edit: &ConfigEdit,
    wait: &WaitPolicy,
) -> Result<EditReport, ConfiError> {
    edit.validate()?;
    wait_for_file(path, wait)?;
    let text = read(path)?;
    let (out, report) = apply_edit_text(&text, edit)?;
    if report.changed {
        atomic_write(path, out.as_bytes()).map_err(|source| ConfiError::Io {
            path: path.to_path_buf(),
            source,
        })?;
    }
    Ok(report)
}

pub fn set_option(path: &Path, key: &str, option: &str) -> Result<EditReport, ConfiError> {
    apply_edit(path, &ConfigEdit::set(key, option), &WaitPolicy::default())
}

/// Toggle the comment state of `key`. A missing key leaves the file alone
/// and reports [`EditOutcome::KeyNotFound`].
pub fn toggle_comment(path: &Path, key: &str) -> Result<EditReport, ConfiError> {
    apply_edit(path, &ConfigEdit::toggle(key), &WaitPolicy::default())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OptionValue {
    /// Option text on the key's first line.
    pub option: String,
    pub commented: bool,
    /// The option continues on following lines.
    pub continued: bool,
}

pub fn get_option_text(
    text: &str,
    key: &str,
    equal: &str,
    terminator: &str,
) -> Result<OptionValue, ConfiError> {
    if equal.is_empty() || terminator.is_empty() {
        return Err(ConfiError::InvalidSyntax);
    }
    let doc = Document::parse(text, equal, terminator);
    doc.find(key)
        .map(|(line, continued)| OptionValue {
            option: line.option.clone(),
            commented: line.is_commented(),
            continued,
        })
        .ok_or_else(|| ConfiError::KeyNotFound(key.to_string()))
}

pub fn get_option(path: &Path, key: &str) -> Result<OptionValue, ConfiError> {
    get_option_text(&read(path)?, key, DEFAULT_EQUAL, DEFAULT_TERMINATOR)
}
