//! Indentation-delimited code blocks.
//!
//! Every effective line carries an indent pair `[f, b]`: the indent of the
//! line itself and the indent of the next effective line, both in indent
//! units. The sign of `f - b` drives a single left-to-right pass:
//! negative enters a block headed by the current line, zero stays in scope,
//! positive leaves `f - b` levels.
//!
//! Blank lines and lines whose trimmed text starts with `#` are not
//! effective. They stay in the buffer but never produce transitions.

use std::fmt;

use thiserror::Error;

/// Errors raised while measuring or resolving blocks.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BlockError {
    #[error("line {line}: tabs and spaces mixed in leading whitespace")]
    MixedIndentation { line: usize },
    #[error("line {line}: indent width {width} is not a multiple of the unit width {unit}")]
    RaggedIndent {
        line: usize,
        width: usize,
        unit: usize,
    },
    #[error("indent unit width must be at least 1")]
    ZeroUnitWidth,
    #[error("block path must contain at least one signature")]
    EmptyPath,
    #[error("no block matches signature {signature:?} at level {level}")]
    NotFound { level: usize, signature: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IndentStyle {
    Spaces,
    Tabs,
}

impl IndentStyle {
    fn indent_char(self) -> char {
        match self {
            IndentStyle::Spaces => ' ',
            IndentStyle::Tabs => '\t',
        }
    }
}

/// How many whitespace characters make up one indent level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct IndentProfile {
    unit_width: usize,
    style: IndentStyle,
}

impl IndentProfile {
    pub const DEFAULT_UNIT_WIDTH: usize = 4;

    pub fn new(unit_width: usize, style: IndentStyle) -> Result<Self, BlockError> {
        if unit_width == 0 {
            return Err(BlockError::ZeroUnitWidth);
        }
        Ok(Self { unit_width, style })
    }

    pub fn unit_width(&self) -> usize {
        self.unit_width
    }

    pub fn style(&self) -> IndentStyle {
        self.style
    }
}

impl Default for IndentProfile {
    fn default() -> Self {
        Self {
            unit_width: Self::DEFAULT_UNIT_WIDTH,
            style: IndentStyle::Spaces,
        }
    }
}

/// One effective source line with its indent pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineRecord {
    /// 1-based line number in the original buffer.
    pub index: usize,
    pub text: String,
    /// Indent units of this line.
    pub f: usize,
    /// Indent units of the next effective line, 0 for the last one.
    pub b: usize,
}

/// Result of comparing a line's indent with the next effective line's.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Transition {
    Enter,
    Same,
    /// Leave `levels` indent units.
    Leave(usize),
}

impl Transition {
    pub fn levels(self) -> Option<usize> {
        match self {
            Transition::Leave(levels) => Some(levels),
            _ => None,
        }
    }
}

/// A block opened by an `Enter` transition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockNode {
    /// Line that opened the block.
    pub header_index: usize,
    /// Header text, trimmed.
    pub header: String,
    /// First effective line of the body.
    pub start: usize,
    /// Last effective line of the body.
    pub end: usize,
    /// 0 for blocks at file scope.
    pub depth: usize,
    pub children: Vec<BlockNode>,
}

impl BlockNode {
    pub fn contains(&self, line: usize) -> bool {
        (self.start..=self.end).contains(&line)
    }

    /// Number of blocks in this subtree, including `self`.
    pub fn size(&self) -> usize {
        1 + self.children.iter().map(BlockNode::size).sum::<usize>()
    }
}

/// Forest of top-level blocks for one source buffer.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BlockTree {
    pub roots: Vec<BlockNode>,
}

impl BlockTree {
    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    pub fn block_count(&self) -> usize {
        self.roots.iter().map(BlockNode::size).sum()
    }

    /// Pre-order traversal over every block.
    pub fn iter(&self) -> impl Iterator<Item = &BlockNode> {
        let mut stack: Vec<&BlockNode> = self.roots.iter().rev().collect();
        std::iter::from_fn(move || {
            let node = stack.pop()?;
            stack.extend(node.children.iter().rev());
            Some(node)
        })
    }

    /// Innermost block whose body span contains `line`, or `None` for file scope.
    pub fn deepest_block_at(&self, line: usize) -> Option<&BlockNode> {
        let mut level = &self.roots;
        let mut found = None;
        while let Some(node) = level.iter().find(|n| n.contains(line)) {
            found = Some(node);
            level = &node.children;
        }
        found
    }
}

/// Header signatures naming a nested block, outermost first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BlockPath(Vec<String>);

impl BlockPath {
    pub fn new<I, S>(signatures: I) -> Result<Self, BlockError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let signatures: Vec<String> = signatures.into_iter().map(Into::into).collect();
        if signatures.is_empty() {
            return Err(BlockError::EmptyPath);
        }
        Ok(Self(signatures))
    }

    pub fn signatures(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

impl fmt::Display for BlockPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.join(" > "))
    }
}

/// Split text into lines without their `\n` terminators.
///
/// A trailing terminator does not produce a final empty line.
pub fn source_lines(text: &str) -> Vec<&str> {
    let mut lines: Vec<&str> = text.split('\n').collect();
    if text.is_empty() || text.ends_with('\n') {
        lines.pop();
    }
    lines
}

/// Leading run of spaces and tabs.
pub fn leading_whitespace(line: &str) -> &str {
    let end = line
        .find(|c: char| c != ' ' && c != '\t')
        .unwrap_or(line.len());
    &line[..end]
}

/// Blank and `#`-comment lines are skipped by transition computation.
pub fn is_effective(line: &str) -> bool {
    let trimmed = line.trim();
    !trimmed.is_empty() && !trimmed.starts_with('#')
}

fn style_of(line_no: usize, lead: &str) -> Result<Option<IndentStyle>, BlockError> {
    let tabs = lead.contains('\t');
    let spaces = lead.contains(' ');
    match (tabs, spaces) {
        (true, true) => Err(BlockError::MixedIndentation { line: line_no }),
        (true, false) => Ok(Some(IndentStyle::Tabs)),
        (false, true) => Ok(Some(IndentStyle::Spaces)),
        (false, false) => Ok(None),
    }
}

/// Infer the indent unit from the smallest positive indent change between
/// consecutive effective lines. Files without indentation (and empty input)
/// get the 4-space default.
pub fn detect_indent_profile<S: AsRef<str>>(lines: &[S]) -> Result<IndentProfile, BlockError> {
    let mut style = None;
    let mut previous = 0usize;
    let mut unit: Option<usize> = None;

    for (i, line) in lines.iter().enumerate() {
        let line = line.as_ref();
        if line.trim().is_empty() {
            continue;
        }
        let lead = leading_whitespace(line);
        if let Some(found) = style_of(i + 1, lead)? {
            match style {
                None => style = Some(found),
                Some(s) if s != found => return Err(BlockError::MixedIndentation { line: i + 1 }),
                Some(_) => {}
            }
        }
        if !is_effective(line) {
            continue;
        }
        let width = lead.chars().count();
        if width != previous {
            let delta = width.abs_diff(previous);
            unit = Some(unit.map_or(delta, |u| u.min(delta)));
        }
        previous = width;
    }

    Ok(match (unit, style) {
        (Some(unit_width), Some(style)) => IndentProfile { unit_width, style },
        _ => IndentProfile::default(),
    })
}

/// Indent pairs for every effective line, in buffer order.
pub fn measure_lines<S: AsRef<str>>(
    lines: &[S],
    profile: &IndentProfile,
) -> Result<Vec<LineRecord>, BlockError> {
    let expected = profile.style.indent_char();
    let mut records: Vec<LineRecord> = Vec::new();

    for (i, line) in lines.iter().enumerate() {
        let line = line.as_ref();
        if !is_effective(line) {
            continue;
        }
        let lead = leading_whitespace(line);
        if lead.chars().any(|c| c != expected) {
            return Err(BlockError::MixedIndentation { line: i + 1 });
        }
        let width = lead.len();
        if !width.is_multiple_of(profile.unit_width) {
            return Err(BlockError::RaggedIndent {
                line: i + 1,
                width,
                unit: profile.unit_width,
            });
        }
        let f = width / profile.unit_width;
        if let Some(prev) = records.last_mut() {
            prev.b = f;
        }
        records.push(LineRecord {
            index: i + 1,
            text: line.to_string(),
            f,
            b: 0,
        });
    }
    Ok(records)
}

pub fn classify_transition(f: usize, b: usize) -> Transition {
    use std::cmp::Ordering;
    match f.cmp(&b) {
        Ordering::Less => Transition::Enter,
        Ordering::Equal => Transition::Same,
        Ordering::Greater => Transition::Leave(f - b),
    }
}

struct OpenBlock {
    node: BlockNode,
    level: usize,
}

fn close(stack: &mut Vec<OpenBlock>, roots: &mut Vec<BlockNode>, end: usize) {
    if let Some(mut open) = stack.pop() {
        open.node.end = end;
        match stack.last_mut() {
            Some(parent) => parent.node.children.push(open.node),
            None => roots.push(open.node),
        }
    }
}

/// Build the block forest from measured records.
pub fn build_from_records(records: &[LineRecord]) -> BlockTree {
    let mut stack: Vec<OpenBlock> = Vec::new();
    let mut roots = Vec::new();

    for (k, rec) in records.iter().enumerate() {
        match classify_transition(rec.f, rec.b) {
            Transition::Enter => {
                // b > 0 implies a following effective line
                let start = records[k + 1].index;
                let depth = stack.len();
                stack.push(OpenBlock {
                    node: BlockNode {
                        header_index: rec.index,
                        header: rec.text.trim().to_string(),
                        start,
                        end: start,
                        depth,
                        children: Vec::new(),
                    },
                    level: rec.f,
                });
            }
            Transition::Same => {}
            Transition::Leave(_) => {
                while stack.last().is_some_and(|open| open.level >= rec.b) {
                    close(&mut stack, &mut roots, rec.index);
                }
            }
        }
    }
    if let Some(last) = records.last() {
        while !stack.is_empty() {
            close(&mut stack, &mut roots, last.index);
        }
    }
    BlockTree { roots }
}

/// Detect the indent profile, measure, and build the block forest.
pub fn build_block_tree<S: AsRef<str>>(lines: &[S]) -> Result<BlockTree, BlockError> {
    let profile = detect_indent_profile(lines)?;
    let records = measure_lines(lines, &profile)?;
    Ok(build_from_records(&records))
}

/// Resolve `path` level by level; the first sibling in line order wins ties.
pub fn locate_block<'t>(
    tree: &'t BlockTree,
    path: &BlockPath,
) -> Result<&'t BlockNode, BlockError> {
    let mut level: &[BlockNode] = &tree.roots;
    let mut matched = None;
    for (depth, signature) in path.signatures().iter().enumerate() {
        let wanted = signature.trim();
        let node =
            level
                .iter()
                .find(|n| n.header == wanted)
                .ok_or_else(|| BlockError::NotFound {
                    level: depth,
                    signature: signature.clone(),
                })?;
        matched = Some(node);
        level = &node.children;
    }
    // non-empty path guarantees at least one match here
    Ok(matched.expect("non-empty block path"))
}

/// 1-based indices of every line whose trimmed text equals the trimmed signature.
pub fn code_inds_list<S: AsRef<str>>(lines: &[S], signature: &str) -> Vec<usize> {
    let wanted = signature.trim();
    lines
        .iter()
        .enumerate()
        .filter(|(_, line)| line.as_ref().trim() == wanted)
        .map(|(i, _)| i + 1)
        .collect()
}
