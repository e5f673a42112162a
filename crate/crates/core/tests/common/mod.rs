//! Test support: an independent block oracle and random corpus generators.
#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;
use spiderforge::BlockNode;

/// Block shape compared between the parser and the oracle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Shape {
    pub header: usize,
    pub start: usize,
    pub end: usize,
    pub depth: usize,
    pub children: Vec<Shape>,
}

pub fn shape_of(nodes: &[BlockNode]) -> Vec<Shape> {
    nodes
        .iter()
        .map(|n| Shape {
            header: n.header_index,
            start: n.start,
            end: n.end,
            depth: n.depth,
            children: shape_of(&n.children),
        })
        .collect()
}

/// Stack simulation over raw indent widths: a line opens a block when the
/// next effective line is wider; a block is popped when a line is no wider
/// than its header, ending at the previous effective line.
pub fn oracle_blocks(lines: &[String]) -> Vec<Shape> {
    let eff: Vec<(usize, usize)> = lines
        .iter()
        .enumerate()
        .filter(|(_, l)| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('#')
        })
        .map(|(i, l)| {
            (
                i + 1,
                l.chars().take_while(|c| *c == ' ' || *c == '\t').count(),
            )
        })
        .collect();

    let mut roots: Vec<Shape> = Vec::new();
    let mut stack: Vec<(Shape, usize)> = Vec::new();
    fn pop(stack: &mut Vec<(Shape, usize)>, roots: &mut Vec<Shape>, end: usize) {
        let (mut s, _) = stack.pop().unwrap();
        s.end = end;
        match stack.last_mut() {
            Some((parent, _)) => parent.children.push(s),
            None => roots.push(s),
        }
    }
    for k in 0..eff.len() {
        let (idx, width) = eff[k];
        while stack.last().is_some_and(|(_, w)| *w >= width) {
            pop(&mut stack, &mut roots, eff[k - 1].0);
        }
        if k + 1 < eff.len() && eff[k + 1].1 > width {
            let depth = stack.len();
            stack.push((
                Shape {
                    header: idx,
                    start: eff[k + 1].0,
                    end: 0,
                    depth,
                    children: Vec::new(),
                },
                width,
            ));
        }
    }
    while !stack.is_empty() {
        let last = eff.last().unwrap().0;
        pop(&mut stack, &mut roots, last);
    }
    roots
}

const HEADERS: &[&str] = &[
    "class A:",
    "def f(self):",
    "if x:",
    "for i in y:",
    "while z:",
    "with open(p) as h:",
];

/// Random well-indented source: single-step indentation after headers,
/// arbitrary dedents, depth at most `max_depth`, blank and comment lines
/// sprinkled in. Returns the lines and the indent unit used.
pub fn random_source<R: Rng>(
    rng: &mut R,
    max_lines: usize,
    max_depth: usize,
) -> (Vec<String>, String) {
    let unit = ["  ", "    ", "\t"].choose(rng).unwrap().to_string();
    let n = rng.gen_range(1..=max_lines);
    let mut lines = Vec::with_capacity(n);
    let mut level = 0usize;
    let mut need_body = false;
    let mut k = 0;
    while lines.len() < n || need_body {
        k += 1;
        let roll: f64 = rng.gen();
        if !need_body && roll < 0.07 {
            lines.push(String::new());
            continue;
        }
        if !need_body && roll < 0.13 {
            let lvl = rng.gen_range(0..=level);
            lines.push(format!("{}# comment {k}", unit.repeat(lvl)));
            continue;
        }
        let indent = unit.repeat(level);
        let remaining = n.saturating_sub(lines.len() + 1);
        if level < max_depth && remaining > 0 && rng.gen_bool(0.3) {
            lines.push(format!("{indent}{}", HEADERS.choose(rng).unwrap()));
            level += 1;
            need_body = true;
        } else {
            lines.push(format!("{indent}v{k} = {k}"));
            need_body = false;
            if rng.gen_bool(0.35) {
                level = rng.gen_range(0..=level);
            }
        }
    }
    (lines, unit)
}

/// One logical unit of a generated settings file.
#[derive(Debug, Clone)]
pub enum SettingsItem {
    /// Prose comment, blank line, or other non-setting text.
    Other(String),
    Entry {
        key: String,
        option: String,
        commented: bool,
        /// Physical lines as written.
        lines: Vec<String>,
    },
}

pub const KEYS: &[&str] = &[
    "BOT_NAME",
    "ROBOTSTXT_OBEY",
    "DOWNLOAD_DELAY",
    "RANDOMIZE_DOWNLOAD_DELAY",
    "CONCURRENT_REQUESTS",
    "CONCURRENT_REQUESTS_PER_DOMAIN",
    "COOKIES_ENABLED",
    "TELNETCONSOLE_ENABLED",
    "DEFAULT_REQUEST_HEADERS",
    "ITEM_PIPELINES",
    "AUTOTHROTTLE_ENABLED",
    "AUTOTHROTTLE_START_DELAY",
    "HTTPCACHE_ENABLED",
    "HTTPCACHE_DIR",
    "FEED_EXPORT_ENCODING",
    "USER_AGENT",
];

const PROSE: &[&str] = &[
    "# this file is documentation",
    "# Obey robots.txt rules",
    "# See https://docs.scrapy.org/en/latest/topics/settings.html#download-delay",
    "# The download delay setting will honor only one of:",
    "# see https://example.com/?page=2 for details",
    "",
    "",
];

const VALUES: &[&str] = &[
    "True",
    "False",
    "3",
    "0.5",
    "'utf-8'",
    "'httpcache'",
    "dict(a=1, b=2)",
    "[]",
    "None",
];

/// Random settings text mixing active, glued-comment, multi-line and prose
/// shapes. With `normalized`, every entry uses the canonical
/// `KEY = option` / `#KEY = option` spelling.
pub fn random_settings<R: Rng>(rng: &mut R, normalized: bool) -> Vec<SettingsItem> {
    let n = rng.gen_range(3..40);
    let mut items = Vec::with_capacity(n + 1);
    let mut used = Vec::new();
    for _ in 0..n {
        let roll: f64 = rng.gen();
        if roll < 0.3 {
            items.push(SettingsItem::Other(PROSE.choose(rng).unwrap().to_string()));
            continue;
        }
        let key = KEYS.choose(rng).unwrap().to_string();
        // occasional duplicates, mostly commented
        if used.contains(&key) && rng.gen_bool(0.7) {
            continue;
        }
        used.push(key.clone());
        let commented = rng.gen_bool(0.5);
        let multi = roll > 0.85;
        let mark = if commented { "#" } else { "" };
        if multi {
            let opener = format!("{mark}{key} = {{");
            let mut lines = vec![opener];
            for j in 0..rng.gen_range(1..4) {
                lines.push(format!(
                    "{mark}    'mod.part{j}': '{}',",
                    ["q=0.9", "(", "x}", "plain"].choose(rng).unwrap()
                ));
            }
            lines.push(format!("{mark}}}"));
            items.push(SettingsItem::Entry {
                key,
                option: "{".into(),
                commented,
                lines,
            });
            continue;
        }
        let option = VALUES.choose(rng).unwrap().to_string();
        let line = if normalized {
            format!("{mark}{key} = {option}")
        } else {
            let head = if commented {
                ["#", "# ", "#  "].choose(rng).unwrap().to_string()
            } else {
                String::new()
            };
            let eq = ["=", " = ", "  =  ", " =", "= "].choose(rng).unwrap();
            format!("{head}{key}{eq}{option}")
        };
        items.push(SettingsItem::Entry {
            key,
            option,
            commented,
            lines: vec![line],
        });
    }
    if !items
        .iter()
        .any(|i| matches!(i, SettingsItem::Entry { .. }))
    {
        items.push(SettingsItem::Entry {
            key: "BOT_NAME".into(),
            option: "'demo'".into(),
            commented: false,
            lines: vec!["BOT_NAME = 'demo'".into()],
        });
    }
    items
}

pub fn render(items: &[SettingsItem]) -> String {
    let mut out = String::new();
    for item in items {
        match item {
            SettingsItem::Other(l) => {
                out.push_str(l);
                out.push('\n');
            }
            SettingsItem::Entry { lines, .. } => {
                for l in lines {
                    out.push_str(l);
                    out.push('\n');
                }
            }
        }
    }
    out
}

pub fn present_keys(items: &[SettingsItem]) -> Vec<String> {
    let mut keys: Vec<String> = items
        .iter()
        .filter_map(|i| match i {
            SettingsItem::Entry { key, .. } => Some(key.clone()),
            _ => None,
        })
        .collect();
    keys.sort();
    keys.dedup();
    keys
}

/// Physical lines not belonging to any entry of `key`, in order.
pub fn lines_without_key(items: &[SettingsItem], key: &str) -> Vec<String> {
    let mut out = Vec::new();
    for item in items {
        match item {
            SettingsItem::Other(l) => out.push(l.clone()),
            SettingsItem::Entry { key: k, lines, .. } if k != key => {
                out.extend(lines.iter().cloned())
            }
            SettingsItem::Entry { .. } => {}
        }
    }
    out
}

/// Expected file after setting `key` to `option`: the first entry becomes
/// the active line, later active duplicates are commented, everything else
/// is copied.
pub fn model_set(items: &[SettingsItem], key: &str, option: &str) -> Vec<SettingsItem> {
    let mut seen = false;
    items
        .iter()
        .map(|item| match item {
            SettingsItem::Entry {
                key: k,
                option: old,
                commented,
                lines,
            } if k == key => {
                if !seen {
                    seen = true;
                    SettingsItem::Entry {
                        key: k.clone(),
                        option: option.to_string(),
                        commented: false,
                        lines: vec![format!("{k} = {option}")],
                    }
                } else if !commented {
                    let mut new_lines = vec![format!("#{k} = {old}")];
                    new_lines.extend(lines[1..].iter().map(|l| format!("#{l}")));
                    SettingsItem::Entry {
                        key: k.clone(),
                        option: old.clone(),
                        commented: true,
                        lines: new_lines,
                    }
                } else {
                    item.clone()
                }
            }
            other => other.clone(),
        })
        .collect()
}
