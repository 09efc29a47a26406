//! Lossless parsing and rendering of `SKILL.md` files.
//!
//! A document is an optional `---` frontmatter block of flat `key: value`
//! lines followed by a Markdown body. The body is split on ATX headings into
//! a preamble and an ordered list of sections. A section runs until the next
//! heading of the same or a higher level, so deeper sub-headings stay inside
//! the parent's body. Headings inside fenced code blocks are ignored.
//!
//! A lone level-1 heading that opens the body is treated as the document
//! title and kept in the preamble, so `# Title` followed by `## Goal`,
//! `## Inputs`, ... yields the `##` sections rather than one giant section.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::contract::{normalize_section_name, AliasTable, FieldKind};
use crate::error::{Error, Result};

/// Flat, ordered `key: value` metadata. Equality ignores order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Frontmatter {
    entries: IndexMap<String, String>,
}

impl Frontmatter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    /// Insert or replace; a new key goes to the end.
    pub fn insert(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.entries.insert(key.into(), value.into());
    }

    pub fn remove(&mut self, key: &str) -> Option<String> {
        self.entries.shift_remove(key)
    }

    pub fn contains_key(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl<K: Into<String>, V: Into<String>> FromIterator<(K, V)> for Frontmatter {
    fn from_iter<T: IntoIterator<Item = (K, V)>>(iter: T) -> Self {
        Frontmatter {
            entries: iter
                .into_iter()
                .map(|(k, v)| (k.into(), v.into()))
                .collect(),
        }
    }
}

/// 1-based inclusive line range in the source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceSpan {
    pub start_line: usize,
    pub end_line: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SectionBlock {
    pub heading_raw: String,
    pub heading_level: usize,
    /// Verbatim text after the heading line, line terminators included.
    pub body: String,
    pub source_span: SourceSpan,
}

impl SectionBlock {
    pub fn new(heading: impl Into<String>, level: usize, body: impl Into<String>) -> Self {
        SectionBlock {
            heading_raw: heading.into(),
            heading_level: level,
            body: body.into(),
            source_span: SourceSpan {
                start_line: 0,
                end_line: 0,
            },
        }
    }

    /// Body with surrounding blank lines and trailing whitespace removed.
    pub fn content(&self) -> &str {
        trim_blank_lines(&self.body)
    }
}

// Spans are derived from position in the source; two sections are the same
// section whatever file offset they were read from.
impl PartialEq for SectionBlock {
    fn eq(&self, other: &Self) -> bool {
        self.heading_raw == other.heading_raw
            && self.heading_level == other.heading_level
            && self.body == other.body
    }
}

impl Eq for SectionBlock {}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkillDocument {
    pub frontmatter: Frontmatter,
    pub preamble: String,
    pub sections: Vec<SectionBlock>,
}

/// Strip leading blank lines and all trailing whitespace.
pub(crate) fn trim_blank_lines(text: &str) -> &str {
    let trimmed_end = text.trim_end();
    let mut start = 0;
    for line in trimmed_end.split_inclusive('\n') {
        if line.trim().is_empty() && line.ends_with('\n') {
            start += line.len();
        } else {
            break;
        }
    }
    &trimmed_end[start..]
}

pub(crate) fn normalize_newlines(text: &str) -> String {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    if text.contains('\r') {
        text.replace("\r\n", "\n").replace('\r', "\n")
    } else {
        text.to_owned()
    }
}

/// ATX heading level and text, or `None` for a non-heading line.
pub(crate) fn heading_of(line: &str) -> Option<(usize, &str)> {
    let line = line.strip_suffix('\n').unwrap_or(line);
    let hashes = line.bytes().take_while(|&b| b == b'#').count();
    if hashes == 0 || hashes > 6 {
        return None;
    }
    let rest = &line[hashes..];
    if rest.is_empty() {
        return Some((hashes, ""));
    }
    if rest.starts_with(' ') || rest.starts_with('\t') {
        return Some((hashes, rest.trim()));
    }
    None
}

/// Tracks whether a line sits inside a fenced code block.
#[derive(Debug, Default)]
pub(crate) struct FenceTracker {
    open: Option<(u8, usize)>,
}

impl FenceTracker {
    /// Feed one line; returns true when the line is fence content or a fence
    /// delimiter, i.e. not eligible to be a heading.
    pub(crate) fn observe(&mut self, line: &str) -> bool {
        let stripped = line.trim_end_matches('\n');
        let indent = stripped.len() - stripped.trim_start_matches(' ').len();
        let candidate = &stripped[indent..];
        let fence = if indent <= 3 {
            candidate
                .bytes()
                .next()
                .filter(|&b| b == b'`' || b == b'~')
                .map(|ch| (ch, candidate.bytes().take_while(|&b| b == ch).count()))
                .filter(|&(_, n)| n >= 3)
        } else {
            None
        };
        match (self.open, fence) {
            (None, Some(f)) => {
                self.open = Some(f);
                true
            }
            (Some((ch, len)), Some((c2, n)))
                if ch == c2 && n >= len && candidate[n..].trim().is_empty() =>
            {
                self.open = None;
                true
            }
            (Some(_), _) => true,
            (None, None) => false,
        }
    }
}

/// Parse `SKILL.md` text. Line endings are normalized to `\n` first.
pub fn parse_skill_markdown(text: &str) -> Result<SkillDocument> {
    let text = normalize_newlines(text);
    let (frontmatter, body, body_first_line) = split_frontmatter(&text)?;

    let lines: Vec<&str> = body.split_inclusive('\n').collect();
    let mut fences = FenceTracker::default();
    let headings: Vec<(usize, usize, &str)> = lines
        .iter()
        .enumerate()
        .filter_map(|(i, line)| {
            if fences.observe(line) {
                return None;
            }
            heading_of(line).map(|(level, raw)| (i, level, raw))
        })
        .collect();

    let title_index = match headings.first() {
        Some(&(i, 1, _)) if headings.iter().filter(|h| h.1 == 1).count() == 1 => Some(i),
        _ => None,
    };

    let mut starts: Vec<(usize, usize, &str)> = Vec::new();
    let mut current_level: Option<usize> = None;
    for &(i, level, raw) in &headings {
        if Some(i) == title_index {
            continue;
        }
        if current_level.is_none_or(|cur| level <= cur) {
            starts.push((i, level, raw));
            current_level = Some(level);
        }
    }

    let first_start = starts.first().map_or(lines.len(), |s| s.0);
    let preamble: String = lines[..first_start].concat();
    let mut sections = Vec::with_capacity(starts.len());
    for (n, &(i, level, raw)) in starts.iter().enumerate() {
        let end = starts.get(n + 1).map_or(lines.len(), |s| s.0);
        let body: String = lines[i + 1..end].concat();
        sections.push(SectionBlock {
            heading_raw: raw.to_owned(),
            heading_level: level,
            body,
            source_span: SourceSpan {
                start_line: body_first_line + i,
                end_line: body_first_line + end.max(i + 1) - 1,
            },
        });
    }

    Ok(SkillDocument {
        frontmatter,
        preamble,
        sections,
    })
}

/// Returns the frontmatter, the body text, and the 1-based line number the
/// body starts on.
fn split_frontmatter(text: &str) -> Result<(Frontmatter, &str, usize)> {
    let mut lines = text.split_inclusive('\n');
    match lines.next() {
        Some(first) if first.trim_end() == "---" => {}
        _ => return Ok((Frontmatter::new(), text, 1)),
    }
    let mut offset = text.find('\n').map_or(text.len(), |p| p + 1);
    let mut entries: IndexMap<String, String> = IndexMap::new();
    for (idx, line) in lines.enumerate() {
        let line_no = idx + 2;
        offset += line.len();
        let content = line.trim_end_matches('\n');
        if content.trim_end() == "---" {
            return Ok((Frontmatter { entries }, &text[offset..], line_no + 1));
        }
        if content.trim().is_empty() || content.starts_with('#') {
            continue;
        }
        let malformed = |reason: &str| Error::MalformedFrontmatter {
            line: line_no,
            reason: reason.to_owned(),
        };
        if content.starts_with([' ', '\t']) || content.starts_with("- ") {
            return Err(malformed(
                "nested frontmatter is not supported; use flat `key: value` lines",
            ));
        }
        let (key, value) = content
            .split_once(':')
            .ok_or_else(|| malformed("expected a `key: value` line"))?;
        let key = key.trim();
        if key.is_empty() {
            return Err(malformed("empty key"));
        }
        let value = parse_scalar(value.trim()).map_err(|r| malformed(&r))?;
        if entries.contains_key(key) {
            return Err(malformed(&format!("duplicate key `{key}`")));
        }
        entries.insert(key.to_owned(), value);
    }
    Err(Error::MalformedFrontmatter {
        line: 1,
        reason: "opening `---` has no closing `---`".into(),
    })
}

fn parse_scalar(raw: &str) -> std::result::Result<String, String> {
    if raw.starts_with('"') {
        return serde_json::from_str::<String>(raw)
            .map_err(|e| format!("bad double-quoted value: {e}"));
    }
    if let Some(inner) = raw.strip_prefix('\'') {
        let inner = inner
            .strip_suffix('\'')
            .ok_or("unterminated single-quoted value")?;
        return Ok(inner.replace("''", "'"));
    }
    if raw.starts_with('[') || raw.starts_with('{') {
        return Err("nested frontmatter is not supported; values must be scalars".into());
    }
    Ok(raw.to_owned())
}

fn render_scalar(value: &str) -> String {
    let needs_quotes = value != value.trim()
        || value.starts_with(['"', '\'', '[', '{'])
        || value.contains(['\n', '\r']);
    if needs_quotes {
        serde_json::to_string(value).expect("strings always serialize")
    } else {
        value.to_owned()
    }
}

/// Render a document back to `SKILL.md` text. Always emits a frontmatter
/// block; sections are written as `{#×level} heading\n` followed by the body.
pub fn render_skill_markdown(doc: &SkillDocument) -> String {
    let mut out = String::from("---\n");
    for (key, value) in doc.frontmatter.iter() {
        let rendered = render_scalar(value);
        if rendered.is_empty() {
            out.push_str(&format!("{key}:\n"));
        } else {
            out.push_str(&format!("{key}: {rendered}\n"));
        }
    }
    out.push_str("---\n");
    out.push_str(&doc.preamble);
    for section in &doc.sections {
        if !out.ends_with('\n') {
            out.push('\n');
        }
        out.push_str(&"#".repeat(section.heading_level.clamp(1, 6)));
        if !section.heading_raw.is_empty() {
            out.push(' ');
            out.push_str(&section.heading_raw);
        }
        out.push('\n');
        out.push_str(&section.body);
    }
    out
}

/// More than one section resolved to the same field. The first match is the
/// one callers should use.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AmbiguousSection<'a> {
    pub field: FieldKind,
    pub first: &'a SectionBlock,
    pub others: Vec<&'a SectionBlock>,
}

impl std::fmt::Display for AmbiguousSection<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} sections map to `{}`; using \"{}\" (line {})",
            self.others.len() + 1,
            self.field.display_name(),
            self.first.heading_raw,
            self.first.source_span.start_line
        )
    }
}

/// Find the section for `canonical`, consulting aliases.
pub fn locate_section<'a>(
    doc: &'a SkillDocument,
    canonical: FieldKind,
    aliases: &AliasTable,
) -> std::result::Result<Option<&'a SectionBlock>, AmbiguousSection<'a>> {
    let mut matches = doc
        .sections
        .iter()
        .filter(|s| normalize_section_name(&s.heading_raw, aliases) == Some(canonical));
    let Some(first) = matches.next() else {
        return Ok(None);
    };
    let others: Vec<_> = matches.collect();
    if others.is_empty() {
        Ok(Some(first))
    } else {
        Err(AmbiguousSection {
            field: canonical,
            first,
            others,
        })
    }
}
