//! The YAML contract source format.
//!
//! Only mappings, sequences and scalars are accepted. Anchors, aliases and
//! tags are rejected, and so is a stream with more than one document. Every
//! error carries the line and column of the offending node.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use yaml_rust2::parser::{Event, Parser};
use yaml_rust2::scanner::{Marker, TScalarStyle};

use crate::contract::{
    ExtraSection, FieldContent, FieldKind, HandoffRoute, InputItem, PrivacyClass, Structured,
    TaskContract, TemplateVariant,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
struct Pos {
    line: usize,
    column: usize,
}

impl From<Marker> for Pos {
    fn from(m: Marker) -> Self {
        Pos {
            line: m.line(),
            column: m.col() + 1,
        }
    }
}

#[derive(Debug)]
enum Node {
    Scalar {
        value: String,
        plain: bool,
        pos: Pos,
    },
    Seq {
        items: Vec<Node>,
        pos: Pos,
    },
    Map {
        entries: Vec<(String, Pos, Node)>,
        pos: Pos,
    },
}

impl Node {
    fn pos(&self) -> Pos {
        match self {
            Node::Scalar { pos, .. } | Node::Seq { pos, .. } | Node::Map { pos, .. } => *pos,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Node::Scalar { .. } => "a scalar",
            Node::Seq { .. } => "a sequence",
            Node::Map { .. } => "a mapping",
        }
    }
}

fn err(pos: Pos, message: impl Into<String>) -> Error {
    Error::Source {
        line: pos.line,
        column: pos.column,
        message: message.into(),
    }
}

struct Reader<'a> {
    parser: Parser<std::str::Chars<'a>>,
}

impl Reader<'_> {
    fn next(&mut self) -> Result<(Event, Pos)> {
        self.parser
            .next_token()
            .map(|(e, m)| (e, Pos::from(m)))
            .map_err(|e| err(Pos::from(*e.marker()), e.info().to_owned()))
    }

    fn node(&mut self, event: Event, pos: Pos) -> Result<Node> {
        match event {
            Event::Scalar(value, style, anchor, tag) => {
                if anchor != 0 {
                    return Err(err(pos, "anchors are not supported"));
                }
                if tag.is_some() {
                    return Err(err(pos, "tags are not supported"));
                }
                Ok(Node::Scalar {
                    value,
                    plain: style == TScalarStyle::Plain,
                    pos,
                })
            }
            Event::SequenceStart(anchor, tag) => {
                if anchor != 0 || tag.is_some() {
                    return Err(err(pos, "anchors and tags are not supported"));
                }
                let mut items = Vec::new();
                loop {
                    let (ev, p) = self.next()?;
                    if ev == Event::SequenceEnd {
                        break;
                    }
                    items.push(self.node(ev, p)?);
                }
                Ok(Node::Seq { items, pos })
            }
            Event::MappingStart(anchor, tag) => {
                if anchor != 0 || tag.is_some() {
                    return Err(err(pos, "anchors and tags are not supported"));
                }
                let mut entries: Vec<(String, Pos, Node)> = Vec::new();
                loop {
                    let (ev, p) = self.next()?;
                    if ev == Event::MappingEnd {
                        break;
                    }
                    let key = match self.node(ev, p)? {
                        Node::Scalar { value, .. } => value,
                        other => return Err(err(other.pos(), "mapping keys must be scalars")),
                    };
                    if entries.iter().any(|(k, _, _)| *k == key) {
                        return Err(err(p, format!("duplicate key `{key}`")));
                    }
                    let (ev, vp) = self.next()?;
                    let value = self.node(ev, vp)?;
                    entries.push((key, p, value));
                }
                // The parser reports mapping starts at odd places; the first
                // key is a better anchor for messages.
                let pos = entries.first().map(|(_, p, _)| *p).unwrap_or(pos);
                Ok(Node::Map { entries, pos })
            }
            Event::Alias(_) => Err(err(pos, "aliases are not supported")),
            other => Err(err(pos, format!("unexpected YAML event {other:?}"))),
        }
    }
}

fn read_document(text: &str) -> Result<Option<Node>> {
    let mut reader = Reader {
        parser: Parser::new_from_str(text),
    };
    let mut root = None;
    loop {
        let (ev, pos) = reader.next()?;
        match ev {
            Event::StreamStart | Event::DocumentEnd | Event::Nothing => {}
            Event::StreamEnd => break,
            Event::DocumentStart => {
                if root.is_some() {
                    return Err(err(pos, "only one YAML document is allowed"));
                }
                let (ev, pos) = reader.next()?;
                if ev == Event::DocumentEnd {
                    root = Some(None);
                    continue;
                }
                root = Some(Some(reader.node(ev, pos)?));
            }
            other => return Err(err(pos, format!("unexpected YAML event {other:?}"))),
        }
    }
    Ok(root.flatten())
}

// ---------------------------------------------------------------------------
// Schema

fn is_null(value: &str, plain: bool) -> bool {
    plain && matches!(value, "" | "~" | "null" | "Null" | "NULL")
}

fn string(node: &Node, what: &str) -> Result<String> {
    match node {
        Node::Scalar { value, plain, .. } if is_null(value, *plain) => Ok(String::new()),
        Node::Scalar { value, .. } => Ok(value.clone()),
        other => Err(err(
            other.pos(),
            format!("`{what}` must be a string, found {}", other.kind()),
        )),
    }
}

fn opt_string(node: &Node, what: &str) -> Result<Option<String>> {
    match node {
        Node::Scalar { value, plain, .. } if is_null(value, *plain) => Ok(None),
        _ => string(node, what).map(Some),
    }
}

fn boolean(node: &Node, what: &str) -> Result<bool> {
    match node {
        Node::Scalar { value, plain: true, .. } if value == "true" => Ok(true),
        Node::Scalar { value, plain: true, .. } if value == "false" => Ok(false),
        other => Err(err(other.pos(), format!("`{what}` must be true or false"))),
    }
}

fn integer(node: &Node, what: &str) -> Result<Option<u32>> {
    match node {
        Node::Scalar { value, plain, .. } if is_null(value, *plain) => Ok(None),
        Node::Scalar {
            value, plain: true, pos,
        } => value
            .parse::<u32>()
            .map(Some)
            .map_err(|_| err(*pos, format!("`{what}` must be a non-negative integer"))),
        other => Err(err(
            other.pos(),
            format!("`{what}` must be a non-negative integer"),
        )),
    }
}

fn seq<'n>(node: &'n Node, what: &str) -> Result<&'n [Node]> {
    match node {
        Node::Seq { items, .. } => Ok(items),
        Node::Scalar { value, plain, .. } if is_null(value, *plain) => Ok(&[]),
        other => Err(err(
            other.pos(),
            format!("`{what}` must be a sequence, found {}", other.kind()),
        )),
    }
}

fn strings(node: &Node, what: &str) -> Result<Vec<String>> {
    seq(node, what)?.iter().map(|n| string(n, what)).collect()
}

fn map<'n>(node: &'n Node, what: &str, allowed: &[&str]) -> Result<&'n [(String, Pos, Node)]> {
    let Node::Map { entries, .. } = node else {
        return Err(err(
            node.pos(),
            format!("`{what}` must be a mapping, found {}", node.kind()),
        ));
    };
    for (key, pos, _) in entries {
        if !allowed.contains(&key.as_str()) {
            return Err(err(
                *pos,
                format!(
                    "unknown key `{key}` in `{what}` (expected one of: {})",
                    allowed.join(", ")
                ),
            ));
        }
    }
    Ok(entries)
}

fn input_item(node: &Node) -> Result<InputItem> {
    let entries = map(node, "inputs.items[]", &["name", "required", "path", "privacy"])?;
    let mut item = InputItem {
        name: String::new(),
        required: true,
        path: None,
        privacy: None,
    };
    let mut named = false;
    for (key, _, value) in entries {
        match key.as_str() {
            "name" => {
                item.name = string(value, "name")?;
                named = true;
            }
            "required" => item.required = boolean(value, "required")?,
            "path" => item.path = opt_string(value, "path")?,
            "privacy" => {
                item.privacy = match opt_string(value, "privacy")? {
                    None => None,
                    Some(s) => Some(s.parse::<PrivacyClass>().map_err(|e| err(value.pos(), e))?),
                }
            }
            _ => unreachable!(),
        }
    }
    if !named || item.name.trim().is_empty() {
        return Err(err(node.pos(), "input item needs a non-empty `name`"));
    }
    Ok(item)
}

fn handoff_route(node: &Node) -> Result<HandoffRoute> {
    let entries = map(node, "handoff.routes[]", &["to", "when"])?;
    let mut route = HandoffRoute {
        target: String::new(),
        trigger: String::new(),
    };
    for (key, _, value) in entries {
        match key.as_str() {
            "to" => route.target = string(value, "to")?,
            "when" => route.trigger = string(value, "when")?,
            _ => unreachable!(),
        }
    }
    if route.target.trim().is_empty() {
        return Err(err(node.pos(), "handoff route needs a non-empty `to`"));
    }
    Ok(route)
}

/// Keys a field mapping may carry besides `text`.
fn structured_keys(kind: FieldKind) -> &'static [&'static str] {
    match kind {
        FieldKind::Inputs => &["text", "items"],
        FieldKind::Permissions => &["text", "allowed", "forbidden"],
        FieldKind::Output => &["text", "required_sections", "max_words", "language"],
        FieldKind::HumanGates => &["text", "gates"],
        FieldKind::Handoff => &["text", "routes"],
        _ => &["text"],
    }
}

/// Fill structured entries from a bare sequence.
fn field_from_seq(kind: FieldKind, items: &[Node]) -> Result<Structured> {
    Ok(match kind {
        FieldKind::Inputs => Structured::Inputs {
            items: items.iter().map(input_item).collect::<Result<_>>()?,
        },
        FieldKind::HumanGates => Structured::HumanGates {
            gates: items.iter().map(|n| string(n, "human_gates")).collect::<Result<_>>()?,
        },
        FieldKind::Handoff => Structured::Handoff {
            routes: items.iter().map(handoff_route).collect::<Result<_>>()?,
        },
        FieldKind::Output => Structured::Output {
            required_sections: items.iter().map(|n| string(n, "output")).collect::<Result<_>>()?,
            max_words: None,
            language: None,
        },
        _ => unreachable!(),
    })
}

fn field(kind: FieldKind, node: &Node) -> Result<FieldContent> {
    let key = kind.key();
    match node {
        Node::Scalar { .. } => Ok(FieldContent::new(kind, string(node, key)?)),
        Node::Seq { items, pos } => match kind {
            FieldKind::Inputs | FieldKind::HumanGates | FieldKind::Handoff | FieldKind::Output => {
                Ok(FieldContent {
                    text: String::new(),
                    structured: field_from_seq(kind, items)?,
                })
            }
            _ => Err(err(
                *pos,
                format!("`{key}` must be a string or a mapping, found a sequence"),
            )),
        },
        Node::Map { .. } => {
            let entries = map(node, key, structured_keys(kind))?;
            let mut content = FieldContent::new(kind, "");
            for (k, _, value) in entries {
                let path = format!("{key}.{k}");
                match (&mut content.structured, k.as_str()) {
                    (_, "text") => content.text = string(value, &path)?,
                    (Structured::Inputs { items }, "items") => {
                        *items = seq(value, &path)?
                            .iter()
                            .map(input_item)
                            .collect::<Result<_>>()?
                    }
                    (Structured::Permissions { allowed, .. }, "allowed") => {
                        *allowed = strings(value, &path)?
                    }
                    (Structured::Permissions { forbidden, .. }, "forbidden") => {
                        *forbidden = strings(value, &path)?
                    }
                    (Structured::HumanGates { gates }, "gates") => *gates = strings(value, &path)?,
                    (Structured::Handoff { routes }, "routes") => {
                        *routes = seq(value, &path)?
                            .iter()
                            .map(handoff_route)
                            .collect::<Result<_>>()?
                    }
                    (
                        Structured::Output {
                            required_sections, ..
                        },
                        "required_sections",
                    ) => *required_sections = strings(value, &path)?,
                    (Structured::Output { max_words, .. }, "max_words") => {
                        *max_words = integer(value, &path)?
                    }
                    (Structured::Output { language, .. }, "language") => {
                        *language = opt_string(value, &path)?
                    }
                    _ => unreachable!("key set checked above"),
                }
            }
            Ok(content)
        }
    }
}

const TOP_LEVEL: [&str; 6] = [
    "name",
    "description",
    "template",
    "metadata",
    "preamble",
    "extras",
];

/// Parse a contract source document.
pub fn parse_contract_source(text: &str) -> Result<TaskContract> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let Some(root) = read_document(text)? else {
        return Err(err(Pos { line: 1, column: 1 }, "empty contract source"));
    };
    let mut allowed: Vec<&str> = TOP_LEVEL.to_vec();
    allowed.extend(FieldKind::ALL.iter().map(|k| k.key()));
    let entries = map(&root, "contract", &allowed)?;

    let mut contract = TaskContract::default();
    let mut extra_meta = Vec::new();
    for (key, _, value) in entries {
        match key.as_str() {
            "name" | "description" => {
                contract.metadata.insert(key.as_str(), string(value, key)?);
            }
            "template" => {
                let t = string(value, key)?;
                t.parse::<TemplateVariant>()
                    .map_err(|e| err(value.pos(), e))?;
                contract.metadata.insert("template", t);
            }
            "metadata" => {
                let Node::Map { entries, .. } = value else {
                    return Err(err(
                        value.pos(),
                        format!("`metadata` must be a mapping, found {}", value.kind()),
                    ));
                };
                for (k, pos, v) in entries {
                    if TOP_LEVEL[..3].contains(&k.as_str()) {
                        return Err(err(
                            *pos,
                            format!("`{k}` belongs at the top level, not under `metadata`"),
                        ));
                    }
                    extra_meta.push((k.clone(), string(v, k)?));
                }
            }
            "preamble" => contract.preamble = string(value, key)?,
            "extras" => {
                for item in seq(value, key)? {
                    let mut extra = ExtraSection {
                        title: String::new(),
                        body: String::new(),
                    };
                    for (k, _, v) in map(item, "extras[]", &["title", "body"])? {
                        match k.as_str() {
                            "title" => extra.title = string(v, "title")?,
                            _ => extra.body = string(v, "body")?,
                        }
                    }
                    if extra.title.trim().is_empty() {
                        return Err(err(item.pos(), "extra section needs a non-empty `title`"));
                    }
                    contract.extras.push(extra);
                }
            }
            other => {
                let kind = FieldKind::from_key(other).expect("key set checked above");
                contract.fields.insert(kind, field(kind, value)?);
            }
        }
    }
    for (k, v) in extra_meta {
        contract.metadata.insert(k, v);
    }
    Ok(contract)
}

// ---------------------------------------------------------------------------
// Emitter

fn needs_quotes(s: &str) -> bool {
    let Some(first) = s.chars().next() else {
        return true;
    };
    if s.trim() != s
        || "-?:,[]{}#&*!|>'\"%@`".contains(first)
        || s.contains(": ")
        || s.contains(" #")
        || s.ends_with(':')
        || s.chars().any(|c| c.is_control() || c == '\u{feff}' || c == '\u{2028}' || c == '\u{2029}')
    {
        return true;
    }
    let lower = s.to_ascii_lowercase();
    matches!(
        lower.as_str(),
        "~" | "null" | "true" | "false" | "yes" | "no" | "on" | "off" | ".inf" | "-.inf" | ".nan"
    ) || s.parse::<f64>().is_ok()
        || s.starts_with("0x")
        || s.starts_with("0o")
}

fn quoted(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c if c.is_control() || matches!(c, '\u{feff}' | '\u{2028}' | '\u{2029}') => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Multi-line text that survives a `|-` literal block unchanged.
fn literal_safe(s: &str) -> bool {
    s.contains('\n')
        && !s.ends_with('\n')
        && !s.starts_with([' ', '\t', '\n'])
        && s
            .split('\n')
            .all(|l| l.is_empty() || !l.trim().is_empty())
        && !s
            .chars()
            .any(|c| c == '\r' || (c.is_control() && c != '\n' && c != '\t'))
        && !s.chars().any(|c| matches!(c, '\u{feff}' | '\u{2028}' | '\u{2029}'))
}

/// Scalar in value position; `indent` is the indentation of the owning key.
fn scalar(s: &str, indent: usize) -> String {
    if literal_safe(s) {
        let pad = " ".repeat(indent + 2);
        let mut out = String::from("|-");
        for line in s.split('\n') {
            out.push('\n');
            if !line.is_empty() {
                out.push_str(&pad);
                out.push_str(line);
            }
        }
        out
    } else if needs_quotes(s) {
        quoted(s)
    } else {
        s.to_owned()
    }
}

fn key_value(out: &mut String, indent: usize, key: &str, value: &str) {
    let _ = writeln!(
        out,
        "{}{}: {}",
        " ".repeat(indent),
        scalar(key, indent),
        scalar(value, indent)
    );
}

fn string_list(out: &mut String, indent: usize, key: &str, items: &[String]) {
    let pad = " ".repeat(indent);
    if items.is_empty() {
        let _ = writeln!(out, "{pad}{key}: []");
        return;
    }
    let _ = writeln!(out, "{pad}{key}:");
    for item in items {
        let _ = writeln!(out, "{pad}  - {}", scalar(item, indent + 2));
    }
}

fn emit_field(out: &mut String, kind: FieldKind, content: &FieldContent) {
    let key = kind.key();
    if content.structured.is_empty() {
        key_value(out, 0, key, &content.text);
        return;
    }
    let _ = writeln!(out, "{key}:");
    if !content.text.is_empty() {
        key_value(out, 2, "text", &content.text);
    }
    match &content.structured {
        Structured::None => {}
        Structured::Inputs { items } => {
            out.push_str("  items:\n");
            for item in items {
                let _ = writeln!(out, "    - name: {}", scalar(&item.name, 4));
                let _ = writeln!(out, "      required: {}", item.required);
                if let Some(path) = &item.path {
                    key_value(out, 6, "path", path);
                }
                if let Some(privacy) = item.privacy {
                    key_value(out, 6, "privacy", privacy.as_str());
                }
            }
        }
        Structured::Permissions { allowed, forbidden } => {
            string_list(out, 2, "allowed", allowed);
            string_list(out, 2, "forbidden", forbidden);
        }
        Structured::Output {
            required_sections,
            max_words,
            language,
        } => {
            string_list(out, 2, "required_sections", required_sections);
            if let Some(n) = max_words {
                let _ = writeln!(out, "  max_words: {n}");
            }
            if let Some(lang) = language {
                key_value(out, 2, "language", lang);
            }
        }
        Structured::HumanGates { gates } => string_list(out, 2, "gates", gates),
        Structured::Handoff { routes } => {
            out.push_str("  routes:\n");
            for route in routes {
                let _ = writeln!(out, "    - to: {}", scalar(&route.target, 4));
                key_value(out, 6, "when", &route.trigger);
            }
        }
    }
}

/// Emit the canonical source text for a contract.
pub fn emit_contract_source(contract: &TaskContract) -> String {
    let mut out = String::new();
    for key in ["name", "description", "template"] {
        if let Some(value) = contract.metadata.get(key) {
            key_value(&mut out, 0, key, value);
        }
    }
    let reserved: BTreeSet<&str> = TOP_LEVEL[..3].iter().copied().collect();
    let rest: Vec<_> = contract
        .metadata
        .iter()
        .filter(|(k, _)| !reserved.contains(*k))
        .collect();
    if !rest.is_empty() {
        out.push_str("metadata:\n");
        for (k, v) in rest {
            key_value(&mut out, 2, k, v);
        }
    }
    if !contract.preamble.is_empty() {
        key_value(&mut out, 0, "preamble", &contract.preamble);
    }
    for (kind, content) in &contract.fields {
        emit_field(&mut out, *kind, content);
    }
    if !contract.extras.is_empty() {
        out.push_str("extras:\n");
        for extra in &contract.extras {
            let _ = writeln!(out, "  - title: {}", scalar(&extra.title, 2));
            key_value(&mut out, 4, "body", &extra.body);
        }
    }
    out
}
