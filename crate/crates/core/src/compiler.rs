//! Translation between [`TaskContract`] and [`SkillDocument`], and the four
//! instruction conditions derived from a contract.
//!
//! Structured sub-entries are written as `- key: value` bullets at the end of
//! their section, after the prose:
//!
//! | field        | bullets                                                    |
//! |--------------|------------------------------------------------------------|
//! | Inputs       | `- required: name \| path: p \| privacy: class`, `- optional: ...` |
//! | Permissions  | `- allow: action`, `- forbid: action`                      |
//! | Output       | `- section: Title`, `- max_words: 400`, `- language: English` |
//! | Human Gates  | `- gate: condition`                                        |
//! | Handoff      | `- to: role \| when: trigger`                              |
//!
//! Import recognizes exactly these shapes; any other line stays prose.

use serde::{Deserialize, Serialize};

use crate::contract::{
    normalize_section_name, resolve_template, sort_findings, validate_contract, AliasTable,
    ExtraSection, FieldContent, FieldKind, Finding, HandoffRoute, InputItem, Severity, Structured,
    TaskContract, TemplateVariant, ValidationConfig,
};
use crate::skill_doc::{
    parse_skill_markdown, render_skill_markdown, trim_blank_lines, FenceTracker, SectionBlock,
    SkillDocument,
};

/// Instruction condition used when comparing skill presentations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    NoSkill,
    Minimal,
    PlainExpanded,
    Contractual,
}

impl Condition {
    pub const ALL: [Condition; 4] = [
        Condition::NoSkill,
        Condition::Minimal,
        Condition::PlainExpanded,
        Condition::Contractual,
    ];

    pub fn key(self) -> &'static str {
        match self {
            Condition::NoSkill => "no_skill",
            Condition::Minimal => "minimal",
            Condition::PlainExpanded => "plain_expanded",
            Condition::Contractual => "contractual",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Condition::NoSkill => "No skill",
            Condition::Minimal => "Minimal",
            Condition::PlainExpanded => "Plain",
            Condition::Contractual => "Contractual",
        }
    }
}

impl std::fmt::Display for Condition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.key())
    }
}

impl std::str::FromStr for Condition {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase().replace(['-', ' '], "_");
        match key.as_str() {
            "no_skill" | "none" | "noskill" => Ok(Condition::NoSkill),
            "minimal" => Ok(Condition::Minimal),
            "plain_expanded" | "plain" => Ok(Condition::PlainExpanded),
            "contractual" => Ok(Condition::Contractual),
            _ => Err(format!("unknown condition `{s}`")),
        }
    }
}

/// Heading for the "required behavior" bullets of the minimal condition.
/// Deliberately not a contract field name.
pub const REQUIRED_BEHAVIOR_HEADING: &str = "Required Behavior";

fn bullet_keys(kind: FieldKind) -> &'static [&'static str] {
    match kind {
        FieldKind::Inputs => &["required", "optional"],
        FieldKind::Permissions => &["allow", "forbid"],
        FieldKind::Output => &["section", "max_words", "language"],
        FieldKind::HumanGates => &["gate"],
        FieldKind::Handoff => &["to"],
        _ => &[],
    }
}

/// `- key: value` with a key from `keys`.
fn structured_bullet<'a>(line: &'a str, keys: &[&str]) -> Option<(&'a str, &'a str)> {
    let rest = line.strip_prefix("- ")?;
    let (key, value) = rest.split_once(':')?;
    keys.contains(&key).then(|| (key, value.trim()))
}

/// Split `a | k: v | k2: v2` into the head and named parts.
fn split_parts(value: &str) -> (&str, Vec<(&str, &str)>) {
    let mut parts = value.split(" | ");
    let head = parts.next().unwrap_or("").trim();
    let named = parts
        .filter_map(|p| p.split_once(':'))
        .map(|(k, v)| (k.trim(), v.trim()))
        .collect();
    (head, named)
}

fn apply_bullet(structured: &mut Structured, key: &str, value: &str) -> Result<(), String> {
    if value.is_empty() {
        return Err(format!("`{key}:` has no value"));
    }
    match structured {
        Structured::Inputs { items } => {
            let (name, parts) = split_parts(value);
            if name.is_empty() {
                return Err("input item has no name".into());
            }
            let mut item = InputItem {
                name: name.to_owned(),
                required: key == "required",
                path: None,
                privacy: None,
            };
            for (k, v) in parts {
                match k {
                    "path" => item.path = Some(v.to_owned()),
                    "privacy" => item.privacy = Some(v.parse()?),
                    other => return Err(format!("unknown input attribute `{other}`")),
                }
            }
            items.push(item);
        }
        Structured::Permissions { allowed, forbidden } => match key {
            "allow" => allowed.push(value.to_owned()),
            _ => forbidden.push(value.to_owned()),
        },
        Structured::Output {
            required_sections,
            max_words,
            language,
        } => match key {
            "section" => required_sections.push(value.to_owned()),
            "max_words" => {
                *max_words = Some(
                    value
                        .parse()
                        .map_err(|_| format!("max_words `{value}` is not a whole number"))?,
                )
            }
            _ => *language = Some(value.to_owned()),
        },
        Structured::HumanGates { gates } => gates.push(value.to_owned()),
        Structured::Handoff { routes } => {
            let (target, parts) = split_parts(value);
            let mut route = HandoffRoute {
                target: target.to_owned(),
                trigger: String::new(),
            };
            for (k, v) in parts {
                match k {
                    "when" => route.trigger = v.to_owned(),
                    other => return Err(format!("unknown handoff attribute `{other}`")),
                }
            }
            routes.push(route);
        }
        Structured::None => unreachable!("text-only fields have no bullet keys"),
    }
    Ok(())
}

fn structured_lines(structured: &Structured) -> Vec<String> {
    match structured {
        Structured::None => Vec::new(),
        Structured::Inputs { items } => items
            .iter()
            .map(|item| {
                let mut line = format!(
                    "- {}: {}",
                    if item.required { "required" } else { "optional" },
                    item.name
                );
                if let Some(path) = &item.path {
                    line.push_str(&format!(" | path: {path}"));
                }
                if let Some(privacy) = item.privacy {
                    line.push_str(&format!(" | privacy: {}", privacy.as_str()));
                }
                line
            })
            .collect(),
        Structured::Permissions { allowed, forbidden } => allowed
            .iter()
            .map(|a| format!("- allow: {a}"))
            .chain(forbidden.iter().map(|f| format!("- forbid: {f}")))
            .collect(),
        Structured::Output {
            required_sections,
            max_words,
            language,
        } => required_sections
            .iter()
            .map(|s| format!("- section: {s}"))
            .chain(max_words.map(|n| format!("- max_words: {n}")))
            .chain(language.iter().map(|l| format!("- language: {l}")))
            .collect(),
        Structured::HumanGates { gates } => gates.iter().map(|g| format!("- gate: {g}")).collect(),
        Structured::Handoff { routes } => routes
            .iter()
            .map(|r| {
                if r.trigger.is_empty() {
                    format!("- to: {}", r.target)
                } else {
                    format!("- to: {} | when: {}", r.target, r.trigger)
                }
            })
            .collect(),
    }
}

/// Section body content (no surrounding blank lines) for one field.
pub fn field_body(content: &FieldContent) -> String {
    let text = trim_blank_lines(&content.text);
    let bullets = structured_lines(&content.structured).join("\n");
    match (text.is_empty(), bullets.is_empty()) {
        (_, true) => text.to_owned(),
        (true, false) => bullets,
        (false, false) => format!("{text}\n\n{bullets}"),
    }
}

fn extract_field(kind: FieldKind, section: &SectionBlock, findings: &mut Vec<Finding>) -> FieldContent {
    let keys = bullet_keys(kind);
    let mut content = FieldContent::new(kind, "");
    if keys.is_empty() {
        content.text = section.content().to_owned();
        return content;
    }
    let mut fences = FenceTracker::default();
    let mut prose = String::new();
    for (offset, line) in section.body.split_inclusive('\n').enumerate() {
        let in_fence = fences.observe(line);
        let bare = line.trim_end_matches('\n');
        let bullet = if in_fence {
            None
        } else {
            structured_bullet(bare, keys)
        };
        match bullet.map(|(k, v)| apply_bullet(&mut content.structured, k, v)) {
            Some(Ok(())) => {}
            Some(Err(reason)) => {
                let line_no = section.source_span.start_line + 1 + offset;
                findings.push(
                    Finding::new(
                        "entry.malformed",
                        Severity::Warning,
                        format!("line {line_no}: {reason}; kept as prose"),
                    )
                    .with_field(kind),
                );
                prose.push_str(line);
            }
            None => prose.push_str(line),
        }
    }
    content.text = trim_blank_lines(&prose).to_owned();
    content
}

/// Build a contract from a parsed skill. Never fails; degraded extraction is
/// reported as findings.
pub fn import_skill(doc: &SkillDocument, aliases: &AliasTable) -> (TaskContract, Vec<Finding>) {
    let mut contract = TaskContract {
        metadata: doc.frontmatter.clone(),
        preamble: trim_blank_lines(&doc.preamble).to_owned(),
        ..TaskContract::default()
    };
    let mut findings = Vec::new();

    for section in &doc.sections {
        let Some(kind) = normalize_section_name(&section.heading_raw, aliases) else {
            findings.push(
                Finding::new(
                    "section.unrecognized",
                    Severity::Info,
                    format!(
                        "section \"{}\" is not a contract field; kept as an extra section",
                        section.heading_raw
                    ),
                )
                .with_location(section.source_span),
            );
            contract.extras.push(ExtraSection {
                title: section.heading_raw.clone(),
                body: section.content().to_owned(),
            });
            continue;
        };
        if contract.fields.contains_key(&kind) {
            findings.push(
                Finding::new(
                    "section.ambiguous",
                    Severity::Warning,
                    format!(
                        "section \"{}\" also maps to `{}`; the earlier section is used and this one is kept as an extra section",
                        section.heading_raw,
                        kind.display_name()
                    ),
                )
                .with_field(kind)
                .with_location(section.source_span),
            );
            contract.extras.push(ExtraSection {
                title: section.heading_raw.clone(),
                body: section.content().to_owned(),
            });
            continue;
        }
        if section.heading_level != 2 {
            findings.push(
                Finding::new(
                    "section.level",
                    Severity::Info,
                    format!(
                        "`{}` is a level-{} heading; contract fields are usually level 2",
                        kind.display_name(),
                        section.heading_level
                    ),
                )
                .with_field(kind)
                .with_location(section.source_span),
            );
        }
        let content = extract_field(kind, section, &mut findings);
        contract.fields.insert(kind, content);
    }

    sort_findings(&mut findings);
    (contract, findings)
}

fn section_for(title: &str, content: String) -> SectionBlock {
    SectionBlock::new(title, 2, format!("\n{content}\n"))
}

fn finish_sections(mut sections: Vec<SectionBlock>) -> Vec<SectionBlock> {
    let n = sections.len();
    for s in sections.iter_mut().take(n.saturating_sub(1)) {
        s.body.push('\n');
    }
    sections
}

fn preamble_text(contract: &TaskContract) -> String {
    let preamble = trim_blank_lines(&contract.preamble);
    if preamble.is_empty() {
        String::new()
    } else {
        format!("{preamble}\n\n")
    }
}

/// Emit populated fields as level-2 sections in field order, followed by
/// any extra sections.
pub fn emit_skill(contract: &TaskContract) -> SkillDocument {
    let mut sections: Vec<SectionBlock> = FieldKind::ALL
        .into_iter()
        .filter_map(|kind| {
            contract
                .populated(kind)
                .map(|c| section_for(kind.display_name(), field_body(c)))
        })
        .collect();
    sections.extend(
        contract
            .extras
            .iter()
            .map(|e| section_for(&e.title, trim_blank_lines(&e.body).to_owned())),
    );
    SkillDocument {
        frontmatter: contract.metadata.clone(),
        preamble: preamble_text(contract),
        sections: finish_sections(sections),
    }
}

/// Skill presentation for one instruction condition.
///
/// The minimal and plain-expanded variants are mechanical approximations of
/// hand-written variants.
pub fn derive_condition(contract: &TaskContract, condition: Condition) -> Option<SkillDocument> {
    match condition {
        Condition::NoSkill => None,
        Condition::Contractual => Some(emit_skill(contract)),
        Condition::Minimal => {
            let mut sections: Vec<SectionBlock> = [FieldKind::Goal, FieldKind::Workflow]
                .into_iter()
                .filter_map(|kind| {
                    contract
                        .populated(kind)
                        .map(|c| section_for(kind.display_name(), field_body(c)))
                })
                .collect();
            let behavior: Vec<&str> = contract
                .populated(FieldKind::Constraints)
                .map(|c| {
                    c.text
                        .lines()
                        .filter(|l| l.starts_with("- ") || l.starts_with("* "))
                        .take(3)
                        .collect()
                })
                .unwrap_or_default();
            if !behavior.is_empty() {
                sections.push(section_for(REQUIRED_BEHAVIOR_HEADING, behavior.join("\n")));
            }
            Some(SkillDocument {
                frontmatter: contract.metadata.clone(),
                preamble: preamble_text(contract),
                sections: finish_sections(sections),
            })
        }
        Condition::PlainExpanded => {
            let mut blocks: Vec<String> = Vec::new();
            let preamble = trim_blank_lines(&contract.preamble);
            if !preamble.is_empty() {
                blocks.push(preamble.to_owned());
            }
            blocks.extend(
                FieldKind::ALL
                    .into_iter()
                    .filter_map(|kind| contract.populated(kind).map(field_body)),
            );
            blocks.extend(
                contract
                    .extras
                    .iter()
                    .map(|e| trim_blank_lines(&e.body).to_owned())
                    .filter(|b| !b.is_empty()),
            );
            let mut text = render_skill_markdown(&SkillDocument {
                frontmatter: contract.metadata.clone(),
                ..SkillDocument::default()
            });
            if !blocks.is_empty() {
                text.push_str(&blocks.join("\n\n"));
                text.push('\n');
            }
            // Re-parse so the result is in canonical form even when a field
            // body carries its own sub-headings.
            Some(parse_skill_markdown(&text).expect("rendered frontmatter is well formed"))
        }
    }
}

/// Parse, import and validate one `SKILL.md` text.
pub fn lint_skill_text(
    text: &str,
    aliases: &AliasTable,
    template: Option<TemplateVariant>,
    config: &ValidationConfig,
) -> crate::error::Result<(TaskContract, TemplateVariant, Vec<Finding>)> {
    let doc = parse_skill_markdown(text)?;
    let (contract, mut findings) = import_skill(&doc, aliases);
    let (variant, template_finding) = resolve_template(&contract, template);
    findings.extend(template_finding);
    findings.extend(validate_contract(&contract, variant, config));
    sort_findings(&mut findings);
    Ok((contract, variant, findings))
}
