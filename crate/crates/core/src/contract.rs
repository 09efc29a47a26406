//! The task-contract field model, template requirement profiles and the
//! contract validator.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::skill_doc::{Frontmatter, SourceSpan};

/// One of the fourteen contract fields, in their canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    WhenToUse,
    Goal,
    Audience,
    Inputs,
    Context,
    Workflow,
    Permissions,
    HumanGates,
    Constraints,
    Evidence,
    Output,
    QualityBar,
    Verification,
    Handoff,
}

impl FieldKind {
    pub const ALL: [FieldKind; 14] = [
        FieldKind::WhenToUse,
        FieldKind::Goal,
        FieldKind::Audience,
        FieldKind::Inputs,
        FieldKind::Context,
        FieldKind::Workflow,
        FieldKind::Permissions,
        FieldKind::HumanGates,
        FieldKind::Constraints,
        FieldKind::Evidence,
        FieldKind::Output,
        FieldKind::QualityBar,
        FieldKind::Verification,
        FieldKind::Handoff,
    ];

    /// Heading text used when the field is emitted.
    pub fn display_name(self) -> &'static str {
        match self {
            FieldKind::WhenToUse => "When To Use",
            FieldKind::Goal => "Goal",
            FieldKind::Audience => "Audience",
            FieldKind::Inputs => "Inputs",
            FieldKind::Context => "Context",
            FieldKind::Workflow => "Workflow",
            FieldKind::Permissions => "Permissions",
            FieldKind::HumanGates => "Human Gates",
            FieldKind::Constraints => "Constraints",
            FieldKind::Evidence => "Evidence",
            FieldKind::Output => "Output",
            FieldKind::QualityBar => "Quality Bar",
            FieldKind::Verification => "Verification",
            FieldKind::Handoff => "Handoff",
        }
    }

    /// snake_case key used in contract sources and rule ids.
    pub fn key(self) -> &'static str {
        match self {
            FieldKind::WhenToUse => "when_to_use",
            FieldKind::Goal => "goal",
            FieldKind::Audience => "audience",
            FieldKind::Inputs => "inputs",
            FieldKind::Context => "context",
            FieldKind::Workflow => "workflow",
            FieldKind::Permissions => "permissions",
            FieldKind::HumanGates => "human_gates",
            FieldKind::Constraints => "constraints",
            FieldKind::Evidence => "evidence",
            FieldKind::Output => "output",
            FieldKind::QualityBar => "quality_bar",
            FieldKind::Verification => "verification",
            FieldKind::Handoff => "handoff",
        }
    }

    pub fn from_key(key: &str) -> Option<FieldKind> {
        FieldKind::ALL.into_iter().find(|k| k.key() == key)
    }
}

impl fmt::Display for FieldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.display_name())
    }
}

/// Trim, collapse internal whitespace runs to one space, and lowercase.
pub fn normalize_heading(raw: &str) -> String {
    raw.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

/// Maps normalized heading strings to fields. Canonical display names always
/// resolve; the table only holds the extra aliases.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AliasTable {
    aliases: BTreeMap<String, FieldKind>,
}

impl AliasTable {
    pub fn empty() -> Self {
        AliasTable {
            aliases: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, alias: &str, kind: FieldKind) {
        self.aliases.insert(normalize_heading(alias), kind);
    }

    pub fn get(&self, normalized: &str) -> Option<FieldKind> {
        self.aliases.get(normalized).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, FieldKind)> {
        self.aliases.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn len(&self) -> usize {
        self.aliases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.aliases.is_empty()
    }
}

impl Default for AliasTable {
    fn default() -> Self {
        let mut table = AliasTable::empty();
        for (alias, kind) in [
            ("Scope", FieldKind::WhenToUse),
            ("When to use this skill", FieldKind::WhenToUse),
            ("Objective", FieldKind::Goal),
            ("Target Audience", FieldKind::Audience),
            ("Required Inputs", FieldKind::Inputs),
            ("Background", FieldKind::Context),
            ("Steps", FieldKind::Workflow),
            ("Procedure", FieldKind::Workflow),
            ("Allowed Actions", FieldKind::Permissions),
            ("Approval Gates", FieldKind::HumanGates),
            ("Human Approval", FieldKind::HumanGates),
            ("Rules", FieldKind::Constraints),
            ("Evidence Policy", FieldKind::Evidence),
            ("Sources", FieldKind::Evidence),
            ("Output Format", FieldKind::Output),
            ("Deliverable", FieldKind::Output),
            ("Quality Criteria", FieldKind::QualityBar),
            ("Self-Check", FieldKind::Verification),
            ("Escalation", FieldKind::Handoff),
        ] {
            table.insert(alias, kind);
        }
        table
    }
}

/// Resolve a heading to a field: canonical names first, then aliases.
pub fn normalize_section_name(raw: &str, aliases: &AliasTable) -> Option<FieldKind> {
    let normalized = normalize_heading(raw);
    FieldKind::ALL
        .into_iter()
        .find(|k| normalize_heading(k.display_name()) == normalized)
        .or_else(|| aliases.get(&normalized))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrivacyClass {
    Public,
    Internal,
    Confidential,
    Restricted,
}

impl PrivacyClass {
    pub fn as_str(self) -> &'static str {
        match self {
            PrivacyClass::Public => "public",
            PrivacyClass::Internal => "internal",
            PrivacyClass::Confidential => "confidential",
            PrivacyClass::Restricted => "restricted",
        }
    }
}

impl FromStr for PrivacyClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "public" => Ok(PrivacyClass::Public),
            "internal" => Ok(PrivacyClass::Internal),
            "confidential" => Ok(PrivacyClass::Confidential),
            "restricted" => Ok(PrivacyClass::Restricted),
            other => Err(format!("unknown privacy class `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputItem {
    pub name: String,
    pub required: bool,
    pub path: Option<String>,
    pub privacy: Option<PrivacyClass>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HandoffRoute {
    pub target: String,
    pub trigger: String,
}

/// Structured sub-entries carried by a field. The variant always matches the
/// field kind; text-only fields carry [`Structured::None`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Structured {
    None,
    Inputs {
        items: Vec<InputItem>,
    },
    Permissions {
        allowed: Vec<String>,
        forbidden: Vec<String>,
    },
    Output {
        required_sections: Vec<String>,
        max_words: Option<u32>,
        language: Option<String>,
    },
    HumanGates {
        gates: Vec<String>,
    },
    Handoff {
        routes: Vec<HandoffRoute>,
    },
}

impl Structured {
    pub fn empty_for(kind: FieldKind) -> Structured {
        match kind {
            FieldKind::Inputs => Structured::Inputs { items: Vec::new() },
            FieldKind::Permissions => Structured::Permissions {
                allowed: Vec::new(),
                forbidden: Vec::new(),
            },
            FieldKind::Output => Structured::Output {
                required_sections: Vec::new(),
                max_words: None,
                language: None,
            },
            FieldKind::HumanGates => Structured::HumanGates { gates: Vec::new() },
            FieldKind::Handoff => Structured::Handoff { routes: Vec::new() },
            _ => Structured::None,
        }
    }

    pub fn is_empty(&self) -> bool {
        match self {
            Structured::None => true,
            Structured::Inputs { items } => items.is_empty(),
            Structured::Permissions { allowed, forbidden } => {
                allowed.is_empty() && forbidden.is_empty()
            }
            Structured::Output {
                required_sections,
                max_words,
                language,
            } => required_sections.is_empty() && max_words.is_none() && language.is_none(),
            Structured::HumanGates { gates } => gates.is_empty(),
            Structured::Handoff { routes } => routes.is_empty(),
        }
    }
}

/// Prose plus structured entries of one field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldContent {
    pub text: String,
    pub structured: Structured,
}

impl FieldContent {
    pub fn new(kind: FieldKind, text: impl Into<String>) -> Self {
        FieldContent {
            text: text.into(),
            structured: Structured::empty_for(kind),
        }
    }

    /// Whitespace-only text with no structured entries counts as absent.
    pub fn is_empty(&self) -> bool {
        self.text.trim().is_empty() && self.structured.is_empty()
    }
}

/// A section that did not map to any contract field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtraSection {
    pub title: String,
    pub body: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TaskContract {
    pub metadata: Frontmatter,
    /// Text before the first section, e.g. a title line and an intro.
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub preamble: String,
    pub fields: BTreeMap<FieldKind, FieldContent>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub extras: Vec<ExtraSection>,
}

impl TaskContract {
    pub fn name(&self) -> Option<&str> {
        self.metadata.get("name")
    }

    pub fn description(&self) -> Option<&str> {
        self.metadata.get("description")
    }

    pub fn field(&self, kind: FieldKind) -> Option<&FieldContent> {
        self.fields.get(&kind)
    }

    /// The field if present and non-empty.
    pub fn populated(&self, kind: FieldKind) -> Option<&FieldContent> {
        self.fields.get(&kind).filter(|c| !c.is_empty())
    }

    pub fn has(&self, kind: FieldKind) -> bool {
        self.populated(kind).is_some()
    }

    pub fn required_output_sections(&self) -> &[String] {
        match self.fields.get(&FieldKind::Output).map(|c| &c.structured) {
            Some(Structured::Output {
                required_sections, ..
            }) => required_sections,
            _ => &[],
        }
    }

    pub fn max_words(&self) -> Option<u32> {
        match self.fields.get(&FieldKind::Output).map(|c| &c.structured) {
            Some(Structured::Output { max_words, .. }) => *max_words,
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TemplateVariant {
    BusinessProcess,
    ToolOperation,
    ResearchAnalysis,
    Coding,
    ContentProduction,
    MultiAgent,
}

impl TemplateVariant {
    pub const ALL: [TemplateVariant; 6] = [
        TemplateVariant::BusinessProcess,
        TemplateVariant::ToolOperation,
        TemplateVariant::ResearchAnalysis,
        TemplateVariant::Coding,
        TemplateVariant::ContentProduction,
        TemplateVariant::MultiAgent,
    ];

    pub fn key(self) -> &'static str {
        match self {
            TemplateVariant::BusinessProcess => "business-process",
            TemplateVariant::ToolOperation => "tool-operation",
            TemplateVariant::ResearchAnalysis => "research-analysis",
            TemplateVariant::Coding => "coding",
            TemplateVariant::ContentProduction => "content-production",
            TemplateVariant::MultiAgent => "multi-agent",
        }
    }
}

impl fmt::Display for TemplateVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for TemplateVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let wanted = s.trim().to_ascii_lowercase().replace('_', "-");
        TemplateVariant::ALL
            .into_iter()
            .find(|v| v.key() == wanted)
            .ok_or_else(|| format!("unknown template `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RequirementProfile {
    pub required: BTreeSet<FieldKind>,
    pub recommended: BTreeSet<FieldKind>,
}

/// Field requirements for a template variant.
pub fn requirement_profile(variant: TemplateVariant) -> RequirementProfile {
    use FieldKind::*;
    let (required, recommended): (&[FieldKind], &[FieldKind]) = match variant {
        TemplateVariant::BusinessProcess => (&FieldKind::ALL, &[]),
        TemplateVariant::ToolOperation => (
            &[
                WhenToUse,
                Goal,
                Inputs,
                Workflow,
                Permissions,
                HumanGates,
                Constraints,
                Verification,
            ],
            &[Output, Handoff],
        ),
        TemplateVariant::ResearchAnalysis => (
            &[
                Goal,
                Audience,
                Inputs,
                Context,
                Evidence,
                Output,
                QualityBar,
                Verification,
            ],
            &[Handoff],
        ),
        TemplateVariant::Coding => (
            &[Goal, Context, Workflow, Permissions, Constraints, Verification],
            &[Inputs, QualityBar, Handoff],
        ),
        TemplateVariant::ContentProduction => (
            &[Goal, Audience, Output, QualityBar, Verification],
            &[Evidence, Constraints],
        ),
        TemplateVariant::MultiAgent => (
            &[Goal, Workflow, Permissions, HumanGates, Handoff, Verification],
            &[Inputs, QualityBar],
        ),
    };
    RequirementProfile {
        required: required.iter().copied().collect(),
        recommended: recommended.iter().copied().collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Info,
    Warning,
    Error,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Info => "info",
            Severity::Warning => "warning",
            Severity::Error => "error",
        })
    }
}

impl FromStr for Severity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "info" => Ok(Severity::Info),
            "warning" | "warn" => Ok(Severity::Warning),
            "error" => Ok(Severity::Error),
            other => Err(format!("unknown severity `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub rule_id: String,
    pub severity: Severity,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<FieldKind>,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub location: Option<SourceSpan>,
}

impl Finding {
    pub fn new(rule_id: impl Into<String>, severity: Severity, message: impl Into<String>) -> Self {
        Finding {
            rule_id: rule_id.into(),
            severity,
            field: None,
            message: message.into(),
            location: None,
        }
    }

    pub fn with_field(mut self, field: FieldKind) -> Self {
        self.field = Some(field);
        self
    }

    pub fn with_location(mut self, span: SourceSpan) -> Self {
        self.location = Some(span);
        self
    }
}

/// Stable order: findings without a field first, then by field order, then
/// by rule id. Ties keep their emission order.
pub fn sort_findings(findings: &mut [Finding]) {
    findings.sort_by(|a, b| (a.field, &a.rule_id).cmp(&(b.field, &b.rule_id)));
}

/// One entry of the documented rule registry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RuleInfo {
    pub rule_id: String,
    pub severity: Severity,
    pub summary: String,
}

/// Every rule id the linter, importer and output compiler can emit.
pub fn rule_registry() -> Vec<RuleInfo> {
    let mut rules = Vec::new();
    let mut push = |id: String, severity: Severity, summary: String| {
        rules.push(RuleInfo {
            rule_id: id,
            severity,
            summary,
        })
    };
    push(
        "frontmatter.name.missing".into(),
        Severity::Error,
        "frontmatter has no non-empty `name`".into(),
    );
    push(
        "frontmatter.description.missing".into(),
        Severity::Error,
        "frontmatter has no non-empty `description`".into(),
    );
    push(
        "frontmatter.description.too_long".into(),
        Severity::Warning,
        "description exceeds the trigger-length budget".into(),
    );
    push(
        "frontmatter.template.unknown".into(),
        Severity::Error,
        "`template` names no known template variant".into(),
    );
    for kind in FieldKind::ALL {
        push(
            format!("field.missing.{}", kind.key()),
            Severity::Error,
            format!("required field `{}` is absent or empty", kind.display_name()),
        );
        push(
            format!("field.recommended.{}", kind.key()),
            Severity::Warning,
            format!(
                "recommended field `{}` is absent or empty",
                kind.display_name()
            ),
        );
    }
    for (id, summary) in [
        ("inputs.items.empty", "Inputs lists no input items"),
        ("permissions.allowed.empty", "Permissions lists no allowed actions"),
        (
            "permissions.forbidden.empty",
            "Permissions lists no forbidden actions",
        ),
        ("human_gates.gates.empty", "Human Gates lists no gate conditions"),
        ("handoff.routes.empty", "Handoff lists no routes"),
        ("output.sections.empty", "Output lists no required sections"),
        ("section.unrecognized", "section maps to no contract field"),
        ("section.level", "contract field section is not a level-2 heading"),
    ] {
        push(id.into(), Severity::Info, summary.into());
    }
    push(
        "output.sections.duplicate".into(),
        Severity::Error,
        "Output repeats a required section title".into(),
    );
    push(
        "check.output.empty".into(),
        Severity::Warning,
        "Output is present but gives the checker no required sections".into(),
    );
    push(
        "section.ambiguous".into(),
        Severity::Warning,
        "two sections map to the same contract field; the first one wins".into(),
    );
    push(
        "entry.malformed".into(),
        Severity::Warning,
        "structured bullet could not be parsed".into(),
    );
    rules
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationConfig {
    /// Maximum description length in characters.
    pub description_budget: usize,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        ValidationConfig {
            description_budget: 500,
        }
    }
}

/// Template declared by the contract's `template` frontmatter key, or the
/// override, or [`TemplateVariant::BusinessProcess`]. An unknown declared
/// value yields an error finding and the default.
pub fn resolve_template(
    contract: &TaskContract,
    override_variant: Option<TemplateVariant>,
) -> (TemplateVariant, Option<Finding>) {
    if let Some(v) = override_variant {
        return (v, None);
    }
    match contract.metadata.get("template") {
        None => (TemplateVariant::BusinessProcess, None),
        Some(raw) => match raw.parse() {
            Ok(v) => (v, None),
            Err(msg) => (
                TemplateVariant::BusinessProcess,
                Some(Finding::new(
                    "frontmatter.template.unknown",
                    Severity::Error,
                    format!("{msg}; falling back to business-process"),
                )),
            ),
        },
    }
}

/// Check a contract against the requirement profile of `variant`.
pub fn validate_contract(
    contract: &TaskContract,
    variant: TemplateVariant,
    config: &ValidationConfig,
) -> Vec<Finding> {
    let mut findings = Vec::new();

    match contract.name() {
        Some(n) if !n.trim().is_empty() => {}
        _ => findings.push(Finding::new(
            "frontmatter.name.missing",
            Severity::Error,
            "frontmatter must provide a non-empty `name`",
        )),
    }
    match contract.description() {
        Some(d) if !d.trim().is_empty() => {
            let len = d.chars().count();
            if len > config.description_budget {
                findings.push(Finding::new(
                    "frontmatter.description.too_long",
                    Severity::Warning,
                    format!(
                        "description is {len} characters; keep it under {} so discovery stays small",
                        config.description_budget
                    ),
                ));
            }
        }
        _ => findings.push(Finding::new(
            "frontmatter.description.missing",
            Severity::Error,
            "frontmatter must provide a non-empty `description`",
        )),
    }

    let profile = requirement_profile(variant);
    for kind in FieldKind::ALL {
        let populated = contract.populated(kind);
        if populated.is_none() {
            if profile.required.contains(&kind) {
                findings.push(
                    Finding::new(
                        format!("field.missing.{}", kind.key()),
                        Severity::Error,
                        format!(
                            "`{}` is required for {variant} skills but is absent or empty",
                            kind.display_name()
                        ),
                    )
                    .with_field(kind),
                );
            } else if profile.recommended.contains(&kind) {
                findings.push(
                    Finding::new(
                        format!("field.recommended.{}", kind.key()),
                        Severity::Warning,
                        format!(
                            "`{}` is recommended for {variant} skills",
                            kind.display_name()
                        ),
                    )
                    .with_field(kind),
                );
            }
            continue;
        }
        let content = populated.expect("checked above");
        structured_findings(kind, &content.structured, &mut findings);
    }

    sort_findings(&mut findings);
    findings
}

fn structured_findings(kind: FieldKind, structured: &Structured, out: &mut Vec<Finding>) {
    let info = |id: &str, msg: &str| Finding::new(id, Severity::Info, msg).with_field(kind);
    match structured {
        Structured::None => {}
        Structured::Inputs { items } => {
            if items.is_empty() {
                out.push(info(
                    "inputs.items.empty",
                    "Inputs has no `required:`/`optional:` items",
                ));
            }
        }
        Structured::Permissions { allowed, forbidden } => {
            if allowed.is_empty() {
                out.push(info(
                    "permissions.allowed.empty",
                    "Permissions has no `allow:` items",
                ));
            }
            if forbidden.is_empty() {
                out.push(info(
                    "permissions.forbidden.empty",
                    "Permissions has no `forbid:` items",
                ));
            }
        }
        Structured::Output {
            required_sections, ..
        } => {
            if required_sections.is_empty() {
                out.push(info(
                    "output.sections.empty",
                    "Output has no `section:` items",
                ));
            }
            let mut seen = BTreeSet::new();
            for title in required_sections {
                if !seen.insert(normalize_heading(title)) {
                    out.push(
                        Finding::new(
                            "output.sections.duplicate",
                            Severity::Error,
                            format!("required section `{title}` is listed more than once"),
                        )
                        .with_field(kind),
                    );
                }
            }
        }
        Structured::HumanGates { gates } => {
            if gates.is_empty() {
                out.push(info(
                    "human_gates.gates.empty",
                    "Human Gates has no `gate:` items",
                ));
            }
        }
        Structured::Handoff { routes } => {
            if routes.is_empty() {
                out.push(info("handoff.routes.empty", "Handoff has no `to:` items"));
            }
        }
    }
}
