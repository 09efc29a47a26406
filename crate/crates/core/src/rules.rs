//! Rule set files: pattern rules, marker lists, handoff phrases, completion
//! claim templates and heading aliases.

use std::collections::BTreeSet;
use std::path::Path;

use regex::{Regex, RegexBuilder};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::contract::{AliasTable, FieldKind};
use crate::error::{Error, Result};
use crate::pattern::{CompiledRule, PatternRule, RuleClass};

const DEFAULT_RULES: &str = include_str!("../rules/default.toml");

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RuleFile {
    #[serde(default)]
    #[allow(dead_code)]
    version: Option<u32>,
    #[serde(default = "yes")]
    inherit_defaults: bool,
    #[serde(default)]
    rules: Vec<PatternRule>,
    #[serde(default)]
    markers: MarkerLists,
    #[serde(default)]
    handoff: HandoffLists,
    #[serde(default)]
    claims: ClaimLists,
    #[serde(default)]
    aliases: std::collections::BTreeMap<String, String>,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct MarkerLists {
    uncertainty: Option<Vec<String>>,
    mitigation: Option<Vec<String>>,
    escalation: Option<Vec<String>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct HandoffLists {
    roles: Option<Vec<String>>,
    triggers: Option<Vec<String>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClaimLists {
    templates: Option<Vec<String>>,
}

/// Effective rule set after merging a user file over the defaults.
#[derive(Debug, Clone)]
pub struct RuleSet {
    rules: Vec<CompiledRule>,
    pub uncertainty_markers: Vec<String>,
    pub mitigation_markers: Vec<String>,
    pub escalation_markers: Vec<String>,
    pub handoff_roles: Vec<String>,
    pub handoff_triggers: Vec<String>,
    pub claim_templates: Vec<String>,
    pub aliases: AliasTable,
    hash: String,
}

/// Canonical, hashable view of a rule set.
#[derive(Serialize)]
struct Canonical<'a> {
    rules: Vec<&'a PatternRule>,
    uncertainty: &'a [String],
    mitigation: &'a [String],
    escalation: &'a [String],
    handoff_roles: &'a [String],
    handoff_triggers: &'a [String],
    claim_templates: &'a [String],
    aliases: Vec<(&'a str, FieldKind)>,
}

impl RuleSet {
    /// The shipped defaults.
    pub fn builtin() -> RuleSet {
        RuleSet::parse_file(DEFAULT_RULES, None).expect("built-in rule set is valid")
    }

    /// Parse a TOML rule file. Unless it sets `inherit_defaults = false`, it
    /// is layered over the defaults: rules with an existing id replace that
    /// rule, new ids are appended, and any list it gives replaces the default
    /// list.
    pub fn from_toml_str(text: &str) -> Result<RuleSet> {
        let file: RuleFile = toml::from_str(text).map_err(|e| Error::RuleSet(e.to_string()))?;
        let base = if file.inherit_defaults {
            Some(RuleSet::builtin())
        } else {
            None
        };
        RuleSet::build(file, base)
    }

    pub fn from_path(path: &Path) -> Result<RuleSet> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        RuleSet::from_toml_str(&text)
    }

    fn parse_file(text: &str, base: Option<RuleSet>) -> Result<RuleSet> {
        let file: RuleFile = toml::from_str(text).map_err(|e| Error::RuleSet(e.to_string()))?;
        RuleSet::build(file, base)
    }

    fn build(file: RuleFile, base: Option<RuleSet>) -> Result<RuleSet> {
        let mut rules: Vec<PatternRule> = base
            .as_ref()
            .map(|b| b.rules.iter().map(|r| r.rule.clone()).collect())
            .unwrap_or_default();
        let mut seen_in_file = BTreeSet::new();
        for rule in file.rules {
            if !seen_in_file.insert(rule.rule_id.clone()) {
                return Err(Error::RuleSet(format!("duplicate rule id `{}`", rule.rule_id)));
            }
            match rules.iter_mut().find(|r| r.rule_id == rule.rule_id) {
                Some(existing) => *existing = rule,
                None => rules.push(rule),
            }
        }
        let compiled = rules
            .iter()
            .map(PatternRule::compile)
            .collect::<Result<Vec<_>>>()?;

        let pick = |given: Option<Vec<String>>, fallback: Option<&Vec<String>>| {
            given.unwrap_or_else(|| fallback.cloned().unwrap_or_default())
        };
        let mut aliases = base
            .as_ref()
            .map(|b| b.aliases.clone())
            .unwrap_or_else(AliasTable::default);
        for (alias, key) in file.aliases {
            let kind = FieldKind::from_key(&key).ok_or_else(|| {
                Error::RuleSet(format!("alias `{alias}` targets unknown field `{key}`"))
            })?;
            aliases.insert(&alias, kind);
        }

        let mut set = RuleSet {
            rules: compiled,
            uncertainty_markers: pick(
                file.markers.uncertainty,
                base.as_ref().map(|b| &b.uncertainty_markers),
            ),
            mitigation_markers: pick(
                file.markers.mitigation,
                base.as_ref().map(|b| &b.mitigation_markers),
            ),
            escalation_markers: pick(
                file.markers.escalation,
                base.as_ref().map(|b| &b.escalation_markers),
            ),
            handoff_roles: pick(file.handoff.roles, base.as_ref().map(|b| &b.handoff_roles)),
            handoff_triggers: pick(
                file.handoff.triggers,
                base.as_ref().map(|b| &b.handoff_triggers),
            ),
            claim_templates: pick(
                file.claims.templates,
                base.as_ref().map(|b| &b.claim_templates),
            ),
            aliases,
            hash: String::new(),
        };
        if let Some(t) = set.claim_templates.iter().find(|t| !t.contains("{action}")) {
            return Err(Error::RuleSet(format!(
                "claim template `{t}` has no `{{action}}` placeholder"
            )));
        }
        set.hash = set.compute_hash();
        Ok(set)
    }

    fn compute_hash(&self) -> String {
        let canonical = Canonical {
            rules: self.rules.iter().map(|r| &r.rule).collect(),
            uncertainty: &self.uncertainty_markers,
            mitigation: &self.mitigation_markers,
            escalation: &self.escalation_markers,
            handoff_roles: &self.handoff_roles,
            handoff_triggers: &self.handoff_triggers,
            claim_templates: &self.claim_templates,
            aliases: self.aliases.iter().collect(),
        };
        let bytes = serde_json::to_vec(&canonical).expect("canonical form serializes");
        let digest = Sha256::digest(&bytes);
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Hex SHA-256 of the effective rule set.
    pub fn hash(&self) -> &str {
        &self.hash
    }

    pub fn rules(&self) -> &[CompiledRule] {
        &self.rules
    }

    pub fn rules_of(&self, class: RuleClass) -> impl Iterator<Item = &CompiledRule> {
        self.rules
            .iter()
            .filter(move |r| r.rule.boundary_class == class)
    }

    /// Replace the pattern rules; markers and aliases are kept.
    pub fn with_rules(mut self, rules: Vec<PatternRule>) -> Result<RuleSet> {
        self.rules = rules
            .iter()
            .map(PatternRule::compile)
            .collect::<Result<Vec<_>>>()?;
        self.hash = self.compute_hash();
        Ok(self)
    }
}

impl Default for RuleSet {
    fn default() -> Self {
        RuleSet::builtin()
    }
}

/// How a phrase list is matched against text.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum PhraseMode {
    /// The phrase may continue into a longer word (`escalat` matches
    /// `escalating`).
    Prefix,
    /// Whole phrase, optionally followed by a plural `s`.
    Word,
    /// Whole phrase only.
    Exact,
}

/// Case-insensitive matcher for any phrase of `list`, or `None` when the
/// list is empty. Word boundaries are only required where the phrase starts
/// or ends with a word character, so entries like `handoff:` behave.
pub(crate) fn phrase_matcher(list: &[String], mode: PhraseMode) -> Option<Regex> {
    let word = |c: Option<char>| c.is_some_and(|c| c.is_alphanumeric() || c == '_');
    let alternatives: Vec<String> = list
        .iter()
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            let p = p.trim();
            let mut alt = String::new();
            if word(p.chars().next()) {
                alt.push_str(r"\b");
            }
            alt.push_str(&regex::escape(p));
            let ends_in_word = word(p.chars().last());
            match mode {
                PhraseMode::Prefix => {}
                PhraseMode::Word if ends_in_word => alt.push_str(r"s?\b"),
                PhraseMode::Exact if ends_in_word => alt.push_str(r"\b"),
                _ => {}
            }
            alt
        })
        .collect();
    if alternatives.is_empty() {
        return None;
    }
    Some(
        RegexBuilder::new(&format!("(?:{})", alternatives.join("|")))
            .case_insensitive(true)
            .build()
            .expect("escaped phrases always compile"),
    )
}
