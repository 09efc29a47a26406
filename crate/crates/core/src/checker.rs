//! Offline assertions that score an agent's text output against the output
//! contract compiled from a skill.
//!
//! Every check is lexical. Patterns and marker lists come from the rule set;
//! nothing here tries to judge meaning.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::contract::{normalize_heading, FieldKind, Finding, Severity, TaskContract};
use crate::pattern::{CompiledRule, RuleClass};
use crate::rules::{phrase_matcher, PhraseMode, RuleSet};
use crate::skill_doc::heading_of;

/// What an output must (and must not) contain.
#[derive(Debug, Clone, Default, Serialize)]
pub struct OutputContract {
    pub required_sections: Vec<String>,
    pub forbidden_commitment_rules: Vec<CompiledRule>,
    pub privacy_rules: Vec<CompiledRule>,
    pub uncertainty_required: bool,
    pub uncertainty_markers: Vec<String>,
    pub handoff_required: bool,
    pub max_words: Option<u32>,
    /// A commitment match on a line carrying one of these is mitigated.
    pub mitigation_markers: Vec<String>,
    pub handoff_roles: Vec<String>,
    pub handoff_triggers: Vec<String>,
}

/// Build the output contract for `contract`. The finding is a warning when
/// an Output field exists but lists no required sections.
pub fn compile_output_contract(
    contract: &TaskContract,
    ruleset: &RuleSet,
) -> (OutputContract, Option<Finding>) {
    let mut seen = BTreeSet::new();
    let required_sections: Vec<String> = contract
        .required_output_sections()
        .iter()
        .filter(|t| seen.insert(normalize_heading(t)))
        .cloned()
        .collect();
    let finding = (contract.has(FieldKind::Output) && required_sections.is_empty()).then(|| {
        Finding::new(
            "check.output.empty",
            Severity::Warning,
            "Output is present but lists no required sections; the sections check is vacuous",
        )
        .with_field(FieldKind::Output)
    });
    let oc = OutputContract {
        required_sections,
        forbidden_commitment_rules: ruleset.rules_of(RuleClass::Commitment).cloned().collect(),
        privacy_rules: ruleset.rules_of(RuleClass::Privacy).cloned().collect(),
        uncertainty_required: contract.has(FieldKind::Evidence),
        uncertainty_markers: ruleset.uncertainty_markers.clone(),
        handoff_required: contract.has(FieldKind::Handoff),
        max_words: contract.max_words(),
        mitigation_markers: ruleset.mitigation_markers.clone(),
        handoff_roles: ruleset.handoff_roles.clone(),
        handoff_triggers: ruleset.handoff_triggers.clone(),
    };
    (oc, finding)
}

/// Evidence attached to an assertion result.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Detail {
    /// A pattern hit. `line` and `column` are 1-based; the column counts
    /// characters.
    Match {
        rule_id: String,
        text: String,
        line: usize,
        column: usize,
        mitigated: bool,
    },
    Missing { item: String },
    /// A marker or statement that satisfied the check.
    Found { item: String, line: usize },
    WordCount { words: usize, limit: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AssertionResult {
    pub assertion_id: String,
    pub passed: bool,
    pub details: Vec<Detail>,
}

pub const REQUIRED_SECTIONS: &str = "required_sections";
pub const FORBIDDEN_COMMITMENTS: &str = "forbidden_commitments";
pub const PRIVACY: &str = "privacy";
pub const UNCERTAINTY_MARKING: &str = "uncertainty_marking";
pub const HANDOFF: &str = "handoff";
pub const MAX_WORDS: &str = "max_words";

fn result(id: &str, passed: bool, details: Vec<Detail>) -> AssertionResult {
    debug_assert!(passed || !details.is_empty());
    AssertionResult {
        assertion_id: id.to_owned(),
        passed,
        details,
    }
}

/// Normalized title a line would satisfy: heading text, or the whole line
/// with bold markers and a trailing colon removed.
fn line_title(line: &str) -> String {
    let text = match heading_of(line) {
        Some((_, title)) => title,
        None => line.trim(),
    };
    let mut text = text.trim();
    for wrap in ["**", "__"] {
        if let Some(inner) = text.strip_prefix(wrap).and_then(|t| t.strip_suffix(wrap)) {
            text = inner.trim();
        }
    }
    let text = text.strip_suffix(':').unwrap_or(text);
    normalize_heading(text)
}

pub fn check_required_sections(text: &str, oc: &OutputContract) -> AssertionResult {
    let present: BTreeSet<String> = text.lines().map(line_title).collect();
    let missing: Vec<Detail> = oc
        .required_sections
        .iter()
        .filter(|t| !present.contains(&normalize_heading(t)))
        .map(|t| Detail::Missing { item: t.clone() })
        .collect();
    result(REQUIRED_SECTIONS, missing.is_empty(), missing)
}

fn scan(text: &str, rules: &[CompiledRule], mitigation: &[String]) -> Vec<Detail> {
    let mitigation = phrase_matcher(mitigation, PhraseMode::Word);
    let mut out = Vec::new();
    for (index, line) in text.lines().enumerate() {
        let mitigated = mitigation.as_ref().is_some_and(|m| m.is_match(line));
        for rule in rules {
            for m in rule.find_iter(line) {
                out.push(Detail::Match {
                    rule_id: rule.rule.rule_id.clone(),
                    text: line[m.start..m.end].to_owned(),
                    line: index + 1,
                    column: line[..m.start].chars().count() + 1,
                    mitigated,
                });
            }
        }
    }
    out
}

fn unmitigated(details: &[Detail]) -> bool {
    details
        .iter()
        .any(|d| matches!(d, Detail::Match { mitigated: false, .. }))
}

/// Fails on any commitment-class match outside a mitigated line. Mitigated
/// matches are still listed.
pub fn check_forbidden_commitments(text: &str, oc: &OutputContract) -> AssertionResult {
    let details = scan(text, &oc.forbidden_commitment_rules, &oc.mitigation_markers);
    result(FORBIDDEN_COMMITMENTS, !unmitigated(&details), details)
}

/// Fails on any privacy-class match; there is no mitigation for leaks.
pub fn check_privacy(text: &str, oc: &OutputContract) -> AssertionResult {
    let details = scan(text, &oc.privacy_rules, &[]);
    result(PRIVACY, details.is_empty(), details)
}

pub fn check_uncertainty_marking(text: &str, oc: &OutputContract) -> AssertionResult {
    if !oc.uncertainty_required {
        return result(UNCERTAINTY_MARKING, true, Vec::new());
    }
    let found: Vec<Detail> = phrase_matcher(&oc.uncertainty_markers, PhraseMode::Word)
        .map(|m| {
            text.lines()
                .enumerate()
                .filter_map(|(i, line)| {
                    m.find(line).map(|hit| Detail::Found {
                        item: hit.as_str().to_owned(),
                        line: i + 1,
                    })
                })
                .collect()
        })
        .unwrap_or_default();
    if found.is_empty() {
        let wanted = if oc.uncertainty_markers.is_empty() {
            "an uncertainty marker (none configured)".to_owned()
        } else {
            format!("one of: {}", oc.uncertainty_markers.join(", "))
        };
        return result(
            UNCERTAINTY_MARKING,
            false,
            vec![Detail::Missing { item: wanted }],
        );
    }
    result(UNCERTAINTY_MARKING, true, found)
}

/// Passes when one line carries both a handoff trigger and a target role.
pub fn check_handoff(text: &str, oc: &OutputContract) -> AssertionResult {
    if !oc.handoff_required {
        return result(HANDOFF, true, Vec::new());
    }
    let triggers = phrase_matcher(&oc.handoff_triggers, PhraseMode::Exact);
    let roles = phrase_matcher(&oc.handoff_roles, PhraseMode::Word);
    let (mut any_trigger, mut any_role) = (false, false);
    for (i, line) in text.lines().enumerate() {
        let t = triggers.as_ref().is_some_and(|m| m.is_match(line));
        let r = roles.as_ref().is_some_and(|m| m.is_match(line));
        if t && r {
            return result(
                HANDOFF,
                true,
                vec![Detail::Found {
                    item: line.trim().to_owned(),
                    line: i + 1,
                }],
            );
        }
        any_trigger |= t;
        any_role |= r;
    }
    let mut missing = Vec::new();
    if !any_trigger {
        missing.push(Detail::Missing {
            item: "handoff trigger phrase".into(),
        });
    }
    if !any_role {
        missing.push(Detail::Missing {
            item: "handoff target role".into(),
        });
    }
    if missing.is_empty() {
        missing.push(Detail::Missing {
            item: "trigger phrase and target role on the same line".into(),
        });
    }
    result(HANDOFF, false, missing)
}

/// Whitespace-delimited token count.
pub fn word_count(text: &str) -> usize {
    text.split_whitespace().count()
}

pub fn check_max_words(text: &str, oc: &OutputContract) -> AssertionResult {
    match oc.max_words {
        None => result(MAX_WORDS, true, Vec::new()),
        Some(limit) => {
            let words = word_count(text);
            result(
                MAX_WORDS,
                words <= limit as usize,
                vec![Detail::WordCount { words, limit }],
            )
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckSummary {
    pub assertions: usize,
    pub passed: usize,
    pub failed: usize,
    pub commitment_matches: usize,
    pub mitigated_matches: usize,
    pub privacy_matches: usize,
    pub words: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckReport {
    pub results: Vec<AssertionResult>,
    pub sections_pass: bool,
    /// A commitment or privacy assertion failed.
    pub critical: bool,
    pub summary: CheckSummary,
}

impl CheckReport {
    pub fn result(&self, assertion_id: &str) -> Option<&AssertionResult> {
        self.results.iter().find(|r| r.assertion_id == assertion_id)
    }

    pub fn all_passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }
}

/// Run every assertion, in a fixed order.
pub fn check_output(text: &str, oc: &OutputContract) -> CheckReport {
    let results = vec![
        check_required_sections(text, oc),
        check_forbidden_commitments(text, oc),
        check_privacy(text, oc),
        check_uncertainty_marking(text, oc),
        check_handoff(text, oc),
        check_max_words(text, oc),
    ];
    let critical = results
        .iter()
        .any(|r| !r.passed && (r.assertion_id == FORBIDDEN_COMMITMENTS || r.assertion_id == PRIVACY));
    let count = |id: &str, mitigated: Option<bool>| {
        results
            .iter()
            .filter(|r| r.assertion_id == id)
            .flat_map(|r| &r.details)
            .filter(|d| match d {
                Detail::Match { mitigated: m, .. } => mitigated.is_none_or(|want| *m == want),
                _ => false,
            })
            .count()
    };
    let passed = results.iter().filter(|r| r.passed).count();
    let summary = CheckSummary {
        assertions: results.len(),
        passed,
        failed: results.len() - passed,
        commitment_matches: count(FORBIDDEN_COMMITMENTS, None),
        mitigated_matches: count(FORBIDDEN_COMMITMENTS, Some(true)),
        privacy_matches: count(PRIVACY, None),
        words: word_count(text),
    };
    CheckReport {
        sections_pass: results[0].passed,
        critical,
        results,
        summary,
    }
}
