//! Tooling for contractual agent skills.
//!
//! A contractual skill is a `SKILL.md` file whose body is organized into a
//! fixed set of task-contract fields (goal, inputs, permissions, human gates,
//! evidence, output, verification, handoff, ...). This crate parses those
//! files losslessly, validates them against per-template requirement
//! profiles, compiles between a structured YAML contract source and
//! `SKILL.md`, checks agent outputs against the output contract, audits
//! simulated tool-call transcripts, and aggregates judge-score files.
//!
//! ```
//! use skillctl_core::{parse_skill_markdown, import_skill, validate_contract, AliasTable, TemplateVariant, ValidationConfig};
//!
//! let doc = parse_skill_markdown("---\nname: demo\ndescription: A demo skill\n---\n## Goal\nSay hello.\n").unwrap();
//! let (contract, _) = import_skill(&doc, &AliasTable::default());
//! let findings = validate_contract(&contract, TemplateVariant::ContentProduction, &ValidationConfig::default());
//! assert!(findings.iter().any(|f| f.rule_id == "field.missing.audience"));
//! ```

pub mod checker;
pub mod compiler;
pub mod contract;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod pattern;
pub mod rules;
pub mod skill_doc;
pub mod source;

pub use checker::{
    check_forbidden_commitments, check_handoff, check_max_words, check_output, check_privacy,
    check_required_sections, check_uncertainty_marking, compile_output_contract, AssertionResult,
    CheckReport, Detail, OutputContract,
};
pub use compiler::{derive_condition, emit_skill, import_skill, lint_skill_text, Condition};
pub use contract::{
    normalize_heading, normalize_section_name, requirement_profile, validate_contract, AliasTable,
    ExtraSection, FieldContent, FieldKind, Finding, HandoffRoute, InputItem, PrivacyClass,
    RequirementProfile, Severity, Structured, TaskContract, TemplateVariant, ValidationConfig,
};
pub use error::{Error, Result};
pub use harness::{
    aggregate_audits, audit_transcript, read_transcripts, simulate_call, AttemptMatrix, AuditReport,
    ResultStatus, RiskClass, ToolCallRecord, ToolRegistry, ToolSpec, Transcript,
};
pub use metrics::{
    compute_stats, condition_means, cross_judge_aggregate, dedup_records, error_rates,
    experiment_arithmetic_check, paired_deltas, read_judge_csv, read_judge_file, JudgePolicy,
    JudgeRecord, Manifest, StatsReport, StudyKind,
};
pub use pattern::{PatternRule, RuleClass};
pub use rules::RuleSet;
pub use skill_doc::{
    locate_section, parse_skill_markdown, render_skill_markdown, Frontmatter, SectionBlock,
    SkillDocument,
};
pub use source::{emit_contract_source, parse_contract_source};

/// Version string stamped into every report.
pub const TOOL_VERSION: &str = concat!("skillctl ", env!("CARGO_PKG_VERSION"));
