//! Pattern rules and the regular-expression subset they may use.
//!
//! Allowed: literals and escapes, `.`, bracket classes with ranges and
//! negation, the Perl classes `\d \w \s \D \W \S`, groups (capturing or
//! `(?:...)`), alternation, greedy repetition (`* + ? {n} {n,} {n,m}`) and
//! the assertions `^ $ \b \B`. The only flag is `i` (case-insensitive),
//! given in the rule's `flags` field. Patterns are matched one line at a
//! time, so `^` and `$` anchor to line boundaries.

use regex::{Regex, RegexBuilder};
use regex_syntax::ast::{self, Ast};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Boundary a rule protects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RuleClass {
    Commitment,
    Privacy,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternRule {
    #[serde(rename = "id")]
    pub rule_id: String,
    #[serde(rename = "class")]
    pub boundary_class: RuleClass,
    pub pattern: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub flags: String,
}

impl PatternRule {
    pub fn new(id: &str, class: RuleClass, pattern: &str, flags: &str) -> Self {
        PatternRule {
            rule_id: id.to_owned(),
            boundary_class: class,
            pattern: pattern.to_owned(),
            flags: flags.to_owned(),
        }
    }

    pub fn case_insensitive(&self) -> bool {
        self.flags.contains('i')
    }

    pub fn compile(&self) -> Result<CompiledRule> {
        let err = |message: String| Error::Pattern {
            rule_id: self.rule_id.clone(),
            message,
        };
        if let Some(bad) = self.flags.chars().find(|&c| c != 'i') {
            return Err(err(format!("unsupported flag `{bad}`; only `i` is allowed")));
        }
        check_subset(&self.pattern).map_err(err)?;
        let regex = RegexBuilder::new(&self.pattern)
            .case_insensitive(self.case_insensitive())
            .build()
            .map_err(|e| err(e.to_string()))?;
        Ok(CompiledRule {
            rule: self.clone(),
            regex,
        })
    }
}

#[derive(Debug, Clone)]
pub struct CompiledRule {
    pub rule: PatternRule,
    regex: Regex,
}

/// Serializes as its source rule.
impl Serialize for CompiledRule {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.rule.serialize(s)
    }
}

/// One match of a rule inside a line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineMatch {
    pub start: usize,
    pub end: usize,
}

impl CompiledRule {
    /// Leftmost-first match in one line.
    pub fn find(&self, line: &str) -> Option<LineMatch> {
        self.regex.find(line).map(|m| LineMatch {
            start: m.start(),
            end: m.end(),
        })
    }

    pub fn find_iter<'a>(&'a self, line: &'a str) -> impl Iterator<Item = LineMatch> + 'a {
        self.regex.find_iter(line).map(|m| LineMatch {
            start: m.start(),
            end: m.end(),
        })
    }

    pub fn is_match(&self, line: &str) -> bool {
        self.regex.is_match(line)
    }
}

/// Reject anything outside the documented subset.
pub fn check_subset(pattern: &str) -> std::result::Result<(), String> {
    let parsed = ast::parse::Parser::new()
        .parse(pattern)
        .map_err(|e| e.to_string())?;
    walk(&parsed)
}

fn walk(node: &Ast) -> std::result::Result<(), String> {
    match node {
        Ast::Empty(_) | Ast::Literal(_) | Ast::Dot(_) => Ok(()),
        Ast::Flags(_) => Err("inline flags are not supported; use the rule's `flags`".into()),
        Ast::Assertion(a) => match a.kind {
            ast::AssertionKind::StartLine
            | ast::AssertionKind::EndLine
            | ast::AssertionKind::WordBoundary
            | ast::AssertionKind::NotWordBoundary => Ok(()),
            _ => Err("only the assertions ^ $ \\b \\B are supported".into()),
        },
        Ast::ClassUnicode(_) => Err("Unicode classes (\\p{..}) are not supported".into()),
        Ast::ClassPerl(_) => Ok(()),
        Ast::ClassBracketed(c) => class_set(&c.kind),
        Ast::Repetition(r) => {
            if !r.greedy {
                return Err("lazy repetition is not supported".into());
            }
            walk(&r.ast)
        }
        Ast::Group(g) => match &g.kind {
            ast::GroupKind::CaptureIndex(_) => walk(&g.ast),
            ast::GroupKind::NonCapturing(flags) if flags.items.is_empty() => walk(&g.ast),
            ast::GroupKind::NonCapturing(_) => {
                Err("inline flags are not supported; use the rule's `flags`".into())
            }
            ast::GroupKind::CaptureName { .. } => Err("named groups are not supported".into()),
        },
        Ast::Alternation(a) => a.asts.iter().try_for_each(walk),
        Ast::Concat(c) => c.asts.iter().try_for_each(walk),
    }
}

fn class_set(set: &ast::ClassSet) -> std::result::Result<(), String> {
    match set {
        ast::ClassSet::BinaryOp(_) => Err("class set operations are not supported".into()),
        ast::ClassSet::Item(item) => class_item(item),
    }
}

fn class_item(item: &ast::ClassSetItem) -> std::result::Result<(), String> {
    match item {
        ast::ClassSetItem::Empty(_)
        | ast::ClassSetItem::Literal(_)
        | ast::ClassSetItem::Range(_)
        | ast::ClassSetItem::Perl(_) => Ok(()),
        ast::ClassSetItem::Union(u) => u.items.iter().try_for_each(class_item),
        ast::ClassSetItem::Ascii(_) => Err("POSIX classes ([:alpha:]) are not supported".into()),
        ast::ClassSetItem::Unicode(_) => Err("Unicode classes (\\p{..}) are not supported".into()),
        ast::ClassSetItem::Bracketed(_) => Err("nested bracket classes are not supported".into()),
    }
}
