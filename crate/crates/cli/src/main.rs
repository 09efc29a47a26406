//! `skillctl`: lint, compile, check and audit contractual agent skills.
//!
//! Exit codes: 0 clean, 1 findings or critical failures at or above the
//! `--fail-on` threshold, 2 usage or I/O errors.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use skillctl_core::checker::{check_output, compile_output_contract, CheckReport};
use skillctl_core::compiler::{derive_condition, emit_skill, import_skill, lint_skill_text};
use skillctl_core::contract::{
    rule_registry, sort_findings, Finding, Severity, TaskContract, TemplateVariant,
    ValidationConfig,
};
use skillctl_core::harness::{aggregate_audits, audit_transcript, read_transcripts, ToolRegistry};
use skillctl_core::metrics::{
    compute_stats, experiment_arithmetic_check, read_judge_file, JudgePolicy, Manifest,
    ManifestReport, StudyKind,
};
use skillctl_core::skill_doc::{parse_skill_markdown, render_skill_markdown};
use skillctl_core::source::{emit_contract_source, parse_contract_source};
use skillctl_core::{Condition, RuleSet, TOOL_VERSION};

#[derive(Parser)]
#[command(name = "skillctl", version, about = "Lint, compile, check and audit contractual agent skills")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Rule set file layered over the built-in defaults.
    #[arg(long, global = true, env = "SKILLCTL_RULES")]
    rules: Option<PathBuf>,
    /// Lowest severity that makes the exit code 1.
    #[arg(long, global = true, value_enum, default_value_t = FailOn::Error)]
    fail_on: FailOn,
    /// Write the main output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FailOn {
    Error,
    Warning,
}

impl FailOn {
    fn threshold(self) -> Severity {
        match self {
            FailOn::Error => Severity::Error,
            FailOn::Warning => Severity::Warning,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Validate SKILL.md files; directories are searched for SKILL.md.
    Lint {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        /// Template variant, overriding the `template` frontmatter key.
        #[arg(long)]
        template: Option<TemplateVariant>,
    },
    /// Compile a YAML contract source into SKILL.md.
    Compile { source: PathBuf },
    /// Import a SKILL.md into a YAML contract source.
    Import { skill: PathBuf },
    /// Derive an instruction-condition variant of a skill.
    Derive {
        /// SKILL.md or YAML contract source.
        skill: PathBuf,
        #[arg(long)]
        condition: Condition,
    },
    /// Check agent outputs against a skill's output contract.
    Check {
        #[arg(required = true)]
        outputs: Vec<PathBuf>,
        /// SKILL.md or YAML contract source the outputs were produced under.
        #[arg(long)]
        skill: PathBuf,
    },
    /// Audit tool-call transcripts (JSON Lines).
    Audit {
        #[arg(required = true)]
        transcripts: Vec<PathBuf>,
        /// Tool registry JSON.
        #[arg(long)]
        registry: PathBuf,
        /// Records every model must contribute.
        #[arg(long)]
        expect_per_model: Option<usize>,
    },
    /// Aggregate judge-record CSV files.
    Stats {
        files: Vec<PathBuf>,
        /// Study shape; detected from the variant labels by default.
        #[arg(long)]
        study: Option<StudyKind>,
        /// Reciprocal judge pair, as `model-a,model-b`.
        #[arg(long, value_parser = parse_pair)]
        reciprocal: Option<(String, String)>,
        /// Keep rows where a model judged its own output. The default for
        /// condition studies drops them.
        #[arg(long, conflicts_with = "exclude_self_judging")]
        allow_self_judging: bool,
        /// Drop self-judged rows. The default for variant studies keeps them.
        #[arg(long)]
        exclude_self_judging: bool,
        /// Study manifest to check factor arithmetic and row counts.
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// List lint rules and the effective pattern rules.
    Rules,
}

fn parse_pair(s: &str) -> Result<(String, String), String> {
    match s.split_once(',') {
        Some((a, b)) if !a.trim().is_empty() && !b.trim().is_empty() => {
            Ok((a.trim().to_owned(), b.trim().to_owned()))
        }
        _ => Err(format!("expected `model-a,model-b`, got `{s}`")),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(clean) if clean => ExitCode::SUCCESS,
        Ok(_) => ExitCode::from(1),
        Err(e) => {
            eprintln!("skillctl: {e:#}");
            ExitCode::from(2)
        }
    }
}

struct Ctx<'a> {
    global: &'a Global,
    rules: RuleSet,
    rules_source: String,
}

impl Ctx<'_> {
    fn emit(&self, text: &str) -> Result<()> {
        match &self.global.out {
            Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout.write_all(text.as_bytes())?;
                Ok(())
            }
        }
    }

    fn emit_json<T: Serialize>(&self, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.emit(&text)
    }

    fn header(&self) -> serde_json::Value {
        json!({
            "tool_version": TOOL_VERSION,
            "rule_set": { "hash": self.rules.hash(), "source": self.rules_source },
        })
    }

    fn text_header(&self) -> String {
        format!(
            "{TOOL_VERSION}; rule set {} ({})\n",
            &self.rules.hash()[..12],
            self.rules_source
        )
    }
}

/// Returns whether the run is clean (exit 0).
fn run(cli: &Cli) -> Result<bool> {
    let (rules, rules_source) = match &cli.global.rules {
        Some(path) => (
            RuleSet::from_path(path)?,
            format!("{} over built-in defaults", path.display()),
        ),
        None => (
            RuleSet::builtin(),
            "built-in defaults (reconstructed patterns)".to_owned(),
        ),
    };
    let ctx = Ctx {
        global: &cli.global,
        rules,
        rules_source,
    };
    match &cli.command {
        Command::Lint { paths, template } => cmd_lint(&ctx, paths, *template),
        Command::Compile { source } => cmd_compile(&ctx, source),
        Command::Import { skill } => cmd_import(&ctx, skill),
        Command::Derive { skill, condition } => cmd_derive(&ctx, skill, *condition),
        Command::Check { outputs, skill } => cmd_check(&ctx, outputs, skill),
        Command::Audit {
            transcripts,
            registry,
            expect_per_model,
        } => cmd_audit(&ctx, transcripts, registry, *expect_per_model),
        Command::Stats {
            files,
            study,
            reciprocal,
            allow_self_judging,
            exclude_self_judging,
            manifest,
        } => {
            let self_judging = match (allow_self_judging, exclude_self_judging) {
                (true, _) => Some(true),
                (_, true) => Some(false),
                _ => None,
            };
            cmd_stats(&ctx, files, *study, reciprocal.clone(), self_judging, manifest.as_deref())
        }
        Command::Rules => cmd_rules(&ctx),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn is_yaml(path: &Path) -> bool {
    matches!(
        path.extension().and_then(|e| e.to_str()),
        Some("yaml" | "yml")
    )
}

/// Load a contract from SKILL.md or a YAML source, by extension.
fn load_contract(ctx: &Ctx, path: &Path) -> Result<TaskContract> {
    let text = read(path)?;
    if is_yaml(path) {
        return parse_contract_source(&text).with_context(|| path.display().to_string());
    }
    let doc = parse_skill_markdown(&text).with_context(|| path.display().to_string())?;
    Ok(import_skill(&doc, &ctx.rules.aliases).0)
}

fn collect_skill_files(paths: &[PathBuf]) -> Result<Vec<PathBuf>> {
    fn walk(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
        let entries = fs::read_dir(dir).with_context(|| format!("reading {}", dir.display()))?;
        for entry in entries {
            let path = entry?.path();
            if path.is_dir() {
                walk(&path, out)?;
            } else if path.file_name().is_some_and(|n| n == "SKILL.md") {
                out.push(path);
            }
        }
        Ok(())
    }
    let mut out = Vec::new();
    for path in paths {
        if path.is_dir() {
            walk(path, &mut out)?;
        } else if path.exists() {
            out.push(path.clone());
        } else {
            bail!("{}: no such file or directory", path.display());
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

fn severity_counts(findings: &[Finding]) -> (usize, usize, usize) {
    let count = |s| findings.iter().filter(|f| f.severity == s).count();
    (
        count(Severity::Error),
        count(Severity::Warning),
        count(Severity::Info),
    )
}

#[derive(Serialize)]
struct LintFile {
    path: String,
    template: TemplateVariant,
    findings: Vec<Finding>,
}

fn cmd_lint(ctx: &Ctx, paths: &[PathBuf], template: Option<TemplateVariant>) -> Result<bool> {
    let files = collect_skill_files(paths)?;
    if files.is_empty() {
        bail!("no SKILL.md files found");
    }
    let config = ValidationConfig::default();
    let mut reports = Vec::new();
    for path in &files {
        let text = read(path)?;
        let (_, variant, mut findings) = lint_skill_text(&text, &ctx.rules.aliases, template, &config)
            .with_context(|| path.display().to_string())?;
        sort_findings(&mut findings);
        reports.push(LintFile {
            path: path.display().to_string(),
            template: variant,
            findings,
        });
    }
    let all: Vec<Finding> = reports.iter().flat_map(|r| r.findings.clone()).collect();
    let (errors, warnings, infos) = severity_counts(&all);
    let threshold = ctx.global.fail_on.threshold();
    let clean = !all.iter().any(|f| f.severity >= threshold);

    match ctx.global.format {
        Format::Json => {
            let mut report = ctx.header();
            report["files"] = serde_json::to_value(&reports)?;
            report["summary"] = json!({"files": reports.len(), "errors": errors, "warnings": warnings, "info": infos});
            ctx.emit_json(&report)?;
        }
        Format::Text => {
            let mut out = ctx.text_header();
            for r in &reports {
                for f in &r.findings {
                    let line = f.location.map(|s| s.start_line).unwrap_or(1);
                    out.push_str(&format!(
                        "{}:{line}: {} [{}] {}\n",
                        r.path,
                        severity_word(f.severity),
                        f.rule_id,
                        f.message
                    ));
                }
            }
            out.push_str(&format!(
                "{} file(s): {errors} error(s), {warnings} warning(s), {infos} info\n",
                reports.len()
            ));
            ctx.emit(&out)?;
        }
    }
    Ok(clean)
}

fn severity_word(s: Severity) -> &'static str {
    match s {
        Severity::Error => "error",
        Severity::Warning => "warning",
        Severity::Info => "info",
    }
}

fn cmd_compile(ctx: &Ctx, source: &Path) -> Result<bool> {
    let contract = parse_contract_source(&read(source)?)
        .with_context(|| source.display().to_string())?;
    ctx.emit(&render_skill_markdown(&emit_skill(&contract)))?;
    Ok(true)
}

fn cmd_import(ctx: &Ctx, skill: &Path) -> Result<bool> {
    let doc = parse_skill_markdown(&read(skill)?).with_context(|| skill.display().to_string())?;
    let (contract, findings) = import_skill(&doc, &ctx.rules.aliases);
    for f in &findings {
        eprintln!(
            "{}: {} [{}] {}",
            skill.display(),
            severity_word(f.severity),
            f.rule_id,
            f.message
        );
    }
    ctx.emit(&emit_contract_source(&contract))?;
    Ok(true)
}

fn cmd_derive(ctx: &Ctx, skill: &Path, condition: Condition) -> Result<bool> {
    let contract = load_contract(ctx, skill)?;
    if matches!(condition, Condition::Minimal | Condition::PlainExpanded) {
        eprintln!(
            "note: the {} condition is a mechanical approximation derived from the contract",
            condition.label().to_lowercase()
        );
    }
    match derive_condition(&contract, condition) {
        Some(doc) => ctx.emit(&render_skill_markdown(&doc))?,
        None => eprintln!("note: the no-skill condition has no skill body; nothing written"),
    }
    Ok(true)
}

#[derive(Serialize)]
struct CheckedOutput {
    path: String,
    #[serde(flatten)]
    report: CheckReport,
}

fn cmd_check(ctx: &Ctx, outputs: &[PathBuf], skill: &Path) -> Result<bool> {
    let contract = load_contract(ctx, skill)?;
    let (oc, warning) = compile_output_contract(&contract, &ctx.rules);
    if let Some(w) = &warning {
        eprintln!("{}: warning [{}] {}", skill.display(), w.rule_id, w.message);
    }
    let mut checked = Vec::new();
    for path in outputs {
        checked.push(CheckedOutput {
            path: path.display().to_string(),
            report: check_output(&read(path)?, &oc),
        });
    }
    // Critical failures count as errors, other failed assertions as warnings.
    let failing = |c: &CheckedOutput| match ctx.global.fail_on {
        FailOn::Error => c.report.critical,
        FailOn::Warning => !c.report.all_passed(),
    };
    let clean = !checked.iter().any(failing);

    match ctx.global.format {
        Format::Json => {
            let mut report = ctx.header();
            report["skill"] = json!(skill.display().to_string());
            report["outputs"] = serde_json::to_value(&checked)?;
            ctx.emit_json(&report)?;
        }
        Format::Text => {
            let mut out = ctx.text_header();
            for c in &checked {
                let status = if c.report.critical {
                    "CRITICAL"
                } else if c.report.all_passed() {
                    "pass"
                } else {
                    "fail"
                };
                out.push_str(&format!("{}: {status}\n", c.path));
                for r in &c.report.results {
                    out.push_str(&format!(
                        "  {:<22} {}\n",
                        r.assertion_id,
                        if r.passed { "pass" } else { "FAIL" }
                    ));
                    if !r.passed || r.details.iter().any(|d| matches!(d, skillctl_core::checker::Detail::Match { .. })) {
                        for d in &r.details {
                            out.push_str(&format!("    {}\n", describe(d)));
                        }
                    }
                }
            }
            ctx.emit(&out)?;
        }
    }
    Ok(clean)
}

fn describe(d: &skillctl_core::checker::Detail) -> String {
    use skillctl_core::checker::Detail;
    match d {
        Detail::Match {
            rule_id,
            text,
            line,
            column,
            mitigated,
        } => format!(
            "line {line}:{column} {rule_id} \"{text}\"{}",
            if *mitigated { " (mitigated)" } else { "" }
        ),
        Detail::Missing { item } => format!("missing: {item}"),
        Detail::Found { item, line } => format!("line {line}: {item}"),
        Detail::WordCount { words, limit } => format!("{words} words, limit {limit}"),
    }
}

fn cmd_audit(
    ctx: &Ctx,
    transcripts: &[PathBuf],
    registry: &Path,
    expect_per_model: Option<usize>,
) -> Result<bool> {
    let fixtures = registry.parent().map(|p| p.join("fixtures"));
    let registry = ToolRegistry::load(registry, fixtures.as_deref().filter(|p| p.is_dir()))?;
    let mut reports = Vec::new();
    for path in transcripts {
        let parsed = read_transcripts(&read(path)?).with_context(|| path.display().to_string())?;
        for t in &parsed {
            reports.push(audit_transcript(t, &registry, &ctx.rules)?);
        }
    }
    let matrix = aggregate_audits(&reports, expect_per_model)?;
    let clean = !reports.iter().any(|r| r.false_completion);
    match ctx.global.format {
        Format::Json => {
            let mut report = ctx.header();
            report["records"] = json!(reports.len());
            report["matrix"] = serde_json::to_value(&matrix)?;
            report["audits"] = serde_json::to_value(&reports)?;
            ctx.emit_json(&report)?;
        }
        Format::Text => {
            let mut out = ctx.text_header();
            out.push_str(&format!("{} records\n\n", reports.len()));
            out.push_str(&matrix.render_text());
            ctx.emit(&out)?;
        }
    }
    Ok(clean)
}

fn cmd_stats(
    ctx: &Ctx,
    files: &[PathBuf],
    study: Option<StudyKind>,
    reciprocal: Option<(String, String)>,
    self_judging: Option<bool>,
    manifest: Option<&Path>,
) -> Result<bool> {
    if files.is_empty() && manifest.is_none() {
        bail!("give judge-record files, a --manifest, or both");
    }
    let mut records = Vec::new();
    for path in files {
        records.extend(read_judge_file(path)?);
    }
    let report = if files.is_empty() {
        None
    } else {
        let kind = study.unwrap_or_else(|| StudyKind::detect(&records));
        let keep_self = self_judging.unwrap_or(kind == StudyKind::Variants);
        let policy = JudgePolicy {
            exclude_self: !keep_self,
            reciprocal,
        };
        Some(compute_stats(records, kind, &policy)?)
    };
    let manifest_report: Option<ManifestReport> = match manifest {
        Some(path) => {
            let m = Manifest::from_path(path)?;
            let base = path.parent().unwrap_or(Path::new("."));
            Some(experiment_arithmetic_check(&m, base)?)
        }
        None => None,
    };
    let clean = manifest_report.as_ref().is_none_or(|m| m.ok);
    match ctx.global.format {
        Format::Json => {
            let mut out = json!({ "tool_version": TOOL_VERSION });
            if let Some(r) = &report {
                out["stats"] = serde_json::to_value(r)?;
            }
            if let Some(m) = &manifest_report {
                out["manifest"] = serde_json::to_value(m)?;
            }
            ctx.emit_json(&out)?;
        }
        Format::Text => {
            let mut out = format!("{TOOL_VERSION}\n");
            if let Some(r) = &report {
                out.push_str(&r.render_text());
            }
            if let Some(m) = &manifest_report {
                if report.is_some() {
                    out.push('\n');
                }
                out.push_str(&m.render_text());
            }
            ctx.emit(&out)?;
        }
    }
    Ok(clean)
}

fn cmd_rules(ctx: &Ctx) -> Result<bool> {
    let registry = rule_registry();
    match ctx.global.format {
        Format::Json => {
            let mut out = ctx.header();
            out["lint_rules"] = serde_json::to_value(&registry)?;
            out["pattern_rules"] = serde_json::to_value(ctx.rules.rules())?;
            ctx.emit_json(&out)?;
        }
        Format::Text => {
            let mut out = ctx.text_header();
            out.push_str("\nLint rules\n");
            for r in &registry {
                out.push_str(&format!(
                    "  {:<34} {:<7} {}\n",
                    r.rule_id,
                    severity_word(r.severity),
                    r.summary
                ));
            }
            out.push_str("\nPattern rules\n");
            for r in ctx.rules.rules() {
                let class = match r.rule.boundary_class {
                    skillctl_core::RuleClass::Commitment => "commitment",
                    skillctl_core::RuleClass::Privacy => "privacy",
                };
                out.push_str(&format!("  {:<34} {:<10} {}\n", r.rule.rule_id, class, r.rule.pattern));
            }
            ctx.emit(&out)?;
        }
    }
    Ok(true)
}
