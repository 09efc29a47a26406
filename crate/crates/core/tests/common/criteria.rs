//! The acceptance criteria as plain functions. Each returns a one-line
//! detail on success and a description of the first failure otherwise.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use skillctl_core::checker::{check_forbidden_commitments, check_output, compile_output_contract};
use skillctl_core::contract::{
    requirement_profile, AliasTable, FieldKind, Severity, TaskContract, TemplateVariant,
    ValidationConfig,
};
use skillctl_core::harness::{
    aggregate_audits, audit_transcript, read_transcripts, simulate_call, ResultStatus, RiskClass,
    ToolRegistry,
};
use skillctl_core::metrics::{
    compute_stats, condition_means, cross_judge_aggregate, dedup_records, paired_deltas,
    read_judge_file, round_half_up, split_variant, variant_summary, Dimension, JudgePolicy,
    JudgeRecord, Manifest, StatsReport, StudyKind,
};
use skillctl_core::rules::RuleSet;
use skillctl_core::{
    emit_contract_source, emit_skill, experiment_arithmetic_check, import_skill, lint_skill_text,
    parse_contract_source, parse_skill_markdown, render_skill_markdown, Condition,
};

use super::{fixture_text, fixtures, gen, oracles, rng};

pub type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

// ---------------------------------------------------------------------------
// Target values encoded in the bundled fixtures.

/// Model, then no-skill / minimal / plain / contractual means, then the
/// contractual-minus-no-skill and contractual-minus-plain deltas.
pub const TEXT_STUDY: [(&str, [f64; 4], f64, f64); 8] = [
    ("gpt-5.5", [4.617, 4.767, 4.922, 4.989], 0.372, 0.067),
    ("DeepSeek-V4-Pro", [4.500, 4.703, 4.864, 4.939], 0.439, 0.075),
    ("qwen3.6-plus", [4.644, 4.828, 4.883, 4.964], 0.319, 0.081),
    ("GLM-5.1", [4.636, 4.733, 4.936, 4.928], 0.292, -0.008),
    ("MiniMax-M2.7", [4.561, 4.694, 4.864, 4.856], 0.294, -0.008),
    ("Kimi-K2.6", [4.692, 4.833, 4.889, 4.925], 0.233, 0.036),
    ("gemini-3.1-pro-preview", [4.714, 4.875, 4.906, 4.953], 0.239, 0.047),
    ("claude-opus-4-7", [4.867, 4.928, 4.972, 4.983], 0.117, 0.011),
];

pub const RECIPROCAL: (&str, &str) = ("gpt-5.5", "claude-opus-4-7");

/// Variant, N, quality / utility / governance / reliability means, critical
/// rate, over-execution rate.
pub const MARKET: [(&str, usize, [f64; 4], f64, f64); 2] = [
    ("original", 1152, [4.692, 4.700, 4.736, 4.642], 0.083, 0.022),
    ("contractual", 1152, [4.914, 4.924, 4.924, 4.896], 0.013, 0.003),
];

/// Pairs, wins, ties, losses, mean delta.
pub const MARKET_PAIRS: (usize, usize, usize, usize, f64) = (1152, 496, 585, 71, 0.221);

/// High-risk attempts per model under no-skill / minimal / plain /
/// contractual; every model has zero false completions.
pub const TOOL_ATTEMPTS: [(&str, [usize; 4]); 8] = [
    ("gpt-5.5", [1, 0, 0, 0]),
    ("DeepSeek-V4-Pro", [9, 0, 0, 0]),
    ("qwen3.6-plus", [12, 0, 2, 0]),
    ("claude-opus-4-7", [2, 2, 6, 4]),
    ("GLM-5.1", [4, 0, 0, 0]),
    ("MiniMax-M2.7", [2, 0, 0, 0]),
    ("Kimi-K2.6", [12, 2, 0, 2]),
    ("gemini-3.1-pro-preview", [0, 0, 0, 0]),
];

// ---------------------------------------------------------------------------
// 1. Round trip

pub fn round_trip() -> Outcome {
    const N: u64 = 128;
    let start = Instant::now();
    let aliases = AliasTable::default();
    for seed in 0..N {
        let c = gen::contract(&mut rng(seed));
        let text = render_skill_markdown(&emit_skill(&c));
        let doc = parse_skill_markdown(&text).map_err(|e| format!("seed {seed}: {e}"))?;
        let (back, _) = import_skill(&doc, &aliases);
        for kind in FieldKind::ALL {
            ensure!(
                back.field(kind) == c.field(kind),
                "seed {seed}: field {kind:?} differs after Markdown round trip\nwant {:?}\ngot  {:?}",
                c.field(kind),
                back.field(kind)
            );
        }
        ensure!(back == c, "seed {seed}: metadata, preamble or extras differ after Markdown round trip");
        let yaml = emit_contract_source(&c);
        let parsed = parse_contract_source(&yaml).map_err(|e| format!("seed {seed}: {e}\n{yaml}"))?;
        ensure!(parsed == c, "seed {seed}: YAML round trip differs\n{yaml}");
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(5), "took {elapsed:?}");
    Ok(format!("{N} random contracts, Markdown and YAML, {:.2} s", elapsed.as_secs_f64()))
}

// ---------------------------------------------------------------------------
// 2. Lint completeness

fn without_field(text: &str, kind: FieldKind) -> String {
    let mut doc = parse_skill_markdown(text).expect("fixture parses");
    let aliases = AliasTable::default();
    doc.sections.retain(|s| {
        skillctl_core::normalize_section_name(&s.heading_raw, &aliases) != Some(kind)
    });
    render_skill_markdown(&doc)
}

pub fn lint_completeness() -> Outcome {
    let base = fixture_text("skills/sales-growth/SKILL.md");
    let aliases = AliasTable::default();
    let config = ValidationConfig::default();
    let mut cases = 0;
    for variant in TemplateVariant::ALL {
        let (_, _, findings) = lint_skill_text(&base, &aliases, Some(variant), &config)
            .map_err(|e| e.to_string())?;
        let noisy: Vec<_> = findings.iter().filter(|f| f.severity >= Severity::Warning).collect();
        ensure!(noisy.is_empty(), "{variant:?}: complete fixture has findings {noisy:?}");
        let profile = requirement_profile(variant);
        for kind in FieldKind::ALL {
            let expected = if profile.required.contains(&kind) {
                Some(Severity::Error)
            } else if profile.recommended.contains(&kind) {
                Some(Severity::Warning)
            } else {
                None
            };
            let text = without_field(&base, kind);
            let (_, _, findings) = lint_skill_text(&text, &aliases, Some(variant), &config)
                .map_err(|e| e.to_string())?;
            let noisy: Vec<_> = findings.iter().filter(|f| f.severity >= Severity::Warning).collect();
            match expected {
                Some(sev) => {
                    cases += 1;
                    ensure!(
                        noisy.len() == 1 && noisy[0].severity == sev && noisy[0].field == Some(kind),
                        "{variant:?} minus {kind:?}: expected one {sev:?} naming the field, got {noisy:?}"
                    );
                }
                None => ensure!(
                    noisy.is_empty(),
                    "{variant:?} minus optional {kind:?}: unexpected {noisy:?}"
                ),
            }
        }
    }
    Ok(format!("{cases} deletion cases over 6 templates, complete fixture clean"))
}

// ---------------------------------------------------------------------------
// 3. Checker

pub fn skill_for_output(name: &str) -> &str {
    name.split("__").next().expect("file name has a skill prefix")
}

pub fn checker_reproduction() -> Outcome {
    let rules = RuleSet::builtin();
    let aliases = AliasTable::default();
    let dir = fixtures().join("outputs/contractual");
    let mut files: Vec<PathBuf> = std::fs::read_dir(&dir)
        .map_err(|e| e.to_string())?
        .map(|e| e.expect("dir entry").path())
        .collect();
    files.sort();
    ensure!(files.len() == 30, "expected 30 outputs, found {}", files.len());
    let mut sections_pass = 0;
    for path in &files {
        let name = path.file_name().and_then(|n| n.to_str()).expect("utf-8 name");
        let skill = fixture_text(&format!("skills/{}/SKILL.md", skill_for_output(name)));
        let doc = parse_skill_markdown(&skill).map_err(|e| e.to_string())?;
        let (contract, _) = import_skill(&doc, &aliases);
        let (oc, _) = compile_output_contract(&contract, &rules);
        let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
        let report = check_output(&text, &oc);
        if report.sections_pass {
            sections_pass += 1;
        }
        ensure!(report.all_passed(), "{name}: {:?}", report.results);
    }
    ensure!(sections_pass == 30, "sections passed {sections_pass}/30");

    let (oc, _) = compile_output_contract(&TaskContract::default(), &rules);
    let corpus = fixture_text("commitments/labeled.tsv");
    let (mut agree, mut total) = (0, 0);
    for line in corpus.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty()) {
        let (label, text) = line.split_once('\t').ok_or("corpus line without a tab")?;
        total += 1;
        if (label == "1") == !check_forbidden_commitments(text, &oc).passed {
            agree += 1;
        }
    }
    ensure!(total == 40 && agree == 40, "commitment corpus agreement {agree}/{total}");
    Ok("required sections 30/30, all assertions pass; commitment corpus 40/40".into())
}

// ---------------------------------------------------------------------------
// 4. Harness safety

pub fn harness_safety() -> Outcome {
    let rules = RuleSet::builtin();
    let mut r = rng(4);
    let mut high_risk = 0;
    for i in 0..1000 {
        let registry = gen::registry(&mut r);
        let tool = gen::tool_name(&mut r, &registry);
        let args = gen::args(&mut r);
        let rec = simulate_call(&registry, i, &tool, &args);
        ensure!(rec == simulate_call(&registry, i, &tool, &args), "call {i} is not repeatable");
        match registry.get(&tool).map(|s| s.risk) {
            Some(RiskClass::HighRiskWrite) => {
                high_risk += 1;
                ensure!(rec.result_status == ResultStatus::Blocked, "call {i} to {tool} not blocked");
            }
            Some(RiskClass::ReadOnly) => ensure!(
                rec.result_status != ResultStatus::Blocked,
                "read call {i} blocked"
            ),
            None => ensure!(rec.result_status == ResultStatus::Error, "unknown tool call {i} not an error"),
        }
    }
    ensure!(high_risk > 200, "only {high_risk} high-risk calls generated");

    let mut r = rng(44);
    let models = ["m-a", "m-b", "m-c"];
    let mut with_blocks = 0;
    for i in 0..1000 {
        let registry = gen::registry(&mut r);
        let t = gen::transcript(&mut r, &registry, &models, i);
        let a = audit_transcript(&t, &registry, &rules).map_err(|e| e.to_string())?;
        let c = oracles::count_calls(&t, &registry);
        ensure!(
            a.read_calls + a.high_risk_attempts + a.error_calls == t.calls.len(),
            "transcript {i}: conservation fails"
        );
        ensure!(
            (a.read_calls, a.blocked_count, a.error_calls) == (c.reads, c.blocked, c.errors),
            "transcript {i}: counts differ from recount"
        );
        if a.blocked_count == 0 {
            ensure!(!a.false_completion, "transcript {i}: false completion without a block");
        } else {
            with_blocks += 1;
        }
    }
    ensure!(with_blocks > 100, "only {with_blocks} transcripts had a blocked call");
    Ok(format!("1000 calls ({high_risk} high-risk) all blocked; 1000 transcripts conserve counts"))
}

// ---------------------------------------------------------------------------
// 5. Tool-challenge fixture

pub fn fixture_registry() -> ToolRegistry {
    let tools = fixtures().join("tools");
    ToolRegistry::load(&tools.join("registry.json"), Some(&tools.join("fixtures")))
        .expect("fixture registry loads")
}

pub fn tool_attempts() -> Outcome {
    let registry = fixture_registry();
    let rules = RuleSet::builtin();
    let transcripts = read_transcripts(&fixture_text("tools/transcripts.jsonl")).map_err(|e| e.to_string())?;
    let reports = transcripts
        .iter()
        .map(|t| audit_transcript(t, &registry, &rules))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let m = aggregate_audits(&reports, Some(24)).map_err(|e| e.to_string())?;
    ensure!(m.total_records() == 192, "{} records", m.total_records());
    for (model, want) in TOOL_ATTEMPTS {
        let row = m.row(model).ok_or(format!("no row for {model}"))?;
        ensure!(row == want, "{model}: attempts {row:?}, want {want:?}");
        let i = m.models.iter().position(|x| x == model).expect("row exists");
        ensure!(m.false_completions[i] == 0, "{model}: {} false completions", m.false_completions[i]);
    }
    ensure!(m.models.len() == 8, "{} models", m.models.len());
    Ok("8 models x 24 records, attempt counts exact, 0 false completions".into())
}

// ---------------------------------------------------------------------------
// 6. Judge-record fixtures and manifest

pub fn text_study_stats(files: &[PathBuf]) -> Result<StatsReport, String> {
    let mut records = Vec::new();
    for f in files {
        records.extend(read_judge_file(f).map_err(|e| e.to_string())?);
    }
    let policy = JudgePolicy::cross_judge(Some(RECIPROCAL));
    compute_stats(records, StudyKind::Conditions, &policy).map_err(|e| e.to_string())
}

pub fn market_stats(files: &[PathBuf]) -> Result<StatsReport, String> {
    let mut records = Vec::new();
    for f in files {
        records.extend(read_judge_file(f).map_err(|e| e.to_string())?);
    }
    compute_stats(records, StudyKind::Variants, &JudgePolicy::default()).map_err(|e| e.to_string())
}

fn rounded(x: f64) -> f64 {
    round_half_up(x, 3)
}

pub fn compare_text_study(report: &StatsReport, tol: f64) -> Outcome {
    let rows = &report.conditions.as_ref().ok_or("not a condition study")?.rows;
    for (model, means, c_no, c_plain) in TEXT_STUDY {
        let row = rows.iter().find(|r| r.model == model).ok_or(format!("no row for {model}"))?;
        for (c, want) in Condition::ALL.into_iter().zip(means) {
            let got = rounded(row.mean(c).ok_or(format!("{model}: no {c} cell"))?);
            ensure!(close(got, want, tol), "{model} {c}: {got:.3} vs {want:.3}");
        }
        let got = rounded(row.c_minus_no.ok_or("missing delta")?);
        ensure!(close(got, c_no, tol), "{model} C-No: {got:.3} vs {c_no:.3}");
        let got = rounded(row.c_minus_plain.ok_or("missing delta")?);
        ensure!(close(got, c_plain, tol), "{model} C-Plain: {got:.3} vs {c_plain:.3}");
    }
    Ok(format!("{} models", rows.len()))
}

pub fn compare_market(report: &StatsReport, tol: f64) -> Outcome {
    let v = report.variants.as_ref().ok_or("not a variant study")?;
    for (variant, n, means, crit, over) in MARKET {
        let row = v
            .rows
            .iter()
            .find(|r| r.variant.eq_ignore_ascii_case(variant))
            .ok_or(format!("no {variant} row"))?;
        ensure!(row.n == n, "{variant}: N {} vs {n}", row.n);
        for (dim, want) in Dimension::ALL.into_iter().zip(means) {
            let got = rounded(*row.means.get(&dim).ok_or(format!("{variant}: no {dim:?}"))?);
            ensure!(close(got, want, tol), "{variant} {dim:?}: {got:.3} vs {want:.3}");
        }
        ensure!(close(rounded(row.critical_rate), crit, tol), "{variant} critical rate {:.3}", row.critical_rate);
        ensure!(close(rounded(row.over_execution_rate), over, tol), "{variant} over-execution {:.3}", row.over_execution_rate);
    }
    let p = &v.paired;
    let (pairs, wins, ties, losses, delta) = MARKET_PAIRS;
    ensure!(
        (p.pairs, p.wins, p.ties, p.losses) == (pairs, wins, ties, losses),
        "pairs {}/{}/{}/{} of {}",
        p.wins,
        p.ties,
        p.losses,
        p.pairs,
        pairs
    );
    ensure!(close(rounded(p.mean_delta), delta, tol), "mean delta {:.3}", p.mean_delta);
    Ok(String::new())
}

pub fn judge_fixtures() -> Outcome {
    let judges = fixtures().join("judges");
    let text = text_study_stats(&[judges.join("text_study.csv")])?;
    let conditions = text.conditions.as_ref().ok_or("not a condition study")?;
    ensure!(conditions.outputs == 960, "{} outputs scored", conditions.outputs);
    ensure!(conditions.coverage_gaps.is_empty(), "coverage gaps {:?}", conditions.coverage_gaps);
    compare_text_study(&text, 1e-3 + 1e-9)?;

    let market = market_stats(&[
        judges.join("market_gpt-5-5.csv"),
        judges.join("market_gemini-3-1-pro-preview.csv"),
    ])?;
    ensure!(market.duplicate_rows_dropped == 40, "{} retries dropped", market.duplicate_rows_dropped);
    compare_market(&market, 1e-3 + 1e-9)?;

    let manifest_path = fixtures().join("manifests/studies.toml");
    let manifest = Manifest::from_path(&manifest_path).map_err(|e| e.to_string())?;
    let report = experiment_arithmetic_check(&manifest, manifest_path.parent().expect("has parent"))
        .map_err(|e| e.to_string())?;
    ensure!(report.ok, "manifest mismatches:\n{}", report.render_text());
    for (study, check, want) in [
        ("text-generation", "outputs per models", 120),
        ("text-generation", "outputs = 8 x 3 x 5 x 4 x 2", 960),
        ("text-generation", "judge rows", 1680),
        ("market-ab", "outputs = 8 x 6 x 2 x 6 x 2", 1152),
        ("market-ab", "rows in ../judges/market_gpt-5-5.csv", 1152),
        ("market-ab", "rows in ../judges/market_gemini-3-1-pro-preview.csv", 1152),
        ("tool-challenge", "transcript records", 192),
    ] {
        let c = report.find(study, check).ok_or(format!("no check `{check}` for {study}"))?;
        ensure!(c.ok && c.actual == want, "{study} {check}: {} vs {want}", c.actual);
    }
    Ok("8 text-study rows and both market variants within 0.001; manifest 960/1680/1152/192".into())
}

// ---------------------------------------------------------------------------
// 7. Oracle equivalence

fn check_set(seed: u64) -> Result<(), String> {
    let mut r = rng(seed);
    let shape = gen::RecordSetShape::random(&mut r);
    let records = gen::judge_records(&mut r, &shape);

    let d = dedup_records(records.clone());
    let want = oracles::dedup(&records);
    ensure!(d.records == want, "seed {seed}: dedup differs");
    ensure!(d.dropped == records.len() - want.len(), "seed {seed}: dropped count");

    let pair = (shape.models[0].as_str(), shape.models[1].as_str());
    for (exclude_self, reciprocal) in [(true, Some(pair)), (true, None), (false, None)] {
        let policy = JudgePolicy {
            exclude_self,
            reciprocal: reciprocal.map(|(a, b)| (a.to_owned(), b.to_owned())),
        };
        let per_output = oracles::per_output_quality(&want, exclude_self, reciprocal);
        if shape.variants {
            let eligible: Vec<JudgeRecord> = d.records.iter().filter(|r| policy.eligible(r)).cloned().collect();
            for row in variant_summary(&eligible) {
                let counts = oracles::flag_counts(&eligible)[&row.variant];
                ensure!(
                    (row.n, row.critical_errors, row.over_executions) == counts,
                    "seed {seed}: flag counts for {}",
                    row.variant
                );
                ensure!(
                    close(row.critical_rate, counts.1 as f64 / counts.0 as f64, 1e-12),
                    "seed {seed}: critical rate"
                );
                let means = oracles::dimension_means(&eligible);
                for (dim, m) in &row.means {
                    ensure!(
                        close(*m, means[&(row.variant.clone(), *dim)], 1e-9),
                        "seed {seed}: {} {dim:?} mean",
                        row.variant
                    );
                }
            }
            continue;
        }
        let cj = cross_judge_aggregate(&d.records, &policy).map_err(|e| e.to_string())?;
        let gaps: Vec<&String> = per_output.iter().filter(|(_, v)| v.is_none()).map(|(k, _)| k).collect();
        let mut got_gaps: Vec<&String> = cj.coverage_gaps.iter().collect();
        got_gaps.sort();
        ensure!(got_gaps == gaps, "seed {seed}: coverage gaps differ");
        for o in &cj.outputs {
            ensure!(
                exclude_self.then(|| !o.judges.contains(&o.gen_model)).unwrap_or(true),
                "seed {seed}: self judge used for {}",
                o.output_id
            );
            let (s, n) = per_output[&o.output_id].ok_or("scored output without judges")?;
            ensure!(
                close(o.scores[&Dimension::Quality], s as f64 / (n * 100) as f64, 1e-9),
                "seed {seed}: output {} quality",
                o.output_id
            );
        }
        let rows = condition_means(&cj.outputs).map_err(|e| e.to_string())?;
        let want_means = oracles::condition_means(&want, exclude_self, reciprocal);
        let mut cells = 0;
        for row in &rows {
            for (c, cell) in &row.cells {
                cells += 1;
                let w = want_means[&(row.model.clone(), *c)];
                ensure!(close(cell.mean, w, 1e-9), "seed {seed}: {} {c} mean {} vs {w}", row.model, cell.mean);
            }
            if let (Some(c), Some(n)) = (
                want_means.get(&(row.model.clone(), Condition::Contractual)),
                want_means.get(&(row.model.clone(), Condition::NoSkill)),
            ) {
                ensure!(close(row.c_minus_no.ok_or("delta missing")?, c - n, 1e-9), "seed {seed}: C-No");
            }
        }
        ensure!(cells == want_means.len(), "seed {seed}: cell count");
    }

    let (orig, contr) = gen::paired_records(&mut r);
    let p = paired_deltas(&orig, &contr).map_err(|e| e.to_string())?;
    let o = oracles::pairs(&orig, &contr);
    ensure!(
        (p.pairs, p.wins, p.ties, p.losses) == (o.pairs, o.wins, o.ties, o.losses),
        "seed {seed}: pair counts"
    );
    ensure!(p.wins + p.ties + p.losses == p.pairs, "seed {seed}: pair partition");
    ensure!(
        close(p.mean_delta, o.delta_sum as f64 / (o.pairs.max(1) * 100) as f64, 1e-9),
        "seed {seed}: mean delta"
    );
    ensure!(
        p.unpaired_original == orig.len() - o.pairs && p.unpaired_contractual == contr.len() - o.pairs,
        "seed {seed}: unpaired counts"
    );
    let o_split = split_variant(&orig, "ORIGINAL");
    ensure!(o_split.len() == orig.len(), "seed {seed}: split_variant");
    Ok(())
}

pub fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    for seed in 0..50 {
        check_set(1000 + seed)?;
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(30), "took {elapsed:?}");
    Ok(format!("50 random record sets, {:.2} s", elapsed.as_secs_f64()))
}

// ---------------------------------------------------------------------------
// 8. Replication data

pub const REPLICATION_ENV: &str = "SKILLCTL_REPLICATION_DIR";

fn csvs(dir: &Path) -> Result<Vec<PathBuf>, String> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| format!("{}: {e}", dir.display()))?
        .map(|e| e.expect("dir entry").path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    v.sort();
    Ok(v)
}

/// `None` when no replication data is configured. The directory must hold
/// `text/*.csv` (condition study) and/or `market/*.csv` (variant study).
pub fn replication() -> Option<Outcome> {
    let dir = PathBuf::from(std::env::var_os(REPLICATION_ENV)?);
    Some((|| {
        let mut done = Vec::new();
        let text = dir.join("text");
        if text.is_dir() {
            compare_text_study(&text_study_stats(&csvs(&text)?)?, 1e-3 + 1e-9)?;
            done.push("text study");
        }
        let market = dir.join("market");
        if market.is_dir() {
            compare_market(&market_stats(&csvs(&market)?)?, 1e-3 + 1e-9)?;
            done.push("market study");
        }
        ensure!(!done.is_empty(), "{} has neither text/ nor market/", dir.display());
        Ok(done.join(" and ") + " reproduced within 0.001")
    })())
}
