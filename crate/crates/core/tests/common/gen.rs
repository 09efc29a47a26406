//! Seeded random inputs.

use std::collections::BTreeMap;

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};
use skillctl_core::contract::{
    normalize_section_name, AliasTable, ExtraSection, FieldContent, FieldKind, HandoffRoute,
    InputItem, PrivacyClass, Structured, TaskContract, TemplateVariant,
};
use skillctl_core::harness::{
    simulate_call, ParamSpec, ParamType, RiskClass, ToolRegistry, ToolSpec, Transcript,
};
use skillctl_core::metrics::{Dimension, JudgeRecord};
use skillctl_core::Condition;

const WORDS: &[&str] = &[
    "account", "renewal", "customer", "ledger", "invoice", "draft", "review", "record",
    "pipeline", "scope", "budget", "owner", "deadline", "clause", "risk", "team", "summary",
    "release", "approval", "partner", "forecast", "quarter", "ticket", "change", "evidence",
    "metric", "region", "vendor", "policy", "report", "north", "café", "naïve", "data",
];

const PUNCT: &[&str] = &[
    ",", ":", ";", " (note)", " \"quoted\"", " 'single'", " #tag", " 50%", " $10", " a/b",
    " x: y", " - dash", " [link]", " {brace}", " *stress*", " `code`", " 1.5", " ~tilde",
];

fn word(rng: &mut ChaCha8Rng) -> &'static str {
    WORDS.choose(rng).expect("non-empty")
}

fn words(rng: &mut ChaCha8Rng, lo: usize, hi: usize) -> String {
    let n = rng.random_range(lo..=hi);
    (0..n).map(|_| word(rng)).collect::<Vec<_>>().join(" ")
}

pub fn sentence(rng: &mut ChaCha8Rng) -> String {
    let mut s = String::new();
    let n = rng.random_range(3..=9);
    for i in 0..n {
        if i > 0 {
            s.push(' ');
        }
        let w = word(rng);
        if i == 0 {
            let mut c = w.chars();
            let first = c.next().expect("non-empty word");
            s.extend(first.to_uppercase());
            s.push_str(c.as_str());
        } else {
            s.push_str(w);
        }
        if rng.random_bool(0.15) {
            s.push_str(PUNCT.choose(rng).expect("non-empty"));
        }
    }
    s.push('.');
    s
}

/// Markdown prose with no headings, fences or structured-bullet lookalikes.
pub fn prose(rng: &mut ChaCha8Rng) -> String {
    let paragraphs = rng.random_range(1..=3);
    let mut blocks = Vec::new();
    for _ in 0..paragraphs {
        let block = match rng.random_range(0..4) {
            0 => (0..rng.random_range(2..=4))
                .map(|_| format!("- {} {}", word(rng), words(rng, 1, 6)))
                .collect::<Vec<_>>()
                .join("\n"),
            1 => (1..=rng.random_range(2..=4))
                .map(|i| format!("{i}. {}", sentence(rng)))
                .collect::<Vec<_>>()
                .join("\n"),
            2 => format!("{}\n  {}", sentence(rng), sentence(rng)),
            _ => (0..rng.random_range(1..=3))
                .map(|_| sentence(rng))
                .collect::<Vec<_>>()
                .join(" "),
        };
        blocks.push(block);
    }
    blocks.join("\n\n")
}

/// Single-line value for a structured entry.
fn value(rng: &mut ChaCha8Rng) -> String {
    match rng.random_range(0..4) {
        0 => format!("{}/{}.csv", word(rng), word(rng)),
        1 => format!("{}: {}", word(rng), words(rng, 1, 3)),
        _ => words(rng, 1, 4),
    }
}

fn title(rng: &mut ChaCha8Rng) -> String {
    let mut t = words(rng, 1, 3);
    if let Some(first) = t.get_mut(0..1) {
        first.make_ascii_uppercase();
    }
    t
}

fn structured(rng: &mut ChaCha8Rng, kind: FieldKind) -> Structured {
    let mut s = Structured::empty_for(kind);
    if rng.random_bool(0.3) {
        return s;
    }
    match &mut s {
        Structured::None => {}
        Structured::Inputs { items } => {
            for _ in 0..rng.random_range(1..=4) {
                items.push(InputItem {
                    name: words(rng, 1, 3),
                    required: rng.random_bool(0.6),
                    path: rng.random_bool(0.4).then(|| value(rng)),
                    privacy: rng.random_bool(0.4).then(|| {
                        *[
                            PrivacyClass::Public,
                            PrivacyClass::Internal,
                            PrivacyClass::Confidential,
                            PrivacyClass::Restricted,
                        ]
                        .choose(rng)
                        .expect("non-empty")
                    }),
                });
            }
        }
        Structured::Permissions { allowed, forbidden } => {
            for _ in 0..rng.random_range(0..=3) {
                allowed.push(value(rng));
            }
            for _ in 0..rng.random_range(1..=3) {
                forbidden.push(value(rng));
            }
        }
        Structured::Output {
            required_sections,
            max_words,
            language,
        } => {
            for _ in 0..rng.random_range(0..=4) {
                required_sections.push(title(rng));
            }
            *max_words = rng.random_bool(0.5).then(|| rng.random_range(50..2000));
            *language = rng.random_bool(0.3).then(|| "English".to_owned());
        }
        Structured::HumanGates { gates } => {
            for _ in 0..rng.random_range(1..=3) {
                gates.push(value(rng));
            }
        }
        Structured::Handoff { routes } => {
            for _ in 0..rng.random_range(1..=3) {
                routes.push(HandoffRoute {
                    target: words(rng, 1, 2),
                    trigger: if rng.random_bool(0.2) {
                        String::new()
                    } else {
                        value(rng)
                    },
                });
            }
        }
    }
    s
}

/// A random contract inside the lossless Markdown convention.
pub fn contract(rng: &mut ChaCha8Rng) -> TaskContract {
    let mut c = TaskContract::default();
    let name: Vec<&str> = (0..rng.random_range(1..=3)).map(|_| word(rng)).collect();
    c.metadata.insert("name", name.join("-"));
    c.metadata.insert("description", sentence(rng));
    if rng.random_bool(0.5) {
        let v = TemplateVariant::ALL.choose(rng).expect("non-empty");
        c.metadata.insert("template", v.key());
    }
    if rng.random_bool(0.3) {
        c.metadata.insert("owner", words(rng, 1, 2));
    }
    c.preamble = match rng.random_range(0..3) {
        0 => String::new(),
        1 => sentence(rng),
        _ => format!("# {}\n\n{}", title(rng), sentence(rng)),
    };
    for kind in FieldKind::ALL {
        if rng.random_bool(0.15) {
            continue;
        }
        let s = structured(rng, kind);
        let text = if s.is_empty() || rng.random_bool(0.8) {
            prose(rng)
        } else {
            String::new()
        };
        c.fields.insert(kind, FieldContent { text, structured: s });
    }
    let aliases = AliasTable::default();
    for _ in 0..rng.random_range(0..=2) {
        let t = format!("Appendix {}", title(rng));
        if normalize_section_name(&t, &aliases).is_none() {
            c.extras.push(ExtraSection {
                title: t,
                body: prose(rng),
            });
        }
    }
    c
}

// ---------------------------------------------------------------------------
// Tool harness

pub fn registry(rng: &mut ChaCha8Rng) -> ToolRegistry {
    let mut tools = Vec::new();
    let n = rng.random_range(2..=8);
    for i in 0..n {
        let risk = if i == 0 {
            RiskClass::ReadOnly
        } else if i == 1 {
            RiskClass::HighRiskWrite
        } else if rng.random_bool(0.5) {
            RiskClass::ReadOnly
        } else {
            RiskClass::HighRiskWrite
        };
        let params = (0..rng.random_range(0..=3))
            .map(|p| ParamSpec {
                name: format!("p{p}"),
                ty: *[ParamType::String, ParamType::Int, ParamType::Bool]
                    .choose(rng)
                    .expect("non-empty"),
                required: rng.random_bool(0.5),
            })
            .collect();
        tools.push(ToolSpec {
            name: format!("tool_{i}"),
            risk,
            description: String::new(),
            param_schema: params,
            action_lexemes: match risk {
                RiskClass::HighRiskWrite => vec![["sent", "deleted", "approved", "merged", "updated"]
                    .choose(rng)
                    .expect("non-empty")
                    .to_string()],
                RiskClass::ReadOnly => Vec::new(),
            },
        });
    }
    ToolRegistry::new(tools).expect("generated registry is valid")
}

pub fn args(rng: &mut ChaCha8Rng) -> Map<String, Value> {
    let mut m = Map::new();
    for p in 0..rng.random_range(0..=4) {
        let v = match rng.random_range(0..5) {
            0 => json!(rng.random_range(-5..100)),
            1 => json!(rng.random_bool(0.5)),
            2 => Value::Null,
            3 => json!([1, "two"]),
            _ => json!(word(rng)),
        };
        m.insert(format!("p{p}"), v);
    }
    m
}

/// A call target: a registered tool most of the time, occasionally unknown.
pub fn tool_name(rng: &mut ChaCha8Rng, registry: &ToolRegistry) -> String {
    if rng.random_bool(0.05) {
        "no_such_tool".to_owned()
    } else {
        registry.tools().choose(rng).expect("non-empty").name.clone()
    }
}

const FINALS: &[&str] = &[
    "Done.",
    "The email has been sent to the customer.",
    "I approved the request and merged the change.",
    "The record was deleted successfully.",
    "The action was blocked; it needs approval from the owner.",
    "I drafted the update. Handoff to finance for sign-off.",
    "Everything is updated now.",
    "I have updated the forecast, pending approval from the manager.",
    "",
];

pub fn transcript(
    rng: &mut ChaCha8Rng,
    registry: &ToolRegistry,
    models: &[&str],
    run: usize,
) -> Transcript {
    let mut seq = rng.random_range(0..3u64);
    let mut calls = Vec::new();
    for _ in 0..rng.random_range(0..=10) {
        let tool = tool_name(rng, registry);
        calls.push(simulate_call(registry, seq, &tool, &args(rng)));
        seq += rng.random_range(1..=3);
    }
    Transcript {
        run_id: format!("run-{run}"),
        model: models.choose(rng).expect("non-empty").to_string(),
        condition: *Condition::ALL.choose(rng).expect("non-empty"),
        task_id: format!("task-{}", rng.random_range(0..6)),
        challenge_mode: rng.random_bool(0.5),
        calls,
        final_message: FINALS.choose(rng).expect("non-empty").to_string(),
    }
}

// ---------------------------------------------------------------------------
// Judge records

/// Scores on a 0.01 grid, returned with their integer hundredths.
pub fn cents(rng: &mut ChaCha8Rng) -> i64 {
    rng.random_range(100..=500)
}

pub struct RecordSetShape {
    pub models: Vec<String>,
    pub judges: Vec<String>,
    pub outputs: usize,
    pub duplicate_rate: f64,
    pub variants: bool,
}

impl RecordSetShape {
    pub fn random(rng: &mut ChaCha8Rng) -> Self {
        let all = ["m-a", "m-b", "m-c", "m-d", "m-e"];
        let n = rng.random_range(2..=5);
        let models: Vec<String> = all[..n].iter().map(|s| s.to_string()).collect();
        let judges: Vec<String> = models
            .iter()
            .filter(|_| rng.random_bool(0.7))
            .cloned()
            .chain(["j-x".to_owned()])
            .collect();
        RecordSetShape {
            models,
            judges,
            outputs: rng.random_range(5..=120),
            duplicate_rate: rng.random_range(0.0..0.3),
            variants: rng.random_bool(0.5),
        }
    }
}

fn record(
    rng: &mut ChaCha8Rng,
    run_id: &str,
    model: &str,
    judge: &str,
    skill: &str,
    task: &str,
    condition: &str,
    repeat: u32,
) -> JudgeRecord {
    let mut scores = BTreeMap::new();
    for dim in Dimension::ALL {
        if dim == Dimension::Quality || rng.random_bool(0.8) {
            scores.insert(dim, cents(rng) as f64 / 100.0);
        }
    }
    JudgeRecord {
        run_id: run_id.to_owned(),
        output_id: run_id.to_owned(),
        gen_model: model.to_owned(),
        judge_model: judge.to_owned(),
        skill_id: skill.to_owned(),
        task_id: task.to_owned(),
        condition: condition.to_owned(),
        repeat: Some(repeat),
        scores,
        critical_error: rng.random_bool(0.1),
        over_execution: rng.random_bool(0.05),
        timestamp: String::new(),
    }
}

/// Judge rows with retry duplicates interleaved. Each output is judged by a
/// random subset of judges, sometimes including its own generator.
pub fn judge_records(rng: &mut ChaCha8Rng, shape: &RecordSetShape) -> Vec<JudgeRecord> {
    let conditions: Vec<&str> = if shape.variants {
        vec!["original", "contractual"]
    } else {
        Condition::ALL.iter().map(|c| c.key()).collect()
    };
    let mut rows = Vec::new();
    for i in 0..shape.outputs {
        let model = shape.models.choose(rng).expect("non-empty").clone();
        let skill = format!("s{}", rng.random_range(0..3));
        let task = format!("t{}", rng.random_range(0..3));
        let repeat = rng.random_range(1..=2);
        let condition = *conditions.choose(rng).expect("non-empty");
        let run_id = format!("out-{i}");
        for judge in &shape.judges {
            if rng.random_bool(0.2) {
                continue;
            }
            let r = record(rng, &run_id, &model, judge, &skill, &task, condition, repeat);
            rows.push(r);
            if rng.random_bool(shape.duplicate_rate) {
                let again = record(rng, &run_id, &model, judge, &skill, &task, condition, repeat);
                rows.push(again);
            }
        }
    }
    // Interleave outputs; relative order within a key is what dedup keys on,
    // so shuffle by swapping only rows with different keys.
    for _ in 0..rows.len() {
        let a = rng.random_range(0..rows.len());
        let b = rng.random_range(0..rows.len());
        let key = |r: &JudgeRecord| (r.run_id.clone(), r.judge_model.clone());
        if key(&rows[a]) != key(&rows[b]) {
            rows.swap(a, b);
        }
    }
    rows
}

/// Complete original/contractual pairs: one row per (skill, task, model,
/// repeat, judge) on each side, plus a few unpaired rows.
pub fn paired_records(rng: &mut ChaCha8Rng) -> (Vec<JudgeRecord>, Vec<JudgeRecord>) {
    let mut orig = Vec::new();
    let mut contr = Vec::new();
    let models = ["m-a", "m-b", "m-c"];
    let judges = ["j-1", "j-2"];
    for s in 0..rng.random_range(1..=4) {
        for t in 0..rng.random_range(1..=4) {
            for m in models {
                for rep in 1..=2 {
                    for j in judges {
                        let skill = format!("s{s}");
                        let task = format!("t{t}");
                        let id = format!("{skill}-{task}-{m}-{rep}");
                        let keep_o = rng.random_bool(0.95);
                        let keep_c = rng.random_bool(0.95);
                        let mut o = record(rng, &format!("o-{id}"), m, j, &skill, &task, "original", rep);
                        let mut c = record(rng, &format!("c-{id}"), m, j, &skill, &task, "contractual", rep);
                        if rng.random_bool(0.3) {
                            let q = o.scores[&Dimension::Quality];
                            c.scores.insert(Dimension::Quality, q);
                        }
                        // Half-point steps as in rubric-style judging.
                        if rng.random_bool(0.5) {
                            for r in [&mut o, &mut c] {
                                let q = r.scores[&Dimension::Quality];
                                r.scores.insert(Dimension::Quality, (q * 2.0).round() / 2.0);
                            }
                        }
                        if keep_o {
                            orig.push(o);
                        }
                        if keep_c {
                            contr.push(c);
                        }
                    }
                }
            }
        }
    }
    (orig, contr)
}
