//! Judge-record ingestion and aggregation.
//!
//! All aggregates are kept at full precision. [`round_half_up`] is applied
//! only when a table is rendered.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::compiler::Condition;
use crate::error::{Error, Result};
use crate::harness::render_grid;

/// Two deltas closer than this count as a tie.
pub const TIE_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dimension {
    Quality,
    Utility,
    Governance,
    Reliability,
}

impl Dimension {
    pub const ALL: [Dimension; 4] = [
        Dimension::Quality,
        Dimension::Utility,
        Dimension::Governance,
        Dimension::Reliability,
    ];

    pub fn key(self) -> &'static str {
        match self {
            Dimension::Quality => "quality",
            Dimension::Utility => "utility",
            Dimension::Governance => "governance",
            Dimension::Reliability => "reliability",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JudgeRecord {
    pub run_id: String,
    pub output_id: String,
    pub gen_model: String,
    pub judge_model: String,
    pub skill_id: String,
    pub task_id: String,
    /// Instruction condition (text study) or variant (A/B study).
    pub condition: String,
    /// Repeat index, when the file carries one. Needed for pairing.
    pub repeat: Option<u32>,
    /// Every score lies in [1, 5]. `quality` is always present.
    pub scores: BTreeMap<Dimension, f64>,
    pub critical_error: bool,
    pub over_execution: bool,
    pub timestamp: String,
}

impl JudgeRecord {
    pub fn quality(&self) -> f64 {
        self.scores[&Dimension::Quality]
    }
}

// ---------------------------------------------------------------------------
// CSV

const REQUIRED_COLUMNS: [&str; 8] = [
    "run_id",
    "output_id",
    "gen_model",
    "judge_model",
    "skill_id",
    "task_id",
    "condition",
    "quality",
];

fn canonical_column(name: &str) -> &str {
    match name {
        "variant" | "condition_or_variant" => "condition",
        "score" => "quality",
        other => other,
    }
}

fn parse_flag(raw: &str) -> Option<bool> {
    match raw.trim().to_ascii_lowercase().as_str() {
        "" | "0" | "false" | "no" | "n" | "f" => Some(false),
        "1" | "true" | "yes" | "y" | "t" => Some(true),
        _ => None,
    }
}

/// Parse a judge-record CSV (header row required). Columns are matched by
/// name; `variant` and `score` are accepted for `condition` and `quality`,
/// and columns this tool does not use are ignored. Row numbers in errors are
/// file line numbers.
pub fn read_judge_csv<R: std::io::Read>(input: R) -> Result<Vec<JudgeRecord>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let headers = reader
        .headers()
        .map_err(|e| Error::Records {
            row: 1,
            message: e.to_string(),
        })?
        .clone();
    let mut index: HashMap<&str, usize> = HashMap::new();
    for (i, h) in headers.iter().enumerate() {
        let name = canonical_column(h.trim().trim_start_matches('\u{feff}'));
        if index.insert(name, i).is_some() {
            return Err(Error::Records {
                row: 1,
                message: format!("column `{name}` appears twice"),
            });
        }
    }
    if let Some(missing) = REQUIRED_COLUMNS.iter().find(|c| !index.contains_key(*c)) {
        return Err(Error::Records {
            row: 1,
            message: format!("missing column `{missing}`"),
        });
    }

    let mut out = Vec::new();
    for result in reader.records() {
        let record = result.map_err(|e| Error::Records {
            row: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let row = record.position().map_or(0, |p| p.line() as usize);
        let bad = |message: String| Error::Records { row, message };
        let get = |name: &str| {
            index
                .get(name)
                .and_then(|&i| record.get(i))
                .unwrap_or("")
                .trim()
        };
        let text = |name: &str| -> Result<String> {
            let v = get(name);
            if v.is_empty() {
                Err(bad(format!("`{name}` is empty")))
            } else {
                Ok(v.to_owned())
            }
        };

        let mut scores = BTreeMap::new();
        for dim in Dimension::ALL {
            let raw = get(dim.key());
            if raw.is_empty() {
                if dim == Dimension::Quality {
                    return Err(bad("`quality` is empty".into()));
                }
                continue;
            }
            let value: f64 = raw
                .parse()
                .map_err(|_| bad(format!("`{}` is not a number: `{raw}`", dim.key())))?;
            if !(1.0..=5.0).contains(&value) {
                return Err(bad(format!("`{}` = {value} is outside [1, 5]", dim.key())));
            }
            scores.insert(dim, value);
        }
        let flag = |name: &str| {
            parse_flag(get(name)).ok_or_else(|| bad(format!("`{name}` is not a boolean")))
        };
        let repeat = match get("repeat") {
            "" => None,
            raw => Some(
                raw.parse()
                    .map_err(|_| bad(format!("`repeat` is not an integer: `{raw}`")))?,
            ),
        };
        out.push(JudgeRecord {
            run_id: text("run_id")?,
            output_id: text("output_id")?,
            gen_model: text("gen_model")?,
            judge_model: text("judge_model")?,
            skill_id: text("skill_id")?,
            task_id: text("task_id")?,
            condition: text("condition")?,
            repeat,
            scores,
            critical_error: flag("critical_error")?,
            over_execution: flag("over_execution")?,
            timestamp: get("timestamp").to_owned(),
        });
    }
    Ok(out)
}

pub fn read_judge_file(path: &Path) -> Result<Vec<JudgeRecord>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_judge_csv(std::io::BufReader::new(file)).map_err(|e| match e {
        Error::Records { row, message } => Error::Records {
            row,
            message: format!("{}: {message}", path.display()),
        },
        other => other,
    })
}

/// Write records in the canonical column order.
pub fn write_judge_csv(records: &[JudgeRecord]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let header = [
        "run_id",
        "output_id",
        "gen_model",
        "judge_model",
        "skill_id",
        "task_id",
        "condition",
        "repeat",
        "quality",
        "utility",
        "governance",
        "reliability",
        "critical_error",
        "over_execution",
        "timestamp",
    ];
    w.write_record(header).expect("in-memory write");
    for r in records {
        let score = |d| r.scores.get(&d).map(|v: &f64| v.to_string()).unwrap_or_default();
        w.write_record([
            r.run_id.clone(),
            r.output_id.clone(),
            r.gen_model.clone(),
            r.judge_model.clone(),
            r.skill_id.clone(),
            r.task_id.clone(),
            r.condition.clone(),
            r.repeat.map(|n| n.to_string()).unwrap_or_default(),
            score(Dimension::Quality),
            score(Dimension::Utility),
            score(Dimension::Governance),
            score(Dimension::Reliability),
            r.critical_error.to_string(),
            r.over_execution.to_string(),
            r.timestamp.clone(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("CSV of UTF-8 fields")
}

// ---------------------------------------------------------------------------
// Dedup and cross-judging

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dedup {
    pub records: Vec<JudgeRecord>,
    pub dropped: usize,
}

/// Keep the last record per `(run_id, judge_model)`. Survivors stay at the
/// position of that last occurrence.
pub fn dedup_records(records: Vec<JudgeRecord>) -> Dedup {
    let mut last: HashMap<(&str, &str), usize> = HashMap::new();
    for (i, r) in records.iter().enumerate() {
        last.insert((r.run_id.as_str(), r.judge_model.as_str()), i);
    }
    let keep: Vec<bool> = records
        .iter()
        .enumerate()
        .map(|(i, r)| last[&(r.run_id.as_str(), r.judge_model.as_str())] == i)
        .collect();
    let dropped = keep.iter().filter(|k| !**k).count();
    let records = records
        .into_iter()
        .zip(keep)
        .filter_map(|(r, k)| k.then_some(r))
        .collect();
    Dedup { records, dropped }
}

/// Which judge rows count toward an output's score.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct JudgePolicy {
    /// Drop rows where a model judges its own output.
    pub exclude_self: bool,
    /// Two models that judge each other's outputs exclusively.
    pub reciprocal: Option<(String, String)>,
}

impl JudgePolicy {
    /// Self-exclusion with an optional reciprocal pair.
    pub fn cross_judge(reciprocal: Option<(&str, &str)>) -> Self {
        JudgePolicy {
            exclude_self: true,
            reciprocal: reciprocal.map(|(a, b)| (a.to_owned(), b.to_owned())),
        }
    }

    /// The counterpart judge required for outputs of `gen_model`, if any.
    pub fn counterpart(&self, gen_model: &str) -> Option<&str> {
        let (a, b) = self.reciprocal.as_ref()?;
        if gen_model == a {
            Some(b)
        } else if gen_model == b {
            Some(a)
        } else {
            None
        }
    }

    pub fn eligible(&self, r: &JudgeRecord) -> bool {
        if self.exclude_self && r.judge_model == r.gen_model {
            return false;
        }
        match self.counterpart(&r.gen_model) {
            Some(judge) => r.judge_model == judge,
            None => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputScore {
    pub output_id: String,
    pub gen_model: String,
    pub skill_id: String,
    pub task_id: String,
    pub condition: String,
    /// Mean over eligible judges, per dimension.
    pub scores: BTreeMap<Dimension, f64>,
    pub judges: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossJudge {
    /// In order of each output's first row.
    pub outputs: Vec<OutputScore>,
    /// Outputs left with no eligible judge.
    pub coverage_gaps: Vec<String>,
    pub excluded_rows: usize,
}

/// Per-output scores under `policy`. Records should be deduplicated first.
pub fn cross_judge_aggregate(records: &[JudgeRecord], policy: &JudgePolicy) -> Result<CrossJudge> {
    struct Acc<'a> {
        first: &'a JudgeRecord,
        sums: BTreeMap<Dimension, (f64, usize)>,
        judges: Vec<String>,
    }
    let mut order: Vec<&str> = Vec::new();
    let mut acc: HashMap<&str, Acc> = HashMap::new();
    let mut excluded = 0;
    for r in records {
        let entry = acc.entry(r.output_id.as_str()).or_insert_with(|| {
            order.push(r.output_id.as_str());
            Acc {
                first: r,
                sums: BTreeMap::new(),
                judges: Vec::new(),
            }
        });
        let f = entry.first;
        if (f.gen_model.as_str(), f.condition.as_str(), f.skill_id.as_str(), f.task_id.as_str())
            != (r.gen_model.as_str(), r.condition.as_str(), r.skill_id.as_str(), r.task_id.as_str())
        {
            return Err(Error::Aggregate(format!(
                "output `{}` appears with different generator, condition, skill or task",
                r.output_id
            )));
        }
        if !policy.eligible(r) {
            excluded += 1;
            continue;
        }
        if entry.judges.contains(&r.judge_model) {
            return Err(Error::Aggregate(format!(
                "output `{}` has two rows from judge `{}`; deduplicate first",
                r.output_id, r.judge_model
            )));
        }
        entry.judges.push(r.judge_model.clone());
        for (&dim, &v) in &r.scores {
            let slot = entry.sums.entry(dim).or_insert((0.0, 0));
            slot.0 += v;
            slot.1 += 1;
        }
    }
    let mut outputs = Vec::new();
    let mut gaps = Vec::new();
    for id in order {
        let a = &acc[id];
        if a.judges.is_empty() {
            gaps.push(id.to_owned());
            continue;
        }
        outputs.push(OutputScore {
            output_id: id.to_owned(),
            gen_model: a.first.gen_model.clone(),
            skill_id: a.first.skill_id.clone(),
            task_id: a.first.task_id.clone(),
            condition: a.first.condition.clone(),
            scores: a
                .sums
                .iter()
                .map(|(&d, &(sum, n))| (d, sum / n as f64))
                .collect(),
            judges: a.judges.clone(),
        });
    }
    Ok(CrossJudge {
        outputs,
        coverage_gaps: gaps,
        excluded_rows: excluded,
    })
}

// ---------------------------------------------------------------------------
// Condition means

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cell {
    pub n: usize,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionRow {
    pub model: String,
    pub cells: BTreeMap<Condition, Cell>,
    /// Contractual minus no-skill, from unrounded means.
    pub c_minus_no: Option<f64>,
    /// Contractual minus plain expanded, from unrounded means.
    pub c_minus_plain: Option<f64>,
}

impl ConditionRow {
    pub fn mean(&self, condition: Condition) -> Option<f64> {
        self.cells.get(&condition).map(|c| c.mean)
    }
}

/// Mean quality per (generator, condition); models in order of first
/// appearance.
pub fn condition_means(outputs: &[OutputScore]) -> Result<Vec<ConditionRow>> {
    let mut models: Vec<&str> = Vec::new();
    let mut sums: HashMap<(&str, Condition), (f64, usize)> = HashMap::new();
    for o in outputs {
        let condition = Condition::from_str(&o.condition).map_err(|e| {
            Error::Aggregate(format!("output `{}`: {e}", o.output_id))
        })?;
        let quality = *o.scores.get(&Dimension::Quality).ok_or_else(|| {
            Error::Aggregate(format!("output `{}` has no quality score", o.output_id))
        })?;
        if !models.contains(&o.gen_model.as_str()) {
            models.push(&o.gen_model);
        }
        let slot = sums.entry((o.gen_model.as_str(), condition)).or_insert((0.0, 0));
        slot.0 += quality;
        slot.1 += 1;
    }
    Ok(models
        .into_iter()
        .map(|model| {
            let cells: BTreeMap<Condition, Cell> = Condition::ALL
                .into_iter()
                .filter_map(|c| {
                    sums.get(&(model, c)).map(|&(sum, n)| {
                        (
                            c,
                            Cell {
                                n,
                                mean: sum / n as f64,
                            },
                        )
                    })
                })
                .collect();
            let mean = |c| cells.get(&c).map(|x: &Cell| x.mean);
            let contractual = mean(Condition::Contractual);
            let diff = |other| Some(contractual? - mean(other)?);
            ConditionRow {
                model: model.to_owned(),
                c_minus_no: diff(Condition::NoSkill),
                c_minus_plain: diff(Condition::PlainExpanded),
                cells,
            }
        })
        .collect())
}

// ---------------------------------------------------------------------------
// Variant summary, pairing and rates

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariantRow {
    pub variant: String,
    /// Judge rows.
    pub n: usize,
    pub means: BTreeMap<Dimension, f64>,
    pub critical_errors: usize,
    pub over_executions: usize,
    pub critical_rate: f64,
    pub over_execution_rate: f64,
}

/// Per-variant means and flag rates over judge rows, variants in order of
/// first appearance.
pub fn variant_summary(records: &[JudgeRecord]) -> Vec<VariantRow> {
    let mut order: Vec<&str> = Vec::new();
    let mut groups: HashMap<&str, Vec<&JudgeRecord>> = HashMap::new();
    for r in records {
        groups
            .entry(r.condition.as_str())
            .or_insert_with(|| {
                order.push(r.condition.as_str());
                Vec::new()
            })
            .push(r);
    }
    order
        .into_iter()
        .map(|variant| {
            let rows = &groups[variant];
            let rates = error_rates(rows.iter().copied());
            let mut means = BTreeMap::new();
            for dim in Dimension::ALL {
                let (sum, n) = rows
                    .iter()
                    .filter_map(|r| r.scores.get(&dim))
                    .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
                if n > 0 {
                    means.insert(dim, sum / n as f64);
                }
            }
            VariantRow {
                variant: variant.to_owned(),
                n: rows.len(),
                means,
                critical_errors: rates.critical_errors,
                over_executions: rates.over_executions,
                critical_rate: rates.critical_rate,
                over_execution_rate: rates.over_execution_rate,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Rates {
    pub n: usize,
    pub critical_errors: usize,
    pub over_executions: usize,
    pub critical_rate: f64,
    pub over_execution_rate: f64,
}

/// Flagged rows over all rows; zero rows give zero rates.
pub fn error_rates<'a>(records: impl IntoIterator<Item = &'a JudgeRecord>) -> Rates {
    let (mut n, mut crit, mut over) = (0, 0, 0);
    for r in records {
        n += 1;
        crit += usize::from(r.critical_error);
        over += usize::from(r.over_execution);
    }
    let rate = |k: usize| if n == 0 { 0.0 } else { k as f64 / n as f64 };
    Rates {
        n,
        critical_errors: crit,
        over_executions: over,
        critical_rate: rate(crit),
        over_execution_rate: rate(over),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct PairKey {
    pub skill_id: String,
    pub task_id: String,
    pub gen_model: String,
    pub repeat: Option<u32>,
    pub judge_model: String,
}

impl PairKey {
    pub fn of(r: &JudgeRecord) -> Self {
        PairKey {
            skill_id: r.skill_id.clone(),
            task_id: r.task_id.clone(),
            gen_model: r.gen_model.clone(),
            repeat: r.repeat,
            judge_model: r.judge_model.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairedStats {
    pub pairs: usize,
    pub wins: usize,
    pub ties: usize,
    pub losses: usize,
    /// Mean of contractual minus original quality over complete pairs.
    pub mean_delta: f64,
    pub unpaired_original: usize,
    pub unpaired_contractual: usize,
}

fn index_pairs<'a>(records: &'a [JudgeRecord], side: &str) -> Result<HashMap<PairKey, &'a JudgeRecord>> {
    let mut map = HashMap::new();
    for r in records {
        if map.insert(PairKey::of(r), r).is_some() {
            return Err(Error::Aggregate(format!(
                "two {side} rows share the pairing key of run `{}` (skill, task, model, repeat, judge); \
                 add a `repeat` column or deduplicate",
                r.run_id
            )));
        }
    }
    Ok(map)
}

/// Pair rows on (skill, task, generator, repeat, judge) and compare quality.
pub fn paired_deltas(original: &[JudgeRecord], contractual: &[JudgeRecord]) -> Result<PairedStats> {
    let orig = index_pairs(original, "original")?;
    let contr = index_pairs(contractual, "contractual")?;
    let (mut wins, mut ties, mut losses, mut sum) = (0, 0, 0, 0.0);
    let mut pairs = 0;
    // Walk in file order so the sum is reproducible.
    for c in contractual {
        let Some(o) = orig.get(&PairKey::of(c)) else {
            continue;
        };
        let delta = c.quality() - o.quality();
        pairs += 1;
        sum += delta;
        if delta.abs() < TIE_EPSILON {
            ties += 1;
        } else if delta > 0.0 {
            wins += 1;
        } else {
            losses += 1;
        }
    }
    Ok(PairedStats {
        pairs,
        wins,
        ties,
        losses,
        mean_delta: if pairs == 0 { 0.0 } else { sum / pairs as f64 },
        unpaired_original: orig.len() - pairs,
        unpaired_contractual: contr.len() - pairs,
    })
}

/// Rows with the given variant label (case-insensitive).
pub fn split_variant(records: &[JudgeRecord], variant: &str) -> Vec<JudgeRecord> {
    records
        .iter()
        .filter(|r| r.condition.eq_ignore_ascii_case(variant))
        .cloned()
        .collect()
}

// ---------------------------------------------------------------------------
// Presentation

/// Round half-up (toward +inf) to `places` decimals. A relative guard of a
/// few ulps absorbs binary representation error, so 4.9225 rounds to 4.923.
pub fn round_half_up(x: f64, places: u32) -> f64 {
    let scale = 10f64.powi(places as i32);
    let scaled = x * scale;
    let guard = scaled.abs().max(1.0) * 1e-12;
    let r = (scaled + 0.5 + guard).floor() / scale;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// Three-decimal presentation string.
pub fn fmt3(x: f64) -> String {
    format!("{:.3}", round_half_up(x, 3))
}

pub fn render_condition_table(rows: &[ConditionRow]) -> String {
    let mut grid = vec![vec![
        "Model".to_owned(),
        "No skill".into(),
        "Minimal".into(),
        "Plain".into(),
        "Contractual".into(),
        "C - No".into(),
        "C - Plain".into(),
    ]];
    let opt = |x: Option<f64>| x.map(fmt3).unwrap_or_else(|| "-".into());
    for row in rows {
        let mut line = vec![row.model.clone()];
        line.extend(Condition::ALL.iter().map(|&c| opt(row.mean(c))));
        line.push(opt(row.c_minus_no));
        line.push(opt(row.c_minus_plain));
        grid.push(line);
    }
    render_grid(&grid)
}

fn title_case(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

pub fn render_variant_table(rows: &[VariantRow]) -> String {
    let mut grid = vec![vec![
        "Variant".to_owned(),
        "N".into(),
        "Quality".into(),
        "Utility".into(),
        "Governance".into(),
        "Reliability".into(),
        "Crit. err.".into(),
        "Over-exec.".into(),
    ]];
    for row in rows {
        let mut line = vec![title_case(&row.variant), row.n.to_string()];
        line.extend(
            Dimension::ALL
                .iter()
                .map(|d| row.means.get(d).map(|&m| fmt3(m)).unwrap_or_else(|| "-".into())),
        );
        line.push(fmt3(row.critical_rate));
        line.push(fmt3(row.over_execution_rate));
        grid.push(line);
    }
    render_grid(&grid)
}

pub fn render_paired(p: &PairedStats) -> String {
    let sign = if round_half_up(p.mean_delta, 3) > 0.0 { "+" } else { "" };
    format!(
        "Paired comparisons: {}  wins {}  ties {}  losses {}  mean delta {sign}{}\nUnpaired rows: original {}, contractual {}\n",
        p.pairs,
        p.wins,
        p.ties,
        p.losses,
        fmt3(p.mean_delta),
        p.unpaired_original,
        p.unpaired_contractual
    )
}

// ---------------------------------------------------------------------------
// Study reports

/// Which study shape a record set has.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StudyKind {
    /// Four instruction conditions, cross-judged per output.
    Conditions,
    /// Original versus contractual variants, judged on every row.
    Variants,
}

impl StudyKind {
    /// `Variants` when any row is labeled `original`.
    pub fn detect(records: &[JudgeRecord]) -> StudyKind {
        if records
            .iter()
            .any(|r| r.condition.eq_ignore_ascii_case("original"))
        {
            StudyKind::Variants
        } else {
            StudyKind::Conditions
        }
    }
}

impl fmt::Display for StudyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StudyKind::Conditions => "conditions",
            StudyKind::Variants => "variants",
        })
    }
}

impl FromStr for StudyKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "conditions" | "text" => Ok(StudyKind::Conditions),
            "variants" | "market" | "ab" => Ok(StudyKind::Variants),
            other => Err(format!("unknown study kind `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionStudy {
    pub rows: Vec<ConditionRow>,
    pub outputs: usize,
    pub coverage_gaps: Vec<String>,
    pub excluded_rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariantStudy {
    pub rows: Vec<VariantRow>,
    pub paired: PairedStats,
    pub excluded_rows: usize,
}

/// Everything `stats` reports; also the plot-data export.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatsReport {
    pub study: StudyKind,
    pub input_rows: usize,
    pub duplicate_rows_dropped: usize,
    pub rows: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conditions: Option<ConditionStudy>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variants: Option<VariantStudy>,
}

impl StatsReport {
    pub fn render_text(&self) -> String {
        let mut out = format!(
            "{} rows read, {} retry duplicates dropped, {} rows used\n\n",
            self.input_rows, self.duplicate_rows_dropped, self.rows
        );
        if let Some(c) = &self.conditions {
            out.push_str(&render_condition_table(&c.rows));
            out.push_str(&format!(
                "\n{} outputs scored, {} rows excluded by judge policy, {} coverage gaps\n",
                c.outputs,
                c.excluded_rows,
                c.coverage_gaps.len()
            ));
        }
        if let Some(v) = &self.variants {
            out.push_str(&render_variant_table(&v.rows));
            out.push('\n');
            out.push_str(&render_paired(&v.paired));
            if v.excluded_rows > 0 {
                out.push_str(&format!("{} rows excluded by judge policy\n", v.excluded_rows));
            }
        }
        out
    }
}

/// Dedup, then aggregate as the study kind requires.
pub fn compute_stats(
    records: Vec<JudgeRecord>,
    kind: StudyKind,
    policy: &JudgePolicy,
) -> Result<StatsReport> {
    let input_rows = records.len();
    let Dedup { records, dropped } = dedup_records(records);
    let mut report = StatsReport {
        study: kind,
        input_rows,
        duplicate_rows_dropped: dropped,
        rows: records.len(),
        conditions: None,
        variants: None,
    };
    match kind {
        StudyKind::Conditions => {
            let cj = cross_judge_aggregate(&records, policy)?;
            report.conditions = Some(ConditionStudy {
                rows: condition_means(&cj.outputs)?,
                outputs: cj.outputs.len(),
                coverage_gaps: cj.coverage_gaps,
                excluded_rows: cj.excluded_rows,
            });
        }
        StudyKind::Variants => {
            let before = records.len();
            let eligible: Vec<JudgeRecord> =
                records.into_iter().filter(|r| policy.eligible(r)).collect();
            let excluded_rows = before - eligible.len();
            let original = split_variant(&eligible, "original");
            let contractual = split_variant(&eligible, "contractual");
            report.variants = Some(VariantStudy {
                rows: variant_summary(&eligible),
                paired: paired_deltas(&original, &contractual)?,
                excluded_rows,
            });
        }
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// Manifests

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    #[serde(rename = "study", default)]
    pub studies: Vec<StudyManifest>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyManifest {
    pub name: String,
    /// Ordered `(factor, count)` pairs.
    pub factors: Vec<(String, u64)>,
    pub outputs: u64,
    /// Factor whose levels partition outputs, such as `models`.
    #[serde(default)]
    pub per: Option<String>,
    #[serde(default)]
    pub outputs_per: Option<u64>,
    /// Declared total of judge rows over all files, after dedup.
    #[serde(default)]
    pub judge_rows: Option<u64>,
    #[serde(default)]
    pub judge_files: Vec<JudgeFileManifest>,
    /// Transcript files and the record count they must add up to.
    #[serde(default)]
    pub transcript_files: Vec<PathBuf>,
    #[serde(default)]
    pub transcripts: Option<u64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JudgeFileManifest {
    pub path: PathBuf,
    /// Rows after dedup.
    pub rows: u64,
}

impl Manifest {
    pub fn from_toml_str(text: &str) -> Result<Manifest> {
        toml::from_str(text).map_err(|e| Error::Manifest(e.to_string()))
    }

    pub fn from_path(path: &Path) -> Result<Manifest> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Manifest::from_toml_str(&text)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ManifestCheck {
    pub study: String,
    pub check: String,
    pub expected: u64,
    pub actual: u64,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ManifestReport {
    pub checks: Vec<ManifestCheck>,
    pub ok: bool,
}

impl ManifestReport {
    pub fn render_text(&self) -> String {
        let mut grid = vec![vec![
            "Study".to_owned(),
            "Check".into(),
            "Expected".into(),
            "Actual".into(),
            "Result".into(),
        ]];
        for c in &self.checks {
            grid.push(vec![
                c.study.clone(),
                c.check.clone(),
                c.expected.to_string(),
                c.actual.to_string(),
                if c.ok { "ok" } else { "MISMATCH" }.into(),
            ]);
        }
        render_grid(&grid)
    }

    pub fn find(&self, study: &str, check: &str) -> Option<&ManifestCheck> {
        self.checks
            .iter()
            .find(|c| c.study == study && c.check == check)
    }
}

/// Check that factors multiply to the declared totals and that referenced
/// files hold the declared row counts. Paths resolve against `base_dir`.
pub fn experiment_arithmetic_check(manifest: &Manifest, base_dir: &Path) -> Result<ManifestReport> {
    let mut checks = Vec::new();
    for study in &manifest.studies {
        let mut push = |check: String, expected: u64, actual: u64| {
            checks.push(ManifestCheck {
                study: study.name.clone(),
                check,
                expected,
                actual,
                ok: expected == actual,
            })
        };
        let product = |skip: Option<&str>| {
            study
                .factors
                .iter()
                .filter(|(name, _)| Some(name.as_str()) != skip)
                .map(|(_, n)| *n)
                .product::<u64>()
        };
        let formula = study
            .factors
            .iter()
            .map(|(_, n)| n.to_string())
            .collect::<Vec<_>>()
            .join(" x ");
        push(format!("outputs = {formula}"), study.outputs, product(None));
        if let Some(per) = &study.per {
            if !study.factors.iter().any(|(name, _)| name == per) {
                return Err(Error::Manifest(format!(
                    "study `{}`: `per` names unknown factor `{per}`",
                    study.name
                )));
            }
            if let Some(expected) = study.outputs_per {
                push(format!("outputs per {per}"), expected, product(Some(per)));
            }
        }
        let mut total_rows = 0;
        for file in &study.judge_files {
            let records = read_judge_file(&base_dir.join(&file.path))?;
            let rows = dedup_records(records).records.len() as u64;
            total_rows += rows;
            push(format!("rows in {}", file.path.display()), file.rows, rows);
        }
        if let Some(expected) = study.judge_rows {
            push("judge rows".into(), expected, total_rows);
        }
        if let Some(expected) = study.transcripts {
            let mut n = 0;
            for path in &study.transcript_files {
                let full = base_dir.join(path);
                let text = std::fs::read_to_string(&full).map_err(|e| Error::io(&full, e))?;
                n += crate::harness::read_transcripts(&text)?.len() as u64;
            }
            push("transcript records".into(), expected, n);
        }
    }
    let ok = checks.iter().all(|c| c.ok);
    Ok(ManifestReport { checks, ok })
}
