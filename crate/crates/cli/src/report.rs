//! Serializable report records and their text/CSV renderings.

use chacha_rot::exact::RenderedValue;
use chacha_rot::search::{CensusResult, MeanEstimate, SampledEstimate};
use chacha_rot::tables::{CensusRow, RoundBoundRow};
use chacha_rot::BoundsPair;
use serde::{Deserialize, Serialize};

pub const SCHEMA_PREFIX: &str = "chacha-rot";

pub fn schema(name: &str) -> String {
    format!("{SCHEMA_PREFIX}/{name}/v1")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub schema: String,
    pub word_bits: u32,
    pub rot: u32,
    pub variant: String,
    pub daum: RenderedValue,
    pub chain: RenderedValue,
    pub triple: RenderedValue,
    pub lower: RenderedValue,
    pub upper: RenderedValue,
    pub ordered: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundBoundEntry {
    pub round: u32,
    pub lower: RenderedValue,
    pub upper: RenderedValue,
    pub ordered: bool,
}

impl RoundBoundEntry {
    pub fn from_row(row: &RoundBoundRow) -> Self {
        RoundBoundEntry {
            round: row.round,
            lower: row.bounds.lower.render(),
            upper: row.bounds.upper.render(),
            ordered: row.bounds.is_ordered(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PermBoundsReport {
    pub schema: String,
    pub word_bits: u32,
    pub rot: u32,
    pub variant: String,
    /// Rounds are assumed to see independent uniform inputs.
    pub heuristic: bool,
    pub rows: Vec<RoundBoundEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensusReport {
    pub schema: String,
    #[serde(flatten)]
    pub result: CensusResult,
    /// Exact formula value this census is checked against, if any.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub formula: Option<RenderedValue>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub matches_formula: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleReport {
    pub schema: String,
    #[serde(flatten)]
    pub estimate: SampledEstimate,
    pub heuristic_lower: RenderedValue,
    pub heuristic_upper: RenderedValue,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedCountReport {
    pub schema: String,
    pub word_bits: u32,
    pub k: u32,
    pub rot: u32,
    pub count: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpectationReport {
    pub schema: String,
    pub word_bits: u32,
    pub k: u32,
    pub rot: u32,
    pub expected: RenderedValue,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub monte_carlo: Option<MeanEstimate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistinguishReport {
    pub schema: String,
    pub oracle: String,
    pub word_bits: u32,
    pub rots: [u32; 4],
    pub rot: u32,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub rounds: Option<u32>,
    pub budget: u64,
    pub trials: u64,
    pub seed: u64,
    pub true_positives: u64,
    pub false_positives: u64,
    pub tpr: f64,
    pub fpr: f64,
    pub advantage: f64,
    pub tpr_interval: (f64, f64),
    pub fpr_interval: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Entry {
    pub word_bits: u32,
    pub rots: [u32; 4],
    pub rot: u32,
    pub collisions: u64,
    pub lower: RenderedValue,
    pub measured: RenderedValue,
    pub upper: RenderedValue,
    pub random_p: RenderedValue,
    pub within_bounds: bool,
}

impl Table1Entry {
    pub fn from_row(row: &CensusRow) -> Self {
        Table1Entry {
            word_bits: row.spec.word_bits,
            rots: row.spec.rots,
            rot: row.spec.rot,
            collisions: row.count,
            lower: row.bounds.lower.render(),
            measured: row.measured.render(),
            upper: row.bounds.upper.render(),
            random_p: row.random_p.render(),
            within_bounds: row.bounds.contains(&row.measured),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Report {
    pub schema: String,
    pub variant: String,
    pub source: String,
    pub rows: Vec<Table1Entry>,
}

/// `~2^-6.83` without the `~2^` prefix.
pub fn bare_log2(v: &RenderedValue) -> &str {
    v.log2.trim_start_matches("~2^")
}

pub fn rots_field(rots: [u32; 4]) -> String {
    rots.map(|r| r.to_string()).join(" ")
}

pub fn bounds_pair_text(b: &BoundsPair) -> String {
    format!("lower {}\nupper {}", b.lower.render(), b.upper.render())
}

pub const TABLE1_CSV_HEADER: &str = "word_bits,rots,r,collisions,lower,measured,upper,p";

pub fn table1_csv(report: &Table1Report) -> String {
    let mut out = String::from(TABLE1_CSV_HEADER);
    out.push('\n');
    for row in &report.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},2^{}\n",
            row.word_bits,
            rots_field(row.rots),
            row.rot,
            row.collisions,
            row.lower.decimal,
            row.measured.decimal,
            row.upper.decimal,
            bare_log2(&row.random_p),
        ));
    }
    out
}

pub fn table1_text(report: &Table1Report) -> String {
    let mut out = String::new();
    let mut current = None;
    for row in &report.rows {
        if current != Some((row.word_bits, row.rots)) {
            if current.is_some() {
                out.push('\n');
            }
            current = Some((row.word_bits, row.rots));
            let [r1, r2, r3, r4] = row.rots;
            out.push_str(&format!(
                "w = {}, (r1, r2, r3, r4) = ({r1},{r2},{r3},{r4})\n",
                row.word_bits
            ));
            out.push_str(&format!(
                "{:>2} {:>12}  {:<18} {:<9} {:<18} {}\n",
                "r", "#collisions", "lower bound", "measured", "upper bound", "p"
            ));
        }
        out.push_str(&format!(
            "{:>2} {:>12}  {:<18} {:<9} {:<18} {}{}\n",
            row.rot,
            row.collisions,
            format!("{} {}", row.lower.decimal, row.lower.log2),
            row.measured.decimal,
            format!("{} {}", row.upper.decimal, row.upper.log2),
            row.random_p.log2,
            if row.within_bounds {
                ""
            } else {
                "  (outside bounds)"
            },
        ));
    }
    out
}

pub fn round_rows_csv(rows: &[RoundBoundEntry]) -> String {
    let mut out = String::from("round,lower_log2,upper_log2\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{}\n",
            row.round,
            bare_log2(&row.lower),
            bare_log2(&row.upper),
        ));
    }
    out
}

pub fn round_rows_text(rows: &[RoundBoundEntry]) -> String {
    let mut out = format!("{:>5}  {:<14} {:<14}\n", "round", "lower", "upper");
    for row in rows {
        out.push_str(&format!(
            "{:>5}  {:<14} {:<14}{}\n",
            row.round,
            row.lower.log2,
            row.upper.log2,
            if row.ordered { "" } else { "  (lower > upper)" },
        ));
    }
    out
}

pub fn census_csv(report: &CensusReport) -> String {
    let r = &report.result;
    let c = &r.config;
    let mut header = String::from("mode,word_bits,rots,r,k,count,total,probability,log2");
    let mut line = format!(
        "{},{},{},{},{},{},{},{},{}",
        serde_json::to_value(c.mode)
            .unwrap()
            .as_str()
            .unwrap_or_default(),
        c.word_bits,
        c.rots.map(rots_field).unwrap_or_default(),
        c.rot,
        c.k.map(|k| k.to_string()).unwrap_or_default(),
        r.count,
        r.total,
        r.probability.render().decimal,
        bare_log2(&r.probability.render()),
    );
    if let Some(formula) = &report.formula {
        header.push_str(",formula,matches");
        line.push_str(&format!(
            ",{},{}",
            formula.short(),
            report.matches_formula.unwrap_or(false)
        ));
    }
    format!("{header}\n{line}\n")
}

pub fn census_text(report: &CensusReport) -> String {
    let r = &report.result;
    let c = &r.config;
    let mut out = format!(
        "{} census, w = {}{}, r = {}{}\n",
        serde_json::to_value(c.mode)
            .unwrap()
            .as_str()
            .unwrap_or_default(),
        c.word_bits,
        c.rots
            .map(|[a, b, d, e]| format!(", (r1, r2, r3, r4) = ({a},{b},{d},{e})"))
            .unwrap_or_default(),
        c.rot,
        c.k.map(|k| format!(", k = {k}")).unwrap_or_default(),
    );
    out.push_str(&format!("count       {} of {}\n", r.count, r.total));
    out.push_str(&format!("probability {}\n", r.probability.render()));
    if let Some(formula) = &report.formula {
        out.push_str(&format!(
            "formula     {}  ({})\n",
            formula,
            if report.matches_formula == Some(true) {
                "exact match"
            } else {
                "MISMATCH"
            }
        ));
    }
    out
}
