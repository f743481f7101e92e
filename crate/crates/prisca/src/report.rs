//! Detection report document and its JSON / key-value CSV serializations.
//!
//! JSON is the primary format and round-trips losslessly. The CSV rendering
//! flattens the same document into `key,value` rows (nested fields dotted,
//! scalar lists pipe-joined) so both formats carry identical numeric content.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::summaries::CredibleSet;

/// What was analyzed: source, shape, and the axis indices refer to after
/// preprocessing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputDigest {
    pub source: String,
    /// Instants in the analyzed series (after any preprocessing).
    pub length: usize,
    pub num_samples: usize,
    /// Preprocessing steps applied, in order.
    pub preprocessing: Vec<String>,
    /// Axis of every index in this report: "original", "differenced" (one
    /// step short, locations ambiguous by one), or "ar-residual" (offset by
    /// the autoregression order).
    pub axis: String,
}

/// Model settings the report was produced under.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub a0: f64,
    pub sigma2: f64,
    pub l: usize,
    pub p: f64,
    pub epsilon: f64,
    pub max_iter: usize,
    /// "fixed" or "auto".
    pub mode: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EffectStatus {
    /// Counted in `k_hat`.
    Kept,
    /// Credible set too wide to call a change.
    Diffuse,
    /// Concentrated but overlapping a stronger effect's set.
    Overlap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectReport {
    pub effect: usize,
    pub point_estimate: usize,
    pub credible_set: CredibleSet,
    pub status: EffectStatus,
    /// Full posterior location weights, present under `--emit-alpha`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Vec<f64>>,
}

/// Automatic effect-count search summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AutoEcho {
    pub k_hat_trace: Vec<usize>,
    pub capped: bool,
}

/// Autoregression summary when `--ar` ran.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArEcho {
    pub order: usize,
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub outer_iterations: usize,
}

/// Run metadata; dropped under `--no-meta` so reports compare byte-identical.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub timing_seconds: f64,
    /// Unix seconds.
    pub generated_at: u64,
}

/// Full detection report for one input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub input: InputDigest,
    pub config: ConfigEcho,
    pub k_hat: usize,
    pub converged: bool,
    pub effects: Vec<EffectReport>,
    pub elbo_trace: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub auto: Option<AutoEcho>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ar: Option<ArEcho>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub meta: Option<Meta>,
}

/// Pretty JSON with a trailing newline.
pub fn to_json(doc: &ReportDocument) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("report serializes");
    s.push('\n');
    s
}

/// Pretty JSON array for multi-input runs.
pub fn to_json_many(docs: &[ReportDocument]) -> String {
    let mut s = serde_json::to_string_pretty(docs).expect("reports serialize");
    s.push('\n');
    s
}

pub fn from_json(text: &str) -> Result<ReportDocument> {
    serde_json::from_str(text)
        .map_err(|e| Error::InvalidInput(format!("report does not parse: {e}")))
}

/// `key,value` CSV rendering of the document. Keys are dotted paths, lists of
/// scalars are pipe-joined, lists of objects get a numeric path segment.
pub fn to_csv(doc: &ReportDocument) -> String {
    let root = serde_json::to_value(doc).expect("report serializes");
    let mut out = String::from("key,value\n");
    flatten("", &root, &mut out);
    out
}

fn flatten(prefix: &str, value: &serde_json::Value, out: &mut String) {
    use serde_json::Value;
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, v, out);
            }
        }
        Value::Array(items) if items.iter().any(|v| v.is_object() || v.is_array()) => {
            for (i, v) in items.iter().enumerate() {
                flatten(&format!("{prefix}.{i}"), v, out);
            }
        }
        Value::Array(items) => {
            let joined =
                items.iter().map(render_scalar).collect::<Vec<_>>().join("|");
            push_row(prefix, &joined, out);
        }
        scalar => push_row(prefix, &render_scalar(scalar), out),
    }
}

fn render_scalar(v: &serde_json::Value) -> String {
    match v {
        serde_json::Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn push_row(key: &str, value: &str, out: &mut String) {
    out.push_str(key);
    out.push(',');
    if value.contains(',') || value.contains('"') || value.contains('\n') {
        out.push('"');
        out.push_str(&value.replace('"', "\"\""));
        out.push('"');
    } else {
        out.push_str(value);
    }
    out.push('\n');
}
