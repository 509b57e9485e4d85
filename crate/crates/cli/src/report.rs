//! Report structure written to standard output as TOML. The pass flag
//! is always derived from the residual summary: exact-zero reports
//! pass when the counted defects are zero, max-abs reports pass when
//! the worst magnitude is within the echoed tolerance.

use serde::Serialize;

use duality_core::duality::DualityReport;
use duality_core::scalar::{Backend, Scalar};

#[derive(Serialize)]
pub struct Report {
    pub command: String,
    pub backend: String,
    pub pass: bool,
    pub inputs: toml::value::Table,
    pub residual: ResidualSummary,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub witnesses: Vec<Witness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub details: Option<toml::value::Table>,
}

#[derive(Serialize)]
pub struct ResidualSummary {
    /// "exact-zero": value counts nonzero residual entries.
    /// "max-abs": value is the worst magnitude, compared against the
    /// tolerance echoed in the inputs.
    pub kind: String,
    pub value: String,
}

impl ResidualSummary {
    pub fn exact(defects: usize) -> Self {
        ResidualSummary { kind: "exact-zero".into(), value: defects.to_string() }
    }

    pub fn max_abs(worst: f64) -> Self {
        ResidualSummary { kind: "max-abs".into(), value: format!("{worst:e}") }
    }
}

#[derive(Serialize)]
pub struct Witness {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub row: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub col: Option<usize>,
    pub value: String,
}

impl Witness {
    pub fn entry(row: usize, col: usize, value: impl ToString) -> Self {
        Witness { row: Some(row), col: Some(col), value: value.to_string() }
    }

    pub fn row(row: usize, value: impl ToString) -> Self {
        Witness { row: Some(row), col: None, value: value.to_string() }
    }

    pub fn note(value: impl ToString) -> Self {
        Witness { row: None, col: None, value: value.to_string() }
    }
}

pub fn backend_name(backend: Backend) -> String {
    backend.to_string()
}

/// Residual summary and witnesses of a duality or intertwining report.
pub fn duality_outcome<T: Scalar>(rep: &DualityReport<T>) -> (ResidualSummary, Vec<Witness>) {
    let witnesses = rep
        .witnesses
        .iter()
        .map(|(r, c, v)| Witness::entry(*r, *c, v))
        .collect();
    let summary = match rep.backend {
        Backend::Exact => ResidualSummary::exact(rep.residual.nnz()),
        Backend::Float => ResidualSummary::max_abs(rep.worst),
    };
    (summary, witnesses)
}

/// Inputs-echo table built in insertion order.
pub fn kv(pairs: Vec<(&str, toml::Value)>) -> toml::value::Table {
    let mut table = toml::value::Table::new();
    for (k, v) in pairs {
        table.insert(k.to_string(), v);
    }
    table
}

pub fn tv_str(s: impl ToString) -> toml::Value {
    toml::Value::String(s.to_string())
}

pub fn tv_int(n: usize) -> toml::Value {
    toml::Value::Integer(n as i64)
}

pub fn tv_bool(b: bool) -> toml::Value {
    toml::Value::Boolean(b)
}

pub fn tv_float(x: f64) -> toml::Value {
    toml::Value::Float(x)
}
