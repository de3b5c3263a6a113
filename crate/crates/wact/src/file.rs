//! JSON structure files.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Map;
use wact_core::expr::ParseError;
use wact_core::structure::{RawStructure, Structure, StructureError};
use wact_core::{Chart, SamplePlan, ScalarExpr, TensorField, Valence};

use crate::error::CliError;

/// Expression text, or a bare JSON number for convenience.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Text(String),
    Number(f64),
}

impl Entry {
    fn source(&self) -> String {
        match self {
            Entry::Text(s) => s.clone(),
            Entry::Number(v) => format!("{v:?}"),
        }
    }
}

impl From<String> for Entry {
    fn from(s: String) -> Self {
        Entry::Text(s)
    }
}

pub type Matrix = Vec<Vec<Entry>>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructureFile {
    pub name: String,
    pub dimension: usize,
    pub coordinates: Vec<String>,
    pub domain: Map<String, serde_json::Value>,
    pub metric: Matrix,
    pub phi: Matrix,
    #[serde(rename = "Q", default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Matrix>,
    pub xi: Vec<Entry>,
    pub eta: Vec<Entry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
}

/// Base data for the product construction: a `(1,1)` field and a metric on
/// an even-dimensional chart.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhitildeFile {
    pub name: String,
    pub coordinates: Vec<String>,
    pub domain: Map<String, serde_json::Value>,
    pub metric: Matrix,
    pub phitilde: Matrix,
}

fn format_err(msg: impl Into<String>) -> CliError {
    CliError::Format(msg.into())
}

fn read_domain(coords: &[String], domain: &Map<String, serde_json::Value>) -> Result<Vec<(f64, f64)>, CliError> {
    if let Some(extra) = domain.keys().find(|k| !coords.contains(k)) {
        return Err(format_err(format!("domain names unknown coordinate `{extra}`")));
    }
    coords
        .iter()
        .map(|c| {
            let pair: [f64; 2] = domain
                .get(c)
                .ok_or_else(|| format_err(format!("domain has no interval for `{c}`")))
                .and_then(|v| {
                    serde_json::from_value(v.clone())
                        .map_err(|_| format_err(format!("domain interval for `{c}` must be [lo, hi]")))
                })?;
            Ok((pair[0], pair[1]))
        })
        .collect()
}

fn write_domain(chart: &Chart) -> Map<String, serde_json::Value> {
    chart
        .coords()
        .iter()
        .zip(chart.domain())
        .map(|(c, &(lo, hi))| (c.clone(), serde_json::json!([lo, hi])))
        .collect()
}

fn parse_entry(field: &str, at: &str, e: &Entry, chart: &Chart) -> Result<ScalarExpr, CliError> {
    ScalarExpr::parse(&e.source(), chart.coords()).map_err(|source| CliError::Expression {
        location: format!("{field}{at}"),
        source,
    })
}

fn matrix_field(field: &str, m: &Matrix, chart: &Chart, valence: Valence) -> Result<TensorField, CliError> {
    let n = chart.dim();
    if m.len() != n || m.iter().any(|r| r.len() != n) {
        return Err(format_err(format!("`{field}` must be a {n}x{n} matrix")));
    }
    let comps = m
        .iter()
        .enumerate()
        .flat_map(|(i, row)| row.iter().enumerate().map(move |(j, e)| (i, j, e)))
        .map(|(i, j, e)| parse_entry(field, &format!("[{i}][{j}]"), e, chart))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(TensorField::new(chart, valence, comps).expect("shape checked above"))
}

fn vector_field(field: &str, v: &[Entry], chart: &Chart, valence: Valence) -> Result<TensorField, CliError> {
    let n = chart.dim();
    if v.len() != n {
        return Err(format_err(format!("`{field}` must have {n} entries")));
    }
    let comps = v
        .iter()
        .enumerate()
        .map(|(i, e)| parse_entry(field, &format!("[{i}]"), e, chart))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(TensorField::new(chart, valence, comps).expect("shape checked above"))
}

/// Symmetric as written, or numerically symmetric at the default sample.
fn check_symmetric(field: &str, m: &Matrix, g: &TensorField) -> Result<(), CliError> {
    let n = m.len();
    let plan = SamplePlan::default();
    for i in 0..n {
        for j in 0..i {
            if m[i][j] == m[j][i] {
                continue;
            }
            let (a, b) = (&g.components()[i * n + j], &g.components()[j * n + i]);
            for k in 0..plan.count {
                let p = plan.point(g.chart(), k);
                let (x, y) = match (a.eval(&p), b.eval(&p)) {
                    (Ok(x), Ok(y)) => (x, y),
                    _ => continue,
                };
                if (x - y).abs() > 1e-12 * (1.0 + x.abs().max(y.abs())) {
                    return Err(format_err(format!(
                        "`{field}` is not symmetric in entries [{i}][{j}] and [{j}][{i}]"
                    )));
                }
            }
        }
    }
    Ok(())
}

fn sources(t: &TensorField) -> Vec<Entry> {
    t.sources().into_iter().map(Entry::Text).collect()
}

fn rows(t: &TensorField) -> Matrix {
    let n = t.dim();
    sources(t).chunks(n).map(|r| r.to_vec()).collect()
}

impl StructureFile {
    pub fn from_json(text: &str) -> Result<StructureFile, CliError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<StructureFile, CliError> {
        StructureFile::from_json(&crate::read(path)?)
    }

    pub fn to_json(&self) -> String {
        crate::report::pretty(&serde_json::to_value(self).expect("structure files serialize"))
    }

    pub fn chart(&self) -> Result<Chart, CliError> {
        if self.coordinates.len() != self.dimension {
            return Err(format_err(format!(
                "dimension is {} but {} coordinates are listed",
                self.dimension,
                self.coordinates.len()
            )));
        }
        let domain = read_domain(&self.coordinates, &self.domain)?;
        Chart::new(self.coordinates.clone(), domain).map_err(|e| format_err(e.to_string()))
    }

    /// Parses every expression and assembles the unvalidated structure.
    pub fn to_raw(&self) -> Result<RawStructure, CliError> {
        let chart = self.chart()?;
        if let Some(nu) = self.nu {
            if !(nu > 0.0 && nu.is_finite()) {
                return Err(format_err(format!("nu must be positive, got {nu}")));
            }
        }
        let g = matrix_field("metric", &self.metric, &chart, Valence::BILINEAR)?;
        check_symmetric("metric", &self.metric, &g)?;
        let phi = matrix_field("phi", &self.phi, &chart, Valence::ENDOMORPHISM)?;
        let q = self
            .q
            .as_ref()
            .map(|m| matrix_field("Q", m, &chart, Valence::ENDOMORPHISM))
            .transpose()?;
        let xi = vector_field("xi", &self.xi, &chart, Valence::VECTOR)?;
        let eta = vector_field("eta", &self.eta, &chart, Valence::COVECTOR)?;
        RawStructure::new(phi, q, xi, eta, g, self.nu).map_err(|e| match e {
            StructureError::MissingNu => format_err("Q is omitted, so nu is required"),
            other => CliError::Structure(other),
        })
    }

    /// Serializes a validated structure with `Q` and `nu` written out.
    pub fn from_structure(name: &str, s: &Structure) -> StructureFile {
        StructureFile {
            name: name.to_string(),
            dimension: s.dim(),
            coordinates: s.chart().coords().to_vec(),
            domain: write_domain(s.chart()),
            metric: rows(s.g()),
            phi: rows(s.phi()),
            q: Some(rows(s.q())),
            xi: sources(s.xi()),
            eta: sources(s.eta()),
            nu: Some(s.nu()),
        }
    }
}

impl PhitildeFile {
    pub fn load(path: &Path) -> Result<PhitildeFile, CliError> {
        Ok(serde_json::from_str(&crate::read(path)?)?)
    }

    /// `(phitilde, g_M)` on the base chart.
    pub fn fields(&self) -> Result<(TensorField, TensorField), CliError> {
        let domain = read_domain(&self.coordinates, &self.domain)?;
        let chart = Chart::base(self.coordinates.clone(), domain).map_err(|e| format_err(e.to_string()))?;
        if !chart.dim().is_multiple_of(2) {
            return Err(format_err("the base chart must be even-dimensional"));
        }
        let g = matrix_field("metric", &self.metric, &chart, Valence::BILINEAR)?;
        check_symmetric("metric", &self.metric, &g)?;
        let ph = matrix_field("phitilde", &self.phitilde, &chart, Valence::ENDOMORPHISM)?;
        Ok((ph, g))
    }
}

/// Semicolon-separated vector components, as given to `--field`.
pub fn parse_field(spec: &str, chart: &Chart) -> Result<TensorField, CliError> {
    let parts: Vec<Entry> = spec.split(';').map(|s| Entry::Text(s.trim().to_string())).collect();
    vector_field("--field", &parts, chart, Valence::VECTOR)
}

pub fn parse_scalar(what: &str, src: &str, chart: &Chart) -> Result<ScalarExpr, CliError> {
    parse_entry(what, "", &Entry::Text(src.to_string()), chart)
}

/// Parse errors carry a character position when the parser has one.
pub fn parse_position(e: &ParseError) -> Option<usize> {
    match e {
        ParseError::Syntax { position, .. } => Some(*position),
        _ => None,
    }
}
