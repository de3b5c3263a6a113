//! Versioned JSON reports and their plain-text renderings.

use std::fmt::Write as _;

use serde_json::{json, Map, Value};
use wact_core::classify::{CheckReport, Classification};
use wact_core::deform::CvfResult;
use wact_core::{SamplePlan, ValidationReport};

pub const SCHEMA: u64 = 1;

/// `NaN` and infinities have no JSON spelling; they become `null`.
pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

fn nums(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|&x| num(x)).collect())
}

pub fn header(command: &str, structure: &str, plan: &SamplePlan, tol: f64) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("schema".into(), json!(SCHEMA));
    m.insert("command".into(), json!(command));
    m.insert("structure".into(), json!(structure));
    m.insert(
        "plan".into(),
        json!({ "count": plan.count, "seed": plan.seed, "margin": num(plan.margin) }),
    );
    m.insert("tol".into(), num(tol));
    m
}

pub fn validation(m: &mut Map<String, Value>, r: &ValidationReport) {
    m.insert("passed".into(), json!(r.passed()));
    m.insert("nu".into(), num(r.nu));
    m.insert("nu_extracted".into(), json!(r.nu_extracted));
    let axioms = r
        .axioms
        .iter()
        .map(|a| {
            json!({
                "id": a.axiom.id(),
                "derived": a.axiom.is_derived(),
                "residual": num(a.residual),
                "worst_point": nums(&a.worst_point),
                "passed": a.passed,
            })
        })
        .collect();
    m.insert("axioms".into(), Value::Array(axioms));
}

pub fn classification_value(c: &Classification) -> Value {
    let flags: Vec<Value> = c
        .flags
        .iter()
        .map(|f| json!({ "id": f.flag.id(), "holds": f.holds, "residual": num(f.residual) }))
        .collect();
    json!({ "lambda": num(c.lambda), "flags": flags })
}

pub fn checks(m: &mut Map<String, Value>, r: &CheckReport) {
    m.insert("classification".into(), classification_value(&r.classification));
    let checks = r
        .checks
        .iter()
        .map(|c| {
            let components: Vec<Value> = c
                .components
                .iter()
                .map(|k| {
                    json!({
                        "name": k.name,
                        "residual": num(k.residual),
                        "bound": num(k.bound),
                        "applicable": k.applicable,
                        "advisory": k.advisory,
                        "relative": k.relative,
                    })
                })
                .collect();
            json!({
                "id": c.id,
                "anchor": c.anchor,
                "residual": num(c.residual),
                "tol": num(c.tol),
                "verdict": c.verdict.as_str(),
                "components": components,
            })
        })
        .collect();
    m.insert("checks".into(), Value::Array(checks));
    m.insert("all_passed".into(), json!(r.all_passed()));
}

pub fn cvf(m: &mut Map<String, Value>, r: &CvfResult) {
    m.insert("is_weak_contact".into(), json!(r.is_weak_contact));
    m.insert("residual".into(), num(r.residual));
    m.insert("sigma_sup".into(), num(r.sigma_sup));
    m.insert("strict".into(), json!(r.strict));
    m.insert("lie_residual".into(), num(r.lie_residual));
    m.insert("lie_consistent".into(), json!(r.lie_consistent));
    m.insert("worst_point".into(), nums(&r.worst_point));
    let samples = r
        .samples
        .iter()
        .map(|s| json!({ "point": nums(&s.point), "f": num(s.f), "sigma": num(s.sigma) }))
        .collect();
    m.insert("samples".into(), Value::Array(samples));
}

pub fn to_text(m: Map<String, Value>) -> String {
    pretty(&Value::Object(m))
}

fn mark(ok: bool) -> &'static str {
    if ok {
        "✓"
    } else {
        "✗"
    }
}

pub fn plan_line(name: &str, dim: usize, plan: &SamplePlan, tol: f64) -> String {
    format!(
        "{name} (dim {dim}): {} points, seed {}, margin {}, tol {tol:e}\n",
        plan.count, plan.seed, plan.margin
    )
}

pub fn validation_table(r: &ValidationReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "nu = {}{}", r.nu, if r.nu_extracted { " (extracted)" } else { "" });
    let _ = writeln!(s, "{:<22} {:>12}  ok", "axiom", "residual");
    for a in &r.axioms {
        let _ = writeln!(s, "{:<22} {:>12.3e}  {}", a.axiom.id(), a.residual, mark(a.passed));
    }
    s
}

pub fn classification_table(c: &Classification) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "lambda = {}", c.lambda);
    let _ = writeln!(s, "{:<28} {:>12}  holds", "flag", "residual");
    for f in &c.flags {
        let _ = writeln!(s, "{:<28} {:>12.3e}  {}", f.flag.id(), f.residual, mark(f.holds));
    }
    s
}

pub fn check_table(r: &CheckReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:<4} {:>12}  {:<7} anchor", "id", "residual", "verdict");
    for c in &r.checks {
        let _ = writeln!(
            s,
            "{:<4} {:>12.3e}  {:<7} {}",
            c.id,
            c.residual,
            c.verdict.as_str(),
            c.anchor
        );
        for k in c.components.iter().filter(|k| k.applicable && !k.passed()) {
            let tag = if k.advisory { "advisory" } else { "exceeds" };
            let _ = writeln!(s, "       {} = {:.3e} {tag} {:.1e}", k.name, k.residual, k.bound);
        }
    }
    s
}

pub fn cvf_table(r: &CvfResult) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "is_weak_contact {}  residual {:.3e}",
        mark(r.is_weak_contact),
        r.residual
    );
    let _ = writeln!(s, "strict          {}  sup |sigma| {:.3e}", mark(r.strict), r.sigma_sup);
    let _ = writeln!(
        s,
        "lie cross-check {}  residual {:.3e}",
        mark(r.lie_consistent),
        r.lie_residual
    );
    s
}

/// Pretty JSON with arrays of scalars kept on one line.
pub fn pretty(v: &Value) -> String {
    let mut s = String::new();
    write_value(&mut s, v, 0);
    s.push('\n');
    s
}

fn scalar(v: &Value) -> String {
    serde_json::to_string(v).expect("scalars serialize")
}

fn write_value(s: &mut String, v: &Value, depth: usize) {
    let pad = "  ".repeat(depth + 1);
    let close = "  ".repeat(depth);
    match v {
        Value::Array(items) if items.is_empty() => s.push_str("[]"),
        Value::Array(items) if items.iter().all(|x| !x.is_array() && !x.is_object()) => {
            let parts: Vec<String> = items.iter().map(scalar).collect();
            s.push('[');
            s.push_str(&parts.join(", "));
            s.push(']');
        }
        Value::Array(items) => {
            s.push_str("[\n");
            for (i, x) in items.iter().enumerate() {
                s.push_str(&pad);
                write_value(s, x, depth + 1);
                s.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            s.push_str(&close);
            s.push(']');
        }
        Value::Object(m) if m.is_empty() => s.push_str("{}"),
        Value::Object(m) => {
            s.push_str("{\n");
            for (i, (k, x)) in m.iter().enumerate() {
                s.push_str(&pad);
                s.push_str(&scalar(&Value::String(k.clone())));
                s.push_str(": ");
                write_value(s, x, depth + 1);
                s.push_str(if i + 1 < m.len() { ",\n" } else { "\n" });
            }
            s.push_str(&close);
            s.push('}');
        }
        other => s.push_str(&scalar(other)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pretty_output_is_valid_json() {
        let v = json!({ "a": [1, 2.5, "x"], "b": [[1, 2], [3, 4]], "c": {}, "d": [], "e": { "f": null } });
        let text = pretty(&v);
        assert_eq!(serde_json::from_str::<Value>(&text).unwrap(), v);
        assert!(text.contains("\"a\": [1, 2.5, \"x\"]"));
    }

    #[test]
    fn non_finite_numbers_become_null() {
        assert_eq!(num(f64::NAN), Value::Null);
        assert_eq!(num(1.5), json!(1.5));
    }
}
