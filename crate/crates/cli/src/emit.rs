use std::fmt::Write as _;

use chshlab::experiments::{Cell, Report};
use serde_json::{json, Map, Value};

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn cell_text(c: &Cell) -> String {
    match c {
        Cell::Num(x) => number(*x),
        Cell::Int(n) => n.to_string(),
        Cell::Text(s) => csv_field(s),
        Cell::Bool(b) => b.to_string(),
        Cell::Missing => String::new(),
    }
}

/// Shortest round-trip form, in exponent notation far from unity.
fn number(x: f64) -> String {
    if x != 0.0 && !(1e-4..1e15).contains(&x.abs()) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

/// `#`-prefixed metadata, a header row, then one line per row; LF endings.
pub fn to_csv(report: &Report, preamble: &[(String, String)]) -> String {
    let mut out = String::new();
    for (k, v) in preamble.iter().chain(&report.meta) {
        let _ = writeln!(out, "# {k}: {}", v.replace(['\n', '\r'], " "));
    }
    out.push_str(
        &report
            .columns
            .iter()
            .map(|c| csv_field(c))
            .collect::<Vec<_>>()
            .join(","),
    );
    out.push('\n');
    for row in &report.rows {
        out.push_str(&row.iter().map(cell_text).collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    out
}

pub fn to_json(report: &Report, preamble: &[(String, String)]) -> String {
    let meta: Map<String, Value> = preamble
        .iter()
        .chain(&report.meta)
        .map(|(k, v)| (k.clone(), Value::String(v.clone())))
        .collect();
    let rows: Vec<Value> = report
        .rows
        .iter()
        .map(|r| {
            Value::Array(
                r.iter()
                    .map(|c| serde_json::to_value(c).unwrap_or(Value::Null))
                    .collect(),
            )
        })
        .collect();
    let doc = json!({
        "name": report.name,
        "meta": meta,
        "columns": report.columns,
        "rows": rows,
        "verified": report.verified,
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("report is plain data");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        Report {
            name: "t".into(),
            meta: vec![("k".into(), "v".into())],
            columns: vec!["a".into(), "b".into(), "c".into()],
            rows: vec![
                vec![Cell::Num(0.5), Cell::Missing, Cell::Text("x,y".into())],
                vec![Cell::Int(3), Cell::Bool(true), Cell::Text("z".into())],
            ],
            verified: true,
        }
    }

    #[test]
    fn csv_layout() {
        let s = to_csv(&sample(), &[("seed".into(), "1".into())]);
        assert_eq!(s, "# seed: 1\n# k: v\na,b,c\n0.5,,\"x,y\"\n3,true,z\n");
    }

    #[test]
    fn numbers_round_trip() {
        for x in [
            0.0,
            1.0,
            -2.5,
            2.220446049250313e-16,
            6.02e23,
            0.025126265847083662,
        ] {
            assert_eq!(number(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(number(2.220446049250313e-16), "2.220446049250313e-16");
    }

    #[test]
    fn json_missing_is_null() {
        let v: Value = serde_json::from_str(&to_json(&sample(), &[])).unwrap();
        assert_eq!(v["rows"][0][1], Value::Null);
        assert_eq!(v["rows"][0][0], json!(0.5));
        assert_eq!(v["meta"]["k"], json!("v"));
    }
}
