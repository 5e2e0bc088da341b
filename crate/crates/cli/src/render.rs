use kolyrec_core::suite::{CheckReport, ClassView, SuiteReport, Verdict};
use serde_json::json;

use crate::config::Format;

fn params_text(r: &CheckReport) -> String {
    let p = &r.params;
    let mut parts = vec![format!("M={}", p.modulus)];
    for (k, v) in [("r", p.r), ("l", p.l), ("g", p.g)] {
        if let Some(v) = v {
            parts.push(format!("{k}={v}"));
        }
    }
    parts.join(" ")
}

fn verdict_text(v: Verdict) -> &'static str {
    match v {
        Verdict::Pass => "PASS",
        Verdict::Fail => "FAIL",
        Verdict::Error => "ERROR",
    }
}

fn opt(v: Option<u64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn csv_string(rows: Vec<Vec<String>>) -> Result<String, String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.write_record(&row).map_err(|e| e.to_string())?;
    }
    let bytes = w.into_inner().map_err(|e| e.to_string())?;
    String::from_utf8(bytes).map_err(|e| e.to_string())
}

pub fn suite(report: &SuiteReport, format: Format) -> Result<String, String> {
    match format {
        Format::Json => serde_json::to_string_pretty(report).map(|s| s + "\n").map_err(|e| e.to_string()),
        Format::Csv => {
            let mut rows = vec![["name", "anchor", "M", "r", "l", "g", "verdict", "millis", "failures"]
                .map(String::from)
                .to_vec()];
            for r in &report.reports {
                let mut failures = r.failures();
                if let Some(e) = r.details.get("error").and_then(|e| e.as_str()) {
                    failures.push(e.to_string());
                }
                rows.push(vec![
                    r.name.clone(),
                    r.anchor.clone(),
                    r.params.modulus.to_string(),
                    opt(r.params.r),
                    opt(r.params.l),
                    opt(r.params.g),
                    verdict_text(r.verdict).to_lowercase(),
                    opt(r.millis),
                    failures.join("; "),
                ]);
            }
            csv_string(rows)
        }
        Format::Text => {
            let mut out = String::new();
            for r in &report.reports {
                let time = r.millis.map(|t| format!(" ({t} ms)")).unwrap_or_default();
                out.push_str(&format!("{} {} {}{}\n", verdict_text(r.verdict), r.name, params_text(r), time));
                for f in r.failures() {
                    out.push_str(&format!("    {f}\n"));
                }
                if let Some(e) = r.details.get("error").and_then(|e| e.as_str()) {
                    out.push_str(&format!("    {e}\n"));
                }
            }
            let s = &report.summary;
            out.push_str(&format!(
                "{} checks: {} passed, {} failed, {} errors\n",
                s.total, s.passed, s.failed, s.errors
            ));
            Ok(out)
        }
    }
}

pub fn basis(m: u64, r: u64, divisors: &[u64], matrix: &[Vec<u64>], format: Format) -> Result<String, String> {
    match format {
        Format::Json => {
            let v = json!({ "M": m, "r": r, "divisors": divisors, "transition": matrix });
            serde_json::to_string_pretty(&v).map(|s| s + "\n").map_err(|e| e.to_string())
        }
        Format::Csv => {
            let mut header = vec!["g".to_string()];
            header.extend(divisors.iter().map(|g| format!("cbar_{g}")));
            let mut rows = vec![header];
            for (g, row) in divisors.iter().zip(matrix) {
                let mut line = vec![g.to_string()];
                line.extend(row.iter().map(u64::to_string));
                rows.push(line);
            }
            csv_string(rows)
        }
        Format::Text => {
            let mut out = format!("c_g in the canonical basis, M = {m}, r = {r}\n");
            for (g, row) in divisors.iter().zip(matrix) {
                let entries: Vec<String> = row.iter().map(|v| format!("{v:>2}")).collect();
                out.push_str(&format!("c_{g:<6} {}\n", entries.join(" ")));
            }
            Ok(out)
        }
    }
}

pub fn class(view: &ClassView, format: Format) -> Result<String, String> {
    match format {
        Format::Json => serde_json::to_string_pretty(view).map(|s| s + "\n").map_err(|e| e.to_string()),
        Format::Csv => {
            let mut rows = vec![vec!["fraction".to_string(), "coefficient".to_string()]];
            rows.extend(view.representative.iter().map(|(a, c)| vec![a.clone(), c.to_string()]));
            csv_string(rows)
        }
        Format::Text => {
            let mut out = String::new();
            for line in view.lines() {
                out.push_str(&line);
                out.push('\n');
            }
            let names: Vec<String> = view.basis.iter().map(|g| format!("cbar_{g}")).collect();
            let coords: Vec<String> = view.canonical_coordinates.iter().map(u64::to_string).collect();
            out.push_str(&format!("coordinates in ({}): ({})\n", names.join(", "), coords.join(", ")));
            Ok(out)
        }
    }
}
