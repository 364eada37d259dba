use std::fmt::Write;

use clap::ValueEnum;

use super::report::{AnalysisReport, PosteriorTable, SweepReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

/// Five significant digits.
pub fn sci(x: f64) -> String {
    format!("{x:.4e}")
}

/// Shortest exact form, for machine-readable output.
fn exact(x: f64) -> String {
    format!("{x:e}")
}

struct Style {
    color: bool,
}

impl Style {
    fn verdict(&self, pass: bool) -> String {
        let (word, code) = if pass { ("PASS", "32") } else { ("FAIL", "31") };
        if self.color {
            format!("\x1b[1;{code}m{word}\x1b[0m")
        } else {
            word.to_string()
        }
    }

    fn heading(&self, s: &str) -> String {
        if self.color {
            format!("\x1b[1m{s}\x1b[0m")
        } else {
            s.to_string()
        }
    }
}

fn width<'a>(names: impl Iterator<Item = &'a str>) -> usize {
    names.map(str::len).max().unwrap_or(0).max(8)
}

pub fn solve_text(r: &AnalysisReport, color: bool) -> String {
    let style = Style { color };
    let mut out = String::new();
    let _ = writeln!(out, "{} {}", style.heading("workflow"), r.workflow);
    let _ = writeln!(out, "input    {} (sha256 {})", r.input.path, r.input.sha256);
    for p in &r.provenance {
        let _ = writeln!(out);
        let _ = writeln!(out, "{} {} : {}", style.heading("instance"), p.instance, p.class);
        let _ = writeln!(out, "  solver  {}", p.solver);
        let inputs = &r.inputs[&p.instance];
        let outputs = &r.outputs[&p.instance];
        let w = width(inputs.keys().chain(outputs.keys()).map(String::as_str));
        for (k, v) in inputs {
            let _ = writeln!(out, "  in   {k:<w$}  {}", sci(*v));
        }
        for (k, v) in outputs {
            let _ = writeln!(out, "  out  {k:<w$}  {}", sci(*v));
        }
    }
    if !r.exports.is_empty() {
        let _ = writeln!(out);
        let _ = writeln!(out, "{}", style.heading("exports"));
        let w = width(r.exports.iter().map(|e| e.name.as_str()));
        for e in &r.exports {
            let _ = writeln!(out, "  {:<w$}  {}", e.name, sci(e.value));
        }
    }
    if let Some(v) = &r.verdict {
        let rel = if v.pass { "<=" } else { ">" };
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "{} {}: {} = {} {rel} threshold {} [{}]",
            style.heading("verdict"),
            style.verdict(v.pass),
            v.metric,
            sci(v.value),
            sci(v.threshold),
            v.sil_band
        );
    }
    out
}

pub fn solve_csv(r: &AnalysisReport) -> Result<String, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["section", "instance", "name", "value"])?;
    for (section, map) in [("input", &r.inputs), ("output", &r.outputs)] {
        for (inst, values) in map {
            for (k, v) in values {
                w.write_record([section, inst, k, &exact(*v)])?;
            }
        }
    }
    for e in &r.exports {
        w.write_record(["export", "", &e.name, &exact(e.value)])?;
    }
    if let Some(v) = &r.verdict {
        w.write_record(["threshold", "", &v.metric, &exact(v.threshold)])?;
        w.write_record(["verdict", "", &v.metric, if v.pass { "PASS" } else { "FAIL" }])?;
    }
    finish(w)
}

pub fn posteriors_text(t: &PosteriorTable) -> String {
    let mut out = String::new();
    let evidence: Vec<String> = t.evidence.iter().map(|o| format!("{}={}", o.variable, o.state)).collect();
    let _ = writeln!(out, "instance {}", t.instance);
    let _ = writeln!(
        out,
        "evidence {}",
        if evidence.is_empty() { "(none)".to_string() } else { evidence.join(", ") }
    );
    let _ = writeln!(out);
    let vw = width(t.rows.iter().map(|r| r.variable.as_str()));
    let sw = width(t.rows.iter().map(|r| r.state.as_str()));
    let _ = writeln!(out, "{:>3}  {:<vw$}  {:<sw$}  probability", "id", "variable", "state");
    for r in &t.rows {
        let mark = if r.observed { "  (observed)" } else { "" };
        let _ = writeln!(
            out,
            "{:>3}  {:<vw$}  {:<sw$}  {}{mark}",
            r.id,
            r.variable,
            r.state,
            sci(r.probability)
        );
    }
    out
}

pub fn posteriors_csv(t: &PosteriorTable) -> Result<String, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["id", "variable", "state", "probability", "observed"])?;
    for r in &t.rows {
        w.write_record([
            &r.id.to_string(),
            &r.variable,
            &r.state,
            &exact(r.probability),
            &r.observed.to_string(),
        ])?;
    }
    finish(w)
}

pub fn sweep_text(s: &SweepReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "workflow {}", s.workflow);
    let _ = writeln!(out, "sweep    {} (base {})", s.param, sci(s.base_value));
    let _ = writeln!(out);
    let cols = s.columns();
    let widths: Vec<usize> = cols.iter().map(|c| c.len().max(10)).collect();
    let _ = write!(out, "{:>10}", "factor");
    for (c, w) in cols.iter().zip(&widths) {
        let _ = write!(out, "  {c:>w$}");
    }
    out.push('\n');
    for row in &s.rows {
        let _ = write!(out, "{:>10}", row.factor);
        for (e, w) in row.exports.iter().zip(&widths) {
            let _ = write!(out, "  {:>w$}", sci(e.value));
        }
        out.push('\n');
    }
    out
}

/// Columns: factor, then one per export.
pub fn sweep_csv(s: &SweepReport) -> Result<String, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["factor"];
    header.extend(s.columns());
    w.write_record(&header)?;
    for row in &s.rows {
        let mut rec = vec![row.factor.to_string()];
        rec.extend(row.exports.iter().map(|e| exact(e.value)));
        w.write_record(&rec)?;
    }
    finish(w)
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String, csv::Error> {
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv of utf-8 fields"))
}
