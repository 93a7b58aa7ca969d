//! Per-statement analysis reports, as a text table or JSON.

use probpts_core::analyzer::{AnalysisResult, WhileMode};
use probpts_core::lang::{stmt_head, Label, Program, StmtKind};
use probpts_core::pts::PtsType;
use serde_json::{json, Value as Json};

/// Types around one statement. Sequences are not listed; their pre and
/// post coincide with those of their first and last children.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportEntry {
    pub label: Label,
    pub line: u32,
    pub column: u32,
    pub statement: String,
    pub pre: PtsType,
    pub post: PtsType,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    pub program: String,
    pub mode: WhileMode,
    pub entries: Vec<ReportEntry>,
    pub warnings: Vec<String>,
}

impl Report {
    pub fn build(path: &str, mode: WhileMode, program: &Program, analysis: &AnalysisResult) -> Report {
        let mut entries = Vec::new();
        program.body.walk(&mut |s| {
            if matches!(s.kind, StmtKind::Seq(_)) {
                return;
            }
            // Statements in a branch the analysis never reached have no record.
            if let (Some(pre), Some(post)) = (analysis.pre.get(&s.label), analysis.post.get(&s.label)) {
                entries.push(ReportEntry {
                    label: s.label,
                    line: s.span.line,
                    column: s.span.column,
                    statement: stmt_head(s),
                    pre: pre.clone(),
                    post: post.clone(),
                });
            }
        });
        entries.sort_by_key(|e| e.label);
        Report {
            program: path.to_string(),
            mode,
            entries,
            warnings: analysis.warnings.clone(),
        }
    }

    pub fn to_json(&self) -> Json {
        let points: Vec<Json> = self
            .entries
            .iter()
            .map(|e| {
                json!({
                    "label": e.label.0,
                    "line": e.line,
                    "pre": e.pre.to_json(),
                    "post": e.post.to_json(),
                })
            })
            .collect();
        json!({
            "program": self.program,
            "mode": self.mode.as_str(),
            "points": points,
            "warnings": self.warnings,
        })
    }

    pub fn to_table(&self) -> String {
        let header = ["label", "line", "statement", "pre", "post"].map(String::from);
        let rows: Vec<[String; 5]> = self
            .entries
            .iter()
            .map(|e| {
                [
                    e.label.0.to_string(),
                    e.line.to_string(),
                    e.statement.clone(),
                    cell(&e.pre),
                    cell(&e.post),
                ]
            })
            .collect();
        let mut widths = header.clone().map(|h| h.chars().count());
        for row in &rows {
            for (w, c) in widths.iter_mut().zip(row) {
                *w = (*w).max(c.chars().count());
            }
        }
        let mut out = format!("program: {}\nwhile mode: {}\n\n", self.program, self.mode.as_str());
        for row in std::iter::once(&header).chain(&rows) {
            let mut line = String::new();
            for (i, (c, w)) in row.iter().zip(widths).enumerate() {
                if i + 1 == row.len() {
                    line.push_str(c);
                } else {
                    line.push_str(c);
                    line.push_str(&" ".repeat(w - c.chars().count() + 2));
                }
            }
            out.push_str(line.trim_end());
            out.push('\n');
        }
        for w in &self.warnings {
            out.push_str(&format!("warning: {w}\n"));
        }
        out
    }
}

fn cell(pts: &PtsType) -> String {
    if pts.is_bottom() {
        "all ∅".to_string()
    } else {
        pts.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use probpts_core::analyzer::{analyze_program, AnalyzerConfig};
    use probpts_core::lang::parse;

    fn report(src: &str) -> Report {
        let program = parse(src).unwrap();
        let pre = PtsType::bottom(&program.vars);
        let analysis = analyze_program(&program, &pre, &AnalyzerConfig::default()).unwrap();
        Report::build("t.prog", WhileMode::Safe, &program, &analysis)
    }

    #[test]
    fn skip_is_one_empty_row() {
        let r = report("skip;");
        assert_eq!(r.entries.len(), 1);
        let table = r.to_table();
        assert!(table.lines().any(|l| l.starts_with("1") && l.contains("all ∅")));
    }

    #[test]
    fn sequences_are_not_listed() {
        let r = report("a := &b;\nb := &a;");
        let labels: Vec<u32> = r.entries.iter().map(|e| e.label.0).collect();
        assert_eq!(labels, vec![2, 3]);
        assert_eq!(r.entries[1].line, 2);
    }

    #[test]
    fn json_keys_keep_their_order() {
        let text = report("a := &b;").to_json().to_string();
        let keys = ["\"program\"", "\"mode\"", "\"points\"", "\"warnings\""];
        let pos: Vec<usize> = keys.iter().map(|k| text.find(k).unwrap()).collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]));
        let point = ["\"label\"", "\"line\"", "\"pre\"", "\"post\""];
        let pos: Vec<usize> = point.iter().map(|k| text.find(k).unwrap()).collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]));
    }
}
