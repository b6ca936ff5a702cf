//! Candidate extractions, their feasibility, and the refactoring cache.

pub mod dataflow;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::frontend::{lexer, SourceFile, Span};
use crate::metrics::{AnnotatedMethod, SequenceMetrics};
pub use dataflow::{DataflowFacts, Scopes, VarId, Variable};

/// A contiguous run of sibling statements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Region {
    pub span: Span,
    pub statements: Vec<Span>,
    pub lambda: u32,
    /// The run belongs to the top-level statement list of the body.
    pub top_level: bool,
    /// The run ends with the last statement of its list.
    pub ends_list: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Reason {
    Ok,
    ReturnFlow,
    JumpTargetOutside,
    MultiOutput,
}

impl Reason {
    pub fn as_str(self) -> &'static str {
        match self {
            Reason::Ok => "OK",
            Reason::ReturnFlow => "Selected block contains a conditional return",
            Reason::JumpTargetOutside => "Selected block contains a break or continue whose target is not selected",
            Reason::MultiOutput => "Selected block defines more than one variable used after the block",
        }
    }
}

impl fmt::Display for Reason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Reason {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [Reason::Ok, Reason::ReturnFlow, Reason::JumpTargetOutside, Reason::MultiOutput]
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| format!("unknown reason {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub start: usize,
    pub end: usize,
    pub feasible: bool,
    pub reason: Reason,
    pub num_params: usize,
    pub loc: usize,
    pub metrics: SequenceMetrics,
}

impl CacheEntry {
    pub fn span(&self) -> Span {
        Span::new(self.start, self.end)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RefactoringCache {
    pub class: String,
    pub method: String,
    /// Sorted by `(start, end)`.
    pub entries: Vec<CacheEntry>,
}

impl RefactoringCache {
    /// The entry covering the whole method body, if cached.
    pub fn whole_body(&self) -> Option<&CacheEntry> {
        self.entries.iter().max_by_key(|e| (e.end - e.start, std::cmp::Reverse(e.start)))
    }
}

pub fn enumerate_candidates(annotated: &AnnotatedMethod) -> Vec<Region> {
    let mut out: Vec<Region> = Vec::new();
    for list in annotated.statement_lists() {
        let n = list.stmts.len();
        for first in 0..n {
            for last in first..n {
                let span = Span::new(list.stmts[first].span.start, list.stmts[last].span.end);
                if !annotated.contributes(span) || out.iter().any(|r| r.span == span) {
                    continue;
                }
                out.push(Region {
                    span,
                    statements: list.stmts[first..=last].iter().map(|s| s.span).collect(),
                    lambda: list.lambda,
                    top_level: list.is_body,
                    ends_list: last + 1 == n,
                });
            }
        }
    }
    out.sort_by_key(|r| (r.span.start, r.span.end));
    out
}

pub fn dataflow_facts(annotated: &AnnotatedMethod, region: &Region) -> DataflowFacts {
    facts_with(&Scopes::resolve(&annotated.method), annotated, region)
}

fn facts_with(scopes: &Scopes, annotated: &AnnotatedMethod, region: &Region) -> DataflowFacts {
    let run = annotated.find_run(region.span).expect("region is a sibling run of this method");
    scopes.facts(run.stmts(), region.span)
}

pub fn check_feasibility(annotated: &AnnotatedMethod, region: &Region) -> (bool, Reason) {
    let reason = feasibility(annotated, region, &dataflow_facts(annotated, region));
    (reason == Reason::Ok, reason)
}

fn feasibility(annotated: &AnnotatedMethod, region: &Region, facts: &DataflowFacts) -> Reason {
    if !facts.jump_escapes.is_empty() {
        return Reason::JumpTargetOutside;
    }
    if facts.outputs.len() > 1 {
        return Reason::MultiOutput;
    }
    if facts.contains_return {
        let tail_of_void = region.top_level && region.ends_list && annotated.method.is_void();
        if !(facts.all_paths_return || tail_of_void) || !facts.outputs.is_empty() {
            return Reason::ReturnFlow;
        }
    }
    Reason::Ok
}

/// Lines holding at least one token of `span`.
pub fn lines_of_code(source: &SourceFile, span: Span) -> usize {
    let Ok(tokens) = lexer::tokenize_chars(&source.chars()[span.start..=span.end]) else {
        return source.line_of(span.end) - source.line_of(span.start) + 1;
    };
    let mut lines: Vec<usize> = tokens
        .iter()
        .filter(|t| t.kind != lexer::TokenKind::Eof)
        .map(|t| source.line_of(span.start + t.span.start))
        .collect();
    lines.dedup();
    lines.len()
}

pub fn build_cache(annotated: &AnnotatedMethod, source: &SourceFile) -> RefactoringCache {
    let scopes = Scopes::resolve(&annotated.method);
    let entries = enumerate_candidates(annotated)
        .iter()
        .map(|region| {
            let facts = facts_with(&scopes, annotated, region);
            let reason = feasibility(annotated, region, &facts);
            let feasible = reason == Reason::Ok;
            CacheEntry {
                start: region.span.start,
                end: region.span.end,
                feasible,
                reason,
                num_params: if feasible { facts.inputs.len() } else { 0 },
                loc: if feasible { lines_of_code(source, region.span) } else { 0 },
                metrics: annotated.metrics_at(region.span, region.lambda),
            }
        })
        .collect();
    RefactoringCache {
        class: annotated.method.owner_class.clone(),
        method: annotated.method.name.name.clone(),
        entries,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct CsvFormatError {
    pub line: usize,
    pub message: String,
}

pub fn write_cache_csv(cache: &RefactoringCache) -> String {
    let mut out = String::new();
    for e in &cache.entries {
        let m = &e.metrics;
        out.push_str(&format!(
            "{}, {}, {}, \"{}\", {}, {}, {}, {}, {}, {}, {}, {}\n",
            e.start,
            e.end,
            u8::from(e.feasible),
            e.reason,
            e.num_params,
            e.loc,
            m.ccr,
            m.nmcc,
            m.iota,
            m.nu,
            m.mu,
            m.lambda
        ));
    }
    out
}

/// Parses the CSV layout written by [`write_cache_csv`]. Method identity is
/// not part of the format and is left empty.
pub fn read_cache_csv(text: &str) -> Result<RefactoringCache, CsvFormatError> {
    let mut entries = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        entries.push(parse_row(line).map_err(|message| CsvFormatError { line: i + 1, message })?);
    }
    Ok(RefactoringCache { entries, ..Default::default() })
}

fn parse_row(line: &str) -> Result<CacheEntry, String> {
    let open = line.find('"').ok_or("missing quoted reason")?;
    let close = open + 1 + line[open + 1..].find('"').ok_or("unterminated quoted reason")?;
    let reason: Reason = line[open + 1..close].parse()?;
    let head: Vec<&str> = line[..open].split(',').map(str::trim).collect();
    let tail: Vec<&str> = line[close + 1..].split(',').map(str::trim).collect();
    if head.len() != 4 || !head[3].is_empty() || tail.len() != 9 || !tail[0].is_empty() {
        return Err("expected 12 comma-separated fields".into());
    }
    let num = |s: &str| s.parse::<usize>().map_err(|_| format!("invalid number {s:?}"));
    let small = |s: &str| s.parse::<u32>().map_err(|_| format!("invalid number {s:?}"));
    let feasible = match head[2] {
        "1" => true,
        "0" => false,
        other => return Err(format!("invalid feasibility flag {other:?}")),
    };
    if feasible != (reason == Reason::Ok) {
        return Err("feasibility flag disagrees with reason".into());
    }
    let (ccr, nmcc) = (small(tail[3])?, small(tail[4])?);
    let metrics = SequenceMetrics::new(small(tail[5])?, small(tail[6])?, small(tail[7])?, small(tail[8])?);
    if metrics.ccr != ccr || metrics.nmcc != nmcc {
        return Err("CCR/NMCC inconsistent with iota, nu, mu, lambda".into());
    }
    Ok(CacheEntry {
        start: num(head[0])?,
        end: num(head[1])?,
        feasible,
        reason,
        num_params: num(tail[1])?,
        loc: num(tail[2])?,
        metrics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse;
    use crate::metrics::annotate_method;

    fn setup(body: &str, ret: &str) -> (AnnotatedMethod, SourceFile) {
        let src = SourceFile::new("t.java", format!("class C {{ {ret} m(int a, int b) {{\n{body}\n}} }}"));
        let unit = parse(&src).unwrap();
        (annotate_method(&unit.classes[0].methods[0]), src)
    }

    #[test]
    fn no_control_flow_no_candidates() {
        let (a, src) = setup("a = b + 1;\nb = a;", "void");
        assert!(enumerate_candidates(&a).is_empty());
        assert!(build_cache(&a, &src).entries.is_empty());
    }

    #[test]
    fn runs_need_a_contributing_statement() {
        // statements: s0 plain, s1 if, s2 plain -> runs containing s1: 2 * 2 = 4
        let (a, _) = setup("a = 1;\nif (a > b) { b = 2; }\nb = 3;", "void");
        let spans: Vec<_> = enumerate_candidates(&a).iter().map(|r| r.statements.len()).collect();
        assert_eq!(spans, [2, 3, 1, 2]);
    }

    #[test]
    fn return_flow_rules() {
        let (a, _) = setup("if (a > 0) return;\nb = 1;\nif (b > a) b = 2;", "void");
        let regions = enumerate_candidates(&a);
        let by_len = |n: usize, first: usize| {
            regions.iter().find(|r| r.statements.len() == n && r.span.start == a.method.body.stmts[first].span.start).unwrap()
        };
        assert_eq!(check_feasibility(&a, by_len(1, 0)), (false, Reason::ReturnFlow));
        assert_eq!(check_feasibility(&a, by_len(2, 0)), (false, Reason::ReturnFlow));
        assert_eq!(check_feasibility(&a, by_len(3, 0)), (true, Reason::Ok));
        let (a, _) = setup("if (a > 0) return 1;\nreturn 2;", "int");
        let whole = enumerate_candidates(&a).into_iter().find(|r| r.statements.len() == 2).unwrap();
        assert_eq!(check_feasibility(&a, &whole), (true, Reason::Ok));
    }

    #[test]
    fn multi_output() {
        let (a, _) = setup("int x = 0, y = 0;\nif (a > 0) { x = 1; y = 2; }\nb = x + y;", "void");
        let r = enumerate_candidates(&a).into_iter().find(|r| r.statements.len() == 1).unwrap();
        assert_eq!(check_feasibility(&a, &r), (false, Reason::MultiOutput));
    }

    #[test]
    fn loc_skips_blank_and_comment_lines() {
        let src = SourceFile::new("t.java", "a();\n\n// note\nb();\n/* x\n y */ c();");
        assert_eq!(lines_of_code(&src, Span::new(0, src.len_chars() - 1)), 3);
    }

    #[test]
    fn csv_round_trip_and_errors() {
        let (a, src) = setup("if (a > 0) return;\nfor (;;) { if (b > 0 && a > 0) break; }", "void");
        let cache = build_cache(&a, &src);
        let text = write_cache_csv(&cache);
        let back = read_cache_csv(&text).unwrap();
        assert_eq!(back.entries, cache.entries);
        assert_eq!(read_cache_csv("").unwrap().entries, vec![]);
        let err = read_cache_csv(&format!("{text}1, 2, 1, \"OK\", x, 0, 0, 0, 0, 0, 0, 0\n")).unwrap_err();
        assert_eq!(err.line, cache.entries.len() + 1);
        assert!(read_cache_csv("1, 2, 0, \"OK\", 0, 0, 0, 0, 0, 0, 0, 0").is_err());
    }
}
