//! Turns a solver selection into Extract Method rewrites and checks the
//! rewritten code against the model's predictions.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::extraction::{dataflow_facts, enumerate_candidates, Variable};
use crate::frontend::{parse, CompilationUnit, MethodDecl, SourceFile, Span, Stmt, StmtKind};
use crate::graph::{contains, in_conflict, ConflictGraph};
use crate::metrics::{annotate_method, AnnotatedMethod};
use crate::solver::SolveResult;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MethodId {
    pub class: String,
    pub name: String,
    /// 1-based position among same-named methods of the class.
    pub ordinal: usize,
}

impl MethodId {
    pub fn of(unit: &CompilationUnit, method: &MethodDecl) -> MethodId {
        let ordinal = unit
            .classes
            .iter()
            .filter(|c| c.name == method.owner_class)
            .flat_map(|c| &c.methods)
            .filter(|m| m.name.name == method.name.name && m.span.start <= method.span.start)
            .count();
        MethodId { class: method.owner_class.clone(), name: method.name.name.clone(), ordinal }
    }

    pub fn find<'u>(&self, unit: &'u CompilationUnit) -> Option<&'u MethodDecl> {
        let mut same: Vec<&MethodDecl> = unit
            .classes
            .iter()
            .filter(|c| c.name == self.class)
            .flat_map(|c| &c.methods)
            .filter(|m| m.name.name == self.name)
            .collect();
        same.sort_by_key(|m| m.span.start);
        same.get(self.ordinal.checked_sub(1)?).copied()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlannedExtraction {
    pub node: usize,
    pub span: Span,
    pub name: String,
    pub inputs: Vec<Variable>,
    pub output: Option<Variable>,
    /// Return type of the new method.
    pub returns: String,
    pub contains_return: bool,
    pub predicted_sscc: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractionPlan {
    pub method: MethodId,
    pub is_static: bool,
    /// Innermost first, then by start offset.
    pub entries: Vec<PlannedExtraction>,
    /// SSCC the original method should have after the rewrite.
    pub predicted_sscc: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MethodCheck {
    pub name: String,
    pub predicted: i64,
    pub measured: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RefactorOutcome {
    pub text: String,
    pub method: MethodId,
    /// The original method first, then the new ones in plan order.
    pub checks: Vec<MethodCheck>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RefactorError {
    #[error("plan regions {0:?} and {1:?} overlap without nesting")]
    PlanConflict(Span, Span),
    #[error("region {0:?} no longer delimits a statement run")]
    StaleOffsets(Span),
    #[error("method {0} not found")]
    MethodNotFound(String),
    #[error("verification failed: {}", describe(.0))]
    VerificationFailure(Vec<MethodCheck>),
}

fn describe(checks: &[MethodCheck]) -> String {
    let parts: Vec<String> = checks
        .iter()
        .map(|c| match c.measured {
            Some(m) => format!("{} measured {m}, predicted {}", c.name, c.predicted),
            None => format!("{} missing", c.name),
        })
        .collect();
    parts.join("; ")
}

/// Decodes a solved selection. `unit` supplies existing method names so the
/// new ones never collide.
pub fn make_plan(
    graph: &ConflictGraph,
    result: &SolveResult,
    annotated: &AnnotatedMethod,
    unit: &CompilationUnit,
) -> ExtractionPlan {
    let method = &annotated.method;
    let mut order = result.selected.clone();
    order.sort_by(|&a, &b| {
        let (sa, sb) = (graph.nodes[a].span, graph.nodes[b].span);
        if contains(sa, sb) {
            std::cmp::Ordering::Less
        } else if contains(sb, sa) {
            std::cmp::Ordering::Greater
        } else {
            sa.start.cmp(&sb.start)
        }
    });
    // containment is a partial order: settle it with a stable topological pass
    let mut sorted: Vec<usize> = Vec::with_capacity(order.len());
    while !order.is_empty() {
        let pick = order
            .iter()
            .position(|&a| !order.iter().any(|&b| contains(graph.nodes[b].span, graph.nodes[a].span)))
            .unwrap_or(0);
        sorted.push(order.remove(pick));
    }

    let mut taken: HashSet<String> = unit
        .classes
        .iter()
        .filter(|c| c.name == method.owner_class)
        .flat_map(|c| c.methods.iter().map(|m| m.name.name.clone()))
        .collect();
    let regions = enumerate_candidates(annotated);
    let mut k = 0;
    let entries = sorted
        .into_iter()
        .map(|node| {
            let span = graph.nodes[node].span;
            let region = regions.iter().find(|r| r.span == span).expect("graph node is a candidate region");
            let facts = dataflow_facts(annotated, region);
            let name = loop {
                k += 1;
                let name = format!("{}_extracted_{k}", method.name.name);
                if taken.insert(name.clone()) {
                    break name;
                }
            };
            let output = facts.outputs.first().cloned();
            let returns = match &output {
                Some(v) => v.ty.clone(),
                None if facts.contains_return && !method.is_void() => method.return_type.text.clone(),
                None => "void".to_string(),
            };
            PlannedExtraction {
                node,
                span,
                name,
                inputs: facts.inputs,
                output,
                returns,
                contains_return: facts.contains_return,
                predicted_sscc: result.limit_lhs.get(node).copied().unwrap_or(0),
            }
        })
        .collect();
    ExtractionPlan {
        method: MethodId::of(unit, method),
        is_static: method.is_static,
        entries,
        predicted_sscc: result.limit_lhs.first().copied().unwrap_or(0),
    }
}

pub fn apply_plan(source: &SourceFile, plan: &ExtractionPlan) -> Result<RefactorOutcome, RefactorError> {
    let unit = parse(source).map_err(|_| RefactorError::MethodNotFound(plan.method.name.clone()))?;
    let method = plan.method.find(&unit).ok_or_else(|| RefactorError::MethodNotFound(plan.method.name.clone()))?;
    let annotated = annotate_method(method);

    for (k, a) in plan.entries.iter().enumerate() {
        if annotated.find_run(a.span).is_none() || !method.body.span.contains(a.span) {
            return Err(RefactorError::StaleOffsets(a.span));
        }
        if let Some(b) = plan.entries[k + 1..].iter().find(|b| in_conflict(a.span, b.span) || a.span == b.span) {
            return Err(RefactorError::PlanConflict(a.span, b.span));
        }
    }

    let braceless = braceless_bodies(&method.body.stmts);
    let member_indent = source.indentation_at(method.span.start);
    let unit_indent = indent_unit(source, method, &member_indent);
    let body_indent = format!("{member_indent}{unit_indent}");

    // Work on the method text alone; spans move as inner regions shrink.
    let base = method.span.start;
    let mut buffer: Vec<char> = source.chars()[method.span.start..=method.span.end].to_vec();
    let mut spans: Vec<Span> = plan.entries.iter().map(|e| Span::new(e.span.start - base, e.span.end - base)).collect();
    let mut new_methods = Vec::new();

    for (k, entry) in plan.entries.iter().enumerate() {
        let span = spans[k];
        let region_indent = source.indentation_at(entry.span.start);
        let region_text: String = buffer[span.start..=span.end].iter().collect();
        new_methods.push(render_method(plan, entry, &region_text, &region_indent, &member_indent, &body_indent));

        let lines = call_site(entry, &annotated, method);
        let call = if lines.len() > 1 && braceless.contains(&entry.span) {
            format!("{{ {} }}", lines.join(" "))
        } else {
            lines.join(&format!("\n{region_indent}"))
        };
        let call: Vec<char> = call.chars().collect();
        let old_len = span.end - span.start + 1;
        buffer.splice(span.start..=span.end, call.iter().copied());
        let delta = call.len() as isize - old_len as isize;
        for other in spans.iter_mut().skip(k + 1) {
            let shift = |x: usize| (x as isize + delta) as usize;
            if other.start > span.end {
                *other = Span::new(shift(other.start), shift(other.end));
            } else if other.end >= span.end {
                other.end = shift(other.end);
            }
        }
    }

    let chars = source.chars();
    let mut text: String = chars[..method.span.start].iter().collect();
    text.extend(buffer.iter());
    for m in &new_methods {
        text.push_str("\n\n");
        text.push_str(m);
    }
    text.extend(chars[method.span.end + 1..].iter());

    let mut checks = vec![MethodCheck { name: plan.method.name.clone(), predicted: plan.predicted_sscc, measured: None }];
    checks.extend(
        plan.entries
            .iter()
            .map(|e| MethodCheck { name: e.name.clone(), predicted: e.predicted_sscc, measured: None }),
    );
    let mut outcome = RefactorOutcome { text, method: plan.method.clone(), checks };
    measure(&mut outcome);
    Ok(outcome)
}

/// Re-parses the outcome text and refreshes the measured values.
fn measure(outcome: &mut RefactorOutcome) {
    let file = SourceFile::new("rewritten.java", outcome.text.clone());
    let unit = parse(&file).ok();
    for (k, check) in outcome.checks.iter_mut().enumerate() {
        let id = if k == 0 {
            outcome.method.clone()
        } else {
            MethodId { class: outcome.method.class.clone(), name: check.name.clone(), ordinal: 1 }
        };
        check.measured = unit
            .as_ref()
            .and_then(|u| id.find(u))
            .filter(|m| m.is_analyzable())
            .map(|m| annotate_method(m).sscc());
    }
}

/// Re-measures every affected method and checks it against the prediction
/// and the threshold.
pub fn verify(outcome: &RefactorOutcome, tau: u32) -> Result<Vec<MethodCheck>, RefactorError> {
    let mut fresh = outcome.clone();
    measure(&mut fresh);
    let bad: Vec<MethodCheck> = fresh
        .checks
        .iter()
        .filter(|c| c.measured.is_none_or(|m| i64::from(m) != c.predicted || m > tau))
        .cloned()
        .collect();
    if bad.is_empty() {
        Ok(fresh.checks)
    } else {
        Err(RefactorError::VerificationFailure(bad))
    }
}

fn call_site(entry: &PlannedExtraction, annotated: &AnnotatedMethod, method: &MethodDecl) -> Vec<String> {
    let args: Vec<&str> = entry.inputs.iter().map(|v| v.name.as_str()).collect();
    let call = format!("{}({})", entry.name, args.join(", "));
    if let Some(out) = &entry.output {
        return if out.declared_in_region {
            vec![format!("{} {} = {call};", out.ty, out.name)]
        } else {
            vec![format!("{} = {call};", out.name)]
        };
    }
    if entry.contains_return {
        if !method.is_void() {
            return vec![format!("return {call};")];
        }
        let at_tail = annotated
            .method
            .body
            .stmts
            .last()
            .is_some_and(|s| s.span.end == entry.span.end);
        if !at_tail {
            return vec![format!("{call};"), "return;".to_string()];
        }
    }
    vec![format!("{call};")]
}

fn render_method(
    plan: &ExtractionPlan,
    entry: &PlannedExtraction,
    region_text: &str,
    region_indent: &str,
    member_indent: &str,
    body_indent: &str,
) -> String {
    let params: Vec<String> = entry.inputs.iter().map(|v| format!("{} {}", v.ty, v.name)).collect();
    let modifiers = if plan.is_static { "private static" } else { "private" };
    let mut out = format!("{member_indent}{modifiers} {} {}({}) {{\n", entry.returns, entry.name, params.join(", "));
    for (k, line) in region_text.lines().enumerate() {
        let stripped = if k == 0 { line } else { line.strip_prefix(region_indent).unwrap_or(line.trim_start()) };
        if stripped.trim().is_empty() {
            out.push('\n');
        } else {
            out.push_str(body_indent);
            out.push_str(stripped);
            out.push('\n');
        }
    }
    if let Some(v) = &entry.output {
        out.push_str(&format!("{body_indent}return {};\n", v.name));
    }
    out.push_str(member_indent);
    out.push('}');
    out
}

/// One indentation step, read from the first body statement when possible.
fn indent_unit(source: &SourceFile, method: &MethodDecl, member_indent: &str) -> String {
    method
        .body
        .stmts
        .first()
        .map(|s| source.indentation_at(s.span.start))
        .filter(|_| source.line_of(method.body.stmts[0].span.start) != source.line_of(method.span.start))
        .and_then(|i| i.strip_prefix(member_indent).map(str::to_string))
        .filter(|u| !u.is_empty())
        .unwrap_or_else(|| "    ".to_string())
}

/// Spans of branch and loop bodies written without braces.
fn braceless_bodies(stmts: &[Stmt]) -> HashSet<Span> {
    fn walk(s: &Stmt, out: &mut HashSet<Span>) {
        let body = |b: &Stmt, out: &mut HashSet<Span>| {
            if !matches!(b.kind, StmtKind::Block(_)) {
                out.insert(b.span);
            }
            walk(b, out);
        };
        match &s.kind {
            StmtKind::Block(b) => b.stmts.iter().for_each(|s| walk(s, out)),
            StmtKind::If { then_branch, else_branch, .. } => {
                body(then_branch, out);
                if let Some(e) = else_branch {
                    body(e, out);
                }
            }
            StmtKind::While { body: b, .. }
            | StmtKind::DoWhile { body: b, .. }
            | StmtKind::For { body: b, .. }
            | StmtKind::ForEach { body: b, .. }
            | StmtKind::Labeled { body: b, .. } => body(b, out),
            StmtKind::Switch { groups, .. } => groups.iter().flat_map(|g| &g.stmts).for_each(|s| walk(s, out)),
            StmtKind::Try { body: b, catches, finally } => {
                b.stmts.iter().for_each(|s| walk(s, out));
                catches.iter().flat_map(|c| &c.body.stmts).for_each(|s| walk(s, out));
                if let Some(f) = finally {
                    f.stmts.iter().for_each(|s| walk(s, out));
                }
            }
            _ => {}
        }
    }
    let mut out = HashSet::new();
    stmts.iter().for_each(|s| walk(s, &mut out));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extraction::build_cache;
    use crate::graph::build_graph;
    use crate::ilp::build_model;
    use crate::solver::{solve, Status};
    use std::time::Duration;

    struct Run {
        source: SourceFile,
        plan: ExtractionPlan,
        status: Status,
    }

    fn pipeline(text: &str, tau: u32) -> Run {
        let source = SourceFile::new("T.java", text);
        let unit = parse(&source).unwrap();
        let annotated = annotate_method(&unit.classes[0].methods[0]);
        let graph = build_graph(&build_cache(&annotated, &source));
        let result = solve(&build_model(&graph, tau), Duration::from_secs(10));
        let plan = make_plan(&graph, &result, &annotated, &unit);
        Run { source, plan, status: result.status }
    }

    const NESTED: &str = "class T {
    static int f(int a, boolean p) {
        int s = 0;
        if (a > 0) {
            for (int i = 0; i < a; i++) {
                if (p && i > 2) {
                    s += i;
                }
            }
        }
        return s;
    }
}
";

    #[test]
    fn empty_plan_is_identity() {
        let run = pipeline(NESTED, 50);
        assert_eq!(run.status, Status::Optimal);
        assert!(run.plan.entries.is_empty());
        let out = apply_plan(&run.source, &run.plan).unwrap();
        assert_eq!(out.text, NESTED);
        verify(&out, 50).unwrap();
    }

    #[test]
    fn extraction_with_output() {
        let run = pipeline(NESTED, 2);
        assert_eq!(run.status, Status::Optimal);
        let out = apply_plan(&run.source, &run.plan).unwrap();
        let checks = verify(&out, 2).unwrap_or_else(|e| panic!("{e}\n{}", out.text));
        assert!(checks.iter().all(|c| c.measured.map(i64::from) == Some(c.predicted)));
        assert!(out.text.contains("private static int f_extracted_1("), "{}", out.text);
    }

    #[test]
    fn corrupted_outcome_fails() {
        let run = pipeline(NESTED, 4);
        let mut out = apply_plan(&run.source, &run.plan).unwrap();
        verify(&out, 4).unwrap();
        out.text = out.text.replacen("return s;", "if (a > 1) { a++; } return s;", 1);
        assert!(matches!(verify(&out, 4), Err(RefactorError::VerificationFailure(_))));
    }

    #[test]
    fn void_return_call_site() {
        let text = "class T {
    void g(int a, boolean p) {
        if (p) {
            if (a > 1 && a < 9 || a == 4) {
                System.out.println(a);
                return;
            } else {
                a++;
                return;
            }
        }
        System.out.println(a);
    }
}
";
        let run = pipeline(text, 4);
        assert_eq!(run.status, Status::Optimal);
        let out = apply_plan(&run.source, &run.plan).unwrap();
        verify(&out, 4).unwrap_or_else(|e| panic!("{e}\n{}", out.text));
        assert!(out.text.contains("            g_extracted_1(a);\n            return;\n"), "{}", out.text);
    }

    #[test]
    fn conflicting_plan_rejected() {
        let mut run = pipeline(NESTED, 2);
        let entry = run.plan.entries[0].clone();
        run.plan.entries.push(PlannedExtraction { span: Span::new(entry.span.start - 1, entry.span.end - 3), ..entry.clone() });
        assert!(apply_plan(&run.source, &run.plan).is_err());
    }
}
