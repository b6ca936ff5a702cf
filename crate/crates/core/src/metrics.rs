//! Cognitive complexity of methods and of sibling statement runs.
//!
//! Every scoring construct is recorded once with its own increment and its
//! absolute nesting level. Region metrics are plain sums over the constructs
//! whose anchor offset falls inside the region.

use serde::{Deserialize, Serialize};

use crate::frontend::{BinaryOp, Block, Expr, ExprKind, MethodDecl, Span, Stmt, StmtKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConstructKind {
    If,
    ElseIf,
    Else,
    Ternary,
    Switch,
    For,
    ForEach,
    While,
    DoWhile,
    Catch,
    LabeledJump,
    LogicalSequence(BinaryOp),
    Recursion,
}

impl ConstructKind {
    pub fn is_penalized(self) -> bool {
        use ConstructKind::*;
        matches!(self, If | Ternary | Switch | For | ForEach | While | DoWhile | Catch)
    }
}

/// One scoring construct of a method.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Construct {
    pub kind: ConstructKind,
    /// Character offset identifying the construct (keyword or operator).
    pub anchor: usize,
    pub inherent: u32,
    pub lambda: u32,
}

impl Construct {
    pub fn is_penalized(&self) -> bool {
        self.kind.is_penalized()
    }

    pub fn nesting_penalty(&self) -> u32 {
        if self.is_penalized() {
            self.lambda
        } else {
            0
        }
    }

    pub fn weight(&self) -> u32 {
        self.inherent + self.nesting_penalty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatedMethod {
    pub method: MethodDecl,
    /// Sorted by anchor.
    pub constructs: Vec<Construct>,
}

/// A statement list (block contents, or a lone non-block body) at one nesting level.
#[derive(Debug, Clone, Copy)]
pub struct StatementList<'a> {
    pub lambda: u32,
    pub stmts: &'a [Stmt],
    /// The top-level list of the method body.
    pub is_body: bool,
}

/// A contiguous run `stmts` taken from one statement list.
#[derive(Debug, Clone, Copy)]
pub struct Run<'a> {
    pub list: StatementList<'a>,
    pub first: usize,
    pub last: usize,
}

impl<'a> Run<'a> {
    pub fn stmts(&self) -> &'a [Stmt] {
        &self.list.stmts[self.first..=self.last]
    }

    pub fn span(&self) -> Span {
        Span::new(self.list.stmts[self.first].span.start, self.list.stmts[self.last].span.end)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SequenceMetrics {
    pub iota: u32,
    pub nu: u32,
    pub mu: u32,
    pub lambda: u32,
    pub ccr: u32,
    pub nmcc: u32,
}

impl SequenceMetrics {
    pub fn new(iota: u32, nu: u32, mu: u32, lambda: u32) -> Self {
        SequenceMetrics { iota, nu, mu, lambda, ccr: mu * lambda + iota + nu, nmcc: iota + nu }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MetricsError {
    #[error("region {0:?} does not delimit a run of sibling statements")]
    RegionNotSiblingRun(Span),
}

pub fn annotate_method(method: &MethodDecl) -> AnnotatedMethod {
    let mut a = Annotator { method_name: &method.name.name, out: Vec::new() };
    a.stmts(&method.body.stmts, 0);
    let mut constructs = a.out;
    constructs.sort_by_key(|c| c.anchor);
    AnnotatedMethod { method: method.clone(), constructs }
}

pub fn method_sscc(annotated: &AnnotatedMethod) -> u32 {
    annotated.constructs.iter().map(Construct::weight).sum()
}

pub fn region_metrics(annotated: &AnnotatedMethod, region: Span) -> Result<SequenceMetrics, MetricsError> {
    let run = annotated.find_run(region).ok_or(MetricsError::RegionNotSiblingRun(region))?;
    Ok(annotated.metrics_at(region, run.list.lambda))
}

impl AnnotatedMethod {
    pub fn sscc(&self) -> u32 {
        method_sscc(self)
    }

    pub fn constructs_in(&self, region: Span) -> impl Iterator<Item = &Construct> {
        let lo = self.constructs.partition_point(|c| c.anchor < region.start);
        self.constructs[lo..].iter().take_while(move |c| c.anchor <= region.end)
    }

    /// Metrics of `region` taken as a sequence at nesting level `lambda`.
    pub fn metrics_at(&self, region: Span, lambda: u32) -> SequenceMetrics {
        let (mut iota, mut nu, mut mu) = (0, 0, 0);
        for c in self.constructs_in(region) {
            iota += c.inherent;
            if c.is_penalized() {
                nu += c.lambda - lambda;
                if c.lambda >= 1 {
                    mu += 1;
                }
            }
        }
        SequenceMetrics::new(iota, nu, mu, lambda)
    }

    pub fn contributes(&self, region: Span) -> bool {
        self.constructs_in(region).next().is_some()
    }

    /// Every statement list of the body, outermost first.
    pub fn statement_lists(&self) -> Vec<StatementList<'_>> {
        let mut out = Vec::new();
        let body = &self.method.body;
        out.push(StatementList { lambda: 0, stmts: &body.stmts, is_body: true });
        collect_lists(&body.stmts, 0, &mut out);
        out
    }

    pub fn find_run(&self, region: Span) -> Option<Run<'_>> {
        self.statement_lists().into_iter().find_map(|list| {
            let first = list.stmts.iter().position(|s| s.span.start == region.start)?;
            let last = list.stmts.iter().position(|s| s.span.end == region.end)?;
            (first <= last).then_some(Run { list, first, last })
        })
    }

    pub fn body_span(&self) -> Option<Span> {
        let stmts = &self.method.body.stmts;
        Some(Span::new(stmts.first()?.span.start, stmts.last()?.span.end))
    }
}

fn collect_lists<'a>(stmts: &'a [Stmt], lambda: u32, out: &mut Vec<StatementList<'a>>) {
    for s in stmts {
        collect_in_stmt(s, lambda, out);
    }
}

/// Lists reachable from `stmt`, which itself sits at `lambda`.
fn collect_in_stmt<'a>(stmt: &'a Stmt, lambda: u32, out: &mut Vec<StatementList<'a>>) {
    let body = |s: &'a Stmt, level: u32, out: &mut Vec<StatementList<'a>>| match &s.kind {
        StmtKind::Block(b) => {
            out.push(StatementList { lambda: level, stmts: &b.stmts, is_body: false });
            collect_lists(&b.stmts, level, out);
        }
        _ => {
            out.push(StatementList { lambda: level, stmts: std::slice::from_ref(s), is_body: false });
            collect_in_stmt(s, level, out);
        }
    };
    let block = |b: &'a Block, level: u32, out: &mut Vec<StatementList<'a>>| {
        out.push(StatementList { lambda: level, stmts: &b.stmts, is_body: false });
        collect_lists(&b.stmts, level, out);
    };
    match &stmt.kind {
        StmtKind::Block(b) => block(b, lambda, out),
        StmtKind::If { then_branch, else_branch, .. } => {
            body(then_branch, lambda + 1, out);
            let mut next = else_branch.as_deref();
            while let Some(e) = next {
                match &e.kind {
                    StmtKind::If { then_branch, else_branch, .. } => {
                        body(then_branch, lambda + 1, out);
                        next = else_branch.as_deref();
                    }
                    _ => {
                        body(e, lambda + 1, out);
                        next = None;
                    }
                }
            }
        }
        StmtKind::While { body: b, .. }
        | StmtKind::DoWhile { body: b, .. }
        | StmtKind::For { body: b, .. }
        | StmtKind::ForEach { body: b, .. } => body(b, lambda + 1, out),
        StmtKind::Switch { groups, .. } => {
            for g in groups {
                out.push(StatementList { lambda: lambda + 1, stmts: &g.stmts, is_body: false });
                collect_lists(&g.stmts, lambda + 1, out);
            }
        }
        StmtKind::Try { body: b, catches, finally } => {
            block(b, lambda, out);
            for c in catches {
                block(&c.body, lambda + 1, out);
            }
            if let Some(f) = finally {
                block(f, lambda, out);
            }
        }
        StmtKind::Labeled { body: b, .. } => match &b.kind {
            StmtKind::Block(inner) => block(inner, lambda, out),
            _ => collect_in_stmt(b, lambda, out),
        },
        _ => {}
    }
}

struct Annotator<'m> {
    method_name: &'m str,
    out: Vec<Construct>,
}

impl Annotator<'_> {
    fn push(&mut self, kind: ConstructKind, anchor: usize, lambda: u32) {
        self.out.push(Construct { kind, anchor, inherent: 1, lambda });
    }

    fn stmts(&mut self, stmts: &[Stmt], lambda: u32) {
        for s in stmts {
            self.stmt(s, lambda);
        }
    }

    fn stmt(&mut self, stmt: &Stmt, lambda: u32) {
        let at = stmt.span.start;
        match &stmt.kind {
            StmtKind::Block(b) => self.stmts(&b.stmts, lambda),
            StmtKind::LocalVar(decl) => {
                for d in &decl.declarators {
                    if let Some(init) = &d.init {
                        self.expr(init, lambda);
                    }
                }
            }
            StmtKind::Expr(e) | StmtKind::Throw(e) | StmtKind::Return(Some(e)) => self.expr(e, lambda),
            StmtKind::If { .. } => self.if_chain(stmt, lambda, ConstructKind::If),
            StmtKind::While { cond, body } => {
                self.push(ConstructKind::While, at, lambda);
                self.expr(cond, lambda);
                self.stmt(body, lambda + 1);
            }
            StmtKind::DoWhile { body, cond } => {
                self.push(ConstructKind::DoWhile, at, lambda);
                self.stmt(body, lambda + 1);
                self.expr(cond, lambda);
            }
            StmtKind::For { init, cond, update, body } => {
                self.push(ConstructKind::For, at, lambda);
                match init {
                    Some(crate::frontend::ForInit::Decl(decl)) => {
                        decl.declarators.iter().filter_map(|d| d.init.as_ref()).for_each(|e| self.expr(e, lambda))
                    }
                    Some(crate::frontend::ForInit::Exprs(es)) => es.iter().for_each(|e| self.expr(e, lambda)),
                    None => {}
                }
                if let Some(c) = cond {
                    self.expr(c, lambda);
                }
                update.iter().for_each(|e| self.expr(e, lambda));
                self.stmt(body, lambda + 1);
            }
            StmtKind::ForEach { iterable, body, .. } => {
                self.push(ConstructKind::ForEach, at, lambda);
                self.expr(iterable, lambda);
                self.stmt(body, lambda + 1);
            }
            StmtKind::Switch { selector, groups } => {
                self.push(ConstructKind::Switch, at, lambda);
                self.expr(selector, lambda);
                for g in groups {
                    g.labels.iter().flatten().for_each(|e| self.expr(e, lambda));
                    self.stmts(&g.stmts, lambda + 1);
                }
            }
            StmtKind::Try { body, catches, finally } => {
                self.stmts(&body.stmts, lambda);
                for c in catches {
                    self.push(ConstructKind::Catch, c.keyword.start, lambda);
                    self.stmts(&c.body.stmts, lambda + 1);
                }
                if let Some(f) = finally {
                    self.stmts(&f.stmts, lambda);
                }
            }
            StmtKind::Break(Some(_)) | StmtKind::Continue(Some(_)) => self.push(ConstructKind::LabeledJump, at, lambda),
            StmtKind::Labeled { body, .. } => self.stmt(body, lambda),
            StmtKind::Break(None) | StmtKind::Continue(None) | StmtKind::Return(None) | StmtKind::Empty => {}
        }
    }

    fn if_chain(&mut self, stmt: &Stmt, lambda: u32, kind: ConstructKind) {
        let StmtKind::If { cond, then_branch, else_kw, else_branch } = &stmt.kind else {
            unreachable!("if_chain on non-if")
        };
        self.push(kind, stmt.span.start, lambda);
        self.expr(cond, lambda);
        self.stmt(then_branch, lambda + 1);
        if let (Some(kw), Some(e)) = (else_kw, else_branch) {
            if matches!(e.kind, StmtKind::If { .. }) {
                self.if_chain(e, lambda, ConstructKind::ElseIf);
            } else {
                self.push(ConstructKind::Else, kw.start, lambda);
                self.stmt(e, lambda + 1);
            }
        }
    }

    fn expr(&mut self, e: &Expr, lambda: u32) {
        match &e.kind {
            ExprKind::Binary { op, .. } if op.is_logical() => {
                let mut ops = Vec::new();
                let mut leaves = Vec::new();
                flatten_logical(e, &mut ops, &mut leaves);
                let mut prev = None;
                for (op, at) in ops {
                    if prev != Some(op) {
                        self.push(ConstructKind::LogicalSequence(op), at, lambda);
                    }
                    prev = Some(op);
                }
                for leaf in leaves {
                    self.expr(leaf, lambda);
                }
            }
            ExprKind::Conditional { question, cond, then_expr, else_expr } => {
                self.push(ConstructKind::Ternary, question.start, lambda);
                self.expr(cond, lambda);
                self.expr(then_expr, lambda + 1);
                self.expr(else_expr, lambda + 1);
            }
            ExprKind::Call { target, name, .. } => {
                let own = target.as_deref().is_none_or(|t| matches!(t.kind, ExprKind::This));
                if own && name.name == self.method_name {
                    self.push(ConstructKind::Recursion, name.span.start, lambda);
                }
                e.children().into_iter().for_each(|c| self.expr(c, lambda));
            }
            _ => e.children().into_iter().for_each(|c| self.expr(c, lambda)),
        }
    }
}

/// In-order logical operators of a maximal `&&`/`||` tree, looking through
/// parentheses; everything else is a leaf.
fn flatten_logical<'e>(e: &'e Expr, ops: &mut Vec<(BinaryOp, usize)>, leaves: &mut Vec<&'e Expr>) {
    let inner = e.unparen();
    match &inner.kind {
        ExprKind::Binary { op, op_span, lhs, rhs } if op.is_logical() => {
            flatten_logical(lhs, ops, leaves);
            ops.push((*op, op_span.start));
            flatten_logical(rhs, ops, leaves);
        }
        _ => leaves.push(inner),
    }
}
