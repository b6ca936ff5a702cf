//! Local-variable def/use facts for a statement run.
//!
//! Names are resolved against the method's scope chain once; anything that
//! does not resolve is a field and never becomes a parameter or an output.

use std::collections::{BTreeSet, HashMap};

use crate::frontend::{Expr, ExprKind, ForInit, MethodDecl, Span, Stmt, StmtKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub struct VarId(pub usize);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarInfo {
    pub name: String,
    pub ty: String,
    /// Offset of the declaring identifier.
    pub decl: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Access {
    Read,
    Write,
    ReadWrite,
    Decl { init: bool },
}

impl Access {
    pub fn reads(self) -> bool {
        matches!(self, Access::Read | Access::ReadWrite)
    }

    pub fn writes(self) -> bool {
        !matches!(self, Access::Read | Access::Decl { init: false })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VarRef {
    pub var: VarId,
    pub offset: usize,
    pub access: Access,
}

/// Resolved variables of one method.
#[derive(Debug, Clone, Default)]
pub struct Scopes {
    pub vars: Vec<VarInfo>,
    /// Name-expression or declarator offset to variable.
    pub uses: HashMap<usize, VarId>,
    /// Sorted by offset.
    pub refs: Vec<VarRef>,
    /// `(loop statement, loop body)` spans.
    pub loops: Vec<(Span, Span)>,
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Variable {
    pub id: VarId,
    pub name: String,
    pub ty: String,
    pub declared_in_region: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DataflowFacts {
    /// Ordered by first reference inside the region.
    pub inputs: Vec<Variable>,
    pub outputs: Vec<Variable>,
    pub contains_return: bool,
    pub all_paths_return: bool,
    /// Spans of `break`/`continue` statements whose target lies outside.
    pub jump_escapes: Vec<Span>,
    /// Variables declared outside the region, written inside, and not passed in.
    pub locals: Vec<Variable>,
}

impl Scopes {
    pub fn resolve(method: &MethodDecl) -> Scopes {
        let mut r = Resolver { out: Scopes::default(), stack: vec![HashMap::new()] };
        for p in &method.params {
            r.declare(&p.name.name, p.ty.text.clone(), p.name.span.start, Access::Decl { init: true });
        }
        r.block(&method.body.stmts);
        let mut out = r.out;
        out.refs.sort_by_key(|r| r.offset);
        out
    }

    pub fn var(&self, id: VarId) -> &VarInfo {
        &self.vars[id.0]
    }

    fn variable(&self, id: VarId, region: Span) -> Variable {
        let info = self.var(id);
        Variable { id, name: info.name.clone(), ty: info.ty.clone(), declared_in_region: region.contains_offset(info.decl) }
    }

    /// Facts for the run `stmts`, whose extent is `region`.
    pub fn facts(&self, stmts: &[Stmt], region: Span) -> DataflowFacts {
        let in_region = |r: &&VarRef| region.contains_offset(r.offset);
        let mut first_ref: Vec<(usize, VarId)> = Vec::new();
        let mut written = BTreeSet::new();
        for r in self.refs.iter().filter(in_region) {
            if !first_ref.iter().any(|(_, v)| *v == r.var) {
                first_ref.push((r.offset, r.var));
            }
            if r.access.writes() || matches!(r.access, Access::Decl { .. }) {
                written.insert(r.var);
            }
        }

        let mut exposure = Exposure { scopes: self, exposed: BTreeSet::new() };
        let end_state = exposure.stmts(stmts, Some(BTreeSet::new()));

        // a run that never completes normally hands no values to what follows
        let outputs: Vec<VarId> = match end_state {
            Some(_) => written.iter().copied().filter(|v| self.live_after(*v, region)).collect(),
            None => Vec::new(),
        };
        let declared_outside = |v: &VarId| !region.contains_offset(self.var(*v).decl);
        let mut inputs: BTreeSet<VarId> = exposure.exposed.into_iter().filter(declared_outside).collect();
        if let Some(assigned) = &end_state {
            for v in outputs.iter().filter(|v| declared_outside(v)) {
                if !assigned.contains(v) {
                    inputs.insert(*v);
                }
            }
        }

        let ordered = |set: &dyn Fn(VarId) -> bool| -> Vec<Variable> {
            first_ref.iter().filter(|(_, v)| set(*v)).map(|(_, v)| self.variable(*v, region)).collect()
        };
        let locals = ordered(&|v| written.contains(&v) && declared_outside(&v) && !inputs.contains(&v));

        let mut jumps = JumpCheck { labels: Vec::new(), breakable: 0, loops: 0, escapes: Vec::new(), returns: false };
        jumps.stmts(stmts);

        let contains_return = jumps.returns;
        DataflowFacts {
            inputs: ordered(&|v| inputs.contains(&v)),
            outputs: ordered(&|v| outputs.contains(&v)),
            contains_return,
            all_paths_return: contains_return && list_terminates(stmts),
            jump_escapes: jumps.escapes,
            locals,
        }
    }

    /// Whether a value written to `v` inside `region` may be read afterwards.
    fn live_after(&self, v: VarId, region: Span) -> bool {
        let reads = || self.refs.iter().filter(move |r| r.var == v && r.access.reads());
        if reads().any(|r| r.offset > region.end) {
            return true;
        }
        let decl = self.var(v).decl;
        self.loops.iter().any(|(stmt, body)| {
            body.contains(region) && !body.contains_offset(decl) && reads().any(|r| stmt.contains_offset(r.offset))
        })
    }
}

struct Resolver {
    out: Scopes,
    stack: Vec<HashMap<String, VarId>>,
}

impl Resolver {
    fn declare(&mut self, name: &str, ty: String, at: usize, access: Access) {
        let id = VarId(self.out.vars.len());
        self.out.vars.push(VarInfo { name: name.to_string(), ty, decl: at });
        self.stack.last_mut().expect("scope").insert(name.to_string(), id);
        self.out.uses.insert(at, id);
        self.out.refs.push(VarRef { var: id, offset: at, access });
    }

    fn lookup(&self, name: &str) -> Option<VarId> {
        self.stack.iter().rev().find_map(|s| s.get(name).copied())
    }

    fn scoped(&mut self, f: impl FnOnce(&mut Self)) {
        self.stack.push(HashMap::new());
        f(self);
        self.stack.pop();
    }

    fn block(&mut self, stmts: &[Stmt]) {
        self.scoped(|r| stmts.iter().for_each(|s| r.stmt(s)));
    }

    fn local(&mut self, decl: &crate::frontend::LocalVar) {
        for d in &decl.declarators {
            if let Some(init) = &d.init {
                self.expr(init);
            }
            let ty = format!("{}{}", decl.ty.text, "[]".repeat(d.dims));
            self.declare(&d.name.name, ty, d.name.span.start, Access::Decl { init: d.init.is_some() });
        }
    }

    fn stmt(&mut self, s: &Stmt) {
        match &s.kind {
            StmtKind::Block(b) => self.block(&b.stmts),
            StmtKind::LocalVar(decl) => self.local(decl),
            StmtKind::Expr(e) | StmtKind::Throw(e) | StmtKind::Return(Some(e)) => self.expr(e),
            StmtKind::If { cond, then_branch, else_branch, .. } => {
                self.expr(cond);
                self.scoped(|r| r.stmt(then_branch));
                if let Some(e) = else_branch {
                    self.scoped(|r| r.stmt(e));
                }
            }
            StmtKind::While { cond, body } => {
                self.out.loops.push((s.span, body.span));
                self.expr(cond);
                self.scoped(|r| r.stmt(body));
            }
            StmtKind::DoWhile { body, cond } => {
                self.out.loops.push((s.span, body.span));
                self.scoped(|r| r.stmt(body));
                self.expr(cond);
            }
            StmtKind::For { init, cond, update, body } => {
                self.out.loops.push((s.span, body.span));
                self.scoped(|r| {
                    match init {
                        Some(ForInit::Decl(decl)) => r.local(decl),
                        Some(ForInit::Exprs(es)) => es.iter().for_each(|e| r.expr(e)),
                        None => {}
                    }
                    if let Some(c) = cond {
                        r.expr(c);
                    }
                    update.iter().for_each(|e| r.expr(e));
                    r.scoped(|r| r.stmt(body));
                });
            }
            StmtKind::ForEach { ty, name, iterable, body } => {
                self.out.loops.push((s.span, body.span));
                self.expr(iterable);
                self.scoped(|r| {
                    r.declare(&name.name, ty.text.clone(), name.span.start, Access::Decl { init: true });
                    r.scoped(|r| r.stmt(body));
                });
            }
            StmtKind::Switch { selector, groups } => {
                self.expr(selector);
                self.scoped(|r| {
                    for g in groups {
                        g.labels.iter().flatten().for_each(|e| r.expr(e));
                        g.stmts.iter().for_each(|s| r.stmt(s));
                    }
                });
            }
            StmtKind::Try { body, catches, finally } => {
                self.block(&body.stmts);
                for c in catches {
                    let ty = if c.types.len() == 1 { c.types[0].text.clone() } else { "Exception".to_string() };
                    self.scoped(|r| {
                        r.declare(&c.name.name, ty, c.name.span.start, Access::Decl { init: true });
                        r.block(&c.body.stmts);
                    });
                }
                if let Some(f) = finally {
                    self.block(&f.stmts);
                }
            }
            StmtKind::Labeled { body, .. } => self.stmt(body),
            StmtKind::Break(_) | StmtKind::Continue(_) | StmtKind::Return(None) | StmtKind::Empty => {}
        }
    }

    fn record(&mut self, name_expr: &Expr, access: Access) -> bool {
        let ExprKind::Name(n) = &name_expr.kind else { return false };
        let Some(v) = self.lookup(n) else { return false };
        self.out.uses.insert(name_expr.span.start, v);
        self.out.refs.push(VarRef { var: v, offset: name_expr.span.start, access });
        true
    }

    fn expr(&mut self, e: &Expr) {
        match &e.kind {
            ExprKind::Name(_) => {
                self.record(e, Access::Read);
            }
            ExprKind::Assign { op, target, value } => {
                let access = if op.is_some() { Access::ReadWrite } else { Access::Write };
                if !self.record(target.unparen(), access) {
                    self.expr(target);
                }
                self.expr(value);
            }
            ExprKind::Unary { op, operand } if op.writes_operand() => {
                if !self.record(operand.unparen(), Access::ReadWrite) {
                    self.expr(operand);
                }
            }
            _ => e.children().into_iter().for_each(|c| self.expr(c)),
        }
    }
}

type Assigned = BTreeSet<VarId>;

/// `None` marks an unreachable point.
type State = Option<Assigned>;

fn join(a: State, b: State) -> State {
    match (a, b) {
        (None, s) | (s, None) => s,
        (Some(a), Some(b)) => Some(a.intersection(&b).copied().collect()),
    }
}

/// Forward definite-assignment walk collecting reads not preceded by a
/// write on every path from the start of the run.
struct Exposure<'s> {
    scopes: &'s Scopes,
    exposed: BTreeSet<VarId>,
}

impl Exposure<'_> {
    fn var_of(&self, e: &Expr) -> Option<VarId> {
        match &e.kind {
            ExprKind::Name(_) => self.scopes.uses.get(&e.span.start).copied(),
            _ => None,
        }
    }

    fn read(&mut self, v: VarId, set: &Assigned) {
        if !set.contains(&v) {
            self.exposed.insert(v);
        }
    }

    fn stmts(&mut self, stmts: &[Stmt], mut st: State) -> State {
        for s in stmts {
            st = self.stmt(s, st);
        }
        st
    }

    fn local(&mut self, decl: &crate::frontend::LocalVar, set: &mut Assigned) {
        for d in &decl.declarators {
            if let Some(init) = &d.init {
                self.expr(init, set);
                if let Some(v) = self.scopes.uses.get(&d.name.span.start) {
                    set.insert(*v);
                }
            }
        }
    }

    fn stmt(&mut self, s: &Stmt, st: State) -> State {
        let mut set = st?;
        match &s.kind {
            StmtKind::Block(b) => return self.stmts(&b.stmts, Some(set)),
            StmtKind::LocalVar(decl) => self.local(decl, &mut set),
            StmtKind::Expr(e) => self.expr(e, &mut set),
            StmtKind::Throw(e) | StmtKind::Return(Some(e)) => {
                self.expr(e, &mut set);
                return None;
            }
            StmtKind::Return(None) | StmtKind::Break(_) | StmtKind::Continue(_) => return None,
            StmtKind::If { cond, then_branch, else_branch, .. } => {
                self.expr(cond, &mut set);
                let t = self.stmt(then_branch, Some(set.clone()));
                let f = match else_branch {
                    Some(e) => self.stmt(e, Some(set)),
                    None => Some(set),
                };
                return join(t, f);
            }
            StmtKind::While { cond, body } => {
                self.expr(cond, &mut set);
                self.stmt(body, Some(set.clone()));
            }
            StmtKind::DoWhile { body, cond } => {
                self.stmt(body, Some(set.clone()));
                self.expr(cond, &mut set.clone());
            }
            StmtKind::For { init, cond, update, body } => {
                match init {
                    Some(ForInit::Decl(decl)) => self.local(decl, &mut set),
                    Some(ForInit::Exprs(es)) => es.iter().for_each(|e| self.expr(e, &mut set)),
                    None => {}
                }
                if let Some(c) = cond {
                    self.expr(c, &mut set);
                }
                self.stmt(body, Some(set.clone()));
                let mut after_body = set.clone();
                update.iter().for_each(|e| self.expr(e, &mut after_body));
            }
            StmtKind::ForEach { name, iterable, body, .. } => {
                self.expr(iterable, &mut set);
                let mut inner = set.clone();
                if let Some(v) = self.scopes.uses.get(&name.span.start) {
                    inner.insert(*v);
                }
                self.stmt(body, Some(inner));
            }
            StmtKind::Switch { selector, groups } => {
                self.expr(selector, &mut set);
                for g in groups {
                    self.stmts(&g.stmts, Some(set.clone()));
                }
            }
            StmtKind::Try { body, catches, finally } => {
                self.stmts(&body.stmts, Some(set.clone()));
                for c in catches {
                    let mut inner = set.clone();
                    if let Some(v) = self.scopes.uses.get(&c.name.span.start) {
                        inner.insert(*v);
                    }
                    self.stmts(&c.body.stmts, Some(inner));
                }
                if let Some(f) = finally {
                    return self.stmts(&f.stmts, Some(set));
                }
            }
            StmtKind::Labeled { body, .. } => {
                self.stmt(body, Some(set.clone()));
            }
            StmtKind::Empty => {}
        }
        Some(set)
    }

    fn expr(&mut self, e: &Expr, set: &mut Assigned) {
        match &e.kind {
            ExprKind::Name(_) => {
                if let Some(v) = self.var_of(e) {
                    self.read(v, set);
                }
            }
            ExprKind::Assign { op, target, value } => match self.var_of(target.unparen()) {
                Some(v) => {
                    if op.is_some() {
                        self.read(v, set);
                    }
                    self.expr(value, set);
                    set.insert(v);
                }
                None => {
                    self.expr(target, set);
                    self.expr(value, set);
                }
            },
            ExprKind::Unary { op, operand } if op.writes_operand() => match self.var_of(operand.unparen()) {
                Some(v) => {
                    self.read(v, set);
                    set.insert(v);
                }
                None => self.expr(operand, set),
            },
            ExprKind::Binary { op, lhs, rhs, .. } if op.is_logical() => {
                self.expr(lhs, set);
                self.expr(rhs, &mut set.clone());
            }
            ExprKind::Conditional { cond, then_expr, else_expr, .. } => {
                self.expr(cond, set);
                let mut t = set.clone();
                self.expr(then_expr, &mut t);
                let mut f = set.clone();
                self.expr(else_expr, &mut f);
                *set = t.intersection(&f).copied().collect();
            }
            _ => e.children().into_iter().for_each(|c| self.expr(c, set)),
        }
    }
}

/// Collects jumps that leave the run and notes any `return`.
struct JumpCheck {
    labels: Vec<String>,
    breakable: usize,
    loops: usize,
    escapes: Vec<Span>,
    returns: bool,
}

impl JumpCheck {
    fn stmts(&mut self, stmts: &[Stmt]) {
        stmts.iter().for_each(|s| self.stmt(s));
    }

    fn in_loop(&mut self, body: &Stmt) {
        self.breakable += 1;
        self.loops += 1;
        self.stmt(body);
        self.loops -= 1;
        self.breakable -= 1;
    }

    fn stmt(&mut self, s: &Stmt) {
        match &s.kind {
            StmtKind::Block(b) => self.stmts(&b.stmts),
            StmtKind::If { then_branch, else_branch, .. } => {
                self.stmt(then_branch);
                if let Some(e) = else_branch {
                    self.stmt(e);
                }
            }
            StmtKind::While { body, .. }
            | StmtKind::DoWhile { body, .. }
            | StmtKind::For { body, .. }
            | StmtKind::ForEach { body, .. } => self.in_loop(body),
            StmtKind::Switch { groups, .. } => {
                self.breakable += 1;
                groups.iter().for_each(|g| self.stmts(&g.stmts));
                self.breakable -= 1;
            }
            StmtKind::Try { body, catches, finally } => {
                self.stmts(&body.stmts);
                catches.iter().for_each(|c| self.stmts(&c.body.stmts));
                if let Some(f) = finally {
                    self.stmts(&f.stmts);
                }
            }
            StmtKind::Labeled { label, body } => {
                self.labels.push(label.name.clone());
                self.stmt(body);
                self.labels.pop();
            }
            StmtKind::Break(label) | StmtKind::Continue(label) => {
                let is_break = matches!(s.kind, StmtKind::Break(_));
                let inside = match label {
                    Some(l) => self.labels.contains(&l.name),
                    None if is_break => self.breakable > 0,
                    None => self.loops > 0,
                };
                if !inside {
                    self.escapes.push(s.span);
                }
            }
            StmtKind::Return(_) => self.returns = true,
            StmtKind::LocalVar(_) | StmtKind::Expr(_) | StmtKind::Throw(_) | StmtKind::Empty => {}
        }
    }
}

/// Structural check that control cannot fall off the end of `stmts`.
pub fn list_terminates(stmts: &[Stmt]) -> bool {
    stmts.iter().any(terminates)
}

fn terminates(s: &Stmt) -> bool {
    match &s.kind {
        StmtKind::Return(_) | StmtKind::Throw(_) => true,
        StmtKind::Block(b) => list_terminates(&b.stmts),
        StmtKind::If { then_branch, else_branch: Some(e), .. } => terminates(then_branch) && terminates(e),
        StmtKind::Try { body, catches, finally } => {
            finally.as_ref().is_some_and(|f| list_terminates(&f.stmts))
                || (list_terminates(&body.stmts) && catches.iter().all(|c| list_terminates(&c.body.stmts)))
        }
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{parse, SourceFile};

    struct Fixture {
        method: MethodDecl,
        src: SourceFile,
    }

    fn fixture(body: &str) -> Fixture {
        let src = SourceFile::new("t.java", format!("class C {{ int f; int m(int a, int b) {{\n{body}\n}} }}"));
        let method = parse(&src).unwrap().classes[0].methods[0].clone();
        Fixture { method, src }
    }

    impl Fixture {
        /// Facts for the top-level statements `first..=last`.
        fn facts(&self, first: usize, last: usize) -> DataflowFacts {
            let stmts = &self.method.body.stmts[first..=last];
            let span = Span::new(stmts[0].span.start, stmts[stmts.len() - 1].span.end);
            Scopes::resolve(&self.method).facts(stmts, span)
        }
    }

    fn names(vars: &[Variable]) -> Vec<&str> {
        vars.iter().map(|v| v.name.as_str()).collect()
    }

    #[test]
    fn straight_line_write_without_later_use() {
        let f = fixture("int x = 0;\nx = 1;\nreturn 0;");
        let facts = f.facts(1, 1);
        assert!(facts.inputs.is_empty() && facts.outputs.is_empty());
        assert_eq!(names(&facts.locals), ["x"]);
        let _ = &f.src;
    }

    #[test]
    fn fields_are_ignored_and_inputs_follow_first_use() {
        let f = fixture("int x = b + a + f;\nf = x;\nreturn x;");
        let facts = f.facts(0, 1);
        assert_eq!(names(&facts.inputs), ["b", "a"]);
        assert_eq!(names(&facts.outputs), ["x"]);
        assert!(facts.outputs[0].declared_in_region);
    }

    #[test]
    fn conditional_write_is_input_and_output() {
        let f = fixture("int x = 0;\nif (a > 0) x = 5;\nreturn x;");
        let facts = f.facts(1, 1);
        assert_eq!(names(&facts.inputs), ["a", "x"]);
        assert_eq!(names(&facts.outputs), ["x"]);
        let f = fixture("int x = 0;\nif (a > 0) x = 5; else x = 6;\nreturn x;");
        let facts = f.facts(1, 1);
        assert_eq!(names(&facts.inputs), ["a"]);
    }

    #[test]
    fn short_circuit_and_ternary_writes_are_not_definite() {
        let f = fixture("int x = 0;\nboolean c = a > 0 && (x = b) > 0;\nint y = x;\nreturn y + (c ? 1 : 0);");
        let facts = f.facts(1, 2);
        assert_eq!(names(&facts.inputs), ["a", "x", "b"]);
    }

    #[test]
    fn loop_carried_values_are_outputs() {
        let f = fixture("int s = 0;\nwhile (a > 0) {\n  use(s);\n  s = s + a;\n  a--;\n}\nreturn 0;");
        let StmtKind::While { body, .. } = &f.method.body.stmts[1].kind else { panic!() };
        let StmtKind::Block(block) = &body.kind else { panic!() };
        let stmt = &block.stmts[1];
        let facts = Scopes::resolve(&f.method).facts(std::slice::from_ref(stmt), stmt.span);
        assert_eq!(names(&facts.outputs), ["s"]);
        assert_eq!(names(&facts.inputs), ["s", "a"]);
    }

    #[test]
    fn jumps_and_returns() {
        let f = fixture("for (;;) {\n  if (a > 0) break;\n  if (b > 0) continue;\n}\nouter: while (true) { for (;;) { break outer; } }\nreturn 1;");
        let StmtKind::For { body, .. } = &f.method.body.stmts[0].kind else { panic!() };
        let StmtKind::Block(block) = &body.kind else { panic!() };
        let scopes = Scopes::resolve(&f.method);
        let inner = &block.stmts[0];
        assert_eq!(scopes.facts(std::slice::from_ref(inner), inner.span).jump_escapes.len(), 1);
        assert!(f.facts(0, 0).jump_escapes.is_empty());
        assert!(f.facts(1, 1).jump_escapes.is_empty());
        let tail = f.facts(1, 2);
        assert!(tail.contains_return && tail.all_paths_return);
    }

    #[test]
    fn structural_return_analysis() {
        let f = fixture("if (a > 0) { return 1; } else if (b > 0) { return 2; } else { throw new E(); }");
        assert!(f.facts(0, 0).all_paths_return);
        let f = fixture("if (a > 0) { return 1; }\nwhile (true) { return 2; }");
        let facts = f.facts(0, 1);
        assert!(facts.contains_return && !facts.all_paths_return);
    }
}
