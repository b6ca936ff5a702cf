use super::source::Span;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ident {
    pub name: String,
    pub span: Span,
}

/// Type reference kept as source text; generic arguments are matched but not
/// modeled.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeRef {
    pub text: String,
    pub span: Span,
}

impl TypeRef {
    pub fn is_void(&self) -> bool {
        self.text == "void"
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompilationUnit {
    pub classes: Vec<ClassDecl>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassDecl {
    /// Dotted for nested classes (`Outer.Inner`).
    pub name: String,
    pub span: Span,
    pub fields: Vec<FieldDecl>,
    pub methods: Vec<MethodDecl>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldDecl {
    pub ty: TypeRef,
    pub names: Vec<Ident>,
    pub is_static: bool,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Param {
    pub name: Ident,
    pub ty: TypeRef,
}

/// A construct outside the supported subset (lambda, anonymous class, ...).
/// The method that contains it is excluded from analysis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnsupportedConstruct {
    pub what: String,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodDecl {
    pub owner_class: String,
    pub name: Ident,
    pub params: Vec<Param>,
    /// `"void"` for constructors.
    pub return_type: TypeRef,
    pub is_static: bool,
    pub is_constructor: bool,
    /// From the first modifier to the closing brace.
    pub span: Span,
    /// Empty block (braces only) when `unsupported` is set.
    pub body: Block,
    pub unsupported: Option<UnsupportedConstruct>,
}

impl MethodDecl {
    pub fn is_analyzable(&self) -> bool {
        self.unsupported.is_none()
    }

    pub fn is_void(&self) -> bool {
        self.return_type.is_void()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub span: Span,
    pub stmts: Vec<Stmt>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stmt {
    pub span: Span,
    pub kind: StmtKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Declarator {
    pub name: Ident,
    /// Array dimensions written after the name (`int a[]`).
    pub dims: usize,
    pub init: Option<Expr>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalVar {
    pub ty: TypeRef,
    pub declarators: Vec<Declarator>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ForInit {
    Decl(LocalVar),
    Exprs(Vec<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SwitchGroup {
    pub span: Span,
    /// `None` stands for `default`.
    pub labels: Vec<Option<Expr>>,
    pub stmts: Vec<Stmt>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CatchClause {
    pub span: Span,
    pub keyword: Span,
    pub types: Vec<TypeRef>,
    pub name: Ident,
    pub body: Block,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StmtKind {
    Block(Block),
    LocalVar(LocalVar),
    Expr(Expr),
    If {
        cond: Expr,
        then_branch: Box<Stmt>,
        /// Span of the `else` keyword.
        else_kw: Option<Span>,
        else_branch: Option<Box<Stmt>>,
    },
    While {
        cond: Expr,
        body: Box<Stmt>,
    },
    DoWhile {
        body: Box<Stmt>,
        cond: Expr,
    },
    For {
        init: Option<ForInit>,
        cond: Option<Expr>,
        update: Vec<Expr>,
        body: Box<Stmt>,
    },
    ForEach {
        ty: TypeRef,
        name: Ident,
        iterable: Expr,
        body: Box<Stmt>,
    },
    Switch {
        selector: Expr,
        groups: Vec<SwitchGroup>,
    },
    Break(Option<Ident>),
    Continue(Option<Ident>),
    Return(Option<Expr>),
    Throw(Expr),
    Try {
        body: Block,
        catches: Vec<CatchClause>,
        finally: Option<Block>,
    },
    Labeled {
        label: Ident,
        body: Box<Stmt>,
    },
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Or,
    And,
    BitOr,
    BitXor,
    BitAnd,
    Eq,
    Ne,
    Lt,
    Gt,
    Le,
    Ge,
    Shl,
    Shr,
    UShr,
    Add,
    Sub,
    Mul,
    Div,
    Rem,
}

impl BinaryOp {
    pub fn is_logical(self) -> bool {
        matches!(self, BinaryOp::Or | BinaryOp::And)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BinaryOp::Or => "||",
            BinaryOp::And => "&&",
            BinaryOp::BitOr => "|",
            BinaryOp::BitXor => "^",
            BinaryOp::BitAnd => "&",
            BinaryOp::Eq => "==",
            BinaryOp::Ne => "!=",
            BinaryOp::Lt => "<",
            BinaryOp::Gt => ">",
            BinaryOp::Le => "<=",
            BinaryOp::Ge => ">=",
            BinaryOp::Shl => "<<",
            BinaryOp::Shr => ">>",
            BinaryOp::UShr => ">>>",
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Rem => "%",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Not,
    Neg,
    Plus,
    BitNot,
    PreInc,
    PreDec,
    PostInc,
    PostDec,
}

impl UnaryOp {
    pub fn writes_operand(self) -> bool {
        matches!(self, UnaryOp::PreInc | UnaryOp::PreDec | UnaryOp::PostInc | UnaryOp::PostDec)
    }
}

/// `None` is plain `=`; otherwise the compound operator (`+=` is `Some(Add)`).
pub type AssignOp = Option<BinaryOp>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expr {
    pub span: Span,
    pub kind: ExprKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExprKind {
    Literal(String),
    Name(String),
    This,
    Super,
    FieldAccess {
        target: Box<Expr>,
        name: Ident,
    },
    /// Unqualified calls have no target; `this(...)`/`super(...)` use the
    /// keyword as the name.
    Call {
        target: Option<Box<Expr>>,
        name: Ident,
        args: Vec<Expr>,
    },
    Index {
        target: Box<Expr>,
        index: Box<Expr>,
    },
    New {
        ty: TypeRef,
        args: Vec<Expr>,
    },
    NewArray {
        ty: TypeRef,
        dims: Vec<Expr>,
        init: Option<Vec<Expr>>,
    },
    ArrayInit(Vec<Expr>),
    Unary {
        op: UnaryOp,
        operand: Box<Expr>,
    },
    Binary {
        op: BinaryOp,
        op_span: Span,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    Assign {
        op: AssignOp,
        target: Box<Expr>,
        value: Box<Expr>,
    },
    Conditional {
        question: Span,
        cond: Box<Expr>,
        then_expr: Box<Expr>,
        else_expr: Box<Expr>,
    },
    InstanceOf {
        expr: Box<Expr>,
        ty: TypeRef,
    },
    Cast {
        ty: TypeRef,
        expr: Box<Expr>,
    },
    Paren(Box<Expr>),
}

impl Expr {
    /// Strips any number of enclosing parentheses.
    pub fn unparen(&self) -> &Expr {
        match &self.kind {
            ExprKind::Paren(inner) => inner.unparen(),
            _ => self,
        }
    }

    /// Direct subexpressions in evaluation order.
    pub fn children(&self) -> Vec<&Expr> {
        match &self.kind {
            ExprKind::Literal(_) | ExprKind::Name(_) | ExprKind::This | ExprKind::Super => Vec::new(),
            ExprKind::FieldAccess { target, .. } => vec![target],
            ExprKind::Call { target, args, .. } => target.iter().map(|t| &**t).chain(args).collect(),
            ExprKind::Index { target, index } => vec![target, index],
            ExprKind::New { args, .. } => args.iter().collect(),
            ExprKind::NewArray { dims, init, .. } => dims.iter().chain(init.iter().flatten()).collect(),
            ExprKind::ArrayInit(items) => items.iter().collect(),
            ExprKind::Unary { operand, .. } => vec![operand],
            ExprKind::Binary { lhs, rhs, .. } => vec![lhs, rhs],
            ExprKind::Assign { target, value, .. } => vec![target, value],
            ExprKind::Conditional { cond, then_expr, else_expr, .. } => vec![cond, then_expr, else_expr],
            ExprKind::InstanceOf { expr, .. } | ExprKind::Cast { expr, .. } | ExprKind::Paren(expr) => vec![expr],
        }
    }
}

/// Pre-order traversal over statements and expressions. Each hook returns
/// whether to descend into the node's children.
pub trait Visitor {
    fn stmt(&mut self, _stmt: &Stmt) -> bool {
        true
    }
    fn expr(&mut self, _expr: &Expr) -> bool {
        true
    }
}

pub fn walk_stmt<V: Visitor + ?Sized>(v: &mut V, stmt: &Stmt) {
    if !v.stmt(stmt) {
        return;
    }
    match &stmt.kind {
        StmtKind::Block(b) => walk_block(v, b),
        StmtKind::LocalVar(decl) => walk_local(v, decl),
        StmtKind::Expr(e) | StmtKind::Throw(e) => walk_expr(v, e),
        StmtKind::If { cond, then_branch, else_branch, .. } => {
            walk_expr(v, cond);
            walk_stmt(v, then_branch);
            if let Some(e) = else_branch {
                walk_stmt(v, e);
            }
        }
        StmtKind::While { cond, body } => {
            walk_expr(v, cond);
            walk_stmt(v, body);
        }
        StmtKind::DoWhile { body, cond } => {
            walk_stmt(v, body);
            walk_expr(v, cond);
        }
        StmtKind::For { init, cond, update, body } => {
            match init {
                Some(ForInit::Decl(decl)) => walk_local(v, decl),
                Some(ForInit::Exprs(es)) => es.iter().for_each(|e| walk_expr(v, e)),
                None => {}
            }
            if let Some(c) = cond {
                walk_expr(v, c);
            }
            update.iter().for_each(|e| walk_expr(v, e));
            walk_stmt(v, body);
        }
        StmtKind::ForEach { iterable, body, .. } => {
            walk_expr(v, iterable);
            walk_stmt(v, body);
        }
        StmtKind::Switch { selector, groups } => {
            walk_expr(v, selector);
            for g in groups {
                g.labels.iter().flatten().for_each(|e| walk_expr(v, e));
                g.stmts.iter().for_each(|s| walk_stmt(v, s));
            }
        }
        StmtKind::Return(e) => {
            if let Some(e) = e {
                walk_expr(v, e);
            }
        }
        StmtKind::Try { body, catches, finally } => {
            walk_block(v, body);
            catches.iter().for_each(|c| walk_block(v, &c.body));
            if let Some(f) = finally {
                walk_block(v, f);
            }
        }
        StmtKind::Labeled { body, .. } => walk_stmt(v, body),
        StmtKind::Break(_) | StmtKind::Continue(_) | StmtKind::Empty => {}
    }
}

pub fn walk_block<V: Visitor + ?Sized>(v: &mut V, block: &Block) {
    block.stmts.iter().for_each(|s| walk_stmt(v, s));
}

fn walk_local<V: Visitor + ?Sized>(v: &mut V, decl: &LocalVar) {
    decl.declarators.iter().filter_map(|d| d.init.as_ref()).for_each(|e| walk_expr(v, e));
}

pub fn walk_expr<V: Visitor + ?Sized>(v: &mut V, expr: &Expr) {
    if !v.expr(expr) {
        return;
    }
    match &expr.kind {
        ExprKind::Literal(_) | ExprKind::Name(_) | ExprKind::This | ExprKind::Super => {}
        ExprKind::FieldAccess { target, .. } => walk_expr(v, target),
        ExprKind::Call { target, args, .. } => {
            if let Some(t) = target {
                walk_expr(v, t);
            }
            args.iter().for_each(|a| walk_expr(v, a));
        }
        ExprKind::Index { target, index } => {
            walk_expr(v, target);
            walk_expr(v, index);
        }
        ExprKind::New { args, .. } => args.iter().for_each(|a| walk_expr(v, a)),
        ExprKind::NewArray { dims, init, .. } => {
            dims.iter().for_each(|d| walk_expr(v, d));
            init.iter().flatten().for_each(|e| walk_expr(v, e));
        }
        ExprKind::ArrayInit(items) => items.iter().for_each(|e| walk_expr(v, e)),
        ExprKind::Unary { operand, .. } => walk_expr(v, operand),
        ExprKind::Binary { lhs, rhs, .. } => {
            walk_expr(v, lhs);
            walk_expr(v, rhs);
        }
        ExprKind::Assign { target, value, .. } => {
            walk_expr(v, target);
            walk_expr(v, value);
        }
        ExprKind::Conditional { cond, then_expr, else_expr, .. } => {
            walk_expr(v, cond);
            walk_expr(v, then_expr);
            walk_expr(v, else_expr);
        }
        ExprKind::InstanceOf { expr, .. } | ExprKind::Cast { expr, .. } | ExprKind::Paren(expr) => {
            walk_expr(v, expr)
        }
    }
}
