//! Recursive-descent parser for the Java subset.

use super::ast::*;
use super::lexer::{tokenize_chars, Token, TokenKind};
use super::source::{SourceFile, Span};
use super::ParseError;

const PRIMITIVES: &[&str] = &["boolean", "byte", "char", "short", "int", "long", "float", "double", "void"];

const MODIFIERS: &[&str] = &[
    "public", "protected", "private", "static", "final", "abstract", "native", "synchronized",
    "transient", "volatile", "strictfp", "default",
];

enum Failure {
    Syntax(ParseError),
    Unsupported(UnsupportedConstruct),
}

impl From<ParseError> for Failure {
    fn from(e: ParseError) -> Self {
        Failure::Syntax(e)
    }
}

type PResult<T> = Result<T, Failure>;

pub fn parse(source: &SourceFile) -> Result<CompilationUnit, ParseError> {
    let tokens = tokenize_chars(source.chars())?;
    let mut p = Parser { src: source, toks: &tokens, pos: 0 };
    p.compilation_unit().map_err(Failure::into_parse_error)
}

/// Parses `text` as exactly one statement.
pub fn parse_statement(text: &str) -> Result<Stmt, ParseError> {
    let source = SourceFile::new("<stmt>", text);
    let tokens = tokenize_chars(source.chars())?;
    let mut p = Parser { src: &source, toks: &tokens, pos: 0 };
    let stmt = p.statement().map_err(Failure::into_parse_error)?;
    p.expect_eof().map_err(Failure::into_parse_error)?;
    Ok(stmt)
}

/// Parses `text` as exactly one expression.
pub fn parse_expression(text: &str) -> Result<Expr, ParseError> {
    let source = SourceFile::new("<expr>", text);
    let tokens = tokenize_chars(source.chars())?;
    let mut p = Parser { src: &source, toks: &tokens, pos: 0 };
    let expr = p.expr().map_err(Failure::into_parse_error)?;
    p.expect_eof().map_err(Failure::into_parse_error)?;
    Ok(expr)
}

impl Failure {
    fn into_parse_error(self) -> ParseError {
        match self {
            Failure::Syntax(e) => e,
            Failure::Unsupported(u) => ParseError::Unsupported(u),
        }
    }
}

struct Parser<'a> {
    src: &'a SourceFile,
    toks: &'a [Token],
    pos: usize,
}

impl<'a> Parser<'a> {
    // ----- token helpers -----

    fn peek(&self) -> &'a Token {
        self.nth(0)
    }

    fn nth(&self, n: usize) -> &'a Token {
        let i = (self.pos + n).min(self.toks.len() - 1);
        &self.toks[i]
    }

    fn at(&self, text: &str) -> bool {
        self.peek().is(text)
    }

    fn at_ident(&self) -> bool {
        self.peek().kind == TokenKind::Ident
    }

    fn at_eof(&self) -> bool {
        self.peek().kind == TokenKind::Eof
    }

    fn advance(&mut self) -> &'a Token {
        let t = self.peek();
        if t.kind != TokenKind::Eof {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, text: &str) -> bool {
        if self.at(text) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn last_end(&self) -> usize {
        self.toks[self.pos.saturating_sub(1)].span.end
    }

    fn error_at(&self, tok: &Token, message: String) -> Failure {
        let (line, column) = self.src.line_col(tok.span.start.min(self.src.len_chars()));
        Failure::Syntax(ParseError::Syntax { line, column, message })
    }

    fn unexpected(&self, expected: &str) -> Failure {
        let tok = self.peek();
        let found = if tok.kind == TokenKind::Eof { "end of input".to_string() } else { format!("`{}`", tok.text) };
        self.error_at(tok, format!("expected {expected}, found {found}"))
    }

    fn expect(&mut self, text: &str) -> PResult<&'a Token> {
        if self.at(text) {
            Ok(self.advance())
        } else {
            Err(self.unexpected(&format!("`{text}`")))
        }
    }

    fn expect_ident(&mut self) -> PResult<Ident> {
        if self.at_ident() {
            let t = self.advance();
            Ok(Ident { name: t.text.clone(), span: t.span })
        } else {
            Err(self.unexpected("identifier"))
        }
    }

    fn expect_eof(&mut self) -> PResult<()> {
        if self.at_eof() {
            Ok(())
        } else {
            Err(self.unexpected("end of input"))
        }
    }

    /// `>` tokens that touch, used to recognise `>>`, `>=` and friends.
    fn adjacent(&self, n: usize, text: &str) -> bool {
        let prev = self.nth(n - 1);
        let t = self.nth(n);
        t.is(text) && t.span.start == prev.span.end + 1
    }

    /// Index of the token that closes the bracket at `open` (`(`, `[` or `{`).
    fn matching(&self, open: usize) -> Option<usize> {
        let (o, c) = match self.toks[open].text.as_str() {
            "(" => ("(", ")"),
            "[" => ("[", "]"),
            "{" => ("{", "}"),
            _ => return None,
        };
        let mut depth = 0usize;
        for (i, t) in self.toks.iter().enumerate().skip(open) {
            if t.is(o) {
                depth += 1;
            } else if t.is(c) {
                depth -= 1;
                if depth == 0 {
                    return Some(i);
                }
            } else if t.kind == TokenKind::Eof {
                return None;
            }
        }
        None
    }

    fn skip_balanced(&mut self) -> PResult<()> {
        let close = self.matching(self.pos).ok_or_else(|| self.unexpected("balanced brackets"))?;
        self.pos = close + 1;
        Ok(())
    }

    fn unsupported(&self, what: &str, start: usize, end: usize) -> Failure {
        Failure::Unsupported(UnsupportedConstruct { what: what.to_string(), span: Span::new(start, end) })
    }

    /// Unsupported construct starting at token `from`; its span runs to the
    /// end of the enclosing statement or braces.
    fn unsupported_from(&self, what: &str, from: usize) -> Failure {
        let mut depth = 0isize;
        let mut end = self.toks[from].span.end;
        for t in &self.toks[from..] {
            if t.kind == TokenKind::Eof {
                break;
            }
            match t.text.as_str() {
                "(" | "[" | "{" if t.kind == TokenKind::Punct => depth += 1,
                ")" | "]" | "}" if t.kind == TokenKind::Punct => {
                    depth -= 1;
                    if depth < 0 {
                        break;
                    }
                    end = t.span.end;
                    if depth == 0 && t.text == "}" {
                        break;
                    }
                    continue;
                }
                ";" | "," if t.kind == TokenKind::Punct && depth == 0 => break,
                _ => {}
            }
            end = t.span.end;
        }
        self.unsupported(what, self.toks[from].span.start, end)
    }

    // ----- declarations -----

    fn compilation_unit(&mut self) -> PResult<CompilationUnit> {
        let mut classes = Vec::new();
        while self.at("package") || self.at("import") {
            while !self.at(";") && !self.at_eof() {
                self.advance();
            }
            self.expect(";")?;
        }
        while !self.at_eof() {
            if self.eat(";") {
                continue;
            }
            self.type_decl("", &mut classes)?;
        }
        Ok(CompilationUnit { classes })
    }

    fn skip_annotation(&mut self) -> PResult<()> {
        self.expect("@")?;
        self.expect_ident()?;
        while self.at(".") && self.nth(1).kind == TokenKind::Ident {
            self.advance();
            self.advance();
        }
        if self.at("(") {
            self.skip_balanced()?;
        }
        Ok(())
    }

    /// Returns `(is_static, first token start)`.
    fn modifiers(&mut self) -> PResult<(bool, Option<usize>)> {
        let mut is_static = false;
        let mut start = None;
        loop {
            let t = self.peek();
            if t.is("@") && !self.nth(1).is("interface") {
                start.get_or_insert(t.span.start);
                self.skip_annotation()?;
            } else if MODIFIERS.iter().any(|m| t.is(m)) && !(t.is("synchronized") && self.nth(1).is("(")) {
                start.get_or_insert(t.span.start);
                is_static |= t.is("static");
                self.advance();
            } else if t.kind == TokenKind::Ident && (t.text == "sealed" || t.text == "non") {
                return Err(self.error_at(t, "sealed types are not supported".into()));
            } else {
                return Ok((is_static, start));
            }
        }
    }

    fn type_decl(&mut self, outer: &str, out: &mut Vec<ClassDecl>) -> PResult<()> {
        let (_, mod_start) = self.modifiers()?;
        let kw = self.peek();
        let is_enum = kw.is("enum");
        if !(kw.is("class") || kw.is("interface") || is_enum) {
            return Err(self.unexpected("`class`, `interface` or `enum`"));
        }
        self.advance();
        let start = mod_start.unwrap_or(kw.span.start);
        let simple = self.expect_ident()?;
        let name = if outer.is_empty() { simple.name.clone() } else { format!("{outer}.{}", simple.name) };
        if self.at("<") {
            self.skip_type_args()?;
        }
        while !self.at("{") {
            if self.at_eof() {
                return Err(self.unexpected("`{`"));
            }
            self.advance();
        }
        self.expect("{")?;
        let mut class = ClassDecl { name, span: Span::default(), fields: Vec::new(), methods: Vec::new() };
        let index = out.len();
        out.push(class.clone());
        if is_enum {
            self.enum_constants()?;
        }
        while !self.at("}") {
            if self.at_eof() {
                return Err(self.unexpected("`}`"));
            }
            self.member(&simple.name, &mut class, out)?;
        }
        let close = self.advance();
        class.span = Span::new(start, close.span.end);
        out[index] = class;
        Ok(())
    }

    fn enum_constants(&mut self) -> PResult<()> {
        while self.at_ident() || self.at("@") {
            if self.at("@") {
                self.skip_annotation()?;
                continue;
            }
            self.advance();
            if self.at("(") {
                self.skip_balanced()?;
            }
            if self.at("{") {
                self.skip_balanced()?;
            }
            if !self.eat(",") {
                break;
            }
        }
        if !self.eat(";") && !self.at("}") {
            return Err(self.unexpected("`;` or `}`"));
        }
        Ok(())
    }

    fn member(&mut self, class_name: &str, class: &mut ClassDecl, out: &mut Vec<ClassDecl>) -> PResult<()> {
        if self.eat(";") {
            return Ok(());
        }
        let save = self.pos;
        let (is_static, mod_start) = self.modifiers()?;
        if self.at("class") || self.at("interface") || self.at("enum") || (self.at("@") && self.nth(1).is("interface")) {
            if self.at("@") {
                return Err(self.unexpected("member declaration"));
            }
            self.pos = save;
            return self.type_decl(&class.name.clone(), out);
        }
        if self.at("{") {
            // initializer block
            return self.skip_balanced();
        }
        let start = mod_start.unwrap_or(self.peek().span.start);
        if self.at("<") {
            self.skip_type_args()?;
        }
        let is_ctor = self.at_ident() && self.peek().text == class_name && self.nth(1).is("(");
        let return_type = if is_ctor {
            TypeRef { text: "void".into(), span: self.peek().span }
        } else {
            self.parse_type()?
        };
        let name = self.expect_ident()?;
        if self.at("(") {
            let method = self.method_rest(class, start, is_static, is_ctor, return_type, name)?;
            if let Some(m) = method {
                class.methods.push(m);
            }
            return Ok(());
        }
        let mut names = vec![name];
        loop {
            while self.eat("[") {
                self.expect("]")?;
            }
            if self.eat("=") {
                self.skip_initializer()?;
            }
            if !self.eat(",") {
                break;
            }
            names.push(self.expect_ident()?);
        }
        self.expect(";")?;
        class.fields.push(FieldDecl { ty: return_type, names, is_static, span: Span::new(start, self.last_end()) });
        Ok(())
    }

    fn skip_initializer(&mut self) -> PResult<()> {
        let mut depth = 0usize;
        loop {
            let t = self.peek();
            if t.kind == TokenKind::Eof {
                return Err(self.unexpected("`;`"));
            }
            if depth == 0 && (t.is(";") || t.is(",")) {
                return Ok(());
            }
            if t.is("(") || t.is("{") || t.is("[") {
                depth += 1;
            } else if t.is(")") || t.is("}") || t.is("]") {
                depth = depth.saturating_sub(1);
            }
            self.advance();
        }
    }

    fn method_rest(
        &mut self,
        class: &ClassDecl,
        start: usize,
        is_static: bool,
        is_ctor: bool,
        return_type: TypeRef,
        name: Ident,
    ) -> PResult<Option<MethodDecl>> {
        self.expect("(")?;
        let mut params = Vec::new();
        if !self.at(")") {
            loop {
                self.modifiers()?;
                let mut ty = self.parse_type()?;
                if self.eat("...") {
                    ty.text.push_str("[]");
                    ty.span.end = self.last_end();
                }
                let pname = self.expect_ident()?;
                while self.eat("[") {
                    self.expect("]")?;
                    ty.text.push_str("[]");
                }
                if params.iter().any(|p: &Param| p.name.name == pname.name) {
                    return Err(self.error_at(&self.toks[self.pos - 1], format!("duplicate parameter `{}`", pname.name)));
                }
                params.push(Param { name: pname, ty });
                if !self.eat(",") {
                    break;
                }
            }
        }
        self.expect(")")?;
        while self.eat("[") {
            self.expect("]")?;
        }
        if self.eat("throws") {
            loop {
                self.parse_type()?;
                if !self.eat(",") {
                    break;
                }
            }
        }
        if self.eat(";") {
            return Ok(None);
        }
        if !self.at("{") {
            return Err(self.unexpected("`{` or `;`"));
        }
        let open = self.pos;
        let (body, unsupported) = match self.block() {
            Ok(b) => (b, None),
            Err(Failure::Unsupported(u)) => {
                let close = self.matching(open).ok_or_else(|| self.unexpected("`}`"))?;
                self.pos = close + 1;
                let span = Span::new(self.toks[open].span.start, self.toks[close].span.end);
                (Block { span, stmts: Vec::new() }, Some(u))
            }
            Err(e) => return Err(e),
        };
        Ok(Some(MethodDecl {
            owner_class: class.name.clone(),
            name,
            params,
            return_type,
            is_static,
            is_constructor: is_ctor,
            span: Span::new(start, body.span.end),
            body,
            unsupported,
        }))
    }

    // ----- types -----

    fn skip_type_args(&mut self) -> PResult<()> {
        self.expect("<")?;
        let mut depth = 1usize;
        while depth > 0 {
            let t = self.peek();
            match t.kind {
                TokenKind::Ident => {}
                TokenKind::Keyword if PRIMITIVES.contains(&t.text.as_str()) || t.is("extends") || t.is("super") => {}
                TokenKind::Punct if t.is("<") => depth += 1,
                TokenKind::Punct if t.is(">") => depth -= 1,
                TokenKind::Punct if [",", ".", "?", "[", "]", "&"].iter().any(|p| t.is(p)) => {}
                TokenKind::Punct if t.is("@") => {
                    self.skip_annotation()?;
                    continue;
                }
                _ => return Err(self.unexpected("type argument")),
            }
            self.advance();
        }
        Ok(())
    }

    fn parse_type(&mut self) -> PResult<TypeRef> {
        while self.at("@") {
            self.skip_annotation()?;
        }
        let start = self.peek().span.start;
        let t = self.peek();
        if t.kind == TokenKind::Keyword && PRIMITIVES.contains(&t.text.as_str()) {
            self.advance();
        } else if t.kind == TokenKind::Ident {
            self.advance();
            if self.at("<") {
                self.skip_type_args()?;
            }
            while self.at(".") && self.nth(1).kind == TokenKind::Ident {
                self.advance();
                self.advance();
                if self.at("<") {
                    self.skip_type_args()?;
                }
            }
        } else {
            return Err(self.unexpected("type"));
        }
        while self.at("[") && self.nth(1).is("]") {
            self.advance();
            self.advance();
        }
        let span = Span::new(start, self.last_end());
        Ok(TypeRef { text: self.src.slice(span).to_string(), span })
    }

    fn speculate<T>(&mut self, f: impl FnOnce(&mut Self) -> PResult<T>) -> Option<T> {
        let save = self.pos;
        match f(self) {
            Ok(v) => Some(v),
            Err(_) => {
                self.pos = save;
                None
            }
        }
    }

    fn skip_var_modifiers(&mut self) -> PResult<()> {
        loop {
            if self.at("final") {
                self.advance();
            } else if self.at("@") {
                self.skip_annotation()?;
            } else {
                return Ok(());
            }
        }
    }

    fn at_local_decl(&mut self) -> bool {
        let save = self.pos;
        let result = self
            .speculate(|p| {
                p.skip_var_modifiers()?;
                let t = p.peek();
                if t.kind == TokenKind::Keyword && PRIMITIVES.contains(&t.text.as_str()) {
                    return Ok(true);
                }
                p.parse_type()?;
                Ok(p.at_ident() && ["=", ";", ",", "[", ":"].iter().any(|s| p.nth(1).is(s)))
            })
            .unwrap_or(false);
        self.pos = save;
        result
    }

    // ----- statements -----

    fn block(&mut self) -> PResult<Block> {
        let open = self.expect("{")?;
        let mut stmts = Vec::new();
        while !self.at("}") {
            if self.at_eof() {
                return Err(self.unexpected("`}`"));
            }
            stmts.push(self.statement()?);
        }
        let close = self.advance();
        Ok(Block { span: open.span.to(close.span), stmts })
    }

    fn finish(&self, start: usize, kind: StmtKind) -> Stmt {
        Stmt { span: Span::new(start, self.last_end()), kind }
    }

    fn statement(&mut self) -> PResult<Stmt> {
        let t = self.peek();
        let start = t.span.start;
        if t.kind == TokenKind::Keyword {
            match t.text.as_str() {
                "if" => return self.if_statement(),
                "while" => {
                    self.advance();
                    self.expect("(")?;
                    let cond = self.expr()?;
                    self.expect(")")?;
                    let body = Box::new(self.statement()?);
                    return Ok(self.finish(start, StmtKind::While { cond, body }));
                }
                "do" => {
                    self.advance();
                    let body = Box::new(self.statement()?);
                    self.expect("while")?;
                    self.expect("(")?;
                    let cond = self.expr()?;
                    self.expect(")")?;
                    self.expect(";")?;
                    return Ok(self.finish(start, StmtKind::DoWhile { body, cond }));
                }
                "for" => return self.for_statement(),
                "switch" => return self.switch_statement(),
                "try" => return self.try_statement(),
                "break" | "continue" => {
                    let is_break = t.is("break");
                    self.advance();
                    let label = if self.at_ident() { Some(self.expect_ident()?) } else { None };
                    self.expect(";")?;
                    let kind = if is_break { StmtKind::Break(label) } else { StmtKind::Continue(label) };
                    return Ok(self.finish(start, kind));
                }
                "return" => {
                    self.advance();
                    let value = if self.at(";") { None } else { Some(self.expr()?) };
                    self.expect(";")?;
                    return Ok(self.finish(start, StmtKind::Return(value)));
                }
                "throw" => {
                    self.advance();
                    let value = self.expr()?;
                    self.expect(";")?;
                    return Ok(self.finish(start, StmtKind::Throw(value)));
                }
                "else" | "case" | "default" | "catch" | "finally" => {
                    return Err(self.unexpected("statement"));
                }
                "synchronized" | "assert" | "class" | "interface" | "enum" => {
                    return Err(self.unsupported_from(&format!("`{}` statement", t.text), self.pos));
                }
                _ => {}
            }
        }
        if t.is("}") || t.kind == TokenKind::Eof {
            return Err(self.unexpected("statement"));
        }
        if t.is("{") {
            let block = self.block()?;
            return Ok(Stmt { span: block.span, kind: StmtKind::Block(block) });
        }
        if t.is(";") {
            self.advance();
            return Ok(self.finish(start, StmtKind::Empty));
        }
        if t.kind == TokenKind::Ident && self.nth(1).is(":") {
            let label = self.expect_ident()?;
            self.advance();
            let body = Box::new(self.statement()?);
            return Ok(self.finish(start, StmtKind::Labeled { label, body }));
        }
        if t.kind == TokenKind::Ident && t.text == "yield" && !self.nth(1).is("=") && !self.nth(1).is("(") {
            return Err(self.unsupported_from("`yield` statement", self.pos));
        }
        if self.at_local_decl() {
            let decl = self.local_var()?;
            self.expect(";")?;
            return Ok(self.finish(start, StmtKind::LocalVar(decl)));
        }
        let e = self.expr()?;
        self.expect(";")?;
        Ok(self.finish(start, StmtKind::Expr(e)))
    }

    fn local_var(&mut self) -> PResult<LocalVar> {
        self.skip_var_modifiers()?;
        let ty = self.parse_type()?;
        let mut declarators = Vec::new();
        loop {
            let name = self.expect_ident()?;
            let mut dims = 0;
            while self.eat("[") {
                self.expect("]")?;
                dims += 1;
            }
            let init = if self.eat("=") {
                Some(if self.at("{") { self.array_init()? } else { self.expr()? })
            } else {
                None
            };
            declarators.push(Declarator { name, dims, init });
            if !self.eat(",") {
                break;
            }
        }
        Ok(LocalVar { ty, declarators })
    }

    fn if_statement(&mut self) -> PResult<Stmt> {
        let start = self.advance().span.start;
        self.expect("(")?;
        let cond = self.expr()?;
        self.expect(")")?;
        let then_branch = Box::new(self.statement()?);
        let (else_kw, else_branch) = if self.at("else") {
            let kw = self.advance().span;
            (Some(kw), Some(Box::new(self.statement()?)))
        } else {
            (None, None)
        };
        Ok(self.finish(start, StmtKind::If { cond, then_branch, else_kw, else_branch }))
    }

    fn for_statement(&mut self) -> PResult<Stmt> {
        let start = self.advance().span.start;
        self.expect("(")?;
        let header = self.speculate(|p| {
            p.skip_var_modifiers()?;
            let ty = p.parse_type()?;
            let name = p.expect_ident()?;
            p.expect(":")?;
            Ok((ty, name))
        });
        if let Some((ty, name)) = header {
            let iterable = self.expr()?;
            self.expect(")")?;
            let body = Box::new(self.statement()?);
            return Ok(self.finish(start, StmtKind::ForEach { ty, name, iterable, body }));
        }
        let init = if self.at(";") {
            None
        } else if self.at_local_decl() {
            Some(ForInit::Decl(self.local_var()?))
        } else {
            Some(ForInit::Exprs(self.expr_list(";")?))
        };
        self.expect(";")?;
        let cond = if self.at(";") { None } else { Some(self.expr()?) };
        self.expect(";")?;
        let update = if self.at(")") { Vec::new() } else { self.expr_list(")")? };
        self.expect(")")?;
        let body = Box::new(self.statement()?);
        Ok(self.finish(start, StmtKind::For { init, cond, update, body }))
    }

    fn expr_list(&mut self, terminator: &str) -> PResult<Vec<Expr>> {
        let mut items = vec![self.expr()?];
        while !self.at(terminator) {
            self.expect(",")?;
            items.push(self.expr()?);
        }
        Ok(items)
    }

    fn switch_statement(&mut self) -> PResult<Stmt> {
        let switch_pos = self.pos;
        let start = self.advance().span.start;
        self.expect("(")?;
        let selector = self.expr()?;
        self.expect(")")?;
        self.expect("{")?;
        let mut groups = Vec::new();
        while !self.at("}") {
            let group_start = self.peek().span.start;
            let mut labels = Vec::new();
            while self.at("case") || self.at("default") {
                if self.eat("default") {
                    labels.push(None);
                } else {
                    self.advance();
                    labels.push(Some(self.ternary()?));
                }
                if self.at("->") || self.at(",") {
                    return Err(self.unsupported_from("switch rule", switch_pos));
                }
                self.expect(":")?;
            }
            if labels.is_empty() {
                return Err(self.unexpected("`case`, `default` or `}`"));
            }
            let mut stmts = Vec::new();
            while !(self.at("case") || self.at("default") || self.at("}")) {
                if self.at_eof() {
                    return Err(self.unexpected("`}`"));
                }
                stmts.push(self.statement()?);
            }
            groups.push(SwitchGroup { span: Span::new(group_start, self.last_end()), labels, stmts });
        }
        self.advance();
        Ok(self.finish(start, StmtKind::Switch { selector, groups }))
    }

    fn try_statement(&mut self) -> PResult<Stmt> {
        let try_pos = self.pos;
        let start = self.advance().span.start;
        if self.at("(") {
            return Err(self.unsupported_from("try-with-resources", try_pos));
        }
        let body = self.block()?;
        let mut catches = Vec::new();
        while self.at("catch") {
            let keyword = self.advance().span;
            self.expect("(")?;
            self.skip_var_modifiers()?;
            let mut types = vec![self.parse_type()?];
            while self.eat("|") {
                types.push(self.parse_type()?);
            }
            let name = self.expect_ident()?;
            self.expect(")")?;
            let body = self.block()?;
            catches.push(CatchClause { span: keyword.to(body.span), keyword, types, name, body });
        }
        let finally = if self.eat("finally") { Some(self.block()?) } else { None };
        if catches.is_empty() && finally.is_none() {
            return Err(self.unexpected("`catch` or `finally`"));
        }
        Ok(self.finish(start, StmtKind::Try { body, catches, finally }))
    }

    // ----- expressions -----

    fn expr(&mut self) -> PResult<Expr> {
        let lhs = self.ternary()?;
        let Some((op, width)) = self.assign_op() else {
            return Ok(lhs);
        };
        if !matches!(lhs.unparen().kind, ExprKind::Name(_) | ExprKind::FieldAccess { .. } | ExprKind::Index { .. }) {
            return Err(self.error_at(self.peek(), "invalid assignment target".into()));
        }
        self.pos += width;
        let value = if self.at("{") { self.array_init()? } else { self.expr()? };
        Ok(Expr {
            span: Span::new(lhs.span.start, value.span.end),
            kind: ExprKind::Assign { op, target: Box::new(lhs), value: Box::new(value) },
        })
    }

    fn assign_op(&self) -> Option<(AssignOp, usize)> {
        let t = self.peek();
        if t.kind != TokenKind::Punct {
            return None;
        }
        let simple = match t.text.as_str() {
            "=" => Some(None),
            "+=" => Some(Some(BinaryOp::Add)),
            "-=" => Some(Some(BinaryOp::Sub)),
            "*=" => Some(Some(BinaryOp::Mul)),
            "/=" => Some(Some(BinaryOp::Div)),
            "%=" => Some(Some(BinaryOp::Rem)),
            "&=" => Some(Some(BinaryOp::BitAnd)),
            "|=" => Some(Some(BinaryOp::BitOr)),
            "^=" => Some(Some(BinaryOp::BitXor)),
            "<<=" => Some(Some(BinaryOp::Shl)),
            _ => None,
        };
        if let Some(op) = simple {
            return Some((op, 1));
        }
        if t.is(">") && self.adjacent(1, ">") {
            if self.adjacent(2, "=") {
                return Some((Some(BinaryOp::Shr), 3));
            }
            if self.adjacent(2, ">") && self.adjacent(3, "=") {
                return Some((Some(BinaryOp::UShr), 4));
            }
        }
        None
    }

    fn ternary(&mut self) -> PResult<Expr> {
        let cond = self.binary(1)?;
        if !self.at("?") {
            return Ok(cond);
        }
        let question = self.advance().span;
        let then_expr = self.expr()?;
        self.expect(":")?;
        let else_expr = self.ternary()?;
        Ok(Expr {
            span: Span::new(cond.span.start, else_expr.span.end),
            kind: ExprKind::Conditional {
                question,
                cond: Box::new(cond),
                then_expr: Box::new(then_expr),
                else_expr: Box::new(else_expr),
            },
        })
    }

    /// `(operator, precedence, token count)` of the binary operator at the cursor.
    fn binary_op(&self) -> Option<(BinaryOp, u8, usize)> {
        let t = self.peek();
        if t.is("instanceof") {
            return None;
        }
        if t.kind != TokenKind::Punct {
            return None;
        }
        let (op, prec) = match t.text.as_str() {
            "||" => (BinaryOp::Or, 1),
            "&&" => (BinaryOp::And, 2),
            "|" => (BinaryOp::BitOr, 3),
            "^" => (BinaryOp::BitXor, 4),
            "&" => (BinaryOp::BitAnd, 5),
            "==" => (BinaryOp::Eq, 6),
            "!=" => (BinaryOp::Ne, 6),
            "<" => (BinaryOp::Lt, 7),
            "<=" => (BinaryOp::Le, 7),
            "<<" => (BinaryOp::Shl, 8),
            "+" => (BinaryOp::Add, 9),
            "-" => (BinaryOp::Sub, 9),
            "*" => (BinaryOp::Mul, 10),
            "/" => (BinaryOp::Div, 10),
            "%" => (BinaryOp::Rem, 10),
            ">" => {
                if self.adjacent(1, ">") {
                    if self.adjacent(2, ">") {
                        if self.adjacent(3, "=") {
                            return None;
                        }
                        return Some((BinaryOp::UShr, 8, 3));
                    }
                    if self.adjacent(2, "=") {
                        return None;
                    }
                    return Some((BinaryOp::Shr, 8, 2));
                }
                if self.adjacent(1, "=") {
                    return Some((BinaryOp::Ge, 7, 2));
                }
                (BinaryOp::Gt, 7)
            }
            _ => return None,
        };
        Some((op, prec, 1))
    }

    fn binary(&mut self, min_prec: u8) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        loop {
            if self.at("instanceof") && min_prec <= 7 {
                self.advance();
                self.eat("final");
                let ty = self.parse_type()?;
                if self.at_ident() {
                    return Err(self.unsupported("instanceof pattern", lhs.span.start, self.peek().span.end));
                }
                lhs = Expr {
                    span: Span::new(lhs.span.start, ty.span.end),
                    kind: ExprKind::InstanceOf { expr: Box::new(lhs), ty },
                };
                continue;
            }
            let Some((op, prec, width)) = self.binary_op() else { break };
            if prec < min_prec {
                break;
            }
            let op_span = Span::new(self.peek().span.start, self.nth(width - 1).span.end);
            self.pos += width;
            let rhs = self.binary(prec + 1)?;
            lhs = Expr {
                span: Span::new(lhs.span.start, rhs.span.end),
                kind: ExprKind::Binary { op, op_span, lhs: Box::new(lhs), rhs: Box::new(rhs) },
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Expr> {
        let t = self.peek();
        let op = if t.kind == TokenKind::Punct {
            match t.text.as_str() {
                "!" => Some(UnaryOp::Not),
                "-" => Some(UnaryOp::Neg),
                "+" => Some(UnaryOp::Plus),
                "~" => Some(UnaryOp::BitNot),
                "++" => Some(UnaryOp::PreInc),
                "--" => Some(UnaryOp::PreDec),
                _ => None,
            }
        } else {
            None
        };
        if let Some(op) = op {
            self.advance();
            let operand = self.unary()?;
            return Ok(Expr {
                span: Span::new(t.span.start, operand.span.end),
                kind: ExprKind::Unary { op, operand: Box::new(operand) },
            });
        }
        if t.is("(") {
            if let Some(cast) = self.try_cast()? {
                return Ok(cast);
            }
        }
        self.postfix()
    }

    fn try_cast(&mut self) -> PResult<Option<Expr>> {
        let save = self.pos;
        let start = self.peek().span.start;
        let ty = self.speculate(|p| {
            p.expect("(")?;
            let primitive = p.peek().kind == TokenKind::Keyword && PRIMITIVES.contains(&p.peek().text.as_str());
            let ty = p.parse_type()?;
            while p.eat("&") {
                p.parse_type()?;
            }
            p.expect(")")?;
            let next = p.peek();
            let starts_operand = matches!(
                next.kind,
                TokenKind::Ident | TokenKind::Int | TokenKind::Float | TokenKind::Str | TokenKind::Char
            ) || ["(", "!", "~", "this", "super", "new", "true", "false", "null"].iter().any(|s| next.is(s))
                || (primitive && ["-", "+", "++", "--"].iter().any(|s| next.is(s)));
            if starts_operand && !(next.kind == TokenKind::Ident && p.nth(1).is("->")) {
                Ok(ty)
            } else {
                Err(p.unexpected("cast operand"))
            }
        });
        let Some(ty) = ty else {
            self.pos = save;
            return Ok(None);
        };
        let operand = self.unary()?;
        Ok(Some(Expr { span: Span::new(start, operand.span.end), kind: ExprKind::Cast { ty, expr: Box::new(operand) } }))
    }

    fn postfix(&mut self) -> PResult<Expr> {
        let mut e = self.primary()?;
        loop {
            if self.at(".") {
                self.advance();
                if self.at("<") {
                    self.skip_type_args()?;
                }
                let t = self.peek();
                if t.is("new") {
                    return Err(self.unsupported_from("qualified inner class creation", self.pos));
                }
                let name = if t.kind == TokenKind::Ident || t.is("class") || t.is("this") || t.is("super") {
                    self.advance();
                    Ident { name: t.text.clone(), span: t.span }
                } else {
                    return Err(self.unexpected("member name"));
                };
                if self.at("(") {
                    let args = self.arguments()?;
                    e = Expr {
                        span: Span::new(e.span.start, self.last_end()),
                        kind: ExprKind::Call { target: Some(Box::new(e)), name, args },
                    };
                } else {
                    e = Expr {
                        span: Span::new(e.span.start, name.span.end),
                        kind: ExprKind::FieldAccess { target: Box::new(e), name },
                    };
                }
            } else if self.at("[") {
                self.advance();
                let index = self.expr()?;
                self.expect("]")?;
                e = Expr {
                    span: Span::new(e.span.start, self.last_end()),
                    kind: ExprKind::Index { target: Box::new(e), index: Box::new(index) },
                };
            } else if self.at("::") {
                return Err(self.unsupported("method reference", e.span.start, self.nth(1).span.end));
            } else {
                break;
            }
        }
        while self.at("++") || self.at("--") {
            let op = if self.advance().is("++") { UnaryOp::PostInc } else { UnaryOp::PostDec };
            e = Expr { span: Span::new(e.span.start, self.last_end()), kind: ExprKind::Unary { op, operand: Box::new(e) } };
        }
        Ok(e)
    }

    fn arguments(&mut self) -> PResult<Vec<Expr>> {
        self.expect("(")?;
        let mut args = Vec::new();
        if !self.at(")") {
            args = self.expr_list(")")?;
        }
        self.expect(")")?;
        Ok(args)
    }

    fn lambda_failure(&self, from: usize, arrow: usize) -> Failure {
        let body = arrow + 1;
        let end = if self.toks[body].is("{") {
            self.matching(body).map(|i| self.toks[i].span.end)
        } else {
            None
        };
        match end {
            Some(end) => self.unsupported("lambda", self.toks[from].span.start, end),
            None => self.unsupported_from("lambda", from),
        }
    }

    fn primary(&mut self) -> PResult<Expr> {
        let t = self.peek();
        let here = self.pos;
        match t.kind {
            TokenKind::Int | TokenKind::Float | TokenKind::Str | TokenKind::Char => {
                self.advance();
                return Ok(Expr { span: t.span, kind: ExprKind::Literal(t.text.clone()) });
            }
            TokenKind::Ident => {
                if self.nth(1).is("->") {
                    return Err(self.lambda_failure(here, here + 1));
                }
                self.advance();
                let name = Ident { name: t.text.clone(), span: t.span };
                if self.at("(") {
                    let args = self.arguments()?;
                    return Ok(Expr {
                        span: Span::new(t.span.start, self.last_end()),
                        kind: ExprKind::Call { target: None, name, args },
                    });
                }
                return Ok(Expr { span: t.span, kind: ExprKind::Name(t.text.clone()) });
            }
            TokenKind::Keyword => match t.text.as_str() {
                "true" | "false" | "null" => {
                    self.advance();
                    return Ok(Expr { span: t.span, kind: ExprKind::Literal(t.text.clone()) });
                }
                "this" | "super" => {
                    self.advance();
                    if self.at("(") {
                        let name = Ident { name: t.text.clone(), span: t.span };
                        let args = self.arguments()?;
                        return Ok(Expr {
                            span: Span::new(t.span.start, self.last_end()),
                            kind: ExprKind::Call { target: None, name, args },
                        });
                    }
                    let kind = if t.is("this") { ExprKind::This } else { ExprKind::Super };
                    return Ok(Expr { span: t.span, kind });
                }
                "new" => return self.creator(),
                "switch" => return Err(self.unsupported_from("switch expression", here)),
                s if PRIMITIVES.contains(&s) => {
                    // `int.class`, `int[].class`
                    let ty = self.parse_type()?;
                    self.expect(".")?;
                    let cls = self.expect("class")?;
                    let span = Span::new(ty.span.start, cls.span.end);
                    return Ok(Expr { span, kind: ExprKind::Literal(self.src.slice(span).to_string()) });
                }
                _ => {}
            },
            TokenKind::Punct if t.is("(") => {
                if let Some(close) = self.matching(here) {
                    if self.toks[close + 1].is("->") {
                        return Err(self.lambda_failure(here, close + 1));
                    }
                }
                self.advance();
                let inner = self.expr()?;
                self.expect(")")?;
                return Ok(Expr { span: Span::new(t.span.start, self.last_end()), kind: ExprKind::Paren(Box::new(inner)) });
            }
            _ => {}
        }
        Err(self.unexpected("expression"))
    }

    fn creator(&mut self) -> PResult<Expr> {
        let new_pos = self.pos;
        let start = self.advance().span.start;
        while self.at("@") {
            self.skip_annotation()?;
        }
        let ty_start = self.peek().span.start;
        let t = self.peek();
        if t.kind == TokenKind::Keyword && PRIMITIVES.contains(&t.text.as_str()) {
            self.advance();
        } else if t.kind == TokenKind::Ident {
            self.advance();
            if self.at("<") {
                self.skip_type_args()?;
            }
            while self.at(".") && self.nth(1).kind == TokenKind::Ident {
                self.advance();
                self.advance();
                if self.at("<") {
                    self.skip_type_args()?;
                }
            }
        } else {
            return Err(self.unexpected("type"));
        }
        let ty_span = Span::new(ty_start, self.last_end());
        let ty = TypeRef { text: self.src.slice(ty_span).to_string(), span: ty_span };
        if self.at("[") {
            let mut dims = Vec::new();
            while self.at("[") {
                self.advance();
                if self.eat("]") {
                    continue;
                }
                dims.push(self.expr()?);
                self.expect("]")?;
            }
            let init = if self.at("{") {
                match self.array_init()?.kind {
                    ExprKind::ArrayInit(items) => Some(items),
                    _ => unreachable!(),
                }
            } else {
                None
            };
            return Ok(Expr { span: Span::new(start, self.last_end()), kind: ExprKind::NewArray { ty, dims, init } });
        }
        let args = self.arguments()?;
        if self.at("{") {
            let close = self.matching(self.pos).map(|i| self.toks[i].span.end).unwrap_or(self.peek().span.end);
            let _ = new_pos;
            return Err(self.unsupported("anonymous class", start, close));
        }
        Ok(Expr { span: Span::new(start, self.last_end()), kind: ExprKind::New { ty, args } })
    }

    fn array_init(&mut self) -> PResult<Expr> {
        let open = self.expect("{")?;
        let mut items = Vec::new();
        while !self.at("}") {
            items.push(if self.at("{") { self.array_init()? } else { self.expr()? });
            if !self.eat(",") {
                break;
            }
        }
        let close = self.expect("}")?;
        Ok(Expr { span: open.span.to(close.span), kind: ExprKind::ArrayInit(items) })
    }
}
