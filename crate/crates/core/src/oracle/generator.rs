use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const INDENT: &str = "    ";

/// Pseudo-random method in the supported subset. Identical arguments give
/// identical text. `max_depth` bounds control-flow nesting, `max_width` the
/// statements per block.
pub fn generate_method(seed: u64, max_depth: usize, max_width: usize) -> String {
    let mut g = Generator {
        rng: ChaCha8Rng::seed_from_u64(seed),
        max_width: max_width.max(1),
        next_var: 0,
        scopes: vec![vec!["a".into(), "b".into()]],
        returns_int: false,
        out: String::new(),
    };
    g.returns_int = max_depth > 0 && g.rng.gen_bool(0.3);
    let ty = if g.returns_int { "int" } else { "void" };
    g.out.push_str(&format!(
        "{INDENT}static {ty} gen{seed}(int a, int b, boolean p, boolean q, int[] items) {{\n"
    ));
    let width = if max_depth == 0 { max_width.max(1) } else { g.rng.gen_range(1..=g.max_width) };
    g.block_body(2, max_depth, width, Ctx::default());
    if g.returns_int {
        let e = g.expr();
        g.line(2, &format!("return {e};"));
    }
    g.out.push_str(&format!("{INDENT}}}\n"));
    g.out
}

/// Wraps generated methods into one class.
pub fn generate_class(name: &str, methods: &[String]) -> String {
    let mut out = format!("class {name} {{\n");
    for (k, m) in methods.iter().enumerate() {
        if k > 0 {
            out.push('\n');
        }
        out.push_str(m);
    }
    out.push_str("}\n");
    out
}

#[derive(Debug, Clone, Copy, Default)]
struct Ctx {
    can_break: bool,
    can_continue: bool,
}

struct Generator {
    rng: ChaCha8Rng,
    max_width: usize,
    next_var: usize,
    scopes: Vec<Vec<String>>,
    returns_int: bool,
    out: String,
}

impl Generator {
    fn line(&mut self, indent: usize, text: &str) {
        self.out.push_str(&INDENT.repeat(indent));
        self.out.push_str(text);
        self.out.push('\n');
    }

    fn fresh(&mut self, prefix: &str) -> String {
        self.next_var += 1;
        format!("{prefix}{}", self.next_var)
    }

    fn visible(&self) -> Vec<String> {
        self.scopes.iter().flatten().cloned().collect()
    }

    fn declare(&mut self, name: String) {
        self.scopes.last_mut().expect("scope").push(name);
    }

    fn atom(&mut self) -> String {
        if self.rng.gen_bool(0.2) {
            return self.rng.gen_range(0..10).to_string();
        }
        self.visible().choose(&mut self.rng).cloned().expect("parameters are visible")
    }

    fn expr(&mut self) -> String {
        let lhs = self.atom();
        if self.rng.gen_bool(0.5) {
            let op = ["+", "-", "*"].choose(&mut self.rng).copied().unwrap_or("+");
            let rhs = self.atom();
            format!("{lhs} {op} {rhs}")
        } else {
            lhs
        }
    }

    fn comparison(&mut self) -> String {
        match self.rng.gen_range(0..6) {
            0 => "p".into(),
            1 => "!q".into(),
            _ => {
                let (l, r) = (self.atom(), self.atom());
                let op = ["<", ">", "==", "!=", "<=", ">="].choose(&mut self.rng).copied().unwrap_or("<");
                format!("{l} {op} {r}")
            }
        }
    }

    fn condition(&mut self) -> String {
        let mut c = self.comparison();
        for _ in 0..self.rng.gen_range(0..3) {
            let op = if self.rng.gen_bool(0.5) { "&&" } else { "||" };
            let next = self.comparison();
            c = format!("{c} {op} {next}");
        }
        if self.rng.gen_bool(0.1) {
            let other = self.comparison();
            c = format!("!({c}) && {other}");
        }
        c
    }

    /// Straight-line statement; a declaration is never produced when
    /// `allow_decl` is false (braceless branch bodies).
    fn simple(&mut self, indent: usize, allow_decl: bool) {
        let vars: Vec<String> = self.visible().into_iter().filter(|v| v.starts_with('v')).collect();
        let choice = match (vars.is_empty(), allow_decl) {
            (true, true) => 0,
            (true, false) => 4,
            (false, true) => self.rng.gen_range(0..5),
            (false, false) => self.rng.gen_range(1..5),
        };
        let text = match choice {
            0 => {
                let e = self.expr();
                let v = self.fresh("v");
                self.declare(v.clone());
                format!("int {v} = {e};")
            }
            1 => {
                let v = vars.choose(&mut self.rng).cloned().unwrap_or_default();
                let e = self.expr();
                format!("{v} = {e};")
            }
            2 => {
                let v = vars.choose(&mut self.rng).cloned().unwrap_or_default();
                let e = self.expr();
                format!("{v} += {e};")
            }
            3 => {
                let v = vars.choose(&mut self.rng).cloned().unwrap_or_default();
                format!("{v}++;")
            }
            _ => {
                let e = self.expr();
                format!("System.out.println({e});")
            }
        };
        self.line(indent, &text);
    }

    /// Statements of one block: `width` statements, where a jump may only
    /// close the block.
    fn block_body(&mut self, indent: usize, depth: usize, width: usize, ctx: Ctx) {
        for k in 0..width {
            let last = k + 1 == width;
            if last && depth > 0 && self.try_jump(indent, ctx) {
                continue;
            }
            self.statement(indent, depth, ctx);
        }
    }

    fn try_jump(&mut self, indent: usize, ctx: Ctx) -> bool {
        if !self.rng.gen_bool(0.12) {
            return false;
        }
        let mut options = vec!["return"];
        if ctx.can_break {
            options.push("break");
        }
        if ctx.can_continue {
            options.push("continue");
        }
        match options.choose(&mut self.rng).copied() {
            Some("return") if self.returns_int => {
                let e = self.expr();
                self.line(indent, &format!("return {e};"));
            }
            Some(kw) => self.line(indent, &format!("{kw};")),
            None => return false,
        }
        true
    }

    fn nested_block(&mut self, indent: usize, depth: usize, ctx: Ctx) {
        self.scopes.push(Vec::new());
        let width = self.rng.gen_range(1..=self.max_width);
        self.block_body(indent, depth, width, ctx);
        self.scopes.pop();
    }

    fn statement(&mut self, indent: usize, depth: usize, ctx: Ctx) {
        if depth == 0 || self.rng.gen_bool(0.35) {
            self.simple(indent, true);
            return;
        }
        let inner = depth - 1;
        let in_loop = Ctx { can_break: true, can_continue: true };
        match self.rng.gen_range(0..12) {
            0..=2 => {
                let c = self.condition();
                if self.rng.gen_bool(0.15) {
                    // braceless single-statement branch
                    self.line(indent, &format!("if ({c})"));
                    self.simple(indent + 1, false);
                    return;
                }
                self.line(indent, &format!("if ({c}) {{"));
                self.nested_block(indent + 1, inner, ctx);
                let mut tail = self.rng.gen_range(0..4);
                while tail >= 2 {
                    let c = self.condition();
                    self.line(indent, &format!("}} else if ({c}) {{"));
                    self.nested_block(indent + 1, inner, ctx);
                    tail = self.rng.gen_range(0..4);
                }
                if tail == 1 {
                    self.line(indent, "} else {");
                    self.nested_block(indent + 1, inner, ctx);
                }
                self.line(indent, "}");
            }
            3 => {
                let i = self.fresh("i");
                self.line(indent, &format!("for (int {i} = 0; {i} < a; {i}++) {{"));
                self.scopes.push(vec![i]);
                self.nested_block(indent + 1, inner, in_loop);
                self.scopes.pop();
                self.line(indent, "}");
            }
            4 => {
                let x = self.fresh("x");
                self.line(indent, &format!("for (int {x} : items) {{"));
                self.scopes.push(vec![x]);
                self.nested_block(indent + 1, inner, in_loop);
                self.scopes.pop();
                self.line(indent, "}");
            }
            5 => {
                let c = self.condition();
                self.line(indent, &format!("while ({c}) {{"));
                self.nested_block(indent + 1, inner, in_loop);
                self.line(indent, "}");
            }
            6 => {
                self.line(indent, "do {");
                self.nested_block(indent + 1, inner, in_loop);
                let c = self.condition();
                self.line(indent, &format!("}} while ({c});"));
            }
            7 => {
                let sel = self.atom();
                self.line(indent, &format!("switch ({sel}) {{"));
                let cases = self.rng.gen_range(1..=3);
                let switch_ctx = Ctx { can_break: true, ..ctx };
                for k in 0..cases {
                    self.line(indent + 1, &format!("case {k}:"));
                    self.scopes.push(Vec::new());
                    let width = self.rng.gen_range(1..=self.max_width);
                    self.block_body(indent + 2, inner, width, switch_ctx);
                    self.scopes.pop();
                    self.line(indent + 2, "break;");
                }
                if self.rng.gen_bool(0.5) {
                    self.line(indent + 1, "default:");
                    self.scopes.push(Vec::new());
                    self.simple(indent + 2, true);
                    self.scopes.pop();
                }
                self.line(indent, "}");
            }
            8 => {
                self.line(indent, "try {");
                self.nested_block(indent + 1, inner, ctx);
                let e = self.fresh("e");
                self.line(indent, &format!("}} catch (RuntimeException {e}) {{"));
                self.nested_block(indent + 1, inner, ctx);
                if self.rng.gen_bool(0.3) {
                    self.line(indent, "} finally {");
                    self.nested_block(indent + 1, inner, ctx);
                }
                self.line(indent, "}");
            }
            9 => {
                let (c, t, f) = (self.condition(), self.expr(), self.expr());
                let v = self.fresh("v");
                self.line(indent, &format!("int {v} = {c} ? {t} : {f};"));
                self.declare(v);
            }
            _ => {
                self.line(indent, "{");
                self.nested_block(indent + 1, inner, ctx);
                self.line(indent, "}");
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{list_methods, parse, SourceFile};
    use crate::metrics::{annotate_method, method_sscc};

    #[test]
    fn deterministic() {
        assert_eq!(generate_method(1, 4, 4), generate_method(1, 4, 4));
        assert_ne!(generate_method(1, 4, 4), generate_method(2, 4, 4));
    }

    #[test]
    fn flat_method() {
        let text = generate_class("G", &[generate_method(9, 0, 1)]);
        let unit = parse(&SourceFile::new("G.java", &text)).unwrap();
        let m = list_methods(&unit)[0];
        assert_eq!(m.body.stmts.len(), 1);
        assert_eq!(method_sscc(&annotate_method(m)), 0);
    }

    #[test]
    fn corpus_parses() {
        for seed in 0..200 {
            let text = generate_class("G", &[generate_method(seed, 4, 4)]);
            let unit = parse(&SourceFile::new("G.java", &text)).unwrap_or_else(|e| panic!("{e}\n{text}"));
            let m = list_methods(&unit)[0];
            assert!(m.unsupported.is_none(), "{text}");
        }
    }
}
