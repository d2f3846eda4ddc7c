//! Hand-rolled lexer and recursive-descent parser for `.rdsl` sources.

use super::ast::*;
use thiserror::Error;

#[derive(Debug, Error)]
#[error("{line}:{col}: {msg}")]
pub struct ParseError {
    pub line: u32,
    pub col: u32,
    pub msg: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(i64),
    Punct(&'static str),
    Eof,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: u32,
    col: u32,
}

const PUNCTS: &[&str] = &[
    "==", "!=", "<=", ">=", "&&", "||", "(", ")", "{", "}", ";", ",", "=", "<", ">", "+", "-",
    "*", "/", ".",
];

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { src: src.as_bytes(), pos: 0, line: 1, col: 1 }
    }

    fn bump(&mut self) -> u8 {
        let b = self.src[self.pos];
        self.pos += 1;
        if b == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        b
    }

    fn skip_trivia(&mut self) {
        loop {
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
                self.bump();
            }
            // line comments: `#` or `//`
            if self.pos < self.src.len() && self.src[self.pos] == b'#'
                || self.pos + 1 < self.src.len() && &self.src[self.pos..self.pos + 2] == b"//"
            {
                while self.pos < self.src.len() && self.src[self.pos] != b'\n' {
                    self.bump();
                }
                continue;
            }
            break;
        }
    }

    fn next(&mut self) -> Result<(Tok, u32, u32), ParseError> {
        self.skip_trivia();
        let (line, col) = (self.line, self.col);
        if self.pos >= self.src.len() {
            return Ok((Tok::Eof, line, col));
        }
        let b = self.src[self.pos];
        if b.is_ascii_alphabetic() || b == b'_' {
            let start = self.pos;
            while self.pos < self.src.len()
                && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
            {
                self.bump();
            }
            let s = std::str::from_utf8(&self.src[start..self.pos]).unwrap().to_string();
            return Ok((Tok::Ident(s), line, col));
        }
        if b.is_ascii_digit() {
            let start = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.bump();
            }
            let s = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
            let n = s.parse::<i64>().map_err(|_| ParseError {
                line,
                col,
                msg: format!("integer literal out of range: {s}"),
            })?;
            return Ok((Tok::Int(n), line, col));
        }
        for p in PUNCTS {
            if self.src[self.pos..].starts_with(p.as_bytes()) {
                for _ in 0..p.len() {
                    self.bump();
                }
                return Ok((Tok::Punct(p), line, col));
            }
        }
        Err(ParseError { line, col, msg: format!("unexpected character {:?}", b as char) })
    }
}

struct Parser {
    toks: Vec<(Tok, u32, u32)>,
    idx: usize,
    globals: Vec<String>,
    /// (table, field names)
    tables: Vec<(String, Vec<String>)>,
    static_rows: Vec<String>,
    next_label: u32,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.idx].0
    }

    fn pos(&self) -> (u32, u32) {
        let (_, l, c) = self.toks[self.idx];
        (l, c)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        let (line, col) = self.pos();
        Err(ParseError { line, col, msg: msg.into() })
    }

    fn advance(&mut self) -> Tok {
        let t = self.toks[self.idx].0.clone();
        if self.idx + 1 < self.toks.len() {
            self.idx += 1;
        }
        t
    }

    fn eat_punct(&mut self, p: &str) -> Result<(), ParseError> {
        match self.peek() {
            Tok::Punct(q) if *q == p => {
                self.advance();
                Ok(())
            }
            t => self.err(format!("expected `{p}`, found {}", show(t))),
        }
    }

    fn eat_kw(&mut self, kw: &str) -> Result<(), ParseError> {
        match self.peek() {
            Tok::Ident(s) if s == kw => {
                self.advance();
                Ok(())
            }
            t => self.err(format!("expected `{kw}`, found {}", show(t))),
        }
    }

    fn at_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.advance();
                Ok(s)
            }
            t => self.err(format!("expected identifier, found {}", show(&t))),
        }
    }

    fn is_global(&self, name: &str) -> bool {
        self.globals.iter().any(|g| g == name)
    }

    fn fresh_label(&mut self) -> u32 {
        self.next_label += 1;
        self.next_label
    }
}

fn show(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Int(n) => format!("`{n}`"),
        Tok::Punct(p) => format!("`{p}`"),
        Tok::Eof => "end of input".to_string(),
    }
}

fn is_capitalized(s: &str) -> bool {
    s.chars().next().is_some_and(|c| c.is_ascii_uppercase())
}

const KEYWORDS: &[&str] = &[
    "library", "datatype", "global", "init", "table", "row", "of", "method", "new", "CAS", "if",
    "else", "while", "return", "NULL", "EMPTY", "true", "false",
];

pub fn parse_library(text: &str) -> Result<LibraryDef, ParseError> {
    let mut lx = Lexer::new(text);
    let mut toks = Vec::new();
    loop {
        let t = lx.next()?;
        let end = matches!(t.0, Tok::Eof);
        toks.push(t);
        if end {
            break;
        }
    }
    let mut p = Parser {
        toks,
        idx: 0,
        globals: Vec::new(),
        tables: Vec::new(),
        static_rows: Vec::new(),
        next_label: 0,
    };

    p.eat_kw("library")?;
    let name = p.ident()?;
    p.eat_kw("datatype")?;
    let dt = p.ident()?;
    let datatype = match dt.as_str() {
        "stack" => Datatype::Stack,
        "queue" => Datatype::Queue,
        "exchanger" => Datatype::Exchanger,
        other => return p.err(format!("unknown datatype `{other}`")),
    };

    let mut globals = Vec::new();
    let mut tables = Vec::new();
    let mut static_rows = Vec::new();
    let mut methods: Vec<MethodDef> = Vec::new();

    loop {
        if p.at_kw("global") {
            p.advance();
            let gname = p.ident()?;
            if !is_capitalized(&gname) {
                return p.err(format!("global `{gname}` must be capitalized"));
            }
            if p.is_global(&gname) {
                return p.err(format!("duplicate global `{gname}`"));
            }
            p.eat_kw("init")?;
            let init = p.parse_init_value()?;
            p.globals.push(gname.clone());
            globals.push(GlobalDecl { name: gname, init });
        } else if p.at_kw("table") {
            p.advance();
            let tname = p.ident()?;
            if !is_capitalized(&tname) {
                return p.err(format!("table `{tname}` must be capitalized"));
            }
            if p.tables.iter().any(|(t, _)| *t == tname) {
                return p.err(format!("duplicate table `{tname}`"));
            }
            p.eat_punct("(")?;
            let mut fields = Vec::new();
            loop {
                let fname = p.ident()?;
                if !is_capitalized(&fname) {
                    return p.err(format!("field `{fname}` must be capitalized"));
                }
                let init = if p.at_kw("init") {
                    p.advance();
                    p.parse_init_value()?
                } else {
                    InitValue::Int(0)
                };
                if fields.iter().any(|f: &FieldDecl| f.name == fname) {
                    return p.err(format!("duplicate field `{fname}`"));
                }
                fields.push(FieldDecl { name: fname, init });
                if matches!(p.peek(), Tok::Punct(",")) {
                    p.advance();
                } else {
                    break;
                }
            }
            p.eat_punct(")")?;
            p.tables.push((tname.clone(), fields.iter().map(|f| f.name.clone()).collect()));
            tables.push(TableDecl { name: tname, fields });
        } else if p.at_kw("row") {
            p.advance();
            let rname = p.ident()?;
            if !is_capitalized(&rname) {
                return p.err(format!("static row `{rname}` must be capitalized"));
            }
            p.eat_kw("of")?;
            let tname = p.ident()?;
            if !p.tables.iter().any(|(t, _)| *t == tname) {
                return p.err(format!("static row `{rname}` references undeclared table `{tname}`"));
            }
            if p.static_rows.contains(&rname) {
                return p.err(format!("duplicate static row `{rname}`"));
            }
            p.static_rows.push(rname.clone());
            static_rows.push(StaticRow { name: rname, table: tname });
        } else if p.at_kw("method") {
            p.advance();
            let mname = p.ident()?;
            if is_capitalized(&mname) {
                return p.err(format!("method `{mname}` must be lowercase"));
            }
            if methods.iter().any(|m| m.name == mname) {
                return p.err(format!("duplicate method `{mname}`"));
            }
            p.eat_punct("(")?;
            let arg = p.ident()?;
            p.eat_punct(")")?;
            p.eat_punct("{")?;
            let mut scope = Scope { arg: arg.clone(), locals: vec![arg.clone()] };
            let body = p.parse_block(&mut scope)?;
            methods.push(MethodDef { name: mname, arg, body });
        } else if matches!(p.peek(), Tok::Eof) {
            break;
        } else {
            return p.err(format!(
                "expected `global`, `table`, `row`, or `method`, found {}",
                show(p.peek())
            ));
        }
    }

    // Globals may initialize to static rows declared later in the file; check now.
    for g in &globals {
        if let InitValue::Row(r) = &g.init {
            if !static_rows.iter().any(|s| s.name == *r) {
                return Err(ParseError {
                    line: 1,
                    col: 1,
                    msg: format!("global `{}` initialized to undeclared row `{r}`", g.name),
                });
            }
        }
    }
    for m in [datatype.producer(), datatype.consumer()] {
        if !methods.iter().any(|d| d.name == m) {
            return Err(ParseError {
                line: 1,
                col: 1,
                msg: format!("datatype {} requires a method named `{m}`", datatype.as_str()),
            });
        }
    }

    Ok(LibraryDef { name, datatype, globals, tables, static_rows, methods })
}

struct Scope {
    arg: String,
    /// Locals seen so far (assignment introduces them).
    locals: Vec<String>,
}

impl Parser {
    fn parse_init_value(&mut self) -> Result<InitValue, ParseError> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.advance();
                Ok(InitValue::Int(n))
            }
            Tok::Punct("-") => {
                self.advance();
                match self.peek().clone() {
                    Tok::Int(n) => {
                        self.advance();
                        Ok(InitValue::Int(-n))
                    }
                    t => self.err(format!("expected integer after `-`, found {}", show(&t))),
                }
            }
            Tok::Ident(s) if s == "NULL" => {
                self.advance();
                Ok(InitValue::Null)
            }
            Tok::Ident(s) if s == "EMPTY" => {
                self.advance();
                Ok(InitValue::Empty)
            }
            Tok::Ident(s) if is_capitalized(&s) => {
                self.advance();
                Ok(InitValue::Row(s))
            }
            t => self.err(format!("expected initial value, found {}", show(&t))),
        }
    }

    fn parse_block(&mut self, scope: &mut Scope) -> Result<Vec<Stmt>, ParseError> {
        let mut stmts = Vec::new();
        while !matches!(self.peek(), Tok::Punct("}")) {
            stmts.push(self.parse_stmt(scope)?);
        }
        self.eat_punct("}")?;
        Ok(stmts)
    }

    fn parse_stmt(&mut self, scope: &mut Scope) -> Result<Stmt, ParseError> {
        let (line, _) = self.pos();
        if self.at_kw("if") {
            self.advance();
            self.eat_punct("(")?;
            let cond = self.parse_bool(scope)?;
            self.eat_punct(")")?;
            self.eat_punct("{")?;
            let then = self.parse_block(scope)?;
            let els = if self.at_kw("else") {
                self.advance();
                self.eat_punct("{")?;
                self.parse_block(scope)?
            } else {
                Vec::new()
            };
            return Ok(Stmt { label: None, line, kind: StmtKind::If(cond, then, els) });
        }
        if self.at_kw("while") {
            self.advance();
            self.eat_punct("(")?;
            let cond = self.parse_bool(scope)?;
            self.eat_punct(")")?;
            self.eat_punct("{")?;
            let body = self.parse_block(scope)?;
            return Ok(Stmt { label: None, line, kind: StmtKind::While(cond, body) });
        }
        if self.at_kw("return") {
            self.advance();
            if matches!(self.peek(), Tok::Punct(";")) {
                self.advance();
                return Ok(Stmt { label: None, line, kind: StmtKind::Return(None) });
            }
            let e = self.parse_expr(scope)?;
            self.eat_punct(";")?;
            return Ok(Stmt { label: None, line, kind: StmtKind::Return(Some(e)) });
        }

        // Assignment-shaped statement: target is a local, a global, or `v.Field`.
        let target = self.ident()?;
        if matches!(self.peek(), Tok::Punct(".")) {
            // field write: `v.Field = e;`
            self.advance();
            let field = self.ident()?;
            self.check_field_target(scope, &target, &field)?;
            self.eat_punct("=")?;
            let e = self.parse_expr(scope)?;
            self.eat_punct(";")?;
            let label = self.fresh_label();
            return Ok(Stmt {
                label: Some(label),
                line,
                kind: StmtKind::Write(LocRef::Field(target, field), e),
            });
        }
        self.eat_punct("=")?;
        if is_capitalized(&target) {
            // global write
            if !self.is_global(&target) {
                return self.err(format!("undeclared replicated location `{target}`"));
            }
            let e = self.parse_expr(scope)?;
            self.eat_punct(";")?;
            let label = self.fresh_label();
            return Ok(Stmt {
                label: Some(label),
                line,
                kind: StmtKind::Write(LocRef::Global(target), e),
            });
        }
        // local target
        if target == scope.arg {
            return self.err(format!("argument variable `{target}` cannot be reassigned"));
        }
        if KEYWORDS.contains(&target.as_str()) {
            return self.err(format!("`{target}` is a keyword"));
        }
        let stmt = if self.at_kw("CAS") {
            self.advance();
            self.eat_punct("(")?;
            let loc = self.parse_locref(scope)?;
            self.eat_punct(",")?;
            let e1 = self.parse_expr(scope)?;
            self.eat_punct(",")?;
            let e2 = self.parse_expr(scope)?;
            self.eat_punct(")")?;
            self.eat_punct(";")?;
            let label = self.fresh_label();
            Stmt { label: Some(label), line, kind: StmtKind::Cas(target.clone(), loc, e1, e2) }
        } else if self.at_kw("new") {
            self.advance();
            self.eat_punct("(")?;
            let tname = self.ident()?;
            if !self.tables.iter().any(|(t, _)| *t == tname) {
                return self.err(format!("allocation of undeclared table `{tname}`"));
            }
            self.eat_punct(")")?;
            self.eat_punct(";")?;
            let label = self.fresh_label();
            Stmt { label: Some(label), line, kind: StmtKind::Alloc(target.clone(), tname) }
        } else if let Some(loc) = self.try_parse_loc_read(scope)? {
            let label = self.fresh_label();
            Stmt { label: Some(label), line, kind: StmtKind::Read(target.clone(), loc) }
        } else {
            let e = self.parse_expr(scope)?;
            self.eat_punct(";")?;
            Stmt { label: None, line, kind: StmtKind::Assign(target.clone(), e) }
        };
        if !scope.locals.contains(&target) {
            scope.locals.push(target);
        }
        Ok(stmt)
    }

    /// After `v =`, decide whether the right-hand side is a replicated read
    /// (`Global;` or `local.Field;`) and consume it if so.
    fn try_parse_loc_read(&mut self, scope: &Scope) -> Result<Option<LocRef>, ParseError> {
        let Tok::Ident(head) = self.peek().clone() else { return Ok(None) };
        if head == "NULL" || head == "EMPTY" {
            return Ok(None);
        }
        // lookahead for `head . Field ;` or `Head ;`
        let next = &self.toks[self.idx + 1].0;
        if is_capitalized(&head) {
            if !matches!(next, Tok::Punct(";")) {
                return self.err(format!(
                    "replicated location `{head}` may only appear alone on the right-hand side"
                ));
            }
            if !self.is_global(&head) {
                return self.err(format!("undeclared replicated location `{head}`"));
            }
            self.advance();
            self.advance(); // `;`
            return Ok(Some(LocRef::Global(head)));
        }
        if matches!(next, Tok::Punct(".")) {
            let Tok::Ident(field) = self.toks[self.idx + 2].0.clone() else {
                return self.err("expected field name after `.`");
            };
            self.check_field_target(scope, &head, &field)?;
            self.advance(); // head
            self.advance(); // .
            self.advance(); // field
            self.eat_punct(";")?;
            return Ok(Some(LocRef::Field(head, field)));
        }
        Ok(None)
    }

    fn check_field_target(
        &self,
        scope: &Scope,
        var: &str,
        field: &str,
    ) -> Result<(), ParseError> {
        if is_capitalized(var) {
            return self.err(format!("field access requires a local row variable, got `{var}`"));
        }
        if !scope.locals.contains(&var.to_string()) {
            return self.err(format!("unassigned local `{var}` used as row reference"));
        }
        if !self.tables.iter().any(|(_, fs)| fs.iter().any(|f| f == field)) {
            return self.err(format!("undeclared field `{field}`"));
        }
        Ok(())
    }

    fn parse_locref(&mut self, scope: &Scope) -> Result<LocRef, ParseError> {
        let head = self.ident()?;
        if matches!(self.peek(), Tok::Punct(".")) {
            self.advance();
            let field = self.ident()?;
            self.check_field_target(scope, &head, &field)?;
            return Ok(LocRef::Field(head, field));
        }
        if !is_capitalized(&head) {
            return self.err(format!("expected replicated location, found local `{head}`"));
        }
        if !self.is_global(&head) {
            return self.err(format!("undeclared replicated location `{head}`"));
        }
        Ok(LocRef::Global(head))
    }

    fn parse_expr(&mut self, scope: &Scope) -> Result<Expr, ParseError> {
        let mut lhs = self.parse_term(scope)?;
        loop {
            let op = match self.peek() {
                Tok::Punct("+") => BinOp::Add,
                Tok::Punct("-") => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.advance();
            let rhs = self.parse_term(scope)?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn parse_term(&mut self, scope: &Scope) -> Result<Expr, ParseError> {
        let mut lhs = self.parse_factor(scope)?;
        loop {
            let op = match self.peek() {
                Tok::Punct("*") => BinOp::Mul,
                Tok::Punct("/") => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.advance();
            let rhs = self.parse_factor(scope)?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn parse_factor(&mut self, scope: &Scope) -> Result<Expr, ParseError> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.advance();
                Ok(Expr::Int(n))
            }
            Tok::Punct("-") => {
                self.advance();
                let e = self.parse_factor(scope)?;
                Ok(Expr::Bin(BinOp::Sub, Box::new(Expr::Int(0)), Box::new(e)))
            }
            Tok::Punct("(") => {
                self.advance();
                let e = self.parse_expr(scope)?;
                self.eat_punct(")")?;
                Ok(e)
            }
            Tok::Ident(s) if s == "NULL" => {
                self.advance();
                Ok(Expr::Null)
            }
            Tok::Ident(s) if s == "EMPTY" => {
                self.advance();
                Ok(Expr::Empty)
            }
            Tok::Ident(s) => {
                if is_capitalized(&s) {
                    return self.err(format!(
                        "replicated location `{s}` cannot appear in an expression; read it into a local first"
                    ));
                }
                if !scope.locals.contains(&s) {
                    return self.err(format!("use of unassigned local `{s}`"));
                }
                self.advance();
                Ok(Expr::Var(s))
            }
            t => self.err(format!("expected expression, found {}", show(&t))),
        }
    }

    fn parse_bool(&mut self, scope: &Scope) -> Result<BoolExpr, ParseError> {
        let mut lhs = self.parse_bool_conj(scope)?;
        while matches!(self.peek(), Tok::Punct("||")) {
            self.advance();
            let rhs = self.parse_bool_conj(scope)?;
            lhs = BoolExpr::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn parse_bool_conj(&mut self, scope: &Scope) -> Result<BoolExpr, ParseError> {
        let mut lhs = self.parse_bool_atom(scope)?;
        while matches!(self.peek(), Tok::Punct("&&")) {
            self.advance();
            let rhs = self.parse_bool_atom(scope)?;
            lhs = BoolExpr::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn parse_bool_atom(&mut self, scope: &Scope) -> Result<BoolExpr, ParseError> {
        if self.at_kw("true") {
            self.advance();
            return Ok(BoolExpr::Lit(true));
        }
        if self.at_kw("false") {
            self.advance();
            return Ok(BoolExpr::Lit(false));
        }
        // Parenthesized boolean vs parenthesized arithmetic: try boolean first
        // by lookahead is messy; accept `(` only around full booleans when the
        // first token inside cannot start a comparison that we'd mis-nest.
        // Comparisons never contain `&&`/`||`, so backtracking is simplest.
        if matches!(self.peek(), Tok::Punct("(")) {
            let save = self.idx;
            self.advance();
            if let Ok(b) = self.parse_bool(scope) {
                if matches!(self.peek(), Tok::Punct(")")) {
                    self.advance();
                    return Ok(b);
                }
            }
            self.idx = save;
        }
        let lhs = self.parse_expr(scope)?;
        let op = match self.peek() {
            Tok::Punct("==") => CmpOp::Eq,
            Tok::Punct("!=") => CmpOp::Ne,
            Tok::Punct("<=") => CmpOp::Le,
            Tok::Punct(">=") => CmpOp::Ge,
            Tok::Punct("<") => CmpOp::Lt,
            Tok::Punct(">") => CmpOp::Gt,
            t => return self.err(format!("expected comparison operator, found {}", show(t))),
        };
        self.advance();
        let rhs = self.parse_expr(scope)?;
        Ok(BoolExpr::Cmp(op, lhs, rhs))
    }
}
