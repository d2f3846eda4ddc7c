//! Loop unrolling, SSA renaming, and guard construction.

use crate::dsl::*;
use std::collections::HashMap;

/// An SSA-versioned local: (name, version). Version 0 of the argument
/// variable denotes the invocation's argument; every other version is
/// introduced by exactly one atom.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SsaVar {
    pub name: String,
    pub version: u32,
}

impl std::fmt::Display for SsaVar {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}.{}", self.name, self.version)
    }
}

/// Guard/value expression over SSA locals. `Row(site)` is the row id that
/// allocation site gets for the running invocation slot (statically
/// pre-instantiated, so it is a per-slot constant).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GExpr {
    Int(i64),
    Var(SsaVar),
    Row(usize),
    Bin(BinOp, Box<GExpr>, Box<GExpr>),
    Cmp(CmpOp, Box<GExpr>, Box<GExpr>),
    Bool(bool),
    And(Box<GExpr>, Box<GExpr>),
    Or(Box<GExpr>, Box<GExpr>),
    Not(Box<GExpr>),
}

impl GExpr {
    pub fn and(a: GExpr, b: GExpr) -> GExpr {
        match (a, b) {
            (GExpr::Bool(true), x) | (x, GExpr::Bool(true)) => x,
            (GExpr::Bool(false), _) | (_, GExpr::Bool(false)) => GExpr::Bool(false),
            (a, b) => GExpr::And(Box::new(a), Box::new(b)),
        }
    }

    pub fn or(a: GExpr, b: GExpr) -> GExpr {
        match (a, b) {
            (GExpr::Bool(false), x) | (x, GExpr::Bool(false)) => x,
            (GExpr::Bool(true), _) | (_, GExpr::Bool(true)) => GExpr::Bool(true),
            (a, b) => GExpr::Or(Box::new(a), Box::new(b)),
        }
    }

    pub fn not(a: GExpr) -> GExpr {
        match a {
            GExpr::Bool(b) => GExpr::Bool(!b),
            a => GExpr::Not(Box::new(a)),
        }
    }

    /// All SSA variables referenced.
    pub fn vars(&self, out: &mut Vec<SsaVar>) {
        match self {
            GExpr::Var(v) => out.push(v.clone()),
            GExpr::Bin(_, a, b) | GExpr::Cmp(_, a, b) | GExpr::And(a, b) | GExpr::Or(a, b) => {
                a.vars(out);
                b.vars(out);
            }
            GExpr::Not(a) => a.vars(out),
            GExpr::Int(_) | GExpr::Row(_) | GExpr::Bool(_) => {}
        }
    }
}

/// Location expression in an atom: a declared global (by universe index) or
/// a field of the row value an expression evaluates to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LocGE {
    Global(usize),
    Field(GExpr, usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atom {
    /// Position in the atom list; strictly increasing.
    pub idx: usize,
    /// Source statement label, for diagnostics and witness rendering.
    pub src_label: Option<u32>,
    pub guard: GExpr,
    pub kind: AtomKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AtomKind {
    /// `var := guard ? value : prev` (prev absent ⇒ the variable was unset
    /// on the skipped path; its value there is ⊥).
    Assign { var: SsaVar, prev: Option<SsaVar>, value: GExpr },
    Alloc { var: SsaVar, prev: Option<SsaVar>, site: usize },
    Read { var: SsaVar, prev: Option<SsaVar>, loc: LocGE },
    Write { loc: LocGE, value: GExpr },
    /// CAS produces a read event (on mismatch) or an update event (on
    /// match); `var` is bound to 1 on success, 0 on failure.
    Cas { var: SsaVar, prev: Option<SsaVar>, loc: LocGE, expect: GExpr, swap: GExpr },
    /// `value` None encodes a bare `return` (return value ⊥).
    Return { value: Option<GExpr> },
}

impl AtomKind {
    /// Whether the atom generates a store event when its guard holds.
    pub fn is_event(&self) -> bool {
        matches!(self, AtomKind::Read { .. } | AtomKind::Write { .. } | AtomKind::Cas { .. })
    }
}

#[derive(Debug, Clone)]
pub struct UnrolledMethod {
    pub name: String,
    pub arg: String,
    pub atoms: Vec<Atom>,
    /// Condition under which the invocation returns (explicitly or by
    /// falling off the end of the body).
    pub completion: GExpr,
    /// Condition under which the unroll bound was exhausted inside a loop;
    /// disjoint from `completion`, and together they cover all paths.
    pub stuck: GExpr,
}

impl UnrolledMethod {
    pub fn event_atoms(&self) -> impl Iterator<Item = &Atom> {
        self.atoms.iter().filter(|a| a.kind.is_event())
    }
}

struct Ctx<'a> {
    lib: &'a LibraryDef,
    bound: u32,
    atoms: Vec<Atom>,
    versions: HashMap<String, u32>,
    next_version: HashMap<String, u32>,
    returns: Vec<GExpr>,
    stuck: GExpr,
    /// Statement label → allocation-site index (textual order across the
    /// library). Sites are static: an allocation inside a loop would need a
    /// fresh row per iteration and is rejected.
    sites_by_label: HashMap<u32, usize>,
    emitted_sites: Vec<usize>,
}

pub fn unroll(lib: &LibraryDef, method: &MethodDef, bound: u32) -> UnrolledMethod {
    assert!(bound >= 1, "unroll bound must be positive");
    let mut cx = Ctx {
        lib,
        bound,
        atoms: Vec::new(),
        versions: HashMap::from([(method.arg.clone(), 0)]),
        next_version: HashMap::from([(method.arg.clone(), 1)]),
        returns: Vec::new(),
        stuck: GExpr::Bool(false),
        sites_by_label: alloc_sites_by_label(lib),
        emitted_sites: Vec::new(),
    };
    let fallthrough = cx.walk_block(&method.body, GExpr::Bool(true));
    // Falling off the end of the body is an implicit bare return.
    if fallthrough != GExpr::Bool(false) {
        cx.emit(None, fallthrough.clone(), AtomKind::Return { value: None });
        cx.returns.push(fallthrough);
    }
    let completion = cx.returns.into_iter().fold(GExpr::Bool(false), GExpr::or);
    UnrolledMethod {
        name: method.name.clone(),
        arg: method.arg.clone(),
        atoms: cx.atoms,
        completion,
        stuck: cx.stuck,
    }
}

/// Statement label → site index, textual order across the library.
pub fn alloc_sites_by_label(lib: &LibraryDef) -> HashMap<u32, usize> {
    let mut out = HashMap::new();
    let mut idx = 0;
    for m in &lib.methods {
        collect_alloc_labels(&m.body, &mut |label| {
            out.insert(label, idx);
            idx += 1;
        });
    }
    out
}

fn collect_alloc_labels(stmts: &[Stmt], f: &mut impl FnMut(u32)) {
    for s in stmts {
        match &s.kind {
            StmtKind::Alloc(..) => f(s.label.expect("alloc statements are labeled")),
            StmtKind::If(_, a, b) => {
                collect_alloc_labels(a, f);
                collect_alloc_labels(b, f);
            }
            StmtKind::While(_, b) => collect_alloc_labels(b, f),
            _ => {}
        }
    }
}

/// Alloc sites of the whole library, in site-index order.
pub fn alloc_sites(lib: &LibraryDef) -> Vec<(String, String)> {
    let mut out = Vec::new();
    for m in &lib.methods {
        collect_allocs(&m.body, &m.name, &mut out);
    }
    out
}

fn collect_allocs(stmts: &[Stmt], method: &str, out: &mut Vec<(String, String)>) {
    for s in stmts {
        match &s.kind {
            StmtKind::Alloc(_, table) => out.push((method.to_string(), table.clone())),
            StmtKind::If(_, a, b) => {
                collect_allocs(a, method, out);
                collect_allocs(b, method, out);
            }
            StmtKind::While(_, b) => collect_allocs(b, method, out),
            _ => {}
        }
    }
}

impl Ctx<'_> {
    fn cur(&self, name: &str) -> Option<SsaVar> {
        self.versions.get(name).map(|v| SsaVar { name: name.to_string(), version: *v })
    }

    fn fresh(&mut self, name: &str) -> SsaVar {
        let v = self.next_version.entry(name.to_string()).or_insert(1);
        let var = SsaVar { name: name.to_string(), version: *v };
        *v += 1;
        self.versions.insert(name.to_string(), var.version);
        var
    }

    fn emit(&mut self, src_label: Option<u32>, guard: GExpr, kind: AtomKind) {
        let idx = self.atoms.len();
        self.atoms.push(Atom { idx, src_label, guard, kind });
    }

    fn tr_expr(&self, e: &Expr) -> GExpr {
        match e {
            Expr::Int(n) => GExpr::Int(*n),
            Expr::Null => GExpr::Int(crate::value::NULL),
            Expr::Empty => GExpr::Int(crate::value::EMPTY),
            Expr::Var(v) => match self.cur(v) {
                Some(sv) => GExpr::Var(sv),
                // Used before any assignment on every path: the value is ⊥.
                None => GExpr::Int(crate::value::BOT),
            },
            Expr::Bin(op, a, b) => {
                GExpr::Bin(*op, Box::new(self.tr_expr(a)), Box::new(self.tr_expr(b)))
            }
        }
    }

    fn tr_bool(&self, b: &BoolExpr) -> GExpr {
        match b {
            BoolExpr::Lit(v) => GExpr::Bool(*v),
            BoolExpr::Cmp(op, a, b) => {
                GExpr::Cmp(*op, Box::new(self.tr_expr(a)), Box::new(self.tr_expr(b)))
            }
            BoolExpr::And(a, b) => GExpr::and(self.tr_bool(a), self.tr_bool(b)),
            BoolExpr::Or(a, b) => GExpr::or(self.tr_bool(a), self.tr_bool(b)),
        }
    }

    fn tr_loc(&self, l: &LocRef) -> LocGE {
        match l {
            LocRef::Global(g) => {
                let idx = self
                    .lib
                    .globals
                    .iter()
                    .position(|d| d.name == *g)
                    .expect("parser checked global");
                LocGE::Global(idx)
            }
            LocRef::Field(v, f) => {
                let fidx = field_index(self.lib, f).expect("parser checked field");
                let row = match self.cur(v) {
                    Some(sv) => GExpr::Var(sv),
                    None => GExpr::Int(crate::value::BOT),
                };
                LocGE::Field(row, fidx)
            }
        }
    }

    /// Walks a block under guard `g`; returns the guard under which control
    /// falls out of the block (not returned, not stuck).
    fn walk_block(&mut self, stmts: &[Stmt], g: GExpr) -> GExpr {
        let mut live = g;
        for s in stmts {
            if live == GExpr::Bool(false) {
                break;
            }
            live = self.walk_stmt(s, live);
        }
        live
    }

    fn walk_stmt(&mut self, s: &Stmt, live: GExpr) -> GExpr {
        match &s.kind {
            StmtKind::Assign(v, e) => {
                let value = self.tr_expr(e);
                let prev = self.cur(v);
                let var = self.fresh(v);
                self.emit(s.label, live.clone(), AtomKind::Assign { var, prev, value });
                live
            }
            StmtKind::Read(v, l) => {
                let loc = self.tr_loc(l);
                let prev = self.cur(v);
                let var = self.fresh(v);
                self.emit(s.label, live.clone(), AtomKind::Read { var, prev, loc });
                live
            }
            StmtKind::Write(l, e) => {
                let loc = self.tr_loc(l);
                let value = self.tr_expr(e);
                self.emit(s.label, live.clone(), AtomKind::Write { loc, value });
                live
            }
            StmtKind::Cas(v, l, e1, e2) => {
                let loc = self.tr_loc(l);
                let expect = self.tr_expr(e1);
                let swap = self.tr_expr(e2);
                let prev = self.cur(v);
                let var = self.fresh(v);
                self.emit(s.label, live.clone(), AtomKind::Cas { var, prev, loc, expect, swap });
                live
            }
            StmtKind::Alloc(v, _table) => {
                let site = self.sites_by_label[&s.label.expect("alloc statements are labeled")];
                assert!(
                    !self.emitted_sites.contains(&site),
                    "allocation inside a loop is unsupported (site would need a row per iteration)"
                );
                self.emitted_sites.push(site);
                let prev = self.cur(v);
                let var = self.fresh(v);
                self.emit(s.label, live.clone(), AtomKind::Alloc { var, prev, site });
                live
            }
            StmtKind::If(b, then, els) => {
                let c = self.tr_bool(b);
                let t_out = self.walk_block(then, GExpr::and(live.clone(), c.clone()));
                let e_out = self.walk_block(els, GExpr::and(live, GExpr::not(c)));
                GExpr::or(t_out, e_out)
            }
            StmtKind::While(b, body) => self.walk_while(b, body, live, self.bound),
            StmtKind::Return(e) => {
                let value = e.as_ref().map(|e| self.tr_expr(e));
                self.emit(s.label, live.clone(), AtomKind::Return { value });
                self.returns.push(live);
                GExpr::Bool(false)
            }
        }
    }

    fn walk_while(&mut self, b: &BoolExpr, body: &[Stmt], live: GExpr, remaining: u32) -> GExpr {
        let c = self.tr_bool(b);
        if remaining == 0 {
            // Residual condition still true after the last copy: the path
            // exhausts the unroll bound and never completes.
            let stuck_here = GExpr::and(live.clone(), c.clone());
            self.stuck = GExpr::or(std::mem::replace(&mut self.stuck, GExpr::Bool(false)), stuck_here);
            return GExpr::and(live, GExpr::not(c));
        }
        let enter = GExpr::and(live.clone(), c.clone());
        let body_out = self.walk_block(body, enter);
        let after_iterations = self.walk_while(b, body, body_out, remaining - 1);
        GExpr::or(GExpr::and(live, GExpr::not(c)), after_iterations)
    }
}

/// Field name → index in the library-wide field numbering. Field names are
/// unique across tables at the declaration level (the parser only checks
/// existence), so the first match wins.
pub fn field_index(lib: &LibraryDef, field: &str) -> Option<usize> {
    let mut idx = 0;
    for t in &lib.tables {
        for f in &t.fields {
            if f.name == field {
                return Some(idx);
            }
            idx += 1;
        }
    }
    None
}

/// Total number of distinct field slots across all tables.
pub fn field_count(lib: &LibraryDef) -> usize {
    lib.tables.iter().map(|t| t.fields.len()).sum()
}
