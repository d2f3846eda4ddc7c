//! AST for the library definition language.
//!
//! A library declares replicated globals, row tables, and a set of methods
//! over a small imperative language. Replicated locations are only accessed
//! through the dedicated read/write/CAS statement forms; expressions range
//! over locals. Identifier case is significant: globals, tables, fields and
//! static rows are capitalized, locals are lowercase.

use crate::value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Datatype {
    Stack,
    Queue,
    Exchanger,
}

impl Datatype {
    /// Method that inserts a value (its argument must be in the 1..=k range).
    pub fn producer(self) -> &'static str {
        match self {
            Datatype::Stack => "push",
            Datatype::Queue => "enqueue",
            Datatype::Exchanger => "exchange",
        }
    }

    /// Method that removes/returns a value; the exchanger's single method
    /// plays both roles.
    pub fn consumer(self) -> &'static str {
        match self {
            Datatype::Stack => "pop",
            Datatype::Queue => "dequeue",
            Datatype::Exchanger => "exchange",
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Datatype::Stack => "stack",
            Datatype::Queue => "queue",
            Datatype::Exchanger => "exchanger",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LibraryDef {
    pub name: String,
    pub datatype: Datatype,
    pub globals: Vec<GlobalDecl>,
    pub tables: Vec<TableDecl>,
    /// Named rows that exist from the start (sentinel nodes), usable as
    /// global initializers.
    pub static_rows: Vec<StaticRow>,
    pub methods: Vec<MethodDef>,
}

impl LibraryDef {
    pub fn global(&self, name: &str) -> Option<&GlobalDecl> {
        self.globals.iter().find(|g| g.name == name)
    }

    pub fn table(&self, name: &str) -> Option<&TableDecl> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn method(&self, name: &str) -> Option<&MethodDef> {
        self.methods.iter().find(|m| m.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GlobalDecl {
    pub name: String,
    pub init: InitValue,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InitValue {
    Int(i64),
    Null,
    Empty,
    /// Reference to a static row by name.
    Row(String),
}

impl InitValue {
    /// Concrete value; `rows` maps static row names to row ids.
    pub fn eval(&self, row_id_of: impl Fn(&str) -> i64) -> i64 {
        match self {
            InitValue::Int(n) => *n,
            InitValue::Null => value::NULL,
            InitValue::Empty => value::EMPTY,
            InitValue::Row(name) => row_id_of(name),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableDecl {
    pub name: String,
    pub fields: Vec<FieldDecl>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldDecl {
    pub name: String,
    /// Defaults to 0 when not declared.
    pub init: InitValue,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StaticRow {
    pub name: String,
    pub table: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodDef {
    pub name: String,
    /// Name of the argument variable (read-only within the body).
    pub arg: String,
    pub body: Vec<Stmt>,
}

/// A replicated location reference: a global by name, or a field of the row
/// held in a local variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LocRef {
    Global(String),
    Field(String, String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stmt {
    /// Statement label, assigned in textual order to statements that touch
    /// replicated state (read, write, CAS, alloc); used in diagnostics and
    /// witness reports.
    pub label: Option<u32>,
    pub line: u32,
    pub kind: StmtKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StmtKind {
    /// `v = e;`
    Assign(String, Expr),
    /// `v = L;` — replicated read.
    Read(String, LocRef),
    /// `L = e;` — replicated write.
    Write(LocRef, Expr),
    /// `v = CAS(L, e1, e2);` — v gets 1 on success, 0 on failure.
    Cas(String, LocRef, Expr, Expr),
    /// `v = new(Table);`
    Alloc(String, String),
    If(BoolExpr, Vec<Stmt>, Vec<Stmt>),
    While(BoolExpr, Vec<Stmt>),
    /// `return e;` or bare `return;`
    Return(Option<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Int(i64),
    Null,
    Empty,
    Var(String),
    Bin(BinOp, Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Lt,
    Le,
    Eq,
    Ne,
    Gt,
    Ge,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BoolExpr {
    Lit(bool),
    Cmp(CmpOp, Expr, Expr),
    And(Box<BoolExpr>, Box<BoolExpr>),
    Or(Box<BoolExpr>, Box<BoolExpr>),
}
