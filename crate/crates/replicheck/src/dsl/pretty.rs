//! Canonical pretty-printer; `parse(pretty(ast))` reproduces the AST.

use super::ast::*;
use std::fmt::Write;

pub fn pretty(lib: &LibraryDef) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "library {} datatype {}", lib.name, lib.datatype.as_str());
    out.push('\n');
    for t in &lib.tables {
        let fields: Vec<String> = t
            .fields
            .iter()
            .map(|f| {
                if f.init == InitValue::Int(0) {
                    f.name.clone()
                } else {
                    format!("{} init {}", f.name, init_str(&f.init))
                }
            })
            .collect();
        let _ = writeln!(out, "table {}({})", t.name, fields.join(", "));
    }
    for r in &lib.static_rows {
        let _ = writeln!(out, "row {} of {}", r.name, r.table);
    }
    for g in &lib.globals {
        let _ = writeln!(out, "global {} init {}", g.name, init_str(&g.init));
    }
    for m in &lib.methods {
        out.push('\n');
        let _ = writeln!(out, "method {}({}) {{", m.name, m.arg);
        print_block(&mut out, &m.body, 1);
        out.push_str("}\n");
    }
    out
}

fn init_str(v: &InitValue) -> String {
    match v {
        InitValue::Int(n) => n.to_string(),
        InitValue::Null => "NULL".to_string(),
        InitValue::Empty => "EMPTY".to_string(),
        InitValue::Row(r) => r.clone(),
    }
}

fn print_block(out: &mut String, stmts: &[Stmt], depth: usize) {
    for s in stmts {
        print_stmt(out, s, depth);
    }
}

fn print_stmt(out: &mut String, s: &Stmt, depth: usize) {
    let pad = "  ".repeat(depth);
    match &s.kind {
        StmtKind::Assign(v, e) => {
            let _ = writeln!(out, "{pad}{v} = {};", expr_str(e));
        }
        StmtKind::Read(v, l) => {
            let _ = writeln!(out, "{pad}{v} = {};", loc_str(l));
        }
        StmtKind::Write(l, e) => {
            let _ = writeln!(out, "{pad}{} = {};", loc_str(l), expr_str(e));
        }
        StmtKind::Cas(v, l, e1, e2) => {
            let _ = writeln!(
                out,
                "{pad}{v} = CAS({}, {}, {});",
                loc_str(l),
                expr_str(e1),
                expr_str(e2)
            );
        }
        StmtKind::Alloc(v, t) => {
            let _ = writeln!(out, "{pad}{v} = new({t});");
        }
        StmtKind::If(c, then, els) => {
            let _ = writeln!(out, "{pad}if ({}) {{", bool_str(c));
            print_block(out, then, depth + 1);
            if els.is_empty() {
                let _ = writeln!(out, "{pad}}}");
            } else {
                let _ = writeln!(out, "{pad}}} else {{");
                print_block(out, els, depth + 1);
                let _ = writeln!(out, "{pad}}}");
            }
        }
        StmtKind::While(c, body) => {
            let _ = writeln!(out, "{pad}while ({}) {{", bool_str(c));
            print_block(out, body, depth + 1);
            let _ = writeln!(out, "{pad}}}");
        }
        StmtKind::Return(None) => {
            let _ = writeln!(out, "{pad}return;");
        }
        StmtKind::Return(Some(e)) => {
            let _ = writeln!(out, "{pad}return {};", expr_str(e));
        }
    }
}

pub fn loc_str(l: &LocRef) -> String {
    match l {
        LocRef::Global(g) => g.clone(),
        LocRef::Field(v, f) => format!("{v}.{f}"),
    }
}

pub fn expr_str(e: &Expr) -> String {
    prec_str(e, 0)
}

fn prec_str(e: &Expr, outer: u8) -> String {
    match e {
        Expr::Int(n) if *n < 0 => format!("(0 - {})", -n),
        Expr::Int(n) => n.to_string(),
        Expr::Null => "NULL".to_string(),
        Expr::Empty => "EMPTY".to_string(),
        Expr::Var(v) => v.clone(),
        Expr::Bin(op, a, b) => {
            let (sym, prec) = match op {
                BinOp::Add => ("+", 1),
                BinOp::Sub => ("-", 1),
                BinOp::Mul => ("*", 2),
                BinOp::Div => ("/", 2),
            };
            // Left-associative chains reparse identically; parenthesize right
            // operands at equal precedence and anything under a tighter outer.
            let s = format!("{} {sym} {}", prec_str(a, prec - 1), prec_str(b, prec));
            if outer >= prec {
                format!("({s})")
            } else {
                s
            }
        }
    }
}

pub fn bool_str(b: &BoolExpr) -> String {
    match b {
        BoolExpr::Lit(v) => v.to_string(),
        BoolExpr::Cmp(op, a, b) => {
            let sym = match op {
                CmpOp::Lt => "<",
                CmpOp::Le => "<=",
                CmpOp::Eq => "==",
                CmpOp::Ne => "!=",
                CmpOp::Gt => ">",
                CmpOp::Ge => ">=",
            };
            format!("{} {sym} {}", expr_str(a), expr_str(b))
        }
        BoolExpr::And(a, b) => format!("({}) && ({})", bool_str(a), bool_str(b)),
        BoolExpr::Or(a, b) => format!("({}) || ({})", bool_str(a), bool_str(b)),
    }
}
