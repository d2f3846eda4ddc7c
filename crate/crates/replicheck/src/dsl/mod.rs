//! The library definition language: AST, parser, and pretty-printer.

pub mod ast;
pub mod parser;
pub mod pretty;

pub use ast::*;
pub use parser::{parse_library, ParseError};
pub use pretty::pretty;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samples::TREIBER;

    #[test]
    fn parses_treiber() {
        // [PAPER] the stack source of the running example: methods push/pop,
        // global Top init NULL, table Node(Val, Next).
        let lib = parse_library(TREIBER).unwrap();
        assert_eq!(lib.name, "treiber");
        assert_eq!(lib.datatype, Datatype::Stack);
        assert_eq!(lib.globals.len(), 1);
        assert_eq!(lib.globals[0].name, "Top");
        assert_eq!(lib.globals[0].init, InitValue::Null);
        assert_eq!(lib.tables[0].fields.len(), 2);
        assert_eq!(
            lib.methods.iter().map(|m| m.name.as_str()).collect::<Vec<_>>(),
            vec!["push", "pop"]
        );
    }

    #[test]
    fn labels_are_textual_and_global() {
        let lib = parse_library(TREIBER).unwrap();
        // push: alloc, field write, read, field write, CAS = labels 1..=5
        let push = lib.method("push").unwrap();
        let mut labels = Vec::new();
        collect_labels(&push.body, &mut labels);
        assert_eq!(labels, vec![1, 2, 3, 4, 5]);
        let pop = lib.method("pop").unwrap();
        labels.clear();
        collect_labels(&pop.body, &mut labels);
        assert_eq!(labels, vec![6, 7, 8, 9]);
    }

    fn collect_labels(stmts: &[Stmt], out: &mut Vec<u32>) {
        for s in stmts {
            if let Some(l) = s.label {
                out.push(l);
            }
            match &s.kind {
                StmtKind::If(_, a, b) => {
                    collect_labels(a, out);
                    collect_labels(b, out);
                }
                StmtKind::While(_, b) => collect_labels(b, out),
                _ => {}
            }
        }
    }

    #[test]
    fn empty_body_parses() {
        // [TRIVIAL] empty program
        let src = "library l datatype stack\nmethod push(a) { return; }\nmethod pop(a) { return; }";
        let lib = parse_library(src).unwrap();
        assert_eq!(lib.method("push").unwrap().body.len(), 1);
    }

    #[test]
    fn undeclared_location_is_an_error() {
        // [TRIVIAL] negative case: the diagnostic names the bad location.
        let src = "library l datatype stack\nmethod push(a) { Bot = 1; return; }\nmethod pop(a) { return; }";
        let err = parse_library(src).unwrap_err();
        assert!(err.to_string().contains("Bot"), "{err}");
    }

    #[test]
    fn argument_reassignment_rejected() {
        let src = "library l datatype stack\nmethod push(a) { a = 1; return; }\nmethod pop(a) { return; }";
        let err = parse_library(src).unwrap_err();
        assert!(err.to_string().contains("reassigned"), "{err}");
    }

    #[test]
    fn locations_banned_in_expressions() {
        let src = "library l datatype stack\nglobal Top init NULL\nmethod push(a) { x = Top + 1; return; }\nmethod pop(a) { return; }";
        assert!(parse_library(src).is_err());
    }

    #[test]
    fn round_trips_through_pretty() {
        // Line numbers shift with formatting, so compare the printed forms:
        // parse ∘ pretty must be the identity on everything else.
        let lib = parse_library(TREIBER).unwrap();
        let printed = pretty(&lib);
        let reparsed = parse_library(&printed).unwrap();
        assert_eq!(pretty(&reparsed), printed);
    }

    #[test]
    fn static_rows_and_field_inits() {
        let src = "library l datatype queue\ntable Node(Val init EMPTY, Next init NULL)\nrow Sentinel of Node\nglobal Head init Sentinel\nmethod enqueue(a) { return; }\nmethod dequeue(a) { return; }";
        let lib = parse_library(src).unwrap();
        assert_eq!(lib.static_rows[0].name, "Sentinel");
        assert_eq!(lib.globals[0].init, InitValue::Row("Sentinel".to_string()));
        assert_eq!(lib.tables[0].fields[0].init, InitValue::Empty);
        let printed = pretty(&lib);
        assert_eq!(pretty(&parse_library(&printed).unwrap()), printed);
    }
}
