//! The constraint groups of the ground encoding.
//!
//! Each group owns its auxiliary declarations and a list of tagged
//! assertions. The tags name the semantic rule a clause implements
//! ("read-rule", "last-writer-wins", ...) and survive into the emitted
//! script as trailing comments, so an unexpected UNSAT core can be read
//! back against the semantics.
//!
//! Invocations whose unroll bound runs out are *pending*: `cmp_i` is false,
//! their store events up to the stuck point stay active, and every
//! spec-level quantifier is relativized to completed invocations. A
//! pending invocation must be the session-order-last of its session — a
//! history slot behind a stuck invocation would never start, and the
//! sweep over smaller bounds already covers that history.

use std::collections::BTreeMap;

use crate::axioms::{axiom_id, AxiomMismatch, AxiomName};
use crate::dsl::Datatype;
use crate::frontend::AtomKind;
use crate::policies::{Policy, PolicyAtom};
use crate::value;

use super::vocab::{lit, EventSlot, SlotKind, Sort, Vocabulary};

#[derive(Debug, Clone)]
pub struct Formula {
    pub tag: &'static str,
    pub text: String,
}

#[derive(Debug)]
pub struct Group {
    pub name: &'static str,
    pub decls: Vec<(String, Sort)>,
    pub formulas: Vec<Formula>,
}

impl Group {
    fn new(name: &'static str) -> Group {
        Group { name, decls: Vec::new(), formulas: Vec::new() }
    }

    fn assert(&mut self, tag: &'static str, text: String) {
        assert!(!tag.is_empty(), "every clause carries a provenance tag");
        self.formulas.push(Formula { tag, text });
    }
}

#[derive(Debug)]
pub struct ConstraintSet {
    pub groups: Vec<Group>,
}

impl ConstraintSet {
    pub fn formula_count(&self) -> usize {
        self.groups.iter().map(|g| g.formulas.len()).sum()
    }
}

fn and(parts: Vec<String>) -> String {
    match parts.len() {
        0 => "true".to_string(),
        1 => parts.into_iter().next().unwrap(),
        _ => format!("(and {})", parts.join(" ")),
    }
}

fn or(parts: Vec<String>) -> String {
    match parts.len() {
        0 => "false".to_string(),
        1 => parts.into_iter().next().unwrap(),
        _ => format!("(or {})", parts.join(" ")),
    }
}

fn imp(a: String, b: String) -> String {
    format!("(=> {a} {b})")
}

fn eq(a: String, b: String) -> String {
    format!("(= {a} {b})")
}

fn not(a: String) -> String {
    format!("(not {a})")
}

/// `e` is an active write or update.
fn iswr(v: &Vocabulary, e: &EventSlot) -> String {
    match e.kind {
        SlotKind::Write => v.act(e.index),
        SlotKind::Cas => {
            format!("(and {} (= {} {}))", v.act(e.index), v.ty(e.index), super::vocab::TY_UPDATE)
        }
        SlotKind::Read => "false".to_string(),
    }
}

/// `e` is an active update (only CAS slots can be).
fn isupd(v: &Vocabulary, e: &EventSlot) -> String {
    iswr(v, e)
}

/// Invocation-level session order restricted to completed invocations:
/// the relation the spec axioms see.
fn soc(v: &Vocabulary, i: usize, j: usize) -> Option<String> {
    if i < j {
        Some(format!("(and {} {} {})", v.soi(i, j), v.cmp(i), v.cmp(j)))
    } else {
        None
    }
}

// -- value domain ----------------------------------------------------------

/// Method, session, and argument ranges, plus the session-symmetry
/// reduction (sessions are named in order of first use) and the rule that
/// only the session-last invocation may be pending.
pub fn encode_value_domain(v: &Vocabulary) -> Group {
    let mut g = Group::new("value-domain");
    let k = v.k;
    for i in 1..=k {
        let dom = if v.methods.len() == 2 {
            format!("(or (= {} 0) (= {} 1))", v.meth(i), v.meth(i))
        } else {
            format!("(= {} 0)", v.meth(i))
        };
        g.assert("method-domain", dom);
    }
    g.assert("session-domain", format!("(= {} 1)", v.sess(1)));
    for i in 1..=k {
        g.assert("session-domain", format!("(and (>= {} 1) (<= {} {}))", v.sess(i), v.sess(i), k));
    }
    g.assert("session-symmetry", eq(v.smax(1), v.sess(1)));
    for i in 2..=k {
        g.assert(
            "session-symmetry",
            eq(
                v.smax(i),
                format!(
                    "(ite (> {} {}) {} {})",
                    v.sess(i),
                    v.smax(i - 1),
                    v.sess(i),
                    v.smax(i - 1)
                ),
            ),
        );
        g.assert("session-symmetry", format!("(<= {} (+ {} 1))", v.sess(i), v.smax(i - 1)));
    }
    for i in 1..=k {
        for j in (i + 1)..=k {
            g.assert("invocation-session-order", eq(v.soi(i, j), eq(v.sess(i), v.sess(j))));
            g.assert("pending-last-only", imp(v.soi(i, j), v.cmp(i)));
        }
    }
    let producer = format!("{}", v.producer_idx);
    let consumer = format!("{}", v.consumer_idx);
    for i in 1..=k {
        g.assert(
            "argument-domain",
            imp(
                eq(v.meth(i), producer.clone()),
                format!("(and (>= {} 1) (<= {} {}))", v.arg(i), v.arg(i), k),
            ),
        );
        if v.producer_idx != v.consumer_idx {
            g.assert(
                "argument-domain",
                imp(eq(v.meth(i), consumer.clone()), eq(v.arg(i), lit(value::BOT))),
            );
        }
    }
    // Added values are pairwise distinct; a violating execution can always
    // be renamed into this form.
    for i in 1..=k {
        for j in (i + 1)..=k {
            g.assert(
                "argument-distinctness",
                imp(
                    format!(
                        "(and (= {} {producer}) (= {} {producer}))",
                        v.meth(i),
                        v.meth(j)
                    ),
                    not(eq(v.arg(i), v.arg(j))),
                ),
            );
        }
    }
    g
}

// -- implementation --------------------------------------------------------

/// Slot index by (invocation, method index, atom index).
fn slot_map(v: &Vocabulary) -> BTreeMap<(usize, usize, usize), usize> {
    v.slots.iter().map(|s| ((s.inv, s.method_idx, s.atom_idx), s.index)).collect()
}

/// The guarded straight-line code of every invocation: one SSA definition
/// per atom, with store interaction routed through the event-slot symbols.
pub fn encode_implementation(v: &Vocabulary) -> Group {
    let mut g = Group::new("implementation");
    let slots = slot_map(v);
    for i in 1..=v.k {
        for (mi, um) in v.unrolled.iter().enumerate() {
            let m = &v.methods[mi];
            let prev_term = |prev: &Option<crate::frontend::SsaVar>| -> String {
                match prev {
                    Some(p) => v.rho(i, m, p),
                    None => lit(value::BOT),
                }
            };
            for a in &um.atoms {
                let guard = and(vec![
                    eq(v.meth(i), mi.to_string()),
                    v.gexpr(&a.guard, i, mi),
                ]);
                match &a.kind {
                    AtomKind::Assign { var, prev, value } => {
                        g.assert(
                            "assign-rule",
                            eq(
                                v.rho(i, m, var),
                                format!(
                                    "(ite {guard} {} {})",
                                    v.gexpr(value, i, mi),
                                    prev_term(prev)
                                ),
                            ),
                        );
                    }
                    AtomKind::Alloc { var, prev, site } => {
                        g.assert(
                            "alloc-rule",
                            eq(
                                v.rho(i, m, var),
                                format!(
                                    "(ite {guard} {} {})",
                                    lit(v.universe.dynamic_row_id(*site, i - 1)),
                                    prev_term(prev)
                                ),
                            ),
                        );
                    }
                    AtomKind::Read { var, prev, loc } => {
                        let e = slots[&(i, mi, a.idx)];
                        g.assert("activation", eq(v.act(e), guard.clone()));
                        g.assert(
                            "read-rule",
                            imp(
                                v.act(e),
                                format!(
                                    "(and (= {} {}) (= {} {}))",
                                    v.ty(e),
                                    super::vocab::TY_READ,
                                    v.loc(e),
                                    v.locterm(loc, i, mi)
                                ),
                            ),
                        );
                        g.assert(
                            "read-rule",
                            eq(
                                v.rho(i, m, var),
                                format!("(ite {} {} {})", v.act(e), v.rv(e), prev_term(prev)),
                            ),
                        );
                    }
                    AtomKind::Write { loc, value } => {
                        let e = slots[&(i, mi, a.idx)];
                        g.assert("activation", eq(v.act(e), guard.clone()));
                        g.assert(
                            "write-rule",
                            imp(
                                v.act(e),
                                format!(
                                    "(and (= {} {}) (= {} {}) (= {} {}))",
                                    v.ty(e),
                                    super::vocab::TY_WRITE,
                                    v.loc(e),
                                    v.locterm(loc, i, mi),
                                    v.wv(e),
                                    v.gexpr(value, i, mi)
                                ),
                            ),
                        );
                    }
                    AtomKind::Cas { var, prev, loc, expect, swap } => {
                        let e = slots[&(i, mi, a.idx)];
                        let hit = eq(v.rv(e), v.gexpr(expect, i, mi));
                        g.assert("activation", eq(v.act(e), guard.clone()));
                        g.assert(
                            "cas-rule",
                            imp(v.act(e), eq(v.loc(e), v.locterm(loc, i, mi))),
                        );
                        g.assert(
                            "cas-success",
                            imp(
                                format!("(and {} {hit})", v.act(e)),
                                format!(
                                    "(and (= {} {}) (= {} {}))",
                                    v.ty(e),
                                    super::vocab::TY_UPDATE,
                                    v.wv(e),
                                    v.gexpr(swap, i, mi)
                                ),
                            ),
                        );
                        g.assert(
                            "cas-failure",
                            imp(
                                format!("(and {} (not {hit}))", v.act(e)),
                                eq(v.ty(e), super::vocab::TY_READ.to_string()),
                            ),
                        );
                        g.assert(
                            "cas-rule",
                            eq(
                                v.rho(i, m, var),
                                format!(
                                    "(ite {} (ite {hit} 1 0) {})",
                                    v.act(e),
                                    prev_term(prev)
                                ),
                            ),
                        );
                    }
                    AtomKind::Return { .. } => {}
                }
            }
        }
    }
    g
}

// -- abstract execution ----------------------------------------------------

/// Ties invocation-level symbols to the implementation: the argument flows
/// into the SSA entry variable, return atoms fix `ret_i`, and `cmp_i` is
/// exactly the method's completion condition.
pub fn encode_abstract_execution(v: &Vocabulary) -> Group {
    let mut g = Group::new("abstract-execution");
    for i in 1..=v.k {
        for (mi, um) in v.unrolled.iter().enumerate() {
            let m = &v.methods[mi];
            let here = eq(v.meth(i), mi.to_string());
            let arg0 = crate::frontend::SsaVar { name: um.arg.clone(), version: 0 };
            g.assert("argument-binding", imp(here.clone(), eq(v.rho(i, m, &arg0), v.arg(i))));
            for a in &um.atoms {
                if let AtomKind::Return { value } = &a.kind {
                    let retv = match value {
                        Some(e) => v.gexpr(e, i, mi),
                        None => lit(value::BOT),
                    };
                    g.assert(
                        "return-rule",
                        imp(
                            format!("(and {here} {})", v.gexpr(&a.guard, i, mi)),
                            eq(v.ret(i), retv),
                        ),
                    );
                }
            }
            g.assert(
                "completion-rule",
                imp(here, eq(v.cmp(i), v.gexpr(&um.completion, i, mi))),
            );
        }
    }
    g
}

// -- store -----------------------------------------------------------------

/// The replicated-store axioms: session order, visibility hygiene,
/// happens-before acyclicity, per-location arbitration, and the read rule
/// (last visible writer wins, initial value when nothing is visible,
/// update atomicity).
pub fn encode_store(v: &Vocabulary) -> Group {
    let mut g = Group::new("store");
    let n = v.slots.len();

    for a in 0..n {
        for b in 0..n {
            if a == b || !v.soe_feasible(a, b) {
                continue;
            }
            let (sa, sb) = (v.slot(a), v.slot(b));
            let mut parts = vec![v.act(a), v.act(b)];
            if sa.inv != sb.inv {
                parts.push(v.soi(sa.inv, sb.inv));
            }
            g.assert("event-session-order", eq(v.soe(a, b), and(parts)));
        }
    }

    for a in 0..n {
        for b in 0..n {
            if a != b {
                g.assert(
                    "vis-active",
                    imp(v.vis(a, b), format!("(and {} {})", v.act(a), v.act(b))),
                );
            }
        }
    }

    // hb = (vis ∪ soe)⁺ by iterated squaring; with 2^stages ≥ n this is the
    // exact closure, since a connecting path never needs more than n-1 edges.
    let stages = v.hb_stages();
    for s in 0..=stages {
        for a in 0..n {
            for b in 0..n {
                if a != b {
                    g.decls.push((v.hb_stage(s, a, b), Sort::Bool));
                }
            }
        }
    }
    for a in 0..n {
        for b in 0..n {
            if a == b {
                continue;
            }
            let base = if v.soe_feasible(a, b) {
                format!("(or {} {})", v.vis(a, b), v.soe(a, b))
            } else {
                v.vis(a, b)
            };
            g.assert("hb-closure", eq(v.hb_stage(0, a, b), base));
        }
    }
    for s in 0..stages {
        for a in 0..n {
            for b in 0..n {
                if a == b {
                    continue;
                }
                let mut parts = vec![v.hb_stage(s, a, b)];
                for c in 0..n {
                    if c != a && c != b {
                        parts.push(format!(
                            "(and {} {})",
                            v.hb_stage(s, a, c),
                            v.hb_stage(s, c, b)
                        ));
                    }
                }
                g.assert("hb-closure", eq(v.hb_stage(s + 1, a, b), or(parts)));
            }
        }
    }
    for a in 0..n {
        for b in (a + 1)..n {
            g.assert("hb-acyclicity", not(format!("(and {} {})", v.hb(a, b), v.hb(b, a))));
        }
    }

    let writes: Vec<&EventSlot> = v.write_slots().collect();
    let reads: Vec<&EventSlot> = v.read_slots().collect();

    for a in &writes {
        for b in &writes {
            if a.index == b.index {
                continue;
            }
            g.assert(
                "arbitration-domain",
                imp(
                    v.ar(a.index, b.index),
                    format!(
                        "(and {} {} (= {} {}))",
                        iswr(v, a),
                        iswr(v, b),
                        v.loc(a.index),
                        v.loc(b.index)
                    ),
                ),
            );
            g.assert(
                "arbitration-causal",
                imp(v.ar(a.index, b.index), not(v.hb(b.index, a.index))),
            );
        }
    }
    for (x, a) in writes.iter().enumerate() {
        for b in writes.iter().skip(x + 1) {
            g.assert(
                "arbitration-total",
                imp(
                    format!(
                        "(and {} {} (= {} {}))",
                        iswr(v, a),
                        iswr(v, b),
                        v.loc(a.index),
                        v.loc(b.index)
                    ),
                    format!("(or {} {})", v.ar(a.index, b.index), v.ar(b.index, a.index)),
                ),
            );
            g.assert(
                "arbitration-total",
                not(format!("(and {} {})", v.ar(a.index, b.index), v.ar(b.index, a.index))),
            );
        }
    }
    for a in &writes {
        for b in &writes {
            for c in &writes {
                if a.index != b.index && b.index != c.index && a.index != c.index {
                    g.assert(
                        "arbitration-transitive",
                        imp(
                            format!(
                                "(and {} {})",
                                v.ar(a.index, b.index),
                                v.ar(b.index, c.index)
                            ),
                            v.ar(a.index, c.index),
                        ),
                    );
                }
            }
        }
    }

    for a in &writes {
        for b in &reads {
            if a.index == b.index {
                continue;
            }
            g.assert(
                "read-from",
                imp(
                    v.rf(a.index, b.index),
                    format!(
                        "(and {} {} {} (= {} {}) (= {} {}))",
                        iswr(v, a),
                        v.act(b.index),
                        v.vis(a.index, b.index),
                        v.loc(a.index),
                        v.loc(b.index),
                        v.wv(a.index),
                        v.rv(b.index)
                    ),
                ),
            );
            // No visible write of the same location may out-arbitrate the
            // source.
            for c in &writes {
                if c.index == a.index || c.index == b.index {
                    continue;
                }
                g.assert(
                    "last-writer-wins",
                    imp(
                        v.rf(a.index, b.index),
                        not(format!(
                            "(and {} {} (= {} {}) {})",
                            iswr(v, c),
                            v.vis(c.index, b.index),
                            v.loc(c.index),
                            v.loc(b.index),
                            v.ar(a.index, c.index)
                        )),
                    ),
                );
            }
        }
    }
    for b in &reads {
        for (x, a) in writes.iter().enumerate() {
            for c in writes.iter().skip(x + 1) {
                if a.index == b.index || c.index == b.index {
                    continue;
                }
                g.assert(
                    "read-from-functional",
                    not(format!(
                        "(and {} {})",
                        v.rf(a.index, b.index),
                        v.rf(c.index, b.index)
                    )),
                );
            }
        }
    }

    for b in &reads {
        g.decls.push((v.anyw(b.index), Sort::Bool));
        let mut parts = Vec::new();
        for c in &writes {
            if c.index == b.index {
                continue;
            }
            parts.push(format!(
                "(and {} {} (= {} {}))",
                iswr(v, c),
                v.vis(c.index, b.index),
                v.loc(c.index),
                v.loc(b.index)
            ));
        }
        g.assert("visible-write", eq(v.anyw(b.index), or(parts)));
        g.assert(
            "initial-read",
            imp(
                format!("(and {} (not {}))", v.act(b.index), v.anyw(b.index)),
                eq(v.rv(b.index), v.initval_ite(&v.loc(b.index))),
            ),
        );
        let sourced = or(writes
            .iter()
            .filter(|a| a.index != b.index)
            .map(|a| v.rf(a.index, b.index))
            .collect());
        g.assert(
            "read-sourced",
            imp(format!("(and {} {})", v.act(b.index), v.anyw(b.index)), sourced),
        );
    }

    // Update atomicity: each write feeds at most one update, and at most
    // one update per location reads the initial value.
    let updates: Vec<&EventSlot> = v.slots.iter().filter(|s| s.kind == SlotKind::Cas).collect();
    for (x, b) in updates.iter().enumerate() {
        for c in updates.iter().skip(x + 1) {
            let both = format!("(and {} {})", isupd(v, b), isupd(v, c));
            for a in &writes {
                if a.index == b.index || a.index == c.index {
                    continue;
                }
                g.assert(
                    "update-exclusivity",
                    not(format!(
                        "(and {both} {} {})",
                        v.rf(a.index, b.index),
                        v.rf(a.index, c.index)
                    )),
                );
            }
            let hasrf = |t: &EventSlot| {
                or(writes
                    .iter()
                    .filter(|a| a.index != t.index)
                    .map(|a| v.rf(a.index, t.index))
                    .collect())
            };
            g.assert(
                "update-exclusivity",
                not(format!(
                    "(and {both} (= {} {}) (not {}) (not {}))",
                    v.loc(b.index),
                    v.loc(c.index),
                    hasrf(b),
                    hasrf(c)
                )),
            );
        }
    }
    g
}

// -- policy ----------------------------------------------------------------

/// Ground closure conditions for every atom the policy implies. Encoding
/// the implied set keeps the clause sets monotone along the lattice.
pub fn encode_policy(v: &Vocabulary, p: &Policy) -> Group {
    let mut g = Group::new("policy");
    let n = v.slots.len();
    let feasible: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| (0..n).map(move |b| (a, b)))
        .filter(|&(a, b)| a != b && v.soe_feasible(a, b))
        .collect();
    for atom in p.implied_atoms() {
        match atom {
            PolicyAtom::Ryw => {
                for &(a, b) in &feasible {
                    g.assert("policy-ryw", imp(v.soe(a, b), v.vis(a, b)));
                }
            }
            PolicyAtom::Mw => {
                for &(a, b) in &feasible {
                    for c in 0..n {
                        if c != a && c != b {
                            g.assert(
                                "policy-mw",
                                imp(
                                    format!("(and {} {})", v.soe(a, b), v.vis(b, c)),
                                    v.vis(a, c),
                                ),
                            );
                        }
                    }
                }
            }
            PolicyAtom::Mr => {
                for &(b, c) in &feasible {
                    for a in 0..n {
                        if a != b && a != c {
                            g.assert(
                                "policy-mr",
                                imp(
                                    format!("(and {} {})", v.vis(a, b), v.soe(b, c)),
                                    v.vis(a, c),
                                ),
                            );
                        }
                    }
                }
            }
            PolicyAtom::Wfr => {
                // vis;soe is materialized as an implication-defined helper:
                // the solver may overapproximate it, which only strengthens
                // the conclusion, and a real execution realizes it exactly.
                let mut declared = std::collections::BTreeSet::new();
                for &(b, c) in &feasible {
                    for a in 0..n {
                        if a == b || a == c {
                            continue;
                        }
                        if declared.insert((a, c)) {
                            g.decls.push((v.visso(a, c), Sort::Bool));
                        }
                        g.assert(
                            "policy-wfr",
                            imp(format!("(and {} {})", v.vis(a, b), v.soe(b, c)), v.visso(a, c)),
                        );
                    }
                }
                for &(a, c) in &declared {
                    for d in 0..n {
                        if d != a && d != c {
                            g.assert(
                                "policy-wfr",
                                imp(
                                    format!("(and {} {})", v.visso(a, c), v.vis(c, d)),
                                    v.vis(a, d),
                                ),
                            );
                        }
                    }
                }
            }
            PolicyAtom::Cv => {
                for a in 0..n {
                    for b in 0..n {
                        for c in 0..n {
                            if a != b && b != c && a != c {
                                g.assert(
                                    "policy-cv",
                                    imp(
                                        format!("(and {} {})", v.hb(a, b), v.vis(b, c)),
                                        v.vis(a, c),
                                    ),
                                );
                            }
                        }
                    }
                }
            }
            PolicyAtom::Cc => {
                for a in 0..n {
                    for b in 0..n {
                        if a != b {
                            g.assert("policy-cc", imp(v.hb(a, b), v.vis(a, b)));
                        }
                    }
                }
            }
        }
    }
    g
}

// -- spec negation ---------------------------------------------------------

/// The invocation-level match relation, its happens-before closure, and
/// the grounded negation of one correctness axiom. Quantifiers over
/// invocations are relativized to completed ones; the formulas mirror the
/// executable axiom checker clause for clause.
pub fn encode_negated_axiom(v: &Vocabulary, name: AxiomName) -> Result<Group, AxiomMismatch> {
    axiom_id(v.datatype, name)?;
    let mut g = Group::new("spec-negation");
    let k = v.k;
    let producer = v.producer_idx.to_string();
    let consumer = v.consumer_idx.to_string();

    for i in 1..=k {
        for j in 1..=k {
            if i != j {
                g.decls.push((v.match_(i, j), Sort::Bool));
            }
        }
    }
    for i in 1..=k {
        for j in 1..=k {
            if i == j {
                continue;
            }
            g.assert(
                "match-definition",
                eq(
                    v.match_(i, j),
                    format!(
                        "(and {} {} (= {} {producer}) (= {} {consumer}) (= {} {}))",
                        v.cmp(i),
                        v.cmp(j),
                        v.meth(i),
                        v.meth(j),
                        v.arg(i),
                        v.ret(j)
                    ),
                ),
            );
        }
    }

    // hbg = (match ∪ so)⁺ over completed invocations; self pairs are kept
    // because the closure of a cyclic base can be reflexive.
    let stages = v.hbg_stages();
    for s in 0..=stages {
        for i in 1..=k {
            for j in 1..=k {
                g.decls.push((v.hbg_stage(s, i, j), Sort::Bool));
            }
        }
    }
    for i in 1..=k {
        for j in 1..=k {
            let mut parts = Vec::new();
            if i != j {
                parts.push(v.match_(i, j));
            }
            if let Some(s) = soc(v, i, j) {
                parts.push(s);
            }
            g.assert("hb-spec-base", eq(v.hbg_stage(0, i, j), or(parts)));
        }
    }
    for s in 0..stages {
        for i in 1..=k {
            for j in 1..=k {
                let mut parts = vec![v.hbg_stage(s, i, j)];
                for c in 1..=k {
                    if c != i && c != j {
                        parts.push(format!(
                            "(and {} {})",
                            v.hbg_stage(s, i, c),
                            v.hbg_stage(s, c, j)
                        ));
                    }
                }
                g.assert("hb-spec-closure", eq(v.hbg_stage(s + 1, i, j), or(parts)));
            }
        }
    }

    let unmatched = |i: usize| -> Vec<String> {
        (1..=k).filter(|&j| j != i).map(|j| not(v.match_(i, j))).collect()
    };

    let mut disjuncts = Vec::new();
    match name {
        AxiomName::AddRem if v.datatype == Datatype::Exchanger => {
            // ∃ completed γ with ret ≠ ⊥ whose return value was nobody's
            // argument.
            for i in 1..=k {
                let mut parts =
                    vec![v.cmp(i), not(eq(v.ret(i), lit(value::BOT)))];
                for j in 1..=k {
                    parts.push(not(format!("(and {} (= {} {}))", v.cmp(j), v.arg(j), v.ret(i))));
                }
                disjuncts.push(and(parts));
            }
        }
        AxiomName::AddRem => {
            for i in 1..=k {
                let mut parts = vec![
                    v.cmp(i),
                    eq(v.meth(i), consumer.clone()),
                    not(eq(v.ret(i), lit(value::EMPTY))),
                ];
                parts.extend((1..=k).filter(|&j| j != i).map(|j| not(v.match_(j, i))));
                disjuncts.push(and(parts));
            }
        }
        AxiomName::Injective if v.datatype == Datatype::Exchanger => {
            for g1 in 1..=k {
                for g2 in 1..=k {
                    for g3 in (g2 + 1)..=k {
                        disjuncts.push(and(vec![
                            v.cmp(g1),
                            v.cmp(g2),
                            v.cmp(g3),
                            eq(v.ret(g2), v.arg(g1)),
                            eq(v.ret(g3), v.arg(g1)),
                        ]));
                    }
                }
            }
        }
        AxiomName::Injective => {
            for g1 in 1..=k {
                for g2 in 1..=k {
                    for g3 in (g2 + 1)..=k {
                        if g1 == g2 || g1 == g3 {
                            continue;
                        }
                        disjuncts
                            .push(format!("(and {} {})", v.match_(g1, g2), v.match_(g1, g3)));
                    }
                }
            }
        }
        AxiomName::EmptySo | AxiomName::EmptyHb => {
            for g1 in 1..=k {
                for g2 in 1..=k {
                    if g1 == g2 {
                        continue;
                    }
                    let ord = if name == AxiomName::EmptySo {
                        match soc(v, g2, g1) {
                            Some(s) => s,
                            None => continue,
                        }
                    } else {
                        v.hbg(g2, g1)
                    };
                    let mut parts = vec![
                        v.cmp(g1),
                        v.cmp(g2),
                        eq(v.meth(g1), consumer.clone()),
                        eq(v.ret(g1), lit(value::EMPTY)),
                        eq(v.meth(g2), producer.clone()),
                        ord,
                    ];
                    parts.extend(unmatched(g2));
                    disjuncts.push(and(parts));
                }
            }
        }
        AxiomName::Lifo1 | AxiomName::Fifo1 => {
            for g1 in 1..=k {
                for g2 in 1..=k {
                    for g3 in 1..=k {
                        if g2 == g3 {
                            continue;
                        }
                        let order = if name == AxiomName::Lifo1 {
                            // push γ1 between the matched push γ2 and pop γ3.
                            vec![v.hbg(g2, g1), v.hbg(g1, g3)]
                        } else {
                            // push γ1 before the matched push γ2.
                            vec![v.hbg(g1, g2)]
                        };
                        let mut parts =
                            vec![v.cmp(g1), eq(v.meth(g1), producer.clone()), v.match_(g2, g3)];
                        parts.extend(order);
                        parts.extend(unmatched(g1));
                        disjuncts.push(and(parts));
                    }
                }
            }
        }
        AxiomName::Lifo2 | AxiomName::Fifo2 => {
            for g1 in 1..=k {
                for g4 in 1..=k {
                    if g1 == g4 {
                        continue;
                    }
                    for g2 in 1..=k {
                        for g3 in 1..=k {
                            if g2 == g3 {
                                continue;
                            }
                            let order = if name == AxiomName::Lifo2 {
                                vec![v.hbg(g2, g1), v.hbg(g3, g4), v.hbg(g1, g3)]
                            } else {
                                vec![v.hbg(g1, g2), v.hbg(g3, g4)]
                            };
                            let mut parts = vec![v.match_(g1, g4), v.match_(g2, g3)];
                            parts.extend(order);
                            disjuncts.push(and(parts));
                        }
                    }
                }
            }
        }
        AxiomName::Exchange => {
            for g1 in 1..=k {
                for g2 in 1..=k {
                    if g1 == g2 {
                        continue;
                    }
                    disjuncts.push(and(vec![
                        v.cmp(g1),
                        v.cmp(g2),
                        eq(v.arg(g1), v.ret(g2)),
                        not(eq(v.ret(g1), v.arg(g2))),
                    ]));
                }
            }
        }
    }
    g.assert("axiom-negation", or(disjuncts));
    Ok(g)
}

/// All groups of a check query, in emission order.
pub fn encode(
    v: &Vocabulary,
    policy: &Policy,
    axiom: AxiomName,
) -> Result<ConstraintSet, AxiomMismatch> {
    Ok(ConstraintSet {
        groups: vec![
            encode_value_domain(v),
            encode_implementation(v),
            encode_abstract_execution(v),
            encode_store(v),
            encode_policy(v, policy),
            encode_negated_axiom(v, axiom)?,
        ],
    })
}
