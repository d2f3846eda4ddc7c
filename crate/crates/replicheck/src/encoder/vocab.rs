//! Symbol vocabulary of the ground encoding.
//!
//! Everything is encoded over integers and booleans so the script stays
//! within QF_LIA. Naming scheme (documented in docs/encoding.md and relied
//! on by the model decoder):
//!
//! | symbol | sort | meaning |
//! |--------|------|---------|
//! | `meth_i`             | Int  | method index of invocation i (1-based i) |
//! | `sess_i`             | Int  | session of invocation i, 1..=k |
//! | `arg_i` / `ret_i`    | Int  | argument / return value |
//! | `cmp_i`              | Bool | invocation completed |
//! | `smax_i`             | Int  | running max of sess_1..sess_i (symmetry) |
//! | `soi_i_j`            | Bool | invocation session order, i < j only |
//! | `rho_i_m_v_n`        | Int  | SSA local v.n of method m in invocation i |
//! | `act_eN` `ty_eN` `loc_eN` `rv_eN` `wv_eN` | per event slot N |
//! | `soe_eA_eB` `vis_eA_eB` `ar_eA_eB` `rf_eA_eB` | event pair relations |
//! | `hbS_eA_eB`, final `hb_eA_eB` | transitive-closure stages |
//! | `match_i_j`, `hbgS_i_j`, final `hbg_i_j` | invocation-level relations |
//!
//! Event types: R = 0, W = 1, U = 2.

use crate::dsl::{Datatype, LibraryDef};
use crate::frontend::{self, AtomKind, GExpr, LocGE, LocationUniverse, SsaVar, UnrolledMethod};
use crate::value;

pub const TY_READ: i64 = 0;
pub const TY_WRITE: i64 = 1;
pub const TY_UPDATE: i64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sort {
    Int,
    Bool,
}

impl Sort {
    pub fn as_str(self) -> &'static str {
        match self {
            Sort::Int => "Int",
            Sort::Bool => "Bool",
        }
    }
}

/// What an event slot can do in the store.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlotKind {
    Read,
    Write,
    Cas,
}

impl SlotKind {
    pub fn reads(self) -> bool {
        matches!(self, SlotKind::Read | SlotKind::Cas)
    }

    pub fn writes(self) -> bool {
        matches!(self, SlotKind::Write | SlotKind::Cas)
    }
}

/// One potential store event: invocation `inv` (1-based), running method
/// `method_idx`, at unrolled atom `atom_idx`.
#[derive(Debug, Clone)]
pub struct EventSlot {
    pub index: usize,
    pub inv: usize,
    pub method_idx: usize,
    pub atom_idx: usize,
    pub src_label: u32,
    pub kind: SlotKind,
}

#[derive(Debug)]
pub struct Vocabulary {
    pub k: usize,
    pub unroll: u32,
    pub datatype: Datatype,
    pub lib_name: String,
    /// API methods: producer first, consumer second when distinct.
    pub methods: Vec<String>,
    pub unrolled: Vec<UnrolledMethod>,
    pub universe: LocationUniverse,
    pub slots: Vec<EventSlot>,
    pub producer_idx: usize,
    pub consumer_idx: usize,
}

impl Vocabulary {
    // -- symbol names ------------------------------------------------------

    pub fn meth(&self, i: usize) -> String {
        format!("meth_{i}")
    }

    pub fn sess(&self, i: usize) -> String {
        format!("sess_{i}")
    }

    pub fn arg(&self, i: usize) -> String {
        format!("arg_{i}")
    }

    pub fn ret(&self, i: usize) -> String {
        format!("ret_{i}")
    }

    pub fn cmp(&self, i: usize) -> String {
        format!("cmp_{i}")
    }

    pub fn smax(&self, i: usize) -> String {
        format!("smax_{i}")
    }

    /// Only defined for i < j.
    pub fn soi(&self, i: usize, j: usize) -> String {
        debug_assert!(i < j);
        format!("soi_{i}_{j}")
    }

    pub fn rho(&self, i: usize, method: &str, v: &SsaVar) -> String {
        format!("rho_{i}_{}_{}_{}", method, v.name, v.version)
    }

    pub fn act(&self, e: usize) -> String {
        format!("act_e{e}")
    }

    pub fn ty(&self, e: usize) -> String {
        format!("ty_e{e}")
    }

    pub fn loc(&self, e: usize) -> String {
        format!("loc_e{e}")
    }

    pub fn rv(&self, e: usize) -> String {
        format!("rv_e{e}")
    }

    pub fn wv(&self, e: usize) -> String {
        format!("wv_e{e}")
    }

    pub fn soe(&self, a: usize, b: usize) -> String {
        format!("soe_e{a}_e{b}")
    }

    pub fn vis(&self, a: usize, b: usize) -> String {
        format!("vis_e{a}_e{b}")
    }

    pub fn ar(&self, a: usize, b: usize) -> String {
        format!("ar_e{a}_e{b}")
    }

    pub fn rf(&self, a: usize, b: usize) -> String {
        format!("rf_e{a}_e{b}")
    }

    pub fn anyw(&self, e: usize) -> String {
        format!("anyw_e{e}")
    }

    pub fn visso(&self, a: usize, b: usize) -> String {
        format!("visso_e{a}_e{b}")
    }

    pub fn hb_stage(&self, stage: usize, a: usize, b: usize) -> String {
        if stage == self.hb_stages() {
            format!("hb_e{a}_e{b}")
        } else {
            format!("hb{stage}_e{a}_e{b}")
        }
    }

    pub fn hb(&self, a: usize, b: usize) -> String {
        self.hb_stage(self.hb_stages(), a, b)
    }

    pub fn match_(&self, i: usize, j: usize) -> String {
        format!("match_{i}_{j}")
    }

    pub fn hbg_stage(&self, stage: usize, i: usize, j: usize) -> String {
        if stage == self.hbg_stages() {
            format!("hbg_{i}_{j}")
        } else {
            format!("hbg{stage}_{i}_{j}")
        }
    }

    pub fn hbg(&self, i: usize, j: usize) -> String {
        self.hbg_stage(self.hbg_stages(), i, j)
    }

    // -- structure ---------------------------------------------------------

    /// Squaring stages so paths up to the event count are covered.
    pub fn hb_stages(&self) -> usize {
        stages_for(self.slots.len())
    }

    pub fn hbg_stages(&self) -> usize {
        stages_for(self.k)
    }

    pub fn unrolled_of(&self, method_idx: usize) -> &UnrolledMethod {
        &self.unrolled[method_idx]
    }

    pub fn slot(&self, e: usize) -> &EventSlot {
        &self.slots[e]
    }

    /// Slots that can hold a write or update.
    pub fn write_slots(&self) -> impl Iterator<Item = &EventSlot> {
        self.slots.iter().filter(|s| s.kind.writes())
    }

    pub fn read_slots(&self) -> impl Iterator<Item = &EventSlot> {
        self.slots.iter().filter(|s| s.kind.reads())
    }

    /// Whether events a→b can ever be in event session order: same
    /// invocation and method in atom order, or an earlier invocation in the
    /// same (symbolic) session.
    pub fn soe_feasible(&self, a: usize, b: usize) -> bool {
        let (sa, sb) = (&self.slots[a], &self.slots[b]);
        if sa.inv == sb.inv {
            sa.method_idx == sb.method_idx && sa.atom_idx < sb.atom_idx
        } else {
            sa.inv < sb.inv
        }
    }

    /// Base declarations, in deterministic order.
    pub fn declarations(&self) -> Vec<(String, Sort)> {
        let mut d = Vec::new();
        for i in 1..=self.k {
            d.push((self.meth(i), Sort::Int));
            d.push((self.sess(i), Sort::Int));
            d.push((self.arg(i), Sort::Int));
            d.push((self.ret(i), Sort::Int));
            d.push((self.cmp(i), Sort::Bool));
            d.push((self.smax(i), Sort::Int));
        }
        for i in 1..=self.k {
            for j in (i + 1)..=self.k {
                d.push((self.soi(i, j), Sort::Bool));
            }
        }
        for i in 1..=self.k {
            for (mi, m) in self.methods.iter().enumerate() {
                for v in ssa_vars(&self.unrolled[mi]) {
                    d.push((self.rho(i, m, &v), Sort::Int));
                }
            }
        }
        for s in &self.slots {
            d.push((self.act(s.index), Sort::Bool));
            d.push((self.ty(s.index), Sort::Int));
            d.push((self.loc(s.index), Sort::Int));
            if s.kind.reads() {
                d.push((self.rv(s.index), Sort::Int));
            }
            if s.kind.writes() {
                d.push((self.wv(s.index), Sort::Int));
            }
        }
        let n = self.slots.len();
        for a in 0..n {
            for b in 0..n {
                if a != b {
                    d.push((self.vis(a, b), Sort::Bool));
                }
                if a != b && self.soe_feasible(a, b) {
                    d.push((self.soe(a, b), Sort::Bool));
                }
            }
        }
        for a in self.write_slots() {
            for b in self.write_slots() {
                if a.index != b.index {
                    d.push((self.ar(a.index, b.index), Sort::Bool));
                }
            }
        }
        for a in self.write_slots() {
            for b in self.read_slots() {
                if a.index != b.index {
                    d.push((self.rf(a.index, b.index), Sort::Bool));
                }
            }
        }
        d
    }

    // -- terms -------------------------------------------------------------

    /// SMT term for a value/guard expression of method `method_idx` inside
    /// invocation `i`. Invocation i occupies slot i-1 of the universe, so
    /// `Row(site)` is a constant.
    pub fn gexpr(&self, e: &GExpr, i: usize, method_idx: usize) -> String {
        use crate::dsl::{BinOp, CmpOp};
        let m = &self.methods[method_idx];
        match e {
            GExpr::Int(n) => lit(*n),
            GExpr::Var(v) => self.rho(i, m, v),
            GExpr::Row(site) => lit(self.universe.dynamic_row_id(*site, i - 1)),
            GExpr::Bin(op, a, b) => {
                let op = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "div",
                };
                format!("({op} {} {})", self.gexpr(a, i, method_idx), self.gexpr(b, i, method_idx))
            }
            GExpr::Cmp(op, a, b) => {
                let (a, b) = (self.gexpr(a, i, method_idx), self.gexpr(b, i, method_idx));
                match op {
                    CmpOp::Lt => format!("(< {a} {b})"),
                    CmpOp::Le => format!("(<= {a} {b})"),
                    CmpOp::Eq => format!("(= {a} {b})"),
                    CmpOp::Ne => format!("(not (= {a} {b}))"),
                    CmpOp::Gt => format!("(> {a} {b})"),
                    CmpOp::Ge => format!("(>= {a} {b})"),
                }
            }
            GExpr::Bool(b) => b.to_string(),
            GExpr::And(a, b) => {
                format!("(and {} {})", self.gexpr(a, i, method_idx), self.gexpr(b, i, method_idx))
            }
            GExpr::Or(a, b) => {
                format!("(or {} {})", self.gexpr(a, i, method_idx), self.gexpr(b, i, method_idx))
            }
            GExpr::Not(a) => format!("(not {})", self.gexpr(a, i, method_idx)),
        }
    }

    /// SMT term for the location an atom addresses.
    pub fn locterm(&self, l: &LocGE, i: usize, method_idx: usize) -> String {
        match l {
            LocGE::Global(idx) => lit(self.universe.global_loc(*idx)),
            LocGE::Field(row, fidx) => {
                let f = self.universe.field_count as i64;
                format!(
                    "(+ (* {} {}) {})",
                    lit(f),
                    self.gexpr(row, i, method_idx),
                    lit(*fidx as i64 + value::FIELD_LOC_OFFSET)
                )
            }
        }
    }

    /// Initial value of a symbolic location: ITE chain over the declared
    /// universe, defaulting to 0.
    pub fn initval_ite(&self, loc_term: &str) -> String {
        let mut out = lit(value::DEFAULT_INIT);
        let entries: Vec<(i64, i64)> = self.universe.initval_entries().collect();
        for (l, v) in entries.into_iter().rev() {
            if v == value::DEFAULT_INIT {
                continue;
            }
            out = format!("(ite (= {loc_term} {}) {} {out})", lit(l), lit(v));
        }
        out
    }
}

/// SMT integer literal (negatives need the unary form).
pub fn lit(n: i64) -> String {
    if n < 0 {
        format!("(- {})", -n)
    } else {
        n.to_string()
    }
}

fn stages_for(n: usize) -> usize {
    // 2^stages ≥ n ⇒ closure exact for path lengths up to n.
    let mut s = 0;
    while (1usize << s) < n.max(1) {
        s += 1;
    }
    s.max(1)
}

/// All SSA variables of a method, deterministically: the argument's version
/// 0, then every atom-defined variable in atom order.
pub fn ssa_vars(um: &UnrolledMethod) -> Vec<SsaVar> {
    let mut out = vec![SsaVar { name: um.arg.clone(), version: 0 }];
    for a in &um.atoms {
        match &a.kind {
            AtomKind::Assign { var, .. }
            | AtomKind::Alloc { var, .. }
            | AtomKind::Read { var, .. }
            | AtomKind::Cas { var, .. } => out.push(var.clone()),
            AtomKind::Write { .. } | AtomKind::Return { .. } => {}
        }
    }
    out
}

/// Builds the vocabulary: one event slot per (invocation, API method,
/// event atom of the unrolled method).
pub fn build_vocabulary(lib: &LibraryDef, k: usize, unroll: u32) -> Vocabulary {
    assert!(k >= 1, "invocation bound must be positive");
    let producer = lib.datatype.producer();
    let consumer = lib.datatype.consumer();
    let mut methods = vec![producer.to_string()];
    if consumer != producer {
        methods.push(consumer.to_string());
    }
    let unrolled: Vec<UnrolledMethod> = methods
        .iter()
        .map(|m| frontend::unroll(lib, lib.method(m).expect("api method exists"), unroll))
        .collect();
    let mut slots = Vec::new();
    for i in 1..=k {
        for (mi, um) in unrolled.iter().enumerate() {
            for a in &um.atoms {
                let kind = match &a.kind {
                    AtomKind::Read { .. } => SlotKind::Read,
                    AtomKind::Write { .. } => SlotKind::Write,
                    AtomKind::Cas { .. } => SlotKind::Cas,
                    _ => continue,
                };
                slots.push(EventSlot {
                    index: slots.len(),
                    inv: i,
                    method_idx: mi,
                    atom_idx: a.idx,
                    src_label: a.src_label.unwrap_or(0),
                    kind,
                });
            }
        }
    }
    let consumer_idx = if methods.len() == 2 { 1 } else { 0 };
    Vocabulary {
        k,
        unroll,
        datatype: lib.datatype,
        lib_name: lib.name.clone(),
        methods,
        unrolled,
        universe: frontend::location_universe(lib, k),
        slots,
        producer_idx: 0,
        consumer_idx,
    }
}
