//! Exhaustive enumeration of the abstract executions a history admits —
//! the ground-truth oracle the symbolic pipeline is compared against.
//!
//! Runs over the *unrolled* atoms (same bound as the encoding, so both
//! sides mean the same thing by "bounded execution"). Instead of branching
//! on arbitrary visible sets Σ′, each read/update branches on its
//! reads-from source and each write/update on its arbitration position; the
//! event's visibility is then the least policy-closed extension of the rf
//! edge. This is complete for abstract executions: a read's return value is
//! determined by its rf source alone, every validity check (acyclicity,
//! causal arbitration, rf-maximality) only gets harder with more vis edges,
//! and policy forcing of a closed prefix can only add edges into the newest
//! event. So any α realizable with some Σ′ is realizable with the minimal
//! one.
//!
//! An invocation that exhausts the unroll bound is *pending*: its events
//! (the full stuck path) stay in the store, it contributes no record to α,
//! and its session runs nothing further — mirroring the encoding, where
//! such paths set `completed` false but keep their events active.
//!
//! States reached by different interleavings of the same per-session
//! prefixes are identical once events are named by (invocation slot, atom
//! index); a visited set over that canonical form collapses the
//! interleaving tree into a DAG.

use super::alpha::{AbstractExecution, Invocation};
use super::machine::History;
use super::{RfSource, StoreState};
use crate::dsl::LibraryDef;
use crate::frontend::{self, Atom, AtomKind, GExpr, LocGE, LocationUniverse, UnrolledMethod};
use crate::policies::Policy;
use crate::value;
use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EnumerateError {
    #[error("event cap {0} exceeded; lower the unroll bound or raise the cap")]
    EventCapExceeded(usize),
    #[error("history invokes unknown method `{0}`")]
    UnknownMethod(String),
}

#[derive(Debug)]
pub struct EnumerationOutcome {
    /// Distinct abstract executions, sorted by canonical key.
    pub alphas: Vec<AbstractExecution>,
    /// Completed executions visited (leaves, before deduplication).
    pub executions: usize,
    /// Distinct canonical states expanded.
    pub states: usize,
}

impl EnumerationOutcome {
    pub fn canonical_keys(&self) -> Vec<Vec<(usize, String, i64, i64)>> {
        self.alphas.iter().map(|a| a.canonical_key()).collect()
    }
}

/// Enumerates every abstract execution of `history` under `policy`, with
/// loops unrolled `unroll_bound` times and at most `event_cap` events.
pub fn enumerate_executions(
    lib: &LibraryDef,
    history: &History,
    policy: &Policy,
    unroll_bound: u32,
    event_cap: usize,
) -> Result<EnumerationOutcome, EnumerateError> {
    let mut unrolled: HashMap<String, UnrolledMethod> = HashMap::new();
    for invs in &history.sessions {
        for spec in invs {
            if !unrolled.contains_key(&spec.method) {
                let m = lib
                    .method(&spec.method)
                    .ok_or_else(|| EnumerateError::UnknownMethod(spec.method.clone()))?;
                unrolled.insert(spec.method.clone(), frontend::unroll(lib, m, unroll_bound));
            }
        }
    }
    let k = history.invocation_count().max(1);
    let mut e = Enumerator {
        universe: frontend::location_universe(lib, k),
        policy: policy.clone(),
        unrolled,
        history,
        cap: event_cap,
        seen: HashSet::new(),
        alphas: BTreeMap::new(),
        executions: 0,
        states: 0,
    };
    let root = Node {
        sessions: (0..history.sessions.len())
            .map(|_| SessState {
                inv_idx: 0,
                atom_idx: 0,
                env: HashMap::new(),
                ret: None,
                entered: false,
                halted: false,
            })
            .collect(),
        store: StoreState::new(),
        stable: Vec::new(),
        finished: Vec::new(),
    };
    e.dfs(root)?;
    let mut alphas: Vec<AbstractExecution> = e.alphas.into_values().collect();
    alphas.sort_by_key(|a| a.canonical_key());
    Ok(EnumerationOutcome { alphas, executions: e.executions, states: e.states })
}

#[derive(Clone)]
struct SessState {
    inv_idx: usize,
    atom_idx: usize,
    env: HashMap<(String, u32), i64>,
    ret: Option<i64>,
    /// Whether the argument binding for the current invocation happened.
    entered: bool,
    /// The current invocation is pending (unroll bound exhausted); the
    /// session runs nothing further.
    halted: bool,
}

#[derive(Clone)]
struct Node {
    sessions: Vec<SessState>,
    store: StoreState,
    /// Per event id: (invocation slot, atom index) — the interleaving-
    /// invariant event name used for canonicalization.
    stable: Vec<(usize, usize)>,
    /// Completed invocations, kept sorted by slot.
    finished: Vec<Invocation>,
}

enum Poise {
    Done,
    Event(Atom),
}

struct Enumerator<'a> {
    universe: LocationUniverse,
    policy: Policy,
    unrolled: HashMap<String, UnrolledMethod>,
    history: &'a History,
    cap: usize,
    seen: HashSet<String>,
    alphas: BTreeMap<Vec<(usize, String, i64, i64)>, AbstractExecution>,
    executions: usize,
    states: usize,
}

impl Enumerator<'_> {
    fn dfs(&mut self, mut node: Node) -> Result<(), EnumerateError> {
        // Silent atoms commute across sessions: drain them all first.
        let mut poises = Vec::with_capacity(node.sessions.len());
        for s in 0..node.sessions.len() {
            poises.push(self.drain(&mut node, s));
        }
        if poises.iter().all(|p| matches!(p, Poise::Done)) {
            self.executions += 1;
            let mut alpha =
                AbstractExecution { invocations: node.finished.clone(), so: Vec::new() };
            alpha.derive_so();
            self.alphas.entry(alpha.canonical_key()).or_insert(alpha);
            return Ok(());
        }
        if !self.seen.insert(self.fingerprint(&node)) {
            return Ok(());
        }
        self.states += 1;

        for (s, poise) in poises.iter().enumerate() {
            let Poise::Event(atom) = poise else { continue };
            if node.store.events.len() >= self.cap {
                return Err(EnumerateError::EventCapExceeded(self.cap));
            }
            let slot = self.history.sessions[s][node.sessions[s].inv_idx].slot;
            let env = &node.sessions[s].env;
            let label = atom.src_label.unwrap_or(0);
            match &atom.kind {
                AtomKind::Read { var, loc, .. } => {
                    let loc = self.eval_loc(loc, env, slot);
                    let initval = self.universe.initval(loc);
                    for source in self.rf_choices(&node.store, loc) {
                        let mut n = node.clone();
                        let visible = rf_edge(&source);
                        let Ok((id, val)) = n.store.create_read(s, slot, label, loc, &visible, initval)
                        else {
                            continue;
                        };
                        if !self.finish_event(&mut n, s, id, atom.idx, slot, loc, &source) {
                            continue;
                        }
                        set_var(&mut n.sessions[s], var, val);
                        n.sessions[s].atom_idx = atom.idx + 1;
                        self.dfs(n)?;
                    }
                }
                AtomKind::Write { loc, value } => {
                    let loc = self.eval_loc(loc, env, slot);
                    let val = eval_int(value, env, &self.universe, slot);
                    for pos in 0..=node.store.ar_order(loc).len() {
                        let mut n = node.clone();
                        let Ok(id) = n.store.create_write(s, slot, label, loc, val, &[], pos)
                        else {
                            continue;
                        };
                        if !self.finish_event(&mut n, s, id, atom.idx, slot, loc, &None) {
                            continue;
                        }
                        n.sessions[s].atom_idx = atom.idx + 1;
                        self.dfs(n)?;
                    }
                }
                AtomKind::Cas { var, loc, expect, swap, .. } => {
                    let loc = self.eval_loc(loc, env, slot);
                    let expect = eval_int(expect, env, &self.universe, slot);
                    let swap = eval_int(swap, env, &self.universe, slot);
                    let initval = self.universe.initval(loc);
                    for source in self.rf_choices(&node.store, loc) {
                        let read_val = match &source {
                            Some(w) => node.store.events[*w].action.written().unwrap(),
                            None => initval,
                        };
                        let visible = rf_edge(&source);
                        if read_val == expect {
                            // R-CAS: an update at every arbitration position.
                            for pos in 0..=node.store.ar_order(loc).len() {
                                let mut n = node.clone();
                                let Ok(id) = n.store.create_update(
                                    s, slot, label, loc, read_val, swap, &visible, pos,
                                ) else {
                                    continue; // update exclusivity
                                };
                                if !self.finish_event(&mut n, s, id, atom.idx, slot, loc, &source) {
                                    continue;
                                }
                                set_var(&mut n.sessions[s], var, 1);
                                n.sessions[s].atom_idx = atom.idx + 1;
                                self.dfs(n)?;
                            }
                        } else {
                            // Failed CAS is a plain read.
                            let mut n = node.clone();
                            let Ok((id, _)) =
                                n.store.create_read(s, slot, label, loc, &visible, initval)
                            else {
                                continue;
                            };
                            if !self.finish_event(&mut n, s, id, atom.idx, slot, loc, &source) {
                                continue;
                            }
                            set_var(&mut n.sessions[s], var, 0);
                            n.sessions[s].atom_idx = atom.idx + 1;
                            self.dfs(n)?;
                        }
                    }
                }
                _ => unreachable!("drain stops only at event atoms"),
            }
        }
        Ok(())
    }

    /// Reads-from choices at `loc`: the virtual initial write plus every
    /// existing same-location write.
    fn rf_choices(&self, store: &StoreState, loc: i64) -> Vec<Option<usize>> {
        let mut out: Vec<Option<usize>> = vec![None];
        out.extend(store.ar_order(loc).iter().map(|w| Some(*w)));
        out
    }

    /// Closes visibility under the policy, then validates the new event:
    /// the chosen rf source must still be the arbitration-maximal visible
    /// write (forcing may have pulled in a later one), and the structural
    /// invariants must hold. Returns false to prune.
    fn finish_event(
        &self,
        n: &mut Node,
        _session: usize,
        id: usize,
        atom_idx: usize,
        slot: usize,
        loc: i64,
        source: &Option<usize>,
    ) -> bool {
        n.stable.push((slot, atom_idx));
        n.store.close_vis_under(&self.policy);
        let reads = n.store.rf_source(id).is_some();
        if reads && n.store.winning_visible_write(loc, id) != *source {
            return false;
        }
        n.store.check_invariants(&self.policy).is_ok()
    }

    fn eval_loc(&self, l: &LocGE, env: &HashMap<(String, u32), i64>, slot: usize) -> i64 {
        match l {
            LocGE::Global(idx) => self.universe.global_loc(*idx),
            LocGE::Field(row, fidx) => {
                let row = eval_int(row, env, &self.universe, slot);
                self.universe.field_loc(row, *fidx)
            }
        }
    }

    /// Advances session `s` through silent atoms and invocation boundaries.
    fn drain(&self, node: &mut Node, s: usize) -> Poise {
        loop {
            let ss = &mut node.sessions[s];
            if ss.halted {
                return Poise::Done;
            }
            let Some(spec) = self.history.sessions[s].get(ss.inv_idx) else {
                return Poise::Done;
            };
            let um = &self.unrolled[&spec.method];
            if !ss.entered {
                ss.env.clear();
                ss.env.insert((um.arg.clone(), 0), spec.arg);
                ss.ret = None;
                ss.entered = true;
            }
            let Some(atom) = um.atoms.get(ss.atom_idx) else {
                // Invocation boundary: completed iff some return fired;
                // otherwise the invocation is pending and the session halts.
                let Some(ret) = ss.ret else {
                    ss.halted = true;
                    return Poise::Done;
                };
                let inv = Invocation {
                    id: spec.slot,
                    method: spec.method.clone(),
                    arg: spec.arg,
                    ret,
                    session: s,
                };
                ss.inv_idx += 1;
                ss.atom_idx = 0;
                ss.entered = false;
                let at = node.finished.partition_point(|i| i.id < inv.id);
                node.finished.insert(at, inv);
                continue;
            };
            let live = eval_bool(&atom.guard, &ss.env, &self.universe, spec.slot);
            if live && atom.kind.is_event() {
                return Poise::Event(atom.clone());
            }
            match &atom.kind {
                AtomKind::Assign { var, prev, value } => {
                    let v = if live {
                        eval_int(value, &ss.env, &self.universe, spec.slot)
                    } else {
                        prev_val(&ss.env, prev)
                    };
                    ss.env.insert((var.name.clone(), var.version), v);
                }
                AtomKind::Alloc { var, prev, site } => {
                    let v = if live {
                        self.universe.dynamic_row_id(*site, spec.slot)
                    } else {
                        prev_val(&ss.env, prev)
                    };
                    ss.env.insert((var.name.clone(), var.version), v);
                }
                AtomKind::Return { value } => {
                    if live {
                        let ret = value
                            .as_ref()
                            .map(|e| eval_int(e, &ss.env, &self.universe, spec.slot))
                            .unwrap_or(value::BOT);
                        ss.ret = Some(ret);
                    }
                }
                // Skipped events still merge their variable via prev.
                AtomKind::Read { var, prev, .. } | AtomKind::Cas { var, prev, .. } => {
                    debug_assert!(!live);
                    let v = prev_val(&ss.env, prev);
                    ss.env.insert((var.name.clone(), var.version), v);
                }
                AtomKind::Write { .. } => debug_assert!(!live),
            }
            ss.atom_idx += 1;
        }
    }

    /// Canonical state form, invariant under reordering of already-created
    /// independent events.
    fn fingerprint(&self, node: &Node) -> String {
        let name = |id: usize| node.stable[id];
        let mut s = String::new();
        for (i, ss) in node.sessions.iter().enumerate() {
            let _ = write!(s, "S{i}@{}.{}r{:?}h{}[", ss.inv_idx, ss.atom_idx, ss.ret, ss.halted);
            let mut env: Vec<_> = ss.env.iter().collect();
            env.sort();
            for ((n, v), val) in env {
                let _ = write!(s, "{n}.{v}={val},");
            }
            s.push(']');
        }
        s.push('|');
        for inv in &node.finished {
            let _ = write!(s, "{}:{}({})={}@{};", inv.id, inv.method, inv.arg, inv.ret, inv.session);
        }
        s.push('|');
        let mut order: Vec<usize> = (0..node.store.events.len()).collect();
        order.sort_by_key(|&e| name(e));
        for e in &order {
            let ev = &node.store.events[*e];
            let _ = write!(s, "{:?}{:?};", name(*e), ev.action);
        }
        s.push('|');
        let mut vis: Vec<_> = node.store.vis().pairs().map(|(a, b)| (name(a), name(b))).collect();
        vis.sort();
        let _ = write!(s, "{vis:?}|");
        let mut locs: Vec<i64> = node
            .store
            .events
            .iter()
            .map(|e| e.action.loc())
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .collect();
        locs.sort_unstable();
        for l in locs {
            let order: Vec<_> = node.store.ar_order(l).iter().map(|&e| name(e)).collect();
            let _ = write!(s, "{l}:{order:?};");
        }
        s.push('|');
        let mut rfs: Vec<_> = (0..node.store.events.len())
            .filter_map(|e| {
                node.store.rf_source(e).map(|src| {
                    let src = match src {
                        RfSource::Initial => None,
                        RfSource::Event(w) => Some(name(w)),
                    };
                    (name(e), src)
                })
            })
            .collect();
        rfs.sort();
        let _ = write!(s, "{rfs:?}");
        s
    }
}

fn rf_edge(source: &Option<usize>) -> Vec<usize> {
    source.iter().copied().collect()
}

fn set_var(ss: &mut SessState, var: &frontend::SsaVar, val: i64) {
    ss.env.insert((var.name.clone(), var.version), val);
}

fn prev_val(env: &HashMap<(String, u32), i64>, prev: &Option<frontend::SsaVar>) -> i64 {
    match prev {
        Some(p) => *env.get(&(p.name.clone(), p.version)).unwrap_or(&value::BOT),
        None => value::BOT,
    }
}

fn eval_int(
    e: &GExpr,
    env: &HashMap<(String, u32), i64>,
    universe: &LocationUniverse,
    slot: usize,
) -> i64 {
    use crate::dsl::BinOp;
    match e {
        GExpr::Int(n) => *n,
        GExpr::Var(v) => *env.get(&(v.name.clone(), v.version)).unwrap_or(&value::BOT),
        GExpr::Row(site) => universe.dynamic_row_id(*site, slot),
        GExpr::Bin(op, a, b) => {
            let (x, y) = (eval_int(a, env, universe, slot), eval_int(b, env, universe, slot));
            match op {
                BinOp::Add => x.wrapping_add(y),
                BinOp::Sub => x.wrapping_sub(y),
                BinOp::Mul => x.wrapping_mul(y),
                BinOp::Div => x.checked_div(y).unwrap_or(0),
            }
        }
        GExpr::Bool(_) | GExpr::Cmp(..) | GExpr::And(..) | GExpr::Or(..) | GExpr::Not(_) => {
            i64::from(eval_bool(e, env, universe, slot))
        }
    }
}

fn eval_bool(
    e: &GExpr,
    env: &HashMap<(String, u32), i64>,
    universe: &LocationUniverse,
    slot: usize,
) -> bool {
    use crate::dsl::CmpOp;
    match e {
        GExpr::Bool(b) => *b,
        GExpr::Cmp(op, a, b) => {
            let (x, y) = (eval_int(a, env, universe, slot), eval_int(b, env, universe, slot));
            match op {
                CmpOp::Lt => x < y,
                CmpOp::Le => x <= y,
                CmpOp::Eq => x == y,
                CmpOp::Ne => x != y,
                CmpOp::Gt => x > y,
                CmpOp::Ge => x >= y,
            }
        }
        GExpr::And(a, b) => {
            eval_bool(a, env, universe, slot) && eval_bool(b, env, universe, slot)
        }
        GExpr::Or(a, b) => eval_bool(a, env, universe, slot) || eval_bool(b, env, universe, slot),
        GExpr::Not(a) => !eval_bool(a, env, universe, slot),
        GExpr::Int(_) | GExpr::Var(_) | GExpr::Row(_) | GExpr::Bin(..) => {
            eval_int(e, env, universe, slot) != 0
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_library as parse;
    use crate::samples;

    fn treiber() -> LibraryDef {
        parse(samples::TREIBER).unwrap()
    }

    fn rets(out: &EnumerationOutcome, method: &str) -> Vec<i64> {
        let mut v: Vec<i64> = out
            .alphas
            .iter()
            .flat_map(|a| a.invocations.iter().filter(|i| i.method == method).map(|i| i.ret))
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .collect();
        v.sort_unstable();
        v
    }

    #[test]
    fn concurrent_push_pop_under_ec() {
        // [DERIVED] s1:push(1) ∥ s2:pop — the pop may miss the push
        // (EMPTY), take it (1), or observe the Top update without the Val
        // write and return Val's initial value 0 (the weak-consistency bug
        // this tool exists to find).
        let lib = treiber();
        let h = History::from_rows(&[(0, "push", 1), (1, "pop", value::BOT)]);
        let out = enumerate_executions(&lib, &h, &Policy::EC, 2, 12).unwrap();
        assert_eq!(rets(&out, "pop"), vec![value::EMPTY, 0, 1]);
        assert!(out.executions >= 3);
    }

    #[test]
    fn same_session_pop_respects_ryw() {
        // [DERIVED] s1: push(1); pop — under RYW the pop must see all of
        // its own session's writes, so only 1 is possible; under EC it can
        // also miss the push (EMPTY) or see Top without Val (0).
        let lib = treiber();
        let h = History::from_rows(&[(0, "push", 1), (0, "pop", value::BOT)]);
        let ec = enumerate_executions(&lib, &h, &Policy::EC, 2, 12).unwrap();
        assert_eq!(rets(&ec, "pop"), vec![value::EMPTY, 0, 1]);
        let ryw = enumerate_executions(&lib, &h, &Policy::parse("ryw").unwrap(), 2, 12).unwrap();
        assert_eq!(rets(&ryw, "pop"), vec![1]);
    }

    #[test]
    fn two_pops_cannot_take_one_push_twice() {
        // [DERIVED] update exclusivity: s1:push(1) ∥ s2:pop ∥ s3:pop never
        // yields two pops both returning 1.
        let lib = treiber();
        let h = History::from_rows(&[
            (0, "push", 1),
            (1, "pop", value::BOT),
            (2, "pop", value::BOT),
        ]);
        // Unroll bound 1 keeps the worst-case event count within the cap.
        let out = enumerate_executions(&lib, &h, &Policy::EC, 1, 12).unwrap();
        assert!(!out.alphas.is_empty());
        for a in &out.alphas {
            let ones =
                a.invocations.iter().filter(|i| i.method == "pop" && i.ret == 1).count();
            assert!(ones <= 1, "push(1) consumed twice in {:?}", a.invocations);
        }
    }

    #[test]
    fn event_cap_is_enforced() {
        let lib = treiber();
        let h = History::from_rows(&[(0, "push", 1), (1, "pop", value::BOT)]);
        let err = enumerate_executions(&lib, &h, &Policy::EC, 2, 3).unwrap_err();
        assert!(matches!(err, EnumerateError::EventCapExceeded(3)));
    }

    #[test]
    fn enumeration_is_deterministic() {
        let lib = treiber();
        let h = History::from_rows(&[(0, "push", 1), (1, "pop", value::BOT)]);
        let a = enumerate_executions(&lib, &h, &Policy::EC, 2, 12).unwrap();
        let b = enumerate_executions(&lib, &h, &Policy::EC, 2, 12).unwrap();
        assert_eq!(a.canonical_keys(), b.canonical_keys());
        assert_eq!(a.executions, b.executions);
        assert_eq!(a.states, b.states);
    }
}
