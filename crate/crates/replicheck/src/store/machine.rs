//! One-rule-at-a-time interpreter over the original (unbounded) method
//! bodies, and schedule-driven replay.
//!
//! Steps come in two flavors. Silent steps (invoke, local assignment,
//! allocation, branch evaluation, loop evaluation, return) touch only one
//! session's local state and commute across sessions. Event steps create a
//! store event and carry the scheduler's choices: the visible set Σ′ and,
//! for writes/updates, the arbitration insertion position. The policy is
//! re-checked after every event step.

use super::alpha::{AbstractExecution, Invocation};
use super::{StoreError, StoreState};
use crate::dsl::*;
use crate::frontend;
use crate::frontend::LocationUniverse;
use crate::policies::Policy;
use crate::value;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvocationSpec {
    pub method: String,
    /// ⊥ for methods invoked without a value.
    pub arg: i64,
    /// Global invocation slot; determines which pre-instantiated rows the
    /// invocation's allocations bind.
    pub slot: usize,
}

/// Per-session invocation sequences.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct History {
    pub sessions: Vec<Vec<InvocationSpec>>,
}

impl History {
    /// Builds a history from (session, method, arg) triples, assigning
    /// slots in session-major order.
    pub fn from_rows(rows: &[(usize, &str, i64)]) -> History {
        let nsessions = rows.iter().map(|(s, _, _)| s + 1).max().unwrap_or(0);
        let mut sessions = vec![Vec::new(); nsessions];
        let mut slot = 0;
        for (s, row) in sessions.iter_mut().enumerate() {
            for (rs, m, a) in rows {
                if *rs == s {
                    row.push(InvocationSpec { method: m.to_string(), arg: *a, slot });
                    slot += 1;
                }
            }
        }
        History { sessions }
    }

    /// Parses `"s1:push(1),pop;s2:pop"`.
    pub fn parse(text: &str) -> Result<History, String> {
        let mut rows: Vec<(usize, String, i64)> = Vec::new();
        for part in text.split(';').filter(|p| !p.trim().is_empty()) {
            let (sess, calls) = part
                .split_once(':')
                .ok_or_else(|| format!("missing `session:` prefix in `{part}`"))?;
            let sess = sess.trim().trim_start_matches('s');
            let sess: usize = sess
                .parse::<usize>()
                .map_err(|_| format!("bad session id `{sess}`"))?
                .checked_sub(1)
                .ok_or("session ids start at 1")?;
            for call in calls.split(',').filter(|c| !c.trim().is_empty()) {
                let call = call.trim();
                let (name, arg) = match call.split_once('(') {
                    Some((name, rest)) => {
                        let arg = rest
                            .trim_end_matches(')')
                            .trim()
                            .parse::<i64>()
                            .map_err(|_| format!("bad argument in `{call}`"))?;
                        (name.trim().to_string(), arg)
                    }
                    None => (call.to_string(), value::BOT),
                };
                rows.push((sess, name, arg));
            }
        }
        let borrowed: Vec<(usize, &str, i64)> =
            rows.iter().map(|(s, m, a)| (*s, m.as_str(), *a)).collect();
        Ok(History::from_rows(&borrowed))
    }

    pub fn invocation_count(&self) -> usize {
        self.sessions.iter().map(|s| s.len()).sum()
    }

    /// Invocations paired with their session, in slot order.
    pub fn slots(&self) -> Vec<(usize, &InvocationSpec)> {
        let mut out: Vec<(usize, &InvocationSpec)> = self
            .sessions
            .iter()
            .enumerate()
            .flat_map(|(s, invs)| invs.iter().map(move |i| (s, i)))
            .collect();
        out.sort_by_key(|(_, i)| i.slot);
        out
    }
}

/// One scheduler decision.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StepChoice {
    /// Fire the session's next silent rule.
    Silent { session: usize },
    /// Fire the session's next event rule with the given Σ′ (event ids) and
    /// arbitration position (writes and successful CAS; ignored otherwise).
    Event {
        session: usize,
        visible: Vec<usize>,
        #[serde(default)]
        ar_pos: Option<usize>,
    },
}

pub type Schedule = Vec<StepChoice>;

#[derive(Debug, Error)]
pub enum StepError {
    #[error("session {0} is blocked (no runnable work)")]
    Blocked(usize),
    #[error("session {session}: expected a silent step, next statement is an event")]
    ExpectedSilent { session: usize },
    #[error("session {session}: expected an event step, next rule is silent")]
    ExpectedEvent { session: usize },
    #[error("history invokes unknown method `{0}`")]
    UnknownMethod(String),
    #[error("store rule failed: {0}")]
    Store(#[from] StoreError),
    #[error("runaway silent loop in session {0}")]
    SilentLoop(usize),
}

/// A block of statements still to execute.
#[derive(Debug, Clone)]
struct Frame {
    stmts: Vec<Stmt>,
    next: usize,
}

#[derive(Debug, Clone)]
struct SessionRt {
    pending: Vec<InvocationSpec>,
    next_pending: usize,
    current: Option<InvRt>,
}

#[derive(Debug, Clone)]
struct InvRt {
    spec: InvocationSpec,
    frames: Vec<Frame>,
    locals: HashMap<String, i64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoisedAt {
    Silent,
    Event,
}

pub struct MachineState<'a> {
    lib: &'a LibraryDef,
    pub universe: LocationUniverse,
    policy: Policy,
    sites_by_label: HashMap<u32, usize>,
    sessions: Vec<SessionRt>,
    pub store: StoreState,
    pub alpha: AbstractExecution,
}

impl<'a> MachineState<'a> {
    pub fn new(lib: &'a LibraryDef, history: &History, policy: Policy) -> MachineState<'a> {
        let k = history.invocation_count().max(1);
        MachineState {
            lib,
            universe: frontend::location_universe(lib, k),
            policy,
            sites_by_label: frontend::alloc_sites_by_label(lib),
            sessions: history
                .sessions
                .iter()
                .map(|invs| SessionRt { pending: invs.clone(), next_pending: 0, current: None })
                .collect(),
            store: StoreState::new(),
            alpha: AbstractExecution::default(),
        }
    }

    pub fn session_count(&self) -> usize {
        self.sessions.len()
    }

    /// What kind of step the session can take next; None = finished.
    pub fn poised(&self, session: usize) -> Option<PoisedAt> {
        let rt = self.sessions.get(session)?;
        match &rt.current {
            None => (rt.next_pending < rt.pending.len()).then_some(PoisedAt::Silent),
            Some(inv) => match next_stmt(inv) {
                None => Some(PoisedAt::Silent), // implicit bare return
                Some(s) => match s.kind {
                    StmtKind::Read(..) | StmtKind::Write(..) | StmtKind::Cas(..) => {
                        Some(PoisedAt::Event)
                    }
                    _ => Some(PoisedAt::Silent),
                },
            },
        }
    }

    pub fn all_done(&self) -> bool {
        (0..self.sessions.len()).all(|s| self.poised(s).is_none())
    }

    pub fn step(&mut self, choice: &StepChoice) -> Result<Option<usize>, StepError> {
        match choice {
            StepChoice::Silent { session } => {
                self.step_silent(*session)?;
                Ok(None)
            }
            StepChoice::Event { session, visible, ar_pos } => {
                let id = self.step_event(*session, visible, *ar_pos)?;
                self.store.check_invariants(&self.policy)?;
                Ok(Some(id))
            }
        }
    }

    pub fn step_silent(&mut self, session: usize) -> Result<(), StepError> {
        match self.poised(session) {
            None => return Err(StepError::Blocked(session)),
            Some(PoisedAt::Event) => return Err(StepError::ExpectedEvent { session }),
            Some(PoisedAt::Silent) => {}
        }
        let lib = self.lib;
        let rt = &mut self.sessions[session];
        let Some(inv) = &mut rt.current else {
            // L-Invoke: bind the argument and push the body.
            let spec = rt.pending[rt.next_pending].clone();
            rt.next_pending += 1;
            let method = lib
                .method(&spec.method)
                .ok_or_else(|| StepError::UnknownMethod(spec.method.clone()))?;
            let mut locals = HashMap::new();
            locals.insert(method.arg.clone(), spec.arg);
            rt.current = Some(InvRt {
                spec,
                frames: vec![Frame { stmts: method.body.clone(), next: 0 }],
                locals,
            });
            return Ok(());
        };

        let Some(stmt) = next_stmt_cloned(inv) else {
            // L-Return (implicit): falling off the end returns ⊥.
            self.finish_invocation(session, value::BOT);
            return Ok(());
        };
        match stmt.kind {
            StmtKind::Assign(v, e) => {
                let val = eval(&e, &inv.locals);
                advance(inv);
                inv.locals.insert(v, val);
            }
            StmtKind::Alloc(v, _table) => {
                let site = self.sites_by_label[&stmt.label.unwrap()];
                let row = self.universe.dynamic_row_id(site, inv.spec.slot);
                advance(inv);
                inv.locals.insert(v, row);
            }
            StmtKind::If(b, then, els) => {
                let cond = eval_bool(&b, &inv.locals);
                advance(inv);
                let block = if cond { then } else { els };
                inv.frames.push(Frame { stmts: block, next: 0 });
            }
            StmtKind::While(b, body) => {
                // L-While-True pushes the body and keeps the loop queued;
                // L-While-False advances past it.
                if eval_bool(&b, &inv.locals) {
                    inv.frames.push(Frame { stmts: body, next: 0 });
                } else {
                    advance(inv);
                }
            }
            StmtKind::Return(e) => {
                let ret = e.map(|e| eval(&e, &inv.locals)).unwrap_or(value::BOT);
                self.finish_invocation(session, ret);
            }
            StmtKind::Read(..) | StmtKind::Write(..) | StmtKind::Cas(..) => unreachable!(),
        }
        Ok(())
    }

    fn finish_invocation(&mut self, session: usize, ret: i64) {
        let rt = &mut self.sessions[session];
        let inv = rt.current.as_ref().unwrap();
        self.alpha.invocations.push(Invocation {
            id: inv.spec.slot,
            method: inv.spec.method.clone(),
            arg: inv.spec.arg,
            ret,
            session,
        });
        rt.current = None;
        self.alpha.derive_so();
    }

    pub fn step_event(
        &mut self,
        session: usize,
        visible: &[usize],
        ar_pos: Option<usize>,
    ) -> Result<usize, StepError> {
        match self.poised(session) {
            None => return Err(StepError::Blocked(session)),
            Some(PoisedAt::Silent) => return Err(StepError::ExpectedSilent { session }),
            Some(PoisedAt::Event) => {}
        }
        let rt = &mut self.sessions[session];
        let inv = rt.current.as_mut().unwrap();
        let stmt = next_stmt_cloned(inv).unwrap();
        let slot = inv.spec.slot;
        let label = stmt.label.unwrap();
        match stmt.kind {
            StmtKind::Read(v, l) => {
                let loc = resolve_loc(&self.universe, self.lib, &l, &inv.locals);
                let initval = self.universe.initval(loc);
                advance(inv);
                let (id, val) =
                    self.store.create_read(session, slot, label, loc, visible, initval)?;
                self.locals_mut(session).insert(v, val);
                Ok(id)
            }
            StmtKind::Write(l, e) => {
                let loc = resolve_loc(&self.universe, self.lib, &l, &inv.locals);
                let val = eval(&e, &inv.locals);
                advance(inv);
                let pos = ar_pos.unwrap_or(self.store.ar_order(loc).len());
                Ok(self.store.create_write(session, slot, label, loc, val, visible, pos)?)
            }
            StmtKind::Cas(v, l, e1, e2) => {
                let loc = resolve_loc(&self.universe, self.lib, &l, &inv.locals);
                let expect = eval(&e1, &inv.locals);
                let swap = eval(&e2, &inv.locals);
                let initval = self.universe.initval(loc);
                advance(inv);
                // The read value determined by Σ′ picks the rule: R-CAS on a
                // match (an update event), a plain read on a mismatch.
                let winner = self
                    .store
                    .ar_order(loc)
                    .iter()
                    .rev()
                    .find(|w| visible.contains(w))
                    .copied();
                let read_val = winner
                    .map(|w| self.store.events[w].action.written().unwrap())
                    .unwrap_or(initval);
                let (id, result) = if read_val == expect {
                    let pos = ar_pos.unwrap_or(self.store.ar_order(loc).len());
                    let id = self.store.create_update(
                        session, slot, label, loc, read_val, swap, visible, pos,
                    )?;
                    (id, 1)
                } else {
                    let (id, _) =
                        self.store.create_read(session, slot, label, loc, visible, initval)?;
                    (id, 0)
                };
                self.locals_mut(session).insert(v, result);
                Ok(id)
            }
            _ => unreachable!(),
        }
    }

    fn locals_mut(&mut self, session: usize) -> &mut HashMap<String, i64> {
        &mut self.sessions[session].current.as_mut().unwrap().locals
    }

    /// Runs silent steps for `session` until it is poised at an event or has
    /// nothing left to do.
    pub fn drain_silent(&mut self, session: usize) -> Result<(), StepError> {
        let mut fuel = 100_000;
        while self.poised(session) == Some(PoisedAt::Silent) {
            self.step_silent(session)?;
            fuel -= 1;
            if fuel == 0 {
                return Err(StepError::SilentLoop(session));
            }
        }
        Ok(())
    }
}

fn next_stmt(inv: &InvRt) -> Option<&Stmt> {
    // Peek past exhausted frames; equivalent to popping them.
    inv.frames.iter().rev().find_map(|f| f.stmts.get(f.next))
}

fn next_stmt_cloned(inv: &mut InvRt) -> Option<Stmt> {
    while let Some(f) = inv.frames.last() {
        if f.next >= f.stmts.len() {
            inv.frames.pop();
        } else {
            break;
        }
    }
    inv.frames.last().map(|f| f.stmts[f.next].clone())
}

fn advance(inv: &mut InvRt) {
    if let Some(f) = inv.frames.last_mut() {
        f.next += 1;
    }
}

fn resolve_loc(
    universe: &LocationUniverse,
    lib: &LibraryDef,
    l: &LocRef,
    locals: &HashMap<String, i64>,
) -> i64 {
    match l {
        LocRef::Global(g) => {
            let idx = lib.globals.iter().position(|d| d.name == *g).unwrap();
            universe.global_loc(idx)
        }
        LocRef::Field(v, f) => {
            let row = *locals.get(v).unwrap_or(&value::BOT);
            let fidx = frontend::field_index(lib, f).unwrap();
            universe.field_loc(row, fidx)
        }
    }
}

fn eval(e: &Expr, locals: &HashMap<String, i64>) -> i64 {
    match e {
        Expr::Int(n) => *n,
        Expr::Null => value::NULL,
        Expr::Empty => value::EMPTY,
        Expr::Var(v) => *locals.get(v).unwrap_or(&value::BOT),
        Expr::Bin(op, a, b) => {
            let (x, y) = (eval(a, locals), eval(b, locals));
            match op {
                BinOp::Add => x.wrapping_add(y),
                BinOp::Sub => x.wrapping_sub(y),
                BinOp::Mul => x.wrapping_mul(y),
                // Division is total: /0 evaluates to 0.
                BinOp::Div => x.checked_div(y).unwrap_or(0),
            }
        }
    }
}

fn eval_bool(b: &BoolExpr, locals: &HashMap<String, i64>) -> bool {
    match b {
        BoolExpr::Lit(v) => *v,
        BoolExpr::Cmp(op, a, b) => {
            let (x, y) = (eval(a, locals), eval(b, locals));
            match op {
                CmpOp::Lt => x < y,
                CmpOp::Le => x <= y,
                CmpOp::Eq => x == y,
                CmpOp::Ne => x != y,
                CmpOp::Gt => x > y,
                CmpOp::Ge => x >= y,
            }
        }
        BoolExpr::And(a, b) => eval_bool(a, locals) && eval_bool(b, locals),
        BoolExpr::Or(a, b) => eval_bool(a, locals) || eval_bool(b, locals),
    }
}

/// Replays a schedule: silent steps before each listed event are interleaved
/// automatically (they commute across sessions), event entries are consumed
/// in order, and all sessions are drained at the end. Deterministic by
/// construction.
pub fn replay(
    lib: &LibraryDef,
    history: &History,
    schedule: &Schedule,
    policy: &Policy,
) -> Result<(AbstractExecution, StoreState), StepError> {
    let mut m = MachineState::new(lib, history, policy.clone());
    for choice in schedule {
        match choice {
            StepChoice::Silent { session } => m.step_silent(*session)?,
            StepChoice::Event { session, .. } => {
                m.drain_silent(*session)?;
                m.step(choice)?;
            }
        }
    }
    for s in 0..m.session_count() {
        m.drain_silent(s)?;
    }
    let MachineState { alpha, store, .. } = m;
    Ok((alpha, store))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_library as parse;
    use crate::samples;
    use crate::store::Action;

    fn treiber() -> LibraryDef {
        parse(samples::TREIBER).unwrap()
    }

    fn ev(session: usize, visible: &[usize]) -> StepChoice {
        StepChoice::Event { session, visible: visible.to_vec(), ar_pos: None }
    }

    #[test]
    fn sequential_push_pop_round_trips() {
        // [DERIVED] one session, push(7) then pop observing everything:
        // pop returns 7 under any policy.
        let lib = treiber();
        let h = History::from_rows(&[(0, "push", 7), (0, "pop", value::BOT)]);
        // CC forces every event to observe all its predecessors.
        let sched: Schedule = (0..8).map(|i| ev(0, &(0..i).collect::<Vec<_>>())).collect();
        let (alpha, store) = replay(&lib, &h, &sched, &Policy::parse("cc").unwrap()).unwrap();
        assert_eq!(alpha.invocations.len(), 2);
        let pop = alpha.invocations.iter().find(|i| i.method == "pop").unwrap();
        assert_eq!(pop.ret, 7);
        assert_eq!(store.events.len(), 8);
        assert!(matches!(store.events[3].action, Action::Update { .. }));
        assert!(matches!(store.events[7].action, Action::Update { .. }));
    }

    #[test]
    fn pop_with_nothing_visible_returns_empty() {
        // [DERIVED] under EC a pop may observe no events even after a push
        // completed in another session.
        let lib = treiber();
        let h = History::from_rows(&[(0, "push", 1), (1, "pop", value::BOT)]);
        let sched: Schedule = vec![
            ev(0, &[]),
            ev(0, &[]),
            ev(0, &[]),
            ev(0, &[]),
            ev(1, &[]), // pop reads Top → NULL, exits loop, returns EMPTY
        ];
        let (alpha, _) = replay(&lib, &h, &sched, &Policy::EC).unwrap();
        let pop = alpha.invocations.iter().find(|i| i.method == "pop").unwrap();
        assert_eq!(pop.ret, value::EMPTY);
    }

    #[test]
    fn failed_cas_is_a_read_and_loops() {
        // [DERIVED] two concurrent pushes where the second push's CAS sees
        // the first push's update: the CAS fails (read event), the loop body
        // re-runs, and the retry succeeds reading the new Top.
        let lib = treiber();
        let h = History::from_rows(&[(0, "push", 1), (1, "push", 2)]);
        let sched: Schedule = vec![
            ev(0, &[]),  // 0: W n0.Val=1
            ev(0, &[]),  // 1: R Top → NULL
            ev(0, &[]),  // 2: W n0.Next=NULL
            ev(1, &[]),  // 3: W n1.Val=2
            ev(1, &[]),  // 4: R Top → NULL
            ev(1, &[]),  // 5: W n1.Next=NULL
            ev(0, &[]),  // 6: U Top NULL→n0
            ev(1, &[6]), // 7: CAS fails (expected NULL, sees n0) → read
            ev(1, &[6]), // 8: retry R Top → n0
            ev(1, &[6]), // 9: W n1.Next=n0
            ev(1, &[6]), // 10: U Top n0→n1
        ];
        let (alpha, store) = replay(&lib, &h, &sched, &Policy::EC).unwrap();
        assert!(matches!(store.events[7].action, Action::Read { .. }));
        assert!(matches!(store.events[10].action, Action::Update { .. }));
        assert_eq!(alpha.invocations.len(), 2);
    }

    #[test]
    fn policy_violation_surfaces_during_replay() {
        // Under RYW a session must see its own writes: pop after push in the
        // same session with an empty visible set is rejected.
        let lib = treiber();
        let h = History::from_rows(&[(0, "push", 1), (0, "pop", value::BOT)]);
        let sched: Schedule = vec![ev(0, &[]), ev(0, &[]), ev(0, &[]), ev(0, &[]), ev(0, &[])];
        let err = replay(&lib, &h, &sched, &Policy::parse("ryw").unwrap()).unwrap_err();
        assert!(matches!(err, StepError::Store(StoreError::PolicyViolation(..))));
    }

    #[test]
    fn history_parse_round_trip() {
        let h = History::parse("s1:push(1),pop;s2:pop").unwrap();
        assert_eq!(h.sessions.len(), 2);
        assert_eq!(h.sessions[0][0], InvocationSpec { method: "push".into(), arg: 1, slot: 0 });
        assert_eq!(h.sessions[0][1].arg, value::BOT);
        assert_eq!(h.sessions[1][0].slot, 2);
        assert_eq!(h.invocation_count(), 3);
    }

    #[test]
    fn alloc_rows_are_per_slot() {
        // Slot 1's allocation lands in a different row than slot 0's.
        let lib = treiber();
        let h = History::from_rows(&[(0, "push", 1), (1, "push", 2)]);
        let mut m = MachineState::new(&lib, &h, Policy::EC);
        m.drain_silent(0).unwrap();
        m.drain_silent(1).unwrap();
        // Both sessions are poised at their first event: W n.Val=a.
        let a = m.step_event(0, &[], None).unwrap();
        let b = m.step_event(1, &[], None).unwrap();
        let la = m.store.events[a].action.loc();
        let lb = m.store.events[b].action.loc();
        assert_ne!(la, lb);
        assert_eq!(m.store.events[a].action.written(), Some(1));
        assert_eq!(m.store.events[b].action.written(), Some(2));
    }
}
