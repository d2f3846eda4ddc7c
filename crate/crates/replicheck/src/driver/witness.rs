//! Model decoding and witness validation.
//!
//! A sat model is first decoded into a [`Witness`]: the concrete history,
//! a replayable schedule (events in a topological order of vis ∪ so, ties
//! by slot index), and the claimed abstract execution. The witness is then
//! *validated* by replaying the schedule through the executable store
//! semantics and checking that the replay reproduces the claimed events
//! and abstract execution and that the axiom checker confirms the
//! violation. A witness is only ever surfaced after validation, so a
//! solver or encoding bug can not masquerade as a library bug.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::axioms::{self, AxiomName, Outcome};
use crate::dsl::LibraryDef;
use crate::encoder::vocab::{TY_READ, TY_UPDATE, TY_WRITE};
use crate::encoder::{SlotKind, Vocabulary};
use crate::policies::Policy;
use crate::store::{
    replay, AbstractExecution, History, Invocation, InvocationSpec, Schedule, StepChoice,
    StepError,
};
use crate::value;

use super::solve::{Model, ModelValue};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventAction {
    Read,
    Write,
    Update,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessEvent {
    /// Position in the schedule; replayed store event ids coincide.
    pub id: usize,
    /// Encoder event-slot index.
    pub slot: usize,
    pub session: usize,
    /// History slot of the owning invocation.
    pub invocation: usize,
    /// Source label of the originating statement.
    pub label: u32,
    pub action: EventAction,
    pub loc: i64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub read: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub write: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub library: String,
    pub axiom: String,
    pub policy: String,
    pub k: usize,
    pub unroll: u32,
    pub history: History,
    pub schedule: Schedule,
    pub events: Vec<WitnessEvent>,
    /// Event-level relations over `events[i].id`.
    pub vis: Vec<(usize, usize)>,
    pub so: Vec<(usize, usize)>,
    pub rf: Vec<(usize, usize)>,
    pub alpha: AbstractExecution,
    /// History slots of the invocations binding the violated axiom.
    pub binding: Vec<usize>,
}

#[derive(Debug, Error)]
pub enum DecodeError {
    #[error("model is missing a value for `{0}`")]
    Missing(String),
    #[error("model value for `{0}` has the wrong sort")]
    WrongSort(String),
    #[error("model is inconsistent: {0}")]
    Inconsistent(String),
}

#[derive(Debug, Error)]
pub enum ValidateError {
    #[error("witness metadata is malformed: {0}")]
    BadMeta(String),
    #[error("replay failed: {0}")]
    Replay(#[from] StepError),
    #[error("replay disagrees with the model ({0}); this indicates an encoder or solver bug")]
    Diverged(String),
    #[error("the replayed execution does not violate axiom {0}")]
    NotViolating(String),
}

fn geti(model: &Model, name: &str) -> Result<i64, DecodeError> {
    match model.get(name) {
        Some(ModelValue::Int(v)) => Ok(*v),
        Some(ModelValue::Bool(_)) => Err(DecodeError::WrongSort(name.to_string())),
        None => Err(DecodeError::Missing(name.to_string())),
    }
}

fn getb(model: &Model, name: &str) -> Result<bool, DecodeError> {
    match model.get(name) {
        Some(ModelValue::Bool(v)) => Ok(*v),
        Some(ModelValue::Int(_)) => Err(DecodeError::WrongSort(name.to_string())),
        // Don't-care booleans may be pruned from printed models.
        None => Ok(false),
    }
}

/// Turns a sat model into a replayable witness.
pub fn decode_model(
    v: &Vocabulary,
    model: &Model,
    policy: &Policy,
    axiom: AxiomName,
) -> Result<Witness, DecodeError> {
    let k = v.k;

    struct Inv {
        meth: usize,
        sess_idx: usize,
        arg: i64,
        ret: i64,
        cmp: bool,
    }
    let mut sess_values: Vec<i64> = Vec::new();
    for i in 1..=k {
        let s = geti(model, &v.sess(i))?;
        if !sess_values.contains(&s) {
            sess_values.push(s);
        }
    }
    sess_values.sort_unstable();
    let mut invs = Vec::with_capacity(k);
    for i in 1..=k {
        let meth = geti(model, &v.meth(i))?;
        if meth < 0 || meth as usize >= v.methods.len() {
            return Err(DecodeError::Inconsistent(format!("meth_{i} = {meth}")));
        }
        let sess = geti(model, &v.sess(i))?;
        invs.push(Inv {
            meth: meth as usize,
            sess_idx: sess_values.iter().position(|s| *s == sess).unwrap(),
            arg: geti(model, &v.arg(i))?,
            ret: geti(model, &v.ret(i)).unwrap_or(value::BOT),
            cmp: getb(model, &v.cmp(i))?,
        });
    }

    let mut sessions: Vec<Vec<InvocationSpec>> = vec![Vec::new(); sess_values.len()];
    for (idx, inv) in invs.iter().enumerate() {
        sessions[inv.sess_idx].push(InvocationSpec {
            method: v.methods[inv.meth].clone(),
            arg: inv.arg,
            slot: idx,
        });
    }
    let history = History { sessions };

    // Active events with their store actions.
    struct Decoded {
        slot: usize,
        action: EventAction,
        loc: i64,
        read: Option<i64>,
        write: Option<i64>,
    }
    let mut active: Vec<Decoded> = Vec::new();
    for s in &v.slots {
        if !getb(model, &v.act(s.index))? {
            continue;
        }
        if invs[s.inv - 1].meth != s.method_idx {
            return Err(DecodeError::Inconsistent(format!(
                "event slot {} active for the wrong method",
                s.index
            )));
        }
        let ty = geti(model, &v.ty(s.index))?;
        let action = match (ty, s.kind) {
            (TY_READ, SlotKind::Read | SlotKind::Cas) => EventAction::Read,
            (TY_WRITE, SlotKind::Write) => EventAction::Write,
            (TY_UPDATE, SlotKind::Cas) => EventAction::Update,
            _ => {
                return Err(DecodeError::Inconsistent(format!(
                    "event slot {} has type {ty}, impossible for its statement",
                    s.index
                )))
            }
        };
        active.push(Decoded {
            slot: s.index,
            action,
            loc: geti(model, &v.loc(s.index))?,
            read: if s.kind.reads() { Some(geti(model, &v.rv(s.index))?) } else { None },
            write: if action != EventAction::Read && s.kind.writes() {
                Some(geti(model, &v.wv(s.index))?)
            } else {
                None
            },
        });
    }

    // Structural session order among active slots (the encoding defines soe
    // the same way).
    let n = active.len();
    let pos_of_slot = |slot: usize| active.iter().position(|d| d.slot == slot);
    let soe = |a: &Decoded, b: &Decoded| -> bool {
        let (sa, sb) = (v.slot(a.slot), v.slot(b.slot));
        if sa.inv == sb.inv {
            sa.method_idx == sb.method_idx && sa.atom_idx < sb.atom_idx
        } else {
            sa.inv < sb.inv && invs[sa.inv - 1].sess_idx == invs[sb.inv - 1].sess_idx
        }
    };
    let mut vis = vec![vec![false; n]; n];
    for a in 0..n {
        for b in 0..n {
            if a != b {
                vis[a][b] = getb(model, &v.vis(active[a].slot, active[b].slot))?;
            }
        }
    }

    // Topological order of vis ∪ soe, ties broken by slot index.
    let mut order: Vec<usize> = Vec::with_capacity(n);
    let mut placed = vec![false; n];
    while order.len() < n {
        let mut picked = None;
        for c in 0..n {
            if placed[c] {
                continue;
            }
            let blocked = (0..n).any(|p| {
                !placed[p] && p != c && (vis[p][c] || soe(&active[p], &active[c]))
            });
            if !blocked {
                picked = Some(c);
                break; // active is slot-ordered, so the first candidate wins ties
            }
        }
        match picked {
            Some(c) => {
                placed[c] = true;
                order.push(c);
            }
            None => {
                return Err(DecodeError::Inconsistent(
                    "vis ∪ so is cyclic; happens-before acyclicity is violated".to_string(),
                ))
            }
        }
    }
    let id_of: Vec<usize> = {
        let mut m = vec![0; n];
        for (id, &c) in order.iter().enumerate() {
            m[c] = id;
        }
        m
    };

    let mut events = Vec::with_capacity(n);
    let mut schedule: Schedule = Vec::with_capacity(n);
    for (id, &c) in order.iter().enumerate() {
        let d = &active[c];
        let slot = v.slot(d.slot);
        let session = invs[slot.inv - 1].sess_idx;
        let visible: Vec<usize> = order[..id]
            .iter()
            .filter(|&&p| vis[p][c])
            .map(|&p| id_of[p])
            .collect();
        let ar_pos = if d.action == EventAction::Read {
            None
        } else {
            // Insertion position among already-created same-location writes,
            // per the model's arbitration order.
            let mut pos = 0;
            for &p in &order[..id] {
                let e = &active[p];
                if e.action != EventAction::Read
                    && e.loc == d.loc
                    && getb(model, &v.ar(e.slot, d.slot))?
                {
                    pos += 1;
                }
            }
            Some(pos)
        };
        schedule.push(StepChoice::Event { session, visible: visible.clone(), ar_pos });
        events.push(WitnessEvent {
            id,
            slot: d.slot,
            session,
            invocation: slot.inv - 1,
            label: slot.src_label,
            action: d.action,
            loc: d.loc,
            read: d.read,
            write: d.write,
        });
    }

    let mut vis_pairs = Vec::new();
    let mut so_pairs = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if a == b {
                continue;
            }
            if vis[a][b] {
                vis_pairs.push((id_of[a], id_of[b]));
            }
            if soe(&active[a], &active[b]) {
                so_pairs.push((id_of[a], id_of[b]));
            }
        }
    }
    let mut rf_pairs = Vec::new();
    for a in v.write_slots() {
        for b in v.read_slots() {
            if a.index == b.index {
                continue;
            }
            if getb(model, &v.rf(a.index, b.index))? {
                if let (Some(pa), Some(pb)) = (pos_of_slot(a.index), pos_of_slot(b.index)) {
                    rf_pairs.push((id_of[pa], id_of[pb]));
                }
            }
        }
    }
    vis_pairs.sort_unstable();
    so_pairs.sort_unstable();
    rf_pairs.sort_unstable();

    // Completed invocations in session-major program order, so that the
    // derived so matches the replay's.
    let mut alpha = AbstractExecution::default();
    let mut by_session: Vec<usize> = (0..k).filter(|&x| invs[x].cmp).collect();
    by_session.sort_by_key(|&x| (invs[x].sess_idx, x));
    for x in by_session {
        let inv = &invs[x];
        alpha.invocations.push(Invocation {
            id: x,
            method: v.methods[inv.meth].clone(),
            arg: inv.arg,
            ret: inv.ret,
            session: inv.sess_idx,
        });
    }
    alpha.derive_so();

    let binding = match axioms::check(&alpha, axioms::axiom_id(v.datatype, axiom).unwrap()) {
        Ok(Outcome::Counterexample(idxs)) => {
            idxs.iter().map(|&i| alpha.invocations[i].id).collect()
        }
        Ok(Outcome::Ok) => {
            return Err(DecodeError::Inconsistent(
                "the decoded abstract execution satisfies the axiom".to_string(),
            ))
        }
        Err(e) => return Err(DecodeError::Inconsistent(e.to_string())),
    };

    Ok(Witness {
        library: v.lib_name.clone(),
        axiom: axiom.as_str().to_string(),
        policy: policy.to_string(),
        k,
        unroll: v.unroll,
        history,
        schedule,
        events,
        vis: vis_pairs,
        so: so_pairs,
        rf: rf_pairs,
        alpha,
        binding,
    })
}

/// Replays the witness and cross-checks every claim in it.
pub fn validate_witness(lib: &LibraryDef, w: &Witness) -> Result<(), ValidateError> {
    let policy = Policy::parse(&w.policy).map_err(|e| ValidateError::BadMeta(e.to_string()))?;
    let axiom = AxiomName::parse(&w.axiom)
        .ok_or_else(|| ValidateError::BadMeta(format!("unknown axiom `{}`", w.axiom)))?;
    let ax = axioms::axiom_id(lib.datatype, axiom)
        .map_err(|e| ValidateError::BadMeta(e.to_string()))?;

    let (alpha, store) = replay(lib, &w.history, &w.schedule, &policy)?;

    if store.events.len() != w.events.len() {
        return Err(ValidateError::Diverged(format!(
            "replay produced {} events, model has {}",
            store.events.len(),
            w.events.len()
        )));
    }
    for we in &w.events {
        let ev = &store.events[we.id];
        let same = ev.session == we.session
            && ev.invocation == we.invocation
            && ev.label == we.label
            && ev.action.loc() == we.loc
            && ev.action.read() == we.read
            && ev.action.written() == we.write
            && matches!(
                (&we.action, ev.action.is_write(), ev.action.read().is_some()),
                (EventAction::Read, false, true)
                    | (EventAction::Write, true, false)
                    | (EventAction::Update, true, true)
            );
        if !same {
            return Err(ValidateError::Diverged(format!(
                "event {}: replay produced {:?}, model claims {:?}",
                we.id, ev, we
            )));
        }
    }
    let mut replay_vis: Vec<(usize, usize)> = store.vis().pairs().collect();
    replay_vis.sort_unstable();
    if replay_vis != w.vis {
        return Err(ValidateError::Diverged("visibility relation differs".to_string()));
    }

    let key = |a: &AbstractExecution| {
        let mut inv: Vec<_> = a
            .invocations
            .iter()
            .map(|i| (i.id, i.method.clone(), i.arg, i.ret, i.session))
            .collect();
        inv.sort_unstable();
        let mut so: Vec<_> = a
            .so
            .iter()
            .map(|&(x, y)| (a.invocations[x].id, a.invocations[y].id))
            .collect();
        so.sort_unstable();
        (inv, so)
    };
    if key(&alpha) != key(&w.alpha) {
        return Err(ValidateError::Diverged(format!(
            "abstract execution differs: replay {:?}, model {:?}",
            alpha, w.alpha
        )));
    }

    store
        .check_invariants(&policy)
        .map_err(|e| ValidateError::Diverged(format!("final store state invalid: {e}")))?;

    match axioms::check(&alpha, ax) {
        Ok(Outcome::Counterexample(_)) => Ok(()),
        Ok(Outcome::Ok) => Err(ValidateError::NotViolating(w.axiom.clone())),
        Err(e) => Err(ValidateError::BadMeta(e.to_string())),
    }
}
