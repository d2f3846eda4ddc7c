//! Executable replicated-store semantics.
//!
//! [`StoreState`] is χ = (Σ, vis, ar, so): the event set with visibility,
//! per-location arbitration, and session order. [`machine`] runs library
//! methods against it one rule at a time (used for witness replay), and
//! [`enumerate`] exhaustively explores all abstract executions of a history
//! at small bounds (the ground-truth oracle).
//!
//! Reads and updates resolve their value through `rf`: the arbitration-
//! maximal same-location write among the events the new event was made to
//! observe, falling back to the location's initial value. The initial value
//! acts as a virtual write preceding everything in arbitration, so CAS
//! exclusivity also covers two updates consuming the same initial value.

pub mod alpha;
pub mod enumerate;
pub mod machine;

pub use alpha::{AbstractExecution, Invocation};
pub use enumerate::{enumerate_executions, EnumerateError, EnumerationOutcome};
pub use machine::{replay, History, InvocationSpec, MachineState, Schedule, StepChoice, StepError};

use crate::policies::{self, Policy, StateRels};
use crate::rel::Rel;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// Default cap on total events during oracle enumeration.
pub const DEFAULT_EVENT_CAP: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Action {
    /// R(l, n)
    Read { loc: i64, value: i64 },
    /// W(l, n)
    Write { loc: i64, value: i64 },
    /// U(l, m, n): read m, wrote n
    Update { loc: i64, read: i64, value: i64 },
}

impl Action {
    pub fn loc(&self) -> i64 {
        match self {
            Action::Read { loc, .. } | Action::Write { loc, .. } | Action::Update { loc, .. } => {
                *loc
            }
        }
    }

    /// Write or update: participates in arbitration and can be read from.
    pub fn is_write(&self) -> bool {
        matches!(self, Action::Write { .. } | Action::Update { .. })
    }

    pub fn written(&self) -> Option<i64> {
        match self {
            Action::Write { value, .. } | Action::Update { value, .. } => Some(*value),
            Action::Read { .. } => None,
        }
    }

    pub fn read(&self) -> Option<i64> {
        match self {
            Action::Read { value, .. } => Some(*value),
            Action::Update { read, .. } => Some(*read),
            Action::Write { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub id: usize,
    pub session: usize,
    /// Global invocation slot the event belongs to.
    pub invocation: usize,
    /// Source-statement label, for reports.
    pub label: u32,
    pub action: Action,
}

/// The reads-from source of a read/update event: a write event id, or the
/// location's virtual initial write.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RfSource {
    Initial,
    Event(usize),
}

#[derive(Debug, Clone, Default)]
pub struct StoreState {
    pub events: Vec<Event>,
    vis: Rel,
    /// Per-location arbitration order (event ids, ar-ascending).
    ar: HashMap<i64, Vec<usize>>,
    /// rf source per read/update event id.
    rf: HashMap<usize, RfSource>,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum StoreError {
    #[error("policy {0} violated by event {1}")]
    PolicyViolation(String, usize),
    #[error("update exclusivity violated at location {0}: {1:?} already consumed by update {2}")]
    UpdateExclusivity(i64, RfSource, usize),
    #[error("causal arbitration violated between events {0} and {1}")]
    CausalArbitration(usize, usize),
    #[error("visible-set entry {0} does not exist yet")]
    BadVisibleSet(usize),
    #[error("arbitration position {0} out of range")]
    BadArPosition(usize),
}

impl StoreState {
    pub fn new() -> StoreState {
        StoreState::default()
    }

    pub fn vis(&self) -> &Rel {
        &self.vis
    }

    pub fn so_rel(&self) -> Rel {
        let mut so = Rel::new(self.events.len());
        for a in &self.events {
            for b in &self.events {
                if a.session == b.session && a.id < b.id {
                    so.add(a.id, b.id);
                }
            }
        }
        so
    }

    /// ar as a pair relation (same-location write/update pairs).
    pub fn ar_rel(&self) -> Rel {
        let mut r = Rel::new(self.events.len());
        for order in self.ar.values() {
            for (i, &a) in order.iter().enumerate() {
                for &b in &order[i + 1..] {
                    r.add(a, b);
                }
            }
        }
        r
    }

    pub fn ar_order(&self, loc: i64) -> &[usize] {
        self.ar.get(&loc).map(|v| v.as_slice()).unwrap_or(&[])
    }

    pub fn hb(&self) -> Rel {
        policies::hb(&self.vis, &self.so_rel())
    }

    pub fn rf_source(&self, event: usize) -> Option<RfSource> {
        self.rf.get(&event).copied()
    }

    /// The write event `e` reads from, if any (None = initial value or `e`
    /// is a write).
    pub fn rf_of(&self, event: usize) -> Option<&Event> {
        match self.rf.get(&event) {
            Some(RfSource::Event(w)) => Some(&self.events[*w]),
            _ => None,
        }
    }

    /// The arbitration-maximal same-location write among `visible`, i.e.
    /// the value a read observing exactly `visible` must return.
    fn winning_write(&self, loc: i64, visible: &[usize]) -> Option<usize> {
        self.ar_order(loc)
            .iter()
            .rev()
            .find(|w| visible.contains(w))
            .copied()
    }

    fn extend_vis(&mut self, visible: &[usize], target: usize) -> Result<(), StoreError> {
        for &v in visible {
            if v >= target {
                return Err(StoreError::BadVisibleSet(v));
            }
            self.vis.add(v, target);
        }
        Ok(())
    }

    fn push_event(&mut self, session: usize, invocation: usize, label: u32, action: Action) -> usize {
        let id = self.events.len();
        self.vis.grow(id + 1);
        self.events.push(Event { id, session, invocation, label, action });
        id
    }

    /// R-Read: create a read observing exactly `visible`; the value is the
    /// arbitration-maximal visible same-location write, else Initval.
    pub fn create_read(
        &mut self,
        session: usize,
        invocation: usize,
        label: u32,
        loc: i64,
        visible: &[usize],
        initval: i64,
    ) -> Result<(usize, i64), StoreError> {
        let (source, value) = match self.winning_write(loc, visible) {
            Some(w) => (RfSource::Event(w), self.events[w].action.written().unwrap()),
            None => (RfSource::Initial, initval),
        };
        let id = self.push_event(session, invocation, label, Action::Read { loc, value });
        self.extend_vis(visible, id)?;
        self.rf.insert(id, source);
        Ok((id, value))
    }

    /// R-Write: create a write observing `visible`, inserted into the
    /// location's arbitration order at `ar_pos`.
    pub fn create_write(
        &mut self,
        session: usize,
        invocation: usize,
        label: u32,
        loc: i64,
        value: i64,
        visible: &[usize],
        ar_pos: usize,
    ) -> Result<usize, StoreError> {
        let order_len = self.ar_order(loc).len();
        if ar_pos > order_len {
            return Err(StoreError::BadArPosition(ar_pos));
        }
        let id = self.push_event(session, invocation, label, Action::Write { loc, value });
        self.extend_vis(visible, id)?;
        self.ar.entry(loc).or_default().insert(ar_pos, id);
        Ok(id)
    }

    /// R-CAS: create the update (successful CAS) event. The caller has
    /// already determined that the read value matches the expected one.
    /// Enforces update exclusivity: no other update may read from the same
    /// source (including the virtual initial write).
    #[allow(clippy::too_many_arguments)]
    pub fn create_update(
        &mut self,
        session: usize,
        invocation: usize,
        label: u32,
        loc: i64,
        read: i64,
        value: i64,
        visible: &[usize],
        ar_pos: usize,
    ) -> Result<usize, StoreError> {
        let source = match self.winning_write(loc, visible) {
            Some(w) => RfSource::Event(w),
            None => RfSource::Initial,
        };
        if let Some((other, _)) = self.rf.iter().find(|(e, s)| {
            **s == source
                && matches!(self.events[**e].action, Action::Update { .. })
                && self.events[**e].action.loc() == loc
        }) {
            return Err(StoreError::UpdateExclusivity(loc, source, *other));
        }
        let order_len = self.ar_order(loc).len();
        if ar_pos > order_len {
            return Err(StoreError::BadArPosition(ar_pos));
        }
        let id = self.push_event(session, invocation, label, Action::Update { loc, read, value });
        self.extend_vis(visible, id)?;
        self.rf.insert(id, source);
        self.ar.entry(loc).or_default().insert(ar_pos, id);
        Ok(id)
    }

    /// Extends vis to the least policy-closed superset. Because the most
    /// recent event has no outgoing vis/so edges, closure of an
    /// already-closed prefix only adds edges into that event.
    pub fn close_vis_under(&mut self, policy: &Policy) {
        self.vis = policies::close_vis(policy, &self.vis, &self.so_rel());
    }

    /// The arbitration-maximal same-location write visible to `target`
    /// under the current vis.
    pub fn winning_visible_write(&self, loc: i64, target: usize) -> Option<usize> {
        self.ar_order(loc)
            .iter()
            .rev()
            .find(|w| self.vis.has(**w, target))
            .copied()
    }

    /// Event ids visible to `target`.
    pub fn visible_to(&self, target: usize) -> Vec<usize> {
        (0..self.events.len()).filter(|&e| self.vis.has(e, target)).collect()
    }

    /// Checks the structural state invariants plus the policy. Called after
    /// every step by the machine.
    pub fn check_invariants(&self, policy: &Policy) -> Result<(), StoreError> {
        let so = self.so_rel();
        let hb = policies::hb(&self.vis, &so);
        if !hb.is_irreflexive() {
            // a vis/so cycle — report the first event on a cycle
            for e in 0..self.events.len() {
                if hb.has(e, e) {
                    return Err(StoreError::CausalArbitration(e, e));
                }
            }
        }
        let ar = self.ar_rel();
        for (a, b) in ar.pairs() {
            if hb.has(b, a) {
                return Err(StoreError::CausalArbitration(b, a));
            }
        }
        if !policies::holds(policy, &StateRels { vis: &self.vis, so: &so }) {
            return Err(StoreError::PolicyViolation(
                policy.to_string(),
                self.events.len().saturating_sub(1),
            ));
        }
        debug_assert!(self.vis.is_irreflexive() && self.vis.is_antisymmetric());
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::value;

    const TOP: i64 = 0;

    #[test]
    fn rf_picks_ar_maximal_visible_write() {
        // [DERIVED] two visible writes w₁ ar→ w₂ to l: a read of l returns
        // w₂'s value.
        let mut st = StoreState::new();
        let w1 = st.create_write(0, 0, 1, TOP, 10, &[], 0).unwrap();
        let w2 = st.create_write(1, 1, 1, TOP, 20, &[], 1).unwrap();
        let (r, v) = st.create_read(2, 2, 2, TOP, &[w1, w2], value::NULL).unwrap();
        assert_eq!(v, 20);
        assert_eq!(st.rf_of(r).unwrap().id, w2);
        // Inserting a later write *before* w1 in ar does not disturb them.
        let w3 = st.create_write(0, 0, 1, TOP, 30, &[], 0).unwrap();
        assert_eq!(st.ar_order(TOP), &[w3, w1, w2]);
    }

    #[test]
    fn read_with_empty_visible_set_reads_initval() {
        // [TRIVIAL] no visible writes → Initval, no rf source.
        let mut st = StoreState::new();
        let (r, v) = st.create_read(0, 0, 1, TOP, &[], value::NULL).unwrap();
        assert_eq!(v, value::NULL);
        assert!(st.rf_of(r).is_none());
        assert_eq!(st.rf_source(r), Some(RfSource::Initial));
    }

    #[test]
    fn update_exclusivity_on_shared_source() {
        let mut st = StoreState::new();
        let w = st.create_write(0, 0, 1, TOP, 10, &[], 0).unwrap();
        st.create_update(1, 1, 2, TOP, 10, 11, &[w], 1).unwrap();
        let err = st.create_update(2, 2, 2, TOP, 10, 12, &[w], 1).unwrap_err();
        assert!(matches!(err, StoreError::UpdateExclusivity(..)));
    }

    #[test]
    fn update_exclusivity_covers_initial_value() {
        // Two successful CAS(l, Initval, _) cannot coexist: the virtual
        // initial write is a shared rf source.
        let mut st = StoreState::new();
        st.create_update(0, 0, 1, TOP, value::NULL, 1, &[], 0).unwrap();
        let err = st.create_update(1, 1, 1, TOP, value::NULL, 2, &[], 0).unwrap_err();
        assert!(matches!(err, StoreError::UpdateExclusivity(_, RfSource::Initial, _)));
        // A plain read of the initial value is still fine.
        st.create_read(2, 2, 2, TOP, &[], value::NULL).unwrap();
    }

    #[test]
    fn causal_arbitration_detected() {
        // hb(w₁, w₂) via vis but ar(w₂, w₁): invalid.
        let mut st = StoreState::new();
        let w1 = st.create_write(0, 0, 1, TOP, 10, &[], 0).unwrap();
        let _w2 = st.create_write(1, 1, 1, TOP, 20, &[w1], 0).unwrap(); // inserted before w1
        let err = st.check_invariants(&Policy::EC).unwrap_err();
        assert!(matches!(err, StoreError::CausalArbitration(..)));
    }

    #[test]
    fn policy_checked_by_invariants() {
        // so(σ₁,σ₂) within a session, vis(σ₂,σ₃), no vis(σ₁,σ₃): MW fails.
        let mut st = StoreState::new();
        let w1 = st.create_write(0, 0, 1, TOP, 10, &[], 0).unwrap();
        let w2 = st.create_write(0, 0, 2, 1, 20, &[], 0).unwrap();
        let _r = st.create_read(1, 1, 3, 1, &[w2], 0).unwrap();
        assert!(st.check_invariants(&Policy::EC).is_ok());
        let mw = Policy::parse("mw").unwrap();
        assert!(matches!(
            st.check_invariants(&mw),
            Err(StoreError::PolicyViolation(..))
        ));
        let _ = w1;
    }
}
