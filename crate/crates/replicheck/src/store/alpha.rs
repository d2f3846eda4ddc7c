//! Abstract executions: the completed-invocation view that correctness
//! axioms judge.

use crate::rel::Rel;
use serde::{Deserialize, Serialize};

/// A completed invocation record γ = (id, method, arg, ret, session).
/// `arg`/`ret` use the shared integer value encoding (⊥ = -3, EMPTY = -2).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Invocation {
    pub id: usize,
    pub method: String,
    pub arg: i64,
    pub ret: i64,
    pub session: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbstractExecution {
    pub invocations: Vec<Invocation>,
    /// Session-order pairs over indices into `invocations`.
    pub so: Vec<(usize, usize)>,
}

impl AbstractExecution {
    /// Builds so-pairs from per-session completion, assuming `invocations`
    /// are listed in per-session program order.
    pub fn derive_so(&mut self) {
        self.so.clear();
        for i in 0..self.invocations.len() {
            for j in (i + 1)..self.invocations.len() {
                if self.invocations[i].session == self.invocations[j].session {
                    self.so.push((i, j));
                }
            }
        }
    }

    pub fn so_rel(&self) -> Rel {
        let mut r = Rel::new(self.invocations.len());
        for (a, b) in &self.so {
            r.add(*a, *b);
        }
        r
    }

    /// Canonical form for set-comparison across enumeration orders: records
    /// sorted by (session, position), sessions renumbered by first use.
    pub fn canonical_key(&self) -> Vec<(usize, String, i64, i64)> {
        let mut order: Vec<usize> = (0..self.invocations.len()).collect();
        order.sort_by_key(|&i| (self.invocations[i].session, i));
        let mut session_map: Vec<usize> = Vec::new();
        let mut out = Vec::new();
        for idx in order {
            let inv = &self.invocations[idx];
            let s = match session_map.iter().position(|s| *s == inv.session) {
                Some(p) => p,
                None => {
                    session_map.push(inv.session);
                    session_map.len() - 1
                }
            };
            out.push((s, inv.method.clone(), inv.arg, inv.ret));
        }
        out
    }
}
