//! Correctness axioms over abstract executions.
//!
//! Each datatype fixes a `match` relation between producer and consumer
//! invocations (equal argument/return), and axioms are closed formulas over
//! (Γ, so_Γ, hb_Γ) with hb_Γ = (match ∪ so_Γ)⁺. The Empty axiom comes in
//! two variants: Empty[HB] as stated, and Empty[SO] with hb_Γ replaced by
//! so_Γ. The queue's final order axiom is named FIFO-2 here.

use crate::dsl::Datatype;
use crate::rel::Rel;
use crate::store::alpha::AbstractExecution;
use crate::value;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AxiomName {
    AddRem,
    Injective,
    EmptySo,
    EmptyHb,
    Lifo1,
    Lifo2,
    Fifo1,
    Fifo2,
    Exchange,
}

impl AxiomName {
    pub fn as_str(self) -> &'static str {
        match self {
            AxiomName::AddRem => "addrem",
            AxiomName::Injective => "injective",
            AxiomName::EmptySo => "empty-so",
            AxiomName::EmptyHb => "empty-hb",
            AxiomName::Lifo1 => "lifo1",
            AxiomName::Lifo2 => "lifo2",
            AxiomName::Fifo1 => "fifo1",
            AxiomName::Fifo2 => "fifo2",
            AxiomName::Exchange => "exchange",
        }
    }

    pub fn parse(s: &str) -> Option<AxiomName> {
        [
            AxiomName::AddRem,
            AxiomName::Injective,
            AxiomName::EmptySo,
            AxiomName::EmptyHb,
            AxiomName::Lifo1,
            AxiomName::Lifo2,
            AxiomName::Fifo1,
            AxiomName::Fifo2,
            AxiomName::Exchange,
        ]
        .into_iter()
        .find(|a| a.as_str() == s.trim().to_ascii_lowercase())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AxiomId {
    pub datatype: Datatype,
    pub name: AxiomName,
}

#[derive(Debug, Error)]
#[error("axiom `{0}` is not applicable to datatype {1}")]
pub struct AxiomMismatch(pub &'static str, pub &'static str);

/// The fixed catalog per datatype; the exchanger has no Empty or order
/// axioms.
pub fn axioms_for(datatype: Datatype) -> Vec<AxiomId> {
    let names: &[AxiomName] = match datatype {
        Datatype::Stack => &[
            AxiomName::AddRem,
            AxiomName::Injective,
            AxiomName::EmptySo,
            AxiomName::EmptyHb,
            AxiomName::Lifo1,
            AxiomName::Lifo2,
        ],
        Datatype::Queue => &[
            AxiomName::AddRem,
            AxiomName::Injective,
            AxiomName::EmptySo,
            AxiomName::EmptyHb,
            AxiomName::Fifo1,
            AxiomName::Fifo2,
        ],
        Datatype::Exchanger => {
            &[AxiomName::AddRem, AxiomName::Injective, AxiomName::Exchange]
        }
    };
    names.iter().map(|n| AxiomId { datatype, name: *n }).collect()
}

pub fn axiom_id(datatype: Datatype, name: AxiomName) -> Result<AxiomId, AxiomMismatch> {
    if axioms_for(datatype).iter().any(|a| a.name == name) {
        Ok(AxiomId { datatype, name })
    } else {
        Err(AxiomMismatch(name.as_str(), datatype.as_str()))
    }
}

/// match(γ₁, γ₂): γ₁ produced the value γ₂ consumed. For the exchanger both
/// sides are exchanges and the producer's argument is the consumer's return.
pub fn matches(dt: Datatype, alpha: &AbstractExecution, g1: usize, g2: usize) -> bool {
    let a = &alpha.invocations[g1];
    let b = &alpha.invocations[g2];
    a.method == dt.producer() && b.method == dt.consumer() && a.arg == b.ret
}

/// The match relation as a Rel over invocation indices.
pub fn match_rel(dt: Datatype, alpha: &AbstractExecution) -> Rel {
    let n = alpha.invocations.len();
    let mut r = Rel::new(n);
    for g1 in 0..n {
        for g2 in 0..n {
            if g1 != g2 && matches(dt, alpha, g1, g2) {
                r.add(g1, g2);
            }
        }
    }
    r
}

/// hb_Γ = (match ∪ so_Γ)⁺.
pub fn hb_gamma(alpha: &AbstractExecution, dt: Datatype) -> Rel {
    let mut h = match_rel(dt, alpha);
    h.union_with(&alpha.so_rel());
    h.close_transitive();
    h
}

/// Outcome of evaluating one axiom: `Counterexample` carries the γ-variable
/// bindings (invocation indices) of the violated instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Ok,
    Counterexample(Vec<usize>),
}

impl Outcome {
    pub fn is_violation(&self) -> bool {
        matches!(self, Outcome::Counterexample(_))
    }
}

pub fn check(alpha: &AbstractExecution, ax: AxiomId) -> Result<Outcome, AxiomMismatch> {
    axiom_id(ax.datatype, ax.name)?;
    let dt = ax.datatype;
    let n = alpha.invocations.len();
    let m = match_rel(dt, alpha);
    let inv = |i: usize| &alpha.invocations[i];

    let outcome = match ax.name {
        AxiomName::AddRem if dt == Datatype::Exchanger => {
            // r(γ₁) ≠ ⊥ ⇒ ∃γ₂. a(γ₂) = r(γ₁)
            (0..n)
                .find(|&g1| {
                    inv(g1).ret != value::BOT
                        && !(0..n).any(|g2| inv(g2).arg == inv(g1).ret)
                })
                .map(|g1| Outcome::Counterexample(vec![g1]))
                .unwrap_or(Outcome::Ok)
        }
        AxiomName::AddRem => {
            // m(γ) = consumer ∧ r(γ) ≠ EMPTY ⇒ ∃γ′. match(γ′, γ)
            (0..n)
                .find(|&g| {
                    inv(g).method == dt.consumer()
                        && inv(g).ret != value::EMPTY
                        && !(0..n).any(|g2| m.has(g2, g))
                })
                .map(|g| Outcome::Counterexample(vec![g]))
                .unwrap_or(Outcome::Ok)
        }
        AxiomName::Injective if dt == Datatype::Exchanger => {
            // r(γ₂) = a(γ₁) ∧ r(γ₃) = a(γ₁) ⇒ γ₂ = γ₃
            let mut found = None;
            'outer: for g1 in 0..n {
                for g2 in 0..n {
                    for g3 in 0..n {
                        if g2 != g3
                            && inv(g2).ret == inv(g1).arg
                            && inv(g3).ret == inv(g1).arg
                        {
                            found = Some(vec![g1, g2, g3]);
                            break 'outer;
                        }
                    }
                }
            }
            found.map(Outcome::Counterexample).unwrap_or(Outcome::Ok)
        }
        AxiomName::Injective => {
            // match(γ₁,γ₂) ∧ match(γ₁,γ₃) ⇒ γ₂ = γ₃
            let mut found = None;
            'outer: for g1 in 0..n {
                for g2 in 0..n {
                    for g3 in 0..n {
                        if g2 != g3 && m.has(g1, g2) && m.has(g1, g3) {
                            found = Some(vec![g1, g2, g3]);
                            break 'outer;
                        }
                    }
                }
            }
            found.map(Outcome::Counterexample).unwrap_or(Outcome::Ok)
        }
        AxiomName::EmptySo | AxiomName::EmptyHb => {
            // m(γ₁) = consumer ∧ r(γ₁) = EMPTY ∧ m(γ₂) = producer
            //   ∧ ord(γ₂,γ₁) ⇒ ∃γ₃. match(γ₂,γ₃)
            let ord = if ax.name == AxiomName::EmptyHb {
                hb_gamma(alpha, dt)
            } else {
                alpha.so_rel()
            };
            let mut found = None;
            'outer: for g1 in 0..n {
                if inv(g1).method != dt.consumer() || inv(g1).ret != value::EMPTY {
                    continue;
                }
                for g2 in 0..n {
                    if inv(g2).method == dt.producer()
                        && ord.has(g2, g1)
                        && !(0..n).any(|g3| m.has(g2, g3))
                    {
                        found = Some(vec![g1, g2]);
                        break 'outer;
                    }
                }
            }
            found.map(Outcome::Counterexample).unwrap_or(Outcome::Ok)
        }
        AxiomName::Lifo1 => {
            // m(γ₁)=Push ∧ match(γ₂,γ₃) ∧ hb_Γ(γ₂,γ₁) ∧ hb_Γ(γ₁,γ₃)
            //   ⇒ ∃γ₄. match(γ₁,γ₄)
            let hb = hb_gamma(alpha, dt);
            let mut found = None;
            'outer: for g1 in 0..n {
                if inv(g1).method != dt.producer() {
                    continue;
                }
                for (g2, g3) in m.pairs() {
                    if hb.has(g2, g1)
                        && hb.has(g1, g3)
                        && !(0..n).any(|g4| m.has(g1, g4))
                    {
                        found = Some(vec![g1, g2, g3]);
                        break 'outer;
                    }
                }
            }
            found.map(Outcome::Counterexample).unwrap_or(Outcome::Ok)
        }
        AxiomName::Lifo2 => {
            // ¬(match(γ₁,γ₄) ∧ match(γ₂,γ₃) ∧ hb(γ₂,γ₁) ∧ hb(γ₃,γ₄) ∧ hb(γ₁,γ₃))
            let hb = hb_gamma(alpha, dt);
            let mut found = None;
            'outer: for (g1, g4) in m.pairs() {
                for (g2, g3) in m.pairs() {
                    if hb.has(g2, g1) && hb.has(g3, g4) && hb.has(g1, g3) {
                        found = Some(vec![g1, g2, g3, g4]);
                        break 'outer;
                    }
                }
            }
            found.map(Outcome::Counterexample).unwrap_or(Outcome::Ok)
        }
        AxiomName::Fifo1 => {
            // m(γ₁)=Enqueue ∧ match(γ₂,γ₃) ∧ hb(γ₁,γ₂) ⇒ ∃γ₄. match(γ₁,γ₄)
            let hb = hb_gamma(alpha, dt);
            let mut found = None;
            'outer: for g1 in 0..n {
                if inv(g1).method != dt.producer() {
                    continue;
                }
                for (g2, g3) in m.pairs() {
                    let _ = g3;
                    if hb.has(g1, g2) && !(0..n).any(|g4| m.has(g1, g4)) {
                        found = Some(vec![g1, g2, g3]);
                        break 'outer;
                    }
                }
            }
            found.map(Outcome::Counterexample).unwrap_or(Outcome::Ok)
        }
        AxiomName::Fifo2 => {
            // ¬(match(γ₁,γ₄) ∧ match(γ₂,γ₃) ∧ hb(γ₁,γ₂) ∧ hb(γ₃,γ₄))
            let hb = hb_gamma(alpha, dt);
            let mut found = None;
            'outer: for (g1, g4) in m.pairs() {
                for (g2, g3) in m.pairs() {
                    if hb.has(g1, g2) && hb.has(g3, g4) {
                        found = Some(vec![g1, g2, g3, g4]);
                        break 'outer;
                    }
                }
            }
            found.map(Outcome::Counterexample).unwrap_or(Outcome::Ok)
        }
        AxiomName::Exchange => {
            // a(γ₁) = r(γ₂) ⇒ r(γ₁) = a(γ₂)
            let mut found = None;
            'outer: for g1 in 0..n {
                for g2 in 0..n {
                    if inv(g1).arg == inv(g2).ret && inv(g1).ret != inv(g2).arg {
                        found = Some(vec![g1, g2]);
                        break 'outer;
                    }
                }
            }
            found.map(Outcome::Counterexample).unwrap_or(Outcome::Ok)
        }
    };
    Ok(outcome)
}

/// Any axiom of the datatype violated on `alpha`.
pub fn any_violation(alpha: &AbstractExecution, dt: Datatype) -> Vec<AxiomId> {
    axioms_for(dt)
        .into_iter()
        .filter(|ax| check(alpha, *ax).map(|o| o.is_violation()).unwrap_or(false))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::store::alpha::Invocation;

    fn alpha(records: &[(&str, i64, i64, usize)]) -> AbstractExecution {
        let mut a = AbstractExecution {
            invocations: records
                .iter()
                .enumerate()
                .map(|(id, (m, arg, ret, s))| Invocation {
                    id,
                    method: m.to_string(),
                    arg: *arg,
                    ret: *ret,
                    session: *s,
                })
                .collect(),
            so: Vec::new(),
        };
        a.derive_so();
        a
    }

    const B: i64 = value::BOT;
    const E: i64 = value::EMPTY;

    fn stack(name: AxiomName) -> AxiomId {
        AxiomId { datatype: Datatype::Stack, name }
    }

    #[test]
    fn catalog_sizes() {
        // [PAPER] six stack axioms, six queue axioms, three exchanger axioms.
        assert_eq!(axioms_for(Datatype::Stack).len(), 6);
        assert_eq!(axioms_for(Datatype::Queue).len(), 6);
        assert_eq!(axioms_for(Datatype::Exchanger).len(), 3);
        assert!(axiom_id(Datatype::Exchanger, AxiomName::EmptyHb).is_err());
        assert!(axiom_id(Datatype::Stack, AxiomName::Fifo1).is_err());
    }

    #[test]
    fn addrem_violated_by_pop_of_initial_value() {
        // [PAPER] the four-invocation failure shape: two pushes, one matched
        // pop, and a pop returning the location's initial value 0.
        let a = alpha(&[
            ("push", 1, B, 0),
            ("push", 2, B, 0),
            ("pop", B, 2, 1),
            ("pop", B, 0, 1),
        ]);
        let out = check(&a, stack(AxiomName::AddRem)).unwrap();
        assert_eq!(out, Outcome::Counterexample(vec![3]));
    }

    #[test]
    fn hb_gamma_closure_on_fig3_shape() {
        // [DERIVED] closure over the six-invocation LIFO-1 violation:
        // session 0: push(1); push(2); pop:1 — session 1: push(3); pop:3 —
        // session 2: pop:0.
        let a = alpha(&[
            ("push", 1, B, 0),
            ("push", 2, B, 0),
            ("pop", B, 1, 0),
            ("push", 3, B, 1),
            ("pop", B, 3, 1),
            ("pop", B, 0, 2),
        ]);
        let hb = hb_gamma(&a, Datatype::Stack);
        assert!(hb.has(0, 1), "so within session");
        assert!(hb.has(0, 2), "match push(1) → pop:1");
        assert!(hb.has(3, 4), "match push(3) → pop:3");
        assert!(!hb.has(0, 4), "no cross-session path without shared edges");

        // γ₁ = push(2): push(1) hb push(2) hb pop:1, match(push(1), pop:1),
        // push(2) unmatched — LIFO-1 counterexample.
        let out = check(&a, stack(AxiomName::Lifo1)).unwrap();
        assert_eq!(out, Outcome::Counterexample(vec![1, 0, 2]));
        // The same execution also violates AddRem through pop:0.
        assert!(check(&a, stack(AxiomName::AddRem)).unwrap().is_violation());
    }

    #[test]
    fn hb_gamma_trivia() {
        // [TRIVIAL] single invocation → empty; coinciding so and match edges.
        let single = alpha(&[("push", 1, B, 0)]);
        assert_eq!(hb_gamma(&single, Datatype::Stack).pairs().count(), 0);
        let a = alpha(&[("push", 1, B, 0), ("pop", B, 1, 0)]);
        let hb = hb_gamma(&a, Datatype::Stack);
        assert!(hb.has(0, 1));
        assert_eq!(hb.pairs().count(), 1);
    }

    #[test]
    fn empty_axiom_variants() {
        // push in session 0, pop:EMPTY in session 1 with no so path: only the
        // HB variant can fire, and only when the push is hb-before via match.
        let a = alpha(&[("push", 1, B, 0), ("pop", B, E, 1)]);
        assert_eq!(check(&a, stack(AxiomName::EmptySo)).unwrap(), Outcome::Ok);
        assert_eq!(check(&a, stack(AxiomName::EmptyHb)).unwrap(), Outcome::Ok);
        // Same session: the unmatched push is so-before the EMPTY pop.
        let b = alpha(&[("push", 1, B, 0), ("pop", B, E, 0)]);
        assert!(check(&b, stack(AxiomName::EmptySo)).unwrap().is_violation());
        assert!(check(&b, stack(AxiomName::EmptyHb)).unwrap().is_violation());
        // Matched push before the EMPTY pop is fine.
        let c = alpha(&[("push", 1, B, 0), ("pop", B, 1, 0), ("pop", B, E, 0)]);
        assert_eq!(check(&c, stack(AxiomName::EmptySo)).unwrap(), Outcome::Ok);
    }

    #[test]
    fn empty_so_equals_empty_hb_on_single_session() {
        // Property: with one session, so_Γ already contains every match pair
        // that matters... verified on a few concrete shapes.
        for records in [
            vec![("push", 1, B, 0), ("pop", B, E, 0)],
            vec![("push", 1, B, 0), ("pop", B, 1, 0), ("pop", B, E, 0)],
            vec![("pop", B, E, 0), ("push", 1, B, 0)],
        ] {
            let a = alpha(&records);
            assert_eq!(
                check(&a, stack(AxiomName::EmptySo)).unwrap().is_violation(),
                check(&a, stack(AxiomName::EmptyHb)).unwrap().is_violation(),
            );
        }
    }

    #[test]
    fn exchanger_axioms() {
        let dt = Datatype::Exchanger;
        // [TRIVIAL] a failed exchange (ret ⊥) violates nothing.
        let a = alpha(&[("exchange", 1, B, 0)]);
        for ax in axioms_for(dt) {
            assert_eq!(check(&a, ax).unwrap(), Outcome::Ok, "{:?}", ax.name);
        }
        // Proper pairing is fine.
        let b = alpha(&[("exchange", 1, 2, 0), ("exchange", 2, 1, 1)]);
        for ax in axioms_for(dt) {
            assert_eq!(check(&b, ax).unwrap(), Outcome::Ok, "{:?}", ax.name);
        }
        // One-sided witness: γ₂ received 1 but γ₁ got ⊥ back — Exchange fails.
        let c = alpha(&[("exchange", 1, B, 0), ("exchange", 2, 1, 1)]);
        assert!(check(&c, AxiomId { datatype: dt, name: AxiomName::Exchange })
            .unwrap()
            .is_violation());
        // Value 3 appears from nowhere — AddRem fails.
        let d = alpha(&[("exchange", 1, 3, 0), ("exchange", 2, 1, 1)]);
        assert!(check(&d, AxiomId { datatype: dt, name: AxiomName::AddRem })
            .unwrap()
            .is_violation());
    }

    #[test]
    fn fifo_axioms() {
        let dt = Datatype::Queue;
        // enq(1); enq(2) in one session; deq:2 before deq:1 breaks FIFO-2?
        // FIFO-2 forbids match(γ1,γ4) ∧ match(γ2,γ3) ∧ hb(γ1,γ2) ∧ hb(γ3,γ4):
        // γ1=enq(1), γ2=enq(2), γ3=deq:2, γ4=deq:1 with deq:2 so-before deq:1.
        let a = alpha(&[
            ("enqueue", 1, B, 0),
            ("enqueue", 2, B, 0),
            ("dequeue", B, 2, 1),
            ("dequeue", B, 1, 1),
        ]);
        assert!(check(&a, AxiomId { datatype: dt, name: AxiomName::Fifo2 })
            .unwrap()
            .is_violation());
        // In-order dequeues satisfy every queue axiom.
        let b = alpha(&[
            ("enqueue", 1, B, 0),
            ("enqueue", 2, B, 0),
            ("dequeue", B, 1, 1),
            ("dequeue", B, 2, 1),
        ]);
        for ax in axioms_for(dt) {
            assert_eq!(check(&b, ax).unwrap(), Outcome::Ok, "{:?}", ax.name);
        }
        // FIFO-1: enq(1) hb-before a matched enq(2)/deq:2 pair, enq(1)
        // unmatched.
        let c = alpha(&[
            ("enqueue", 1, B, 0),
            ("enqueue", 2, B, 0),
            ("dequeue", B, 2, 0),
        ]);
        assert!(check(&c, AxiomId { datatype: dt, name: AxiomName::Fifo1 })
            .unwrap()
            .is_violation());
    }

    #[test]
    fn injective_needs_duplicate_consumption() {
        let a = alpha(&[("push", 1, B, 0), ("pop", B, 1, 1), ("pop", B, 1, 2)]);
        assert!(check(&a, stack(AxiomName::Injective)).unwrap().is_violation());
        let b = alpha(&[("push", 1, B, 0), ("pop", B, 1, 1), ("pop", B, E, 2)]);
        assert_eq!(check(&b, stack(AxiomName::Injective)).unwrap(), Outcome::Ok);
    }
}
