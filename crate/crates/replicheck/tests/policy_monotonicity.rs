//! Lattice soundness: a state satisfying a policy satisfies every weaker
//! policy. This is what makes the weakest-policy search's pruning (and the
//! encoder's clause-subset construction) correct.

use proptest::prelude::*;

use replicheck::policies::{holds, Lattice, StateRels};
use replicheck::rel::Rel;

/// A random store-shaped state: `n` events with a session each, so = same-
/// session id order, vis an arbitrary id-ascending edge set.
#[derive(Debug, Clone)]
struct RandomState {
    sessions: Vec<usize>,
    vis_edges: Vec<(usize, usize)>,
}

impl RandomState {
    fn rels(&self) -> (Rel, Rel) {
        let n = self.sessions.len();
        let mut vis = Rel::new(n);
        for &(a, b) in &self.vis_edges {
            vis.add(a, b);
        }
        let mut so = Rel::new(n);
        for a in 0..n {
            for b in a + 1..n {
                if self.sessions[a] == self.sessions[b] {
                    so.add(a, b);
                }
            }
        }
        (vis, so)
    }
}

fn random_state() -> impl Strategy<Value = RandomState> {
    (1usize..=6)
        .prop_flat_map(|n| {
            let sessions = proptest::collection::vec(0usize..3, n);
            let pairs: Vec<(usize, usize)> =
                (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
            let picks = proptest::collection::vec(any::<bool>(), pairs.len());
            (sessions, Just(pairs), picks)
        })
        .prop_map(|(sessions, pairs, picks)| RandomState {
            sessions,
            vis_edges: pairs
                .into_iter()
                .zip(picks)
                .filter_map(|(p, keep)| keep.then_some(p))
                .collect(),
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    /// For every comparable lattice pair p ⊑ q: holds(q) ⇒ holds(p).
    #[test]
    fn weaker_policies_hold_whenever_stronger_ones_do(st in random_state()) {
        let (vis, so) = st.rels();
        let rels = StateRels { vis: &vis, so: &so };
        let lattice = Lattice::new();
        let verdicts: Vec<bool> =
            lattice.points().iter().map(|p| holds(p, &rels)).collect();
        for (qi, q) in lattice.points().iter().enumerate() {
            if !verdicts[qi] {
                continue;
            }
            for (pi, p) in lattice.points().iter().enumerate() {
                if lattice.le(p, q) {
                    prop_assert!(
                        verdicts[pi],
                        "state satisfies {q} but not the weaker {p}"
                    );
                }
            }
        }
    }

    /// close_vis really is a closure: its result satisfies the policy and
    /// contains the base relation.
    #[test]
    fn close_vis_reaches_a_holding_superset(st in random_state()) {
        let (vis, so) = st.rels();
        let lattice = Lattice::new();
        for p in lattice.points() {
            let closed = replicheck::policies::close_vis(p, &vis, &so);
            for (a, b) in vis.pairs() {
                prop_assert!(closed.has(a, b));
            }
            let closed_rels = StateRels { vis: &closed, so: &so };
            prop_assert!(holds(p, &closed_rels));
        }
    }
}
