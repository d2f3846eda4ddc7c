//! Consistency policies: the per-state predicates, the policy lattice, and
//! the derived happens-before relation.
//!
//! A policy is a conjunction of atoms, each a universally quantified
//! implication over (vis, so, hb) with hb = (vis ∪ so)⁺:
//!
//! | atom | predicate |
//! |------|-----------|
//! | RYW  | so(σ₁,σ₂) ⇒ vis(σ₁,σ₂) |
//! | MW   | so(σ₁,σ₂) ∧ vis(σ₂,σ₃) ⇒ vis(σ₁,σ₃) |
//! | MR   | vis(σ₁,σ₂) ∧ so(σ₂,σ₃) ⇒ vis(σ₁,σ₃) |
//! | WFR  | vis(σ₁,σ₂) ∧ so(σ₂,σ₃) ∧ vis(σ₃,σ₄) ⇒ vis(σ₁,σ₄) |
//! | CV   | hb(σ₁,σ₂) ∧ vis(σ₂,σ₃) ⇒ vis(σ₁,σ₃) |
//! | CC   | hb(σ₁,σ₂) ⇒ vis(σ₁,σ₂) |
//!
//! EC (eventual consistency) is the empty conjunction.

use crate::rel::Rel;
use std::collections::BTreeSet;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PolicyAtom {
    Ryw,
    Mw,
    Mr,
    Wfr,
    Cv,
    Cc,
}

impl PolicyAtom {
    pub const ALL: [PolicyAtom; 6] = [
        PolicyAtom::Ryw,
        PolicyAtom::Mw,
        PolicyAtom::Mr,
        PolicyAtom::Wfr,
        PolicyAtom::Cv,
        PolicyAtom::Cc,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PolicyAtom::Ryw => "ryw",
            PolicyAtom::Mw => "mw",
            PolicyAtom::Mr => "mr",
            PolicyAtom::Wfr => "wfr",
            PolicyAtom::Cv => "cv",
            PolicyAtom::Cc => "cc",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Policy {
    atoms: BTreeSet<PolicyAtom>,
}

#[derive(Debug, Error)]
#[error("unknown policy `{0}` (expected ec, ryw, mw, mr, wfr, cv, cc joined by `+`)")]
pub struct PolicyParseError(String);

impl Policy {
    pub const EC: Policy = Policy { atoms: BTreeSet::new() };

    pub fn from_atoms(atoms: impl IntoIterator<Item = PolicyAtom>) -> Policy {
        Policy { atoms: atoms.into_iter().collect() }
    }

    pub fn atoms(&self) -> impl Iterator<Item = PolicyAtom> + '_ {
        self.atoms.iter().copied()
    }

    pub fn is_ec(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn has(&self, a: PolicyAtom) -> bool {
        self.atoms.contains(&a)
    }

    /// Parses e.g. `ec`, `mw+mr`, `cc`.
    pub fn parse(s: &str) -> Result<Policy, PolicyParseError> {
        let s = s.trim().to_ascii_lowercase();
        if s == "ec" || s.is_empty() {
            return Ok(Policy::EC);
        }
        let mut atoms = BTreeSet::new();
        for part in s.split('+') {
            let atom = PolicyAtom::ALL
                .iter()
                .find(|a| a.as_str() == part.trim())
                .ok_or_else(|| PolicyParseError(part.trim().to_string()))?;
            atoms.insert(*atom);
        }
        Ok(Policy { atoms })
    }

    /// Whether every state satisfying `self` also satisfies `other`, per the
    /// lattice's syntactic order: atom-set inclusion, with CC implying
    /// everything and CV implying MW and WFR.
    pub fn subsumes(&self, other: &Policy) -> bool {
        other.atoms.iter().all(|a| self.implied_atoms().contains(a))
    }

    /// The atom set closed under the lattice's implications; two policies
    /// compare by inclusion of these sets, and the SMT encoding emits one
    /// clause group per implied atom so that stronger policies produce
    /// supersets of clauses.
    pub fn implied_atoms(&self) -> BTreeSet<PolicyAtom> {
        let mut out = self.atoms.clone();
        if out.contains(&PolicyAtom::Cc) {
            out.extend(PolicyAtom::ALL);
        }
        if out.contains(&PolicyAtom::Cv) {
            // so ⊆ hb gives MW; vis;so ⊆ hb gives WFR. MR is *not* implied:
            // vis;so ⊆ vis needs a vis edge on CV's second leg, and so-only
            // suffixes never supply one.
            out.extend([PolicyAtom::Mw, PolicyAtom::Wfr]);
        }
        out
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.atoms.is_empty() {
            return write!(f, "ec");
        }
        let parts: Vec<&str> = self.atoms.iter().map(|a| a.as_str()).collect();
        write!(f, "{}", parts.join("+"))
    }
}

/// The relational view of a store state that policies judge.
pub struct StateRels<'a> {
    pub vis: &'a Rel,
    pub so: &'a Rel,
}

/// hb = (vis ∪ so)⁺.
pub fn hb(vis: &Rel, so: &Rel) -> Rel {
    let mut h = vis.clone();
    h.union_with(so);
    h.close_transitive();
    h
}

/// Evaluates the conjunction of `p`'s atoms on the state.
pub fn holds(p: &Policy, st: &StateRels<'_>) -> bool {
    let n = st.vis.len();
    debug_assert_eq!(n, st.so.len());
    let needs_hb = p.has(PolicyAtom::Cv) || p.has(PolicyAtom::Cc);
    let hb_rel = if needs_hb { Some(hb(st.vis, st.so)) } else { None };
    for atom in p.atoms() {
        let ok = match atom {
            PolicyAtom::Ryw => implies_all(n, st.so, st.vis),
            PolicyAtom::Mw => compose_within(n, st.so, st.vis, st.vis),
            PolicyAtom::Mr => compose_within(n, st.vis, st.so, st.vis),
            PolicyAtom::Wfr => {
                // vis;so;vis ⊆ vis
                let mut vs = Rel::new(n);
                compose_into(n, st.vis, st.so, &mut vs);
                compose_within(n, &vs, st.vis, st.vis)
            }
            PolicyAtom::Cv => compose_within(n, hb_rel.as_ref().unwrap(), st.vis, st.vis),
            PolicyAtom::Cc => implies_all(n, hb_rel.as_ref().unwrap(), st.vis),
        };
        if !ok {
            return false;
        }
    }
    true
}

/// r ⊆ s.
fn implies_all(n: usize, r: &Rel, s: &Rel) -> bool {
    (0..n).all(|a| r.row(a) & !s.row(a) == 0)
}

/// r;s ⊆ target (returns the check result without materializing r;s).
fn compose_within(n: usize, r: &Rel, s: &Rel, target: &Rel) -> bool {
    for a in 0..n {
        let mut mids = r.row(a);
        while mids != 0 {
            let m = mids.trailing_zeros() as usize;
            mids &= mids - 1;
            if s.row(m) & !target.row(a) != 0 {
                return false;
            }
        }
    }
    true
}

/// out ∪= r;s.
fn compose_into(n: usize, r: &Rel, s: &Rel, out: &mut Rel) {
    for a in 0..n {
        let mut mids = r.row(a);
        let mut acc = 0u64;
        while mids != 0 {
            let m = mids.trailing_zeros() as usize;
            mids &= mids - 1;
            acc |= s.row(m);
        }
        out.or_row(a, acc);
    }
}

/// Least vis ⊇ `base` closed under `p`'s forcing rules, with `so` fixed.
/// Every Table-1 atom is a Horn rule in vis, so the fixpoint exists and is
/// the minimal policy-satisfying extension of `base`.
pub fn close_vis(p: &Policy, base: &Rel, so: &Rel) -> Rel {
    let n = base.len();
    let mut vis = base.clone();
    loop {
        let before = vis.clone();
        let hb_rel = if p.has(PolicyAtom::Cv) || p.has(PolicyAtom::Cc) {
            Some(hb(&vis, so))
        } else {
            None
        };
        let mut add = Rel::new(n);
        for atom in p.atoms() {
            match atom {
                PolicyAtom::Ryw => add.union_with(so),
                PolicyAtom::Mw => compose_into(n, so, &vis, &mut add),
                PolicyAtom::Mr => compose_into(n, &vis, so, &mut add),
                PolicyAtom::Wfr => {
                    let mut vs = Rel::new(n);
                    compose_into(n, &vis, so, &mut vs);
                    compose_into(n, &vs, &vis, &mut add);
                }
                PolicyAtom::Cv => compose_into(n, hb_rel.as_ref().unwrap(), &vis, &mut add),
                PolicyAtom::Cc => add.union_with(hb_rel.as_ref().unwrap()),
            }
        }
        vis.union_with(&add);
        if vis == before {
            // Self-edges can be forced on cyclic inputs; callers check
            // irreflexivity afterwards. The fixpoint itself always exists.
            return vis;
        }
    }
}

/// The policy lattice: the powerset of the four session guarantees, plus CV
/// (above MW and WFR, incomparable to RYW and MR) and CC (top).
#[derive(Debug, Clone)]
pub struct Lattice {
    points: Vec<Policy>,
}

impl Default for Lattice {
    fn default() -> Self {
        Lattice::new()
    }
}

impl Lattice {
    pub fn new() -> Lattice {
        let session = [PolicyAtom::Ryw, PolicyAtom::Mw, PolicyAtom::Mr, PolicyAtom::Wfr];
        let mut points = Vec::new();
        for mask in 0u32..16 {
            let atoms = session
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, a)| *a);
            points.push(Policy::from_atoms(atoms));
        }
        points.push(Policy::from_atoms([PolicyAtom::Cv]));
        points.push(Policy::from_atoms([PolicyAtom::Cc]));
        Lattice { points }
    }

    pub fn points(&self) -> &[Policy] {
        &self.points
    }

    pub fn bottom(&self) -> Policy {
        Policy::EC
    }

    pub fn top(&self) -> Policy {
        Policy::from_atoms([PolicyAtom::Cc])
    }

    /// p ⊑ q: q is at least as strong.
    pub fn le(&self, p: &Policy, q: &Policy) -> bool {
        q.subsumes(p)
    }

    /// Minimal strict upper bounds of `p` within the lattice.
    pub fn next_stronger(&self, p: &Policy) -> Vec<Policy> {
        let above: Vec<&Policy> =
            self.points.iter().filter(|q| self.le(p, q) && *q != p).collect();
        let mut out: Vec<Policy> = Vec::new();
        for q in &above {
            if !above.iter().any(|r| r != q && self.le(r, q)) {
                out.push((*q).clone());
            }
        }
        out.sort();
        out
    }

    /// Cheap startup soundness probe: on random small states, whenever a
    /// stronger policy holds, every weaker one must hold too.
    pub fn validate_by_probe(&self, samples: usize, seed: u64) -> Result<(), String> {
        let mut rng = seed.max(1);
        let mut next = move || {
            // xorshift64
            rng ^= rng << 13;
            rng ^= rng >> 7;
            rng ^= rng << 17;
            rng
        };
        for _ in 0..samples {
            let n = (next() % 5 + 2) as usize;
            let mut vis = Rel::new(n);
            let mut so = Rel::new(n);
            // random session split, so = order within each half
            let split = (next() % (n as u64 + 1)) as usize;
            for a in 0..n {
                for b in (a + 1)..n {
                    if (a < split) == (b < split) {
                        so.add(a, b);
                    }
                }
            }
            for a in 0..n {
                for b in 0..n {
                    if a != b && !so.has(b, a) && next() % 3 == 0 {
                        vis.add(a, b);
                    }
                }
            }
            let mut v = vis.clone();
            v.union_with(&so);
            if !v.is_acyclic() {
                continue;
            }
            let st = StateRels { vis: &vis, so: &so };
            for p in &self.points {
                for q in &self.points {
                    if self.le(p, q) && holds(q, &st) && !holds(p, &st) {
                        return Err(format!(
                            "lattice order unsound: {q} holds but {p} ⊑ {q} fails"
                        ));
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(n: usize, pairs: &[(usize, usize)]) -> Rel {
        let mut r = Rel::new(n);
        for (a, b) in pairs {
            r.add(*a, *b);
        }
        r
    }

    #[test]
    fn ec_holds_everywhere() {
        // [TRIVIAL] empty conjunction
        let vis = rel(3, &[(0, 1)]);
        let so = rel(3, &[(1, 2)]);
        assert!(holds(&Policy::EC, &StateRels { vis: &vis, so: &so }));
    }

    #[test]
    fn mw_fails_on_three_event_chain() {
        // [DERIVED] so(σ₁,σ₂), vis(σ₂,σ₃), ¬vis(σ₁,σ₃) violates MW.
        let so = rel(3, &[(0, 1)]);
        let vis = rel(3, &[(1, 2)]);
        let st = StateRels { vis: &vis, so: &so };
        assert!(!holds(&Policy::parse("mw").unwrap(), &st));
        let vis_ok = rel(3, &[(1, 2), (0, 2)]);
        let st_ok = StateRels { vis: &vis_ok, so: &so };
        assert!(holds(&Policy::parse("mw").unwrap(), &st_ok));
    }

    #[test]
    fn hb_is_transitive_closure() {
        // [TRIVIAL] vis={(a,b)}, so={(b,c)} closes to include (a,c).
        let vis = rel(3, &[(0, 1)]);
        let so = rel(3, &[(1, 2)]);
        let h = hb(&vis, &so);
        assert!(h.has(0, 1) && h.has(1, 2) && h.has(0, 2));
        let e = hb(&Rel::new(3), &Rel::new(3));
        assert!(e.pairs().next().is_none());
    }

    #[test]
    fn cc_implies_every_atom() {
        let l = Lattice::new();
        let cc = l.top();
        for a in PolicyAtom::ALL {
            assert!(cc.subsumes(&Policy::from_atoms([a])));
        }
    }

    #[test]
    fn parse_and_display_round_trip() {
        for s in ["ec", "ryw", "mw+mr", "mw+mr+wfr", "cv", "cc"] {
            let p = Policy::parse(s).unwrap();
            assert_eq!(p.to_string(), s);
        }
        assert_eq!(Policy::parse("mr+mw").unwrap().to_string(), "mw+mr");
        assert!(Policy::parse("bogus").is_err());
    }

    #[test]
    fn next_stronger_matches_lattice_shape() {
        let l = Lattice::new();
        // [DERIVED] minimal one-atom policies above bottom
        let up_ec = l.next_stronger(&Policy::EC);
        assert_eq!(
            up_ec,
            ["mr", "mw", "ryw", "wfr"]
                .iter()
                .map(|s| Policy::parse(s).unwrap())
                .collect::<Vec<_>>()
                .into_iter()
                .collect::<std::collections::BTreeSet<_>>()
                .into_iter()
                .collect::<Vec<_>>()
        );
        // [DERIVED] add-one-atom successors of MW+MR; CV does not imply MR,
        // so it is incomparable to mw+mr rather than above it.
        let up = l.next_stronger(&Policy::parse("mw+mr").unwrap());
        assert!(up.contains(&Policy::parse("mw+mr+wfr").unwrap()));
        assert!(up.contains(&Policy::parse("mw+mr+ryw").unwrap()));
        assert!(!up.contains(&Policy::parse("cv").unwrap()));
        assert_eq!(up.len(), 2);
        // [DERIVED] CV's only successor is CC.
        assert_eq!(l.next_stronger(&Policy::parse("cv").unwrap()), vec![l.top()]);
        // [DERIVED] CV covers exactly the subsets of {MW, WFR}.
        assert_eq!(
            l.next_stronger(&Policy::parse("mw+wfr").unwrap()),
            vec![
                Policy::parse("cv").unwrap(),
                Policy::parse("ryw+mw+wfr").unwrap(),
                Policy::parse("mw+mr+wfr").unwrap(),
            ]
            .into_iter()
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .collect::<Vec<_>>()
        );
        // [DERIVED] above mw+mr+wfr only the full session set remains
        // minimal (CC subsumes it, CV misses MR).
        assert_eq!(
            l.next_stronger(&Policy::parse("mw+mr+wfr").unwrap()),
            vec![Policy::parse("ryw+mw+mr+wfr").unwrap()]
        );
    }

    #[test]
    fn close_vis_reaches_policy_satisfaction() {
        let so = rel(3, &[(0, 1)]);
        let base = rel(3, &[(1, 2)]);
        let p = Policy::parse("mw").unwrap();
        let closed = close_vis(&p, &base, &so);
        assert!(closed.has(0, 2));
        assert!(holds(&p, &StateRels { vis: &closed, so: &so }));
        // Minimality: nothing beyond base and the forced edge.
        assert_eq!(closed.pairs().count(), 2);
    }

    #[test]
    fn startup_probe_passes() {
        Lattice::new().validate_by_probe(200, 0xfeed).unwrap();
    }
}
