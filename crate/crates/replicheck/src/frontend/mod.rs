//! Lowering from the AST to loop-free guarded atoms, and the static
//! location universe.
//!
//! Unrolling replaces every `while b { c }` by `bound` nested copies of
//! `if b { c; ... }`. The residual condition after the last copy marks the
//! path as not-completed: the invocation never returns there. Locals are
//! SSA-renamed during the walk; each atom carries a guard formula over SSA
//! versions assigned earlier, so the atom list is straight-line and the
//! control structure lives entirely in the guards.

mod unroll;
mod universe;

pub use unroll::{
    alloc_sites, alloc_sites_by_label, field_count, field_index, unroll, Atom, AtomKind, GExpr,
    LocGE, SsaVar, UnrolledMethod,
};
pub use universe::{location_universe, AllocSite, LocationUniverse};
