//! Weakest-policy search over the consistency lattice.
//!
//! Starting from eventual consistency, each candidate policy is swept over
//! increasing invocation bounds. A policy with a validated violation is
//! unsafe, and its minimal strict strengthenings join the frontier; a
//! policy surviving every bound is (bounded-)safe. Solver `unknown`s and
//! timeouts never count as safe: the policy is reported inconclusive and
//! its strengthenings are still explored.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::axioms::AxiomName;
use crate::dsl::LibraryDef;
use crate::policies::{Lattice, Policy};

use super::solve::Backend;
use super::{find_violation, CheckConfig, CheckOutcome, DriverError};

#[derive(Debug, Clone)]
pub struct SearchConfig {
    pub k_min: usize,
    pub k_max: usize,
    pub unroll: u32,
    pub per_query_timeout: Duration,
    pub budget: Duration,
    pub backend: Backend,
}

impl SearchConfig {
    pub fn new(backend: Backend) -> SearchConfig {
        SearchConfig {
            k_min: 2,
            k_max: 6,
            unroll: 1,
            per_query_timeout: Duration::from_secs(300),
            budget: Duration::from_secs(3600),
            backend,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QueryRecord {
    pub policy: String,
    pub k: usize,
    /// "violation", "none", "unknown", or "timeout".
    pub verdict: String,
    pub wall_ms: u128,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchReport {
    pub library: String,
    pub axiom: String,
    pub k_max: usize,
    pub queries: Vec<QueryRecord>,
    /// ⊑-minimal policies with no violation up to `k_max`.
    pub minimal_safe: Vec<String>,
    /// Policies whose verdict hit a solver timeout or unknown.
    pub inconclusive: Vec<String>,
    pub budget_exhausted: bool,
}

/// Finds the ⊑-minimal policies under which no bounded violation of
/// `axiom` exists.
pub fn weakest_policy_search(
    lib: &LibraryDef,
    axiom: AxiomName,
    cfg: &SearchConfig,
) -> Result<SearchReport, DriverError> {
    let lattice = Lattice::new();
    let deadline = Instant::now() + cfg.budget;
    let mut frontier: BTreeSet<Policy> = BTreeSet::from([Policy::EC]);
    let mut visited: BTreeSet<Policy> = BTreeSet::new();
    let mut safe: Vec<Policy> = Vec::new();
    let mut report = SearchReport {
        library: lib.name.clone(),
        axiom: axiom.as_str().to_string(),
        k_max: cfg.k_max,
        queries: Vec::new(),
        minimal_safe: Vec::new(),
        inconclusive: Vec::new(),
        budget_exhausted: false,
    };

    'outer: while let Some(p) = frontier.pop_first() {
        if !visited.insert(p.clone()) {
            continue;
        }
        // Monotonicity: anything above a safe policy is safe.
        if safe.iter().any(|q| lattice.le(q, &p)) {
            continue;
        }
        let mut p_safe = true;
        let mut p_conclusive = true;
        for k in cfg.k_min..=cfg.k_max {
            let remaining = deadline.saturating_duration_since(Instant::now());
            if remaining.is_zero() {
                report.budget_exhausted = true;
                break 'outer;
            }
            let check = CheckConfig {
                k,
                unroll: cfg.unroll,
                timeout: cfg.per_query_timeout.min(remaining),
                backend: cfg.backend.clone(),
            };
            let outcome = find_violation(lib, axiom, &p, &check)?;
            let (verdict, wall) = match &outcome {
                CheckOutcome::Violation { witness: _, wall } => ("violation", *wall),
                CheckOutcome::NoViolation { wall } => ("none", *wall),
                CheckOutcome::Unknown { timed_out, wall } => {
                    (if *timed_out { "timeout" } else { "unknown" }, *wall)
                }
            };
            report.queries.push(QueryRecord {
                policy: p.to_string(),
                k,
                verdict: verdict.to_string(),
                wall_ms: wall.as_millis(),
            });
            match outcome {
                CheckOutcome::NoViolation { .. } => continue,
                CheckOutcome::Violation { .. } => {
                    p_safe = false;
                    break;
                }
                CheckOutcome::Unknown { .. } => {
                    p_safe = false;
                    p_conclusive = false;
                    break;
                }
            }
        }
        if p_safe {
            safe.push(p);
        } else {
            if !p_conclusive {
                report.inconclusive.push(p.to_string());
            }
            for q in lattice.next_stronger(&p) {
                if !visited.contains(&q) {
                    frontier.insert(q);
                }
            }
        }
    }

    let minimal: Vec<&Policy> = safe
        .iter()
        .filter(|p| !safe.iter().any(|q| q != *p && lattice.le(q, p)))
        .collect();
    report.minimal_safe = minimal.iter().map(|p| p.to_string()).collect();
    report.minimal_safe.sort();
    Ok(report)
}
